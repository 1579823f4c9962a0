//! Picard iteration for the Duhamel form
//! `c(t,n) = e^{lambda t} c(n) + (lambda/p) int_0^t e^{lambda (t-s)} (c^{*p})(s,n) ds`
//! on a uniform time grid over a truncated lattice.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{horizon, BoundsError, DifferenceBound, HorizonReport};
use crate::oracle::{rk4_integrate, OracleError};
use crate::lattice::{multiplier, FrequencyVector, LatticeError, MultiIndex, Truncation};
use crate::spectral::{check_envelope, convolve_power, CoeffField, DecayProfile, SpectralError, ENVELOPE_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("nonlinearity degree requires p >= 2 (got {0})")]
    BadDegree(u32),
    #[error("the wave vector has {omega} entries but nu = {nu}")]
    OmegaDimension { nu: usize, omega: usize },
    #[error("time horizon requires T > 0 and finite (got {0})")]
    BadTime(f64),
    #[error("T = {t} exceeds the guaranteed horizon {horizon}; pass the horizon override to explore past it")]
    BeyondHorizon { t: f64, horizon: f64 },
    #[error("time grid requires M >= 1 steps")]
    NoSteps,
    #[error("simpson quadrature requires an even number of steps (got M = {0})")]
    OddSimpson(usize),
    #[error("fixed-point iteration requires max_iters >= 1")]
    NoIterations,
    #[error("fixed-point tolerance requires tol > 0 (got {0})")]
    BadTolerance(f64),
    #[error(transparent)]
    Profile(#[from] SpectralError),
    #[error(transparent)]
    Bounds(#[from] BoundsError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PicardError {
    #[error("invalid configuration: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("no convergence after {iters} iterations; sup-differences {history:?}")]
    NotConverged { iters: u32, history: Vec<f64> },
    #[error("iterate {k} leaves the decay envelope at t = {t} (ratio {ratio})")]
    EnvelopeViolation { k: u32, t: f64, ratio: f64 },
    #[error("oracle failure: {0}")]
    Oracle(String),
    #[error("time grids or truncations do not match")]
    GridMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum QuadRule {
    #[default]
    Trapezoid,
    Simpson,
}

impl std::str::FromStr for QuadRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "trapezoid" => Ok(QuadRule::Trapezoid),
            "simpson" => Ok(QuadRule::Simpson),
            other => Err(format!("unknown quadrature rule {other:?} (expected trapezoid or simpson)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub p: u32,
    pub nu: usize,
    pub radius: u32,
    pub omega: FrequencyVector,
    pub time_horizon: f64,
    pub time_steps: usize,
    pub max_iters: u32,
    pub quad_rule: QuadRule,
    pub tol_fixed_point: f64,
    pub profile: DecayProfile,
    pub seed: u64,
    pub override_horizon: bool,
}

pub const DEFAULT_STEPS: usize = 512;
pub const DEFAULT_MAX_ITERS: u32 = 25;
pub const DEFAULT_TOL: f64 = 1e-10;

impl SolverConfig {
    /// Defaults: `omega = (1, sqrt2, ...)`, `T` = the guaranteed horizon,
    /// `M = 512`, `K = 25`, trapezoid, `tol = 1e-10`.
    pub fn new(p: u32, nu: usize, radius: u32, profile: DecayProfile) -> Result<Self, ConfigError> {
        if p < 2 {
            return Err(ConfigError::BadDegree(p));
        }
        let omega = FrequencyVector::default_for(nu).map_err(SpectralError::from)?;
        let h = horizon(p, &profile, nu)?;
        Ok(SolverConfig {
            p,
            nu,
            radius,
            omega,
            time_horizon: h.horizon,
            time_steps: DEFAULT_STEPS,
            max_iters: DEFAULT_MAX_ITERS,
            quad_rule: QuadRule::Trapezoid,
            tol_fixed_point: DEFAULT_TOL,
            profile,
            seed: 0,
            override_horizon: false,
        })
    }

    pub fn trunc(&self) -> Truncation {
        Truncation { nu: self.nu, radius: self.radius }
    }

    pub fn horizon_report(&self) -> Result<HorizonReport, ConfigError> {
        Ok(horizon(self.p, &self.profile, self.nu)?)
    }

    pub fn validate(&self) -> Result<HorizonReport, ConfigError> {
        if self.p < 2 {
            return Err(ConfigError::BadDegree(self.p));
        }
        if self.nu == 0 {
            return Err(SpectralError::Lattice(LatticeError::ZeroDimension).into());
        }
        if self.omega.nu() != self.nu {
            return Err(ConfigError::OmegaDimension { nu: self.nu, omega: self.omega.nu() });
        }
        let rep = self.horizon_report()?;
        let t = self.time_horizon;
        if !(t > 0.0 && t.is_finite()) {
            return Err(ConfigError::BadTime(t));
        }
        if t > rep.horizon && !self.override_horizon {
            return Err(ConfigError::BeyondHorizon { t, horizon: rep.horizon });
        }
        if self.time_steps == 0 {
            return Err(ConfigError::NoSteps);
        }
        if self.quad_rule == QuadRule::Simpson && self.time_steps % 2 == 1 {
            return Err(ConfigError::OddSimpson(self.time_steps));
        }
        if self.max_iters == 0 {
            return Err(ConfigError::NoIterations);
        }
        if !(self.tol_fixed_point > 0.0 && self.tol_fixed_point.is_finite()) {
            return Err(ConfigError::BadTolerance(self.tol_fixed_point));
        }
        Ok(rep)
    }

    /// `t_m = m T / M`, with `t_M = T` exactly.
    pub fn grid(&self) -> Vec<f64> {
        uniform_grid(self.time_horizon, self.time_steps)
    }
}

pub fn uniform_grid(t_end: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|m| t_end * m as f64 / steps as f64).collect()
}

/// Coefficient fields sampled on a uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGridField {
    pub times: Vec<f64>,
    pub frames: Vec<CoeffField>,
}

impl TimeGridField {
    pub fn trunc(&self) -> Truncation {
        self.frames[0].trunc()
    }

    pub fn last(&self) -> &CoeffField {
        self.frames.last().expect("a grid has at least one frame")
    }

    /// `sup_{m,n} |self - other|`.
    pub fn sup_distance(&self, other: &TimeGridField) -> Result<f64, PicardError> {
        if self.frames.len() != other.frames.len() {
            return Err(PicardError::GridMismatch);
        }
        Ok(self
            .frames
            .iter()
            .zip(&other.frames)
            .map(|(a, b)| a.sup_distance(b))
            .fold(0.0, f64::max))
    }

    /// Per-frame `sup_n |self - other|`.
    pub fn frame_distances(&self, other: &TimeGridField) -> Result<Vec<f64>, PicardError> {
        if self.frames.len() != other.frames.len() {
            return Err(PicardError::GridMismatch);
        }
        Ok(self.frames.iter().zip(&other.frames).map(|(a, b)| a.sup_distance(b)).collect())
    }

    /// Largest conjugate-symmetry defect over all frames.
    pub fn reality_defect(&self) -> f64 {
        self.frames.iter().map(CoeffField::reality_defect).fold(0.0, f64::max)
    }

    /// True when the mean mode is bitwise equal in every frame.
    pub fn mean_conserved(&self) -> bool {
        let z = MultiIndex::zero(self.trunc().nu);
        let c0 = self.frames[0].get(&z);
        self.frames.iter().all(|f| {
            let c = f.get(&z);
            c.re.to_bits() == c0.re.to_bits() && c.im.to_bits() == c0.im.to_bits()
        })
    }
}

/// Lattice points and multipliers of a truncation.
#[derive(Debug, Clone)]
struct Modes {
    points: Vec<MultiIndex>,
    lambda: Vec<Complex64>,
}

impl Modes {
    fn new(trunc: Truncation, omega: &FrequencyVector) -> Result<Self, PicardError> {
        let points = trunc.enumerate();
        let lambda = points.iter().map(|n| multiplier(n, omega)).collect::<Result<_, _>>()?;
        Ok(Modes { points, lambda })
    }

    fn frame(&self, trunc: Truncation, vals: impl Iterator<Item = Complex64>) -> CoeffField {
        let map: BTreeMap<MultiIndex, Complex64> = self.points.iter().cloned().zip(vals).collect();
        CoeffField::from_map_unchecked(trunc, map)
    }
}

/// `c_0(t_m, n) = e^{lambda(n) t_m} init(n)` on the truncation.
pub fn c0(init: &CoeffField, cfg: &SolverConfig) -> Result<TimeGridField, PicardError> {
    let modes = Modes::new(cfg.trunc(), &cfg.omega)?;
    let (init, _) = init.restrict(cfg.trunc());
    Ok(linear_flow(&init, &modes, cfg.trunc(), &cfg.grid()))
}

fn linear_flow(init: &CoeffField, modes: &Modes, trunc: Truncation, times: &[f64]) -> TimeGridField {
    let frames = times
        .iter()
        .map(|&t| {
            modes.frame(
                trunc,
                modes.points.iter().zip(&modes.lambda).map(|(n, lam)| {
                    let c = init.get(n);
                    if *lam == Complex64::default() {
                        c
                    } else {
                        (lam * t).exp() * c
                    }
                }),
            )
        })
        .collect();
    TimeGridField { times: times.to_vec(), frames }
}

/// Cumulative quadrature `Q_m ~ int_0^{t_m} h` for every `m`, from samples
/// `h_0..h_M` with spacing `dt`.
///
/// Simpson: composite Simpson at even `m`; Simpson on `[0, t_{m-3}]` plus the
/// 3/8 rule at odd `m >= 3`; trapezoid at `m = 1`.
pub fn cumulative_quadrature(h: &[Complex64], dt: f64, rule: QuadRule) -> Vec<Complex64> {
    let m_max = h.len() - 1;
    let mut q = vec![Complex64::default(); h.len()];
    match rule {
        QuadRule::Trapezoid => {
            let mut prefix = h[0];
            for m in 1..=m_max {
                prefix += h[m];
                q[m] = (prefix - 0.5 * (h[0] + h[m])) * dt;
            }
        }
        QuadRule::Simpson => {
            for m in (2..=m_max).step_by(2) {
                q[m] = q[m - 2] + (h[m - 2] + 4.0 * h[m - 1] + h[m]) * (dt / 3.0);
            }
            if m_max >= 1 {
                q[1] = 0.5 * (h[0] + h[1]) * dt;
            }
            for m in (3..=m_max).step_by(2) {
                q[m] = q[m - 3] + (h[m - 3] + 3.0 * h[m - 2] + 3.0 * h[m - 1] + h[m]) * (3.0 * dt / 8.0);
            }
        }
    }
    q
}

/// Per-frame p-fold convolutions of a grid field, with the largest discarded
/// mass.
fn frame_convolutions(prev: &TimeGridField, p: u32) -> Result<(Vec<CoeffField>, f64), PicardError> {
    let conv = |f: &CoeffField| convolve_power(f, p);
    #[cfg(feature = "parallel")]
    let out: Vec<_> = {
        use rayon::prelude::*;
        prev.frames.par_iter().map(conv).collect::<Result<_, _>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let out: Vec<_> = prev.frames.iter().map(conv).collect::<Result<_, _>>()?;
    let lost = out.iter().map(|c| c.discarded_mass).fold(0.0, f64::max);
    Ok((out.into_iter().map(|c| c.field).collect(), lost))
}

/// One Duhamel application with the previous iterate inside the integral:
/// `new(t_m,n) = e^{lambda t_m} [ init(n) + (lambda/p) Q_m(e^{-lambda s} conv(s,n)) ]`.
/// Modes with `lambda = 0` are copied from `init` untouched.
pub fn picard_step(prev: &TimeGridField, init: &CoeffField, cfg: &SolverConfig) -> Result<TimeGridField, PicardError> {
    Ok(step_with_mass(prev, init, cfg)?.0)
}

fn step_with_mass(
    prev: &TimeGridField,
    init: &CoeffField,
    cfg: &SolverConfig,
) -> Result<(TimeGridField, f64), PicardError> {
    let trunc = cfg.trunc();
    if prev.trunc() != trunc {
        return Err(PicardError::GridMismatch);
    }
    let modes = Modes::new(trunc, &cfg.omega)?;
    let (conv, lost) = frame_convolutions(prev, cfg.p)?;
    let times = &prev.times;
    let dt = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
    let pf = f64::from(cfg.p);
    let column = |i: usize| -> Vec<Complex64> {
        let n = &modes.points[i];
        let lam = modes.lambda[i];
        let c = init.get(n);
        if lam == Complex64::default() {
            return vec![c; times.len()];
        }
        let h: Vec<Complex64> =
            times.iter().zip(&conv).map(|(&t, g)| (-lam * t).exp() * g.get(n)).collect();
        let q = cumulative_quadrature(&h, dt, cfg.quad_rule);
        times.iter().zip(q).map(|(&t, qm)| (lam * t).exp() * (c + lam / pf * qm)).collect()
    };
    #[cfg(feature = "parallel")]
    let cols: Vec<Vec<Complex64>> = {
        use rayon::prelude::*;
        (0..modes.points.len()).into_par_iter().map(column).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let cols: Vec<Vec<Complex64>> = (0..modes.points.len()).map(column).collect();
    let frames = (0..times.len())
        .map(|m| modes.frame(trunc, cols.iter().map(|col| col[m])))
        .collect();
    Ok((TimeGridField { times: times.clone(), frames }, lost))
}

/// Picard iterates `c_0, c_1, ...` for one configuration.
#[derive(Debug, Clone)]
pub struct PicardIteration {
    cfg: SolverConfig,
    init: CoeffField,
    current: TimeGridField,
    k: u32,
    last_discarded: f64,
}

impl PicardIteration {
    pub fn new(cfg: &SolverConfig, init: &CoeffField) -> Result<Self, PicardError> {
        cfg.validate()?;
        let (init, _) = init.restrict(cfg.trunc());
        let current = c0(&init, cfg)?;
        Ok(PicardIteration { cfg: cfg.clone(), init, current, k: 0, last_discarded: 0.0 })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn current(&self) -> &TimeGridField {
        &self.current
    }

    pub fn into_current(self) -> TimeGridField {
        self.current
    }

    /// Largest l1 mass dropped by the truncated convolutions of the last step.
    pub fn last_discarded(&self) -> f64 {
        self.last_discarded
    }

    /// Advances to `c_{k+1}`; returns the previous iterate.
    pub fn step(&mut self) -> Result<TimeGridField, PicardError> {
        let (next, lost) = step_with_mass(&self.current, &self.init, &self.cfg)?;
        self.last_discarded = lost;
        self.k += 1;
        Ok(std::mem::replace(&mut self.current, next))
    }
}

/// Diagnostics for one iterate `c_k`, `k >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateReport {
    pub k: u32,
    /// `sup_{m,n} |c_k - c_{k-1}|`.
    pub sup_diff: f64,
    /// Theoretical difference bound at `t = T`, `n = 0`.
    pub bound_sup: f64,
    /// `max_{m,n} |c_k - c_{k-1}| / bound(k, t_m, n)` over `t_m > 0`.
    pub bound_ratio: f64,
    /// `max_{m,n} |c_k| / (B decay(n))`.
    pub envelope_ratio: f64,
    /// First grid time where the envelope ratio exceeds `1 + 1e-9`.
    pub envelope_first_failure: Option<f64>,
    /// Largest l1 mass dropped by the truncated convolutions.
    pub discarded_mass: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub horizon: f64,
    pub constant_b: f64,
    pub beyond_horizon: bool,
    /// `max_n |init(n)| / initial envelope(n)`; above `1 + 1e-9` the data lie
    /// outside the profile class and no guarantee applies.
    pub init_envelope_ratio: f64,
    pub envelope_ratio_c0: f64,
    pub iterations: Vec<IterateReport>,
    pub converged: bool,
    pub residual: f64,
}

impl Diagnostics {
    pub fn history(&self) -> Vec<f64> {
        self.iterations.iter().map(|r| r.sup_diff).collect()
    }

    pub fn max_bound_ratio(&self) -> f64 {
        self.iterations.iter().map(|r| r.bound_ratio).fold(0.0, f64::max)
    }

    pub fn max_envelope_ratio(&self) -> f64 {
        self.iterations.iter().map(|r| r.envelope_ratio).fold(self.envelope_ratio_c0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub solution: TimeGridField,
    pub diagnostics: Diagnostics,
}

fn envelope_scan(field: &TimeGridField, rep: &HorizonReport) -> (f64, Option<f64>) {
    let env = rep.decay_envelope();
    let mut worst: f64 = 0.0;
    let mut first = None;
    for (t, f) in field.times.iter().zip(&field.frames) {
        let r = check_envelope(f, &env, ENVELOPE_TOL);
        worst = worst.max(r.ratio);
        if !r.pass && first.is_none() {
            first = Some(*t);
        }
    }
    (worst, first)
}

fn difference_ratio(cur: &TimeGridField, prev: &TimeGridField, bound: &DifferenceBound, k: u32) -> f64 {
    let mut worst: f64 = 0.0;
    for ((t, a), b) in cur.times.iter().zip(&cur.frames).zip(&prev.frames) {
        if *t <= 0.0 {
            continue;
        }
        for (n, v) in a.iter() {
            let d = (v - b.get(n)).norm();
            let bd = bound.at(k, *t, n.l1());
            if d > 0.0 {
                worst = worst.max(d / bd);
            }
        }
    }
    worst
}

/// Iterates until `sup |c_k - c_{k-1}| <= tol` or `K` steps, recording the
/// difference history against the theoretical bound and the decay-envelope
/// check of every iterate. Inside the guaranteed horizon, an envelope
/// violation beyond `1e-9` for data within the profile class is an error.
pub fn solve(cfg: &SolverConfig, init: &CoeffField) -> Result<Solution, PicardError> {
    let rep = cfg.validate()?;
    let beyond = cfg.time_horizon > rep.horizon;
    let init_ratio = check_envelope(init, &cfg.profile.initial_envelope(cfg.p), ENVELOPE_TOL).ratio;
    let in_class = init_ratio <= 1.0 + ENVELOPE_TOL;
    if !in_class {
        log::warn!("initial data exceed the profile envelope (ratio {init_ratio:.6}); bounds are advisory");
    }
    let bound = DifferenceBound::for_profile(cfg.p, &cfg.profile, cfg.nu).map_err(ConfigError::from)?;
    let mut it = PicardIteration::new(cfg, init)?;
    let (env0, _) = envelope_scan(it.current(), &rep);
    let mut reports = Vec::new();
    let mut converged = false;
    while it.k() < cfg.max_iters {
        let prev = it.step()?;
        let cur = it.current();
        let k = it.k();
        let sup_diff = cur.sup_distance(&prev)?;
        let (envelope_ratio, envelope_first_failure) = envelope_scan(cur, &rep);
        let report = IterateReport {
            k,
            sup_diff,
            bound_sup: bound.sup(k, cfg.time_horizon),
            bound_ratio: difference_ratio(cur, &prev, &bound, k),
            envelope_ratio,
            envelope_first_failure,
            discarded_mass: it.last_discarded(),
        };
        log::debug!("iterate {k}: sup diff {sup_diff:e}, envelope ratio {envelope_ratio:.6}");
        reports.push(report);
        if let Some(t) = envelope_first_failure {
            if in_class && !beyond {
                return Err(PicardError::EnvelopeViolation { k, t, ratio: envelope_ratio });
            }
        }
        if sup_diff <= cfg.tol_fixed_point {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(PicardError::NotConverged {
            iters: it.k(),
            history: reports.iter().map(|r| r.sup_diff).collect(),
        });
    }
    let (init_r, _) = init.restrict(cfg.trunc());
    let solution = it.into_current();
    let res = residual(&solution, &init_r, cfg)?;
    Ok(Solution {
        solution,
        diagnostics: Diagnostics {
            horizon: rep.horizon,
            constant_b: rep.constant_b,
            beyond_horizon: beyond,
            init_envelope_ratio: init_ratio,
            envelope_ratio_c0: env0,
            iterations: reports,
            converged,
            residual: res,
        },
    })
}

/// `sup |c - Duhamel(c)|` over the grid and the truncation.
pub fn residual(solution: &TimeGridField, init: &CoeffField, cfg: &SolverConfig) -> Result<f64, PicardError> {
    let image = picard_step(solution, init, cfg)?;
    image.sup_distance(solution)
}

/// Sup-distance over the grid between the Picard solution and the RK4 oracle
/// run with the same number of steps.
pub fn uniqueness_probe(cfg: &SolverConfig, init: &CoeffField) -> Result<f64, PicardError> {
    let sol = solve(cfg, init)?;
    let rk = rk4_integrate(init, cfg.time_horizon, cfg.time_steps, &cfg.omega, cfg.p, cfg.trunc())
        .map_err(|e| match e {
            OracleError::Spectral(s) => PicardError::Spectral(s),
            OracleError::Lattice(l) => PicardError::Lattice(l),
            other => PicardError::Oracle(other.to_string()),
        })?;
    sol.solution.sup_distance(&rk)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub steps: usize,
    pub distance: f64,
    /// Previous distance over this one; `None` on the first row.
    pub ratio: Option<f64>,
}

/// [`uniqueness_probe`] at `M, 2M, 4M, ...` (`levels` rows).
pub fn refinement_study(cfg: &SolverConfig, init: &CoeffField, levels: usize) -> Result<Vec<RefinementRow>, PicardError> {
    let mut rows: Vec<RefinementRow> = Vec::with_capacity(levels);
    let mut c = cfg.clone();
    for _ in 0..levels {
        let distance = uniqueness_probe(&c, init)?;
        let ratio = rows.last().map(|r| r.distance / distance);
        rows.push(RefinementRow { steps: c.time_steps, distance, ratio });
        c.time_steps *= 2;
    }
    Ok(rows)
}
