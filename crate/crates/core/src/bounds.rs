//! Analytic constants: zeta partial sums, the lattice sums `H(s;nu)` and their
//! closed bound `b(s;nu)`, the one-dimensional exponential sum, time horizons,
//! uniform decay envelopes, Picard difference bounds, and randomized probes of
//! the two elementary inequalities used for polynomial data.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{binomial, shell_count};
use crate::spectral::{DecayProfile, Envelope, SpectralError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("zeta(s) needs s > 1 (got s = {0})")]
    ZetaDomain(f64),
    #[error("b(s;nu) needs s/j > 1 for every j <= nu; fails at j = {j} (s = {s}, nu = {nu})")]
    BFrakDomain { s: f64, nu: usize, j: usize },
    #[error("the exponential sum bound needs 0 < rho <= 1 (got rho = {0})")]
    RhoDomain(f64),
    #[error("nonlinearity degree p must be >= 2 (got {0})")]
    BadDegree(u32),
    #[error("target time must be positive (got {0})")]
    BadTarget(f64),
    #[error(transparent)]
    Profile(#[from] SpectralError),
}

const ZETA_MAX_TERMS: u64 = 1 << 26;

/// Width of the bracket `[int_M^inf f - f(M)/2, int_{M+1/2}^inf f]` for the
/// tail `sum_{n>M} n^{-s}` (f convex and decreasing).
fn zeta_tail_bracket(s: f64, m: f64) -> (f64, f64) {
    let lower = m.powf(1.0 - s) / (s - 1.0) - 0.5 * m.powf(-s);
    let upper = (m + 0.5).powf(1.0 - s) / (s - 1.0);
    (lower, upper)
}

/// `zeta(s)` from `sum_{n<=M} n^{-s}` plus the midpoint of the integral-test
/// remainder bracket, with `M` grown until the bracket is narrower than `tol`.
pub fn zeta_partial(s: f64, tol: f64) -> Result<f64, BoundsError> {
    if !s.is_finite() || s <= 1.0 {
        return Err(BoundsError::ZetaDomain(s));
    }
    let mut m: u64 = 8;
    loop {
        let (lo, hi) = zeta_tail_bracket(s, m as f64);
        // hi - lo is ~ s M^{-s-1} / 8; the direct difference is fine as a stop test
        if hi - lo < tol || m >= ZETA_MAX_TERMS {
            let head: f64 = (1..=m).rev().map(|n| (n as f64).powf(-s)).sum();
            return Ok(head + 0.5 * (lo + hi));
        }
        m *= 2;
    }
}

const ZETA_TOL: f64 = 1e-13;

/// `b(s;nu) = 1 + sum_{j=1}^{nu} C(nu,j) 2^j j^{-s} zeta(s/j)^j`.
pub fn b_frak(s: f64, nu: usize) -> Result<f64, BoundsError> {
    let mut acc = 1.0;
    for j in 1..=nu {
        let arg = s / j as f64;
        if arg.is_nan() || arg <= 1.0 {
            return Err(BoundsError::BFrakDomain { s, nu, j });
        }
        let z = zeta_partial(arg, ZETA_TOL)?;
        acc += binomial(nu as u64, j as u64) as f64
            * 2f64.powi(j as i32)
            * (j as f64).powf(-s)
            * z.powi(j as i32);
    }
    Ok(acc)
}

/// `sum_{|n| <= radius} (1+|n|)^{-s}` over Z^nu, summed shell by shell.
pub fn h_partial(s: f64, nu: usize, radius: u32) -> f64 {
    (0..=u64::from(radius))
        .map(|r| shell_count(nu, r) as f64 * (1.0 + r as f64).powf(-s))
        .sum()
}

/// `sum_{n in Z} e^{-rho|n|} = (e^rho + 1)/(e^rho - 1)`, which is `<= 3/rho`
/// on `0 < rho <= 1`.
pub fn exp_sum_1d(rho: f64) -> Result<f64, BoundsError> {
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(BoundsError::RhoDomain(rho));
    }
    Ok((rho.exp() + 1.0) / rho.exp_m1())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonReport {
    pub p: u32,
    pub profile: DecayProfile,
    pub nu: usize,
    /// Guaranteed existence/uniqueness time.
    pub horizon: f64,
    /// Amplitude of the uniform decay envelope of every Picard iterate.
    pub constant_b: f64,
}

impl HorizonReport {
    /// Envelope `B e^{-rho|n|/2}` or `B (1+|n|)^{-r/2}`.
    pub fn decay_envelope(&self) -> Envelope {
        match self.profile {
            DecayProfile::Exponential { rate, .. } => Envelope::exponential(self.constant_b, rate / 2.0),
            DecayProfile::Polynomial { rate, .. } => Envelope::polynomial(self.constant_b, rate / 2.0),
        }
    }

    /// Largest amplitude whose horizon still reaches `target`; the horizon
    /// scales like `1/amp`.
    pub fn max_amp_for_target(&self, target: f64) -> Result<f64, BoundsError> {
        if !(target > 0.0 && target.is_finite()) {
            return Err(BoundsError::BadTarget(target));
        }
        Ok(self.profile.amp() * self.horizon / target)
    }
}

fn check_degree(p: u32) -> Result<(), BoundsError> {
    if p < 2 {
        return Err(BoundsError::BadDegree(p));
    }
    Ok(())
}

/// `(p-1)^{p-1} / p^{p-1}` as an integer pair.
fn horizon_prefactor(p: u32) -> (f64, f64) {
    let e = (p - 1) as i32;
    (f64::from(p - 1).powi(e), f64::from(p).powi(e))
}

/// Existence horizon and decay constant for the given data class.
///
/// Exponential: `L_p = (1-1/p)^{p-1} rho^{(p-1)nu} / (A 6^{(p-1)nu})`,
/// `B_p = p/(p-1) A (6/rho)^nu`. Polynomial:
/// `L'_p = (1-1/p)^{p-1} / (A b(r/2;nu))`, `B_p = p/(p-1) A b(r/2;nu)`.
pub fn horizon(p: u32, profile: &DecayProfile, nu: usize) -> Result<HorizonReport, BoundsError> {
    check_degree(p)?;
    profile.validate(nu)?;
    let (num, den) = horizon_prefactor(p);
    let ratio = f64::from(p) / f64::from(p - 1);
    let e = ((p - 1) as usize * nu) as i32;
    let (horizon, constant_b) = match *profile {
        DecayProfile::Exponential { amp, rate } => {
            let h = num * rate.powi(e) / (den * amp * 6f64.powi(e));
            (h, ratio * amp * (6.0 / rate).powi(nu as i32))
        }
        DecayProfile::Polynomial { amp, rate } => {
            let b = b_frak(rate / 2.0, nu)?;
            (num / (den * amp * b), ratio * amp * b)
        }
    };
    Ok(HorizonReport { p, profile: *profile, nu, horizon, constant_b })
}

/// `L_2 = rho^nu / (2 A 6^nu)`, the quadratic case written out directly.
pub fn horizon_p2_exponential(amp: f64, rho: f64, nu: usize) -> f64 {
    rho.powi(nu as i32) / (2.0 * amp * 6f64.powi(nu as i32))
}

/// Exact horizon and decay constant for exponential data with rational
/// `amp` and `rho`.
pub fn horizon_exact(
    p: u32,
    amp: &BigRational,
    rho: &BigRational,
    nu: usize,
) -> Result<(BigRational, BigRational), BoundsError> {
    check_degree(p)?;
    let int = |v: u32| BigRational::from_integer(BigInt::from(v));
    let e = (p - 1) as usize * nu;
    let six = int(6);
    let pre: BigRational = Pow::pow(int(p - 1) / int(p), (p - 1) as usize);
    let h = pre * Pow::pow(rho.clone(), e) / (amp.clone() * Pow::pow(six.clone(), e));
    let b = int(p) / int(p - 1) * amp.clone() * Pow::pow(six / rho.clone(), nu);
    Ok((h, b))
}

/// Upper bound on `|c_k(t,n) - c_{k-1}(t,n)|`:
/// `prefactor * (rate * t)^k / k! * decay(|n|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifferenceBound {
    pub prefactor: f64,
    pub rate: f64,
    pub decay: Envelope,
}

impl DifferenceBound {
    /// Exponential data: `B_p (12/rho)^nu / p * (B_p^{p-1} (12/rho)^{(p-1)nu} t / 2)^k / k! * e^{-rho|n|/4}`.
    /// Polynomial data: the same shape with `b(r/4;nu)` in place of `(12/rho)^nu`
    /// and `(1+|n|)^{-r/4}`.
    pub fn for_profile(p: u32, profile: &DecayProfile, nu: usize) -> Result<Self, BoundsError> {
        let rep = horizon(p, profile, nu)?;
        let b = rep.constant_b;
        let (g, decay) = match *profile {
            DecayProfile::Exponential { rate, .. } => {
                ((12.0 / rate).powi(nu as i32), Envelope::exponential(1.0, rate / 4.0))
            }
            DecayProfile::Polynomial { rate, .. } => {
                (b_frak(rate / 4.0, nu)?, Envelope::polynomial(1.0, rate / 4.0))
            }
        };
        let pm1 = (p - 1) as i32;
        Ok(DifferenceBound {
            prefactor: b * g / f64::from(p),
            rate: 0.5 * b.powi(pm1) * g.powi(pm1),
            decay,
        })
    }

    pub fn at(&self, k: u32, t: f64, l1: u64) -> f64 {
        let x = self.rate * t;
        let term = (1..=k).fold(1.0, |acc, j| acc * x / f64::from(j));
        self.prefactor * term * self.decay.at(l1)
    }

    /// Value at `n = 0`, the supremum over the lattice.
    pub fn sup(&self, k: u32, t: f64) -> f64 {
        self.at(k, t, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub samples: usize,
    /// `max (prod a_j - mean(a)^m) / mean(a)^m`; must be `<= 0`.
    pub mean_value_max_violation: f64,
    /// `max ((1 + sum x_j) - prod(1 + x_j)) / max(1, prod(1+x_j))`; must be `<= 0`.
    pub bernoulli_max_violation: f64,
}

impl ProbeReport {
    pub fn pass(&self, tol: f64) -> bool {
        self.mean_value_max_violation <= tol && self.bernoulli_max_violation <= tol
    }
}

/// Seeded random checks of `prod a_j <= (mean a)^m` (a_j > 0) and
/// `prod (1 + x_j) >= 1 + sum x_j` (all x_j in (-1, 0] or all x_j >= 0).
pub fn inequality_probes(samples: usize, seed: u64) -> ProbeReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mie = f64::NEG_INFINITY;
    let mut gbi = f64::NEG_INFINITY;
    for _ in 0..samples {
        let m = rng.random_range(1..=10usize);
        let a: Vec<f64> = (0..m).map(|_| rng.random_range(-5.0..5.0f64).exp()).collect();
        let prod: f64 = a.iter().product();
        let mean = a.iter().sum::<f64>() / m as f64;
        let rhs = mean.powi(m as i32);
        mie = mie.max((prod - rhs) / rhs);

        let m = rng.random_range(1..=10usize);
        // same-sign draws; with mixed signs the product bound fails, e.g. (-0.9, 4)
        let neg = rng.random::<bool>();
        let x: Vec<f64> = (0..m)
            .map(|_| {
                let u = 1.0 - rng.random::<f64>();
                if neg { -u } else { 4.0 * u }
            })
            .collect();
        let prod: f64 = x.iter().map(|v| 1.0 + v).product();
        let lin = 1.0 + x.iter().sum::<f64>();
        gbi = gbi.max((lin - prod) / prod.abs().max(1.0));
    }
    ProbeReport { samples, mean_value_max_violation: mie, bernoulli_max_violation: gbi }
}

/// `B_p` and `L_p` for `amp = rho = 1` as exact rationals; handy for reports.
pub fn unit_exponential_constants(p: u32, nu: usize) -> Result<(BigRational, BigRational), BoundsError> {
    let one = BigRational::one();
    horizon_exact(p, &one, &one, nu)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn zeta_examples() {
        let z2 = zeta_partial(2.0, 1e-12).unwrap();
        assert_relative_eq!(z2, PI * PI / 6.0, epsilon = 1e-12);
        assert!(z2 <= 2.0);
        let z4 = zeta_partial(4.0, 1e-12).unwrap();
        assert_relative_eq!(z4, PI.powi(4) / 90.0, epsilon = 1e-12);
        assert!(z4 <= 4.0 / 3.0);
        let z50 = zeta_partial(50.0, 1e-12).unwrap();
        assert_relative_eq!(z50, 1.0000000000000009, epsilon = 1e-16);
        assert!(z50 <= 1.0 + 1.0 / 49.0);
        assert!(matches!(zeta_partial(1.0, 1e-12), Err(BoundsError::ZetaDomain(_))));
        assert!(matches!(zeta_partial(0.5, 1e-12), Err(BoundsError::ZetaDomain(_))));
    }

    #[test]
    fn zeta_near_one() {
        // zeta(1.01) = 100.5779433384...
        let z = zeta_partial(1.01, 1e-10).unwrap();
        assert_relative_eq!(z, 100.577943338497, max_relative = 1e-11);
        assert!(z <= 101.0);
    }

    #[test]
    fn b_frak_examples() {
        let z4 = PI.powi(4) / 90.0;
        assert_relative_eq!(b_frak(4.0, 1).unwrap(), 1.0 + 2.0 * z4, epsilon = 1e-12);
        assert_relative_eq!(b_frak(4.0, 1).unwrap(), 3.1646464, epsilon = 1e-7);
        let z8 = PI.powi(8) / 9450.0;
        assert_relative_eq!(b_frak(8.0, 1).unwrap(), 1.0 + 2.0 * z8, epsilon = 1e-12);
        assert_relative_eq!(b_frak(8.0, 1).unwrap(), 3.0081547, epsilon = 1e-7);
        let want = 1.0 + 4.0 * z8 + 4.0 * 2f64.powi(-8) * z4 * z4;
        assert_relative_eq!(b_frak(8.0, 2).unwrap(), want, epsilon = 1e-12);
        assert_relative_eq!(b_frak(8.0, 2).unwrap(), 5.0346, epsilon = 1e-4);
        match b_frak(3.0, 3) {
            Err(BoundsError::BFrakDomain { j: 3, .. }) => {}
            other => panic!("expected domain error at j=3, got {other:?}"),
        }
    }

    #[test]
    fn h_partial_examples() {
        assert_eq!(h_partial(4.0, 3, 0), 1.0);
        assert_eq!(h_partial(8.0, 1, 0), 1.0);
        let z4 = PI.powi(4) / 90.0;
        assert_relative_eq!(h_partial(4.0, 1, 100_000), 2.0 * z4 - 1.0, epsilon = 1e-12);
        let h = h_partial(8.0, 2, 50);
        assert!(h <= b_frak(8.0, 2).unwrap());
        assert!(h > 1.0);
    }

    #[test]
    fn exp_sum_examples() {
        let e = std::f64::consts::E;
        assert_relative_eq!(exp_sum_1d(1.0).unwrap(), (e + 1.0) / (e - 1.0), epsilon = 1e-15);
        assert_relative_eq!(exp_sum_1d(1.0).unwrap(), 2.1639534, epsilon = 1e-7);
        assert_relative_eq!(exp_sum_1d(0.5).unwrap(), 4.0829882, epsilon = 1e-7);
        assert!(exp_sum_1d(0.5).unwrap() <= 6.0);
        assert!(exp_sum_1d(1.0).is_ok());
        assert!(matches!(exp_sum_1d(1.0 + 1e-9), Err(BoundsError::RhoDomain(_))));
        assert!(exp_sum_1d(0.0).is_err());
    }

    #[test]
    fn horizon_examples() {
        let exp = DecayProfile::Exponential { amp: 1.0, rate: 1.0 };
        let r = horizon(2, &exp, 1).unwrap();
        assert_eq!(r.horizon, 1.0 / 12.0);
        assert_eq!(r.constant_b, 12.0);
        assert_eq!(horizon_p2_exponential(1.0, 1.0, 1), r.horizon);
        let r3 = horizon(3, &exp, 1).unwrap();
        assert_eq!(r3.horizon, 1.0 / 81.0);
        assert_eq!(r3.constant_b, 9.0);
        let poly = DecayProfile::Polynomial { amp: 1.0, rate: 16.0 };
        let rp = horizon(2, &poly, 1).unwrap();
        let b8 = b_frak(8.0, 1).unwrap();
        assert_relative_eq!(rp.horizon, 1.0 / (2.0 * b8), max_relative = 1e-15);
        assert_relative_eq!(rp.horizon, 0.1662, epsilon = 1e-4);
        assert_relative_eq!(rp.constant_b, 2.0 * b8, max_relative = 1e-15);
        let bad = DecayProfile::Polynomial { amp: 1.0, rate: 10.0 };
        assert!(horizon(2, &bad, 2).is_err());
    }

    #[test]
    fn exact_horizons() {
        let (h, b) = unit_exponential_constants(2, 1).unwrap();
        assert_eq!(h, BigRational::new(1.into(), 12.into()));
        assert_eq!(b, BigRational::from_integer(12.into()));
        let (h, _) = unit_exponential_constants(3, 1).unwrap();
        assert_eq!(h, BigRational::new(1.into(), 81.into()));
    }

    #[test]
    fn max_amp_inverts_horizon() {
        let exp = DecayProfile::Exponential { amp: 2.0, rate: 0.5 };
        let r = horizon(2, &exp, 2).unwrap();
        let a = r.max_amp_for_target(0.01).unwrap();
        let r2 = horizon(2, &DecayProfile::Exponential { amp: a, rate: 0.5 }, 2).unwrap();
        assert_relative_eq!(r2.horizon, 0.01, max_relative = 1e-14);
    }

    #[test]
    fn difference_bound_p2_matches_closed_form() {
        let exp = DecayProfile::Exponential { amp: 1.0, rate: 1.0 };
        let d = DifferenceBound::for_profile(2, &exp, 1).unwrap();
        // B (12/rho)^nu / 2 = 72, rate = B (12/rho)^nu / 2 = 72
        assert_eq!(d.prefactor, 72.0);
        assert_eq!(d.rate, 72.0);
        assert_relative_eq!(d.at(2, 1.0 / 12.0, 0), 72.0 * 36.0 / 2.0, max_relative = 1e-15);
    }

    #[test]
    fn probe_equality_cases() {
        let r = inequality_probes(2000, 11);
        assert!(r.pass(1e-12), "{r:?}");
        // x = (0.5, 0.5): 2.25 >= 2
        let prod: f64 = [1.5f64, 1.5].iter().product();
        assert_eq!(prod, 2.25);
        assert!(prod >= 2.0);
        let prod: f64 = [0.1f64, 5.0].iter().product();
        assert!(prod < 1.0 + (-0.9 + 4.0));
    }
}
