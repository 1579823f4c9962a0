//! Fourier-coefficient fields on a truncated lattice: initial data for the two
//! decay classes, the p-fold lattice convolution, envelope checks and
//! pointwise evaluation of `u(x) = sum_n c(n) e^{i<n>x}`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{inner, shell_count, FrequencyVector, LatticeError, MultiIndex, Truncation};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("nonlinearity degree p must be >= 2 (got {0})")]
    BadDegree(u32),
    #[error("amplitude must be positive and finite (got {0})")]
    BadAmplitude(f64),
    #[error("exponential decay requires 0 < rho <= 1 (got rho = {0})")]
    BadExponentialRate(f64),
    #[error("polynomial decay requires 1 <= nu < r/4 - 2 (got nu = {nu}, r = {rate}: r/4 - 2 = {limit})")]
    BadPolynomialRate { nu: usize, rate: f64, limit: f64 },
    #[error("index {index} lies outside the truncation ball of radius {radius}")]
    OutsideTruncation { index: MultiIndex, radius: u32 },
    #[error("convolution needs at least two factors (got {0})")]
    TooFewFactors(usize),
    #[error("fields live on different lattice dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),
}

/// Shape of a decay envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecayKind {
    Exponential,
    Polynomial,
}

/// `amp * e^{-rate |n|}` or `amp * (1 + |n|)^{-rate}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub kind: DecayKind,
    pub amp: f64,
    pub rate: f64,
}

impl Envelope {
    pub fn exponential(amp: f64, rate: f64) -> Self {
        Envelope { kind: DecayKind::Exponential, amp, rate }
    }

    pub fn polynomial(amp: f64, rate: f64) -> Self {
        Envelope { kind: DecayKind::Polynomial, amp, rate }
    }

    pub fn at(&self, l1: u64) -> f64 {
        let r = l1 as f64;
        match self.kind {
            DecayKind::Exponential => self.amp * (-self.rate * r).exp(),
            DecayKind::Polynomial => self.amp * (1.0 + r).powf(-self.rate),
        }
    }
}

/// Decay class of the initial data: `|c(n)| <= A^{1/(p-1)} e^{-rho|n|}` or
/// `|c(n)| <= A^{1/(p-1)} (1+|n|)^{-r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DecayProfile {
    Exponential { amp: f64, rate: f64 },
    Polynomial { amp: f64, rate: f64 },
}

impl DecayProfile {
    pub fn kind(&self) -> DecayKind {
        match self {
            DecayProfile::Exponential { .. } => DecayKind::Exponential,
            DecayProfile::Polynomial { .. } => DecayKind::Polynomial,
        }
    }

    pub fn amp(&self) -> f64 {
        match *self {
            DecayProfile::Exponential { amp, .. } | DecayProfile::Polynomial { amp, .. } => amp,
        }
    }

    pub fn rate(&self) -> f64 {
        match *self {
            DecayProfile::Exponential { rate, .. } | DecayProfile::Polynomial { rate, .. } => rate,
        }
    }

    /// Range checks on `amp`/`rate`; the polynomial class also constrains nu.
    pub fn validate(&self, nu: usize) -> Result<(), SpectralError> {
        let amp = self.amp();
        if !(amp.is_finite() && amp > 0.0) {
            return Err(SpectralError::BadAmplitude(amp));
        }
        match *self {
            DecayProfile::Exponential { rate, .. } => {
                if !(rate > 0.0 && rate <= 1.0) {
                    return Err(SpectralError::BadExponentialRate(rate));
                }
            }
            DecayProfile::Polynomial { rate, .. } => {
                let limit = rate / 4.0 - 2.0;
                if !(rate.is_finite() && nu >= 1 && (nu as f64) < limit) {
                    return Err(SpectralError::BadPolynomialRate { nu, rate, limit });
                }
            }
        }
        Ok(())
    }

    /// The envelope the initial data saturates, with amplitude `A^{1/(p-1)}`.
    pub fn initial_envelope(&self, p: u32) -> Envelope {
        let amp = self.amp().powf(1.0 / f64::from(p - 1));
        Envelope { kind: self.kind(), amp, rate: self.rate() }
    }
}

/// A finitely supported map from lattice points to complex amplitudes,
/// with support inside a truncation ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffField {
    trunc: Truncation,
    #[serde(with = "entries")]
    values: BTreeMap<MultiIndex, Complex64>,
}

mod entries {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        n: MultiIndex,
        re: f64,
        im: f64,
    }

    pub fn serialize<S: Serializer>(
        v: &BTreeMap<MultiIndex, Complex64>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        let list: Vec<Entry> =
            v.iter().map(|(n, c)| Entry { n: n.clone(), re: c.re, im: c.im }).collect();
        list.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<MultiIndex, Complex64>, D::Error> {
        let list = Vec::<Entry>::deserialize(d)?;
        Ok(list.into_iter().map(|e| (e.n, Complex64::new(e.re, e.im))).collect())
    }
}

impl CoeffField {
    pub fn zero(trunc: Truncation) -> Self {
        CoeffField { trunc, values: BTreeMap::new() }
    }

    /// Single mode `value` at `n = 0`.
    pub fn constant(trunc: Truncation, value: Complex64) -> Self {
        let mut f = CoeffField::zero(trunc);
        f.values.insert(MultiIndex::zero(trunc.nu), value);
        f
    }

    pub fn from_entries<I>(trunc: Truncation, entries: I) -> Result<Self, SpectralError>
    where
        I: IntoIterator<Item = (MultiIndex, Complex64)>,
    {
        let mut f = CoeffField::zero(trunc);
        for (n, v) in entries {
            f.insert(n, v)?;
        }
        Ok(f)
    }

    pub fn insert(&mut self, n: MultiIndex, v: Complex64) -> Result<(), SpectralError> {
        if n.nu() != self.trunc.nu {
            return Err(SpectralError::DimensionMismatch(n.nu(), self.trunc.nu));
        }
        if !self.trunc.contains(&n) {
            return Err(SpectralError::OutsideTruncation { index: n, radius: self.trunc.radius });
        }
        self.values.insert(n, v);
        Ok(())
    }

    pub fn trunc(&self) -> Truncation {
        self.trunc
    }

    pub fn nu(&self) -> usize {
        self.trunc.nu
    }

    /// Value at `n`, zero off the support.
    pub fn get(&self, n: &MultiIndex) -> Complex64 {
        self.values.get(n).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &Complex64)> {
        self.values.iter()
    }

    pub fn support_len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn l1_mass(&self) -> f64 {
        self.values.values().map(|c| c.norm()).sum()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.values().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// Largest `|f(-n) - conj f(n)|` over the support.
    pub fn reality_defect(&self) -> f64 {
        self.values
            .iter()
            .map(|(n, v)| (self.get(&n.neg()) - v.conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Conjugate symmetry `f(-n) = conj f(n)` within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.reality_defect() <= tol
    }

    /// `sup_n |self(n) - other(n)|` over the union of supports.
    pub fn sup_distance(&self, other: &CoeffField) -> f64 {
        let a = self.values.iter().map(|(n, v)| (v - other.get(n)).norm());
        let b = other
            .values
            .iter()
            .filter(|(n, _)| !self.values.contains_key(*n))
            .map(|(_, v)| v.norm());
        a.chain(b).fold(0.0, f64::max)
    }

    /// Restricts to `trunc`; returns the field and the discarded l1 mass.
    pub fn restrict(&self, trunc: Truncation) -> (CoeffField, f64) {
        restrict_map(&self.values, trunc)
    }

    pub(crate) fn from_map_unchecked(
        trunc: Truncation,
        values: BTreeMap<MultiIndex, Complex64>,
    ) -> Self {
        CoeffField { trunc, values }
    }
}

fn restrict_map(map: &BTreeMap<MultiIndex, Complex64>, trunc: Truncation) -> (CoeffField, f64) {
    let mut kept = BTreeMap::new();
    let mut dropped = 0.0;
    for (n, v) in map {
        if trunc.contains(n) {
            kept.insert(n.clone(), *v);
        } else {
            dropped += v.norm();
        }
    }
    (CoeffField { trunc, values: kept }, dropped)
}

fn phase_key(seed: u64, n: &MultiIndex) -> u64 {
    n.coords().iter().fold(seed ^ 0x51_7c_c1_b7_27_22_0a_95, |acc, &c| {
        (acc.rotate_left(23) ^ (c as u64)).wrapping_mul(0x9e37_79b9_7f4a_7c15)
    })
}

/// Deterministic phase in `(-pi, pi]`, odd in `n`, zero at the origin.
pub fn initial_phase(seed: u64, n: &MultiIndex) -> f64 {
    if n.is_zero() {
        return 0.0;
    }
    let (canon, sign) = if n.is_positive() { (n.clone(), 1.0) } else { (n.neg(), -1.0) };
    let mut rng = ChaCha8Rng::seed_from_u64(phase_key(seed, &canon));
    let u: f64 = rng.random();
    sign * (2.0 * u - 1.0) * std::f64::consts::PI
}

/// Initial data saturating the profile envelope, `c(n) = env(n) e^{i theta_n}`,
/// with `theta_{-n} = -theta_n` so that `u(0, x)` is real.
pub fn make_initial(
    profile: &DecayProfile,
    p: u32,
    trunc: Truncation,
    phase_seed: u64,
) -> Result<CoeffField, SpectralError> {
    if p < 2 {
        return Err(SpectralError::BadDegree(p));
    }
    profile.validate(trunc.nu)?;
    let env = profile.initial_envelope(p);
    let values = trunc
        .enumerate()
        .into_iter()
        .map(|n| {
            let m = env.at(n.l1());
            let v = Complex64::from_polar(m, initial_phase(phase_seed, &n));
            (n, v)
        })
        .collect();
    Ok(CoeffField { trunc, values })
}

/// Result of a truncated convolution.
#[derive(Debug, Clone)]
pub struct Convolution {
    pub field: CoeffField,
    /// l1 mass of the exact product that fell outside the output ball.
    pub discarded_mass: f64,
}

const PAR_THRESHOLD: usize = 512;

fn pairwise(
    acc: &BTreeMap<MultiIndex, Complex64>,
    f: &BTreeMap<MultiIndex, Complex64>,
) -> BTreeMap<MultiIndex, Complex64> {
    let mut keys: Vec<MultiIndex> = Vec::new();
    {
        let mut seen = std::collections::BTreeSet::new();
        for a in acc.keys() {
            for b in f.keys() {
                seen.insert(a.add(b));
            }
        }
        keys.extend(seen);
    }
    let entry = |n: &MultiIndex| -> Complex64 {
        f.iter()
            .filter_map(|(b, vb)| acc.get(&n.sub(b)).map(|va| va * vb))
            .fold(Complex64::default(), |s, x| s + x)
    };
    #[cfg(feature = "parallel")]
    let vals: Vec<Complex64> = if keys.len() >= PAR_THRESHOLD {
        use rayon::prelude::*;
        keys.par_iter().map(entry).collect()
    } else {
        keys.iter().map(entry).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let vals: Vec<Complex64> = {
        let _ = PAR_THRESHOLD;
        keys.iter().map(entry).collect()
    };
    keys.into_iter().zip(vals).collect()
}

/// Exact convolution `n -> sum_{q_1+...+q_p = n} prod_j f_j(q_j)` on the full
/// Minkowski-sum support, by iterated pairwise products.
pub fn convolve_full(
    fields: &[&CoeffField],
) -> Result<BTreeMap<MultiIndex, Complex64>, SpectralError> {
    if fields.len() < 2 {
        return Err(SpectralError::TooFewFactors(fields.len()));
    }
    let nu = fields[0].nu();
    if let Some(f) = fields.iter().find(|f| f.nu() != nu) {
        return Err(SpectralError::DimensionMismatch(nu, f.nu()));
    }
    let mut acc = fields[0].values.clone();
    for f in &fields[1..] {
        acc = pairwise(&acc, &f.values);
    }
    Ok(acc)
}

/// p-fold convolution restricted to `out_trunc`.
pub fn convolve_p(
    fields: &[&CoeffField],
    out_trunc: Truncation,
) -> Result<Convolution, SpectralError> {
    let full = convolve_full(fields)?;
    if out_trunc.nu != fields[0].nu() {
        return Err(SpectralError::DimensionMismatch(fields[0].nu(), out_trunc.nu));
    }
    let (field, discarded_mass) = restrict_map(&full, out_trunc);
    if discarded_mass > 0.0 {
        log::trace!("convolution discarded l1 mass {discarded_mass:e}");
    }
    Ok(Convolution { field, discarded_mass })
}

/// `f * f * ... * f` (p copies), restricted to the field's own truncation.
pub fn convolve_power(f: &CoeffField, p: u32) -> Result<Convolution, SpectralError> {
    let refs: Vec<&CoeffField> = std::iter::repeat_n(f, p as usize).collect();
    convolve_p(&refs, f.trunc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeReport {
    /// `max_n |f(n)| / env(n)`.
    pub ratio: f64,
    pub worst: Option<MultiIndex>,
    pub pass: bool,
}

pub const ENVELOPE_TOL: f64 = 1e-9;

/// Worst-case ratio of `|field(n)|` to the envelope; passes when
/// `ratio <= 1 + tol`.
pub fn check_envelope(field: &CoeffField, envelope: &Envelope, tol: f64) -> EnvelopeReport {
    let mut ratio = 0.0;
    let mut worst = None;
    for (n, v) in field.iter() {
        let r = v.norm() / envelope.at(n.l1());
        if r > ratio {
            ratio = r;
            worst = Some(n.clone());
        }
    }
    EnvelopeReport { ratio, worst, pass: ratio <= 1.0 + tol }
}

/// `u(x) = sum_n field(n) e^{i <n> x}`.
pub fn evaluate_u(
    field: &CoeffField,
    omega: &FrequencyVector,
    x: f64,
) -> Result<Complex64, SpectralError> {
    let mut acc = Complex64::default();
    for (n, v) in field.iter() {
        let w = inner(n, omega)?;
        acc += v * Complex64::from_polar(1.0, w * x);
    }
    Ok(acc)
}

/// `sum_{|n| > radius} env(n)` over Z^nu for the profile's initial envelope.
pub fn tail_mass(profile: &DecayProfile, p: u32, nu: usize, radius: u32) -> f64 {
    let env = profile.initial_envelope(p);
    let shell = |r: u64| -> f64 {
        if nu <= 4 || r < 1 << 20 {
            shell_count(nu, r) as f64
        } else {
            f64::INFINITY
        }
    };
    let start = u64::from(radius) + 1;
    match env.kind {
        DecayKind::Exponential => {
            let mut sum = 0.0;
            let mut r = start;
            loop {
                let term = shell(r) * env.at(r);
                sum += term;
                if term <= 1e-18 * sum.max(f64::MIN_POSITIVE) || r > start + 1_000_000 {
                    break;
                }
                r += 1;
            }
            sum
        }
        DecayKind::Polynomial => {
            let s = env.rate;
            let remainder = |big_r: u64| -> f64 {
                (1..=nu as u64)
                    .map(|k| {
                        let fact: f64 = (1..k).map(|i| i as f64).product();
                        (1u64 << k) as f64 * crate::lattice::binomial(nu as u64, k) as f64 / fact
                            * (1.0 + big_r as f64).powf(k as f64 - s)
                            / (s - k as f64)
                    })
                    .sum::<f64>()
                    * env.amp
            };
            let mut sum = 0.0;
            let mut r = start;
            loop {
                sum += shell(r) * env.at(r);
                let rem = remainder(r);
                if rem <= 1e-16 * sum || r > start + 1_000_000 {
                    return sum + 0.5 * rem;
                }
                r += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn t1(n: u32) -> Truncation {
        Truncation::new(1, n).unwrap()
    }

    fn idx(c: &[i64]) -> MultiIndex {
        MultiIndex::new(c.to_vec())
    }

    #[test]
    fn initial_data_examples() {
        let exp = DecayProfile::Exponential { amp: 1.0, rate: 1.0 };
        let f = make_initial(&exp, 2, t1(3), 7).unwrap();
        assert_relative_eq!(f.get(&idx(&[0])).norm(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(f.get(&idx(&[2])).norm(), 0.1353352832366127, epsilon = 1e-15);
        assert!(f.is_real(1e-14));
        assert_eq!(f.get(&idx(&[0])).im, 0.0);

        let poly = DecayProfile::Polynomial { amp: 1.0, rate: 16.0 };
        let g = make_initial(&poly, 2, t1(3), 7).unwrap();
        assert_relative_eq!(g.get(&idx(&[3])).norm(), 4f64.powi(-16), max_relative = 1e-14);
        assert_relative_eq!(4f64.powi(-16), 2.3283064365386963e-10, max_relative = 1e-15);
    }

    #[test]
    fn profile_validation() {
        let bad = DecayProfile::Exponential { amp: 1.0, rate: 1.5 };
        assert!(matches!(
            make_initial(&bad, 2, t1(1), 0),
            Err(SpectralError::BadExponentialRate(_))
        ));
        let bad = DecayProfile::Polynomial { amp: 1.0, rate: 10.0 };
        let err = bad.validate(2).unwrap_err();
        assert!(err.to_string().contains("nu < r/4 - 2"));
        assert!(matches!(
            make_initial(&DecayProfile::Exponential { amp: 1.0, rate: 1.0 }, 1, t1(1), 0),
            Err(SpectralError::BadDegree(1))
        ));
        assert!(DecayProfile::Exponential { amp: 1.0, rate: 1.0 }.validate(1).is_ok());
        assert!(DecayProfile::Exponential { amp: 0.0, rate: 1.0 }.validate(1).is_err());
    }

    #[test]
    fn phases_are_seed_dependent_and_odd() {
        let n = idx(&[2, -1]);
        assert_eq!(initial_phase(3, &n), -initial_phase(3, &n.neg()));
        assert_ne!(initial_phase(3, &n), initial_phase(4, &n));
        assert_eq!(initial_phase(3, &MultiIndex::zero(2)), 0.0);
    }

    #[test]
    fn convolution_examples() {
        let t = t1(3);
        let g = make_initial(&DecayProfile::Exponential { amp: 1.0, rate: 0.5 }, 2, t, 1).unwrap();
        let delta = CoeffField::constant(t, Complex64::new(1.0, 0.0));
        let out = convolve_p(&[&delta, &g], t).unwrap();
        assert_eq!(out.field, g);
        assert_eq!(out.discarded_mass, 0.0);

        let (a, b) = (Complex64::new(0.3, 0.1), Complex64::new(-0.7, 0.2));
        let f = CoeffField::from_entries(t, [(idx(&[0]), a), (idx(&[1]), b)]).unwrap();
        let ff = convolve_p(&[&f, &f], t).unwrap().field;
        assert_relative_eq!((ff.get(&idx(&[1])) - 2.0 * a * b).norm(), 0.0, epsilon = 1e-16);

        let d1 = CoeffField::from_entries(t, [(idx(&[1]), Complex64::new(1.0, 0.0))]).unwrap();
        let fff = convolve_p(&[&d1, &d1, &d1], t).unwrap().field;
        assert_eq!(fff.get(&idx(&[3])), Complex64::new(1.0, 0.0));
        assert_eq!(fff.iter().filter(|(_, v)| v.norm() != 0.0).count(), 1);
    }

    #[test]
    fn convolution_reports_discarded_mass() {
        let t = t1(1);
        let d1 = CoeffField::from_entries(t, [(idx(&[1]), Complex64::new(2.0, 0.0))]).unwrap();
        let out = convolve_p(&[&d1, &d1], t).unwrap();
        assert!(out.field.iter().all(|(_, v)| v.norm() == 0.0));
        assert_eq!(out.discarded_mass, 4.0);
    }

    #[test]
    fn convolution_errors() {
        let f = CoeffField::zero(t1(1));
        let g = CoeffField::zero(Truncation::new(2, 1).unwrap());
        assert!(matches!(convolve_p(&[&f], t1(1)), Err(SpectralError::TooFewFactors(1))));
        assert!(matches!(
            convolve_p(&[&f, &g], t1(1)),
            Err(SpectralError::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn envelope_examples() {
        let env = Envelope::exponential(1.0, 1.0);
        let z = CoeffField::zero(t1(2));
        let r = check_envelope(&z, &env, ENVELOPE_TOL);
        assert_eq!(r.ratio, 0.0);
        assert!(r.pass);

        let exact = CoeffField::from_entries(
            t1(2),
            t1(2).enumerate().into_iter().map(|n| {
                let m = env.at(n.l1());
                (n, Complex64::new(m, 0.0))
            }),
        )
        .unwrap();
        let r = check_envelope(&exact, &env, ENVELOPE_TOL);
        assert_relative_eq!(r.ratio, 1.0, epsilon = 1e-15);
        assert!(r.pass);

        let mut bad = exact.clone();
        bad.insert(idx(&[-1]), Complex64::new(0.0, 2.0 * env.at(1))).unwrap();
        let r = check_envelope(&bad, &env, ENVELOPE_TOL);
        assert_relative_eq!(r.ratio, 2.0, epsilon = 1e-15);
        assert!(!r.pass);
        assert_eq!(r.worst, Some(idx(&[-1])));
    }

    #[test]
    fn evaluate_examples() {
        let w = FrequencyVector::new(vec![1.0]).unwrap();
        let c = CoeffField::constant(t1(2), Complex64::new(3.0, 0.0));
        for x in [0.0, 1.3, -7.0] {
            assert_eq!(evaluate_u(&c, &w, x).unwrap(), Complex64::new(3.0, 0.0));
        }
        let half = Complex64::new(0.5, 0.0);
        let cos = CoeffField::from_entries(t1(2), [(idx(&[1]), half), (idx(&[-1]), half)]).unwrap();
        assert_relative_eq!(evaluate_u(&cos, &w, 0.0).unwrap().re, 1.0, epsilon = 1e-15);
        for x in [0.3, 1.0, 2.5] {
            let u = evaluate_u(&cos, &w, x).unwrap();
            assert_relative_eq!(u.re, x.cos(), epsilon = 1e-15);
            assert!(u.im.abs() < 1e-15);
        }
        assert_eq!(evaluate_u(&CoeffField::zero(t1(1)), &w, 1.0).unwrap(), Complex64::default());
    }

    #[test]
    fn tail_mass_examples() {
        let exp = DecayProfile::Exponential { amp: 1.0, rate: 1.0 };
        let e = std::f64::consts::E;
        assert_relative_eq!(tail_mass(&exp, 2, 1, 0), 2.0 / (e - 1.0), max_relative = 1e-14);
        let tails: Vec<f64> = (0..20).map(|n| tail_mass(&exp, 2, 1, n)).collect();
        assert!(tails.windows(2).all(|w| w[1] < w[0]));
        assert!(tails[19] < 1e-8);

        let poly = DecayProfile::Polynomial { amp: 1.0, rate: 16.0 };
        let v = tail_mass(&poly, 2, 1, 1);
        // partial-sum oracle
        let oracle: f64 = 2.0 * (2..10_000).map(|n: i32| f64::from(1 + n).powi(-16)).sum::<f64>();
        assert_relative_eq!(v, oracle, max_relative = 1e-13);
        let lo = 2.0 * 3f64.powi(-16);
        let hi = lo + 2.0 * 3f64.powi(-15) / 15.0;
        assert!(lo <= v && v <= hi);
    }

    #[test]
    fn tail_mass_matches_ball_difference_in_2d() {
        let exp = DecayProfile::Exponential { amp: 1.0, rate: 0.5 };
        let s = (0.5f64.exp() + 1.0) / (0.5f64.exp() - 1.0);
        let env = exp.initial_envelope(2);
        let ball: f64 = Truncation::new(2, 4)
            .unwrap()
            .enumerate()
            .iter()
            .map(|n| env.at(n.l1()))
            .sum();
        assert_relative_eq!(tail_mass(&exp, 2, 2, 4), s * s - ball, max_relative = 1e-12);
    }
}
