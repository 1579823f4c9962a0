//! Frequency lattice Z^nu: multi-indices, the wave vector, the inner product
//! `<n> = <n, omega>`, the linear multiplier `lambda(n)` and l1-ball truncations.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("dimension mismatch: multi-index has {index} coordinates, wave vector has {omega}")]
    DimensionMismatch { index: usize, omega: usize },
    #[error("wave vector must have nu >= 1 entries")]
    EmptyWaveVector,
    #[error("wave vector entries must be finite (entry {0} is {1})")]
    NonFinite(usize, f64),
    #[error("wave vector must not be the zero vector")]
    ZeroWaveVector,
    #[error("truncation requires nu >= 1")]
    ZeroDimension,
    #[error("cannot parse wave-vector token `{0}` (expected a number, `sqrtK` or `piOverK`)")]
    BadToken(String),
}

/// A point `n = (n_1, ..., n_nu)` of the frequency lattice. Ordered
/// lexicographically on its coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<i64>);

impl MultiIndex {
    pub fn new(coords: Vec<i64>) -> Self {
        MultiIndex(coords)
    }

    pub fn zero(nu: usize) -> Self {
        MultiIndex(vec![0; nu])
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn nu(&self) -> usize {
        self.0.len()
    }

    /// `|n| = sum_j |n_j|`.
    pub fn l1(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn neg(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.nu(), other.nu());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.nu(), other.nu());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// True when the first nonzero coordinate is positive.
    pub fn is_positive(&self) -> bool {
        self.0.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
    }
}

impl From<Vec<i64>> for MultiIndex {
    fn from(v: Vec<i64>) -> Self {
        MultiIndex(v)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// The wave vector `omega`. Rational independence is assumed, not checked;
/// see [`FrequencyVector::near_resonances`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct FrequencyVector(Vec<f64>);

impl FrequencyVector {
    pub fn new(omega: Vec<f64>) -> Result<Self, LatticeError> {
        if omega.is_empty() {
            return Err(LatticeError::EmptyWaveVector);
        }
        if let Some((i, &w)) = omega.iter().enumerate().find(|(_, w)| !w.is_finite()) {
            return Err(LatticeError::NonFinite(i, w));
        }
        if omega.iter().all(|&w| w == 0.0) {
            return Err(LatticeError::ZeroWaveVector);
        }
        Ok(FrequencyVector(omega))
    }

    /// `(1)` for nu = 1, `(1, sqrt 2)` for nu = 2, then `sqrt` of the next primes.
    pub fn default_for(nu: usize) -> Result<Self, LatticeError> {
        const PRIMES: [f64; 8] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0];
        if nu == 0 {
            return Err(LatticeError::EmptyWaveVector);
        }
        let mut w = vec![1.0];
        w.extend(PRIMES.iter().cycle().take(nu - 1).map(|p| p.sqrt()));
        FrequencyVector::new(w)
    }

    /// Parses a comma separated list; tokens are numbers, `sqrtK`, `piOverK`
    /// or `pi`, optionally negated with a leading `-`.
    pub fn parse_list(s: &str) -> Result<Self, LatticeError> {
        let vals = s
            .split(',')
            .map(|t| parse_token(t.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        FrequencyVector::new(vals)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn nu(&self) -> usize {
        self.0.len()
    }

    /// Nonzero `n` in the truncation whose `<n>` vanishes to within
    /// `1e-12 * |n| * max|omega_j|`.
    pub fn near_resonances(&self, trunc: &Truncation) -> Vec<MultiIndex> {
        let scale = self.0.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        trunc
            .enumerate()
            .into_iter()
            .filter(|n| !n.is_zero())
            .filter(|n| {
                let v = inner(n, self).unwrap_or(f64::NAN);
                v.abs() <= 1e-12 * scale * n.l1() as f64
            })
            .collect()
    }
}

impl TryFrom<Vec<f64>> for FrequencyVector {
    type Error = LatticeError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        FrequencyVector::new(v)
    }
}

impl From<FrequencyVector> for Vec<f64> {
    fn from(w: FrequencyVector) -> Self {
        w.0
    }
}

impl FromStr for FrequencyVector {
    type Err = LatticeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FrequencyVector::parse_list(s)
    }
}

fn parse_token(tok: &str) -> Result<f64, LatticeError> {
    let bad = || LatticeError::BadToken(tok.to_string());
    let (sign, body) = match tok.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, tok),
    };
    let v = if let Some(k) = body.strip_prefix("sqrt") {
        let k: f64 = k.parse().map_err(|_| bad())?;
        if k < 0.0 {
            return Err(bad());
        }
        k.sqrt()
    } else if let Some(k) = body.strip_prefix("piOver") {
        let k: f64 = k.parse().map_err(|_| bad())?;
        if k == 0.0 {
            return Err(bad());
        }
        std::f64::consts::PI / k
    } else if body == "pi" {
        std::f64::consts::PI
    } else {
        body.parse::<f64>().map_err(|_| bad())?
    };
    if !v.is_finite() {
        return Err(bad());
    }
    Ok(sign * v)
}

/// The l1 ball `{ n in Z^nu : |n| <= radius }`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Truncation {
    pub nu: usize,
    pub radius: u32,
}

impl Truncation {
    pub fn new(nu: usize, radius: u32) -> Result<Self, LatticeError> {
        if nu == 0 {
            return Err(LatticeError::ZeroDimension);
        }
        Ok(Truncation { nu, radius })
    }

    pub fn contains(&self, n: &MultiIndex) -> bool {
        n.nu() == self.nu && n.l1() <= u64::from(self.radius)
    }

    /// Every lattice point of the ball once, in lexicographic order.
    pub fn enumerate(&self) -> Vec<MultiIndex> {
        let mut out = Vec::with_capacity(self.count() as usize);
        let mut buf = Vec::with_capacity(self.nu);
        fill(self.nu, i64::from(self.radius), &mut buf, &mut out);
        out
    }

    /// Closed-form cardinality `sum_k 2^k C(nu,k) C(N,k)`.
    pub fn count(&self) -> u64 {
        let n = u64::from(self.radius);
        let kmax = (self.nu as u64).min(n);
        (0..=kmax)
            .map(|k| (1u64 << k) * binomial(self.nu as u64, k) * binomial(n, k))
            .sum()
    }

    /// Truncation of the Minkowski sum of `copies` balls of this radius.
    pub fn scaled(&self, copies: u32) -> Truncation {
        Truncation { nu: self.nu, radius: self.radius * copies }
    }
}

fn fill(remaining: usize, budget: i64, buf: &mut Vec<i64>, out: &mut Vec<MultiIndex>) {
    if remaining == 0 {
        out.push(MultiIndex(buf.clone()));
        return;
    }
    for c in -budget..=budget {
        buf.push(c);
        fill(remaining - 1, budget - c.abs(), buf, out);
        buf.pop();
    }
}

pub(crate) fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Number of lattice points with `|n| = r` exactly.
pub fn shell_count(nu: usize, r: u64) -> u64 {
    if r == 0 {
        return 1;
    }
    let kmax = (nu as u64).min(r);
    (1..=kmax)
        .map(|k| (1u64 << k) * binomial(nu as u64, k) * binomial(r - 1, k - 1))
        .sum()
}

/// `<n, omega> = sum_j n_j omega_j`.
pub fn inner(n: &MultiIndex, omega: &FrequencyVector) -> Result<f64, LatticeError> {
    if n.nu() != omega.nu() {
        return Err(LatticeError::DimensionMismatch { index: n.nu(), omega: omega.nu() });
    }
    Ok(n.0.iter().zip(&omega.0).map(|(&c, &w)| c as f64 * w).sum())
}

/// `lambda(n) = -i <n> / (1 + <n>^2)`; purely imaginary with `|lambda| <= 1/2`.
pub fn multiplier(n: &MultiIndex, omega: &FrequencyVector) -> Result<Complex64, LatticeError> {
    let w = inner(n, omega)?;
    Ok(Complex64::new(0.0, -w / (1.0 + w * w)))
}
