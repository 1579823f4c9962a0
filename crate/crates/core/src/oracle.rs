//! Fixed-step RK4 on the truncated mode system
//! `c' = lambda c + (lambda/p) c^{*p}`, sharing the convolution with the
//! Picard solver so the two differ only in time discretization.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::lattice::{multiplier, FrequencyVector, LatticeError, MultiIndex, Truncation};
use crate::picard::{uniform_grid, TimeGridField};
use crate::spectral::{convolve_power, CoeffField, SpectralError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("RK4 needs at least one step")]
    NoSteps,
    #[error("non-finite value at step {step} (t = {t}); the solution blew up")]
    BlowUp { step: usize, t: f64 },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// `(t, c)` snapshot along an RK4 trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeState {
    pub field: CoeffField,
    pub time: f64,
}

/// `n -> lambda(n) c(n) + (lambda(n)/p) (c^{*p})(n)` on `trunc`; zero where
/// `lambda(n) = 0`.
pub fn rhs(state: &OdeState, omega: &FrequencyVector, p: u32, trunc: Truncation) -> Result<CoeffField, OracleError> {
    let (c, _) = state.field.restrict(trunc);
    let conv = convolve_power(&c, p)?.field;
    let pf = f64::from(p);
    let mut out = BTreeMap::new();
    for n in trunc.enumerate() {
        let lam = multiplier(&n, omega)?;
        let v = if lam == Complex64::default() {
            Complex64::default()
        } else {
            lam * c.get(&n) + lam / pf * conv.get(&n)
        };
        out.insert(n, v);
    }
    Ok(CoeffField::from_map_unchecked(trunc, out))
}

fn axpy(base: &CoeffField, k: &CoeffField, h: f64, trunc: Truncation) -> CoeffField {
    let map: BTreeMap<MultiIndex, Complex64> =
        k.iter().map(|(n, v)| (n.clone(), base.get(n) + v * h)).collect();
    CoeffField::from_map_unchecked(trunc, map)
}

/// Classical RK4 with `steps` equal steps on `[0, T]`; every step is kept as a
/// frame.
pub fn rk4_integrate(
    init: &CoeffField,
    t_end: f64,
    steps: usize,
    omega: &FrequencyVector,
    p: u32,
    trunc: Truncation,
) -> Result<TimeGridField, OracleError> {
    if steps == 0 {
        return Err(OracleError::NoSteps);
    }
    let times = uniform_grid(t_end, steps);
    let h = t_end / steps as f64;
    let (c, _) = init.restrict(trunc);
    // dense on the truncation so every frame has the same shape
    let mut cur = CoeffField::from_map_unchecked(trunc, trunc.enumerate().into_iter().map(|n| {
        let v = c.get(&n);
        (n, v)
    }).collect());
    let mut frames = vec![cur.clone()];
    for (step, &t) in times.iter().enumerate().skip(1) {
        let t0 = times[step - 1];
        let f = |field: CoeffField, time: f64| rhs(&OdeState { field, time }, omega, p, trunc);
        let k1 = f(cur.clone(), t0)?;
        let k2 = f(axpy(&cur, &k1, h / 2.0, trunc), t0 + h / 2.0)?;
        let k3 = f(axpy(&cur, &k2, h / 2.0, trunc), t0 + h / 2.0)?;
        let k4 = f(axpy(&cur, &k3, h, trunc), t0 + h)?;
        let mut next = BTreeMap::new();
        for (n, v) in cur.iter() {
            let incr = (k1.get(n) + 2.0 * k2.get(n) + 2.0 * k3.get(n) + k4.get(n)) * (h / 6.0);
            let w = v + incr;
            if !(w.re.is_finite() && w.im.is_finite()) {
                return Err(OracleError::BlowUp { step, t });
            }
            next.insert(n.clone(), w);
        }
        cur = CoeffField::from_map_unchecked(trunc, next);
        frames.push(cur.clone());
    }
    Ok(TimeGridField { times, frames })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Truncation, FrequencyVector) {
        (Truncation::new(1, 3).unwrap(), FrequencyVector::new(vec![1.0]).unwrap())
    }

    #[test]
    fn rhs_examples() {
        let (trunc, omega) = setup();
        let zero = OdeState { field: CoeffField::zero(trunc), time: 0.0 };
        assert_eq!(rhs(&zero, &omega, 2, trunc).unwrap().sup_norm(), 0.0);
        let delta = OdeState { field: CoeffField::constant(trunc, Complex64::new(2.0, 0.0)), time: 0.0 };
        assert_eq!(rhs(&delta, &omega, 2, trunc).unwrap().sup_norm(), 0.0);
        let half = Complex64::new(0.5, 0.0);
        let two_mode = CoeffField::from_entries(
            trunc,
            [(MultiIndex::new(vec![1]), half), (MultiIndex::new(vec![-1]), half)],
        )
        .unwrap();
        let r = rhs(&OdeState { field: two_mode, time: 0.0 }, &omega, 2, trunc).unwrap();
        let v = r.get(&MultiIndex::new(vec![2]));
        assert!((v - Complex64::new(0.0, -1.0 / 20.0)).norm() < 1e-16);
    }

    #[test]
    fn rk4_trivial_data() {
        let (trunc, omega) = setup();
        let a = CoeffField::constant(trunc, Complex64::new(0.4, 0.1));
        let g = rk4_integrate(&a, 0.1, 10, &omega, 2, trunc).unwrap();
        assert!(g.mean_conserved());
        assert!(g.frames.iter().all(|f| f.sup_distance(&a) == 0.0));
        let z = rk4_integrate(&CoeffField::zero(trunc), 0.1, 10, &omega, 2, trunc).unwrap();
        assert!(z.frames.iter().all(|f| f.sup_norm() == 0.0));
        assert!(matches!(rk4_integrate(&a, 0.1, 0, &omega, 2, trunc), Err(OracleError::NoSteps)));
    }

    #[test]
    fn rk4_reports_blow_up() {
        let (trunc, omega) = setup();
        let big = CoeffField::from_entries(
            trunc,
            [
                (MultiIndex::new(vec![1]), Complex64::new(1e200, 0.0)),
                (MultiIndex::new(vec![-1]), Complex64::new(1e200, 0.0)),
            ],
        )
        .unwrap();
        match rk4_integrate(&big, 1.0, 4, &omega, 2, trunc) {
            Err(OracleError::BlowUp { step: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
    }
}
