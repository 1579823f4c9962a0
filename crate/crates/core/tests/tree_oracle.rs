mod common;

use common::{gauss_legendre, LiteralTree};
use num_complex::Complex64;
use qpbbm::combinatorics::{enumerate_tree, TreeExpansion};
use qpbbm::lattice::{multiplier, FrequencyVector, MultiIndex, Truncation};
use qpbbm::spectral::{make_initial, CoeffField, DecayProfile};

const BUDGET: u64 = 1_000_000;

fn literal_total(k: u32, p: u32, init: &CoeffField, omega: &FrequencyVector, trunc: Truncation, n: &MultiIndex, t: f64) -> Complex64 {
    let lit = LiteralTree { init, omega, p, trunc };
    enumerate_tree(k, p, BUDGET).unwrap().iter().map(|g| lit.node_sum(g, n, t)).sum()
}

fn compare(k: u32, p: u32, init: &CoeffField, omega: &FrequencyVector, trunc: Truncation) -> f64 {
    let e = TreeExpansion::build(k, p, init, omega, trunc, BUDGET).unwrap();
    let mut worst: f64 = 0.0;
    for t in [0.0, 0.03, 1.0 / 12.0, 0.4] {
        for n in trunc.enumerate() {
            let want = literal_total(k, p, init, omega, trunc, &n, t);
            worst = worst.max((e.eval(&n, t) - want).norm());
        }
    }
    worst
}

#[test]
fn closed_form_matches_literal_tuple_sum_p2() {
    let trunc = Truncation::new(1, 2).unwrap();
    let omega = FrequencyVector::new(vec![1.0]).unwrap();
    let init = make_initial(&DecayProfile::Exponential { amp: 1.0, rate: 1.0 }, 2, trunc, 3).unwrap();
    for k in 1..=2 {
        let d = compare(k, 2, &init, &omega, trunc);
        assert!(d < 1e-13, "k = {k}: {d:e}");
    }
}

#[test]
fn closed_form_matches_literal_tuple_sum_p3_two_dims() {
    let trunc = Truncation::new(2, 1).unwrap();
    let omega = FrequencyVector::default_for(2).unwrap();
    let init = make_initial(&DecayProfile::Exponential { amp: 0.5, rate: 0.8 }, 3, trunc, 9).unwrap();
    let d = compare(1, 3, &init, &omega, trunc);
    assert!(d < 1e-13, "{d:e}");
    let t1 = Truncation::new(1, 1).unwrap();
    let w1 = FrequencyVector::new(vec![1.0]).unwrap();
    let c = Complex64::new(0.3, 0.4);
    let two_mode = CoeffField::from_entries(t1, [(MultiIndex::new(vec![1]), c), (MultiIndex::new(vec![-1]), c.conj())]).unwrap();
    let d = compare(2, 3, &two_mode, &w1, t1);
    assert!(d < 1e-13, "{d:e}");
}

#[test]
fn first_iterate_matches_hand_formula() {
    let trunc = Truncation::new(1, 2).unwrap();
    let omega = FrequencyVector::new(vec![1.0]).unwrap();
    let half = Complex64::new(0.5, 0.0);
    let init = CoeffField::from_entries(trunc, [(MultiIndex::new(vec![1]), half), (MultiIndex::new(vec![-1]), half)]).unwrap();
    let e = TreeExpansion::build(1, 2, &init, &omega, trunc, BUDGET).unwrap();
    let t = 1.0 / 12.0;
    let lam = |c: i64| multiplier(&MultiIndex::new(vec![c]), &omega).unwrap();
    for n in trunc.enumerate() {
        let a = lam(n.coords()[0]);
        let mut want = init.get(&n) * (a * t).exp();
        for q1 in [-1i64, 1] {
            let q2 = n.coords()[0] - q1;
            let c2 = init.get(&MultiIndex::new(vec![q2]));
            if c2 == Complex64::default() {
                continue;
            }
            let b = lam(q1) + lam(q2);
            let integral = if (b - a).norm() < 1e-12 { t * (a * t).exp() } else { ((b * t).exp() - (a * t).exp()) / (b - a) };
            // quadrature cross-check of the antiderivative
            let quad = gauss_legendre(t, |s| (a * (t - s)).exp() * (b * s).exp());
            assert!((integral - quad).norm() < 1e-16);
            want += half * c2 * a / 2.0 * integral;
        }
        assert!((e.eval(&n, t) - want).norm() < 1e-16, "n = {n}");
    }
}
