//! Independent oracles used by several integration-test targets.
#![allow(dead_code)]

use std::collections::BTreeMap;

use num_complex::Complex64;
use qpbbm::combinatorics::{Shape, TreeNode};
use qpbbm::lattice::{multiplier, FrequencyVector, MultiIndex, Truncation};
use qpbbm::spectral::CoeffField;

/// `n -> sum over all p-tuples (q_1..q_p) of support points with sum n`,
/// by brute-force nesting over the supports, restricted to `out`.
pub fn naive_convolution(fields: &[&CoeffField], out: Truncation) -> BTreeMap<MultiIndex, Complex64> {
    let mut acc = BTreeMap::new();
    let supports: Vec<Vec<(MultiIndex, Complex64)>> =
        fields.iter().map(|f| f.iter().map(|(n, v)| (n.clone(), *v)).collect()).collect();
    let mut idx = vec![0usize; fields.len()];
    if supports.iter().any(Vec::is_empty) {
        return acc;
    }
    'outer: loop {
        let mut n = MultiIndex::zero(out.nu);
        let mut v = Complex64::new(1.0, 0.0);
        for (j, &i) in idx.iter().enumerate() {
            n = n.add(&supports[j][i].0);
            v *= supports[j][i].1;
        }
        if out.contains(&n) {
            *acc.entry(n).or_insert_with(Complex64::default) += v;
        }
        for pos in (0..idx.len()).rev() {
            idx[pos] += 1;
            if idx[pos] < supports[pos].len() {
                continue 'outer;
            }
            idx[pos] = 0;
        }
        break;
    }
    acc
}

/// 24-point Gauss-Legendre rule on `[0, t]`.
pub fn gauss_legendre(t: f64, f: impl Fn(f64) -> Complex64) -> Complex64 {
    const N: usize = 24;
    let (x, w) = gl_nodes(N);
    (0..N).map(|i| f(0.5 * t * (x[i] + 1.0)) * (0.5 * t * w[i])).sum()
}

fn gl_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let dp = {
                    let (mut p0, mut p1) = (1.0, z);
                    for k in 2..=n {
                        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                        p0 = p1;
                        p1 = p2;
                    }
                    n as f64 * (z * p1 - p0) / (z * z - 1.0)
                };
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
    }
    (x, w)
}

/// Literal tree term: one tree, one assignment of lattice points to its
/// leaf slots, nested integrals by quadrature. Returns `None` when an
/// intermediate index sum leaves the truncation.
pub struct LiteralTree<'a> {
    pub init: &'a CoeffField,
    pub omega: &'a FrequencyVector,
    pub p: u32,
    pub trunc: Truncation,
}

impl LiteralTree<'_> {
    fn lam(&self, n: &MultiIndex) -> Complex64 {
        multiplier(n, self.omega).unwrap()
    }

    /// Value of `node` with leaf indices `slots` at time `t`.
    fn term(&self, node: &TreeNode, slots: &[MultiIndex], t: f64) -> Option<Complex64> {
        let pf = f64::from(self.p);
        match &node.shape {
            Shape::Leaf0 => {
                let q = &slots[0];
                Some(self.init.get(q) * (self.lam(q) * t).exp())
            }
            Shape::Leaf1 => {
                let n = slots.iter().fold(MultiIndex::zero(self.trunc.nu), |a, q| a.add(q));
                if !self.trunc.contains(&n) {
                    return None;
                }
                let a = self.lam(&n);
                let coef: Complex64 = slots.iter().map(|q| self.init.get(q)).product();
                let b: Complex64 = slots.iter().map(|q| self.lam(q)).sum();
                let integral = gauss_legendre(t, |s| (a * (t - s)).exp() * (b * s).exp());
                Some(a / pf * coef * integral)
            }
            Shape::Branch(children) => {
                let mut blocks = Vec::new();
                let mut off = 0;
                let mut n = MultiIndex::zero(self.trunc.nu);
                for c in children {
                    let len = c.index_len(self.p);
                    let block = &slots[off..off + len];
                    let m = block.iter().fold(MultiIndex::zero(self.trunc.nu), |a, q| a.add(q));
                    // every child value is a coefficient of the previous iterate
                    if !self.trunc.contains(&m) {
                        return None;
                    }
                    n = n.add(&m);
                    blocks.push((c, block));
                    off += len;
                }
                if !self.trunc.contains(&n) {
                    return None;
                }
                for (c, block) in &blocks {
                    self.term(c, block, 0.0)?;
                }
                let a = self.lam(&n);
                let integral = gauss_legendre(t, |s| {
                    let prod: Complex64 =
                        blocks.iter().map(|(c, block)| self.term(c, block, s).unwrap()).product();
                    (a * (t - s)).exp() * prod
                });
                Some(a / pf * integral)
            }
        }
    }

    /// `sum_{slots : mu = n} term(node, slots, t)` over support points of
    /// the data inside the truncation.
    pub fn node_sum(&self, node: &TreeNode, n: &MultiIndex, t: f64) -> Complex64 {
        let support: Vec<MultiIndex> = self
            .init
            .iter()
            .filter(|(q, v)| self.trunc.contains(q) && **v != Complex64::default())
            .map(|(q, _)| q.clone())
            .collect();
        let len = node.index_len(self.p);
        let mut idx = vec![0usize; len];
        let mut acc = Complex64::default();
        if support.is_empty() {
            return acc;
        }
        'outer: loop {
            let slots: Vec<MultiIndex> = idx.iter().map(|&i| support[i].clone()).collect();
            let mu = slots.iter().fold(MultiIndex::zero(self.trunc.nu), |a, q| a.add(q));
            if &mu == n {
                if let Some(v) = self.term(node, &slots, t) {
                    acc += v;
                }
            }
            for pos in (0..len).rev() {
                idx[pos] += 1;
                if idx[pos] < support.len() {
                    continue 'outer;
                }
                idx[pos] = 0;
            }
            break;
        }
        acc
    }
}
