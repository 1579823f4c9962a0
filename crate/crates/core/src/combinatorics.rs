//! The branching trees behind the Picard expansion.
//!
//! Depth-1 trees are `{Leaf0, Leaf1}`; a depth-k tree is either `Leaf0` or a
//! branch of `p` depth-(k-1) trees. Each tree carries the statistics
//! `sigma` (alpha for general p), `ell` (beta) and `D`, and contributes one
//! term to the k-th Picard iterate. [`TreeExpansion`] evaluates those terms in
//! closed form as sums of `t^m e^{a t}`.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{multiplier, FrequencyVector, LatticeError, MultiIndex, Truncation};
use crate::spectral::{CoeffField, SpectralError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CombinatoricsError {
    #[error("tree too large: N_{k} = {count} nodes for p = {p} exceeds the budget of {budget}")]
    TreeTooLarge { k: u32, p: u32, count: String, budget: u64 },
    #[error("tree depth k must be >= 1 (got {0})")]
    BadDepth(u32),
    #[error("nonlinearity degree p must be >= 2 (got {0})")]
    BadDegree(u32),
    #[error("weight must be finite and >= 0 (got {0})")]
    BadWeight(f64),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    Leaf0,
    /// Only at depth 1.
    Leaf1,
    /// Exactly `p` children, all of depth `k - 1`.
    Branch(Vec<Arc<TreeNode>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub depth: u32,
    pub shape: Shape,
}

impl TreeNode {
    /// Length of the multi-index tuple attached to this tree: one slot per
    /// initial coefficient factor.
    pub fn index_len(&self, p: u32) -> usize {
        match &self.shape {
            Shape::Leaf0 => 1,
            Shape::Leaf1 => p as usize,
            Shape::Branch(ch) => ch.iter().map(|c| c.index_len(p)).sum(),
        }
    }

    /// Checks depth bookkeeping and branch arity.
    pub fn well_formed(&self, p: u32) -> bool {
        match &self.shape {
            Shape::Leaf0 => self.depth >= 1,
            Shape::Leaf1 => self.depth == 1,
            Shape::Branch(ch) => {
                self.depth >= 2
                    && ch.len() == p as usize
                    && ch.iter().all(|c| c.depth + 1 == self.depth && c.well_formed(p))
            }
        }
    }
}

/// `N_1 = 2`, `N_k = 1 + N_{k-1}^p`; `None` on overflow.
pub fn node_count(k: u32, p: u32) -> Option<u128> {
    let mut n: u128 = 2;
    for _ in 1..k {
        let mut pow: u128 = 1;
        for _ in 0..p {
            pow = pow.checked_mul(n)?;
        }
        n = pow.checked_add(1)?;
    }
    Some(n)
}

fn check_kp(k: u32, p: u32) -> Result<(), CombinatoricsError> {
    if k == 0 {
        return Err(CombinatoricsError::BadDepth(k));
    }
    if p < 2 {
        return Err(CombinatoricsError::BadDegree(p));
    }
    Ok(())
}

/// All depth-k trees, each exactly once: `Leaf0` first, then branches in
/// lexicographic order of their children.
pub fn enumerate_tree(k: u32, p: u32, budget: u64) -> Result<Vec<Arc<TreeNode>>, CombinatoricsError> {
    check_kp(k, p)?;
    match node_count(k, p) {
        Some(n) if n <= u128::from(budget) => {}
        other => {
            return Err(CombinatoricsError::TreeTooLarge {
                k,
                p,
                count: other.map_or_else(|| "overflow".to_string(), |n| n.to_string()),
                budget,
            })
        }
    }
    let mut level = vec![
        Arc::new(TreeNode { depth: 1, shape: Shape::Leaf0 }),
        Arc::new(TreeNode { depth: 1, shape: Shape::Leaf1 }),
    ];
    for depth in 2..=k {
        let mut next = vec![Arc::new(TreeNode { depth, shape: Shape::Leaf0 })];
        let m = level.len();
        let mut digits = vec![0usize; p as usize];
        'outer: loop {
            let children = digits.iter().map(|&d| Arc::clone(&level[d])).collect();
            next.push(Arc::new(TreeNode { depth, shape: Shape::Branch(children) }));
            for pos in (0..digits.len()).rev() {
                digits[pos] += 1;
                if digits[pos] < m {
                    continue 'outer;
                }
                digits[pos] = 0;
            }
            break;
        }
        level = next;
    }
    Ok(level)
}

/// `sigma` (alpha), `ell` (beta) and `D` of one tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeStats {
    pub sigma: Ratio<i64>,
    pub ell: u64,
    pub d: u128,
}

/// Structural recursion: leaves give `(1/(p-1), 0, 1)` and
/// `(p/(p-1), 1, 1)`; a branch sums `sigma`, sets `ell = 1 + sum ell_j` and
/// `D = ell * prod D_j`.
pub fn stats(node: &TreeNode, p: u32) -> TreeStats {
    let q = i64::from(p) - 1;
    match &node.shape {
        Shape::Leaf0 => TreeStats { sigma: Ratio::new(1, q), ell: 0, d: 1 },
        Shape::Leaf1 => TreeStats { sigma: Ratio::new(i64::from(p), q), ell: 1, d: 1 },
        Shape::Branch(ch) => {
            let mut sigma = Ratio::from_integer(0);
            let mut ell = 1;
            let mut d: u128 = 1;
            for c in ch {
                let s = stats(c, p);
                sigma += s.sigma;
                ell += s.ell;
                d *= s.d;
            }
            TreeStats { sigma, ell, d: d * u128::from(ell) }
        }
    }
}

impl TreeStats {
    /// `sigma = ell + 1/(p-1)` and `(p-1) sigma` equals the index length.
    pub fn identities_hold(&self, node: &TreeNode, p: u32) -> bool {
        let q = i64::from(p) - 1;
        let ell = i64::try_from(self.ell).unwrap_or(i64::MAX);
        self.sigma == Ratio::from_integer(ell) + Ratio::new(1, q)
            && self.sigma * q == Ratio::from_integer(node.index_len(p) as i64)
    }
}

/// `sum over depth-k trees of flat^ell / D`, by enumeration.
pub fn diamond_sum(k: u32, p: u32, flat: f64, budget: u64) -> Result<f64, CombinatoricsError> {
    check_weight(flat)?;
    let trees = enumerate_tree(k, p, budget)?;
    Ok(trees
        .iter()
        .map(|t| {
            let s = stats(t, p);
            flat.powi(s.ell as i32) / s.d as f64
        })
        .sum())
}

fn check_weight(flat: f64) -> Result<(), CombinatoricsError> {
    if !(flat >= 0.0 && flat.is_finite()) {
        return Err(CombinatoricsError::BadWeight(flat));
    }
    Ok(())
}

/// Coefficients (by `ell`) of the generating polynomial
/// `W_k(x) = sum_trees x^ell / D`, from `W_0 = 1`, `W_k = 1 + int_0^x W_{k-1}^p`.
pub fn diamond_polynomial(k: u32, p: u32) -> Result<Vec<f64>, CombinatoricsError> {
    check_kp(k, p)?;
    let mut w = vec![1.0];
    for _ in 0..k {
        let mut pow = vec![1.0];
        for _ in 0..p {
            pow = poly_mul_real(&pow, &w);
        }
        let mut next = vec![0.0; pow.len() + 1];
        next[0] = 1.0;
        for (j, c) in pow.iter().enumerate() {
            next[j + 1] = c / (j + 1) as f64;
        }
        w = next;
    }
    Ok(w)
}

fn poly_mul_real(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// The weighted tree sum evaluated through [`diamond_polynomial`]; reaches
/// depths where enumeration is hopeless.
pub fn diamond_sum_recursive(k: u32, p: u32, flat: f64) -> Result<f64, CombinatoricsError> {
    check_weight(flat)?;
    let w = diamond_polynomial(k, p)?;
    Ok(w.iter().rev().fold(0.0, |acc, c| acc * flat + c))
}

/// Induction majorant `M_1 = 1 + x`, `M_k = 1 + x M_{k-1}^p`; bounds the
/// weighted sum from above for every k.
pub fn diamond_majorant(k: u32, p: u32, flat: f64) -> Result<f64, CombinatoricsError> {
    check_kp(k, p)?;
    check_weight(flat)?;
    let mut m = 1.0 + flat;
    for _ in 1..k {
        m = 1.0 + flat * m.powi(p as i32);
    }
    Ok(m)
}

/// Largest weight for which the bound `p/(p-1)` holds: `(p-1)^{p-1}/p^p`.
pub fn critical_weight(p: u32) -> f64 {
    let q = f64::from(p - 1);
    q.powi(p as i32 - 1) / f64::from(p).powi(p as i32)
}

/// Exponents closer than this are merged into one resonant term.
pub const MERGE_TOL: f64 = 1e-12;

/// `f(t) = sum_i P_i(t) e^{a_i t}` with complex polynomial coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExpPoly {
    terms: Vec<(Complex64, Vec<Complex64>)>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly::default()
    }

    /// `c e^{a t}`.
    pub fn exp(c: Complex64, a: Complex64) -> Self {
        let mut f = ExpPoly::zero();
        f.add_monomial(a, 0, c);
        f
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(_, p)| p.iter().all(|c| *c == Complex64::default()))
    }

    /// Number of distinct exponents.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest power of `t` present.
    pub fn degree(&self) -> usize {
        self.terms.iter().map(|(_, p)| p.len().saturating_sub(1)).max().unwrap_or(0)
    }

    pub fn add_monomial(&mut self, a: Complex64, m: usize, c: Complex64) {
        let slot = match self.terms.iter().position(|(b, _)| (b - a).norm() <= MERGE_TOL) {
            Some(i) => i,
            None => {
                self.terms.push((a, Vec::new()));
                self.terms.len() - 1
            }
        };
        let poly = &mut self.terms[slot].1;
        if poly.len() <= m {
            poly.resize(m + 1, Complex64::default());
        }
        poly[m] += c;
    }

    pub fn add_scaled(&mut self, other: &ExpPoly, s: Complex64) {
        for (a, p) in &other.terms {
            for (m, c) in p.iter().enumerate() {
                self.add_monomial(*a, m, c * s);
            }
        }
    }

    pub fn mul(&self, other: &ExpPoly) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for (a, p) in &self.terms {
            for (b, q) in &other.terms {
                for (i, x) in p.iter().enumerate() {
                    for (j, y) in q.iter().enumerate() {
                        out.add_monomial(a + b, i + j, x * y);
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> ExpPoly {
        let mut out = self.clone();
        for (_, p) in &mut out.terms {
            for c in p.iter_mut() {
                *c *= s;
            }
        }
        out
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(a, p)| {
                let poly = p.iter().rev().fold(Complex64::default(), |acc, c| acc * t + c);
                poly * (a * t).exp()
            })
            .sum()
    }

    /// `t -> int_0^t e^{a (t - s)} f(s) ds`, term by term.
    ///
    /// For `d = b - a` non-resonant,
    /// `int_0^t s^m e^{d s} ds = e^{d t} sum_j (-1)^j m!/(m-j)! t^{m-j} / d^{j+1} - (-1)^m m! / d^{m+1}`;
    /// for `|d| <= MERGE_TOL` it is `t^{m+1} / (m+1)`.
    pub fn duhamel(&self, a: Complex64) -> ExpPoly {
        let mut out = ExpPoly::zero();
        for (b, p) in &self.terms {
            let d = b - a;
            let resonant = d.norm() <= MERGE_TOL;
            for (m, c) in p.iter().enumerate() {
                if *c == Complex64::default() {
                    continue;
                }
                if resonant {
                    out.add_monomial(a, m + 1, c / (m + 1) as f64);
                    continue;
                }
                let mut falling = 1.0;
                let mut dpow = d;
                for j in 0..=m {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    out.add_monomial(*b, m - j, c * sign * falling / dpow);
                    if j < m {
                        falling *= (m - j) as f64;
                        dpow *= d;
                    }
                }
                // falling = m!, dpow = d^{m+1}
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                out.add_monomial(a, 0, -c * sign * falling / dpow);
            }
        }
        out
    }
}

/// Closed-form tree expansion of the k-th Picard iterate on a truncation.
///
/// Every depth-k tree contributes one term per lattice point; a tree's term
/// is built from its children's terms by convolution and one Duhamel
/// integral, so shared subtrees are evaluated once. Factors are restricted to
/// the truncation ball, matching the truncated iteration.
#[derive(Debug, Clone)]
pub struct TreeExpansion {
    pub k: u32,
    pub p: u32,
    pub node_count: usize,
    points: Vec<MultiIndex>,
    index: BTreeMap<MultiIndex, usize>,
    values: Vec<ExpPoly>,
}

type NodeValues = Arc<Vec<ExpPoly>>;

struct Builder<'a> {
    p: u32,
    points: &'a [MultiIndex],
    index: &'a BTreeMap<MultiIndex, usize>,
    lambda: Vec<Complex64>,
    leaf0: NodeValues,
    memo: HashMap<usize, NodeValues>,
}

impl Builder<'_> {
    fn values(&mut self, node: &Arc<TreeNode>) -> NodeValues {
        let key = Arc::as_ptr(node) as usize;
        if let Some(v) = self.memo.get(&key) {
            return Arc::clone(v);
        }
        let v = match &node.shape {
            Shape::Leaf0 => Arc::clone(&self.leaf0),
            Shape::Leaf1 => {
                let kids = vec![Arc::clone(&self.leaf0); self.p as usize];
                Arc::new(self.branch(&kids))
            }
            Shape::Branch(ch) => {
                let kids: Vec<NodeValues> = ch.iter().map(|c| self.values(c)).collect();
                Arc::new(self.branch(&kids))
            }
        };
        self.memo.insert(key, Arc::clone(&v));
        v
    }

    /// `n -> (lambda(n)/p) * Duhamel_{lambda(n)}[ sum_{q_1+..+q_p = n} prod_j F_j(q_j) ]`
    /// with every `q_j` in the ball.
    fn branch(&self, kids: &[NodeValues]) -> Vec<ExpPoly> {
        // partial products over the first j factors, keyed by partial sum
        let mut acc: BTreeMap<MultiIndex, ExpPoly> = BTreeMap::new();
        for (i, f) in kids[0].iter().enumerate() {
            if !f.is_empty() {
                acc.insert(self.points[i].clone(), f.clone());
            }
        }
        let last = kids.len() - 1;
        for (j, kid) in kids.iter().enumerate().skip(1) {
            let mut next: BTreeMap<MultiIndex, ExpPoly> = BTreeMap::new();
            for (s, g) in &acc {
                for (i, f) in kid.iter().enumerate() {
                    if f.is_empty() {
                        continue;
                    }
                    let n = s.add(&self.points[i]);
                    if j == last && !self.index.contains_key(&n) {
                        continue;
                    }
                    next.entry(n).or_default().add_scaled(&g.mul(f), Complex64::new(1.0, 0.0));
                }
            }
            acc = next;
        }
        let pf = f64::from(self.p);
        self.points
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let lam = self.lambda[i];
                match acc.get(n) {
                    Some(g) if lam != Complex64::default() => g.duhamel(lam).scale(lam / pf),
                    _ => ExpPoly::zero(),
                }
            })
            .collect()
    }
}

impl TreeExpansion {
    pub fn build(
        k: u32,
        p: u32,
        init: &CoeffField,
        omega: &FrequencyVector,
        trunc: Truncation,
        budget: u64,
    ) -> Result<Self, CombinatoricsError> {
        let trees = enumerate_tree(k, p, budget)?;
        if init.nu() != trunc.nu {
            return Err(SpectralError::DimensionMismatch(trunc.nu, init.nu()).into());
        }
        let points = trunc.enumerate();
        let index: BTreeMap<MultiIndex, usize> =
            points.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        let lambda = points
            .iter()
            .map(|n| multiplier(n, omega))
            .collect::<Result<Vec<_>, _>>()?;
        let leaf0: Vec<ExpPoly> = points
            .iter()
            .zip(&lambda)
            .map(|(n, lam)| {
                let c = init.get(n);
                if c == Complex64::default() {
                    ExpPoly::zero()
                } else {
                    ExpPoly::exp(c, *lam)
                }
            })
            .collect();
        let mut builder = Builder {
            p,
            points: &points,
            index: &index,
            lambda,
            leaf0: Arc::new(leaf0),
            memo: HashMap::new(),
        };
        let mut values = vec![ExpPoly::zero(); points.len()];
        for tree in &trees {
            let v = builder.values(tree);
            for (acc, f) in values.iter_mut().zip(v.iter()) {
                acc.add_scaled(f, Complex64::new(1.0, 0.0));
            }
        }
        Ok(TreeExpansion { k, p, node_count: trees.len(), points, index, values })
    }

    pub fn eval(&self, n: &MultiIndex, t: f64) -> Complex64 {
        self.index.get(n).map_or_else(Complex64::default, |&i| self.values[i].eval(t))
    }

    pub fn field_at(&self, trunc: Truncation, t: f64) -> CoeffField {
        let map = self
            .points
            .iter()
            .zip(&self.values)
            .filter(|(_, f)| !f.is_empty())
            .map(|(n, f)| (n.clone(), f.eval(t)))
            .collect();
        CoeffField::from_map_unchecked(trunc, map)
    }

    /// The closed form at lattice point `n`.
    pub fn term(&self, n: &MultiIndex) -> Option<&ExpPoly> {
        self.index.get(n).map(|&i| &self.values[i])
    }
}

/// `c_k(t, n)` from the tree expansion.
#[allow(clippy::too_many_arguments)]
pub fn tree_eval(
    k: u32,
    n: &MultiIndex,
    t: f64,
    init: &CoeffField,
    omega: &FrequencyVector,
    p: u32,
    trunc: Truncation,
    budget: u64,
) -> Result<Complex64, CombinatoricsError> {
    Ok(TreeExpansion::build(k, p, init, omega, trunc, budget)?.eval(n, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const BUDGET: u64 = 1_000_000;

    #[test]
    fn node_counts() {
        assert_eq!(enumerate_tree(1, 2, BUDGET).unwrap().len(), 2);
        assert_eq!(enumerate_tree(2, 2, BUDGET).unwrap().len(), 5);
        assert_eq!(enumerate_tree(3, 2, BUDGET).unwrap().len(), 26);
        assert_eq!(enumerate_tree(4, 2, BUDGET).unwrap().len(), 677);
        assert_eq!(enumerate_tree(2, 3, BUDGET).unwrap().len(), 9);
        assert_eq!(node_count(5, 2), Some(458_330));
        assert_eq!(node_count(40, 2), None);
    }

    #[test]
    fn budget_is_enforced() {
        match enumerate_tree(5, 2, 1000) {
            Err(CombinatoricsError::TreeTooLarge { count, .. }) => assert_eq!(count, "458330"),
            other => panic!("{other:?}"),
        }
        let msg = enumerate_tree(5, 2, 1000).unwrap_err().to_string();
        assert!(msg.contains("tree too large") && msg.contains("458330"), "{msg}");
    }

    #[test]
    fn enumeration_is_distinct_and_well_formed() {
        let trees = enumerate_tree(3, 2, BUDGET).unwrap();
        for (i, a) in trees.iter().enumerate() {
            assert!(a.well_formed(2));
            for b in &trees[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn stats_examples() {
        let leaf0 = TreeNode { depth: 1, shape: Shape::Leaf0 };
        let s = stats(&leaf0, 2);
        assert_eq!((s.sigma, s.ell, s.d), (Ratio::from_integer(1), 0, 1));
        let l1 = Arc::new(TreeNode { depth: 1, shape: Shape::Leaf1 });
        let b = TreeNode { depth: 2, shape: Shape::Branch(vec![l1.clone(), l1.clone()]) };
        let s = stats(&b, 2);
        assert_eq!((s.sigma, s.ell, s.d), (Ratio::from_integer(4), 3, 3));
        let s = stats(&l1, 3);
        assert_eq!((s.sigma, s.ell), (Ratio::new(3, 2), 1));
    }

    #[test]
    fn sigma_ell_identity() {
        for (k, p) in [(4, 2), (3, 3)] {
            for t in enumerate_tree(k, p, BUDGET).unwrap() {
                let s = stats(&t, p);
                assert_eq!(s.sigma, Ratio::from_integer(s.ell as i64) + Ratio::new(1, i64::from(p) - 1));
                assert_eq!(Ratio::from_integer(t.index_len(p) as i64), s.sigma * (i64::from(p) - 1));
                assert!(s.identities_hold(&t, p));
            }
        }
    }

    #[test]
    fn diamond_examples() {
        assert_eq!(diamond_sum(1, 2, 0.25, BUDGET).unwrap(), 1.25);
        assert_eq!(diamond_sum(1, 2, 0.0, BUDGET).unwrap(), 1.0);
        let d3 = diamond_sum(3, 2, 0.25, BUDGET).unwrap();
        assert!(d3 <= 2.0);
        assert_relative_eq!(d3, diamond_sum_recursive(3, 2, 0.25).unwrap(), max_relative = 1e-14);
        assert_eq!(diamond_polynomial(2, 2).unwrap(), vec![1.0, 1.0, 1.0, 1.0 / 3.0]);
        let crit = critical_weight(3);
        assert_relative_eq!(crit, 4.0 / 27.0, max_relative = 1e-15);
        for k in 1..=3 {
            assert!(diamond_sum(k, 3, crit, BUDGET).unwrap() <= 1.5);
        }
    }

    #[test]
    fn majorant_sequence() {
        let m: Vec<f64> = (1..=5).map(|k| diamond_majorant(k, 2, 0.3).unwrap()).collect();
        assert_relative_eq!(m[1], 1.507, epsilon = 1e-12);
        assert!(m[3] < 2.0 && m[4] > 2.0);
        for k in 1..=6 {
            assert!(diamond_sum_recursive(k, 2, 0.3).unwrap() <= diamond_majorant(k, 2, 0.3).unwrap());
        }
    }

    #[test]
    fn duhamel_closed_form() {
        let a = Complex64::new(0.0, -0.4);
        let b = Complex64::new(0.0, 0.3);
        let f = ExpPoly::exp(Complex64::new(1.0, 0.0), b);
        let g = f.duhamel(a);
        let t = 0.7;
        let want = ((b * t).exp() - (a * t).exp()) / (b - a);
        assert!((g.eval(t) - want).norm() < 1e-15);
        // resonant case: int_0^t e^{a(t-s)} e^{a s} ds = t e^{a t}
        let r = ExpPoly::exp(Complex64::new(1.0, 0.0), a).duhamel(a);
        assert!((r.eval(t) - t * (a * t).exp()).norm() < 1e-15);
        // s e^{b s}: derivative of the result must reproduce the integrand
        let mut h = ExpPoly::zero();
        h.add_monomial(b, 1, Complex64::new(1.0, 0.0));
        let hd = h.duhamel(a);
        let eps = 1e-5;
        let deriv = (hd.eval(t + eps) - hd.eval(t - eps)) / (2.0 * eps);
        let lhs = deriv - a * hd.eval(t);
        assert!((lhs - t * (b * t).exp()).norm() < 1e-9);
        assert_eq!(hd.eval(0.0).norm(), 0.0);
    }

    #[test]
    fn constant_data_is_a_fixed_point() {
        let trunc = Truncation::new(1, 2).unwrap();
        let omega = FrequencyVector::new(vec![1.0]).unwrap();
        let init = CoeffField::constant(trunc, Complex64::new(0.7, 0.0));
        let e = TreeExpansion::build(3, 2, &init, &omega, trunc, BUDGET).unwrap();
        for n in trunc.enumerate() {
            let want = if n.is_zero() { 0.7 } else { 0.0 };
            assert_eq!(e.eval(&n, 0.05), Complex64::new(want, 0.0));
        }
    }

    #[test]
    fn time_zero_returns_data() {
        let trunc = Truncation::new(1, 2).unwrap();
        let omega = FrequencyVector::new(vec![1.0]).unwrap();
        let init = CoeffField::from_entries(
            trunc,
            [
                (MultiIndex::new(vec![1]), Complex64::new(0.5, 0.0)),
                (MultiIndex::new(vec![-1]), Complex64::new(0.5, 0.0)),
            ],
        )
        .unwrap();
        let e = TreeExpansion::build(2, 2, &init, &omega, trunc, BUDGET).unwrap();
        for n in trunc.enumerate() {
            assert!((e.eval(&n, 0.0) - init.get(&n)).norm() < 1e-15);
        }
    }
}
