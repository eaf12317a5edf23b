//! Gauss-Legendre and Gauss-Lobatto rules on `[0, 1]`.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::error::{Error, Result};
use crate::legendre::legendre_with_derivative;

/// Tolerance used when certifying monomial moments.
pub const MOMENT_TOLERANCE: f64 = 1e-13;

const MAX_NODES: usize = 32;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Gauss,
    Lobatto,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Gauss => "gauss",
            NodeKind::Lobatto => "lobatto",
        }
    }

    /// Degree of exactness of the `k`-node rule of this family.
    pub fn exactness_for(self, k: usize) -> usize {
        match self {
            NodeKind::Gauss => 2 * k - 1,
            NodeKind::Lobatto => (2 * k).saturating_sub(3),
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for NodeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gauss" => Ok(NodeKind::Gauss),
            "lobatto" => Ok(NodeKind::Lobatto),
            other => Err(Error::Domain(alloc::format!(
                "unknown node family `{other}`"
            ))),
        }
    }
}

/// Nodes `τ_i` (ascending) and positive weights `ω_i` on `[0, 1]`, with the
/// polynomial degree up to which the rule is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    kind: NodeKind,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    exactness: usize,
}

impl QuadratureRule {
    /// Builds a rule of the given family with `k` nodes.
    pub fn new(kind: NodeKind, k: usize) -> Result<Self> {
        match kind {
            NodeKind::Gauss => gauss_rule(k),
            NodeKind::Lobatto => lobatto_rule(k),
        }
    }

    /// A rule from raw parts. The caller vouches for `exactness`; nothing is
    /// re-certified. Intended for experiments with perturbed rules.
    pub fn from_parts(
        kind: NodeKind,
        nodes: Vec<f64>,
        weights: Vec<f64>,
        exactness: usize,
    ) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::Domain(
                "nodes and weights must be non-empty and equally long".into(),
            ));
        }
        if nodes.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::Domain("nodes must lie in [0, 1]".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain("nodes must be strictly increasing".into()));
        }
        Ok(Self {
            kind,
            nodes,
            weights,
            exactness,
        })
    }

    pub fn kind(&self) -> NodeKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exactness(&self) -> usize {
        self.exactness
    }

    /// `Σ ω_i f(τ_i)`.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }

    /// Same rule mapped onto `[a, b]`: `(nodes, weights)`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let len = b - a;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&t, &w)| (a + len * t, len * w))
    }

    fn certify(self) -> Result<Self> {
        let (ok, err) = check_exactness(&self, self.exactness);
        if !ok {
            return Err(Error::Postcondition {
                what: "quadrature moment",
                residual: err,
            });
        }
        Ok(self)
    }
}

/// Whether the monomial moments `∫₀¹ t^d = 1/(d+1)` are reproduced for every
/// `d ≤ degree`, together with the largest moment error seen.
pub fn check_exactness(rule: &QuadratureRule, degree: usize) -> (bool, f64) {
    let mut max_err = 0.0f64;
    for d in 0..=degree {
        let approx = rule.integrate(|t| libm::pow(t, d as f64));
        max_err = max_err.max((approx - 1.0 / (d + 1) as f64).abs());
    }
    (max_err <= MOMENT_TOLERANCE, max_err)
}

/// Newton on `g` from `x0`; `step` returns the Newton correction.
fn newton(mut x: f64, step: impl Fn(f64) -> f64) -> Option<f64> {
    for _ in 0..NEWTON_MAX_ITER {
        let dx = step(x);
        x -= dx;
        if dx.abs() <= 4.0 * f64::EPSILON * x.abs().max(1e-3) {
            // one polishing step
            return Some(x - step(x));
        }
    }
    None
}

/// Assembles a rule on `[0, 1]` from the nodes in `(0, 1]` of `[−1, 1]`
/// (i.e. `x ≥ 0`, ascending) and their weights, mirroring for symmetry.
fn from_right_half(
    kind: NodeKind,
    k: usize,
    right: &[(f64, f64)],
    exactness: usize,
) -> Result<QuadratureRule> {
    let mut nodes = alloc::vec![0.0; k];
    let mut weights = alloc::vec![0.0; k];
    for (idx, &(x, w)) in right.iter().enumerate() {
        // right half occupies positions k-1, k-2, ... in descending x
        let hi = k - 1 - idx;
        let lo = idx;
        let t_hi = 0.5 * (1.0 + x);
        nodes[hi] = t_hi;
        weights[hi] = 0.5 * w;
        if lo != hi {
            nodes[lo] = 1.0 - t_hi;
            weights[lo] = 0.5 * w;
        } else {
            nodes[lo] = 0.5;
        }
    }
    QuadratureRule {
        kind,
        nodes,
        weights,
        exactness,
    }
    .certify()
}

/// `k`-point Gauss-Legendre rule on `[0, 1]`, exact to degree `2k−1`.
pub fn gauss_rule(k: usize) -> Result<QuadratureRule> {
    if !(1..=MAX_NODES).contains(&k) {
        return Err(Error::Domain(alloc::format!(
            "Gauss rule needs 1 <= k <= {MAX_NODES}, got {k}"
        )));
    }
    let half = k.div_ceil(2);
    let mut right = Vec::with_capacity(half);
    // i = 1 is the largest root
    for i in 1..=half {
        let guess = libm::cos(PI * (i as f64 - 0.25) / (k as f64 + 0.5));
        let x = if k % 2 == 1 && i == half {
            0.0
        } else {
            newton(guess, |x| {
                let (p, dp) = legendre_with_derivative(k, x);
                p / dp
            })
            .ok_or(Error::QuadratureNoConvergence { k })?
        };
        let (_, dp) = legendre_with_derivative(k, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        right.push((x, w));
    }
    from_right_half(NodeKind::Gauss, k, &right, 2 * k - 1)
}

/// `k`-point Gauss-Lobatto rule on `[0, 1]` (endpoints included), exact to
/// degree `2k−3`.
pub fn lobatto_rule(k: usize) -> Result<QuadratureRule> {
    if !(2..=MAX_NODES).contains(&k) {
        return Err(Error::Domain(alloc::format!(
            "Lobatto rule needs 2 <= k <= {MAX_NODES}, got {k}"
        )));
    }
    let n = k - 1;
    let nn1 = (n * (n + 1)) as f64;
    let mut right = Vec::with_capacity(k.div_ceil(2));
    right.push((1.0, 2.0 / nn1));
    // interior roots of P_n', largest first
    for i in 1..k.div_ceil(2) {
        let guess = libm::cos(PI * i as f64 / n as f64);
        let x = if n.is_multiple_of(2) && 2 * i == n {
            0.0
        } else {
            newton(guess, |x| {
                let (p, dp) = legendre_with_derivative(n, x);
                let d2p = (2.0 * x * dp - nn1 * p) / (1.0 - x * x);
                dp / d2p
            })
            .ok_or(Error::QuadratureNoConvergence { k })?
        };
        let (p, _) = legendre_with_derivative(n, x);
        right.push((x, 2.0 / (nn1 * p * p)));
    }
    from_right_half(NodeKind::Lobatto, k, &right, 2 * k - 3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::legendre::eval_basis;

    #[test]
    fn gauss_small() {
        let r = gauss_rule(1).unwrap();
        assert_eq!(r.nodes(), [0.5]);
        assert_eq!(r.weights(), [1.0]);

        let r = gauss_rule(2).unwrap();
        let s3 = libm::sqrt(3.0);
        assert!((r.nodes()[0] - (3.0 - s3) / 6.0).abs() < 1e-15);
        assert!((r.nodes()[1] - (3.0 + s3) / 6.0).abs() < 1e-15);
        assert!(r.weights().iter().all(|w| (w - 0.5).abs() < 1e-15));

        let r = gauss_rule(3).unwrap();
        assert_eq!(r.nodes()[1], 0.5);
        assert!((r.weights()[1] - 4.0 / 9.0).abs() < 1e-15);
        assert!(check_exactness(&r, 5).0);
    }

    #[test]
    fn lobatto_small() {
        let r = lobatto_rule(2).unwrap();
        assert_eq!(r.nodes(), [0.0, 1.0]);
        assert!(r.weights().iter().all(|w| (w - 0.5).abs() < 1e-15));

        let r = lobatto_rule(3).unwrap();
        assert_eq!(r.nodes(), [0.0, 0.5, 1.0]);
        for (w, want) in r.weights().iter().zip([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]) {
            assert!((w - want).abs() < 1e-15);
        }

        let r = lobatto_rule(4).unwrap();
        let s5 = libm::sqrt(5.0);
        assert!((r.nodes()[1] - (5.0 - s5) / 10.0).abs() < 1e-15);
        assert!((r.nodes()[2] - (5.0 + s5) / 10.0).abs() < 1e-15);
    }

    #[test]
    fn exactness_checks() {
        let g2 = gauss_rule(2).unwrap();
        assert!(check_exactness(&g2, 3).0);
        let (ok, err) = check_exactness(&g2, 4);
        assert!(!ok);
        assert!((err - (1.0 / 5.0 - 7.0 / 36.0)).abs() < 1e-15);
        assert!(check_exactness(&lobatto_rule(3).unwrap(), 3).0);
    }

    #[test]
    fn rule_invariants_all_sizes() {
        for k in 1..=32 {
            for kind in [NodeKind::Gauss, NodeKind::Lobatto] {
                if kind == NodeKind::Lobatto && k < 2 {
                    continue;
                }
                let r = QuadratureRule::new(kind, k).unwrap();
                assert_eq!(r.len(), k);
                assert_eq!(r.exactness(), kind.exactness_for(k));
                let wsum: f64 = r.weights().iter().sum();
                assert!((wsum - 1.0).abs() <= 1e-14, "{kind} k={k} sum={wsum}");
                assert!(r.weights().iter().all(|&w| w > 0.0));
                assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
                for i in 0..k {
                    assert!((r.nodes()[i] + r.nodes()[k - 1 - i] - 1.0).abs() <= 1e-14);
                }
                assert!(check_exactness(&r, r.exactness()).0, "{kind} k={k}");
                if kind == NodeKind::Lobatto {
                    assert_eq!(r.nodes()[0], 0.0);
                    assert_eq!(r.nodes()[k - 1], 1.0);
                }
            }
        }
    }

    #[test]
    fn out_of_range_sizes() {
        assert!(gauss_rule(0).is_err());
        assert!(gauss_rule(33).is_err());
        assert!(lobatto_rule(1).is_err());
    }

    #[test]
    fn basis_orthonormal_under_gauss7() {
        let r = gauss_rule(7).unwrap();
        for i in 1..=6 {
            for j in 1..=6 {
                let v = r.integrate(|t| eval_basis(i, t).unwrap() * eval_basis(j, t).unwrap());
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() <= 1e-13, "({i},{j}) {v}");
            }
        }
    }

    #[test]
    fn from_parts_validation() {
        assert!(QuadratureRule::from_parts(
            NodeKind::Gauss,
            alloc::vec![0.5, 0.4],
            alloc::vec![0.5, 0.5],
            1
        )
        .is_err());
        assert!(
            QuadratureRule::from_parts(NodeKind::Gauss, alloc::vec![1.5], alloc::vec![1.0], 1)
                .is_err()
        );
        assert!(
            QuadratureRule::from_parts(NodeKind::Gauss, alloc::vec![0.5], alloc::vec![1.0], 1)
                .is_ok()
        );
    }
}
