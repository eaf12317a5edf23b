//! Butcher tableaux of HBVM(k,s) methods and of the underlying `k`-stage
//! collocation methods.
//!
//! With nodes `τ_i`, weights `ω_i` and the orthonormal basis `P_j`:
//!
//! ```text
//! Ω = diag(ω),  (P_s)_ij = P_j(τ_i),  (I_s)_ij = ∫₀^τ_i P_j,  A = I_s P_sᵀ Ω
//! ```
//!
//! The same `A` is obtained by filtering the collocation matrix `𝒜` with the
//! rank-`s` projector `P_s P_sᵀ Ω`, provided the rule integrates degree
//! `2s−1` exactly.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::legendre::{eval_antiderivative, xi_coefficient, OrthonormalBasis};
use crate::linalg::{mat_mul, Matrix};
use crate::quadrature::{gauss_rule, NodeKind, QuadratureRule};

/// Tolerance for `𝒜 P_s = I_s` when filtering a collocation tableau.
pub const FILTER_TOLERANCE: f64 = 1e-12;

fn check_degree(k: usize, s: usize, rule: &QuadratureRule) -> Result<()> {
    if k != rule.len() {
        return Err(Error::Domain(alloc::format!(
            "k = {k} does not match the {} nodes of the rule",
            rule.len()
        )));
    }
    if s == 0 {
        return Err(Error::Domain("degree s must be at least 1".into()));
    }
    let required = 2 * s - 1;
    if rule.exactness() < required {
        return Err(Error::InsufficientExactness {
            exactness: rule.exactness(),
            required,
        });
    }
    if s > k {
        return Err(Error::Domain(alloc::format!(
            "degree s = {s} must satisfy 1 <= s <= k = {k}"
        )));
    }
    Ok(())
}

/// `(P_s, P_{s+1}, I_s)` sampled at the rule's nodes.
fn basis_matrices(rule: &QuadratureRule, s: usize) -> Result<(Matrix, Matrix, Matrix)> {
    let k = rule.len();
    let basis = OrthonormalBasis::new(s + 1)?;
    let mut ps1 = Matrix::zeros(k, s + 1);
    let mut is = Matrix::zeros(k, s);
    let mut row = vec![0.0; s + 1];
    for (i, &t) in rule.nodes().iter().enumerate() {
        basis.eval_all(t, &mut row)?;
        for (j, v) in row.iter().enumerate() {
            ps1[(i, j)] = *v;
        }
        for j in 0..s {
            is[(i, j)] = eval_antiderivative(j + 1, t)?;
        }
    }
    Ok((ps1.leading_columns(s), ps1, is))
}

/// The HBVM(k,s) Runge-Kutta method: `c = τ`, `b = ω`, `A = I_s P_sᵀ Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct HbvmTableau {
    s: usize,
    rule: QuadratureRule,
    omega: Matrix,
    ps: Matrix,
    ps1: Matrix,
    is: Matrix,
    a: Matrix,
}

/// Builds HBVM(k,s) on the given `k`-node rule.
pub fn build_hbvm(k: usize, s: usize, rule: &QuadratureRule) -> Result<HbvmTableau> {
    check_degree(k, s, rule)?;
    let (ps, ps1, is) = basis_matrices(rule, s)?;
    let omega = Matrix::diagonal(rule.weights());
    let a = mat_mul(&is, &mat_mul(&ps.transpose(), &omega)?)?;
    Ok(HbvmTableau {
        s,
        rule: rule.clone(),
        omega,
        ps,
        ps1,
        is,
        a,
    })
}

impl HbvmTableau {
    pub fn new(kind: NodeKind, k: usize, s: usize) -> Result<Self> {
        build_hbvm(k, s, &QuadratureRule::new(kind, k)?)
    }

    pub fn gauss(k: usize, s: usize) -> Result<Self> {
        Self::new(NodeKind::Gauss, k, s)
    }

    pub fn lobatto(k: usize, s: usize) -> Result<Self> {
        Self::new(NodeKind::Lobatto, k, s)
    }

    /// Number of stages.
    pub fn k(&self) -> usize {
        self.rule.len()
    }

    /// Degree of the underlying polynomial.
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn kind(&self) -> NodeKind {
        self.rule.kind()
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// Runge-Kutta matrix `A`.
    pub fn a(&self) -> &Matrix {
        &self.a
    }

    /// Weights `b = ω`.
    pub fn b(&self) -> &[f64] {
        self.rule.weights()
    }

    /// Abscissae `c = τ`.
    pub fn c(&self) -> &[f64] {
        self.rule.nodes()
    }

    pub fn omega(&self) -> &Matrix {
        &self.omega
    }

    /// `k × s`, `(P_s)_ij = P_j(τ_i)`.
    pub fn ps(&self) -> &Matrix {
        &self.ps
    }

    /// `k × (s+1)`.
    pub fn ps1(&self) -> &Matrix {
        &self.ps1
    }

    /// `k × s`, `(I_s)_ij = ∫₀^τ_i P_j`.
    pub fn is(&self) -> &Matrix {
        &self.is
    }

    /// Max-norm of `P_sᵀ Ω P_{s+1} − (I | 0)`.
    pub fn orthogonality_residual(&self) -> f64 {
        let g = mat_mul(
            &mat_mul(&self.ps.transpose(), &self.omega).unwrap(),
            &self.ps1,
        )
        .unwrap();
        let target = Matrix::identity(self.s).pad_columns(1);
        g.max_abs_diff(&target).unwrap()
    }

    /// Max-norm of `I_s − P_{s+1} X̂_s`.
    pub fn antiderivative_residual(&self) -> f64 {
        let rhs = mat_mul(&self.ps1, &antiderivative_matrix(self.s)).unwrap();
        self.is.max_abs_diff(&rhs).unwrap()
    }
}

/// The `(s+1) × s` matrix `X̂_s` with `∫₀^c P_j = Σ_i (X̂_s)_ij P_i(c)`:
/// `1/2` in the corner, `ξ_j` below and `−ξ_j` above the diagonal.
pub fn antiderivative_matrix(s: usize) -> Matrix {
    let mut x = Matrix::zeros(s + 1, s);
    if s == 0 {
        return x;
    }
    x[(0, 0)] = 0.5;
    for j in 1..=s {
        // column j-1 gets ξ_j on the subdiagonal
        x[(j, j - 1)] = xi_coefficient(j);
        if j < s {
            x[(j - 1, j)] = -xi_coefficient(j);
        }
    }
    x
}

/// A `k`-stage collocation method on the nodes of `rule`:
/// `α_ij = ∫₀^τ_i ℓ_j` with `ℓ_j` the Lagrange polynomials of the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationTableau {
    rule: QuadratureRule,
    acal: Matrix,
}

fn lagrange(nodes: &[f64], j: usize, x: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(m, _)| m != j)
        .fold(1.0, |acc, (_, &tm)| acc * (x - tm) / (nodes[j] - tm))
}

/// Collocation tableau; each `α_ij` is integrated exactly with a Gauss
/// sub-rule of `⌈k/2⌉` points on `[0, τ_i]`.
pub fn build_collocation(rule: &QuadratureRule) -> Result<CollocationTableau> {
    let nodes = rule.nodes();
    let k = nodes.len();
    let sub = gauss_rule(k.div_ceil(2))?;
    let acal = Matrix::from_fn(k, k, |i, j| {
        sub.mapped(0.0, nodes[i])
            .map(|(x, w)| w * lagrange(nodes, j, x))
            .sum()
    });
    Ok(CollocationTableau {
        rule: rule.clone(),
        acal,
    })
}

impl CollocationTableau {
    pub fn k(&self) -> usize {
        self.rule.len()
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// The collocation matrix `𝒜`.
    pub fn acal(&self) -> &Matrix {
        &self.acal
    }

    pub fn b(&self) -> &[f64] {
        self.rule.weights()
    }

    pub fn c(&self) -> &[f64] {
        self.rule.nodes()
    }

    /// `max_i |Σ_j α_ij − τ_i|`.
    pub fn row_sum_residual(&self) -> f64 {
        (0..self.k())
            .map(|i| (self.acal.row(i).iter().sum::<f64>() - self.rule.nodes()[i]).abs())
            .fold(0.0, f64::max)
    }
}

/// `𝒜 P_s P_sᵀ Ω`, the collocation matrix filtered onto the degree-`s`
/// subspace. Fails if `𝒜 P_s` and `I_s` disagree by more than
/// [`FILTER_TOLERANCE`].
pub fn filter_collocation(col: &CollocationTableau, s: usize) -> Result<HbvmTableau> {
    let rule = &col.rule;
    let k = rule.len();
    check_degree(k, s, rule)?;
    let (ps, ps1, is) = basis_matrices(rule, s)?;
    let omega = Matrix::diagonal(rule.weights());
    let aps = mat_mul(&col.acal, &ps)?;
    let residual = aps.max_abs_diff(&is)?;
    if residual > FILTER_TOLERANCE {
        return Err(Error::Postcondition {
            what: "𝒜 P_s = I_s",
            residual,
        });
    }
    let projector = mat_mul(&mat_mul(&ps, &ps.transpose())?, &omega)?;
    let a = mat_mul(&col.acal, &projector)?;
    Ok(HbvmTableau {
        s,
        rule: rule.clone(),
        omega,
        ps,
        ps1,
        is,
        a,
    })
}

/// Column vector helper: `A · 1`.
pub fn row_sums(m: &Matrix) -> Vec<f64> {
    (0..m.rows()).map(|i| m.row(i).iter().sum()).collect()
}
