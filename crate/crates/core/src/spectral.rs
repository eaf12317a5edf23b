//! Isospectral property of HBVM tableaux.
//!
//! The columns of `P_{s+1}` span an invariant subspace of `A`:
//! `A P_{s+1} = P_{s+1} X̃_s`, where `X̃_s` is `X_s` bordered by the row
//! `(0 … 0 ξ_s)` and a zero column. Hence the nonzero spectrum of `A` is that
//! of `X_s`, the matrix whose eigenvalues are those of the Gauss-Legendre
//! method of order `2s`, whatever `k ≥ s` and whatever nodes are used.
//!
//! [`subspace_residual`] checks the identity directly. [`isospectral_report`]
//! additionally compares eigenvalues.

use alloc::vec::Vec;

use crate::error::Result;
use crate::legendre::xi_coefficient;
use crate::linalg::{eigenvalues, mat_mul, spectrum_order, Complex, Matrix};
use crate::tableau::HbvmTableau;

/// Magnitude below which an eigenvalue of `A` counts as zero.
pub const ZERO_EIGEN_THRESHOLD: f64 = 1e-10;
/// Tolerance for pairing the nonzero eigenvalues of `A` with those of `X_s`.
pub const EIGEN_MATCH_TOLERANCE: f64 = 1e-10;
/// Minimum ratio `|λ_s| / |λ_{s+1}|` between the smallest kept and the
/// largest discarded eigenvalue.
pub const MIN_SPECTRAL_GAP: f64 = 1e4;

/// The `s × s` tridiagonal matrix with `1/2` in the corner, `ξ_j` on the
/// subdiagonal and `−ξ_j` on the superdiagonal.
pub fn build_xs(s: usize) -> Matrix {
    let mut x = Matrix::zeros(s, s);
    if s == 0 {
        return x;
    }
    x[(0, 0)] = 0.5;
    for j in 1..s {
        let xi = xi_coefficient(j);
        x[(j, j - 1)] = xi;
        x[(j - 1, j)] = -xi;
    }
    x
}

/// `(s+1) × (s+1)`: `X_s`, bordered below by `(0 … 0 ξ_s)` and on the right
/// by zeros.
pub fn build_x_tilde(s: usize) -> Matrix {
    let xs = build_xs(s);
    let mut x = Matrix::zeros(s + 1, s + 1);
    for i in 0..s {
        for j in 0..s {
            x[(i, j)] = xs[(i, j)];
        }
    }
    if s > 0 {
        x[(s, s - 1)] = xi_coefficient(s);
    }
    x
}

/// Max-norm of `A P_{s+1} − P_{s+1} X̃_s`.
pub fn subspace_residual(t: &HbvmTableau) -> f64 {
    let lhs = mat_mul(t.a(), t.ps1()).expect("A is k×k, P_{s+1} is k×(s+1)");
    let rhs = mat_mul(t.ps1(), &build_x_tilde(t.s())).expect("shapes agree");
    lhs.max_abs_diff(&rhs).expect("shapes agree")
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub k: usize,
    pub s: usize,
    pub subspace_residual: f64,
    /// The `s` largest-magnitude eigenvalues of `A`, in spectrum order.
    pub nonzero_eigs_a: Vec<Complex>,
    /// Eigenvalues of `X_s`, in spectrum order.
    pub eigs_xs: Vec<Complex>,
    /// Largest magnitude among the remaining `k − s` eigenvalues of `A`
    /// (`0` when `k = s`).
    pub zero_tail_max: f64,
    /// Largest pairwise distance between `nonzero_eigs_a` and `eigs_xs`.
    pub max_eig_mismatch: f64,
    /// `|λ_s| / |λ_{s+1}|` with eigenvalues sorted by magnitude; `None` when
    /// `k = s`.
    pub gap_ratio: Option<f64>,
    pub matched: bool,
}

impl SpectralReport {
    /// Whether the magnitude gap separating kept and discarded eigenvalues is
    /// wide enough to trust the zero/nonzero split.
    pub fn gap_ok(&self) -> bool {
        self.gap_ratio.is_none_or(|g| g > MIN_SPECTRAL_GAP)
    }
}

/// Compares the spectrum of `A` with that of `X_s`.
pub fn isospectral_report(t: &HbvmTableau) -> Result<SpectralReport> {
    let (k, s) = (t.k(), t.s());
    let mut eigs_a = eigenvalues(t.a())?;
    let mut eigs_xs = eigenvalues(&build_xs(s))?;
    eigs_a.sort_by(|x, y| y.abs().total_cmp(&x.abs()));
    let tail = eigs_a.split_off(s);
    let zero_tail_max = tail.iter().map(|z| z.abs()).fold(0.0, f64::max);
    let gap_ratio = tail.first().map(|z| {
        let kept = eigs_a.last().map_or(0.0, |z| z.abs());
        if z.abs() == 0.0 {
            f64::INFINITY
        } else {
            kept / z.abs()
        }
    });
    eigs_a.sort_by(spectrum_order);
    eigs_xs.sort_by(spectrum_order);
    let max_eig_mismatch = eigs_a
        .iter()
        .zip(&eigs_xs)
        .map(|(x, y)| x.dist(*y))
        .fold(0.0, f64::max);
    let matched =
        max_eig_mismatch <= EIGEN_MATCH_TOLERANCE && zero_tail_max <= ZERO_EIGEN_THRESHOLD;
    Ok(SpectralReport {
        k,
        s,
        subspace_residual: subspace_residual(t),
        nonzero_eigs_a: eigs_a,
        eigs_xs,
        zero_tail_max,
        max_eig_mismatch,
        gap_ratio,
        matched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss_rule, NodeKind, QuadratureRule};
    use crate::tableau::build_hbvm;

    #[test]
    fn xs_small() {
        assert_eq!(build_xs(1).as_slice(), [0.5]);
        let xi = 1.0 / (2.0 * libm::sqrt(3.0));
        let x2 = build_xs(2);
        assert!((x2[(0, 1)] + xi).abs() < 1e-16);
        assert!((x2[(1, 0)] - xi).abs() < 1e-16);
        assert_eq!(x2[(1, 1)], 0.0);
    }

    #[test]
    fn xs_matches_gauss4_spectrum() {
        let g = HbvmTableau::gauss(2, 2).unwrap();
        let e1 = eigenvalues(g.a()).unwrap();
        let e2 = eigenvalues(&build_xs(2)).unwrap();
        for (a, b) in e1.iter().zip(&e2) {
            assert!(a.dist(*b) <= 1e-12);
        }
    }

    #[test]
    fn residual_gauss_and_lobatto() {
        for s in 1..=3 {
            assert!(subspace_residual(&HbvmTableau::gauss(s, s).unwrap()) <= 1e-13);
        }
        assert!(subspace_residual(&HbvmTableau::gauss(6, 2).unwrap()) <= 1e-13);
        assert!(subspace_residual(&HbvmTableau::lobatto(6, 2).unwrap()) <= 1e-13);
    }

    #[test]
    fn reports() {
        let r = isospectral_report(&HbvmTableau::gauss(2, 2).unwrap()).unwrap();
        assert!(r.matched);
        assert_eq!(r.zero_tail_max, 0.0);
        assert_eq!(r.gap_ratio, None);

        let r = isospectral_report(&HbvmTableau::gauss(5, 2).unwrap()).unwrap();
        assert!(r.matched, "{r:?}");
        assert_eq!(r.nonzero_eigs_a.len(), 2);
        assert!(r.gap_ok());

        let t = HbvmTableau::lobatto(8, 3).unwrap();
        assert!(subspace_residual(&t) <= 1e-12);
        assert!(isospectral_report(&t).unwrap().matched);
    }

    #[test]
    fn grid() {
        for kind in [NodeKind::Gauss, NodeKind::Lobatto] {
            for s in 1..=4 {
                for k in s..=12 {
                    let Ok(t) = HbvmTableau::new(kind, k, s) else {
                        continue;
                    };
                    let r = isospectral_report(&t).unwrap();
                    assert!(r.subspace_residual <= 1e-12, "{kind} ({k},{s})");
                    assert!(r.matched && r.gap_ok(), "{kind} ({k},{s}) {r:?}");
                }
            }
        }
    }

    #[test]
    fn xs_right_half_plane() {
        for s in 1..=4 {
            assert!(eigenvalues(&build_xs(s))
                .unwrap()
                .iter()
                .all(|z| z.re > 0.0));
        }
    }

    #[test]
    fn corrupted_weights_break_the_identity() {
        let g = gauss_rule(4).unwrap();
        let mut w = g.weights().to_vec();
        w[0] += 0.05;
        w[3] -= 0.05;
        // claim an exactness the weights no longer have
        let bad = QuadratureRule::from_parts(NodeKind::Gauss, g.nodes().to_vec(), w, 7).unwrap();
        let t = build_hbvm(4, 2, &bad).unwrap();
        assert!(subspace_residual(&t) > 1e-6);
        assert!(!isospectral_report(&t).unwrap().matched);
    }
}
