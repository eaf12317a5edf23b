//! Shifted Legendre polynomials on `[0, 1]` and the orthonormal basis
//! `P_j(t) = √(2j−1) · P̂_{j−1}(t)`, `j ≥ 1`.
//!
//! Everything is evaluated with the three-term recurrence; antiderivatives
//! use `(2n+1) P̂_n = (P̂_{n+1} − P̂_{n−1})' / 2`, so no quadrature is involved.

use crate::error::{Error, Result};

fn check_unit(name: &str, t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Domain(alloc::format!(
            "{name} = {t} lies outside [0, 1]"
        )));
    }
    Ok(())
}

fn check_index(j: usize) -> Result<()> {
    if j == 0 {
        return Err(Error::Domain("basis index must be at least 1".into()));
    }
    Ok(())
}

/// `(P̂_{n−1}(t), P̂_n(t), P̂_{n+1}(t))` for `n ≥ 0`, with `P̂_{−1} := 0`.
///
/// No domain check; callers validate `t`.
fn shifted_triple(n: usize, t: f64) -> (f64, f64, f64) {
    let x = 2.0 * t - 1.0;
    let (mut prev, mut cur) = (0.0, 1.0);
    // advance so that cur = P_n
    for i in 0..n {
        let next = ((2 * i + 1) as f64 * x * cur - i as f64 * prev) / (i + 1) as f64;
        prev = cur;
        cur = next;
    }
    let next = ((2 * n + 1) as f64 * x * cur - n as f64 * prev) / (n + 1) as f64;
    (prev, cur, next)
}

/// Shifted Legendre polynomial `P̂_n(t) = P_n(2t − 1)`.
pub fn shifted_legendre(n: usize, t: f64) -> f64 {
    shifted_triple(n, t).1
}

/// Derivative of the classical Legendre polynomial `P_n` at `x ∈ [−1, 1]`,
/// returned with `P_n(x)` itself.
pub(crate) fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut prev, mut cur) = (0.0, 1.0);
    for i in 0..n {
        let next = ((2 * i + 1) as f64 * x * cur - i as f64 * prev) / (i + 1) as f64;
        prev = cur;
        cur = next;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = if (1.0 - x * x).abs() < 1e-300 {
        // P_n'(±1) = (±1)^{n+1} n(n+1)/2
        let v = (n * (n + 1)) as f64 / 2.0;
        if x > 0.0 || n % 2 == 1 {
            v
        } else {
            -v
        }
    } else {
        n as f64 * (prev - x * cur) / (1.0 - x * x)
    };
    (cur, d)
}

/// Orthonormal basis polynomial `P_j(t)` on `[0, 1]`, `j ≥ 1`.
pub fn eval_basis(j: usize, t: f64) -> Result<f64> {
    check_index(j)?;
    check_unit("t", t)?;
    Ok(libm::sqrt((2 * j - 1) as f64) * shifted_legendre(j - 1, t))
}

/// Exact `∫₀^c P_j(x) dx`.
pub fn eval_antiderivative(j: usize, c: f64) -> Result<f64> {
    check_index(j)?;
    check_unit("c", c)?;
    let n = j - 1;
    let raw = if n == 0 {
        c
    } else {
        let (prev, _, next) = shifted_triple(n, c);
        (next - prev) / (2 * (2 * n + 1)) as f64
    };
    Ok(libm::sqrt((2 * j - 1) as f64) * raw)
}

/// `ξ_j = 1 / (2√((2j+1)(2j−1)))`, the off-diagonal entries of the
/// Gauss-Legendre spectrum matrix.
pub fn xi_coefficient(j: usize) -> f64 {
    debug_assert!(j >= 1);
    let j = j as f64;
    0.5 / libm::sqrt((2.0 * j + 1.0) * (2.0 * j - 1.0))
}

/// Handle on the first `size` orthonormal polynomials `P_1..P_size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrthonormalBasis {
    size: usize,
}

impl OrthonormalBasis {
    pub fn new(size: usize) -> Result<Self> {
        check_index(size)?;
        Ok(Self { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `P_j(t)` for `j = 1..=size`, written to `out[j−1]`.
    pub fn eval_all(&self, t: f64, out: &mut [f64]) -> Result<()> {
        check_unit("t", t)?;
        let x = 2.0 * t - 1.0;
        let (mut prev, mut cur) = (0.0, 1.0);
        for (i, o) in out.iter_mut().take(self.size).enumerate() {
            *o = libm::sqrt((2 * i + 1) as f64) * cur;
            let next = ((2 * i + 1) as f64 * x * cur - i as f64 * prev) / (i + 1) as f64;
            prev = cur;
            cur = next;
        }
        Ok(())
    }

    pub fn eval(&self, j: usize, t: f64) -> Result<f64> {
        if j > self.size {
            return Err(Error::Domain(alloc::format!(
                "basis index {j} exceeds basis size {}",
                self.size
            )));
        }
        eval_basis(j, t)
    }

    pub fn antiderivative(&self, j: usize, c: f64) -> Result<f64> {
        if j > self.size {
            return Err(Error::Domain(alloc::format!(
                "basis index {j} exceeds basis size {}",
                self.size
            )));
        }
        eval_antiderivative(j, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    #[test]
    fn first_basis_is_one() {
        for t in [0.0, 0.3, 1.0] {
            assert_eq!(eval_basis(1, t).unwrap(), 1.0);
        }
    }

    #[test]
    fn basis_values() {
        assert!((eval_basis(2, 1.0).unwrap() - SQRT3).abs() < 1e-15);
        let want = -libm::sqrt(5.0) / 2.0;
        assert!((eval_basis(3, 0.5).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(eval_basis(1, 1.5).is_err());
        assert!(eval_basis(2, -0.1).is_err());
        assert!(eval_basis(0, 0.5).is_err());
        assert!(eval_antiderivative(2, 1.01).is_err());
    }

    #[test]
    fn antiderivative_closed_forms() {
        for c in [0.0, 0.25, 0.7, 1.0] {
            assert!((eval_antiderivative(1, c).unwrap() - c).abs() < 1e-16);
            let want = SQRT3 * (c * c - c);
            assert!((eval_antiderivative(2, c).unwrap() - want).abs() < 1e-15);
        }
        for j in 2..=20 {
            assert!(eval_antiderivative(j, 1.0).unwrap().abs() < 1e-13, "j={j}");
        }
    }

    #[test]
    fn xi_values() {
        assert!((xi_coefficient(1) - 0.288_675_134_594_812_9).abs() < 1e-15);
        assert!((xi_coefficient(2) - 0.129_099_444_873_580_56).abs() < 1e-15);
        assert!((xi_coefficient(3) - 1.0 / (2.0 * libm::sqrt(35.0))).abs() < 1e-16);
    }

    // Composite high-order Simpson: independent of the Gauss constructor.
    fn simpson(f: impl Fn(f64) -> f64, n: usize) -> f64 {
        let h = 1.0 / n as f64;
        let mut acc = f(0.0) + f(1.0);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn orthonormal_by_simpson() {
        for i in 1..=6 {
            for j in 1..=6 {
                let v = simpson(
                    |t| eval_basis(i, t).unwrap() * eval_basis(j, t).unwrap(),
                    20000,
                );
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-11, "({i},{j}) -> {v}");
            }
        }
    }

    #[test]
    fn eval_all_matches_pointwise() {
        let b = OrthonormalBasis::new(9).unwrap();
        let mut out = [0.0; 9];
        b.eval_all(0.37, &mut out).unwrap();
        for (j, v) in out.iter().enumerate() {
            assert!((v - eval_basis(j + 1, 0.37).unwrap()).abs() < 1e-14);
        }
        assert!(b.eval(10, 0.5).is_err());
    }

    #[test]
    fn antiderivative_has_degree_j() {
        // (j+1)-th finite difference on a uniform grid vanishes for a degree-j polynomial,
        // the j-th does not.
        for j in 1..=6usize {
            let pts: std::vec::Vec<f64> = (0..=j + 1)
                .map(|i| eval_antiderivative(j, i as f64 / (j + 1) as f64).unwrap())
                .collect();
            let mut diffs = pts.clone();
            for _ in 0..j {
                diffs = diffs.windows(2).map(|w| w[1] - w[0]).collect();
            }
            assert!(diffs[0].abs() > 1e-6, "degree below {j}");
            let last = diffs[1] - diffs[0];
            assert!(last.abs() < 1e-10, "degree above {j}");
        }
    }

    #[test]
    fn derivative_endpoints() {
        for n in 1..8 {
            let (_, d1) = legendre_with_derivative(n, 1.0);
            let (_, dm1) = legendre_with_derivative(n, -1.0);
            let v = (n * (n + 1)) as f64 / 2.0;
            assert!((d1 - v).abs() < 1e-12);
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            assert!((dm1 - sign * v).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn antiderivative_differentiates_to_basis(j in 1usize..=12, c in 0.01f64..0.99) {
            let d = 1e-5;
            let fd = (eval_antiderivative(j, c + d).unwrap() - eval_antiderivative(j, c - d).unwrap())
                / (2.0 * d);
            prop_assert!((fd - eval_basis(j, c).unwrap()).abs() < 1e-6);
        }
    }
}
