//! Dense kernels for the small matrices that appear in tableau work:
//! products, LU solves and the full real spectrum via Hessenberg reduction
//! followed by Francis double-shift QR.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative pivot threshold for [`lin_solve`].
pub const PIVOT_TOLERANCE: f64 = 1e-13;

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch {
                op: "Matrix::new",
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from equal-length rows.
    ///
    /// # Panics
    /// If the rows are ragged.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self {
            rows: rows.len(),
            cols,
            data,
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// First `n` columns.
    pub fn leading_columns(&self, n: usize) -> Self {
        assert!(n <= self.cols);
        Self::from_fn(self.rows, n, |i, j| self[(i, j)])
    }

    /// Appends `n` zero columns on the right.
    pub fn pad_columns(&self, n: usize) -> Self {
        Self::from_fn(self.rows, self.cols + n, |i, j| {
            if j < self.cols {
                self[(i, j)]
            } else {
                0.0
            }
        })
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                op: "mul_vec",
                expected: (self.cols, 1),
                found: (x.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Induced infinity norm (max row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Entrywise max-norm of `self - other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> Result<f64> {
        self.check_same_shape(other, "max_abs_diff")?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other, "sub")?;
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        mat_mul(self, other)
    }

    fn check_same_shape(&self, other: &Matrix, op: &'static str) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                op,
                expected: (self.rows, self.cols),
                found: (other.rows, other.cols),
            });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// An eigenvalue `re + i·im`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn abs(self) -> f64 {
        libm::hypot(self.re, self.im)
    }

    pub fn dist(self, other: Complex) -> f64 {
        libm::hypot(self.re - other.re, self.im - other.im)
    }
}

/// Ordering used for every reported spectrum: real part descending, then
/// imaginary part descending.
pub fn spectrum_order(a: &Complex, b: &Complex) -> Ordering {
    b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im))
}

/// Matrix product with row-by-row accumulation.
pub fn mat_mul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch {
            op: "mat_mul",
            expected: (a.cols, b.cols),
            found: (b.rows, b.cols),
        });
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for l in 0..a.cols {
            let ail = a[(i, l)];
            if ail == 0.0 {
                continue;
            }
            let brow = b.row(l);
            let orow = &mut out.data[i * b.cols..(i + 1) * b.cols];
            for (o, bl) in orow.iter_mut().zip(brow) {
                *o += ail * bl;
            }
        }
    }
    Ok(out)
}

/// LU factorization with partial pivoting, stored compactly.
struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    fn factor(a: &Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::DimensionMismatch {
                op: "lu",
                expected: (a.rows, a.rows),
                found: (a.rows, a.cols),
            });
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let threshold = PIVOT_TOLERANCE * a.max_abs();
        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, lu[i * n + k].abs()))
                    .fold(
                        (k, -1.0),
                        |best, cur| if cur.1 > best.1 { cur } else { best },
                    );
            if pmax < threshold || pmax == 0.0 {
                return Err(Error::SingularMatrix { pivot: pmax });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                if factor != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= factor * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm, sign })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            x[i] = row.iter().zip(&x[..i]).fold(x[i], |acc, (l, xj)| acc - l * xj);
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let acc = row.iter().zip(&x[i + 1..]).fold(x[i], |acc, (u, xj)| acc - u * xj);
            x[i] = acc / self.lu[i * n + i];
        }
        x
    }

    fn determinant(&self) -> f64 {
        (0..self.n).fold(self.sign, |d, i| d * self.lu[i * self.n + i])
    }
}

/// Solves `a·x = rhs` by LU with partial pivoting.
pub fn lin_solve(a: &Matrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != a.rows {
        return Err(Error::DimensionMismatch {
            op: "lin_solve",
            expected: (a.rows, 1),
            found: (rhs.len(), 1),
        });
    }
    Ok(Lu::factor(a)?.solve(rhs))
}

/// Determinant via LU; a singular matrix yields `0.0`.
pub fn determinant(a: &Matrix) -> Result<f64> {
    match Lu::factor(a) {
        Ok(lu) => Ok(lu.determinant()),
        Err(Error::SingularMatrix { .. }) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Largest matrix dimension accepted by [`eigenvalues`].
pub const MAX_EIGEN_DIM: usize = 64;

/// All eigenvalues of a square matrix, with multiplicity, sorted by
/// [`spectrum_order`].
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex>> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            op: "eigenvalues",
            expected: (a.rows, a.rows),
            found: (a.rows, a.cols),
        });
    }
    if a.rows > MAX_EIGEN_DIM {
        return Err(Error::Domain("eigenvalues: dimension above 64".into()));
    }
    let mut h = a.clone();
    hessenberg(&mut h);
    let mut eigs = hqr(&mut h)?;
    eigs.sort_by(spectrum_order);
    Ok(eigs)
}

/// In-place Householder reduction to upper Hessenberg form (similarity).
fn hessenberg(a: &mut Matrix) {
    let n = a.rows;
    if n < 3 {
        return;
    }
    let mut v = vec![0.0; n];
    for k in 0..n - 2 {
        let norm = libm::sqrt((k + 1..n).map(|i| a[(i, k)] * a[(i, k)]).sum::<f64>());
        if norm == 0.0 {
            continue;
        }
        let x0 = a[(k + 1, k)];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        for i in k + 1..n {
            v[i] = a[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm2: f64 = (k + 1..n).map(|i| v[i] * v[i]).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let beta = 2.0 / vnorm2;
        // left: rows k+1.., all columns from k
        for j in k..n {
            let dot: f64 = (k + 1..n).map(|i| v[i] * a[(i, j)]).sum();
            let f = beta * dot;
            for i in k + 1..n {
                a[(i, j)] -= f * v[i];
            }
        }
        // right: all rows, columns k+1..
        for i in 0..n {
            let dot: f64 = (k + 1..n).map(|j| a[(i, j)] * v[j]).sum();
            let f = beta * dot;
            for j in k + 1..n {
                a[(i, j)] -= f * v[j];
            }
        }
        for i in k + 2..n {
            a[(i, k)] = 0.0;
        }
    }
}

#[inline]
fn copysign(mag: f64, sign: f64) -> f64 {
    if sign >= 0.0 {
        mag.abs()
    } else {
        -mag.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).
fn hqr(a: &mut Matrix) -> Result<Vec<Complex>> {
    let n = a.rows;
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }
    let tiny = f64::EPSILON * f64::EPSILON * anorm;
    let budget = 100 * n;
    let mut total_its = 0usize;
    let mut its = 0usize;
    let mut t = 0.0;
    // `last` is the bottom row of the active block.
    let mut last = n as isize - 1;
    while last >= 0 {
        let e = last as usize;
        // look for a negligible subdiagonal element
        let mut l = e;
        while l >= 1 {
            let mut s = a[(l - 1, l - 1)].abs() + a[(l, l)].abs();
            if s == 0.0 {
                s = anorm;
            }
            let sub = a[(l, l - 1)].abs();
            if sub + s == s || sub <= tiny {
                a[(l, l - 1)] = 0.0;
                break;
            }
            l -= 1;
        }
        let mut x = a[(e, e)];
        if l == e {
            wr[e] = x + t;
            wi[e] = 0.0;
            last -= 1;
            its = 0;
            continue;
        }
        let mut y = a[(e - 1, e - 1)];
        let mut w = a[(e, e - 1)] * a[(e - 1, e)];
        if l == e - 1 {
            let p = 0.5 * (y - x);
            let q = p * p + w;
            let z = libm::sqrt(q.abs());
            x += t;
            if q >= 0.0 {
                let z = p + copysign(z, p);
                wr[e - 1] = x + z;
                wr[e] = if z != 0.0 { x - w / z } else { x + z };
                wi[e - 1] = 0.0;
                wi[e] = 0.0;
            } else {
                wr[e - 1] = x + p;
                wr[e] = x + p;
                wi[e - 1] = z;
                wi[e] = -z;
            }
            last -= 2;
            its = 0;
            continue;
        }
        if total_its >= budget {
            return Err(Error::EigenNoConvergence {
                iterations: total_its,
            });
        }
        if its > 0 && its.is_multiple_of(10) {
            // exceptional shift
            t += x;
            for i in 0..=e {
                a[(i, i)] -= x;
            }
            let s = a[(e, e - 1)].abs() + a[(e - 1, e - 2)].abs();
            x = 0.75 * s;
            y = x;
            w = -0.4375 * s * s;
        }
        its += 1;
        total_its += 1;

        // find two consecutive small subdiagonal elements
        let mut m = e - 2;
        let (mut p, mut q, mut r);
        loop {
            let z = a[(m, m)];
            let rr = x - z;
            let ss = y - z;
            p = (rr * ss - w) / a[(m + 1, m)] + a[(m, m + 1)];
            q = a[(m + 1, m + 1)] - z - rr - ss;
            r = a[(m + 2, m + 1)];
            let s = p.abs() + q.abs() + r.abs();
            p /= s;
            q /= s;
            r /= s;
            if m == l {
                break;
            }
            let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
            let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
            if u + v == v {
                break;
            }
            m -= 1;
        }
        for i in m + 2..=e {
            a[(i, i - 2)] = 0.0;
            if i != m + 2 {
                a[(i, i - 3)] = 0.0;
            }
        }
        // double QR step on rows l..=e, columns m..=e
        let mut xk = 0.0;
        for k in m..e {
            if k != m {
                p = a[(k, k - 1)];
                q = a[(k + 1, k - 1)];
                r = if k != e - 1 { a[(k + 2, k - 1)] } else { 0.0 };
                xk = p.abs() + q.abs() + r.abs();
                if xk != 0.0 {
                    p /= xk;
                    q /= xk;
                    r /= xk;
                }
            }
            let s = copysign(libm::sqrt(p * p + q * q + r * r), p);
            if s == 0.0 {
                continue;
            }
            if k == m {
                if l != m {
                    a[(k, k - 1)] = -a[(k, k - 1)];
                }
            } else {
                a[(k, k - 1)] = -s * xk;
            }
            p += s;
            let xx = p / s;
            let yy = q / s;
            let zz = r / s;
            q /= p;
            r /= p;
            for j in k..=e {
                let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                if k != e - 1 {
                    pp += r * a[(k + 2, j)];
                    a[(k + 2, j)] -= pp * zz;
                }
                a[(k + 1, j)] -= pp * yy;
                a[(k, j)] -= pp * xx;
            }
            let mmin = if e < k + 3 { e } else { k + 3 };
            for i in l..=mmin {
                let mut pp = xx * a[(i, k)] + yy * a[(i, k + 1)];
                if k != e - 1 {
                    pp += zz * a[(i, k + 2)];
                    a[(i, k + 2)] -= pp * r;
                }
                a[(i, k + 1)] -= pp * q;
                a[(i, k)] -= pp;
            }
        }
    }
    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Complex::new(re, im))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triple_loop(a: &Matrix, b: &Matrix) -> Matrix {
        let mut c = Matrix::zeros(a.rows(), b.cols());
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut acc = 0.0;
                for l in 0..a.cols() {
                    acc += a[(i, l)] * b[(l, j)];
                }
                c[(i, j)] = acc;
            }
        }
        c
    }

    // Small deterministic LCG so the fixtures below do not depend on a RNG crate.
    fn lcg_matrix(seed: u64, rows: usize, cols: usize) -> Matrix {
        let mut state = seed;
        Matrix::from_fn(rows, cols, |_, _| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn identity_product() {
        let m = lcg_matrix(1, 3, 3);
        assert_eq!(mat_mul(&Matrix::identity(3), &m).unwrap(), m);
    }

    #[test]
    fn scalar_product() {
        let c = mat_mul(&Matrix::from_rows(&[[2.0]]), &Matrix::from_rows(&[[3.0]])).unwrap();
        assert_eq!(c[(0, 0)], 6.0);
    }

    #[test]
    fn product_matches_triple_loop() {
        let a = lcg_matrix(7, 4, 4);
        let b = lcg_matrix(11, 4, 4);
        let c = mat_mul(&a, &b).unwrap();
        assert!(c.max_abs_diff(&triple_loop(&a, &b)).unwrap() <= 1e-15);
    }

    #[test]
    fn product_dimension_mismatch() {
        let err = mat_mul(&Matrix::zeros(2, 3), &Matrix::zeros(2, 3)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn new_rejects_bad_input() {
        assert!(Matrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(Matrix::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn solve_identity_and_diagonal() {
        assert_eq!(
            lin_solve(&Matrix::identity(2), &[3.0, 4.0]).unwrap(),
            [3.0, 4.0]
        );
        let d = Matrix::from_rows(&[[2.0, 0.0], [0.0, 4.0]]);
        assert_eq!(lin_solve(&d, &[2.0, 8.0]).unwrap(), [1.0, 2.0]);
    }

    #[test]
    fn solve_residual_random() {
        let mut a = lcg_matrix(3, 5, 5);
        for i in 0..5 {
            a[(i, i)] += 5.0;
        }
        let rhs = [1.0, -2.0, 0.5, 3.0, -1.0];
        let x = lin_solve(&a, &rhs).unwrap();
        let ax = a.mul_vec(&x).unwrap();
        let res = ax
            .iter()
            .zip(&rhs)
            .fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        assert!(res <= 1e-10 * (1.0 + 3.0));
    }

    #[test]
    fn solve_singular() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        assert!(matches!(
            lin_solve(&a, &[1.0, 1.0]),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn eig_scalar() {
        let e = eigenvalues(&Matrix::from_rows(&[[0.5]])).unwrap();
        assert_eq!(e, [Complex::new(0.5, 0.0)]);
    }

    #[test]
    fn eig_gauss4_like_pair() {
        let xi = 1.0 / (2.0 * 3f64.sqrt());
        let e = eigenvalues(&Matrix::from_rows(&[[0.5, -xi], [xi, 0.0]])).unwrap();
        // λ² − λ/2 + 1/12 = 0
        let im = (1.0f64 / 12.0 - 1.0 / 16.0).sqrt();
        assert!((e[0].re - 0.25).abs() < 1e-15 && (e[0].im - im).abs() < 1e-15);
        assert!((e[1].re - 0.25).abs() < 1e-15 && (e[1].im + im).abs() < 1e-15);
    }

    #[test]
    fn eig_upper_triangular() {
        let mut a = lcg_matrix(5, 4, 4);
        for i in 0..4 {
            for j in 0..i {
                a[(i, j)] = 0.0;
            }
        }
        let mut diag: Vec<f64> = (0..4).map(|i| a[(i, i)]).collect();
        diag.sort_by(|x, y| y.total_cmp(x));
        let e = eigenvalues(&a).unwrap();
        for (ev, d) in e.iter().zip(&diag) {
            assert!((ev.re - d).abs() < 1e-14 && ev.im == 0.0);
        }
    }

    #[test]
    fn eig_rotation_and_companion() {
        let e = eigenvalues(&Matrix::from_rows(&[[0.0, -1.0], [1.0, 0.0]])).unwrap();
        assert_eq!(e, [Complex::new(0.0, 1.0), Complex::new(0.0, -1.0)]);
        // companion of (x-1)(x-2)(x-3)(x-4)
        let c = Matrix::from_rows(&[
            [10.0, -35.0, 50.0, -24.0],
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
        ]);
        let e = eigenvalues(&c).unwrap();
        for (ev, want) in e.iter().zip([4.0, 3.0, 2.0, 1.0]) {
            assert!((ev.re - want).abs() < 1e-11, "{ev:?}");
            assert!(ev.im.abs() < 1e-11);
        }
    }

    #[test]
    fn eig_zero_matrix_and_empty() {
        assert!(eigenvalues(&Matrix::zeros(0, 0)).unwrap().is_empty());
        let e = eigenvalues(&Matrix::zeros(5, 5)).unwrap();
        assert!(e.iter().all(|z| z.abs() == 0.0));
    }

    fn char_poly_residual(a: &Matrix, lambda: Complex) -> f64 {
        use num_complex::Complex64;
        let n = a.rows();
        let mut m: Vec<Complex64> = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                let d = if i == j {
                    Complex64::new(lambda.re, lambda.im)
                } else {
                    0.0.into()
                };
                Complex64::new(a[(i, j)], 0.0) - d
            })
            .collect();
        let mut det = Complex64::new(1.0, 0.0);
        for k in 0..n {
            let p = (k..n)
                .max_by(|&x, &y| m[x * n + k].norm().total_cmp(&m[y * n + k].norm()))
                .unwrap();
            if m[p * n + k].norm() == 0.0 {
                return 0.0;
            }
            if p != k {
                for j in 0..n {
                    m.swap(k * n + j, p * n + j);
                }
                det = -det;
            }
            det *= m[k * n + k];
            for i in k + 1..n {
                let f = m[i * n + k] / m[k * n + k];
                for j in k..n {
                    let t = m[k * n + j];
                    m[i * n + j] -= f * t;
                }
            }
        }
        det.norm() / (1.0 + a.norm_inf()).powi(n as i32)
    }

    fn arb_matrix(n: usize) -> impl Strategy<Value = Matrix> {
        proptest::collection::vec(-1.0f64..1.0, n * n)
            .prop_map(move |d| Matrix::new(n, n, d).unwrap())
    }

    proptest! {
        #[test]
        fn eigenvalues_are_char_poly_roots(a in (1usize..=8).prop_flat_map(arb_matrix)) {
            for lambda in eigenvalues(&a).unwrap() {
                prop_assert!(char_poly_residual(&a, lambda) <= 1e-8);
            }
        }

        #[test]
        fn solve_round_trips(a in arb_matrix(5), rhs in proptest::collection::vec(-2.0f64..2.0, 5)) {
            let mut a = a;
            for i in 0..5 { a[(i, i)] += 6.0; }
            let x = lin_solve(&a, &rhs).unwrap();
            let back = a.mul_vec(&x).unwrap();
            let rnorm = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (u, v) in back.iter().zip(&rhs) {
                prop_assert!((u - v).abs() <= 1e-10 * (1.0 + rnorm));
            }
        }

        #[test]
        fn spectrum_permutation_invariant(
            a in arb_matrix(6),
            perm in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(),
        ) {
            let pap = Matrix::from_fn(6, 6, |i, j| a[(perm[i], perm[j])]);
            let e1 = eigenvalues(&a).unwrap();
            let e2 = eigenvalues(&pap).unwrap();
            for (x, y) in e1.iter().zip(&e2) {
                prop_assert!(x.dist(*y) <= 1e-10, "{:?} vs {:?}", e1, e2);
            }
        }
    }
}
