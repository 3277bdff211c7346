//! Dense complex linear-algebra helpers built on nalgebra.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub fn ensure_square(m: &ComplexMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(m.nrows())
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Frobenius norm.
pub fn fro_norm(m: &ComplexMatrix) -> f64 {
    sqrt(m.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// Largest singular value; zero for empty matrices.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Singular values in descending order.
pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Maximum absolute column sum.
pub fn norm_1(m: &ComplexMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Eigen-decomposition of the Hermitian symmetrization of a square matrix,
/// eigenvalues ascending, eigenvectors as matching columns.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

pub fn eigh(m: &ComplexMatrix) -> HermitianEigen {
    let n = m.nrows();
    if n == 0 {
        return HermitianEigen {
            values: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        };
    }
    let h = (m + m.adjoint()) * re(0.5);
    let se = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &se.eigenvectors.column(src));
    }
    HermitianEigen { values, vectors }
}

/// Eigenvalues of a general square matrix via complex Schur form.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<C64>> {
    let n = ensure_square(m)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 10_000 + 100 * n)
        .ok_or(Error::EigenFailure)?;
    let (_, t) = schur.unpack();
    Ok((0..n).map(|i| t[(i, i)]).collect())
}

/// Orthonormal basis (columns) of the null space: right singular vectors
/// whose singular value does not exceed `threshold`.
pub fn null_space(m: &ComplexMatrix, threshold: f64) -> ComplexMatrix {
    let (r, c) = m.shape();
    if c == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    if r == 0 {
        return ComplexMatrix::identity(c, c);
    }
    let padded = if r < c {
        m.clone().resize_vertically(c, ZERO)
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors requested");
    let rank = svd.singular_values.iter().filter(|&&s| s > threshold).count();
    let mut idx: Vec<usize> = (0..c).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut out = ComplexMatrix::zeros(c, c - rank);
    for (dst, &src) in idx[rank..].iter().enumerate() {
        out.set_column(dst, &vt.row(src).adjoint());
    }
    out
}

/// Orthonormal basis (columns) of the column space: left singular vectors
/// whose singular value exceeds `threshold`.
pub fn range_basis(m: &ComplexMatrix, threshold: f64) -> ComplexMatrix {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return ComplexMatrix::zeros(r, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let rank = idx.iter().filter(|&&i| svd.singular_values[i] > threshold).count();
    let mut out = ComplexMatrix::zeros(r, rank);
    for (dst, &src) in idx[..rank].iter().enumerate() {
        out.set_column(dst, &u.column(src));
    }
    out
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns of `q` (an `n x k` matrix).
pub fn orthonormal_complement(q: &ComplexMatrix) -> ComplexMatrix {
    let n = q.nrows();
    if q.ncols() == 0 {
        return ComplexMatrix::identity(n, n);
    }
    null_space(&q.adjoint(), 0.5)
}

pub fn inverse(m: &ComplexMatrix) -> Option<ComplexMatrix> {
    if m.nrows() != m.ncols() {
        return None;
    }
    if m.nrows() == 0 {
        return Some(ComplexMatrix::zeros(0, 0));
    }
    m.clone().lu().try_inverse()
}

/// Solves `a x = b` by LU with partial pivoting.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Option<ComplexMatrix> {
    if a.nrows() == 0 {
        return Some(ComplexMatrix::zeros(0, b.ncols()));
    }
    a.clone().lu().solve(b)
}

/// Ratio of extreme singular values; infinite for singular matrices.
pub fn condition_number(m: &ComplexMatrix) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

pub fn block(m: &ComplexMatrix, r0: usize, nr: usize, c0: usize, nc: usize) -> ComplexMatrix {
    m.view((r0, c0), (nr, nc)).into_owned()
}

pub fn block_diag(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = ComplexMatrix::zeros(rows, cols);
    let (mut r, mut c) = (0, 0);
    for b in blocks {
        out.view_mut((r, c), b.shape()).copy_from(b);
        r += b.nrows();
        c += b.ncols();
    }
    out
}

pub fn vstack(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let cols = blocks.first().map(|b| b.ncols()).unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = ComplexMatrix::zeros(rows, cols);
    let mut r = 0;
    for b in blocks {
        out.view_mut((r, 0), b.shape()).copy_from(b);
        r += b.nrows();
    }
    out
}

pub fn hstack(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let rows = blocks.first().map(|b| b.nrows()).unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = ComplexMatrix::zeros(rows, cols);
    let mut c = 0;
    for b in blocks {
        out.view_mut((0, c), b.shape()).copy_from(b);
        c += b.ncols();
    }
    out
}

pub fn diag_real(d: &[f64]) -> ComplexMatrix {
    let n = d.len();
    ComplexMatrix::from_fn(n, n, |i, j| if i == j { re(d[i]) } else { ZERO })
}

pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let r = rows.len();
    let c = rows.first().map(|x| x.len()).unwrap_or(0);
    ComplexMatrix::from_fn(r, c, |i, j| re(rows[i][j]))
}

/// Matrix exponential by scaling and squaring with the degree-13 Pade
/// approximant.
pub fn expm(a: &ComplexMatrix) -> ComplexMatrix {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371920351148152;
    let n = a.nrows();
    if n == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    let nrm = norm_1(a);
    let s = if nrm > THETA_13 {
        libm::ceil(libm::log2(nrm / THETA_13)) as i32
    } else {
        0
    };
    let a = a * re(libm::pow(2.0, -(s as f64)));
    let id = ComplexMatrix::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let u_inner = &a6 * (&a6 * re(B[13]) + &a4 * re(B[11]) + &a2 * re(B[9]))
        + &a6 * re(B[7])
        + &a4 * re(B[5])
        + &a2 * re(B[3])
        + &id * re(B[1]);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * re(B[12]) + &a4 * re(B[10]) + &a2 * re(B[8]))
        + &a6 * re(B[6])
        + &a4 * re(B[4])
        + &a2 * re(B[2])
        + &id * re(B[0]);
    let mut r = solve(&(&v - &u), &(&v + &u)).expect("Pade denominator is nonsingular");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let mut z = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x.push(z);
        w.push(2.0 / ((1.0 - z * z) * dp * dp));
    }
    (x, w)
}

/// Least-squares line `y = intercept + slope * x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_diagonal() {
        let a = diag_real(&[-1.0, 0.5, 20.0]);
        let e = expm(&a);
        for (i, v) in [-1.0f64, 0.5, 20.0].iter().enumerate() {
            let want = v.exp();
            assert!((e[(i, i)].re - want).abs() <= 1e-13 * want);
        }
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t = 2.3;
        let a = from_real_rows(&[&[0.0, -t], &[t, 0.0]]);
        let e = expm(&a);
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-14);
        assert!((e[(1, 0)].re - t.sin()).abs() < 1e-14);
    }

    #[test]
    fn expm_of_nilpotent_is_polynomial() {
        let a = from_real_rows(&[&[0.0, 3.0, 0.0], &[0.0, 0.0, 2.0], &[0.0, 0.0, 0.0]]);
        let e = expm(&a);
        let want = from_real_rows(&[&[1.0, 3.0, 3.0], &[0.0, 1.0, 2.0], &[0.0, 0.0, 1.0]]);
        assert!(fro_norm(&(e - want)) < 1e-14);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let integral: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(14)).sum();
        assert!((integral - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = from_real_rows(&[&[1.0, 0.0, 0.0]]);
        let ns = null_space(&m, 1e-12);
        assert_eq!(ns.ncols(), 2);
        assert!(fro_norm(&(&m * &ns)) < 1e-14);
        let q = orthonormal_complement(&ns);
        assert_eq!(q.ncols(), 1);
        assert!((q[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_rotation() {
        let a = from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]]);
        let mut ev = eigenvalues(&a).unwrap();
        ev.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((ev[0] - c64(0.0, -1.0)).norm() < 1e-14);
        assert!((ev[1] - c64(0.0, 1.0)).norm() < 1e-14);
    }
}
