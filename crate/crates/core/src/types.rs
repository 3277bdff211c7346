//! Domain types and structural decompositions shared by the analysis modules.

use alloc::format;

use crate::error::{Error, Result};
use crate::linalg::{self, ensure_square, eigh, fro_norm, re, ComplexMatrix};

/// Relative tolerances used by rank, PSD and coercivity decisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Singular values above `rank_rtol * sigma_max` count towards the rank.
    pub rank_rtol: f64,
    /// Eigenvalues down to `-psd_rtol * ||M||` are accepted as zero.
    pub psd_rtol: f64,
    /// Strict positivity means `lambda_min > coercivity_rtol * max(1, scale)`.
    pub coercivity_rtol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            rank_rtol: 1e-10,
            psd_rtol: 1e-10,
            coercivity_rtol: 1e-8,
        }
    }
}

impl ToleranceConfig {
    pub fn new(rank_rtol: f64, psd_rtol: f64, coercivity_rtol: f64) -> Result<Self> {
        let t = Self {
            rank_rtol,
            psd_rtol,
            coercivity_rtol,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rank_rtol", self.rank_rtol),
            ("psd_rtol", self.psd_rtol),
            ("coercivity_rtol", self.coercivity_rtol),
        ] {
            if !(v > 0.0 && v <= 1e-3) {
                return Err(Error::InvalidArgument(format!(
                    "{name} must lie in (0, 1e-3], got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Threshold for strict positivity relative to `scale`.
    pub fn coercivity_threshold(&self, scale: f64) -> f64 {
        self.coercivity_rtol * scale.max(1.0)
    }
}

/// A semi-dissipative Hamiltonian DAE `E x' = (J - R) x`.
#[derive(Debug, Clone, PartialEq)]
pub struct DaeTriple {
    e: ComplexMatrix,
    j: ComplexMatrix,
    r: ComplexMatrix,
}

impl DaeTriple {
    /// Validates the structure: E and R Hermitian PSD, J skew-Hermitian.
    pub fn new(e: ComplexMatrix, j: ComplexMatrix, r: ComplexMatrix, tol: &ToleranceConfig) -> Result<Self> {
        let n = ensure_square(&e)?;
        for m in [&j, &r] {
            if m.shape() != (n, n) {
                return Err(Error::DimensionMismatch(format!(
                    "E is {n}x{n} but J or R is {}x{}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        check_hermitian_psd(&e, "E", tol)?;
        check_skew(&j, "J", tol)?;
        check_hermitian_psd(&r, "R", tol)?;
        Ok(Self { e, j, r })
    }

    /// The ODE case `E = I`.
    pub fn ode(j: ComplexMatrix, r: ComplexMatrix, tol: &ToleranceConfig) -> Result<Self> {
        let n = ensure_square(&j)?;
        Self::new(ComplexMatrix::identity(n, n), j, r, tol)
    }

    pub fn dim(&self) -> usize {
        self.e.nrows()
    }

    pub fn e(&self) -> &ComplexMatrix {
        &self.e
    }

    pub fn j(&self) -> &ComplexMatrix {
        &self.j
    }

    pub fn r(&self) -> &ComplexMatrix {
        &self.r
    }

    /// System matrix `A = J - R`.
    pub fn a(&self) -> ComplexMatrix {
        &self.j - &self.r
    }

    /// Congruence `(U E U^H, U J U^H, U R U^H)`; structure is preserved for
    /// unitary `U` up to rounding.
    pub fn congruence(&self, u: &ComplexMatrix) -> Self {
        let uh = u.adjoint();
        Self {
            e: u * &self.e * &uh,
            j: u * &self.j * &uh,
            r: u * &self.r * &uh,
        }
    }

    pub fn into_parts(self) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
        (self.e, self.j, self.r)
    }
}

/// `(M + M^H) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(m)?;
    Ok((m + m.adjoint()) * re(0.5))
}

/// `(M - M^H) / 2`.
pub fn skew_part(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    ensure_square(m)?;
    Ok((m - m.adjoint()) * re(0.5))
}

/// Checks `||M - M^H||_F <= psd_rtol ||M||_F`.
pub fn check_hermitian(m: &ComplexMatrix, name: &'static str, tol: &ToleranceConfig) -> Result<()> {
    ensure_square(m)?;
    if !linalg::is_finite(m) {
        return Err(Error::NonFinite(name));
    }
    let defect = fro_norm(&(m - m.adjoint()));
    if defect > tol.psd_rtol * fro_norm(m) {
        return Err(Error::NotHermitian { name, defect });
    }
    Ok(())
}

/// Checks `||M + M^H||_F <= psd_rtol ||M||_F`.
pub fn check_skew(m: &ComplexMatrix, name: &'static str, tol: &ToleranceConfig) -> Result<()> {
    ensure_square(m)?;
    if !linalg::is_finite(m) {
        return Err(Error::NonFinite(name));
    }
    let defect = fro_norm(&(m + m.adjoint()));
    if defect > tol.psd_rtol * fro_norm(m) {
        return Err(Error::NotSkewHermitian { name, defect });
    }
    Ok(())
}

/// Checks Hermitian and `lambda_min >= -psd_rtol ||M||_2`.
pub fn check_hermitian_psd(m: &ComplexMatrix, name: &'static str, tol: &ToleranceConfig) -> Result<()> {
    check_hermitian(m, name, tol)?;
    let eig = eigh(m);
    if let (Some(&lo), Some(&hi)) = (eig.values.first(), eig.values.last()) {
        let scale = lo.abs().max(hi.abs());
        if lo < -tol.psd_rtol * scale {
            return Err(Error::NotPsd { name, min_eig: lo });
        }
    }
    Ok(())
}

/// Unique Hermitian PSD square root. Eigenvalues within `psd_rtol ||M||` of
/// zero are set to zero before the root so rounding noise does not inflate
/// the numerical rank.
pub fn psd_sqrt(m: &ComplexMatrix, tol: &ToleranceConfig) -> Result<ComplexMatrix> {
    check_hermitian(m, "M", tol)?;
    let eig = eigh(m);
    let n = m.nrows();
    let scale = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if let Some(&lo) = eig.values.first() {
        if lo < -tol.psd_rtol * scale {
            return Err(Error::NotPsd { name: "M", min_eig: lo });
        }
    }
    let floor = tol.psd_rtol * scale;
    let mut out = ComplexMatrix::zeros(n, n);
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam <= floor {
            continue;
        }
        let v = eig.vectors.column(k);
        out += v * v.adjoint() * re(linalg::sqrt(lam));
    }
    Ok((&out + out.adjoint()) * re(0.5))
}

/// Number of singular values above `rank_rtol * sigma_max`.
pub fn numerical_rank(m: &ComplexMatrix, tol: &ToleranceConfig) -> usize {
    let s = linalg::singular_values(m);
    match s.first() {
        Some(&smax) if smax > 0.0 => s.iter().filter(|&&v| v > tol.rank_rtol * smax).count(),
        _ => 0,
    }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue_hermitian(m: &ComplexMatrix, tol: &ToleranceConfig) -> Result<f64> {
    check_hermitian(m, "M", tol)?;
    Ok(eigh(m).values.first().copied().unwrap_or(f64::INFINITY))
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn max_eigenvalue_hermitian(m: &ComplexMatrix, tol: &ToleranceConfig) -> Result<f64> {
    check_hermitian(m, "M", tol)?;
    Ok(eigh(m).values.last().copied().unwrap_or(f64::NEG_INFINITY))
}
