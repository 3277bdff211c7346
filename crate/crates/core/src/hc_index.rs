//! Hypocoercivity index of `x' = -C x`, `C = R - J`, and the short-time
//! decay exponent of its propagator.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, expm, re, spectral_norm, ComplexMatrix};
use crate::types::{check_hermitian_psd, check_skew, hermitian_part, numerical_rank, psd_sqrt, ToleranceConfig};

/// Which of the three equivalent conditions reached the reported index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MethodAgreement {
    pub sum: bool,
    pub kalman: bool,
    pub kernel: bool,
}

impl MethodAgreement {
    pub fn all(&self) -> bool {
        self.sum && self.kalman && self.kernel
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HcIndexReport {
    /// Smallest admissible `m`; `None` if none exists up to `m_max`.
    pub m_hc: Option<usize>,
    /// `lambda_min(T_m)` at the reported index, or at `m_max` if absent.
    pub kappa: f64,
    pub method_agreement: MethodAgreement,
    pub m_max: usize,
}

fn check_pair(j: &ComplexMatrix, r: &ComplexMatrix, tol: &ToleranceConfig) -> Result<usize> {
    check_skew(j, "J", tol)?;
    check_hermitian_psd(r, "R", tol)?;
    if j.shape() != r.shape() {
        return Err(Error::DimensionMismatch(alloc::format!(
            "J is {}x{} but R is {}x{}",
            j.nrows(),
            j.ncols(),
            r.nrows(),
            r.ncols()
        )));
    }
    Ok(j.nrows())
}

/// `T_0, T_1, ..., T_{m_max}` with `T_m = sum_{j<=m} J^j R (J^H)^j`.
pub fn t_sums(j: &ComplexMatrix, r: &ComplexMatrix, m_max: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(m_max + 1);
    let mut term = r.clone();
    let mut sum = r.clone();
    out.push(sum.clone());
    let jh = j.adjoint();
    for _ in 0..m_max {
        term = j * &term * &jh;
        sum += &term;
        out.push(sum.clone());
    }
    out
}

/// `lambda_min(T_m)` evaluated as `sigma_min(K_m)^2` with
/// `K_m = [R^{1/2}, J R^{1/2}, ..., J^m R^{1/2}]`, so that `T_m = K_m K_m^H`
/// is never formed, together with the rounding floor `(rank_rtol sigma_max)^2`.
struct KrylovFactor<'a> {
    j: &'a ComplexMatrix,
    blocks: Vec<ComplexMatrix>,
}

impl<'a> KrylovFactor<'a> {
    fn new(j: &'a ComplexMatrix, r: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Self> {
        Ok(Self {
            j,
            blocks: alloc::vec![psd_sqrt(r, tol)?],
        })
    }

    fn extend(&mut self) {
        let next = self.j * self.blocks.last().expect("nonempty");
        self.blocks.push(next);
    }

    fn kappa_and_floor(&self, tol: &ToleranceConfig) -> (f64, f64) {
        let sv = linalg::singular_values(&linalg::hstack(&self.blocks));
        let n = self.j.nrows();
        if n == 0 {
            return (f64::INFINITY, 0.0);
        }
        let smin = if sv.len() < n { 0.0 } else { sv[n - 1] };
        let smax = sv.first().copied().unwrap_or(0.0);
        (smin * smin, (tol.rank_rtol * smax) * (tol.rank_rtol * smax))
    }
}

fn kappa_at(j: &ComplexMatrix, r: &ComplexMatrix, m: usize, tol: &ToleranceConfig) -> Result<f64> {
    let mut k = KrylovFactor::new(j, r, tol)?;
    for _ in 0..m {
        k.extend();
    }
    Ok(k.kappa_and_floor(tol).0)
}

/// Smallest `m <= m_max` with `lambda_min(T_m) > coercivity_rtol max(1, ||R||)`;
/// values below the rounding floor of `T_m` count as zero.
pub fn hc_index_sum(j: &ComplexMatrix, r: &ComplexMatrix, m_max: usize, tol: &ToleranceConfig) -> Result<HcIndexReport> {
    check_pair(j, r, tol)?;
    let threshold = tol.coercivity_threshold(spectral_norm(r));
    let mut k = KrylovFactor::new(j, r, tol)?;
    let mut kappa = f64::NEG_INFINITY;
    let mut m_hc = None;
    for m in 0..=m_max {
        if m > 0 {
            k.extend();
        }
        let (kap, floor) = k.kappa_and_floor(tol);
        kappa = kap;
        if kap > threshold.max(floor) {
            m_hc = Some(m);
            break;
        }
    }
    Ok(HcIndexReport {
        m_hc,
        kappa,
        method_agreement: MethodAgreement {
            sum: true,
            ..Default::default()
        },
        m_max,
    })
}

/// Smallest `m` with `rank [R, JR, ..., J^m R] = n`.
pub fn hc_index_kalman(j: &ComplexMatrix, r: &ComplexMatrix, m_max: usize, tol: &ToleranceConfig) -> Result<HcIndexReport> {
    let n = check_pair(j, r, tol)?;
    let mut blocks = Vec::with_capacity(m_max + 1);
    let mut cur = r.clone();
    let mut m_hc = None;
    for m in 0..=m_max {
        if m > 0 {
            cur = j * &cur;
        }
        blocks.push(cur.clone());
        if numerical_rank(&linalg::hstack(&blocks), tol) == n {
            m_hc = Some(m);
            break;
        }
    }
    Ok(HcIndexReport {
        m_hc,
        kappa: kappa_at(j, r, m_hc.unwrap_or(m_max), tol)?,
        method_agreement: MethodAgreement {
            kalman: true,
            ..Default::default()
        },
        m_max,
    })
}

/// Smallest `m` with `rank [R^{1/2}; R^{1/2} J; ...; R^{1/2} J^m] = n`.
pub fn hc_index_kernel(j: &ComplexMatrix, r: &ComplexMatrix, m_max: usize, tol: &ToleranceConfig) -> Result<HcIndexReport> {
    let n = check_pair(j, r, tol)?;
    let s = psd_sqrt(r, tol)?;
    let mut blocks = Vec::with_capacity(m_max + 1);
    let mut cur = s;
    let mut m_hc = None;
    for m in 0..=m_max {
        if m > 0 {
            cur = &cur * j;
        }
        blocks.push(cur.clone());
        if numerical_rank(&linalg::vstack(&blocks), tol) == n {
            m_hc = Some(m);
            break;
        }
    }
    Ok(HcIndexReport {
        m_hc,
        kappa: kappa_at(j, r, m_hc.unwrap_or(m_max), tol)?,
        method_agreement: MethodAgreement {
            kernel: true,
            ..Default::default()
        },
        m_max,
    })
}

/// Runs all three conditions; the agreement flags record which methods
/// reproduce the sum-method result.
pub fn hc_index(j: &ComplexMatrix, r: &ComplexMatrix, m_max: Option<usize>, tol: &ToleranceConfig) -> Result<HcIndexReport> {
    let m_max = m_max.unwrap_or(j.nrows());
    let sum = hc_index_sum(j, r, m_max, tol)?;
    let kal = hc_index_kalman(j, r, m_max, tol)?;
    let ker = hc_index_kernel(j, r, m_max, tol)?;
    Ok(HcIndexReport {
        m_hc: sum.m_hc,
        kappa: sum.kappa,
        method_agreement: MethodAgreement {
            sum: true,
            kalman: kal.m_hc == sum.m_hc,
            kernel: ker.m_hc == sum.m_hc,
        },
        m_max,
    })
}

/// True iff every eigenvalue of `C` has real part above the coercivity
/// threshold.
pub fn is_hypocoercive_spectrum(c: &ComplexMatrix, tol: &ToleranceConfig) -> Result<bool> {
    let ev = linalg::eigenvalues(c)?;
    let threshold = tol.coercivity_threshold(spectral_norm(c));
    Ok(ev.iter().all(|z| z.re > threshold))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortTimeFit {
    /// Fitted exponent `a` in `1 - ||e^{-Ct}|| ~ c t^a`.
    pub a: f64,
    pub c: f64,
}

const QUADRATURE_NODES: usize = 12;

/// `1 - ||e^{-Ct}||_2` for semi-dissipative `C`.
///
/// Uses `I - S(t)^H S(t) = 2 int_0^t S(s)^H R S(s) ds` with `R` the Hermitian
/// part of `C`, evaluated by Gauss-Legendre quadrature as `G^H G`. The defect
/// follows from `sigma_min(G)` without the cancellation in `1 - sigma_max`.
pub fn propagator_defect(c: &ComplexMatrix, t: f64, tol: &ToleranceConfig) -> Result<f64> {
    let n = linalg::ensure_square(c)?;
    if n == 0 || t <= 0.0 {
        return Ok(0.0);
    }
    let r = hermitian_part(c)?;
    let sqrt_r = psd_sqrt(&r, tol)?;
    let (x, w) = linalg::gauss_legendre(QUADRATURE_NODES.max(n + 2));
    let blocks: Vec<ComplexMatrix> = x
        .iter()
        .zip(&w)
        .map(|(&xi, &wi)| {
            let s = 0.5 * t * (1.0 + xi);
            let weight = linalg::sqrt(t * wi);
            &sqrt_r * expm(&(c * re(-s))) * re(weight)
        })
        .collect();
    let g = linalg::vstack(&blocks);
    let sv = linalg::singular_values(&g);
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.get(n - 1).copied().unwrap_or(0.0);
    if smin <= 1e-13 * smax.max(f64::MIN_POSITIVE) {
        return Ok(0.0);
    }
    let s2 = (smin * smin).min(1.0);
    Ok(s2 / (1.0 + linalg::sqrt(1.0 - s2)))
}

/// Fits `log(1 - ||e^{-Ct}||) = log c + a log t` over the two smallest
/// decades of `t_grid`.
pub fn short_time_exponent(c: &ComplexMatrix, t_grid: &[f64], tol: &ToleranceConfig) -> Result<ShortTimeFit> {
    if t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidArgument("time grid must be positive".into()));
    }
    let t_min = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &t in t_grid.iter().filter(|&&t| t <= 100.0 * t_min) {
        let d = propagator_defect(c, t, tol)?;
        if d > 0.0 {
            xs.push(libm::log(t));
            ys.push(libm::log(d));
        }
    }
    let (intercept, slope) = linalg::fit_line(&xs, &ys).ok_or(Error::NoDecaySignal)?;
    Ok(ShortTimeFit {
        a: slope,
        c: libm::exp(intercept),
    })
}

/// Geometric grid of `n` points on `[t0, t1]`.
pub fn geometric_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return alloc::vec![t0];
    }
    let (l0, l1) = (libm::log(t0), libm::log(t1));
    (0..n)
        .map(|i| libm::exp(l0 + (l1 - l0) * i as f64 / (n - 1) as f64))
        .collect()
}
