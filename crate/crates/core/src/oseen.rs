//! Fourier-modal Oseen models on the 2D torus: isotropic drift, anisotropic
//! diffusion with constant drift, and anisotropic diffusion with the shear
//! drift `b = (sin x2, 0)`, plus the quantitative objects of the decay proof.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, block_diag, c64, diag_real, eigh, re, sqrt, ComplexMatrix, C64, I, ZERO};
use crate::types::{DaeTriple, ToleranceConfig};

/// `4 pi^2`, the torus area; `||u||^2 = 4 pi^2 sum |phi_k|^2`.
pub const TORUS_AREA: f64 = 4.0 * PI * PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Drift {
    Isotropic { b: [f64; 2] },
    AnisoConst { b: [f64; 2] },
    AnisoSin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OseenConfig {
    pub nu: f64,
    pub drift: Drift,
    /// Truncation `K`: `k2` ranges over `[-K, K]`.
    pub k_trunc: usize,
    pub k1_range: Vec<i64>,
}

impl OseenConfig {
    pub fn new(nu: f64, drift: Drift, k_trunc: usize, k1_range: Vec<i64>) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("viscosity must be positive, got {nu}")));
        }
        if k_trunc < 2 {
            return Err(Error::InvalidArgument(format!("truncation K must be at least 2, got {k_trunc}")));
        }
        Ok(Self {
            nu,
            drift,
            k_trunc,
            k1_range,
        })
    }
}

/// Velocity and pressure modes `(phi_k, p_k)` at fixed `k1`, `k2 = -K..=K`
/// stored ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    pub k1: i64,
    pub k_trunc: usize,
    pub phi: Vec<[C64; 2]>,
    pub p: Vec<C64>,
}

impl ModeState {
    pub fn zeros(k1: i64, k_trunc: usize) -> Self {
        let n = 2 * k_trunc + 1;
        Self {
            k1,
            k_trunc,
            phi: alloc::vec![[ZERO; 2]; n],
            p: alloc::vec![ZERO; n],
        }
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn k2(&self, idx: usize) -> i64 {
        idx as i64 - self.k_trunc as i64
    }

    pub fn idx(&self, k2: i64) -> Option<usize> {
        let i = k2 + self.k_trunc as i64;
        (i >= 0 && (i as usize) < self.len()).then_some(i as usize)
    }

    /// `sum |phi_k|^2` (without the torus factor).
    pub fn velocity_norm_sq(&self) -> f64 {
        self.phi.iter().map(|v| v[0].norm_sqr() + v[1].norm_sqr()).sum()
    }

    /// `max_k |k . phi_k|`.
    pub fn divergence_defect(&self) -> f64 {
        (0..self.len())
            .map(|i| (self.phi[i][0] * re(self.k1 as f64) + self.phi[i][1] * re(self.k2(i) as f64)).norm())
            .fold(0.0, f64::max)
    }

    /// Interleaved `(phi_1, phi_2, p)` per `k2`, the layout of
    /// [`build_aniso_sin_system`].
    pub fn to_dae_vector(&self) -> linalg::ComplexVector {
        linalg::ComplexVector::from_fn(3 * self.len(), |i, _| match i % 3 {
            0 => self.phi[i / 3][0],
            1 => self.phi[i / 3][1],
            _ => self.p[i / 3],
        })
    }

    pub fn from_dae_vector(k1: i64, k_trunc: usize, v: &linalg::ComplexVector) -> Result<Self> {
        let mut s = Self::zeros(k1, k_trunc);
        if v.len() != 3 * s.len() {
            return Err(Error::DimensionMismatch(format!("vector length {} != {}", v.len(), 3 * s.len())));
        }
        for i in 0..s.len() {
            s.phi[i] = [v[3 * i], v[3 * i + 1]];
            s.p[i] = v[3 * i + 2];
        }
        Ok(s)
    }
}

fn knorm(k: [i64; 2]) -> f64 {
    libm::hypot(k[0] as f64, k[1] as f64)
}

fn nonzero(k: [i64; 2]) -> Result<()> {
    if k == [0, 0] {
        return Err(Error::InvalidArgument("wave vector k must be nonzero".into()));
    }
    Ok(())
}

fn mode_j(k: [i64; 2], b: [f64; 2]) -> ComplexMatrix {
    let (k1, k2) = (k[0] as f64, k[1] as f64);
    let bk = b[0] * k1 + b[1] * k2;
    let mut j = ComplexMatrix::zeros(3, 3);
    j[(0, 0)] = c64(0.0, -bk);
    j[(1, 1)] = c64(0.0, -bk);
    j[(0, 2)] = c64(0.0, -k1);
    j[(1, 2)] = c64(0.0, -k2);
    j[(2, 0)] = c64(0.0, -k1);
    j[(2, 1)] = c64(0.0, -k2);
    j
}

/// Single mode of the isotropic Oseen equations with constant drift `b`.
pub fn build_isotropic_mode(k: [i64; 2], b: [f64; 2], nu: f64) -> Result<DaeTriple> {
    nonzero(k)?;
    let k2n = (k[0] * k[0] + k[1] * k[1]) as f64;
    DaeTriple::new(
        diag_real(&[1.0, 1.0, 0.0]),
        mode_j(k, b),
        diag_real(&[nu * k2n, nu * k2n, 0.0]),
        &ToleranceConfig::default(),
    )
}

/// Single mode with diffusion only in `x2` and constant drift `b`.
pub fn build_aniso_const_mode(k: [i64; 2], b: [f64; 2], nu: f64) -> Result<DaeTriple> {
    nonzero(k)?;
    let d = nu * (k[1] * k[1]) as f64;
    DaeTriple::new(
        diag_real(&[1.0, 1.0, 0.0]),
        mode_j(k, b),
        diag_real(&[d, d, 0.0]),
        &ToleranceConfig::default(),
    )
}

/// `P_k` mapping `(phi, p)` to (divergence, vorticity, `i p`) coordinates.
pub fn stokes_unitary(k: [i64; 2]) -> Result<ComplexMatrix> {
    nonzero(k)?;
    let n = knorm(k);
    let (a, b) = (k[0] as f64 / n, k[1] as f64 / n);
    let mut p = ComplexMatrix::zeros(3, 3);
    p[(0, 0)] = re(a);
    p[(0, 1)] = re(b);
    p[(1, 0)] = re(-b);
    p[(1, 1)] = re(a);
    p[(2, 2)] = I;
    Ok(p)
}

fn check_k1(k1: i64, k_trunc: usize) -> Result<()> {
    if k1 == 0 {
        return Err(Error::InvalidArgument("k1 = 0 modes decouple; use the per-mode builder".into()));
    }
    if k_trunc < 2 {
        return Err(Error::InvalidArgument(format!("truncation K must be at least 2, got {k_trunc}")));
    }
    Ok(())
}

/// Truncated modal system for fixed `k1 != 0` with drift `(sin x2, 0)` and
/// diffusion `nu d^2/dx2^2`; size `3 (2K+1)`.
pub fn build_aniso_sin_system(k1: i64, nu: f64, k_trunc: usize) -> Result<DaeTriple> {
    check_k1(k1, k_trunc)?;
    let m = 2 * k_trunc + 1;
    let n = 3 * m;
    let kk = k_trunc as i64;
    let mut e = ComplexMatrix::zeros(n, n);
    let mut j = ComplexMatrix::zeros(n, n);
    let mut r = ComplexMatrix::zeros(n, n);
    let half = 0.5 * k1 as f64;
    for i in 0..m {
        let k2 = i as i64 - kk;
        let o = 3 * i;
        e[(o, o)] = re(1.0);
        e[(o + 1, o + 1)] = re(1.0);
        let d = nu * (k2 * k2) as f64;
        r[(o, o)] = re(d);
        r[(o + 1, o + 1)] = re(d);
        j.view_mut((o, o), (3, 3)).copy_from(&mode_j([k1, k2], [0.0, 0.0]));
        if i + 1 < m {
            for c in 0..2 {
                j[(o + c, o + 3 + c)] = re(half);
                j[(o + 3 + c, o + c)] = re(-half);
            }
        }
    }
    DaeTriple::new(e, j, r, &ToleranceConfig::default())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SinStaircase {
    /// Block-diagonal `diag_k2 P_{(k1,k2)}` on the interleaved layout.
    pub p: ComplexMatrix,
    pub j22: ComplexMatrix,
    pub r22: ComplexMatrix,
}

/// Explicit staircase reduction of the shear-drift system.
pub fn sin_staircase(k1: i64, nu: f64, k_trunc: usize) -> Result<SinStaircase> {
    check_k1(k1, k_trunc)?;
    let m = 2 * k_trunc + 1;
    let kk = k_trunc as i64;
    let blocks: Vec<ComplexMatrix> = (0..m)
        .map(|i| stokes_unitary([k1, i as i64 - kk]))
        .collect::<Result<_>>()?;
    let mut j22 = ComplexMatrix::zeros(m, m);
    let kf = k1 as f64;
    for i in 0..m {
        let k2 = (i as i64 - kk) as f64;
        let nk2 = kf * kf + k2 * k2;
        let nk = sqrt(nk2);
        if i + 1 < m {
            j22[(i, i + 1)] = re(0.5 * kf * (nk2 + k2) / (nk * libm::hypot(kf, k2 + 1.0)));
        }
        if i > 0 {
            j22[(i, i - 1)] = re(-0.5 * kf * (nk2 - k2) / (nk * libm::hypot(kf, k2 - 1.0)));
        }
    }
    let r22 = diag_real(&(0..m).map(|i| nu * ((i as i64 - kk) as f64).powi(2)).collect::<Vec<_>>());
    Ok(SinStaircase {
        p: block_diag(&blocks),
        j22,
        r22,
    })
}

impl SinStaircase {
    /// Generator `J22 - R22` of the vorticity coordinates.
    pub fn generator(&self) -> ComplexMatrix {
        &self.j22 - &self.r22
    }

    /// Rows of `P` that produce the vorticity coordinates.
    pub fn y2_rows(&self) -> ComplexMatrix {
        let m = self.j22.nrows();
        ComplexMatrix::from_fn(m, self.p.ncols(), |i, c| self.p[(3 * i + 1, c)])
    }
}

pub fn beta1(k1: i64) -> f64 {
    let k = k1 as f64;
    k * k / (2.0 * sqrt(k * k + 1.0) * k.abs())
}

pub fn beta2(k1: i64) -> f64 {
    let k = k1 as f64;
    (k * k + 2.0) / (2.0 * sqrt(k * k + 4.0) * sqrt(k * k + 1.0))
}

/// `Y` with `-1` at `(-1,0), (0,-1)` and `+1` at `(0,1), (1,0)`.
pub fn weight_y(k_trunc: usize) -> ComplexMatrix {
    let m = 2 * k_trunc + 1;
    let c = k_trunc;
    let mut y = ComplexMatrix::zeros(m, m);
    y[(c - 1, c)] = re(-1.0);
    y[(c, c - 1)] = re(-1.0);
    y[(c, c + 1)] = re(1.0);
    y[(c + 1, c)] = re(1.0);
    y
}

/// `X = I + (alpha / k1) Y`.
pub fn weight_x(k1: i64, alpha: f64, k_trunc: usize) -> Result<ComplexMatrix> {
    check_k1(k1, k_trunc)?;
    let eps = alpha / k1 as f64;
    if eps.abs() >= core::f64::consts::FRAC_1_SQRT_2 {
        return Err(Error::InvalidArgument(format!("|alpha/k1| = {} must be below 1/sqrt(2)", eps.abs())));
    }
    let m = 2 * k_trunc + 1;
    Ok(ComplexMatrix::identity(m, m) + weight_y(k_trunc) * re(eps))
}

/// Projection-iteration parameter `eps_1` reproducing `X = I + (alpha/k1) Y`.
pub fn algorithm3_eps(k1: i64, alpha: f64) -> f64 {
    let k = k1 as f64;
    alpha / (k * k * beta1(k1))
}

/// `-(A^H X + X A)` restricted to `span{e_-2..e_2}`.
pub fn q_matrix(k1: i64, alpha: f64, nu: f64) -> ComplexMatrix {
    let (b1, b2) = (beta1(k1), beta2(k1));
    let a = alpha;
    let s = a * nu / k1 as f64;
    linalg::from_real_rows(&[
        &[8.0 * nu, 0.0, -a * b2, 0.0, 0.0],
        &[0.0, -2.0 * a * b1 + 2.0 * nu, -s, 2.0 * a * b1, 0.0],
        &[-a * b2, -s, 4.0 * a * b1, s, -a * b2],
        &[0.0, 2.0 * a * b1, s, -2.0 * a * b1 + 2.0 * nu, 0.0],
        &[0.0, 0.0, -a * b2, 0.0, 8.0 * nu],
    ])
}

/// Leading principal minors of `Q`, orders 1 through 5.
pub fn q_minors(k1: i64, alpha: f64, nu: f64) -> [f64; 5] {
    let q = q_matrix(k1, alpha, nu);
    let mut out = [0.0; 5];
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = q.view((0, 0), (k + 1, k + 1)).into_owned().determinant().re;
    }
    out
}

/// Coefficients `(a, b, c)` of `a alpha^2 + b alpha + c`.
pub type Quadratic = (f64, f64, f64);

/// The three quadratics bounding `alpha` from the minors of `Q`, for given
/// `beta1, beta2` and `nu^2 / k1^2`.
pub fn alpha_quadratics(b1: f64, b2: f64, nu_over_k1_sq: f64, nu: f64) -> [Quadratic; 3] {
    let r = nu_over_k1_sq;
    let nu2 = nu * nu;
    [
        (b1 * b2 * b2, -nu * (32.0 * b1 * b1 + b2 * b2 + 4.0 * r), 32.0 * b1 * nu2),
        (2.0 * b1 * b2 * b2, -nu * (64.0 * b1 * b1 + b2 * b2 + 8.0 * r), 32.0 * b1 * nu2),
        (2.0 * b1 * b2 * b2, -nu * (32.0 * b1 * b1 + b2 * b2 + 4.0 * r), 16.0 * b1 * nu2),
    ]
}

/// Roots `(lo, hi)` of a quadratic with real roots.
pub fn quadratic_roots(q: Quadratic) -> Option<(f64, f64)> {
    let (a, b, c) = q;
    let disc = b * b - 4.0 * a * c;
    if a == 0.0 || disc < 0.0 {
        return None;
    }
    let sd = sqrt(disc);
    // stable evaluation, b < 0 for all quadratics of interest
    let q = -0.5 * (b + b.signum() * sd);
    let (r1, r2) = (q / a, c / q);
    Some((r1.min(r2), r1.max(r2)))
}

/// Admissible `alpha` bound: the minimum of the explicit caps and the
/// smaller quadratic roots over `k1_probe` and the `k1 -> infinity` limit.
pub fn alpha_min(nu: f64, k1_probe: &[i64]) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::InvalidArgument(format!("viscosity must be positive, got {nu}")));
    }
    let mut best = core::f64::consts::FRAC_1_SQRT_2
        .min(nu)
        .min(nu * 2.0 * core::f64::consts::SQRT_2 / (2.0 + nu * nu));
    let mut points: Vec<(f64, f64, f64)> = k1_probe
        .iter()
        .filter(|&&k| k != 0)
        .map(|&k| (beta1(k), beta2(k), nu * nu / (k * k) as f64))
        .collect();
    points.push((0.5, 0.5, 0.0));
    for (b1, b2, r) in points {
        for q in alpha_quadratics(b1, b2, r, nu) {
            let (lo, _) = quadratic_roots(q)
                .ok_or_else(|| Error::Invariant(format!("quadratic {q:?} has no real roots")))?;
            best = best.min(lo);
        }
    }
    Ok(best)
}

pub const BETA1_MIN: f64 = 0.353_553_390_593_273_8; // 1 / (2 sqrt 2)

pub fn beta2_min() -> f64 {
    3.0 / sqrt(40.0)
}

/// Uniform lower bound on `lambda_1(Q)`.
pub fn lambda1_min(alpha: f64, nu: f64) -> f64 {
    let b1 = BETA1_MIN;
    let b2 = beta2_min();
    let bracket = 2.0 * b1 * b2 * b2 * alpha * alpha - (33.0 / 4.0 + 4.0 * nu * nu) * nu * alpha + 16.0 * b1 * nu * nu;
    bracket * alpha * 64.0 / (625.0 * nu * nu)
}

/// `lambda_min(R22 + J22 R22 J22^H)` of the truncated shear system.
pub fn kappa_truncated(k1: i64, nu: f64, k_trunc: usize) -> Result<f64> {
    let s = sin_staircase(k1, nu, k_trunc)?;
    let t = &s.r22 + &s.j22 * &s.r22 * s.j22.adjoint();
    Ok(eigh(&t).values[0])
}

/// `g(gamma) = (7 + gamma)^2 / (4 gamma + (7 + gamma)^2)`.
pub fn aux_g(gamma: f64) -> f64 {
    let s = (7.0 + gamma) * (7.0 + gamma);
    s / (4.0 * gamma + s)
}

/// `(alpha_*^2)_- = (1 - sqrt(g(c^2))) / 2`.
pub fn alpha_star_sq_minus(c_sq: f64) -> f64 {
    0.5 * (1.0 - sqrt(aux_g(c_sq)))
}

/// `h(alpha, beta) = alpha^2 + (alpha beta c - sqrt(1 - alpha^2))^2 / 8`.
pub fn aux_h(alpha: f64, beta: f64, c: f64) -> f64 {
    let t = alpha * beta * c - sqrt(1.0 - alpha * alpha);
    alpha * alpha + t * t / 8.0
}

/// `c^2(k1) = (k1^2 + 2)^2 / (k1^2 (k1^2 + 4))`.
pub fn aux_c_sq(k1: i64) -> f64 {
    let k2 = (k1 * k1) as f64;
    (k2 + 2.0) * (k2 + 2.0) / (k2 * (k2 + 4.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantReport {
    pub nu: f64,
    pub alpha_min: f64,
    /// `(alpha, lambda1_min(alpha))` samples.
    pub lambda1_min: Vec<(f64, f64)>,
    /// `(k1, K, kappa)` per truncation.
    pub kappa_trunc: Vec<(i64, usize, f64)>,
    /// `(k1, alpha, minors)` at `alpha = alpha_min / 2`.
    pub minors: Vec<(i64, f64, [f64; 5])>,
}

pub fn quant_report(nu: f64, k1_max: i64, k_trunc: usize) -> Result<QuantReport> {
    if k1_max < 1 {
        return Err(Error::InvalidArgument("k1 range is empty".into()));
    }
    let probe: Vec<i64> = (1..=k1_max.max(64)).collect();
    let am = alpha_min(nu, &probe)?;
    let lambda1 = [0.1, 0.25, 0.5, 0.75, 0.9, 1.0]
        .iter()
        .map(|f| (f * am, lambda1_min(f * am, nu)))
        .collect();
    let mut kappa = Vec::new();
    let mut minors = Vec::new();
    for k1 in 1..=k1_max {
        kappa.push((k1, k_trunc, kappa_truncated(k1, nu, k_trunc)?));
        minors.push((k1, 0.5 * am, q_minors(k1, 0.5 * am, nu)));
    }
    Ok(QuantReport {
        nu,
        alpha_min: am,
        lambda1_min: lambda1,
        kappa_trunc: kappa,
        minors,
    })
}

/// Pressure modes solving `Delta p = -cos(x2) d_x1 u2` with `p_0 = 0`.
pub fn pressure_poisson(state: &ModeState) -> Result<Vec<C64>> {
    let n = state.len();
    let mut p = alloc::vec![ZERO; n];
    let kf = state.k1 as f64;
    for i in 0..n {
        let k2 = state.k2(i);
        if state.k1 == 0 && k2 == 0 {
            if state.p[i] != ZERO {
                return Err(Error::InvalidArgument("the mean pressure mode must be zero".into()));
            }
            continue;
        }
        if state.k1 == 0 {
            continue;
        }
        let up = if i + 1 < n { state.phi[i + 1][1] } else { ZERO };
        let down = if i > 0 { state.phi[i - 1][1] } else { ZERO };
        let nk2 = kf * kf + (k2 * k2) as f64;
        p[i] = c64(0.0, kf / (2.0 * nk2)) * (up + down);
    }
    Ok(p)
}

/// `-C u` for the shear-drift generator, with the pressure from
/// [`pressure_poisson`]; modes beyond the truncation are dropped.
pub fn apply_generator(state: &ModeState, nu: f64) -> Result<ModeState> {
    let p = pressure_poisson(state)?;
    let n = state.len();
    let kf = state.k1 as f64;
    let mut out = ModeState::zeros(state.k1, state.k_trunc);
    for i in 0..n {
        let k2 = state.k2(i) as f64;
        for c in 0..2 {
            let up = if i + 1 < n { state.phi[i + 1][c] } else { ZERO };
            let down = if i > 0 { state.phi[i - 1][c] } else { ZERO };
            let kc = if c == 0 { kf } else { k2 };
            out.phi[i][c] = (up - down) * re(0.5 * kf) - I * re(kc) * p[i] - state.phi[i][c] * re(nu * k2 * k2);
        }
    }
    out.p = pressure_poisson(&out)?;
    Ok(out)
}

/// `4 pi^2 sum conj(a_k) . b_k` over a list of mode states.
pub fn inner(a: &[ModeState], b: &[ModeState]) -> C64 {
    let mut s = ZERO;
    for (x, y) in a.iter().zip(b) {
        for (u, v) in x.phi.iter().zip(&y.phi) {
            s += u[0].conj() * v[0] + u[1].conj() * v[1];
        }
    }
    s * re(TORUS_AREA)
}

/// Modes of `u = [0, sin x1]`.
pub fn sin_x1_state(k_trunc: usize) -> [ModeState; 2] {
    let mut plus = ModeState::zeros(1, k_trunc);
    let mut minus = ModeState::zeros(-1, k_trunc);
    plus.phi[k_trunc][1] = c64(0.0, -0.5);
    minus.phi[k_trunc][1] = c64(0.0, 0.5);
    [minus, plus]
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorCoefficients {
    pub norm0_sq: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// `||u(0)||^2` and the first three derivatives of `||u(t)||^2` at `t = 0`
/// for `u(0) = [0, sin x1]`.
pub fn taylor_coefficients(nu: f64, k_trunc: usize) -> Result<TaylorCoefficients> {
    if k_trunc < 4 {
        return Err(Error::InvalidArgument(format!("truncation K = {k_trunc} clips the band; need K >= 4")));
    }
    let u: Vec<ModeState> = sin_x1_state(k_trunc).into();
    let apply = |s: &[ModeState]| -> Result<Vec<ModeState>> { s.iter().map(|m| apply_generator(m, nu)).collect() };
    let w1 = apply(&u)?;
    let w2 = apply(&w1)?;
    let w3 = apply(&w2)?;
    Ok(TaylorCoefficients {
        norm0_sq: inner(&u, &u).re,
        d1: 2.0 * inner(&u, &w1).re,
        d2: 2.0 * inner(&w1, &w1).re + 2.0 * inner(&u, &w2).re,
        d3: 6.0 * inner(&w1, &w2).re + 2.0 * inner(&u, &w3).re,
    })
}

/// Leray projection `n n^T phi`, `n = (-k2, k1) / |k|`.
pub fn leray_project(phi: [C64; 2], k: [i64; 2]) -> Result<[C64; 2]> {
    nonzero(k)?;
    let nk = knorm(k);
    let n = [-(k[1] as f64) / nk, k[0] as f64 / nk];
    let s = phi[0] * re(n[0]) + phi[1] * re(n[1]);
    Ok([s * re(n[0]), s * re(n[1])])
}

/// `y_k = (-k2 phi_1 + k1 phi_2) / |k|`.
pub fn vorticity_coordinates(state: &ModeState) -> Result<Vec<C64>> {
    if state.k1 == 0 {
        return Err(Error::InvalidArgument("vorticity coordinates need k1 != 0".into()));
    }
    Ok((0..state.len())
        .map(|i| {
            let k = [state.k1, state.k2(i)];
            let nk = knorm(k);
            (state.phi[i][1] * re(k[0] as f64) - state.phi[i][0] * re(k[1] as f64)) * re(1.0 / nk)
        })
        .collect())
}

/// Inverse of [`vorticity_coordinates`] on divergence-free states; pressure
/// modes are left at zero.
pub fn velocity_from_vorticity(k1: i64, k_trunc: usize, y: &[C64]) -> Result<ModeState> {
    check_k1(k1, k_trunc.max(2))?;
    let mut s = ModeState::zeros(k1, k_trunc);
    if y.len() != s.len() {
        return Err(Error::DimensionMismatch(format!("{} vorticity modes for {} slots", y.len(), s.len())));
    }
    for (i, &yi) in y.iter().enumerate() {
        let k = [k1, s.k2(i)];
        let nk = knorm(k);
        s.phi[i] = [yi * re(-(k[1] as f64) / nk), yi * re(k[0] as f64 / nk)];
    }
    Ok(s)
}

/// `y3_k = -(k1^2 / (2 |k|^2)) (y_{k-e2} / |k-e2| + y_{k+e2} / |k+e2|)`, so
/// that `p_k = -i y3_k`.
pub fn y3_from_y2(y2: &[C64], k1: i64) -> Result<Vec<C64>> {
    if k1 == 0 {
        return Err(Error::InvalidArgument("k1 must be nonzero".into()));
    }
    let n = y2.len();
    if n % 2 == 0 {
        return Err(Error::DimensionMismatch("mode vector must have odd length 2K+1".into()));
    }
    let kk = (n / 2) as i64;
    let kf = k1 as f64;
    Ok((0..n)
        .map(|i| {
            let k2 = i as i64 - kk;
            let nk2 = kf * kf + (k2 * k2) as f64;
            let down = if i > 0 { y2[i - 1] * re(1.0 / knorm([k1, k2 - 1])) } else { ZERO };
            let up = if i + 1 < n { y2[i + 1] * re(1.0 / knorm([k1, k2 + 1])) } else { ZERO };
            (down + up) * re(-kf * kf / (2.0 * nk2))
        })
        .collect())
}

/// Pressure modes from vorticity coordinates.
pub fn pressure_from_y2(y2: &[C64], k1: i64) -> Result<Vec<C64>> {
    Ok(y3_from_y2(y2, k1)?.into_iter().map(|v| -I * v).collect())
}

/// `||grad p||^2 = 4 pi^2 sum |k|^2 |p_k|^2`.
pub fn grad_p_norm_sq(k1: i64, p: &[C64]) -> f64 {
    let kk = (p.len() / 2) as i64;
    let kf = k1 as f64;
    p.iter()
        .enumerate()
        .map(|(i, v)| {
            let k2 = (i as i64 - kk) as f64;
            (kf * kf + k2 * k2) * v.norm_sqr()
        })
        .sum::<f64>()
        * TORUS_AREA
}
