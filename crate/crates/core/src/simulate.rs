//! Exact matrix-exponential propagation of modal systems, decay fits and
//! physical-space reconstruction.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{self, expm, re, spectral_norm, sqrt, ComplexMatrix, ComplexVector, C64, ZERO};
use crate::oseen::{self, Drift, ModeState, OseenConfig, TORUS_AREA};
use crate::staircase::{dynamic_part, staircase_transform, StaircaseForm};
use crate::types::{DaeTriple, ToleranceConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexVector>,
    pub norms: Vec<f64>,
    pub weighted_norms: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Fills `weighted_norms` with `sqrt(x^H X x)`.
    pub fn with_weight(mut self, x: &ComplexMatrix) -> Result<Self> {
        let mut w = Vec::with_capacity(self.len());
        for s in &self.states {
            if s.len() != x.nrows() {
                return Err(Error::DimensionMismatch(format!("weight is {}x{}, state has {}", x.nrows(), x.ncols(), s.len())));
            }
            w.push(sqrt((s.adjoint() * x * s)[(0, 0)].re.max(0.0)));
        }
        self.weighted_norms = Some(w);
        Ok(self)
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("empty time grid".into()));
    }
    if !(times[0] >= 0.0) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("times must be finite and start at t0 >= 0".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("times must be ascending".into()));
    }
    Ok(())
}

/// Stepper caching `exp(A dt)` for repeated step sizes.
struct Stepper<'a> {
    a: &'a ComplexMatrix,
    cached: Option<(f64, ComplexMatrix)>,
}

impl<'a> Stepper<'a> {
    fn new(a: &'a ComplexMatrix) -> Self {
        Self { a, cached: None }
    }

    /// `scale` bounds the times whose difference produced `dt`, so step
    /// sizes equal up to that rounding reuse the cached exponential.
    fn step(&mut self, x: &ComplexVector, dt: f64, scale: f64) -> ComplexVector {
        if dt == 0.0 {
            return x.clone();
        }
        match &self.cached {
            Some((h, m)) if (h - dt).abs() <= 4.0 * f64::EPSILON * scale.max(dt) => m * x,
            _ => {
                let m = expm(&(self.a * re(dt)));
                let out = &m * x;
                self.cached = Some((dt, m));
                out
            }
        }
    }
}

fn evolve(a: &ComplexMatrix, x0: &ComplexVector, times: &[f64]) -> Result<Vec<ComplexVector>> {
    check_times(times)?;
    let n = linalg::ensure_square(a)?;
    if x0.len() != n {
        return Err(Error::DimensionMismatch(format!("state length {} for a {n}x{n} generator", x0.len())));
    }
    let mut st = Stepper::new(a);
    let mut out = Vec::with_capacity(times.len());
    let mut x = st.step(x0, times[0], times[0]);
    let mut prev = times[0];
    for &t in times {
        x = st.step(&x, t - prev, t);
        prev = t;
        out.push(x.clone());
    }
    Ok(out)
}

/// `x(t) = exp(A t) x0` on the grid.
pub fn propagate_ode(a: &ComplexMatrix, x0: &ComplexVector, times: &[f64]) -> Result<Trajectory> {
    let states = evolve(a, x0, times)?;
    let norms = states.iter().map(|s| s.norm()).collect();
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        norms,
        weighted_norms: None,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DaeRun {
    /// States in original coordinates; norms are `sqrt(x^H E x)`.
    pub trajectory: Trajectory,
    /// `E`-weighted norm of the consistency correction applied to `x0`.
    pub correction: f64,
    pub staircase: StaircaseForm,
}

/// Largest allowed relative `E`-weighted correction of the initial data.
pub const CONSISTENCY_TOL: f64 = 1e-8;

fn e_norm(e: &ComplexMatrix, x: &ComplexVector) -> f64 {
    sqrt((x.adjoint() * e * x)[(0, 0)].re.max(0.0))
}

/// Consistent data closest to `x0`: keeps `y2`, sets `y1 = 0` and
/// recomputes the slaved blocks. Algebraic components of `x0` are dropped.
pub fn consistent_initial_data(t: &DaeTriple, s: &StaircaseForm, x0: &ComplexVector) -> Result<(ComplexVector, f64)> {
    if x0.len() != t.dim() {
        return Err(Error::DimensionMismatch(format!("state length {} for dimension {}", x0.len(), t.dim())));
    }
    let dp = dynamic_part(s)?;
    let y = s.to_staircase(x0);
    let xc = s.from_staircase(&s.slaved(&dp, &s.y2_of(&y))?);
    let corr = e_norm(t.e(), &(x0 - &xc));
    let scale = e_norm(t.e(), x0).max(f64::MIN_POSITIVE);
    if corr > CONSISTENCY_TOL * scale {
        return Err(Error::InconsistentInitialData { correction: corr });
    }
    Ok((xc, corr))
}

/// Propagates `E x' = (J - R) x` through its staircase form.
pub fn propagate_dae(t: &DaeTriple, x0: &ComplexVector, times: &[f64], tol: &ToleranceConfig) -> Result<DaeRun> {
    let s = staircase_transform(t, tol)?;
    propagate_dae_with(t, s, x0, times)
}

pub fn propagate_dae_with(t: &DaeTriple, s: StaircaseForm, x0: &ComplexVector, times: &[f64]) -> Result<DaeRun> {
    check_times(times)?;
    let (xc, correction) = consistent_initial_data(t, &s, x0)?;
    let dp = dynamic_part(&s)?;
    let y20 = s.y2_of(&s.to_staircase(&xc));
    let y2s = if dp.present {
        evolve(&dp.generator()?, &y20, times)?
    } else {
        alloc::vec![y20; times.len()]
    };
    let mut states = Vec::with_capacity(times.len());
    for y2 in &y2s {
        states.push(s.from_staircase(&s.slaved(&dp, y2)?));
    }
    let norms = states.iter().map(|x| e_norm(t.e(), x)).collect();
    Ok(DaeRun {
        trajectory: Trajectory {
            times: times.to_vec(),
            states,
            norms,
            weighted_norms: None,
        },
        correction,
        staircase: s,
    })
}

/// `sigma_max(exp(A t))`.
pub fn propagator_norm(a: &ComplexMatrix, t: f64) -> Result<f64> {
    linalg::ensure_square(a)?;
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("t = {t} must be nonnegative")));
    }
    Ok(spectral_norm(&expm(&(a * re(t)))))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub c_fit: f64,
    pub mu_fit: f64,
    /// Max deviation of `log(|x(t)| / |x(0)|)` from the fitted line on the tail.
    pub residual: f64,
}

/// Least-squares fit of `log |x(t)|` over the tail half of the grid.
pub fn fit_decay(traj: &Trajectory) -> Result<DecayFit> {
    fit_decay_norms(&traj.times, &traj.norms)
}

pub fn fit_decay_norms(times: &[f64], norms: &[f64]) -> Result<DecayFit> {
    if times.len() != norms.len() {
        return Err(Error::DimensionMismatch("times and norms differ in length".into()));
    }
    if times.len() < 4 {
        return Err(Error::InvalidArgument("need at least 4 samples to fit".into()));
    }
    if norms.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidArgument("norms must be strictly positive".into()));
    }
    let n0 = norms[0];
    let logs: Vec<f64> = norms.iter().map(|&v| libm::log(v / n0)).collect();
    let h = times.len() / 2;
    let (b, slope) = linalg::fit_line(&times[h..], &logs[h..]).ok_or(Error::NoDecaySignal)?;
    let mu = -slope;
    let residual = times[h..]
        .iter()
        .zip(&logs[h..])
        .map(|(t, l)| (l - (b + slope * t)).abs())
        .fold(0.0, f64::max);
    let c = times
        .iter()
        .zip(&logs)
        .map(|(t, l)| libm::exp(l + mu * t))
        .fold(1.0, f64::max);
    Ok(DecayFit {
        c_fit: c,
        mu_fit: mu,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub n: usize,
    /// Samples at `(x1, x2) = (2 pi i / n, 2 pi j / n)`, index `i * n + j`.
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub p: Vec<f64>,
}

impl Field {
    pub fn coord(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.n as f64
    }

    /// Grid quadrature of `||u||^2` over the torus.
    pub fn velocity_norm_sq(&self) -> f64 {
        let h = 2.0 * PI / self.n as f64;
        self.u1.iter().zip(&self.u2).map(|(a, b)| a * a + b * b).sum::<f64>() * h * h
    }
}

fn check_symmetry(states: &[ModeState]) -> Result<()> {
    let scale = states
        .iter()
        .flat_map(|s| s.phi.iter().flatten().chain(s.p.iter()))
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let thr = 1e-12 * scale.max(f64::MIN_POSITIVE);
    for s in states {
        let partner = states
            .iter()
            .find(|o| o.k1 == -s.k1)
            .ok_or_else(|| Error::InvalidArgument(format!("no modes for k1 = {} to pair with k1 = {}", -s.k1, s.k1)))?;
        if partner.k_trunc != s.k_trunc {
            return Err(Error::DimensionMismatch("mode lists use different truncations".into()));
        }
        let n = s.len();
        for i in 0..n {
            let j = n - 1 - i;
            let d = (0..2)
                .map(|c| (s.phi[i][c] - partner.phi[j][c].conj()).norm())
                .fold((s.p[i] - partner.p[j].conj()).norm(), f64::max);
            if d > thr {
                return Err(Error::InvalidArgument(format!(
                    "conjugate symmetry violated at k = ({}, {}) by {d:e}",
                    s.k1,
                    s.k2(i)
                )));
            }
        }
    }
    Ok(())
}

/// Real fields `u = sum phi_k e^{i k.x}` and `p` on an `n x n` grid.
pub fn reconstruct_field(states: &[ModeState], grid_n: usize) -> Result<Field> {
    if grid_n == 0 {
        return Err(Error::InvalidArgument("grid size must be positive".into()));
    }
    if states.iter().enumerate().any(|(i, s)| states[..i].iter().any(|o| o.k1 == s.k1)) {
        return Err(Error::InvalidArgument("duplicate k1 in mode list".into()));
    }
    check_symmetry(states)?;
    let n = grid_n;
    let x: Vec<f64> = (0..n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
    let mut acc = alloc::vec![[ZERO; 3]; n * n];
    for s in states {
        // partial sums over k2 at each x2
        let g: Vec<[C64; 3]> = x
            .iter()
            .map(|&x2| {
                let mut v = [ZERO; 3];
                for i in 0..s.len() {
                    let e = C64::from_polar(1.0, s.k2(i) as f64 * x2);
                    v[0] += s.phi[i][0] * e;
                    v[1] += s.phi[i][1] * e;
                    v[2] += s.p[i] * e;
                }
                v
            })
            .collect();
        for (i1, &x1) in x.iter().enumerate() {
            let e = C64::from_polar(1.0, s.k1 as f64 * x1);
            for i2 in 0..n {
                for c in 0..3 {
                    acc[i1 * n + i2][c] += g[i2][c] * e;
                }
            }
        }
    }
    Ok(Field {
        n,
        u1: acc.iter().map(|v| v[0].re).collect(),
        u2: acc.iter().map(|v| v[1].re).collect(),
        p: acc.iter().map(|v| v[2].re).collect(),
    })
}

/// Conjugate partner at `-k1`: `phi_{-k} = conj(phi_k)`.
pub fn conjugate_partner(s: &ModeState) -> ModeState {
    let n = s.len();
    ModeState {
        k1: -s.k1,
        k_trunc: s.k_trunc,
        phi: (0..n).map(|i| [s.phi[n - 1 - i][0].conj(), s.phi[n - 1 - i][1].conj()]).collect(),
        p: (0..n).map(|i| s.p[n - 1 - i].conj()).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeDecayRow {
    pub k1: i64,
    pub norm0: f64,
    /// `max_t |u_k1(t)| / (C e^{-rate t} |u_k1(0)|)`.
    pub worst_ratio: f64,
    pub fit: Option<DecayFit>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeViolation {
    pub t: f64,
    pub k1: i64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayReport {
    pub alpha: f64,
    pub rate: f64,
    pub constant: f64,
    pub times: Vec<f64>,
    /// `||u(t) - u_inf||`.
    pub norms: Vec<f64>,
    pub weighted_norms: Vec<f64>,
    pub envelope: Vec<f64>,
    pub grad_p: Vec<f64>,
    pub fit: Option<DecayFit>,
    pub per_k1: Vec<ModeDecayRow>,
    pub envelope_violation: Option<EnvelopeViolation>,
    /// First time with `||grad p|| > ||u - u_inf||`.
    pub pressure_violation: Option<f64>,
    pub trivial: bool,
}

impl DecayReport {
    pub fn check(&self) -> Result<()> {
        if let Some(v) = self.envelope_violation {
            return Err(Error::CertificationFailed(format!(
                "envelope exceeded by factor {:.6} at t = {} (k1 = {})",
                v.ratio, v.t, v.k1
            )));
        }
        if let Some(t) = self.pressure_violation {
            return Err(Error::CertificationFailed(format!("pressure gradient bound fails at t = {t}")));
        }
        Ok(())
    }
}

const ENVELOPE_SLACK: f64 = 1e-9;

/// Simulates a shear-drift configuration from mode data `u0` (one entry per
/// `k1`, including `k1 = 0`) and checks the decay envelope with rate
/// `min(nu, lambda1_min(alpha) / 4)`.
pub fn full_decay_report(cfg: &OseenConfig, u0: &[ModeState], alpha: f64, times: &[f64]) -> Result<DecayReport> {
    if cfg.drift != Drift::AnisoSin {
        return Err(Error::InvalidArgument("decay report needs the shear-drift model".into()));
    }
    check_times(times)?;
    if !(alpha > 0.0 && alpha * core::f64::consts::SQRT_2 < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha = {alpha} must lie in (0, 1/sqrt 2)")));
    }
    let nu = cfg.nu;
    let kk = cfg.k_trunc;
    for s in u0 {
        if s.k_trunc != kk || s.len() != 2 * kk + 1 || s.p.len() != s.len() {
            return Err(Error::DimensionMismatch(format!("mode data for k1 = {} does not match K = {kk}", s.k1)));
        }
        if s.k1 != 0 && !cfg.k1_range.contains(&s.k1) {
            return Err(Error::InvalidArgument(format!("k1 = {} is outside the configured range", s.k1)));
        }
        if s.divergence_defect() > 1e-12 * libm::sqrt(s.velocity_norm_sq()).max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidArgument(format!("initial data for k1 = {} is not divergence free", s.k1)));
        }
    }
    let lam = oseen::lambda1_min(alpha, nu);
    let rate = nu.min(lam / 4.0);
    let constant = sqrt((1.0 + core::f64::consts::SQRT_2 * alpha) / (1.0 - core::f64::consts::SQRT_2 * alpha));
    let nt = times.len();
    let mut sq = alloc::vec![0.0; nt];
    let mut wsq = alloc::vec![0.0; nt];
    let mut psq = alloc::vec![0.0; nt];
    let mut per_mode: Vec<(i64, Vec<f64>)> = Vec::new();
    for s in u0 {
        let mut norms = alloc::vec![0.0; nt];
        if s.k1 == 0 {
            // decoupled: phi_k' = -nu k2^2 phi_k, mean mode is u_inf
            for (ti, &t) in times.iter().enumerate() {
                let mut acc = 0.0;
                for i in 0..s.len() {
                    let k2 = s.k2(i);
                    if k2 == 0 {
                        continue;
                    }
                    let d = libm::exp(-nu * (k2 * k2) as f64 * t);
                    acc += (s.phi[i][0].norm_sqr() + s.phi[i][1].norm_sqr()) * d * d;
                }
                norms[ti] = acc * TORUS_AREA;
            }
            for ti in 0..nt {
                sq[ti] += norms[ti];
                wsq[ti] += norms[ti];
            }
        } else {
            let st = oseen::sin_staircase(s.k1, nu, kk)?;
            let y0 = ComplexVector::from_vec(oseen::vorticity_coordinates(s)?);
            let ys = evolve(&st.generator(), &y0, times)?;
            let x = oseen::weight_x(s.k1, alpha, kk)?;
            for (ti, y) in ys.iter().enumerate() {
                let ysl = y.as_slice();
                norms[ti] = y.norm_squared() * TORUS_AREA;
                sq[ti] += norms[ti];
                wsq[ti] += (y.adjoint() * &x * y)[(0, 0)].re * TORUS_AREA;
                psq[ti] += oseen::grad_p_norm_sq(s.k1, &oseen::pressure_from_y2(ysl, s.k1)?);
            }
        }
        per_mode.push((s.k1, norms.into_iter().map(sqrt).collect()));
    }
    let norms: Vec<f64> = sq.iter().map(|&v| sqrt(v)).collect();
    let n0 = norms[0];
    let trivial = !(n0 > 0.0);
    let env_at = |t: f64| constant * libm::exp(-rate * (t - times[0]));
    let envelope: Vec<f64> = times.iter().map(|&t| env_at(t) * n0).collect();
    let grad_p: Vec<f64> = psq.iter().map(|&v| sqrt(v)).collect();

    let per_k1: Vec<ModeDecayRow> = per_mode
        .iter()
        .map(|(k1, m)| {
            let worst = if m[0] > 0.0 {
                m.iter().zip(times).map(|(v, &t)| v / (env_at(t) * m[0])).fold(0.0, f64::max)
            } else {
                0.0
            };
            ModeDecayRow {
                k1: *k1,
                norm0: m[0],
                worst_ratio: worst,
                fit: fit_decay_norms(times, m).ok(),
            }
        })
        .collect();

    let mut envelope_violation = None;
    if !trivial {
        let mut worst: Option<EnvelopeViolation> = None;
        for ti in 0..nt {
            let ratio = norms[ti] / envelope[ti];
            if ratio > 1.0 + ENVELOPE_SLACK && worst.map_or(true, |w| ratio > w.ratio) {
                let k1 = per_mode
                    .iter()
                    .filter(|(_, m)| m[0] > 0.0)
                    .max_by(|a, b| {
                        let ra = a.1[ti] / a.1[0];
                        let rb = b.1[ti] / b.1[0];
                        ra.total_cmp(&rb)
                    })
                    .map_or(0, |(k, _)| *k);
                worst = Some(EnvelopeViolation {
                    t: times[ti],
                    k1,
                    ratio,
                });
            }
        }
        envelope_violation = worst;
    }
    let pressure_violation = times
        .iter()
        .zip(grad_p.iter().zip(&norms))
        .find(|(_, (g, u))| **g > **u * (1.0 + ENVELOPE_SLACK) + 1e-300)
        .map(|(t, _)| *t);
    let fit = if trivial { None } else { fit_decay_norms(times, &norms).ok() };
    Ok(DecayReport {
        alpha,
        rate,
        constant,
        times: times.to_vec(),
        norms,
        weighted_norms: wsq.into_iter().map(|v| sqrt(v.max(0.0))).collect(),
        envelope,
        grad_p,
        fit,
        per_k1,
        envelope_violation,
        pressure_violation,
        trivial,
    })
}

/// Mode data of the shear-drift flow at time `t` from `u0`, with pressure
/// slaved to the vorticity coordinates.
pub fn shear_modes_at(cfg: &OseenConfig, u0: &[ModeState], t: f64) -> Result<Vec<ModeState>> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("t = {t} must be nonnegative")));
    }
    let mut out = Vec::with_capacity(u0.len());
    for s in u0 {
        if s.k1 == 0 {
            let mut m = s.clone();
            for i in 0..m.len() {
                let k2 = m.k2(i) as f64;
                let d = re(libm::exp(-cfg.nu * k2 * k2 * t));
                m.phi[i] = [m.phi[i][0] * d, m.phi[i][1] * d];
                m.p[i] = ZERO;
            }
            out.push(m);
        } else {
            let st = oseen::sin_staircase(s.k1, cfg.nu, s.k_trunc)?;
            let y0 = ComplexVector::from_vec(oseen::vorticity_coordinates(s)?);
            let y = expm(&(st.generator() * re(t))) * y0;
            let mut m = oseen::velocity_from_vorticity(s.k1, s.k_trunc, y.as_slice())?;
            m.p = oseen::pressure_from_y2(y.as_slice(), s.k1)?;
            out.push(m);
        }
    }
    Ok(out)
}

/// Uniform grid `t0, t0 + dt, ..., t1` with `n` points.
pub fn uniform_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return alloc::vec![t0];
    }
    let dt = (t1 - t0) / (n - 1) as f64;
    (0..n).map(|i| t0 + dt * i as f64).collect()
}
