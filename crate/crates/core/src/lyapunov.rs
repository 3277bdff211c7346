//! Strict Lyapunov weights from the projection iteration, LMI checks, and
//! decay certificates `||x(t)|| <= C e^{-mu t} ||x(0)||`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{self, eigh, expm, fro_norm, null_space, re, spectral_norm, ComplexMatrix, ComplexVector};
use crate::types::{check_hermitian_psd, check_skew, ToleranceConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Algorithm3Trace {
    /// `Pi_0 = I, Pi_1, ..., Pi_m`, all nonzero.
    pub projections: Vec<ComplexMatrix>,
    /// `A~_0 = -J, ..., A~_m`.
    pub a_tilde: Vec<ComplexMatrix>,
    /// `B~_0 = R, ..., B~_m`.
    pub b_tilde: Vec<ComplexMatrix>,
    pub m_hc: usize,
}

fn projector(q: &ComplexMatrix) -> ComplexMatrix {
    q * q.adjoint()
}

/// Projection iteration for the pair `(J, R)`: `Pi_{j+1}` projects onto
/// `range(Pi_j) ∩ ker(B~_j^H)` until it vanishes.
pub fn algorithm3(j: &ComplexMatrix, r: &ComplexMatrix, tol: &ToleranceConfig) -> Result<Algorithm3Trace> {
    check_skew(j, "J", tol)?;
    check_hermitian_psd(r, "R", tol)?;
    let n = j.nrows();
    if r.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("J is {n}x{n}, R is {}x{}", r.nrows(), r.ncols())));
    }
    let thr = tol.rank_rtol * spectral_norm(j).max(spectral_norm(r));
    let mut basis = ComplexMatrix::identity(n, n);
    let mut projections = alloc::vec![ComplexMatrix::identity(n, n)];
    let mut a_tilde = alloc::vec![-j];
    let mut b_tilde = alloc::vec![r.clone()];
    loop {
        let k = projections.len() - 1;
        if k > n {
            return Err(Error::NoTermination(n + 1));
        }
        let kernel = null_space(&(b_tilde[k].adjoint() * &basis), thr);
        if kernel.ncols() == 0 {
            break;
        }
        if kernel.ncols() == basis.ncols() {
            return Err(Error::NoTermination(k + 1));
        }
        basis = &basis * kernel;
        let pi_next = projector(&basis);
        let a_next = &pi_next * &a_tilde[k] * &pi_next;
        let b_next = &pi_next * &a_tilde[k] * (&projections[k] - &pi_next);
        projections.push(pi_next);
        a_tilde.push(a_next);
        b_tilde.push(b_next);
    }
    let m_hc = projections.len() - 1;
    Ok(Algorithm3Trace {
        projections,
        a_tilde,
        b_tilde,
        m_hc,
    })
}

/// `X = Pi_0 + sum_j eps_j (A~_{j-1} Pi_j + Pi_j A~_{j-1}^H)`.
pub fn build_weight(trace: &Algorithm3Trace, eps: &[f64]) -> Result<ComplexMatrix> {
    if eps.len() != trace.m_hc {
        return Err(Error::DimensionMismatch(format!(
            "expected {} eps parameters, got {}",
            trace.m_hc,
            eps.len()
        )));
    }
    let mut x = trace.projections[0].clone();
    for (idx, &e) in eps.iter().enumerate() {
        let jj = idx + 1;
        let t = &trace.a_tilde[jj - 1] * &trace.projections[jj];
        x += (&t + t.adjoint()) * re(e);
    }
    Ok((&x + x.adjoint()) * re(0.5))
}

/// `lambda_max(A^H X + X A + 2 mu X)`.
pub fn lmi_margin(a: &ComplexMatrix, x: &ComplexMatrix, mu: f64) -> f64 {
    let l = a.adjoint() * x + x * a + x * re(2.0 * mu);
    eigh(&l).values.last().copied().unwrap_or(f64::NEG_INFINITY)
}

fn lmi_scale(a: &ComplexMatrix, x: &ComplexMatrix, mu: f64) -> f64 {
    let nx = spectral_norm(x);
    2.0 * spectral_norm(a) * nx + 2.0 * mu.abs() * nx
}

/// True iff `A^H X + X A + 2 mu X ⪯ 0` up to `psd_rtol` times the natural scale.
pub fn lmi_check(a: &ComplexMatrix, x: &ComplexMatrix, mu: f64, tol: &ToleranceConfig) -> bool {
    lmi_margin(a, x, mu) <= tol.psd_rtol * lmi_scale(a, x, mu)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovCertificate {
    pub x: ComplexMatrix,
    pub mu: f64,
    /// `kappa(X) = ||X|| ||X^{-1}||`.
    pub condition_number: f64,
    pub eps: Vec<f64>,
}

impl LyapunovCertificate {
    /// Envelope constant `C = sqrt(kappa(X))`.
    pub fn constant(&self) -> f64 {
        linalg::sqrt(self.condition_number)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneConfig {
    pub grid_points: usize,
    pub bisection_steps: usize,
    /// Grid bounds for each `eps_j`, in units of `1 / ||A||`.
    pub eps_lo: f64,
    pub eps_hi: f64,
    pub min_eig_floor: f64,
    pub sweeps: usize,
}

impl Default for TuneConfig {
    fn default() -> Self {
        Self {
            grid_points: 32,
            bisection_steps: 20,
            eps_lo: 1e-4,
            eps_hi: 0.5,
            min_eig_floor: 1e-6,
            sweeps: 2,
        }
    }
}

/// Negated spectral abscissa `-max Re lambda(A)`.
pub fn decay_abscissa(a: &ComplexMatrix) -> Result<f64> {
    let ev = linalg::eigenvalues(a)?;
    Ok(-ev.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

fn kappa_of(x: &ComplexMatrix) -> Option<(f64, f64)> {
    let ev = eigh(x).values;
    let (lo, hi) = (*ev.first()?, *ev.last()?);
    Some((lo, hi / lo))
}

/// Largest `mu` in `[0, mu_hi]` with the LMI satisfied, by bisection; `None`
/// if `X` is not admissible (`lambda_min(X)` too small or LMI fails at 0).
pub fn best_rate(a: &ComplexMatrix, x: &ComplexMatrix, mu_hi: f64, steps: usize, floor: f64, tol: &ToleranceConfig) -> Option<f64> {
    let (lo_eig, _) = kappa_of(x)?;
    if !(lo_eig > floor) || !lmi_check(a, x, 0.0, tol) {
        return None;
    }
    if mu_hi <= 0.0 {
        return Some(0.0);
    }
    if lmi_check(a, x, mu_hi, tol) {
        return Some(mu_hi);
    }
    let (mut lo, mut hi) = (0.0, mu_hi);
    for _ in 0..steps {
        let mid = 0.5 * (lo + hi);
        if lmi_check(a, x, mid, tol) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Certificate for externally chosen `eps`.
pub fn certificate_with_eps(a: &ComplexMatrix, trace: &Algorithm3Trace, eps: &[f64], tol: &ToleranceConfig) -> Result<LyapunovCertificate> {
    let cfg = TuneConfig::default();
    let x = build_weight(trace, eps)?;
    let mu_hi = decay_abscissa(a)?;
    let mu = best_rate(a, &x, mu_hi, cfg.bisection_steps, cfg.min_eig_floor, tol)
        .ok_or_else(|| Error::CertificationFailed("weight not admissible for the given eps".into()))?;
    let (_, kappa) = kappa_of(&x).ok_or_else(|| Error::CertificationFailed("empty system".into()))?;
    Ok(LyapunovCertificate {
        x,
        mu,
        condition_number: kappa,
        eps: eps.to_vec(),
    })
}

/// Grid search over `eps` followed by bisection on `mu`.
pub fn tune_certificate(a: &ComplexMatrix, trace: &Algorithm3Trace, tol: &ToleranceConfig) -> Result<LyapunovCertificate> {
    tune_certificate_with(a, trace, tol, &TuneConfig::default())
}

pub fn tune_certificate_with(a: &ComplexMatrix, trace: &Algorithm3Trace, tol: &ToleranceConfig, cfg: &TuneConfig) -> Result<LyapunovCertificate> {
    let m = trace.m_hc;
    let na = spectral_norm(a).max(f64::MIN_POSITIVE);
    let mu_hi = decay_abscissa(a)?;
    let grid: Vec<f64> = crate::hc_index::geometric_grid(cfg.eps_lo, cfg.eps_hi, cfg.grid_points.max(1));
    let eval = |eps: &[f64]| -> Option<f64> {
        let x = build_weight(trace, eps).ok()?;
        best_rate(a, &x, mu_hi, cfg.bisection_steps, cfg.min_eig_floor, tol)
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    let consider = |eps: Vec<f64>, best: &mut Option<(Vec<f64>, f64)>| {
        if let Some(mu) = eval(&eps) {
            if best.as_ref().map_or(true, |(_, b)| mu > *b) {
                *best = Some((eps, mu));
            }
        }
    };
    if m == 0 {
        consider(Vec::new(), &mut best);
    } else {
        // hierarchical start eps_j = delta^j / ||A||, then coordinate sweeps
        for &delta in &grid {
            let eps: Vec<f64> = (1..=m).map(|k| libm::pow(delta, k as f64) / na).collect();
            consider(eps, &mut best);
        }
        for _ in 0..cfg.sweeps {
            let Some((start, _)) = best.clone() else { break };
            for k in 0..m {
                let current = best.as_ref().map(|(e, _)| e.clone()).unwrap_or_else(|| start.clone());
                for &g in &grid {
                    let mut eps = current.clone();
                    eps[k] = g / na;
                    consider(eps, &mut best);
                }
            }
        }
    }
    let (eps, mu) = best.ok_or_else(|| Error::CertificationFailed("no admissible eps on the grid".into()))?;
    if !(mu > 0.0) {
        return Err(Error::CertificationFailed(format!("best certified rate is {mu}")));
    }
    let x = build_weight(trace, &eps)?;
    let (_, kappa) = kappa_of(&x).ok_or_else(|| Error::CertificationFailed("empty system".into()))?;
    Ok(LyapunovCertificate {
        x,
        mu,
        condition_number: kappa,
        eps,
    })
}

/// Checks `||e^{At} x0|| <= C e^{-mu t} ||x0|| (1 + 1e-9)` on the grid.
pub fn verify_envelope(a: &ComplexMatrix, cert: &LyapunovCertificate, x0: &ComplexVector, t_grid: &[f64]) -> bool {
    let n0 = x0.norm();
    let c = cert.constant();
    t_grid.iter().all(|&t| {
        let xt = expm(&(a * re(t))) * x0;
        xt.norm() <= c * libm::exp(-cert.mu * t) * n0 * (1.0 + 1e-9)
    })
}

/// Checks the projection-chain invariants of a trace.
pub fn check_trace(trace: &Algorithm3Trace, tol: f64) -> Result<()> {
    for (k, p) in trace.projections.iter().enumerate() {
        let idem = fro_norm(&(p * p - p));
        let herm = fro_norm(&(p - p.adjoint()));
        if idem > tol || herm > tol {
            return Err(Error::Invariant(format!("Pi_{k} is not an orthogonal projection")));
        }
        if k > 0 {
            let nest = fro_norm(&(p * &trace.projections[k - 1] - p));
            if nest > tol {
                return Err(Error::Invariant(format!("Pi_{k} is not nested in Pi_{}", k - 1)));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{diag_real, from_real_rows};

    fn tol() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn rot() -> ComplexMatrix {
        from_real_rows(&[&[0.0, -1.0], &[1.0, 0.0]])
    }

    #[test]
    fn coercive_terminates_immediately() {
        let tr = algorithm3(&rot(), &diag_real(&[1.0, 2.0]), &tol()).unwrap();
        assert_eq!(tr.m_hc, 0);
        let x = build_weight(&tr, &[]).unwrap();
        assert_eq!(x, ComplexMatrix::identity(2, 2));
    }

    #[test]
    fn rank_one_damping_gives_one_step() {
        let tr = algorithm3(&rot(), &diag_real(&[1.0, 0.0]), &tol()).unwrap();
        assert_eq!(tr.m_hc, 1);
        assert!(fro_norm(&(&tr.projections[1] - diag_real(&[0.0, 1.0]))) < 1e-14);
        check_trace(&tr, 1e-12).unwrap();
    }

    #[test]
    fn weight_length_mismatch() {
        let tr = algorithm3(&rot(), &diag_real(&[1.0, 0.0]), &tol()).unwrap();
        assert!(matches!(build_weight(&tr, &[]), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn non_hypocoercive_pair_does_not_terminate() {
        let z = ComplexMatrix::zeros(2, 2);
        assert!(matches!(
            algorithm3(&z, &diag_real(&[1.0, 0.0]), &tol()),
            Err(Error::NoTermination(_))
        ));
    }

    #[test]
    fn lmi_examples() {
        let a = -ComplexMatrix::identity(3, 3);
        let x = ComplexMatrix::identity(3, 3);
        assert!(lmi_check(&a, &x, 1.0, &tol()));
        assert!(!lmi_check(&a, &x, 1.01, &tol()));
    }

    #[test]
    fn tuned_certificate_for_identity_decay() {
        let a = -ComplexMatrix::identity(2, 2);
        let tr = algorithm3(&ComplexMatrix::zeros(2, 2), &ComplexMatrix::identity(2, 2), &tol()).unwrap();
        let cert = tune_certificate(&a, &tr, &tol()).unwrap();
        assert_eq!(cert.mu, 1.0);
        assert_eq!(cert.constant(), 1.0);
    }

    #[test]
    fn tuned_certificate_respects_abscissa() {
        let j = rot();
        let r = diag_real(&[1.0, 0.0]);
        let a = &j - &r;
        let tr = algorithm3(&j, &r, &tol()).unwrap();
        let cert = tune_certificate(&a, &tr, &tol()).unwrap();
        assert!(cert.mu > 0.0 && cert.mu <= 0.5 + 1e-8, "{}", cert.mu);
        let x0 = ComplexVector::from_column_slice(&[re(0.3), re(-1.0)]);
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * 0.2).collect();
        assert!(verify_envelope(&a, &cert, &x0, &grid));
    }
}
