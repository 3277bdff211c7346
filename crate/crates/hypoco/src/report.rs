//! Serializable report bodies and the common report envelope.

use hypoco_core::hc_index::HcIndexReport;
use hypoco_core::linalg::C64;
use hypoco_core::oseen::QuantReport;
use hypoco_core::simulate::{DecayFit, DecayReport};
use hypoco_core::staircase::{StaircaseDims, StaircaseWarning};
use hypoco_core::ToleranceConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::matrix_io::JsonMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rank_rtol: f64,
    pub psd_rtol: f64,
    pub coercivity_rtol: f64,
}

impl From<&ToleranceConfig> for Tolerances {
    fn from(t: &ToleranceConfig) -> Self {
        Self {
            rank_rtol: t.rank_rtol,
            psd_rtol: t.psd_rtol,
            coercivity_rtol: t.coercivity_rtol,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Envelope<T: Serialize> {
    pub command: &'static str,
    pub version: &'static str,
    pub tolerances: Tolerances,
    pub input_hash: String,
    pub result: T,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(command: &'static str, tol: &ToleranceConfig, input_hash: String, result: T) -> Self {
        Self {
            command,
            version: env!("CARGO_PKG_VERSION"),
            tolerances: tol.into(),
            input_hash,
            result,
        }
    }
}

/// Git-style content hash: SHA-256 over `blob <len>\0<bytes>` for each input
/// in order.
pub fn content_hash<'a>(inputs: impl IntoIterator<Item = &'a [u8]>) -> String {
    let mut h = Sha256::new();
    for bytes in inputs {
        h.update(format!("blob {}\0", bytes.len()).as_bytes());
        h.update(bytes);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// `None` for non-finite values, which JSON cannot carry.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

pub fn complex_pairs(v: &[C64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Methods {
    pub sum: bool,
    pub kalman: bool,
    pub kernel: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HcIndexBody {
    pub m_hc: Option<usize>,
    pub kappa: Option<f64>,
    pub agree: bool,
    pub methods: Methods,
    pub m_max: usize,
}

impl From<&HcIndexReport> for HcIndexBody {
    fn from(r: &HcIndexReport) -> Self {
        Self {
            m_hc: r.m_hc,
            kappa: finite(r.kappa),
            agree: r.method_agreement.all(),
            methods: Methods {
                sum: r.method_agreement.sum,
                kalman: r.method_agreement.kalman,
                kernel: r.method_agreement.kernel,
            },
            m_max: r.m_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dims {
    pub n1: usize,
    pub n2: usize,
    pub n3: usize,
    pub n4: usize,
    pub n5: usize,
}

impl From<StaircaseDims> for Dims {
    fn from(d: StaircaseDims) -> Self {
        Self {
            n1: d.n1,
            n2: d.n2,
            n3: d.n3,
            n4: d.n4,
            n5: d.n5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct StaircaseBlocks {
    pub P: JsonMatrix,
    pub E_check: JsonMatrix,
    pub J_check: JsonMatrix,
    pub R_check: JsonMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub regular: bool,
    pub dae_index: Option<u8>,
    pub finite_eigenvalues: Vec<[f64; 2]>,
    pub negative_hypocoercive: bool,
    pub dae_hc_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Warning {
    pub block: &'static str,
    pub condition: f64,
}

pub fn warnings(w: &[StaircaseWarning]) -> Vec<Warning> {
    w.iter()
        .map(|StaircaseWarning::IllConditioned { block, condition }| Warning {
            block,
            condition: *condition,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StaircaseBody {
    pub dims: Dims,
    pub blocks: StaircaseBlocks,
    pub classification: Classification,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct LyapunovBody {
    pub X: JsonMatrix,
    pub mu: f64,
    pub kappa: f64,
    pub constant: f64,
    pub eps: Vec<f64>,
    pub m_hc: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KappaRow {
    pub k1: i64,
    #[serde(rename = "K")]
    pub k_trunc: usize,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinorsRow {
    pub k1: i64,
    pub alpha: f64,
    pub minors: [f64; 5],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantBody {
    pub nu: f64,
    pub alpha_min: f64,
    pub lambda1_min: Vec<[f64; 2]>,
    pub kappa: Vec<KappaRow>,
    pub minors: Vec<MinorsRow>,
    pub kappa_bound_holds: bool,
}

impl From<&QuantReport> for QuantBody {
    fn from(q: &QuantReport) -> Self {
        Self {
            nu: q.nu,
            alpha_min: q.alpha_min,
            lambda1_min: q.lambda1_min.iter().map(|&(a, l)| [a, l]).collect(),
            kappa: q
                .kappa_trunc
                .iter()
                .map(|&(k1, k_trunc, kappa)| KappaRow { k1, k_trunc, kappa })
                .collect(),
            minors: q
                .minors
                .iter()
                .map(|&(k1, alpha, minors)| MinorsRow { k1, alpha, minors })
                .collect(),
            kappa_bound_holds: q.kappa_trunc.iter().all(|&(_, _, k)| k >= q.nu / 100.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitBody {
    pub c_fit: f64,
    pub mu_fit: f64,
    pub residual: f64,
}

impl From<&DecayFit> for FitBody {
    fn from(f: &DecayFit) -> Self {
        Self {
            c_fit: f.c_fit,
            mu_fit: f.mu_fit,
            residual: f.residual,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeRow {
    pub k1: i64,
    pub norm0: f64,
    pub worst_ratio: f64,
    /// `kappa(X_k1) = (1 + sqrt2 alpha/|k1|) / (1 - sqrt2 alpha/|k1|)`; reported only.
    pub weight_condition: Option<f64>,
    pub fit: Option<FitBody>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub t: f64,
    pub k1: i64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayBody {
    pub nu: f64,
    #[serde(rename = "K")]
    pub k_trunc: usize,
    pub alpha: f64,
    pub rate: f64,
    pub constant: f64,
    pub trivial: bool,
    pub envelope_holds: bool,
    pub pressure_bound_holds: bool,
    pub fit: Option<FitBody>,
    pub envelope_violation: Option<Violation>,
    pub pressure_violation_t: Option<f64>,
    pub per_k1: Vec<ModeRow>,
    pub max_divergence: f64,
}

impl DecayBody {
    pub fn new(nu: f64, k_trunc: usize, r: &DecayReport, max_divergence: f64) -> Self {
        Self {
            nu,
            k_trunc,
            alpha: r.alpha,
            rate: r.rate,
            constant: r.constant,
            trivial: r.trivial,
            envelope_holds: r.envelope_violation.is_none(),
            pressure_bound_holds: r.pressure_violation.is_none(),
            fit: r.fit.as_ref().map(Into::into),
            envelope_violation: r.envelope_violation.map(|v| Violation {
                t: v.t,
                k1: v.k1,
                ratio: v.ratio,
            }),
            pressure_violation_t: r.pressure_violation,
            per_k1: r
                .per_k1
                .iter()
                .map(|m| ModeRow {
                    k1: m.k1,
                    norm0: m.norm0,
                    worst_ratio: m.worst_ratio,
                    weight_condition: (m.k1 != 0).then(|| {
                        let s = std::f64::consts::SQRT_2 * r.alpha / m.k1.unsigned_abs() as f64;
                        (1.0 + s) / (1.0 - s)
                    }),
                    fit: m.fit.as_ref().map(Into::into),
                })
                .collect(),
            max_divergence,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_depends_on_order_and_content() {
        let a = content_hash([b"x".as_slice(), b"y".as_slice()]);
        let b = content_hash([b"y".as_slice(), b"x".as_slice()]);
        let c = content_hash([b"xy".as_slice()]);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn git_blob_prefix() {
        // sha256 of "blob 0\0"
        assert_eq!(
            content_hash([b"".as_slice()]),
            "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813"
        );
    }
}
