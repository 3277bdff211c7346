//! Subcommand runners.

use std::fs;
use std::io::Write;
use std::path::Path;

use hypoco_core::hc_index::hc_index;
use hypoco_core::lyapunov::{algorithm3, certificate_with_eps, tune_certificate};
use hypoco_core::oseen::{self, ModeState};
use hypoco_core::simulate::{full_decay_report, reconstruct_field, shear_modes_at, DecayReport, Field};
use hypoco_core::staircase::{classify_pencil, dae_hc_index, staircase_transform};
use hypoco_core::{DaeTriple, ToleranceConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::cli::{Cli, Command, Model, OseenCommand, TolArgs};
use crate::config::SimConfig;
use crate::error::{CliError, CliResult};
use crate::matrix_io::{parse_matrix, parse_triple, read_bytes, JsonMatrix, JsonTriple};
use crate::report::*;

/// Relative divergence allowed in simulated mode data.
pub const DIVERGENCE_TOL: f64 = 1e-10;

pub fn tolerances(args: &TolArgs) -> CliResult<ToleranceConfig> {
    let base = ToleranceConfig::default();
    Ok(ToleranceConfig::new(
        args.rank.unwrap_or(base.rank_rtol),
        args.psd.unwrap_or(base.psd_rtol),
        base.coercivity_rtol,
    )?)
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    match out {
        Some(p) => fs::write(p, s).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display())))?,
        None => std::io::stdout().write_all(s.as_bytes())?,
    }
    Ok(())
}

pub fn run(cli: Cli) -> CliResult<()> {
    let tol = tolerances(&cli.tol)?;
    match cli.command {
        Command::HcIndex { j, r, m_max, out } => {
            let (jb, rb) = (read_bytes(&j)?, read_bytes(&r)?);
            let jm = parse_matrix(&jb, &j)?;
            let rm = parse_matrix(&rb, &r)?;
            let rep = hc_index(&jm, &rm, m_max, &tol)?;
            let body = HcIndexBody::from(&rep);
            let agree = body.agree;
            write_json(&Envelope::new("hc-index", &tol, content_hash([jb.as_slice(), rb.as_slice()]), body), out.as_deref())?;
            if !agree {
                return Err(CliError::Invariant("the three index conditions disagree".into()));
            }
            Ok(())
        }
        Command::Staircase { triple, e, j, r, out } => {
            let (t, bytes) = match (triple, e, j, r) {
                (Some(p), ..) => {
                    let b = read_bytes(&p)?;
                    (parse_triple(&b, &p, &tol)?, vec![b])
                }
                (None, Some(e), Some(j), Some(r)) => {
                    let bs = [read_bytes(&e)?, read_bytes(&j)?, read_bytes(&r)?];
                    let t = DaeTriple::new(parse_matrix(&bs[0], &e)?, parse_matrix(&bs[1], &j)?, parse_matrix(&bs[2], &r)?, &tol)?;
                    (t, bs.into())
                }
                _ => return Err(CliError::Input("give --triple or all of --e, --j, --r".into())),
            };
            let s = staircase_transform(&t, &tol)?;
            let c = classify_pencil(&t, &tol)?;
            let dae_hc_index = dae_hc_index(&s, &tol).ok().and_then(|r| r.m_hc);
            let body = StaircaseBody {
                dims: s.dims.into(),
                blocks: StaircaseBlocks {
                    P: JsonMatrix::from_matrix(&s.p),
                    E_check: JsonMatrix::from_matrix(&s.e_check),
                    J_check: JsonMatrix::from_matrix(&s.j_check),
                    R_check: JsonMatrix::from_matrix(&s.r_check),
                },
                classification: Classification {
                    regular: c.regular,
                    dae_index: c.dae_index,
                    finite_eigenvalues: complex_pairs(&c.finite_eigenvalues),
                    negative_hypocoercive: c.negative_hypocoercive,
                    dae_hc_index,
                },
                warnings: warnings(&s.warnings),
            };
            let hash = content_hash(bytes.iter().map(Vec::as_slice));
            write_json(&Envelope::new("staircase", &tol, hash, body), out.as_deref())
        }
        Command::Lyapunov { j, r, eps, out } => {
            let (jb, rb) = (read_bytes(&j)?, read_bytes(&r)?);
            let jm = parse_matrix(&jb, &j)?;
            let rm = parse_matrix(&rb, &r)?;
            let trace = algorithm3(&jm, &rm, &tol)?;
            let a = &jm - &rm;
            let cert = match &eps {
                Some(e) => certificate_with_eps(&a, &trace, e, &tol)?,
                None => tune_certificate(&a, &trace, &tol)?,
            };
            let body = LyapunovBody {
                X: JsonMatrix::from_matrix(&cert.x),
                mu: cert.mu,
                kappa: cert.condition_number,
                constant: cert.constant(),
                eps: cert.eps.clone(),
                m_hc: trace.m_hc,
            };
            let mut inputs = vec![jb, rb];
            if let Some(e) = &eps {
                inputs.push(format!("{e:?}").into_bytes());
            }
            let hash = content_hash(inputs.iter().map(Vec::as_slice));
            write_json(&Envelope::new("lyapunov", &tol, hash, body), out.as_deref())
        }
        Command::Oseen { command } => run_oseen(command, &tol),
        Command::Simulate { config, alpha, out } => {
            let bytes = read_bytes(&config)?;
            let run = SimRun::new(&bytes, &config, alpha, tol)?;
            fs::create_dir_all(&out)?;
            write_timeseries(&run.report, &out.join("timeseries.csv"))?;
            write_field(&run.field_initial, &out.join("field_initial.csv"))?;
            write_field(&run.field_final, &out.join("field_final.csv"))?;
            let report = out.join("report.json");
            write_json(&run.envelope("simulate", &bytes, alpha), Some(&report))?;
            run.verdict()
        }
        Command::DecayReport { config, alpha, out } => {
            let bytes = read_bytes(&config)?;
            let run = SimRun::new(&bytes, &config, alpha, tol)?;
            write_json(&run.envelope("decay-report", &bytes, alpha), out.as_deref())?;
            run.verdict()
        }
    }
}

fn run_oseen(command: OseenCommand, tol: &ToleranceConfig) -> CliResult<()> {
    match command {
        OseenCommand::Build {
            model,
            k1,
            k2,
            k_trunc,
            nu,
            b,
            out,
        } => {
            let b: [f64; 2] = b
                .as_slice()
                .try_into()
                .map_err(|_| CliError::Input(format!("--b needs two components, got {}", b.len())))?;
            let t = match model {
                Model::Iso => oseen::build_isotropic_mode([k1, k2], b, nu)?,
                Model::Const => oseen::build_aniso_const_mode([k1, k2], b, nu)?,
                Model::Sin => oseen::build_aniso_sin_system(k1, nu, k_trunc)?,
            };
            write_json(&JsonTriple::from_triple(&t), out.as_deref())
        }
        OseenCommand::Quant {
            nu,
            k1_max,
            k_trunc,
            alpha,
            out,
        } => {
            if nu.is_empty() || k_trunc.is_empty() || k1_max < 1 {
                return Err(CliError::Input("empty sweep: need at least one nu, one K and k1-max >= 1".into()));
            }
            let jobs: Vec<(f64, usize)> = nu.iter().flat_map(|&v| k_trunc.iter().map(move |&k| (v, k))).collect();
            let bodies = jobs
                .par_iter()
                .map(|&(v, k)| {
                    let mut q = oseen::quant_report(v, k1_max, k)?;
                    if let Some(a) = &alpha {
                        q.lambda1_min = a.iter().map(|&x| (x, oseen::lambda1_min(x, v))).collect();
                        q.minors = a
                            .iter()
                            .flat_map(|&x| (1..=k1_max).map(move |k1| (k1, x, oseen::q_minors(k1, x, v))))
                            .collect();
                    }
                    Ok::<_, hypoco_core::Error>(QuantBody::from(&q))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let holds = bodies.iter().all(|b| b.kappa_bound_holds);
            let key = format!("nu={nu:?};k1_max={k1_max};K={k_trunc:?};alpha={alpha:?}");
            write_json(&Envelope::new("oseen quant", tol, content_hash([key.as_bytes()]), bodies), out.as_deref())?;
            if !holds {
                return Err(CliError::Certification("kappa >= nu/100 fails for some truncation".into()));
            }
            Ok(())
        }
    }
}

struct SimRun {
    cfg: SimConfig,
    tol: ToleranceConfig,
    report: DecayReport,
    field_initial: Field,
    field_final: Field,
    max_divergence: f64,
}

fn relative_divergence(modes: &[ModeState]) -> f64 {
    let scale = modes
        .iter()
        .map(|m| m.velocity_norm_sq().sqrt())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    modes.iter().map(|m| m.divergence_defect()).fold(0.0, f64::max) / scale
}

impl SimRun {
    fn new(bytes: &[u8], path: &Path, alpha: Option<f64>, tol: ToleranceConfig) -> CliResult<Self> {
        let mut cfg: SimConfig =
            serde_json::from_slice(bytes).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        if alpha.is_some() {
            cfg.alpha = alpha;
        }
        let tol = match &cfg.tolerances {
            Some(o) => o.apply(tol)?,
            None => tol,
        };
        let oc = cfg.oseen()?;
        let alpha = cfg.alpha()?;
        let times = cfg.times()?;
        let u0 = cfg.initial_modes()?;
        let report = full_decay_report(&oc, &u0, alpha, &times)?;
        let t_end = *times.last().expect("at least two times");
        let start = shear_modes_at(&oc, &u0, 0.0)?;
        let end = shear_modes_at(&oc, &u0, t_end)?;
        let max_divergence = relative_divergence(&start).max(relative_divergence(&end));
        Ok(Self {
            field_initial: reconstruct_field(&start, cfg.grid_n)?,
            field_final: reconstruct_field(&end, cfg.grid_n)?,
            cfg,
            tol,
            report,
            max_divergence,
        })
    }

    fn envelope(&self, command: &'static str, bytes: &[u8], alpha: Option<f64>) -> Envelope<DecayBody> {
        let body = DecayBody::new(self.cfg.nu, self.cfg.k_trunc, &self.report, self.max_divergence);
        let flag = alpha.map(|a| a.to_bits().to_le_bytes().to_vec()).unwrap_or_default();
        Envelope::new(command, &self.tol, content_hash([bytes, flag.as_slice()]), body)
    }

    fn verdict(&self) -> CliResult<()> {
        if self.max_divergence > DIVERGENCE_TOL {
            return Err(CliError::Invariant(format!(
                "divergence defect {:e} exceeds {DIVERGENCE_TOL:e}",
                self.max_divergence
            )));
        }
        self.report.check()?;
        Ok(())
    }
}

fn write_timeseries(r: &DecayReport, path: &Path) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "norm", "weighted_norm", "envelope", "grad_p"])?;
    for i in 0..r.times.len() {
        w.serialize((r.times[i], r.norms[i], r.weighted_norms[i], r.envelope[i], r.grad_p[i]))?;
    }
    w.flush()?;
    Ok(())
}

fn write_field(f: &Field, path: &Path) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x1", "x2", "u1", "u2", "p"])?;
    for i in 0..f.n {
        for j in 0..f.n {
            let k = i * f.n + j;
            w.serialize((f.coord(i), f.coord(j), f.u1[k], f.u2[k], f.p[k]))?;
        }
    }
    w.flush()?;
    Ok(())
}
