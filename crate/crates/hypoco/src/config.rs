//! Simulation configuration files and initial data.

use hypoco_core::linalg::{c64, C64};
use hypoco_core::oseen::{self, velocity_from_vorticity, Drift, ModeState, OseenConfig};
use hypoco_core::simulate::conjugate_partner;
use hypoco_core::ToleranceConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

fn default_alpha_fraction() -> f64 {
    0.5
}

fn default_t_end() -> f64 {
    20.0
}

fn default_n_times() -> usize {
    201
}

fn default_grid_n() -> usize {
    32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Initial {
    /// `u = [0, sin x1]`.
    SinX1,
    /// Random real divergence-free field with decaying spectrum.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub rank_rtol: Option<f64>,
    pub psd_rtol: Option<f64>,
    pub coercivity_rtol: Option<f64>,
}

impl ToleranceOverrides {
    pub fn apply(&self, base: ToleranceConfig) -> CliResult<ToleranceConfig> {
        let t = ToleranceConfig::new(
            self.rank_rtol.unwrap_or(base.rank_rtol),
            self.psd_rtol.unwrap_or(base.psd_rtol),
            self.coercivity_rtol.unwrap_or(base.coercivity_rtol),
        )?;
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub nu: f64,
    #[serde(rename = "K")]
    pub k_trunc: usize,
    /// Either `k1_max` (giving `-k1_max..=k1_max` without 0) or an explicit list.
    #[serde(default)]
    pub k1_max: Option<i64>,
    #[serde(default)]
    pub k1_range: Option<Vec<i64>>,
    /// Explicit `alpha`; otherwise `alpha_fraction * alpha_min`.
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default = "default_alpha_fraction")]
    pub alpha_fraction: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_n_times")]
    pub n_times: usize,
    pub initial: Initial,
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default)]
    pub tolerances: Option<ToleranceOverrides>,
}

impl SimConfig {
    pub fn k1_range(&self) -> CliResult<Vec<i64>> {
        let range: Vec<i64> = match (&self.k1_range, self.k1_max) {
            (Some(r), None) => r.clone(),
            (None, Some(m)) => (-m..=m).filter(|&k| k != 0).collect(),
            (None, None) => return Err(CliError::Input("config needs k1_max or k1_range".into())),
            (Some(_), Some(_)) => return Err(CliError::Input("give either k1_max or k1_range, not both".into())),
        };
        if range.is_empty() {
            return Err(CliError::Input("empty sweep: the k1 range has no modes".into()));
        }
        if range.contains(&0) {
            return Err(CliError::Input("k1 = 0 modes are handled separately; remove 0 from k1_range".into()));
        }
        if range.iter().any(|k| !range.contains(&-k)) {
            return Err(CliError::Input("k1_range must be symmetric for a real field".into()));
        }
        Ok(range)
    }

    pub fn oseen(&self) -> CliResult<OseenConfig> {
        Ok(OseenConfig::new(self.nu, Drift::AnisoSin, self.k_trunc, self.k1_range()?)?)
    }

    pub fn alpha(&self) -> CliResult<f64> {
        if let Some(a) = self.alpha {
            return Ok(a);
        }
        if !(self.alpha_fraction > 0.0 && self.alpha_fraction <= 1.0) {
            return Err(CliError::Input(format!("alpha_fraction {} must lie in (0, 1]", self.alpha_fraction)));
        }
        let probe: Vec<i64> = (1..=64).collect();
        Ok(self.alpha_fraction * oseen::alpha_min(self.nu, &probe)?)
    }

    pub fn times(&self) -> CliResult<Vec<f64>> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) || self.n_times < 2 {
            return Err(CliError::Input("need t_end > 0 and n_times >= 2".into()));
        }
        Ok(hypoco_core::simulate::uniform_grid(0.0, self.t_end, self.n_times))
    }

    pub fn initial_modes(&self) -> CliResult<Vec<ModeState>> {
        let range = self.k1_range()?;
        let kt = self.k_trunc;
        match &self.initial {
            Initial::SinX1 => {
                if !range.contains(&1) {
                    return Err(CliError::Input("sin_x1 initial data needs k1 = 1 in range".into()));
                }
                if kt < 2 {
                    return Err(CliError::Input("truncation K must be at least 2".into()));
                }
                Ok(oseen::sin_x1_state(kt).into())
            }
            Initial::Random { seed } => Ok(random_field(*seed, &range, kt)),
        }
    }
}

fn cnormal(rng: &mut impl Rng) -> C64 {
    c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Mean-zero, real, divergence-free field with modes on `range` and `k1 = 0`.
pub fn random_field(seed: u64, range: &[i64], k_trunc: usize) -> Vec<ModeState> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut zero = ModeState::zeros(0, k_trunc);
    for k2 in 1..=k_trunc as i64 {
        let a = cnormal(&mut rng) / (1.0 + (k2 * k2) as f64);
        let (i, j) = (zero.idx(k2).expect("in band"), zero.idx(-k2).expect("in band"));
        zero.phi[i][0] = a;
        zero.phi[j][0] = a.conj();
    }
    let mut out = vec![zero];
    let mut pos: Vec<i64> = range.iter().copied().filter(|&k| k > 0).collect();
    pos.sort_unstable();
    for k1 in pos {
        let y: Vec<C64> = (0..2 * k_trunc + 1)
            .map(|i| {
                let k2 = i as f64 - k_trunc as f64;
                cnormal(&mut rng) / (1.0 + k2 * k2)
            })
            .collect();
        let m = velocity_from_vorticity(k1, k_trunc, &y).expect("k1 != 0");
        out.push(conjugate_partner(&m));
        out.push(m);
    }
    out
}
