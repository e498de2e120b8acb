//! Run configuration: a flat JSON object merged over a scenario preset.

use crate::error::RunError;
use mechstate::conditional::OpticalInput;
use mechstate::params::PhysicalParams;
use mechstate::plant::PhotonMode;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};

pub const DEFAULT_GRID_N: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    LargeScale,
    SmallScale,
    Custom,
}

impl Scenario {
    pub fn parse(s: &str) -> Result<Self, RunError> {
        match s {
            "large_scale" => Ok(Scenario::LargeScale),
            "small_scale" => Ok(Scenario::SmallScale),
            "custom" => Ok(Scenario::Custom),
            _ => Err(RunError::Config(format!(
                "unknown scenario `{s}`; expected large_scale, small_scale or custom"
            ))),
        }
    }
}

/// How the photon-mode outcome `Z` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum OutcomePolicy {
    MostProbable,
    Sample { seed: u64 },
    Explicit { z_re: f64, z_im: f64 },
}

/// Keys accepted in the configuration file. Every key is optional; the
/// scenario supplies defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub scenario: Option<String>,
    pub lambda_opt: Option<f64>,
    pub finesse: Option<f64>,
    pub mass: Option<f64>,
    pub omega_m: Option<f64>,
    pub q_m: Option<f64>,
    pub temperature: Option<f64>,
    pub tau: Option<f64>,
    pub pump_power: Option<f64>,
    pub omega_0: Option<f64>,
    pub gamma_f: Option<f64>,
    pub omega_f: Option<f64>,
    /// Homodyne angle; `pi / 2` reads the phase quadrature.
    pub theta: Option<f64>,
    /// `single_photon`, `vacuum` or `coherent`.
    pub optical_input: Option<String>,
    pub zeta_re: Option<f64>,
    pub zeta_im: Option<f64>,
    /// Cut the photon off from detector and oscillator.
    pub decouple_photon: Option<bool>,
    /// `most_probable`, `sample` or `explicit`.
    pub outcome: Option<String>,
    pub seed: Option<u64>,
    pub z_re: Option<f64>,
    pub z_im: Option<f64>,
    pub grid_n: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

/// Fully resolved configuration, echoed into the summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub params: PhysicalParams,
    pub photon: PhotonMode,
    pub theta: f64,
    pub optical_input: OpticalInput,
    pub decouple_photon: bool,
    pub outcome: OutcomePolicy,
    pub grid_n: usize,
    /// Not echoed, so runs into different directories stay byte-identical.
    #[serde(skip)]
    pub out_dir: PathBuf,
}

/// Reads and resolves a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig, RunError> {
    resolve(read_raw(path)?)
}

pub fn read_raw(path: &Path) -> Result<RawConfig, RunError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_raw(&text)
}

pub fn parse_raw(text: &str) -> Result<RawConfig, RunError> {
    serde_json::from_str(text).map_err(|e| RunError::Config(format!("invalid config: {e}")))
}

/// Merges `raw` over its scenario preset and checks every field.
pub fn resolve(raw: RawConfig) -> Result<RunConfig, RunError> {
    let scenario = Scenario::parse(raw.scenario.as_deref().unwrap_or("custom"))?;
    let (params, photon) = match scenario {
        Scenario::LargeScale => {
            let p = PhysicalParams::large_scale();
            (Some(p), Some(PhotonMode::large_scale()))
        }
        Scenario::SmallScale => {
            let p = PhysicalParams::small_scale();
            (Some(p), None)
        }
        Scenario::Custom => (None, None),
    };

    let mut missing = Vec::new();
    let mut pick = |name: &'static str, over: Option<f64>, preset: Option<f64>| {
        let v = over.or(preset);
        if v.is_none() {
            missing.push(name);
        }
        v.unwrap_or(f64::NAN)
    };
    let p = params.as_ref();
    let merged = PhysicalParams {
        lambda_opt: pick("lambda_opt", raw.lambda_opt, p.map(|p| p.lambda_opt)),
        finesse: pick("finesse", raw.finesse, p.map(|p| p.finesse)),
        mass: pick("mass", raw.mass, p.map(|p| p.mass)),
        omega_m: pick("omega_m", raw.omega_m, p.map(|p| p.omega_m)),
        q_m: pick("q_m", raw.q_m, p.map(|p| p.q_m)),
        temperature: pick("temperature", raw.temperature, p.map(|p| p.temperature)),
        tau: pick("tau", raw.tau, p.map(|p| p.tau)),
        pump_power: pick("pump_power", raw.pump_power, p.map(|p| p.pump_power)),
        omega_0: raw.omega_0.or(p.and_then(|p| p.omega_0)),
    };
    // the small-scale photon mode follows the (possibly overridden) frequency
    let photon = photon.or_else(|| {
        (scenario == Scenario::SmallScale).then(|| PhotonMode::small_scale(merged.omega_m))
    });
    let gamma_f = pick("gamma_f", raw.gamma_f, photon.map(|m| m.gamma_f));
    let omega_f = pick("omega_f", raw.omega_f, photon.map(|m| m.omega_f));
    if !missing.is_empty() {
        return Err(RunError::Config(format!(
            "missing required fields for scenario {:?}: {}",
            scenario,
            missing.join(", ")
        )));
    }
    merged.validate().map_err(RunError::from_config)?;
    let photon = PhotonMode::new(gamma_f, omega_f).map_err(RunError::from_config)?;

    let theta = raw.theta.unwrap_or(FRAC_PI_2);
    if !theta.is_finite() {
        return Err(RunError::Config(format!(
            "theta must be finite, got {theta}"
        )));
    }

    let optical_input = match raw.optical_input.as_deref().unwrap_or("single_photon") {
        "single_photon" => OpticalInput::SinglePhoton,
        "vacuum" => OpticalInput::Vacuum,
        "coherent" => OpticalInput::Coherent {
            zeta: C64::new(raw.zeta_re.unwrap_or(0.0), raw.zeta_im.unwrap_or(0.0)),
        },
        other => {
            return Err(RunError::Config(format!(
                "unknown optical_input `{other}`; expected single_photon, vacuum or coherent"
            )))
        }
    };
    optical_input.validate().map_err(RunError::from_config)?;

    let outcome = match raw.outcome.as_deref().unwrap_or("most_probable") {
        "most_probable" => OutcomePolicy::MostProbable,
        "sample" => OutcomePolicy::Sample {
            seed: raw.seed.unwrap_or(0),
        },
        "explicit" => match (raw.z_re, raw.z_im) {
            (Some(z_re), Some(z_im)) if z_re.is_finite() && z_im.is_finite() => {
                OutcomePolicy::Explicit { z_re, z_im }
            }
            _ => {
                return Err(RunError::Config(
                    "outcome `explicit` needs finite z_re and z_im".into(),
                ))
            }
        },
        other => {
            return Err(RunError::Config(format!(
                "unknown outcome `{other}`; expected most_probable, sample or explicit"
            )))
        }
    };

    let grid_n = raw.grid_n.unwrap_or(DEFAULT_GRID_N);
    if grid_n < 8 {
        return Err(RunError::Config(format!(
            "grid_n must be at least 8, got {grid_n}"
        )));
    }

    Ok(RunConfig {
        scenario,
        params: merged,
        photon,
        theta,
        optical_input,
        decouple_photon: raw.decouple_photon.unwrap_or(false),
        outcome,
        grid_n,
        out_dir: raw.out_dir.unwrap_or_else(|| PathBuf::from("out")),
    })
}
