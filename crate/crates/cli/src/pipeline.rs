//! params -> plant -> kernels -> conditional state, and the files it leaves.

use crate::config::{OutcomePolicy, RunConfig};
use crate::error::RunError;
use crate::output::{self, Staged};
use mechstate::conditional::{
    most_probable_outcome, negativity_metrics, sample_outcome, ConditionalWigner,
    MeasurementOutcome, OutcomeDensity, DEFAULT_SIGMAS,
};
use mechstate::linalg::Mat2;
use mechstate::params::{
    check_thermal_condition, check_vacuum_condition, derive_scales, ConditionReport, DerivedScales,
};
use mechstate::plant::{thermal_force_density, Conditioning, PhotonKernels, PlantModel, TimeGrid};
use mechstate::simplecase::WignerOptions;
use mechstate::units::LEDGER_VERSION;
use mechstate::Exec;
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::time::Instant;

/// Identifier of the `summary.json` layout.
pub const SUMMARY_SCHEMA: &str = "mechstate-summary/1";
/// Longest kernel table written to `kernels.csv`.
pub const MAX_KERNEL_ROWS: usize = 4096;
/// Points per axis of the Z-plane table.
pub const DENSITY_POINTS: usize = 101;
/// Half-width of the Z-plane table in units of `sqrt(max eig V_L)`.
const DENSITY_HALF_WIDTH: f64 = 5.0;
/// Tolerated error in the total mass of `w[Z]`.
const MASS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct Conditions {
    pub vacuum: ConditionReport,
    pub thermal: ConditionReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct FilterSummary {
    pub v_c: Mat2,
    pub det_v_c: f64,
    pub sigma_prior: Mat2,
}

#[derive(Debug, Clone, Serialize)]
pub struct PhotonSummary {
    pub coupled: bool,
    pub c_l: C64,
    pub l_norm_sq: f64,
    pub v_l: Mat2,
    pub gamma: [C64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct OutcomeSummary {
    pub outcome: MeasurementOutcome,
    /// `point`, `line` or `plane`.
    pub support: &'static str,
    pub density_mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WignerSummary {
    pub grid_n: usize,
    pub x_range: [f64; 2],
    pub p_range: [f64; 2],
    pub integral: f64,
    pub min_w: f64,
    pub min_location: [f64; 2],
    pub negative_volume: f64,
    pub purity: f64,
    pub within_bound: bool,
    pub mean: [f64; 2],
    pub covariance: Mat2,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelSummary {
    pub dt: f64,
    pub rows: usize,
    pub horizon: f64,
    /// Largest kernel envelope at the horizon relative to its peak.
    pub tail_ratio: f64,
}

/// Contents of `summary.json`. Sections are filled stage by stage; a failed
/// run writes whatever was reached to `summary.json.partial`.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub schema: &'static str,
    pub ledger: &'static str,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived: Option<DerivedScales>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conditions: Option<Conditions>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plant: Option<PlantModel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filters: Option<FilterSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernels: Option<KernelSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub photon: Option<PhotonSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<OutcomeSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wigner: Option<WignerSummary>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorSummary {
    pub exit_code: i32,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub runtime_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub summary: Summary,
    pub runtime_seconds: f64,
}

/// Runs the whole chain and writes every output into `cfg.out_dir`.
pub fn run_pipeline(cfg: &RunConfig) -> Result<RunReport, RunError> {
    let start = Instant::now();
    std::fs::create_dir_all(&cfg.out_dir).map_err(|e| RunError::io(&cfg.out_dir, e))?;
    let mut staged = Staged::new(&cfg.out_dir);
    let mut summary = Summary {
        schema: SUMMARY_SCHEMA,
        ledger: LEDGER_VERSION,
        config: cfg.clone(),
        derived: None,
        conditions: None,
        plant: None,
        filters: None,
        kernels: None,
        photon: None,
        outcome: None,
        wigner: None,
        warnings: Vec::new(),
        error: None,
    };
    match stages(cfg, &mut summary, &mut staged) {
        Ok(()) => {
            let runtime_seconds = start.elapsed().as_secs_f64();
            staged.write_json("summary.json", &summary)?;
            staged.write_json("timing.json", &Timing { runtime_seconds })?;
            staged.commit()?;
            Ok(RunReport {
                summary,
                runtime_seconds,
            })
        }
        Err(e) => {
            summary.error = Some(ErrorSummary {
                exit_code: e.exit_code(),
                message: e.to_string(),
            });
            // keep the .partial files; a failure here must not mask `e`
            let _ = staged.write_json("summary.json", &summary);
            Err(e)
        }
    }
}

fn stages(cfg: &RunConfig, s: &mut Summary, staged: &mut Staged) -> Result<(), RunError> {
    let scales = derive_scales(&cfg.params)?;
    s.derived = Some(scales);
    s.conditions = Some(Conditions {
        vacuum: check_vacuum_condition(&scales),
        thermal: check_thermal_condition(&scales),
    });

    let plant = plant_for(cfg, &scales)?;
    s.plant = Some(plant);
    let chain = Conditioning::new(plant, cfg.photon)?;
    let v_c = chain.filters.v_c;
    s.filters = Some(FilterSummary {
        v_c,
        det_v_c: v_c.det(),
        sigma_prior: chain.filters.sigma_prior,
    });

    let photon = if cfg.decouple_photon {
        PhotonKernels::decoupled(cfg.photon)
    } else {
        chain.photon
    };
    s.photon = Some(PhotonSummary {
        coupled: !cfg.decouple_photon,
        c_l: photon.c_l,
        l_norm_sq: photon.l_norm_sq,
        v_l: photon.v_l,
        gamma: photon.gamma,
    });

    s.kernels = Some(write_kernels(&chain, &photon, staged)?);

    let density = OutcomeDensity::from_kernels(&photon)?;
    let mass = density.total_mass();
    let outcome = match cfg.outcome {
        OutcomePolicy::MostProbable => most_probable_outcome(&photon)?,
        OutcomePolicy::Sample { seed } => sample_outcome(&photon, seed)?,
        OutcomePolicy::Explicit { z_re, z_im } => {
            MeasurementOutcome::explicit(C64::new(z_re, z_im))
        }
    };
    outcome.validate()?;
    s.outcome = Some(OutcomeSummary {
        outcome,
        support: support_name(&density),
        density_mass: mass,
    });
    write_density(&density, staged)?;
    if (mass - 1.0).abs() > MASS_TOL || !mass.is_finite() {
        return Err(RunError::Invariant(format!(
            "outcome density integrates to {mass}, not 1"
        )));
    }

    let w = ConditionalWigner::new(&cfg.optical_input, &photon, v_c, &outcome)?;
    let opts = WignerOptions {
        n_x: cfg.grid_n,
        n_p: cfg.grid_n,
        sigmas: DEFAULT_SIGMAS,
        exec: Exec::default(),
    };
    let grid = w.render(&opts)?;
    output::write_wigner(staged, &grid)?;
    let m = negativity_metrics(&grid);
    s.wigner = Some(WignerSummary {
        grid_n: cfg.grid_n,
        x_range: [grid.x_axis.start, grid.x_axis.end()],
        p_range: [grid.p_axis.start, grid.p_axis.end()],
        integral: grid.integral(),
        min_w: m.min_value,
        min_location: m.min_location,
        negative_volume: m.negative_volume,
        purity: m.purity,
        within_bound: m.within_bound,
        mean: w.mean(),
        covariance: w.covariance(),
    });
    if !m.within_bound {
        // discretization can overshoot the bound on coarse grids
        s.warnings
            .push("Wigner function leaves the bound 1/(2 pi) on this grid".into());
    }
    check_finite(s)
}

fn plant_for(cfg: &RunConfig, s: &DerivedScales) -> Result<PlantModel, RunError> {
    Ok(PlantModel::new(
        s.omega_m,
        s.gamma_m,
        s.lambda_rate,
        cfg.theta,
        thermal_force_density(s.gamma_m, s.n_th),
    )?)
}

fn support_name(d: &OutcomeDensity) -> &'static str {
    match d {
        OutcomeDensity::Point => "point",
        OutcomeDensity::Line { .. } => "line",
        OutcomeDensity::Plane { .. } => "plane",
    }
}

/// Kernel table on a capped grid. At high mechanical Q the kernels ring far
/// longer than any table can hold; the tail ratio reports how much is cut.
fn write_kernels(
    chain: &Conditioning,
    photon: &PhotonKernels,
    staged: &mut Staged,
) -> Result<KernelSummary, RunError> {
    let f = &chain.filters;
    let mut rates = vec![
        chain.plant.omega_m,
        photon.mode.gamma_f,
        photon.mode.omega_f,
    ];
    let mut decays = vec![photon.mode.gamma_f];
    for k in [&f.wiener.k[0], &f.wiener.k[1], &f.whitening] {
        rates.extend(k.poles.iter().map(|p| p.norm()));
        decays.push(k.decay_rate());
    }
    let grid = TimeGrid::recommended(&rates, &decays, None)?.capped(MAX_KERNEL_ROWS);
    let sampled = f.sample(&grid);
    output::write_kernels(staged, &sampled, photon)?;
    Ok(KernelSummary {
        dt: grid.dt,
        rows: grid.len,
        horizon: grid.horizon(),
        tail_ratio: sampled.tail_ratio,
    })
}

fn write_density(d: &OutcomeDensity, staged: &mut Staged) -> Result<(), RunError> {
    let rows: Vec<[f64; 3]> = match *d {
        OutcomeDensity::Point => vec![[0.0, 0.0, 1.0]],
        OutcomeDensity::Line { dir, var, .. } => {
            let half = DENSITY_HALF_WIDTH * var.sqrt();
            let n = DENSITY_POINTS * DENSITY_POINTS;
            (0..n)
                .map(|i| {
                    let t = -half + 2.0 * half * i as f64 / (n - 1) as f64;
                    [t * dir[0], t * dir[1], d.eval_line(t)]
                })
                .collect()
        }
        OutcomeDensity::Plane { v_l, .. } => {
            let half = DENSITY_HALF_WIDTH * v_l.sym_eigenvalues()[1].sqrt();
            let axis = mechstate::Axis::centered(0.0, half, DENSITY_POINTS);
            let mut rows = Vec::with_capacity(DENSITY_POINTS * DENSITY_POINTS);
            for re in axis.points() {
                for im in axis.points() {
                    rows.push([re, im, d.eval([re, im])]);
                }
            }
            rows
        }
    };
    output::write_density(staged, support_name(d), &rows)
}

fn check_finite(s: &Summary) -> Result<(), RunError> {
    let v = serde_json::to_value(s).map_err(|e| RunError::Numerical(e.to_string()))?;
    fn walk(v: &serde_json::Value, path: &str) -> Result<(), RunError> {
        match v {
            serde_json::Value::Null => Err(RunError::Numerical(format!(
                "summary field {path} is not finite"
            ))),
            serde_json::Value::Array(a) => a
                .iter()
                .enumerate()
                .try_for_each(|(i, x)| walk(x, &format!("{path}[{i}]"))),
            serde_json::Value::Object(o) => o
                .iter()
                .try_for_each(|(k, x)| walk(x, &format!("{path}.{k}"))),
            _ => Ok(()),
        }
    }
    walk(&v, "")
}
