//! Scenario loading and the MOT → PG → TOF pipeline shared by `run`, `tof`
//! and `sweep`.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};

use mmot::cooling::{run_pg_stage_with_summary, PgStageResult};
use mmot::dynamics::{run_mot_full, EventKind, MotRun, RunOptions};
use mmot::fit::{fit_loading, fit_tof, LoadingFit, TofAxis};
use mmot::measure::{cloud_diameter_fitted, count_in_region, run_tof, Cloud, Region, TofSeries};
use mmot::rng::derive_seed;
use mmot::scene::{load_scenario_with_overrides, parse_override};
use mmot::{Scenario, Vec3};

use crate::error::{invalid, Classify, CmdResult};

pub struct Inputs {
    pub text: String,
    pub overrides: Vec<(String, String)>,
    pub scenario: Scenario,
}

pub fn parse_overrides(sets: &[String]) -> CmdResult<Vec<(String, String)>> {
    sets.iter().map(|s| parse_override(s).validation()).collect()
}

pub fn read_scenario_text(path: &Path) -> CmdResult<String> {
    std::fs::read_to_string(path)
        .with_context(|| format!("cannot read scenario file {}", path.display()))
        .validation()
}

pub fn build_scenario(text: &str, overrides: &[(String, String)]) -> CmdResult<Scenario> {
    load_scenario_with_overrides(text, overrides).validation()
}

pub fn load_inputs(path: &Path, sets: &[String]) -> CmdResult<Inputs> {
    let text = read_scenario_text(path)?;
    let overrides = parse_overrides(sets)?;
    let scenario = build_scenario(&text, &overrides)
        .map_err(|e| invalid(format!("{}: {}", path.display(), e)))?;
    for w in scenario.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(Inputs { text, overrides, scenario })
}

/// SHA-256 over the scenario text, the overrides in order and any extra
/// command inputs.
pub fn inputs_hash(text: &str, overrides: &[(String, String)], extra: &[String]) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    for (k, v) in overrides {
        h.update(b"\0");
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
    }
    for e in extra {
        h.update(b"\0");
        h.update(e.as_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, Default)]
pub struct StageOptions {
    pub pg: bool,
    /// Drop times for a TOF series, s.
    pub tof_drops: Option<Vec<f64>>,
    pub trajectory_atoms: u64,
    pub trajectory_stride: u64,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitSummary {
    pub alpha_per_s: f64,
    pub alpha_std: f64,
    pub beta_per_s: f64,
    pub beta_std: f64,
    pub lifetime_s: f64,
    pub steady_state: f64,
    pub rms_residual: f64,
    pub iterations: usize,
}

impl From<&LoadingFit> for FitSummary {
    fn from(f: &LoadingFit) -> Self {
        Self {
            alpha_per_s: f.alpha,
            alpha_std: f.covariance[0][0].max(0.0).sqrt(),
            beta_per_s: f.beta,
            beta_std: f.covariance[1][1].max(0.0).sqrt(),
            lifetime_s: f.lifetime(),
            steady_state: f.steady_state,
            rms_residual: f.rms_residual,
            iterations: f.iterations,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CloudSummary {
    pub trapped: usize,
    pub trapped_weight: f64,
    /// Mean fitted 1/e² diameter along the two viewing axes, m.
    pub diameter_1e2_m: Option<f64>,
    pub in_hole_fraction: Option<f64>,
    pub temperature_h_k: f64,
    pub temperature_v_k: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TofSummary {
    pub temperature_h_k: Option<f64>,
    pub temperature_v_k: Option<f64>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub injected: u64,
    pub events: BTreeMap<String, usize>,
    /// Weighted atom count in the trap region at the end of loading. Each
    /// simulated atom carries the flux fraction below the truncation speed.
    pub final_count: f64,
    /// Simulated atoms in the trap region at the end of loading.
    pub final_raw_count: u64,
    pub loading_fit: Option<FitSummary>,
    pub loading_fit_error: Option<String>,
    pub mot_cloud: CloudSummary,
    pub pg_cloud: Option<CloudSummary>,
    pub tof: Option<TofSummary>,
}

pub struct Outcome {
    pub mot: MotRun,
    pub pg: Option<PgStageResult>,
    pub tof: Option<TofSeries>,
    pub summary: ExperimentSummary,
}

/// Axes the cloud is imaged along: the membrane in-plane axes when a device
/// is present, otherwise x and y.
fn viewing_axes(scenario: &Scenario) -> [Vec3; 2] {
    match &scenario.device {
        Some(d) => [d.edge_axis, d.plane_normal.cross(&d.edge_axis)],
        None => [Vec3::x(), Vec3::y()],
    }
}

pub fn describe_cloud(scenario: &Scenario, cloud: &Cloud) -> CloudSummary {
    let axes = viewing_axes(scenario);
    let diameters: Option<Vec<f64>> = axes.iter().map(|a| cloud_diameter_fitted(cloud, a).ok()).collect();
    let weight = cloud.total_weight();
    let in_hole_fraction = scenario.device.as_ref().filter(|_| weight > 0.0).map(|d| {
        count_in_region(cloud, &Region::hole_cylinder(d, 2.0 * d.hole_radius)) / weight
    });
    let (th, tv) = cloud.temperatures_hv(scenario.species.mass);
    CloudSummary {
        trapped: cloud.active_count(),
        trapped_weight: weight,
        diameter_1e2_m: diameters.map(|d| d.iter().sum::<f64>() / d.len() as f64),
        in_hole_fraction,
        temperature_h_k: th,
        temperature_v_k: tv,
    }
}

pub fn run_experiment(scenario: &Scenario, seed: u64, opts: &StageOptions) -> CmdResult<Outcome> {
    let region = Region::trap_sphere(scenario);
    let run_opts = RunOptions {
        trajectory_atoms: opts.trajectory_atoms,
        trajectory_stride: opts.trajectory_stride.max(1),
        workers: opts.workers,
    };
    let mot = run_mot_full(scenario, &scenario.step_params(seed), &region, &run_opts);
    let series = &mot.series;

    let mut events = BTreeMap::new();
    for k in [
        EventKind::Capture,
        EventKind::SurfaceMembrane,
        EventKind::SurfaceBridge,
        EventKind::Background,
        EventKind::Escape,
    ] {
        events.insert(k.as_str().to_string(), series.count_events(k));
    }
    let (loading_fit, loading_fit_error) = match fit_loading(&series.sample_times[1..], &series.counts_in_region[1..]) {
        Ok(f) => (Some(FitSummary::from(&f)), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let trapped = mot.final_cloud.restricted_to(&region);
    let mot_cloud = describe_cloud(scenario, &trapped);

    let pg = opts.pg.then(|| {
        let model = &scenario.force_model.sub_doppler;
        run_pg_stage_with_summary(scenario, &trapped, &scenario.pg_schedule, model, derive_seed(seed, 1), 16)
    });
    let pg_cloud = pg.as_ref().map(|p| describe_cloud(scenario, &p.cloud));

    let (tof, tof_summary) = match &opts.tof_drops {
        Some(drops) => {
            let source = pg.as_ref().map_or(&trapped, |p| &p.cloud);
            let series = run_tof(scenario, source, drops, derive_seed(seed, 2)).runtime()?;
            let mut errors = Vec::new();
            let mut fit_axis = |axis| match fit_tof(&series, scenario.species.mass, axis) {
                Ok(f) => Some(f.temperature),
                Err(e) => {
                    errors.push(format!("{axis:?}: {e}"));
                    None
                }
            };
            let summary = TofSummary {
                temperature_h_k: fit_axis(TofAxis::Horizontal),
                temperature_v_k: fit_axis(TofAxis::Vertical),
                errors,
            };
            (Some(series), Some(summary))
        }
        None => (None, None),
    };

    let summary = ExperimentSummary {
        injected: mot.injected,
        events,
        final_count: *series.counts_in_region.last().unwrap_or(&0.0),
        final_raw_count: *series.raw_counts.last().unwrap_or(&0),
        loading_fit,
        loading_fit_error,
        mot_cloud,
        pg_cloud,
        tof: tof_summary,
    };
    Ok(Outcome { mot, pg, tof, summary })
}
