use std::path::{Path, PathBuf};

use anyhow::Context;
use rayon::prelude::*;
use serde::Serialize;

use mmot::fit::{capture_velocity, fit_decay, fit_loading, fit_power_law, fit_tof, FitError, TofAxis};
use mmot::io::{
    read_columns, read_tof_csv, write_events_csv, write_loading_csv, write_pg_summary_csv, write_tof_csv,
    write_trajectories_csv,
};
use mmot::rng::derive_seed;
use mmot::scene::{paper_scenario_document, AtomSpecies, PaperScenario, PAPER_SCENARIOS};
use mmot::Vec3;

use crate::error::{invalid, Classify, CmdResult, Failure};
use crate::experiment::{
    build_scenario, inputs_hash, load_inputs, parse_overrides, read_scenario_text, run_experiment, StageOptions,
};
use crate::manifest::{check, value_text, ExpectationResult, RunManifest};
use crate::output::{loading_gnuplot, sweep_gnuplot, tof_gnuplot, OutDir, Provenance};

fn require_seed(seed: Option<u64>) -> CmdResult<u64> {
    seed.ok_or_else(|| invalid("--seed is required for stochastic commands (no wall-clock seeding)"))
}

fn require_scenario(scenario: Option<PathBuf>) -> CmdResult<PathBuf> {
    scenario.ok_or_else(|| invalid("--scenario is required"))
}

pub fn parse_list(text: &str, what: &str) -> CmdResult<Vec<String>> {
    let items: Vec<String> = text.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(invalid(format!("empty {what} list")));
    }
    Ok(items)
}

fn parse_numbers(text: &str, what: &str) -> CmdResult<Vec<f64>> {
    parse_list(text, what)?
        .iter()
        .map(|s| s.parse::<f64>().with_context(|| format!("{what}: `{s}` is not a number")).validation())
        .collect()
}

pub fn parse_direction(text: &str) -> CmdResult<Vec3> {
    let v = parse_numbers(text, "direction")?;
    if v.len() != 3 {
        return Err(invalid(format!("direction needs three components, got {}", v.len())));
    }
    let d = Vec3::new(v[0], v[1], v[2]);
    if !(d.norm() > 0.0 && d.norm().is_finite()) {
        return Err(invalid("direction must be a finite nonzero vector"));
    }
    Ok(d.normalize())
}

fn pool(workers: Option<usize>) -> CmdResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(invalid("--workers must be at least 1"));
        }
        b = b.num_threads(n);
    }
    b.build().runtime()
}

#[derive(Debug, Clone)]
pub struct RunRequest {
    pub scenario: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub set: Vec<String>,
    pub workers: Option<usize>,
    pub manifest: Option<PathBuf>,
    pub pg: bool,
    pub tof_ms: Option<String>,
    pub trajectories: u64,
    pub trajectory_stride: u64,
}

#[derive(Serialize)]
struct RunSummary<'a> {
    provenance: Provenance,
    #[serde(flatten)]
    experiment: &'a crate::experiment::ExperimentSummary,
    artifacts: Vec<String>,
}

/// `run` and `tof`: one MOT loading run, optionally followed by PG cooling
/// and a time-of-flight series.
pub fn cmd_run(mut req: RunRequest, command: &str) -> CmdResult<()> {
    if let Some(m) = &req.manifest {
        let (manifest, scenario) = RunManifest::load(m)?;
        manifest.require_command(command)?;
        req.scenario.get_or_insert(scenario);
        req.seed.get_or_insert(manifest.seed);
        let mut set = manifest.set.clone();
        set.append(&mut req.set);
        req.set = set;
    }
    let path = require_scenario(req.scenario.clone())?;
    let seed = require_seed(req.seed)?;
    let inputs = load_inputs(&path, &req.set)?;
    let drops = match &req.tof_ms {
        Some(t) => Some(parse_numbers(t, "drop time")?.into_iter().map(|ms| ms * 1e-3).collect::<Vec<f64>>()),
        None => None,
    };
    if let Some(w) = req.workers {
        if w == 0 {
            return Err(invalid("--workers must be at least 1"));
        }
    }
    let opts = StageOptions {
        pg: req.pg,
        tof_drops: drops,
        trajectory_atoms: req.trajectories,
        trajectory_stride: req.trajectory_stride,
        workers: req.workers,
    };
    let mut out = OutDir::create(&req.out)?;
    let outcome = run_experiment(&inputs.scenario, seed, &opts)?;

    out.write_with("loading.csv", |w| Ok(write_loading_csv(w, &outcome.mot.series)?))?;
    out.write_with("events.csv", |w| Ok(write_events_csv(w, &outcome.mot.series.events)?))?;
    if req.trajectories > 0 {
        out.write_with("trajectories.csv", |w| Ok(write_trajectories_csv(w, &outcome.mot.trajectories)?))?;
    }
    let fit = outcome.summary.loading_fit.as_ref();
    out.write_text("loading.gp", &loading_gnuplot(fit.map(|f| f.alpha_per_s), fit.map(|f| f.beta_per_s)))?;
    if let Some(pg) = &outcome.pg {
        out.write_with("pg_summary.csv", |w| Ok(write_pg_summary_csv(w, &pg.summary)?))?;
    }
    if let Some(tof) = &outcome.tof {
        out.write_with("tof.csv", |w| Ok(write_tof_csv(w, tof)?))?;
        out.write_text("tof.gp", &tof_gnuplot())?;
    }

    let extra = vec![format!("seed={seed}"), format!("pg={}", req.pg), format!("tof_ms={:?}", req.tof_ms)];
    let mut prov = Provenance::new(command, inputs_hash(&inputs.text, &inputs.overrides, &extra));
    prov.scenario_path = Some(path.display().to_string());
    prov.scenario_name = Some(inputs.scenario.name.clone());
    prov.seed = Some(seed);
    prov.overrides = req.set.clone();
    let mut artifacts = out.written().to_vec();
    artifacts.push("summary.json".into());
    let summary = RunSummary { provenance: prov, experiment: &outcome.summary, artifacts };
    out.write_json("summary.json", &summary)?;

    let s = &outcome.summary;
    println!("scenario {} seed {seed}: {} injected, {} trapped", inputs.scenario.name, s.injected, s.mot_cloud.trapped);
    match (&s.loading_fit, &s.loading_fit_error) {
        (Some(f), _) => println!(
            "loading fit: alpha = {:.4e} /s, lifetime = {:.4} s, steady state = {:.4e}",
            f.alpha_per_s, f.lifetime_s, f.steady_state
        ),
        (None, Some(e)) => println!("loading fit failed: {e}"),
        _ => {}
    }
    if let Some(c) = &s.pg_cloud {
        println!(
            "after PG: {} atoms, T_H = {:.2} uK, T_V = {:.2} uK",
            c.trapped,
            c.temperature_h_k * 1e6,
            c.temperature_v_k * 1e6
        );
    }
    if let Some(t) = &s.tof {
        let show = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{:.2} uK", v * 1e6));
        println!("TOF fit: T_H = {}, T_V = {}", show(t.temperature_h_k), show(t.temperature_v_k));
    }
    println!("wrote {}", req.out.display());
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SweepRequest {
    pub scenario: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub set: Vec<String>,
    pub workers: Option<usize>,
    pub manifest: Option<PathBuf>,
    pub key: Option<String>,
    pub values: Option<String>,
    pub metrics: Option<String>,
    pub direction: String,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Metric {
    Loading,
    Pg,
    Capture,
}

fn parse_metrics(items: &[String]) -> CmdResult<Vec<Metric>> {
    items
        .iter()
        .map(|m| match m.as_str() {
            "loading" => Ok(Metric::Loading),
            "pg" => Ok(Metric::Pg),
            "capture" => Ok(Metric::Capture),
            other => Err(invalid(format!("unknown metric `{other}` (expected loading, pg or capture)"))),
        })
        .collect()
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SweepRow {
    pub value: String,
    pub seed: u64,
    pub alpha_per_s: Option<f64>,
    pub lifetime_s: Option<f64>,
    pub steady_state: Option<f64>,
    pub trapped: Option<usize>,
    pub diameter_um: Option<f64>,
    #[serde(rename = "T_H_uK")]
    pub t_h_uk: Option<f64>,
    #[serde(rename = "T_V_uK")]
    pub t_v_uk: Option<f64>,
    pub v_c_m_per_s: Option<f64>,
    pub note: String,
}

const SWEEP_COLUMNS: [&str; 8] =
    ["alpha_per_s", "lifetime_s", "steady_state", "trapped", "diameter_um", "T_H_uK", "T_V_uK", "v_c_m_per_s"];

impl SweepRow {
    fn column(&self, name: &str) -> Option<f64> {
        match name {
            "alpha_per_s" => self.alpha_per_s,
            "lifetime_s" => self.lifetime_s,
            "steady_state" => self.steady_state,
            "trapped" => self.trapped.map(|n| n as f64),
            "diameter_um" => self.diameter_um,
            "T_H_uK" => self.t_h_uk,
            "T_V_uK" => self.t_v_uk,
            "v_c_m_per_s" => self.v_c_m_per_s,
            _ => None,
        }
    }
}

#[derive(Serialize)]
struct SweepSummary {
    provenance: Provenance,
    key: String,
    values: Vec<String>,
    metrics: Vec<String>,
    rows: Vec<SweepRow>,
    expectations: Vec<ExpectationResult>,
    artifacts: Vec<String>,
}

/// One simulation per sweep value, with per-point seeds derived from the
/// base seed and the point index.
pub fn cmd_sweep(mut req: SweepRequest) -> CmdResult<()> {
    let mut expectations = Vec::new();
    if let Some(m) = &req.manifest {
        let (manifest, scenario) = RunManifest::load(m)?;
        manifest.require_command("sweep")?;
        req.scenario.get_or_insert(scenario);
        req.seed.get_or_insert(manifest.seed);
        let mut set = manifest.set.clone();
        set.append(&mut req.set);
        req.set = set;
        if let Some(sw) = &manifest.sweep {
            req.key.get_or_insert(sw.key.clone());
            if req.values.is_none() {
                req.values = Some(sw.values.iter().map(value_text).collect::<Vec<_>>().join(","));
            }
            if req.metrics.is_none() {
                req.metrics = sw.metrics.as_ref().map(|m| m.join(","));
            }
        }
        expectations = manifest.expect.clone();
    }
    let path = require_scenario(req.scenario.clone())?;
    let seed = require_seed(req.seed)?;
    let key = req.key.clone().ok_or_else(|| invalid("--key is required"))?;
    let values = parse_list(req.values.as_deref().unwrap_or(""), "sweep value")?;
    let metric_names = parse_list(req.metrics.as_deref().unwrap_or("loading,pg"), "metric")?;
    let metrics = parse_metrics(&metric_names)?;
    for e in &expectations {
        if !SWEEP_COLUMNS.contains(&e.column.as_str()) {
            return Err(invalid(format!("expectation on unknown column `{}`", e.column)));
        }
    }
    let direction = parse_direction(&req.direction)?;
    if !(req.tolerance > 0.0) {
        return Err(invalid("--tolerance must be > 0"));
    }

    let text = read_scenario_text(&path)?;
    let base = parse_overrides(&req.set)?;
    // Validate every point before spending any time simulating.
    let points = values
        .iter()
        .map(|v| {
            let mut o = base.clone();
            o.push((key.clone(), v.clone()));
            build_scenario(&text, &o).map_err(|e| invalid(format!("{key}={v}: {e}")))
        })
        .collect::<CmdResult<Vec<_>>>()?;

    let mut out = OutDir::create(&req.out)?;
    let threads = pool(req.workers)?;
    let rows: Vec<SweepRow> = threads.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                let point_seed = derive_seed(seed, i as u64);
                let mut row = SweepRow { value: values[i].clone(), seed: point_seed, ..SweepRow::default() };
                let mut notes = Vec::new();
                if metrics.contains(&Metric::Loading) || metrics.contains(&Metric::Pg) {
                    let opts = StageOptions { pg: metrics.contains(&Metric::Pg), ..StageOptions::default() };
                    match run_experiment(s, point_seed, &opts) {
                        Ok(o) => {
                            let sum = o.summary;
                            if let Some(f) = &sum.loading_fit {
                                row.alpha_per_s = Some(f.alpha_per_s);
                                row.lifetime_s = Some(f.lifetime_s);
                                row.steady_state = Some(f.steady_state);
                            }
                            if let Some(e) = sum.loading_fit_error {
                                notes.push(format!("loading fit: {e}"));
                            }
                            row.trapped = Some(sum.mot_cloud.trapped);
                            row.diameter_um = sum.mot_cloud.diameter_1e2_m.map(|d| d * 1e6);
                            if let Some(c) = sum.pg_cloud {
                                row.t_h_uk = Some(c.temperature_h_k * 1e6).filter(|t| t.is_finite());
                                row.t_v_uk = Some(c.temperature_v_k * 1e6).filter(|t| t.is_finite());
                            }
                        }
                        Err(e) => notes.push(e.to_string()),
                    }
                }
                if metrics.contains(&Metric::Capture) {
                    match capture_velocity(s, &direction, req.tolerance) {
                        Ok(r) => {
                            row.v_c_m_per_s = Some(r.v_c);
                            if r.saturated {
                                notes.push("capture search saturated at the truncation speed".into());
                            }
                        }
                        Err(e) => notes.push(format!("capture: {e}")),
                    }
                }
                row.note = notes.join("; ");
                row
            })
            .collect()
    });

    out.write_with("sweep.csv", |w| {
        let mut csv = csv::Writer::from_writer(w);
        for r in &rows {
            csv.serialize(r)?;
        }
        csv.flush()?;
        Ok(())
    })?;
    let plotted: Vec<&str> = SWEEP_COLUMNS
        .iter()
        .copied()
        .filter(|c| rows.iter().any(|r| r.column(c).is_some()))
        .collect();
    out.write_text("sweep.gp", &sweep_gnuplot(&key, &plotted))?;

    let results: Vec<ExpectationResult> = expectations
        .iter()
        .map(|e| check(e, &rows.iter().map(|r| r.column(&e.column)).collect::<Vec<_>>()))
        .collect();

    let extra: Vec<String> =
        [format!("seed={seed}"), format!("key={key}"), format!("values={}", values.join(","))].into();
    let mut prov = Provenance::new("sweep", inputs_hash(&text, &base, &extra));
    prov.scenario_path = Some(path.display().to_string());
    prov.scenario_name = points.first().map(|s| s.name.clone());
    prov.seed = Some(seed);
    prov.overrides = req.set.clone();
    let mut artifacts = out.written().to_vec();
    artifacts.push("sweep_summary.json".into());
    let summary = SweepSummary {
        provenance: prov,
        key: key.clone(),
        values: values.clone(),
        metrics: metric_names,
        rows: rows.clone(),
        expectations: results.clone(),
        artifacts,
    };
    out.write_json("sweep_summary.json", &summary)?;

    println!("sweep {key} over {} points", rows.len());
    for r in &rows {
        let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.4e}"));
        println!(
            "  {} = {}: alpha {} lifetime {} N {} T_H {} T_V {} v_c {}{}",
            key,
            r.value,
            show(r.alpha_per_s),
            show(r.lifetime_s),
            show(r.steady_state),
            show(r.t_h_uk),
            show(r.t_v_uk),
            show(r.v_c_m_per_s),
            if r.note.is_empty() { String::new() } else { format!(" ({})", r.note) }
        );
    }
    let failed = results.iter().filter(|r| !r.pass).count();
    for r in &results {
        println!("  [{}] {} {}", if r.pass { "PASS" } else { "FAIL" }, r.column, r.detail);
    }
    println!("wrote {}", req.out.display());
    if failed > 0 {
        return Err(Failure::Runtime(anyhow::anyhow!("{failed} expected band(s) not met")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    Loading,
    Decay,
    Tof,
    Powerlaw,
}

#[derive(Serialize)]
struct FitReport {
    model: FitModel,
    input: String,
    inputs_sha256: String,
    cli_version: &'static str,
    core_version: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    result: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<FitFailure>,
}

#[derive(Serialize)]
struct FitFailure {
    message: String,
    identifiability: bool,
    detail: FitError,
}

fn read_series(bytes: &[u8], names: &[[String; 2]]) -> CmdResult<(Vec<f64>, Vec<f64>)> {
    let mut last = None;
    for [x, y] in names {
        match read_columns(bytes, &[x.as_str(), y.as_str()]) {
            Ok(mut c) => {
                let y = c.pop().unwrap();
                let x = c.pop().unwrap();
                return Ok((x, y));
            }
            Err(e) => last = Some(e),
        }
    }
    Err(Failure::Validation(last.expect("at least one column set").into()))
}

/// `columns` names the x and y columns explicitly (not used for TOF).
pub fn cmd_fit(
    input: &Path,
    model: FitModel,
    out: &Path,
    mass_amu: Option<f64>,
    columns: Option<&str>,
) -> CmdResult<()> {
    let bytes = std::fs::read(input)
        .with_context(|| format!("cannot read input {}", input.display()))
        .validation()?;
    let named: Option<[String; 2]> = match columns {
        Some(c) => {
            let v = parse_list(c, "column")?;
            if v.len() != 2 {
                return Err(invalid(format!("--columns needs two names, got {}", v.len())));
            }
            if model == FitModel::Tof {
                return Err(invalid("--columns does not apply to the tof model"));
            }
            Some([v[0].clone(), v[1].clone()])
        }
        None => None,
    };
    let pick = |default: &[[&'static str; 2]]| -> Vec<[String; 2]> {
        match &named {
            Some(n) => vec![n.clone()],
            None => default.iter().map(|[a, b]| [a.to_string(), b.to_string()]).collect(),
        }
    };
    let species = AtomSpecies::cesium_d2();
    let mass = mass_amu.map_or(species.mass, |m| m * mmot::constants::AMU);
    let outcome: Result<serde_json::Value, FitError> = match model {
        FitModel::Loading | FitModel::Decay => {
            let (t, n) = read_series(&bytes, &pick(&[["time_s", "weighted_count"], ["time_s", "count"]]))
                .map_err(|e| invalid(format!("{}: {e}", input.display())))?;
            if model == FitModel::Loading {
                fit_loading(&t, &n).map(|f| serde_json::to_value(f).unwrap())
            } else {
                fit_decay(&t, &n).map(|f| serde_json::to_value(f).unwrap())
            }
        }
        FitModel::Tof => {
            let series = read_tof_csv(bytes.as_slice()).map_err(|e| invalid(format!("{}: {e}", input.display())))?;
            let h = fit_tof(&series, mass, TofAxis::Horizontal);
            let v = fit_tof(&series, mass, TofAxis::Vertical);
            match (h, v) {
                (Ok(h), Ok(v)) => Ok(serde_json::json!({ "horizontal": h, "vertical": v })),
                (Err(e), _) | (_, Err(e)) => Err(e),
            }
        }
        FitModel::Powerlaw => {
            let (d, n) = read_series(&bytes, &pick(&[["diameter", "count"]]))
                .map_err(|e| invalid(format!("{}: {e}", input.display())))?;
            fit_power_law(&d, &n).map(|f| serde_json::to_value(f).unwrap())
        }
    };

    let text = String::from_utf8_lossy(&bytes);
    let mut report = FitReport {
        model,
        input: input.display().to_string(),
        inputs_sha256: inputs_hash(&text, &[], &[format!("model={model:?}"), format!("mass={mass:e}")]),
        cli_version: env!("CARGO_PKG_VERSION"),
        core_version: mmot::VERSION,
        result: None,
        error: None,
    };
    let name = format!("fit_{}.json", serde_json::to_value(model).unwrap().as_str().unwrap());
    let mut out = OutDir::create(out)?;
    match outcome {
        Ok(v) => {
            print_headline(model, &v);
            report.result = Some(v);
            out.write_json(&name, &report)?;
            Ok(())
        }
        Err(e) => {
            let identifiability = e.is_identifiability();
            let message = e.to_string();
            report.error = Some(FitFailure { message: message.clone(), identifiability, detail: e });
            out.write_json(&name, &report)?;
            if identifiability {
                println!("unidentifiable: {message}");
            }
            Err(Failure::Runtime(anyhow::anyhow!("fit failed: {message}")))
        }
    }
}

fn print_headline(model: FitModel, v: &serde_json::Value) {
    let f = |v: &serde_json::Value, k: &str| v[k].as_f64().unwrap_or(f64::NAN);
    match model {
        FitModel::Loading => println!(
            "alpha = {:.6e} /s, beta = {:.6e} /s, steady state = {:.6e}",
            f(v, "alpha"),
            f(v, "beta"),
            f(v, "steady_state")
        ),
        FitModel::Decay => println!("N0 = {:.6e}, beta = {:.6e} /s", f(v, "n0"), f(v, "beta")),
        FitModel::Tof => println!(
            "T_H = {:.4} uK, T_V = {:.4} uK",
            f(&v["horizontal"], "temperature") * 1e6,
            f(&v["vertical"], "temperature") * 1e6
        ),
        FitModel::Powerlaw => println!(
            "exponent = {:.6}, prefactor = {:.6e}, r^2 = {:.6}",
            f(v, "exponent"),
            f(v, "prefactor"),
            f(v, "r_squared")
        ),
    }
}

#[derive(Serialize)]
struct CaptureReport {
    provenance: Provenance,
    tolerance: f64,
    result: mmot::CaptureResult,
}

/// Deterministic, so no seed is needed.
pub fn cmd_capture(
    scenario: &Path,
    set: &[String],
    out: Option<&Path>,
    direction: &str,
    tolerance: f64,
) -> CmdResult<()> {
    let inputs = load_inputs(scenario, set)?;
    let dir = parse_direction(direction)?;
    if !(tolerance > 0.0) {
        return Err(invalid("--tolerance must be > 0"));
    }
    let r = capture_velocity(&inputs.scenario, &dir, tolerance).validation()?;
    println!(
        "v_c = {:.4} m/s along [{:.4}, {:.4}, {:.4}], bracket [{:.4}, {:.4}]{}{}",
        r.v_c,
        dir.x,
        dir.y,
        dir.z,
        r.bracket.0,
        r.bracket.1,
        if r.captured_any { "" } else { ", never captured" },
        if r.saturated { ", saturated at the truncation speed" } else { "" }
    );
    if let Some(o) = out {
        let mut out = OutDir::create(o)?;
        let extra = [format!("direction={direction}"), format!("tolerance={tolerance}")];
        let mut prov = Provenance::new("capture", inputs_hash(&inputs.text, &inputs.overrides, &extra));
        prov.scenario_path = Some(scenario.display().to_string());
        prov.scenario_name = Some(inputs.scenario.name.clone());
        prov.overrides = set.to_vec();
        out.write_json("capture.json", &CaptureReport { provenance: prov, tolerance, result: r })?;
    }
    Ok(())
}

pub fn cmd_scenario_gen(name: &str, out: Option<&Path>) -> CmdResult<()> {
    let which: Vec<PaperScenario> = if name == "all" {
        PAPER_SCENARIOS.to_vec()
    } else {
        let known: Vec<&str> = PAPER_SCENARIOS.iter().map(|s| s.name()).collect();
        vec![PaperScenario::from_name(name)
            .ok_or_else(|| invalid(format!("unknown scenario `{name}` (known: all, {})", known.join(", "))))?]
    };
    match out {
        Some(o) => {
            let mut out = OutDir::create(o)?;
            for w in which {
                let text = paper_scenario_document(w).to_json() + "\n";
                out.write_text(&format!("{}.json", w.name()), &text)?;
                println!("wrote {}", o.join(format!("{}.json", w.name())).display());
            }
        }
        None => {
            if which.len() != 1 {
                return Err(invalid("`all` needs --out"));
            }
            println!("{}", paper_scenario_document(which[0]).to_json());
        }
    }
    Ok(())
}
