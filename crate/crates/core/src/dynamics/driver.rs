use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::injection::sample_injected_atom;
use super::{AtomState, AtomStatus, Integrator, StepParams, SurfaceKind};
use crate::measure::{Cloud, CloudAtom, Region};
use crate::rng::{substream, ARRIVAL_STREAM};
use crate::scene::Scenario;
use rand::Rng;

/// Atoms are propagated in blocks of this many arrivals; each block runs in
/// parallel and is folded into the totals in injection order.
const BLOCK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// First entry into the counting region.
    Capture,
    SurfaceMembrane,
    SurfaceBridge,
    Background,
    Escape,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::Capture => "capture",
            EventKind::SurfaceMembrane => "surface_membrane",
            EventKind::SurfaceBridge => "surface_bridge",
            EventKind::Background => "background",
            EventKind::Escape => "escape",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Self::Capture, Self::SurfaceMembrane, Self::SurfaceBridge, Self::Background, Self::Escape]
            .into_iter()
            .find(|k| k.as_str() == s)
    }

    fn from_status(status: AtomStatus) -> Option<Self> {
        match status {
            AtomStatus::Active => None,
            AtomStatus::LostSurface(SurfaceKind::Membrane) => Some(Self::SurfaceMembrane),
            AtomStatus::LostSurface(SurfaceKind::Bridge) => Some(Self::SurfaceBridge),
            AtomStatus::LostBackground => Some(Self::Background),
            AtomStatus::Escaped => Some(Self::Escape),
        }
    }

    pub fn is_loss(self) -> bool {
        self != Self::Capture
    }
}

/// Only atoms that reached the counting region generate events: their first
/// entry, and their loss if it happens before the end of the run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub atom_index: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub atom_index: u64,
    pub time: f64,
    pub state: AtomState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotTimeSeries {
    pub sample_times: Vec<f64>,
    /// Number of simulated atoms inside the region.
    pub raw_counts: Vec<u64>,
    /// Sum of statistical weights inside the region.
    pub counts_in_region: Vec<f64>,
    pub events: Vec<Event>,
    pub region: Region,
}

impl MotTimeSeries {
    pub fn count_events(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Record trajectories of atoms with injection index below this limit.
    pub trajectory_atoms: u64,
    /// Steps between stored trajectory points.
    pub trajectory_stride: u64,
    /// Thread count; `None` uses the ambient rayon pool.
    pub workers: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct MotRun {
    pub series: MotTimeSeries,
    /// Atoms still active at `max_time`, with their weights.
    pub final_cloud: Cloud,
    pub trajectories: Vec<TrajectoryPoint>,
    pub injected: u64,
}

/// Loading run with default options.
pub fn run_mot(scenario: &Scenario, params: &StepParams, region: &Region) -> MotTimeSeries {
    run_mot_full(scenario, params, region, &RunOptions::default()).series
}

/// Injects a Poisson stream of vapour atoms over `[0, max_time]`, propagates
/// each one independently and accumulates weighted region counts at
/// `scenario.run.sample_count` evenly spaced times.
///
/// Arrival times come from a dedicated substream of `params.rng_seed`; atom
/// `i` uses substream `i`. Totals are reduced in injection order, so output
/// is bit-identical for any worker count.
pub fn run_mot_full(scenario: &Scenario, params: &StepParams, region: &Region, opts: &RunOptions) -> MotRun {
    match opts.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(|| run_inner(scenario, params, region, opts)),
        None => run_inner(scenario, params, region, opts),
    }
}

pub(crate) fn sample_times(max_time: f64, count: usize) -> Vec<f64> {
    let n = count.max(2);
    (0..n).map(|j| max_time * j as f64 / (n - 1) as f64).collect()
}

fn arrival_times(scenario: &Scenario, params: &StepParams) -> Vec<f64> {
    let rate = scenario.vapor.injection_rate;
    let mut out = Vec::new();
    if rate <= 0.0 {
        return out;
    }
    let mut rng = substream(params.rng_seed, ARRIVAL_STREAM);
    let mut t = 0.0;
    loop {
        let u: f64 = rng.gen();
        t += -(1.0 - u).ln() / rate;
        if t >= params.max_time {
            return out;
        }
        out.push(t);
    }
}

struct Outcome {
    weight: f64,
    hits: Vec<u32>,
    events: Vec<Event>,
    final_state: Option<AtomState>,
    trajectory: Vec<TrajectoryPoint>,
}

struct Ctx<'a> {
    scenario: &'a Scenario,
    params: &'a StepParams,
    region: &'a Region,
    times: &'a [f64],
    opts: &'a RunOptions,
}

fn simulate_atom(ctx: &Ctx, index: u64, t0: f64) -> Outcome {
    let Ctx { scenario, params, region, times, opts } = *ctx;
    let mut rng = substream(params.rng_seed, index);
    let injected = sample_injected_atom(scenario, &mut rng).expect("validated scenario");
    let mut atom = injected.state;
    let mut integ = Integrator::new(scenario, params);
    let record = index < opts.trajectory_atoms;
    let stride = opts.trajectory_stride.max(1);

    let mut out = Outcome { weight: injected.weight, hits: Vec::new(), events: Vec::new(), final_state: None, trajectory: Vec::new() };
    let mut j = times.partition_point(|&s| s < t0);
    let n_steps = ((params.max_time - t0) / params.dt).ceil().max(0.0) as u64;
    let mut captured = false;
    let mut k = 0u64;
    loop {
        let t = t0 + k as f64 * params.dt;
        while j < times.len() && times[j] <= t {
            if region.contains(&atom.position) {
                out.hits.push(j as u32);
            }
            j += 1;
        }
        if record && (k % stride == 0 || k == n_steps) {
            out.trajectory.push(TrajectoryPoint { atom_index: index, time: t, state: atom });
        }
        if k == n_steps {
            out.final_state = Some(atom);
            break;
        }
        integ.advance(&mut atom, &mut rng);
        k += 1;
        let t1 = t0 + k as f64 * params.dt;
        if let Some(kind) = EventKind::from_status(atom.status) {
            if captured {
                out.events.push(Event { time: t1, kind, atom_index: index });
            }
            if record {
                out.trajectory.push(TrajectoryPoint { atom_index: index, time: t1, state: atom });
            }
            break;
        }
        if !captured && region.contains(&atom.position) {
            captured = true;
            out.events.push(Event { time: t1, kind: EventKind::Capture, atom_index: index });
        }
    }
    out
}

fn run_inner(scenario: &Scenario, params: &StepParams, region: &Region, opts: &RunOptions) -> MotRun {
    let times = sample_times(params.max_time, scenario.run.sample_count);
    let arrivals = arrival_times(scenario, params);
    let ctx = Ctx { scenario, params, region, times: &times, opts };

    let mut raw = vec![0u64; times.len()];
    let mut weighted = vec![0.0; times.len()];
    let mut events = Vec::new();
    let mut cloud = Vec::new();
    let mut trajectories = Vec::new();

    for (b, block) in arrivals.chunks(BLOCK).enumerate() {
        let base = (b * BLOCK) as u64;
        let outcomes: Vec<Outcome> = block
            .par_iter()
            .enumerate()
            .map(|(i, &t0)| simulate_atom(&ctx, base + i as u64, t0))
            .collect();
        for o in outcomes {
            for &j in &o.hits {
                raw[j as usize] += 1;
                weighted[j as usize] += o.weight;
            }
            events.extend(o.events);
            if let Some(state) = o.final_state {
                cloud.push(CloudAtom { state, weight: o.weight });
            }
            trajectories.extend(o.trajectory);
        }
    }
    events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.atom_index.cmp(&b.atom_index)));

    MotRun {
        series: MotTimeSeries { sample_times: times, raw_counts: raw, counts_in_region: weighted, events, region: region.clone() },
        final_cloud: Cloud { atoms: cloud, timestamp: params.max_time },
        trajectories,
        injected: arrivals.len() as u64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::PaperScenario;

    fn short(which: PaperScenario, rate: f64) -> (Scenario, StepParams) {
        let mut s = Scenario::paper(which);
        s.vapor.injection_rate = rate;
        s.run.sample_count = 11;
        let mut p = s.step_params(17);
        p.max_time = 0.02;
        (s, p)
    }

    #[test]
    fn zero_rate_gives_zero_counts() {
        let (s, p) = short(PaperScenario::FreeSpace, 0.0);
        let series = run_mot(&s, &p, &Region::trap_sphere(&s));
        assert!(series.counts_in_region.iter().all(|c| *c == 0.0));
        assert!(series.events.is_empty());
    }

    #[test]
    fn sample_times_increase() {
        let t = sample_times(0.6, 61);
        assert_eq!(t.len(), 61);
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(*t.last().unwrap(), 0.6);
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let (s, p) = short(PaperScenario::Bridged0p4mm, 2e5);
        let region = Region::trap_sphere(&s);
        let run = |w| run_mot_full(&s, &p, &region, &RunOptions { workers: Some(w), ..Default::default() });
        let a = run(1);
        let b = run(4);
        assert_eq!(a.series, b.series);
        assert_eq!(a.final_cloud, b.final_cloud);
    }

    #[test]
    fn lost_atoms_never_recorded_after_loss() {
        let (s, p) = short(PaperScenario::Hole0p4mm, 5e4);
        let opts = RunOptions { trajectory_atoms: 400, trajectory_stride: 1, workers: None };
        let run = run_mot_full(&s, &p, &Region::trap_sphere(&s), &opts);
        let dev = s.device.as_ref().unwrap();
        let mut by_atom: std::collections::BTreeMap<u64, Vec<&TrajectoryPoint>> = Default::default();
        for pt in &run.trajectories {
            by_atom.entry(pt.atom_index).or_default().push(pt);
        }
        for pts in by_atom.values() {
            for w in pts.windows(2) {
                if w[1].state.is_active() {
                    assert!(dev.intersect_segment(&w[0].state.position, &w[1].state.position).is_none());
                }
                assert!(w[0].state.is_active());
            }
        }
    }
}
