//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! The MOT runs behind criteria 3 to 5 are shared, so the whole gate takes a
//! few minutes in an optimised build on one core.

use std::process::ExitCode;
use std::time::Instant;

use rand_distr::{Distribution, Normal, Uniform};

use mmot::constants::BOLTZMANN;
use mmot::cooling::run_pg_stage_with_summary;
use mmot::dynamics::{run_mot_full, Integrator, MotRun, RunOptions, StepParams};
use mmot::fit::{
    capture_velocity, decay_jacobian, fit_loading, fit_power_law, fit_tof, loading_jacobian, loading_model, TofAxis,
};
use mmot::io::{write_events_csv, write_loading_csv};
use mmot::measure::{cloud_diameter_fitted, count_in_region, Cloud, Region, TofSeries};
use mmot::rng::substream;
use mmot::scene::{beam_intensity, PaperScenario, Scenario};
use mmot::{AtomState, Vec3};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn criterion_1_fit_oracles() -> Outcome {
    let start = Instant::now();
    let (alpha, beta) = (1.2e4, 3.65);
    let t: Vec<f64> = (1..=50).map(|i| i as f64 * 0.02).collect();
    let clean: Vec<f64> = t.iter().map(|&t| loading_model(alpha, beta, t)).collect();
    let f = fit_loading(&t, &clean).expect("noiseless fit");
    let noiseless = rel(f.alpha, alpha).max(rel(f.beta, beta));

    let (mut ea, mut eb) = (Vec::new(), Vec::new());
    for trial in 0..100 {
        let mut rng = substream(11, trial);
        let noise = Normal::new(0.0, 0.01).unwrap();
        let y: Vec<f64> = clean.iter().map(|n| n * (1.0 + noise.sample(&mut rng))).collect();
        match fit_loading(&t, &y) {
            Ok(f) => {
                ea.push(rel(f.alpha, alpha));
                eb.push(rel(f.beta, beta));
            }
            Err(_) => {
                ea.push(f64::INFINITY);
                eb.push(f64::INFINITY);
            }
        }
    }
    let (ma, mb) = (median(ea), median(eb));

    let mass = mmot::scene::AtomSpecies::cesium_d2().mass;
    let drop_times: Vec<f64> = (0..8).map(|i| i as f64 * 1.5e-3).collect();
    let w: Vec<f64> = drop_times
        .iter()
        .map(|t| 2.0 * (60e-6f64.powi(2) + BOLTZMANN * 10e-6 / mass * t * t).sqrt())
        .collect();
    let n = drop_times.len();
    let tof = TofSeries {
        drop_times,
        widths_h: w.clone(),
        widths_v: w,
        survivors: vec![1000; n],
        survivor_weight: vec![1000.0; n],
    };
    let th = fit_tof(&tof, mass, TofAxis::Horizontal).map(|f| f.temperature).unwrap_or(f64::NAN);
    let tv = fit_tof(&tof, mass, TofAxis::Vertical).map(|f| f.temperature).unwrap_or(f64::NAN);
    let tof_err = rel(th, 10e-6).max(rel(tv, 10e-6));

    let d = [0.4e-3, 0.6e-3, 1.0e-3, 3.8e-3];
    let mut pl_err: f64 = 0.0;
    for p in [3.6, 6.0] {
        let c: Vec<f64> = d.iter().map(|x: &f64| 5e3 * x.powf(p)).collect();
        let e = fit_power_law(&d, &c).map(|f| (f.exponent - p).abs()).unwrap_or(f64::INFINITY);
        pl_err = pl_err.max(e);
    }
    let elapsed = start.elapsed().as_secs_f64();

    let pass = noiseless < 1e-6 && ma < 0.02 && mb < 0.02 && tof_err < 1e-9 && pl_err < 1e-9 && elapsed < 10.0;
    outcome(
        pass,
        format!(
            "noiseless rel err {noiseless:.1e}; 1% noise median rel err alpha {:.2}% beta {:.2}%; \
             TOF 10 uK rel err {tof_err:.1e}; power-law exponent err {pl_err:.1e}; {elapsed:.2} s",
            ma * 100.0,
            mb * 100.0
        ),
    )
}

/// Six low-intensity beams at δ = −Γ/2 with no field and no sub-Doppler term.
fn doppler_molasses() -> Scenario {
    let mut s = Scenario::paper(PaperScenario::FreeSpace);
    let isat = s.species.saturation_intensity;
    let gamma = s.species.linewidth_gamma;
    for b in &mut s.beams {
        b.waist_radius = 20e-3;
        b.power = 0.1 * isat * std::f64::consts::PI * b.waist_radius * b.waist_radius / 2.0;
        b.detuning = -0.5 * gamma;
    }
    s.quad.gradient = 0.0;
    s.gravity = Vec3::zeros();
    s.force_model.mot_sub_doppler = false;
    s.background_loss_rate = 0.0;
    s
}

fn criterion_2_doppler_limit() -> Outcome {
    let s = doppler_molasses();
    let params = StepParams { dt: 1e-6, max_time: 1.0, escape_radius: 1.0, rng_seed: 2 };
    let mass = s.species.mass;
    let (settle, total, every) = (3000, 6000, 250);
    let mut sum_v2 = 0.0;
    let mut samples = 0usize;
    for i in 0..1000 {
        let mut rng = substream(params.rng_seed, i);
        let mut integ = Integrator::new(&s, &params);
        let mut atom = AtomState::new(Vec3::zeros(), Vec3::zeros());
        for step in 1..=total {
            integ.advance(&mut atom, &mut rng);
            if step > settle && step % every == 0 {
                sum_v2 += atom.velocity.norm_squared();
                samples += 1;
            }
        }
    }
    let t = mass * sum_v2 / (3.0 * samples as f64 * BOLTZMANN);
    let target = s.species.doppler_temperature();
    let err = rel(t, target);
    outcome(
        err <= 0.25,
        format!("T = {:.1} uK vs {:.1} uK ({:+.1}%)", t * 1e6, target * 1e6, (t / target - 1.0) * 100.0),
    )
}

struct MotStudy {
    scenario: Scenario,
    run: MotRun,
    trapped: Cloud,
}

fn mot_study(which: PaperScenario, rate: f64, max_time: f64, seed: u64) -> MotStudy {
    let mut scenario = Scenario::paper(which);
    scenario.vapor.injection_rate = rate;
    scenario.run.max_time = max_time;
    let region = Region::trap_sphere(&scenario);
    let run = run_mot_full(&scenario, &scenario.step_params(seed), &region, &RunOptions::default());
    let trapped = run.final_cloud.restricted_to(&region);
    MotStudy { scenario, run, trapped }
}

fn loading_fit(study: &MotStudy) -> Option<mmot::fit::LoadingFit> {
    let s = &study.run.series;
    fit_loading(&s.sample_times[1..], &s.counts_in_region[1..]).ok()
}

fn criterion_3_localization(hole: &MotStudy) -> Outcome {
    let dev = hole.scenario.device.as_ref().expect("hole scenario has a device");
    let cloud = &hole.trapped;
    let n = cloud.active_count();
    let cylinder = Region::hole_cylinder(dev, 2.0 * dev.hole_radius);
    let fraction = count_in_region(cloud, &cylinder) / cloud.total_weight();
    let across = dev.plane_normal.cross(&dev.edge_axis);
    let d1 = cloud_diameter_fitted(cloud, &dev.edge_axis).unwrap_or(f64::NAN);
    let d2 = cloud_diameter_fitted(cloud, &across).unwrap_or(f64::NAN);
    let d = 0.5 * (d1 + d2);
    let hole_d = 2.0 * dev.hole_radius;
    let pass = n >= 300 && fraction >= 0.8 && d < hole_d && (90e-6..=360e-6).contains(&d);
    outcome(
        pass,
        format!(
            "{n} trapped; {:.1}% in hole cylinder; 1/e2 diameter {:.0} um (axes {:.0}, {:.0}) vs hole {:.0} um, band [90, 360] um",
            fraction * 100.0,
            d * 1e6,
            d1 * 1e6,
            d2 * 1e6,
            hole_d * 1e6
        ),
    )
}

fn criterion_4_suppression(free: &MotStudy, hole: &MotStudy) -> Outcome {
    let (Some(ff), Some(fh)) = (loading_fit(free), loading_fit(hole)) else {
        return outcome(false, "loading fit failed".into());
    };
    let loading_ratio = ff.alpha / fh.alpha;
    let n_ratio = fh.steady_state / ff.steady_state;

    let mut shorter = 0;
    let mut lines = Vec::new();
    for seed in 0..10 {
        let h = mot_study(PaperScenario::Hole0p4mm, 1.5e4, 0.3, 400 + seed);
        let b = mot_study(PaperScenario::Bridged0p4mm, 1.5e4, 0.3, 400 + seed);
        let (lh, lb) = (loading_fit(&h).map(|f| f.lifetime()), loading_fit(&b).map(|f| f.lifetime()));
        if let (Some(lh), Some(lb)) = (lh, lb) {
            if lb < lh {
                shorter += 1;
            }
            lines.push(format!("{:.0}/{:.0}", lb * 1e3, lh * 1e3));
        } else {
            lines.push("fit failed".into());
        }
    }
    let pass = loading_ratio >= 2.0 && (0.05..=0.5).contains(&n_ratio) && shorter >= 9;
    outcome(
        pass,
        format!(
            "alpha free/hole = {loading_ratio:.2}; N hole/free = {n_ratio:.3}; bridged lifetime shorter in {shorter}/10 \
             (bridged/hole ms: {})",
            lines.join(" ")
        ),
    )
}

fn pg_end_temperatures(study: &MotStudy, seed: u64) -> (f64, f64, u64) {
    let s = &study.scenario;
    let out = run_pg_stage_with_summary(s, &study.trapped, &s.pg_schedule, &s.force_model.sub_doppler, seed, 2);
    let end = out.summary.last().expect("two samples");
    (end.t_h, end.t_v, end.n_active)
}

fn criterion_5_sub_doppler(free: &MotStudy, hole: &MotStudy, bridged: &MotStudy) -> Outcome {
    let (fh, fv, fn_) = pg_end_temperatures(free, 5);
    let free_mean = 0.5 * (fh + fv);
    let band = (5e-6..=20e-6).contains(&fh) && (5e-6..=20e-6).contains(&fv);
    let mut pass = band;
    let mut detail = format!("free T_H {:.2} uK T_V {:.2} uK ({fn_} atoms)", fh * 1e6, fv * 1e6);
    for (name, study) in [("hole", hole), ("bridged", bridged)] {
        let (h, v, n) = pg_end_temperatures(study, 5);
        let mean = 0.5 * (h + v);
        pass &= mean <= 1.5 * free_mean;
        detail.push_str(&format!(
            "; {name} T_H {:.2} uK T_V {:.2} uK ({n} atoms, {:.2}x free)",
            h * 1e6,
            v * 1e6,
            mean / free_mean
        ));
    }
    outcome(pass, detail)
}

fn criterion_6_determinism() -> Outcome {
    let mut s = Scenario::paper(PaperScenario::Hole0p4mm);
    s.vapor.injection_rate = 1e4;
    s.run.max_time = 0.05;
    let region = Region::trap_sphere(&s);
    let params = s.step_params(6);
    let artifacts = |workers: usize| {
        let opts = RunOptions { workers: Some(workers), ..RunOptions::default() };
        let run = run_mot_full(&s, &params, &region, &opts);
        let mut loading = Vec::new();
        let mut events = Vec::new();
        write_loading_csv(&mut loading, &run.series).unwrap();
        write_events_csv(&mut events, &run.series.events).unwrap();
        (run.series.events, loading, events)
    };
    let reference = artifacts(1);
    let same: Vec<bool> = [4, 8].iter().map(|&w| artifacts(w) == reference).collect();
    outcome(
        same.iter().all(|&b| b),
        format!("{} events; workers 4 identical: {}; workers 8 identical: {}", reference.0.len(), same[0], same[1]),
    )
}

fn criterion_7_numerics() -> Outcome {
    let mut rng = substream(7, 0);
    let u = Uniform::new(0.0, 1.0);
    let mut jac_err: f64 = 0.0;
    for _ in 0..50 {
        let a = 10f64.powf(1.0 + 4.0 * u.sample(&mut rng));
        let b = 0.1 + 20.0 * u.sample(&mut rng);
        let t = 0.01 + 2.0 * u.sample(&mut rng);
        let fd = |f: &dyn Fn(f64, f64) -> f64, p: [f64; 2]| {
            let ha = 1e-6 * p[0];
            let hb = 1e-6 * p[1];
            [
                (f(p[0] + ha, p[1]) - f(p[0] - ha, p[1])) / (2.0 * ha),
                (f(p[0], p[1] + hb) - f(p[0], p[1] - hb)) / (2.0 * hb),
            ]
        };
        let pairs = [
            (loading_jacobian(a, b, t), fd(&|a, b| loading_model(a, b, t), [a, b])),
            (decay_jacobian(a, b, t), fd(&|n0, b| n0 * (-b * t).exp(), [a, b])),
        ];
        for (exact, approx) in pairs {
            for k in 0..2 {
                jac_err = jac_err.max((exact[k] - approx[k]).abs() / exact[k].abs().max(1e-300));
            }
        }
    }

    let s = Scenario::paper(PaperScenario::FreeSpace);
    let quad = &s.quad;
    let mut div_err: f64 = 0.0;
    let h = 1e-6;
    for _ in 0..50 {
        let p = Vec3::from_fn(|_, _| (u.sample(&mut rng) - 0.5) * 10e-3);
        let mut div = 0.0;
        for k in 0..3 {
            let mut e = Vec3::zeros();
            e[k] = h;
            div += (quad.field(&(p + e))[k] - quad.field(&(p - e))[k]) / (2.0 * h);
        }
        div_err = div_err.max(div.abs() / quad.gradient);
    }

    let beam = &s.beams[2];
    let (e1, e2) = (Vec3::z(), Vec3::x());
    let half = 4.0 * beam.waist_radius;
    let cells = 800;
    let da = (2.0 * half / cells as f64).powi(2);
    let mut power = 0.0;
    for i in 0..cells {
        for j in 0..cells {
            let a = -half + (i as f64 + 0.5) * 2.0 * half / cells as f64;
            let b = -half + (j as f64 + 0.5) * 2.0 * half / cells as f64;
            power += beam_intensity(beam, None, &(e1 * a + e2 * b)) * da;
        }
    }
    let power_err = rel(power, beam.power);

    let mut dark = s.clone();
    dark.beams.iter_mut().for_each(|b| b.power = 0.0);
    let params = StepParams { dt: 1e-6, max_time: 1.0, escape_radius: 10.0, rng_seed: 0 };
    let mut integ = Integrator::new(&dark, &params).deterministic();
    let x0 = Vec3::new(1e-3, -2e-3, 0.5e-3);
    let v0 = Vec3::new(0.3, 0.1, 0.7);
    let mut atom = AtomState::new(x0, v0);
    let mut r = substream(0, 0);
    for _ in 0..10_000 {
        integ.advance(&mut atom, &mut r);
    }
    let t = 10_000.0 * params.dt;
    let exact = x0 + v0 * t + dark.gravity * (0.5 * t * t);
    let ballistic_err = (atom.position - exact).norm() / exact.norm();

    let pass = jac_err < 1e-6 && div_err < 1e-9 && power_err < 1e-3 && ballistic_err < 1e-6;
    outcome(
        pass,
        format!(
            "Jacobian rel err {jac_err:.1e}; div B / g {div_err:.1e}; beam power rel err {power_err:.1e}; \
             ballistic rel err {ballistic_err:.1e}"
        ),
    )
}

fn criterion_8_capture() -> Outcome {
    // Widen the search range past the on-axis capture velocity.
    let widen = |which| {
        let mut s = Scenario::paper(which);
        s.vapor.truncation_speed = Some(100.0);
        s
    };
    let free = widen(PaperScenario::FreeSpace);
    let hole = widen(PaperScenario::Hole0p4mm);
    let tol = 0.1;
    let vc = |s: &Scenario, dir: &Vec3| capture_velocity(s, dir, tol).expect("valid inputs");

    let mut dark = free.clone();
    dark.beams.iter_mut().for_each(|b| b.power = 0.0);
    let zero = vc(&dark, &Vec3::x());

    let sweep: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|f| {
            let mut s = free.clone();
            s.beams.iter_mut().for_each(|b| b.power *= f);
            vc(&s, &Vec3::x()).v_c
        })
        .collect();
    let monotone = sweep.windows(2).all(|w| w[1] >= w[0]);

    let dev = hole.device.as_ref().unwrap();
    let in_plane = dev.plane_normal.cross(&dev.edge_axis);
    let vf = vc(&free, &in_plane);
    let vh = vc(&hole, &in_plane);

    let pass = zero.v_c == 0.0 && !zero.captured_any && monotone && !vf.saturated && vh.v_c <= vf.v_c;
    outcome(
        pass,
        format!(
            "zero power v_c {}; power x0.5/x1/x2 v_c {:.1}/{:.1}/{:.1} m/s; in-plane v_c hole {:.1} vs free {:.1} m/s",
            zero.v_c, sweep[0], sweep[1], sweep[2], vh.v_c, vf.v_c
        ),
    )
}

fn main() -> ExitCode {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id}. {name}: {} ({:.1} s)", o.detail, start.elapsed().as_secs_f64());
        if !o.pass {
            failed += 1;
        }
    };

    report(1, "fit oracles", &mut criterion_1_fit_oracles);
    report(2, "Doppler limit", &mut criterion_2_doppler_limit);

    let start = Instant::now();
    let free = mot_study(PaperScenario::FreeSpace, 5e4, 0.3, 31);
    let hole = mot_study(PaperScenario::Hole0p4mm, 5e4, 0.3, 32);
    let bridged = mot_study(PaperScenario::Bridged0p4mm, 5e4, 0.3, 33);
    println!("       shared MOT runs: {:.1} s", start.elapsed().as_secs_f64());

    report(3, "localization", &mut || criterion_3_localization(&hole));
    report(4, "membrane suppression", &mut || criterion_4_suppression(&free, &hole));
    report(5, "sub-Doppler band", &mut || criterion_5_sub_doppler(&free, &hole, &bridged));
    report(6, "determinism", &mut criterion_6_determinism);
    report(7, "numerical hygiene", &mut criterion_7_numerics);
    report(8, "capture velocity", &mut criterion_8_capture);

    if failed == 0 {
        println!("acceptance: all 8 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 8 criteria failed");
        ExitCode::FAILURE
    }
}
