use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};

use mmot::dynamics::{run_mot, sample_injected_atom, Integrator};
use mmot::measure::Region;
use mmot::rng::substream;
use mmot::scene::PaperScenario;
use mmot::{AtomState, Scenario, Vec3};

fn advance(c: &mut Criterion) {
    let mut g = c.benchmark_group("advance_1000_steps");
    for which in [PaperScenario::FreeSpace, PaperScenario::Hole0p4mm] {
        let s = Scenario::paper(which);
        let params = s.step_params(1);
        g.bench_function(which.name(), |b| {
            let mut rng = substream(1, 0);
            b.iter_batched(
                || AtomState::new(Vec3::zeros(), Vec3::new(0.05, 0.02, -0.03)),
                |mut atom| {
                    let mut integ = Integrator::new(&s, &params);
                    for _ in 0..1000 {
                        integ.advance(&mut atom, &mut rng);
                    }
                    atom
                },
                BatchSize::SmallInput,
            )
        });
    }
    g.finish();
}

fn injection(c: &mut Criterion) {
    let s = Scenario::paper(PaperScenario::Hole0p4mm);
    let mut rng = substream(2, 0);
    c.bench_function("sample_injected_atom", |b| b.iter(|| sample_injected_atom(black_box(&s), &mut rng).unwrap()));
}

fn short_run(c: &mut Criterion) {
    let mut s = Scenario::paper(PaperScenario::Hole0p4mm);
    s.vapor.injection_rate = 5e3;
    s.run.max_time = 0.01;
    let region = Region::trap_sphere(&s);
    let mut g = c.benchmark_group("run_mot");
    g.sample_size(10);
    g.bench_function("hole_10ms", |b| b.iter(|| run_mot(&s, &s.step_params(3), &region)));
    g.finish();
}

criterion_group!(benches, advance, injection, short_run);
criterion_main!(benches);
