use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand_distr::{Distribution, Normal};

use mmot::fit::{fit_gaussian_histogram, fit_loading, fit_tof, loading_model, TofAxis};
use mmot::rng::substream;
use mmot::scene::AtomSpecies;
use mmot::TofSeries;

fn loading(c: &mut Criterion) {
    let mut rng = substream(4, 0);
    let noise = Normal::new(0.0, 0.01).unwrap();
    let t: Vec<f64> = (1..=200).map(|i| i as f64 * 5e-3).collect();
    let n: Vec<f64> = t.iter().map(|&t| loading_model(1.2e4, 3.65, t) * (1.0 + noise.sample(&mut rng))).collect();
    c.bench_function("fit_loading_200", |b| b.iter(|| fit_loading(black_box(&t), black_box(&n)).unwrap()));
}

fn tof(c: &mut Criterion) {
    let mass = AtomSpecies::cesium_d2().mass;
    let drop_times: Vec<f64> = (0..8).map(|i| i as f64 * 1e-3).collect();
    let width = |t: f64, temp: f64| 2.0 * (60e-6f64.powi(2) + mmot::constants::BOLTZMANN * temp / mass * t * t).sqrt();
    let series = TofSeries {
        widths_h: drop_times.iter().map(|&t| width(t, 10e-6)).collect(),
        widths_v: drop_times.iter().map(|&t| width(t, 12e-6)).collect(),
        survivors: vec![1000; drop_times.len()],
        survivor_weight: vec![1.0; drop_times.len()],
        drop_times,
    };
    c.bench_function("fit_tof", |b| b.iter(|| fit_tof(black_box(&series), mass, TofAxis::Horizontal).unwrap()));
}

fn histogram(c: &mut Criterion) {
    let mut rng = substream(5, 0);
    let dist = Normal::new(1e-4, 5e-5).unwrap();
    let x: Vec<f64> = (0..5000).map(|_| dist.sample(&mut rng)).collect();
    let w = vec![1.0; x.len()];
    c.bench_function("fit_gaussian_histogram_5000", |b| {
        b.iter(|| fit_gaussian_histogram(black_box(&x), black_box(&w), 40).unwrap())
    });
}

criterion_group!(benches, loading, tof, histogram);
criterion_main!(benches);
