//! Least-squares fits and the capture-velocity search.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constants::BOLTZMANN;
use crate::dynamics::{AtomState, Integrator};
use crate::measure::TofSeries;
use crate::rng::substream;
use crate::scene::Scenario;
use crate::Vec3;

#[derive(Debug, Clone, Error, PartialEq, Serialize, Deserialize)]
pub enum FitError {
    #[error("need at least {needed} points, got {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("all counts are zero")]
    AllZero,
    #[error("beta is not identifiable: {reason}")]
    Unidentifiable { reason: String },
    #[error("no convergence after {iterations} iterations")]
    NonConvergence { iterations: usize },
    #[error("temperature is not identifiable: fitted slope {slope} m²/s² is negative")]
    TemperatureNotIdentifiable { slope: f64 },
}

impl FitError {
    pub fn is_identifiability(&self) -> bool {
        matches!(self, FitError::Unidentifiable { .. } | FitError::TemperatureNotIdentifiable { .. } | FitError::AllZero)
    }
}

/// `N(t) = (α/β)(1 − e^{−βt})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadingFit {
    /// atoms/s
    pub alpha: f64,
    /// 1/s
    pub beta: f64,
    pub steady_state: f64,
    /// Row-major covariance of (α, β).
    pub covariance: [[f64; 2]; 2],
    pub rms_residual: f64,
    pub iterations: usize,
    /// Objective ½Σr² after each accepted step, starting at the initial guess.
    pub cost_history: Vec<f64>,
}

impl LoadingFit {
    pub fn model(&self, t: f64) -> f64 {
        loading_model(self.alpha, self.beta, t)
    }

    pub fn lifetime(&self) -> f64 {
        1.0 / self.beta
    }
}

/// `N(t) = N₀ e^{−βt}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub n0: f64,
    pub beta: f64,
    pub covariance: [[f64; 2]; 2],
    pub rms_residual: f64,
    pub iterations: usize,
    pub cost_history: Vec<f64>,
}

/// `σ²(t) = σ₀² + (k_B T/m) t²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TofFit {
    /// m
    pub sigma0: f64,
    /// K
    pub temperature: f64,
    /// Raw slope of σ² against t², m²/s².
    pub slope: f64,
    /// m²
    pub rms_residual: f64,
}

/// `N = prefactor · d^exponent`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TofAxis {
    Horizontal,
    Vertical,
}

pub fn loading_model(alpha: f64, beta: f64, t: f64) -> f64 {
    alpha * rise(beta, t) / beta
}

/// `1 − e^{−βt}`
fn rise(beta: f64, t: f64) -> f64 {
    -(-beta * t).exp_m1()
}

/// `(∂N/∂α, ∂N/∂β)` of the loading model.
pub fn loading_jacobian(alpha: f64, beta: f64, t: f64) -> [f64; 2] {
    let r = rise(beta, t);
    let e = (-beta * t).exp();
    [r / beta, alpha * (t * e / beta - r / (beta * beta))]
}

/// `(∂N/∂N₀, ∂N/∂β)` of the decay model.
pub fn decay_jacobian(n0: f64, beta: f64, t: f64) -> [f64; 2] {
    let e = (-beta * t).exp();
    [e, -n0 * t * e]
}

const MAX_ITERATIONS: usize = 200;
const STEP_TOLERANCE: f64 = 1e-10;

struct LmSolution {
    p: [f64; 2],
    cost_history: Vec<f64>,
    iterations: usize,
    jtj: Matrix2<f64>,
    ssr: f64,
}

/// Damped Gauss–Newton with Marquardt diagonal scaling for two parameters.
/// `eval` returns residuals (model − data) and their Jacobian rows.
fn levenberg_marquardt(
    p0: [f64; 2],
    eval: impl Fn(&[f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>),
    feasible: impl Fn(&[f64; 2]) -> bool,
) -> Result<LmSolution, FitError> {
    let normal_eq = |r: &[f64], j: &[[f64; 2]]| {
        let mut jtj = Matrix2::zeros();
        let mut jtr = Vector2::zeros();
        for (ri, ji) in r.iter().zip(j) {
            let jv = Vector2::new(ji[0], ji[1]);
            jtj += jv * jv.transpose();
            jtr += jv * *ri;
        }
        (jtj, jtr)
    };
    let cost = |r: &[f64]| 0.5 * r.iter().map(|x| x * x).sum::<f64>();

    let mut p = p0;
    let (mut r, mut j) = eval(&p);
    let mut c = cost(&r);
    if !c.is_finite() {
        return Err(FitError::InvalidInput("non-finite objective at the initial guess".into()));
    }
    let mut history = vec![c];
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = normal_eq(&r, &j);
        if c == 0.0 || jtr.norm() == 0.0 {
            converged = true;
            break;
        }
        let mut accepted = false;
        while lambda < 1e20 {
            let mut a = jtj;
            for k in 0..2 {
                a[(k, k)] += lambda * jtj[(k, k)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&(-jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = [p[0] + step[0], p[1] + step[1]];
            if feasible(&trial) {
                let (rt, jt) = eval(&trial);
                let ct = cost(&rt);
                if ct.is_finite() && ct <= c {
                    let rel = (0..2)
                        .map(|k| step[k].abs() / p[k].abs().max(trial[k].abs()).max(1e-300))
                        .fold(0.0, f64::max);
                    p = trial;
                    r = rt;
                    j = jt;
                    debug_assert!(ct <= c);
                    c = ct;
                    history.push(c);
                    lambda = (lambda / 10.0).max(1e-12);
                    accepted = true;
                    if rel < STEP_TOLERANCE {
                        converged = true;
                    }
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no descent direction left at machine precision
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(FitError::NonConvergence { iterations });
    }
    let (jtj, _) = normal_eq(&r, &j);
    Ok(LmSolution { p, cost_history: history, iterations, jtj, ssr: 2.0 * c })
}

fn covariance(sol: &LmSolution, n: usize) -> [[f64; 2]; 2] {
    let s2 = if n > 2 { sol.ssr / (n - 2) as f64 } else { f64::NAN };
    match sol.jtj.try_inverse() {
        Some(inv) => [[s2 * inv[(0, 0)], s2 * inv[(0, 1)]], [s2 * inv[(1, 0)], s2 * inv[(1, 1)]]],
        None => [[f64::INFINITY; 2]; 2],
    }
}

fn check_series(times: &[f64], counts: &[f64], needed: usize) -> Result<(), FitError> {
    if times.len() != counts.len() {
        return Err(FitError::InvalidInput(format!("{} times but {} counts", times.len(), counts.len())));
    }
    if times.len() < needed {
        return Err(FitError::TooFewPoints { needed, found: times.len() });
    }
    if times.iter().chain(counts).any(|x| !x.is_finite()) {
        return Err(FitError::InvalidInput("non-finite value".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(FitError::InvalidInput("times must be strictly increasing".into()));
    }
    if counts.iter().any(|c| *c < 0.0) {
        return Err(FitError::InvalidInput("counts must be nonnegative".into()));
    }
    if counts.iter().all(|c| *c == 0.0) {
        return Err(FitError::AllZero);
    }
    let max = counts.iter().cloned().fold(f64::MIN, f64::max);
    let min = counts.iter().cloned().fold(f64::MAX, f64::min);
    if max - min <= 1e-12 * max {
        return Err(FitError::Unidentifiable { reason: "data are flat".into() });
    }
    Ok(())
}

fn check_span(times: &[f64], beta: f64) -> Result<(), FitError> {
    let span = times[times.len() - 1] - times[0];
    if span < 0.5 / beta {
        return Err(FitError::Unidentifiable {
            reason: format!("data span {span:.3e} s is shorter than 0.5/beta = {:.3e} s", 0.5 / beta),
        });
    }
    Ok(())
}

fn rms(ssr: f64, n: usize) -> f64 {
    (ssr / n as f64).sqrt()
}

/// Fits the loading curve by damped Gauss–Newton.
pub fn fit_loading(times: &[f64], counts: &[f64]) -> Result<LoadingFit, FitError> {
    check_series(times, counts, 5)?;
    let max = counts.iter().cloned().fold(0.0, f64::max);
    let half = 0.5 * max;
    let i = counts.iter().position(|c| *c >= half).unwrap();
    let t_half = if i == 0 {
        times[0]
    } else {
        let (t0, t1, c0, c1) = (times[i - 1], times[i], counts[i - 1], counts[i]);
        t0 + (t1 - t0) * (half - c0) / (c1 - c0)
    };
    let min_dt = times.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let beta0 = 1.0 / t_half.max(min_dt);
    let p0 = [beta0 * max, beta0];

    let sol = levenberg_marquardt(
        p0,
        |p| {
            let r = times.iter().zip(counts).map(|(&t, &y)| loading_model(p[0], p[1], t) - y).collect();
            let j = times.iter().map(|&t| loading_jacobian(p[0], p[1], t)).collect();
            (r, j)
        },
        |p| p[0] >= 0.0 && p[1] > 0.0 && p[1].is_finite(),
    )?;
    let [alpha, beta] = sol.p;
    check_span(times, beta)?;
    Ok(LoadingFit {
        alpha,
        beta,
        steady_state: alpha / beta,
        covariance: covariance(&sol, times.len()),
        rms_residual: rms(sol.ssr, times.len()),
        iterations: sol.iterations,
        cost_history: sol.cost_history,
    })
}

/// Fits a single exponential decay, initialised from a log-linear fit.
pub fn fit_decay(times: &[f64], counts: &[f64]) -> Result<DecayFit, FitError> {
    check_series(times, counts, 3)?;
    let (lt, lc): (Vec<f64>, Vec<f64>) =
        times.iter().zip(counts).filter(|(_, c)| **c > 0.0).map(|(t, c)| (*t, c.ln())).unzip();
    let span = times[times.len() - 1] - times[0];
    let (n0, beta0) = match linear_fit(&lt, &lc) {
        Some(l) if l.slope < 0.0 => (l.intercept.exp(), -l.slope),
        _ => (counts[0].max(1e-300), 1.0 / span),
    };
    let sol = levenberg_marquardt(
        [n0, beta0],
        |p| {
            let r = times.iter().zip(counts).map(|(&t, &y)| p[0] * (-p[1] * t).exp() - y).collect();
            let j = times.iter().map(|&t| decay_jacobian(p[0], p[1], t)).collect();
            (r, j)
        },
        |p| p[0] >= 0.0 && p[1] > 0.0 && p[1].is_finite(),
    )?;
    let [n0, beta] = sol.p;
    check_span(times, beta)?;
    Ok(DecayFit {
        n0,
        beta,
        covariance: covariance(&sol, times.len()),
        rms_residual: rms(sol.ssr, times.len()),
        iterations: sol.iterations,
        cost_history: sol.cost_history,
    })
}

#[derive(Debug, Clone, Copy)]
struct LinearFit {
    intercept: f64,
    slope: f64,
    ssr: f64,
    sst: f64,
}

/// Ordinary least squares `y = a + b x`; `None` for fewer than two points or
/// zero spread in `x`.
fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len();
    if n < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let sst = y.iter().map(|b| (b - my).powi(2)).sum();
    Some(LinearFit { intercept, slope, ssr, sst })
}

/// Temperature from cloud widths (1/e² radii) against drop time.
pub fn fit_tof(series: &TofSeries, mass: f64, axis: TofAxis) -> Result<TofFit, FitError> {
    let widths = match axis {
        TofAxis::Horizontal => &series.widths_h,
        TofAxis::Vertical => &series.widths_v,
    };
    let (t2, s2): (Vec<f64>, Vec<f64>) = series
        .drop_times
        .iter()
        .zip(widths)
        .filter(|(t, w)| t.is_finite() && w.is_finite())
        .map(|(t, w)| (t * t, (0.5 * w).powi(2)))
        .unzip();
    if t2.len() < 3 {
        return Err(FitError::TooFewPoints { needed: 3, found: t2.len() });
    }
    let l = linear_fit(&t2, &s2).ok_or_else(|| FitError::InvalidInput("drop times must differ".into()))?;
    let t2_max = t2.iter().cloned().fold(0.0, f64::max);
    let s2_scale = s2.iter().cloned().fold(0.0, f64::max);
    // expansion below rounding noise is a static cloud
    let slope = if l.slope.abs() * t2_max <= 1e-9 * s2_scale {
        0.0
    } else if l.slope < 0.0 {
        return Err(FitError::TemperatureNotIdentifiable { slope: l.slope });
    } else {
        l.slope
    };
    Ok(TofFit {
        sigma0: l.intercept.max(0.0).sqrt(),
        temperature: slope * mass / BOLTZMANN,
        slope: l.slope,
        rms_residual: rms(l.ssr, t2.len()),
    })
}

/// Power law by ordinary least squares in log–log space.
pub fn fit_power_law(diameters: &[f64], counts: &[f64]) -> Result<PowerLawFit, FitError> {
    if diameters.len() != counts.len() {
        return Err(FitError::InvalidInput("length mismatch".into()));
    }
    if diameters.len() < 2 {
        return Err(FitError::TooFewPoints { needed: 2, found: diameters.len() });
    }
    if diameters.iter().chain(counts).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(FitError::InvalidInput("power-law inputs must be strictly positive".into()));
    }
    let lx: Vec<f64> = diameters.iter().map(|d| d.ln()).collect();
    let ly: Vec<f64> = counts.iter().map(|c| c.ln()).collect();
    let l = linear_fit(&lx, &ly).ok_or_else(|| FitError::InvalidInput("diameters must differ".into()))?;
    let r_squared = if l.sst > 0.0 { 1.0 - l.ssr / l.sst } else { 1.0 };
    Ok(PowerLawFit { exponent: l.slope, prefactor: l.intercept.exp(), r_squared })
}

/// Gaussian `amplitude · exp(−(x − center)²/2σ²)` fitted to a histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub center: f64,
    pub sigma: f64,
    /// Peak probability density.
    pub amplitude: f64,
    pub rms_residual: f64,
}

fn weighted_median(pairs: &mut [(f64, f64)]) -> f64 {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let mut acc = 0.0;
    for &(x, w) in pairs.iter() {
        acc += w;
        if acc >= 0.5 * total {
            return x;
        }
    }
    pairs[pairs.len() - 1].0
}

/// Fits a Gaussian to the weighted histogram of `samples`.
///
/// The centre is fixed at the weighted median; the histogram spans ±3
/// robust standard deviations (1.4826 × median absolute deviation) in
/// `bins` bins, and (amplitude, σ) are fitted to the normalised density.
/// Outlying samples beyond the histogram range therefore do not bias σ.
pub fn fit_gaussian_histogram(samples: &[f64], weights: &[f64], bins: usize) -> Result<GaussianFit, FitError> {
    if samples.len() != weights.len() {
        return Err(FitError::InvalidInput("length mismatch".into()));
    }
    if samples.len() < 3 || bins < 3 {
        return Err(FitError::TooFewPoints { needed: 3, found: samples.len().min(bins) });
    }
    if samples.iter().chain(weights).any(|v| !v.is_finite()) || weights.iter().any(|w| *w <= 0.0) {
        return Err(FitError::InvalidInput("samples must be finite with positive weights".into()));
    }
    let mut pairs: Vec<(f64, f64)> = samples.iter().cloned().zip(weights.iter().cloned()).collect();
    let center = weighted_median(&mut pairs);
    let mut dev: Vec<(f64, f64)> = pairs.iter().map(|&(x, w)| ((x - center).abs(), w)).collect();
    let robust = 1.4826 * weighted_median(&mut dev);
    if robust == 0.0 {
        return Ok(GaussianFit { center, sigma: 0.0, amplitude: f64::INFINITY, rms_residual: 0.0 });
    }
    let half = 3.0 * robust;
    let width = 2.0 * half / bins as f64;
    let total: f64 = weights.iter().sum();
    let mut hist = vec![0.0; bins];
    for &(x, w) in &pairs {
        let u = (x - center + half) / width;
        if u >= 0.0 && u < bins as f64 {
            hist[u as usize] += w;
        }
    }
    let xs: Vec<f64> = (0..bins).map(|i| -half + (i as f64 + 0.5) * width).collect();
    let ys: Vec<f64> = hist.iter().map(|h| h / (total * width)).collect();
    let amp0 = 1.0 / (robust * (2.0 * std::f64::consts::PI).sqrt());
    let sol = levenberg_marquardt(
        [amp0, robust],
        |p| {
            let mut r = Vec::with_capacity(bins);
            let mut j = Vec::with_capacity(bins);
            for (&x, &y) in xs.iter().zip(&ys) {
                let e = (-x * x / (2.0 * p[1] * p[1])).exp();
                r.push(p[0] * e - y);
                j.push([e, p[0] * e * x * x / (p[1] * p[1] * p[1])]);
            }
            (r, j)
        },
        |p| p[0] > 0.0 && p[1] > 0.0,
    )?;
    Ok(GaussianFit { center, sigma: sol.p[1], amplitude: sol.p[0], rms_residual: rms(sol.ssr, bins) })
}

/// Capture test: an atom counts as captured once it has stayed inside a
/// sphere of `radius` around the trap centre for `dwell`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaptureCriteria {
    /// m
    pub radius: f64,
    /// s
    pub dwell: f64,
    /// Give up after this much simulated time, s.
    pub max_time: f64,
}

impl Default for CaptureCriteria {
    fn default() -> Self {
        Self { radius: 100e-6, dwell: 10e-3, max_time: 0.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureResult {
    /// m/s
    pub v_c: f64,
    pub direction: Vec3,
    /// Captured at `lo`, not captured at `hi`, m/s.
    pub bracket: (f64, f64),
    /// False when no tested speed was captured; `v_c` is then 0.
    pub captured_any: bool,
    /// True when the atom is captured even at the top of the search range.
    pub saturated: bool,
    pub iterations: usize,
}

/// Noise-free single-atom test launched from the injection sphere towards the
/// trap centre along `direction`.
pub fn is_captured(scenario: &Scenario, direction: &Vec3, speed: f64, criteria: &CaptureCriteria) -> bool {
    let dir = direction.normalize();
    let center = scenario.trap_center();
    let params = scenario.step_params(0);
    let mut integ = Integrator::new(scenario, &params).deterministic();
    let mut rng = substream(0, 0);
    let mut atom = AtomState::new(center - dir * scenario.vapor.injection_radius, dir * speed);
    let r2 = criteria.radius * criteria.radius;
    let steps = (criteria.max_time / params.dt).ceil() as u64;
    let dwell_steps = (criteria.dwell / params.dt).round() as u64;
    let mut inside = 0u64;
    for _ in 0..steps {
        integ.advance(&mut atom, &mut rng);
        if !atom.is_active() {
            return false;
        }
        if (atom.position - center).norm_squared() <= r2 {
            inside += 1;
            if inside >= dwell_steps {
                return true;
            }
        } else {
            inside = 0;
        }
    }
    false
}

/// Number of bisection steps needed to shrink `[0, v_max]` below `tolerance`.
pub fn bisection_steps(v_max: f64, tolerance: f64) -> usize {
    (v_max / tolerance).log2().ceil().max(0.0) as usize
}

/// Bisects the launch speed on `[0, v_max]` for the capture boundary, with
/// `v_max` the vapour truncation speed. The bracket halves each iteration.
pub fn capture_velocity(scenario: &Scenario, direction: &Vec3, tolerance: f64) -> Result<CaptureResult, FitError> {
    capture_velocity_with(scenario, direction, tolerance, &CaptureCriteria::default())
}

pub fn capture_velocity_with(
    scenario: &Scenario,
    direction: &Vec3,
    tolerance: f64,
    criteria: &CaptureCriteria,
) -> Result<CaptureResult, FitError> {
    if !(tolerance > 0.0) {
        return Err(FitError::InvalidInput("tolerance must be > 0".into()));
    }
    if !(direction.norm() > 0.0) {
        return Err(FitError::InvalidInput("direction must be nonzero".into()));
    }
    let dir = direction.normalize();
    let v_max = scenario.vapor.truncation_speed.unwrap_or(crate::scene::PAPER_TRUNCATION_SPEED);
    if is_captured(scenario, &dir, v_max, criteria) {
        return Ok(CaptureResult {
            v_c: v_max,
            direction: dir,
            bracket: (v_max, v_max),
            captured_any: true,
            saturated: true,
            iterations: 0,
        });
    }
    let (mut lo, mut hi) = (0.0, v_max);
    let mut captured_any = false;
    let n = bisection_steps(v_max, tolerance);
    for _ in 0..n {
        let mid = 0.5 * (lo + hi);
        if is_captured(scenario, &dir, mid, criteria) {
            lo = mid;
            captured_any = true;
        } else {
            hi = mid;
        }
    }
    let v_c = if captured_any { lo } else { 0.0 };
    Ok(CaptureResult { v_c, direction: dir, bracket: (lo, hi), captured_any, saturated: false, iterations: n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::PaperScenario;
    use rand::Rng;

    fn synth(alpha: f64, beta: f64) -> (Vec<f64>, Vec<f64>) {
        let t: Vec<f64> = (0..50).map(|i| 10.0 * (i + 1) as f64 / 50.0).collect();
        let n = t.iter().map(|&t| loading_model(alpha, beta, t)).collect();
        (t, n)
    }

    #[test]
    fn loading_noiseless_recovery() {
        let (t, n) = synth(100.0, 0.5);
        let f = fit_loading(&t, &n).unwrap();
        assert!((f.alpha / 100.0 - 1.0).abs() < 1e-6);
        assert!((f.beta / 0.5 - 1.0).abs() < 1e-6);
        assert!(f.cost_history.windows(2).all(|w| w[1] <= w[0]));
        // model identities
        assert!((f.model(1e4) - f.steady_state).abs() < 1e-9 * f.steady_state);
        let h = 1e-7;
        assert!(((f.model(h) / h) / f.alpha - 1.0).abs() < 1e-6);
    }

    #[test]
    fn loading_is_scale_equivariant() {
        let (t, n) = synth(100.0, 0.5);
        let a = fit_loading(&t, &n).unwrap();
        let n3: Vec<f64> = n.iter().map(|x| x * 37.0).collect();
        let b = fit_loading(&t, &n3).unwrap();
        assert!((b.alpha / (37.0 * a.alpha) - 1.0).abs() < 1e-9);
        assert!((b.beta / a.beta - 1.0).abs() < 1e-9);
    }

    #[test]
    fn loading_jacobian_matches_differences() {
        let mut rng = substream(9, 0);
        for _ in 0..50 {
            let a = 10f64.powf(rng.gen_range(0.0..4.0));
            let b = 10f64.powf(rng.gen_range(-2.0..1.0));
            let t = rng.gen_range(0.01..10.0);
            let j = loading_jacobian(a, b, t);
            let ha = 1e-6 * a;
            let hb = 1e-6 * b;
            let da = (loading_model(a + ha, b, t) - loading_model(a - ha, b, t)) / (2.0 * ha);
            let db = (loading_model(a, b + hb, t) - loading_model(a, b - hb, t)) / (2.0 * hb);
            assert!((j[0] - da).abs() <= 1e-6 * da.abs());
            assert!((j[1] - db).abs() <= 1e-6 * db.abs().max(1e-12 * a * t * t));
        }
    }

    #[test]
    fn all_zero_and_flat_rejected() {
        let t: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(fit_loading(&t, &[0.0; 10]).unwrap_err(), FitError::AllZero);
        assert!(matches!(fit_decay(&t, &[5.0; 10]), Err(FitError::Unidentifiable { .. })));
        assert!(matches!(fit_loading(&t, &[5.0; 10]), Err(FitError::Unidentifiable { .. })));
        assert!(matches!(fit_loading(&t[..3], &[1.0, 2.0, 3.0]), Err(FitError::TooFewPoints { .. })));
    }

    #[test]
    fn short_span_is_unidentifiable() {
        // pure linear growth: β → 0
        let t: Vec<f64> = (1..=10).map(|i| i as f64 * 1e-3).collect();
        let n: Vec<f64> = t.iter().map(|t| 100.0 * t).collect();
        assert!(matches!(fit_loading(&t, &n), Err(FitError::Unidentifiable { .. })));
    }

    #[test]
    fn decay_noiseless_and_cross_check() {
        let t: Vec<f64> = (0..40).map(|i| i as f64 * 0.05).collect();
        let n: Vec<f64> = t.iter().map(|t| 1000.0 * (-2.0 * t).exp()).collect();
        let f = fit_decay(&t, &n).unwrap();
        assert!((f.n0 / 1000.0 - 1.0).abs() < 1e-8 && (f.beta / 2.0 - 1.0).abs() < 1e-8);

        let t1: Vec<f64> = (1..=40).map(|i| i as f64 * 0.05).collect();
        let l: Vec<f64> = t1.iter().map(|&t| loading_model(300.0, 2.0, t)).collect();
        let lf = fit_loading(&t1, &l).unwrap();
        assert!((lf.beta / f.beta - 1.0).abs() < 0.01);
    }

    #[test]
    fn decay_jacobian_matches_differences() {
        let mut rng = substream(10, 0);
        for _ in 0..50 {
            let n0 = rng.gen_range(1.0..1e4);
            let b = rng.gen_range(0.01..10.0);
            let t = rng.gen_range(0.0..2.0);
            let j = decay_jacobian(n0, b, t);
            let f = |n0: f64, b: f64| n0 * (-b * t).exp();
            let (hn, hb) = (1e-6 * n0, 1e-6 * b);
            let dn = (f(n0 + hn, b) - f(n0 - hn, b)) / (2.0 * hn);
            let db = (f(n0, b + hb) - f(n0, b - hb)) / (2.0 * hb);
            assert!((j[0] - dn).abs() <= 1e-6 * dn.abs());
            assert!((j[1] - db).abs() <= 1e-6 * db.abs().max(1e-12));
        }
    }

    fn tof_series(t_k: f64, sigma0: f64) -> TofSeries {
        let m = crate::scene::AtomSpecies::cesium_d2().mass;
        let drop_times: Vec<f64> = (0..8).map(|i| i as f64 * 1e-3).collect();
        let w: Vec<f64> = drop_times.iter().map(|t| 2.0 * (sigma0 * sigma0 + BOLTZMANN * t_k / m * t * t).sqrt()).collect();
        TofSeries { drop_times, widths_h: w.clone(), widths_v: w, survivors: vec![1; 8], survivor_weight: vec![1.0; 8] }
    }

    #[test]
    fn tof_exact() {
        let m = crate::scene::AtomSpecies::cesium_d2().mass;
        let f = fit_tof(&tof_series(10e-6, 50e-6), m, TofAxis::Horizontal).unwrap();
        assert!((f.temperature / 10e-6 - 1.0).abs() < 1e-9);
        assert!((f.sigma0 / 50e-6 - 1.0).abs() < 1e-9);
        let f0 = fit_tof(&tof_series(0.0, 50e-6), m, TofAxis::Vertical).unwrap();
        assert_eq!(f0.temperature, 0.0);
    }

    #[test]
    fn tof_negative_slope_reported() {
        let m = crate::scene::AtomSpecies::cesium_d2().mass;
        let mut s = tof_series(10e-6, 50e-6);
        s.widths_h.reverse();
        assert!(matches!(fit_tof(&s, m, TofAxis::Horizontal), Err(FitError::TemperatureNotIdentifiable { .. })));
    }

    #[test]
    fn power_laws() {
        let d: [f64; 4] = [0.4e-3, 0.6e-3, 1.0e-3, 3.8e-3];
        for p in [3.6, 6.0, 0.0] {
            let n: Vec<f64> = d.iter().map(|x| 7.0 * x.powf(p)).collect();
            let f = fit_power_law(&d, &n).unwrap();
            assert!((f.exponent - p).abs() < 1e-9, "{p}: {}", f.exponent);
        }
        assert!(fit_power_law(&[1.0, -1.0], &[1.0, 1.0]).is_err());
        assert!(fit_power_law(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn gaussian_histogram_matches_moment_estimator() {
        use rand_distr::{Distribution, Normal};
        let normal = Normal::new(3e-6, 45e-6).unwrap();
        let mut rng = substream(21, 0);
        let x: Vec<f64> = (0..10_000).map(|_| normal.sample(&mut rng)).collect();
        let w = vec![1.0; x.len()];
        let f = fit_gaussian_histogram(&x, &w, 30).unwrap();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / x.len() as f64).sqrt();
        assert!((f.sigma / sd - 1.0).abs() < 0.03, "{} vs {sd}", f.sigma);
    }

    #[test]
    fn bisection_step_count() {
        assert_eq!(bisection_steps(25.0, 0.05), 9);
        assert_eq!(bisection_steps(1.0, 1.0), 0);
    }

    #[test]
    fn zero_power_gives_zero_capture_velocity() {
        let mut s = Scenario::paper(PaperScenario::FreeSpace);
        s.beams.iter_mut().for_each(|b| b.power = 0.0);
        let r = capture_velocity(&s, &Vec3::x(), 1.0).unwrap();
        assert_eq!(r.v_c, 0.0);
        assert!(!r.captured_any);
        assert!(r.bracket.1 - r.bracket.0 <= 1.0);
    }
}
