//! Calibrates the sub-Doppler equilibrium constant C_pg.
//!
//! Loads the free-space scenario, runs the default PG stage and rescales
//! C_pg until the mean end temperature is 10 μK. The end temperature is
//! proportional to C_pg once the stage reaches equilibrium, so a few
//! fixed-point iterations suffice.
//!
//! ```text
//! cargo run --release -p mmot-core --example calibrate_pg
//! ```

use mmot::cooling::run_pg_stage_with_summary;
use mmot::dynamics::{run_mot_full, RunOptions};
use mmot::measure::Region;
use mmot::scene::{PaperScenario, Scenario};

const TARGET: f64 = 10e-6;

fn main() {
    let mut scenario = Scenario::paper(PaperScenario::FreeSpace);
    scenario.vapor.injection_rate = 3e4;
    scenario.run.max_time = 0.2;
    let params = scenario.step_params(2024);
    let region = Region::trap_sphere(&scenario);
    let run = run_mot_full(&scenario, &params, &region, &RunOptions::default());
    let cloud = run.final_cloud.restricted_to(&region);
    let (th, tv) = cloud.temperatures_hv(scenario.species.mass);
    println!("MOT cloud: {} atoms, T_H = {:.1} uK, T_V = {:.1} uK", cloud.atoms.len(), th * 1e6, tv * 1e6);

    let mut model = scenario.force_model.sub_doppler;
    for iteration in 0..4 {
        let out = run_pg_stage_with_summary(&scenario, &cloud, &scenario.pg_schedule, &model, 7, 2);
        let end = out.summary.last().unwrap();
        let t = 0.5 * (end.t_h + end.t_v);
        println!(
            "iteration {iteration}: C_pg = {:.4e}, T_H = {:.2} uK, T_V = {:.2} uK, survivors {}",
            model.equilibrium_constant,
            end.t_h * 1e6,
            end.t_v * 1e6,
            end.n_active
        );
        model.equilibrium_constant *= TARGET / t;
    }
    println!("calibrated C_pg = {:.3e}", model.equilibrium_constant);
}
