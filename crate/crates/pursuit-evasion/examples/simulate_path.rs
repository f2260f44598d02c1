//! Simulate one noisy trajectory under the solved observation schedule.
//!
//! Loads the bundled planar-chase configuration, solves the pursuer's
//! schedule, then integrates the closed-loop stochastic dynamics with an
//! Euler–Maruyama stepper. Both players steer with certainty-equivalence
//! feedback driven by a shared open-loop state estimate that snaps to the
//! true state at each purchased observation. Writes the trajectory as CSV
//! and a quick-look SVG plot of the position components.
//!
//! Run with:
//!
//! ```text
//! cargo run --release --example simulate_path
//! ```

use std::fs;
use std::path::PathBuf;

use pursuit_evasion::ce::solve_ce_game;
use pursuit_evasion::engine::simulate;
use pursuit_evasion::export::{emit_plot_svg, export_trajectory_csv};
use pursuit_evasion::lqg::{solve_riccati_finite, GramianCache, TimeGrid};
use pursuit_evasion::{PlotStyle, Result, RunConfig};

fn main() -> Result<()> {
    let config_path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../configs/pursuit_double_integrator.json"
    );
    let cfg = RunConfig::from_path(config_path)?;
    let spec = cfg.to_spec()?;

    let ricc = solve_riccati_finite(&spec, cfg.numerics.riccati_steps)?;
    let gram = GramianCache::new(
        &spec,
        TimeGrid::new(spec.horizon, cfg.numerics.riccati_steps)?,
    )?;
    let sol = solve_ce_game(&spec, &gram, &ricc)?;
    println!(
        "schedule: {} snapshots at {:?}",
        sol.pursuer_plan.n(),
        sol.pursuer_plan
            .instants()
            .iter()
            .map(|t| (t * 1e4).round() / 1e4)
            .collect::<Vec<_>>()
    );

    let record = simulate(
        &spec,
        &ricc,
        &sol.pursuer_plan,
        &sol.evader_plan,
        cfg.numerics.seed,
        cfg.numerics.sim_steps,
    )?;

    println!("seed            : {}", cfg.numerics.seed);
    println!("steps           : {}", cfg.numerics.sim_steps);
    println!("realized cost   : {:.4}", record.realized_cost);
    let first = record.states.first().expect("nonempty path");
    let last = record.states.last().expect("nonempty path");
    println!("initial |x|     : {:.4}", first.norm());
    println!("terminal |x|    : {:.4}", last.norm());

    let out_dir = PathBuf::from(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../target/example_output"
    ));
    fs::create_dir_all(&out_dir).expect("create output directory");
    let csv_path = out_dir.join("trajectory.csv");
    fs::write(&csv_path, export_trajectory_csv(&record)).expect("write csv");
    let svg_path = out_dir.join("trajectory.svg");
    fs::write(&svg_path, emit_plot_svg(&record, &PlotStyle::default())?)
        .expect("write svg");
    println!("wrote {}", csv_path.display());
    println!("wrote {}", svg_path.display());
    Ok(())
}
