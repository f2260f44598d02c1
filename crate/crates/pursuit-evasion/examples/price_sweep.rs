//! Sweep the snapshot price and watch the schedule thin out.
//!
//! The value recursion and noise gramians depend only on the dynamics and
//! weights, so one factorization serves every price. For each price on a
//! descending ladder the solver re-picks the snapshot count and instants;
//! cheaper observations buy denser schedules and a lower total. Prints the
//! staircase and writes it as a CSV table.
//!
//! Run with:
//!
//! ```text
//! cargo run --release --example price_sweep
//! ```

use std::fs;
use std::path::PathBuf;

use pursuit_evasion::ce::solve_ce_game;
use pursuit_evasion::export::export_sweep_csv;
use pursuit_evasion::lqg::{solve_riccati_finite, GramianCache, TimeGrid};
use pursuit_evasion::{Result, RunConfig, SweepRow};

fn main() -> Result<()> {
    let config_path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../configs/pursuit_double_integrator.json"
    );
    let cfg = RunConfig::from_path(config_path)?;
    let base = cfg.to_spec()?;

    // Price-independent work, done once.
    let ricc = solve_riccati_finite(&base, cfg.numerics.riccati_steps)?;
    let gram = GramianCache::new(
        &base,
        TimeGrid::new(base.horizon, cfg.numerics.riccati_steps)?,
    )?;

    let prices = [30000.0, 10000.0, 3000.0, 900.0, 300.0, 100.0, 30.0];
    let mut rows = Vec::new();
    println!("{:>9}  {:>6}  {:>14}  instants", "price", "count", "total cost");
    for &price in &prices {
        let mut spec = base.clone();
        spec.price_p = price;
        let sol = solve_ce_game(&spec, &gram, &ricc)?;
        let instants: Vec<String> = sol
            .pursuer_plan
            .instants()
            .iter()
            .map(|t| format!("{t:.3}"))
            .collect();
        println!(
            "{price:>9}  {:>6}  {:>14.4}  [{}]",
            sol.pursuer_plan.n(),
            sol.objective,
            instants.join(", ")
        );
        rows.push(SweepRow {
            op: price,
            n_star: sol.pursuer_plan.n(),
            objective: sol.objective,
        });
    }

    let out_dir = PathBuf::from(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../target/example_output"
    ));
    fs::create_dir_all(&out_dir).expect("create output directory");
    let csv_path = out_dir.join("price_sweep.csv");
    fs::write(&csv_path, export_sweep_csv(&rows)).expect("write csv");
    println!();
    println!("wrote {}", csv_path.display());
    Ok(())
}
