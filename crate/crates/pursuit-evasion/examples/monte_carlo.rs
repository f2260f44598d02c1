//! Check the simulator against the closed-form expected cost.
//!
//! The expected realized cost of the chase under a fixed observation
//! schedule has an exact expression: the deterministic value term from the
//! start state, a noise feed-through integral, the estimation penalty
//! accumulated between snapshots, and the observation bill. This example
//! solves the bundled planar chase, runs a Monte Carlo batch of simulated
//! paths, and compares the empirical mean cost with that formula.
//!
//! Run with:
//!
//! ```text
//! cargo run --release --example monte_carlo
//! ```

use pursuit_evasion::analysis::expected_cost;
use pursuit_evasion::ce::solve_ce_game;
use pursuit_evasion::engine::monte_carlo;
use pursuit_evasion::lqg::{solve_riccati_finite, GramianCache, TimeGrid};
use pursuit_evasion::{Result, RunConfig};

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

    let breakdown = expected_cost(&spec, &gram, &ricc, &sol.pursuer_plan, &sol.evader_plan)?;
    println!("closed-form expectation");
    println!("  estimation term : {:>12.4}", breakdown.estimation_term);
    println!("  observation bill: {:>12.4}", breakdown.obs_price_term);
    println!("  baseline term   : {:>12.4}", breakdown.baseline_term);
    println!("  total           : {:>12.4}", breakdown.total);
    println!();

    let paths = 400;
    let summary = monte_carlo(
        &spec,
        &ricc,
        &sol.pursuer_plan,
        &sol.evader_plan,
        paths,
        cfg.numerics.seed,
    )?;
    println!("monte carlo ({paths} paths, seed {})", cfg.numerics.seed);
    println!("  mean cost       : {:>12.4}", summary.mean_cost);
    println!("  std dev         : {:>12.4}", summary.std_cost);
    println!("  95% half-width  : {:>12.4}", summary.ci95_halfwidth);
    println!("  mean |x(T)|     : {:>12.4}", summary.mean_terminal_distance);
    println!();

    let gap = summary.mean_cost - breakdown.total;
    let sigmas = gap / summary.ci95_halfwidth;
    println!("mean - expectation = {gap:+.4} ({sigmas:+.2} half-widths)");
    if gap.abs() <= 3.0 * summary.ci95_halfwidth {
        println!("agreement within three 95% half-widths: OK");
    } else {
        println!("agreement within three 95% half-widths: FAILED");
    }
    Ok(())
}
