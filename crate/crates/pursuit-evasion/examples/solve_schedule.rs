//! Solve the pursuer's optimal observation schedule for a planar chase.
//!
//! Builds a two-player double-integrator game in code, computes the value
//! recursion, and runs the schedule solver: for each candidate snapshot count
//! the chain of observation instants is pinned down by bisection, and the
//! count with the cheapest total (estimation penalty plus observation bill)
//! wins. Prints the cost table, the winning schedule, and the stationarity
//! residual at every chosen instant.
//!
//! Run with:
//!
//! ```text
//! cargo run --release --example solve_schedule
//! ```

use nalgebra::{DMatrix, DVector};
use pursuit_evasion::ce::solve_ce_game;
use pursuit_evasion::lqg::{solve_riccati_finite, GramianCache, TimeGrid};
use pursuit_evasion::model::GameSpec;
use pursuit_evasion::Result;

/// Planar pursuit with double-integrator kinematics on each axis.
/// State is (y1, y2, v1, v2): relative position first, relative velocity
/// last. Both players steer accelerations; the pursuer's cheaper control
/// weighting is what lets it out-maneuver the evader.
fn planar_chase(snapshot_price: f64) -> Result<GameSpec> {
    let n = 4;
    let mut a = DMatrix::zeros(n, n);
    a[(0, 2)] = 1.0;
    a[(1, 3)] = 1.0;
    let mut b = DMatrix::zeros(n, 2);
    b[(2, 0)] = 1.0;
    b[(3, 1)] = 1.0;
    // Equal diffusion on every state component; intensity 32 per component.
    let c = DMatrix::identity(n, n) * 32.0_f64.sqrt();
    let q = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]));
    let qt = &q * 10.0;
    let rp = DMatrix::identity(2, 2) * 1.6;
    let re = DMatrix::identity(2, 2) * 2.0;
    let x0 = DVector::from_vec(vec![100.0, -30.0, 4.0, 0.0]);
    GameSpec::new(
        a,
        b.clone(),
        b,
        c,
        q,
        qt,
        rp,
        re,
        snapshot_price,
        900.0,
        6.0,
        x0,
    )
}

fn main() -> Result<()> {
    let spec = planar_chase(900.0)?;
    let ricc = solve_riccati_finite(&spec, 4096)?;
    let gram = GramianCache::new(&spec, TimeGrid::new(spec.horizon, 4096)?)?;

    let sol = solve_ce_game(&spec, &gram, &ricc)?;

    println!("maneuverability class : {:?}", sol.class);
    println!("snapshot price        : {}", spec.price_p);
    println!(
        "count bound           : {} (raw) -> {} (tightened)",
        sol.n_upper, sol.n_upper_tight
    );
    println!();
    println!("cost of the best schedule at each snapshot count:");
    println!("{:>5}  {:>14}", "count", "total cost");
    for &(n, f) in &sol.f_table {
        let marker = if n == sol.pursuer_plan.n() { "  <-- optimal" } else { "" };
        println!("{n:>5}  {f:>14.4}{marker}");
    }
    println!();
    println!("optimal snapshot count: {}", sol.pursuer_plan.n());
    println!("observation instants  :");
    for (k, (&t, &r)) in sol
        .pursuer_plan
        .instants()
        .iter()
        .zip(&sol.first_order_residuals)
        .enumerate()
    {
        println!("  t[{k}] = {t:.6}   stationarity residual = {r:+.3e}");
    }
    println!();
    println!("objective at optimum  : {:.4}", sol.objective);
    println!(
        "evader plan           : {} snapshots (prohibitive price {})",
        sol.evader_plan.n(),
        spec.price_e
    );
    Ok(())
}
