//! Closed-loop stochastic simulation of the game.
//!
//! Both players apply the feedback laws `u = −R⁻¹B'K(t)·x̂` driven by the
//! shared estimate `x̂`, which coasts along the certainty-equivalent flow
//! between snapshots and resets to the true state at every purchased instant.
//! The truth follows the noisy dynamics. One run records the full trajectory;
//! a Monte Carlo batch averages realized costs so they can be checked against
//! the closed-form expectation.
//!
//! Reproducibility: noise is generated by a counter-based hash keyed on
//! `(seed, step, lane)`, so a path depends only on its seed and the step
//! partition — never on execution order — and a batch keyed on a base seed
//! is identical no matter how it is scheduled across threads.

use std::f64::consts::TAU;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::ce::ObservationPlan;
use crate::error::{Error, Result};
use crate::lqg::RiccatiSolution;
use crate::model::GameSpec;

/// Default number of uniform simulation steps over the horizon.
pub const DEFAULT_SIM_STEPS: usize = 6000;

/// One simulated closed-loop path, sampled on the step partition
/// (uniform grid plus every observation instant).
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    /// Node times, `0 = t₀ < … = T`.
    pub times: Vec<f64>,
    /// True state at each node.
    pub states: Vec<DVector<f64>>,
    /// Shared estimate at each node (post-reset at observation nodes).
    pub estimates: Vec<DVector<f64>>,
    /// Pursuer control applied from each node onward.
    pub controls_p: Vec<DVector<f64>>,
    /// Evader control applied from each node onward.
    pub controls_e: Vec<DVector<f64>>,
    /// Whether a snapshot was taken at this node.
    pub obs_flags: Vec<bool>,
    /// Running cost: integral to date plus observation charges; the final
    /// entry includes the terminal penalty and equals `realized_cost`.
    pub cost_to_date: Vec<f64>,
    /// Total realized game cost of this path.
    pub realized_cost: f64,
    /// Seed that generated the path.
    pub seed: u64,
}

/// Aggregate statistics over a batch of simulated paths.
#[derive(Debug, Clone)]
pub struct MonteCarloSummary {
    /// Number of paths.
    pub m: usize,
    /// Sample mean of realized costs.
    pub mean_cost: f64,
    /// Sample standard deviation (n−1 normalization).
    pub std_cost: f64,
    /// Half-width of the 95% confidence interval, `1.96·std/√M`.
    pub ci95_halfwidth: f64,
    /// Mean Euclidean norm of the terminal state over paths.
    pub mean_terminal_distance: f64,
    /// Realized cost of every path, in path order.
    pub costs: Vec<f64>,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Final bit-mixing stage of the splitmix64 generator.
fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

fn key(seed: u64, step: u64, lane: u64) -> u64 {
    let mut h = mix64(seed.wrapping_add(GOLDEN));
    h = mix64(h ^ step.wrapping_mul(0xD1B5_4A32_D192_ED03));
    h = mix64(h ^ lane.wrapping_mul(0x8CB9_2BA7_2F3D_8DD7));
    h
}

/// Uniform draw in the open interval (0, 1): 53 mantissa bits, offset half an
/// ulp so neither endpoint can occur (keeps `ln` finite).
fn unit_open(bits: u64) -> f64 {
    ((bits >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
}

/// Standard normal draw addressed by `(seed, step, lane)` — pure function of
/// its arguments.
pub(crate) fn standard_normal(seed: u64, step: u64, lane: u64) -> f64 {
    let u1 = unit_open(key(seed, step, 2 * lane));
    let u2 = unit_open(key(seed, step, 2 * lane + 1));
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Seed of path `k` in a batch keyed on `base_seed`.
fn path_seed(base_seed: u64, k: u64) -> u64 {
    key(base_seed, 0x5041_5448, k)
}

/// Feedback controls of both players at time `t` given the shared estimate:
/// `u_p = −Rp⁻¹Bp'K(t)x̂` and `u_e = −Re⁻¹Be'K(t)x̂`.
pub fn nash_controls(
    ricc: &RiccatiSolution,
    x_hat: &DVector<f64>,
    t: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let kx = ricc.k_apply(t, x_hat)?;
    Ok((-(ricc.gain_p() * &kx), -(ricc.gain_e() * &kx)))
}

/// Drift of the shared estimate under both feedback laws:
/// `dx̂/dt = (A − D·K(t))·x̂`.
fn estimate_rate(
    spec: &GameSpec,
    ricc: &RiccatiSolution,
    t: f64,
    x_hat: &DVector<f64>,
) -> Result<DVector<f64>> {
    let kx = ricc.k_apply(t, x_hat)?;
    Ok(&spec.a * x_hat - ricc.d() * kx)
}

/// Advances the shared estimate by one classical RK4 substep of length `dt`.
pub fn propagate_estimate(
    spec: &GameSpec,
    ricc: &RiccatiSolution,
    x_hat: &DVector<f64>,
    t: f64,
    dt: f64,
) -> Result<DVector<f64>> {
    if !dt.is_finite() || dt < 0.0 {
        return Err(Error::OutOfRange(format!(
            "substep length must be nonnegative and finite, got {dt}"
        )));
    }
    let k1 = estimate_rate(spec, ricc, t, x_hat)?;
    let k2 = estimate_rate(spec, ricc, t + 0.5 * dt, &(x_hat + 0.5 * dt * &k1))?;
    let k3 = estimate_rate(spec, ricc, t + 0.5 * dt, &(x_hat + 0.5 * dt * &k2))?;
    let k4 = estimate_rate(spec, ricc, t + dt, &(x_hat + dt * &k3))?;
    Ok(x_hat + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
}

/// One coupled deterministic RK4 step of truth and estimate. Both rates use
/// the estimate-driven control push `D·K(t)·x̂`, computed once per stage, so
/// that with zero noise a path with `x = x̂` stays bitwise identical.
fn coupled_step(
    spec: &GameSpec,
    ricc: &RiccatiSolution,
    t: f64,
    dt: f64,
    x: &DVector<f64>,
    x_hat: &DVector<f64>,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let a = &spec.a;
    let stage = |s: f64,
                 xs: &DVector<f64>,
                 hs: &DVector<f64>|
     -> Result<(DVector<f64>, DVector<f64>)> {
        let push = ricc.d() * ricc.k_apply(s, hs)?;
        Ok((a * xs - &push, a * hs - push))
    };
    let (k1x, k1h) = stage(t, x, x_hat)?;
    let (k2x, k2h) = stage(
        t + 0.5 * dt,
        &(x + 0.5 * dt * &k1x),
        &(x_hat + 0.5 * dt * &k1h),
    )?;
    let (k3x, k3h) = stage(
        t + 0.5 * dt,
        &(x + 0.5 * dt * &k2x),
        &(x_hat + 0.5 * dt * &k2h),
    )?;
    let (k4x, k4h) = stage(t + dt, &(x + dt * &k3x), &(x_hat + dt * &k3h))?;
    Ok((
        x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        x_hat + dt / 6.0 * (k1h + 2.0 * k2h + 2.0 * k3h + k4h),
    ))
}

/// Node times plus, per node, whether each player's plan fires there:
/// the uniform grid with every observation instant spliced in (instants
/// within `1e-9·(1+T)` of a grid node are snapped onto it).
fn build_partition(
    tf: f64,
    n_steps: usize,
    plan_p: &ObservationPlan,
    plan_e: &ObservationPlan,
) -> Result<(Vec<f64>, Vec<bool>, Vec<bool>)> {
    let h = tf / n_steps as f64;
    let tol = 1e-9 * (1.0 + tf);
    let merged = plan_p.merged_with(plan_e);
    for &t in &merged {
        if !t.is_finite() || t <= 0.0 || t >= tf {
            return Err(Error::InvalidPlan(format!(
                "observation instant {t} is outside the open horizon (0, {tf})"
            )));
        }
    }
    let contains = |plan: &ObservationPlan, t: f64| -> bool {
        plan.instants().iter().any(|&s| (s - t).abs() <= tol)
    };
    let mut times = Vec::with_capacity(n_steps + 1 + merged.len());
    let mut fires_p = Vec::with_capacity(times.capacity());
    let mut fires_e = Vec::with_capacity(times.capacity());
    let mut push = |t: f64, obs: bool| {
        times.push(t);
        fires_p.push(obs && contains(plan_p, t));
        fires_e.push(obs && contains(plan_e, t));
    };
    let mut mi = 0;
    for k in 0..=n_steps {
        let t = if k == n_steps { tf } else { k as f64 * h };
        while mi < merged.len() && merged[mi] < t - tol {
            push(merged[mi], true);
            mi += 1;
        }
        if mi < merged.len() && (merged[mi] - t).abs() <= tol {
            push(t, true);
            mi += 1;
        } else {
            push(t, false);
        }
    }
    Ok((times, fires_p, fires_e))
}

/// Simulates one closed-loop path of the game under the given plans.
///
/// The truth gets the RK4 drift of [`coupled_step`] plus an additive
/// Euler–Maruyama noise kick `C·√dt·z` per step; the estimate gets the same
/// drift, resets to the truth at every observation node, and both players'
/// controls are recomputed at every node. Deterministic given
/// `(seed, n_sim_steps, plans)`.
pub fn simulate(
    spec: &GameSpec,
    ricc: &RiccatiSolution,
    plan_p: &ObservationPlan,
    plan_e: &ObservationPlan,
    seed: u64,
    n_sim_steps: usize,
) -> Result<TrajectoryRecord> {
    spec.validate()?;
    if n_sim_steps == 0 {
        return Err(Error::OutOfRange(
            "simulation needs at least one step".into(),
        ));
    }
    let tf = spec.horizon;
    let (times, fires_p, fires_e) = build_partition(tf, n_sim_steps, plan_p, plan_e)?;
    let len = times.len();
    let q_dim = spec.q_dim() as u64;
    let sqrt_dt_noise = |step: u64, dt: f64| -> DVector<f64> {
        DVector::from_fn(q_dim as usize, |j, _| {
            dt.sqrt() * standard_normal(seed, step, j as u64)
        })
    };

    let mut states = Vec::with_capacity(len);
    let mut estimates = Vec::with_capacity(len);
    let mut controls_p = Vec::with_capacity(len);
    let mut controls_e = Vec::with_capacity(len);
    let mut cost_to_date = Vec::with_capacity(len);
    let mut obs_flags = Vec::with_capacity(len);

    let mut x = spec.x0.clone();
    let mut x_hat = spec.x0.clone();
    let mut acc_cost = 0.0;
    let mut prev_rate = 0.0;

    for i in 0..len {
        let t = times[i];
        if fires_p[i] || fires_e[i] {
            x_hat = x.clone();
            if fires_p[i] {
                acc_cost += spec.price_p;
            }
            if fires_e[i] {
                acc_cost += spec.price_e;
            }
        }
        let (u_p, u_e) = nash_controls(ricc, &x_hat, t)?;
        let rate = (&spec.q * &x).dot(&x) + (&spec.rp * &u_p).dot(&u_p)
            - (&spec.re * &u_e).dot(&u_e);
        if i > 0 {
            acc_cost += 0.5 * (times[i] - times[i - 1]) * (prev_rate + rate);
        }
        prev_rate = rate;

        obs_flags.push(fires_p[i] || fires_e[i]);
        states.push(x.clone());
        estimates.push(x_hat.clone());
        controls_p.push(u_p);
        controls_e.push(u_e);
        cost_to_date.push(acc_cost);

        if i + 1 < len {
            let dt = times[i + 1] - t;
            let (nx, nh) = coupled_step(spec, ricc, t, dt, &x, &x_hat)?;
            x = nx + &spec.c * sqrt_dt_noise(i as u64, dt);
            x_hat = nh;
        }
    }

    let terminal = (&spec.qt * &x).dot(&x);
    acc_cost += terminal;
    *cost_to_date.last_mut().expect("partition is nonempty") = acc_cost;

    Ok(TrajectoryRecord {
        times,
        states,
        estimates,
        controls_p,
        controls_e,
        obs_flags,
        cost_to_date,
        realized_cost: acc_cost,
        seed,
    })
}

/// Runs `m ≥ 2` independent paths with per-path seeds derived from
/// `base_seed` and aggregates their realized costs. Paths execute in
/// parallel; results do not depend on scheduling.
pub fn monte_carlo(
    spec: &GameSpec,
    ricc: &RiccatiSolution,
    plan_p: &ObservationPlan,
    plan_e: &ObservationPlan,
    m: usize,
    base_seed: u64,
) -> Result<MonteCarloSummary> {
    monte_carlo_with_steps(spec, ricc, plan_p, plan_e, m, base_seed, DEFAULT_SIM_STEPS)
}

/// [`monte_carlo`] with an explicit per-path step count.
pub fn monte_carlo_with_steps(
    spec: &GameSpec,
    ricc: &RiccatiSolution,
    plan_p: &ObservationPlan,
    plan_e: &ObservationPlan,
    m: usize,
    base_seed: u64,
    n_sim_steps: usize,
) -> Result<MonteCarloSummary> {
    if m < 2 {
        return Err(Error::OutOfRange(format!(
            "batch statistics need at least two paths, got {m}"
        )));
    }
    // Each path reduces to (cost, terminal distance) as soon as it finishes,
    // so the batch never holds more than one full trajectory per worker.
    let samples: Vec<(f64, f64)> = (0..m)
        .into_par_iter()
        .map(|k| {
            let rec = simulate(
                spec,
                ricc,
                plan_p,
                plan_e,
                path_seed(base_seed, k as u64),
                n_sim_steps,
            )?;
            let terminal = rec.states.last().expect("path has nodes").norm();
            Ok((rec.realized_cost, terminal))
        })
        .collect::<Result<_>>()?;
    let costs: Vec<f64> = samples.iter().map(|&(c, _)| c).collect();
    let mf = m as f64;
    let mean_cost = costs.iter().sum::<f64>() / mf;
    let var = costs.iter().map(|c| (c - mean_cost).powi(2)).sum::<f64>() / (mf - 1.0);
    let std_cost = var.sqrt();
    let ci95_halfwidth = 1.96 * std_cost / mf.sqrt();
    let mean_terminal_distance = samples.iter().map(|&(_, d)| d).sum::<f64>() / mf;
    Ok(MonteCarloSummary {
        m,
        mean_cost,
        std_cost,
        ci95_halfwidth,
        mean_terminal_distance,
        costs,
    })
}

/// Mean state norm per node across a set of equally partitioned paths —
/// convenience for long-horizon stability checks.
pub fn mean_state_norms(records: &[TrajectoryRecord]) -> Vec<f64> {
    if records.is_empty() {
        return Vec::new();
    }
    let len = records[0].times.len();
    (0..len)
        .map(|i| {
            records.iter().map(|r| r.states[i].norm()).sum::<f64>() / records.len() as f64
        })
        .collect()
}
