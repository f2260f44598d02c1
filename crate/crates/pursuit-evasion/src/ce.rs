//! Observation scheduling: when should a player pay to look at the state?
//!
//! Under the feedback laws from the value recursion, the expected cost splits
//! into constants plus, per unobserved gap `(tᵢ, tᵢ₊₁)`, the term
//! `∫ Tr[Σ(t−tᵢ)·φ(t)] dt`, plus `price·N` for the purchased snapshots. When
//! the pursuer out-maneuvers the evader (`D ⪰ 0`), revealing the state helps
//! the pursuer and hurts the evader, so the evader's best plan is empty and
//! only the pursuer's schedule remains to be optimized.
//!
//! An interior optimal schedule balances, at every instant `tᵢ`, the marginal
//! value of moving it: the accumulated-covariance weight against the future
//! sensitivity,
//!
//! ```text
//!     Tr[Σ(tᵢ−tᵢ₋₁)·φ(tᵢ)]  =  ∫_{tᵢ}^{tᵢ₊₁} Tr[N(t−tᵢ)·φ(t)] dt .
//! ```
//!
//! Given `t₁` the condition determines `t₂, t₃, …` one by one (each
//! right-hand side is monotone in its upper limit), so a schedule of length
//! `N` reduces to a shooting problem in the single unknown `t₁`, solved by
//! bisection: a guess is too large when the chain runs past the horizon
//! before placing `N` instants, too small when the virtual instant `t_{N+1}`
//! falls short of `T`. The observation count itself is found by enumerating
//! `N` under a budget bound that tightens as values arrive.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lqg::gramian::{scan_rate_crossing, trace_cost_integral, trace_rate_integral};
use crate::lqg::{van_loan_pair, GramianCache, RiccatiSolution};
use crate::model::{symmetrize, DominanceClass, GameSpec};

/// Default outer bisection tolerance for a horizon `T`.
pub fn default_eps(horizon: f64) -> f64 {
    1e-5 * horizon.max(1.0)
}

/// A player's observation schedule: strictly increasing instants inside the
/// open horizon. Coincident inputs are collapsed — a duplicate snapshot buys
/// nothing but still costs its price.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservationPlan {
    instants: Vec<f64>,
}

impl ObservationPlan {
    /// The empty plan (never observe).
    pub fn empty() -> Self {
        ObservationPlan::default()
    }

    /// Validates, sorts and deduplicates a list of instants for a game over
    /// `[0, horizon]`.
    pub fn new(mut instants: Vec<f64>, horizon: f64) -> Result<Self> {
        for &t in &instants {
            if !t.is_finite() || t <= 0.0 || t >= horizon {
                return Err(Error::InvalidPlan(format!(
                    "instant {t} outside the open horizon (0, {horizon})"
                )));
            }
        }
        instants.sort_by(|a, b| a.partial_cmp(b).expect("instants validated finite"));
        let tol = 1e-12 * (1.0 + horizon);
        instants.dedup_by(|b, a| (*b - *a).abs() <= tol);
        Ok(ObservationPlan { instants })
    }

    pub fn n(&self) -> usize {
        self.instants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instants.is_empty()
    }

    pub fn instants(&self) -> &[f64] {
        &self.instants
    }

    /// Sorted union of two plans' instants, coincident times collapsed:
    /// the timeline of estimator resets both players experience.
    pub fn merged_with(&self, other: &ObservationPlan) -> Vec<f64> {
        let mut all: Vec<f64> = self
            .instants
            .iter()
            .chain(other.instants.iter())
            .copied()
            .collect();
        all.sort_by(|a, b| a.partial_cmp(b).expect("plans hold finite times"));
        all.dedup_by(|b, a| (*b - *a).abs() <= 1e-12);
        all
    }
}

/// Full output of the scheduling game.
#[derive(Debug, Clone)]
pub struct CESolution {
    /// The optimizing player's schedule.
    pub pursuer_plan: ObservationPlan,
    /// Always empty under dominance: snapshots would help the opponent.
    pub evader_plan: ObservationPlan,
    /// `(N, F(N))` for every enumerated schedule length.
    pub f_table: Vec<(usize, f64)>,
    /// A-priori cap on the schedule length from the zero-observation cost.
    pub n_upper: usize,
    /// Final tightened cap after enumeration.
    pub n_upper_tight: usize,
    /// Per-instant balance-equation residuals at the optimum.
    pub first_order_residuals: Vec<f64>,
    /// `F` at the optimal schedule length.
    pub objective: f64,
    /// Set when the price is zero: continuous observation is optimal and no
    /// finite instant list represents it.
    pub observe_always: bool,
    /// Maneuverability class of the underlying game.
    pub class: DominanceClass,
}

/// Optimal steady-rhythm sampling interval for the infinite-horizon game.
#[derive(Debug, Clone)]
pub struct PeriodicSolution {
    /// The optimal interval `Δ*` between snapshots.
    pub dt_star: f64,
    /// Long-run average scheduling cost rate at `Δ*`.
    pub avg_cost: f64,
    /// Curvature of the average cost at the root; positive at a minimum.
    pub second_derivative: f64,
    /// Stationarity residual at the returned interval.
    pub residual: f64,
}

/// Accumulated-covariance weight of the gap ending at `t_i`:
/// `Tr[Σ(t_i − t_prev)·φ(t_i)]`.
pub fn lhs_lp(
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    t_prev: f64,
    t_i: f64,
) -> Result<f64> {
    if !(t_prev <= t_i) {
        return Err(Error::OutOfRange(format!(
            "gap endpoints out of order: {t_prev} > {t_i}"
        )));
    }
    let sigma = gram.sigma(t_i - t_prev)?;
    let phi = ricc.phi_at(t_i)?;
    Ok(sigma.dot(&phi))
}

/// Forward sensitivity of the gap starting at `t_i`:
/// `∫_{t_i}^{t_end} Tr[N(t−t_i)·φ(t)] dt`, nondecreasing in `t_end`.
pub fn rhs_rp(
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    t_i: f64,
    t_end: f64,
) -> Result<f64> {
    trace_rate_integral(gram, ricc, t_i, t_i, t_end)
}

/// The unique `t_next ∈ [t_i, T]` balancing the instant at `t_i`, i.e. with
/// `rhs_rp(t_i, t_next) = lhs_lp(t_prev, t_i)`; `None` when even the full
/// remaining horizon cannot absorb the required sensitivity.
pub fn next_instant(
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    t_prev: f64,
    t_i: f64,
) -> Result<Option<f64>> {
    next_instant_eps(gram, ricc, t_prev, t_i, default_eps(ricc.grid().tf()) / 10.0)
}

fn next_instant_eps(
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    t_prev: f64,
    t_i: f64,
    eps_inner: f64,
) -> Result<Option<f64>> {
    let target = lhs_lp(gram, ricc, t_prev, t_i)?;
    scan_rate_crossing(gram, ricc, t_i, target, eps_inner)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ChainOutcome {
    /// All balance equations hold and the virtual next instant lands at the
    /// horizon: this is the schedule.
    Converged,
    /// Chain completed but finishes early: the leading instant must move later.
    TooSmall,
    /// Chain ran past the horizon: the leading instant must move earlier.
    TooLarge,
}

fn chain_from(
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    t1: f64,
    n_obs: usize,
    eps_inner: f64,
    eps_terminal: f64,
) -> Result<(ChainOutcome, Vec<f64>)> {
    let tf = ricc.grid().tf();
    let mut instants = Vec::with_capacity(n_obs);
    instants.push(t1);
    let mut prev = 0.0;
    let mut cur = t1;
    for _ in 1..n_obs {
        match next_instant_eps(gram, ricc, prev, cur, eps_inner)? {
            None => return Ok((ChainOutcome::TooLarge, instants)),
            Some(t) => {
                instants.push(t);
                prev = cur;
                cur = t;
            }
        }
    }
    match next_instant_eps(gram, ricc, prev, cur, eps_inner)? {
        None => Ok((ChainOutcome::TooLarge, instants)),
        Some(t) if t < tf - eps_terminal => Ok((ChainOutcome::TooSmall, instants)),
        Some(_) => Ok((ChainOutcome::Converged, instants)),
    }
}

/// Finds the length-`n_obs` schedule satisfying every balance equation, by
/// bisection on the leading instant over `[0, T]` to tolerance `eps`.
pub fn binary_search_instants(
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    n_obs: usize,
    eps: f64,
) -> Result<Vec<f64>> {
    if n_obs == 0 {
        return Err(Error::OutOfRange(
            "schedule search needs at least one instant".into(),
        ));
    }
    if !(eps > 0.0) {
        return Err(Error::OutOfRange(format!(
            "bisection tolerance must be positive, got {eps}"
        )));
    }
    let tf = ricc.grid().tf();
    let eps_inner = eps / 10.0;
    let eps_terminal = eps * 10.0;
    let (mut lo, mut hi) = (0.0f64, tf);
    let mut iterations = 0;
    while hi - lo > eps && iterations < 200 {
        let mid = 0.5 * (lo + hi);
        let (outcome, instants) = chain_from(gram, ricc, mid, n_obs, eps_inner, eps_terminal)?;
        match outcome {
            ChainOutcome::Converged => return Ok(instants),
            ChainOutcome::TooSmall => lo = mid,
            ChainOutcome::TooLarge => hi = mid,
        }
        iterations += 1;
    }
    // Accept the midpoint chain; if it overruns, the low end completed its
    // chain by construction and is within eps of the midpoint.
    for t1 in [0.5 * (lo + hi), lo] {
        let (outcome, instants) = chain_from(gram, ricc, t1, n_obs, eps_inner, eps_terminal)?;
        if outcome != ChainOutcome::TooLarge {
            return Ok(instants);
        }
    }
    Err(Error::ChainBroken(format!(
        "no length-{n_obs} chain fills the horizon; quadrature tolerance may be too loose"
    )))
}

/// Schedule objective: per-gap estimation cost plus the observation bill,
///
/// ```text
///     F(t₁..t_N) = Σ_i ∫_{tᵢ}^{tᵢ₊₁} Tr[Σ(t−tᵢ)φ(t)]dt + price·N ,
/// ```
///
/// with `t₀ = 0` and `t_{N+1} = T`.
pub fn objective_f(
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    instants: &[f64],
    price: f64,
) -> Result<f64> {
    let tf = ricc.grid().tf();
    let mut prev = 0.0;
    let mut acc = 0.0;
    for &t in instants {
        if !t.is_finite() || t < prev || t > tf {
            return Err(Error::InvalidPlan(format!(
                "instant {t} breaks the ordering 0 ≤ t₁ ≤ … ≤ {tf}"
            )));
        }
        acc += trace_cost_integral(gram, ricc, prev, prev, t)?;
        prev = t;
    }
    acc += trace_cost_integral(gram, ricc, prev, prev, tf)?;
    if !instants.is_empty() {
        acc += price * instants.len() as f64;
    }
    Ok(acc)
}

/// Per-instant residuals of the balance equations at a given schedule
/// (with the virtual endpoints `t₀ = 0`, `t_{N+1} = T`).
pub fn first_order_residuals(
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    instants: &[f64],
) -> Result<Vec<f64>> {
    let tf = ricc.grid().tf();
    let mut out = Vec::with_capacity(instants.len());
    for (i, &t) in instants.iter().enumerate() {
        let prev = if i == 0 { 0.0 } else { instants[i - 1] };
        let next = instants.get(i + 1).copied().unwrap_or(tf);
        let l = lhs_lp(gram, ricc, prev, t)?;
        let r = rhs_rp(gram, ricc, t, next)?;
        out.push((l - r).abs());
    }
    Ok(out)
}

/// Budget cap on the schedule length: no optimal plan can spend more on
/// observations than the cost of never observing, so
/// `N* ≤ ⌊F(∅)/price⌋`.
pub fn np_upper_bound(
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    price: f64,
) -> Result<usize> {
    if price.is_nan() || price < 0.0 {
        return Err(Error::OutOfRange(format!(
            "observation price must be nonnegative, got {price}"
        )));
    }
    if price == 0.0 {
        return Err(Error::ZeroPrice);
    }
    if price.is_infinite() {
        return Ok(0);
    }
    let tf = ricc.grid().tf();
    let est0 = trace_cost_integral(gram, ricc, 0.0, 0.0, tf)?;
    Ok((est0 / price).floor() as usize)
}

/// Tightened cap available once `F(k)` is known: a plan of length `N > k`
/// pays at least `price·N`, which must not exceed the achieved `F(k)`.
pub fn tightened_bound(k: usize, f_k: f64, price: f64) -> usize {
    k + (f_k / price).max(0.0).floor() as usize
}

/// Solves the full scheduling game with the default tolerance.
pub fn solve_ce_game(
    spec: &GameSpec,
    gram: &GramianCache,
    ricc: &RiccatiSolution,
) -> Result<CESolution> {
    solve_ce_game_with_eps(spec, gram, ricc, default_eps(ricc.grid().tf()))
}

/// Solves the full scheduling game: rejects non-dominant specs, short-circuits
/// the free-observation and infinite-price cases, and otherwise enumerates
/// schedule lengths `0, 1, 2, …` under the tightening budget bound, solving
/// each length by bisection and keeping the argmin (ties to fewer snapshots).
pub fn solve_ce_game_with_eps(
    spec: &GameSpec,
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    eps: f64,
) -> Result<CESolution> {
    spec.validate()?;
    let class = spec.dominance().class;
    if class == DominanceClass::NotDominant {
        return Err(Error::NotDominant(
            "the evader can out-maneuver the pursuer, so no finite-value schedule exists".into(),
        ));
    }
    let tf = ricc.grid().tf();
    let price = spec.price_p;
    if price == 0.0 {
        // Free snapshots: observe continuously. Not representable as a finite
        // instant list, so it is reported as a flag with zero schedule cost.
        return Ok(CESolution {
            pursuer_plan: ObservationPlan::empty(),
            evader_plan: ObservationPlan::empty(),
            f_table: Vec::new(),
            n_upper: 0,
            n_upper_tight: 0,
            first_order_residuals: Vec::new(),
            objective: 0.0,
            observe_always: true,
            class,
        });
    }

    let n_upper = np_upper_bound(gram, ricc, price)?;
    let f0 = objective_f(gram, ricc, &[], price)?;
    let mut f_table = vec![(0usize, f0)];
    let mut best_n = 0usize;
    let mut best_f = f0;
    let mut best_instants: Vec<f64> = Vec::new();
    let mut tight = if price.is_finite() {
        n_upper.min(tightened_bound(0, f0, price))
    } else {
        0
    };
    let mut n = 1;
    while n <= tight {
        let instants = binary_search_instants(gram, ricc, n, eps)?;
        let f = objective_f(gram, ricc, &instants, price)?;
        f_table.push((n, f));
        if f < best_f - 1e-9 * (1.0 + best_f.abs()) {
            best_n = n;
            best_f = f;
            best_instants = instants;
        }
        tight = tight.min(tightened_bound(n, f, price));
        n += 1;
    }
    let first_order_residuals = first_order_residuals(gram, ricc, &best_instants)?;
    debug_assert_eq!(best_n, best_instants.len());
    Ok(CESolution {
        pursuer_plan: ObservationPlan::new(best_instants, tf)?,
        evader_plan: ObservationPlan::empty(),
        f_table,
        n_upper,
        n_upper_tight: tight,
        first_order_residuals,
        objective: best_f,
        observe_always: false,
        class,
    })
}

/// Panels for the average-cost integral inside the periodic solver.
const PERIODIC_PANELS: usize = 256;

/// `∫₀^Δ Tr[Σ(t)·φ̃] dt` by composite Simpson with the half-step recurrence.
fn periodic_gap_cost(
    a: &DMatrix<f64>,
    cc: &DMatrix<f64>,
    phi: &DMatrix<f64>,
    delta: f64,
) -> Result<f64> {
    if delta <= 0.0 {
        return Ok(0.0);
    }
    let w = delta / PERIODIC_PANELS as f64;
    let (e, s) = van_loan_pair(a, cc, w / 2.0)?;
    let mut x = DMatrix::<f64>::zeros(a.nrows(), a.ncols());
    let mut acc = 0.0;
    for _ in 0..PERIODIC_PANELS {
        let fa = x.dot(phi);
        let mut xm = &e * &x * e.transpose() + &s;
        symmetrize(&mut xm);
        let fm = xm.dot(phi);
        let mut xb = &e * &xm * e.transpose() + &s;
        symmetrize(&mut xb);
        let fb = xb.dot(phi);
        acc += w / 6.0 * (fa + 4.0 * fm + fb);
        x = xb;
    }
    Ok(acc)
}

/// Optimal steady-rhythm interval for the infinite-horizon game under the
/// stationary feedback weight `φ̃ = K̃·D·K̃`: the unique root of
///
/// ```text
///     g(Δ) = Δ·Tr[Σ(Δ)φ̃] − ∫₀^Δ Tr[Σ(t)φ̃]dt − price = 0 ,
/// ```
///
/// which is the stationarity condition of the average cost rate
/// `(∫₀^Δ Tr[Σφ̃]dt + price)/Δ`. `g` is increasing, so the root is bracketed
/// by doubling and then bisected.
pub fn periodic_period(
    spec: &GameSpec,
    k_inf: &DMatrix<f64>,
    price: f64,
) -> Result<PeriodicSolution> {
    spec.validate()?;
    let n = spec.n();
    if k_inf.nrows() != n || k_inf.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "steady-state value matrix must be {n}x{n}, got {}x{}",
            k_inf.nrows(),
            k_inf.ncols()
        )));
    }
    if spec.dominance().class == DominanceClass::NotDominant {
        return Err(Error::NotDominant(
            "periodic sampling is defined only when the pursuer out-maneuvers the evader".into(),
        ));
    }
    if price == 0.0 {
        return Err(Error::ZeroPrice);
    }
    if !price.is_finite() || price < 0.0 {
        return Err(Error::OutOfRange(format!(
            "periodic sampling needs a finite positive price, got {price}"
        )));
    }
    let a = &spec.a;
    let cc = spec.noise_gramian();
    let d = spec.dominance_gap();
    let mut phi = k_inf * &d * k_inf;
    symmetrize(&mut phi);

    let g = |delta: f64| -> Result<f64> {
        let (_, sigma) = van_loan_pair(a, &cc, delta)?;
        Ok(delta * sigma.dot(&phi) - periodic_gap_cost(a, &cc, &phi, delta)? - price)
    };

    if phi.iter().all(|&v| v == 0.0) {
        return Err(Error::NoBracket(
            "the scheduling weight vanishes, so no snapshot ever pays for itself".into(),
        ));
    }

    // g(0) = −price < 0; expand the upper end until the sign flips. Running
    // out of representable intervals (the exponentials overflow first for a
    // stable drift) is a bracketing failure, not a solver bug.
    let mut hi = 1.0;
    let mut doubled = 0;
    loop {
        match g(hi) {
            Ok(v) if v > 0.0 => break,
            Ok(_) => {}
            Err(_) => {
                return Err(Error::NoBracket(format!(
                    "interval cost stays below the price {price} for every interval \
                     the arithmetic can represent"
                )));
            }
        }
        hi *= 2.0;
        doubled += 1;
        if doubled > 80 {
            return Err(Error::NoBracket(format!(
                "interval cost never reaches the price {price}"
            )));
        }
    }
    let mut lo = if doubled == 0 { 0.0 } else { hi / 2.0 };
    for _ in 0..200 {
        if hi - lo <= 1e-13 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let dt_star = 0.5 * (lo + hi);
    let residual = g(dt_star)?;
    let avg_cost = (periodic_gap_cost(a, &cc, &phi, dt_star)? + price) / dt_star;
    let (e, _) = van_loan_pair(a, &cc, dt_star)?;
    let second_derivative = (&e * &cc * e.transpose()).dot(&phi) / dt_star;
    if second_derivative <= 0.0 {
        return Err(Error::NoConvergence(
            "stationary sampling interval is not a cost minimum".into(),
        ));
    }
    Ok(PeriodicSolution {
        dt_star,
        avg_cost,
        second_derivative,
        residual,
    })
}
