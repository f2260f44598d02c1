//! Closed-form expected cost and structural diagnostics.
//!
//! Because an observation reveals the state to *both* players, the expected
//! realized cost of a pair of plans splits into three pieces:
//!
//! * an **estimation term** — per unobserved gap, the accumulated covariance
//!   traced against the scheduling weight `φ(t) = K(t)·D·K(t)` (every reset
//!   helps, no matter who paid for it),
//! * an **observation bill** — each side pays its own price per snapshot it
//!   triggered, with opposite signs because the game is zero-sum,
//! * a plan-independent **baseline** — the full-information value
//!   `x₀'K(0)x₀ + ∫ Tr[K(t)CC'] dt`.
//!
//! [`observation_cost`] isolates the schedule-dependent part, which is what
//! the scheduling solver optimizes; [`expected_cost`] adds the baseline so
//! Monte Carlo means can be checked against it.

use nalgebra::{Complex, DMatrix};

use crate::ce::ObservationPlan;
use crate::error::{Error, Result};
use crate::lqg::gramian::trace_cost_integral;
use crate::lqg::{matrix_exp, GramianCache, RiccatiSolution};
use crate::model::GameSpec;

/// Expected realized cost of a pair of plans, split by origin.
#[derive(Debug, Clone, PartialEq)]
pub struct CostBreakdown {
    /// Σ over unobserved gaps of `∫ Tr[Σ(t−tᵢ)φ(t)] dt`.
    pub estimation_term: f64,
    /// `price_p·N_p − price_e·N_e` (zero-sum: the evader's bill is a credit).
    pub obs_price_term: f64,
    /// Plan-independent full-information value.
    pub baseline_term: f64,
    /// Sum of the three terms.
    pub total: f64,
}

/// Spectrum of the steady-state closed loop `Ā = A − D·K̃`.
#[derive(Debug, Clone)]
pub struct ClosedLoopReport {
    /// Eigenvalues of `Ā`.
    pub eigenvalues: Vec<Complex<f64>>,
    /// All real parts strictly negative (below `−1e-9`).
    pub hurwitz: bool,
    /// Sampling interval the discrete check was run at.
    pub sample_interval: f64,
    /// Spectral radius of the sampled map `e^{Ā·h}`.
    pub sampled_radius: f64,
}

/// Estimation terms of a schedule and one of its refinements.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityReport {
    /// Estimation term of the coarse schedule.
    pub coarse: f64,
    /// Estimation term of the refined schedule.
    pub fine: f64,
    /// Whether refinement did not increase the estimation term (within
    /// rounding slack).
    pub confirmed: bool,
}

/// Estimation cost of leaving the state unobserved between consecutive
/// resets at `instants` (sorted, inside the horizon), with sentinels at `0`
/// and `T`.
fn estimation_term(
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    instants: &[f64],
) -> Result<f64> {
    let tf = ricc.grid().tf();
    let mut prev = 0.0;
    let mut acc = 0.0;
    for &t in instants {
        acc += trace_cost_integral(gram, ricc, prev, prev, t)?;
        prev = t;
    }
    acc += trace_cost_integral(gram, ricc, prev, prev, tf)?;
    Ok(acc)
}

/// Each side's observation bill; a side with no snapshots owes nothing even
/// at an infinite price.
fn price_term(spec: &GameSpec, plan_p: &ObservationPlan, plan_e: &ObservationPlan) -> f64 {
    let mut term = 0.0;
    if plan_p.n() > 0 {
        term += spec.price_p * plan_p.n() as f64;
    }
    if plan_e.n() > 0 {
        term -= spec.price_e * plan_e.n() as f64;
    }
    term
}

/// Closed-form expected realized cost of the game under the two plans.
pub fn expected_cost(
    spec: &GameSpec,
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    plan_p: &ObservationPlan,
    plan_e: &ObservationPlan,
) -> Result<CostBreakdown> {
    spec.validate()?;
    let merged = plan_p.merged_with(plan_e);
    let estimation = estimation_term(gram, ricc, &merged)?;
    let price = price_term(spec, plan_p, plan_e);
    let cc = spec.noise_gramian();
    let baseline =
        ricc.k_apply(0.0, &spec.x0)?.dot(&spec.x0) + ricc.trace_noise_integral(&cc)?;
    Ok(CostBreakdown {
        estimation_term: estimation,
        obs_price_term: price,
        baseline_term: baseline,
        total: estimation + price + baseline,
    })
}

/// Schedule-dependent part of the expected cost: estimation term plus the
/// observation bill. With an empty evader plan this equals the scheduling
/// objective the solver minimizes.
pub fn observation_cost(
    spec: &GameSpec,
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    plan_p: &ObservationPlan,
    plan_e: &ObservationPlan,
) -> Result<f64> {
    spec.validate()?;
    let merged = plan_p.merged_with(plan_e);
    Ok(estimation_term(gram, ricc, &merged)? + price_term(spec, plan_p, plan_e))
}

/// Eigenvalues of the steady-state closed loop `Ā = A − D·K̃`, a Hurwitz
/// verdict, and the spectral radius of the sampled map `e^{Ā·h}` for one
/// sampling interval `h`.
pub fn closed_loop_eigs(
    spec: &GameSpec,
    k_inf: &DMatrix<f64>,
    h: f64,
) -> Result<ClosedLoopReport> {
    spec.validate()?;
    let n = spec.n();
    if k_inf.nrows() != n || k_inf.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "steady-state value matrix must be {n}x{n}, got {}x{}",
            k_inf.nrows(),
            k_inf.ncols()
        )));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "sampling interval must be positive and finite, got {h}"
        )));
    }
    let a_bar = &spec.a - spec.dominance_gap() * k_inf;
    let eigenvalues: Vec<Complex<f64>> = a_bar.complex_eigenvalues().iter().copied().collect();
    let hurwitz = eigenvalues.iter().all(|l| l.re < -1e-9);
    let sampled = matrix_exp(&a_bar, h)?;
    let sampled_radius = sampled
        .complex_eigenvalues()
        .iter()
        .map(|l| l.norm())
        .fold(0.0f64, f64::max);
    Ok(ClosedLoopReport {
        eigenvalues,
        hurwitz,
        sample_interval: h,
        sampled_radius,
    })
}

/// Compares the estimation terms of a schedule and a refinement of it.
/// `fine` must contain every instant of `coarse` (within snapping slack);
/// adding resets can only shed accumulated covariance, so the fine term must
/// not exceed the coarse one.
pub fn monotonicity_check(
    spec: &GameSpec,
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    coarse: &ObservationPlan,
    fine: &ObservationPlan,
) -> Result<MonotonicityReport> {
    spec.validate()?;
    let tol = 1e-9 * (1.0 + spec.horizon);
    for &t in coarse.instants() {
        if !fine.instants().iter().any(|&s| (s - t).abs() <= tol) {
            return Err(Error::NotSubset(format!(
                "instant {t} of the coarse schedule has no match in the refinement"
            )));
        }
    }
    let coarse_term = estimation_term(gram, ricc, coarse.instants())?;
    let fine_term = estimation_term(gram, ricc, fine.instants())?;
    let confirmed = fine_term <= coarse_term + 1e-9 * (1.0 + coarse_term.abs());
    Ok(MonotonicityReport {
        coarse: coarse_term,
        fine: fine_term,
        confirmed,
    })
}
