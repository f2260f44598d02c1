//! Continuous-time numerics shared by every solver stage.
//!
//! Three primitives live here:
//!
//! * the backward matrix Riccati recursion producing the value matrix `K(t)`
//!   and its steady-state limit `K̃` ([`riccati`]),
//! * the estimation-error Gramian `Σ(τ) = ∫₀^τ e^{As} CC' e^{A's} ds`, the
//!   covariance accumulated τ time units after an exact observation
//!   ([`gramian`]),
//! * the trace quadrature `∫ Tr[Σ(t−τ₀) φ(t)] dt` with
//!   `φ(t) = K(t)·D·K(t)`, the rate at which estimation error is converted
//!   into game cost ([`gramian`]).
//!
//! All of them operate on a shared uniform [`TimeGrid`] over `[0, T]`; the
//! quadrature panels are aligned to it so that repeated evaluations reuse the
//! same `K` and `φ` tables.

pub mod exp;
pub mod gramian;
pub mod riccati;

pub use exp::matrix_exp;
pub use gramian::{van_loan_pair, GramianCache};
pub use riccati::{solve_riccati_algebraic, solve_riccati_finite, RiccatiSolution};

use crate::error::{Error, Result};

/// Uniform discretization of `[0, T]` with `n_steps` equal steps
/// (`n_steps + 1` nodes).
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    tf: f64,
    n_steps: usize,
}

impl TimeGrid {
    /// A grid over `[0, tf]` with `n_steps ≥ 1` uniform steps.
    pub fn new(tf: f64, n_steps: usize) -> Result<Self> {
        if !tf.is_finite() || tf <= 0.0 {
            return Err(Error::NonPositiveHorizon(tf));
        }
        if n_steps == 0 {
            return Err(Error::OutOfRange("grid needs at least one step".into()));
        }
        Ok(TimeGrid { tf, n_steps })
    }

    /// Final time `T`.
    pub fn tf(&self) -> f64 {
        self.tf
    }

    /// Number of steps (one less than the node count).
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Step width `T / n_steps`.
    pub fn h(&self) -> f64 {
        self.tf / self.n_steps as f64
    }

    /// The k-th node time; the last node is exactly `T`.
    pub fn node(&self, k: usize) -> f64 {
        debug_assert!(k <= self.n_steps);
        if k == self.n_steps {
            self.tf
        } else {
            k as f64 * self.h()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_nodes_are_uniform_and_hit_the_endpoints() {
        let g = TimeGrid::new(6.0, 4096).unwrap();
        assert_eq!(g.node(0), 0.0);
        assert_eq!(g.node(4096), 6.0);
        assert!((g.node(1) - 6.0 / 4096.0).abs() < 1e-15);
        assert!((g.h() * 4096.0 - 6.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_grids_are_rejected() {
        assert!(TimeGrid::new(0.0, 8).is_err());
        assert!(TimeGrid::new(-1.0, 8).is_err());
        assert!(TimeGrid::new(1.0, 0).is_err());
        assert!(TimeGrid::new(f64::NAN, 8).is_err());
    }
}
