//! Shared fixtures for unit tests: small game instances with known
//! closed-form behavior. Compiled only for `cfg(test)`.

use nalgebra::{dmatrix, dvector, DMatrix};

use crate::model::GameSpec;

/// The bundled planar double-integrator game, positions first:
/// state = (y1, y2, v1, v2).
///
/// The two axes decouple, so the steady-state value matrix is the Kronecker
/// product of the per-axis solution [[2^(5/4), 2^(3/2)], [2^(3/2), 2^(11/4)]]
/// with the 2×2 identity.
pub fn double_integrator_spec(price_p: f64) -> GameSpec {
    let a = dmatrix![
        0.0, 0.0, 1.0, 0.0;
        0.0, 0.0, 0.0, 1.0;
        0.0, 0.0, 0.0, 0.0;
        0.0, 0.0, 0.0, 0.0;
    ];
    let b = dmatrix![
        0.0, 0.0;
        0.0, 0.0;
        1.0, 0.0;
        0.0, 1.0;
    ];
    let c = DMatrix::identity(4, 4) * 32.0f64.sqrt();
    let q = DMatrix::from_diagonal(&dvector![1.0, 1.0, 0.0, 0.0]);
    let qt = &q * 10.0;
    let rp = DMatrix::identity(2, 2) * 1.6;
    let re = DMatrix::identity(2, 2) * 2.0;
    GameSpec::new(
        a,
        b.clone(),
        b,
        c,
        q,
        qt,
        rp,
        re,
        price_p,
        900.0,
        6.0,
        dvector![100.0, -30.0, 4.0, 0.0],
    )
    .expect("reference spec is valid")
}

/// Scalar game pinned at its steady state: A = 0, D = 1/2, Q = 1 and the
/// terminal weight equals the stationary solution √2, so K(t) ≡ √2 and
/// φ(t) ≡ K·D·K = 1 on the whole horizon. Closed forms:
///
/// * Σ(τ) = c²τ,
/// * ∫_{ta}^{tb} Σ(t−τ₀)·φ dt = c²[(tb−τ₀)² − (ta−τ₀)²]/2,
/// * optimal schedules are equally spaced,
/// * optimal sampling interval Δ* = √(2·price_p)/c.
pub fn scalar_stationary_spec(c: f64, price_p: f64, horizon: f64) -> GameSpec {
    GameSpec::new(
        dmatrix![0.0],
        dmatrix![1.0],
        dmatrix![0.0],
        dmatrix![c],
        dmatrix![1.0],
        dmatrix![2.0f64.sqrt()],
        dmatrix![2.0],
        dmatrix![1.0],
        price_p,
        900.0,
        horizon,
        dvector![1.0],
    )
    .expect("scalar stationary spec is valid")
}

/// Scalar game with zero terminal weight: A = 0, D = 1/2, Q = 1, K(T) = 0.
/// The backward recursion has the closed form K(t) = √2·tanh((T−t)/√2).
pub fn scalar_decay_spec(horizon: f64) -> GameSpec {
    GameSpec::new(
        dmatrix![0.0],
        dmatrix![1.0],
        dmatrix![0.0],
        dmatrix![1.0],
        dmatrix![1.0],
        dmatrix![0.0],
        dmatrix![2.0],
        dmatrix![1.0],
        10.0,
        900.0,
        horizon,
        dvector![1.0],
    )
    .expect("scalar decay spec is valid")
}

/// Scalar game where the evader out-maneuvers the pursuer (D = −1) and the
/// running weight is 1: the backward recursion is K' = 1 + K² in backward
/// time, i.e. K(T−s) = tan(s), which escapes at s = π/2.
pub fn scalar_escape_spec(horizon: f64) -> GameSpec {
    GameSpec::new(
        dmatrix![0.0],
        dmatrix![0.0],
        dmatrix![1.0],
        dmatrix![1.0],
        dmatrix![1.0],
        dmatrix![0.0],
        dmatrix![1.0],
        dmatrix![1.0],
        10.0,
        900.0,
        horizon,
        dvector![1.0],
    )
    .expect("scalar escape spec is valid")
}
