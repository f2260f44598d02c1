//! Fixtures shared by the integration-test targets.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use pursuit_evasion::ce::{objective_f, solve_ce_game};
use pursuit_evasion::lqg::{solve_riccati_finite, GramianCache, RiccatiSolution, TimeGrid};
use pursuit_evasion::model::GameSpec;
use pursuit_evasion::{CESolution, DominanceClass};

/// Reference planar chase: double-integrator kinematics per axis, positions
/// weighted, velocities free, each player injecting noise of intensity 4 per
/// channel (combined intensity √32 per state component).
pub fn planar_chase(snapshot_price: f64) -> GameSpec {
    let n = 4;
    let mut a = DMatrix::zeros(n, n);
    a[(0, 2)] = 1.0;
    a[(1, 3)] = 1.0;
    let mut b = DMatrix::zeros(n, 2);
    b[(2, 0)] = 1.0;
    b[(3, 1)] = 1.0;
    let c = DMatrix::identity(n, n) * 32.0_f64.sqrt();
    let q = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]));
    let qt = &q * 10.0;
    let rp = DMatrix::identity(2, 2) * 1.6;
    let re = DMatrix::identity(2, 2) * 2.0;
    let x0 = DVector::from_vec(vec![100.0, -30.0, 4.0, 0.0]);
    GameSpec::new(a, b.clone(), b, c, q, qt, rp, re, snapshot_price, 900.0, 6.0, x0)
        .expect("reference chase is a valid game")
}

/// Scalar game with drift-free dynamics and an inert evader: gap 1/2,
/// steady-state value √2, scheduling weight exactly 1 at every time.
pub fn scalar_flat(noise: f64, snapshot_price: f64, horizon: f64) -> GameSpec {
    let one = DMatrix::identity(1, 1);
    GameSpec::new(
        DMatrix::zeros(1, 1),
        one.clone(),
        DMatrix::zeros(1, 1),
        one.clone() * noise,
        one.clone(),
        one.clone() * 2.0_f64.sqrt(),
        one.clone() * 2.0,
        one,
        snapshot_price,
        900.0,
        horizon,
        DVector::from_element(1, 1.0),
    )
    .expect("scalar flat game is valid")
}

/// Scalar game with zero terminal weight, so the value decays toward the
/// horizon and the scheduling weight is time-varying.
pub fn scalar_decay(snapshot_price: f64, horizon: f64) -> GameSpec {
    let one = DMatrix::identity(1, 1);
    GameSpec::new(
        DMatrix::zeros(1, 1),
        one.clone(),
        DMatrix::zeros(1, 1),
        one.clone(),
        one.clone(),
        DMatrix::zeros(1, 1),
        one.clone() * 2.0,
        one,
        snapshot_price,
        900.0,
        horizon,
        DVector::from_element(1, 1.0),
    )
    .expect("scalar decay game is valid")
}

pub fn split_mix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform sample in `[0, 1)`.
pub fn unit(state: &mut u64) -> f64 {
    (split_mix(state) >> 11) as f64 / (1u64 << 53) as f64
}

/// Uniform sample in `[-1, 1)`.
pub fn symmetric(state: &mut u64) -> f64 {
    2.0 * unit(state) - 1.0
}

/// Random game of dimension 1–4 in which the pursuer out-maneuvers the
/// evader by construction (`Be` is a strict contraction of `Bp`, equal
/// control weights). Deterministic in `seed`.
pub fn random_dominant_spec(seed: u64) -> GameSpec {
    let mut s = seed;
    for _ in 0..16 {
        let n = 1 + (split_mix(&mut s) % 4) as usize;
        let mut a = DMatrix::from_fn(n, n, |_, _| 0.7 * symmetric(&mut s));
        a -= DMatrix::identity(n, n) * 0.2;
        let bp = DMatrix::identity(n, n) + DMatrix::from_fn(n, n, |_, _| 0.25 * symmetric(&mut s));
        let gamma = 0.3 + 0.5 * unit(&mut s);
        let be = &bp * gamma;
        let g = DMatrix::from_fn(n, n, |_, _| symmetric(&mut s));
        let q = (g.transpose() * &g) / (n as f64) + DMatrix::identity(n, n) * 0.3;
        let h = DMatrix::from_fn(n, n, |_, _| symmetric(&mut s));
        let qt = (h.transpose() * &h) * (unit(&mut s) * 1.5 / (n as f64));
        let c = DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| 0.5 + 1.5 * unit(&mut s)));
        let rp = DMatrix::identity(n, n);
        let re = DMatrix::identity(n, n);
        let horizon = 1.5 + 1.5 * unit(&mut s);
        let x0 = DVector::from_fn(n, |_, _| 3.0 * symmetric(&mut s));
        let spec = GameSpec::new(a, bp, be, c, q, qt, rp, re, 1.0, 900.0, horizon, x0);
        if let Ok(sp) = spec {
            if sp.dominance().class == DominanceClass::PursuerDominant {
                return sp;
            }
        }
    }
    panic!("no dominant game found from seed {seed}");
}

/// Builds a random dominant game, prices snapshots at `frac` of the
/// no-observation cost so the optimal count stays small, and solves it.
pub fn solved_random(
    seed: u64,
    frac: f64,
    steps: usize,
) -> (GameSpec, RiccatiSolution, GramianCache, CESolution) {
    let mut spec = random_dominant_spec(seed);
    let ricc = solve_riccati_finite(&spec, steps).expect("value recursion");
    let gram = GramianCache::new(&spec, TimeGrid::new(spec.horizon, steps).unwrap())
        .expect("gramian lattice");
    let est0 = objective_f(&gram, &ricc, &[], spec.price_p).expect("no-observation cost");
    spec.price_p = (frac * est0).max(1e-6);
    let sol = solve_ce_game(&spec, &gram, &ricc).expect("schedule solve");
    (spec, ricc, gram, sol)
}

/// Rounds to four decimals for compact printing.
pub fn rounded(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|x| (x * 1e4).round() / 1e4).collect()
}
