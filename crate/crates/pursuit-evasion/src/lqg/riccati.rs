//! Backward value recursion and its steady state.
//!
//! The value matrix of the game satisfies, backward from `K(T) = QT`,
//!
//! ```text
//!     −K̇ = Q + K A + A' K − K D K ,          D = Bp Rp⁻¹ Bp' − Be Re⁻¹ Be' ,
//! ```
//!
//! and both players' feedback laws as well as the observation-scheduling
//! weight `φ(t) = K(t)·D·K(t)` are read off from it. The recursion is
//! integrated with classic fourth-order Runge-Kutta on a uniform grid,
//! re-symmetrizing after every step; between nodes `K` is interpolated
//! linearly. The steady state `K̃` is obtained by running the recursion until
//! successive snapshots settle and then polishing with Newton steps, each of
//! which solves the Lyapunov linearization exactly.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lqg::TimeGrid;
use crate::model::{symmetrize, DominanceClass, GameSpec};

/// Default number of backward integration steps over the horizon.
pub const DEFAULT_RICCATI_STEPS: usize = 4096;

/// Entry cap beyond which the backward sweep is declared to have escaped in
/// finite time (the game value is unbounded from that time on).
pub const ESCAPE_CAP: f64 = 1e12;

/// Distance between steady-state snapshots, in time units.
const STEADY_WINDOW: f64 = 1.0;
/// Snapshot difference below which the recursion counts as settled.
const STEADY_SNAPSHOT_TOL: f64 = 1e-10;
/// Give up on the steady state after this many snapshot windows.
const STEADY_MAX_WINDOWS: usize = 400;
/// Integration steps per snapshot window during the steady-state sweep.
const STEADY_STEPS_PER_WINDOW: usize = 128;

/// The solved value recursion on a uniform grid, with everything the rest of
/// the pipeline needs precomputed: `K` at the nodes, the scheduling weight
/// `φ = K·D·K` at nodes and panel midpoints, and both feedback gain factors.
#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    grid: TimeGrid,
    k_nodes: Vec<DMatrix<f64>>,
    phi_nodes: Vec<DMatrix<f64>>,
    phi_half: Vec<DMatrix<f64>>,
    d: DMatrix<f64>,
    /// `Rp⁻¹ Bp'` (m_p×n): pursuer feedback is `−gain_p·K(t)·x̂`.
    gain_p: DMatrix<f64>,
    /// `Re⁻¹ Be'` (m_e×n): evader feedback is `−gain_e·K(t)·x̂`.
    gain_e: DMatrix<f64>,
}

impl RiccatiSolution {
    fn assemble(spec: &GameSpec, grid: TimeGrid, k_nodes: Vec<DMatrix<f64>>) -> Result<Self> {
        debug_assert_eq!(k_nodes.len(), grid.n_steps() + 1);
        let d = spec.dominance_gap();
        let gain_p = weight_solve(&spec.rp, &spec.bp);
        let gain_e = weight_solve(&spec.re, &spec.be);
        let n_steps = grid.n_steps();
        let phi_nodes: Vec<_> = k_nodes.iter().map(|k| phi_of(k, &d)).collect();
        let mut phi_half = Vec::with_capacity(n_steps);
        for j in 0..n_steps {
            let mid = (&k_nodes[j] + &k_nodes[j + 1]) * 0.5;
            phi_half.push(phi_of(&mid, &d));
        }
        Ok(RiccatiSolution {
            grid,
            k_nodes,
            phi_nodes,
            phi_half,
            d,
            gain_p,
            gain_e,
        })
    }

    /// A solution frozen at a steady state: `K(t) ≡ k_tilde` on `[0, tf]`.
    /// Used to drive long simulations under the stationary feedback laws.
    pub fn stationary(
        spec: &GameSpec,
        k_tilde: &DMatrix<f64>,
        tf: f64,
        n_steps: usize,
    ) -> Result<Self> {
        let n = spec.n();
        if k_tilde.nrows() != n || k_tilde.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "steady-state value matrix must be {n}x{n}, got {}x{}",
                k_tilde.nrows(),
                k_tilde.ncols()
            )));
        }
        if k_tilde.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry("steady-state value matrix"));
        }
        let grid = TimeGrid::new(tf, n_steps)?;
        let nodes = vec![k_tilde.clone(); n_steps + 1];
        Self::assemble(spec, grid, nodes)
    }

    /// The integration grid (also the quadrature grid downstream).
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// The maneuverability gap `D` this solution was built with.
    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }

    /// `Rp⁻¹ Bp'`.
    pub fn gain_p(&self) -> &DMatrix<f64> {
        &self.gain_p
    }

    /// `Re⁻¹ Be'`.
    pub fn gain_e(&self) -> &DMatrix<f64> {
        &self.gain_e
    }

    /// `K` at grid node `j` (exact integrator output, no interpolation).
    pub fn k_node(&self, j: usize) -> &DMatrix<f64> {
        &self.k_nodes[j]
    }

    /// `K(0)`, the full-information game value factor: the expected cost with
    /// continuous observation is `x0'·K(0)·x0` plus the noise floor.
    pub fn k0(&self) -> &DMatrix<f64> {
        &self.k_nodes[0]
    }

    /// `φ = K·D·K` at grid node `j`.
    pub(crate) fn phi_node(&self, j: usize) -> &DMatrix<f64> {
        &self.phi_nodes[j]
    }

    /// `φ` at the midpoint of grid panel `j` (from the interpolated `K`).
    pub(crate) fn phi_half(&self, j: usize) -> &DMatrix<f64> {
        &self.phi_half[j]
    }

    /// Maps a time in `[0, T]` (with a small relative slack) to a panel index
    /// and the interpolation weight within it.
    fn locate(&self, t: f64) -> Result<(usize, f64)> {
        let tf = self.grid.tf();
        let slack = 1e-9 * (1.0 + tf);
        if !t.is_finite() || t < -slack || t > tf + slack {
            return Err(Error::OutOfRange(format!(
                "time {t} outside the solved horizon [0, {tf}]"
            )));
        }
        let t = t.clamp(0.0, tf);
        let h = self.grid.h();
        let j = ((t / h) as usize).min(self.grid.n_steps() - 1);
        let theta = ((t - self.grid.node(j)) / h).clamp(0.0, 1.0);
        Ok((j, theta))
    }

    /// `K(t)` by linear interpolation between the bracketing nodes.
    pub fn k_at(&self, t: f64) -> Result<DMatrix<f64>> {
        let (j, theta) = self.locate(t)?;
        Ok(&self.k_nodes[j] * (1.0 - theta) + &self.k_nodes[j + 1] * theta)
    }

    /// `K(t)·x` without materializing the interpolated matrix.
    pub fn k_apply(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        let (j, theta) = self.locate(t)?;
        Ok(&self.k_nodes[j] * x * (1.0 - theta) + &self.k_nodes[j + 1] * x * theta)
    }

    /// `φ(t) = K(t)·D·K(t)` with the same interpolation rule as [`Self::k_at`].
    pub fn phi_at(&self, t: f64) -> Result<DMatrix<f64>> {
        let (j, theta) = self.locate(t)?;
        if theta == 0.0 {
            return Ok(self.phi_nodes[j].clone());
        }
        let k = &self.k_nodes[j] * (1.0 - theta) + &self.k_nodes[j + 1] * theta;
        Ok(phi_of(&k, &self.d))
    }

    /// `∫₀^T Tr[K(t)·CC'] dt`: the cost floor contributed by process noise
    /// even under continuous observation. Composite Simpson over node pairs,
    /// trapezoid on an odd remainder panel.
    pub fn trace_noise_integral(&self, cc: &DMatrix<f64>) -> Result<f64> {
        let n = self.k_nodes[0].nrows();
        if cc.nrows() != n || cc.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "noise Gramian must be {n}x{n}, got {}x{}",
                cc.nrows(),
                cc.ncols()
            )));
        }
        // Both factors are symmetric, so Tr[K·CC'] is the entrywise dot.
        let f: Vec<f64> = self.k_nodes.iter().map(|k| k.dot(cc)).collect();
        let h = self.grid.h();
        let m = self.grid.n_steps();
        let mut acc = 0.0;
        let mut j = 0;
        while j + 2 <= m {
            acc += h / 3.0 * (f[j] + 4.0 * f[j + 1] + f[j + 2]);
            j += 2;
        }
        if j + 1 <= m {
            acc += h / 2.0 * (f[j] + f[j + 1]);
        }
        Ok(acc)
    }
}

/// Solves the backward recursion over `[0, T]` with `n_steps` uniform RK4
/// steps. Fails with [`Error::FiniteEscape`] if any entry exceeds
/// [`ESCAPE_CAP`] on the way down, which happens exactly when the evader is
/// maneuverable enough to blow up the game value before time 0.
pub fn solve_riccati_finite(spec: &GameSpec, n_steps: usize) -> Result<RiccatiSolution> {
    spec.validate()?;
    let grid = TimeGrid::new(spec.horizon, n_steps)?;
    let h = grid.h();
    let d = spec.dominance_gap();
    let mut k = spec.qt.clone();
    let mut nodes = Vec::with_capacity(n_steps + 1);
    nodes.push(k.clone());
    for step in 1..=n_steps {
        k = rk4_backward_step(&k, h, &spec.a, &spec.q, &d);
        if !entries_ok(&k, ESCAPE_CAP) {
            return Err(Error::FiniteEscape {
                t: spec.horizon - step as f64 * h,
                cap: ESCAPE_CAP,
            });
        }
        nodes.push(k.clone());
    }
    nodes.reverse();
    RiccatiSolution::assemble(spec, grid, nodes)
}

/// Computes the steady state `K̃` of the value recursion, the unique
/// stabilizing solution of `Q + K A + A' K − K D K = 0`.
///
/// Requires a pursuer-dominant (or equal) gap and, when `Q ≠ 0`, an
/// observable pair `(A, Q^(1/2))`; with `Q = 0` the zero matrix is returned
/// immediately. The recursion is run backward from zero until snapshots taken
/// one time unit apart settle below 1e-10, then Newton steps polish the
/// result to machine precision.
pub fn solve_riccati_algebraic(spec: &GameSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let dom = spec.dominance();
    if dom.class == DominanceClass::NotDominant {
        return Err(Error::NotDominant(
            "the steady-state value equation needs a positive semidefinite maneuverability gap"
                .into(),
        ));
    }
    let n = spec.n();
    if spec.q.iter().all(|&v| v == 0.0) {
        return Ok(DMatrix::zeros(n, n));
    }
    check_observable(&spec.a, &spec.q)?;
    let d = dom.gap;

    // Phase 1: backward sweep from zero terminal weight until it settles.
    let h = STEADY_WINDOW / STEADY_STEPS_PER_WINDOW as f64;
    let mut k = DMatrix::<f64>::zeros(n, n);
    let mut settled = false;
    for _ in 0..STEADY_MAX_WINDOWS {
        let prev = k.clone();
        for _ in 0..STEADY_STEPS_PER_WINDOW {
            k = rk4_backward_step(&k, h, &spec.a, &spec.q, &d);
            if !entries_ok(&k, ESCAPE_CAP) {
                return Err(Error::NoConvergence(
                    "steady-state sweep diverged; the stationary game value is unbounded".into(),
                ));
            }
        }
        if (&k - &prev).norm() < STEADY_SNAPSHOT_TOL {
            settled = true;
            break;
        }
    }
    if !settled {
        return Err(Error::NoConvergence(format!(
            "value recursion did not settle within {STEADY_MAX_WINDOWS} time units"
        )));
    }

    // Phase 2: Newton polish. Each step solves the Lyapunov linearization
    //     (A − D·K)'·X + X·(A − D·K) = −(Q + K·D·K)
    // exactly, converging quadratically near the stabilizing solution.
    for _ in 0..50 {
        let f = &spec.a - &d * &k;
        let mut w = &spec.q + &k * &d * &k;
        symmetrize(&mut w);
        let x = solve_lyapunov(&f, &w).ok_or_else(|| {
            Error::NoConvergence("Newton step for the steady state is singular".into())
        })?;
        let delta = (&x - &k).norm();
        k = x;
        if delta <= 1e-13 * (1.0 + k.norm()) {
            break;
        }
    }

    let residual = riccati_rhs(&k, &spec.a, &spec.q, &d).norm();
    if residual > 1e-8 * (1.0 + k.norm_squared()) {
        return Err(Error::NoConvergence(format!(
            "steady-state residual {residual:.3e} exceeds tolerance"
        )));
    }
    Ok(k)
}

/// Right-hand side of the recursion in backward time: `Q + KA + A'K − KDK`.
fn riccati_rhs(
    k: &DMatrix<f64>,
    a: &DMatrix<f64>,
    q: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> DMatrix<f64> {
    let ka = k * a;
    let kdk = k * d * k;
    let mut out = q + &ka + ka.transpose() - kdk;
    symmetrize(&mut out);
    out
}

/// One RK4 step of size `h` in backward time (toward smaller `t`),
/// re-symmetrized so asymmetry cannot compound over thousands of steps.
fn rk4_backward_step(
    k: &DMatrix<f64>,
    h: f64,
    a: &DMatrix<f64>,
    q: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> DMatrix<f64> {
    let s1 = riccati_rhs(k, a, q, d);
    let s2 = riccati_rhs(&(k + &s1 * (h / 2.0)), a, q, d);
    let s3 = riccati_rhs(&(k + &s2 * (h / 2.0)), a, q, d);
    let s4 = riccati_rhs(&(k + &s3 * h), a, q, d);
    let mut next = k + (s1 + s2 * 2.0 + s3 * 2.0 + s4) * (h / 6.0);
    symmetrize(&mut next);
    next
}

fn entries_ok(m: &DMatrix<f64>, cap: f64) -> bool {
    m.iter().all(|v| v.is_finite() && v.abs() <= cap)
}

/// `φ = K·D·K`, symmetrized.
fn phi_of(k: &DMatrix<f64>, d: &DMatrix<f64>) -> DMatrix<f64> {
    let mut p = k * d * k;
    symmetrize(&mut p);
    p
}

/// `R⁻¹·B'` via the Cholesky factor of the validated PD weight `R`.
fn weight_solve(r: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    r.clone()
        .cholesky()
        .expect("control weight validated positive definite")
        .solve(&b.transpose())
}

/// Solves `F'X + XF = −W` for symmetric `X` via the Kronecker normal
/// equations; returns `None` when the Lyapunov operator is singular
/// (i.e. `F` has eigenvalues summing to zero in pairs).
fn solve_lyapunov(f: &DMatrix<f64>, w: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = f.nrows();
    let ft = f.transpose();
    let id = DMatrix::<f64>::identity(n, n);
    let op = id.kronecker(&ft) + ft.kronecker(&id);
    let negw = w * -1.0;
    let rhs = DVector::from_column_slice(negw.as_slice());
    let sol = op.lu().solve(&rhs)?;
    let mut x = DMatrix::from_column_slice(n, n, sol.as_slice());
    symmetrize(&mut x);
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(x)
}

/// Rejects pairs `(A, Q^(1/2))` whose observability matrix is rank deficient:
/// without observability the steady-state sweep can stall on a non-stabilizing
/// fixed point instead of failing loudly.
fn check_observable(a: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<()> {
    let n = a.nrows();
    let eig = q.clone().symmetric_eigen();
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let sqrt_q = &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose();
    let mut obs = DMatrix::<f64>::zeros(n * n, n);
    let mut block = sqrt_q;
    for i in 0..n {
        obs.view_mut((i * n, 0), (n, n)).copy_from(&block);
        block = &block * a;
    }
    let svd = obs.svd(false, false);
    let smax = svd.singular_values.iter().fold(0.0f64, |m, &v| m.max(v));
    let tol = 1e-10 * smax.max(1.0);
    let rank = svd.singular_values.iter().filter(|&&v| v > tol).count();
    if rank < n {
        return Err(Error::NotObservable { rank, n });
    }
    Ok(())
}
