//! Estimation-error Gramian and the trace quadratures built on it.
//!
//! Between observations neither player sees the state, and the estimation
//! error accumulated τ time units after an exact snapshot has covariance
//!
//! ```text
//!     Σ(τ) = ∫₀^τ e^{As} CC' e^{A's} ds ,
//! ```
//!
//! computed here in one matrix exponential via the block construction
//!
//! ```text
//!     exp( τ·[ −A   CC' ] )  =  [ ·   Z12 ]        Σ(τ) = Z22'·Z12 ,
//!     (      [  0   A'  ] )     [ 0   Z22 ]        e^{Aτ} = Z22' .
//! ```
//!
//! The expected-cost contribution of an unobserved stretch is
//! `∫ Tr[Σ(t−τ₀)·φ(t)] dt`, and its sensitivity kernel replaces `Σ` by its
//! derivative `N(u) = e^{Au}CC'e^{A'u}`. Both integrals are evaluated with a
//! per-panel Simpson rule on the shared solver grid; the kernels are advanced
//! across panels exactly through the half-step recurrences
//!
//! ```text
//!     Σ(u+δ) = e^{Aδ}·Σ(u)·e^{A'δ} + Σ(δ) ,      N(u+δ) = e^{Aδ}·N(u)·e^{A'δ} ,
//! ```
//!
//! so a full-horizon pass costs two small matrix products per half step and
//! no fresh exponentials except at unaligned interval ends.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lqg::riccati::RiccatiSolution;
use crate::lqg::TimeGrid;
use crate::model::{symmetrize, GameSpec};

/// Drift, noise Gramian and the cached half-panel transition pair used by
/// every quadrature over the solver grid.
#[derive(Debug, Clone)]
pub struct GramianCache {
    a: DMatrix<f64>,
    cc: DMatrix<f64>,
    grid: TimeGrid,
    /// `e^{A·h/2}` for the grid step `h`.
    e_half: DMatrix<f64>,
    /// `Σ(h/2)`.
    s_half: DMatrix<f64>,
}

impl GramianCache {
    pub fn new(spec: &GameSpec, grid: TimeGrid) -> Result<Self> {
        let a = spec.a.clone();
        let cc = spec.noise_gramian();
        let (e_half, s_half) = van_loan_pair(&a, &cc, grid.h() / 2.0)?;
        Ok(GramianCache {
            a,
            cc,
            grid,
            e_half,
            s_half,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    /// `CC'`.
    pub fn noise_gramian(&self) -> &DMatrix<f64> {
        &self.cc
    }

    /// `Σ(τ)` for `τ` within the solved horizon.
    pub fn sigma(&self, tau: f64) -> Result<DMatrix<f64>> {
        let tf = self.grid.tf();
        let slack = 1e-9 * (1.0 + tf);
        if !tau.is_finite() || tau < -slack || tau > tf + slack {
            return Err(Error::OutOfRange(format!(
                "gap length {tau} outside [0, {tf}]"
            )));
        }
        let (_, s) = van_loan_pair(&self.a, &self.cc, tau.clamp(0.0, tf))?;
        Ok(s)
    }
}

/// `(e^{Aτ}, Σ(τ))` in one block exponential; `τ` may be any nonnegative
/// length (unstable drifts fail loudly once the exponential overflows).
pub fn van_loan_pair(
    a: &DMatrix<f64>,
    cc: &DMatrix<f64>,
    tau: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    if !a.is_square() || cc.nrows() != n || cc.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "drift is {}x{}, noise Gramian is {}x{}",
            a.nrows(),
            a.ncols(),
            cc.nrows(),
            cc.ncols()
        )));
    }
    if !tau.is_finite() || tau < 0.0 {
        return Err(Error::OutOfRange(format!(
            "transition length must be nonnegative, got {tau}"
        )));
    }
    let mut block = DMatrix::<f64>::zeros(2 * n, 2 * n);
    block.view_mut((0, 0), (n, n)).copy_from(&(-a));
    block.view_mut((0, n), (n, n)).copy_from(cc);
    block.view_mut((n, n), (n, n)).copy_from(&a.transpose());
    let z = crate::lqg::exp::matrix_exp(&block, tau)?;
    let z12 = z.view((0, n), (n, n)).into_owned();
    let e = z.view((n, n), (n, n)).transpose();
    let mut s = &e * z12;
    symmetrize(&mut s);
    Ok((e, s))
}

/// Which accumulation kernel a quadrature walks.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Kernel {
    /// `Σ(t−τ₀)`: covariance since the last observation.
    Covariance,
    /// `N(t−τ₀) = e^{A(t−τ₀)}CC'e^{A'(t−τ₀)}`: its growth rate.
    Rate,
}

/// `∫_{ta}^{tb} Tr[Σ(t−τ₀)·φ(t)] dt` — the expected estimation cost of
/// leaving the state unobserved on `[ta, tb]` after a snapshot at `τ₀`.
pub fn trace_cost_integral(
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    tau0: f64,
    ta: f64,
    tb: f64,
) -> Result<f64> {
    kernel_integral(gram, ricc, tau0, ta, tb, Kernel::Covariance)
}

/// `∫_{ta}^{tb} Tr[N(t−τ₀)·φ(t)] dt` — the sensitivity of the estimation
/// cost to moving the snapshot at `τ₀` earlier.
pub fn trace_rate_integral(
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    tau0: f64,
    ta: f64,
    tb: f64,
) -> Result<f64> {
    kernel_integral(gram, ricc, tau0, ta, tb, Kernel::Rate)
}

struct Walk<'a> {
    gram: &'a GramianCache,
    ricc: &'a RiccatiSolution,
    kernel: Kernel,
}

impl Walk<'_> {
    /// Kernel value at offset `u0` past the reset point.
    fn initial_state(&self, u0: f64, atol: f64) -> Result<DMatrix<f64>> {
        let n = self.gram.a.nrows();
        match self.kernel {
            Kernel::Covariance => {
                if u0 <= atol {
                    Ok(DMatrix::zeros(n, n))
                } else {
                    Ok(van_loan_pair(&self.gram.a, &self.gram.cc, u0)?.1)
                }
            }
            Kernel::Rate => {
                if u0 <= atol {
                    Ok(self.gram.cc.clone())
                } else {
                    let (e, _) = van_loan_pair(&self.gram.a, &self.gram.cc, u0)?;
                    let mut x = &e * &self.gram.cc * e.transpose();
                    symmetrize(&mut x);
                    Ok(x)
                }
            }
        }
    }

    /// Advances the kernel state by the half-width of pair `(e, s)`.
    fn half_step(&self, x: &DMatrix<f64>, e: &DMatrix<f64>, s: &DMatrix<f64>) -> DMatrix<f64> {
        let mut next = e * x * e.transpose();
        if self.kernel == Kernel::Covariance {
            next += s;
        }
        symmetrize(&mut next);
        next
    }

    /// Simpson over grid panel `j`, using the cached half-step pair and the
    /// precomputed `φ` tables. `x` enters as the kernel at the panel start
    /// and leaves as the kernel at the panel end.
    fn panel_cached(&self, x: &mut DMatrix<f64>, j: usize) -> f64 {
        let h = self.gram.grid.h();
        let fa = x.dot(self.ricc.phi_node(j));
        let xm = self.half_step(x, &self.gram.e_half, &self.gram.s_half);
        let fm = xm.dot(self.ricc.phi_half(j));
        let xb = self.half_step(&xm, &self.gram.e_half, &self.gram.s_half);
        let fb = xb.dot(self.ricc.phi_node(j + 1));
        *x = xb;
        h / 6.0 * (fa + 4.0 * fm + fb)
    }

    /// Simpson over an arbitrary segment `[sa, sb]` (fresh transition pair,
    /// interpolated `φ`). `x` is advanced to the segment end.
    fn segment_fresh(&self, x: &mut DMatrix<f64>, sa: f64, sb: f64) -> Result<f64> {
        let w = sb - sa;
        if w <= 0.0 {
            return Ok(0.0);
        }
        let (e, s) = van_loan_pair(&self.gram.a, &self.gram.cc, w / 2.0)?;
        let fa = x.dot(&self.ricc.phi_at(sa)?);
        let xm = self.half_step(x, &e, &s);
        let fm = xm.dot(&self.ricc.phi_at(sa + w / 2.0)?);
        let xb = self.half_step(&xm, &e, &s);
        let fb = xb.dot(&self.ricc.phi_at(sb)?);
        *x = xb;
        Ok(w / 6.0 * (fa + 4.0 * fm + fb))
    }

    /// Segment value without advancing the stored state (for bisection).
    fn segment_peek(&self, x: &DMatrix<f64>, sa: f64, t: f64) -> Result<f64> {
        let mut probe = x.clone();
        self.segment_fresh(&mut probe, sa, t)
    }
}

/// Checks the quadrature range and snaps it into `[τ₀, T]`.
fn validate_range(
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    tau0: f64,
    ta: f64,
    tb: f64,
) -> Result<(f64, f64, f64)> {
    if gram.grid != *ricc.grid() {
        return Err(Error::DimensionMismatch(
            "Gramian cache and value solution use different grids".into(),
        ));
    }
    let tf = gram.grid.tf();
    let slack = 1e-9 * (1.0 + tf);
    if !tau0.is_finite() || !ta.is_finite() || !tb.is_finite() {
        return Err(Error::OutOfRange("non-finite quadrature limit".into()));
    }
    if tau0 < -slack || ta < tau0 - slack || tb < ta - slack || tb > tf + slack {
        return Err(Error::OutOfRange(format!(
            "need 0 ≤ τ₀ ≤ ta ≤ tb ≤ {tf}, got τ₀={tau0}, ta={ta}, tb={tb}"
        )));
    }
    let tau0 = tau0.max(0.0);
    let ta = ta.clamp(tau0, tf);
    let tb = tb.clamp(ta, tf);
    Ok((tau0, ta, tb))
}

/// Node indices bracketing the interior of `[ta, tb]`: `ja` is the first node
/// at or after `ta`, `jb` the last node at or before `tb` (both with slack).
/// `ja > jb` means no grid node falls inside the segment.
fn panel_range(grid: &TimeGrid, ta: f64, tb: f64, atol: f64) -> (usize, usize) {
    let h = grid.h();
    let m = grid.n_steps();
    let ja = (((ta - atol) / h).ceil().max(0.0) as usize).min(m);
    let jb = (((tb + atol) / h).floor().max(0.0) as usize).min(m);
    (ja, jb)
}

fn kernel_integral(
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    tau0: f64,
    ta: f64,
    tb: f64,
    kernel: Kernel,
) -> Result<f64> {
    let (tau0, ta, tb) = validate_range(gram, ricc, tau0, ta, tb)?;
    let atol = 1e-9 * (1.0 + gram.grid.tf());
    if tb - ta <= atol {
        return Ok(0.0);
    }
    let walk = Walk { gram, ricc, kernel };
    let mut x = walk.initial_state(ta - tau0, atol)?;
    let (ja, jb) = panel_range(&gram.grid, ta, tb, atol);
    if ja > jb {
        return walk.segment_fresh(&mut x, ta, tb);
    }
    let mut acc = 0.0;
    let t_ja = gram.grid.node(ja);
    if t_ja - ta > atol {
        acc += walk.segment_fresh(&mut x, ta, t_ja)?;
    }
    for j in ja..jb {
        acc += walk.panel_cached(&mut x, j);
    }
    let t_jb = gram.grid.node(jb);
    if tb - t_jb > atol {
        acc += walk.segment_fresh(&mut x, t_jb, tb)?;
    }
    Ok(acc)
}

/// Finds the earliest `t ∈ [τ₀, T]` at which the running sensitivity
/// `∫_{τ₀}^{t} Tr[N(s−τ₀)·φ(s)] ds` reaches `target`, to within `eps_time`,
/// or `None` if it never does before the horizon.
pub(crate) fn scan_rate_crossing(
    gram: &GramianCache,
    ricc: &RiccatiSolution,
    tau0: f64,
    target: f64,
    eps_time: f64,
) -> Result<Option<f64>> {
    let tf = gram.grid.tf();
    let (tau0, _, _) = validate_range(gram, ricc, tau0, tau0, tf)?;
    if !target.is_finite() || target < 0.0 {
        return Err(Error::OutOfRange(format!(
            "crossing target must be nonnegative and finite, got {target}"
        )));
    }
    if target == 0.0 {
        return Ok(Some(tau0));
    }
    let atol = 1e-9 * (1.0 + tf);
    let walk = Walk {
        gram,
        ricc,
        kernel: Kernel::Rate,
    };
    let mut x = walk.initial_state(0.0, atol)?;
    let mut acc = 0.0;

    // Segment layout mirrors kernel_integral: partial up to the first node,
    // whole cached panels, nothing after (the last node is T itself).
    let (ja, jb) = panel_range(&gram.grid, tau0, tf, atol);
    let bisect = |x0: &DMatrix<f64>, sa: f64, sb: f64, base: f64| -> Result<f64> {
        let (mut lo, mut hi) = (sa, sb);
        while hi - lo > eps_time {
            let mid = 0.5 * (lo + hi);
            if base + walk.segment_peek(x0, sa, mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    };

    if ja <= jb {
        let t_ja = gram.grid.node(ja);
        if t_ja - tau0 > atol {
            let x0 = x.clone();
            let seg = walk.segment_fresh(&mut x, tau0, t_ja)?;
            if acc + seg >= target {
                return Ok(Some(bisect(&x0, tau0, t_ja, acc)?));
            }
            acc += seg;
        }
        for j in ja..jb {
            let x0 = x.clone();
            let sa = gram.grid.node(j);
            let seg = walk.panel_cached(&mut x, j);
            if acc + seg >= target {
                return Ok(Some(bisect(&x0, sa, gram.grid.node(j + 1), acc)?));
            }
            acc += seg;
        }
    } else {
        let x0 = x.clone();
        let seg = walk.segment_fresh(&mut x, tau0, tf)?;
        if acc + seg >= target {
            return Ok(Some(bisect(&x0, tau0, tf, acc)?));
        }
    }
    Ok(None)
}
