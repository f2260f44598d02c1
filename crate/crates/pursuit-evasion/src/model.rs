//! Game specification and maneuverability classification.
//!
//! A pursuit-evasion game instance is described by the relative dynamics
//!
//! ```text
//!     dx = A x dt + Bp u_p dt − Be u_e dt + C dw ,        x(0) = x0 ,
//! ```
//!
//! a quadratic cost with running weight `Q`, terminal weight `QT`, control
//! weights `Rp` (pursuer, minimizing) and `Re` (evader, maximizing), and
//! per-observation prices `price_p` / `price_e`. An observation is an exact
//! snapshot of the relative state that both players see; each player pays
//! their own price per observation they trigger.
//!
//! Everything downstream is gated by the *maneuverability gap*
//!
//! ```text
//!     D = Bp Rp⁻¹ Bp' − Be Re⁻¹ Be' ,
//! ```
//!
//! which compares how much instantaneous steering authority each side can buy
//! per unit of control cost. When `D` is positive semidefinite (and nonzero)
//! the pursuer out-maneuvers the evader and the game value is finite; when
//! `D` has a negative direction the evader can escape and the backward value
//! recursion blows up in finite time.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative-tolerance factor for the dominance eigenvalue test.
const DOMINANCE_TOL_FACTOR: f64 = 1e-9;

/// Relative tolerance for symmetry / definiteness eigenvalue tests.
const DEFINITENESS_TOL: f64 = 1e-10;

/// Complete description of one game instance.
///
/// Construct with [`GameSpec::new`], which validates all invariants, or fill
/// the fields directly and call [`GameSpec::validate`] before use.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    /// Drift matrix `A` (n×n), units 1/time.
    pub a: DMatrix<f64>,
    /// Pursuer input map `Bp` (n×m_p).
    pub bp: DMatrix<f64>,
    /// Evader input map `Be` (n×m_e).
    pub be: DMatrix<f64>,
    /// Diffusion input map `C` (n×q).
    pub c: DMatrix<f64>,
    /// Running state weight `Q` (n×n, symmetric PSD).
    pub q: DMatrix<f64>,
    /// Terminal state weight `QT` (n×n, symmetric PSD).
    pub qt: DMatrix<f64>,
    /// Pursuer control weight `Rp` (m_p×m_p, symmetric PD).
    pub rp: DMatrix<f64>,
    /// Evader control weight `Re` (m_e×m_e, symmetric PD).
    pub re: DMatrix<f64>,
    /// Pursuer per-observation price; `+∞` encodes "never observes".
    pub price_p: f64,
    /// Evader per-observation price; `+∞` encodes "never observes".
    pub price_e: f64,
    /// Game horizon `T > 0`.
    pub horizon: f64,
    /// Initial relative state `x0` (length n).
    pub x0: DVector<f64>,
}

/// Which side wins the maneuverability comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DominanceClass {
    /// `D` is PSD and nonzero: the pursuer can close any gap and the evader's
    /// best observation plan is empty.
    PursuerDominant,
    /// `D` vanishes: observations are worthless to both players.
    Equal,
    /// `D` has a negative direction: the evader can force unbounded value.
    NotDominant,
}

/// Result of [`GameSpec::dominance`]: the gap matrix together with its class.
#[derive(Debug, Clone)]
pub struct Dominance {
    /// `D = Bp Rp⁻¹ Bp' − Be Re⁻¹ Be'`, symmetrized.
    pub gap: DMatrix<f64>,
    pub class: DominanceClass,
}

impl GameSpec {
    /// Builds and validates a spec in one step.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: DMatrix<f64>,
        bp: DMatrix<f64>,
        be: DMatrix<f64>,
        c: DMatrix<f64>,
        q: DMatrix<f64>,
        qt: DMatrix<f64>,
        rp: DMatrix<f64>,
        re: DMatrix<f64>,
        price_p: f64,
        price_e: f64,
        horizon: f64,
        x0: DVector<f64>,
    ) -> Result<Self> {
        let spec = GameSpec {
            a,
            bp,
            be,
            c,
            q,
            qt,
            rp,
            re,
            price_p,
            price_e,
            horizon,
            x0,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// State dimension n.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    /// Pursuer control dimension m_p.
    pub fn m_p(&self) -> usize {
        self.bp.ncols()
    }

    /// Evader control dimension m_e.
    pub fn m_e(&self) -> usize {
        self.be.ncols()
    }

    /// Noise dimension q.
    pub fn q_dim(&self) -> usize {
        self.c.ncols()
    }

    /// Checks every structural invariant, returning the first violation.
    pub fn validate(&self) -> Result<()> {
        let n = self.a.nrows();
        if self.a.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "A must be square, got {}x{}",
                self.a.nrows(),
                self.a.ncols()
            )));
        }
        for (name, m, rows, square) in [
            ("Bp", &self.bp, n, false),
            ("Be", &self.be, n, false),
            ("C", &self.c, n, false),
            ("Q", &self.q, n, true),
            ("QT", &self.qt, n, true),
        ] {
            if m.nrows() != rows || (square && m.ncols() != rows) {
                return Err(Error::DimensionMismatch(format!(
                    "{} must have {} rows{} to match A ({}x{} given)",
                    name,
                    rows,
                    if square { " and columns" } else { "" },
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        if self.rp.nrows() != self.bp.ncols() || self.rp.ncols() != self.bp.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "Rp must be {}x{} to match Bp, got {}x{}",
                self.bp.ncols(),
                self.bp.ncols(),
                self.rp.nrows(),
                self.rp.ncols()
            )));
        }
        if self.re.nrows() != self.be.ncols() || self.re.ncols() != self.be.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "Re must be {}x{} to match Be, got {}x{}",
                self.be.ncols(),
                self.be.ncols(),
                self.re.nrows(),
                self.re.ncols()
            )));
        }
        if self.x0.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "x0 must have length {}, got {}",
                n,
                self.x0.len()
            )));
        }

        for (name, m) in [
            ("A", &self.a),
            ("Bp", &self.bp),
            ("Be", &self.be),
            ("C", &self.c),
            ("Q", &self.q),
            ("QT", &self.qt),
            ("Rp", &self.rp),
            ("Re", &self.re),
        ] {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteEntry(name));
            }
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEntry("x0"));
        }
        if !self.horizon.is_finite() || self.horizon <= 0.0 {
            return Err(Error::NonPositiveHorizon(self.horizon));
        }
        for (name, p) in [("Op", self.price_p), ("Oe", self.price_e)] {
            // NaN and −∞ are rejected; +∞ is the "never observes" sentinel.
            if p.is_nan() || p < 0.0 {
                return Err(Error::NonFiniteEntry(name));
            }
        }

        check_symmetric_class(&self.q, "Q", false)?;
        check_symmetric_class(&self.qt, "QT", false)?;
        check_symmetric_class(&self.rp, "Rp", true)?;
        check_symmetric_class(&self.re, "Re", true)?;
        Ok(())
    }

    /// The maneuverability gap `D = Bp Rp⁻¹ Bp' − Be Re⁻¹ Be'`, symmetrized.
    pub fn dominance_gap(&self) -> DMatrix<f64> {
        let gp = weighted_outer(&self.bp, &self.rp);
        let ge = weighted_outer(&self.be, &self.re);
        let mut gap = gp - ge;
        symmetrize(&mut gap);
        gap
    }

    /// `Bp Rp⁻¹ Bp'`: the pursuer's control-authority Gramian.
    pub fn authority_p(&self) -> DMatrix<f64> {
        weighted_outer(&self.bp, &self.rp)
    }

    /// `Be Re⁻¹ Be'`: the evader's control-authority Gramian.
    pub fn authority_e(&self) -> DMatrix<f64> {
        weighted_outer(&self.be, &self.re)
    }

    /// `C C'`: the diffusion Gramian driving the estimation error.
    pub fn noise_gramian(&self) -> DMatrix<f64> {
        &self.c * self.c.transpose()
    }

    /// Classifies the maneuverability gap by its eigenvalue signs.
    ///
    /// The zero test is scale-free: eigenvalues within
    /// `±1e-9·(1 + max|eig|)` of zero count as zero. A PSD, nonzero gap is
    /// `PursuerDominant` (the reference double-integrator game has gap
    /// eigenvalues {0, 0.125} and must classify as dominant); an identically
    /// zero gap is `Equal`; any negative direction is `NotDominant`.
    pub fn dominance(&self) -> Dominance {
        let gap = self.dominance_gap();
        let eigs = gap.clone().symmetric_eigen().eigenvalues;
        let max_abs = eigs.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        let tol = DOMINANCE_TOL_FACTOR * (1.0 + max_abs);
        let min = eigs.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        let max = eigs.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let class = if min < -tol {
            DominanceClass::NotDominant
        } else if max <= tol {
            DominanceClass::Equal
        } else {
            DominanceClass::PursuerDominant
        };
        Dominance { gap, class }
    }
}

/// `B R⁻¹ B'` for a validated symmetric-PD weight `R`.
fn weighted_outer(b: &DMatrix<f64>, r: &DMatrix<f64>) -> DMatrix<f64> {
    let chol = r
        .clone()
        .cholesky()
        .expect("weight validated positive definite");
    let rinv_bt = chol.solve(&b.transpose());
    b * rinv_bt
}

/// Replaces `m` by its symmetric part.
pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

/// Verifies symmetry and the eigenvalue-sign class of a weight matrix.
///
/// `strict` demands positive definite (control weights); otherwise positive
/// semidefinite suffices (state weights). Tolerances are relative to the
/// largest-magnitude eigenvalue.
fn check_symmetric_class(m: &DMatrix<f64>, name: &'static str, strict: bool) -> Result<()> {
    let class = if strict {
        "positive definite"
    } else {
        "positive semidefinite"
    };
    let scale = m.norm().max(1.0);
    if (m - m.transpose()).norm() > DEFINITENESS_TOL * scale {
        return Err(Error::NotPositiveDefinite { name, class });
    }
    let eigs = m.clone().symmetric_eigen().eigenvalues;
    let max_abs = eigs.iter().fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let tol = DEFINITENESS_TOL * max_abs.max(1.0);
    let min = eigs.iter().fold(f64::INFINITY, |acc, &v| acc.min(v));
    let ok = if strict { min > tol } else { min >= -tol };
    if !ok {
        return Err(Error::NotPositiveDefinite { name, class });
    }
    Ok(())
}
