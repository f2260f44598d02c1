//! Matrix exponential.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Computes `e^{M·t}` for a square matrix `M`.
///
/// Backed by a scaling-and-squaring Padé evaluation; the result is validated
/// to be finite so downstream quadratures never silently propagate overflow
/// from an unstable `M` with a large `t`.
pub fn matrix_exp(m: &DMatrix<f64>, t: f64) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !t.is_finite() || m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteEntry("matrix exponential input"));
    }
    let out = (m * t).exp();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteEntry("matrix exponential result"));
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use nalgebra::dmatrix;

    /// Independent oracle: 30-term Taylor series with scaling and squaring.
    /// Deliberately naive so it shares no code with the implementation.
    pub(crate) fn taylor_exp(m: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
        let n = m.nrows();
        let norm = (m * t).norm();
        let s = norm.log2().ceil().max(0.0) as u32 + 1;
        let scaled = m * (t / 2f64.powi(s as i32));
        let mut acc = DMatrix::<f64>::identity(n, n);
        let mut term = DMatrix::<f64>::identity(n, n);
        for k in 1..=30 {
            term = &term * &scaled / k as f64;
            acc += &term;
        }
        for _ in 0..s {
            acc = &acc * &acc;
        }
        acc
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = DMatrix::<f64>::zeros(3, 3);
        let e = matrix_exp(&z, 5.0).unwrap();
        assert!((e - DMatrix::<f64>::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn exp_of_nilpotent_matrix_is_exact() {
        // Double integrator block: e^{At} = [[1, t], [0, 1]].
        let a = dmatrix![0.0, 1.0; 0.0, 0.0];
        let e = matrix_exp(&a, 3.5).unwrap();
        let expect = dmatrix![1.0, 3.5; 0.0, 1.0];
        assert!((e - expect).norm() < 1e-14);
    }

    #[test]
    fn exp_matches_independent_taylor_series() {
        let a = dmatrix![
            0.3, -1.2, 0.05;
            0.7, 0.1, -0.4;
            -0.2, 0.9, -0.6
        ];
        for &t in &[0.1, 1.0, 2.7] {
            let fast = matrix_exp(&a, t).unwrap();
            let slow = taylor_exp(&a, t);
            assert!(
                (&fast - &slow).norm() < 1e-11 * (1.0 + slow.norm()),
                "mismatch at t={t}"
            );
        }
    }

    #[test]
    fn exp_group_property_holds() {
        let a = dmatrix![0.0, 1.0; -2.0, -0.3];
        let e1 = matrix_exp(&a, 0.7).unwrap();
        let e2 = matrix_exp(&a, 1.1).unwrap();
        let e12 = matrix_exp(&a, 1.8).unwrap();
        assert!((e1 * e2 - e12).norm() < 1e-12);
    }

    #[test]
    fn non_square_and_non_finite_inputs_are_rejected() {
        let rect = DMatrix::<f64>::zeros(2, 3);
        assert!(matrix_exp(&rect, 1.0).is_err());
        let bad = dmatrix![f64::NAN, 0.0; 0.0, 1.0];
        assert!(matrix_exp(&bad, 1.0).is_err());
        let ok = dmatrix![1.0, 0.0; 0.0, 1.0];
        assert!(matrix_exp(&ok, f64::INFINITY).is_err());
    }
}
