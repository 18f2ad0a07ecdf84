//! Pooled least-squares baseline.
//!
//! Stacks every period of a panel into one regression and solves the pooled
//! normal equations `(sum X_t' X_t) beta0 = sum X_t' y_t`. The result is the
//! best time-invariant coefficient vector, used as the centering value that
//! the per-period increments are measured against.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::panel::RegressionPanel;

/// Ridge penalty applied when the pooled Gram is numerically rank-deficient.
pub const DEFAULT_RIDGE_FALLBACK: f64 = 1e-6;

/// Relative eigenvalue cutoff below which the pooled Gram counts as deficient.
const RANK_TOL: f64 = 1e-10;

/// Result of the pooled fit.
#[derive(Debug, Clone, PartialEq)]
pub struct OlsBaseline {
    /// Pooled coefficient vector, length `n`.
    pub beta0: DVector<f64>,
    /// l2 norm of the stacked residual `y - X beta0`.
    pub residual_norm: f64,
    /// Numerical rank of the pooled Gram matrix.
    pub rank: usize,
    /// Whether the ridge-regularized system was solved instead of the plain one.
    pub ridge_used: bool,
}

/// Fits the pooled least-squares baseline.
///
/// When the pooled Gram has an eigenvalue below `1e-10` times its largest,
/// the system `(Gram + ridge_fallback * I) beta = rhs` is solved instead and
/// `ridge_used` is set. A completely zero design with `ridge_fallback == 0`
/// is rejected as [`Error::DegenerateDesign`].
pub fn fit_baseline(panel: &RegressionPanel, ridge_fallback: f64) -> Result<OlsBaseline> {
    if ridge_fallback < 0.0 || !ridge_fallback.is_finite() {
        return Err(Error::InvalidConfig(
            "ridge_fallback must be finite and nonnegative".into(),
        ));
    }
    let n = panel.coef_dim();
    let mut gram = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for t in 0..panel.periods() {
        let x = panel.design(t);
        gram += x.tr_mul(x);
        rhs += x.tr_mul(panel.response(t));
    }

    let eig = SymmetricEigen::new(gram.clone());
    let lambda_max = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let lambda_min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let rank = if lambda_max <= 0.0 {
        0
    } else {
        eig.eigenvalues
            .iter()
            .filter(|&&l| l >= RANK_TOL * lambda_max)
            .count()
    };
    let deficient = lambda_max <= 0.0 || lambda_min < RANK_TOL * lambda_max;

    if lambda_max <= 0.0 && ridge_fallback == 0.0 {
        return Err(Error::DegenerateDesign);
    }

    // Solve in the eigenbasis; spectral floor drops directions the ridge
    // cannot lift when ridge_fallback is zero.
    let solve_in_basis = |target: &DVector<f64>, shift: f64| -> DVector<f64> {
        let proj = eig.eigenvectors.tr_mul(target);
        let mut coeffs = DVector::<f64>::zeros(n);
        for i in 0..n {
            let denom = eig.eigenvalues[i] + shift;
            if denom > lambda_max.max(shift) * 1e-15 {
                coeffs[i] = proj[i] / denom;
            }
        }
        &eig.eigenvectors * coeffs
    };

    let shift = if deficient { ridge_fallback } else { 0.0 };
    let mut beta0 = solve_in_basis(&rhs, shift);
    // One step of iterative refinement keeps the normal-equations residual
    // near roundoff for well-conditioned systems.
    if !deficient {
        let resid = &rhs - &gram * &beta0;
        beta0 += solve_in_basis(&resid, 0.0);
    }

    let mut rss = 0.0;
    for t in 0..panel.periods() {
        let r = panel.response(t) - panel.design(t) * &beta0;
        rss += r.norm_squared();
    }

    Ok(OlsBaseline {
        beta0,
        residual_norm: rss.sqrt(),
        rank,
        ridge_used: deficient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::RegressionPanel;

    fn panel_from(xs: &[&[f64]], ys: &[&[f64]], m: usize, n: usize) -> RegressionPanel {
        RegressionPanel::new(
            xs.iter().map(|x| DMatrix::from_row_slice(m, n, x)).collect(),
            ys.iter().map(|y| DVector::from_row_slice(y)).collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn constant_design_recovers_mean() {
        let panel = panel_from(
            &[&[1.0], &[1.0], &[1.0]],
            &[&[1.0], &[2.0], &[3.0]],
            1,
            1,
        );
        let fit = fit_baseline(&panel, DEFAULT_RIDGE_FALLBACK).unwrap();
        assert!((fit.beta0[0] - 2.0).abs() < 1e-12);
        assert!(!fit.ridge_used);
        assert_eq!(fit.rank, 1);
    }

    #[test]
    fn identity_design_recovers_response() {
        let panel = panel_from(&[&[1.0, 0.0, 0.0, 1.0]], &[&[5.0, 7.0]], 2, 2);
        let fit = fit_baseline(&panel, DEFAULT_RIDGE_FALLBACK).unwrap();
        assert!((fit.beta0[0] - 5.0).abs() < 1e-12);
        assert!((fit.beta0[1] - 7.0).abs() < 1e-12);
        assert!(fit.residual_norm < 1e-12);
    }

    #[test]
    fn zero_design_without_ridge_is_degenerate() {
        let panel = panel_from(&[&[0.0], &[0.0]], &[&[1.0], &[2.0]], 1, 1);
        assert!(matches!(
            fit_baseline(&panel, 0.0),
            Err(Error::DegenerateDesign)
        ));
    }

    #[test]
    fn zero_design_with_ridge_returns_zero() {
        let panel = panel_from(&[&[0.0], &[0.0]], &[&[1.0], &[2.0]], 1, 1);
        let fit = fit_baseline(&panel, 1e-6).unwrap();
        assert!(fit.ridge_used);
        assert_eq!(fit.rank, 0);
        assert_eq!(fit.beta0[0], 0.0);
    }

    #[test]
    fn collinear_design_uses_ridge() {
        // Two identical columns: Gram is singular.
        let panel = panel_from(
            &[&[1.0, 1.0], &[2.0, 2.0]],
            &[&[1.0], &[2.0]],
            1,
            2,
        );
        let fit = fit_baseline(&panel, 1e-6).unwrap();
        assert!(fit.ridge_used);
        assert_eq!(fit.rank, 1);
        // Ridge splits the weight evenly across the duplicated columns.
        assert!((fit.beta0[0] - fit.beta0[1]).abs() < 1e-9);
    }
}
