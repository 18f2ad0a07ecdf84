//! Vector error correction layer.
//!
//! A VEC model for an `m`-vector series `X_t`,
//!
//! ```text
//! dX_t = Gamma_1 dX_{t-1} + ... + Gamma_k dX_{t-k} + Pi X_{t-k} + mu + u_t,
//! ```
//!
//! is cast as a panel regression by vectorizing the coefficient matrices
//! (column-major), so each period's design block is a Kronecker product
//! `z_t' (x) I_m`. The level term's loading matrix `Pi` is factored as
//! `alpha beta*'` at a user-chosen cointegration rank; letting only `Pi`
//! vary over time and running the break pipeline on that panel yields a
//! per-period loading path, per-period adjustment matrices `alpha_t`, and a
//! scalar comovement degree for each period.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::baseline::{fit_baseline, DEFAULT_RIDGE_FALLBACK};
use crate::error::{Error, Result};
use crate::panel::{PeriodLabel, RegressionPanel};
use crate::pipeline::{detect_breaks_with_baseline, BreakReport, DetectConfig};

/// Scalar summary applied to each per-period adjustment matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegreeNorm {
    /// Largest singular value of `alpha_t` (maximal adjustment speed).
    #[default]
    Spectral,
    /// Frobenius norm of `alpha_t`.
    Frobenius,
}

impl DegreeNorm {
    pub fn of(&self, alpha: &DMatrix<f64>) -> f64 {
        match self {
            DegreeNorm::Spectral => alpha
                .clone()
                .svd(false, false)
                .singular_values
                .iter()
                .cloned()
                .fold(0.0, f64::max),
            DegreeNorm::Frobenius => alpha.norm(),
        }
    }
}

/// VEC model shape: lag order `k`, cointegration rank `r`, intercept flag,
/// and the degree summary. The rank is a user input; no cointegration test
/// is run here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VecmSpec {
    pub lag_order: usize,
    pub coint_rank: usize,
    pub include_intercept: bool,
    pub degree_norm: DegreeNorm,
}

impl VecmSpec {
    pub fn new(lag_order: usize, coint_rank: usize) -> Self {
        Self {
            lag_order,
            coint_rank,
            include_intercept: true,
            degree_norm: DegreeNorm::Spectral,
        }
    }

    fn validate(&self, dim: usize) -> Result<()> {
        if self.lag_order == 0 {
            return Err(Error::InvalidConfig("lag order must be at least 1".into()));
        }
        if self.coint_rank == 0 || self.coint_rank > dim {
            return Err(Error::RankTooLarge {
                rank: self.coint_rank,
                dim,
            });
        }
        Ok(())
    }
}

/// Which coefficients get a time-varying treatment when the VEC model is
/// flattened into a panel.
#[derive(Debug, Clone, Copy)]
pub enum TimeVarying<'a> {
    /// All regressors enter the per-period design blocks.
    All,
    /// Only the `Pi` regressors enter; lag and intercept terms stay frozen at
    /// the supplied time-invariant estimates and are subtracted into the
    /// response.
    PiOnly(&'a VecmFit),
}

/// Time-invariant VEC fit: lag matrices, intercept, loading matrix, and its
/// rank-`r` factorization `Pi ~ alpha * beta_star'` with orthonormal
/// `beta_star`.
#[derive(Debug, Clone, PartialEq)]
pub struct VecmFit {
    pub gammas: Vec<DMatrix<f64>>,
    pub mu: DVector<f64>,
    pub pi: DMatrix<f64>,
    pub alpha: DMatrix<f64>,
    pub beta_star: DMatrix<f64>,
    pub effective_t: usize,
}

/// Per-period adjustment matrices and their scalar degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct ComovementSeries {
    pub labels: Option<Vec<PeriodLabel>>,
    pub alphas: Vec<DMatrix<f64>>,
    pub degrees: Vec<f64>,
    pub break_periods: Vec<usize>,
}

fn check_series(series: &DMatrix<f64>, lag_order: usize) -> Result<()> {
    if series.nrows() == 0 {
        return Err(Error::DimensionMismatch("series has zero rows".into()));
    }
    if !series.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFiniteEntry("series".into()));
    }
    if series.ncols() <= lag_order + 1 {
        return Err(Error::SeriesTooShort {
            len: series.ncols(),
            lag_order,
        });
    }
    Ok(())
}

/// Number of usable regression periods for a series of length `len`.
pub fn effective_periods(len: usize, lag_order: usize) -> usize {
    len.saturating_sub(lag_order + 1)
}

/// Flattens the VEC model into a [`RegressionPanel`].
///
/// The series is `m x N`, one column per time point. Period `p` of the panel
/// regresses `dX` at series index `k + 1 + p`; with `TimeVarying::All` the
/// design block stacks all of `dX` lags, the level term, and the intercept
/// (`n = m(km + m + 1)` columns); with `TimeVarying::PiOnly` only the level
/// regressors remain (`n = m^2` columns, the Kronecker block
/// `x_{t-k}' (x) I_m`).
pub fn build_vecm_panel(
    series: &DMatrix<f64>,
    labels: Option<&[PeriodLabel]>,
    spec: &VecmSpec,
    time_varying: TimeVarying<'_>,
) -> Result<RegressionPanel> {
    let m = series.nrows();
    let k = spec.lag_order;
    spec.validate(m)?;
    check_series(series, k)?;
    if let Some(ls) = labels {
        if ls.len() != series.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for a series of length {}",
                ls.len(),
                series.ncols()
            )));
        }
    }
    if let TimeVarying::PiOnly(fit) = time_varying {
        if fit.gammas.len() != k || fit.gammas.iter().any(|g| g.nrows() != m || g.ncols() != m) {
            return Err(Error::DimensionMismatch(
                "frozen fit does not match the series dimension or lag order".into(),
            ));
        }
    }

    let t_len = effective_periods(series.ncols(), k);
    let diff = |t: usize| series.column(t) - series.column(t - 1);

    let mut blocks = Vec::with_capacity(t_len);
    let mut responses = Vec::with_capacity(t_len);
    for p in 0..t_len {
        let t = k + 1 + p;
        match time_varying {
            TimeVarying::All => {
                // z_t = [dX_{t-1}; ...; dX_{t-k}; X_{t-k}; 1]
                let stride = if spec.include_intercept { k * m + m + 1 } else { k * m + m };
                let mut z = DVector::<f64>::zeros(stride);
                for i in 0..k {
                    z.rows_mut(i * m, m).copy_from(&diff(t - 1 - i));
                }
                z.rows_mut(k * m, m).copy_from(&series.column(t - k));
                if spec.include_intercept {
                    z[k * m + m] = 1.0;
                }
                blocks.push(kron_identity(&z, m));
                responses.push(diff(t));
            }
            TimeVarying::PiOnly(fit) => {
                let level = series.column(t - k).into_owned();
                blocks.push(kron_identity(&level, m));
                let mut y = diff(t);
                for i in 0..k {
                    y -= &fit.gammas[i] * diff(t - 1 - i);
                }
                if spec.include_intercept {
                    y -= &fit.mu;
                }
                responses.push(y);
            }
        }
    }
    let panel_labels = labels.map(|ls| ls[k + 1..].to_vec());
    RegressionPanel::new(blocks, responses, panel_labels)
}

/// `z' (x) I_m`: block `j` of the result is `z_j * I_m`.
fn kron_identity(z: &DVector<f64>, m: usize) -> DMatrix<f64> {
    let p = z.len();
    let mut out = DMatrix::<f64>::zeros(m, p * m);
    for j in 0..p {
        for i in 0..m {
            out[(i, j * m + i)] = z[j];
        }
    }
    out
}

/// Stacks a coefficient vector back into the `[Gamma_1 .. Gamma_k | Pi | mu]`
/// matrices (inverse of the column-major vectorization).
fn unstack_coefficients(
    beta: &DVector<f64>,
    m: usize,
    k: usize,
    intercept: bool,
) -> (Vec<DMatrix<f64>>, DMatrix<f64>, DVector<f64>) {
    let col = |j: usize| DVector::from_column_slice(&beta.as_slice()[j * m..(j + 1) * m]);
    let mat = |j0: usize| {
        let mut out = DMatrix::<f64>::zeros(m, m);
        for j in 0..m {
            out.set_column(j, &col(j0 + j));
        }
        out
    };
    let gammas: Vec<DMatrix<f64>> = (0..k).map(|i| mat(i * m)).collect();
    let pi = mat(k * m);
    let mu = if intercept {
        col(k * m + m)
    } else {
        DVector::zeros(m)
    };
    (gammas, pi, mu)
}

/// Fits the VEC model with all coefficients time-invariant, by pooled least
/// squares on the flattened panel, and factors the loading matrix.
pub fn fit_vecm_invariant(
    series: &DMatrix<f64>,
    spec: &VecmSpec,
) -> Result<VecmFit> {
    let m = series.nrows();
    spec.validate(m)?;
    let panel = build_vecm_panel(series, None, spec, TimeVarying::All)?;
    let baseline = fit_baseline(&panel, DEFAULT_RIDGE_FALLBACK)?;
    let (gammas, pi, mu) =
        unstack_coefficients(&baseline.beta0, m, spec.lag_order, spec.include_intercept);
    let (alpha, beta_star) = decompose_pi(&pi, spec.coint_rank)?;
    Ok(VecmFit {
        gammas,
        mu,
        pi,
        alpha,
        beta_star,
        effective_t: panel.periods(),
    })
}

/// Rank-`r` factorization of the loading matrix via SVD:
/// `beta_star` holds the top `r` right singular vectors (orthonormal columns)
/// and `alpha = U_r Sigma_r`, so `alpha * beta_star'` is the best rank-`r`
/// approximation of `pi`. Each `beta_star` column is signed so its
/// largest-magnitude entry is positive.
pub fn decompose_pi(pi: &DMatrix<f64>, rank: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let m = pi.nrows();
    if pi.ncols() != m {
        return Err(Error::DimensionMismatch(format!(
            "loading matrix is {}x{}, expected square",
            pi.nrows(),
            pi.ncols()
        )));
    }
    if rank == 0 || rank > m {
        return Err(Error::RankTooLarge { rank, dim: m });
    }
    let svd = pi.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut alpha = DMatrix::<f64>::zeros(m, rank);
    let mut beta_star = DMatrix::<f64>::zeros(m, rank);
    for j in 0..rank {
        let sigma = svd.singular_values[j];
        for i in 0..m {
            alpha[(i, j)] = u[(i, j)] * sigma;
            beta_star[(i, j)] = v_t[(j, i)];
        }
        // Fix the SVD sign ambiguity: largest-magnitude entry positive.
        let mut idx = 0;
        for i in 1..m {
            if beta_star[(i, j)].abs() > beta_star[(idx, j)].abs() {
                idx = i;
            }
        }
        if beta_star[(idx, j)] < 0.0 {
            for i in 0..m {
                beta_star[(i, j)] = -beta_star[(i, j)];
                alpha[(i, j)] = -alpha[(i, j)];
            }
        }
    }
    Ok((alpha, beta_star))
}

/// Least-squares recovery of the adjustment matrix from a loading matrix and
/// a fixed cointegration basis: `alpha_t = Pi_t beta* (beta*' beta*)^{-1}`.
pub fn recover_alpha(pi_t: &DMatrix<f64>, beta_star: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if pi_t.ncols() != beta_star.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "loading matrix has {} columns, basis has {} rows",
            pi_t.ncols(),
            beta_star.nrows()
        )));
    }
    let gram = beta_star.tr_mul(beta_star);
    let chol = gram.cholesky().ok_or(Error::SingularBetaGram)?;
    // nalgebra accepts semidefinite factors; a (near-)zero pivot still means
    // the basis columns are dependent.
    let l = chol.l();
    let max_pivot = (0..l.nrows()).map(|i| l[(i, i)]).fold(0.0, f64::max);
    let min_pivot = (0..l.nrows()).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min);
    if !(min_pivot > max_pivot * 1e-10) {
        return Err(Error::SingularBetaGram);
    }
    let projected = (pi_t * beta_star).transpose();
    Ok(chol.solve(&projected).transpose())
}

/// The full comovement pipeline: invariant fit, factorization, break
/// detection on the pi-only panel (baseline = vectorized invariant loading),
/// loading-path reconstruction, per-period `alpha_t`, and degrees.
pub fn comovement_pipeline(
    series: &DMatrix<f64>,
    labels: Option<&[PeriodLabel]>,
    spec: &VecmSpec,
    config: &DetectConfig,
) -> Result<(VecmFit, BreakReport, ComovementSeries)> {
    let m = series.nrows();
    let fit = fit_vecm_invariant(series, spec)?;
    let panel = Arc::new(build_vecm_panel(
        series,
        labels,
        spec,
        TimeVarying::PiOnly(&fit),
    )?);
    let beta0 = DVector::from_column_slice(fit.pi.as_slice());
    let report = detect_breaks_with_baseline(&panel, beta0, config)?;

    let mut alphas = Vec::with_capacity(panel.periods());
    let mut degrees = Vec::with_capacity(panel.periods());
    for b in report.path.betas() {
        let pi_t = DMatrix::from_column_slice(m, m, b.as_slice());
        let alpha_t = recover_alpha(&pi_t, &fit.beta_star)?;
        degrees.push(spec.degree_norm.of(&alpha_t));
        alphas.push(alpha_t);
    }
    let series_summary = ComovementSeries {
        labels: panel.period_labels().map(|ls| ls.to_vec()),
        alphas,
        degrees,
        break_periods: report.breaks.iter().map(|b| b.period).collect(),
    };
    Ok((fit, report, series_summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pi_only_panel_matches_reported_scale() {
        // m = 6, k = 2, N = 309: effective T = 306 and 36 coefficients per
        // period, 11016 in total.
        let m = 6;
        let n_obs = 309;
        let series = DMatrix::from_fn(m, n_obs, |i, j| ((i + 2 * j) % 7) as f64 * 0.25 + 1.0);
        let spec = VecmSpec::new(2, 1);
        let fit = VecmFit {
            gammas: vec![DMatrix::zeros(m, m); 2],
            mu: DVector::zeros(m),
            pi: DMatrix::zeros(m, m),
            alpha: DMatrix::zeros(m, 1),
            beta_star: DMatrix::identity(m, 1),
            effective_t: 306,
        };
        let panel = build_vecm_panel(&series, None, &spec, TimeVarying::PiOnly(&fit)).unwrap();
        assert_eq!(panel.periods(), 306);
        assert_eq!(panel.coef_dim(), 36);
        assert_eq!(panel.periods() * panel.coef_dim(), 11016);
    }

    #[test]
    fn scalar_panel_row_follows_the_recursion() {
        // Series (1, 2, 4) with k = 1: one usable row regressing the latest
        // difference on the previous difference, the lagged level, and 1.
        let series = DMatrix::from_row_slice(1, 3, &[1.0, 2.0, 4.0]);
        let spec = VecmSpec::new(1, 1);
        let panel = build_vecm_panel(&series, None, &spec, TimeVarying::All).unwrap();
        assert_eq!(panel.periods(), 1);
        assert_eq!(panel.response(0)[0], 2.0);
        assert_eq!(panel.design(0)[(0, 0)], 1.0); // previous difference
        assert_eq!(panel.design(0)[(0, 1)], 2.0); // level x_{t-k}
        assert_eq!(panel.design(0)[(0, 2)], 1.0); // intercept
    }

    #[test]
    fn too_short_series_rejected() {
        let series = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        let err = build_vecm_panel(&series, None, &VecmSpec::new(1, 1), TimeVarying::All)
            .unwrap_err();
        assert!(matches!(err, Error::SeriesTooShort { .. }));
    }

    #[test]
    fn decompose_rank_one() {
        let pi = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 0.0]);
        let (alpha, beta_star) = decompose_pi(&pi, 1).unwrap();
        assert!((beta_star[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(beta_star[(1, 0)].abs() < 1e-12);
        assert!((alpha[(0, 0)] - 2.0).abs() < 1e-12);
        assert!((alpha[(1, 0)] - 1.0).abs() < 1e-12);
        let recon = &alpha * beta_star.transpose();
        assert!((recon - pi).norm() < 1e-12);
    }

    #[test]
    fn decompose_full_rank_identity() {
        let pi = DMatrix::<f64>::identity(2, 2);
        let (alpha, beta_star) = decompose_pi(&pi, 2).unwrap();
        let recon = &alpha * beta_star.transpose();
        assert!((recon - pi).norm() < 1e-12);
    }

    #[test]
    fn decompose_rejects_bad_rank() {
        let pi = DMatrix::<f64>::identity(2, 2);
        assert!(matches!(
            decompose_pi(&pi, 3),
            Err(Error::RankTooLarge { .. })
        ));
        assert!(matches!(
            decompose_pi(&pi, 0),
            Err(Error::RankTooLarge { .. })
        ));
    }

    #[test]
    fn recover_alpha_consistent_and_zero() {
        let pi = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 0.0]);
        let (alpha, beta_star) = decompose_pi(&pi, 1).unwrap();
        let recovered = recover_alpha(&pi, &beta_star).unwrap();
        assert!((&recovered - &alpha).norm() < 1e-12);

        let zero = DMatrix::<f64>::zeros(2, 2);
        let recovered = recover_alpha(&zero, &beta_star).unwrap();
        assert!(recovered.norm() == 0.0);
    }

    #[test]
    fn scalar_factorization() {
        let pi = DMatrix::from_row_slice(1, 1, &[-0.7]);
        let (alpha, beta_star) = decompose_pi(&pi, 1).unwrap();
        assert!((beta_star[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((alpha[(0, 0)] + 0.7).abs() < 1e-14);
    }

    #[test]
    fn singular_basis_rejected() {
        let beta = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let pi = DMatrix::<f64>::identity(2, 2);
        assert!(matches!(
            recover_alpha(&pi, &beta),
            Err(Error::SingularBetaGram)
        ));
    }
}
