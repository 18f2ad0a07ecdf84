//! Panel data model for time-varying linear regression.
//!
//! A panel is the sequence `{(X_t, y_t)}` for periods `t = 0..T`, where each
//! `X_t` is an `m x n` design block and each `y_t` an `m`-vector of
//! responses. The coefficient vector is allowed to change from period to
//! period; [`CoefficientPath`] stores one such trajectory as a starting value
//! plus per-period increments.
//!
//! Periods are indexed `0..T` throughout the crate. Labels (dates or integer
//! tags) are metadata only and never enter the math.

use std::fmt;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A period tag: either a plain integer index or a calendar date.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PeriodLabel {
    Index(i64),
    Date(NaiveDate),
}

impl fmt::Display for PeriodLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PeriodLabel::Index(i) => write!(f, "{i}"),
            PeriodLabel::Date(d) => write!(f, "{d}"),
        }
    }
}

/// A validated panel `{(X_t, y_t)}` with `T` periods, `m` observations per
/// period, and `n` coefficients.
///
/// Construction via [`RegressionPanel::new`] checks every invariant; the
/// panel is immutable afterwards, so a value of this type is always valid
/// and safe to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionPanel {
    obs_dim: usize,
    coef_dim: usize,
    design_blocks: Vec<DMatrix<f64>>,
    responses: Vec<DVector<f64>>,
    period_labels: Option<Vec<PeriodLabel>>,
}

impl RegressionPanel {
    /// Validates and assembles a panel.
    ///
    /// Requires at least one period, identical `m x n` shapes across all
    /// design blocks, responses of length `m`, finite entries everywhere,
    /// and (when present) exactly `T` strictly increasing labels.
    pub fn new(
        design_blocks: Vec<DMatrix<f64>>,
        responses: Vec<DVector<f64>>,
        period_labels: Option<Vec<PeriodLabel>>,
    ) -> Result<Self> {
        if design_blocks.is_empty() {
            return Err(Error::EmptyPanel);
        }
        if responses.len() != design_blocks.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} design blocks but {} response vectors",
                design_blocks.len(),
                responses.len()
            )));
        }
        let obs_dim = design_blocks[0].nrows();
        let coef_dim = design_blocks[0].ncols();
        if obs_dim == 0 || coef_dim == 0 {
            return Err(Error::DimensionMismatch(
                "design blocks must have at least one row and one column".into(),
            ));
        }
        for (t, block) in design_blocks.iter().enumerate() {
            if block.nrows() != obs_dim || block.ncols() != coef_dim {
                return Err(Error::DimensionMismatch(format!(
                    "design block {t} is {}x{}, expected {obs_dim}x{coef_dim}",
                    block.nrows(),
                    block.ncols()
                )));
            }
            if !block.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFiniteEntry(format!("design block {t}")));
            }
        }
        for (t, y) in responses.iter().enumerate() {
            if y.len() != obs_dim {
                return Err(Error::DimensionMismatch(format!(
                    "response {t} has length {}, expected {obs_dim}",
                    y.len()
                )));
            }
            if !y.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFiniteEntry(format!("response {t}")));
            }
        }
        if let Some(labels) = &period_labels {
            if labels.len() != design_blocks.len() {
                return Err(Error::DimensionMismatch(format!(
                    "{} labels for {} periods",
                    labels.len(),
                    design_blocks.len()
                )));
            }
            for w in labels.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::NonMonotonicLabels(format!(
                        "{} does not precede {}",
                        w[0], w[1]
                    )));
                }
            }
        }
        Ok(Self {
            obs_dim,
            coef_dim,
            design_blocks,
            responses,
            period_labels,
        })
    }

    /// Number of periods `T`.
    pub fn periods(&self) -> usize {
        self.design_blocks.len()
    }

    /// Observations per period `m`.
    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    /// Coefficients per period `n`.
    pub fn coef_dim(&self) -> usize {
        self.coef_dim
    }

    /// Design block `X_t`.
    pub fn design(&self, t: usize) -> &DMatrix<f64> {
        &self.design_blocks[t]
    }

    /// Response vector `y_t`.
    pub fn response(&self, t: usize) -> &DVector<f64> {
        &self.responses[t]
    }

    pub fn design_blocks(&self) -> &[DMatrix<f64>] {
        &self.design_blocks
    }

    pub fn responses(&self) -> &[DVector<f64>] {
        &self.responses
    }

    pub fn period_labels(&self) -> Option<&[PeriodLabel]> {
        self.period_labels.as_deref()
    }

    /// Label for period `t`, when labels are attached.
    pub fn label(&self, t: usize) -> Option<PeriodLabel> {
        self.period_labels.as_ref().map(|ls| ls[t])
    }
}

/// A coefficient trajectory: starting value `beta0`, per-period increments
/// `deltas`, and the implied levels `betas[t] = beta0 + sum(deltas[..=t])`.
///
/// The levels are computed once by left-to-right prefix summation, so
/// recomputing the same sum reproduces `betas` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPath {
    beta0: DVector<f64>,
    deltas: Vec<DVector<f64>>,
    betas: Vec<DVector<f64>>,
}

impl CoefficientPath {
    pub fn beta0(&self) -> &DVector<f64> {
        &self.beta0
    }

    pub fn deltas(&self) -> &[DVector<f64>] {
        &self.deltas
    }

    pub fn betas(&self) -> &[DVector<f64>] {
        &self.betas
    }

    /// Number of periods covered by the path.
    pub fn periods(&self) -> usize {
        self.deltas.len()
    }

    /// First differences of the levels, with `beta0` prepended: entry `t` is
    /// `betas[t] - betas[t-1]` (and `betas[0] - beta0` for `t = 0`).
    pub fn diff_betas(&self) -> Vec<DVector<f64>> {
        let mut prev = &self.beta0;
        let mut out = Vec::with_capacity(self.betas.len());
        for b in &self.betas {
            out.push(b - prev);
            prev = b;
        }
        out
    }
}

/// Builds a [`CoefficientPath`] from a starting value and increments via the
/// cumulative-sum identity `beta_t = beta0 + sum_{tau<=t} delta_tau`.
pub fn reconstruct_path(beta0: DVector<f64>, deltas: Vec<DVector<f64>>) -> Result<CoefficientPath> {
    let n = beta0.len();
    for (t, d) in deltas.iter().enumerate() {
        if d.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "delta {t} has length {}, expected {n}",
                d.len()
            )));
        }
    }
    let mut betas = Vec::with_capacity(deltas.len());
    let mut current = beta0.clone();
    for d in &deltas {
        current += d;
        betas.push(current.clone());
    }
    Ok(CoefficientPath {
        beta0,
        deltas,
        betas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vec1(v: f64) -> DVector<f64> {
        DVector::from_vec(vec![v])
    }

    #[test]
    fn valid_small_panel() {
        let panel = RegressionPanel::new(
            vec![
                DMatrix::from_row_slice(1, 1, &[2.0]),
                DMatrix::from_row_slice(1, 1, &[3.0]),
            ],
            vec![vec1(1.0), vec1(1.0)],
            None,
        )
        .unwrap();
        assert_eq!(panel.periods(), 2);
        assert_eq!(panel.obs_dim(), 1);
        assert_eq!(panel.coef_dim(), 1);
    }

    #[test]
    fn response_length_mismatch_rejected() {
        let err = RegressionPanel::new(
            vec![
                DMatrix::from_row_slice(1, 1, &[2.0]),
                DMatrix::from_row_slice(1, 1, &[3.0]),
            ],
            vec![vec1(1.0), DVector::from_vec(vec![1.0, 2.0])],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn nan_design_rejected() {
        let err = RegressionPanel::new(
            vec![DMatrix::from_row_slice(1, 1, &[f64::NAN])],
            vec![vec1(1.0)],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFiniteEntry(_)));
    }

    #[test]
    fn empty_panel_rejected() {
        let err = RegressionPanel::new(vec![], vec![], None).unwrap_err();
        assert!(matches!(err, Error::EmptyPanel));
    }

    #[test]
    fn out_of_order_labels_rejected() {
        let err = RegressionPanel::new(
            vec![
                DMatrix::from_row_slice(1, 1, &[1.0]),
                DMatrix::from_row_slice(1, 1, &[1.0]),
            ],
            vec![vec1(0.0), vec1(0.0)],
            Some(vec![PeriodLabel::Index(5), PeriodLabel::Index(5)]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonMonotonicLabels(_)));
    }

    #[test]
    fn reconstruct_prefix_sums() {
        let path = reconstruct_path(vec1(1.0), vec![vec1(0.0), vec1(2.0), vec1(0.0)]).unwrap();
        let levels: Vec<f64> = path.betas().iter().map(|b| b[0]).collect();
        assert_eq!(levels, vec![1.0, 3.0, 3.0]);
    }

    #[test]
    fn reconstruct_zero_case() {
        let path = reconstruct_path(
            DVector::from_vec(vec![0.0, 0.0]),
            vec![DVector::from_vec(vec![0.0, 0.0])],
        )
        .unwrap();
        assert_eq!(path.betas()[0], DVector::from_vec(vec![0.0, 0.0]));
    }

    #[test]
    fn reconstruct_two_dim() {
        let path = reconstruct_path(
            DVector::from_vec(vec![1.0, -1.0]),
            vec![
                DVector::from_vec(vec![1.0, 1.0]),
                DVector::from_vec(vec![-1.0, -1.0]),
            ],
        )
        .unwrap();
        assert_eq!(path.betas()[0], DVector::from_vec(vec![2.0, 0.0]));
        assert_eq!(path.betas()[1], DVector::from_vec(vec![1.0, -1.0]));
    }

    #[test]
    fn reconstruct_rejects_ragged_deltas() {
        let err = reconstruct_path(vec1(1.0), vec![DVector::from_vec(vec![1.0, 2.0])]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }
}
