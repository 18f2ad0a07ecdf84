//! Difference-form design operator.
//!
//! Rewriting the per-period coefficients as `beta_t = beta0 + sum(delta_tau)`
//! turns the panel regression into `r = Xtilde * delta + u`, where
//! `r_t = y_t - X_t beta0` and `Xtilde` is block lower-triangular with block
//! `(s, t) = X_s` for `s >= t`. One column group per period, `n` columns per
//! group.
//!
//! The operator is never materialized. Its action, adjoint, per-group Gram
//! matrices `D_t S_t D_t` (with `S_t = sum_{s>=t} X_s' X_s`), and spectral
//! bounds are all derived from `O(T n^2)` precomputed state, which is what a
//! first-order group solver needs.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::panel::RegressionPanel;

/// Columns with l2 norm at or below this are treated as absent (inert).
const ZERO_COLUMN_TOL: f64 = 1e-12;

/// Floor applied to the response norm before dividing by it.
const RESPONSE_SCALE_FLOOR: f64 = 1e-12;

/// Power-iteration settings for the per-group spectral bounds.
const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 1000;

/// The stacked residual target `r_t = y_t - X_t beta0`, kept in original
/// (unscaled) units.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualTarget {
    blocks: Vec<DVector<f64>>,
}

impl ResidualTarget {
    /// Residual block `r_t`.
    pub fn block(&self, t: usize) -> &DVector<f64> {
        &self.blocks[t]
    }

    pub fn blocks(&self) -> &[DVector<f64>] {
        &self.blocks
    }

    /// All blocks stacked into one vector of length `m * T`.
    pub fn stacked(&self) -> DVector<f64> {
        let m = self.blocks[0].len();
        let mut out = DVector::zeros(m * self.blocks.len());
        for (t, b) in self.blocks.iter().enumerate() {
            out.rows_mut(t * m, m).copy_from(b);
        }
        out
    }

    /// l2 norm of the stacked residual.
    pub fn norm(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.norm_squared())
            .sum::<f64>()
            .sqrt()
    }
}

/// Matrix-free difference-form design with optional unit-l2 column scaling.
///
/// When built with `normalize = true`, [`DifferenceDesign::apply`] and
/// [`DifferenceDesign::apply_adjoint`] act as the column-scaled operator
/// (each column divided by its l2 norm) and the response side is meant to be
/// divided by [`DifferenceDesign::response_scale`]. The stored scale factors
/// convert solutions back to original coordinates. Zero columns get scale 1
/// and are flagged inert; their coefficients carry no information and stay
/// pinned at zero.
#[derive(Debug, Clone)]
pub struct DifferenceDesign {
    panel: Arc<RegressionPanel>,
    normalized: bool,
    /// Raw l2 norms of the `n * T` operator columns, group-major layout.
    column_norms: Vec<f64>,
    /// Effective divisors: the norms when normalizing, 1 otherwise or when inert.
    column_scales: Vec<f64>,
    inv_scales: Vec<f64>,
    inert_columns: Vec<bool>,
    inert_groups: Vec<bool>,
    response_norm: f64,
    response_scale: f64,
    /// `S_t = sum_{s>=t} X_s' X_s`, built by the exact recursion from the back.
    suffix_grams: Vec<DMatrix<f64>>,
    /// Per-period Grams `X_t' X_t`.
    period_grams: Vec<DMatrix<f64>>,
    /// Largest eigenvalue of each scaled group Gram `D_t S_t D_t`.
    group_lipschitz: Vec<f64>,
}

/// Builds the operator and the residual target for a panel and baseline.
pub fn build_design(
    panel: Arc<RegressionPanel>,
    beta0: &DVector<f64>,
    normalize: bool,
) -> Result<(DifferenceDesign, ResidualTarget)> {
    let n = panel.coef_dim();
    let t_len = panel.periods();
    if beta0.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "beta0 has length {}, panel has {n} coefficients",
            beta0.len()
        )));
    }

    let blocks: Vec<DVector<f64>> = (0..t_len)
        .map(|t| panel.response(t) - panel.design(t) * beta0)
        .collect();
    let target = ResidualTarget { blocks };

    let period_grams: Vec<DMatrix<f64>> = (0..t_len)
        .map(|t| {
            let x = panel.design(t);
            x.tr_mul(x)
        })
        .collect();
    let mut suffix_grams = vec![DMatrix::<f64>::zeros(n, n); t_len];
    suffix_grams[t_len - 1] = period_grams[t_len - 1].clone();
    for t in (0..t_len - 1).rev() {
        suffix_grams[t] = &period_grams[t] + &suffix_grams[t + 1];
    }

    // Column j of group t is the stack of X_s e_j for s >= t, so its squared
    // norm is the j-th diagonal entry of S_t.
    let mut column_norms = Vec::with_capacity(n * t_len);
    let mut column_scales = Vec::with_capacity(n * t_len);
    let mut inv_scales = Vec::with_capacity(n * t_len);
    let mut inert_columns = Vec::with_capacity(n * t_len);
    let mut inert_groups = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let mut group_inert = true;
        for j in 0..n {
            let norm = suffix_grams[t][(j, j)].max(0.0).sqrt();
            let inert = norm <= ZERO_COLUMN_TOL;
            let scale = if normalize && !inert { norm } else { 1.0 };
            column_norms.push(norm);
            column_scales.push(scale);
            inv_scales.push(1.0 / scale);
            inert_columns.push(inert);
            group_inert &= inert;
        }
        inert_groups.push(group_inert);
    }

    let response_norm = target.norm();
    let response_scale = if normalize {
        response_norm.max(RESPONSE_SCALE_FLOOR)
    } else {
        1.0
    };

    let mut design = DifferenceDesign {
        panel,
        normalized: normalize,
        column_norms,
        column_scales,
        inv_scales,
        inert_columns,
        inert_groups,
        response_norm,
        response_scale,
        suffix_grams,
        period_grams,
        group_lipschitz: Vec::new(),
    };
    design.group_lipschitz = (0..t_len)
        .map(|t| {
            if design.inert_groups[t] {
                1.0
            } else {
                top_eigenvalue_psd(&design.scaled_group_gram(t), POWER_TOL, POWER_MAX_ITER)
                    .max(f64::MIN_POSITIVE)
            }
        })
        .collect();
    Ok((design, target))
}

impl DifferenceDesign {
    pub fn panel(&self) -> &Arc<RegressionPanel> {
        &self.panel
    }

    pub fn periods(&self) -> usize {
        self.panel.periods()
    }

    pub fn coef_dim(&self) -> usize {
        self.panel.coef_dim()
    }

    pub fn obs_dim(&self) -> usize {
        self.panel.obs_dim()
    }

    pub fn normalized(&self) -> bool {
        self.normalized
    }

    /// Raw l2 norms of the operator columns (group-major).
    pub fn column_norms(&self) -> &[f64] {
        &self.column_norms
    }

    /// Effective per-column divisors (all 1 when not normalized).
    pub fn column_scales(&self) -> &[f64] {
        &self.column_scales
    }

    pub fn inert_columns(&self) -> &[bool] {
        &self.inert_columns
    }

    pub fn inert_group(&self, t: usize) -> bool {
        self.inert_groups[t]
    }

    /// l2 norm of the raw residual target this design was built against.
    pub fn response_norm(&self) -> f64 {
        self.response_norm
    }

    /// Effective response divisor (1 when not normalized).
    pub fn response_scale(&self) -> f64 {
        self.response_scale
    }

    /// Suffix Gram `S_t`.
    pub fn suffix_gram(&self, t: usize) -> &DMatrix<f64> {
        &self.suffix_grams[t]
    }

    /// Per-period Gram `X_t' X_t`.
    pub fn period_gram(&self, t: usize) -> &DMatrix<f64> {
        &self.period_grams[t]
    }

    /// Spectral bound of the scaled group Gram, from power iteration.
    pub fn group_lipschitz(&self, t: usize) -> f64 {
        self.group_lipschitz[t]
    }

    /// Reciprocal column scales for group `t`.
    pub fn inv_scales_group(&self, t: usize) -> &[f64] {
        let n = self.coef_dim();
        &self.inv_scales[t * n..(t + 1) * n]
    }

    /// The scaled group Gram `D_t S_t D_t`.
    pub fn scaled_group_gram(&self, t: usize) -> DMatrix<f64> {
        let n = self.coef_dim();
        let inv = self.inv_scales_group(t);
        let mut gram = self.suffix_grams[t].clone();
        for j in 0..n {
            for i in 0..n {
                gram[(i, j)] *= inv[i] * inv[j];
            }
        }
        gram
    }

    /// Forward map: block `s` of the output is `X_s * sum_{t<=s} D_t delta_t`.
    ///
    /// Runs in `O(T (n + m n))` using cumulative sums; no stacked matrix is
    /// formed.
    pub fn apply(&self, delta: &[f64]) -> Result<DVector<f64>> {
        let (m, n, t_len) = (self.obs_dim(), self.coef_dim(), self.periods());
        if delta.len() != n * t_len {
            return Err(Error::DimensionMismatch(format!(
                "delta has length {}, expected {}",
                delta.len(),
                n * t_len
            )));
        }
        let mut out = DVector::zeros(m * t_len);
        let mut cum = DVector::<f64>::zeros(n);
        for s in 0..t_len {
            let inv = self.inv_scales_group(s);
            for j in 0..n {
                cum[j] += delta[s * n + j] * inv[j];
            }
            out.rows_mut(s * m, m)
                .gemv(1.0, self.panel.design(s), &cum, 0.0);
        }
        Ok(out)
    }

    /// Adjoint map: block `t` of the output is `D_t * sum_{s>=t} X_s' v_s`.
    pub fn apply_adjoint(&self, v: &[f64]) -> Result<DVector<f64>> {
        let (m, n, t_len) = (self.obs_dim(), self.coef_dim(), self.periods());
        if v.len() != m * t_len {
            return Err(Error::DimensionMismatch(format!(
                "v has length {}, expected {}",
                v.len(),
                m * t_len
            )));
        }
        let mut out = DVector::zeros(n * t_len);
        let mut acc = DVector::<f64>::zeros(n);
        let v = DVector::from_column_slice(v);
        for t in (0..t_len).rev() {
            acc.gemv_tr(1.0, self.panel.design(t), &v.rows(t * m, m), 1.0);
            let inv = self.inv_scales_group(t);
            for j in 0..n {
                out[t * n + j] = acc[j] * inv[j];
            }
        }
        Ok(out)
    }

    /// Restriction of the (scaled) operator to the columns of group `t`.
    pub fn group_columns(&self, t: usize) -> Result<GroupColumns<'_>> {
        if t >= self.periods() {
            return Err(Error::IndexOutOfRange {
                index: t,
                periods: self.periods(),
            });
        }
        Ok(GroupColumns { design: self, t })
    }
}

/// View of one period group's columns: `u -> stacked X_s D_t u` for
/// `s >= t` (zero blocks before `t`), plus the adjoint and the group Gram.
#[derive(Debug, Clone, Copy)]
pub struct GroupColumns<'a> {
    design: &'a DifferenceDesign,
    t: usize,
}

impl GroupColumns<'_> {
    pub fn period(&self) -> usize {
        self.t
    }

    /// Applies the group's scaled columns to an `n`-vector.
    pub fn apply(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        let (m, n, t_len) = (
            self.design.obs_dim(),
            self.design.coef_dim(),
            self.design.periods(),
        );
        if u.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "group input has length {}, expected {n}",
                u.len()
            )));
        }
        let inv = self.design.inv_scales_group(self.t);
        let scaled = DVector::from_fn(n, |j, _| u[j] * inv[j]);
        let mut out = DVector::zeros(m * t_len);
        for s in self.t..t_len {
            out.rows_mut(s * m, m)
                .gemv(1.0, self.design.panel.design(s), &scaled, 0.0);
        }
        Ok(out)
    }

    /// Adjoint of [`GroupColumns::apply`] on a stacked `m * T` vector.
    pub fn apply_adjoint(&self, v: &DVector<f64>) -> Result<DVector<f64>> {
        let (m, n, t_len) = (
            self.design.obs_dim(),
            self.design.coef_dim(),
            self.design.periods(),
        );
        if v.len() != m * t_len {
            return Err(Error::DimensionMismatch(format!(
                "stacked input has length {}, expected {}",
                v.len(),
                m * t_len
            )));
        }
        let mut acc = DVector::<f64>::zeros(n);
        for s in self.t..t_len {
            acc.gemv_tr(1.0, self.design.panel.design(s), &v.rows(s * m, m), 1.0);
        }
        let inv = self.design.inv_scales_group(self.t);
        for j in 0..n {
            acc[j] *= inv[j];
        }
        Ok(acc)
    }

    /// The group Gram `D_t S_t D_t`.
    pub fn gram(&self) -> DMatrix<f64> {
        self.design.scaled_group_gram(self.t)
    }
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix by power
/// iteration with a fixed seeded start, so repeated builds agree bit for bit.
fn top_eigenvalue_psd(a: &DMatrix<f64>, tol: f64, max_iter: usize) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x9E37_79B9_7F4A_7C15);
    let mut v = DVector::from_fn(n, |_, _| rng.random::<f64>() - 0.5);
    let norm = v.norm();
    if norm == 0.0 {
        v[0] = 1.0;
    } else {
        v /= norm;
    }
    let mut av = DVector::zeros(n);
    let mut lambda_prev = f64::INFINITY;
    for _ in 0..max_iter {
        av.gemv(1.0, a, &v, 0.0);
        let lambda = v.dot(&av);
        let av_norm = av.norm();
        if av_norm == 0.0 {
            return 0.0;
        }
        v.copy_from(&av);
        v /= av_norm;
        if (lambda - lambda_prev).abs() <= tol * lambda.abs().max(1e-30) {
            return lambda;
        }
        lambda_prev = lambda;
    }
    lambda_prev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::panel::RegressionPanel;

    fn scalar_panel(xs: &[f64], ys: &[f64]) -> Arc<RegressionPanel> {
        Arc::new(
            RegressionPanel::new(
                xs.iter()
                    .map(|&x| DMatrix::from_row_slice(1, 1, &[x]))
                    .collect(),
                ys.iter().map(|&y| DVector::from_vec(vec![y])).collect(),
                None,
            )
            .unwrap(),
        )
    }

    #[test]
    fn residual_and_column_scales() {
        let panel = scalar_panel(&[2.0, 3.0], &[0.0, 0.0]);
        let (design, target) = build_design(panel, &DVector::from_vec(vec![0.0]), true).unwrap();
        assert_eq!(target.block(0)[0], 0.0);
        assert_eq!(target.block(1)[0], 0.0);
        // Column of group 0 is (2, 3); column of group 1 is (0, 3).
        assert!((design.column_norms()[0] - 13.0_f64.sqrt()).abs() < 1e-15);
        assert!((design.column_norms()[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn residual_subtracts_baseline() {
        let panel = scalar_panel(&[2.0, 3.0], &[2.0, 6.0]);
        let (_, target) = build_design(panel, &DVector::from_vec(vec![1.0]), true).unwrap();
        assert_eq!(target.block(0)[0], 0.0);
        assert_eq!(target.block(1)[0], 3.0);
    }

    #[test]
    fn apply_cumulative_blocks() {
        let panel = scalar_panel(&[2.0, 3.0], &[0.0, 0.0]);
        let (design, _) = build_design(panel, &DVector::from_vec(vec![0.0]), false).unwrap();
        let out = design.apply(&[1.0, 1.0]).unwrap();
        assert_eq!(out[0], 2.0);
        assert_eq!(out[1], 6.0);
        let zero = design.apply(&[0.0, 0.0]).unwrap();
        assert_eq!(zero[0], 0.0);
        assert_eq!(zero[1], 0.0);
    }

    #[test]
    fn adjoint_suffix_blocks() {
        let panel = scalar_panel(&[2.0, 3.0], &[0.0, 0.0]);
        let (design, _) = build_design(panel, &DVector::from_vec(vec![0.0]), false).unwrap();
        let out = design.apply_adjoint(&[1.0, 1.0]).unwrap();
        assert_eq!(out[0], 5.0);
        assert_eq!(out[1], 3.0);
        let zero = design.apply_adjoint(&[0.0, 0.0]).unwrap();
        assert_eq!(zero[0], 0.0);
        assert_eq!(zero[1], 0.0);
    }

    #[test]
    fn suffix_gram_recursion_is_exact() {
        let panel = scalar_panel(&[1.0, -2.0, 0.5, 3.0], &[0.0; 4]);
        let (design, _) = build_design(panel, &DVector::from_vec(vec![0.0]), true).unwrap();
        for t in 0..3 {
            let expect = design.period_gram(t) + design.suffix_gram(t + 1);
            assert_eq!(design.suffix_gram(t), &expect);
        }
    }

    #[test]
    fn last_group_is_single_block() {
        let panel = scalar_panel(&[2.0, 3.0], &[0.0, 0.0]);
        let (design, _) = build_design(panel, &DVector::from_vec(vec![0.0]), false).unwrap();
        let group = design.group_columns(1).unwrap();
        let out = group.apply(&DVector::from_vec(vec![1.0])).unwrap();
        assert_eq!(out[0], 0.0);
        assert_eq!(out[1], 3.0);
        assert!(design.group_columns(2).is_err());
    }

    #[test]
    fn zero_columns_marked_inert() {
        let panel = scalar_panel(&[2.0, 0.0], &[1.0, 1.0]);
        let (design, _) = build_design(panel, &DVector::from_vec(vec![0.0]), true).unwrap();
        assert!(!design.inert_columns()[0]);
        assert!(design.inert_columns()[1]);
        assert!(design.inert_group(1));
        assert_eq!(design.group_lipschitz(1), 1.0);
        assert_eq!(design.column_scales()[1], 1.0);
    }

    #[test]
    fn beta0_length_checked() {
        let panel = scalar_panel(&[2.0], &[1.0]);
        let err = build_design(panel, &DVector::from_vec(vec![0.0, 0.0]), true).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn power_iteration_matches_known_spectrum() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5]);
        let top = top_eigenvalue_psd(&a, 1e-12, 1000);
        assert!((top - 2.0).abs() < 1e-10);
    }
}
