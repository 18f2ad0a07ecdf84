//! Seeded generators of panels and VEC series with planted parameter jumps.
//!
//! All randomness comes from `ChaCha8Rng` seeded with a caller-provided
//! `u64` (via `seed_from_u64`) and standard-normal draws from
//! `rand_distr::StandardNormal`, so a scenario regenerates bit-identical
//! data on every platform. Draw order is fixed: for each period, the design
//! block row by row, then the noise vector.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::panel::{reconstruct_path, CoefficientPath, RegressionPanel};

/// How design blocks are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DesignDistribution {
    #[default]
    StandardNormal,
    UnitConstant,
}

/// A synthetic panel: dimensions, a base coefficient vector, a jump
/// schedule, and a noise level.
///
/// Jump periods use the panel's 0-based indexing and must be at least 1
/// (a "jump" at period 0 would just shift the base vector).
#[derive(Debug, Clone)]
pub struct PanelScenario {
    pub seed: u64,
    pub periods: usize,
    pub obs_dim: usize,
    pub coef_dim: usize,
    pub base_beta: DVector<f64>,
    pub jumps: Vec<(usize, DVector<f64>)>,
    pub noise_scale: f64,
    pub design: DesignDistribution,
}

impl PanelScenario {
    fn validate(&self) -> Result<()> {
        if self.periods == 0 || self.obs_dim == 0 || self.coef_dim == 0 {
            return Err(Error::InvalidSchedule(
                "periods, obs_dim, and coef_dim must be positive".into(),
            ));
        }
        if self.base_beta.len() != self.coef_dim {
            return Err(Error::InvalidSchedule(format!(
                "base beta has length {}, expected {}",
                self.base_beta.len(),
                self.coef_dim
            )));
        }
        if !(self.noise_scale.is_finite() && self.noise_scale >= 0.0) {
            return Err(Error::InvalidSchedule(
                "noise scale must be finite and nonnegative".into(),
            ));
        }
        let mut prev: Option<usize> = None;
        for (p, jump) in &self.jumps {
            if *p == 0 || *p >= self.periods {
                return Err(Error::InvalidSchedule(format!(
                    "jump period {p} outside 1..{}",
                    self.periods
                )));
            }
            if prev.is_some_and(|q| q >= *p) {
                return Err(Error::InvalidSchedule(
                    "jump periods must be strictly increasing".into(),
                ));
            }
            if jump.len() != self.coef_dim {
                return Err(Error::InvalidSchedule(format!(
                    "jump at period {p} has length {}, expected {}",
                    jump.len(),
                    self.coef_dim
                )));
            }
            if !jump.iter().all(|v| v.is_finite()) {
                return Err(Error::InvalidSchedule(format!(
                    "jump at period {p} has non-finite entries"
                )));
            }
            prev = Some(*p);
        }
        Ok(())
    }
}

/// Draws a panel and returns it with the true coefficient trajectory.
pub fn generate_panel(scenario: &PanelScenario) -> Result<(RegressionPanel, CoefficientPath)> {
    scenario.validate()?;
    let (t_len, m, n) = (scenario.periods, scenario.obs_dim, scenario.coef_dim);
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);

    let mut deltas = vec![DVector::<f64>::zeros(n); t_len];
    for (p, jump) in &scenario.jumps {
        deltas[*p] = jump.clone();
    }
    let truth = reconstruct_path(scenario.base_beta.clone(), deltas)?;

    let mut blocks = Vec::with_capacity(t_len);
    let mut responses = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let mut x = DMatrix::<f64>::zeros(m, n);
        match scenario.design {
            DesignDistribution::StandardNormal => {
                for i in 0..m {
                    for j in 0..n {
                        x[(i, j)] = rng.sample(StandardNormal);
                    }
                }
            }
            DesignDistribution::UnitConstant => x.fill(1.0),
        }
        let mut y = &x * &truth.betas()[t];
        if scenario.noise_scale > 0.0 {
            for i in 0..m {
                let eps: f64 = rng.sample(StandardNormal);
                y[i] += scenario.noise_scale * eps;
            }
        } else {
            // Keep the draw stream aligned across noise settings.
            for _ in 0..m {
                let _: f64 = rng.sample(StandardNormal);
            }
        }
        blocks.push(x);
        responses.push(y);
    }
    let panel = RegressionPanel::new(blocks, responses, None)?;
    Ok((panel, truth))
}

/// A synthetic VEC system with planted loading-matrix jumps.
///
/// `panel_periods` is the number of usable regression periods the resulting
/// series supports at lag order `lag_order` (the series itself is
/// `panel_periods + lag_order + 1` points long after the burn-in is
/// discarded). Jump periods are panel periods, 0-based, at least 1.
#[derive(Debug, Clone)]
pub struct VecmScenario {
    pub seed: u64,
    pub dim: usize,
    pub panel_periods: usize,
    pub lag_order: usize,
    pub gammas: Vec<DMatrix<f64>>,
    pub mu: DVector<f64>,
    pub pi_base: DMatrix<f64>,
    pub pi_jumps: Vec<(usize, DMatrix<f64>)>,
    pub noise_scale: f64,
    pub burn_in: usize,
}

impl VecmScenario {
    pub fn new(
        seed: u64,
        dim: usize,
        panel_periods: usize,
        lag_order: usize,
        gammas: Vec<DMatrix<f64>>,
        mu: DVector<f64>,
        pi_base: DMatrix<f64>,
    ) -> Self {
        Self {
            seed,
            dim,
            panel_periods,
            lag_order,
            gammas,
            mu,
            pi_base,
            pi_jumps: Vec::new(),
            noise_scale: 1.0,
            burn_in: 100,
        }
    }

    fn validate(&self) -> Result<()> {
        let (m, k) = (self.dim, self.lag_order);
        if m == 0 || k == 0 || self.panel_periods == 0 {
            return Err(Error::InvalidSchedule(
                "dim, lag_order, and panel_periods must be positive".into(),
            ));
        }
        if self.gammas.len() != k {
            return Err(Error::InvalidSchedule(format!(
                "{} lag matrices for lag order {k}",
                self.gammas.len()
            )));
        }
        let square = |mat: &DMatrix<f64>| mat.nrows() == m && mat.ncols() == m;
        if !self.gammas.iter().all(square) || !square(&self.pi_base) {
            return Err(Error::InvalidSchedule(
                "lag and loading matrices must all be m x m".into(),
            ));
        }
        if self.mu.len() != m {
            return Err(Error::InvalidSchedule("intercept must have length m".into()));
        }
        if !(self.noise_scale.is_finite() && self.noise_scale >= 0.0) {
            return Err(Error::InvalidSchedule(
                "noise scale must be finite and nonnegative".into(),
            ));
        }
        let mut prev: Option<usize> = None;
        for (p, jump) in &self.pi_jumps {
            if *p == 0 || *p >= self.panel_periods {
                return Err(Error::InvalidSchedule(format!(
                    "loading jump period {p} outside 1..{}",
                    self.panel_periods
                )));
            }
            if prev.is_some_and(|q| q >= *p) {
                return Err(Error::InvalidSchedule(
                    "loading jump periods must be strictly increasing".into(),
                ));
            }
            if !square(jump) {
                return Err(Error::InvalidSchedule(
                    "loading jumps must be m x m".into(),
                ));
            }
            prev = Some(*p);
        }
        Ok(())
    }
}

/// Ground truth attached to a generated series.
#[derive(Debug, Clone, PartialEq)]
pub struct VecmTruth {
    /// The loading matrix in force at each panel period.
    pub pi_per_period: Vec<DMatrix<f64>>,
    /// Panel periods at which the loading matrix jumped.
    pub jump_periods: Vec<usize>,
}

/// Simulates the VEC recursion forward and returns the series (`m x N`, one
/// column per time point) plus the true loading path.
///
/// Every loading regime must pass the stability gate: companion eigenvalues
/// of the implied level VAR either lie strictly inside radius 0.98 or are
/// unit roots (within 1e-6 of 1), and the unit-root count cannot exceed
/// `m - rank(Pi)`, the multiplicity a cointegrated system implies.
pub fn generate_vecm(scenario: &VecmScenario) -> Result<(DMatrix<f64>, VecmTruth)> {
    scenario.validate()?;
    let (m, k) = (scenario.dim, scenario.lag_order);

    // Loading matrix per panel period (cumulative jumps), plus regime list
    // for the stability check.
    let t_len = scenario.panel_periods;
    let mut pi_per_period = Vec::with_capacity(t_len);
    let mut current = scenario.pi_base.clone();
    let mut jump_iter = scenario.pi_jumps.iter().peekable();
    check_regime_stability(scenario, &current)?;
    for p in 0..t_len {
        if let Some((jp, jump)) = jump_iter.peek() {
            if *jp == p {
                current += jump;
                check_regime_stability(scenario, &current)?;
                jump_iter.next();
            }
        }
        pi_per_period.push(current.clone());
    }

    let n_series = t_len + k + 1;
    let total = scenario.burn_in + n_series;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);

    // Levels, simulated from zero initial conditions; the first burn_in
    // points are discarded.
    let mut levels = vec![DVector::<f64>::zeros(m); total.max(k + 1)];
    for s in k + 1..total {
        // Panel period for this step; earlier steps run under the base regime.
        let series_idx = s as isize - scenario.burn_in as isize;
        let pi = if series_idx >= (k + 1) as isize {
            &pi_per_period[(series_idx - (k + 1) as isize) as usize]
        } else {
            &scenario.pi_base
        };
        let mut dx = scenario.mu.clone();
        for i in 0..k {
            dx += &scenario.gammas[i] * (&levels[s - 1 - i] - &levels[s - 2 - i]);
        }
        dx += pi * &levels[s - k];
        for i in 0..m {
            let eps: f64 = rng.sample(StandardNormal);
            dx[i] += scenario.noise_scale * eps;
        }
        levels[s] = &levels[s - 1] + dx;
    }

    let mut series = DMatrix::<f64>::zeros(m, n_series);
    for (t, lvl) in levels[scenario.burn_in..].iter().enumerate() {
        series.set_column(t, lvl);
    }
    Ok((
        series,
        VecmTruth {
            pi_per_period,
            jump_periods: scenario.pi_jumps.iter().map(|(p, _)| *p).collect(),
        },
    ))
}

/// Radius inside which non-unit companion eigenvalues must fall.
const STABLE_RADIUS: f64 = 0.98;
/// Eigenvalues within this distance of 1 are counted as unit roots.
const UNIT_ROOT_TOL: f64 = 1e-6;

fn check_regime_stability(scenario: &VecmScenario, pi: &DMatrix<f64>) -> Result<()> {
    let (m, k) = (scenario.dim, scenario.lag_order);

    // Companion matrix of the level VAR implied by the VEC recursion:
    // lag-1 coefficient I + Gamma_1 (+ Pi when k = 1), intermediate lags
    // Gamma_i - Gamma_{i-1} (+ Pi at lag k), final lag -Gamma_k.
    let p = k + 1;
    let mut companion = DMatrix::<f64>::zeros(m * p, m * p);
    for lag in 0..p {
        let mut block = if lag == 0 {
            DMatrix::<f64>::identity(m, m) + &scenario.gammas[0]
        } else if lag < k {
            &scenario.gammas[lag] - &scenario.gammas[lag - 1]
        } else {
            -scenario.gammas[k - 1].clone()
        };
        if lag + 1 == k {
            block += pi;
        }
        companion.view_mut((0, lag * m), (m, m)).copy_from(&block);
    }
    for i in 0..m * (p - 1) {
        companion[(m + i, i)] = 1.0;
    }

    let rank = numerical_rank(pi);
    let allowed_unit_roots = m - rank;
    let mut unit_roots = 0usize;
    for ev in companion.complex_eigenvalues().iter() {
        let modulus = ev.norm();
        if (ev - nalgebra::Complex::new(1.0, 0.0)).norm() <= UNIT_ROOT_TOL {
            unit_roots += 1;
            continue;
        }
        if modulus >= STABLE_RADIUS {
            return Err(Error::UnstableSystem(format!(
                "companion eigenvalue of modulus {modulus:.4} outside radius {STABLE_RADIUS}"
            )));
        }
    }
    if unit_roots > allowed_unit_roots {
        return Err(Error::UnstableSystem(format!(
            "{unit_roots} unit roots but the loading matrix rank {rank} allows only {allowed_unit_roots}"
        )));
    }
    Ok(())
}

fn numerical_rank(mat: &DMatrix<f64>) -> usize {
    let svd = mat.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if smax <= 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|&&s| s >= smax * 1e-10)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_jump_scenario(seed: u64, noise: f64) -> PanelScenario {
        PanelScenario {
            seed,
            periods: 10,
            obs_dim: 2,
            coef_dim: 2,
            base_beta: DVector::from_vec(vec![1.0, -1.0]),
            jumps: vec![(5, DVector::from_vec(vec![2.0, 0.0]))],
            noise_scale: noise,
            design: DesignDistribution::StandardNormal,
        }
    }

    #[test]
    fn same_seed_same_panel() {
        let sc = one_jump_scenario(7, 0.5);
        let (a, _) = generate_panel(&sc).unwrap();
        let (b, _) = generate_panel(&sc).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noiseless_panel_fits_truth_exactly() {
        let sc = one_jump_scenario(3, 0.0);
        let (panel, truth) = generate_panel(&sc).unwrap();
        for t in 0..panel.periods() {
            let fitted = panel.design(t) * &truth.betas()[t];
            assert_eq!(&fitted, panel.response(t));
        }
    }

    #[test]
    fn truth_reproducible_from_schedule() {
        let sc = one_jump_scenario(11, 0.1);
        let (_, truth) = generate_panel(&sc).unwrap();
        let mut deltas = vec![DVector::zeros(2); sc.periods];
        for (p, j) in &sc.jumps {
            deltas[*p] = j.clone();
        }
        let rebuilt = reconstruct_path(sc.base_beta.clone(), deltas).unwrap();
        assert_eq!(rebuilt, truth);
    }

    #[test]
    fn jump_at_period_zero_rejected() {
        let mut sc = one_jump_scenario(1, 0.0);
        sc.jumps[0].0 = 0;
        assert!(matches!(
            generate_panel(&sc),
            Err(Error::InvalidSchedule(_))
        ));
    }

    #[test]
    fn explosive_system_rejected() {
        // Scalar system with companion root well outside the unit circle.
        let sc = VecmScenario::new(
            0,
            1,
            20,
            1,
            vec![DMatrix::from_row_slice(1, 1, &[0.5])],
            DVector::zeros(1),
            DMatrix::from_row_slice(1, 1, &[0.3]),
        );
        assert!(matches!(
            generate_vecm(&sc),
            Err(Error::UnstableSystem(_))
        ));
    }

    #[test]
    fn cointegrated_system_accepted() {
        // m = 2, rank-1 loading: one unit root allowed, error-correction
        // direction stable.
        let sc = VecmScenario::new(
            5,
            2,
            50,
            1,
            vec![DMatrix::from_row_slice(2, 2, &[0.2, 0.0, 0.0, 0.2])],
            DVector::zeros(2),
            DMatrix::from_row_slice(2, 2, &[-0.3, 0.3, 0.3, -0.3]),
        );
        let (series, truth) = generate_vecm(&sc).unwrap();
        assert_eq!(series.ncols(), 50 + 1 + 1);
        assert_eq!(truth.pi_per_period.len(), 50);
        let (series2, _) = generate_vecm(&sc).unwrap();
        assert_eq!(series, series2);
    }

    #[test]
    fn pure_random_walks_accepted_with_zero_loading() {
        let sc = VecmScenario::new(
            2,
            2,
            30,
            1,
            vec![DMatrix::from_row_slice(2, 2, &[0.1, 0.0, 0.0, 0.1])],
            DVector::zeros(2),
            DMatrix::zeros(2, 2),
        );
        assert!(generate_vecm(&sc).is_ok());
    }
}
