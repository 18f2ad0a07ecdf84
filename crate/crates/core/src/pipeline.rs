//! End-to-end breakpoint detection.
//!
//! Chains the stages: pooled baseline fit, difference-form construction with
//! column normalization, group-LASSO solve (single penalty or a selected
//! point on a path), break extraction, and reconstruction of the per-period
//! coefficient trajectory.

use std::sync::Arc;

use nalgebra::DVector;

use crate::baseline::{fit_baseline, DEFAULT_RIDGE_FALLBACK};
use crate::diffop::build_design;
use crate::error::Result;
use crate::panel::{reconstruct_path, CoefficientPath, PeriodLabel, RegressionPanel};
use crate::solver::{
    lambda_max, select_lambda, solve, solve_path, GroupLassoSolution, GroupWeights,
    SelectionCriterion, SolverConfig,
};

/// How the penalty level is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice {
    /// Solve once at this value.
    Fixed(f64),
    /// Solve a log-spaced path and pick one point.
    Path {
        num_lambdas: usize,
        min_ratio: f64,
        criterion: SelectionCriterion,
    },
}

impl LambdaChoice {
    /// BIC selection over the default 50-point path down to 0.01 of
    /// lambda_max.
    pub fn auto_bic() -> Self {
        LambdaChoice::Path {
            num_lambdas: 50,
            min_ratio: 0.01,
            criterion: SelectionCriterion::Bic,
        }
    }

    /// Path selection targeting exactly `k` active periods.
    pub fn fixed_k(k: usize) -> Self {
        LambdaChoice::Path {
            num_lambdas: 50,
            min_ratio: 0.01,
            criterion: SelectionCriterion::FixedK(k),
        }
    }
}

/// Pipeline configuration.
#[derive(Debug, Clone)]
pub struct DetectConfig {
    pub choice: LambdaChoice,
    /// Column/response normalization for the difference design (on by default).
    pub normalize: bool,
    pub ridge_fallback: f64,
    pub group_weights: GroupWeights,
    pub kkt_tol: f64,
    pub max_sweeps: usize,
    pub objective_tol: f64,
}

impl DetectConfig {
    pub fn new(choice: LambdaChoice) -> Self {
        Self {
            choice,
            normalize: true,
            ridge_fallback: DEFAULT_RIDGE_FALLBACK,
            group_weights: GroupWeights::Uniform,
            kkt_tol: 1e-6,
            max_sweeps: 10_000,
            objective_tol: 1e-10,
        }
    }

    fn solver_config(&self, lambda: f64) -> SolverConfig {
        SolverConfig {
            lambda,
            group_weights: self.group_weights.clone(),
            kkt_tol: self.kkt_tol,
            max_sweeps: self.max_sweeps,
            objective_tol: self.objective_tol,
            record_objective: false,
        }
    }
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self::new(LambdaChoice::auto_bic())
    }
}

/// One detected break: the period where the coefficient vector jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakEvent {
    pub period: usize,
    pub label: Option<PeriodLabel>,
    /// l2 norm of the jump, in original coefficient units.
    pub magnitude: f64,
    pub jump: DVector<f64>,
}

/// Solver diagnostics carried along with a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub converged: bool,
    pub sweeps: usize,
    pub kkt_residual: f64,
    pub objective: f64,
    pub rss: f64,
    pub lambda_max: f64,
    pub path_points: usize,
    pub baseline_rank: usize,
    pub baseline_ridge_used: bool,
}

/// Full output of a detection run: the break list, the reconstructed
/// coefficient trajectory, and everything needed to reproduce the run.
#[derive(Debug, Clone, PartialEq)]
pub struct BreakReport {
    pub breaks: Vec<BreakEvent>,
    pub path: CoefficientPath,
    pub lambda_used: f64,
    pub criterion: String,
    pub diagnostics: Diagnostics,
}

/// Runs the full pipeline with the pooled-OLS baseline.
pub fn detect_breaks(panel: &Arc<RegressionPanel>, config: &DetectConfig) -> Result<BreakReport> {
    let baseline = fit_baseline(panel, config.ridge_fallback)?;
    detect_breaks_from(
        panel,
        baseline.beta0.clone(),
        baseline.rank,
        baseline.ridge_used,
        config,
    )
}

/// Runs the pipeline against a caller-supplied baseline coefficient vector
/// (the VEC layer passes the vectorized time-invariant loading matrix here).
pub fn detect_breaks_with_baseline(
    panel: &Arc<RegressionPanel>,
    beta0: DVector<f64>,
    config: &DetectConfig,
) -> Result<BreakReport> {
    detect_breaks_from(panel, beta0, panel.coef_dim(), false, config)
}

fn detect_breaks_from(
    panel: &Arc<RegressionPanel>,
    beta0: DVector<f64>,
    baseline_rank: usize,
    baseline_ridge_used: bool,
    config: &DetectConfig,
) -> Result<BreakReport> {
    let (design, target) = build_design(Arc::clone(panel), &beta0, config.normalize)?;
    let weights = config
        .group_weights
        .resolve(panel.periods(), panel.coef_dim())?;
    let lam_max = lambda_max(&design, &target, &weights)?;

    // A target orthogonal to every column (in particular an exact fit, r = 0)
    // has nothing for the penalty to trade off; the report is the baseline.
    if lam_max <= 0.0 {
        let zeros = vec![DVector::zeros(panel.coef_dim()); panel.periods()];
        let path = reconstruct_path(beta0, zeros)?;
        let rss = target.blocks().iter().map(|b| b.norm_squared()).sum();
        return Ok(BreakReport {
            breaks: Vec::new(),
            path,
            lambda_used: 0.0,
            criterion: "degenerate: lambda_max = 0".into(),
            diagnostics: Diagnostics {
                converged: true,
                sweeps: 0,
                kkt_residual: 0.0,
                objective: 0.0,
                rss,
                lambda_max: 0.0,
                path_points: 0,
                baseline_rank,
                baseline_ridge_used,
            },
        });
    }

    let (lambda_used, solution, criterion, path_points) = match config.choice {
        LambdaChoice::Fixed(lam) => {
            let sol = solve(&design, &target, &config.solver_config(lam), None)?;
            (lam, sol, format!("fixed lambda = {lam}"), 1)
        }
        LambdaChoice::Path {
            num_lambdas,
            min_ratio,
            criterion,
        } => {
            let path = solve_path(
                &design,
                &target,
                &config.solver_config(lam_max),
                num_lambdas,
                min_ratio,
            )?;
            let points = path.len();
            let picked = select_lambda(&path, &design, &target, criterion)?;
            let desc = match criterion {
                SelectionCriterion::Bic => format!("bic over {points}-point path"),
                SelectionCriterion::FixedK(k) => {
                    format!("fixed active-set size {k} over {points}-point path")
                }
            };
            (picked.0, picked.1.clone(), desc, points)
        }
    };

    let breaks = extract_breaks(panel, &solution);
    let path = reconstruct_path(beta0, solution.deltas.clone())?;
    Ok(BreakReport {
        breaks,
        path,
        lambda_used,
        criterion,
        diagnostics: Diagnostics {
            converged: solution.converged,
            sweeps: solution.sweeps,
            kkt_residual: solution.kkt_residual,
            objective: solution.objective,
            rss: solution.rss,
            lambda_max: lam_max,
            path_points,
            baseline_rank,
            baseline_ridge_used,
        },
    })
}

fn extract_breaks(panel: &RegressionPanel, solution: &GroupLassoSolution) -> Vec<BreakEvent> {
    solution
        .active_set
        .iter()
        .map(|&t| {
            let jump = solution.deltas[t].clone();
            BreakEvent {
                period: t,
                label: panel.label(t),
                magnitude: jump.norm(),
                jump,
            }
        })
        .collect()
}
