//! End-to-end scenario runs: evolve the chained state, compute every step's
//! Mermin value both from the closed-form expressions and by brute force on
//! the density matrix, and assemble violation reports.
//!
//! The brute-force path is the oracle: it knows nothing of the closed forms,
//! evaluating I^(k) = Σ_v c_v ⟨⊗_i M_{v_i}^{(i)}⟩ directly on the evolved
//! state. Reports always carry both numbers; agreement within 1e−9 is a
//! tested invariant of the whole pipeline.

use alloc::format;
use alloc::vec::Vec;

use crate::luders::{luders_step_double, luders_step_single};
use crate::mermin::mermin_value;
use crate::strategy::{
    build_observables, ghz_value, prefix_product, scaling_constant, w_value, ChainConfig,
    ChainKind, ScenarioKind,
};
use crate::linalg::DensityMatrix;
use crate::{Error, Result};

/// Largest party count admitted on the brute-force path (dense 2^n × 2^n
/// density matrices).
pub const BRUTE_FORCE_MAX_PARTIES: usize = 12;

/// One chain step's outcome in a report.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    /// Step index, 1-based.
    pub k: usize,
    /// Unsharpness used at this step.
    pub gamma_k: f64,
    /// Accumulated sharpness product P_k.
    pub p_k: f64,
    /// Closed-form Mermin value.
    pub i_analytic: f64,
    /// Density-matrix Mermin value.
    pub i_bruteforce: f64,
    /// Whether the brute-force value strictly exceeds the local bound 1.
    pub violated: bool,
}

/// A full chain run: the configuration, one row per step, and the verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct ViolationReport {
    /// The configuration that produced this report.
    pub config: ChainConfig,
    /// Per-step outcomes, k ascending.
    pub rows: Vec<ReportRow>,
    /// True iff every row is violated.
    pub all_violated: bool,
}

fn validate_eval_inputs(gammas: &[f64], k: usize) -> Result<()> {
    if k == 0 || k > gammas.len() {
        return Err(Error::InvalidArgument(format!(
            "step index must lie in 1..={}, got {k}",
            gammas.len()
        )));
    }
    for (index, &gamma) in gammas.iter().enumerate() {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma_{} must lie in (0, 1], got {gamma}",
                index + 1
            )));
        }
    }
    Ok(())
}

/// Closed-form step-k Mermin value of the W single chain,
/// P_k(θ)(2cos²θ + (4/3)sin²θ)/2^k + (8/3)sinθcosθ·γ_k/2^k.
pub fn analytic_value_w(theta: f64, gammas: &[f64], k: usize) -> Result<f64> {
    validate_eval_inputs(gammas, k)?;
    if !theta.is_finite() {
        return Err(Error::InvalidArgument("theta must be finite".into()));
    }
    Ok(w_value(theta, gammas, k))
}

/// Closed-form step-k Mermin value of a GHZ chain,
/// N_n·(θ·γ_k + θ·P_k(θ))/2^{k−1}, with N_n the scaling constant of the
/// given chain geometry.
pub fn analytic_value_ghz(
    kind: ChainKind,
    n: usize,
    theta: f64,
    gammas: &[f64],
    k: usize,
) -> Result<f64> {
    let constant = scaling_constant(n, kind)?;
    validate_eval_inputs(gammas, k)?;
    if !theta.is_finite() {
        return Err(Error::InvalidArgument("theta must be finite".into()));
    }
    Ok(ghz_value(constant.value(), theta, gammas, k))
}

fn initial_state(config: &ChainConfig) -> Result<DensityMatrix> {
    match config.kind() {
        ScenarioKind::WSingle3 => DensityMatrix::w(3),
        ScenarioKind::GhzSingle | ScenarioKind::GhzDouble => DensityMatrix::ghz(config.n()),
    }
}

/// Run a configured chain end to end.
///
/// For each step k = 1..K: build the step's observables, evaluate the
/// closed-form and brute-force Mermin values on the current state, then send
/// the state through the step's Lüders channel. The brute-force path holds
/// the full 2^n density matrix, so n is capped at
/// [`BRUTE_FORCE_MAX_PARTIES`].
pub fn run_scenario(config: &ChainConfig) -> Result<ViolationReport> {
    if config.n() > BRUTE_FORCE_MAX_PARTIES {
        return Err(Error::InvalidArgument(format!(
            "brute-force evaluation holds a dense 2^{0} x 2^{0} matrix; \
             n is capped at {BRUTE_FORCE_MAX_PARTIES}",
            config.n()
        )));
    }
    let scaling = match config.kind().chain_kind() {
        Some(kind) => Some(scaling_constant(config.n(), kind)?.value()),
        None => None,
    };
    let chain_length = config.chain_length();
    let mut state = initial_state(config)?;
    let mut rows = Vec::with_capacity(chain_length);
    for k in 1..=chain_length {
        let (assignment, effects) = build_observables(config, k)?;
        let i_analytic = match scaling {
            Some(n_value) => ghz_value(n_value, config.theta(), config.gammas(), k),
            None => w_value(config.theta(), config.gammas(), k),
        };
        let i_bruteforce = mermin_value(&state, &assignment)?;
        rows.push(ReportRow {
            k,
            gamma_k: config.gammas()[k - 1],
            p_k: prefix_product(config.gammas(), k),
            i_analytic,
            i_bruteforce,
            violated: i_bruteforce > 1.0,
        });
        if k < chain_length {
            state = match config.kind() {
                ScenarioKind::GhzDouble => luders_step_double(&state, &effects)?,
                _ => luders_step_single(&state, &effects)?,
            };
        }
    }
    let all_violated = rows.iter().all(|row| row.violated);
    Ok(ViolationReport {
        config: config.clone(),
        rows,
        all_violated,
    })
}

/// Sweep a parameter grid and return the largest closed-form-vs-brute-force
/// residual.
///
/// Grid point i pairs `theta_grid[i]` with `gamma_grid[i]` (each a length-K
/// list); every point contributes K residuals |I_analytic − I_bruteforce|.
pub fn verify_formula_grid(
    kind: ScenarioKind,
    n: usize,
    theta_grid: &[f64],
    gamma_grid: &[Vec<f64>],
    chain_length: usize,
) -> Result<f64> {
    if theta_grid.len() != gamma_grid.len() {
        return Err(Error::InvalidArgument(format!(
            "grid shapes disagree: {} theta values vs {} gamma lists",
            theta_grid.len(),
            gamma_grid.len()
        )));
    }
    let mut max_residual = 0.0f64;
    for (&theta, gammas) in theta_grid.iter().zip(gamma_grid) {
        if gammas.len() != chain_length {
            return Err(Error::InvalidArgument(format!(
                "each gamma list must have length {chain_length}, got {}",
                gammas.len()
            )));
        }
        let config = ChainConfig::new(kind, n, chain_length, theta, 0.01, gammas.clone())?;
        let report = run_scenario(&config)?;
        for row in &report.rows {
            max_residual = max_residual.max((row.i_analytic - row.i_bruteforce).abs());
        }
    }
    Ok(max_residual)
}

/// The largest residual across a report's rows.
pub fn max_report_residual(report: &ViolationReport) -> f64 {
    report
        .rows
        .iter()
        .fold(0.0f64, |acc, row| acc.max((row.i_analytic - row.i_bruteforce).abs()))
}
