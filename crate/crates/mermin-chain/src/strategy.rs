//! Measurement strategies for the chained scenarios: per-party observables,
//! the scaling constants N_n, the unsharpness sequences γ_k(θ), and the
//! θ-window search that assembles a certified configuration.
//!
//! Three scenario families are supported: the W-state single chain on three
//! parties, the GHZ single chain (one chained party, n ≥ 3), and the GHZ
//! double chain (two chained parties, n ≥ 4). In each, all parties but the
//! chained one(s) measure fixed sharp settings; the chained party measures
//! (sharp, unsharp-γ_k) at step k, and the k-th Mermin value obeys a closed
//! form in θ, γ_k, and the accumulated product P_k = ∏_{j<k}(1+√(1−γ_j²)).

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};

use crate::linalg::Observable;
use crate::luders::ChainStepEffects;
use crate::mermin::ObservableAssignment;
use crate::{Error, Result};

/// Margin by which every analytic Mermin value must clear the local bound
/// for a searched configuration to count as violating.
pub const VIOLATION_MARGIN: f64 = 1e-9;

/// The supported scenario families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    /// W state, three parties, single chain on the third party.
    WSingle3,
    /// GHZ state, n ≥ 3 parties, single chain on the last party.
    GhzSingle,
    /// GHZ state, n ≥ 4 parties, chains on the two last parties.
    GhzDouble,
}

impl ScenarioKind {
    /// Stable machine-readable tag (used by the CLI and serialized output).
    pub fn tag(&self) -> &'static str {
        match self {
            ScenarioKind::WSingle3 => "w-single",
            ScenarioKind::GhzSingle => "ghz-single",
            ScenarioKind::GhzDouble => "ghz-double",
        }
    }

    /// Parse a tag produced by [`tag`](Self::tag).
    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            "w-single" => Ok(ScenarioKind::WSingle3),
            "ghz-single" => Ok(ScenarioKind::GhzSingle),
            "ghz-double" => Ok(ScenarioKind::GhzDouble),
            other => Err(Error::InvalidArgument(format!(
                "unknown scenario tag {other:?}"
            ))),
        }
    }

    /// Check the scenario/party-count pairing.
    pub fn validate_n(&self, n: usize) -> Result<()> {
        let ok = match self {
            ScenarioKind::WSingle3 => n == 3,
            ScenarioKind::GhzSingle => n >= 3,
            ScenarioKind::GhzDouble => n >= 4,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "scenario {} does not admit n = {n}",
                self.tag()
            )))
        }
    }

    /// The chain geometry behind this scenario's scaling constant, if any
    /// (the W scenario has no scaling constant).
    pub fn chain_kind(&self) -> Option<ChainKind> {
        match self {
            ScenarioKind::WSingle3 => None,
            ScenarioKind::GhzSingle => Some(ChainKind::Single),
            ScenarioKind::GhzDouble => Some(ChainKind::Double),
        }
    }
}

/// Chain geometry selector for the GHZ scaling constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChainKind {
    /// One chained party (the last).
    Single,
    /// Two chained parties (the two last).
    Double,
}

/// The scaling constant N_n relating the sharp-limit Mermin value to θ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingConstant {
    n: usize,
    kind: ChainKind,
    value: f64,
}

impl ScalingConstant {
    /// Party count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Chain geometry.
    pub fn kind(&self) -> ChainKind {
        self.kind
    }

    /// The numeric value N_n.
    pub fn value(&self) -> f64 {
        self.value
    }
}

fn parity_sign(exponent: usize) -> f64 {
    if exponent % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// Closed trigonometric evaluation of the same constant — the collapsed form
/// of the coefficient sums — used as an internal cross-check of the mod-4
/// case table.
fn trig_bracket(n: usize, kind: ChainKind) -> f64 {
    let nf = n as f64;
    match kind {
        ChainKind::Single => {
            let factor = libm::pow(SQRT_2, nf - 1.0) / 2.0;
            let angle = (nf - 1.0) * FRAC_PI_4;
            if n % 4 == 3 {
                factor * libm::sin(angle)
            } else {
                factor * libm::cos(angle)
            }
        }
        ChainKind::Double => {
            let factor = libm::pow(SQRT_2, nf) / 4.0;
            let angle = if n % 4 == 2 {
                (nf - 2.0) * FRAC_PI_4
            } else {
                nf * FRAC_PI_4
            };
            factor * libm::cos(angle)
        }
    }
}

/// The scaling constant N_n for the GHZ single or double chain.
///
/// Evaluated from the mod-4 case table and cross-checked against the
/// collapsed trigonometric expression within 1e−12. |N_n| ≥ 1 throughout the
/// admissible range (n ≥ 3 single, n ≥ 4 double).
pub fn scaling_constant(n: usize, kind: ChainKind) -> Result<ScalingConstant> {
    let min_n = match kind {
        ChainKind::Single => 3,
        ChainKind::Double => 4,
    };
    if n < min_n {
        return Err(Error::InvalidArgument(format!(
            "scaling constant needs n >= {min_n} for this chain kind, got {n}"
        )));
    }
    let quarter = n / 4;
    let value = match kind {
        ChainKind::Single => match n % 4 {
            1 | 3 => libm::pow(SQRT_2, (n - 3) as f64) * parity_sign(quarter),
            _ => libm::pow(SQRT_2, (n - 4) as f64) * parity_sign(quarter),
        },
        ChainKind::Double => match n % 4 {
            0 | 2 => libm::pow(SQRT_2, (n - 4) as f64) * parity_sign(quarter),
            1 => libm::pow(SQRT_2, (n - 5) as f64) * parity_sign(quarter),
            _ => libm::pow(SQRT_2, (n - 5) as f64) * parity_sign(quarter + 1),
        },
    };
    let bracket = trig_bracket(n, kind);
    assert!(
        (value - bracket).abs() <= 1e-12,
        "case table and trigonometric form disagree: {value} vs {bracket}"
    );
    assert!(value.abs() >= 1.0, "|N_n| must be at least 1, got {value}");
    Ok(ScalingConstant { n, kind, value })
}

/// A complete chained-scenario configuration: which family, how many
/// parties, the chain length K, the tilt θ, the slack ε, and the per-step
/// unsharpness values γ_1..γ_K.
///
/// Construction validates what evaluation requires: scenario/n pairing,
/// matching lengths, γ_k ∈ (0, 1], finite θ within the scenario's evaluable
/// window. The stricter feasibility conditions (γ strictly increasing and
/// below 1, θ inside the open window) are the business of the sequence
/// constructors and [`find_theta_window`], not of this type: boundary
/// configurations such as a single sharp measurement (γ = 1) are legitimate
/// to evaluate.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    kind: ScenarioKind,
    n: usize,
    chain_length: usize,
    theta: f64,
    epsilon: f64,
    gammas: Vec<f64>,
}

impl ChainConfig {
    /// Validating constructor; see the type-level rules.
    pub fn new(
        kind: ScenarioKind,
        n: usize,
        chain_length: usize,
        theta: f64,
        epsilon: f64,
        gammas: Vec<f64>,
    ) -> Result<Self> {
        kind.validate_n(n)?;
        if chain_length == 0 {
            return Err(Error::InvalidArgument("chain length K must be >= 1".into()));
        }
        if gammas.len() != chain_length {
            return Err(Error::InvalidArgument(format!(
                "expected {chain_length} gamma values, got {}",
                gammas.len()
            )));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive and finite, got {epsilon}"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidArgument("theta must be finite".into()));
        }
        match kind {
            ScenarioKind::WSingle3 => {
                if !(0.0..=FRAC_PI_2).contains(&theta) {
                    return Err(Error::InvalidArgument(format!(
                        "W-scenario theta must lie in [0, pi/2], got {theta}"
                    )));
                }
            }
            ScenarioKind::GhzSingle | ScenarioKind::GhzDouble => {
                if theta.abs() > 1.0 {
                    return Err(Error::InvalidArgument(format!(
                        "GHZ-scenario theta must satisfy |theta| <= 1, got {theta}"
                    )));
                }
            }
        }
        for (index, &gamma) in gammas.iter().enumerate() {
            if !(gamma > 0.0 && gamma <= 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "gamma_{} must lie in (0, 1], got {gamma}",
                    index + 1
                )));
            }
        }
        Ok(ChainConfig {
            kind,
            n,
            chain_length,
            theta,
            epsilon,
            gammas,
        })
    }

    /// Scenario family.
    pub fn kind(&self) -> ScenarioKind {
        self.kind
    }

    /// Party count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Chain length K.
    pub fn chain_length(&self) -> usize {
        self.chain_length
    }

    /// Tilt parameter θ.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Violation slack ε.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Unsharpness values γ_1..γ_K.
    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }
}

/// P_k = ∏_{j=1}^{k−1} (1 + √(1−γ_j²)), assuming the entries are valid.
pub(crate) fn prefix_product(gammas: &[f64], k: usize) -> f64 {
    gammas[..k - 1]
        .iter()
        .map(|&gamma| 1.0 + libm::sqrt(1.0 - gamma * gamma))
        .product()
}

/// The accumulated sharpness product P_k = ∏_{j=1}^{k−1}(1 + √(1−γ_j²)).
///
/// P_1 = 1 (empty product); k may run to len+1, giving the product over the
/// whole list. Every listed γ must lie strictly inside (0, 1).
pub fn derive_p(gammas: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > gammas.len() + 1 {
        return Err(Error::InvalidArgument(format!(
            "step index must lie in 1..={}, got {k}",
            gammas.len() + 1
        )));
    }
    for (index, &gamma) in gammas.iter().enumerate() {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma_{} must lie in (0, 1), got {gamma}",
                index + 1
            )));
        }
    }
    Ok(prefix_product(gammas, k))
}

/// Analytic step-k Mermin value for the W single chain (validity of the
/// inputs is the caller's business).
pub(crate) fn w_value(theta: f64, gammas: &[f64], k: usize) -> f64 {
    let p_k = prefix_product(gammas, k);
    let (sin, cos) = (libm::sin(theta), libm::cos(theta));
    let scale = libm::exp2(k as f64);
    (p_k * (2.0 * cos * cos + 4.0 / 3.0 * sin * sin)
        + 8.0 / 3.0 * sin * cos * gammas[k - 1])
        / scale
}

/// Analytic step-k Mermin value for a GHZ chain with scaling constant `n_value`.
pub(crate) fn ghz_value(n_value: f64, theta: f64, gammas: &[f64], k: usize) -> f64 {
    let p_k = prefix_product(gammas, k);
    n_value * (theta * gammas[k - 1] + theta * p_k) / libm::exp2((k - 1) as f64)
}

/// Outcome of a γ-sequence construction: the K values, or the judgment that
/// no step sequence fits inside (0, 1) for these parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaSequence {
    /// All K values lie in (0, 1).
    Feasible(Vec<f64>),
    /// Some step would need γ outside (0, 1).
    Infeasible,
}

impl GammaSequence {
    /// The values if feasible.
    pub fn feasible(self) -> Option<Vec<f64>> {
        match self {
            GammaSequence::Feasible(gammas) => Some(gammas),
            GammaSequence::Infeasible => None,
        }
    }
}

fn validate_common(epsilon: f64, chain_length: usize) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must be positive and finite, got {epsilon}"
        )));
    }
    if chain_length == 0 {
        return Err(Error::InvalidArgument("chain length K must be >= 1".into()));
    }
    Ok(())
}

/// The W-scenario unsharpness sequence: each γ_k is placed a factor (1+ε)
/// above the value that would make step k sit exactly on the local bound,
///
/// ```text
/// γ_k = (1+ε) · (2^k − P_k(θ)(2 − (2/3)sin²θ)) / ((8/3)sinθcosθ),
/// ```
///
/// computed step by step (P_k feeds on the earlier γ values). Any γ_k
/// outside (0, 1) makes the whole chain [`GammaSequence::Infeasible`].
pub fn gamma_sequence_w(theta: f64, epsilon: f64, chain_length: usize) -> Result<GammaSequence> {
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::InvalidArgument(format!(
            "theta must lie in (0, pi/2), got {theta}"
        )));
    }
    validate_common(epsilon, chain_length)?;
    let (sin, cos) = (libm::sin(theta), libm::cos(theta));
    let bound_term = 2.0 - 2.0 / 3.0 * sin * sin;
    let slope = 8.0 / 3.0 * sin * cos;
    let mut gammas = Vec::with_capacity(chain_length);
    let mut p_k = 1.0;
    for k in 1..=chain_length {
        let gamma = (1.0 + epsilon) * (libm::exp2(k as f64) - p_k * bound_term) / slope;
        if !(gamma > 0.0 && gamma < 1.0) {
            return Ok(GammaSequence::Infeasible);
        }
        gammas.push(gamma);
        p_k *= 1.0 + libm::sqrt(1.0 - gamma * gamma);
    }
    Ok(GammaSequence::Feasible(gammas))
}

/// The GHZ-scenario unsharpness sequence for a scaling constant N with
/// |N| ≥ 1 and a tilt θ of matching sign (θN > 0, |θ| < 1):
///
/// ```text
/// γ_k = (1+ε) · (2^{k−1}/(θN) − P_k(θ)),
/// ```
///
/// again step by step, with any out-of-range γ_k making the chain
/// [`GammaSequence::Infeasible`].
pub fn gamma_sequence_lemma(
    n_value: f64,
    theta: f64,
    epsilon: f64,
    chain_length: usize,
) -> Result<GammaSequence> {
    if !(n_value.abs() >= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "the scaling constant must satisfy |N| >= 1, got {n_value}"
        )));
    }
    if !(theta * n_value > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "theta and N must have the same sign, got theta = {theta}, N = {n_value}"
        )));
    }
    if theta.abs() >= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "theta must satisfy |theta| < 1, got {theta}"
        )));
    }
    validate_common(epsilon, chain_length)?;
    let inverse = 1.0 / (theta * n_value);
    let mut gammas = Vec::with_capacity(chain_length);
    let mut p_k = 1.0;
    for k in 1..=chain_length {
        let gamma = (1.0 + epsilon) * (libm::exp2((k - 1) as f64) * inverse - p_k);
        if !(gamma > 0.0 && gamma < 1.0) {
            return Ok(GammaSequence::Infeasible);
        }
        gammas.push(gamma);
        p_k *= 1.0 + libm::sqrt(1.0 - gamma * gamma);
    }
    Ok(GammaSequence::Feasible(gammas))
}

/// The per-party observables and the chained-party Lüders effects for step k
/// of a configured scenario.
///
/// Party 1 is the leftmost tensor factor. The mod-4 branch of the next-to-last
/// party is selected from n and the scenario kind; the chained party (or pair)
/// measures (sharp, unsharp-γ_k).
pub fn build_observables(
    config: &ChainConfig,
    k: usize,
) -> Result<(ObservableAssignment, ChainStepEffects)> {
    if k == 0 || k > config.chain_length() {
        return Err(Error::InvalidArgument(format!(
            "step index must lie in 1..={}, got {k}",
            config.chain_length()
        )));
    }
    let n = config.n();
    let theta = config.theta();
    let gamma_k = config.gammas()[k - 1];
    let sigma = |gamma: f64, index: usize| Observable::pauli_multiple(gamma, index);
    match config.kind() {
        ScenarioKind::WSingle3 => {
            let (sin, cos) = (libm::sin(theta), libm::cos(theta));
            let tilted = |sign: f64| Observable::pauli_combination(sin, 0.0, sign * cos);
            let chained = (sigma(1.0, 3)?, sigma(gamma_k, 1)?);
            let pairs = alloc::vec![
                (tilted(1.0)?, tilted(-1.0)?),
                (tilted(1.0)?, tilted(-1.0)?),
                chained.clone(),
            ];
            let effects = ChainStepEffects::single(3, chained)?;
            Ok((ObservableAssignment::new(pairs)?, effects))
        }
        ScenarioKind::GhzSingle => {
            let mut pairs = Vec::with_capacity(n);
            for _ in 1..=n - 2 {
                pairs.push((sigma(1.0, 1)?, sigma(1.0, 2)?));
            }
            let tilted_pair = if n % 4 == 3 {
                (sigma(-theta, 2)?, sigma(theta, 1)?)
            } else {
                (sigma(theta, 1)?, sigma(theta, 2)?)
            };
            pairs.push(tilted_pair);
            let chained = (sigma(1.0, 1)?, sigma(gamma_k, 2)?);
            pairs.push(chained.clone());
            let effects = ChainStepEffects::single(n, chained)?;
            Ok((ObservableAssignment::new(pairs)?, effects))
        }
        ScenarioKind::GhzDouble => {
            let mut pairs = Vec::with_capacity(n);
            pairs.push((sigma(theta, 1)?, sigma(theta, 2)?));
            for _ in 2..=n - 2 {
                pairs.push((sigma(1.0, 1)?, sigma(1.0, 2)?));
            }
            let sharp_chained = if n % 4 == 2 {
                (sigma(-1.0, 2)?, sigma(1.0, 2)?)
            } else {
                (sigma(1.0, 2)?, sigma(1.0, 2)?)
            };
            pairs.push(sharp_chained.clone());
            let chained = (sigma(1.0, 1)?, sigma(gamma_k, 2)?);
            pairs.push(chained.clone());
            let effects = ChainStepEffects::double(n - 1, sharp_chained, chained)?;
            Ok((ObservableAssignment::new(pairs)?, effects))
        }
    }
}

/// Scan θ toward the scenario's accumulation point and return the first
/// configuration whose γ sequence is feasible and whose K analytic Mermin
/// values all clear 1 + [`VIOLATION_MARGIN`]; `None` when the grid (60
/// geometric refinements) is exhausted.
///
/// The W scenario approaches θ → 0⁺ on the grid θ_m = 0.5·(½)^m. The GHZ
/// scenarios approach θ → 1/N_n, trying the inward point (toward 0) before
/// the outward one at each refinement; for |N_n| = 1 only the inward side
/// exists, the outward points lying outside the admissible |θ| < 1.
pub fn find_theta_window(
    kind: ScenarioKind,
    n: usize,
    chain_length: usize,
    epsilon: f64,
) -> Result<Option<ChainConfig>> {
    kind.validate_n(n)?;
    validate_common(epsilon, chain_length)?;
    let admit = |theta: f64, gammas: Vec<f64>| -> Result<Option<ChainConfig>> {
        Ok(Some(ChainConfig::new(
            kind,
            n,
            chain_length,
            theta,
            epsilon,
            gammas,
        )?))
    };
    match kind {
        ScenarioKind::WSingle3 => {
            for refinement in 0..=60u32 {
                let theta = 0.5 * libm::exp2(-f64::from(refinement));
                if let Some(gammas) =
                    gamma_sequence_w(theta, epsilon, chain_length)?.feasible()
                {
                    let all_violated = (1..=chain_length)
                        .all(|k| w_value(theta, &gammas, k) > 1.0 + VIOLATION_MARGIN);
                    if all_violated {
                        return admit(theta, gammas);
                    }
                }
            }
            Ok(None)
        }
        ScenarioKind::GhzSingle | ScenarioKind::GhzDouble => {
            let chain = kind.chain_kind().expect("GHZ scenarios carry a chain kind");
            let n_value = scaling_constant(n, chain)?.value();
            let target = 1.0 / n_value;
            let radius = 0.5 * target.abs();
            let one_sided = n_value.abs() == 1.0;
            for refinement in 0..=60u32 {
                let offset = radius * libm::exp2(-f64::from(refinement));
                let inward = target - target.signum() * offset;
                let outward = target + target.signum() * offset;
                let candidates = if one_sided {
                    [Some(inward), None]
                } else {
                    [Some(inward), Some(outward)]
                };
                for theta in candidates.into_iter().flatten() {
                    if theta.abs() >= 1.0 || theta * n_value <= 0.0 {
                        continue;
                    }
                    if let Some(gammas) =
                        gamma_sequence_lemma(n_value, theta, epsilon, chain_length)?.feasible()
                    {
                        let all_violated = (1..=chain_length).all(|k| {
                            ghz_value(n_value, theta, &gammas, k) > 1.0 + VIOLATION_MARGIN
                        });
                        if all_violated {
                            return admit(theta, gammas);
                        }
                    }
                }
            }
            Ok(None)
        }
    }
}

/// Human-readable scenario list for diagnostics.
pub fn scenario_tags() -> [&'static str; 3] {
    [
        ScenarioKind::WSingle3.tag(),
        ScenarioKind::GhzSingle.tag(),
        ScenarioKind::GhzDouble.tag(),
    ]
}
