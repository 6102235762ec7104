//! Sequential-measurement channels built from the Lüders rule.
//!
//! When a party measures the unsharp observable M_x with POVM effects
//! M_{±|x} = (I ± M_x)/2 and the outcome is not read out, the state update is
//! ρ ↦ Σ_a √M_{a|x} ρ √M_{a|x}. Averaging over the party's two inputs with
//! weight ½ each gives the channel applied between chain steps:
//!
//! ```text
//! ρ^(k+1) = ½ Σ_{a,x} (I ⊗ … ⊗ √M_{a|x} ⊗ … ⊗ I) ρ^(k) (same),
//! ```
//!
//! acting on the chained slot only. The double-chain variant dresses two
//! adjacent slots simultaneously (weight ¼ over the joint inputs), and
//! factorizes into the two single-slot channels because they act on disjoint
//! tensor factors.

use alloc::format;
use alloc::vec::Vec;

use crate::linalg::{
    conjugate_slot, sqrt_effect, sqrt_psd, ComplexMatrix, DensityMatrix, Observable, Sign,
    PSD_TOL,
};
use crate::{Error, Result};

/// Effects of one chain step: one chained slot (single chain) or two adjacent
/// slots (double chain), each with its dichotomic observable pair (M_0, M_1).
///
/// Construction validates that every effect (I ± M_x)/2 is PSD within
/// [`PSD_TOL`] and precomputes the four operator square roots per slot.
#[derive(Debug, Clone)]
pub struct ChainStepEffects {
    slots: Vec<usize>,
    pairs: Vec<(Observable, Observable)>,
    /// Per slot: [√M_{+|0}, √M_{−|0}, √M_{+|1}, √M_{−|1}].
    sqrt_effects: Vec<[ComplexMatrix; 4]>,
}

/// √((I + sign·M)/2) for one observable, by the closed form when M = γσ and
/// the general PSD square root otherwise.
fn sqrt_effect_pair(observable: &Observable) -> Result<[ComplexMatrix; 2]> {
    if let Some((gamma, index)) = observable.as_pauli_multiple() {
        // A negative multiple folds into the opposite-sign effect: I + γσ =
        // I − |γ|σ for γ < 0.
        let (magnitude, plus, minus) = if gamma < 0.0 {
            (-gamma, Sign::Minus, Sign::Plus)
        } else {
            (gamma, Sign::Plus, Sign::Minus)
        };
        Ok([
            sqrt_effect(magnitude, index, plus)?,
            sqrt_effect(magnitude, index, minus)?,
        ])
    } else {
        let identity = ComplexMatrix::identity(2);
        let effect_plus = identity.add(observable.matrix())?.scale_re(0.5);
        let effect_minus = identity.sub(observable.matrix())?.scale_re(0.5);
        Ok([sqrt_psd(&effect_plus)?, sqrt_psd(&effect_minus)?])
    }
}

fn validate_effects(observable: &Observable) -> Result<()> {
    let (low, high) = observable.spectrum();
    // Min eigenvalues of (I + M)/2 and (I − M)/2 respectively.
    let plus_min = (1.0 + low) / 2.0;
    let minus_min = (1.0 - high) / 2.0;
    let worst = plus_min.min(minus_min);
    if worst < -PSD_TOL {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: worst,
        });
    }
    Ok(())
}

impl ChainStepEffects {
    /// One measuring slot (single chain).
    pub fn single(slot: usize, pair: (Observable, Observable)) -> Result<Self> {
        if slot == 0 {
            return Err(Error::InvalidArgument("party slots are 1-indexed".into()));
        }
        validate_effects(&pair.0)?;
        validate_effects(&pair.1)?;
        let sqrt_effects = Self::slot_roots(&pair)?;
        Ok(ChainStepEffects {
            slots: alloc::vec![slot],
            pairs: alloc::vec![pair],
            sqrt_effects: alloc::vec![sqrt_effects],
        })
    }

    /// Two adjacent measuring slots (double chain): `lower_slot` and
    /// `lower_slot + 1`, with their observable pairs in that order.
    pub fn double(
        lower_slot: usize,
        lower_pair: (Observable, Observable),
        upper_pair: (Observable, Observable),
    ) -> Result<Self> {
        if lower_slot == 0 {
            return Err(Error::InvalidArgument("party slots are 1-indexed".into()));
        }
        for pair in [&lower_pair, &upper_pair] {
            validate_effects(&pair.0)?;
            validate_effects(&pair.1)?;
        }
        let lower_roots = Self::slot_roots(&lower_pair)?;
        let upper_roots = Self::slot_roots(&upper_pair)?;
        Ok(ChainStepEffects {
            slots: alloc::vec![lower_slot, lower_slot + 1],
            pairs: alloc::vec![lower_pair, upper_pair],
            sqrt_effects: alloc::vec![lower_roots, upper_roots],
        })
    }

    fn slot_roots(pair: &(Observable, Observable)) -> Result<[ComplexMatrix; 4]> {
        let [p0, m0] = sqrt_effect_pair(&pair.0)?;
        let [p1, m1] = sqrt_effect_pair(&pair.1)?;
        Ok([p0, m0, p1, m1])
    }

    /// The measuring slots, ascending (one or two entries).
    pub fn slots(&self) -> &[usize] {
        &self.slots
    }

    /// The observable pairs, ordered as [`slots`](Self::slots).
    pub fn pairs(&self) -> &[(Observable, Observable)] {
        &self.pairs
    }
}

/// ½ Σ_{a,x} √M_{a|x} · m · √M_{a|x} on one slot, at the raw-matrix level.
fn slot_channel(
    m: &ComplexMatrix,
    roots: &[ComplexMatrix; 4],
    slot: usize,
    n_parties: usize,
) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(m.dim());
    for root in roots {
        if root.max_abs_diff(&ComplexMatrix::zeros(2)) == 0.0 {
            continue;
        }
        out = out
            .add(&conjugate_slot(m, root, slot, n_parties))
            .expect("dims agree by construction");
    }
    out.scale_re(0.5)
}

fn finish_state(matrix: ComplexMatrix, n_parties: usize) -> Result<DensityMatrix> {
    DensityMatrix::new(n_parties, matrix.symmetrize())
}

/// One single-chain step: the input-averaged Lüders channel on the last slot.
///
/// The step's slot must equal the party count of `rho` (the chained party
/// always sits at the end of the tensor order).
pub fn luders_step_single(rho: &DensityMatrix, effects: &ChainStepEffects) -> Result<DensityMatrix> {
    let n = rho.n_parties();
    if effects.slots() != [n] {
        return Err(Error::InvalidArgument(format!(
            "single-chain step must act on slot {n}, got {:?}",
            effects.slots()
        )));
    }
    let next = slot_channel(rho.matrix(), &effects.sqrt_effects[0], n, n);
    finish_state(next, n)
}

/// One double-chain step: the jointly input-averaged Lüders channel on the
/// two last slots, ¼ Σ over both parties' (a, x) of the doubly-dressed
/// conjugation.
///
/// The step's slots must equal (n−1, n) for the party count n of `rho`.
pub fn luders_step_double(rho: &DensityMatrix, effects: &ChainStepEffects) -> Result<DensityMatrix> {
    let n = rho.n_parties();
    if n < 2 || effects.slots() != [n - 1, n] {
        return Err(Error::InvalidArgument(format!(
            "double-chain step must act on slots {:?}, got {:?}",
            [n.saturating_sub(1), n],
            effects.slots()
        )));
    }
    // The 16-term joint sum regroups exactly into the two slot channels,
    // since the dressing operators act on disjoint factors.
    let after_lower = slot_channel(rho.matrix(), &effects.sqrt_effects[0], n - 1, n);
    let next = slot_channel(&after_lower, &effects.sqrt_effects[1], n, n);
    finish_state(next, n)
}

/// Run a chain of steps and collect every intermediate state:
/// [ρ^(1) = `rho0`, ρ^(2), …]: one extra state per step.
pub fn evolve_chain(rho0: &DensityMatrix, steps: &[ChainStepEffects]) -> Result<Vec<DensityMatrix>> {
    let mut states = Vec::with_capacity(steps.len() + 1);
    states.push(rho0.clone());
    for step in steps {
        let current = states.last().expect("non-empty by construction");
        let next = match step.slots().len() {
            1 => luders_step_single(current, step)?,
            2 => luders_step_double(current, step)?,
            _ => unreachable!("constructors admit one or two slots only"),
        };
        states.push(next);
    }
    Ok(states)
}
