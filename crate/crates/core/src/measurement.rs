//! Projective charge, parity, spin, and occupation measurements on Fock states.

use std::collections::BTreeMap;

use crate::error::{precondition, FeqcError, Result};
use crate::fock::FockState;
use crate::matrix::{r, C64};
use crate::mode::{ModeIndex, OccupationKey};

/// Outcomes below this probability are discarded.
pub const BRANCH_PRUNE: f64 = 1e-12;

/// One outcome of a projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<S> {
    pub value: u8,
    pub probability: f64,
    pub state: S,
}

/// Splits `state` by `classify(key)`, Born-rule weights each part, drops
/// parts below [`BRANCH_PRUNE`], and renormalizes what is left.
fn project_by<F>(state: &FockState, classify: F) -> Result<Vec<Outcome<FockState>>>
where
    F: Fn(OccupationKey) -> u8,
{
    let mut parts: BTreeMap<u8, Vec<(OccupationKey, C64)>> = BTreeMap::new();
    for (k, a) in state.amplitudes() {
        parts.entry(classify(k)).or_default().push((k, a));
    }
    let weighted: Vec<(u8, f64, Vec<(OccupationKey, C64)>)> = parts
        .into_iter()
        .map(|(v, entries)| {
            let p = entries.iter().map(|(_, a)| a.norm_sqr()).sum();
            (v, p, entries)
        })
        .filter(|(_, p, _)| *p > BRANCH_PRUNE)
        .collect();
    let total: f64 = weighted.iter().map(|(_, p, _)| p).sum();
    if total <= BRANCH_PRUNE {
        return Err(FeqcError::Numerical("measured state has zero norm".into()));
    }
    weighted
        .into_iter()
        .map(|(value, p, entries)| {
            let projected = FockState::from_amplitudes(state.num_arms(), entries)?;
            Ok(Outcome {
                value,
                probability: p / total,
                state: projected.scaled(r(1.0 / p.sqrt())),
            })
        })
        .collect()
}

/// Electrometer: resolves the charge `q ∈ {0, 1, 2}` of an arm.
pub fn measure_charge(state: &FockState, arm: usize) -> Result<Vec<Outcome<FockState>>> {
    state.check_arm(arm)?;
    project_by(state, |k| k.arm_charge(arm))
}

/// Parity meter: resolves `q mod 2`, keeping charge-0/charge-2 coherence.
pub fn measure_parity(state: &FockState, arm: usize) -> Result<Vec<Outcome<FockState>>> {
    state.check_arm(arm)?;
    project_by(state, |k| k.arm_charge(arm) % 2)
}

/// Spin of the single electron in `arm`: 0 for up, 1 for down.
pub fn measure_spin(state: &FockState, arm: usize) -> Result<Vec<Outcome<FockState>>> {
    state.require_single_occupancy(arm).map_err(|_| {
        precondition(format!(
            "spin measurement needs exactly one electron in arm {arm}"
        ))
    })?;
    let down = ModeIndex::down(arm);
    project_by(state, |k| k.is_occupied(down) as u8)
}

/// Occupation number `n_μ ∈ {0, 1}` of a single mode.
pub fn measure_occupation(state: &FockState, mode: ModeIndex) -> Result<Vec<Outcome<FockState>>> {
    state.check_mode(mode)?;
    project_by(state, |k| k.is_occupied(mode) as u8)
}

/// `⟨P⟩` with `P = 1 - (1 - Q)²`: the probability that the arm holds exactly one electron.
pub fn charge1_expectation(state: &FockState, arm: usize) -> Result<f64> {
    state.check_arm(arm)?;
    Ok(state
        .amplitudes()
        .filter(|(k, _)| k.arm_charge(arm) == 1)
        .map(|(_, a)| a.norm_sqr())
        .sum())
}

/// Probability that every listed arm holds exactly one electron.
pub fn single_occupancy_probability(state: &FockState, arms: &[usize]) -> Result<f64> {
    for arm in arms {
        state.check_arm(*arm)?;
    }
    Ok(state
        .amplitudes()
        .filter(|(k, _)| arms.iter().all(|arm| k.arm_charge(*arm) == 1))
        .map(|(_, a)| a.norm_sqr())
        .sum())
}
