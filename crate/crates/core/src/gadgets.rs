//! Charge-detection gadgets: the Bell-state analyzer, the parity encoder, the
//! deterministic CNOT, teleportation, and the Hadamard-PBS-Hadamard block
//! whose output the CNOT corrections are read from.
//!
//! All gadgets act in place on caller-chosen arms. Polarizing beam splitters
//! route between the same two arms they act on, so the "middle" arm of a PBS
//! pair is the first input arm.

use serde::Serialize;

use crate::circuit::{Axis, Circuit, Gate, MeasureKind, Spinor};
use crate::error::{invalid, precondition, Result};
use crate::exec::Outcomes;
use crate::fock::FockState;
use crate::matrix::{self, r, CMatrix, C64};
use crate::measurement::{self, Outcome};
use crate::mode::ModeIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Detector {
    Electrometer,
    ParityMeter,
}

impl Detector {
    fn measure(self, state: &FockState, arm: usize) -> Result<Vec<Outcome<FockState>>> {
        match self {
            Detector::Electrometer => measurement::measure_charge(state, arm),
            Detector::ParityMeter => measurement::measure_parity(state, arm),
        }
    }

    fn kind(self, arm: usize) -> MeasureKind {
        match self {
            Detector::Electrometer => MeasureKind::Charge(arm),
            Detector::ParityMeter => MeasureKind::Parity(arm),
        }
    }

    pub fn label(self, stage: usize) -> String {
        match self {
            Detector::Electrometer => format!("q{stage}"),
            Detector::ParityMeter => format!("p{stage}"),
        }
    }
}

/// Single-spin Pauli corrections. `XZ` applies `σz` first, then `σx`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Pauli {
    I,
    X,
    Z,
    XZ,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Z, Pauli::XZ];

    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::I => matrix::identity(2),
            Pauli::X => matrix::sigma_x(),
            Pauli::Z => matrix::sigma_z(),
            Pauli::XZ => matrix::sigma_x() * matrix::sigma_z(),
        }
    }

    pub fn apply(self, state: &FockState, arm: usize) -> Result<FockState> {
        match self {
            Pauli::I => Ok(state.clone()),
            p => state.spin_rotation(arm, &p.matrix()),
        }
    }
}

/// `B = p1 + p1 p2 + p1 p2 p3`.
pub fn bell_value(p1: u8, p2: u8, p3: u8) -> u8 {
    p1 + p1 * p2 + p1 * p2 * p3
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BellOutcome {
    pub b: u8,
    /// Detector parities; stages skipped after `B` is fixed are `None`.
    pub parities: [Option<u8>; 3],
    /// Raw detector readings (charges for an electrometer, parities otherwise).
    pub readings: [Option<u8>; 3],
}

#[derive(Debug, Clone)]
pub struct BellBranch {
    pub outcome: BellOutcome,
    pub probability: f64,
    pub post_state: FockState,
}

fn require_pair(state: &FockState, arm_a: usize, arm_b: usize) -> Result<()> {
    if arm_a == arm_b {
        return Err(invalid(format!("arm {arm_a} used twice")));
    }
    state.require_single_occupancy(arm_a)?;
    state.require_single_occupancy(arm_b)
}

/// Destructive Bell measurement of the spins in `arm_a` and `arm_b`.
///
/// Stage 1 is a beam splitter and a detector on `arm_a`; bunching (even
/// parity) identifies the singlet. Otherwise `σz` on `arm_b` maps `|Ψ1⟩` to the
/// singlet for stage 2, and then `σx` maps `|Ψ2⟩` to the singlet for stage 3.
pub fn bell_analyzer(state: &FockState, arm_a: usize, arm_b: usize, detector: Detector) -> Result<Vec<BellBranch>> {
    require_pair(state, arm_a, arm_b)?;
    let mut out = Vec::new();
    bell_stage(state.clone(), arm_a, arm_b, detector, 0, [None; 3], 1.0, &mut out)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn bell_stage(
    mut state: FockState,
    arm_a: usize,
    arm_b: usize,
    detector: Detector,
    stage: usize,
    readings: [Option<u8>; 3],
    prob: f64,
    out: &mut Vec<BellBranch>,
) -> Result<()> {
    match stage {
        1 => state = state.spin_rotation(arm_b, &matrix::sigma_z())?,
        2 => state = state.spin_rotation(arm_b, &matrix::sigma_x())?,
        _ => {}
    }
    state = state.beam_splitter(arm_a, arm_b)?;
    for o in detector.measure(&state, arm_a)? {
        let mut readings = readings;
        readings[stage] = Some(o.value);
        let p = o.value % 2;
        if p == 0 || stage == 2 {
            let parities = readings.map(|x| x.map(|v| v % 2));
            let bit = |i: usize| parities[i].unwrap_or(0);
            out.push(BellBranch {
                outcome: BellOutcome {
                    b: bell_value(bit(0), bit(1), bit(2)),
                    parities,
                    readings,
                },
                probability: prob * o.probability,
                post_state: o.state,
            });
        } else {
            bell_stage(o.state, arm_a, arm_b, detector, stage + 1, readings, prob * o.probability, out)?;
        }
    }
    Ok(())
}

/// Always-run analyzer on arms 1 and 2 as a circuit, optionally preceded by
/// a Bell-state preparation.
pub fn bell_analyzer_circuit(input: Option<u8>, detector: Detector) -> Circuit {
    let mut c = Circuit::new(2);
    if let Some(k) = input {
        c = c.bell(k, 1, 2);
    }
    c.bs(1, 2)
        .measure(&detector.label(1), detector.kind(1))
        .rot(2, Axis::Z)
        .bs(1, 2)
        .measure(&detector.label(2), detector.kind(1))
        .rot(2, Axis::X)
        .bs(1, 2)
        .measure(&detector.label(3), detector.kind(1))
}

/// `B` from the outcomes of [`bell_analyzer_circuit`].
pub fn bell_value_from_outcomes(outcomes: &Outcomes, detector: Detector) -> Option<u8> {
    let p = |i| outcomes.get(&detector.label(i)).map(|v| v % 2);
    Some(bell_value(p(1)?, p(2)?, p(3)?))
}

#[derive(Debug, Clone)]
pub struct EncoderBranch {
    pub p: u8,
    pub probability: f64,
    pub corrected: bool,
    pub state: FockState,
}

/// PBS, parity meter on `arm_a`, PBS. With `apply_correction`, the even-parity
/// branch gets `σx` on `arm_b`, so a qubit in `arm_a` and a `(|↑⟩+|↓⟩)/√2`
/// ancilla in `arm_b` leave as `α|↑↑⟩ + β|↓↓⟩` in both branches.
pub fn encoder(state: &FockState, arm_a: usize, arm_b: usize, apply_correction: bool) -> Result<Vec<EncoderBranch>> {
    require_pair(state, arm_a, arm_b)?;
    let mid = state.polarizing_beam_splitter(arm_a, arm_b)?;
    measurement::measure_parity(&mid, arm_a)?
        .into_iter()
        .map(|o| {
            let mut out = o.state.polarizing_beam_splitter(arm_a, arm_b)?;
            let corrected = apply_correction && o.value == 0;
            if corrected {
                out = out.spin_rotation(arm_b, &matrix::sigma_x())?;
            }
            Ok(EncoderBranch {
                p: o.value,
                probability: o.probability,
                corrected,
                state: out,
            })
        })
        .collect()
}

/// Nondestructive spin-parity check: `p = 1` for aligned spins, `p = 0` for opposite.
pub fn spin_parity_readout(state: &FockState, arm_a: usize, arm_b: usize) -> Result<Vec<(u8, f64, FockState)>> {
    Ok(encoder(state, arm_a, arm_b, false)?
        .into_iter()
        .map(|b| (b.p, b.probability, b.state))
        .collect())
}

/// Encoder on arms 1 (qubit) and 2 (ancilla) as a circuit.
pub fn encoder_circuit(alpha: C64, beta: C64) -> Circuit {
    Circuit::new(2)
        .electron(1, Spinor::Custom(alpha, beta))
        .electron(2, Spinor::Plus)
        .pbs(1, 2)
        .measure("p", MeasureKind::Parity(1))
        .pbs(1, 2)
        .when("p", 0, Gate::Rot(2, Axis::X))
}

#[derive(Debug, Clone)]
pub struct HadamardPbsBranch {
    pub p2: u8,
    pub z: u8,
    pub probability: f64,
    pub state: FockState,
}

/// Hadamards on both arms, PBS pair with a parity meter on `upper`, Hadamards
/// again, then the spin of `upper` is read out as `z`.
pub fn hadamard_pbs_gadget(state: &FockState, upper: usize, lower: usize) -> Result<Vec<HadamardPbsBranch>> {
    require_pair(state, upper, lower)?;
    let h = matrix::hadamard();
    let entered = state.spin_rotation(upper, &h)?.spin_rotation(lower, &h)?;
    let mid = entered.polarizing_beam_splitter(upper, lower)?;
    let mut out = Vec::new();
    for par in measurement::measure_parity(&mid, upper)? {
        let exited = par
            .state
            .polarizing_beam_splitter(upper, lower)?
            .spin_rotation(upper, &h)?
            .spin_rotation(lower, &h)?;
        for spin in measurement::measure_spin(&exited, upper)? {
            out.push(HadamardPbsBranch {
                p2: par.value,
                z: spin.value,
                probability: par.probability * spin.probability,
                state: spin.state,
            });
        }
    }
    Ok(out)
}

/// Ancilla bit after the control-side PBS pair: `a = x + p1 + 1 (mod 2)`.
pub fn control_branch_formula(x: u8, p1: u8) -> u8 {
    (x + p1 + 1) % 2
}

/// Closed form of the Hadamard-PBS block on basis input `|a⟩|y⟩`:
/// the lower arm leaves as `sign · |a + y + z⟩`.
pub fn hadamard_pbs_formula(a: u8, y: u8, p2: u8, z: u8) -> (u8, f64) {
    let bit = (a + y + z) % 2;
    let sign = if ((p2 + 1) * (a + z)) % 2 == 0 { 1.0 } else { -1.0 };
    (bit, sign)
}

fn two_spin_basis(num_arms: usize, upper: usize, lower: usize, s: u8, t: u8) -> Result<FockState> {
    let mut coeffs = [C64::default(); 4];
    coeffs[(2 * s + t) as usize] = r(1.0);
    FockState::vacuum(num_arms)?.prepare_two_spin(upper, lower, coeffs)
}

#[derive(Debug, Clone, Serialize)]
pub struct AppendixRow {
    pub a: u8,
    pub y: u8,
    pub p2: u8,
    pub z: u8,
    pub expected_bit: u8,
    pub expected_sign: i8,
    pub simulated_bit: Option<u8>,
    /// Simulated amplitude of `|z⟩|bit⟩`, scaled by 2 so the ideal magnitude is 1.
    pub simulated_re: f64,
    pub simulated_im: f64,
    pub probability: f64,
    #[serde(rename = "match")]
    pub matched: bool,
}

/// Tolerance used when comparing simulated amplitudes with the closed form.
pub const APPENDIX_TOL: f64 = 1e-9;

/// Runs the Hadamard-PBS block on all sixteen `(a, y, p2, z)` combinations.
pub fn appendix_table() -> Result<Vec<AppendixRow>> {
    let (upper, lower) = (1, 2);
    let mut rows = Vec::with_capacity(16);
    for a in 0..2u8 {
        for y in 0..2u8 {
            let input = two_spin_basis(2, upper, lower, a, y)?;
            let branches = hadamard_pbs_gadget(&input, upper, lower)?;
            for p2 in 0..2u8 {
                for z in 0..2u8 {
                    let (expected_bit, sign) = hadamard_pbs_formula(a, y, p2, z);
                    let branch = branches.iter().find(|b| b.p2 == p2 && b.z == z);
                    let mut row = AppendixRow {
                        a,
                        y,
                        p2,
                        z,
                        expected_bit,
                        expected_sign: sign as i8,
                        simulated_bit: None,
                        simulated_re: 0.0,
                        simulated_im: 0.0,
                        probability: 0.0,
                        matched: false,
                    };
                    if let Some(b) = branch {
                        let raw = b.state.scaled(r(b.probability.sqrt()));
                        let amps = (0..2u8)
                            .map(|t| two_spin_basis(2, upper, lower, z, t)?.inner(&raw))
                            .collect::<Result<Vec<_>>>()?;
                        let present: Vec<u8> = (0..2u8).filter(|&t| amps[t as usize].norm() > APPENDIX_TOL).collect();
                        row.probability = b.probability;
                        if let [t] = present[..] {
                            let amp = amps[t as usize] * 2.0;
                            row.simulated_bit = Some(t);
                            row.simulated_re = amp.re;
                            row.simulated_im = amp.im;
                            row.matched = t == expected_bit && (amp - r(sign)).norm() <= APPENDIX_TOL;
                        }
                    }
                    rows.push(row);
                }
            }
        }
    }
    Ok(rows)
}

/// Largest deviation between the simulated Hadamard-PBS branches on the
/// superposition `Σ coeffs[2a+y] |a⟩|y⟩` and the closed form applied linearly.
/// Phases are compared absolutely, not up to a global phase.
pub fn appendix_superposition_error(coeffs: [C64; 4]) -> Result<f64> {
    let (upper, lower) = (1, 2);
    let input = FockState::vacuum(2)?.prepare_two_spin(upper, lower, coeffs)?;
    let norm = coeffs.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let branches = hadamard_pbs_gadget(&input, upper, lower)?;
    let mut worst = 0.0f64;
    for p2 in 0..2u8 {
        for z in 0..2u8 {
            let mut predicted = [C64::default(); 2];
            for a in 0..2u8 {
                for y in 0..2u8 {
                    let (bit, sign) = hadamard_pbs_formula(a, y, p2, z);
                    predicted[bit as usize] += coeffs[(2 * a + y) as usize] / norm * (0.5 * sign);
                }
            }
            let raw = branches
                .iter()
                .find(|b| b.p2 == p2 && b.z == z)
                .map(|b| b.state.scaled(r(b.probability.sqrt())));
            for t in 0..2u8 {
                let simulated = match &raw {
                    Some(s) => two_spin_basis(2, upper, lower, z, t)?.inner(s)?,
                    None => C64::default(),
                };
                worst = worst.max((simulated - predicted[t as usize]).norm());
            }
        }
    }
    Ok(worst)
}

/// Which corrections the CNOT applies; the partial policies exist to show
/// that each correction is needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CorrectionPolicy {
    #[default]
    Full,
    SkipControl,
    SkipTarget,
}

#[derive(Debug, Clone, Serialize)]
pub struct GadgetBranchRecord {
    pub outcomes: Outcomes,
    pub corrections: Vec<(usize, Pauli)>,
    pub probability: f64,
    #[serde(skip)]
    pub output_state: FockState,
}

fn require_plus_ancilla(state: &FockState, ancilla: usize) -> Result<FockState> {
    state.require_single_occupancy(ancilla)?;
    let rotated = state.spin_rotation(ancilla, &matrix::hadamard())?;
    let wrong = rotated.occupation_expectation(ModeIndex::down(ancilla))?;
    if wrong > 1e-9 {
        return Err(precondition(format!(
            "ancilla in arm {ancilla} is not (|up> + |down>)/sqrt(2)"
        )));
    }
    Ok(rotated)
}

/// The ideal result of the CNOT gadget: ancilla removed, then control/target CNOT.
pub fn cnot_ideal(input: &FockState, control: usize, target: usize, ancilla: usize) -> Result<FockState> {
    let rotated = require_plus_ancilla(input, ancilla)?;
    rotated
        .annihilate(ModeIndex::up(ancilla))?
        .normalized()?
        .logical_cnot(control, target)
}

/// Deterministic CNOT from two encoders and one ancilla.
///
/// Control and ancilla pass a PBS pair (parity `p1`); ancilla and target pass
/// a Hadamard-wrapped PBS pair (parity `p2`); the ancilla spin is read as `z`.
/// The control gets `σz` when `p2 = 0`; the target gets `σx` when `z = p1`.
/// The measured ancilla electron is removed from the returned states.
pub fn cnot(
    state: &FockState,
    control: usize,
    target: usize,
    ancilla: usize,
    policy: CorrectionPolicy,
) -> Result<Vec<GadgetBranchRecord>> {
    if control == target || control == ancilla || target == ancilla {
        return Err(invalid("control, target and ancilla arms must be distinct"));
    }
    state.require_single_occupancy(control)?;
    state.require_single_occupancy(target)?;
    require_plus_ancilla(state, ancilla)?;

    let mut records = Vec::new();
    let boxed = state.polarizing_beam_splitter(control, ancilla)?;
    for first in measurement::measure_parity(&boxed, control)? {
        let p1 = first.value;
        let after_box1 = first.state.polarizing_beam_splitter(control, ancilla)?;
        for second in hadamard_pbs_gadget(&after_box1, ancilla, target)? {
            let (p2, z) = (second.p2, second.z);
            let mut out = second.state;
            let mut corrections = Vec::new();
            if p2 == 0 && policy != CorrectionPolicy::SkipControl {
                out = Pauli::Z.apply(&out, control)?;
                corrections.push((control, Pauli::Z));
            }
            if z == p1 && policy != CorrectionPolicy::SkipTarget {
                out = Pauli::X.apply(&out, target)?;
                corrections.push((target, Pauli::X));
            }
            let ancilla_mode = if z == 0 { ModeIndex::up(ancilla) } else { ModeIndex::down(ancilla) };
            let output_state = out.annihilate(ancilla_mode)?.normalized()?;
            records.push(GadgetBranchRecord {
                outcomes: Outcomes(vec![("p1".into(), p1), ("p2".into(), p2), ("z".into(), z)]),
                corrections,
                probability: first.probability * second.probability,
                output_state,
            });
        }
    }
    Ok(records)
}

/// CNOT gadget as a circuit on arms 1 (control), 2 (target), 3 (ancilla).
///
/// The target correction `σx iff z = p1` is written as three conditional-free
/// flips: one unconditional, one when `p1 = 0`, one when `z = 0`.
pub fn cnot_circuit(control: Spinor, target: Spinor) -> Circuit {
    let (c, t, a) = (1, 2, 3);
    Circuit::new(3)
        .electron(c, control)
        .electron(t, target)
        .electron(a, Spinor::Plus)
        .pbs(c, a)
        .measure("p1", MeasureKind::Parity(c))
        .pbs(c, a)
        .rot(a, Axis::H)
        .rot(t, Axis::H)
        .pbs(a, t)
        .measure("p2", MeasureKind::Parity(a))
        .pbs(a, t)
        .rot(a, Axis::H)
        .rot(t, Axis::H)
        .measure("z", MeasureKind::Spin(a))
        .when("p2", 0, Gate::Rot(c, Axis::Z))
        .rot(t, Axis::X)
        .when("p1", 0, Gate::Rot(t, Axis::X))
        .when("z", 0, Gate::Rot(t, Axis::X))
}

/// Corrections applied to the receiving arm, indexed by `B`.
///
/// Produced by [`derive_teleport_corrections`] and frozen here.
pub const TELEPORT_CORRECTIONS: [Pauli; 4] = [Pauli::I, Pauli::Z, Pauli::XZ, Pauli::X];

#[derive(Debug, Clone)]
pub struct TeleportBranch {
    pub b: u8,
    pub probability: f64,
    pub correction: Pauli,
    pub state: FockState,
}

/// Teleports the spin in `source` onto `pair_2`, consuming a singlet shared by
/// `pair_1` and `pair_2`, using the given correction table.
pub fn teleport_with_table(
    state: &FockState,
    source: usize,
    pair_1: usize,
    pair_2: usize,
    table: &[Pauli; 4],
) -> Result<Vec<TeleportBranch>> {
    state.require_single_occupancy(pair_2)?;
    if pair_2 == source || pair_2 == pair_1 {
        return Err(invalid("receiving arm must differ from the analyzed arms"));
    }
    bell_analyzer(state, source, pair_1, Detector::ParityMeter)?
        .into_iter()
        .map(|br| {
            let correction = table[br.outcome.b as usize];
            Ok(TeleportBranch {
                b: br.outcome.b,
                probability: br.probability,
                correction,
                state: correction.apply(&br.post_state, pair_2)?,
            })
        })
        .collect()
}

pub fn teleport(state: &FockState, source: usize, pair_1: usize, pair_2: usize) -> Result<Vec<TeleportBranch>> {
    teleport_with_table(state, source, pair_1, pair_2, &TELEPORT_CORRECTIONS)
}

/// Input for teleportation tests: qubit in arm 1, Bell pair `k` on arms 2 and 3.
pub fn teleport_input(alpha: C64, beta: C64, pair_state: u8) -> Result<FockState> {
    FockState::vacuum(3)?
        .prepare_bell(pair_state, 2, 3)?
        .prepare_spin(1, alpha, beta)
}

/// Finds, for each `B`, the unique Pauli that restores the input spin on the
/// receiving arm, by trying all four on two linearly independent inputs.
pub fn derive_teleport_corrections() -> Result<[Pauli; 4]> {
    let probes = [(r(1.0), r(0.0)), (r(1.0), r(1.0))];
    let mut worst = [[1.0f64; 4]; 4];
    for (alpha, beta) in probes {
        let input = teleport_input(alpha, beta, 0)?;
        for br in bell_analyzer(&input, 1, 2, Detector::ParityMeter)? {
            for (i, pauli) in Pauli::ALL.iter().enumerate() {
                let fixed = pauli.apply(&br.post_state, 3)?;
                let f = fixed.arm_spin_fidelity(3, [alpha, beta])?;
                let cell = &mut worst[br.outcome.b as usize][i];
                *cell = cell.min(f);
            }
        }
    }
    let mut table = [Pauli::I; 4];
    for (b, row) in worst.iter().enumerate() {
        let winners: Vec<usize> = (0..4).filter(|&i| row[i] > 1.0 - 1e-9).collect();
        match winners[..] {
            [i] => table[b] = Pauli::ALL[i],
            _ => {
                return Err(crate::error::FeqcError::Numerical(format!(
                    "no unique teleport correction for B={b}: {row:?}"
                )))
            }
        }
    }
    Ok(table)
}
