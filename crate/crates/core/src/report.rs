//! JSON run reports and the prebuilt gadget commands behind the CLI.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;

use crate::circuit::{Circuit, Spinor};
use crate::corr::{CorrBackend, CorrState};
use crate::error::{invalid, FeqcError, Result};
use crate::exec::{self, BranchRecord, FockBackend, Outcomes};
use crate::fock::FockState;
use crate::gadgets::{self, AppendixRow, CorrectionPolicy, Detector};
use crate::matrix::{r, C64};
use crate::parallel::Parallelism;

pub const REPORT_VERSION: u32 = 1;

/// Branches with fidelity at least `1 - SUCCESS_TOL` count as successes.
pub const SUCCESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Fock,
    Corr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    Enumerate,
    Sample,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Amplitude {
    pub key: String,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchReport {
    pub outcomes: Outcomes,
    pub probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<Vec<Amplitude>>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CorrStats {
    pub terms: u64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: u32,
    pub backend: BackendKind,
    pub mode: RunMode,
    pub seed: Option<u64>,
    pub arm_count: usize,
    pub branches: Vec<BranchReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<BTreeMap<String, u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corr: Option<CorrStats>,
}

impl RunReport {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub backend: BackendKind,
    pub mode: RunMode,
    pub shots: u64,
    pub seed: u64,
    pub emit_state: bool,
    pub parallelism: Parallelism,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            backend: BackendKind::Fock,
            mode: RunMode::Enumerate,
            shots: 1000,
            seed: 0,
            emit_state: false,
            parallelism: Parallelism::Auto,
        }
    }
}

pub fn amplitudes(state: &FockState) -> Vec<Amplitude> {
    state
        .entries()
        .into_iter()
        .map(|(key, a)| Amplitude { key, re: a.re, im: a.im })
        .collect()
}

fn branch_reports<S>(leaves: Vec<BranchRecord<S>>, state: impl Fn(&S) -> Option<Vec<Amplitude>>) -> Vec<BranchReport> {
    leaves
        .into_iter()
        .map(|b| BranchReport {
            state: state(&b.post_state),
            outcomes: b.outcomes,
            probability: b.probability,
        })
        .collect()
}

/// Runs `circuit` from the vacuum on the chosen backend.
///
/// In sample mode the branch list still carries every reachable path with its
/// exact probability; `frequencies` holds the shot counts.
pub fn run(circuit: &Circuit, opts: &RunOptions) -> Result<RunReport> {
    circuit.validate()?;
    let n = circuit.arm_count;
    let (branches, frequencies, corr) = match opts.backend {
        BackendKind::Fock => {
            let input = FockState::vacuum(n)?;
            let emit = |s: &FockState| opts.emit_state.then(|| amplitudes(s));
            match opts.mode {
                RunMode::Enumerate => {
                    let leaves = exec::enumerate_branches_with(&FockBackend, circuit, input, opts.parallelism)?;
                    (branch_reports(leaves, emit), None, None)
                }
                RunMode::Sample => {
                    let rep = exec::sample_with(&FockBackend, circuit, input, opts.seed, opts.shots, opts.parallelism)?;
                    (branch_reports(rep.leaves, emit), Some(rep.frequencies), None)
                }
            }
        }
        BackendKind::Corr => {
            if opts.emit_state {
                return Err(invalid("--emit-state needs the fock backend; corr keeps no amplitudes"));
            }
            CorrBackend::check_circuit(circuit)?;
            let backend = CorrBackend::new();
            let start = Instant::now();
            let none = |_: &CorrState| None;
            let input = crate::exec::Backend::initial_state(&backend, n)?;
            let (branches, freq) = match opts.mode {
                RunMode::Enumerate => {
                    let leaves = exec::enumerate_branches_with(&backend, circuit, input, opts.parallelism)?;
                    (branch_reports(leaves, none), None)
                }
                RunMode::Sample => {
                    let rep = exec::sample_with(&backend, circuit, input, opts.seed, opts.shots, opts.parallelism)?;
                    (branch_reports(rep.leaves, none), Some(rep.frequencies))
                }
            };
            let stats = CorrStats {
                terms: backend.terms(),
                wall_ms: start.elapsed().as_secs_f64() * 1e3,
            };
            (branches, freq, Some(stats))
        }
    };
    Ok(RunReport {
        version: REPORT_VERSION,
        backend: opts.backend,
        mode: opts.mode,
        seed: (opts.mode == RunMode::Sample).then_some(opts.seed),
        arm_count: n,
        branches,
        frequencies,
        corr,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct GadgetBranch {
    pub outcomes: Outcomes,
    pub probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub corrections: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GadgetReport {
    pub version: u32,
    pub gadget: &'static str,
    pub branches: Vec<GadgetBranch>,
    /// Total probability of branches that meet the gadget's goal.
    pub success_probability: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<AppendixRow>>,
}

impl GadgetReport {
    fn new(gadget: &'static str, branches: Vec<GadgetBranch>, ok: impl Fn(&GadgetBranch) -> bool) -> Self {
        let success_probability = branches.iter().filter(|b| ok(b)).map(|b| b.probability).sum();
        GadgetReport {
            version: REPORT_VERSION,
            gadget,
            branches,
            success_probability,
            table: None,
        }
    }

    pub fn min_fidelity(&self) -> Option<f64> {
        self.branches.iter().filter_map(|b| b.fidelity).reduce(f64::min)
    }
}

fn faithful(b: &GadgetBranch) -> bool {
    b.fidelity.is_some_and(|f| f >= 1.0 - SUCCESS_TOL)
}

/// Parses `up`, `down`, `plus`, a basis bit `0`/`1`, or `(re,im),(re,im)`.
pub fn parse_spinor(text: &str) -> Result<Spinor> {
    let t = text.trim();
    match t {
        "up" | "0" => return Ok(Spinor::Up),
        "down" | "1" => return Ok(Spinor::Down),
        "plus" => return Ok(Spinor::Plus),
        _ => {}
    }
    let bad = || invalid(format!("'{text}' is not a spinor; use up|down|plus|0|1 or \"(re,im),(re,im)\""));
    let complex = |s: &str| -> Option<C64> {
        let (re, im) = s.trim().strip_prefix('(')?.strip_suffix(')')?.split_once(',')?;
        Some(C64::new(re.trim().parse().ok()?, im.trim().parse().ok()?))
    };
    let split = t.find("),").ok_or_else(bad)?;
    let (a, b) = (complex(&t[..=split]).ok_or_else(bad)?, complex(&t[split + 2..]).ok_or_else(bad)?);
    let norm = a.norm_sqr() + b.norm_sqr();
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(invalid("spinor must be nonzero and finite"));
    }
    Ok(Spinor::Custom(a, b))
}

fn unit(spinor: Spinor) -> [C64; 2] {
    let (a, b) = spinor.amplitudes();
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
    [a / n, b / n]
}

pub fn bell_gadget(k: u8, detector: Detector) -> Result<GadgetReport> {
    let input = FockState::vacuum(2)?.prepare_bell(k, 1, 2)?;
    let branches = gadgets::bell_analyzer(&input, 1, 2, detector)?
        .into_iter()
        .map(|br| {
            let outcomes = br
                .outcome
                .readings
                .iter()
                .enumerate()
                .filter_map(|(i, v)| v.map(|v| (detector.label(i + 1), v)))
                .collect();
            GadgetBranch {
                outcomes: Outcomes(outcomes),
                probability: br.probability,
                b: Some(br.outcome.b),
                fidelity: None,
                corrections: Vec::new(),
            }
        })
        .collect();
    Ok(GadgetReport::new("bell", branches, |b| b.b == Some(k)))
}

/// Encoder on a qubit in arm 1 and a `plus` ancilla in arm 2; fidelity is
/// against `α|↑↑⟩ + β|↓↓⟩`.
pub fn encoder_gadget(qubit: Spinor) -> Result<GadgetReport> {
    let [alpha, beta] = unit(qubit);
    let v = FockState::vacuum(2)?;
    let input = v.prepare_spin(1, alpha, beta)?.prepare_spin(2, r(1.0), r(1.0))?;
    let ideal = v.prepare_two_spin(1, 2, [alpha, r(0.0), r(0.0), beta])?;
    let branches = gadgets::encoder(&input, 1, 2, true)?
        .into_iter()
        .map(|br| {
            Ok(GadgetBranch {
                outcomes: Outcomes(vec![("p".into(), br.p)]),
                probability: br.probability,
                b: None,
                fidelity: Some(br.state.fidelity(&ideal)?),
                corrections: if br.corrected { vec!["x@2".into()] } else { Vec::new() },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GadgetReport::new("encoder", branches, faithful))
}

/// CNOT with control in arm 1, target in arm 2, ancilla in arm 3.
pub fn cnot_gadget(control: Spinor, target: Spinor, policy: CorrectionPolicy) -> Result<GadgetReport> {
    let [ca, cb] = unit(control);
    let [ta, tb] = unit(target);
    let input = FockState::vacuum(3)?
        .prepare_spin(1, ca, cb)?
        .prepare_spin(2, ta, tb)?
        .prepare_spin(3, r(1.0), r(1.0))?;
    cnot_gadget_on(&input, policy)
}

pub fn cnot_gadget_on(input: &FockState, policy: CorrectionPolicy) -> Result<GadgetReport> {
    let ideal = gadgets::cnot_ideal(input, 1, 2, 3)?;
    let branches = gadgets::cnot(input, 1, 2, 3, policy)?
        .into_iter()
        .map(|br| {
            Ok(GadgetBranch {
                fidelity: Some(br.output_state.fidelity(&ideal)?),
                corrections: br
                    .corrections
                    .iter()
                    .map(|(arm, p)| format!("{}@{arm}", pauli_name(*p)))
                    .collect(),
                outcomes: br.outcomes,
                probability: br.probability,
                b: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GadgetReport::new("cnot", branches, faithful))
}

fn pauli_name(p: gadgets::Pauli) -> &'static str {
    match p {
        gadgets::Pauli::I => "i",
        gadgets::Pauli::X => "x",
        gadgets::Pauli::Z => "z",
        gadgets::Pauli::XZ => "xz",
    }
}

/// Teleports a qubit from arm 1 to arm 3 through a singlet on arms 2 and 3.
pub fn teleport_gadget(qubit: Spinor) -> Result<GadgetReport> {
    let [alpha, beta] = unit(qubit);
    let input = gadgets::teleport_input(alpha, beta, 0)?;
    let branches = gadgets::teleport(&input, 1, 2, 3)?
        .into_iter()
        .map(|br| {
            Ok(GadgetBranch {
                outcomes: Outcomes(vec![("b".into(), br.b)]),
                probability: br.probability,
                b: Some(br.b),
                fidelity: Some(br.state.arm_spin_fidelity(3, [alpha, beta])?),
                corrections: vec![format!("{}@3", pauli_name(br.correction))],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GadgetReport::new("teleport", branches, faithful))
}

pub fn appendix_gadget() -> Result<GadgetReport> {
    let rows = gadgets::appendix_table()?;
    let matched = rows.iter().filter(|r| r.matched).count();
    Ok(GadgetReport {
        version: REPORT_VERSION,
        gadget: "appendix-table",
        branches: Vec::new(),
        success_probability: matched as f64 / rows.len() as f64,
        table: Some(rows),
    })
}

/// Plain-text rendering of the Hadamard-PBS verification table.
pub fn appendix_text(rows: &[AppendixRow]) -> String {
    let mut out = String::from(" a y p2 z | bit sign | sim_bit      sim_re      sim_im | match\n");
    for row in rows {
        let bit = row.simulated_bit.map_or("-".to_string(), |b| b.to_string());
        out.push_str(&format!(
            " {} {} {}  {} |  {}  {:+} |      {} {:+.9} {:+.9} | {}\n",
            row.a, row.y, row.p2, row.z, row.expected_bit, row.expected_sign, bit, row.simulated_re, row.simulated_im, row.matched
        ));
    }
    out
}

/// Maps library errors onto CLI exit codes: 2 for circuit problems, 1 otherwise.
pub fn exit_code(err: &FeqcError) -> i32 {
    match err {
        FeqcError::CircuitValidation(_) => 2,
        _ => 1,
    }
}
