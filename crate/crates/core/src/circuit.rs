//! Declarative circuits: preparations, bilinear gates, labeled measurements,
//! and gates conditioned on earlier outcomes.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::error::{FeqcError, Result};
use crate::matrix::{self, CMatrix, C64};
use crate::mode::{ModeIndex, Spin, MAX_ARMS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spinor {
    Up,
    Down,
    Plus,
    Custom(C64, C64),
}

impl Spinor {
    pub fn amplitudes(self) -> (C64, C64) {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        match self {
            Spinor::Up => (o, z),
            Spinor::Down => (z, o),
            Spinor::Plus => (o, o),
            Spinor::Custom(a, b) => (a, b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
    H,
}

impl Axis {
    pub fn matrix(self) -> CMatrix {
        match self {
            Axis::X => matrix::sigma_x(),
            Axis::Y => matrix::sigma_y(),
            Axis::Z => matrix::sigma_z(),
            Axis::H => matrix::hadamard(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
            Axis::H => "h",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prep {
    Electron { arm: usize, spinor: Spinor },
    Bell { k: u8, arm_a: usize, arm_b: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gate {
    BeamSplitter(usize, usize),
    PolarizingBeamSplitter(usize, usize),
    Swap(usize, usize),
    Rot(usize, Axis),
}

impl Gate {
    fn arms(&self) -> Vec<usize> {
        match *self {
            Gate::BeamSplitter(i, j) | Gate::PolarizingBeamSplitter(i, j) | Gate::Swap(i, j) => {
                vec![i, j]
            }
            Gate::Rot(a, _) => vec![a],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureKind {
    Charge(usize),
    Parity(usize),
    Spin(usize),
    Occupation(ModeIndex),
}

impl MeasureKind {
    /// Largest outcome value the measurement can produce.
    pub fn max_outcome(self) -> u8 {
        match self {
            MeasureKind::Charge(_) => 2,
            _ => 1,
        }
    }

    pub fn arm(self) -> usize {
        match self {
            MeasureKind::Charge(a) | MeasureKind::Parity(a) | MeasureKind::Spin(a) => a,
            MeasureKind::Occupation(m) => m.arm,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Instruction {
    Prep(Prep),
    Gate(Gate),
    Measure { label: String, kind: MeasureKind },
    Conditional { label: String, value: u8, gate: Gate },
}

/// Stable diagnostic codes shared by circuit validation and the parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DiagCode {
    UnknownKeyword,
    Arity,
    BadLiteral,
    MissingArms,
    DuplicateArmsHeader,
    BadArmCount,
    LabelRedefined,
    UnknownLabel,
    ForwardReference,
    ConditionOutOfRange,
    InvalidLabel,
    ArmOutOfRange,
    DuplicateArm,
    ArmReprepared,
    BellIndex,
    ZeroSpinor,
}

impl DiagCode {
    pub fn code(self) -> &'static str {
        match self {
            DiagCode::UnknownKeyword => "E100",
            DiagCode::Arity => "E101",
            DiagCode::BadLiteral => "E102",
            DiagCode::MissingArms => "E103",
            DiagCode::DuplicateArmsHeader => "E104",
            DiagCode::BadArmCount => "E105",
            DiagCode::LabelRedefined => "E200",
            DiagCode::UnknownLabel => "E201",
            DiagCode::ForwardReference => "E202",
            DiagCode::ConditionOutOfRange => "E203",
            DiagCode::InvalidLabel => "E204",
            DiagCode::ArmOutOfRange => "E300",
            DiagCode::DuplicateArm => "E301",
            DiagCode::ArmReprepared => "E302",
            DiagCode::BellIndex => "E303",
            DiagCode::ZeroSpinor => "E304",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DiagCode::UnknownKeyword => "unknown-keyword",
            DiagCode::Arity => "arity-mismatch",
            DiagCode::BadLiteral => "bad-literal",
            DiagCode::MissingArms => "missing-arms",
            DiagCode::DuplicateArmsHeader => "duplicate-arms-header",
            DiagCode::BadArmCount => "bad-arm-count",
            DiagCode::LabelRedefined => "label-redefined",
            DiagCode::UnknownLabel => "unknown-label",
            DiagCode::ForwardReference => "forward-reference",
            DiagCode::ConditionOutOfRange => "condition-out-of-range",
            DiagCode::InvalidLabel => "invalid-label",
            DiagCode::ArmOutOfRange => "arm-out-of-range",
            DiagCode::DuplicateArm => "duplicate-arm",
            DiagCode::ArmReprepared => "arm-reprepared",
            DiagCode::BellIndex => "bell-index",
            DiagCode::ZeroSpinor => "zero-spinor",
        }
    }
}

impl fmt::Display for DiagCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.code(), self.name())
    }
}

/// A validation failure located at instruction `index`, token `arg`.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationIssue {
    pub index: usize,
    pub arg: usize,
    pub code: DiagCode,
    pub message: String,
}

pub const KEYWORDS: &[&str] = &[
    "arms", "electron", "bell", "bs", "pbs", "rot", "swap", "if", "charge", "parity", "spin",
    "occ", "up", "down", "plus",
];

pub fn is_valid_label(label: &str) -> bool {
    let mut chars = label.chars();
    matches!(chars.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_')
        && chars.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
        && !KEYWORDS.contains(&label)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub arm_count: usize,
    pub instructions: Vec<Instruction>,
}

impl Circuit {
    pub fn new(arm_count: usize) -> Self {
        Circuit {
            arm_count,
            instructions: Vec::new(),
        }
    }

    pub fn push(mut self, instruction: Instruction) -> Self {
        self.instructions.push(instruction);
        self
    }

    pub fn electron(self, arm: usize, spinor: Spinor) -> Self {
        self.push(Instruction::Prep(Prep::Electron { arm, spinor }))
    }

    pub fn bell(self, k: u8, arm_a: usize, arm_b: usize) -> Self {
        self.push(Instruction::Prep(Prep::Bell { k, arm_a, arm_b }))
    }

    pub fn gate(self, gate: Gate) -> Self {
        self.push(Instruction::Gate(gate))
    }

    pub fn bs(self, i: usize, j: usize) -> Self {
        self.gate(Gate::BeamSplitter(i, j))
    }

    pub fn pbs(self, i: usize, j: usize) -> Self {
        self.gate(Gate::PolarizingBeamSplitter(i, j))
    }

    pub fn swap(self, i: usize, j: usize) -> Self {
        self.gate(Gate::Swap(i, j))
    }

    pub fn rot(self, arm: usize, axis: Axis) -> Self {
        self.gate(Gate::Rot(arm, axis))
    }

    pub fn measure(self, label: &str, kind: MeasureKind) -> Self {
        self.push(Instruction::Measure {
            label: label.to_string(),
            kind,
        })
    }

    pub fn when(self, label: &str, value: u8, gate: Gate) -> Self {
        self.push(Instruction::Conditional {
            label: label.to_string(),
            value,
            gate,
        })
    }

    /// Measurement labels in program order.
    pub fn labels(&self) -> Vec<&str> {
        self.instructions
            .iter()
            .filter_map(|ins| match ins {
                Instruction::Measure { label, .. } => Some(label.as_str()),
                _ => None,
            })
            .collect()
    }

    pub fn issues(&self) -> Vec<ValidationIssue> {
        let mut issues = Vec::new();
        if self.arm_count == 0 || self.arm_count > MAX_ARMS {
            issues.push(ValidationIssue {
                index: 0,
                arg: 0,
                code: DiagCode::BadArmCount,
                message: format!("arm count must be in 1..={MAX_ARMS}"),
            });
            return issues;
        }
        let all_labels: HashMap<&str, usize> = self
            .instructions
            .iter()
            .enumerate()
            .filter_map(|(i, ins)| match ins {
                Instruction::Measure { label, .. } => Some((label.as_str(), i)),
                _ => None,
            })
            .collect();
        let mut defined: HashMap<&str, MeasureKind> = HashMap::new();
        let mut prepared: HashSet<usize> = HashSet::new();
        let n = self.arm_count;

        for (index, ins) in self.instructions.iter().enumerate() {
            let mut push = |arg: usize, code: DiagCode, message: String| {
                issues.push(ValidationIssue {
                    index,
                    arg,
                    code,
                    message,
                })
            };
            let check_arms = |arms: &[(usize, usize)], push: &mut dyn FnMut(usize, DiagCode, String)| {
                let mut ok = true;
                for &(arm, arg) in arms {
                    if arm == 0 || arm > n {
                        push(arg, DiagCode::ArmOutOfRange, format!("arm {arm} not in 1..={n}"));
                        ok = false;
                    }
                }
                if arms.len() == 2 && arms[0].0 == arms[1].0 {
                    push(arms[1].1, DiagCode::DuplicateArm, format!("arm {} used twice", arms[0].0));
                    ok = false;
                }
                ok
            };
            let gate_arms = |gate: &Gate, offset: usize| -> Vec<(usize, usize)> {
                gate.arms()
                    .into_iter()
                    .enumerate()
                    .map(|(i, a)| (a, offset + 1 + i))
                    .collect()
            };

            match ins {
                Instruction::Prep(Prep::Electron { arm, spinor }) => {
                    if check_arms(&[(*arm, 1)], &mut push) && !prepared.insert(*arm) {
                        push(1, DiagCode::ArmReprepared, format!("arm {arm} is already prepared"));
                    }
                    if let Spinor::Custom(a, b) = spinor {
                        let norm = a.norm_sqr() + b.norm_sqr();
                        if !(norm > 0.0) || !norm.is_finite() {
                            push(2, DiagCode::ZeroSpinor, "spinor must be nonzero and finite".into());
                        }
                    }
                }
                Instruction::Prep(Prep::Bell { k, arm_a, arm_b }) => {
                    if *k > 3 {
                        push(1, DiagCode::BellIndex, format!("Bell index {k} not in 0..=3"));
                    }
                    if check_arms(&[(*arm_a, 2), (*arm_b, 3)], &mut push) {
                        for (arm, arg) in [(*arm_a, 2), (*arm_b, 3)] {
                            if !prepared.insert(arm) {
                                push(arg, DiagCode::ArmReprepared, format!("arm {arm} is already prepared"));
                            }
                        }
                    }
                }
                Instruction::Gate(gate) => {
                    check_arms(&gate_arms(gate, 0), &mut push);
                }
                Instruction::Measure { label, kind } => {
                    if !is_valid_label(label) {
                        push(0, DiagCode::InvalidLabel, format!("'{label}' is not a valid label"));
                    }
                    if defined.insert(label.as_str(), *kind).is_some() {
                        push(0, DiagCode::LabelRedefined, format!("label '{label}' already defined"));
                    }
                    check_arms(&[(kind.arm(), 3)], &mut push);
                }
                Instruction::Conditional { label, value, gate } => {
                    match defined.get(label.as_str()) {
                        Some(kind) => {
                            if *value > kind.max_outcome() {
                                push(
                                    3,
                                    DiagCode::ConditionOutOfRange,
                                    format!("'{label}' never takes the value {value}"),
                                );
                            }
                        }
                        None if all_labels.contains_key(label.as_str()) => push(
                            1,
                            DiagCode::ForwardReference,
                            format!("'{label}' is measured after this conditional"),
                        ),
                        None => push(1, DiagCode::UnknownLabel, format!("'{label}' is never measured")),
                    }
                    check_arms(&gate_arms(gate, 4), &mut push);
                }
            }
        }
        issues
    }

    pub fn validate(&self) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            return Ok(());
        }
        let text = issues
            .iter()
            .map(|i| format!("instruction {}: {} ({})", i.index + 1, i.message, i.code.code()))
            .collect::<Vec<_>>()
            .join("; ");
        Err(FeqcError::CircuitValidation(text))
    }
}

fn fmt_complex(z: C64) -> String {
    format!("({:?},{:?})", z.re, z.im)
}

impl fmt::Display for Spinor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spinor::Up => f.write_str("up"),
            Spinor::Down => f.write_str("down"),
            Spinor::Plus => f.write_str("plus"),
            Spinor::Custom(a, b) => write!(f, "{} {}", fmt_complex(*a), fmt_complex(*b)),
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::BeamSplitter(i, j) => write!(f, "bs {i} {j}"),
            Gate::PolarizingBeamSplitter(i, j) => write!(f, "pbs {i} {j}"),
            Gate::Swap(i, j) => write!(f, "swap {i} {j}"),
            Gate::Rot(a, axis) => write!(f, "rot {a} {}", axis.name()),
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Prep(Prep::Electron { arm, spinor }) => write!(f, "electron {arm} {spinor}"),
            Instruction::Prep(Prep::Bell { k, arm_a, arm_b }) => write!(f, "bell {k} {arm_a} {arm_b}"),
            Instruction::Gate(g) => write!(f, "{g}"),
            Instruction::Measure { label, kind } => match kind {
                MeasureKind::Charge(a) => write!(f, "{label} = charge {a}"),
                MeasureKind::Parity(a) => write!(f, "{label} = parity {a}"),
                MeasureKind::Spin(a) => write!(f, "{label} = spin {a}"),
                MeasureKind::Occupation(m) => {
                    let s = if m.spin == Spin::Up { "up" } else { "down" };
                    write!(f, "{label} = occ {} {s}", m.arm)
                }
            },
            Instruction::Conditional { label, value, gate } => write!(f, "if {label} == {value} : {gate}"),
        }
    }
}

impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "arms {}", self.arm_count)?;
        for ins in &self.instructions {
            writeln!(f, "{ins}")?;
        }
        Ok(())
    }
}
