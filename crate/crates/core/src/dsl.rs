//! Line-oriented circuit language.
//!
//! ```text
//! arms 2
//! electron 1 (0.6,0) (0,0.8)   # unnormalized spinors are fine
//! electron 2 plus
//! pbs 1 2
//! p = parity 1
//! pbs 1 2
//! if p == 0 : rot 2 x
//! ```
//!
//! Besides the charge/parity/spin detectors, `<label> = occ <arm> up|down`
//! measures a single mode, and a conditional may guard any gate.

use std::fmt;

use crate::circuit::{Axis, Circuit, DiagCode, Gate, Instruction, MeasureKind, Prep, Spinor};
use crate::matrix::C64;
use crate::mode::{ModeIndex, Spin, MAX_ARMS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub code: DiagCode,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {} {}: {}",
            self.line,
            self.column,
            self.code.code(),
            self.code.name(),
            self.message
        )
    }
}

#[derive(Debug, Clone)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

/// Splits one line into tokens. `(..)` groups, `==`, `=` and `:` stand alone.
fn tokenize(line: &str) -> Vec<Token<'_>> {
    let code = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let bytes = code.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if b == b'(' {
            while i < bytes.len() && bytes[i] != b')' {
                i += 1;
            }
            i = (i + 1).min(bytes.len());
        } else if b == b'=' {
            i += if bytes.get(i + 1) == Some(&b'=') { 2 } else { 1 };
        } else if b == b':' {
            i += 1;
        } else {
            while i < bytes.len() && !bytes[i].is_ascii_whitespace() && !b"()=:#".contains(&bytes[i]) {
                i += 1;
            }
        }
        out.push(Token {
            text: &code[start..i],
            column: code[..start].chars().count() + 1,
        });
    }
    out
}

struct LineParser<'a, 'd> {
    line: usize,
    toks: &'a [Token<'a>],
    diags: &'d mut Vec<Diagnostic>,
}

impl<'a> LineParser<'a, '_> {
    fn error(&mut self, arg: usize, code: DiagCode, message: String) {
        let column = self
            .toks
            .get(arg)
            .or(self.toks.last())
            .map(|t| t.column)
            .unwrap_or(1);
        self.diags.push(Diagnostic {
            line: self.line,
            column,
            code,
            message,
        });
    }

    fn arity(&mut self, expected: &[usize], form: &str) -> bool {
        if expected.contains(&self.toks.len()) {
            return true;
        }
        let arg = self.toks.len().min(*expected.iter().max().unwrap_or(&1)).saturating_sub(1);
        self.error(arg, DiagCode::Arity, format!("expected `{form}`"));
        false
    }

    fn int<T: std::str::FromStr>(&mut self, arg: usize, what: &str) -> Option<T> {
        let text = self.toks[arg].text;
        match text.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                self.error(arg, DiagCode::BadLiteral, format!("'{text}' is not a valid {what}"));
                None
            }
        }
    }

    fn complex(&mut self, arg: usize) -> Option<C64> {
        let text = self.toks[arg].text;
        let parsed = text
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .and_then(|inner| inner.split_once(','))
            .and_then(|(re, im)| Some(C64::new(re.trim().parse().ok()?, im.trim().parse().ok()?)));
        if parsed.is_none() {
            self.error(arg, DiagCode::BadLiteral, format!("'{text}' is not a complex literal (re,im)"));
        }
        parsed
    }

    fn axis(&mut self, arg: usize) -> Option<Axis> {
        match self.toks[arg].text {
            "x" => Some(Axis::X),
            "y" => Some(Axis::Y),
            "z" => Some(Axis::Z),
            "h" => Some(Axis::H),
            other => {
                self.error(arg, DiagCode::BadLiteral, format!("'{other}' is not an axis (x|y|z|h)"));
                None
            }
        }
    }

    /// Gate whose keyword sits at token `at`.
    fn gate(&mut self, at: usize) -> Option<Gate> {
        let rest = self.toks.len() - at;
        let kw = self.toks[at].text;
        match kw {
            "bs" | "pbs" | "swap" | "rot" => {}
            other => {
                self.error(at, DiagCode::UnknownKeyword, format!("unknown gate '{other}'"));
                return None;
            }
        }
        if rest != 3 {
            let form = if kw == "rot" { "rot <arm> x|y|z|h".to_string() } else { format!("{kw} <i> <j>") };
            let arg = (at + rest.min(3)).saturating_sub(1);
            self.error(arg, DiagCode::Arity, format!("expected `{form}`"));
            return None;
        }
        let a = self.int::<usize>(at + 1, "arm");
        if kw == "rot" {
            let axis = self.axis(at + 2);
            return Some(Gate::Rot(a?, axis?));
        }
        let b = self.int::<usize>(at + 2, "arm");
        let (a, b) = (a?, b?);
        Some(match kw {
            "bs" => Gate::BeamSplitter(a, b),
            "pbs" => Gate::PolarizingBeamSplitter(a, b),
            _ => Gate::Swap(a, b),
        })
    }

    fn instruction(&mut self) -> Option<Instruction> {
        let head = self.toks[0].text;
        if self.toks.get(1).map(|t| t.text) == Some("=") {
            return self.measurement();
        }
        match head {
            "electron" => {
                if !self.arity(&[3, 4], "electron <arm> up|down|plus | electron <arm> (re,im) (re,im)") {
                    return None;
                }
                let arm = self.int::<usize>(1, "arm");
                let spinor = if self.toks.len() == 3 {
                    match self.toks[2].text {
                        "up" => Some(Spinor::Up),
                        "down" => Some(Spinor::Down),
                        "plus" => Some(Spinor::Plus),
                        other => {
                            self.error(2, DiagCode::BadLiteral, format!("'{other}' is not a spinor (up|down|plus)"));
                            None
                        }
                    }
                } else {
                    let a = self.complex(2);
                    let b = self.complex(3);
                    Some(Spinor::Custom(a?, b?))
                };
                Some(Instruction::Prep(Prep::Electron { arm: arm?, spinor: spinor? }))
            }
            "bell" => {
                if !self.arity(&[4], "bell <k> <arm_a> <arm_b>") {
                    return None;
                }
                let k = self.int::<u8>(1, "Bell index");
                let a = self.int::<usize>(2, "arm");
                let b = self.int::<usize>(3, "arm");
                Some(Instruction::Prep(Prep::Bell { k: k?, arm_a: a?, arm_b: b? }))
            }
            "bs" | "pbs" | "swap" | "rot" => self.gate(0).map(Instruction::Gate),
            "if" => {
                let shape_ok = self.toks.len() >= 5
                    && self.toks[2].text == "=="
                    && self.toks[4].text == ":";
                if !shape_ok {
                    let arg = self.toks.len().min(5) - 1;
                    self.error(arg, DiagCode::Arity, "expected `if <label> == <int> : <gate>`".into());
                    return None;
                }
                if self.toks.len() == 5 {
                    self.error(4, DiagCode::Arity, "missing gate after ':'".into());
                    return None;
                }
                let label = self.toks[1].text.to_string();
                let value = self.int::<u8>(3, "outcome value");
                let gate = self.gate(5);
                Some(Instruction::Conditional { label, value: value?, gate: gate? })
            }
            other => {
                self.error(0, DiagCode::UnknownKeyword, format!("unknown keyword '{other}'"));
                None
            }
        }
    }

    fn measurement(&mut self) -> Option<Instruction> {
        let label = self.toks[0].text.to_string();
        let Some(kind_tok) = self.toks.get(2).map(|t| t.text) else {
            self.error(1, DiagCode::Arity, "expected `<label> = charge|parity|spin|occ <arm>`".into());
            return None;
        };
        let kind = match kind_tok {
            "charge" | "parity" | "spin" => {
                if !self.arity(&[4], &format!("<label> = {kind_tok} <arm>")) {
                    return None;
                }
                let arm = self.int::<usize>(3, "arm")?;
                match kind_tok {
                    "charge" => MeasureKind::Charge(arm),
                    "parity" => MeasureKind::Parity(arm),
                    _ => MeasureKind::Spin(arm),
                }
            }
            "occ" => {
                if !self.arity(&[5], "<label> = occ <arm> up|down") {
                    return None;
                }
                let arm = self.int::<usize>(3, "arm");
                let spin = match self.toks[4].text {
                    "up" => Some(Spin::Up),
                    "down" => Some(Spin::Down),
                    other => {
                        self.error(4, DiagCode::BadLiteral, format!("'{other}' is not a spin (up|down)"));
                        None
                    }
                };
                // Arm range is checked during validation; keep the raw value.
                MeasureKind::Occupation(ModeIndex { arm: arm?, spin: spin? })
            }
            other => {
                self.error(2, DiagCode::UnknownKeyword, format!("unknown measurement '{other}'"));
                return None;
            }
        };
        Some(Instruction::Measure { label, kind })
    }
}

/// Parses a circuit, collecting every diagnostic rather than stopping at the first.
pub fn parse(source: &str) -> Result<Circuit, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut arms: Option<usize> = None;
    let mut arms_line: Option<usize> = None;
    let mut instructions = Vec::new();
    // Per instruction: line number and token columns, for locating validation issues.
    let mut origins: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut syntax_failed = false;

    for (i, raw) in source.lines().enumerate() {
        let line = i + 1;
        let toks = tokenize(raw);
        if toks.is_empty() {
            continue;
        }
        let mut p = LineParser {
            line,
            toks: &toks,
            diags: &mut diags,
        };
        if toks[0].text == "arms" {
            if let Some(first) = arms_line {
                p.error(0, DiagCode::DuplicateArmsHeader, format!("arm count already declared on line {first}"));
                continue;
            }
            arms_line = Some(line);
            if !p.arity(&[2], "arms <N>") {
                continue;
            }
            if let Some(n) = p.int::<usize>(1, "arm count") {
                if n == 0 || n > MAX_ARMS {
                    p.error(1, DiagCode::BadArmCount, format!("arm count must be in 1..={MAX_ARMS}"));
                } else {
                    arms = Some(n);
                }
            }
            continue;
        }
        match p.instruction() {
            Some(ins) => {
                instructions.push(ins);
                origins.push((line, toks.iter().map(|t| t.column).collect()));
            }
            None => syntax_failed = true,
        }
    }

    if arms_line.is_none() {
        diags.push(Diagnostic {
            line: 1,
            column: 1,
            code: DiagCode::MissingArms,
            message: "missing `arms <N>` header".into(),
        });
    }

    if let Some(arm_count) = arms {
        let circuit = Circuit { arm_count, instructions };
        for issue in circuit.issues() {
            let (line, cols) = &origins[issue.index];
            let column = cols.get(issue.arg).or(cols.last()).copied().unwrap_or(1);
            diags.push(Diagnostic {
                line: *line,
                column,
                code: issue.code,
                message: issue.message,
            });
        }
        if diags.is_empty() && !syntax_failed {
            return Ok(circuit);
        }
    }
    diags.sort_by_key(|d| (d.line, d.column));
    Err(diags)
}
