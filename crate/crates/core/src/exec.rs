//! Branch-tree execution of circuits: exhaustive enumeration and seeded sampling.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::{Serialize, SerializeMap, Serializer};

use crate::circuit::{Circuit, Gate, Instruction, MeasureKind, Prep};
use crate::error::{invalid, Result};
use crate::fock::FockState;
use crate::measurement::{self, Outcome};
use crate::parallel::{map_ordered, map_range, Parallelism};

/// A simulation backend that the branch executor drives.
pub trait Backend: Sync {
    type State: Clone + Send + Sync;

    fn name(&self) -> &'static str;
    fn initial_state(&self, arm_count: usize) -> Result<Self::State>;
    fn prepare(&self, state: &Self::State, prep: &Prep) -> Result<Self::State>;
    fn apply(&self, state: &Self::State, gate: &Gate) -> Result<Self::State>;
    fn measure(&self, state: &Self::State, kind: MeasureKind) -> Result<Vec<Outcome<Self::State>>>;
}

/// Exact Fock-space backend.
#[derive(Debug, Clone, Copy, Default)]
pub struct FockBackend;

impl Backend for FockBackend {
    type State = FockState;

    fn name(&self) -> &'static str {
        "fock"
    }

    fn initial_state(&self, arm_count: usize) -> Result<FockState> {
        FockState::vacuum(arm_count)
    }

    fn prepare(&self, state: &FockState, prep: &Prep) -> Result<FockState> {
        match *prep {
            Prep::Electron { arm, spinor } => {
                let (a, b) = spinor.amplitudes();
                state.prepare_spin(arm, a, b)
            }
            Prep::Bell { k, arm_a, arm_b } => state.prepare_bell(k, arm_a, arm_b),
        }
    }

    fn apply(&self, state: &FockState, gate: &Gate) -> Result<FockState> {
        match *gate {
            Gate::BeamSplitter(i, j) => state.beam_splitter(i, j),
            Gate::PolarizingBeamSplitter(i, j) => state.polarizing_beam_splitter(i, j),
            Gate::Swap(i, j) => state.swap_arms(i, j),
            Gate::Rot(arm, axis) => state.spin_rotation(arm, &axis.matrix()),
        }
    }

    fn measure(&self, state: &FockState, kind: MeasureKind) -> Result<Vec<Outcome<FockState>>> {
        match kind {
            MeasureKind::Charge(arm) => measurement::measure_charge(state, arm),
            MeasureKind::Parity(arm) => measurement::measure_parity(state, arm),
            MeasureKind::Spin(arm) => measurement::measure_spin(state, arm),
            MeasureKind::Occupation(mode) => measurement::measure_occupation(state, mode),
        }
    }
}

/// Measurement outcomes of one path, in program order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash, PartialOrd, Ord)]
pub struct Outcomes(pub Vec<(String, u8)>);

impl Outcomes {
    pub fn get(&self, label: &str) -> Option<u8> {
        self.0.iter().find(|(l, _)| l == label).map(|(_, v)| *v)
    }

    /// `label=value` pairs joined by commas.
    pub fn signature(&self) -> String {
        self.0
            .iter()
            .map(|(l, v)| format!("{l}={v}"))
            .collect::<Vec<_>>()
            .join(",")
    }

    fn with(&self, label: &str, value: u8) -> Outcomes {
        let mut next = self.0.clone();
        next.push((label.to_string(), value));
        Outcomes(next)
    }
}

impl Serialize for Outcomes {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (l, v) in &self.0 {
            map.serialize_entry(l, v)?;
        }
        map.end()
    }
}

/// One fully resolved measurement path.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchRecord<S> {
    pub outcomes: Outcomes,
    pub probability: f64,
    pub post_state: S,
}

/// Outcome tree of a circuit: leaves are final states, splits are measurements.
#[derive(Debug, Clone)]
pub enum Node<S> {
    Leaf(S),
    Split {
        label: String,
        children: Vec<(u8, f64, Node<S>)>,
    },
}

fn expand<B: Backend>(
    backend: &B,
    circuit: &Circuit,
    pc: usize,
    mut state: B::State,
    path: Outcomes,
    mode: Parallelism,
) -> Result<Node<B::State>> {
    for idx in pc..circuit.instructions.len() {
        match &circuit.instructions[idx] {
            Instruction::Prep(p) => state = backend.prepare(&state, p)?,
            Instruction::Gate(g) => state = backend.apply(&state, g)?,
            Instruction::Conditional { label, value, gate } => {
                if path.get(label) == Some(*value) {
                    state = backend.apply(&state, gate)?;
                }
            }
            Instruction::Measure { label, kind } => {
                let outcomes = backend.measure(&state, *kind)?;
                let children = map_ordered(outcomes, mode, |o| {
                    let child_path = path.with(label, o.value);
                    expand(backend, circuit, idx + 1, o.state, child_path, mode)
                        .map(|node| (o.value, o.probability, node))
                });
                let children = children.into_iter().collect::<Result<Vec<_>>>()?;
                return Ok(Node::Split {
                    label: label.clone(),
                    children,
                });
            }
        }
    }
    Ok(Node::Leaf(state))
}

/// Builds the full outcome tree of `circuit` starting from `input`.
pub fn build_tree<B: Backend>(
    backend: &B,
    circuit: &Circuit,
    input: B::State,
    mode: Parallelism,
) -> Result<Node<B::State>> {
    circuit.validate()?;
    expand(backend, circuit, 0, input, Outcomes::default(), mode)
}

fn flatten<S>(node: Node<S>, path: Outcomes, prob: f64, out: &mut Vec<BranchRecord<S>>) -> SampleTree {
    match node {
        Node::Leaf(state) => {
            out.push(BranchRecord {
                outcomes: path,
                probability: prob,
                post_state: state,
            });
            SampleTree::Leaf(out.len() - 1)
        }
        Node::Split { label, children } => {
            let mut cumulative = Vec::with_capacity(children.len());
            let mut acc = 0.0;
            let mut subtrees = Vec::with_capacity(children.len());
            for (value, p, child) in children {
                acc += p;
                cumulative.push(acc);
                subtrees.push(flatten(child, path.with(&label, value), prob * p, out));
            }
            SampleTree::Split {
                cumulative,
                children: subtrees,
            }
        }
    }
}

/// Probability skeleton of a [`Node`] tree, used to draw paths.
#[derive(Debug, Clone)]
pub enum SampleTree {
    Leaf(usize),
    Split {
        cumulative: Vec<f64>,
        children: Vec<SampleTree>,
    },
}

impl SampleTree {
    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        match self {
            SampleTree::Leaf(i) => *i,
            SampleTree::Split { cumulative, children } => {
                let total = *cumulative.last().expect("split has children");
                let u: f64 = rng.random::<f64>() * total;
                let pick = cumulative
                    .iter()
                    .position(|c| u < *c)
                    .unwrap_or(children.len() - 1);
                children[pick].draw(rng)
            }
        }
    }
}

/// Random stream for one shot, keyed by `(seed, shot)`.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

/// Expands every measurement into its nonzero-probability outcomes.
pub fn enumerate_branches_with<B: Backend>(
    backend: &B,
    circuit: &Circuit,
    input: B::State,
    mode: Parallelism,
) -> Result<Vec<BranchRecord<B::State>>> {
    let root = build_tree(backend, circuit, input, mode)?;
    let mut leaves = Vec::new();
    flatten(root, Outcomes::default(), 1.0, &mut leaves);
    Ok(leaves)
}

/// Fock-backend enumeration with the default parallelism.
pub fn enumerate_branches(circuit: &Circuit, input: FockState) -> Result<Vec<BranchRecord<FockState>>> {
    enumerate_branches_with(&FockBackend, circuit, input, Parallelism::Auto)
}

#[derive(Debug, Clone)]
pub struct SampleReport<S> {
    pub seed: u64,
    /// Distinct paths of the outcome tree, in enumeration order.
    pub leaves: Vec<BranchRecord<S>>,
    /// Leaf index drawn by each shot.
    pub shot_leaves: Vec<usize>,
    /// Shot counts per outcome signature.
    pub frequencies: BTreeMap<String, u64>,
}

impl<S> SampleReport<S> {
    pub fn shots(&self) -> usize {
        self.shot_leaves.len()
    }

    pub fn shot_outcomes(&self, shot: usize) -> &Outcomes {
        &self.leaves[self.shot_leaves[shot]].outcomes
    }
}

pub fn sample_with<B: Backend>(
    backend: &B,
    circuit: &Circuit,
    input: B::State,
    seed: u64,
    shots: u64,
    mode: Parallelism,
) -> Result<SampleReport<B::State>> {
    if shots == 0 {
        return Err(invalid("shot count must be at least 1"));
    }
    let root = build_tree(backend, circuit, input, mode)?;
    let mut leaves = Vec::new();
    let tree = flatten(root, Outcomes::default(), 1.0, &mut leaves);
    let shot_leaves = map_range(shots, mode, |shot| tree.draw(&mut shot_rng(seed, shot)));
    let mut counts = vec![0u64; leaves.len()];
    for &leaf in &shot_leaves {
        counts[leaf] += 1;
    }
    let mut frequencies = BTreeMap::new();
    for (leaf, count) in leaves.iter().zip(counts) {
        if count > 0 {
            *frequencies.entry(leaf.outcomes.signature()).or_insert(0) += count;
        }
    }
    Ok(SampleReport {
        seed,
        leaves,
        shot_leaves,
        frequencies,
    })
}

pub fn sample(circuit: &Circuit, input: FockState, seed: u64, shots: u64) -> Result<SampleReport<FockState>> {
    sample_with(&FockBackend, circuit, input, seed, shots, Parallelism::Auto)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Axis, Spinor};
    use crate::error::FeqcError;

    fn encoder() -> Circuit {
        Circuit::new(2)
            .electron(1, Spinor::Custom(crate::matrix::c(0.6, 0.0), crate::matrix::c(0.0, 0.8)))
            .electron(2, Spinor::Plus)
            .pbs(1, 2)
            .measure("p", MeasureKind::Parity(1))
            .pbs(1, 2)
            .when("p", 0, Gate::Rot(2, Axis::X))
    }

    fn vac(n: usize) -> FockState {
        FockState::vacuum(n).unwrap()
    }

    #[test]
    fn no_measurement_single_branch() {
        let c = Circuit::new(2).electron(1, Spinor::Up).bs(1, 2);
        let b = enumerate_branches(&c, vac(2)).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].probability, 1.0);
        assert!(b[0].outcomes.0.is_empty());
    }

    #[test]
    fn encoder_has_two_even_branches() {
        let b = enumerate_branches(&encoder(), vac(2)).unwrap();
        assert_eq!(b.len(), 2);
        for rec in &b {
            assert!((rec.probability - 0.5).abs() < 1e-12);
        }
        assert_eq!(b[0].outcomes.signature(), "p=0");
        assert_eq!(b[1].outcomes.signature(), "p=1");
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let c = Circuit::new(3)
            .electron(1, Spinor::Plus)
            .electron(2, Spinor::Up)
            .bs(1, 2)
            .measure("a", MeasureKind::Charge(1))
            .bs(2, 3)
            .measure("b", MeasureKind::Charge(3));
        let x = enumerate_branches_with(&FockBackend, &c, vac(3), Parallelism::Auto).unwrap();
        let y = enumerate_branches_with(&FockBackend, &c, vac(3), Parallelism::Sequential).unwrap();
        assert_eq!(x, y);
        let s1 = sample_with(&FockBackend, &c, vac(3), 11, 500, Parallelism::Auto).unwrap();
        let s2 = sample_with(&FockBackend, &c, vac(3), 11, 500, Parallelism::Sequential).unwrap();
        assert_eq!(s1.shot_leaves, s2.shot_leaves);
    }

    #[test]
    fn sampling_is_reproducible_and_seed_sensitive() {
        let a = sample(&encoder(), vac(2), 7, 200).unwrap();
        let b = sample(&encoder(), vac(2), 7, 200).unwrap();
        let c = sample(&encoder(), vac(2), 8, 200).unwrap();
        assert_eq!(a.shot_leaves, b.shot_leaves);
        assert_ne!(a.shot_leaves, c.shot_leaves);
        assert_eq!(a.frequencies.values().sum::<u64>(), 200);
        assert!(matches!(sample(&encoder(), vac(2), 7, 0), Err(FeqcError::InvalidArgument(_))));
    }

    #[test]
    fn shot_streams_are_independent_of_order() {
        let mut r1 = shot_rng(3, 10);
        let _ = shot_rng(3, 9).random::<f64>();
        let mut r2 = shot_rng(3, 10);
        assert_eq!(r1.random::<u64>(), r2.random::<u64>());
    }

    #[test]
    fn invalid_circuit_is_rejected() {
        let c = Circuit::new(1).when("q", 2, Gate::Rot(1, Axis::X)).measure("q", MeasureKind::Charge(1));
        assert!(matches!(enumerate_branches(&c, vac(1)), Err(FeqcError::CircuitValidation(_))));
    }
}
