//! Free-fermion simulation through the correlation matrix `M[μ][ν] = ⟨a†_μ a_ν⟩`.
//!
//! Gaussian (Slater-determinant) states stay Gaussian under bilinear unitaries
//! and under projective occupation measurements of single modes, and the
//! joint probability that a set of modes is occupied is a principal minor of
//! `M`. The projector onto charge 1, `P = n↑ + n↓ - 2 n↑ n↓`, is a sum of
//! terms, so the probability that `m` arms are all singly occupied expands
//! into `3^m` determinants and its post-measurement state is not Gaussian.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::circuit::{Circuit, Gate, Instruction, MeasureKind, Prep};
use crate::error::{invalid, FeqcError, Result};
use crate::exec::Backend;
use crate::matrix::{self, r, CMatrix, C64, UNITARY_TOL};
use crate::measurement::{Outcome, BRANCH_PRUNE};
use crate::mode::{check_arm, ModeIndex, MAX_ARMS};
use crate::parallel::{map_range, pairwise_sum, Parallelism};

/// Probabilities in `[-CLAMP_TOL, 1 + CLAMP_TOL]` are clamped into `[0, 1]`.
pub const CLAMP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    num_arms: usize,
    m: CMatrix,
}

/// Probability together with the number of determinants it took.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermSum {
    pub probability: f64,
    pub terms: u64,
}

fn clamp_probability(p: f64) -> Result<f64> {
    if !p.is_finite() || p < -CLAMP_TOL || p > 1.0 + CLAMP_TOL {
        return Err(FeqcError::Numerical(format!("probability {p} outside [0, 1]")));
    }
    Ok(p.clamp(0.0, 1.0))
}

impl CorrelationMatrix {
    pub fn zeros(num_arms: usize) -> Result<Self> {
        if num_arms == 0 || num_arms > MAX_ARMS {
            return Err(invalid(format!("arm count must be in 1..={MAX_ARMS}")));
        }
        let n = 2 * num_arms;
        Ok(CorrelationMatrix {
            num_arms,
            m: CMatrix::zeros(n, n),
        })
    }

    /// Diagonal 0/1 matrix of a product state of occupied modes.
    pub fn init_from_occupations(occupied: &[ModeIndex], total_arms: usize) -> Result<Self> {
        let mut out = CorrelationMatrix::zeros(total_arms)?;
        for mode in occupied {
            mode.check(total_arms)?;
            let p = mode.position();
            out.m[(p, p)] = r(1.0);
        }
        Ok(out)
    }

    /// Wraps a raw matrix after checking shape and Hermiticity.
    pub fn from_matrix(num_arms: usize, m: CMatrix) -> Result<Self> {
        let n = 2 * num_arms;
        if m.nrows() != n || m.ncols() != n {
            return Err(invalid(format!("expected a {n}x{n} matrix")));
        }
        let out = CorrelationMatrix { num_arms, m };
        if out.hermiticity_defect() > 1e-10 {
            return Err(invalid("correlation matrix is not Hermitian"));
        }
        Ok(out)
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn trace(&self) -> f64 {
        self.m.trace().re
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.m - self.m.adjoint()).camax()
    }

    /// Largest entry of `|M² - M|`; zero for a pure Gaussian state.
    pub fn projector_defect(&self) -> f64 {
        (&self.m * &self.m - &self.m).camax()
    }

    /// Smallest and largest eigenvalue.
    pub fn eigenvalue_range(&self) -> (f64, f64) {
        let eig = self.m.clone().symmetric_eigen();
        let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    /// Adds one electron in `arm` with spinor `(alpha, beta)`; the arm must be empty.
    pub fn add_orbital(&self, arm: usize, alpha: C64, beta: C64) -> Result<Self> {
        check_arm(arm, self.num_arms)?;
        let (u, d) = (ModeIndex::up(arm).position(), ModeIndex::down(arm).position());
        if self.m[(u, u)].re > 1e-12 || self.m[(d, d)].re > 1e-12 {
            return Err(FeqcError::PreconditionViolation(format!("arm {arm} is already occupied")));
        }
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(invalid("spinor must be nonzero and finite"));
        }
        let phi = [(u, alpha / n), (d, beta / n)];
        let mut out = self.clone();
        for (i, a) in phi {
            for (j, b) in phi {
                out.m[(i, j)] += a.conj() * b;
            }
        }
        Ok(out)
    }

    /// Evolution under `a†_μ → Σ_ν U[ν][μ] a†_ν` on the listed modes: `M → Ū M Uᵀ`.
    pub fn evolve(&self, modes: &[ModeIndex], u: &CMatrix) -> Result<Self> {
        let k = modes.len();
        if u.nrows() != k || u.ncols() != k {
            return Err(invalid(format!("unitary is {}x{} but {k} modes were given", u.nrows(), u.ncols())));
        }
        for (i, mode) in modes.iter().enumerate() {
            mode.check(self.num_arms)?;
            if modes[..i].contains(mode) {
                return Err(invalid(format!("duplicate mode {mode}")));
            }
        }
        if !matrix::is_unitary(u, UNITARY_TOL) {
            return Err(invalid("matrix is not unitary"));
        }
        let n = 2 * self.num_arms;
        let mut full = CMatrix::identity(n, n);
        for (a, ma) in modes.iter().enumerate() {
            for (b, mb) in modes.iter().enumerate() {
                full[(ma.position(), mb.position())] = u[(a, b)];
            }
        }
        let m = full.conjugate() * &self.m * full.transpose();
        Ok(CorrelationMatrix {
            num_arms: self.num_arms,
            m,
        })
    }

    pub fn apply_gate(&self, gate: &Gate) -> Result<Self> {
        let pair = |i: usize, j: usize| -> Result<()> {
            check_arm(i, self.num_arms)?;
            check_arm(j, self.num_arms)?;
            if i == j {
                return Err(invalid(format!("arm {i} used twice")));
            }
            Ok(())
        };
        match *gate {
            Gate::BeamSplitter(i, j) => {
                pair(i, j)?;
                let bs = matrix::beam_splitter_matrix();
                self.evolve(&[ModeIndex::up(i), ModeIndex::up(j)], &bs)?
                    .evolve(&[ModeIndex::down(i), ModeIndex::down(j)], &bs)
            }
            Gate::PolarizingBeamSplitter(i, j) => {
                pair(i, j)?;
                self.evolve(&[ModeIndex::down(i), ModeIndex::down(j)], &matrix::exchange_matrix())
            }
            Gate::Swap(i, j) => {
                pair(i, j)?;
                let x = matrix::exchange_matrix();
                self.evolve(&[ModeIndex::up(i), ModeIndex::up(j)], &x)?
                    .evolve(&[ModeIndex::down(i), ModeIndex::down(j)], &x)
            }
            Gate::Rot(arm, axis) => {
                check_arm(arm, self.num_arms)?;
                self.evolve(&[ModeIndex::up(arm), ModeIndex::down(arm)], &axis.matrix())
            }
        }
    }

    /// `⟨n_μ⟩`, clamped to `[0, 1]`.
    pub fn occupation_probability(&self, mode: ModeIndex) -> Result<f64> {
        mode.check(self.num_arms)?;
        let p = mode.position();
        clamp_probability(self.m[(p, p)].re)
    }

    /// Projects mode `μ` onto occupation `outcome` and returns the outcome
    /// probability with the conditional Gaussian state.
    pub fn project_occupation(&self, mode: ModeIndex, outcome: u8) -> Result<(f64, Self)> {
        if outcome > 1 {
            return Err(invalid(format!("occupation outcome {outcome} not in {{0, 1}}")));
        }
        let n_mu = self.occupation_probability(mode)?;
        let prob = if outcome == 1 { n_mu } else { 1.0 - n_mu };
        if prob <= BRANCH_PRUNE {
            return Err(invalid(format!("outcome {outcome} on {mode} has zero probability")));
        }
        let mu = mode.position();
        let n = self.m.nrows();
        let mut m = CMatrix::zeros(n, n);
        // Rank-one update on the complement of μ; row and column μ become
        // δ (outcome 1) or 0 (outcome 0).
        let sign = if outcome == 1 { -1.0 } else { 1.0 };
        for a in 0..n {
            if a == mu {
                continue;
            }
            for b in 0..n {
                if b == mu {
                    continue;
                }
                m[(a, b)] = self.m[(a, b)] + self.m[(a, mu)] * self.m[(mu, b)] * (sign / prob);
            }
        }
        if outcome == 1 {
            m[(mu, mu)] = r(1.0);
        }
        Ok((
            prob,
            CorrelationMatrix {
                num_arms: self.num_arms,
                m,
            },
        ))
    }

    /// `⟨Π_{μ∈A} n_μ⟩ = det(M restricted to A×A)`, clamped to `[0, 1]`.
    pub fn principal_minor_probability(&self, modes: &[ModeIndex]) -> Result<f64> {
        if modes.is_empty() {
            return Err(invalid("mode set must be nonempty"));
        }
        for (i, mode) in modes.iter().enumerate() {
            mode.check(self.num_arms)?;
            if modes[..i].contains(mode) {
                return Err(invalid(format!("duplicate mode {mode}")));
            }
        }
        clamp_probability(self.raw_minor(modes))
    }

    fn raw_minor(&self, modes: &[ModeIndex]) -> f64 {
        let k = modes.len();
        let sub = CMatrix::from_fn(k, k, |i, j| self.m[(modes[i].position(), modes[j].position())]);
        sub.determinant().re
    }

    /// Probability that every arm in `arms` holds exactly one electron.
    ///
    /// Expands `Π_i (n_{i↑} + n_{i↓} - 2 n_{i↑} n_{i↓})` into `3^m` monomials and
    /// evaluates each as a principal minor. The sum is taken in a fixed order.
    pub fn single_occupancy_probability(&self, arms: &[usize], mode: Parallelism) -> Result<TermSum> {
        for (i, arm) in arms.iter().enumerate() {
            check_arm(*arm, self.num_arms)?;
            if arms[..i].contains(arm) {
                return Err(invalid(format!("arm {arm} listed twice")));
            }
        }
        let m = arms.len() as u32;
        let terms = 3u64.pow(m);
        let values = map_range(terms, mode, |index| {
            let mut digits = index;
            let mut coeff = 1.0;
            let mut modes = Vec::with_capacity(2 * arms.len());
            for &arm in arms {
                match digits % 3 {
                    0 => modes.push(ModeIndex::up(arm)),
                    1 => modes.push(ModeIndex::down(arm)),
                    _ => {
                        modes.push(ModeIndex::up(arm));
                        modes.push(ModeIndex::down(arm));
                        coeff *= -2.0;
                    }
                }
                digits /= 3;
            }
            if modes.is_empty() {
                coeff
            } else {
                coeff * self.raw_minor(&modes)
            }
        });
        Ok(TermSum {
            probability: clamp_probability(pairwise_sum(&values))?,
            terms,
        })
    }

    /// Charge distribution `[P(q=0), P(q=1), P(q=2)]` of one arm.
    pub fn charge_probabilities(&self, arm: usize) -> Result<([f64; 3], u64)> {
        check_arm(arm, self.num_arms)?;
        let both = [ModeIndex::up(arm), ModeIndex::down(arm)];
        let p2 = self.principal_minor_probability(&both)?;
        let single = self.single_occupancy_probability(&[arm], Parallelism::Sequential)?;
        let n_up = self.occupation_probability(both[0])?;
        let n_down = self.occupation_probability(both[1])?;
        let p0 = clamp_probability(1.0 - n_up - n_down + p2)?;
        Ok(([p0, single.probability, p2], single.terms + 1))
    }
}

/// State tracked by [`CorrBackend`]. A charge-1 outcome leaves a state with
/// no Gaussian description; any later operation on it fails.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrState {
    Gaussian(CorrelationMatrix),
    NonGaussian { num_arms: usize },
}

impl CorrState {
    pub fn gaussian(&self) -> Result<&CorrelationMatrix> {
        match self {
            CorrState::Gaussian(m) => Ok(m),
            CorrState::NonGaussian { .. } => Err(FeqcError::NonGaussian(
                "the state after a charge-1 outcome is not Gaussian".into(),
            )),
        }
    }
}

/// Correlation-matrix backend with a running count of evaluated determinants.
#[derive(Debug, Default)]
pub struct CorrBackend {
    terms: AtomicU64,
}

impl CorrBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn terms(&self) -> u64 {
        self.terms.load(Ordering::Relaxed)
    }

    fn count(&self, n: u64) {
        self.terms.fetch_add(n, Ordering::Relaxed);
    }

    /// Rejects circuits that need operations outside the Gaussian family.
    pub fn check_circuit(circuit: &Circuit) -> Result<()> {
        for ins in &circuit.instructions {
            match ins {
                Instruction::Prep(Prep::Bell { .. }) => {
                    return Err(FeqcError::NonGaussian("Bell-pair preparation".into()))
                }
                Instruction::Measure { label, kind } => match kind {
                    MeasureKind::Parity(_) => {
                        return Err(FeqcError::NonGaussian(format!("parity measurement '{label}'")))
                    }
                    MeasureKind::Spin(_) => {
                        return Err(FeqcError::NonGaussian(format!("spin measurement '{label}'")))
                    }
                    _ => {}
                },
                _ => {}
            }
        }
        Ok(())
    }
}

fn keep_outcomes(mut outs: Vec<Outcome<CorrState>>) -> Result<Vec<Outcome<CorrState>>> {
    outs.retain(|o| o.probability > BRANCH_PRUNE);
    let total: f64 = outs.iter().map(|o| o.probability).sum();
    if total <= BRANCH_PRUNE {
        return Err(FeqcError::Numerical("measured state has zero norm".into()));
    }
    for o in &mut outs {
        o.probability /= total;
    }
    Ok(outs)
}

impl Backend for CorrBackend {
    type State = CorrState;

    fn name(&self) -> &'static str {
        "corr"
    }

    fn initial_state(&self, arm_count: usize) -> Result<CorrState> {
        Ok(CorrState::Gaussian(CorrelationMatrix::zeros(arm_count)?))
    }

    fn prepare(&self, state: &CorrState, prep: &Prep) -> Result<CorrState> {
        let m = state.gaussian()?;
        match *prep {
            Prep::Electron { arm, spinor } => {
                let (a, b) = spinor.amplitudes();
                Ok(CorrState::Gaussian(m.add_orbital(arm, a, b)?))
            }
            Prep::Bell { .. } => Err(FeqcError::NonGaussian("Bell-pair preparation".into())),
        }
    }

    fn apply(&self, state: &CorrState, gate: &Gate) -> Result<CorrState> {
        Ok(CorrState::Gaussian(state.gaussian()?.apply_gate(gate)?))
    }

    fn measure(&self, state: &CorrState, kind: MeasureKind) -> Result<Vec<Outcome<CorrState>>> {
        let m = state.gaussian()?;
        match kind {
            MeasureKind::Occupation(mode) => {
                let p1 = m.occupation_probability(mode)?;
                self.count(1);
                let mut outs = Vec::new();
                for (value, p) in [(0u8, 1.0 - p1), (1u8, p1)] {
                    if p > BRANCH_PRUNE {
                        let (_, post) = m.project_occupation(mode, value)?;
                        outs.push(Outcome {
                            value,
                            probability: p,
                            state: CorrState::Gaussian(post),
                        });
                    }
                }
                keep_outcomes(outs)
            }
            MeasureKind::Charge(arm) => {
                let (probs, terms) = m.charge_probabilities(arm)?;
                self.count(terms);
                let mut outs = Vec::new();
                if probs[0] > BRANCH_PRUNE {
                    let (_, s) = m.project_occupation(ModeIndex::up(arm), 0)?;
                    let s = if s.occupation_probability(ModeIndex::down(arm))? < 1.0 - BRANCH_PRUNE {
                        s.project_occupation(ModeIndex::down(arm), 0)?.1
                    } else {
                        s
                    };
                    outs.push(Outcome {
                        value: 0,
                        probability: probs[0],
                        state: CorrState::Gaussian(s),
                    });
                }
                if probs[1] > BRANCH_PRUNE {
                    outs.push(Outcome {
                        value: 1,
                        probability: probs[1],
                        state: CorrState::NonGaussian { num_arms: m.num_arms() },
                    });
                }
                if probs[2] > BRANCH_PRUNE {
                    let (_, s) = m.project_occupation(ModeIndex::up(arm), 1)?;
                    let (_, s) = s.project_occupation(ModeIndex::down(arm), 1)?;
                    outs.push(Outcome {
                        value: 2,
                        probability: probs[2],
                        state: CorrState::Gaussian(s),
                    });
                }
                keep_outcomes(outs)
            }
            MeasureKind::Parity(_) => Err(FeqcError::NonGaussian("parity measurement".into())),
            MeasureKind::Spin(_) => Err(FeqcError::NonGaussian("spin measurement".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockState;
    use crate::matrix::c;

    fn split_up_electron() -> CorrelationMatrix {
        CorrelationMatrix::init_from_occupations(&[ModeIndex::up(1)], 2)
            .unwrap()
            .apply_gate(&Gate::BeamSplitter(1, 2))
            .unwrap()
    }

    #[test]
    fn init_examples() {
        let z = CorrelationMatrix::init_from_occupations(&[], 2).unwrap();
        assert_eq!(z.matrix().camax(), 0.0);
        let one = CorrelationMatrix::init_from_occupations(&[ModeIndex::up(1)], 2).unwrap();
        assert_eq!(one.trace(), 1.0);
        assert_eq!(one.matrix()[(0, 0)], r(1.0));
        let all: Vec<_> = (0..4).map(ModeIndex::from_position).collect();
        let full = CorrelationMatrix::init_from_occupations(&all, 2).unwrap();
        assert_eq!(full.matrix(), &CMatrix::identity(4, 4));
    }

    #[test]
    fn evolve_identity_and_beam_splitter() {
        let m = split_up_electron();
        let same = m.evolve(&[ModeIndex::up(1), ModeIndex::up(2)], &matrix::identity(2)).unwrap();
        assert_eq!(same, m);
        let (u1, u2) = (ModeIndex::up(1).position(), ModeIndex::up(2).position());
        assert!((m.matrix()[(u1, u1)].re - 0.5).abs() < 1e-12);
        assert!((m.matrix()[(u2, u2)].re - 0.5).abs() < 1e-12);
        assert!((m.matrix()[(u1, u2)].norm() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn evolve_diagonal_matches_fock() {
        let u = CMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.8), c(0.6, 0.0)]);
        let modes = [ModeIndex::up(1), ModeIndex::down(2)];
        let fock = FockState::vacuum(2)
            .unwrap()
            .create(ModeIndex::up(1))
            .unwrap()
            .apply_single_particle_unitary(&modes, &u)
            .unwrap();
        let corr = CorrelationMatrix::init_from_occupations(&[ModeIndex::up(1)], 2)
            .unwrap()
            .evolve(&modes, &u)
            .unwrap();
        assert!((fock.one_body_density() - corr.matrix()).camax() < 1e-12);
    }

    #[test]
    fn projection_examples() {
        let def = CorrelationMatrix::init_from_occupations(&[ModeIndex::up(1)], 1).unwrap();
        let (p, post) = def.project_occupation(ModeIndex::up(1), 1).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(post, def);
        assert!(def.project_occupation(ModeIndex::up(1), 0).is_err());

        let m = split_up_electron();
        let (p, post) = m.project_occupation(ModeIndex::up(1), 1).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!((post.occupation_probability(ModeIndex::up(1)).unwrap() - 1.0).abs() < 1e-12);
        assert!(post.occupation_probability(ModeIndex::up(2)).unwrap().abs() < 1e-12);
        let (_, post0) = m.project_occupation(ModeIndex::up(1), 0).unwrap();
        assert!((post0.occupation_probability(ModeIndex::up(2)).unwrap() - 1.0).abs() < 1e-12);
        assert!(post.projector_defect() < 1e-12 && post0.projector_defect() < 1e-12);
    }

    #[test]
    fn principal_minor_examples() {
        let m = split_up_electron();
        assert!((m.principal_minor_probability(&[ModeIndex::up(2)]).unwrap() - 0.5).abs() < 1e-12);
        let prod = CorrelationMatrix::init_from_occupations(&[ModeIndex::up(1), ModeIndex::down(2)], 2).unwrap();
        assert_eq!(
            prod.principal_minor_probability(&[ModeIndex::up(1), ModeIndex::down(2)]).unwrap(),
            1.0
        );
        assert!(prod.principal_minor_probability(&[]).is_err());
        assert!(prod.principal_minor_probability(&[ModeIndex::up(1), ModeIndex::up(1)]).is_err());
    }

    #[test]
    fn gaussian_bunching_probability() {
        // ↑ in arm 1 and ↓ in arm 2 through a beam splitter: the two spins
        // scatter independently, so P(q1 = 2) = 1/4 from both backends.
        let fock = FockState::vacuum(2)
            .unwrap()
            .prepare_spin(1, r(1.0), r(0.0))
            .unwrap()
            .prepare_spin(2, r(0.0), r(1.0))
            .unwrap()
            .beam_splitter(1, 2)
            .unwrap();
        let corr = CorrelationMatrix::from_matrix(2, fock.one_body_density()).unwrap();
        let both = [ModeIndex::up(1), ModeIndex::down(1)];
        let p2 = corr.principal_minor_probability(&both).unwrap();
        let q2 = fock.amplitudes().filter(|(k, _)| k.arm_charge(1) == 2).map(|(_, a)| a.norm_sqr()).sum::<f64>();
        assert!((p2 - 0.25).abs() < 1e-12 && (p2 - q2).abs() < 1e-12);
    }

    #[test]
    fn entangled_states_have_no_gaussian_description() {
        // The bunched singlet has M = 1/2 but P(q1 = 2) = 1/2, not det = 1/4.
        let fock = FockState::vacuum(2).unwrap().prepare_bell(0, 1, 2).unwrap().beam_splitter(1, 2).unwrap();
        let corr = CorrelationMatrix::from_matrix(2, fock.one_body_density()).unwrap();
        assert!((corr.matrix() - CMatrix::identity(4, 4) * r(0.5)).camax() < 1e-12);
        assert!(corr.projector_defect() > 0.2);
        let det = corr.principal_minor_probability(&[ModeIndex::up(1), ModeIndex::down(1)]).unwrap();
        assert!((det - 0.25).abs() < 1e-12);
    }

    #[test]
    fn single_occupancy_examples() {
        let up = CorrelationMatrix::init_from_occupations(&[ModeIndex::up(1)], 1).unwrap();
        let s = up.single_occupancy_probability(&[1], Parallelism::Sequential).unwrap();
        assert_eq!(s.probability, 1.0);
        assert_eq!(s.terms, 3);
        let two = CorrelationMatrix::init_from_occupations(&[ModeIndex::up(1), ModeIndex::down(2)], 2).unwrap();
        let s = two.single_occupancy_probability(&[1, 2], Parallelism::Auto).unwrap();
        assert!((s.probability - 1.0).abs() < 1e-12);
        assert_eq!(s.terms, 9);
        assert!(two.single_occupancy_probability(&[1, 1], Parallelism::Auto).is_err());
    }

    #[test]
    fn charge_distribution_sums_to_one() {
        let m = CorrelationMatrix::init_from_occupations(&[ModeIndex::up(1), ModeIndex::down(2)], 2)
            .unwrap()
            .apply_gate(&Gate::BeamSplitter(1, 2))
            .unwrap();
        let (p, _) = m.charge_probabilities(1).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((p[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn backend_rejects_non_gaussian_steps() {
        let b = CorrBackend::new();
        let s = b.initial_state(2).unwrap();
        assert!(matches!(
            b.measure(&s, MeasureKind::Parity(1)),
            Err(FeqcError::NonGaussian(_))
        ));
        let ng = CorrState::NonGaussian { num_arms: 2 };
        assert!(matches!(b.apply(&ng, &Gate::BeamSplitter(1, 2)), Err(FeqcError::NonGaussian(_))));
        let c = Circuit::new(2).bell(0, 1, 2);
        assert!(CorrBackend::check_circuit(&c).is_err());
    }
}
