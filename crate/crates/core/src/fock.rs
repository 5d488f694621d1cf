//! Exact second-quantized states of spinful fermions on a fixed set of arms.
//!
//! A [`FockState`] is a sparse map from occupation keys to complex amplitudes.
//! Basis key `|n⟩` is the product of creation operators of its occupied modes,
//! taken in ascending mode order, acting on the vacuum. Every bilinear
//! operation below is implemented by substituting each creation operator of a
//! key and re-normal-ordering, so all signs come from [`OccupationKey::sign_at`].

use std::collections::BTreeMap;

use crate::error::{invalid, precondition, FeqcError, Result};
use crate::matrix::{self, c, r, CMatrix, C64, UNITARY_TOL};
use crate::mode::{arm_mask, check_arm, ModeIndex, OccupationKey, Spin, MAX_ARMS};

/// Amplitudes below this magnitude are dropped.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

/// Tolerance on the norm of states handed out by public operations.
pub const NORM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    num_arms: usize,
    amps: BTreeMap<OccupationKey, C64>,
}

/// Spin amplitudes `(↑↑, ↑↓, ↓↑, ↓↓)` of the four Bell states, unnormalized.
pub fn bell_coefficients(k: u8) -> Result<[C64; 4]> {
    let (o, z, m) = (r(1.0), r(0.0), r(-1.0));
    Ok(match k {
        0 => [z, o, m, z],
        1 => [z, o, o, z],
        2 => [o, z, z, o],
        3 => [o, z, z, m],
        _ => return Err(invalid(format!("Bell index {k} not in 0..=3"))),
    })
}

impl FockState {
    pub fn vacuum(num_arms: usize) -> Result<Self> {
        let mut state = FockState::zero(num_arms)?;
        state.amps.insert(OccupationKey(0), r(1.0));
        Ok(state)
    }

    /// The zero vector (not a physical state).
    pub fn zero(num_arms: usize) -> Result<Self> {
        if num_arms == 0 {
            return Err(invalid("arm count must be at least 1"));
        }
        if num_arms > MAX_ARMS {
            return Err(invalid(format!("at most {MAX_ARMS} arms supported")));
        }
        Ok(FockState {
            num_arms,
            amps: BTreeMap::new(),
        })
    }

    /// Builds a state from raw amplitudes. The result is not renormalized.
    pub fn from_amplitudes(
        num_arms: usize,
        entries: impl IntoIterator<Item = (OccupationKey, C64)>,
    ) -> Result<Self> {
        let mut state = FockState::zero(num_arms)?;
        let width_mask = if 2 * num_arms >= 64 {
            u64::MAX
        } else {
            (1u64 << (2 * num_arms)) - 1
        };
        for (key, amp) in entries {
            if key.0 & !width_mask != 0 {
                return Err(invalid(format!(
                    "key {:#x} wider than {num_arms} arms",
                    key.0
                )));
            }
            *state.amps.entry(key).or_default() += amp;
        }
        state.prune();
        Ok(state)
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitude(&self, key: OccupationKey) -> C64 {
        self.amps.get(&key).copied().unwrap_or_default()
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = (OccupationKey, C64)> + '_ {
        self.amps.iter().map(|(k, a)| (*k, *a))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.values().map(|a| a.norm_sqr()).sum()
    }

    /// Entries as `(bitstring, amplitude)`, sorted by bitstring.
    pub fn entries(&self) -> Vec<(String, C64)> {
        let mut out: Vec<_> = self
            .amps
            .iter()
            .map(|(k, a)| (k.to_bitstring(self.num_arms), *a))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    fn prune(&mut self) {
        self.amps.retain(|_, a| a.norm() >= PRUNE_THRESHOLD);
    }

    pub fn scaled(&self, factor: C64) -> FockState {
        let mut out = self.clone();
        for a in out.amps.values_mut() {
            *a *= factor;
        }
        out.prune();
        out
    }

    pub fn normalized(&self) -> Result<FockState> {
        let n = self.norm_sqr().sqrt();
        if n < PRUNE_THRESHOLD {
            return Err(FeqcError::Numerical("cannot normalize the zero vector".into()));
        }
        Ok(self.scaled(r(1.0 / n)))
    }

    /// Adds `factor * other` to this vector.
    pub fn add_scaled(&mut self, other: &FockState, factor: C64) -> Result<()> {
        self.check_same_arms(other)?;
        for (k, a) in &other.amps {
            *self.amps.entry(*k).or_default() += a * factor;
        }
        self.prune();
        Ok(())
    }

    fn check_same_arms(&self, other: &FockState) -> Result<()> {
        if self.num_arms != other.num_arms {
            return Err(invalid(format!(
                "arm counts differ: {} vs {}",
                self.num_arms, other.num_arms
            )));
        }
        Ok(())
    }

    pub fn check_mode(&self, mode: ModeIndex) -> Result<()> {
        mode.check(self.num_arms)
    }

    pub fn check_arm(&self, arm: usize) -> Result<()> {
        check_arm(arm, self.num_arms)
    }

    /// Raw `a†` on `mode`; occupied keys vanish. Not renormalized.
    pub fn create(&self, mode: ModeIndex) -> Result<FockState> {
        self.apply_creation(&[(mode, r(1.0))])
    }

    /// Raw `a` on `mode`; unoccupied keys vanish. Not renormalized.
    pub fn annihilate(&self, mode: ModeIndex) -> Result<FockState> {
        self.check_mode(mode)?;
        let mut out = FockState::zero(self.num_arms)?;
        for (k, a) in &self.amps {
            if k.is_occupied(mode) {
                let nk = OccupationKey(k.0 & !mode.bit());
                *out.amps.entry(nk).or_default() += a * k.sign_at(mode);
            }
        }
        out.prune();
        Ok(out)
    }

    /// Raw application of `Σ coeff · a†_mode`.
    pub fn apply_creation(&self, terms: &[(ModeIndex, C64)]) -> Result<FockState> {
        for (mode, _) in terms {
            self.check_mode(*mode)?;
        }
        let mut out = FockState::zero(self.num_arms)?;
        for (k, a) in &self.amps {
            for (mode, coeff) in terms {
                if !k.is_occupied(*mode) {
                    let nk = OccupationKey(k.0 | mode.bit());
                    *out.amps.entry(nk).or_default() += a * coeff * k.sign_at(*mode);
                }
            }
        }
        out.prune();
        Ok(out)
    }

    /// Arms that are occupied in at least one key.
    fn require_empty_arm(&self, arm: usize) -> Result<()> {
        self.check_arm(arm)?;
        let mask = arm_mask(arm);
        if self.amps.keys().any(|k| k.0 & mask != 0) {
            return Err(precondition(format!("arm {arm} is already occupied")));
        }
        Ok(())
    }

    /// Fails unless every key holds exactly one electron in `arm`.
    pub fn require_single_occupancy(&self, arm: usize) -> Result<()> {
        self.check_arm(arm)?;
        if self.amps.keys().any(|k| k.arm_charge(arm) != 1) {
            return Err(precondition(format!(
                "arm {arm} does not hold exactly one electron in every component"
            )));
        }
        Ok(())
    }

    /// Adds one electron in `arm` with spinor `(alpha, beta)`, normalized.
    pub fn prepare_spin(&self, arm: usize, alpha: C64, beta: C64) -> Result<FockState> {
        self.require_empty_arm(arm)?;
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(invalid("spinor must be nonzero and finite"));
        }
        self.apply_creation(&[
            (ModeIndex::up(arm), alpha / n),
            (ModeIndex::down(arm), beta / n),
        ])?
        .normalized()
    }

    /// Adds two electrons `Σ coeffs[2s+s'] a†_{arm_a,s} a†_{arm_b,s'}`, normalized.
    pub fn prepare_two_spin(&self, arm_a: usize, arm_b: usize, coeffs: [C64; 4]) -> Result<FockState> {
        if arm_a == arm_b {
            return Err(invalid("two-electron preparation needs distinct arms"));
        }
        self.require_empty_arm(arm_a)?;
        self.require_empty_arm(arm_b)?;
        if coeffs.iter().map(|x| x.norm_sqr()).sum::<f64>() == 0.0 {
            return Err(invalid("two-electron coefficients are all zero"));
        }
        let mut out = FockState::zero(self.num_arms)?;
        for (idx, coeff) in coeffs.iter().enumerate() {
            if *coeff == C64::default() {
                continue;
            }
            let sa = Spin::from_bit((idx >> 1) as u8);
            let sb = Spin::from_bit((idx & 1) as u8);
            let term = self
                .create(ModeIndex::new(arm_b, sb))?
                .create(ModeIndex::new(arm_a, sa))?;
            out.add_scaled(&term, *coeff)?;
        }
        out.normalized()
    }

    /// Adds the Bell state `|Ψ_k⟩` with the first spin in `arm_a`.
    pub fn prepare_bell(&self, k: u8, arm_a: usize, arm_b: usize) -> Result<FockState> {
        let coeffs = bell_coefficients(k)?;
        self.prepare_two_spin(arm_a, arm_b, coeffs)
    }

    /// Applies `a†_μ → Σ_ν U[ν][μ] a†_ν` on the listed modes.
    pub fn apply_single_particle_unitary(&self, modes: &[ModeIndex], u: &CMatrix) -> Result<FockState> {
        let m = modes.len();
        if u.nrows() != m || u.ncols() != m {
            return Err(invalid(format!(
                "unitary is {}x{} but {m} modes were given",
                u.nrows(),
                u.ncols()
            )));
        }
        for (i, mode) in modes.iter().enumerate() {
            self.check_mode(*mode)?;
            if modes[..i].contains(mode) {
                return Err(invalid(format!("duplicate mode {mode}")));
            }
        }
        if !matrix::is_unitary(u, UNITARY_TOL) {
            return Err(invalid("matrix is not unitary"));
        }

        let mut images: Vec<Option<Vec<(ModeIndex, C64)>>> = vec![None; 2 * self.num_arms];
        for (j, mode) in modes.iter().enumerate() {
            let image = (0..m)
                .filter(|&i| u[(i, j)] != C64::default())
                .map(|i| (modes[i], u[(i, j)]))
                .collect();
            images[mode.position()] = Some(image);
        }

        let mut out: BTreeMap<OccupationKey, C64> = BTreeMap::new();
        for (key, amp) in &self.amps {
            let occupied: Vec<ModeIndex> = key.modes().collect();
            // Operators act right to left: the largest mode is applied first.
            let mut partial: BTreeMap<u64, C64> = BTreeMap::from([(0u64, *amp)]);
            for mu in occupied.iter().rev() {
                let identity = [(*mu, r(1.0))];
                let image: &[(ModeIndex, C64)] = match &images[mu.position()] {
                    Some(img) => img,
                    None => &identity,
                };
                let mut next: BTreeMap<u64, C64> = BTreeMap::new();
                for (bits, coeff) in &partial {
                    let k = OccupationKey(*bits);
                    for (nu, weight) in image {
                        if k.is_occupied(*nu) {
                            continue;
                        }
                        *next.entry(bits | nu.bit()).or_default() += coeff * weight * k.sign_at(*nu);
                    }
                }
                partial = next;
            }
            for (bits, a) in partial {
                *out.entry(OccupationKey(bits)).or_default() += a;
            }
        }
        let mut state = FockState {
            num_arms: self.num_arms,
            amps: out,
        };
        state.prune();
        Ok(state)
    }

    fn check_arm_pair(&self, arm_i: usize, arm_j: usize) -> Result<()> {
        self.check_arm(arm_i)?;
        self.check_arm(arm_j)?;
        if arm_i == arm_j {
            return Err(invalid(format!("arm {arm_i} used twice")));
        }
        Ok(())
    }

    /// 50/50 beam splitter between two arms, applied to each spin separately.
    pub fn beam_splitter(&self, arm_i: usize, arm_j: usize) -> Result<FockState> {
        self.check_arm_pair(arm_i, arm_j)?;
        let bs = matrix::beam_splitter_matrix();
        self.apply_single_particle_unitary(&[ModeIndex::up(arm_i), ModeIndex::up(arm_j)], &bs)?
            .apply_single_particle_unitary(&[ModeIndex::down(arm_i), ModeIndex::down(arm_j)], &bs)
    }

    /// Transmits spin up, exchanges the spin-down content of the two arms.
    pub fn polarizing_beam_splitter(&self, arm_i: usize, arm_j: usize) -> Result<FockState> {
        self.check_arm_pair(arm_i, arm_j)?;
        self.apply_single_particle_unitary(
            &[ModeIndex::down(arm_i), ModeIndex::down(arm_j)],
            &matrix::exchange_matrix(),
        )
    }

    /// Exchanges the full content of two arms (a mirror crossing).
    pub fn swap_arms(&self, arm_i: usize, arm_j: usize) -> Result<FockState> {
        self.check_arm_pair(arm_i, arm_j)?;
        let x = matrix::exchange_matrix();
        self.apply_single_particle_unitary(&[ModeIndex::up(arm_i), ModeIndex::up(arm_j)], &x)?
            .apply_single_particle_unitary(&[ModeIndex::down(arm_i), ModeIndex::down(arm_j)], &x)
    }

    /// Applies a 2x2 unitary in the `(up, down)` basis of one arm.
    pub fn spin_rotation(&self, arm: usize, u2: &CMatrix) -> Result<FockState> {
        self.check_arm(arm)?;
        self.apply_single_particle_unitary(&[ModeIndex::up(arm), ModeIndex::down(arm)], u2)
    }

    pub fn inner(&self, other: &FockState) -> Result<C64> {
        self.check_same_arms(other)?;
        Ok(self
            .amps
            .iter()
            .filter_map(|(k, a)| other.amps.get(k).map(|b| a.conj() * b))
            .sum())
    }

    /// `|⟨a|b⟩|²`.
    pub fn fidelity(&self, other: &FockState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn occupation_expectation(&self, mode: ModeIndex) -> Result<f64> {
        self.check_mode(mode)?;
        Ok(self
            .amps
            .iter()
            .filter(|(k, _)| k.is_occupied(mode))
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Matrix of two-point functions `⟨a†_μ a_ν⟩` in mode order.
    pub fn one_body_density(&self) -> CMatrix {
        let n = 2 * self.num_arms;
        let mut m = CMatrix::zeros(n, n);
        for (key, amp) in &self.amps {
            for nu in key.modes() {
                let removed = OccupationKey(key.0 & !nu.bit());
                let s1 = key.sign_at(nu);
                for mu_pos in 0..n {
                    let mu = ModeIndex::from_position(mu_pos);
                    if removed.is_occupied(mu) {
                        continue;
                    }
                    let target = OccupationKey(removed.0 | mu.bit());
                    if let Some(b) = self.amps.get(&target) {
                        let s2 = removed.sign_at(mu);
                        m[(mu_pos, nu.position())] += b.conj() * amp * (s1 * s2);
                    }
                }
            }
        }
        m
    }

    /// Spin density matrix `ρ[s][s'] = ⟨a†_{s'} a_s⟩` of a singly occupied arm.
    pub fn arm_spin_density(&self, arm: usize) -> Result<CMatrix> {
        self.require_single_occupancy(arm)?;
        let full = self.one_body_density();
        let (u, d) = (ModeIndex::up(arm).position(), ModeIndex::down(arm).position());
        let idx = [u, d];
        let mut rho = CMatrix::zeros(2, 2);
        for s in 0..2 {
            for t in 0..2 {
                rho[(s, t)] = full[(idx[t], idx[s])];
            }
        }
        Ok(rho)
    }

    /// `⟨φ|ρ|φ⟩` for the spin of a singly occupied arm against a normalized spinor.
    pub fn arm_spin_fidelity(&self, arm: usize, spinor: [C64; 2]) -> Result<f64> {
        let rho = self.arm_spin_density(arm)?;
        let n = (spinor[0].norm_sqr() + spinor[1].norm_sqr()).sqrt();
        let phi = [spinor[0] / n, spinor[1] / n];
        let mut f = c(0.0, 0.0);
        for s in 0..2 {
            for t in 0..2 {
                f += phi[s].conj() * rho[(s, t)] * phi[t];
            }
        }
        Ok(f.re)
    }

    /// Ideal CNOT on spin qubits (up = 0, down = 1): flips the target spin
    /// wherever the control spin is down.
    pub fn logical_cnot(&self, control: usize, target: usize) -> Result<FockState> {
        self.check_arm_pair(control, target)?;
        self.require_single_occupancy(control)?;
        self.require_single_occupancy(target)?;
        let flip = arm_mask(target);
        let out = self.amps.iter().map(|(k, a)| {
            if k.is_occupied(ModeIndex::down(control)) {
                (OccupationKey(k.0 ^ flip), *a)
            } else {
                (*k, *a)
            }
        });
        FockState::from_amplitudes(self.num_arms, out)
    }

    pub fn total_particles(&self) -> Option<u32> {
        let mut counts = self.amps.keys().map(|k| k.particle_count());
        let first = counts.next()?;
        counts.all(|n| n == first).then_some(first)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{hadamard, identity, sigma_x, sigma_z};

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn key(modes: &[ModeIndex]) -> OccupationKey {
        OccupationKey(modes.iter().fold(0, |acc, m| acc | m.bit()))
    }

    #[test]
    fn vacuum_has_single_entry() {
        let v = FockState::vacuum(2).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v.amplitude(OccupationKey(0)), r(1.0));
        assert_eq!(v.entries()[0].0, "0000");
        assert_eq!(FockState::vacuum(1).unwrap().entries()[0].0.len(), 2);
        assert_eq!(FockState::vacuum(4).unwrap().total_particles(), Some(0));
        assert!(matches!(FockState::vacuum(0), Err(FeqcError::InvalidArgument(_))));
    }

    #[test]
    fn create_respects_exclusion_and_order() {
        let v = FockState::vacuum(1).unwrap();
        let one = v.create(ModeIndex::up(1)).unwrap();
        assert_eq!(one.entries(), vec![("10".to_string(), r(1.0))]);
        assert!(one.create(ModeIndex::up(1)).unwrap().is_empty());

        let du = v.create(ModeIndex::down(1)).unwrap().create(ModeIndex::up(1)).unwrap();
        let ud = v.create(ModeIndex::up(1)).unwrap().create(ModeIndex::down(1)).unwrap();
        let full = OccupationKey(0b11);
        assert_eq!(du.amplitude(full), -ud.amplitude(full));
        assert_eq!(du.amplitude(full).norm(), 1.0);
        assert!(v.create(ModeIndex::up(2)).is_err());
    }

    #[test]
    fn annihilate_undoes_create() {
        let s = FockState::vacuum(2)
            .unwrap()
            .create(ModeIndex::down(2))
            .unwrap()
            .create(ModeIndex::up(1))
            .unwrap();
        let back = s.annihilate(ModeIndex::up(1)).unwrap();
        assert_eq!(back.amplitude(key(&[ModeIndex::down(2)])), r(1.0));
        assert!(s.annihilate(ModeIndex::up(2)).unwrap().is_empty());
    }

    #[test]
    fn prepare_spin_normalizes() {
        let v = FockState::vacuum(1).unwrap();
        let up = v.prepare_spin(1, r(1.0), r(0.0)).unwrap();
        assert_eq!(up.amplitude(key(&[ModeIndex::up(1)])), r(1.0));
        let plus = v.prepare_spin(1, r(1.0), r(1.0)).unwrap();
        assert!((plus.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(close(plus.amplitude(key(&[ModeIndex::down(1)])), r(H)));
        let s = FockState::vacuum(2).unwrap().prepare_spin(2, r(0.6), c(0.0, 0.8)).unwrap();
        assert!((s.occupation_expectation(ModeIndex::up(2)).unwrap() - 0.36).abs() < 1e-12);
        assert!(matches!(
            up.prepare_spin(1, r(1.0), r(0.0)),
            Err(FeqcError::PreconditionViolation(_))
        ));
        assert!(v.prepare_spin(1, r(0.0), r(0.0)).is_err());
    }

    #[test]
    fn bell_states_follow_sign_conventions() {
        let v = FockState::vacuum(2).unwrap();
        let psi0 = v.prepare_bell(0, 1, 2).unwrap();
        let a = psi0.amplitude(key(&[ModeIndex::up(1), ModeIndex::down(2)]));
        let b = psi0.amplitude(key(&[ModeIndex::down(1), ModeIndex::up(2)]));
        assert!(close(a, r(H)) && close(b, r(-H)));

        let psi2 = v.prepare_bell(2, 1, 2).unwrap();
        let a = psi2.amplitude(key(&[ModeIndex::up(1), ModeIndex::up(2)]));
        let b = psi2.amplitude(key(&[ModeIndex::down(1), ModeIndex::down(2)]));
        assert!(close(a, b) && close(a, r(H)));

        let bells: Vec<_> = (0..4).map(|k| v.prepare_bell(k, 1, 2).unwrap()).collect();
        for (j, x) in bells.iter().enumerate() {
            for (k, y) in bells.iter().enumerate() {
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((x.fidelity(y).unwrap() - expect).abs() < 1e-12);
            }
        }
        assert!(v.prepare_bell(4, 1, 2).is_err());
        assert!(v.prepare_bell(0, 1, 1).is_err());
    }

    #[test]
    fn identity_unitary_is_noop() {
        let s = FockState::vacuum(2).unwrap().prepare_bell(1, 1, 2).unwrap();
        let modes = [ModeIndex::up(1), ModeIndex::down(1), ModeIndex::up(2)];
        let out = s.apply_single_particle_unitary(&modes, &identity(3)).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn one_particle_sector_is_the_matrix() {
        let u = CMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.8), c(0.6, 0.0)]);
        let s = FockState::vacuum(2).unwrap().create(ModeIndex::up(1)).unwrap();
        let modes = [ModeIndex::up(1), ModeIndex::up(2)];
        let out = s.apply_single_particle_unitary(&modes, &u).unwrap();
        assert!(close(out.amplitude(key(&[ModeIndex::up(1)])), u[(0, 0)]));
        assert!(close(out.amplitude(key(&[ModeIndex::up(2)])), u[(1, 0)]));
    }

    #[test]
    fn filled_pair_picks_up_determinant() {
        let u = CMatrix::from_row_slice(2, 2, &[c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.8), c(0.6, 0.0)]);
        let modes = [ModeIndex::up(1), ModeIndex::up(2)];
        let both = key(&modes);
        let s = FockState::from_amplitudes(2, [(both, r(1.0))]).unwrap();
        let out = s.apply_single_particle_unitary(&modes, &u).unwrap();
        // a†1 a†2 -> (u00 a†1 + u10 a†2)(u01 a†1 + u11 a†2) = (u00 u11 - u10 u01) a†1 a†2
        let brute = u[(0, 0)] * u[(1, 1)] - u[(1, 0)] * u[(0, 1)];
        assert!(close(out.amplitude(both), brute));
        assert!(close(out.amplitude(both), u.determinant()));
    }

    #[test]
    fn unitary_argument_checks() {
        let s = FockState::vacuum(2).unwrap();
        let modes = [ModeIndex::up(1), ModeIndex::up(1)];
        assert!(s.apply_single_particle_unitary(&modes, &identity(2)).is_err());
        let bad = CMatrix::from_element(2, 2, r(1.0));
        let modes = [ModeIndex::up(1), ModeIndex::up(2)];
        assert!(s.apply_single_particle_unitary(&modes, &bad).is_err());
        assert!(s.apply_single_particle_unitary(&modes, &identity(3)).is_err());
        assert!(s.beam_splitter(1, 1).is_err());
        assert!(s.beam_splitter(1, 3).is_err());
    }

    #[test]
    fn beam_splitter_bunches_singlet_and_negates_triplets() {
        let v = FockState::vacuum(2).unwrap();
        let psi0 = v.prepare_bell(0, 1, 2).unwrap().beam_splitter(1, 2).unwrap();
        for (k, _) in psi0.amplitudes() {
            assert_ne!(k.arm_charge(1), 1);
        }
        for k in 1..4 {
            let psi = v.prepare_bell(k, 1, 2).unwrap();
            let out = psi.beam_splitter(1, 2).unwrap();
            let overlap = psi.inner(&out).unwrap();
            assert!(close(overlap, r(-1.0)), "Ψ{k}: {overlap}");
        }
    }

    #[test]
    fn beam_splitter_splits_single_electron() {
        let s = FockState::vacuum(2).unwrap().create(ModeIndex::up(1)).unwrap();
        let out = s.beam_splitter(1, 2).unwrap();
        assert!(close(out.amplitude(key(&[ModeIndex::up(1)])), r(H)));
        assert!(close(out.amplitude(key(&[ModeIndex::up(2)])), r(H)));
    }

    #[test]
    fn polarizing_beam_splitter_routes_by_spin() {
        let v = FockState::vacuum(2).unwrap();
        let ud = v.prepare_spin(1, r(1.0), r(0.0)).unwrap().prepare_spin(2, r(0.0), r(1.0)).unwrap();
        let out = ud.polarizing_beam_splitter(1, 2).unwrap();
        assert!(out.amplitudes().all(|(k, _)| k.arm_charge(1) == 2));
        let uu = v.prepare_spin(1, r(1.0), r(0.0)).unwrap().prepare_spin(2, r(1.0), r(0.0)).unwrap();
        assert_eq!(uu.polarizing_beam_splitter(1, 2).unwrap(), uu);
        let twice = ud.polarizing_beam_splitter(1, 2).unwrap().polarizing_beam_splitter(1, 2).unwrap();
        assert!((twice.fidelity(&ud).unwrap() - 1.0).abs() < 1e-12);
        assert!(close(twice.inner(&ud).unwrap(), r(1.0)));
    }

    #[test]
    fn spin_rotations_relate_bell_states() {
        let v = FockState::vacuum(2).unwrap();
        let psi = |k| v.prepare_bell(k, 1, 2).unwrap();
        let z1 = psi(1).spin_rotation(2, &sigma_z()).unwrap();
        assert!(close(z1.inner(&psi(0)).unwrap(), r(-1.0)));
        let xz2 = psi(2).spin_rotation(2, &(sigma_x() * sigma_z())).unwrap();
        assert!(close(xz2.inner(&psi(0)).unwrap(), r(1.0)));
        let hh = psi(3).spin_rotation(1, &hadamard()).unwrap().spin_rotation(1, &hadamard()).unwrap();
        assert!(close(hh.inner(&psi(3)).unwrap(), r(1.0)));
    }

    #[test]
    fn fidelity_basics() {
        let v = FockState::vacuum(2).unwrap();
        let x = v.prepare_spin(1, c(0.3, 0.1), c(-0.2, 0.9)).unwrap();
        assert!((x.fidelity(&x).unwrap() - 1.0).abs() < 1e-12);
        let phased = x.scaled(C64::from_polar(1.0, 0.7));
        assert!((x.fidelity(&phased).unwrap() - 1.0).abs() < 1e-12);
        let p0 = v.prepare_bell(0, 1, 2).unwrap();
        let p1 = v.prepare_bell(1, 1, 2).unwrap();
        assert!(p0.fidelity(&p1).unwrap().abs() < 1e-12);
        assert!(x.fidelity(&FockState::vacuum(3).unwrap()).is_err());
    }

    #[test]
    fn spin_density_of_product_state() {
        let s = FockState::vacuum(2)
            .unwrap()
            .prepare_spin(1, r(1.0), r(0.0))
            .unwrap()
            .prepare_spin(2, r(0.6), c(0.0, 0.8))
            .unwrap();
        let rho = s.arm_spin_density(2).unwrap();
        assert!(close(rho[(0, 0)], r(0.36)));
        assert!(close(rho[(1, 0)], c(0.0, 0.48)));
        assert!((s.arm_spin_fidelity(2, [r(0.6), c(0.0, 0.8)]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn logical_cnot_flips_on_down_control() {
        let v = FockState::vacuum(2).unwrap();
        let s = v.prepare_spin(1, r(0.0), r(1.0)).unwrap().prepare_spin(2, r(1.0), r(0.0)).unwrap();
        let out = s.logical_cnot(1, 2).unwrap();
        let expect = v.prepare_spin(1, r(0.0), r(1.0)).unwrap().prepare_spin(2, r(0.0), r(1.0)).unwrap();
        assert!(close(out.inner(&expect).unwrap(), r(1.0)));
    }
}
