#![allow(dead_code)]

use feqc::circuit::{Axis, Circuit, Gate, MeasureKind, Spinor};
use feqc::matrix::{CMatrix, C64};
use feqc::ModeIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_complex(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random unit vector of length `n`.
pub fn random_state(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| gaussian_complex(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

pub fn random_spinor(rng: &mut impl Rng) -> (C64, C64) {
    let v = random_state(rng, 2);
    (v[0], v[1])
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary(rng: &mut impl Rng, n: usize) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| gaussian_complex(rng));
    let (q, r) = g.qr().unpack();
    let phases = CMatrix::from_fn(n, n, |i, j| if i == j { r[(i, i)] / r[(i, i)].norm() } else { C64::new(0.0, 0.0) });
    q * phases
}

/// Random valid circuit on 2..=4 arms. With `gaussian`, only electron preps,
/// bilinear gates, occupation measurements and one final charge measurement
/// appear, so both backends can run it.
pub fn random_circuit(rng: &mut impl Rng, gaussian: bool) -> Circuit {
    let n = rng.random_range(2..=4usize);
    let mut c = Circuit::new(n);
    let mut free: Vec<usize> = (1..=n).collect();
    if !gaussian && rng.random_bool(0.5) {
        c = c.bell(rng.random_range(0..4), 1, 2);
        free.retain(|a| *a > 2);
    }
    for arm in free.clone() {
        if rng.random_bool(0.6) || c.instructions.is_empty() {
            let (a, b) = random_spinor(rng);
            c = c.electron(arm, Spinor::Custom(a, b));
        }
    }
    let mut labels: Vec<(String, u8)> = Vec::new();
    for step in 0..rng.random_range(4..=8) {
        let i = rng.random_range(1..=n);
        let mut j = rng.random_range(1..n);
        if j >= i {
            j += 1;
        }
        let gate = match rng.random_range(0..4) {
            0 => Gate::BeamSplitter(i, j),
            1 => Gate::PolarizingBeamSplitter(i, j),
            2 => Gate::Swap(i, j),
            _ => Gate::Rot(i, [Axis::X, Axis::Y, Axis::Z, Axis::H][rng.random_range(0..4)]),
        };
        match rng.random_range(0..5) {
            0 => {
                let label = format!("m{step}");
                let kind = match (gaussian, rng.random_range(0..3)) {
                    (false, 1) => MeasureKind::Charge(i),
                    (false, 2) => MeasureKind::Parity(i),
                    _ => MeasureKind::Occupation(ModeIndex::from_position(rng.random_range(0..2 * n))),
                };
                c = c.measure(&label, kind);
                labels.push((label, kind.max_outcome()));
            }
            1 if !labels.is_empty() => {
                let (label, max) = &labels[rng.random_range(0..labels.len())];
                c = c.when(label, rng.random_range(0..=*max), gate);
            }
            _ => c = c.gate(gate),
        }
    }
    c.measure("q", MeasureKind::Charge(rng.random_range(1..=n)))
}
