//! Mode labels and occupation keys.
//!
//! A mode is an `(arm, spin)` pair. Modes are totally ordered by arm first and
//! spin second (`Up < Down`), and this order is the only place where fermionic
//! signs come from: applying `a†` to a mode picks up `(-1)^k`, where `k` is the
//! number of occupied modes strictly before it.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Upper bound on the arm count; keys are stored in a `u64`.
pub const MAX_ARMS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    /// Computational-basis bit: up is 0, down is 1.
    pub fn bit(self) -> u8 {
        match self {
            Spin::Up => 0,
            Spin::Down => 1,
        }
    }

    pub fn from_bit(bit: u8) -> Spin {
        if bit & 1 == 0 {
            Spin::Up
        } else {
            Spin::Down
        }
    }

    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Up => "up",
            Spin::Down => "down",
        })
    }
}

/// A fermionic mode. Arms are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    pub arm: usize,
    pub spin: Spin,
}

impl ModeIndex {
    pub fn new(arm: usize, spin: Spin) -> Self {
        ModeIndex { arm, spin }
    }

    pub fn up(arm: usize) -> Self {
        ModeIndex::new(arm, Spin::Up)
    }

    pub fn down(arm: usize) -> Self {
        ModeIndex::new(arm, Spin::Down)
    }

    /// Position in the global mode order, starting at 0 for `(1, up)`.
    pub fn position(self) -> usize {
        2 * (self.arm - 1) + self.spin.bit() as usize
    }

    pub fn from_position(pos: usize) -> Self {
        ModeIndex::new(pos / 2 + 1, Spin::from_bit((pos % 2) as u8))
    }

    pub fn bit(self) -> u64 {
        1u64 << self.position()
    }

    pub fn check(self, num_arms: usize) -> Result<()> {
        if self.arm == 0 || self.arm > num_arms {
            return Err(invalid(format!(
                "arm {} out of range 1..={num_arms}",
                self.arm
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.arm, self.spin)
    }
}

/// Checks that `arm` is a valid 1-based arm index.
pub fn check_arm(arm: usize, num_arms: usize) -> Result<()> {
    ModeIndex::up(arm).check(num_arms)
}

/// Bit mask of both modes of an arm.
pub fn arm_mask(arm: usize) -> u64 {
    ModeIndex::up(arm).bit() | ModeIndex::down(arm).bit()
}

/// Occupation-number basis label: bit `k` is set iff mode at position `k` is occupied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct OccupationKey(pub u64);

impl OccupationKey {
    pub fn is_occupied(self, mode: ModeIndex) -> bool {
        self.0 & mode.bit() != 0
    }

    pub fn particle_count(self) -> u32 {
        self.0.count_ones()
    }

    pub fn arm_charge(self, arm: usize) -> u8 {
        (self.0 & arm_mask(arm)).count_ones() as u8
    }

    /// Number of occupied modes strictly before `mode`.
    pub fn occupied_before(self, mode: ModeIndex) -> u32 {
        (self.0 & (mode.bit() - 1)).count_ones()
    }

    /// Jordan-Wigner sign for a ladder operator acting on `mode`.
    pub fn sign_at(self, mode: ModeIndex) -> f64 {
        if self.occupied_before(mode) % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Occupied modes in ascending order.
    pub fn modes(self) -> impl Iterator<Item = ModeIndex> {
        let bits = self.0;
        (0..64usize)
            .filter(move |k| bits & (1u64 << k) != 0)
            .map(ModeIndex::from_position)
    }

    /// Bitstring with mode `(1, up)` as the leftmost character.
    pub fn to_bitstring(self, num_arms: usize) -> String {
        (0..2 * num_arms)
            .map(|k| if self.0 & (1u64 << k) != 0 { '1' } else { '0' })
            .collect()
    }
}
