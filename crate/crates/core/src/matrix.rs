//! Small complex matrices used as single-particle unitaries.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Default tolerance for unitarity checks.
pub const UNITARY_TOL: f64 = 1e-10;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn mat2(a: C64, b: C64, cc: C64, d: C64) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[a, b, cc, d])
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn sigma_x() -> CMatrix {
    mat2(r(0.0), r(1.0), r(1.0), r(0.0))
}

pub fn sigma_y() -> CMatrix {
    mat2(r(0.0), c(0.0, -1.0), c(0.0, 1.0), r(0.0))
}

pub fn sigma_z() -> CMatrix {
    mat2(r(1.0), r(0.0), r(0.0), r(-1.0))
}

/// `(σx + σz)/√2`.
pub fn hadamard() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    mat2(r(h), r(h), r(h), r(-h))
}

/// 50/50 beam splitter `[[1, 1], [1, -1]]/√2` on the pair `(arm_i, arm_j)`.
pub fn beam_splitter_matrix() -> CMatrix {
    hadamard()
}

/// Two-mode exchange, used for the polarizing beam splitter and for swaps.
pub fn exchange_matrix() -> CMatrix {
    sigma_x()
}

/// Largest entry of `|U†U - 1|`, or `None` when `u` is not square.
pub fn unitarity_defect(u: &CMatrix) -> Option<f64> {
    if !u.is_square() {
        return None;
    }
    let n = u.nrows();
    let prod = u.adjoint() * u;
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((prod[(i, j)] - r(target)).norm());
        }
    }
    Some(worst)
}

pub fn is_unitary(u: &CMatrix, tol: f64) -> bool {
    matches!(unitarity_defect(u), Some(d) if d <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn named_gates_are_unitary() {
        for u in [sigma_x(), sigma_y(), sigma_z(), hadamard()] {
            assert!(is_unitary(&u, 1e-14));
        }
        assert!(!is_unitary(&CMatrix::from_element(2, 2, r(1.0)), 1e-10));
        assert!(unitarity_defect(&CMatrix::zeros(2, 3)).is_none());
    }

    #[test]
    fn hadamard_is_sum_of_paulis() {
        let h = (sigma_x() + sigma_z()) * r(std::f64::consts::FRAC_1_SQRT_2);
        assert!((h - hadamard()).norm() < 1e-15);
        assert!((hadamard() * hadamard() - identity(2)).norm() < 1e-15);
    }
}
