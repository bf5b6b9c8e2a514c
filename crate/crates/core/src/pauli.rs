//! Single-qubit operator helpers shared by the engines.

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;

use crate::measurement::Axis;

pub type CMatrix = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

/// Pauli matrix `σ_μ` for `μ ∈ {0, x, y, z}` = `{0, 1, 2, 3}`.
pub fn sigma(mu: usize) -> Matrix2<Complex64> {
    match mu {
        0 => Matrix2::new(ONE, ZERO, ZERO, ONE),
        1 => Matrix2::new(ZERO, ONE, ONE, ZERO),
        2 => Matrix2::new(ZERO, -I, I, ZERO),
        3 => Matrix2::new(ONE, ZERO, ZERO, -ONE),
        _ => panic!("pauli index {mu} out of range"),
    }
}

/// `σ·a` for a spatial axis, the identity for the zero direction.
pub fn axis_operator(axis: &Axis) -> Matrix2<Complex64> {
    match axis {
        Axis::Zero => sigma(0),
        Axis::Spatial(a) => sigma(1).scale(a[0]) + sigma(2).scale(a[1]) + sigma(3).scale(a[2]),
    }
}

/// `c₀ 1 + v·σ` for a real 3-vector `v`.
pub fn bloch_operator(c0: f64, v: &nalgebra::Vector3<f64>) -> Matrix2<Complex64> {
    sigma(0).scale(c0) + sigma(1).scale(v.x) + sigma(2).scale(v.y) + sigma(3).scale(v.z)
}

/// Kronecker product of a list of square matrices, first factor most
/// significant.
pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    factors
        .into_iter()
        .fold(CMatrix::from_element(1, 1, ONE), |acc, f| acc.kronecker(f))
}

pub fn to_dmatrix(m: &Matrix2<Complex64>) -> CMatrix {
    CMatrix::from_fn(2, 2, |i, j| m[(i, j)])
}

/// `max |M†M − 1|` entrywise.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if u.nrows() != u.ncols() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    let n = u.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((prod[(i, j)] - target).norm());
        }
    }
    worst
}

/// Offsets, relative to a base index with all target bits cleared, of the
/// `2^k` basis states of the target qubits. The first target is the most
/// significant bit of the local index.
pub(crate) fn qubit_offsets(targets: &[usize], num_qubits: usize) -> (Vec<usize>, usize) {
    let k = targets.len();
    let mut mask = 0usize;
    for &t in targets {
        mask |= 1 << (num_qubits - 1 - t);
    }
    let offsets = (0..1usize << k)
        .map(|local| {
            targets.iter().enumerate().fold(0usize, |acc, (pos, &t)| {
                if local >> (k - 1 - pos) & 1 == 1 {
                    acc | 1 << (num_qubits - 1 - t)
                } else {
                    acc
                }
            })
        })
        .collect();
    (offsets, mask)
}

pub(crate) fn check_targets(targets: &[usize], num_qubits: usize) -> crate::Result<()> {
    let bad = targets.is_empty()
        || targets.iter().any(|&t| t >= num_qubits)
        || targets
            .iter()
            .enumerate()
            .any(|(i, t)| targets[..i].contains(t));
    if bad {
        return Err(crate::Error::BadTargets {
            targets: targets.to_vec(),
            num_qubits,
        });
    }
    Ok(())
}
