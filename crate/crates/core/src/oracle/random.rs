//! Seeded random states and unitaries for tests and demos.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::DensityOperator;
use crate::pauli::CMatrix;

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Density operator of the given rank: `G G† / tr(G G†)` for a complex
/// Gaussian `2^N × rank` matrix `G`.
///
/// # Panics
/// If `rank` is zero or exceeds `2^N`.
pub fn random_state(num_qubits: usize, rank: usize, seed: u64) -> DensityOperator {
    let dim = 1usize << num_qubits;
    assert!(rank >= 1 && rank <= dim, "rank {rank} outside 1..={dim}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = CMatrix::from_fn(dim, rank, |_, _| gaussian(&mut rng));
    let m = &g * g.adjoint();
    let tr = m.trace();
    let mut m = m / tr;
    // exact Hermitian symmetry
    for i in 0..dim {
        m[(i, i)].im = 0.0;
        for j in 0..i {
            m[(i, j)] = m[(j, i)].conj();
        }
    }
    DensityOperator::from_parts(m, num_qubits)
}

pub fn random_pure_state(num_qubits: usize, seed: u64) -> DensityOperator {
    random_state(num_qubits, 1, seed)
}

/// Haar-distributed unitary on `k` qubits: Gram–Schmidt orthonormalization
/// of a complex Gaussian matrix, which leaves `R` with a positive diagonal.
pub fn random_unitary(num_qubits: usize, seed: u64) -> CMatrix {
    let dim = 1usize << num_qubits;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<DVector<Complex64>> = (0..dim)
        .map(|_| DVector::from_fn(dim, |_, _| gaussian(&mut rng)))
        .collect();
    for j in 0..dim {
        for i in 0..j {
            let proj = cols[i].dotc(&cols[j]);
            let ci = cols[i].clone();
            cols[j] -= ci * proj;
        }
        let norm = cols[j].norm();
        cols[j] /= Complex64::new(norm, 0.0);
    }
    CMatrix::from_columns(&cols)
}
