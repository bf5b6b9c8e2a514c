//! Quasidistributions over direction tuples.
//!
//! A density operator `τ` on `N` qubits maps to a real weight vector
//! `w(ñ) = tr(τ Q(ñ))` with `Q(ñ) = 𝒩^{-N} ⊗_r (1 + 3 n_r·σ)`, indexed by
//! direction tuples in radix-`𝒩` order. The map is inverted exactly by
//! `τ = Σ_ñ w(ñ) ⊗_r (1 + n_r·σ)/2`, and correlation coefficients are
//! linear functionals `Σ_ñ w(ñ) Π_r a_r·m_r`.
//!
//! Internally both directions go through the Pauli basis: a per-qubit
//! `2×2 → 4` change of basis on the interleaved matrix indices, then a
//! per-qubit `4 → 𝒩` (or `𝒩 → 4`) real map built from the frame vectors.

mod io;
mod tensor;
mod transition;

pub use io::{read_weights, write_weights, WeightFile, WEIGHT_FILE_MAGIC, WEIGHT_FILE_VERSION};
pub use transition::{
    apply_gate, apply_gate_with, canonicalize, transition_matrix, ApplyOptions, TransitionMatrix,
};

pub use crate::measurement::{Axis, MeasurementSpec};

use std::sync::Arc;

use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::frames::Frame;
use crate::oracle::{DensityOperator, DENSITY_TOLERANCE};
use crate::pauli::{bloch_operator, kron_all, sigma, to_dmatrix, CMatrix, ONE, ZERO};
use tensor::{apply_along_axis, apply_to_all_axes, kron_vectors};

/// Tolerance on `Σ w = 1`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiState {
    weights: Vec<f64>,
    frame: Arc<Frame>,
    num_qubits: usize,
}

impl QuasiState {
    /// Wraps a weight vector, checking its length and normalization.
    pub fn new(weights: Vec<f64>, frame: Arc<Frame>, num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || weights.len() != frame.tuple_count(num_qubits) {
            return Err(Error::Shape(format!(
                "{} weights for {} qubits over a {}-direction frame",
                weights.len(),
                num_qubits,
                frame.size()
            )));
        }
        let state = QuasiState {
            weights,
            frame,
            num_qubits,
        };
        let sum = state.total();
        if !((sum - 1.0).abs() <= NORMALIZATION_TOLERANCE) {
            return Err(Error::Shape(format!("weights sum to {sum}, not 1")));
        }
        Ok(state)
    }

    pub(crate) fn from_parts(weights: Vec<f64>, frame: Arc<Frame>, num_qubits: usize) -> Self {
        debug_assert_eq!(weights.len(), frame.tuple_count(num_qubits));
        QuasiState {
            weights,
            frame,
            num_qubits,
        }
    }

    /// Quasidistribution of the maximally mixed state: `𝒩^{-N}` everywhere.
    pub fn uniform(frame: Arc<Frame>, num_qubits: usize) -> Self {
        let len = frame.tuple_count(num_qubits);
        QuasiState::from_parts(vec![1.0 / len as f64; len], frame, num_qubits)
    }

    /// Tensor product of states over the same frame, first factor holding
    /// the lowest-numbered qubits.
    pub fn tensor_product(parts: &[QuasiState]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Shape("empty tensor product".into()))?;
        if parts.iter().any(|p| *p.frame != *first.frame) {
            return Err(Error::Shape("tensor factors use different frames".into()));
        }
        let vectors: Vec<Vec<f64>> = parts.iter().map(|p| p.weights.clone()).collect();
        Ok(QuasiState::from_parts(
            kron_vectors(&vectors),
            first.frame.clone(),
            parts.iter().map(|p| p.num_qubits).sum(),
        ))
    }

    /// `(1 − ε)·uniform + ε·self`, the image of pseudopure mixing.
    pub fn pseudopure(&self, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::BadEpsilon(epsilon));
        }
        let u = (1.0 - epsilon) / self.weights.len() as f64;
        Ok(QuasiState::from_parts(
            self.weights.iter().map(|w| u + epsilon * w).collect(),
            self.frame.clone(),
            self.num_qubits,
        ))
    }

    /// Quasidistribution of `Σ_t c_t ⊗_r o_{t,r}` computed factor by factor,
    /// without forming the `2^N × 2^N` operator. The operator must be
    /// Hermitian with unit trace for the result to be a valid state.
    pub fn from_product_terms(
        frame: Arc<Frame>,
        num_qubits: usize,
        terms: &[(Complex64, Vec<Matrix2<Complex64>>)],
    ) -> Result<Self> {
        let len = frame.tuple_count(num_qubits);
        let mut acc = vec![ZERO; len];
        let q: Vec<Matrix2<Complex64>> = frame
            .vectors()
            .iter()
            .map(|n| bloch_operator(1.0, &(n * 3.0)) / Complex64::new(frame.size() as f64, 0.0))
            .collect();
        for (coeff, factors) in terms {
            if factors.len() != num_qubits {
                return Err(Error::Shape(format!(
                    "product term with {} factors for {} qubits",
                    factors.len(),
                    num_qubits
                )));
            }
            let per_qubit: Vec<Vec<Complex64>> = factors
                .iter()
                .map(|o| q.iter().map(|qn| (o * qn).trace()).collect())
                .collect();
            for (a, v) in acc.iter_mut().zip(kron_vectors(&per_qubit)) {
                *a += coeff * v;
            }
        }
        QuasiState::new(acc.into_iter().map(|z| z.re).collect(), frame, num_qubits)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn into_weights(self) -> Vec<f64> {
        self.weights
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Smallest weight and its tuple code.
    pub fn min_weight(&self) -> (usize, f64) {
        self.weights
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, w)| if w < best.1 { (i, w) } else { best })
    }

    pub fn max_abs_diff(&self, other: &QuasiState) -> f64 {
        self.weights
            .iter()
            .zip(&other.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// `Q(ñ) = 𝒩^{-N} ⊗_r (1 + 3 n_r·σ)`, formed explicitly.
pub fn q_operator(frame: &Frame, tuple: &[usize], num_qubits: usize) -> Result<CMatrix> {
    if tuple.len() != num_qubits {
        return Err(Error::Shape(format!(
            "direction tuple of length {} for {} qubits",
            tuple.len(),
            num_qubits
        )));
    }
    let scale = Complex64::new(1.0 / frame.size() as f64, 0.0);
    let factors = tuple
        .iter()
        .map(|&i| {
            let n = frame.vector(i)?;
            Ok(to_dmatrix(&(bloch_operator(1.0, &(n * 3.0)) * scale)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(kron_all(&factors))
}

/// Lower bound on any quasi weight of a valid state, `−2^{2N−1}/𝒩^N`: the
/// smallest eigenvalue of `Q(ñ)`.
pub fn min_quasi_bound(num_qubits: usize, frame_size: usize) -> f64 {
    -(2f64.powi(2 * num_qubits as i32 - 1)) / (frame_size as f64).powi(num_qubits as i32)
}

// Per-qubit change of basis from interleaved matrix index p = 2i + j to
// Pauli index μ: c_μ = Σ_ij (σ_μ)_ji ρ_ij.
fn to_pauli_map() -> [Complex64; 16] {
    let mut m = [ZERO; 16];
    for mu in 0..4 {
        let s = sigma(mu);
        for i in 0..2 {
            for j in 0..2 {
                m[mu * 4 + 2 * i + j] = s[(j, i)];
            }
        }
    }
    m
}

// Inverse: ρ_ij = 2^{-N} Σ_μ (σ_μ)_ij c_μ (scale applied separately).
fn from_pauli_map() -> [Complex64; 16] {
    let mut m = [ZERO; 16];
    for mu in 0..4 {
        let s = sigma(mu);
        for i in 0..2 {
            for j in 0..2 {
                m[(2 * i + j) * 4 + mu] = s[(i, j)];
            }
        }
    }
    m
}

fn interleave(i: usize, j: usize, num_qubits: usize) -> usize {
    let mut p = 0;
    for r in 0..num_qubits {
        let shift = num_qubits - 1 - r;
        p = p * 4 + 2 * ((i >> shift) & 1) + ((j >> shift) & 1);
    }
    p
}

/// `c_μ = tr(ρ σ_μ)` for all `4^N` Pauli strings.
pub(crate) fn pauli_coefficients(rho: &CMatrix, num_qubits: usize) -> Vec<f64> {
    let dim = rho.nrows();
    let mut data = vec![ZERO; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            data[interleave(i, j, num_qubits)] = rho[(i, j)];
        }
    }
    let mut shape = vec![4; num_qubits];
    apply_to_all_axes(data, &mut shape, &to_pauli_map(), 4)
        .into_iter()
        .map(|z| z.re)
        .collect()
}

/// `ρ = 2^{-N} Σ_μ c_μ σ_μ`.
pub(crate) fn density_from_pauli(coeffs: &[f64], num_qubits: usize) -> CMatrix {
    let dim = 1usize << num_qubits;
    let data: Vec<Complex64> = coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect();
    let mut shape = vec![4; num_qubits];
    let data = apply_to_all_axes(data, &mut shape, &from_pauli_map(), 4);
    let scale = 1.0 / dim as f64;
    CMatrix::from_fn(dim, dim, |i, j| data[interleave(i, j, num_qubits)] * scale)
}

/// Per-qubit `4 → 𝒩` map: row `n` is `[1, 3n_x, 3n_y, 3n_z] / 𝒩`.
fn frame_analysis_map(frame: &Frame) -> Vec<f64> {
    let inv = 1.0 / frame.size() as f64;
    frame
        .vectors()
        .iter()
        .flat_map(|n| [inv, 3.0 * n.x * inv, 3.0 * n.y * inv, 3.0 * n.z * inv])
        .collect()
}

/// Per-qubit `𝒩 → 4` map: columns `[1, n_x, n_y, n_z]`.
fn frame_synthesis_map(frame: &Frame) -> Vec<f64> {
    let v = frame.vectors();
    let mut m = Vec::with_capacity(4 * v.len());
    m.extend(v.iter().map(|_| 1.0));
    m.extend(v.iter().map(|n| n.x));
    m.extend(v.iter().map(|n| n.y));
    m.extend(v.iter().map(|n| n.z));
    m
}

fn check_density(rho: &CMatrix) -> Result<()> {
    let herm = (rho - rho.adjoint()).camax();
    if !(herm <= DENSITY_TOLERANCE) {
        return Err(Error::BadDensityOperator(format!(
            "not Hermitian (deviation {herm:.3e})"
        )));
    }
    let tr = rho.trace();
    if !((tr - ONE).norm() <= DENSITY_TOLERANCE) {
        return Err(Error::BadDensityOperator(format!("trace {tr} is not 1")));
    }
    Ok(())
}

/// Canonical quasidistribution `w(ñ) = tr(ρ Q(ñ))`.
pub fn quasi_from_density(rho: &DensityOperator, frame: Arc<Frame>) -> Result<QuasiState> {
    check_density(rho.matrix())?;
    Ok(quasi_from_matrix(rho.matrix(), rho.num_qubits(), frame))
}

/// `tr(X Q(ñ))` for any Hermitian `X`; no trace requirement.
pub(crate) fn quasi_from_matrix(x: &CMatrix, num_qubits: usize, frame: Arc<Frame>) -> QuasiState {
    let coeffs = pauli_coefficients(x, num_qubits);
    let mut shape = vec![4; num_qubits];
    let weights = apply_to_all_axes(coeffs, &mut shape, &frame_analysis_map(&frame), frame.size());
    QuasiState::from_parts(weights, frame, num_qubits)
}

/// `Σ_ñ w(ñ) ⊗_r (1 + n_r·σ)/2`.
pub fn density_from_quasi(w: &QuasiState) -> DensityOperator {
    let mut shape = vec![w.frame.size(); w.num_qubits];
    let coeffs = apply_to_all_axes(w.weights.clone(), &mut shape, &frame_synthesis_map(&w.frame), 4);
    DensityOperator::from_parts(density_from_pauli(&coeffs, w.num_qubits), w.num_qubits)
}

/// `Σ_ñ w(ñ) Π_r a_r·m_r` with `a·m = a·n` for spatial axes and 1 for the
/// zero direction.
pub fn correlation_quasi(w: &QuasiState, spec: &MeasurementSpec) -> Result<f64> {
    spec.check_len(w.num_qubits)?;
    let mut shape = vec![w.frame.size(); w.num_qubits];
    let mut data = w.weights.clone();
    // contract from the last qubit so each pass shrinks the trailing block
    for r in (0..w.num_qubits).rev() {
        let row: Vec<f64> = w.frame.vectors().iter().map(|n| spec.axes[r].dot_m(n)).collect();
        data = apply_along_axis(&data, &mut shape, r, &row, 1);
    }
    Ok(data[0])
}

/// Single-qubit helpers for building product states.
pub fn single_qubit_state(frame: Arc<Frame>, bloch: nalgebra::Vector3<f64>) -> Result<QuasiState> {
    if bloch.norm() > 1.0 + DENSITY_TOLERANCE {
        return Err(Error::BadDensityOperator(format!(
            "Bloch vector {bloch:?} longer than 1"
        )));
    }
    let rho = bloch_operator(0.5, &(bloch * 0.5));
    QuasiState::from_product_terms(frame, 1, &[(ONE, vec![rho])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{correlation_trace, pseudopure_state, random_state};
    use approx::assert_abs_diff_eq;

    fn tet() -> Arc<Frame> {
        Arc::new(Frame::tetrahedron())
    }

    #[test]
    fn q_operator_single_qubit() {
        let f = Frame::tetrahedron();
        let q = q_operator(&f, &[0], 1).unwrap();
        let ev = DensityOperator::from_parts(q.clone(), 1).eigenvalues();
        assert_abs_diff_eq!(ev[0], -0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1], 1.0, epsilon = 1e-14);
        for frame in [Frame::tetrahedron(), Frame::cardinal6()] {
            for i in 0..frame.size() {
                let tr = q_operator(&frame, &[i], 1).unwrap().trace();
                assert_abs_diff_eq!(tr.re, 2.0 / frame.size() as f64, epsilon = 1e-15);
            }
        }
        assert!(matches!(
            q_operator(&f, &[4], 1),
            Err(Error::BadDirectionIndex { index: 4, size: 4 })
        ));
    }

    #[test]
    fn two_qubit_q_minimum_eigenvalue() {
        let f = Frame::tetrahedron();
        let q = q_operator(&f, &[1, 3], 2).unwrap();
        let ev = DensityOperator::from_parts(q, 2).eigenvalues();
        assert_abs_diff_eq!(ev[0], -0.5, epsilon = 1e-13);
        assert_abs_diff_eq!(min_quasi_bound(2, 4), -0.5, epsilon = 0.0);
        assert_abs_diff_eq!(min_quasi_bound(1, 4), -0.5, epsilon = 0.0);
        assert_abs_diff_eq!(min_quasi_bound(2, 6), -8.0 / 36.0, epsilon = 1e-16);
    }

    #[test]
    fn fast_route_matches_explicit_trace() {
        for frame in [Frame::tetrahedron(), Frame::cardinal6()] {
            let frame = Arc::new(frame);
            let rho = random_state(2, 3, 5);
            let w = quasi_from_density(&rho, frame.clone()).unwrap();
            for code in 0..w.len() {
                let tuple = frame.decode_tuple(code, 2);
                let q = q_operator(&frame, &tuple, 2).unwrap();
                let direct = (rho.matrix() * q).trace().re;
                assert_abs_diff_eq!(w.weights()[code], direct, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn maximally_mixed_is_uniform() {
        let w = quasi_from_density(&DensityOperator::maximally_mixed(1), tet()).unwrap();
        for &x in w.weights() {
            assert_abs_diff_eq!(x, 0.25, epsilon = 1e-15);
        }
        let back = density_from_quasi(&QuasiState::uniform(Arc::new(Frame::cardinal6()), 2));
        assert!(back.max_abs_diff(&DensityOperator::maximally_mixed(2)) < 1e-15);
    }

    #[test]
    fn plus_z_weights() {
        let w = quasi_from_density(&DensityOperator::basis(1, 0), tet()).unwrap();
        let hi = (1.0 + 3f64.sqrt()) / 4.0;
        let lo = (1.0 - 3f64.sqrt()) / 4.0;
        // tetrahedron n_z signs: +, -, -, +
        let expected = [hi, lo, lo, hi];
        for (a, b) in w.weights().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let back = density_from_quasi(&w);
        assert!(back.max_abs_diff(&DensityOperator::basis(1, 0)) < 1e-12);
    }

    #[test]
    fn saturating_single_qubit_state() {
        let f = tet();
        let anti = -f.vectors()[0];
        let rho1 = DensityOperator::from_parts(to_dmatrix(&bloch_operator(0.5, &(anti * 0.5))), 1);
        let rho = pseudopure_state(&rho1, 1.0 / 3.0).unwrap();
        let w = quasi_from_density(&rho, f).unwrap();
        assert_abs_diff_eq!(w.weights()[0], 0.0, epsilon = 1e-15);
        assert!(w.weights()[1..].iter().all(|&x| x > 0.0));
    }

    #[test]
    fn correlation_edge_cases() {
        let w = QuasiState::uniform(tet(), 1);
        assert_eq!(correlation_quasi(&w, &MeasurementSpec::all_zero(1)).unwrap(), 1.0);
        let c = correlation_quasi(&w, &MeasurementSpec::new(vec![Axis::xz(0.7)]).unwrap()).unwrap();
        assert_abs_diff_eq!(c, 0.0, epsilon = 1e-12);
        assert!(correlation_quasi(&w, &MeasurementSpec::all_zero(2)).is_err());
    }

    #[test]
    fn singlet_correlation_is_minus_eps_dot() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = |x: f64| Complex64::new(x, 0.0);
        let singlet = DensityOperator::pure(&[c(0.0), c(s), c(-s), c(0.0)]).unwrap();
        let eps = 0.2;
        let rho = pseudopure_state(&singlet, eps).unwrap();
        let a = Axis::xz(0.3);
        let b = Axis::spatial(nalgebra::Vector3::new(0.2, -0.5, 0.7)).unwrap();
        let spec = MeasurementSpec::new(vec![a, b]).unwrap();
        let expected = -eps * a.vector().unwrap().dot(&b.vector().unwrap());
        for frame in [Frame::tetrahedron(), Frame::cardinal6()] {
            let w = quasi_from_density(&rho, Arc::new(frame)).unwrap();
            assert_abs_diff_eq!(correlation_quasi(&w, &spec).unwrap(), expected, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(correlation_trace(&rho, &spec).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_density() {
        let m = CMatrix::identity(2, 2);
        let rho = DensityOperator::from_parts(m, 1);
        assert!(matches!(
            quasi_from_density(&rho, tet()),
            Err(Error::BadDensityOperator(_))
        ));
    }

    #[test]
    fn product_terms_match_density_route() {
        let f = Arc::new(Frame::cardinal6());
        let up = nalgebra::Vector3::new(0.0, 0.0, 1.0);
        let w = QuasiState::tensor_product(&[
            single_qubit_state(f.clone(), up).unwrap(),
            single_qubit_state(f.clone(), -up).unwrap(),
        ])
        .unwrap();
        let direct = quasi_from_density(&DensityOperator::basis(2, 1), f).unwrap();
        assert!(w.max_abs_diff(&direct) < 1e-15);
    }
}
