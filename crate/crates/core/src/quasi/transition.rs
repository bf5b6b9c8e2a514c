use std::sync::Arc;

use rayon::prelude::*;

use super::{quasi_from_matrix, QuasiState};
use crate::error::{Error, Result};
use crate::frames::Frame;
use crate::oracle::{Gate, UNITARY_TOLERANCE};
use crate::pauli::{bloch_operator, check_targets, kron_all, to_dmatrix, unitarity_deviation, CMatrix};

/// Entries this close to 0 or 1 are treated as exactly 0 or 1, so that
/// permutation-like transitions move weights without round-off.
const SNAP_TOLERANCE: f64 = 1e-14;

/// Output elements per parallel work item in gate application.
const CHUNK: usize = 1 << 14;

/// Real `𝒩^k × 𝒩^k` propagator of quasi weights under a `k`-qubit unitary,
/// `T_{ñ'ñ} = tr(U |ñ⟩⟨ñ| U† Q(ñ'))`. Entries may be negative; every column
/// sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    entries: Vec<f64>,
    dim: usize,
    targets: Vec<usize>,
    source_unitary: CMatrix,
    frame: Arc<Frame>,
}

impl TransitionMatrix {
    /// Transition matrix of `gate` acting on `targets`.
    pub fn for_gate(gate: &Gate, frame: Arc<Frame>, targets: &[usize]) -> Result<Self> {
        Ok(transition_matrix(&gate.matrix(), frame)?.on(targets))
    }

    /// Rebinds the qubits the matrix acts on. Checked when applied.
    pub fn on(mut self, targets: &[usize]) -> Self {
        self.targets = targets.to_vec();
        self
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim + col]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn arity(&self) -> usize {
        self.targets.len()
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn source_unitary(&self) -> &CMatrix {
        &self.source_unitary
    }

    pub fn frame(&self) -> &Arc<Frame> {
        &self.frame
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.dim)
            .map(|c| (0..self.dim).map(|r| self.entry(r, c)).sum())
            .collect()
    }

    pub fn to_dmatrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_row_slice(self.dim, self.dim, &self.entries)
    }

    pub fn is_identity(&self) -> bool {
        (0..self.dim).all(|r| {
            (0..self.dim).all(|c| self.entry(r, c) == if r == c { 1.0 } else { 0.0 })
        })
    }
}

/// Builds `T^U` column by column from the quasidistribution of
/// `U |ñ⟩⟨ñ| U†`. Targets default to `0..k`.
pub fn transition_matrix(u: &CMatrix, frame: Arc<Frame>) -> Result<TransitionMatrix> {
    let size = u.nrows();
    if u.ncols() != size || !size.is_power_of_two() || size < 2 {
        return Err(Error::Shape(format!(
            "unitary must be 2^k x 2^k, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let deviation = unitarity_deviation(u);
    if !(deviation <= UNITARY_TOLERANCE) {
        return Err(Error::BadUnitary { deviation });
    }
    let k = size.trailing_zeros() as usize;
    let projectors: Vec<CMatrix> = frame
        .vectors()
        .iter()
        .map(|n| to_dmatrix(&bloch_operator(0.5, &(n * 0.5))))
        .collect();
    let dim = frame.tuple_count(k);
    let u_adj = u.adjoint();

    let columns: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|col| {
            let tuple = frame.decode_tuple(col, k);
            let rho = kron_all(tuple.iter().map(|&i| &projectors[i]));
            let evolved = u * rho * &u_adj;
            quasi_from_matrix(&evolved, k, frame.clone()).into_weights()
        })
        .collect();

    let mut entries = vec![0.0; dim * dim];
    for (c, column) in columns.iter().enumerate() {
        for (r, &v) in column.iter().enumerate() {
            entries[r * dim + c] = snap(v);
        }
    }
    Ok(TransitionMatrix {
        entries,
        dim,
        targets: (0..k).collect(),
        source_unitary: u.clone(),
        frame,
    })
}

fn snap(v: f64) -> f64 {
    if v.abs() < SNAP_TOLERANCE {
        0.0
    } else if (v - 1.0).abs() < SNAP_TOLERANCE {
        1.0
    } else {
        v
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ApplyOptions {
    /// Project the result onto canonical form afterwards. A no-op for
    /// frames whose identity transition is a permutation.
    pub canonicalize: bool,
}

pub fn apply_gate(w: &QuasiState, t: &TransitionMatrix) -> Result<QuasiState> {
    apply_gate_with(w, t, ApplyOptions::default())
}

/// Contracts `T` against the target digits of the weight vector, leaving
/// all other digits untouched. Each output element is computed from a fixed
/// gather in a fixed order, so the result does not depend on thread count.
pub fn apply_gate_with(
    w: &QuasiState,
    t: &TransitionMatrix,
    options: ApplyOptions,
) -> Result<QuasiState> {
    let num_qubits = w.num_qubits();
    check_targets(&t.targets, num_qubits)?;
    let frame = w.frame();
    if !Arc::ptr_eq(frame, &t.frame) && **frame != *t.frame {
        return Err(Error::Shape(
            "transition matrix built for a different frame".into(),
        ));
    }
    let size = frame.size();
    let k = t.targets.len();
    if t.dim != size.pow(k as u32) {
        return Err(Error::Shape(format!(
            "{}-dimensional transition on {} targets",
            t.dim, k
        )));
    }

    let strides: Vec<usize> = t
        .targets
        .iter()
        .map(|&q| size.pow((num_qubits - 1 - q) as u32))
        .collect();
    let offsets: Vec<usize> = (0..t.dim)
        .map(|local| {
            let mut rem = local;
            let mut off = 0;
            for p in (0..k).rev() {
                off += (rem % size) * strides[p];
                rem /= size;
            }
            off
        })
        .collect();

    let src = w.weights();
    let mut out = vec![0.0; src.len()];
    out.par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(chunk_idx, chunk)| {
            let start = chunk_idx * CHUNK;
            for (i, slot) in chunk.iter_mut().enumerate() {
                let idx = start + i;
                let mut row = 0;
                for &s in &strides {
                    row = row * size + (idx / s) % size;
                }
                let base = idx - offsets[row];
                let coeffs = &t.entries[row * t.dim..(row + 1) * t.dim];
                let mut acc = 0.0;
                for (c, off) in coeffs.iter().zip(&offsets) {
                    if *c != 0.0 {
                        acc += c * src[base + off];
                    }
                }
                *slot = acc;
            }
        });

    let result = QuasiState::from_parts(out, frame.clone(), num_qubits);
    if options.canonicalize {
        canonicalize(&result)
    } else {
        Ok(result)
    }
}

/// Maps any reconstruction-equivalent weight vector to the canonical one by
/// applying the identity transition on every qubit.
pub fn canonicalize(w: &QuasiState) -> Result<QuasiState> {
    let frame = w.frame().clone();
    if frame.gram().identity_transition_is_permutation() {
        return Ok(w.clone());
    }
    let identity = transition_matrix(&CMatrix::identity(2, 2), frame)?;
    (0..w.num_qubits()).try_fold(w.clone(), |acc, q| {
        apply_gate(&acc, &identity.clone().on(&[q]))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::random_unitary;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    #[test]
    fn tetrahedron_identity_is_exact() {
        let t = transition_matrix(&CMatrix::identity(2, 2), Arc::new(Frame::tetrahedron())).unwrap();
        assert!(t.is_identity());
    }

    #[test]
    fn cardinal_identity_is_a_projector() {
        let t = transition_matrix(&CMatrix::identity(2, 2), Arc::new(Frame::cardinal6())).unwrap();
        for r in 0..6 {
            for c in 0..6 {
                let expected = if r == c {
                    2.0 / 3.0
                } else if r / 2 == c / 2 {
                    -1.0 / 3.0
                } else {
                    1.0 / 6.0
                };
                assert_abs_diff_eq!(t.entry(r, c), expected, epsilon = 1e-15);
            }
        }
        let m = t.to_dmatrix();
        assert!((&m * &m - &m).amax() < 1e-10);
    }

    #[test]
    fn rotation_about_first_vertex_cycles_the_rest() {
        let frame = Arc::new(Frame::tetrahedron());
        let axis = frame.vectors()[0];
        let theta = 2.0 * std::f64::consts::PI / 3.0;
        // exp(-iθ n·σ/2) = cos(θ/2) 1 - i sin(θ/2) n·σ
        let (s, c) = (theta / 2.0).sin_cos();
        let u = to_dmatrix(
            &(bloch_operator(c, &nalgebra::Vector3::zeros())
                + bloch_operator(0.0, &(axis * s)) * Complex64::new(0.0, -1.0)),
        );
        let t = transition_matrix(&u, frame).unwrap();
        assert_eq!(t.entry(0, 0), 1.0);
        for c in 0..4 {
            let ones = (0..4).filter(|&r| t.entry(r, c) == 1.0).count();
            let zeros = (0..4).filter(|&r| t.entry(r, c) == 0.0).count();
            assert_eq!((ones, zeros), (1, 3), "column {c}");
        }
        for c in 1..4 {
            assert_eq!(t.entry(c, c), 0.0);
        }
    }

    #[test]
    fn columns_sum_to_one() {
        for frame in [Frame::tetrahedron(), Frame::cardinal6()] {
            let t = transition_matrix(&random_unitary(2, 9), Arc::new(frame)).unwrap();
            for s in t.column_sums() {
                assert_abs_diff_eq!(s, 1.0, epsilon = 1e-12);
            }
            assert!(t.entries().iter().any(|&x| x < 0.0));
        }
    }

    #[test]
    fn rejects_non_unitary_and_bad_targets() {
        let frame = Arc::new(Frame::tetrahedron());
        let m = CMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        assert!(matches!(transition_matrix(&m, frame.clone()), Err(Error::BadUnitary { .. })));

        let w = QuasiState::uniform(frame.clone(), 2);
        let t = TransitionMatrix::for_gate(&Gate::Cnot, frame.clone(), &[1, 1]).unwrap();
        assert!(matches!(apply_gate(&w, &t), Err(Error::BadTargets { .. })));
        let t = TransitionMatrix::for_gate(&Gate::H, frame, &[2]).unwrap();
        assert!(matches!(apply_gate(&w, &t), Err(Error::BadTargets { .. })));
    }

    #[test]
    fn uniform_is_fixed() {
        for frame in [Frame::tetrahedron(), Frame::cardinal6()] {
            let frame = Arc::new(frame);
            let w = QuasiState::uniform(frame.clone(), 3);
            let t = transition_matrix(&random_unitary(2, 1), frame).unwrap().on(&[2, 0]);
            let out = apply_gate(&w, &t).unwrap();
            assert!(out.max_abs_diff(&w) < 1e-12);
        }
    }
}
