//! Dense density-matrix reference simulator.
//!
//! Works directly with `2^N × 2^N` complex matrices: pseudopure mixing,
//! `U ρ U†` evolution by strided block updates, and correlation
//! coefficients as traces against tensor products of `σ·a`. The quasi and
//! hidden-variable engines are checked against it.

mod circuit;
mod random;

pub use circuit::{Circuit, Gate, GateOp, MAX_RAW_ARITY, UNITARY_TOLERANCE};
pub use random::{random_pure_state, random_state, random_unitary};

pub(crate) use circuit::{apply_left, apply_right_adjoint};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measurement::MeasurementSpec;
use crate::pauli::{axis_operator, CMatrix, ONE, ZERO};

/// Largest qubit count the oracle will allocate for.
pub const MAX_ORACLE_QUBITS: usize = 10;

/// Tolerance for Hermiticity and trace checks.
pub const DENSITY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
    num_qubits: usize,
}

impl DensityOperator {
    /// Checks shape, Hermiticity and unit trace.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::BadDensityOperator(format!(
                "shape {}x{} is not 2^N x 2^N",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = (&matrix - matrix.adjoint()).camax();
        if !(herm <= DENSITY_TOLERANCE) {
            return Err(Error::BadDensityOperator(format!(
                "not Hermitian (deviation {herm:.3e})"
            )));
        }
        let trace = matrix.trace();
        if !((trace - ONE).norm() <= DENSITY_TOLERANCE) {
            return Err(Error::BadDensityOperator(format!(
                "trace {trace} is not 1"
            )));
        }
        Ok(DensityOperator {
            num_qubits: dim.trailing_zeros() as usize,
            matrix,
        })
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn from_parts(matrix: CMatrix, num_qubits: usize) -> Self {
        DensityOperator { matrix, num_qubits }
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let dim = 1usize << num_qubits;
        DensityOperator {
            matrix: CMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0),
            num_qubits,
        }
    }

    /// `|ψ⟩⟨ψ|` for a normalized amplitude vector.
    pub fn pure(amplitudes: &[Complex64]) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(amplitudes);
        let norm = v.norm();
        if !((norm - 1.0).abs() <= DENSITY_TOLERANCE) {
            return Err(Error::BadDensityOperator(format!(
                "state vector norm {norm} is not 1"
            )));
        }
        DensityOperator::new(&v * v.adjoint())
    }

    /// `|b⟩⟨b|` for computational basis state `b` (qubit 0 most significant).
    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let dim = 1usize << num_qubits;
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = ONE;
        DensityOperator {
            matrix: m,
            num_qubits,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Eigenvalues in ascending order via Hermitian tridiagonal
    /// decomposition. Intended for checks, not hot paths.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn max_abs_diff(&self, other: &DensityOperator) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        DensityOperator {
            matrix: self.matrix.kronecker(&other.matrix),
            num_qubits: self.num_qubits + other.num_qubits,
        }
    }
}

/// `(1 − ε)·1/2^N + ε·ρ₁`.
pub fn pseudopure_state(rho1: &DensityOperator, epsilon: f64) -> Result<DensityOperator> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::BadEpsilon(epsilon));
    }
    let dim = rho1.dim();
    let mixed = (1.0 - epsilon) / dim as f64;
    let mut m = rho1.matrix.map(|z| z * epsilon);
    for i in 0..dim {
        m[(i, i)] += mixed;
    }
    Ok(DensityOperator::from_parts(m, rho1.num_qubits))
}

/// Applies one gate, `ρ ← U ρ U†`.
pub fn apply_unitary(rho: &mut DensityOperator, u: &CMatrix, targets: &[usize]) -> Result<()> {
    crate::pauli::check_targets(targets, rho.num_qubits)?;
    if u.nrows() != 1 << targets.len() || u.ncols() != u.nrows() {
        return Err(Error::Shape(format!(
            "{}x{} unitary on {} targets",
            u.nrows(),
            u.ncols(),
            targets.len()
        )));
    }
    apply_left(&mut rho.matrix, u, targets, rho.num_qubits);
    apply_right_adjoint(&mut rho.matrix, u, targets, rho.num_qubits);
    Ok(())
}

/// Runs the whole circuit, gate by gate.
pub fn evolve(rho: &DensityOperator, circuit: &Circuit) -> Result<DensityOperator> {
    if circuit.num_qubits() != rho.num_qubits {
        return Err(Error::Shape(format!(
            "circuit on {} qubits applied to a {}-qubit state",
            circuit.num_qubits(),
            rho.num_qubits
        )));
    }
    let mut out = rho.clone();
    for op in circuit.ops() {
        apply_unitary(&mut out, &op.gate.matrix(), &op.targets)?;
    }
    Ok(out)
}

/// `tr(ρ ⊗_r σ·a_r)`, with the identity for zero-direction axes.
pub fn correlation_trace(rho: &DensityOperator, spec: &MeasurementSpec) -> Result<f64> {
    let n = rho.num_qubits;
    spec.check_len(n)?;
    let ops: Vec<_> = spec.axes.iter().map(axis_operator).collect();
    let dim = rho.dim();
    let mut total = ZERO;
    // tr(ρ O) = Σ_ij ρ_ij O_ji with O_ji = Π_r o_r[j_r, i_r]
    for i in 0..dim {
        for j in 0..dim {
            let rij = rho.matrix[(i, j)];
            if rij == ZERO {
                continue;
            }
            let mut o = ONE;
            for (r, op) in ops.iter().enumerate() {
                let shift = n - 1 - r;
                o *= op[((j >> shift) & 1, (i >> shift) & 1)];
                if o == ZERO {
                    break;
                }
            }
            total += rij * o;
        }
    }
    Ok(total.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::Axis;
    use approx::assert_abs_diff_eq;

    fn singlet() -> DensityOperator {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = |x: f64| Complex64::new(x, 0.0);
        DensityOperator::pure(&[c(0.0), c(s), c(-s), c(0.0)]).unwrap()
    }

    #[test]
    fn pseudopure_limits() {
        let rho1 = DensityOperator::basis(1, 0);
        let mm = pseudopure_state(&rho1, 0.0).unwrap();
        assert!(mm.max_abs_diff(&DensityOperator::maximally_mixed(1)) < 1e-15);
        assert_eq!(pseudopure_state(&rho1, 1.0).unwrap(), rho1);
        let third = pseudopure_state(&rho1, 1.0 / 3.0).unwrap();
        assert_abs_diff_eq!(third.matrix()[(0, 0)].re, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(third.matrix()[(1, 1)].re, 1.0 / 3.0, epsilon = 1e-15);
        assert!(matches!(pseudopure_state(&rho1, 1.5), Err(Error::BadEpsilon(_))));
    }

    #[test]
    fn evolve_basics() {
        let c = Circuit::new(2).with(Gate::X, &[0]).unwrap();
        let out = evolve(&DensityOperator::basis(2, 0), &c).unwrap();
        assert_eq!(out.matrix()[(2, 2)], ONE);

        let mm = DensityOperator::maximally_mixed(3);
        let g = Circuit::ghz(3).unwrap().with(Gate::Rx(0.4), &[2]).unwrap();
        assert!(evolve(&mm, &g).unwrap().max_abs_diff(&mm) < 1e-12);

        let wrong = Circuit::new(3);
        assert!(matches!(
            evolve(&DensityOperator::basis(2, 0), &wrong),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn bell_preparation_spectrum() {
        let eps = 0.3;
        let rho = pseudopure_state(&DensityOperator::basis(2, 0), eps).unwrap();
        let out = evolve(&rho, &Circuit::bell_pair(2).unwrap()).unwrap();
        let ev = out.eigenvalues();
        for v in &ev[..3] {
            assert_abs_diff_eq!(*v, (1.0 - eps) / 4.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(ev[3], (1.0 + 3.0 * eps) / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn singlet_correlations() {
        let rho = singlet();
        let zz = MeasurementSpec::new(vec![Axis::Z, Axis::Z]).unwrap();
        assert_abs_diff_eq!(correlation_trace(&rho, &zz).unwrap(), -1.0, epsilon = 1e-14);
        let eps = 1.0 / 9.0;
        let pp = pseudopure_state(&rho, eps).unwrap();
        assert_abs_diff_eq!(correlation_trace(&pp, &zz).unwrap(), -eps, epsilon = 1e-14);
        let ones = MeasurementSpec::all_zero(2);
        assert_abs_diff_eq!(correlation_trace(&pp, &ones).unwrap(), 1.0, epsilon = 1e-14);
    }
}
