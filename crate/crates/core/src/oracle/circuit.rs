use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::pauli::{check_targets, qubit_offsets, unitarity_deviation, CMatrix, I, ONE, ZERO};

/// Largest raw-matrix gate accepted, in qubits.
pub const MAX_RAW_ARITY: usize = 3;

/// Unitarity tolerance for gates.
pub const UNITARY_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    X,
    Y,
    Z,
    H,
    S,
    T,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    /// Control is the first target.
    Cnot,
    Cz,
    Cphase(f64),
    Swap,
    /// Arbitrary unitary; the first target is the most significant bit of
    /// the matrix index.
    Raw(CMatrix),
}

impl Gate {
    pub fn arity(&self) -> usize {
        match self {
            Gate::Cnot | Gate::Cz | Gate::Cphase(_) | Gate::Swap => 2,
            Gate::Raw(m) => m.nrows().trailing_zeros() as usize,
            _ => 1,
        }
    }

    pub fn matrix(&self) -> CMatrix {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let m2 = |a: Complex64, b: Complex64, cc: Complex64, d: Complex64| {
            CMatrix::from_row_slice(2, 2, &[a, b, cc, d])
        };
        match self {
            Gate::X => m2(ZERO, ONE, ONE, ZERO),
            Gate::Y => m2(ZERO, -I, I, ZERO),
            Gate::Z => m2(ONE, ZERO, ZERO, -ONE),
            Gate::H => {
                let h = c(FRAC_1_SQRT_2, 0.0);
                m2(h, h, h, -h)
            }
            Gate::S => m2(ONE, ZERO, ZERO, I),
            Gate::T => m2(ONE, ZERO, ZERO, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
            Gate::Rx(theta) => {
                let (s, co) = (theta / 2.0).sin_cos();
                m2(c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0))
            }
            Gate::Ry(theta) => {
                let (s, co) = (theta / 2.0).sin_cos();
                m2(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0))
            }
            Gate::Rz(theta) => m2(
                Complex64::from_polar(1.0, -theta / 2.0),
                ZERO,
                ZERO,
                Complex64::from_polar(1.0, theta / 2.0),
            ),
            Gate::Cnot => permutation4(&[0, 1, 3, 2]),
            Gate::Swap => permutation4(&[0, 2, 1, 3]),
            Gate::Cz => CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                ONE, ONE, ONE, -ONE,
            ])),
            Gate::Cphase(theta) => CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                ONE,
                ONE,
                ONE,
                Complex64::from_polar(1.0, *theta),
            ])),
            Gate::Raw(m) => m.clone(),
        }
    }

    /// Wraps a raw matrix after checking shape and unitarity.
    pub fn raw(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim || !dim.is_power_of_two() || dim < 2 {
            return Err(Error::Shape(format!(
                "raw gate must be 2^k x 2^k, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if dim.trailing_zeros() as usize > MAX_RAW_ARITY {
            return Err(Error::Shape(format!(
                "raw gates act on at most {MAX_RAW_ARITY} qubits"
            )));
        }
        let deviation = unitarity_deviation(&matrix);
        if !(deviation <= UNITARY_TOLERANCE) {
            return Err(Error::BadUnitary { deviation });
        }
        Ok(Gate::Raw(matrix))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::X => "X",
            Gate::Y => "Y",
            Gate::Z => "Z",
            Gate::H => "H",
            Gate::S => "S",
            Gate::T => "T",
            Gate::Rx(_) => "RX",
            Gate::Ry(_) => "RY",
            Gate::Rz(_) => "RZ",
            Gate::Cnot => "CNOT",
            Gate::Cz => "CZ",
            Gate::Cphase(_) => "CPHASE",
            Gate::Swap => "SWAP",
            Gate::Raw(_) => "RAW",
        }
    }
}

fn permutation4(images: &[usize; 4]) -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    for (col, &row) in images.iter().enumerate() {
        m[(row, col)] = ONE;
    }
    m
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub gate: Gate,
    pub targets: Vec<usize>,
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.gate {
            Gate::Rx(t) | Gate::Ry(t) | Gate::Rz(t) | Gate::Cphase(t) => {
                write!(f, "{}({})", self.gate.name(), t)?
            }
            _ => f.write_str(self.gate.name())?,
        }
        for t in &self.targets {
            write!(f, " {t}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            ops: Vec::new(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn ops(&self) -> &[GateOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push(&mut self, gate: Gate, targets: &[usize]) -> Result<()> {
        check_targets(targets, self.num_qubits)?;
        if gate.arity() != targets.len() {
            return Err(Error::BadTargets {
                targets: targets.to_vec(),
                num_qubits: self.num_qubits,
            });
        }
        if let Gate::Raw(m) = &gate {
            let deviation = unitarity_deviation(m);
            if !(deviation <= UNITARY_TOLERANCE) {
                return Err(Error::BadUnitary { deviation });
            }
        }
        self.ops.push(GateOp {
            gate,
            targets: targets.to_vec(),
        });
        Ok(())
    }

    pub fn with(mut self, gate: Gate, targets: &[usize]) -> Result<Self> {
        self.push(gate, targets)?;
        Ok(self)
    }

    /// `H 0` followed by `CNOT 0 1`.
    pub fn bell_pair(num_qubits: usize) -> Result<Self> {
        Circuit::new(num_qubits)
            .with(Gate::H, &[0])?
            .with(Gate::Cnot, &[0, 1])
    }

    /// `H 0` followed by a CNOT chain `0→1→…→N−1`.
    pub fn ghz(num_qubits: usize) -> Result<Self> {
        let mut c = Circuit::new(num_qubits).with(Gate::H, &[0])?;
        for q in 1..num_qubits {
            c.push(Gate::Cnot, &[q - 1, q])?;
        }
        Ok(c)
    }

    /// Full `2^N × 2^N` unitary of the circuit. Only sensible for small `N`.
    pub fn unitary(&self) -> CMatrix {
        let dim = 1usize << self.num_qubits;
        let mut u = CMatrix::identity(dim, dim);
        for op in &self.ops {
            apply_left(&mut u, &op.gate.matrix(), &op.targets, self.num_qubits);
        }
        u
    }
}

/// `M ← U M` with `U` acting on the target qubits of the row index.
pub(crate) fn apply_left(m: &mut CMatrix, u: &CMatrix, targets: &[usize], num_qubits: usize) {
    let (offsets, mask) = qubit_offsets(targets, num_qubits);
    let local = offsets.len();
    let mut buf = vec![ZERO; local];
    for col in 0..m.ncols() {
        for base in (0..m.nrows()).filter(|b| b & mask == 0) {
            for (j, off) in offsets.iter().enumerate() {
                buf[j] = m[(base + off, col)];
            }
            for (i, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (j, v) in buf.iter().enumerate() {
                    acc += u[(i, j)] * v;
                }
                m[(base + off, col)] = acc;
            }
        }
    }
}

/// `M ← M U†` with `U` acting on the target qubits of the column index.
pub(crate) fn apply_right_adjoint(
    m: &mut CMatrix,
    u: &CMatrix,
    targets: &[usize],
    num_qubits: usize,
) {
    let (offsets, mask) = qubit_offsets(targets, num_qubits);
    let local = offsets.len();
    let mut buf = vec![ZERO; local];
    for row in 0..m.nrows() {
        for base in (0..m.ncols()).filter(|b| b & mask == 0) {
            for (j, off) in offsets.iter().enumerate() {
                buf[j] = m[(row, base + off)];
            }
            for (i, off) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (j, v) in buf.iter().enumerate() {
                    acc += u[(i, j)].conj() * v;
                }
                m[(row, base + off)] = acc;
            }
        }
    }
}
