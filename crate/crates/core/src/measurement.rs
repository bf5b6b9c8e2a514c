//! Per-qubit measurement axes.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A measurement axis for one qubit: a spatial unit vector, or the zero
/// direction meaning the qubit does not take part in the correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Axis {
    Zero,
    Spatial([f64; 3]),
}

impl Axis {
    pub const X: Axis = Axis::Spatial([1.0, 0.0, 0.0]);
    pub const Y: Axis = Axis::Spatial([0.0, 1.0, 0.0]);
    pub const Z: Axis = Axis::Spatial([0.0, 0.0, 1.0]);

    /// Normalizes `v` and wraps it. Fails on the zero vector.
    pub fn spatial(v: Vector3<f64>) -> Result<Self> {
        let norm = v.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Shape(format!("cannot normalize axis {v:?}")));
        }
        let u = v / norm;
        Ok(Axis::Spatial([u.x, u.y, u.z]))
    }

    /// Unit vector at polar angle `theta` in the x–z plane, `(sin θ, 0, cos θ)`.
    pub fn xz(theta: f64) -> Self {
        Axis::Spatial([theta.sin(), 0.0, theta.cos()])
    }

    /// `a·m` with `m = n + e₀`: the projection onto `n` for a spatial axis,
    /// and 1 for the zero direction.
    #[inline]
    pub fn dot_m(&self, n: &Vector3<f64>) -> f64 {
        match self {
            Axis::Zero => 1.0,
            Axis::Spatial(a) => a[0] * n.x + a[1] * n.y + a[2] * n.z,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Axis::Zero)
    }

    pub fn vector(&self) -> Option<Vector3<f64>> {
        match self {
            Axis::Zero => None,
            Axis::Spatial(a) => Some(Vector3::new(a[0], a[1], a[2])),
        }
    }

    fn symbol(&self) -> Option<char> {
        match *self {
            Axis::Zero => Some('0'),
            a if a == Axis::X => Some('x'),
            a if a == Axis::Y => Some('y'),
            a if a == Axis::Z => Some('z'),
            _ => None,
        }
    }
}

/// One axis per qubit, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSpec {
    pub axes: Vec<Axis>,
}

impl MeasurementSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        for axis in &axes {
            if let Some(v) = axis.vector() {
                if (v.norm() - 1.0).abs() > 1e-12 {
                    return Err(Error::Shape(format!("axis {v:?} is not a unit vector")));
                }
            }
        }
        Ok(MeasurementSpec { axes })
    }

    pub fn all_zero(num_qubits: usize) -> Self {
        MeasurementSpec {
            axes: vec![Axis::Zero; num_qubits],
        }
    }

    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    /// Every spec over `{x, y, z, 0}^N`, in lexicographic order of the
    /// symbols `x < y < z < 0` with qubit 0 varying slowest.
    pub fn pauli_grid(num_qubits: usize) -> Vec<MeasurementSpec> {
        let choices = [Axis::X, Axis::Y, Axis::Z, Axis::Zero];
        let count = 4usize.pow(num_qubits as u32);
        (0..count)
            .map(|mut code| {
                let mut axes = vec![Axis::Zero; num_qubits];
                for slot in axes.iter_mut().rev() {
                    *slot = choices[code % 4];
                    code /= 4;
                }
                MeasurementSpec { axes }
            })
            .collect()
    }

    pub fn check_len(&self, num_qubits: usize) -> Result<()> {
        if self.len() != num_qubits {
            return Err(Error::Shape(format!(
                "measurement spec has {} axes for {} qubits",
                self.len(),
                num_qubits
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.symbol(), self) {
            (Some(c), _) => write!(f, "{c}"),
            (None, Axis::Spatial(v)) => write!(f, "({},{},{})", v[0], v[1], v[2]),
            (None, Axis::Zero) => unreachable!(),
        }
    }
}

impl fmt::Display for MeasurementSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let compact = self.axes.iter().all(|a| a.symbol().is_some());
        let parts: Vec<String> = self.axes.iter().map(Axis::to_string).collect();
        f.write_str(&parts.join(if compact { "" } else { " " }))
    }
}

/// Parses compact spec strings like `xz0y`; one symbol per qubit.
impl FromStr for MeasurementSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let axes = s
            .trim()
            .chars()
            .map(|c| match c.to_ascii_lowercase() {
                'x' => Ok(Axis::X),
                'y' => Ok(Axis::Y),
                'z' => Ok(Axis::Z),
                '0' => Ok(Axis::Zero),
                other => Err(Error::Config(format!(
                    "unknown axis symbol {other:?} in spec {s:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        if axes.is_empty() {
            return Err(Error::Config("empty measurement spec".into()));
        }
        Ok(MeasurementSpec { axes })
    }
}
