//! Discrete spin-direction frames.
//!
//! A frame is a set of `𝒩` unit vectors that sum to zero and whose scaled
//! outer products `(3/𝒩) Σ n nᵀ` resolve the 3×3 identity. Every qubit in a
//! simulation shares one frame, and a direction tuple over `N` qubits is
//! addressed as a radix-`𝒩` integer with qubit 0 as the most significant
//! digit.

use std::path::Path;

use nalgebra::{DMatrix, Vector3};

use crate::error::{Error, FrameCondition, Result};

/// Tolerance applied when accepting custom frames.
pub const FRAME_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum FrameKind {
    Tetrahedron,
    Cardinal6,
    Custom(Vec<Vector3<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    vectors: Vec<Vector3<f64>>,
    label: String,
}

/// Worst-case residuals of the frame conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    /// `max_j |Σ_n n_j|`
    pub zero_sum_residual: f64,
    /// `max_jk |(1/𝒩) Σ_n n_j n_k − δ_jk/3|`
    pub isotropy_residual: f64,
    /// `max_n ||n| − 1|`
    pub norm_error: f64,
}

impl ValidationReport {
    pub fn max_residual(&self) -> f64 {
        self.zero_sum_residual
            .max(self.isotropy_residual)
            .max(self.norm_error)
    }
}

/// Pairwise dot products of a frame's directions.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameGram {
    pub dot: DMatrix<f64>,
}

impl FrameGram {
    /// True when the single-qubit identity transition `(1 + 3 n'·n)/𝒩` is a
    /// permutation matrix, i.e. gate-local updates never leave canonical form
    /// and canonicalization is a no-op.
    pub fn identity_transition_is_permutation(&self) -> bool {
        let size = self.dot.nrows();
        (0..size).all(|i| {
            let mut ones = 0;
            for j in 0..size {
                let t = (1.0 + 3.0 * self.dot[(i, j)]) / size as f64;
                if (t - 1.0).abs() < 1e-12 {
                    ones += 1;
                } else if t.abs() >= 1e-12 {
                    return false;
                }
            }
            ones == 1
        })
    }
}

impl Frame {
    pub fn tetrahedron() -> Self {
        let s = 1.0 / 3f64.sqrt();
        let vectors = [
            [1.0, 1.0, 1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
        ]
        .iter()
        .map(|v| Vector3::new(v[0] * s, v[1] * s, v[2] * s))
        .collect();
        Frame {
            vectors,
            label: "tetrahedron".to_owned(),
        }
    }

    pub fn cardinal6() -> Self {
        let vectors = vec![
            Vector3::x(),
            -Vector3::x(),
            Vector3::y(),
            -Vector3::y(),
            Vector3::z(),
            -Vector3::z(),
        ];
        Frame {
            vectors,
            label: "cardinal6".to_owned(),
        }
    }

    /// Validates an arbitrary direction set and wraps it as a frame.
    pub fn custom(vectors: Vec<Vector3<f64>>, label: impl Into<String>) -> Result<Self> {
        let frame = Frame {
            vectors,
            label: label.into(),
        };
        // Three or fewer vectors cannot satisfy both sum conditions.
        if frame.vectors.len() < 4 {
            return Err(Error::FrameInvalid {
                condition: FrameCondition::TooFewVectors,
                residual: (4 - frame.vectors.len()) as f64,
            });
        }
        let report = frame.validate();
        let checks = [
            (FrameCondition::UnitNorm, report.norm_error),
            (FrameCondition::ZeroSum, report.zero_sum_residual),
            (FrameCondition::Isotropy, report.isotropy_residual),
        ];
        for (condition, residual) in checks {
            if !(residual <= FRAME_TOLERANCE) {
                return Err(Error::FrameInvalid {
                    condition,
                    residual,
                });
            }
        }
        Ok(frame)
    }

    /// Reads a frame from text: one vector per line as three
    /// whitespace-separated numbers, `#` lines ignored.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let display = path.display().to_string();
        let mut vectors = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: display.clone(),
                line: lineno + 1,
                message,
            };
            let comps = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|e| parse_err(format!("bad number {tok:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if comps.len() != 3 {
                return Err(parse_err(format!(
                    "expected 3 components, found {}",
                    comps.len()
                )));
            }
            vectors.push(Vector3::new(comps[0], comps[1], comps[2]));
        }
        let label = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "custom".to_owned());
        Frame::custom(vectors, label)
    }

    pub fn size(&self) -> usize {
        self.vectors.len()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn vectors(&self) -> &[Vector3<f64>] {
        &self.vectors
    }

    pub fn vector(&self, index: usize) -> Result<&Vector3<f64>> {
        self.vectors.get(index).ok_or(Error::BadDirectionIndex {
            index,
            size: self.size(),
        })
    }

    pub fn validate(&self) -> ValidationReport {
        let size = self.size() as f64;
        let sum: Vector3<f64> = self.vectors.iter().sum();
        let zero_sum_residual = sum.amax();

        let second = self
            .vectors
            .iter()
            .fold(nalgebra::Matrix3::zeros(), |acc, n| acc + n * n.transpose())
            / size;
        let isotropy_residual = (second - nalgebra::Matrix3::identity() / 3.0).amax();

        let norm_error = self
            .vectors
            .iter()
            .map(|n| (n.norm() - 1.0).abs())
            .fold(0.0, f64::max);

        ValidationReport {
            zero_sum_residual,
            isotropy_residual,
            norm_error,
        }
    }

    pub fn gram(&self) -> FrameGram {
        let size = self.size();
        FrameGram {
            dot: DMatrix::from_fn(size, size, |i, j| self.vectors[i].dot(&self.vectors[j])),
        }
    }

    /// Number of direction tuples for `num_qubits` qubits, `𝒩^N`.
    pub fn tuple_count(&self, num_qubits: usize) -> usize {
        self.size().pow(num_qubits as u32)
    }

    /// Splits a radix-`𝒩` tuple code into per-qubit direction indices,
    /// qubit 0 first.
    pub fn decode_tuple(&self, mut code: usize, num_qubits: usize) -> Vec<usize> {
        let size = self.size();
        let mut digits = vec![0; num_qubits];
        for d in digits.iter_mut().rev() {
            *d = code % size;
            code /= size;
        }
        digits
    }

    pub fn encode_tuple(&self, digits: &[usize]) -> Result<usize> {
        let size = self.size();
        digits.iter().try_fold(0usize, |acc, &d| {
            if d >= size {
                Err(Error::BadDirectionIndex { index: d, size })
            } else {
                Ok(acc * size + d)
            }
        })
    }
}

pub fn build_frame(kind: FrameKind) -> Result<Frame> {
    match kind {
        FrameKind::Tetrahedron => Ok(Frame::tetrahedron()),
        FrameKind::Cardinal6 => Ok(Frame::cardinal6()),
        FrameKind::Custom(vectors) => Frame::custom(vectors, "custom"),
    }
}

pub fn validate_frame(frame: &Frame) -> ValidationReport {
    frame.validate()
}

pub fn frame_gram(frame: &Frame) -> FrameGram {
    frame.gram()
}
