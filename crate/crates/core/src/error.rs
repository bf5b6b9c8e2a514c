use thiserror::Error;

/// Which frame condition a candidate direction set failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameCondition {
    /// Fewer directions than the four a valid frame needs.
    TooFewVectors,
    /// Some vector is not of unit length.
    UnitNorm,
    /// The vectors do not sum to zero.
    ZeroSum,
    /// `(1/N) Σ n_j n_k` differs from `δ_jk / 3`.
    Isotropy,
}

impl std::fmt::Display for FrameCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FrameCondition::TooFewVectors => "at least four directions",
            FrameCondition::UnitNorm => "unit norm",
            FrameCondition::ZeroSum => "zero vector sum",
            FrameCondition::Isotropy => "isotropic second moment",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frame: {condition} violated (residual {residual:.3e})")]
    FrameInvalid {
        condition: FrameCondition,
        residual: f64,
    },

    #[error("direction index {index} out of range for a frame of {size} directions")]
    BadDirectionIndex { index: usize, size: usize },

    #[error("bad density operator: {0}")]
    BadDensityOperator(String),

    #[error("matrix is not unitary (max deviation {deviation:.3e})")]
    BadUnitary { deviation: f64 },

    #[error("bad gate targets {targets:?} for {num_qubits} qubits")]
    BadTargets {
        targets: Vec<usize>,
        num_qubits: usize,
    },

    #[error("mixing parameter {0} outside [0, 1]")]
    BadEpsilon(f64),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("negative quasi weight {value:.6e} at tuple {tuple:?} (index {index})")]
    NegativeQuasiWeight {
        index: usize,
        tuple: Vec<usize>,
        value: f64,
    },

    #[error("bad trajectory: {0}")]
    BadTrajectory(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("bad weight file: {0}")]
    BadWeightFile(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(
        "state left the hidden-variable domain at epsilon = {epsilon} (eta = {eta}, regime {regime}): {source}"
    )]
    OutsideModelDomain {
        epsilon: f64,
        eta: f64,
        regime: crate::nmr::Regime,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
