use thiserror::Error;

/// Errors produced by the simulator, the model and the estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum QetError {
    #[error("invalid model parameters: h = {h}, k = {k} (both must be positive and finite)")]
    InvalidParams { h: f64, k: f64 },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("density matrix has trace {trace} (expected 1)")]
    BadTrace { trace: f64 },

    #[error("density matrix has negative eigenvalue {eigenvalue:e}")]
    NegativeEigenvalue { eigenvalue: f64 },

    #[error("operator is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("qubit index {0} out of range (two-qubit register)")]
    QubitOutOfRange(usize),

    #[error("classical bit index {0} out of range (two-bit register)")]
    ClassicalBitOutOfRange(usize),

    #[error("control and target must differ (both are qubit {0})")]
    ControlEqualsTarget(usize),

    #[error("classically controlled step reads bit {0} before any measurement writes it")]
    UnwrittenClassicalBit(usize),

    #[error("step {0} cannot be applied as a unitary gate")]
    NotAUnitaryStep(String),

    #[error(
        "measurement probabilities underflowed (p0 = {p0:e}, p1 = {p1:e}); state is corrupted"
    )]
    ProbabilityUnderflow { p0: f64, p1: f64 },

    #[error("expectation value has imaginary residue {residue:e}")]
    ImaginaryResidue { residue: f64 },

    #[error("eigendecomposition failed: {0}")]
    Eigendecomposition(String),

    #[error("counts are empty")]
    EmptyCounts,

    #[error("estimate mismatch: {0}")]
    TargetMismatch(String),

    #[error("invalid probability {name} = {value}")]
    InvalidProbability { name: &'static str, value: f64 },

    #[error("calibration matrix is ill-conditioned (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("calibration matrix is not column-stochastic (column {column} sums to {sum})")]
    NotColumnStochastic { column: usize, sum: f64 },

    #[error("invalid sweep grid: {0}")]
    InvalidGrid(String),

    #[error("unknown noise preset {0:?}")]
    UnknownPreset(String),

    #[error("shot count must be at least 1")]
    ZeroShots,
}

pub type Result<T, E = QetError> = std::result::Result<T, E>;
