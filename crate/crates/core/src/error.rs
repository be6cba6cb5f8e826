use thiserror::Error;

/// Errors raised by the numerical kernels and physics routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("all polynomial coefficients are zero")]
    AllCoefficientsZero,
    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("state is not normalized (norm^2 = {norm_sq})")]
    NotNormalized { norm_sq: f64 },
    #[error("state vector is zero or not finite")]
    DegenerateVector,
    #[error("state is not quadrupolar (|<S>| = {magnetization:.3e})")]
    NotQuadrupolar { magnetization: f64 },
    #[error("{what} = {value} is out of range")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("all Hamiltonian coefficients are zero")]
    AllZero,
    #[error("neighbouring states {index} and {next} are orthogonal (|overlap| = {overlap:.3e})")]
    OrthogonalNeighbors { index: usize, next: usize, overlap: f64 },
    #[error("loop needs at least 3 states, got {0}")]
    LoopTooShort(usize),
    #[error("loop step {index} spans ray distance {distance:.3e} > {limit:.3e}")]
    LoopTooCoarse { index: usize, distance: f64, limit: f64 },
    #[error("states do not define a geodesic (|overlap| = {overlap})")]
    DegeneratePair { overlap: f64 },
    #[error("star step {index} moves {displacement:.3e} rad, limit {limit:.3e}")]
    StepTooCoarse { index: usize, displacement: f64, limit: f64 },
    #[error("path is not closed (gap {gap:.3e})")]
    NotClosed { gap: f64 },
    #[error("routes disagree: discrete {discrete:.6}, decomposition {decomposed:.6}; refine the loop (try {suggested_samples} samples)")]
    InconsistentPhases { discrete: f64, decomposed: f64, suggested_samples: usize },
    #[error("phase {gamma:.6} is not within tolerance of 0 or pi")]
    NotQuantized { gamma: f64 },
    #[error("spectral gap {gap:.3e} below minimum at path step {index}")]
    GapClosure { index: usize, gap: f64 },
    #[error("geodesic condition violated (residual {residual:.3e})")]
    ConditionViolated { residual: f64 },
    #[error("zero denominator: {0}")]
    ZeroDenominator(&'static str),
    #[error("spin field has zero magnitude")]
    ZeroField,
    #[error("evolution did not return to the initial ray")]
    NonCyclic,
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, Error>;
