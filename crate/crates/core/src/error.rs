use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("space too large: dimension {dim} exceeds the configured maximum {max}")]
    SpaceTooLarge { dim: usize, max: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },
    #[error("non-finite amplitude encountered")]
    NonFinite,
    #[error("matrix is not unitary (max |U^dagger U - I| = {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("matrix is not Hermitian (max |H - H^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error(
        "eigendecomposition did not converge after {sweeps} sweeps \
         (off-diagonal norm {off_diagonal:e}, Frobenius norm {frobenius:e})"
    )]
    NumericalBreakdown {
        sweeps: usize,
        off_diagonal: f64,
        frobenius: f64,
    },
    #[error("states are orthogonal; no global phase alignment exists")]
    NoAlignment,
    #[error("gate arity mismatch: gate acts on {expected} subsystems, {found} targets given")]
    ArityMismatch { expected: usize, found: usize },
    #[error("duplicate target subsystem {0}")]
    DuplicateTarget(usize),
    #[error("subsystem index {index} out of range for a register of {len}")]
    SubsystemOutOfRange { index: usize, len: usize },
    #[error("level {level} out of range for a subsystem of dimension {dim}")]
    LevelOutOfRange { level: usize, dim: usize },
    #[error("impossible measurement branch: outcome {outcome} has probability {probability:e}")]
    ImpossibleBranch { outcome: usize, probability: f64 },
    #[error("operator index x = {0} is outside 1..=24")]
    IndexOutOfRange(u32),
    #[error("diagonal phase t[{index}] has modulus {modulus}, expected 1")]
    NotUnimodular { index: usize, modulus: f64 },
    #[error("matrix is not a 4x4 permutation matrix")]
    NotPermutation,
    #[error("negative duration {0}")]
    NegativeDuration(f64),
    #[error("invalid atom index {0}; expected 1 or 2")]
    InvalidAtom(u8),
    #[error("auxiliary level populated on entry (amplitude {amplitude:e}); pulses assume computational input")]
    AuxiliaryPopulated { amplitude: f64 },
    #[error("Fock truncation overflow: amplitude {amplitude:e} in the top excitation manifold (cap {cap})")]
    TruncationOverflow { amplitude: f64, cap: usize },
    #[error("cavity not returned to vacuum (residual amplitude {residual:e})")]
    CavityNotVacuum { residual: f64 },
    #[error("offset fraction {0} outside the admissible range")]
    InvalidOffset(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
