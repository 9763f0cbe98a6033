use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("Hamiltonian is not Hermitian (deviation {0:.3e})")]
    NonHermitianH(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("cannot project onto the state space: spectrum has no admissible mass")]
    ZeroTrace,

    #[error("channel index {index} out of range ({count} channels)")]
    BadChannelIndex { index: usize, count: usize },

    #[error("operation requires dimension 2, model has dimension {0}")]
    DimensionNotTwo(usize),

    #[error("model has no diffusive channels")]
    NoDiffusiveChannels,

    #[error("model has {0} diffusive operators; designate one explicitly")]
    MultipleDiffusiveOps(usize),

    #[error("model has jump channels; the Stratonovich pure-state scheme is diffusive-only")]
    JumpChannelsPresent,

    #[error("model does not preserve pure states")]
    NotPurePreserving,

    #[error("trajectory weight underflow at step {step} (weight {weight:.3e})")]
    WeightUnderflow { step: usize, weight: f64 },

    #[error("time step too large: max jump intensity times dt = {0:.3e} exceeds 0.1")]
    StepTooLarge(f64),

    #[error("equilibrium is not unique (kernel dimension {0})")]
    NonUniqueEquilibrium(usize),

    #[error("no stationary state found")]
    NoStationaryState,

    #[error("trace drift {0:.3e} exceeds tolerance")]
    TraceDrift(f64),

    #[error("averaging window is empty (burn-in {burn_in} >= final time {t_final})")]
    EmptyWindow { burn_in: f64, t_final: f64 },

    #[error("atom line-width must be strictly positive")]
    ZeroLinewidth,

    #[error("atom Rabi frequency must be strictly positive")]
    ZeroRabi,

    #[error("ensemble aborted: {failed} of {total} trajectories failed (first: {first})")]
    EnsembleAborted { failed: usize, total: usize, first: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ZeroTrace
                | Error::WeightUnderflow { .. }
                | Error::StepTooLarge(_)
                | Error::NonUniqueEquilibrium(_)
                | Error::NoStationaryState
                | Error::TraceDrift(_)
                | Error::EnsembleAborted { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
