//! Crate-wide error type.

/// Errors across the simulation pipeline.
///
/// [`Error::is_numerical`] separates convergence/stability failures from
/// input validation, which CLI layers map onto distinct exit codes.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid rotor spec: {0}")]
    InvalidRotorSpec(String),

    #[error("J={j} outside basis range 0..={max}")]
    JOutOfRange { j: u32, max: u32 },

    #[error("invalid quantum numbers: |M|={m} exceeds J={j}")]
    InvalidQuantumNumbers { j: u32, m: i32 },

    #[error("matrix is not unitary (max |U^dag U - I| = {defect:.3e}, tolerance {tol:.1e})")]
    NonUnitary { defect: f64, tol: f64 },

    #[error("invalid pulse parameters: {0}")]
    InvalidPulseParams(String),

    #[error("invalid error model: {0}")]
    InvalidErrorModel(String),

    #[error("propagation window [{t0:.3e}, {tf:.3e}] s does not cover waveform window [{w0:.3e}, {w1:.3e}] s")]
    WindowMismatch { t0: f64, tf: f64, w0: f64, w1: f64 },

    #[error("time step {dt:.3e} s exceeds limit {max:.3e} s (carrier period / 40)")]
    StepTooLarge { dt: f64, max: f64 },

    #[error("unitarity drift {drift:.3e} exceeds 1e-8; propagation failed")]
    UnitarityLoss { drift: f64 },

    #[error("snapshot time {t:.3e} s outside the integration range [{t0:.3e}, {tf:.3e}] s")]
    SnapshotOutOfRange { t: f64, t0: f64, tf: f64 },

    #[error("orientation trace spans {periods:.2} oscillation periods; need at least 2")]
    TraceTooShort { periods: f64 },

    #[error("scan axes must target distinct parameters")]
    DuplicateScanAxes,

    #[error("invalid scan axis: {0}")]
    InvalidScanAxis(String),

    #[error("circuit windows overlap: gate {index} starts before the previous gate ends")]
    CircuitOverlap { index: usize },

    #[error("config parse error: {0}")]
    ConfigParse(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::UnitarityLoss { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
