use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("ring size {0} is not a positive multiple of 4")]
    BadRingSize(usize),

    #[error("parameter `{name}` must be finite, got {value}")]
    NonFiniteParameter { name: &'static str, value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("node index {index} out of range for a ring of {n} oscillators")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("expected {expected} entries, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },

    #[error("amplitude of node {node} is {amplitude:e}, at or below the underflow threshold")]
    AmplitudeUnderflow { node: usize, amplitude: f64 },

    #[error("integration failed at step {step} (t = {time}): {source}")]
    StepFailed {
        step: usize,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite value encountered during integration at step {step}")]
    NonFinite { step: usize },

    #[error("wavenumber {k} out of range; a ring of {n} has wavenumbers 0..{}", n / 2)]
    WavenumberOutOfRange { k: usize, n: usize },

    #[error("static eigenvalues require uniform frequencies, but detuning is {0}")]
    DetunedSystem(f64),

    #[error("Floquet analysis requires nonzero detuning")]
    ZeroDetuning,

    #[error("coupling function violates the parity condition (residual {residual:e})")]
    InadmissibleCoupling { residual: f64 },

    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
}
