use thiserror::Error;

/// Validation failures of physical inputs.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("filling factor must lie in (0, 1], got {0}")]
    FillingFactorRange(f64),
    #[error("permeability parameters unphysical: 1 + chi - |kappa| = {0} <= 0")]
    UnphysicalPermeability(f64),
    #[error("duplicate photon mode label `{0}`")]
    DuplicateLabel(String),
    #[error("{0}")]
    Shape(String),
    #[error("photon mode `{label}`: port rates {ports} Hz exceed total loss {total} Hz")]
    PortRates { label: String, ports: f64, total: f64 },
    #[error("axis must be strictly increasing with at least {min} points")]
    Axis { min: usize },
}

/// Failures of the dielectric sphere solver.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SphereError {
    #[error("angular index must be >= 1 (no radiating l = 0 mode exists)")]
    ZeroEll,
    #[error("relative permittivity must exceed 1, got {0}")]
    Permittivity(f64),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("no sign change of the frequency mismatch over eps in [{lo}, {hi}] (df = {df_lo} .. {df_hi} Hz)")]
    Bracket { lo: f64, hi: f64, df_lo: f64, df_hi: f64 },
    #[error("mode {0} not found below the scan limit")]
    ModeNotFound(String),
    #[error("quadrature did not converge: node doubling disagreement {0:.3e}")]
    Quadrature(f64),
    #[error("root polishing failed near x = {0}")]
    Polish(String),
}

/// Failures of the spectroscopy fits.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("not enough data: need {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("input trace is not sorted by frequency")]
    Unsorted,
    #[error("no free parameters to fit")]
    UnderDetermined,
    #[error("singular Jacobian")]
    SingularJacobian,
    #[error("did not converge after {iterations} iterations (last iterate {last:?})")]
    NotConverged { iterations: usize, last: Vec<f64> },
    #[error("invalid input: {0}")]
    Invalid(String),
}
