use thiserror::Error;

/// Failure modes of the simulation pipeline.
///
/// Sweeps capture these per cell through [`Error::code`]; the CLI maps them
/// to exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid sweep definition: {0}")]
    InvalidSpec(String),

    #[error("mean-field iteration did not converge after {iterations} iterations (last step {last_step:.3e})")]
    NoConvergence { iterations: usize, last_step: f64 },

    #[error("saturable gain dominates: classical cavity fixed point is unstable (abscissa {abscissa:.3e})")]
    GainDominated { abscissa: f64 },

    #[error("eigenvalue solver failed to converge")]
    EigFailure,

    #[error("drift matrix is unstable (spectral abscissa {abscissa:.3e})")]
    Unstable { abscissa: f64 },

    #[error("Lyapunov system is numerically singular (spectral abscissa {abscissa:.3e})")]
    SingularSolve { abscissa: f64 },

    #[error("covariance integration did not reach steady state by t = {t_max} (|dV/dt| = {rate:.3e})")]
    NotConverged { t_max: f64, rate: f64 },

    #[error("entropy function evaluated below its domain: x = {x}")]
    DomainError { x: f64 },

    #[error("eigenvalues of Omega*V do not form conjugate imaginary pairs (mismatch {mismatch:.3e})")]
    PairingError { mismatch: f64 },

    #[error("closed-form and eigen-method symplectic eigenvalues disagree: {closed_form} vs {eigen}")]
    FormulaMismatch { closed_form: f64, eigen: f64 },

    #[error("negative discriminant {value:.3e} in symplectic eigenvalue formula")]
    NegativeDiscriminant { value: f64 },
}

impl Error {
    /// Short stable identifier used in CSV status columns.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParams(_) => "invalid_params",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::NoConvergence { .. } => "no_convergence",
            Error::GainDominated { .. } => "gain_dominated",
            Error::EigFailure => "eig_failure",
            Error::Unstable { .. } => "unstable",
            Error::SingularSolve { .. } => "singular_solve",
            Error::NotConverged { .. } => "not_converged",
            Error::DomainError { .. } => "domain_error",
            Error::PairingError { .. } => "pairing_error",
            Error::FormulaMismatch { .. } => "formula_mismatch",
            Error::NegativeDiscriminant { .. } => "negative_discriminant",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
