use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("eigensolver did not converge (residual {residual:.3e})")]
    EigenNonConvergence { residual: f64 },
    #[error("no critical value: nu0 does not change sign on [{lo}, {hi}]")]
    NoCriticalValue { lo: f64, hi: f64 },
    #[error("simplicity violated: nu0 = {nu0:.3e}, nu1 = {nu1:.3e}")]
    SimplicityViolated { nu0: f64, nu1: f64 },
    #[error("zero denominator in Rayleigh quotient")]
    ZeroProfile,
    #[error("degree overflow, raise d_max (needed {needed}, d_max {d_max})")]
    DegreeOverflow { needed: usize, d_max: usize },
    #[error("inconsistent transverse system (residual {residual:.3e})")]
    InconsistentSystem { residual: f64 },
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),
    #[error("no front in this regime: {0}")]
    NoProfile(String),
    #[error("connection not found: {0}")]
    ConnectionNotFound(String),
    #[error("triangle invariance violated at X = {x:.6}")]
    TriangleViolated { x: f64 },
    #[error("conserved quantity is only defined for the water-wave reduction")]
    NotHamiltonian,
    #[error("desingularization failed: {0}")]
    DesingularizationFailed(String),
    #[error("nondegeneracy failed: {0}")]
    NondegeneracyFailed(String),
    #[error("no conjugate flow near guess (residual {residual:.3e})")]
    NoConjugateFlow { residual: f64 },
    #[error("interface exits channel at x = {x:.6}")]
    InterfaceExitsChannel { x: f64 },
    #[error("no critical layer: {0}")]
    NoCriticalLayer(String),
    #[error("eye absent: {0}")]
    EyeAbsent(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("nothing to verify: {0}")]
    NothingToVerify(String),
    #[error("root finding failed: {0}")]
    RootNotFound(String),
}

pub type Result<T> = std::result::Result<T, Error>;
