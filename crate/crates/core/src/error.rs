use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid axis {axis}: point count {count} is not a positive power of two")]
    GridPoints { axis: usize, count: usize },
    #[error("grid axis {axis}: extent {extent} must be positive and finite")]
    GridExtent { axis: usize, extent: f64 },
    #[error("grid must have at least one axis")]
    EmptyGrid,
    #[error("sample count mismatch: expected {expected}, got {actual}")]
    SampleCount { expected: usize, actual: usize },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },
    #[error("expected a {expected}-valued field")]
    Codomain { expected: &'static str },
    #[error("fields live on different grids or time axes")]
    IncompatibleFields,
    #[error("non-finite sample at index {index}")]
    NonFiniteSample { index: usize },
    #[error(
        "mollifier width 1/{n} is not resolvable: need at least {required} points on axis {axis}"
    )]
    Unresolvable { n: u32, axis: usize, required: usize },
    #[error("invalid exponent {0}: exponents must lie in (1, inf]")]
    InvalidExponent(String),
    #[error("invalid subcriticality threshold {0}: expected 1 or 2")]
    InvalidThreshold(u32),
    #[error("exponents {exponents} are not subcritical at threshold {threshold}")]
    NotSubcritical { exponents: String, threshold: u32 },
    #[error("time horizon must be positive and finite, got {0}")]
    InvalidHorizon(f64),
    #[error("step count must be at least 1")]
    InvalidSteps,
    #[error("expected t > s, got s = {s}, t = {t}")]
    InvalidTimeOrder { s: f64, t: f64 },
    #[error("matrix is not symmetric positive definite")]
    NotPositiveDefinite,
    #[error("ellipticity violated at node {node}: eigenvalue {eigenvalue} outside [1/{delta}, {delta}]")]
    Ellipticity { node: usize, eigenvalue: f64, delta: f64 },
    #[error("diffusion matrix is not symmetric at node {node}")]
    Asymmetric { node: usize },
    #[error(
        "fixed-point iteration did not converge at step {step} after {iterations} iterations \
         (defect {defect:e}, contraction estimate {contraction:.3}); refine the grid or time step"
    )]
    NonConvergence { step: usize, iterations: usize, defect: f64, contraction: f64 },
    #[error("source has zero norm")]
    ZeroNorm,
    #[error("smoothness index {alpha} outside the admissible range [0, {upper})")]
    AlphaOutOfRange { alpha: f64, upper: f64 },
    #[error("map is not certified (gradient sup {grad_sup} > {eta})")]
    NotCertified { grad_sup: f64, eta: f64 },
    #[error(
        "horizon fell below {t_min:e} without certification (last gradient sup {grad_sup}); \
         drift too large at this resolution"
    )]
    HorizonExhausted { t_min: f64, grad_sup: f64 },
    #[error("Newton inversion of the transformation failed to converge (residual {residual:e})")]
    InversionFailed { residual: f64 },
    #[error("dyadic level {0} exceeds the maximum of 30")]
    LevelOverflow(u32),
    #[error("non-finite state at step {step}")]
    NonFiniteState { step: usize },
    #[error("at least {min} samples are required, got {n}")]
    TooFewSamples { n: usize, min: usize },
    #[error("diffusion matrix is singular at t = {t}")]
    SingularDiffusion { t: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
