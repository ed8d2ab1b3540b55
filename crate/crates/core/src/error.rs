use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid curvature profile: {0}")]
    InvalidProfile(String),

    #[error("invalid scaling family: {0}")]
    InvalidFamily(String),

    #[error("invalid quadrature grid: {0}")]
    InvalidGrid(String),

    #[error("eps = {eps} outside the admissible range (0, {eps_max}]")]
    EpsOutOfRange { eps: f64, eps_max: f64 },

    #[error("degenerate potential: the integral of the potential vanishes")]
    DegeneratePotential,

    #[error("width exceeds curvature radius: 1 + eps^(alpha-1) u sqrt(lambda) gamma = {denominator} <= 0")]
    WidthExceedsCurvatureRadius { denominator: f64 },

    #[error("transverse mode index must be >= 1")]
    ZeroModeIndex,

    #[error("ODE integration failed at s = {at}: {reason}")]
    Integration { at: f64, reason: String },

    #[error("eigenvalue computation failed: {0}")]
    Eigen(String),

    #[error("non-simple resonance ({multiplicity} eigenvalues near -1) is not supported")]
    NonSimpleResonance { multiplicity: usize },

    #[error("no zero-energy resonance: {0}")]
    NotResonant(String),

    #[error("cross-method disagreement for {quantity}: direct = {direct}, via phi0 = {via_phi}")]
    ConstantsMismatch {
        quantity: &'static str,
        direct: f64,
        via_phi: f64,
    },

    #[error("c1 and c2 cannot both vanish")]
    VanishingCouplings,

    #[error("invalid momentum k = {re} + {im}i: {reason}")]
    InvalidMomentum { re: f64, im: f64, reason: &'static str },

    #[error("k^2 is a pole of the resolvent (bound-state energy)")]
    ResolventPole,

    #[error("k^2 in point spectrum of scaled operator (singular T matrix at eps = {eps})")]
    SingularTMatrix { eps: f64 },

    #[error("singular matrix")]
    SingularMatrix,

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("target mismatch: {0}")]
    TargetMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
