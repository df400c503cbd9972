use alloc::string::String;

/// Errors raised by the inference engine and its building blocks.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("block structure mismatch: {0}")]
    StructureMismatch(String),

    #[error("state {value} out of range for variable {var} with cardinality {card}")]
    StateOutOfRange { var: usize, value: usize, card: usize },

    #[error("assignment has {got} entries, model has {expected} variables")]
    AssignmentLength { expected: usize, got: usize },

    #[error("contraction {0} outside [0, 1]")]
    DeltaOutOfRange(f64),

    #[error("invalid marginal vector: {0}")]
    InvalidMarginals(String),

    #[error("invalid edge appearance probabilities: {0}")]
    InvalidEdgeAppearance(String),

    #[error("gradient undefined on the boundary: entry {index} is {value}")]
    BoundaryGradient { index: usize, value: f64 },

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("joint state space of {states} exceeds the cap of {cap}")]
    StateSpaceCap { states: u128, cap: u128 },

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("empty oracle portfolio")]
    EmptyPortfolio,

    #[error("inconsistent certificate: kappa {kappa} below known vertex energy {energy}")]
    InconsistentCertificate { kappa: f64, energy: f64 },

    #[error("barycentric coordinates drifted from the iterate by {0}")]
    CoordinateDrift(f64),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("singular reduced Laplacian")]
    SingularLaplacian,

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
