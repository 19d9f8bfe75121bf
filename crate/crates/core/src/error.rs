use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid distribution ({what}): {reason}")]
    InvalidDistribution { what: String, reason: String },

    #[error("reward {value} at (s={state}, a={action}) is outside [0, 1]")]
    RewardOutOfRange { state: usize, action: usize, value: f64 },

    #[error("discount {0} is outside [0, 1)")]
    InvalidDiscount(f64),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("every model assigns zero likelihood to the dataset")]
    AllModelsZeroLikelihood,

    #[error("policy enumeration needs {needed} policies, cap is {cap}")]
    EnumerationCap { needed: String, cap: usize },

    #[error("mixed solver stopped with duality gap {gap:e} above tolerance {eps:e}")]
    NonConvergence { gap: f64, eps: f64 },

    #[error("reference policy is not a member of the deterministic policy class")]
    ReferenceNotInClass,

    #[error("behavior distribution is degenerate: {0}")]
    DegenerateBehavior(String),

    #[error("singular linear system in policy evaluation")]
    Singular,
}
