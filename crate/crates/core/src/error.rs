use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("generator {index} is not a permutation of 0..{degree}")]
    NotAPermutation { index: usize, degree: usize },

    #[error("group closure exceeded the size cap of {cap} elements")]
    SizeCapExceeded { cap: usize },

    #[error("unknown group preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid multiplication table: {0}")]
    InvalidTable(String),

    #[error("not a subgroup: {0}")]
    NotASubgroup(String),

    #[error("invalid group action: {0}")]
    InvalidAction(String),

    #[error("group mismatch between {0} and {1}")]
    GroupMismatch(String, String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("not a representation: {0}")]
    NotARepresentation(String),

    #[error("not a unitary error basis: {0}")]
    NotAUeb(String),

    #[error("no equivariant structure: {0}")]
    NotEquivariant(String),

    #[error("not an orthogonal error basis: {0}")]
    NotAnOeb(String),

    #[error("refused, no solution exists: {0}")]
    Refused(String),

    #[error("no solution in family: {0}")]
    NoSolutionInFamily(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("incompatible channel: {0}")]
    IncompatibleChannel(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
