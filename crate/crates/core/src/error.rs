use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("player index {index} out of range 1..={players}")]
    PlayerOutOfRange { index: usize, players: usize },

    #[error("invalid strategy profile: {0}")]
    InvalidProfile(String),

    #[error("polynomial is not multi-homogeneous: {0}")]
    NotMultiHomogeneous(String),

    #[error("no value assigned to variable {0}")]
    MissingVariable(String),

    #[error("Chow classes from different rings (n = {0} and n = {1})")]
    ChowMismatch(usize, usize),

    #[error("target for player {player} is not in the image of the payoff map: {reason}")]
    NotInImage { player: usize, reason: String },

    #[error("no valid slot assignment: {0}")]
    MatchingFailure(String),

    #[error("point transport failed: {0}")]
    TransportFailure(String),

    #[error("degenerate game: {0}")]
    DegenerateGame(String),

    #[error("elimination collapsed: {0}")]
    EliminationCollapse(String),

    #[error("degenerate fiber: {0}")]
    DegenerateFiber(String),

    #[error("unlucky hyperplane: {0}")]
    UnluckyHyperplane(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("consistency check failed: {0}")]
    Assertion(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag for the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGame(_) => "InvalidGame",
            Error::PlayerOutOfRange { .. } => "PlayerOutOfRange",
            Error::InvalidProfile(_) => "InvalidProfile",
            Error::NotMultiHomogeneous(_) => "NotMultiHomogeneous",
            Error::MissingVariable(_) => "MissingVariable",
            Error::ChowMismatch(..) => "ChowMismatch",
            Error::NotInImage { .. } => "NotInImage",
            Error::MatchingFailure(_) => "MatchingFailure",
            Error::TransportFailure(_) => "TransportFailure",
            Error::DegenerateGame(_) => "DegenerateGame",
            Error::EliminationCollapse(_) => "EliminationCollapse",
            Error::DegenerateFiber(_) => "DegenerateFiber",
            Error::UnluckyHyperplane(_) => "UnluckyHyperplane",
            Error::Precondition(_) => "Precondition",
            Error::Format(_) => "Format",
            Error::Assertion(_) => "Assertion",
            Error::Json(_) => "Json",
            Error::Io(_) => "Io",
        }
    }
}
