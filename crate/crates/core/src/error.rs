use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed GraphML: {0}")]
    Xml(String),

    #[error("node `{0}` has no Latitude/Longitude")]
    MissingCoordinates(String),

    #[error("topology is disconnected ({} components): {}", .0.len(), fmt_components(.0))]
    Disconnected(Vec<Vec<String>>),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("facility set is empty")]
    EmptyPolicy,

    #[error("instance too large for exact enumeration: {subsets:.3e} subsets (limit {limit:.3e})")]
    InstanceTooLarge { subsets: f64, limit: f64 },

    #[error("unknown topology `{0}`")]
    UnknownTopology(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }
}

fn fmt_components(components: &[Vec<String>]) -> String {
    components
        .iter()
        .map(|c| format!("{{{}}}", c.join(", ")))
        .collect::<Vec<_>>()
        .join(" ")
}
