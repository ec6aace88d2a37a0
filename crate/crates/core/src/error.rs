use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("diffusivity {name} must be positive and finite, got {value}")]
    InvalidDiffusivity { name: &'static str, value: f64 },

    #[error("grid needs j_max >= 2, got {0}")]
    InvalidGrid(usize),

    #[error("field has {found} entries, grid expects {expected}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("singular flux system{}: 1 + a*D13*xi2 + b*D23*xi1 = {denominator:e}", node_suffix(*.node))]
    SingularSystem {
        node: Option<usize>,
        denominator: f64,
    },

    #[error("composition at node {node} leaves the simplex: xi1 = {xi1}, xi2 = {xi2}")]
    InadmissibleState { node: usize, xi1: f64, xi2: f64 },

    #[error("Richardson iteration {k}: {source}")]
    Iteration {
        k: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("time step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid scheme configuration: {0}")]
    Scheme(String),

    #[error("unknown scenario '{name}'; valid names: {}", valid.join(", "))]
    UnknownScenario {
        name: String,
        valid: Vec<&'static str>,
    },

    #[error("no snapshot at t = {0:e}")]
    MissingSnapshot(f64),

    #[error("series are on different grids (j_max {0} vs {1})")]
    GridMismatch(usize, usize),

    #[error("config: {0}")]
    Config(String),

    #[error("malformed snapshot CSV: {0}")]
    SnapshotFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn node_suffix(node: Option<usize>) -> String {
    node.map(|j| format!(" at node {j}")).unwrap_or_default()
}

impl Error {
    /// True for errors raised by bad input rather than by a failing run.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::InvalidDiffusivity { .. }
            | Error::InvalidGrid(_)
            | Error::LengthMismatch { .. }
            | Error::InadmissibleState { .. }
            | Error::Scheme(_)
            | Error::UnknownScenario { .. }
            | Error::MissingSnapshot(_)
            | Error::GridMismatch(..)
            | Error::Config(_)
            | Error::SnapshotFormat(_)
            | Error::Csv(_) => true,
            Error::SingularSystem { .. } | Error::Io(_) => false,
            Error::Iteration { source, .. } | Error::Step { source, .. } => source.is_validation(),
        }
    }

    pub(crate) fn at_node(self, j: usize) -> Self {
        match self {
            Error::SingularSystem { denominator, .. } => Error::SingularSystem {
                node: Some(j),
                denominator,
            },
            other => other,
        }
    }
}
