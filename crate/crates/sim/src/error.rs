use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] anchor_coords::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Failed(String),
}

impl SimError {
    /// 1 for bad input, 2 for failures while running.
    pub fn exit_code(&self) -> u8 {
        use anchor_coords::Error as E;
        match self {
            Self::Read { .. } | Self::Parse { .. } | Self::Input(_) => 1,
            Self::Core(
                E::InvalidConfig(_)
                | E::InvalidArgument(_)
                | E::IndexOutOfRange { .. }
                | E::TooFewAnchors { .. }
                | E::DuplicateAnchor { .. }
                | E::NonFinite
                | E::CoincidentPoints
                | E::Singularity { .. },
            ) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
