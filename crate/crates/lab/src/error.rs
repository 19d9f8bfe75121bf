use std::path::{Path, PathBuf};

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}{}: {source}", line.map(|l| format!(" line {l}")).unwrap_or_default())]
    Json {
        path: PathBuf,
        line: Option<usize>,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<LabError>,
    },
    #[error(transparent)]
    Core(#[from] armor_core::Error),
    #[error("{0}")]
    Format(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        LabError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn json(path: &Path, line: Option<usize>, source: serde_json::Error) -> Self {
        LabError::Json {
            path: path.to_path_buf(),
            line,
            source,
        }
    }

    /// Attaches a file name to errors that do not carry one yet.
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            e @ (LabError::Io { .. } | LabError::Json { .. } | LabError::InFile { .. }) => e,
            e => LabError::InFile {
                path: path.to_path_buf(),
                source: Box::new(e),
            },
        }
    }
}
