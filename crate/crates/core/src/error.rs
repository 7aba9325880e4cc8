use std::fmt;

/// Errors raised across the toolkit.
///
/// Each variant corresponds to one failure category; [`QacError::category`]
/// gives a stable short name and [`QacError::exit_code`] a process exit code
/// for the command-line driver.
#[derive(Debug, thiserror::Error)]
pub enum QacError {
    #[error("input error: {0}")]
    Input(String),
    #[error("unsupported topology: {0}")]
    UnsupportedTopology(String),
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("size error: {0}")]
    Size(String),
    #[error("scheme error: {0}")]
    Scheme(String),
    #[error("unsupported structure: {0}")]
    UnsupportedStructure(String),
    #[error("placement error: {0}")]
    Placement(String),
    #[error("statistics error: {0}")]
    Statistics(String),
    #[error("reporting error: {0}")]
    Reporting(String),
    #[error("validation error at `{path}`: {message}")]
    Validation { path: String, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serialization(String),
}

impl QacError {
    pub fn category(&self) -> Category {
        match self {
            QacError::Input(_) => Category::Input,
            QacError::UnsupportedTopology(_) => Category::Topology,
            QacError::Encoding(_) => Category::Encoding,
            QacError::Size(_) => Category::Size,
            QacError::Scheme(_) => Category::Scheme,
            QacError::UnsupportedStructure(_) => Category::Structure,
            QacError::Placement(_) => Category::Placement,
            QacError::Statistics(_) => Category::Statistics,
            QacError::Reporting(_) => Category::Reporting,
            QacError::Validation { .. } => Category::Validation,
            QacError::Io(_) => Category::Io,
            QacError::Serialization(_) => Category::Serialization,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.category() as i32
    }

    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        QacError::Validation { path: path.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Input = 2,
    Topology = 3,
    Encoding = 4,
    Size = 5,
    Scheme = 6,
    Structure = 7,
    Placement = 8,
    Statistics = 9,
    Reporting = 10,
    Validation = 11,
    Io = 12,
    Serialization = 13,
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Category::Input => "input",
            Category::Topology => "topology",
            Category::Encoding => "encoding",
            Category::Size => "size",
            Category::Scheme => "scheme",
            Category::Structure => "structure",
            Category::Placement => "placement",
            Category::Statistics => "statistics",
            Category::Reporting => "reporting",
            Category::Validation => "validation",
            Category::Io => "io",
            Category::Serialization => "serialization",
        };
        f.write_str(name)
    }
}

impl From<serde_json::Error> for QacError {
    fn from(e: serde_json::Error) -> Self {
        QacError::Serialization(e.to_string())
    }
}

impl From<csv::Error> for QacError {
    fn from(e: csv::Error) -> Self {
        QacError::Serialization(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, QacError>;
