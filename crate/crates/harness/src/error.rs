use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{method}: {source}")]
    Method {
        method: String,
        #[source]
        source: gaugephase::Error,
    },
    #[error(transparent)]
    Core(#[from] gaugephase::Error),
    #[error("image: {0}")]
    Image(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Short snake_case tag for machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Method { source, .. } => source.kind(),
            Self::Core(e) => e.kind(),
            Self::Image(_) => "image",
            Self::Config(_) => "config",
            Self::Io(_) => "io",
        }
    }

    pub(crate) fn tagged(method: &str) -> impl FnOnce(gaugephase::Error) -> Self + '_ {
        move |source| Self::Method {
            method: method.to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
