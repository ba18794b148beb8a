use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed element: {0}")]
    Malformed(String),

    #[error("invalid group spec: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A ball or walk table would exceed the configured vertex cap.
    #[error("size limit exceeded at radius {radius}: more than {cap} vertices{}", hint.as_deref().map(|h| format!(" ({h})")).unwrap_or_default())]
    SizeLimit {
        radius: u32,
        cap: usize,
        hint: Option<String>,
    },

    #[error("generating set is not symmetric")]
    NotSymmetric,

    #[error("word count overflowed 128 bits at step {0}")]
    Overflow(u32),

    #[error("input bound is not certified: {0}")]
    NotCertified(String),

    #[error("crossing threshold unreachable: {0}")]
    Unreachable(String),
}

impl Error {
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::SizeLimit { .. } | Error::Overflow(_))
    }
}
