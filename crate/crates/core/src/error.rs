use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates a domain invariant. `name` is the dotted key path
    /// used in configuration files (e.g. `frontend.cmrr`).
    #[error("invalid value for `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("voltage referral needs an explicit transimpedance gain")]
    VoltageReferral,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("scan point {index}: {source}")]
    ScanPoint {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// Returns the same error with `prefix.` prepended to the parameter path.
    pub fn within(self, prefix: &str) -> Self {
        match self {
            Error::InvalidParameter { name, reason } => Error::InvalidParameter {
                name: format!("{prefix}.{name}"),
                reason,
            },
            other => other,
        }
    }

    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Numerical(_) => true,
            Error::ScanPoint { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub(crate) fn ensure(cond: bool, name: &str, reason: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::invalid(name, reason()))
    }
}
