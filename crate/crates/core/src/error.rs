use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter is outside its allowed range.
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An estimator was asked for a value from an empty sample.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A CHSH evaluation is missing one of its four settings.
    #[error("missing setting {0}")]
    MissingSetting(String),

    /// Matched-basis estimators need identical A and B bases.
    #[error("visibility needs matched bases, got A at {a_deg} deg and B at {b_deg} deg")]
    MismatchedBases { a_deg: f64, b_deg: f64 },

    #[error("fringe fit failed: {0}")]
    FitFailure(String),

    /// The requested visibility is above what the amplifier can transmit.
    #[error("target visibility {target} exceeds the 2/pi transfer limit")]
    Unreachable { target: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
