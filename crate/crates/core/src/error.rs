use std::fmt;

/// Errors raised by every layer of the workbench.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("unknown measurement `{0}`")]
    UnknownMeasurement(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ill-typed term ({rule}): {detail}")]
    IllTyped { rule: &'static str, detail: String },

    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("enumeration guard exceeded: {what} needs about {estimate} items (guard {guard}; raise CTXLAB_GUARD to override)")]
    GuardExceeded {
        what: String,
        estimate: u128,
        guard: u128,
    },

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn domain(msg: impl fmt::Display) -> Self {
        Error::Domain(msg.to_string())
    }

    pub fn ill_typed(rule: &'static str, detail: impl fmt::Display) -> Self {
        Error::IllTyped {
            rule,
            detail: detail.to_string(),
        }
    }

    pub fn invalid(msg: impl fmt::Display) -> Self {
        Error::Invalid(msg.to_string())
    }
}

/// Default bound on enumerations (LP columns, protocols, search candidates).
pub const DEFAULT_GUARD: u128 = 100_000;

/// The active enumeration guard; `CTXLAB_GUARD` overrides the default.
pub fn guard() -> u128 {
    std::env::var("CTXLAB_GUARD")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_GUARD)
}

pub(crate) fn check_guard(what: impl Into<String>, estimate: u128) -> Result<()> {
    let limit = guard();
    if estimate > limit {
        return Err(Error::GuardExceeded {
            what: what.into(),
            estimate,
            guard: limit,
        });
    }
    Ok(())
}
