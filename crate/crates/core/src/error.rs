use std::fmt;

use serde::{Deserialize, Serialize};

/// Named structural assumptions of the model that scenarios may waive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Assumption {
    /// Unified productivity exceeds fragmented productivity at every peace level.
    A1,
    /// Expropriation risk is higher under fragmentation.
    A2,
    /// Rents and autonomous control are higher under fragmentation.
    A3,
    /// The unified productivity slope in peace exceeds the fragmented one.
    A5,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Assumption::A1 => "A1",
            Assumption::A2 => "A2",
            Assumption::A3 => "A3",
            Assumption::A5 => "A5",
        };
        f.write_str(s)
    }
}

/// One failed validation check.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub assumption: Option<Assumption>,
    pub message: String,
}

impl Violation {
    pub(crate) fn plain(message: impl Into<String>) -> Self {
        Self {
            assumption: None,
            message: message.into(),
        }
    }

    pub(crate) fn assumption(assumption: Assumption, message: impl Into<String>) -> Self {
        Self {
            assumption: Some(assumption),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.assumption {
            Some(a) => write!(f, "{a} violated: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("undefined threshold: {0}")]
    UndefinedThreshold(String),

    #[error("{}", join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("grid construction error: {0}")]
    Grid(String),

    #[error("oracle refused: {nodes} states exceed the limit of {limit}")]
    OracleTooLarge { nodes: usize, limit: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown parameter `{name}`; valid names: {}", .valid.join(", "))]
    UnknownParameter { name: String, valid: Vec<String> },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
