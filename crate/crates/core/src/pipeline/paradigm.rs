use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Whether the condition variable is manipulated (`Stimulus`, a root of the
/// graph) or recorded after the fact (`Response`, a sink).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Paradigm {
    #[default]
    Stimulus,
    Response,
}

impl Paradigm {
    /// Single-letter prefix used in rule identifiers.
    pub fn letter(self) -> char {
        match self {
            Paradigm::Stimulus => 'S',
            Paradigm::Response => 'R',
        }
    }
}

impl std::str::FromStr for Paradigm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stimulus" => Ok(Paradigm::Stimulus),
            "response" => Ok(Paradigm::Response),
            other => Err(Error::invalid(format!(
                "unknown paradigm `{other}` (expected stimulus or response)"
            ))),
        }
    }
}

impl std::fmt::Display for Paradigm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Paradigm::Stimulus => "stimulus",
            Paradigm::Response => "response",
        })
    }
}
