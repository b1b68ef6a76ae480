// SPDX-License-Identifier: Apache-2.0

//! JSON files for circuits, tasks and spacetimes.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::Task;
use crate::circuit::SpacetimeCircuit;
use crate::geometry::Spacetime;

/// A file that could not be read or decoded. `line`/`column` are 1-based
/// and 0 when unknown.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub source: String,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}: {}", self.source, self.message)
        } else {
            write!(f, "{}:{}:{}: {}", self.source, self.line, self.column, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

pub fn parse_str<T: DeserializeOwned>(text: &str, source: &str) -> Result<T, ParseError> {
    serde_json::from_str(text).map_err(|e| ParseError {
        source: source.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T, ParseError> {
    let path = path.as_ref();
    let source = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|e| ParseError { source: source.clone(), line: 0, column: 0, message: e.to_string() })?;
    parse_str(&text, &source)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("in-memory values serialise")
}

pub fn save<T: Serialize>(path: impl AsRef<Path>, value: &T) -> std::io::Result<()> {
    let mut text = to_json(value);
    text.push('\n');
    fs::write(path, text)
}

pub fn load_circuit(path: impl AsRef<Path>) -> Result<SpacetimeCircuit, ParseError> {
    load(path)
}

pub fn load_task(path: impl AsRef<Path>) -> Result<Task, ParseError> {
    load(path)
}

pub fn load_spacetime(path: impl AsRef<Path>) -> Result<Spacetime, ParseError> {
    load(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_str::<Spacetime>("{\n  \"backend\": ", "mem").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.to_string().starts_with("mem:2:"));
    }

    #[test]
    fn cyclic_relation_is_rejected() {
        let text = r#"{"backend":"causal_set","elements":["a","b"],"relations":[["a","b"],["b","a"]]}"#;
        let err = parse_str::<Spacetime>(text, "mem").unwrap_err();
        assert!(err.message.contains("cycle"), "{}", err.message);
    }
}
