//! The `flag{...}` answer format shared by generators, solvers and scoring.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Longest body accepted inside the braces.
pub const MAX_BODY_LEN: usize = 32;

/// Body length used by the generator.
pub const DEFAULT_BODY_LEN: usize = 10;

pub const FLAG_PREFIX: &str = "flag{";

/// Characters a flag body may contain.
pub const BODY_ALPHABET: &[u8] = b"abcdefghijklmnopqrstuvwxyz0123456789_";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlagError {
    #[error("flag body is empty")]
    Empty,
    #[error("flag body is {0} characters, the limit is {MAX_BODY_LEN}")]
    TooLong(usize),
    #[error("flag body contains {0:?}, only [a-z0-9_] is allowed")]
    InvalidChar(char),
    #[error("{0:?} is not of the form flag{{...}}")]
    NotAFlag(String),
}

/// A recovered or planted flag. Holds only the body; [`Flag::render`]
/// produces the `flag{body}` form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Flag {
    body: String,
}

pub(crate) fn is_body_char(c: char) -> bool {
    c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_'
}

fn check_body(body: &str) -> Result<(), FlagError> {
    if body.is_empty() {
        return Err(FlagError::Empty);
    }
    if let Some(c) = body.chars().find(|c| !is_body_char(*c)) {
        return Err(FlagError::InvalidChar(c));
    }
    let len = body.len();
    if len > MAX_BODY_LEN {
        return Err(FlagError::TooLong(len));
    }
    Ok(())
}

impl Flag {
    pub fn from_body(body: &str) -> Result<Self, FlagError> {
        check_body(body)?;
        Ok(Flag {
            body: body.to_string(),
        })
    }

    /// Parses the rendered `flag{...}` form. No surrounding whitespace is
    /// tolerated.
    pub fn parse(rendered: &str) -> Result<Self, FlagError> {
        rendered
            .strip_prefix(FLAG_PREFIX)
            .and_then(|rest| rest.strip_suffix('}'))
            .ok_or_else(|| FlagError::NotAFlag(rendered.to_string()))
            .and_then(Flag::from_body)
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    pub fn render(&self) -> String {
        format!("flag{{{}}}", self.body)
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "flag{{{}}}", self.body)
    }
}

impl FromStr for Flag {
    type Err = FlagError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Flag::parse(s)
    }
}

impl Serialize for Flag {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for Flag {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Flag::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// `flag{` + body + `}` after checking the body charset.
pub fn render_flag(body: &str) -> Result<String, FlagError> {
    Flag::from_body(body).map(|f| f.render())
}

/// True iff `candidate` is exactly `flag{[a-z0-9_]{1,32}}`.
pub fn validate_flag_format(candidate: &str) -> bool {
    Flag::parse(candidate).is_ok()
}

/// Every well-formed flag occurring as a substring of `text`, in order of
/// appearance. Bodies are read greedily up to the closing brace.
pub fn find_flags(text: &str) -> Vec<Flag> {
    let mut found = Vec::new();
    let mut rest = text;
    while let Some(pos) = rest.find(FLAG_PREFIX) {
        let after = &rest[pos + 5..];
        if let Some(end) = after.find('}') {
            if let Ok(flag) = Flag::from_body(&after[..end]) {
                found.push(flag);
            }
        }
        rest = after;
    }
    found
}
