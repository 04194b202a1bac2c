//! Generated challenge instances and the redacted view handed to solvers.
//!
//! Everything a solver may use is rendered into the question as a fenced
//! block of `key: value` lines, opened and closed by a line holding three
//! backticks (shown here as quotes):
//!
//! ```text
//! The courier's note read:
//! '''
//! ciphertext: iodj{kl}
//! '''
//! Recover the flag.
//! ```
//!
//! [`PublicChallenge`] re-parses that block from the question text, so a
//! solver sees exactly what an agent would see and nothing else.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::flag::Flag;
use crate::taxonomy::{Difficulty, SubtypeId};

pub type Artifacts = BTreeMap<String, String>;

pub const FENCE: &str = "```";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArtifactError {
    #[error("question has no fenced artifact block")]
    MissingBlock,
    #[error("artifact block is not closed")]
    Unterminated,
    #[error("artifact line {0:?} is not `key: value`")]
    MalformedLine(String),
    #[error("artifact {0:?} appears twice")]
    Duplicate(String),
    #[error("artifact value for {0:?} contains a newline")]
    MultilineValue(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Challenge {
    pub id: String,
    pub subtype: SubtypeId,
    pub difficulty: Difficulty,
    pub question: String,
    pub hint: String,
    pub expected_flag: Flag,
    pub cipher_params: BTreeMap<String, String>,
    pub public_artifacts: Artifacts,
}

impl Challenge {
    /// Redacted view re-derived from the question text. Fails when the
    /// question no longer carries a well-formed artifact block.
    pub fn public_view(&self) -> Result<PublicChallenge, ArtifactError> {
        PublicChallenge::new(
            self.id.clone(),
            self.subtype,
            self.difficulty,
            self.question.clone(),
            self.hint.clone(),
        )
    }
}

/// What an attacker sees: no flag, no generation parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicChallenge {
    pub id: String,
    pub subtype: SubtypeId,
    pub difficulty: Difficulty,
    pub question: String,
    pub hint: String,
    #[serde(skip)]
    artifacts: Artifacts,
}

impl PublicChallenge {
    pub fn new(
        id: String,
        subtype: SubtypeId,
        difficulty: Difficulty,
        question: String,
        hint: String,
    ) -> Result<Self, ArtifactError> {
        let artifacts = parse_artifact_block(&question)?;
        Ok(PublicChallenge {
            id,
            subtype,
            difficulty,
            question,
            hint,
            artifacts,
        })
    }

    pub fn artifacts(&self) -> &Artifacts {
        &self.artifacts
    }

    pub fn artifact(&self, key: &str) -> Option<&str> {
        self.artifacts.get(key).map(String::as_str)
    }
}

/// Renders the fenced block. Values must be single-line.
pub fn render_artifact_block(artifacts: &Artifacts) -> Result<String, ArtifactError> {
    let mut out = String::from(FENCE);
    out.push('\n');
    for (key, value) in artifacts {
        if value.contains('\n') || value.contains('\r') {
            return Err(ArtifactError::MultilineValue(key.clone()));
        }
        out.push_str(key);
        out.push_str(": ");
        out.push_str(value);
        out.push('\n');
    }
    out.push_str(FENCE);
    Ok(out)
}

/// Parses the first fenced block. The fence lines must consist of the three
/// backticks alone (surrounding whitespace allowed); values are taken
/// verbatim after the first `": "` so leading spaces in a value survive.
pub fn parse_artifact_block(text: &str) -> Result<Artifacts, ArtifactError> {
    let mut lines = text.lines();
    lines
        .by_ref()
        .find(|l| l.trim() == FENCE)
        .ok_or(ArtifactError::MissingBlock)?;

    let mut artifacts = Artifacts::new();
    for line in lines {
        if line.trim() == FENCE {
            return Ok(artifacts);
        }
        let (key, value) = line
            .split_once(": ")
            .ok_or_else(|| ArtifactError::MalformedLine(line.to_string()))?;
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(ArtifactError::MalformedLine(line.to_string()));
        }
        if artifacts
            .insert(key.to_string(), value.to_string())
            .is_some()
        {
            return Err(ArtifactError::Duplicate(key.to_string()));
        }
    }
    Err(ArtifactError::Unterminated)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Artifacts {
        let mut a = Artifacts::new();
        a.insert("ciphertext".into(), " leading space: and colon".into());
        a.insert("n".into(), "143".into());
        a
    }

    #[test]
    fn block_round_trip() {
        let block = render_artifact_block(&sample()).unwrap();
        let question = format!("Story text:\n{block}\nGood luck.");
        assert_eq!(parse_artifact_block(&question).unwrap(), sample());
    }

    #[test]
    fn block_errors() {
        assert_eq!(
            parse_artifact_block("no block"),
            Err(ArtifactError::MissingBlock)
        );
        assert_eq!(
            parse_artifact_block("```\nn: 1\n"),
            Err(ArtifactError::Unterminated)
        );
        assert!(matches!(
            parse_artifact_block("```\njunk\n```"),
            Err(ArtifactError::MalformedLine(_))
        ));
        assert!(matches!(
            parse_artifact_block("```\nn: 1\nn: 2\n```"),
            Err(ArtifactError::Duplicate(_))
        ));
        let mut bad = Artifacts::new();
        bad.insert("x".into(), "a\nb".into());
        assert!(render_artifact_block(&bad).is_err());
    }

    #[test]
    fn empty_block_is_allowed() {
        assert!(parse_artifact_block("```\n```").unwrap().is_empty());
    }
}
