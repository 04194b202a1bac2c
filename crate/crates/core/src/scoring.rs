//! Composite episode reward and k-sample success metrics.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::flag::Flag;
use crate::transcript::{extract_boxed_flag, find_premature_answer, parse_tool_call, Message, Role};

/// Reward value in tenths, so component sums compare exactly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tenths(pub i32);

impl Tenths {
    pub const ZERO: Tenths = Tenths(0);

    pub fn as_f64(self) -> f64 {
        self.0 as f64 / 10.0
    }
}

impl Add for Tenths {
    type Output = Tenths;
    fn add(self, rhs: Tenths) -> Tenths {
        Tenths(self.0 + rhs.0)
    }
}

impl fmt::Display for Tenths {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        write!(f, "{sign}{}.{}", self.0.abs() / 10, self.0.abs() % 10)
    }
}

impl Serialize for Tenths {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Tenths {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Tenths, D::Error> {
        let v = f64::deserialize(d)?;
        let t = (v * 10.0).round();
        if (t / 10.0 - v).abs() > 1e-9 {
            return Err(serde::de::Error::custom(format!("{v} is not a multiple of 0.1")));
        }
        Ok(Tenths(t as i32))
    }
}

pub const ACCURACY_REWARD: Tenths = Tenths(10);
pub const ANSWER_FORMAT_REWARD: Tenths = Tenths(1);
pub const TOOL_FORMAT_REWARD: Tenths = Tenths(2);
pub const EXECUTION_REWARD: Tenths = Tenths(3);
/// Charged once per assistant message that boxes a flag next to a tool call.
pub const PREMATURE_PENALTY: Tenths = Tenths(-5);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RewardBreakdown {
    pub accuracy: Tenths,
    pub answer_format: Tenths,
    pub tool_format: Tenths,
    pub execution: Tenths,
    pub deduction: Tenths,
    pub total: Tenths,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("{results} execution results for {calls} strict tool calls")]
    Misaligned { calls: usize, results: usize },
    #[error("threshold {threshold} outside 1..={k}")]
    Threshold { threshold: usize, k: usize },
    #[error("challenge {id} has {len} outcomes, expected {k}")]
    Ragged { id: String, len: usize, k: usize },
    #[error("k must be at least 1")]
    ZeroK,
}

/// Number of strict tool calls in assistant messages; execution results
/// must line up with these.
pub fn strict_call_count(messages: &[Message]) -> usize {
    messages.iter().filter(|m| parse_tool_call(m).is_some_and(|p| p.strict)).count()
}

/// Final boxed answer of the episode: the last valid one across assistant
/// messages.
pub fn final_answer(messages: &[Message]) -> Option<Flag> {
    messages
        .iter()
        .rev()
        .filter(|m| m.role == Role::Assistant)
        .find_map(|m| extract_boxed_flag(&m.content))
}

pub fn score_transcript(
    messages: &[Message],
    expected: &Flag,
    execution_results: &[bool],
) -> Result<RewardBreakdown, ScoreError> {
    let calls = strict_call_count(messages);
    if calls != execution_results.len() {
        return Err(ScoreError::Misaligned { calls, results: execution_results.len() });
    }
    let answer = final_answer(messages);
    let pick = |cond: bool, value: Tenths| if cond { value } else { Tenths::ZERO };
    let accuracy = pick(answer.as_ref() == Some(expected), ACCURACY_REWARD);
    let answer_format = pick(answer.is_some(), ANSWER_FORMAT_REWARD);
    let tool_format = pick(calls > 0, TOOL_FORMAT_REWARD);
    let execution = pick(execution_results.iter().any(|&ok| ok), EXECUTION_REWARD);
    let deduction = Tenths(PREMATURE_PENALTY.0 * find_premature_answer(messages).len() as i32);
    Ok(RewardBreakdown {
        accuracy,
        answer_format,
        tool_format,
        execution,
        deduction,
        total: accuracy + answer_format + tool_format + execution + deduction,
    })
}

pub fn pass_at_k(successes: &[bool], threshold: usize) -> Result<bool, ScoreError> {
    let k = successes.len();
    if threshold == 0 || threshold > k {
        return Err(ScoreError::Threshold { threshold, k });
    }
    Ok(successes.iter().filter(|&&s| s).count() >= threshold)
}

/// Successes needed for Maj@k: a strict majority, which is 5 of 8.
pub fn maj_threshold(k: usize) -> usize {
    k / 2 + 1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub k: usize,
    pub maj_threshold: usize,
    pub per_challenge: BTreeMap<String, Vec<bool>>,
    pub pass_count: usize,
    pub maj_count: usize,
    pub pass_at_k: f64,
    pub maj_at_k: f64,
}

pub fn aggregate_report(outcomes: &BTreeMap<String, Vec<bool>>, k: usize) -> Result<EvalReport, ScoreError> {
    if k == 0 {
        return Err(ScoreError::ZeroK);
    }
    let threshold = maj_threshold(k);
    let (mut pass_count, mut maj_count) = (0, 0);
    for (id, runs) in outcomes {
        if runs.len() != k {
            return Err(ScoreError::Ragged { id: id.clone(), len: runs.len(), k });
        }
        pass_count += pass_at_k(runs, 1)? as usize;
        maj_count += pass_at_k(runs, threshold)? as usize;
    }
    let rate = |n: usize| if outcomes.is_empty() { 0.0 } else { n as f64 / outcomes.len() as f64 };
    Ok(EvalReport {
        k,
        maj_threshold: threshold,
        per_challenge: outcomes.clone(),
        pass_count,
        maj_count,
        pass_at_k: rate(pass_count),
        maj_at_k: rate(maj_count),
    })
}
