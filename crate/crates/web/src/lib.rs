//! wasm-bindgen surface for the static demo page in `www/`. Every export
//! takes and returns JSON strings; the `*_json` functions hold the logic so
//! it can be tested natively.

use randcrypto_core::scoring::{score_transcript, strict_call_count};
use randcrypto_core::solvers::solve;
use randcrypto_core::{generate, Flag, GenSeed, Message, PublicChallenge, RewardBreakdown, SubtypeId};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct SubtypeEntry {
    pub name: String,
    pub archetype: &'static str,
    pub difficulty: &'static str,
}

/// What the page shows after generating. The flag is kept so the page can
/// reveal it on request; the question never contains it.
#[derive(Debug, Serialize, Deserialize)]
pub struct GeneratedView {
    pub id: String,
    pub subtype: String,
    pub difficulty: String,
    pub question: String,
    pub hint: String,
    pub flag: String,
}

#[derive(Debug, Serialize)]
pub struct SolvedView {
    pub flag: String,
    pub method: &'static str,
    pub steps: u64,
}

#[derive(Debug, Deserialize)]
struct ScoreRequest {
    messages: Vec<Message>,
    expected_flag: String,
    /// One per strict tool call. Missing means every call ran cleanly.
    #[serde(default)]
    execution_results: Option<Vec<bool>>,
}

#[derive(Debug, Serialize)]
pub struct ScoreView {
    pub reward: RewardBreakdown,
    pub total: f64,
    pub strict_calls: usize,
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("view types serialize")
}

pub fn subtypes_json() -> String {
    let list: Vec<SubtypeEntry> = SubtypeId::all()
        .map(|s| SubtypeEntry {
            name: s.to_string(),
            archetype: s.archetype().as_str(),
            difficulty: s.difficulty().as_str(),
        })
        .collect();
    to_json(&list)
}

pub fn generate_json(subtype: &str, seed: u64) -> Result<String, String> {
    let subtype: SubtypeId = subtype.parse().map_err(|e| format!("{e}"))?;
    let c = generate(subtype, GenSeed(seed));
    Ok(to_json(&GeneratedView {
        id: c.id,
        subtype: c.subtype.to_string(),
        difficulty: c.difficulty.as_str().to_string(),
        question: c.question,
        hint: c.hint,
        flag: c.expected_flag.to_string(),
    }))
}

/// Runs the reference attack on a question. Only the subtype and the
/// question text are used, so pasted or edited questions work too.
pub fn solve_json(subtype: &str, question: &str) -> Result<String, String> {
    let subtype: SubtypeId = subtype.parse().map_err(|e| format!("{e}"))?;
    let public = PublicChallenge::new("web".into(), subtype, subtype.difficulty(), question.into(), String::new())
        .map_err(|e| e.to_string())?;
    let out = solve(&public).map_err(|e| e.to_string())?;
    Ok(to_json(&SolvedView { flag: out.flag.to_string(), method: out.method, steps: out.steps }))
}

pub fn score_json(request: &str) -> Result<String, String> {
    let req: ScoreRequest = serde_json::from_str(request).map_err(|e| format!("bad request: {e}"))?;
    let expected = Flag::parse(&req.expected_flag).map_err(|e| e.to_string())?;
    let calls = strict_call_count(&req.messages);
    let results = req.execution_results.unwrap_or_else(|| vec![true; calls]);
    let reward = score_transcript(&req.messages, &expected, &results).map_err(|e| e.to_string())?;
    Ok(to_json(&ScoreView { reward, total: reward.total.as_f64(), strict_calls: calls }))
}

#[wasm_bindgen]
pub fn subtypes() -> String {
    subtypes_json()
}

#[wasm_bindgen(js_name = generateChallenge)]
pub fn generate_challenge(subtype: &str, seed: u64) -> Result<String, JsError> {
    generate_json(subtype, seed).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = solveChallenge)]
pub fn solve_challenge(subtype: &str, question: &str) -> Result<String, JsError> {
    solve_json(subtype, question).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = scoreTranscript)]
pub fn score(request: &str) -> Result<String, JsError> {
    score_json(request).map_err(|e| JsError::new(&e))
}
