use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use randcrypto_core::scoring::{aggregate_report, score_transcript, EvalReport, ScoreError};
use randcrypto_core::transcript::{read_transcript, write_transcript, TranscriptError};
use randcrypto_core::{Challenge, RewardBreakdown};
use randcrypto_toolserver::ToolDispatch;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::Agent;
use crate::episode::{run_episode, Episode, EpisodeConfig, EpisodeError, StopReason};

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("k must be at least 1")]
    ZeroK,
    #[error(transparent)]
    Episode(#[from] EpisodeError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("writing results: {0}")]
    Io(#[from] io::Error),
    #[error(transparent)]
    Transcript(#[from] TranscriptError),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Per-episode line in `episodes.jsonl`; with the transcript file it is
/// enough to re-score the episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub challenge_id: String,
    pub sample: usize,
    pub success: bool,
    pub reward: RewardBreakdown,
    pub execution_results: Vec<bool>,
    pub dispatched: u32,
    pub tokens_used: u64,
    pub stop: StopReason,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub transcript: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRun {
    pub condition: String,
    pub config: EpisodeConfig,
    pub report: EvalReport,
    pub episodes: Vec<EpisodeRecord>,
}

fn run_tag() -> String {
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or(0);
    format!("{}-{nanos:x}-{}", std::process::id(), COUNTER.fetch_add(1, Ordering::Relaxed))
}

fn transcript_name(ep: &Episode) -> String {
    let safe: String =
        ep.challenge_id.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
    format!("{safe}__s{}.jsonl", ep.sample)
}

/// Runs `k` episodes per challenge, each on its own tool session, at most
/// `parallelism` at a time. With `out`, writes one transcript per episode,
/// `episodes.jsonl` and `report.json` there.
pub fn evaluate_dataset(
    agent: &dyn Agent,
    dataset: &[Challenge],
    cfg: &EpisodeConfig,
    tools: Option<&dyn ToolDispatch>,
    k: usize,
    parallelism: usize,
    out: Option<&Path>,
) -> Result<EvalRun, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    let transcripts_dir = out.map(|o| o.join("transcripts"));
    if let Some(dir) = &transcripts_dir {
        fs::create_dir_all(dir)?;
    }
    let tag = run_tag();
    let jobs: Vec<(&Challenge, usize)> = dataset.iter().flat_map(|c| (0..k).map(move |s| (c, s))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| EvalError::Pool(e.to_string()))?;
    let episodes: Vec<EpisodeRecord> = pool.install(|| {
        jobs.par_iter()
            .map(|&(challenge, sample)| -> Result<EpisodeRecord, EvalError> {
                let session = format!("{tag}/{}/{sample}", challenge.id);
                let ep = run_episode(agent, challenge, tools, cfg, sample, &session)?;
                let name = transcript_name(&ep);
                if let Some(dir) = &transcripts_dir {
                    write_transcript(&dir.join(&name), &ep.transcript)?;
                }
                Ok(EpisodeRecord {
                    challenge_id: ep.challenge_id,
                    sample,
                    success: ep.success,
                    reward: ep.reward,
                    execution_results: ep.execution_results,
                    dispatched: ep.dispatched,
                    tokens_used: ep.tokens_used,
                    stop: ep.stop,
                    error: ep.error,
                    transcript: format!("transcripts/{name}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut outcomes: BTreeMap<String, Vec<bool>> = dataset.iter().map(|c| (c.id.clone(), vec![false; k])).collect();
    for ep in &episodes {
        outcomes.get_mut(&ep.challenge_id).expect("every episode comes from the dataset")[ep.sample] = ep.success;
    }
    let report = aggregate_report(&outcomes, k)?;
    let run = EvalRun { condition: cfg.condition(), config: *cfg, report, episodes };
    if let Some(dir) = out {
        write_run(dir, &run)?;
    }
    Ok(run)
}

fn write_run(dir: &Path, run: &EvalRun) -> Result<(), EvalError> {
    let mut lines = io::BufWriter::new(fs::File::create(dir.join("episodes.jsonl"))?);
    for ep in &run.episodes {
        serde_json::to_writer(&mut lines, ep).map_err(io::Error::other)?;
        lines.write_all(b"\n")?;
    }
    lines.flush()?;
    let report = serde_json::json!({
        "condition": run.condition,
        "config": run.config,
        "report": run.report,
    });
    fs::write(dir.join("report.json"), serde_json::to_string_pretty(&report).map_err(io::Error::other)?)?;
    Ok(())
}

/// Re-scores an archived episode from its transcript file.
pub fn rescore(dir: &Path, record: &EpisodeRecord, challenge: &Challenge) -> Result<RewardBreakdown, EvalError> {
    let messages = read_transcript(&dir.join(&record.transcript))?;
    Ok(score_transcript(&messages, &challenge.expected_flag, &record.execution_results)?)
}

/// All four hint × tools conditions, each under `out/<condition>/`.
/// Tool-less conditions ignore `tools`.
pub fn run_sweep(
    agent: &dyn Agent,
    dataset: &[Challenge],
    tools: &dyn ToolDispatch,
    k: usize,
    parallelism: usize,
    max_tool_loops: u32,
    out: Option<&Path>,
) -> Result<BTreeMap<String, EvalReport>, EvalError> {
    let mut reports = BTreeMap::new();
    for mut cfg in EpisodeConfig::grid() {
        cfg.max_tool_loops = max_tool_loops;
        let dir: Option<PathBuf> = out.map(|o| o.join(cfg.condition()));
        if let Some(d) = &dir {
            fs::create_dir_all(d)?;
        }
        let endpoint = cfg.with_tools.then_some(tools);
        let run = evaluate_dataset(agent, dataset, &cfg, endpoint, k, parallelism, dir.as_deref())?;
        reports.insert(run.condition.clone(), run.report);
    }
    if let Some(o) = out {
        fs::write(o.join("sweep.json"), serde_json::to_string_pretty(&reports).map_err(io::Error::other)?)?;
    }
    Ok(reports)
}
