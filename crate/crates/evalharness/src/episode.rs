use randcrypto_core::scoring::{final_answer, score_transcript};
use randcrypto_core::transcript::{extract_boxed_flag, parse_tool_call, Message};
use randcrypto_core::{Challenge, RewardBreakdown};
use randcrypto_toolserver::{InstallStatus, ToolDispatch, ToolError, ToolOutput};
use serde::{Deserialize, Serialize};

use crate::agent::{Agent, EpisodeContext};
use crate::prompt::{build_agent_prompt, default_tool_list};

pub const NO_TOOL_MAX_TOKENS: u32 = 4096;
pub const TOOL_MAX_TOKENS: u32 = 8192;
/// Fallback token estimate when the endpoint reports no usage.
pub const CHARS_PER_TOKEN: usize = 4;
pub const OUTPUT_PREFIX: &str = "Output: ";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    pub max_tool_loops: u32,
    pub max_tokens: u32,
    pub with_hint: bool,
    pub with_tools: bool,
}

impl EpisodeConfig {
    pub fn new(with_hint: bool, with_tools: bool) -> EpisodeConfig {
        EpisodeConfig {
            max_tool_loops: 4,
            max_tokens: if with_tools { TOOL_MAX_TOKENS } else { NO_TOOL_MAX_TOKENS },
            with_hint,
            with_tools,
        }
    }

    /// The four hint × tools conditions.
    pub fn grid() -> [EpisodeConfig; 4] {
        [
            EpisodeConfig::new(false, false),
            EpisodeConfig::new(true, false),
            EpisodeConfig::new(false, true),
            EpisodeConfig::new(true, true),
        ]
    }

    pub fn condition(&self) -> String {
        format!(
            "{}-{}",
            if self.with_hint { "hint" } else { "nohint" },
            if self.with_tools { "tools" } else { "notools" }
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Answered,
    LoopCap,
    TokenBudget,
    /// A message with neither a strict tool call nor a boxed flag.
    NoAction,
    /// A tool call wrapped in prose or otherwise not strict; never dispatched.
    MalformedToolCall,
    /// A strict tool call while tools are off.
    ToolsUnavailable,
    AgentError,
    ToolServerError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub challenge_id: String,
    pub sample: usize,
    pub transcript: Vec<Message>,
    /// One entry per strict tool call, in order; undispatched calls are false.
    pub execution_results: Vec<bool>,
    pub dispatched: u32,
    pub tokens_used: u64,
    pub reward: RewardBreakdown,
    pub success: bool,
    pub stop: StopReason,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum EpisodeError {
    #[error("with_tools={with_tools} but a tool endpoint was {}", if *.with_tools { "not given" } else { "given" })]
    ToolEndpoint { with_tools: bool },
}

/// Text after the `Output:` prefix and whether the call counts as executed.
pub fn render_tool_reply(result: &Result<ToolOutput, ToolError>) -> (String, bool) {
    match result {
        Ok(ToolOutput::Execution(r)) => (r.render(), r.ok),
        Ok(ToolOutput::Variables { variables }) => {
            (serde_json::to_string(variables).expect("string maps serialize"), true)
        }
        Ok(ToolOutput::Install(i)) => {
            let status = serde_json::to_value(i.status).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default();
            (format!("{status} {}: {}", i.package, i.detail), i.status == InstallStatus::Allowed)
        }
        Err(e) => (format!("error: {e}"), false),
    }
}

fn estimate_tokens(text: &str) -> u64 {
    text.chars().count().div_ceil(CHARS_PER_TOKEN) as u64
}

/// One interaction cycle. `session` names the fresh tool-server session;
/// it is closed before returning.
pub fn run_episode(
    agent: &dyn Agent,
    challenge: &Challenge,
    tools: Option<&dyn ToolDispatch>,
    cfg: &EpisodeConfig,
    sample: usize,
    session: &str,
) -> Result<Episode, EpisodeError> {
    if cfg.with_tools != tools.is_some() {
        return Err(EpisodeError::ToolEndpoint { with_tools: cfg.with_tools });
    }
    let ctx = EpisodeContext { challenge_id: challenge.id.clone(), subtype: challenge.subtype, sample };
    let mut messages = build_agent_prompt(challenge, &default_tool_list(), cfg);
    let mut execution_results = Vec::new();
    let mut dispatched = 0u32;
    let mut tokens = 0u64;
    let mut error = None;

    let stop = loop {
        let remaining = u64::from(cfg.max_tokens).saturating_sub(tokens);
        if remaining == 0 {
            break StopReason::TokenBudget;
        }
        let reply = match agent.respond(&ctx, &messages, remaining as u32) {
            Ok(r) => r,
            Err(e) => {
                error = Some(e.to_string());
                break StopReason::AgentError;
            }
        };
        tokens += reply.completion_tokens.map(u64::from).unwrap_or_else(|| estimate_tokens(&reply.content));
        messages.push(Message::assistant(reply.content));
        let last = messages.last().expect("just pushed");
        let answered = extract_boxed_flag(&last.content).is_some();
        match parse_tool_call(last) {
            Some(p) if p.strict => {
                let blocked = if answered {
                    Some(StopReason::Answered)
                } else if !cfg.with_tools {
                    Some(StopReason::ToolsUnavailable)
                } else if dispatched >= cfg.max_tool_loops {
                    Some(StopReason::LoopCap)
                } else if tokens >= u64::from(cfg.max_tokens) {
                    Some(StopReason::TokenBudget)
                } else {
                    None
                };
                if let Some(reason) = blocked {
                    execution_results.push(false);
                    break reason;
                }
                let endpoint = tools.expect("checked above");
                match endpoint.dispatch(session, &p.call) {
                    Ok(result) => {
                        dispatched += 1;
                        let (text, ok) = render_tool_reply(&result);
                        execution_results.push(ok);
                        messages.push(Message::tool(format!("{OUTPUT_PREFIX}{text}")));
                    }
                    Err(e) => {
                        execution_results.push(false);
                        error = Some(e.to_string());
                        break StopReason::ToolServerError;
                    }
                }
            }
            _ if answered => break StopReason::Answered,
            Some(_) => break StopReason::MalformedToolCall,
            None => break StopReason::NoAction,
        }
    };
    if let Some(endpoint) = tools {
        let _ = endpoint.close(session);
    }

    let reward = score_transcript(&messages, &challenge.expected_flag, &execution_results)
        .expect("execution results are recorded once per strict call");
    let success = final_answer(&messages).as_ref() == Some(&challenge.expected_flag);
    Ok(Episode {
        challenge_id: challenge.id.clone(),
        sample,
        transcript: messages,
        execution_results,
        dispatched,
        tokens_used: tokens,
        reward,
        success,
        stop,
        error,
    })
}
