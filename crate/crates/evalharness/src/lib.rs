//! Drives agents through tool-augmented episodes on generated challenges
//! and aggregates k-sample results.

pub mod agent;
pub mod episode;
pub mod eval;
pub mod oracle;
pub mod prompt;

pub use agent::{Agent, AgentError, AgentReply, AgentSpec, ChatApiAgent, ChatApiConfig, EpisodeContext, ScriptedAgent};
pub use episode::{run_episode, Episode, EpisodeConfig, EpisodeError, StopReason};
pub use eval::{evaluate_dataset, rescore, run_sweep, EpisodeRecord, EvalError, EvalRun};
pub use prompt::{build_agent_prompt, default_tool_list};
