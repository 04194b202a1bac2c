use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use randcrypto_core::narrative::{NarrativeError, TextGenerator};
use randcrypto_core::transcript::{Message, Role};
use randcrypto_core::SubtypeId;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

/// What an agent knows about the episode besides the messages.
#[derive(Debug, Clone)]
pub struct EpisodeContext {
    pub challenge_id: String,
    pub subtype: SubtypeId,
    /// Index of this sample among the k drawn for the challenge.
    pub sample: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentReply {
    pub content: String,
    /// Completion tokens as reported by the endpoint.
    pub completion_tokens: Option<u32>,
}

impl AgentReply {
    pub fn text(content: impl Into<String>) -> AgentReply {
        AgentReply { content: content.into(), completion_tokens: None }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error("agent transport: {0}")]
    Transport(String),
    #[error("agent response: {0}")]
    Response(String),
    #[error("agent config: {0}")]
    Config(String),
    #[error("script exhausted after {0} turns")]
    ScriptExhausted(usize),
}

pub trait Agent: Send + Sync {
    fn respond(&self, ctx: &EpisodeContext, messages: &[Message], max_tokens: u32) -> Result<AgentReply, AgentError>;
}

pub type ScriptFn = dyn Fn(&EpisodeContext, &[Message]) -> Result<String, AgentError> + Send + Sync;

/// Mock agent driven by a closure over the transcript so far.
#[derive(Clone)]
pub struct ScriptedAgent {
    script: Arc<ScriptFn>,
}

impl ScriptedAgent {
    pub fn new(script: impl Fn(&EpisodeContext, &[Message]) -> Result<String, AgentError> + Send + Sync + 'static) -> Self {
        ScriptedAgent { script: Arc::new(script) }
    }

    /// Replays `turns` in order, one per assistant message.
    pub fn from_turns(turns: Vec<String>) -> Self {
        ScriptedAgent::new(move |_, messages| {
            let n = messages.iter().filter(|m| m.role == Role::Assistant).count();
            turns.get(n).cloned().ok_or(AgentError::ScriptExhausted(n))
        })
    }
}

impl Agent for ScriptedAgent {
    fn respond(&self, ctx: &EpisodeContext, messages: &[Message], _max_tokens: u32) -> Result<AgentReply, AgentError> {
        (self.script)(ctx, messages).map(AgentReply::text)
    }
}

/// Settings for an OpenAI-style chat-completions endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatApiConfig {
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    #[serde(default = "default_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_timeout")]
    pub timeout_s: u64,
    /// Role used on the wire for tool replies; many endpoints reject a bare
    /// `tool` role without call ids.
    #[serde(default = "default_tool_role")]
    pub tool_role: String,
    #[serde(default)]
    pub extra: BTreeMap<String, Value>,
}

fn default_key_env() -> String {
    "RANDCRYPTO_API_KEY".into()
}
fn default_temperature() -> f64 {
    1.0
}
fn default_timeout() -> u64 {
    300
}
fn default_tool_role() -> String {
    "user".into()
}

/// Agent description as stored in an `--agent` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentSpec {
    ExternalChatApi(ChatApiConfig),
    /// Built-in mock that hands the public question to the reference solver
    /// through the tool, then boxes what came back.
    ScriptedMock {
        #[serde(default = "default_script")]
        script: String,
    },
}

fn default_script() -> String {
    "oracle".into()
}

impl AgentSpec {
    pub fn load(path: &Path) -> Result<AgentSpec, AgentError> {
        let text = std::fs::read_to_string(path).map_err(|e| AgentError::Config(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| AgentError::Config(e.to_string()))
    }

    pub fn build(&self) -> Result<Box<dyn Agent>, AgentError> {
        match self {
            AgentSpec::ExternalChatApi(cfg) => Ok(Box::new(ChatApiAgent::new(cfg.clone())?)),
            AgentSpec::ScriptedMock { script } => match script.as_str() {
                "oracle" => Ok(Box::new(crate::oracle::oracle_agent())),
                "answer_only" => Ok(Box::new(crate::oracle::answer_only_agent())),
                other => Err(AgentError::Config(format!("unknown script {other:?}"))),
            },
        }
    }
}

pub struct ChatApiAgent {
    cfg: ChatApiConfig,
    key: Option<String>,
    http: ureq::Agent,
}

impl ChatApiAgent {
    pub fn new(cfg: ChatApiConfig) -> Result<ChatApiAgent, AgentError> {
        if cfg.base_url.trim().is_empty() {
            return Err(AgentError::Config("base_url is required".into()));
        }
        let key = std::env::var(&cfg.api_key_env).ok().filter(|k| !k.is_empty());
        let http = ureq::AgentBuilder::new().timeout(Duration::from_secs(cfg.timeout_s)).build();
        Ok(ChatApiAgent { cfg, key, http })
    }

    fn endpoint(&self) -> String {
        format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/'))
    }

    /// Request body for `messages`.
    pub fn request_body(&self, messages: &[Message], max_tokens: u32) -> Value {
        let wire: Vec<Value> = messages
            .iter()
            .map(|m| {
                let role = match m.role {
                    Role::System => "system",
                    Role::User => "user",
                    Role::Assistant => "assistant",
                    Role::Tool => self.cfg.tool_role.as_str(),
                };
                json!({"role": role, "content": m.content})
            })
            .collect();
        let mut body = json!({
            "model": self.cfg.model,
            "messages": wire,
            "max_tokens": max_tokens,
            "temperature": self.cfg.temperature,
        });
        if let Value::Object(map) = &mut body {
            for (k, v) in &self.cfg.extra {
                map.insert(k.clone(), v.clone());
            }
        }
        body
    }

    fn post(&self, body: Value) -> Result<AgentReply, AgentError> {
        let mut req = self.http.post(&self.endpoint());
        if let Some(key) = &self.key {
            req = req.set("Authorization", &format!("Bearer {key}"));
        }
        let resp: Value = match req.send_json(body) {
            Ok(r) => r.into_json().map_err(|e| AgentError::Response(e.to_string()))?,
            Err(ureq::Error::Status(code, r)) => {
                let text = r.into_string().unwrap_or_default();
                return Err(AgentError::Transport(format!("HTTP {code}: {}", text.chars().take(500).collect::<String>())));
            }
            Err(e) => return Err(AgentError::Transport(e.to_string())),
        };
        parse_completion(&resp)
    }
}

/// Content and usage out of a chat-completions response.
pub fn parse_completion(resp: &Value) -> Result<AgentReply, AgentError> {
    let content = resp
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| AgentError::Response("no choices[0].message.content".into()))?;
    let completion_tokens =
        resp.pointer("/usage/completion_tokens").and_then(Value::as_u64).map(|n| n.min(u32::MAX as u64) as u32);
    Ok(AgentReply { content: content.to_string(), completion_tokens })
}

impl Agent for ChatApiAgent {
    fn respond(&self, _ctx: &EpisodeContext, messages: &[Message], max_tokens: u32) -> Result<AgentReply, AgentError> {
        self.post(self.request_body(messages, max_tokens))
    }
}

impl TextGenerator for ChatApiAgent {
    fn complete(&self, prompt: &str) -> Result<String, NarrativeError> {
        self.post(self.request_body(&[Message::user(prompt)], 256))
            .map(|r| r.content)
            .map_err(|e| NarrativeError::Generator(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> EpisodeContext {
        EpisodeContext { challenge_id: "caesar-0".into(), subtype: SubtypeId::by_name("caesar").unwrap(), sample: 0 }
    }

    #[test]
    fn turns_replay_in_order() {
        let agent = ScriptedAgent::from_turns(vec!["one".into(), "two".into()]);
        let mut msgs = vec![Message::user("q")];
        assert_eq!(agent.respond(&ctx(), &msgs, 10).unwrap().content, "one");
        msgs.push(Message::assistant("one"));
        assert_eq!(agent.respond(&ctx(), &msgs, 10).unwrap().content, "two");
        msgs.push(Message::assistant("two"));
        assert!(matches!(agent.respond(&ctx(), &msgs, 10), Err(AgentError::ScriptExhausted(2))));
    }

    #[test]
    fn spec_files_parse() {
        let spec: AgentSpec = serde_json::from_str(
            r#"{"kind": "external_chat_api", "base_url": "https://example.invalid/v1", "model": "m"}"#,
        )
        .unwrap();
        match &spec {
            AgentSpec::ExternalChatApi(c) => {
                assert_eq!(c.temperature, 1.0);
                assert_eq!(c.api_key_env, "RANDCRYPTO_API_KEY");
            }
            other => panic!("{other:?}"),
        }
        let mock: AgentSpec = serde_json::from_str(r#"{"kind": "scripted_mock"}"#).unwrap();
        assert_eq!(mock, AgentSpec::ScriptedMock { script: "oracle".into() });
        let empty: AgentSpec =
            serde_json::from_str(r#"{"kind": "external_chat_api", "base_url": " ", "model": "m"}"#).unwrap();
        assert!(matches!(empty.build(), Err(AgentError::Config(_))));
    }

    #[test]
    fn request_body_maps_roles_and_budget() {
        let cfg: ChatApiConfig = serde_json::from_value(json!({"base_url": "http://x", "model": "m", "extra": {"top_p": 0.9}})).unwrap();
        let agent = ChatApiAgent::new(cfg).unwrap();
        let body = agent.request_body(&[Message::system("s"), Message::tool("Output: 1")], 8192);
        assert_eq!(body["max_tokens"], 8192);
        assert_eq!(body["messages"][1]["role"], "user");
        assert_eq!(body["top_p"], 0.9);
    }

    #[test]
    fn completion_parsing() {
        let r = parse_completion(&json!({"choices": [{"message": {"content": "hi"}}], "usage": {"completion_tokens": 3}})).unwrap();
        assert_eq!(r, AgentReply { content: "hi".into(), completion_tokens: Some(3) });
        assert!(parse_completion(&json!({"choices": []})).is_err());
    }
}
