use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};
use std::time::SystemTime;

use randcrypto_core::transcript::{ToolCall, ToolName};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::{valid_package_spec, ServerConfig};
use crate::executor::{ExecError, ExecutionResult, Executor, ExecutorFactory};
use crate::subprocess::SubprocessFactory;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SessionInfo {
    pub id: String,
    pub created_at: u64,
    pub call_count: u32,
    pub alive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstallStatus {
    Allowed,
    Denied,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstallResult {
    pub package: String,
    pub status: InstallStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ToolError {
    #[error("call budget exhausted ({used} of {max})")]
    Quota { used: u32, max: u32 },
    #[error("session {session} is dead: {reason}")]
    SessionDead { session: String, reason: String },
    #[error("invalid package spec {package:?}")]
    InvalidPackage { package: String },
    #[error("unknown tool {name:?}")]
    UnknownTool { name: String },
    #[error("invalid request: {message}")]
    InvalidRequest { message: String },
    #[error("internal error: {message}")]
    Internal { message: String },
}

impl ToolError {
    /// Whether the same session can be used again after a restart.
    pub fn restartable(&self) -> bool {
        matches!(self, ToolError::SessionDead { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ToolOutput {
    Execution(ExecutionResult),
    Variables { variables: BTreeMap<String, String> },
    Install(InstallResult),
}

struct Session {
    info: SessionInfo,
    executor: Option<Box<dyn Executor>>,
}

/// Session registry and tool dispatch. Calls on one session are serialized
/// by that session's lock; distinct sessions run concurrently.
pub struct ToolServer {
    cfg: Arc<ServerConfig>,
    factory: Box<dyn ExecutorFactory>,
    sessions: Mutex<HashMap<String, Arc<Mutex<Session>>>>,
}

fn now_secs() -> u64 {
    SystemTime::now().duration_since(SystemTime::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl ToolServer {
    pub fn new(cfg: ServerConfig, factory: Box<dyn ExecutorFactory>) -> ToolServer {
        ToolServer { cfg: Arc::new(cfg), factory, sessions: Mutex::new(HashMap::new()) }
    }

    /// Server backed by jailed Python subprocesses.
    pub fn subprocess(cfg: ServerConfig) -> ToolServer {
        let cfg = Arc::new(cfg);
        ToolServer { factory: Box::new(SubprocessFactory::new(cfg.clone())), cfg, sessions: Mutex::new(HashMap::new()) }
    }

    pub fn config(&self) -> &ServerConfig {
        &self.cfg
    }

    fn slot(&self, id: &str) -> Arc<Mutex<Session>> {
        let mut map = self.sessions.lock().unwrap_or_else(|p| p.into_inner());
        map.entry(id.to_string())
            .or_insert_with(|| {
                Arc::new(Mutex::new(Session {
                    info: SessionInfo { id: id.to_string(), created_at: now_secs(), call_count: 0, alive: true },
                    executor: None,
                }))
            })
            .clone()
    }

    pub fn session_info(&self, id: &str) -> Option<SessionInfo> {
        let slot = self.sessions.lock().unwrap_or_else(|p| p.into_inner()).get(id).cloned()?;
        let info = slot.lock().unwrap_or_else(|p| p.into_inner()).info.clone();
        Some(info)
    }

    pub fn session_count(&self) -> usize {
        self.sessions.lock().unwrap_or_else(|p| p.into_inner()).len()
    }

    /// Drops the session and its interpreter.
    pub fn close_session(&self, id: &str) -> bool {
        self.sessions.lock().unwrap_or_else(|p| p.into_inner()).remove(id).is_some()
    }

    /// Fresh interpreter for a session, keeping its call count.
    pub fn restart_session(&self, id: &str) -> Result<(), ToolError> {
        let slot = self.slot(id);
        let mut s = slot.lock().unwrap_or_else(|p| p.into_inner());
        s.executor = None;
        match self.factory.spawn(id) {
            Ok(ex) => {
                s.executor = Some(ex);
                s.info.alive = true;
                Ok(())
            }
            Err(e) => {
                s.info.alive = false;
                Err(ToolError::SessionDead { session: id.to_string(), reason: e.to_string() })
            }
        }
    }

    /// Runs `f` against the session's executor under its lock, after the
    /// liveness and budget checks.
    fn with_session<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut dyn Executor, &ServerConfig) -> Result<T, ExecError>,
    ) -> Result<T, ToolError> {
        let slot = self.slot(id);
        let mut s = slot.lock().unwrap_or_else(|p| p.into_inner());
        let dead = |reason: String| ToolError::SessionDead { session: id.to_string(), reason };
        if !s.info.alive {
            return Err(dead("restart the session to continue".into()));
        }
        if let Some(max) = self.cfg.limits.call_budget {
            if s.info.call_count >= max {
                return Err(ToolError::Quota { used: s.info.call_count, max });
            }
        }
        if s.executor.is_none() {
            match self.factory.spawn(id) {
                Ok(ex) => s.executor = Some(ex),
                Err(e) => {
                    s.info.alive = false;
                    return Err(dead(e.to_string()));
                }
            }
        }
        s.info.call_count += 1;
        let ex = s.executor.as_mut().expect("executor present");
        match f(ex.as_mut(), &self.cfg) {
            Ok(v) => Ok(v),
            Err(ExecError::Dead(reason)) => {
                s.info.alive = false;
                s.executor = None;
                Err(dead(reason))
            }
            Err(ExecError::Io(e)) => Err(ToolError::Internal { message: e.to_string() }),
        }
    }

    pub fn handle_execute(&self, session: &str, code: &str, reset: bool) -> Result<ExecutionResult, ToolError> {
        self.with_session(session, |ex, _| ex.execute(code, reset))
    }

    pub fn handle_list_variables(&self, session: &str) -> Result<BTreeMap<String, String>, ToolError> {
        self.with_session(session, |ex, _| ex.list_variables())
    }

    pub fn handle_install_package(&self, session: &str, package: &str) -> Result<InstallResult, ToolError> {
        if !valid_package_spec(package) {
            return Err(ToolError::InvalidPackage { package: package.to_string() });
        }
        self.with_session(session, |ex, cfg| {
            let (status, detail) = if !cfg.allowlist.permits(package) {
                (InstallStatus::Denied, "package is not on the allowlist".to_string())
            } else {
                match ex.install(package) {
                    Ok(log) => (InstallStatus::Allowed, log.trim().to_string()),
                    Err(e) => (InstallStatus::Failed, e),
                }
            };
            Ok(InstallResult { package: package.to_string(), status, detail })
        })
    }

    pub fn handle_call(&self, session: &str, call: &ToolCall) -> Result<ToolOutput, ToolError> {
        match call.name {
            ToolName::ExecutePython => self.handle_execute(session, &call.code, call.reset).map(ToolOutput::Execution),
            ToolName::ListVariables => {
                self.handle_list_variables(session).map(|variables| ToolOutput::Variables { variables })
            }
            ToolName::InstallPackage => self.handle_install_package(session, &call.code).map(ToolOutput::Install),
        }
    }

    /// Dispatch by wire name and `inputs` object. Besides the three tools,
    /// `restart_session` and `close_session` manage the session itself.
    pub fn handle_named(&self, session: &str, name: &str, inputs: &Value) -> Result<Value, ToolError> {
        let bad = |m: &str| ToolError::InvalidRequest { message: m.to_string() };
        let to_value = |v: ToolOutput| serde_json::to_value(v).map_err(|e| ToolError::Internal { message: e.to_string() });
        match name {
            "restart_session" => self.restart_session(session).map(|_| json!({"restarted": true})),
            "close_session" => Ok(json!({"closed": self.close_session(session)})),
            _ => {
                let tool = ToolName::parse(name).ok_or_else(|| ToolError::UnknownTool { name: name.to_string() })?;
                let call = match tool {
                    ToolName::ExecutePython => {
                        let code = inputs.get("code").and_then(Value::as_str).ok_or_else(|| bad("inputs.code must be a string"))?;
                        let reset = match inputs.get("reset") {
                            None => false,
                            Some(v) => v.as_bool().ok_or_else(|| bad("inputs.reset must be a boolean"))?,
                        };
                        ToolCall::execute(code, reset)
                    }
                    ToolName::ListVariables => ToolCall { name: tool, code: String::new(), reset: false },
                    ToolName::InstallPackage => {
                        let package =
                            inputs.get("package").and_then(Value::as_str).ok_or_else(|| bad("inputs.package must be a string"))?;
                        ToolCall { name: tool, code: package.to_string(), reset: false }
                    }
                };
                self.handle_call(session, &call).and_then(to_value)
            }
        }
    }
}
