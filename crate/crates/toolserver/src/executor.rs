use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KillReason {
    Timeout,
    Memory,
    Output,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionResult {
    pub ok: bool,
    pub stdout: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub duration_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub killed_by: Option<KillReason>,
}

pub const TRUNCATION_MARKER: &str = "\n[output truncated]\n";

impl ExecutionResult {
    pub fn success(stdout: String, duration_ms: u64) -> ExecutionResult {
        ExecutionResult { ok: true, stdout, error: None, duration_ms, killed_by: None }
    }

    pub fn failure(stdout: String, error: String, duration_ms: u64) -> ExecutionResult {
        ExecutionResult { ok: false, stdout, error: Some(error), duration_ms, killed_by: None }
    }

    pub fn killed(reason: KillReason, stdout: String, error: String, duration_ms: u64) -> ExecutionResult {
        ExecutionResult { ok: false, stdout, error: Some(error), duration_ms, killed_by: Some(reason) }
    }

    /// Text shown to the agent: stdout followed by any error.
    pub fn render(&self) -> String {
        match &self.error {
            None => self.stdout.clone(),
            Some(e) if self.stdout.is_empty() => e.clone(),
            Some(e) => format!("{}\n{}", self.stdout.trim_end_matches('\n'), e),
        }
    }
}

/// Cuts `text` to at most `limit` bytes on a char boundary and appends the marker.
pub fn truncate_output(text: &mut String, limit: usize) -> bool {
    if text.len() <= limit {
        return false;
    }
    let mut cut = limit;
    while !text.is_char_boundary(cut) {
        cut -= 1;
    }
    text.truncate(cut);
    text.push_str(TRUNCATION_MARKER);
    true
}

#[derive(Debug, thiserror::Error)]
pub enum ExecError {
    /// The runtime is gone and could not be brought back.
    #[error("interpreter unavailable: {0}")]
    Dead(String),
    #[error("executor i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// One session's interpreter.
pub trait Executor: Send {
    fn execute(&mut self, code: &str, reset: bool) -> Result<ExecutionResult, ExecError>;
    fn list_variables(&mut self) -> Result<BTreeMap<String, String>, ExecError>;
    /// Installs an already-vetted package spec. `Err` carries the installer's complaint.
    fn install(&mut self, package: &str) -> Result<String, String>;
    /// Replaces the runtime with a fresh one.
    fn restart(&mut self) -> Result<(), ExecError>;
    fn is_alive(&mut self) -> bool;
}

pub trait ExecutorFactory: Send + Sync {
    fn spawn(&self, session: &str) -> Result<Box<dyn Executor>, ExecError>;
}

pub type StubHandler = Arc<dyn Fn(&str) -> Result<String, String> + Send + Sync>;

/// In-process stand-in that never runs code. Cells go to a handler closure;
/// top-level `name = ...` lines are remembered for `list_variables`.
pub struct StubExecutor {
    handler: StubHandler,
    names: BTreeMap<String, String>,
    installed: Vec<String>,
}

impl StubExecutor {
    pub fn new(handler: StubHandler) -> StubExecutor {
        StubExecutor { handler, names: BTreeMap::new(), installed: Vec::new() }
    }

    pub fn installed(&self) -> &[String] {
        &self.installed
    }
}

fn assigned_name(line: &str) -> Option<&str> {
    if line.starts_with(char::is_whitespace) {
        return None;
    }
    let (lhs, rhs) = line.split_once('=')?;
    if rhs.starts_with('=') {
        return None;
    }
    let name = lhs.trim();
    let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    (valid && !name.starts_with('_')).then_some(name)
}

impl Executor for StubExecutor {
    fn execute(&mut self, code: &str, reset: bool) -> Result<ExecutionResult, ExecError> {
        let start = Instant::now();
        if reset {
            self.names.clear();
        }
        let outcome = (self.handler)(code);
        let ms = start.elapsed().as_millis() as u64;
        Ok(match outcome {
            Ok(out) => {
                for line in code.lines() {
                    if let Some(name) = assigned_name(line) {
                        self.names.insert(name.to_string(), "object".into());
                    }
                }
                ExecutionResult::success(out, ms)
            }
            Err(e) => ExecutionResult::failure(String::new(), e, ms),
        })
    }

    fn list_variables(&mut self) -> Result<BTreeMap<String, String>, ExecError> {
        Ok(self.names.clone())
    }

    fn install(&mut self, package: &str) -> Result<String, String> {
        self.installed.push(package.to_string());
        Ok(format!("installed {package}"))
    }

    fn restart(&mut self) -> Result<(), ExecError> {
        self.names.clear();
        Ok(())
    }

    fn is_alive(&mut self) -> bool {
        true
    }
}

pub struct StubFactory {
    handler: StubHandler,
}

impl StubFactory {
    pub fn new(handler: impl Fn(&str) -> Result<String, String> + Send + Sync + 'static) -> StubFactory {
        StubFactory { handler: Arc::new(handler) }
    }
}

impl ExecutorFactory for StubFactory {
    fn spawn(&self, _session: &str) -> Result<Box<dyn Executor>, ExecError> {
        Ok(Box::new(StubExecutor::new(self.handler.clone())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_respects_char_boundaries() {
        let mut s = "ééé".to_string();
        assert!(truncate_output(&mut s, 3));
        assert_eq!(s, format!("é{TRUNCATION_MARKER}"));
        let mut short = "ok".to_string();
        assert!(!truncate_output(&mut short, 3));
    }

    #[test]
    fn stub_tracks_assignments() {
        let mut ex = StubExecutor::new(Arc::new(|_| Ok(String::new())));
        ex.execute("x = 1\nif x == 1:\n    y = 2\n_z = 3\nx == 2", false).unwrap();
        assert_eq!(ex.list_variables().unwrap().keys().collect::<Vec<_>>(), ["x"]);
        ex.execute("", true).unwrap();
        assert!(ex.list_variables().unwrap().is_empty());
    }

    #[test]
    fn render_joins_stdout_and_error() {
        let r = ExecutionResult::failure("partial\n".into(), "ZeroDivisionError".into(), 1);
        assert_eq!(r.render(), "partial\nZeroDivisionError");
    }
}
