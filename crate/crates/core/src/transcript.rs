//! Agent episodes: messages, tool-call extraction and boxed answers.

use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::flag::Flag;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
    Tool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn new(role: Role, content: impl Into<String>) -> Message {
        Message { role, content: content.into() }
    }

    pub fn system(content: impl Into<String>) -> Message {
        Message::new(Role::System, content)
    }

    pub fn user(content: impl Into<String>) -> Message {
        Message::new(Role::User, content)
    }

    pub fn assistant(content: impl Into<String>) -> Message {
        Message::new(Role::Assistant, content)
    }

    pub fn tool(content: impl Into<String>) -> Message {
        Message::new(Role::Tool, content)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ToolName {
    ExecutePython,
    ListVariables,
    InstallPackage,
}

impl ToolName {
    pub const ALL: [ToolName; 3] = [ToolName::ExecutePython, ToolName::ListVariables, ToolName::InstallPackage];

    pub fn as_str(self) -> &'static str {
        match self {
            ToolName::ExecutePython => "execute_python",
            ToolName::ListVariables => "list_variables",
            ToolName::InstallPackage => "install_package",
        }
    }

    pub fn parse(name: &str) -> Option<ToolName> {
        ToolName::ALL.into_iter().find(|t| t.as_str() == name)
    }
}

impl fmt::Display for ToolName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A tool invocation. `code` holds the Python source for `execute_python`
/// and the package name for `install_package`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ToolCall {
    pub name: ToolName,
    pub code: String,
    pub reset: bool,
}

impl ToolCall {
    pub fn execute(code: impl Into<String>, reset: bool) -> ToolCall {
        ToolCall { name: ToolName::ExecutePython, code: code.into(), reset }
    }

    /// The `inputs` object as the agent writes it and the tool server expects it.
    pub fn inputs(&self) -> Value {
        match self.name {
            ToolName::ExecutePython => serde_json::json!({"code": self.code, "reset": self.reset}),
            ToolName::ListVariables => serde_json::json!({}),
            ToolName::InstallPackage => serde_json::json!({"package": self.code}),
        }
    }

    /// Canonical single-object message body for this call.
    pub fn to_message_json(&self) -> String {
        // serde_json sorts object keys; write the outer object by hand so
        // `name` leads as in the prompt's example.
        let inputs = serde_json::to_string_pretty(&self.inputs()).expect("JSON values always serialize");
        format!("{{\n  \"name\": \"{}\",\n  \"inputs\": {}\n}}", self.name.as_str(), inputs.replace('\n', "\n  "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedToolCall {
    pub call: ToolCall,
    /// The whole trimmed message is exactly one object of the required shape.
    pub strict: bool,
}

/// Checks the object's shape. In strict mode every key is required and no
/// extra keys are allowed; lenient mode defaults `reset` to false.
fn tool_call_from_value(value: &Value, strict: bool) -> Option<ToolCall> {
    let obj = value.as_object()?;
    if strict && obj.len() != 2 {
        return None;
    }
    let name = ToolName::parse(obj.get("name")?.as_str()?)?;
    let empty = Map::new();
    let inputs = match obj.get("inputs") {
        Some(v) => v.as_object()?,
        None if !strict && name == ToolName::ListVariables => &empty,
        None => return None,
    };
    let only = |keys: &[&str]| inputs.keys().all(|k| keys.contains(&k.as_str()));
    match name {
        ToolName::ExecutePython => {
            let code = inputs.get("code")?.as_str()?.to_string();
            let reset = match inputs.get("reset") {
                Some(v) => v.as_bool()?,
                None if !strict => false,
                None => return None,
            };
            if strict && !only(&["code", "reset"]) {
                return None;
            }
            Some(ToolCall { name, code, reset })
        }
        ToolName::ListVariables => {
            if strict && !inputs.is_empty() {
                return None;
            }
            Some(ToolCall { name, code: String::new(), reset: false })
        }
        ToolName::InstallPackage => {
            let package = inputs.get("package")?.as_str()?.to_string();
            if strict && !only(&["package"]) {
                return None;
            }
            Some(ToolCall { name, code: package, reset: false })
        }
    }
}

/// First well-formed tool-call object embedded anywhere in `text`.
fn find_embedded_call(text: &str) -> Option<ToolCall> {
    text.match_indices('{').find_map(|(start, _)| {
        let mut stream = serde_json::Deserializer::from_str(&text[start..]).into_iter::<Value>();
        match stream.next() {
            Some(Ok(value)) => tool_call_from_value(&value, false),
            _ => None,
        }
    })
}

/// Tool call carried by an assistant message. `strict` is true only when the
/// trimmed content is a single object of the exact required shape;
/// an object surrounded by prose or fences, or missing `reset`, is reported
/// with `strict = false`.
pub fn parse_tool_call(message: &Message) -> Option<ParsedToolCall> {
    if message.role != Role::Assistant {
        return None;
    }
    let trimmed = message.content.trim();
    if let Ok(value) = serde_json::from_str::<Value>(trimmed) {
        if let Some(call) = tool_call_from_value(&value, true) {
            return Some(ParsedToolCall { call, strict: true });
        }
    }
    find_embedded_call(&message.content).map(|call| ParsedToolCall { call, strict: false })
}

const BOX_OPEN: &str = "\\boxed{";

/// Every `\boxed{...}` payload, with braces matched by depth. Boxes nested
/// inside another box are reported too.
pub fn boxed_payloads(content: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut search = 0;
    while let Some(pos) = content[search..].find(BOX_OPEN) {
        let inner_start = search + pos + BOX_OPEN.len();
        let mut depth = 1usize;
        let mut end = None;
        for (i, ch) in content[inner_start..].char_indices() {
            match ch {
                '{' => depth += 1,
                '}' => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(inner_start + i);
                        break;
                    }
                }
                _ => {}
            }
        }
        if let Some(end) = end {
            out.push(&content[inner_start..end]);
        }
        search = inner_start;
    }
    out
}

/// The last boxed payload that is a well-formed flag.
pub fn extract_boxed_flag(content: &str) -> Option<Flag> {
    boxed_payloads(content).into_iter().rev().find_map(|p| Flag::parse(p.trim()).ok())
}

/// Indices of assistant messages that contain both a tool-call object and a
/// boxed flag.
pub fn find_premature_answer(messages: &[Message]) -> Vec<usize> {
    messages
        .iter()
        .enumerate()
        .filter(|(_, m)| {
            m.role == Role::Assistant
                && extract_boxed_flag(&m.content).is_some()
                && find_embedded_call(&m.content).is_some()
        })
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Parse { line: usize, source: serde_json::Error },
}

pub fn write_transcript(path: &Path, messages: &[Message]) -> Result<(), TranscriptError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for m in messages {
        serde_json::to_writer(&mut out, m).map_err(|e| TranscriptError::Parse { line: 0, source: e })?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_transcript(path: &Path) -> Result<Vec<Message>, TranscriptError> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut messages = Vec::new();
    for (i, line) in file.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        messages.push(serde_json::from_str(&line).map_err(|e| TranscriptError::Parse { line: i + 1, source: e })?);
    }
    Ok(messages)
}
