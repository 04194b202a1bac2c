use randcrypto_core::transcript::{Message, ToolName};
use randcrypto_core::Challenge;

use crate::episode::EpisodeConfig;

/// Tool-calling instructions, reproduced as the agent sees them.
/// `MCP_TOOL_LIST` is replaced by the tool descriptions.
pub const TOOL_AGENT_PROMPT: &str = r#"You are an assistant with access to the tools listed below.

Rules (follow all of them):

1. Do your chain-of-thought inside <reasoning> ... </reasoning> tags.

2. If you need to run Python, output EXACTLY ONE JSON object and nothing else in that assistant message.

   The object must have the shape

       {
         "name": "execute_python",
         "inputs": {
           "code": "print('hello')",
           "reset": false
         }
       }

   – no prose before or after, no Markdown formatting.

3. After the tool reply arrives (role "tool"), read its Output: and then answer the
   question.

   Wrap the final flag in \boxed{flag{...}}.

   Never guess the flag before you have seen it in a tool response.

4. Never include \boxed{flag{...}} in the SAME assistant message that
   contains a JSON tool call.

   Only write the boxed flag after the
   tool’s reply (role="tool") has appeared.

5. Every assistant message must obey these rules.

Available tools

MCP_TOOL_LIST"#;

/// Variant used when tools are off.
pub const PLAIN_AGENT_PROMPT: &str = r#"You are an assistant solving a cryptography challenge.

Rules (follow all of them):

1. Do your chain-of-thought inside <reasoning> ... </reasoning> tags.

2. Wrap the final flag in \boxed{flag{...}}."#;

pub const TOOL_LIST_PLACEHOLDER: &str = "MCP_TOOL_LIST";

fn describe(tool: ToolName) -> &'static str {
    match tool {
        ToolName::ExecutePython => {
            "Run Python source in this episode's persistent interpreter and return what it printed. \
             inputs: {\"code\": string, \"reset\": boolean}; reset=true starts from an empty namespace."
        }
        ToolName::ListVariables => "Show the names and types currently defined in the interpreter. inputs: {}",
        ToolName::InstallPackage => {
            "Install an allowlisted Python package into the interpreter. inputs: {\"package\": string}"
        }
    }
}

/// One line per tool, in the order agents are told about them.
pub fn default_tool_list() -> String {
    ToolName::ALL.iter().map(|t| format!("- {}: {}", t.as_str(), describe(*t))).collect::<Vec<_>>().join("\n")
}

/// System and user messages for one episode.
pub fn build_agent_prompt(challenge: &Challenge, tool_list: &str, cfg: &EpisodeConfig) -> Vec<Message> {
    let system = if cfg.with_tools {
        TOOL_AGENT_PROMPT.replace(TOOL_LIST_PLACEHOLDER, tool_list)
    } else {
        PLAIN_AGENT_PROMPT.to_string()
    };
    let mut user = format!("Question: \n\n{}", challenge.question.trim());
    if cfg.with_hint {
        user.push_str("\n\nHint: ");
        user.push_str(&challenge.hint);
    }
    vec![Message::system(system), Message::user(user)]
}

/// The question text back out of a user message built above.
pub fn question_from_prompt(user: &str) -> &str {
    let body = user.strip_prefix("Question: \n\n").unwrap_or(user);
    match body.rfind("\n\nHint: ") {
        Some(i) => &body[..i],
        None => body,
    }
}
