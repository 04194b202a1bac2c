//! Mock agent and stub executor built on the reference solvers, so whole
//! episodes run without a model or an interpreter.

use randcrypto_core::flag::find_flags;
use randcrypto_core::solvers::solve;
use randcrypto_core::transcript::{Message, Role, ToolCall};
use randcrypto_core::{PublicChallenge, SubtypeId};
use randcrypto_toolserver::StubFactory;

use crate::agent::{AgentError, ScriptedAgent};
use crate::prompt::question_from_prompt;

/// Python cell that decrypts the challenge with the `randcrypto` solver
/// module. The stub executor below understands exactly this layout.
pub fn solver_script(subtype: SubtypeId, question: &str) -> String {
    let literal = serde_json::to_string(question).expect("strings serialize");
    format!(
        "from randcrypto.solvers import solve\nSUBTYPE = \"{}\"\nQUESTION = {literal}\nprint(solve(SUBTYPE, QUESTION))\n",
        subtype.name()
    )
}

fn script_field<'a>(code: &'a str, key: &str) -> Option<&'a str> {
    code.lines().find_map(|l| l.strip_prefix(key)?.strip_prefix(" = "))
}

/// Runs a [`solver_script`] cell by calling the reference solver in process.
pub fn run_solver_script(code: &str) -> Result<String, String> {
    let subtype = script_field(code, "SUBTYPE")
        .and_then(|s| serde_json::from_str::<String>(s).ok())
        .ok_or("NameError: name 'SUBTYPE' is not defined")?;
    let subtype = SubtypeId::by_name(&subtype).map_err(|e| format!("ValueError: {e}"))?;
    let question = script_field(code, "QUESTION")
        .and_then(|s| serde_json::from_str::<String>(s).ok())
        .ok_or("NameError: name 'QUESTION' is not defined")?;
    let public = PublicChallenge::new("cell".into(), subtype, subtype.difficulty(), question, String::new())
        .map_err(|e| format!("ValueError: {e}"))?;
    solve(&public).map(|out| format!("{}\n", out.flag)).map_err(|e| format!("RuntimeError: {e}"))
}

/// Stub executors that run solver scripts and reject anything else.
pub fn solver_stub_factory() -> StubFactory {
    StubFactory::new(run_solver_script)
}

fn last_tool_output(messages: &[Message]) -> Option<&str> {
    messages.iter().rev().take_while(|m| m.role != Role::Assistant).find(|m| m.role == Role::Tool).map(|m| m.content.as_str())
}

/// First turn: one strict tool call running the solver script. After a
/// tool reply: box the last flag seen in it, or give up in prose.
pub fn oracle_agent() -> ScriptedAgent {
    ScriptedAgent::new(|ctx, messages| {
        if let Some(output) = last_tool_output(messages) {
            return Ok(match find_flags(output).last() {
                Some(flag) => format!("<reasoning>The solver printed the flag.</reasoning>\n\\boxed{{{flag}}}"),
                None => "<reasoning>The tool output had no flag.</reasoning>\nI could not recover the flag.".into(),
            });
        }
        let user = messages
            .iter()
            .find(|m| m.role == Role::User)
            .ok_or_else(|| AgentError::Response("no question in transcript".into()))?;
        let question = question_from_prompt(&user.content);
        Ok(ToolCall::execute(solver_script(ctx.subtype, question), false).to_message_json())
    })
}

/// Solves directly without tools and answers in one message.
pub fn answer_only_agent() -> ScriptedAgent {
    ScriptedAgent::new(|ctx, messages| {
        let user = messages.iter().find(|m| m.role == Role::User).map(|m| m.content.as_str()).unwrap_or("");
        let cell = solver_script(ctx.subtype, question_from_prompt(user));
        Ok(match run_solver_script(&cell) {
            Ok(out) => format!("<reasoning>Worked it out.</reasoning>\n\\boxed{{{}}}", out.trim()),
            Err(_) => "No idea.".into(),
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use randcrypto_core::{generate, GenSeed};

    #[test]
    fn solver_script_round_trip() {
        for name in ["caesar", "vigenere", "jwt_none", "small_primes"] {
            let c = generate(SubtypeId::by_name(name).unwrap(), GenSeed(4));
            let out = run_solver_script(&solver_script(c.subtype, &c.question)).unwrap();
            assert_eq!(out, format!("{}\n", c.expected_flag));
        }
    }

    #[test]
    fn other_code_is_an_error() {
        assert!(run_solver_script("print('hello')").unwrap_err().contains("NameError"));
    }
}
