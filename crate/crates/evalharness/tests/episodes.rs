use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use randcrypto_core::transcript::{Message, Role, ToolCall, ToolName};
use randcrypto_core::{generate, Challenge, GenSeed, SubtypeId, Tenths};
use randcrypto_evalharness::oracle::{oracle_agent, solver_stub_factory};
use randcrypto_evalharness::{
    evaluate_dataset, rescore, run_episode, run_sweep, Agent, AgentError, AgentReply, ChatApiAgent, ChatApiConfig,
    EpisodeConfig, EpisodeContext, ScriptedAgent, StopReason,
};
use randcrypto_toolserver::{ServerConfig, StubFactory, TcpClient, ToolDispatch, ToolServer};

fn caesar(seed: u64) -> Challenge {
    generate(SubtypeId::by_name("caesar").unwrap(), GenSeed(seed))
}

fn stub_server() -> ToolServer {
    ToolServer::new(ServerConfig::default(), Box::new(solver_stub_factory()))
}

fn tools_cfg() -> EpisodeConfig {
    EpisodeConfig::new(false, true)
}

fn boxed(flag: &str) -> String {
    format!("\\boxed{{{flag}}}")
}

#[test]
fn immediate_answer_is_a_one_message_episode() {
    let c = caesar(1);
    let right = ScriptedAgent::from_turns(vec![boxed(&c.expected_flag.render())]);
    let ep = run_episode(&right, &c, None, &EpisodeConfig::new(false, false), 0, "s").unwrap();
    assert_eq!(ep.transcript.iter().filter(|m| m.role == Role::Assistant).count(), 1);
    assert!(ep.success);
    assert_eq!(ep.stop, StopReason::Answered);
    assert_eq!(ep.reward.total, Tenths(11));

    let wrong = ScriptedAgent::from_turns(vec![boxed("flag{nope}")]);
    let ep = run_episode(&wrong, &c, None, &EpisodeConfig::new(false, false), 0, "s").unwrap();
    assert!(!ep.success);
    assert_eq!(ep.reward.total, Tenths(1));
}

#[test]
fn tool_calls_stop_at_the_loop_cap() {
    let c = caesar(2);
    let call = ToolCall::execute("x = 1", false).to_message_json();
    let agent = ScriptedAgent::from_turns(vec![call; 5]);
    let server = ToolServer::new(ServerConfig::default(), Box::new(StubFactory::new(|_| Ok(String::new()))));
    let ep = run_episode(&agent, &c, Some(&server), &tools_cfg(), 0, "s").unwrap();
    assert_eq!(ep.dispatched, 4);
    assert_eq!(ep.stop, StopReason::LoopCap);
    assert_eq!(ep.execution_results, [true, true, true, true, false]);
    assert_eq!(ep.transcript.iter().filter(|m| m.role == Role::Tool).count(), 4);
    assert!(ep.transcript.iter().filter(|m| m.role == Role::Tool).all(|m| m.content.starts_with("Output: ")));
}

#[test]
fn oracle_agent_earns_full_reward_through_stub() {
    let server = stub_server();
    for seed in 0..5 {
        let c = caesar(seed);
        let ep = run_episode(&oracle_agent(), &c, Some(&server), &tools_cfg(), 0, &format!("s{seed}")).unwrap();
        assert!(ep.success, "{:?}", ep.transcript);
        assert_eq!(ep.reward.total, Tenths(16));
        assert_eq!(ep.dispatched, 1);
        assert_eq!(ep.transcript[3].content, format!("Output: {}\n", c.expected_flag));
    }
    assert_eq!(server.session_count(), 0, "sessions are closed after each episode");
}

fn python_caesar_script(question: &str) -> String {
    let q = serde_json::to_string(question).unwrap();
    [
        format!("q = {q}"),
        "for line in q.splitlines():".into(),
        "    if ':' not in line:".into(),
        "        continue".into(),
        "    value = line.split(':', 1)[1].strip()".into(),
        "    for s in range(26):".into(),
        "        out = ''.join(chr((ord(ch) - 97 - s) % 26 + 97) if ch.islower() else ch for ch in value)".into(),
        "        if out.startswith('flag{'):".into(),
        "            print(out)".into(),
    ]
    .join("\n")
}

#[test]
fn live_interpreter_episode() {
    let server = ToolServer::subprocess(ServerConfig::default());
    let c = caesar(9);
    let agent = ScriptedAgent::new(|_, messages: &[Message]| {
        if let Some(tool) = messages.iter().rev().find(|m| m.role == Role::Tool) {
            let flag = tool.content.trim_start_matches("Output: ").trim().to_string();
            return Ok(format!("<reasoning>Shift found.</reasoning> {}", boxed(&flag)));
        }
        let question = randcrypto_evalharness::prompt::question_from_prompt(&messages[1].content);
        Ok(ToolCall::execute(python_caesar_script(question), false).to_message_json())
    });
    let ep = run_episode(&agent, &c, Some(&server), &tools_cfg(), 0, "live").unwrap();
    assert!(ep.success, "{:#?}", ep.transcript);
    assert_eq!(ep.reward.total, Tenths(16));
}

#[test]
fn premature_answer_is_penalised_and_not_dispatched() {
    let c = caesar(3);
    let flag = c.expected_flag.render();
    let call = ToolCall::execute(format!("print('{}')", boxed(&flag).replace('\\', "\\\\")), false).to_message_json();
    let agent = ScriptedAgent::from_turns(vec![call]);
    let server = stub_server();
    let ep = run_episode(&agent, &c, Some(&server), &tools_cfg(), 0, "s").unwrap();
    assert_eq!(ep.dispatched, 0);
    assert_eq!(ep.stop, StopReason::Answered);
    assert_eq!(ep.reward.deduction, Tenths(-5));
    assert_eq!(ep.reward.total, Tenths(10 + 1 + 2 - 5));
}

#[test]
fn prose_wrapped_call_is_not_dispatched() {
    let c = caesar(4);
    let msg = format!("Let me run this: {}", ToolCall::execute("print(1)", false).to_message_json());
    let agent = ScriptedAgent::from_turns(vec![msg]);
    let server = stub_server();
    let ep = run_episode(&agent, &c, Some(&server), &tools_cfg(), 0, "s").unwrap();
    assert_eq!(ep.stop, StopReason::MalformedToolCall);
    assert_eq!(ep.dispatched, 0);
    assert_eq!(ep.reward.tool_format, Tenths::ZERO);
}

struct Failing;
impl Agent for Failing {
    fn respond(&self, _: &EpisodeContext, _: &[Message], _: u32) -> Result<AgentReply, AgentError> {
        Err(AgentError::Transport("connection refused".into()))
    }
}

#[test]
fn agent_failure_is_recorded() {
    let ep = run_episode(&Failing, &caesar(5), None, &EpisodeConfig::new(false, false), 0, "s").unwrap();
    assert_eq!(ep.stop, StopReason::AgentError);
    assert!(!ep.success);
    assert!(ep.error.unwrap().contains("refused"));
}

struct Verbose;
impl Agent for Verbose {
    fn respond(&self, _: &EpisodeContext, _: &[Message], max_tokens: u32) -> Result<AgentReply, AgentError> {
        Ok(AgentReply { content: ToolCall::execute("x = 1", false).to_message_json(), completion_tokens: Some(max_tokens.min(3000)) })
    }
}

#[test]
fn token_budget_ends_the_episode() {
    let server = ToolServer::new(ServerConfig::default(), Box::new(StubFactory::new(|_| Ok(String::new()))));
    let mut cfg = tools_cfg();
    cfg.max_tool_loops = 10;
    let ep = run_episode(&Verbose, &caesar(6), Some(&server), &cfg, 0, "s").unwrap();
    assert_eq!(ep.stop, StopReason::TokenBudget);
    assert_eq!(ep.tokens_used, 8192);
    assert_eq!(ep.dispatched, 2);
}

#[test]
fn unreachable_tool_server_is_an_episode_error() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap();
    let client = TcpClient::new(port, Duration::from_secs(2)).unwrap();
    let ep = run_episode(&oracle_agent(), &caesar(7), Some(&client), &tools_cfg(), 0, "s").unwrap();
    assert_eq!(ep.stop, StopReason::ToolServerError);
    assert!(!ep.success);
    assert_eq!(ep.execution_results, [false]);
}

#[test]
fn tool_endpoint_must_match_config() {
    let server = stub_server();
    assert!(run_episode(&oracle_agent(), &caesar(0), None, &tools_cfg(), 0, "s").is_err());
    assert!(run_episode(&oracle_agent(), &caesar(0), Some(&server), &EpisodeConfig::new(false, false), 0, "s").is_err());
}

fn dataset(n: u64) -> Vec<Challenge> {
    (0..n).map(caesar).collect()
}

/// Correct only on samples listed in `pattern`.
fn patterned(pattern: &'static [usize]) -> ScriptedAgent {
    ScriptedAgent::new(move |ctx, _| {
        let c = generate(ctx.subtype, GenSeed(ctx.challenge_id.rsplit('-').next().unwrap().parse().unwrap()));
        Ok(if pattern.contains(&ctx.sample) { boxed(&c.expected_flag.render()) } else { boxed("flag{wrong}") })
    })
}

#[test]
fn metrics_from_constructed_patterns() {
    let data = dataset(4);
    let cfg = EpisodeConfig::new(false, false);
    let always = evaluate_dataset(&patterned(&[0, 1, 2, 3, 4, 5, 6, 7]), &data, &cfg, None, 8, 4, None).unwrap();
    assert_eq!((always.report.pass_at_k, always.report.maj_at_k), (1.0, 1.0));
    let once = evaluate_dataset(&patterned(&[3]), &data, &cfg, None, 8, 4, None).unwrap();
    assert_eq!((once.report.pass_at_k, once.report.maj_at_k), (1.0, 0.0));
    let never = evaluate_dataset(&patterned(&[]), &data, &cfg, None, 8, 4, None).unwrap();
    assert_eq!((never.report.pass_at_k, never.report.maj_at_k), (0.0, 0.0));
    let four = evaluate_dataset(&patterned(&[0, 2, 4, 6]), &data, &cfg, None, 8, 4, None).unwrap();
    assert_eq!(four.report.maj_at_k, 0.0);
    let five = evaluate_dataset(&patterned(&[0, 2, 4, 6, 7]), &data, &cfg, None, 8, 4, None).unwrap();
    assert_eq!(five.report.maj_at_k, 1.0);
}

#[test]
fn archived_runs_rescore_identically() {
    let dir = tempfile::tempdir().unwrap();
    let data = dataset(3);
    let server = stub_server();
    let run = evaluate_dataset(&oracle_agent(), &data, &tools_cfg(), Some(&server), 2, 2, Some(dir.path())).unwrap();
    assert_eq!(run.report.pass_at_k, 1.0);
    assert!(dir.path().join("report.json").exists());
    let lines = std::fs::read_to_string(dir.path().join("episodes.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 6);
    for record in &run.episodes {
        let c = data.iter().find(|c| c.id == record.challenge_id).unwrap();
        assert_eq!(rescore(dir.path(), record, c).unwrap(), record.reward);
    }
}

#[test]
fn episodes_never_share_sessions() {
    let factory = StubFactory::new(|_| Ok(String::new()));
    let server = ToolServer::new(ServerConfig::default(), Box::new(factory));
    let list = serde_json::json!({"name": "list_variables", "inputs": {}}).to_string();
    let plant = ToolCall::execute("leak = 1", false).to_message_json();
    let agent = ScriptedAgent::from_turns(vec![list, plant, "done".into()]);
    let run = evaluate_dataset(&agent, &dataset(2), &tools_cfg(), Some(&server), 4, 3, None).unwrap();
    assert_eq!(run.episodes.len(), 8);
    let dir = tempfile::tempdir().unwrap();
    let run2 = evaluate_dataset(&agent, &dataset(2), &tools_cfg(), Some(&server), 4, 3, Some(dir.path())).unwrap();
    for record in run.episodes.iter().chain(&run2.episodes) {
        assert_eq!(record.dispatched, 2);
    }
    for record in &run2.episodes {
        let msgs = randcrypto_core::transcript::read_transcript(&dir.path().join(&record.transcript)).unwrap();
        let first_tool = msgs.iter().find(|m| m.role == Role::Tool).unwrap();
        assert_eq!(first_tool.content, "Output: {}");
    }
}

#[test]
fn sweep_covers_four_conditions() {
    let dir = tempfile::tempdir().unwrap();
    let server = stub_server();
    let agent = ScriptedAgent::new(|ctx, messages| {
        if messages[0].content.contains("execute_python") {
            oracle_agent().respond(ctx, messages, 0).map(|r| r.content)
        } else {
            randcrypto_evalharness::oracle::answer_only_agent().respond(ctx, messages, 0).map(|r| r.content)
        }
    });
    let reports = run_sweep(&agent, &dataset(2), &server, 2, 2, 4, Some(dir.path())).unwrap();
    assert_eq!(
        reports.keys().collect::<Vec<_>>(),
        ["hint-notools", "hint-tools", "nohint-notools", "nohint-tools"]
    );
    assert!(reports.values().all(|r| r.pass_at_k == 1.0));
    assert!(dir.path().join("sweep.json").exists());
    assert!(dir.path().join("hint-tools/report.json").exists());
}

fn fake_chat_endpoint(reply: &'static str) -> (String, thread::JoinHandle<String>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let handle = thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut len = 0;
        let mut head = String::new();
        loop {
            let mut line = String::new();
            reader.read_line(&mut line).unwrap();
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                len = v.trim().parse().unwrap();
            }
            head.push_str(&line);
            if line == "\r\n" {
                break;
            }
        }
        let mut body = vec![0; len];
        reader.read_exact(&mut body).unwrap();
        let payload = serde_json::json!({"choices": [{"message": {"role": "assistant", "content": reply}}], "usage": {"completion_tokens": 7}}).to_string();
        let mut out = stream;
        write!(out, "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{payload}", payload.len()).unwrap();
        head + &String::from_utf8(body).unwrap()
    });
    (format!("http://{addr}/v1"), handle)
}

#[test]
fn chat_api_agent_talks_openai_style() {
    let (url, server) = fake_chat_endpoint("\\boxed{flag{abc}}");
    let cfg: ChatApiConfig = serde_json::from_value(serde_json::json!({"base_url": url, "model": "test-model", "api_key_env": "RANDCRYPTO_TEST_UNSET_KEY"})).unwrap();
    let agent = ChatApiAgent::new(cfg).unwrap();
    let ctx = EpisodeContext { challenge_id: "c".into(), subtype: SubtypeId::by_name("caesar").unwrap(), sample: 0 };
    let reply = agent.respond(&ctx, &[Message::user("hi")], 4096).unwrap();
    assert_eq!(reply.content, "\\boxed{flag{abc}}");
    assert_eq!(reply.completion_tokens, Some(7));
    let request = server.join().unwrap();
    assert!(request.starts_with("POST /v1/chat/completions"));
    assert!(request.contains("\"max_tokens\":4096"));
    assert!(request.contains("\"model\":\"test-model\""));
}

#[test]
fn list_variables_call_shape_is_dispatchable() {
    let server = stub_server();
    let call = ToolCall { name: ToolName::ListVariables, code: String::new(), reset: false };
    assert!(Arc::new(server).dispatch("s", &call).unwrap().is_ok());
}
