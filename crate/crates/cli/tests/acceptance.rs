//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines are printed in order and uncaptured.

use std::collections::BTreeMap;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use randcrypto_core::dataset::read_records;
use randcrypto_core::scoring::{aggregate_report, maj_threshold, pass_at_k, score_transcript};
use randcrypto_core::solvers::solve;
use randcrypto_core::transcript::{parse_tool_call, Message, ToolCall};
use randcrypto_core::{generate, Difficulty, Flag, GenSeed, SubtypeId, Tenths};
use randcrypto_evalharness::oracle::{oracle_agent, solver_stub_factory};
use randcrypto_evalharness::{run_episode, EpisodeConfig};
use randcrypto_toolserver::{spawn_tcp, KillReason, ServerConfig, TcpClient, ToolDispatch, ToolOutput, ToolServer};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// The tool-call object exactly as the agent prompt shows it.
const PROMPT_EXAMPLE_CALL: &str = r#"{
  "name": "execute_python",
  "inputs": {
    "code": "print('hello')",
    "reset": false
  }
}"#;

fn oracle_round_trip() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut total = 0;
    for subtype in SubtypeId::all() {
        for seed in 0..100 {
            total += 1;
            let c = generate(subtype, GenSeed(seed));
            let public = c.public_view().map_err(|e| format!("{}: {e}", c.id))?;
            match solve(&public) {
                Ok(out) if out.flag == c.expected_flag => {}
                Ok(out) => failures.push(format!("{} -> {}", c.id, out.flag)),
                Err(e) => failures.push(format!("{}: {e}", c.id)),
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let passed = total - failures.len();
    ensure!(failures.is_empty(), "{passed}/{total}; first failures: {:?}", &failures[..failures.len().min(5)]);
    ensure!(total == 4900, "expected 4900 cases, ran {total}");
    ensure!(secs < 300.0, "4900/4900 but took {secs:.1}s");
    Ok(format!("{passed}/{total} in {secs:.1}s"))
}

fn reward_arithmetic() -> Outcome {
    let flag = Flag::parse("flag{abc123}").unwrap();
    let call = ToolCall::execute("print('flag{abc123}')", false).to_message_json();
    let q = Message::user("Question: ...");
    let boxed = |f: &str| Message::assistant(format!("<reasoning>done</reasoning> \\boxed{{{f}}}"));
    let score = |msgs: &[Message], exec: &[bool]| score_transcript(msgs, &flag, exec).map_err(|e| e.to_string());

    let full = score(&[q.clone(), Message::assistant(&call), Message::tool("Output: flag{abc123}"), boxed("flag{abc123}")], &[true])?;
    ensure!(full.total == Tenths(16) && full.total.to_string() == "1.6", "full success gave {}", full.total);

    // Accuracy cannot appear without the boxed format it is read from, and
    // execution cannot appear without a strict call, so those two are checked
    // on their component with the forced companion in the total.
    let correct = score(&[q.clone(), boxed("flag{abc123}")], &[])?;
    ensure!(correct.accuracy == Tenths(10) && correct.total == Tenths(11), "accuracy fixture: {correct:?}");
    let format_only = score(&[q.clone(), boxed("flag{wrong}")], &[])?;
    ensure!(format_only.total == Tenths(1) && format_only.answer_format == Tenths(1), "format fixture: {format_only:?}");
    let tool_only = score(&[q.clone(), Message::assistant(&call), Message::tool("Output: error")], &[false])?;
    ensure!(tool_only.total == Tenths(2) && tool_only.tool_format == Tenths(2), "tool fixture: {tool_only:?}");
    let exec = score(&[q.clone(), Message::assistant(&call), Message::tool("Output: 1")], &[true])?;
    ensure!(exec.execution == Tenths(3) && exec.total == Tenths(5), "execution fixture: {exec:?}");

    let premature = Message::assistant(format!("{call}\n\\boxed{{flag{{abc123}}}}"));
    let msgs = [q.clone(), Message::assistant(&call), Message::tool("Output: flag{abc123}"), premature];
    let p = score(&msgs, &[true])?;
    let sum = p.accuracy + p.answer_format + p.tool_format + p.execution;
    ensure!(p.deduction == Tenths(-5) && p.total == sum + Tenths(-5), "premature fixture: {p:?}");
    Ok(format!(
        "full 1.6; components accuracy 1.0 (total 1.1, needs a boxed answer), format 0.1, tool 0.2, \
execution 0.3 (total 0.5, needs a call); premature {} = {} - 0.5",
        p.total, sum
    ))
}

fn exhaustive_counts(rows: &BTreeMap<String, Vec<bool>>, k: usize) -> (usize, usize) {
    let threshold = (1..=k).find(|t| 2 * t > k).unwrap();
    let mut pass = 0;
    let mut maj = 0;
    for row in rows.values() {
        let mut wins = 0;
        for &s in row {
            if s {
                wins += 1;
            }
        }
        if wins >= 1 {
            pass += 1;
        }
        if wins >= threshold {
            maj += 1;
        }
    }
    (pass, maj)
}

fn metrics_definitions() -> Outcome {
    let k = 8;
    let mut rows = BTreeMap::new();
    for i in 0..50 {
        let mut row = vec![false; k];
        if i < 44 {
            row[i % k] = true;
        }
        rows.insert(format!("c{i:02}"), row);
    }
    let report = aggregate_report(&rows, k).map_err(|e| e.to_string())?;
    ensure!(report.pass_at_k == 0.88, "Pass@8 = {}", report.pass_at_k);

    ensure!(maj_threshold(8) == 5, "threshold {}", maj_threshold(8));
    let four = [true, true, true, true, false, false, false, false];
    let five = [true, true, true, true, true, false, false, false];
    ensure!(!pass_at_k(&four, 5).unwrap() && pass_at_k(&five, 5).unwrap(), "4-of-8 / 5-of-8 boundary");

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for m in 0..1000 {
        let k = rng.gen_range(1..=12);
        let n = rng.gen_range(0..40);
        let density: f64 = rng.gen();
        let rows: BTreeMap<String, Vec<bool>> =
            (0..n).map(|i| (format!("c{i}"), (0..k).map(|_| rng.gen_bool(density)).collect())).collect();
        let report = aggregate_report(&rows, k).map_err(|e| e.to_string())?;
        let (pass, maj) = exhaustive_counts(&rows, k);
        ensure!(report.pass_count == pass && report.maj_count == maj, "matrix {m}: counts differ");
        let rate = |c: usize| if n == 0 { 0.0 } else { c as f64 / n as f64 };
        ensure!(report.pass_at_k == rate(pass) && report.maj_at_k == rate(maj), "matrix {m}: rates differ");
    }
    Ok("Pass@8 = 0.88 on 44/50; Maj@8 needs 5 of 8; 1000/1000 random matrices agree".into())
}

fn difficulty_constraint() -> Outcome {
    let counts: Vec<(Difficulty, usize)> =
        Difficulty::ALL.iter().map(|&d| (d, SubtypeId::with_difficulty(d).count())).collect();
    let detail = counts.iter().map(|(d, n)| format!("{}={n}", d.as_str())).collect::<Vec<_>>().join(" ");
    ensure!(counts.iter().all(|&(_, n)| n >= 16), "{detail}");
    Ok(detail)
}

fn run_cli(args: &[&str]) -> Result<(bool, String), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_randcrypto")).args(args).output().map_err(|e| e.to_string())?;
    Ok((out.status.success(), String::from_utf8_lossy(&out.stdout).into_owned()))
}

fn dataset_scale() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().to_str().unwrap();
    let start = Instant::now();
    let (ok, log) = run_cli(&["generate", "--train", "5000", "--test", "50", "--seed", "0", "--out", out])?;
    let gen_secs = start.elapsed().as_secs_f64();
    ensure!(ok, "generate failed: {log}");
    ensure!(gen_secs < 600.0, "generate took {gen_secs:.1}s");

    let mut validated = 0;
    for split in ["train", "test"] {
        let file = dir.path().join(format!("{split}.jsonl"));
        let (ok, log) = run_cli(&["validate", file.to_str().unwrap()])?;
        ensure!(ok, "validate {split}: {}", log.lines().last().unwrap_or(""));
        validated += read_records(&file).map_err(|e| e.to_string())?.len();
    }
    ensure!(validated == 5050, "validated {validated} records");

    let mut flags = Vec::new();
    for split in ["train", "test"] {
        for r in read_records(&dir.path().join(format!("{split}.jsonl"))).map_err(|e| e.to_string())? {
            flags.push(r.flag.ok_or("secret file without flags")?);
        }
    }
    let mut leaks = 0;
    for split in ["train", "test"] {
        let public = std::fs::read_to_string(dir.path().join(format!("{split}.public.jsonl"))).map_err(|e| e.to_string())?;
        leaks += flags.iter().filter(|f| public.contains(f.as_str())).count();
    }
    ensure!(leaks == 0, "{leaks} flags found in redacted exports");
    Ok(format!("generate {gen_secs:.1}s, validate 5050/5050, 0 of {} flags in redacted exports", flags.len()))
}

fn rss_kib() -> u64 {
    let status = std::fs::read_to_string("/proc/self/status").unwrap_or_default();
    status
        .lines()
        .find_map(|l| l.strip_prefix("VmRSS:"))
        .and_then(|v| v.trim().trim_end_matches("kB").trim().parse().ok())
        .unwrap_or(0)
}

fn sandbox_survivability() -> Outcome {
    let cfg = ServerConfig::default();
    let timeout = cfg.limits.timeout;
    let server = Arc::new(ToolServer::subprocess(cfg));
    let addr = spawn_tcp(server, "127.0.0.1:0").map_err(|e| e.to_string())?;
    let client = TcpClient::new(addr, Duration::from_secs(60)).map_err(|e| e.to_string())?;
    let exec = |code: &str| -> Result<randcrypto_toolserver::ExecutionResult, String> {
        match client.dispatch("bomb", &ToolCall::execute(code, false)).map_err(|e| e.to_string())? {
            Ok(ToolOutput::Execution(r)) => Ok(r),
            other => Err(format!("unexpected reply {other:?}")),
        }
    };
    ensure!(exec("warm = 1")?.ok, "warm-up failed");
    let baseline = rss_kib();

    let bomb = "import itertools, string\n\
everything = [''.join(p) for p in itertools.product(string.printable, repeat=6)]";
    let start = Instant::now();
    let r = exec(bomb)?;
    let attack = start.elapsed();
    ensure!(r.killed_by == Some(KillReason::Memory), "bomb result {r:?}");
    ensure!(attack < timeout * 2, "bomb reported after {attack:?}");

    let start = Instant::now();
    let next = exec("print('alive')")?;
    let recovery = start.elapsed();
    ensure!(next.ok && next.stdout == "alive\n", "next request {next:?}");
    let after = rss_kib();
    ensure!(baseline > 0 && after < 2 * baseline, "server RSS {baseline} KiB -> {after} KiB");
    Ok(format!(
        "killed_by=memory after {:.2}s (limit {:.0}s); next call ok in {} ms; RSS {baseline} -> {after} KiB",
        attack.as_secs_f64(),
        (timeout * 2).as_secs_f64(),
        recovery.as_millis()
    ))
}

fn strict_grammar() -> Outcome {
    let strict = parse_tool_call(&Message::assistant(PROMPT_EXAMPLE_CALL)).ok_or("prompt example did not parse")?;
    ensure!(strict.strict && strict.call == ToolCall::execute("print('hello')", false), "prompt example: {strict:?}");
    for prose in ["Sure.", "Let me run this:", "<reasoning>shift by 3</reasoning>", "```json"] {
        let msg = Message::assistant(format!("{prose}\n{PROMPT_EXAMPLE_CALL}"));
        let parsed = parse_tool_call(&msg).ok_or_else(|| format!("{prose:?}: embedded call not found"))?;
        ensure!(!parsed.strict, "{prose:?} parsed as strict");
    }
    let flag = Flag::parse("flag{x}").unwrap();
    let q = Message::user("q");
    let with_strict = score_transcript(&[q.clone(), Message::assistant(PROMPT_EXAMPLE_CALL)], &flag, &[true]).unwrap();
    let lenient = Message::assistant(format!("Running it: {PROMPT_EXAMPLE_CALL}"));
    let with_lenient = score_transcript(&[q, lenient], &flag, &[]).unwrap();
    ensure!(with_strict.tool_format == Tenths(2), "strict call scored {}", with_strict.tool_format);
    ensure!(with_lenient.tool_format == Tenths::ZERO, "lenient call scored {}", with_lenient.tool_format);
    Ok("prompt object strict; 4 prose prefixes lenient; 0.2 only for strict".into())
}

fn end_to_end_mock() -> Outcome {
    let server = ToolServer::new(ServerConfig::default(), Box::new(solver_stub_factory()));
    let easy: Vec<SubtypeId> = SubtypeId::with_difficulty(Difficulty::Easy).take(10).collect();
    ensure!(easy.len() == 10, "only {} easy subtypes", easy.len());
    let cfg = EpisodeConfig::new(false, true);
    let mut max_dispatch = 0;
    for (i, subtype) in easy.iter().enumerate() {
        let c = generate(*subtype, GenSeed(1000 + i as u64));
        let ep = run_episode(&oracle_agent(), &c, Some(&server), &cfg, 0, &format!("e2e-{i}")).map_err(|e| e.to_string())?;
        ensure!(ep.success, "{} failed: {:?}", c.id, ep.stop);
        ensure!(ep.reward.total == Tenths(16), "{} reward {}", c.id, ep.reward.total);
        ensure!(ep.dispatched <= 4, "{} dispatched {}", c.id, ep.dispatched);
        max_dispatch = max_dispatch.max(ep.dispatched);
    }
    Ok(format!("10/10 easy challenges solved at reward 1.6, at most {max_dispatch} dispatch per episode"))
}

fn main() {
    // Honour `cargo test -- <filter>` loosely: a filter that names none of
    // our criteria skips the whole target.
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("oracle round-trip", oracle_round_trip),
        ("reward arithmetic", reward_arithmetic),
        ("metrics definitions", metrics_definitions),
        ("difficulty constraint", difficulty_constraint),
        ("dataset scale", dataset_scale),
        ("sandbox survivability", sandbox_survivability),
        ("strict tool-call grammar", strict_grammar),
        ("end-to-end mock episode", end_to_end_mock),
    ];
    let selected: Vec<_> =
        criteria.iter().filter(|(name, _)| filter.is_empty() || filter.iter().any(|f| name.contains(f.as_str()))).collect();
    if std::env::args().any(|a| a == "--list") {
        for (name, _) in &selected {
            println!("{name}: test");
        }
        return;
    }
    let mut failed = 0;
    for (name, check) in &selected {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", selected.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
