use std::collections::BTreeMap;
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use randcrypto_core::dataset::{build_splits, read_jsonl, validate_dataset, write_jsonl, DatasetManifest};
use randcrypto_core::genlib::generate_with;
use randcrypto_core::narrative::StoryMode;
use randcrypto_core::scoring::{aggregate_report, final_answer, score_transcript};
use randcrypto_core::transcript::read_transcript;
use randcrypto_core::{Challenge, Difficulty, GenSeed};
use randcrypto_evalharness::oracle::solver_stub_factory;
use randcrypto_evalharness::{evaluate_dataset, run_sweep, AgentSpec, ChatApiAgent, EpisodeConfig, EpisodeRecord};
use randcrypto_toolserver::{serve_stdio, serve_tcp, Allowlist, ServerConfig, TcpClient, ToolDispatch, ToolServer};

#[derive(Parser)]
#[command(name = "randcrypto", version, about = "Procedural crypto CTF challenges, scoring and a sandboxed tool server")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate train and test splits as JSONL.
    Generate(GenerateArgs),
    /// Re-solve every record of a dataset with the reference solvers.
    Validate(ValidateArgs),
    /// Re-score archived episode transcripts against a dataset.
    Score(ScoreArgs),
    /// Run an agent over a dataset, k samples per challenge.
    Eval(EvalArgs),
    /// Serve the execution tools over NDJSON.
    ServeTools(ServeArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 5000)]
    train: usize,
    #[arg(long, default_value_t = 50)]
    test: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_parser = parse_difficulty)]
    difficulty: Option<Difficulty>,
    #[arg(long)]
    out: PathBuf,
    /// Agent config (external_chat_api) used to write stories instead of templates.
    #[arg(long)]
    story_agent: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    file: PathBuf,
    /// Write the full per-record report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ScoreArgs {
    /// Eval output directory (episodes.jsonl plus transcripts/), or a bare transcript directory.
    #[arg(long)]
    transcripts: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    agent: PathBuf,
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long)]
    with_hints: bool,
    #[arg(long)]
    with_tools: bool,
    /// HOST:PORT of a running tool server, `local` for in-process jailed
    /// interpreters, or `stub` for the in-process reference-solver stub.
    #[arg(long)]
    tool_server: Option<String>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 4)]
    max_tool_loops: u32,
    #[arg(long)]
    max_tokens: Option<u32>,
    #[arg(long, default_value_t = 4)]
    parallelism: usize,
    /// Run all four hint × tools conditions.
    #[arg(long)]
    sweep: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, conflicts_with = "stdio")]
    listen: Option<String>,
    #[arg(long)]
    stdio: bool,
    #[arg(long, default_value_t = 10)]
    timeout_s: u64,
    #[arg(long, default_value_t = 512)]
    mem_mib: u64,
    #[arg(long, default_value_t = 64)]
    max_output_kib: usize,
    /// Tool calls per session; 0 disables the budget.
    #[arg(long, default_value_t = 4)]
    call_budget: u32,
    #[arg(long)]
    allowlist: Option<PathBuf>,
    #[arg(long)]
    allow_network: bool,
    #[arg(long, default_value = "python3")]
    python: String,
}

fn parse_difficulty(s: &str) -> Result<Difficulty, String> {
    Difficulty::ALL
        .into_iter()
        .find(|d| d.as_str().eq_ignore_ascii_case(s))
        .ok_or_else(|| format!("expected easy, medium or hard, got {s:?}"))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n").with_context(|| format!("writing {}", path.display()))
}

fn materialize(manifest: &DatasetManifest, story: Option<&ChatApiAgent>) -> Vec<Challenge> {
    match story {
        None => manifest.materialize(),
        Some(agent) => {
            let mode = StoryMode::External(agent);
            manifest.entries.iter().map(|e| generate_with(e.subtype, e.seed, &mode)).collect()
        }
    }
}

fn generate(args: GenerateArgs) -> Result<ExitCode> {
    let start = Instant::now();
    let story = match &args.story_agent {
        None => None,
        Some(path) => match AgentSpec::load(path)? {
            AgentSpec::ExternalChatApi(cfg) => Some(ChatApiAgent::new(cfg)?),
            _ => bail!("--story-agent needs an external_chat_api config"),
        },
    };
    fs::create_dir_all(&args.out)?;
    let (train, test) = build_splits(args.train, args.test, GenSeed(args.seed), args.difficulty)?;
    for manifest in [&train, &test] {
        let split = manifest.split.as_str();
        let challenges = materialize(manifest, story.as_ref());
        write_jsonl(&challenges, &args.out.join(format!("{split}.jsonl")), true)?;
        write_jsonl(&challenges, &args.out.join(format!("{split}.public.jsonl")), false)?;
        write_json(&args.out.join(format!("{split}.manifest.json")), manifest)?;
        println!("{split}: {} challenges, seeds {:?}", challenges.len(), manifest.seed_range());
    }
    println!("wrote {} in {:.1}s", args.out.display(), start.elapsed().as_secs_f64());
    Ok(ExitCode::SUCCESS)
}

fn validate(args: ValidateArgs) -> Result<ExitCode> {
    let report = validate_dataset(&args.file)?;
    for failure in report.failures() {
        println!("FAIL {}: {}", failure.id, failure.error.as_deref().unwrap_or(""));
    }
    for (subtype, tally) in &report.per_subtype {
        if tally.passed != tally.total {
            println!("{subtype}: {}/{}", tally.passed, tally.total);
        }
    }
    println!("{}/{} records validated", report.passed(), report.results.len());
    if let Some(path) = &args.report {
        write_json(path, &report)?;
    }
    Ok(if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

/// `<id>__s<sample>.jsonl` back into its parts.
fn parse_transcript_name(name: &str) -> Option<(String, usize)> {
    let stem = name.strip_suffix(".jsonl")?;
    let (id, sample) = stem.rsplit_once("__s")?;
    Some((id.to_string(), sample.parse().ok()?))
}

fn score(args: ScoreArgs) -> Result<ExitCode> {
    let dataset: BTreeMap<String, Challenge> =
        read_jsonl(&args.dataset)?.into_iter().map(|c| (c.id.clone(), c)).collect();
    let mut outcomes: BTreeMap<String, Vec<bool>> = dataset.keys().map(|id| (id.clone(), vec![false; args.k])).collect();
    let mut mismatched = 0usize;
    let episodes_file = args.transcripts.join("episodes.jsonl");
    let entries: Vec<(String, usize, PathBuf, Option<EpisodeRecord>)> = if episodes_file.exists() {
        let text = fs::read_to_string(&episodes_file)?;
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let rec: EpisodeRecord =
                serde_json::from_str(line).with_context(|| format!("{}:{}", episodes_file.display(), i + 1))?;
            rows.push((rec.challenge_id.clone(), rec.sample, args.transcripts.join(&rec.transcript), Some(rec)));
        }
        rows
    } else {
        let mut rows = Vec::new();
        for entry in fs::read_dir(&args.transcripts)? {
            let path = entry?.path();
            if let Some((id, sample)) = path.file_name().and_then(|n| n.to_str()).and_then(parse_transcript_name) {
                rows.push((id, sample, path, None));
            }
        }
        rows
    };
    for (id, sample, path, record) in entries {
        let Some(challenge) = dataset.get(&id) else {
            bail!("transcript {} names unknown challenge {id}", path.display());
        };
        if sample >= args.k {
            bail!("transcript {} has sample {sample} but k = {}", path.display(), args.k);
        }
        let messages = read_transcript(&path)?;
        outcomes.get_mut(&id).expect("seeded from dataset")[sample] =
            final_answer(&messages).as_ref() == Some(&challenge.expected_flag);
        if let Some(rec) = record {
            let reward = score_transcript(&messages, &challenge.expected_flag, &rec.execution_results)?;
            if reward != rec.reward {
                mismatched += 1;
                println!("reward mismatch for {id} sample {sample}: archived {} rescored {}", rec.reward.total, reward.total);
            }
        }
    }
    let report = aggregate_report(&outcomes, args.k)?;
    println!(
        "Pass@{k} = {:.3} ({}/{}), Maj@{k} = {:.3} ({}/{})",
        report.pass_at_k,
        report.pass_count,
        outcomes.len(),
        report.maj_at_k,
        report.maj_count,
        outcomes.len(),
        k = args.k
    );
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    Ok(if mismatched == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn tool_endpoint(spec: &str) -> Result<Box<dyn ToolDispatch>> {
    Ok(match spec {
        "stub" => Box::new(ToolServer::new(ServerConfig::default(), Box::new(solver_stub_factory()))),
        "local" => Box::new(ToolServer::subprocess(ServerConfig::default())),
        addr => Box::new(TcpClient::new(addr, Duration::from_secs(120)).with_context(|| format!("tool server {addr}"))?),
    })
}

fn eval(args: EvalArgs) -> Result<ExitCode> {
    let dataset = read_jsonl(&args.dataset)?;
    let agent = AgentSpec::load(&args.agent)?.build()?;
    fs::create_dir_all(&args.out)?;
    if args.sweep {
        let spec = args.tool_server.as_deref().context("--sweep needs --tool-server for the tool conditions")?;
        let tools = tool_endpoint(spec)?;
        let reports = run_sweep(agent.as_ref(), &dataset, tools.as_ref(), args.k, args.parallelism, args.max_tool_loops, Some(&args.out))?;
        for (condition, r) in &reports {
            println!("{condition}: Pass@{} = {:.3}, Maj@{} = {:.3}", r.k, r.pass_at_k, r.k, r.maj_at_k);
        }
        return Ok(ExitCode::SUCCESS);
    }
    let mut cfg = EpisodeConfig::new(args.with_hints, args.with_tools);
    cfg.max_tool_loops = args.max_tool_loops;
    if let Some(t) = args.max_tokens {
        cfg.max_tokens = t;
    }
    let tools = match (args.with_tools, args.tool_server.as_deref()) {
        (true, Some(spec)) => Some(tool_endpoint(spec)?),
        (true, None) => bail!("--with-tools needs --tool-server"),
        (false, Some(_)) => bail!("--tool-server given without --with-tools"),
        (false, None) => None,
    };
    let run = evaluate_dataset(agent.as_ref(), &dataset, &cfg, tools.as_deref(), args.k, args.parallelism, Some(&args.out))?;
    let errors = run.episodes.iter().filter(|e| e.error.is_some()).count();
    println!(
        "{}: Pass@{k} = {:.3}, Maj@{k} = {:.3} over {} challenges ({errors} episode errors)",
        run.condition,
        run.report.pass_at_k,
        run.report.maj_at_k,
        dataset.len(),
        k = args.k
    );
    Ok(ExitCode::SUCCESS)
}

fn serve(args: ServeArgs) -> Result<ExitCode> {
    let mut cfg = ServerConfig::default();
    cfg.limits.timeout = Duration::from_secs(args.timeout_s);
    cfg.limits.memory_bytes = args.mem_mib * 1024 * 1024;
    cfg.limits.max_output_bytes = args.max_output_kib * 1024;
    cfg.limits.call_budget = (args.call_budget > 0).then_some(args.call_budget);
    cfg.limits.allow_network = args.allow_network;
    cfg.allowlist = Allowlist::resolve(args.allowlist.as_deref()).context("loading allowlist")?;
    cfg.python = args.python;
    let server = Arc::new(ToolServer::subprocess(cfg));
    if args.stdio {
        serve_stdio(&server)?;
        return Ok(ExitCode::SUCCESS);
    }
    let listen = args.listen.unwrap_or_else(|| "127.0.0.1:7878".into());
    let listener = std::net::TcpListener::bind(&listen).with_context(|| format!("binding {listen}"))?;
    let addr: SocketAddr = listener.local_addr()?;
    eprintln!("serving tools on {addr}");
    serve_tcp(server, listener)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Validate(a) => validate(a),
        Command::Score(a) => score(a),
        Command::Eval(a) => eval(a),
        Command::ServeTools(a) => serve(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
