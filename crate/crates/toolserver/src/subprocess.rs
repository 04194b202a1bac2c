//! Jailed Python interpreter per session.

use std::collections::BTreeMap;
use std::io::{self, PipeWriter, Read, Write};
use std::os::fd::AsRawFd;
use std::os::unix::process::{CommandExt, ExitStatusExt};
use std::process::{Child, Command, ExitStatus, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use serde_json::{json, Value};

use crate::config::ServerConfig;
use crate::executor::{truncate_output, ExecError, ExecutionResult, Executor, ExecutorFactory, KillReason};

const SHIM: &str = include_str!("../shim/shim.py");
const STARTUP_TIMEOUT: Duration = Duration::from_secs(20);
const CONTROL_TIMEOUT: Duration = Duration::from_secs(5);
const FILE_SIZE_LIMIT: u64 = 16 * 1024 * 1024;
const OPEN_FILES_LIMIT: u64 = 256;

enum Frame {
    Reply(Value),
    Oversize,
    Closed,
}

enum Failure {
    Timeout,
    Oversize,
    Exited(Option<ExitStatus>),
}

struct Runtime {
    child: Child,
    requests: PipeWriter,
    replies: Receiver<Frame>,
}

impl Runtime {
    fn kill(mut self) -> Option<ExitStatus> {
        let pid = self.child.id() as libc::pid_t;
        unsafe {
            libc::killpg(pid, libc::SIGKILL);
        }
        self.child.wait().ok()
    }
}

fn read_frames(mut pipe: impl Read, cap: usize, tx: mpsc::Sender<Frame>) {
    loop {
        let mut head = [0u8; 4];
        if pipe.read_exact(&mut head).is_err() {
            let _ = tx.send(Frame::Closed);
            return;
        }
        let len = u32::from_be_bytes(head) as usize;
        if len > cap {
            let _ = tx.send(Frame::Oversize);
            return;
        }
        let mut body = vec![0u8; len];
        if pipe.read_exact(&mut body).is_err() {
            let _ = tx.send(Frame::Closed);
            return;
        }
        let frame = serde_json::from_slice(&body).map(Frame::Reply).unwrap_or(Frame::Closed);
        if tx.send(frame).is_err() {
            return;
        }
    }
}

fn set_limit(resource: libc::__rlimit_resource_t, value: u64) -> io::Result<()> {
    let lim = libc::rlimit { rlim_cur: value, rlim_max: value };
    if unsafe { libc::setrlimit(resource, &lim) } != 0 {
        return Err(io::Error::last_os_error());
    }
    Ok(())
}

/// Moves `fd` onto `target` with close-on-exec cleared.
fn place_fd(fd: i32, target: i32) -> io::Result<()> {
    if fd == target {
        let flags = unsafe { libc::fcntl(fd, libc::F_GETFD) };
        if flags < 0 || unsafe { libc::fcntl(fd, libc::F_SETFD, flags & !libc::FD_CLOEXEC) } < 0 {
            return Err(io::Error::last_os_error());
        }
    } else if unsafe { libc::dup2(fd, target) } < 0 {
        return Err(io::Error::last_os_error());
    }
    Ok(())
}

fn spawn_runtime(cfg: &ServerConfig, site: &std::path::Path) -> io::Result<Runtime> {
    let (req_r, req_w) = io::pipe()?;
    let (resp_r, resp_w) = io::pipe()?;
    let (req_fd, resp_fd) = (req_r.as_raw_fd(), resp_w.as_raw_fd());
    let limits = cfg.limits.clone();
    let cpu = limits.timeout.as_secs().max(1) * u64::from(limits.call_budget.unwrap_or(64).max(1)) * 2 + 10;

    let mut cmd = Command::new(&cfg.python);
    cmd.args(["-I", "-u", "-c", SHIM])
        .env_clear()
        .env("PATH", "/usr/local/bin:/usr/bin:/bin")
        .env("HOME", site)
        .env("RANDCRYPTO_SHIM_SITE", site)
        .env("RANDCRYPTO_SHIM_OUTPUT", limits.max_output_bytes.to_string())
        .current_dir(site)
        .stdin(Stdio::null())
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .process_group(0);
    unsafe {
        cmd.pre_exec(move || {
            // Park both ends above the target slots first so neither dup2 clobbers the other.
            let high_req = libc::fcntl(req_fd, libc::F_DUPFD_CLOEXEC, 10);
            let high_resp = libc::fcntl(resp_fd, libc::F_DUPFD_CLOEXEC, 10);
            if high_req < 0 || high_resp < 0 {
                return Err(io::Error::last_os_error());
            }
            place_fd(high_req, 3)?;
            place_fd(high_resp, 4)?;
            set_limit(libc::RLIMIT_AS, limits.memory_bytes)?;
            set_limit(libc::RLIMIT_CPU, cpu)?;
            set_limit(libc::RLIMIT_FSIZE, FILE_SIZE_LIMIT)?;
            set_limit(libc::RLIMIT_CORE, 0)?;
            set_limit(libc::RLIMIT_NOFILE, OPEN_FILES_LIMIT)?;
            if !limits.allow_network
                && libc::unshare(libc::CLONE_NEWNET) != 0
                && libc::unshare(libc::CLONE_NEWUSER | libc::CLONE_NEWNET) != 0
            {
                return Err(io::Error::last_os_error());
            }
            Ok(())
        });
    }
    let child = cmd.spawn()?;
    drop(req_r);
    drop(resp_w);

    let (tx, rx) = mpsc::channel();
    let cap = limits.max_output_bytes.saturating_mul(8).saturating_add(1 << 20);
    thread::Builder::new().name("shim-reader".into()).spawn(move || read_frames(resp_r, cap, tx))?;
    let rt = Runtime { child, requests: req_w, replies: rx };
    match rt.replies.recv_timeout(STARTUP_TIMEOUT) {
        Ok(Frame::Reply(v)) if v.get("ready") == Some(&Value::Bool(true)) => Ok(rt),
        _ => {
            let status = rt.kill();
            Err(io::Error::other(format!("interpreter failed to start ({status:?})")))
        }
    }
}

fn send_frame(w: &mut PipeWriter, value: &Value) -> io::Result<()> {
    let body = serde_json::to_vec(value).map_err(io::Error::other)?;
    let mut buf = Vec::with_capacity(body.len() + 4);
    buf.extend_from_slice(&(body.len() as u32).to_be_bytes());
    buf.extend_from_slice(&body);
    w.write_all(&buf)
}

/// A Python subprocess under rlimits in its own process group and,
/// unless networking is allowed, its own network namespace.
pub struct SubprocessExecutor {
    cfg: Arc<ServerConfig>,
    site: tempfile::TempDir,
    runtime: Option<Runtime>,
}

impl SubprocessExecutor {
    pub fn spawn(cfg: Arc<ServerConfig>) -> Result<SubprocessExecutor, ExecError> {
        let site = tempfile::Builder::new().prefix("randcrypto-session-").tempdir()?;
        let runtime = spawn_runtime(&cfg, site.path()).map_err(|e| ExecError::Dead(e.to_string()))?;
        Ok(SubprocessExecutor { cfg, site, runtime: Some(runtime) })
    }

    /// Process id of the current interpreter.
    pub fn pid(&self) -> Option<u32> {
        self.runtime.as_ref().map(|r| r.child.id())
    }

    fn ensure_runtime(&mut self) -> Result<&mut Runtime, ExecError> {
        let exited = match self.runtime.as_mut() {
            Some(rt) => !matches!(rt.child.try_wait(), Ok(None)),
            None => true,
        };
        if exited {
            if let Some(rt) = self.runtime.take() {
                rt.kill();
            }
            let rt = spawn_runtime(&self.cfg, self.site.path()).map_err(|e| ExecError::Dead(e.to_string()))?;
            self.runtime = Some(rt);
        }
        Ok(self.runtime.as_mut().expect("runtime just ensured"))
    }

    fn request(&mut self, req: &Value, timeout: Duration) -> Result<Result<Value, Failure>, ExecError> {
        let rt = self.ensure_runtime()?;
        if send_frame(&mut rt.requests, req).is_err() {
            let status = self.runtime.take().and_then(Runtime::kill);
            return Ok(Err(Failure::Exited(status)));
        }
        let rt = self.runtime.as_mut().expect("runtime present");
        let failure = match rt.replies.recv_timeout(timeout) {
            Ok(Frame::Reply(v)) => return Ok(Ok(v)),
            Ok(Frame::Oversize) => Failure::Oversize,
            Ok(Frame::Closed) | Err(RecvTimeoutError::Disconnected) => Failure::Exited(None),
            Err(RecvTimeoutError::Timeout) => Failure::Timeout,
        };
        let status = self.runtime.take().and_then(Runtime::kill);
        Ok(Err(match failure {
            Failure::Exited(_) => Failure::Exited(status),
            other => other,
        }))
    }

    /// Starts a replacement after a kill; failure leaves the session dead.
    fn respawn(&mut self) -> Result<(), ExecError> {
        self.ensure_runtime().map(|_| ())
    }
}

fn crash_reason(status: Option<ExitStatus>) -> Option<KillReason> {
    match status?.signal()? {
        libc::SIGXCPU => Some(KillReason::Timeout),
        libc::SIGXFSZ => Some(KillReason::Output),
        libc::SIGKILL | libc::SIGSEGV | libc::SIGABRT | libc::SIGBUS => Some(KillReason::Memory),
        _ => None,
    }
}

impl Executor for SubprocessExecutor {
    fn execute(&mut self, code: &str, reset: bool) -> Result<ExecutionResult, ExecError> {
        let start = Instant::now();
        let limits = self.cfg.limits.clone();
        let reply = self.request(&json!({"op": "exec", "code": code, "reset": reset}), limits.timeout)?;
        let ms = start.elapsed().as_millis() as u64;
        let restarted = "; interpreter restarted and namespace cleared";
        match reply {
            Ok(v) => {
                let mut stdout = v.get("stdout").and_then(Value::as_str).unwrap_or("").to_string();
                truncate_output(&mut stdout, limits.max_output_bytes);
                if v.get("truncated") == Some(&Value::Bool(true)) && !stdout.ends_with(crate::TRUNCATION_MARKER) {
                    stdout.push_str(crate::TRUNCATION_MARKER);
                }
                let error = v.get("error").and_then(Value::as_str).map(str::to_string);
                let kind = match v.get("kind").and_then(Value::as_str) {
                    Some("memory") => Some(KillReason::Memory),
                    Some("output") => Some(KillReason::Output),
                    _ => None,
                };
                Ok(match (kind, error) {
                    (Some(k), e) => ExecutionResult::killed(k, stdout, e.unwrap_or_default(), ms),
                    (None, Some(e)) => ExecutionResult::failure(stdout, e, ms),
                    (None, None) => ExecutionResult::success(stdout, ms),
                })
            }
            Err(Failure::Timeout) => {
                self.respawn()?;
                let msg = format!("execution exceeded {}s wall clock{restarted}", limits.timeout.as_secs_f64());
                Ok(ExecutionResult::killed(KillReason::Timeout, String::new(), msg, ms))
            }
            Err(Failure::Oversize) => {
                self.respawn()?;
                Ok(ExecutionResult::killed(KillReason::Output, String::new(), format!("output limit exceeded{restarted}"), ms))
            }
            Err(Failure::Exited(status)) => {
                self.respawn()?;
                let desc = status.map_or("unknown status".to_string(), |s| s.to_string());
                let msg = format!("interpreter terminated ({desc}){restarted}");
                Ok(match crash_reason(status) {
                    Some(k) => ExecutionResult::killed(k, String::new(), msg, ms),
                    None => ExecutionResult::failure(String::new(), msg, ms),
                })
            }
        }
    }

    fn list_variables(&mut self) -> Result<BTreeMap<String, String>, ExecError> {
        match self.request(&json!({"op": "list_vars"}), CONTROL_TIMEOUT)? {
            Ok(v) => Ok(serde_json::from_value(v.get("vars").cloned().unwrap_or(Value::Null)).unwrap_or_default()),
            Err(_) => {
                self.respawn()?;
                Ok(BTreeMap::new())
            }
        }
    }

    fn install(&mut self, package: &str) -> Result<String, String> {
        let target = self.site.path().to_string_lossy().to_string();
        let argv: Vec<String> =
            self.cfg.installer.iter().map(|a| a.replace("{target}", &target).replace("{package}", package)).collect();
        let (program, args) = argv.split_first().ok_or("no installer configured")?;
        let log = tempfile::tempfile().map_err(|e| e.to_string())?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::null())
            .stdout(log.try_clone().map_err(|e| e.to_string())?)
            .stderr(log.try_clone().map_err(|e| e.to_string())?)
            .spawn()
            .map_err(|e| format!("installer failed to start: {e}"))?;
        let deadline = Instant::now() + self.cfg.install_timeout;
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) if Instant::now() < deadline => thread::sleep(Duration::from_millis(50)),
                Ok(None) => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err("installer timed out".into());
                }
                Err(e) => return Err(e.to_string()),
            }
        };
        let mut text = String::new();
        let mut log = log;
        use std::io::Seek;
        let _ = log.rewind();
        let _ = log.take(16 * 1024).read_to_string(&mut text);
        if status.success() {
            Ok(text)
        } else {
            Err(format!("installer exited with {status}: {}", text.trim()))
        }
    }

    fn restart(&mut self) -> Result<(), ExecError> {
        if let Some(rt) = self.runtime.take() {
            rt.kill();
        }
        self.respawn()
    }

    fn is_alive(&mut self) -> bool {
        matches!(self.runtime.as_mut().map(|rt| rt.child.try_wait()), Some(Ok(None)))
    }
}

impl Drop for SubprocessExecutor {
    fn drop(&mut self) {
        if let Some(rt) = self.runtime.take() {
            rt.kill();
        }
    }
}

pub struct SubprocessFactory {
    cfg: Arc<ServerConfig>,
}

impl SubprocessFactory {
    pub fn new(cfg: Arc<ServerConfig>) -> SubprocessFactory {
        SubprocessFactory { cfg }
    }
}

impl ExecutorFactory for SubprocessFactory {
    fn spawn(&self, _session: &str) -> Result<Box<dyn Executor>, ExecError> {
        Ok(Box::new(SubprocessExecutor::spawn(self.cfg.clone())?))
    }
}
