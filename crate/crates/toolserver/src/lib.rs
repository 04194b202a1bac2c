//! Stateful code-execution tool service: per-session jailed interpreters,
//! call budgets, a package allowlist and an NDJSON transport.

pub mod config;
pub mod executor;
pub mod server;
pub mod subprocess;
pub mod wire;

pub use config::{Allowlist, Limits, ServerConfig};
pub use executor::{
    ExecError, ExecutionResult, Executor, ExecutorFactory, KillReason, StubExecutor, StubFactory, TRUNCATION_MARKER,
};
pub use server::{InstallResult, InstallStatus, SessionInfo, ToolError, ToolOutput, ToolServer};
pub use subprocess::{SubprocessExecutor, SubprocessFactory};
pub use wire::{serve_stdio, serve_tcp, spawn_tcp, TcpClient, ToolDispatch, TransportError};
