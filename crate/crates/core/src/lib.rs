//! Procedurally generated cryptography CTF challenges with reference
//! solvers, transcript parsing and reward scoring.

pub mod challenge;
pub mod dataset;
pub mod flag;
pub mod genlib;
pub mod narrative;
pub mod primitives;
pub mod scoring;
pub mod solvers;
pub mod taxonomy;
pub mod transcript;

pub use challenge::{Challenge, PublicChallenge};
pub use flag::{render_flag, validate_flag_format, Flag};
pub use genlib::{generate, GenSeed};
pub use scoring::{RewardBreakdown, Tenths};
pub use solvers::{solve, SolveOutcome};
pub use taxonomy::{Archetype, Difficulty, SubtypeId};
pub use transcript::{Message, Role, ToolCall};
