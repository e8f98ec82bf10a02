//! Semantics workbench for an imperative language with cooperative threads.
//!
//! The language has `skip`, assignment, sequencing, conditionals, loops, and
//! three thread primitives: `async { C }` spawns a thread, `yield` hands
//! control to the scheduler, and `block` halts the whole program. Commands are
//! given two semantics:
//!
//! * a small-step abstract machine over states `(store, pool, active)`
//!   ([`opsem`]), and
//! * a denotational semantics mapping each command to a finite, prefix-closed
//!   set of transition sequences over a configured finite store space
//!   ([`denot`]).
//!
//! The two are cross-validated by an adequacy harness ([`harness`]), and the
//! algebraic operations underlying the denotational model (update, lookup,
//! suspension, left/right shuffles, halt) come with a law checker
//! ([`algebra`]).

pub mod algebra;
pub mod config;
pub mod denot;
pub mod harness;
pub mod lang;
pub mod opsem;
pub mod store;
pub mod traces;

pub use config::{ExtFlags, RunConfig};
pub use denot::{Denoter, Kind, TraceSet};
pub use lang::{BoolExp, Command, Context, NumExp};
pub use store::{Config, Store, VarId};
pub use traces::{Run, TraceSeq, Transition};
