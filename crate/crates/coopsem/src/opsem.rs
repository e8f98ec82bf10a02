//! The abstract machine and the brute-force operational oracles.
//!
//! States are `(store, pool, active)`. Active transitions rewrite the active
//! command and are deterministic except for the gated binary-choice
//! extension; the choice transition picks the next active command from the
//! pool when the active command is `skip`.
//!
//! The trace oracle enumerates every pure sequence realizable as a chain of
//! segments: each segment runs active steps from an arbitrary start store
//! (the environment may change the store between segments) and ends either
//! in a choice step or, for the final segment, at an active `skip`, with the
//! completion marker recorded exactly when the pool is empty. The run oracle
//! chains segments with the store preserved instead.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use thiserror::Error;

use crate::lang::Command;
use crate::store::{all_stores, eval_bool, eval_num, update, Config, Store};
use crate::traces::{Run, TraceSeq, Transition};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OpsemError {
    #[error("no machine rule for `{0}`; the construct has denotational semantics only")]
    Unsupported(&'static str),
}

/// A machine configuration.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MachineState {
    pub store: Store,
    pub pool: Vec<Command>,
    pub active: Command,
}

/// Result of decomposing the active command along the left spine of `;`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Decomposition {
    /// The active command is exactly `skip`.
    TerminalSkip,
    /// The redex is `block`: abnormal termination.
    Blocked,
    /// An evaluation context (continuations, innermost first) and the redex.
    Redex(Vec<Command>, Command),
}

/// Peel the left spine of sequencing. `skip; C` is itself a redex.
pub fn decompose(c: &Command) -> Decomposition {
    let mut continuations = Vec::new();
    let mut cur = c;
    loop {
        match cur {
            Command::Seq(l, r) => {
                if matches!(**l, Command::Skip) {
                    continuations.reverse();
                    return Decomposition::Redex(
                        continuations,
                        Command::seq(Command::Skip, (**r).clone()),
                    );
                }
                continuations.push((**r).clone());
                cur = l;
            }
            Command::Skip => {
                debug_assert!(continuations.is_empty(), "skip under seq is its own redex");
                return Decomposition::TerminalSkip;
            }
            Command::Block => return Decomposition::Blocked,
            other => {
                continuations.reverse();
                return Decomposition::Redex(continuations, other.clone());
            }
        }
    }
}

/// Rebuild `E[c]` from the continuations produced by [`decompose`].
pub fn rebuild(continuations: &[Command], c: Command) -> Command {
    continuations
        .iter()
        .fold(c, |acc, k| Command::seq(acc, k.clone()))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StepKind {
    Active,
    Choice,
}

/// All successor states. Empty exactly on normal termination (`skip` with an
/// empty pool) and on abnormal termination (blocked active command).
pub fn step(state: &MachineState, cfg: &Config) -> Result<Vec<(MachineState, StepKind)>, OpsemError> {
    match decompose(&state.active) {
        Decomposition::TerminalSkip => {
            let mut out = Vec::new();
            for i in 0..state.pool.len() {
                let mut pool = state.pool.clone();
                let active = pool.remove(i);
                out.push((
                    MachineState { store: state.store.clone(), pool, active },
                    StepKind::Choice,
                ));
            }
            Ok(out)
        }
        Decomposition::Blocked => Ok(Vec::new()),
        Decomposition::Redex(ctx, redex) => {
            let mk = |store: Store, pool: Vec<Command>, active: Command| MachineState {
                store,
                pool,
                active,
            };
            let out = match redex {
                Command::Assign(x, e) => {
                    let n = eval_num(&state.store, &e, cfg);
                    vec![(
                        mk(
                            update(&state.store, x, n),
                            state.pool.clone(),
                            rebuild(&ctx, Command::Skip),
                        ),
                        StepKind::Active,
                    )]
                }
                Command::Seq(skip, c) => {
                    debug_assert!(matches!(*skip, Command::Skip));
                    vec![(
                        mk(state.store.clone(), state.pool.clone(), rebuild(&ctx, *c)),
                        StepKind::Active,
                    )]
                }
                Command::If(b, t, e) => {
                    let taken = if eval_bool(&state.store, &b, cfg) { t } else { e };
                    vec![(
                        mk(state.store.clone(), state.pool.clone(), rebuild(&ctx, *taken)),
                        StepKind::Active,
                    )]
                }
                Command::While(b, body) => {
                    let unfold = Command::If(
                        b.clone(),
                        Box::new(Command::seq(
                            (*body).clone(),
                            Command::While(b, body),
                        )),
                        Box::new(Command::Skip),
                    );
                    vec![(
                        mk(state.store.clone(), state.pool.clone(), rebuild(&ctx, unfold)),
                        StepKind::Active,
                    )]
                }
                Command::Async(body) => {
                    let mut pool = state.pool.clone();
                    pool.push(*body);
                    vec![(
                        mk(state.store.clone(), pool, rebuild(&ctx, Command::Skip)),
                        StepKind::Active,
                    )]
                }
                Command::Yield => {
                    let mut pool = state.pool.clone();
                    pool.push(rebuild(&ctx, Command::Skip));
                    vec![(
                        mk(state.store.clone(), pool, Command::Skip),
                        StepKind::Active,
                    )]
                }
                Command::RFork(body) => {
                    let mut pool = state.pool.clone();
                    pool.push(rebuild(&ctx, Command::Skip));
                    vec![(mk(state.store.clone(), pool, *body), StepKind::Active)]
                }
                Command::Choice(a, b) => vec![
                    (
                        mk(state.store.clone(), state.pool.clone(), rebuild(&ctx, *a)),
                        StepKind::Active,
                    ),
                    (
                        mk(state.store.clone(), state.pool.clone(), rebuild(&ctx, *b)),
                        StepKind::Active,
                    ),
                ],
                Command::Finish(_) => return Err(OpsemError::Unsupported("finish")),
                Command::Par(_, _) => return Err(OpsemError::Unsupported("||")),
                Command::Skip | Command::Block => unreachable!("handled by decompose"),
            };
            Ok(out)
        }
    }
}

fn contains_unsupported(c: &Command) -> Option<&'static str> {
    match c {
        Command::Finish(_) => Some("finish"),
        Command::Par(_, _) => Some("||"),
        Command::Skip | Command::Yield | Command::Block | Command::Assign(_, _) => None,
        Command::Seq(a, b) | Command::If(_, a, b) | Command::Choice(a, b) => {
            contains_unsupported(a).or_else(|| contains_unsupported(b))
        }
        Command::While(_, a) | Command::Async(a) | Command::RFork(a) => contains_unsupported(a),
    }
}

fn contains_choice(c: &Command) -> bool {
    match c {
        Command::Choice(_, _) => true,
        Command::Skip | Command::Yield | Command::Block | Command::Assign(_, _) => false,
        Command::Seq(a, b) | Command::If(_, a, b) | Command::Par(a, b) => {
            contains_choice(a) || contains_choice(b)
        }
        Command::While(_, a) | Command::Async(a) | Command::RFork(a) | Command::Finish(a) => {
            contains_choice(a)
        }
    }
}

/// Where an active run from one start state can end up: every reachable state
/// whose active command is `skip`.
struct ActiveClosure {
    skip_states: Vec<(Store, Vec<Command>)>,
    truncated: bool,
}

/// Follow active steps. Deterministic programs are walked with a cycle check
/// on `(store, active)`: the pool never influences active steps, so a repeat
/// means the walk is trapped and silent from there on. Programs containing
/// the binary-choice extension branch, and a step budget guards them.
fn active_closure(
    start: MachineState,
    cfg: &Config,
    deterministic: bool,
    budget: &mut u64,
) -> Result<ActiveClosure, OpsemError> {
    let mut skip_states = Vec::new();
    let mut truncated = false;
    let mut stack = vec![(start, Vec::<MachineState>::new())];
    while let Some((state, mut seen)) = stack.pop() {
        if matches!(decompose(&state.active), Decomposition::TerminalSkip) {
            skip_states.push((state.store, state.pool));
            continue;
        }
        if deterministic {
            // The pool never influences active steps, so a (store, active)
            // repeat means the walk is trapped in a silent loop.
            if seen
                .iter()
                .any(|k| k.store == state.store && k.active == state.active)
            {
                continue;
            }
        } else {
            // With branching, only a full-state repeat is provably a cycle;
            // deeper repeats of (store, active) are cut and reported.
            if seen.contains(&state) {
                continue;
            }
            let repeats = seen
                .iter()
                .filter(|k| k.store == state.store && k.active == state.active)
                .count();
            if repeats > 4 {
                truncated = true;
                continue;
            }
        }
        seen.push(state.clone());
        if *budget == 0 {
            truncated = true;
            continue;
        }
        *budget -= 1;
        let succs = step(&state, cfg)?;
        for (next, kind) in succs {
            debug_assert_eq!(kind, StepKind::Active);
            stack.push((next, seen.clone()));
        }
    }
    Ok(ActiveClosure { skip_states, truncated })
}

/// Outcome of a trace-oracle enumeration.
#[derive(Clone, Debug)]
pub struct TraceOracle {
    pub traces: BTreeSet<TraceSeq>,
    /// True when a step budget cut an active run; the result is then a
    /// potentially incomplete under-approximation, never silently wrong.
    pub truncated: bool,
}

/// Outcome of a run-oracle enumeration.
#[derive(Clone, Debug)]
pub struct RunOracle {
    pub runs: BTreeSet<Run>,
    pub truncated: bool,
}

struct Explorer<'a> {
    cfg: &'a Config,
    stores: Vec<Store>,
    deterministic: bool,
    budget: u64,
    truncated: bool,
    // segment results per (pool, active): for each start store, the skip
    // states reachable by active steps
    segments: HashMap<(Vec<Command>, Command), Rc<Vec<(Store, Store, Vec<Command>)>>>,
    trace_memo: HashMap<(Vec<Command>, Command, u32), Rc<BTreeSet<TraceSeq>>>,
    run_memo: HashMap<(Store, Vec<Command>, Command, u32), Rc<BTreeSet<Run>>>,
}

impl<'a> Explorer<'a> {
    fn new(cfg: &'a Config, deterministic: bool, budget: u64) -> Self {
        Explorer {
            cfg,
            stores: all_stores(cfg),
            deterministic,
            budget,
            truncated: false,
            segments: HashMap::new(),
            trace_memo: HashMap::new(),
            run_memo: HashMap::new(),
        }
    }

    /// All `(start, end, pool-at-skip)` triples for one thread activation.
    fn segment(&mut self, pool: &[Command], active: &Command) -> Result<Rc<Vec<(Store, Store, Vec<Command>)>>, OpsemError> {
        let key = (pool.to_vec(), active.clone());
        if let Some(hit) = self.segments.get(&key) {
            return Ok(hit.clone());
        }
        let mut out = Vec::new();
        for s in self.stores.clone() {
            let start = MachineState { store: s.clone(), pool: pool.to_vec(), active: active.clone() };
            let mut budget = self.budget;
            let closure = active_closure(start, self.cfg, self.deterministic, &mut budget)?;
            if closure.truncated {
                self.truncated = true;
            }
            for (end, pool_at_skip) in closure.skip_states {
                out.push((s.clone(), end, pool_at_skip));
            }
        }
        let rc = Rc::new(out);
        self.segments.insert(key, rc.clone());
        Ok(rc)
    }

    fn traces(&mut self, pool: &[Command], active: &Command, segs: u32) -> Result<Rc<BTreeSet<TraceSeq>>, OpsemError> {
        let key = (pool.to_vec(), active.clone(), segs);
        if let Some(hit) = self.trace_memo.get(&key) {
            return Ok(hit.clone());
        }
        let mut out = BTreeSet::new();
        out.insert(TraceSeq::empty());
        if segs > 0 {
            for (start, end, pool_at_skip) in self.segment(pool, active)?.iter().cloned() {
                let tr = Transition::plain(start, end);
                out.insert(TraceSeq::new(vec![tr.clone()], false));
                if pool_at_skip.is_empty() {
                    out.insert(TraceSeq::new(vec![tr.clone()], true));
                }
                for i in 0..pool_at_skip.len() {
                    let mut rest = pool_at_skip.clone();
                    let next = rest.remove(i);
                    for w in self.traces(&rest, &next, segs - 1)?.iter() {
                        if !w.is_empty() {
                            out.insert(w.prepend(tr.clone()));
                        }
                    }
                }
            }
        }
        let rc = Rc::new(out);
        self.trace_memo.insert(key, rc.clone());
        Ok(rc)
    }

    fn runs(&mut self, start: &Store, pool: &[Command], active: &Command, segs: u32) -> Result<Rc<BTreeSet<Run>>, OpsemError> {
        let key = (start.clone(), pool.to_vec(), active.clone(), segs);
        if let Some(hit) = self.run_memo.get(&key) {
            return Ok(hit.clone());
        }
        let mut out = BTreeSet::new();
        if segs > 0 {
            for (s, end, pool_at_skip) in self.segment(pool, active)?.iter().cloned() {
                if s != *start {
                    continue;
                }
                out.insert(Run { stores: vec![s.clone(), end.clone()], done: false });
                if pool_at_skip.is_empty() {
                    out.insert(Run { stores: vec![s.clone(), end.clone()], done: true });
                }
                for i in 0..pool_at_skip.len() {
                    let mut rest = pool_at_skip.clone();
                    let next = rest.remove(i);
                    for r in self.runs(&end, &rest, &next, segs - 1)?.iter() {
                        if r.stores.is_empty() {
                            continue;
                        }
                        let mut stores = Vec::with_capacity(r.stores.len() + 1);
                        stores.push(s.clone());
                        stores.extend(r.stores.iter().cloned());
                        out.insert(Run { stores, done: r.done });
                    }
                }
            }
        }
        let rc = Rc::new(out);
        self.run_memo.insert(key, rc.clone());
        Ok(rc)
    }
}

fn default_budget(cfg: &Config, pool: &[Command], active: &Command) -> u64 {
    let size: usize = pool.iter().map(|c| c.node_count()).sum::<usize>() + active.node_count();
    10 * cfg.num_stores() * size as u64
}

fn check_supported(pool: &[Command], active: &Command) -> Result<(), OpsemError> {
    for c in pool.iter().chain(std::iter::once(active)) {
        if let Some(name) = contains_unsupported(c) {
            return Err(OpsemError::Unsupported(name));
        }
    }
    Ok(())
}

/// Every pure sequence of at most `segments` transitions realizable from
/// `(pool, active)`, with environment store resets between segments.
pub fn exec_traces(
    pool: &[Command],
    active: &Command,
    cfg: &Config,
    segments: u32,
    budget: Option<u64>,
) -> Result<TraceOracle, OpsemError> {
    check_supported(pool, active)?;
    let deterministic =
        !contains_choice(active) && !pool.iter().any(contains_choice);
    let budget = budget.unwrap_or_else(|| default_budget(cfg, pool, active));
    let mut ex = Explorer::new(cfg, deterministic, budget);
    let traces = ex.traces(pool, active, segments)?.as_ref().clone();
    Ok(TraceOracle { traces, truncated: ex.truncated })
}

/// Every run with at most `segments` transitions realizable from
/// `(pool, active)`, the store carried across choice steps.
pub fn exec_runs(
    pool: &[Command],
    active: &Command,
    cfg: &Config,
    segments: u32,
    budget: Option<u64>,
) -> Result<RunOracle, OpsemError> {
    check_supported(pool, active)?;
    let deterministic =
        !contains_choice(active) && !pool.iter().any(contains_choice);
    let budget = budget.unwrap_or_else(|| default_budget(cfg, pool, active));
    let mut ex = Explorer::new(cfg, deterministic, budget);
    let mut runs = BTreeSet::new();
    runs.insert(Run::empty());
    for s in all_stores(cfg) {
        runs.extend(ex.runs(&s, pool, active, segments)?.iter().cloned());
    }
    Ok(RunOracle { runs, truncated: ex.truncated })
}
