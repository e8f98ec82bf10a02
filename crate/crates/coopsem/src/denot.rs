//! The denotational engine: finite, prefix-closed trace-set values and the
//! semantic clauses for every command form.
//!
//! A command denotes a prefix-closed set of main-thread sequences; a spawned
//! thread denotes the cleaned set; a thread pool denotes a shuffle of cleaned
//! sets. Loops are computed by iterating the truncated unfolding functional
//! to a fixed point, which is exact because truncation commutes with every
//! clause (all clauses are length-additive).

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};

use serde_json::Value as Json;
use thiserror::Error;

use crate::lang::{fill, BoolExp, Command, Context};
use crate::store::{all_stores, eval_bool, eval_num, update, Config};
use crate::traces::{
    clean_seq, close, is_prefix, is_prefix_closed, mark_seq, right_shuffle, run_of, shuffle,
    ParMemo, Run, TraceSeq, Transition,
};

/// Which invariants a set's elements obey.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Kind {
    /// Main-thread sequences: command denotations.
    Proc,
    /// Proper pure sequences: spawned-thread denotations.
    AProc,
    /// Pure sequences, completion-only allowed: thread-pool denotations.
    Pool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DenotError {
    #[error("loop unfolding exceeded the iteration cap {0}; this is a bug")]
    LoopCapExceeded(u64),
}

/// A finite, prefix-closed, kind-tagged set of sequences with an optional
/// length cap. Equality is set equality; the cap is bookkeeping.
#[derive(Clone, Debug)]
pub struct TraceSet {
    pub kind: Kind,
    pub elems: BTreeSet<TraceSeq>,
    pub bound: Option<u32>,
}

impl PartialEq for TraceSet {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.elems == other.elems
    }
}

impl Eq for TraceSet {}

impl TraceSet {
    pub fn new(kind: Kind, elems: BTreeSet<TraceSeq>, bound: Option<u32>) -> Self {
        TraceSet { kind, elems, bound }
    }

    /// The bottom element `{ε}` of the given kind.
    pub fn bottom(kind: Kind) -> Self {
        let mut elems = BTreeSet::new();
        elems.insert(TraceSeq::empty());
        TraceSet { kind, elems, bound: None }
    }

    pub fn from_generators<I: IntoIterator<Item = TraceSeq>>(kind: Kind, gens: I) -> Self {
        TraceSet { kind, elems: close(gens), bound: None }
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn contains(&self, s: &TraceSeq) -> bool {
        self.elems.contains(s)
    }

    pub fn is_subset(&self, other: &TraceSet) -> bool {
        self.elems.is_subset(&other.elems)
    }

    pub fn union(&self, other: &TraceSet) -> TraceSet {
        debug_assert_eq!(self.kind, other.kind);
        TraceSet {
            kind: self.kind,
            elems: self.elems.union(&other.elems).cloned().collect(),
            bound: None,
        }
    }

    /// Shortest, then lexicographically least element of `self \ other`.
    pub fn min_difference(&self, other: &TraceSet) -> Option<TraceSeq> {
        self.elems
            .difference(&other.elems)
            .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)))
            .cloned()
    }

    /// Check prefix-closure, non-emptiness, kind constraints, and the bound.
    pub fn validate(&self) -> Result<(), String> {
        if self.elems.is_empty() {
            return Err("set is empty".into());
        }
        if !self.elems.contains(&TraceSeq::empty()) {
            return Err("set lacks the empty sequence".into());
        }
        if !is_prefix_closed(&self.elems) {
            return Err("set is not prefix-closed".into());
        }
        for s in &self.elems {
            let ok = match self.kind {
                Kind::Proc => s.is_main_thread(),
                Kind::AProc => s.is_proper_pure(),
                Kind::Pool => s.is_pure(),
            };
            if !ok {
                return Err(format!("element {} violates kind {:?}", s.to_text(), self.kind));
            }
            if let Some(b) = self.bound {
                if s.len() as u32 > b {
                    return Err(format!("element {} exceeds bound {}", s.to_text(), b));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self, cfg: &Config) -> Json {
        Json::Array(self.elems.iter().map(|s| s.to_json(cfg)).collect())
    }

    /// Cardinalities per transition count.
    pub fn stats(&self) -> Json {
        let mut by_len: std::collections::BTreeMap<String, usize> = Default::default();
        for s in &self.elems {
            *by_len.entry(s.len().to_string()).or_default() += 1;
        }
        serde_json::json!({ "total": self.elems.len(), "by_len": by_len })
    }
}

/// `{u ∈ P : |u| ≤ limit}`; prefix-closure is preserved by length filtering.
pub fn truncate(p: &TraceSet, limit: u32) -> TraceSet {
    TraceSet {
        kind: p.kind,
        elems: p.elems.iter().filter(|s| s.len() as u32 <= limit).cloned().collect(),
        bound: Some(limit),
    }
}

/// The unit of composition: every store stutters through a returning,
/// completed step.
pub fn unit_proc(cfg: &Config) -> TraceSet {
    TraceSet::from_generators(
        Kind::Proc,
        all_stores(cfg)
            .into_iter()
            .map(|s| TraceSeq::new(vec![Transition::marked(s.clone(), s)], true)),
    )
}

/// Sequential composition. A returning transition of `p` merges with the
/// first transition of a `q` sequence starting at its post-store; the suffix
/// of `p` (its still-running spawned work) shuffles with the rest of `q`.
/// Sequences of `p` without a return survive unchanged.
pub fn compose(p: &TraceSet, q: &TraceSet) -> TraceSet {
    debug_assert_eq!(p.kind, Kind::Proc);
    debug_assert_eq!(q.kind, Kind::Proc);
    let mut out = BTreeSet::new();
    for u in &p.elems {
        match u.trs.iter().position(|t| t.ret) {
            None => {
                out.insert(u.clone());
            }
            Some(i) => {
                let prefix = &u.trs[..i];
                let ret_tr = &u.trs[i];
                let spawned = TraceSeq::new(u.trs[i + 1..].to_vec(), u.done);
                for v in &q.elems {
                    let Some(first) = v.trs.first() else { continue };
                    if first.pre != ret_tr.post {
                        continue;
                    }
                    let merged = Transition {
                        pre: ret_tr.pre.clone(),
                        post: first.post.clone(),
                        ret: first.ret,
                    };
                    for w in shuffle(&spawned, &v.tail()).expect("post-return suffix is pure") {
                        let mut trs = Vec::with_capacity(prefix.len() + 1 + w.trs.len());
                        trs.extend_from_slice(prefix);
                        trs.push(merged.clone());
                        trs.extend(w.trs.iter().cloned());
                        out.insert(TraceSeq::new(trs, w.done));
                    }
                }
            }
        }
    }
    TraceSet { kind: Kind::Proc, elems: out, bound: None }
}

/// Prefix every sequence with all possible stutters. Works on any kind.
pub fn delay(p: &TraceSet, cfg: &Config) -> TraceSet {
    let mut gens = Vec::new();
    for s in all_stores(cfg) {
        for u in &p.elems {
            gens.push(u.prepend(Transition::plain(s.clone(), s.clone())));
        }
    }
    TraceSet::from_generators(p.kind, gens)
}

/// Erase every return marker.
pub fn clean_set(p: &TraceSet) -> TraceSet {
    debug_assert_eq!(p.kind, Kind::Proc);
    TraceSet {
        kind: Kind::AProc,
        elems: p.elems.iter().map(clean_seq).collect(),
        bound: p.bound,
    }
}

/// Wrap a spawned-thread set as a command set: spawn, return immediately,
/// then the thread's work follows.
pub fn async_unary(q: &TraceSet, cfg: &Config) -> TraceSet {
    debug_assert!(matches!(q.kind, Kind::AProc));
    let mut gens = Vec::new();
    for s in all_stores(cfg) {
        for u in &q.elems {
            gens.push(u.prepend(Transition::marked(s.clone(), s.clone())));
        }
    }
    TraceSet::from_generators(Kind::Proc, gens)
}

/// Interleave a pool behind a command set; the command supplies the first
/// transition of every non-empty result.
pub fn async_binary(p: &TraceSet, q: &TraceSet) -> TraceSet {
    debug_assert!(matches!(p.kind, Kind::AProc | Kind::Pool));
    debug_assert_eq!(q.kind, Kind::Proc);
    let mut out = BTreeSet::new();
    for u in &p.elems {
        for v in &q.elems {
            out.extend(right_shuffle(u, v).expect("pool elements are pure"));
        }
    }
    TraceSet { kind: Kind::Proc, elems: close(out), bound: None }
}

/// Shuffle of two pure-kinded sets.
pub fn pool_shuffle(p: &TraceSet, q: &TraceSet) -> TraceSet {
    debug_assert!(matches!(p.kind, Kind::AProc | Kind::Pool));
    debug_assert!(matches!(q.kind, Kind::AProc | Kind::Pool));
    let mut out = BTreeSet::new();
    for u in &p.elems {
        for v in &q.elems {
            out.extend(shuffle(u, v).expect("pool elements are pure"));
        }
    }
    TraceSet { kind: Kind::Pool, elems: out, bound: None }
}

/// The unit pool `{ε, Done}`, the denotation of the empty thread pool.
pub fn pool_unit() -> TraceSet {
    let mut elems = BTreeSet::new();
    elems.insert(TraceSeq::empty());
    elems.insert(TraceSeq::done_only());
    TraceSet { kind: Kind::Pool, elems, bound: None }
}

/// Mark the completed maximal elements of the cleaned set and close under
/// prefixes: the command returns exactly when all spawned work is complete,
/// in the same transition that completes it.
pub fn finish_set(p: &TraceSet) -> TraceSet {
    let cleaned = clean_set(p);
    let maximal: Vec<&TraceSeq> = cleaned
        .elems
        .iter()
        .filter(|u| !cleaned.elems.iter().any(|v| v != *u && is_prefix(u, v)))
        .collect();
    TraceSet::from_generators(
        Kind::Proc,
        maximal
            .into_iter()
            .map(|u| mark_seq(u).expect("cleaned sets contain proper sequences")),
    )
}

/// Parallel composition of two command sets.
pub fn par_sets(p: &TraceSet, q: &TraceSet, memo: &mut ParMemo) -> TraceSet {
    debug_assert_eq!(p.kind, Kind::Proc);
    debug_assert_eq!(q.kind, Kind::Proc);
    let mut out = BTreeSet::new();
    for u in &p.elems {
        for v in &q.elems {
            out.extend(crate::traces::par_seqs(u, v, memo).iter().cloned());
        }
    }
    TraceSet { kind: Kind::Proc, elems: close(out), bound: None }
}

/// All runs generated by a set; return markers are erased by `run_of`.
pub fn runs_of(p: &TraceSet) -> BTreeSet<Run> {
    p.elems.iter().filter_map(run_of).collect()
}

/// Denotation engine for a fixed config and bound, with a structural cache so
/// shared subterms are computed once.
pub struct Denoter {
    cfg: Config,
    bound: u32,
    cache: RefCell<HashMap<Command, TraceSet>>,
    par_memo: RefCell<ParMemo>,
}

impl Denoter {
    pub fn new(cfg: &Config, bound: u32) -> Self {
        Denoter {
            cfg: cfg.clone(),
            bound,
            cache: RefCell::new(HashMap::new()),
            par_memo: RefCell::new(ParMemo::default()),
        }
    }

    pub fn config(&self) -> &Config {
        &self.cfg
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    fn trunc(&self, p: TraceSet) -> TraceSet {
        truncate(&p, self.bound)
    }

    /// The truncated denotation of a command.
    pub fn denote(&self, c: &Command) -> TraceSet {
        if let Some(hit) = self.cache.borrow().get(c) {
            return hit.clone();
        }
        let result = self.denote_raw(c);
        self.cache.borrow_mut().insert(c.clone(), result.clone());
        result
    }

    fn denote_raw(&self, c: &Command) -> TraceSet {
        match c {
            Command::Skip => self.trunc(unit_proc(&self.cfg)),
            Command::Block => TraceSet::bottom(Kind::Proc),
            Command::Yield => self.trunc(delay(&unit_proc(&self.cfg), &self.cfg)),
            Command::Assign(x, e) => {
                let gens = all_stores(&self.cfg).into_iter().map(|s| {
                    let n = eval_num(&s, e, &self.cfg);
                    TraceSeq::new(vec![Transition::marked(s.clone(), update(&s, *x, n))], true)
                });
                self.trunc(TraceSet::from_generators(Kind::Proc, gens))
            }
            Command::Seq(a, b) => {
                let pa = self.denote(a);
                let pb = self.denote(b);
                self.trunc(compose(&pa, &pb))
            }
            Command::If(b, t, e) => {
                let pt = self.denote(t);
                let pe = self.denote(e);
                self.if_clause(b, &pt, &pe)
            }
            Command::While(b, body) => {
                let pbody = self.denote(body);
                self.while_fixpoint(b, &pbody)
                    .expect("loop iteration cap is generous")
            }
            Command::Async(body) => {
                let p = self.denote(body);
                self.trunc(async_unary(&clean_set(&p), &self.cfg))
            }
            Command::Finish(body) => {
                let p = self.denote(body);
                self.trunc(finish_set(&p))
            }
            Command::Par(a, b) => {
                let pa = self.denote(a);
                let pb = self.denote(b);
                let r = par_sets(&pa, &pb, &mut self.par_memo.borrow_mut());
                self.trunc(r)
            }
            Command::Choice(a, b) => {
                let pa = self.denote(a);
                let pb = self.denote(b);
                self.trunc(pa.union(&pb))
            }
            Command::RFork(body) => {
                let p = self.denote(body);
                let r = crate::algebra::left_shuffle_set(&clean_set(&p), &unit_proc(&self.cfg));
                self.trunc(r)
            }
        }
    }

    fn if_clause(&self, b: &BoolExp, pt: &TraceSet, pe: &TraceSet) -> TraceSet {
        let mut elems = BTreeSet::new();
        elems.insert(TraceSeq::empty());
        for t in &pt.elems {
            if let Some(first) = t.first_store() {
                if eval_bool(first, b, &self.cfg) {
                    elems.insert(t.clone());
                }
            }
        }
        for t in &pe.elems {
            if let Some(first) = t.first_store() {
                if !eval_bool(first, b, &self.cfg) {
                    elems.insert(t.clone());
                }
            }
        }
        self.trunc(TraceSet { kind: Kind::Proc, elems, bound: None })
    }

    /// Kleene iteration of the truncated unfolding functional from bottom.
    /// The iterates are the truncated loop approximants, so equality of
    /// consecutive iterates is a fixed point of the truncated semantics.
    fn while_fixpoint(&self, b: &BoolExp, pbody: &TraceSet) -> Result<TraceSet, DenotError> {
        let unit = self.trunc(unit_proc(&self.cfg));
        let cap = self.loop_cap();
        let mut cur = TraceSet::bottom(Kind::Proc);
        for _ in 0..cap {
            let unrolled = self.trunc(compose(pbody, &cur));
            let next = self.if_clause(b, &unrolled, &unit);
            if next == cur {
                return Ok(cur);
            }
            cur = next;
        }
        Err(DenotError::LoopCapExceeded(cap))
    }

    // Strictly growing iterates are bounded by the number of bounded
    // sequences, overestimated cheaply here.
    fn loop_cap(&self) -> u64 {
        let stores = self.cfg.num_stores();
        let per_transition = 2u64.saturating_mul(stores.saturating_mul(stores));
        let mut total: u64 = 2;
        let mut level: u64 = 1;
        for _ in 0..self.bound {
            level = level.saturating_mul(per_transition);
            total = total.saturating_add(level.saturating_mul(2));
        }
        total.clamp(64, 100_000_000)
    }

    /// Denotation of a thread pool: the shuffle of the cleaned denotations,
    /// the unit pool when empty.
    pub fn denote_pool(&self, pool: &[Command]) -> TraceSet {
        let mut acc = pool_unit();
        for c in pool {
            let p = self.denote(c);
            let cleaned = clean_set(&p);
            acc = self.trunc(pool_shuffle(&acc, &cleaned));
        }
        self.trunc(acc)
    }

    /// Denotation of a machine configuration: the pool interleaved behind the
    /// active command.
    pub fn denote_state(&self, pool: &[Command], active: &Command) -> TraceSet {
        let t = self.denote_pool(pool);
        let c = self.denote(active);
        self.trunc(async_binary(&t, &c))
    }

    /// Clause-wise interpretation of a one-hole context applied to a set.
    pub fn denote_ctx(&self, ctx: &Context, hole: &TraceSet) -> TraceSet {
        match ctx {
            Context::Hole => hole.clone(),
            Context::SeqL(inner, d) => {
                let p = self.denote_ctx(inner, hole);
                self.trunc(compose(&p, &self.denote(d)))
            }
            Context::SeqR(d, inner) => {
                let q = self.denote_ctx(inner, hole);
                self.trunc(compose(&self.denote(d), &q))
            }
            Context::IfThen(b, inner, d) => {
                let pt = self.denote_ctx(inner, hole);
                self.if_clause(b, &pt, &self.denote(d))
            }
            Context::IfElse(b, d, inner) => {
                let pe = self.denote_ctx(inner, hole);
                self.if_clause(b, &self.denote(d), &pe)
            }
            Context::WhileBody(b, inner) => {
                let pbody = self.denote_ctx(inner, hole);
                self.while_fixpoint(b, &pbody)
                    .expect("loop iteration cap is generous")
            }
            Context::AsyncBody(inner) => {
                let p = self.denote_ctx(inner, hole);
                self.trunc(async_unary(&clean_set(&p), &self.cfg))
            }
            Context::FinishBody(inner) => {
                let p = self.denote_ctx(inner, hole);
                self.trunc(finish_set(&p))
            }
            Context::ParL(inner, d) => {
                let p = self.denote_ctx(inner, hole);
                let r = par_sets(&p, &self.denote(d), &mut self.par_memo.borrow_mut());
                self.trunc(r)
            }
            Context::ParR(d, inner) => {
                let q = self.denote_ctx(inner, hole);
                let r = par_sets(&self.denote(d), &q, &mut self.par_memo.borrow_mut());
                self.trunc(r)
            }
            Context::ChoiceL(inner, d) => {
                let p = self.denote_ctx(inner, hole);
                self.trunc(p.union(&self.denote(d)))
            }
            Context::ChoiceR(d, inner) => {
                let q = self.denote_ctx(inner, hole);
                self.trunc(self.denote(d).union(&q))
            }
            Context::RForkBody(inner) => {
                let p = self.denote_ctx(inner, hole);
                let r = crate::algebra::left_shuffle_set(&clean_set(&p), &unit_proc(&self.cfg));
                self.trunc(r)
            }
        }
    }
}

/// One-shot denotation without cache reuse across calls.
pub fn denote(c: &Command, cfg: &Config, bound: u32) -> TraceSet {
    Denoter::new(cfg, bound).denote(c)
}

/// Check `fill(ctx, c)` against the clause-wise context interpretation.
pub fn ctx_agrees(ctx: &Context, c: &Command, den: &Denoter) -> bool {
    let direct = den.denote(&fill(ctx, c));
    let via_ctx = den.denote_ctx(ctx, &den.denote(c));
    direct == via_ctx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::NumExp;
    use crate::store::{Store, VarId};

    fn cfg() -> Config {
        Config::single(2)
    }

    fn st(n: u16) -> Store {
        Store::new(vec![n], &cfg())
    }

    fn tr(a: u16, b: u16) -> Transition {
        Transition::plain(st(a), st(b))
    }

    fn trr(a: u16, b: u16) -> Transition {
        Transition::marked(st(a), st(b))
    }

    fn seq(trs: Vec<Transition>, done: bool) -> TraceSeq {
        TraceSeq::new(trs, done)
    }

    fn den(src: &str, bound: u32) -> TraceSet {
        let cfg = cfg();
        let c = crate::lang::parse(src, &cfg).unwrap();
        denote(&c, &cfg, bound)
    }

    #[test]
    fn unit_proc_shape() {
        let u = unit_proc(&cfg());
        assert_eq!(u.len(), 5);
        assert!(u.contains(&TraceSeq::empty()));
        assert!(u.contains(&seq(vec![trr(0, 0)], true)));
        assert!(u.contains(&seq(vec![trr(1, 1)], false)));
        assert_eq!(den("skip", 3), truncate(&u, 3));
        u.validate().unwrap();
    }

    #[test]
    fn block_is_bottom() {
        assert_eq!(den("block", 3).elems, [TraceSeq::empty()].into_iter().collect());
    }

    #[test]
    fn yield_then_block() {
        let got = den("yield; block", 3);
        let expect: BTreeSet<_> =
            [TraceSeq::empty(), seq(vec![tr(0, 0)], false), seq(vec![tr(1, 1)], false)]
                .into_iter()
                .collect();
        assert_eq!(got.elems, expect);
    }

    #[test]
    fn compose_unit_laws() {
        let cfg = cfg();
        let y = den("yield", 3);
        let unit = truncate(&unit_proc(&cfg), 3);
        assert_eq!(truncate(&compose(&y, &unit), 3), y);
        assert_eq!(truncate(&compose(&unit, &y), 3), y);
    }

    #[test]
    fn compose_with_block_drops_returning_work() {
        let got = den("x := 1; block", 3);
        assert_eq!(got.elems, [TraceSeq::empty()].into_iter().collect());
    }

    #[test]
    fn compose_merge_shape() {
        // x := 1 then (yield; x := 0) contains 0→1 1→0R·D.
        let got = den("x := 1; yield; x := 0", 3);
        assert!(got.contains(&seq(vec![tr(0, 1), trr(1, 0)], true)), "{:?}", got.elems);
    }

    #[test]
    fn delay_examples() {
        let cfg = cfg();
        assert_eq!(delay(&unit_proc(&cfg), &cfg), den("yield", 9));
        let bot = TraceSet::bottom(Kind::Proc);
        let got = delay(&bot, &cfg);
        let expect: BTreeSet<_> =
            [TraceSeq::empty(), seq(vec![tr(0, 0)], false), seq(vec![tr(1, 1)], false)]
                .into_iter()
                .collect();
        assert_eq!(got.elems, expect);
        assert!(delay(&den("skip", 3), &cfg).contains(&TraceSeq::empty()));
    }

    #[test]
    fn async_of_block() {
        let got = den("async { block }", 3);
        let expect: BTreeSet<_> =
            [TraceSeq::empty(), seq(vec![trr(0, 0)], false), seq(vec![trr(1, 1)], false)]
                .into_iter()
                .collect();
        assert_eq!(got.elems, expect);
    }

    #[test]
    fn async_assign_shapes() {
        // Spawn returns in a stutter; the thread's write follows from any
        // store the environment leaves it, including writing 0 over 0.
        let got = den("async { x := 0 }", 3);
        assert!(got.contains(&seq(vec![trr(1, 1), tr(1, 0)], true)));
        assert!(got.contains(&seq(vec![trr(1, 1), tr(0, 0)], true)));
        assert!(!got.contains(&seq(vec![trr(1, 1), tr(0, 1)], true)));
    }

    #[test]
    fn clean_set_examples() {
        let cfg = cfg();
        let halted = clean_set(&unit_proc(&cfg));
        assert_eq!(
            halted.elems,
            close([seq(vec![tr(0, 0)], true), seq(vec![tr(1, 1)], true)])
        );
        let yb = den("yield; block", 3);
        assert_eq!(clean_set(&yb).elems, yb.elems);
        assert_eq!(
            clean_set(&TraceSet::bottom(Kind::Proc)).elems,
            [TraceSeq::empty()].into_iter().collect()
        );
    }

    #[test]
    fn pool_semantics() {
        let cfg = cfg();
        let d = Denoter::new(&cfg, 3);
        let empty = d.denote_pool(&[]);
        assert_eq!(empty.elems, pool_unit().elems);
        assert_eq!(
            d.denote_pool(&[Command::Block]).elems,
            [TraceSeq::empty()].into_iter().collect()
        );
        // Done marks exactly the empty pool.
        assert!(empty.contains(&TraceSeq::done_only()));
        assert!(!d.denote_pool(&[Command::Skip]).contains(&TraceSeq::done_only()));
    }

    #[test]
    fn pool_shuffle_example() {
        let a = TraceSet::new(Kind::Pool, close([seq(vec![tr(0, 0)], false)]), None);
        let b = TraceSet::new(Kind::Pool, close([seq(vec![tr(1, 1)], false)]), None);
        let got = pool_shuffle(&a, &b);
        let expect: BTreeSet<_> = [
            TraceSeq::empty(),
            seq(vec![tr(0, 0)], false),
            seq(vec![tr(1, 1)], false),
            seq(vec![tr(0, 0), tr(1, 1)], false),
            seq(vec![tr(1, 1), tr(0, 0)], false),
        ]
        .into_iter()
        .collect();
        assert_eq!(got.elems, expect);
        let i = pool_unit();
        assert_eq!(pool_shuffle(&i, &a).elems, a.elems);
        assert_eq!(pool_shuffle(&a, &b).elems, pool_shuffle(&b, &a).elems);
    }

    #[test]
    fn denote_state_identities() {
        let cfg = cfg();
        let d = Denoter::new(&cfg, 3);
        assert_eq!(
            d.denote_state(&[], &Command::Skip).elems,
            truncate(&unit_proc(&cfg), 3).elems
        );
        let c = crate::lang::parse("yield; x := 1", &cfg).unwrap();
        assert_eq!(d.denote_state(&[], &c).elems, d.denote(&c).elems);
        // A blocked active command collapses everything.
        let blocked = crate::lang::parse("block; skip", &cfg).unwrap();
        assert_eq!(
            d.denote_state(&[Command::Skip], &blocked).elems,
            [TraceSeq::empty()].into_iter().collect()
        );
    }

    #[test]
    fn while_examples() {
        assert_eq!(den("while 0 == 0 { skip }", 3).elems, den("block", 3).elems);
        let loops = den("while 0 == 0 { yield }", 3);
        assert!(loops.contains(&seq(vec![tr(0, 0), tr(0, 0), tr(0, 0)], false)));
        assert!(loops.elems.iter().all(|s| s.is_pure() && !s.done));
        // Exits where the guard is false.
        let w = den("while x == 0 { skip }", 3);
        let expect: BTreeSet<_> =
            [TraceSeq::empty(), seq(vec![trr(1, 1)], false), seq(vec![trr(1, 1)], true)]
                .into_iter()
                .collect();
        assert_eq!(w.elems, expect);
    }

    #[test]
    fn while_matches_explicit_approximants() {
        let cfg = cfg();
        let bound = 3;
        let body = crate::lang::parse("yield", &cfg).unwrap();
        let guard = BoolExp::Eq(NumExp::Lit(0), NumExp::Lit(0));
        let d = Denoter::new(&cfg, bound);
        let mut approx = Command::Block;
        let mut last = d.denote(&approx);
        for _ in 0..bound + 2 {
            approx = Command::If(
                guard.clone(),
                Box::new(Command::seq(body.clone(), approx.clone())),
                Box::new(Command::Skip),
            );
            last = d.denote(&approx);
        }
        let w = Command::While(guard, Box::new(body));
        assert_eq!(d.denote(&w).elems, last.elems);
    }

    #[test]
    fn truncation_examples() {
        let y = den("yield", 9);
        let got = truncate(&y, 1);
        let expect: BTreeSet<_> =
            [TraceSeq::empty(), seq(vec![tr(0, 0)], false), seq(vec![tr(1, 1)], false)]
                .into_iter()
                .collect();
        assert_eq!(got.elems, expect);
        let p = den("yield; yield", 9);
        assert_eq!(truncate(&truncate(&p, 3), 2), truncate(&p, 2));
        assert_eq!(
            truncate(&p, 0).elems,
            [TraceSeq::empty()].into_iter().collect()
        );
        // The completion marker has length 0 and survives truncation to 0.
        let pool = pool_unit();
        assert_eq!(truncate(&pool, 0).elems.len(), 2);
    }

    #[test]
    fn finish_examples() {
        let cfg = cfg();
        let d = Denoter::new(&cfg, 4);
        let lhs = d.denote(&crate::lang::parse("finish { async { x := 0 } }", &cfg).unwrap());
        let rhs = d.denote(&crate::lang::parse("yield; x := 0", &cfg).unwrap());
        assert_eq!(lhs.elems, rhs.elems);
        assert_eq!(finish_set(&unit_proc(&cfg)).elems, unit_proc(&cfg).elems);
        let bot = TraceSet::bottom(Kind::Proc);
        assert_eq!(finish_set(&bot).elems, bot.elems);
    }

    #[test]
    fn par_identities() {
        let cfg = cfg();
        let d = Denoter::new(&cfg, 3);
        let p = d.denote(&crate::lang::parse("x := 1", &cfg).unwrap());
        let unit = d.denote(&Command::Skip);
        let mut memo = ParMemo::default();
        assert_eq!(truncate(&par_sets(&p, &unit, &mut memo), 3).elems, p.elems);
        let q = d.denote(&crate::lang::parse("yield; x := 0", &cfg).unwrap());
        assert_eq!(
            par_sets(&p, &q, &mut memo).elems,
            par_sets(&q, &p, &mut memo).elems
        );
    }

    #[test]
    fn rfork_skip_is_yield() {
        assert_eq!(den("rfork { skip }", 3).elems, den("yield", 3).elems);
    }

    #[test]
    fn choice_is_union() {
        let got = den("choice { yield } or { block }", 3);
        let expect = truncate(&den("yield", 3).union(&den("block", 3)), 3);
        assert_eq!(got.elems, expect.elems);
    }

    #[test]
    fn runs_of_examples() {
        let cfg = cfg();
        assert_eq!(
            runs_of(&TraceSet::bottom(Kind::Proc)),
            [Run::empty()].into_iter().collect()
        );
        let yb = den("yield; block", 3);
        let runs = runs_of(&yb);
        assert_eq!(runs.len(), 3);
        assert!(runs.contains(&Run { stores: vec![st(0), st(0)], done: false }));
        let unit_runs = runs_of(&unit_proc(&cfg));
        assert!(unit_runs.contains(&Run { stores: vec![st(0), st(0)], done: true }));
    }

    #[test]
    fn fig2_style_witness_at_k3() {
        let cfg = Config::single(3);
        let src = "async { x := 0 }; x := 1; yield; blockuntil x == 0; x := 2";
        let c = crate::lang::parse(src, &cfg).unwrap();
        let got = denote(&c, &cfg, 4);
        for s in all_stores(&cfg) {
            let s1 = Store::new(vec![1], &cfg);
            let s0 = Store::new(vec![0], &cfg);
            let s2 = Store::new(vec![2], &cfg);
            let want = TraceSeq::new(
                vec![
                    Transition::plain(s.clone(), s1.clone()),
                    Transition::plain(s1.clone(), s0.clone()),
                    Transition::marked(s0.clone(), s2.clone()),
                ],
                true,
            );
            assert!(got.contains(&want), "missing {}", want.to_text());
        }
    }

    #[test]
    fn denote_ctx_matches_fill() {
        let cfg = cfg();
        let d = Denoter::new(&cfg, 3);
        let c = crate::lang::parse("x := 1", &cfg).unwrap();
        let p = d.denote(&c);
        assert_eq!(d.denote_ctx(&Context::Hole, &p).elems, p.elems);
        let ctx = Context::SeqL(Box::new(Context::Hole), Command::Block);
        let via = d.denote_ctx(&ctx, &p);
        assert_eq!(via.elems, [TraceSeq::empty()].into_iter().collect());
        for src in ["skip", "yield; x := 0", "async { x := 1 }", "while x == 0 { yield }"] {
            let c = crate::lang::parse(src, &cfg).unwrap();
            for ctx in [
                Context::Hole,
                Context::SeqL(Box::new(Context::Hole), Command::Yield),
                Context::AsyncBody(Box::new(Context::Hole)),
                Context::IfThen(
                    BoolExp::Eq(NumExp::Var(VarId(0)), NumExp::Lit(0)),
                    Box::new(Context::Hole),
                    Command::Block,
                ),
            ] {
                assert!(ctx_agrees(&ctx, &c, &d), "ctx {ctx:?} on {src}");
            }
        }
    }

    #[test]
    fn every_denotation_validates() {
        let cfg = cfg();
        let d = Denoter::new(&cfg, 3);
        for src in [
            "skip",
            "block",
            "yield",
            "x := 0",
            "x := 1",
            "skip; yield",
            "async { yield }",
            "while x == 0 { yield }",
            "if x == 0 { x := 1 } else { block }",
            "finish { async { x := 0 } }",
            "(x := 1 || yield)",
            "rfork { x := 0 }",
            "choice { skip } or { block }",
        ] {
            let c = crate::lang::parse(src, &cfg).unwrap();
            d.denote(&c).validate().unwrap_or_else(|e| panic!("{src}: {e}"));
        }
    }
}
