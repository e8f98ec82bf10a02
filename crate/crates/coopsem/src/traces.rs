//! Transition sequences, markers, the prefix order, closure, cleaning,
//! marking, shuffles, and runs.
//!
//! A transition is a pair of stores; the second component may carry a return
//! marker. A main-thread sequence has at most one return transition and may
//! end with a terminal completion marker only if it has one. A pure sequence
//! has no return marker at all; the completion marker on its own (`done` with
//! no transitions) is permitted only inside pool-kinded sets.
//!
//! The prefix order compares whole transitions, markers included: a marked
//! transition is not an extension of its plain twin.

use std::collections::{BTreeSet, HashMap};
use std::rc::Rc;

use serde::Serialize;
use serde_json::Value as Json;
use thiserror::Error;

use crate::store::{Config, Store};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("marking is undefined on the improper completion-only sequence")]
    MarkImproper,
    #[error("shuffle requires the first argument to be free of return markers")]
    ShuffleLeftNotPure,
    #[error("shuffle of two return-marked sequences is undefined")]
    ShuffleBothMarked,
}

/// A pair of stores, optionally return-marked on the second component.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Transition {
    pub pre: Store,
    pub post: Store,
    pub ret: bool,
}

impl Transition {
    pub fn plain(pre: Store, post: Store) -> Self {
        Transition { pre, post, ret: false }
    }

    pub fn marked(pre: Store, post: Store) -> Self {
        Transition { pre, post, ret: true }
    }
}

/// A finite sequence of transitions with an optional terminal completion
/// marker.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TraceSeq {
    pub trs: Vec<Transition>,
    pub done: bool,
}

impl TraceSeq {
    pub fn empty() -> Self {
        TraceSeq { trs: Vec::new(), done: false }
    }

    /// The completion marker on its own; only valid inside pool-kinded sets.
    pub fn done_only() -> Self {
        TraceSeq { trs: Vec::new(), done: true }
    }

    pub fn new(trs: Vec<Transition>, done: bool) -> Self {
        TraceSeq { trs, done }
    }

    /// Number of transitions; the completion marker contributes nothing.
    pub fn len(&self) -> usize {
        self.trs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trs.is_empty() && !self.done
    }

    pub fn ret_count(&self) -> usize {
        self.trs.iter().filter(|t| t.ret).count()
    }

    /// At most one return transition, and the completion marker only with one.
    pub fn is_main_thread(&self) -> bool {
        let rets = self.ret_count();
        rets <= 1 && (!self.done || rets == 1)
    }

    /// No return markers anywhere.
    pub fn is_pure(&self) -> bool {
        self.ret_count() == 0
    }

    /// Pure and not the completion marker on its own.
    pub fn is_proper_pure(&self) -> bool {
        self.is_pure() && !(self.trs.is_empty() && self.done)
    }

    /// Pure with no completion marker.
    pub fn is_plain(&self) -> bool {
        self.is_pure() && !self.done
    }

    pub fn first_store(&self) -> Option<&Store> {
        self.trs.first().map(|t| &t.pre)
    }

    pub fn prepend(&self, t: Transition) -> TraceSeq {
        let mut trs = Vec::with_capacity(self.trs.len() + 1);
        trs.push(t);
        trs.extend(self.trs.iter().cloned());
        TraceSeq { trs, done: self.done }
    }

    /// The suffix after the first transition, keeping the completion marker.
    pub fn tail(&self) -> TraceSeq {
        TraceSeq { trs: self.trs[1..].to_vec(), done: self.done }
    }

    /// Text form: `0→1 1→0R·D`, with `ε` for the empty sequence.
    pub fn to_text(&self) -> String {
        if self.is_empty() {
            return "ε".to_string();
        }
        let mut s = String::new();
        for (i, t) in self.trs.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            s.push_str(&t.pre.to_text());
            s.push('→');
            s.push_str(&t.post.to_text());
            if t.ret {
                s.push('R');
            }
        }
        if self.done {
            s.push_str("·D");
        }
        s
    }

    pub fn to_json(&self, cfg: &Config) -> Json {
        #[derive(Serialize)]
        struct Tr {
            pre: Json,
            post: Json,
            ret: bool,
        }
        #[derive(Serialize)]
        struct Seq {
            trs: Vec<Tr>,
            done: bool,
        }
        serde_json::to_value(Seq {
            trs: self
                .trs
                .iter()
                .map(|t| Tr { pre: t.pre.to_json(cfg), post: t.post.to_json(cfg), ret: t.ret })
                .collect(),
            done: self.done,
        })
        .unwrap()
    }
}

/// Marker-sensitive prefix test. A sequence without the completion marker is
/// a prefix of the same sequence with it; a plain transition never extends to
/// its marked twin.
pub fn is_prefix(u: &TraceSeq, v: &TraceSeq) -> bool {
    if u.trs.len() > v.trs.len() {
        return false;
    }
    if u.trs[..] != v.trs[..u.trs.len()] {
        return false;
    }
    if u.done {
        u.trs.len() == v.trs.len() && v.done
    } else {
        true
    }
}

/// Least prefix-closed superset. Empty input stays empty; any non-empty input
/// gains the empty sequence.
pub fn close<I: IntoIterator<Item = TraceSeq>>(seqs: I) -> BTreeSet<TraceSeq> {
    let mut out = BTreeSet::new();
    for s in seqs {
        for n in 0..s.trs.len() {
            out.insert(TraceSeq::new(s.trs[..n].to_vec(), false));
        }
        if s.done {
            out.insert(TraceSeq::new(s.trs.clone(), false));
        }
        out.insert(s);
    }
    out
}

pub fn is_prefix_closed(set: &BTreeSet<TraceSeq>) -> bool {
    set.iter().all(|s| {
        (0..s.trs.len()).all(|n| set.contains(&TraceSeq::new(s.trs[..n].to_vec(), false)))
            && (!s.done || set.contains(&TraceSeq::new(s.trs.clone(), false)))
    })
}

/// Erase the return marker, if present. The completion marker is kept.
pub fn clean_seq(u: &TraceSeq) -> TraceSeq {
    TraceSeq {
        trs: u
            .trs
            .iter()
            .map(|t| Transition::plain(t.pre.clone(), t.post.clone()))
            .collect(),
        done: u.done,
    }
}

/// Re-attach the return marker at the completed end of a proper pure
/// sequence; sequences without the completion marker are unchanged.
pub fn mark_seq(u: &TraceSeq) -> Result<TraceSeq, TraceError> {
    if !u.is_proper_pure() {
        return Err(TraceError::MarkImproper);
    }
    if !u.done {
        return Ok(u.clone());
    }
    let mut trs = u.trs.clone();
    let last = trs.last_mut().expect("proper sequence with done has a transition");
    last.ret = true;
    Ok(TraceSeq { trs, done: true })
}

fn interleavings(a: &[Transition], b: &[Transition]) -> Vec<Vec<Transition>> {
    if a.is_empty() {
        return vec![b.to_vec()];
    }
    if b.is_empty() {
        return vec![a.to_vec()];
    }
    let mut out = Vec::new();
    for mut v in interleavings(&a[1..], b) {
        v.insert(0, a[0].clone());
        out.push(v);
    }
    for mut v in interleavings(a, &b[1..]) {
        v.insert(0, b[0].clone());
        out.push(v);
    }
    out
}

/// All shuffles of a pure sequence `u` with a pure or main-thread sequence
/// `v`. The completion marker survives only when both carry it.
pub fn shuffle(u: &TraceSeq, v: &TraceSeq) -> Result<BTreeSet<TraceSeq>, TraceError> {
    if !u.is_pure() {
        if !v.is_pure() {
            return Err(TraceError::ShuffleBothMarked);
        }
        return Err(TraceError::ShuffleLeftNotPure);
    }
    let done = u.done && v.done;
    Ok(interleavings(&u.trs, &v.trs)
        .into_iter()
        .map(|trs| TraceSeq::new(trs, done))
        .collect())
}

/// Right shuffles `u ▷ v`: the first transition comes from `v`, the rest is a
/// shuffle. `u ▷ ε = {ε}`.
pub fn right_shuffle(u: &TraceSeq, v: &TraceSeq) -> Result<BTreeSet<TraceSeq>, TraceError> {
    if v.trs.is_empty() {
        let mut out = BTreeSet::new();
        out.insert(TraceSeq::empty());
        return Ok(out);
    }
    let head = v.trs[0].clone();
    Ok(shuffle(u, &v.tail())?
        .into_iter()
        .map(|w| w.prepend(head.clone()))
        .collect())
}

/// Left shuffles `u ◁ v`: the first transition comes from `u`, the rest is a
/// shuffle. `ε ◁ v = {ε}`.
pub fn left_shuffle(u: &TraceSeq, v: &TraceSeq) -> Result<BTreeSet<TraceSeq>, TraceError> {
    if !u.is_pure() {
        return Err(TraceError::ShuffleLeftNotPure);
    }
    if u.trs.is_empty() {
        let mut out = BTreeSet::new();
        out.insert(TraceSeq::empty());
        return Ok(out);
    }
    let head = u.trs[0].clone();
    Ok(shuffle(&u.tail(), v)?
        .into_iter()
        .map(|w| w.prepend(head.clone()))
        .collect())
}

/// Memo table for per-sequence parallel composition.
#[derive(Default)]
pub struct ParMemo {
    sym: HashMap<(TraceSeq, TraceSeq), Rc<BTreeSet<TraceSeq>>>,
    left: HashMap<(TraceSeq, TraceSeq), Rc<BTreeSet<TraceSeq>>>,
}

/// Parallel composition of two main-thread sequences: the least prefix-closed
/// family in which either side may take the next plain step, and a returning
/// left head merges with the right head the way sequential composition does.
///
/// When one side is exhausted the other may continue with its return-free
/// prefixes only; the combination returns and completes only through the
/// merge case, where both markers are accounted for.
pub fn par_seqs(u: &TraceSeq, v: &TraceSeq, memo: &mut ParMemo) -> Rc<BTreeSet<TraceSeq>> {
    if let Some(r) = memo.sym.get(&(u.clone(), v.clone())) {
        return r.clone();
    }
    let result: BTreeSet<TraceSeq> = if u.is_empty() {
        ret_free_prefixes(v)
    } else if v.is_empty() {
        ret_free_prefixes(u)
    } else {
        let a = par_biased(u, v, memo);
        let b = par_biased(v, u, memo);
        close(a.iter().cloned().chain(b.iter().cloned()))
    };
    let rc = Rc::new(result);
    memo.sym.insert((u.clone(), v.clone()), rc.clone());
    rc
}

fn ret_free_prefixes(v: &TraceSeq) -> BTreeSet<TraceSeq> {
    let cut = v.trs.iter().position(|t| t.ret).unwrap_or(v.trs.len());
    let keep = TraceSeq::new(v.trs[..cut].to_vec(), v.done && cut == v.trs.len());
    close([keep])
}

// The left-biased half: the left sequence takes the next step.
fn par_biased(u: &TraceSeq, v: &TraceSeq, memo: &mut ParMemo) -> Rc<BTreeSet<TraceSeq>> {
    if let Some(r) = memo.left.get(&(u.clone(), v.clone())) {
        return r.clone();
    }
    let head = u.trs[0].clone();
    let mut out = BTreeSet::new();
    if !head.ret {
        let rest = u.tail();
        for w in par_seqs(&rest, v, memo).iter() {
            out.insert(w.prepend(head.clone()));
        }
    } else {
        let vhead = &v.trs[0];
        if vhead.pre == head.post {
            let merged = Transition { pre: head.pre.clone(), post: vhead.post.clone(), ret: vhead.ret };
            let utail = clean_done_tail(u);
            for w in shuffle(&utail, &v.tail()).expect("post-return tail is pure") {
                out.insert(w.prepend(merged.clone()));
            }
        }
    }
    let rc = Rc::new(close(out));
    memo.left.insert((u.clone(), v.clone()), rc.clone());
    rc
}

// The pure tail after a return head.
fn clean_done_tail(u: &TraceSeq) -> TraceSeq {
    TraceSeq { trs: u.trs[1..].to_vec(), done: u.done }
}

/// The chain of stores read off a contiguous pure sequence.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Run {
    pub stores: Vec<Store>,
    pub done: bool,
}

impl Run {
    pub fn empty() -> Self {
        Run { stores: Vec::new(), done: false }
    }

    pub fn to_text(&self) -> String {
        if self.stores.is_empty() && !self.done {
            return "ε".to_string();
        }
        let mut s = self
            .stores
            .iter()
            .map(|st| st.to_text())
            .collect::<Vec<_>>()
            .join(" ");
        if self.done {
            if !s.is_empty() {
                s.push(' ');
            }
            s.push('D');
        }
        s
    }

    pub fn to_json(&self, cfg: &Config) -> Json {
        serde_json::json!({
            "stores": self.stores.iter().map(|s| s.to_json(cfg)).collect::<Vec<_>>(),
            "done": self.done,
        })
    }
}

/// The run generated by a sequence, if adjacent transitions agree on the
/// intermediate store. Return-marked sequences are cleaned first.
pub fn run_of(u: &TraceSeq) -> Option<Run> {
    for pair in u.trs.windows(2) {
        if pair[0].post != pair[1].pre {
            return None;
        }
    }
    if u.trs.is_empty() {
        return Some(Run { stores: Vec::new(), done: u.done });
    }
    let mut stores = Vec::with_capacity(u.trs.len() + 1);
    stores.push(u.trs[0].pre.clone());
    for t in &u.trs {
        stores.push(t.post.clone());
    }
    Some(Run { stores, done: u.done })
}

/// The unique run-generating pure sequence mapping to a given run.
pub fn seq_of_run(r: &Run) -> TraceSeq {
    let trs = r
        .stores
        .windows(2)
        .map(|w| Transition::plain(w[0].clone(), w[1].clone()))
        .collect();
    TraceSeq { trs, done: r.done }
}
