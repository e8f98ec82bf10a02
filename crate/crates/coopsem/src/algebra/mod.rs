//! The concrete algebraic operations behind the trace model: store update
//! and lookup, suspension, the halt constant, left and right shuffles at set
//! level, the derived sequence-encoding operations, and a registry-driven
//! law checker.

pub mod laws;

pub use laws::{check_all, check_law, law_names, LawError, LawReport, LawVerdict};

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::denot::{async_binary, compose, delay, Kind, TraceSet};
use crate::store::{all_stores, update, Config, Store, VarId};
use crate::traces::{close, left_shuffle, shuffle, TraceSeq, Transition};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("lookup family has {got} entries, the modulus needs {want}")]
    LookupArity { got: usize, want: usize },
}

/// `update_{l,n}`: reads of the first store are redirected through the write.
pub fn alg_update(p: &TraceSet, l: VarId, n: u16, cfg: &Config) -> TraceSet {
    let mut elems = BTreeSet::new();
    elems.insert(TraceSeq::empty());
    for u in &p.elems {
        let Some(first) = u.trs.first() else { continue };
        for s in all_stores(cfg) {
            if update(&s, l, n) == first.pre {
                let mut trs = u.trs.clone();
                trs[0] = Transition { pre: s.clone(), post: first.post.clone(), ret: first.ret };
                elems.insert(TraceSeq::new(trs, u.done));
            }
        }
    }
    TraceSet { kind: p.kind, elems, bound: None }
}

/// `lookup_l`: dispatch on the first store's value of `l`, one operand per
/// value.
pub fn alg_lookup(family: &[TraceSet], l: VarId, cfg: &Config) -> Result<TraceSet, AlgebraError> {
    if family.len() != cfg.modulus() as usize {
        return Err(AlgebraError::LookupArity { got: family.len(), want: cfg.modulus() as usize });
    }
    let kind = family[0].kind;
    let mut elems = BTreeSet::new();
    elems.insert(TraceSeq::empty());
    for (n, p) in family.iter().enumerate() {
        debug_assert_eq!(p.kind, kind);
        for u in &p.elems {
            if let Some(first) = u.trs.first() {
                if first.pre.get(l) == n as u16 {
                    elems.insert(u.clone());
                }
            }
        }
    }
    Ok(TraceSet { kind, elems, bound: None })
}

/// The completed-thread constant: every store stutters into completion.
/// Equal to the cleaned unit of composition.
pub fn alg_halt(cfg: &Config) -> TraceSet {
    TraceSet {
        kind: Kind::AProc,
        elems: close(
            all_stores(cfg)
                .into_iter()
                .map(|s| TraceSeq::new(vec![Transition::plain(s.clone(), s)], true)),
        ),
        bound: None,
    }
}

/// Right shuffle at set level: the spawned set runs behind the command set.
pub fn right_shuffle_set(p: &TraceSet, q: &TraceSet) -> TraceSet {
    async_binary(p, q)
}

/// Left shuffle at set level: the spawned set supplies the first transition.
pub fn left_shuffle_set(p: &TraceSet, q: &TraceSet) -> TraceSet {
    debug_assert!(matches!(p.kind, Kind::AProc | Kind::Pool));
    debug_assert_eq!(q.kind, Kind::Proc);
    let mut out = BTreeSet::new();
    for u in &p.elems {
        for v in &q.elems {
            out.extend(left_shuffle(u, v).expect("spawned sets are pure"));
        }
    }
    TraceSet { kind: Kind::Proc, elems: close(out), bound: None }
}

/// The module action `(p ◁ x) ∪ (p ▷ x)` of a spawned set on a command set.
pub fn module_shuffle(p: &TraceSet, x: &TraceSet) -> TraceSet {
    left_shuffle_set(p, x).union(&right_shuffle_set(p, x))
}

fn aproc_rsh_seq(u: &TraceSeq, v: &TraceSeq) -> BTreeSet<TraceSeq> {
    debug_assert!(u.is_proper_pure() && v.is_proper_pure());
    if v.is_empty() {
        return [TraceSeq::empty()].into_iter().collect();
    }
    let head = v.trs[0].clone();
    let tail = v.tail();
    if tail.trs.is_empty() && tail.done {
        // The other thread completes here; this one's work follows.
        close([u.prepend(head)])
    } else {
        close(
            shuffle(u, &tail)
                .expect("both sides are pure")
                .into_iter()
                .map(|w| w.prepend(head.clone())),
        )
    }
}

/// The spawned-on-spawned right shuffle: `p`'s work runs after the first
/// transition of `q`, completing only when both complete.
pub fn async_aproc(p: &TraceSet, q: &TraceSet) -> TraceSet {
    debug_assert_eq!(p.kind, Kind::AProc);
    debug_assert_eq!(q.kind, Kind::AProc);
    let mut out = BTreeSet::new();
    for u in &p.elems {
        for v in &q.elems {
            out.extend(aproc_rsh_seq(u, v));
        }
    }
    TraceSet { kind: Kind::AProc, elems: close(out), bound: None }
}

/// The mirrored operation; on spawned sets the two shuffle halves coincide up
/// to swapping operands.
pub fn yield_to_aproc(p: &TraceSet, q: &TraceSet) -> TraceSet {
    async_aproc(q, p)
}

/// `a_{σ,σ'}`: a lookup pinning the first store to `σ` wrapped around an
/// update rewriting it to `σ'`, one variable at a time in declaration order.
pub fn pin_rewrite(from: &Store, to: &Store, x: &TraceSet, cfg: &Config) -> TraceSet {
    let mut acc = x.clone();
    for (idx, _) in cfg.vars().iter().enumerate().rev() {
        let l = VarId(idx);
        let updated = alg_update(&acc, l, to.get(l), cfg);
        let mut family = Vec::with_capacity(cfg.modulus() as usize);
        for n in 0..cfg.modulus() {
            if n == from.get(l) {
                family.push(updated.clone());
            } else {
                family.push(TraceSet::bottom(acc.kind));
            }
        }
        acc = alg_lookup(&family, l, cfg).expect("family built to arity");
    }
    acc
}

/// Re-enact a plain sequence as nested pin-rewrites around suspensions:
/// `a_u(x)` chains the per-transition rewrites with a suspension inside each.
/// Over bottom it yields exactly the closure of `u`.
pub fn encode_seq(u: &TraceSeq, x: &TraceSet, cfg: &Config) -> TraceSet {
    debug_assert!(u.is_plain(), "only return-free, completion-free sequences encode");
    let mut acc = x.clone();
    for t in u.trs.iter().rev() {
        acc = pin_rewrite(&t.pre, &t.post, &delay(&acc, cfg), cfg);
    }
    acc
}

/// Kleisli extension: composition against the continuation's denotation.
pub fn kleisli(p: &TraceSet, q: &TraceSet) -> TraceSet {
    compose(p, q)
}

/// A seeded random prefix-closed set of the given kind; identical seeds give
/// identical sets.
pub fn random_set(kind: Kind, max_len: u32, seed: u64, cfg: &Config) -> TraceSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stores = all_stores(cfg);
    let n_gens = rng.gen_range(1..=4);
    let mut gens = Vec::with_capacity(n_gens);
    for _ in 0..n_gens {
        let len = rng.gen_range(0..=max_len) as usize;
        let mut trs = Vec::with_capacity(len);
        for _ in 0..len {
            let pre = stores[rng.gen_range(0..stores.len())].clone();
            let post = stores[rng.gen_range(0..stores.len())].clone();
            trs.push(Transition::plain(pre, post));
        }
        let (done, ret_at) = match kind {
            Kind::Proc => {
                let ret_at = if !trs.is_empty() && rng.gen_bool(0.6) {
                    Some(rng.gen_range(0..trs.len()))
                } else {
                    None
                };
                (ret_at.is_some() && rng.gen_bool(0.5), ret_at)
            }
            Kind::AProc => (!trs.is_empty() && rng.gen_bool(0.4), None),
            Kind::Pool => (rng.gen_bool(0.4), None),
        };
        if let Some(i) = ret_at {
            trs[i].ret = true;
        }
        gens.push(TraceSeq::new(trs, done));
    }
    TraceSet { kind, elems: close(gens), bound: None }
}

/// The sequence-level unit check: encoding a plain sequence over bottom gives
/// its prefix closure.
pub fn encode_is_principal(u: &TraceSeq, cfg: &Config) -> bool {
    let got = encode_seq(u, &TraceSet::bottom(Kind::AProc), cfg);
    got.elems == close([u.clone()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denot::{clean_set, denote, pool_shuffle, runs_of, unit_proc};
    use crate::lang::parse;

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

    fn den(src: &str) -> TraceSet {
        let cfg = cfg();
        denote(&parse(src, &cfg).unwrap(), &cfg, 6)
    }

    /// All plain sequences up to the given length over the config.
    fn plain_pool(cfg: &Config, max_len: usize) -> Vec<TraceSeq> {
        let stores = all_stores(cfg);
        let mut trans = Vec::new();
        for a in &stores {
            for b in &stores {
                trans.push(Transition::plain(a.clone(), b.clone()));
            }
        }
        let mut level: Vec<Vec<Transition>> = vec![Vec::new()];
        let mut out = Vec::new();
        for _ in 0..=max_len {
            out.extend(level.iter().map(|trs| TraceSeq::new(trs.clone(), false)));
            let mut next = Vec::new();
            for trs in &level {
                if trs.len() < max_len {
                    for t in &trans {
                        let mut v = trs.clone();
                        v.push(t.clone());
                        next.push(v);
                    }
                }
            }
            level = next;
        }
        out
    }

    #[test]
    fn update_on_unit_is_assignment() {
        let cfg = cfg();
        let got = alg_update(&unit_proc(&cfg), VarId(0), 1, &cfg);
        assert_eq!(got.elems, den("x := 1").elems);
        let expect: BTreeSet<_> = [
            TraceSeq::empty(),
            seq(vec![trr(0, 1)], false),
            seq(vec![trr(0, 1)], true),
            seq(vec![trr(1, 1)], false),
            seq(vec![trr(1, 1)], true),
        ]
        .into_iter()
        .collect();
        assert_eq!(got.elems, expect);
    }

    #[test]
    fn update_on_bottom() {
        let cfg = cfg();
        let bot = TraceSet::bottom(Kind::AProc);
        assert_eq!(alg_update(&bot, VarId(0), 0, &cfg).elems, bot.elems);
    }

    #[test]
    fn lookup_is_the_conditional() {
        let cfg = cfg();
        let family = vec![den("x := 1"), den("x := 0")];
        let got = alg_lookup(&family, VarId(0), &cfg).unwrap();
        assert_eq!(got.elems, den("if x == 0 { x := 1 } else { x := 0 }").elems);
        // All-bottom family collapses; equal entries partition back.
        let bots = vec![TraceSet::bottom(Kind::Proc), TraceSet::bottom(Kind::Proc)];
        assert_eq!(
            alg_lookup(&bots, VarId(0), &cfg).unwrap().elems,
            TraceSet::bottom(Kind::Proc).elems
        );
        let p = den("yield; x := 1");
        let same = vec![p.clone(), p.clone()];
        assert_eq!(alg_lookup(&same, VarId(0), &cfg).unwrap().elems, p.elems);
        assert_eq!(
            alg_lookup(&[p], VarId(0), &cfg),
            Err(AlgebraError::LookupArity { got: 1, want: 2 })
        );
    }

    #[test]
    fn halt_shape() {
        let cfg = cfg();
        let h = alg_halt(&cfg);
        let expect: BTreeSet<_> = [
            TraceSeq::empty(),
            seq(vec![tr(0, 0)], false),
            seq(vec![tr(0, 0)], true),
            seq(vec![tr(1, 1)], false),
            seq(vec![tr(1, 1)], true),
        ]
        .into_iter()
        .collect();
        assert_eq!(h.elems, expect);
        assert_eq!(h.elems, clean_set(&unit_proc(&cfg)).elems);
        // Suspended bottom sits below halt.
        let d_bot = delay(&TraceSet::bottom(Kind::AProc), &cfg);
        assert!(d_bot.is_subset(&h));
    }

    #[test]
    fn left_shuffle_of_halt_is_delay() {
        let cfg = cfg();
        for q in [den("skip"), den("x := 1"), den("yield; block")] {
            let got = left_shuffle_set(&alg_halt(&cfg), &q);
            assert_eq!(got.elems, delay(&q, &cfg).elems);
        }
    }

    #[test]
    fn right_shuffle_of_bottom_is_identity() {
        let cfg = cfg();
        let bot = TraceSet::bottom(Kind::AProc);
        for q in [den("skip"), den("async { x := 0 }")] {
            assert_eq!(right_shuffle_set(&bot, &q).elems, q.elems);
            assert_eq!(
                left_shuffle_set(&bot, &q).elems,
                TraceSet::bottom(Kind::Proc).elems
            );
        }
    }

    #[test]
    fn encode_seq_examples() {
        let cfg = cfg();
        // Bottom: the closure of the sequence itself, exhaustively to len 3.
        for u in plain_pool(&cfg, 3) {
            assert!(encode_is_principal(&u, &cfg), "{}", u.to_text());
        }
        // Halt: the sequence extended by a completing stutter.
        let u = seq(vec![tr(0, 1)], false);
        let got = encode_seq(&u, &alg_halt(&cfg), &cfg);
        let expect = close([
            seq(vec![tr(0, 1), tr(0, 0)], true),
            seq(vec![tr(0, 1), tr(1, 1)], true),
        ]);
        assert_eq!(got.elems, expect);
        // Empty chain: the operand unchanged.
        let x = random_set(Kind::AProc, 2, 7, &cfg);
        assert_eq!(encode_seq(&TraceSeq::empty(), &x, &cfg).elems, x.elems);
    }

    #[test]
    fn kleisli_laws() {
        let cfg = cfg();
        let unit = unit_proc(&cfg);
        for q in [den("yield"), den("x := 0; yield")] {
            assert_eq!(kleisli(&unit, &q).elems, q.elems);
            assert_eq!(kleisli(&q, &unit).elems, q.elems);
        }
        for seed in 0..10u64 {
            let p = random_set(Kind::Proc, 2, seed, &cfg);
            let q = random_set(Kind::Proc, 2, seed + 100, &cfg);
            let r = random_set(Kind::Proc, 2, seed + 200, &cfg);
            assert_eq!(
                kleisli(&kleisli(&p, &q), &r).elems,
                kleisli(&p, &kleisli(&q, &r)).elems
            );
        }
    }

    #[test]
    fn random_set_contract() {
        let cfg = cfg();
        for kind in [Kind::Proc, Kind::AProc, Kind::Pool] {
            let a = random_set(kind, 0, 3, &cfg);
            if kind == Kind::AProc {
                assert_eq!(a.elems, TraceSet::bottom(kind).elems, "only ε at length 0");
            }
            for seed in 0..50u64 {
                let p = random_set(kind, 2, seed, &cfg);
                let q = random_set(kind, 2, seed, &cfg);
                assert_eq!(p.elems, q.elems, "determinism per seed");
                p.validate().unwrap_or_else(|e| panic!("{kind:?} seed {seed}: {e}"));
            }
        }
    }

    #[test]
    fn aproc_shuffle_agrees_with_pool_shuffle() {
        let cfg = cfg();
        for seed in 0..30u64 {
            let p = random_set(Kind::AProc, 2, seed, &cfg);
            let q = random_set(Kind::AProc, 2, seed + 1000, &cfg);
            let dialgebra = yield_to_aproc(&p, &q).union(&async_aproc(&p, &q));
            let pool = pool_shuffle(&p, &q);
            assert_eq!(dialgebra.elems, pool.elems, "seed {seed}");
        }
    }

    #[test]
    fn rfork_denotation_matches_machine() {
        // The machine rule parks the continuation and activates the body;
        // the left-shuffle denotation predicts exactly the realizable traces.
        let cfg = cfg();
        for src in ["rfork { x := 1 }", "rfork { block }", "rfork { skip }; x := 0"] {
            let c = parse(src, &cfg).unwrap();
            let den = denote(&c, &cfg, 3);
            let oracle = crate::opsem::exec_traces(&[], &c, &cfg, 3, None).unwrap();
            assert!(!oracle.truncated);
            assert_eq!(clean_set(&den).elems, oracle.traces, "{src}");
            let runs = crate::opsem::exec_runs(&[], &c, &cfg, 3, None).unwrap();
            assert_eq!(runs_of(&den), runs.runs, "{src} runs");
        }
    }
}
