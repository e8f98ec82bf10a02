//! Finite store spaces, expression evaluation, and store enumeration.
//!
//! A store is a total map from the configured variable set to values in
//! `0..k`. Arithmetic is performed in the integers and reduced modulo `k`, so
//! the value domain is closed and the store space stays finite.

use std::collections::BTreeMap;
use std::fmt;

use serde_json::Value as Json;
use thiserror::Error;

use crate::lang::{BoolExp, NumExp};

/// A variable, identified by its index in [`Config::vars`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId(pub usize);

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("variable list must be non-empty")]
    NoVars,
    #[error("duplicate variable `{0}`")]
    DuplicateVar(String),
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(u16),
}

/// The variable set and value modulus every other component is parameterized
/// over.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Config {
    vars: Vec<String>,
    modulus: u16,
}

impl Config {
    pub fn new(vars: Vec<String>, modulus: u16) -> Result<Self, ConfigError> {
        if vars.is_empty() {
            return Err(ConfigError::NoVars);
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(ConfigError::DuplicateVar(v.clone()));
            }
        }
        if modulus < 2 {
            return Err(ConfigError::ModulusTooSmall(modulus));
        }
        Ok(Config { vars, modulus })
    }

    /// Single variable `x` with the given modulus, the default desk setup.
    pub fn single(modulus: u16) -> Self {
        Config::new(vec!["x".to_string()], modulus).unwrap()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn modulus(&self) -> u16 {
        self.modulus
    }

    pub fn var_index(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v == name).map(VarId)
    }

    pub fn var_name(&self, v: VarId) -> &str {
        &self.vars[v.0]
    }

    pub fn num_stores(&self) -> u64 {
        (self.modulus as u64).pow(self.vars.len() as u32)
    }
}

/// A total map from the configured variables to values below the modulus,
/// laid out in [`Config::vars`] order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Store(Vec<u16>);

impl Store {
    pub fn new(values: Vec<u16>, cfg: &Config) -> Self {
        assert_eq!(values.len(), cfg.vars().len());
        assert!(values.iter().all(|&v| v < cfg.modulus()));
        Store(values)
    }

    /// The store mapping every variable to 0.
    pub fn zero(cfg: &Config) -> Self {
        Store(vec![0; cfg.vars().len()])
    }

    pub fn get(&self, v: VarId) -> u16 {
        self.0[v.0]
    }

    pub fn values(&self) -> &[u16] {
        &self.0
    }

    pub fn to_json(&self, cfg: &Config) -> Json {
        let map: BTreeMap<String, u16> = cfg
            .vars()
            .iter()
            .cloned()
            .zip(self.0.iter().copied())
            .collect();
        serde_json::to_value(map).unwrap()
    }

    /// Compact text form: a single value prints bare, several print joined
    /// with commas.
    pub fn to_text(&self) -> String {
        self.0
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Debug for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

/// The store agreeing with `s` except at `v`, which maps to `n`.
pub fn update(s: &Store, v: VarId, n: u16) -> Store {
    let mut vals = s.0.clone();
    vals[v.0] = n;
    Store(vals)
}

/// All `k^|vars|` stores in lexicographic order by the configured variable
/// order. The order is fixed so serialized trace sets are byte-stable.
pub fn all_stores(cfg: &Config) -> Vec<Store> {
    let n = cfg.vars().len();
    let k = cfg.modulus();
    let mut out = Vec::with_capacity(cfg.num_stores() as usize);
    let mut cur = vec![0u16; n];
    loop {
        out.push(Store(cur.clone()));
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < k {
                break;
            }
            cur[i] = 0;
        }
    }
}

/// Evaluate a numeric expression; total by construction, results are reduced
/// modulo the configured modulus. Subtraction is `(a + k - b) mod k`.
pub fn eval_num(s: &Store, e: &NumExp, cfg: &Config) -> u16 {
    let k = cfg.modulus() as u32;
    match e {
        NumExp::Lit(n) => *n,
        NumExp::Var(v) => s.get(*v),
        NumExp::Add(a, b) => {
            ((eval_num(s, a, cfg) as u32 + eval_num(s, b, cfg) as u32) % k) as u16
        }
        NumExp::Sub(a, b) => {
            ((eval_num(s, a, cfg) as u32 + k - eval_num(s, b, cfg) as u32) % k) as u16
        }
        NumExp::Mul(a, b) => {
            ((eval_num(s, a, cfg) as u32 * eval_num(s, b, cfg) as u32) % k) as u16
        }
    }
}

/// Evaluate a boolean expression over [`eval_num`].
pub fn eval_bool(s: &Store, b: &BoolExp, cfg: &Config) -> bool {
    match b {
        BoolExp::True => true,
        BoolExp::False => false,
        BoolExp::Eq(a, b) => eval_num(s, a, cfg) == eval_num(s, b, cfg),
        BoolExp::Le(a, b) => eval_num(s, a, cfg) <= eval_num(s, b, cfg),
        BoolExp::Not(b) => !eval_bool(s, b, cfg),
        BoolExp::And(a, b) => eval_bool(s, a, cfg) && eval_bool(s, b, cfg),
        BoolExp::Or(a, b) => eval_bool(s, a, cfg) || eval_bool(s, b, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> VarId {
        VarId(0)
    }

    #[test]
    fn config_rejects_bad_input() {
        assert_eq!(Config::new(vec![], 2), Err(ConfigError::NoVars));
        assert_eq!(
            Config::new(vec!["x".into(), "x".into()], 2),
            Err(ConfigError::DuplicateVar("x".into()))
        );
        assert_eq!(
            Config::new(vec!["x".into()], 1),
            Err(ConfigError::ModulusTooSmall(1))
        );
    }

    #[test]
    fn eval_literals_and_vars() {
        let cfg = Config::single(2);
        let s0 = Store::new(vec![0], &cfg);
        let s1 = Store::new(vec![1], &cfg);
        assert_eq!(eval_num(&s0, &NumExp::Lit(0), &cfg), 0);
        assert_eq!(eval_num(&s1, &NumExp::Var(x()), &cfg), 1);
    }

    #[test]
    fn eval_wraps_modulo_k() {
        // (1 + 1) mod 2 = 0
        let cfg = Config::single(2);
        let s1 = Store::new(vec![1], &cfg);
        let e = NumExp::Add(Box::new(NumExp::Var(x())), Box::new(NumExp::Lit(1)));
        assert_eq!(eval_num(&s1, &e, &cfg), 0);
        // subtraction wraps too: 0 - 1 = 1 at k=2
        let e = NumExp::Sub(Box::new(NumExp::Lit(0)), Box::new(NumExp::Lit(1)));
        assert_eq!(eval_num(&s1, &e, &cfg), 1);
    }

    #[test]
    fn eval_bool_examples() {
        let cfg = Config::single(2);
        let s0 = Store::new(vec![0], &cfg);
        let s1 = Store::new(vec![1], &cfg);
        assert!(eval_bool(&s0, &BoolExp::True, &cfg));
        assert!(eval_bool(
            &s0,
            &BoolExp::Eq(NumExp::Var(x()), NumExp::Lit(0)),
            &cfg
        ));
        // not (x <= 0) at x=1
        assert!(eval_bool(
            &s1,
            &BoolExp::Not(Box::new(BoolExp::Le(NumExp::Var(x()), NumExp::Lit(0)))),
            &cfg
        ));
    }

    #[test]
    fn update_points() {
        let cfg = Config::single(2);
        let s0 = Store::new(vec![0], &cfg);
        let s1 = Store::new(vec![1], &cfg);
        assert_eq!(update(&s0, x(), 1), s1);
        assert_eq!(update(&s1, x(), 1), s1);
        let cfg2 = Config::new(vec!["x".into(), "y".into()], 2).unwrap();
        let s01 = Store::new(vec![0, 1], &cfg2);
        assert_eq!(update(&s01, x(), 1), Store::new(vec![1, 1], &cfg2));
    }

    #[test]
    fn all_stores_enumeration() {
        let cfg = Config::single(2);
        let st = all_stores(&cfg);
        assert_eq!(st.len(), 2);
        assert_eq!(st[0].values(), &[0]);
        assert_eq!(st[1].values(), &[1]);
        assert_eq!(all_stores(&Config::single(3)).len(), 3);
        let cfg2 = Config::new(vec!["x".into(), "y".into()], 2).unwrap();
        let st = all_stores(&cfg2);
        assert_eq!(st.len(), 4);
        assert_eq!(st[1].values(), &[0, 1]);
        assert_eq!(st[2].values(), &[1, 0]);
    }

    #[test]
    fn eval_ignores_unmentioned_vars() {
        let cfg = Config::new(vec!["x".into(), "y".into()], 3).unwrap();
        let e = NumExp::Add(Box::new(NumExp::Var(x())), Box::new(NumExp::Lit(2)));
        for s in all_stores(&cfg) {
            for y in 0..3 {
                let s2 = update(&s, VarId(1), y);
                assert_eq!(eval_num(&s, &e, &cfg), eval_num(&s2, &e, &cfg));
            }
        }
    }
}
