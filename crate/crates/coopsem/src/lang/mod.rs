//! Abstract syntax, one-hole contexts, parsing, and printing.

mod parse;
mod print;

pub use parse::{parse, ParseError};
pub use print::{pretty, pretty_context};

use crate::store::VarId;

/// Numeric expressions. Literals must be below the configured modulus.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum NumExp {
    Lit(u16),
    Var(VarId),
    Add(Box<NumExp>, Box<NumExp>),
    Sub(Box<NumExp>, Box<NumExp>),
    Mul(Box<NumExp>, Box<NumExp>),
}

/// Boolean expressions.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum BoolExp {
    True,
    False,
    Eq(NumExp, NumExp),
    Le(NumExp, NumExp),
    Not(Box<BoolExp>),
    And(Box<BoolExp>, Box<BoolExp>),
    Or(Box<BoolExp>, Box<BoolExp>),
}

/// Commands. The core language is the first eight variants; `Finish`, `Par`,
/// `Choice`, and `RFork` are extensions gated by a flag at the CLI level.
/// `blockuntil b` is surface sugar and desugars at parse time to
/// `if b { skip } else { block }`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Command {
    Skip,
    Assign(VarId, NumExp),
    Seq(Box<Command>, Box<Command>),
    If(BoolExp, Box<Command>, Box<Command>),
    While(BoolExp, Box<Command>),
    Async(Box<Command>),
    Yield,
    Block,
    Finish(Box<Command>),
    Par(Box<Command>, Box<Command>),
    Choice(Box<Command>, Box<Command>),
    RFork(Box<Command>),
}

impl Command {
    pub fn seq(a: Command, b: Command) -> Command {
        Command::Seq(Box::new(a), Box::new(b))
    }

    /// Right-nested sequencing of a non-empty list.
    pub fn seq_all(mut cmds: Vec<Command>) -> Command {
        let last = cmds.pop().expect("seq_all needs at least one command");
        cmds.into_iter()
            .rev()
            .fold(last, |acc, c| Command::seq(c, acc))
    }

    pub fn uses_extensions(&self) -> bool {
        match self {
            Command::Skip | Command::Yield | Command::Block | Command::Assign(_, _) => false,
            Command::Seq(a, b) | Command::If(_, a, b) => {
                a.uses_extensions() || b.uses_extensions()
            }
            Command::While(_, a) | Command::Async(a) => a.uses_extensions(),
            Command::Finish(_) | Command::Par(_, _) | Command::Choice(_, _)
            | Command::RFork(_) => true,
        }
    }

    pub fn is_loop_free(&self) -> bool {
        match self {
            Command::Skip | Command::Yield | Command::Block | Command::Assign(_, _) => true,
            Command::Seq(a, b) | Command::If(_, a, b) | Command::Par(a, b)
            | Command::Choice(a, b) => a.is_loop_free() && b.is_loop_free(),
            Command::Async(a) | Command::Finish(a) | Command::RFork(a) => a.is_loop_free(),
            Command::While(_, _) => false,
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Command::Skip | Command::Yield | Command::Block | Command::Assign(_, _) => 1,
            Command::Seq(a, b) | Command::If(_, a, b) | Command::Par(a, b)
            | Command::Choice(a, b) => 1 + a.node_count() + b.node_count(),
            Command::While(_, a)
            | Command::Async(a)
            | Command::Finish(a)
            | Command::RFork(a) => 1 + a.node_count(),
        }
    }
}

/// A command with exactly one hole. `SeqL` spines with a `Hole` at the bottom
/// are the evaluation contexts; everything else only occurs in general
/// program contexts.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Context {
    Hole,
    SeqL(Box<Context>, Command),
    SeqR(Command, Box<Context>),
    IfThen(BoolExp, Box<Context>, Command),
    IfElse(BoolExp, Command, Box<Context>),
    WhileBody(BoolExp, Box<Context>),
    AsyncBody(Box<Context>),
    FinishBody(Box<Context>),
    ParL(Box<Context>, Command),
    ParR(Command, Box<Context>),
    ChoiceL(Box<Context>, Command),
    ChoiceR(Command, Box<Context>),
    RForkBody(Box<Context>),
}

impl Context {
    /// True for contexts of the restricted evaluation shape `hole | E ; C`.
    pub fn is_eval_context(&self) -> bool {
        match self {
            Context::Hole => true,
            Context::SeqL(inner, _) => inner.is_eval_context(),
            _ => false,
        }
    }

    /// Build the evaluation context `(. ; c1) ; c2 ; ...` whose hole is
    /// followed by the given continuations, innermost first.
    pub fn eval_context(continuations: &[Command]) -> Context {
        let mut ctx = Context::Hole;
        for c in continuations {
            ctx = Context::SeqL(Box::new(ctx), c.clone());
        }
        ctx
    }
}

/// Replace the hole of `ctx` with `c`.
pub fn fill(ctx: &Context, c: &Command) -> Command {
    match ctx {
        Context::Hole => c.clone(),
        Context::SeqL(inner, d) => Command::Seq(Box::new(fill(inner, c)), Box::new(d.clone())),
        Context::SeqR(d, inner) => Command::Seq(Box::new(d.clone()), Box::new(fill(inner, c))),
        Context::IfThen(b, inner, d) => {
            Command::If(b.clone(), Box::new(fill(inner, c)), Box::new(d.clone()))
        }
        Context::IfElse(b, d, inner) => {
            Command::If(b.clone(), Box::new(d.clone()), Box::new(fill(inner, c)))
        }
        Context::WhileBody(b, inner) => Command::While(b.clone(), Box::new(fill(inner, c))),
        Context::AsyncBody(inner) => Command::Async(Box::new(fill(inner, c))),
        Context::FinishBody(inner) => Command::Finish(Box::new(fill(inner, c))),
        Context::ParL(inner, d) => Command::Par(Box::new(fill(inner, c)), Box::new(d.clone())),
        Context::ParR(d, inner) => Command::Par(Box::new(d.clone()), Box::new(fill(inner, c))),
        Context::ChoiceL(inner, d) => {
            Command::Choice(Box::new(fill(inner, c)), Box::new(d.clone()))
        }
        Context::ChoiceR(d, inner) => {
            Command::Choice(Box::new(d.clone()), Box::new(fill(inner, c)))
        }
        Context::RForkBody(inner) => Command::RFork(Box::new(fill(inner, c))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::Config;

    fn cfg() -> Config {
        Config::single(2)
    }

    fn x() -> VarId {
        VarId(0)
    }

    #[test]
    fn parse_atoms() {
        assert_eq!(parse("skip", &cfg()).unwrap(), Command::Skip);
        assert_eq!(parse("yield", &cfg()).unwrap(), Command::Yield);
        assert_eq!(parse("block", &cfg()).unwrap(), Command::Block);
    }

    #[test]
    fn parse_example_program() {
        // async { x := 0 }; x := 1; yield; blockuntil x == 0; x := 2
        let cfg = Config::single(3);
        let src = "async { x := 0 }; x := 1; yield; blockuntil x == 0; x := 2";
        let got = parse(src, &cfg).unwrap();
        let expect = Command::seq(
            Command::Async(Box::new(Command::Assign(x(), NumExp::Lit(0)))),
            Command::seq(
                Command::Assign(x(), NumExp::Lit(1)),
                Command::seq(
                    Command::Yield,
                    Command::seq(
                        Command::If(
                            BoolExp::Eq(NumExp::Var(x()), NumExp::Lit(0)),
                            Box::new(Command::Skip),
                            Box::new(Command::Block),
                        ),
                        Command::Assign(x(), NumExp::Lit(2)),
                    ),
                ),
            ),
        );
        assert_eq!(got, expect);
    }

    #[test]
    fn blockuntil_desugars() {
        let got = parse("blockuntil x == 0", &cfg()).unwrap();
        assert_eq!(
            got,
            Command::If(
                BoolExp::Eq(NumExp::Var(x()), NumExp::Lit(0)),
                Box::new(Command::Skip),
                Box::new(Command::Block),
            )
        );
    }

    #[test]
    fn parse_errors() {
        assert!(parse("x := 2", &cfg()).is_err(), "literal >= k");
        assert!(parse("y := 0", &cfg()).is_err(), "unknown variable");
        let err = parse("if x == 0 { skip }", &cfg()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line"), "error carries position: {msg}");
    }

    #[test]
    fn pretty_direct_prints() {
        let cfg = cfg();
        assert_eq!(pretty(&Command::Skip, &cfg), "skip");
        assert_eq!(
            pretty(
                &Command::Async(Box::new(Command::Assign(x(), NumExp::Lit(0)))),
                &cfg
            ),
            "async { x := 0 }"
        );
        assert_eq!(
            pretty(
                &Command::Choice(Box::new(Command::Yield), Box::new(Command::Block)),
                &cfg
            ),
            "choice { yield } or { block }"
        );
    }

    #[test]
    fn fill_examples() {
        let ctx = Context::Hole;
        assert_eq!(fill(&ctx, &Command::Skip), Command::Skip);
        let ctx = Context::SeqL(Box::new(Context::Hole), Command::Yield);
        assert_eq!(
            fill(&ctx, &Command::Block),
            Command::seq(Command::Block, Command::Yield)
        );
        let ctx = Context::AsyncBody(Box::new(Context::Hole));
        assert_eq!(
            fill(&ctx, &Command::Yield),
            Command::Async(Box::new(Command::Yield))
        );
    }

    #[test]
    fn eval_context_shape() {
        assert!(Context::Hole.is_eval_context());
        assert!(Context::eval_context(&[Command::Skip, Command::Yield]).is_eval_context());
        assert!(!Context::AsyncBody(Box::new(Context::Hole)).is_eval_context());
        let ctx = Context::eval_context(&[Command::Yield]);
        assert_eq!(
            fill(&ctx, &Command::Block),
            Command::seq(Command::Block, Command::Yield)
        );
    }

    #[test]
    fn parens_and_operators_round_trip() {
        let cfg = Config::single(3);
        for src in [
            "x := x + 1 - 1 * x",
            "if not (x <= 0) and true { skip } else { block }",
            "while x == 0 or false { yield }",
            "(skip; yield); block",
            "x := (x + 1) * x",
        ] {
            let c = parse(src, &cfg).unwrap();
            let printed = pretty(&c, &cfg);
            assert_eq!(parse(&printed, &cfg).unwrap(), c, "round trip of {src}");
        }
    }

    #[test]
    fn extension_syntax_round_trips() {
        let cfg = cfg();
        for src in [
            "finish { async { x := 0 } }",
            "(skip || yield)",
            "choice { skip } or { rfork { yield } }",
        ] {
            let c = parse(src, &cfg).unwrap();
            assert!(c.uses_extensions());
            let printed = pretty(&c, &cfg);
            assert_eq!(parse(&printed, &cfg).unwrap(), c, "round trip of {src}");
        }
    }

    #[test]
    fn seq_binds_tighter_than_par() {
        let cfg = cfg();
        let c = parse("skip; yield || block", &cfg).unwrap();
        assert_eq!(
            c,
            Command::Par(
                Box::new(Command::seq(Command::Skip, Command::Yield)),
                Box::new(Command::Block)
            )
        );
    }

    #[test]
    fn comments_are_skipped() {
        let c = parse("skip # trailing words\n; yield", &cfg()).unwrap();
        assert_eq!(c, Command::seq(Command::Skip, Command::Yield));
    }
}
