//! Canonical printing. `parse(pretty(c)) == c` for every well-formed command.

use super::{BoolExp, Command, Context, NumExp};
use crate::store::Config;

fn num(e: &NumExp, cfg: &Config) -> String {
    match e {
        NumExp::Lit(n) => n.to_string(),
        NumExp::Var(v) => cfg.var_name(*v).to_string(),
        NumExp::Add(a, b) => format!("{} + {}", num_operand(a, cfg), num_operand(b, cfg)),
        NumExp::Sub(a, b) => format!("{} - {}", num_operand(a, cfg), num_operand(b, cfg)),
        NumExp::Mul(a, b) => format!("{} * {}", num_operand(a, cfg), num_operand(b, cfg)),
    }
}

// Operands of a binary node are parenthesized unless atomic, which keeps the
// printer independent of the parser's associativity choices.
fn num_operand(e: &NumExp, cfg: &Config) -> String {
    match e {
        NumExp::Lit(_) | NumExp::Var(_) => num(e, cfg),
        _ => format!("({})", num(e, cfg)),
    }
}

fn boolean(b: &BoolExp, cfg: &Config) -> String {
    match b {
        BoolExp::True => "true".to_string(),
        BoolExp::False => "false".to_string(),
        BoolExp::Eq(a, b) => format!("{} == {}", num(a, cfg), num(b, cfg)),
        BoolExp::Le(a, b) => format!("{} <= {}", num(a, cfg), num(b, cfg)),
        BoolExp::Not(inner) => format!("not {}", bool_operand(inner, cfg)),
        BoolExp::And(a, b) => format!("{} and {}", bool_operand(a, cfg), bool_operand(b, cfg)),
        BoolExp::Or(a, b) => format!("{} or {}", bool_operand(a, cfg), bool_operand(b, cfg)),
    }
}

fn bool_operand(b: &BoolExp, cfg: &Config) -> String {
    match b {
        BoolExp::True | BoolExp::False | BoolExp::Eq(_, _) | BoolExp::Le(_, _) => {
            boolean(b, cfg)
        }
        _ => format!("({})", boolean(b, cfg)),
    }
}

/// Print a command in the concrete syntax.
pub fn pretty(c: &Command, cfg: &Config) -> String {
    match c {
        Command::Skip => "skip".to_string(),
        Command::Yield => "yield".to_string(),
        Command::Block => "block".to_string(),
        Command::Assign(v, e) => format!("{} := {}", cfg.var_name(*v), num(e, cfg)),
        Command::Seq(a, b) => {
            // ";" is right-associative in the grammar, so a left-nested
            // sequence needs parentheses to round-trip.
            let left = match **a {
                Command::Seq(_, _) => format!("({})", pretty(a, cfg)),
                _ => pretty(a, cfg),
            };
            format!("{}; {}", left, pretty(b, cfg))
        }
        Command::If(b, t, e) => format!(
            "if {} {{ {} }} else {{ {} }}",
            boolean(b, cfg),
            pretty(t, cfg),
            pretty(e, cfg)
        ),
        Command::While(b, body) => {
            format!("while {} {{ {} }}", boolean(b, cfg), pretty(body, cfg))
        }
        Command::Async(body) => format!("async {{ {} }}", pretty(body, cfg)),
        Command::Finish(body) => format!("finish {{ {} }}", pretty(body, cfg)),
        // Parenthesized so that "a; b || c" never reparses differently.
        Command::Par(a, b) => format!("({} || {})", pretty(a, cfg), pretty(b, cfg)),
        Command::Choice(a, b) => {
            format!("choice {{ {} }} or {{ {} }}", pretty(a, cfg), pretty(b, cfg))
        }
        Command::RFork(body) => format!("rfork {{ {} }}", pretty(body, cfg)),
    }
}

/// Print a context with `[ ]` at the hole.
pub fn pretty_context(ctx: &Context, cfg: &Config) -> String {
    match ctx {
        Context::Hole => "[ ]".to_string(),
        Context::SeqL(inner, d) => {
            let left = match **inner {
                Context::SeqL(_, _) | Context::SeqR(_, _) => {
                    format!("({})", pretty_context(inner, cfg))
                }
                _ => pretty_context(inner, cfg),
            };
            format!("{}; {}", left, pretty(d, cfg))
        }
        Context::SeqR(d, inner) => format!("{}; {}", pretty(d, cfg), pretty_context(inner, cfg)),
        Context::IfThen(b, inner, d) => format!(
            "if {} {{ {} }} else {{ {} }}",
            boolean(b, cfg),
            pretty_context(inner, cfg),
            pretty(d, cfg)
        ),
        Context::IfElse(b, d, inner) => format!(
            "if {} {{ {} }} else {{ {} }}",
            boolean(b, cfg),
            pretty(d, cfg),
            pretty_context(inner, cfg)
        ),
        Context::WhileBody(b, inner) => {
            format!("while {} {{ {} }}", boolean(b, cfg), pretty_context(inner, cfg))
        }
        Context::AsyncBody(inner) => format!("async {{ {} }}", pretty_context(inner, cfg)),
        Context::FinishBody(inner) => format!("finish {{ {} }}", pretty_context(inner, cfg)),
        Context::ParL(inner, d) => {
            format!("({} || {})", pretty_context(inner, cfg), pretty(d, cfg))
        }
        Context::ParR(d, inner) => {
            format!("({} || {})", pretty(d, cfg), pretty_context(inner, cfg))
        }
        Context::ChoiceL(inner, d) => format!(
            "choice {{ {} }} or {{ {} }}",
            pretty_context(inner, cfg),
            pretty(d, cfg)
        ),
        Context::ChoiceR(d, inner) => format!(
            "choice {{ {} }} or {{ {} }}",
            pretty(d, cfg),
            pretty_context(inner, cfg)
        ),
        Context::RForkBody(inner) => format!("rfork {{ {} }}", pretty_context(inner, cfg)),
    }
}
