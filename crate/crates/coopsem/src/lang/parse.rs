//! Recursive-descent parser for the surface syntax.
//!
//! Grammar, whitespace-insensitive, `#` starts a line comment:
//!
//! ```text
//! Com  ::= Seq ("||" Seq)*
//! Seq  ::= Atom (";" Seq)?                  -- ";" right-associative
//! Atom ::= "skip" | "yield" | "block" | Var ":=" NExp
//!        | "if" BExp "{" Com "}" "else" "{" Com "}"
//!        | "while" BExp "{" Com "}" | "async" "{" Com "}"
//!        | "blockuntil" BExp | "finish" "{" Com "}"
//!        | "choice" "{" Com "}" "or" "{" Com "}" | "rfork" "{" Com "}"
//!        | "(" Com ")"
//! BExp ::= BTerm ("or" BTerm)* ; BTerm ::= BFact ("and" BFact)*
//! BFact ::= "true" | "false" | "not" BFact | NExp ("=="|"<=") NExp | "(" BExp ")"
//! NExp ::= NTerm (("+"|"-") NTerm)* ; NTerm ::= NFact ("*" NFact)*
//! NFact ::= Num | Var | "(" NExp ")"
//! ```
//!
//! `blockuntil b` desugars to `if b { skip } else { block }`, so the AST has
//! no node for it.

use thiserror::Error;

use super::{BoolExp, Command, NumExp};
use crate::store::Config;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: u32, col: u32, msg: String },
    #[error("line {line}, column {col}: unknown variable `{name}`")]
    UnknownVar { line: u32, col: u32, name: String },
    #[error("line {line}, column {col}: literal {value} is not below the modulus {modulus}")]
    LiteralRange {
        line: u32,
        col: u32,
        value: u64,
        modulus: u16,
    },
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Ident(String),
    Num(u64),
    Assign,
    Semi,
    ParPar, // ||
    EqEq,
    LeEq,
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    LBrace,
    RBrace,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1u32;
    let mut col = 1u32;
    let mut it = src.chars().peekable();
    while let Some(&c) = it.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |it: &mut std::iter::Peekable<std::str::Chars>| {
            let c = it.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump(&mut it);
            }
            '#' => {
                while let Some(&c) = it.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump(&mut it);
                }
            }
            '0'..='9' => {
                let mut n: u64 = 0;
                while let Some(&d) = it.peek() {
                    if let Some(v) = d.to_digit(10) {
                        n = n.saturating_mul(10).saturating_add(v as u64);
                        bump(&mut it);
                    } else {
                        break;
                    }
                }
                out.push(Spanned { tok: Tok::Num(n), line: tl, col: tc });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = it.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(bump(&mut it));
                    } else {
                        break;
                    }
                }
                out.push(Spanned { tok: Tok::Ident(s), line: tl, col: tc });
            }
            ':' => {
                bump(&mut it);
                if it.peek() == Some(&'=') {
                    bump(&mut it);
                    out.push(Spanned { tok: Tok::Assign, line: tl, col: tc });
                } else {
                    return Err(ParseError::Syntax {
                        line: tl,
                        col: tc,
                        msg: "expected `:=`".into(),
                    });
                }
            }
            ';' => {
                bump(&mut it);
                out.push(Spanned { tok: Tok::Semi, line: tl, col: tc });
            }
            '|' => {
                bump(&mut it);
                if it.peek() == Some(&'|') {
                    bump(&mut it);
                    out.push(Spanned { tok: Tok::ParPar, line: tl, col: tc });
                } else {
                    return Err(ParseError::Syntax {
                        line: tl,
                        col: tc,
                        msg: "expected `||`".into(),
                    });
                }
            }
            '=' => {
                bump(&mut it);
                if it.peek() == Some(&'=') {
                    bump(&mut it);
                    out.push(Spanned { tok: Tok::EqEq, line: tl, col: tc });
                } else {
                    return Err(ParseError::Syntax {
                        line: tl,
                        col: tc,
                        msg: "expected `==`".into(),
                    });
                }
            }
            '<' => {
                bump(&mut it);
                if it.peek() == Some(&'=') {
                    bump(&mut it);
                    out.push(Spanned { tok: Tok::LeEq, line: tl, col: tc });
                } else {
                    return Err(ParseError::Syntax {
                        line: tl,
                        col: tc,
                        msg: "expected `<=`".into(),
                    });
                }
            }
            '+' => {
                bump(&mut it);
                out.push(Spanned { tok: Tok::Plus, line: tl, col: tc });
            }
            '-' => {
                bump(&mut it);
                out.push(Spanned { tok: Tok::Minus, line: tl, col: tc });
            }
            '*' => {
                bump(&mut it);
                out.push(Spanned { tok: Tok::Star, line: tl, col: tc });
            }
            '(' => {
                bump(&mut it);
                out.push(Spanned { tok: Tok::LParen, line: tl, col: tc });
            }
            ')' => {
                bump(&mut it);
                out.push(Spanned { tok: Tok::RParen, line: tl, col: tc });
            }
            '{' => {
                bump(&mut it);
                out.push(Spanned { tok: Tok::LBrace, line: tl, col: tc });
            }
            '}' => {
                bump(&mut it);
                out.push(Spanned { tok: Tok::RBrace, line: tl, col: tc });
            }
            other => {
                return Err(ParseError::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "skip", "yield", "block", "if", "else", "while", "async", "blockuntil", "finish", "choice",
    "or", "rfork", "and", "not", "true", "false",
];

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    cfg: &'a Config,
    end_line: u32,
    end_col: u32,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (u32, u32) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or((self.end_line, self.end_col))
    }

    fn bump(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        let (line, col) = self.here();
        ParseError::Syntax { line, col, msg: msg.into() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.bump();
                Ok(())
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.bump();
                Ok(())
            }
            _ => Err(self.err(format!("expected `{kw}`"))),
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(s)) if s == kw)
    }

    fn command(&mut self) -> Result<Command, ParseError> {
        let mut left = self.seq_command()?;
        while self.peek() == Some(&Tok::ParPar) {
            self.bump();
            let right = self.seq_command()?;
            left = Command::Par(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn seq_command(&mut self) -> Result<Command, ParseError> {
        let first = self.atom_command()?;
        if self.peek() == Some(&Tok::Semi) {
            self.bump();
            let rest = self.seq_command()?;
            Ok(Command::seq(first, rest))
        } else {
            Ok(first)
        }
    }

    fn braced(&mut self) -> Result<Command, ParseError> {
        self.expect(Tok::LBrace, "`{`")?;
        let c = self.command()?;
        self.expect(Tok::RBrace, "`}`")?;
        Ok(c)
    }

    fn atom_command(&mut self) -> Result<Command, ParseError> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.bump();
                let c = self.command()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(c)
            }
            Some(Tok::Ident(word)) => match word.as_str() {
                "skip" => {
                    self.bump();
                    Ok(Command::Skip)
                }
                "yield" => {
                    self.bump();
                    Ok(Command::Yield)
                }
                "block" => {
                    self.bump();
                    Ok(Command::Block)
                }
                "async" => {
                    self.bump();
                    Ok(Command::Async(Box::new(self.braced()?)))
                }
                "finish" => {
                    self.bump();
                    Ok(Command::Finish(Box::new(self.braced()?)))
                }
                "rfork" => {
                    self.bump();
                    Ok(Command::RFork(Box::new(self.braced()?)))
                }
                "choice" => {
                    self.bump();
                    let a = self.braced()?;
                    self.expect_kw("or")?;
                    let b = self.braced()?;
                    Ok(Command::Choice(Box::new(a), Box::new(b)))
                }
                "if" => {
                    self.bump();
                    let b = self.bool_exp()?;
                    let t = self.braced()?;
                    self.expect_kw("else")?;
                    let e = self.braced()?;
                    Ok(Command::If(b, Box::new(t), Box::new(e)))
                }
                "while" => {
                    self.bump();
                    let b = self.bool_exp()?;
                    let body = self.braced()?;
                    Ok(Command::While(b, Box::new(body)))
                }
                "blockuntil" => {
                    self.bump();
                    let b = self.bool_exp()?;
                    Ok(Command::If(b, Box::new(Command::Skip), Box::new(Command::Block)))
                }
                _ if KEYWORDS.contains(&word.as_str()) => {
                    Err(self.err(format!("unexpected keyword `{word}`")))
                }
                _ => {
                    let (line, col) = self.here();
                    self.bump();
                    let var = self.cfg.var_index(&word).ok_or(ParseError::UnknownVar {
                        line,
                        col,
                        name: word.clone(),
                    })?;
                    self.expect(Tok::Assign, "`:=`")?;
                    let e = self.num_exp()?;
                    Ok(Command::Assign(var, e))
                }
            },
            _ => Err(self.err("expected a command")),
        }
    }

    fn bool_exp(&mut self) -> Result<BoolExp, ParseError> {
        let mut left = self.bool_term()?;
        while self.at_kw("or") {
            self.bump();
            let right = self.bool_term()?;
            left = BoolExp::Or(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn bool_term(&mut self) -> Result<BoolExp, ParseError> {
        let mut left = self.bool_factor()?;
        while self.at_kw("and") {
            self.bump();
            let right = self.bool_factor()?;
            left = BoolExp::And(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn bool_factor(&mut self) -> Result<BoolExp, ParseError> {
        if self.at_kw("true") {
            self.bump();
            return Ok(BoolExp::True);
        }
        if self.at_kw("false") {
            self.bump();
            return Ok(BoolExp::False);
        }
        if self.at_kw("not") {
            self.bump();
            return Ok(BoolExp::Not(Box::new(self.bool_factor()?)));
        }
        // A parenthesis may open either a boolean or a numeric expression;
        // try the boolean reading first and fall back on failure.
        if self.peek() == Some(&Tok::LParen) {
            let save = self.pos;
            self.bump();
            if let Ok(b) = self.bool_exp() {
                if self.peek() == Some(&Tok::RParen) {
                    self.bump();
                    return Ok(b);
                }
            }
            self.pos = save;
        }
        let a = self.num_exp()?;
        match self.peek() {
            Some(Tok::EqEq) => {
                self.bump();
                let b = self.num_exp()?;
                Ok(BoolExp::Eq(a, b))
            }
            Some(Tok::LeEq) => {
                self.bump();
                let b = self.num_exp()?;
                Ok(BoolExp::Le(a, b))
            }
            _ => Err(self.err("expected `==` or `<=`")),
        }
    }

    fn num_exp(&mut self) -> Result<NumExp, ParseError> {
        let mut left = self.num_term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let right = self.num_term()?;
                    left = NumExp::Add(Box::new(left), Box::new(right));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let right = self.num_term()?;
                    left = NumExp::Sub(Box::new(left), Box::new(right));
                }
                _ => return Ok(left),
            }
        }
    }

    fn num_term(&mut self) -> Result<NumExp, ParseError> {
        let mut left = self.num_factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.bump();
            let right = self.num_factor()?;
            left = NumExp::Mul(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn num_factor(&mut self) -> Result<NumExp, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                let (line, col) = self.here();
                self.bump();
                if n >= self.cfg.modulus() as u64 {
                    return Err(ParseError::LiteralRange {
                        line,
                        col,
                        value: n,
                        modulus: self.cfg.modulus(),
                    });
                }
                Ok(NumExp::Lit(n as u16))
            }
            Some(Tok::Ident(word)) if !KEYWORDS.contains(&word.as_str()) => {
                let (line, col) = self.here();
                self.bump();
                let var = self.cfg.var_index(&word).ok_or(ParseError::UnknownVar {
                    line,
                    col,
                    name: word,
                })?;
                Ok(NumExp::Var(var))
            }
            Some(Tok::LParen) => {
                self.bump();
                let e = self.num_exp()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => Err(self.err("expected a numeric expression")),
        }
    }
}

/// Parse a program. Every variable must be in `cfg.vars()` and every numeral
/// must be below the modulus.
pub fn parse(src: &str, cfg: &Config) -> Result<Command, ParseError> {
    let toks = lex(src)?;
    let lines = src.lines().count().max(1) as u32;
    let last_len = src.lines().last().map(|l| l.len()).unwrap_or(0) as u32;
    let mut p = Parser {
        toks,
        pos: 0,
        cfg,
        end_line: lines,
        end_col: last_len + 1,
    };
    let c = p.command()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input after command"));
    }
    Ok(c)
}
