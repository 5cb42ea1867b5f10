//! Terms over named operation symbols.
//!
//! Children are reference counted so that witnesses built by substitution
//! share structure instead of copying it. Equality stays syntactic.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Term {
    Var(usize),
    App { op: Arc<str>, args: Arc<[Term]> },
}

impl Term {
    pub fn var(index: usize) -> Term {
        Term::Var(index)
    }

    pub fn app(op: impl AsRef<str>, args: Vec<Term>) -> Term {
        Term::App {
            op: Arc::from(op.as_ref()),
            args: Arc::from(args),
        }
    }

    /// Largest variable index occurring in the term.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Term::Var(i) => Some(*i),
            Term::App { args, .. } => args.iter().filter_map(Term::max_var).max(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App { args, .. } => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    /// Sorted, deduplicated list of variable indices.
    pub fn variables(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<usize>) {
        match self {
            Term::Var(i) => out.push(*i),
            Term::App { args, .. } => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn contains_var(&self, index: usize) -> bool {
        match self {
            Term::Var(i) => *i == index,
            Term::App { args, .. } => args.iter().any(|a| a.contains_var(index)),
        }
    }

    /// Replaces every `Var(i)` by `f(i)`.
    pub fn rename_vars(&self, f: &impl Fn(usize) -> usize) -> Term {
        match self {
            Term::Var(i) => Term::Var(f(*i)),
            Term::App { op, args } => Term::App {
                op: op.clone(),
                args: args.iter().map(|a| a.rename_vars(f)).collect(),
            },
        }
    }

    /// Simultaneous substitution `Var(i) := subs[i]`.
    pub fn substitute(&self, subs: &[Term]) -> Result<Term> {
        match self {
            Term::Var(i) => subs.get(*i).cloned().ok_or(Error::ValuationTooShort {
                var: *i,
                len: subs.len(),
            }),
            Term::App { op, args } => Ok(Term::App {
                op: op.clone(),
                args: args
                    .iter()
                    .map(|a| a.substitute(subs))
                    .collect::<Result<Vec<_>>>()?
                    .into(),
            }),
        }
    }

    /// Replaces each application of a symbol listed in `defs` by the
    /// defining term, instantiated at the (already expanded) arguments.
    pub fn expand_symbols(&self, defs: &dyn Fn(&str) -> Option<Term>) -> Result<Term> {
        match self {
            Term::Var(_) => Ok(self.clone()),
            Term::App { op, args } => {
                let args = args
                    .iter()
                    .map(|a| a.expand_symbols(defs))
                    .collect::<Result<Vec<_>>>()?;
                match defs(op) {
                    Some(body) => body.substitute(&args),
                    None => Ok(Term::App {
                        op: op.clone(),
                        args: args.into(),
                    }),
                }
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "x{i}"),
            Term::App { op, args } => {
                write!(f, "({op}")?;
                for a in args.iter() {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Tokens of the s-expression syntax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Token {
    Open,
    Close,
    Atom(String),
}

pub(crate) fn tokenize(s: &str) -> Vec<Token> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, out: &mut Vec<Token>| {
        if !cur.is_empty() {
            out.push(Token::Atom(std::mem::take(cur)));
        }
    };
    for ch in s.chars() {
        match ch {
            '(' => {
                flush(&mut cur, &mut out);
                out.push(Token::Open);
            }
            ')' => {
                flush(&mut cur, &mut out);
                out.push(Token::Close);
            }
            c if c.is_whitespace() => flush(&mut cur, &mut out),
            c => cur.push(c),
        }
    }
    flush(&mut cur, &mut out);
    out
}

fn parse_var(atom: &str) -> Option<usize> {
    atom.strip_prefix('x').and_then(|d| d.parse().ok())
}

pub(crate) fn parse_term_tokens(tokens: &[Token], pos: &mut usize) -> Result<Term> {
    match tokens.get(*pos) {
        Some(Token::Atom(a)) => {
            *pos += 1;
            parse_var(a)
                .map(Term::Var)
                .ok_or_else(|| Error::Parse(format!("expected variable `x<n>`, found `{a}`")))
        }
        Some(Token::Open) => {
            *pos += 1;
            let op = match tokens.get(*pos) {
                Some(Token::Atom(a)) => a.clone(),
                _ => return Err(Error::Parse("expected operation name after `(`".into())),
            };
            *pos += 1;
            let mut args = Vec::new();
            loop {
                match tokens.get(*pos) {
                    Some(Token::Close) => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => args.push(parse_term_tokens(tokens, pos)?),
                    None => return Err(Error::Parse("unbalanced parentheses".into())),
                }
            }
            if args.is_empty() {
                return Err(Error::Parse(format!(
                    "operation `{op}` applied to no arguments"
                )));
            }
            Ok(Term::app(op, args))
        }
        Some(Token::Close) => Err(Error::Parse("unexpected `)`".into())),
        None => Err(Error::Parse("unexpected end of input".into())),
    }
}

impl FromStr for Term {
    type Err = Error;

    fn from_str(s: &str) -> Result<Term> {
        let tokens = tokenize(s);
        let mut pos = 0;
        let t = parse_term_tokens(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::Parse("trailing input after term".into()));
        }
        Ok(t)
    }
}
