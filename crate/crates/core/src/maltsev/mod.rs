//! Height-one Maltsev conditions: schemas, a complete solver over finite
//! idempotent algebras, and the constructive term transformations.

mod bracket;
mod pendant;
mod schema;
mod solver;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::term::{parse_term_tokens, tokenize, Term, Token};

pub use bracket::{construct_grid_from_bracket, validate_bracket, BracketShape, BracketViolation};
pub use pendant::{
    check_butterfly, check_h_absorption, check_transfer_chain, derive_h_term, pad_m1_plus_m2,
};
pub use schema::{
    build_condition, grid_position, unit_pattern, ConditionSchema, Identity, Pin, SchemaName, Side,
    SymbolDecl,
};
pub use solver::{
    find_grid_terms, solve_condition, verify_solution, SolveBudget, SolveOutcome, DEFAULT_MAX_NODES,
};

/// Terms assigned to the symbols of a schema, kept in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Witness {
    entries: Vec<(String, Term)>,
}

impl Witness {
    /// Inserts or replaces the term for `symbol`.
    pub fn insert(&mut self, symbol: impl Into<String>, term: Term) {
        let symbol = symbol.into();
        match self.entries.iter_mut().find(|(s, _)| *s == symbol) {
            Some(slot) => slot.1 = term,
            None => self.entries.push((symbol, term)),
        }
    }

    pub fn get(&self, symbol: &str) -> Option<&Term> {
        self.entries
            .iter()
            .find(|(s, _)| s == symbol)
            .map(|(_, t)| t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.entries.iter().map(|(s, t)| (s.as_str(), t))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Copy with symbols renamed by `f`.
    pub fn renamed(&self, f: impl Fn(&str) -> String) -> Witness {
        Witness {
            entries: self
                .entries
                .iter()
                .map(|(s, t)| (f(s), t.clone()))
                .collect(),
        }
    }
}

/// One `(symbol term)` line per symbol.
impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, t) in &self.entries {
            writeln!(f, "({s} {t})")?;
        }
        Ok(())
    }
}

impl FromStr for Witness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Witness> {
        let tokens = tokenize(s);
        let mut pos = 0;
        let mut out = Witness::default();
        while pos < tokens.len() {
            if tokens[pos] != Token::Open {
                return Err(Error::Parse("expected `(` starting a witness entry".into()));
            }
            let name = match tokens.get(pos + 1) {
                Some(Token::Atom(a)) => a.clone(),
                _ => return Err(Error::Parse("expected symbol name in witness entry".into())),
            };
            pos += 2;
            let term = parse_term_tokens(&tokens, &mut pos)?;
            if tokens.get(pos) != Some(&Token::Close) {
                return Err(Error::Parse(format!(
                    "expected `)` closing the entry for `{name}`"
                )));
            }
            pos += 1;
            if out.get(&name).is_some() {
                return Err(Error::Parse(format!("symbol `{name}` given twice")));
            }
            out.insert(name, term);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_round_trip() {
        let mut w = Witness::default();
        w.insert("f", "(meet x0 (meet x1 x2))".parse().unwrap());
        w.insert("g1", Term::var(0));
        let text = w.to_string();
        assert_eq!(text, "(f (meet x0 (meet x1 x2)))\n(g1 x0)\n");
        assert_eq!(text.parse::<Witness>().unwrap(), w);
        assert!("(f x0".parse::<Witness>().is_err());
        assert!("(f x0) (f x1)".parse::<Witness>().is_err());
        assert!("f x0".parse::<Witness>().is_err());
    }
}
