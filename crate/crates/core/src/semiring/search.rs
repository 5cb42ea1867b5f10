//! Bounded bidirectional search for a common expansion.

use std::collections::HashMap;

use crate::error::{Error, Result};

use super::cert::{apply_step, Certificate, ExpansionStep};
use super::poly::{EquationSet, Polynomial};

/// Default cap on the total number of summands held by the search.
pub const DEFAULT_SUMMAND_BUDGET: usize = 10_000;

/// Polynomials reached from one endpoint, each with the step that first
/// reached it from its parent.
struct Side {
    seen: HashMap<Polynomial, Option<(Polynomial, ExpansionStep)>>,
    frontier: Vec<Polynomial>,
}

impl Side {
    fn new(start: &Polynomial) -> Side {
        Side {
            seen: HashMap::from([(start.clone(), None)]),
            frontier: vec![start.clone()],
        }
    }

    fn level(&self) -> usize {
        self.frontier
            .iter()
            .map(Polynomial::len)
            .min()
            .unwrap_or(usize::MAX)
    }

    fn path<'a>(&'a self, mut p: &'a Polynomial) -> Vec<ExpansionStep> {
        let mut steps = Vec::new();
        while let Some(Some((parent, step))) = self.seen.get(p) {
            steps.push(*step);
            p = parent;
        }
        steps.reverse();
        steps
    }
}

/// Searches for a certificate of `p ~ q` by expanding both sides breadth
/// first, always growing the side whose frontier has fewer summands.
///
/// Every equation must have at least two monomials, so that each expansion
/// adds summands. The search fails with `Exhausted` once the polynomials it
/// holds exceed `budget` summands in total, or when both frontiers are empty
/// (only possible without equations).
pub fn expand_search(
    p: &Polynomial,
    q: &Polynomial,
    eqs: &EquationSet,
    budget: usize,
) -> Result<Certificate> {
    eqs.check_strict_growth()?;
    let mut sides = [Side::new(p), Side::new(q)];
    let mut held = p.len() + q.len();
    loop {
        if let Some(r) = sides[0]
            .seen
            .keys()
            .find(|r| sides[1].seen.contains_key(*r))
        {
            return Ok(Certificate {
                left: p.clone(),
                right: q.clone(),
                left_steps: sides[0].path(r),
                right_steps: sides[1].path(r),
                common: r.clone(),
            });
        }
        let s = if sides[0].level() <= sides[1].level() {
            0
        } else {
            1
        };
        if sides[s].frontier.is_empty() {
            return Err(Error::Exhausted("no expansions remain".into()));
        }
        let side = &mut sides[s];
        let mut next = Vec::new();
        for parent in std::mem::take(&mut side.frontier) {
            let words = parent.words();
            for (i, w) in words.iter().enumerate() {
                if i > 0 && words[i - 1] == *w {
                    continue;
                }
                for split in 0..=w.len() {
                    for e in 0..eqs.len() {
                        let step = ExpansionStep::new(i, split, e);
                        let child = apply_step(&parent, &step, eqs)?;
                        if side.seen.contains_key(&child) {
                            continue;
                        }
                        held += child.len();
                        if held > budget {
                            return Err(Error::Exhausted(format!(
                                "search exceeded {budget} summands"
                            )));
                        }
                        side.seen
                            .insert(child.clone(), Some((parent.clone(), step)));
                        next.push(child);
                    }
                }
            }
        }
        side.frontier = next;
    }
}
