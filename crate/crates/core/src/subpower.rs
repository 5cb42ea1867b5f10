//! Subuniverses of finite powers generated by explicit tuples.
//!
//! Members are inserted breadth-first by derivation depth; the tuples new in
//! one round are appended in lexicographic order, and each keeps the least
//! derivation `(operation index, child ids)` found for it. The published
//! state therefore depends only on the inputs, never on enumeration order.

use std::collections::HashMap;

use crate::algebra::{all_tuples, Element, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::term::Term;

pub const DEFAULT_MAX_TUPLES: usize = 10_000_000;
pub const DEFAULT_MAX_APPLICATIONS: u64 = 500_000_000;

/// Hard caps on closure work. Hitting one is reported as
/// [`Error::Exhausted`], never as a negative answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_tuples: usize,
    pub max_applications: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_tuples: DEFAULT_MAX_TUPLES,
            max_applications: DEFAULT_MAX_APPLICATIONS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    Generator(usize),
    Derived { op: usize, children: Vec<usize> },
}

#[derive(Debug, Clone)]
pub struct ClosureState {
    arity: usize,
    data: Vec<Element>,
    index: HashMap<Vec<Element>, usize>,
    provenance: Vec<Provenance>,
    depth: Vec<u32>,
    op_names: Vec<String>,
    generator_count: usize,
}

impl ClosureState {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.provenance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.provenance.is_empty()
    }

    pub fn generator_count(&self) -> usize {
        self.generator_count
    }

    pub fn tuple(&self, id: usize) -> &[Element] {
        &self.data[id * self.arity..(id + 1) * self.arity]
    }

    pub fn tuples(&self) -> impl Iterator<Item = &[Element]> + '_ {
        (0..self.len()).map(move |i| self.tuple(i))
    }

    pub fn provenance(&self, id: usize) -> &Provenance {
        &self.provenance[id]
    }

    pub fn depth(&self, id: usize) -> u32 {
        self.depth[id]
    }

    pub fn id_of(&self, tuple: &[Element]) -> Option<usize> {
        self.index.get(tuple).copied()
    }

    pub fn contains(&self, tuple: &[Element]) -> Result<bool> {
        if tuple.len() != self.arity {
            return Err(Error::LengthMismatch {
                expected: self.arity,
                found: tuple.len(),
            });
        }
        Ok(self.index.contains_key(tuple))
    }

    /// A term over generator-indexed variables that produces `tuple`.
    pub fn reconstruct_term(&self, tuple: &[Element]) -> Result<Term> {
        if tuple.len() != self.arity {
            return Err(Error::LengthMismatch {
                expected: self.arity,
                found: tuple.len(),
            });
        }
        let id = self.id_of(tuple).ok_or(Error::NotInClosure)?;
        Ok(self.term_of(id))
    }

    /// Term for member `id`; shared subderivations share term nodes.
    pub fn term_of(&self, id: usize) -> Term {
        let mut memo: HashMap<usize, Term> = HashMap::new();
        self.term_memo(id, &mut memo)
    }

    fn term_memo(&self, id: usize, memo: &mut HashMap<usize, Term>) -> Term {
        if let Some(t) = memo.get(&id) {
            return t.clone();
        }
        let t = match &self.provenance[id] {
            Provenance::Generator(g) => Term::Var(*g),
            Provenance::Derived { op, children } => {
                let args = children.iter().map(|&c| self.term_memo(c, memo)).collect();
                Term::app(&self.op_names[*op], args)
            }
        };
        memo.insert(id, t.clone());
        t
    }

    fn push(&mut self, tuple: Vec<Element>, prov: Provenance, depth: u32) {
        let id = self.provenance.len();
        self.data.extend_from_slice(&tuple);
        self.index.insert(tuple, id);
        self.provenance.push(prov);
        self.depth.push(depth);
    }
}

/// Least subuniverse of `algebra^arity` containing `generators`.
pub fn generate_closure(
    algebra: &FiniteAlgebra,
    arity: usize,
    generators: &[Vec<Element>],
    budget: Budget,
) -> Result<ClosureState> {
    let mut state = ClosureState {
        arity,
        data: Vec::new(),
        index: HashMap::new(),
        provenance: Vec::new(),
        depth: Vec::new(),
        op_names: algebra.ops().iter().map(|o| o.name.clone()).collect(),
        generator_count: generators.len(),
    };
    for (g, t) in generators.iter().enumerate() {
        if t.len() != arity {
            return Err(Error::LengthMismatch {
                expected: arity,
                found: t.len(),
            });
        }
        algebra.check_elements(t)?;
        if !state.index.contains_key(t) {
            state.push(t.clone(), Provenance::Generator(g), 0);
        }
    }
    if state.len() > budget.max_tuples {
        return Err(Error::Exhausted(format!(
            "closure exceeded {} tuples",
            budget.max_tuples
        )));
    }

    let mut work: u64 = 0;
    let mut frontier = 0;
    let mut round = 0u32;
    while frontier < state.len() {
        round += 1;
        let end = state.len();
        let mut found: HashMap<Vec<Element>, (usize, Vec<usize>)> = HashMap::new();
        let mut args: Vec<&[Element]> = Vec::new();
        for (op_idx, op) in algebra.ops().iter().enumerate() {
            let k = op.arity;
            // Child tuples with at least one member from the frontier: the
            // first frontier member sits at position `p`.
            for p in 0..k {
                let mut ranges = Vec::with_capacity(k);
                for q in 0..k {
                    ranges.push(match q.cmp(&p) {
                        std::cmp::Ordering::Less => (0, frontier),
                        std::cmp::Ordering::Equal => (frontier, end),
                        std::cmp::Ordering::Greater => (0, end),
                    });
                }
                if ranges.iter().any(|(lo, hi)| lo >= hi) {
                    continue;
                }
                let combos: u64 = ranges
                    .iter()
                    .map(|(lo, hi)| (hi - lo) as u64)
                    .try_fold(1u64, |acc, x| acc.checked_mul(x))
                    .unwrap_or(u64::MAX);
                work = work.saturating_add(combos);
                if work > budget.max_applications {
                    return Err(Error::Exhausted(format!(
                        "closure exceeded {} operation applications",
                        budget.max_applications
                    )));
                }
                let mut ids: Vec<usize> = ranges.iter().map(|r| r.0).collect();
                'combos: loop {
                    args.clear();
                    args.extend(ids.iter().map(|&i| state.tuple(i)));
                    let image = algebra.apply_coordinatewise(op, &args, arity);
                    if !state.index.contains_key(&image) {
                        let cand = (op_idx, ids.clone());
                        match found.get_mut(&image) {
                            Some(best) if *best <= cand => {}
                            Some(best) => *best = cand,
                            None => {
                                found.insert(image, cand);
                            }
                        }
                    }
                    // odometer, last position fastest
                    let mut q = k;
                    loop {
                        if q == 0 {
                            break 'combos;
                        }
                        q -= 1;
                        ids[q] += 1;
                        if ids[q] < ranges[q].1 {
                            break;
                        }
                        ids[q] = ranges[q].0;
                    }
                }
            }
        }
        if state.len() + found.len() > budget.max_tuples {
            return Err(Error::Exhausted(format!(
                "closure exceeded {} tuples",
                budget.max_tuples
            )));
        }
        let mut fresh: Vec<(Vec<Element>, (usize, Vec<usize>))> = found.into_iter().collect();
        fresh.sort_unstable_by(|a, b| a.0.cmp(&b.0));
        frontier = end;
        for (t, (op, children)) in fresh {
            state.push(t, Provenance::Derived { op, children }, round);
        }
    }
    Ok(state)
}

/// The `k`-ary term operations of an idempotent algebra, each stored as its
/// table over `A^k` (row-major), i.e. the free algebra on `k` generators of
/// the variety the algebra generates.
#[derive(Debug, Clone)]
pub struct TermOpSpace {
    k: usize,
    size: usize,
    closure: ClosureState,
}

impl TermOpSpace {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.closure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closure.is_empty()
    }

    pub fn closure(&self) -> &ClosureState {
        &self.closure
    }

    pub fn members(&self) -> impl Iterator<Item = &[Element]> + '_ {
        self.closure.tuples()
    }

    pub fn contains(&self, table: &[Element]) -> Result<bool> {
        self.closure.contains(table)
    }

    /// Table of the `i`-th projection `A^k -> A`.
    pub fn projection(&self, i: usize) -> Vec<Element> {
        projection_table(self.size, self.k, i)
    }

    /// Witness term (variables `x0..x{k-1}`) for a member table.
    pub fn term_for(&self, table: &[Element]) -> Result<Term> {
        self.closure.reconstruct_term(table)
    }
}

/// Table of the `i`-th `k`-ary projection on a `size`-element set.
pub fn projection_table(size: usize, k: usize, i: usize) -> Vec<Element> {
    all_tuples(size, k).map(|t| t[i]).collect()
}

pub fn term_op_space(algebra: &FiniteAlgebra, k: usize, budget: Budget) -> Result<TermOpSpace> {
    if !(2..=3).contains(&k) {
        return Err(Error::InvalidParameter(format!(
            "term operation spaces are built for k = 2 or 3, got {k}"
        )));
    }
    if !algebra.is_idempotent() {
        return Err(Error::NotIdempotent);
    }
    let size = algebra.size();
    let n = size.pow(k as u32);
    let gens: Vec<Vec<Element>> = (0..k).map(|i| projection_table(size, k, i)).collect();
    let closure = generate_closure(algebra, n, &gens, budget)?;
    Ok(TermOpSpace { k, size, closure })
}
