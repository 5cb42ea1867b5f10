//! Profile-closure decision procedure for height-one conditions.
//!
//! For a symbol `t` of arity `r` that occurs with patterns `P_1..P_q`, the
//! tuple of term operations `(t(P_1), ..., t(P_q))` (each a table over
//! `A^k`) ranges exactly over the subpower of `A^(q |A|^k)` generated by the
//! `r` argument profiles, the `j`-th being `v -> v[P_l[j]]` in block `l`.
//! Identities glue blocks of different symbols together; the search
//! backtracks over the symbols in declaration order and the candidates of
//! each in closure insertion order, so the first solution found is the
//! lexicographically least one.

use std::collections::HashMap;

use crate::algebra::{all_tuples, Element, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::subpower::{generate_closure, projection_table, Budget, ClosureState};
use crate::term::Term;

use super::schema::{self, ConditionSchema, Side};
use super::Witness;

pub const DEFAULT_MAX_NODES: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveBudget {
    pub closure: Budget,
    /// Candidate checks allowed during backtracking.
    pub max_nodes: u64,
}

impl Default for SolveBudget {
    fn default() -> Self {
        SolveBudget {
            closure: Budget::default(),
            max_nodes: DEFAULT_MAX_NODES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveOutcome {
    Sat(Witness),
    Unsat,
    Exhausted(String),
}

impl SolveOutcome {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveOutcome::Sat(_))
    }

    pub fn is_unsat(&self) -> bool {
        matches!(self, SolveOutcome::Unsat)
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            SolveOutcome::Sat(w) => Some(w),
            _ => None,
        }
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

struct SymbolSpace {
    symbol: usize,
    /// Class of each distinct pattern, in pattern order.
    classes: Vec<usize>,
    closure: ClosureState,
    /// Per pattern: segment value -> candidate ids in insertion order.
    index: Vec<HashMap<Vec<Element>, Vec<usize>>>,
}

struct Search<'a> {
    spaces: &'a [SymbolSpace],
    seg: usize,
    values: Vec<Option<Vec<Element>>>,
    chosen: Vec<usize>,
    nodes: u64,
    max_nodes: u64,
}

enum Step {
    Found,
    Dead,
    OutOfBudget,
}

impl Search<'_> {
    fn run(&mut self, level: usize) -> Step {
        if level == self.spaces.len() {
            return Step::Found;
        }
        let space = &self.spaces[level];
        let seg = self.seg;
        let pinned = space
            .classes
            .iter()
            .enumerate()
            .find_map(|(p, &c)| self.values[c].as_ref().map(|v| (p, v.clone())));
        let candidates: Vec<usize> = match pinned {
            Some((p, v)) => space.index[p].get(&v).cloned().unwrap_or_default(),
            None => (0..space.closure.len()).collect(),
        };
        for id in candidates {
            self.nodes += 1;
            if self.nodes > self.max_nodes {
                return Step::OutOfBudget;
            }
            let tuple = space.closure.tuple(id);
            let mut assigned = Vec::new();
            let mut ok = true;
            for (p, &c) in space.classes.iter().enumerate() {
                let segment = &tuple[p * seg..(p + 1) * seg];
                match &self.values[c] {
                    Some(v) if v.as_slice() != segment => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        self.values[c] = Some(segment.to_vec());
                        assigned.push(c);
                    }
                }
            }
            if ok {
                self.chosen.push(id);
                match self.run(level + 1) {
                    Step::Dead => {
                        self.chosen.pop();
                    }
                    done => return done,
                }
            }
            for c in assigned {
                self.values[c] = None;
            }
        }
        Step::Dead
    }
}

/// Decides whether `algebra` has terms satisfying `schema`.
///
/// `Unsat` is only returned after the profile search space was exhausted;
/// any budget cap yields `Exhausted` instead.
pub fn solve_condition(
    algebra: &FiniteAlgebra,
    schema: &ConditionSchema,
    budget: SolveBudget,
) -> Result<SolveOutcome> {
    schema.validate()?;
    if !algebra.is_idempotent() {
        return Err(Error::NotIdempotent);
    }
    let size = algebra.size();
    let k = schema.var_count();
    let seg = size.pow(k as u32);
    let var_tables: Vec<Vec<Element>> = (0..k).map(|v| projection_table(size, k, v)).collect();

    // Distinct patterns per symbol, in order of first occurrence.
    let mut patterns: Vec<Vec<Vec<usize>>> = vec![Vec::new(); schema.symbols.len()];
    let slot_of = |symbol: usize, pattern: &Vec<usize>, patterns: &mut Vec<Vec<Vec<usize>>>| {
        let list = &mut patterns[symbol];
        match list.iter().position(|p| p == pattern) {
            Some(i) => (symbol, i),
            None => {
                list.push(pattern.clone());
                (symbol, list.len() - 1)
            }
        }
    };
    let mut edges = Vec::new();
    let mut fixed = Vec::new();
    for id in &schema.identities {
        match (&id.lhs, &id.rhs) {
            (
                Side::App {
                    symbol: a,
                    pattern: pa,
                },
                Side::App {
                    symbol: b,
                    pattern: pb,
                },
            ) => {
                let sa = slot_of(*a, pa, &mut patterns);
                let sb = slot_of(*b, pb, &mut patterns);
                edges.push((sa, sb));
            }
            (Side::App { symbol, pattern }, Side::Var(v))
            | (Side::Var(v), Side::App { symbol, pattern }) => {
                let s = slot_of(*symbol, pattern, &mut patterns);
                fixed.push((s, var_tables[*v].clone()));
            }
            (Side::Var(a), Side::Var(b)) => {
                if a != b && size > 1 {
                    return Ok(SolveOutcome::Unsat);
                }
            }
        }
    }
    for pin in &schema.pins {
        for i in 0..patterns[pin.symbol].len() {
            let var = patterns[pin.symbol][i][pin.projection];
            fixed.push(((pin.symbol, i), var_tables[var].clone()));
        }
    }

    let mut offsets = vec![0; schema.symbols.len() + 1];
    for s in 0..schema.symbols.len() {
        offsets[s + 1] = offsets[s] + patterns[s].len();
    }
    let slot_id = |(s, i): (usize, usize)| offsets[s] + i;
    let mut uf = UnionFind((0..offsets[schema.symbols.len()]).collect());
    for (a, b) in edges {
        uf.union(slot_id(a), slot_id(b));
    }
    let mut values: Vec<Option<Vec<Element>>> = vec![None; uf.0.len()];
    for (slot, table) in fixed {
        let c = uf.find(slot_id(slot));
        match &values[c] {
            Some(v) if *v != table => return Ok(SolveOutcome::Unsat),
            _ => values[c] = Some(table),
        }
    }

    let mut spaces = Vec::new();
    for (s, decl) in schema.symbols.iter().enumerate() {
        if patterns[s].is_empty() {
            continue;
        }
        let gens: Vec<Vec<Element>> = (0..decl.arity)
            .map(|j| {
                patterns[s]
                    .iter()
                    .flat_map(|p| var_tables[p[j]].iter().copied())
                    .collect()
            })
            .collect();
        let n = patterns[s].len() * seg;
        let closure = match generate_closure(algebra, n, &gens, budget.closure) {
            Ok(c) => c,
            Err(Error::Exhausted(msg)) => {
                return Ok(SolveOutcome::Exhausted(format!(
                    "profile closure of `{}`: {msg}",
                    decl.name
                )))
            }
            Err(e) => return Err(e),
        };
        let mut index = vec![HashMap::<Vec<Element>, Vec<usize>>::new(); patterns[s].len()];
        for id in 0..closure.len() {
            let t = closure.tuple(id);
            for (p, map) in index.iter_mut().enumerate() {
                map.entry(t[p * seg..(p + 1) * seg].to_vec())
                    .or_default()
                    .push(id);
            }
        }
        let classes = (0..patterns[s].len())
            .map(|i| uf.find(slot_id((s, i))))
            .collect();
        spaces.push(SymbolSpace {
            symbol: s,
            classes,
            closure,
            index,
        });
    }

    let mut search = Search {
        spaces: &spaces,
        seg,
        values,
        chosen: Vec::new(),
        nodes: 0,
        max_nodes: budget.max_nodes,
    };
    match search.run(0) {
        Step::Dead => return Ok(SolveOutcome::Unsat),
        Step::OutOfBudget => {
            return Ok(SolveOutcome::Exhausted(format!(
                "search exceeded {} candidate checks",
                budget.max_nodes
            )))
        }
        Step::Found => {}
    }

    let mut from_search: HashMap<usize, Term> = HashMap::new();
    for (space, &id) in spaces.iter().zip(&search.chosen) {
        from_search.insert(space.symbol, space.closure.term_of(id));
    }
    let mut witness = Witness::default();
    for (s, decl) in schema.symbols.iter().enumerate() {
        let pin = schema.pins.iter().find(|p| p.symbol == s);
        let term = match (pin, from_search.remove(&s)) {
            (Some(p), _) => Term::var(p.projection),
            (None, Some(t)) => t,
            (None, None) => Term::var(0),
        };
        witness.insert(decl.name.clone(), term);
    }
    if !verify_solution(algebra, schema, &witness)? {
        return Err(Error::Precondition(
            "internal error: solver produced a witness that fails verification".into(),
        ));
    }
    Ok(SolveOutcome::Sat(witness))
}

pub fn find_grid_terms(
    algebra: &FiniteAlgebra,
    n: usize,
    m: usize,
    budget: SolveBudget,
) -> Result<SolveOutcome> {
    solve_condition(algebra, &schema::grid(n, m)?, budget)
}

/// Checks every identity under all `|A|^k` substitutions and every pin over
/// all of `A^arity`.
pub fn verify_solution(
    algebra: &FiniteAlgebra,
    schema: &ConditionSchema,
    witness: &Witness,
) -> Result<bool> {
    schema.validate()?;
    let mut terms = Vec::with_capacity(schema.symbols.len());
    for decl in &schema.symbols {
        let t = witness.get(&decl.name).ok_or_else(|| {
            Error::InvalidSchema(format!("witness has no term for symbol `{}`", decl.name))
        })?;
        algebra.check_term(t)?;
        if let Some(v) = t.max_var() {
            if v >= decl.arity {
                return Err(Error::ArityMismatch {
                    op: decl.name.clone(),
                    expected: decl.arity,
                    found: v + 1,
                });
            }
        }
        terms.push(t);
    }
    let size = algebra.size();
    let eval_side = |side: &Side, v: &[Element]| -> Result<Element> {
        match side {
            Side::Var(i) => Ok(v[*i]),
            Side::App { symbol, pattern } => {
                let args: Vec<Element> = pattern.iter().map(|&p| v[p]).collect();
                algebra.eval_term(terms[*symbol], &args)
            }
        }
    };
    for v in all_tuples(size, schema.var_count()) {
        for id in &schema.identities {
            if eval_side(&id.lhs, &v)? != eval_side(&id.rhs, &v)? {
                return Ok(false);
            }
        }
    }
    for pin in &schema.pins {
        let arity = schema.symbols[pin.symbol].arity;
        for args in all_tuples(size, arity) {
            if algebra.eval_term(terms[pin.symbol], &args)? != args[pin.projection] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebras;
    use crate::maltsev::{build_condition, SchemaName};

    fn solve(a: &FiniteAlgebra, name: SchemaName, params: &[usize]) -> SolveOutcome {
        let s = build_condition(name, params).unwrap();
        solve_condition(a, &s, SolveBudget::default()).unwrap()
    }

    #[test]
    fn semilattice_three_plus_three() {
        let s = algebras::meet_semilattice();
        let out = solve(&s, SchemaName::M1PlusM2, &[3, 3]);
        let w = out.witness().expect("sat");
        assert_eq!(w.len(), 3);
        let schema = build_condition(SchemaName::M1PlusM2, &[3, 3]).unwrap();
        assert!(verify_solution(&s, &schema, w).unwrap());
    }

    #[test]
    fn affine_module_has_no_m1_plus_m2_terms() {
        let z = algebras::z2_affine();
        for m1 in 1..=3 {
            for m2 in 1..=3 {
                assert!(
                    solve(&z, SchemaName::M1PlusM2, &[m1, m2]).is_unsat(),
                    "({m1}+{m2})"
                );
            }
        }
    }

    #[test]
    fn projection_algebra() {
        let p = algebras::left_projection();
        assert!(solve(&p, SchemaName::M1PlusM2, &[2, 2]).is_unsat());
        assert!(solve(&p, SchemaName::Wnu, &[3]).is_unsat());
    }

    #[test]
    fn verify_examples() {
        let s = algebras::meet_semilattice();
        let z = algebras::z2_affine();
        let wnu3 = build_condition(SchemaName::Wnu, &[3]).unwrap();
        let mut w = Witness::default();
        w.insert("t", "(meet x0 (meet x1 x2))".parse().unwrap());
        assert!(verify_solution(&s, &wnu3, &w).unwrap());
        let mut w = Witness::default();
        w.insert("t", "(m x0 x1 x2)".parse().unwrap());
        assert!(verify_solution(&z, &wnu3, &w).unwrap());
        let sig = build_condition(SchemaName::Siggers, &[]).unwrap();
        let mut w = Witness::default();
        w.insert("s", Term::var(0));
        assert!(!verify_solution(&s, &sig, &w).unwrap());
        let mut w = Witness::default();
        w.insert("s", Term::var(4));
        assert!(matches!(
            verify_solution(&s, &sig, &w),
            Err(Error::ArityMismatch { .. })
        ));
    }

    #[test]
    fn near_unanimity() {
        assert!(solve(&algebras::majority2(), SchemaName::Nu, &[3]).is_sat());
        assert!(solve(&algebras::dual_discriminator3(), SchemaName::Nu, &[3]).is_sat());
        assert!(solve(&algebras::meet_semilattice(), SchemaName::Nu, &[3]).is_unsat());
    }

    #[test]
    fn grid_terms() {
        let s = algebras::meet_semilattice();
        assert!(find_grid_terms(&s, 1, 2, SolveBudget::default())
            .unwrap()
            .is_sat());
        let z = algebras::z2_affine();
        assert!(find_grid_terms(&z, 1, 2, SolveBudget::default())
            .unwrap()
            .is_unsat());
    }

    #[test]
    fn bracket_terms_pinned() {
        let lat = algebras::lattice2();
        let out = solve(&lat, SchemaName::Bracket, &[2, 1, 4, 3]);
        let w = out.witness().expect("sat");
        assert_eq!(w.get("b1"), Some(&Term::var(0)));
        assert_eq!(w.get("b4"), Some(&Term::var(2)));
        assert!(solve(
            &algebras::meet_semilattice(),
            SchemaName::Bracket,
            &[2, 1, 4, 3]
        )
        .is_unsat());
    }

    #[test]
    fn tight_budget_is_exhausted_not_unsat() {
        let z = algebras::z2_affine();
        let s = build_condition(SchemaName::M1PlusM2, &[3, 3]).unwrap();
        let b = SolveBudget {
            closure: Budget {
                max_tuples: 4,
                ..Budget::default()
            },
            ..SolveBudget::default()
        };
        assert!(matches!(
            solve_condition(&z, &s, b).unwrap(),
            SolveOutcome::Exhausted(_)
        ));
        let b = SolveBudget {
            max_nodes: 1,
            ..SolveBudget::default()
        };
        assert!(matches!(
            solve_condition(&z, &s, b).unwrap(),
            SolveOutcome::Exhausted(_)
        ));
    }

    #[test]
    fn rejects_non_idempotent() {
        let c = FiniteAlgebra::from_fn(2, vec![("c", 2, &|_: &[Element]| 0)]).unwrap();
        let s = build_condition(SchemaName::Wnu, &[3]).unwrap();
        assert_eq!(
            solve_condition(&c, &s, SolveBudget::default()),
            Err(Error::NotIdempotent)
        );
    }
}
