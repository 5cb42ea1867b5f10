//! Terms witnessing that a polynomial is the summary of a tuple generated
//! from unit tuples, their transport along expansion steps, and the
//! extraction of `(n-1) x n x m'` grid terms from a certificate of `n-1 ~ n`.
//!
//! A witness is a term over the grid operations `f1..fn`, `g1..g{n+1}` in
//! variables `x_c`, one per position of the infinite power. Position `c` of
//! the generated tuple is the term evaluated with `x_c = 1` and every other
//! variable `0`, computed symbolically in the free algebra: a value is zero,
//! a word in the letters `b_ijk`, or something else.
//!
//! Every expansion at the front of a word wraps the whole witness, so
//! witnesses grow with the product of the arities of those expansions. They
//! are kept as hash-consed DAGs in an index arena, where each transformation
//! copies only the nodes above the variable it moves.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::algebra::{all_tuples, Element, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::maltsev::{grid_position, Witness};
use crate::term::Term;

use super::cert::ExpansionStep;
use super::grid::{extract_sums, grid_equations, grid_indices, grid_symbol};
use super::poly::{Polynomial, Word};
use super::Certificate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Op {
    Row(usize),
    Column(usize),
}

#[derive(Debug, Clone, Copy)]
struct Grid {
    n: usize,
    m: usize,
}

impl Grid {
    fn new(n: usize, m: usize) -> Result<Grid> {
        if n < 2 || m == 0 {
            return Err(Error::InvalidParameter(format!(
                "witnesses need n >= 2 and m >= 1, got n = {n}, m = {m}"
            )));
        }
        Ok(Grid { n, m })
    }

    fn op(&self, name: &str) -> Result<Op> {
        let index = |s: &str| s.parse::<usize>().ok();
        let op = match name.split_at_checked(1) {
            Some(("f", i)) => index(i).filter(|&i| (1..=self.n).contains(&i)).map(Op::Row),
            Some(("g", j)) => index(j)
                .filter(|&j| (1..=self.n + 1).contains(&j))
                .map(Op::Column),
            _ => None,
        };
        op.ok_or_else(|| Error::UnknownOperation(name.to_string()))
    }

    fn for_equation(&self, equation: usize) -> Result<Op> {
        match equation {
            e if e <= self.n => Ok(Op::Column(e + 1)),
            e if e <= 2 * self.n => Ok(Op::Row(e - self.n)),
            e => Err(Error::InvalidParameter(format!(
                "equation {e} does not exist"
            ))),
        }
    }

    fn name(&self, op: Op) -> String {
        match op {
            Op::Row(i) => format!("f{i}"),
            Op::Column(j) => format!("g{j}"),
        }
    }

    fn arity(&self, op: Op) -> usize {
        match op {
            Op::Row(_) => (self.n + 1) * self.m,
            Op::Column(_) => self.n * self.m,
        }
    }

    /// `b_ijk` obtained by putting `1` at argument `l`.
    fn letter(&self, op: Op, l: usize) -> u32 {
        let (a, k) = (l / self.m + 1, l % self.m + 1);
        match op {
            Op::Row(i) => grid_symbol(self.n, self.m, i, a, k),
            Op::Column(j) => grid_symbol(self.n, self.m, a, j, k),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Node {
    Var(usize),
    App { op: Op, start: usize, len: usize },
}

/// Hash-consed term nodes. Arguments are created before the node using
/// them, so index order is a bottom-up order.
struct Dag {
    grid: Grid,
    nodes: Vec<Node>,
    args: Vec<u32>,
    vars: HashMap<usize, u32>,
    apps: HashMap<(Op, Vec<u32>), u32>,
}

impl Dag {
    fn new(grid: Grid) -> Dag {
        Dag {
            grid,
            nodes: Vec::new(),
            args: Vec::new(),
            vars: HashMap::new(),
            apps: HashMap::new(),
        }
    }

    fn var(&mut self, d: usize) -> u32 {
        if let Some(&v) = self.vars.get(&d) {
            return v;
        }
        let v = self.nodes.len() as u32;
        self.nodes.push(Node::Var(d));
        self.vars.insert(d, v);
        v
    }

    fn app(&mut self, op: Op, args: Vec<u32>) -> u32 {
        if let Some(&v) = self.apps.get(&(op, args.clone())) {
            return v;
        }
        let v = self.nodes.len() as u32;
        self.nodes.push(Node::App {
            op,
            start: self.args.len(),
            len: args.len(),
        });
        self.args.extend_from_slice(&args);
        self.apps.insert((op, args), v);
        v
    }

    fn children(&self, v: u32) -> &[u32] {
        match self.nodes[v as usize] {
            Node::Var(_) => &[],
            Node::App { start, len, .. } => &self.args[start..start + len],
        }
    }

    fn from_term(grid: Grid, t: &Term) -> Result<(Dag, u32)> {
        fn go(dag: &mut Dag, t: &Term, seen: &mut HashMap<usize, u32>) -> Result<u32> {
            let (op, args) = match t {
                Term::Var(d) => return Ok(dag.var(*d)),
                Term::App { op, args } => (op, args),
            };
            let key = args.as_ptr() as usize;
            if let Some(&v) = seen.get(&key) {
                return Ok(v);
            }
            let h = dag.grid.op(op)?;
            let arity = dag.grid.arity(h);
            if args.len() != arity {
                return Err(Error::ArityMismatch {
                    op: op.to_string(),
                    expected: arity,
                    found: args.len(),
                });
            }
            let ids = args
                .iter()
                .map(|a| go(dag, a, seen))
                .collect::<Result<Vec<_>>>()?;
            let v = dag.app(h, ids);
            seen.insert(key, v);
            Ok(v)
        }
        let mut dag = Dag::new(grid);
        let root = go(&mut dag, t, &mut HashMap::new())?;
        Ok((dag, root))
    }

    /// Nodes below `root`, in bottom-up order.
    fn reachable(&self, root: u32) -> Vec<u32> {
        let mut mark = vec![false; root as usize + 1];
        mark[root as usize] = true;
        for v in (0..=root).rev() {
            if mark[v as usize] {
                for &c in self.children(v) {
                    mark[c as usize] = true;
                }
            }
        }
        (0..=root).filter(|&v| mark[v as usize]).collect()
    }

    fn positions(&self, order: &[u32]) -> Vec<usize> {
        let mut out: Vec<usize> = order
            .iter()
            .filter_map(|&v| match self.nodes[v as usize] {
                Node::Var(d) => Some(d),
                Node::App { .. } => None,
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// The term at `root` with variables renamed by `rename`.
    fn to_term(&self, root: u32, rename: &dyn Fn(usize) -> usize) -> Term {
        let order = self.reachable(root);
        let mut built: HashMap<u32, Term> = HashMap::with_capacity(order.len());
        for &v in &order {
            let t = match self.nodes[v as usize] {
                Node::Var(d) => Term::var(rename(d)),
                Node::App { op, .. } => Term::app(
                    self.grid.name(op),
                    self.children(v).iter().map(|c| built[c].clone()).collect(),
                ),
            };
            built.insert(v, t);
        }
        built.remove(&root).expect("root is reachable")
    }

    /// Symbolic value of every position below `root`.
    fn words(&self, root: u32) -> Result<BTreeMap<usize, Word>> {
        let order = self.reachable(root);
        let mut words = WordTable::default();
        let mut value = vec![ZERO; root as usize + 1];
        let mut at = Vec::new();
        let mut out = BTreeMap::new();
        for d in self.positions(&order) {
            for &v in &order {
                value[v as usize] = match self.nodes[v as usize] {
                    Node::Var(x) if x == d => EMPTY,
                    Node::Var(_) => ZERO,
                    Node::App { op, .. } => {
                        at.clear();
                        at.extend(self.children(v).iter().map(|&c| value[c as usize]));
                        words.combine(self.grid, op, &at)
                    }
                };
            }
            match value[root as usize] {
                ZERO => {}
                MIXED => {
                    return Err(Error::Precondition(format!(
                        "position {d} of the witness does not evaluate to a word"
                    )))
                }
                w => {
                    out.insert(d, words.word(w));
                }
            }
        }
        Ok(out)
    }

    /// Whether each node contains `x_c`.
    fn containing(&self, c: usize) -> Vec<bool> {
        let mut out = vec![false; self.nodes.len()];
        for v in 0..self.nodes.len() {
            out[v] = match self.nodes[v] {
                Node::Var(d) => d == c,
                Node::App { .. } => self.children(v as u32).iter().any(|&a| out[a as usize]),
            };
        }
        out
    }
}

const ZERO: u32 = 0;
const EMPTY: u32 = 1;
const MIXED: u32 = u32::MAX;

/// Words interned as `letter * tail` chains; ids 0 and 1 are zero and the
/// empty word.
struct WordTable {
    cons: Vec<(u32, u32)>,
    ids: HashMap<(u32, u32), u32>,
}

impl Default for WordTable {
    fn default() -> WordTable {
        WordTable {
            cons: vec![(0, 0), (0, 0)],
            ids: HashMap::new(),
        }
    }
}

impl WordTable {
    fn prepend(&mut self, letter: u32, tail: u32) -> u32 {
        let next = self.cons.len() as u32;
        let id = *self.ids.entry((letter, tail)).or_insert(next);
        if id == next {
            self.cons.push((letter, tail));
        }
        id
    }

    fn word(&self, mut id: u32) -> Word {
        let mut out = Word::new();
        while id != EMPTY {
            let (letter, tail) = self.cons[id as usize];
            out.push(letter);
            id = tail;
        }
        out
    }

    /// `h(w_1..w_k)`: zero if all are zero, `w` if all equal a word `w`,
    /// `b w` if only argument `l` is nonzero and `b` is its letter.
    fn combine(&mut self, grid: Grid, op: Op, at: &[u32]) -> u32 {
        let mut nonzero = at.iter().enumerate().filter(|(_, &w)| w != ZERO);
        let Some((l, &first)) = nonzero.next() else {
            return ZERO;
        };
        if first == MIXED {
            return MIXED;
        }
        match nonzero.next() {
            None => self.prepend(grid.letter(op, l), first),
            Some(_) if at.iter().all(|&w| w == first) => first,
            Some(_) => MIXED,
        }
    }
}

/// One expansion of the word at position `c`, moving `x_c` to the fresh
/// variables `x_{fresh + l}`.
struct Transform<'a> {
    dag: &'a mut Dag,
    contains: Vec<bool>,
    c: usize,
    op: Op,
    fresh: usize,
    renamed: Vec<HashMap<u32, u32>>,
    done: HashMap<(u32, usize), u32>,
}

impl Transform<'_> {
    fn rename(&mut self, v: u32, l: usize) -> u32 {
        if !self.contains[v as usize] {
            return v;
        }
        let op = match self.dag.nodes[v as usize] {
            Node::Var(_) => return self.dag.var(self.fresh + l),
            Node::App { op, .. } => op,
        };
        if let Some(&r) = self.renamed[l].get(&v) {
            return r;
        }
        let args = self.dag.children(v).to_vec();
        let args = args.into_iter().map(|a| self.rename(a, l)).collect();
        let r = self.dag.app(op, args);
        self.renamed[l].insert(v, r);
        r
    }

    fn expand(&mut self, v: u32, split: usize) -> Result<u32> {
        if split == 0 {
            // h applied to copies differing only in where the suffix sits.
            let k = self.dag.grid.arity(self.op);
            let copies = (0..k).map(|l| self.rename(v, l)).collect();
            return Ok(self.dag.app(self.op, copies));
        }
        if let Some(&r) = self.done.get(&(v, split)) {
            return Ok(r);
        }
        let Node::App { op, .. } = self.dag.nodes[v as usize] else {
            return Err(Error::Precondition(
                "split exceeds the word at a variable".into(),
            ));
        };
        let args = self.dag.children(v).to_vec();
        let carrying: Vec<usize> = (0..args.len())
            .filter(|&l| self.contains[args[l] as usize])
            .collect();
        let mut new_args = args.clone();
        if carrying.len() == args.len() {
            // Idempotency: the position is copied from every argument.
            for a in new_args.iter_mut() {
                *a = self.expand(*a, split)?;
            }
        } else if let [l] = carrying[..] {
            // The position gains the letter of argument `l`.
            new_args[l] = self.expand(args[l], split - 1)?;
        } else {
            return Err(Error::Precondition(format!(
                "position {} is neither copied nor extended by `{}`",
                self.c,
                self.dag.grid.name(op)
            )));
        }
        let r = self.dag.app(op, new_args);
        self.done.insert((v, split), r);
        Ok(r)
    }
}

/// Expands the word at the lowest position carrying the chosen summand and
/// updates the map of position words to match. `words` must be the value
/// of `root`.
fn transform_step(
    dag: &mut Dag,
    root: u32,
    words: &mut BTreeMap<usize, Word>,
    step: &ExpansionStep,
) -> Result<u32> {
    let grid = dag.grid;
    let summary = summary_of(words);
    let word = summary.words().get(step.summand).ok_or_else(|| {
        Error::Precondition(format!(
            "summand {} out of range for {} summands",
            step.summand,
            summary.len()
        ))
    })?;
    if step.split > word.len() {
        return Err(Error::Precondition(format!(
            "split {} exceeds word length {}",
            step.split,
            word.len()
        )));
    }
    let op = grid.for_equation(step.equation)?;
    let c = *words
        .iter()
        .find(|(_, w)| *w == word)
        .expect("summand occurs")
        .0;
    let fresh = words.keys().next_back().map_or(0, |&d| d + 1);
    let k = grid.arity(op);
    let contains = dag.containing(c);
    let mut t = Transform {
        dag,
        contains,
        c,
        op,
        fresh,
        renamed: vec![HashMap::new(); k],
        done: HashMap::new(),
    };
    let out = t.expand(root, step.split)?;
    let word = words.remove(&c).expect("position exists");
    let (u, v) = word.split_at(step.split);
    for l in 0..k {
        let mut w = u.to_vec();
        w.push(grid.letter(op, l));
        w.extend_from_slice(v);
        words.insert(fresh + l, w);
    }
    Ok(out)
}

fn summary_of(words: &BTreeMap<usize, Word>) -> Polynomial {
    Polynomial::from_words(words.values().cloned().collect())
}

/// Word at every nonzero position of the tuple generated by `term`, for the
/// grid operations of `n x (n+1) x m` grid terms.
pub fn position_words(term: &Term, n: usize, m: usize) -> Result<BTreeMap<usize, Word>> {
    let (dag, root) = Dag::from_term(Grid::new(n, m)?, term)?;
    dag.words(root)
}

/// Sum of the nonzero positions of the tuple generated by `term`.
pub fn summarize(term: &Term, n: usize, m: usize) -> Result<Polynomial> {
    Ok(summary_of(&position_words(term, n, m)?))
}

/// Transports a witness of `summary` along one expansion step: the result
/// generates a tuple whose summary is the expanded polynomial.
///
/// If the expanded word is `u v` with `u` empty, the equation's operation is
/// applied to copies of the witness that differ only in the variable
/// carrying `v`. Otherwise the transformation descends into the arguments:
/// all of them when the position is copied by idempotency, and only the one
/// carrying the rest of the word when a letter is prepended.
pub fn witness_transform(
    term: &Term,
    summary: &Polynomial,
    step: &ExpansionStep,
    n: usize,
    m: usize,
) -> Result<Term> {
    let (mut dag, root) = Dag::from_term(Grid::new(n, m)?, term)?;
    let mut words = dag.words(root)?;
    if &summary_of(&words) != summary {
        return Err(Error::Precondition(
            "witness does not evaluate to the given summary".into(),
        ));
    }
    let out = transform_step(&mut dag, root, &mut words, step)?;
    Ok(dag.to_term(out, &|d| d))
}

type Built = (Dag, u32, BTreeMap<usize, Word>);

fn build_witness(grid: Grid, steps: &[ExpansionStep]) -> Result<Built> {
    let mut dag = Dag::new(grid);
    let mut root = dag.var(0);
    let mut words = BTreeMap::from([(0, Word::new())]);
    for step in steps {
        root = transform_step(&mut dag, root, &mut words, step)?;
    }
    Ok((dag, root, words))
}

/// Witness for the polynomial reached from `1` by `steps`, starting from the
/// single variable `x0`.
pub fn witness_for_steps(steps: &[ExpansionStep], n: usize, m: usize) -> Result<Term> {
    let (dag, root, _) = build_witness(Grid::new(n, m)?, steps)?;
    Ok(dag.to_term(root, &|d| d))
}

/// Number of distinct application nodes of a shared term.
pub fn shared_size(term: &Term) -> usize {
    fn walk(t: &Term, seen: &mut HashSet<usize>) {
        if let Term::App { args, .. } = t {
            if seen.insert(args.as_ptr() as usize) {
                args.iter().for_each(|a| walk(a, seen));
            }
        }
    }
    let mut seen = HashSet::new();
    walk(term, &mut seen);
    seen.len()
}

/// The grid operations as tables over an algebra, from the terms defining
/// them.
struct Tables {
    size: usize,
    tables: HashMap<Op, Vec<Element>>,
}

impl Tables {
    fn new(algebra: &FiniteAlgebra, grid_terms: &Witness, grid: Grid) -> Result<Tables> {
        let ops = (1..=grid.n)
            .map(Op::Row)
            .chain((1..=grid.n + 1).map(Op::Column));
        let mut tables = HashMap::new();
        for op in ops {
            let name = grid.name(op);
            let term = grid_terms
                .get(&name)
                .ok_or_else(|| Error::Precondition(format!("grid terms lack `{name}`")))?;
            let table = all_tuples(algebra.size(), grid.arity(op))
                .map(|args| algebra.eval_term(term, &args))
                .collect::<Result<Vec<_>>>()?;
            tables.insert(op, table);
        }
        Ok(Tables {
            size: algebra.size(),
            tables,
        })
    }

    fn apply(&self, op: Op, args: impl Iterator<Item = Element>) -> Element {
        let index = args.fold(0usize, |acc, a| acc * self.size + a as usize);
        self.tables[&op][index]
    }

    /// Value of `root` under a valuation of its variables; `order` is the
    /// bottom-up order of the nodes below `root`.
    fn eval(&self, dag: &Dag, order: &[u32], root: u32, val: &dyn Fn(usize) -> Element) -> Element {
        let mut value = vec![0 as Element; root as usize + 1];
        for &v in order {
            value[v as usize] = match dag.nodes[v as usize] {
                Node::Var(d) => val(d),
                Node::App { op, .. } => {
                    self.apply(op, dag.children(v).iter().map(|&c| value[c as usize]))
                }
            };
        }
        value[root as usize]
    }

    /// Element of the word `b_1 ... b_r`, the composite of the unary maps
    /// `b_ijk(t) = f_i(z0, .., t at (j,k), .., z0)` applied to `z1`.
    fn word(&self, grid: Grid, word: &[u32], (z0, z1): (Element, Element)) -> Element {
        let mut value = z1;
        for &s in word.iter().rev() {
            let (i, j, k) = grid_indices(grid.n, grid.m, s);
            let at = grid_position(grid.m, j, k);
            let arity = grid.arity(Op::Row(i));
            value = self.apply(
                Op::Row(i),
                (0..arity).map(|p| if p == at { value } else { z0 }),
            );
        }
        value
    }
}

/// Evaluates `term` in `algebra` coordinatewise over the unit tuples, with
/// the grid operations interpreted by `grid_terms`, and compares the nonzero
/// entries with the elements of the words of `summary`. Every pair of
/// elements plays the roles of `0` and `1`.
pub fn check_witness_in_algebra(
    algebra: &FiniteAlgebra,
    grid_terms: &Witness,
    n: usize,
    m: usize,
    term: &Term,
    summary: &Polynomial,
) -> Result<bool> {
    let grid = Grid::new(n, m)?;
    let tables = Tables::new(algebra, grid_terms, grid)?;
    let (dag, root) = Dag::from_term(grid, term)?;
    let order = dag.reachable(root);
    let positions = dag.positions(&order);
    for z in all_tuples(algebra.size(), 2) {
        let (z0, z1) = (z[0], z[1]);
        let mut got: Vec<Element> = positions
            .iter()
            .map(|&c| tables.eval(&dag, &order, root, &|d| if d == c { z1 } else { z0 }))
            .collect();
        let mut want: Vec<Element> = summary
            .words()
            .iter()
            .map(|w| tables.word(grid, w, (z0, z1)))
            .collect();
        got.retain(|&e| e != z0);
        want.retain(|&e| e != z0);
        got.sort_unstable();
        want.sort_unstable();
        if got != want {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `(n-1) x n x m'` grid terms built from the operations of `n x (n+1) x m`
/// grid terms.
#[derive(Debug, Clone)]
pub struct DecreasedTerms {
    /// Rows of the new grid, one less than the original.
    pub n: usize,
    /// Depth of the original grid.
    pub m: usize,
    pub m_prime: usize,
    /// `f1..f{n-1}` and `g1..gn`, as terms over the original `f` and `g`.
    pub terms: Witness,
}

impl DecreasedTerms {
    /// The terms with shared subterms named once: lines `t<k> = (op ...)`
    /// in dependency order, then `<symbol> = <operand>` for each symbol.
    /// Printed as plain trees the terms are exponentially large.
    pub fn to_shared_text(&self) -> String {
        fn name(t: &Term, ids: &mut HashMap<usize, usize>, out: &mut String) -> String {
            let Term::App { op, args } = t else {
                return t.to_string();
            };
            let key = args.as_ptr() as usize;
            if let Some(id) = ids.get(&key) {
                return format!("t{id}");
            }
            let parts: Vec<String> = args.iter().map(|a| name(a, ids, out)).collect();
            let id = ids.len();
            out.push_str(&format!("t{id} = ({op} {})\n", parts.join(" ")));
            ids.insert(key, id);
            format!("t{id}")
        }
        let mut ids = HashMap::new();
        let mut out = String::new();
        let mut roots = Vec::new();
        for (symbol, term) in self.terms.iter() {
            roots.push(format!("{symbol} = {}\n", name(term, &mut ids, &mut out)));
        }
        out.extend(roots);
        out
    }
}

/// Builds `(n-1) x n x m'` grid terms from a certificate of `n-1 ~ n`.
///
/// Each part `x_i`, `y_j` of the common expansion gets a witness from its
/// own steps. Equal words of `x_i` and `y_j` are paired into entries
/// `z_ijk`; the position of each word becomes argument `(j,k)` of `f'_i` and
/// `(i,k)` of `g'_j`, and `m'` is the largest number of pairs in one cell.
/// Every variable of a witness sits at a nonzero position, so each cell
/// either holds the same word on both sides or is zero on both.
pub fn assemble_decreased_terms(cert: &Certificate, n: usize, m: usize) -> Result<DecreasedTerms> {
    let eqs = grid_equations(n, m)?;
    let grid = Grid::new(n, m)?;
    let parts = extract_sums(cert, &eqs)?;
    let build = |steps: &[Vec<ExpansionStep>]| -> Result<Vec<Built>> {
        steps.iter().map(|s| build_witness(grid, s)).collect()
    };
    let xs = build(&parts.x_steps)?;
    let ys = build(&parts.y_steps)?;

    // word -> positions in the x parts and in the y parts
    type Owners = (Vec<(usize, usize)>, Vec<(usize, usize)>);
    let mut by_word: BTreeMap<&Word, Owners> = BTreeMap::new();
    for (i, (_, _, words)) in xs.iter().enumerate() {
        for (&d, w) in words {
            by_word.entry(w).or_default().0.push((i, d));
        }
    }
    for (j, (_, _, words)) in ys.iter().enumerate() {
        for (&d, w) in words {
            by_word.entry(w).or_default().1.push((j, d));
        }
    }
    let mut load = vec![vec![0usize; n]; n - 1];
    let mut x_slot: Vec<HashMap<usize, (usize, usize)>> = vec![HashMap::new(); n - 1];
    let mut y_slot: Vec<HashMap<usize, (usize, usize)>> = vec![HashMap::new(); n];
    for (w, (left, right)) in &by_word {
        if left.len() != right.len() {
            return Err(Error::Precondition(format!(
                "a word of length {} occurs {} times on the left and {} on the right",
                w.len(),
                left.len(),
                right.len()
            )));
        }
        for (&(i, dx), &(j, dy)) in left.iter().zip(right) {
            load[i][j] += 1;
            let k = load[i][j];
            x_slot[i].insert(dx, (j, k));
            y_slot[j].insert(dy, (i, k));
        }
    }
    let m_prime = load.iter().flatten().copied().max().unwrap_or(0).max(1);

    let mut terms = Witness::default();
    for (i, (dag, root, _)) in xs.iter().enumerate() {
        let slots = &x_slot[i];
        let f = dag.to_term(*root, &|d| {
            let (j, k) = slots[&d];
            grid_position(m_prime, j + 1, k)
        });
        terms.insert(format!("f{}", i + 1), f);
    }
    for (j, (dag, root, _)) in ys.iter().enumerate() {
        let slots = &y_slot[j];
        let g = dag.to_term(*root, &|d| {
            let (i, k) = slots[&d];
            grid_position(m_prime, i + 1, k)
        });
        terms.insert(format!("g{}", j + 1), g);
    }
    Ok(DecreasedTerms {
        n: n - 1,
        m,
        m_prime,
        terms,
    })
}

/// Checks the `(n-1) x n x m'` grid identities of `dec` in `algebra`, with
/// the original `n x (n+1) x m` operations interpreted by `grid_terms`.
pub fn check_decreased_in_algebra(
    algebra: &FiniteAlgebra,
    grid_terms: &Witness,
    dec: &DecreasedTerms,
) -> Result<bool> {
    let grid = Grid::new(dec.n + 1, dec.m)?;
    let tables = Tables::new(algebra, grid_terms, grid)?;
    let mp = dec.m_prime;
    let compile = |name: String| -> Result<(Dag, u32, Vec<u32>)> {
        let term = dec
            .terms
            .get(&name)
            .ok_or_else(|| Error::Precondition(format!("missing term `{name}`")))?;
        let (dag, root) = Dag::from_term(grid, term)?;
        let order = dag.reachable(root);
        Ok((dag, root, order))
    };
    let fs = (1..=dec.n)
        .map(|i| compile(format!("f{i}")))
        .collect::<Result<Vec<_>>>()?;
    let gs = (1..=dec.n + 1)
        .map(|j| compile(format!("g{j}")))
        .collect::<Result<Vec<_>>>()?;
    for (i, (fd, fr, fo)) in fs.iter().enumerate() {
        for (j, (gd, gr, go)) in gs.iter().enumerate() {
            for k in 1..=mp {
                let pf = grid_position(mp, j + 1, k);
                let pg = grid_position(mp, i + 1, k);
                for xy in all_tuples(algebra.size(), 2) {
                    let (x, y) = (xy[0], xy[1]);
                    let a = tables.eval(fd, fo, *fr, &|d| if d == pf { y } else { x });
                    let b = tables.eval(gd, go, *gr, &|d| if d == pg { y } else { x });
                    if a != b {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebras;
    use crate::semiring::{apply_step, derive_decrease_certificate};

    fn check_transform(
        term: &Term,
        summary: &Polynomial,
        step: &ExpansionStep,
        n: usize,
        m: usize,
    ) -> Result<bool> {
        let eqs = grid_equations(n, m)?;
        let q = apply_step(summary, step, &eqs)?;
        let t = witness_transform(term, summary, step, n, m)?;
        Ok(summarize(&t, n, m)? == q)
    }

    fn meet_grid_terms(n: usize, m: usize) -> Witness {
        let meet_all = |k: usize| {
            (1..k).fold(Term::var(0), |acc, i| {
                Term::app("meet", vec![acc, Term::var(i)])
            })
        };
        let mut w = Witness::default();
        for i in 1..=n {
            w.insert(format!("f{i}"), meet_all((n + 1) * m));
        }
        for j in 1..=n + 1 {
            w.insert(format!("g{j}"), meet_all(n * m));
        }
        w
    }

    #[test]
    fn root_expansion_of_one() {
        let (n, m) = (2, 1);
        let row1 = ExpansionStep::new(0, 0, 3);
        let t = witness_transform(&Term::var(0), &Polynomial::one(), &row1, n, m).unwrap();
        assert_eq!(t.to_string(), "(f1 x1 x2 x3)");
        let eqs = grid_equations(n, m).unwrap();
        assert_eq!(
            summarize(&t, n, m).unwrap(),
            apply_step(&Polynomial::one(), &row1, &eqs).unwrap()
        );
    }

    #[test]
    fn idempotent_and_appending_cases() {
        let (n, m) = (2, 1);
        let eqs = grid_equations(n, m).unwrap();
        // Both positions of g1(x0, x1) are copied by f2.
        let s = Term::app("g1", vec![Term::var(0), Term::var(1)]);
        let t = Term::app("f2", vec![s.clone(), s.clone(), s]);
        let p = summarize(&t, n, m).unwrap();
        assert_eq!(p.display(&eqs.alphabet).to_string(), "b_1_1_1 + b_2_1_1");
        for (summand, split, equation) in [(0, 0, 0), (0, 1, 2), (1, 1, 4), (1, 0, 3)] {
            let step = ExpansionStep::new(summand, split, equation);
            assert!(check_transform(&t, &p, &step, n, m).unwrap());
        }
        assert!(
            witness_transform(&t, &Polynomial::one(), &ExpansionStep::new(0, 0, 0), n, m).is_err()
        );
    }

    #[test]
    fn mixed_positions_are_rejected() {
        let ok = Term::app(
            "g1",
            vec![Term::var(0), Term::app("f1", vec![Term::var(0); 3])],
        );
        assert!(summarize(&ok, 2, 1).is_ok());
        let bad = Term::app(
            "g1",
            vec![
                Term::var(0),
                Term::app("f1", vec![Term::var(0), Term::var(1), Term::var(1)]),
            ],
        );
        assert!(summarize(&bad, 2, 1).is_err());
        assert!(summarize(&Term::app("h", vec![Term::var(0)]), 2, 1).is_err());
        assert!(summarize(&Term::app("f1", vec![Term::var(0)]), 2, 1).is_err());
    }

    #[test]
    fn depth_two_witness_on_the_semilattice() {
        let (n, m) = (2, 1);
        let s = algebras::meet_semilattice();
        let grid_terms = meet_grid_terms(n, m);
        let t = Term::app(
            "g2",
            vec![
                Term::app("f1", vec![Term::var(0), Term::var(1), Term::var(2)]),
                Term::var(3),
            ],
        );
        let p = summarize(&t, n, m).unwrap();
        assert!(check_witness_in_algebra(&s, &grid_terms, n, m, &t, &p).unwrap());
        let eqs = grid_equations(n, m).unwrap();
        for i in 0..p.len() {
            for split in 0..=p.words()[i].len() {
                for e in 0..5 {
                    let step = ExpansionStep::new(i, split, e);
                    let t2 = witness_transform(&t, &p, &step, n, m).unwrap();
                    let q = apply_step(&p, &step, &eqs).unwrap();
                    assert_eq!(summarize(&t2, n, m).unwrap(), q, "{step:?}");
                    assert!(check_witness_in_algebra(&s, &grid_terms, n, m, &t2, &q).unwrap());
                }
            }
        }
    }

    #[test]
    fn hash_consing_shares_equal_subterms() {
        let x = Term::app("g1", vec![Term::var(0), Term::var(1)]);
        let y = Term::app("g1", vec![Term::var(0), Term::var(1)]);
        let t = Term::app("f1", vec![x, y, Term::var(2)]);
        let (dag, root) = Dag::from_term(Grid::new(2, 1).unwrap(), &t).unwrap();
        assert_eq!(dag.reachable(root).len(), 5);
        assert_eq!(shared_size(&dag.to_term(root, &|d| d)), 2);
    }

    #[test]
    fn decreased_terms_for_two_by_three() {
        let c = derive_decrease_certificate(2, 1).unwrap();
        let dec = assemble_decreased_terms(&c, 2, 1).unwrap();
        assert_eq!((dec.n, dec.m), (1, 1));
        let text = dec.to_shared_text();
        assert!(text.lines().any(|l| l.starts_with("f1 = t")));
        assert!(dec.m_prime >= 1);
        let s = algebras::meet_semilattice();
        assert!(check_decreased_in_algebra(&s, &meet_grid_terms(2, 1), &dec).unwrap());
    }
}
