//! Single expansions, replay, and certificates of congruence.
//!
//! A step names a summand by its index in the canonical order of the
//! polynomial it acts on. Duplicate words are interchangeable, so an index
//! only has to point at some copy of the intended word.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

use super::poly::{Alphabet, EquationSet, OrderedMultiset, Polynomial, Symbol, Word};

/// Replace summand `u v` (with `|u| = split`) by `u e v` for the words of
/// equation `equation`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExpansionStep {
    pub summand: usize,
    pub split: usize,
    pub equation: usize,
}

impl ExpansionStep {
    pub fn new(summand: usize, split: usize, equation: usize) -> ExpansionStep {
        ExpansionStep {
            summand,
            split,
            equation,
        }
    }
}

/// Words `u e_t v` in the canonical order of `e`.
pub fn expand_word(word: &[Symbol], split: usize, eq: &Polynomial) -> Vec<Word> {
    let (u, v) = word.split_at(split);
    eq.words()
        .iter()
        .map(|e| {
            let mut w = Vec::with_capacity(word.len() + e.len());
            w.extend_from_slice(u);
            w.extend_from_slice(e);
            w.extend_from_slice(v);
            w
        })
        .collect()
}

fn check_step(
    step: &ExpansionStep,
    word: &[Symbol],
    eqs: &EquationSet,
    ordinal: usize,
) -> Result<()> {
    if step.split > word.len() {
        return Err(Error::Replay {
            step: ordinal,
            reason: format!("split {} exceeds word length {}", step.split, word.len()),
        });
    }
    if step.equation >= eqs.len() {
        return Err(Error::Replay {
            step: ordinal,
            reason: format!("equation {} does not exist", step.equation),
        });
    }
    Ok(())
}

fn out_of_range(ordinal: usize, index: usize, len: usize) -> Error {
    Error::Replay {
        step: ordinal,
        reason: format!("summand {index} out of range for {len} summands"),
    }
}

/// All polynomials reachable from `p` by one single expansion, deduplicated
/// and sorted.
pub fn single_expansions(p: &Polynomial, eqs: &EquationSet) -> Vec<Polynomial> {
    let mut out = BTreeSet::new();
    let words = p.words();
    for (i, w) in words.iter().enumerate() {
        if i > 0 && words[i - 1] == *w {
            continue;
        }
        for split in 0..=w.len() {
            for e in 0..eqs.len() {
                let step = ExpansionStep::new(i, split, e);
                out.insert(apply_step(p, &step, eqs).expect("in range"));
            }
        }
    }
    out.into_iter().collect()
}

pub fn apply_step(p: &Polynomial, step: &ExpansionStep, eqs: &EquationSet) -> Result<Polynomial> {
    replay(p, std::slice::from_ref(step), eqs)
}

/// Applies `steps` in order. Errors name the 0-based ordinal of the first
/// step that cannot be applied.
pub fn replay(p: &Polynomial, steps: &[ExpansionStep], eqs: &EquationSet) -> Result<Polynomial> {
    let mut poly = OrderedMultiset::from_sorted(p.words().to_vec());
    for (ordinal, step) in steps.iter().enumerate() {
        let len = poly.len();
        let word = poly
            .get(step.summand)
            .ok_or_else(|| out_of_range(ordinal, step.summand, len))?;
        check_step(step, word, eqs, ordinal)?;
        let word = poly.remove_at(step.summand).expect("index checked");
        for w in expand_word(&word, step.split, &eqs.equations[step.equation]) {
            poly.insert(w);
        }
    }
    Ok(Polynomial::from_words(poly.into_vec()))
}

/// Result of a parallel step: the new polynomial and, for every old summand,
/// the positions of its descendants (in the order of the equation's words,
/// or the summand itself if untouched).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Applied {
    pub result: Polynomial,
    pub descendants: Vec<Vec<usize>>,
}

/// Applies single expansions to pairwise distinct summands of `r`
/// simultaneously; every index refers to the canonical order of `r`.
pub fn apply_parallel(
    r: &Polynomial,
    step: &[ExpansionStep],
    eqs: &EquationSet,
) -> Result<Applied> {
    let mut chosen: Vec<Option<&ExpansionStep>> = vec![None; r.len()];
    for (ordinal, s) in step.iter().enumerate() {
        let slot = chosen
            .get_mut(s.summand)
            .ok_or_else(|| out_of_range(ordinal, s.summand, r.len()))?;
        if slot.is_some() {
            return Err(Error::Replay {
                step: ordinal,
                reason: format!("summand {} expanded twice in one parallel step", s.summand),
            });
        }
        check_step(s, &r.words()[s.summand], eqs, ordinal)?;
        *slot = Some(s);
    }
    let mut items: Vec<(Word, usize)> = Vec::with_capacity(r.len());
    for (i, w) in r.words().iter().enumerate() {
        match chosen[i] {
            None => items.push((w.clone(), i)),
            Some(s) => {
                for x in expand_word(w, s.split, &eqs.equations[s.equation]) {
                    items.push((x, i));
                }
            }
        }
    }
    // Stable sort keeps each summand's children in equation order.
    items.sort_by(|a, b| a.0.cmp(&b.0));
    let mut descendants = vec![Vec::new(); r.len()];
    let mut words = Vec::with_capacity(items.len());
    for (pos, (w, src)) in items.into_iter().enumerate() {
        descendants[src].push(pos);
        words.push(w);
    }
    Ok(Applied {
        result: Polynomial::from_words(words),
        descendants,
    })
}

/// A derivation tree over stable slot ids. Children are allocated after
/// their parent, so slot order is a valid application order.
#[derive(Debug, Clone)]
pub(crate) struct Forest {
    words: Vec<Word>,
    depth: Vec<u32>,
    expansion: Vec<Option<Expansion>>,
    roots: usize,
}

#[derive(Debug, Clone, Copy)]
struct Expansion {
    split: usize,
    equation: usize,
    first_child: usize,
    children: usize,
}

impl Forest {
    pub fn new(roots: Vec<Word>) -> Forest {
        let n = roots.len();
        Forest {
            words: roots,
            depth: vec![0; n],
            expansion: vec![None; n],
            roots: n,
        }
    }

    fn expand(&mut self, slot: usize, split: usize, equation: usize, eqs: &EquationSet) -> usize {
        let first_child = self.words.len();
        let children = expand_word(&self.words[slot], split, &eqs.equations[equation]);
        let count = children.len();
        let d = self.depth[slot] + 1;
        for w in children {
            self.words.push(w);
            self.depth.push(d);
            self.expansion.push(None);
        }
        self.expansion[slot] = Some(Expansion {
            split,
            equation,
            first_child,
            children: count,
        });
        first_child
    }

    pub fn from_steps(
        start: &Polynomial,
        steps: &[ExpansionStep],
        eqs: &EquationSet,
    ) -> Result<Forest> {
        let mut forest = Forest::new(start.words().to_vec());
        let mut live = OrderedMultiset::from_sorted(
            start.words().iter().cloned().zip(0..).collect::<Vec<_>>(),
        );
        for (ordinal, step) in steps.iter().enumerate() {
            let len = live.len();
            let (word, _) = live
                .get(step.summand)
                .ok_or_else(|| out_of_range(ordinal, step.summand, len))?;
            check_step(step, word, eqs, ordinal)?;
            let (_, slot) = live.remove_at(step.summand).expect("index checked");
            let first = forest.expand(slot, step.split, step.equation, eqs);
            for c in first..forest.words.len() {
                live.insert((forest.words[c].clone(), c));
            }
        }
        Ok(forest)
    }

    /// Applies parallel steps, each indexed against the canonical order of
    /// the current leaves.
    pub fn from_parallel(
        start: &Polynomial,
        levels: &[Vec<ExpansionStep>],
        eqs: &EquationSet,
    ) -> Result<Forest> {
        let mut forest = Forest::new(start.words().to_vec());
        let mut frontier: Vec<usize> = (0..forest.roots).collect();
        for level in levels {
            let mut expanded = vec![false; frontier.len()];
            let mut fresh = Vec::new();
            for (ordinal, s) in level.iter().enumerate() {
                let slot = *frontier
                    .get(s.summand)
                    .ok_or_else(|| out_of_range(ordinal, s.summand, frontier.len()))?;
                if std::mem::replace(&mut expanded[s.summand], true) {
                    return Err(Error::Replay {
                        step: ordinal,
                        reason: format!(
                            "summand {} expanded twice in one parallel step",
                            s.summand
                        ),
                    });
                }
                check_step(s, &forest.words[slot], eqs, ordinal)?;
                let first = forest.expand(slot, s.split, s.equation, eqs);
                fresh.extend(first..forest.words.len());
            }
            let mut next: Vec<usize> = frontier
                .iter()
                .zip(&expanded)
                .filter(|(_, &e)| !e)
                .map(|(&s, _)| s)
                .collect();
            next.extend(fresh);
            next.sort_by(|&a, &b| forest.words[a].cmp(&forest.words[b]).then(a.cmp(&b)));
            frontier = next;
        }
        Ok(forest)
    }

    pub fn root_poly(&self) -> Polynomial {
        Polynomial::from_words(self.words[..self.roots].to_vec())
    }

    pub fn leaves(&self) -> Polynomial {
        Polynomial::from_words(
            (0..self.words.len())
                .filter(|&s| self.expansion[s].is_none())
                .map(|s| self.words[s].clone())
                .collect(),
        )
    }

    /// Sequential steps in slot order. Equal words are told apart the way
    /// [`Forest::from_steps`] does, by allocation order, so replaying the
    /// steps rebuilds this very forest up to renumbering.
    pub fn to_steps(&self) -> Vec<ExpansionStep> {
        let mut order: Vec<usize> = (0..self.roots).collect();
        order.sort_by(|&a, &b| self.words[a].cmp(&self.words[b]).then(a.cmp(&b)));
        let mut id = vec![usize::MAX; self.words.len()];
        for (i, &s) in order.iter().enumerate() {
            id[s] = i;
        }
        let mut next = self.roots;
        let mut live = OrderedMultiset::from_sorted(
            order
                .iter()
                .map(|&s| (self.words[s].clone(), id[s]))
                .collect(),
        );
        let mut steps = Vec::new();
        for slot in 0..self.words.len() {
            let Some(x) = self.expansion[slot] else {
                continue;
            };
            let summand = live.rank(&(self.words[slot].clone(), id[slot]));
            live.remove_at(summand);
            for c in x.first_child..x.first_child + x.children {
                id[c] = next;
                next += 1;
                live.insert((self.words[c].clone(), id[c]));
            }
            steps.push(ExpansionStep::new(summand, x.split, x.equation));
        }
        steps
    }

    /// The same tree with every word reversed. `map[e]` is the equation
    /// whose words are the reversals of the words of equation `e`.
    fn reversed(&self, map: &[usize], eqs: &EquationSet) -> Forest {
        let rev = |w: &Word| w.iter().rev().copied().collect::<Word>();
        let mut out = Forest::new(self.words[..self.roots].iter().map(rev).collect());
        let mut id: Vec<usize> = (0..self.words.len()).collect();
        for slot in 0..self.words.len() {
            let Some(x) = self.expansion[slot] else {
                continue;
            };
            let len = self.words[slot].len();
            let first = out.expand(id[slot], len - x.split, map[x.equation], eqs);
            let mut free: Vec<usize> = (first..first + x.children).collect();
            for c in x.first_child..x.first_child + x.children {
                let want = rev(&self.words[c]);
                let at = free
                    .iter()
                    .position(|&f| out.words[f] == want)
                    .expect("reversed children match");
                id[c] = free.swap_remove(at);
            }
        }
        out
    }

    /// Structural hash of every subtree.
    fn signatures(&self) -> Vec<u64> {
        use std::hash::{Hash, Hasher};
        let mut sig = vec![0u64; self.words.len()];
        for slot in (0..self.words.len()).rev() {
            let mut h = std::collections::hash_map::DefaultHasher::new();
            self.words[slot].hash(&mut h);
            if let Some(x) = self.expansion[slot] {
                (x.split, x.equation).hash(&mut h);
                for c in x.first_child..x.first_child + x.children {
                    sig[c].hash(&mut h);
                }
            }
            sig[slot] = h.finish();
        }
        sig
    }

    fn same_tree(&self, a: usize, other: &Forest, b: usize) -> bool {
        if self.words[a] != other.words[b] {
            return false;
        }
        match (self.expansion[a], other.expansion[b]) {
            (None, None) => true,
            (Some(x), Some(y)) => {
                (x.split, x.equation, x.children) == (y.split, y.equation, y.children)
                    && (0..x.children)
                        .all(|t| self.same_tree(x.first_child + t, other, y.first_child + t))
            }
            _ => false,
        }
    }

    /// The tree below `slot`, with the original slot of every new slot.
    fn subtree_of(&self, slot: usize) -> (Forest, Vec<usize>) {
        let mut out = Forest::new(vec![self.words[slot].clone()]);
        let mut orig = vec![slot];
        let mut queue = vec![slot];
        let mut id = std::collections::HashMap::from([(slot, 0usize)]);
        let mut i = 0;
        while i < queue.len() {
            let s = queue[i];
            i += 1;
            let Some(x) = self.expansion[s] else { continue };
            let me = id[&s];
            let first = out.words.len();
            for c in x.first_child..x.first_child + x.children {
                id.insert(c, out.words.len());
                out.words.push(self.words[c].clone());
                out.depth.push(out.depth[me] + 1);
                out.expansion.push(None);
                orig.push(c);
                queue.push(c);
            }
            out.expansion[me] = Some(Expansion {
                first_child: first,
                ..x
            });
        }
        (out, orig)
    }

    /// A forest rooted at the current leaves with `trees` grown from the
    /// given leaf slots.
    fn extend_leaves(&self, trees: Vec<(usize, Forest)>) -> Forest {
        let leaves: Vec<usize> = (0..self.words.len())
            .filter(|&s| self.expansion[s].is_none())
            .collect();
        let mut root_of = vec![usize::MAX; self.words.len()];
        for (i, &s) in leaves.iter().enumerate() {
            root_of[s] = i;
        }
        let mut out = Forest::new(leaves.iter().map(|&s| self.words[s].clone()).collect());
        for (leaf, tree) in trees {
            out.graft(root_of[leaf], &tree);
        }
        out
    }

    /// Copies the expansions of `tree` (whose root carries the word of
    /// `at`) below slot `at`.
    fn graft(&mut self, at: usize, tree: &Forest) {
        debug_assert_eq!(self.words[at], tree.words[0]);
        let mut id = vec![usize::MAX; tree.words.len()];
        id[0] = at;
        for slot in 0..tree.words.len() {
            let Some(x) = tree.expansion[slot] else {
                continue;
            };
            let me = id[slot];
            let first = self.words.len();
            for c in x.first_child..x.first_child + x.children {
                id[c] = self.words.len();
                self.words.push(tree.words[c].clone());
                self.depth.push(self.depth[me] + 1);
                self.expansion.push(None);
            }
            self.expansion[me] = Some(Expansion {
                first_child: first,
                ..x
            });
        }
    }

    /// The root each slot descends from.
    pub fn root_owners(&self) -> Vec<usize> {
        let mut owner: Vec<usize> = (0..self.words.len()).collect();
        for slot in 0..self.words.len() {
            if let Some(x) = self.expansion[slot] {
                for c in x.first_child..x.first_child + x.children {
                    owner[c] = owner[slot];
                }
            }
        }
        owner
    }

    /// The tree below `root` as a forest of its own.
    pub fn subtree(&self, root: usize, owners: &[usize]) -> Forest {
        let mut out = Forest::new(vec![self.words[root].clone()]);
        let mut id = vec![usize::MAX; self.words.len()];
        id[root] = 0;
        for slot in (root..self.words.len()).filter(|&s| owners[s] == root) {
            let Some(x) = self.expansion[slot] else {
                continue;
            };
            let me = id[slot];
            let first = out.words.len();
            for c in x.first_child..x.first_child + x.children {
                id[c] = out.words.len();
                out.words.push(self.words[c].clone());
                out.depth.push(out.depth[me] + 1);
                out.expansion.push(None);
            }
            out.expansion[me] = Some(Expansion {
                first_child: first,
                ..x
            });
        }
        out
    }

    /// The forest acting on `l * w * r + addend` for every summand `w`.
    pub fn lift(&self, left: &Polynomial, right: &Polynomial, addend: &Polynomial) -> Forest {
        let pairs: Vec<(&Word, &Word)> = left
            .words()
            .iter()
            .flat_map(|l| right.words().iter().map(move |r| (l, r)))
            .collect();
        let wrap = |w: &Word, (l, r): (&Word, &Word)| {
            let mut x = l.clone();
            x.extend_from_slice(w);
            x.extend_from_slice(r);
            x
        };
        let k = pairs.len();
        let mut roots = Vec::with_capacity(self.roots * k + addend.len());
        for slot in 0..self.roots {
            roots.extend(pairs.iter().map(|&p| wrap(&self.words[slot], p)));
        }
        roots.extend(addend.words().iter().cloned());
        let mut out = Forest::new(roots);
        // Copy `j` of old slot `s` is `id[s * k + j]`.
        let mut id = vec![usize::MAX; self.words.len() * k];
        for (i, slot) in id.iter_mut().take(self.roots * k).enumerate() {
            *slot = i;
        }
        for slot in 0..self.words.len() {
            let Some(x) = self.expansion[slot] else {
                continue;
            };
            for (j, (l, _)) in pairs.iter().enumerate() {
                let lifted = id[slot * k + j];
                let first = out.words.len();
                let d = out.depth[lifted] + 1;
                for c in 0..x.children {
                    let old = x.first_child + c;
                    id[old * k + j] = out.words.len();
                    out.words.push(wrap(&self.words[old], pairs[j]));
                    out.depth.push(d);
                    out.expansion.push(None);
                }
                out.expansion[lifted] = Some(Expansion {
                    split: l.len() + x.split,
                    equation: x.equation,
                    first_child: first,
                    children: x.children,
                });
            }
        }
        out
    }
}

/// Turns parallel steps into sequential canonical steps.
pub fn sequentialize(
    start: &Polynomial,
    levels: &[Vec<ExpansionStep>],
    eqs: &EquationSet,
) -> Result<Vec<ExpansionStep>> {
    Ok(Forest::from_parallel(start, levels, eqs)?.to_steps())
}

/// Two sides of the congruence `left ~ right` with expansions of each side
/// reaching the same polynomial `common`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub left: Polynomial,
    pub right: Polynomial,
    pub left_steps: Vec<ExpansionStep>,
    pub right_steps: Vec<ExpansionStep>,
    pub common: Polynomial,
}

impl Certificate {
    /// `p ~ p` with no steps.
    pub fn reflexive(p: &Polynomial) -> Certificate {
        Certificate {
            left: p.clone(),
            right: p.clone(),
            left_steps: Vec::new(),
            right_steps: Vec::new(),
            common: p.clone(),
        }
    }

    pub fn flip(&self) -> Certificate {
        Certificate {
            left: self.right.clone(),
            right: self.left.clone(),
            left_steps: self.right_steps.clone(),
            right_steps: self.left_steps.clone(),
            common: self.common.clone(),
        }
    }

    pub fn step_count(&self) -> usize {
        self.left_steps.len() + self.right_steps.len()
    }

    /// Header lines `alphabet`, `left`, `right`, `common`, then one line
    /// `L|R summand split equation` per step.
    pub fn to_text(&self, alphabet: &Alphabet) -> String {
        let mut out = format!("alphabet {}\n", alphabet.names().join(" "));
        out.push_str(&format!("left {}\n", self.left.display(alphabet)));
        out.push_str(&format!("right {}\n", self.right.display(alphabet)));
        out.push_str(&format!("common {}\n", self.common.display(alphabet)));
        for (tag, steps) in [("L", &self.left_steps), ("R", &self.right_steps)] {
            for s in steps {
                out.push_str(&format!("{tag} {} {} {}\n", s.summand, s.split, s.equation));
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<(Alphabet, Certificate)> {
        let mut alphabet = None;
        let (mut left, mut right, mut common) = (None, None, None);
        let (mut left_steps, mut right_steps) = (Vec::new(), Vec::new());
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
            let need_alphabet = || {
                alphabet
                    .as_ref()
                    .ok_or_else(|| Error::Parse("`alphabet` must come first".into()))
            };
            match key {
                "alphabet" => {
                    alphabet = Some(Alphabet::new(
                        rest.split_whitespace().map(String::from).collect(),
                    )?)
                }
                "left" => left = Some(need_alphabet()?.parse_polynomial(rest)?),
                "right" => right = Some(need_alphabet()?.parse_polynomial(rest)?),
                "common" => common = Some(need_alphabet()?.parse_polynomial(rest)?),
                "L" | "R" => {
                    let nums: Vec<usize> = rest
                        .split_whitespace()
                        .map(str::parse)
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?;
                    let [summand, split, equation] = nums[..] else {
                        return Err(Error::Parse(format!(
                            "line {}: a step needs summand, split and equation",
                            n + 1
                        )));
                    };
                    let s = ExpansionStep::new(summand, split, equation);
                    if key == "L" {
                        left_steps.push(s)
                    } else {
                        right_steps.push(s)
                    }
                }
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown key `{other}`",
                        n + 1
                    )))
                }
            }
        }
        let missing = |what: &str| Error::Parse(format!("certificate has no `{what}` line"));
        let alphabet = alphabet.ok_or_else(|| missing("alphabet"))?;
        let cert = Certificate {
            left: left.ok_or_else(|| missing("left"))?,
            right: right.ok_or_else(|| missing("right"))?,
            left_steps,
            right_steps,
            common: common.ok_or_else(|| missing("common"))?,
        };
        Ok((alphabet, cert))
    }
}

/// Replays both sides. `Ok(false)` if a side does not reach `common`;
/// an error if a step cannot be applied.
pub fn verify_certificate(cert: &Certificate, eqs: &EquationSet) -> Result<bool> {
    let l = replay(&cert.left, &cert.left_steps, eqs)?;
    let r = replay(&cert.right, &cert.right_steps, eqs)?;
    Ok(l == cert.common && r == cert.common)
}

/// A common expansion of two parallel steps out of `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiamondJoin {
    pub p: Polynomial,
    pub q: Polynomial,
    pub join: Polynomial,
    /// Parallel step from `p` to `join`.
    pub from_p: Vec<ExpansionStep>,
    /// Parallel step from `q` to `join`.
    pub from_q: Vec<ExpansionStep>,
}

/// Completes the square `r -> p`, `r -> q` of parallel single expansions.
///
/// A summand expanded on one side only is expanded the same way on the
/// other. A summand expanded at the same split with the same equation on
/// both sides needs nothing more. Otherwise the expansion with the smaller
/// split (the `p` one on ties) is inserted first and each side adds the
/// other's insertion to every child, shifted past the inserted block.
pub fn diamond_join(
    r: &Polynomial,
    p_step: &[ExpansionStep],
    q_step: &[ExpansionStep],
    eqs: &EquationSet,
) -> Result<DiamondJoin> {
    let ap = apply_parallel(r, p_step, eqs)?;
    // Validates `q_step` before it is re-paired.
    apply_parallel(r, q_step, eqs)?;
    let mut on_p = vec![None; r.len()];
    let mut on_q = vec![None; r.len()];
    for s in p_step {
        on_p[s.summand] = Some((s.split, s.equation));
    }
    for s in q_step {
        on_q[s.summand] = Some((s.split, s.equation));
    }
    let on_q = match_copies(r, &on_p, on_q);
    let q_step: Vec<ExpansionStep> = on_q
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.map(|(s, e)| ExpansionStep::new(i, s, e)))
        .collect();
    let aq = apply_parallel(r, &q_step, eqs)?;
    let width = |e: usize, t: usize| eqs.equations[e].words()[t].len();
    let (mut from_p, mut from_q) = (Vec::new(), Vec::new());
    for i in 0..r.len() {
        let dp = &ap.descendants[i];
        let dq = &aq.descendants[i];
        match (on_p[i], on_q[i]) {
            (None, None) => {}
            (Some((s, e)), None) => from_q.push(ExpansionStep::new(dq[0], s, e)),
            (None, Some((s, e))) => from_p.push(ExpansionStep::new(dp[0], s, e)),
            (Some(a), Some(b)) if a == b => {}
            (Some((s, e)), Some((s2, e2))) if s <= s2 => {
                for (t, &pos) in dp.iter().enumerate() {
                    from_p.push(ExpansionStep::new(pos, s2 + width(e, t), e2));
                }
                for &pos in dq {
                    from_q.push(ExpansionStep::new(pos, s, e));
                }
            }
            (Some((s, e)), Some((s2, e2))) => {
                for &pos in dp {
                    from_p.push(ExpansionStep::new(pos, s2, e2));
                }
                for (u, &pos) in dq.iter().enumerate() {
                    from_q.push(ExpansionStep::new(pos, s + width(e2, u), e));
                }
            }
        }
    }
    from_p.sort_unstable();
    from_q.sort_unstable();
    let join = apply_parallel(&ap.result, &from_p, eqs)?.result;
    let other = apply_parallel(&aq.result, &from_q, eqs)?.result;
    if join != other {
        return Err(Error::Precondition("diamond sides disagree".into()));
    }
    Ok(DiamondJoin {
        p: ap.result,
        q: aq.result,
        join,
        from_p,
        from_q,
    })
}

type Treatment = Option<(usize, usize)>;

/// Copies of one word are interchangeable, so `q`'s treatments may be
/// permuted within each block of equal words. Pairs identical treatments
/// first, then expanded copies with untouched ones; only the remaining
/// pairs need a product in the diamond.
fn match_copies(r: &Polynomial, on_p: &[Treatment], on_q: Vec<Treatment>) -> Vec<Treatment> {
    let words = r.words();
    let mut out = on_q.clone();
    let mut start = 0;
    while start < words.len() {
        let mut end = start + 1;
        while end < words.len() && words[end] == words[start] {
            end += 1;
        }
        if end - start > 1 {
            let mut pool: Vec<Treatment> = on_q[start..end].to_vec();
            let mut assigned: Vec<Option<Treatment>> = vec![None; end - start];
            let mut take = |pred: &dyn Fn(&Treatment, &Treatment) -> bool,
                            assigned: &mut Vec<Option<Treatment>>| {
                for (c, a) in assigned.iter_mut().enumerate() {
                    if a.is_some() {
                        continue;
                    }
                    if let Some(k) = pool.iter().position(|t| pred(&on_p[start + c], t)) {
                        *a = Some(pool.remove(k));
                    }
                }
            };
            take(&|p, q| p == q, &mut assigned);
            take(&|p, q| p.is_some() != q.is_some(), &mut assigned);
            take(&|_, _| true, &mut assigned);
            for (c, a) in assigned.into_iter().enumerate() {
                out[start + c] = a.expect("pool and block have equal size");
            }
        }
        start = end;
    }
    out
}

/// Chains `p ~ q` and `q ~ r` into `p ~ r`.
///
/// The expansion trees of both certificates at `q` are joined summand by
/// summand. Identical subtrees need nothing; equal root expansions recurse
/// into the children; elsewhere both root expansions are squared off and
/// each side's subtrees are carried into the square and joined again.
pub fn compose_certificates(
    c1: &Certificate,
    c2: &Certificate,
    eqs: &EquationSet,
) -> Result<Certificate> {
    if c1.right != c2.left {
        return Err(Error::Precondition(
            "right end of the first certificate differs from the left end of the second".into(),
        ));
    }
    let pf = Forest::from_steps(&c1.right, &c1.right_steps, eqs)?;
    let qf = Forest::from_steps(&c2.left, &c2.left_steps, eqs)?;
    let mut join = Join {
        pf: &pf,
        qf: &qf,
        sig_p: pf.signatures(),
        sig_q: qf.signatures(),
        ext_p: Vec::new(),
        ext_q: Vec::new(),
        eqs,
    };
    for (px, qx) in join.pair_roots() {
        join.join(px, qx);
    }
    let Join { ext_p, ext_q, .. } = join;
    let left_ext = pf.extend_leaves(ext_p);
    let right_ext = qf.extend_leaves(ext_q);
    let common = left_ext.leaves();
    if common != right_ext.leaves() {
        return Err(Error::Precondition("joined expansions disagree".into()));
    }
    let mut left_steps = c1.left_steps.clone();
    left_steps.extend(left_ext.to_steps());
    let mut right_steps = c2.right_steps.clone();
    right_steps.extend(right_ext.to_steps());
    Ok(Certificate {
        left: c1.left.clone(),
        right: c2.right.clone(),
        left_steps,
        right_steps,
        common,
    })
}

struct Join<'a> {
    pf: &'a Forest,
    qf: &'a Forest,
    sig_p: Vec<u64>,
    sig_q: Vec<u64>,
    /// Trees to grow from leaves of `pf` (resp. `qf`), keyed by leaf slot.
    ext_p: Vec<(usize, Forest)>,
    ext_q: Vec<(usize, Forest)>,
    eqs: &'a EquationSet,
}

impl Join<'_> {
    /// Roots of both forests carry the same canonical words. Within a block
    /// of equal words, identical trees are paired first, then trees with the
    /// same root expansion, then trivial trees with non-trivial ones.
    fn pair_roots(&self) -> Vec<(usize, usize)> {
        let n = self.pf.roots;
        let mut pairs = Vec::with_capacity(n);
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && self.pf.words[end] == self.pf.words[start] {
                end += 1;
            }
            let mut pool: Vec<usize> = (start..end).collect();
            let mut todo: Vec<usize> = (start..end).collect();
            let root = |f: &Forest, x: usize| f.expansion[x].map(|a| (a.split, a.equation));
            let rules: [&dyn Fn(usize, usize) -> bool; 4] = [
                &|p, q| self.sig_p[p] == self.sig_q[q],
                &|p, q| root(self.pf, p).is_some() && root(self.pf, p) == root(self.qf, q),
                &|p, q| self.pf.expansion[p].is_some() != self.qf.expansion[q].is_some(),
                &|_, _| true,
            ];
            for rule in rules {
                todo.retain(|&p| match pool.iter().position(|&q| rule(p, q)) {
                    Some(k) => {
                        pairs.push((p, pool.remove(k)));
                        false
                    }
                    None => true,
                });
            }
            start = end;
        }
        pairs
    }

    fn join(&mut self, px: usize, qx: usize) {
        if self.sig_p[px] == self.sig_q[qx] && self.pf.same_tree(px, self.qf, qx) {
            return;
        }
        match (self.pf.expansion[px], self.qf.expansion[qx]) {
            (None, _) => self.ext_p.push((px, self.qf.subtree_of(qx).0)),
            (_, None) => self.ext_q.push((qx, self.pf.subtree_of(px).0)),
            (Some(a), Some(b)) if (a.split, a.equation) == (b.split, b.equation) => {
                for t in 0..a.children {
                    self.join(a.first_child + t, b.first_child + t);
                }
            }
            _ => join_trees(
                self.pf,
                px,
                self.qf,
                qx,
                &mut self.ext_p,
                &mut self.ext_q,
                self.eqs,
            ),
        }
    }
}

type Extensions = Vec<(usize, Forest)>;

/// Joins the trees below `xs` in `x` and `ys` in `y`, which carry the same
/// word. Records the trees to grow from leaves of either side.
///
/// Where the two root expansions differ, each child subtree is first joined
/// with the single step the other side takes there; the results meet in the
/// square of both root expansions and are joined word by word.
fn join_trees(
    x: &Forest,
    xs: usize,
    y: &Forest,
    ys: usize,
    ox: &mut Extensions,
    oy: &mut Extensions,
    eqs: &EquationSet,
) {
    let (a, b) = match (x.expansion[xs], y.expansion[ys]) {
        (None, None) => return,
        (None, Some(_)) => return ox.push((xs, y.subtree_of(ys).0)),
        (Some(_), None) => return oy.push((ys, x.subtree_of(xs).0)),
        (Some(a), Some(b)) if (a.split, a.equation) == (b.split, b.equation) => {
            for t in 0..a.children {
                join_trees(x, a.first_child + t, y, b.first_child + t, ox, oy, eqs);
            }
            return;
        }
        (Some(a), Some(b)) => (a, b),
    };
    let ea = eqs.equations[a.equation].words();
    let eb = eqs.equations[b.equation].words();
    let a_first = a.split <= b.split;
    let x_side: Vec<Side> = (0..a.children)
        .map(|t| {
            let at = if a_first {
                b.split + ea[t].len()
            } else {
                b.split
            };
            Side::new(x, a.first_child + t, at, b.equation, eqs)
        })
        .collect();
    let y_side: Vec<Side> = (0..b.children)
        .map(|u| {
            let at = if a_first {
                a.split
            } else {
                a.split + eb[u].len()
            };
            Side::new(y, b.first_child + u, at, a.equation, eqs)
        })
        .collect();
    let mut x_pool: Vec<Vec<(Word, Forest)>> = vec![Vec::new(); a.children];
    let mut y_pool: Vec<Vec<(Word, Forest)>> = vec![Vec::new(); b.children];
    for (t, xt) in x_side.iter().enumerate() {
        for (u, yu) in y_side.iter().enumerate() {
            let l = xt.corner(u);
            let r = yu.corner(t);
            let (mut el, mut er) = (Vec::new(), Vec::new());
            join_trees(&l, 0, &r, 0, &mut el, &mut er, eqs);
            x_pool[t].extend(el.into_iter().map(|(s, f)| (l.words[s].clone(), f)));
            y_pool[u].extend(er.into_iter().map(|(s, f)| (r.words[s].clone(), f)));
        }
    }
    for (side, pool) in x_side.into_iter().zip(x_pool) {
        side.finish(pool, ox);
    }
    for (side, pool) in y_side.into_iter().zip(y_pool) {
        side.finish(pool, oy);
    }
}

/// One child subtree of a conflicting expansion, joined with the single
/// step the other side takes at that child.
struct Side {
    sub: Forest,
    orig: Vec<usize>,
    /// Trees grown from leaves of `sub`.
    grown: Vec<Option<Forest>>,
    /// The single step and the trees grown from its children.
    step: Forest,
    step_grown: Vec<Option<Forest>>,
}

impl Side {
    fn new(f: &Forest, slot: usize, split: usize, equation: usize, eqs: &EquationSet) -> Side {
        let (sub, orig) = f.subtree_of(slot);
        let mut step = Forest::new(vec![sub.words[0].clone()]);
        step.expand(0, split, equation, eqs);
        let (mut e_sub, mut e_step) = (Vec::new(), Vec::new());
        join_trees(&sub, 0, &step, 0, &mut e_sub, &mut e_step, eqs);
        let mut grown = vec![None; sub.words.len()];
        for (s, t) in e_sub {
            grown[s] = Some(t);
        }
        let mut step_grown = vec![None; step.words.len()];
        for (s, t) in e_step {
            step_grown[s] = Some(t);
        }
        Side {
            sub,
            orig,
            grown,
            step,
            step_grown,
        }
    }

    /// The tree at the `u`-th word of the step, as far as it has grown.
    fn corner(&self, u: usize) -> Forest {
        let slot = self.step.expansion[0].expect("single step").first_child + u;
        match &self.step_grown[slot] {
            Some(t) => t.clone(),
            None => Forest::new(vec![self.step.words[slot].clone()]),
        }
    }

    /// Hands out the grown trees, with the trees from the corners grafted
    /// onto leaves carrying the same word.
    fn finish(self, pool: Vec<(Word, Forest)>, out: &mut Extensions) {
        let mut by_word: std::collections::HashMap<Word, Vec<Forest>> = Default::default();
        for (w, f) in pool {
            by_word.entry(w).or_default().push(f);
        }
        for (leaf, grown) in self.grown.into_iter().enumerate() {
            if self.sub.expansion[leaf].is_some() {
                continue;
            }
            let mut tree = grown.unwrap_or_else(|| Forest::new(vec![self.sub.words[leaf].clone()]));
            let mut touched = tree.expansion[0].is_some();
            let leaves: Vec<usize> = (0..tree.words.len())
                .filter(|&s| tree.expansion[s].is_none())
                .collect();
            for l in leaves {
                if let Some(f) = by_word.get_mut(&tree.words[l]).and_then(|v| v.pop()) {
                    tree.graft(l, &f);
                    touched = true;
                }
            }
            if touched {
                out.push((self.orig[leaf], tree));
            }
        }
        debug_assert!(
            by_word.values().all(|v| v.is_empty()),
            "corner trees left over"
        );
    }
}

/// `l * p * r + a ~ l * q * r + a` from `p ~ q`.
pub fn cert_context(
    cert: &Certificate,
    left: &Polynomial,
    right: &Polynomial,
    addend: &Polynomial,
    eqs: &EquationSet,
) -> Result<Certificate> {
    let lf = Forest::from_steps(&cert.left, &cert.left_steps, eqs)?.lift(left, right, addend);
    let rf = Forest::from_steps(&cert.right, &cert.right_steps, eqs)?.lift(left, right, addend);
    let common = lf.leaves();
    if common != rf.leaves() {
        return Err(Error::Precondition("certificate sides do not meet".into()));
    }
    Ok(Certificate {
        left: lf.root_poly(),
        right: rf.root_poly(),
        left_steps: lf.to_steps(),
        right_steps: rf.to_steps(),
        common,
    })
}

/// The mirror image of `cert` under word reversal, which is an
/// anti-automorphism of the free semiring. Every equation must reverse to an
/// equation of `eqs`.
pub fn reverse_certificate(cert: &Certificate, eqs: &EquationSet) -> Result<Certificate> {
    let map = eqs
        .equations
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let r = Polynomial::from_words(
                e.words()
                    .iter()
                    .map(|w| w.iter().rev().copied().collect())
                    .collect(),
            );
            eqs.equations.iter().position(|f| *f == r).ok_or_else(|| {
                Error::Precondition(format!("equation {i} does not reverse to an equation"))
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let lf = Forest::from_steps(&cert.left, &cert.left_steps, eqs)?.reversed(&map, eqs);
    let rf = Forest::from_steps(&cert.right, &cert.right_steps, eqs)?.reversed(&map, eqs);
    let common = lf.leaves();
    if common != rf.leaves() {
        return Err(Error::Precondition("certificate sides do not meet".into()));
    }
    Ok(Certificate {
        left: lf.root_poly(),
        right: rf.root_poly(),
        left_steps: lf.to_steps(),
        right_steps: rf.to_steps(),
        common,
    })
}

/// Records steps named by word rather than by index.
pub(crate) struct Recorder<'a> {
    eqs: &'a EquationSet,
    live: OrderedMultiset<Word>,
    steps: Vec<ExpansionStep>,
}

impl<'a> Recorder<'a> {
    pub fn new(start: &Polynomial, eqs: &'a EquationSet) -> Recorder<'a> {
        Recorder {
            eqs,
            live: OrderedMultiset::from_sorted(start.words().to_vec()),
            steps: Vec::new(),
        }
    }

    pub fn expand(&mut self, word: &[Symbol], split: usize, equation: usize) -> Result<()> {
        let w = word.to_vec();
        let i = self.live.rank(&w);
        if self.live.get(i) != Some(&w) {
            return Err(Error::Precondition("expanded word is not a summand".into()));
        }
        check_step(
            &ExpansionStep::new(i, split, equation),
            word,
            self.eqs,
            self.steps.len(),
        )?;
        self.live.remove_at(i);
        for x in expand_word(word, split, &self.eqs.equations[equation]) {
            self.live.insert(x);
        }
        self.steps.push(ExpansionStep::new(i, split, equation));
        Ok(())
    }

    pub fn finish(self) -> (Polynomial, Vec<ExpansionStep>) {
        (Polynomial::from_words(self.live.into_vec()), self.steps)
    }
}
