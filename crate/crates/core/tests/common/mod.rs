#![allow(dead_code)]

use std::collections::HashSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use sdterms::maltsev::{ConditionSchema, Side};
use sdterms::semiring::{
    apply_parallel, diamond_join, sequentialize, Alphabet, Certificate, EquationSet, ExpansionStep,
    Polynomial, Word,
};
use sdterms::{Element, FiniteAlgebra};

fn apply_op(size: usize, table: &[Element], args: &[Element]) -> Element {
    let mut idx = 0;
    for &a in args {
        idx = idx * size + a as usize;
    }
    table[idx]
}

/// Subuniverse of `algebra^n` generated by `gens`, by applying every
/// operation to every tuple of members until nothing new appears.
pub fn closure_oracle(algebra: &FiniteAlgebra, gens: &[Vec<Element>]) -> HashSet<Vec<Element>> {
    let size = algebra.size();
    let mut set: HashSet<Vec<Element>> = gens.iter().cloned().collect();
    loop {
        let members: Vec<Vec<Element>> = set.iter().cloned().collect();
        let before = set.len();
        for op in algebra.ops() {
            let k = op.arity;
            let mut choice = vec![0usize; k];
            let mut args = vec![0 as Element; k];
            'outer: loop {
                let n = members.first().map_or(0, Vec::len);
                let out: Vec<Element> = (0..n)
                    .map(|c| {
                        for (slot, &i) in args.iter_mut().zip(&choice) {
                            *slot = members[i][c];
                        }
                        apply_op(size, &op.table, &args)
                    })
                    .collect();
                set.insert(out);
                for pos in (0..k).rev() {
                    choice[pos] += 1;
                    if choice[pos] < members.len() {
                        continue 'outer;
                    }
                    choice[pos] = 0;
                }
                break;
            }
        }
        if set.len() == before {
            return set;
        }
    }
}

/// All `k`-tuples over `0..size` in lexicographic order.
pub fn tuples(size: usize, k: usize) -> Vec<Vec<Element>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..size).map(move |a| {
                    let mut t = t.clone();
                    t.push(a as Element);
                    t
                })
            })
            .collect();
    }
    out
}

/// Tables of the `k`-ary term operations, as the subpower of
/// `A^(size^k)` generated by the projections.
pub fn clone_oracle(algebra: &FiniteAlgebra, k: usize) -> Vec<Vec<Element>> {
    let rows = tuples(algebra.size(), k);
    let projections: Vec<Vec<Element>> = (0..k)
        .map(|i| rows.iter().map(|r| r[i]).collect())
        .collect();
    let mut out: Vec<_> = closure_oracle(algebra, &projections).into_iter().collect();
    out.sort();
    out
}

fn side_value(size: usize, tables: &[&Vec<Element>], side: &Side, vals: &[Element]) -> Element {
    match side {
        Side::Var(v) => vals[*v],
        Side::App { symbol, pattern } => {
            let args: Vec<Element> = pattern.iter().map(|&v| vals[v]).collect();
            apply_op(size, tables[*symbol], &args)
        }
    }
}

/// Decides a schema by trying every combination of term operations. `None`
/// when a table would have more than 16 rows or the combinations exceed
/// `limit`.
pub fn brute_force_decide(
    algebra: &FiniteAlgebra,
    schema: &ConditionSchema,
    limit: usize,
) -> Option<bool> {
    let size = algebra.size();
    if schema.symbols.iter().any(|d| size.pow(d.arity as u32) > 16) {
        return None;
    }
    let clones: Vec<Vec<Vec<Element>>> = schema
        .symbols
        .iter()
        .enumerate()
        .map(|(s, d)| {
            let all = clone_oracle(algebra, d.arity);
            let rows = tuples(size, d.arity);
            match schema.pins.iter().find(|p| p.symbol == s) {
                Some(pin) => {
                    let proj: Vec<Element> = rows.iter().map(|r| r[pin.projection]).collect();
                    all.into_iter().filter(|t| *t == proj).collect()
                }
                None => all,
            }
        })
        .collect();
    let total = clones
        .iter()
        .try_fold(1usize, |acc, c| acc.checked_mul(c.len()))?;
    if total > limit {
        return None;
    }
    let valuations = tuples(size, schema.var_count());
    let mut choice = vec![0usize; clones.len()];
    if clones.iter().any(Vec::is_empty) {
        return Some(false);
    }
    loop {
        let tables: Vec<&Vec<Element>> = choice.iter().zip(&clones).map(|(&i, c)| &c[i]).collect();
        let holds = valuations.iter().all(|v| {
            schema.identities.iter().all(|id| {
                side_value(size, &tables, &id.lhs, v) == side_value(size, &tables, &id.rhs, v)
            })
        });
        if holds {
            return Some(true);
        }
        let mut pos = choice.len();
        loop {
            if pos == 0 {
                return Some(false);
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < clones[pos].len() {
                break;
            }
            choice[pos] = 0;
        }
    }
}

/// Small equation sets over `a b c` in which every equation has at least
/// two monomials.
pub fn equation_sets() -> Vec<EquationSet> {
    let specs: [&[&str]; 4] = [
        &["a + b"],
        &["a + b", "c + a*c"],
        &["a + b + c", "b*b + c"],
        &["a*b + c", "a + c", "b + b"],
    ];
    specs
        .iter()
        .map(|eqs| {
            let alphabet = Alphabet::new(vec!["a".into(), "b".into(), "c".into()]).unwrap();
            let polys = eqs
                .iter()
                .map(|e| alphabet.parse_polynomial(e).unwrap())
                .collect();
            EquationSet::new(alphabet, polys).unwrap()
        })
        .collect()
}

pub fn random_word(rng: &mut ChaCha8Rng, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| rng.gen_range(0..3)).collect()
}

pub fn random_polynomial(rng: &mut ChaCha8Rng, max_summands: usize, max_len: usize) -> Polynomial {
    let k = rng.gen_range(1..=max_summands);
    Polynomial::from_words((0..k).map(|_| random_word(rng, max_len)).collect())
}

/// Distinct summands of `p`, each with a random split and equation.
pub fn random_parallel_step(
    rng: &mut ChaCha8Rng,
    p: &Polynomial,
    eqs: &EquationSet,
) -> Vec<ExpansionStep> {
    let mut out = Vec::new();
    for (i, w) in p.words().iter().enumerate() {
        if rng.gen_bool(0.6) {
            let split = rng.gen_range(0..=w.len());
            out.push(ExpansionStep::new(i, split, rng.gen_range(0..eqs.len())));
        }
    }
    out
}

/// `r ~ q` obtained from two random parallel steps out of `r` and their
/// diamond join: `r -> p -> join` on the left, `q -> join` on the right.
pub fn random_rooted_certificate(
    rng: &mut ChaCha8Rng,
    r: &Polynomial,
    eqs: &EquationSet,
) -> Certificate {
    let p_step = random_parallel_step(rng, r, eqs);
    let q_step = random_parallel_step(rng, r, eqs);
    let dj = diamond_join(r, &p_step, &q_step, eqs).unwrap();
    let left_steps = sequentialize(r, &[p_step, dj.from_p.clone()], eqs).unwrap();
    let right_steps = sequentialize(&dj.q, std::slice::from_ref(&dj.from_q), eqs).unwrap();
    Certificate {
        left: r.clone(),
        right: dj.q,
        left_steps,
        right_steps,
        common: dj.join,
    }
}

/// The certificate `p ~ q` of a diamond join, from both parallel steps.
pub fn diamond_certificate(
    r: &Polynomial,
    p_step: &[ExpansionStep],
    q_step: &[ExpansionStep],
    eqs: &EquationSet,
) -> Certificate {
    let p = apply_parallel(r, p_step, eqs).unwrap().result;
    let q = apply_parallel(r, q_step, eqs).unwrap().result;
    let dj = diamond_join(r, p_step, q_step, eqs).unwrap();
    assert_eq!((&dj.p, &dj.q), (&p, &q));
    Certificate {
        left_steps: sequentialize(&p, &[dj.from_p], eqs).unwrap(),
        right_steps: sequentialize(&q, &[dj.from_q], eqs).unwrap(),
        left: p,
        right: q,
        common: dj.join,
    }
}
