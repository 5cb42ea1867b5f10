//! Finite-instance checks of the pendant arguments for `(m+m)`-terms.
//!
//! The infinite power `A^omega` is truncated to the rows actually touched by
//! the displayed matrices; the roles of the free generators `0, 1` are played
//! by every pair `(z0, z1)` of elements.

use crate::algebra::{all_tuples, Element, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::subpower::{generate_closure, Budget, ClosureState};
use crate::term::Term;

use super::schema::m1_plus_m2;
use super::solver::verify_solution;
use super::Witness;

/// `h(x, y) = f(x..x, y..y)` with `m` copies of each variable.
pub fn derive_h_term(f: &Term, arity: usize) -> Result<Term> {
    if arity == 0 || arity % 2 == 1 {
        return Err(Error::InvalidParameter(format!(
            "h is derived from a term of even arity, got {arity}"
        )));
    }
    let m = arity / 2;
    let subs: Vec<Term> = (0..arity).map(|i| Term::var(usize::from(i >= m))).collect();
    f.substitute(&subs)
}

/// Pads `(m1+m2)`-terms to `(m1'+m2')`-terms by ignoring the extra variables.
pub fn pad_m1_plus_m2(witness: &Witness, m1: usize, new_m1: usize) -> Result<Witness> {
    if new_m1 < m1 {
        return Err(Error::InvalidParameter(
            "padding cannot shrink the arity".into(),
        ));
    }
    let f = need(witness, "f")?;
    let shift = new_m1 - m1;
    let mut out = witness.clone();
    out.insert("f", f.rename_vars(&|v| if v < m1 { v } else { v + shift }));
    Ok(out)
}

fn need<'a>(witness: &'a Witness, name: &str) -> Result<&'a Term> {
    witness
        .get(name)
        .ok_or_else(|| Error::Precondition(format!("witness has no term `{name}`")))
}

struct Mm<'a> {
    algebra: &'a FiniteAlgebra,
    m: usize,
    f: &'a Term,
    g1: &'a Term,
    g2: &'a Term,
}

impl<'a> Mm<'a> {
    fn new(algebra: &'a FiniteAlgebra, witness: &'a Witness, m: usize) -> Result<Mm<'a>> {
        let schema = m1_plus_m2(m, m)?;
        if !verify_solution(algebra, &schema, witness)? {
            return Err(Error::Precondition(format!(
                "witness does not satisfy the ({m}+{m}) identities"
            )));
        }
        Ok(Mm {
            algebra,
            m,
            f: need(witness, "f")?,
            g1: need(witness, "g1")?,
            g2: need(witness, "g2")?,
        })
    }

    fn h(&self, x: Element, y: Element) -> Result<Element> {
        let args: Vec<Element> = (0..2 * self.m)
            .map(|i| if i < self.m { x } else { y })
            .collect();
        self.algebra.eval_term(self.f, &args)
    }

    /// Evaluates `t` on a 0/1 word with `0 -> z0`, `1 -> z1`.
    fn word(&self, t: &Term, bits: &[bool], z0: Element, z1: Element) -> Result<Element> {
        let args: Vec<Element> = bits.iter().map(|&b| if b { z1 } else { z0 }).collect();
        self.algebra.eval_term(t, &args)
    }
}

/// Unit vectors of length `n` over the roles `z0`, `z1`.
fn units(n: usize, z0: Element, z1: Element) -> Vec<Vec<Element>> {
    (0..n)
        .map(|r| (0..n).map(|c| if c == r { z1 } else { z0 }).collect())
        .collect()
}

fn closure(algebra: &FiniteAlgebra, n: usize, gens: &[Vec<Element>]) -> Result<ClosureState> {
    generate_closure(algebra, n, gens, Budget::default())
}

/// Checks both displayed matrix identities behind `h(x,y), h(y,x)` being
/// absorbed into the tail part of a pendant, for all elements `x, y` and all
/// role pairs `(z0, z1)`.
///
/// Each side is evaluated column by column on `2m + 1` rows. The `f`-image
/// must match the `g2` (first display) or `g1` (second display) image, lie
/// in the pendant generated by `(x, 0...)` and `(y, e_r)`, and have its tail
/// in the subpower generated by the unit vectors.
pub fn check_h_absorption(algebra: &FiniteAlgebra, witness: &Witness, m: usize) -> Result<bool> {
    let mm = Mm::new(algebra, witness, m)?;
    let rows = 2 * m;
    let size = algebra.size();
    for z in all_tuples(size, 2) {
        let (z0, z1) = (z[0], z[1]);
        let tail_units = units(rows, z0, z1);
        let tails = closure(algebra, rows, &tail_units)?;
        for xy in all_tuples(size, 2) {
            let (x, y) = (xy[0], xy[1]);
            let head = |top: Element, tail: &[Element]| {
                let mut col = vec![top];
                col.extend_from_slice(tail);
                col
            };
            let zero = vec![z0; rows];
            let mut gens = vec![head(x, &zero)];
            gens.extend(tail_units.iter().map(|u| head(y, u)));
            let pendant = closure(algebra, rows + 1, &gens)?;

            // (f columns, g term, expected head entry)
            let displays = [
                (
                    (0..rows)
                        .map(|c| {
                            if c < m {
                                head(x, &zero)
                            } else {
                                head(y, &tail_units[c - m])
                            }
                        })
                        .collect::<Vec<_>>(),
                    mm.g2,
                    mm.h(x, y)?,
                ),
                (
                    (0..rows)
                        .map(|c| {
                            if c < m {
                                head(y, &tail_units[c])
                            } else {
                                head(x, &zero)
                            }
                        })
                        .collect::<Vec<_>>(),
                    mm.g1,
                    mm.h(y, x)?,
                ),
            ];
            for (f_cols, g, top) in displays {
                let g_cols: Vec<Vec<Element>> = (0..m).map(|d| head(top, &tail_units[d])).collect();
                let lhs = algebra.eval_term_on_tuples(mm.f, &f_cols)?;
                let rhs = algebra.eval_term_on_tuples(g, &g_cols)?;
                if lhs != rhs || lhs[0] != top {
                    return Ok(false);
                }
                if !pendant.contains(&lhs)? || !tails.contains(&lhs[1..])? {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// `h(x,y) = h(h(x,x), h(y,y))` and `h(v,u) = h(h(v,u), h(v,u))` for all
/// elements: the two rows of the butterfly expansion.
pub fn check_butterfly(algebra: &FiniteAlgebra, h: &Term) -> Result<bool> {
    let ev = |a: Element, b: Element| algebra.eval_term(h, &[a, b]);
    for p in all_tuples(algebra.size(), 2) {
        let (x, y) = (p[0], p[1]);
        if ev(x, y)? != ev(ev(x, x)?, ev(y, y)?)? {
            return Ok(false);
        }
        let vu = ev(y, x)?;
        if vu != ev(vu, vu)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Walks the displayed chain of triples from `g1(10..0), f(10..0)` to
/// `1, h(1,0)`, for every role pair `(z0, z1)`.
///
/// At stage `p = 1..m-1` the chain uses
/// `(w(1^p 0..), w(0^p 1 0..), w(0^(p+1) 1..))` and then
/// `(w(0^(p+1) 1..), 0, w(1^(p+1) 0..))`, once with `w = g1` (length `m`) and
/// once with `w = f` (length `2m`). Every triple must lie in the subpower
/// `R3` generated by the unit triples, paired triples must share their
/// middle entry, and consecutive triples must link up.
pub fn check_transfer_chain(algebra: &FiniteAlgebra, witness: &Witness, m: usize) -> Result<bool> {
    let mm = Mm::new(algebra, witness, m)?;
    let prefix = |ones: usize, len: usize| (0..len).map(|c| c < ones).collect::<Vec<bool>>();
    let suffix = |from: usize, len: usize| (0..len).map(|c| c >= from).collect::<Vec<bool>>();
    let unit = |at: usize, len: usize| (0..len).map(|c| c == at).collect::<Vec<bool>>();

    for z in all_tuples(algebra.size(), 2) {
        let (z0, z1) = (z[0], z[1]);
        let r3 = closure(algebra, 3, &units(3, z0, z1))?;
        let triple = |t: &Term, len: usize, words: [&dyn Fn(usize) -> Vec<bool>; 3]| {
            let mut out = Vec::with_capacity(3);
            for w in words {
                out.push(mm.word(t, &w(len), z0, z1)?);
            }
            Ok::<Vec<Element>, Error>(out)
        };

        let mut x = mm.word(mm.g1, &prefix(1, m), z0, z1)?;
        let mut y = mm.word(mm.f, &prefix(1, 2 * m), z0, z1)?;
        if x != y {
            return Ok(false);
        }
        for p in 1..m {
            let a: [&dyn Fn(usize) -> Vec<bool>; 3] =
                [&|l| prefix(p, l), &|l| unit(p, l), &|l| suffix(p + 1, l)];
            let b: [&dyn Fn(usize) -> Vec<bool>; 3] =
                [&|l| suffix(p + 1, l), &|l| vec![false; l], &|l| {
                    prefix(p + 1, l)
                }];
            for words in [a, b] {
                let left = triple(mm.g1, m, words)?;
                let right = triple(mm.f, 2 * m, words)?;
                if left[0] != x || right[0] != y || left[1] != right[1] {
                    return Ok(false);
                }
                if !r3.contains(&left)? || !r3.contains(&right)? {
                    return Ok(false);
                }
                x = left[2];
                y = right[2];
            }
        }
        if x != z1 || y != mm.h(z1, z0)? {
            return Ok(false);
        }
        if !r3.contains(&[mm.h(z0, z1)?, z0, mm.h(z1, z0)?])? {
            return Ok(false);
        }
    }
    Ok(true)
}
