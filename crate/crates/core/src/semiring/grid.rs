//! Grid equations and the derivation of `n - 1 ~ n`.

use crate::error::{Error, Result};

use super::cert::{
    cert_context, compose_certificates, verify_certificate, Certificate, ExpansionStep, Forest,
    Recorder,
};
use super::poly::{Alphabet, EquationSet, Polynomial, Symbol, Word};

/// Symbol id of `b_{i,j,k}` (1-based indices) in the `n x (n+1) x m` grid.
pub fn grid_symbol(n: usize, m: usize, i: usize, j: usize, k: usize) -> Symbol {
    (((i - 1) * (n + 1) + (j - 1)) * m + (k - 1)) as Symbol
}

/// Inverse of [`grid_symbol`].
pub fn grid_indices(n: usize, m: usize, s: Symbol) -> (usize, usize, usize) {
    let s = s as usize;
    let k = s % m + 1;
    let ij = s / m;
    (ij / (n + 1) + 1, ij % (n + 1) + 1, k)
}

/// Equation index of the column equation for `j`.
pub fn column_equation(j: usize) -> usize {
    j - 1
}

/// Equation index of the row equation for `i`.
pub fn row_equation(n: usize, i: usize) -> usize {
    n + 1 + i - 1
}

fn check_dims(n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter(format!(
            "grid dimensions need n, m >= 1, got n = {n}, m = {m}"
        )));
    }
    Ok(())
}

/// Letters `b_i_j_k` with the column equations `sum_{i,k} b_ijk = 1` for
/// `j = 1..n+1` followed by the row equations `sum_{j,k} b_ijk = 1` for
/// `i = 1..n`.
pub fn grid_equations(n: usize, m: usize) -> Result<EquationSet> {
    check_dims(n, m)?;
    let mut names = Vec::with_capacity(n * (n + 1) * m);
    for i in 1..=n {
        for j in 1..=n + 1 {
            for k in 1..=m {
                names.push(format!("b_{i}_{j}_{k}"));
            }
        }
    }
    let alphabet = Alphabet::new(names)?;
    let mut equations = Vec::with_capacity(2 * n + 1);
    for j in 1..=n + 1 {
        equations.push(column(n, m, j));
    }
    for i in 1..=n {
        equations.push(row(n, m, i));
    }
    EquationSet::new(alphabet, equations)
}

fn row(n: usize, m: usize, i: usize) -> Polynomial {
    Polynomial::from_words(
        (1..=n + 1)
            .flat_map(|j| (1..=m).map(move |k| vec![grid_symbol(n, m, i, j, k)]))
            .collect(),
    )
}

fn column(n: usize, m: usize, j: usize) -> Polynomial {
    Polynomial::from_words(
        (1..=n)
            .flat_map(|i| (1..=m).map(move |k| vec![grid_symbol(n, m, i, j, k)]))
            .collect(),
    )
}

/// `n ~ n + 1`: every `1` on the left is expanded by a different row
/// equation, every `1` on the right by a different column equation; both
/// sides reach the sum of all letters.
pub fn grow_certificate(n: usize, m: usize) -> Result<Certificate> {
    let eqs = grid_equations(n, m)?;
    let left = Polynomial::constant(n);
    let right = Polynomial::constant(n + 1);
    let mut l = Recorder::new(&left, &eqs);
    for i in 1..=n {
        l.expand(&[], 0, row_equation(n, i))?;
    }
    let mut r = Recorder::new(&right, &eqs);
    for j in 1..=n + 1 {
        r.expand(&[], 0, column_equation(j))?;
    }
    let (common, left_steps) = l.finish();
    let (other, right_steps) = r.finish();
    debug_assert_eq!(common, other);
    Ok(Certificate {
        left,
        right,
        left_steps,
        right_steps,
        common,
    })
}

/// `n - 1 ~ sum_k n * b_k + Z` for the letters `b_k = b_{i',j',k}`,
/// `k` in `ks`.
///
/// The left side expands each `1` by row `i'`, then expands one copy of each
/// `b_k` per other row at split 1 and one copy of each `b_{i',j,k}` with
/// `j != j'` by row `i'` at split 0; that last expansion serves every `b_k`
/// at once. The right side expands each of the `n` copies of every `b_k` at
/// split 1 by a different column `j != j'`.
fn spread_certificate(
    eqs: &EquationSet,
    n: usize,
    m: usize,
    (bi, bj): (usize, usize),
    ks: &[usize],
) -> Result<Certificate> {
    let letters: Vec<Symbol> = ks.iter().map(|&k| grid_symbol(n, m, bi, bj, k)).collect();
    let left = Polynomial::constant(n - 1);
    let mut l = Recorder::new(&left, eqs);
    for _ in 0..n - 1 {
        l.expand(&[], 0, row_equation(n, bi))?;
    }
    for &b in &letters {
        for i in (1..=n).filter(|&i| i != bi) {
            l.expand(&[b], 1, row_equation(n, i))?;
        }
    }
    for j in (1..=n + 1).filter(|&j| j != bj) {
        for k in 1..=m {
            l.expand(&[grid_symbol(n, m, bi, j, k)], 0, row_equation(n, bi))?;
        }
    }
    let (common, left_steps) = l.finish();

    let cols: Vec<usize> = (1..=n + 1).filter(|&j| j != bj).collect();
    let spread = Polynomial::from_words(
        letters
            .iter()
            .flat_map(|&b| {
                cols.iter()
                    .flat_map(|&j| column(n, m, j).into_words())
                    .map(move |w| [vec![b], w].concat())
            })
            .collect(),
    );
    let rest = common
        .checked_sub(&spread)
        .ok_or_else(|| Error::Precondition("spread is not part of the expansion".into()))?;
    let right = Polynomial::constant(n)
        .mul(&letter_sum(&letters))
        .add(&rest);
    let mut r = Recorder::new(&right, eqs);
    for &b in &letters {
        for &j in &cols {
            r.expand(&[b], 1, column_equation(j))?;
        }
    }
    let (other, right_steps) = r.finish();
    if other != common {
        return Err(Error::Precondition(
            "spread certificate sides do not meet".into(),
        ));
    }
    Ok(Certificate {
        left,
        right,
        left_steps,
        right_steps,
        common,
    })
}

fn letter_sum(letters: &[Symbol]) -> Polynomial {
    Polynomial::from_words(letters.iter().map(|&b| vec![b]).collect())
}

/// `sum_k n b_k + rest ~ sum_k (n+1) b_k + rest`: the grow certificate
/// multiplied by each `b_k` on the left.
fn grow_each(
    eqs: &EquationSet,
    n: usize,
    letters: &[Symbol],
    rest: &Polynomial,
) -> Result<Certificate> {
    let sum = letter_sum(letters);
    let left = Polynomial::constant(n).mul(&sum).add(rest);
    let right = Polynomial::constant(n + 1).mul(&sum).add(rest);
    let mut l = Recorder::new(&left, eqs);
    let mut r = Recorder::new(&right, eqs);
    for &b in letters {
        for i in 1..=n {
            l.expand(&[b], 1, row_equation(n, i))?;
        }
        for j in 1..=n + 1 {
            r.expand(&[b], 1, column_equation(j))?;
        }
    }
    let (common, left_steps) = l.finish();
    let (other, right_steps) = r.finish();
    debug_assert_eq!(common, other);
    Ok(Certificate {
        left,
        right,
        left_steps,
        right_steps,
        common,
    })
}

/// `n - 1 ~ n - 1 + b` for a single letter `b`.
///
/// Chains `n - 1 ~ n b + Z ~ (n+1) b + Z ~ n - 1 + b`, the middle link being
/// the grow certificate multiplied by `b` on the left.
pub fn absorb_certificate(n: usize, m: usize, b: (usize, usize, usize)) -> Result<Certificate> {
    check_dims(n, m)?;
    if n < 2 {
        return Err(Error::InvalidParameter("absorption needs n >= 2".into()));
    }
    absorb_letters(&grid_equations(n, m)?, n, m, (b.0, b.1), &[b.2])
}

/// `n - 1 ~ n - 1 + sum_k b_k` for letters sharing row and column, see
/// [`spread_certificate`].
fn absorb_letters(
    eqs: &EquationSet,
    n: usize,
    m: usize,
    cell: (usize, usize),
    ks: &[usize],
) -> Result<Certificate> {
    let letters: Vec<Symbol> = ks
        .iter()
        .map(|&k| grid_symbol(n, m, cell.0, cell.1, k))
        .collect();
    let sum = letter_sum(&letters);
    let spread = spread_certificate(eqs, n, m, cell, ks)?;
    let rest = spread
        .right
        .checked_sub(&Polynomial::constant(n).mul(&sum))
        .expect("right side holds n copies of each letter");
    let grow = grow_each(eqs, n, &letters, &rest)?;
    let back = cert_context(&spread, &Polynomial::one(), &Polynomial::one(), &sum, eqs)?.flip();
    let first = compose_certificates(&spread, &grow, eqs)?;
    compose_certificates(&first, &back, eqs)
}

/// `n - 1 ~ n` over the `n x (n+1) x m` grid equations.
///
/// Absorbs the letters of row 1 into `n - 1`, one column at a time, then contracts
/// `n - 1 + row_1` to `n` with a single row expansion on the right.
pub fn derive_decrease_certificate(n: usize, m: usize) -> Result<Certificate> {
    check_dims(n, m)?;
    if n < 2 {
        return Err(Error::InvalidParameter(
            "the decrease derivation needs n >= 2".into(),
        ));
    }
    let eqs = grid_equations(n, m)?;
    let base = Polynomial::constant(n - 1);
    let mut chain = Certificate::reflexive(&base);
    let mut absorbed = Polynomial::zero();
    let ks: Vec<usize> = (1..=m).collect();
    for j in 1..=n + 1 {
        let step = absorb_letters(&eqs, n, m, (1, j), &ks)?;
        let lifted = cert_context(
            &step,
            &Polynomial::one(),
            &Polynomial::one(),
            &absorbed,
            &eqs,
        )?;
        chain = compose_certificates(&chain, &lifted, &eqs)?;
        let letters: Vec<Symbol> = ks.iter().map(|&k| grid_symbol(n, m, 1, j, k)).collect();
        absorbed = absorbed.add(&letter_sum(&letters));
    }
    let right = Polynomial::constant(n);
    let mut r = Recorder::new(&right, &eqs);
    r.expand(&[], 0, row_equation(n, 1))?;
    let (common, right_steps) = r.finish();
    let close = Certificate {
        left: chain.right.clone(),
        right,
        left_steps: Vec::new(),
        right_steps,
        common,
    };
    compose_certificates(&chain, &close, &eqs)
}

/// The two families of sums read off a certificate of `n - 1 ~ n`: the
/// descendants of each `1` on either side, with the steps producing them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractedSums {
    pub x: Vec<Polynomial>,
    pub y: Vec<Polynomial>,
    pub x_steps: Vec<Vec<ExpansionStep>>,
    pub y_steps: Vec<Vec<ExpansionStep>>,
}

/// Splits each side of a verified `n - 1 ~ n` certificate by the `1` each
/// summand descends from. Every part replays from `1` with its own steps
/// and the parts of each side add up to the common expansion.
pub fn extract_sums(cert: &Certificate, eqs: &EquationSet) -> Result<ExtractedSums> {
    if !verify_certificate(cert, eqs)? {
        return Err(Error::Precondition("certificate does not verify".into()));
    }
    let n = cert.right.len();
    if n == 0 || cert.left != Polynomial::constant(n - 1) || cert.right != Polynomial::constant(n) {
        return Err(Error::Precondition(
            "certificate endpoints are not n - 1 and n".into(),
        ));
    }
    let (x, x_steps) = split_by_root(&cert.left, &cert.left_steps, eqs)?;
    let (y, y_steps) = split_by_root(&cert.right, &cert.right_steps, eqs)?;
    Ok(ExtractedSums {
        x,
        y,
        x_steps,
        y_steps,
    })
}

type Parts = (Vec<Polynomial>, Vec<Vec<ExpansionStep>>);

fn split_by_root(start: &Polynomial, steps: &[ExpansionStep], eqs: &EquationSet) -> Result<Parts> {
    let forest = Forest::from_steps(start, steps, eqs)?;
    let owners = forest.root_owners();
    let mut polys = Vec::new();
    let mut part_steps = Vec::new();
    for root in 0..start.len() {
        let sub = forest.subtree(root, &owners);
        polys.push(sub.leaves());
        part_steps.push(sub.to_steps());
    }
    Ok((polys, part_steps))
}

/// Every letter of the grid alphabet once, as words of length one.
pub fn all_letters(n: usize, m: usize) -> Vec<Word> {
    (0..(n * (n + 1) * m) as Symbol).map(|s| vec![s]).collect()
}
