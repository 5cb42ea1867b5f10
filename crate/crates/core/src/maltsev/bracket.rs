//! Bracketing bijections and the bracket-to-grid term construction.

use std::fmt;

use crate::algebra::FiniteAlgebra;
use crate::error::{Error, Result};
use crate::term::Term;

use super::schema::{self, grid_position};
use super::solver::verify_solution;
use super::Witness;

/// The first clause of the bracket definition that a candidate bijection violates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BracketViolation {
    OddLength(usize),
    OutOfRange { position: usize, value: usize },
    FixedPoint(usize),
    NotSelfInverse { position: usize },
    Nesting { i: usize, j: usize },
    Parity(usize),
}

impl fmt::Display for BracketViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BracketViolation::OddLength(len) => {
                write!(f, "length: {len} is not a positive even number")
            }
            BracketViolation::OutOfRange { position, value } => {
                write!(f, "range: phi({position}) = {value} is outside 1..2n")
            }
            BracketViolation::FixedPoint(i) => write!(f, "fixed points: phi({i}) = {i}"),
            BracketViolation::NotSelfInverse { position } => {
                write!(f, "self-inverse: phi(phi({position})) != {position}")
            }
            BracketViolation::Nesting { i, j } => write!(
                f,
                "nesting: {i} < {j} < phi({i}) but phi({j}) is not strictly between {i} and phi({i})"
            ),
            BracketViolation::Parity(i) => write!(f, "parity: phi({i}) has the parity of {i}"),
        }
    }
}

/// Checks that `phi` (1-based values) is a self-inverse, fixed-point free,
/// properly nested bijection on `1..=2n`.
pub fn validate_bracket(phi: &[usize]) -> std::result::Result<(), BracketViolation> {
    let len = phi.len();
    if len == 0 || len % 2 == 1 {
        return Err(BracketViolation::OddLength(len));
    }
    let at = |i: usize| phi[i - 1];
    for i in 1..=len {
        if !(1..=len).contains(&at(i)) {
            return Err(BracketViolation::OutOfRange {
                position: i,
                value: at(i),
            });
        }
    }
    for i in 1..=len {
        if at(i) == i {
            return Err(BracketViolation::FixedPoint(i));
        }
    }
    for i in 1..=len {
        if at(at(i)) != i {
            return Err(BracketViolation::NotSelfInverse { position: i });
        }
    }
    for i in 1..=len {
        for j in i + 1..at(i) {
            if !(i < at(j) && at(j) < at(i)) {
                return Err(BracketViolation::Nesting { i, j });
            }
        }
    }
    for i in 1..=len {
        if at(i) % 2 == i % 2 {
            return Err(BracketViolation::Parity(i));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketShape {
    phi: Vec<usize>,
}

impl BracketShape {
    pub fn new(phi: Vec<usize>) -> Result<BracketShape> {
        validate_bracket(&phi).map_err(|v| Error::InvalidBracket(v.to_string()))?;
        Ok(BracketShape { phi })
    }

    pub fn n(&self) -> usize {
        self.phi.len() / 2
    }

    /// `phi(i)` for `1 <= i <= 2n`.
    pub fn phi(&self, i: usize) -> usize {
        self.phi[i - 1]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.phi
    }

    /// `psi(i) = phi(2i-1)/2`: odd positions to their (halved) even partners.
    pub fn psi(&self, i: usize) -> usize {
        self.phi(2 * i - 1) / 2
    }

    /// `psi'(i) = (phi(2i)+1)/2`, the inverse of `psi`.
    pub fn psi_prime(&self, i: usize) -> usize {
        self.phi(2 * i).div_ceil(2)
    }
}

impl fmt::Display for BracketShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.phi.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Builds `n x (n+1) x 3` grid terms from verified bracket terms `b1..b2n`.
///
/// With `psi`, `psi'` as above:
/// `g1 = x(1,1)`, `g(n+1) = x(n,3)`,
/// `g_i = b(2i-1)(x(i,1), x(psi(i),2), x(i-1,3))` for `1 < i <= n`, and
/// `f_i = b(2i)(x(i,1), x(psi'(i),2), x(i+1,3))`.
pub fn construct_grid_from_bracket(
    algebra: &FiniteAlgebra,
    bracket_witness: &Witness,
    shape: &BracketShape,
) -> Result<Witness> {
    let bracket_schema = schema::bracket(shape);
    if !verify_solution(algebra, &bracket_schema, bracket_witness)? {
        return Err(Error::Precondition(
            "bracket witness does not satisfy the bracket identities".into(),
        ));
    }
    let n = shape.n();
    let m = 3;
    let b = |i: usize| -> Result<&Term> {
        bracket_witness
            .get(&format!("b{i}"))
            .ok_or_else(|| Error::Precondition(format!("missing bracket term b{i}")))
    };
    let v = |a: usize, k: usize| Term::var(grid_position(m, a, k));

    let mut out = Witness::default();
    for i in 1..=n {
        let body = b(2 * i)?.substitute(&[v(i, 1), v(shape.psi_prime(i), 2), v(i + 1, 3)])?;
        out.insert(format!("f{i}"), body);
    }
    out.insert("g1", v(1, 1));
    for i in 2..=n {
        let body = b(2 * i - 1)?.substitute(&[v(i, 1), v(shape.psi(i), 2), v(i - 1, 3)])?;
        out.insert(format!("g{i}"), body);
    }
    out.insert(format!("g{}", n + 1), v(n, 3));

    let grid = schema::grid(n, m)?;
    if !verify_solution(algebra, &grid, &out)? {
        return Err(Error::Precondition(
            "constructed grid terms fail the grid identities".into(),
        ));
    }
    Ok(out)
}
