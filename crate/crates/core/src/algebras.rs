//! A small zoo of idempotent algebras used by tests, examples and the CLI.

use crate::algebra::{Element, FiniteAlgebra};

/// `({0,1}, ∧)`.
pub fn meet_semilattice() -> FiniteAlgebra {
    FiniteAlgebra::from_fn(2, vec![("meet", 2, &|a: &[Element]| a[0].min(a[1]))]).unwrap()
}

/// The chain `0 < 1 < ... < size-1` with binary meet.
pub fn chain_semilattice(size: usize) -> FiniteAlgebra {
    FiniteAlgebra::from_fn(size, vec![("meet", 2, &|a: &[Element]| a[0].min(a[1]))]).unwrap()
}

/// `({0,1}, x + y + z mod 2)`, the idempotent reduct of the two-element module.
pub fn z2_affine() -> FiniteAlgebra {
    FiniteAlgebra::from_fn(2, vec![("m", 3, &|a: &[Element]| (a[0] + a[1] + a[2]) % 2)]).unwrap()
}

/// `(Z_3, x - y + z)`.
pub fn z3_affine() -> FiniteAlgebra {
    FiniteAlgebra::from_fn(
        3,
        vec![("m", 3, &|a: &[Element]| (a[0] + 3 - a[1] + a[2]) % 3)],
    )
    .unwrap()
}

/// `({0,1}, p)` with `p(x, y) = x`: only projections are term operations.
pub fn left_projection() -> FiniteAlgebra {
    FiniteAlgebra::from_fn(2, vec![("p", 2, &|a: &[Element]| a[0])]).unwrap()
}

/// The two-element lattice.
pub fn lattice2() -> FiniteAlgebra {
    FiniteAlgebra::from_fn(
        2,
        vec![
            ("meet", 2, &|a: &[Element]| a[0].min(a[1])),
            ("join", 2, &|a: &[Element]| a[0].max(a[1])),
        ],
    )
    .unwrap()
}

/// `({0,1}, maj)`.
pub fn majority2() -> FiniteAlgebra {
    FiniteAlgebra::from_fn(
        2,
        vec![("maj", 3, &|a: &[Element]| {
            if a[0] + a[1] + a[2] >= 2 {
                1
            } else {
                0
            }
        })],
    )
    .unwrap()
}

/// Three-element set with the dual discriminator (a majority operation).
pub fn dual_discriminator3() -> FiniteAlgebra {
    FiniteAlgebra::from_fn(
        3,
        vec![("d", 3, &|a: &[Element]| {
            if a[0] == a[1] {
                a[0]
            } else {
                a[2]
            }
        })],
    )
    .unwrap()
}

/// Rock-paper-scissors tournament on three elements (a commutative idempotent groupoid).
pub fn rock_paper_scissors() -> FiniteAlgebra {
    FiniteAlgebra::from_fn(
        3,
        vec![("rps", 2, &|a: &[Element]| {
            let (x, y) = (a[0], a[1]);
            if x == y {
                x
            } else if (x + 1) % 3 == y {
                // y beats x
                y
            } else {
                x
            }
        })],
    )
    .unwrap()
}

/// Every algebra in the zoo together with a short name.
pub fn corpus() -> Vec<(&'static str, FiniteAlgebra)> {
    vec![
        ("meet-semilattice", meet_semilattice()),
        ("chain3", chain_semilattice(3)),
        ("z2-affine", z2_affine()),
        ("z3-affine", z3_affine()),
        ("left-projection", left_projection()),
        ("lattice2", lattice2()),
        ("majority2", majority2()),
        ("dual-discriminator3", dual_discriminator3()),
        ("rock-paper-scissors", rock_paper_scissors()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zoo_is_idempotent() {
        for (name, a) in corpus() {
            assert!(a.is_idempotent(), "{name}");
        }
    }
}
