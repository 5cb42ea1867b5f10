//! The rational algebras with sorted-average operations that have a near
//! unanimity term but no `(2+m)`-terms, their subuniverses, and sampled
//! checks of the claims about them.

mod claims;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use claims::{
    check_displayed_jonsson_minors, check_monotone, check_nu, check_sorted_merge_lemma,
    check_symmetric, check_u_claim, check_v_claim, check_v_closure_for_s, check_w_claim,
    decide_no_combined_tuple, probe_v_boundary, run_suite, sample_combined_tuples, ClaimReport,
    SuiteConfig,
};

pub type Rational = BigRational;

/// `n / d` in lowest terms.
pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    A,
    B,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::A => "A",
            Family::B => "B",
        }
    }
}

/// `t^A_n` averages the sorted input without its extreme entries, `t^B_n`
/// without the two smallest and two largest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SortedAvgOp {
    pub family: Family,
    pub n: usize,
}

impl SortedAvgOp {
    pub fn new(family: Family, n: usize) -> Result<SortedAvgOp> {
        if n < 5 {
            return Err(Error::InvalidParameter(format!(
                "sorted-average operations need arity at least 5, got {n}"
            )));
        }
        Ok(SortedAvgOp { family, n })
    }

    pub fn name(&self) -> String {
        format!("t{}{}", self.family.name(), self.n)
    }

    fn trim(&self) -> usize {
        match self.family {
            Family::A => 1,
            Family::B => 2,
        }
    }
}

pub fn t_apply(op: SortedAvgOp, xs: &[Rational]) -> Result<Rational> {
    if xs.len() != op.n {
        return Err(Error::LengthMismatch {
            expected: op.n,
            found: xs.len(),
        });
    }
    let mut sorted = xs.to_vec();
    sorted.sort();
    let k = op.trim();
    let middle = &sorted[k..op.n - k];
    let sum = middle.iter().fold(Rational::zero(), |acc, x| acc + x);
    let out = sum / Rational::from_integer(BigInt::from(middle.len()));
    debug_assert!(is_canonical(&out));
    Ok(out)
}

fn is_canonical(r: &Rational) -> bool {
    r.denom().is_positive() && *r == Rational::new(r.numer().clone(), r.denom().clone())
}

/// `s(x,y,z,w) = t(x,y,z,w,w,w)` for the arity-6 operation of `family`.
pub fn s_minor(family: Family, xs: &[Rational; 4]) -> Rational {
    let [x, y, z, w] = xs;
    let args = [x, y, z, w, w, w].map(Clone::clone);
    t_apply(SortedAvgOp { family, n: 6 }, &args).expect("arity 6")
}

/// `a1 + a2 = 1`.
pub fn in_u(a1: &Rational, a2: &Rational) -> bool {
    a1 + a2 == Rational::one()
}

/// All coordinates non-negative and at least one nonzero.
pub fn in_v(b: &[Rational]) -> bool {
    nonnegative(b) && b.iter().any(|x| !x.is_zero())
}

/// `a1 + a2 < 1` with `b` non-negative, or `a1 + a2 = 1` with `b = 0`.
pub fn in_w(a1: &Rational, a2: &Rational, b: &[Rational]) -> bool {
    let sum = a1 + a2;
    let one = Rational::one();
    (sum < one && nonnegative(b)) || (sum == one && b.iter().all(Zero::is_zero))
}

fn nonnegative(b: &[Rational]) -> bool {
    b.iter().all(|x| !x.is_negative())
}

/// Seeded random rationals with numerators in `[-1000, 1000]` and
/// denominators in `[1, 100]`.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        use rand::SeedableRng;
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn rational(&mut self) -> Rational {
        let n = self.rng.gen_range(-1000..=1000);
        let d = self.rng.gen_range(1..=100);
        rational(n, d)
    }

    pub fn positive(&mut self) -> Rational {
        let n = self.rng.gen_range(1..=1000);
        let d = self.rng.gen_range(1..=100);
        rational(n, d)
    }

    /// Zero with probability `p_zero`, otherwise positive.
    pub fn nonnegative(&mut self, p_zero: f64) -> Rational {
        if self.rng.gen_bool(p_zero) {
            Rational::zero()
        } else {
            self.positive()
        }
    }

    pub fn rationals(&mut self, k: usize) -> Vec<Rational> {
        (0..k).map(|_| self.rational()).collect()
    }

    /// A member of `V_m`: every coordinate zero with probability `p_zero`,
    /// then one random coordinate forced positive.
    pub fn v_member(&mut self, m: usize, p_zero: f64) -> Vec<Rational> {
        let mut b: Vec<Rational> = (0..m).map(|_| self.nonnegative(p_zero)).collect();
        let i = self.rng.gen_range(0..m);
        if b[i].is_zero() {
            b[i] = self.positive();
        }
        b
    }

    /// A member of `W_m`, in the strict part with probability `p_strict`.
    pub fn w_member(&mut self, m: usize, p_strict: f64) -> (Rational, Rational, Vec<Rational>) {
        let a1 = self.rational();
        if self.rng.gen_bool(p_strict) {
            let a2 = Rational::one() - &a1 - self.positive();
            let b = (0..m).map(|_| self.nonnegative(0.5)).collect();
            (a1, a2, b)
        } else {
            let a2 = Rational::one() - &a1;
            (a1, a2, vec![Rational::zero(); m])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        rational(n, 1)
    }

    fn rs(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| r(x)).collect()
    }

    #[test]
    fn sorted_averages() {
        let a5 = SortedAvgOp::new(Family::A, 5).unwrap();
        let b6 = SortedAvgOp::new(Family::B, 6).unwrap();
        assert_eq!(t_apply(a5, &rs(&[0, 0, 0, 0, 1])).unwrap(), r(0));
        assert_eq!(t_apply(a5, &rs(&[4, 0, 3, 1, 2])).unwrap(), r(2));
        assert_eq!(
            t_apply(b6, &rs(&[0, 0, 0, 1, 1, 1])).unwrap(),
            rational(1, 2)
        );
        assert!(t_apply(a5, &rs(&[1, 2])).is_err());
        assert!(SortedAvgOp::new(Family::B, 4).is_err());
    }

    #[test]
    fn s_minors() {
        let c = rational(7, 3);
        assert_eq!(
            s_minor(Family::A, &[c.clone(), c.clone(), c.clone(), c.clone()]),
            c
        );
        assert_eq!(
            s_minor(Family::A, &[r(0), r(1), r(2), r(3)]),
            rational(9, 4)
        );
        assert_eq!(
            s_minor(Family::B, &[r(0), r(0), r(0), r(1)]),
            rational(1, 2)
        );
    }

    #[test]
    fn membership() {
        assert!(in_u(&rational(1, 3), &rational(2, 3)));
        assert!(!in_u(&r(1), &r(1)));
        assert!(in_v(&rs(&[0, 0, 5])));
        assert!(!in_v(&rs(&[0, 0, 0])));
        assert!(!in_v(&rs(&[-1, 2])));
        let half = rational(1, 2);
        assert!(in_w(&half, &half, &rs(&[0, 0, 0])));
        assert!(!in_w(&half, &half, &rs(&[0, 1, 0])));
        assert!(in_w(&half, &r(0), &rs(&[0, 1, 0])));
        assert!(!in_w(&half, &r(0), &rs(&[0, -1, 0])));
        assert!(!in_w(&half, &r(1), &rs(&[0])));
    }

    #[test]
    fn sampled_members_lie_in_their_sets() {
        let mut s = Sampler::new(7);
        for _ in 0..200 {
            assert!(in_v(&s.v_member(3, 0.8)));
            let (a1, a2, b) = s.w_member(3, 0.5);
            assert!(in_w(&a1, &a2, &b));
        }
    }
}
