//! Finite algebras given by operation tables, and term evaluation.
//!
//! Elements are dense indices `0..size`. Tables are row-major with the
//! leftmost argument varying slowest, which is also the JSON file layout:
//!
//! ```json
//! {"size": 2, "ops": [{"name": "meet", "arity": 2, "table": [0, 0, 0, 1]}]}
//! ```

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::term::Term;

pub type Element = u16;

/// One value per variable index.
pub type Valuation = [Element];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Operation {
    pub name: String,
    pub arity: usize,
    pub table: Vec<Element>,
}

impl Operation {
    /// Row-major table index of an argument tuple.
    #[inline]
    pub fn index_of(&self, size: usize, args: impl IntoIterator<Item = Element>) -> usize {
        args.into_iter()
            .fold(0usize, |acc, a| acc * size + a as usize)
    }

    #[inline]
    pub fn apply(&self, size: usize, args: &[Element]) -> Element {
        debug_assert_eq!(args.len(), self.arity);
        self.table[self.index_of(size, args.iter().copied())]
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawAlgebra {
    size: usize,
    ops: Vec<Operation>,
}

#[derive(Debug, Clone)]
pub struct FiniteAlgebra {
    size: usize,
    ops: Vec<Operation>,
    by_name: HashMap<String, usize>,
}

impl PartialEq for FiniteAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.size == other.size && self.ops == other.ops
    }
}

impl Eq for FiniteAlgebra {}

impl FiniteAlgebra {
    pub fn new(size: usize, ops: Vec<Operation>) -> Result<FiniteAlgebra> {
        if size == 0 {
            return Err(Error::InvalidAlgebra("size must be positive".into()));
        }
        if size > Element::MAX as usize + 1 {
            return Err(Error::InvalidAlgebra(format!(
                "size {size} exceeds the element range"
            )));
        }
        let mut by_name = HashMap::new();
        for (i, op) in ops.iter().enumerate() {
            if op.arity == 0 {
                return Err(Error::InvalidAlgebra(format!(
                    "operation `{}` has arity 0",
                    op.name
                )));
            }
            let expected = size.checked_pow(op.arity as u32).ok_or_else(|| {
                Error::InvalidAlgebra(format!("table of `{}` is too large", op.name))
            })?;
            if op.table.len() != expected {
                return Err(Error::InvalidAlgebra(format!(
                    "table of `{}` has {} entries, expected {expected}",
                    op.name,
                    op.table.len()
                )));
            }
            if let Some(bad) = op.table.iter().find(|&&e| e as usize >= size) {
                return Err(Error::InvalidAlgebra(format!(
                    "table of `{}` contains element {bad} outside 0..{size}",
                    op.name
                )));
            }
            if by_name.insert(op.name.clone(), i).is_some() {
                return Err(Error::InvalidAlgebra(format!(
                    "duplicate operation name `{}`",
                    op.name
                )));
            }
        }
        Ok(FiniteAlgebra { size, ops, by_name })
    }

    /// Builds an operation table by evaluating `f` on every argument tuple.
    pub fn from_fn(
        size: usize,
        ops: Vec<(&str, usize, &dyn Fn(&[Element]) -> Element)>,
    ) -> Result<FiniteAlgebra> {
        let ops = ops
            .into_iter()
            .map(|(name, arity, f)| Operation {
                name: name.to_string(),
                arity,
                table: all_tuples(size, arity).map(|args| f(&args)).collect(),
            })
            .collect();
        FiniteAlgebra::new(size, ops)
    }

    pub fn from_json(text: &str) -> Result<FiniteAlgebra> {
        let raw: RawAlgebra =
            serde_json::from_str(text).map_err(|e| Error::InvalidAlgebra(e.to_string()))?;
        FiniteAlgebra::new(raw.size, raw.ops)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&RawAlgebra {
            size: self.size,
            ops: self.ops.clone(),
        })
        .expect("algebra serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<FiniteAlgebra> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| {
            Error::InvalidAlgebra(format!("cannot read {}: {e}", path.as_ref().display()))
        })?;
        FiniteAlgebra::from_json(&text)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn op(&self, name: &str) -> Result<&Operation> {
        self.by_name
            .get(name)
            .map(|&i| &self.ops[i])
            .ok_or_else(|| Error::UnknownOperation(name.to_string()))
    }

    pub fn op_index(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    /// Every operation satisfies `h(a, ..., a) = a`.
    pub fn is_idempotent(&self) -> bool {
        self.ops.iter().all(|op| {
            (0..self.size).all(|a| {
                let args = vec![a as Element; op.arity];
                op.apply(self.size, &args) as usize == a
            })
        })
    }

    /// Checks that the term only uses known operations at their arities.
    pub fn check_term(&self, term: &Term) -> Result<()> {
        match term {
            Term::Var(_) => Ok(()),
            Term::App { op, args } => {
                let o = self.op(op)?;
                if o.arity != args.len() {
                    return Err(Error::ArityMismatch {
                        op: op.to_string(),
                        expected: o.arity,
                        found: args.len(),
                    });
                }
                args.iter().try_for_each(|a| self.check_term(a))
            }
        }
    }

    /// Evaluates `term` bottom-up under the valuation.
    pub fn eval_term(&self, term: &Term, valuation: &Valuation) -> Result<Element> {
        match term {
            Term::Var(i) => {
                let v = valuation.get(*i).copied().ok_or(Error::ValuationTooShort {
                    var: *i,
                    len: valuation.len(),
                })?;
                if v as usize >= self.size {
                    return Err(Error::ElementOutOfRange {
                        element: v as usize,
                        size: self.size,
                    });
                }
                Ok(v)
            }
            Term::App { op, args } => {
                let o = self.op(op)?;
                if o.arity != args.len() {
                    return Err(Error::ArityMismatch {
                        op: op.to_string(),
                        expected: o.arity,
                        found: args.len(),
                    });
                }
                let mut vals = Vec::with_capacity(args.len());
                for a in args.iter() {
                    vals.push(self.eval_term(a, valuation)?);
                }
                Ok(o.apply(self.size, &vals))
            }
        }
    }

    /// Applies `op` coordinatewise to equal-length tuples.
    pub fn power_tuple_apply(&self, op: &str, tuples: &[&[Element]]) -> Result<Vec<Element>> {
        let o = self.op(op)?;
        if o.arity != tuples.len() {
            return Err(Error::ArityMismatch {
                op: op.to_string(),
                expected: o.arity,
                found: tuples.len(),
            });
        }
        let n = tuples.first().map_or(0, |t| t.len());
        for t in tuples {
            if t.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: t.len(),
                });
            }
            self.check_elements(t)?;
        }
        Ok(self.apply_coordinatewise(o, tuples, n))
    }

    pub(crate) fn apply_coordinatewise(
        &self,
        op: &Operation,
        tuples: &[&[Element]],
        n: usize,
    ) -> Vec<Element> {
        let mut args = vec![0 as Element; op.arity];
        (0..n)
            .map(|c| {
                for (slot, t) in args.iter_mut().zip(tuples) {
                    *slot = t[c];
                }
                op.apply(self.size, &args)
            })
            .collect()
    }

    /// Evaluates a term coordinatewise: variable `i` denotes `tuples[i]`.
    ///
    /// Shared subterms are evaluated once.
    pub fn eval_term_on_tuples(
        &self,
        term: &Term,
        tuples: &[Vec<Element>],
    ) -> Result<Vec<Element>> {
        self.check_term(term)?;
        let n = tuples.first().map_or(0, |t| t.len());
        for t in tuples {
            if t.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: t.len(),
                });
            }
        }
        let mut memo = HashMap::new();
        self.eval_tuples_memo(term, tuples, n, &mut memo)
    }

    fn eval_tuples_memo(
        &self,
        term: &Term,
        tuples: &[Vec<Element>],
        n: usize,
        memo: &mut HashMap<(*const u8, *const Term), Vec<Element>>,
    ) -> Result<Vec<Element>> {
        match term {
            Term::Var(i) => tuples.get(*i).cloned().ok_or(Error::ValuationTooShort {
                var: *i,
                len: tuples.len(),
            }),
            Term::App { op, args } => {
                let key = (op.as_ptr(), args.as_ptr());
                if let Some(v) = memo.get(&key) {
                    return Ok(v.clone());
                }
                let o = self.op(op)?;
                let vals = args
                    .iter()
                    .map(|a| self.eval_tuples_memo(a, tuples, n, memo))
                    .collect::<Result<Vec<_>>>()?;
                let refs: Vec<&[Element]> = vals.iter().map(Vec::as_slice).collect();
                let out = self.apply_coordinatewise(o, &refs, n);
                memo.insert(key, out.clone());
                Ok(out)
            }
        }
    }

    pub fn check_elements(&self, t: &[Element]) -> Result<()> {
        match t.iter().find(|&&e| e as usize >= self.size) {
            Some(&e) => Err(Error::ElementOutOfRange {
                element: e as usize,
                size: self.size,
            }),
            None => Ok(()),
        }
    }
}

/// All tuples of `{0..size}^arity` in row-major order.
pub fn all_tuples(size: usize, arity: usize) -> impl Iterator<Item = Vec<Element>> {
    let total = size.pow(arity as u32);
    (0..total).map(move |mut idx| {
        let mut t = vec![0 as Element; arity];
        for slot in t.iter_mut().rev() {
            *slot = (idx % size) as Element;
            idx /= size;
        }
        t
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebras;

    #[test]
    fn eval_examples() {
        let any = algebras::meet_semilattice();
        assert_eq!(any.eval_term(&Term::var(0), &[1]).unwrap(), 1);
        let meet: Term = "(meet x0 x1)".parse().unwrap();
        assert_eq!(any.eval_term(&meet, &[0, 1]).unwrap(), 0);
        let z2 = algebras::z2_affine();
        let m: Term = "(m x0 x1 x2)".parse().unwrap();
        assert_eq!(z2.eval_term(&m, &[1, 1, 0]).unwrap(), 0);
    }

    #[test]
    fn eval_errors_are_distinct() {
        let a = algebras::meet_semilattice();
        assert_eq!(
            a.eval_term(&"(join x0 x1)".parse().unwrap(), &[0, 1]),
            Err(Error::UnknownOperation("join".into()))
        );
        assert!(matches!(
            a.eval_term(&"(meet x0)".parse().unwrap(), &[0]),
            Err(Error::ArityMismatch { .. })
        ));
        assert!(matches!(
            a.eval_term(&"(meet x0 x3)".parse().unwrap(), &[0, 1]),
            Err(Error::ValuationTooShort { var: 3, len: 2 })
        ));
    }

    #[test]
    fn idempotence() {
        assert!(algebras::meet_semilattice().is_idempotent());
        assert!(algebras::z2_affine().is_idempotent());
        let c = FiniteAlgebra::from_fn(2, vec![("c", 2, &|_: &[Element]| 0)]).unwrap();
        assert!(!c.is_idempotent());
    }

    #[test]
    fn power_apply() {
        let s = algebras::meet_semilattice();
        assert_eq!(
            s.power_tuple_apply("meet", &[&[0, 1], &[1, 0]]).unwrap(),
            vec![0, 0]
        );
        let z2 = algebras::z2_affine();
        assert_eq!(
            z2.power_tuple_apply("m", &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])
                .unwrap(),
            vec![1, 1, 1]
        );
        assert_eq!(
            s.power_tuple_apply("meet", &[&[1, 0], &[1, 0]]).unwrap(),
            vec![1, 0]
        );
        assert!(matches!(
            s.power_tuple_apply("meet", &[&[1, 0], &[1]]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn invalid_algebras_rejected() {
        let op = |name: &str, table: Vec<Element>| Operation {
            name: name.into(),
            arity: 2,
            table,
        };
        assert!(FiniteAlgebra::new(2, vec![op("f", vec![0, 1, 1])]).is_err());
        assert!(FiniteAlgebra::new(2, vec![op("f", vec![0, 1, 1, 2])]).is_err());
        assert!(FiniteAlgebra::new(2, vec![op("f", vec![0; 4]), op("f", vec![0; 4])]).is_err());
        assert!(FiniteAlgebra::new(0, vec![]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let a = algebras::z2_affine();
        let b = FiniteAlgebra::from_json(&a.to_json()).unwrap();
        assert_eq!(a, b);
        let text = r#"{"size": 2, "ops": [{"name": "meet", "arity": 2, "table": [0, 0, 0, 1]}]}"#;
        assert_eq!(
            FiniteAlgebra::from_json(text).unwrap(),
            algebras::meet_semilattice()
        );
    }

    #[test]
    fn row_major_leftmost_slowest() {
        // p(x, y) = x: table rows indexed by the first argument.
        let p = algebras::left_projection();
        assert_eq!(p.op("p").unwrap().table, vec![0, 0, 1, 1]);
        assert_eq!(
            all_tuples(2, 2).collect::<Vec<_>>(),
            vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]
        );
    }
}
