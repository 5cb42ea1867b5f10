//! Words, polynomials of the free semiring, and equation sets.

use std::fmt;

use crate::error::{Error, Result};

pub type Symbol = u32;

/// A word of the free monoid; the empty word is the unit `1`.
pub type Word = Vec<Symbol>;

/// A finite multiset of words, kept sorted so that equal polynomials have
/// equal representations. The integer `n` is `n` copies of the empty word.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polynomial {
    words: Vec<Word>,
}

impl Polynomial {
    pub fn zero() -> Polynomial {
        Polynomial::default()
    }

    pub fn one() -> Polynomial {
        Polynomial::constant(1)
    }

    pub fn constant(n: usize) -> Polynomial {
        Polynomial {
            words: vec![Vec::new(); n],
        }
    }

    pub fn from_words(mut words: Vec<Word>) -> Polynomial {
        words.sort_unstable();
        Polynomial { words }
    }

    pub fn monomial(word: Word) -> Polynomial {
        Polynomial { words: vec![word] }
    }

    /// Words in canonical (lexicographic) order, repeated by multiplicity.
    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn into_words(self) -> Vec<Word> {
        self.words
    }

    /// Number of summands, counted with multiplicity.
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    pub fn symbol_count(&self) -> usize {
        self.words.iter().map(Vec::len).sum()
    }

    /// `true` if every summand is the empty word.
    pub fn is_constant(&self) -> bool {
        self.words.iter().all(Vec::is_empty)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut words = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.words.iter().peekable(), other.words.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(x), Some(y)) if x <= y => words.push(a.next().unwrap().clone()),
                (Some(_), Some(_)) | (None, Some(_)) => words.push(b.next().unwrap().clone()),
                (Some(_), None) => words.push(a.next().unwrap().clone()),
                (None, None) => break,
            }
        }
        Polynomial { words }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut words = Vec::with_capacity(self.len() * other.len());
        for u in &self.words {
            for v in &other.words {
                let mut w = u.clone();
                w.extend_from_slice(v);
                words.push(w);
            }
        }
        Polynomial::from_words(words)
    }

    /// `self - other` as multisets, or `None` if `other` is not contained.
    pub fn checked_sub(&self, other: &Polynomial) -> Option<Polynomial> {
        let mut words = Vec::with_capacity(self.len());
        let mut b = other.words.iter().peekable();
        for w in &self.words {
            match b.peek() {
                Some(x) if *x == w => {
                    b.next();
                }
                _ => words.push(w.clone()),
            }
        }
        if b.next().is_some() {
            return None;
        }
        Some(Polynomial { words })
    }

    /// Canonical index of the first copy of `word`.
    pub fn index_of(&self, word: &[Symbol]) -> Option<usize> {
        let i = self.words.partition_point(|w| w.as_slice() < word);
        (self.words.get(i).map(Vec::as_slice) == Some(word)).then_some(i)
    }

    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> PolyDisplay<'a> {
        PolyDisplay {
            poly: self,
            alphabet,
        }
    }
}

/// Symbol names. Ids are positions in the list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new(names: Vec<String>) -> Result<Alphabet> {
        for (i, n) in names.iter().enumerate() {
            let bad = n.is_empty()
                || n.parse::<u64>().is_ok()
                || n.chars().any(|c| c.is_whitespace() || c == '+' || c == '*');
            if bad {
                return Err(Error::Parse(format!("invalid symbol name `{n}`")));
            }
            if names[..i].contains(n) {
                return Err(Error::Parse(format!("symbol `{n}` declared twice")));
            }
        }
        Ok(Alphabet { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, s: Symbol) -> &str {
        &self.names[s as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn symbol(&self, name: &str) -> Option<Symbol> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| i as Symbol)
    }

    /// Parses `w1 + w2 + ...` where each word is `a*b*c`, `1` is the empty
    /// word, `0` the zero polynomial and a bare integer `k` stands for `k`.
    pub fn parse_polynomial(&self, text: &str) -> Result<Polynomial> {
        let mut words = Vec::new();
        for part in text.split('+') {
            let part = part.trim();
            if part.is_empty() {
                return Err(Error::Parse(format!("empty summand in `{text}`")));
            }
            if let Ok(k) = part.parse::<usize>() {
                words.extend(std::iter::repeat_with(Vec::new).take(k));
                continue;
            }
            let mut w = Vec::new();
            for letter in part.split('*') {
                let letter = letter.trim();
                w.push(
                    self.symbol(letter)
                        .ok_or_else(|| Error::Parse(format!("unknown symbol `{letter}`")))?,
                );
            }
            words.push(w);
        }
        Ok(Polynomial::from_words(words))
    }

    pub fn check_word(&self, w: &[Symbol]) -> Result<()> {
        match w.iter().find(|&&s| s as usize >= self.len()) {
            Some(s) => Err(Error::Parse(format!("symbol id {s} outside the alphabet"))),
            None => Ok(()),
        }
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Polynomial,
    alphabet: &'a Alphabet,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        for (i, w) in self.poly.words().iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if w.is_empty() {
                write!(f, "1")?;
            }
            for (j, &s) in w.iter().enumerate() {
                if j > 0 {
                    write!(f, "*")?;
                }
                write!(f, "{}", self.alphabet.name(s))?;
            }
        }
        Ok(())
    }
}

/// Equations `e_i = 1` over an alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSet {
    pub alphabet: Alphabet,
    pub equations: Vec<Polynomial>,
}

impl EquationSet {
    pub fn new(alphabet: Alphabet, equations: Vec<Polynomial>) -> Result<EquationSet> {
        for e in &equations {
            for w in e.words() {
                alphabet.check_word(w)?;
            }
        }
        Ok(EquationSet {
            alphabet,
            equations,
        })
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<&Polynomial> {
        self.equations.get(i)
    }

    /// Bounded search relies on every expansion adding summands.
    pub fn check_strict_growth(&self) -> Result<()> {
        match self.equations.iter().position(|e| e.len() < 2) {
            Some(i) => Err(Error::InvalidParameter(format!(
                "equation {i} has fewer than two monomials, so expansions need not grow"
            ))),
            None => Ok(()),
        }
    }

    /// Text form: an `alphabet` line followed by one `e <polynomial>` line
    /// per equation.
    pub fn to_text(&self) -> String {
        let mut out = format!("alphabet {}\n", self.alphabet.names().join(" "));
        for e in &self.equations {
            out.push_str(&format!("e {}\n", e.display(&self.alphabet)));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<EquationSet> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty equation file".into()))?;
        let names = header
            .strip_prefix("alphabet")
            .ok_or_else(|| Error::Parse("equation file must start with `alphabet`".into()))?;
        let alphabet = Alphabet::new(names.split_whitespace().map(String::from).collect())?;
        let mut equations = Vec::new();
        for line in lines {
            let body = line.strip_prefix("e ").ok_or_else(|| {
                Error::Parse(format!("expected `e <polynomial>`, found `{line}`"))
            })?;
            equations.push(alphabet.parse_polynomial(body)?);
        }
        EquationSet::new(alphabet, equations)
    }
}

const CHUNK: usize = 64;

/// Sorted multiset with positional access, stored as sorted chunks with a
/// Fenwick tree over the chunk sizes. Positional lookups and rank queries
/// take `O(log n + CHUNK)`.
#[derive(Debug, Clone)]
pub(crate) struct OrderedMultiset<T> {
    chunks: Vec<Vec<T>>,
    fenwick: Vec<usize>,
    len: usize,
}

impl<T: Ord> OrderedMultiset<T> {
    pub fn from_sorted(items: Vec<T>) -> Self {
        let len = items.len();
        let mut chunks = Vec::new();
        let mut it = items.into_iter().peekable();
        while it.peek().is_some() {
            chunks.push(it.by_ref().take(CHUNK).collect());
        }
        let mut m = OrderedMultiset {
            chunks,
            fenwick: Vec::new(),
            len,
        };
        m.rebuild();
        m
    }

    fn rebuild(&mut self) {
        let n = self.chunks.len();
        self.fenwick = vec![0; n + 1];
        for (c, chunk) in self.chunks.iter().enumerate() {
            self.fenwick[c + 1] += chunk.len();
            let parent = (c + 1) + ((c + 1) & (c + 1).wrapping_neg());
            if parent <= n {
                self.fenwick[parent] += self.fenwick[c + 1];
            }
        }
    }

    fn bump(&mut self, c: usize, up: bool) {
        let mut i = c + 1;
        while i < self.fenwick.len() {
            if up {
                self.fenwick[i] += 1;
            } else {
                self.fenwick[i] -= 1;
            }
            i += i & i.wrapping_neg();
        }
    }

    /// Number of elements in chunks `0..c`.
    fn before(&self, c: usize) -> usize {
        let (mut i, mut s) = (c, 0);
        while i > 0 {
            s += self.fenwick[i];
            i -= i & i.wrapping_neg();
        }
        s
    }

    pub fn len(&self) -> usize {
        self.len
    }

    fn locate(&self, i: usize) -> Option<(usize, usize)> {
        if i >= self.len {
            return None;
        }
        let n = self.chunks.len();
        let (mut pos, mut rest) = (0, i);
        let mut step = n.next_power_of_two();
        while step > 0 {
            if pos + step <= n && self.fenwick[pos + step] <= rest {
                pos += step;
                rest -= self.fenwick[pos];
            }
            step /= 2;
        }
        Some((pos, rest))
    }

    pub fn get(&self, i: usize) -> Option<&T> {
        self.locate(i).map(|(c, j)| &self.chunks[c][j])
    }

    pub fn remove_at(&mut self, i: usize) -> Option<T> {
        let (c, j) = self.locate(i)?;
        let x = self.chunks[c].remove(j);
        self.len -= 1;
        if self.chunks[c].is_empty() {
            self.chunks.remove(c);
            self.rebuild();
        } else {
            self.bump(c, false);
        }
        Some(x)
    }

    fn chunk_for(&self, x: &T) -> usize {
        self.chunks
            .partition_point(|ch| ch.last().is_some_and(|l| l < x))
            .min(self.chunks.len().saturating_sub(1))
    }

    pub fn insert(&mut self, x: T) {
        self.len += 1;
        if self.chunks.is_empty() {
            self.chunks.push(vec![x]);
            self.rebuild();
            return;
        }
        let c = self.chunk_for(&x);
        let chunk = &mut self.chunks[c];
        let j = chunk.partition_point(|y| *y < x);
        chunk.insert(j, x);
        if chunk.len() > 2 * CHUNK {
            let tail = chunk.split_off(CHUNK);
            self.chunks.insert(c + 1, tail);
            self.rebuild();
        } else {
            self.bump(c, true);
        }
    }

    /// Number of elements strictly smaller than `x`.
    pub fn rank(&self, x: &T) -> usize {
        if self.chunks.is_empty() {
            return 0;
        }
        let c = self.chunk_for(x);
        self.before(c) + self.chunks[c].partition_point(|y| y < x)
    }

    pub fn into_vec(self) -> Vec<T> {
        self.chunks.into_iter().flatten().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Alphabet {
        Alphabet::new(vec!["a".into(), "b".into(), "c".into()]).unwrap()
    }

    #[test]
    fn arithmetic() {
        let one = Polynomial::one();
        assert_eq!(one.add(&one), Polynomial::constant(2));
        let ab = Polynomial::from_words(vec![vec![1], vec![0]]);
        let c = Polynomial::monomial(vec![2]);
        assert_eq!(
            ab.mul(&c),
            Polynomial::from_words(vec![vec![0, 2], vec![1, 2]])
        );
        assert_eq!(ab.mul(&one), ab);
        assert_eq!(Polynomial::zero().mul(&ab), Polynomial::zero());
        assert_eq!(ab.add(&c).checked_sub(&c), Some(ab.clone()));
        assert_eq!(ab.checked_sub(&c), None);
    }

    #[test]
    fn text_round_trip() {
        let a = abc();
        let p = a.parse_polynomial("c*a + 1 + a + 2").unwrap();
        assert_eq!(p.len(), 5);
        let shown = p.display(&a).to_string();
        assert_eq!(shown, "1 + 1 + 1 + a + c*a");
        assert_eq!(a.parse_polynomial(&shown).unwrap(), p);
        assert_eq!(a.parse_polynomial("0").unwrap(), Polynomial::zero());
        assert_eq!(Polynomial::zero().display(&a).to_string(), "0");
        assert!(a.parse_polynomial("a + d").is_err());
        assert!(a.parse_polynomial("a + ").is_err());
        assert!(Alphabet::new(vec!["a".into(), "a".into()]).is_err());
        assert!(Alphabet::new(vec!["7".into()]).is_err());
    }

    #[test]
    fn equation_text() {
        let e = EquationSet::new(abc(), vec![abc().parse_polynomial("a + b").unwrap()]).unwrap();
        let back = EquationSet::from_text(&e.to_text()).unwrap();
        assert_eq!(back, e);
        assert!(e.check_strict_growth().is_ok());
        let single = EquationSet::new(abc(), vec![Polynomial::monomial(vec![0])]).unwrap();
        assert!(single.check_strict_growth().is_err());
    }

    #[test]
    fn ordered_multiset_matches_sorted_vec() {
        let mut m = OrderedMultiset::from_sorted(Vec::<u32>::new());
        let mut v: Vec<u32> = Vec::new();
        let mut x: u32 = 7;
        for step in 0..5000u32 {
            x = x.wrapping_mul(1_103_515_245).wrapping_add(12_345) % 1000;
            if step % 3 == 2 && !v.is_empty() {
                let i = (x as usize) % v.len();
                assert_eq!(m.remove_at(i), Some(v.remove(i)));
            } else {
                m.insert(x);
                let j = v.partition_point(|y| *y <= x);
                v.insert(j, x);
            }
            assert_eq!(m.len(), v.len());
        }
        assert_eq!(m.rank(&500), v.partition_point(|y| *y < 500));
        assert_eq!(m.get(3), v.get(3));
        assert_eq!(m.into_vec(), v);
    }
}
