//! Height-one condition schemas and the built-in families.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolDecl {
    pub name: String,
    pub arity: usize,
}

/// One side of an identity: a symbol applied to a word over the schema
/// variables, or a bare variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Side {
    App { symbol: usize, pattern: Vec<usize> },
    Var(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identity {
    pub lhs: Side,
    pub rhs: Side,
}

/// The symbol must be the given projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pin {
    pub symbol: usize,
    pub projection: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConditionSchema {
    pub name: String,
    pub variables: Vec<String>,
    pub symbols: Vec<SymbolDecl>,
    pub identities: Vec<Identity>,
    pub pins: Vec<Pin>,
}

impl ConditionSchema {
    pub fn var_count(&self) -> usize {
        self.variables.len()
    }

    pub fn symbol_index(&self, name: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.var_count();
        if !(1..=3).contains(&k) {
            return Err(Error::InvalidSchema(format!(
                "{k} variables; expected 1 to 3"
            )));
        }
        for (i, s) in self.symbols.iter().enumerate() {
            if s.arity == 0 {
                return Err(Error::InvalidSchema(format!(
                    "symbol `{}` has arity 0",
                    s.name
                )));
            }
            if self.symbols[..i].iter().any(|t| t.name == s.name) {
                return Err(Error::InvalidSchema(format!(
                    "symbol `{}` declared twice",
                    s.name
                )));
            }
        }
        let check_side = |side: &Side| -> Result<()> {
            match side {
                Side::Var(v) if *v >= k => Err(Error::InvalidSchema(format!(
                    "undeclared variable index {v}"
                ))),
                Side::Var(_) => Ok(()),
                Side::App { symbol, pattern } => {
                    let decl = self.symbols.get(*symbol).ok_or_else(|| {
                        Error::InvalidSchema(format!("undeclared symbol index {symbol}"))
                    })?;
                    if pattern.len() != decl.arity {
                        return Err(Error::InvalidSchema(format!(
                            "pattern of length {} for `{}` of arity {}",
                            pattern.len(),
                            decl.name,
                            decl.arity
                        )));
                    }
                    if let Some(v) = pattern.iter().find(|&&v| v >= k) {
                        return Err(Error::InvalidSchema(format!(
                            "undeclared variable index {v}"
                        )));
                    }
                    Ok(())
                }
            }
        };
        for id in &self.identities {
            check_side(&id.lhs)?;
            check_side(&id.rhs)?;
        }
        for pin in &self.pins {
            let decl = self.symbols.get(pin.symbol).ok_or_else(|| {
                Error::InvalidSchema(format!("pin on undeclared symbol index {}", pin.symbol))
            })?;
            if pin.projection >= decl.arity {
                return Err(Error::InvalidSchema(format!(
                    "pin of `{}` to projection {} exceeds arity {}",
                    decl.name, pin.projection, decl.arity
                )));
            }
        }
        Ok(())
    }

    pub fn display_side(&self, side: &Side) -> String {
        match side {
            Side::Var(v) => self.variables[*v].clone(),
            Side::App { symbol, pattern } => {
                let word: String = pattern
                    .iter()
                    .map(|&v| self.variables[v].as_str())
                    .collect();
                format!("{}({})", self.symbols[*symbol].name, word)
            }
        }
    }
}

impl fmt::Display for ConditionSchema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "schema {} over ({})",
            self.name,
            self.variables.join(",")
        )?;
        for s in &self.symbols {
            writeln!(f, "  symbol {}/{}", s.name, s.arity)?;
        }
        for id in &self.identities {
            writeln!(
                f,
                "  {} = {}",
                self.display_side(&id.lhs),
                self.display_side(&id.rhs)
            )?;
        }
        for p in &self.pins {
            writeln!(
                f,
                "  {} is projection {}",
                self.symbols[p.symbol].name,
                p.projection + 1
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemaName {
    M1PlusM2,
    Grid,
    Wnu,
    Nu,
    Siggers,
    GluedWnu,
    WeakestIdempotent,
    Bracket,
}

impl FromStr for SchemaName {
    type Err = Error;

    fn from_str(s: &str) -> Result<SchemaName> {
        Ok(match s {
            "m1m2" | "m1_plus_m2" => SchemaName::M1PlusM2,
            "grid" => SchemaName::Grid,
            "wnu" => SchemaName::Wnu,
            "nu" => SchemaName::Nu,
            "siggers" => SchemaName::Siggers,
            "glued-wnu" | "glued_wnu" => SchemaName::GluedWnu,
            "weakest-idempotent" | "weakest_idempotent" => SchemaName::WeakestIdempotent,
            "bracket" => SchemaName::Bracket,
            other => return Err(Error::InvalidParameter(format!("unknown schema `{other}`"))),
        })
    }
}

const X: usize = 0;
const Y: usize = 1;

/// `x...x y x...x` with `y` at `pos`.
pub fn unit_pattern(arity: usize, pos: usize) -> Vec<usize> {
    let mut p = vec![X; arity];
    p[pos] = Y;
    p
}

fn app(symbol: usize, pattern: Vec<usize>) -> Side {
    Side::App { symbol, pattern }
}

fn eq(lhs: Side, rhs: Side) -> Identity {
    Identity { lhs, rhs }
}

fn decl(name: impl Into<String>, arity: usize) -> SymbolDecl {
    SymbolDecl {
        name: name.into(),
        arity,
    }
}

fn xy() -> Vec<String> {
    vec!["x".into(), "y".into()]
}

/// Chains consecutive sides into identities `s0 = s1, s1 = s2, ...`.
fn chain(sides: Vec<Side>) -> Vec<Identity> {
    sides
        .windows(2)
        .map(|w| eq(w[0].clone(), w[1].clone()))
        .collect()
}

fn expect_params(name: &str, params: &[usize], n: usize) -> Result<()> {
    if params.len() != n {
        return Err(Error::InvalidParameter(format!(
            "schema `{name}` takes {n} parameters, got {}",
            params.len()
        )));
    }
    Ok(())
}

pub fn build_condition(name: SchemaName, params: &[usize]) -> Result<ConditionSchema> {
    let schema = match name {
        SchemaName::M1PlusM2 => {
            expect_params("m1m2", params, 2)?;
            m1_plus_m2(params[0], params[1])?
        }
        SchemaName::Grid => {
            expect_params("grid", params, 2)?;
            grid(params[0], params[1])?
        }
        SchemaName::Wnu => {
            expect_params("wnu", params, 1)?;
            wnu(params[0])?
        }
        SchemaName::Nu => {
            expect_params("nu", params, 1)?;
            nu(params[0])?
        }
        SchemaName::Siggers => {
            expect_params("siggers", params, 0)?;
            siggers()
        }
        SchemaName::GluedWnu => {
            expect_params("glued-wnu", params, 0)?;
            glued_wnu()
        }
        SchemaName::WeakestIdempotent => {
            expect_params("weakest-idempotent", params, 0)?;
            weakest_idempotent()
        }
        SchemaName::Bracket => bracket(&super::bracket::BracketShape::new(params.to_vec())?),
    };
    schema.validate()?;
    Ok(schema)
}

/// `(m1+m2)`-terms: `f` of arity `m1+m2`, `g1` of arity `m1`, `g2` of arity `m2`.
pub fn m1_plus_m2(m1: usize, m2: usize) -> Result<ConditionSchema> {
    if m1 == 0 || m2 == 0 {
        return Err(Error::InvalidParameter(
            "m1 and m2 must be at least 1".into(),
        ));
    }
    let (f, g1, g2) = (0, 1, 2);
    let mut identities = Vec::new();
    for i in 0..m1 {
        identities.push(eq(
            app(f, unit_pattern(m1 + m2, i)),
            app(g1, unit_pattern(m1, i)),
        ));
    }
    for i in 0..m2 {
        identities.push(eq(
            app(f, unit_pattern(m1 + m2, m1 + i)),
            app(g2, unit_pattern(m2, i)),
        ));
    }
    Ok(ConditionSchema {
        name: format!("m1m2({m1},{m2})"),
        variables: xy(),
        symbols: vec![decl("f", m1 + m2), decl("g1", m1), decl("g2", m2)],
        identities,
        pins: vec![],
    })
}

/// Position of the grid variable `(a, k)` (1-based pair) among `width` blocks of `m`.
pub fn grid_position(m: usize, a: usize, k: usize) -> usize {
    (a - 1) * m + (k - 1)
}

/// `n x (n+1) x m` grid terms. Symbols `f1..fn` have arity `(n+1)m` with
/// variables indexed by `(j,k)`; `g1..g{n+1}` have arity `nm` indexed by `(i,k)`.
pub fn grid(n: usize, m: usize) -> Result<ConditionSchema> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter(
            "grid terms need n >= 1 and m >= 1".into(),
        ));
    }
    let mut symbols = Vec::new();
    for i in 1..=n {
        symbols.push(decl(format!("f{i}"), (n + 1) * m));
    }
    for j in 1..=n + 1 {
        symbols.push(decl(format!("g{j}"), n * m));
    }
    let mut identities = Vec::new();
    for i in 1..=n {
        for j in 1..=n + 1 {
            for k in 1..=m {
                identities.push(eq(
                    app(i - 1, unit_pattern((n + 1) * m, grid_position(m, j, k))),
                    app(n + j - 1, unit_pattern(n * m, grid_position(m, i, k))),
                ));
            }
        }
    }
    Ok(ConditionSchema {
        name: format!("grid({n},{m})"),
        variables: xy(),
        symbols,
        identities,
        pins: vec![],
    })
}

/// `t(yx...x) = t(xyx...x) = ... = t(x...xy)`.
pub fn wnu(k: usize) -> Result<ConditionSchema> {
    if k < 2 {
        return Err(Error::InvalidParameter(
            "wnu arity must be at least 2".into(),
        ));
    }
    Ok(ConditionSchema {
        name: format!("wnu({k})"),
        variables: xy(),
        symbols: vec![decl("t", k)],
        identities: chain((0..k).map(|i| app(0, unit_pattern(k, i))).collect()),
        pins: vec![],
    })
}

/// `t(x...y...x) = x` for every position.
pub fn nu(k: usize) -> Result<ConditionSchema> {
    if k < 3 {
        return Err(Error::InvalidParameter(
            "nu arity must be at least 3".into(),
        ));
    }
    Ok(ConditionSchema {
        name: format!("nu({k})"),
        variables: xy(),
        symbols: vec![decl("t", k)],
        identities: (0..k)
            .map(|i| eq(app(0, unit_pattern(k, i)), Side::Var(X)))
            .collect(),
        pins: vec![],
    })
}

/// `s(r,a,r,e) = s(a,r,e,a)` over the three variables `r, a, e`.
pub fn siggers() -> ConditionSchema {
    let (r, a, e) = (0, 1, 2);
    ConditionSchema {
        name: "siggers".into(),
        variables: vec!["r".into(), "a".into(), "e".into()],
        symbols: vec![decl("s", 4)],
        identities: vec![eq(app(0, vec![r, a, r, e]), app(0, vec![a, r, e, a]))],
        pins: vec![],
    }
}

/// `w3(yxx) = w3(xyx) = w3(xxy) = w4(yxxx) = w4(xyxx) = w4(xxyx) = w4(xxxy)`.
pub fn glued_wnu() -> ConditionSchema {
    let mut sides: Vec<Side> = (0..3).map(|i| app(0, unit_pattern(3, i))).collect();
    sides.extend((0..4).map(|i| app(1, unit_pattern(4, i))));
    ConditionSchema {
        name: "glued-wnu".into(),
        variables: xy(),
        symbols: vec![decl("w3", 3), decl("w4", 4)],
        identities: chain(sides),
        pins: vec![],
    }
}

/// `t(yxx,xyy) = t(xyx,yxy) = t(xxy,yyx)` for a 6-ary `t`.
pub fn weakest_idempotent() -> ConditionSchema {
    ConditionSchema {
        name: "weakest-idempotent".into(),
        variables: xy(),
        symbols: vec![decl("t", 6)],
        identities: chain(vec![
            app(0, vec![Y, X, X, X, Y, Y]),
            app(0, vec![X, Y, X, Y, X, Y]),
            app(0, vec![X, X, Y, Y, Y, X]),
        ]),
        pins: vec![],
    }
}

/// Bracket terms `b1..b2n` for a bracketing bijection.
pub fn bracket(shape: &super::bracket::BracketShape) -> ConditionSchema {
    let n = shape.n();
    let b = |i: usize| i - 1;
    let mut identities = Vec::new();
    for i in 1..=n {
        identities.push(eq(
            app(b(2 * i), vec![Y, X, X]),
            app(b(2 * i - 1), vec![Y, X, X]),
        ));
    }
    for i in 1..n {
        identities.push(eq(
            app(b(2 * i), vec![X, X, Y]),
            app(b(2 * i + 1), vec![X, X, Y]),
        ));
    }
    for i in 1..=2 * n {
        let j = shape.phi(i);
        if i < j {
            identities.push(eq(app(b(i), vec![X, Y, X]), app(b(j), vec![X, Y, X])));
        }
    }
    ConditionSchema {
        name: format!("bracket({shape})"),
        variables: xy(),
        symbols: (1..=2 * n).map(|i| decl(format!("b{i}"), 3)).collect(),
        identities,
        pins: vec![
            Pin {
                symbol: b(1),
                projection: 0,
            },
            Pin {
                symbol: b(2 * n),
                projection: 2,
            },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m1_plus_m2_shape() {
        let s = build_condition(SchemaName::M1PlusM2, &[3, 3]).unwrap();
        assert_eq!(s.symbols, vec![decl("f", 6), decl("g1", 3), decl("g2", 3)]);
        assert_eq!(s.identities.len(), 6);
        assert_eq!(
            s.identities[4],
            eq(app(0, vec![X, X, X, X, Y, X]), app(2, vec![X, Y, X]))
        );
        assert_eq!(s.display_side(&s.identities[0].lhs), "f(yxxxxx)");
    }

    #[test]
    fn siggers_and_wnu() {
        let s = build_condition(SchemaName::Siggers, &[]).unwrap();
        assert_eq!(s.var_count(), 3);
        assert_eq!(s.identities.len(), 1);
        assert_eq!(s.symbols, vec![decl("s", 4)]);
        let w = build_condition(SchemaName::Wnu, &[3]).unwrap();
        assert_eq!(w.symbols, vec![decl("t", 3)]);
        let shown: Vec<String> = w
            .identities
            .iter()
            .map(|i| format!("{}={}", w.display_side(&i.lhs), w.display_side(&i.rhs)))
            .collect();
        assert_eq!(shown, vec!["t(yxx)=t(xyx)", "t(xyx)=t(xxy)"]);
    }

    #[test]
    fn grid_identity_count() {
        let g = build_condition(SchemaName::Grid, &[2, 3]).unwrap();
        assert_eq!(g.symbols.len(), 5);
        assert_eq!(g.symbols[0].arity, 9);
        assert_eq!(g.symbols[2].arity, 6);
        assert_eq!(g.identities.len(), 2 * 3 * 3);
    }

    #[test]
    fn bracket_schema() {
        let s = build_condition(SchemaName::Bracket, &[2, 1, 4, 3]).unwrap();
        assert_eq!(s.symbols.len(), 4);
        // 2 (yxx) + 1 (xxy) + 2 (xyx pairs)
        assert_eq!(s.identities.len(), 5);
        assert_eq!(s.pins.len(), 2);
        assert!(build_condition(SchemaName::Bracket, &[3, 4, 1, 2]).is_err());
    }

    #[test]
    fn invalid_params() {
        assert!(build_condition(SchemaName::M1PlusM2, &[0, 2]).is_err());
        assert!(build_condition(SchemaName::M1PlusM2, &[2]).is_err());
        assert!(build_condition(SchemaName::Wnu, &[1]).is_err());
        assert!("bogus".parse::<SchemaName>().is_err());
    }

    #[test]
    fn validation_catches_bad_patterns() {
        let mut s = wnu(3).unwrap();
        s.identities.push(eq(app(0, vec![X, Y]), Side::Var(X)));
        assert!(s.validate().is_err());
        let mut s = wnu(3).unwrap();
        s.identities.push(eq(app(0, vec![X, Y, 2]), Side::Var(X)));
        assert!(s.validate().is_err());
        let mut s = wnu(3).unwrap();
        s.pins.push(Pin {
            symbol: 1,
            projection: 0,
        });
        assert!(s.validate().is_err());
    }
}
