//! Schemes of elementary type built from a small expression language.
//!
//! ```text
//! expr := "QC" | "RC" | "F1" | "F2" | "Q2"
//!       | "laurent(" expr ")" | "product(" expr "," expr ")"
//! ```
//!
//! Case and whitespace are ignored.

use std::fmt;

use thiserror::Error;

use crate::scheme::{Class, ClassSet, Scheme, SchemeError, SquareClassGroup, ValueSetTable, MAX_SCHEME_DIM};

const DYADIC_TABLE: &str = include_str!("../data/dyadic.txt");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("parse error at offset {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("scheme dimension {0} exceeds the cap {MAX_SCHEME_DIM}")]
    DimensionCapExceeded(usize),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseKind {
    /// Quadratically closed: one class.
    QC,
    /// Real closed.
    RC,
    /// Finite field with `-1` a square.
    F1,
    /// Finite field with `-1` a nonsquare.
    F2,
    /// The 2-adic numbers.
    Q2,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeExpr {
    Base(BaseKind),
    Laurent(Box<SchemeExpr>),
    Product(Box<SchemeExpr>, Box<SchemeExpr>),
}

impl SchemeExpr {
    pub fn laurent(inner: SchemeExpr) -> Self {
        SchemeExpr::Laurent(Box::new(inner))
    }

    pub fn product(a: SchemeExpr, b: SchemeExpr) -> Self {
        SchemeExpr::Product(Box::new(a), Box::new(b))
    }

    pub fn dim(&self) -> usize {
        match self {
            SchemeExpr::Base(k) => base_dim(*k),
            SchemeExpr::Laurent(e) => e.dim() + 1,
            SchemeExpr::Product(a, b) => a.dim() + b.dim(),
        }
    }

    pub fn build(&self) -> Result<Scheme, BuildError> {
        let d = self.dim();
        if d > MAX_SCHEME_DIM {
            return Err(BuildError::DimensionCapExceeded(d));
        }
        let s = match self {
            SchemeExpr::Base(k) => base(*k),
            SchemeExpr::Laurent(e) => laurent_extend(&e.build()?)?,
            SchemeExpr::Product(a, b) => product(&a.build()?, &b.build()?)?,
        };
        Ok(s.with_name(self.to_string()))
    }
}

impl fmt::Display for SchemeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeExpr::Base(k) => write!(f, "{k:?}"),
            SchemeExpr::Laurent(e) => write!(f, "laurent({e})"),
            SchemeExpr::Product(a, b) => write!(f, "product({a},{b})"),
        }
    }
}

fn base_dim(k: BaseKind) -> usize {
    match k {
        BaseKind::QC => 0,
        BaseKind::RC | BaseKind::F1 | BaseKind::F2 => 1,
        BaseKind::Q2 => 3,
    }
}

/// The frozen 2-adic table, `rows[a] = D<1,a>`.
pub fn dyadic_table() -> Vec<ClassSet> {
    DYADIC_TABLE
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let mask = l.split_whitespace().nth(1).expect("dyadic row has two fields");
            ClassSet(u64::from_str_radix(mask, 2).expect("dyadic mask is binary"))
        })
        .collect()
}

pub fn base(kind: BaseKind) -> Scheme {
    let (dim, minus_one, table) = match kind {
        BaseKind::QC => (0, 0, vec![ClassSet(0b1)]),
        BaseKind::RC => (1, 1, vec![ClassSet(0b01), ClassSet(0b11)]),
        BaseKind::F1 => (1, 0, vec![ClassSet(0b11); 2]),
        BaseKind::F2 => (1, 1, vec![ClassSet(0b11); 2]),
        // coordinates: bit 0 = -1, bit 1 = 2, bit 2 = 5
        BaseKind::Q2 => (3, 1, dyadic_table()),
    };
    Scheme::new(
        format!("{kind:?}"),
        SquareClassGroup { dim, minus_one: Class(minus_one) },
        ValueSetTable { table },
    )
    .expect("base schemes satisfy the axioms")
}

/// `F((t))` from `F`: the class of `t` is the new top coordinate.
pub fn laurent_extend(s: &Scheme) -> Result<Scheme, BuildError> {
    let d = s.dim();
    if d + 1 > MAX_SCHEME_DIM {
        return Err(BuildError::DimensionCapExceeded(d + 1));
    }
    let eps = s.minus_one();
    let order = s.order() as u32;
    let full = ClassSet::full(2 * s.order());
    let mut table = Vec::with_capacity(2 * s.order());
    for a in 0..order {
        let a = Class(a);
        table.push(if a == eps { full } else { s.d1(a) });
    }
    for a in order..2 * order {
        let mut set = ClassSet::singleton(Class::ONE);
        set.insert(Class(a));
        table.push(set);
    }
    let group = SquareClassGroup { dim: d + 1, minus_one: eps };
    Ok(Scheme::new(format!("laurent({})", s.name()), group, ValueSetTable { table })?)
}

/// `G = G_1 × G_2` with `G_1` in the low coordinates.
pub fn product(s1: &Scheme, s2: &Scheme) -> Result<Scheme, BuildError> {
    let d = s1.dim() + s2.dim();
    if d > MAX_SCHEME_DIM {
        return Err(BuildError::DimensionCapExceeded(d));
    }
    let shift = s1.dim();
    let join = |a: u32, b: u32| a | (b << shift);
    let mut table = vec![ClassSet::EMPTY; 1 << d];
    for b in s2.classes() {
        for a in s1.classes() {
            let mut set = ClassSet::EMPTY;
            for y in s2.d1(b).iter() {
                for x in s1.d1(a).iter() {
                    set.insert(Class(join(x.0, y.0)));
                }
            }
            table[join(a.0, b.0) as usize] = set;
        }
    }
    let group = SquareClassGroup { dim: d, minus_one: Class(join(s1.minus_one().0, s2.minus_one().0)) };
    Ok(Scheme::new(
        format!("product({},{})", s1.name(), s2.name()),
        group,
        ValueSetTable { table },
    )?)
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, BuildError> {
        Err(BuildError::Parse { pos: self.pos, msg: msg.into() })
    }

    fn expect(&mut self, ch: char) -> Result<(), BuildError> {
        self.skip_ws();
        match self.text[self.pos..].chars().next() {
            Some(c) if c == ch => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => self.err(format!("expected '{ch}', found '{c}'")),
            None => self.err(format!("expected '{ch}', found end of input")),
        }
    }

    fn ident(&mut self) -> Result<String, BuildError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest.find(|c: char| !c.is_ascii_alphanumeric()).unwrap_or(rest.len());
        if len == 0 {
            return match rest.chars().next() {
                Some(c) => self.err(format!("expected a scheme expression, found '{c}'")),
                None => self.err("expected a scheme expression, found end of input"),
            };
        }
        let word = rest[..len].to_ascii_lowercase();
        Ok(word)
    }

    fn expr(&mut self) -> Result<SchemeExpr, BuildError> {
        let start = {
            self.skip_ws();
            self.pos
        };
        let word = self.ident()?;
        self.pos += word.len();
        let e = match word.as_str() {
            "qc" => SchemeExpr::Base(BaseKind::QC),
            "rc" => SchemeExpr::Base(BaseKind::RC),
            "f1" => SchemeExpr::Base(BaseKind::F1),
            "f2" => SchemeExpr::Base(BaseKind::F2),
            "q2" => SchemeExpr::Base(BaseKind::Q2),
            "laurent" => {
                self.expect('(')?;
                let inner = self.expr()?;
                self.expect(')')?;
                SchemeExpr::laurent(inner)
            }
            "product" => {
                self.expect('(')?;
                let a = self.expr()?;
                self.expect(',')?;
                let b = self.expr()?;
                self.expect(')')?;
                SchemeExpr::product(a, b)
            }
            _ => {
                self.pos = start;
                return self.err(format!("unknown scheme '{word}'"));
            }
        };
        Ok(e)
    }
}

pub fn parse_scheme_expr(text: &str) -> Result<SchemeExpr, BuildError> {
    let mut p = Parser { text, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        return p.err("trailing input");
    }
    if e.dim() > MAX_SCHEME_DIM {
        return Err(BuildError::DimensionCapExceeded(e.dim()));
    }
    Ok(e)
}

pub fn build_scheme(text: &str) -> Result<Scheme, BuildError> {
    parse_scheme_expr(text)?.build()
}

fn atoms(d: usize) -> Vec<SchemeExpr> {
    let mut out: Vec<SchemeExpr> = [BaseKind::QC, BaseKind::RC, BaseKind::F1, BaseKind::F2, BaseKind::Q2]
        .into_iter()
        .filter(|&k| base_dim(k) == d)
        .map(SchemeExpr::Base)
        .collect();
    if d >= 1 {
        out.extend(expressions_of_dim(d - 1).into_iter().map(SchemeExpr::laurent));
    }
    out
}

// Sorted multisets of at least two atoms of positive dimension.
fn products(d: usize) -> Vec<SchemeExpr> {
    fn go(remaining: usize, min: &Option<SchemeExpr>, cur: &mut Vec<SchemeExpr>, out: &mut Vec<Vec<SchemeExpr>>) {
        if remaining == 0 {
            if cur.len() >= 2 {
                out.push(cur.clone());
            }
            return;
        }
        for k in 1..=remaining {
            for a in atoms(k) {
                if min.as_ref().is_some_and(|m| a.to_string() < m.to_string()) {
                    continue;
                }
                cur.push(a.clone());
                go(remaining - k, &Some(a), cur, out);
                cur.pop();
            }
        }
    }
    let mut lists = Vec::new();
    go(d, &None, &mut Vec::new(), &mut lists);
    lists
        .into_iter()
        .map(|factors| {
            let mut it = factors.into_iter().rev();
            let last = it.next().expect("at least two factors");
            it.fold(last, |acc, f| SchemeExpr::product(f, acc))
        })
        .collect()
}

pub fn expressions_of_dim(d: usize) -> Vec<SchemeExpr> {
    let mut out = atoms(d);
    out.extend(products(d));
    out
}

/// Canonical expressions of every dimension up to `max_d`: products are
/// sorted lists of non-product factors without `QC`.
pub fn catalog(max_d: usize) -> Vec<SchemeExpr> {
    (0..=max_d).flat_map(expressions_of_dim).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_examples() {
        assert_eq!(
            parse_scheme_expr("laurent(laurent(QC))").unwrap(),
            SchemeExpr::laurent(SchemeExpr::laurent(SchemeExpr::Base(BaseKind::QC)))
        );
        assert_eq!(
            parse_scheme_expr(" Product( rc , LAURENT(f2))").unwrap(),
            SchemeExpr::product(SchemeExpr::Base(BaseKind::RC), SchemeExpr::laurent(SchemeExpr::Base(BaseKind::F2)))
        );
        assert!(matches!(parse_scheme_expr("laurent("), Err(BuildError::Parse { pos: 8, .. })));
        assert!(matches!(parse_scheme_expr("QC x"), Err(BuildError::Parse { pos: 3, .. })));
        assert!(matches!(parse_scheme_expr("foo"), Err(BuildError::Parse { pos: 0, .. })));
        assert!(matches!(
            parse_scheme_expr("product(Q2,product(Q2,RC))"),
            Err(BuildError::DimensionCapExceeded(7))
        ));
    }

    #[test]
    fn display_roundtrip() {
        for e in catalog(3) {
            assert_eq!(parse_scheme_expr(&e.to_string()).unwrap(), e);
        }
    }

    #[test]
    fn laurent_of_qc() {
        let s = build_scheme("laurent(QC)").unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.d1(Class(1)), ClassSet(0b11));
    }

    #[test]
    fn catalog_is_canonical() {
        let c = catalog(4);
        let mut names: Vec<String> = c.iter().map(|e| e.to_string()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), c.len());
        assert!(c.iter().all(|e| e.dim() <= 4));
        assert!(!names.iter().any(|n| n.contains("product(QC") || n.contains(",QC")));
    }
}
