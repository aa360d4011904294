//! Finite quadratic form schemes.
//!
//! A scheme is a square class group `G = F*/F*²` of order `2^d` (an F₂ vector
//! space, written multiplicatively) with a distinguished class `-1` and the
//! binary value sets `D<1,a>`. Everything else, value sets of longer forms,
//! isotropy, Witt decomposition and isometry, is derived from these tables.

mod catalog;
mod invariants;

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::RwLock;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use catalog::{PfisterCatalog, PfisterClass, StrataCounts};
pub use invariants::InvariantProfile;

/// Largest group dimension a scheme may have (`|G| <= 64`).
pub const MAX_SCHEME_DIM: usize = 6;

/// Default cap on `|G|^n` for Pfister enumeration.
pub const DEFAULT_STRATA_CAP: u64 = 1 << 20;

/// Largest group dimension for which `Scheme::new` checks every triple.
pub const EXHAUSTIVE_TRIPLE_DIM: usize = 4;

// Above this many states the canonical-kernel search stops and keeps the
// least representative seen so far.
const CANONICAL_STATE_CAP: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemeError {
    #[error("axiom violation: {0}")]
    AxiomViolation(String),
    #[error("the empty form has no isotropy type")]
    EmptyForm,
    #[error("D(2^{m}) is not a subgroup")]
    NotAGroup { m: usize },
    #[error("inconsistent invariant profile: {0}")]
    ProfileInconsistency(String),
    #[error("Pfister form is isotropic (hyperbolic)")]
    IsotropicInput,
    #[error("enumeration of {count} objects exceeds the cap {cap}")]
    EnumerationTooLarge { count: BigUint, cap: u64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("group dimension {0} exceeds the maximum {MAX_SCHEME_DIM}")]
    TooLarge(usize),
    #[error("class {0} is outside a group of order 2^{1}")]
    BadClass(u32, usize),
}

/// A square class, stored as its coordinate word. The identity (the class of
/// squares) is the zero word; the group law is XOR.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Class(pub u32);

impl Class {
    pub const ONE: Class = Class(0);

    pub fn is_one(self) -> bool {
        self.0 == 0
    }
}

impl std::ops::Mul for Class {
    type Output = Class;
    fn mul(self, rhs: Class) -> Class {
        Class(self.0 ^ rhs.0)
    }
}

impl fmt::Debug for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A set of classes of a group of order at most 64.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassSet(pub u64);

impl ClassSet {
    pub const EMPTY: ClassSet = ClassSet(0);

    pub fn singleton(c: Class) -> Self {
        ClassSet(1 << c.0)
    }

    pub fn full(order: usize) -> Self {
        if order == 64 {
            ClassSet(u64::MAX)
        } else {
            ClassSet((1u64 << order) - 1)
        }
    }

    pub fn contains(self, c: Class) -> bool {
        self.0 >> c.0 & 1 == 1
    }

    pub fn insert(&mut self, c: Class) {
        self.0 |= 1 << c.0;
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: ClassSet) -> ClassSet {
        ClassSet(self.0 | other.0)
    }

    pub fn iter(self) -> impl Iterator<Item = Class> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let c = bits.trailing_zeros();
            bits &= bits - 1;
            Some(Class(c))
        })
    }

    /// `{ a·x : x in self }`.
    pub fn scale(self, a: Class) -> ClassSet {
        if a.is_one() {
            return self;
        }
        self.iter().fold(ClassSet::EMPTY, |mut acc, x| {
            acc.insert(a * x);
            acc
        })
    }

    pub fn is_subgroup(self) -> bool {
        if !self.contains(Class::ONE) {
            return false;
        }
        let elems: Vec<Class> = self.iter().collect();
        elems.iter().all(|&a| elems.iter().all(|&b| self.contains(a * b)))
    }
}

impl fmt::Debug for ClassSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareClassGroup {
    pub dim: usize,
    pub minus_one: Class,
}

impl SquareClassGroup {
    pub fn order(&self) -> usize {
        1 << self.dim
    }

    pub fn classes(&self) -> impl Iterator<Item = Class> {
        (0..self.order() as u32).map(Class)
    }

    pub fn neg(&self, c: Class) -> Class {
        c * self.minus_one
    }
}

/// `table[a]` is the value set `D<1,a>`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueSetTable {
    pub table: Vec<ClassSet>,
}

/// A diagonal form `<a_1, ..., a_k>`, kept as a sorted multiset.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct DiagonalForm {
    entries: Vec<Class>,
}

impl DiagonalForm {
    pub fn new(mut entries: Vec<Class>) -> Self {
        entries.sort_unstable();
        DiagonalForm { entries }
    }

    pub fn entries(&self) -> &[Class] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Orthogonal sum.
    pub fn perp(&self, other: &DiagonalForm) -> DiagonalForm {
        let mut e = self.entries.clone();
        e.extend_from_slice(&other.entries);
        DiagonalForm::new(e)
    }

    pub fn scaled(&self, a: Class) -> DiagonalForm {
        DiagonalForm::new(self.entries.iter().map(|&x| x * a).collect())
    }
}

impl fmt::Debug for DiagonalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ">")
    }
}

/// The n-fold Pfister form `<<a_1,...,a_n>> = <1,a_1> ⊗ ... ⊗ <1,a_n>`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PfisterForm {
    pub slots: Vec<Class>,
}

impl PfisterForm {
    pub fn new(slots: Vec<Class>) -> Self {
        PfisterForm { slots }
    }

    pub fn degree(&self) -> usize {
        self.slots.len()
    }

    pub fn ones(&self) -> usize {
        self.slots.iter().filter(|s| s.is_one()).count()
    }

    /// The `2^n`-dimensional diagonalization.
    pub fn expansion(&self) -> DiagonalForm {
        let mut entries = vec![Class::ONE];
        for &a in &self.slots {
            let len = entries.len();
            for i in 0..len {
                entries.push(entries[i] * a);
            }
        }
        DiagonalForm::new(entries)
    }

    /// Slots sorted ascending; the ones (identity classes) come first.
    pub fn sorted(&self) -> PfisterForm {
        let mut s = self.slots.clone();
        s.sort_unstable();
        PfisterForm { slots: s }
    }
}

impl fmt::Debug for PfisterForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<<")?;
        for (i, e) in self.slots.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ">>")
    }
}

/// Anisotropic kernel plus the number of hyperbolic planes split off.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WittClass {
    pub kernel: DiagonalForm,
    pub index: usize,
}

pub struct Scheme {
    name: String,
    group: SquareClassGroup,
    values: ValueSetTable,
    // binary[a * |G| + b] = D<a,b>
    binary: Vec<ClassSet>,
    single_ordering: bool,
    memo: RwLock<HashMap<Vec<Class>, ClassSet>>,
}

impl Clone for Scheme {
    fn clone(&self) -> Self {
        Scheme {
            name: self.name.clone(),
            group: self.group.clone(),
            values: self.values.clone(),
            binary: self.binary.clone(),
            single_ordering: self.single_ordering,
            memo: RwLock::new(HashMap::new()),
        }
    }
}

impl fmt::Debug for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Scheme")
            .field("name", &self.name)
            .field("group", &self.group)
            .field("values", &self.values)
            .finish()
    }
}

impl Scheme {
    /// Validates the tables and builds the scheme.
    pub fn new(
        name: impl Into<String>,
        group: SquareClassGroup,
        values: ValueSetTable,
    ) -> Result<Scheme, SchemeError> {
        let check = if group.dim <= EXHAUSTIVE_TRIPLE_DIM {
            TripleCheck::Exhaustive
        } else {
            TripleCheck::Sampled { count: 4096, seed: 0 }
        };
        validate_scheme_with(&group, &values, check)?;
        Ok(Scheme::assemble(name.into(), group, values))
    }

    fn assemble(name: String, group: SquareClassGroup, values: ValueSetTable) -> Scheme {
        let order = group.order();
        let mut binary = Vec::with_capacity(order * order);
        for a in group.classes() {
            for b in group.classes() {
                binary.push(values.table[(a * b).0 as usize].scale(a));
            }
        }
        Scheme {
            name,
            group,
            values,
            binary,
            single_ordering: false,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Scheme {
        self.name = name.into();
        self
    }

    pub fn group(&self) -> &SquareClassGroup {
        &self.group
    }

    pub fn values(&self) -> &ValueSetTable {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.group.dim
    }

    pub fn order(&self) -> usize {
        self.group.order()
    }

    pub fn minus_one(&self) -> Class {
        self.group.minus_one
    }

    pub fn classes(&self) -> impl Iterator<Item = Class> {
        self.group.classes()
    }

    pub fn all_classes(&self) -> ClassSet {
        ClassSet::full(self.order())
    }

    /// Restrict isotropy tests to the first entry as distinguished entry.
    /// Sound only for schemes whose value sets are order independent, which
    /// `validate_scheme` checks for ternary forms.
    pub fn set_single_ordering(&mut self, on: bool) {
        self.single_ordering = on;
    }

    /// `D<1,a>`.
    pub fn d1(&self, a: Class) -> ClassSet {
        self.values.table[a.0 as usize]
    }

    /// `D<a,b> = a·D<1,ab>`.
    pub fn binary(&self, a: Class, b: Class) -> ClassSet {
        self.binary[a.0 as usize * self.order() + b.0 as usize]
    }

    /// Value set of a diagonal form given in any order, by
    /// `D<a_1,...,a_k> = ∪_{z ∈ D<a_2,...,a_k>} D<a_1,z>`.
    pub fn value_set(&self, entries: &[Class]) -> ClassSet {
        match entries.len() {
            0 => ClassSet::EMPTY,
            1 => ClassSet::singleton(entries[0]),
            2 => self.binary(entries[0], entries[1]),
            _ => {
                let mut key = entries.to_vec();
                key.sort_unstable();
                if let Some(&hit) = self.memo.read().expect("memo lock").get(&key) {
                    return hit;
                }
                let computed = self.value_set_uncached(entries);
                self.memo.write().expect("memo lock").insert(key, computed);
                computed
            }
        }
    }

    fn value_set_uncached(&self, entries: &[Class]) -> ClassSet {
        let full = self.all_classes();
        let last = entries.len() - 1;
        let mut acc = ClassSet::singleton(entries[last]);
        for &a in entries[..last].iter().rev() {
            let mut next = ClassSet::EMPTY;
            for z in acc.iter() {
                next = next.union(self.binary(a, z));
                if next == full {
                    break;
                }
            }
            acc = next;
        }
        acc
    }

    pub fn represents(&self, f: &DiagonalForm, c: Class) -> bool {
        self.value_set(f.entries()).contains(c)
    }

    pub fn isotropic(&self, f: &DiagonalForm) -> Result<bool, SchemeError> {
        if f.is_empty() {
            return Err(SchemeError::EmptyForm);
        }
        Ok(self.isotropic_entries(f.entries()))
    }

    fn isotropic_entries(&self, e: &[Class]) -> bool {
        self.hyperbolic_split(e).is_some()
    }

    // Finds a distinguished entry a with -a ∈ D(rest); returns its position.
    fn hyperbolic_split(&self, e: &[Class]) -> Option<usize> {
        if e.len() < 2 {
            return None;
        }
        let tries = if self.single_ordering { 1 } else { e.len() };
        let mut rest = Vec::with_capacity(e.len() - 1);
        let mut seen = BTreeSet::new();
        for i in 0..tries {
            if !seen.insert(e[i]) {
                continue;
            }
            rest.clear();
            rest.extend(e.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x));
            if self.value_set(&rest).contains(self.group.neg(e[i])) {
                return Some(i);
            }
        }
        None
    }

    /// Writes `f ≅ <c> ⊥ rest` when `c ∈ D(f)`.
    pub fn split_off(&self, f: &[Class], c: Class) -> Option<Vec<Class>> {
        match f.len() {
            0 => None,
            1 => (f[0] == c).then(Vec::new),
            _ => {
                if let Some(pos) = f.iter().position(|&x| x == c) {
                    let mut rest = f.to_vec();
                    rest.remove(pos);
                    return Some(rest);
                }
                let b = f[0];
                let tail = &f[1..];
                for z in self.value_set(tail).iter() {
                    if self.binary(b, z).contains(c) {
                        // <b,z> ≅ <c, cbz>
                        let mut rest = self.split_off(tail, z)?;
                        rest.push(c * b * z);
                        return Some(rest);
                    }
                }
                None
            }
        }
    }

    /// Splits off hyperbolic planes until the rest is anisotropic.
    /// Returns the (unsorted) kernel and the Witt index.
    fn strip_hyperbolic(&self, f: &[Class]) -> (Vec<Class>, usize) {
        let mut cur = f.to_vec();
        let mut index = 0;
        while let Some(i) = self.hyperbolic_split(&cur) {
            let a = cur[i];
            let rest: Vec<Class> =
                cur.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect();
            cur = self
                .split_off(&rest, self.group.neg(a))
                .expect("value set membership implies a splitting");
            index += 1;
        }
        (cur, index)
    }

    pub fn witt_index(&self, f: &DiagonalForm) -> usize {
        self.strip_hyperbolic(f.entries()).1
    }

    pub fn is_hyperbolic(&self, f: &DiagonalForm) -> bool {
        f.dim() % 2 == 0 && self.strip_hyperbolic(f.entries()).0.is_empty()
    }

    /// Witt decomposition with the lexicographically least kernel among all
    /// representatives reachable by binary chain moves.
    pub fn witt_decompose(&self, f: &DiagonalForm) -> WittClass {
        let (kernel, index) = self.strip_hyperbolic(f.entries());
        WittClass { kernel: self.canonical_form(&DiagonalForm::new(kernel)), index }
    }

    /// Least sorted representative reachable by the moves
    /// `(x, y) -> (z, xyz)` with `z ∈ D<x,y>`.
    pub fn canonical_form(&self, f: &DiagonalForm) -> DiagonalForm {
        let start = f.clone();
        let mut seen: BTreeSet<DiagonalForm> = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(start.clone());
        queue.push_back(start);
        while let Some(cur) = queue.pop_front() {
            if seen.len() >= CANONICAL_STATE_CAP {
                break;
            }
            let e = cur.entries();
            for i in 0..e.len() {
                for j in i + 1..e.len() {
                    let (x, y) = (e[i], e[j]);
                    for z in self.binary(x, y).iter() {
                        let mut next = e.to_vec();
                        next[i] = z;
                        next[j] = x * y * z;
                        let next = DiagonalForm::new(next);
                        if seen.insert(next.clone()) {
                            queue.push_back(next);
                        }
                    }
                }
            }
        }
        seen.into_iter().next().expect("start state is present")
    }

    pub fn neg_form(&self, f: &DiagonalForm) -> DiagonalForm {
        f.scaled(self.minus_one())
    }

    /// Isometry by Witt cancellation: equal dimension and `f ⊥ -g` hyperbolic.
    pub fn isometric(&self, f: &DiagonalForm, g: &DiagonalForm) -> bool {
        if f.dim() != g.dim() {
            return false;
        }
        if f == g {
            return true;
        }
        self.is_hyperbolic(&f.perp(&self.neg_form(g)))
    }

    pub fn pfister_isotropic(&self, p: &PfisterForm) -> bool {
        if p.slots.iter().any(|&a| a == self.minus_one()) {
            return true;
        }
        self.isotropic_entries(p.expansion().entries())
    }

    pub fn check_class(&self, c: Class) -> Result<Class, SchemeError> {
        if (c.0 as usize) < self.order() {
            Ok(c)
        } else {
            Err(SchemeError::BadClass(c.0, self.dim()))
        }
    }
}

/// Checks the scheme axioms on raw tables:
///
/// * `1, a ∈ D<1,a>` and `D<1,a>` is a subgroup,
/// * `D<1,-1> = G`,
/// * `b ∈ D<1,a>  ⟺  -a ∈ D<1,-b>`,
/// * ternary value sets do not depend on the order of the entries.
pub fn validate_scheme(group: &SquareClassGroup, values: &ValueSetTable) -> Result<(), SchemeError> {
    validate_scheme_with(group, values, TripleCheck::Exhaustive)
}

/// How many ternary forms the order-independence axiom is checked on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TripleCheck {
    Exhaustive,
    Sampled { count: usize, seed: u64 },
}

pub fn validate_scheme_with(
    group: &SquareClassGroup,
    values: &ValueSetTable,
    check: TripleCheck,
) -> Result<(), SchemeError> {
    if group.dim > MAX_SCHEME_DIM {
        return Err(SchemeError::TooLarge(group.dim));
    }
    let order = group.order();
    if values.table.len() != order {
        return Err(SchemeError::AxiomViolation(format!(
            "value table has {} rows for a group of order {order}",
            values.table.len()
        )));
    }
    if group.minus_one.0 as usize >= order {
        return Err(SchemeError::AxiomViolation("-1 is not a class of the group".into()));
    }
    let full = ClassSet::full(order);
    for a in group.classes() {
        let d = values.table[a.0 as usize];
        if d.0 & !full.0 != 0 {
            return Err(SchemeError::AxiomViolation(format!("D<1,{a}> has classes outside G")));
        }
        if !d.contains(Class::ONE) {
            return Err(SchemeError::AxiomViolation(format!("1 ∉ D<1,{a}>")));
        }
        if !d.contains(a) {
            return Err(SchemeError::AxiomViolation(format!("{a} ∉ D<1,{a}>")));
        }
        if !d.is_subgroup() {
            return Err(SchemeError::AxiomViolation(format!("D<1,{a}> is not a subgroup")));
        }
    }
    if values.table[group.minus_one.0 as usize] != full {
        return Err(SchemeError::AxiomViolation("D<1,-1> is not the whole group".into()));
    }
    for a in group.classes() {
        for b in group.classes() {
            let lhs = values.table[a.0 as usize].contains(b);
            let rhs = values.table[group.neg(b).0 as usize].contains(group.neg(a));
            if lhs != rhs {
                return Err(SchemeError::AxiomViolation(format!(
                    "{b} ∈ D<1,{a}> is {lhs} but -{a} ∈ D<1,-{b}> is {rhs}"
                )));
            }
        }
    }
    let scheme = Scheme::assemble(String::new(), group.clone(), values.clone());
    let triple = |a: Class, b: Class, c: Class| -> Result<(), SchemeError> {
        let reference = scheme.value_set_uncached(&[a, b, c]);
        for perm in [[b, a, c], [c, b, a], [a, c, b], [b, c, a], [c, a, b]] {
            if scheme.value_set_uncached(&perm) != reference {
                return Err(SchemeError::AxiomViolation(format!(
                    "D<{a},{b},{c}> depends on the order of the entries"
                )));
            }
        }
        Ok(())
    };
    match check {
        TripleCheck::Exhaustive => {
            for a in group.classes() {
                for b in group.classes().filter(|&b| b >= a) {
                    for c in group.classes().filter(|&c| c >= b) {
                        triple(a, b, c)?;
                    }
                }
            }
        }
        TripleCheck::Sampled { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let order = order as u32;
            for _ in 0..count {
                let mut pick = || Class(rng.gen_range(0..order));
                triple(pick(), pick(), pick())?;
            }
        }
    }
    Ok(())
}
