//! Linear algebra over F₂ on word-sized vectors.
//!
//! Coordinates are numbered from 0; bit `i` of the backing word is
//! coordinate `i`. Bitstrings are binary numerals of that word, so the
//! rightmost character is coordinate 0 (`"110"` is `e1 + e2`).

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

/// Largest supported ambient dimension.
pub const MAX_AMBIENT: usize = 24;

/// Default cap on the number of subspaces `enumerate_subspaces` will emit.
pub const DEFAULT_ENUM_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum F2Error {
    #[error("vectors live in different ambient spaces ({0} vs {1})")]
    MixedAmbientDim(usize, usize),
    #[error("ambient dimension {0} exceeds the maximum {MAX_AMBIENT}")]
    AmbientTooLarge(usize),
    #[error("enumeration of {count} objects exceeds the cap {cap}")]
    EnumerationTooLarge { count: BigUint, cap: u64 },
    #[error("subspace of dimension {m} is not proper in dimension {d}")]
    NotProperSubspace { d: usize, m: usize },
    #[error("input vectors are linearly dependent")]
    DependentInput,
    #[error("invalid bitstring {0:?}")]
    BadBitstring(String),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    bits: u32,
    ambient: u8,
}

impl BitVector {
    pub fn new(bits: u32, ambient: usize) -> Result<Self, F2Error> {
        if ambient > MAX_AMBIENT {
            return Err(F2Error::AmbientTooLarge(ambient));
        }
        let mask = if ambient == 32 { u32::MAX } else { (1u32 << ambient) - 1 };
        Ok(BitVector { bits: bits & mask, ambient: ambient as u8 })
    }

    pub fn zero(ambient: usize) -> Self {
        BitVector { bits: 0, ambient: ambient as u8 }
    }

    pub fn unit(index: usize, ambient: usize) -> Self {
        debug_assert!(index < ambient);
        BitVector { bits: 1 << index, ambient: ambient as u8 }
    }

    /// Parses a bitstring such as `"1010"` (rightmost character is coordinate 0).
    pub fn parse(text: &str) -> Result<Self, F2Error> {
        let text = text.trim();
        if text.is_empty() || text.len() > MAX_AMBIENT {
            return Err(F2Error::BadBitstring(text.to_string()));
        }
        let mut bits = 0u32;
        for (i, ch) in text.chars().rev().enumerate() {
            match ch {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(F2Error::BadBitstring(text.to_string())),
            }
        }
        BitVector::new(bits, text.len())
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn ambient(self) -> usize {
        self.ambient as usize
    }

    pub fn is_zero(self) -> bool {
        self.bits == 0
    }

    pub fn get(self, i: usize) -> bool {
        (self.bits >> i) & 1 == 1
    }

    /// Lowest set coordinate, if any.
    pub fn pivot(self) -> Option<usize> {
        (self.bits != 0).then(|| self.bits.trailing_zeros() as usize)
    }

    pub fn weight(self) -> u32 {
        self.bits.count_ones()
    }
}

impl std::ops::Add for BitVector {
    type Output = BitVector;
    fn add(self, rhs: BitVector) -> BitVector {
        debug_assert_eq!(self.ambient, rhs.ambient);
        BitVector { bits: self.bits ^ rhs.bits, ambient: self.ambient }
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in (0..self.ambient()).rev() {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

/// A subspace of F₂^ambient held by its reduced row-echelon basis.
///
/// Rows are sorted by pivot (lowest set coordinate) and every pivot column
/// contains exactly one 1, so equal subspaces have identical bases.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    basis: Vec<u32>,
    ambient: usize,
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace { basis: Vec::new(), ambient }
    }

    pub fn full(ambient: usize) -> Self {
        Subspace { basis: (0..ambient).map(|i| 1u32 << i).collect(), ambient }
    }

    /// Builds from raw words; the words are reduced here.
    pub fn from_words(words: &[u32], ambient: usize) -> Self {
        let mut rows: Vec<u32> = Vec::with_capacity(words.len());
        for &w in words {
            let r = reduce_against(&rows, w);
            if r != 0 {
                insert_row(&mut rows, r);
            }
        }
        Subspace { basis: rows, ambient }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> Vec<BitVector> {
        self.basis.iter().map(|&b| BitVector { bits: b, ambient: self.ambient as u8 }).collect()
    }

    pub fn basis_words(&self) -> &[u32] {
        &self.basis
    }

    pub fn pivots(&self) -> Vec<usize> {
        self.basis.iter().map(|b| b.trailing_zeros() as usize).collect()
    }

    pub fn contains(&self, v: BitVector) -> bool {
        self.contains_word(v.bits)
    }

    pub fn contains_word(&self, w: u32) -> bool {
        reduce_against(&self.basis, w) == 0
    }

    /// Reduces `w` modulo the subspace; the result is zero on every pivot.
    pub fn reduce_word(&self, w: u32) -> u32 {
        reduce_against(&self.basis, w)
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.basis.iter().all(|&b| other.contains_word(b))
    }

    /// All `2^dim` elements, in the order of the binary counter over the basis.
    pub fn elements(&self) -> Vec<u32> {
        let mut out = vec![0u32];
        for &b in &self.basis {
            let len = out.len();
            for i in 0..len {
                out.push(out[i] ^ b);
            }
        }
        out
    }

    pub fn join(&self, other: &Subspace) -> Subspace {
        let mut words = self.basis.clone();
        words.extend_from_slice(&other.basis);
        Subspace::from_words(&words, self.ambient)
    }

    pub fn intersect(&self, other: &Subspace) -> Subspace {
        let words: Vec<u32> =
            self.elements().into_iter().filter(|&w| other.contains_word(w)).collect();
        Subspace::from_words(&words, self.ambient)
    }
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.basis().iter().map(|v| v.to_string()).collect();
        write!(f, "span{{{}}}", rows.join(","))
    }
}

fn reduce_against(rows: &[u32], mut w: u32) -> u32 {
    for &r in rows {
        if w >> r.trailing_zeros() & 1 == 1 {
            w ^= r;
        }
    }
    w
}

// `row` is already reduced against `rows`; clear its pivot from the other
// rows and keep the list sorted by pivot.
fn insert_row(rows: &mut Vec<u32>, row: u32) {
    let p = row.trailing_zeros();
    for r in rows.iter_mut() {
        if *r >> p & 1 == 1 {
            *r ^= row;
        }
    }
    let pos = rows.iter().position(|r| r.trailing_zeros() > p).unwrap_or(rows.len());
    rows.insert(pos, row);
}

/// Row-reduced canonical basis of the span of `vectors`.
///
/// An empty input gives the zero subspace of `ambient`.
pub fn canonicalize(vectors: &[BitVector], ambient: usize) -> Result<Subspace, F2Error> {
    if ambient > MAX_AMBIENT {
        return Err(F2Error::AmbientTooLarge(ambient));
    }
    if let Some(v) = vectors.iter().find(|v| v.ambient() != ambient) {
        return Err(F2Error::MixedAmbientDim(ambient, v.ambient()));
    }
    let words: Vec<u32> = vectors.iter().map(|v| v.bits).collect();
    Ok(Subspace::from_words(&words, ambient))
}

/// Number of `m`-dimensional subspaces of F₂^d.
pub fn gaussian_count(d: usize, m: usize) -> BigUint {
    gaussian_count_q(2, d, m)
}

/// Number of `m`-dimensional subspaces of F_q^d, by the product
/// `prod_{l<m} (q^d - q^l) / (q^m - q^l)`.
pub fn gaussian_count_q(q: u32, d: usize, m: usize) -> BigUint {
    if m > d {
        return BigUint::zero();
    }
    let q = BigUint::from(q);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for l in 0..m {
        num *= q.pow(d as u32) - q.pow(l as u32);
        den *= q.pow(m as u32) - q.pow(l as u32);
    }
    num / den
}

/// `2^{m(d-m+1)}`, an upper bound for `gaussian_count(d, m)`.
pub fn count_upper_bound(d: usize, m: usize) -> BigUint {
    assert!(m <= d, "count_upper_bound needs m <= d");
    BigUint::one() << (m * (d - m + 1))
}

/// Every `m`-dimensional subspace of F₂^d exactly once, in canonical form.
///
/// Output order: pivot sets in lexicographic order, then free entries by a
/// binary counter.
pub fn enumerate_subspaces(d: usize, m: usize, cap: u64) -> Result<Vec<Subspace>, F2Error> {
    if d > MAX_AMBIENT {
        return Err(F2Error::AmbientTooLarge(d));
    }
    let count = gaussian_count(d, m);
    if count > BigUint::from(cap) {
        return Err(F2Error::EnumerationTooLarge { count, cap });
    }
    let mut out = Vec::new();
    if m > d {
        return Ok(out);
    }
    let mut pivots: Vec<usize> = (0..m).collect();
    loop {
        // free slots: (row, column) with column > pivot of row and not a pivot
        let pivot_mask: u32 = pivots.iter().fold(0, |acc, &p| acc | 1 << p);
        let mut free: Vec<(usize, usize)> = Vec::new();
        for (row, &p) in pivots.iter().enumerate() {
            for col in p + 1..d {
                if pivot_mask >> col & 1 == 0 {
                    free.push((row, col));
                }
            }
        }
        for assignment in 0u64..(1u64 << free.len()) {
            let mut rows: Vec<u32> = pivots.iter().map(|&p| 1u32 << p).collect();
            for (k, &(row, col)) in free.iter().enumerate() {
                if assignment >> k & 1 == 1 {
                    rows[row] |= 1 << col;
                }
            }
            out.push(Subspace { basis: rows, ambient: d });
        }
        if !next_combination(&mut pivots, d) {
            break;
        }
    }
    Ok(out)
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Number of `(m+1)`-dimensional subspaces containing a fixed
/// `m`-dimensional subspace of F₂^d, i.e. `2^{d-m} - 1`.
pub fn superspace_count(d: usize, m: usize) -> Result<BigUint, F2Error> {
    if m >= d {
        return Err(F2Error::NotProperSubspace { d, m });
    }
    Ok((BigUint::one() << (d - m)) - BigUint::one())
}

/// The `(dim W + 1)`-dimensional subspaces containing `w`, sorted.
pub fn enumerate_superspaces(w: &Subspace) -> Result<Vec<Subspace>, F2Error> {
    let d = w.ambient();
    if w.dim() >= d {
        return Err(F2Error::NotProperSubspace { d, m: w.dim() });
    }
    let mut found = BTreeSet::new();
    for v in 0u32..(1u32 << d) {
        if !w.contains_word(v) {
            let mut words = w.basis.clone();
            words.push(v);
            found.insert(Subspace::from_words(&words, d));
        }
    }
    Ok(found.into_iter().collect())
}

/// Extends a linearly independent list to a basis of F₂^ambient by
/// appending standard vectors in index order.
pub fn extend_basis(partial: &[BitVector], ambient: usize) -> Result<Vec<BitVector>, F2Error> {
    let span = canonicalize(partial, ambient)?;
    if span.dim() != partial.len() {
        return Err(F2Error::DependentInput);
    }
    let mut out = partial.to_vec();
    let mut rows = span.basis.clone();
    for i in 0..ambient {
        let e = 1u32 << i;
        let r = reduce_against(&rows, e);
        if r != 0 {
            insert_row(&mut rows, r);
            out.push(BitVector::unit(i, ambient));
        }
    }
    Ok(out)
}

/// Coordinates of `v` in the (independent) basis `basis`, as a bitmask over
/// basis positions; `None` if `v` is outside the span.
pub fn coordinates(basis: &[u32], v: u32) -> Option<u32> {
    // track combinations alongside elimination
    let mut rows: Vec<(u32, u32)> = Vec::with_capacity(basis.len());
    for (i, &b) in basis.iter().enumerate() {
        let mut w = b;
        let mut combo = 1u32 << i;
        for &(r, c) in &rows {
            if w >> r.trailing_zeros() & 1 == 1 {
                w ^= r;
                combo ^= c;
            }
        }
        if w == 0 {
            return None;
        }
        rows.push((w, combo));
    }
    let mut w = v;
    let mut combo = 0u32;
    for &(r, c) in &rows {
        if w >> r.trailing_zeros() & 1 == 1 {
            w ^= r;
            combo ^= c;
        }
    }
    (w == 0).then_some(combo)
}

/// The quotient map F₂^d → F₂^d / H with explicit coordinates.
///
/// Quotient coordinates are the non-pivot columns of `H`'s canonical basis,
/// in increasing order. Lifts are the least word in the coset.
#[derive(Clone, Debug)]
pub struct QuotientMap {
    kernel: Subspace,
    free_cols: Vec<usize>,
}

impl QuotientMap {
    pub fn new(kernel: Subspace) -> Self {
        let pivots = kernel.pivots();
        let free_cols = (0..kernel.ambient()).filter(|c| !pivots.contains(c)).collect();
        QuotientMap { kernel, free_cols }
    }

    pub fn dim(&self) -> usize {
        self.free_cols.len()
    }

    pub fn kernel(&self) -> &Subspace {
        &self.kernel
    }

    pub fn project(&self, w: u32) -> BitVector {
        let r = self.kernel.reduce_word(w);
        let mut bits = 0u32;
        for (i, &c) in self.free_cols.iter().enumerate() {
            if r >> c & 1 == 1 {
                bits |= 1 << i;
            }
        }
        BitVector { bits, ambient: self.dim() as u8 }
    }

    pub fn lift(&self, v: BitVector) -> u32 {
        let mut base = 0u32;
        for (i, &c) in self.free_cols.iter().enumerate() {
            if v.get(i) {
                base |= 1 << c;
            }
        }
        self.kernel.elements().into_iter().map(|h| h ^ base).min().unwrap_or(base)
    }
}
