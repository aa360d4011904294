//! The degree-n mod 2 Milnor quotient `k_n` of a scheme and exact symbol
//! lengths in it.
//!
//! `k_n` is `G^{⊗n}` modulo the span of all `x_1⊗...⊗x_n` with some adjacent
//! pair `x_i⊗x_{i+1}` in `R = span{x⊗y : y ∈ D<1,-x>}`. A Pfister form
//! `<<a_1,...,a_n>> = <1,a_1>⊗...⊗<1,a_n>` maps to the pure tensor of its
//! labels `-a_1⊗...⊗-a_n`.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scheme::{Class, PfisterForm, Scheme};

/// Default cap on the number of tensor coordinates `d^n`.
pub const DEFAULT_TENSOR_CAP: u64 = 1 << 16;
/// Default cap on `2^{dim k_n}` for whole-space searches.
pub const DEFAULT_BFS_CAP: u64 = 1 << 24;
// Slot multisets enumerated when collecting pure symbols.
const SYMBOL_ENUM_CAP: u64 = 1 << 21;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MilnorError {
    #[error("{what} has size {size}, above the cap {cap}")]
    TooLarge { what: &'static str, size: u128, cap: u128 },
    #[error("degree mismatch: algebra has degree {expected}, form has degree {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("class {0} is outside the group")]
    BadClass(u32),
}

/// An element of `k_n` in the coordinates of `SymbolAlgebra::basis`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymbolVector(pub u64);

impl SymbolVector {
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl std::ops::Add for SymbolVector {
    type Output = SymbolVector;
    fn add(self, rhs: SymbolVector) -> SymbolVector {
        SymbolVector(self.0 ^ rhs.0)
    }
}

type Row = Vec<u64>;

fn lowest_bit(row: &[u64]) -> Option<usize> {
    row.iter().enumerate().find(|(_, w)| **w != 0).map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

fn get_bit(row: &[u64], i: usize) -> bool {
    row[i / 64] >> (i % 64) & 1 == 1
}

fn flip_bit(row: &mut [u64], i: usize) {
    row[i / 64] ^= 1 << (i % 64);
}

fn xor_into(dst: &mut [u64], src: &[u64]) {
    for (a, b) in dst.iter_mut().zip(src) {
        *a ^= *b;
    }
}

// Fully reduced echelon form; pivot of a row is its lowest column.
struct Echelon {
    width: usize,
    rows: Vec<Row>,
    pivot_row: Vec<Option<usize>>,
}

impl Echelon {
    fn new(width: usize) -> Self {
        Echelon { width, rows: Vec::new(), pivot_row: vec![None; width] }
    }

    // Pivot rows only touch columns at or above their pivot, so one
    // ascending pass over the set bits suffices.
    fn reduce(&self, row: &mut [u64]) {
        let mut w = 0;
        while w < row.len() {
            let mut bits = row[w];
            while bits != 0 {
                let col = w * 64 + bits.trailing_zeros() as usize;
                bits &= bits - 1;
                if let Some(r) = self.pivot_row[col] {
                    xor_into(row, &self.rows[r]);
                    bits = row[w] & u64::MAX.checked_shl(col as u32 % 64 + 1).unwrap_or(0);
                }
            }
            w += 1;
        }
    }

    fn insert(&mut self, mut row: Row) {
        self.reduce(&mut row);
        let Some(p) = lowest_bit(&row) else { return };
        for r in self.rows.iter_mut() {
            if get_bit(r, p) {
                xor_into(r, &row);
            }
        }
        self.pivot_row[p] = Some(self.rows.len());
        self.rows.push(row);
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn words(&self) -> usize {
        self.width.div_ceil(64)
    }
}

/// `k_n` of a scheme with its projection from the tensor space.
#[derive(Clone, Debug)]
pub struct SymbolAlgebra {
    d: usize,
    n: usize,
    minus_one: Class,
    order: usize,
    /// Non-pivot tensor columns; the basis of `k_n` is their unit vectors.
    free_cols: Vec<usize>,
    /// Image in `k_n` of every tensor basis vector.
    basis_image: Vec<u64>,
    relation_rank: usize,
    pure: Vec<SymbolVector>,
}

impl SymbolAlgebra {
    pub fn new(scheme: &Scheme, n: usize, tensor_cap: u64) -> Result<SymbolAlgebra, MilnorError> {
        let d = scheme.dim();
        let width = (d as u128).pow(n as u32);
        if width > tensor_cap as u128 {
            return Err(MilnorError::TooLarge { what: "tensor space", size: width, cap: tensor_cap as u128 });
        }
        let width = width as usize;
        let eps = scheme.minus_one();

        // R ⊆ F_2^{d×d}, pair (i, j) at bit i·d + j.
        let mut r_basis = Echelon::new(d * d);
        for x in scheme.classes() {
            for y in scheme.d1(x * eps).iter() {
                r_basis.insert(vec![pair_tensor(x.0, y.0, d)]);
            }
        }

        let mut rel = Echelon::new(width);
        if n >= 2 {
            let pow = |k: usize| d.pow(k as u32);
            for pos in 0..n - 1 {
                let right = pow(n - pos - 2);
                for left in 0..pow(pos) {
                    for rrow in &r_basis.rows {
                        for rest in 0..right {
                            let mut row = vec![0u64; rel.words()];
                            let mut bits = rrow[0];
                            while bits != 0 {
                                let ij = bits.trailing_zeros() as usize;
                                bits &= bits - 1;
                                flip_bit(&mut row, (left * d * d + ij) * right + rest);
                            }
                            rel.insert(row);
                        }
                    }
                }
            }
        }

        let free_cols: Vec<usize> = (0..width).filter(|&c| rel.pivot_row[c].is_none()).collect();
        if free_cols.len() > 64 {
            return Err(MilnorError::TooLarge { what: "dim k_n", size: free_cols.len() as u128, cap: 64 });
        }
        let mut coord = vec![usize::MAX; width];
        for (i, &c) in free_cols.iter().enumerate() {
            coord[c] = i;
        }
        let mut basis_image = vec![0u64; width];
        for (col, img) in basis_image.iter_mut().enumerate() {
            match rel.pivot_row[col] {
                None => *img = 1 << coord[col],
                Some(r) => {
                    // e_col ≡ e_col + row, which lives on free columns only
                    let row = &rel.rows[r];
                    for &c in &free_cols {
                        if get_bit(row, c) {
                            *img |= 1 << coord[c];
                        }
                    }
                }
            }
        }

        let mut alg = SymbolAlgebra {
            d,
            n,
            minus_one: eps,
            order: scheme.order(),
            free_cols,
            basis_image,
            relation_rank: rel.rank(),
            pure: Vec::new(),
        };
        alg.pure = alg.collect_pure_symbols()?;
        Ok(alg)
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.free_cols.len()
    }

    pub fn tensor_dim(&self) -> usize {
        self.basis_image.len()
    }

    pub fn relation_rank(&self) -> usize {
        self.relation_rank
    }

    /// Basis of `k_n` as tensor index tuples (coordinate indices per slot).
    pub fn basis(&self) -> Vec<Vec<usize>> {
        self.free_cols.iter().map(|&c| self.unflatten(c)).collect()
    }

    fn unflatten(&self, mut c: usize) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for slot in out.iter_mut().rev() {
            *slot = c % self.d;
            c /= self.d;
        }
        out
    }

    /// The label of a slot: `<<a>> = <1,a>` carries the symbol `{-a}`.
    pub fn label(&self, a: Class) -> Class {
        a * self.minus_one
    }

    /// Image of the pure tensor `x_1⊗...⊗x_n` of label classes.
    pub fn image_of_labels(&self, labels: &[Class]) -> SymbolVector {
        assert_eq!(labels.len(), self.n);
        if self.n == 0 {
            return SymbolVector(if self.basis_image.is_empty() { 0 } else { self.basis_image[0] });
        }
        let mut acc = 0u64;
        self.expand(labels, 0, 0, &mut acc);
        SymbolVector(acc)
    }

    fn expand(&self, labels: &[Class], pos: usize, idx: usize, acc: &mut u64) {
        if pos == labels.len() {
            *acc ^= self.basis_image[idx];
            return;
        }
        let mut bits = labels[pos].0;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            self.expand(labels, pos + 1, idx * self.d + i, acc);
        }
    }

    pub fn symbol_image(&self, p: &PfisterForm) -> Result<SymbolVector, MilnorError> {
        if p.degree() != self.n {
            return Err(MilnorError::DegreeMismatch { expected: self.n, got: p.degree() });
        }
        for &a in &p.slots {
            if a.0 as usize >= self.order {
                return Err(MilnorError::BadClass(a.0));
            }
        }
        let labels: Vec<Class> = p.slots.iter().map(|&a| self.label(a)).collect();
        Ok(self.image_of_labels(&labels))
    }

    fn collect_pure_symbols(&self) -> Result<Vec<SymbolVector>, MilnorError> {
        if self.dim() == 0 {
            return Ok(Vec::new());
        }
        let count = multiset_count(self.order as u64, self.n);
        if count > SYMBOL_ENUM_CAP as u128 {
            return Err(MilnorError::TooLarge { what: "slot multisets", size: count, cap: SYMBOL_ENUM_CAP as u128 });
        }
        // images are symmetric in the slots, so sorted label tuples suffice
        let firsts: Vec<u32> = (0..self.order as u32).collect();
        let sets: Vec<BTreeSet<u64>> = firsts
            .par_iter()
            .map(|&first| {
                let mut found = BTreeSet::new();
                let mut cur = vec![Class(first)];
                self.walk_sorted(&mut cur, &mut found);
                found
            })
            .collect();
        let mut all = BTreeSet::new();
        for s in sets {
            all.extend(s);
        }
        all.remove(&0);
        Ok(all.into_iter().map(SymbolVector).collect())
    }

    fn walk_sorted(&self, cur: &mut Vec<Class>, found: &mut BTreeSet<u64>) {
        if cur.len() == self.n {
            found.insert(self.image_of_labels(cur).0);
            return;
        }
        let start = cur.last().map_or(0, |c| c.0);
        for c in start..self.order as u32 {
            cur.push(Class(c));
            self.walk_sorted(cur, found);
            cur.pop();
        }
    }

    /// Distinct nonzero images of pure symbols, sorted.
    pub fn pure_symbols(&self) -> &[SymbolVector] {
        &self.pure
    }

    /// Least `k` such that `x` is a sum of `k` nonzero pure symbols.
    pub fn sl_element(&self, x: SymbolVector) -> usize {
        if x.is_zero() {
            return 0;
        }
        let mut seen: HashSet<u64> = HashSet::from([0]);
        let mut frontier = vec![0u64];
        let mut k = 0;
        loop {
            k += 1;
            let next = self.layer(&frontier, |v| seen.contains(&v));
            if next.binary_search(&x.0).is_ok() {
                return k;
            }
            assert!(!next.is_empty(), "every element of k_n is a sum of pure symbols");
            seen.extend(next.iter().copied());
            frontier = next;
        }
    }

    // Sorted new elements of the next layer.
    fn layer(&self, frontier: &[u64], known: impl Fn(u64) -> bool + Sync) -> Vec<u64> {
        let mut next: Vec<u64> = frontier
            .par_chunks(256)
            .flat_map_iter(|chunk| {
                let mut out = Vec::new();
                for &f in chunk {
                    for p in &self.pure {
                        let v = f ^ p.0;
                        if !known(v) {
                            out.push(v);
                        }
                    }
                }
                out
            })
            .collect();
        next.par_sort_unstable();
        next.dedup();
        next
    }

    /// Sizes of the BFS layers from 0: `|{x : sl(x) = k}|` for `k = 0, 1, ...`.
    pub fn layer_sizes(&self, bfs_cap: u64) -> Result<Vec<u64>, MilnorError> {
        Ok(self.distance_table(bfs_cap)?.1)
    }

    fn distance_table(&self, bfs_cap: u64) -> Result<(Vec<u8>, Vec<u64>), MilnorError> {
        let dim = self.dim();
        if dim >= 64 || (1u128 << dim) > bfs_cap as u128 {
            return Err(MilnorError::TooLarge { what: "k_n", size: 1u128 << dim.min(127), cap: bfs_cap as u128 });
        }
        let size = 1usize << dim;
        let mut dist = vec![u8::MAX; size];
        dist[0] = 0;
        let mut sizes = vec![1u64];
        let mut frontier = vec![0u64];
        let mut k = 0u8;
        while !frontier.is_empty() {
            k += 1;
            let next = {
                let dist = &dist;
                self.layer(&frontier, |v| dist[v as usize] != u8::MAX)
            };
            for &v in &next {
                dist[v as usize] = k;
            }
            if !next.is_empty() {
                sizes.push(next.len() as u64);
            }
            frontier = next;
        }
        Ok((dist, sizes))
    }

    /// `max sl(x)` over `k_n`, with the least element attaining it.
    pub fn sl_field(&self, bfs_cap: u64) -> Result<(usize, SymbolVector), MilnorError> {
        let (dist, _) = self.distance_table(bfs_cap)?;
        let max = *dist.iter().max().expect("k_n is nonempty");
        let witness = dist.iter().position(|&x| x == max).expect("maximum is attained");
        Ok((max as usize, SymbolVector(witness as u64)))
    }

    /// A decomposition of `x` into `sl(x)` pure symbols, as label tuples.
    pub fn decompose(&self, x: SymbolVector) -> Vec<Vec<Class>> {
        let k = self.sl_element(x);
        let labels = self.pure_label_tuples();
        let mut out = Vec::new();
        let mut cur = x.0;
        for remaining in (1..=k).rev() {
            let (img, t) = labels
                .iter()
                .find(|(img, _)| self.sl_element(SymbolVector(cur ^ img)) == remaining - 1)
                .expect("a shortest decomposition exists");
            out.push(t.clone());
            cur ^= img;
        }
        out
    }

    // Least sorted label tuple for each pure symbol.
    fn pure_label_tuples(&self) -> Vec<(u64, Vec<Class>)> {
        let mut found: Vec<Option<Vec<Class>>> = vec![None; self.pure.len()];
        let mut cur = Vec::new();
        self.walk_labels(&mut cur, &mut found);
        self.pure.iter().zip(found).map(|(p, t)| (p.0, t.expect("every pure symbol has a tuple"))).collect()
    }

    fn walk_labels(&self, cur: &mut Vec<Class>, found: &mut [Option<Vec<Class>>]) {
        if cur.len() == self.n {
            let img = self.image_of_labels(cur);
            if let Ok(i) = self.pure.binary_search(&img) {
                found[i].get_or_insert_with(|| cur.clone());
            }
            return;
        }
        let start = cur.last().map_or(0, |c| c.0);
        for c in start..self.order as u32 {
            cur.push(Class(c));
            self.walk_labels(cur, found);
            cur.pop();
        }
    }
}

fn pair_tensor(x: u32, y: u32, d: usize) -> u64 {
    let mut v = 0u64;
    for i in 0..d {
        if x >> i & 1 == 1 {
            for j in 0..d {
                if y >> j & 1 == 1 {
                    v ^= 1 << (i * d + j);
                }
            }
        }
    }
    v
}

fn multiset_count(order: u64, n: usize) -> u128 {
    // C(order + n - 1, n)
    let mut c: u128 = 1;
    for i in 0..n as u128 {
        c = c * (order as u128 + i) / (i + 1);
    }
    c
}

/// `k_n` with the default cap.
pub fn kn_space(scheme: &Scheme, n: usize) -> Result<SymbolAlgebra, MilnorError> {
    SymbolAlgebra::new(scheme, n, DEFAULT_TENSOR_CAP)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_counts() {
        assert_eq!(multiset_count(4, 2), 10);
        assert_eq!(multiset_count(2, 3), 4);
    }

    #[test]
    fn echelon_is_reduced() {
        let mut e = Echelon::new(3);
        e.insert(vec![0b011]);
        e.insert(vec![0b110]);
        e.insert(vec![0b101]);
        assert_eq!(e.rank(), 2);
        assert_eq!(e.pivot_row[2], None);
        assert_eq!(e.rows, vec![vec![0b101], vec![0b110]]);
    }

    #[test]
    fn pair_tensor_layout() {
        assert_eq!(pair_tensor(0b01, 0b10, 2), 0b0010);
        assert_eq!(pair_tensor(0b11, 0b11, 2), 0b1111);
    }
}
