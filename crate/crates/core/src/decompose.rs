//! Rewriting sums of Pfister forms into forms whose slots come from a fixed
//! basis adapted to the chain `±D(1) ⊆ ±D(2) ⊆ ...`, merging linked pairs,
//! and certifying the result on `k_n`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigUint;
use serde::Serialize;
use thiserror::Error;

use crate::bounds::{binomial, bound_sl_binomial, bound_sl_linked, bound_strata_count, bound_strata_count_mod_d2m};
use crate::f2space::{coordinates, extend_basis, BitVector, F2Error, Subspace};
use crate::milnor::{MilnorError, SymbolAlgebra, SymbolVector};
use crate::scheme::{Class, ClassSet, InvariantProfile, PfisterCatalog, PfisterForm, Scheme, SchemeError};

#[derive(Debug, Error)]
pub enum DecomposeError {
    #[error("chain inconsistency: {0}")]
    ChainInconsistency(String),
    #[error("slot {slot} has fewer than two basis factors")]
    NotFactorable { slot: u32 },
    #[error("entry has {got} slots, expected {expected}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("cannot parse form: {0}")]
    Parse(String),
    #[error("rewrite step changed the residue")]
    ResidueChanged,
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error(transparent)]
    Milnor(#[from] MilnorError),
    #[error(transparent)]
    F2(#[from] F2Error),
}

/// A basis `B` of the square class group whose prefixes `A_m` span `±D(2^m)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasisChain {
    pub dim: usize,
    /// `A_M` first, in the order the markers were added, then the extension.
    pub basis: Vec<Class>,
    /// `|A_m|` for `m = 0..=M`.
    pub marker_len: Vec<usize>,
    /// `D(2^m)` for `m = 0..=M`.
    pub d2m: Vec<ClassSet>,
    pub minus_one: Class,
    pub level_exponent: Option<u32>,
}

impl BasisChain {
    fn top(&self) -> usize {
        self.marker_len.len() - 1
    }

    pub fn markers(&self, m: usize) -> &[Class] {
        &self.basis[..self.marker_len[m.min(self.top())]]
    }

    /// `B_m = B ∖ A_m`.
    pub fn free(&self, m: usize) -> &[Class] {
        &self.basis[self.marker_len[m.min(self.top())]..]
    }

    pub fn d2m(&self, m: usize) -> ClassSet {
        self.d2m[m.min(self.top())]
    }

    fn in_free(&self, m: usize, c: Class) -> bool {
        self.free(m).contains(&c)
    }

    /// Basis positions of `c`, as a bitmask.
    pub fn coordinates(&self, c: Class) -> u32 {
        let words: Vec<u32> = self.basis.iter().map(|b| b.0).collect();
        coordinates(&words, c.0).expect("B spans the group")
    }

    /// Entries of stratum above this vanish.
    fn max_stratum(&self, n: usize) -> usize {
        match self.level_exponent {
            Some(s) => (s as usize).min(n),
            None => n,
        }
    }
}

fn span_of(classes: &[Class], dim: usize) -> Subspace {
    let words: Vec<u32> = classes.iter().map(|c| c.0).collect();
    Subspace::from_words(&words, dim)
}

pub fn build_basis_chain(scheme: &Scheme, profile: &InvariantProfile) -> Result<BasisChain, DecomposeError> {
    let dim = scheme.dim();
    let mut markers: Vec<Class> = Vec::new();
    let mut marker_len = Vec::new();
    for m in 0..=profile.stable_index() {
        let pm = profile.pm_d2m(m);
        if !pm.is_subgroup() {
            return Err(DecomposeError::ChainInconsistency(format!("±D(2^{m}) is not a subgroup")));
        }
        for c in pm.iter() {
            if !span_of(&markers, dim).contains_word(c.0) {
                markers.push(c);
            }
        }
        let span = span_of(&markers, dim);
        if span.elements().len() != pm.len() || !pm.iter().all(|c| span.contains_word(c.0)) {
            return Err(DecomposeError::ChainInconsistency(format!("markers do not span ±D(2^{m})")));
        }
        if marker_len.last().is_some_and(|&l| l > markers.len()) {
            return Err(DecomposeError::ChainInconsistency(format!("±D(2^{m}) shrinks")));
        }
        marker_len.push(markers.len());
    }
    let partial: Vec<BitVector> = markers.iter().map(|c| BitVector::new(c.0, dim)).collect::<Result<_, _>>()?;
    let basis: Vec<Class> = extend_basis(&partial, dim)?.into_iter().map(|v| Class(v.bits())).collect();
    let chain = BasisChain {
        dim,
        basis,
        marker_len,
        d2m: profile.chain.clone(),
        minus_one: profile.minus_one,
        level_exponent: profile.level_exponent,
    };
    for m in 0..=chain.top() {
        if chain.free(m).len() != profile.d_m(m) {
            return Err(DecomposeError::ChainInconsistency(format!(
                "|B_{m}| = {} but d_{m} = {}",
                chain.free(m).len(),
                profile.d_m(m)
            )));
        }
    }
    Ok(chain)
}

/// An n-fold Pfister form with its 1-slots first; `stratum` counts them.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PfisterEntry {
    pub stratum: usize,
    pub slots: Vec<Class>,
}

impl PfisterEntry {
    pub fn new(mut slots: Vec<Class>) -> Self {
        slots.sort();
        let stratum = slots.iter().take_while(|c| c.is_one()).count();
        PfisterEntry { stratum, slots }
    }

    pub fn form(&self) -> PfisterForm {
        PfisterForm::new(self.slots.clone())
    }

    fn replace(&self, pos: usize, c: Class) -> PfisterEntry {
        let mut slots = self.slots.clone();
        slots[pos] = c;
        PfisterEntry::new(slots)
    }
}

/// A sum of n-fold Pfister forms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PfisterSum {
    pub n: usize,
    pub dim: usize,
    pub entries: Vec<PfisterEntry>,
}

impl PfisterSum {
    pub fn new(n: usize, dim: usize, entries: Vec<PfisterEntry>) -> Result<Self, DecomposeError> {
        for e in &entries {
            if e.slots.len() != n {
                return Err(DecomposeError::DegreeMismatch { expected: n, got: e.slots.len() });
            }
            if let Some(c) = e.slots.iter().find(|c| c.0 >> dim != 0) {
                return Err(DecomposeError::Scheme(SchemeError::BadClass(c.0, dim)));
            }
        }
        Ok(PfisterSum { n, dim, entries })
    }

    /// Parses `"110,001;010,001"`: forms separated by `;`, slots by `,`,
    /// each slot a bitstring of length `dim`.
    pub fn parse(text: &str, dim: usize) -> Result<Self, DecomposeError> {
        let mut entries = Vec::new();
        let mut n = None;
        for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let mut slots = Vec::new();
            for s in part.split(',') {
                let v = BitVector::parse(s).map_err(|e| DecomposeError::Parse(e.to_string()))?;
                if v.ambient() != dim {
                    return Err(DecomposeError::Parse(format!("slot '{}' has length {}, expected {dim}", s.trim(), v.ambient())));
                }
                slots.push(Class(v.bits()));
            }
            if *n.get_or_insert(slots.len()) != slots.len() {
                return Err(DecomposeError::Parse("forms of different degrees".into()));
            }
            entries.push(PfisterEntry::new(slots));
        }
        let n = n.ok_or_else(|| DecomposeError::Parse("no forms given".into()))?;
        PfisterSum::new(n, dim, entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn stratum_counts(&self) -> Vec<usize> {
        let mut out = vec![0; self.n + 1];
        for e in &self.entries {
            out[e.stratum] += 1;
        }
        out
    }

    pub fn residue(&self, algebra: &SymbolAlgebra) -> Result<SymbolVector, MilnorError> {
        self.entries.iter().try_fold(SymbolVector(0), |acc, e| Ok(acc + algebra.symbol_image(&e.form())?))
    }

    pub fn format_slots(&self) -> Vec<Vec<String>> {
        self.entries
            .iter()
            .map(|e| e.slots.iter().map(|c| format!("{:0width$b}", c.0, width = self.dim)).collect())
            .collect()
    }

    // equal entries cancel in pairs
    fn cancel_pairs(entries: Vec<PfisterEntry>) -> Vec<PfisterEntry> {
        let mut parity: BTreeMap<PfisterEntry, bool> = BTreeMap::new();
        for e in entries {
            *parity.entry(e).or_default() ^= true;
        }
        parity.into_iter().filter(|(_, odd)| *odd).map(|(e, _)| e).collect()
    }
}

/// `<<..,xy,..>> = <<..,x,..>> + <<..,y,..>> + <<..,1,..>>` on `k_n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SlotExpansion {
    pub first: PfisterEntry,
    pub second: PfisterEntry,
    /// The slot replaced by 1; one stratum higher.
    pub correction: PfisterEntry,
}

/// Splits the slot at `position` as `x · y` with `x` its lowest basis factor.
pub fn expand_slot(chain: &BasisChain, entry: &PfisterEntry, position: usize) -> Result<SlotExpansion, DecomposeError> {
    let slot = entry.slots[position];
    let coords = chain.coordinates(slot);
    if coords.count_ones() < 2 {
        return Err(DecomposeError::NotFactorable { slot: slot.0 });
    }
    let x = chain.basis[coords.trailing_zeros() as usize];
    Ok(SlotExpansion {
        first: entry.replace(position, x),
        second: entry.replace(position, slot * x),
        correction: entry.replace(position, Class::ONE),
    })
}

/// Knobs for `rewrite_to_basis`.
#[derive(Clone, Copy, Debug)]
pub struct RewriteOptions {
    /// Replace each entry by a representation with the most 1-slots first,
    /// and again whenever that count can be raised.
    pub maximize_ones: bool,
}

impl Default for RewriteOptions {
    fn default() -> Self {
        RewriteOptions { maximize_ones: true }
    }
}

enum Step {
    Done(PfisterEntry),
    Vanish,
    Replace(Vec<PfisterEntry>),
}

fn maximize(scheme: &Scheme, e: PfisterEntry) -> Result<Option<PfisterEntry>, DecomposeError> {
    let p = e.form();
    if scheme.pfister_isotropic(&p) {
        return Ok(None);
    }
    let (m, best) = scheme.pfister_ones_rank(&p)?;
    Ok(Some(if m > e.stratum { PfisterEntry::new(best.slots) } else { e }))
}

fn step(chain: &BasisChain, n: usize, e: &PfisterEntry) -> Result<Step, DecomposeError> {
    let m = e.stratum;
    if m > chain.max_stratum(n) {
        return Ok(Step::Vanish);
    }
    for pos in m..n {
        let slot = e.slots[pos];
        if chain.in_free(m, slot) {
            continue;
        }
        let coords = chain.coordinates(slot);
        if coords.count_ones() >= 2 {
            let x = expand_slot(chain, e, pos)?;
            return Ok(Step::Replace(vec![x.first, x.second, x.correction]));
        }
        // a single marker: 2^m<<b>> is hyperbolic or equals 2^{m+1}
        if chain.d2m(m).contains(slot * chain.minus_one) {
            return Ok(Step::Vanish);
        }
        debug_assert!(chain.d2m(m).contains(slot));
        return Ok(Step::Replace(vec![e.replace(pos, Class::ONE)]));
    }
    if let Some(pos) = (m + 1..n).find(|&i| e.slots[i] == e.slots[i - 1]) {
        return Ok(Step::Replace(vec![e.replace(pos, Class::ONE)]));
    }
    Ok(Step::Done(e.clone()))
}

/// Rewrites `input` so that every entry of stratum `m` has distinct non-1
/// slots from `B_m`. With `check` set, every step is verified on `k_n`.
pub fn rewrite_to_basis(
    scheme: &Scheme,
    chain: &BasisChain,
    input: &PfisterSum,
    options: RewriteOptions,
    check: Option<&SymbolAlgebra>,
) -> Result<PfisterSum, DecomposeError> {
    let n = input.n;
    let mut work: Vec<PfisterEntry> = input.entries.iter().rev().cloned().collect();
    let mut done = Vec::new();
    let mut maximized: BTreeSet<PfisterEntry> = BTreeSet::new();
    while let Some(mut e) = work.pop() {
        if options.maximize_ones && !maximized.contains(&e) {
            let before = e.clone();
            match maximize(scheme, e)? {
                Some(m) => e = m,
                None => continue,
            }
            maximized.insert(before);
            maximized.insert(e.clone());
        }
        match step(chain, n, &e)? {
            Step::Done(e) => done.push(e),
            Step::Vanish => {
                if let Some(a) = check {
                    if !a.symbol_image(&e.form())?.is_zero() {
                        return Err(DecomposeError::ResidueChanged);
                    }
                }
            }
            Step::Replace(parts) => {
                if let Some(a) = check {
                    let sum = parts.iter().try_fold(SymbolVector(0), |acc, p| Ok::<_, MilnorError>(acc + a.symbol_image(&p.form())?))?;
                    if sum != a.symbol_image(&e.form())? {
                        return Err(DecomposeError::ResidueChanged);
                    }
                }
                work.extend(parts.into_iter().rev());
            }
        }
    }
    PfisterSum::new(n, input.dim, PfisterSum::cancel_pairs(done))
}

/// Catalogs of n- and (n-1)-fold forms for divisor searches.
pub struct LinkageIndex {
    upper: PfisterCatalog,
    lower: PfisterCatalog,
    divisors: HashMap<usize, BTreeSet<usize>>,
}

impl LinkageIndex {
    pub fn build(scheme: &Scheme, n: usize, cap: u64) -> Result<Self, DecomposeError> {
        assert!(n >= 2);
        let upper = PfisterCatalog::build(scheme, n, cap)?;
        let lower = PfisterCatalog::build(scheme, n - 1, cap)?;
        let divisors = upper.classes().iter().map(|c| (c.id, upper.divisors(c.id, &lower))).collect();
        Ok(LinkageIndex { upper, lower, divisors })
    }

    pub fn upper(&self) -> &PfisterCatalog {
        &self.upper
    }

    pub fn lower(&self) -> &PfisterCatalog {
        &self.lower
    }

    /// Least common (n-1)-fold divisor class of two n-fold classes.
    pub fn common_divisor(&self, a: usize, b: usize) -> Option<usize> {
        self.divisors[&a].intersection(&self.divisors[&b]).next().copied()
    }

    // a slot x with class(id) = <<x>> ⊗ rho
    fn cofactor(&self, id: usize, rho: usize) -> Class {
        for t in &self.upper.class(id).members {
            for i in 0..t.len() {
                let mut rest = t.clone();
                rest.remove(i);
                if self.lower.class_of(&PfisterForm::new(rest)) == rho {
                    return t[i];
                }
            }
        }
        unreachable!("rho divides class {id}")
    }

    /// Pairs of entries (by position) sharing an (n-1)-fold divisor.
    pub fn linked_pairs(&self, sum: &PfisterSum) -> Vec<(usize, usize)> {
        let ids: Vec<usize> = sum.entries.iter().map(|e| self.upper.class_of(&e.form())).collect();
        let mut out = Vec::new();
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                if self.common_divisor(ids[i], ids[j]).is_some() {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// Replaces linked pairs `<<x,a>> + <<x,b>>` by `<<x,-ab>>` until no two
/// entries share an (n-1)-fold divisor. Entries come out as max-ones
/// representatives, hyperbolic ones removed.
pub fn merge_linked(scheme: &Scheme, index: &LinkageIndex, input: &PfisterSum) -> PfisterSum {
    let cat = &index.upper;
    let mut live: BTreeSet<usize> = BTreeSet::new();
    let toggle = |live: &mut BTreeSet<usize>, id: usize| {
        if cat.class(id).hyperbolic {
            return;
        }
        if !live.remove(&id) {
            live.insert(id);
        }
    };
    for e in &input.entries {
        toggle(&mut live, cat.class_of(&e.form()));
    }
    'outer: loop {
        let ids: Vec<usize> = live.iter().copied().collect();
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                if let Some(rho) = index.common_divisor(a, b) {
                    let x = index.cofactor(a, rho);
                    let y = index.cofactor(b, rho);
                    let mut slots = index.lower.class(rho).representative.slots.clone();
                    slots.push(x * y * scheme.minus_one());
                    live.remove(&a);
                    live.remove(&b);
                    toggle(&mut live, cat.class_of(&PfisterForm::new(slots)));
                    continue 'outer;
                }
            }
        }
        break;
    }
    let entries = live.into_iter().map(|id| PfisterEntry::new(cat.class(id).representative.slots.clone())).collect();
    PfisterSum { n: input.n, dim: input.dim, entries }
}

fn ser_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StratumCheck {
    pub m: usize,
    pub count: usize,
    /// `2^{(n-m)(e_m-n+m+1)}` with `e_m = dim G/D(2^m)`.
    #[serde(serialize_with = "ser_display")]
    pub bound: BigUint,
    /// `2^{(n-m)(d_m-n+m+1)}`, counting subspaces of `G/±D(2^m)`.
    #[serde(serialize_with = "ser_display")]
    pub pm_bound: BigUint,
    /// `binom(d_m, n-m)`, or 0 above the level exponent of a nonreal scheme.
    #[serde(serialize_with = "ser_display")]
    pub binomial_term: BigUint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionCertificate {
    pub n: usize,
    pub input: PfisterSum,
    pub output: PfisterSum,
    pub input_residue: u64,
    pub output_residue: u64,
    /// Coordinates where the two residues differ.
    pub residue_diff: u64,
    pub strata: Vec<StratumCheck>,
    #[serde(serialize_with = "ser_display")]
    pub binomial_bound: BigUint,
    #[serde(serialize_with = "ser_display")]
    pub linked_bound: BigUint,
    pub within_binomial: bool,
    pub within_linked: bool,
    pub pass: bool,
}

/// Compares residues of `input` and `output` and the per-stratum counts of
/// `output` against `2^{(n-m)(e_m-n+m+1)}`.
pub fn certify(
    profile: &InvariantProfile,
    algebra: &SymbolAlgebra,
    input: &PfisterSum,
    output: &PfisterSum,
) -> Result<DecompositionCertificate, DecomposeError> {
    let n = algebra.degree();
    for s in [input, output] {
        if s.n != n {
            return Err(DecomposeError::DegreeMismatch { expected: n, got: s.n });
        }
    }
    let a = input.residue(algebra)?;
    let b = output.residue(algebra)?;
    let counts = output.stratum_counts();
    let strata: Vec<StratumCheck> = (0..=n)
        .map(|m| {
            let nonreal_above = !profile.is_real && m as u32 > profile.bound_exponent();
            StratumCheck {
                m,
                count: counts[m],
                bound: bound_strata_count_mod_d2m(profile, n, m),
                pm_bound: bound_strata_count(profile, n, m),
                binomial_term: if nonreal_above {
                    BigUint::default()
                } else {
                    binomial(profile.d_m(m) as i64, (n - m) as i64)
                },
            }
        })
        .collect();
    let binomial_bound = bound_sl_binomial(profile, n);
    let linked_bound = bound_sl_linked(profile, n, true).value;
    let len = BigUint::from(output.len());
    let within_strata = strata.iter().all(|s| BigUint::from(s.count) <= s.bound);
    Ok(DecompositionCertificate {
        n,
        input: input.clone(),
        output: output.clone(),
        input_residue: a.0,
        output_residue: b.0,
        residue_diff: a.0 ^ b.0,
        strata,
        within_binomial: len <= binomial_bound,
        within_linked: len <= linked_bound,
        binomial_bound,
        linked_bound,
        pass: a == b && within_strata,
    })
}

/// Rewrite, merge, and certify both stages.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DecompositionRun {
    pub rewritten: DecompositionCertificate,
    pub merged: Option<DecompositionCertificate>,
    pub rewritten_length: usize,
    pub merged_length: Option<usize>,
}

pub fn decompose(
    scheme: &Scheme,
    profile: &InvariantProfile,
    algebra: &SymbolAlgebra,
    index: Option<&LinkageIndex>,
    input: &PfisterSum,
) -> Result<DecompositionRun, DecomposeError> {
    let chain = build_basis_chain(scheme, profile)?;
    let out = rewrite_to_basis(scheme, &chain, input, RewriteOptions::default(), None)?;
    let rewritten = certify(profile, algebra, input, &out)?;
    let merged = match index {
        Some(ix) => Some(certify(profile, algebra, input, &merge_linked(scheme, ix, &out))?),
        None => None,
    };
    Ok(DecompositionRun {
        rewritten_length: out.len(),
        merged_length: merged.as_ref().map(|c| c.output.len()),
        rewritten,
        merged,
    })
}
