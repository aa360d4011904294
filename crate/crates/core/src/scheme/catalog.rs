use std::collections::{BTreeSet, HashMap};

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Class, ClassSet, DiagonalForm, InvariantProfile, PfisterForm, Scheme, SchemeError};
use crate::f2space::{BitVector, Subspace};

/// One isometry class of n-fold Pfister forms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PfisterClass {
    pub id: usize,
    pub hyperbolic: bool,
    /// Lexicographically least sorted slot tuple in the class. Ones sort
    /// first, so this tuple has the maximal number of 1-slots.
    pub representative: PfisterForm,
    /// `None` for the hyperbolic class.
    pub ones_rank: Option<usize>,
    pub value_set: ClassSet,
    /// Every sorted slot tuple whose expansion lies in the class.
    pub members: Vec<Vec<Class>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrataCounts {
    pub n: usize,
    /// `|P_{n,m}|` for `m = 0..=n` (anisotropic classes only).
    pub by_rank: Vec<u64>,
    /// `|P_n F|`, all isometry classes including the hyperbolic one.
    pub total: u64,
}

impl StrataCounts {
    pub fn anisotropic(&self) -> u64 {
        self.by_rank.iter().sum()
    }
}

/// All isometry classes of n-fold Pfister forms of a scheme.
#[derive(Clone, Debug)]
pub struct PfisterCatalog {
    n: usize,
    classes: Vec<PfisterClass>,
    index: HashMap<Vec<Class>, usize>,
}

fn sorted_tuples(order: u32, n: usize) -> Vec<Vec<Class>> {
    fn go(order: u32, n: usize, start: u32, cur: &mut Vec<Class>, out: &mut Vec<Vec<Class>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for c in start..order {
            cur.push(Class(c));
            go(order, n, c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(order, n, 0, &mut Vec::with_capacity(n), &mut out);
    out
}

fn check_cap(order: usize, n: usize, cap: u64) -> Result<(), SchemeError> {
    let count = BigUint::from(order).pow(n as u32);
    if count > BigUint::from(cap) {
        return Err(SchemeError::EnumerationTooLarge { count, cap });
    }
    Ok(())
}

impl PfisterCatalog {
    pub fn build(scheme: &Scheme, n: usize, cap: u64) -> Result<PfisterCatalog, SchemeError> {
        check_cap(scheme.order(), n, cap)?;
        let tuples = sorted_tuples(scheme.order() as u32, n);
        let facts: Vec<(bool, ClassSet, DiagonalForm)> = tuples
            .par_iter()
            .map(|t| {
                let p = PfisterForm::new(t.clone());
                let e = p.expansion();
                let iso = scheme.pfister_isotropic(&p);
                let vs = if iso { scheme.all_classes() } else { scheme.value_set(e.entries()) };
                (iso, vs, e)
            })
            .collect();

        let mut classes: Vec<PfisterClass> = Vec::new();
        let mut expansions: Vec<DiagonalForm> = Vec::new();
        let mut buckets: HashMap<ClassSet, Vec<usize>> = HashMap::new();
        let mut hyperbolic_id = None;
        let mut index = HashMap::with_capacity(tuples.len());

        for (t, (iso, vs, e)) in tuples.into_iter().zip(facts) {
            let id = if iso {
                *hyperbolic_id.get_or_insert_with(|| {
                    classes.push(PfisterClass {
                        id: classes.len(),
                        hyperbolic: true,
                        representative: PfisterForm::new(t.clone()),
                        ones_rank: None,
                        value_set: vs,
                        members: Vec::new(),
                    });
                    expansions.push(e.clone());
                    classes.len() - 1
                })
            } else {
                let bucket = buckets.entry(vs).or_default();
                match bucket.iter().copied().find(|&c| scheme.isometric(&expansions[c], &e)) {
                    Some(c) => c,
                    None => {
                        let id = classes.len();
                        classes.push(PfisterClass {
                            id,
                            hyperbolic: false,
                            representative: PfisterForm::new(t.clone()),
                            ones_rank: Some(t.iter().filter(|c| c.is_one()).count()),
                            value_set: vs,
                            members: Vec::new(),
                        });
                        expansions.push(e);
                        bucket.push(id);
                        id
                    }
                }
            };
            classes[id].members.push(t.clone());
            index.insert(t, id);
        }
        Ok(PfisterCatalog { n, classes, index })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn classes(&self) -> &[PfisterClass] {
        &self.classes
    }

    pub fn class(&self, id: usize) -> &PfisterClass {
        &self.classes[id]
    }

    pub fn class_of(&self, p: &PfisterForm) -> usize {
        self.index[&p.sorted().slots]
    }

    pub fn hyperbolic_id(&self) -> Option<usize> {
        self.classes.iter().position(|c| c.hyperbolic)
    }

    pub fn is_hyperbolic(&self, p: &PfisterForm) -> bool {
        self.classes[self.class_of(p)].hyperbolic
    }

    /// The max-ones representative of the class of `p`.
    pub fn normalize(&self, p: &PfisterForm) -> &PfisterForm {
        &self.classes[self.class_of(p)].representative
    }

    /// Classes of (n-1)-fold forms `ρ` with `class = <<x>> ⊗ ρ` for some `x`.
    pub fn divisors(&self, id: usize, lower: &PfisterCatalog) -> BTreeSet<usize> {
        assert_eq!(lower.n + 1, self.n, "divisor catalog must have degree n - 1");
        let mut out = BTreeSet::new();
        for t in &self.classes[id].members {
            for i in 0..t.len() {
                let mut rest = t.clone();
                rest.remove(i);
                out.insert(lower.index[&rest]);
            }
        }
        out
    }

    pub fn strata(&self) -> StrataCounts {
        let mut by_rank = vec![0u64; self.n + 1];
        for c in &self.classes {
            if let Some(m) = c.ones_rank {
                by_rank[m] += 1;
            }
        }
        StrataCounts { n: self.n, by_rank, total: self.classes.len() as u64 }
    }
}

impl Scheme {
    /// Largest `m` with `π ≅ 2^m<<1,...,1>> ⊗ ρ`, by descending search over
    /// sorted cofactor tuples `ρ`.
    pub fn pfister_ones_rank(&self, p: &PfisterForm) -> Result<(usize, PfisterForm), SchemeError> {
        for &c in &p.slots {
            self.check_class(c)?;
        }
        if self.pfister_isotropic(p) {
            return Err(SchemeError::IsotropicInput);
        }
        let n = p.degree();
        let target = p.expansion();
        for m in (0..=n).rev() {
            for rho in sorted_tuples(self.order() as u32, n - m) {
                let mut slots = vec![Class::ONE; m];
                slots.extend(rho);
                let cand = PfisterForm::new(slots);
                if self.isometric(&cand.expansion(), &target) {
                    return Ok((m, cand));
                }
            }
        }
        unreachable!("m = 0 with ρ = π always succeeds")
    }

    pub fn enumerate_pfister_strata(&self, n: usize, cap: u64) -> Result<StrataCounts, SchemeError> {
        Ok(PfisterCatalog::build(self, n, cap)?.strata())
    }

    /// `span{x_1,...,x_k} ↦ <<1,...,1,x_1,...,x_k>>` with `m` leading ones,
    /// lifting each basis vector of `u` to the least class of its coset.
    pub fn subspace_to_pfister(
        &self,
        profile: &InvariantProfile,
        m: usize,
        u: &Subspace,
    ) -> Result<PfisterForm, SchemeError> {
        let q = self.quotient_by_pm(profile, m);
        if u.ambient() != q.dim() {
            return Err(SchemeError::DimensionMismatch { expected: q.dim(), got: u.ambient() });
        }
        self.basis_to_pfister(profile, m, &u.basis())
    }

    /// As `subspace_to_pfister`, for an arbitrary basis of the subspace.
    pub fn basis_to_pfister(
        &self,
        profile: &InvariantProfile,
        m: usize,
        basis: &[BitVector],
    ) -> Result<PfisterForm, SchemeError> {
        let q = self.quotient_by_pm(profile, m);
        let mut slots = vec![Class::ONE; m];
        for v in basis {
            if v.ambient() != q.dim() {
                return Err(SchemeError::DimensionMismatch { expected: q.dim(), got: v.ambient() });
            }
            slots.push(Class(q.lift(*v)));
        }
        Ok(PfisterForm::new(slots))
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::real_closed;
    use super::*;

    #[test]
    fn real_closed_strata() {
        let s = real_closed();
        let st = s.enumerate_pfister_strata(2, 1 << 20).unwrap();
        assert_eq!(st.by_rank, vec![0, 0, 1]);
        assert_eq!(st.total, 2);
        let (m, rep) = s.pfister_ones_rank(&PfisterForm::new(vec![Class(0), Class(0)])).unwrap();
        assert_eq!(m, 2);
        assert_eq!(rep.slots, vec![Class(0), Class(0)]);
        assert_eq!(
            s.pfister_ones_rank(&PfisterForm::new(vec![Class(1), Class(0)])),
            Err(SchemeError::IsotropicInput)
        );
    }

    #[test]
    fn tuple_enumeration() {
        assert_eq!(sorted_tuples(3, 2).len(), 6);
        assert_eq!(sorted_tuples(4, 0), vec![Vec::<Class>::new()]);
    }

    #[test]
    fn cap_is_enforced() {
        let s = real_closed();
        assert!(matches!(
            s.enumerate_pfister_strata(30, 1 << 20),
            Err(SchemeError::EnumerationTooLarge { .. })
        ));
    }
}
