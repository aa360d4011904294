use serde::{Deserialize, Serialize};

use super::{Class, ClassSet, DiagonalForm, Scheme, SchemeError};
use crate::f2space::{QuotientMap, Subspace};

/// Level, Pythagoras number and the sequences `q_m`, `s_m`, `d_m` of a scheme.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantProfile {
    pub d: usize,
    /// `s` with level `2^s`; `None` for real schemes.
    pub level_exponent: Option<u32>,
    pub pythagoras: u32,
    pub is_real: bool,
    /// `q_1..q_M`.
    pub q: Vec<u64>,
    /// `s_0..s_M`.
    pub s_seq: Vec<u64>,
    /// `d_0..d_M`, computed as `d - log2 |±D(2^m)|`.
    pub d_seq: Vec<usize>,
    /// `D(2^0) ⊆ ... ⊆ D(2^M)`.
    pub chain: Vec<ClassSet>,
    pub minus_one: Class,
}

impl InvariantProfile {
    /// Stabilization index `M`.
    pub fn stable_index(&self) -> usize {
        self.chain.len() - 1
    }

    pub fn level(&self) -> Option<u64> {
        self.level_exponent.map(|s| 1u64 << s)
    }

    pub fn q_m(&self, m: usize) -> u64 {
        assert!(m >= 1, "q_m is defined for m >= 1");
        self.q.get(m - 1).copied().unwrap_or(1)
    }

    pub fn s_m(&self, m: usize) -> u64 {
        self.s_seq[m.min(self.stable_index())]
    }

    pub fn d_m(&self, m: usize) -> usize {
        self.d_seq[m.min(self.stable_index())]
    }

    pub fn d2m(&self, m: usize) -> ClassSet {
        self.chain[m.min(self.stable_index())]
    }

    /// `±D(2^m)`.
    pub fn pm_d2m(&self, m: usize) -> ClassSet {
        let d = self.d2m(m);
        d.union(d.scale(self.minus_one))
    }

    /// `floor(log2 p)`.
    pub fn pythagoras_exponent(&self) -> u32 {
        31 - self.pythagoras.leading_zeros()
    }

    /// The exponent the bounds are stated in: the level exponent of a
    /// nonreal scheme, `floor(log2 p)` of a real one.
    pub fn bound_exponent(&self) -> u32 {
        self.level_exponent.unwrap_or_else(|| self.pythagoras_exponent())
    }
}

fn log2_exact(x: usize) -> u32 {
    debug_assert!(x.is_power_of_two());
    x.trailing_zeros()
}

fn subspace_of(set: ClassSet, dim: usize) -> Subspace {
    let words: Vec<u32> = set.iter().map(|c| c.0).collect();
    Subspace::from_words(&words, dim)
}

impl Scheme {
    /// Value sets `D(k)` of `k<1>` for `k = 1, 2, ...` until two consecutive
    /// ones agree; the last entry is the set of all sums of squares.
    pub fn sums_of_squares(&self) -> Vec<ClassSet> {
        let mut sums = vec![ClassSet::singleton(Class::ONE)];
        loop {
            let last = *sums.last().expect("nonempty");
            let next = last.iter().fold(ClassSet::EMPTY, |acc, z| acc.union(self.d1(z)));
            if next == last {
                return sums;
            }
            sums.push(next);
        }
    }

    /// `D(2^m)` for `m = 0..=M`, stopping when `D(2^{M+1}) = D(2^M)`.
    pub fn d2m_chain(&self) -> Result<Vec<ClassSet>, SchemeError> {
        let sums = self.sums_of_squares();
        let at = |k: usize| sums[(k - 1).min(sums.len() - 1)];
        let mut chain = vec![at(1)];
        loop {
            let m = chain.len() - 1;
            let cur = chain[m];
            if !cur.is_subgroup() {
                return Err(SchemeError::NotAGroup { m });
            }
            self.check_round(m, cur)?;
            let next = at(1 << (m + 1));
            if cur.0 & !next.0 != 0 {
                return Err(SchemeError::ProfileInconsistency(format!(
                    "D(2^{}) does not contain D(2^{m})",
                    m + 1
                )));
            }
            if next == cur {
                return Ok(chain);
            }
            chain.push(next);
        }
    }

    // The value set of 2^m<1> must equal its group of similarity factors.
    fn check_round(&self, m: usize, d: ClassSet) -> Result<(), SchemeError> {
        if m > 3 {
            return Ok(());
        }
        let phi = DiagonalForm::new(vec![Class::ONE; 1 << m]);
        for a in d.iter() {
            if !self.isometric(&phi, &phi.scaled(a)) {
                return Err(SchemeError::ProfileInconsistency(format!(
                    "2^{m}<1> is not round: class {a} is represented but not a similarity factor"
                )));
            }
        }
        Ok(())
    }

    pub fn invariants(&self) -> Result<InvariantProfile, SchemeError> {
        let d = self.dim();
        let eps = self.minus_one();
        let sums = self.sums_of_squares();
        let chain = self.d2m_chain()?;
        let big_m = chain.len() - 1;

        let level = sums.iter().position(|s| s.contains(eps)).map(|i| i + 1);
        let level_exponent = match level {
            Some(l) if !l.is_power_of_two() => {
                return Err(SchemeError::ProfileInconsistency(format!(
                    "level {l} is not a power of two"
                )))
            }
            Some(l) => Some(log2_exact(l)),
            None => None,
        };
        let pythagoras = sums.len() as u32;
        if let Some(l) = level {
            let l = l as u32;
            if pythagoras < l || pythagoras > l + 1 {
                return Err(SchemeError::ProfileInconsistency(format!(
                    "level {l} and Pythagoras number {pythagoras} violate s <= p <= s + 1"
                )));
            }
        }

        let q: Vec<u64> = (1..=big_m).map(|m| (chain[m].len() / chain[m - 1].len()) as u64).collect();
        let pm: Vec<ClassSet> = chain.iter().map(|c| c.union(c.scale(eps))).collect();
        let s_seq: Vec<u64> = (0..=big_m).map(|m| (pm[m].len() / chain[m].len()) as u64).collect();
        let d_seq: Vec<usize> = pm.iter().map(|p| d - log2_exact(p.len()) as usize).collect();

        for m in 0..=big_m {
            let from_q: u32 = q[..m].iter().map(|&x| log2_exact(x as usize)).sum();
            let formula = d as i64 - log2_exact(s_seq[m] as usize) as i64 - from_q as i64;
            if formula != d_seq[m] as i64 {
                return Err(SchemeError::ProfileInconsistency(format!(
                    "d_{m} is {} directly but {formula} from q and s",
                    d_seq[m]
                )));
            }
        }

        Ok(InvariantProfile {
            d,
            level_exponent,
            pythagoras,
            is_real: level.is_none(),
            q,
            s_seq,
            d_seq,
            chain,
            minus_one: eps,
        })
    }

    /// The quotient `G / ±D(2^m)` together with the kernel as a subspace.
    pub fn quotient_by_pm(&self, profile: &InvariantProfile, m: usize) -> QuotientMap {
        QuotientMap::new(subspace_of(profile.pm_d2m(m), self.dim()))
    }
}
