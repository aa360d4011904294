//! The full verification run behind `symlen verify`: every numbered check
//! with its outcome, serialized deterministically.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    bound_report, bound_sl_binomial, bound_sl_polynomial, poly_binom_sum, split_basis_sum,
};
use crate::builders::{build_scheme, catalog};
use crate::decompose::{build_basis_chain, certify, merge_linked, rewrite_to_basis, LinkageIndex, PfisterEntry, PfisterSum, RewriteOptions};
use crate::f2space::{count_upper_bound, enumerate_subspaces, enumerate_superspaces, gaussian_count, superspace_count};
use crate::milnor::{kn_space, SymbolAlgebra, SymbolVector};
use crate::scheme::{Class, Scheme};

const MAX_LISTED: usize = 25;

#[derive(Clone, Debug, Serialize)]
pub struct VerifyConfig {
    pub max_d: usize,
    pub seed: u64,
    pub samples: usize,
    pub enum_cap: u64,
    pub bfs_cap: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            max_d: 4,
            seed: 0,
            samples: 200,
            enum_cap: crate::scheme::DEFAULT_STRATA_CAP,
            bfs_cap: crate::milnor::DEFAULT_BFS_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub id: u32,
    pub title: String,
    pub pass: bool,
    pub checked: usize,
    /// At most the first few failures.
    pub failures: Vec<String>,
    pub failure_count: usize,
    pub notes: Vec<String>,
}

#[derive(Default)]
struct Tally {
    checked: usize,
    failures: Vec<String>,
    failure_count: usize,
    notes: Vec<String>,
}

impl Tally {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failure_count += 1;
            if self.failures.len() < MAX_LISTED {
                self.failures.push(what());
            }
        }
    }

    fn fail(&mut self, what: String) {
        self.check(false, || what);
    }

    fn finish(self, id: u32, title: &str) -> CheckResult {
        CheckResult {
            id,
            title: title.to_string(),
            pass: self.failure_count == 0 && self.checked > 0,
            checked: self.checked,
            failures: self.failures,
            failure_count: self.failure_count,
            notes: self.notes,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

pub fn subspace_counts() -> CheckResult {
    let mut t = Tally::default();
    for d in 0..=6usize {
        for m in 0..=d {
            match enumerate_subspaces(d, m, u64::MAX) {
                Ok(subs) => {
                    let n = BigUint::from(subs.len());
                    t.check(n == gaussian_count(d, m), || format!("d={d} m={m}: enumerated {n}, formula {}", gaussian_count(d, m)));
                    t.check(n <= count_upper_bound(d, m), || format!("d={d} m={m}: {n} above 2^(m(d-m+1))"));
                    if m < d {
                        let expected = (BigUint::from(1u32) << (d - m)) - 1u32;
                        for w in subs.iter().step_by((subs.len() / 8).max(1)) {
                            let got = enumerate_superspaces(w).map(|s| s.len()).unwrap_or(0);
                            t.check(BigUint::from(got) == expected, || format!("d={d} m={m}: {got} superspaces"));
                        }
                        t.check(superspace_count(d, m).ok() == Some(expected.clone()), || format!("d={d} m={m}: superspace formula"));
                    }
                }
                Err(e) => t.fail(format!("d={d} m={m}: {e}")),
            }
        }
    }
    t.finish(1, "subspace counts")
}

fn schemes_up_to(max_d: usize) -> Vec<(String, Scheme)> {
    catalog(max_d)
        .into_par_iter()
        .map(|e| (e.to_string(), e.build().expect("catalog schemes are valid")))
        .collect()
}

pub fn invariant_formulas(max_d: usize) -> CheckResult {
    let mut t = Tally::default();
    for (name, s) in schemes_up_to(max_d) {
        let p = match s.invariants() {
            Ok(p) => p,
            Err(e) => {
                t.fail(format!("{name}: {e}"));
                continue;
            }
        };
        let sx = p.bound_exponent() as usize;
        for m in 0..=p.stable_index() {
            let from_q: u32 = (1..=m).map(|k| p.q_m(k).trailing_zeros()).sum();
            let formula = p.d as i64 - p.s_m(m).trailing_zeros() as i64 - from_q as i64;
            t.check(formula == p.d_m(m) as i64, || format!("{name} m={m}: d_m {} vs formula {formula}", p.d_m(m)));
            let expected_s = if p.is_real || m < sx { 2 } else { 1 };
            t.check(p.s_m(m) == expected_s, || format!("{name} m={m}: s_m = {} expected {expected_s}", p.s_m(m)));
        }
        for k in 1..=sx {
            let floor = 1u64 << (sx + 1 - k);
            t.check(p.q_m(k) >= floor, || format!("{name} k={k}: q_k = {} < {floor}", p.q_m(k)));
        }
    }
    t.finish(2, "invariant formulas")
}

pub fn oracle_dominance(max_d: usize, enum_cap: u64, bfs_cap: u64) -> CheckResult {
    let jobs: Vec<(String, Scheme, usize)> = schemes_up_to(max_d)
        .into_iter()
        .flat_map(|(name, s)| [2, 3].map(|n| (name.clone(), s.clone(), n)))
        .collect();
    let rows: Vec<Result<Vec<(String, bool)>, String>> = jobs
        .par_iter()
        .map(|(name, s, n)| {
            let p = s.invariants().map_err(|e| e.to_string())?;
            let a = kn_space(s, *n).map_err(|e| e.to_string())?;
            let (sl, _) = a.sl_field(bfs_cap).map_err(|e| e.to_string())?;
            let strata = s.enumerate_pfister_strata(*n, enum_cap).ok();
            let r = bound_report(name, &p, *n, strata.as_ref(), Some(sl));
            Ok(r.rows
                .iter()
                .filter(|row| row.applicable)
                .map(|row| {
                    let msg = format!("{name} n={n}: {} = {} < sl = {sl}", row.id, row.value.as_deref().unwrap_or("-"));
                    (msg, row.dominates == Some(true))
                })
                .collect())
        })
        .collect();
    let mut t = Tally::default();
    for r in rows {
        match r {
            Ok(rows) => rows.into_iter().for_each(|(msg, ok)| t.check(ok, || msg)),
            Err(e) => t.fail(e),
        }
    }
    t.finish(3, "exact symbol length below every bound")
}

// rank/2 of the alternating matrix of x ∈ Λ²G
fn bivector_half_rank(a: &SymbolAlgebra, d: usize, x: SymbolVector) -> usize {
    let mut rows = vec![0u32; d];
    for (k, idx) in a.basis().iter().enumerate() {
        if x.0 >> k & 1 == 1 {
            rows[idx[0]] ^= 1 << idx[1];
            rows[idx[1]] ^= 1 << idx[0];
        }
    }
    let mut rank = 0;
    for c in 0..d {
        let Some(p) = (rank..d).find(|&i| rows[i] >> c & 1 == 1) else { continue };
        rows.swap(rank, p);
        for i in 0..d {
            if i != rank && rows[i] >> c & 1 == 1 {
                rows[i] ^= rows[rank];
            }
        }
        rank += 1;
    }
    rank / 2
}

fn rigid_tower(k: usize) -> String {
    (0..k).fold("QC".to_string(), |acc, _| format!("laurent({acc})"))
}

pub fn rigid_bivector_lengths(bfs_cap: u64) -> CheckResult {
    let mut t = Tally::default();
    for k in 1..=5 {
        let s = build_scheme(&rigid_tower(k)).expect("valid");
        let a = match kn_space(&s, 2) {
            Ok(a) => a,
            Err(e) => {
                t.fail(format!("k={k}: {e}"));
                continue;
            }
        };
        let bad = (0..1u64 << a.dim())
            .into_par_iter()
            .filter(|&x| a.sl_element(SymbolVector(x)) != bivector_half_rank(&a, k, SymbolVector(x)))
            .count();
        t.checked += (1usize << a.dim()) - 1;
        t.check(bad == 0, || format!("k={k}: {bad} elements disagree"));
        match a.sl_field(bfs_cap) {
            Ok((sl, _)) => t.check(sl == k / 2, || format!("k={k}: sl_2 = {sl}, expected {}", k / 2)),
            Err(e) => t.fail(format!("k={k}: {e}")),
        }
    }
    t.finish(4, "rigid towers: symbol length equals half the bivector rank")
}

pub fn small_field_example(bfs_cap: u64) -> CheckResult {
    let mut t = Tally::default();
    let s = build_scheme("laurent(F2)").expect("valid");
    let p = s.invariants().expect("valid");
    t.check(p.d == 2, || format!("d = {}", p.d));
    t.check(p.level() == Some(2), || format!("level {:?}", p.level()));
    t.check(p.pythagoras == 3, || format!("p = {}", p.pythagoras));
    match kn_space(&s, 2) {
        Ok(a) => {
            t.check(a.dim() == 1, || format!("dim k_2 = {}", a.dim()));
            let sl = a.sl_field(bfs_cap).map(|r| r.0);
            t.check(sl.as_ref().ok() == Some(&1), || format!("sl_2 = {sl:?}"));
        }
        Err(e) => t.fail(e.to_string()),
    }
    let b = bound_sl_binomial(&p, 2);
    t.check(b == BigUint::from(1u32), || format!("binomial bound {b}"));
    t.finish(5, "local field model with level 2")
}

pub fn polynomial_lemma() -> CheckResult {
    let mut t = Tally::default();
    for j in 0..=10usize {
        match poly_binom_sum(j + 1, 0) {
            Ok(p) if p.edge_flagged => t.notes.push(format!(
                "n-m-1 = {j}: leading coefficient {} exceeds {}, excluded",
                p.same.coeff(j),
                p.claimed_leading_bound
            )),
            Ok(p) => {
                for (name, q) in [("same", &p.same), ("shifted", &p.shifted)] {
                    let deg_ok = q.degree().map_or(true, |g| g <= j);
                    t.check(deg_ok && q.coeff(j) <= p.claimed_leading_bound, || {
                        format!("n-m-1 = {j} ({name}): degree {:?}, leading {}", q.degree(), q.coeff(j))
                    });
                }
            }
            Err(e) => t.fail(format!("n-m-1 = {j}: {e}")),
        }
    }
    t.finish(6, "binomial-sum polynomials: degree and leading coefficient")
}

pub fn polynomial_corollary() -> CheckResult {
    let mut t = Tally::default();
    for n in 2..=4usize {
        let b = match bound_sl_polynomial(n) {
            Ok(b) => b,
            Err(e) => {
                t.fail(format!("n={n}: {e}"));
                continue;
            }
        };
        for d0 in 0..=12u64 {
            let direct = BigRational::from_integer(BigInt::from(split_basis_sum(|_| d0 as i64, n, n as i64 - 1)));
            let rest = b.remainder(d0).eval(&BigRational::from_integer(d0.into()));
            t.check(b.leading_term(d0) + rest == direct, || format!("n={n} d0={d0}: expansion differs from {direct}"));
            t.check(b.remainder(d0).degree().map_or(true, |g| g + 2 <= n), || format!("n={n} d0={d0}: remainder degree"));
        }
    }
    t.finish(7, "split-basis bound with constant d_m as a polynomial")
}

struct Workbench {
    name: String,
    scheme: Scheme,
    n: usize,
    algebra: SymbolAlgebra,
    index: LinkageIndex,
}

pub fn decomposition_certificates(seed: u64, samples: usize, enum_cap: u64) -> CheckResult {
    let mut t = Tally::default();
    let mut benches = Vec::new();
    for (name, s) in schemes_up_to(3) {
        for n in [2, 3] {
            match (kn_space(&s, n), LinkageIndex::build(&s, n, enum_cap)) {
                (Ok(algebra), Ok(index)) => benches.push(Workbench { name: name.clone(), scheme: s.clone(), n, algebra, index }),
                (Err(e), _) => t.fail(format!("{name} n={n}: {e}")),
                (_, Err(e)) => t.fail(format!("{name} n={n}: {e}")),
            }
        }
    }
    if benches.is_empty() {
        return t.finish(8, "decomposition certificates");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs: Vec<(usize, PfisterSum)> = (0..samples)
        .map(|_| {
            let b = &benches[rng.gen_range(0..benches.len())];
            let len = rng.gen_range(1..=6);
            let entries = (0..len)
                .map(|_| PfisterEntry::new((0..b.n).map(|_| Class(rng.gen_range(0..b.scheme.order() as u32))).collect()))
                .collect();
            let i = benches.iter().position(|x| std::ptr::eq(x, b)).expect("present");
            (i, PfisterSum { n: b.n, dim: b.scheme.dim(), entries })
        })
        .collect();
    let outcomes: Vec<Vec<(bool, String)>> = jobs
        .par_iter()
        .map(|(i, input)| {
            let b = &benches[*i];
            let tag = format!("{} n={} {:?}", b.name, b.n, input.format_slots());
            let run = || -> Result<Vec<(bool, String)>, String> {
                let p = b.scheme.invariants().map_err(|e| e.to_string())?;
                let chain = build_basis_chain(&b.scheme, &p).map_err(|e| e.to_string())?;
                let out = rewrite_to_basis(&b.scheme, &chain, input, RewriteOptions::default(), None).map_err(|e| e.to_string())?;
                let cert = certify(&p, &b.algebra, input, &out).map_err(|e| e.to_string())?;
                let merged = merge_linked(&b.scheme, &b.index, &out);
                let mcert = certify(&p, &b.algebra, input, &merged).map_err(|e| e.to_string())?;
                let linked = b.index.linked_pairs(&merged);
                Ok(vec![
                    (cert.pass, format!("{tag}: rewrite not certified")),
                    (cert.within_binomial, format!("{tag}: rewrite length {} above binomial bound", out.len())),
                    (mcert.pass, format!("{tag}: merge not certified")),
                    (linked.is_empty(), format!("{tag}: linked pairs remain {linked:?}")),
                ])
            };
            run().unwrap_or_else(|e| vec![(false, format!("{tag}: {e}"))])
        })
        .collect();
    for o in outcomes {
        for (ok, msg) in o {
            t.check(ok, || msg);
        }
    }
    t.finish(8, "decomposition certificates")
}

pub fn rigid_strata_bijection(enum_cap: u64) -> CheckResult {
    let mut t = Tally::default();
    for k in 1..=4 {
        let s = build_scheme(&rigid_tower(k)).expect("valid");
        let p = s.invariants().expect("valid");
        let sx = p.bound_exponent() as usize;
        for n in 1..=3 {
            let st = match s.enumerate_pfister_strata(n, enum_cap) {
                Ok(st) => st,
                Err(e) => {
                    t.fail(format!("k={k} n={n}: {e}"));
                    continue;
                }
            };
            for m in 0..=n {
                let expected = if m <= sx && n - m <= p.d_m(m) { gaussian_count(p.d_m(m), n - m) } else { BigUint::default() };
                let got = BigUint::from(st.by_rank[m]);
                t.check(got == expected, || format!("k={k} n={n} m={m}: |P| = {got}, |U| = {expected}"));
            }
        }
    }
    t.finish(9, "rigid towers: strata match subspace counts")
}

fn core_checks(config: &VerifyConfig) -> Vec<CheckResult> {
    vec![
        subspace_counts(),
        invariant_formulas(config.max_d),
        oracle_dominance(config.max_d, config.enum_cap, config.bfs_cap),
        rigid_bivector_lengths(config.bfs_cap),
        small_field_example(config.bfs_cap),
        polynomial_lemma(),
        polynomial_corollary(),
        decomposition_certificates(config.seed, config.samples, config.enum_cap),
        rigid_strata_bijection(config.enum_cap),
    ]
}

/// Runs every check; the last one repeats the others and compares the JSON.
pub fn run_verification(config: &VerifyConfig) -> VerifyReport {
    let mut checks = core_checks(config);
    let first = serde_json::to_string(&checks).expect("serializable");
    let second = serde_json::to_string(&core_checks(config)).expect("serializable");
    let mut t = Tally::default();
    t.check(first == second, || "two runs with the same configuration differ".to_string());
    checks.push(t.finish(10, "determinism"));
    let pass = checks.iter().all(|c| c.pass);
    VerifyReport { config: config.clone(), checks, pass }
}
