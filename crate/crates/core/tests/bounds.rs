use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use symlen_core::bounds::*;
use symlen_core::builders::{build_scheme, catalog};
use symlen_core::f2space::gaussian_count;
use symlen_core::milnor::{kn_space, DEFAULT_BFS_CAP};
use symlen_core::scheme::{InvariantProfile, DEFAULT_STRATA_CAP};

fn profile(text: &str) -> InvariantProfile {
    build_scheme(text).unwrap().invariants().unwrap()
}

fn big(x: u64) -> BigUint {
    BigUint::from(x)
}

fn choose(n: i64, k: i64) -> u64 {
    if k < 0 || k > n {
        return 0;
    }
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

// j-subsets of a d-set whose intersection with the first floor(d/2) points is even
fn split_subsets(d: i64, j: i64) -> u64 {
    if j < 0 {
        return 0;
    }
    let half = d / 2;
    (0u32..1 << d)
        .filter(|s| s.count_ones() as i64 == j && (s & ((1 << half) - 1)).count_ones() % 2 == 0)
        .count() as u64
}

#[test]
fn dm_estimates_against_computed_invariants() {
    for e in catalog(4) {
        let p = build_scheme(&e.to_string()).unwrap().invariants().unwrap();
        let bp = BoundParams::from_profile(&p);
        for m in 0..=5 {
            let est = bound_dm_estimate(bp.d, bp.s, m, bp.real, bp.p_case).unwrap();
            let dm = BigInt::from(p.d_m(m as usize));
            if est.case != DmCase::AboveNonreal {
                assert!(est.corrected >= dm, "{e}, m = {m}: corrected {} < d_m {dm}", est.corrected);
            }
            if est.printed < dm {
                assert!(est.printed_below_corrected(), "{e}, m = {m}");
            }
        }
    }
}

#[test]
fn printed_dm_estimate_undercuts_dyadic_example() {
    let p = profile("Q2");
    let bp = BoundParams::from_profile(&p);
    assert_eq!((bp.d, bp.s, bp.real), (3, 2, false));
    let est = bound_dm_estimate(bp.d, bp.s, 1, bp.real, bp.p_case).unwrap();
    assert_eq!(est.printed, BigInt::from(-2));
    assert_eq!(est.corrected, BigInt::from(0));
    assert_eq!(p.d_m(1), 0);
}

#[test]
fn bound_params_cases() {
    assert_eq!(BoundParams::from_profile(&profile("RC")).p_case, PythagorasCase::PowerOfTwo);
    let f1 = BoundParams::from_profile(&profile("F1"));
    assert_eq!((f1.s, f1.real, f1.p_case), (0, false, PythagorasCase::Above));
    let q3 = BoundParams::from_profile(&profile("laurent(F2)"));
    assert_eq!((q3.d, q3.s), (2, 1));
}

// The strata sum with d_m replaced by the printed estimates, in floating point.
fn exponential_oracle(p: &InvariantProfile, n: usize) -> f64 {
    let bp = BoundParams::from_profile(p);
    let mut total = 0.0f64;
    for m in 0..=n as i64 {
        let est = bound_dm_estimate(bp.d, bp.s, m, bp.real, bp.p_case).unwrap();
        if est.case == DmCase::AboveNonreal {
            continue;
        }
        if !bp.real && bp.s <= n as i64 && m > bp.s {
            continue;
        }
        let dm = est.printed.to_i64().unwrap();
        total += 2f64.powi(((n as i64 - m) * (dm - n as i64 + m + 1)) as i32);
    }
    total
}

#[test]
fn exponential_bound_matches_strata_sum_of_estimates() {
    for e in catalog(4) {
        let p = build_scheme(&e.to_string()).unwrap().invariants().unwrap();
        for n in 2..=5 {
            let b = bound_sl_exponential(&p, n);
            let oracle = exponential_oracle(&p, n);
            assert_eq!(b.exact.to_f64().unwrap(), oracle, "{e}, n = {n}");
            assert_eq!(b.value, BigUint::from(oracle.floor() as u64), "{e}, n = {n}");
            assert!(b.negative_exponents.iter().all(|&(_, x)| x < 0));
        }
    }
}

#[test]
fn exponential_examples() {
    assert_eq!(bound_sl_exponential(&profile("QC"), 2).value, big(0));
    assert_eq!(bound_sl_exponential(&profile("laurent(F2)"), 2).value, big(1));
    let rc = bound_sl_exponential(&profile("RC"), 2);
    assert_eq!(rc.case, ExponentialCase::RealPowerOfTwo);
    assert_eq!(rc.exact, BigRational::new(13.into(), 4.into()));
}

#[test]
fn strata_bounds() {
    let p = profile("laurent(F2)");
    for n in 2..=3 {
        // m = n lies above the level exponent
        assert_eq!(bound_strata_count(&p, n, n), big(0));
    }
    let rc = profile("RC");
    assert_eq!(bound_strata_count(&rc, 2, 2), big(1));
    let rigid = profile("laurent(laurent(laurent(QC)))");
    // 2^{2(3-2+1)}
    assert_eq!(bound_strata_count(&rigid, 2, 0), big(16));
    assert_eq!(bound_strata_count(&rigid, 2, 1), big(0));

    let mut undercounted = Vec::new();
    for e in catalog(4) {
        let s = e.build().unwrap();
        let p = s.invariants().unwrap();
        let bp = BoundParams::from_profile(&p);
        for n in 2..=3 {
            let st = s.enumerate_pfister_strata(n, DEFAULT_STRATA_CAP).unwrap();
            for m in 0..=n {
                let count = BigUint::from(st.by_rank[m]);
                let e_m = p.d - p.d2m(m).len().trailing_zeros() as usize;
                let subspaces = if n - m <= e_m { gaussian_count(e_m, n - m) } else { BigUint::zero() };
                assert!(count <= subspaces, "{e}, n = {n}, m = {m}");
                assert!(count <= bound_strata_count_mod_d2m(&p, n, m));
                if p.s_m(m) == 1 {
                    assert!(count <= bound_strata_count(&p, n, m), "{e}, n = {n}, m = {m}");
                } else if count > bound_strata_count(&p, n, m) {
                    undercounted.push((e.to_string(), n, m));
                }
                if m as i64 > bp.s && !bp.real {
                    assert!(bound_strata_estimate(&bp, n, m).is_zero());
                }
            }
        }
    }
    // <<1,x>> and <<1,-x>> are distinct classes over laurent(laurent(RC))
    assert!(undercounted.contains(&("laurent(laurent(RC))".to_string(), 2, 1)));
}

#[test]
fn linked_bound_terms() {
    let rigid = profile("laurent(laurent(laurent(QC)))");
    let b = bound_sl_linked(&rigid, 2, true);
    // level 1: only m = 0 counts, and n - 0 >= d_0 - 1
    assert_eq!(b.value, big(1));
    assert_eq!(b.terms, vec![LinkedTerm::One, LinkedTerm::Zero, LinkedTerm::Zero]);

    let r4 = profile("laurent(laurent(laurent(laurent(QC))))");
    let exact = bound_sl_linked(&r4, 2, true);
    let power = bound_sl_linked(&r4, 2, false);
    // m = 0: 15 / 3 and 64 / 3
    assert_eq!(exact.value, big(5));
    assert_eq!(power.value, big(21));

    let f2 = profile("F2");
    assert!(bound_sl_linked(&f2, 3, true).terms.iter().any(|t| *t == LinkedTerm::Zero));

    // n - m >= d is caught by the n - m >= d_m - 1 branch first
    for e in catalog(4) {
        let p = e.build().unwrap().invariants().unwrap();
        for n in 2..=6 {
            assert!(!bound_sl_linked(&p, n, false).terms.contains(&LinkedTerm::DegenerateDenominator));
        }
    }
}

#[test]
fn binomial_family_against_subset_counts() {
    for e in catalog(4) {
        let p = build_scheme(&e.to_string()).unwrap().invariants().unwrap();
        let s = p.bound_exponent() as i64;
        for n in 2..=5i64 {
            let top = if p.is_real { n } else { s.min(n) };
            let dm = |m: i64| p.d_m(m as usize) as i64;
            let binom: u64 = (0..=top).map(|m| choose(dm(m), n - m)).sum();
            let paired: u64 = (0..=top / 2).map(|m| choose(dm(2 * m), n - 2 * m - 1)).sum();
            let split_top = if p.is_real { n - 1 } else { s.min(n - 1) };
            let split: u64 = (0..=split_top).map(|m| split_subsets(dm(m), n - m - 1)).sum();
            assert_eq!(bound_sl_binomial(&p, n as usize), big(binom), "{e}, n = {n}");
            assert_eq!(bound_sl_paired(&p, n as usize), big(paired), "{e}, n = {n}");
            assert_eq!(bound_sl_split_basis(&p, n as usize), big(split), "{e}, n = {n}");
        }
    }
    assert_eq!(bound_sl_binomial(&profile("laurent(laurent(laurent(QC)))"), 2), big(3));
    assert_eq!(bound_sl_binomial(&profile("laurent(F2)"), 2), big(1));
}

#[test]
fn binomial_sum_polynomials_evaluate_to_subset_counts() {
    for j in 0..=10usize {
        let p = poly_binom_sum(j + 1, 0).unwrap();
        assert_eq!(p.j, j);
        assert_eq!(p.edge_flagged, j == 0);
        for k in 0..=8i64 {
            let x = BigRational::from_integer(k.into());
            // halves of sizes (k, k) and (k, k+1)
            assert_eq!(p.same.eval(&x), BigRational::from_integer(split_subsets(2 * k, j as i64).into()), "j = {j}, k = {k}");
            assert_eq!(p.shifted.eval(&x), BigRational::from_integer(split_subsets(2 * k + 1, j as i64).into()), "j = {j}, k = {k}");
        }
        if j >= 1 {
            assert!(p.same.degree().unwrap() <= j && p.shifted.degree().unwrap() <= j);
            assert_eq!(p.same.coeff(j), p.claimed_leading_bound);
            assert_eq!(p.shifted.coeff(j), p.claimed_leading_bound);
        }
    }
    assert!(poly_binom_sum(2, 2).is_err());
}

#[test]
fn polynomial_bound_matches_constant_strata_sum() {
    for n in 2..=4usize {
        let b = bound_sl_polynomial(n).unwrap();
        for d0 in 0..=12u64 {
            let direct = split_basis_sum(|_| d0 as i64, n, n as i64 - 1);
            let direct = BigRational::from_integer(BigInt::from(direct));
            assert_eq!(b.eval(d0), direct, "n = {n}, d0 = {d0}");
            let rest = b.remainder(d0).eval(&BigRational::from_integer(d0.into()));
            assert_eq!(b.leading_term(d0) + rest, direct);
            assert!(b.remainder(d0).degree().map_or(true, |g| g + 2 <= n));
        }
    }
    assert!(bound_sl_polynomial(1).is_err());
}

#[test]
fn linked_quotient_comparison() {
    let cases = linked_quotient_comparisons(8);
    for c in &cases {
        if c.k == 0 || c.d == c.d_m {
            assert!(c.holds, "{c:?}");
        } else {
            assert!(!c.holds, "{c:?}");
        }
    }
    // 2^{2·2}/3 = 16/3 against 2^{2·1}/1 = 4
    assert!(cases.iter().any(|c| (c.k, c.d_m, c.d, c.holds) == (1, 2, 3, false)));
}

#[test]
fn dominance_on_small_schemes() {
    let mut violations = Vec::new();
    for e in catalog(3) {
        let s = e.build().unwrap();
        let p = s.invariants().unwrap();
        for n in 2..=3 {
            let (sl, _) = kn_space(&s, n).unwrap().sl_field(DEFAULT_BFS_CAP).unwrap();
            let st = s.enumerate_pfister_strata(n, DEFAULT_STRATA_CAP).unwrap();
            let r = bound_report(&e.to_string(), &p, n, Some(&st), Some(sl));
            assert!(r.rows.iter().all(|row| row.applicable && row.dominates.is_some()));
            for v in r.violations() {
                violations.push((e.to_string(), n, v.id.clone()));
            }
        }
    }
    // the stratum m = n is never summed by the paired bound
    assert_eq!(violations, vec![("RC".to_string(), 2, "paired".to_string())]);
}
