//! Upper bounds for `sl_n` and for the Pfister strata `|P_{n,m}|`, as
//! functions of an invariant profile.
//!
//! Exponents may be negative at small `d`; each term is kept as an exact
//! rational and a sum is floored once at the end.

mod poly;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::f2space::gaussian_count;
use crate::scheme::{InvariantProfile, StrataCounts};

pub use poly::RationalPolynomial;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BoundsError {
    #[error("invalid case: {0}")]
    InvalidCase(String),
    #[error("binomial-sum polynomial for j = {j} violates the degree or leading-coefficient claim")]
    LemmaViolation { j: usize },
    #[error("remainder polynomial for n = {n} ({parity} branch) has degree above n - 2")]
    DegreeViolation { n: usize, parity: &'static str },
}

/// Whether `p = 2^s` or `2^s < p < 2^{s+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PythagorasCase {
    PowerOfTwo,
    Above,
}

/// `d`, `s` and the case split the bounds depend on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoundParams {
    pub d: i64,
    pub s: i64,
    pub real: bool,
    pub p_case: PythagorasCase,
}

impl BoundParams {
    pub fn from_profile(p: &InvariantProfile) -> Self {
        let s = p.bound_exponent();
        let p_case = if p.pythagoras == 1 << s { PythagorasCase::PowerOfTwo } else { PythagorasCase::Above };
        BoundParams { d: p.d as i64, s: s as i64, real: p.is_real, p_case }
    }
}

fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

fn floor_nonneg(x: &BigRational) -> BigUint {
    let f = x.floor().to_integer();
    if f.is_negative() {
        BigUint::zero()
    } else {
        f.to_biguint().expect("nonnegative")
    }
}

/// `binom(n, k)`, zero when `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> BigUint {
    if k < 0 || n < 0 || k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from((n - i) as u64) / BigUint::from((i + 1) as u64);
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DmCase {
    BelowS,
    AtS,
    AboveNonreal,
    AboveReal,
}

/// An upper bound on `d_m` from `d`, `s` and the realness case.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DmEstimate {
    pub case: DmCase,
    /// `d - m(2s+m+3)/2 - 1`, `d - 3s(s+1)/2 [- 1]`, `0`, or `d - 3s(s+1)/2 [- 1]`.
    #[serde(serialize_with = "ser_display")]
    pub printed: BigInt,
    /// The same cases from `d_m = d - log2 s_m - Σ log2 q_k` and
    /// `q_k >= 2^{s+1-k}`: `Σ_{k<=m} (s+1-k) = m(2s+1-m)/2`.
    #[serde(serialize_with = "ser_display")]
    pub corrected: BigInt,
}

impl DmEstimate {
    /// The printed expression is smaller than what the derivation supports.
    pub fn printed_below_corrected(&self) -> bool {
        self.printed < self.corrected
    }
}

pub fn bound_dm_estimate(d: i64, s: i64, m: i64, real: bool, p_case: PythagorasCase) -> Result<DmEstimate, BoundsError> {
    if d < 0 || s < 0 || m < 0 {
        return Err(BoundsError::InvalidCase(format!("negative argument: d = {d}, s = {s}, m = {m}")));
    }
    let tri = s * (s + 1) / 2;
    let (case, printed, corrected) = if m < s {
        (DmCase::BelowS, d - m * (2 * s + m + 3) / 2 - 1, d - m * (2 * s + 1 - m) / 2 - 1)
    } else if m == s {
        let r = if real { 1 } else { 0 };
        (DmCase::AtS, d - 3 * tri - r, d - tri - r)
    } else if !real {
        (DmCase::AboveNonreal, 0, 0)
    } else {
        let r = match p_case {
            PythagorasCase::PowerOfTwo => 0,
            PythagorasCase::Above => 1,
        };
        (DmCase::AboveReal, d - 3 * tri - r, d - tri - 1 - r)
    };
    Ok(DmEstimate { case, printed: printed.into(), corrected: corrected.into() })
}

/// `|P_{n,m}| <= 2^{(n-m)(d_m-n+m+1)}` with the computed `d_m`; `0` above
/// the level exponent of a nonreal scheme.
pub fn bound_strata_count(profile: &InvariantProfile, n: usize, m: usize) -> BigUint {
    assert!(m <= n);
    let params = BoundParams::from_profile(profile);
    if !params.real && m as i64 > params.s {
        return BigUint::zero();
    }
    let k = (n - m) as i64;
    floor_nonneg(&pow2(k * (profile.d_m(m) as i64 - k + 1)))
}

/// `2^{(n-m)(e_m-n+m+1)}` with `e_m = dim G/D(2^m) = d_m + log2 s_m`.
/// Counting subspaces of `G/±D(2^m)` undercounts `P_{n,m}` when `s_m = 2`,
/// since `<<1,..,1,x>>` and `<<1,..,1,-x>>` then differ.
pub fn bound_strata_count_mod_d2m(profile: &InvariantProfile, n: usize, m: usize) -> BigUint {
    assert!(m <= n);
    if !profile.is_real && m as u32 > profile.bound_exponent() {
        return BigUint::zero();
    }
    let k = (n - m) as i64;
    let e = (profile.d_m(m) + profile.s_m(m).trailing_zeros() as usize) as i64;
    floor_nonneg(&pow2(k * (e - k + 1)))
}

/// The same bound with `d_m` replaced by its case estimate from `d` and `s`.
pub fn bound_strata_estimate(params: &BoundParams, n: usize, m: usize) -> BigRational {
    let (d, s, n, m) = (params.d, params.s, n as i64, m as i64);
    let k = n - m;
    if m < s {
        pow2(k * (d - m * (2 * s + m + 1) / 2 - n))
    } else if m == s {
        pow2(k * (d - s * (3 * s + 1) / 2 - n + if params.real { 0 } else { 1 }))
    } else if !params.real {
        BigRational::zero()
    } else {
        let r = match params.p_case {
            PythagorasCase::PowerOfTwo => 1,
            PythagorasCase::Above => 0,
        };
        pow2(k * (d - 3 * s * (s + 1) / 2 - n + m + r))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExponentialCase {
    /// `s > n`.
    LargeLevel,
    Nonreal,
    RealPowerOfTwo,
    RealAbove,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExponentialBound {
    pub case: ExponentialCase,
    #[serde(serialize_with = "ser_display")]
    pub value: BigUint,
    #[serde(serialize_with = "ser_display")]
    pub exact: BigRational,
    /// `(m, exponent)` for terms with a negative exponent.
    pub negative_exponents: Vec<(usize, i64)>,
    /// The same sum with the corrected `d_m` estimates.
    #[serde(serialize_with = "ser_display")]
    pub corrected: BigUint,
}

fn ser_display<T: std::fmt::Display, S: serde::Serializer>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

pub fn bound_sl_exponential(profile: &InvariantProfile, n: usize) -> ExponentialBound {
    let params = BoundParams::from_profile(profile);
    let (d, s, ni) = (params.d, params.s, n as i64);
    let lower = |m: i64| (ni - m) * (d - m * (2 * s + m + 1) / 2 - ni);
    let mut terms: Vec<(usize, i64)> = Vec::new();
    let case = if s > ni {
        terms.extend((0..=ni).map(|m| (m as usize, lower(m))));
        ExponentialCase::LargeLevel
    } else if !params.real {
        terms.extend((0..s).map(|m| (m as usize, lower(m))));
        terms.push((s as usize, (ni - s) * (d - s * (3 * s + 1) / 2 - ni + 1)));
        ExponentialCase::Nonreal
    } else {
        terms.extend((0..=s).map(|m| (m as usize, lower(m))));
        let r = match params.p_case {
            PythagorasCase::PowerOfTwo => 1,
            PythagorasCase::Above => 0,
        };
        terms.extend((s + 1..=ni).map(|m| (m as usize, (ni - m) * (d - 3 * s * (s + 1) / 2 - ni + m + r))));
        match params.p_case {
            PythagorasCase::PowerOfTwo => ExponentialCase::RealPowerOfTwo,
            PythagorasCase::Above => ExponentialCase::RealAbove,
        }
    };
    let exact = terms.iter().fold(BigRational::zero(), |acc, &(_, e)| acc + pow2(e));
    let negative_exponents = terms.iter().copied().filter(|&(_, e)| e < 0).collect();

    let mut corrected = BigRational::zero();
    for m in 0..=ni {
        let est = bound_dm_estimate(d, s, m, params.real, params.p_case).expect("nonnegative arguments");
        if est.case == DmCase::AboveNonreal {
            continue;
        }
        let dm = est.corrected.to_i64().expect("small");
        corrected += pow2((ni - m) * (dm - ni + m + 1));
    }

    ExponentialBound { case, value: floor_nonneg(&exact), exact, negative_exponents, corrected: floor_nonneg(&corrected) }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum LinkedTerm {
    /// Nonreal scheme, `m > s`.
    Zero,
    /// `n - m >= d_m - 1`.
    One,
    Quotient {
        #[serde(serialize_with = "ser_display")]
        numerator: BigUint,
        #[serde(serialize_with = "ser_display")]
        denominator: BigUint,
        #[serde(serialize_with = "ser_display")]
        value: BigUint,
    },
    /// `2^{d-n+m} - 1 <= 0`; the term is skipped.
    DegenerateDenominator,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinkedBound {
    #[serde(serialize_with = "ser_display")]
    pub value: BigUint,
    pub terms: Vec<LinkedTerm>,
}

/// Per stratum: `0`, `1`, or `floor(N / (2^{d-n+m} - 1))` with `N` the
/// number of `(n-m+1)`-dimensional subspaces of `G` (or its power-of-two
/// estimate `2^{(n-m+1)(d-n+m)}`).
pub fn bound_sl_linked(profile: &InvariantProfile, n: usize, exact_subspace_count: bool) -> LinkedBound {
    let params = BoundParams::from_profile(profile);
    let d = params.d;
    let mut terms = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let (mi, k) = (m as i64, (n - m) as i64);
        let dm = profile.d_m(m) as i64;
        let term = if !params.real && mi > params.s {
            LinkedTerm::Zero
        } else if k >= dm - 1 {
            LinkedTerm::One
        } else if d - k <= 0 {
            LinkedTerm::DegenerateDenominator
        } else {
            let numerator = if exact_subspace_count {
                if k + 1 > d {
                    BigUint::zero()
                } else {
                    gaussian_count(d as usize, (k + 1) as usize)
                }
            } else {
                BigUint::one() << ((k + 1) * (d - k)) as usize
            };
            let denominator = (BigUint::one() << (d - k) as usize) - BigUint::one();
            let value = numerator.div_floor(&denominator);
            LinkedTerm::Quotient { numerator, denominator, value }
        };
        terms.push(term);
    }
    let value = terms
        .iter()
        .map(|t| match t {
            LinkedTerm::One => BigUint::one(),
            LinkedTerm::Quotient { value, .. } => value.clone(),
            _ => BigUint::zero(),
        })
        .sum();
    LinkedBound { value, terms }
}

// Last stratum summed: min(s, cap) on nonreal schemes, `cap` on real ones.
fn stratum_limit(profile: &InvariantProfile, cap: i64) -> i64 {
    if profile.is_real {
        cap
    } else {
        (profile.bound_exponent() as i64).min(cap)
    }
}

/// `Σ_m binom(d_m, n-m)`.
pub fn bound_sl_binomial(profile: &InvariantProfile, n: usize) -> BigUint {
    let n = n as i64;
    (0..=stratum_limit(profile, n)).map(|m| binomial(profile.d_m(m as usize) as i64, n - m)).sum()
}

/// `Σ_m binom(d_{2m}, n-2m-1)` over `m <= floor(limit / 2)`.
pub fn bound_sl_paired(profile: &InvariantProfile, n: usize) -> BigUint {
    let n = n as i64;
    (0..=stratum_limit(profile, n) / 2)
        .map(|m| binomial(profile.d_m(2 * m as usize) as i64, n - 2 * m - 1))
        .sum()
}

/// `Σ_m Σ_r binom(floor(d_m/2), 2r) binom(floor((d_m+1)/2), n-m-1-2r)`.
pub fn bound_sl_split_basis(profile: &InvariantProfile, n: usize) -> BigUint {
    let limit = stratum_limit(profile, n as i64 - 1);
    split_basis_sum(|m| profile.d_m(m) as i64, n, limit)
}

/// The split-basis double sum for `m = 0..=limit` with `d_m` given by `dm`.
pub fn split_basis_sum(dm: impl Fn(usize) -> i64, n: usize, limit: i64) -> BigUint {
    let n = n as i64;
    let mut total = BigUint::zero();
    for m in 0..=limit {
        let dmv = dm(m as usize);
        let j = n - m - 1;
        for r in 0..=j.div_euclid(2) {
            total += binomial(dmv / 2, 2 * r) * binomial((dmv + 1) / 2, j - 2 * r);
        }
    }
    total
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BinomialSumPolynomials {
    /// `j = n - m - 1`.
    pub j: usize,
    /// `Σ_r binom(X, 2r) binom(X, j-2r)`.
    pub same: RationalPolynomial,
    /// `Σ_r binom(X, 2r) binom(X+1, j-2r)`.
    pub shifted: RationalPolynomial,
    /// `2^j / (2 j!)`.
    #[serde(serialize_with = "ser_display")]
    pub claimed_leading_bound: BigRational,
    /// `j = 0`, where both sums are `1 > 1/2`.
    pub edge_flagged: bool,
}

/// Expands both binomial sums for `j = n - m - 1` and checks degree `<= j`
/// and leading coefficient `<= 2^j / (2 j!)`.
pub fn poly_binom_sum(n: usize, m: usize) -> Result<BinomialSumPolynomials, BoundsError> {
    if n < m + 1 {
        return Err(BoundsError::InvalidCase(format!("n - m - 1 < 0 for n = {n}, m = {m}")));
    }
    let j = n - m - 1;
    let mut same = RationalPolynomial::zero();
    let mut shifted = RationalPolynomial::zero();
    for r in 0..=j / 2 {
        let even = RationalPolynomial::binomial(0, 2 * r);
        same = &same + &(&even * &RationalPolynomial::binomial(0, j - 2 * r));
        shifted = &shifted + &(&even * &RationalPolynomial::binomial(1, j - 2 * r));
    }
    let fact: BigInt = (1..=j as u64).map(BigInt::from).product();
    let bound = BigRational::new(BigInt::one() << j, BigInt::from(2) * fact);
    let within = |p: &RationalPolynomial| {
        p.degree().map_or(true, |deg| deg <= j) && p.coeff(j) <= bound
    };
    let edge_flagged = !(within(&same) && within(&shifted));
    if edge_flagged && j > 0 {
        return Err(BoundsError::LemmaViolation { j });
    }
    Ok(BinomialSumPolynomials { j, same, shifted, claimed_leading_bound: bound, edge_flagged })
}

/// The split-basis bound with every `d_m` replaced by `d_0`, as a
/// polynomial in `d_0` for each parity of `d_0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolynomialBound {
    pub n: usize,
    /// `1 / (2 (n-1)!)`, the coefficient of `d_0^{n-1}`.
    #[serde(serialize_with = "ser_display")]
    pub leading_coefficient: BigRational,
    pub even: RationalPolynomial,
    pub odd: RationalPolynomial,
    /// `even - leading_coefficient * X^{n-1}`.
    pub remainder_even: RationalPolynomial,
    pub remainder_odd: RationalPolynomial,
}

impl PolynomialBound {
    pub fn leading_term(&self, d0: u64) -> BigRational {
        self.leading_coefficient.clone() * BigRational::from_integer(BigInt::from(d0).pow(self.n as u32 - 1))
    }

    pub fn remainder(&self, d0: u64) -> &RationalPolynomial {
        if d0 % 2 == 0 {
            &self.remainder_even
        } else {
            &self.remainder_odd
        }
    }

    pub fn eval(&self, d0: u64) -> BigRational {
        let x = BigRational::from_integer(d0.into());
        let p = if d0 % 2 == 0 { &self.even } else { &self.odd };
        p.eval(&x)
    }
}

pub fn bound_sl_polynomial(n: usize) -> Result<PolynomialBound, BoundsError> {
    if n < 2 {
        return Err(BoundsError::InvalidCase(format!("n = {n} < 2")));
    }
    // in k = floor(d_0 / 2): even d_0 gives (k, k), odd d_0 gives (k, k + 1)
    let mut in_k_even = RationalPolynomial::zero();
    let mut in_k_odd = RationalPolynomial::zero();
    for m in 0..n {
        let p = poly_binom_sum(n, m)?;
        in_k_even = &in_k_even + &p.same;
        in_k_odd = &in_k_odd + &p.shifted;
    }
    let half = BigRational::new(1.into(), 2.into());
    let even = in_k_even.compose_linear(&half, &BigRational::zero());
    let odd = in_k_odd.compose_linear(&half, &-half.clone());

    let fact: BigInt = (1..n as u64).map(BigInt::from).product();
    let leading_coefficient = BigRational::new(BigInt::one(), BigInt::from(2) * fact);
    let mut mono = vec![BigRational::zero(); n];
    mono[n - 1] = leading_coefficient.clone();
    let mono = RationalPolynomial::new(mono);
    let remainder_even = &even - &mono;
    let remainder_odd = &odd - &mono;
    for (r, parity) in [(&remainder_even, "even"), (&remainder_odd, "odd")] {
        if r.degree().is_some_and(|deg| deg > n - 2) {
            return Err(BoundsError::DegreeViolation { n, parity });
        }
    }
    Ok(PolynomialBound { n, leading_coefficient, even, odd, remainder_even, remainder_odd })
}

/// One instance of comparing the linked-bound quotient at `d` and at `d_m`
/// for `k = n - m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientComparison {
    pub k: u32,
    pub d_m: u32,
    pub d: u32,
    /// `2^{(k+1)(d-k)} / (2^{d-k} - 1) <= 2^{(k+1)(d_m-k)} / (2^{d_m-k} - 1)`.
    pub holds: bool,
}

fn linked_quotient(k: u32, d: u32) -> BigRational {
    BigRational::new(BigInt::one() << ((k + 1) * (d - k)) as usize, (BigInt::one() << (d - k) as usize) - 1)
}

/// Every `0 <= k < d_m <= d <= max_d`.
pub fn linked_quotient_comparisons(max_d: u32) -> Vec<QuotientComparison> {
    let mut out = Vec::new();
    for d in 1..=max_d {
        for d_m in 1..=d {
            for k in 0..d_m {
                let holds = linked_quotient(k, d) <= linked_quotient(k, d_m);
                out.push(QuotientComparison { k, d_m, d, holds });
            }
        }
    }
    out
}

/// One bound evaluated on a profile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundRow {
    pub id: String,
    pub anchor: String,
    /// Decimal value, absent when not applicable.
    pub value: Option<String>,
    pub applicable: bool,
    /// `value / exact` when the exact symbol length is known and nonzero.
    pub tightness: Option<String>,
    /// `value >= exact` when the exact symbol length is known.
    pub dominates: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub scheme: String,
    pub n: usize,
    pub rows: Vec<BoundRow>,
    pub exact_sl: Option<usize>,
}

impl BoundReport {
    pub fn violations(&self) -> Vec<&BoundRow> {
        self.rows.iter().filter(|r| r.dominates == Some(false)).collect()
    }

    pub fn row(&self, id: &str) -> Option<&BoundRow> {
        self.rows.iter().find(|r| r.id == id)
    }
}

pub const ANCHOR_EXPONENTIAL: &str = "sl_n <= sum_m 2^((n-m)(d - m(2s+m+1)/2 - n)) with the nonreal / real p=2^s / real p>2^s tails";
pub const ANCHOR_LINKED_EXACT: &str = "sl_n <= sum_m floor(#{(n-m+1)-subspaces of G} / (2^(d-n+m) - 1)), 1 if n-m >= d_m - 1, 0 if nonreal and m > s";
pub const ANCHOR_LINKED_POWER: &str = "sl_n <= sum_m floor(2^((n-m+1)(d-n+m)) / (2^(d-n+m) - 1)), 1 if n-m >= d_m - 1, 0 if nonreal and m > s";
pub const ANCHOR_BINOMIAL: &str = "sl_n <= sum_{m <= min(s,n) or n} binom(d_m, n-m)";
pub const ANCHOR_PAIRED: &str = "sl_n <= sum_{m <= floor(min(s,n)/2) or floor(n/2)} binom(d_2m, n-2m-1)";
pub const ANCHOR_SPLIT: &str = "sl_n <= sum_m sum_r binom(floor(d_m/2), 2r) binom(floor((d_m+1)/2), n-m-1-2r)";
pub const ANCHOR_STRATA: &str = "sl_n <= sum_m |P_{n,m}| <= sum_m 2^((n-m)(d_m-n+m+1))";
pub const ANCHOR_PFISTER: &str = "sl_n <= |P_n F|";

/// All bounds on one profile, compared to `exact_sl` when given.
pub fn bound_report(
    scheme: &str,
    profile: &InvariantProfile,
    n: usize,
    strata: Option<&StrataCounts>,
    exact_sl: Option<usize>,
) -> BoundReport {
    let strata_sum: BigUint = (0..=n).map(|m| bound_strata_count(profile, n, m)).sum();
    let mut rows = vec![
        ("exponential", ANCHOR_EXPONENTIAL, Some(bound_sl_exponential(profile, n).value)),
        ("linked_exact", ANCHOR_LINKED_EXACT, Some(bound_sl_linked(profile, n, true).value)),
        ("linked_power", ANCHOR_LINKED_POWER, Some(bound_sl_linked(profile, n, false).value)),
        ("binomial", ANCHOR_BINOMIAL, Some(bound_sl_binomial(profile, n))),
        ("paired", ANCHOR_PAIRED, Some(bound_sl_paired(profile, n))),
        ("split_basis", ANCHOR_SPLIT, Some(bound_sl_split_basis(profile, n))),
        ("strata", ANCHOR_STRATA, Some(strata_sum)),
        ("pfister_classes", ANCHOR_PFISTER, strata.map(|s| BigUint::from(s.total))),
    ]
    .into_iter()
    .map(|(id, anchor, value)| {
        let applicable = value.is_some();
        let exact = exact_sl.map(BigUint::from);
        let dominates = match (&value, &exact) {
            (Some(v), Some(e)) => Some(v >= e),
            _ => None,
        };
        let tightness = match (&value, &exact) {
            (Some(v), Some(e)) if !e.is_zero() => {
                let r = BigRational::new(BigInt::from(v.clone()), BigInt::from(e.clone()));
                Some(r.to_string())
            }
            _ => None,
        };
        BoundRow {
            id: id.to_string(),
            anchor: anchor.to_string(),
            value: value.map(|v| v.to_string()),
            applicable,
            tightness,
            dominates,
        }
    })
    .collect::<Vec<_>>();
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    BoundReport { scheme: scheme.to_string(), n, rows, exact_sl }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_edges() {
        assert_eq!(binomial(4, 2), BigUint::from(6u32));
        assert_eq!(binomial(3, -1), BigUint::zero());
        assert_eq!(binomial(2, 3), BigUint::zero());
        assert_eq!(binomial(0, 0), BigUint::one());
    }

    #[test]
    fn dm_estimate_examples() {
        let e = bound_dm_estimate(20, 3, 1, false, PythagorasCase::PowerOfTwo).unwrap();
        assert_eq!(e.printed, BigInt::from(14));
        assert_eq!(e.case, DmCase::BelowS);
        let c = bound_dm_estimate(5, 1, 3, false, PythagorasCase::Above).unwrap();
        assert_eq!((c.case, c.printed.clone()), (DmCase::AboveNonreal, BigInt::zero()));
        let q3 = bound_dm_estimate(2, 1, 0, false, PythagorasCase::Above).unwrap();
        assert_eq!(q3.printed, BigInt::from(1));
        assert!(bound_dm_estimate(-1, 0, 0, true, PythagorasCase::PowerOfTwo).is_err());
    }

    #[test]
    fn polynomial_lemma_small_cases() {
        let p0 = poly_binom_sum(3, 2).unwrap();
        assert!(p0.edge_flagged);
        assert_eq!(p0.same, RationalPolynomial::from_ints(&[1]));
        let p2 = poly_binom_sum(5, 2).unwrap();
        assert_eq!(p2.same.degree(), Some(2));
        assert_eq!(p2.same.leading(), BigRational::one());
        let p3 = poly_binom_sum(6, 2).unwrap();
        assert_eq!(p3.shifted.degree(), Some(3));
        assert_eq!(p3.shifted.leading(), BigRational::new(2.into(), 3.into()));
    }

    #[test]
    fn polynomial_bound_for_two() {
        let b = bound_sl_polynomial(2).unwrap();
        assert_eq!(b.leading_coefficient, BigRational::new(1.into(), 2.into()));
        assert_eq!(b.remainder_even, RationalPolynomial::from_ints(&[1]));
        assert_eq!(b.remainder_odd, RationalPolynomial::constant(BigRational::new(3.into(), 2.into())));
        let b3 = bound_sl_polynomial(3).unwrap();
        assert_eq!(b3.remainder_even, RationalPolynomial::from_ints(&[1]));
        assert!(b3.remainder_odd.degree().unwrap_or(0) <= 1);
    }
}
