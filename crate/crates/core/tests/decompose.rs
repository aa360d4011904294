use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symlen_core::bounds::bound_sl_binomial;
use symlen_core::builders::{build_scheme, catalog};
use symlen_core::decompose::{
    build_basis_chain, certify, expand_slot, merge_linked, rewrite_to_basis, DecomposeError, LinkageIndex,
    PfisterEntry, PfisterSum, RewriteOptions,
};
use symlen_core::milnor::kn_space;
use symlen_core::scheme::{Class, PfisterForm, Scheme, DEFAULT_STRATA_CAP};

fn entry(slots: &[u32]) -> PfisterEntry {
    PfisterEntry::new(slots.iter().map(|&c| Class(c)).collect())
}

fn sum(s: &Scheme, n: usize, entries: &[&[u32]]) -> PfisterSum {
    PfisterSum::new(n, s.dim(), entries.iter().map(|e| entry(e)).collect()).unwrap()
}

#[test]
fn basis_chain_examples() {
    let rigid = build_scheme("laurent(laurent(laurent(QC)))").unwrap();
    let c = build_basis_chain(&rigid, &rigid.invariants().unwrap()).unwrap();
    assert!(c.markers(0).is_empty());
    assert_eq!(c.basis, vec![Class(1), Class(2), Class(4)]);

    let rc = build_scheme("RC").unwrap();
    let c = build_basis_chain(&rc, &rc.invariants().unwrap()).unwrap();
    assert_eq!(c.markers(0), &[rc.minus_one()]);
    assert_eq!(c.basis, vec![rc.minus_one()]);
    assert!(c.free(0).is_empty());

    let q3 = build_scheme("laurent(F2)").unwrap();
    let p = q3.invariants().unwrap();
    let c = build_basis_chain(&q3, &p).unwrap();
    assert_eq!(c.markers(0), &[q3.minus_one()]);
    // the uniformizer is the top coordinate
    assert_eq!(c.free(1).len(), 1);
    assert_eq!(c.free(1)[0].0 >> 1, 1);
    assert!(c.free(2).is_empty());
}

#[test]
fn chains_on_catalog_schemes() {
    for e in catalog(4) {
        let s = e.build().unwrap();
        let p = s.invariants().unwrap();
        let c = build_basis_chain(&s, &p).unwrap();
        assert_eq!(c.basis.len(), s.dim());
        for m in 0..=p.stable_index() {
            let span: Vec<u32> = c.markers(m).iter().map(|x| x.0).collect();
            let sub = symlen_core::f2space::Subspace::from_words(&span, s.dim());
            assert_eq!(sub.dim(), c.markers(m).len(), "{e}");
            assert_eq!(1usize << sub.dim(), p.pm_d2m(m).len(), "{e}, m = {m}");
            assert!(p.pm_d2m(m).iter().all(|x| sub.contains_word(x.0)), "{e}");
            assert_eq!(c.free(m).len(), p.d_m(m), "{e}");
        }
    }
}

#[test]
fn expand_slot_examples() {
    let s = build_scheme("laurent(laurent(laurent(QC)))").unwrap();
    let c = build_basis_chain(&s, &s.invariants().unwrap()).unwrap();
    let a = kn_space(&s, 2).unwrap();
    let e = entry(&[0b011, 0b100]);
    let pos = e.slots.iter().position(|&x| x == Class(3)).unwrap();
    let x = expand_slot(&c, &e, pos).unwrap();
    assert_eq!(x.first, entry(&[1, 4]));
    assert_eq!(x.second, entry(&[2, 4]));
    assert_eq!(x.correction.stratum, 1);
    let img = |e: &PfisterEntry| a.symbol_image(&e.form()).unwrap();
    assert_eq!(img(&e), img(&x.first) + img(&x.second) + img(&x.correction));
    assert!(matches!(expand_slot(&c, &x.first, 0), Err(DecomposeError::NotFactorable { .. })));
}

#[test]
fn expansion_preserves_residue_with_nontrivial_minus_one() {
    // -1 ≠ 1 here, so the correction term carries a nonzero symbol
    let s = build_scheme("laurent(laurent(RC))").unwrap();
    let c = build_basis_chain(&s, &s.invariants().unwrap()).unwrap();
    let a = kn_space(&s, 2).unwrap();
    let img = |e: &PfisterEntry| a.symbol_image(&e.form()).unwrap();
    let mut saw_nonzero_correction = false;
    for x in 0..s.order() as u32 {
        for y in 0..s.order() as u32 {
            let e = entry(&[x, y]);
            for pos in 0..2 {
                if let Ok(parts) = expand_slot(&c, &e, pos) {
                    assert_eq!(img(&e), img(&parts.first) + img(&parts.second) + img(&parts.correction));
                    saw_nonzero_correction |= !img(&parts.correction).is_zero();
                }
            }
        }
    }
    assert!(saw_nonzero_correction);
}

#[test]
fn rewrite_examples() {
    let s = build_scheme("laurent(laurent(laurent(QC)))").unwrap();
    let p = s.invariants().unwrap();
    let c = build_basis_chain(&s, &p).unwrap();
    let input = sum(&s, 2, &[&[0b011, 0b100]]);
    let out = rewrite_to_basis(&s, &c, &input, RewriteOptions::default(), Some(&kn_space(&s, 2).unwrap())).unwrap();
    assert_eq!(out.entries, vec![entry(&[1, 4]), entry(&[2, 4])]);

    let rc = build_scheme("laurent(laurent(RC))").unwrap();
    let p = rc.invariants().unwrap();
    let c = build_basis_chain(&rc, &p).unwrap();
    let input = sum(&rc, 2, &[&[0, 0]]);
    let out = rewrite_to_basis(&rc, &c, &input, RewriteOptions::default(), None).unwrap();
    assert_eq!(out.entries, vec![entry(&[0, 0])]);
    assert_eq!(out.entries[0].stratum, 2);
}

#[test]
fn parse_forms() {
    let s = build_scheme("laurent(laurent(laurent(QC)))").unwrap();
    let f = PfisterSum::parse("110,001;010,001", 3).unwrap();
    assert_eq!(f.entries, vec![entry(&[6, 1]), entry(&[2, 1])]);
    assert_eq!(f.format_slots()[0], vec!["001", "110"]);
    assert!(PfisterSum::parse("11,001", 3).is_err());
    assert!(PfisterSum::parse("110;010,001", 3).is_err());
    assert!(PfisterSum::parse("", s.dim()).is_err());
}

fn random_sum(rng: &mut ChaCha8Rng, s: &Scheme, n: usize) -> PfisterSum {
    let len = rng.gen_range(1..=5);
    let entries = (0..len)
        .map(|_| PfisterEntry::new((0..n).map(|_| Class(rng.gen_range(0..s.order() as u32))).collect()))
        .collect();
    PfisterSum::new(n, s.dim(), entries).unwrap()
}

// Whether π and σ are both <<x>>ρ, <<y>>ρ for one (n-1)-fold ρ, by search over
// all slot tuples and isometry of the expansions.
fn linked(s: &Scheme, a: &PfisterForm, b: &PfisterForm) -> bool {
    let n = a.degree();
    let o = s.order() as u32;
    let tuples: Vec<Vec<Class>> = (0..o.pow(n as u32 - 1))
        .map(|mut k| {
            (0..n - 1)
                .map(|_| {
                    let c = k % o;
                    k /= o;
                    Class(c)
                })
                .collect()
        })
        .collect();
    let divides = |rho: &Vec<Class>, p: &PfisterForm| {
        (0..o).any(|x| {
            let mut slots = rho.clone();
            slots.push(Class(x));
            s.isometric(&PfisterForm::new(slots).expansion(), &p.expansion())
        })
    };
    tuples.iter().any(|rho| divides(rho, a) && divides(rho, b))
}

#[test]
fn random_sums_are_certified_and_merged() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let schemes: Vec<Scheme> = catalog(3).iter().map(|e| e.build().unwrap()).collect();
    for round in 0..60 {
        let s = &schemes[round % schemes.len()];
        let n = 2 + round % 2;
        let p = s.invariants().unwrap();
        let chain = build_basis_chain(s, &p).unwrap();
        let a = kn_space(s, n).unwrap();
        let input = random_sum(&mut rng, s, n);
        let out = rewrite_to_basis(s, &chain, &input, RewriteOptions::default(), Some(&a)).unwrap();
        let cert = certify(&p, &a, &input, &out).unwrap();
        assert!(cert.pass, "{}: {input:?} -> {out:?}", s.name());
        assert!(num_bigint::BigUint::from(out.len()) <= bound_sl_binomial(&p, n));
        for e in &out.entries {
            let non_one = &e.slots[e.stratum..];
            assert!(non_one.iter().all(|x| chain.free(e.stratum).contains(x)), "{e:?}");
            assert!(non_one.windows(2).all(|w| w[0] != w[1]));
            if !s.pfister_isotropic(&e.form()) {
                assert!(s.pfister_ones_rank(&e.form()).unwrap().0 >= e.stratum);
            }
        }

        let index = LinkageIndex::build(s, n, DEFAULT_STRATA_CAP).unwrap();
        let merged = merge_linked(s, &index, &out);
        assert!(certify(&p, &a, &input, &merged).unwrap().pass);
        assert!(merged.len() <= out.len());
        assert!(index.linked_pairs(&merged).is_empty());
        for (i, x) in merged.entries.iter().enumerate() {
            assert!(!s.pfister_isotropic(&x.form()));
            for y in &merged.entries[i + 1..] {
                assert!(!linked(s, &x.form(), &y.form()), "{}: {x:?} {y:?}", s.name());
            }
        }
    }
}

#[test]
fn merge_examples() {
    let s = build_scheme("laurent(laurent(laurent(QC)))").unwrap();
    let p = s.invariants().unwrap();
    let a = kn_space(&s, 2).unwrap();
    let index = LinkageIndex::build(&s, 2, DEFAULT_STRATA_CAP).unwrap();
    let input = sum(&s, 2, &[&[1, 2], &[1, 4]]);
    let merged = merge_linked(&s, &index, &input);
    assert_eq!(merged.len(), 1);
    assert_eq!(a.symbol_image(&merged.entries[0].form()).unwrap(), a.symbol_image(&PfisterForm::new(vec![Class(1), Class(6)])).unwrap());
    assert!(certify(&p, &a, &input, &merged).unwrap().pass);

    let r4 = build_scheme("laurent(laurent(laurent(laurent(QC))))").unwrap();
    let index = LinkageIndex::build(&r4, 2, DEFAULT_STRATA_CAP).unwrap();
    let input = sum(&r4, 2, &[&[1, 2], &[4, 8]]);
    assert_eq!(merge_linked(&r4, &index, &input).entries, input.entries);
}

#[test]
fn cross_stratum_merge() {
    let s = build_scheme("laurent(laurent(RC))").unwrap();
    let p = s.invariants().unwrap();
    let a = kn_space(&s, 2).unwrap();
    let index = LinkageIndex::build(&s, 2, DEFAULT_STRATA_CAP).unwrap();
    // <<1,t1>> and <<t2,t1>> share <<t1>>
    let input = sum(&s, 2, &[&[0, 0b010], &[0b100, 0b010]]);
    assert_ne!(input.entries[0].stratum, input.entries[1].stratum);
    assert!(input.entries.iter().all(|e| !s.pfister_isotropic(&e.form())));
    let merged = merge_linked(&s, &index, &input);
    assert_eq!(merged.len(), 1);
    let cert = certify(&p, &a, &input, &merged).unwrap();
    assert!(cert.pass);
}

#[test]
fn corrupted_output_fails() {
    let s = build_scheme("laurent(laurent(laurent(QC)))").unwrap();
    let p = s.invariants().unwrap();
    let chain = build_basis_chain(&s, &p).unwrap();
    let a = kn_space(&s, 2).unwrap();
    let input = sum(&s, 2, &[&[3, 4], &[1, 6]]);
    let out = rewrite_to_basis(&s, &chain, &input, RewriteOptions::default(), None).unwrap();
    assert!(certify(&p, &a, &input, &out).unwrap().pass);
    let mut failures = 0;
    for i in 0..out.len() {
        for bit in 0..s.dim() {
            let mut bad = out.clone();
            bad.entries[i].slots[1] = Class(bad.entries[i].slots[1].0 ^ 1 << bit);
            let cert = certify(&p, &a, &input, &bad).unwrap();
            assert_eq!(cert.pass, cert.residue_diff == 0);
            failures += usize::from(!cert.pass);
        }
    }
    assert!(failures > 0);
}
