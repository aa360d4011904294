use symlen_core::builders::{build_scheme, catalog};
use symlen_core::milnor::{kn_space, SymbolVector, DEFAULT_BFS_CAP};
use symlen_core::scheme::{Class, PfisterCatalog, PfisterForm, Scheme, DEFAULT_STRATA_CAP};

fn pf(e: &[u32]) -> PfisterForm {
    PfisterForm::new(e.iter().map(|&x| Class(x)).collect())
}

// Plain Gaussian elimination over Vec<bool> rows.
fn rank(mut rows: Vec<Vec<bool>>) -> usize {
    let width = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..width {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c]) else { continue };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && rows[i][c] {
                let pivot = rows[r].clone();
                for (a, b) in rows[i].iter_mut().zip(pivot) {
                    *a ^= b;
                }
            }
        }
        r += 1;
    }
    r
}

// dim k_n from every pure tensor x_1⊗...⊗x_n with an adjacent pair
// (x, y) satisfying y ∈ D<1,-x>, written out coordinate by coordinate.
fn kn_dim_oracle(s: &Scheme, n: usize) -> usize {
    let d = s.dim();
    let width = d.pow(n as u32);
    let tuples: Vec<Vec<u32>> = (0..(s.order() as u64).pow(n as u32))
        .map(|mut k| {
            (0..n)
                .map(|_| {
                    let c = (k % s.order() as u64) as u32;
                    k /= s.order() as u64;
                    c
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::new();
    for t in tuples {
        let related = (0..n.saturating_sub(1))
            .any(|i| s.d1(Class(t[i]) * s.minus_one()).contains(Class(t[i + 1])));
        if !related {
            continue;
        }
        let mut row = vec![false; width];
        for idx in 0..width {
            let mut rem = idx;
            let mut on = true;
            for pos in (0..n).rev() {
                on &= t[pos] >> (rem % d) & 1 == 1;
                rem /= d;
            }
            row[idx] = on;
        }
        rows.push(row);
    }
    width - rank(rows)
}

#[test]
fn kn_dimensions_match_rank_oracle() {
    for e in catalog(3) {
        let s = e.build().unwrap();
        for n in 1..=3 {
            if s.order().pow(n as u32) > 4096 {
                continue;
            }
            let a = kn_space(&s, n).unwrap();
            assert_eq!(a.dim(), kn_dim_oracle(&s, n), "{e}, n = {n}");
        }
    }
}

#[test]
fn kn_examples() {
    let rigid3 = build_scheme("laurent(laurent(laurent(QC)))").unwrap();
    assert_eq!(kn_space(&rigid3, 2).unwrap().dim(), 3);
    let rc = build_scheme("RC").unwrap();
    for n in 1..=5 {
        assert_eq!(kn_space(&rc, n).unwrap().dim(), 1);
    }
    let q3 = build_scheme("laurent(F2)").unwrap();
    assert_eq!(kn_space(&q3, 2).unwrap().dim(), 1);
    assert_eq!(kn_space(&q3, 3).unwrap().dim(), 0);
    let q2 = build_scheme("Q2").unwrap();
    assert_eq!(kn_space(&q2, 2).unwrap().dim(), 1);
}

#[test]
fn images_are_isometry_invariants_and_detect_hyperbolicity() {
    for e in catalog(3) {
        let s = e.build().unwrap();
        for n in 2..=3 {
            let a = kn_space(&s, n).unwrap();
            let cat = PfisterCatalog::build(&s, n, DEFAULT_STRATA_CAP).unwrap();
            for class in cat.classes() {
                let images: Vec<SymbolVector> = class
                    .members
                    .iter()
                    .map(|t| a.symbol_image(&PfisterForm::new(t.clone())).unwrap())
                    .collect();
                assert!(images.windows(2).all(|w| w[0] == w[1]), "{e}: class {}", class.id);
                if class.hyperbolic {
                    assert!(images[0].is_zero(), "{e}");
                } else if n == 2 {
                    assert!(!images[0].is_zero(), "{e}: anisotropic 2-fold form with zero image");
                }
            }
            assert!(a.pure_symbols().len() as u64 <= cat.strata().anisotropic());
        }
    }
}

#[test]
fn slot_order_and_product_moves_preserve_images() {
    for e in catalog(3) {
        let s = e.build().unwrap();
        let a = kn_space(&s, 2).unwrap();
        let o = s.order() as u32;
        for x in 0..o {
            for y in 0..o {
                let i = a.symbol_image(&pf(&[x, y])).unwrap();
                assert_eq!(i, a.symbol_image(&pf(&[y, x])).unwrap(), "{e}");
                assert_eq!(i, a.symbol_image(&pf(&[x, x ^ y])).unwrap(), "{e}");
                assert_eq!(
                    a.image_of_labels(&[Class(x), Class(y)]),
                    a.image_of_labels(&[Class(y), Class(x)]),
                    "{e}"
                );
            }
        }
        let minus = s.minus_one().0;
        for x in 0..o {
            assert!(a.symbol_image(&pf(&[x, x ^ minus])).unwrap().is_zero() || x ^ minus == x);
        }
    }
}

// Lift of x ∈ Λ²: the alternating matrix T + T^t of a tensor representative.
fn alternating_rank(a: &symlen_core::milnor::SymbolAlgebra, d: usize, x: SymbolVector) -> usize {
    let mut m = vec![vec![false; d]; d];
    for (k, idx) in a.basis().iter().enumerate() {
        if x.0 >> k & 1 == 1 {
            m[idx[0]][idx[1]] ^= true;
            m[idx[1]][idx[0]] ^= true;
        }
    }
    rank(m)
}

#[test]
fn rigid_symbol_length_is_half_the_alternating_rank() {
    let mut text = "QC".to_string();
    for k in 1..=5 {
        text = format!("laurent({text})");
        let s = build_scheme(&text).unwrap();
        let a = kn_space(&s, 2).unwrap();
        assert_eq!(a.dim(), k * (k - 1) / 2);
        for x in 0..1u64 << a.dim() {
            let x = SymbolVector(x);
            assert_eq!(a.sl_element(x), alternating_rank(&a, k, x) / 2, "k = {k}, x = {x:?}");
        }
        let (sl, w) = a.sl_field(DEFAULT_BFS_CAP).unwrap();
        assert_eq!(sl, k / 2);
        assert_eq!(a.sl_element(w), sl);
    }
}

#[test]
fn rigid_four_example() {
    let s = build_scheme("laurent(laurent(laurent(laurent(QC))))").unwrap();
    let a = kn_space(&s, 2).unwrap();
    // e1∧e2 + e3∧e4 with labels = slots here since -1 = 1
    let x = a.image_of_labels(&[Class(1), Class(2)]) + a.image_of_labels(&[Class(4), Class(8)]);
    assert_eq!(a.sl_element(x), 2);
    assert_eq!(a.sl_element(SymbolVector(0)), 0);
    for &p in a.pure_symbols() {
        assert_eq!(a.sl_element(p), 1);
    }
    let parts = a.decompose(x);
    assert_eq!(parts.len(), 2);
    let sum = parts.iter().fold(SymbolVector(0), |acc, t| acc + a.image_of_labels(t));
    assert_eq!(sum, x);
}

#[test]
fn field_lengths() {
    let q3 = build_scheme("laurent(F2)").unwrap();
    assert_eq!(kn_space(&q3, 2).unwrap().sl_field(DEFAULT_BFS_CAP).unwrap().0, 1);
    let r3 = build_scheme("laurent(laurent(laurent(QC)))").unwrap();
    assert_eq!(kn_space(&r3, 2).unwrap().sl_field(DEFAULT_BFS_CAP).unwrap().0, 1);
}

// Minimal subset of pure symbols summing to x.
fn sl_brute(pure: &[SymbolVector], x: SymbolVector) -> usize {
    let mut best = usize::MAX;
    for mask in 0u32..1 << pure.len() {
        let sum = pure.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).fold(0, |acc, (_, p)| acc ^ p.0);
        if sum == x.0 {
            best = best.min(mask.count_ones() as usize);
        }
    }
    best
}

#[test]
fn bfs_layers_match_subset_search() {
    for e in catalog(3) {
        let s = e.build().unwrap();
        for n in 2..=3 {
            let a = kn_space(&s, n).unwrap();
            if a.pure_symbols().len() > 14 {
                continue;
            }
            for x in 0..1u64 << a.dim() {
                assert_eq!(a.sl_element(SymbolVector(x)), sl_brute(a.pure_symbols(), SymbolVector(x)), "{e}");
            }
            let sizes = a.layer_sizes(DEFAULT_BFS_CAP).unwrap();
            assert_eq!(sizes.iter().sum::<u64>(), 1 << a.dim());
            assert!(sizes.iter().all(|&k| k > 0));
            let (sl, _) = a.sl_field(DEFAULT_BFS_CAP).unwrap();
            assert_eq!(sl + 1, sizes.len());
            assert!(sl <= a.pure_symbols().len());
        }
    }
}

#[test]
fn caps_and_degree_checks() {
    let s = build_scheme("laurent(laurent(Q2))").unwrap();
    assert!(symlen_core::milnor::SymbolAlgebra::new(&s, 9, 1 << 16).is_err());
    let a = kn_space(&build_scheme("RC").unwrap(), 2).unwrap();
    assert!(a.symbol_image(&pf(&[0])).is_err());
    assert!(a.sl_field(1).is_err());
}
