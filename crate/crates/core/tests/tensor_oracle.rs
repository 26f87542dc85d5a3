use approx::assert_abs_diff_eq;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use conic_definetti::geometry::{ic_measurement, injectivity_constant};
use conic_definetti::tensor::{max_tensor, separable_distance, sym_dimension, SymExtension, SymSpace};
use conic_definetti::{Ctx, StateSpace};

/// Full-tensor entry `T[i, k_1..k_n]` read from symmetric coefficients.
fn full_entry(space: &SymSpace, y: &SymExtension, i: usize, tuple: &[usize]) -> f64 {
    let mut sorted = tuple.to_vec();
    sorted.sort_unstable();
    let basis = space.basis(tuple.len());
    y.coeffs[i * basis.len() + basis.index_of(&sorted).unwrap()]
}

fn tuples(n: usize, d: usize) -> Vec<Vec<usize>> {
    (0..d.pow(n as u32))
        .map(|mut c| {
            let mut t = vec![0; n];
            for s in t.iter_mut() {
                *s = c % d;
                c /= d;
            }
            t
        })
        .collect()
}

fn shape() -> impl Strategy<Value = (usize, usize, usize, usize)> {
    (1usize..=3, 1usize..=4, 1usize..=4, 1usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn apply_on_first_factor_matches_full_tensor((dl, db, n, w) in shape(), seed in any::<u64>()) {
        let space = SymSpace::new(db, n, 100_000).unwrap();
        let len = dl * space.basis(n).len();
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let y = SymExtension { d_left: dl, d_b: db, n, coeffs: (0..len).map(|_| next()).collect() };
        let l: Vec<Vec<f64>> = (0..w).map(|_| (0..db).map(|_| next()).collect()).collect();
        let out = space.apply_on_first_factor(&l, &y).unwrap();
        prop_assert_eq!(out.d_left, dl * w);
        prop_assert_eq!(out.n, n - 1);
        let rest = space.basis(n - 1);
        for i in 0..dl {
            for (wi, row) in l.iter().enumerate() {
                for (g, alpha) in rest.multisets.iter().enumerate() {
                    let want: f64 = (0..db)
                        .map(|k| {
                            let mut t = vec![k];
                            t.extend(alpha);
                            row[k] * full_entry(&space, &y, i, &t)
                        })
                        .sum();
                    let got = out.coeffs[(i * w + wi) * rest.len() + g];
                    prop_assert!((got - want).abs() <= 1e-12, "{} vs {}", got, want);
                }
            }
        }
    }

    #[test]
    fn product_functional_pairs_like_full_tensor((_, db, n, _) in shape(), seed in any::<u64>()) {
        let space = SymSpace::new(db, n, 100_000).unwrap();
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let y = SymExtension { d_left: 1, d_b: db, n, coeffs: (0..space.basis(n).len()).map(|_| next()).collect() };
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..db).map(|_| next()).collect()).collect();
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        let pf = space.product_functional(&refs);
        let got: f64 = pf.iter().zip(&y.coeffs).map(|(a, b)| a * b).sum();
        let want: f64 = tuples(n, db)
            .iter()
            .map(|t| t.iter().zip(&rows).map(|(&k, r)| r[k]).product::<f64>() * full_entry(&space, &y, 0, t))
            .sum();
        prop_assert!((got - want).abs() <= 1e-10 * (1.0 + want.abs()));
    }

    #[test]
    fn partial_unit_of_products(xa in prop::collection::vec(-1.0f64..1.0, 1..4), xb in prop::collection::vec(-1.0f64..1.0, 1..4), n in 1usize..5, keep in 0usize..5) {
        let keep = keep.min(n);
        let space = SymSpace::new(xb.len(), n, 100_000).unwrap();
        let u: Vec<f64> = (0..xb.len()).map(|k| 0.5 + k as f64).collect();
        let ux: f64 = u.iter().zip(&xb).map(|(a, b)| a * b).sum();
        let y = SymExtension::product(&space, &xa, &xb, n);
        let got = space.partial_unit(&y, &u, keep).unwrap();
        let want = SymExtension::product(&space, &xa, &xb, keep);
        let scale = ux.powi((n - keep) as i32);
        for (g, w) in got.coeffs.iter().zip(&want.coeffs) {
            prop_assert!((g - scale * w).abs() <= 1e-12);
        }
    }

    #[test]
    fn basis_size_is_multiset_count(d in 1usize..6, n in 0usize..6) {
        let space = SymSpace::new(d, n, 1_000_000).unwrap();
        let distinct: std::collections::BTreeSet<Vec<usize>> = tuples(n, d)
            .into_iter()
            .map(|mut t| { t.sort_unstable(); t })
            .collect();
        prop_assert_eq!(space.basis(n).len(), distinct.len());
        prop_assert_eq!(sym_dimension(d, n), distinct.len());
    }
}

/// Vertices by brute force: every choice of `dim − 1` tight facets.
fn brute_force_vertices(facets: &[Vec<f64>], unit: &[f64]) -> Vec<Vec<f64>> {
    let d = unit.len();
    let m = facets.len();
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut choose = vec![0usize; d - 1];
    fn rec(start: usize, depth: usize, choose: &mut Vec<usize>, m: usize, f: &mut dyn FnMut(&[usize])) {
        if depth == choose.len() {
            f(choose);
            return;
        }
        for i in start..m {
            choose[depth] = i;
            rec(i + 1, depth + 1, choose, m, f);
        }
    }
    let mut visit = |idx: &[usize]| {
        let mut a = DMatrix::zeros(d, d);
        let mut b = DVector::zeros(d);
        for (r, &i) in idx.iter().enumerate() {
            for c in 0..d {
                a[(r, c)] = facets[i][c];
            }
        }
        for c in 0..d {
            a[(d - 1, c)] = unit[c];
        }
        b[d - 1] = 1.0;
        let Some(x) = a.lu().solve(&b) else { return };
        let x: Vec<f64> = x.iter().copied().collect();
        let feasible = facets.iter().all(|f| f.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() >= -1e-9);
        if feasible && !found.iter().any(|v| v.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-7)) {
            found.push(x);
        }
    };
    rec(0, 0, &mut choose, m, &mut visit);
    found
}

#[test]
fn square_square_vertex_count() {
    let ctx = Ctx::default();
    let sq = StateSpace::square();
    let p = max_tensor(&sq, &sq, &ctx).unwrap();
    let dd = p.max_vertices(&ctx).unwrap();
    let brute = brute_force_vertices(&p.facets(), &p.unit());
    assert_eq!(dd.len(), brute.len());
    assert_eq!(dd.len(), 24);
    for v in dd.iter() {
        assert!(brute.iter().any(|w| w.iter().zip(v).all(|(a, b)| (a - b).abs() < 1e-7)));
    }
}

#[test]
fn simplex_products_have_only_product_vertices() {
    let ctx = Ctx::default();
    let d2 = StateSpace::simplex(2);
    assert_eq!(max_tensor(&d2, &d2, &ctx).unwrap().max_vertices(&ctx).unwrap().len(), 4);
    let p = max_tensor(&d2, &StateSpace::square(), &ctx).unwrap();
    let verts = p.max_vertices(&ctx).unwrap();
    assert_eq!(verts.len(), 8);
    let seps = p.sep_generators();
    for v in verts.iter() {
        assert!(seps.iter().any(|s| s.iter().zip(v).all(|(a, b)| (a - b).abs() < 1e-9)));
    }
}

#[test]
fn pr_box_separable_distance() {
    let ctx = Ctx::default();
    let sq = StateSpace::square();
    let p = max_tensor(&sq, &sq, &ctx).unwrap();
    let pr = vec![1.0, 0.0, 0.0, 0.0, -1.0, -1.0, 0.0, -1.0, 1.0];
    assert!(p.max_vertices(&ctx).unwrap().iter().any(|v| v.iter().zip(&pr).all(|(a, b)| (a - b).abs() < 1e-9)));
    // Frozen regression value.
    assert_abs_diff_eq!(separable_distance(&p, &pr, &ctx).unwrap(), 0.5, epsilon = 1e-9);
    let seps = p.sep_generators();
    assert_abs_diff_eq!(separable_distance(&p, &seps[5], &ctx).unwrap(), 0.0, epsilon = 1e-9);
    let mut mix = vec![0.0; p.dim()];
    for s in &seps {
        for (m, v) in mix.iter_mut().zip(s) {
            *m += v / seps.len() as f64;
        }
    }
    assert_abs_diff_eq!(separable_distance(&p, &mix, &ctx).unwrap(), 0.0, epsilon = 1e-9);
}

#[test]
fn square_injectivity_constant() {
    let ctx = Ctx::default();
    let sq = StateSpace::square();
    let p = max_tensor(&sq, &sq, &ctx).unwrap();
    let m = ic_measurement(&sq, &ctx).unwrap();
    let f = injectivity_constant(&p, &m, &m, &ctx).unwrap();
    let mat = DMatrix::from_fn(3, 3, |r, c| m.effects[r][c]);
    let smin = mat.singular_values().min();
    assert_abs_diff_eq!(f.sigma_min, smin * smin, epsilon = 1e-12);
    // Frozen regression value.
    assert_abs_diff_eq!(f.value, 1.0 / 144.0, epsilon = 1e-12);
    let again = injectivity_constant(&p, &m, &m, &ctx).unwrap();
    assert_eq!(f.value.to_bits(), again.value.to_bits());
}
