//! Extreme rays of a pointed polyhedral cone `{z : A z ≥ 0}` by the
//! double-description method with the combinatorial adjacency test.
//!
//! H→V (vertices from facets) and V→H (facets from vertices) both reduce to
//! this: the facets of `cone(V)` are the extreme rays of `{f : V f ≥ 0}`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Clone)]
struct Ray {
    v: Vec<f64>,
    /// Bitset of processed constraints that are tight at this ray.
    zero: Vec<u64>,
}

fn set_bit(bits: &mut [u64], i: usize) {
    bits[i / 64] |= 1u64 << (i % 64);
}

fn count(bits: &[u64]) -> usize {
    bits.iter().map(|w| w.count_ones() as usize).sum()
}

fn is_subset(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize_max(v: &mut [f64]) {
    let m = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if m > 0.0 {
        v.iter_mut().for_each(|x| *x /= m);
    }
}

/// Greedy selection of `d` linearly independent rows (partial pivoting).
fn independent_rows(rows: &[Vec<f64>], d: usize, tol: f64) -> Option<Vec<usize>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut chosen = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let mut v = r.clone();
        for b in &basis {
            let p = dot(&v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
        }
        let norm = dot(&v, &v).sqrt();
        if norm > tol {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
            chosen.push(i);
            if chosen.len() == d {
                return Some(chosen);
            }
        }
    }
    None
}

/// Extreme rays of `{z ∈ R^d : a_i · z ≥ 0}`, each scaled to max-norm one.
///
/// Fails with [`Error::Degenerate`] if the cone is not pointed and with
/// [`Error::EnumerationOverflow`] if the intermediate ray count passes `cap`.
pub fn extreme_rays(a: &[Vec<f64>], d: usize, tol: f64, cap: usize) -> Result<Vec<Vec<f64>>> {
    if a.iter().any(|r| r.len() != d) {
        return Err(Error::InvalidInput("constraint length differs from dimension".into()));
    }
    let rows: Vec<Vec<f64>> = a
        .iter()
        .map(|r| {
            let n = dot(r, r).sqrt();
            if n > 0.0 {
                r.iter().map(|x| x / n).collect()
            } else {
                r.clone()
            }
        })
        .collect();
    let m = rows.len();
    let words = m.div_ceil(64).max(1);
    let init = independent_rows(&rows, d, 1e-9)
        .ok_or_else(|| Error::Degenerate("constraint system does not define a pointed cone".into()))?;

    let basis_mat = DMatrix::from_fn(d, d, |i, j| rows[init[i]][j]);
    let inv = basis_mat
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("initial basis singular".into()))?;
    let mut rays: Vec<Ray> = (0..d)
        .map(|k| {
            let mut v: Vec<f64> = (0..d).map(|i| inv[(i, k)]).collect();
            normalize_max(&mut v);
            let mut zero = vec![0u64; words];
            for (j, &r) in init.iter().enumerate() {
                if j != k {
                    set_bit(&mut zero, r);
                }
            }
            Ray { v, zero }
        })
        .collect();

    let mut done = vec![false; m];
    for &r in &init {
        done[r] = true;
    }
    for i in 0..m {
        if done[i] {
            continue;
        }
        done[i] = true;
        let vals: Vec<f64> = rays.iter().map(|r| dot(&rows[i], &r.v)).collect();
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for (k, &val) in vals.iter().enumerate() {
            if val > tol {
                plus.push(k);
            } else if val < -tol {
                minus.push(k);
            } else {
                set_bit(&mut rays[k].zero, i);
            }
        }
        if minus.is_empty() {
            continue;
        }
        let mut fresh = Vec::new();
        for &p in &plus {
            for &q in &minus {
                let common: Vec<u64> = rays[p].zero.iter().zip(&rays[q].zero).map(|(x, y)| x & y).collect();
                if count(&common) + 2 < d {
                    continue;
                }
                let adjacent = rays
                    .iter()
                    .enumerate()
                    .all(|(k, r)| k == p || k == q || !is_subset(&common, &r.zero));
                if !adjacent {
                    continue;
                }
                let (vp, vq) = (vals[p], vals[q]);
                let mut v: Vec<f64> = rays[q].v.iter().zip(&rays[p].v).map(|(xq, xp)| vp * xq - vq * xp).collect();
                normalize_max(&mut v);
                let mut zero = common;
                set_bit(&mut zero, i);
                fresh.push(Ray { v, zero });
            }
        }
        let mut keep: Vec<Ray> = Vec::with_capacity(rays.len() + fresh.len());
        for (k, r) in rays.into_iter().enumerate() {
            if vals[k] >= -tol {
                keep.push(r);
            }
        }
        keep.extend(fresh);
        if keep.len() > cap {
            return Err(Error::EnumerationOverflow { count: keep.len(), cap });
        }
        rays = keep;
    }
    Ok(rays.into_iter().map(|r| r.v).collect())
}
