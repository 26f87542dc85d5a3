//! Tensor products of state spaces and the symmetric-subspace representation
//! of `V_A ⊗ Sym^n(V_B)`.
//!
//! An element of `V_A ⊗ Sym^n(V_B)` is stored by coefficients `c[i, α]`
//! where `α` runs over multisets of size `n`; the represented tensor is
//! `Σ c[i, α] e_i ⊗ S(α)` with `S(α)` the sum of the distinct orderings of
//! `α`. Equivalently `c[i, α]` is the full-tensor entry at any ordering of
//! `α`. A product functional `ℓ_1 ⊗ … ⊗ ℓ_n` pairs with `S(α)` to the
//! coefficient of `x^α` in `Π_k (ℓ_k · x)`, which is how constraint rows are
//! generated.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::config::Ctx;
use crate::error::{Error, Result};
use crate::geometry::{self, StateSpace};
use crate::hash::content_hash;
use crate::linalg::{self, dot};
use crate::solver::{LinearProgram, Sense};

#[derive(Debug, Clone)]
pub struct ProductSpace {
    pub a: StateSpace,
    pub b: StateSpace,
    max_vertices: OnceLock<Arc<Vec<Vec<f64>>>>,
}

pub fn max_tensor(a: &StateSpace, b: &StateSpace, ctx: &Ctx) -> Result<ProductSpace> {
    let dim = a.dim * b.dim;
    if dim > ctx.caps.dim {
        return Err(Error::DimensionOverflow { dim, cap: ctx.caps.dim });
    }
    Ok(ProductSpace {
        a: a.clone(),
        b: b.clone(),
        max_vertices: OnceLock::new(),
    })
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    key: String,
    vertices: Vec<Vec<f64>>,
}

impl ProductSpace {
    pub fn dim(&self) -> usize {
        self.a.dim * self.b.dim
    }

    pub fn facets(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.a.facets.len() * self.b.facets.len());
        for f in &self.a.facets {
            for g in &self.b.facets {
                out.push(linalg::kron_vec(f, g));
            }
        }
        out
    }

    pub fn unit(&self) -> Vec<f64> {
        linalg::kron_vec(&self.a.unit, &self.b.unit)
    }

    /// Product vertices `v_a ⊗ v_b`, generating the minimal tensor product.
    pub fn sep_generators(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(self.a.vertices.len() * self.b.vertices.len());
        for va in &self.a.vertices {
            for vb in &self.b.vertices {
                out.push(linalg::kron_vec(va, vb));
            }
        }
        out
    }

    fn cache_key(&self) -> String {
        content_hash(&(&self.a.facets, &self.a.unit, &self.b.facets, &self.b.unit))
    }

    /// Vertices of the maximal tensor product, computed once per instance and
    /// optionally cached on disk under `ctx.cache_dir`.
    pub fn max_vertices(&self, ctx: &Ctx) -> Result<Arc<Vec<Vec<f64>>>> {
        if let Some(v) = self.max_vertices.get() {
            return Ok(v.clone());
        }
        let key = self.cache_key();
        let cached = ctx.cache_dir.as_deref().and_then(|dir| read_cache(dir, &key));
        let verts = match cached {
            Some(v) => v,
            None => {
                let mut v = geometry::vertices_of(&self.facets(), &self.unit(), ctx)?;
                v.sort_by(|x, y| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal));
                if let Some(dir) = ctx.cache_dir.as_deref() {
                    write_cache(dir, &key, &v)?;
                }
                v
            }
        };
        Ok(self.max_vertices.get_or_init(|| Arc::new(verts)).clone())
    }

    /// The maximal tensor product as a stand-alone state space.
    pub fn as_state_space(&self, ctx: &Ctx) -> Result<StateSpace> {
        Ok(StateSpace {
            label: format!("{}(x){}", self.a.label, self.b.label),
            dim: self.dim(),
            vertices: self.max_vertices(ctx)?.as_ref().clone(),
            facets: self.facets(),
            unit: self.unit(),
        })
    }

    pub fn product(&self, xa: &[f64], xb: &[f64]) -> Vec<f64> {
        linalg::kron_vec(xa, xb)
    }

    /// Contracts the B factor with a covector.
    pub fn contract_b(&self, x: &[f64], g: &[f64]) -> Vec<f64> {
        (0..self.a.dim).map(|i| dot(&x[i * self.b.dim..(i + 1) * self.b.dim], g)).collect()
    }

    /// Contracts the A factor with a covector.
    pub fn contract_a(&self, x: &[f64], f: &[f64]) -> Vec<f64> {
        let db = self.b.dim;
        (0..db).map(|k| (0..self.a.dim).map(|i| f[i] * x[i * db + k]).sum()).collect()
    }

    pub fn marginal_a(&self, x: &[f64]) -> Vec<f64> {
        self.contract_b(x, &self.b.unit)
    }

    pub fn marginal_b(&self, x: &[f64]) -> Vec<f64> {
        self.contract_a(x, &self.a.unit)
    }
}

fn cache_path(dir: &Path, key: &str) -> std::path::PathBuf {
    dir.join(format!("maxvert-{key}.json"))
}

fn read_cache(dir: &Path, key: &str) -> Option<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(cache_path(dir, key)).ok()?;
    let file: CacheFile = serde_json::from_str(&text).ok()?;
    (file.key == key).then_some(file.vertices)
}

fn write_cache(dir: &Path, key: &str, vertices: &[Vec<f64>]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let file = CacheFile {
        key: key.to_string(),
        vertices: vertices.to_vec(),
    };
    let tmp = dir.join(format!(".maxvert-{key}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, serde_json::to_vec(&file)?)?;
    std::fs::rename(&tmp, cache_path(dir, key))?;
    Ok(())
}

/// `min_{s ∈ conv(sep)} ‖x − s‖` in the base norm of the maximal product.
pub fn separable_distance(p: &ProductSpace, x: &[f64], ctx: &Ctx) -> Result<f64> {
    let d = p.dim();
    if x.len() != d {
        return Err(Error::InvalidInput("state length differs from product dimension".into()));
    }
    let sep = p.sep_generators();
    let verts = p.max_vertices(ctx)?;
    let (ns, nv) = (sep.len(), verts.len());
    let nvar = ns + 2 * nv;
    let mut obj = vec![0.0; nvar];
    obj[ns..].iter_mut().for_each(|c| *c = 1.0);
    let mut lp = LinearProgram::new("separable-distance", Sense::Min, obj);
    for r in 0..d {
        let mut row = vec![0.0; nvar];
        for (k, s) in sep.iter().enumerate() {
            row[k] = s[r];
        }
        for (j, v) in verts.iter().enumerate() {
            row[ns + j] = v[r];
            row[ns + nv + j] = -v[r];
        }
        lp.add_eq(row, x[r]);
    }
    let mut row = vec![0.0; nvar];
    row[..ns].iter_mut().for_each(|c| *c = 1.0);
    lp.add_eq(row, 1.0);
    lp.set_nonnegative(0..nvar);
    Ok(ctx.lp(&lp)?.objective.max(0.0))
}

/// Multisets of size `n` over `d` symbols, in colex order.
#[derive(Debug, Clone, PartialEq)]
pub struct SymBasis {
    pub d: usize,
    pub n: usize,
    /// Each multiset as a nondecreasing tuple.
    pub multisets: Vec<Vec<usize>>,
    /// Number of distinct orderings of each multiset.
    pub weights: Vec<f64>,
    index: HashMap<Vec<usize>, usize>,
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (n - i) as u128 / (i + 1) as u128;
    }
    r.min(usize::MAX as u128) as usize
}

pub fn sym_dimension(d: usize, n: usize) -> usize {
    if d == 0 {
        return usize::from(n == 0);
    }
    binomial(d + n - 1, n)
}

fn multinomial(ms: &[usize]) -> f64 {
    let mut counts = HashMap::new();
    for &s in ms {
        *counts.entry(s).or_insert(0usize) += 1;
    }
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    fact(ms.len()) / counts.values().map(|&c| fact(c)).product::<f64>()
}

impl SymBasis {
    pub fn len(&self) -> usize {
        self.multisets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multisets.is_empty()
    }

    pub fn index_of(&self, sorted: &[usize]) -> Option<usize> {
        self.index.get(sorted).copied()
    }
}

pub fn sym_index(d: usize, n: usize, cap: usize) -> Result<SymBasis> {
    let count = sym_dimension(d, n);
    if count > cap {
        return Err(Error::DimensionOverflow { dim: count, cap });
    }
    let mut multisets = Vec::with_capacity(count);
    let mut cur = vec![0usize; n];
    if n == 0 {
        multisets.push(Vec::new());
    } else if d > 0 {
        loop {
            multisets.push(cur.clone());
            // Next nondecreasing tuple in lexicographic order.
            let mut i = n;
            while i > 0 && cur[i - 1] == d - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            let v = cur[i - 1] + 1;
            for x in cur[i - 1..].iter_mut() {
                *x = v;
            }
        }
    }
    multisets.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    let weights = multisets.iter().map(|m| multinomial(m)).collect();
    let index = multisets.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    Ok(SymBasis {
        d,
        n,
        multisets,
        weights,
        index,
    })
}

/// Pairing of `g_{β_1} ⊗ … ⊗ g_{β_n}` with `S(α)` by enumerating the
/// distinct orderings of `α`. `gmat` holds the functionals as rows.
pub fn eval_sym_functional(g_multiset: &[usize], e_multiset: &[usize], gmat: &[Vec<f64>], cap_n: usize) -> Result<f64> {
    let n = g_multiset.len();
    if e_multiset.len() != n {
        return Err(Error::InvalidInput("multisets of different sizes".into()));
    }
    if n > cap_n {
        return Err(Error::DimensionOverflow { dim: n, cap: cap_n });
    }
    let mut t: Vec<usize> = e_multiset.to_vec();
    t.sort_unstable();
    let mut total = 0.0;
    loop {
        total += g_multiset.iter().zip(&t).map(|(&j, &k)| gmat[j][k]).product::<f64>();
        if !next_permutation(&mut t) {
            break;
        }
    }
    Ok(total)
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// Symmetric bases of every degree `0..=n` over `d` symbols, with the maps
/// `α ↦ α + {j}` between consecutive degrees.
#[derive(Debug, Clone)]
pub struct SymSpace {
    pub d: usize,
    pub n: usize,
    bases: Vec<SymBasis>,
    /// `up[k][a * d + j]`: index in degree `k+1` of multiset `a` (degree `k`) plus `j`.
    up: Vec<Vec<usize>>,
}

impl SymSpace {
    pub fn new(d: usize, n: usize, cap: usize) -> Result<Self> {
        let bases: Vec<SymBasis> = (0..=n).map(|k| sym_index(d, k, cap)).collect::<Result<_>>()?;
        let mut up = Vec::with_capacity(n);
        for k in 0..n {
            let mut table = vec![0usize; bases[k].len() * d];
            for (a, ms) in bases[k].multisets.iter().enumerate() {
                for j in 0..d {
                    let mut m = ms.clone();
                    let pos = m.partition_point(|&x| x <= j);
                    m.insert(pos, j);
                    table[a * d + j] = bases[k + 1].index_of(&m).expect("multiset present");
                }
            }
            up.push(table);
        }
        Ok(SymSpace { d, n, bases, up })
    }

    pub fn basis(&self, k: usize) -> &SymBasis {
        &self.bases[k]
    }

    pub fn up(&self, k: usize, a: usize, j: usize) -> usize {
        self.up[k][a * self.d + j]
    }

    /// Coefficients of `x^α`, `α` of degree `rows.len()`, in `Π_k (rows_k · x)`.
    pub fn product_functional(&self, rows: &[&[f64]]) -> Vec<f64> {
        let mut poly = vec![1.0];
        for (k, r) in rows.iter().enumerate() {
            let mut next = vec![0.0; self.bases[k + 1].len()];
            for (a, &c) in poly.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                for (j, &rj) in r.iter().enumerate() {
                    if rj != 0.0 {
                        next[self.up(k, a, j)] += c * rj;
                    }
                }
            }
            poly = next;
        }
        poly
    }

    /// Applies `l` (rows map `V_B → W`) to one symmetric factor.
    /// The new left index is `i * W + w`.
    pub fn apply_on_first_factor(&self, l: &[Vec<f64>], y: &SymExtension) -> Result<SymExtension> {
        if y.n == 0 {
            return Err(Error::InvalidInput("no factor left to contract".into()));
        }
        if l.iter().any(|r| r.len() != self.d) || y.d_b != self.d {
            return Err(Error::InvalidInput("map does not act on V_B".into()));
        }
        let w = l.len();
        let k = y.n - 1;
        let nb = self.bases[k].len();
        let nb_in = self.bases[y.n].len();
        let mut out = vec![0.0; y.d_left * w * nb];
        for i in 0..y.d_left {
            let src = &y.coeffs[i * nb_in..(i + 1) * nb_in];
            for (wi, row) in l.iter().enumerate() {
                let dst = &mut out[(i * w + wi) * nb..(i * w + wi + 1) * nb];
                for (g, slot) in dst.iter_mut().enumerate() {
                    let mut s = 0.0;
                    for (j, &lj) in row.iter().enumerate() {
                        if lj != 0.0 {
                            s += lj * src[self.up(k, g, j)];
                        }
                    }
                    *slot = s;
                }
            }
        }
        Ok(SymExtension {
            d_left: y.d_left * w,
            d_b: y.d_b,
            n: k,
            coeffs: out,
        })
    }

    pub fn contract_covector(&self, u: &[f64], y: &SymExtension) -> Result<SymExtension> {
        self.apply_on_first_factor(&[u.to_vec()], y)
    }

    /// Applies `u` to `n − keep` factors.
    pub fn partial_unit(&self, y: &SymExtension, u: &[f64], keep: usize) -> Result<SymExtension> {
        if keep > y.n {
            return Err(Error::InvalidInput(format!("keep {keep} exceeds n = {}", y.n)));
        }
        let mut z = y.clone();
        while z.n > keep {
            z = self.contract_covector(u, &z)?;
        }
        Ok(z)
    }
}

/// Coefficients of an element of `V_left ⊗ Sym^n(V_B)`, laid out as
/// `coeffs[i * C(d_b+n-1, n) + α]` with `α` in colex order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymExtension {
    pub d_left: usize,
    pub d_b: usize,
    pub n: usize,
    pub coeffs: Vec<f64>,
}

impl SymExtension {
    /// `x_A ⊗ x_B^{⊗n}`.
    pub fn product(space: &SymSpace, xa: &[f64], xb: &[f64], n: usize) -> SymExtension {
        let basis = space.basis(n);
        let mut coeffs = Vec::with_capacity(xa.len() * basis.len());
        for &a in xa {
            for ms in &basis.multisets {
                coeffs.push(a * ms.iter().map(|&k| xb[k]).product::<f64>());
            }
        }
        SymExtension {
            d_left: xa.len(),
            d_b: xb.len(),
            n,
            coeffs,
        }
    }

    /// Degree-0 tensors are plain vectors on the left factor; degree 1 gives
    /// the row-major `d_left × d_b` matrix.
    pub fn as_vector(&self) -> &[f64] {
        &self.coeffs
    }
}

/// Free-function form of [`SymSpace::partial_unit`].
pub fn partial_unit(y: &SymExtension, unit_b: &[f64], keep: usize) -> Result<SymExtension> {
    SymSpace::new(y.d_b, y.n, usize::MAX)?.partial_unit(y, unit_b, keep)
}

/// Free-function form of [`SymSpace::apply_on_first_factor`].
pub fn apply_on_first_factor(l: &[Vec<f64>], y: &SymExtension) -> Result<SymExtension> {
    SymSpace::new(y.d_b, y.n, usize::MAX)?.apply_on_first_factor(l, y)
}

/// An affine map on the chart coordinates of a state space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    /// `q × (d − 1)`.
    pub matrix: Vec<Vec<f64>>,
    pub offset: Vec<f64>,
}

/// Homogeneous coordinates used as affine coordinates: all but the last
/// index where `|unit|` is largest.
pub fn chart(k: &StateSpace) -> Vec<usize> {
    let mut pivot = 0;
    for i in 0..k.dim {
        if k.unit[i].abs() >= k.unit[pivot].abs() {
            pivot = i;
        }
    }
    (0..k.dim).filter(|&i| i != pivot).collect()
}

/// Linear map on homogeneous coordinates agreeing with `map` on `K`.
pub fn from_affine(map: &AffineMap, k: &StateSpace) -> Result<Vec<Vec<f64>>> {
    let coords = chart(k);
    if map.matrix.len() != map.offset.len() || map.matrix.iter().any(|r| r.len() != coords.len()) {
        return Err(Error::InvalidInput("affine map shape does not match the chart".into()));
    }
    Ok(map
        .matrix
        .iter()
        .zip(&map.offset)
        .map(|(row, &c)| {
            let mut out = linalg::scale(c, &k.unit);
            for (ci, &j) in coords.iter().enumerate() {
                out[j] += row[ci];
            }
            out
        })
        .collect())
}

/// Homogeneous matrix of an affine map `K_in → K_out` given on chart coordinates.
pub fn channel_from_affine(map: &AffineMap, k_in: &StateSpace, k_out: &StateSpace) -> Result<Vec<Vec<f64>>> {
    let rows = from_affine(map, k_in)?;
    let coords = chart(k_out);
    if rows.len() != coords.len() {
        return Err(Error::InvalidInput("affine map output does not match the target chart".into()));
    }
    let pivot = (0..k_out.dim).find(|i| !coords.contains(i)).expect("chart omits one index");
    let mut out = vec![vec![0.0; k_in.dim]; k_out.dim];
    for (r, &j) in coords.iter().enumerate() {
        out[j] = rows[r].clone();
    }
    // unit_out(z') = unit_in(z) fixes the pivot row.
    let mut prow = k_in.unit.clone();
    for &j in &coords {
        linalg::axpy(-k_out.unit[j], &out[j], &mut prow);
    }
    out[pivot] = linalg::scale(1.0 / k_out.unit[pivot], &prow);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sym_index_examples() {
        assert_eq!(sym_index(3, 4, 1000).unwrap().len(), 15);
        let b = sym_index(2, 1, 1000).unwrap();
        assert_eq!(b.multisets, vec![vec![0], vec![1]]);
        let b = sym_index(2, 3, 1000).unwrap();
        assert_eq!(b.multisets, vec![vec![0, 0, 0], vec![0, 0, 1], vec![0, 1, 1], vec![1, 1, 1]]);
        assert_eq!(b.weights, vec![1.0, 3.0, 3.0, 1.0]);
        assert!(matches!(sym_index(4, 8, 10), Err(Error::DimensionOverflow { .. })));
    }

    #[test]
    fn eval_sym_examples() {
        let g = vec![vec![0.3, -1.2, 2.0], vec![0.7, 0.1, -0.4]];
        assert_abs_diff_eq!(eval_sym_functional(&[1], &[2], &g, 8).unwrap(), -0.4);
        assert_abs_diff_eq!(eval_sym_functional(&[0, 0], &[1, 1], &g, 8).unwrap(), 1.44, epsilon = 1e-15);
        let v = eval_sym_functional(&[0, 1], &[0, 2], &g, 8).unwrap();
        assert_abs_diff_eq!(v, 0.3 * -0.4 + 2.0 * 0.7, epsilon = 1e-15);
    }

    #[test]
    fn product_functional_matches_enumeration() {
        let sp = SymSpace::new(3, 4, 10_000).unwrap();
        let g = vec![vec![0.3, -1.2, 2.0], vec![0.7, 0.1, -0.4], vec![1.0, 0.5, 0.25]];
        let beta = [0usize, 1, 1, 2];
        let rows: Vec<&[f64]> = beta.iter().map(|&j| g[j].as_slice()).collect();
        let coeffs = sp.product_functional(&rows);
        for (a, ms) in sp.basis(4).multisets.iter().enumerate() {
            let e = eval_sym_functional(&beta, ms, &g, 8).unwrap();
            assert_abs_diff_eq!(coeffs[a], e, epsilon = 1e-12);
        }
    }

    #[test]
    fn partial_unit_of_product() {
        let sp = SymSpace::new(3, 3, 1000).unwrap();
        let xa = [1.0, 0.2, -0.3];
        let xb = [1.0, 0.5, 0.1];
        let y = SymExtension::product(&sp, &xa, &xb, 3);
        let u = [1.0, 0.0, 0.0];
        for keep in 0..=3 {
            let z = sp.partial_unit(&y, &u, keep).unwrap();
            let expect = SymExtension::product(&sp, &xa, &xb, keep);
            assert_abs_diff_eq!(z.coeffs.as_slice(), expect.coeffs.as_slice(), epsilon = 1e-14);
        }
    }

    #[test]
    fn affine_homogenization() {
        let sq = StateSpace::square();
        let id = AffineMap {
            matrix: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            offset: vec![0.0, 0.0],
        };
        let m = channel_from_affine(&id, &sq, &sq).unwrap();
        assert_eq!(m, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]]);
        let constant = AffineMap {
            matrix: vec![vec![0.0, 0.0]],
            offset: vec![0.7],
        };
        assert_eq!(from_affine(&constant, &sq).unwrap(), vec![vec![0.7, 0.0, 0.0]]);
        let d2 = StateSpace::simplex(2);
        let f = AffineMap {
            matrix: vec![vec![2.0]],
            offset: vec![-1.0],
        };
        let row = &from_affine(&f, &d2).unwrap()[0];
        assert_abs_diff_eq!(dot(row, &[1.0, 0.0]), 1.0);
        assert_abs_diff_eq!(dot(row, &[0.0, 1.0]), -1.0);
    }

    #[test]
    fn simplex_products_are_nuclear() {
        let ctx = Ctx::default();
        let p = max_tensor(&StateSpace::simplex(2), &StateSpace::simplex(2), &ctx).unwrap();
        assert_eq!(p.facets().len(), 4);
        assert_eq!(p.max_vertices(&ctx).unwrap().len(), 4);
        let p = max_tensor(&StateSpace::simplex(2), &StateSpace::square(), &ctx).unwrap();
        let v = p.max_vertices(&ctx).unwrap();
        let sep = p.sep_generators();
        assert_eq!(v.len(), sep.len());
        for x in v.iter() {
            assert!(sep.iter().any(|s| linalg::sub(s, x).iter().all(|e| e.abs() < 1e-9)));
        }
    }

    #[test]
    fn dimension_cap() {
        let ctx = Ctx::default();
        let big = StateSpace::simplex(9);
        assert!(matches!(max_tensor(&big, &big, &ctx), Err(Error::DimensionOverflow { dim: 81, .. })));
    }
}
