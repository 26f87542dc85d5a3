//! Two-phase tableau simplex for `min c·x, A x = b, x ≥ 0`.
//!
//! The data are equilibrated first. Degeneracy is broken by a small
//! deterministic perturbation of the basic values; ratio tests follow Harris
//! (two passes, largest pivot among near-ties). The tableau is rebuilt from
//! an LU factorization of the basis at intervals and whenever the
//! perturbation is removed; primal infeasibility left behind by removing it
//! is repaired with dual simplex pivots. Pricing is Dantzig, switching to
//! Bland after a long run of degenerate pivots.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum StdStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

pub(crate) struct StdForm {
    pub m: usize,
    pub n: usize,
    /// Row-major `m × n`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

pub(crate) struct StdResult {
    pub status: StdStatus,
    pub x: Vec<f64>,
    /// Multipliers of the equality rows; `c - Aᵀy ≥ 0` at optimality.
    pub y: Vec<f64>,
    pub iterations: usize,
}

const DEGENERATE_RUN: usize = 50;
const REINVERT_EVERY: usize = 100;
/// Primal feasibility tolerance in scaled units.
const FEAS_TOL: f64 = 1e-9;
const PIVOT_ABS: f64 = 1e-11;
const PIVOT_REL: f64 = 1e-7;

struct Tableau {
    m: usize,
    /// Columns: `n` structural, `m` artificial, then the right-hand side.
    w: usize,
    n: usize,
    t: Vec<f64>,
    basis: Vec<usize>,
    /// Sign-adjusted, scaled structural matrix (row-major `m × n`).
    a: Vec<f64>,
    /// Right-hand side the tableau currently represents.
    b_work: Vec<f64>,
    /// Cost of every column in the current phase.
    cost: Vec<f64>,
    bland: bool,
    degenerate_run: usize,
    iterations: usize,
    since_reinvert: usize,
    scratch: Vec<(usize, f64)>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.w + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.t[i * self.w + self.w - 1]
    }

    fn obj(&self, j: usize) -> f64 {
        self.t[self.m * self.w + j]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.w;
        let inv = 1.0 / self.t[r * w + c];
        self.scratch.clear();
        for j in 0..w {
            let v = self.t[r * w + j] * inv;
            self.t[r * w + j] = v;
            if v != 0.0 {
                self.scratch.push((j, v));
            }
        }
        self.t[r * w + c] = 1.0;
        for i in 0..=self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + c];
            if f == 0.0 {
                continue;
            }
            let row = &mut self.t[i * w..(i + 1) * w];
            for &(j, v) in &self.scratch {
                row[j] -= f * v;
            }
            row[c] = 0.0;
        }
        self.basis[r] = c;
        self.iterations += 1;
        self.since_reinvert += 1;
    }

    /// Column `j` of `[A | I]`.
    fn column(&self, j: usize) -> Vec<f64> {
        if j < self.n {
            (0..self.m).map(|i| self.a[i * self.n + j]).collect()
        } else {
            let mut e = vec![0.0; self.m];
            e[j - self.n] = 1.0;
            e
        }
    }

    /// Rebuilds every row from the original data and the current basis.
    fn reinvert(&mut self) -> bool {
        let (m, n, w) = (self.m, self.n, self.w);
        self.since_reinvert = 0;
        if m == 0 {
            self.refresh_objective();
            return true;
        }
        let mut bmat = DMatrix::zeros(m, m);
        for (k, &j) in self.basis.iter().enumerate() {
            for (i, v) in self.column(j).into_iter().enumerate() {
                bmat[(i, k)] = v;
            }
        }
        let lu = bmat.lu();
        let mut full = DMatrix::zeros(m, w);
        for i in 0..m {
            for j in 0..n {
                full[(i, j)] = self.a[i * n + j];
            }
            full[(i, n + i)] = 1.0;
            full[(i, w - 1)] = self.b_work[i];
        }
        let Some(sol) = lu.solve(&full) else {
            return false;
        };
        if sol.iter().any(|v| !v.is_finite()) {
            return false;
        }
        for i in 0..m {
            for j in 0..w {
                self.t[i * w + j] = sol[(i, j)];
            }
            self.t[i * w + self.basis[i]] = 1.0;
        }
        self.refresh_objective();
        true
    }

    /// Reduced costs and objective value for `self.cost`.
    fn refresh_objective(&mut self) {
        let (m, w) = (self.m, self.w);
        let obj = m * w;
        for j in 0..w - 1 {
            self.t[obj + j] = self.cost[j];
        }
        self.t[obj + w - 1] = 0.0;
        for i in 0..m {
            let cb = self.cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            for j in 0..w {
                let v = self.t[i * w + j];
                if v != 0.0 {
                    self.t[obj + j] -= cb * v;
                }
            }
        }
        for i in 0..m {
            self.t[obj + self.basis[i]] = 0.0;
        }
    }

    /// Moves the basic values to `values` by changing the represented `b`.
    fn set_basic_values(&mut self, values: &[f64]) {
        let w = self.w;
        for i in 0..self.m {
            let delta = values[i] - self.rhs(i);
            if delta == 0.0 {
                continue;
            }
            let col = self.column(self.basis[i]);
            for (k, v) in col.into_iter().enumerate() {
                self.b_work[k] += v * delta;
            }
            self.t[i * w + w - 1] = values[i];
        }
    }

    fn entering(&self, limit: usize, tol: f64, rejected: &[bool]) -> Option<usize> {
        if self.bland {
            return (0..limit).find(|&j| !rejected[j] && self.obj(j) < -tol);
        }
        let mut best = None;
        let mut best_val = -tol;
        for j in 0..limit {
            let d = self.obj(j);
            if d < best_val && !rejected[j] {
                best_val = d;
                best = Some(j);
            }
        }
        best
    }

    /// Harris two-pass ratio test.
    fn leaving(&self, c: usize) -> Option<usize> {
        let colmax = (0..self.m).map(|i| self.at(i, c).abs()).fold(0.0, f64::max);
        let piv_tol = PIVOT_ABS.max(PIVOT_REL * colmax);
        let mut theta = f64::INFINITY;
        for i in 0..self.m {
            let a = self.at(i, c);
            if a > piv_tol {
                theta = theta.min((self.rhs(i).max(0.0) + FEAS_TOL) / a);
            }
        }
        if !theta.is_finite() {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.m {
            let a = self.at(i, c);
            if a <= piv_tol || self.rhs(i).max(0.0) / a > theta {
                continue;
            }
            let better = match best {
                None => true,
                Some((bi, ba)) => {
                    if self.bland {
                        self.basis[i] < self.basis[bi]
                    } else {
                        a > ba
                    }
                }
            };
            if better {
                best = Some((i, a));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Primal pivots until optimal over columns `0..limit`.
    fn run(&mut self, limit: usize, tol: f64, max_iter: usize, phase_one: bool) -> StdStatus {
        let mut rejected = vec![false; limit];
        let mut any_rejected = false;
        self.bland = false;
        self.degenerate_run = 0;
        loop {
            if self.iterations >= max_iter {
                return StdStatus::IterationLimit;
            }
            if self.since_reinvert >= REINVERT_EVERY {
                self.reinvert();
            }
            let Some(c) = self.entering(limit, tol, &rejected) else {
                return StdStatus::Optimal;
            };
            let Some(r) = self.leaving(c) else {
                // Unbounded only if the column has no positive entry at all;
                // otherwise the reduced cost is noise.
                let top = (0..self.m).map(|i| self.at(i, c)).fold(f64::NEG_INFINITY, f64::max);
                if !phase_one && top <= PIVOT_ABS {
                    return StdStatus::Unbounded;
                }
                rejected[c] = true;
                any_rejected = true;
                continue;
            };
            if any_rejected {
                rejected.iter_mut().for_each(|v| *v = false);
                any_rejected = false;
            }
            let step = self.rhs(r).max(0.0) / self.at(r, c);
            if step <= 1e-12 {
                self.degenerate_run += 1;
                if self.degenerate_run > DEGENERATE_RUN {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
            }
            self.pivot(r, c);
        }
    }

    /// Dual simplex pivots restoring `rhs ≥ −FEAS_TOL` while keeping reduced
    /// costs nonnegative over columns `0..limit`.
    fn dual_cleanup(&mut self, limit: usize, max_iter: usize) -> bool {
        loop {
            if self.iterations >= max_iter {
                return false;
            }
            if self.since_reinvert >= REINVERT_EVERY {
                self.reinvert();
            }
            let mut r = None;
            let mut worst = -FEAS_TOL;
            for i in 0..self.m {
                if self.rhs(i) < worst {
                    worst = self.rhs(i);
                    r = Some(i);
                }
            }
            let Some(r) = r else {
                return true;
            };
            let rowmax = (0..limit).map(|j| self.at(r, j).abs()).fold(0.0, f64::max);
            let piv_tol = PIVOT_ABS.max(PIVOT_REL * rowmax);
            let mut best: Option<(usize, f64, f64)> = None;
            for j in 0..limit {
                let a = self.at(r, j);
                if a >= -piv_tol {
                    continue;
                }
                let ratio = self.obj(j).max(0.0) / -a;
                let better = match best {
                    None => true,
                    Some((_, br, ba)) => ratio < br - 1e-12 || (ratio <= br + 1e-12 && -a > ba),
                };
                if better {
                    best = Some((j, ratio, -a));
                }
            }
            let Some((c, _, _)) = best else {
                return false;
            };
            self.pivot(r, c);
        }
    }
}

/// Geometric-mean row and column scaling, rounded to powers of two.
fn equilibrate(sf: &StdForm) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = (sf.m, sf.n);
    let mut rs = vec![1.0; m];
    let mut cs = vec![1.0; n];
    for _ in 0..4 {
        for i in 0..m {
            if let Some(s) = geometric_scale((0..n).map(|j| (sf.a[i * n + j] * cs[j]).abs())) {
                rs[i] = s;
            }
        }
        for j in 0..n {
            if let Some(s) = geometric_scale((0..m).map(|i| (sf.a[i * n + j] * rs[i]).abs())) {
                cs[j] = s;
            }
        }
    }
    let p2 = |v: f64| 2f64.powi(v.log2().round() as i32);
    (rs.into_iter().map(p2).collect(), cs.into_iter().map(p2).collect())
}

/// `1/√(lo·hi)`, ignoring entries below `1e-10·hi` so rounding noise in the
/// data cannot drag the scale.
fn geometric_scale(values: impl Iterator<Item = f64> + Clone) -> Option<f64> {
    let hi = values.clone().fold(0.0f64, f64::max);
    if hi == 0.0 {
        return None;
    }
    let lo = values.filter(|&v| v >= 1e-10 * hi).fold(f64::INFINITY, f64::min);
    Some(1.0 / (lo * hi).sqrt())
}

/// Deterministic perturbation sizes in `[1, 2) · scale`.
fn perturbation(k: usize, scale: f64) -> Vec<f64> {
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    (0..k)
        .map(|_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            scale * (1.0 + u)
        })
        .collect()
}

const PERTURB: f64 = 1e-7;

pub(crate) fn solve_std(orig: &StdForm, tol: f64, max_iter: usize) -> StdResult {
    let (m, n) = (orig.m, orig.n);
    let (rs, cs) = equilibrate(orig);
    let mut sign = vec![1.0; m];
    let mut a = vec![0.0; m * n];
    let mut b = vec![0.0; m];
    for i in 0..m {
        let bi = orig.b[i] * rs[i];
        if bi < 0.0 {
            sign[i] = -1.0;
        }
        b[i] = sign[i] * bi;
        for j in 0..n {
            a[i * n + j] = sign[i] * orig.a[i * n + j] * rs[i] * cs[j];
        }
    }
    let c: Vec<f64> = orig.c.iter().zip(&cs).map(|(c, s)| c * s).collect();
    let w = n + m + 1;
    let mut cost = vec![0.0; w - 1];
    cost[n..].iter_mut().for_each(|v| *v = 1.0);
    let mut tab = Tableau {
        m,
        w,
        n,
        t: vec![0.0; (m + 1) * w],
        basis: (n..n + m).collect(),
        a,
        b_work: b.clone(),
        cost,
        bland: false,
        degenerate_run: 0,
        iterations: 0,
        since_reinvert: 0,
        scratch: Vec::with_capacity(w),
    };
    let bnorm: f64 = b.iter().sum();

    // Phase 1 on a perturbed right-hand side.
    let delta = perturbation(m, PERTURB);
    for i in 0..m {
        tab.b_work[i] = b[i] + delta[i] * (1.0 + b[i]);
    }
    tab.reinvert();
    let st = tab.run(n, tol, max_iter, true);
    if st == StdStatus::IterationLimit {
        return finish(orig, (&rs, &cs), &tab, &sign, st, &[]);
    }
    tab.b_work.copy_from_slice(&b);
    tab.reinvert();
    let infeas: f64 = (0..m).filter(|&i| tab.basis[i] >= n).map(|i| tab.rhs(i).max(0.0)).sum();
    if infeas > 1e-8 * (1.0 + bnorm) {
        return finish(orig, (&rs, &cs), &tab, &sign, StdStatus::Infeasible, &[]);
    }

    // Drive artificial variables out of the basis.
    let mut redundant = vec![false; m];
    for i in 0..m {
        if tab.basis[i] < n {
            continue;
        }
        let mut best = None;
        let mut best_abs = 1e-7;
        for j in 0..n {
            let v = tab.at(i, j).abs();
            if v > best_abs {
                best_abs = v;
                best = Some(j);
            }
        }
        match best {
            Some(j) => tab.pivot(i, j),
            None => redundant[i] = true,
        }
    }

    // Phase 2, again on perturbed basic values.
    tab.cost = c.iter().copied().chain(std::iter::repeat_n(0.0, m)).collect();
    tab.reinvert();
    let delta = perturbation(m, PERTURB);
    let values: Vec<f64> = (0..m)
        .map(|i| {
            let v = tab.rhs(i).max(0.0);
            if redundant[i] {
                v
            } else {
                v + delta[i] * (1.0 + v)
            }
        })
        .collect();
    tab.set_basic_values(&values);
    let cmax = c.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let mut st = tab.run(n, tol * cmax, max_iter, false);
    if st == StdStatus::Optimal {
        tab.b_work.copy_from_slice(&b);
        tab.reinvert();
        if !tab.dual_cleanup(n, max_iter) {
            st = StdStatus::IterationLimit;
        } else {
            // The cleanup may expose a negative reduced cost; finish unperturbed.
            st = tab.run(n, tol * cmax, max_iter, false);
            tab.reinvert();
        }
    }
    finish(orig, (&rs, &cs), &tab, &sign, st, &redundant)
}

fn finish(sf: &StdForm, (rs, cs): (&[f64], &[f64]), tab: &Tableau, sign: &[f64], status: StdStatus, redundant: &[bool]) -> StdResult {
    let (m, n) = (sf.m, sf.n);
    let mut x = vec![0.0; n];
    for i in 0..m {
        if tab.basis[i] < n {
            x[tab.basis[i]] = tab.rhs(i).max(0.0) * cs[tab.basis[i]];
        }
    }
    // Reduced cost of artificial column i is -y_i (signed, scaled rows).
    let mut y: Vec<f64> = (0..m).map(|i| -tab.obj(n + i) * sign[i] * rs[i]).collect();
    if status == StdStatus::Optimal {
        if let Some((xp, yp)) = polish(sf, tab, redundant) {
            x = xp;
            y = yp;
        }
    }
    StdResult {
        status,
        x,
        y,
        iterations: tab.iterations,
    }
}

fn polish(sf: &StdForm, tab: &Tableau, redundant: &[bool]) -> Option<(Vec<f64>, Vec<f64>)> {
    let (m, n) = (sf.m, sf.n);
    let rows: Vec<usize> = (0..m).filter(|&i| !redundant.get(i).copied().unwrap_or(false)).collect();
    let cols: Vec<usize> = rows.iter().map(|&i| tab.basis[i]).collect();
    if cols.iter().any(|&j| j >= n) {
        return None;
    }
    let k = rows.len();
    if k == 0 {
        return Some((vec![0.0; n], vec![0.0; m]));
    }
    let bmat = DMatrix::from_fn(k, k, |r, c| sf.a[rows[r] * n + cols[c]]);
    let lu = bmat.clone().lu();
    let rhs = DVector::from_iterator(k, rows.iter().map(|&i| sf.b[i]));
    let xb = lu.solve(&rhs)?;
    let cb = DVector::from_iterator(k, cols.iter().map(|&j| sf.c[j]));
    let yb = bmat.transpose().lu().solve(&cb)?;
    let scale = 1.0 + rhs.amax();
    if xb.iter().any(|v| !v.is_finite() || *v < -1e-7 * scale) || yb.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut x = vec![0.0; n];
    for (r, &j) in cols.iter().enumerate() {
        x[j] = xb[r].max(0.0);
    }
    let mut y = vec![0.0; m];
    for (r, &i) in rows.iter().enumerate() {
        y[i] = yb[r];
    }
    Some((x, y))
}
