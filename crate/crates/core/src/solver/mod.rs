//! Linear programs and the backends that solve them.
//!
//! A [`LinearProgram`] is `min/max c·x` subject to equality rows, `≥` rows
//! and optional per-variable bounds; variables without a bound are free.
//! The bundled [`DenseSimplex`] solves either the primal or the dual in
//! standard form, whichever has fewer rows, and reports both primal and
//! dual vectors. [`ProcessBackend`] hands the JSON form of the program to an
//! external command and reads a [`Solution`] back.

mod simplex;

use std::io::Write;
use std::process::{Command, Stdio};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use simplex::{solve_std, StdForm, StdStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    Numerical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub name: String,
    pub sense: Sense,
    pub objective: Vec<f64>,
    #[serde(default)]
    pub eq_rows: Vec<Vec<f64>>,
    #[serde(default)]
    pub eq_rhs: Vec<f64>,
    /// Rows read as `row · x ≥ rhs`.
    #[serde(default)]
    pub ineq_rows: Vec<Vec<f64>>,
    #[serde(default)]
    pub ineq_rhs: Vec<f64>,
    /// Empty means every variable is free.
    #[serde(default)]
    pub lower: Vec<Option<f64>>,
    #[serde(default)]
    pub upper: Vec<Option<f64>>,
}

impl LinearProgram {
    pub fn new(name: impl Into<String>, sense: Sense, objective: Vec<f64>) -> Self {
        LinearProgram {
            name: name.into(),
            sense,
            objective,
            eq_rows: Vec::new(),
            eq_rhs: Vec::new(),
            ineq_rows: Vec::new(),
            ineq_rhs: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_eq(&mut self, row: Vec<f64>, rhs: f64) {
        debug_assert_eq!(row.len(), self.num_vars());
        self.eq_rows.push(row);
        self.eq_rhs.push(rhs);
    }

    pub fn add_ge(&mut self, row: Vec<f64>, rhs: f64) {
        debug_assert_eq!(row.len(), self.num_vars());
        self.ineq_rows.push(row);
        self.ineq_rhs.push(rhs);
    }

    pub fn add_le(&mut self, row: Vec<f64>, rhs: f64) {
        self.add_ge(row.into_iter().map(|v| -v).collect(), -rhs);
    }

    pub fn set_lower(&mut self, j: usize, value: f64) {
        if self.lower.is_empty() {
            self.lower = vec![None; self.num_vars()];
        }
        self.lower[j] = Some(value);
    }

    pub fn set_upper(&mut self, j: usize, value: f64) {
        if self.upper.is_empty() {
            self.upper = vec![None; self.num_vars()];
        }
        self.upper[j] = Some(value);
    }

    pub fn set_nonnegative(&mut self, range: std::ops::Range<usize>) {
        for j in range {
            self.set_lower(j, 0.0);
        }
    }

    fn lower_of(&self, j: usize) -> Option<f64> {
        self.lower.get(j).copied().flatten()
    }

    fn upper_of(&self, j: usize) -> Option<f64> {
        self.upper.get(j).copied().flatten()
    }

    fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        let bad_row = |rows: &[Vec<f64>]| rows.iter().any(|r| r.len() != n);
        if bad_row(&self.eq_rows) || bad_row(&self.ineq_rows) {
            return Err(Error::InvalidInput(format!("{}: row length differs from {n}", self.name)));
        }
        if self.eq_rows.len() != self.eq_rhs.len() || self.ineq_rows.len() != self.ineq_rhs.len() {
            return Err(Error::InvalidInput(format!("{}: rhs length mismatch", self.name)));
        }
        if (!self.lower.is_empty() && self.lower.len() != n) || (!self.upper.is_empty() && self.upper.len() != n) {
            return Err(Error::InvalidInput(format!("{}: bound vector length mismatch", self.name)));
        }
        let finite = self.objective.iter().chain(self.eq_rhs.iter()).chain(self.ineq_rhs.iter()).all(|v| v.is_finite())
            && self.eq_rows.iter().chain(self.ineq_rows.iter()).flatten().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput(format!("{}: non-finite coefficient", self.name)));
        }
        Ok(())
    }

    /// Largest violation of equality rows, inequality rows and bounds at `x`.
    pub fn residuals(&self, x: &[f64]) -> (f64, f64, f64) {
        let dot = |r: &[f64]| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        let eq = self
            .eq_rows
            .iter()
            .zip(&self.eq_rhs)
            .map(|(r, b)| (dot(r) - b).abs())
            .fold(0.0, f64::max);
        let ineq = self
            .ineq_rows
            .iter()
            .zip(&self.ineq_rhs)
            .map(|(r, b)| (b - dot(r)).max(0.0))
            .fold(0.0, f64::max);
        let mut bound = 0.0f64;
        for (j, &xj) in x.iter().enumerate() {
            if let Some(l) = self.lower_of(j) {
                bound = bound.max(l - xj);
            }
            if let Some(u) = self.upper_of(j) {
                bound = bound.max(xj - u);
            }
        }
        (eq, ineq, bound)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: Status,
    pub x: Vec<f64>,
    /// Objective value in the program's own sense.
    pub objective: f64,
    /// Multipliers of the minimization form: `c_min = A_eqᵀu + A_inᵀv + bound terms`, `v ≥ 0`.
    pub eq_duals: Vec<f64>,
    pub ineq_duals: Vec<f64>,
    pub eq_residual: f64,
    pub ineq_violation: f64,
    pub bound_violation: f64,
    pub iterations: usize,
}

impl Solution {
    fn failed(status: Status, lp: &LinearProgram, iterations: usize) -> Self {
        Solution {
            status,
            x: vec![0.0; lp.num_vars()],
            objective: 0.0,
            eq_duals: vec![0.0; lp.eq_rows.len()],
            ineq_duals: vec![0.0; lp.ineq_rows.len()],
            eq_residual: 0.0,
            ineq_violation: 0.0,
            bound_violation: 0.0,
            iterations,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    pub fn max_violation(&self) -> f64 {
        self.eq_residual.max(self.ineq_violation).max(self.bound_violation)
    }
}

/// Anything that can solve a [`LinearProgram`].
pub trait LpBackend: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, lp: &LinearProgram) -> Result<Solution>;
}

/// Solves an LP and turns a non-optimal status into an error.
pub fn solve_optimal(backend: &dyn LpBackend, lp: &LinearProgram) -> Result<Solution> {
    let sol = backend.solve(lp)?;
    if sol.status != Status::Optimal {
        return Err(Error::Solver {
            name: lp.name.clone(),
            status: sol.status,
        });
    }
    Ok(sol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Auto,
    Primal,
    Dual,
}

/// The bundled dense simplex solver.
#[derive(Debug, Clone)]
pub struct DenseSimplex {
    pub tol: f64,
    pub route: Route,
    pub max_iterations: Option<usize>,
}

impl Default for DenseSimplex {
    fn default() -> Self {
        DenseSimplex {
            tol: 1e-9,
            route: Route::Auto,
            max_iterations: None,
        }
    }
}

impl DenseSimplex {
    pub fn with_route(route: Route) -> Self {
        DenseSimplex {
            route,
            ..Default::default()
        }
    }
}

/// Min-form data with upper bounds folded into the `≥` block.
struct Normalized {
    n: usize,
    c: Vec<f64>,
    eq: Vec<Vec<f64>>,
    beq: Vec<f64>,
    ge: Vec<Vec<f64>>,
    bge: Vec<f64>,
    lower: Vec<Option<f64>>,
    /// Number of `≥` rows that came from the original program.
    ge_orig: usize,
}

fn normalize(lp: &LinearProgram) -> Normalized {
    let n = lp.num_vars();
    let c: Vec<f64> = match lp.sense {
        Sense::Min => lp.objective.clone(),
        Sense::Max => lp.objective.iter().map(|v| -v).collect(),
    };
    let mut ge = lp.ineq_rows.clone();
    let mut bge = lp.ineq_rhs.clone();
    for j in 0..n {
        if let Some(u) = lp.upper_of(j) {
            let mut row = vec![0.0; n];
            row[j] = -1.0;
            ge.push(row);
            bge.push(-u);
        }
    }
    Normalized {
        n,
        c,
        eq: lp.eq_rows.clone(),
        beq: lp.eq_rhs.clone(),
        ge,
        bge,
        lower: (0..n).map(|j| lp.lower_of(j)).collect(),
        ge_orig: lp.ineq_rows.len(),
    }
}

struct RouteResult {
    status: StdStatus,
    x: Vec<f64>,
    u: Vec<f64>,
    v: Vec<f64>,
    iterations: usize,
}

fn primal_route(p: &Normalized, tol: f64, max_iter: usize) -> RouteResult {
    // Column layout: one column per bounded variable, two per free variable, then slacks.
    let mut col_of = Vec::with_capacity(p.n);
    let mut ncols = 0;
    for j in 0..p.n {
        col_of.push(ncols);
        ncols += if p.lower[j].is_some() { 1 } else { 2 };
    }
    let nslack = p.ge.len();
    let total = ncols + nslack;
    let m = p.eq.len() + p.ge.len();
    let mut a = vec![0.0; m * total];
    let mut b = Vec::with_capacity(m);
    let shift: Vec<f64> = p.lower.iter().map(|l| l.unwrap_or(0.0)).collect();
    let push_row = |r: usize, row: &[f64], rhs: f64, a: &mut Vec<f64>, b: &mut Vec<f64>| {
        let mut rhs = rhs;
        for j in 0..p.n {
            let v = row[j];
            if v == 0.0 {
                continue;
            }
            rhs -= v * shift[j];
            a[r * total + col_of[j]] = v;
            if p.lower[j].is_none() {
                a[r * total + col_of[j] + 1] = -v;
            }
        }
        b.push(rhs);
    };
    for (r, row) in p.eq.iter().enumerate() {
        push_row(r, row, p.beq[r], &mut a, &mut b);
    }
    for (k, row) in p.ge.iter().enumerate() {
        let r = p.eq.len() + k;
        push_row(r, row, p.bge[k], &mut a, &mut b);
        a[r * total + ncols + k] = -1.0;
    }
    let mut c = vec![0.0; total];
    for j in 0..p.n {
        c[col_of[j]] = p.c[j];
        if p.lower[j].is_none() {
            c[col_of[j] + 1] = -p.c[j];
        }
    }
    let sf = StdForm { m, n: total, a, b, c };
    let res = solve_std(&sf, tol, max_iter);
    let x = (0..p.n)
        .map(|j| {
            let base = res.x[col_of[j]];
            if p.lower[j].is_some() {
                base + shift[j]
            } else {
                base - res.x[col_of[j] + 1]
            }
        })
        .collect();
    RouteResult {
        status: res.status,
        x,
        u: res.y[..p.eq.len()].to_vec(),
        v: res.y[p.eq.len()..].to_vec(),
        iterations: res.iterations,
    }
}

fn dual_route(p: &Normalized, tol: f64, max_iter: usize) -> RouteResult {
    // Dual: max beq·u + bge·v + l·w  s.t.  Eqᵀu + Geᵀv + w = c,  v, w ≥ 0.
    let meq = p.eq.len();
    let mge = p.ge.len();
    let bounded: Vec<usize> = (0..p.n).filter(|&j| p.lower[j].is_some()).collect();
    let total = 2 * meq + mge + bounded.len();
    let m = p.n;
    let mut a = vec![0.0; m * total];
    let mut c = vec![0.0; total];
    for (k, row) in p.eq.iter().enumerate() {
        for j in 0..p.n {
            a[j * total + 2 * k] = row[j];
            a[j * total + 2 * k + 1] = -row[j];
        }
        c[2 * k] = -p.beq[k];
        c[2 * k + 1] = p.beq[k];
    }
    for (k, row) in p.ge.iter().enumerate() {
        let col = 2 * meq + k;
        for j in 0..p.n {
            a[j * total + col] = row[j];
        }
        c[col] = -p.bge[k];
    }
    for (k, &j) in bounded.iter().enumerate() {
        let col = 2 * meq + mge + k;
        a[j * total + col] = 1.0;
        c[col] = -p.lower[j].unwrap_or(0.0);
    }
    let sf = StdForm {
        m,
        n: total,
        a,
        b: p.c.clone(),
        c,
    };
    let res = solve_std(&sf, tol, max_iter);
    let status = match res.status {
        StdStatus::Optimal => StdStatus::Optimal,
        StdStatus::Unbounded => StdStatus::Infeasible,
        // Dual infeasible: primal is unbounded or infeasible; the caller decides.
        StdStatus::Infeasible => StdStatus::Unbounded,
        StdStatus::IterationLimit => StdStatus::IterationLimit,
    };
    RouteResult {
        status,
        x: res.y.iter().map(|v| -v).collect(),
        u: (0..meq).map(|k| res.x[2 * k] - res.x[2 * k + 1]).collect(),
        v: res.x[2 * meq..2 * meq + mge].to_vec(),
        iterations: res.iterations,
    }
}

impl LpBackend for DenseSimplex {
    fn name(&self) -> &str {
        "dense-simplex"
    }

    fn solve(&self, lp: &LinearProgram) -> Result<Solution> {
        lp.validate()?;
        let p = normalize(lp);
        let primal_rows = p.eq.len() + p.ge.len();
        let free = p.lower.iter().filter(|l| l.is_none()).count();
        let primal_cols = p.n + free + p.ge.len();
        let dual_rows = p.n;
        let dual_cols = 2 * p.eq.len() + p.ge.len() + (p.n - free);
        let route = match self.route {
            Route::Auto => {
                let cost = |r: usize, c: usize| (r as f64) * (r as f64) * ((r + c) as f64);
                if cost(dual_rows, dual_cols) < cost(primal_rows, primal_cols) {
                    Route::Dual
                } else {
                    Route::Primal
                }
            }
            r => r,
        };
        let max_iter = self.max_iterations.unwrap_or(200 * (primal_rows + dual_rows) + 10_000);
        let mut res = match route {
            Route::Dual => dual_route(&p, self.tol, max_iter),
            _ => primal_route(&p, self.tol, max_iter),
        };
        if route == Route::Dual && res.status == StdStatus::Unbounded {
            // Tell an unbounded primal apart from an infeasible one.
            res = primal_route(&p, self.tol, max_iter);
        }
        let status = match res.status {
            StdStatus::Optimal => Status::Optimal,
            StdStatus::Infeasible => Status::Infeasible,
            StdStatus::Unbounded => Status::Unbounded,
            StdStatus::IterationLimit => Status::Numerical,
        };
        if status != Status::Optimal {
            return Ok(Solution::failed(status, lp, res.iterations));
        }
        let obj_min: f64 = p.c.iter().zip(&res.x).map(|(a, b)| a * b).sum();
        let objective = match lp.sense {
            Sense::Min => obj_min,
            Sense::Max => -obj_min,
        };
        let (eq_residual, ineq_violation, bound_violation) = lp.residuals(&res.x);
        let mut v = res.v;
        v.truncate(p.ge_orig);
        Ok(Solution {
            status,
            x: res.x,
            objective,
            eq_duals: res.u,
            ineq_duals: v,
            eq_residual,
            ineq_violation,
            bound_violation,
            iterations: res.iterations,
        })
    }
}

/// Runs an external command: LP JSON on stdin, [`Solution`] JSON on stdout.
#[derive(Debug, Clone)]
pub struct ProcessBackend {
    pub program: String,
    pub args: Vec<String>,
}

impl ProcessBackend {
    /// Parses `"prog arg1 arg2"` (whitespace separated, no quoting).
    pub fn from_command_line(cmd: &str) -> Result<Self> {
        let mut parts = cmd.split_whitespace().map(str::to_string);
        let program = parts
            .next()
            .ok_or_else(|| Error::Backend("empty backend command".into()))?;
        Ok(ProcessBackend {
            program,
            args: parts.collect(),
        })
    }
}

impl LpBackend for ProcessBackend {
    fn name(&self) -> &str {
        &self.program
    }

    fn solve(&self, lp: &LinearProgram) -> Result<Solution> {
        let payload = serde_json::to_vec(lp)?;
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::Backend(format!("spawn {}: {e}", self.program)))?;
        child
            .stdin
            .take()
            .ok_or_else(|| Error::Backend("no stdin".into()))?
            .write_all(&payload)
            .map_err(|e| Error::Backend(format!("write: {e}")))?;
        let out = child
            .wait_with_output()
            .map_err(|e| Error::Backend(format!("wait: {e}")))?;
        if !out.status.success() {
            return Err(Error::Backend(format!(
                "{} exited with {}: {}",
                self.program,
                out.status,
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        let sol: Solution = serde_json::from_slice(&out.stdout)
            .map_err(|e| Error::Backend(format!("bad solution JSON: {e}")))?;
        if sol.x.len() != lp.num_vars() {
            return Err(Error::Backend("solution length mismatch".into()));
        }
        Ok(sol)
    }
}
