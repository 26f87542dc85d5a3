//! Level-`n` outer relaxations of
//! `min P(x_A ⊗ x_B)` subject to `F_A x_A = 0`, `F_B x_B = 0`,
//! `G_A x_A ≥ 0`, `G_B x_B ≥ 0`, `x_A ∈ K_A`, `x_B ∈ K_B`.
//!
//! The level-`n` variable is a symmetric extension `y ∈ V_A ⊗ Sym^n(V_B)`
//! in the maximal tensor cone, with the local constraints lifted onto it.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::Ctx;
use crate::entropy::{self, DeFinettiConstants};
use crate::error::{Error, Result};
use crate::geometry::{self, StateSpace};
use crate::hash::content_hash;
use crate::linalg::{self, dot};
use crate::solver::{LinearProgram, Sense, Status};
use crate::tensor::{self, ProductSpace, SymExtension, SymSpace};

/// All maps act on homogeneous coordinates; `F` rows must vanish and `G`
/// rows must be nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalProblem {
    #[serde(rename = "A")]
    pub a: StateSpace,
    #[serde(rename = "B")]
    pub b: StateSpace,
    /// Covector on `V_A ⊗ V_B`, index `i * d_B + k`.
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    #[serde(rename = "F_A", default)]
    pub f_a: Vec<Vec<f64>>,
    #[serde(rename = "F_B", default)]
    pub f_b: Vec<Vec<f64>>,
    #[serde(rename = "G_A", default)]
    pub g_a: Vec<Vec<f64>>,
    #[serde(rename = "G_B", default)]
    pub g_b: Vec<Vec<f64>>,
}

impl LocalProblem {
    pub fn unconstrained(a: StateSpace, b: StateSpace, p: Vec<f64>) -> Self {
        LocalProblem {
            a,
            b,
            p,
            f_a: Vec::new(),
            f_b: Vec::new(),
            g_a: Vec::new(),
            g_b: Vec::new(),
        }
    }

    /// Parses a problem and validates both state spaces; missing vertex or
    /// facet lists are derived.
    pub fn from_json(text: &str, ctx: &Ctx) -> Result<Self> {
        let raw: serde_json::Value = serde_json::from_str(text)?;
        let space = |key: &str| -> Result<StateSpace> {
            let v = raw.get(key).ok_or_else(|| Error::InvalidInput(format!("missing '{key}'")))?;
            StateSpace::from_json(&v.to_string(), ctx)
        };
        let (a, b) = (space("A")?, space("B")?);
        let rows = |key: &str| -> Result<Vec<Vec<f64>>> {
            match raw.get(key) {
                None | Some(serde_json::Value::Null) => Ok(Vec::new()),
                Some(v) => Ok(serde_json::from_value(v.clone())?),
            }
        };
        let p: Vec<f64> = serde_json::from_value(raw.get("P").cloned().ok_or_else(|| Error::InvalidInput("missing 'P'".into()))?)?;
        let problem = LocalProblem {
            a,
            b,
            p,
            f_a: rows("F_A")?,
            f_b: rows("F_B")?,
            g_a: rows("G_A")?,
            g_b: rows("G_B")?,
        };
        problem.check()?;
        Ok(problem)
    }

    pub fn check(&self) -> Result<()> {
        let (da, db) = (self.a.dim, self.b.dim);
        if self.p.len() != da * db {
            return Err(Error::InvalidInput(format!("P has length {}, expected {}", self.p.len(), da * db)));
        }
        let bad = |rows: &[Vec<f64>], d: usize| rows.iter().any(|r| r.len() != d);
        if bad(&self.f_a, da) || bad(&self.g_a, da) {
            return Err(Error::InvalidInput("F_A/G_A rows must act on V_A".into()));
        }
        if bad(&self.f_b, db) || bad(&self.g_b, db) {
            return Err(Error::InvalidInput("F_B/G_B rows must act on V_B".into()));
        }
        if self.p.iter().chain(self.f_a.iter().chain(&self.f_b).chain(&self.g_a).chain(&self.g_b).flatten()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite problem data".into()));
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        content_hash(self)
    }

    /// `P(x_A ⊗ x_B)`.
    pub fn value(&self, xa: &[f64], xb: &[f64]) -> f64 {
        dot(&self.p, &linalg::kron_vec(xa, xb))
    }

    /// Largest violation of the local constraints and body membership at `(x_A, x_B)`.
    pub fn residual(&self, xa: &[f64], xb: &[f64]) -> f64 {
        let eq = |rows: &[Vec<f64>], x: &[f64]| rows.iter().map(|r| dot(r, x).abs()).fold(0.0, f64::max);
        let ge = |rows: &[Vec<f64>], x: &[f64]| rows.iter().map(|r| -dot(r, x)).fold(0.0, f64::max);
        self.a
            .membership_violation(xa)
            .max(self.b.membership_violation(xb))
            .max(eq(&self.f_a, xa))
            .max(eq(&self.f_b, xb))
            .max(ge(&self.g_a, xa))
            .max(ge(&self.g_b, xb))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCounts {
    pub variables: usize,
    pub positivity_rows: usize,
    pub eq_rows: usize,
    pub ineq_rows: usize,
}

#[derive(Debug, Clone)]
pub struct LevelProgram {
    pub n: usize,
    pub lp: LinearProgram,
    pub space: SymSpace,
    pub counts: LevelCounts,
}

fn facet_multiset_functionals(space: &SymSpace, facets: &[Vec<f64>], prefix: &[&[f64]], k: usize, ctx: &Ctx) -> Result<Vec<Vec<f64>>> {
    let sets = tensor::sym_index(facets.len(), k, ctx.caps.enumeration)?;
    Ok(sets
        .multisets
        .iter()
        .map(|ms| {
            let mut rows: Vec<&[f64]> = prefix.to_vec();
            rows.extend(ms.iter().map(|&j| facets[j].as_slice()));
            space.product_functional(&rows)
        })
        .collect())
}

fn is_zero(row: &[f64]) -> bool {
    row.iter().all(|&v| v == 0.0)
}

/// Assembles the level-`n` LP; variables are the coefficients of `y`.
pub fn build_level(problem: &LocalProblem, n: usize, ctx: &Ctx) -> Result<LevelProgram> {
    if n == 0 {
        return Err(Error::InvalidInput("level must be at least 1".into()));
    }
    problem.check()?;
    let (da, db) = (problem.a.dim, problem.b.dim);
    let space = SymSpace::new(db, n, ctx.caps.enumeration)?;
    let nb = space.basis(n).len();
    let nvar = da * nb;
    if nvar > ctx.caps.enumeration {
        return Err(Error::DimensionOverflow { dim: nvar, cap: ctx.caps.enumeration });
    }
    let u_b = problem.b.unit.as_slice();
    let kron = |left: &[f64], right: &[f64]| linalg::kron_vec(left, right);

    let mut objective = vec![0.0; nvar];
    for i in 0..da {
        let p_i = &problem.p[i * db..(i + 1) * db];
        let mut rows: Vec<&[f64]> = vec![p_i];
        rows.extend(std::iter::repeat_n(u_b, n - 1));
        let poly = space.product_functional(&rows);
        objective[i * nb..(i + 1) * nb].copy_from_slice(&poly);
    }
    let mut lp = LinearProgram::new(format!("level-{n}"), Sense::Min, objective);

    let b_multisets = facet_multiset_functionals(&space, &problem.b.facets, &[], n, ctx)?;
    for f in &problem.a.facets {
        for g in &b_multisets {
            lp.add_ge(kron(f, g), 0.0);
        }
    }
    let positivity_rows = lp.ineq_rows.len();

    let unit_poly = space.product_functional(&vec![u_b; n]);
    lp.add_eq(kron(&problem.a.unit, &unit_poly), 1.0);

    // (F_A ⊗ id)(y) = 0 coefficient by coefficient.
    for r in &problem.f_a {
        for alpha in 0..nb {
            let mut row = vec![0.0; nvar];
            for i in 0..da {
                row[i * nb + alpha] = r[i];
            }
            if !is_zero(&row) {
                lp.add_eq(row, 0.0);
            }
        }
    }
    // (id ⊗ F_B ⊗ id)(y) = 0 on the first B factor.
    let lower = space.basis(n - 1).len();
    for w in &problem.f_b {
        for i in 0..da {
            for gamma in 0..lower {
                let mut row = vec![0.0; nvar];
                for (j, &wj) in w.iter().enumerate() {
                    row[i * nb + space.up(n - 1, gamma, j)] += wj;
                }
                if !is_zero(&row) {
                    lp.add_eq(row, 0.0);
                }
            }
        }
    }
    for r in &problem.g_a {
        for g in &b_multisets {
            lp.add_ge(kron(r, g), 0.0);
        }
    }
    if !problem.g_b.is_empty() {
        for w in &problem.g_b {
            let rest = facet_multiset_functionals(&space, &problem.b.facets, &[w.as_slice()], n - 1, ctx)?;
            for f in &problem.a.facets {
                for g in &rest {
                    lp.add_ge(kron(f, g), 0.0);
                }
            }
        }
    }
    let counts = LevelCounts {
        variables: nvar,
        positivity_rows,
        eq_rows: lp.eq_rows.len(),
        ineq_rows: lp.ineq_rows.len(),
    };
    Ok(LevelProgram { n, lp, space, counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    /// Maximum over the enumerated vertices of the maximal product.
    Vertices,
    /// Two LPs over the facet description of the maximal product.
    FacetLp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub counts: LevelCounts,
    pub iterations: usize,
    pub max_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterReport {
    pub problem_hash: String,
    pub level: usize,
    pub p_n: f64,
    pub y_opt: SymExtension,
    pub x_ab: Vec<f64>,
    pub error_bound: f64,
    pub p_norm: f64,
    pub p_norm_method: NormMethod,
    pub constants: DeFinettiConstants,
    pub stats: SolverStats,
}

/// Data shared by every level of one problem.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub problem: LocalProblem,
    pub product: ProductSpace,
    pub constants: DeFinettiConstants,
    pub p_norm: f64,
    pub p_norm_method: NormMethod,
    pub hash: String,
}

impl Prepared {
    pub fn new(problem: &LocalProblem, ctx: &Ctx) -> Result<Self> {
        problem.check()?;
        let product = tensor::max_tensor(&problem.a, &problem.b, ctx)?;
        let m_a = geometry::ic_measurement(&problem.a, ctx)?;
        let m_b = geometry::ic_measurement(&problem.b, ctx)?;
        let constants = entropy::definetti_constants(&product, &m_a, &m_b, ctx)?;
        let (p_norm, p_norm_method) = order_unit_norm(&product, &problem.p, ctx)?;
        Ok(Prepared {
            problem: problem.clone(),
            product,
            constants,
            p_norm,
            p_norm_method,
            hash: problem.hash(),
        })
    }

    /// `2‖P‖ c_AB / √n`.
    pub fn error_bound(&self, n: usize) -> f64 {
        self.p_norm * entropy::definetti_bound(&self.constants, n)
    }

    pub fn solve_level(&self, n: usize, ctx: &Ctx) -> Result<OuterReport> {
        let level = build_level(&self.problem, n, ctx)?;
        let sol = ctx.backend.solve(&level.lp)?;
        match sol.status {
            Status::Optimal => {}
            Status::Infeasible => return Err(Error::InfeasibleRelaxation { level: n }),
            status => {
                return Err(Error::Solver {
                    name: level.lp.name.clone(),
                    status,
                })
            }
        }
        let y = SymExtension {
            d_left: self.problem.a.dim,
            d_b: self.problem.b.dim,
            n,
            coeffs: sol.x.clone(),
        };
        let x_ab = level.space.partial_unit(&y, &self.problem.b.unit, 1)?.coeffs;
        Ok(OuterReport {
            problem_hash: self.hash.clone(),
            level: n,
            p_n: sol.objective,
            y_opt: y,
            x_ab,
            error_bound: self.error_bound(n),
            p_norm: self.p_norm,
            p_norm_method: self.p_norm_method,
            constants: self.constants.clone(),
            stats: SolverStats {
                counts: level.counts,
                iterations: sol.iterations,
                max_violation: sol.max_violation(),
            },
        })
    }
}

/// `max |P(v)|` over states `v` of the maximal product.
pub fn order_unit_norm(product: &ProductSpace, p: &[f64], ctx: &Ctx) -> Result<(f64, NormMethod)> {
    if product.dim() <= 16 {
        if let Ok(verts) = product.max_vertices(ctx) {
            let norm = verts.iter().map(|v| dot(p, v).abs()).fold(0.0, f64::max);
            return Ok((norm, NormMethod::Vertices));
        }
    }
    let facets = product.facets();
    let unit = product.unit();
    let extreme = |sense: Sense| -> Result<f64> {
        let mut lp = LinearProgram::new("order-unit-norm", sense, p.to_vec());
        for f in &facets {
            lp.add_ge(f.clone(), 0.0);
        }
        lp.add_eq(unit.clone(), 1.0);
        Ok(ctx.lp(&lp)?.objective)
    };
    let hi = extreme(Sense::Max)?;
    let lo = extreme(Sense::Min)?;
    Ok((hi.abs().max(lo.abs()), NormMethod::FacetLp))
}

pub fn solve_level(problem: &LocalProblem, n: usize, ctx: &Ctx) -> Result<OuterReport> {
    Prepared::new(problem, ctx)?.solve_level(n, ctx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub problem_hash: String,
    pub reports: Vec<OuterReport>,
    /// `p_n` nondecreasing within the feasibility tolerance.
    pub monotone: bool,
    /// Set when a level failed; earlier reports are kept.
    pub error: Option<String>,
}

fn report_path(dir: &Path, hash: &str, n: usize) -> std::path::PathBuf {
    dir.join(format!("outer-{}-n{n}.json", &hash[..16]))
}

/// Solves levels `1..=n_max` in order. With `store`, each report is written
/// as it completes and reused on a later run of the same problem.
pub fn run_schedule(problem: &LocalProblem, n_max: usize, ctx: &Ctx, store: Option<&Path>) -> Result<Schedule> {
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be at least 1".into()));
    }
    let prepared = Prepared::new(problem, ctx)?;
    let mut schedule = Schedule {
        problem_hash: prepared.hash.clone(),
        reports: Vec::new(),
        monotone: true,
        error: None,
    };
    for n in 1..=n_max {
        let stored = store.and_then(|dir| {
            let text = std::fs::read_to_string(report_path(dir, &prepared.hash, n)).ok()?;
            let r: OuterReport = serde_json::from_str(&text).ok()?;
            (r.problem_hash == prepared.hash && r.level == n).then_some(r)
        });
        let report = match stored {
            Some(r) => r,
            None => match prepared.solve_level(n, ctx) {
                Ok(r) => {
                    if let Some(dir) = store {
                        std::fs::create_dir_all(dir)?;
                        std::fs::write(report_path(dir, &prepared.hash, n), serde_json::to_vec(&r)?)?;
                    }
                    r
                }
                Err(e) if schedule.reports.is_empty() => return Err(e),
                Err(e) => {
                    schedule.error = Some(e.to_string());
                    break;
                }
            },
        };
        if let Some(prev) = schedule.reports.last() {
            let slack = ctx.tol.feasibility * (1.0 + prev.p_n.abs());
            if report.p_n < prev.p_n - slack {
                schedule.monotone = false;
            }
        }
        schedule.reports.push(report);
    }
    Ok(schedule)
}

/// Cone of a lift: polyhedral cones feed the hierarchy; opaque ones are
/// passed through to an external backend untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LiftCone {
    Polyhedral { facets: Vec<Vec<f64>> },
    Opaque { description: serde_json::Value },
}

/// `K = T(C ∩ {R y = r})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftSide {
    pub cone: LiftCone,
    /// `d × d_C`.
    pub t: Vec<Vec<f64>>,
    pub r_rows: Vec<Vec<f64>>,
    pub r: Vec<f64>,
}

impl LiftSide {
    /// The trivial lift of a state space onto itself.
    pub fn identity(k: &StateSpace) -> Self {
        let t = (0..k.dim)
            .map(|i| (0..k.dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        LiftSide {
            cone: LiftCone::Polyhedral { facets: k.facets.clone() },
            t,
            r_rows: vec![k.unit.clone()],
            r: vec![1.0],
        }
    }

    /// `K` as the image of the simplex on its vertices.
    pub fn simplex(k: &StateSpace) -> Self {
        let m = k.vertices.len();
        let t = (0..k.dim).map(|i| k.vertices.iter().map(|v| v[i]).collect()).collect();
        let eye = (0..m).map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        LiftSide {
            cone: LiftCone::Polyhedral { facets: eye },
            t,
            r_rows: vec![vec![1.0; m]],
            r: vec![1.0],
        }
    }

    fn cone_dim(&self) -> usize {
        self.t.first().map(|r| r.len()).unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftData {
    #[serde(rename = "A")]
    pub a: LiftSide,
    #[serde(rename = "B")]
    pub b: LiftSide,
}

/// A lifted problem whose cones cannot be handled by the bundled LP path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpaqueLift {
    pub lifts: LiftData,
    /// Pulled-back objective on `V_{C_A} ⊗ V_{C_B}`.
    pub p: Vec<f64>,
    pub f_a: Vec<Vec<f64>>,
    pub f_b: Vec<Vec<f64>>,
    pub g_a: Vec<Vec<f64>>,
    pub g_b: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LiftedProblem {
    Polyhedral(LocalProblem),
    Opaque(OpaqueLift),
}

fn compose(rows: &[Vec<f64>], t: &[Vec<f64>], dc: usize) -> Vec<Vec<f64>> {
    rows.iter()
        .map(|r| (0..dc).map(|q| r.iter().zip(t).map(|(ri, ti)| ri * ti[q]).sum()).collect())
        .collect()
}

/// Splits `R y = r` into a unit (from the first row with `r ≠ 0`) and
/// homogeneous equality rows.
fn lift_unit(side: &LiftSide) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let pos = side
        .r
        .iter()
        .position(|v| v.abs() > 1e-12)
        .ok_or_else(|| Error::LiftInconsistent("R y = r has no normalizing row (r = 0)".into()))?;
    let unit = linalg::scale(1.0 / side.r[pos], &side.r_rows[pos]);
    let eqs = side
        .r_rows
        .iter()
        .zip(&side.r)
        .enumerate()
        .filter(|&(j, _)| j != pos)
        .map(|(_, (row, &rj))| row.iter().zip(&unit).map(|(a, u)| a - rj * u).collect())
        .collect();
    Ok((unit, eqs))
}

fn check_side(side: &LiftSide, k: &StateSpace, which: &str) -> Result<()> {
    if side.t.len() != k.dim {
        return Err(Error::LiftInconsistent(format!("{which}: T has {} rows, body has dimension {}", side.t.len(), k.dim)));
    }
    let dc = side.cone_dim();
    if dc == 0 || side.t.iter().any(|r| r.len() != dc) || side.r_rows.iter().any(|r| r.len() != dc) || side.r_rows.len() != side.r.len() {
        return Err(Error::LiftInconsistent(format!("{which}: inconsistent lift shapes")));
    }
    if let LiftCone::Polyhedral { facets } = &side.cone {
        if facets.iter().any(|f| f.len() != dc) {
            return Err(Error::LiftInconsistent(format!("{which}: cone facets do not match T")));
        }
    }
    Ok(())
}

/// Checks that `T` maps the slice vertices into `K` and onto every vertex of `K`.
fn validate_slice(side: &LiftSide, facets: &[Vec<f64>], unit: &[f64], eqs: &[Vec<f64>], k: &StateSpace, which: &str, ctx: &Ctx) -> Result<()> {
    let mut rows = facets.to_vec();
    for e in eqs {
        rows.push(e.clone());
        rows.push(linalg::scale(-1.0, e));
    }
    let slice = geometry::vertices_of(&rows, unit, ctx).map_err(|e| Error::LiftInconsistent(format!("{which}: slice is not a polytope ({e})")))?;
    let tol = ctx.tol.feasibility.max(1e-7);
    let images: Vec<Vec<f64>> = slice.iter().map(|v| linalg::matvec(&side.t, v)).collect();
    for img in &images {
        let viol = k.membership_violation(img);
        if viol > tol {
            return Err(Error::LiftInconsistent(format!("{which}: slice point maps outside the body (violation {viol:e})")));
        }
    }
    for v in &k.vertices {
        let hit = images.iter().any(|img| img.iter().zip(v).all(|(a, b)| (a - b).abs() <= tol));
        if !hit {
            return Err(Error::LiftInconsistent(format!("{which}: a vertex of the body is not in the image")));
        }
    }
    Ok(())
}

/// Rewrites the problem over the lifting cones; `P` is pulled back through `T_A ⊗ T_B`.
pub fn lift_program(problem: &LocalProblem, lifts: &LiftData, ctx: &Ctx) -> Result<LiftedProblem> {
    problem.check()?;
    check_side(&lifts.a, &problem.a, "A")?;
    check_side(&lifts.b, &problem.b, "B")?;
    let (dca, dcb) = (lifts.a.cone_dim(), lifts.b.cone_dim());
    let (da, db) = (problem.a.dim, problem.b.dim);
    let mut p = vec![0.0; dca * dcb];
    for i in 0..da {
        for k in 0..db {
            let c = problem.p[i * db + k];
            if c == 0.0 {
                continue;
            }
            for pa in 0..dca {
                let ta = lifts.a.t[i][pa];
                if ta == 0.0 {
                    continue;
                }
                for qb in 0..dcb {
                    p[pa * dcb + qb] += c * ta * lifts.b.t[k][qb];
                }
            }
        }
    }
    let (unit_a, eq_a) = lift_unit(&lifts.a)?;
    let (unit_b, eq_b) = lift_unit(&lifts.b)?;
    let mut f_a = compose(&problem.f_a, &lifts.a.t, dca);
    f_a.extend(eq_a.iter().cloned());
    let mut f_b = compose(&problem.f_b, &lifts.b.t, dcb);
    f_b.extend(eq_b.iter().cloned());
    let g_a = compose(&problem.g_a, &lifts.a.t, dca);
    let g_b = compose(&problem.g_b, &lifts.b.t, dcb);
    match (&lifts.a.cone, &lifts.b.cone) {
        (LiftCone::Polyhedral { facets: ca }, LiftCone::Polyhedral { facets: cb }) => {
            validate_slice(&lifts.a, ca, &unit_a, &eq_a, &problem.a, "A", ctx)?;
            validate_slice(&lifts.b, cb, &unit_b, &eq_b, &problem.b, "B", ctx)?;
            let body = |facets: &[Vec<f64>], unit: Vec<f64>, label: &str| {
                StateSpace::from_facets(label, facets.to_vec(), unit, ctx)
                    .map_err(|e| Error::LiftInconsistent(format!("{label}: lifted cone slice is not a valid body ({e})")))
            };
            Ok(LiftedProblem::Polyhedral(LocalProblem {
                a: body(ca, unit_a, &format!("lift({})", problem.a.label))?,
                b: body(cb, unit_b, &format!("lift({})", problem.b.label))?,
                p,
                f_a,
                f_b,
                g_a,
                g_b,
            }))
        }
        _ => Ok(LiftedProblem::Opaque(OpaqueLift {
            lifts: lifts.clone(),
            p,
            f_a,
            f_b,
            g_a,
            g_b,
        })),
    }
}
