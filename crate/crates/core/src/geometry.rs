//! Polytopal state spaces in homogeneous coordinates.
//!
//! A state space `K` of affine dimension `d - 1` is stored as the base of a
//! cone in `R^d`: vertices carry their normalization (`unit(v) = 1`), facet
//! covectors generate the dual cone, and affine maps become matrices.

use serde::{Deserialize, Serialize};

use crate::config::Ctx;
use crate::dd;
use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm2};
use crate::solver::{LinearProgram, Sense};
use crate::tensor::ProductSpace;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSpace {
    pub label: String,
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
    pub facets: Vec<Vec<f64>>,
    pub unit: Vec<f64>,
}

/// On-disk form; either representation may be omitted and is then derived.
#[derive(Debug, Deserialize)]
struct RawStateSpace {
    #[serde(default)]
    label: String,
    dim: usize,
    #[serde(default)]
    vertices: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    facets: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    unit: Option<Vec<f64>>,
}

impl<'de> Deserialize<'de> for StateSpace {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawStateSpace::deserialize(de)?;
        StateSpace::from_raw(raw, &Ctx::default()).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub worst: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Effect {
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub effects: Vec<Vec<f64>>,
}

impl Measurement {
    pub fn outcome_count(&self) -> usize {
        self.effects.len()
    }

    /// Outcome probabilities `(h_i(x))_i`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        linalg::matvec(&self.effects, x)
    }

    pub fn check(&self, k: &StateSpace, tol: f64) -> Result<()> {
        let mut total = vec![0.0; k.dim];
        for e in &self.effects {
            if e.len() != k.dim {
                return Err(Error::InvalidInput("effect length differs from dimension".into()));
            }
            for v in &k.vertices {
                let val = dot(e, v);
                if val < -tol || val > 1.0 + tol {
                    return Err(Error::InvalidInput(format!("effect value {val} outside [0,1]")));
                }
            }
            linalg::axpy(1.0, e, &mut total);
        }
        let err = total.iter().zip(&k.unit).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if err > tol {
            return Err(Error::InvalidInput(format!("effects do not sum to the unit (error {err:e})")));
        }
        Ok(())
    }
}

impl StateSpace {
    /// Builds a state space from both representations and validates it.
    pub fn new(label: impl Into<String>, vertices: Vec<Vec<f64>>, facets: Vec<Vec<f64>>, unit: Vec<f64>) -> Result<Self> {
        let k = StateSpace {
            label: label.into(),
            dim: unit.len(),
            vertices,
            facets,
            unit,
        };
        k.ensure_valid(&Ctx::default())?;
        Ok(k)
    }

    /// Derives facets (and the unit) from a vertex list.
    pub fn from_vertices(label: impl Into<String>, vertices: Vec<Vec<f64>>, ctx: &Ctx) -> Result<Self> {
        let d = vertices.first().map(|v| v.len()).unwrap_or(0);
        if d == 0 {
            return Err(Error::InvalidInput("empty vertex list".into()));
        }
        let unit = linalg::lstsq(&vertices, d, &vec![1.0; vertices.len()])
            .ok_or_else(|| Error::Degenerate("cannot solve for the unit".into()))?;
        let facets = facets_of(&vertices, d, ctx)?;
        let k = StateSpace {
            label: label.into(),
            dim: d,
            vertices,
            facets,
            unit,
        };
        k.ensure_valid(ctx)?;
        Ok(k)
    }

    /// Derives vertices from facet covectors and the unit.
    pub fn from_facets(label: impl Into<String>, facets: Vec<Vec<f64>>, unit: Vec<f64>, ctx: &Ctx) -> Result<Self> {
        let d = unit.len();
        let vertices = vertices_of(&facets, &unit, ctx)?;
        let k = StateSpace {
            label: label.into(),
            dim: d,
            vertices,
            facets,
            unit,
        };
        k.ensure_valid(ctx)?;
        Ok(k)
    }

    fn from_raw(raw: RawStateSpace, ctx: &Ctx) -> Result<Self> {
        let label = raw.label;
        let k = match (raw.vertices, raw.facets) {
            (Some(v), Some(f)) => {
                let unit = match raw.unit {
                    Some(u) => u,
                    None => linalg::lstsq(&v, raw.dim, &vec![1.0; v.len()])
                        .ok_or_else(|| Error::Degenerate("cannot solve for the unit".into()))?,
                };
                let k = StateSpace {
                    label,
                    dim: raw.dim,
                    vertices: v,
                    facets: f,
                    unit,
                };
                k.ensure_valid(ctx)?;
                k
            }
            (Some(v), None) => StateSpace::from_vertices(label, v, ctx)?,
            (None, Some(f)) => {
                let unit = raw
                    .unit
                    .ok_or_else(|| Error::InvalidInput("facets without vertices need a unit".into()))?;
                StateSpace::from_facets(label, f, unit, ctx)?
            }
            (None, None) => return Err(Error::InvalidInput("need vertices or facets".into())),
        };
        if k.dim != raw.dim {
            return Err(Error::InvalidInput(format!("declared dim {} but data has {}", raw.dim, k.dim)));
        }
        Ok(k)
    }

    pub fn from_json(text: &str, ctx: &Ctx) -> Result<Self> {
        let raw: RawStateSpace = serde_json::from_str(text)?;
        StateSpace::from_raw(raw, ctx)
    }

    /// The probability simplex with `d` vertices.
    pub fn simplex(d: usize) -> Self {
        let eye: Vec<Vec<f64>> = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        StateSpace {
            label: format!("simplex{d}"),
            dim: d,
            vertices: eye.clone(),
            facets: eye,
            unit: vec![1.0; d],
        }
    }

    /// The square gbit: vertices `(1, ±1, ±1)`.
    pub fn square() -> Self {
        let mut vertices = Vec::new();
        for sx in [1.0, -1.0] {
            for sy in [1.0, -1.0] {
                vertices.push(vec![1.0, sx, sy]);
            }
        }
        let facets = vec![
            vec![0.5, 0.5, 0.0],
            vec![0.5, -0.5, 0.0],
            vec![0.5, 0.0, 0.5],
            vec![0.5, 0.0, -0.5],
        ];
        StateSpace {
            label: "square".into(),
            dim: 3,
            vertices,
            facets,
            unit: vec![1.0, 0.0, 0.0],
        }
    }

    /// Regular `k`-gon inscribed in the unit circle, first vertex at angle 0.
    pub fn regular_polygon(k: usize) -> Self {
        assert!(k >= 3, "a polygon needs at least three vertices");
        let tau = std::f64::consts::TAU;
        // Exact zeros instead of 1e-16 residue from cos/sin.
        let snap = |v: f64| if v.abs() < 1e-14 { 0.0 } else { v };
        let vertices = (0..k)
            .map(|j| {
                let t = tau * j as f64 / k as f64;
                vec![1.0, snap(t.cos()), snap(t.sin())]
            })
            .collect();
        let apothem = (std::f64::consts::PI / k as f64).cos();
        let facets = (0..k)
            .map(|j| {
                let t = tau * (j as f64 + 0.5) / k as f64;
                vec![apothem, -snap(t.cos()), -snap(t.sin())]
            })
            .collect();
        StateSpace {
            label: format!("polygon{k}"),
            dim: 3,
            vertices,
            facets,
            unit: vec![1.0, 0.0, 0.0],
        }
    }

    pub fn validate(&self, ctx: &Ctx) -> ValidationReport {
        let tol = ctx.tol.feasibility;
        let d = self.dim;
        let mut checks = Vec::new();
        let shapes_ok = self.unit.len() == d
            && !self.vertices.is_empty()
            && !self.facets.is_empty()
            && self.vertices.iter().all(|v| v.len() == d)
            && self.facets.iter().all(|f| f.len() == d);
        checks.push(Check {
            name: "dimensions".into(),
            passed: shapes_ok,
            worst: 0.0,
        });
        if !shapes_ok {
            return ValidationReport { checks };
        }
        let finite = self.vertices.iter().chain(&self.facets).flatten().chain(&self.unit).all(|x| x.is_finite());
        checks.push(Check {
            name: "finite".into(),
            passed: finite,
            worst: 0.0,
        });
        if !finite {
            return ValidationReport { checks };
        }

        let mut worst = 0.0f64;
        for v in &self.vertices {
            for f in &self.facets {
                worst = worst.max(-dot(f, v));
            }
        }
        checks.push(Check {
            name: "facet containment".into(),
            passed: worst <= tol,
            worst,
        });

        let worst = self.vertices.iter().map(|v| (dot(&self.unit, v) - 1.0).abs()).fold(0.0, f64::max);
        checks.push(Check {
            name: "base normalization".into(),
            passed: worst <= tol,
            worst,
        });

        let worst = unit_cone_residual(self, ctx).unwrap_or(f64::INFINITY);
        checks.push(Check {
            name: "unit positivity".into(),
            passed: worst <= tol,
            worst,
        });

        let r = linalg::rank(&self.vertices, d, 1e-9);
        checks.push(Check {
            name: "full dimension".into(),
            passed: r == d,
            worst: (d - r.min(d)) as f64,
        });
        ValidationReport { checks }
    }

    pub fn ensure_valid(&self, ctx: &Ctx) -> Result<()> {
        let rep = self.validate(ctx);
        if rep.passed() {
            Ok(())
        } else if let Some(e) = rep
            .failures()
            .contains(&"unit positivity")
            .then(|| unit_cone_residual(self, ctx).err())
            .flatten()
            .filter(Error::is_solver_failure)
        {
            Err(e)
        } else {
            Err(Error::InvalidInput(format!(
                "state space '{}' fails: {}",
                self.label,
                rep.failures().join(", ")
            )))
        }
    }

    pub fn facet_values(&self, x: &[f64]) -> Vec<f64> {
        linalg::matvec(&self.facets, x)
    }

    pub fn unit_value(&self, x: &[f64]) -> f64 {
        dot(&self.unit, x)
    }

    /// Largest amount by which `x` violates membership (facets and normalization).
    pub fn membership_violation(&self, x: &[f64]) -> f64 {
        let facet = self.facet_values(x).into_iter().fold(0.0f64, |a, v| a.max(-v));
        facet.max((self.unit_value(x) - 1.0).abs())
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim && self.membership_violation(x) <= tol
    }

    pub fn barycenter(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.dim];
        for v in &self.vertices {
            linalg::axpy(1.0 / self.vertices.len() as f64, v, &mut c);
        }
        c
    }

    pub fn is_effect(&self, f: &[f64], tol: f64) -> bool {
        self.vertices.iter().all(|v| {
            let x = dot(f, v);
            x >= -tol && x <= 1.0 + tol
        })
    }

    fn require_interior(&self, y: &[f64], tol: f64) -> Result<Vec<f64>> {
        let vals = self.facet_values(y);
        let min_value = vals.iter().copied().fold(f64::INFINITY, f64::min);
        if min_value <= tol {
            return Err(Error::NotInterior { min_value });
        }
        Ok(vals)
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::InvalidInput(format!("vector of length {} in a {}-dim space", x.len(), self.dim)));
        }
        Ok(())
    }
}

/// Facets of `cone(vertices)`, each scaled so its largest vertex value is one.
pub fn facets_of(vertices: &[Vec<f64>], d: usize, ctx: &Ctx) -> Result<Vec<Vec<f64>>> {
    let rays = dd::extreme_rays(vertices, d, 1e-9, ctx.caps.rays)?;
    Ok(rays
        .into_iter()
        .map(|f| {
            let m = vertices.iter().map(|v| dot(&f, v)).fold(0.0, f64::max);
            linalg::scale(1.0 / m, &f)
        })
        .collect())
}

/// Vertices of `{z : F z ≥ 0, unit(z) = 1}`.
pub fn vertices_of(facets: &[Vec<f64>], unit: &[f64], ctx: &Ctx) -> Result<Vec<Vec<f64>>> {
    let rays = dd::extreme_rays(facets, unit.len(), 1e-9, ctx.caps.rays)?;
    rays.into_iter()
        .map(|r| {
            let u = dot(unit, &r);
            if u <= 1e-12 {
                Err(Error::Degenerate("unit is not strictly positive on the cone".into()))
            } else {
                Ok(linalg::scale(1.0 / u, &r))
            }
        })
        .collect()
}

/// L1 distance from `unit` to the conic hull of the facets.
fn unit_cone_residual(k: &StateSpace, ctx: &Ctx) -> Result<f64> {
    let (m, d) = (k.facets.len(), k.dim);
    let nv = m + 2 * d;
    let mut obj = vec![0.0; nv];
    obj[m..].iter_mut().for_each(|c| *c = 1.0);
    let mut lp = LinearProgram::new("unit-in-facet-cone", Sense::Min, obj);
    for r in 0..d {
        let mut row = vec![0.0; nv];
        for (i, f) in k.facets.iter().enumerate() {
            row[i] = f[r];
        }
        row[m + 2 * r] = 1.0;
        row[m + 2 * r + 1] = -1.0;
        lp.add_eq(row, k.unit[r]);
    }
    lp.set_nonnegative(0..nv);
    Ok(ctx.lp(&lp)?.objective.max(0.0))
}

/// `sup_{f ∈ E(K)} f(z)` together with a maximizing effect.
pub fn effect_argsup(k: &StateSpace, z: &[f64], ctx: &Ctx) -> Result<(f64, Vec<f64>)> {
    k.check_len(z)?;
    let mut lp = LinearProgram::new("effect-sup", Sense::Max, z.to_vec());
    for v in &k.vertices {
        lp.add_ge(v.clone(), 0.0);
        lp.add_le(v.clone(), 1.0);
    }
    let sol = ctx.lp(&lp)?;
    Ok((sol.objective, sol.x))
}

pub fn effect_sup(k: &StateSpace, z: &[f64], ctx: &Ctx) -> Result<f64> {
    Ok(effect_argsup(k, z, ctx)?.0)
}

/// Base norm: `min λ + μ` with `z = λp − μq`, `p, q ∈ K`.
pub fn base_dual_norm(k: &StateSpace, z: &[f64], ctx: &Ctx) -> Result<f64> {
    k.check_len(z)?;
    let nv = k.vertices.len();
    let mut lp = LinearProgram::new("base-norm", Sense::Min, vec![1.0; 2 * nv]);
    for r in 0..k.dim {
        let mut row = vec![0.0; 2 * nv];
        for (j, v) in k.vertices.iter().enumerate() {
            row[j] = v[r];
            row[nv + j] = -v[r];
        }
        lp.add_eq(row, z[r]);
    }
    lp.set_nonnegative(0..2 * nv);
    Ok(ctx.lp(&lp)?.objective)
}

/// Tightest `(μ, λ)` with `μy ≤ x ≤ λy` in the cone order.
pub fn order_bounds(k: &StateSpace, x: &[f64], y: &[f64], ctx: &Ctx) -> Result<(f64, f64)> {
    k.check_len(x)?;
    k.check_len(y)?;
    let fy = k.require_interior(y, ctx.tol.interior)?;
    let fx = k.facet_values(x);
    let mut mu = f64::INFINITY;
    let mut lambda = f64::NEG_INFINITY;
    for (a, b) in fx.iter().zip(&fy) {
        let r = a / b;
        mu = mu.min(r);
        lambda = lambda.max(r);
    }
    Ok((mu, lambda))
}

/// Smallest `λ` with `x ≤ λτ` for every state `x`.
pub fn lambda_for_tau(k: &StateSpace, tau: &[f64], ctx: &Ctx) -> Result<f64> {
    k.check_len(tau)?;
    let ft = k.require_interior(tau, ctx.tol.interior)?;
    let mut lambda = f64::NEG_INFINITY;
    for (f, t) in k.facets.iter().zip(&ft) {
        for v in &k.vertices {
            lambda = lambda.max(dot(f, v) / t);
        }
    }
    Ok(lambda)
}

/// Minimizes [`lambda_for_tau`] over interior `τ`.
///
/// With `M_i = max_v f_i(v)` the problem `min_τ max_i M_i / f_i(τ)` is the
/// reciprocal of the LP `max s : f_i(τ) ≥ s M_i, unit(τ) = 1`, solved once.
pub fn optimize_tau(k: &StateSpace, ctx: &Ctx) -> Result<(Vec<f64>, f64)> {
    let d = k.dim;
    let mut obj = vec![0.0; d + 1];
    obj[d] = 1.0;
    let mut lp = LinearProgram::new("optimize-tau", Sense::Max, obj);
    for f in &k.facets {
        let mi = k.vertices.iter().map(|v| dot(f, v)).fold(f64::NEG_INFINITY, f64::max);
        let mut row = f.clone();
        row.push(-mi);
        lp.add_ge(row, 0.0);
    }
    let mut row = k.unit.clone();
    row.push(0.0);
    lp.add_eq(row, 1.0);
    let sol = ctx.lp(&lp)?;
    let s = sol.objective;
    if s <= ctx.tol.interior {
        return Err(Error::Degenerate("state space has an empty interior".into()));
    }
    let tau = sol.x[..d].to_vec();
    let lambda = lambda_for_tau(k, &tau, ctx)?;
    Ok((tau, lambda))
}

/// Informationally complete measurement built around the default covector basis.
pub fn ic_measurement(k: &StateSpace, ctx: &Ctx) -> Result<Measurement> {
    let d = k.dim;
    let mut pivot = 0;
    for i in 0..d {
        if k.unit[i].abs() > k.unit[pivot].abs() {
            pivot = i;
        }
    }
    let basis: Vec<Vec<f64>> = (0..d)
        .filter(|&i| i != pivot)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    ic_measurement_with_basis(k, &basis, ctx)
}

/// `h_i = (1 + ε_i a_i)/d` for `i < d`, `h_d = 1_K − Σ h_i`.
///
/// `ε_i` is half the largest value keeping `h_i` within `[0, 2/d]` on the
/// vertices. When `d > 2` the vector `ε` is shrunk further, if needed, so
/// that `Σ_i ε_i |a_i(v)| ≤ 1/2` and `h_d` stays inside `E(K)`.
pub fn ic_measurement_with_basis(k: &StateSpace, basis: &[Vec<f64>], ctx: &Ctx) -> Result<Measurement> {
    let d = k.dim;
    if basis.len() + 1 != d || basis.iter().any(|a| a.len() != d) {
        return Err(Error::InvalidInput(format!("need {} basis covectors of length {d}", d - 1)));
    }
    let mut eps: Vec<f64> = basis
        .iter()
        .map(|a| {
            let m = k.vertices.iter().map(|v| dot(a, v).abs()).fold(0.0, f64::max);
            if m > 0.0 {
                0.5 / m
            } else {
                0.0
            }
        })
        .collect();
    let spread = k
        .vertices
        .iter()
        .map(|v| basis.iter().zip(&eps).map(|(a, e)| e * dot(a, v).abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if spread > 0.5 {
        eps.iter_mut().for_each(|e| *e *= 0.5 / spread);
    }
    let df = d as f64;
    let mut effects: Vec<Vec<f64>> = basis
        .iter()
        .zip(&eps)
        .map(|(a, e)| k.unit.iter().zip(a).map(|(u, ai)| (u + e * ai) / df).collect())
        .collect();
    let mut last = k.unit.clone();
    for h in &effects {
        linalg::axpy(-1.0, h, &mut last);
    }
    effects.push(last);
    let meas = Measurement { effects };
    meas.check(k, ctx.tol.feasibility)?;
    let sigma = linalg::sigma_min(&meas.effects, d);
    if sigma <= ctx.tol.rank {
        return Err(Error::RankDeficient {
            what: "ic measurement".into(),
            sigma,
        });
    }
    Ok(meas)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectivityConstant {
    pub value: f64,
    pub alpha: f64,
    pub beta: f64,
    pub sigma_min: f64,
    /// `false` when `beta` is the conservative lower bound instead of the exact inradius.
    pub beta_exact: bool,
}

const MAX_EXACT_HULL_POINTS: usize = 40;

/// Certified `f` with `‖(M_A⊗M_B) z‖ ≥ f ‖z‖` in the respective base norms.
pub fn injectivity_constant(p: &ProductSpace, m_a: &Measurement, m_b: &Measurement, ctx: &Ctx) -> Result<InjectivityConstant> {
    let (da, db) = (p.a.dim, p.b.dim);
    if m_a.effects.iter().any(|e| e.len() != da) || m_b.effects.iter().any(|e| e.len() != db) {
        return Err(Error::InvalidInput("measurement does not match the product factors".into()));
    }
    let mut t = Vec::with_capacity(m_a.outcome_count() * m_b.outcome_count());
    for ea in &m_a.effects {
        for eb in &m_b.effects {
            t.push(linalg::kron_vec(ea, eb));
        }
    }
    let d = da * db;
    let sigma_min = linalg::sigma_min(&t, d);
    if sigma_min <= ctx.tol.rank {
        return Err(Error::RankDeficient {
            what: "measurement tensor product".into(),
            sigma: sigma_min,
        });
    }
    // Output: product of simplices, vertices are standard basis vectors.
    let out_radius = 1.0f64;
    let alpha = 1.0 / out_radius;
    // Facet enumeration of the symmetric hull explodes quickly; past these
    // sizes the lower bound is used directly.
    let exact = if d <= 16 {
        p.max_vertices(ctx)
            .ok()
            .filter(|v| v.len() <= MAX_EXACT_HULL_POINTS)
            .and_then(|v| symmetric_inradius(&v, d, ctx).ok())
    } else {
        None
    };
    let (beta, beta_exact) = match exact {
        Some(b) => (b, true),
        None => (symmetric_inradius_lower(&p.sep_generators(), d), false),
    };
    Ok(InjectivityConstant {
        value: alpha * sigma_min * beta,
        alpha,
        beta,
        sigma_min,
        beta_exact,
    })
}

/// Inradius of `conv(P ∪ −P)` from the vertices of its polar.
pub fn symmetric_inradius(points: &[Vec<f64>], d: usize, ctx: &Ctx) -> Result<f64> {
    let mut rows = Vec::with_capacity(2 * points.len());
    for p in points {
        let mut plus: Vec<f64> = p.iter().map(|x| -x).collect();
        plus.push(1.0);
        let mut minus = p.clone();
        minus.push(1.0);
        rows.push(plus);
        rows.push(minus);
    }
    let rays = dd::extreme_rays(&rows, d + 1, 1e-10, ctx.caps.rays)?;
    let mut r = f64::INFINITY;
    for ray in rays {
        let s = ray[d];
        let a = norm2(&ray[..d]);
        if s <= 0.0 || a == 0.0 {
            return Err(Error::Degenerate("symmetric hull is not full-dimensional".into()));
        }
        r = r.min(s / a);
    }
    Ok(r)
}

/// Lower bound `σ_min(S)/√d` for `d` greedily chosen independent points `S`.
pub fn symmetric_inradius_lower(points: &[Vec<f64>], d: usize) -> f64 {
    let mut chosen: Vec<Vec<f64>> = Vec::new();
    let mut ortho: Vec<Vec<f64>> = Vec::new();
    let mut used = vec![false; points.len()];
    for _ in 0..d {
        let mut best = None;
        let mut best_norm = 1e-12;
        for (i, p) in points.iter().enumerate() {
            if used[i] {
                continue;
            }
            let mut r = p.clone();
            for q in &ortho {
                let c = dot(&r, q);
                linalg::axpy(-c, q, &mut r);
            }
            let n = norm2(&r);
            if n > best_norm {
                best_norm = n;
                best = Some((i, r));
            }
        }
        let Some((i, r)) = best else {
            return 0.0;
        };
        used[i] = true;
        chosen.push(points[i].clone());
        ortho.push(linalg::scale(1.0 / best_norm, &r));
    }
    linalg::sigma_min(&chosen, d) / (d as f64).sqrt()
}
