//! Two-player games with a GPT system on Bob's side, reduced to a bilinear
//! problem over an assemblage body and a multimeter body.
//!
//! Assemblage coordinates are `(ρ̄, ρ̃_{a|x})` for `a < |A| − 1`, with the
//! last element of each family recovered as `ρ̄ − Σ_a ρ̃_{a|x}`; multimeter
//! coordinates are `(t, n_{b|y})` for `b < |B| − 1`, the last effect being
//! `t·1 − Σ_b n_{b|y}`. The unit coordinates are `1_B(ρ̄)` and `t`.

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::Ctx;
use crate::error::{Error, Result};
use crate::geometry::StateSpace;
use crate::hash::content_hash;
use crate::hierarchy::{LocalProblem, Prepared};
use crate::linalg::dot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSpec {
    #[serde(rename = "X")]
    pub x: usize,
    #[serde(rename = "Y")]
    pub y: usize,
    #[serde(rename = "A")]
    pub a: usize,
    #[serde(rename = "B")]
    pub b: usize,
    /// `pi[x][y]`.
    pub pi: Vec<Vec<f64>>,
    /// `V[a][b][x][y]` in `{0, 1}`.
    #[serde(rename = "V")]
    pub v: Vec<Vec<Vec<Vec<f64>>>>,
}

impl GameSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let g: GameSpec = serde_json::from_str(text)?;
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidInput(msg.to_string()));
        if self.x == 0 || self.y == 0 || self.a == 0 || self.b == 0 {
            return bad("alphabets must be nonempty");
        }
        if self.pi.len() != self.x || self.pi.iter().any(|r| r.len() != self.y) {
            return bad("pi must be an X × Y table");
        }
        if self.pi.iter().flatten().any(|&p| !p.is_finite() || p < 0.0) {
            return bad("pi must be nonnegative");
        }
        let total: f64 = self.pi.iter().flatten().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("pi sums to {total}, not 1")));
        }
        let shape_ok = self.v.len() == self.a
            && self.v.iter().all(|vb| {
                vb.len() == self.b && vb.iter().all(|vx| vx.len() == self.x && vx.iter().all(|vy| vy.len() == self.y))
            });
        if !shape_ok {
            return bad("V must be an A × B × X × Y table");
        }
        if self.v.iter().flatten().flatten().flatten().any(|&v| v != 0.0 && v != 1.0) {
            return bad("V must be 0/1");
        }
        Ok(())
    }

    /// `π(x, y) V(a, b, x, y)`.
    pub fn coefficient(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.pi[x][y] * self.v[a][b][x][y]
    }

    /// `π` is a product of its marginals.
    pub fn is_free(&self) -> bool {
        let px: Vec<f64> = self.pi.iter().map(|r| r.iter().sum()).collect();
        let py: Vec<f64> = (0..self.y).map(|y| self.pi.iter().map(|r| r[y]).sum()).collect();
        (0..self.x).all(|x| (0..self.y).all(|y| (self.pi[x][y] - px[x] * py[y]).abs() <= 1e-12))
    }

    /// Uniform questions, win iff `a ⊕ b = x·y`.
    pub fn chsh() -> Self {
        let v = (0..2)
            .map(|a| {
                (0..2)
                    .map(|b| (0..2).map(|x| (0..2).map(|y| f64::from(u8::from((a ^ b) == (x & y)))).collect()).collect())
                    .collect()
            })
            .collect();
        GameSpec {
            x: 2,
            y: 2,
            a: 2,
            b: 2,
            pi: vec![vec![0.25; 2]; 2],
            v,
        }
    }

    pub fn constant(x: usize, y: usize, a: usize, b: usize, value: f64) -> Self {
        GameSpec {
            x,
            y,
            a,
            b,
            pi: vec![vec![1.0 / (x * y) as f64; y]; x],
            v: vec![vec![vec![vec![value; y]; x]; b]; a],
        }
    }
}

/// Best value over deterministic strategies.
pub fn classical_value(g: &GameSpec, ctx: &Ctx) -> Result<f64> {
    g.validate()?;
    let count = (g.a as f64).powi(g.x as i32) * (g.b as f64).powi(g.y as i32);
    if count > ctx.caps.enumeration as f64 {
        return Err(Error::EnumerationOverflow {
            count: count.min(usize::MAX as f64) as usize,
            cap: ctx.caps.enumeration,
        });
    }
    let decode = |mut code: usize, base: usize, len: usize| -> Vec<usize> {
        (0..len)
            .map(|_| {
                let d = code % base;
                code /= base;
                d
            })
            .collect()
    };
    let na = g.a.pow(g.x as u32);
    let nb = g.b.pow(g.y as u32);
    let mut best = f64::NEG_INFINITY;
    for ca in 0..na {
        let fa = decode(ca, g.a, g.x);
        for cb in 0..nb {
            let fb = decode(cb, g.b, g.y);
            let mut v = 0.0;
            for x in 0..g.x {
                for y in 0..g.y {
                    v += g.coefficient(fa[x], fb[y], x, y);
                }
            }
            best = best.max(v);
        }
    }
    Ok(best)
}

/// Linear maps from body coordinates to the physical objects.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyMaps {
    /// `rho[a][x]`: `d_B × dim` matrix giving `ρ̃_{a|x}`.
    pub rho: Vec<Vec<Vec<Vec<f64>>>>,
    /// `effect[b][y]`: `d_B × dim` matrix giving the covector `n_{b|y}`.
    pub effect: Vec<Vec<Vec<Vec<f64>>>>,
}

fn block_map(d_b: usize, dim: usize, offset: usize) -> Vec<Vec<f64>> {
    (0..d_b)
        .map(|r| {
            let mut row = vec![0.0; dim];
            row[offset + r] = 1.0;
            row
        })
        .collect()
}

/// Tuples `(ρ̃_{a|x})` of cone elements with a common normalized total.
pub fn assemblage_body(kb: &StateSpace, na: usize, nx: usize, ctx: &Ctx) -> Result<(StateSpace, Vec<Vec<Vec<Vec<f64>>>>)> {
    let d = kb.dim;
    let dim = d * (1 + (na - 1) * nx);
    if dim > ctx.caps.dim {
        return Err(Error::DimensionOverflow { dim, cap: ctx.caps.dim });
    }
    let block = |x: usize, a: usize| d * (1 + x * (na - 1) + a);
    let mut rho = vec![vec![Vec::new(); nx]; na];
    for x in 0..nx {
        let mut last = block_map(d, dim, 0);
        for (a, slot) in rho.iter_mut().enumerate().take(na - 1) {
            let m = block_map(d, dim, block(x, a));
            for r in 0..d {
                for j in 0..dim {
                    last[r][j] -= m[r][j];
                }
            }
            slot[x] = m;
        }
        rho[na - 1][x] = last;
    }
    let mut facets = Vec::new();
    for x in 0..nx {
        for fam in &rho {
            for g in &kb.facets {
                facets.push((0..dim).map(|j| (0..d).map(|r| g[r] * fam[x][r][j]).sum()).collect());
            }
        }
    }
    let mut unit = vec![0.0; dim];
    unit[..d].copy_from_slice(&kb.unit);
    let body = StateSpace::from_facets(format!("assemblage[{na}x{nx}]({})", kb.label), facets, unit, ctx)?;
    Ok((body, rho))
}

/// Families of complete measurements `(n_{b|y})` on `K_B`.
pub fn multimeter_body(kb: &StateSpace, nb: usize, ny: usize, ctx: &Ctx) -> Result<(StateSpace, Vec<Vec<Vec<Vec<f64>>>>)> {
    let d = kb.dim;
    let dim = 1 + d * (nb - 1) * ny;
    if dim > ctx.caps.dim {
        return Err(Error::DimensionOverflow { dim, cap: ctx.caps.dim });
    }
    let block = |y: usize, b: usize| 1 + d * (y * (nb - 1) + b);
    let mut effect = vec![vec![Vec::new(); ny]; nb];
    for y in 0..ny {
        let mut last: Vec<Vec<f64>> = (0..d)
            .map(|r| {
                let mut row = vec![0.0; dim];
                row[0] = kb.unit[r];
                row
            })
            .collect();
        for (b, slot) in effect.iter_mut().enumerate().take(nb - 1) {
            let m = block_map(d, dim, block(y, b));
            for r in 0..d {
                for j in 0..dim {
                    last[r][j] -= m[r][j];
                }
            }
            slot[y] = m;
        }
        effect[nb - 1][y] = last;
    }
    let mut facets = Vec::new();
    for y in 0..ny {
        for fam in &effect {
            for v in &kb.vertices {
                facets.push((0..dim).map(|j| (0..d).map(|r| v[r] * fam[y][r][j]).sum()).collect());
            }
        }
    }
    let mut unit = vec![0.0; dim];
    unit[0] = 1.0;
    let body = StateSpace::from_facets(format!("multimeter[{nb}x{ny}]({})", kb.label), facets, unit, ctx)?;
    Ok((body, effect))
}

#[derive(Debug, Clone)]
pub struct CompiledGame {
    pub game: GameSpec,
    pub space: StateSpace,
    /// Minimization form: `P` is the negated winning probability.
    pub problem: LocalProblem,
    pub maps: BodyMaps,
    pub free: bool,
}

impl CompiledGame {
    /// Winning probability of a pair of body points.
    pub fn value(&self, assemblage: &[f64], multimeter: &[f64]) -> f64 {
        -self.problem.value(assemblage, multimeter)
    }

    pub fn hash(&self) -> String {
        content_hash(&(&self.game, &self.space))
    }
}

pub fn compile_game(g: &GameSpec, kb: &StateSpace, ctx: &Ctx) -> Result<CompiledGame> {
    g.validate()?;
    kb.ensure_valid(ctx)?;
    // Check the product size before any vertex enumeration.
    let total = kb.dim * (1 + (g.a - 1) * g.x) * (1 + kb.dim * (g.b - 1) * g.y);
    if total > ctx.caps.dim {
        return Err(Error::DimensionOverflow { dim: total, cap: ctx.caps.dim });
    }
    let (ka, rho) = assemblage_body(kb, g.a, g.x, ctx)?;
    let (kbb, effect) = multimeter_body(kb, g.b, g.y, ctx)?;
    let d = kb.dim;
    let mut p = vec![0.0; total];
    for a in 0..g.a {
        for b in 0..g.b {
            for x in 0..g.x {
                for y in 0..g.y {
                    let c = g.coefficient(a, b, x, y);
                    if c == 0.0 {
                        continue;
                    }
                    for r in 0..d {
                        let (ra, nb) = (&rho[a][x][r], &effect[b][y][r]);
                        for (i, &u) in ra.iter().enumerate() {
                            if u == 0.0 {
                                continue;
                            }
                            for (k, &w) in nb.iter().enumerate() {
                                p[i * kbb.dim + k] -= c * u * w;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(CompiledGame {
        game: g.clone(),
        space: kb.clone(),
        problem: LocalProblem::unconstrained(ka, kbb, p),
        maps: BodyMaps { rho, effect },
        free: g.is_free(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameLevel {
    pub level: usize,
    pub upper: f64,
    pub error_bound: f64,
}

/// Upper bounds on the assemblage value at levels `1..=n_max`.
pub fn hierarchy_upper(cg: &CompiledGame, n_max: usize, ctx: &Ctx) -> Result<Vec<GameLevel>> {
    let prepared = Prepared::new(&cg.problem, ctx)?;
    (1..=n_max)
        .map(|n| {
            let r = prepared.solve_level(n, ctx)?;
            Ok(GameLevel {
                level: n,
                upper: -r.p_n,
                error_bound: r.error_bound,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeesawResult {
    pub value: f64,
    pub assemblage: Vec<f64>,
    pub multimeter: Vec<f64>,
    pub restarts_completed: usize,
}

fn best_vertex(vertices: &[Vec<f64>], c: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in vertices.iter().enumerate() {
        let val = dot(c, v);
        if val > best.1 + 1e-13 {
            best = (i, val);
        }
    }
    best
}

/// Multimeter point of a deterministic strategy `b(y)`.
fn deterministic_multimeter(cg: &CompiledGame, fb: &[usize]) -> Vec<f64> {
    let d = cg.space.dim;
    let nb = cg.game.b;
    let mut out = vec![0.0; cg.problem.b.dim];
    out[0] = 1.0;
    for (y, &b) in fb.iter().enumerate() {
        if b + 1 < nb {
            let off = 1 + d * (y * (nb - 1) + b);
            out[off..off + d].copy_from_slice(&cg.space.unit);
        }
    }
    out
}

fn classical_bob(g: &GameSpec) -> Vec<usize> {
    let mut best = (vec![0; g.y], f64::NEG_INFINITY);
    let nb = g.b.pow(g.y as u32);
    for code in 0..nb {
        let mut c = code;
        let fb: Vec<usize> = (0..g.y)
            .map(|_| {
                let d = c % g.b;
                c /= g.b;
                d
            })
            .collect();
        let v: f64 = (0..g.x)
            .map(|x| (0..g.a).map(|a| (0..g.y).map(|y| g.coefficient(a, fb[y], x, y)).sum::<f64>()).fold(0.0, f64::max))
            .sum();
        if v > best.1 {
            best = (fb, v);
        }
    }
    best.0
}

/// Alternating best responses over body vertices, from the classical
/// strategy of Bob and from `restarts` random multimeter vertices.
pub fn seesaw_lower(cg: &CompiledGame, restarts: usize, ctx: &Ctx) -> Result<SeesawResult> {
    let va = &cg.problem.a.vertices;
    let vb = &cg.problem.b.vertices;
    if va.is_empty() || vb.is_empty() {
        return Err(Error::Degenerate("game bodies have no vertices".into()));
    }
    let (da, db) = (cg.problem.a.dim, cg.problem.b.dim);
    let p = &cg.problem.p;
    let mut starts = Vec::with_capacity(restarts + 1);
    if cg.game.b.checked_pow(cg.game.y as u32).is_some_and(|c| c <= ctx.caps.enumeration) {
        starts.push(deterministic_multimeter(cg, &classical_bob(&cg.game)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    for _ in 0..restarts {
        starts.push(vb.choose(&mut rng).expect("nonempty").clone());
    }
    let mut best: Option<SeesawResult> = None;
    let mut completed = 0;
    for start in starts {
        let mut nbv = start;
        let mut value = f64::NEG_INFINITY;
        let mut xa = va[0].clone();
        for _ in 0..200 {
            // Winning probability is -P.
            let ca: Vec<f64> = (0..da).map(|i| -dot(&p[i * db..(i + 1) * db], &nbv)).collect();
            let (ia, _) = best_vertex(va, &ca);
            xa = va[ia].clone();
            let cb: Vec<f64> = (0..db).map(|k| -(0..da).map(|i| p[i * db + k] * xa[i]).sum::<f64>()).collect();
            let (ib, v) = best_vertex(vb, &cb);
            nbv = vb[ib].clone();
            if v <= value + 1e-12 {
                value = value.max(v);
                break;
            }
            value = v;
        }
        completed += 1;
        if best.as_ref().is_none_or(|b| value > b.value + 1e-12) {
            best = Some(SeesawResult {
                value,
                assemblage: xa,
                multimeter: nbv,
                restarts_completed: 0,
            });
        }
    }
    let mut out = best.ok_or_else(|| Error::Degenerate("no seesaw restart completed".into()))?;
    out.restarts_completed = completed;
    Ok(out)
}
