//! Relative entropy of states on a polytopal state space, and the constants
//! of the de Finetti bound.
//!
//! `D(x‖y) = ∫_μ^λ h(s)/s ds + ln λ + 1 − λ` with
//! `h(s) = sup_{f ∈ E(K)} s f(y) − f(x)`. Every maximizer `f` gives a line
//! `s ↦ a s − b` with `a = f(y)`, `b = f(x)`, and `h` is the upper envelope
//! of finitely many such lines, so the integral is a finite sum of
//! `a Δs − b ln(s₂/s₁)` terms once the breakpoints are known.

use serde::{Deserialize, Serialize};

use crate::config::Ctx;
use crate::error::{Error, Result};
use crate::geometry::{self, InjectivityConstant, Measurement, StateSpace};
use crate::linalg::{self, dot};
use crate::tensor::ProductSpace;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactPwl,
    Adaptive { tol: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyResult {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub mu: f64,
    pub lambda: f64,
    pub method: Method,
    /// Linear pieces (exact) or quadrature intervals (adaptive).
    pub pieces: usize,
}

#[derive(Debug, Clone, Copy)]
struct Line {
    a: f64,
    b: f64,
}

impl Line {
    fn at(&self, s: f64) -> f64 {
        self.a * s - self.b
    }
}

/// `∫_{s1}^{s2} (a s − b)/s ds`; at `s1 = 0` the line passes through the origin.
fn integrate_line(l: Line, s1: f64, s2: f64) -> f64 {
    if s2 <= s1 {
        return 0.0;
    }
    if s1 <= 0.0 {
        return l.a * s2;
    }
    l.a * (s2 - s1) - l.b * (s2 / s1).ln()
}

struct Integrand<'a> {
    k: &'a StateSpace,
    x: &'a [f64],
    y: &'a [f64],
    ctx: &'a Ctx,
    evals: usize,
}

impl Integrand<'_> {
    fn eval(&mut self, s: f64) -> Result<(f64, Line)> {
        self.evals += 1;
        let z: Vec<f64> = self.y.iter().zip(self.x).map(|(yi, xi)| s * yi - xi).collect();
        let (value, f) = geometry::effect_argsup(self.k, &z, self.ctx)?;
        Ok((value, Line {
            a: dot(&f, self.y),
            b: dot(&f, self.x),
        }))
    }
}

/// Checks inputs and returns `(mass, x/mass, y/mass)`.
fn normalize_pair(k: &StateSpace, x: &[f64], y: &[f64], ctx: &Ctx) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    if x.len() != k.dim || y.len() != k.dim {
        return Err(Error::InvalidInput("vector length differs from dimension".into()));
    }
    let (mx, my) = (k.unit_value(x), k.unit_value(y));
    if my <= 0.0 || (mx - my).abs() > ctx.tol.feasibility * my.max(1.0) {
        return Err(Error::InvalidInput(format!("x and y carry different unit values ({mx}, {my})")));
    }
    let xn = linalg::scale(1.0 / mx, x);
    let yn = linalg::scale(1.0 / my, y);
    let viol = k.membership_violation(&xn);
    if viol > ctx.tol.feasibility {
        return Err(Error::InvalidInput(format!("x is not in the cone (violation {viol:e})")));
    }
    Ok((my, xn, yn))
}

pub fn relative_entropy(k: &StateSpace, x: &[f64], y: &[f64], ctx: &Ctx) -> Result<EntropyResult> {
    relative_entropy_with(k, x, y, Method::ExactPwl, ctx)
}

/// `D(x‖y)` for cone elements with equal unit value (states, or common multiples of states).
pub fn relative_entropy_with(k: &StateSpace, x: &[f64], y: &[f64], method: Method, ctx: &Ctx) -> Result<EntropyResult> {
    let (mass, xn, yn) = normalize_pair(k, x, y, ctx)?;
    let (mu, lambda) = geometry::order_bounds(k, &xn, &yn, ctx)?;
    let mu = mu.max(0.0);
    let tail = lambda.ln() + 1.0 - lambda;
    let mut h = Integrand {
        k,
        x: &xn,
        y: &yn,
        ctx,
        evals: 0,
    };
    let (integral, lower, upper, pieces) = if lambda - mu <= f64::EPSILON * lambda {
        (0.0, 0.0, 0.0, 0)
    } else {
        match method {
            Method::ExactPwl => {
                let pieces = envelope(&mut h, mu, lambda)?;
                let mut total = 0.0;
                for &(s1, s2, l) in &pieces {
                    total += integrate_line(l, s1, s2);
                }
                // Lines come from LP vertices that are feasible to the solver tolerance.
                let slack = ctx.tol.solver * (lambda - mu + 1.0);
                (total, total - slack, total + slack, pieces.len())
            }
            Method::Adaptive { tol } => {
                let (lo, hi, n) = adaptive(&mut h, mu, lambda, tol)?;
                (0.5 * (lo + hi), lo, hi, n)
            }
        }
    };
    Ok(EntropyResult {
        value: mass * (integral + tail),
        lower: mass * (lower + tail),
        upper: mass * (upper + tail),
        mu,
        lambda,
        method,
        pieces,
    })
}

/// Linear pieces of `h` on `[lo, hi]`, sorted by `s`.
fn envelope(h: &mut Integrand, lo: f64, hi: f64) -> Result<Vec<(f64, f64, Line)>> {
    let (_, left) = h.eval(lo)?;
    let (_, right) = h.eval(hi)?;
    let mut out = Vec::new();
    walk(h, lo, left, hi, right, &mut out, 0)?;
    Ok(out)
}

fn walk(h: &mut Integrand, s_l: f64, l: Line, s_r: f64, r: Line, out: &mut Vec<(f64, f64, Line)>, depth: usize) -> Result<()> {
    if depth > 200 {
        return Err(Error::Degenerate("breakpoint search did not terminate".into()));
    }
    let same = (l.a - r.a).abs() <= 1e-12 && (l.b - r.b).abs() <= 1e-12;
    let slope_gap = r.a - l.a;
    if same || slope_gap <= 1e-13 {
        let mid = 0.5 * (s_l + s_r);
        out.push((s_l, s_r, if l.at(mid) >= r.at(mid) { l } else { r }));
        return Ok(());
    }
    let s = ((r.b - l.b) / slope_gap).clamp(s_l, s_r);
    let (value, m) = h.eval(s)?;
    if value <= l.at(s).max(r.at(s)) + 1e-11 * (1.0 + value.abs()) {
        out.push((s_l, s, l));
        out.push((s, s_r, r));
        return Ok(());
    }
    walk(h, s_l, l, s, m, out, depth + 1)?;
    walk(h, s, m, s_r, r, out, depth + 1)
}

struct Node {
    s: f64,
    value: f64,
    line: Line,
}

/// Lower bound from the two supporting lines, upper bound from the chord.
fn enclose(p: &Node, q: &Node) -> (f64, f64) {
    let (s1, s2) = (p.s, q.s);
    let chord_a = (q.value - p.value) / (s2 - s1);
    let chord = Line {
        a: chord_a,
        b: chord_a * s1 - p.value,
    };
    let upper = integrate_line(chord, s1, s2);
    let gap = q.line.a - p.line.a;
    let lower = if gap > 1e-15 {
        let x = ((q.line.b - p.line.b) / gap).clamp(s1, s2);
        integrate_line(p.line, s1, x) + integrate_line(q.line, x, s2)
    } else {
        let mid = 0.5 * (s1 + s2);
        let best = if p.line.at(mid) >= q.line.at(mid) { p.line } else { q.line };
        integrate_line(best, s1, s2)
    };
    (lower.min(upper), upper)
}

fn adaptive(h: &mut Integrand, lo: f64, hi: f64, tol: f64) -> Result<(f64, f64, usize)> {
    let mk = |h: &mut Integrand, s: f64| -> Result<Node> {
        let (value, line) = h.eval(s)?;
        Ok(Node { s, value, line })
    };
    let mut nodes = vec![mk(h, lo)?, mk(h, hi)?];
    let max_evals = 4000;
    loop {
        let bounds: Vec<(f64, f64)> = nodes.windows(2).map(|w| enclose(&w[0], &w[1])).collect();
        let lower: f64 = bounds.iter().map(|b| b.0).sum();
        let upper: f64 = bounds.iter().map(|b| b.1).sum();
        if upper - lower <= tol {
            return Ok((lower, upper, bounds.len()));
        }
        if h.evals >= max_evals {
            return Err(Error::EnclosureTooWide { lower, upper, tol });
        }
        let (worst, _) = bounds
            .iter()
            .enumerate()
            .map(|(i, b)| (i, b.1 - b.0))
            .fold((0, f64::NEG_INFINITY), |acc, it| if it.1 > acc.1 { it } else { acc });
        let (s1, s2) = (nodes[worst].s, nodes[worst + 1].s);
        let s = if s1 > 0.0 { (s1 * s2).sqrt() } else { 0.5 * s2 };
        let node = mk(h, s)?;
        nodes.insert(worst + 1, node);
    }
}

/// `Σ p_i ln(p_i/q_i)` with `0 ln 0 = 0`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::InvalidInput("distributions of different length".into()));
    }
    let mut total = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi > 0.0 {
            if qi <= 0.0 {
                return Err(Error::SupportMismatch { index: i });
            }
            total += pi * (pi / qi).ln();
        }
    }
    Ok(total)
}

/// `D(x‖y) − ½ sup_{f∈E(K)} f(x − y)²`.
pub fn pinsker_gap(k: &StateSpace, x: &[f64], y: &[f64], ctx: &Ctx) -> Result<f64> {
    let d = relative_entropy(k, x, y, ctx)?;
    let tv = geometry::effect_sup(k, &linalg::sub(x, y), ctx)?;
    Ok(d.value - 0.5 * tv * tv)
}

/// `D(x_AB ‖ τ_A ⊗ x_B)`, an upper bound on the mutual information.
pub fn mutual_information_upper(p: &ProductSpace, x_ab: &[f64], tau_a: &[f64], ctx: &Ctx) -> Result<f64> {
    let xb = p.marginal_b(x_ab);
    let y = p.product(tau_a, &xb);
    let k = p.as_state_space(ctx)?;
    Ok(relative_entropy(&k, x_ab, &y, ctx)?.value)
}

/// `D(x_AB ‖ x_A ⊗ x_B)`; no relation to the infimum over `y_A` is asserted.
pub fn mutual_information_product_reference(p: &ProductSpace, x_ab: &[f64], ctx: &Ctx) -> Result<f64> {
    let y = p.product(&p.marginal_a(x_ab), &p.marginal_b(x_ab));
    let k = p.as_state_space(ctx)?;
    Ok(relative_entropy(&k, x_ab, &y, ctx)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeFinettiConstants {
    pub lambda_a: f64,
    pub c_a: f64,
    pub f_ab: f64,
    pub c_ab: f64,
    pub tau_a: Vec<f64>,
    pub injectivity: InjectivityConstant,
}

pub fn monogamy_constant(lambda: f64) -> f64 {
    lambda * (1.0 + lambda.ln())
}

pub fn definetti_constants(p: &ProductSpace, m_a: &Measurement, m_b: &Measurement, ctx: &Ctx) -> Result<DeFinettiConstants> {
    let (tau_a, lambda_a) = geometry::optimize_tau(&p.a, ctx)?;
    let c_a = monogamy_constant(lambda_a);
    let injectivity = geometry::injectivity_constant(p, m_a, m_b, ctx)?;
    let f_ab = injectivity.value;
    Ok(DeFinettiConstants {
        lambda_a,
        c_a,
        f_ab,
        c_ab: (2.0 * c_a).sqrt() / f_ab,
        tau_a,
        injectivity,
    })
}

/// `2 c_AB / √n`.
pub fn definetti_bound(c: &DeFinettiConstants, n: usize) -> f64 {
    2.0 * c.c_ab / (n as f64).sqrt()
}
