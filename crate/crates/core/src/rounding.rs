//! Inner bounds from an optimal extension: measure `m` of the `B` copies,
//! condition on the outcome, and keep product terms that satisfy the
//! original constraints.

use serde::{Deserialize, Serialize};

use crate::config::Ctx;
use crate::error::{Error, Result};
use crate::geometry::{self, Measurement};
use crate::hierarchy::{LocalProblem, OuterReport};
use crate::linalg::{self, dot};
use crate::tensor::{self, SymExtension, SymSpace};

/// Outcomes whose probability falls below this are dropped and accounted for.
pub const P_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    /// Outcome multiset, nondecreasing.
    pub z: Vec<usize>,
    /// Number of ordered tuples with this multiset.
    pub multiplicity: f64,
    /// Total probability of the multiset.
    pub probability: f64,
    pub x_a: Vec<f64>,
    pub x_b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalEnsemble {
    pub m: usize,
    pub outcomes: Vec<Outcome>,
    pub dropped_mass: f64,
    pub measurement: Measurement,
}

fn multiplicity(z: &[usize]) -> f64 {
    let fact = |k: usize| (1..=k).map(|i| i as f64).product::<f64>();
    let mut denom = 1.0;
    let mut run = 1;
    for w in z.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            denom *= fact(run);
            run = 1;
        }
    }
    if !z.is_empty() {
        denom *= fact(run);
    }
    fact(z.len()) / denom
}

/// Conditional product states after measuring `m` of the `n` B-copies of `y`.
pub fn conditionals(y: &SymExtension, unit_a: &[f64], unit_b: &[f64], meas: &Measurement, m: usize, ctx: &Ctx) -> Result<ConditionalEnsemble> {
    if m >= y.n {
        return Err(Error::InvalidInput(format!("m = {m} must be below n = {}", y.n)));
    }
    if meas.effects.iter().any(|e| e.len() != y.d_b) || unit_a.len() != y.d_left || unit_b.len() != y.d_b {
        return Err(Error::InvalidInput("measurement or units do not match the extension".into()));
    }
    let k = meas.outcome_count();
    let count = tensor::sym_dimension(k, m);
    if count > ctx.caps.enumeration {
        return Err(Error::EnumerationOverflow { count, cap: ctx.caps.enumeration });
    }
    let space = SymSpace::new(y.d_b, y.n, usize::MAX)?;
    let mut ensemble = ConditionalEnsemble {
        m,
        outcomes: Vec::with_capacity(count),
        dropped_mass: 0.0,
        measurement: meas.clone(),
    };
    let mut z = Vec::with_capacity(m);
    descend(&space, y, unit_a, unit_b, meas, m, 0, &mut z, &mut ensemble)?;
    Ok(ensemble)
}

#[allow(clippy::too_many_arguments)]
fn descend(
    space: &SymSpace,
    y: &SymExtension,
    unit_a: &[f64],
    unit_b: &[f64],
    meas: &Measurement,
    m: usize,
    first: usize,
    z: &mut Vec<usize>,
    out: &mut ConditionalEnsemble,
) -> Result<()> {
    if z.len() == m {
        let xab = space.partial_unit(y, unit_b, 1)?.coeffs;
        let (da, db) = (unit_a.len(), unit_b.len());
        let xa: Vec<f64> = (0..da).map(|i| dot(&xab[i * db..(i + 1) * db], unit_b)).collect();
        let xb: Vec<f64> = (0..db).map(|kk| (0..da).map(|i| unit_a[i] * xab[i * db + kk]).sum()).collect();
        let p = dot(unit_a, &xa);
        let mult = multiplicity(z);
        if p < P_FLOOR {
            out.dropped_mass += mult * p;
            return Ok(());
        }
        out.outcomes.push(Outcome {
            z: z.clone(),
            multiplicity: mult,
            probability: mult * p,
            x_a: linalg::scale(1.0 / p, &xa),
            x_b: linalg::scale(1.0 / p, &xb),
        });
        return Ok(());
    }
    for (j, e) in meas.effects.iter().enumerate().skip(first) {
        let next = space.contract_covector(e, y)?;
        z.push(j);
        descend(space, &next, unit_a, unit_b, meas, m, j, z, out)?;
        z.pop();
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureSummary {
    pub m: usize,
    /// `P(w)` of the probability-weighted mixture of retained terms.
    pub value: f64,
    pub retained_mass: f64,
    pub dropped_mass: f64,
    pub terms: usize,
    pub certified_terms: usize,
    /// Largest term residual.
    pub worst_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerReport {
    pub problem_hash: String,
    pub level: usize,
    pub best_value: f64,
    pub best_x_a: Vec<f64>,
    pub best_x_b: Vec<f64>,
    pub m_star: usize,
    pub best_outcome: Vec<usize>,
    pub residual: f64,
    pub p_n: f64,
    pub gap_to_outer: f64,
    /// `2‖P‖ c_AB / √n`.
    pub certified_bound: f64,
    pub mixtures: Vec<MixtureSummary>,
    pub measurement: Measurement,
}

/// Searches every `m < n` and outcome for the certified product term with the smallest `P`.
pub fn inner_search(problem: &LocalProblem, outer: &OuterReport, meas: Option<&Measurement>, ctx: &Ctx) -> Result<InnerReport> {
    let meas = match meas {
        Some(m) => m.clone(),
        None => geometry::ic_measurement(&problem.b, ctx)?,
    };
    meas.check(&problem.b, ctx.tol.feasibility)?;
    let y = &outer.y_opt;
    let tol = ctx.tol.feasibility;
    let mut best: Option<(f64, usize, Outcome, f64)> = None;
    let mut smallest_residual = f64::INFINITY;
    let mut mixtures = Vec::with_capacity(y.n);
    for m in 0..y.n {
        let ens = conditionals(y, &problem.a.unit, &problem.b.unit, &meas, m, ctx)?;
        let mut summary = MixtureSummary {
            m,
            value: 0.0,
            retained_mass: 0.0,
            dropped_mass: ens.dropped_mass,
            terms: ens.outcomes.len(),
            certified_terms: 0,
            worst_residual: 0.0,
        };
        for o in ens.outcomes {
            let value = problem.value(&o.x_a, &o.x_b);
            let residual = problem.residual(&o.x_a, &o.x_b);
            summary.value += o.probability * value;
            summary.retained_mass += o.probability;
            summary.worst_residual = summary.worst_residual.max(residual);
            smallest_residual = smallest_residual.min(residual);
            if residual > tol {
                continue;
            }
            summary.certified_terms += 1;
            if best.as_ref().is_none_or(|b| value < b.0) {
                best = Some((value, m, o, residual));
            }
        }
        if summary.retained_mass > 0.0 {
            summary.value /= summary.retained_mass;
        }
        mixtures.push(summary);
    }
    let Some((value, m_star, o, residual)) = best else {
        return Err(Error::NoFeasibleTerm { worst: smallest_residual });
    };
    Ok(InnerReport {
        problem_hash: outer.problem_hash.clone(),
        level: outer.level,
        best_value: value,
        best_x_a: o.x_a,
        best_x_b: o.x_b,
        m_star,
        best_outcome: o.z,
        residual,
        p_n: outer.p_n,
        gap_to_outer: value - outer.p_n,
        certified_bound: outer.error_bound,
        mixtures,
        measurement: meas,
    })
}
