use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, SolveOutcome};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use conic_definetti::solver::{DenseSimplex, LinearProgram, LpBackend, Route, Sense, Status};

/// A bounded LP with a known feasible point; some variables are free and
/// only boxed through inequality rows.
fn random_lp(seed: u64) -> LinearProgram {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let n = 20;
    let x0: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let sense = if seed % 2 == 0 { Sense::Min } else { Sense::Max };
    let mut lp = LinearProgram::new(format!("random-{seed}"), sense, (0..n).map(|_| r.random_range(-1.0..1.0)).collect());
    let row = |r: &mut ChaCha8Rng| -> Vec<f64> {
        (0..n).map(|_| if r.random::<f64>() < 0.4 { r.random_range(-2.0..2.0) } else { 0.0 }).collect()
    };
    for _ in 0..4 {
        let a = row(&mut r);
        let b = a.iter().zip(&x0).map(|(a, x)| a * x).sum();
        lp.add_eq(a, b);
    }
    for _ in 0..12 {
        let a = row(&mut r);
        let b: f64 = a.iter().zip(&x0).map(|(a, x)| a * x).sum::<f64>();
        if r.random::<bool>() {
            lp.add_ge(a, b - r.random_range(0.0..0.5));
        } else {
            lp.add_le(a, b + r.random_range(0.0..0.5));
        }
    }
    for (j, &x) in x0.iter().enumerate() {
        match j % 4 {
            0 => {
                let mut e = vec![0.0; n];
                e[j] = 1.0;
                lp.add_le(e.clone(), x + 2.0);
                lp.add_ge(e, x - 2.0);
            }
            1 => lp.set_lower(j, x - 1.5),
            2 => lp.set_upper(j, x + 1.5),
            _ => {
                lp.set_lower(j, x - 1.0);
                lp.set_upper(j, x + 1.0);
            }
        }
    }
    // Variables with a single bound get the other one through a row.
    for j in (1..n).step_by(4).chain((2..n).step_by(4)) {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        if j % 4 == 1 {
            lp.add_le(e, x0[j] + 3.0);
        } else {
            lp.add_ge(e, x0[j] - 3.0);
        }
    }
    lp
}

fn oracle(lp: &LinearProgram) -> f64 {
    let dir = match lp.sense {
        Sense::Min => OptimizationDirection::Minimize,
        Sense::Max => OptimizationDirection::Maximize,
    };
    let mut p = Problem::new(dir);
    let vars: Vec<_> = (0..lp.num_vars())
        .map(|j| {
            let lo = lp.lower[j].unwrap_or(f64::NEG_INFINITY);
            let hi = lp.upper[j].unwrap_or(f64::INFINITY);
            p.add_var(lp.objective[j], (lo, hi))
        })
        .collect();
    let expr = |row: &[f64]| -> LinearExpr { row.iter().enumerate().filter(|(_, &v)| v != 0.0).map(|(j, &v)| (vars[j], v)).collect() };
    for (row, &b) in lp.eq_rows.iter().zip(&lp.eq_rhs) {
        p.add_constraint(expr(row), ComparisonOp::Eq, b);
    }
    for (row, &b) in lp.ineq_rows.iter().zip(&lp.ineq_rhs) {
        p.add_constraint(expr(row), ComparisonOp::Ge, b);
    }
    match p.solve().expect("oracle solves") {
        SolveOutcome::Solution(s) => s.objective(),
        other => panic!("oracle interrupted: {other:?}"),
    }
}

#[test]
fn random_lps_match_reference_solver() {
    for seed in 0..40 {
        let lp = random_lp(seed);
        let want = oracle(&lp);
        for route in [Route::Primal, Route::Dual, Route::Auto] {
            let sol = DenseSimplex::with_route(route).solve(&lp).unwrap();
            assert_eq!(sol.status, Status::Optimal, "seed {seed} {route:?}");
            assert!((sol.objective - want).abs() <= 1e-8 * (1.0 + want.abs()), "seed {seed} {route:?}: {} vs {want}", sol.objective);
            assert!(sol.max_violation() <= 1e-8, "seed {seed} {route:?}");
        }
    }
}

#[test]
fn weak_duality_certificate() {
    // min c·x, A_eq x = b, A_in x ≥ h, x ≥ 0: the duals give b·u + h·v ≤ c·x.
    let mut lp = LinearProgram::new("dual", Sense::Min, vec![2.0, 3.0, 1.0]);
    lp.add_eq(vec![1.0, 1.0, 1.0], 4.0);
    lp.add_ge(vec![1.0, -1.0, 0.0], -1.0);
    lp.add_ge(vec![0.0, 1.0, 2.0], 3.0);
    lp.set_nonnegative(0..3);
    let sol = DenseSimplex::default().solve(&lp).unwrap();
    assert_eq!(sol.status, Status::Optimal);
    assert!(sol.ineq_duals.iter().all(|&v| v >= -1e-12));
    let dual_obj = 4.0 * sol.eq_duals[0] - sol.ineq_duals[0] + 3.0 * sol.ineq_duals[1];
    assert!((dual_obj - sol.objective).abs() <= 1e-9);
}
