use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use conic_definetti::entropy::{self, EntropyResult, Method};
use conic_definetti::games::{self, GameLevel, GameSpec, SeesawResult};
use conic_definetti::geometry;
use conic_definetti::hash::content_hash;
use conic_definetti::hierarchy::{self, LocalProblem, OuterReport, Prepared};
use conic_definetti::rounding::{self, InnerReport};
use conic_definetti::solver::{DenseSimplex, LinearProgram, LpBackend, ProcessBackend, Route};
use conic_definetti::{Caps, Ctx, Error, StateSpace, Tolerances};

#[derive(Parser)]
#[command(name = "cdf", version, about = "Outer and inner bounds for bilinear problems over polytopal state spaces")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Feasibility tolerance.
    #[arg(long, env = "CDF_TOL", global = true)]
    tol: Option<f64>,
    /// Largest allowed product-space dimension.
    #[arg(long, env = "CDF_CAP_DIM", global = true)]
    cap_dim: Option<usize>,
    /// Largest allowed enumeration size.
    #[arg(long, env = "CDF_CAP_ENUM", global = true)]
    cap_enum: Option<usize>,
    #[arg(long, env = "CDF_SEED", global = true, default_value_t = 0)]
    seed: u64,
    /// `simplex`, `simplex-primal`, `simplex-dual`, or `cmd:<program args…>`.
    #[arg(long, env = "CDF_BACKEND", global = true, default_value = "simplex")]
    backend: String,
    /// Directory for cached vertex enumerations and level reports.
    #[arg(long, env = "CDF_CACHE", global = true)]
    cache: Option<PathBuf>,
    /// Directory for report.json and summary.csv.
    #[arg(long, env = "CDF_OUT", global = true)]
    out: Option<PathBuf>,
    /// Print a human-readable summary instead of JSON.
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Relative entropy D(x || y) on a state space.
    Entropy {
        /// State space: a JSON file, `square`, `simplex:<d>` or `polygon:<k>`.
        #[arg(long)]
        space: String,
        /// JSON array, homogeneous coordinates.
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
        method: MethodArg,
        /// Enclosure width for the adaptive method.
        #[arg(long, default_value_t = 1e-8)]
        enclosure_tol: f64,
    },
    /// Hierarchy levels 1..=n with optional rounding.
    Solve {
        problem: PathBuf,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Run the inner search at every level.
        #[arg(long)]
        round: bool,
    },
    /// Bounds on a two-player game with a GPT system.
    Game {
        game: PathBuf,
        #[arg(long)]
        space: String,
        #[arg(long, default_value_t = 2)]
        levels: usize,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
    },
    /// Solve an LP read as JSON from stdin; prints the solution JSON.
    #[command(hide = true)]
    LpSolve,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Exact,
    Adaptive,
}

#[derive(Serialize)]
struct RunConfig {
    tol: Tolerances,
    caps: Caps,
    seed: u64,
    backend: String,
}

fn build_ctx(args: &RunArgs) -> Result<(Ctx, RunConfig), Error> {
    let mut ctx = Ctx::default();
    if let Some(t) = args.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidInput("--tol must be positive".into()));
        }
        ctx.tol.feasibility = t;
    }
    for (cap, slot) in [(args.cap_dim, &mut ctx.caps.dim), (args.cap_enum, &mut ctx.caps.enumeration)] {
        if let Some(c) = cap {
            if c == 0 {
                return Err(Error::InvalidInput("caps must be positive".into()));
            }
            *slot = c;
        }
    }
    ctx.seed = args.seed;
    ctx.cache_dir = args.cache.clone();
    ctx.backend = match args.backend.as_str() {
        "simplex" => Arc::new(DenseSimplex::default()),
        "simplex-primal" => Arc::new(DenseSimplex::with_route(Route::Primal)),
        "simplex-dual" => Arc::new(DenseSimplex::with_route(Route::Dual)),
        other => match other.strip_prefix("cmd:") {
            Some(cmd) => Arc::new(ProcessBackend::from_command_line(cmd)?) as Arc<dyn LpBackend>,
            None => return Err(Error::InvalidInput(format!("unknown backend '{other}'"))),
        },
    };
    let config = RunConfig {
        tol: ctx.tol,
        caps: ctx.caps,
        seed: ctx.seed,
        backend: args.backend.clone(),
    };
    Ok((ctx, config))
}

fn load_space(spec: &str, ctx: &Ctx) -> Result<StateSpace, Error> {
    let parse_n = |s: &str| s.parse::<usize>().map_err(|_| Error::InvalidInput(format!("bad size in '{spec}'")));
    let k = if spec == "square" {
        StateSpace::square()
    } else if let Some(d) = spec.strip_prefix("simplex:") {
        StateSpace::simplex(parse_n(d)?)
    } else if let Some(k) = spec.strip_prefix("polygon:") {
        StateSpace::regular_polygon(parse_n(k)?)
    } else {
        StateSpace::from_json(&std::fs::read_to_string(spec)?, ctx)?
    };
    k.ensure_valid(ctx)?;
    Ok(k)
}

fn parse_vector(text: &str) -> Result<Vec<f64>, Error> {
    Ok(serde_json::from_str(text)?)
}

struct Output {
    json: serde_json::Value,
    pretty: String,
    csv: Option<String>,
}

fn cmd_entropy(ctx: &Ctx, config: &RunConfig, space: &str, x: &str, y: &str, method: MethodArg, enclosure_tol: f64) -> Result<Output, Error> {
    let k = load_space(space, ctx)?;
    let (x, y) = (parse_vector(x)?, parse_vector(y)?);
    let method = match method {
        MethodArg::Exact => Method::ExactPwl,
        MethodArg::Adaptive => Method::Adaptive { tol: enclosure_tol },
    };
    let result: EntropyResult = entropy::relative_entropy_with(&k, &x, &y, method, ctx)?;
    let (tau, lambda) = geometry::optimize_tau(&k, ctx)?;
    let json = json!({
        "command": "entropy",
        "input_hash": content_hash(&(&k, &x, &y)),
        "config": config,
        "constants": {
            "lambda": lambda,
            "c": entropy::monogamy_constant(lambda),
            "tau": tau,
        },
        "result": result,
    });
    let pretty = format!(
        "D(x || y) = {:.9}  [{:.9}, {:.9}]\nmu = {:.6}, lambda = {:.6}, pieces = {}\n",
        result.value, result.lower, result.upper, result.mu, result.lambda, result.pieces
    );
    Ok(Output { json, pretty, csv: None })
}

#[derive(Serialize)]
struct SummaryRow {
    level: usize,
    outer: f64,
    inner: Option<f64>,
    bound: f64,
}

#[derive(Serialize)]
#[serde(untagged)]
enum InnerOutcome {
    Report(Box<InnerReport>),
    Failed { level: usize, error: String },
}

fn cmd_solve(ctx: &Ctx, config: &RunConfig, path: &Path, levels: usize, round: bool) -> Result<Output, Error> {
    let problem = LocalProblem::from_json(&std::fs::read_to_string(path)?, ctx)?;
    let store = ctx.cache_dir.as_ref().map(|d| d.join("levels"));
    let schedule = hierarchy::run_schedule(&problem, levels, ctx, store.as_deref())?;
    let mut inner: Vec<InnerOutcome> = Vec::new();
    let mut rows = Vec::new();
    for outer in &schedule.reports {
        let value = if round {
            match rounding::inner_search(&problem, outer, None, ctx) {
                Ok(r) => {
                    let v = r.best_value;
                    inner.push(InnerOutcome::Report(Box::new(r)));
                    Some(v)
                }
                Err(e) if e.is_solver_failure() => return Err(e),
                Err(e) => {
                    inner.push(InnerOutcome::Failed {
                        level: outer.level,
                        error: e.to_string(),
                    });
                    None
                }
            }
        } else {
            None
        };
        rows.push(SummaryRow {
            level: outer.level,
            outer: outer.p_n,
            inner: value,
            bound: outer.error_bound,
        });
    }
    let best_outer = rows.iter().map(|r| r.outer).fold(f64::NEG_INFINITY, f64::max);
    let best_inner = rows.iter().filter_map(|r| r.inner).fold(f64::INFINITY, f64::min);
    let sandwich = round.then(|| best_outer <= best_inner + ctx.tol.feasibility * (1.0 + best_inner.abs()));
    let first: &OuterReport = &schedule.reports[0];
    let json = json!({
        "command": "solve",
        "input_hash": schedule.problem_hash,
        "config": config,
        "constants": first.constants,
        "p_norm": first.p_norm,
        "p_norm_method": first.p_norm_method,
        "monotone": schedule.monotone,
        "sandwich": sandwich,
        "error": schedule.error,
        "summary": rows,
        "outer": schedule.reports,
        "inner": inner,
    });
    let mut pretty = String::new();
    let c = &first.constants;
    let _ = writeln!(
        pretty,
        "problem {}\nlambda_A = {:.6}  c_A = {:.6}  f_AB = {:.6e}  c_AB = {:.6}  |P| = {:.6}",
        &schedule.problem_hash[..16],
        c.lambda_a,
        c.c_a,
        c.f_ab,
        c.c_ab,
        first.p_norm
    );
    let _ = writeln!(pretty, "{:>5}  {:>14}  {:>14}  {:>14}", "level", "outer", "inner", "bound");
    let mut csv = String::from("level,outer,inner,bound\n");
    for r in &rows {
        let inner = r.inner.map(|v| format!("{v:.10}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(pretty, "{:>5}  {:>14.10}  {:>14}  {:>14.6e}", r.level, r.outer, inner, r.bound);
        let _ = writeln!(csv, "{},{},{},{}", r.level, r.outer, r.inner.map(|v| v.to_string()).unwrap_or_default(), r.bound);
    }
    let _ = writeln!(pretty, "monotone: {}", schedule.monotone);
    if let Some(ok) = sandwich {
        let _ = writeln!(pretty, "sandwich: {ok}");
    }
    if let Some(e) = &schedule.error {
        let _ = writeln!(pretty, "stopped early: {e}");
    }
    Ok(Output { json, pretty, csv: Some(csv) })
}

fn cmd_game(ctx: &Ctx, config: &RunConfig, path: &Path, space: &str, levels: usize, restarts: usize) -> Result<Output, Error> {
    let game = GameSpec::from_json(&std::fs::read_to_string(path)?)?;
    let kb = load_space(space, ctx)?;
    let cg = games::compile_game(&game, &kb, ctx)?;
    let classical = match games::classical_value(&game, ctx) {
        Ok(v) => Some(v),
        Err(Error::EnumerationOverflow { .. }) => None,
        Err(e) => return Err(e),
    };
    let seesaw: SeesawResult = games::seesaw_lower(&cg, restarts, ctx)?;
    let prepared = Prepared::new(&cg.problem, ctx)?;
    let mut upper: Vec<GameLevel> = Vec::new();
    for n in 1..=levels {
        let r = prepared.solve_level(n, ctx)?;
        upper.push(GameLevel {
            level: n,
            upper: -r.p_n,
            error_bound: r.error_bound,
        });
    }
    let json = json!({
        "command": "game",
        "input_hash": cg.hash(),
        "config": config,
        "constants": prepared.constants,
        "p_norm": prepared.p_norm,
        "free": cg.free,
        "assemblage_dim": cg.problem.a.dim,
        "multimeter_dim": cg.problem.b.dim,
        "classical": classical,
        "seesaw": seesaw,
        "levels": upper,
    });
    let mut pretty = String::new();
    let _ = writeln!(pretty, "game over {} (free: {})", kb.label, cg.free);
    if let Some(c) = classical {
        let _ = writeln!(pretty, "classical  {c:.10}");
    }
    let _ = writeln!(pretty, "seesaw     {:.10}", seesaw.value);
    let mut csv = String::from("level,upper,seesaw,bound\n");
    for l in &upper {
        let _ = writeln!(pretty, "level {:<3}  {:.10}", l.level, l.upper);
        let _ = writeln!(csv, "{},{},{},{}", l.level, l.upper, seesaw.value, l.error_bound);
    }
    Ok(Output { json, pretty, csv: Some(csv) })
}

fn cmd_lp_solve(ctx: &Ctx) -> Result<(), Error> {
    let mut text = String::new();
    std::io::stdin().read_to_string(&mut text)?;
    let lp: LinearProgram = serde_json::from_str(&text)?;
    let sol = ctx.backend.solve(&lp)?;
    println!("{}", serde_json::to_string(&sol)?);
    Ok(())
}

fn emit(out: Output, args: &RunArgs) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(&out.json)?;
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), format!("{text}\n"))?;
        if let Some(csv) = &out.csv {
            std::fs::write(dir.join("summary.csv"), csv)?;
        }
    }
    if args.pretty {
        print!("{}", out.pretty);
    } else {
        println!("{text}");
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    let (ctx, config) = build_ctx(&cli.run)?;
    let out = match cli.command {
        Command::Entropy {
            space,
            x,
            y,
            method,
            enclosure_tol,
        } => cmd_entropy(&ctx, &config, &space, &x, &y, method, enclosure_tol)?,
        Command::Solve { problem, levels, round } => cmd_solve(&ctx, &config, &problem, levels, round)?,
        Command::Game {
            game,
            space,
            levels,
            restarts,
        } => cmd_game(&ctx, &config, &game, &space, levels, restarts)?,
        Command::LpSolve => return cmd_lp_solve(&ctx),
    };
    emit(out, &cli.run)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_solver_failure() { 3 } else { 2 })
        }
    }
}
