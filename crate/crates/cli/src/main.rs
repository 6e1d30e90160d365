//! `fsc-bounds`: capacity lower bounds for input-driven finite-state channels.
//!
//! Exit status is 0 when every check passes, 1 when a check fails and 2 on
//! usage, file or validation errors.

mod fmt;
mod source;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fsc_bounds::channel::{make_rll_dmc, Fsc, RllSpec, RunLimit};
use fsc_bounds::dp::{bellman_residuals, solve_average_reward, SolverOptions};
use fsc_bounds::oracle::conservation_suite;
use fsc_bounds::vgraph::{build_product, optimize_q, single_letter_report, QOptimizerOptions};
use rayon::prelude::*;

use crate::fmt::{join, sig};
use crate::source::{load_vgraph, ChannelArgs, Family, Source, VGraphFamily};

/// Allowed gap between the dynamic program and the matching closed form.
const CROSS_CHECK_TOL: f64 = 1e-6;
/// Allowed optimality gap of the closed-form maximization.
const CLOSED_FORM_GAP_TOL: f64 = 1e-9;
const STATIONARY_TOL: f64 = 1e-12;

#[derive(Parser)]
#[command(name = "fsc-bounds", version, about = "Capacity lower bounds for input-driven finite-state channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one bound and cross-check it.
    Bound(BoundArgs),
    /// Evaluate bounds over a parameter grid and write CSV.
    Sweep(SweepArgs),
    /// Check the Bellman equation for a solution, and optionally run the oracle suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Dp,
    #[value(name = "closed_form", alias = "closed-form")]
    ClosedForm,
    Vgraph,
}

impl Method {
    fn tag(self) -> &'static str {
        match self {
            Method::Dp => "dp",
            Method::ClosedForm => "closed_form",
            Method::Vgraph => "vgraph",
        }
    }
}

#[derive(Debug, Clone, Args)]
struct SolverArgs {
    /// Required Bellman residual.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    /// Coarse grid of the scalar inner maximization.
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Optimizer restarts (default 8 for dp, 16 for vgraph).
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverArgs {
    fn dp(&self) -> SolverOptions {
        SolverOptions {
            tolerance: self.tol,
            max_iterations: self.max_iters,
            grid_points: self.grid,
            restarts: self.restarts.unwrap_or(8),
            seed: self.seed,
        }
    }

    fn q(&self) -> QOptimizerOptions {
        QOptimizerOptions { restarts: self.restarts.unwrap_or(16), seed: self.seed }
    }
}

#[derive(Debug, Clone, Args)]
struct VGraphArgs {
    /// JSON V-graph file.
    #[arg(long)]
    vgraph: Option<PathBuf>,
    /// Built-in V-graph, used when no file is given.
    #[arg(long, value_enum, default_value = "constraint")]
    vgraph_family: VGraphFamily,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    #[arg(long, value_enum, default_value = "dp")]
    method: Method,
    #[command(flatten)]
    vgraph: VGraphArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Comma-separated list of d values.
    #[arg(long, value_delimiter = ',', required = true)]
    d: Vec<usize>,
    #[arg(long, default_value = "inf")]
    k: RunLimit,
    /// Swept parameter: `p` for bsc, `eps` for bec.
    #[arg(long)]
    param: String,
    #[arg(long)]
    from: f64,
    #[arg(long)]
    to: f64,
    #[arg(long)]
    points: usize,
    /// Comma-separated list of methods.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "dp")]
    method: Vec<Method>,
    #[command(flatten)]
    vgraph: VGraphArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    channel: ChannelArgs,
    /// Average reward to check instead of the solver's.
    #[arg(long, requires = "h", allow_hyphen_values = true)]
    rho: Option<f64>,
    /// Comma-separated relative values, one per state.
    #[arg(long, requires = "rho", value_delimiter = ',', allow_hyphen_values = true)]
    h: Option<Vec<f64>>,
    /// Added to rho before checking.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    rho_offset: f64,
    /// Also run the conservation-law suite.
    #[arg(long)]
    oracle: bool,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// One evaluated bound.
struct Evaluation {
    value: f64,
    residual: f64,
    argmax: Vec<f64>,
    passed: bool,
    report: String,
}

fn describe(source: &Source) -> String {
    match source.builtin {
        Some((family, spec, param)) => {
            let name = if family == Family::Bsc { "p" } else { "eps" };
            format!("{spec}-RLL {}({name}={param})", family.tag().to_uppercase())
        }
        None => format!("file with {} states", source.fsc.num_states()),
    }
}

fn evaluate(method: Method, source: &Source, vg: &VGraphArgs, solver: &SolverArgs) -> Result<Evaluation> {
    let mut report = String::new();
    let fsc = &source.fsc;
    match method {
        Method::Dp => {
            let sol = solve_average_reward(fsc, &solver.dp())?;
            writeln!(report, "value: {}", sig(sol.rho, 12))?;
            for (s, row) in sol.policy.rows.iter().enumerate() {
                writeln!(report, "policy[{}]: {}", fsc.state_names[s], join(row))?;
            }
            writeln!(report, "bellman residual: {:e}", sol.bellman_residual)?;
            writeln!(report, "iterations: {} (converged: {})", sol.iterations, sol.converged)?;
            let mut passed = sol.converged && sol.bellman_residual <= solver.tol;
            if let Some((family, spec, param)) = source.builtin {
                let cf = family.closed_form(spec, param)?;
                let diff = (sol.rho - cf.value).abs();
                writeln!(report, "closed form: {}", sig(cf.value, 12))?;
                writeln!(report, "discrepancy: {diff:e}")?;
                passed &= diff <= CROSS_CHECK_TOL;
            }
            Ok(Evaluation {
                value: sol.rho,
                residual: sol.bellman_residual,
                argmax: sol.policy.free_parameters(fsc),
                passed,
                report,
            })
        }
        Method::ClosedForm => {
            let Some((family, spec, param)) = source.builtin else {
                bail!("closed_form needs a built-in --family channel");
            };
            let cf = family.closed_form(spec, param)?;
            writeln!(report, "value: {}", sig(cf.value, 12))?;
            writeln!(report, "argmax: {}", join(cf.argmax.as_slice()))?;
            writeln!(report, "optimality gap: {:e}", cf.gap)?;
            Ok(Evaluation {
                value: cf.value,
                residual: cf.gap,
                argmax: cf.argmax.as_slice().to_vec(),
                passed: cf.gap <= CLOSED_FORM_GAP_TOL && (0.0..=1.0).contains(&cf.value),
                report,
            })
        }
        Method::Vgraph => {
            let graph = load_vgraph(vg.vgraph.as_ref(), vg.vgraph_family, fsc)?;
            let (q, _) = optimize_q(fsc, &graph, &solver.q())?;
            let r = single_letter_report(fsc, &graph, &q)?;
            let pg = build_product(fsc, &graph);
            let argmax: Vec<f64> = (0..pg.num_nodes())
                .flat_map(|u| pg.feasible[u].iter().skip(1).map(move |&x| (u, x)))
                .map(|(u, x)| q.rows[u][x])
                .collect();
            writeln!(report, "value: {}", sig(r.value, 12))?;
            writeln!(report, "v-graph vertices: {} (v0 = {})", graph.num_vertices(), graph.names()[r.v0])?;
            for u in (0..pg.num_nodes()).filter(|&u| r.stationary.pi[u] > 0.0) {
                let (s, v) = pg.split(u);
                writeln!(
                    report,
                    "Q[{},{}]: {}  pi: {}",
                    fsc.state_names[s],
                    graph.names()[v],
                    join(&q.rows[u]),
                    sig(r.stationary.pi[u], 9)
                )?;
            }
            writeln!(report, "stationary residual: {:e}", r.stationary.residual)?;
            let mass_err = (r.stationary.joint_mass() - 1.0).abs();
            Ok(Evaluation {
                value: r.value,
                residual: r.stationary.residual,
                argmax,
                passed: r.stationary.residual <= STATIONARY_TOL && mass_err <= STATIONARY_TOL,
                report,
            })
        }
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(stdout.flush()?)
        }
    }
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn cmd_bound(args: &BoundArgs) -> Result<bool> {
    let source = args.channel.load()?;
    let eval = evaluate(args.method, &source, &args.vgraph, &args.solver)?;
    let mut text = format!("channel: {}\nmethod: {}\n", describe(&source), args.method.tag());
    text.push_str(&eval.report);
    text.push_str(&format!("check: {}\n", verdict(eval.passed)));
    emit(args.out.as_ref(), &text)?;
    Ok(eval.passed)
}

fn grid(from: f64, to: f64, points: usize) -> Result<Vec<f64>> {
    if points == 0 || !from.is_finite() || !to.is_finite() || from > to {
        bail!("empty range: --from {from} --to {to} --points {points}");
    }
    if points == 1 {
        return Ok(vec![from]);
    }
    Ok((0..points).map(|i| from + (to - from) * i as f64 / (points - 1) as f64).collect())
}

fn cmd_sweep(args: &SweepArgs) -> Result<bool> {
    let expected = if args.family == Family::Bsc { "p" } else { "eps" };
    if args.param != expected {
        bail!("--family {} sweeps --param {expected}, not {:?}", args.family.tag(), args.param);
    }
    let params = grid(args.from, args.to, args.points)?;
    let mut tasks = Vec::new();
    for &d in &args.d {
        let spec = RllSpec::new(d, args.k)?;
        for &param in &params {
            for &method in &args.method {
                tasks.push((spec, param, method));
            }
        }
    }
    let rows: Vec<Result<(String, bool)>> = tasks
        .par_iter()
        .map(|&(spec, param, method)| {
            let fsc: Fsc = make_rll_dmc(spec, args.family.dmc(param))?;
            let source = Source { fsc, builtin: Some((args.family, spec, param)) };
            let e = evaluate(method, &source, &args.vgraph, &args.solver)?;
            let ok = e.passed && (0.0..=1.0).contains(&e.value);
            let line = format!(
                "{},{},{},{},{},{},{},{}\n",
                args.family.tag(),
                spec.d(),
                spec.k(),
                sig(param, 9),
                sig(e.value, 9),
                method.tag(),
                sig(e.residual, 9),
                join(&e.argmax)
            );
            Ok((line, ok))
        })
        .collect();
    let mut csv = String::from("family,d,k,param,value,method,residual,argmax\n");
    let mut all_ok = true;
    for row in rows {
        let (line, ok) = row?;
        csv.push_str(&line);
        all_ok &= ok;
    }
    emit(args.out.as_ref(), &csv)?;
    Ok(all_ok)
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool> {
    let source = args.channel.load()?;
    let fsc = &source.fsc;
    let opts = args.solver.dp();
    let (rho, h) = match (args.rho, &args.h) {
        (Some(rho), Some(h)) => (rho, h.clone()),
        _ => {
            let sol = solve_average_reward(fsc, &opts)?;
            (sol.rho, sol.h)
        }
    };
    let rho = rho + args.rho_offset;
    let residuals = bellman_residuals(fsc, rho, &h, &opts)?;
    let mut text = format!("channel: {}\nrho: {}\n", describe(&source), sig(rho, 12));
    for (s, r) in residuals.iter().enumerate() {
        writeln!(text, "residual[{}]: {r:e}", fsc.state_names[s])?;
    }
    let worst = residuals.iter().cloned().fold(0.0, f64::max);
    let mut passed = worst <= args.solver.tol;
    writeln!(text, "bellman residual: {worst:e}\nbellman check: {}", verdict(passed))?;
    if args.oracle {
        let checks = conservation_suite(args.solver.seed);
        let good = checks.iter().filter(|c| c.passed()).count();
        for c in &checks {
            writeln!(
                text,
                "case {:>5} N={}: I={} reverse={} lagged={} reward={} {}",
                c.seed,
                c.stats.n,
                sig(c.stats.mutual_info, 9),
                sig(c.stats.reverse_di, 9),
                sig(c.stats.forward_lagged_di, 9),
                sig(c.stats.reward_sum, 9),
                verdict(c.passed())
            )?;
        }
        let all = good == checks.len();
        writeln!(text, "conservation checks: {good}/{} {}", checks.len(), verdict(all))?;
        passed &= all;
    }
    emit(args.out.as_ref(), &text)?;
    Ok(passed)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("FSC_BOUNDS_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("FSC_BOUNDS_THREADS={v:?} is not a count"))?;
        if n > 0 {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match &cli.command {
        Command::Bound(a) => cmd_bound(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
