use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;

use anyhow::Context;
use rayon::prelude::*;

use super::args::{AlgoName, Cli, Command, DataArgs, ModeName, MuPolicy, SolverArgs};
use super::csv::{aggregate_gaps, write_aggregate_csv, write_ratio_csv, write_trace_csv};
use super::{usage, CliError};
use crate::data::{generate_linear_regression, load_any, save_dataset, SyntheticSpec};
use crate::diagnostics::{
    bound_agcd, bound_plain, bound_strong, estimate_gamma, gamma_terms, reference_solve, Reference,
};
use crate::numerics::weighted_dist_sq;
use crate::objectives::{LeastSquaresProblem, MuMode, Objective, Problem};
use crate::solvers::{run, Method, Mode, RunOptions, Trace};

pub(crate) fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate {
            samples,
            dim,
            kappa,
            sigma,
            seed,
            out,
        } => cmd_generate(
            &SyntheticSpec {
                n_samples: samples,
                dim,
                kappa,
                sigma,
                seed,
            },
            &out,
        ),
        Command::Run {
            data,
            solver,
            algo,
            seed,
            check_descent,
            trace,
        } => cmd_run(&data, &solver, algo, seed, check_descent, &trace),
        Command::Compare {
            data,
            solver,
            algos,
            seeds,
            out,
        } => cmd_compare(&data, &solver, &algos, &seeds.0, &out),
        Command::Gamma {
            data,
            iters,
            kbar,
            algo,
            seed,
            record_period,
            out,
        } => cmd_gamma(&data, iters, kbar, algo, seed, record_period, &out),
    }
}

fn synthetic(spec: &SyntheticSpec) -> Result<crate::data::Dataset, CliError> {
    spec.validate().map_err(|e| usage(e.to_string()))?;
    for w in spec.warnings() {
        eprintln!("warning: {w}");
    }
    Ok(generate_linear_regression(spec)?)
}

fn cmd_generate(spec: &SyntheticSpec, out: &Path) -> Result<(), CliError> {
    let dataset = synthetic(spec)?;
    save_dataset(&dataset, out).with_context(|| format!("writing {}", out.display()))?;
    let problem = LeastSquaresProblem::new(dataset.matrix.to_dense(), dataset.target.clone())?;
    let spectrum = problem.gram_spectrum()?;
    let min = spectrum.iter().copied().fold(f64::INFINITY, f64::min);
    let max = spectrum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cond = if min > 0.0 { max / min } else { f64::INFINITY };
    println!("wrote {}", out.display());
    println!("cond(X^T X) = {cond:.10e}");
    println!("smallest eigenvalue of X^T X = {min:.6e}");
    println!("mu (exact) = {:.10e}", problem.strong_convexity(MuMode::Exact)?);
    Ok(())
}

fn load_problem(data: &DataArgs) -> Result<Problem, CliError> {
    let dataset = match &data.data {
        Some(path) => load_any(path).with_context(|| format!("reading {}", path.display()))?,
        None => synthetic(&data.synthetic_spec())?,
    };
    Ok(Problem::from_dataset(&dataset)?)
}

fn resolve_mode(solver: &SolverArgs, problem: &Problem) -> Result<Mode, CliError> {
    if solver.mode == ModeName::Plain {
        return Ok(Mode::Plain);
    }
    let mu = match (solver.mu, problem) {
        (MuPolicy::None, _) => return Err(usage("strong mode requires --mu")),
        (MuPolicy::Given(v), _) => v,
        (MuPolicy::Exact, Problem::LeastSquares(p)) => p.strong_convexity(MuMode::Exact)?,
        (MuPolicy::SmallestPositive, Problem::LeastSquares(p)) => {
            p.strong_convexity(MuMode::SmallestPositive)?
        }
        (_, Problem::Logistic(_)) => {
            return Err(usage("--mu exact/smallest-positive needs a least-squares dataset"))
        }
    };
    if mu == 0.0 {
        if solver.mu == MuPolicy::Given(0.0) {
            eprintln!("note: mu = 0 runs the non-strongly-convex framework");
            return Ok(Mode::Plain);
        }
        return Err(usage("computed mu is 0 (singular problem); try --mu smallest-positive"));
    }
    Ok(Mode::Strong { mu })
}

fn method_for(algo: AlgoName, mode: Mode) -> Method {
    match algo.rule() {
        Some(rule) => Method::Accelerated { rule, mode },
        None => Method::GreedyBaseline,
    }
}

fn reference(problem: &Problem) -> Result<Reference, CliError> {
    let r = reference_solve(problem)?;
    if r.low_confidence {
        eprintln!(
            "warning: reference solve is low-confidence (residual {:.3e} after {} iterations)",
            r.residual, r.iterations
        );
    }
    Ok(r)
}

fn run_options(reference: &Reference, iters: usize, seed: u64, record_period: usize) -> Result<RunOptions, CliError> {
    if record_period == 0 {
        return Err(usage("--record-period must be positive"));
    }
    Ok(RunOptions {
        iters,
        seed,
        record_period,
        f_ref: Some(reference.f_ref),
        x_ref: Some(reference.x_ref.clone()),
        ..Default::default()
    })
}

fn create_writer(path: &Path) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

/// First recorded `k >= 1` at which the trace leaves its envelope.
fn envelope_violation(trace: &Trace, problem: &dyn Objective, reference: &Reference) -> Option<(String, Option<usize>)> {
    let dim = problem.dim();
    let x0 = vec![0.0; dim];
    let r_sq = weighted_dist_sq(&x0, &reference.x_ref, problem.smoothness()).ok()?;
    match trace.method {
        Method::Accelerated { mode: Mode::Plain, .. } => {
            let bad = trace
                .records
                .iter()
                .filter(|r| r.k >= 1)
                .find(|r| r.gap.is_some_and(|g| g > bound_plain(r.k, dim, r_sq)))
                .map(|r| r.k);
            Some(("2 n^2 R^2 / (k+1)^2".to_string(), bad))
        }
        Method::Accelerated { mode: Mode::Strong { .. }, .. } => {
            let params = trace.strong?;
            let e0 = trace.records.first()?.energy?;
            let bad = trace
                .records
                .iter()
                .find(|r| r.energy.is_some_and(|e| e > bound_strong(r.k, params.a, e0)))
                .map(|r| r.k);
            Some(("energy <= (1-a)^k E_0".to_string(), bad))
        }
        Method::GreedyBaseline => None,
    }
}

fn report_envelope(trace: &Trace, problem: &dyn Objective, reference: &Reference) {
    match envelope_violation(trace, problem, reference) {
        Some((name, None)) => println!("envelope {name}: respected at every recorded k"),
        Some((name, Some(k))) => println!(
            "envelope {name}: exceeded at k = {k} (warning only: the bound holds in expectation)"
        ),
        None => {}
    }
}

fn cmd_run(
    data: &DataArgs,
    solver: &SolverArgs,
    algo: AlgoName,
    seed: u64,
    check_descent: bool,
    trace_path: &Path,
) -> Result<(), CliError> {
    let problem = load_problem(data)?;
    let mode = resolve_mode(solver, &problem)?;
    let reference = reference(&problem)?;
    let options = RunOptions {
        check_descent,
        ..run_options(&reference, solver.iters, seed, solver.record_period)?
    };
    let objective = problem.as_objective();
    let trace = run(objective, method_for(algo, mode), &options)?;
    write_trace_csv(&trace, create_writer(trace_path)?)
        .with_context(|| format!("writing {}", trace_path.display()))?;

    let last = trace.last();
    println!("algorithm = {}, mode = {}", algo.name(), mode.name());
    println!("f_ref = {:.16e}", reference.f_ref);
    println!("final k = {}, f = {:.16e}", last.k, last.f_value);
    if let Some(gap) = last.gap {
        println!("final gap = {gap:.6e}");
    }
    report_envelope(&trace, objective, &reference);
    Ok(())
}

fn thread_count() -> Result<Option<usize>, CliError> {
    match std::env::var("CDKIT_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(usage(format!("CDKIT_THREADS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

fn decades(iters: usize) -> Vec<usize> {
    let mut out = vec![0];
    let mut k = 1;
    while k <= iters {
        out.push(k);
        k = k.saturating_mul(10);
    }
    if *out.last().unwrap() != iters {
        out.push(iters);
    }
    out
}

fn cmd_compare(
    data: &DataArgs,
    solver: &SolverArgs,
    algos: &[AlgoName],
    seeds: &[u64],
    out: &Path,
) -> Result<(), CliError> {
    if algos.is_empty() {
        return Err(usage("--algos must name at least one algorithm"));
    }
    let problem = load_problem(data)?;
    let mode = resolve_mode(solver, &problem)?;
    let reference = reference(&problem)?;
    let base = run_options(&reference, solver.iters, 0, solver.record_period)?;

    let cells: Vec<(AlgoName, u64)> = algos
        .iter()
        .flat_map(|&a| seeds.iter().map(move |&s| (a, s)))
        .collect();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("starting worker threads")?;
    let objective = problem.as_objective();
    let traces: Vec<Result<Trace, _>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(algo, seed)| {
                run(objective, method_for(algo, mode), &RunOptions { seed, ..base.clone() })
            })
            .collect()
    });
    let traces = traces.into_iter().collect::<Result<Vec<_>, _>>()?;

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut summary = String::from("algo,k,mean_gap,median_gap,min_gap,max_gap\n");
    println!("{:<6} {:>8} {:>14} {:>14}", "algo", "k", "mean gap", "median gap");
    let checkpoints = decades(solver.iters);
    for (i, algo) in algos.iter().enumerate() {
        let group = &traces[i * seeds.len()..(i + 1) * seeds.len()];
        let rows = aggregate_gaps(group);
        let path = out.join(format!("{}.csv", algo.name()));
        write_aggregate_csv(&rows, create_writer(&path)?).with_context(|| format!("writing {}", path.display()))?;
        for row in rows.iter().filter(|r| checkpoints.contains(&r.k)) {
            summary.push_str(&format!(
                "{},{},{},{},{},{}\n",
                algo.name(),
                row.k,
                crate::data::format_float(row.mean_gap),
                crate::data::format_float(row.median_gap),
                crate::data::format_float(row.min_gap),
                crate::data::format_float(row.max_gap),
            ));
            println!("{:<6} {:>8} {:>14.6e} {:>14.6e}", algo.name(), row.k, row.mean_gap, row.median_gap);
        }
    }
    let path = out.join("summary.csv");
    fs::write(&path, summary).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn cmd_gamma(
    data: &DataArgs,
    iters: usize,
    kbar: usize,
    algo: AlgoName,
    seed: u64,
    record_period: usize,
    out: &Path,
) -> Result<(), CliError> {
    if kbar >= iters {
        return Err(usage(format!("--kbar ({kbar}) must be smaller than --iters ({iters})")));
    }
    let Some(rule) = algo.rule() else {
        return Err(usage("gamma needs an accelerated algorithm"));
    };
    let problem = load_problem(data)?;
    let reference = reference(&problem)?;
    let objective = problem.as_objective();
    let method = Method::Accelerated { rule, mode: Mode::Plain };
    let trace = run(objective, method, &run_options(&reference, iters, seed, record_period)?)?;
    let terms = gamma_terms(&trace);
    let estimate = estimate_gamma(&terms, kbar)?;
    write_ratio_csv(&terms, &estimate, create_writer(out)?).with_context(|| format!("writing {}", out.display()))?;

    println!("gamma = {:.16e}", estimate.gamma);
    println!("k_bar = {}", estimate.k_bar);
    println!("sign violations = {} ({} at k >= k_bar)", estimate.sign_violations, estimate.sign_violations_after_k_bar);
    match bound_agcd(1, objective.dim(), estimate.gamma, 1.0) {
        Ok(_) => {
            let r_sq = weighted_dist_sq(&vec![0.0; objective.dim()], &reference.x_ref, objective.smoothness())?;
            let bad = trace
                .records
                .iter()
                .filter(|r| r.k >= kbar)
                .find(|r| {
                    r.gap.is_some_and(|g| {
                        g > bound_agcd(r.k, objective.dim(), estimate.gamma, r_sq).unwrap_or(f64::INFINITY)
                    })
                })
                .map(|r| r.k);
            match bad {
                None => println!("gap within 2 n^2 gamma R^2 / (k+1)^2 for all recorded k >= k_bar"),
                Some(k) => println!("gap exceeds 2 n^2 gamma R^2 / (k+1)^2 at k = {k}"),
            }
        }
        Err(_) => println!("gamma > 1: the accelerated envelope does not apply"),
    }
    Ok(())
}
