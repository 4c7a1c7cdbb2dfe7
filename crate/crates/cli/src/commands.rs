use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::{anyhow, Context};
use polarize_core::certify::{strong_weak_report, CertifyError, ReportOptions};
use polarize_core::extrema::{enumerate_extrema_with, EnumerateOptions, ExtremaSet};
use polarize_core::systems::{
    is_reflection_system, validate, FamilyParams, FamilyRegistry, VectorSystem,
};

use crate::{CertifyArgs, CliResult, Failure, GenArgs, SolveArgs, SolverArgs, Status};

const REFLECTION_TOL: f64 = 1e-9;

pub fn load_system(path: &Path) -> CliResult<VectorSystem> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::usage)?;
    VectorSystem::from_json(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::usage)
}

/// Loads an extrema file and checks it belongs to `sys`.
pub fn load_extrema(path: &Path, sys: &VectorSystem) -> CliResult<ExtremaSet> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::usage)?;
    let es = ExtremaSet::from_json(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(Failure::usage)?;
    if es.system.vectors() != sys.vectors() {
        return Err(Failure::usage(anyhow!(
            "{} was computed for a different system",
            path.display()
        )));
    }
    Ok(es)
}

pub fn write_output(path: &Path, contents: &str) -> CliResult {
    fs::write(path, contents)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::io)
}

pub fn enumerate_options(args: &SolverArgs) -> EnumerateOptions {
    EnumerateOptions {
        pattern_budget: args.pattern_budget,
        parallelism: args.parallelism.0,
    }
}

/// Runs the enumeration, turning a parallel pair into a solve failure with a
/// remediation hint.
pub fn enumerate(sys: &VectorSystem, args: &SolverArgs) -> CliResult<ExtremaSet> {
    if validate(sys).has_parallel_pair {
        return Err(Failure::solve(anyhow!(
            "system has a parallel pair, so P has a repeated factor.\n\
             hint: replace each repeated vector by nearby distinct ones with \
             polarize_core::systems::split_duplicates (e.g. theta = 0.05) and solve that system"
        )));
    }
    enumerate_extrema_with(sys, &enumerate_options(args)).map_err(Failure::solve)
}

pub fn gen(args: &GenArgs) -> CliResult<Status> {
    let params = FamilyParams {
        param: None,
        dim: args.dim,
        n: args.n,
        seed: args.seed,
        min_angle: args.min_angle,
    };
    let sys = FamilyRegistry::with_builtins()
        .build(&args.family, &params)
        .map_err(Failure::usage)?;
    write_output(&args.output, &sys.to_json())?;

    let diag = validate(&sys);
    say!("label: {}", sys.label());
    say!("n = {}, d = {}", sys.n(), sys.dim());
    say!("unit vectors: {}", diag.is_unit);
    say!("min pairwise angle: {:.6} rad", diag.min_pairwise_angle);
    say!("parallel pair: {}", diag.has_parallel_pair);
    say!(
        "span dimension: {}, basis: {}",
        diag.spans_dim,
        diag.is_basis
    );
    say!(
        "closed under its reflections: {}",
        is_reflection_system(&sys, REFLECTION_TOL)
    );
    Ok(Status::Ok)
}

fn extreme_values(es: &ExtremaSet) -> (f64, f64) {
    es.points.iter().fold((f64::INFINITY, 0.0), |(s, p), q| {
        (s.min(q.value_s), p.max(q.value_p.abs()))
    })
}

pub fn solve(args: &SolveArgs) -> CliResult<Status> {
    let sys = load_system(&args.input)?;
    let start = Instant::now();
    let es = enumerate(&sys, &args.solver)?;
    let elapsed = start.elapsed();
    write_output(&args.output, &es.to_json())?;

    let (min_s, max_p) = extreme_values(&es);
    match es.expected_count {
        Some(e) => say!("count: {} (expected {e})", es.len()),
        None => say!("count: {}", es.len()),
    }
    say!("min_S: {min_s}");
    say!("max_absP: {max_p}");
    say!("wall time: {:.1} ms", elapsed.as_secs_f64() * 1e3);
    if !es.complete {
        return Err(Failure::solve(anyhow!(
            "found {} extrema but the arrangement has {:?} chambers",
            es.len(),
            es.expected_count
        )));
    }
    Ok(Status::Ok)
}

pub fn certify(args: &CertifyArgs) -> CliResult<Status> {
    let sys = load_system(&args.input)?;
    let es = match &args.extrema {
        Some(path) => load_extrema(path, &sys)?,
        None => enumerate(&sys, &args.solver)?,
    };
    let mut options = ReportOptions {
        random_g: args.random_g,
        g_seed: args.seed,
        harmonicity_samples: args.harmonicity,
        harmonicity_seed: args.seed,
        ..ReportOptions::default()
    };
    for (name, value) in &args.tolerances {
        options
            .tolerances
            .set(name, *value)
            .map_err(Failure::usage)?;
    }
    let report = strong_weak_report(&es, &options).map_err(|e| match e {
        CertifyError::UnknownTolerance(_) => Failure::usage(e),
        other => Failure::solve(other),
    })?;
    write_output(&args.output, &report.to_json())?;

    say!(
        "{}: n = {}, d = {}, {} extrema",
        report.label,
        report.n,
        report.dim,
        report.count
    );
    say!("classification: {}", report.classification);
    say!("min_S = {} (n² = {})", report.min_s, report.strong_bound);
    say!(
        "max_absP = {} (n^(-n/2) = {})",
        report.max_abs_p,
        report.weak_bound
    );
    for g in &report.gates {
        say!(
            "  {:<24} {:>12.3e}  tol {:.1e}  {}",
            g.name,
            g.value,
            g.tol,
            if g.pass { "pass" } else { "FAIL" }
        );
    }
    if report.passed {
        Ok(Status::Ok)
    } else {
        let failed: Vec<&str> = report.failed_gates().map(|g| g.name.as_str()).collect();
        eprintln!("gates failed: {}", failed.join(", "));
        Ok(Status::Gate)
    }
}
