use std::time::Instant;

use anyhow::{anyhow, Context};
use polarize_core::certify::euler_jacobi_theorem_residual;
use polarize_core::extrema::enumerate_extrema_with;
use polarize_core::systems::{validate, FamilyParams, FamilyRegistry, SystemFamily};
use serde::Serialize;

use crate::commands::enumerate_options;
use crate::{CliResult, Failure, Status, SweepArgs};

/// Inclusive range of system sizes; `lo > hi` is empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeRange {
    pub lo: usize,
    pub hi: usize,
}

impl SizeRange {
    pub fn iter(&self) -> impl Iterator<Item = usize> {
        self.lo..=self.hi
    }
}

pub fn parse_range(s: &str) -> Result<SizeRange, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("expected `a..b` or a single size, got `{s}`"))
    };
    match s.split_once("..") {
        Some((a, b)) => Ok(SizeRange {
            lo: num(a)?,
            hi: num(b.trim_start_matches('='))?,
        }),
        None => {
            let k = num(s)?;
            Ok(SizeRange { lo: k, hi: k })
        }
    }
}

/// One CSV line. Missing values are written as empty fields.
#[derive(Debug, Default, Serialize)]
pub struct Row {
    pub family: String,
    pub n: usize,
    pub d: Option<usize>,
    pub seed: u64,
    pub count: Option<usize>,
    #[serde(rename = "min_S")]
    pub min_s: Option<f64>,
    #[serde(rename = "n^2")]
    pub n_squared: f64,
    #[serde(rename = "max_absP")]
    pub max_abs_p: Option<f64>,
    #[serde(rename = "n^(-n/2)")]
    pub weak_bound: f64,
    pub ej_residual: Option<f64>,
    pub wall_ms: u64,
    pub status: String,
}

pub const HEADER: [&str; 12] = [
    "family",
    "n",
    "d",
    "seed",
    "count",
    "min_S",
    "n^2",
    "max_absP",
    "n^(-n/2)",
    "ej_residual",
    "wall_ms",
    "status",
];

fn sweep_row(family: &dyn SystemFamily, n: usize, seed: u64, args: &SweepArgs) -> Row {
    let nf = n as f64;
    let mut row = Row {
        family: family.name().to_string(),
        n,
        seed,
        n_squared: nf * nf,
        weak_bound: nf.powf(-nf / 2.0),
        ..Row::default()
    };
    let base = FamilyParams {
        param: None,
        dim: args.dim,
        n: None,
        seed,
        min_angle: args.min_angle,
    };
    let Some(params) = family.params_for_size(n, &base) else {
        row.status = format!("{} has no system with {n} vectors", family.name());
        return row;
    };
    let start = Instant::now();
    let sys = match family.build(&params) {
        Ok(s) => s,
        Err(e) => {
            row.status = e.to_string();
            return row;
        }
    };
    row.d = Some(sys.dim());
    if sys.n() != n {
        row.status = format!("family produced {} vectors", sys.n());
        return row;
    }
    if validate(&sys).has_parallel_pair {
        row.status = "parallel pair".into();
        return row;
    }
    let es = match enumerate_extrema_with(&sys, &enumerate_options(&args.solver)) {
        Ok(es) => es,
        Err(e) => {
            row.status = e.to_string();
            return row;
        }
    };
    row.count = Some(es.len());
    row.min_s = es.points.iter().map(|p| p.value_s).reduce(f64::min);
    row.max_abs_p = es.points.iter().map(|p| p.value_p.abs()).reduce(f64::max);
    match euler_jacobi_theorem_residual(&es) {
        Ok(r) => {
            row.ej_residual = Some(r);
            row.status = "ok".into();
        }
        Err(e) => row.status = e.to_string(),
    }
    if args.timing {
        row.wall_ms = start.elapsed().as_millis() as u64;
    }
    row
}

pub fn run(args: &SweepArgs) -> CliResult<Status> {
    let registry = FamilyRegistry::with_builtins();
    let mut families = Vec::new();
    for name in &args.family {
        let name = name.trim();
        if name.contains(':') {
            return Err(Failure::usage(anyhow!(
                "sweep takes bare family names (`{name}`); sizes come from --n"
            )));
        }
        let family = registry.get(name).ok_or_else(|| {
            let known: Vec<_> = registry.names().collect();
            Failure::usage(anyhow!(
                "unknown family `{name}` (known: {})",
                known.join(", ")
            ))
        })?;
        families.push(family);
    }

    let mut out = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    // Written explicitly so an empty sweep still produces the header.
    out.write_record(HEADER).map_err(Failure::io)?;
    let mut failures = 0;
    let mut rows = 0;
    for family in &families {
        for n in args.n.iter() {
            for k in 0..args.seeds {
                let row = sweep_row(*family, n, args.seed.wrapping_add(k), args);
                if row.status != "ok" {
                    failures += 1;
                }
                rows += 1;
                out.serialize(&row).map_err(Failure::io)?;
            }
        }
    }
    let bytes = out
        .into_inner()
        .context("flushing CSV")
        .map_err(Failure::io)?;
    let text = String::from_utf8(bytes).map_err(Failure::io)?;
    crate::commands::write_output(&args.output, &text)?;
    say!(
        "{rows} rows written to {} ({failures} not ok)",
        args.output.display()
    );
    Ok(Status::Ok)
}
