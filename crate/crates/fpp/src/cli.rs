//! Command-line front end. Every run is reproducible: the effective
//! configuration is embedded in the output header and results are
//! byte-identical for identical flags, independent of `--threads`.
//!
//! Exit codes: 0 success, 1 invalid usage or parameters, 2 a mathematical
//! verification failed (which indicates an implementation bug, not bad input).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::enumerate::{
    self, EnumerateError, MonomialPoly, ZeroCountPoly, DEFAULT_ENUMERATION_CAP,
};
use crate::estimate::{self, BoundCheck, CheckKind, EstimateRecord, Verdict};
use crate::lattice::{BoxGeometry, Configuration, RandomPlan};
use crate::passage::{self, PassageQuery, QueryKind};

const ARTIFACT: &str = concat!("fpp ", env!("CARGO_PKG_VERSION"));

/// Environment variable that re-roots relative `--output` paths.
pub const OUTPUT_DIR_ENV: &str = "FPP_OUTPUT_DIR";

const EXIT_OK: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_VERIFICATION_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fpp", version, about = "Bernoulli first-passage percolation laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: available parallelism). Results never depend
    /// on this setting.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write results to this file instead of stdout. Relative paths resolve
    /// under $FPP_OUTPUT_DIR when it is set.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw one configuration and dump its edge times
    Sample {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        /// Probability of a zero passage time
        #[arg(long)]
        p: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        replicate: u64,
    },
    /// Monte Carlo estimate of the time constant at one (p, n)
    Estimate {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        replicates: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Coupled estimates over a p-grid, with difference/ratio bound checks
    Sweep {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        /// Strictly increasing grid in [0, 1), comma separated
        #[arg(long = "p-grid", value_delimiter = ',', required = true)]
        p_grid: Vec<f64>,
        #[arg(long)]
        replicates: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Estimates over an increasing list of sides, to view stabilization
    Convergence {
        #[arg(long)]
        d: usize,
        /// Strictly increasing side lengths, comma separated
        #[arg(long = "n-list", value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        replicates: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Truncated-window passage values over a growing margin list
    Passage {
        #[arg(long)]
        d: usize,
        /// Target distance of the query
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        replicate: u64,
        /// Passage functional to compute
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Strictly increasing truncation margins, comma separated
        #[arg(long, value_delimiter = ',', required = true)]
        margins: Vec<usize>,
        /// Start vertex for kind point-to-point, comma separated coordinates
        #[arg(long, value_delimiter = ',')]
        from: Option<Vec<i64>>,
        /// End vertex for kind point-to-point
        #[arg(long, value_delimiter = ',')]
        to: Option<Vec<i64>>,
    },
    /// Exact crossing-time distribution as polynomials in p
    Exact {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        /// Enumeration cap override (edges)
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Verify the derivative identity for {phi >= k} exactly
    VerifyRusso {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        /// Event threshold; all of 1..=n when omitted
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Verify the pointwise pivotal bounds for {phi >= k}
    VerifyBounds {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        /// Event threshold; all of 1..=n when omitted
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Verify monotonicity of E[phi]/(1-p) on an exact rational grid
    VerifyMonotone {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        /// Number of equally spaced rational grid points in [0, 999/1000]
        #[arg(long = "grid-points", default_value_t = 1001)]
        grid_points: usize,
        #[arg(long)]
        cap: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    /// Origin to n*e1, free paths
    #[value(alias = "a")]
    Point,
    /// Origin to the hyperplane u1 = n, free paths
    #[value(alias = "b")]
    HalfSpace,
    /// Origin to n*e1 within the cylinder 0 <= u1 <= n
    #[value(alias = "t")]
    CylinderPoint,
    /// Origin to the hyperplane within the cylinder
    #[value(alias = "s")]
    CylinderFace,
    /// Arbitrary --from to --to
    PointToPoint,
}

/// Parse `argv` (including the program name), execute, and write results.
/// Returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{err}");
                    EXIT_OK
                }
                _ => {
                    eprintln!("{err}");
                    EXIT_USAGE
                }
            };
        }
    };

    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.unwrap_or(0))
        .build()
    {
        Ok(pool) => pool,
        Err(err) => {
            eprintln!("error: could not build thread pool: {err}");
            return EXIT_USAGE;
        }
    };

    let outcome = pool.install(|| execute(&cli.command, cli.format));
    let (content, verified) = match outcome {
        Ok(run) => run,
        Err(err) => {
            eprintln!("error: {err}");
            return err.exit_code();
        }
    };

    if let Err(err) = deliver(cli.output.as_deref(), &content, stdout) {
        eprintln!("error: {err}");
        return EXIT_USAGE;
    }
    if verified {
        EXIT_OK
    } else {
        EXIT_VERIFICATION_FAILED
    }
}

fn deliver(output: Option<&Path>, content: &str, stdout: &mut dyn Write) -> std::io::Result<()> {
    match output {
        Some(path) => {
            let path = resolve_output(path);
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(path, content)
        }
        None => stdout.write_all(content.as_bytes()),
    }
}

fn resolve_output(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
            if !dir.is_empty() {
                return Path::new(&dir).join(path);
            }
        }
    }
    path.to_path_buf()
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Lattice(#[from] crate::lattice::LatticeError),
    #[error(transparent)]
    Passage(#[from] crate::passage::PassageError),
    #[error(transparent)]
    Estimate(#[from] crate::estimate::EstimateError),
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            // a non-increasing {phi >= k} event would be a bug in the
            // mathematics, not bad input
            CliError::Enumerate(EnumerateError::NotIncreasing { .. }) => {
                EXIT_VERIFICATION_FAILED
            }
            _ => EXIT_USAGE,
        }
    }
}

/// Render a float deterministically (shortest round-trip form).
fn fnum(x: f64) -> String {
    format!("{x:?}")
}

/// JSON number, or null for NaN/infinite values.
fn jnum(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

fn jbig(v: &num_bigint::BigInt) -> Value {
    use num_traits::ToPrimitive;
    match v.to_i64() {
        Some(x) => json!(x),
        None => json!(v.to_string()),
    }
}

fn zero_count_json(poly: &ZeroCountPoly) -> Value {
    json!({
        "basis": "zero-count",
        "coeffs": poly.coeffs().iter().map(jbig).collect::<Vec<_>>(),
    })
}

fn monomial_json(poly: &MonomialPoly) -> Value {
    json!({
        "basis": "monomial",
        "coeffs": poly.coeffs().iter().map(jbig).collect::<Vec<_>>(),
        "expanded": poly.to_string(),
    })
}

fn csv_header(out: &mut String, config: &Value) {
    let _ = writeln!(out, "# {ARTIFACT}");
    let _ = writeln!(out, "# config {config}");
}

fn record_row(out: &mut String, rec: &EstimateRecord) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{}",
        fnum(rec.p),
        rec.n,
        rec.replicates,
        fnum(rec.mean),
        fnum(rec.std_dev),
        fnum(rec.std_err),
        fnum(rec.ci_half_width),
        fnum(rec.mean_over_1mp),
        rec.seed
    );
}

const RECORD_COLUMNS: &str = "p,n,replicates,mean,std,stderr,ci_half_width,mean_over_1mp,seed";

fn record_json(rec: &EstimateRecord) -> Value {
    json!({
        "p": jnum(rec.p),
        "n": rec.n,
        "replicates": rec.replicates,
        "mean": jnum(rec.mean),
        "std": jnum(rec.std_dev),
        "stderr": jnum(rec.std_err),
        "ci_half_width": jnum(rec.ci_half_width),
        "mean_over_1mp": jnum(rec.mean_over_1mp),
        "seed": rec.seed,
    })
}

fn check_kind_name(kind: CheckKind) -> &'static str {
    match kind {
        CheckKind::DifferenceLowerBound => "difference_lower_bound",
        CheckKind::RatioLowerBound => "ratio_lower_bound",
        CheckKind::NormalizedMonotone => "normalized_monotone",
    }
}

fn verdict_name(verdict: Verdict) -> &'static str {
    match verdict {
        Verdict::Pass => "pass",
        Verdict::Fail => "fail",
        Verdict::Skipped => "skipped",
    }
}

fn check_json(check: &BoundCheck) -> Value {
    json!({
        "kind": check_kind_name(check.kind),
        "p1": jnum(check.p1),
        "p2": jnum(check.p2),
        "lhs": jnum(check.lhs),
        "rhs": jnum(check.rhs),
        "tolerance": jnum(check.tolerance),
        "verdict": verdict_name(check.verdict),
    })
}

/// Produce the full output text plus whether every verification in it passed.
fn execute(command: &Command, format: Format) -> Result<(String, bool), CliError> {
    match command {
        Command::Sample {
            d,
            n,
            p,
            seed,
            replicate,
        } => {
            let config = json!({
                "subcommand": "sample", "d": d, "n": n, "p": jnum(*p),
                "seed": seed, "replicate": replicate,
            });
            let geo = Arc::new(BoxGeometry::standard(*d, *n)?);
            let cfg = Configuration::sample(geo, *p, RandomPlan::new(*seed, *replicate))?;
            let mut out = String::new();
            match format {
                Format::Csv => {
                    csv_header(&mut out, &config);
                    let mut bytes = Vec::new();
                    cfg.write_edge_csv(&mut bytes).expect("writing to memory");
                    out.push_str(&String::from_utf8(bytes).expect("csv is utf-8"));
                }
                Format::Json => {
                    let geo = cfg.geometry();
                    let mut edges = Vec::with_capacity(geo.edge_count());
                    geo.for_each_edge(|e, axis, base| {
                        edges.push(json!({
                            "edge_id": e, "axis": axis, "base": base, "time": cfg.time(e),
                        }));
                    });
                    push_json(&mut out, json!({
                        "artifact": ARTIFACT, "config": config, "edges": edges,
                    }));
                }
            }
            Ok((out, true))
        }

        Command::Estimate {
            d,
            n,
            p,
            replicates,
            seed,
        } => {
            let config = json!({
                "subcommand": "estimate", "d": d, "n": n, "p": jnum(*p),
                "replicates": replicates, "seed": seed,
            });
            let rec = estimate::estimate_mu(*d, *n, *p, *replicates, *seed)?;
            let mut out = String::new();
            match format {
                Format::Csv => {
                    csv_header(&mut out, &config);
                    out.push_str(RECORD_COLUMNS);
                    out.push('\n');
                    record_row(&mut out, &rec);
                }
                Format::Json => push_json(&mut out, json!({
                    "artifact": ARTIFACT, "config": config, "records": [record_json(&rec)],
                })),
            }
            Ok((out, true))
        }

        Command::Sweep {
            d,
            n,
            p_grid,
            replicates,
            seed,
        } => {
            let config = json!({
                "subcommand": "sweep", "d": d, "n": n,
                "p_grid": p_grid.iter().map(|&p| jnum(p)).collect::<Vec<_>>(),
                "replicates": replicates, "seed": seed,
            });
            let result = estimate::sweep(*d, *n, p_grid, *replicates, *seed)?;
            let mut out = String::new();
            match format {
                Format::Csv => {
                    csv_header(&mut out, &config);
                    out.push_str(RECORD_COLUMNS);
                    out.push('\n');
                    for rec in &result.records {
                        record_row(&mut out, rec);
                    }
                    let _ = writeln!(
                        out,
                        "# pathwise_violations {}",
                        result.pathwise_violations
                    );
                    let _ = writeln!(out, "# check,kind,p1,p2,lhs,rhs,tolerance,verdict");
                    for c in &result.checks {
                        let _ = writeln!(
                            out,
                            "# check,{},{},{},{},{},{},{}",
                            check_kind_name(c.kind),
                            fnum(c.p1),
                            fnum(c.p2),
                            fnum(c.lhs),
                            fnum(c.rhs),
                            fnum(c.tolerance),
                            verdict_name(c.verdict)
                        );
                    }
                }
                Format::Json => push_json(&mut out, json!({
                    "artifact": ARTIFACT, "config": config,
                    "records": result.records.iter().map(record_json).collect::<Vec<_>>(),
                    "checks": result.checks.iter().map(check_json).collect::<Vec<_>>(),
                    "pathwise_violations": result.pathwise_violations,
                })),
            }
            let ok = result.all_checks_pass();
            Ok((out, ok))
        }

        Command::Convergence {
            d,
            n_list,
            p,
            replicates,
            seed,
        } => {
            let config = json!({
                "subcommand": "convergence", "d": d, "n_list": n_list,
                "p": jnum(*p), "replicates": replicates, "seed": seed,
            });
            let rows = estimate::convergence_table(*d, *p, n_list, *replicates, *seed)?;
            let mut out = String::new();
            match format {
                Format::Csv => {
                    csv_header(&mut out, &config);
                    out.push_str(RECORD_COLUMNS);
                    out.push('\n');
                    for rec in &rows {
                        record_row(&mut out, rec);
                    }
                }
                Format::Json => push_json(&mut out, json!({
                    "artifact": ARTIFACT, "config": config,
                    "records": rows.iter().map(record_json).collect::<Vec<_>>(),
                })),
            }
            Ok((out, true))
        }

        Command::Passage {
            d,
            n,
            p,
            seed,
            replicate,
            kind,
            margins,
            from,
            to,
        } => {
            let query_kind = match kind {
                KindArg::Point => QueryKind::Point,
                KindArg::HalfSpace => QueryKind::HalfSpace,
                KindArg::CylinderPoint => QueryKind::CylinderPoint,
                KindArg::CylinderFace => QueryKind::CylinderFace,
                KindArg::PointToPoint => {
                    let from = from.clone().ok_or_else(|| {
                        CliError::Usage("--from is required for kind point-to-point".into())
                    })?;
                    let to = to.clone().ok_or_else(|| {
                        CliError::Usage("--to is required for kind point-to-point".into())
                    })?;
                    if from.len() != *d || to.len() != *d {
                        return Err(CliError::Usage(format!(
                            "--from/--to must have {d} coordinates"
                        )));
                    }
                    QueryKind::PointToPoint { from, to }
                }
            };
            let config = json!({
                "subcommand": "passage", "d": d, "n": n, "p": jnum(*p),
                "seed": seed, "replicate": replicate,
                "kind": query_kind.name(), "margins": margins,
            });
            let query = PassageQuery::new(query_kind, *n);
            let results = passage::truncated_time(
                *d,
                *p,
                RandomPlan::new(*seed, *replicate),
                &query,
                margins,
            )?;
            let mut out = String::new();
            match format {
                Format::Csv => {
                    csv_header(&mut out, &config);
                    let _ = writeln!(out, "kind,n,margin,value");
                    for res in &results {
                        let _ = writeln!(
                            out,
                            "{},{},{},{}",
                            query.kind.name(),
                            n,
                            res.margin.expect("truncated results carry a margin"),
                            res.value
                        );
                    }
                }
                Format::Json => push_json(&mut out, json!({
                    "artifact": ARTIFACT, "config": config,
                    "results": results.iter().map(|res| json!({
                        "kind": query.kind.name(), "n": n,
                        "margin": res.margin, "value": res.value,
                        "witness_edges": res.witness,
                    })).collect::<Vec<_>>(),
                })),
            }
            Ok((out, true))
        }

        Command::Exact { d, n, cap } => {
            let cap = cap.unwrap_or(DEFAULT_ENUMERATION_CAP);
            let config = json!({
                "subcommand": "exact", "d": d, "n": n, "cap": cap,
            });
            let geo = BoxGeometry::standard(*d, *n)?;
            let dist = enumerate::exact_phi_distribution(&geo, cap)?;
            let expectation = dist.expectation();
            let mut out = String::new();
            match format {
                Format::Csv => {
                    csv_header(&mut out, &config);
                    let _ = writeln!(out, "quantity,zero_count_coeffs,expanded");
                    for (k, poly) in dist.polys().iter().enumerate() {
                        let coeffs = poly
                            .coeffs()
                            .iter()
                            .map(|c| c.to_string())
                            .collect::<Vec<_>>()
                            .join(" ");
                        let _ = writeln!(
                            out,
                            "P(phi={k}),{coeffs},{}",
                            poly.to_monomial()
                        );
                    }
                    let _ = writeln!(out, "E(phi),,{expectation}");
                }
                Format::Json => push_json(&mut out, json!({
                    "artifact": ARTIFACT, "config": config,
                    "edges": dist.edges(),
                    "distribution": dist.polys().iter().enumerate().map(|(k, poly)| json!({
                        "k": k,
                        "probability": zero_count_json(poly),
                        "expanded": poly.to_monomial().to_string(),
                    })).collect::<Vec<_>>(),
                    "expectation": monomial_json(&expectation),
                })),
            }
            Ok((out, true))
        }

        Command::VerifyRusso { d, n, k, cap } => {
            let cap = cap.unwrap_or(DEFAULT_ENUMERATION_CAP);
            let ks = threshold_list(*k, *n);
            let config = json!({
                "subcommand": "verify-russo", "d": d, "n": n,
                "k": k.map_or_else(|| json!("all"), |k| json!(k)), "cap": cap,
            });
            let geo = BoxGeometry::standard(*d, *n)?;
            let mut reports = Vec::new();
            for k in ks {
                reports.push(enumerate::verify_russo(
                    &geo,
                    &enumerate::EventSpec::phi_at_least(k),
                    cap,
                )?);
            }
            let all_hold = reports.iter().all(|r| r.holds());
            let mut out = String::new();
            match format {
                Format::Csv => {
                    csv_header(&mut out, &config);
                    let _ = writeln!(out, "event,edges,identity,independence,dP_dp,minus_E_N");
                    for r in &reports {
                        let identity = if r.identity_holds {
                            "identity holds".to_string()
                        } else {
                            format!(
                                "IDENTITY FAILS at p^{}",
                                r.first_mismatch_power.unwrap_or(0)
                            )
                        };
                        let independence = if r.independence_holds {
                            "independence holds".to_string()
                        } else {
                            format!(
                                "INDEPENDENCE FAILS at edge {}",
                                r.first_independence_failure.unwrap_or(0)
                            )
                        };
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{},{}",
                            r.event, r.edges, identity, independence,
                            r.derivative, r.minus_expected_pivotal
                        );
                    }
                }
                Format::Json => push_json(&mut out, json!({
                    "artifact": ARTIFACT, "config": config,
                    "reports": reports.iter().map(|r| json!({
                        "event": r.event,
                        "edges": r.edges,
                        "probability": zero_count_json(&r.probability),
                        "derivative": monomial_json(&r.derivative),
                        "minus_expected_pivotal": monomial_json(&r.minus_expected_pivotal),
                        "identity_holds": r.identity_holds,
                        "first_mismatch_power": r.first_mismatch_power,
                        "independence_holds": r.independence_holds,
                        "first_independence_failure": r.first_independence_failure,
                    })).collect::<Vec<_>>(),
                })),
            }
            Ok((out, all_hold))
        }

        Command::VerifyBounds { d, n, k, cap } => {
            let cap = cap.unwrap_or(DEFAULT_ENUMERATION_CAP);
            let ks = threshold_list(*k, *n);
            let config = json!({
                "subcommand": "verify-bounds", "d": d, "n": n,
                "k": k.map_or_else(|| json!("all"), |k| json!(k)), "cap": cap,
            });
            let geo = BoxGeometry::standard(*d, *n)?;
            let mut reports = Vec::new();
            for k in ks {
                reports.push(enumerate::verify_pivotal_bounds(&geo, k, cap)?);
            }
            let all_hold = reports.iter().all(|r| r.holds());
            let mut out = String::new();
            match format {
                Format::Csv => {
                    csv_header(&mut out, &config);
                    let _ = writeln!(
                        out,
                        "k,configs_in_event,configs_at_boundary,interior_pivotal,\
boundary_shortfall,witness_edge,pivotal_time,verdict"
                    );
                    for r in &reports {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{},{},{},{}",
                            r.k,
                            r.configs_in_event,
                            r.configs_at_boundary,
                            r.interior_pivotal_violations,
                            r.boundary_shortfall_violations,
                            r.witness_edge_violations,
                            r.pivotal_time_violations,
                            if r.holds() { "bounds hold" } else { "BOUNDS FAIL" }
                        );
                    }
                }
                Format::Json => push_json(&mut out, json!({
                    "artifact": ARTIFACT, "config": config,
                    "reports": reports.iter().map(|r| json!({
                        "k": r.k,
                        "configs_in_event": r.configs_in_event,
                        "configs_at_boundary": r.configs_at_boundary,
                        "interior_pivotal_violations": r.interior_pivotal_violations,
                        "boundary_shortfall_violations": r.boundary_shortfall_violations,
                        "witness_edge_violations": r.witness_edge_violations,
                        "pivotal_time_violations": r.pivotal_time_violations,
                        "first_violation": r.first_violation,
                        "holds": r.holds(),
                    })).collect::<Vec<_>>(),
                })),
            }
            Ok((out, all_hold))
        }

        Command::VerifyMonotone {
            d,
            n,
            grid_points,
            cap,
        } => {
            let cap = cap.unwrap_or(DEFAULT_ENUMERATION_CAP);
            if *grid_points < 1 {
                return Err(CliError::Usage("--grid-points must be at least 1".into()));
            }
            let config = json!({
                "subcommand": "verify-monotone", "d": d, "n": n,
                "grid_points": grid_points, "cap": cap,
            });
            let geo = BoxGeometry::standard(*d, *n)?;
            let grid = enumerate::default_grid(*grid_points);
            let report = enumerate::verify_finite_n_monotonicity(&geo, &grid, cap)?;
            let mut out = String::new();
            match format {
                Format::Csv => {
                    csv_header(&mut out, &config);
                    let _ = writeln!(out, "grid_points,violations,verdict,expectation,h");
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{}",
                        report.grid_points,
                        report.violations,
                        if report.holds() {
                            "monotone holds"
                        } else {
                            "MONOTONE FAILS"
                        },
                        report.expectation,
                        report.h
                    );
                }
                Format::Json => push_json(&mut out, json!({
                    "artifact": ARTIFACT, "config": config,
                    "grid_points": report.grid_points,
                    "violations": report.violations,
                    "first_violation": report.first_violation.as_ref().map(|(p, h)| json!({
                        "p": p.to_string(), "h": h.to_string(),
                    })),
                    "expectation": monomial_json(&report.expectation),
                    "h": monomial_json(&report.h),
                    "holds": report.holds(),
                })),
            }
            let holds = report.holds();
            Ok((out, holds))
        }
    }
}

fn threshold_list(k: Option<u32>, n: usize) -> Vec<u32> {
    match k {
        Some(k) => vec![k],
        None => (1..=n as u32).collect(),
    }
}

fn push_json(out: &mut String, value: Value) {
    let text = serde_json::to_string_pretty(&value).expect("json serialization");
    out.push_str(&text);
    out.push('\n');
}
