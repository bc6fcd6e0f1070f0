//! `signspan`: exact counts, Monte Carlo estimates, η* cross-checks, bound
//! tables and the verification battery.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 verification failure.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use signspan::bounds::{self, bound_table};
use signspan::estimate::{self, mc_estimate, singularity_sweep};
use signspan::eta::{parse_config_json, verify_with, HomologyField, eta_star_homology};
use signspan::events::{
    count_kso_independent_tuples, delta, exact_event_probability, kso_check, witness_support_census, EventKind,
    EventSpec, ExactOptions,
};
use signspan::linalg::{format_scalar, parse_scalar};
use signspan::signspace::SignMatrix;
use signspan::verify::{run_battery, VerifyOptions};
use signspan::Error;

/// Worker count used when `--workers` is absent.
const WORKERS_ENV: &str = "SIGNSPAN_WORKERS";
const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "signspan", version, about = "Spans of random sign vectors: exact counts, estimates, checks")]
struct Cli {
    /// Worker threads (overrides SIGNSPAN_WORKERS; default 1).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo estimate of an event probability.
    Estimate(EstimateArgs),
    /// Exhaustive counts, tuple counts, dependence fractions, or one matrix.
    Exact(ExactArgs),
    /// η* of a point configuration, by homology and by flag sums.
    Eta(EtaArgs),
    /// Table of closed-form bounds over a range of n.
    Bounds(BoundsArgs),
    /// Run the verification battery.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Clone, Debug, Serialize)]
struct EventArgs {
    /// kso, support, rm, rank-deficient, singular, singular01.
    #[arg(long)]
    event: String,
    /// Rows (defaults to n for square events).
    #[arg(short = 'p')]
    p: Option<usize>,
    /// Columns.
    #[arg(short = 'n')]
    n: usize,
    /// Support size for support and rm.
    #[arg(short = 'm')]
    m: Option<usize>,
}

impl EventArgs {
    fn spec(&self) -> signspan::Result<EventSpec> {
        let kind = EventKind::parse(&self.event, self.m)?;
        let square = matches!(kind, EventKind::SingularPm1 | EventKind::Singular01);
        let p = match (self.p, square) {
            (Some(p), _) => p,
            (None, true) => self.n,
            (None, false) => return Err(Error::InvalidArgument(format!("event {} needs -p", self.event))),
        };
        EventSpec::new(kind, p, self.n)
    }
}

#[derive(Args, Serialize)]
struct EstimateArgs {
    #[command(flatten)]
    event: EventArgs,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    /// Required: every run is seeded.
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    /// For `singular`: estimate every n from 2 up to this value instead.
    #[arg(long)]
    sweep: Option<usize>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args, Serialize)]
#[command(group = clap::ArgGroup::new("mode").required(true).args(["event", "count", "delta", "matrix"]))]
struct ExactArgs {
    /// Event to count over all matrices of the shape.
    #[arg(long)]
    event: Option<String>,
    /// `kso-tuples`: ordered independent KSO tuples of E_n points.
    #[arg(long)]
    count: Option<String>,
    /// Fraction of dependent k-tuples of E_n points.
    #[arg(long)]
    delta: bool,
    /// KSO witness and support census of a '+'/'-' matrix file.
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(short = 'p')]
    p: Option<usize>,
    #[arg(short = 'n')]
    n: Option<usize>,
    #[arg(short = 'm')]
    m: Option<usize>,
    #[arg(short = 'k')]
    k: Option<usize>,
    /// Count every matrix instead of fixing the first row.
    #[arg(long)]
    no_symmetry: bool,
    /// Skip size guards.
    #[arg(long)]
    force: bool,
}

#[derive(Args, Serialize)]
struct EtaArgs {
    /// PointConfig JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Homology field: `q` or a prime.
    #[arg(long, default_value = "q")]
    field: String,
    #[doc(hidden)]
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args, Serialize)]
struct BoundsArgs {
    /// A single n or a range `a..b` (inclusive).
    #[arg(long = "n", short = 'n')]
    n: String,
    #[arg(long, default_value = "1/128")]
    epsilon: String,
    #[arg(long, default_value = "184/25")]
    c: String,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    /// Comma-separated subset of checks.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[doc(hidden)]
    #[arg(long, hide = true)]
    inject_fault: bool,
}

/// Outcome of a subcommand: output text and exit code.
struct Outcome {
    text: String,
    code: u8,
}

fn ok(text: String) -> Outcome {
    Outcome { text, code: 0 }
}

fn run_config(command: &str, args: &impl Serialize, workers: usize, argv: &[String]) -> Value {
    json!({
        "subcommand": command,
        "args": args,
        "workers": workers,
        "argv": argv,
        "version": VERSION,
    })
}

fn workers(flag: Option<usize>) -> Result<usize, String> {
    let w = match flag {
        Some(w) => w,
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| format!("{WORKERS_ENV}={v:?} is not a count"))?,
            Err(_) => 1,
        },
    };
    if w == 0 {
        return Err("workers must be at least 1".into());
    }
    Ok(w)
}

fn cmd_estimate(a: &EstimateArgs, workers: usize, config: Value) -> signspan::Result<Outcome> {
    let mut out = String::new();
    let estimates = match a.sweep {
        Some(n_max) => {
            if a.event.event != "singular" {
                return Err(Error::InvalidArgument("--sweep applies to the singular event".into()));
            }
            singularity_sweep(n_max, a.trials, a.seed, a.confidence, workers)?
                .into_iter()
                .map(|r| (r.estimate, Some((r.asymptote, r.ratio))))
                .collect()
        }
        None => vec![(mc_estimate(&a.event.spec()?, a.trials, a.seed, a.confidence, workers)?, None)],
    };
    match a.format {
        Format::Csv => {
            out.push_str(&format!("# config {config}\n"));
            out.push_str(estimate::CSV_HEADER);
            if a.sweep.is_some() {
                out.push_str(",asymptote,ratio");
            }
            out.push('\n');
            for (e, extra) in &estimates {
                out.push_str(&e.csv_row());
                if let Some((asym, ratio)) = extra {
                    out.push_str(&format!(",{asym},{ratio}"));
                }
                out.push('\n');
            }
        }
        Format::Json => {
            let rows: Vec<Value> = estimates
                .iter()
                .map(|(e, extra)| {
                    let mut v = serde_json::to_value(e).expect("serializable");
                    if let Some((asym, ratio)) = extra {
                        v["asymptote"] = json!(asym);
                        v["ratio"] = json!(ratio);
                    }
                    v
                })
                .collect();
            out = serde_json::to_string_pretty(&json!({ "config": config, "estimates": rows }))? + "\n";
        }
    }
    Ok(ok(out))
}

fn need(v: Option<usize>, flag: &str) -> signspan::Result<usize> {
    v.ok_or_else(|| Error::InvalidArgument(format!("missing {flag}")))
}

fn cmd_exact(a: &ExactArgs, workers: usize, config: Value) -> signspan::Result<Outcome> {
    let mut result = if let Some(event) = &a.event {
        let n = need(a.n, "-n")?;
        let ev = EventArgs {
            event: event.clone(),
            p: a.p,
            n,
            m: a.m,
        };
        let opts = ExactOptions {
            symmetry: !a.no_symmetry,
            force: a.force,
            workers,
        };
        exact_event_probability(&ev.spec()?, &opts)?.to_json()
    } else if let Some(what) = &a.count {
        if what != "kso-tuples" {
            return Err(Error::InvalidArgument(format!("unknown count {what:?}; expected kso-tuples")));
        }
        let n = need(a.n, "-n")?;
        json!({ "count": "kso-tuples", "n": n, "value": count_kso_independent_tuples(n)?.to_string() })
    } else if a.delta {
        let (n, k) = (need(a.n, "-n")?, need(a.k, "-k")?);
        json!({ "delta": format_scalar(&delta(n, k)?), "n": n, "k": k })
    } else {
        let path = a.matrix.as_ref().expect("clap enforces one mode");
        let text = fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
        let m = SignMatrix::from_text(&text)?;
        let witness = kso_check(&m).map(|w| {
            json!({
                "witness": w.witness.to_string(),
                "coefficients": w.coefficients.iter().map(format_scalar).collect::<Vec<_>>(),
                "support": w.support,
            })
        });
        let census = match witness_support_census(&m) {
            Ok(c) => json!(c.iter().map(|(k, v)| (k.to_string(), v)).collect::<std::collections::BTreeMap<_, _>>()),
            Err(Error::DependentRows) => Value::Null,
            Err(e) => return Err(e),
        };
        json!({ "p": m.p(), "n": m.n(), "kso": witness.is_some(), "witness": witness, "census": census })
    };
    result["config"] = config;
    Ok(ok(serde_json::to_string_pretty(&result)? + "\n"))
}

fn cmd_eta(a: &EtaArgs, config: Value) -> signspan::Result<Outcome> {
    let text = fs::read_to_string(&a.config)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", a.config.display())))?;
    let (h, sets) = parse_config_json(&text)?;
    let field = match a.field.as_str() {
        "q" | "Q" => HomologyField::Rationals,
        p => HomologyField::Prime(
            p.parse()
                .map_err(|_| Error::InvalidArgument(format!("field {p:?} is neither q nor a prime")))?,
        ),
    };
    let mut report = verify_with(&h, &sets, a.inject_fault);
    if field != HomologyField::Rationals {
        let other = eta_star_homology(&h, field)?;
        if Some(other) != report.homology {
            report.pass = false;
            report.problems.push(format!("homology over {:?} is {other}", field));
        }
    }
    let mut out = String::new();
    match report.homology {
        Some(v) => out.push_str(&format!("homology: {v}\n")),
        None => out.push_str("homology: unavailable\n"),
    }
    for (i, v) in report.flagsums.iter().enumerate() {
        let shown = v.as_ref().map(format_scalar).unwrap_or_else(|| "unavailable".into());
        out.push_str(&format!("flagsum[{i}]: {shown}\n"));
    }
    for p in &report.problems {
        out.push_str(&format!("problem: {p}\n"));
    }
    out.push_str(if report.pass { "PASS\n" } else { "FAIL\n" });
    let mut record = report.to_json();
    record["config"] = config;
    out.push_str(&format!("# {record}\n"));
    Ok(Outcome {
        text: out,
        code: if report.pass { 0 } else { 2 },
    })
}

fn parse_range(s: &str) -> signspan::Result<(usize, usize)> {
    let bad = || Error::InvalidArgument(format!("bad n range {s:?}"));
    let (a, b) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let v = s.trim().parse().map_err(|_| bad())?;
            (v, v)
        }
    };
    if a > b || a < 2 {
        return Err(bad());
    }
    Ok((a, b))
}

fn cmd_bounds(a: &BoundsArgs, config: Value) -> signspan::Result<Outcome> {
    let (lo, hi) = parse_range(&a.n)?;
    let eps = parse_scalar(&a.epsilon)?;
    let c = parse_scalar(&a.c)?;
    let mut out = format!("# config {config}\n{}\n", bounds::CSV_HEADER);
    for n in lo..=hi {
        for row in bound_table(n, &eps, &c)? {
            out.push_str(&row.csv_row());
            out.push('\n');
        }
    }
    Ok(ok(out))
}

fn cmd_verify(a: &VerifyArgs, workers: usize) -> signspan::Result<Outcome> {
    let opts = VerifyOptions {
        only: a.only.clone(),
        samples: a.samples,
        seed: a.seed,
        workers,
        inject_fault: a.inject_fault,
    };
    let results = run_battery(&opts)?;
    let mut out = String::new();
    for r in &results {
        out.push_str(&format!("{} {}: {}\n", if r.pass { "PASS" } else { "FAIL" }, r.name, r.detail));
    }
    let all = results.iter().all(|r| r.pass);
    out.push_str(&format!("{} of {} checks passed\n", results.iter().filter(|r| r.pass).count(), results.len()));
    Ok(Outcome {
        text: out,
        code: if all { 0 } else { 2 },
    })
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let workers = match workers(cli.workers) {
        Ok(w) => w,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let replay: Vec<String> = argv[1..].to_vec();
    let outcome = match &cli.command {
        Command::Estimate(a) => cmd_estimate(a, workers, run_config("estimate", a, workers, &replay)),
        Command::Exact(a) => cmd_exact(a, workers, run_config("exact", a, workers, &replay)),
        Command::Eta(a) => cmd_eta(a, run_config("eta", a, workers, &replay)),
        Command::Bounds(a) => cmd_bounds(a, run_config("bounds", a, workers, &replay)),
        Command::Verify(a) => cmd_verify(a, workers),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let written = match &cli.output {
        Some(path) => fs::write(path, &outcome.text),
        None => std::io::stdout().write_all(outcome.text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    ExitCode::from(outcome.code)
}
