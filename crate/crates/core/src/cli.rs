//! The `tedium` command line.
//!
//! Exit codes: 0 success, 1 runtime error, 2 fit not accepted, 64 usage
//! error. Machine-readable output goes to `--output` (`-` is stdout);
//! diagnostics go to stderr.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::decay::{decay_curve, DecayParams};
use crate::error::Error;
use crate::estimate::{fit_loglinear, fit_nonlinear, FitMethod};
use crate::ingest::{self, bin_usage, parse_events, retag_intervals, EventFormat, Scope, TaggingEvent};
use crate::matching::{build_profile, similarity};
use crate::simulate::{simulate_cohort, CohortSpec, DEFAULT_OBJECT_ID, DEFAULT_ONTOLOGY_ID};
use crate::time::{parse_rate, Duration, TimeInstant, TimeUnit};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_NOT_ACCEPTED: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "tedium", version, about = "Exponential forgetting of tag interest")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate x0 and the tedium coefficient m for one user and scope.
    Fit(FitArgs),
    /// Generate a synthetic cohort and its ground truth.
    Simulate(SimulateArgs),
    /// Emit a decay curve as `t,x` CSV.
    Decay(DecayArgs),
    /// Compare two users' decay-weighted tag profiles.
    Match(MatchArgs),
    /// List retag intervals as CSV.
    Intervals(IntervalsArgs),
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Event file (`-` for stdin).
    #[arg(long)]
    input: String,
    /// csv or jsonl; inferred from the file extension when omitted.
    #[arg(long)]
    format: Option<EventFormat>,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    user: String,
    /// A tag name, `tag:<name>` or `ontology:<id>`.
    #[arg(long)]
    scope: Scope,
    /// Bin width, e.g. `1d` or `1w`.
    #[arg(long)]
    bin: Duration,
    #[arg(long, default_value = "nonlinear")]
    method: FitMethod,
    /// Span start (RFC 3339 or YYYY-MM-DD); defaults to the earliest event.
    #[arg(long)]
    start: Option<String>,
    /// Span end, exclusive; defaults to the end of the bin holding the
    /// latest event.
    #[arg(long)]
    end: Option<String>,
    /// Time unit for the reported m.
    #[arg(long, default_value = "s")]
    unit: TimeUnit,
    #[arg(long, default_value = "-")]
    output: String,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 20)]
    users: usize,
    #[arg(long, default_value_t = 150.0)]
    days: f64,
    /// Events per day at interest 1 (`/h`, `/w`, ... suffixes accepted).
    #[arg(long, default_value = "10")]
    lambda0: String,
    /// Tedium coefficient range `a:b`, per day unless suffixed.
    #[arg(long, default_value = "0.02:0.1")]
    m_range: String,
    #[arg(long, default_value = "1:5")]
    x0_range: String,
    #[arg(long, default_value_t = 5)]
    tags_per_user: usize,
    #[arg(long, default_value_t = 20)]
    tag_pool: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = DEFAULT_OBJECT_ID)]
    object: String,
    #[arg(long, default_value = DEFAULT_ONTOLOGY_ID)]
    ontology: String,
    #[arg(long, default_value = "2024-01-01T00:00:00Z")]
    origin: String,
    #[arg(long)]
    out_events: String,
    #[arg(long)]
    out_truth: String,
    /// Event format; inferred from `--out-events` when omitted.
    #[arg(long)]
    format: Option<EventFormat>,
}

#[derive(Debug, Args)]
struct DecayArgs {
    #[arg(long, allow_hyphen_values = true)]
    x0: f64,
    /// Tedium coefficient, per second unless suffixed (`0.1/d`).
    #[arg(long, allow_hyphen_values = true)]
    m: String,
    #[arg(long)]
    t_max: Duration,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    /// Unit of the `t` column.
    #[arg(long, default_value = "s")]
    unit: TimeUnit,
    #[arg(long, default_value = "-")]
    output: String,
}

#[derive(Debug, Args)]
struct MatchArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    user_a: String,
    #[arg(long)]
    user_b: String,
    /// Tedium coefficient, per second unless suffixed.
    #[arg(long, allow_hyphen_values = true)]
    m: String,
    /// Reference instant for both profiles.
    #[arg(long)]
    at: String,
    #[arg(long, default_value = "-")]
    output: String,
}

#[derive(Debug, Args)]
struct IntervalsArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value = "-")]
    output: String,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

type CmdResult = std::result::Result<i32, Failure>;

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
        }
    };
    let outcome = match cli.command {
        Command::Fit(a) => cmd_fit(a, stdout, stderr),
        Command::Simulate(a) => cmd_simulate(a, stdout),
        Command::Decay(a) => cmd_decay(a, stdout),
        Command::Match(a) => cmd_match(a, stdout, stderr),
        Command::Intervals(a) => cmd_intervals(a, stdout, stderr),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_RUNTIME
        }
    }
}

fn with_output(
    path: &str,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> crate::Result<()>,
) -> crate::Result<()> {
    if path == "-" {
        body(stdout)?;
        stdout.flush()?;
    } else {
        let mut file = BufWriter::new(File::create(path)?);
        body(&mut file)?;
        file.flush()?;
    }
    Ok(())
}

fn load_events(args: &InputArgs, stderr: &mut dyn Write) -> crate::Result<Vec<TaggingEvent>> {
    let format = args.format.unwrap_or_else(|| EventFormat::from_path(&args.input));
    let parsed = if args.input == "-" {
        parse_events(io::stdin().lock(), format)?
    } else {
        parse_events(BufReader::new(File::open(&args.input)?), format)?
    };
    for d in &parsed.diagnostics {
        let _ = writeln!(stderr, "{d}");
    }
    Ok(parsed.events)
}

fn timestamp_flag(name: &str, value: &str) -> std::result::Result<TimeInstant, Failure> {
    TimeInstant::parse_lenient(value).map_err(|_| Failure::Usage(format!("--{name}: invalid timestamp {value:?}")))
}

fn cmd_fit(args: FitArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let start = args.start.as_deref().map(|s| timestamp_flag("start", s)).transpose()?;
    let end = args.end.as_deref().map(|s| timestamp_flag("end", s)).transpose()?;
    let events = load_events(&args.input, stderr)?;

    let earliest = events.iter().map(|e| e.timestamp).min_by(|a, b| a.total_cmp(b));
    let latest = events.iter().map(|e| e.timestamp).max_by(|a, b| a.total_cmp(b));
    let start = match (start, earliest) {
        (Some(s), _) => s,
        (None, Some(s)) => s,
        (None, None) => return Err(Error::InsufficientData("input holds no events".into()).into()),
    };
    let width = args.bin.as_secs();
    let end = match (end, latest) {
        (Some(e), _) => e,
        (None, Some(last)) => {
            let bins = ((last - start).as_secs() / width).floor().max(0.0) + 1.0;
            start + Duration::from_secs(bins * width)
        }
        (None, None) => unreachable!("latest exists whenever earliest does"),
    };

    let series = bin_usage(&events, &args.user, &args.scope, args.bin, start, end)?;
    let fit = match args.method {
        FitMethod::Loglinear => fit_loglinear(&series)?,
        FitMethod::Nonlinear => fit_nonlinear(&series, None)?,
    };
    for w in &fit.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    let unit = args.unit.seconds();
    let doc = json!({
        "method": fit.method,
        "x0": fit.x0,
        "m": fit.m * unit,
        "time_unit": args.unit,
        "rmse": fit.rmse,
        "r_squared": fit.r_squared,
        "n_points": fit.n_points,
        "warnings": fit.warnings,
        "accepted": fit.accepted,
        "user_id": args.user,
        "scope": args.scope.to_string(),
        "start": series.start(),
    });
    with_output(&args.output, stdout, |out| {
        serde_json::to_writer(&mut *out, &doc)?;
        out.write_all(b"\n")?;
        Ok(())
    })?;
    Ok(if fit.accepted { EXIT_OK } else { EXIT_NOT_ACCEPTED })
}

fn parse_range(flag: &str, value: &str, unit: TimeUnit) -> std::result::Result<(f64, f64), Failure> {
    let usage = || Failure::Usage(format!("--{flag}: expected a:b, got {value:?}"));
    let (a, b) = value.split_once(':').ok_or_else(usage)?;
    let a = parse_rate(a, unit).map_err(|_| usage())?;
    let b = parse_rate(b, unit).map_err(|_| usage())?;
    if a > b {
        return Err(Failure::Usage(format!("--{flag}: lower bound exceeds upper bound in {value:?}")));
    }
    Ok((a, b))
}

fn cmd_simulate(args: SimulateArgs, stdout: &mut dyn Write) -> CmdResult {
    if args.users == 0 {
        return Err(Failure::Usage("--users must be at least 1".into()));
    }
    if !(args.days.is_finite() && args.days > 0.0) {
        return Err(Failure::Usage("--days must be positive".into()));
    }
    let lambda0 = parse_rate(&args.lambda0, TimeUnit::Day).map_err(|e| Failure::Usage(format!("--lambda0: {e}")))?;
    let m_range = parse_range("m-range", &args.m_range, TimeUnit::Day)?;
    // x0 is dimensionless: parse with a unit factor of one
    let x0_range = parse_range("x0-range", &args.x0_range, TimeUnit::Second)?;
    let spec = CohortSpec {
        n_users: args.users,
        horizon: Duration::from_days(args.days),
        lambda0,
        x0_range,
        m_range,
        tags_per_user: args.tags_per_user,
        tag_pool: args.tag_pool,
        seed: args.seed,
        object_id: args.object,
        ontology_id: args.ontology,
        origin: timestamp_flag("origin", &args.origin)?,
    };
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;

    let (events, truth) = simulate_cohort(&spec)?;
    let format = args.format.unwrap_or_else(|| EventFormat::from_path(&args.out_events));
    with_output(&args.out_events, stdout, |out| ingest::write_events(out, &events, format))?;
    with_output(&args.out_truth, stdout, |out| {
        serde_json::to_writer_pretty(&mut *out, &truth)?;
        out.write_all(b"\n")?;
        Ok(())
    })?;
    Ok(EXIT_OK)
}

fn cmd_decay(args: DecayArgs, stdout: &mut dyn Write) -> CmdResult {
    let m = parse_rate(&args.m, TimeUnit::Second).map_err(|e| Failure::Usage(format!("--m: {e}")))?;
    let params = DecayParams::new(args.x0, m)?;
    let curve = decay_curve(&params, args.t_max, args.samples)?;
    with_output(&args.output, stdout, |out| {
        writeln!(out, "t,x")?;
        for (t, x) in &curve {
            writeln!(out, "{},{}", t.in_unit(args.unit), x)?;
        }
        Ok(())
    })?;
    Ok(EXIT_OK)
}

fn cmd_match(args: MatchArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let m = parse_rate(&args.m, TimeUnit::Second).map_err(|e| Failure::Usage(format!("--m: {e}")))?;
    let at = timestamp_flag("at", &args.at)?;
    let events = load_events(&args.input, stderr)?;
    let a = build_profile(&events, &args.user_a, m, at)?;
    let b = build_profile(&events, &args.user_b, m, at)?;
    for p in [&a, &b].into_iter().filter(|p| p.is_empty()) {
        let _ = writeln!(stderr, "warning: no events for user {:?}", p.user_id);
    }
    let doc = json!({ "similarity": similarity(&a, &b), "profile_a": a, "profile_b": b });
    with_output(&args.output, stdout, |out| {
        serde_json::to_writer(&mut *out, &doc)?;
        out.write_all(b"\n")?;
        Ok(())
    })?;
    Ok(EXIT_OK)
}

fn cmd_intervals(args: IntervalsArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let events = load_events(&args.input, stderr)?;
    let intervals = retag_intervals(&events);
    with_output(&args.output, stdout, |out| ingest::write_intervals(out, &intervals))?;
    Ok(EXIT_OK)
}
