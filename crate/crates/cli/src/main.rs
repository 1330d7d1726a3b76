//! `exphist`: build, query and merge exponential-histogram sketches, and
//! run the accompanying theory and simulations.

mod error;
mod parse;
mod theory;

use std::fs;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use exphist::codec::{decode, encode};
use exphist::simulation::{report_csv, run_experiment, ExperimentKind, ExperimentPlan};
use exphist::sketch::SideStats;
use exphist::{ExponentialHistogram, SketchError};
use tempfile::NamedTempFile;

use crate::error::{usage, validation, CliError};

#[derive(Debug, Parser)]
#[command(
    name = "exphist",
    version,
    about = "Exponential-histogram quantile sketches"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a sketch from newline-delimited numbers.
    Build(BuildArgs),
    /// Estimate quantiles from a sketch.
    Query(QueryArgs),
    /// Merge sketches built with the same epsilon.
    Merge(MergeArgs),
    /// Print structural statistics of a sketch.
    Stats(StatsArgs),
    /// Run a seeded Monte Carlo experiment and write CSV.
    Simulate(SimulateArgs),
    /// Evaluate closed-form laws.
    ///
    /// Distributions: exp:LAMBDA, pareto:NU:BETA, gumbel:MU:SIGMA, geom:P,
    /// f0:LAMBDA and f1:LAMBDA. The last two are the parts of Exp(LAMBDA)
    /// below and above its split point, with ρ taken from --epsilon.
    Theory(theory::TheoryArgs),
}

#[derive(Debug, Args)]
struct BuildArgs {
    /// Input file; standard input when absent or `-`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Relative accuracy in (0, 1).
    #[arg(long)]
    epsilon: String,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct QueryArgs {
    sketch: PathBuf,
    /// Quantile levels in [0, 1]; repeat or separate with commas.
    #[arg(long = "q", required = true, num_args = 1.., value_delimiter = ',')]
    q: Vec<f64>,
}

#[derive(Debug, Args)]
struct MergeArgs {
    #[arg(required = true, num_args = 2..)]
    inputs: Vec<PathBuf>,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    sketch: PathBuf,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// size, occupancy, gap, tail (tail_mass), dkw (dkw_coverage) or accuracy.
    #[arg(long)]
    experiment: String,
    /// Input distribution; see `exphist theory --help`.
    #[arg(long)]
    dist: String,
    /// Comma-separated sample sizes.
    #[arg(
        long,
        default_value = "10,100,1000,10000,100000,1000000",
        value_delimiter = ',',
        value_parser = parse::count
    )]
    n_grid: Vec<u64>,
    #[arg(long, default_value = "1000", value_parser = parse::count)]
    reps: u64,
    #[arg(long, default_value = "0.01")]
    epsilon: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; standard output when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Writes `bytes` to a temporary file beside `path`, then renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn load(path: &Path) -> Result<ExponentialHistogram, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    decode(&text).map_err(|e| validation(format!("{}: {e}", path.display())))
}

fn summary_line(sketch: &ExponentialHistogram) -> String {
    let s = sketch.structural_stats().combined();
    format!(
        "n_total={} occupancy={} size={}",
        sketch.n_total(),
        s.map_or(0, |s| s.occupancy),
        s.map_or(0, |s| s.size)
    )
}

fn build(args: &BuildArgs) -> Result<(), CliError> {
    let config = parse::epsilon(&args.epsilon)?;
    let reader: Box<dyn Read> = match &args.input {
        Some(p) if p.as_os_str() != "-" => {
            Box::new(fs::File::open(p).map_err(|e| CliError::io(p, e))?)
        }
        _ => Box::new(io::stdin()),
    };
    let source = args.input.clone().unwrap_or_else(|| PathBuf::from("-"));
    let mut sketch = ExponentialHistogram::with_config(config);
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(&source, e))?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let x: f64 = text
            .parse()
            .map_err(|_| validation(format!("line {}: cannot parse {text:?}", i + 1)))?;
        if !x.is_finite() {
            return Err(validation(format!(
                "line {}: non-finite value {text:?}",
                i + 1
            )));
        }
        sketch
            .insert(x)
            .map_err(|e| validation(format!("line {}: {e}", i + 1)))?;
    }
    write_atomic(&args.output, encode(&sketch).as_bytes())?;
    eprintln!("{}", summary_line(&sketch));
    Ok(())
}

fn query(args: &QueryArgs) -> Result<String, CliError> {
    if let Some(q) = args.q.iter().find(|q| !(0.0..=1.0).contains(*q)) {
        return Err(usage(format!("q must lie in [0, 1], got {q}")));
    }
    let sketch = load(&args.sketch)?;
    let mut out = String::new();
    for &q in &args.q {
        let est = sketch.quantile(q).map_err(|e| match e {
            SketchError::Empty => validation(format!("{}: sketch is empty", args.sketch.display())),
            other => validation(other),
        })?;
        out.push_str(&format!("{q:?},{:?}\n", est.value));
    }
    Ok(out)
}

fn merge(args: &MergeArgs) -> Result<(), CliError> {
    let first = &args.inputs[0];
    let mut merged = load(first)?;
    for path in &args.inputs[1..] {
        let next = load(path)?;
        if next.config().epsilon_text() != merged.config().epsilon_text() {
            return Err(validation(format!(
                "epsilon mismatch: {} has {}, {} has {}",
                first.display(),
                merged.config().epsilon_text(),
                path.display(),
                next.config().epsilon_text()
            )));
        }
        merged.merge_from(&next).map_err(validation)?;
    }
    write_atomic(&args.output, encode(&merged).as_bytes())?;
    eprintln!("{}", summary_line(&merged));
    Ok(())
}

fn side_lines(out: &mut String, prefix: &str, s: &SideStats) {
    for (key, v) in [
        ("min_index", s.min_index),
        ("max_index", s.max_index),
        ("size", s.size as i64),
        ("occupancy", s.occupancy as i64),
        ("empty", s.empty as i64),
        ("longest_gap", s.longest_gap as i64),
    ] {
        out.push_str(&format!("{prefix}{key}={v}\n"));
    }
}

fn stats(args: &StatsArgs) -> Result<String, CliError> {
    let sketch = load(&args.sketch)?;
    let st = sketch.structural_stats();
    let mut out = format!("n={}\nzero_count={}\n", st.n, st.zero_count);
    if let Some(c) = st.combined() {
        out.push_str(&format!(
            "size={}\noccupancy={}\nempty={}\nlongest_gap={}\n",
            c.size, c.occupancy, c.empty, c.longest_gap
        ));
    }
    if let Some(p) = &st.positive {
        side_lines(&mut out, "positive_", p);
    }
    if let Some(n) = &st.negative {
        side_lines(&mut out, "negative_", n);
    }
    Ok(out)
}

fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let kind: ExperimentKind = args
        .experiment
        .parse()
        .map_err(|e: exphist::simulation::SimulationError| usage(e.to_string()))?;
    let config = parse::epsilon(&args.epsilon)?;
    let spec = parse::distribution(&args.dist, &config)?;
    let plan = ExperimentPlan::new(
        kind,
        spec,
        args.n_grid.clone(),
        args.reps,
        config.epsilon(),
        args.seed,
    );
    let report = run_experiment(&plan).map_err(|e| usage(e.to_string()))?;
    let mut bytes = Vec::new();
    report_csv(&report, &mut bytes).expect("writing to memory");
    match &args.csv {
        Some(path) => write_atomic(path, &bytes),
        None => io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::io(Path::new("-"), e)),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let text = match &cli.command {
        Command::Build(a) => return build(a),
        Command::Merge(a) => return merge(a),
        Command::Simulate(a) => return simulate(a),
        Command::Query(a) => query(a)?,
        Command::Stats(a) => stats(a)?,
        Command::Theory(a) => theory::run(a)?,
    };
    io::stdout()
        .write_all(text.as_bytes())
        .map_err(|e| CliError::io(Path::new("-"), e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
