//! `fuzzy-ari`: adjusted Rand indices from the command line.

mod records;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fuzzy_ari::experiments::{
    repeat_adjustments, run_benchmark, run_toy, summarize_errors, DIRICHLET_MODELS,
};
use fuzzy_ari::synth::ToyName;
use fuzzy_ari::{
    adjusted_batch, toy_allocations, Error, FactorialGrid, IndexKind, McConfig, Membership,
    ModelFamily, RandomModel,
};
use log::info;

use records::{write_records, Record};

const SEED_ENV: &str = "FUZZY_ARI_SEED";
const WORKERS_ENV: &str = "FUZZY_ARI_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "fuzzy-ari",
    version,
    about = "Adjusted Rand indices for hard and fuzzy clusterings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compare two membership matrices under each model.
    Compare(CompareArgs),
    /// Write the nine-point toy matrices and run their ten comparisons.
    Toy(ToyArgs),
    /// Run a factorial grid and emit one row per cell, replicate and model.
    Benchmark(BenchmarkArgs),
    /// Repeat adjustments on a grid and summarize Monte-Carlo error per model.
    ErrorAnalysis(ErrorArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Index kind: ndc or brouwer.
    #[arg(long, default_value = "ndc", value_parser = parse_kind)]
    kind: IndexKind,
    /// Monte-Carlo samples per expectation.
    #[arg(long, default_value_t = fuzzy_ari::expectation::DEFAULT_SAMPLES)]
    samples: u64,
    /// Base seed; drawn from entropy and reported on stderr when absent.
    #[arg(long, env = SEED_ENV)]
    seed: Option<u64>,
    /// Monte-Carlo workers (the result depends on this value).
    #[arg(long, env = WORKERS_ENV, default_value_t = 1)]
    workers: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn mc(&self) -> McConfig {
        let seed = self.seed.unwrap_or_else(|| {
            let s = rand::random();
            eprintln!("seed: {s}");
            s
        });
        McConfig::new(self.samples, seed).with_workers(self.workers)
    }

    fn sink(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

#[derive(Debug, Args)]
struct CompareArgs {
    first: PathBuf,
    second: PathBuf,
    /// Comma-separated models among perm, cat, num, all, fit, sym, flat.
    #[arg(long, value_delimiter = ',', value_parser = parse_model, default_values = ["perm", "fit", "sym", "flat"])]
    models: Vec<ModelFamily>,
    /// Randomize the first clustering only, holding the second fixed.
    #[arg(long)]
    one_sided: bool,
    /// Use Monte Carlo even where a closed form exists.
    #[arg(long)]
    sampled: bool,
    /// Input files start with a header row.
    #[arg(long)]
    header: bool,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct ToyArgs {
    /// Directory receiving the five toy matrices.
    #[arg(long, default_value = "toy")]
    dir: PathBuf,
    #[arg(long, value_delimiter = ',', value_parser = parse_model, default_values = ["perm", "fit", "sym", "flat"])]
    models: Vec<ModelFamily>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct BenchmarkArgs {
    /// Grid description (JSON); the full benchmark design when absent.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', value_parser = parse_model, default_values = ["perm", "fit", "sym", "flat"])]
    models: Vec<ModelFamily>,
    /// Shrinks samples, replicates and grid value lists by this factor.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct ErrorArgs {
    /// Grid description (JSON); the 48-setting error-analysis design when absent.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Repetitions per comparison and model.
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, default_value_t = 0.01)]
    tolerance: f64,
    /// Shrinks samples, repetitions, replicates and grid value lists by this factor.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Also write every repetition value, one row per comparison and model, to this JSON file.
    #[arg(long)]
    details: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
}

fn parse_model(s: &str) -> Result<ModelFamily, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<IndexKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_numerical() {
            3
        } else if e.is_usage() {
            1
        } else {
            2
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self {
            code: 2,
            message: format!("I/O error: {e}"),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Compare(a) => compare(a),
        Command::Toy(a) => toy(a),
        Command::Benchmark(a) => benchmark(a),
        Command::ErrorAnalysis(a) => error_analysis(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read_matrix(path: &Path, header: bool) -> Result<Membership, Failure> {
    Membership::read_csv(path, header).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn compare(a: CompareArgs) -> Result<(), Failure> {
    let c1 = read_matrix(&a.first, a.header)?;
    let c2 = read_matrix(&a.second, a.header)?;
    let cfg = a.run.mc();
    let models: Vec<RandomModel> = a
        .models
        .iter()
        .map(|&f| {
            let m = if a.one_sided {
                RandomModel::one_sided(f)
            } else {
                RandomModel::two_sided(f)
            };
            if a.sampled {
                m.sampled()
            } else {
                m
            }
        })
        .collect();
    let cells = adjusted_batch(&[(&c1, &c2)], &models, a.run.kind, &cfg);
    let (first, second) = (
        a.first.display().to_string(),
        a.second.display().to_string(),
    );
    let records: Vec<Record> = cells
        .iter()
        .map(|c| Record::from_cell(None, &first, &second, c, a.run.kind, a.one_sided, cfg.seed))
        .collect();
    write_records(a.run.sink()?, a.run.format, &records)?;
    // Every model ran; report the first failure through the exit status.
    match cells.into_iter().find_map(|c| c.result.err()) {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn toy_file(name: ToyName) -> &'static str {
    match name {
        ToyName::UnevenLowFuzzy => "uneven_low_fuzzy.csv",
        ToyName::EvenLowFuzzy => "even_low_fuzzy.csv",
        ToyName::HighFuzzy => "high_fuzzy.csv",
        ToyName::UnevenHard => "uneven_hard.csv",
        ToyName::EvenHard => "even_hard.csv",
    }
}

fn toy(a: ToyArgs) -> Result<(), Failure> {
    std::fs::create_dir_all(&a.dir)?;
    let toy = toy_allocations::<f64>();
    for name in ToyName::ALL {
        toy.get(name)
            .write_csv_path(a.dir.join(toy_file(name)), false)?;
    }
    info!("toy matrices written to {}", a.dir.display());
    let cfg = a.run.mc();
    let cells = run_toy::<f64>(&a.models, a.run.kind, &cfg);
    let records: Vec<Record> = cells
        .iter()
        .map(|t| {
            Record::from_cell(
                Some(t.comparison),
                toy_file(t.first),
                toy_file(t.second),
                &t.cell,
                a.run.kind,
                false,
                cfg.seed,
            )
        })
        .collect();
    write_records(a.run.sink()?, a.run.format, &records)?;
    Ok(())
}

fn load_grid(path: Option<&Path>, default: FactorialGrid) -> Result<FactorialGrid, Failure> {
    let Some(path) = path else { return Ok(default) };
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        message: format!("{}: {e}", path.display()),
    })?;
    let grid: FactorialGrid = serde_json::from_str(&text).map_err(|e| Failure {
        code: 2,
        message: format!("{}: line {}: {e}", path.display(), e.line()),
    })?;
    grid.validate()?;
    Ok(grid)
}

fn check_scale(scale: f64) -> Result<(), Failure> {
    if scale > 0.0 && scale <= 1.0 {
        Ok(())
    } else {
        Err(Failure::usage(format!("--scale {scale} outside (0, 1]")))
    }
}

fn shrink(n: usize, scale: f64, floor: usize) -> usize {
    ((n as f64 * scale).round() as usize).max(floor)
}

fn shrink_list<T: Clone>(v: &[T], scale: f64) -> Vec<T> {
    v[..shrink(v.len(), scale, 1).min(v.len())].to_vec()
}

fn scale_grid(g: FactorialGrid, scale: f64) -> FactorialGrid {
    FactorialGrid {
        n_clusters: shrink_list(&g.n_clusters, scale),
        n_points: shrink_list(&g.n_points, scale),
        imbalance: shrink_list(&g.imbalance, scale),
        precision: shrink_list(&g.precision, scale),
        randomize_rate: shrink_list(&g.randomize_rate, scale),
        replicates: shrink(g.replicates, scale, 1),
        ..g
    }
}

fn scaled_mc(run: &RunArgs, scale: f64) -> McConfig {
    let cfg = run.mc();
    McConfig {
        samples: (cfg.samples as f64 * scale).round().max(1.0) as u64,
        ..cfg
    }
}

fn benchmark(a: BenchmarkArgs) -> Result<(), Failure> {
    check_scale(a.scale)?;
    let grid = scale_grid(
        load_grid(a.grid.as_deref(), FactorialGrid::benchmark())?,
        a.scale,
    );
    let cfg = scaled_mc(&a.run, a.scale);
    info!(
        "benchmark: {} cells, {} models, {} samples",
        grid.cells().len(),
        a.models.len(),
        cfg.samples
    );
    let rows = run_benchmark::<f64>(&grid, &a.models, a.run.kind, &cfg)?;
    write_records(a.run.sink()?, a.run.format, &rows)?;
    Ok(())
}

fn error_analysis(a: ErrorArgs) -> Result<(), Failure> {
    check_scale(a.scale)?;
    if a.reps < 2 {
        return Err(Failure::usage("--reps must be at least 2"));
    }
    let grid = scale_grid(
        load_grid(a.grid.as_deref(), FactorialGrid::error_analysis())?,
        a.scale,
    );
    let cfg = scaled_mc(&a.run, a.scale);
    let reps = shrink(a.reps, a.scale, 2);
    info!(
        "error analysis: {} cells, {reps} repetitions, {} samples",
        grid.cells().len(),
        cfg.samples
    );
    let cells = repeat_adjustments::<f64>(&grid, &DIRICHLET_MODELS, reps, a.run.kind, &cfg)?;
    if let Some(path) = &a.details {
        serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), &cells)
            .map_err(io::Error::from)?;
    }
    let summaries = summarize_errors(&cells, &DIRICHLET_MODELS, a.tolerance);
    write_records(a.run.sink()?, a.run.format, &summaries)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use fuzzy_ari::experiments::DEFAULT_MODELS;

    #[test]
    fn defaults_follow_the_documented_models() {
        let cli = Cli::try_parse_from(["fuzzy-ari", "compare", "a.csv", "b.csv"]).unwrap();
        let Command::Compare(a) = cli.command else {
            panic!("expected compare")
        };
        assert_eq!(a.models, DEFAULT_MODELS);
        assert_eq!(a.run.kind, IndexKind::Ndc);
        assert_eq!(a.run.samples, 10_000_000);
    }

    #[test]
    fn scaling_keeps_at_least_one_level() {
        let g = scale_grid(FactorialGrid::error_analysis(), 0.1);
        assert_eq!(g.n_settings(), 1);
        assert_eq!(g.replicates, 1);
        let g = scale_grid(FactorialGrid::benchmark(), 0.5);
        assert_eq!(g.n_clusters, vec![2, 4, 8, 16]);
    }

    #[test]
    fn exit_codes_by_error_class() {
        assert_eq!(
            Failure::from(Error::Parse {
                line: 3,
                reason: "x".into()
            })
            .code,
            2
        );
        assert_eq!(
            Failure::from(Error::UndefinedAdjustment { expected: 1.0 }).code,
            3
        );
        assert_eq!(Failure::from(Error::Unsupported("x".into())).code, 1);
    }
}
