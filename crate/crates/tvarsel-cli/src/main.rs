//! `tvarsel` — forecaster selection for possibly time-varying
//! autoregressions, from the command line.
//!
//! Four subcommands wrap the library:
//!
//! * `simulate` — draw a seeded sample path from a catalog model;
//! * `select`   — run the two-stage forecaster selection on a single-column
//!   CSV series and write the per-horizon report plus the chosen test-segment
//!   forecasts;
//! * `theory`   — population quantities for a catalog model: the selection
//!   margin `f(δ)` over a margin grid, the nonstationarity bounds
//!   `D_sup`/`D_inf`, and the δ-threshold arithmetic;
//! * `experiment` — seeded Monte Carlo replications of the selection
//!   procedure with decision-agreement and ratio tables.
//!
//! Every run writes its outputs into one directory (`--out-dir`, the
//! `TVARSEL_OUTPUT_DIR` environment variable, or the working directory)
//! together with a `manifest.json` recording the fully resolved
//! configuration, the seed, and the SHA-256 of every output file — enough to
//! re-run the command bit-identically. Nothing in the outputs depends on
//! wall-clock time or worker count.
//!
//! Failures print a single JSON line to stderr,
//! `{"error":{"kind":…,"class":…,"message":…}}`, and exit with 2 for I/O
//! problems, 3 for precondition violations (including flag parsing), and 4
//! for numerical degeneracies.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use tvarsel::error::{Error, ErrorClass};
use tvarsel::harness::{
    decision_table_to_csv, default_n_grid, ratio_curves, ratio_curves_to_csv, records_to_csv,
    run_experiment, same_decision_table, ExperimentPlan,
};
use tvarsel::select::{run_modified_procedure, run_procedure, standard_m, SelectionConfig};
use tvarsel::series::{format_value, read_series_csv, write_series_csv};
use tvarsel::theory::{d_bounds, decision_thresholds, f_delta_many};
use tvarsel::tvar::simulate_tvar;
use tvarsel::{catalog, Series};

#[derive(Parser)]
#[command(
    name = "tvarsel",
    version,
    about = "Select between stationary and windowed autoregressive forecasters",
    propagate_version = true
)]
struct Cli {
    /// Directory for output files (default: $TVARSEL_OUTPUT_DIR, else `.`).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Table output format; the manifest is always JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Cap on worker threads (default: one per logical CPU). Results do not
    /// depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn tag(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a catalog model and write the sample path.
    Simulate(SimulateArgs),
    /// Run the two-stage forecaster selection on a series file.
    Select(SelectArgs),
    /// Population selection margin and δ thresholds for a catalog model.
    Theory(TheoryArgs),
    /// Monte Carlo replications of the selection procedure.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Catalog model label (see `--list-models`).
    #[arg(long, required_unless_present = "list_models")]
    model: Option<String>,

    /// Number of observations to draw.
    #[arg(long, required_unless_present = "list_models")]
    n: Option<usize>,

    /// RNG seed; equal seeds give byte-identical output.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Print the catalog labels and exit.
    #[arg(long)]
    list_models: bool,
}

#[derive(Args)]
struct SelectArgs {
    /// Input series: single-column CSV, optional header line.
    #[arg(long)]
    input: PathBuf,

    /// Validation/test segment length m (default: ⌊L^0.85/4⌋ for an input of
    /// length L). The last m points are held out as the test segment.
    #[arg(long)]
    m: Option<usize>,

    /// Largest candidate autoregressive order.
    #[arg(long, default_value_t = 7)]
    p_max: usize,

    /// Largest forecast horizon; the report has one row per h = 1..=h_max.
    #[arg(long, default_value_t = 10)]
    h_max: usize,

    /// Decision margin δ: the windowed forecaster is chosen only when the
    /// validation MSPE ratio exceeds 1 + δ.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,

    /// Smallest window length (default: ⌊(L/2)^0.8⌋).
    #[arg(long)]
    n_min: Option<usize>,

    /// Largest window length (default: ⌊L^0.8⌋).
    #[arg(long)]
    n_max: Option<usize>,

    /// Number of window-grid points (default: every integer in range when
    /// --n-min/--n-max are given, else a ~25-point stepped grid).
    #[arg(long)]
    n_count: Option<usize>,

    /// Subtract the sample mean before selecting. Reported MSPEs then refer
    /// to the demeaned series; forecasts are written with the mean added
    /// back.
    #[arg(long)]
    demean: bool,

    /// Re-select the class winners on the validation segment (modified
    /// two-stage rule) instead of carrying the training-segment winners over.
    #[arg(long)]
    modified: bool,
}

#[derive(Args)]
struct TheoryArgs {
    /// Catalog model label.
    #[arg(long)]
    model: String,

    /// Combined sample size n = T + m the geometry is derived from.
    #[arg(long)]
    n: usize,

    /// Forecast horizon.
    #[arg(long, default_value_t = 1)]
    h: usize,

    /// Margins δ to evaluate f(δ) at (comma-separated).
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.0,0.01,0.05,0.1,0.15,0.2,0.4,0.6"
    )]
    delta: Vec<f64>,

    /// Validation/test segment length m (default: ⌊n^0.85/4⌋).
    #[arg(long)]
    m: Option<usize>,

    /// Largest candidate autoregressive order.
    #[arg(long, default_value_t = 7)]
    p_max: usize,

    /// Smallest window length (default: ⌊(n/2)^0.8⌋).
    #[arg(long)]
    n_min: Option<usize>,

    /// Largest window length (default: ⌊n^0.8⌋).
    #[arg(long)]
    n_max: Option<usize>,

    /// Number of window-grid points (default: every integer in range when
    /// --n-min/--n-max are given, else a ~25-point stepped grid).
    #[arg(long)]
    n_count: Option<usize>,

    /// Bound on spectral drift relative to the spectral floor; enables the
    /// window-growth condition check in thresholds.json.
    #[arg(long)]
    drift_ratio: Option<f64>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Catalog model label.
    #[arg(long)]
    model: String,

    /// Combined sample size per replication (training + test segment).
    #[arg(long)]
    n: usize,

    /// Number of replications.
    #[arg(long)]
    reps: usize,

    /// Base seed; replication r uses an independent stream mixed from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Horizons to evaluate (comma-separated, ascending).
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9,10")]
    horizons: Vec<usize>,

    /// Margins δ for the decision-agreement table (comma-separated).
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.0,0.01,0.05,0.1,0.15,0.2,0.4,0.6"
    )]
    deltas: Vec<f64>,

    /// Validation/test segment length m (default: ⌊n^0.85/4⌋).
    #[arg(long)]
    m: Option<usize>,

    /// Largest candidate autoregressive order (default: 7).
    #[arg(long)]
    p_max: Option<usize>,

    /// Smallest window length (default: ⌊(n/2)^0.8⌋).
    #[arg(long)]
    n_min: Option<usize>,

    /// Largest window length (default: ⌊n^0.8⌋).
    #[arg(long)]
    n_max: Option<usize>,

    /// Number of window-grid points (default: every integer in range when
    /// --n-min/--n-max are given, else a ~25-point stepped grid).
    #[arg(long)]
    n_count: Option<usize>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                std::process::exit(0);
            }
            eprintln!(
                "{}",
                error_json_raw("invalid-arguments", "precondition", &e.to_string())
            );
            std::process::exit(3);
        }
    };
    if let Err(e) = run(cli) {
        eprintln!("{}", error_json(&e));
        std::process::exit(match e.class() {
            ErrorClass::Io => 2,
            ErrorClass::Precondition => 3,
            ErrorClass::Numerical => 4,
        });
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(threads) = cli.threads {
        // Build the global pool once; a second invocation (only possible in
        // tests calling run twice) keeps the first size, which is harmless
        // because results never depend on it.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let out_dir = resolve_out_dir(cli.out_dir.as_deref())?;
    match cli.command {
        Command::Simulate(args) => cmd_simulate(&out_dir, cli.format, args),
        Command::Select(args) => cmd_select(&out_dir, cli.format, args),
        Command::Theory(args) => cmd_theory(&out_dir, cli.format, args),
        Command::Experiment(args) => cmd_experiment(&out_dir, cli.format, args),
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SimulateParams {
    model: String,
    n: usize,
    seed: u64,
}

fn cmd_simulate(out_dir: &Path, format: Format, args: SimulateArgs) -> Result<(), Error> {
    if args.list_models {
        for label in catalog::MODEL_LABELS {
            println!("{label}");
        }
        return Ok(());
    }
    let model = args.model.expect("required by the argument parser");
    let n = args.n.expect("required by the argument parser");
    let spec = catalog::model_by_label(&model)?;
    let x = simulate_tvar(&spec, n, args.seed)?;

    let mut outputs = Vec::new();
    match format {
        Format::Csv => {
            let path = out_dir.join("series.csv");
            write_series_csv(&path, &x, Some("x"))?;
            outputs.push(path);
        }
        Format::Json => {
            #[derive(Serialize)]
            struct SeriesJson<'a> {
                model: &'a str,
                values: &'a [f64],
            }
            outputs.push(write_json(
                out_dir,
                "series.json",
                &SeriesJson {
                    model: &model,
                    values: x.values(),
                },
            )?);
        }
    }
    write_manifest(
        out_dir,
        "simulate",
        format,
        &SimulateParams {
            model,
            n,
            seed: args.seed,
        },
        &outputs,
    )
}

#[derive(Serialize)]
struct SelectParams {
    input: String,
    input_sha256: String,
    demean: bool,
    modified: bool,
    config: SelectionConfig,
}

fn cmd_select(out_dir: &Path, format: Format, args: SelectArgs) -> Result<(), Error> {
    if !args.input.exists() {
        return Err(Error::InputNotFound {
            path: args.input.display().to_string(),
        });
    }
    let raw = read_series_csv(&args.input)?;
    let l = raw.len();

    let m = args.m.unwrap_or_else(|| standard_m(l));
    let n_grid = match resolve_grid(l, args.n_min, args.n_max, args.n_count)? {
        Some(grid) => grid,
        None => default_n_grid(l)?,
    };
    let max_n = n_grid.last().copied().unwrap_or(0);

    // The last m points are the test segment, so the training range is
    // L − m; spell out the combined length the chosen geometry needs.
    let needed = (3 * m + max_n)
        .max(2 * m + args.h_max + max_n)
        .max(3 * m + args.h_max + args.p_max);
    if l < needed {
        return Err(Error::InsufficientData { needed, got: l });
    }

    let config = SelectionConfig::new(l - m, m, args.p_max, n_grid, args.h_max, args.delta)?;

    let (x, mean) = if args.demean {
        let mean = raw.values().iter().sum::<f64>() / l as f64;
        let centered: Vec<f64> = raw.values().iter().map(|v| v - mean).collect();
        (Series::new(centered)?, mean)
    } else {
        (raw, 0.0)
    };

    let mut report = if args.modified {
        run_modified_procedure(&x, &config)?
    } else {
        run_procedure(&x, &config)?
    };
    if mean != 0.0 {
        for row in &mut report.rows {
            if let Some(f) = &mut row.forecasts_m3 {
                for v in f.iter_mut() {
                    *v += mean;
                }
            }
        }
    }

    let mut outputs = Vec::new();
    match format {
        Format::Csv => {
            outputs.push(write_text(out_dir, "report.csv", &report.to_csv())?);
            let mut forecasts = String::from("h,target,forecast\n");
            for row in &report.rows {
                if let Some(f) = &row.forecasts_m3 {
                    for (i, v) in f.iter().enumerate() {
                        let _ = writeln!(
                            forecasts,
                            "{},{},{}",
                            row.h,
                            config.t_len() + 1 + i,
                            format_value(*v)
                        );
                    }
                }
            }
            outputs.push(write_text(out_dir, "forecasts.csv", &forecasts)?);
        }
        Format::Json => {
            outputs.push(write_json(out_dir, "report.json", &report)?);
        }
    }
    write_manifest(
        out_dir,
        "select",
        format,
        &SelectParams {
            input: args.input.display().to_string(),
            input_sha256: sha256_file(&args.input)?,
            demean: args.demean,
            modified: args.modified,
            config,
        },
        &outputs,
    )
}

#[derive(Serialize)]
struct TheoryParams {
    model: String,
    n: usize,
    t_len: usize,
    m: usize,
    p_max: usize,
    h: usize,
    deltas: Vec<f64>,
    n_grid: Vec<usize>,
    drift_ratio: Option<f64>,
}

#[derive(Serialize)]
struct MarginRow {
    delta: f64,
    f: f64,
}

#[derive(Serialize)]
struct ThresholdsOut {
    rho: f64,
    d_sup: f64,
    d_inf: f64,
    delta_lower: f64,
    delta_upper: f64,
    n_condition: tvarsel::theory::NCondition,
}

fn cmd_theory(out_dir: &Path, format: Format, args: TheoryArgs) -> Result<(), Error> {
    let spec = catalog::model_by_label(&args.model)?;
    let m = args.m.unwrap_or_else(|| standard_m(args.n));
    if m == 0 || args.n <= m {
        return Err(Error::InvalidConfig(format!(
            "sample size {} leaves no room for a segment of length {m}",
            args.n
        )));
    }
    let t_len = args.n - m;
    let n_grid = match resolve_grid(args.n, args.n_min, args.n_max, args.n_count)? {
        Some(grid) => grid,
        None => default_n_grid(args.n)?,
    };

    let f = f_delta_many(&spec, t_len, m, args.p_max, &n_grid, args.h, &args.delta)?;
    let rows: Vec<MarginRow> = args
        .delta
        .iter()
        .zip(&f)
        .map(|(&delta, &f)| MarginRow { delta, f })
        .collect();

    let (d_sup, d_inf) = d_bounds(&spec, t_len, m, args.h)?;
    let th = decision_thresholds(
        &spec,
        t_len,
        m,
        args.h,
        args.drift_ratio,
        args.drift_ratio.map(|_| n_grid.last().copied().unwrap_or(0)),
    )?;

    let mut outputs = Vec::new();
    match format {
        Format::Csv => {
            let mut csv = String::from("delta,f\n");
            for row in &rows {
                let _ = writeln!(csv, "{},{}", format_value(row.delta), format_value(row.f));
            }
            outputs.push(write_text(out_dir, "margin.csv", &csv)?);
        }
        Format::Json => {
            outputs.push(write_json(out_dir, "margin.json", &rows)?);
        }
    }
    outputs.push(write_json(
        out_dir,
        "thresholds.json",
        &ThresholdsOut {
            rho: th.rho,
            d_sup,
            d_inf,
            delta_lower: th.delta_lower,
            delta_upper: th.delta_upper,
            n_condition: th.n_condition,
        },
    )?);
    write_manifest(
        out_dir,
        "theory",
        format,
        &TheoryParams {
            model: args.model,
            n: args.n,
            t_len,
            m,
            p_max: args.p_max,
            h: args.h,
            deltas: args.delta,
            n_grid,
            drift_ratio: args.drift_ratio,
        },
        &outputs,
    )
}

#[derive(Serialize)]
struct ExperimentParams {
    plan: ExperimentPlan,
    resolved: SelectionConfig,
    failures: Vec<tvarsel::harness::ReplicationFailure>,
}

fn cmd_experiment(out_dir: &Path, format: Format, args: ExperimentArgs) -> Result<(), Error> {
    let mut plan = ExperimentPlan::new(args.model, args.n, args.reps, args.seed);
    plan.horizons = args.horizons;
    plan.deltas = args.deltas;
    plan.m = args.m;
    plan.p_max = args.p_max;
    plan.n_grid = resolve_grid(args.n, args.n_min, args.n_max, args.n_count)?;
    let (_, resolved) = plan.resolve()?;

    let outcome = run_experiment(&plan)?;
    let decisions = same_decision_table(&outcome.records, &plan.deltas, &plan.horizons)?;
    let ratios = ratio_curves(&outcome.records)?;

    let mut outputs = Vec::new();
    match format {
        Format::Csv => {
            outputs.push(write_text(
                out_dir,
                "records.csv",
                &records_to_csv(&outcome.records),
            )?);
            outputs.push(write_text(
                out_dir,
                "decisions.csv",
                &decision_table_to_csv(&decisions),
            )?);
            outputs.push(write_text(
                out_dir,
                "ratios.csv",
                &ratio_curves_to_csv(&ratios),
            )?);
        }
        Format::Json => {
            outputs.push(write_json(out_dir, "records.json", &outcome.records)?);
            outputs.push(write_json(out_dir, "decisions.json", &decisions)?);
            outputs.push(write_json(out_dir, "ratios.json", &ratios)?);
        }
    }
    write_manifest(
        out_dir,
        "experiment",
        format,
        &ExperimentParams {
            plan,
            resolved,
            failures: outcome.failures,
        },
        &outputs,
    )
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

fn resolve_out_dir(flag: Option<&Path>) -> Result<PathBuf, Error> {
    let dir = match flag {
        Some(p) => p.to_path_buf(),
        None => match std::env::var_os("TVARSEL_OUTPUT_DIR") {
            Some(v) => PathBuf::from(v),
            None => PathBuf::from("."),
        },
    };
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

/// The window grid from the `--n-min/--n-max/--n-count` flags: `None` when
/// no flag was given (caller falls back to the default grid), otherwise
/// every integer in the range, thinned to at most `n_count` points.
fn resolve_grid(
    n: usize,
    n_min: Option<usize>,
    n_max: Option<usize>,
    n_count: Option<usize>,
) -> Result<Option<Vec<usize>>, Error> {
    if n_min.is_none() && n_max.is_none() && n_count.is_none() {
        return Ok(None);
    }
    let lo = n_min.unwrap_or((n as f64 / 2.0).powf(0.8).floor() as usize);
    let hi = n_max.unwrap_or((n as f64).powf(0.8).floor() as usize);
    if lo == 0 || hi < lo {
        return Err(Error::InvalidConfig(format!(
            "window grid range {lo}..={hi} is empty or starts at zero"
        )));
    }
    let step = match n_count {
        None => 1,
        Some(0) => {
            return Err(Error::InvalidConfig("--n-count must be at least 1".into()));
        }
        Some(1) => return Ok(Some(vec![lo])),
        Some(c) => (((hi - lo) as f64) / (c as f64 - 1.0)).ceil().max(1.0) as usize,
    };
    Ok(Some((lo..=hi).step_by(step).collect()))
}

#[derive(Serialize)]
struct Manifest<'a, P: Serialize> {
    command: &'static str,
    version: &'static str,
    format: &'static str,
    parameters: &'a P,
    outputs: Vec<OutputFile>,
}

#[derive(Serialize)]
struct OutputFile {
    file: String,
    sha256: String,
}

fn write_manifest<P: Serialize>(
    out_dir: &Path,
    command: &'static str,
    format: Format,
    parameters: &P,
    outputs: &[PathBuf],
) -> Result<(), Error> {
    let mut files = Vec::with_capacity(outputs.len());
    for path in outputs {
        files.push(OutputFile {
            file: path
                .file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_default(),
            sha256: sha256_file(path)?,
        });
    }
    let manifest = Manifest {
        command,
        version: env!("CARGO_PKG_VERSION"),
        format: format.tag(),
        parameters,
        outputs: files,
    };
    write_json(out_dir, "manifest.json", &manifest)?;
    Ok(())
}

fn write_text(out_dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Error> {
    let path = out_dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn write_json<T: Serialize>(out_dir: &Path, name: &str, value: &T) -> Result<PathBuf, Error> {
    let mut text =
        serde_json::to_string_pretty(value).expect("plain data structures always serialize");
    text.push('\n');
    write_text(out_dir, name, &text)
}

fn sha256_file(path: &Path) -> Result<String, Error> {
    let bytes = std::fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(64);
    for b in digest {
        let _ = write!(hex, "{b:02x}");
    }
    Ok(hex)
}

fn error_json(e: &Error) -> String {
    let class = match e.class() {
        ErrorClass::Io => "io",
        ErrorClass::Precondition => "precondition",
        ErrorClass::Numerical => "numerical",
    };
    error_json_raw(e.kind(), class, &e.to_string())
}

fn error_json_raw(kind: &str, class: &str, message: &str) -> String {
    #[derive(Serialize)]
    struct Payload<'a> {
        kind: &'a str,
        class: &'a str,
        message: &'a str,
    }
    #[derive(Serialize)]
    struct Wrapper<'a> {
        error: Payload<'a>,
    }
    serde_json::to_string(&Wrapper {
        error: Payload {
            kind,
            class,
            message,
        },
    })
    .expect("three strings always serialize")
}
