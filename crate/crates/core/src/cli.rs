//! Command-line frontend.
//!
//! Exit codes: 0 success, 1 failed assertion (`--assert`), 2 usage, config or
//! invariant error, 3 I/O error. Progress goes to stderr; stdout carries only
//! the JSON summary requested with `--json`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bench::{self, SweepGrid, TrendStatus};
use crate::circuits::CircuitSpec;
use crate::error::Error;
use crate::probe::{load_dataset_dir, write_results_csv, ProbeExperiment, ProbeSummary};
use crate::quanv::{CircuitKind, LayerStack};
use crate::tensor_io::{
    load_image, load_run_config, save_feature_map, write_png_grid, ExportFormat,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ASSERT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "quanvkit",
    version,
    about = "Quanvolution with frozen random quantum circuits"
)]
pub struct Cli {
    /// Print a machine-readable summary on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// More progress output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply the configured quanvolution layers to one image.
    Quanvolve(QuanvolveArgs),
    /// Print the generated circuits and optionally render feature maps.
    Inspect(InspectArgs),
    /// Time the quanvolution over a parameter grid.
    Bench(BenchArgs),
    /// Compare quanvolution, classical convolution and raw-pixel features.
    Probe(ProbeArgs),
}

#[derive(Debug, Args)]
pub struct QuanvolveArgs {
    /// PNG or NPY image; overrides `input` in the config.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides `output` in the config.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, env = "QUANVKIT_WORKERS")]
    pub workers: Option<usize>,
    /// Min-max scale the input to [0, 1] instead of rejecting out-of-range pixels.
    #[arg(long)]
    pub normalize: bool,
    #[arg(long)]
    pub format: Option<ExportFormat>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Replaces the seed of layer `i` with `seed + i`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Image to run through the first layer.
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Where the feature-map grid PNG goes when `--image` is given.
    #[arg(long, default_value = "feature_grid.png")]
    pub output: PathBuf,
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, env = "QUANVKIT_WORKERS")]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Grid JSON; the built-in default grid when omitted.
    #[arg(long)]
    pub grid: Option<PathBuf>,
    #[arg(long, default_value_t = bench::DEFAULT_REPEATS)]
    pub repeats: usize,
    #[arg(long, required_unless_present = "check")]
    pub out: Option<PathBuf>,
    /// Exit 1 when a timing trend is violated.
    #[arg(long)]
    pub assert: bool,
    /// Check trends of an existing CSV instead of running the sweep.
    #[arg(long, conflicts_with_all = ["grid", "out"])]
    pub check: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbeArgs {
    /// Directory with MNIST IDX files or `{train,test}_{images,labels}.npy`.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, env = "QUANVKIT_WORKERS")]
    pub workers: Option<usize>,
    /// Seed of the frozen classical convolution.
    #[arg(long, default_value_t = 1)]
    pub conv_seed: u64,
    #[arg(long, default_value_t = 10)]
    pub pca_dim: usize,
    /// Use only the first N training samples.
    #[arg(long)]
    pub train_limit: Option<usize>,
    /// Use only the first N test samples.
    #[arg(long)]
    pub test_limit: Option<usize>,
    /// Exit 1 unless quanv features hold up against both baselines.
    #[arg(long)]
    pub assert: bool,
    /// Golden JSON (as written by `--save-golden`) to re-assert within the tolerance.
    #[arg(long, requires = "assert")]
    pub golden: Option<PathBuf>,
    #[arg(long)]
    pub save_golden: Option<PathBuf>,
    #[arg(long, default_value_t = 0.02)]
    pub tolerance: f64,
}

/// Headline probe numbers committed as a regression reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeGolden {
    pub raw_accuracy: f64,
    pub quanv_accuracy: f64,
    pub conv_accuracy: f64,
    pub raw_purity: f64,
    pub quanv_purity: f64,
    pub conv_purity: f64,
}

impl From<&ProbeSummary> for ProbeGolden {
    fn from(s: &ProbeSummary) -> Self {
        ProbeGolden {
            raw_accuracy: s.raw.mean_accuracy,
            quanv_accuracy: s.quanv.mean_accuracy,
            conv_accuracy: s.conv.mean_accuracy,
            raw_purity: s.raw_purity,
            quanv_purity: s.quanv_purity,
            conv_purity: s.conv_purity,
        }
    }
}

impl ProbeGolden {
    fn fields(&self) -> [(&'static str, f64); 6] {
        [
            ("raw_accuracy", self.raw_accuracy),
            ("quanv_accuracy", self.quanv_accuracy),
            ("conv_accuracy", self.conv_accuracy),
            ("raw_purity", self.raw_purity),
            ("quanv_purity", self.quanv_purity),
            ("conv_purity", self.conv_purity),
        ]
    }
}

/// Feature-quality checks: quanv accuracy against the raw-pixel baseline,
/// quanv purity against the classical-conv purity, and optionally every
/// headline number against a golden reference. Returns one message per failure.
pub fn probe_assertions(
    summary: &ProbeSummary,
    golden: Option<&ProbeGolden>,
    tol: f64,
) -> Vec<String> {
    let mut failures = Vec::new();
    if summary.quanv.mean_accuracy < summary.raw.mean_accuracy - tol {
        failures.push(format!(
            "quanv accuracy {:.4} < raw accuracy {:.4} - {tol}",
            summary.quanv.mean_accuracy, summary.raw.mean_accuracy
        ));
    }
    if summary.quanv_purity < summary.conv_purity - tol {
        failures.push(format!(
            "quanv purity {:.4} < conv purity {:.4} - {tol}",
            summary.quanv_purity, summary.conv_purity
        ));
    }
    if let Some(golden) = golden {
        let now = ProbeGolden::from(summary);
        for ((name, got), (_, want)) in now.fields().into_iter().zip(golden.fields()) {
            if (got - want).abs() > tol {
                failures.push(format!(
                    "{name} {got:.4} differs from golden {want:.4} by more than {tol}"
                ));
            }
        }
    }
    failures
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Info,
        1 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_target(false)
        .try_init();

    let outcome = match &cli.command {
        Command::Quanvolve(a) => cmd_quanvolve(a),
        Command::Inspect(a) => cmd_inspect(a, cli.json),
        Command::Bench(a) => cmd_bench(a),
        Command::Probe(a) => cmd_probe(a),
    };
    match outcome {
        Ok(Outcome { code, summary }) => {
            if cli.json {
                let _ = writeln!(std::io::stdout(), "{summary}");
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// The exit code for a failed command.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_io() {
        EXIT_IO
    } else {
        EXIT_USAGE
    }
}

struct Outcome {
    code: i32,
    summary: serde_json::Value,
}

fn workers_or(flag: Option<usize>, fallback: usize) -> crate::Result<usize> {
    match flag.unwrap_or(fallback) {
        0 => Err(Error::InvalidArgument("--workers must be >= 1".into())),
        w => Ok(w),
    }
}

fn cmd_quanvolve(a: &QuanvolveArgs) -> crate::Result<Outcome> {
    let config = load_run_config(&a.config)?;
    let input = a.input.clone().or(config.input.clone()).ok_or_else(|| {
        Error::InvalidArgument("no input: pass --input or set `input` in the config".into())
    })?;
    let output = a.output.clone().or(config.output.clone()).ok_or_else(|| {
        Error::InvalidArgument("no output: pass --output or set `output` in the config".into())
    })?;
    let workers = workers_or(a.workers, config.workers)?;
    let format = a.format.unwrap_or(config.format);

    let image = load_image(&input, a.normalize || config.normalize)?;
    let stack = LayerStack::new(&config.layers)?;
    let start = Instant::now();
    let map = stack.run(&image, workers)?;
    let elapsed = start.elapsed().as_secs_f64();
    save_feature_map(&map, &output, format)?;

    let shape = map.shape();
    log::info!(
        "{} -> {} [{}x{}x{}], {} circuit evaluations, {elapsed:.3}s with {workers} worker(s)",
        input.display(),
        output.display(),
        shape[0],
        shape[1],
        shape[2],
        stack.circuit_evals()
    );
    Ok(Outcome {
        code: EXIT_OK,
        summary: json!({
            "input": input,
            "output": output,
            "shape": shape,
            "circuit_evals": stack.circuit_evals(),
            "wall_time_s": elapsed,
            "workers": workers,
        }),
    })
}

fn gate_table(layer: usize, config: &crate::quanv::QuanvConfig, ansatz: &CircuitSpec) -> String {
    let k2 = config.kernel_size * config.kernel_size;
    let kind = match config.circuit_kind {
        CircuitKind::RandomLayer => "random-layer",
        CircuitKind::Entangled => "entangled",
    };
    let mut s = format!(
        "layer {layer}: {kind}, K={} S={} n={} F={} seed={}\n",
        config.kernel_size, config.stride, config.n_qubits, config.out_channels, config.seed
    );
    s.push_str(&format!(
        "  {:>4}  {:<6}{:<18}{}\n",
        "#", "stage", "gate", "angle"
    ));
    for q in 0..k2 {
        s.push_str(&format!(
            "  {:>4}  {:<6}RY  q{q:<2}        pi*x[{q}]\n",
            q, "enc"
        ));
    }
    for (i, gate) in ansatz.gates().iter().enumerate() {
        s.push_str(&format!("  {:>4}  {:<6}{gate}\n", k2 + i, "ans"));
    }
    s
}

fn cmd_inspect(a: &InspectArgs, json_stdout: bool) -> crate::Result<Outcome> {
    let mut config = load_run_config(&a.config)?;
    if let Some(seed) = a.seed {
        for (i, layer) in config.layers.iter_mut().enumerate() {
            layer.seed = seed + i as u64;
        }
    }
    let stack = LayerStack::new(&config.layers)?;
    let mut layers = Vec::new();
    for (i, q) in stack.layers().iter().enumerate() {
        // With --json the table moves to stderr so stdout stays parseable.
        let table = gate_table(i, q.config(), q.ansatz());
        // A closed pipe (e.g. `| head`) is not an error for a listing.
        let _ = if json_stdout {
            std::io::stderr().write_all(table.as_bytes())
        } else {
            std::io::stdout().write_all(table.as_bytes())
        };
        layers.push(json!({ "config": q.config(), "circuit": q.ansatz() }));
    }

    let mut summary = json!({ "layers": layers });
    if let Some(path) = &a.image {
        let image = load_image(path, a.normalize || config.normalize)?;
        let workers = workers_or(a.workers, config.workers)?;
        let map = stack.layers()[0].quanvolve_parallel(&image, workers)?;
        let scales = write_png_grid(&map, &a.output)?;
        let informative = scales.iter().filter(|s| !s.is_constant()).count();
        log::info!(
            "{}: {informative} of {} channels non-constant, grid written to {}",
            path.display(),
            scales.len(),
            a.output.display()
        );
        summary["grid"] = json!({
            "path": a.output,
            "channels": scales.len(),
            "non_constant_channels": informative,
        });
    }
    Ok(Outcome {
        code: EXIT_OK,
        summary,
    })
}

fn trend_summary(report: &bench::TrendReport) -> serde_json::Value {
    let axes: serde_json::Map<String, serde_json::Value> = report
        .axes
        .iter()
        .map(|(axis, status)| {
            let v = match status {
                TrendStatus::Pass { .. } => "pass",
                TrendStatus::Fail { .. } => "fail",
                TrendStatus::NotCovered => "not-covered",
            };
            (axis.to_string(), json!(v))
        })
        .collect();
    json!({ "passed": report.passed(), "axes": axes })
}

fn cmd_bench(a: &BenchArgs) -> crate::Result<Outcome> {
    let records = if let Some(csv) = &a.check {
        bench::read_csv(csv)?
    } else {
        let grid = match &a.grid {
            Some(p) => SweepGrid::load(p)?,
            None => SweepGrid::default_grid(),
        };
        let out = a.out.as_ref().expect("clap requires --out without --check");
        let records = bench::run_sweep(&grid, a.repeats)?;
        bench::write_csv(&records, out)?;
        let gp = out.with_extension("gp");
        let name = out
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        fs::write(&gp, bench::gnuplot_script(&name)).map_err(|e| Error::io(&gp, e))?;
        log::info!("{} records written to {}", records.len(), out.display());
        records
    };

    let mut summary = json!({ "records": records.len() });
    let speedups: Vec<_> = bench::speedups(&records)
        .into_iter()
        .map(|(r, s)| json!({ "image_size": r.image_size, "workers": r.workers, "speedup": s }))
        .collect();
    summary["speedups"] = json!(speedups);

    let mut code = EXIT_OK;
    match bench::check_trends(&records) {
        Ok(report) => {
            eprint!("{report}");
            summary["trends"] = trend_summary(&report);
            if a.assert && !report.passed() {
                code = EXIT_ASSERT;
            }
        }
        // Nothing to compare is only an error when the caller asked for the check.
        Err(e) if a.assert => return Err(e),
        Err(e) => log::warn!("trend check skipped: {e}"),
    }
    Ok(Outcome { code, summary })
}

fn read_golden(path: &Path) -> crate::Result<ProbeGolden> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Schema {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn cmd_probe(a: &ProbeArgs) -> crate::Result<Outcome> {
    let config = load_run_config(&a.config)?;
    let golden = a.golden.as_deref().map(read_golden).transpose()?;
    let (mut train, mut test) = load_dataset_dir(&a.dataset)?;
    if let Some(n) = a.train_limit {
        train = train.take(n);
    }
    if let Some(n) = a.test_limit {
        test = test.take(n);
    }
    log::info!(
        "probe on {} train / {} test samples",
        train.len(),
        test.len()
    );

    let mut experiment = ProbeExperiment::new(config.layers);
    experiment.conv_seed = a.conv_seed;
    experiment.pca_dim = a.pca_dim;
    experiment.workers = workers_or(a.workers, config.workers)?;
    let summary = experiment.run(&train, &test)?;
    write_results_csv(&summary, &a.out)?;
    if let Some(path) = &a.save_golden {
        let text = serde_json::to_string_pretty(&ProbeGolden::from(&summary))
            .expect("plain struct serializes");
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))?;
    }
    log::info!(
        "accuracy raw {:.4} quanv {:.4} conv {:.4}; purity raw {:.4} quanv {:.4} conv {:.4}",
        summary.raw.mean_accuracy,
        summary.quanv.mean_accuracy,
        summary.conv.mean_accuracy,
        summary.raw_purity,
        summary.quanv_purity,
        summary.conv_purity
    );

    let mut code = EXIT_OK;
    let mut json_summary = serde_json::to_value(&summary).expect("plain struct serializes");
    if a.assert {
        let failures = probe_assertions(&summary, golden.as_ref(), a.tolerance);
        for f in &failures {
            eprintln!("FAIL {f}");
        }
        if !failures.is_empty() {
            code = EXIT_ASSERT;
        }
        json_summary["assertion_failures"] = json!(failures);
    }
    Ok(Outcome {
        code,
        summary: json_summary,
    })
}
