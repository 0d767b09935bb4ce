//! `rpcrank`: batch ranking of CSV tables with ranking principal curves.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rpc_rank::metarules::assess;
use rpc_rank::{
    attribute_rank_lists, evaluate_curve, fit_restarts, load_csv, median_rank_aggregation,
    normalize, pca_first_component, pca_scores, rank_from_scores, Data, EndpointMode, FitConfig,
    NormalizedData, OrientationVector, ProjectionConfig, Ranking, StepRule,
};

const EXIT_INPUT: u8 = 1;
const EXIT_NOT_CONVERGED: u8 = 2;
const EXIT_CHECK_FAILED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rpcrank",
    version,
    about = "Unsupervised ranking with monotone Bezier principal curves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a ranking curve and write the ranking.
    Fit(FitCmd),
    /// Rank with a baseline method.
    Baseline(BaselineCmd),
    /// Check the design rules on a fitted curve.
    Assess(AssessCmd),
    /// Fit a ranking curve and write sampled curve points.
    EmitCurve(EmitCurveCmd),
}

#[derive(Args)]
struct InputArgs {
    /// Header-first CSV file.
    #[arg(long)]
    input: PathBuf,
    /// Orientation per attribute, e.g. "+,+,-,-".
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
    /// Column holding object ids; rows are numbered from 1 otherwise.
    #[arg(long = "id-col")]
    id_col: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Normalization {
    /// Rescale each column to [0, 1].
    Minmax,
    /// Use values as given; they must lie in [0, 1].
    None,
}

#[derive(Clone, Copy, ValueEnum)]
enum Endpoints {
    Free,
    Fixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum Step {
    Preconditioned,
    Gram,
}

#[derive(Args)]
struct FitArgs {
    /// Relative objective decrease that stops the iteration.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long = "max-iter", default_value_t = 500)]
    max_iter: usize,
    /// Coarse projection grid size.
    #[arg(long, default_value_t = 64)]
    grid: usize,
    /// Golden-section bracket tolerance.
    #[arg(long = "gss-tol", default_value_t = 1e-6)]
    gss_tol: f64,
    #[arg(long, env = "RPCRANK_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Endpoints::Free)]
    endpoints: Endpoints,
    /// Keep control points inside the open unit cube.
    #[arg(long)]
    clamp: bool,
    #[arg(long = "clamp-margin", default_value_t = 1e-6)]
    clamp_margin: f64,
    #[arg(long = "step-rule", value_enum, default_value_t = Step::Preconditioned)]
    step_rule: Step,
    /// Fits with consecutive seeds; the lowest objective wins.
    #[arg(long, default_value_t = 1)]
    restarts: usize,
    #[arg(long, value_enum, default_value_t = Normalization::Minmax)]
    normalize: Normalization,
}

impl FitArgs {
    fn config(&self) -> FitConfig {
        FitConfig {
            xi: self.tol,
            max_iter: self.max_iter,
            endpoints: match self.endpoints {
                Endpoints::Free => EndpointMode::Free,
                Endpoints::Fixed => EndpointMode::Fixed,
            },
            clamp: self.clamp,
            clamp_margin: self.clamp_margin,
            seed: self.seed,
            step_rule: match self.step_rule {
                Step::Preconditioned => StepRule::Preconditioned,
                Step::Gram => StepRule::Gram,
            },
            projection: ProjectionConfig {
                grid_size: self.grid,
                gss_interval_tol: self.gss_tol,
                ..ProjectionConfig::default()
            },
        }
    }
}

#[derive(Args)]
struct FitCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    fit: FitArgs,
    /// Ranking CSV; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// JSON fit report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write sampled curve points here.
    #[arg(long = "emit-curve")]
    emit_curve: Option<PathBuf>,
    #[arg(long = "curve-samples", default_value_t = 200)]
    curve_samples: usize,
    /// Exit 3 when the fitted curve is not strictly monotone.
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Pca,
    Rankagg,
}

#[derive(Args)]
struct BaselineCmd {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    method: Method,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct AssessCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    fit: FitArgs,
    /// JSON rule report; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct EmitCurveCmd {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    fit: FitArgs,
    /// Curve CSV; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long = "curve-samples", default_value_t = 200)]
    curve_samples: usize,
}

struct Loaded {
    dataset: Data,
    alpha: OrientationVector,
    dropped_rows: usize,
}

fn load(args: &InputArgs) -> anyhow::Result<Loaded> {
    let alpha: OrientationVector = args.alpha.parse().context("invalid --alpha")?;
    let csv = load_csv::<f64>(&args.input, args.id_col.as_deref())?;
    let d = csv.dataset.n_attributes();
    if alpha.len() != d {
        bail!(
            "--alpha has {} entries but the input has {d} attribute columns",
            alpha.len()
        );
    }
    Ok(Loaded {
        dataset: csv.dataset,
        alpha,
        dropped_rows: csv.dropped_rows,
    })
}

fn normalized(ds: &Data, mode: Normalization) -> anyhow::Result<NormalizedData> {
    Ok(match mode {
        Normalization::Minmax => normalize(ds)?,
        Normalization::None => NormalizedData::from_unit_cube(ds.values.clone())?,
    })
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot write {}", path.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn emit(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn ranking_csv(ranking: &Ranking) -> String {
    let mut out = String::from("id,score,rank\n");
    for e in ranking.by_rank() {
        out.push_str(&format!("{},{:.6},{}\n", csv_field(&e.id), e.score, e.rank));
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn curve_csv(
    p: &rpc_rank::ControlPoints,
    bounds: &NormalizedData,
    samples: usize,
) -> anyhow::Result<String> {
    let d = p.dim();
    let mut out = String::from("s");
    for j in 1..=d {
        out.push_str(&format!(",f_{j}"));
    }
    for j in 1..=d {
        out.push_str(&format!(",x_{j}"));
    }
    out.push('\n');
    let samples = samples.max(2);
    for k in 0..samples {
        let s = k as f64 / (samples - 1) as f64;
        let f = evaluate_curve(p, s)?;
        let x = bounds.denormalize_row(&f);
        out.push_str(&format!("{s:?}"));
        for v in f.iter().chain(&x) {
            out.push_str(&format!(",{v:?}"));
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Serialize)]
struct FitDocument<'a> {
    alpha: String,
    n_objects: usize,
    dropped_rows: usize,
    parameter_size: usize,
    seed: u64,
    restarts: usize,
    config: &'a FitConfig,
    #[serde(flatten)]
    report: &'a rpc_rank::Report,
}

fn run_fit(cmd: &FitCmd) -> anyhow::Result<u8> {
    let loaded = load(&cmd.input)?;
    let cfg = cmd.fit.config();
    let nds = normalized(&loaded.dataset, cmd.fit.normalize)?;
    let out = fit_restarts(&nds, &loaded.alpha, &cfg, cmd.fit.restarts)?;
    let ranking = rank_from_scores(&loaded.dataset.object_ids, out.scores.as_slice())?;
    emit(cmd.output.as_deref(), ranking_csv(&ranking).as_bytes())?;
    if let Some(path) = &cmd.report {
        let doc = FitDocument {
            alpha: loaded.alpha.to_string(),
            n_objects: loaded.dataset.n_objects(),
            dropped_rows: loaded.dropped_rows,
            parameter_size: out.control_points.parameter_count(),
            seed: cfg.seed,
            restarts: cmd.fit.restarts.max(1),
            config: &cfg,
            report: &out.report,
        };
        write_atomic(
            path,
            (serde_json::to_string_pretty(&doc)? + "\n").as_bytes(),
        )?;
    }
    if let Some(path) = &cmd.emit_curve {
        write_atomic(
            path,
            curve_csv(&out.control_points, &nds, cmd.curve_samples)?.as_bytes(),
        )?;
    }
    if loaded.dropped_rows > 0 {
        eprintln!(
            "warning: dropped {} rows with missing or non-numeric cells",
            loaded.dropped_rows
        );
    }
    if cmd.strict && !out.report.monotone.passed() {
        eprintln!(
            "error: fitted curve is not strictly monotone: {:?}",
            out.report.monotone
        );
        return Ok(EXIT_CHECK_FAILED);
    }
    if !out.report.converged {
        eprintln!(
            "warning: not converged after {} iterations",
            out.report.iterations
        );
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(0)
}

#[derive(Serialize)]
struct BaselineDocument {
    method: Method,
    alpha: String,
    n_objects: usize,
    dropped_rows: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pca_direction: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pca_mean: Option<Vec<f64>>,
}

fn run_baseline(cmd: &BaselineCmd) -> anyhow::Result<u8> {
    let loaded = load(&cmd.input)?;
    let nds = normalize(&loaded.dataset)?;
    let mut doc = BaselineDocument {
        method: cmd.method,
        alpha: loaded.alpha.to_string(),
        n_objects: loaded.dataset.n_objects(),
        dropped_rows: loaded.dropped_rows,
        pca_direction: None,
        pca_mean: None,
    };
    let scores = match cmd.method {
        Method::Rankagg => median_rank_aggregation(&attribute_rank_lists(&nds, &loaded.alpha)?)?,
        Method::Pca => {
            let model = pca_first_component(&nds, &loaded.alpha)?;
            let scores = pca_scores(&model, &nds.values)?;
            doc.pca_direction = Some(model.w);
            doc.pca_mean = Some(model.mu);
            scores
        }
    };
    let ranking = rank_from_scores(&loaded.dataset.object_ids, &scores)?;
    emit(cmd.output.as_deref(), ranking_csv(&ranking).as_bytes())?;
    if let Some(path) = &cmd.report {
        write_atomic(
            path,
            (serde_json::to_string_pretty(&doc)? + "\n").as_bytes(),
        )?;
    }
    Ok(0)
}

fn run_assess(cmd: &AssessCmd) -> anyhow::Result<u8> {
    let loaded = load(&cmd.input)?;
    if matches!(cmd.fit.normalize, Normalization::None) {
        bail!("assess always min-max normalizes; drop --normalize none");
    }
    let report = assess(&loaded.dataset, &loaded.alpha, &cmd.fit.config())?;
    emit(
        cmd.report.as_deref(),
        (serde_json::to_string_pretty(&report)? + "\n").as_bytes(),
    )?;
    Ok(if report.all_passed() {
        0
    } else {
        EXIT_CHECK_FAILED
    })
}

fn run_emit_curve(cmd: &EmitCurveCmd) -> anyhow::Result<u8> {
    let loaded = load(&cmd.input)?;
    let cfg = cmd.fit.config();
    let nds = normalized(&loaded.dataset, cmd.fit.normalize)?;
    let out = fit_restarts(&nds, &loaded.alpha, &cfg, cmd.fit.restarts)?;
    emit(
        cmd.output.as_deref(),
        curve_csv(&out.control_points, &nds, cmd.curve_samples)?.as_bytes(),
    )?;
    Ok(if out.report.converged {
        0
    } else {
        EXIT_NOT_CONVERGED
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Fit(cmd) => run_fit(cmd),
        Command::Baseline(cmd) => run_baseline(cmd),
        Command::Assess(cmd) => run_assess(cmd),
        Command::EmitCurve(cmd) => run_emit_curve(cmd),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let chain: Vec<String> = err.chain().map(|e| e.to_string()).collect();
            eprintln!("error: {}", chain.join(": "));
            ExitCode::from(EXIT_INPUT)
        }
    }
}
