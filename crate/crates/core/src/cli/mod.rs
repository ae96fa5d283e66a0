mod config;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use ddfen::dcca::{dccc_matrix, CorrelationMatrix};
use ddfen::deconv::{deconvolve_with, DirectMatrix};
use ddfen::graph::{self, mst, rank};
use ddfen::ingest::{align_and_clean, load_prices, log_returns, ReturnPanel};
use ddfen::io::{self, write_atomic};
use ddfen::pipeline::{compare_methods_with, detrended_volatility, Method};
use ddfen::synth::{plant_chain, plant_hub, prices_from_returns};
use ddfen::threshold::threshold_network;
use ddfen::{Error, ErrorKind};

pub use config::{Format, GlobalArgs, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "ddfen",
    version,
    about = "Detrended deconvolution correlation networks"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// DCCC matrix of one window.
    Matrix(WindowArgs),
    /// Deconvolved (direct-effect) matrix of one window.
    Deconvolve(MatrixInputArgs),
    /// Thresholded network, or the spanning tree with `--method mst`.
    Network(NetworkArgs),
    /// Rolling rank series for the target under both methods and all indices.
    Ranks,
    /// Write a synthetic price panel.
    Synth {
        #[command(subcommand)]
        kind: SynthKind,
        /// Output file; defaults to `<output-dir>/panel.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Detrended volatility of a rank-series CSV, or the full stability
    /// table for `--input`.
    Stability {
        /// Rank-series CSV (`window_end_date,rank`).
        #[arg(long)]
        series: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, clap::Args)]
pub struct WindowArgs {
    /// Row offset of the window in the return panel; defaults to the final
    /// window.
    #[arg(long)]
    pub window_start: Option<usize>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct MatrixInputArgs {
    #[command(flatten)]
    pub window: WindowArgs,
    /// Correlation matrix CSV to use instead of computing one from `--input`.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct NetworkArgs {
    #[command(flatten)]
    pub source: MatrixInputArgs,
    /// Already-deconvolved matrix CSV; skips deconvolution.
    #[arg(long, conflicts_with = "matrix")]
    pub direct: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum SynthKind {
    /// Cross-sectional AR(1) chain with correlation `rho^|i-j|`.
    Chain {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long)]
        len: usize,
    },
    /// One common-factor hub and `n - 1` leaves.
    Hub {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        len: usize,
    },
}

/// A library error tagged with the stage that raised it.
#[derive(Debug)]
pub struct StageError {
    pub stage: &'static str,
    pub error: Error,
}

impl StageError {
    pub fn exit_code(&self) -> u8 {
        match self.error.kind() {
            ErrorKind::Input => 2,
            ErrorKind::Numerical => 3,
            ErrorKind::Invariant => 4,
        }
    }
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.stage, self.error)
    }
}

trait Stage<T> {
    fn stage(self, stage: &'static str) -> Result<T, StageError>;
}

impl<T> Stage<T> for ddfen::Result<T> {
    fn stage(self, stage: &'static str) -> Result<T, StageError> {
        self.map_err(|error| StageError { stage, error })
    }
}

type CmdResult = Result<(), StageError>;

pub fn run(cli: Cli) -> CmdResult {
    let cfg = RunConfig::resolve(&cli.global).stage("config")?;
    match cli.command {
        Command::Matrix(args) => cmd_matrix(&cfg, &args),
        Command::Deconvolve(args) => cmd_deconvolve(&cfg, &args),
        Command::Network(args) => cmd_network(&cfg, &args),
        Command::Ranks => cmd_ranks(&cfg),
        Command::Synth { kind, out } => cmd_synth(&cfg, &kind, out),
        Command::Stability { series } => cmd_stability(&cfg, series.as_deref()),
    }
}

fn load_returns(cfg: &RunConfig) -> Result<ReturnPanel, StageError> {
    let input = cfg.input().stage("ingest")?;
    let prices = load_prices(input, &cfg.date_column).stage("ingest")?;
    let clean = align_and_clean(&prices, cfg.policy).stage("ingest")?;
    log_returns(&clean).stage("ingest")
}

fn select_window(
    cfg: &RunConfig,
    panel: &ReturnPanel,
    start: Option<usize>,
) -> Result<ReturnPanel, StageError> {
    let sw = cfg.spec.sample_window;
    if panel.len() < sw {
        return Err(StageError {
            stage: "window",
            error: Error::InvalidInput(format!(
                "panel has {} returns, shorter than the window of {sw}",
                panel.len()
            )),
        });
    }
    let start = start.unwrap_or(panel.len() - sw);
    if start + sw > panel.len() {
        return Err(StageError {
            stage: "window",
            error: Error::InvalidInput(format!(
                "window starting at {start} runs past the {} available returns",
                panel.len()
            )),
        });
    }
    Ok(panel.slice(start..start + sw))
}

fn correlation(cfg: &RunConfig, args: &MatrixInputArgs) -> Result<CorrelationMatrix, StageError> {
    if let Some(path) = &args.matrix {
        let text = io::read_text(path).stage("matrix")?;
        let (codes, values) = io::matrix_from_csv(&text)
            .map_err(|e| Error::Parse {
                path: path.clone(),
                message: e.to_string(),
            })
            .stage("matrix")?;
        return CorrelationMatrix::new(codes, None, values).stage("matrix");
    }
    let panel = load_returns(cfg)?;
    let window = select_window(cfg, &panel, args.window.window_start)?;
    dccc_matrix(&window, cfg.spec.box_size).stage("dcca")
}

fn out_path(cfg: &RunConfig, stem: &str, format: Format) -> PathBuf {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    cfg.output_dir.join(format!("{stem}.{ext}"))
}

fn write(path: &Path, contents: &str) -> CmdResult {
    write_atomic(path, contents.as_bytes()).stage("output")?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_matrix(cfg: &RunConfig, args: &WindowArgs) -> CmdResult {
    let m = correlation(
        cfg,
        &MatrixInputArgs {
            window: args.clone(),
            matrix: None,
        },
    )?;
    let text = match cfg.format {
        Format::Csv => io::matrix_to_csv(m.codes(), m.values()),
        Format::Json => io::to_json(&m).stage("output")?,
    };
    write(&out_path(cfg, "matrix", cfg.format), &text)
}

fn direct_matrix(cfg: &RunConfig, args: &MatrixInputArgs) -> Result<DirectMatrix, StageError> {
    let m = correlation(cfg, args)?;
    deconvolve_with(&m, cfg.pipeline.deconvolve).stage("deconvolve")
}

fn cmd_deconvolve(cfg: &RunConfig, args: &MatrixInputArgs) -> CmdResult {
    let d = direct_matrix(cfg, args)?;
    let text = match cfg.format {
        Format::Csv => io::matrix_to_csv(d.codes(), d.values()),
        Format::Json => io::to_json(&d).stage("output")?,
    };
    write(&out_path(cfg, "direct", cfg.format), &text)
}

fn cmd_network(cfg: &RunConfig, args: &NetworkArgs) -> CmdResult {
    let method = cfg.method.unwrap_or(Method::Ddfen);
    let (net, report) = match method {
        Method::Ddfen => {
            let direct = match &args.direct {
                Some(path) => {
                    let text = io::read_text(path).stage("matrix")?;
                    let (codes, values) = io::matrix_from_csv(&text).stage("matrix")?;
                    DirectMatrix::new(codes, values).stage("matrix")?
                }
                None => direct_matrix(cfg, &args.source)?,
            };
            let (net, report) = threshold_network(&direct).stage("threshold")?;
            (net, Some(report))
        }
        Method::Mst => {
            if args.direct.is_some() {
                return Err(StageError {
                    stage: "config",
                    error: Error::InvalidInput("--direct cannot be used with --method mst".into()),
                });
            }
            let m = correlation(cfg, &args.source)?;
            (mst(&m).stage("mst")?, None)
        }
    };

    match cfg.format {
        Format::Csv => {
            write(
                &out_path(cfg, "edges", Format::Csv),
                &io::edges_to_csv(&net),
            )?;
            if let Some(report) = &report {
                let json = io::to_json(report).stage("output")?;
                write(&out_path(cfg, "threshold_report", Format::Json), &json)?;
            }
        }
        Format::Json => {
            let value =
                serde_json::json!({ "method": method, "network": net, "threshold": report });
            let json = io::to_json(&value).stage("output")?;
            write(&out_path(cfg, "network", Format::Json), &json)?;
        }
    }

    if let Some(index) = cfg.index {
        let scores = graph::compute_index(&net, index).stage("index")?;
        let ranking = rank(&scores);
        let stem = format!("scores_{index}");
        let text = match cfg.format {
            Format::Csv => io::ranking_to_csv(&ranking),
            Format::Json => io::to_json(&ranking).stage("output")?,
        };
        write(&out_path(cfg, &stem, cfg.format), &text)?;
    }
    Ok(())
}

fn cmd_ranks(cfg: &RunConfig) -> CmdResult {
    let panel = load_returns(cfg)?;
    let target = cfg.target().stage("config")?;
    let report = compare_methods_with(&panel, &cfg.spec, target, &cfg.events, &cfg.pipeline)
        .stage("pipeline")?;

    for s in &report.series {
        if cfg.method.is_some_and(|m| m != s.method) || cfg.index.is_some_and(|i| i != s.index) {
            continue;
        }
        let path = out_path(cfg, &format!("ranks_{}_{}", s.method, s.index), Format::Csv);
        write(&path, &io::rank_series_to_csv(s))?;
    }
    write(
        &out_path(cfg, "stability", Format::Csv),
        &io::stability_to_csv(&report.stability),
    )?;
    write(
        &out_path(cfg, "report", Format::Json),
        &io::to_json(&report).stage("output")?,
    )
}

fn cmd_synth(cfg: &RunConfig, kind: &SynthKind, out: Option<PathBuf>) -> CmdResult {
    let returns = match *kind {
        SynthKind::Chain { n, rho, len } => plant_chain(n, rho, len, cfg.seed),
        SynthKind::Hub { n, len } => plant_hub(n, len, cfg.seed),
    }
    .stage("synth")?;
    let prices = prices_from_returns(&returns, 100.0).stage("synth")?;
    let path = out.unwrap_or_else(|| cfg.output_dir.join("panel.csv"));
    write(&path, &io::prices_to_csv(&prices))
}

fn cmd_stability(cfg: &RunConfig, series: Option<&Path>) -> CmdResult {
    if let Some(path) = series {
        let text = io::read_text(path).stage("stability")?;
        let points = io::rank_points_from_csv(&text).stage("stability")?;
        let ranks: Vec<f64> = points.iter().map(|p| p.rank as f64).collect();
        let v = detrended_volatility(&ranks).stage("stability")?;
        println!("detrended_volatility={}", io::fmt_num(v));
        return Ok(());
    }
    let panel = load_returns(cfg)?;
    let target = cfg.target().stage("config")?;
    let report = compare_methods_with(&panel, &cfg.spec, target, &cfg.events, &cfg.pipeline)
        .stage("pipeline")?;
    let text = match cfg.format {
        Format::Csv => io::stability_to_csv(&report.stability),
        Format::Json => io::to_json(&report.stability).stage("output")?,
    };
    write(&out_path(cfg, "stability", cfg.format), &text)
}
