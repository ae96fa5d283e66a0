//! Run configuration: command-line flags layered over an optional
//! `key = value` file, layered over defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};

use ddfen::deconv::DeconvolveOptions;
use ddfen::graph::IndexName;
use ddfen::ingest::MissingPolicy;
use ddfen::pipeline::{EventMarker, Method, MstSource, PipelineOptions, WindowSpec};
use ddfen::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::InvalidInput(format!(
                "unknown format '{other}' (expected csv or json)"
            ))),
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Plain-text `key = value` config file; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Wide price CSV.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// DCCA box size.
    #[arg(long = "box", global = true)]
    pub box_size: Option<usize>,
    /// Observations per rolling window.
    #[arg(long, global = true)]
    pub window: Option<usize>,
    /// Observations between window starts.
    #[arg(long, global = true)]
    pub step: Option<usize>,
    /// Asset code whose rank is tracked.
    #[arg(long, global = true)]
    pub target: Option<String>,
    /// ddfen or mst.
    #[arg(long, global = true)]
    pub method: Option<String>,
    /// weighted_degree, authority, closeness or betweenness.
    #[arg(long, global = true)]
    pub index: Option<String>,
    /// Missing-data policy: drop-row or forward-fill.
    #[arg(long, global = true)]
    pub policy: Option<String>,
    /// Event marker `LABEL=YYYY-MM-DD`; repeatable.
    #[arg(long = "event", global = true)]
    pub events: Vec<String>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Name of the date column in the input CSV.
    #[arg(long, global = true)]
    pub date_column: Option<String>,
    /// Correlation used for the spanning tree: dccc or pearson.
    #[arg(long, global = true)]
    pub mst_correlation: Option<String>,
    /// Factor applied to the matrix before deconvolution.
    #[arg(long, global = true)]
    pub prescale: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub format: Format,
    pub spec: WindowSpec,
    pub target: Option<String>,
    pub method: Option<Method>,
    pub index: Option<IndexName>,
    pub policy: MissingPolicy,
    pub events: Vec<EventMarker>,
    pub seed: u64,
    pub date_column: String,
    pub pipeline: PipelineOptions,
}

const KNOWN_KEYS: &[&str] = &[
    "input",
    "output_dir",
    "format",
    "box",
    "window",
    "step",
    "target",
    "method",
    "index",
    "policy",
    "event",
    "seed",
    "date_column",
    "mst_correlation",
    "prescale",
];

/// Parsed config file. `event` may repeat; every other key keeps its last
/// value.
#[derive(Debug, Default)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
    events: Vec<String>,
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg = ConfigFile::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                message: format!("line {}: expected key = value", n + 1),
            })?;
            let key = key.trim().replace('-', "_");
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    message: format!("line {}: unknown key '{key}'", n + 1),
                });
            }
            if key == "event" {
                cfg.events.push(value);
            } else {
                cfg.values.insert(key, value);
            }
        }
        Ok(cfg)
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.values
            .get(key)
            .map(|v| {
                v.parse().map_err(|_| {
                    Error::InvalidInput(format!("config value for '{key}' is invalid: '{v}'"))
                })
            })
            .transpose()
    }
}

/// Flag value if given, else the config file's, parsed with the type's own
/// error message.
fn pick<T: FromStr<Err = Error>>(
    flag: Option<&String>,
    file: &ConfigFile,
    key: &str,
) -> Result<Option<T>> {
    flag.or_else(|| file.values.get(key))
        .map(|s| s.parse())
        .transpose()
}

impl RunConfig {
    pub fn resolve(args: &GlobalArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                    path: path.clone(),
                    source: e,
                })?;
                ConfigFile::parse(&text, path)?
            }
            None => ConfigFile::default(),
        };

        let defaults = WindowSpec::default();
        let spec = WindowSpec {
            sample_window: args
                .window
                .or(file.get("window")?)
                .unwrap_or(defaults.sample_window),
            step: args.step.or(file.get("step")?).unwrap_or(defaults.step),
            box_size: args
                .box_size
                .or(file.get("box")?)
                .unwrap_or(defaults.box_size),
        };
        spec.validate()?;

        let method = pick(args.method.as_ref(), &file, "method")?;
        let index = pick(args.index.as_ref(), &file, "index")?;
        let policy = pick(args.policy.as_ref(), &file, "policy")?.unwrap_or_default();
        let format = match args.format {
            Some(f) => f,
            None => file.get("format")?.unwrap_or(Format::Csv),
        };
        let mst_source: MstSource =
            pick(args.mst_correlation.as_ref(), &file, "mst_correlation")?.unwrap_or_default();
        let prescale = args.prescale.or(file.get("prescale")?).unwrap_or(1.0);
        if !(prescale.is_finite() && prescale > 0.0) {
            return Err(Error::InvalidInput(format!(
                "prescale must be positive, got {prescale}"
            )));
        }

        // flag events replace config events rather than adding to them
        let raw_events = if args.events.is_empty() {
            &file.events
        } else {
            &args.events
        };
        let events = raw_events
            .iter()
            .map(|e| e.parse())
            .collect::<Result<Vec<EventMarker>>>()?;

        Ok(RunConfig {
            input: args.input.clone().or(file.get("input")?),
            output_dir: args
                .output_dir
                .clone()
                .or(file.get("output_dir")?)
                .unwrap_or_else(|| PathBuf::from(".")),
            format,
            spec,
            target: args.target.clone().or(file.get("target")?),
            method,
            index,
            policy,
            events,
            seed: args.seed.or(file.get("seed")?).unwrap_or(42),
            date_column: args
                .date_column
                .clone()
                .or(file.get("date_column")?)
                .unwrap_or_else(|| "date".to_string()),
            pipeline: PipelineOptions {
                mst_source,
                deconvolve: DeconvolveOptions { prescale },
                ..PipelineOptions::default()
            },
        })
    }

    pub fn input(&self) -> Result<&Path> {
        self.input
            .as_deref()
            .ok_or_else(|| Error::InvalidInput("--input is required".to_string()))
    }

    pub fn target(&self) -> Result<&str> {
        self.target
            .as_deref()
            .ok_or_else(|| Error::InvalidInput("--target is required".to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(
            &path,
            "# comment\nwindow = 120\nstep=30\nbox = 8\ntarget = X01\nevent = A=2020-01-01\nformat = json\n",
        )
        .unwrap();
        let args = GlobalArgs {
            config: Some(path),
            step: Some(10),
            ..GlobalArgs::default()
        };
        let cfg = RunConfig::resolve(&args).unwrap();
        assert_eq!(cfg.spec.sample_window, 120);
        assert_eq!(cfg.spec.step, 10);
        assert_eq!(cfg.spec.box_size, 8);
        assert_eq!(cfg.target.as_deref(), Some("X01"));
        assert_eq!(cfg.events.len(), 1);
        assert_eq!(cfg.format, Format::Json);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(ConfigFile::parse("colour = red\n", Path::new("x")).is_err());
        assert!(ConfigFile::parse("no equals sign\n", Path::new("x")).is_err());
    }

    #[test]
    fn defaults() {
        let cfg = RunConfig::resolve(&GlobalArgs::default()).unwrap();
        assert_eq!(cfg.spec, WindowSpec::default());
        assert_eq!(cfg.policy, MissingPolicy::DropRow);
        assert_eq!(cfg.format, Format::Csv);
    }
}
