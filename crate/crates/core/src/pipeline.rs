//! Rolling-window comparison of the deconvolved network against the
//! spanning-tree baseline.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dcca::{dccc_matrix, pearson_matrix};
use crate::deconv::{deconvolve_with, DeconvolveOptions};
use crate::error::{Error, Result};
use crate::graph::{
    authority, betweenness, closeness, mst, rank, weighted_degree, HitsOptions, IndexName,
    IndexScores,
};
use crate::ingest::ReturnPanel;
use crate::threshold::{threshold_network, ThresholdReport, WeightedNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    /// Observations per window.
    pub sample_window: usize,
    /// Observations between consecutive window starts.
    pub step: usize,
    /// DCCA box size inside each window.
    pub box_size: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            sample_window: 200,
            step: 60,
            box_size: 10,
        }
    }
}

impl WindowSpec {
    pub fn validate(&self) -> Result<()> {
        if self.box_size < crate::dcca::MIN_BOX_SIZE || self.box_size >= self.sample_window {
            return Err(Error::InvalidInput(format!(
                "box size {} must satisfy 3 <= box < window ({})",
                self.box_size, self.sample_window
            )));
        }
        if self.step == 0 {
            return Err(Error::InvalidInput("step must be at least 1".to_string()));
        }
        Ok(())
    }
}

/// Full windows `[s, s + sample_window)` for `s = 0, step, 2 step, ...`.
/// A trailing partial window is dropped.
pub fn roll_windows(len: usize, spec: &WindowSpec) -> Result<Vec<Range<usize>>> {
    spec.validate()?;
    if len < spec.sample_window {
        return Err(Error::InvalidInput(format!(
            "panel has {len} observations, shorter than one window of {}",
            spec.sample_window
        )));
    }
    Ok((0..=len - spec.sample_window)
        .step_by(spec.step)
        .map(|s| s..s + spec.sample_window)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Ddfen,
    Mst,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Ddfen, Method::Mst];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ddfen => "ddfen",
            Method::Mst => "mst",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ddfen" => Ok(Method::Ddfen),
            "mst" => Ok(Method::Mst),
            other => Err(Error::InvalidInput(format!(
                "unknown method '{other}' (expected ddfen or mst)"
            ))),
        }
    }
}

/// Correlation matrix fed to the spanning-tree baseline.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MstSource {
    #[default]
    Dccc,
    Pearson,
}

impl FromStr for MstSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dccc" => Ok(MstSource::Dccc),
            "pearson" => Ok(MstSource::Pearson),
            other => Err(Error::InvalidInput(format!(
                "unknown MST correlation '{other}' (expected dccc or pearson)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PipelineOptions {
    pub mst_source: MstSource,
    pub deconvolve: DeconvolveOptions,
    pub hits: HitsOptions,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankPoint {
    pub window_end: NaiveDate,
    pub rank: usize,
}

/// Rank of one asset across windows under one method and index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankSeries {
    pub method: Method,
    pub index: IndexName,
    pub target: String,
    pub points: Vec<RankPoint>,
}

impl RankSeries {
    pub fn ranks(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.rank as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventMarker {
    pub label: String,
    pub date: NaiveDate,
}

impl FromStr for EventMarker {
    type Err = Error;

    /// Parses `LABEL=YYYY-MM-DD`.
    fn from_str(s: &str) -> Result<Self> {
        let (label, date) = s
            .rsplit_once('=')
            .ok_or_else(|| Error::InvalidInput(format!("event '{s}' is not LABEL=DATE")))?;
        let date = NaiveDate::parse_from_str(date.trim(), "%Y-%m-%d")
            .map_err(|_| Error::InvalidInput(format!("event '{s}' has an unparseable date")))?;
        let label = label.trim();
        if label.is_empty() {
            return Err(Error::InvalidInput(format!(
                "event '{s}' has an empty label"
            )));
        }
        Ok(EventMarker {
            label: label.to_string(),
            date,
        })
    }
}

/// An event placed on the first window ending on or after its date.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttachedEvent {
    pub label: String,
    pub date: NaiveDate,
    /// `None` when the event falls after the last window.
    pub window: Option<usize>,
    pub window_end: Option<NaiveDate>,
}

pub fn attach_events(events: &[EventMarker], window_ends: &[NaiveDate]) -> Vec<AttachedEvent> {
    events
        .iter()
        .map(|e| {
            let window = window_ends.iter().position(|end| *end >= e.date);
            AttachedEvent {
                label: e.label.clone(),
                date: e.date,
                window,
                window_end: window.map(|w| window_ends[w]),
            }
        })
        .collect()
}

/// Root mean squared residual of an OLS line fitted against the ordinal
/// positions `0, 1, 2, ...`, dividing by the number of points.
pub fn detrended_volatility(values: &[f64]) -> Result<f64> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "volatility needs at least 2 points, got {n}"
        )));
    }
    let nf = n as f64;
    let x_mean = (nf - 1.0) / 2.0;
    let y_mean = values.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (t, y) in values.iter().enumerate() {
        let dx = t as f64 - x_mean;
        sxx += dx * dx;
        sxy += dx * (y - y_mean);
    }
    let slope = sxy / sxx;
    let ss: f64 = values
        .iter()
        .enumerate()
        .map(|(t, y)| {
            let r = (y - y_mean) - slope * (t as f64 - x_mean);
            r * r
        })
        .sum();
    Ok((ss / nf).sqrt())
}

pub fn series_volatility(series: &RankSeries) -> Result<f64> {
    detrended_volatility(&series.ranks())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityEntry {
    pub method: Method,
    pub index: IndexName,
    #[serde(serialize_with = "crate::io::ser_f64")]
    pub detrended_volatility: f64,
}

/// Detrended volatility per (method, index), in method-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub entries: Vec<StabilityEntry>,
}

impl StabilityReport {
    pub fn get(&self, method: Method, index: IndexName) -> Option<f64> {
        self.entries
            .iter()
            .find(|e| e.method == method && e.index == index)
            .map(|e| e.detrended_volatility)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub ordinal: usize,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub threshold: Option<ThresholdReport>,
    pub ddfen_edges: Option<usize>,
    pub mst_edges: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub target: String,
    pub spec: WindowSpec,
    pub windows: Vec<WindowSummary>,
    pub series: Vec<RankSeries>,
    pub stability: StabilityReport,
    pub events: Vec<AttachedEvent>,
}

fn index_scores(net: &WeightedNetwork, index: IndexName, hits: HitsOptions) -> Result<IndexScores> {
    match index {
        IndexName::WeightedDegree => Ok(weighted_degree(net)),
        IndexName::Authority => authority(net, hits),
        IndexName::Closeness => Ok(closeness(net)),
        IndexName::Betweenness => Ok(betweenness(net)),
    }
}

struct WindowOutcome {
    summary: WindowSummary,
    /// `(method, index, rank)` in the order requested.
    ranks: Vec<(Method, IndexName, usize)>,
}

#[allow(clippy::too_many_arguments)]
fn analyze_window(
    panel: &ReturnPanel,
    ordinal: usize,
    range: Range<usize>,
    spec: &WindowSpec,
    target: &str,
    methods: &[Method],
    indices: &[IndexName],
    options: &PipelineOptions,
) -> Result<WindowOutcome> {
    let start_date = panel.dates()[range.start];
    let end_date = panel.dates()[range.end - 1];
    let tag = |e: Error| Error::Window {
        start: start_date.to_string(),
        end: end_date.to_string(),
        source: Box::new(e),
    };
    let window = panel.slice(range);
    let dccc = dccc_matrix(&window, spec.box_size).map_err(tag)?;

    let mut summary = WindowSummary {
        ordinal,
        start_date,
        end_date,
        threshold: None,
        ddfen_edges: None,
        mst_edges: None,
    };
    let mut ranks = Vec::with_capacity(methods.len() * indices.len());
    for &method in methods {
        let net = match method {
            Method::Ddfen => {
                let direct = deconvolve_with(&dccc, options.deconvolve).map_err(tag)?;
                let (net, report) = threshold_network(&direct).map_err(tag)?;
                summary.ddfen_edges = Some(net.edges().len());
                summary.threshold = Some(report);
                net
            }
            Method::Mst => {
                let net = match options.mst_source {
                    MstSource::Dccc => mst(&dccc),
                    MstSource::Pearson => pearson_matrix(&window).and_then(|m| mst(&m)),
                }
                .map_err(tag)?;
                summary.mst_edges = Some(net.edges().len());
                net
            }
        };
        for &index in indices {
            let scores = index_scores(&net, index, options.hits).map_err(tag)?;
            let position = rank(&scores)
                .rank_of(target)
                .ok_or_else(|| Error::Invariant(format!("target {target} missing from ranking")))?;
            ranks.push((method, index, position));
        }
    }
    Ok(WindowOutcome { summary, ranks })
}

fn run_windows(
    panel: &ReturnPanel,
    spec: &WindowSpec,
    target: &str,
    methods: &[Method],
    indices: &[IndexName],
    options: &PipelineOptions,
) -> Result<Vec<WindowOutcome>> {
    if panel.code_index(target).is_none() {
        return Err(Error::InvalidInput(format!(
            "target {target} is not in the panel"
        )));
    }
    let windows = roll_windows(panel.len(), spec)?;
    windows
        .into_par_iter()
        .enumerate()
        .map(|(k, range)| analyze_window(panel, k, range, spec, target, methods, indices, options))
        .collect()
}

fn collect_series(
    outcomes: &[WindowOutcome],
    target: &str,
    method: Method,
    index: IndexName,
) -> RankSeries {
    let points = outcomes
        .iter()
        .map(|o| {
            let rank = o
                .ranks
                .iter()
                .find(|(m, i, _)| *m == method && *i == index)
                .map(|r| r.2)
                .expect("every window ranks every requested method and index");
            RankPoint {
                window_end: o.summary.end_date,
                rank,
            }
        })
        .collect();
    RankSeries {
        method,
        index,
        target: target.to_string(),
        points,
    }
}

pub fn rank_series(
    panel: &ReturnPanel,
    spec: &WindowSpec,
    target: &str,
    method: Method,
    index: IndexName,
) -> Result<RankSeries> {
    rank_series_with(
        panel,
        spec,
        target,
        method,
        index,
        &PipelineOptions::default(),
    )
}

pub fn rank_series_with(
    panel: &ReturnPanel,
    spec: &WindowSpec,
    target: &str,
    method: Method,
    index: IndexName,
    options: &PipelineOptions,
) -> Result<RankSeries> {
    let outcomes = run_windows(panel, spec, target, &[method], &[index], options)?;
    Ok(collect_series(&outcomes, target, method, index))
}

pub fn compare_methods(
    panel: &ReturnPanel,
    spec: &WindowSpec,
    target: &str,
    events: &[EventMarker],
) -> Result<ComparisonReport> {
    compare_methods_with(panel, spec, target, events, &PipelineOptions::default())
}

/// Both methods, all four indices, one pass over the windows.
pub fn compare_methods_with(
    panel: &ReturnPanel,
    spec: &WindowSpec,
    target: &str,
    events: &[EventMarker],
    options: &PipelineOptions,
) -> Result<ComparisonReport> {
    let outcomes = run_windows(panel, spec, target, &Method::ALL, &IndexName::ALL, options)?;
    let mut series = Vec::with_capacity(8);
    let mut entries = Vec::with_capacity(8);
    for method in Method::ALL {
        for index in IndexName::ALL {
            let s = collect_series(&outcomes, target, method, index);
            let detrended_volatility = if s.points.len() >= 2 {
                series_volatility(&s)?
            } else {
                // a single window has no fluctuation to measure
                0.0
            };
            entries.push(StabilityEntry {
                method,
                index,
                detrended_volatility,
            });
            series.push(s);
        }
    }
    let ends: Vec<NaiveDate> = outcomes.iter().map(|o| o.summary.end_date).collect();
    Ok(ComparisonReport {
        target: target.to_string(),
        spec: *spec,
        windows: outcomes.into_iter().map(|o| o.summary).collect(),
        series,
        stability: StabilityReport { entries },
        events: attach_events(events, &ends),
    })
}
