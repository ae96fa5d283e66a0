//! Text formats for matrices, networks, rankings and reports.
//!
//! Every number written by this module is rounded to 12 significant digits
//! and printed in its shortest round-trip form, so repeated runs produce
//! byte-identical files.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::DMatrix;
use serde::de::DeserializeOwned;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{IndexName, RankEntry, Ranking};
use crate::ingest::PricePanel;
use crate::pipeline::{Method, RankPoint, RankSeries, StabilityEntry, StabilityReport};
use crate::threshold::{Edge, WeightedNetwork};

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Round to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        // normalizes -0.0
        return if x == 0.0 { 0.0 } else { x };
    }
    let r: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses");
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn fmt_num(x: f64) -> String {
    let r = round_sig(x);
    let mag = r.abs();
    if r == 0.0 || (1e-6..1e15).contains(&mag) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

pub fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(round_sig(*x))
}

pub fn ser_f64_vec<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(xs.iter().map(|x| round_sig(*x)))
}

/// Serde adapter storing a matrix as a list of rounded rows.
pub mod matrix_rows {
    use nalgebra::DMatrix;
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    use super::round_sig;

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(
            m.row_iter()
                .map(|row| row.iter().map(|x| round_sig(*x)).collect::<Vec<f64>>()),
        )
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(D::Error::custom("ragged matrix rows"));
        }
        Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
    }
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: impl AsRef<Path>, contents: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn read_text(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Invariant(format!("JSON encoding failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("JSON: {e}")))
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("CSV: {e}"))
}

fn parse_num(cell: &str, what: &str) -> Result<f64> {
    cell.parse()
        .map_err(|_| Error::InvalidInput(format!("CSV: non-numeric {what} '{cell}'")))
}

/// Square matrix with a header row and a leading column of codes.
pub fn matrix_to_csv(codes: &[String], values: &DMatrix<f64>) -> String {
    let mut out = String::from("code");
    for c in codes {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (i, c) in codes.iter().enumerate() {
        out.push_str(c);
        for j in 0..codes.len() {
            out.push(',');
            out.push_str(&fmt_num(values[(i, j)]));
        }
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut reader = csv_reader(text);
    let header = reader.headers().map_err(csv_err)?.clone();
    let codes: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let n = codes.len();
    let mut values = DMatrix::zeros(n, n);
    let mut rows = 0;
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        if rows >= n {
            return Err(Error::InvalidInput(
                "CSV: matrix has more rows than columns".into(),
            ));
        }
        if &record[0] != codes[rows].as_str() {
            return Err(Error::InvalidInput(format!(
                "CSV: row {} is labelled '{}', expected '{}'",
                rows + 1,
                &record[0],
                codes[rows]
            )));
        }
        for j in 0..n {
            values[(rows, j)] = parse_num(&record[j + 1], "matrix entry")?;
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::InvalidInput(format!(
            "CSV: matrix has {rows} rows, expected {n}"
        )));
    }
    Ok((codes, values))
}

pub fn edges_to_csv(net: &WeightedNetwork) -> String {
    let codes = net.codes();
    let mut out = String::from("source,target,weight\n");
    for e in net.edges() {
        let _ = writeln!(
            out,
            "{},{},{}",
            codes[e.source],
            codes[e.target],
            fmt_num(e.weight)
        );
    }
    out
}

/// Rebuild a network from an edge list; `codes` fixes node order.
pub fn edges_from_csv(text: &str, codes: &[String]) -> Result<WeightedNetwork> {
    let lookup = |c: &str| {
        codes
            .iter()
            .position(|x| x == c)
            .ok_or_else(|| Error::InvalidInput(format!("CSV: unknown node '{c}'")))
    };
    let mut edges = Vec::new();
    for record in csv_reader(text).records() {
        let record = record.map_err(csv_err)?;
        let (a, b) = (lookup(&record[0])?, lookup(&record[1])?);
        edges.push(Edge {
            source: a.min(b),
            target: a.max(b),
            weight: parse_num(&record[2], "weight")?,
        });
    }
    WeightedNetwork::new(codes.to_vec(), edges)
}

pub fn ranking_to_csv(ranking: &Ranking) -> String {
    let mut out = String::from("code,score,rank\n");
    for e in &ranking.entries {
        let _ = writeln!(out, "{},{},{}", e.code, fmt_num(e.score), e.rank);
    }
    out
}

pub fn ranking_from_csv(text: &str, index: IndexName) -> Result<Ranking> {
    let mut entries = Vec::new();
    for record in csv_reader(text).records() {
        let record = record.map_err(csv_err)?;
        entries.push(RankEntry {
            code: record[0].to_string(),
            score: parse_num(&record[1], "score")?,
            rank: record[2]
                .parse()
                .map_err(|_| Error::InvalidInput(format!("CSV: bad rank '{}'", &record[2])))?,
        });
    }
    Ok(Ranking { index, entries })
}

pub fn rank_series_to_csv(series: &RankSeries) -> String {
    let mut out = String::from("window_end_date,rank\n");
    for p in &series.points {
        let _ = writeln!(out, "{},{}", p.window_end, p.rank);
    }
    out
}

pub fn rank_points_from_csv(text: &str) -> Result<Vec<RankPoint>> {
    let mut points = Vec::new();
    for record in csv_reader(text).records() {
        let record = record.map_err(csv_err)?;
        let window_end = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d")
            .map_err(|_| Error::InvalidInput(format!("CSV: bad date '{}'", &record[0])))?;
        let rank = record[1]
            .parse()
            .map_err(|_| Error::InvalidInput(format!("CSV: bad rank '{}'", &record[1])))?;
        points.push(RankPoint { window_end, rank });
    }
    Ok(points)
}

/// Methods as rows, indices as columns.
pub fn stability_to_csv(report: &StabilityReport) -> String {
    let mut out = String::from("method");
    for i in IndexName::ALL {
        out.push(',');
        out.push_str(i.as_str());
    }
    out.push('\n');
    for m in Method::ALL {
        if report.entries.iter().all(|e| e.method != m) {
            continue;
        }
        out.push_str(m.as_str());
        for i in IndexName::ALL {
            out.push(',');
            if let Some(v) = report.get(m, i) {
                out.push_str(&fmt_num(v));
            }
        }
        out.push('\n');
    }
    out
}

pub fn stability_from_csv(text: &str) -> Result<StabilityReport> {
    let mut reader = csv_reader(text);
    let header = reader.headers().map_err(csv_err)?.clone();
    let indices = header
        .iter()
        .skip(1)
        .map(str::parse)
        .collect::<Result<Vec<IndexName>>>()?;
    let mut entries = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let method: Method = record[0].parse()?;
        for (k, index) in indices.iter().enumerate() {
            let cell = &record[k + 1];
            if cell.is_empty() {
                continue;
            }
            entries.push(StabilityEntry {
                method,
                index: *index,
                detrended_volatility: parse_num(cell, "volatility")?,
            });
        }
    }
    Ok(StabilityReport { entries })
}

/// Wide price CSV in the layout read by [`crate::ingest::load_prices`].
pub fn prices_to_csv(panel: &PricePanel) -> String {
    let mut out = String::from("date");
    for c in panel.codes() {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for (d, row) in panel.dates().iter().zip(panel.rows()) {
        let _ = write!(out, "{d}");
        for cell in row {
            out.push(',');
            if let Some(p) = cell {
                out.push_str(&fmt_num(*p));
            }
        }
        out.push('\n');
    }
    out
}
