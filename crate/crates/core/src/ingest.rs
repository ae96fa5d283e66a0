//! Wide-format price CSV loading, date alignment and log returns.
//!
//! The only accepted layout is a header row followed by one row per date:
//! the date column (ISO-8601, `YYYY-MM-DD`) and one numeric column per
//! asset code. Empty cells and the usual NA spellings are read as missing.

use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MISSING_TOKENS: &[&str] = &["", "na", "n/a", "nan", "null", "none", "-"];

/// Date-indexed prices, one column per asset code. Cells may be missing
/// until the panel has gone through [`align_and_clean`].
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    dates: Vec<NaiveDate>,
    codes: Vec<String>,
    /// Row-major, `prices[t][k]`.
    prices: Vec<Vec<Option<f64>>>,
}

impl PricePanel {
    /// Build a panel, checking the structural invariants.
    pub fn new(
        dates: Vec<NaiveDate>,
        codes: Vec<String>,
        prices: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        if dates.len() != prices.len() {
            return Err(Error::LengthMismatch {
                left: dates.len(),
                right: prices.len(),
            });
        }
        check_codes(&codes)?;
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "dates not strictly increasing at {}",
                w[1]
            )));
        }
        for (t, row) in prices.iter().enumerate() {
            if row.len() != codes.len() {
                return Err(Error::InvalidInput(format!(
                    "row {} has {} cells, expected {}",
                    dates[t],
                    row.len(),
                    codes.len()
                )));
            }
            for (k, cell) in row.iter().enumerate() {
                if let Some(p) = cell {
                    if !(p.is_finite() && *p > 0.0) {
                        return Err(Error::InvalidInput(format!(
                            "price {p} at {} / {} is not strictly positive",
                            dates[t], codes[k]
                        )));
                    }
                }
            }
        }
        Ok(Self {
            dates,
            codes,
            prices,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }

    pub fn rows(&self) -> &[Vec<Option<f64>>] {
        &self.prices
    }

    pub fn get(&self, t: usize, k: usize) -> Option<f64> {
        self.prices[t][k]
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn is_dense(&self) -> bool {
        self.prices.iter().all(|r| r.iter().all(Option::is_some))
    }
}

/// Log returns aligned to the later date of each consecutive price pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnPanel {
    dates: Vec<NaiveDate>,
    codes: Vec<String>,
    /// Column-major, `columns[k][t]`.
    columns: Vec<Vec<f64>>,
}

impl ReturnPanel {
    pub fn new(dates: Vec<NaiveDate>, codes: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        check_codes(&codes)?;
        if columns.len() != codes.len() {
            return Err(Error::LengthMismatch {
                left: codes.len(),
                right: columns.len(),
            });
        }
        for (k, col) in columns.iter().enumerate() {
            if col.len() != dates.len() {
                return Err(Error::LengthMismatch {
                    left: dates.len(),
                    right: col.len(),
                });
            }
            if let Some(t) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "non-finite return at {} / {}",
                    dates[t], codes[k]
                )));
            }
        }
        if let Some(w) = dates.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "dates not strictly increasing at {}",
                w[1]
            )));
        }
        Ok(Self {
            dates,
            codes,
            columns,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.columns[k]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Number of observations (rows).
    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn n_assets(&self) -> usize {
        self.codes.len()
    }

    pub fn code_index(&self, code: &str) -> Option<usize> {
        self.codes.iter().position(|c| c == code)
    }

    /// Copy of the rows in `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> ReturnPanel {
        ReturnPanel {
            dates: self.dates[range.clone()].to_vec(),
            codes: self.codes.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| c[range.clone()].to_vec())
                .collect(),
        }
    }
}

fn check_codes(codes: &[String]) -> Result<()> {
    for (i, c) in codes.iter().enumerate() {
        if c.is_empty() {
            return Err(Error::InvalidInput(format!(
                "empty asset code in column {}",
                i + 1
            )));
        }
        if codes[..i].contains(c) {
            return Err(Error::InvalidInput(format!("duplicate asset code {c}")));
        }
    }
    Ok(())
}

/// How [`align_and_clean`] treats missing cells.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissingPolicy {
    /// Remove every date that has a missing value in any column.
    #[default]
    DropRow,
    /// Copy the latest prior observation; rows before an asset's first
    /// observation are still dropped.
    ForwardFill,
}

impl FromStr for MissingPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drop-row" | "drop" => Ok(MissingPolicy::DropRow),
            "forward-fill" | "ffill" => Ok(MissingPolicy::ForwardFill),
            other => Err(Error::InvalidInput(format!(
                "unknown missing-data policy '{other}' (expected drop-row or forward-fill)"
            ))),
        }
    }
}

/// Read a wide price CSV. Rows are returned sorted by date; columns keep
/// header order.
pub fn load_prices(path: impl AsRef<Path>, date_column: &str) -> Result<PricePanel> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, format!("header: {e}")))?
        .clone();
    let date_idx = headers
        .iter()
        .position(|h| h == date_column)
        .ok_or_else(|| Error::parse(path, format!("no date column named '{date_column}'")))?;
    let codes: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != date_idx)
        .map(|(_, h)| h.to_string())
        .collect();
    check_codes(&codes).map_err(|e| Error::parse(path, e.to_string()))?;

    let mut rows: Vec<(NaiveDate, Vec<Option<f64>>)> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        // header is line 1
        let line = r + 2;
        let record = record.map_err(|e| Error::parse(path, format!("line {line}: {e}")))?;
        if record.len() != headers.len() {
            return Err(Error::parse(
                path,
                format!(
                    "line {line}: {} fields, expected {}",
                    record.len(),
                    headers.len()
                ),
            ));
        }
        let raw_date = &record[date_idx];
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|_| {
            Error::parse(path, format!("line {line}: unparseable date '{raw_date}'"))
        })?;
        let mut values = Vec::with_capacity(codes.len());
        for (i, cell) in record.iter().enumerate() {
            if i == date_idx {
                continue;
            }
            let column = &headers[i];
            if MISSING_TOKENS.contains(&cell.to_ascii_lowercase().as_str()) {
                values.push(None);
                continue;
            }
            let price: f64 = cell.parse().map_err(|_| {
                Error::parse(
                    path,
                    format!("line {line}, column {column}: non-numeric price '{cell}'"),
                )
            })?;
            if !(price.is_finite() && price > 0.0) {
                return Err(Error::parse(
                    path,
                    format!("line {line}, column {column}: price {cell} is not strictly positive"),
                ));
            }
            values.push(Some(price));
        }
        rows.push((date, values));
    }

    rows.sort_by_key(|(d, _)| *d);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::parse(path, format!("duplicate date {}", w[0].0)));
    }
    let (dates, prices) = rows.into_iter().unzip();
    PricePanel::new(dates, codes, prices)
}

/// Remove or fill missing cells according to `policy`.
pub fn align_and_clean(panel: &PricePanel, policy: MissingPolicy) -> Result<PricePanel> {
    for (k, code) in panel.codes.iter().enumerate() {
        if panel.prices.iter().all(|r| r[k].is_none()) {
            return Err(Error::InvalidInput(format!(
                "asset {code} has no observations"
            )));
        }
    }

    let mut dates = Vec::new();
    let mut prices = Vec::new();
    match policy {
        MissingPolicy::DropRow => {
            for (d, row) in panel.dates.iter().zip(&panel.prices) {
                if row.iter().all(Option::is_some) {
                    dates.push(*d);
                    prices.push(row.clone());
                }
            }
        }
        MissingPolicy::ForwardFill => {
            let mut last: Vec<Option<f64>> = vec![None; panel.codes.len()];
            for (d, row) in panel.dates.iter().zip(&panel.prices) {
                for (slot, cell) in last.iter_mut().zip(row) {
                    if cell.is_some() {
                        *slot = *cell;
                    }
                }
                if last.iter().all(Option::is_some) {
                    dates.push(*d);
                    prices.push(last.clone());
                }
            }
        }
    }
    if dates.is_empty() {
        return Err(Error::InvalidInput(
            "no complete rows remain after cleaning".to_string(),
        ));
    }
    PricePanel::new(dates, panel.codes.clone(), prices)
}

/// `returns[t][k] = ln(p[t+1][k] / p[t][k])`, dated at `t + 1`.
pub fn log_returns(panel: &PricePanel) -> Result<ReturnPanel> {
    if panel.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 dates for returns, got {}",
            panel.len()
        )));
    }
    if !panel.is_dense() {
        return Err(Error::InvalidInput(
            "panel has missing cells; run align_and_clean first".to_string(),
        ));
    }
    let n = panel.len();
    let columns = (0..panel.codes.len())
        .map(|k| {
            (1..n)
                .map(|t| {
                    let prev = panel.prices[t - 1][k].unwrap_or(f64::NAN);
                    let next = panel.prices[t][k].unwrap_or(f64::NAN);
                    (next / prev).ln()
                })
                .collect()
        })
        .collect();
    ReturnPanel::new(panel.dates[1..].to_vec(), panel.codes.clone(), columns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(body.as_bytes()).unwrap();
        f
    }

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn parses_three_row_csv() {
        let f = write_csv("date,A,B\n2020-01-01,1,2\n2020-01-02,2,4\n2020-01-03,4,8\n");
        let p = load_prices(f.path(), "date").unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.codes(), &["A".to_string(), "B".to_string()]);
        assert_eq!(p.get(2, 1), Some(8.0));
    }

    #[test]
    fn shuffled_rows_sort() {
        let sorted = write_csv("date,A,B\n2020-01-01,1,2\n2020-01-02,2,4\n2020-01-03,4,8\n");
        let shuffled = write_csv("date,A,B\n2020-01-03,4,8\n2020-01-01,1,2\n2020-01-02,2,4\n");
        assert_eq!(
            load_prices(sorted.path(), "date").unwrap(),
            load_prices(shuffled.path(), "date").unwrap()
        );
    }

    #[test]
    fn zero_price_names_cell() {
        let f = write_csv("date,A,B\n2020-01-01,1,2\n2020-01-02,0,4\n");
        let err = load_prices(f.path(), "date").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        assert!(err.contains("column A"), "{err}");
    }

    #[test]
    fn rejects_bad_dates_and_duplicates() {
        let f = write_csv("date,A\n2020-13-01,1\n");
        assert!(load_prices(f.path(), "date")
            .unwrap_err()
            .to_string()
            .contains("unparseable date"));
        let f = write_csv("date,A\n2020-01-01,1\n2020-01-01,2\n");
        assert!(load_prices(f.path(), "date")
            .unwrap_err()
            .to_string()
            .contains("duplicate date"));
        let f = write_csv("date,A\n2020-01-01,abc\n");
        assert!(load_prices(f.path(), "date")
            .unwrap_err()
            .to_string()
            .contains("non-numeric"));
    }

    #[test]
    fn missing_file_reports_path() {
        let err = load_prices("/nonexistent/panel.csv", "date").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/panel.csv"));
    }

    fn gappy() -> PricePanel {
        PricePanel::new(
            vec![
                d("2020-01-01"),
                d("2020-01-02"),
                d("2020-01-03"),
                d("2020-01-04"),
            ],
            vec!["A".into(), "B".into()],
            vec![
                vec![Some(1.0), None],
                vec![Some(2.0), Some(3.0)],
                vec![None, Some(4.0)],
                vec![Some(5.0), Some(6.0)],
            ],
        )
        .unwrap()
    }

    #[test]
    fn drop_row_removes_gapped_dates() {
        let p = align_and_clean(&gappy(), MissingPolicy::DropRow).unwrap();
        assert_eq!(p.dates(), &[d("2020-01-02"), d("2020-01-04")]);
        assert!(p.is_dense());
    }

    #[test]
    fn forward_fill_copies_prior_value() {
        let p = align_and_clean(&gappy(), MissingPolicy::ForwardFill).unwrap();
        // leading gap in B drops the first row
        assert_eq!(
            p.dates(),
            &[d("2020-01-02"), d("2020-01-03"), d("2020-01-04")]
        );
        assert_eq!(p.get(1, 0), Some(2.0));
    }

    #[test]
    fn dense_panel_unchanged() {
        let p = PricePanel::new(
            vec![d("2020-01-01"), d("2020-01-02")],
            vec!["A".into()],
            vec![vec![Some(1.0)], vec![Some(2.0)]],
        )
        .unwrap();
        assert_eq!(align_and_clean(&p, MissingPolicy::DropRow).unwrap(), p);
        assert_eq!(align_and_clean(&p, MissingPolicy::ForwardFill).unwrap(), p);
    }

    #[test]
    fn empty_asset_is_error() {
        let p = PricePanel::new(
            vec![d("2020-01-01"), d("2020-01-02")],
            vec!["A".into(), "B".into()],
            vec![vec![Some(1.0), None], vec![Some(2.0), None]],
        )
        .unwrap();
        assert!(align_and_clean(&p, MissingPolicy::ForwardFill).is_err());
    }

    #[test]
    fn log_return_examples() {
        let e = std::f64::consts::E;
        let p = PricePanel::new(
            vec![d("2020-01-01"), d("2020-01-02"), d("2020-01-03")],
            vec!["A".into(), "B".into()],
            vec![
                vec![Some(1.0), Some(5.0)],
                vec![Some(e), Some(5.0)],
                vec![Some(e * e), Some(5.0)],
            ],
        )
        .unwrap();
        let r = log_returns(&p).unwrap();
        assert_eq!(r.dates(), &[d("2020-01-02"), d("2020-01-03")]);
        for v in r.column(0) {
            assert!((v - 1.0).abs() < 1e-15);
        }
        assert_eq!(r.column(1), &[0.0, 0.0]);

        let p = PricePanel::new(
            vec![d("2020-01-01"), d("2020-01-02")],
            vec!["A".into()],
            vec![vec![Some(2.0)], vec![Some(4.0)]],
        )
        .unwrap();
        assert!((log_returns(&p).unwrap().column(0)[0] - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn log_returns_needs_two_dates() {
        let p = PricePanel::new(
            vec![d("2020-01-01")],
            vec!["A".into()],
            vec![vec![Some(1.0)]],
        )
        .unwrap();
        assert!(log_returns(&p).is_err());
    }
}
