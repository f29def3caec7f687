//! Daily OHLC ingestion: CSV parsing, calendar alignment and the
//! train/test split used by every downstream stage.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("unknown header layout: {found:?}")]
    UnknownHeader { found: Vec<String> },
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("{} row(s) violate OHLC invariants: {}", .0.len(), summarize(.0))]
    InvalidBars(Vec<BarViolation>),
    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),
    #[error("no bars")]
    Empty,
    #[error("calendar intersection is empty")]
    EmptyIntersection,
    #[error("invalid split: {0}")]
    InvalidSplit(String),
    #[error("{partition} partition is empty")]
    EmptyPartition { partition: &'static str },
}

fn summarize(v: &[BarViolation]) -> String {
    v.iter()
        .take(5)
        .map(|b| b.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// One rejected row with the reason it was rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct BarViolation {
    pub line: u64,
    pub date: NaiveDate,
    pub reason: &'static str,
}

impl fmt::Display for BarViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {} ({}): {}", self.line, self.date, self.reason)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OhlcBar {
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
}

impl OhlcBar {
    /// Checks positivity and the low ≤ {open, close} ≤ high ordering.
    pub fn check(&self) -> Result<(), &'static str> {
        let prices = [self.open, self.high, self.low, self.close];
        if prices.iter().any(|p| !p.is_finite()) {
            return Err("non-finite price");
        }
        if prices.iter().any(|&p| p <= 0.0) {
            return Err("non-positive price");
        }
        if self.low > self.high {
            return Err("low > high");
        }
        if self.open < self.low || self.open > self.high {
            return Err("open outside [low, high]");
        }
        if self.close < self.low || self.close > self.high {
            return Err("close outside [low, high]");
        }
        Ok(())
    }
}

/// Bars for one asset, strictly increasing by date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceFrame {
    asset: String,
    bars: Vec<OhlcBar>,
}

impl PriceFrame {
    /// Builds a frame, sorting bars by date. Duplicated dates and empty input
    /// are rejected, as is any bar that violates [`OhlcBar::check`].
    pub fn new(asset: impl Into<String>, mut bars: Vec<OhlcBar>) -> Result<Self, IngestError> {
        if bars.is_empty() {
            return Err(IngestError::Empty);
        }
        let bad: Vec<BarViolation> = bars
            .iter()
            .enumerate()
            .filter_map(|(i, b)| {
                b.check().err().map(|reason| BarViolation {
                    line: i as u64 + 1,
                    date: b.date,
                    reason,
                })
            })
            .collect();
        if !bad.is_empty() {
            return Err(IngestError::InvalidBars(bad));
        }
        bars.sort_by_key(|b| b.date);
        if let Some(w) = bars.windows(2).find(|w| w[0].date == w[1].date) {
            return Err(IngestError::DuplicateDate(w[0].date));
        }
        Ok(Self {
            asset: asset.into(),
            bars,
        })
    }

    pub fn asset(&self) -> &str {
        &self.asset
    }

    pub fn bars(&self) -> &[OhlcBar] {
        &self.bars
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }

    pub fn dates(&self) -> Vec<NaiveDate> {
        self.bars.iter().map(|b| b.date).collect()
    }

    pub fn closes(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.close).collect()
    }

    pub fn opens(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.open).collect()
    }

    pub fn highs(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.high).collect()
    }

    pub fn lows(&self) -> Vec<f64> {
        self.bars.iter().map(|b| b.low).collect()
    }

    pub fn column(&self, field: PriceField) -> Vec<f64> {
        match field {
            PriceField::Open => self.opens(),
            PriceField::High => self.highs(),
            PriceField::Low => self.lows(),
            PriceField::Close => self.closes(),
        }
    }

    /// Sub-frame of bars whose date lies in `[from, to]`; `None` when empty.
    pub fn slice_dates(&self, from: NaiveDate, to: NaiveDate) -> Option<PriceFrame> {
        let bars: Vec<OhlcBar> = self
            .bars
            .iter()
            .filter(|b| b.date >= from && b.date <= to)
            .copied()
            .collect();
        (!bars.is_empty()).then(|| PriceFrame {
            asset: self.asset.clone(),
            bars,
        })
    }

    /// Writes the plain layout `date,close,open,high,low`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), IngestError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "close", "open", "high", "low"])?;
        for b in &self.bars {
            w.write_record([
                b.date.format("%Y-%m-%d").to_string(),
                b.close.to_string(),
                b.open.to_string(),
                b.high.to_string(),
                b.low.to_string(),
            ])?;
        }
        w.flush().map_err(|source| IngestError::Io {
            path: "<writer>".into(),
            source,
        })?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), IngestError> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|source| IngestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        self.write_csv(file)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PriceField {
    Open,
    High,
    Low,
    Close,
}

impl std::str::FromStr for PriceField {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "open" => Ok(Self::Open),
            "high" => Ok(Self::High),
            "low" => Ok(Self::Low),
            "close" | "price" => Ok(Self::Close),
            other => Err(format!("unknown price column `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormatHint {
    /// `date,close,open,high,low`, ISO dates.
    Plain,
    /// Investing.com-style export: `"Date","Price","Open","High","Low","Vol.","Change %"`.
    Vendor,
}

const PLAIN_HEADER: [&str; 5] = ["date", "close", "open", "high", "low"];
const VENDOR_HEADER: [&str; 7] = ["date", "price", "open", "high", "low", "vol.", "change %"];

/// Guesses the layout from a header row.
pub fn detect_format(header: &[&str]) -> Option<FormatHint> {
    let norm: Vec<String> = header
        .iter()
        .map(|h| h.trim().trim_start_matches('\u{feff}').to_ascii_lowercase())
        .collect();
    if norm == PLAIN_HEADER {
        Some(FormatHint::Plain)
    } else if norm == VENDOR_HEADER {
        Some(FormatHint::Vendor)
    } else {
        None
    }
}

/// Parses an OHLC CSV file into a frame named after the file stem.
pub fn parse_csv(path: impl AsRef<Path>, hint: FormatHint) -> Result<PriceFrame, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let asset = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_reader(file, &asset, Some(hint))
}

/// Like [`parse_csv`] but detects the layout from the header.
pub fn parse_csv_auto(path: impl AsRef<Path>) -> Result<PriceFrame, IngestError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let asset = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_reader(file, &asset, None)
}

/// Parses from any reader. `hint = None` auto-detects the layout.
pub fn parse_reader<R: Read>(
    reader: R,
    asset: &str,
    hint: Option<FormatHint>,
) -> Result<PriceFrame, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let fields: Vec<&str> = header.iter().collect();
    let detected = detect_format(&fields);
    let format = match (hint, detected) {
        (Some(h), Some(d)) if h == d => h,
        (None, Some(d)) => d,
        _ => {
            return Err(IngestError::UnknownHeader {
                found: fields.iter().map(|s| s.to_string()).collect(),
            })
        }
    };

    let mut bars = Vec::new();
    let mut violations = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let get = |i: usize| record.get(i).unwrap_or("");
        let date = match format {
            FormatHint::Plain => NaiveDate::parse_from_str(get(0), "%Y-%m-%d"),
            FormatHint::Vendor => NaiveDate::parse_from_str(get(0), "%b %d, %Y"),
        }
        .map_err(|e| IngestError::Row {
            line,
            message: format!("bad date `{}`: {e}", get(0)),
        })?;
        let num = |i: usize, name: &str| -> Result<f64, IngestError> {
            let raw = get(i);
            let cleaned: String = raw.chars().filter(|&c| c != ',').collect();
            cleaned.parse::<f64>().map_err(|_| IngestError::Row {
                line,
                message: format!("bad {name} `{raw}`"),
            })
        };
        let bar = OhlcBar {
            date,
            close: num(1, "close")?,
            open: num(2, "open")?,
            high: num(3, "high")?,
            low: num(4, "low")?,
        };
        match bar.check() {
            Ok(()) => bars.push(bar),
            Err(reason) => violations.push(BarViolation { line, date, reason }),
        }
    }
    if !violations.is_empty() {
        return Err(IngestError::InvalidBars(violations));
    }
    PriceFrame::new(asset, bars)
}

/// Restricts every frame to the dates common to all of them.
pub fn align_calendars(frames: &[PriceFrame]) -> Result<Vec<PriceFrame>, IngestError> {
    let Some(first) = frames.first() else {
        return Err(IngestError::Empty);
    };
    let mut common: BTreeSet<NaiveDate> = first.bars.iter().map(|b| b.date).collect();
    for f in &frames[1..] {
        let dates: BTreeSet<NaiveDate> = f.bars.iter().map(|b| b.date).collect();
        common = common.intersection(&dates).copied().collect();
    }
    if common.is_empty() {
        return Err(IngestError::EmptyIntersection);
    }
    Ok(frames
        .iter()
        .map(|f| PriceFrame {
            asset: f.asset.clone(),
            bars: f
                .bars
                .iter()
                .filter(|b| common.contains(&b.date))
                .copied()
                .collect(),
        })
        .collect())
}

/// Inclusive date ranges for the training and held-out windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_start: NaiveDate,
    pub train_end: NaiveDate,
    pub test_start: NaiveDate,
    pub test_end: NaiveDate,
}

impl Default for SplitSpec {
    fn default() -> Self {
        let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).expect("valid date");
        Self {
            train_start: d(2015, 1, 1),
            train_end: d(2018, 1, 1),
            test_start: d(2018, 1, 2),
            test_end: d(2019, 1, 1),
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<(), IngestError> {
        if self.train_start < self.train_end
            && self.train_end < self.test_start
            && self.test_start <= self.test_end
        {
            Ok(())
        } else {
            Err(IngestError::InvalidSplit(format!(
                "need train_start < train_end < test_start <= test_end, got {} {} {} {}",
                self.train_start, self.train_end, self.test_start, self.test_end
            )))
        }
    }

    pub fn in_train(&self, d: NaiveDate) -> bool {
        d >= self.train_start && d <= self.train_end
    }

    pub fn in_test(&self, d: NaiveDate) -> bool {
        d >= self.test_start && d <= self.test_end
    }
}

/// Partitions a frame into its training and test windows.
pub fn split(frame: &PriceFrame, spec: &SplitSpec) -> Result<(PriceFrame, PriceFrame), IngestError> {
    spec.validate()?;
    let train = frame
        .slice_dates(spec.train_start, spec.train_end)
        .ok_or(IngestError::EmptyPartition { partition: "train" })?;
    let test = frame
        .slice_dates(spec.test_start, spec.test_end)
        .ok_or(IngestError::EmptyPartition { partition: "test" })?;
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(y: i32, m: u32, day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(y, m, day).unwrap()
    }

    fn bar(date: NaiveDate, close: f64) -> OhlcBar {
        OhlcBar {
            date,
            open: close,
            high: close + 1.0,
            low: close * 0.5,
            close,
        }
    }

    #[test]
    fn plain_row_maps_fields() {
        let csv = "date,close,open,high,low\n2015-01-02,1186.20,1184.10,1194.50,1180.00\n";
        let f = parse_reader(csv.as_bytes(), "gold", Some(FormatHint::Plain)).unwrap();
        let b = f.bars()[0];
        assert_eq!(b.date, d(2015, 1, 2));
        assert_eq!(b.close, 1186.20);
        assert_eq!(b.open, 1184.10);
        assert_eq!(b.high, 1194.50);
        assert_eq!(b.low, 1180.00);
    }

    #[test]
    fn vendor_row_strips_separators() {
        let csv = "\"Date\",\"Price\",\"Open\",\"High\",\"Low\",\"Vol.\",\"Change %\"\n\
                   \"Jan 02, 2015\",\"1,186.20\",\"1,184.10\",\"1,194.50\",\"1,180.00\",\"\",\"-0.1%\"\n";
        let f = parse_reader(csv.as_bytes(), "gold", Some(FormatHint::Vendor)).unwrap();
        let plain = "date,close,open,high,low\n2015-01-02,1186.20,1184.10,1194.50,1180.00\n";
        let g = parse_reader(plain.as_bytes(), "gold", None).unwrap();
        assert_eq!(f.bars(), g.bars());
    }

    #[test]
    fn header_is_case_insensitive() {
        let csv = "Date,Close,Open,High,Low\n2015-01-02,2,2,3,1\n";
        assert!(parse_reader(csv.as_bytes(), "x", Some(FormatHint::Plain)).is_ok());
    }

    #[test]
    fn low_above_high_is_reported() {
        let csv = "date,close,open,high,low\n2015-01-02,10,10,9,11\n2015-01-05,10,10,11,9\n";
        match parse_reader(csv.as_bytes(), "x", None) {
            Err(IngestError::InvalidBars(v)) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].line, 2);
                assert_eq!(v[0].reason, "low > high");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_header_and_bad_numbers() {
        let csv = "when,close,open,high,low\n";
        assert!(matches!(
            parse_reader(csv.as_bytes(), "x", None),
            Err(IngestError::UnknownHeader { .. })
        ));
        let csv = "date,close,open,high,low\n2015-01-02,abc,1,1,1\n";
        match parse_reader(csv.as_bytes(), "x", None) {
            Err(IngestError::Row { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let csv = "date,close,open,high,low\n02/01/2015,1,1,1,1\n";
        assert!(matches!(
            parse_reader(csv.as_bytes(), "x", None),
            Err(IngestError::Row { line: 2, .. })
        ));
    }

    #[test]
    fn hint_mismatch_is_unknown_header() {
        let csv = "date,close,open,high,low\n2015-01-02,1,1,1,1\n";
        assert!(matches!(
            parse_reader(csv.as_bytes(), "x", Some(FormatHint::Vendor)),
            Err(IngestError::UnknownHeader { .. })
        ));
    }

    #[test]
    fn empty_file_and_sorting() {
        let csv = "date,close,open,high,low\n";
        assert!(matches!(
            parse_reader(csv.as_bytes(), "x", None),
            Err(IngestError::Empty)
        ));
        let csv = "date,close,open,high,low\n2015-01-05,2,2,2,2\n2015-01-02,1,1,1,1\n";
        let f = parse_reader(csv.as_bytes(), "x", None).unwrap();
        assert_eq!(f.dates(), vec![d(2015, 1, 2), d(2015, 1, 5)]);
    }

    #[test]
    fn duplicate_dates_rejected() {
        let csv = "date,close,open,high,low\n2015-01-02,2,2,2,2\n2015-01-02,1,1,1,1\n";
        assert!(matches!(
            parse_reader(csv.as_bytes(), "x", None),
            Err(IngestError::DuplicateDate(_))
        ));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            parse_csv("/definitely/not/here.csv", FormatHint::Plain),
            Err(IngestError::Io { .. })
        ));
    }

    #[test]
    fn alignment_cases() {
        let a = PriceFrame::new("a", vec![bar(d(2015, 1, 1), 1.0), bar(d(2015, 1, 2), 2.0)]).unwrap();
        let b = PriceFrame::new("b", vec![bar(d(2015, 1, 2), 3.0)]).unwrap();
        let same = align_calendars(&[a.clone(), a.clone()]).unwrap();
        assert_eq!(same[0], a);
        let out = align_calendars(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(out[0].dates(), vec![d(2015, 1, 2)]);
        assert_eq!(out[1].dates(), vec![d(2015, 1, 2)]);
        let c = PriceFrame::new("c", vec![bar(d(2016, 1, 1), 3.0)]).unwrap();
        assert!(matches!(
            align_calendars(&[a, c]),
            Err(IngestError::EmptyIntersection)
        ));
    }

    #[test]
    fn default_split_windows() {
        let s = SplitSpec::default();
        assert_eq!(s.train_start, d(2015, 1, 1));
        assert_eq!(s.train_end, d(2018, 1, 1));
        assert_eq!(s.test_start, d(2018, 1, 2));
        assert_eq!(s.test_end, d(2019, 1, 1));
        s.validate().unwrap();
    }

    #[test]
    fn split_partitions_and_errors() {
        let bars: Vec<_> = (0..10)
            .map(|i| bar(d(2015, 1, 1) + chrono::Days::new(i), 10.0 + i as f64))
            .collect();
        let f = PriceFrame::new("x", bars).unwrap();
        let spec = SplitSpec {
            train_start: d(2015, 1, 1),
            train_end: d(2015, 1, 5),
            test_start: d(2015, 1, 6),
            test_end: d(2015, 1, 10),
        };
        let (tr, te) = split(&f, &spec).unwrap();
        assert_eq!(tr.len() + te.len(), f.len());
        let all_train = SplitSpec {
            train_start: d(2015, 1, 1),
            train_end: d(2015, 1, 10),
            test_start: d(2015, 2, 1),
            test_end: d(2015, 3, 1),
        };
        assert!(matches!(
            split(&f, &all_train),
            Err(IngestError::EmptyPartition { partition: "test" })
        ));
        let bad = SplitSpec {
            train_end: d(2015, 2, 2),
            ..all_train
        };
        assert!(matches!(split(&f, &bad), Err(IngestError::InvalidSplit(_))));
    }
}
