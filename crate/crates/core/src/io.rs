//! CSV ingestion and emission: price series, option quotes, simulated paths and efficiency
//! reports.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use csv::{ReaderBuilder, StringRecord, Writer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::EfficiencyReport;
use crate::processes::PathGrid;
use crate::risk_neutral::OptionQuote;

pub const PRICE_HEADER: [&str; 2] = ["date", "close"];
pub const QUOTE_HEADER: [&str; 6] = ["date", "spot", "rate", "strike", "maturity_days", "mid_price"];
pub const PATH_HEADER: [&str; 2] = ["time", "value"];
pub const EFFICIENCY_HEADER: [&str; 6] = ["n", "var_median", "var_mean", "var_mad", "var_scaled_sd", "replications"];

/// Days per year used to convert `maturity_days`.
pub const DAYS_PER_YEAR: f64 = 365.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub dates: Vec<NaiveDate>,
    pub closes: Vec<f64>,
}

impl PriceSeries {
    pub fn new(dates: Vec<NaiveDate>, closes: Vec<f64>) -> Result<Self> {
        if dates.len() != closes.len() {
            return Err(Error::InvalidParameter(format!(
                "{} dates but {} closes",
                dates.len(),
                closes.len()
            )));
        }
        if dates.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: dates.len(),
            });
        }
        // Line numbers assume a header on line 1.
        for (i, &c) in closes.iter().enumerate() {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::NonPositivePrice { line: i + 2, value: c });
            }
        }
        if let Some(i) = dates.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::NonMonotoneDates { line: i + 3 });
        }
        Ok(Self { dates, closes })
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }
}

/// `rᵢ = ln(closeᵢ₊₁ / closeᵢ)`.
pub fn log_returns(ps: &PriceSeries) -> Vec<f64> {
    ps.closes.windows(2).map(|w| (w[1] / w[0]).ln()).collect()
}

/// One row of a quote CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuoteRecord {
    pub date: NaiveDate,
    pub spot: f64,
    pub rate: f64,
    pub strike: f64,
    pub maturity_days: f64,
    pub mid_price: f64,
}

impl QuoteRecord {
    pub fn to_quote(&self) -> OptionQuote {
        OptionQuote {
            strike: self.strike,
            maturity: self.maturity_days / DAYS_PER_YEAR,
            mid_price: self.mid_price,
            spot: self.spot,
            rate: self.rate,
        }
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::Parse {
            line,
            message: e.to_string(),
        },
    }
}

/// Reads all records after checking the header matches `expected` exactly. Returns each
/// record with its 1-based line number.
fn read_records<R: Read>(reader: R, expected: &[&str]) -> Result<Vec<(usize, StringRecord)>> {
    let mut rdr = ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(csv_error)?.clone();
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header `{}`, found `{}`",
                expected.join(","),
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        out.push((line, rec));
    }
    Ok(out)
}

fn field<T: std::str::FromStr>(rec: &StringRecord, line: usize, idx: usize, name: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let raw = rec.get(idx).unwrap_or_default();
    raw.parse().map_err(|e| Error::Parse {
        line,
        message: format!("{name} `{raw}`: {e}"),
    })
}

fn float(rec: &StringRecord, line: usize, idx: usize, name: &str) -> Result<f64> {
    let v: f64 = field(rec, line, idx, name)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parse {
            line,
            message: format!("{name} must be finite, got {v}"),
        })
    }
}

pub fn read_price_series<R: Read>(reader: R) -> Result<PriceSeries> {
    let records = read_records(reader, &PRICE_HEADER)?;
    let mut dates = Vec::with_capacity(records.len());
    let mut closes = Vec::with_capacity(records.len());
    for (line, rec) in &records {
        let date: NaiveDate = field(rec, *line, 0, "date")?;
        let close = float(rec, *line, 1, "close")?;
        if close <= 0.0 {
            return Err(Error::NonPositivePrice { line: *line, value: close });
        }
        if dates.last().is_some_and(|&d| date <= d) {
            return Err(Error::NonMonotoneDates { line: *line });
        }
        dates.push(date);
        closes.push(close);
    }
    if dates.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: dates.len(),
        });
    }
    Ok(PriceSeries { dates, closes })
}

pub fn load_price_series(path: impl AsRef<Path>) -> Result<PriceSeries> {
    read_price_series(open(path.as_ref())?)
}

pub fn write_price_series<W: Write>(ps: &PriceSeries, writer: W) -> Result<()> {
    let mut w = Writer::from_writer(writer);
    w.write_record(PRICE_HEADER).map_err(csv_error)?;
    for (d, c) in ps.dates.iter().zip(&ps.closes) {
        w.write_record([d.to_string(), c.to_string()]).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_quotes<R: Read>(reader: R) -> Result<Vec<QuoteRecord>> {
    read_records(reader, &QUOTE_HEADER)?
        .iter()
        .map(|(line, rec)| {
            let line = *line;
            let q = QuoteRecord {
                date: field(rec, line, 0, "date")?,
                spot: float(rec, line, 1, "spot")?,
                rate: float(rec, line, 2, "rate")?,
                strike: float(rec, line, 3, "strike")?,
                maturity_days: float(rec, line, 4, "maturity_days")?,
                mid_price: float(rec, line, 5, "mid_price")?,
            };
            if q.spot <= 0.0 {
                return Err(Error::NonPositivePrice { line, value: q.spot });
            }
            q.to_quote().validate().map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            Ok(q)
        })
        .collect()
}

pub fn load_quotes(path: impl AsRef<Path>) -> Result<Vec<QuoteRecord>> {
    read_quotes(open(path.as_ref())?)
}

pub fn write_quotes<W: Write>(quotes: &[QuoteRecord], writer: W) -> Result<()> {
    let mut w = Writer::from_writer(writer);
    w.write_record(QUOTE_HEADER).map_err(csv_error)?;
    for q in quotes {
        w.write_record([
            q.date.to_string(),
            q.spot.to_string(),
            q.rate.to_string(),
            q.strike.to_string(),
            q.maturity_days.to_string(),
            q.mid_price.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_path<W: Write>(path: &PathGrid, writer: W) -> Result<()> {
    let mut w = Writer::from_writer(writer);
    w.write_record(PATH_HEADER).map_err(csv_error)?;
    for (t, v) in path.times.iter().zip(&path.values) {
        w.write_record([t.to_string(), v.to_string()]).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_path<R: Read>(reader: R) -> Result<PathGrid> {
    let records = read_records(reader, &PATH_HEADER)?;
    let mut times = Vec::with_capacity(records.len());
    let mut values = Vec::with_capacity(records.len());
    for (line, rec) in &records {
        times.push(float(rec, *line, 0, "time")?);
        values.push(float(rec, *line, 1, "value")?);
    }
    PathGrid::new(times, values)
}

pub fn save_path(grid: &PathGrid, path: impl AsRef<Path>) -> Result<()> {
    write_path(grid, create(path.as_ref())?)
}

pub fn load_path(path: impl AsRef<Path>) -> Result<PathGrid> {
    read_path(open(path.as_ref())?)
}

pub fn write_efficiency<W: Write>(reports: &[EfficiencyReport], writer: W) -> Result<()> {
    let mut w = Writer::from_writer(writer);
    w.write_record(EFFICIENCY_HEADER).map_err(csv_error)?;
    for r in reports {
        w.write_record([
            r.n.to_string(),
            r.var_median.to_string(),
            r.var_mean.to_string(),
            r.var_mad.to_string(),
            r.var_scaled_sd.to_string(),
            r.replications.to_string(),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_efficiency<R: Read>(reader: R) -> Result<Vec<EfficiencyReport>> {
    read_records(reader, &EFFICIENCY_HEADER)?
        .iter()
        .map(|(line, rec)| {
            let line = *line;
            Ok(EfficiencyReport {
                n: field(rec, line, 0, "n")?,
                var_median: float(rec, line, 1, "var_median")?,
                var_mean: float(rec, line, 2, "var_mean")?,
                var_mad: float(rec, line, 3, "var_mad")?,
                var_scaled_sd: float(rec, line, 4, "var_scaled_sd")?,
                replications: field(rec, line, 5, "replications")?,
            })
        })
        .collect()
}
