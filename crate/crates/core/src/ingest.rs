//! Loading annual-maximum series from delimited text.
//!
//! Numbers are parsed with Rust's locale-independent float parser: the
//! decimal separator is always `.`, and a value such as `12,5` is rejected
//! as non-numeric. Zero and negative flows are kept.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// A column picked by header name or by zero-based position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnRef {
    Name(String),
    Index(usize),
}

impl std::str::FromStr for ColumnRef {
    type Err = std::convert::Infallible;

    /// Digits select by position, anything else by name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.parse::<usize>() {
            Ok(i) => ColumnRef::Index(i),
            Err(_) => ColumnRef::Name(s.to_string()),
        })
    }
}

#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Defaults to a column named flow/value/peak/max, else the last numeric one.
    pub value_column: Option<ColumnRef>,
    /// Defaults to a column named `year` when a header is present.
    pub year_column: Option<ColumnRef>,
    /// Defaults to tab for `.tsv` files and comma otherwise.
    pub delimiter: Option<u8>,
    pub has_header: bool,
    /// Defaults to the file stem.
    pub station_id: Option<String>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            value_column: None,
            year_column: None,
            delimiter: None,
            has_header: true,
            station_id: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationSeries {
    pub station_id: String,
    pub values: Vec<f64>,
    pub years: Option<Vec<i64>>,
    pub source: PathBuf,
    /// Data rows seen in the file, kept or not.
    pub rows_read: usize,
    pub diagnostics: Vec<String>,
}

impl StationSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Copy without observations strictly below `threshold`, and the number removed.
    pub fn drop_below(&self, threshold: f64) -> (StationSeries, usize) {
        let keep: Vec<bool> = self.values.iter().map(|v| *v >= threshold).collect();
        let removed = keep.iter().filter(|k| !**k).count();
        let pick = |src: &[f64]| src.iter().zip(&keep).filter(|(_, k)| **k).map(|(v, _)| *v).collect();
        let years = self
            .years
            .as_ref()
            .map(|ys| ys.iter().zip(&keep).filter(|(_, k)| **k).map(|(y, _)| *y).collect());
        let mut out = self.clone();
        out.values = pick(&self.values);
        out.years = years;
        (out, removed)
    }

    /// Write `year,value` (or just `value`) rows that load back unchanged.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        match &self.years {
            Some(ys) => {
                w.write_record(["year", "value"])?;
                for (y, v) in ys.iter().zip(&self.values) {
                    w.write_record([y.to_string(), v.to_string()])?;
                }
            }
            None => {
                w.write_record(["value"])?;
                for v in &self.values {
                    w.write_record([v.to_string()])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

pub fn load_series(path: &Path, options: &LoadOptions) -> Result<StationSeries> {
    let file = std::fs::File::open(path).map_err(|source| Error::FileUnreadable {
        path: path.to_path_buf(),
        source,
    })?;
    let delimiter = options.delimiter.unwrap_or_else(|| {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("tsv") => b'\t',
            _ => b',',
        }
    });
    let station_id = options.station_id.clone().unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let mut series = parse_series(file, delimiter, options, &path.display().to_string())?;
    series.station_id = station_id;
    series.source = path.to_path_buf();
    Ok(series)
}

fn parse_number(field: &str) -> Option<f64> {
    field.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

fn resolve(col: &ColumnRef, header: Option<&[String]>, what: &str) -> Result<usize> {
    match col {
        ColumnRef::Index(i) => Ok(*i),
        ColumnRef::Name(name) => header
            .and_then(|h| h.iter().position(|c| c.trim().eq_ignore_ascii_case(name)))
            .ok_or_else(|| Error::NoNumericColumn(format!("{what} column `{name}` not found in header"))),
    }
}

/// Parse a series from any reader; `origin` labels diagnostics.
pub fn parse_series<R: Read>(input: R, delimiter: u8, options: &LoadOptions, origin: &str) -> Result<StationSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut rows: Vec<Vec<String>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        rows.push(rec.iter().map(|f| f.to_string()).collect());
    }
    let header = if options.has_header && !rows.is_empty() {
        Some(rows.remove(0))
    } else {
        None
    };
    if rows.is_empty() {
        return Err(Error::EmptySeries(format!("{origin} has no data rows")));
    }

    let width = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let numeric_in = |c: usize| rows.iter().any(|r| r.get(c).and_then(|f| parse_number(f)).is_some());

    let value_col = match &options.value_column {
        Some(c) => resolve(c, header.as_deref(), "value")?,
        None => {
            let by_name = header.as_ref().and_then(|h| {
                h.iter().position(|c| {
                    let c = c.trim().to_ascii_lowercase();
                    ["flow", "value", "peak", "max", "peak_flow", "annual_max"].contains(&c.as_str())
                })
            });
            match by_name {
                Some(c) => c,
                None => (0..width)
                    .rev()
                    .find(|&c| numeric_in(c))
                    .ok_or_else(|| Error::NoNumericColumn(format!("{origin}: no column holds numbers")))?,
            }
        }
    };
    if !numeric_in(value_col) {
        return Err(Error::NoNumericColumn(format!(
            "{origin}: column {value_col} holds no numbers"
        )));
    }
    let year_col = match &options.year_column {
        Some(c) => Some(resolve(c, header.as_deref(), "year")?),
        None => header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c.trim().eq_ignore_ascii_case("year"))),
    }
    .filter(|&c| c != value_col);

    let mut diagnostics = Vec::new();
    let mut values = Vec::new();
    let mut years = Vec::new();
    let first_line = if header.is_some() { 2 } else { 1 };
    for (i, row) in rows.iter().enumerate() {
        let line = i + first_line;
        let field = row.get(value_col).map(|s| s.trim()).unwrap_or("");
        let Some(v) = parse_number(field) else {
            diagnostics.push(if field.is_empty() {
                format!("row {line}: missing value, dropped")
            } else {
                format!("row {line}: non-numeric value `{field}`, dropped")
            });
            continue;
        };
        if let Some(yc) = year_col {
            let yf = row.get(yc).map(|s| s.trim()).unwrap_or("");
            match yf.parse::<i64>() {
                Ok(y) => years.push(y),
                Err(_) => {
                    diagnostics.push(format!("row {line}: unreadable year `{yf}`, dropped"));
                    continue;
                }
            }
        }
        values.push(v);
    }
    if values.is_empty() {
        return Err(Error::EmptySeries(format!("{origin}: every row was dropped")));
    }

    let years = match year_col {
        Some(_) if years.windows(2).all(|w| w[0] < w[1]) => Some(years),
        Some(_) => {
            diagnostics.push("years are not strictly increasing; year column ignored".into());
            None
        }
        None => None,
    };
    if values.len() < 10 {
        diagnostics.push(format!("only {} values; at least 10 are needed for a fit", values.len()));
    } else if values.len() < 30 {
        diagnostics.push(format!("{} values; estimates from fewer than 30 years are imprecise", values.len()));
    }
    Ok(StationSeries {
        station_id: String::new(),
        values,
        years,
        source: PathBuf::from(origin),
        rows_read: rows.len(),
        diagnostics,
    })
}
