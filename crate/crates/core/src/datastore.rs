//! CSV persistence for candidate datasets.
//!
//! One header row in canonical column order, one row per candidate,
//! RFC-4180 quoting, UTF-8. Missing optionals are empty fields, timestamps
//! are RFC-3339 UTC and reals carry at most six fractional digits.

use std::collections::HashMap;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use thiserror::Error;

use crate::record::CandidateRecord;

pub const SCHEMA_VERSION: &str = "v1";

/// Canonical column order.
pub const COLUMNS: [&str; 16] = [
    "full_name",
    "crawled_at",
    "star_count",
    "watcher_count",
    "age_days",
    "avg_issue_active_time_days",
    "avg_issue_close_time_days",
    "avg_issue_comments",
    "issue_raiser_count",
    "org_issue_raiser_count",
    "pull_request_count",
    "contributor_count",
    "open_issue_count",
    "dependency_count",
    "download_total",
    "issue_sample_size",
];

#[derive(Debug, Error)]
pub enum DatastoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema mismatch: unknown columns [{}], missing columns [{}]", unknown.join(", "), missing.join(", "))]
    SchemaMismatch {
        unknown: Vec<String>,
        missing: Vec<String>,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: String,
        message: String,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
}

/// An ordered set of candidate records, unique by `full_name`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    records: Vec<CandidateRecord>,
    pub schema_version: String,
    pub source_path: Option<PathBuf>,
}

impl Dataset {
    pub fn empty() -> Self {
        Dataset {
            records: Vec::new(),
            schema_version: SCHEMA_VERSION.to_string(),
            source_path: None,
        }
    }

    /// Builds a dataset; a repeated `full_name` replaces the earlier row in place.
    pub fn from_records(records: impl IntoIterator<Item = CandidateRecord>) -> Self {
        Dataset::empty().merge(records)
    }

    pub fn records(&self) -> &[CandidateRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, full_name: &str) -> Option<&CandidateRecord> {
        self.records.iter().find(|r| r.full_name == full_name)
    }

    pub fn full_names(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.full_name.as_str())
    }

    /// Replace-by-`full_name` merge. Untouched rows keep their position;
    /// new names are appended in the order given.
    pub fn merge(&self, new_records: impl IntoIterator<Item = CandidateRecord>) -> Dataset {
        let mut records = self.records.clone();
        let mut index: HashMap<String, usize> = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.full_name.clone(), i))
            .collect();
        for rec in new_records {
            match index.get(&rec.full_name) {
                Some(&i) => records[i] = rec,
                None => {
                    index.insert(rec.full_name.clone(), records.len());
                    records.push(rec);
                }
            }
        }
        Dataset {
            records,
            schema_version: self.schema_version.clone(),
            source_path: self.source_path.clone(),
        }
    }

    /// Keeps only the named candidates, in dataset order.
    pub fn filter(&self, keep: &[String]) -> Dataset {
        Dataset {
            records: self
                .records
                .iter()
                .filter(|r| keep.contains(&r.full_name))
                .cloned()
                .collect(),
            schema_version: self.schema_version.clone(),
            source_path: self.source_path.clone(),
        }
    }

    pub fn write_to<W: Write>(&self, out: W) -> Result<(), DatastoreError> {
        let mut w = csv::WriterBuilder::new().from_writer(out);
        w.write_record(COLUMNS)?;
        for r in &self.records {
            w.write_record(record_fields(r))?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf)
            .expect("writing CSV to memory cannot fail");
        String::from_utf8(buf).expect("CSV output is UTF-8")
    }

    /// Writes the dataset to `path`, replacing any existing file atomically.
    pub fn write_csv(&self, path: &Path) -> Result<(), DatastoreError> {
        let io_err = |source| DatastoreError::Io {
            path: path.to_path_buf(),
            source,
        };
        let tmp = tmp_sibling(path);
        fs::write(&tmp, self.to_csv_string()).map_err(io_err)?;
        fs::rename(&tmp, path).map_err(io_err)
    }

    pub fn read_from<R: Read>(input: R) -> Result<Dataset, DatastoreError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
        let headers = rdr.headers()?.clone();
        let mut positions = [0usize; COLUMNS.len()];
        let mut missing = Vec::new();
        for (slot, col) in positions.iter_mut().zip(COLUMNS) {
            match headers.iter().position(|h| h == col) {
                Some(p) => *slot = p,
                None => missing.push(col.to_string()),
            }
        }
        let unknown: Vec<String> = headers
            .iter()
            .filter(|h| !COLUMNS.contains(h))
            .map(str::to_string)
            .collect();
        if !unknown.is_empty() || !missing.is_empty() || headers.len() != COLUMNS.len() {
            return Err(DatastoreError::SchemaMismatch { unknown, missing });
        }

        let mut records = Vec::new();
        for row in rdr.records() {
            let row = row?;
            let line = row.position().map_or(0, |p| p.line());
            let field = |i: usize| RowField {
                line,
                column: COLUMNS[i],
                raw: row.get(positions[i]).unwrap_or(""),
            };
            records.push(CandidateRecord {
                full_name: field(0).raw.to_string(),
                crawled_at: field(1).timestamp()?,
                star_count: field(2).count()?,
                watcher_count: field(3).count()?,
                age_days: field(4).real()?,
                avg_issue_active_time_days: field(5).optional(RowField::real)?,
                avg_issue_close_time_days: field(6).optional(RowField::real)?,
                avg_issue_comments: field(7).optional(RowField::real)?,
                issue_raiser_count: field(8).count()?,
                org_issue_raiser_count: field(9).count()?,
                pull_request_count: field(10).count()?,
                contributor_count: field(11).count()?,
                open_issue_count: field(12).count()?,
                dependency_count: field(13).optional(RowField::count)?,
                download_total: field(14).count()?,
                issue_sample_size: field(15).count()?,
            });
        }
        Ok(Dataset::from_records(records))
    }

    pub fn read_csv(path: &Path) -> Result<Dataset, DatastoreError> {
        let file = fs::File::open(path).map_err(|source| DatastoreError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut ds = Dataset::read_from(file)?;
        ds.source_path = Some(path.to_path_buf());
        Ok(ds)
    }
}

fn tmp_sibling(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Formats a real with at most six fractional digits and no exponent.
pub fn format_real(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0');
    let s = s.strip_suffix('.').unwrap_or(s);
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::AutoSi, true)
}

fn record_fields(r: &CandidateRecord) -> [String; 16] {
    let opt_real = |v: Option<f64>| v.map(format_real).unwrap_or_default();
    [
        r.full_name.clone(),
        format_timestamp(&r.crawled_at),
        r.star_count.to_string(),
        r.watcher_count.to_string(),
        format_real(r.age_days),
        opt_real(r.avg_issue_active_time_days),
        opt_real(r.avg_issue_close_time_days),
        opt_real(r.avg_issue_comments),
        r.issue_raiser_count.to_string(),
        r.org_issue_raiser_count.to_string(),
        r.pull_request_count.to_string(),
        r.contributor_count.to_string(),
        r.open_issue_count.to_string(),
        r.dependency_count.map(|v| v.to_string()).unwrap_or_default(),
        r.download_total.to_string(),
        r.issue_sample_size.to_string(),
    ]
}

struct RowField<'a> {
    line: u64,
    column: &'static str,
    raw: &'a str,
}

impl RowField<'_> {
    fn error(&self, message: impl Into<String>) -> DatastoreError {
        DatastoreError::Parse {
            line: self.line,
            column: self.column.to_string(),
            message: message.into(),
        }
    }

    fn count(&self) -> Result<u64, DatastoreError> {
        self.raw
            .parse()
            .map_err(|_| self.error(format!("expected a non-negative integer, found {:?}", self.raw)))
    }

    fn real(&self) -> Result<f64, DatastoreError> {
        match self.raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.error(format!("expected a finite number, found {:?}", self.raw))),
        }
    }

    fn timestamp(&self) -> Result<DateTime<Utc>, DatastoreError> {
        DateTime::parse_from_rfc3339(self.raw)
            .map(|t| t.with_timezone(&Utc))
            .map_err(|e| self.error(format!("expected an RFC-3339 timestamp: {e}")))
    }

    fn optional<T>(
        &self,
        parse: impl Fn(&Self) -> Result<T, DatastoreError>,
    ) -> Result<Option<T>, DatastoreError> {
        if self.raw.is_empty() {
            Ok(None)
        } else {
            parse(self).map(Some)
        }
    }
}
