//! Observation readers for CSV and JSONL input.
//!
//! Instants are implicit: the k-th valid observation is instant k. Malformed
//! rows are reported with their 1-based line number and do not consume an
//! instant.

use std::io::{BufRead, Cursor, Read};

use serde::Deserialize;

#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obs {
    pub line: u64,
    pub coords: Vec<f64>,
}

pub type Row = Result<Obs, RowError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonRow {
    r: JsonCoords,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonCoords {
    Scalar(f64),
    Vector(Vec<f64>),
}

/// Iterator over rows. The dimension is fixed by the first valid row.
pub struct Observations {
    inner: Inner,
    dim: Option<usize>,
}

enum Inner {
    Csv {
        records: csv::StringRecordsIntoIter<Box<dyn Read>>,
        first: bool,
    },
    Jsonl {
        lines: std::io::Lines<Box<dyn BufRead>>,
        line: u64,
    },
}

impl Observations {
    /// Sniffs the format from the first non-blank line unless one is given.
    pub fn new(mut reader: Box<dyn BufRead>, format: Option<Format>) -> std::io::Result<Self> {
        let mut head = String::new();
        let mut skipped = Vec::new();
        while reader.read_line(&mut head)? > 0 && head.trim().is_empty() {
            skipped.push(std::mem::take(&mut head));
        }
        let format = format.unwrap_or(if head.trim_start().starts_with('{') {
            Format::Jsonl
        } else {
            Format::Csv
        });
        skipped.push(head);
        let replay = Cursor::new(skipped.concat().into_bytes());
        let reader: Box<dyn BufRead> = Box::new(std::io::BufReader::new(replay.chain(reader)));
        let inner = match format {
            Format::Csv => Inner::Csv {
                records: csv::ReaderBuilder::new()
                    .has_headers(false)
                    .flexible(true)
                    .trim(csv::Trim::All)
                    .from_reader(Box::new(reader) as Box<dyn Read>)
                    .into_records(),
                first: true,
            },
            Format::Jsonl => Inner::Jsonl {
                lines: reader.lines(),
                line: 0,
            },
        };
        Ok(Self { inner, dim: None })
    }

    fn check(&mut self, line: u64, coords: Vec<f64>) -> Row {
        if coords.is_empty() {
            return Err(RowError {
                line,
                message: "no coordinates".into(),
            });
        }
        if let Some(k) = coords.iter().position(|x| !x.is_finite()) {
            return Err(RowError {
                line,
                message: format!("coordinate {} is not finite", k + 1),
            });
        }
        match self.dim {
            Some(d) if d != coords.len() => Err(RowError {
                line,
                message: format!("expected {d} coordinates, got {}", coords.len()),
            }),
            _ => {
                self.dim = Some(coords.len());
                Ok(Obs { line, coords })
            }
        }
    }
}

impl Iterator for Observations {
    type Item = Row;

    fn next(&mut self) -> Option<Row> {
        loop {
            let (line, parsed) = match &mut self.inner {
                Inner::Csv { records, first } => {
                    let rec = records.next()?;
                    let is_first = std::mem::replace(first, false);
                    match rec {
                        Err(e) => {
                            let line = e.position().map_or(0, |p| p.line());
                            (line, Err(e.to_string()))
                        }
                        Ok(rec) => {
                            let line = rec.position().map_or(0, |p| p.line());
                            let fields: Vec<Result<f64, _>> = rec.iter().map(str::parse::<f64>).collect();
                            // A first row with no numeric field is a header.
                            if is_first && fields.iter().all(Result::is_err) {
                                continue;
                            }
                            match fields.iter().position(Result::is_err) {
                                Some(k) => (line, Err(format!("field {} ({:?}) is not a number", k + 1, &rec[k]))),
                                None => (line, Ok(fields.into_iter().map(Result::unwrap).collect())),
                            }
                        }
                    }
                }
                Inner::Jsonl { lines, line } => {
                    let text = match lines.next()? {
                        Ok(t) => t,
                        Err(e) => {
                            return Some(Err(RowError {
                                line: *line + 1,
                                message: e.to_string(),
                            }))
                        }
                    };
                    *line += 1;
                    if text.trim().is_empty() {
                        continue;
                    }
                    let parsed = serde_json::from_str::<JsonRow>(&text)
                        .map(|row| match row.r {
                            JsonCoords::Scalar(x) => vec![x],
                            JsonCoords::Vector(v) => v,
                        })
                        .map_err(|e| e.to_string());
                    (*line, parsed)
                }
            };
            return Some(match parsed {
                Ok(coords) => self.check(line, coords),
                Err(message) => Err(RowError { line, message }),
            });
        }
    }
}
