//! Training records: the line-oriented record format and its CSV twin.
//!
//! ```text
//! Item identifier: dsa_1
//! Popularity: 0.231
//! Selectivity_Ex: 0.320
//! Selectivity_Bg: 0.113
//! Coherence: 0.520
//! Specificity: 0.440
//! Difficulty: d
//! ```
//!
//! Records are separated by a blank line. An empty `Difficulty:` field
//! marks an unlabeled record.

use std::io::{BufRead, Read, Write};

use crate::features::{Feature, FeatureVector};
use crate::irt::{LearnerCategory, Verdict};
use crate::{Error, Result};

const ID_FIELD: &str = "Item identifier";
const LABEL_FIELD: &str = "Difficulty";

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingRecord {
    pub id: String,
    pub features: FeatureVector,
    pub label: Option<Verdict>,
}

impl TrainingRecord {
    pub fn unlabeled(id: impl Into<String>, features: FeatureVector) -> Self {
        TrainingRecord {
            id: id.into(),
            features,
            label: None,
        }
    }
}

fn label_text(label: Option<Verdict>) -> &'static str {
    label.map_or("", Verdict::as_str)
}

pub fn write_records(mut out: impl Write, records: &[TrainingRecord]) -> Result<()> {
    for (n, r) in records.iter().enumerate() {
        if n > 0 {
            writeln!(out)?;
        }
        writeln!(out, "{ID_FIELD}: {}", r.id)?;
        for f in Feature::ALL {
            writeln!(out, "{}: {:.3}", f.name(), r.features.get(f))?;
        }
        writeln!(out, "{LABEL_FIELD}: {}", label_text(r.label))?;
    }
    Ok(())
}

#[derive(Default)]
struct Partial {
    id: Option<String>,
    values: [Option<f64>; 5],
    label: Option<Option<Verdict>>,
    line: usize,
}

impl Partial {
    fn is_empty(&self) -> bool {
        self.id.is_none() && self.values.iter().all(Option::is_none) && self.label.is_none()
    }

    fn finish(self) -> Result<TrainingRecord> {
        let at = self.line;
        let id = self
            .id
            .ok_or_else(|| Error::input(format!("record at line {at}: missing {ID_FIELD}")))?;
        let mut values = [0.0; 5];
        for (f, v) in Feature::ALL.iter().zip(self.values) {
            values[f.index()] =
                v.ok_or_else(|| Error::input(format!("record {id}: missing {}", f.name())))?;
        }
        Ok(TrainingRecord {
            features: FeatureVector::new(values).map_err(|e| Error::input(format!("record {id}: {e}")))?,
            label: self.label.flatten(),
            id,
        })
    }
}

fn parse_label(text: &str) -> Result<Option<Verdict>> {
    let text = text.trim();
    if text.is_empty() {
        Ok(None)
    } else {
        text.parse().map(Some)
    }
}

pub fn read_records(input: impl BufRead) -> Result<Vec<TrainingRecord>> {
    let mut out = Vec::new();
    let mut cur = Partial::default();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        let line_no = n + 1;
        if line.trim().is_empty() {
            if !cur.is_empty() {
                out.push(std::mem::take(&mut cur).finish()?);
            }
            continue;
        }
        let (name, value) = line
            .split_once(':')
            .ok_or_else(|| Error::input(format!("line {line_no}: expected 'Field: value'")))?;
        let name = name.trim();
        if cur.is_empty() {
            cur.line = line_no;
        }
        if name == ID_FIELD {
            if cur.id.is_some() {
                out.push(std::mem::replace(&mut cur, Partial { line: line_no, ..Partial::default() }).finish()?);
            }
            cur.id = Some(value.trim().to_string());
        } else if name == LABEL_FIELD {
            cur.label = Some(parse_label(value).map_err(|e| Error::input(format!("line {line_no}: {e}")))?);
        } else {
            let feature: Feature = name
                .parse()
                .map_err(|e| Error::input(format!("line {line_no}: {e}")))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::input(format!("line {line_no}: invalid number '{}'", value.trim())))?;
            cur.values[feature.index()] = Some(v);
        }
    }
    if !cur.is_empty() {
        out.push(cur.finish()?);
    }
    Ok(out)
}

pub fn csv_header() -> Vec<&'static str> {
    let mut h = vec![ID_FIELD];
    h.extend(Feature::ALL.iter().map(|f| f.name()));
    h.push(LABEL_FIELD);
    h
}

pub fn write_records_csv(out: impl Write, records: &[TrainingRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header())?;
    for r in records {
        let mut row = vec![r.id.clone()];
        // Shortest round-trip form, so predictions from the CSV match in-memory ones.
        row.extend(Feature::ALL.iter().map(|f| r.features.get(*f).to_string()));
        row.push(label_text(r.label).to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv(input: impl Read) -> Result<Vec<TrainingRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.iter().map(str::trim).collect::<Vec<_>>() != csv_header() {
        return Err(Error::input("unexpected CSV header for feature records"));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let mut values = [0.0; 5];
        for f in Feature::ALL {
            let cell = row.get(1 + f.index()).unwrap_or("").trim();
            values[f.index()] = cell
                .parse()
                .map_err(|_| Error::input(format!("line {line}: invalid number '{cell}'")))?;
        }
        out.push(TrainingRecord {
            id: row.get(0).unwrap_or("").trim().to_string(),
            features: FeatureVector::new(values).map_err(|e| Error::input(format!("line {line}: {e}")))?,
            label: parse_label(row.get(6).unwrap_or(""))?,
        });
    }
    Ok(out)
}

/// Reads either format, choosing CSV when the first line is the CSV header.
pub fn read_any(text: &str) -> Result<Vec<TrainingRecord>> {
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    if first.starts_with(&format!("{ID_FIELD},")) {
        read_records_csv(text.as_bytes())
    } else {
        read_records(text.as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRecord {
    pub id: String,
    pub features: FeatureVector,
    pub label: Verdict,
}

/// Labeled records for one learner category.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub category: LearnerCategory,
    pub records: Vec<LabeledRecord>,
}

impl LabeledDataset {
    pub fn new(category: LearnerCategory, records: Vec<LabeledRecord>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::input(format!("{category} dataset is empty")));
        }
        Ok(LabeledDataset { category, records })
    }

    /// Fails on records without a label.
    pub fn from_records(category: LearnerCategory, records: Vec<TrainingRecord>) -> Result<Self> {
        let records = records
            .into_iter()
            .map(|r| match r.label {
                Some(label) => Ok(LabeledRecord {
                    id: r.id,
                    features: r.features,
                    label,
                }),
                None => Err(Error::input(format!("record {} has no difficulty label", r.id))),
            })
            .collect::<Result<Vec<_>>>()?;
        LabeledDataset::new(category, records)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Number of `d` and `nd` records.
    pub fn class_counts(&self) -> (usize, usize) {
        let d = self.records.iter().filter(|r| r.label == Verdict::D).count();
        (d, self.records.len() - d)
    }

    pub fn has_both_classes(&self) -> bool {
        let (d, nd) = self.class_counts();
        d > 0 && nd > 0
    }
}
