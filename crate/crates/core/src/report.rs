//! Level tallies, prediction files and agreement with gold levels.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::irt::{assign_difficulty, CategoryVerdicts, DifficultyLevel, LearnerCategory};
use crate::{Error, Result};

/// Count of questions per difficulty level.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LevelTally {
    counts: BTreeMap<DifficultyLevel, usize>,
}

impl LevelTally {
    pub fn from_levels(levels: impl IntoIterator<Item = DifficultyLevel>) -> Self {
        let mut counts = BTreeMap::new();
        for l in levels {
            *counts.entry(l).or_insert(0) += 1;
        }
        LevelTally { counts }
    }

    pub fn count(&self, level: DifficultyLevel) -> usize {
        self.counts.get(&level).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    pub fn classifiable(&self) -> usize {
        self.total() - self.non_classifiable()
    }

    pub fn non_classifiable(&self) -> usize {
        self.count(DifficultyLevel::NonClassifiable)
    }

    pub fn percent(count: usize, total: usize) -> f64 {
        if total == 0 {
            0.0
        } else {
            100.0 * count as f64 / total as f64
        }
    }

    /// Aligned table of counts and percentages per level.
    pub fn render(&self) -> String {
        let total = self.total();
        let mut out = String::new();
        let _ = writeln!(out, "{:<18}{:>7}{:>9}", "level", "count", "percent");
        let mut row = |name: &str, n: usize| {
            let _ = writeln!(out, "{name:<18}{n:>7}{:>8.1}%", Self::percent(n, total));
        };
        for l in DifficultyLevel::ALL {
            row(l.as_str(), self.count(l));
        }
        row("classifiable", self.classifiable());
        row("total", total);
        out
    }
}

/// Per-question model output.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub id: String,
    /// Probability of `d` per category, in category order.
    pub probabilities: [f64; 3],
    pub verdicts: CategoryVerdicts,
}

impl Prediction {
    pub fn level(&self) -> DifficultyLevel {
        assign_difficulty(self.verdicts)
    }
}

pub fn write_predictions(mut out: impl Write, predictions: &[Prediction]) -> Result<()> {
    let mut header = vec!["id".to_string()];
    for c in LearnerCategory::ALL {
        header.push(format!("{c}_p"));
        header.push(c.name().to_string());
    }
    header.push("level".into());
    writeln!(out, "{}", header.join("\t"))?;
    for p in predictions {
        let mut row = vec![p.id.clone()];
        for (i, c) in LearnerCategory::ALL.into_iter().enumerate() {
            row.push(format!("{:.6}", p.probabilities[i]));
            row.push(p.verdicts.get(c).to_string());
        }
        row.push(p.level().to_string());
        writeln!(out, "{}", row.join("\t"))?;
    }
    Ok(())
}

/// Reads `(id, level)` pairs from a tab-separated file with `id` and
/// `level` columns; other columns are ignored.
pub fn read_levels(input: impl Read) -> Result<Vec<(String, DifficultyLevel)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::input(format!("level file lacks a '{name}' column")))
    };
    let (id_col, level_col) = (column("id")?, column("level")?);
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let get = |i: usize| row.get(i).ok_or_else(|| Error::input(format!("line {line}: missing column")));
        let level = get(level_col)?
            .parse()
            .map_err(|e| Error::input(format!("line {line}: {e}")))?;
        out.push((get(id_col)?.to_string(), level));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgreementSummary {
    pub total: usize,
    pub matches: usize,
    /// Predictions that are non-classifiable.
    pub non_classifiable: usize,
    /// `(gold, predicted)` → count.
    pub confusion: BTreeMap<(DifficultyLevel, DifficultyLevel), usize>,
}

fn index(rows: &[(String, DifficultyLevel)], what: &str) -> Result<BTreeMap<String, DifficultyLevel>> {
    let mut out = BTreeMap::new();
    for (id, level) in rows {
        if out.insert(id.clone(), *level).is_some() {
            return Err(Error::input(format!("{what} lists item '{id}' twice")));
        }
    }
    Ok(out)
}

/// Joins predictions and gold levels by item id; both must cover the same ids.
pub fn agreement(
    predictions: &[(String, DifficultyLevel)],
    gold: &[(String, DifficultyLevel)],
) -> Result<AgreementSummary> {
    let predicted = index(predictions, "predictions")?;
    let gold = index(gold, "gold")?;
    let p_ids: BTreeSet<&String> = predicted.keys().collect();
    let g_ids: BTreeSet<&String> = gold.keys().collect();
    if p_ids != g_ids {
        let only: Vec<String> = p_ids.symmetric_difference(&g_ids).take(5).map(|s| s.to_string()).collect();
        return Err(Error::input(format!(
            "prediction and gold ids differ (e.g. {})",
            only.join(", ")
        )));
    }
    let mut summary = AgreementSummary {
        total: gold.len(),
        matches: 0,
        non_classifiable: 0,
        confusion: BTreeMap::new(),
    };
    for (id, g) in &gold {
        let p = predicted[id];
        if p == *g {
            summary.matches += 1;
        }
        if p == DifficultyLevel::NonClassifiable {
            summary.non_classifiable += 1;
        }
        *summary.confusion.entry((*g, p)).or_insert(0) += 1;
    }
    Ok(summary)
}

impl AgreementSummary {
    pub fn match_percent(&self) -> f64 {
        LevelTally::percent(self.matches, self.total)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "matches: {}/{} ({:.1}%)",
            self.matches,
            self.total,
            self.match_percent()
        );
        let _ = writeln!(out, "non-classifiable: {}", self.non_classifiable);
        let _ = writeln!(out);
        let _ = writeln!(out, "confusion (rows gold, columns predicted)");
        let _ = write!(out, "{:<18}", "");
        for l in DifficultyLevel::ALL {
            let _ = write!(out, "{:>18}", l.as_str());
        }
        let _ = writeln!(out);
        for g in DifficultyLevel::ALL {
            let _ = write!(out, "{:<18}", g.as_str());
            for p in DifficultyLevel::ALL {
                let n = self.confusion.get(&(g, p)).copied().unwrap_or(0);
                let _ = write!(out, "{n:>18}");
            }
            let _ = writeln!(out);
        }
        out
    }
}
