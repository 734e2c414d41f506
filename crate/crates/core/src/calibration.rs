//! Item calibration from observed learner responses.
//!
//! Each category's proportion correct gives a difficulty estimate
//! `α = θ − ln(p / (1 − p))`. The per-category estimates are pooled with
//! inverse-variance weights `n·p·(1 − p)`, and the pooled α is placed
//! on the trait scale: an item is difficult for a category when α reaches
//! the midpoint between that category's θ and the next category below
//! (for the lowest category, the same half-gap below its θ).
//!
//! The per-category `p ≤ 0.5` verdicts are reported alongside. They decide
//! nothing on their own because an item pitched exactly at a category's
//! trait level is a coin flip for that category.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::irt::{
    assign_difficulty, estimate_alpha, proportion, verdict_from_p, CategoryVerdicts, DifficultyLevel,
    LearnerCategory, ThetaMap, Verdict,
};
use crate::{Error, Result};

pub const RESPONSE_HEADER: [&str; 4] = ["item_id", "learner_id", "category", "correct"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Response {
    pub item_id: String,
    pub learner_id: String,
    pub category: LearnerCategory,
    pub correct: bool,
}

pub fn read_responses(input: impl Read) -> Result<Vec<Response>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != RESPONSE_HEADER {
        return Err(Error::input(format!(
            "response file header must be {}",
            RESPONSE_HEADER.join(",")
        )));
    }
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let at = |e: Error| Error::input(format!("responses line {line}: {e}"));
        let correct = match &row[3] {
            "1" | "true" => true,
            "0" | "false" => false,
            other => return Err(at(Error::input(format!("correct must be 0 or 1, found '{other}'")))),
        };
        out.push(Response {
            item_id: row[0].to_string(),
            learner_id: row[1].to_string(),
            category: row[2].parse().map_err(at)?,
            correct,
        });
    }
    Ok(out)
}

pub fn write_responses(out: impl Write, responses: &[Response]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESPONSE_HEADER)?;
    for r in responses {
        w.write_record([
            r.item_id.as_str(),
            r.learner_id.as_str(),
            r.category.name(),
            if r.correct { "1" } else { "0" },
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryEstimate {
    pub category: LearnerCategory,
    pub n: usize,
    pub correct: usize,
    /// Proportion correct, smoothed when all responses agree.
    pub p: f64,
    pub alpha: f64,
}

impl CategoryEstimate {
    fn weight(&self) -> f64 {
        self.n as f64 * self.p * (1.0 - self.p)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItemCalibration {
    pub item_id: String,
    /// Estimates for the categories that have responses, in category order.
    pub estimates: Vec<CategoryEstimate>,
    /// Categories without any response; a non-empty list marks the item incomplete.
    pub missing: Vec<LearnerCategory>,
    pub pooled_alpha: Option<f64>,
    /// `p ≤ 0.5` per category.
    pub raw_verdicts: Option<CategoryVerdicts>,
    /// Verdicts from the pooled α against the category bands.
    pub verdicts: Option<CategoryVerdicts>,
    pub level: Option<DifficultyLevel>,
}

impl ItemCalibration {
    pub fn is_complete(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn estimate(&self, category: LearnerCategory) -> Option<&CategoryEstimate> {
        self.estimates.iter().find(|e| e.category == category)
    }
}

/// Lowest α that counts as difficult for each category.
pub fn band_floors(thetas: &ThetaMap) -> Result<[f64; 3]> {
    if !thetas.is_monotone() {
        return Err(Error::input(format!(
            "calibration needs expert > intermediate > beginner trait levels, got {thetas}"
        )));
    }
    let upper = (thetas.expert + thetas.intermediate) / 2.0;
    let lower = (thetas.intermediate + thetas.beginner) / 2.0;
    let bottom = thetas.beginner - (thetas.intermediate - thetas.beginner) / 2.0;
    Ok([upper, lower, bottom])
}

pub fn banded_verdicts(alpha: f64, thetas: &ThetaMap) -> Result<CategoryVerdicts> {
    let floors = band_floors(thetas)?;
    let v = |floor: f64| if alpha >= floor { Verdict::D } else { Verdict::Nd };
    Ok(CategoryVerdicts::new(v(floors[0]), v(floors[1]), v(floors[2])))
}

/// Inverse-variance weighted mean of the per-category α estimates.
pub fn pooled_alpha(estimates: &[CategoryEstimate]) -> Option<f64> {
    let total: f64 = estimates.iter().map(CategoryEstimate::weight).sum();
    if estimates.is_empty() || total <= 0.0 {
        return None;
    }
    Some(estimates.iter().map(|e| e.weight() * e.alpha).sum::<f64>() / total)
}

pub fn calibrate_item(item_id: &str, responses: &[&Response], thetas: &ThetaMap) -> Result<ItemCalibration> {
    let mut estimates = Vec::new();
    let mut missing = Vec::new();
    for category in LearnerCategory::ALL {
        let answers: Vec<bool> = responses
            .iter()
            .filter(|r| r.category == category)
            .map(|r| r.correct)
            .collect();
        if answers.is_empty() {
            missing.push(category);
            continue;
        }
        let correct = answers.iter().filter(|c| **c).count();
        let p = proportion(correct, answers.len());
        estimates.push(CategoryEstimate {
            category,
            n: answers.len(),
            correct,
            p,
            alpha: estimate_alpha(thetas.get(category), p)?.alpha,
        });
    }
    let mut out = ItemCalibration {
        item_id: item_id.to_string(),
        estimates,
        missing,
        pooled_alpha: None,
        raw_verdicts: None,
        verdicts: None,
        level: None,
    };
    if out.is_complete() {
        let p = |c| out.estimate(c).map(|e| e.p).expect("complete items have every category");
        out.raw_verdicts = Some(CategoryVerdicts::new(
            verdict_from_p(p(LearnerCategory::Expert)),
            verdict_from_p(p(LearnerCategory::Intermediate)),
            verdict_from_p(p(LearnerCategory::Beginner)),
        ));
        out.pooled_alpha = pooled_alpha(&out.estimates);
        if let Some(alpha) = out.pooled_alpha {
            let verdicts = banded_verdicts(alpha, thetas)?;
            out.verdicts = Some(verdicts);
            out.level = Some(assign_difficulty(verdicts));
        }
    }
    Ok(out)
}

/// Calibrates every item in the response set, ordered by item id.
pub fn calibrate(responses: &[Response], thetas: &ThetaMap) -> Result<Vec<ItemCalibration>> {
    band_floors(thetas)?;
    let mut by_item: BTreeMap<&str, Vec<&Response>> = BTreeMap::new();
    for r in responses {
        by_item.entry(&r.item_id).or_default().push(r);
    }
    by_item
        .into_iter()
        .map(|(id, rs)| calibrate_item(id, &rs, thetas))
        .collect()
}

/// Tab-separated per-item report.
pub fn write_calibration(mut out: impl Write, items: &[ItemCalibration]) -> Result<()> {
    let mut header = vec!["id".to_string(), "status".to_string()];
    for c in LearnerCategory::ALL {
        for field in ["n", "p", "alpha", "p_verdict"] {
            header.push(format!("{c}_{field}"));
        }
    }
    header.extend(["alpha", "expert", "intermediate", "beginner", "level"].map(String::from));
    writeln!(out, "{}", header.join("\t"))?;
    for item in items {
        let mut row = vec![
            item.item_id.clone(),
            if item.is_complete() { "complete" } else { "incomplete" }.to_string(),
        ];
        for c in LearnerCategory::ALL {
            match item.estimate(c) {
                Some(e) => {
                    row.push(e.n.to_string());
                    row.push(format!("{:.6}", e.p));
                    row.push(format!("{:.6}", e.alpha));
                    row.push(verdict_from_p(e.p).to_string());
                }
                None => row.extend(["-", "-", "-", "-"].map(String::from)),
            }
        }
        row.push(item.pooled_alpha.map_or("-".into(), |a| format!("{a:.6}")));
        match item.verdicts {
            Some(v) => row.extend(LearnerCategory::ALL.map(|c| v.get(c).to_string())),
            None => row.extend(["-", "-", "-"].map(String::from)),
        }
        row.push(item.level.map_or("incomplete".into(), |l| l.to_string()));
        writeln!(out, "{}", row.join("\t"))?;
    }
    Ok(())
}
