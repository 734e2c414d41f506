//! Per-category logistic regression trained by full-batch gradient descent.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::features::{Feature, FeatureVector};
use crate::irt::{logistic, LearnerCategory, Verdict};
use crate::records::{LabeledDataset, LabeledRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyper {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    pub seed: u64,
}

impl Default for Hyper {
    fn default() -> Self {
        Hyper {
            learning_rate: 0.1,
            epochs: 5000,
            l2: 1e-4,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub category: LearnerCategory,
    mask: Vec<Feature>,
    weights: Vec<f64>,
    pub bias: f64,
    pub hyper: Hyper,
    pub final_loss: f64,
}

/// Checks a feature mask and returns it in the fixed feature order.
pub fn normalize_mask(mask: &[Feature]) -> Result<Vec<Feature>> {
    let mut out = mask.to_vec();
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(Error::input("feature mask is empty"));
    }
    if out.len() != mask.len() {
        return Err(Error::input("feature mask lists a feature twice"));
    }
    Ok(out)
}

impl LogisticModel {
    pub fn new(
        category: LearnerCategory,
        weights: &[(Feature, f64)],
        bias: f64,
        hyper: Hyper,
    ) -> Result<Self> {
        let mask = normalize_mask(&weights.iter().map(|(f, _)| *f).collect::<Vec<_>>())?;
        let weights = mask
            .iter()
            .map(|f| weights.iter().find(|(g, _)| g == f).map(|(_, w)| *w).unwrap_or(0.0))
            .collect();
        Ok(LogisticModel {
            category,
            mask,
            weights,
            bias,
            hyper,
            final_loss: f64::NAN,
        })
    }

    pub fn mask(&self) -> &[Feature] {
        &self.mask
    }

    pub fn weight(&self, f: Feature) -> Option<f64> {
        self.mask.iter().position(|g| *g == f).map(|i| self.weights[i])
    }

    pub fn weights(&self) -> impl Iterator<Item = (Feature, f64)> + '_ {
        self.mask.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn probability(&self, fv: &FeatureVector) -> f64 {
        let x = project(&self.mask, fv);
        logistic(dot(&self.weights, &x) + self.bias)
    }

    /// Probability of `d` and the verdict; `d` iff the probability is at least 0.5.
    pub fn predict(&self, fv: &FeatureVector) -> (f64, Verdict) {
        let p = self.probability(fv);
        (p, if p >= 0.5 { Verdict::D } else { Verdict::Nd })
    }

    /// Plain `key=value` lines; numbers carry 12 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "category={}", self.category);
        let names: Vec<&str> = self.mask.iter().map(|f| f.name()).collect();
        let _ = writeln!(out, "mask={}", names.join(","));
        for (f, w) in self.weights() {
            let _ = writeln!(out, "weight.{}={}", f.name(), num(w));
        }
        let _ = writeln!(out, "bias={}", num(self.bias));
        let _ = writeln!(out, "learning_rate={}", num(self.hyper.learning_rate));
        let _ = writeln!(out, "epochs={}", self.hyper.epochs);
        let _ = writeln!(out, "l2={}", num(self.hyper.l2));
        let _ = writeln!(out, "seed={}", self.hyper.seed);
        let _ = writeln!(out, "final_loss={}", num(self.final_loss));
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::input(format!("model line {}: expected key=value", n + 1)))?;
            if fields.insert(k.trim(), v.trim()).is_some() {
                return Err(Error::input(format!("model line {}: duplicate key '{}'", n + 1, k.trim())));
            }
        }
        let get = |k: &str| {
            fields
                .get(k)
                .copied()
                .ok_or_else(|| Error::input(format!("model file lacks '{k}'")))
        };
        let float = |k: &str| -> Result<f64> {
            let v = get(k)?;
            v.parse().map_err(|_| Error::input(format!("model field {k}: invalid number '{v}'")))
        };
        let int = |k: &str| -> Result<u64> {
            let v = get(k)?;
            v.parse().map_err(|_| Error::input(format!("model field {k}: invalid integer '{v}'")))
        };
        let category: LearnerCategory = get("category")?.parse()?;
        let mask = get("mask")?
            .split(',')
            .map(str::parse)
            .collect::<Result<Vec<Feature>>>()?;
        let mask = normalize_mask(&mask)?;
        let weights = mask
            .iter()
            .map(|f| float(&format!("weight.{}", f.name())))
            .collect::<Result<Vec<_>>>()?;
        for k in fields.keys() {
            if let Some(name) = k.strip_prefix("weight.") {
                let f: Feature = name.parse()?;
                if !mask.contains(&f) {
                    return Err(Error::input(format!("weight for {f} which is not in the mask")));
                }
            }
        }
        Ok(LogisticModel {
            category,
            mask,
            weights,
            bias: float("bias")?,
            hyper: Hyper {
                learning_rate: float("learning_rate")?,
                epochs: int("epochs")? as usize,
                l2: float("l2")?,
                seed: int("seed")?,
            },
            final_loss: float("final_loss")?,
        })
    }
}

fn num(x: f64) -> String {
    format!("{x:.11e}")
}

fn project(mask: &[Feature], fv: &FeatureVector) -> Vec<f64> {
    mask.iter().map(|f| fv.get(*f)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// ln(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Mean negative log-likelihood plus `l2/2 · |w|²`; the bias is not penalized.
pub fn loss(x: &[Vec<f64>], y: &[f64], w: &[f64], b: f64, l2: f64) -> f64 {
    let n = x.len() as f64;
    let nll: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| {
            let z = dot(w, xi) + b;
            softplus(z) - yi * z
        })
        .sum::<f64>()
        / n;
    nll + 0.5 * l2 * dot(w, w)
}

/// Gradient of [`loss`] with respect to the weights and the bias.
pub fn gradient(x: &[Vec<f64>], y: &[f64], w: &[f64], b: f64, l2: f64) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut gw = vec![0.0; w.len()];
    let mut gb = 0.0;
    for (xi, yi) in x.iter().zip(y) {
        let r = logistic(dot(w, xi) + b) - yi;
        for (g, v) in gw.iter_mut().zip(xi) {
            *g += r * v;
        }
        gb += r;
    }
    for (g, wj) in gw.iter_mut().zip(w) {
        *g = *g / n + l2 * wj;
    }
    (gw, gb / n)
}

fn design(records: &[&LabeledRecord], mask: &[Feature]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let x = records.iter().map(|r| project(mask, &r.features)).collect();
    let y = records
        .iter()
        .map(|r| if r.label == Verdict::D { 1.0 } else { 0.0 })
        .collect();
    (x, y)
}

fn canonical_cmp(a: &LabeledRecord, b: &LabeledRecord) -> std::cmp::Ordering {
    let (va, vb) = (a.features.values(), b.features.values());
    va.iter()
        .zip(&vb)
        .map(|(p, q)| p.total_cmp(q))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
        .then_with(|| a.id.cmp(&b.id))
        .then(a.label.cmp(&b.label))
}

fn sorted(records: &[LabeledRecord]) -> Vec<&LabeledRecord> {
    let mut out: Vec<&LabeledRecord> = records.iter().collect();
    out.sort_by(|a, b| canonical_cmp(a, b));
    out
}

pub fn train(d: &LabeledDataset, mask: &[Feature], hyper: Hyper) -> Result<LogisticModel> {
    train_with_history(d, mask, hyper).map(|(m, _)| m)
}

/// Trains and also returns the loss after every epoch.
pub fn train_with_history(d: &LabeledDataset, mask: &[Feature], hyper: Hyper) -> Result<(LogisticModel, Vec<f64>)> {
    let mask = normalize_mask(mask)?;
    if !d.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let lr_ok = hyper.learning_rate.is_finite() && hyper.learning_rate > 0.0;
    if !lr_ok || hyper.l2.is_nan() || hyper.l2 < 0.0 {
        return Err(Error::input("learning rate must be positive and l2 non-negative"));
    }
    // Canonical record order makes the floating-point sums, and hence the
    // model, independent of input order.
    let records = sorted(&d.records);
    let (x, y) = design(&records, &mask);
    let mut w = vec![0.0; mask.len()];
    let mut b = 0.0;
    let mut history = Vec::with_capacity(hyper.epochs);
    for epoch in 0..hyper.epochs {
        let (gw, gb) = gradient(&x, &y, &w, b, hyper.l2);
        for (wj, g) in w.iter_mut().zip(&gw) {
            *wj -= hyper.learning_rate * g;
        }
        b -= hyper.learning_rate * gb;
        let l = loss(&x, &y, &w, b, hyper.l2);
        if !l.is_finite() {
            return Err(Error::NonFiniteLoss { epoch: epoch + 1 });
        }
        history.push(l);
    }
    let final_loss = history.last().copied().unwrap_or_else(|| loss(&x, &y, &w, b, hyper.l2));
    Ok((
        LogisticModel {
            category: d.category,
            mask,
            weights: w,
            bias: b,
            hyper,
            final_loss,
        },
        history,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    /// Per-fold accuracy in percent.
    pub fold_accuracies: Vec<f64>,
    /// Mean of the fold accuracies, in percent.
    pub mean_accuracy: f64,
    /// `d` is the positive class.
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl CvReport {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// Fold index of every record of `d`, stratified by label.
///
/// Each class is shuffled with the seed and dealt round-robin; the second
/// class continues where the first stopped so fold sizes stay balanced.
pub fn stratified_folds(d: &LabeledDataset, folds: usize, seed: u64) -> Vec<usize> {
    let records = &d.records;
    // Canonical order first, so assignment ignores input order.
    let mut order: Vec<usize> = (0..records.len()).collect();
    order.sort_by(|a, b| canonical_cmp(&records[*a], &records[*b]));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; records.len()];
    let mut offset = 0;
    for label in [Verdict::D, Verdict::Nd] {
        let mut members: Vec<usize> = order.iter().copied().filter(|i| records[*i].label == label).collect();
        members.shuffle(&mut rng);
        for (pos, i) in members.iter().enumerate() {
            assignment[*i] = (offset + pos) % folds;
        }
        offset = (offset + members.len()) % folds;
    }
    assignment
}

pub fn cross_validate(d: &LabeledDataset, mask: &[Feature], hyper: Hyper, folds: usize) -> Result<CvReport> {
    if folds < 2 {
        return Err(Error::input("cross-validation needs at least 2 folds"));
    }
    if d.len() < folds {
        return Err(Error::input(format!(
            "{} records cannot fill {folds} folds",
            d.len()
        )));
    }
    if !d.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let assignment = stratified_folds(d, folds, hyper.seed);
    let mut report = CvReport {
        fold_accuracies: Vec::with_capacity(folds),
        mean_accuracy: 0.0,
        tp: 0,
        fp: 0,
        tn: 0,
        fn_: 0,
    };
    for fold in 0..folds {
        let (test, train_set): (Vec<_>, Vec<_>) = d
            .records
            .iter()
            .zip(&assignment)
            .partition(|(_, f)| **f == fold);
        let train_set = LabeledDataset {
            category: d.category,
            records: train_set.into_iter().map(|(r, _)| r.clone()).collect(),
        };
        if !train_set.has_both_classes() {
            return Err(Error::input(format!("training set of fold {} lacks a class", fold + 1)));
        }
        let model = train(&train_set, mask, hyper)?;
        let mut correct = 0;
        for (r, _) in &test {
            let (_, predicted) = model.predict(&r.features);
            match (predicted, r.label) {
                (Verdict::D, Verdict::D) => report.tp += 1,
                (Verdict::D, Verdict::Nd) => report.fp += 1,
                (Verdict::Nd, Verdict::Nd) => report.tn += 1,
                (Verdict::Nd, Verdict::D) => report.fn_ += 1,
            }
            if predicted == r.label {
                correct += 1;
            }
        }
        report.fold_accuracies.push(100.0 * correct as f64 / test.len() as f64);
    }
    report.mean_accuracy = report.fold_accuracies.iter().sum::<f64>() / folds as f64;
    Ok(report)
}

/// All features except the least influential one for the category.
pub fn default_mask(category: LearnerCategory) -> Vec<Feature> {
    let dropped = match category {
        LearnerCategory::Expert => Feature::SelectivityBg,
        LearnerCategory::Intermediate | LearnerCategory::Beginner => Feature::SelectivityEx,
    };
    Feature::ALL.into_iter().filter(|f| *f != dropped).collect()
}

pub fn default_masks() -> BTreeMap<LearnerCategory, Vec<Feature>> {
    LearnerCategory::ALL.into_iter().map(|c| (c, default_mask(c))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, v: [f64; 5], label: Verdict) -> LabeledRecord {
        LabeledRecord {
            id: id.into(),
            features: FeatureVector::new(v).unwrap(),
            label,
        }
    }

    fn toy() -> LabeledDataset {
        let mut records = Vec::new();
        for i in 0..20 {
            let x = i as f64 / 19.0;
            let label = if x > 0.5 { Verdict::D } else { Verdict::Nd };
            records.push(record(&format!("q{i}"), [x, 0.5, 0.5, 1.0 - x, 0.5], label));
        }
        LabeledDataset::new(LearnerCategory::Expert, records).unwrap()
    }

    #[test]
    fn zero_epochs_gives_half() {
        let hyper = Hyper {
            epochs: 0,
            ..Hyper::default()
        };
        let m = train(&toy(), &Feature::ALL, hyper).unwrap();
        assert!(m.weights().all(|(_, w)| w == 0.0));
        assert_eq!(m.predict(&toy().records[0].features), (0.5, Verdict::D));
        assert!((m.final_loss - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn separable_toy_is_learned() {
        let d = toy();
        let m = train(&d, &[Feature::Popularity, Feature::Coherence], Hyper::default()).unwrap();
        for r in &d.records {
            assert_eq!(m.predict(&r.features).1, r.label, "{}", r.id);
        }
    }

    #[test]
    fn divergence_is_reported() {
        let hyper = Hyper {
            learning_rate: 1e300,
            epochs: 50,
            ..Hyper::default()
        };
        assert!(matches!(
            train(&toy(), &Feature::ALL, hyper),
            Err(Error::NonFiniteLoss { .. })
        ));
    }

    #[test]
    fn text_round_trip_is_stable() {
        let m = train(&toy(), &default_mask(LearnerCategory::Beginner), Hyper { epochs: 300, ..Hyper::default() }).unwrap();
        let text = m.to_text();
        let back = LogisticModel::from_text(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.mask(), m.mask());
        assert!(text.contains("category=expert\nmask=Popularity,Selectivity_Bg,Coherence,Specificity\n"));
        assert!(LogisticModel::from_text(&text.replace("bias", "bais")).is_err());
    }

    #[test]
    fn masks() {
        let masks = default_masks();
        assert!(!masks[&LearnerCategory::Expert].contains(&Feature::SelectivityBg));
        assert!(!masks[&LearnerCategory::Intermediate].contains(&Feature::SelectivityEx));
        assert!(masks.values().all(|m| m.len() == 4));
        assert!(normalize_mask(&[]).is_err());
        assert!(normalize_mask(&[Feature::Coherence, Feature::Coherence]).is_err());
    }

    #[test]
    fn folds_are_balanced() {
        let d = toy();
        let a = stratified_folds(&d, 10, 1);
        for fold in 0..10 {
            assert_eq!(a.iter().filter(|f| **f == fold).count(), 2);
        }
        let report = cross_validate(&d, &Feature::ALL, Hyper { epochs: 200, ..Hyper::default() }, 10).unwrap();
        assert_eq!(report.total(), 20);
        assert_eq!(report.fold_accuracies.len(), 10);
    }
}
