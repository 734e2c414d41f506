//! Filter-based feature ranking: information gain, ReliefF and
//! point-biserial correlation.

use std::cmp::Ordering;
use std::fmt;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::features::Feature;
use crate::irt::Verdict;
use crate::records::{LabeledDataset, LabeledRecord};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    InfoGain,
    ReliefF,
    Correlation,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::InfoGain, Method::ReliefF, Method::Correlation];

    pub fn name(self) -> &'static str {
        match self {
            Method::InfoGain => "info-gain",
            Method::ReliefF => "relieff",
            Method::Correlation => "correlation",
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Method::InfoGain => "IG",
            Method::ReliefF => "RF",
            Method::Correlation => "CB",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRanking {
    pub method: Method,
    scores: [f64; 5],
    order: Vec<Feature>,
    /// Features whose score defaulted to 0 (zero variance).
    pub flagged: Vec<Feature>,
}

impl FeatureRanking {
    fn new(method: Method, scores: [f64; 5], flagged: Vec<Feature>) -> Self {
        let mut order = Feature::ALL.to_vec();
        // Descending score; the fixed feature order breaks ties.
        order.sort_by(|a, b| {
            scores[b.index()]
                .total_cmp(&scores[a.index()])
                .then(a.cmp(b))
        });
        FeatureRanking {
            method,
            scores,
            order,
            flagged,
        }
    }

    pub fn score(&self, f: Feature) -> f64 {
        self.scores[f.index()]
    }

    /// Features by descending score.
    pub fn order(&self) -> &[Feature] {
        &self.order
    }

    pub fn last(&self) -> Feature {
        *self.order.last().expect("rankings cover all five features")
    }
}

/// Records sorted by features then id, so results do not depend on input order.
fn canonical(d: &LabeledDataset) -> Vec<&LabeledRecord> {
    let mut out: Vec<&LabeledRecord> = d.records.iter().collect();
    out.sort_by(|a, b| cmp_values(&a.features.values(), &b.features.values()).then_with(|| a.id.cmp(&b.id)));
    out
}

fn cmp_values(a: &[f64; 5], b: &[f64; 5]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

fn require_records(d: &LabeledDataset, at_least: usize) -> Result<()> {
    if d.len() < at_least {
        return Err(Error::input(format!(
            "feature ranking needs at least {at_least} records, found {}",
            d.len()
        )));
    }
    Ok(())
}

/// Equal-width discretization used by information gain.
#[derive(Debug, Clone, PartialEq)]
pub struct Binning {
    pub bins: usize,
    /// Per-feature `(lo, hi)` range.
    pub ranges: [(f64, f64); 5],
}

impl Default for Binning {
    fn default() -> Self {
        Binning {
            bins: 10,
            ranges: [(0.0, 1.0); 5],
        }
    }
}

impl Binning {
    pub fn bin(&self, f: Feature, x: f64) -> usize {
        let (lo, hi) = self.ranges[f.index()];
        if hi <= lo {
            return 0;
        }
        let b = ((x - lo) / (hi - lo) * self.bins as f64).floor();
        if b <= 0.0 {
            0
        } else {
            (b as usize).min(self.bins - 1)
        }
    }
}

fn entropy(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|c| **c > 0)
        .map(|c| {
            let p = *c as f64 / n as f64;
            -p * p.log2()
        })
        .sum()
}

fn label_index(v: Verdict) -> usize {
    match v {
        Verdict::D => 0,
        Verdict::Nd => 1,
    }
}

pub fn info_gain(d: &LabeledDataset) -> Result<FeatureRanking> {
    info_gain_with(d, &Binning::default())
}

/// H(label) − H(label | binned feature), in bits.
pub fn info_gain_with(d: &LabeledDataset, binning: &Binning) -> Result<FeatureRanking> {
    require_records(d, 2)?;
    if binning.bins == 0 {
        return Err(Error::input("binning needs at least one bin"));
    }
    let mut class = [0usize; 2];
    for r in &d.records {
        class[label_index(r.label)] += 1;
    }
    let h = entropy(&class);
    let n = d.len() as f64;
    let mut scores = [0.0; 5];
    if h > 0.0 {
        for f in Feature::ALL {
            let mut table = vec![[0usize; 2]; binning.bins];
            for r in &d.records {
                table[binning.bin(f, r.features.get(f))][label_index(r.label)] += 1;
            }
            let conditional: f64 = table
                .iter()
                .map(|row| (row[0] + row[1]) as f64 / n * entropy(row))
                .sum();
            scores[f.index()] = (h - conditional).max(0.0);
        }
    }
    Ok(FeatureRanking::new(Method::InfoGain, scores, Vec::new()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReliefParams {
    pub k: usize,
    /// Sampled records; `None` uses every record.
    pub m: Option<usize>,
    pub seed: u64,
}

impl Default for ReliefParams {
    fn default() -> Self {
        ReliefParams {
            k: 10,
            m: None,
            seed: 42,
        }
    }
}

fn manhattan(a: &[f64; 5], b: &[f64; 5]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// ReliefF weights with Manhattan distance and `diff = |a − b|`.
///
/// Neighbours are ordered by distance, then feature values, then id. When
/// a class has fewer than `k` other members the available ones are averaged.
pub fn relieff(d: &LabeledDataset, params: ReliefParams) -> Result<FeatureRanking> {
    require_records(d, 2)?;
    if params.k == 0 {
        return Err(Error::input("ReliefF needs k >= 1"));
    }
    let (nd_d, nd_nd) = d.class_counts();
    if nd_d == 0 || nd_nd == 0 {
        return Err(Error::SingleClass);
    }
    for (label, size) in [(Verdict::D, nd_d), (Verdict::Nd, nd_nd)] {
        if size < params.k {
            return Err(Error::ClassTooSmall {
                label: label.to_string(),
                size,
                k: params.k,
            });
        }
    }
    let records = canonical(d);
    let values: Vec<[f64; 5]> = records.iter().map(|r| r.features.values()).collect();
    let samples: Vec<usize> = match params.m {
        Some(m) if m < records.len() => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            let mut picked = sample(&mut rng, records.len(), m).into_vec();
            picked.sort_unstable();
            picked
        }
        _ => (0..records.len()).collect(),
    };
    let m = samples.len() as f64;
    let mut weights = [0.0; 5];
    for &i in &samples {
        let mut hits = Vec::new();
        let mut misses = Vec::new();
        for j in 0..records.len() {
            if j == i {
                continue;
            }
            let dist = manhattan(&values[i], &values[j]);
            if records[j].label == records[i].label {
                hits.push((dist, j));
            } else {
                misses.push((dist, j));
            }
        }
        let order = |a: &(f64, usize), b: &(f64, usize)| {
            a.0.total_cmp(&b.0)
                .then_with(|| cmp_values(&values[a.1], &values[b.1]))
                .then_with(|| records[a.1].id.cmp(&records[b.1].id))
                .then(a.1.cmp(&b.1))
        };
        hits.sort_by(order);
        misses.sort_by(order);
        hits.truncate(params.k);
        misses.truncate(params.k);
        for f in Feature::ALL {
            let fi = f.index();
            let mean_diff = |ns: &[(f64, usize)]| {
                if ns.is_empty() {
                    0.0
                } else {
                    ns.iter().map(|(_, j)| (values[i][fi] - values[*j][fi]).abs()).sum::<f64>() / ns.len() as f64
                }
            };
            weights[fi] += (mean_diff(&misses) - mean_diff(&hits)) / m;
        }
    }
    Ok(FeatureRanking::new(Method::ReliefF, weights, Vec::new()))
}

/// Absolute point-biserial correlation of each feature with the `d` indicator.
pub fn correlation_score(d: &LabeledDataset) -> Result<FeatureRanking> {
    require_records(d, 2)?;
    let records = canonical(d);
    let n = records.len() as f64;
    let y: Vec<f64> = records
        .iter()
        .map(|r| if r.label == Verdict::D { 1.0 } else { 0.0 })
        .collect();
    let y_mean = y.iter().sum::<f64>() / n;
    let y_var = y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / n;
    let mut scores = [0.0; 5];
    let mut flagged = Vec::new();
    for f in Feature::ALL {
        let x: Vec<f64> = records.iter().map(|r| r.features.get(f)).collect();
        let x_mean = x.iter().sum::<f64>() / n;
        let x_var = x.iter().map(|v| (v - x_mean).powi(2)).sum::<f64>() / n;
        if x_var <= f64::EPSILON * f64::EPSILON || y_var == 0.0 {
            flagged.push(f);
            continue;
        }
        let cov = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (a - x_mean) * (b - y_mean))
            .sum::<f64>()
            / n;
        scores[f.index()] = (cov / (x_var.sqrt() * y_var.sqrt())).abs().min(1.0);
    }
    Ok(FeatureRanking::new(Method::Correlation, scores, flagged))
}

/// Rankings by all three methods, with ReliefF's k capped at the smaller
/// class size.
pub fn rank_all(d: &LabeledDataset) -> Result<Vec<FeatureRanking>> {
    let (a, b) = d.class_counts();
    let k = a.min(b).clamp(1, 10);
    Ok(vec![
        info_gain(d)?,
        relieff(
            d,
            ReliefParams {
                k,
                ..ReliefParams::default()
            },
        )?,
        correlation_score(d)?,
    ])
}

/// The feature ranked last by at least two of the three methods.
pub fn least_influential(d: &LabeledDataset) -> Result<Option<Feature>> {
    if !d.has_both_classes() || d.len() < 2 {
        return Ok(None);
    }
    Ok(majority_last(&rank_all(d)?))
}

pub fn majority_last(rankings: &[FeatureRanking]) -> Option<Feature> {
    Feature::ALL
        .into_iter()
        .find(|f| rankings.iter().filter(|r| r.last() == *f).count() >= 2)
}
