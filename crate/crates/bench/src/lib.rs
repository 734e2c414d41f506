//! Synthetic inputs for the pipeline benchmarks.

use std::fmt::Write as _;

use ontodiff_core::calibration::Response;
use ontodiff_core::irt::{simulate_responses, LearnerCategory, ThetaMap, TraitLevel};
use ontodiff_core::records::{LabeledDataset, LabeledRecord};
use ontodiff_core::{FeatureVector, Verdict};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const NS: &str = "http://bench.example.org/o#";

/// Turtle text with a concept tree, a small role hierarchy and random links.
///
/// Every individual gets one asserted type and roughly `links_per_individual`
/// object links plus one data value.
pub fn synthetic_turtle(individuals: usize, links_per_individual: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let concepts = (individuals / 8).clamp(4, 200);
    let mut out = String::new();
    let _ = writeln!(out, "@prefix : <{NS}> .");
    let _ = writeln!(out, "@prefix owl: <http://www.w3.org/2002/07/owl#> .");
    let _ = writeln!(out, "@prefix rdfs: <http://www.w3.org/2000/01/rdf-schema#> .\n");
    for c in 0..concepts {
        let _ = writeln!(out, ":C{c} a owl:Class .");
        if c > 0 {
            let _ = writeln!(out, ":C{c} rdfs:subClassOf :C{} .", (c - 1) / 3);
        }
    }
    let _ = writeln!(out, ":related a owl:ObjectProperty .");
    for r in 0..6 {
        let _ = writeln!(out, ":r{r} a owl:ObjectProperty ; rdfs:subPropertyOf :related ; rdfs:domain :C{} .", r % concepts);
    }
    let _ = writeln!(out, ":value a owl:DatatypeProperty .");
    for i in 0..individuals {
        let _ = writeln!(out, ":i{i} a :C{} ; :value \"v{}\" .", rng.gen_range(0..concepts), i % 17);
        for _ in 0..links_per_individual {
            let _ = writeln!(out, ":i{i} :r{} :i{} .", rng.gen_range(0..6), rng.gen_range(0..individuals));
        }
    }
    out
}

/// Uniform feature vectors labeled by a fixed linear rule that ignores
/// `Selectivity_Bg`.
pub fn synthetic_dataset(category: LearnerCategory, n: usize, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = [3.0, -2.0, 0.0, 1.5, 2.0];
    let records = (0..n)
        .map(|i| {
            let v: [f64; 5] = std::array::from_fn(|_| rng.gen::<f64>());
            let z: f64 = w.iter().zip(&v).map(|(a, x)| a * x).sum::<f64>() - 2.0;
            LabeledRecord {
                id: format!("r{i:05}"),
                features: FeatureVector::new(v).expect("unit interval"),
                label: if z > 0.0 { Verdict::D } else { Verdict::Nd },
            }
        })
        .collect();
    LabeledDataset::new(category, records).expect("both classes present")
}

/// Simulated answers to `items` items from `per_category` learners in each category.
pub fn synthetic_responses(items: usize, per_category: usize, seed: u64) -> Vec<Response> {
    let thetas = ThetaMap::default();
    let mut out = Vec::with_capacity(items * per_category * 3);
    for item in 0..items {
        let alpha = -3.0 + 6.0 * item as f64 / items.max(1) as f64;
        for (k, category) in LearnerCategory::ALL.into_iter().enumerate() {
            let cohort = vec![TraitLevel::new(thetas.get(category), category).expect("finite theta"); per_category];
            let answers = simulate_responses(&cohort, alpha, seed ^ (item * 3 + k) as u64);
            out.extend(answers.into_iter().enumerate().map(|(i, correct)| Response {
                item_id: format!("item{item:04}"),
                learner_id: format!("{category}-{i}"),
                category,
                correct,
            }));
        }
    }
    out
}
