mod common;

use common::*;
use ontodiff_core::features::{Feature, FeatureVector};
use ontodiff_core::irt::{LearnerCategory, Verdict};
use ontodiff_core::model::{
    cross_validate, default_mask, gradient, loss, stratified_folds, train, train_with_history, Hyper, LogisticModel,
};
use ontodiff_core::records::LabeledDataset;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn design(d: &LabeledDataset) -> (Vec<Vec<f64>>, Vec<f64>) {
    let x = d.records.iter().map(|r| r.features.values().to_vec()).collect();
    let y = d.records.iter().map(|r| if r.label == Verdict::D { 1.0 } else { 0.0 }).collect();
    (x, y)
}

fn quick() -> Hyper {
    Hyper {
        epochs: 300,
        learning_rate: 0.5,
        ..Hyper::default()
    }
}

#[test]
fn gradient_matches_central_differences() {
    let d = planted_dataset(PLANTED_W, PLANTED_B, 200, 3);
    let (x, y) = design(&d);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let h = 1e-6;
    for _ in 0..20 {
        let w: Vec<f64> = (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let b = rng.gen_range(-2.0..2.0);
        let l2 = 0.01;
        let (gw, gb) = gradient(&x, &y, &w, b, l2);
        let mut numeric: Vec<f64> = (0..5)
            .map(|j| {
                let mut up = w.clone();
                let mut down = w.clone();
                up[j] += h;
                down[j] -= h;
                (loss(&x, &y, &up, b, l2) - loss(&x, &y, &down, b, l2)) / (2.0 * h)
            })
            .collect();
        numeric.push((loss(&x, &y, &w, b + h, l2) - loss(&x, &y, &w, b - h, l2)) / (2.0 * h));
        let analytic: Vec<f64> = gw.iter().copied().chain([gb]).collect();
        let diff: f64 = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-8);
        assert!(diff / scale < 1e-5, "relative error {}", diff / scale);
    }
}

#[test]
fn loss_is_monotone_at_a_small_step() {
    let d = planted_dataset(PLANTED_W, PLANTED_B, 400, 5);
    let (_, history) = train_with_history(&d, &Feature::ALL, Hyper { epochs: 500, ..Hyper::default() }).unwrap();
    assert_eq!(history.len(), 500);
    assert!(history[0] < 2f64.ln());
    for pair in history.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-15, "{} then {}", pair[0], pair[1]);
    }
}

#[test]
fn planted_rule_is_recovered() {
    let train_set = planted_dataset(PLANTED_W, PLANTED_B, 2000, 1);
    let held_out = planted_dataset(PLANTED_W, PLANTED_B, 2000, 2);
    let m = train(&train_set, &Feature::ALL, Hyper::default()).unwrap();
    let acc = accuracy(&m, &held_out);
    assert!(acc >= 98.0, "held-out accuracy {acc}");
    // The learned direction points the same way as the planted one.
    let w: Vec<f64> = m.weights().map(|(_, w)| w).collect();
    let cos = w.iter().zip(PLANTED_W).map(|(a, b)| a * b).sum::<f64>()
        / (w.iter().map(|a| a * a).sum::<f64>().sqrt() * PLANTED_W.iter().map(|a| a * a).sum::<f64>().sqrt());
    assert!(cos > 0.99, "cosine {cos}");
}

#[test]
fn cross_validation_is_deterministic_per_seed() {
    let d = planted_dataset(PLANTED_W, PLANTED_B, 300, 8);
    let a = cross_validate(&d, &Feature::ALL, quick(), 10).unwrap();
    let b = cross_validate(&d, &Feature::ALL, quick(), 10).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.total(), 300);
    let other = Hyper { seed: 7, ..quick() };
    assert_ne!(stratified_folds(&d, 10, 42), stratified_folds(&d, 10, other.seed));
}

#[test]
fn folds_are_stratified() {
    let d = planted_dataset(PLANTED_W, PLANTED_B, 503, 4);
    let folds = stratified_folds(&d, 10, 42);
    let (pos, neg) = d.class_counts();
    for f in 0..10 {
        let members: Vec<_> = d.records.iter().zip(&folds).filter(|(_, g)| **g == f).map(|(r, _)| r).collect();
        let p = members.iter().filter(|r| r.label == Verdict::D).count();
        assert!(members.len().abs_diff(503 / 10) <= 1);
        assert!(p.abs_diff(pos / 10) <= 1, "fold {f}: {p} of {pos}");
        assert!((members.len() - p).abs_diff(neg / 10) <= 1);
    }
}

#[test]
fn separable_data_scores_full_accuracy() {
    let rows = (0..200)
        .map(|i| {
            // A gap around 0.5 separates the classes.
            let x = if i < 100 { 0.4 * i as f64 / 99.0 } else { 0.6 + 0.4 * (i - 100) as f64 / 99.0 };
            let label = if x > 0.5 { Verdict::D } else { Verdict::Nd };
            ([x, 0.3, 0.6, 0.2, 0.9], label)
        })
        .collect();
    let d = labeled(LearnerCategory::Beginner, rows);
    let mask = [Feature::Popularity];
    let hyper = Hyper { learning_rate: 1.0, epochs: 3000, l2: 0.0, seed: 42 };
    let report = cross_validate(&d, &mask, hyper, 10).unwrap();
    assert_eq!(report.mean_accuracy, 100.0);
    assert_eq!((report.fp, report.fn_), (0, 0));
}

#[test]
fn independent_labels_score_near_the_majority_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let rows = (0..600)
        .map(|_| {
            let v: [f64; 5] = std::array::from_fn(|_| rng.gen::<f64>());
            (v, if rng.gen::<f64>() < 0.7 { Verdict::D } else { Verdict::Nd })
        })
        .collect();
    let d = labeled(LearnerCategory::Intermediate, rows);
    let majority = 100.0 * d.class_counts().0 as f64 / d.len() as f64;
    let report = cross_validate(&d, &Feature::ALL, quick(), 10).unwrap();
    assert!((report.mean_accuracy - majority).abs() < 6.0, "{} vs {majority}", report.mean_accuracy);
}

#[test]
fn prediction_is_a_sigmoid_of_the_masked_sum() {
    let mask = default_mask(LearnerCategory::Expert);
    let weights: Vec<(Feature, f64)> = mask.iter().zip([1.5, -2.0, 0.25, 3.0]).map(|(f, w)| (*f, w)).collect();
    let m = LogisticModel::new(LearnerCategory::Expert, &weights, -0.4, Hyper::default()).unwrap();
    let fv = FeatureVector::new([0.2, 0.4, 0.9, 0.1, 0.7]).unwrap();
    // Selectivity_Bg (0.9) is masked out for experts.
    let z: f64 = 1.5 * 0.2 - 2.0 * 0.4 + 0.25 * 0.1 + 3.0 * 0.7 - 0.4;
    let p = 1.0 / (1.0 + (-z).exp());
    let (got, verdict) = m.predict(&fv);
    assert!((got - p).abs() < 1e-15);
    assert_eq!(verdict, Verdict::D);
    assert_eq!(m.weight(Feature::SelectivityBg), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn training_ignores_record_order(seed in 0u64..500, perm in 0u64..500) {
        let d = planted_dataset(PLANTED_W, PLANTED_B, 120, seed);
        prop_assume!(d.has_both_classes());
        let mut records = d.records.clone();
        records.shuffle(&mut ChaCha8Rng::seed_from_u64(perm));
        let e = LabeledDataset::new(d.category, records).unwrap();
        let hyper = Hyper { epochs: 100, ..Hyper::default() };
        prop_assert_eq!(train(&d, &Feature::ALL, hyper).unwrap(), train(&e, &Feature::ALL, hyper).unwrap());
        prop_assume!(d.class_counts().0 >= 10 && d.class_counts().1 >= 10);
        prop_assert_eq!(
            cross_validate(&d, &Feature::ALL, hyper, 5).unwrap(),
            cross_validate(&e, &Feature::ALL, hyper, 5).unwrap()
        );
    }

    #[test]
    fn model_text_is_idempotent(seed in 0u64..500) {
        let d = planted_dataset(PLANTED_W, PLANTED_B, 60, seed);
        prop_assume!(d.has_both_classes());
        let m = train(&d, &default_mask(LearnerCategory::Beginner), Hyper { epochs: 50, ..Hyper::default() }).unwrap();
        let text = m.to_text();
        let back = LogisticModel::from_text(&text).unwrap();
        prop_assert_eq!(back.to_text(), text);
        for r in &d.records {
            let (p, v) = m.predict(&r.features);
            let (q, u) = back.predict(&r.features);
            prop_assert!((p - q).abs() < 1e-9);
            prop_assert!(v == u || (p - 0.5).abs() < 1e-9);
        }
    }
}
