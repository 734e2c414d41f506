//! Acceptance run: one line per criterion, non-zero exit if any fails.

mod common;

use std::collections::BTreeMap;
use std::fs::File;
use std::time::{Duration, Instant};

use common::*;
use ontodiff_core::calibration::calibrate;
use ontodiff_core::features::{
    answer_space_summary, coherence_question, condition_space, depth_ratio, feature_vector, popularity_condition,
    popularity_individual, question_predicates, selectivity_bg, selectivity_ex, specificity_question, Feature,
};
use ontodiff_core::irt::{
    assign_difficulty, estimate_alpha, p_correct, CategoryVerdicts, DifficultyLevel, LearnerCategory, ThetaMap, Verdict,
};
use ontodiff_core::model::{cross_validate, gradient, loss, train, Hyper};
use ontodiff_core::question::{builtin_patterns, generate_all};
use ontodiff_core::report::{agreement, read_levels, LevelTally};
use ontodiff_core::selection::least_influential;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Id, title, time limit and check.
type Criterion = (&'static str, &'static str, Option<Duration>, fn() -> Outcome);

fn check(cond: bool, detail: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(detail.into())
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let result = f();
    let elapsed = start.elapsed();
    match (result, limit) {
        (Ok(msg), Some(limit)) if elapsed > limit => Err(format!("{msg}; took {elapsed:?}, limit {limit:?}")),
        (Ok(msg), _) => Ok(format!("{msg} ({elapsed:.2?})")),
        (Err(e), _) => Err(format!("{e} ({elapsed:.2?})")),
    }
}

fn ac1() -> Outcome {
    let p = p_correct(-1.4, 1.3);
    check((p - 0.063).abs() <= 0.0005, format!("p = {p}"))?;
    Ok(format!("p_correct(-1.4, 1.3) = {p:.4}"))
}

fn ac2() -> Outcome {
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        for j in 0..100 {
            let theta = -1.5 + 3.0 * i as f64 / 99.0;
            let alpha = -1.5 + 3.0 * j as f64 / 99.0;
            let back = estimate_alpha(theta, p_correct(theta, alpha)).map_err(|e| e.to_string())?.alpha;
            worst = worst.max((back - alpha).abs());
        }
    }
    check(worst <= 1e-9, format!("max error {worst:e}"))?;
    Ok(format!("max |error| {worst:.1e} over 10000 points"))
}

fn ac3() -> Outcome {
    let thetas = ThetaMap::default();
    let planted = [
        ("item-high", 1.3, DifficultyLevel::High),
        ("item-low", -1.3, DifficultyLevel::Low),
        ("item-medium", 0.0, DifficultyLevel::Medium),
    ];
    let mut responses = Vec::new();
    for (k, (id, alpha, _)) in planted.iter().enumerate() {
        responses.extend(simulate_item(id, *alpha, 50_000, 2024 + k as u64, &thetas));
    }
    let items = calibrate(&responses, &thetas).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for (id, alpha, level) in planted {
        let item = items.iter().find(|i| i.item_id == id).ok_or(format!("{id} missing"))?;
        let got = item.pooled_alpha.ok_or(format!("{id} has no pooled estimate"))?;
        check((got - alpha).abs() <= 0.05, format!("{id}: alpha {got:.4} vs {alpha}"))?;
        check(item.level == Some(level), format!("{id}: level {:?}", item.level))?;
        parts.push(format!("{alpha:+.1}->{got:+.3} {level}"));
    }
    Ok(parts.join(", "))
}

fn ac4() -> Outcome {
    use Verdict::{Nd, D};
    let rows = [
        (CategoryVerdicts::new(D, D, D), DifficultyLevel::High),
        (CategoryVerdicts::new(Nd, D, D), DifficultyLevel::Medium),
        (CategoryVerdicts::new(Nd, Nd, D), DifficultyLevel::Low),
    ];
    let all = CategoryVerdicts::all();
    check(all.len() == 8, "expected 8 combinations")?;
    for v in all {
        let expected = rows.iter().find(|(r, _)| *r == v).map_or(DifficultyLevel::NonClassifiable, |(_, l)| *l);
        check(assign_difficulty(v) == expected, format!("{v:?} -> {}", assign_difficulty(v)))?;
    }
    Ok("3 table rows classified, 5 combinations non-classifiable".into())
}

fn ac5() -> Outcome {
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    let mut cmp = |a: f64, b: f64, what: &str| -> Result<(), String> {
        checked += 1;
        worst = worst.max((a - b).abs());
        check((a - b).abs() <= 1e-12, format!("{what}: {a} vs {b}"))
    };
    for name in ["movie.ttl", "dsa.ttl"] {
        let o = load(name);
        let raw = Raw::new(&o);
        for i in o.individuals() {
            cmp(popularity_individual(&o, i).map_err(|e| e.to_string())?, raw.popularity(i), "popularity")?;
        }
        let questions = generate_all(&o, &builtin_patterns(), 1000).map_err(|e| e.to_string())?;
        for q in &questions {
            let e = |e: ontodiff_core::Error| e.to_string();
            for c in q.conditions() {
                cmp(popularity_condition(&o, c).map_err(e)?.value, raw.popularity_condition(c), "condition popularity")?;
                let space = condition_space(&o, c).map_err(e)?;
                cmp(space.aspace as f64, raw.instances(c).len() as f64, "aspace")?;
                cmp(space.raspace, raw.raspace(c), "raspace")?;
            }
            cmp(answer_space_summary(&o, q).map_err(e)?.overall, raw.overall_space(q), "overall answer space")?;
            cmp(coherence_question(&o, q).map_err(e)?.value, raw.coherence_question(q), "coherence")?;
            for p in question_predicates(q) {
                let is_role = o.is_role(&p);
                cmp(depth_ratio(&o, &q.key, &p).map_err(e)?, raw.depth_ratio(&q.key, &p, is_role), "depth ratio")?;
            }
            cmp(specificity_question(&o, q).map_err(e)?, raw.specificity(q), "specificity")?;
            let v = feature_vector(&o, q).map_err(e)?;
            cmp(v.get(Feature::Coherence), raw.coherence_question(q) / 2.0, "stored coherence")?;
        }
    }
    Ok(format!("{checked} values, max |diff| {worst:.1e}"))
}

fn ac6() -> Outcome {
    let o = load("movie.ttl");
    let e = |e: ontodiff_core::Error| e.to_string();
    let starring = movie_iri("starring");
    let hollywood = concept(movie_iri("Hollywood_movie"));
    let q9 = question(
        "Qn-9",
        movie_iri("top_gun"),
        vec![
            hollywood.clone(),
            role_ind(starring.clone(), movie_iri("tom_cruise")),
            role_ind(starring.clone(), movie_iri("tim_robbins")),
        ],
    );
    let q8 = question(
        "Qn-8",
        movie_iri("mi_ghost_protocol"),
        vec![
            hollywood,
            role_ind(starring.clone(), movie_iri("tom_cruise")),
            role_ind(starring, movie_iri("anil_kapoor")),
        ],
    );
    let (c9, c8) = (coherence_question(&o, &q9).map_err(e)?.value, coherence_question(&o, &q8).map_err(e)?.value);
    check(c9 > c8, format!("coherence {c9} vs {c8}"))?;

    let clint = movie_iri("clint_eastwood");
    let key = movie_iri("unforgiven");
    let q2 = question(
        "Qn-2",
        key.clone(),
        vec![concept(movie_iri("Oscar_movie")), role_ind(movie_iri("directedBy"), clint.clone())],
    );
    let q10 = question("Qn-10", key, vec![concept(movie_iri("Movie")), role_ind(movie_iri("relatedTo"), clint)]);
    let (s2, s10) = (specificity_question(&o, &q2).map_err(e)?, specificity_question(&o, &q10).map_err(e)?);
    check(s2 > s10, format!("specificity {s2} vs {s10}"))?;

    let oscar = popularity_condition(&o, &concept(movie_iri("Oscar_movie"))).map_err(e)?.value;
    let thriller = popularity_condition(&o, &concept(movie_iri("Thriller_movie"))).map_err(e)?.value;
    check(oscar > thriller, format!("popularity {oscar} vs {thriller}"))?;
    Ok(format!(
        "coherence {c9:.3} > {c8:.3}, specificity {s2:.3} > {s10:.3}, popularity {oscar:.4} > {thriller:.4}"
    ))
}

fn ac7() -> Outcome {
    let e = |e: ontodiff_core::Error| e.to_string();
    for (x, y) in EXPERT_KNOTS {
        check(selectivity_ex(x).map_err(e)? == y, format!("selectivity_ex({x}) != {y}"))?;
    }
    for w in EXPERT_KNOTS.windows(2) {
        let mid = (w[0].0 + w[1].0) / 2.0;
        let expected = (w[0].1 + w[1].1) / 2.0;
        let got = selectivity_ex(mid).map_err(e)?;
        check((got - expected).abs() <= 1e-12, format!("selectivity_ex({mid}) = {got}"))?;
        check((got - interpolate(&EXPERT_KNOTS, mid)).abs() <= 1e-12, "interpolation mismatch")?;
    }
    for k in 0..=100 {
        let x = k as f64 / 100.0;
        check(selectivity_bg(x).map_err(e)? == x, format!("selectivity_bg({x})"))?;
    }
    Ok("4 knots exact, 3 midpoints linear, identity on 101 points".into())
}

fn ac8() -> Outcome {
    let d = planted_dataset(PLANTED_W, PLANTED_B, 400, 3);
    let x: Vec<Vec<f64>> = d.records.iter().map(|r| r.features.values().to_vec()).collect();
    let y: Vec<f64> = d.records.iter().map(|r| if r.label == Verdict::D { 1.0 } else { 0.0 }).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let w: Vec<f64> = (0..5).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let b: f64 = rng.gen_range(-2.0..2.0);
        let l2 = 1e-3;
        let (gw, gb) = gradient(&x, &y, &w, b, l2);
        let mut numeric = Vec::new();
        for j in 0..5 {
            let (mut up, mut down) = (w.clone(), w.clone());
            up[j] += h;
            down[j] -= h;
            numeric.push((loss(&x, &y, &up, b, l2) - loss(&x, &y, &down, b, l2)) / (2.0 * h));
        }
        numeric.push((loss(&x, &y, &w, b + h, l2) - loss(&x, &y, &w, b - h, l2)) / (2.0 * h));
        let analytic: Vec<f64> = gw.into_iter().chain([gb]).collect();
        let diff = analytic.iter().zip(&numeric).map(|(a, n)| (a - n).powi(2)).sum::<f64>().sqrt();
        let norm = analytic.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-12);
        worst = worst.max(diff / norm);
    }
    check(worst < 1e-5, format!("gradient relative error {worst:e}"))?;

    let e = |e: ontodiff_core::Error| e.to_string();
    let train_set = planted_dataset(PLANTED_W, PLANTED_B, 2000, 1);
    let held_out = planted_dataset(PLANTED_W, PLANTED_B, 2000, 2);
    let model = train(&train_set, &Feature::ALL, Hyper::default()).map_err(e)?;
    let acc = accuracy(&model, &held_out);
    check(acc >= 98.0, format!("held-out accuracy {acc:.2}%"))?;

    let cv_data = planted_dataset(PLANTED_W, PLANTED_B, 500, 4);
    let hyper = Hyper { epochs: 500, ..Hyper::default() };
    let a = cross_validate(&cv_data, &Feature::ALL, hyper, 10).map_err(e)?;
    let b = cross_validate(&cv_data, &Feature::ALL, hyper, 10).map_err(e)?;
    check(a == b, "10-fold CV differs between runs")?;
    Ok(format!(
        "gradient rel. error {worst:.1e}, held-out accuracy {acc:.2}%, 10-fold CV {:.2}% repeatable",
        a.mean_accuracy
    ))
}

fn ac9() -> Outcome {
    let designated = [
        (LearnerCategory::Expert, Feature::SelectivityBg),
        (LearnerCategory::Intermediate, Feature::SelectivityEx),
        (LearnerCategory::Beginner, Feature::SelectivityEx),
    ];
    let mut parts = Vec::new();
    for (k, (category, feature)) in designated.into_iter().enumerate() {
        let d = ignoring_dataset(category, feature.index(), 600, 900 + k as u64);
        let got = least_influential(&d).map_err(|e| e.to_string())?;
        check(got == Some(feature), format!("{category}: got {got:?}, expected {feature}"))?;
        parts.push(format!("{category}: {feature}"));
    }
    Ok(parts.join(", "))
}

fn ac10() -> Outcome {
    let gold = read_levels(File::open(fixture_path("appendix_a_gold.tsv")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    check(gold.len() == 24, format!("{} gold items", gold.len()))?;
    let predictions: Vec<(String, DifficultyLevel)> = gold
        .iter()
        .map(|(id, level)| {
            let predicted = match id.as_str() {
                "dsa_7" => DifficultyLevel::High,
                "dsa_8" => DifficultyLevel::Low,
                "dsa_20" => DifficultyLevel::NonClassifiable,
                _ => *level,
            };
            (id.clone(), predicted)
        })
        .collect();
    let summary = agreement(&predictions, &gold).map_err(|e| e.to_string())?;
    let text = summary.render();
    check(summary.matches == 21, format!("{} matches", summary.matches))?;
    check(text.contains("87.5%"), format!("report lacks 87.5%:\n{text}"))?;
    check(text.contains("non-classifiable: 1\n"), format!("report lacks the non-classifiable count:\n{text}"))?;
    Ok(text.lines().take(2).collect::<Vec<_>>().join("; "))
}

fn ac11() -> Outcome {
    let tally = LevelTally::from_levels(CategoryVerdicts::all().into_iter().map(assign_difficulty));
    let text = tally.render();
    let rows: BTreeMap<&str, &str> = text
        .lines()
        .filter_map(|l| {
            let mut cols = l.split_whitespace();
            Some((cols.next()?, cols.nth(1)?))
        })
        .collect();
    check(rows.get("classifiable") == Some(&"37.5%"), format!("classifiable row:\n{text}"))?;
    check(rows.get("non-classifiable") == Some(&"62.5%"), format!("non-classifiable row:\n{text}"))?;
    Ok(format!(
        "classifiable {}/8 = 37.5%, non-classifiable {}/8 = 62.5%",
        tally.classifiable(),
        tally.non_classifiable()
    ))
}

fn main() {
    let ms = Duration::from_millis;
    let criteria: Vec<Criterion> = vec![
        ("AC-1", "worked response probability", Some(ms(1)), ac1),
        ("AC-2", "difficulty estimate inverts the model", Some(ms(1000)), ac2),
        ("AC-3", "calibration round trip", Some(ms(10_000)), ac3),
        ("AC-4", "difficulty table totality", None, ac4),
        ("AC-5", "features match brute-force oracle", Some(ms(5000)), ac5),
        ("AC-6", "ordinal feature checks", None, ac6),
        ("AC-7", "selectivity curves", None, ac7),
        ("AC-8", "regression soundness", None, ac8),
        ("AC-9", "least influential feature recovered", Some(ms(5000)), ac9),
        ("AC-10", "agreement report arithmetic", None, ac10),
        ("AC-11", "non-classifiable accounting", None, ac11),
    ];
    let mut failed = 0;
    for (id, title, limit, f) in criteria {
        match timed(limit, f) {
            Ok(msg) => println!("[PASS] {id} {title}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] {id} {title}: {msg}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
