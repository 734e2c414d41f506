//! Brute-force reference implementations and fixtures shared by the
//! integration tests. Everything here works from flat triple lists with
//! nested loops and never touches the store's indexes.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use ontodiff_core::features::FeatureVector;
use ontodiff_core::irt::{LearnerCategory, Verdict};
use ontodiff_core::ontology::{vocab, ConditionExpr, Iri, Literal, Ontology, SourceFormat, Term};
use ontodiff_core::question::Question;
use ontodiff_core::records::{LabeledDataset, LabeledRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn load(name: &str) -> Ontology {
    let path = fixture_path(name);
    let text = std::fs::read_to_string(&path).unwrap();
    Ontology::parse_str(&text, SourceFormat::from_path(&path)).unwrap()
}

pub fn movie_iri(local: &str) -> Iri {
    Iri::new(format!("http://example.org/movie#{local}")).unwrap()
}

pub fn dsa_iri(local: &str) -> Iri {
    Iri::new(format!("http://example.org/dsa#{local}")).unwrap()
}

pub fn concept(c: Iri) -> ConditionExpr {
    ConditionExpr::NamedConcept(c)
}

pub fn role_ind(role: Iri, individual: Iri) -> ConditionExpr {
    ConditionExpr::ExistsRoleIndividual { role, individual }
}

pub fn role_concept(role: Iri, concept: Iri) -> ConditionExpr {
    ConditionExpr::ExistsRoleConcept { role, concept }
}

pub fn question(id: &str, key: Iri, conditions: Vec<ConditionExpr>) -> Question {
    Question::new(id, key, conditions, "", "manual").unwrap()
}

/// Flat copy of an ontology's knowledge.
pub struct Raw {
    pub individuals: Vec<Iri>,
    pub types: Vec<(Iri, Iri)>,
    pub links: Vec<(Iri, Iri, Iri)>,
    pub data: Vec<(Iri, Iri, Literal)>,
    pub concept_edges: Vec<(Iri, Iri)>,
    pub role_edges: Vec<(Iri, Iri)>,
    pub domains: Vec<(Iri, Iri)>,
}

impl Raw {
    pub fn new(o: &Ontology) -> Self {
        let mut raw = Raw {
            individuals: o.individuals().iter().cloned().collect(),
            types: Vec::new(),
            links: Vec::new(),
            data: Vec::new(),
            concept_edges: o.sub_concept_edges().map(|(a, b)| (a.clone(), b.clone())).collect(),
            role_edges: o.sub_role_edges().map(|(a, b)| (a.clone(), b.clone())).collect(),
            domains: Vec::new(),
        };
        for t in o.abox() {
            match &t.object {
                Term::Iri(obj) if t.predicate.as_str() == vocab::RDF_TYPE => {
                    raw.types.push((t.subject.clone(), obj.clone()))
                }
                Term::Iri(obj) => raw.links.push((t.subject.clone(), t.predicate.clone(), obj.clone())),
                Term::Literal(l) => raw.data.push((t.subject.clone(), t.predicate.clone(), l.clone())),
            }
        }
        for r in o.object_roles().iter().chain(o.data_roles()) {
            if let Some(d) = o.domain(r) {
                raw.domains.push((r.clone(), d.clone()));
            }
        }
        raw
    }

    fn reaches(edges: &[(Iri, Iri)], from: &Iri, to: &Iri) -> bool {
        let mut seen = vec![from.clone()];
        let mut i = 0;
        while i < seen.len() {
            if &seen[i] == to {
                return true;
            }
            for (a, b) in edges {
                if *a == seen[i] && !seen.contains(b) {
                    seen.push(b.clone());
                }
            }
            i += 1;
        }
        false
    }

    /// Reflexive-transitive concept subsumption, with ⊤ above everything.
    pub fn sub_concept(&self, a: &Iri, b: &Iri) -> bool {
        b.as_str() == vocab::OWL_THING || Self::reaches(&self.concept_edges, a, b)
    }

    pub fn sub_role(&self, a: &Iri, b: &Iri) -> bool {
        Self::reaches(&self.role_edges, a, b)
    }

    pub fn instances(&self, c: &ConditionExpr) -> BTreeSet<Iri> {
        let mut out = BTreeSet::new();
        for i in &self.individuals {
            if self.satisfies(i, c) {
                out.insert(i.clone());
            }
        }
        out
    }

    pub fn satisfies(&self, i: &Iri, c: &ConditionExpr) -> bool {
        match c {
            ConditionExpr::NamedConcept(k) => {
                k.as_str() == vocab::OWL_THING || self.types.iter().any(|(s, t)| s == i && self.sub_concept(t, k))
            }
            ConditionExpr::ExistsRoleIndividual { role, individual } => self
                .links
                .iter()
                .any(|(s, r, o)| s == i && o == individual && self.sub_role(r, role)),
            ConditionExpr::ExistsRoleConcept { role, concept } => self.links.iter().any(|(s, r, o)| {
                s == i && self.sub_role(r, role) && self.satisfies(o, &ConditionExpr::NamedConcept(concept.clone()))
            }),
            ConditionExpr::ExistsDataValue { role, value } => self
                .data
                .iter()
                .any(|(s, r, v)| s == i && v == value && self.sub_role(r, role)),
        }
    }

    pub fn in_links(&self, i: &Iri) -> BTreeSet<(Iri, Iri)> {
        self.links
            .iter()
            .filter(|(_, _, o)| o == i)
            .map(|(s, r, _)| (r.clone(), s.clone()))
            .collect()
    }

    pub fn out_links(&self, i: &Iri) -> BTreeSet<(Iri, Iri)> {
        self.links
            .iter()
            .filter(|(s, _, _)| s == i)
            .map(|(_, r, o)| (r.clone(), o.clone()))
            .collect()
    }

    pub fn popularity(&self, i: &Iri) -> f64 {
        let n = self.links.iter().filter(|(_, _, o)| o == i).count();
        (n as f64 / self.individuals.len() as f64).min(1.0)
    }

    pub fn popularity_condition(&self, c: &ConditionExpr) -> f64 {
        let inst = self.instances(c);
        if inst.is_empty() {
            return 0.0;
        }
        inst.iter().map(|i| self.popularity(i)).sum::<f64>() / inst.len() as f64
    }

    pub fn raspace(&self, c: &ConditionExpr) -> f64 {
        let inst = self.instances(c);
        let den = match c.role() {
            None => self.individuals.len(),
            Some(r) => {
                let domain = self
                    .domains
                    .iter()
                    .find(|(x, _)| x == r)
                    .map(|(_, d)| d.clone())
                    .unwrap_or_else(|| Iri::new(vocab::OWL_THING).unwrap());
                let mut reference = self.instances(&ConditionExpr::NamedConcept(domain));
                reference.extend(inst.iter().cloned());
                reference.len()
            }
        };
        if den == 0 {
            0.0
        } else {
            inst.len() as f64 / den as f64
        }
    }

    fn neighbours(&self, i: &Iri) -> (BTreeSet<Iri>, BTreeSet<Iri>) {
        let ins = self.in_links(i).into_iter().map(|(_, s)| s).collect();
        let outs = self.out_links(i).into_iter().map(|(_, o)| o).collect();
        (ins, outs)
    }

    fn concept_neighbours(&self, c: &Iri) -> (BTreeSet<Iri>, BTreeSet<Iri>) {
        let mut ins = BTreeSet::new();
        let mut outs = BTreeSet::new();
        for i in self.instances(&ConditionExpr::NamedConcept(c.clone())) {
            let (a, b) = self.neighbours(&i);
            ins.extend(a);
            outs.extend(b);
        }
        (ins, outs)
    }

    pub fn coherence_pair(&self, p: &Iri, q: &Iri) -> f64 {
        pair(&self.neighbours(p), &self.neighbours(q))
    }

    pub fn coherence_question(&self, q: &Question) -> f64 {
        let mut hoods = Vec::new();
        let mut seen_concepts = BTreeSet::new();
        let mut seen_individuals = BTreeSet::new();
        for c in q.conditions() {
            match c {
                ConditionExpr::NamedConcept(k) | ConditionExpr::ExistsRoleConcept { concept: k, .. } => {
                    if seen_concepts.insert(k.clone()) {
                        hoods.push(self.concept_neighbours(k));
                    }
                }
                ConditionExpr::ExistsRoleIndividual { individual, .. } => {
                    if seen_individuals.insert(individual.clone()) {
                        hoods.push(self.neighbours(individual));
                    }
                }
                ConditionExpr::ExistsDataValue { .. } => {}
            }
        }
        if hoods.len() < 2 {
            return 0.0;
        }
        let mut total = 0.0;
        let mut count = 0;
        for i in 0..hoods.len() {
            for j in i + 1..hoods.len() {
                total += pair(&hoods[i], &hoods[j]);
                count += 1;
            }
        }
        total / count as f64
    }

    /// Concepts satisfied by `key`, or roles incident to it, closed upward.
    fn chain_pool(&self, key: &Iri, p: &Iri, is_role: bool) -> Vec<Iri> {
        let mut pool = BTreeSet::new();
        if is_role {
            let used: Vec<Iri> = self
                .links
                .iter()
                .filter(|(s, _, o)| s == key || o == key)
                .map(|(_, r, _)| r.clone())
                .chain(self.data.iter().filter(|(s, _, _)| s == key).map(|(_, r, _)| r.clone()))
                .collect();
            let all_roles: BTreeSet<Iri> = self
                .role_edges
                .iter()
                .flat_map(|(a, b)| [a.clone(), b.clone()])
                .chain(used.iter().cloned())
                .collect();
            for r in &used {
                for s in &all_roles {
                    if self.sub_role(r, s) {
                        pool.insert(s.clone());
                    }
                }
            }
        } else {
            let asserted: Vec<Iri> = self.types.iter().filter(|(s, _)| s == key).map(|(_, t)| t.clone()).collect();
            let all_concepts: BTreeSet<Iri> = self
                .concept_edges
                .iter()
                .flat_map(|(a, b)| [a.clone(), b.clone()])
                .chain(asserted.iter().cloned())
                .chain([p.clone()])
                .collect();
            for t in &asserted {
                for c in &all_concepts {
                    if self.sub_concept(t, c) {
                        pool.insert(c.clone());
                    }
                }
            }
        }
        pool.into_iter().collect()
    }

    /// Largest ⊑-chain through `p` by exhaustive subset enumeration.
    pub fn chain(&self, key: &Iri, p: &Iri, is_role: bool) -> Vec<Iri> {
        let pool = self.chain_pool(key, p, is_role);
        assert!(pool.contains(p), "predicate not applicable");
        let below = |a: &Iri, b: &Iri| {
            if is_role {
                self.sub_role(a, b)
            } else {
                self.sub_concept(a, b)
            }
        };
        let mut best: Vec<Iri> = Vec::new();
        for mask in 0u32..(1 << pool.len()) {
            let mut subset: Vec<Iri> = (0..pool.len()).filter(|i| mask & (1 << i) != 0).map(|i| pool[i].clone()).collect();
            if !subset.contains(p) {
                continue;
            }
            let total = subset
                .iter()
                .all(|a| subset.iter().all(|b| a == b || below(a, b) || below(b, a)));
            if !total {
                continue;
            }
            // Most specific first: fewer members above it come later.
            let snapshot = subset.clone();
            subset.sort_by_key(|a| std::cmp::Reverse(subset_count(&snapshot, a, &below)));
            if subset.len() > best.len() || (subset.len() == best.len() && subset < best) {
                best = subset;
            }
        }
        best
    }

    pub fn depth_ratio(&self, key: &Iri, p: &Iri, is_role: bool) -> f64 {
        let chain = self.chain(key, p, is_role);
        let from_top = chain.len() - chain.iter().position(|x| x == p).unwrap();
        from_top as f64 / chain.len() as f64
    }

    pub fn specificity(&self, q: &Question) -> f64 {
        let mut preds: Vec<(Iri, bool)> = Vec::new();
        for c in q.conditions() {
            let entry = match c {
                ConditionExpr::NamedConcept(k) => (k.clone(), false),
                other => (other.role().unwrap().clone(), true),
            };
            if !preds.contains(&entry) {
                preds.push(entry);
            }
        }
        let ratios: Vec<f64> = preds.iter().map(|(p, r)| self.depth_ratio(&q.key, p, *r)).collect();
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let max = ratios.iter().cloned().fold(0.0, f64::max);
        mean * max
    }

    pub fn overall_space(&self, q: &Question) -> f64 {
        q.conditions().iter().map(|c| self.raspace(c)).sum::<f64>() / q.conditions().len() as f64
    }
}

/// Number of chain members strictly above `a`.
fn subset_count(subset: &[Iri], a: &Iri, below: &impl Fn(&Iri, &Iri) -> bool) -> usize {
    subset.iter().filter(|b| *b != a && below(a, b)).count()
}

fn jaccard(a: &BTreeSet<Iri>, b: &BTreeSet<Iri>) -> f64 {
    let union: BTreeSet<&Iri> = a.iter().chain(b.iter()).collect();
    if union.is_empty() {
        return 0.0;
    }
    a.iter().filter(|x| b.contains(*x)).count() as f64 / union.len() as f64
}

fn pair(p: &(BTreeSet<Iri>, BTreeSet<Iri>), q: &(BTreeSet<Iri>, BTreeSet<Iri>)) -> f64 {
    jaccard(&p.0, &q.0) + jaccard(&p.1, &q.1)
}

/// Independent piecewise-linear interpolation through the expert curve's knots.
pub fn interpolate(knots: &[(f64, f64)], x: f64) -> f64 {
    for w in knots.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if x >= x0 && x <= x1 {
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    panic!("x outside the knots")
}

pub const EXPERT_KNOTS: [(f64, f64); 4] = [(0.0, 1.0), (0.1, 0.0), (0.5, 1.0), (1.0, 0.0)];

pub fn labeled(category: LearnerCategory, rows: Vec<([f64; 5], Verdict)>) -> LabeledDataset {
    let records = rows
        .into_iter()
        .enumerate()
        .map(|(n, (v, label))| LabeledRecord {
            id: format!("r{n:05}"),
            features: FeatureVector::new(v).unwrap(),
            label,
        })
        .collect();
    LabeledDataset::new(category, records).unwrap()
}

/// Uniform features; the label thresholds an equal-weight sum of every
/// feature except `ignored` at its median, so `ignored` carries no signal.
pub fn ignoring_dataset(category: LearnerCategory, ignored: usize, n: usize, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| {
            let v: [f64; 5] = std::array::from_fn(|_| rng.gen::<f64>());
            let s: f64 = (0..5).filter(|j| *j != ignored).map(|j| v[j]).sum();
            (v, if s > 2.0 { Verdict::D } else { Verdict::Nd })
        })
        .collect();
    labeled(category, rows)
}

/// Uniform features labeled by a fixed linear rule.
pub fn planted_dataset(w: [f64; 5], b: f64, n: usize, seed: u64) -> LabeledDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..n)
        .map(|_| {
            let v: [f64; 5] = std::array::from_fn(|_| rng.gen::<f64>());
            let z: f64 = w.iter().zip(&v).map(|(a, x)| a * x).sum::<f64>() + b;
            (v, if z > 0.0 { Verdict::D } else { Verdict::Nd })
        })
        .collect();
    labeled(LearnerCategory::Expert, rows)
}

/// Weights and bias of the planted linear rule; roughly balanced classes.
pub const PLANTED_W: [f64; 5] = [4.0, -3.0, 2.0, 1.0, -2.5];
pub const PLANTED_B: f64 = -0.75;

/// Percentage of records whose predicted verdict matches the label.
pub fn accuracy(model: &ontodiff_core::model::LogisticModel, d: &LabeledDataset) -> f64 {
    let hits = d.records.iter().filter(|r| model.predict(&r.features).1 == r.label).count();
    100.0 * hits as f64 / d.len() as f64
}

/// Simulated responses to one item from `n` learners per category.
pub fn simulate_item(
    item: &str,
    alpha: f64,
    n: usize,
    seed: u64,
    thetas: &ontodiff_core::irt::ThetaMap,
) -> Vec<ontodiff_core::calibration::Response> {
    use ontodiff_core::irt::{simulate_responses, TraitLevel};
    let mut out = Vec::new();
    for (k, category) in LearnerCategory::ALL.into_iter().enumerate() {
        let cohort = vec![TraitLevel::new(thetas.get(category), category).unwrap(); n];
        let answers = simulate_responses(&cohort, alpha, seed.wrapping_mul(31).wrapping_add(k as u64));
        out.extend(answers.into_iter().enumerate().map(|(i, correct)| ontodiff_core::calibration::Response {
            item_id: item.to_string(),
            learner_id: format!("{category}-{i}"),
            category,
            correct,
        }));
    }
    out
}
