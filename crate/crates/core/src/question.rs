//! Pattern-based question generation over the ABox.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use crate::ontology::{format_conditions, parse_conditions, ConditionExpr, Iri, Ontology};
use crate::{Error, Result};

/// What a pattern slot binds to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SlotKind {
    /// `?C`: a concept asserted for the key.
    ConceptAssertion,
    /// `∃R.{o}` with `R(key, o)` asserted.
    ObjectRoleIndividual,
    /// `∃R.C'` with `R(key, o)` and `C'(o)` asserted.
    ObjectRoleConcept,
    /// `∃R.{"lit"}` with a data-role assertion on the key.
    DataRoleLiteral,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionPattern {
    id: String,
    slots: Vec<SlotKind>,
    template: String,
}

impl QuestionPattern {
    pub fn new(id: impl Into<String>, slots: Vec<SlotKind>, template: impl Into<String>) -> Result<Self> {
        let concept_slots = slots.iter().filter(|s| **s == SlotKind::ConceptAssertion).count();
        if slots.is_empty() || slots.len() > 4 || concept_slots > 1 {
            return Err(Error::input(
                "a pattern needs 1 to 4 slots with at most one concept slot",
            ));
        }
        Ok(QuestionPattern {
            id: id.into(),
            slots,
            template: template.into(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn slots(&self) -> &[SlotKind] {
        &self.slots
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    fn count(&self, kind: SlotKind) -> usize {
        self.slots.iter().filter(|s| **s == kind).count()
    }
}

pub fn builtin_patterns() -> Vec<QuestionPattern> {
    use SlotKind::*;
    let specs: [(&str, Vec<SlotKind>, &str); 5] = [
        ("P1", vec![ConceptAssertion], "Name a/an [?C]."),
        (
            "P2",
            vec![ConceptAssertion, ObjectRoleIndividual],
            "Name the [?C] that [?R1] [?o1].",
        ),
        (
            "P3",
            vec![ConceptAssertion, ObjectRoleIndividual, ObjectRoleIndividual],
            "Name the [?C] that [?R1] [?o1] and [?R2] [?o2].",
        ),
        (
            "P4",
            vec![ConceptAssertion, ObjectRoleConcept],
            "Name the [?C] that [?R1] a/an [?o1].",
        ),
        (
            "P5",
            vec![ConceptAssertion, ObjectRoleIndividual, DataRoleLiteral],
            "Name the [?C] that [?R1] [?o1] and [?R2] [?o2].",
        ),
    ];
    specs
        .into_iter()
        .map(|(id, slots, template)| QuestionPattern::new(id, slots, template).expect("built-in patterns are valid"))
        .collect()
}

/// Looks up built-in patterns by id; an empty selection means all of them.
pub fn select_patterns(ids: &[String]) -> Result<Vec<QuestionPattern>> {
    let all = builtin_patterns();
    if ids.is_empty() {
        return Ok(all);
    }
    ids.iter()
        .map(|id| {
            all.iter()
                .find(|p| p.id.eq_ignore_ascii_case(id.trim()))
                .cloned()
                .ok_or_else(|| Error::input(format!("unknown pattern '{id}'")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Question {
    pub id: String,
    pub key: Iri,
    conditions: Vec<ConditionExpr>,
    pub stem: String,
    pub pattern_id: String,
}

impl Question {
    /// Builds a question; conditions are stored sorted and deduplicated.
    pub fn new(
        id: impl Into<String>,
        key: Iri,
        conditions: impl IntoIterator<Item = ConditionExpr>,
        stem: impl Into<String>,
        pattern_id: impl Into<String>,
    ) -> Result<Self> {
        let conditions: Vec<ConditionExpr> = conditions.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        if conditions.is_empty() {
            return Err(Error::input("a question needs at least one condition"));
        }
        Ok(Question {
            id: id.into(),
            key,
            conditions,
            stem: stem.into(),
            pattern_id: pattern_id.into(),
        })
    }

    /// Conditions in canonical order.
    pub fn conditions(&self) -> &[ConditionExpr] {
        &self.conditions
    }

    /// Checks that the key satisfies every condition.
    pub fn check(&self, o: &Ontology) -> Result<()> {
        for c in &self.conditions {
            if !o.instances_of(c)?.contains(&self.key) {
                return Err(Error::Invariant(format!(
                    "question {}: key <{}> does not satisfy {c}",
                    self.id, self.key
                )));
            }
        }
        Ok(())
    }
}

/// Individuals satisfying every condition of `q`.
pub fn answer_set(o: &Ontology, q: &Question) -> Result<BTreeSet<Iri>> {
    let mut conditions = q.conditions.iter();
    let first = conditions.next().expect("questions have at least one condition");
    let mut out = o.instances_of(first)?;
    for c in conditions {
        let next = o.instances_of(c)?;
        out.retain(|i| next.contains(i));
    }
    Ok(out)
}

/// Enumerates the pattern's bindings key by key (keys ascending, condition
/// sets in canonical order), drops condition sets already produced for an
/// earlier key, and keeps the first `limit` questions.
pub fn generate(o: &Ontology, p: &QuestionPattern, limit: usize) -> Result<Vec<Question>> {
    if limit == 0 {
        return Err(Error::input("limit must be at least 1"));
    }
    let mut seen: HashSet<Vec<ConditionExpr>> = HashSet::new();
    let mut found: Vec<(Iri, Vec<ConditionExpr>)> = Vec::new();
    for key in o.individuals() {
        if found.len() >= limit {
            break;
        }
        for conditions in bindings(o, p, key)? {
            if seen.insert(conditions.clone()) {
                found.push((key.clone(), conditions));
            }
        }
    }
    found.truncate(limit);
    found
        .into_iter()
        .enumerate()
        .map(|(n, (key, conditions))| {
            let stem = render_stem(o, p, &conditions);
            Question::new(format!("{}-{:04}", p.id, n + 1), key, conditions, stem, p.id.clone())
        })
        .collect()
}

/// Runs every pattern and concatenates the results.
pub fn generate_all(o: &Ontology, patterns: &[QuestionPattern], limit: usize) -> Result<Vec<Question>> {
    let mut out = Vec::new();
    for p in patterns {
        out.extend(generate(o, p, limit)?);
    }
    Ok(out)
}

/// Sorted condition sets the key can instantiate for `p`.
fn bindings(o: &Ontology, p: &QuestionPattern, key: &Iri) -> Result<BTreeSet<Vec<ConditionExpr>>> {
    let mut per_kind: Vec<(usize, Vec<ConditionExpr>)> = Vec::new();
    for kind in [
        SlotKind::ConceptAssertion,
        SlotKind::ObjectRoleIndividual,
        SlotKind::ObjectRoleConcept,
        SlotKind::DataRoleLiteral,
    ] {
        let n = p.count(kind);
        if n > 0 {
            per_kind.push((n, candidates(o, kind, key)?));
        }
    }
    let mut out = BTreeSet::new();
    let mut acc = Vec::new();
    product(&per_kind, 0, &mut acc, &mut out);
    Ok(out)
}

fn candidates(o: &Ontology, kind: SlotKind, key: &Iri) -> Result<Vec<ConditionExpr>> {
    let out: BTreeSet<ConditionExpr> = match kind {
        SlotKind::ConceptAssertion => o
            .asserted_types(key)
            .iter()
            .map(|c| ConditionExpr::NamedConcept(c.clone()))
            .collect(),
        SlotKind::ObjectRoleIndividual => o
            .out_links(key)?
            .iter()
            .map(|(role, target)| ConditionExpr::ExistsRoleIndividual {
                role: role.clone(),
                individual: target.clone(),
            })
            .collect(),
        SlotKind::ObjectRoleConcept => {
            let mut out = BTreeSet::new();
            for (role, target) in o.out_links(key)? {
                for concept in o.asserted_types(target) {
                    out.insert(ConditionExpr::ExistsRoleConcept {
                        role: role.clone(),
                        concept: concept.clone(),
                    });
                }
            }
            out
        }
        SlotKind::DataRoleLiteral => o
            .data_values(key)
            .iter()
            .map(|(role, value)| ConditionExpr::ExistsDataValue {
                role: role.clone(),
                value: value.clone(),
            })
            .collect(),
    };
    Ok(out.into_iter().collect())
}

/// Cartesian product over slot kinds of the size-n combinations within each kind.
fn product(
    per_kind: &[(usize, Vec<ConditionExpr>)],
    depth: usize,
    acc: &mut Vec<ConditionExpr>,
    out: &mut BTreeSet<Vec<ConditionExpr>>,
) {
    let Some((n, items)) = per_kind.get(depth) else {
        let mut set = acc.clone();
        set.sort();
        out.insert(set);
        return;
    };
    for combo in combinations(items, *n) {
        let len = acc.len();
        acc.extend(combo);
        product(per_kind, depth + 1, acc, out);
        acc.truncate(len);
    }
}

fn combinations(items: &[ConditionExpr], n: usize) -> Vec<Vec<ConditionExpr>> {
    fn go(items: &[ConditionExpr], n: usize, start: usize, cur: &mut Vec<ConditionExpr>, out: &mut Vec<Vec<ConditionExpr>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i].clone());
            go(items, n, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, n, 0, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Fills the pattern template: `[?C]` with the concept, and `[?Rk]`/`[?ok]`
/// with the k-th role restriction in canonical order.
pub fn render_stem(o: &Ontology, p: &QuestionPattern, conditions: &[ConditionExpr]) -> String {
    let mut text = p.template.clone();
    let mut k = 0;
    for c in conditions {
        match c {
            ConditionExpr::NamedConcept(concept) => {
                text = text.replace("[?C]", &concept_label(o, concept));
            }
            ConditionExpr::ExistsRoleIndividual { role, individual } => {
                k += 1;
                text = text.replace(&format!("[?R{k}]"), &concept_label(o, role));
                text = text.replace(&format!("[?o{k}]"), &individual_label(o, individual));
            }
            ConditionExpr::ExistsRoleConcept { role, concept } => {
                k += 1;
                text = text.replace(&format!("[?R{k}]"), &concept_label(o, role));
                text = text.replace(&format!("[?o{k}]"), &concept_label(o, concept));
            }
            ConditionExpr::ExistsDataValue { role, value } => {
                k += 1;
                text = text.replace(&format!("[?R{k}]"), &concept_label(o, role));
                text = text.replace(&format!("[?o{k}]"), value.lexical());
            }
        }
    }
    resolve_articles(&text)
}

/// `rdfs:label` if present, else the local name split into lowercase words.
pub fn concept_label(o: &Ontology, iri: &Iri) -> String {
    match o.label(iri) {
        Some(label) => label.lexical().to_string(),
        None => humanize(iri.local_name(), true),
    }
}

/// `rdfs:label` if present, else the local name with underscores as spaces.
pub fn individual_label(o: &Ontology, iri: &Iri) -> String {
    match o.label(iri) {
        Some(label) => label.lexical().to_string(),
        None => humanize(iri.local_name(), false),
    }
}

fn humanize(local: &str, split_case: bool) -> String {
    let mut out = String::with_capacity(local.len() + 4);
    let mut prev: Option<char> = None;
    for c in local.chars() {
        if c == '_' || c == '-' {
            out.push(' ');
        } else if split_case && c.is_uppercase() && prev.is_some_and(|p| p.is_lowercase() || p.is_ascii_digit()) {
            out.push(' ');
            out.extend(c.to_lowercase());
        } else if split_case && prev.is_none_or(|p| p == '_' || p == '-') && !is_acronym_start(local) {
            out.extend(c.to_lowercase());
        } else {
            out.push(c);
        }
        prev = Some(c);
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// `NP_complete` keeps its capitals; `Movie` becomes `movie`.
fn is_acronym_start(local: &str) -> bool {
    let mut chars = local.chars();
    matches!((chars.next(), chars.next()), (Some(a), Some(b)) if a.is_uppercase() && b.is_uppercase())
}

fn resolve_articles(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(pos) = rest.find("a/an ") {
        out.push_str(&rest[..pos]);
        let after = &rest[pos + 5..];
        let vowel = after
            .chars()
            .next()
            .is_some_and(|c| "aeiouAEIOU".contains(c));
        out.push_str(if vowel { "an " } else { "a " });
        rest = after;
    }
    out.push_str(rest);
    out
}

fn sanitize(stem: &str) -> String {
    stem.replace(['\t', '\n', '\r'], " ")
}

pub const QUESTION_HEADER: &str = "id\tkey\tpattern\tconditions\tstem";

/// Writes questions as tab-separated lines under a header row.
pub fn write_questions(mut out: impl Write, questions: &[Question]) -> Result<()> {
    writeln!(out, "{QUESTION_HEADER}")?;
    for q in questions {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            q.id,
            q.key,
            q.pattern_id,
            format_conditions(&q.conditions),
            sanitize(&q.stem)
        )?;
    }
    Ok(())
}

pub fn read_questions(input: impl BufRead) -> Result<Vec<Question>> {
    let mut out = Vec::new();
    for (n, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || (n == 0 && line == QUESTION_HEADER) {
            continue;
        }
        let fields: Vec<&str> = line.splitn(5, '\t').collect();
        let [id, key, pattern, conditions, stem] = fields[..] else {
            return Err(Error::input(format!("question line {}: expected 5 tab-separated fields", n + 1)));
        };
        let conditions = parse_conditions(conditions).map_err(|e| Error::input(format!("question line {}: {e}", n + 1)))?;
        out.push(Question::new(id, Iri::new(key)?, conditions, stem, pattern)?);
    }
    Ok(out)
}

impl fmt::Display for Question {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}] {}", self.id, self.pattern_id, self.stem)
    }
}
