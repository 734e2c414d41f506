//! Indexed ontology store.
//!
//! The store keeps declarations, the concept and role hierarchies, role
//! domains and ranges, and the ABox. Entailment is limited to transitive
//! closure of `rdfs:subClassOf` and `rdfs:subPropertyOf`: no equivalence,
//! inverse or domain/range typing.

mod build;
pub mod condition;
pub mod parse;
mod term;
pub mod vocab;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Read;
use std::str::FromStr;

pub use condition::{format_conditions, parse_conditions, ConditionExpr};
pub use term::{Iri, Literal, Term, Triple};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    NTriples,
    Turtle,
}

impl SourceFormat {
    /// Guesses the format from a file extension, defaulting to Turtle.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("nt") => SourceFormat::NTriples,
            _ => SourceFormat::Turtle,
        }
    }
}

impl FromStr for SourceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nt" | "ntriples" | "n-triples" => Ok(SourceFormat::NTriples),
            "ttl" | "turtle" | "turtle-subset" => Ok(SourceFormat::Turtle),
            other => Err(Error::input(format!("unknown ontology format '{other}'"))),
        }
    }
}

pub type Link = (Iri, Iri);

static NO_LINKS: BTreeSet<Link> = BTreeSet::new();
static NO_IRIS: BTreeSet<Iri> = BTreeSet::new();
static NO_VALUES: BTreeSet<(Iri, Literal)> = BTreeSet::new();

/// An immutable, fully indexed ontology.
#[derive(Debug, Clone, Default)]
pub struct Ontology {
    concepts: BTreeSet<Iri>,
    object_roles: BTreeSet<Iri>,
    data_roles: BTreeSet<Iri>,
    individuals: BTreeSet<Iri>,
    /// Direct `sub ⊑ super` edges.
    sub_concept_of: BTreeMap<Iri, BTreeSet<Iri>>,
    sub_role_of: BTreeMap<Iri, BTreeSet<Iri>>,
    role_domain: BTreeMap<Iri, Iri>,
    role_range: BTreeMap<Iri, Iri>,
    labels: BTreeMap<Iri, BTreeSet<Literal>>,
    abox: BTreeSet<Triple>,

    // Derived state, rebuilt from the fields above.
    concept_ancestors: BTreeMap<Iri, BTreeSet<Iri>>,
    concept_descendants: BTreeMap<Iri, BTreeSet<Iri>>,
    role_ancestors: BTreeMap<Iri, BTreeSet<Iri>>,
    role_descendants: BTreeMap<Iri, BTreeSet<Iri>>,
    types: BTreeMap<Iri, BTreeSet<Iri>>,
    members: BTreeMap<Iri, BTreeSet<Iri>>,
    out_index: BTreeMap<Iri, BTreeSet<Link>>,
    in_index: BTreeMap<Iri, BTreeSet<Link>>,
    data_index: BTreeMap<Iri, BTreeSet<(Iri, Literal)>>,

    warnings: Vec<String>,
}

/// Two ontologies are equal when their knowledge is equal; parse warnings
/// are not part of the comparison.
impl PartialEq for Ontology {
    fn eq(&self, other: &Self) -> bool {
        self.concepts == other.concepts
            && self.object_roles == other.object_roles
            && self.data_roles == other.data_roles
            && self.individuals == other.individuals
            && self.sub_concept_of == other.sub_concept_of
            && self.sub_role_of == other.sub_role_of
            && self.role_domain == other.role_domain
            && self.role_range == other.role_range
            && self.labels == other.labels
            && self.abox == other.abox
    }
}

impl Eq for Ontology {}

/// Parses an ontology from a byte stream.
pub fn parse_ontology(mut source: impl Read, format: SourceFormat) -> Result<Ontology> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| Error::Syntax {
            line: 1,
            column: 1,
            message: format!("input is not valid UTF-8 text: {e}"),
        })?;
    Ontology::parse_str(&text, format)
}

impl Ontology {
    pub fn parse_str(text: &str, format: SourceFormat) -> Result<Self> {
        let triples = match format {
            SourceFormat::NTriples => parse::parse_ntriples(text)?,
            SourceFormat::Turtle => parse::parse_turtle(text)?,
        };
        build::from_triples(triples)
    }

    pub fn concepts(&self) -> &BTreeSet<Iri> {
        &self.concepts
    }

    pub fn object_roles(&self) -> &BTreeSet<Iri> {
        &self.object_roles
    }

    pub fn data_roles(&self) -> &BTreeSet<Iri> {
        &self.data_roles
    }

    pub fn individuals(&self) -> &BTreeSet<Iri> {
        &self.individuals
    }

    /// Concept assertions (as `rdf:type` triples) and role assertions.
    pub fn abox(&self) -> &BTreeSet<Triple> {
        &self.abox
    }

    /// Direct `sub ⊑ super` concept edges.
    pub fn sub_concept_edges(&self) -> impl Iterator<Item = (&Iri, &Iri)> {
        self.sub_concept_of
            .iter()
            .flat_map(|(sub, sups)| sups.iter().map(move |sup| (sub, sup)))
    }

    /// Direct `sub ⊑ super` role edges.
    pub fn sub_role_edges(&self) -> impl Iterator<Item = (&Iri, &Iri)> {
        self.sub_role_of
            .iter()
            .flat_map(|(sub, sups)| sups.iter().map(move |sup| (sub, sup)))
    }

    pub fn domain(&self, role: &Iri) -> Option<&Iri> {
        self.role_domain.get(role)
    }

    pub fn range(&self, role: &Iri) -> Option<&Iri> {
        self.role_range.get(role)
    }

    /// Warnings about entities that were used without being declared.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn label(&self, iri: &Iri) -> Option<&Literal> {
        self.labels.get(iri).and_then(|l| l.iter().next())
    }

    pub fn is_concept(&self, iri: &Iri) -> bool {
        iri.is_thing() || self.concepts.contains(iri)
    }

    pub fn is_role(&self, iri: &Iri) -> bool {
        self.object_roles.contains(iri) || self.data_roles.contains(iri)
    }

    pub fn is_individual(&self, iri: &Iri) -> bool {
        self.individuals.contains(iri)
    }

    /// Strict super-concepts of `concept`.
    pub fn super_concepts(&self, concept: &Iri) -> &BTreeSet<Iri> {
        self.concept_ancestors.get(concept).unwrap_or(&NO_IRIS)
    }

    /// Strict sub-concepts of `concept`.
    pub fn sub_concepts(&self, concept: &Iri) -> &BTreeSet<Iri> {
        self.concept_descendants.get(concept).unwrap_or(&NO_IRIS)
    }

    pub fn super_roles(&self, role: &Iri) -> &BTreeSet<Iri> {
        self.role_ancestors.get(role).unwrap_or(&NO_IRIS)
    }

    pub fn sub_roles(&self, role: &Iri) -> &BTreeSet<Iri> {
        self.role_descendants.get(role).unwrap_or(&NO_IRIS)
    }

    /// Whether `sub ⊑ sup` holds in the concept or role hierarchy (reflexive).
    pub fn subsumed_by(&self, sub: &Iri, sup: &Iri) -> bool {
        sub == sup
            || sup.is_thing() && self.is_concept(sub)
            || self.super_concepts(sub).contains(sup)
            || self.super_roles(sub).contains(sup)
    }

    /// Concepts asserted for `individual`.
    pub fn asserted_types(&self, individual: &Iri) -> &BTreeSet<Iri> {
        self.types.get(individual).unwrap_or(&NO_IRIS)
    }

    /// Data-role values asserted for `individual`.
    pub fn data_values(&self, individual: &Iri) -> &BTreeSet<(Iri, Literal)> {
        self.data_index.get(individual).unwrap_or(&NO_VALUES)
    }

    fn require_individual(&self, iri: &Iri) -> Result<()> {
        if self.individuals.contains(iri) {
            Ok(())
        } else {
            Err(Error::UnknownEntity {
                kind: "individual",
                iri: iri.to_string(),
            })
        }
    }

    fn require_concept(&self, iri: &Iri) -> Result<()> {
        if self.is_concept(iri) {
            Ok(())
        } else {
            Err(Error::UnknownEntity {
                kind: "concept",
                iri: iri.to_string(),
            })
        }
    }

    fn require_role(&self, iri: &Iri, data: bool) -> Result<()> {
        let known = if data {
            self.data_roles.contains(iri)
        } else {
            self.object_roles.contains(iri)
        };
        if known {
            Ok(())
        } else {
            Err(Error::UnknownEntity {
                kind: if data { "data role" } else { "object role" },
                iri: iri.to_string(),
            })
        }
    }

    /// `(role, source)` pairs of object-role triples pointing at `individual`.
    pub fn in_links(&self, individual: &Iri) -> Result<&BTreeSet<Link>> {
        self.require_individual(individual)?;
        Ok(self.in_index.get(individual).unwrap_or(&NO_LINKS))
    }

    /// `(role, target)` pairs of object-role triples leaving `individual`.
    pub fn out_links(&self, individual: &Iri) -> Result<&BTreeSet<Link>> {
        self.require_individual(individual)?;
        Ok(self.out_index.get(individual).unwrap_or(&NO_LINKS))
    }

    fn role_and_subroles<'a>(&'a self, role: &'a Iri) -> impl Iterator<Item = &'a Iri> {
        std::iter::once(role).chain(self.sub_roles(role))
    }

    /// Individuals satisfying `condition` under the store's entailment regime.
    pub fn instances_of(&self, condition: &ConditionExpr) -> Result<BTreeSet<Iri>> {
        match condition {
            ConditionExpr::NamedConcept(concept) => self.concept_instances(concept),
            ConditionExpr::ExistsRoleIndividual { role, individual } => {
                self.require_role(role, false)?;
                self.require_individual(individual)?;
                let roles: BTreeSet<&Iri> = self.role_and_subroles(role).collect();
                Ok(self
                    .in_index
                    .get(individual)
                    .into_iter()
                    .flatten()
                    .filter(|(r, _)| roles.contains(r))
                    .map(|(_, source)| source.clone())
                    .collect())
            }
            ConditionExpr::ExistsRoleConcept { role, concept } => {
                self.require_role(role, false)?;
                let fillers = self.concept_instances(concept)?;
                let roles: BTreeSet<&Iri> = self.role_and_subroles(role).collect();
                let mut out = BTreeSet::new();
                for filler in &fillers {
                    for (r, source) in self.in_index.get(filler).into_iter().flatten() {
                        if roles.contains(r) {
                            out.insert(source.clone());
                        }
                    }
                }
                Ok(out)
            }
            ConditionExpr::ExistsDataValue { role, value } => {
                self.require_role(role, true)?;
                let roles: BTreeSet<&Iri> = self.role_and_subroles(role).collect();
                Ok(self
                    .data_index
                    .iter()
                    .filter(|(_, values)| values.iter().any(|(r, v)| v == value && roles.contains(r)))
                    .map(|(subject, _)| subject.clone())
                    .collect())
            }
        }
    }

    fn concept_instances(&self, concept: &Iri) -> Result<BTreeSet<Iri>> {
        self.require_concept(concept)?;
        if concept.is_thing() {
            return Ok(self.individuals.clone());
        }
        let mut out = BTreeSet::new();
        for c in std::iter::once(concept).chain(self.sub_concepts(concept)) {
            if let Some(members) = self.members.get(c) {
                out.extend(members.iter().cloned());
            }
        }
        Ok(out)
    }

    /// Concepts satisfied by `key`: its asserted types and their ancestors.
    pub fn satisfied_concepts(&self, key: &Iri) -> BTreeSet<Iri> {
        let mut out = BTreeSet::new();
        for t in self.asserted_types(key) {
            out.insert(t.clone());
            out.extend(self.super_concepts(t).iter().cloned());
        }
        out
    }

    /// Roles `R` with `R(key, x)` or `R(x, key)` entailed, including data
    /// roles with `key` as subject.
    pub fn incident_roles(&self, key: &Iri) -> BTreeSet<Iri> {
        let asserted = self
            .out_index
            .get(key)
            .into_iter()
            .flatten()
            .chain(self.in_index.get(key).into_iter().flatten())
            .map(|(r, _)| r)
            .chain(self.data_values(key).iter().map(|(r, _)| r));
        let mut out = BTreeSet::new();
        for r in asserted {
            out.insert(r.clone());
            out.extend(self.super_roles(r).iter().cloned());
        }
        out
    }

    /// The largest ⊑-chain through `predicate` among the concepts satisfied
    /// by `key` (or the roles incident to `key`), most specific first.
    ///
    /// Equally long chains are ordered lexicographically from the most
    /// specific element and the smallest is returned.
    pub fn concept_chain_through(&self, key: &Iri, predicate: &Iri) -> Result<Vec<Iri>> {
        self.require_individual(key)?;
        let pool = if self.is_concept(predicate) && !self.is_role(predicate) {
            let mut pool = self.satisfied_concepts(key);
            if predicate.is_thing() {
                pool.insert(predicate.clone());
            }
            pool
        } else if self.is_role(predicate) {
            self.incident_roles(key)
        } else {
            BTreeSet::new()
        };
        if !pool.contains(predicate) {
            return Err(Error::NotApplicable {
                key: key.to_string(),
                predicate: predicate.to_string(),
            });
        }
        let below: Vec<&Iri> = pool
            .iter()
            .filter(|x| *x != predicate && self.subsumed_by(x, predicate))
            .collect();
        let above: Vec<&Iri> = pool
            .iter()
            .filter(|x| *x != predicate && self.subsumed_by(predicate, x))
            .collect();
        let mut chain = best_chain(&below, |a, b| self.subsumed_by(a, b));
        chain.push(predicate.clone());
        chain.extend(best_chain(&above, |a, b| self.subsumed_by(a, b)));
        Ok(chain)
    }

    /// Canonical N-Triples: declarations, axioms, labels and the ABox,
    /// sorted by subject, predicate, object.
    pub fn to_ntriples(&self) -> String {
        let iri = |s: &str| Iri::new(s).expect("vocabulary IRIs are non-empty");
        let rdf_type = iri(vocab::RDF_TYPE);
        let mut all: BTreeSet<Triple> = self.abox.clone();
        let mut declare = |set: &BTreeSet<Iri>, kind: &str| {
            for x in set {
                all.insert(Triple::new(x.clone(), rdf_type.clone(), Term::Iri(iri(kind))));
            }
        };
        declare(&self.concepts, vocab::OWL_CLASS);
        declare(&self.object_roles, vocab::OWL_OBJECT_PROPERTY);
        declare(&self.data_roles, vocab::OWL_DATATYPE_PROPERTY);
        declare(&self.individuals, vocab::OWL_NAMED_INDIVIDUAL);
        let edges = [
            (&self.sub_concept_of, vocab::RDFS_SUB_CLASS_OF),
            (&self.sub_role_of, vocab::RDFS_SUB_PROPERTY_OF),
        ];
        for (map, predicate) in edges {
            for (sub, sups) in map {
                for sup in sups {
                    all.insert(Triple::new(sub.clone(), iri(predicate), Term::Iri(sup.clone())));
                }
            }
        }
        for (map, predicate) in [(&self.role_domain, vocab::RDFS_DOMAIN), (&self.role_range, vocab::RDFS_RANGE)] {
            for (role, concept) in map {
                all.insert(Triple::new(role.clone(), iri(predicate), Term::Iri(concept.clone())));
            }
        }
        for (subject, labels) in &self.labels {
            for label in labels {
                all.insert(Triple::new(subject.clone(), iri(vocab::RDFS_LABEL), Term::Literal(label.clone())));
            }
        }
        let mut out = String::new();
        for triple in &all {
            let _ = writeln!(out, "{triple}");
        }
        out
    }

    /// Recomputes the adjacency indexes from the ABox by a linear scan and
    /// compares them with the stored ones.
    pub fn check_indexes(&self) -> Result<()> {
        let mut out_index: BTreeMap<Iri, BTreeSet<Link>> = BTreeMap::new();
        let mut in_index: BTreeMap<Iri, BTreeSet<Link>> = BTreeMap::new();
        for t in &self.abox {
            if let Term::Iri(o) = &t.object {
                if self.object_roles.contains(&t.predicate) {
                    out_index
                        .entry(t.subject.clone())
                        .or_default()
                        .insert((t.predicate.clone(), o.clone()));
                    in_index
                        .entry(o.clone())
                        .or_default()
                        .insert((t.predicate.clone(), t.subject.clone()));
                }
            }
        }
        if out_index != self.out_index || in_index != self.in_index {
            return Err(Error::Invariant("adjacency indexes disagree with the ABox".into()));
        }
        Ok(())
    }
}

/// Longest chain in `items` under the strict order `below(a, b)` (a ⊏ b),
/// listed from the most specific element; ties go to the lexicographically
/// smallest sequence.
fn best_chain(items: &[&Iri], below: impl Fn(&Iri, &Iri) -> bool) -> Vec<Iri> {
    // memo[i] = best chain starting at items[i] and going up.
    let mut memo: Vec<Option<Vec<Iri>>> = vec![None; items.len()];
    fn solve(
        i: usize,
        items: &[&Iri],
        below: &dyn Fn(&Iri, &Iri) -> bool,
        memo: &mut Vec<Option<Vec<Iri>>>,
    ) -> Vec<Iri> {
        if let Some(found) = &memo[i] {
            return found.clone();
        }
        let mut best: Vec<Iri> = Vec::new();
        for j in 0..items.len() {
            if j != i && items[i] != items[j] && below(items[i], items[j]) {
                let candidate = solve(j, items, below, memo);
                if better(&candidate, &best) {
                    best = candidate;
                }
            }
        }
        let mut chain = vec![items[i].clone()];
        chain.extend(best);
        memo[i] = Some(chain.clone());
        chain
    }
    let mut best = Vec::new();
    for i in 0..items.len() {
        let candidate = solve(i, items, &below, &mut memo);
        if better(&candidate, &best) {
            best = candidate;
        }
    }
    best
}

fn better(candidate: &[Iri], incumbent: &[Iri]) -> bool {
    candidate.len() > incumbent.len() || candidate.len() == incumbent.len() && candidate < incumbent
}
