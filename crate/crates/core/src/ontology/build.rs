use std::collections::{BTreeMap, BTreeSet};

use super::parse::Located;
use super::{vocab, Iri, Literal, Ontology, Term};
use crate::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq)]
enum RoleKind {
    Object,
    Data,
}

struct Builder {
    onto: Ontology,
    annotation_roles: BTreeSet<Iri>,
    untyped_roles: BTreeSet<Iri>,
    warned: BTreeSet<String>,
}

pub(super) fn from_triples(triples: Vec<Located>) -> Result<Ontology> {
    let mut b = Builder {
        onto: Ontology::default(),
        annotation_roles: BTreeSet::new(),
        untyped_roles: BTreeSet::new(),
        warned: BTreeSet::new(),
    };

    // Pass 1: explicit declarations.
    for l in &triples {
        b.declaration(l)?;
    }
    // Pass 2: hierarchies, domains, ranges, labels.
    let mut rest = Vec::new();
    for l in triples {
        if !b.schema(&l)? {
            rest.push(l);
        }
    }
    // A class assertion against a concept known from the schema declares its subject.
    for l in &rest {
        let t = &l.triple;
        if t.predicate.as_str() == vocab::RDF_TYPE {
            if let Term::Iri(class) = &t.object {
                if b.onto.concepts.contains(class) && !b.onto.concepts.contains(&t.subject) {
                    b.onto.individuals.insert(t.subject.clone());
                }
            }
        }
    }
    // Roles seen only in subPropertyOf take their kind from usage below,
    // defaulting to object roles.
    for l in &rest {
        let p = &l.triple.predicate;
        if b.untyped_roles.contains(p) && b.role_kind(p).is_none() {
            let kind = match l.triple.object {
                Term::Literal(_) => RoleKind::Data,
                Term::Iri(_) => RoleKind::Object,
            };
            b.declare_role(p, kind, l.line)?;
        }
    }
    b.settle_untyped_roles()?;
    // Pass 3: assertions.
    for l in rest {
        b.assertion(l)?;
    }
    b.finish()
}

impl Builder {
    fn warn(&mut self, kind: &str, iri: &Iri) {
        let message = format!("undeclared {kind} <{iri}> added");
        if self.warned.insert(message.clone()) {
            self.onto.warnings.push(message);
        }
    }

    fn role_kind(&self, role: &Iri) -> Option<RoleKind> {
        if self.onto.object_roles.contains(role) {
            Some(RoleKind::Object)
        } else if self.onto.data_roles.contains(role) {
            Some(RoleKind::Data)
        } else {
            None
        }
    }

    fn declare_role(&mut self, role: &Iri, kind: RoleKind, line: usize) -> Result<()> {
        match (self.role_kind(role), kind) {
            (Some(existing), kind) if existing != kind => Err(Error::InvalidTriple {
                line,
                message: format!("<{role}> is declared both as an object and a data role"),
            }),
            (Some(_), _) => Ok(()),
            (None, RoleKind::Object) => {
                self.onto.object_roles.insert(role.clone());
                Ok(())
            }
            (None, RoleKind::Data) => {
                self.onto.data_roles.insert(role.clone());
                Ok(())
            }
        }
    }

    /// Gives hierarchy-only roles the kind of a typed neighbour, else object.
    fn settle_untyped_roles(&mut self) -> Result<()> {
        loop {
            let mut changed = false;
            let edges: Vec<(Iri, Iri)> = self
                .onto
                .sub_role_of
                .iter()
                .flat_map(|(a, bs)| bs.iter().map(move |b| (a.clone(), b.clone())))
                .collect();
            for (a, b) in edges {
                match (self.role_kind(&a), self.role_kind(&b)) {
                    (Some(k), None) => {
                        self.declare_role(&b, k, 0)?;
                        changed = true;
                    }
                    (None, Some(k)) => {
                        self.declare_role(&a, k, 0)?;
                        changed = true;
                    }
                    (Some(x), Some(y)) if x != y => {
                        return Err(Error::InvalidTriple {
                            line: 0,
                            message: format!("subPropertyOf between object role and data role (<{a}>, <{b}>)"),
                        })
                    }
                    _ => {}
                }
            }
            if !changed {
                break;
            }
        }
        for role in std::mem::take(&mut self.untyped_roles) {
            if self.role_kind(&role).is_none() {
                self.declare_role(&role, RoleKind::Object, 0)?;
            }
        }
        Ok(())
    }

    fn declaration(&mut self, l: &Located) -> Result<()> {
        let t = &l.triple;
        if t.predicate.as_str() != vocab::RDF_TYPE {
            return Ok(());
        }
        let Term::Iri(class) = &t.object else {
            return Err(Error::InvalidTriple {
                line: l.line,
                message: "rdf:type object must be an IRI".into(),
            });
        };
        match class.as_str() {
            vocab::OWL_CLASS | vocab::RDFS_CLASS => {
                self.onto.concepts.insert(t.subject.clone());
            }
            vocab::OWL_OBJECT_PROPERTY => self.declare_role(&t.subject, RoleKind::Object, l.line)?,
            vocab::OWL_DATATYPE_PROPERTY => self.declare_role(&t.subject, RoleKind::Data, l.line)?,
            vocab::OWL_ANNOTATION_PROPERTY => {
                self.annotation_roles.insert(t.subject.clone());
            }
            vocab::OWL_NAMED_INDIVIDUAL | vocab::OWL_THING => {
                self.onto.individuals.insert(t.subject.clone());
            }
            _ => {}
        }
        Ok(())
    }

    /// Handles TBox and annotation triples; returns false for anything else.
    fn schema(&mut self, l: &Located) -> Result<bool> {
        let t = &l.triple;
        let object_iri = || -> Result<&Iri> {
            t.object.as_iri().ok_or_else(|| Error::InvalidTriple {
                line: l.line,
                message: format!("<{}> expects an IRI object", t.predicate),
            })
        };
        match t.predicate.as_str() {
            vocab::RDF_TYPE => {
                let class = object_iri()?;
                // Declarations were handled in pass 1; other built-in
                // classes (owl:Ontology, owl:TransitiveProperty, ...) are ignored.
                Ok(vocab::is_builtin(class.as_str()))
            }
            vocab::RDFS_SUB_CLASS_OF => {
                let sup = object_iri()?.clone();
                self.onto.concepts.insert(t.subject.clone());
                self.onto.concepts.insert(sup.clone());
                self.onto.sub_concept_of.entry(t.subject.clone()).or_default().insert(sup);
                Ok(true)
            }
            vocab::RDFS_SUB_PROPERTY_OF => {
                let sup = object_iri()?.clone();
                match (self.role_kind(&t.subject), self.role_kind(&sup)) {
                    (Some(k), None) => self.declare_role(&sup, k, l.line)?,
                    (None, Some(k)) => self.declare_role(&t.subject, k, l.line)?,
                    (Some(a), Some(b)) if a != b => {
                        return Err(Error::InvalidTriple {
                            line: l.line,
                            message: "subPropertyOf between an object and a data role".into(),
                        })
                    }
                    (None, None) => {
                        self.untyped_roles.insert(t.subject.clone());
                        self.untyped_roles.insert(sup.clone());
                    }
                    _ => {}
                }
                self.onto.sub_role_of.entry(t.subject.clone()).or_default().insert(sup);
                Ok(true)
            }
            vocab::RDFS_DOMAIN | vocab::RDFS_RANGE => {
                let concept = object_iri()?.clone();
                let is_domain = t.predicate.as_str() == vocab::RDFS_DOMAIN;
                if !is_domain && (concept.as_str().starts_with(vocab::XSD) || concept.as_str() == vocab::RDFS_LITERAL_CLASS) {
                    // Datatype ranges mark data roles and carry no concept.
                    self.declare_role(&t.subject, RoleKind::Data, l.line)?;
                    return Ok(true);
                }
                if self.role_kind(&t.subject).is_none() {
                    self.untyped_roles.insert(t.subject.clone());
                }
                if !concept.is_thing() && !self.onto.concepts.contains(&concept) {
                    self.warn("concept", &concept);
                    self.onto.concepts.insert(concept.clone());
                }
                let map = if is_domain {
                    &mut self.onto.role_domain
                } else {
                    &mut self.onto.role_range
                };
                match map.get(&t.subject) {
                    Some(existing) if *existing <= concept => {
                        if *existing != concept {
                            let message = format!(
                                "<{}> has several {}s; keeping <{existing}>",
                                t.subject,
                                if is_domain { "domain" } else { "range" }
                            );
                            self.onto.warnings.push(message);
                        }
                    }
                    _ => {
                        map.insert(t.subject.clone(), concept);
                    }
                }
                Ok(true)
            }
            vocab::RDFS_LABEL => {
                if let Term::Literal(label) = &t.object {
                    self.onto.labels.entry(t.subject.clone()).or_default().insert(label.clone());
                }
                Ok(true)
            }
            p if vocab::is_builtin(p) || self.annotation_roles.contains(&t.predicate) => Ok(true),
            _ => Ok(false),
        }
    }

    fn individual(&mut self, iri: &Iri) {
        if !self.onto.individuals.contains(iri) {
            self.warn("individual", iri);
            self.onto.individuals.insert(iri.clone());
        }
    }

    fn assertion(&mut self, l: Located) -> Result<()> {
        let Located { triple, line } = l;
        if triple.predicate.as_str() == vocab::RDF_TYPE {
            let concept = triple.object.as_iri().cloned().ok_or_else(|| Error::InvalidTriple {
                line,
                message: "rdf:type object must be an IRI".into(),
            })?;
            self.individual(&triple.subject);
            if !concept.is_thing() && !self.onto.concepts.contains(&concept) {
                self.warn("concept", &concept);
                self.onto.concepts.insert(concept);
            }
            self.onto.abox.insert(triple);
            return Ok(());
        }
        let kind = match &triple.object {
            Term::Literal(_) => RoleKind::Data,
            Term::Iri(_) => RoleKind::Object,
        };
        match self.role_kind(&triple.predicate) {
            None => {
                self.warn(if kind == RoleKind::Data { "data role" } else { "object role" }, &triple.predicate);
                self.declare_role(&triple.predicate, kind, line)?;
            }
            Some(existing) if existing != kind => {
                return Err(Error::InvalidTriple {
                    line,
                    message: match kind {
                        RoleKind::Data => format!("literal object for object role <{}>", triple.predicate),
                        RoleKind::Object => format!("IRI object for data role <{}>", triple.predicate),
                    },
                })
            }
            Some(_) => {}
        }
        self.individual(&triple.subject);
        if let Term::Iri(o) = &triple.object {
            self.individual(o);
        }
        self.onto.abox.insert(triple);
        Ok(())
    }

    fn finish(mut self) -> Result<Ontology> {
        let onto = &mut self.onto;
        let (anc, desc) = closure(&onto.sub_concept_of, "concept")?;
        onto.concept_ancestors = anc;
        onto.concept_descendants = desc;
        let (anc, desc) = closure(&onto.sub_role_of, "role")?;
        onto.role_ancestors = anc;
        onto.role_descendants = desc;
        index(onto);
        Ok(self.onto)
    }
}

type Closure = BTreeMap<Iri, BTreeSet<Iri>>;

/// Strict ancestor and descendant sets of a direct-edge relation; rejects cycles.
fn closure(edges: &BTreeMap<Iri, BTreeSet<Iri>>, hierarchy: &'static str) -> Result<(Closure, Closure)> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    fn visit(
        node: &Iri,
        edges: &BTreeMap<Iri, BTreeSet<Iri>>,
        marks: &mut BTreeMap<Iri, Mark>,
        ancestors: &mut Closure,
        hierarchy: &'static str,
    ) -> Result<()> {
        match marks.get(node) {
            Some(Mark::Done) => return Ok(()),
            Some(Mark::Active) => {
                return Err(Error::Cycle {
                    hierarchy,
                    entity: node.to_string(),
                })
            }
            None => {}
        }
        marks.insert(node.clone(), Mark::Active);
        let mut acc = BTreeSet::new();
        for sup in edges.get(node).into_iter().flatten() {
            visit(sup, edges, marks, ancestors, hierarchy)?;
            acc.insert(sup.clone());
            acc.extend(ancestors.get(sup).into_iter().flatten().cloned());
        }
        marks.insert(node.clone(), Mark::Done);
        ancestors.insert(node.clone(), acc);
        Ok(())
    }

    let mut marks = BTreeMap::new();
    let mut ancestors = Closure::new();
    for node in edges.keys() {
        visit(node, edges, &mut marks, &mut ancestors, hierarchy)?;
    }
    let mut descendants = Closure::new();
    for (node, sups) in &ancestors {
        for sup in sups {
            descendants.entry(sup.clone()).or_default().insert(node.clone());
        }
    }
    ancestors.retain(|_, sups| !sups.is_empty());
    Ok((ancestors, descendants))
}

fn index(onto: &mut Ontology) {
    for t in &onto.abox {
        match &t.object {
            Term::Iri(o) if t.predicate.as_str() == vocab::RDF_TYPE => {
                onto.types.entry(t.subject.clone()).or_default().insert(o.clone());
                onto.members.entry(o.clone()).or_default().insert(t.subject.clone());
            }
            Term::Iri(o) => {
                onto.out_index
                    .entry(t.subject.clone())
                    .or_default()
                    .insert((t.predicate.clone(), o.clone()));
                onto.in_index
                    .entry(o.clone())
                    .or_default()
                    .insert((t.predicate.clone(), t.subject.clone()));
            }
            Term::Literal(lit) => {
                onto.data_index
                    .entry(t.subject.clone())
                    .or_default()
                    .insert((t.predicate.clone(), Literal::clone(lit)));
            }
        }
    }
}

