//! Popularity, selectivity, coherence and specificity of a question.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::ontology::{ConditionExpr, Iri, Ontology};
use crate::question::Question;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Feature {
    Popularity,
    SelectivityEx,
    SelectivityBg,
    Coherence,
    Specificity,
}

impl Feature {
    /// The fixed feature order, also used to break ranking ties.
    pub const ALL: [Feature; 5] = [
        Feature::Popularity,
        Feature::SelectivityEx,
        Feature::SelectivityBg,
        Feature::Coherence,
        Feature::Specificity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::Popularity => "Popularity",
            Feature::SelectivityEx => "Selectivity_Ex",
            Feature::SelectivityBg => "Selectivity_Bg",
            Feature::Coherence => "Coherence",
            Feature::Specificity => "Specificity",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .trim()
            .chars()
            .filter(|c| *c != '_' && *c != '-')
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "popularity" => Ok(Feature::Popularity),
            "selectivityex" => Ok(Feature::SelectivityEx),
            "selectivitybg" => Ok(Feature::SelectivityBg),
            "coherence" => Ok(Feature::Coherence),
            "specificity" => Ok(Feature::Specificity),
            _ => Err(Error::input(format!("unknown feature '{}'", s.trim()))),
        }
    }
}

/// The five normalized feature values of one question, each in [0, 1].
/// Coherence is stored halved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector([f64; 5]);

impl FeatureVector {
    pub fn new(values: [f64; 5]) -> Result<Self> {
        for (f, v) in Feature::ALL.iter().zip(values) {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::input(format!("{f} = {v} is outside [0, 1]")));
            }
        }
        Ok(FeatureVector(values))
    }

    pub fn get(&self, f: Feature) -> f64 {
        self.0[f.index()]
    }

    pub fn values(&self) -> [f64; 5] {
        self.0
    }

    pub fn popularity(&self) -> f64 {
        self.0[0]
    }

    pub fn selectivity_ex(&self) -> f64 {
        self.0[1]
    }

    pub fn selectivity_bg(&self) -> f64 {
        self.0[2]
    }

    /// Coherence rescaled to [0, 1].
    pub fn coherence(&self) -> f64 {
        self.0[3]
    }

    /// Coherence on its natural [0, 2] scale.
    pub fn coherence_raw(&self) -> f64 {
        2.0 * self.0[3]
    }

    pub fn specificity(&self) -> f64 {
        self.0[4]
    }
}

/// Conditions under which a feature fell back to a default value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Flag {
    /// No individual satisfies the condition; its popularity is 0.
    SparseCondition(ConditionExpr),
    /// The role has no declared domain; ⊤ was used.
    NoDomain(Iri),
    /// Fewer than two entities; coherence is 0.
    DegenerateCoherence,
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flag::SparseCondition(c) => write!(f, "sparse condition {c}"),
            Flag::NoDomain(r) => write!(f, "no domain for <{r}>"),
            Flag::DegenerateCoherence => f.write_str("degenerate coherence"),
        }
    }
}

/// A feature value with the fallbacks taken while computing it.
#[derive(Debug, Clone, PartialEq)]
pub struct Measured {
    pub value: f64,
    pub flags: Vec<Flag>,
}

impl Measured {
    fn clean(value: f64) -> Self {
        Measured {
            value,
            flags: Vec::new(),
        }
    }
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// In-links of `i` over the number of individuals, capped at 1.
pub fn popularity_individual(o: &Ontology, i: &Iri) -> Result<f64> {
    let n = o.individuals().len();
    if n == 0 {
        return Err(Error::EmptyOntology);
    }
    let links = o.in_links(i)?.len();
    Ok((links as f64 / n as f64).min(1.0))
}

/// Mean popularity of the individuals satisfying `c`.
pub fn popularity_condition(o: &Ontology, c: &ConditionExpr) -> Result<Measured> {
    let instances = o.instances_of(c)?;
    if instances.is_empty() {
        return Ok(Measured {
            value: 0.0,
            flags: vec![Flag::SparseCondition(c.clone())],
        });
    }
    let values = instances
        .iter()
        .map(|i| popularity_individual(o, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(Measured::clean(mean(&values)))
}

pub fn popularity_question(o: &Ontology, q: &Question) -> Result<Measured> {
    let mut values = Vec::new();
    let mut flags = Vec::new();
    for c in q.conditions() {
        let m = popularity_condition(o, c)?;
        values.push(m.value);
        flags.extend(m.flags);
    }
    Ok(Measured {
        value: mean(&values),
        flags,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionSpace {
    pub condition: ConditionExpr,
    /// Individuals satisfying the condition.
    pub aspace: usize,
    /// `aspace` relative to ⊤ (concepts) or to the role's domain.
    pub raspace: f64,
    /// Set when a role restriction had no declared domain.
    pub domain_fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnswerSpaceSummary {
    pub per_condition: Vec<ConditionSpace>,
    /// Mean of the per-condition relative answer spaces.
    pub overall: f64,
}

impl AnswerSpaceSummary {
    pub fn flags(&self) -> Vec<Flag> {
        self.per_condition
            .iter()
            .filter(|s| s.domain_fallback)
            .filter_map(|s| s.condition.role().map(|r| Flag::NoDomain(r.clone())))
            .collect()
    }
}

/// Relative answer space of one condition.
///
/// Role restrictions are measured against the domain's instances together
/// with the restriction's own instances, since domains are not used to
/// type individuals.
pub fn condition_space(o: &Ontology, c: &ConditionExpr) -> Result<ConditionSpace> {
    let instances = o.instances_of(c)?;
    let (raspace, domain_fallback) = match c.role() {
        None => {
            let total = o.individuals().len();
            (ratio(instances.len(), total), false)
        }
        Some(role) => {
            let (domain, fallback) = match o.domain(role) {
                Some(d) => (d.clone(), false),
                None => (Iri::thing(), true),
            };
            let mut reference = o.instances_of(&ConditionExpr::NamedConcept(domain))?;
            reference.extend(instances.iter().cloned());
            (ratio(instances.len(), reference.len()), fallback)
        }
    };
    Ok(ConditionSpace {
        condition: c.clone(),
        aspace: instances.len(),
        raspace,
        domain_fallback,
    })
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn answer_space_summary(o: &Ontology, q: &Question) -> Result<AnswerSpaceSummary> {
    let per_condition = q
        .conditions()
        .iter()
        .map(|c| condition_space(o, c))
        .collect::<Result<Vec<_>>>()?;
    let overall = mean(&per_condition.iter().map(|s| s.raspace).collect::<Vec<_>>());
    Ok(AnswerSpaceSummary {
        per_condition,
        overall,
    })
}

fn check_unit(what: &'static str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what,
            value: x,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

/// Expert selectivity: 1 at 0, 0 at 0.1, 1 at 0.5, 0 at 1, linear between.
pub fn selectivity_ex(x: f64) -> Result<f64> {
    check_unit("answer space", x)?;
    let y = if x <= 0.1 {
        1.0 - x / 0.1
    } else if x <= 0.5 {
        (x - 0.1) / 0.4
    } else {
        (1.0 - x) / 0.5
    };
    Ok(y.clamp(0.0, 1.0))
}

/// Beginner selectivity: the identity on [0, 1].
pub fn selectivity_bg(x: f64) -> Result<f64> {
    check_unit("answer space", x)?;
    Ok(x)
}

type Neighbours = BTreeSet<Iri>;

fn neighbours(o: &Ontology, i: &Iri) -> Result<(Neighbours, Neighbours)> {
    let ins = o.in_links(i)?.iter().map(|(_, s)| s.clone()).collect();
    let outs = o.out_links(i)?.iter().map(|(_, t)| t.clone()).collect();
    Ok((ins, outs))
}

fn jaccard(a: &Neighbours, b: &Neighbours) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        0.0
    } else {
        a.intersection(b).count() as f64 / union as f64
    }
}

fn pair_score(p: &(Neighbours, Neighbours), q: &(Neighbours, Neighbours)) -> f64 {
    jaccard(&p.0, &q.0) + jaccard(&p.1, &q.1)
}

/// Jaccard similarity of in-neighbours plus that of out-neighbours, in [0, 2].
pub fn coherence_pair(o: &Ontology, p: &Iri, q: &Iri) -> Result<f64> {
    Ok(pair_score(&neighbours(o, p)?, &neighbours(o, q)?))
}

/// An entity a question mentions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Entity {
    Individual(Iri),
    /// Stands for the union of its instances' neighbourhoods.
    Concept(Iri),
}

/// Individual fillers and named concepts (including concept fillers) of `q`.
pub fn question_entities(q: &Question) -> BTreeSet<Entity> {
    let mut out = BTreeSet::new();
    for c in q.conditions() {
        match c {
            ConditionExpr::NamedConcept(concept) | ConditionExpr::ExistsRoleConcept { concept, .. } => {
                out.insert(Entity::Concept(concept.clone()));
            }
            ConditionExpr::ExistsRoleIndividual { individual, .. } => {
                out.insert(Entity::Individual(individual.clone()));
            }
            ConditionExpr::ExistsDataValue { .. } => {}
        }
    }
    out
}

fn entity_neighbours(o: &Ontology, e: &Entity) -> Result<(Neighbours, Neighbours)> {
    match e {
        Entity::Individual(i) => neighbours(o, i),
        Entity::Concept(c) => {
            let mut ins = Neighbours::new();
            let mut outs = Neighbours::new();
            for i in o.instances_of(&ConditionExpr::NamedConcept(c.clone()))? {
                let (a, b) = neighbours(o, &i)?;
                ins.extend(a);
                outs.extend(b);
            }
            Ok((ins, outs))
        }
    }
}

/// Mean pairwise coherence over the question's entities, in [0, 2].
pub fn coherence_question(o: &Ontology, q: &Question) -> Result<Measured> {
    let entities: Vec<Entity> = question_entities(q).into_iter().collect();
    if entities.len() < 2 {
        return Ok(Measured {
            value: 0.0,
            flags: vec![Flag::DegenerateCoherence],
        });
    }
    let hoods = entities
        .iter()
        .map(|e| entity_neighbours(o, e))
        .collect::<Result<Vec<_>>>()?;
    let mut scores = Vec::new();
    for i in 0..hoods.len() {
        for j in i + 1..hoods.len() {
            scores.push(pair_score(&hoods[i], &hoods[j]));
        }
    }
    Ok(Measured::clean(mean(&scores)))
}

/// Position of `p` counted from the general end of its chain, over the
/// chain length.
pub fn depth_ratio(o: &Ontology, key: &Iri, p: &Iri) -> Result<f64> {
    let chain = o.concept_chain_through(key, p)?;
    let index = chain
        .iter()
        .position(|x| x == p)
        .ok_or_else(|| Error::Invariant(format!("chain through <{p}> does not contain it")))?;
    Ok((chain.len() - index) as f64 / chain.len() as f64)
}

/// Concepts of concept conditions and roles of role restrictions.
pub fn question_predicates(q: &Question) -> BTreeSet<Iri> {
    q.conditions()
        .iter()
        .map(|c| match c {
            ConditionExpr::NamedConcept(concept) => concept.clone(),
            other => other.role().expect("restrictions carry a role").clone(),
        })
        .collect()
}

/// Mean depth ratio times the largest depth ratio.
pub fn specificity_question(o: &Ontology, q: &Question) -> Result<f64> {
    let ratios = question_predicates(q)
        .iter()
        .map(|p| depth_ratio(o, &q.key, p))
        .collect::<Result<Vec<_>>>()?;
    let max = ratios.iter().copied().fold(0.0, f64::max);
    Ok(mean(&ratios) * max)
}

/// All five features with every fallback that was taken.
pub fn feature_report(o: &Ontology, q: &Question) -> Result<(FeatureVector, Vec<Flag>)> {
    let popularity = popularity_question(o, q)?;
    let space = answer_space_summary(o, q)?;
    let coherence = coherence_question(o, q)?;
    let specificity = specificity_question(o, q)?;
    let overall = space.overall.clamp(0.0, 1.0);
    let values = [
        popularity.value,
        selectivity_ex(overall)?,
        selectivity_bg(overall)?,
        coherence.value / 2.0,
        specificity,
    ]
    .map(|v| v.clamp(0.0, 1.0));
    let mut flags = popularity.flags;
    flags.extend(space.flags());
    flags.extend(coherence.flags);
    flags.sort();
    flags.dedup();
    Ok((FeatureVector::new(values)?, flags))
}

pub fn feature_vector(o: &Ontology, q: &Question) -> Result<FeatureVector> {
    feature_report(o, q).map(|(v, _)| v)
}
