//! Difficulty modelling for ontology-generated factual questions.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`ontology`] parses N-Triples or a Turtle subset into an indexed
//!    store with subsumption closure.
//! 2. [`question`] instantiates fixed question patterns over the ABox.
//! 3. [`features`] scores each question on popularity, selectivity,
//!    coherence and specificity.
//! 4. Three per-category logistic models ([`model`]) predict d/nd, and
//!    [`irt`] maps the three verdicts to a difficulty level.
//!
//! [`selection`] ranks features per learner category, [`calibration`]
//! estimates item difficulty from observed responses, and [`report`]
//! compares predicted and gold levels.

pub mod calibration;
pub mod error;
pub mod features;
pub mod irt;
pub mod model;
pub mod ontology;
pub mod question;
pub mod records;
pub mod report;
pub mod selection;

pub use error::{Error, Result};
pub use features::{Feature, FeatureVector};
pub use irt::{CategoryVerdicts, DifficultyLevel, LearnerCategory, ThetaMap, Verdict};
pub use ontology::{ConditionExpr, Iri, Literal, Ontology, SourceFormat, Term, Triple};
pub use question::{Question, QuestionPattern};
