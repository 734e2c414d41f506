//! One-parameter logistic (Rasch) model and the three-verdict decision table.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Bounds of the normalized trait scale.
pub const THETA_MIN: f64 = -1.5;
pub const THETA_MAX: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LearnerCategory {
    Expert,
    Intermediate,
    Beginner,
}

impl LearnerCategory {
    pub const ALL: [LearnerCategory; 3] = [
        LearnerCategory::Expert,
        LearnerCategory::Intermediate,
        LearnerCategory::Beginner,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerCategory::Expert => "expert",
            LearnerCategory::Intermediate => "intermediate",
            LearnerCategory::Beginner => "beginner",
        }
    }
}

impl fmt::Display for LearnerCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerCategory {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "expert" | "e" => Ok(LearnerCategory::Expert),
            "intermediate" | "i" => Ok(LearnerCategory::Intermediate),
            "beginner" | "b" => Ok(LearnerCategory::Beginner),
            other => Err(Error::input(format!("unknown learner category '{other}'"))),
        }
    }
}

/// Difficult (`d`) or not difficult (`nd`) for one learner category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    D,
    Nd,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::D => "d",
            Verdict::Nd => "nd",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "d" => Ok(Verdict::D),
            "nd" => Ok(Verdict::Nd),
            other => Err(Error::input(format!("expected 'd' or 'nd', found '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CategoryVerdicts {
    pub expert: Verdict,
    pub intermediate: Verdict,
    pub beginner: Verdict,
}

impl CategoryVerdicts {
    pub fn new(expert: Verdict, intermediate: Verdict, beginner: Verdict) -> Self {
        CategoryVerdicts {
            expert,
            intermediate,
            beginner,
        }
    }

    pub fn get(&self, category: LearnerCategory) -> Verdict {
        match category {
            LearnerCategory::Expert => self.expert,
            LearnerCategory::Intermediate => self.intermediate,
            LearnerCategory::Beginner => self.beginner,
        }
    }

    /// All eight combinations, expert varying slowest.
    pub fn all() -> Vec<CategoryVerdicts> {
        let both = [Verdict::D, Verdict::Nd];
        let mut out = Vec::with_capacity(8);
        for e in both {
            for i in both {
                for b in both {
                    out.push(CategoryVerdicts::new(e, i, b));
                }
            }
        }
        out
    }
}

impl fmt::Display for CategoryVerdicts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.expert, self.intermediate, self.beginner)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DifficultyLevel {
    High,
    Medium,
    Low,
    NonClassifiable,
}

impl DifficultyLevel {
    pub const ALL: [DifficultyLevel; 4] = [
        DifficultyLevel::High,
        DifficultyLevel::Medium,
        DifficultyLevel::Low,
        DifficultyLevel::NonClassifiable,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DifficultyLevel::High => "high",
            DifficultyLevel::Medium => "medium",
            DifficultyLevel::Low => "low",
            DifficultyLevel::NonClassifiable => "non-classifiable",
        }
    }

    pub fn is_classifiable(self) -> bool {
        self != DifficultyLevel::NonClassifiable
    }
}

impl fmt::Display for DifficultyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DifficultyLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "high" => Ok(DifficultyLevel::High),
            "medium" => Ok(DifficultyLevel::Medium),
            "low" => Ok(DifficultyLevel::Low),
            "non-classifiable" | "nonclassifiable" | "nc" => Ok(DifficultyLevel::NonClassifiable),
            other => Err(Error::input(format!("unknown difficulty level '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraitLevel {
    theta: f64,
    category: LearnerCategory,
}

impl TraitLevel {
    pub fn new(theta: f64, category: LearnerCategory) -> Result<Self> {
        if !(THETA_MIN..=THETA_MAX).contains(&theta) {
            return Err(Error::OutOfRange {
                what: "theta",
                value: theta,
                lo: THETA_MIN,
                hi: THETA_MAX,
            });
        }
        Ok(TraitLevel { theta, category })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn category(&self) -> LearnerCategory {
        self.category
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaSource {
    Estimated,
    Assigned,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ItemDifficulty {
    pub alpha: f64,
    pub source: AlphaSource,
}

impl ItemDifficulty {
    pub fn assigned(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::input("item difficulty must be finite"));
        }
        Ok(ItemDifficulty {
            alpha,
            source: AlphaSource::Assigned,
        })
    }

    /// Alpha clamped to the trait scale, for display only.
    pub fn display_alpha(&self) -> f64 {
        self.alpha.clamp(THETA_MIN, THETA_MAX)
    }
}

/// Numerically stable logistic function.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Probability that a learner at `theta` answers an item of difficulty `alpha`.
pub fn p_correct(theta: f64, alpha: f64) -> f64 {
    logistic(theta - alpha)
}

/// Difficulty at which a learner at `theta` answers correctly with probability `p`.
pub fn estimate_alpha(theta: f64, p: f64) -> Result<ItemDifficulty> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRange {
            what: "p",
            value: p,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(ItemDifficulty {
        alpha: theta - (p / (1.0 - p)).ln(),
        source: AlphaSource::Estimated,
    })
}

/// Proportion of correct responses, smoothed to (c + 0.5) / (n + 1) when
/// every response agrees.
pub fn empirical_p(responses: &[bool]) -> Result<f64> {
    let n = responses.len();
    if n == 0 {
        return Err(Error::input("no responses"));
    }
    let c = responses.iter().filter(|r| **r).count();
    Ok(proportion(c, n))
}

pub(crate) fn proportion(correct: usize, n: usize) -> f64 {
    if correct == 0 || correct == n {
        (correct as f64 + 0.5) / (n as f64 + 1.0)
    } else {
        correct as f64 / n as f64
    }
}

pub fn verdict_from_p(p: f64) -> Verdict {
    if p <= 0.5 {
        Verdict::D
    } else {
        Verdict::Nd
    }
}

pub fn assign_difficulty(v: CategoryVerdicts) -> DifficultyLevel {
    use Verdict::{Nd, D};
    match (v.expert, v.intermediate, v.beginner) {
        (D, D, D) => DifficultyLevel::High,
        (Nd, D, D) => DifficultyLevel::Medium,
        (Nd, Nd, D) => DifficultyLevel::Low,
        _ => DifficultyLevel::NonClassifiable,
    }
}

/// One Bernoulli draw per learner with success probability `p_correct(θ, alpha)`.
pub fn simulate_responses(cohort: &[TraitLevel], alpha: f64, seed: u64) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    cohort
        .iter()
        .map(|learner| rng.gen::<f64>() < p_correct(learner.theta, alpha))
        .collect()
}

/// Trait level representing each learner category.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaMap {
    pub expert: f64,
    pub intermediate: f64,
    pub beginner: f64,
}

impl Default for ThetaMap {
    fn default() -> Self {
        ThetaMap {
            expert: 1.25,
            intermediate: 0.0,
            beginner: -1.25,
        }
    }
}

impl ThetaMap {
    pub fn get(&self, category: LearnerCategory) -> f64 {
        match category {
            LearnerCategory::Expert => self.expert,
            LearnerCategory::Intermediate => self.intermediate,
            LearnerCategory::Beginner => self.beginner,
        }
    }

    fn set(&mut self, category: LearnerCategory, theta: f64) {
        match category {
            LearnerCategory::Expert => self.expert = theta,
            LearnerCategory::Intermediate => self.intermediate = theta,
            LearnerCategory::Beginner => self.beginner = theta,
        }
    }

    /// Expert above intermediate above beginner.
    pub fn is_monotone(&self) -> bool {
        self.expert > self.intermediate && self.intermediate > self.beginner
    }
}

pub fn category_thetas() -> ThetaMap {
    ThetaMap::default()
}

impl fmt::Display for ThetaMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "expert={},intermediate={},beginner={}",
            self.expert, self.intermediate, self.beginner
        )
    }
}

/// Parses `expert=1.25,intermediate=0,beginner=-1.25`; omitted categories
/// keep their defaults.
impl FromStr for ThetaMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut map = ThetaMap::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| Error::input(format!("expected category=theta, found '{part}'")))?;
            let category: LearnerCategory = name.parse()?;
            let theta: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::input(format!("invalid theta '{value}'")))?;
            TraitLevel::new(theta, category)?;
            map.set(category, theta);
        }
        Ok(map)
    }
}
