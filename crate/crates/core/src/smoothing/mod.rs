//! Successive abstraction: estimating a sparse conditional distribution by
//! blending its relative frequencies with the estimate for a more general
//! context.
//!
//! For a context `C` seen `|C|` times, with relative frequencies `f(x|C)`
//! and an already smoothed estimate `P'(x)` for its generalization,
//!
//! ```text
//! P(x|C) = (s·f(x|C) + P'(x)) / (s + 1)
//! s      = √12 · √|C| · exp(-H[P'])
//! ```
//!
//! where `H` is the entropy in nats. `s` is the inverse standard deviation
//! of a uniform distribution with the same entropy as the general context,
//! shrunk by the number of observations. Contexts with several one-step
//! generalizations average their parents and take the smallest parent
//! entropy; see [`SuccessiveAbstraction::partial`].

mod baseline;
mod dag;
mod ngram;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use baseline::{
    ele_estimate, grid_points, grid_search_lambdas, interpolate, GridSearchResult, InterpolationWeights,
};
pub use dag::{smooth_dag, DagNode, GeneralizationDag};
pub use ngram::{
    build_ele_ngram_model, build_interpolated_ngram_model, build_sa_ngram_model, InterpolatedNGramModel,
    SmoothedNGramModel, TransitionModel,
};

/// `√12`, the inverse standard deviation of a unit-width uniform distribution.
pub const SQRT_12: f64 = 3.464_101_615_137_754_4;

/// Tolerance on the sum of a stored distribution.
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Looser tolerance accepted for caller-supplied probability vectors.
pub const INPUT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum SmoothingError {
    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),
    #[error("invalid relative frequencies: {0}")]
    InvalidFrequencies(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("a context needs at least one generalization to back off to")]
    NoParents,
    #[error("generalization graph has a cycle")]
    Cycle,
    #[error("generalization graph: {0}")]
    InvalidGraph(String),
    #[error("invalid interpolation weights: {0}")]
    InvalidWeights(String),
    #[error("grid step {0} does not divide 1")]
    InvalidGridStep(f64),
    #[error("no observations to estimate from")]
    NoData,
}

/// How the most general (unigram) distribution is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootMode {
    /// Plain relative frequencies.
    RelativeFrequency,
    /// Expected likelihood estimation: half a count added to every tag, so
    /// no tag has zero probability.
    #[default]
    Ele,
}

impl RootMode {
    pub fn name(self) -> &'static str {
        match self {
            RootMode::RelativeFrequency => "rf",
            RootMode::Ele => "ele",
        }
    }

    /// Estimates a root distribution from raw counts. Relative frequencies
    /// of an all-zero vector fall back to the uniform distribution.
    pub fn estimate(self, counts: &[u64]) -> Result<ConditionalDistribution, SmoothingError> {
        match self {
            RootMode::Ele => ele_estimate(counts),
            RootMode::RelativeFrequency if counts.iter().all(|&c| c == 0) => {
                ConditionalDistribution::uniform(counts.len())
            }
            RootMode::RelativeFrequency => ConditionalDistribution::new(crate::counts::relative_frequencies(counts)),
        }
    }
}

impl fmt::Display for RootMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RootMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rf" => Ok(RootMode::RelativeFrequency),
            "ele" => Ok(RootMode::Ele),
            _ => Err(format!("unknown root mode `{s}` (expected rf or ele)")),
        }
    }
}

/// Entropy in nats, `-Σ p ln p` with `0 ln 0 = 0`.
pub fn entropy(probs: &[f64]) -> Result<f64, SmoothingError> {
    check_probabilities(probs, INPUT_TOLERANCE)?;
    Ok(entropy_unchecked(probs))
}

fn entropy_unchecked(probs: &[f64]) -> f64 {
    let h: f64 = probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum();
    h.max(0.0)
}

fn check_probabilities(probs: &[f64], tolerance: f64) -> Result<(), SmoothingError> {
    if probs.is_empty() {
        return Err(SmoothingError::InvalidDistribution("empty vector".into()));
    }
    if let Some(p) = probs.iter().find(|p| !(**p >= 0.0 && **p <= 1.0 + 1e-12)) {
        return Err(SmoothingError::InvalidDistribution(format!("entry {p} outside [0, 1]")));
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > tolerance {
        return Err(SmoothingError::InvalidDistribution(format!("entries sum to {sum}")));
    }
    Ok(())
}

/// A normalized probability vector over the tag set, with its entropy.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDistribution {
    probs: Vec<f64>,
    entropy: f64,
}

impl ConditionalDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self, SmoothingError> {
        check_probabilities(&probs, SUM_TOLERANCE)?;
        let entropy = entropy_unchecked(&probs);
        Ok(ConditionalDistribution { probs, entropy })
    }

    pub fn uniform(n: usize) -> Result<Self, SmoothingError> {
        ConditionalDistribution::new(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    /// Entropy in nats.
    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn into_probs(self) -> Vec<f64> {
        self.probs
    }
}

/// Relative frequencies in one context together with how often the
/// context occurred. An unseen context has `count == 0` and zero
/// frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub freqs: Vec<f64>,
    pub count: u64,
}

impl Observation {
    pub fn new(freqs: Vec<f64>, count: u64) -> Self {
        Observation { freqs, count }
    }

    pub fn from_counts(counts: &[u64]) -> Self {
        Observation { freqs: crate::counts::relative_frequencies(counts), count: counts.iter().sum() }
    }
}

/// `σ(C)⁻¹ = √12 · √count · exp(-parent_entropy)`, zero for an unseen context.
pub fn sigma_inverse(context_count: u64, parent_entropy: f64) -> f64 {
    SuccessiveAbstraction::default().sigma_inverse(context_count, parent_entropy)
}

pub fn smooth_step(
    freqs: &[f64],
    parent: &ConditionalDistribution,
    context_count: u64,
) -> Result<ConditionalDistribution, SmoothingError> {
    SuccessiveAbstraction::default().step(freqs, parent, context_count)
}

pub fn smooth_linear_chain(
    chain: &[Observation],
    root: &ConditionalDistribution,
) -> Result<Vec<ConditionalDistribution>, SmoothingError> {
    SuccessiveAbstraction::default().chain(chain, root)
}

pub fn smooth_partial(
    freqs: &[f64],
    context_count: u64,
    parents: &[&ConditionalDistribution],
) -> Result<ConditionalDistribution, SmoothingError> {
    SuccessiveAbstraction::default().partial(freqs, context_count, parents)
}

/// The successive-abstraction estimator.
///
/// `sigma_scale` multiplies `σ₀⁻¹`; at its default of 1 the weights come
/// entirely from the entropy formula. Other values give the variant where
/// the entropy-derived term is rescaled by a global constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessiveAbstraction {
    pub sigma_scale: f64,
}

impl Default for SuccessiveAbstraction {
    fn default() -> Self {
        SuccessiveAbstraction { sigma_scale: 1.0 }
    }
}

impl SuccessiveAbstraction {
    pub fn new(sigma_scale: f64) -> Self {
        SuccessiveAbstraction { sigma_scale }
    }

    pub fn sigma_inverse(&self, context_count: u64, parent_entropy: f64) -> f64 {
        if context_count == 0 {
            return 0.0;
        }
        self.sigma_scale * SQRT_12 * (context_count as f64).sqrt() * (-parent_entropy).exp()
    }

    /// One application of the recurrence against a single generalization.
    /// An unseen context returns `parent` unchanged.
    pub fn step(
        &self,
        freqs: &[f64],
        parent: &ConditionalDistribution,
        context_count: u64,
    ) -> Result<ConditionalDistribution, SmoothingError> {
        check_dims(parent.len(), freqs.len())?;
        if context_count == 0 {
            return Ok(parent.clone());
        }
        check_freqs(freqs)?;
        let s = self.sigma_inverse(context_count, parent.entropy());
        Ok(blend(freqs, parent.probs(), s))
    }

    /// Folds [`step`](Self::step) from the most general level to the most
    /// specific. Element `k` of the result is the estimate at `chain[k]`.
    pub fn chain(
        &self,
        chain: &[Observation],
        root: &ConditionalDistribution,
    ) -> Result<Vec<ConditionalDistribution>, SmoothingError> {
        let mut out: Vec<ConditionalDistribution> = Vec::with_capacity(chain.len());
        for level in chain {
            let parent = out.last().unwrap_or(root);
            let next = self.step(&level.freqs, parent, level.count)?;
            out.push(next);
        }
        Ok(out)
    }

    /// The recurrence for a context with several one-step generalizations:
    /// the back-off term is the plain mean of the parents, and `σ⁻¹` uses
    /// the smallest parent entropy (the smallest `σ₀`).
    pub fn partial(
        &self,
        freqs: &[f64],
        context_count: u64,
        parents: &[&ConditionalDistribution],
    ) -> Result<ConditionalDistribution, SmoothingError> {
        let first = parents.first().ok_or(SmoothingError::NoParents)?;
        let dim = first.len();
        for p in parents {
            check_dims(dim, p.len())?;
        }
        check_dims(dim, freqs.len())?;

        let m = parents.len() as f64;
        let mean: Vec<f64> = (0..dim).map(|i| parents.iter().map(|p| p.prob(i)).sum::<f64>() / m).collect();
        if context_count == 0 {
            return ConditionalDistribution::new(mean);
        }
        check_freqs(freqs)?;
        let min_entropy = parents.iter().map(|p| p.entropy()).fold(f64::INFINITY, f64::min);
        let s = self.sigma_inverse(context_count, min_entropy);
        Ok(blend(freqs, &mean, s))
    }
}

fn blend(freqs: &[f64], backoff: &[f64], s: f64) -> ConditionalDistribution {
    let probs: Vec<f64> = freqs.iter().zip(backoff).map(|(&f, &p)| (s * f + p) / (s + 1.0)).collect();
    let entropy = entropy_unchecked(&probs);
    ConditionalDistribution { probs, entropy }
}

fn check_dims(expected: usize, got: usize) -> Result<(), SmoothingError> {
    if expected != got {
        return Err(SmoothingError::DimensionMismatch { expected, got });
    }
    Ok(())
}

fn check_freqs(freqs: &[f64]) -> Result<(), SmoothingError> {
    check_probabilities(freqs, INPUT_TOLERANCE).map_err(|e| SmoothingError::InvalidFrequencies(e.to_string()))
}
