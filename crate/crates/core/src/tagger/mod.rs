//! The trained tagging model and its decoder.
//!
//! A tag sequence `T₁…Tₙ` for words `W₁…Wₙ` is scored by
//! `Σₖ ln P(Tₖ | context) + ln(P(Tₖ | Wₖ) / P(Tₖ))`, where the context is
//! the previous `order - 1` tags padded with sentence-start markers.

mod tune;
pub mod viterbi;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{corpus_to_string, Corpus, TagId, TagSet};
use crate::counts::{build_lexicon, count_ngrams, padded_history, CtxTag, Lexicon, RareWordPolicy, SuffixTrie};
use crate::lexicon::{known_word_distribution, lexical_factor, LexicalDistribution, LexicalError, UnknownWordModel};
use crate::smoothing::{
    build_ele_ngram_model, build_interpolated_ngram_model, build_sa_ngram_model, ConditionalDistribution,
    InterpolationWeights, RootMode, SmoothingError, SuccessiveAbstraction, TransitionModel,
};

pub use tune::{held_out_log_likelihood, tagging_accuracy, tune_interpolation, TuningObjective};
pub use viterbi::{decode, LatticeColumn};

#[derive(Debug, Error)]
pub enum TaggerError {
    #[error("{words} words but {tags} tags")]
    LengthMismatch { words: usize, tags: usize },
    #[error("tag index {0} outside the model's tag set")]
    UnknownTag(TagId),
    #[error("tag `{0}` is not in the model's tag set")]
    UnknownTagSymbol(String),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("inconsistent model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Lexical(#[from] LexicalError),
    #[error(transparent)]
    Smoothing(#[from] SmoothingError),
    #[error(transparent)]
    Counts(#[from] crate::counts::CountsError),
}

/// Transition estimator selected at training time.
#[derive(Debug, Clone, PartialEq)]
pub enum Smoothing {
    /// Successive abstraction along the tag-context chain.
    Sa,
    /// Half-count smoothing per context.
    Ele,
    /// Linear interpolation with fixed weights, unigram first.
    Interp(InterpolationWeights),
}

impl Smoothing {
    pub fn kind(&self) -> SmoothingKind {
        match self {
            Smoothing::Sa => SmoothingKind::Sa,
            Smoothing::Ele => SmoothingKind::Ele,
            Smoothing::Interp(_) => SmoothingKind::Interp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SmoothingKind {
    Sa,
    Ele,
    Interp,
}

impl SmoothingKind {
    pub fn name(self) -> &'static str {
        match self {
            SmoothingKind::Sa => "sa",
            SmoothingKind::Ele => "ele",
            SmoothingKind::Interp => "interp",
        }
    }
}

impl fmt::Display for SmoothingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SmoothingKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sa" => Ok(SmoothingKind::Sa),
            "ele" => Ok(SmoothingKind::Ele),
            "interp" => Ok(SmoothingKind::Interp),
            _ => Err(format!("unknown smoothing `{s}` (expected sa, interp or ele)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub order: usize,
    pub policy: RareWordPolicy,
    pub root_mode: RootMode,
    pub sigma_scale: f64,
    pub smoothing: Smoothing,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            order: 3,
            policy: RareWordPolicy::default(),
            root_mode: RootMode::Ele,
            sigma_scale: 1.0,
            smoothing: Smoothing::Sa,
        }
    }
}

/// How a model was trained.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelMetadata {
    pub order: usize,
    pub policy: RareWordPolicy,
    pub root_mode: RootMode,
    pub sigma_scale: f64,
    pub smoothing: SmoothingKind,
    /// Hex SHA-256 of the training corpus in its canonical text form.
    pub corpus_digest: String,
    pub train_tokens: u64,
}

/// Decoder switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DecodeOptions {
    /// Let known words take any tag, not only those seen with them.
    pub open_lattice: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    tag_set: TagSet,
    transition: TransitionModel,
    lexicon: Lexicon,
    unknown: UnknownWordModel,
    unigram: ConditionalDistribution,
    metadata: ModelMetadata,
}

/// Hex SHA-256 of `corpus` written in the token-per-line format.
pub fn corpus_digest(corpus: &Corpus) -> String {
    hex::encode(Sha256::digest(corpus_to_string(corpus).as_bytes()))
}

impl Model {
    pub fn train(corpus: &Corpus, config: &TrainConfig) -> Result<Model, TaggerError> {
        if config.order == 0 {
            return Err(TaggerError::InvalidConfig("order must be at least 1".into()));
        }
        if !(config.sigma_scale > 0.0 && config.sigma_scale.is_finite()) {
            return Err(TaggerError::InvalidConfig(format!(
                "sigma scale must be positive, got {}",
                config.sigma_scale
            )));
        }
        if corpus.is_empty() {
            return Err(TaggerError::InvalidConfig("training corpus is empty".into()));
        }
        let sa = SuccessiveAbstraction::new(config.sigma_scale);
        let counts = count_ngrams(corpus, config.order)?;
        let transition = match &config.smoothing {
            Smoothing::Sa => TransitionModel::Smoothed(build_sa_ngram_model(&counts, config.root_mode, &sa)?),
            Smoothing::Ele => TransitionModel::Smoothed(build_ele_ngram_model(&counts, config.root_mode)?),
            Smoothing::Interp(w) => {
                TransitionModel::Interpolated(build_interpolated_ngram_model(&counts, config.root_mode, w.clone())?)
            }
        };
        let lexicon = build_lexicon(corpus);
        let trie = SuffixTrie::build(corpus, &lexicon, &config.policy);
        let unknown = UnknownWordModel::build(trie, config.policy, config.root_mode, sa)?;
        let unigram = transition.root().clone();
        let metadata = ModelMetadata {
            order: config.order,
            policy: config.policy,
            root_mode: config.root_mode,
            sigma_scale: config.sigma_scale,
            smoothing: config.smoothing.kind(),
            corpus_digest: corpus_digest(corpus),
            train_tokens: corpus.token_count() as u64,
        };
        Ok(Model { tag_set: corpus.tag_set().clone(), transition, lexicon, unknown, unigram, metadata })
    }

    /// Reassembles a model from stored parts, checking that they agree.
    pub fn from_parts(
        tag_set: TagSet,
        transition: TransitionModel,
        lexicon: Lexicon,
        unknown: UnknownWordModel,
        unigram: ConditionalDistribution,
        metadata: ModelMetadata,
    ) -> Result<Model, TaggerError> {
        let n = tag_set.len();
        let dims = [
            ("transition", transition.num_tags()),
            ("lexicon", lexicon.num_tags()),
            ("suffix trie", unknown.trie().num_tags()),
            ("unigram", unigram.len()),
        ];
        if let Some((what, d)) = dims.iter().find(|(_, d)| *d != n) {
            return Err(TaggerError::InvalidModel(format!("{what} has {d} tags, tag set has {n}")));
        }
        if transition.order() != metadata.order {
            return Err(TaggerError::InvalidModel(format!(
                "transition order {} but metadata order {}",
                transition.order(),
                metadata.order
            )));
        }
        Ok(Model { tag_set, transition, lexicon, unknown, unigram, metadata })
    }

    pub fn tag_set(&self) -> &TagSet {
        &self.tag_set
    }

    pub fn transition(&self) -> &TransitionModel {
        &self.transition
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn unknown_model(&self) -> &UnknownWordModel {
        &self.unknown
    }

    pub fn unigram(&self) -> &ConditionalDistribution {
        &self.unigram
    }

    pub fn metadata(&self) -> &ModelMetadata {
        &self.metadata
    }

    pub fn order(&self) -> usize {
        self.metadata.order
    }

    /// The same model with a different transition estimator of equal order.
    pub fn with_transition(&self, transition: TransitionModel) -> Result<Model, TaggerError> {
        let mut metadata = self.metadata.clone();
        metadata.smoothing = match transition {
            TransitionModel::Interpolated(_) => SmoothingKind::Interp,
            TransitionModel::Smoothed(_) if metadata.smoothing == SmoothingKind::Interp => SmoothingKind::Sa,
            TransitionModel::Smoothed(_) => metadata.smoothing,
        };
        Model::from_parts(
            self.tag_set.clone(),
            transition,
            self.lexicon.clone(),
            self.unknown.clone(),
            self.unigram.clone(),
            metadata,
        )
    }

    /// The same model with the given unknown-word guesser.
    pub fn with_unknown_model(&self, unknown: UnknownWordModel) -> Result<Model, TaggerError> {
        Model::from_parts(
            self.tag_set.clone(),
            self.transition.clone(),
            self.lexicon.clone(),
            unknown,
            self.unigram.clone(),
            self.metadata.clone(),
        )
    }

    pub fn is_known(&self, word: &str) -> bool {
        self.lexicon.contains(word)
    }

    pub fn lexical_distribution(&self, word: &str) -> LexicalDistribution {
        known_word_distribution(&self.lexicon, word).unwrap_or_else(|| self.unknown.distribution(word))
    }

    fn log_transition(&self, history: &[CtxTag]) -> Vec<f64> {
        self.transition.distribution(history).probs().iter().map(|p| p.ln()).collect()
    }

    /// Natural-log score of `tags` for `words`; negative infinity when any
    /// factor is zero.
    pub fn score_sequence<S: AsRef<str>>(&self, words: &[S], tags: &[TagId]) -> Result<f64, TaggerError> {
        if words.len() != tags.len() {
            return Err(TaggerError::LengthMismatch { words: words.len(), tags: tags.len() });
        }
        if let Some(&t) = tags.iter().find(|t| t.index() >= self.tag_set.len()) {
            return Err(TaggerError::UnknownTag(t));
        }
        let mut total = 0.0;
        for (k, (word, &tag)) in words.iter().zip(tags).enumerate() {
            let history = padded_history(&tags[..k], self.order() - 1);
            let p = self.transition.distribution(&history).prob(tag.index());
            let factor = lexical_factor(&self.lexical_distribution(word.as_ref()), &self.unigram, tag)?;
            total += p.ln() + factor.ln();
        }
        Ok(total)
    }

    /// Candidate tags and log lexical factors for every word.
    pub fn lattice<S: AsRef<str>>(
        &self,
        words: &[S],
        options: DecodeOptions,
    ) -> Result<Vec<LatticeColumn>, TaggerError> {
        words
            .iter()
            .map(|word| {
                let dist = self.lexical_distribution(word.as_ref());
                let candidates: Vec<TagId> = match dist.support() {
                    support if !support.is_empty() && !options.open_lattice => support.to_vec(),
                    _ => self.tag_set.ids().collect(),
                };
                candidates.into_iter().map(|t| Ok((t, lexical_factor(&dist, &self.unigram, t)?.ln()))).collect()
            })
            .collect()
    }

    /// Best tag sequence for one sentence; empty input gives empty output.
    pub fn viterbi_tag<S: AsRef<str>>(&self, words: &[S], options: DecodeOptions) -> Result<Vec<TagId>, TaggerError> {
        let lattice = self.lattice(words, options)?;
        Ok(decode(self.order(), &lattice, |h| self.log_transition(h)).0)
    }

    /// Tags every sentence independently, in parallel, preserving order.
    pub fn tag_corpus<S>(&self, sentences: &[Vec<S>], options: DecodeOptions) -> Result<Vec<Vec<TagId>>, TaggerError>
    where
        S: AsRef<str> + Sync,
    {
        sentences.par_iter().map(|s| self.viterbi_tag(s, options)).collect()
    }

    /// Tags one sentence and returns tag symbols.
    pub fn tag_words<S: AsRef<str>>(&self, words: &[S]) -> Result<Vec<String>, TaggerError> {
        Ok(self
            .viterbi_tag(words, DecodeOptions::default())?
            .into_iter()
            .map(|t| self.tag_set.symbol(t).to_owned())
            .collect())
    }
}
