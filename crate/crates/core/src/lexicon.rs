//! Lexical distributions `P(tag | word)`.
//!
//! Known words use the relative frequencies of their training tags. Unknown
//! words walk the reversed suffix trie from the empty suffix down through
//! the longest matching suffix, refining the estimate at every level with
//! the successive-abstraction recurrence.

use thiserror::Error;

use crate::corpus::TagId;
use crate::counts::{Lexicon, RareWordPolicy, SuffixTrie};
use crate::smoothing::{ConditionalDistribution, Observation, RootMode, SmoothingError, SuccessiveAbstraction};

#[derive(Debug, Error, PartialEq)]
pub enum LexicalError {
    #[error("tag {0} has lexical probability {1} but zero unigram probability")]
    ZeroUnigram(TagId, f64),
}

/// `P(tag | word)` with the tags the word was seen with.
#[derive(Debug, Clone, PartialEq)]
pub struct LexicalDistribution {
    probs: Vec<f64>,
    support: Vec<TagId>,
}

impl LexicalDistribution {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, tag: TagId) -> f64 {
        self.probs[tag.index()]
    }

    /// Tags observed with the word in training; empty for unknown words.
    pub fn support(&self) -> &[TagId] {
        &self.support
    }
}

/// Relative tag frequencies of a training word, `None` if never seen.
pub fn known_word_distribution(lexicon: &Lexicon, word: &str) -> Option<LexicalDistribution> {
    let entry = lexicon.get(word)?;
    let total = entry.total() as f64;
    let probs = entry.counts().iter().map(|&c| c as f64 / total).collect();
    let support = entry.counts().iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, _)| TagId::new(i)).collect();
    Some(LexicalDistribution { probs, support })
}

/// Suffix-based tag guesser for words missing from the lexicon.
#[derive(Debug, Clone, PartialEq)]
pub struct UnknownWordModel {
    trie: SuffixTrie,
    root: ConditionalDistribution,
    policy: RareWordPolicy,
    sa: SuccessiveAbstraction,
}

impl UnknownWordModel {
    /// The chain starts from the tag distribution of all rare tokens (the
    /// trie root), estimated per `root_mode`.
    pub fn build(
        trie: SuffixTrie,
        policy: RareWordPolicy,
        root_mode: RootMode,
        sa: SuccessiveAbstraction,
    ) -> Result<Self, SmoothingError> {
        let root = root_mode.estimate(trie.root().counts())?;
        UnknownWordModel::from_parts(trie, root, policy, sa)
    }

    pub fn from_parts(
        trie: SuffixTrie,
        root: ConditionalDistribution,
        policy: RareWordPolicy,
        sa: SuccessiveAbstraction,
    ) -> Result<Self, SmoothingError> {
        if root.len() != trie.num_tags() {
            return Err(SmoothingError::DimensionMismatch { expected: trie.num_tags(), got: root.len() });
        }
        Ok(UnknownWordModel { trie, root, policy, sa })
    }

    pub fn trie(&self) -> &SuffixTrie {
        &self.trie
    }

    pub fn root(&self) -> &ConditionalDistribution {
        &self.root
    }

    pub fn policy(&self) -> &RareWordPolicy {
        &self.policy
    }

    /// The same model with every suffix level removed, so that every
    /// unknown word gets the root distribution.
    pub fn without_suffixes(&self) -> Self {
        let trie = SuffixTrie::empty(self.trie.num_tags(), self.trie.max_suffix_length());
        UnknownWordModel { trie, root: self.root.clone(), policy: self.policy, sa: self.sa }
    }

    /// Observations along the matched suffix path, shortest suffix first.
    pub fn suffix_chain(&self, word: &str) -> Vec<Observation> {
        self.trie
            .matched_path(word)
            .into_iter()
            .map(|id| Observation::from_counts(self.trie.node(id).counts()))
            .collect()
    }

    pub fn distribution(&self, word: &str) -> LexicalDistribution {
        let levels =
            self.sa.chain(&self.suffix_chain(word), &self.root).expect("trie nodes and root share the tag dimension");
        let probs = levels.last().unwrap_or(&self.root).probs().to_vec();
        LexicalDistribution { probs, support: Vec::new() }
    }
}

pub fn unknown_word_distribution(model: &UnknownWordModel, word: &str) -> LexicalDistribution {
    model.distribution(word)
}

/// `P(tag | word) / P(tag)`, the per-word factor of the decoding objective.
pub fn lexical_factor(
    dist: &LexicalDistribution,
    unigram: &ConditionalDistribution,
    tag: TagId,
) -> Result<f64, LexicalError> {
    let lexical = dist.prob(tag);
    if lexical == 0.0 {
        return Ok(0.0);
    }
    let prior = unigram.prob(tag.index());
    if prior == 0.0 {
        return Err(LexicalError::ZeroUnigram(tag, lexical));
    }
    Ok(lexical / prior)
}
