//! Frequency statistics consumed by the estimators.
//!
//! Tag n-gram contexts are padded on the left of every sentence with a
//! boundary pseudo-tag ([`CtxTag::Boundary`]) that is never an outcome.

mod trie;

use std::borrow::Cow;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::corpus::{Corpus, TagId};

pub use trie::{RareWordPolicy, SuffixLetter, SuffixTrie, TrieNode};

#[derive(Debug, Error, PartialEq)]
pub enum CountsError {
    #[error("n-gram order must be at least 1, got {0}")]
    InvalidOrder(usize),
    #[error("context of length {len} is too long for an order-{order} table")]
    ContextTooLong { len: usize, order: usize },
    #[error("invalid rare-word policy: {0}")]
    InvalidPolicy(String),
    #[error("inconsistent counts: {0}")]
    Inconsistent(String),
}

/// One position of a tag context: a real tag or the sentence-start pad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CtxTag {
    Boundary,
    Tag(TagId),
}

/// The last `len` context positions before the next tag, given the tags
/// assigned so far in the sentence. Missing positions are boundary pads.
pub fn padded_history(previous: &[TagId], len: usize) -> Vec<CtxTag> {
    let have = previous.len().min(len);
    let mut out = vec![CtxTag::Boundary; len - have];
    out.extend(previous[previous.len() - have..].iter().map(|&t| CtxTag::Tag(t)));
    out
}

/// Outcome counts observed after one context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextCounts {
    counts: Vec<u64>,
    total: u64,
}

impl ContextCounts {
    pub fn zero(num_tags: usize) -> Self {
        ContextCounts { counts: vec![0; num_tags], total: 0 }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        ContextCounts { counts, total }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Relative frequencies, or the zero vector when the context was never seen.
    pub fn relative_frequencies(&self) -> Vec<f64> {
        relative_frequencies(&self.counts)
    }

    fn add(&mut self, tag: TagId, n: u64) {
        self.counts[tag.index()] += n;
        self.total += n;
    }
}

pub(crate) fn relative_frequencies(counts: &[u64]) -> Vec<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Tag n-gram counts for every context length below `order`.
///
/// `tables[k]` maps each observed context of `k` tags (oldest first) to
/// the counts of the tag that followed it. `tables[0]` has the single
/// empty context and holds the unigram counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramCountTable {
    order: usize,
    num_tags: usize,
    tables: Vec<BTreeMap<Vec<CtxTag>, ContextCounts>>,
}

impl NGramCountTable {
    pub fn empty(order: usize, num_tags: usize) -> Result<Self, CountsError> {
        if order < 1 {
            return Err(CountsError::InvalidOrder(order));
        }
        Ok(NGramCountTable { order, num_tags, tables: vec![BTreeMap::new(); order] })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_tags(&self) -> usize {
        self.num_tags
    }

    /// Records one occurrence of `tag` after the tags in `previous`.
    pub fn observe(&mut self, previous: &[TagId], tag: TagId) {
        let history = padded_history(previous, self.order - 1);
        for (k, table) in self.tables.iter_mut().enumerate() {
            let ctx = history[history.len() - k..].to_vec();
            table.entry(ctx).or_insert_with(|| ContextCounts::zero(self.num_tags)).add(tag, 1);
        }
    }

    fn check_len(&self, context: &[CtxTag]) -> Result<(), CountsError> {
        if context.len() >= self.order {
            return Err(CountsError::ContextTooLong { len: context.len(), order: self.order });
        }
        Ok(())
    }

    /// `|C|`: how often `context` occurred, 0 if never.
    pub fn context_count(&self, context: &[CtxTag]) -> Result<u64, CountsError> {
        Ok(self.get(context)?.map_or(0, ContextCounts::total))
    }

    pub fn get(&self, context: &[CtxTag]) -> Result<Option<&ContextCounts>, CountsError> {
        self.check_len(context)?;
        Ok(self.tables[context.len()].get(context))
    }

    /// Like [`get`](Self::get) but unseen contexts yield zero counts.
    pub fn lookup(&self, context: &[CtxTag]) -> Result<Cow<'_, ContextCounts>, CountsError> {
        Ok(match self.get(context)? {
            Some(c) => Cow::Borrowed(c),
            None => Cow::Owned(ContextCounts::zero(self.num_tags)),
        })
    }

    pub fn unigram(&self) -> &ContextCounts {
        self.tables[0].get(&[][..]).expect("unigram table is populated on construction")
    }

    /// Observed contexts of length `len`, in sorted order.
    pub fn contexts(&self, len: usize) -> impl Iterator<Item = (&[CtxTag], &ContextCounts)> {
        self.tables[len].iter().map(|(k, v)| (k.as_slice(), v))
    }

    /// Adds all counts of `other` into `self`. Merging is associative and
    /// commutative, so sentence shards can be counted independently.
    pub fn merge(&mut self, other: &NGramCountTable) -> Result<(), CountsError> {
        if other.order != self.order || other.num_tags != self.num_tags {
            return Err(CountsError::Inconsistent("merging tables of different shapes".into()));
        }
        for (mine, theirs) in self.tables.iter_mut().zip(&other.tables) {
            for (ctx, counts) in theirs {
                let entry = mine.entry(ctx.clone()).or_insert_with(|| ContextCounts::zero(self.num_tags));
                for (i, &c) in counts.counts.iter().enumerate() {
                    entry.add(TagId::new(i), c);
                }
            }
        }
        Ok(())
    }
}

/// Counts tag n-grams up to `order` over every sentence of `corpus`.
pub fn count_ngrams(corpus: &Corpus, order: usize) -> Result<NGramCountTable, CountsError> {
    let mut table = NGramCountTable::empty(order, corpus.tag_set().len())?;
    table.tables[0].insert(Vec::new(), ContextCounts::zero(table.num_tags));
    for sentence in corpus.tag_sequences() {
        for i in 0..sentence.len() {
            table.observe(&sentence[..i], sentence[i]);
        }
    }
    Ok(table)
}

/// Per-word tag counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordEntry {
    counts: Vec<u64>,
    total: u64,
}

impl WordEntry {
    pub fn new(counts: Vec<u64>) -> Self {
        let total = counts.iter().sum();
        WordEntry { counts, total }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    num_tags: usize,
    entries: BTreeMap<String, WordEntry>,
}

impl Lexicon {
    pub fn from_entries(
        num_tags: usize,
        entries: impl IntoIterator<Item = (String, WordEntry)>,
    ) -> Result<Self, CountsError> {
        let entries: BTreeMap<_, _> = entries.into_iter().collect();
        if let Some((w, _)) = entries.iter().find(|(_, e)| e.counts.len() != num_tags) {
            return Err(CountsError::Inconsistent(format!("lexicon entry `{w}` has the wrong number of tags")));
        }
        Ok(Lexicon { num_tags, entries })
    }

    pub fn num_tags(&self) -> usize {
        self.num_tags
    }

    pub fn get(&self, word: &str) -> Option<&WordEntry> {
        self.entries.get(word)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &WordEntry)> {
        self.entries.iter().map(|(w, e)| (w.as_str(), e))
    }

    pub fn token_count(&self) -> u64 {
        self.entries.values().map(WordEntry::total).sum()
    }
}

pub fn build_lexicon(corpus: &Corpus) -> Lexicon {
    let num_tags = corpus.tag_set().len();
    let mut entries: BTreeMap<String, WordEntry> = BTreeMap::new();
    for token in corpus.tokens() {
        let entry =
            entries.entry(token.word.clone()).or_insert_with(|| WordEntry { counts: vec![0; num_tags], total: 0 });
        entry.counts[token.tag.index()] += 1;
        entry.total += 1;
    }
    Lexicon { num_tags, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{synthesize_corpus, SynthesisConfig, TagSet};
    use proptest::prelude::*;

    fn tags_corpus(sentences: Vec<Vec<&str>>) -> Corpus {
        let tag_set = TagSet::new(["A", "B", "C"]).unwrap();
        let pairs = sentences.into_iter().map(|s| s.into_iter().map(|t| (format!("w{t}"), t)).collect()).collect();
        Corpus::from_pairs(tag_set, pairs).unwrap()
    }

    const A: CtxTag = CtxTag::Tag(TagId::new(0));
    const B: CtxTag = CtxTag::Tag(TagId::new(1));

    #[test]
    fn bigram_counts_for_aba() {
        let t = count_ngrams(&tags_corpus(vec![vec!["A", "B", "A"]]), 2).unwrap();
        assert_eq!(t.unigram().counts(), [2, 1, 0]);
        assert_eq!(t.get(&[CtxTag::Boundary]).unwrap().unwrap().counts(), [1, 0, 0]);
        assert_eq!(t.get(&[A]).unwrap().unwrap().counts(), [0, 1, 0]);
        assert_eq!(t.get(&[B]).unwrap().unwrap().counts(), [1, 0, 0]);
        assert_eq!(t.contexts(1).count(), 3);
        assert_eq!(t.context_count(&[A]).unwrap(), 1);
        assert_eq!(t.context_count(&[]).unwrap(), 3);
    }

    #[test]
    fn unseen_context_is_zero() {
        let t = count_ngrams(&tags_corpus(vec![vec!["A", "B", "A"]]), 3).unwrap();
        assert_eq!(t.context_count(&[B, B]).unwrap(), 0);
        let z = t.lookup(&[B, B]).unwrap();
        assert_eq!(z.counts(), [0, 0, 0]);
        assert_eq!(z.total(), 0);
    }

    #[test]
    fn context_length_and_order_are_checked() {
        let t = count_ngrams(&tags_corpus(vec![vec!["A"]]), 2).unwrap();
        assert_eq!(t.context_count(&[A, A]), Err(CountsError::ContextTooLong { len: 2, order: 2 }));
        assert!(matches!(count_ngrams(&tags_corpus(vec![vec!["A"]]), 0), Err(CountsError::InvalidOrder(0))));
    }

    #[test]
    fn order_one_empty_context_counts_all_tokens() {
        let c = tags_corpus(vec![vec!["A", "B"], vec!["C", "C", "A"]]);
        let t = count_ngrams(&c, 1).unwrap();
        assert_eq!(t.context_count(&[]).unwrap(), 5);
    }

    #[test]
    fn trigram_contexts_are_padded_per_sentence() {
        let c = tags_corpus(vec![vec!["A", "B"], vec!["B"]]);
        let t = count_ngrams(&c, 3).unwrap();
        let bb = [CtxTag::Boundary, CtxTag::Boundary];
        assert_eq!(t.get(&bb).unwrap().unwrap().counts(), [1, 1, 0]);
        assert_eq!(t.context_count(&[CtxTag::Boundary, A]).unwrap(), 1);
    }

    #[test]
    fn padded_history_shapes() {
        let a = TagId::new(0);
        let b = TagId::new(1);
        assert_eq!(padded_history(&[], 2), vec![CtxTag::Boundary, CtxTag::Boundary]);
        assert_eq!(padded_history(&[a], 2), vec![CtxTag::Boundary, A]);
        assert_eq!(padded_history(&[a, b, a], 2), vec![B, A]);
        assert!(padded_history(&[a], 0).is_empty());
    }

    #[test]
    fn lexicon_counts_ambiguous_word() {
        let tag_set = TagSet::new(["NN", "VB"]).unwrap();
        let c = Corpus::from_pairs(tag_set, vec![vec![("run", "VB"), ("run", "NN")]]).unwrap();
        let lex = build_lexicon(&c);
        let run = lex.get("run").unwrap();
        assert_eq!(run.counts(), [1, 1]);
        assert_eq!(run.total(), 2);
        assert!(lex.get("walk").is_none());
        assert_eq!(lex.token_count(), 2);
    }

    #[test]
    fn marginalization_on_a_single_long_sentence() {
        let cfg = SynthesisConfig {
            num_tags: 3,
            vocab_size: 20,
            num_train_tokens: 2_000,
            num_test_tokens: 1,
            seed: 11,
            zipf_exponent: 1.0,
        };
        let s = synthesize_corpus(&cfg).unwrap();
        let one: Vec<_> = s.train.sentences().iter().flatten().cloned().collect();
        let corpus = Corpus::new(s.train.tag_set().clone(), vec![one]).unwrap();
        let t = count_ngrams(&corpus, 4).unwrap();
        for k in 1..4 {
            let mut summed: BTreeMap<Vec<CtxTag>, Vec<u64>> = BTreeMap::new();
            for (ctx, counts) in t.contexts(k) {
                let entry = summed.entry(ctx[1..].to_vec()).or_insert_with(|| vec![0; 3]);
                for (e, &c) in entry.iter_mut().zip(counts.counts()) {
                    *e += c;
                }
            }
            for (ctx, counts) in t.contexts(k - 1) {
                assert_eq!(summed[ctx].as_slice(), counts.counts(), "context {ctx:?}");
            }
        }
    }

    proptest! {
        #[test]
        fn totals_match_and_sharded_counts_merge(
            sentences in prop::collection::vec(prop::collection::vec(0usize..3, 1..8), 1..12),
            cut in 0usize..12,
            order in 1usize..4,
        ) {
            let names = ["A", "B", "C"];
            let as_tags = |ss: &[Vec<usize>]| {
                tags_corpus(ss.iter().map(|s| s.iter().map(|&i| names[i]).collect()).collect())
            };
            let full = count_ngrams(&as_tags(&sentences), order).unwrap();
            for k in 0..order {
                for (_, c) in full.contexts(k) {
                    prop_assert_eq!(c.total(), c.counts().iter().sum::<u64>());
                }
            }
            let cut = cut.min(sentences.len());
            if cut > 0 && cut < sentences.len() {
                let mut left = count_ngrams(&as_tags(&sentences[..cut]), order).unwrap();
                let right = count_ngrams(&as_tags(&sentences[cut..]), order).unwrap();
                left.merge(&right).unwrap();
                prop_assert_eq!(left, full);
            }
        }
    }
}
