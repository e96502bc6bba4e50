//! Synthetic tagged corpora drawn from a random first-order hidden tag chain.
//!
//! Each word has a home tag and ends in one of that tag's suffixes, so
//! suffixes carry real evidence about the tag of an unseen word. Each tag
//! also emits a few words borrowed from other tags, which makes part of
//! the vocabulary ambiguous.

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use serde::Serialize;

use super::{Corpus, CorpusError, TagId, TagSet, TaggedToken};

const MIN_SENTENCE_LEN: usize = 5;
const MAX_SENTENCE_LEN: usize = 25;
/// Gamma shape for the rows of the transition matrix; below 1 gives peaked rows.
const TRANSITION_CONCENTRATION: f64 = 0.5;
const TRANSITION_FLOOR: f64 = 0.01;
const SUFFIXES_PER_TAG: usize = 2;
/// Borrowed (ambiguous) words per tag, as a fraction of its home words.
const BORROW_FRACTION: f64 = 0.25;

const CONSONANTS: &[u8] = b"bdfgklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisConfig {
    pub num_tags: usize,
    pub vocab_size: usize,
    pub num_train_tokens: usize,
    pub num_test_tokens: usize,
    pub seed: u64,
    /// Zipf exponent of each tag's word distribution.
    pub zipf_exponent: f64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            num_tags: 8,
            vocab_size: 500,
            num_train_tokens: 50_000,
            num_test_tokens: 5_000,
            seed: 42,
            zipf_exponent: 2.0,
        }
    }
}

impl SynthesisConfig {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let fail = |m: &str| Err(CorpusError::InvalidSynthesisConfig(m.to_owned()));
        if self.num_tags < 2 {
            return fail("num_tags must be at least 2");
        }
        if self.vocab_size < self.num_tags {
            return fail("vocab_size must be at least num_tags");
        }
        if self.num_train_tokens == 0 || self.num_test_tokens == 0 {
            return fail("token counts must be positive");
        }
        if !(self.zipf_exponent > 0.0 && self.zipf_exponent.is_finite()) {
            return fail("zipf_exponent must be a positive real");
        }
        Ok(())
    }
}

/// The true distributions a synthetic corpus was sampled from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorSpec {
    pub tags: Vec<String>,
    /// Distribution of the first tag of a sentence.
    pub initial: Vec<f64>,
    /// `transition[i][j]` is P(next tag j | tag i).
    pub transition: Vec<Vec<f64>>,
    pub vocabulary: Vec<String>,
    pub home_tag: Vec<usize>,
    /// `emission[t][w]` is P(word w | tag t).
    pub emission: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub train: Corpus,
    pub test: Corpus,
    pub spec: GeneratorSpec,
}

pub fn synthesize_corpus(cfg: &SynthesisConfig) -> Result<SyntheticCorpus, CorpusError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let spec = random_generator(cfg, &mut rng);
    let tag_set = TagSet::new(spec.tags.iter().cloned())?;

    let sampler = Sampler::new(&spec);
    let train = sampler.sample(&mut rng, cfg.num_train_tokens);
    let test = sampler.sample(&mut rng, cfg.num_test_tokens);
    Ok(SyntheticCorpus { train: Corpus::new(tag_set.clone(), train)?, test: Corpus::new(tag_set, test)?, spec })
}

fn random_generator(cfg: &SynthesisConfig, rng: &mut ChaCha8Rng) -> GeneratorSpec {
    let n = cfg.num_tags;
    let width = (n - 1).to_string().len();
    let tags: Vec<String> = (0..n).map(|i| format!("T{i:0width$}")).collect();

    let gamma = Gamma::new(TRANSITION_CONCENTRATION, 1.0).expect("valid gamma parameters");
    let random_row = |rng: &mut ChaCha8Rng| {
        let raw: Vec<f64> = (0..n).map(|_| gamma.sample(rng) + TRANSITION_FLOOR).collect();
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / sum).collect::<Vec<f64>>()
    };
    let initial = random_row(rng);
    let transition: Vec<Vec<f64>> = (0..n).map(|_| random_row(rng)).collect();

    let suffixes = random_suffixes(n, rng);
    let mut home_tag: Vec<usize> = (0..cfg.vocab_size).map(|w| w % n).collect();
    home_tag.shuffle(rng);

    let mut seen = HashSet::new();
    let vocabulary: Vec<String> = home_tag
        .iter()
        .map(|&t| loop {
            let word = random_stem(rng) + suffixes[t].choose(rng).expect("non-empty suffix list");
            if seen.insert(word.clone()) {
                break word;
            }
        })
        .collect();

    let emission = (0..n)
        .map(|t| {
            let mut list: Vec<usize> = (0..cfg.vocab_size).filter(|&w| home_tag[w] == t).collect();
            let others: Vec<usize> = (0..cfg.vocab_size).filter(|&w| home_tag[w] != t).collect();
            let borrow = ((list.len() as f64) * BORROW_FRACTION).round() as usize;
            list.extend(others.choose_multiple(rng, borrow));
            list.shuffle(rng);

            let mut row = vec![0.0; cfg.vocab_size];
            for (rank, &w) in list.iter().enumerate() {
                row[w] = 1.0 / ((rank + 1) as f64).powf(cfg.zipf_exponent);
            }
            let sum: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= sum);
            row
        })
        .collect();

    GeneratorSpec { tags, initial, transition, vocabulary, home_tag, emission }
}

fn random_suffixes(num_tags: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    let mut used = HashSet::new();
    (0..num_tags)
        .map(|_| {
            (0..SUFFIXES_PER_TAG)
                .map(|_| loop {
                    let len = rng.random_range(2..=3);
                    let s: String = (0..len)
                        .map(|i| {
                            let pool = if i % 2 == 0 { VOWELS } else { CONSONANTS };
                            *pool.choose(rng).unwrap() as char
                        })
                        .collect();
                    if used.insert(s.clone()) {
                        break s;
                    }
                })
                .collect()
        })
        .collect()
}

fn random_stem(rng: &mut ChaCha8Rng) -> String {
    let syllables = rng.random_range(1..=3);
    let mut stem = String::new();
    for _ in 0..syllables {
        stem.push(*CONSONANTS.choose(rng).unwrap() as char);
        stem.push(*VOWELS.choose(rng).unwrap() as char);
    }
    stem
}

struct Sampler<'a> {
    spec: &'a GeneratorSpec,
    initial: WeightedIndex<f64>,
    transition: Vec<WeightedIndex<f64>>,
    emission: Vec<WeightedIndex<f64>>,
}

impl<'a> Sampler<'a> {
    fn new(spec: &'a GeneratorSpec) -> Self {
        let weighted = |row: &Vec<f64>| WeightedIndex::new(row).expect("positive weights");
        Sampler {
            spec,
            initial: weighted(&spec.initial),
            transition: spec.transition.iter().map(weighted).collect(),
            emission: spec.emission.iter().map(weighted).collect(),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng, num_tokens: usize) -> Vec<Vec<TaggedToken>> {
        let mut sentences = Vec::new();
        let mut remaining = num_tokens;
        while remaining > 0 {
            let len = rng.random_range(MIN_SENTENCE_LEN..=MAX_SENTENCE_LEN).min(remaining);
            remaining -= len;
            let mut tag = self.initial.sample(rng);
            let mut sentence = Vec::with_capacity(len);
            for i in 0..len {
                if i > 0 {
                    tag = self.transition[tag].sample(rng);
                }
                let word = self.emission[tag].sample(rng);
                sentence.push(TaggedToken { word: self.spec.vocabulary[word].clone(), tag: TagId::new(tag) });
            }
            sentences.push(sentence);
        }
        sentences
    }
}
