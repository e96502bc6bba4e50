//! Tagged corpora: the tag inventory, the token-per-line file format,
//! train/test splitting and a synthetic generator.
//!
//! The file format is one token per line, `word<TAB>tag`, with a blank
//! line between sentences. Lines starting with `#` are comments. Both LF
//! and CRLF line endings are read; LF is written.

mod synth;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{self, BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub use synth::{synthesize_corpus, GeneratorSpec, SynthesisConfig, SyntheticCorpus};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: tag `{tag}` is not in the declared tag set")]
    UndeclaredTag { line: usize, tag: String },
    #[error("invalid tag set: {0}")]
    InvalidTagSet(String),
    #[error("invalid corpus: {0}")]
    Invalid(String),
    #[error("cannot split a corpus of {0} sentence(s); at least 2 are required")]
    TooSmallToSplit(usize),
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("invalid synthesis config: {0}")]
    InvalidSynthesisConfig(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Index of a tag within a [`TagSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TagId(u32);

impl TagId {
    pub const fn new(index: usize) -> Self {
        assert!(index <= u32::MAX as usize, "tag index overflows u32");
        TagId(index as u32)
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for TagId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Ordered inventory of tag symbols with stable indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSet {
    tags: Vec<String>,
    index: HashMap<String, TagId>,
}

impl TagSet {
    /// Builds a tag set in the given order. Symbols must be unique,
    /// non-empty and free of line breaks and tabs.
    pub fn new<I, S>(symbols: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut tags = Vec::new();
        let mut index = HashMap::new();
        for symbol in symbols {
            let symbol = symbol.into();
            if symbol.is_empty() {
                return Err(CorpusError::InvalidTagSet("empty tag symbol".into()));
            }
            if symbol.contains(['\t', '\n', '\r']) {
                return Err(CorpusError::InvalidTagSet(format!("tag {symbol:?} contains a tab or line break")));
            }
            let id = TagId::new(tags.len());
            if index.insert(symbol.clone(), id).is_some() {
                return Err(CorpusError::InvalidTagSet(format!("duplicate tag `{symbol}`")));
            }
            tags.push(symbol);
        }
        Ok(TagSet { tags, index })
    }

    /// Tag set holding the distinct symbols in lexicographic order.
    pub fn from_observed<'a, I>(symbols: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let sorted: BTreeSet<&str> = symbols.into_iter().collect();
        TagSet::new(sorted)
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn get(&self, symbol: &str) -> Option<TagId> {
        self.index.get(symbol).copied()
    }

    /// Symbol for `id`. Panics if `id` does not belong to this set.
    pub fn symbol(&self, id: TagId) -> &str {
        &self.tags[id.index()]
    }

    pub fn symbols(&self) -> &[String] {
        &self.tags
    }

    pub fn ids(&self) -> impl Iterator<Item = TagId> + '_ {
        (0..self.tags.len()).map(TagId::new)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedToken {
    pub word: String,
    pub tag: TagId,
}

/// A list of non-empty tagged sentences over a fixed tag set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    sentences: Vec<Vec<TaggedToken>>,
    tag_set: TagSet,
}

fn check_word(word: &str) -> Result<(), String> {
    if word.is_empty() {
        return Err("empty word".into());
    }
    if word.contains(['\t', '\n', '\r']) {
        return Err(format!("word {word:?} contains a tab or line break"));
    }
    if word.starts_with('#') {
        return Err(format!("word {word:?} would be read back as a comment line"));
    }
    Ok(())
}

impl Corpus {
    pub fn new(tag_set: TagSet, sentences: Vec<Vec<TaggedToken>>) -> Result<Self, CorpusError> {
        for (i, sentence) in sentences.iter().enumerate() {
            if sentence.is_empty() {
                return Err(CorpusError::Invalid(format!("sentence {i} is empty")));
            }
            for token in sentence {
                check_word(&token.word).map_err(CorpusError::Invalid)?;
                if token.tag.index() >= tag_set.len() {
                    return Err(CorpusError::Invalid(format!(
                        "tag index {} outside a tag set of {}",
                        token.tag,
                        tag_set.len()
                    )));
                }
            }
        }
        Ok(Corpus { sentences, tag_set })
    }

    /// Builds a corpus from `(word, tag symbol)` pairs.
    pub fn from_pairs<W, T>(tag_set: TagSet, sentences: Vec<Vec<(W, T)>>) -> Result<Self, CorpusError>
    where
        W: Into<String>,
        T: AsRef<str>,
    {
        let mut out = Vec::with_capacity(sentences.len());
        for sentence in sentences {
            let mut tokens = Vec::with_capacity(sentence.len());
            for (word, tag) in sentence {
                let tag = tag.as_ref();
                let id =
                    tag_set.get(tag).ok_or_else(|| CorpusError::Invalid(format!("tag `{tag}` not in the tag set")))?;
                tokens.push(TaggedToken { word: word.into(), tag: id });
            }
            out.push(tokens);
        }
        Corpus::new(tag_set, out)
    }

    pub fn sentences(&self) -> &[Vec<TaggedToken>] {
        &self.sentences
    }

    pub fn tag_set(&self) -> &TagSet {
        &self.tag_set
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &TaggedToken> {
        self.sentences.iter().flatten()
    }

    /// The words of every sentence, tags dropped.
    pub fn word_sentences(&self) -> Vec<Vec<String>> {
        self.sentences.iter().map(|s| s.iter().map(|t| t.word.clone()).collect()).collect()
    }

    pub fn tag_sequences(&self) -> Vec<Vec<TagId>> {
        self.sentences.iter().map(|s| s.iter().map(|t| t.tag).collect()).collect()
    }
}

/// Reads a corpus in the token-per-line format.
///
/// Without `declared_tags` the tag set is the lexicographically sorted set
/// of observed tags; with it, the declared list is used verbatim and every
/// observed tag must belong to it.
pub fn parse_corpus<R: BufRead>(reader: R, declared_tags: Option<&[String]>) -> Result<Corpus, CorpusError> {
    let mut raw: Vec<Vec<(String, String, usize)>> = Vec::new();
    let mut current = Vec::new();

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            if !current.is_empty() {
                raw.push(std::mem::take(&mut current));
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let (word, tag) = match (fields.next(), fields.next(), fields.next()) {
            (Some(w), Some(t), None) if !w.is_empty() && !t.is_empty() => (w, t),
            _ => {
                return Err(CorpusError::Malformed {
                    line: line_no,
                    reason: "expected exactly two non-empty tab-separated fields (word, tag)".into(),
                })
            }
        };
        current.push((word.to_owned(), tag.to_owned(), line_no));
    }
    if !current.is_empty() {
        raw.push(current);
    }

    let tag_set = match declared_tags {
        Some(declared) => TagSet::new(declared.iter().cloned())?,
        None => TagSet::from_observed(raw.iter().flatten().map(|(_, t, _)| t.as_str()))?,
    };

    let mut sentences = Vec::with_capacity(raw.len());
    for sentence in raw {
        let mut tokens = Vec::with_capacity(sentence.len());
        for (word, tag, line) in sentence {
            let id = tag_set.get(&tag).ok_or(CorpusError::UndeclaredTag { line, tag })?;
            tokens.push(TaggedToken { word, tag: id });
        }
        sentences.push(tokens);
    }
    Corpus::new(tag_set, sentences)
}

/// Writes `corpus` in the token-per-line format, one blank line after
/// each sentence.
pub fn write_corpus<W: Write>(corpus: &Corpus, mut out: W) -> io::Result<()> {
    for sentence in &corpus.sentences {
        for token in sentence {
            writeln!(out, "{}\t{}", token.word, corpus.tag_set.symbol(token.tag))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Renders `corpus` to a string in the token-per-line format.
pub fn corpus_to_string(corpus: &Corpus) -> String {
    let mut buf = Vec::new();
    write_corpus(corpus, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("corpus text is UTF-8")
}

/// Splits at the sentence level into `(train, test)`.
///
/// The training part gets `round(train_fraction * n)` sentences, clamped
/// so both parts are non-empty. Sentences keep their original relative
/// order inside each part.
pub fn split_corpus(corpus: &Corpus, train_fraction: f64, seed: u64) -> Result<(Corpus, Corpus), CorpusError> {
    let n = corpus.sentences.len();
    if n < 2 {
        return Err(CorpusError::TooSmallToSplit(n));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(CorpusError::InvalidFraction(train_fraction));
    }
    let n_train = ((train_fraction * n as f64).round() as usize).clamp(1, n - 1);

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train_idx, test_idx) = order.split_at_mut(n_train);
    train_idx.sort_unstable();
    test_idx.sort_unstable();

    let pick = |idx: &[usize]| Corpus {
        sentences: idx.iter().map(|&i| corpus.sentences[i].clone()).collect(),
        tag_set: corpus.tag_set.clone(),
    };
    Ok((pick(train_idx), pick(test_idx)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy(n_sentences: usize) -> Corpus {
        let tags = TagSet::new(["A", "B"]).unwrap();
        let sentences = (0..n_sentences).map(|i| vec![(format!("w{i}"), "A"), (format!("v{i}"), "B")]).collect();
        Corpus::from_pairs(tags, sentences).unwrap()
    }

    #[test]
    fn parses_two_token_sentence() {
        let c = parse_corpus("the\tAT\ncat\tNN\n\n".as_bytes(), None).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.token_count(), 2);
        assert_eq!(c.tag_set().symbols(), ["AT", "NN"]);
        assert_eq!(c.sentences()[0][1].word, "cat");
    }

    #[test]
    fn empty_stream_is_empty_corpus() {
        let c = parse_corpus("".as_bytes(), None).unwrap();
        assert!(c.is_empty());
        assert!(c.tag_set().is_empty());
    }

    #[test]
    fn newline_instead_of_tab_is_rejected() {
        let err = parse_corpus("dog\nNN\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, CorpusError::Malformed { line: 1, .. }), "{err}");
    }

    #[test]
    fn three_fields_rejected_with_line_number() {
        let err = parse_corpus("a\tX\n\nb\tX\textra\n".as_bytes(), None).unwrap_err();
        assert!(matches!(err, CorpusError::Malformed { line: 3, .. }), "{err}");
    }

    #[test]
    fn comments_crlf_and_multiple_blank_lines() {
        let text = "# header\r\nthe\tAT\r\n\r\n\r\n# mid\r\ndog\tNN\r\n";
        let c = parse_corpus(text.as_bytes(), None).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.sentences()[1][0].word, "dog");
        assert_eq!(c.tag_set().symbol(c.sentences()[1][0].tag), "NN");
    }

    #[test]
    fn inferred_tag_set_is_sorted() {
        let c = parse_corpus("x\tZ\ny\tB\nz\tM\n".as_bytes(), None).unwrap();
        assert_eq!(c.tag_set().symbols(), ["B", "M", "Z"]);
    }

    #[test]
    fn declared_tags_used_verbatim() {
        let declared: Vec<String> = ["NN", "AT", "VB"].iter().map(|s| s.to_string()).collect();
        let c = parse_corpus("the\tAT\n".as_bytes(), Some(&declared)).unwrap();
        assert_eq!(c.tag_set().symbols(), ["NN", "AT", "VB"]);
        assert_eq!(c.sentences()[0][0].tag, TagId::new(1));

        let err = parse_corpus("the\tDT\n".as_bytes(), Some(&declared)).unwrap_err();
        assert!(matches!(err, CorpusError::UndeclaredTag { line: 1, .. }));
    }

    #[test]
    fn words_are_case_sensitive() {
        let c = parse_corpus("The\tAT\nthe\tAT\n".as_bytes(), None).unwrap();
        assert_ne!(c.sentences()[0][0].word, c.sentences()[0][1].word);
    }

    #[test]
    fn tag_set_rejects_duplicates_and_empties() {
        assert!(TagSet::new(["A", "A"]).is_err());
        assert!(TagSet::new([""]).is_err());
        let ts = TagSet::new(["A", "B", "C"]).unwrap();
        for (i, s) in ts.symbols().iter().enumerate() {
            assert_eq!(ts.get(s), Some(TagId::new(i)));
        }
    }

    #[test]
    fn split_sizes_and_determinism() {
        let c = toy(10);
        let (train, test) = split_corpus(&c, 0.8, 1).unwrap();
        assert_eq!((train.len(), test.len()), (8, 2));
        let again = split_corpus(&c, 0.8, 1).unwrap();
        assert_eq!(train, again.0);
        assert_eq!(test, again.1);
        assert_eq!(train.tag_set(), c.tag_set());
    }

    #[test]
    fn split_rejects_single_sentence_and_bad_fraction() {
        assert!(matches!(split_corpus(&toy(1), 0.5, 0), Err(CorpusError::TooSmallToSplit(1))));
        assert!(split_corpus(&toy(4), 1.0, 0).is_err());
        assert!(split_corpus(&toy(4), 0.0, 0).is_err());
    }

    #[test]
    fn split_clamps_to_non_empty_parts() {
        let (train, test) = split_corpus(&toy(3), 0.01, 9).unwrap();
        assert_eq!((train.len(), test.len()), (1, 2));
    }

    fn arb_corpus() -> impl Strategy<Value = Corpus> {
        let word = "[a-zA-Z0-9.,'-]{1,8}";
        let sentence = prop::collection::vec((word, 0usize..4), 1..6);
        prop::collection::vec(sentence, 0..6).prop_map(|sentences| {
            let tags = TagSet::new(["AT", "JJ", "NN", "VB"]).unwrap();
            let sentences = sentences
                .into_iter()
                .map(|s| s.into_iter().map(|(w, t)| TaggedToken { word: w, tag: TagId::new(t) }).collect())
                .collect();
            Corpus::new(tags, sentences).unwrap()
        })
    }

    proptest! {
        #[test]
        fn write_then_parse_round_trips(c in arb_corpus()) {
            let text = corpus_to_string(&c);
            let back = parse_corpus(text.as_bytes(), Some(c.tag_set().symbols())).unwrap();
            prop_assert_eq!(back, c);
        }

        #[test]
        fn split_partitions_sentences(n in 2usize..30, frac in 0.05f64..0.95, seed in any::<u64>()) {
            let c = toy(n);
            let (train, test) = split_corpus(&c, frac, seed).unwrap();
            let mut seen: Vec<&Vec<TaggedToken>> =
                train.sentences().iter().chain(test.sentences()).collect();
            prop_assert_eq!(seen.len(), n);
            seen.sort_by(|a, b| a[0].word.cmp(&b[0].word));
            seen.dedup();
            prop_assert_eq!(seen.len(), n);
        }
    }
}
