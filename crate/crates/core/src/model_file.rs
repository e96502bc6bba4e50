//! Line-oriented text serialization of a trained [`Model`].
//!
//! ```text
//! SUCCABS<TAB>1
//! [metadata]
//! order<TAB>3
//! ...
//! [tags]<TAB>n
//! one symbol per line
//! [unigram]
//! p_0<TAB>...<TAB>p_{n-1}
//! [lambdas]                      (interpolated models only)
//! λ_1<TAB>...<TAB>λ_order
//! [root]
//! p_0<TAB>...                    unigram level of the transition model
//! [contexts]<TAB>len<TAB>count   (one block per context length 1 to order - 1)
//! context<TAB>p_0<TAB>...        context = comma-separated tag indices, `^` for the sentence start
//! [lexicon]<TAB>count
//! word<TAB>tag:count tag:count ...
//! [trie]<TAB>nodes
//! parent<TAB>letter<TAB>tag:count ...   root row uses `-` for parent and letter;
//!                                       letters are `u+XXXX` code points or `^` for word start
//! [unknown_root]
//! p_0<TAB>...
//! [end]
//! ```
//!
//! Probabilities are written with 17 significant digits, which is enough
//! to read back the exact same `f64`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::corpus::{TagId, TagSet};
use crate::counts::{CtxTag, Lexicon, RareWordPolicy, SuffixLetter, SuffixTrie, WordEntry};
use crate::lexicon::UnknownWordModel;
use crate::smoothing::{
    ConditionalDistribution, InterpolatedNGramModel, InterpolationWeights, RootMode, SmoothedNGramModel,
    SuccessiveAbstraction, TransitionModel,
};
use crate::tagger::{Model, ModelMetadata, SmoothingKind};

pub const MAGIC: &str = "SUCCABS";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("not a model file (missing {MAGIC} header)")]
    BadMagic,
    #[error("model file format version {found} is not supported (expected {FORMAT_VERSION})")]
    UnsupportedVersion { found: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("model file ends early: expected {0}")]
    UnexpectedEnd(String),
    #[error("inconsistent model: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn float(x: f64) -> String {
    format!("{x:.16e}")
}

fn floats(xs: &[f64]) -> String {
    xs.iter().map(|&x| float(x)).collect::<Vec<_>>().join("\t")
}

fn sparse(counts: &[u64]) -> String {
    counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(i, c)| format!("{i}:{c}")).collect::<Vec<_>>().join(" ")
}

fn context_key(ctx: &[CtxTag]) -> String {
    ctx.iter()
        .map(|c| match c {
            CtxTag::Boundary => "^".to_owned(),
            CtxTag::Tag(t) => t.index().to_string(),
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn letter_key(l: SuffixLetter) -> String {
    match l {
        SuffixLetter::WordStart => "^".to_owned(),
        SuffixLetter::Char(c) => format!("u+{:04X}", c as u32),
    }
}

/// Renders `model` in the text format. Equal models give equal text.
pub fn model_to_string(model: &Model) -> String {
    let mut out = String::new();
    let meta = model.metadata();
    let n = model.tag_set().len();
    writeln!(out, "{MAGIC}\t{FORMAT_VERSION}").unwrap();
    out.push_str("[metadata]\n");
    writeln!(out, "order\t{}", meta.order).unwrap();
    writeln!(out, "rare_threshold\t{}", meta.policy.frequency_threshold).unwrap();
    writeln!(out, "max_suffix\t{}", meta.policy.max_suffix_length).unwrap();
    writeln!(out, "root_mode\t{}", meta.root_mode).unwrap();
    writeln!(out, "sigma_scale\t{}", float(meta.sigma_scale)).unwrap();
    writeln!(out, "smoothing\t{}", meta.smoothing).unwrap();
    writeln!(out, "corpus_sha256\t{}", meta.corpus_digest).unwrap();
    writeln!(out, "train_tokens\t{}", meta.train_tokens).unwrap();

    writeln!(out, "[tags]\t{n}").unwrap();
    for s in model.tag_set().symbols() {
        writeln!(out, "{s}").unwrap();
    }
    writeln!(out, "[unigram]\n{}", floats(model.unigram().probs())).unwrap();

    let transition = model.transition();
    if let TransitionModel::Interpolated(m) = transition {
        writeln!(out, "[lambdas]\n{}", floats(m.weights().as_slice())).unwrap();
    }
    writeln!(out, "[root]\n{}", floats(transition.root().probs())).unwrap();
    for len in 1..transition.order() {
        let rows: Vec<(&[CtxTag], &ConditionalDistribution)> = match transition {
            TransitionModel::Smoothed(m) => m.contexts(len).collect(),
            TransitionModel::Interpolated(m) => m.contexts(len).collect(),
        };
        writeln!(out, "[contexts]\t{len}\t{}", rows.len()).unwrap();
        for (ctx, dist) in rows {
            writeln!(out, "{}\t{}", context_key(ctx), floats(dist.probs())).unwrap();
        }
    }

    writeln!(out, "[lexicon]\t{}", model.lexicon().len()).unwrap();
    for (word, entry) in model.lexicon().iter() {
        writeln!(out, "{word}\t{}", sparse(entry.counts())).unwrap();
    }

    let unknown = model.unknown_model();
    let trie = unknown.trie();
    writeln!(out, "[trie]\t{}", trie.len()).unwrap();
    for node in trie.nodes() {
        let parent = node.parent().map_or("-".to_owned(), |p| p.to_string());
        let letter = node.letter().map_or("-".to_owned(), letter_key);
        writeln!(out, "{parent}\t{letter}\t{}", sparse(node.counts())).unwrap();
    }
    writeln!(out, "[unknown_root]\n{}", floats(unknown.root().probs())).unwrap();
    out.push_str("[end]\n");
    out
}

pub fn write_model<W: Write>(model: &Model, mut out: W) -> io::Result<()> {
    out.write_all(model_to_string(model).as_bytes())
}

pub fn save_model(model: &Model, path: impl AsRef<Path>) -> io::Result<()> {
    fs::write(path, model_to_string(model))
}

struct Lines<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str, ModelFileError> {
        let (i, l) = self.lines.next().ok_or_else(|| ModelFileError::UnexpectedEnd(what.to_owned()))?;
        self.line = i + 1;
        Ok(l)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ModelFileError> {
        Err(ModelFileError::Syntax { line: self.line, message: message.into() })
    }

    /// Reads a `[name]` header and returns its tab-separated arguments.
    fn header(&mut self, name: &str) -> Result<Vec<&'a str>, ModelFileError> {
        let line = self.next(&format!("[{name}]"))?;
        let mut fields = line.split('\t');
        if fields.next() != Some(&format!("[{name}]")) {
            return self.err(format!("expected [{name}], found `{line}`"));
        }
        Ok(fields.collect())
    }

    fn counted_header(&mut self, name: &str, args: usize) -> Result<Vec<usize>, ModelFileError> {
        let fields = self.header(name)?;
        if fields.len() != args {
            return self.err(format!("[{name}] takes {args} arguments"));
        }
        fields.iter().map(|f| self.parse(f)).collect()
    }

    fn parse<T: std::str::FromStr>(&self, s: &str) -> Result<T, ModelFileError> {
        s.parse().or_else(|_| self.err(format!("cannot parse `{s}`")))
    }

    fn key(&mut self, key: &str) -> Result<&'a str, ModelFileError> {
        let line = self.next(key)?;
        match line.split_once('\t') {
            Some((k, v)) if k == key => Ok(v),
            _ => self.err(format!("expected `{key}`, found `{line}`")),
        }
    }

    fn floats(&self, s: &str, n: usize) -> Result<Vec<f64>, ModelFileError> {
        let xs = s.split('\t').map(|f| self.parse(f)).collect::<Result<Vec<f64>, _>>()?;
        if xs.len() != n {
            return self.err(format!("expected {n} numbers, found {}", xs.len()));
        }
        Ok(xs)
    }

    fn distribution(&mut self, name: &str, n: usize) -> Result<ConditionalDistribution, ModelFileError> {
        self.header(name)?;
        let line = self.next(name)?;
        let probs = self.floats(line, n)?;
        ConditionalDistribution::new(probs).or_else(|e| self.err(e.to_string()))
    }

    fn sparse(&self, s: &str, n: usize) -> Result<Vec<u64>, ModelFileError> {
        let mut counts = vec![0; n];
        for item in s.split(' ').filter(|x| !x.is_empty()) {
            let Some((i, c)) = item.split_once(':') else {
                return self.err(format!("bad count `{item}`"));
            };
            let i: usize = self.parse(i)?;
            if i >= n {
                return self.err(format!("tag index {i} out of range"));
            }
            counts[i] = self.parse(c)?;
        }
        Ok(counts)
    }

    fn context(&self, s: &str, len: usize, n: usize) -> Result<Vec<CtxTag>, ModelFileError> {
        let ctx = s
            .split(',')
            .map(|f| match f {
                "^" => Ok(CtxTag::Boundary),
                _ => match self.parse::<usize>(f)? {
                    i if i < n => Ok(CtxTag::Tag(TagId::new(i))),
                    i => self.err(format!("tag index {i} out of range")),
                },
            })
            .collect::<Result<Vec<_>, _>>()?;
        if ctx.len() != len {
            return self.err(format!("context `{s}` should have {len} positions"));
        }
        Ok(ctx)
    }

    fn letter(&self, s: &str) -> Result<Option<SuffixLetter>, ModelFileError> {
        match s {
            "-" => Ok(None),
            "^" => Ok(Some(SuffixLetter::WordStart)),
            _ => {
                let code = s.strip_prefix("u+").and_then(|h| u32::from_str_radix(h, 16).ok()).and_then(char::from_u32);
                match code {
                    Some(c) => Ok(Some(SuffixLetter::Char(c))),
                    None => self.err(format!("bad trie letter `{s}`")),
                }
            }
        }
    }
}

fn invalid(e: impl ToString) -> ModelFileError {
    ModelFileError::Invalid(e.to_string())
}

/// Parses a model written by [`model_to_string`].
pub fn model_from_str(text: &str) -> Result<Model, ModelFileError> {
    let mut r = Lines { lines: text.lines().enumerate(), line: 0 };
    let first = r.lines.next().map(|(_, l)| l).unwrap_or("");
    r.line = 1;
    let Some((magic, version)) = first.split_once('\t') else {
        return Err(ModelFileError::BadMagic);
    };
    if magic != MAGIC {
        return Err(ModelFileError::BadMagic);
    }
    if version != FORMAT_VERSION.to_string() {
        return Err(ModelFileError::UnsupportedVersion { found: version.to_owned() });
    }

    r.header("metadata")?;
    let order: usize = {
        let v = r.key("order")?;
        r.parse(v)?
    };
    let threshold: u64 = {
        let v = r.key("rare_threshold")?;
        r.parse(v)?
    };
    let max_suffix: usize = {
        let v = r.key("max_suffix")?;
        r.parse(v)?
    };
    let root_mode: RootMode = {
        let v = r.key("root_mode")?;
        r.parse(v)?
    };
    let sigma_scale: f64 = {
        let v = r.key("sigma_scale")?;
        r.parse(v)?
    };
    let smoothing: SmoothingKind = {
        let v = r.key("smoothing")?;
        r.parse(v)?
    };
    let corpus_digest = r.key("corpus_sha256")?.to_owned();
    let train_tokens: u64 = {
        let v = r.key("train_tokens")?;
        r.parse(v)?
    };
    if order == 0 {
        return r.err("order must be positive");
    }
    let policy = RareWordPolicy::new(threshold, max_suffix).map_err(invalid)?;

    let n = r.counted_header("tags", 1)?[0];
    let symbols = (0..n).map(|_| r.next("tag symbol")).collect::<Result<Vec<_>, _>>()?;
    let tag_set = TagSet::new(symbols).map_err(invalid)?;
    let unigram = r.distribution("unigram", n)?;

    let weights = match smoothing {
        SmoothingKind::Interp => {
            r.header("lambdas")?;
            let line = r.next("lambdas")?;
            Some(InterpolationWeights::new(r.floats(line, order)?).map_err(invalid)?)
        }
        _ => None,
    };
    let root = r.distribution("root", n)?;
    let mut contexts = Vec::with_capacity(order - 1);
    for len in 1..order {
        let args = r.counted_header("contexts", 2)?;
        if args[0] != len {
            return r.err(format!("expected contexts of length {len}"));
        }
        let mut map = BTreeMap::new();
        for _ in 0..args[1] {
            let line = r.next("context row")?;
            let Some((key, probs)) = line.split_once('\t') else {
                return r.err("context row without probabilities");
            };
            let ctx = r.context(key, len, n)?;
            let dist = ConditionalDistribution::new(r.floats(probs, n)?).or_else(|e| r.err(e.to_string()))?;
            if map.insert(ctx, dist).is_some() {
                return r.err(format!("context `{key}` listed twice"));
            }
        }
        contexts.push(map);
    }
    let transition = match weights {
        Some(w) => TransitionModel::Interpolated(
            InterpolatedNGramModel::from_parts(order, root, contexts, w).map_err(invalid)?,
        ),
        None => TransitionModel::Smoothed(SmoothedNGramModel::from_parts(order, root, contexts).map_err(invalid)?),
    };

    let words = r.counted_header("lexicon", 1)?[0];
    let mut entries = Vec::with_capacity(words);
    for _ in 0..words {
        let line = r.next("lexicon row")?;
        let Some((word, counts)) = line.split_once('\t') else {
            return r.err("lexicon row without counts");
        };
        let counts = r.sparse(counts, n)?;
        if counts.iter().all(|&c| c == 0) {
            return r.err(format!("word `{word}` has no counts"));
        }
        entries.push((word.to_owned(), WordEntry::new(counts)));
    }
    if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(invalid("lexicon words are not sorted and unique"));
    }
    let lexicon = Lexicon::from_entries(n, entries).map_err(invalid)?;

    let nodes = r.counted_header("trie", 1)?[0];
    let mut rows = Vec::with_capacity(nodes);
    for _ in 0..nodes {
        let line = r.next("trie row")?;
        let fields: Vec<&str> = line.split('\t').collect();
        let [parent, letter, counts] = fields[..] else {
            return r.err("trie rows have three fields");
        };
        let parent = match parent {
            "-" => None,
            p => Some(r.parse::<usize>(p)?),
        };
        rows.push((parent, r.letter(letter)?, r.sparse(counts, n)?));
    }
    let trie = SuffixTrie::from_rows(n, max_suffix, rows).map_err(invalid)?;
    let unknown_root = r.distribution("unknown_root", n)?;
    r.header("end")?;
    if let Some((i, extra)) = r.lines.find(|(_, l)| !l.is_empty()) {
        return Err(ModelFileError::Syntax { line: i + 1, message: format!("unexpected `{extra}` after [end]") });
    }

    let unknown = UnknownWordModel::from_parts(trie, unknown_root, policy, SuccessiveAbstraction::new(sigma_scale))
        .map_err(invalid)?;
    let metadata = ModelMetadata { order, policy, root_mode, sigma_scale, smoothing, corpus_digest, train_tokens };
    Model::from_parts(tag_set, transition, lexicon, unknown, unigram, metadata).map_err(invalid)
}

pub fn read_model<R: Read>(mut input: R) -> Result<Model, ModelFileError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    model_from_str(&text)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model, ModelFileError> {
    model_from_str(&fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Corpus;
    use crate::tagger::{Smoothing, TrainConfig};

    fn corpus() -> Corpus {
        let tags = TagSet::new(["AT", "NN", "VB", "X Y"]).unwrap();
        Corpus::from_pairs(
            tags,
            vec![
                vec![("the", "AT"), ("dog", "NN"), ("barks", "VB")],
                vec![("the", "AT"), ("café", "NN"), ("opens", "VB"), ("!", "X Y")],
                vec![("dogs", "NN"), ("bark", "VB")],
            ],
        )
        .unwrap()
    }

    fn configs() -> Vec<TrainConfig> {
        let w = InterpolationWeights::new(vec![0.2, 0.3, 0.5]).unwrap();
        vec![
            TrainConfig::default(),
            TrainConfig { order: 1, root_mode: RootMode::RelativeFrequency, ..TrainConfig::default() },
            TrainConfig { smoothing: Smoothing::Ele, sigma_scale: 0.3, ..TrainConfig::default() },
            TrainConfig { smoothing: Smoothing::Interp(w), ..TrainConfig::default() },
        ]
    }

    #[test]
    fn round_trip_is_exact() {
        for cfg in configs() {
            let model = Model::train(&corpus(), &cfg).unwrap();
            let text = model_to_string(&model);
            let back = model_from_str(&text).unwrap();
            assert_eq!(back, model);
            assert_eq!(model_to_string(&back), text);
        }
    }

    #[test]
    fn header_checks() {
        let text = model_to_string(&Model::train(&corpus(), &TrainConfig::default()).unwrap());
        assert!(matches!(model_from_str("hello"), Err(ModelFileError::BadMagic)));
        let bumped = text.replacen("SUCCABS\t1", "SUCCABS\t2", 1);
        assert!(matches!(model_from_str(&bumped), Err(ModelFileError::UnsupportedVersion { .. })));
        let cut = &text[..text.len() / 2];
        assert!(model_from_str(cut).is_err());
    }

    #[test]
    fn damaged_probabilities_rejected() {
        let text = model_to_string(&Model::train(&corpus(), &TrainConfig::default()).unwrap());
        let mut lines: Vec<&str> = text.lines().collect();
        let i = lines.iter().position(|l| *l == "[unigram]").unwrap() + 1;
        lines[i] = "1\t1\t1\t1";
        let damaged = lines.join("\n");
        assert!(matches!(model_from_str(&damaged), Err(ModelFileError::Syntax { .. })));
    }
}
