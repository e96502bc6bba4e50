//! Successive-abstraction smoothing for sparse conditional distributions,
//! and a statistical n-gram part-of-speech tagger built on top of it.
//!
//! The crate is organized bottom-up:
//!
//! * [`corpus`] reads, writes, splits and synthesizes tagged corpora.
//! * [`counts`] accumulates tag n-gram counts, the word lexicon and the
//!   reversed suffix trie over rare words.
//! * [`smoothing`] holds the estimators: the successive-abstraction
//!   recurrence over chains and generalization DAGs, plus expected
//!   likelihood estimation and linear interpolation baselines.
//! * [`lexicon`] turns word and suffix statistics into lexical
//!   distributions `P(tag | word)`.
//! * [`tagger`] bundles everything into a [`tagger::Model`] and decodes
//!   with Viterbi.
//! * [`evaluation`] scores tagger output and compares systems.
//! * [`model_file`] persists a trained model as line-oriented text.
//!
//! ```
//! use succabs::corpus::parse_corpus;
//! use succabs::tagger::{Model, TrainConfig};
//!
//! let text = "the\tAT\ncat\tNN\nsat\tVB\n\nthe\tAT\ndog\tNN\nran\tVB\n\n";
//! let corpus = parse_corpus(text.as_bytes(), None).unwrap();
//! let model = Model::train(&corpus, &TrainConfig::default()).unwrap();
//! let tags = model.tag_words(&["the", "cat", "ran"]).unwrap();
//! assert_eq!(tags, vec!["AT", "NN", "VB"]);
//! ```

pub mod corpus;
pub mod counts;
pub mod evaluation;
pub mod lexicon;
pub mod model_file;
pub mod smoothing;
pub mod tagger;

mod error;

pub use error::{Error, Result};
