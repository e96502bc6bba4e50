use thiserror::Error;

use crate::corpus::CorpusError;
use crate::counts::CountsError;
use crate::evaluation::EvalError;
use crate::lexicon::LexicalError;
use crate::model_file::ModelFileError;
use crate::smoothing::SmoothingError;
use crate::tagger::TaggerError;

/// Any error produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Counts(#[from] CountsError),
    #[error(transparent)]
    Smoothing(#[from] SmoothingError),
    #[error(transparent)]
    Lexical(#[from] LexicalError),
    #[error(transparent)]
    Tagger(#[from] TaggerError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    ModelFile(#[from] ModelFileError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
