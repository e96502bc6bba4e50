//! Grid search for interpolation weights against held-out data.

use std::str::FromStr;

use super::{DecodeOptions, Model, TaggerError};
use crate::corpus::{Corpus, TagId};
use crate::counts::padded_history;
use crate::smoothing::{grid_search_lambdas, GridSearchResult, TransitionModel};

/// What the weight search maximizes on the held-out corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TuningObjective {
    /// Log probability of the gold tag sequences under the transition model.
    LogLikelihood,
    /// Fraction of tokens the tagger gets right.
    Accuracy,
}

impl FromStr for TuningObjective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "loglik" => Ok(TuningObjective::LogLikelihood),
            "accuracy" => Ok(TuningObjective::Accuracy),
            _ => Err(format!("unknown objective `{s}` (expected loglik or accuracy)")),
        }
    }
}

fn model_tags(model: &Model, corpus: &Corpus) -> Result<Vec<Vec<TagId>>, TaggerError> {
    corpus
        .sentences()
        .iter()
        .map(|s| {
            s.iter()
                .map(|tok| {
                    let symbol = corpus.tag_set().symbol(tok.tag);
                    model.tag_set().get(symbol).ok_or_else(|| TaggerError::UnknownTagSymbol(symbol.to_owned()))
                })
                .collect()
        })
        .collect()
}

/// `Σ ln P(tag | previous tags)` over every gold token of `corpus`.
pub fn held_out_log_likelihood(model: &Model, corpus: &Corpus) -> Result<f64, TaggerError> {
    let order = model.order();
    let mut total = 0.0;
    for tags in model_tags(model, corpus)? {
        for (k, tag) in tags.iter().enumerate() {
            let history = padded_history(&tags[..k], order - 1);
            total += model.transition().distribution(&history).prob(tag.index()).ln();
        }
    }
    Ok(total)
}

/// Share of tokens whose predicted tag symbol equals the gold symbol.
pub fn tagging_accuracy(model: &Model, corpus: &Corpus, options: DecodeOptions) -> Result<f64, TaggerError> {
    let predicted = model.tag_corpus(&corpus.word_sentences(), options)?;
    let mut right = 0usize;
    for (gold, pred) in corpus.sentences().iter().zip(&predicted) {
        right +=
            gold.iter().zip(pred).filter(|(g, &p)| corpus.tag_set().symbol(g.tag) == model.tag_set().symbol(p)).count();
    }
    Ok(right as f64 / corpus.token_count().max(1) as f64)
}

/// Searches the weight simplex with spacing `step` and returns the model
/// with the best weights. `model` must use an interpolated transition.
pub fn tune_interpolation(
    model: &Model,
    held_out: &Corpus,
    step: f64,
    objective: TuningObjective,
    options: DecodeOptions,
) -> Result<(Model, GridSearchResult), TaggerError> {
    let TransitionModel::Interpolated(base) = model.transition() else {
        return Err(TaggerError::InvalidConfig("weight tuning needs an interpolated model".into()));
    };
    let mut failure = None;
    let result = grid_search_lambdas(model.order(), step, |weights| {
        let scored = base
            .with_weights(weights.clone())
            .map_err(TaggerError::from)
            .and_then(|t| model.with_transition(TransitionModel::Interpolated(t)))
            .and_then(|m| match objective {
                TuningObjective::LogLikelihood => held_out_log_likelihood(&m, held_out),
                TuningObjective::Accuracy => tagging_accuracy(&m, held_out, options),
            });
        scored.unwrap_or_else(|e| {
            failure.get_or_insert(e);
            f64::NAN
        })
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let best = model.with_transition(TransitionModel::Interpolated(base.with_weights(result.weights.clone())?))?;
    Ok((best, result))
}
