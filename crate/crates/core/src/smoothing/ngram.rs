//! Tag n-gram transition models built from an [`NGramCountTable`].

use std::borrow::Cow;
use std::collections::BTreeMap;

use super::{
    ele_estimate, interpolate, ConditionalDistribution, InterpolationWeights, RootMode, SmoothingError,
    SuccessiveAbstraction,
};
use crate::counts::{CtxTag, NGramCountTable};

type ContextMap = BTreeMap<Vec<CtxTag>, ConditionalDistribution>;

/// Smoothed distributions for every observed context, plus the root.
///
/// Unobserved contexts resolve to their longest observed generalization,
/// which is exactly what the recurrence yields for a zero count.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedNGramModel {
    order: usize,
    root: ConditionalDistribution,
    /// `contexts[k - 1]` holds contexts of length `k`.
    contexts: Vec<ContextMap>,
}

impl SmoothedNGramModel {
    pub fn from_parts(
        order: usize,
        root: ConditionalDistribution,
        contexts: Vec<ContextMap>,
    ) -> Result<Self, SmoothingError> {
        check_context_maps(order, &root, &contexts)?;
        Ok(SmoothedNGramModel { order, root, contexts })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_tags(&self) -> usize {
        self.root.len()
    }

    pub fn root(&self) -> &ConditionalDistribution {
        &self.root
    }

    /// The stored distribution for exactly `context`, if it was observed.
    pub fn get(&self, context: &[CtxTag]) -> Option<&ConditionalDistribution> {
        match context.len() {
            0 => Some(&self.root),
            k if k < self.order => self.contexts[k - 1].get(context),
            _ => None,
        }
    }

    /// Distribution of the next tag after `history`, using its longest
    /// observed suffix of at most `order - 1` positions.
    pub fn distribution(&self, history: &[CtxTag]) -> &ConditionalDistribution {
        let max = history.len().min(self.order - 1);
        (1..=max).rev().find_map(|k| self.contexts[k - 1].get(&history[history.len() - k..])).unwrap_or(&self.root)
    }

    pub fn contexts(&self, len: usize) -> impl Iterator<Item = (&[CtxTag], &ConditionalDistribution)> {
        self.contexts[len - 1].iter().map(|(k, v)| (k.as_slice(), v))
    }
}

fn check_context_maps(
    order: usize,
    root: &ConditionalDistribution,
    contexts: &[ContextMap],
) -> Result<(), SmoothingError> {
    if order < 1 || contexts.len() != order - 1 {
        return Err(SmoothingError::InvalidGraph(format!(
            "{} context tables for an order-{order} model",
            contexts.len()
        )));
    }
    for (i, map) in contexts.iter().enumerate() {
        for (ctx, dist) in map {
            if ctx.len() != i + 1 {
                return Err(SmoothingError::InvalidGraph(format!(
                    "context of length {} stored with length {}",
                    ctx.len(),
                    i + 1
                )));
            }
            if dist.len() != root.len() {
                return Err(SmoothingError::DimensionMismatch { expected: root.len(), got: dist.len() });
            }
        }
    }
    Ok(())
}

fn root_distribution(counts: &NGramCountTable, root_mode: RootMode) -> Result<ConditionalDistribution, SmoothingError> {
    if counts.num_tags() == 0 {
        return Err(SmoothingError::NoData);
    }
    root_mode.estimate(counts.unigram().counts())
}

/// Successive abstraction along the chain that strips the oldest tag first:
/// each observed context of length `k` is smoothed against its own
/// length-`k - 1` suffix.
pub fn build_sa_ngram_model(
    counts: &NGramCountTable,
    root_mode: RootMode,
    sa: &SuccessiveAbstraction,
) -> Result<SmoothedNGramModel, SmoothingError> {
    let root = root_distribution(counts, root_mode)?;
    let mut contexts: Vec<ContextMap> = Vec::with_capacity(counts.order() - 1);
    for len in 1..counts.order() {
        let mut map = ContextMap::new();
        for (ctx, c) in counts.contexts(len) {
            let parent = match len {
                1 => &root,
                _ => contexts[len - 2].get(&ctx[1..]).expect("every observed context has an observed suffix"),
            };
            map.insert(ctx.to_vec(), sa.step(&c.relative_frequencies(), parent, c.total())?);
        }
        contexts.push(map);
    }
    Ok(SmoothedNGramModel { order: counts.order(), root, contexts })
}

/// Half-count smoothing of every observed context independently, backing
/// off to the longest observed suffix for unseen ones.
pub fn build_ele_ngram_model(
    counts: &NGramCountTable,
    root_mode: RootMode,
) -> Result<SmoothedNGramModel, SmoothingError> {
    let root = root_distribution(counts, root_mode)?;
    let contexts = (1..counts.order())
        .map(|len| {
            counts
                .contexts(len)
                .map(|(ctx, c)| Ok((ctx.to_vec(), ele_estimate(c.counts())?)))
                .collect::<Result<ContextMap, SmoothingError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SmoothedNGramModel { order: counts.order(), root, contexts })
}

/// Linear interpolation of per-order relative frequencies with one weight
/// vector shared by all contexts.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolatedNGramModel {
    order: usize,
    root: ConditionalDistribution,
    /// Relative frequencies of observed contexts; `freqs[k - 1]` has length `k`.
    freqs: Vec<ContextMap>,
    weights: InterpolationWeights,
}

impl InterpolatedNGramModel {
    pub fn from_parts(
        order: usize,
        root: ConditionalDistribution,
        freqs: Vec<ContextMap>,
        weights: InterpolationWeights,
    ) -> Result<Self, SmoothingError> {
        check_context_maps(order, &root, &freqs)?;
        if weights.len() != order {
            return Err(SmoothingError::InvalidWeights(format!(
                "{} weights for an order-{order} model",
                weights.len()
            )));
        }
        Ok(InterpolatedNGramModel { order, root, freqs, weights })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn root(&self) -> &ConditionalDistribution {
        &self.root
    }

    pub fn weights(&self) -> &InterpolationWeights {
        &self.weights
    }

    pub fn with_weights(&self, weights: InterpolationWeights) -> Result<Self, SmoothingError> {
        InterpolatedNGramModel::from_parts(self.order, self.root.clone(), self.freqs.clone(), weights)
    }

    pub fn contexts(&self, len: usize) -> impl Iterator<Item = (&[CtxTag], &ConditionalDistribution)> {
        self.freqs[len - 1].iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn distribution(&self, history: &[CtxTag]) -> ConditionalDistribution {
        let zeros = vec![0.0; self.root.len()];
        let mut levels: Vec<&[f64]> = vec![self.root.probs()];
        for len in 1..self.order {
            let f = (len <= history.len()).then(|| self.freqs[len - 1].get(&history[history.len() - len..])).flatten();
            levels.push(f.map_or(zeros.as_slice(), |d| d.probs()));
        }
        interpolate(&levels, &self.weights).expect("root level is always observed")
    }
}

/// Builds an interpolation model. The unigram level is estimated per
/// `root_mode`; higher orders use plain relative frequencies.
pub fn build_interpolated_ngram_model(
    counts: &NGramCountTable,
    root_mode: RootMode,
    weights: InterpolationWeights,
) -> Result<InterpolatedNGramModel, SmoothingError> {
    let root = root_distribution(counts, root_mode)?;
    let freqs = (1..counts.order())
        .map(|len| {
            counts
                .contexts(len)
                .map(|(ctx, c)| Ok((ctx.to_vec(), ConditionalDistribution::new(c.relative_frequencies())?)))
                .collect::<Result<ContextMap, SmoothingError>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    InterpolatedNGramModel::from_parts(counts.order(), root, freqs, weights)
}

/// Any of the transition estimators a tagger can use.
#[derive(Debug, Clone, PartialEq)]
pub enum TransitionModel {
    Smoothed(SmoothedNGramModel),
    Interpolated(InterpolatedNGramModel),
}

impl TransitionModel {
    pub fn order(&self) -> usize {
        match self {
            TransitionModel::Smoothed(m) => m.order(),
            TransitionModel::Interpolated(m) => m.order(),
        }
    }

    pub fn root(&self) -> &ConditionalDistribution {
        match self {
            TransitionModel::Smoothed(m) => m.root(),
            TransitionModel::Interpolated(m) => m.root(),
        }
    }

    pub fn num_tags(&self) -> usize {
        self.root().len()
    }

    pub fn distribution(&self, history: &[CtxTag]) -> Cow<'_, ConditionalDistribution> {
        match self {
            TransitionModel::Smoothed(m) => Cow::Borrowed(m.distribution(history)),
            TransitionModel::Interpolated(m) => Cow::Owned(m.distribution(history)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Corpus, TagId, TagSet};
    use crate::counts::count_ngrams;
    use crate::smoothing::smooth_step;
    use approx::assert_abs_diff_eq;

    fn corpus() -> Corpus {
        let tags = TagSet::new(["A", "B", "C"]).unwrap();
        let s = |t: &str| t.split(' ').map(|x| (x.to_lowercase(), x.to_string())).collect::<Vec<_>>();
        Corpus::from_pairs(tags, vec![s("A B C A"), s("B B A"), s("C A B C A")]).unwrap()
    }

    const A: CtxTag = CtxTag::Tag(TagId::new(0));
    const B: CtxTag = CtxTag::Tag(TagId::new(1));
    const C: CtxTag = CtxTag::Tag(TagId::new(2));

    #[test]
    fn order_one_is_just_the_root() {
        let counts = count_ngrams(&corpus(), 1).unwrap();
        let m = build_sa_ngram_model(&counts, RootMode::RelativeFrequency, &Default::default()).unwrap();
        assert_eq!(m.distribution(&[A, B]), m.root());
        for (got, want) in m.root().probs().iter().zip([5.0 / 12.0, 4.0 / 12.0, 3.0 / 12.0]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
    }

    #[test]
    fn bigram_context_is_one_step_from_root() {
        let counts = count_ngrams(&corpus(), 2).unwrap();
        let m = build_sa_ngram_model(&counts, RootMode::Ele, &Default::default()).unwrap();
        let c = counts.get(&[B]).unwrap().unwrap();
        let want = smooth_step(&c.relative_frequencies(), m.root(), c.total()).unwrap();
        assert_eq!(m.get(&[B]).unwrap(), &want);
    }

    #[test]
    fn unseen_contexts_back_off_to_longest_observed_suffix() {
        let counts = count_ngrams(&corpus(), 3).unwrap();
        let m = build_sa_ngram_model(&counts, RootMode::Ele, &Default::default()).unwrap();
        assert!(m.get(&[C, C]).is_none());
        assert_eq!(m.distribution(&[C, C]), m.get(&[C]).unwrap());
        assert_eq!(m.distribution(&[A, B, C]), m.get(&[B, C]).unwrap());
        assert!(m.get(&[CtxTag::Boundary, CtxTag::Boundary]).is_some());
    }

    #[test]
    fn ele_model_smooths_each_context() {
        let counts = count_ngrams(&corpus(), 2).unwrap();
        let m = build_ele_ngram_model(&counts, RootMode::Ele).unwrap();
        let c = counts.get(&[A]).unwrap().unwrap();
        assert_eq!(m.get(&[A]).unwrap(), &ele_estimate(c.counts()).unwrap());
    }

    #[test]
    fn interpolated_model_mixes_orders() {
        let counts = count_ngrams(&corpus(), 3).unwrap();
        let w = InterpolationWeights::new(vec![0.2, 0.3, 0.5]).unwrap();
        let m = build_interpolated_ngram_model(&counts, RootMode::RelativeFrequency, w.clone()).unwrap();
        let f1 = counts.unigram().relative_frequencies();
        let f2 = counts.get(&[B]).unwrap().unwrap().relative_frequencies();
        let f3 = counts.get(&[A, B]).unwrap().unwrap().relative_frequencies();
        let want = interpolate(&[&f1, &f2, &f3], &w).unwrap();
        assert_eq!(m.distribution(&[A, B]), want);

        // (C, C) never occurred: its weight moves to the lower orders.
        let fc = counts.get(&[C]).unwrap().unwrap().relative_frequencies();
        let zeros = [0.0; 3];
        assert_eq!(m.distribution(&[C, C]), interpolate(&[&f1, &fc, &zeros], &w).unwrap());
    }

    #[test]
    fn from_parts_validates_shapes() {
        let root = ConditionalDistribution::uniform(3).unwrap();
        assert!(SmoothedNGramModel::from_parts(2, root.clone(), vec![]).is_err());
        let mut bad = ContextMap::new();
        bad.insert(vec![A, B], root.clone());
        assert!(SmoothedNGramModel::from_parts(2, root.clone(), vec![bad]).is_err());
        let w = InterpolationWeights::new(vec![1.0]).unwrap();
        assert!(InterpolatedNGramModel::from_parts(2, root, vec![ContextMap::new()], w).is_err());
    }
}
