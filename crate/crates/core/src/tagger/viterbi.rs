//! Viterbi search over per-word tag lattices with an n-gram transition model.

use std::collections::{BTreeMap, HashMap};

use crate::corpus::TagId;
use crate::counts::CtxTag;

/// Candidate tags of one word with their log lexical factors.
pub type LatticeColumn = Vec<(TagId, f64)>;

struct Cell {
    score: f64,
    back: Option<Vec<CtxTag>>,
}

/// Highest-scoring path through `lattice` and its log score.
///
/// `log_transition(history)` returns log probabilities over all tags given
/// the last `order - 1` tags, padded on the left with [`CtxTag::Boundary`].
/// It is called at most once per distinct history.
///
/// Ties go to the smallest predecessor state at every cell, and to the
/// smallest final state, so equal-scoring paths resolve to the lowest tag
/// indices.
pub fn decode<F>(order: usize, lattice: &[LatticeColumn], mut log_transition: F) -> (Vec<TagId>, f64)
where
    F: FnMut(&[CtxTag]) -> Vec<f64>,
{
    assert!(order >= 1, "order must be positive");
    if lattice.is_empty() {
        return (Vec::new(), 0.0);
    }
    let hist = order - 1;
    // The state remembers at least one tag so that backpointers can recover
    // the path even for a unigram model.
    let width = hist.max(1);
    let mut cache: HashMap<Vec<CtxTag>, Vec<f64>> = HashMap::new();

    let mut start: BTreeMap<Vec<CtxTag>, Cell> = BTreeMap::new();
    start.insert(vec![CtxTag::Boundary; width], Cell { score: 0.0, back: None });
    let mut columns: Vec<BTreeMap<Vec<CtxTag>, Cell>> = Vec::with_capacity(lattice.len());

    for column in lattice {
        let prev = columns.last().unwrap_or(&start);
        let mut next: BTreeMap<Vec<CtxTag>, Cell> = BTreeMap::new();
        for (state, cell) in prev {
            let history = &state[width - hist..];
            let logp = cache.entry(history.to_vec()).or_insert_with(|| log_transition(history));
            for &(tag, log_factor) in column {
                let score = cell.score + logp[tag.index()] + log_factor;
                let mut key = state[1..].to_vec();
                key.push(CtxTag::Tag(tag));
                match next.get_mut(&key) {
                    Some(existing) if score > existing.score => {
                        existing.score = score;
                        existing.back = Some(state.clone());
                    }
                    Some(_) => {}
                    None => {
                        next.insert(key, Cell { score, back: Some(state.clone()) });
                    }
                }
            }
        }
        columns.push(next);
    }

    let last = columns.last().expect("lattice is non-empty");
    let (mut state, best) = last
        .iter()
        .fold(None::<(&Vec<CtxTag>, f64)>, |best, (k, c)| match best {
            Some((_, s)) if c.score <= s => best,
            _ => Some((k, c.score)),
        })
        .map(|(k, s)| (k.clone(), s))
        .expect("every column has at least one candidate");

    let mut tags = Vec::with_capacity(lattice.len());
    for column in columns.iter().rev() {
        match state.last() {
            Some(CtxTag::Tag(t)) => tags.push(*t),
            _ => unreachable!("decoded states end in a tag"),
        }
        state = column[&state].back.clone().unwrap_or_default();
    }
    tags.reverse();
    (tags, best)
}
