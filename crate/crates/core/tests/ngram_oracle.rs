//! Every stored trigram-model distribution on a small corpus, recomputed
//! straight from token counts.

use std::collections::BTreeMap;

use succabs::corpus::{Corpus, TagId, TagSet};
use succabs::counts::{count_ngrams, CtxTag};
use succabs::smoothing::{build_sa_ngram_model, RootMode, SuccessiveAbstraction};

const N: usize = 3;

fn corpus() -> Corpus {
    let tags = TagSet::new(["A", "B", "C"]).unwrap();
    let sentences = ["A B C A", "B B A", "C A B C A"]
        .iter()
        .map(|s| s.split(' ').map(|t| (t.to_lowercase(), t)).collect())
        .collect();
    Corpus::from_pairs(tags, sentences).unwrap()
}

fn step(f: &[f64], count: f64, parent: &[f64]) -> Vec<f64> {
    let h: f64 = parent.iter().map(|&p| -p * p.ln()).sum();
    let s = 12f64.sqrt() * count.sqrt() * (-h).exp();
    f.iter().zip(parent).map(|(&f, &p)| (s * f + p) / (s + 1.0)).collect()
}

#[test]
fn stored_distributions_match_direct_evaluation() {
    let c = corpus();
    assert_eq!(c.token_count(), 12);

    // (context, next tag) counts with two sentence-start pads.
    let mut table: BTreeMap<Vec<CtxTag>, [f64; N]> = BTreeMap::new();
    let mut unigram = [0.0; N];
    for s in c.tag_sequences() {
        let mut padded = vec![CtxTag::Boundary, CtxTag::Boundary];
        padded.extend(s.iter().map(|&t| CtxTag::Tag(t)));
        for (k, t) in s.iter().enumerate() {
            unigram[t.index()] += 1.0;
            let hist = &padded[k..k + 2];
            table.entry(hist[1..].to_vec()).or_insert([0.0; N])[t.index()] += 1.0;
            table.entry(hist.to_vec()).or_insert([0.0; N])[t.index()] += 1.0;
        }
    }
    let root: Vec<f64> = unigram.iter().map(|&x| (x + 0.5) / (12.0 + 1.5)).collect();

    let counts = count_ngrams(&c, 3).unwrap();
    let model = build_sa_ngram_model(&counts, RootMode::Ele, &SuccessiveAbstraction::default()).unwrap();
    for (i, p) in root.iter().enumerate() {
        assert!((model.root().prob(i) - p).abs() < 1e-15);
    }

    let mut bigram: BTreeMap<Vec<CtxTag>, Vec<f64>> = BTreeMap::new();
    for (ctx, row) in table.iter().filter(|(k, _)| k.len() == 1) {
        let n: f64 = row.iter().sum();
        let f: Vec<f64> = row.iter().map(|x| x / n).collect();
        bigram.insert(ctx.clone(), step(&f, n, &root));
    }
    let mut checked = 0;
    for (ctx, row) in &table {
        let n: f64 = row.iter().sum();
        let f: Vec<f64> = row.iter().map(|x| x / n).collect();
        let want = match ctx.len() {
            1 => bigram[ctx].clone(),
            _ => step(&f, n, &bigram[&ctx[1..]]),
        };
        let got = model.get(ctx).unwrap();
        for (g, w) in got.probs().iter().zip(&want) {
            assert!((g - w).abs() < 1e-12, "context {ctx:?}");
        }
        checked += 1;
    }
    assert_eq!(checked, model.contexts(1).count() + model.contexts(2).count());

    // (C, C) never occurs; it resolves to the bigram estimate after C.
    let c_tag = CtxTag::Tag(TagId::new(2));
    assert!(model.get(&[c_tag, c_tag]).is_none());
    assert_eq!(model.distribution(&[c_tag, c_tag]), model.get(&[c_tag]).unwrap());
}
