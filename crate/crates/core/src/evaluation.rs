//! Error rates, significance thresholds and side-by-side comparisons.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::corpus::Corpus;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("gold has {gold} sentences but {predicted} predictions")]
    SentenceCount { gold: usize, predicted: usize },
    #[error("sentence {sentence}: gold has {gold} tokens but {predicted} predicted tags")]
    SentenceLength { sentence: usize, gold: usize, predicted: usize },
    #[error("need at least two reports to compare")]
    TooFewReports,
    #[error("reports cover different test sets ({0} vs {1} tokens)")]
    MismatchedTestSets(u64, u64),
    #[error("invalid significance query: {0}")]
    InvalidQuery(String),
}

/// Words the tagger saw in training.
pub trait KnownWords {
    fn is_known(&self, word: &str) -> bool;
}

impl KnownWords for crate::counts::Lexicon {
    fn is_known(&self, word: &str) -> bool {
        self.contains(word)
    }
}

impl KnownWords for HashSet<String> {
    fn is_known(&self, word: &str) -> bool {
        self.contains(word)
    }
}

/// Token-level scores of one system on one test set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub total_tokens: u64,
    pub errors: u64,
    pub unknown_tokens: u64,
    pub unknown_errors: u64,
    /// `(gold, predicted)` tag symbol pairs with their counts.
    pub confusion: BTreeMap<(String, String), u64>,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl EvalReport {
    pub fn error_rate(&self) -> f64 {
        ratio(self.errors, self.total_tokens)
    }

    /// Zero when the test set has no unknown words.
    pub fn unknown_error_rate(&self) -> f64 {
        ratio(self.unknown_errors, self.unknown_tokens)
    }

    pub fn unknown_fraction(&self) -> f64 {
        ratio(self.unknown_tokens, self.total_tokens)
    }

    pub fn accuracy(&self) -> f64 {
        1.0 - self.error_rate()
    }

    /// One `name<TAB>value` line per metric.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        let rows: [(&str, String); 7] = [
            ("total_tokens", self.total_tokens.to_string()),
            ("errors", self.errors.to_string()),
            ("error_rate", format!("{:.6}", self.error_rate())),
            ("unknown_tokens", self.unknown_tokens.to_string()),
            ("unknown_errors", self.unknown_errors.to_string()),
            ("unknown_error_rate", format!("{:.6}", self.unknown_error_rate())),
            ("unknown_fraction", format!("{:.6}", self.unknown_fraction())),
        ];
        for (k, v) in rows {
            writeln!(out, "{k}\t{v}").unwrap();
        }
        out
    }

    pub fn to_table(&self) -> String {
        let rows = [
            ("Tokens", self.total_tokens.to_string()),
            ("Error rate (%)", pct(self.error_rate())),
            ("Unknown words (%)", pct(self.unknown_fraction())),
            ("Unknown-word error rate (%)", pct(self.unknown_error_rate())),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (k, v) in rows {
            writeln!(out, "{k:<width$}  {v:>8}").unwrap();
        }
        out
    }
}

fn pct(x: f64) -> String {
    format!("{:.2}", 100.0 * x)
}

/// Compares predicted tag symbols against `gold`, token by token.
pub fn evaluate<S, K>(gold: &Corpus, predicted: &[Vec<S>], known: &K) -> Result<EvalReport, EvalError>
where
    S: AsRef<str>,
    K: KnownWords + ?Sized,
{
    if gold.len() != predicted.len() {
        return Err(EvalError::SentenceCount { gold: gold.len(), predicted: predicted.len() });
    }
    let mut report =
        EvalReport { total_tokens: 0, errors: 0, unknown_tokens: 0, unknown_errors: 0, confusion: BTreeMap::new() };
    for (i, (g, p)) in gold.sentences().iter().zip(predicted).enumerate() {
        if g.len() != p.len() {
            return Err(EvalError::SentenceLength { sentence: i, gold: g.len(), predicted: p.len() });
        }
        for (token, pred) in g.iter().zip(p) {
            let gold_tag = gold.tag_set().symbol(token.tag);
            let pred = pred.as_ref();
            let wrong = gold_tag != pred;
            let unknown = !known.is_known(&token.word);
            report.total_tokens += 1;
            report.errors += wrong as u64;
            report.unknown_tokens += unknown as u64;
            report.unknown_errors += (wrong && unknown) as u64;
            *report.confusion.entry((gold_tag.to_owned(), pred.to_owned())).or_default() += 1;
        }
    }
    Ok(report)
}

/// Smallest error-rate difference counted as significant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignificanceQuery {
    pub error_rate: f64,
    pub sample_size: u64,
    pub z: f64,
}

/// Two-sided critical values at the 10 % and 5 % levels.
pub const Z_10_PERCENT: f64 = 1.645;
pub const Z_5_PERCENT: f64 = 1.96;

/// `z · √(p(1 − p)/n)`.
pub fn significance_threshold(q: SignificanceQuery) -> Result<f64, EvalError> {
    let p = q.error_rate;
    if !(p > 0.0 && p < 1.0) {
        return Err(EvalError::InvalidQuery(format!("error rate {p} outside (0, 1)")));
    }
    if q.sample_size == 0 {
        return Err(EvalError::InvalidQuery("sample size is zero".into()));
    }
    if !(q.z > 0.0 && q.z.is_finite()) {
        return Err(EvalError::InvalidQuery(format!("critical value {} is not positive", q.z)));
    }
    Ok(q.z * (p * (1.0 - p) / q.sample_size as f64).sqrt())
}

/// One pair of systems in a comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseDifference {
    pub first: String,
    pub second: String,
    /// Error rate of `first` minus error rate of `second`.
    pub difference: f64,
    /// Thresholds at 10 % and 5 %, from the pair's mean error rate.
    pub threshold_10: f64,
    pub threshold_5: f64,
}

impl PairwiseDifference {
    pub fn significant_10(&self) -> bool {
        self.difference.abs() > self.threshold_10
    }

    pub fn significant_5(&self) -> bool {
        self.difference.abs() > self.threshold_5
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub systems: Vec<(String, EvalReport)>,
    pub sample_size: u64,
    pub pairs: Vec<PairwiseDifference>,
}

fn pair_thresholds(a: f64, b: f64, n: u64) -> (f64, f64) {
    let p = (a + b) / 2.0;
    let at = |z| significance_threshold(SignificanceQuery { error_rate: p, sample_size: n, z }).unwrap_or(0.0);
    (at(Z_10_PERCENT), at(Z_5_PERCENT))
}

/// Pairwise error-rate differences between error rates measured on `n`
/// tokens, with significance judged at the pair's mean error rate.
pub fn compare_rates(systems: &[(String, f64)], n: u64) -> Vec<PairwiseDifference> {
    let mut pairs = Vec::new();
    for (i, (a, ra)) in systems.iter().enumerate() {
        for (b, rb) in &systems[i + 1..] {
            let (threshold_10, threshold_5) = pair_thresholds(*ra, *rb, n);
            pairs.push(PairwiseDifference {
                first: a.clone(),
                second: b.clone(),
                difference: ra - rb,
                threshold_10,
                threshold_5,
            });
        }
    }
    pairs
}

/// Compares systems evaluated on the same test set.
pub fn compare(reports: Vec<(String, EvalReport)>) -> Result<Comparison, EvalError> {
    if reports.len() < 2 {
        return Err(EvalError::TooFewReports);
    }
    let n = reports[0].1.total_tokens;
    if let Some((_, r)) = reports.iter().find(|(_, r)| r.total_tokens != n) {
        return Err(EvalError::MismatchedTestSets(n, r.total_tokens));
    }
    let rates: Vec<(String, f64)> = reports.iter().map(|(name, r)| (name.clone(), r.error_rate())).collect();
    let pairs = compare_rates(&rates, n);
    Ok(Comparison { systems: reports, sample_size: n, pairs })
}

fn mark(sig: bool) -> &'static str {
    if sig {
        "yes"
    } else {
        "no"
    }
}

impl Comparison {
    /// Aligned plain-text table: one column per system, then the pairwise
    /// differences.
    pub fn to_table(&self) -> String {
        let labels = ["Error rate (%)", "Unknown words (%)", "Unknown-word error rate (%)"];
        let label_w = labels.iter().map(|l| l.len()).max().unwrap_or(0);
        let col_w = self.systems.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(8);
        let mut out = String::new();
        write!(out, "{:<label_w$}", "").unwrap();
        for (name, _) in &self.systems {
            write!(out, "  {name:>col_w$}").unwrap();
        }
        out.push('\n');
        let metrics: [fn(&EvalReport) -> f64; 3] =
            [EvalReport::error_rate, EvalReport::unknown_fraction, EvalReport::unknown_error_rate];
        for (label, metric) in labels.iter().zip(metrics) {
            write!(out, "{label:<label_w$}").unwrap();
            for (_, r) in &self.systems {
                write!(out, "  {:>col_w$}", pct(metric(r))).unwrap();
            }
            out.push('\n');
        }
        writeln!(out, "\nTest tokens: {}\n", self.sample_size).unwrap();
        writeln!(out, "{:<30}  {:>8}  {:>8}  {:>8}", "Pair", "Diff (%)", "10% sig", "5% sig").unwrap();
        for p in &self.pairs {
            let pair = format!("{} - {}", p.first, p.second);
            writeln!(
                out,
                "{pair:<30}  {:>8}  {:>8}  {:>8}",
                format!("{:+.2}", 100.0 * p.difference),
                mark(p.significant_10()),
                mark(p.significant_5())
            )
            .unwrap();
        }
        writeln!(
            out,
            "\nA difference is significant when it exceeds z * sqrt(p(1-p)/n), with p the\n\
             mean error rate of the pair, n the number of test tokens, and z = {Z_10_PERCENT}\n\
             (10% level) or {Z_5_PERCENT} (5% level)."
        )
        .unwrap();
        out
    }

    /// `name<TAB>value` lines: per-system metrics, then per-pair results.
    pub fn to_key_value(&self) -> String {
        let mut out = String::new();
        writeln!(out, "sample_size\t{}", self.sample_size).unwrap();
        for (name, r) in &self.systems {
            for line in r.to_key_value().lines() {
                writeln!(out, "{name}.{line}").unwrap();
            }
        }
        for p in &self.pairs {
            let key = format!("{}-{}", p.first, p.second);
            writeln!(out, "{key}.difference\t{:.6}", p.difference).unwrap();
            writeln!(out, "{key}.significant_10\t{}", p.significant_10()).unwrap();
            writeln!(out, "{key}.significant_5\t{}", p.significant_5()).unwrap();
        }
        out
    }
}
