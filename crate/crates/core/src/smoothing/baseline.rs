//! Reference estimators: expected likelihood estimation and linear
//! interpolation with context-independent weights.

use std::cmp::Ordering;

use super::{ConditionalDistribution, SmoothingError};

/// Adds half a count to every outcome before normalizing.
pub fn ele_estimate(counts: &[u64]) -> Result<ConditionalDistribution, SmoothingError> {
    if counts.is_empty() {
        return Err(SmoothingError::NoData);
    }
    let total: u64 = counts.iter().sum();
    let denom = total as f64 + 0.5 * counts.len() as f64;
    ConditionalDistribution::new(counts.iter().map(|&c| (c as f64 + 0.5) / denom).collect())
}

/// Non-negative weights over n-gram orders, unigram first, summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolationWeights(Vec<f64>);

impl InterpolationWeights {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    pub fn new(lambdas: Vec<f64>) -> Result<Self, SmoothingError> {
        if lambdas.is_empty() {
            return Err(SmoothingError::InvalidWeights("no weights".into()));
        }
        if let Some(l) = lambdas.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return Err(SmoothingError::InvalidWeights(format!("weight {l} is negative")));
        }
        let sum: f64 = lambdas.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(SmoothingError::InvalidWeights(format!("weights sum to {sum}, not 1")));
        }
        Ok(InterpolationWeights(lambdas))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `Σ_j λ_j f_j` over per-order relative frequencies, unigram first.
///
/// An all-zero vector marks an unseen context. Its weight is spread over
/// the remaining orders in proportion to their own weights; if those are
/// all zero, the remaining orders share equally.
pub fn interpolate(
    freqs_per_order: &[&[f64]],
    weights: &InterpolationWeights,
) -> Result<ConditionalDistribution, SmoothingError> {
    if freqs_per_order.len() != weights.len() {
        return Err(SmoothingError::InvalidWeights(format!(
            "{} weights for {} orders",
            weights.len(),
            freqs_per_order.len()
        )));
    }
    let dim = freqs_per_order.first().map_or(0, |f| f.len());
    if let Some(f) = freqs_per_order.iter().find(|f| f.len() != dim) {
        return Err(SmoothingError::DimensionMismatch { expected: dim, got: f.len() });
    }

    let seen: Vec<bool> = freqs_per_order.iter().map(|f| f.iter().any(|&x| x > 0.0)).collect();
    let n_seen = seen.iter().filter(|&&s| s).count();
    if n_seen == 0 {
        return Err(SmoothingError::NoData);
    }
    let seen_mass: f64 = weights.0.iter().zip(&seen).filter(|(_, &s)| s).map(|(l, _)| l).sum();
    let effective: Vec<f64> = weights
        .0
        .iter()
        .zip(&seen)
        .map(|(&l, &s)| match (s, seen_mass > 0.0) {
            (false, _) => 0.0,
            (true, true) => l / seen_mass,
            (true, false) => 1.0 / n_seen as f64,
        })
        .collect();

    let mut probs = vec![0.0; dim];
    for (f, &l) in freqs_per_order.iter().zip(&effective) {
        if l > 0.0 {
            for (p, &x) in probs.iter_mut().zip(f.iter()) {
                *p += l * x;
            }
        }
    }
    ConditionalDistribution::new(probs)
}

/// Every weight vector on the simplex grid with spacing `step`, as integer
/// multiples of `step`. Fails if `step` does not divide 1.
pub fn grid_points(num_orders: usize, step: f64) -> Result<Vec<Vec<u32>>, SmoothingError> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(SmoothingError::InvalidGridStep(step));
    }
    let units = (1.0 / step).round();
    if (units * step - 1.0).abs() > 1e-9 {
        return Err(SmoothingError::InvalidGridStep(step));
    }
    if num_orders == 0 {
        return Err(SmoothingError::InvalidWeights("no orders to weigh".into()));
    }
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(num_orders);
    compositions(units as u32, num_orders, &mut current, &mut out);
    Ok(out)
}

fn compositions(remaining: u32, parts: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if parts == 1 {
        current.push(remaining);
        out.push(current.clone());
        current.pop();
        return;
    }
    for k in 0..=remaining {
        current.push(k);
        compositions(remaining - k, parts - 1, current, out);
        current.pop();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub weights: InterpolationWeights,
    pub score: f64,
    /// Number of grid points evaluated.
    pub evaluated: usize,
}

/// Exhaustive search over the weight simplex for the weights maximizing
/// `objective`. Ties go to the lexicographically largest weight vector;
/// NaN scores never win.
pub fn grid_search_lambdas<F>(
    num_orders: usize,
    step: f64,
    mut objective: F,
) -> Result<GridSearchResult, SmoothingError>
where
    F: FnMut(&InterpolationWeights) -> f64,
{
    let points = grid_points(num_orders, step)?;
    let units: u32 = points[0].iter().sum();
    let mut best: Option<(f64, Vec<u32>, InterpolationWeights)> = None;
    for point in &points {
        let lambdas = point.iter().map(|&k| k as f64 / units as f64).collect();
        let weights = InterpolationWeights::new(lambdas)?;
        let mut score = objective(&weights);
        if score.is_nan() {
            score = f64::NEG_INFINITY;
        }
        let better = match &best {
            None => true,
            Some((s, p, _)) => match score.partial_cmp(s).unwrap_or(Ordering::Less) {
                Ordering::Greater => true,
                Ordering::Equal => point > p,
                Ordering::Less => false,
            },
        };
        if better {
            best = Some((score, point.clone(), weights));
        }
    }
    let (score, _, weights) = best.expect("the grid always has at least one point");
    Ok(GridSearchResult { weights, score, evaluated: points.len() })
}
