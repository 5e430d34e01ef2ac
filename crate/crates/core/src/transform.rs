//! Normal scores: `κ* = Φ⁻¹(F(κ))` for continuous columns and the randomized
//! distributional transform for discrete ones.

use std::collections::BTreeMap;

use crate::dataset::{Dataset, VariableKind};
use crate::error::{Error, Result};
use crate::marginals::fit_empirical;
use crate::regress::{design_with_intercept, ols_fit};
use crate::stat_core::{std_normal_quantile, RngStream};

#[derive(Debug, Clone, PartialEq)]
pub struct NormalScores {
    pub values: Vec<f64>,
    pub source_kind: VariableKind,
    /// Stream id of the draw, set only for discrete sources.
    pub draw_id: Option<u64>,
}

fn distinct_count(sample: &[f64]) -> usize {
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    sorted.len()
}

/// Continuous normal scores `Φ⁻¹(F̂(x))` with the `rank / (T + 1)` empirical
/// CDF; tied values share a score.
pub fn normal_scores_continuous(sample: &[f64]) -> Result<NormalScores> {
    if sample.len() < 2 {
        return Err(Error::InsufficientData {
            observations: sample.len(),
            parameters: 2,
        });
    }
    let ecdf = fit_empirical(sample)?;
    let sorted = ecdf.sorted_values();
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::DegenerateColumn {
            column: "constant sample".into(),
        });
    }
    let values = sample
        .iter()
        .map(|&x| std_normal_quantile(ecdf.cdf(x)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(NormalScores {
        values,
        source_kind: VariableKind::Continuous,
        draw_id: None,
    })
}

/// Discrete normal scores: an observation equal to the `i`-th smallest
/// distinct value receives `Φ⁻¹(u)` with `u` uniform on
/// `(F(a_{i-1}), F(a_i))`, `F(a_0) = 0`, using sample frequencies.
pub fn normal_scores_discrete(sample: &[f64], rng: &mut RngStream) -> Result<NormalScores> {
    if sample.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(bad) = sample.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "discrete transform input contains {bad}"
        )));
    }
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for &v in sample {
        *counts.entry(order_key(v)).or_default() += 1;
    }
    if counts.len() < 2 {
        return Err(Error::DegenerateColumn {
            column: "single distinct value".into(),
        });
    }
    let n = sample.len() as f64;
    let mut cells: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    let mut cumulative = 0usize;
    for (key, count) in counts {
        let lower = cumulative as f64 / n;
        cumulative += count;
        let upper = cumulative as f64 / n;
        cells.insert(key, (lower, upper));
    }
    let draw_id = rng.stream_id();
    let values = sample
        .iter()
        .map(|&v| {
            let (lower, upper) = cells[&order_key(v)];
            let u = lower + (upper - lower) * rng.uniform_open();
            // keep strictly inside (0, 1) after rounding
            let u = u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
            std_normal_quantile(u)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(NormalScores {
        values,
        source_kind: VariableKind::Discrete,
        draw_id: Some(draw_id),
    })
}

// Order-preserving map from finite f64 to u64 (with -0.0 folded onto 0.0).
fn order_key(v: f64) -> u64 {
    let v = if v == 0.0 { 0.0 } else { v };
    let bits = v.to_bits();
    if bits >> 63 == 1 {
        !bits
    } else {
        bits | (1 << 63)
    }
}

/// Scores a column according to its declared kind.
pub fn normal_scores(
    sample: &[f64],
    kind: VariableKind,
    rng: &mut RngStream,
) -> Result<NormalScores> {
    match kind {
        VariableKind::Continuous => normal_scores_continuous(sample),
        VariableKind::Discrete => normal_scores_discrete(sample, rng),
    }
}

/// Suggests a kind from the number of distinct values: at most
/// `max(20, 0.05 T)` distinct values suggests `Discrete`. Advisory only.
pub fn suggest_kind(sample: &[f64]) -> VariableKind {
    let threshold = 20usize.max((0.05 * sample.len() as f64).floor() as usize);
    if distinct_count(sample) <= threshold {
        VariableKind::Discrete
    } else {
        VariableKind::Continuous
    }
}

/// Number of distinct values in a column.
pub fn distinct_values(sample: &[f64]) -> usize {
    distinct_count(sample)
}

/// OLS residuals of `P` on `[1, X, Z]`.
pub fn reduced_form_residuals(dataset: &Dataset) -> Result<Vec<f64>> {
    let n = dataset.n_obs();
    let columns = dataset
        .exogenous()
        .iter()
        .chain(dataset.instruments())
        .map(Vec::as_slice);
    let design = design_with_intercept(n, columns);
    let fit = ols_fit(&design, dataset.p())?;
    Ok(fit.residuals.iter().copied().collect())
}
