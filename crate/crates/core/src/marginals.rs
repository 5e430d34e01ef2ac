//! Marginal distributions: CDF and quantile for the parametric families used
//! by the simulation lab, plus the empirical CDF used on observed data.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, inv_beta_reg};

use crate::error::{Error, Result};
use crate::stat_core::{std_normal_cdf, std_normal_quantile, std_normal_sf, RngStream};

/// Empirical CDF with the `rank / (T + 1)` plotting convention.
///
/// `cdf` counts observations `<= x`, so tied values share the largest rank of
/// their group. `quantile` is the left-continuous inverse of the sample step
/// function (mass `1/T` per observation), which makes `quantile(cdf(x)) == x`
/// for every observed `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted_values: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted_values
    }

    pub fn len(&self) -> usize {
        self.sorted_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted_values.is_empty()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let rank = self.sorted_values.partition_point(|v| *v <= x);
        rank as f64 / (self.len() as f64 + 1.0)
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.len();
        let k = (p * n as f64).ceil() as usize;
        self.sorted_values[k.clamp(1, n) - 1]
    }

    /// Probabilities at which `quantile` jumps.
    pub fn jump_points(&self) -> Vec<f64> {
        let n = self.len() as f64;
        (1..self.len()).map(|j| j as f64 / n).collect()
    }

    pub fn mean(&self) -> f64 {
        self.sorted_values.iter().sum::<f64>() / self.len() as f64
    }

    /// Standard deviation of the step distribution (divisor `T`).
    pub fn std_dev(&self) -> f64 {
        let mean = self.mean();
        let ss: f64 = self.sorted_values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / self.len() as f64).sqrt()
    }
}

/// Builds the empirical CDF of `sample`.
pub fn fit_empirical(sample: &[f64]) -> Result<EmpiricalCdf> {
    if sample.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(bad) = sample.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "empirical CDF input contains non-finite value {bad}"
        )));
    }
    let mut sorted_values = sample.to_vec();
    sorted_values.sort_by(f64::total_cmp);
    Ok(EmpiricalCdf { sorted_values })
}

/// A univariate marginal distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Marginal {
    Normal { mean: f64, sd: f64 },
    StudentT { df: f64 },
    Uniform { low: f64, high: f64 },
    Exponential { rate: f64 },
    Beta { alpha: f64, beta: f64 },
    #[serde(skip)]
    Empirical(EmpiricalCdf),
}

impl Default for Marginal {
    fn default() -> Self {
        Marginal::Normal { mean: 0.0, sd: 1.0 }
    }
}

impl Marginal {
    pub fn standard_normal() -> Self {
        Self::default()
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        Marginal::Normal { mean, sd }.validated()
    }

    pub fn student_t(df: f64) -> Result<Self> {
        Marginal::StudentT { df }.validated()
    }

    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        Marginal::Uniform { low, high }.validated()
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        Marginal::Exponential { rate }.validated()
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        Marginal::Beta { alpha, beta }.validated()
    }

    pub fn empirical(sample: &[f64]) -> Result<Self> {
        fit_empirical(sample).map(Marginal::Empirical)
    }

    /// Checks parameter constraints; deserialized values go through here.
    pub fn validated(self) -> Result<Self> {
        let ok = match &self {
            Marginal::Normal { mean, sd } => mean.is_finite() && sd.is_finite() && *sd > 0.0,
            Marginal::StudentT { df } => df.is_finite() && *df >= 1.0,
            Marginal::Uniform { low, high } => low.is_finite() && high.is_finite() && low < high,
            Marginal::Exponential { rate } => rate.is_finite() && *rate > 0.0,
            Marginal::Beta { alpha, beta } => {
                alpha.is_finite() && beta.is_finite() && *alpha > 0.0 && *beta > 0.0
            }
            Marginal::Empirical(e) => !e.is_empty(),
        };
        if ok {
            Ok(self)
        } else {
            Err(Error::InvalidParameter(format!("invalid marginal {self}")))
        }
    }

    fn is_bounded(&self) -> bool {
        matches!(
            self,
            Marginal::Uniform { .. } | Marginal::Beta { .. } | Marginal::Empirical(_)
        )
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Marginal::Normal { mean, sd } => std_normal_cdf((x - mean) / sd),
            Marginal::StudentT { df } => student_t_cdf(x, *df),
            Marginal::Uniform { low, high } => ((x - low) / (high - low)).clamp(0.0, 1.0),
            Marginal::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
            Marginal::Beta { alpha, beta } => {
                if x <= 0.0 {
                    0.0
                } else if x >= 1.0 {
                    1.0
                } else {
                    beta_reg(*alpha, *beta, x)
                }
            }
            Marginal::Empirical(e) => e.cdf(x),
        }
    }

    /// Inverse CDF at `p`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        self.check_probability(p)?;
        Ok(match self {
            Marginal::Normal { mean, sd } => mean + sd * std_normal_quantile(p)?,
            Marginal::StudentT { df } => student_t_quantile(p, *df),
            Marginal::Uniform { low, high } => low + p * (high - low),
            Marginal::Exponential { rate } => -(-p).ln_1p() / rate,
            Marginal::Beta { alpha, beta } => beta_quantile(p, *alpha, *beta),
            Marginal::Empirical(e) => e.quantile(p),
        })
    }

    /// `quantile(1 - q)` evaluated without forming `1 - q`.
    pub fn upper_quantile(&self, q: f64) -> Result<f64> {
        self.check_probability(q)?;
        Ok(match self {
            Marginal::Normal { mean, sd } => mean - sd * std_normal_quantile(q)?,
            Marginal::StudentT { df } => -student_t_quantile(q, *df),
            Marginal::Uniform { low, high } => high - q * (high - low),
            Marginal::Exponential { rate } => -q.ln() / rate,
            Marginal::Beta { alpha, beta } => 1.0 - beta_quantile(q, *beta, *alpha),
            Marginal::Empirical(e) => e.quantile(1.0 - q),
        })
    }

    /// `quantile(Φ(ν))`, using the upper tail for positive `ν` so that far
    /// right normal scores do not collapse onto `p = 1`.
    pub fn quantile_of_normal_score(&self, nu: f64) -> Result<f64> {
        if let Marginal::Normal { mean, sd } = self {
            return Ok(mean + sd * nu);
        }
        if nu <= 0.0 {
            self.quantile(std_normal_cdf(nu))
        } else {
            self.upper_quantile(std_normal_sf(nu))
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        let u = rng.uniform_open();
        self.quantile(u)
            .expect("open-interval uniform is inside every quantile domain")
    }

    /// Mean, when it exists.
    pub fn mean(&self) -> Option<f64> {
        match self {
            Marginal::Normal { mean, .. } => Some(*mean),
            Marginal::StudentT { df } => (*df > 1.0).then_some(0.0),
            Marginal::Uniform { low, high } => Some(0.5 * (low + high)),
            Marginal::Exponential { rate } => Some(1.0 / rate),
            Marginal::Beta { alpha, beta } => Some(alpha / (alpha + beta)),
            Marginal::Empirical(e) => Some(e.mean()),
        }
    }

    /// Standard deviation, `None` when the variance is infinite or undefined.
    pub fn std_dev(&self) -> Option<f64> {
        match self {
            Marginal::Normal { sd, .. } => Some(*sd),
            Marginal::StudentT { df } => (*df > 2.0).then(|| (df / (df - 2.0)).sqrt()),
            Marginal::Uniform { low, high } => Some((high - low) / 12.0_f64.sqrt()),
            Marginal::Exponential { rate } => Some(1.0 / rate),
            Marginal::Beta { alpha, beta } => {
                let s = alpha + beta;
                Some((alpha * beta / (s * s * (s + 1.0))).sqrt())
            }
            Marginal::Empirical(e) => Some(e.std_dev()),
        }
    }

    /// Short label in the style of the simulation tables.
    pub fn label(&self) -> String {
        self.to_string()
    }

    fn check_probability(&self, p: f64) -> Result<()> {
        let inside = if self.is_bounded() {
            (0.0..=1.0).contains(&p)
        } else {
            p > 0.0 && p < 1.0
        };
        if inside {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "quantile of {self} is undefined at p = {p}"
            )))
        }
    }
}

impl fmt::Display for Marginal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Marginal::Normal { mean, sd } => write!(f, "N({mean},{})", sd * sd),
            Marginal::StudentT { df } => write!(f, "t({df})"),
            Marginal::Uniform { low, high } => write!(f, "U({low},{high})"),
            Marginal::Exponential { rate } => write!(f, "EXP({})", 1.0 / rate),
            Marginal::Beta { alpha, beta } => write!(f, "BETA({alpha},{beta})"),
            Marginal::Empirical(e) => write!(f, "empirical(T={})", e.len()),
        }
    }
}

fn student_t_cdf(x: f64, df: f64) -> f64 {
    if x == 0.0 {
        return 0.5;
    }
    let tail = 0.5 * beta_reg(df / 2.0, 0.5, df / (df + x * x));
    if x > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

fn student_t_quantile(p: f64, df: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    if df == 1.0 {
        return (PI * (p - 0.5)).tan();
    }
    if df == 2.0 {
        return (2.0 * p - 1.0) / (2.0 * p * (1.0 - p)).sqrt();
    }
    let lower = p.min(1.0 - p);
    let x = inv_beta_reg(df / 2.0, 0.5, 2.0 * lower);
    let t = (df * (1.0 - x) / x).sqrt();
    if p < 0.5 {
        -t
    } else {
        t
    }
}

fn beta_quantile(p: f64, alpha: f64, beta: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    if alpha == 0.5 && beta == 0.5 {
        // arcsine law
        return (0.5 * PI * p).sin().powi(2);
    }
    inv_beta_reg(alpha, beta, p)
}
