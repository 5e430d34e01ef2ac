use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::special::std_normal_quantile;

pub const DEFAULT_HERMITE_NODES: usize = 128;

/// Rule for approximating `∫ f(ν) φ(ν) dν` over the real line.
#[derive(Debug, Clone, PartialEq)]
pub enum QuadratureRule {
    /// Probabilists' Gauss–Hermite: `∫ f φ ≈ Σ wᵢ f(νᵢ)` with `Σ wᵢ = 1`.
    GaussHermite { nodes: Vec<f64>, weights: Vec<f64> },
    /// Globally adaptive Gauss–Kronrod (10/21) on the probability scale
    /// `∫₀¹ f(Φ⁻¹(λ)) dλ`. `breakpoints` are probabilities in (0, 1) where
    /// the integrand may jump (e.g. the steps of an empirical quantile).
    Adaptive {
        tolerance: f64,
        max_intervals: usize,
        breakpoints: Vec<f64>,
    },
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::gauss_hermite(DEFAULT_HERMITE_NODES)
    }
}

impl QuadratureRule {
    /// `n`-node probabilists' Gauss–Hermite rule, nodes ascending.
    pub fn gauss_hermite(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
        let (phys_nodes, phys_weights) = physicists_hermite(n);
        let scale = 2.0_f64.sqrt();
        let norm = PI.sqrt();
        let mut pairs: Vec<(f64, f64)> = phys_nodes
            .iter()
            .zip(&phys_weights)
            .map(|(&x, &w)| (x * scale, w / norm))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        QuadratureRule::GaussHermite { nodes, weights }
    }

    pub fn adaptive() -> Self {
        QuadratureRule::Adaptive {
            tolerance: 1e-10,
            max_intervals: 20_000,
            breakpoints: Vec::new(),
        }
    }

    /// Adds jump locations (probabilities) to an adaptive rule. No-op for
    /// fixed-node rules.
    pub fn with_breakpoints(mut self, points: impl IntoIterator<Item = f64>) -> Self {
        if let QuadratureRule::Adaptive { breakpoints, .. } = &mut self {
            breakpoints.extend(points.into_iter().filter(|p| *p > 0.0 && *p < 1.0));
            breakpoints.sort_by(f64::total_cmp);
            breakpoints.dedup();
        }
        self
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, QuadratureRule::Adaptive { .. })
    }
}

// Newton iteration on the orthonormal Hermite recurrence (physicists'
// weight e^{-x²}); initial guesses follow the classical asymptotic layout.
fn physicists_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let nf = n as f64;
    let half = n.div_ceil(2);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0_f64;
    for i in 0..half {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-0.16667),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut derivative = 0.0;
        for _ in 0..100 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            derivative = (2.0 * nf).sqrt() * p2;
            let previous = z;
            z = previous - p1 / derivative;
            if (z - previous).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (derivative * derivative);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Approximates `∫ f(ν) φ(ν) dν` with the given rule.
pub fn integrate_against_normal<F>(f: F, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    match rule {
        QuadratureRule::GaussHermite { nodes, weights } => {
            let mut sum = 0.0;
            for (&node, &weight) in nodes.iter().zip(weights) {
                let value = f(node);
                if !value.is_finite() {
                    return Err(Error::Numerical(format!(
                        "integrand is not finite at node {node}"
                    )));
                }
                sum += weight * value;
            }
            Ok(sum)
        }
        QuadratureRule::Adaptive {
            tolerance,
            max_intervals,
            breakpoints,
        } => {
            let g = |lambda: f64| -> Result<f64> {
                let nu = std_normal_quantile(lambda)?;
                let value = f(nu);
                if value.is_finite() {
                    Ok(value)
                } else {
                    Err(Error::Numerical(format!(
                        "integrand is not finite at nu = {nu}"
                    )))
                }
            };
            let mut edges = Vec::with_capacity(breakpoints.len() + 2);
            edges.push(0.0);
            edges.extend(breakpoints.iter().copied());
            edges.push(1.0);
            adaptive_kronrod(g, &edges, *tolerance, (*max_intervals).max(edges.len()))
        }
    }
}

const KRONROD_NODES: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];

const KRONROD_WEIGHTS: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_351_996,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];

// Gauss weights for KRONROD_NODES[1], [3], [5], [7], [9].
const GAUSS_WEIGHTS: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod_segment<G>(g: &G, a: f64, b: f64) -> Result<Segment>
where
    G: Fn(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = g(center)?;
    let mut kronrod = KRONROD_WEIGHTS[10] * fc;
    let mut gauss = 0.0;
    for i in 0..10 {
        let dx = half * KRONROD_NODES[i];
        let pair = g(center - dx)? + g(center + dx)?;
        kronrod += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    Ok(Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    })
}

fn adaptive_kronrod<G>(g: G, edges: &[f64], tolerance: f64, max_intervals: usize) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    let mut heap = BinaryHeap::new();
    for pair in edges.windows(2) {
        if pair[1] > pair[0] {
            heap.push(kronrod_segment(&g, pair[0], pair[1])?);
        }
    }
    loop {
        let total: f64 = heap.iter().map(|s| s.value).sum();
        let error: f64 = heap.iter().map(|s| s.error).sum();
        if error <= tolerance.max(tolerance * total.abs()) {
            return Ok(total);
        }
        if heap.len() >= max_intervals {
            return Err(Error::Numerical(format!(
                "adaptive quadrature did not converge (error estimate {error:.3e})"
            )));
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Numerical(
                "adaptive quadrature exhausted floating-point resolution".into(),
            ));
        }
        heap.push(kronrod_segment(&g, worst.a, mid)?);
        heap.push(kronrod_segment(&g, mid, worst.b)?);
    }
}
