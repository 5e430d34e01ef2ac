//! Monte Carlo lab: Gaussian-copula data generation, replication runner,
//! and rejection-rate tables.

mod scenario;
mod table;

pub use scenario::{ScenarioMode, ScenarioSpec, ScenarioSweep, Structural};
pub use table::{emit_table, RenderedTable, TableLayout};

use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::dataset::{Dataset, VariableKind};
use crate::error::{Error, Result};
use crate::exo_test::{
    hausman_test, instrument_exogeneity_test, regressor_exogeneity_test, TestOptions,
};
use crate::marginals::Marginal;
use crate::regress::{cholesky_lower, correlation, CovarianceKind};
use crate::stat_core::{stream_key, RngStream};

/// Latent correlation matrix. Variable order is `(Z*, η*, ε*, X*)` in
/// instrument mode and `(P*, ε*, X*, Z*)` in regressor mode.
pub fn assemble_latent_correlation(spec: &ScenarioSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let m = spec.n_instruments();
    let k = spec.n_exogenous();
    let mut s = DMatrix::identity(spec.latent_dim(), spec.latent_dim());
    let mut set = |i: usize, j: usize, v: f64| {
        s[(i, j)] = v;
        s[(j, i)] = v;
    };
    match spec.mode {
        ScenarioMode::Instruments => {
            let (eta, eps, x0) = (m, m + 1, m + 2);
            for i in 0..m {
                for j in 0..i {
                    set(i, j, spec.sigma_z_star[i][j]);
                }
                set(i, eps, spec.rho_z_eps[i]);
            }
            set(eta, eps, spec.rho_eta_eps);
            for a in 0..k {
                for i in 0..m {
                    set(x0 + a, i, spec.rho_x_z[a][i]);
                }
                set(x0 + a, eps, spec.rho_x_eps[a]);
            }
        }
        ScenarioMode::Regressor => {
            let (p, eps, x0, z0) = (0, 1, 2, 2 + k);
            set(p, eps, spec.rho_p_eps);
            for a in 0..k {
                set(p, x0 + a, spec.rho_p_x[a]);
                set(eps, x0 + a, spec.rho_x_eps[a]);
                for i in 0..m {
                    set(x0 + a, z0 + i, spec.rho_x_z[a][i]);
                }
            }
            for i in 0..m {
                set(p, z0 + i, spec.rho_p_z[i]);
                set(eps, z0 + i, spec.rho_z_eps[i]);
                for j in 0..i {
                    set(z0 + i, z0 + j, spec.sigma_z_star[i][j]);
                }
            }
        }
    }
    Ok(s)
}

/// Cholesky factor of the latent correlation; failures carry the matrix.
pub fn latent_factor(spec: &ScenarioSpec) -> Result<DMatrix<f64>> {
    let s = assemble_latent_correlation(spec)?;
    cholesky_lower(&s).map_err(|e| match e {
        Error::NotPositiveDefinite { pivot } => Error::ScenarioNotPositiveDefinite {
            pivot,
            matrix: s.row_iter().map(|r| r.iter().copied().collect()).collect(),
        },
        other => other,
    })
}

/// One simulated sample together with the structural error it was built from.
#[derive(Debug, Clone)]
pub struct Replication {
    pub dataset: Dataset,
    pub epsilon: Vec<f64>,
    /// Latent normal draws, one row per observation in latent order.
    pub latent: DMatrix<f64>,
}

/// Stream for replication `rep` of `spec`.
pub fn replication_stream(spec: &ScenarioSpec, rep: usize) -> RngStream {
    RngStream::new(spec.seed, stream_key(spec.digest_u64(), rep as u64))
}

fn observe(marginal: &Marginal, latent: f64) -> Result<f64> {
    marginal.quantile_of_normal_score(latent)
}

/// Draws one sample of size `T` from the scenario.
pub fn generate_replication(spec: &ScenarioSpec, rng: &mut RngStream) -> Result<Replication> {
    let factor = latent_factor(spec)?;
    generate_with_factor(spec, &factor, rng)
}

fn generate_with_factor(
    spec: &ScenarioSpec,
    factor: &DMatrix<f64>,
    rng: &mut RngStream,
) -> Result<Replication> {
    let n = spec.t;
    let dim = factor.nrows();
    let m = spec.n_instruments();
    let k = spec.n_exogenous();
    let mut latent = DMatrix::zeros(n, dim);
    let mut white = vec![0.0; dim];
    for t in 0..n {
        for w in white.iter_mut() {
            *w = rng.standard_normal();
        }
        for i in 0..dim {
            let mut acc = 0.0;
            for j in 0..=i {
                acc += factor[(i, j)] * white[j];
            }
            latent[(t, i)] = acc;
        }
    }

    let (z_col, eps_col, x_col) = match spec.mode {
        ScenarioMode::Instruments => (0, m + 1, m + 2),
        ScenarioMode::Regressor => (2 + k, 1, 2),
    };
    let column = |c: usize, marginal: &Marginal| -> Result<Vec<f64>> {
        (0..n).map(|t| observe(marginal, latent[(t, c)])).collect()
    };
    let z: Vec<Vec<f64>> = (0..m)
        .map(|i| column(z_col + i, &spec.z_marginals[i]))
        .collect::<Result<_>>()?;
    let x: Vec<Vec<f64>> = (0..k)
        .map(|a| column(x_col + a, &spec.x_marginals[a]))
        .collect::<Result<_>>()?;
    let eps = column(eps_col, &spec.eps_marginal)?;
    let st = &spec.structural;

    let p: Vec<f64> = match spec.mode {
        ScenarioMode::Instruments => (0..n)
            .map(|t| {
                let mut v = st.intercept_p + latent[(t, m)];
                for a in 0..k {
                    v += st.delta_x[a] * x[a][t];
                }
                for i in 0..m {
                    v += st.gamma[i] * z[i][t];
                }
                v
            })
            .collect(),
        ScenarioMode::Regressor => column(0, &spec.p_marginal)?,
    };
    let y: Vec<f64> = (0..n)
        .map(|t| {
            let mut v = st.intercept_y + st.alpha * p[t] + eps[t];
            for a in 0..k {
                v += st.beta[a] * x[a][t];
            }
            v
        })
        .collect();

    let mut builder = Dataset::builder("Y", y, "P", p);
    for (a, col) in x.into_iter().enumerate() {
        builder = builder.exogenous(format!("X{}", a + 1), col);
    }
    for (i, col) in z.into_iter().enumerate() {
        builder = builder.instrument(format!("Z{}", i + 1), col, VariableKind::Continuous);
    }
    Ok(Replication {
        dataset: builder.build()?,
        epsilon: eps,
        latent,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MonteCarloSummary {
    pub scenario: ScenarioSpec,
    /// Hex SHA-256 of the scenario's canonical form.
    pub digest: String,
    pub hypotheses: Vec<String>,
    pub rejection_counts: Vec<usize>,
    pub rejection_rates: Vec<f64>,
    pub mc_standard_errors: Vec<f64>,
    /// Mean over replications of the sample correlation of `P` and `ε`.
    pub mean_rho_p_eps: f64,
    pub n_reps: usize,
    pub elapsed_secs: f64,
}

impl MonteCarloSummary {
    /// Equality of everything except wall-clock time.
    pub fn statistics_eq(&self, other: &Self) -> bool {
        self.digest == other.digest
            && self.hypotheses == other.hypotheses
            && self.rejection_counts == other.rejection_counts
            && self.rejection_rates.iter().map(|v| v.to_bits()).eq(other.rejection_rates.iter().map(|v| v.to_bits()))
            && self.mean_rho_p_eps.to_bits() == other.mean_rho_p_eps.to_bits()
            && self.n_reps == other.n_reps
    }

    pub fn rate(&self, hypothesis: &str) -> Option<f64> {
        let i = self.hypotheses.iter().position(|h| h == hypothesis)?;
        Some(self.rejection_rates[i])
    }
}

struct RepOutcome {
    rejections: Vec<bool>,
    rho_p_eps: f64,
}

fn run_replication(spec: &ScenarioSpec, factor: &DMatrix<f64>, rep: usize) -> Result<RepOutcome> {
    let mut rng = replication_stream(spec, rep);
    let sample = generate_with_factor(spec, factor, &mut rng)?;
    let options = TestOptions {
        alpha: spec.alpha_level,
        n_draws: 1,
        covariance: CovarianceKind::Homoskedastic,
    };
    let test_rng = rng.substream(0);
    let rejections = match spec.mode {
        ScenarioMode::Instruments => {
            let report = instrument_exogeneity_test(&sample.dataset, &options, &test_rng)?;
            report.terms.iter().map(|t| t.wald.rejects(options.alpha)).collect()
        }
        ScenarioMode::Regressor => {
            let copula = regressor_exogeneity_test(&sample.dataset, &options, &test_rng)?;
            let mut out = vec![copula.joint.rejects(options.alpha)];
            if spec.n_instruments() > 0 {
                out.push(hausman_test(&sample.dataset, &options)?.rejected);
            }
            out
        }
    };
    Ok(RepOutcome {
        rejections,
        rho_p_eps: correlation(sample.dataset.p(), &sample.epsilon)?,
    })
}

/// Runs `n_reps` replications in parallel and tallies rejections. The
/// result depends only on the scenario (including its seed).
pub fn run_scenario(spec: &ScenarioSpec) -> Result<MonteCarloSummary> {
    let started = Instant::now();
    let factor = latent_factor(spec)?;
    let outcomes: Vec<RepOutcome> = (0..spec.n_reps)
        .into_par_iter()
        .map(|rep| {
            run_replication(spec, &factor, rep).map_err(|e| Error::Replication {
                rep,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;

    let hypotheses = spec.hypotheses();
    let mut counts = vec![0usize; hypotheses.len()];
    let mut rho_sum = 0.0;
    for o in &outcomes {
        for (c, r) in counts.iter_mut().zip(&o.rejections) {
            *c += usize::from(*r);
        }
        rho_sum += o.rho_p_eps;
    }
    let n = spec.n_reps as f64;
    let rejection_rates: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let mc_standard_errors = rejection_rates
        .iter()
        .map(|p| (p * (1.0 - p) / n).sqrt())
        .collect();
    Ok(MonteCarloSummary {
        scenario: spec.clone(),
        digest: spec.digest(),
        hypotheses,
        rejection_counts: counts,
        rejection_rates,
        mc_standard_errors,
        mean_rho_p_eps: rho_sum / n,
        n_reps: spec.n_reps,
        elapsed_secs: started.elapsed().as_secs_f64(),
    })
}

/// Runs every scenario of a sweep in order.
pub fn run_sweep(sweep: &ScenarioSweep) -> Result<Vec<MonteCarloSummary>> {
    sweep.expand()?.iter().map(run_scenario).collect()
}

pub(crate) fn sha256_hex(text: &str) -> (String, u64) {
    let digest = Sha256::digest(text.as_bytes());
    let hex = digest.iter().map(|b| format!("{b:02x}")).collect();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    (hex, u64::from_le_bytes(head))
}
