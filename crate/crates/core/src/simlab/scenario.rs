use serde::{Deserialize, Serialize};

use super::table::TableLayout;
use crate::error::{Error, Result};
use crate::marginals::Marginal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioMode {
    /// Test instruments; `P` comes from the reduced form.
    #[default]
    Instruments,
    /// Test the regressor `P` directly; instruments feed the Hausman baseline.
    Regressor,
}

/// Coefficients of `P = c_p + δᵀX + γᵀZ + η` and `Y = c_y + βᵀX + αP + ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Structural {
    pub intercept_p: f64,
    pub intercept_y: f64,
    pub beta: Vec<f64>,
    pub alpha: f64,
    pub delta_x: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Default for Structural {
    fn default() -> Self {
        Structural {
            intercept_p: 1.0,
            intercept_y: 1.0,
            beta: vec![0.3],
            alpha: 1.0,
            delta_x: vec![0.1],
            gamma: vec![0.1, 0.2, 0.3],
        }
    }
}

/// One simulation design. Correlations refer to the latent normal scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecFile")]
pub struct ScenarioSpec {
    pub name: String,
    pub mode: ScenarioMode,
    pub t: usize,
    pub n_reps: usize,
    /// m×m correlation of the instrument scores.
    pub sigma_z_star: Vec<Vec<f64>>,
    pub rho_z_eps: Vec<f64>,
    pub rho_eta_eps: f64,
    /// k×m
    pub rho_x_z: Vec<Vec<f64>>,
    pub rho_x_eps: Vec<f64>,
    pub rho_p_eps: f64,
    pub rho_p_x: Vec<f64>,
    pub rho_p_z: Vec<f64>,
    pub eps_marginal: Marginal,
    pub z_marginals: Vec<Marginal>,
    pub x_marginals: Vec<Marginal>,
    pub p_marginal: Marginal,
    pub structural: Structural,
    pub alpha_level: f64,
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_REPS: usize = 200;
/// Latent `corr(P*, Z*)` in regressor mode, where the design leaves it open.
pub const DEFAULT_RHO_P_Z: f64 = 0.55;

impl ScenarioSpec {
    /// Three instruments, one exogenous regressor, all correlations with the
    /// error at zero except `ρ_{η*ε*} = 0.5`.
    pub fn instruments() -> Self {
        ScenarioSpec {
            name: String::new(),
            mode: ScenarioMode::Instruments,
            t: 200,
            n_reps: DEFAULT_REPS,
            sigma_z_star: vec![
                vec![1.0, 0.2, 0.3],
                vec![0.2, 1.0, 0.4],
                vec![0.3, 0.4, 1.0],
            ],
            rho_z_eps: vec![0.0; 3],
            rho_eta_eps: 0.5,
            rho_x_z: vec![vec![0.2; 3]],
            rho_x_eps: vec![0.0],
            rho_p_eps: 0.0,
            rho_p_x: vec![0.0],
            rho_p_z: vec![0.0; 3],
            eps_marginal: Marginal::standard_normal(),
            z_marginals: vec![
                Marginal::StudentT { df: 2.0 },
                Marginal::standard_normal(),
                Marginal::standard_normal(),
            ],
            x_marginals: vec![Marginal::standard_normal()],
            p_marginal: Marginal::standard_normal(),
            structural: Structural::default(),
            alpha_level: 0.05,
            seed: DEFAULT_SEED,
        }
    }

    /// Regressor `P ~ t(2)`, one exogenous regressor and one instrument.
    pub fn regressor() -> Self {
        ScenarioSpec {
            name: String::new(),
            mode: ScenarioMode::Regressor,
            t: 1000,
            n_reps: DEFAULT_REPS,
            sigma_z_star: vec![vec![1.0]],
            rho_z_eps: vec![0.0],
            rho_eta_eps: 0.0,
            rho_x_z: vec![vec![0.2]],
            rho_x_eps: vec![0.0],
            rho_p_eps: 0.0,
            rho_p_x: vec![0.2],
            rho_p_z: vec![DEFAULT_RHO_P_Z],
            eps_marginal: Marginal::standard_normal(),
            z_marginals: vec![Marginal::standard_normal()],
            x_marginals: vec![Marginal::standard_normal()],
            p_marginal: Marginal::StudentT { df: 2.0 },
            structural: Structural {
                gamma: Vec::new(),
                delta_x: Vec::new(),
                ..Structural::default()
            },
            alpha_level: 0.05,
            seed: DEFAULT_SEED,
        }
    }

    pub fn defaults_for(mode: ScenarioMode) -> Self {
        match mode {
            ScenarioMode::Instruments => Self::instruments(),
            ScenarioMode::Regressor => Self::regressor(),
        }
    }

    pub fn n_instruments(&self) -> usize {
        self.sigma_z_star.len()
    }

    pub fn n_exogenous(&self) -> usize {
        self.x_marginals.len()
    }

    pub fn latent_dim(&self) -> usize {
        self.n_instruments() + self.n_exogenous() + 2
    }

    /// Names of the tallied hypotheses, in summary order.
    pub fn hypotheses(&self) -> Vec<String> {
        match self.mode {
            ScenarioMode::Instruments => (1..=self.n_instruments()).map(|i| format!("Z{i}")).collect(),
            ScenarioMode::Regressor if self.n_instruments() > 0 => {
                vec!["copula".into(), "hausman".into()]
            }
            ScenarioMode::Regressor => vec!["copula".into()],
        }
    }

    /// Canonical text used for hashing; every field takes part.
    fn canonical(&self) -> String {
        format!("{self:?}")
    }

    pub fn digest(&self) -> String {
        super::sha256_hex(&self.canonical()).0
    }

    pub(crate) fn digest_u64(&self) -> u64 {
        super::sha256_hex(&self.canonical()).1
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.n_instruments();
        let k = self.n_exogenous();
        let bad = |what: String| Err(Error::InvalidParameter(what));
        if self.t < 10 {
            return bad(format!("sample size {} is below 10", self.t));
        }
        if self.n_reps == 0 {
            return bad("n_reps must be positive".into());
        }
        if !(self.alpha_level > 0.0 && self.alpha_level < 1.0) {
            return bad(format!("alpha_level {} is not in (0, 1)", self.alpha_level));
        }
        if self.mode == ScenarioMode::Instruments && m == 0 {
            return bad("instrument mode needs at least one instrument".into());
        }
        for (i, row) in self.sigma_z_star.iter().enumerate() {
            if row.len() != m {
                return bad(format!("sigma_z_star row {i} has {} entries, expected {m}", row.len()));
            }
            if row[i] != 1.0 {
                return bad(format!("sigma_z_star[{i}][{i}] must be 1"));
            }
            for (j, v) in row.iter().enumerate() {
                if *v != self.sigma_z_star[j][i] {
                    return bad(format!("sigma_z_star is not symmetric at ({i}, {j})"));
                }
            }
        }
        let lengths = [
            ("rho_z_eps", self.rho_z_eps.len(), m),
            ("z_marginals", self.z_marginals.len(), m),
            ("rho_x_z", self.rho_x_z.len(), k),
            ("rho_x_eps", self.rho_x_eps.len(), k),
            ("structural.beta", self.structural.beta.len(), k),
        ];
        for (name, got, want) in lengths {
            if got != want {
                return bad(format!("{name} has {got} entries, expected {want}"));
            }
        }
        for (a, row) in self.rho_x_z.iter().enumerate() {
            if row.len() != m {
                return bad(format!("rho_x_z row {a} has {} entries, expected {m}", row.len()));
            }
        }
        match self.mode {
            ScenarioMode::Instruments => {
                for (name, got, want) in [
                    ("structural.gamma", self.structural.gamma.len(), m),
                    ("structural.delta_x", self.structural.delta_x.len(), k),
                ] {
                    if got != want {
                        return bad(format!("{name} has {got} entries, expected {want}"));
                    }
                }
            }
            ScenarioMode::Regressor => {
                for (name, got, want) in [
                    ("rho_p_x", self.rho_p_x.len(), k),
                    ("rho_p_z", self.rho_p_z.len(), m),
                ] {
                    if got != want {
                        return bad(format!("{name} has {got} entries, expected {want}"));
                    }
                }
            }
        }
        let correlations = self
            .sigma_z_star
            .iter()
            .flatten()
            .chain(&self.rho_z_eps)
            .chain(self.rho_x_z.iter().flatten())
            .chain(&self.rho_x_eps)
            .chain(&self.rho_p_x)
            .chain(&self.rho_p_z)
            .chain([&self.rho_eta_eps, &self.rho_p_eps]);
        for v in correlations {
            if !(-1.0..=1.0).contains(v) {
                return bad(format!("correlation {v} is outside [-1, 1]"));
            }
        }
        for marginal in self
            .z_marginals
            .iter()
            .chain(&self.x_marginals)
            .chain([&self.eps_marginal, &self.p_marginal])
        {
            marginal.clone().validated()?;
            if let Marginal::Empirical(_) = marginal {
                return bad("empirical marginals cannot drive a simulation".into());
            }
        }
        Ok(())
    }
}

// On-disk form: every field optional, defaults depend on the mode.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    name: Option<String>,
    mode: Option<ScenarioMode>,
    t: Option<usize>,
    n_reps: Option<usize>,
    sigma_z_star: Option<Vec<Vec<f64>>>,
    rho_z_eps: Option<Vec<f64>>,
    rho_eta_eps: Option<f64>,
    rho_x_z: Option<Vec<Vec<f64>>>,
    rho_x_eps: Option<Vec<f64>>,
    rho_p_eps: Option<f64>,
    rho_p_x: Option<Vec<f64>>,
    rho_p_z: Option<Vec<f64>>,
    eps_marginal: Option<Marginal>,
    z_marginals: Option<Vec<Marginal>>,
    x_marginals: Option<Vec<Marginal>>,
    p_marginal: Option<Marginal>,
    structural: Option<Structural>,
    alpha_level: Option<f64>,
    seed: Option<u64>,
}

impl TryFrom<SpecFile> for ScenarioSpec {
    type Error = Error;

    fn try_from(f: SpecFile) -> Result<Self> {
        let mut s = ScenarioSpec::defaults_for(f.mode.unwrap_or_default());
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = f.$field { s.$field = v; } )* };
        }
        take!(
            name, t, n_reps, sigma_z_star, rho_z_eps, rho_eta_eps, rho_x_z, rho_x_eps, rho_p_eps,
            rho_p_x, rho_p_z, eps_marginal, z_marginals, x_marginals, p_marginal, structural,
            alpha_level, seed
        );
        s.validate()?;
        Ok(s)
    }
}

/// A grid of scenarios sharing a base design: every combination of error
/// marginal and endogeneity setting, error marginal outermost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSweep {
    #[serde(default)]
    pub name: String,
    pub layout: TableLayout,
    pub base: ScenarioSpec,
    #[serde(default)]
    pub eps_marginals: Vec<Marginal>,
    #[serde(default)]
    pub rho_z_eps: Vec<Vec<f64>>,
    #[serde(default)]
    pub rho_p_eps: Vec<f64>,
}

impl ScenarioSweep {
    pub fn expand(&self) -> Result<Vec<ScenarioSpec>> {
        let eps = if self.eps_marginals.is_empty() {
            vec![self.base.eps_marginal.clone()]
        } else {
            self.eps_marginals.clone()
        };
        let z = if self.rho_z_eps.is_empty() {
            vec![self.base.rho_z_eps.clone()]
        } else {
            self.rho_z_eps.clone()
        };
        let p = if self.rho_p_eps.is_empty() {
            vec![self.base.rho_p_eps]
        } else {
            self.rho_p_eps.clone()
        };
        let mut out = Vec::with_capacity(eps.len() * z.len() * p.len());
        for e in &eps {
            for rz in &z {
                for rp in &p {
                    let spec = ScenarioSpec {
                        eps_marginal: e.clone(),
                        rho_z_eps: rz.clone(),
                        rho_p_eps: *rp,
                        ..self.base.clone()
                    };
                    spec.validate()?;
                    out.push(spec);
                }
            }
        }
        Ok(out)
    }

    /// Same sweep with a different replication count.
    pub fn with_reps(mut self, n_reps: usize) -> Self {
        self.base.n_reps = n_reps;
        self
    }
}
