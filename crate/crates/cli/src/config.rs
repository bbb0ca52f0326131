//! Run configuration: a versioned JSON document, overridable from flags.

use peakon_core::generate::{random_state, seeded_rng, GeometricProfile, RandomSpec};
use peakon_core::lax::{Family, Permutation, Sector};
use peakon_core::ode::IntegratorConfig;
use peakon_core::{Config, State};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    #[default]
    Ode,
    Factorization,
    Both,
}

/// Exactly one source of initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Initial {
    Explicit { q: Vec<f64>, p: Vec<f64> },
    Geometric(GeometricProfile),
    Random(RandomSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Integrator {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Unbounded when absent.
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
    pub output_stride: usize,
    pub max_steps: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        let d = Config::default();
        Self {
            rel_tol: d.rel_tol,
            abs_tol: d.abs_tol,
            max_step: None,
            initial_step: None,
            output_stride: d.output_stride,
            max_steps: d.max_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Asymptotics {
    /// Largest `t_end` the automatic extension may reach.
    pub cap: f64,
    pub momentum_threshold: f64,
    pub slope_threshold: f64,
}

impl Default for Asymptotics {
    fn default() -> Self {
        let t = peakon_core::asymptotics::Thresholds::default();
        Self { cap: 3200.0, momentum_threshold: t.momentum, slope_threshold: t.slope }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Required for generators; checked against the arrays otherwise.
    pub n: Option<usize>,
    pub sector: Sector,
    /// Must agree with the sector's family when given.
    pub flow: Option<Family>,
    pub initial: Option<Initial>,
    pub seed: Option<u64>,
    pub t_end: f64,
    pub solver: Solver,
    /// Largest substep of the factorization route.
    pub dt_max: f64,
    pub integrator: Integrator,
    pub asymptotics: Asymptotics,
    pub output_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            n: None,
            sector: Sector::Minus,
            flow: None,
            initial: None,
            seed: None,
            t_end: 10.0,
            solver: Solver::Ode,
            dt_max: 0.5,
            integrator: Integrator::default(),
            asymptotics: Asymptotics::default(),
            output_dir: "out".into(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &str) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read config {path}: {e}")))?;
        let cfg: RunConfig = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("config {path}: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |field: &str, msg: String| Err(CliError::Config(format!("{field}: {msg}")));
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad("t_end", format!("must be finite and non-negative, got {}", self.t_end));
        }
        if !(self.dt_max.is_finite() && self.dt_max > 0.0) {
            return bad("dt_max", format!("must be positive, got {}", self.dt_max));
        }
        if let Some(f) = self.flow {
            if f != self.sector.family() {
                return bad("flow", format!("{f:?} flow does not match sector {}", self.sector.label()));
            }
        }
        let n = match &self.initial {
            None => return bad("initial", "no initial data (explicit q/p, geometric or random)".into()),
            Some(Initial::Explicit { q, p }) => {
                if q.len() != p.len() {
                    return bad("q", format!("length {} differs from p length {}", q.len(), p.len()));
                }
                if let Some(n) = self.n {
                    if q.len() != n {
                        return bad("q", format!("length {} differs from n = {n}", q.len()));
                    }
                }
                q.len()
            }
            Some(Initial::Geometric(g)) => {
                g.validate().map_err(|e| CliError::Config(format!("initial.geometric: {e}")))?;
                self.generator_n()?
            }
            Some(Initial::Random(r)) => {
                r.validate().map_err(|e| CliError::Config(format!("initial.random: {e}")))?;
                self.generator_n()?
            }
        };
        if n == 0 {
            return bad("n", "must be at least 1".into());
        }
        if let Some(perm) = self.sector.permutation() {
            if perm.len() != n {
                return bad("sector.permutation", format!("length {} differs from n = {n}", perm.len()));
            }
        }
        self.integrator_config()?.validate().map_err(|e| CliError::Config(format!("integrator: {e}")))?;
        Ok(())
    }

    fn generator_n(&self) -> Result<usize, CliError> {
        if self.seed.is_none() {
            return Err(CliError::Config("seed: required when a generator supplies the initial data".into()));
        }
        self.n.ok_or_else(|| CliError::Config("n: required when a generator supplies the initial data".into()))
    }

    pub fn integrator_config(&self) -> Result<Config, CliError> {
        let i = &self.integrator;
        Ok(IntegratorConfig {
            rel_tol: i.rel_tol,
            abs_tol: i.abs_tol,
            initial_step: i.initial_step,
            max_step: i.max_step.unwrap_or(f64::INFINITY),
            t_end: self.t_end,
            output_stride: i.output_stride,
            max_steps: i.max_steps,
        })
    }

    pub fn thresholds(&self) -> peakon_core::asymptotics::Thresholds {
        peakon_core::asymptotics::Thresholds {
            momentum: self.asymptotics.momentum_threshold,
            slope: self.asymptotics.slope_threshold,
        }
    }

    /// Builds and validates the initial state.
    pub fn initial_state(&self) -> Result<State, CliError> {
        self.validate()?;
        let sector = self.sector.clone();
        let s = match self.initial.as_ref().expect("validated") {
            Initial::Explicit { q, p } => State::from_f64(q, p, sector),
            Initial::Geometric(g) => g.state(self.n.expect("validated"), sector),
            Initial::Random(r) => {
                let mut rng = seeded_rng(self.seed.expect("validated"));
                random_state(&mut rng, self.n.expect("validated"), sector, r)
            }
        };
        s.map_err(|e| CliError::Config(format!("initial: {e}")))
    }

    /// `C r^{n+1}/(1−r)` bounds the momentum dropped by truncating a
    /// geometric profile; other sources have no tail.
    pub fn tail_bound(&self) -> Option<f64> {
        match (&self.initial, self.n) {
            (Some(Initial::Geometric(g)), Some(n)) => Some(g.tail_bound(n)),
            _ => None,
        }
    }
}

/// Flag values that override the file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct Overrides {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// plus | minus
    #[arg(long)]
    pub sector: Option<String>,
    /// One-based permutation, e.g. 2,3,1.
    #[arg(long, value_delimiter = ',')]
    pub perm: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub q: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub p: Option<Vec<f64>>,
    /// Geometric profile C,r,gap.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub geometric: Option<Vec<f64>>,
    /// Random initial data with the default ranges.
    #[arg(long)]
    pub random: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    #[arg(long, value_enum)]
    pub solver: Option<Solver>,
    #[arg(long)]
    pub dt_max: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub max_step: Option<f64>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Cap for automatic t_end extension.
    #[arg(long)]
    pub cap: Option<f64>,
    #[arg(long)]
    pub out: Option<String>,
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(n) = self.n {
            cfg.n = Some(n);
        }
        if let Some(s) = &self.sector {
            let family = match s.as_str() {
                "plus" | "+" => Family::Plus,
                "minus" | "-" => Family::Minus,
                other => return Err(CliError::Config(format!("sector: expected plus or minus, got {other}"))),
            };
            cfg.sector = Sector::with_permutation(family, cfg.sector.permutation().cloned());
        }
        if let Some(images) = &self.perm {
            let perm = Permutation::from_one_based(images).map_err(|e| CliError::Config(format!("perm: {e}")))?;
            cfg.sector = Sector::with_permutation(cfg.sector.family(), Some(perm));
        }
        let sources = [self.q.is_some() || self.p.is_some(), self.geometric.is_some(), self.random]
            .iter()
            .filter(|&&b| b)
            .count();
        if sources > 1 {
            return Err(CliError::Config("initial: give only one of --q/--p, --geometric, --random".into()));
        }
        if self.q.is_some() || self.p.is_some() {
            let (q, p) = match (&self.q, &self.p, &cfg.initial) {
                (Some(q), Some(p), _) => (q.clone(), p.clone()),
                (Some(q), None, Some(Initial::Explicit { p, .. })) => (q.clone(), p.clone()),
                (None, Some(p), Some(Initial::Explicit { q, .. })) => (q.clone(), p.clone()),
                _ => return Err(CliError::Config("initial: --q and --p must be given together".into())),
            };
            cfg.initial = Some(Initial::Explicit { q, p });
        }
        if let Some(g) = &self.geometric {
            if g.len() != 3 {
                return Err(CliError::Config(format!("geometric: expected C,r,gap, got {} values", g.len())));
            }
            cfg.initial = Some(Initial::Geometric(GeometricProfile { c: g[0], r: g[1], gap: g[2] }));
        }
        if self.random {
            cfg.initial = Some(Initial::Random(RandomSpec::default()));
        }
        if let Some(v) = self.seed {
            cfg.seed = Some(v);
        }
        if let Some(v) = self.t_end {
            cfg.t_end = v;
        }
        if let Some(v) = self.solver {
            cfg.solver = v;
        }
        if let Some(v) = self.dt_max {
            cfg.dt_max = v;
        }
        if let Some(v) = self.rel_tol {
            cfg.integrator.rel_tol = v;
        }
        if let Some(v) = self.abs_tol {
            cfg.integrator.abs_tol = v;
        }
        if let Some(v) = self.max_step {
            cfg.integrator.max_step = Some(v);
        }
        if let Some(v) = self.stride {
            cfg.integrator.output_stride = v;
        }
        if let Some(v) = self.cap {
            cfg.asymptotics.cap = v;
        }
        if let Some(v) = &self.out {
            cfg.output_dir = v.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
