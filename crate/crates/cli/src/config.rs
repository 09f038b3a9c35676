//! TOML experiment configuration and its resolution into concrete
//! training setups.
//!
//! A config names a method, an environment, a seed and a budget;
//! method-specific hyperparameters are filled from per-environment
//! defaults (small nets and larger learning rates on the disk
//! environments, deeper nets and smaller rates elsewhere) and can be
//! overridden field by field in the `[overrides]` table.
//!
//! ```toml
//! method = "our_c"           # our_t | our_c | inter | two_one | cut | seq | pg
//! seed = 0
//! total_timesteps = 1000000
//! d_max = 4
//! epsilon = 0.2
//!
//! [environment]
//! kind = "matsumoto"         # matsumoto | carlike | euclid2d |
//!                            # euclid2d_free | arm3 | three_agents | multi_agent
//! # obstacles = [[-0.55, -0.25, -1.0, 0.35], [0.25, 0.55, -0.35, 1.0]]
//! # c_p = 10.0               # collision penalty override
//! # agents = 3               # multi_agent only
//! # d_thres = 0.5            # multi_agent only
//!
//! [eval]                     # optional; defaults shown
//! pairs = 100
//! seed = 12345
//! # segments = 16            # default 2^d_max
//!
//! [overrides]                # optional; every field optional
//! # actor_lr, critic_lr, hidden, batch_size, epochs, td_lambda, c_cut
//! # lr, rollout, horizon, clip, gae_lambda, vf_coef, ent_coef, max_grad_norm
//! # budgets, pairs_per_cycle, samples_per_pair
//! ```

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use midpoint_core::baselines::pg::PgConfig;
use midpoint_core::baselines::seq::PpoConfig;
use midpoint_core::geometry::{Environment, Rect};
use midpoint_core::midpoint::{
    ActorVariant, ScheduleStrategy, TrainConfig, VariantConfig,
};

/// A configuration problem; mapped to exit code 2 by the binary.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Midpoint tree, timestep-based depth schedule.
    OurT,
    /// Midpoint tree, cycle-based depth schedule.
    OurC,
    /// Plain-sum actor objective (any intermediate point minimizes it).
    Inter,
    /// 2:1 division-point objective.
    TwoOne,
    /// Plain-sum objective over cost targets truncated at a cutoff.
    Cut,
    /// Sequential goal-conditioned PPO baseline.
    Seq,
    /// Per-depth sub-goal policy-gradient baseline.
    Pg,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::OurT => "our_t",
            Method::OurC => "our_c",
            Method::Inter => "inter",
            Method::TwoOne => "two_one",
            Method::Cut => "cut",
            Method::Seq => "seq",
            Method::Pg => "pg",
        }
    }

    pub fn is_tree(self) -> bool {
        !matches!(self, Method::Seq | Method::Pg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub kind: String,
    /// Rectangular obstacles as [x_min, x_max, y_min, y_max] rows
    /// (euclid2d only). Omitted: the default two-wall map.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub obstacles: Option<Vec<[f64; 4]>>,
    /// Collision penalty override.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_p: Option<f64>,
    /// Agent count (multi_agent only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub agents: Option<usize>,
    /// Pairwise collision distance threshold (multi_agent only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_thres: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalConfig {
    /// Endpoint pairs in the fixed evaluation set.
    pub pairs: usize,
    /// Seed of the evaluation set (independent of the training seed).
    pub seed: u64,
    /// Path segment count; None means 2^d_max.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segments: Option<usize>,
    /// Timesteps between periodic evaluations during training;
    /// None means one twentieth of the budget.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub every: Option<u64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            pairs: 100,
            seed: 12345,
            segments: None,
            every: None,
        }
    }
}

/// Optional per-field hyperparameter overrides. Fields irrelevant to
/// the selected method are rejected at resolution time.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Overrides {
    // Shared.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hidden: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    // Midpoint-tree methods.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub actor_lr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub critic_lr: Option<f64>,
    /// TD(lambda) target accumulation; omitted means Monte Carlo.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub td_lambda: Option<f64>,
    /// Truncation value for the cut variant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_cut: Option<f64>,
    // Sequential PPO baseline.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rollout: Option<usize>,
    /// Episode horizon; defaults to the evaluation segment count.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clip: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gae_lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vf_coef: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ent_coef: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_grad_norm: Option<f64>,
    // Sub-goal policy gradient baseline.
    /// Training cycles per depth 1..=d_max; defaults split the
    /// timestep budget evenly across depths.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budgets: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairs_per_cycle: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_per_pair: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: Method,
    pub seed: u64,
    pub total_timesteps: u64,
    pub d_max: u32,
    pub epsilon: f64,
    pub environment: EnvironmentConfig,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub overrides: Overrides,
}

/// A fully resolved training setup.
#[derive(Debug, Clone)]
pub enum ResolvedMethod {
    Tree(TrainConfig),
    Seq(PpoConfig),
    Pg(PgConfig),
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> anyhow::Result<String> {
        Ok(toml::to_string_pretty(self)?)
    }

    /// Whether the environment uses the small-network defaults.
    fn small_net_env(&self) -> bool {
        self.environment.kind == "matsumoto"
    }

    pub fn build_environment(&self) -> anyhow::Result<Environment> {
        let e = &self.environment;
        let reject = |field: &str| -> anyhow::Result<()> {
            Err(bad(format!(
                "environment field `{field}` does not apply to kind `{}`",
                e.kind
            )))
        };
        let mut env = match e.kind.as_str() {
            "matsumoto" => {
                if e.obstacles.is_some() {
                    reject("obstacles")?;
                }
                Environment::matsumoto()
            }
            "carlike" => {
                if e.obstacles.is_some() {
                    reject("obstacles")?;
                }
                Environment::carlike()
            }
            "euclid2d" => match &e.obstacles {
                None => Environment::euclid2d_default_map(),
                Some(rows) => Environment::euclid2d(
                    rows.iter()
                        .map(|r| {
                            if r[0] > r[1] || r[2] > r[3] {
                                Err(bad("obstacle rectangle has inverted bounds"))
                            } else {
                                Ok(Rect {
                                    x_min: r[0],
                                    x_max: r[1],
                                    y_min: r[2],
                                    y_max: r[3],
                                })
                            }
                        })
                        .collect::<anyhow::Result<Vec<_>>>()?,
                ),
            },
            "euclid2d_free" => {
                if e.obstacles.is_some() {
                    reject("obstacles")?;
                }
                Environment::euclid2d_free()
            }
            "arm3" => {
                if e.obstacles.is_some() {
                    reject("obstacles")?;
                }
                Environment::arm3()
            }
            "three_agents" => {
                if e.obstacles.is_some() {
                    reject("obstacles")?;
                }
                Environment::three_agents()
            }
            "multi_agent" => {
                if e.obstacles.is_some() {
                    reject("obstacles")?;
                }
                let agents = e.agents.ok_or_else(|| bad("multi_agent needs `agents`"))?;
                let d_thres = e.d_thres.ok_or_else(|| bad("multi_agent needs `d_thres`"))?;
                if agents == 0 || !(d_thres > 0.0) {
                    return Err(bad("multi_agent needs agents >= 1 and d_thres > 0"));
                }
                Environment::multi_agent(agents, d_thres)
            }
            other => {
                return Err(bad(format!("unknown environment kind `{other}`")));
            }
        };
        if e.kind != "multi_agent" && (e.agents.is_some() || e.d_thres.is_some()) {
            return Err(bad("`agents`/`d_thres` only apply to kind `multi_agent`"));
        }
        if let Some(c_p) = e.c_p {
            if !(c_p >= 0.0) {
                return Err(bad("c_p must be nonnegative"));
            }
            env.c_p = c_p;
        }
        Ok(env)
    }

    /// Training timesteps between periodic evaluations.
    pub fn eval_every(&self) -> u64 {
        self.eval.every.unwrap_or((self.total_timesteps / 20).max(1))
    }

    /// Evaluation segment count: the explicit value or 2^d_max.
    pub fn eval_segments(&self) -> anyhow::Result<usize> {
        match self.eval.segments {
            Some(s) if s > 0 => Ok(s),
            Some(_) => Err(bad("eval.segments must be positive")),
            None => {
                if self.d_max >= usize::BITS {
                    return Err(bad("d_max too large for a segment count"));
                }
                Ok(1usize << self.d_max)
            }
        }
    }

    fn reject_foreign_overrides(&self) -> anyhow::Result<()> {
        let o = &self.overrides;
        let mut foreign: Vec<&str> = Vec::new();
        let tree_only = [
            ("actor_lr", o.actor_lr.is_some()),
            ("critic_lr", o.critic_lr.is_some()),
            ("td_lambda", o.td_lambda.is_some()),
            ("c_cut", o.c_cut.is_some()),
        ];
        let seq_only = [
            ("rollout", o.rollout.is_some()),
            ("horizon", o.horizon.is_some()),
            ("gae_lambda", o.gae_lambda.is_some()),
            ("vf_coef", o.vf_coef.is_some()),
            ("max_grad_norm", o.max_grad_norm.is_some()),
        ];
        let pg_only = [
            ("budgets", o.budgets.is_some()),
            ("pairs_per_cycle", o.pairs_per_cycle.is_some()),
            ("samples_per_pair", o.samples_per_pair.is_some()),
        ];
        let clip_like = [
            ("lr", o.lr.is_some()),
            ("clip", o.clip.is_some()),
            ("ent_coef", o.ent_coef.is_some()),
        ];
        if !self.method.is_tree() {
            foreign.extend(tree_only.iter().filter(|(_, set)| *set).map(|(n, _)| *n));
        }
        if self.method != Method::Seq {
            foreign.extend(seq_only.iter().filter(|(_, set)| *set).map(|(n, _)| *n));
        }
        if self.method != Method::Pg {
            foreign.extend(pg_only.iter().filter(|(_, set)| *set).map(|(n, _)| *n));
        }
        if self.method.is_tree() {
            foreign.extend(clip_like.iter().filter(|(_, set)| *set).map(|(n, _)| *n));
        }
        if let Some(name) = foreign.first() {
            return Err(bad(format!(
                "override `{name}` does not apply to method `{}`",
                self.method.name()
            )));
        }
        Ok(())
    }

    fn default_hidden(&self) -> Vec<usize> {
        if self.small_net_env() {
            vec![64, 64]
        } else {
            vec![400, 300, 300]
        }
    }

    /// Resolves the configuration into an environment plus a concrete
    /// method setup, applying per-environment defaults and overrides.
    pub fn resolve(&self) -> anyhow::Result<(Environment, ResolvedMethod)> {
        if self.total_timesteps == 0 {
            return Err(bad("total_timesteps must be positive"));
        }
        if self.d_max == 0 || self.d_max > 20 {
            return Err(bad("d_max must lie in 1..=20"));
        }
        if !(self.epsilon > 0.0) {
            return Err(bad("epsilon must be positive"));
        }
        if self.eval.pairs == 0 {
            return Err(bad("eval.pairs must be positive"));
        }
        self.reject_foreign_overrides()?;
        let env = self.build_environment()?;
        let o = &self.overrides;
        let hidden = o.hidden.clone().unwrap_or_else(|| self.default_hidden());
        let resolved = match self.method {
            m if m.is_tree() => {
                let default_lr = if self.small_net_env() { 3e-5 } else { 1e-6 };
                let (variant, schedule) = match m {
                    Method::OurT => (ActorVariant::Midpoint, ScheduleStrategy::TimestepBased),
                    Method::OurC => (ActorVariant::Midpoint, ScheduleStrategy::CycleBased),
                    Method::Inter => (ActorVariant::Inter, ScheduleStrategy::CycleBased),
                    Method::TwoOne => (ActorVariant::TwoOne, ScheduleStrategy::CycleBased),
                    Method::Cut => (ActorVariant::Cut, ScheduleStrategy::CycleBased),
                    _ => unreachable!(),
                };
                let variant = VariantConfig {
                    actor_variant: variant,
                    c_cut: o.c_cut.unwrap_or(30.0),
                    td_lambda: o.td_lambda,
                    symmetric_losses: env.symmetric,
                };
                ResolvedMethod::Tree(TrainConfig {
                    total_timesteps: self.total_timesteps,
                    d_max: self.d_max,
                    batch_size: o.batch_size.unwrap_or(256),
                    epochs: o.epochs.unwrap_or(10),
                    critic_lr: o.critic_lr.unwrap_or(default_lr),
                    actor_lr: o.actor_lr.unwrap_or(default_lr),
                    hidden,
                    schedule,
                    variant,
                    epsilon: self.epsilon,
                    seed: self.seed,
                })
            }
            Method::Seq => {
                let default_lr = if self.small_net_env() { 3e-3 } else { 3e-4 };
                ResolvedMethod::Seq(PpoConfig {
                    total_timesteps: self.total_timesteps,
                    epsilon: self.epsilon,
                    horizon: match o.horizon {
                        Some(h) => h,
                        None => self.eval_segments()?,
                    },
                    rollout: o.rollout.unwrap_or(2048),
                    batch_size: o.batch_size.unwrap_or(128),
                    epochs: o.epochs.unwrap_or(10),
                    lr: o.lr.unwrap_or(default_lr),
                    hidden,
                    clip: o.clip.unwrap_or(0.2),
                    gae_lambda: o.gae_lambda.unwrap_or(0.95),
                    vf_coef: o.vf_coef.unwrap_or(0.5),
                    ent_coef: o.ent_coef.unwrap_or(0.0),
                    max_grad_norm: o.max_grad_norm.unwrap_or(0.5),
                    seed: self.seed,
                })
            }
            Method::Pg => {
                let pairs = o.pairs_per_cycle.unwrap_or(30);
                let samples = o.samples_per_pair.unwrap_or(10);
                if pairs == 0 || samples == 0 {
                    return Err(bad("pairs_per_cycle and samples_per_pair must be positive"));
                }
                let budgets = match &o.budgets {
                    Some(b) => {
                        if b.len() != self.d_max as usize {
                            return Err(bad(format!(
                                "budgets must list {} cycle counts (one per depth)",
                                self.d_max
                            )));
                        }
                        b.clone()
                    }
                    None => default_pg_budgets(
                        self.total_timesteps,
                        self.d_max,
                        (pairs * samples) as u64,
                    ),
                };
                ResolvedMethod::Pg(PgConfig {
                    d_max: self.d_max,
                    budgets,
                    lr: o.lr.unwrap_or(5e-3),
                    hidden,
                    clip: o.clip.unwrap_or(0.2),
                    ent_coef: o.ent_coef.unwrap_or(1.0),
                    pairs_per_cycle: pairs,
                    samples_per_pair: samples,
                    seed: self.seed,
                })
            }
            _ => unreachable!(),
        };
        // Surface core-side validation failures as config errors.
        let check = match &resolved {
            ResolvedMethod::Tree(c) => c.validate(),
            ResolvedMethod::Seq(c) => c.validate(),
            ResolvedMethod::Pg(c) => c.validate(),
        };
        check.map_err(|e| bad(e.to_string()))?;
        Ok((env, resolved))
    }
}

/// Splits a timestep budget evenly across depths: depth d costs
/// pairs*samples*2^d timesteps per cycle, so its cycle count is the
/// per-depth share divided by that (at least one cycle each).
pub fn default_pg_budgets(total: u64, d_max: u32, per_cycle: u64) -> Vec<u64> {
    let share = total / d_max as u64;
    (1..=d_max)
        .map(|d| (share / (per_cycle << d)).max(1))
        .collect()
}
