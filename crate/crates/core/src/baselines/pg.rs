//! Per-depth sub-goal policy-gradient baseline: for each depth D a
//! stochastic policy predicts the root midpoint of a depth-D tree; the
//! policies are trained in ascending depth order and applied in
//! descending order, with a squared per-half path cost as the training
//! signal.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{CoreError, Result};
use crate::eval::{PathPolicy, TimestepLedger};
use crate::geometry::{Environment, StatePoint};
use crate::math;
use crate::midpoint::PathSequence;
use crate::neural::{Activation, AdamState, Mlp};

/// Base relative standard deviation (per unit endpoint distance).
pub const PG_BASE_STD: f64 = 0.05;

/// One midpoint policy: a network producing a residual mean and raw
/// standard deviations, plus a learnable per-coordinate deviation
/// offset applied proportionally to the endpoint distance.
#[derive(Debug, Clone)]
pub struct PgPolicy {
    pub net: Mlp,
    pub c: Vec<f64>,
}

impl PgPolicy {
    pub fn new<R: Rng + ?Sized>(env: &Environment, hidden: &[usize], rng: &mut R) -> Result<Self> {
        let d = env.rep_dim();
        let mut sizes = vec![2 * d];
        sizes.extend_from_slice(hidden);
        sizes.push(2 * d);
        Ok(PgPolicy {
            net: Mlp::init(sizes, Activation::Tanh, rng)?,
            c: vec![0.0; d],
        })
    }
}

/// Gaussian parameters of a policy at one endpoint pair: the mean is
/// the coordinate average plus the network residual; the deviation is
/// softplus(raw) plus (0.05 + softplus(c_i)) times the endpoint
/// distance.
#[derive(Debug, Clone)]
pub struct PgDistribution {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

fn endpoint_distance(s: &[f64], g: &[f64]) -> f64 {
    math::sqrt(s.iter().zip(g).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Evaluates the distribution (single pair). For training, the batched
/// internals below are used instead.
pub fn pg_distribution(policy: &PgPolicy, s: &[f64], g: &[f64]) -> Result<PgDistribution> {
    let d = policy.c.len();
    let mut input = s.to_vec();
    input.extend_from_slice(g);
    let (out, _) = policy.net.forward(&input)?;
    let r = endpoint_distance(s, g);
    let mut mean = vec![0.0; d];
    let mut std = vec![0.0; d];
    for k in 0..d {
        mean[k] = 0.5 * (s[k] + g[k]) + out[k];
        std[k] = math::softplus(out[d + k]) + (PG_BASE_STD + math::softplus(policy.c[k])) * r;
    }
    Ok(PgDistribution { mean, std })
}

fn gauss_log_prob(mean: &[f64], std: &[f64], x: &[f64]) -> f64 {
    let mut logp = 0.0;
    for k in 0..mean.len() {
        let z = (x[k] - mean[k]) / std[k];
        logp += -0.5 * z * z - math::ln(std[k]) - 0.5 * math::ln(2.0 * core::f64::consts::PI);
    }
    logp
}

/// Samples a midpoint; returns the projected point, the raw sample and
/// its log-density.
pub fn pg_sample_midpoint<R: Rng + ?Sized>(
    policy: &PgPolicy,
    env: &Environment,
    s: &StatePoint,
    g: &StatePoint,
    rng: &mut R,
) -> Result<(StatePoint, Vec<f64>, f64)> {
    let dist = pg_distribution(policy, &s.coords, &g.coords)?;
    let raw: Vec<f64> = dist
        .mean
        .iter()
        .zip(&dist.std)
        .map(|(m, sd)| m + sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let logp = gauss_log_prob(&dist.mean, &dist.std, &raw);
    Ok((env.clamp_project(&raw), raw, logp))
}

/// Deterministic midpoint: the distribution mean, projected.
pub fn pg_mean_midpoint(
    policy: &PgPolicy,
    env: &Environment,
    s: &StatePoint,
    g: &StatePoint,
) -> Result<StatePoint> {
    let dist = pg_distribution(policy, &s.coords, &g.coords)?;
    Ok(env.clamp_project(&dist.mean))
}

/// Recursively fills `points[lo..=hi]` using policies in descending
/// depth order: the slot midpoint comes from `stack[depth - 1]`.
fn fill_deterministic(
    stack: &[PgPolicy],
    env: &Environment,
    points: &mut [StatePoint],
    lo: usize,
    hi: usize,
    depth: u32,
) -> Result<()> {
    if depth == 0 {
        return Ok(());
    }
    let mid = (lo + hi) / 2;
    points[mid] = pg_mean_midpoint(&stack[depth as usize - 1], env, &points[lo], &points[hi])?;
    fill_deterministic(stack, env, points, lo, mid, depth - 1)?;
    fill_deterministic(stack, env, points, mid, hi, depth - 1)
}

/// Generates a depth-D path with the trained stack, all deterministic.
pub fn pg_generate(
    stack: &[PgPolicy],
    env: &Environment,
    s: &StatePoint,
    g: &StatePoint,
    depth: u32,
) -> Result<PathSequence> {
    if depth as usize > stack.len() {
        return Err(CoreError::InvalidInput(
            "requested depth exceeds the trained policy stack",
        ));
    }
    env.validate_point(s)?;
    env.validate_point(g)?;
    let n = (1usize << depth) + 1;
    let mut points = vec![s.clone(); n];
    points[n - 1] = g.clone();
    fill_deterministic(stack, env, &mut points, 0, n - 1, depth)?;
    Ok(PathSequence { points, depth })
}

/// Squared per-half cost of one generated sequence: the sum of the
/// first half of the leaf costs squared plus the second half squared.
pub fn pg_cost(leaf_costs: &[f64]) -> f64 {
    let half = leaf_costs.len() / 2;
    let a: f64 = leaf_costs[..half].iter().sum();
    let b: f64 = leaf_costs[half..].iter().sum();
    a * a + b * b
}

#[derive(Debug, Clone, PartialEq)]
pub struct PgConfig {
    pub d_max: u32,
    /// Training cycles for each depth 1..=D_max.
    pub budgets: Vec<u64>,
    pub lr: f64,
    pub hidden: Vec<usize>,
    pub clip: f64,
    pub ent_coef: f64,
    pub pairs_per_cycle: usize,
    pub samples_per_pair: usize,
    pub seed: u64,
}

impl PgConfig {
    pub fn defaults(d_max: u32, budgets: Vec<u64>, hidden: Vec<usize>, seed: u64) -> Self {
        PgConfig {
            d_max,
            budgets,
            lr: 5e-3,
            hidden,
            clip: 0.2,
            ent_coef: 1.0,
            pairs_per_cycle: 30,
            samples_per_pair: 10,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_max == 0 || self.budgets.len() != self.d_max as usize {
            return Err(CoreError::InvalidInput(
                "need one cycle budget per depth 1..=D_max",
            ));
        }
        if self.pairs_per_cycle == 0 || self.samples_per_pair == 0 {
            return Err(CoreError::InvalidInput("sample counts must be positive"));
        }
        if !(self.lr > 0.0) {
            return Err(CoreError::InvalidInput("learning rate must be positive"));
        }
        Ok(())
    }

    /// Total timesteps the schedule will record: one tree of depth D
    /// per sample, 2^D timesteps each.
    pub fn planned_timesteps(&self) -> u64 {
        let per_cycle = (self.pairs_per_cycle * self.samples_per_pair) as u64;
        self.budgets
            .iter()
            .enumerate()
            .map(|(i, b)| b * per_cycle * (1u64 << (i + 1)))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgCycleStats {
    pub depth: u32,
    pub cycle: u64,
    pub timestep: u64,
    pub mean_cost: f64,
    pub loss: f64,
}

/// Sequential trainer for the policy stack.
#[derive(Debug, Clone)]
pub struct PgLearner {
    pub env: Environment,
    pub config: PgConfig,
    pub stack: Vec<PgPolicy>,
    opts: Vec<AdamState>,
    pub rng: ChaCha20Rng,
    pub ledger: TimestepLedger,
}

impl PgLearner {
    pub fn new(env: Environment, config: PgConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
        let mut stack = Vec::with_capacity(config.d_max as usize);
        for _ in 0..config.d_max {
            stack.push(PgPolicy::new(&env, &config.hidden, &mut rng)?);
        }
        let opts = stack
            .iter()
            .map(|p| AdamState::new(config.lr, p.net.params().len() + p.c.len()))
            .collect();
        Ok(PgLearner {
            env,
            config,
            stack,
            opts,
            rng,
            ledger: TimestepLedger::new(),
        })
    }

    /// Per-depth optimizer states, index i for the depth-(i+1) policy.
    pub fn optimizer_states(&self) -> &[AdamState] {
        &self.opts
    }

    /// Rebuilds a learner from saved pieces.
    pub fn restore(
        env: Environment,
        config: PgConfig,
        stack: Vec<PgPolicy>,
        opts: Vec<AdamState>,
        rng: ChaCha20Rng,
        ledger: TimestepLedger,
    ) -> Result<Self> {
        config.validate()?;
        if stack.len() != config.d_max as usize || opts.len() != stack.len() {
            return Err(CoreError::ShapeMismatch {
                expected: config.d_max as usize,
                got: stack.len().min(opts.len()),
            });
        }
        for (p, o) in stack.iter().zip(&opts) {
            let total = p.net.params().len() + p.c.len();
            if o.moments().0.len() != total {
                return Err(CoreError::ShapeMismatch {
                    expected: total,
                    got: o.moments().0.len(),
                });
            }
        }
        Ok(PgLearner {
            env,
            config,
            stack,
            opts,
            rng,
            ledger,
        })
    }

    /// One training cycle for the policy at `depth`: sample endpoint
    /// pairs, draw root midpoints stochastically, complete the trees
    /// deterministically with the lower (frozen) policies, and take one
    /// clipped-surrogate step against the per-pair mean-cost baseline.
    pub fn train_cycle(&mut self, depth: u32) -> Result<PgCycleStats> {
        if depth == 0 || depth > self.config.d_max {
            return Err(CoreError::InvalidInput("depth outside 1..=D_max"));
        }
        let d = self.env.rep_dim();
        let pairs = self.config.pairs_per_cycle;
        let samples = self.config.samples_per_pair;
        let n = pairs * samples;
        let mut inputs = Vec::with_capacity(n * 2 * d);
        let mut raws = Vec::with_capacity(n * d);
        let mut logp_old = Vec::with_capacity(n);
        let mut costs = Vec::with_capacity(n);
        let mut advantages = vec![0.0; n];
        for pi in 0..pairs {
            let s = self.env.sample_free(&mut self.rng)?;
            let g = self.env.sample_free(&mut self.rng)?;
            for _ in 0..samples {
                let (mid, raw, logp) = pg_sample_midpoint(
                    &self.stack[depth as usize - 1],
                    &self.env,
                    &s,
                    &g,
                    &mut self.rng,
                )?;
                // Complete both halves deterministically.
                let count = (1usize << depth) + 1;
                let half = count / 2;
                let mut points = vec![s.clone(); count];
                points[half] = mid;
                points[count - 1] = g.clone();
                fill_deterministic(&self.stack, &self.env, &mut points, 0, half, depth - 1)?;
                fill_deterministic(
                    &self.stack,
                    &self.env,
                    &mut points,
                    half,
                    count - 1,
                    depth - 1,
                )?;
                let mut leaf = Vec::with_capacity(count - 1);
                for w in points.windows(2) {
                    leaf.push(self.env.obstructed_cost(&w[0], &w[1])?);
                }
                costs.push(pg_cost(&leaf));
                inputs.extend_from_slice(&s.coords);
                inputs.extend_from_slice(&g.coords);
                raws.extend_from_slice(&raw);
                logp_old.push(logp);
                self.ledger.record_cycle(depth);
            }
            // Baseline: the mean cost over this pair's samples.
            let base = costs[pi * samples..].iter().sum::<f64>() / samples as f64;
            for k in 0..samples {
                advantages[pi * samples + k] = costs[pi * samples + k] - base;
            }
        }

        let policy = &self.stack[depth as usize - 1];
        let (out, cache) = policy.net.forward_batch(&inputs, n)?;
        let scale = 1.0 / n as f64;
        let mut loss = 0.0;
        let mut dout = vec![0.0; n * 2 * d];
        let mut dc = vec![0.0; d];
        for i in 0..n {
            let s_row = &inputs[i * 2 * d..i * 2 * d + d];
            let g_row = &inputs[i * 2 * d + d..(i + 1) * 2 * d];
            let r = endpoint_distance(s_row, g_row);
            let mut logp = 0.0;
            let mut dlogp_dmean = vec![0.0; d];
            let mut dlogp_dstd = vec![0.0; d];
            let mut entropy = 0.0;
            let mut stds = vec![0.0; d];
            for k in 0..d {
                let mean = 0.5 * (s_row[k] + g_row[k]) + out[i * 2 * d + k];
                let std =
                    math::softplus(out[i * 2 * d + d + k]) + (PG_BASE_STD + math::softplus(self.c_at(depth, k))) * r;
                stds[k] = std;
                let z = (raws[i * d + k] - mean) / std;
                logp += -0.5 * z * z - math::ln(std) - 0.5 * math::ln(2.0 * core::f64::consts::PI);
                dlogp_dmean[k] = z / std;
                dlogp_dstd[k] = (z * z - 1.0) / std;
                entropy += math::ln(std) + 0.5 * math::ln(2.0 * core::f64::consts::PI) + 0.5;
            }
            let ratio = math::exp(logp - logp_old[i]);
            let a = advantages[i];
            let unclipped = ratio * a;
            let clipped = ratio.clamp(1.0 - self.config.clip, 1.0 + self.config.clip) * a;
            // Minimizing cost: keep the pessimistic (larger) branch.
            let (surr, active) = if unclipped >= clipped {
                (unclipped, true)
            } else {
                (
                    clipped,
                    (1.0 - self.config.clip..=1.0 + self.config.clip).contains(&ratio),
                )
            };
            loss += surr * scale - self.config.ent_coef * entropy * scale;
            let dl_dlogp = if active { a * ratio * scale } else { 0.0 };
            for k in 0..d {
                let mut dstd = dl_dlogp * dlogp_dstd[k];
                // Entropy gradient: d(-H)/d(std) = -1/std.
                dstd -= self.config.ent_coef * scale / stds[k];
                dout[i * 2 * d + k] = dl_dlogp * dlogp_dmean[k];
                dout[i * 2 * d + d + k] = dstd * math::sigmoid(out[i * 2 * d + d + k]);
                dc[k] += dstd * math::sigmoid(self.c_at(depth, k)) * r;
            }
        }
        if !loss.is_finite() {
            return Err(CoreError::NonFinite("policy-gradient loss"));
        }
        let mut ngrads = policy.net.zero_grads();
        policy.net.backward_batch(&cache, &dout, &mut ngrads)?;
        let mut grads = ngrads;
        grads.extend_from_slice(&dc);
        let policy = &mut self.stack[depth as usize - 1];
        let mut params = policy.net.params().to_vec();
        params.extend_from_slice(&policy.c);
        self.opts[depth as usize - 1].update(&mut params, &grads)?;
        let np = policy.net.params().len();
        policy.net.set_params(&params[..np])?;
        policy.c.copy_from_slice(&params[np..]);

        Ok(PgCycleStats {
            depth,
            cycle: 0,
            timestep: self.ledger.total(),
            mean_cost: costs.iter().sum::<f64>() / n as f64,
            loss,
        })
    }

    fn c_at(&self, depth: u32, k: usize) -> f64 {
        self.stack[depth as usize - 1].c[k]
    }

    /// Trains depths in ascending order through their cycle budgets.
    /// The hook sees (learner, stats) after every cycle; during the
    /// training of depth D the stack should be evaluated at depth D.
    pub fn run<F: FnMut(&PgLearner, &PgCycleStats) -> Result<()>>(
        &mut self,
        mut hook: F,
    ) -> Result<()> {
        for depth in 1..=self.config.d_max {
            for cycle in 0..self.config.budgets[depth as usize - 1] {
                let mut stats = self.train_cycle(depth)?;
                stats.cycle = cycle;
                hook(self, &stats)?;
            }
        }
        Ok(())
    }

    pub fn policy(&self) -> PgStackPolicy<'_> {
        PgStackPolicy { stack: &self.stack }
    }
}

/// Deterministic evaluation adapter for a trained stack.
pub struct PgStackPolicy<'a> {
    pub stack: &'a [PgPolicy],
}

impl PathPolicy for PgStackPolicy<'_> {
    fn generate(
        &self,
        env: &Environment,
        s: &StatePoint,
        g: &StatePoint,
        segments: usize,
    ) -> Result<Vec<StatePoint>> {
        if segments == 0 || !segments.is_power_of_two() {
            return Err(CoreError::InvalidInput(
                "tree policies need a power-of-two segment count",
            ));
        }
        let seq = pg_generate(self.stack, env, s, g, segments.trailing_zeros())?;
        Ok(seq.points)
    }
}
