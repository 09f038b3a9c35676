//! Midpoint-tree learner: recursive tree generation, data collection
//! with accumulated cost targets, critic and actor losses (with
//! variants), depth schedules, and the training loop.
//!
//! The actor maps a pair of states to a Gaussian over the raw
//! representation of a midpoint; the critic maps a pair of states to a
//! raw value whose exponential-minus-one is the distance estimate (so
//! the critic's raw output lives in log(distance + 1) space).

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{CoreError, Result};
use crate::eval::{PathPolicy, TimestepLedger};
use crate::geometry::{Environment, StatePoint};
use crate::math;
use crate::neural::{Activation, AdamState, Mlp, LOG_STD_MAX, LOG_STD_MIN};

/// A generated midpoint-tree path: 2^depth + 1 points from s to g.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSequence {
    pub points: Vec<StatePoint>,
    pub depth: u32,
}

/// One training record: an estimated distance c from s to g.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainTuple {
    pub s: StatePoint,
    pub g: StatePoint,
    pub c: f64,
}

/// How training progress maps to tree depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleStrategy {
    /// Depth grows with the timestep ledger: depth = floor(t / t_d).
    TimestepBased,
    /// Depth grows with the collection-call count: depth = floor(c / c_d).
    CycleBased,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleSpec {
    pub strategy: ScheduleStrategy,
    pub total_timesteps: u64,
    pub d_max: u32,
}

impl ScheduleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.total_timesteps == 0 {
            return Err(CoreError::InvalidInput("total timesteps must be positive"));
        }
        if self.d_max == 0 {
            return Err(CoreError::InvalidInput("maximum depth must be at least 1"));
        }
        Ok(())
    }

    /// Progress interval per depth increment: t_d = floor(T/D_max) + 1
    /// for the timestep schedule, c_d = floor(T/(2^{D_max+1} - 1)) + 1
    /// for the cycle schedule.
    pub fn interval(&self) -> u64 {
        match self.strategy {
            ScheduleStrategy::TimestepBased => self.total_timesteps / self.d_max as u64 + 1,
            ScheduleStrategy::CycleBased => {
                self.total_timesteps / ((1u64 << (self.d_max + 1)) - 1) + 1
            }
        }
    }
}

/// Depth for a given progress value (timestep or cycle count per the
/// strategy), capped at D_max.
pub fn schedule_depth(spec: &ScheduleSpec, progress: u64) -> u32 {
    let depth = progress / spec.interval();
    (depth.min(spec.d_max as u64)) as u32
}

/// Actor objective family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActorVariant {
    /// Squared values: V(s,z)^2 + V(z,g)^2, plus smoothing.
    Midpoint,
    /// Plain sum V(s,z) + V(z,g): any intermediate point minimizes it.
    Inter,
    /// V(s,z)^2 + 2 V(z,g)^2: targets the 2:1 division point.
    TwoOne,
    /// Inter objective over cost targets truncated at a cutoff.
    Cut,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VariantConfig {
    pub actor_variant: ActorVariant,
    /// Replacement value for leaf costs at or above epsilon (cut only).
    pub c_cut: f64,
    /// None = Monte Carlo accumulation; Some(lambda) = TD(lambda).
    pub td_lambda: Option<f64>,
    /// Add the symmetry losses (for environments with symmetric d).
    pub symmetric_losses: bool,
}

impl VariantConfig {
    pub fn midpoint(symmetric: bool) -> Self {
        VariantConfig {
            actor_variant: ActorVariant::Midpoint,
            c_cut: 30.0,
            td_lambda: None,
            symmetric_losses: symmetric,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(l) = self.td_lambda {
            if !(0.0..=1.0).contains(&l) {
                return Err(CoreError::InvalidInput("lambda must lie in [0, 1]"));
            }
        }
        if self.actor_variant == ActorVariant::Cut && !(self.c_cut > 0.0) {
            return Err(CoreError::InvalidInput("cut value must be positive"));
        }
        Ok(())
    }
}

/// The per-pair actor objective as a function of the two critic values
/// around the candidate point z. Shared by training and by desk-scale
/// objective sweeps.
pub fn variant_pair_objective(variant: ActorVariant, v_sz: f64, v_zg: f64) -> f64 {
    match variant {
        ActorVariant::Midpoint => v_sz * v_sz + v_zg * v_zg,
        ActorVariant::Inter | ActorVariant::Cut => v_sz + v_zg,
        ActorVariant::TwoOne => v_sz * v_sz + 2.0 * v_zg * v_zg,
    }
}

/// Builds an actor network for the environment: input is a
/// concatenated state pair, output is mean and (clamped) log-std per
/// representation coordinate.
pub fn build_actor<R: Rng + ?Sized>(
    env: &Environment,
    hidden: &[usize],
    rng: &mut R,
) -> Result<Mlp> {
    let d = env.rep_dim();
    let mut sizes = vec![2 * d];
    sizes.extend_from_slice(hidden);
    sizes.push(2 * d);
    Mlp::init(sizes, Activation::Relu, rng)
}

/// Builds a critic network: state pair in, one raw value out.
pub fn build_critic<R: Rng + ?Sized>(
    env: &Environment,
    hidden: &[usize],
    rng: &mut R,
) -> Result<Mlp> {
    let d = env.rep_dim();
    let mut sizes = vec![2 * d];
    sizes.extend_from_slice(hidden);
    sizes.push(1);
    Mlp::init_zero_bias(sizes, Activation::Relu, rng)
}

fn check_actor_shape(actor: &Mlp, d: usize) -> Result<()> {
    if actor.input_dim() != 2 * d || actor.output_dim() != 2 * d {
        return Err(CoreError::ShapeMismatch {
            expected: 2 * d,
            got: actor.output_dim(),
        });
    }
    Ok(())
}

fn check_critic_shape(critic: &Mlp, d: usize) -> Result<()> {
    if critic.input_dim() != 2 * d || critic.output_dim() != 1 {
        return Err(CoreError::ShapeMismatch {
            expected: 2 * d,
            got: critic.input_dim(),
        });
    }
    Ok(())
}

fn pair_input(left: &[f64], right: &[f64], n: usize, d: usize) -> Vec<f64> {
    let mut input = Vec::with_capacity(n * 2 * d);
    for i in 0..n {
        input.extend_from_slice(&left[i * d..(i + 1) * d]);
        input.extend_from_slice(&right[i * d..(i + 1) * d]);
    }
    input
}

/// Saved state of one batched actor invocation, enough for backward.
struct ActorPass {
    cache: crate::neural::ForwardCache,
    /// Clamped log-stds, n x d.
    log_std: Vec<f64>,
    /// 1.0 where the raw log-std was within the clamp bounds, else 0.0.
    in_bounds: Vec<f64>,
    noise: Vec<f64>,
    n: usize,
    d: usize,
}

/// Runs the actor on a batch of state pairs. `noise` is a caller-fixed
/// standard-normal block (n x d); None means deterministic (take the
/// mean). Returns clamped/projected waypoint representations (n x d).
fn actor_apply_batch(
    actor: &Mlp,
    env: &Environment,
    left: &[f64],
    right: &[f64],
    n: usize,
    noise: Option<&[f64]>,
) -> Result<(Vec<f64>, ActorPass)> {
    let d = env.rep_dim();
    check_actor_shape(actor, d)?;
    if left.len() != n * d || right.len() != n * d {
        return Err(CoreError::ShapeMismatch {
            expected: n * d,
            got: left.len().max(right.len()),
        });
    }
    if let Some(nz) = noise {
        if nz.len() != n * d {
            return Err(CoreError::ShapeMismatch {
                expected: n * d,
                got: nz.len(),
            });
        }
    }
    let input = pair_input(left, right, n, d);
    let (raw, cache) = actor.forward_batch(&input, n)?;
    let mut log_std = vec![0.0; n * d];
    let mut in_bounds = vec![0.0; n * d];
    let mut z = vec![0.0; n * d];
    for i in 0..n {
        for k in 0..d {
            let mean = raw[i * 2 * d + k];
            let rls = raw[i * 2 * d + d + k];
            let ls = rls.clamp(LOG_STD_MIN, LOG_STD_MAX);
            log_std[i * d + k] = ls;
            in_bounds[i * d + k] = if (LOG_STD_MIN..=LOG_STD_MAX).contains(&rls) {
                1.0
            } else {
                0.0
            };
            let eps = noise.map_or(0.0, |nz| nz[i * d + k]);
            z[i * d + k] = mean + math::exp(ls) * eps;
        }
    }
    let mut projected = Vec::with_capacity(n * d);
    for i in 0..n {
        let p = env.clamp_project(&z[i * d..(i + 1) * d]);
        projected.extend_from_slice(&p.coords);
    }
    let noise = noise.map_or_else(|| vec![0.0; n * d], <[f64]>::to_vec);
    Ok((
        projected,
        ActorPass {
            cache,
            log_std,
            in_bounds,
            noise,
            n,
            d,
        },
    ))
}

/// Backward through one actor invocation: `dz` is the loss gradient at
/// the waypoint (projection treated as identity). Accumulates actor
/// parameter gradients into `grads`, returns the loss gradients with
/// respect to the left and right input states.
fn actor_backward_batch(
    actor: &Mlp,
    pass: &ActorPass,
    dz: &[f64],
    grads: &mut [f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (n, d) = (pass.n, pass.d);
    if dz.len() != n * d {
        return Err(CoreError::ShapeMismatch {
            expected: n * d,
            got: dz.len(),
        });
    }
    let mut out_grad = vec![0.0; n * 2 * d];
    for i in 0..n {
        for k in 0..d {
            let g = dz[i * d + k];
            out_grad[i * 2 * d + k] = g;
            // d z / d log_std = exp(log_std) * noise, zero where clamped.
            out_grad[i * 2 * d + d + k] = g
                * math::exp(pass.log_std[i * d + k])
                * pass.noise[i * d + k]
                * pass.in_bounds[i * d + k];
        }
    }
    let ginput = actor.backward_batch(&pass.cache, &out_grad, grads)?;
    let mut gl = vec![0.0; n * d];
    let mut gr = vec![0.0; n * d];
    for i in 0..n {
        gl[i * d..(i + 1) * d].copy_from_slice(&ginput[i * 2 * d..i * 2 * d + d]);
        gr[i * d..(i + 1) * d].copy_from_slice(&ginput[i * 2 * d + d..(i + 1) * 2 * d]);
    }
    Ok((gl, gr))
}

struct CriticPass {
    cache: crate::neural::ForwardCache,
    raw: Vec<f64>,
    n: usize,
    d: usize,
}

/// Critic distance estimates for a batch of pairs: V = exp(raw) - 1.
fn critic_forward_pair(
    critic: &Mlp,
    x: &[f64],
    y: &[f64],
    n: usize,
    d: usize,
) -> Result<(Vec<f64>, CriticPass)> {
    check_critic_shape(critic, d)?;
    let input = pair_input(x, y, n, d);
    let (raw, cache) = critic.forward_batch(&input, n)?;
    let values = raw.iter().map(|&r| math::exp_m1(r)).collect();
    Ok((values, CriticPass { cache, raw, n, d }))
}

/// Input gradients of the critic for per-pair raw-output gradients
/// `draw`. Critic parameters are left untouched (frozen).
fn critic_input_grads(critic: &Mlp, pass: &CriticPass, draw: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let ginput = critic.backward_inputs_only(&pass.cache, draw)?;
    let (n, d) = (pass.n, pass.d);
    let mut gx = vec![0.0; n * d];
    let mut gy = vec![0.0; n * d];
    for i in 0..n {
        gx[i * d..(i + 1) * d].copy_from_slice(&ginput[i * 2 * d..i * 2 * d + d]);
        gy[i * d..(i + 1) * d].copy_from_slice(&ginput[i * 2 * d + d..(i + 1) * 2 * d]);
    }
    Ok((gx, gy))
}

/// Convenience scalar critic evaluation.
pub fn critic_value(critic: &Mlp, env: &Environment, s: &StatePoint, g: &StatePoint) -> Result<f64> {
    let d = env.rep_dim();
    let (v, _) = critic_forward_pair(critic, &s.coords, &g.coords, 1, d)?;
    Ok(v[0])
}

/// Squared-log-error critic loss over a batch of tuples, averaged, with
/// the optional symmetry term. Since the raw output is log(V + 1), the
/// loss is (raw(s,g) - log(c+1))^2 [+ (raw(s,g) - raw(g,s))^2].
/// Returns (mean loss, parameter gradients).
pub fn critic_loss_batch(
    critic: &Mlp,
    env: &Environment,
    s: &[f64],
    g: &[f64],
    c: &[f64],
    n: usize,
    symmetric: bool,
) -> Result<(f64, Vec<f64>)> {
    let d = env.rep_dim();
    check_critic_shape(critic, d)?;
    if s.len() != n * d || g.len() != n * d || c.len() != n {
        return Err(CoreError::ShapeMismatch {
            expected: n * d,
            got: s.len().max(g.len()),
        });
    }
    let scale = 1.0 / n as f64;
    let mut grads = critic.zero_grads();
    let input_sg = pair_input(s, g, n, d);
    let (raw_sg, cache_sg) = critic.forward_batch(&input_sg, n)?;
    let mut loss = 0.0;
    let mut draw_sg = vec![0.0; n];
    for i in 0..n {
        if c[i] < 0.0 {
            return Err(CoreError::InvalidInput("negative cost target"));
        }
        let diff = raw_sg[i] - math::ln_1p(c[i]);
        loss += diff * diff * scale;
        draw_sg[i] = 2.0 * diff * scale;
    }
    if symmetric {
        let input_gs = pair_input(g, s, n, d);
        let (raw_gs, cache_gs) = critic.forward_batch(&input_gs, n)?;
        let mut draw_gs = vec![0.0; n];
        for i in 0..n {
            let diff = raw_sg[i] - raw_gs[i];
            loss += diff * diff * scale;
            draw_sg[i] += 2.0 * diff * scale;
            draw_gs[i] = -2.0 * diff * scale;
        }
        critic.backward_batch(&cache_gs, &draw_gs, &mut grads)?;
    }
    critic.backward_batch(&cache_sg, &draw_sg, &mut grads)?;
    if !loss.is_finite() {
        return Err(CoreError::NonFinite("critic loss"));
    }
    Ok((loss, grads))
}

/// Standard-normal noise blocks for every actor invocation inside one
/// actor-loss evaluation, drawn up front in a fixed order so the loss
/// is a deterministic function of (parameters, noise).
#[derive(Debug, Clone)]
pub struct ActorNoise {
    root: Vec<f64>,
    quarter_left: Vec<f64>,
    quarter_right: Vec<f64>,
    smooth: Vec<f64>,
    reversed: Vec<f64>,
}

impl ActorNoise {
    /// Draws the blocks needed by `variant` for a batch of n pairs.
    pub fn sample<R: Rng + ?Sized>(
        rng: &mut R,
        n: usize,
        d: usize,
        variant: &VariantConfig,
    ) -> Self {
        let mut block = |needed: bool| -> Vec<f64> {
            if needed {
                (0..n * d).map(|_| rng.sample(StandardNormal)).collect()
            } else {
                Vec::new()
            }
        };
        let smoothing = variant.actor_variant == ActorVariant::Midpoint;
        let symm = variant.symmetric_losses && variant.actor_variant != ActorVariant::TwoOne;
        ActorNoise {
            root: block(true),
            quarter_left: block(smoothing),
            quarter_right: block(smoothing),
            smooth: block(smoothing),
            reversed: block(symm),
        }
    }

    /// All-zero noise (deterministic actor calls); used by tests.
    pub fn zeros(n: usize, d: usize) -> Self {
        ActorNoise {
            root: vec![0.0; n * d],
            quarter_left: vec![0.0; n * d],
            quarter_right: vec![0.0; n * d],
            smooth: vec![0.0; n * d],
            reversed: vec![0.0; n * d],
        }
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (a, b) in dst.iter_mut().zip(src) {
        *a += b;
    }
}

/// Actor loss over a batch of endpoint pairs (flattened reps, n rows),
/// averaged. The critic is frozen: only its input gradients are used.
/// Gradients flow through every nested actor invocation. Returns
/// (mean loss, actor parameter gradients).
pub fn actor_loss_batch(
    actor: &Mlp,
    critic: &Mlp,
    env: &Environment,
    s: &[f64],
    g: &[f64],
    n: usize,
    variant: &VariantConfig,
    noise: &ActorNoise,
) -> Result<(f64, Vec<f64>)> {
    variant.validate()?;
    let d = env.rep_dim();
    check_actor_shape(actor, d)?;
    check_critic_shape(critic, d)?;
    let scale = 1.0 / n as f64;
    let mut grads = actor.zero_grads();
    let kind = variant.actor_variant;
    let smoothing = kind == ActorVariant::Midpoint;
    let symm = variant.symmetric_losses && kind != ActorVariant::TwoOne;

    // Forward: the candidate point a = pi(s, g) and, when needed, the
    // smoothing chain b = pi(s, a), c = pi(a, g), e = pi(b, c) and the
    // reversed point r = pi(g, s).
    let (a, pass_a) = actor_apply_batch(actor, env, s, g, n, Some(&noise.root))?;
    let chain = if smoothing {
        let (b, pass_b) = actor_apply_batch(actor, env, s, &a, n, Some(&noise.quarter_left))?;
        let (c2, pass_c) = actor_apply_batch(actor, env, &a, g, n, Some(&noise.quarter_right))?;
        let (e, pass_e) = actor_apply_batch(actor, env, &b, &c2, n, Some(&noise.smooth))?;
        Some((b, pass_b, c2, pass_c, e, pass_e))
    } else {
        None
    };
    let rev = if symm {
        Some(actor_apply_batch(actor, env, g, s, n, Some(&noise.reversed))?)
    } else {
        None
    };

    let (v_sa, cp_sa) = critic_forward_pair(critic, s, &a, n, d)?;
    let (v_ag, cp_ag) = critic_forward_pair(critic, &a, g, n, d)?;

    let mut loss = 0.0;
    let mut ga = vec![0.0; n * d];

    // First pair term: V(s,a)^2, V(s,a), or V(s,a)^2 (2:1 variant).
    let mut draw = vec![0.0; n];
    for i in 0..n {
        let (l, dv) = match kind {
            ActorVariant::Midpoint | ActorVariant::TwoOne => {
                (v_sa[i] * v_sa[i], 2.0 * v_sa[i])
            }
            ActorVariant::Inter | ActorVariant::Cut => (v_sa[i], 1.0),
        };
        loss += l * scale;
        draw[i] = dv * scale * math::exp(cp_sa.raw[i]);
    }
    let (_, gy) = critic_input_grads(critic, &cp_sa, &draw)?;
    add_into(&mut ga, &gy);

    // Second pair term: V(a,g)^2, V(a,g), or 2 V(a,g)^2.
    for i in 0..n {
        let (l, dv) = match kind {
            ActorVariant::Midpoint => (v_ag[i] * v_ag[i], 2.0 * v_ag[i]),
            ActorVariant::TwoOne => (2.0 * v_ag[i] * v_ag[i], 4.0 * v_ag[i]),
            ActorVariant::Inter | ActorVariant::Cut => (v_ag[i], 1.0),
        };
        loss += l * scale;
        draw[i] = dv * scale * math::exp(cp_ag.raw[i]);
    }
    let (gx, _) = critic_input_grads(critic, &cp_ag, &draw)?;
    add_into(&mut ga, &gx);

    // Smoothing term V(a, e)^2: the midpoint of the 1:3 and 3:1 points
    // must agree with a.
    if let Some((_, pass_b, _, pass_c, e, pass_e)) = &chain {
        let (v_ae, cp_ae) = critic_forward_pair(critic, &a, e, n, d)?;
        for i in 0..n {
            loss += v_ae[i] * v_ae[i] * scale;
            draw[i] = 2.0 * v_ae[i] * scale * math::exp(cp_ae.raw[i]);
        }
        let (gx, ge) = critic_input_grads(critic, &cp_ae, &draw)?;
        add_into(&mut ga, &gx);
        // Unroll the chain: e depends on (b, c), which depend on a.
        let (gb, gc) = actor_backward_batch(actor, pass_e, &ge, &mut grads)?;
        let (_, ga_from_b) = actor_backward_batch(actor, pass_b, &gb, &mut grads)?;
        add_into(&mut ga, &ga_from_b);
        let (ga_from_c, _) = actor_backward_batch(actor, pass_c, &gc, &mut grads)?;
        add_into(&mut ga, &ga_from_c);
    }

    // Symmetry term: V(pi(s,g), pi(g,s))^2 for the squared objective,
    // the plain value for the intermediate-point objectives.
    if let Some((r, pass_r)) = &rev {
        let (v_ar, cp_ar) = critic_forward_pair(critic, &a, r, n, d)?;
        for i in 0..n {
            let (l, dv) = match kind {
                ActorVariant::Midpoint | ActorVariant::TwoOne => {
                    (v_ar[i] * v_ar[i], 2.0 * v_ar[i])
                }
                ActorVariant::Inter | ActorVariant::Cut => (v_ar[i], 1.0),
            };
            loss += l * scale;
            draw[i] = dv * scale * math::exp(cp_ar.raw[i]);
        }
        let (gx, gr) = critic_input_grads(critic, &cp_ar, &draw)?;
        add_into(&mut ga, &gx);
        actor_backward_batch(actor, pass_r, &gr, &mut grads)?;
    }

    actor_backward_batch(actor, &pass_a, &ga, &mut grads)?;
    if !loss.is_finite() {
        return Err(CoreError::NonFinite("actor loss"));
    }
    Ok((loss, grads))
}

/// Whether generated points are sampled or taken at the mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenerationMode {
    Stochastic,
    Deterministic,
}

/// Fills a midpoint tree breadth-first: level i inserts the midpoints
/// of the 2^i adjacent pairs produced so far, left to right.
pub fn generate_tree<R: Rng + ?Sized>(
    actor: &Mlp,
    env: &Environment,
    s: &StatePoint,
    g: &StatePoint,
    depth: u32,
    mode: GenerationMode,
    rng: &mut R,
) -> Result<PathSequence> {
    env.validate_point(s)?;
    env.validate_point(g)?;
    let d = env.rep_dim();
    check_actor_shape(actor, d)?;
    let count = (1usize << depth) + 1;
    let mut points: Vec<Vec<f64>> = vec![Vec::new(); count];
    points[0] = s.coords.clone();
    points[count - 1] = g.coords.clone();
    for i in 0..depth {
        let step = 1usize << (depth - i);
        let half = step / 2;
        let pairs = 1usize << i;
        let mut left = Vec::with_capacity(pairs * d);
        let mut right = Vec::with_capacity(pairs * d);
        for j in 0..pairs {
            left.extend_from_slice(&points[step * j]);
            right.extend_from_slice(&points[step * (j + 1)]);
        }
        let noise: Option<Vec<f64>> = match mode {
            GenerationMode::Deterministic => None,
            GenerationMode::Stochastic => Some(
                (0..pairs * d).map(|_| rng.sample(StandardNormal)).collect(),
            ),
        };
        let (kids, _) = actor_apply_batch(actor, env, &left, &right, pairs, noise.as_deref())?;
        for j in 0..pairs {
            let idx = step * j + half;
            debug_assert!(points[idx].is_empty(), "tree index written twice");
            points[idx] = kids[j * d..(j + 1) * d].to_vec();
        }
    }
    let points = points
        .into_iter()
        .map(|coords| {
            debug_assert!(!coords.is_empty(), "tree index never written");
            StatePoint { coords }
        })
        .collect();
    Ok(PathSequence { points, depth })
}

/// Leaf costs of a sequence: obstructed local costs of adjacent pairs,
/// truncated to c_cut at or above epsilon for the cut variant.
fn sequence_leaf_costs(
    env: &Environment,
    seq: &PathSequence,
    variant: &VariantConfig,
    epsilon: f64,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(seq.points.len() - 1);
    for w in seq.points.windows(2) {
        let mut c = env.obstructed_cost(&w[0], &w[1])?;
        if variant.actor_variant == ActorVariant::Cut && c >= epsilon {
            c = variant.c_cut;
        }
        out.push(c);
    }
    Ok(out)
}

/// Cost tables per tree level from given leaf costs. Level i (root = 0)
/// holds 2^i entries. `critic_blend` of Some(lambda) applies the
/// TD(lambda) recursion c_{i,j} = (1-lambda)(V(left, mid) + V(mid,
/// right)) + lambda (c_{i+1,2j} + c_{i+1,2j+1}); None is the pure
/// Monte Carlo sum (identical to lambda = 1).
fn accumulate_costs(
    env: &Environment,
    seq: &PathSequence,
    leaf: &[f64],
    critic_blend: Option<(&Mlp, f64)>,
) -> Result<Vec<Vec<f64>>> {
    let depth = seq.depth as usize;
    let d = env.rep_dim();
    let mut levels: Vec<Vec<f64>> = vec![Vec::new(); depth + 1];
    levels[depth] = leaf.to_vec();
    for i in (0..depth).rev() {
        let entries = 1usize << i;
        let step = 1usize << (depth - i);
        let half = step / 2;
        let mc: Vec<f64> = (0..entries)
            .map(|j| levels[i + 1][2 * j] + levels[i + 1][2 * j + 1])
            .collect();
        levels[i] = match critic_blend {
            None => mc,
            Some((critic, lambda)) => {
                let mut x = Vec::with_capacity(2 * entries * d);
                let mut y = Vec::with_capacity(2 * entries * d);
                for j in 0..entries {
                    // (left, mid) then (mid, right) per pair.
                    x.extend_from_slice(&seq.points[step * j].coords);
                    y.extend_from_slice(&seq.points[step * j + half].coords);
                    x.extend_from_slice(&seq.points[step * j + half].coords);
                    y.extend_from_slice(&seq.points[step * (j + 1)].coords);
                }
                let (v, _) = critic_forward_pair(critic, &x, &y, 2 * entries, d)?;
                (0..entries)
                    .map(|j| (1.0 - lambda) * (v[2 * j] + v[2 * j + 1]) + lambda * mc[j])
                    .collect()
            }
        };
    }
    Ok(levels)
}

/// TD(lambda) cost targets for a generated sequence; lambda = 1
/// reproduces the Monte Carlo accumulation exactly.
pub fn td_lambda_targets(
    critic: &Mlp,
    env: &Environment,
    seq: &PathSequence,
    lambda: f64,
) -> Result<Vec<Vec<f64>>> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(CoreError::InvalidInput("lambda must lie in [0, 1]"));
    }
    let mut leaf = Vec::with_capacity(seq.points.len() - 1);
    for w in seq.points.windows(2) {
        leaf.push(env.obstructed_cost(&w[0], &w[1])?);
    }
    accumulate_costs(env, seq, &leaf, Some((critic, lambda)))
}

/// Training tuples from an already-generated sequence: self-tuples for
/// every node, then adjacent leaf tuples, then accumulated internal
/// tuples bottom-up.
pub fn collect_data_from_sequence(
    critic: &Mlp,
    env: &Environment,
    seq: &PathSequence,
    variant: &VariantConfig,
    epsilon: f64,
) -> Result<Vec<TrainTuple>> {
    let depth = seq.depth as usize;
    let leaf = sequence_leaf_costs(env, seq, variant, epsilon)?;
    let levels = accumulate_costs(
        env,
        seq,
        &leaf,
        variant.td_lambda.map(|l| (critic, l)),
    )?;
    let mut data = Vec::with_capacity((seq.points.len()) + (2 * seq.points.len() - 3));
    for p in &seq.points {
        data.push(TrainTuple {
            s: p.clone(),
            g: p.clone(),
            c: 0.0,
        });
    }
    for (j, w) in seq.points.windows(2).enumerate() {
        data.push(TrainTuple {
            s: w[0].clone(),
            g: w[1].clone(),
            c: leaf[j],
        });
    }
    for i in (0..depth).rev() {
        let step = 1usize << (depth - i);
        for j in 0..(1usize << i) {
            data.push(TrainTuple {
                s: seq.points[step * j].clone(),
                g: seq.points[step * (j + 1)].clone(),
                c: levels[i][j],
            });
        }
    }
    Ok(data)
}

/// One data-collection cycle: sample a free endpoint pair, generate a
/// stochastic tree at the given depth, and emit training tuples.
pub fn collect_data<R: Rng + ?Sized>(
    actor: &Mlp,
    critic: &Mlp,
    env: &Environment,
    depth: u32,
    variant: &VariantConfig,
    epsilon: f64,
    rng: &mut R,
) -> Result<Vec<TrainTuple>> {
    let s = env.sample_free(rng)?;
    let g = env.sample_free(rng)?;
    let seq = generate_tree(actor, env, &s, &g, depth, GenerationMode::Stochastic, rng)?;
    collect_data_from_sequence(critic, env, &seq, variant, epsilon)
}

/// Full training configuration for the midpoint learner.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub total_timesteps: u64,
    pub d_max: u32,
    pub batch_size: usize,
    pub epochs: usize,
    pub critic_lr: f64,
    pub actor_lr: f64,
    pub hidden: Vec<usize>,
    pub schedule: ScheduleStrategy,
    pub variant: VariantConfig,
    pub epsilon: f64,
    pub seed: u64,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.schedule_spec().validate()?;
        self.variant.validate()?;
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(CoreError::InvalidInput(
                "batch size and epochs must be positive",
            ));
        }
        if !(self.critic_lr > 0.0) || !(self.actor_lr > 0.0) {
            return Err(CoreError::InvalidInput("learning rates must be positive"));
        }
        if !(self.epsilon > 0.0) {
            return Err(CoreError::InvalidInput("epsilon must be positive"));
        }
        Ok(())
    }

    pub fn schedule_spec(&self) -> ScheduleSpec {
        ScheduleSpec {
            strategy: self.schedule,
            total_timesteps: self.total_timesteps,
            d_max: self.d_max,
        }
    }
}

/// Aggregate statistics for one collect-and-update round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundStats {
    pub timestep: u64,
    pub cycles: u64,
    pub depth: u32,
    pub tuples: usize,
    pub mean_critic_loss: f64,
    pub mean_actor_loss: f64,
}

/// The complete mutable training state.
#[derive(Debug, Clone)]
pub struct Learner {
    pub env: Environment,
    pub config: TrainConfig,
    pub actor: Mlp,
    pub critic: Mlp,
    pub actor_opt: AdamState,
    pub critic_opt: AdamState,
    pub rng: ChaCha20Rng,
    pub ledger: TimestepLedger,
    pub cycles: u64,
}

impl Learner {
    pub fn new(env: Environment, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
        let actor = build_actor(&env, &config.hidden, &mut rng)?;
        let critic = build_critic(&env, &config.hidden, &mut rng)?;
        let actor_opt = AdamState::new(config.actor_lr, actor.params().len());
        let critic_opt = AdamState::new(config.critic_lr, critic.params().len());
        Ok(Learner {
            env,
            config,
            actor,
            critic,
            actor_opt,
            critic_opt,
            rng,
            ledger: TimestepLedger::new(),
            cycles: 0,
        })
    }

    /// Schedule progress: the timestep ledger or the cycle counter.
    pub fn progress(&self) -> u64 {
        match self.config.schedule {
            ScheduleStrategy::TimestepBased => self.ledger.total(),
            ScheduleStrategy::CycleBased => self.cycles,
        }
    }

    pub fn current_depth(&self) -> u32 {
        schedule_depth(&self.config.schedule_spec(), self.progress())
    }

    pub fn finished(&self) -> bool {
        self.ledger.total() >= self.config.total_timesteps
    }

    /// One round: fill a data buffer (one collection call if it alone
    /// exceeds the batch size, otherwise repeat until the buffer holds
    /// at least one batch), then run the epoch/batch update schedule,
    /// updating the critic before the actor on each batch.
    pub fn run_round(&mut self) -> Result<RoundStats> {
        let spec = self.config.schedule_spec();
        let batch = self.config.batch_size;
        let mut buffer: Vec<TrainTuple> = Vec::new();
        let mut depth;
        loop {
            depth = schedule_depth(&spec, self.progress());
            let tuples = collect_data(
                &self.actor,
                &self.critic,
                &self.env,
                depth,
                &self.config.variant,
                self.config.epsilon,
                &mut self.rng,
            )?;
            self.ledger.record_cycle(depth);
            self.cycles += 1;
            let first = buffer.is_empty();
            let oversized = tuples.len() > batch;
            buffer.extend(tuples);
            if (first && oversized) || buffer.len() >= batch || self.finished() {
                break;
            }
        }

        let d = self.env.rep_dim();
        let mut critic_loss_sum = 0.0;
        let mut actor_loss_sum = 0.0;
        let mut updates = 0u32;
        let mut order: Vec<usize> = (0..buffer.len()).collect();
        for _ in 0..self.config.epochs {
            // Fresh shuffle per epoch decorrelates the tuples of a tree
            // (all emitted consecutively) within each mini-batch.
            for i in (1..order.len()).rev() {
                let j = self.rng.gen_range(0..=i);
                order.swap(i, j);
            }
            for chunk in order.chunks(batch) {
                let n = chunk.len();
                let mut s = Vec::with_capacity(n * d);
                let mut g = Vec::with_capacity(n * d);
                let mut c = Vec::with_capacity(n);
                for &idx in chunk {
                    let t = &buffer[idx];
                    s.extend_from_slice(&t.s.coords);
                    g.extend_from_slice(&t.g.coords);
                    c.push(t.c);
                }
                let (cl, cgrads) = critic_loss_batch(
                    &self.critic,
                    &self.env,
                    &s,
                    &g,
                    &c,
                    n,
                    self.config.variant.symmetric_losses,
                )?;
                self.critic_opt
                    .update(self.critic.params_mut(), &cgrads)?;
                let noise = ActorNoise::sample(&mut self.rng, n, d, &self.config.variant);
                let (al, agrads) = actor_loss_batch(
                    &self.actor,
                    &self.critic,
                    &self.env,
                    &s,
                    &g,
                    n,
                    &self.config.variant,
                    &noise,
                )?;
                self.actor_opt.update(self.actor.params_mut(), &agrads)?;
                critic_loss_sum += cl;
                actor_loss_sum += al;
                updates += 1;
            }
        }
        Ok(RoundStats {
            timestep: self.ledger.total(),
            cycles: self.cycles,
            depth,
            tuples: buffer.len(),
            mean_critic_loss: critic_loss_sum / f64::from(updates.max(1)),
            mean_actor_loss: actor_loss_sum / f64::from(updates.max(1)),
        })
    }

    /// Trains until the timestep ledger reaches the budget, invoking
    /// the hook after every round (for logging, evaluation, and
    /// checkpointing).
    pub fn run<F: FnMut(&Learner, &RoundStats) -> Result<()>>(&mut self, mut hook: F) -> Result<()> {
        while !self.finished() {
            let stats = self.run_round()?;
            hook(self, &stats)?;
        }
        Ok(())
    }

    /// Deterministic evaluation adapter for this learner's actor.
    pub fn policy(&self) -> TreePolicy<'_> {
        TreePolicy { actor: &self.actor }
    }
}

/// Deterministic midpoint-tree path generation from a trained actor.
pub struct TreePolicy<'a> {
    pub actor: &'a Mlp,
}

impl PathPolicy for TreePolicy<'_> {
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
        let depth = segments.trailing_zeros();
        // Deterministic mode ignores the RNG.
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let seq = generate_tree(self.actor, env, s, g, depth, GenerationMode::Deterministic, &mut rng)?;
        Ok(seq.points)
    }
}
