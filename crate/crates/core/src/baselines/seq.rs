//! Sequential goal-conditioned baseline: the agent walks from start to
//! goal in fixed-cost steps, trained with a from-scratch clipped policy
//! gradient (PPO) using generalized advantage estimation.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{CoreError, Result};
use crate::eval::{PathPolicy, TimestepLedger};
use crate::geometry::{Environment, StatePoint, TangentVector};
use crate::math;
use crate::neural::{Activation, AdamState, Mlp, LOG_STD_MAX, LOG_STD_MIN};

/// Outcome of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct SeqTransition {
    pub next: StatePoint,
    pub reward: f64,
    pub done: bool,
    pub success: bool,
}

/// Distance-to-goal surrogate used by the reward: the metric norm at
/// the goal of the coordinate difference toward `p`.
fn goal_gauge(env: &Environment, g: &StatePoint, p: &StatePoint) -> Result<f64> {
    // displacement(p, g) has the coordinates of f(g) - f(p) (with
    // wrapped angular parts); the norm is taken at g.
    let v = env.displacement(p, g);
    env.finsler_norm(g, &v)
}

/// One step of the sequential environment: move from `p` by the unit
/// action `v` rescaled so that the step has metric cost epsilon, then
/// clamp onto the coordinate space.
///
/// A zero action cannot be rescaled: the agent stays and is penalized
/// with reward -100 (episode continues). Stepping out of the free space
/// ends the episode as a failure with reward -c_P. Reaching a point
/// within epsilon of the goal ends it as a success.
pub fn seq_step(
    env: &Environment,
    p: &StatePoint,
    g: &StatePoint,
    action: &[f64],
    epsilon: f64,
) -> Result<SeqTransition> {
    if action.len() != env.man_dim() {
        return Err(CoreError::ShapeMismatch {
            expected: env.man_dim(),
            got: action.len(),
        });
    }
    if action.iter().any(|a| !a.is_finite() || a.abs() > 1.0 + 1e-12) {
        return Err(CoreError::InvalidInput("action outside [-1, 1]"));
    }
    if action.iter().all(|&a| a == 0.0) {
        return Ok(SeqTransition {
            next: p.clone(),
            reward: -100.0,
            done: false,
            success: false,
        });
    }
    let v = TangentVector {
        components: action.to_vec(),
    };
    let f = env.finsler_norm(p, &v)?;
    if !(f > 0.0) {
        // Degenerate direction (zero metric cost): treat as a stall.
        return Ok(SeqTransition {
            next: p.clone(),
            reward: -100.0,
            done: false,
            success: false,
        });
    }
    let raw = env.advance(p, &v, epsilon / f);
    let q = env.clamp_project(&raw);
    if !env.is_free(&q) {
        return Ok(SeqTransition {
            next: q,
            reward: -env.c_p,
            done: true,
            success: false,
        });
    }
    let reward = -epsilon + goal_gauge(env, g, p)? - goal_gauge(env, g, &q)?;
    let success = env.local_cost(&q, g)? < epsilon;
    Ok(SeqTransition {
        next: q,
        reward,
        done: success,
        success,
    })
}

/// Generalized advantage estimation at discount gamma = 1. `values`
/// has one bootstrap entry more than `rewards`; `terminal[t]` marks
/// transitions into a terminal state (no bootstrap across them).
pub fn gae_advantages(
    rewards: &[f64],
    values: &[f64],
    terminal: &[bool],
    lambda: f64,
) -> Result<Vec<f64>> {
    let n = rewards.len();
    if values.len() != n + 1 || terminal.len() != n {
        return Err(CoreError::ShapeMismatch {
            expected: n + 1,
            got: values.len(),
        });
    }
    let mut adv = vec![0.0; n];
    let mut acc = 0.0;
    for t in (0..n).rev() {
        let cont = if terminal[t] { 0.0 } else { 1.0 };
        let delta = rewards[t] + cont * values[t + 1] - values[t];
        acc = delta + lambda * cont * acc;
        adv[t] = acc;
    }
    Ok(adv)
}

/// PPO hyperparameters. Defaults follow the standard recipe: clip 0.2,
/// GAE lambda 0.95, discount 1, value coefficient 0.5, entropy 0,
/// gradient-norm clip 0.5, batch 128, 10 epochs, tanh networks, and a
/// rollout of 2048 steps per update.
#[derive(Debug, Clone, PartialEq)]
pub struct PpoConfig {
    pub total_timesteps: u64,
    pub epsilon: f64,
    /// Episode horizon n (the segment count of the evaluation task).
    pub horizon: usize,
    pub rollout: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub lr: f64,
    pub hidden: Vec<usize>,
    pub clip: f64,
    pub gae_lambda: f64,
    pub vf_coef: f64,
    pub ent_coef: f64,
    pub max_grad_norm: f64,
    pub seed: u64,
}

impl PpoConfig {
    pub fn defaults(total_timesteps: u64, epsilon: f64, horizon: usize, seed: u64) -> Self {
        PpoConfig {
            total_timesteps,
            epsilon,
            horizon,
            rollout: 2048,
            batch_size: 128,
            epochs: 10,
            lr: 3e-4,
            hidden: vec![64, 64],
            clip: 0.2,
            gae_lambda: 0.95,
            vf_coef: 0.5,
            ent_coef: 0.0,
            max_grad_norm: 0.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_timesteps == 0
            || self.horizon == 0
            || self.rollout == 0
            || self.batch_size == 0
            || self.epochs == 0
        {
            return Err(CoreError::InvalidInput("PPO sizes must be positive"));
        }
        if !(self.epsilon > 0.0) || !(self.lr > 0.0) {
            return Err(CoreError::InvalidInput(
                "epsilon and learning rate must be positive",
            ));
        }
        Ok(())
    }
}

/// Statistics of one rollout-and-update round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PpoRoundStats {
    pub timestep: u64,
    pub episodes: u64,
    pub mean_reward: f64,
    pub mean_policy_loss: f64,
    pub mean_value_loss: f64,
}

/// PPO learner over the sequential environment: separate tanh policy
/// and value networks plus a global state-independent log-std vector,
/// optimized jointly by one Adam instance.
#[derive(Debug, Clone)]
pub struct PpoLearner {
    pub env: Environment,
    pub config: PpoConfig,
    pub policy: Mlp,
    pub value: Mlp,
    pub log_std: Vec<f64>,
    pub opt: AdamState,
    pub rng: ChaCha20Rng,
    pub ledger: TimestepLedger,
    pub episodes: u64,
    state: Option<EpisodeState>,
}

#[derive(Debug, Clone)]
struct EpisodeState {
    p: StatePoint,
    g: StatePoint,
    steps: usize,
}

struct Rollout {
    obs: Vec<f64>,
    actions: Vec<f64>,
    log_probs: Vec<f64>,
    advantages: Vec<f64>,
    returns: Vec<f64>,
    steps: usize,
    mean_reward: f64,
}

impl PpoLearner {
    pub fn new(env: Environment, config: PpoConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
        let obs_dim = 2 * env.rep_dim();
        let act_dim = env.man_dim();
        let mut psizes = vec![obs_dim];
        psizes.extend_from_slice(&config.hidden);
        psizes.push(act_dim);
        let policy = Mlp::init(psizes, Activation::Tanh, &mut rng)?;
        let mut vsizes = vec![obs_dim];
        vsizes.extend_from_slice(&config.hidden);
        vsizes.push(1);
        let value = Mlp::init(vsizes, Activation::Tanh, &mut rng)?;
        let log_std = vec![0.0; act_dim];
        let total = policy.params().len() + value.params().len() + act_dim;
        let opt = AdamState::new(config.lr, total);
        Ok(PpoLearner {
            env,
            config,
            policy,
            value,
            log_std,
            opt,
            rng,
            ledger: TimestepLedger::new(),
            episodes: 0,
            state: None,
        })
    }

    /// Rebuilds a learner from saved pieces. The in-flight episode is
    /// not part of the saved state; a resumed learner starts a fresh
    /// episode at the next rollout.
    #[allow(clippy::too_many_arguments)]
    pub fn restore(
        env: Environment,
        config: PpoConfig,
        policy: Mlp,
        value: Mlp,
        log_std: Vec<f64>,
        opt: AdamState,
        rng: ChaCha20Rng,
        ledger: TimestepLedger,
        episodes: u64,
    ) -> Result<Self> {
        config.validate()?;
        let act_dim = env.man_dim();
        if log_std.len() != act_dim {
            return Err(CoreError::ShapeMismatch {
                expected: act_dim,
                got: log_std.len(),
            });
        }
        let total = policy.params().len() + value.params().len() + act_dim;
        if opt.moments().0.len() != total {
            return Err(CoreError::ShapeMismatch {
                expected: total,
                got: opt.moments().0.len(),
            });
        }
        Ok(PpoLearner {
            env,
            config,
            policy,
            value,
            log_std,
            opt,
            rng,
            ledger,
            episodes,
            state: None,
        })
    }

    pub fn finished(&self) -> bool {
        self.ledger.total() >= self.config.total_timesteps
    }

    fn observe(p: &StatePoint, g: &StatePoint) -> Vec<f64> {
        let mut obs = p.coords.clone();
        obs.extend_from_slice(&g.coords);
        obs
    }

    fn value_of(&self, obs: &[f64]) -> Result<f64> {
        let (v, _) = self.value.forward(obs)?;
        Ok(v[0])
    }

    fn ensure_episode(&mut self) -> Result<()> {
        if self.state.is_none() {
            let p = self.env.sample_free(&mut self.rng)?;
            let g = self.env.sample_free(&mut self.rng)?;
            self.state = Some(EpisodeState { p, g, steps: 0 });
        }
        Ok(())
    }

    fn collect_rollout(&mut self) -> Result<Rollout> {
        let steps = self.config.rollout;
        let act_dim = self.env.man_dim();
        let obs_dim = 2 * self.env.rep_dim();
        let mut obs = Vec::with_capacity(steps * obs_dim);
        let mut actions = Vec::with_capacity(steps * act_dim);
        let mut log_probs = Vec::with_capacity(steps);
        let mut rewards = Vec::with_capacity(steps);
        let mut terminal = Vec::with_capacity(steps);
        let mut values = Vec::with_capacity(steps + 1);
        let mut reward_sum = 0.0;
        for _ in 0..steps {
            self.ensure_episode()?;
            let (p, g) = {
                let st = self.state.as_ref().unwrap();
                (st.p.clone(), st.g.clone())
            };
            let o = Self::observe(&p, &g);
            let (mean, _) = self.policy.forward(&o)?;
            let mut action = vec![0.0; act_dim];
            let mut logp = 0.0;
            for k in 0..act_dim {
                let ls = self.log_std[k].clamp(LOG_STD_MIN, LOG_STD_MAX);
                let std = math::exp(ls);
                let z: f64 = self.rng.sample(StandardNormal);
                action[k] = mean[k] + std * z;
                logp += -0.5 * z * z - ls - 0.5 * math::ln(2.0 * core::f64::consts::PI);
            }
            // The environment clips actions to the unit box; densities
            // are taken at the unclipped sample.
            let clipped: Vec<f64> = action.iter().map(|a| a.clamp(-1.0, 1.0)).collect();
            let tr = seq_step(&self.env, &p, &g, &clipped, self.config.epsilon)?;
            self.ledger.record_sequential(1);
            values.push(self.value_of(&o)?);
            obs.extend_from_slice(&o);
            actions.extend_from_slice(&action);
            log_probs.push(logp);
            rewards.push(tr.reward);
            reward_sum += tr.reward;
            let st = self.state.as_mut().unwrap();
            st.p = tr.next;
            st.steps += 1;
            let horizon_hit = st.steps >= self.config.horizon;
            if tr.done || horizon_hit {
                terminal.push(true);
                self.state = None;
                self.episodes += 1;
            } else {
                terminal.push(false);
            }
        }
        // Bootstrap value for a rollout cut mid-episode.
        let boot = match &self.state {
            Some(st) => self.value_of(&Self::observe(&st.p, &st.g))?,
            None => 0.0,
        };
        values.push(boot);
        let advantages = gae_advantages(&rewards, &values, &terminal, self.config.gae_lambda)?;
        let returns: Vec<f64> = advantages
            .iter()
            .zip(&values)
            .map(|(a, v)| a + v)
            .collect();
        Ok(Rollout {
            obs,
            actions,
            log_probs,
            advantages,
            returns,
            steps,
            mean_reward: reward_sum / steps as f64,
        })
    }

    /// One rollout plus the clipped-surrogate update epochs.
    pub fn run_round(&mut self) -> Result<PpoRoundStats> {
        let rollout = self.collect_rollout()?;
        let act_dim = self.env.man_dim();
        let obs_dim = 2 * self.env.rep_dim();
        let n = rollout.steps;
        let mut order: Vec<usize> = (0..n).collect();
        let mut policy_loss_sum = 0.0;
        let mut value_loss_sum = 0.0;
        let mut updates = 0u32;
        for _ in 0..self.config.epochs {
            // Deterministic Fisher-Yates shuffle from the seeded stream.
            for i in (1..n).rev() {
                let j = self.rng.gen_range(0..=i);
                order.swap(i, j);
            }
            for chunk in order.chunks(self.config.batch_size) {
                let m = chunk.len();
                let mut bobs = Vec::with_capacity(m * obs_dim);
                for &i in chunk {
                    bobs.extend_from_slice(&rollout.obs[i * obs_dim..(i + 1) * obs_dim]);
                }
                // Advantage normalization per minibatch.
                let mut adv: Vec<f64> = chunk.iter().map(|&i| rollout.advantages[i]).collect();
                let mean = adv.iter().sum::<f64>() / m as f64;
                let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / m as f64;
                let sd = math::sqrt(var) + 1e-8;
                for a in &mut adv {
                    *a = (*a - mean) / sd;
                }

                let (means, pcache) = self.policy.forward_batch(&bobs, m)?;
                let (vals, vcache) = self.value.forward_batch(&bobs, m)?;
                let scale = 1.0 / m as f64;
                let mut dmean = vec![0.0; m * act_dim];
                let mut dls = vec![0.0; act_dim];
                let mut dval = vec![0.0; m];
                let mut policy_loss = 0.0;
                let mut value_loss = 0.0;
                for (row, &i) in chunk.iter().enumerate() {
                    // New log-density of the stored action.
                    let mut logp = 0.0;
                    let mut dlogp_dmean = vec![0.0; act_dim];
                    let mut dlogp_dls = vec![0.0; act_dim];
                    for k in 0..act_dim {
                        let ls = self.log_std[k].clamp(LOG_STD_MIN, LOG_STD_MAX);
                        let std = math::exp(ls);
                        let a = rollout.actions[i * act_dim + k];
                        let mu = means[row * act_dim + k];
                        let z = (a - mu) / std;
                        logp += -0.5 * z * z - ls - 0.5 * math::ln(2.0 * core::f64::consts::PI);
                        dlogp_dmean[k] = z / std;
                        let inb = if (LOG_STD_MIN..=LOG_STD_MAX).contains(&self.log_std[k]) {
                            1.0
                        } else {
                            0.0
                        };
                        dlogp_dls[k] = (z * z - 1.0) * inb;
                    }
                    let ratio = math::exp(logp - rollout.log_probs[i]);
                    let a = adv[row];
                    let unclipped = ratio * a;
                    let clipped = ratio.clamp(1.0 - self.config.clip, 1.0 + self.config.clip) * a;
                    // Maximize min(unclipped, clipped): loss is its negation.
                    let (surr, grad_active) = if unclipped <= clipped {
                        (unclipped, true)
                    } else {
                        (
                            clipped,
                            (1.0 - self.config.clip..=1.0 + self.config.clip).contains(&ratio),
                        )
                    };
                    policy_loss -= surr * scale;
                    if grad_active {
                        let dl_dlogp = -a * ratio * scale;
                        for k in 0..act_dim {
                            dmean[row * act_dim + k] += dl_dlogp * dlogp_dmean[k];
                            dls[k] += dl_dlogp * dlogp_dls[k];
                        }
                    }
                    // Entropy bonus (coefficient is 0 by default).
                    if self.config.ent_coef != 0.0 {
                        for k in 0..act_dim {
                            let ls = self.log_std[k].clamp(LOG_STD_MIN, LOG_STD_MAX);
                            policy_loss -= self.config.ent_coef
                                * (ls + 0.5 * math::ln(2.0 * core::f64::consts::PI) + 0.5)
                                * scale;
                            let inb = if (LOG_STD_MIN..=LOG_STD_MAX).contains(&self.log_std[k]) {
                                1.0
                            } else {
                                0.0
                            };
                            dls[k] -= self.config.ent_coef * inb * scale;
                        }
                    }
                    // Value regression toward the empirical returns.
                    let diff = vals[row] - rollout.returns[i];
                    value_loss += diff * diff * scale;
                    dval[row] = 2.0 * diff * scale * self.config.vf_coef;
                }

                let mut pgrads = self.policy.zero_grads();
                self.policy.backward_batch(&pcache, &dmean, &mut pgrads)?;
                let mut vgrads = self.value.zero_grads();
                self.value.backward_batch(&vcache, &dval, &mut vgrads)?;

                // Joint global-norm clipping and one Adam step over
                // policy, value and log-std parameters together.
                let mut grads = pgrads;
                grads.extend_from_slice(&vgrads);
                grads.extend_from_slice(&dls);
                let norm = math::sqrt(grads.iter().map(|g| g * g).sum::<f64>());
                if norm > self.config.max_grad_norm {
                    let s = self.config.max_grad_norm / norm;
                    for g in &mut grads {
                        *g *= s;
                    }
                }
                let mut params = self.policy.params().to_vec();
                params.extend_from_slice(self.value.params());
                params.extend_from_slice(&self.log_std);
                self.opt.update(&mut params, &grads)?;
                let np = self.policy.params().len();
                let nv = self.value.params().len();
                self.policy.set_params(&params[..np])?;
                self.value.set_params(&params[np..np + nv])?;
                self.log_std.copy_from_slice(&params[np + nv..]);

                if !(policy_loss.is_finite() && value_loss.is_finite()) {
                    return Err(CoreError::NonFinite("PPO loss"));
                }
                policy_loss_sum += policy_loss;
                value_loss_sum += value_loss;
                updates += 1;
            }
        }
        Ok(PpoRoundStats {
            timestep: self.ledger.total(),
            episodes: self.episodes,
            mean_reward: rollout.mean_reward,
            mean_policy_loss: policy_loss_sum / f64::from(updates.max(1)),
            mean_value_loss: value_loss_sum / f64::from(updates.max(1)),
        })
    }

    /// Trains until the timestep budget is reached.
    pub fn run<F: FnMut(&PpoLearner, &PpoRoundStats) -> Result<()>>(
        &mut self,
        mut hook: F,
    ) -> Result<()> {
        while !self.finished() {
            let stats = self.run_round()?;
            hook(self, &stats)?;
        }
        Ok(())
    }

    pub fn policy(&self) -> SeqPolicy<'_> {
        SeqPolicy {
            policy: &self.policy,
            epsilon: self.config.epsilon,
        }
    }
}

/// Deterministic rollout adapter: mean actions, clipped to the unit
/// box, for at most `segments` steps; the goal is appended (and the
/// tail padded with it) so the output always has segments + 1 points
/// ending at g. An unsuccessful rollout leaves a final gap larger than
/// epsilon and therefore fails the success check honestly.
pub struct SeqPolicy<'a> {
    pub policy: &'a Mlp,
    pub epsilon: f64,
}

impl PathPolicy for SeqPolicy<'_> {
    fn generate(
        &self,
        env: &Environment,
        s: &StatePoint,
        g: &StatePoint,
        segments: usize,
    ) -> Result<Vec<StatePoint>> {
        let mut points = Vec::with_capacity(segments + 1);
        let mut p = s.clone();
        points.push(p.clone());
        for _ in 0..segments {
            if env.local_cost(&p, g)? < self.epsilon {
                break;
            }
            let obs = PpoLearner::observe(&p, g);
            let (mean, _) = self.policy.forward(&obs)?;
            let action: Vec<f64> = mean.iter().map(|a| a.clamp(-1.0, 1.0)).collect();
            let tr = seq_step(env, &p, g, &action, self.epsilon)?;
            p = tr.next;
            points.push(p.clone());
            if points.len() == segments + 1 {
                break;
            }
        }
        while points.len() <= segments {
            points.push(g.clone());
        }
        // A rollout that used all segments must still end at the goal.
        let last = points.last_mut().unwrap();
        if *last != *g {
            *last = g.clone();
        }
        Ok(points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    fn pt(coords: &[f64]) -> StatePoint {
        StatePoint {
            coords: coords.to_vec(),
        }
    }

    #[test]
    fn straight_step_toward_goal_has_zero_reward() {
        let env = Environment::euclid2d_free();
        let p = pt(&[-0.5, 0.0]);
        let g = pt(&[0.5, 0.0]);
        let tr = seq_step(&env, &p, &g, &[1.0, 0.0], 0.1).unwrap();
        assert!((tr.reward - 0.0).abs() < 1e-12);
        assert!((tr.next.coords[0] + 0.4).abs() < 1e-12);
        assert!(!tr.done);
    }

    #[test]
    fn perpendicular_step_reward() {
        let env = Environment::euclid2d_free();
        let p = pt(&[-0.5, 0.0]);
        let g = pt(&[0.5, 0.0]);
        let tr = seq_step(&env, &p, &g, &[0.0, 1.0], 0.1).unwrap();
        let want = -0.1 + 1.0 - math::sqrt(1.01);
        assert!((tr.reward - want).abs() < 1e-12, "{} vs {want}", tr.reward);
        assert!((tr.reward + 0.104_987_562_112_089).abs() < 1e-9);
    }

    #[test]
    fn step_into_obstacle_fails_with_penalty() {
        let env = Environment::euclid2d_default_map();
        // Left obstacle starts at x = -0.55.
        let p = pt(&[-0.6, 0.0]);
        let g = pt(&[0.8, 0.0]);
        let tr = seq_step(&env, &p, &g, &[1.0, 0.0], 0.1).unwrap();
        assert_eq!(tr.reward, -10.0);
        assert!(tr.done && !tr.success);
    }

    #[test]
    fn zero_action_penalized_but_episode_continues() {
        let env = Environment::euclid2d_free();
        let p = pt(&[0.2, 0.1]);
        let g = pt(&[0.5, 0.0]);
        let tr = seq_step(&env, &p, &g, &[0.0, 0.0], 0.1).unwrap();
        assert_eq!(tr.reward, -100.0);
        assert_eq!(tr.next, p);
        assert!(!tr.done);
    }

    #[test]
    fn success_when_step_lands_near_goal() {
        let env = Environment::euclid2d_free();
        let p = pt(&[0.35, 0.0]);
        let g = pt(&[0.5, 0.0]);
        let tr = seq_step(&env, &p, &g, &[1.0, 0.0], 0.1).unwrap();
        // Lands at 0.45, within 0.1 of the goal.
        assert!(tr.done && tr.success);
    }

    #[test]
    fn pre_clamp_step_costs_exactly_epsilon() {
        // The rescaled displacement has metric cost epsilon for any
        // nonzero action, before clamping.
        let envs = [
            Environment::euclid2d_free(),
            Environment::matsumoto(),
            Environment::carlike(),
        ];
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for env in &envs {
            for _ in 0..20 {
                let p = env.sample_free(&mut rng).unwrap();
                let action: Vec<f64> = (0..env.man_dim())
                    .map(|_| rng.gen::<f64>() * 2.0 - 1.0)
                    .collect();
                let v = TangentVector {
                    components: action.clone(),
                };
                let f = env.finsler_norm(&p, &v).unwrap();
                if f <= 1e-9 {
                    continue;
                }
                let eps = 0.05;
                let scaled = TangentVector {
                    components: action.iter().map(|a| a * eps / f).collect(),
                };
                let cost = env.finsler_norm(&p, &scaled).unwrap();
                assert!((cost - eps).abs() < 1e-9 * eps, "{cost} in {}", env.kind_name());
            }
        }
    }

    #[test]
    fn gae_hand_example() {
        // Rewards [1, 1], values [0, 0, 0], gamma 1, lambda 0.95.
        let adv = gae_advantages(&[1.0, 1.0], &[0.0, 0.0, 0.0], &[false, true], 0.95).unwrap();
        assert!((adv[0] - 1.95).abs() < 1e-12);
        assert!((adv[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gae_matches_brute_force() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        for _ in 0..50 {
            let n = 1 + (rng.gen::<u64>() % 16) as usize;
            let rewards: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let values: Vec<f64> = (0..=n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let terminal: Vec<bool> = (0..n).map(|_| rng.gen::<f64>() < 0.2).collect();
            let lambda = rng.gen::<f64>();
            let adv = gae_advantages(&rewards, &values, &terminal, lambda).unwrap();
            // Brute force: sum of (lambda * cont)-weighted deltas.
            for t in 0..n {
                let mut want = 0.0;
                let mut w = 1.0;
                for u in t..n {
                    let cont = if terminal[u] { 0.0 } else { 1.0 };
                    let delta = rewards[u] + cont * values[u + 1] - values[u];
                    want += w * delta;
                    if cont == 0.0 {
                        break;
                    }
                    w *= lambda;
                }
                assert!((adv[t] - want).abs() < 1e-12);
            }
        }
    }

    fn tiny_ppo(seed: u64) -> PpoConfig {
        PpoConfig {
            total_timesteps: 600,
            rollout: 256,
            batch_size: 64,
            epochs: 2,
            hidden: vec![16, 16],
            ..PpoConfig::defaults(600, 0.1, 16, seed)
        }
    }

    #[test]
    fn ppo_round_is_deterministic() {
        let run = || {
            let mut l = PpoLearner::new(Environment::euclid2d_free(), tiny_ppo(5)).unwrap();
            l.run(|_, _| Ok(())).unwrap();
            (
                l.policy.params().to_vec(),
                l.value.params().to_vec(),
                l.log_std.clone(),
                l.ledger.total(),
            )
        };
        let a = run();
        let b = run();
        assert_eq!(a, b);
        assert!(a.3 >= 600);
    }

    #[test]
    fn seq_policy_output_shape_and_goal() {
        let l = PpoLearner::new(Environment::euclid2d_free(), tiny_ppo(6)).unwrap();
        let env = Environment::euclid2d_free();
        let s = pt(&[-0.4, -0.2]);
        let g = pt(&[0.4, 0.3]);
        let policy = l.policy();
        let points = policy.generate(&env, &s, &g, 16).unwrap();
        assert_eq!(points.len(), 17);
        assert_eq!(points[0], s);
        assert_eq!(points[16], g);
    }
}
