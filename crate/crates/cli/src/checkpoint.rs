//! Self-describing binary checkpoints.
//!
//! Layout (all integers little-endian, all floats f64 LE):
//!
//! ```text
//! magic  "MGCK" (4 bytes)
//! u32    format version (currently 1)
//! u8     method tag: 0 = midpoint tree, 1 = sequential PPO, 2 = sub-goal PG
//! ...    method payload, see below
//! ```
//!
//! Shared building blocks:
//! - vec<f64>: u64 length, then the values
//! - network: u8 activation (0 relu, 1 tanh), u32 layer count,
//!   u64 layer sizes, then the flat parameter vector (per layer: weight
//!   matrix row-major, then bias)
//! - optimizer: f64 learning rate, u64 step, first-moment vec, second-moment vec
//! - rng: 32 seed bytes, u128 stream word position (16 bytes LE)
//!
//! Tree payload: actor net, critic net, actor opt, critic opt, rng,
//! u64 ledger total, u64 collection cycles.
//! Seq payload: policy net, value net, log-std vec, joint opt, rng,
//! u64 ledger total, u64 episodes. The in-flight episode is not saved;
//! a resumed learner starts a fresh one.
//! Pg payload: u32 policy count, then per policy (net, deviation
//! parameter vec, opt), rng, u64 ledger total, u64 completed cycles.

use std::path::Path;

use anyhow::{bail, Context};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use midpoint_core::baselines::pg::{PgConfig, PgLearner, PgPolicy};
use midpoint_core::baselines::seq::{PpoConfig, PpoLearner};
use midpoint_core::eval::TimestepLedger;
use midpoint_core::geometry::Environment;
use midpoint_core::midpoint::{Learner, TrainConfig};
use midpoint_core::neural::{Activation, AdamState, Mlp};

const MAGIC: &[u8; 4] = b"MGCK";
const VERSION: u32 = 1;

pub const TAG_TREE: u8 = 0;
pub const TAG_SEQ: u8 = 1;
pub const TAG_PG: u8 = 2;

// ---------------------------------------------------------------- writing

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new(tag: u8) -> Self {
        let mut buf = Vec::with_capacity(1 << 16);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&VERSION.to_le_bytes());
        buf.push(tag);
        Writer { buf }
    }

    fn u8(&mut self, x: u8) {
        self.buf.push(x);
    }

    fn u32(&mut self, x: u32) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    fn u64(&mut self, x: u64) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    fn u128(&mut self, x: u128) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    fn f64(&mut self, x: f64) {
        self.buf.extend_from_slice(&x.to_le_bytes());
    }

    fn vec_f64(&mut self, v: &[f64]) {
        self.u64(v.len() as u64);
        for &x in v {
            self.f64(x);
        }
    }

    fn net(&mut self, net: &Mlp) {
        self.u8(match net.activation() {
            Activation::Relu => 0,
            Activation::Tanh => 1,
        });
        self.u32(net.layer_sizes().len() as u32);
        for &s in net.layer_sizes() {
            self.u64(s as u64);
        }
        self.vec_f64(net.params());
    }

    fn opt(&mut self, opt: &AdamState) {
        self.f64(opt.lr);
        self.u64(opt.step);
        let (m, v) = opt.moments();
        self.vec_f64(m);
        self.vec_f64(v);
    }

    fn rng(&mut self, rng: &ChaCha20Rng) {
        self.buf.extend_from_slice(&rng.get_seed());
        self.u128(rng.get_word_pos());
    }

    fn save(self, path: &Path) -> anyhow::Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(path, &self.buf)
            .with_context(|| format!("cannot write checkpoint {}", path.display()))
    }
}

// ---------------------------------------------------------------- reading

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn open(data: &'a [u8], expect_tag: u8) -> anyhow::Result<Self> {
        let mut r = Reader { data, pos: 0 };
        if r.bytes(4)? != MAGIC {
            bail!("not a checkpoint file (bad magic)");
        }
        let version = r.u32()?;
        if version != VERSION {
            bail!("unsupported checkpoint version {version}");
        }
        let tag = r.u8()?;
        if tag != expect_tag {
            bail!("checkpoint method tag {tag} does not match the configured method");
        }
        Ok(r)
    }

    fn bytes(&mut self, n: usize) -> anyhow::Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            bail!("truncated checkpoint");
        }
        let out = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn finish(&self) -> anyhow::Result<()> {
        if self.pos != self.data.len() {
            bail!("trailing bytes in checkpoint");
        }
        Ok(())
    }

    fn u8(&mut self) -> anyhow::Result<u8> {
        Ok(self.bytes(1)?[0])
    }

    fn u32(&mut self) -> anyhow::Result<u32> {
        Ok(u32::from_le_bytes(self.bytes(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> anyhow::Result<u64> {
        Ok(u64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }

    fn u128(&mut self) -> anyhow::Result<u128> {
        Ok(u128::from_le_bytes(self.bytes(16)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> anyhow::Result<f64> {
        Ok(f64::from_le_bytes(self.bytes(8)?.try_into().unwrap()))
    }

    fn vec_f64(&mut self) -> anyhow::Result<Vec<f64>> {
        let n = self.u64()? as usize;
        if n > self.data.len() / 8 + 1 {
            bail!("implausible vector length in checkpoint");
        }
        (0..n).map(|_| self.f64()).collect()
    }

    fn net(&mut self) -> anyhow::Result<Mlp> {
        let activation = match self.u8()? {
            0 => Activation::Relu,
            1 => Activation::Tanh,
            other => bail!("unknown activation tag {other}"),
        };
        let layers = self.u32()? as usize;
        if layers < 2 || layers > 64 {
            bail!("implausible layer count {layers}");
        }
        let sizes: Vec<usize> = (0..layers)
            .map(|_| self.u64().map(|s| s as usize))
            .collect::<anyhow::Result<_>>()?;
        let params = self.vec_f64()?;
        let mut net = Mlp::zeros(sizes, activation)?;
        net.set_params(&params)
            .context("network parameter count does not match its layer sizes")?;
        Ok(net)
    }

    fn opt(&mut self) -> anyhow::Result<AdamState> {
        let lr = self.f64()?;
        let step = self.u64()?;
        let m = self.vec_f64()?;
        let v = self.vec_f64()?;
        Ok(AdamState::restore(lr, step, m, v)?)
    }

    fn rng(&mut self) -> anyhow::Result<ChaCha20Rng> {
        let seed: [u8; 32] = self.bytes(32)?.try_into().unwrap();
        let pos = self.u128()?;
        let mut rng = ChaCha20Rng::from_seed(seed);
        rng.set_word_pos(pos);
        Ok(rng)
    }
}

fn read_file(path: &Path) -> anyhow::Result<Vec<u8>> {
    std::fs::read(path).with_context(|| format!("cannot read checkpoint {}", path.display()))
}

// ---------------------------------------------------------------- tree

pub fn save_tree(learner: &Learner, path: &Path) -> anyhow::Result<()> {
    let mut w = Writer::new(TAG_TREE);
    w.net(&learner.actor);
    w.net(&learner.critic);
    w.opt(&learner.actor_opt);
    w.opt(&learner.critic_opt);
    w.rng(&learner.rng);
    w.u64(learner.ledger.total());
    w.u64(learner.cycles);
    w.save(path)
}

pub fn load_tree(env: Environment, config: TrainConfig, path: &Path) -> anyhow::Result<Learner> {
    let data = read_file(path)?;
    let mut r = Reader::open(&data, TAG_TREE)?;
    let actor = r.net()?;
    let critic = r.net()?;
    let actor_opt = r.opt()?;
    let critic_opt = r.opt()?;
    let rng = r.rng()?;
    let total = r.u64()?;
    let cycles = r.u64()?;
    r.finish()?;
    config.validate()?;
    let d = env.rep_dim();
    if actor.input_dim() != 2 * d || critic.input_dim() != 2 * d {
        bail!("checkpoint network shapes do not match the configured environment");
    }
    if actor_opt.moments().0.len() != actor.params().len()
        || critic_opt.moments().0.len() != critic.params().len()
    {
        bail!("checkpoint optimizer shapes do not match its networks");
    }
    Ok(Learner {
        env,
        config,
        actor,
        critic,
        actor_opt,
        critic_opt,
        rng,
        ledger: TimestepLedger::from_total(total),
        cycles,
    })
}

// ---------------------------------------------------------------- seq

pub fn save_seq(learner: &PpoLearner, path: &Path) -> anyhow::Result<()> {
    let mut w = Writer::new(TAG_SEQ);
    w.net(&learner.policy);
    w.net(&learner.value);
    w.vec_f64(&learner.log_std);
    w.opt(&learner.opt);
    w.rng(&learner.rng);
    w.u64(learner.ledger.total());
    w.u64(learner.episodes);
    w.save(path)
}

pub fn load_seq(env: Environment, config: PpoConfig, path: &Path) -> anyhow::Result<PpoLearner> {
    let data = read_file(path)?;
    let mut r = Reader::open(&data, TAG_SEQ)?;
    let policy = r.net()?;
    let value = r.net()?;
    let log_std = r.vec_f64()?;
    let opt = r.opt()?;
    let rng = r.rng()?;
    let total = r.u64()?;
    let episodes = r.u64()?;
    r.finish()?;
    Ok(PpoLearner::restore(
        env,
        config,
        policy,
        value,
        log_std,
        opt,
        rng,
        TimestepLedger::from_total(total),
        episodes,
    )?)
}

// ---------------------------------------------------------------- pg

pub fn save_pg(learner: &PgLearner, completed_cycles: u64, path: &Path) -> anyhow::Result<()> {
    let mut w = Writer::new(TAG_PG);
    w.u32(learner.stack.len() as u32);
    for (policy, opt) in learner.stack.iter().zip(learner.optimizer_states()) {
        w.net(&policy.net);
        w.vec_f64(&policy.c);
        w.opt(opt);
    }
    w.rng(&learner.rng);
    w.u64(learner.ledger.total());
    w.u64(completed_cycles);
    w.save(path)
}

pub fn load_pg(
    env: Environment,
    config: PgConfig,
    path: &Path,
) -> anyhow::Result<(PgLearner, u64)> {
    let data = read_file(path)?;
    let mut r = Reader::open(&data, TAG_PG)?;
    let count = r.u32()? as usize;
    let mut stack = Vec::with_capacity(count);
    let mut opts = Vec::with_capacity(count);
    for _ in 0..count {
        let net = r.net()?;
        let c = r.vec_f64()?;
        stack.push(PgPolicy { net, c });
        opts.push(r.opt()?);
    }
    let rng = r.rng()?;
    let total = r.u64()?;
    let completed = r.u64()?;
    r.finish()?;
    let learner = PgLearner::restore(env, config, stack, opts, rng, TimestepLedger::from_total(total))?;
    Ok((learner, completed))
}
