//! Acceptance suite: one test per release criterion, each printing a
//! single `criterion N: PASS — ...` line (visible with `--nocapture`).
//! The learning criteria (6 and 8) train from scratch and dominate the
//! runtime; everything else finishes in seconds.

use std::path::Path;
use std::process::Command;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use midpoint_core::baselines::seq::{PpoConfig, PpoLearner};
use midpoint_core::eval::{evaluate_success, make_eval_set, EvalTaskSpec, TimestepLedger};
use midpoint_core::geometry::{Environment, StatePoint, TangentVector};
use midpoint_core::midpoint::{
    build_actor, build_critic, collect_data, variant_pair_objective, ActorVariant, Learner,
    ScheduleStrategy, TrainConfig, VariantConfig,
};
use midpoint_core::neural::{Activation, Mlp};
use midpoint_core::oracle::{vi_converge, vi_init, vi_step, Analytic1d};

fn verdict(n: u32, ok: bool, detail: &str) {
    println!(
        "criterion {n}: {} — {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {n} failed: {detail}");
}

fn pt(coords: &[f64]) -> StatePoint {
    StatePoint {
        coords: coords.to_vec(),
    }
}

fn vec_t(c: &[f64]) -> TangentVector {
    TangentVector {
        components: c.to_vec(),
    }
}

// ----------------------------------------------------------------- 1

#[test]
fn criterion_01_metric_unit_values() {
    let sqrt2 = 2f64.sqrt();
    let m = Environment::matsumoto();
    let p = pt(&[0.5, 0.0]);
    let downhill = m.finsler_norm(&p, &vec_t(&[1.0, 0.0])).unwrap();
    let uphill = m.finsler_norm(&p, &vec_t(&[-1.0, 0.0])).unwrap();

    let c = Environment::carlike();
    let q = pt(&[0.0, 0.0, 1.0, 0.0]); // heading 0
    let fwd = c.finsler_norm(&q, &vec_t(&[1.0, 0.0, 0.0])).unwrap();
    let side = c.finsler_norm(&q, &vec_t(&[0.0, 1.0, 0.0])).unwrap();
    let back = c.finsler_norm(&q, &vec_t(&[-1.0, 0.0, 0.0])).unwrap();
    let turn = c.finsler_norm(&q, &vec_t(&[0.0, 0.0, 1.0])).unwrap();

    let checks = [
        (downhill, 2.0 / (sqrt2 + 1.0)),
        (uphill, 2.0 * (sqrt2 + 1.0)),
        (fwd, 1.0),
        (side, 101f64.sqrt()),
        (back, 101f64.sqrt()),
        (turn, 2.0),
    ];
    let worst = checks
        .iter()
        .map(|(got, want)| (got - want).abs())
        .fold(0.0, f64::max);
    verdict(
        1,
        worst < 1e-9,
        &format!("six hand-derived metric values, worst abs error {worst:.2e}"),
    );
}

// ----------------------------------------------------------------- 2

#[test]
fn criterion_02_algebraic_identities() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let a = rand::Rng::gen::<f64>(&mut rng) * 10.0;
        let b = rand::Rng::gen::<f64>(&mut rng) * 10.0;
        // Squared-sum decomposition: minimized exactly at equal halves.
        let lhs = a * a + b * b;
        let rhs = 0.5 * (a + b) * (a + b) + 0.5 * (a - b) * (a - b);
        worst = worst.max((lhs - rhs).abs());
        // 2:1 division analogue.
        let lhs2 = a * a + 2.0 * b * b;
        let rhs2 = (a + 2.0 * b) * (a + 2.0 * b) / 3.0 + 2.0 * (a - b) * (a - b) / 3.0;
        worst = worst.max((lhs2 - rhs2).abs());
    }
    verdict(
        2,
        worst <= 1e-12,
        &format!("midpoint and 2:1 identities over 1e5 pairs, worst abs error {worst:.2e}"),
    );
}

// ----------------------------------------------------------------- 3

#[test]
fn criterion_03_gradient_finite_differences() {
    let h = 1e-5;
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    // A central difference is only meaningful where the network is
    // locally smooth; a rectifier kink inside the step makes the FD
    // quotient itself wrong. Detect kinks by comparing two step sizes
    // and exclude those coordinates, keeping count.
    let mut checked = 0u64;
    let mut skipped = 0u64;
    for case in 0..100u64 {
        let dims: Vec<usize> = (0..(2 + case as usize % 3))
            .map(|_| 2 + (rand::Rng::gen::<u64>(&mut rng) % 4) as usize)
            .collect();
        let act = if case % 2 == 0 {
            Activation::Relu
        } else {
            Activation::Tanh
        };
        let net = Mlp::init(dims.clone(), act, &mut rng).unwrap();
        let n = 1 + (case as usize % 3);
        let x: Vec<f64> = (0..n * net.input_dim())
            .map(|_| rand::Rng::gen::<f64>(&mut rng) * 2.0 - 1.0)
            .collect();
        let w: Vec<f64> = (0..n * net.output_dim())
            .map(|_| rand::Rng::gen::<f64>(&mut rng) * 2.0 - 1.0)
            .collect();
        let scalar = |net: &Mlp, x: &[f64]| -> f64 {
            let (y, _) = net.forward_batch(x, n).unwrap();
            y.iter().zip(&w).map(|(a, b)| a * b).sum()
        };
        let (_, cache) = net.forward_batch(&x, n).unwrap();
        let mut grads = net.zero_grads();
        let gin = net.backward_batch(&cache, &w, &mut grads).unwrap();
        let fd_at = |f: &mut dyn FnMut(f64) -> f64| -> Option<f64> {
            let f0 = f(0.0);
            let sp = (f(h) - f0) / h;
            let sm = (f0 - f(-h)) / h;
            // Disagreeing one-sided slopes mean a rectifier kink inside
            // the step (zero-init biases put some pre-activations at
            // exactly 0): no classical derivative exists there.
            if (sp - sm).abs() > 1e-4 * sp.abs().max(sm.abs()).max(1.0) {
                None
            } else {
                Some((sp + sm) / 2.0)
            }
        };
        for i in 0..grads.len() {
            let fd = fd_at(&mut |d: f64| {
                let mut p = net.clone();
                p.params_mut()[i] += d;
                scalar(&p, &x)
            });
            match fd {
                Some(fd) => {
                    let denom = fd.abs().max(grads[i].abs()).max(1e-6);
                    worst = worst.max((fd - grads[i]).abs() / denom);
                    checked += 1;
                }
                None => skipped += 1,
            }
        }
        for i in 0..x.len() {
            let fd = fd_at(&mut |d: f64| {
                let mut xp = x.clone();
                xp[i] += d;
                scalar(&net, &xp)
            });
            match fd {
                Some(fd) => {
                    let denom = fd.abs().max(gin[i].abs()).max(1e-6);
                    worst = worst.max((fd - gin[i]).abs() / denom);
                    checked += 1;
                }
                None => skipped += 1,
            }
        }
    }
    let coverage = checked as f64 / (checked + skipped) as f64;
    verdict(
        3,
        worst < 1e-4 && coverage > 0.99,
        &format!(
            "100 random nets, {checked} parameter/input grads vs central FD, worst rel \
             {worst:.2e}; {skipped} rectifier-kink coordinates excluded ({:.2}% coverage)",
            coverage * 100.0
        ),
    );
}

// ----------------------------------------------------------------- 4

#[test]
fn criterion_04_finite_set_iteration_oracles() {
    // 1D analytic fixture: 129 nodes, 8 synchronous sweeps.
    let mut table = Analytic1d::table(129).unwrap();
    for _ in 0..8 {
        table = vi_step(&table);
    }
    let v = table.value(0, 128);
    let endpoint_err = (v - 1.5).abs() / 1.5;
    let mid = table.midpoint_index(0, 128);
    let mid_t = table.nodes()[mid].coords[0];
    let cell = 1.0 / 128.0;
    let mid_ok = (mid_t - 0.581139).abs() <= cell + 1e-12;

    // Euclidean 17x17 grid: the iteration must reach a fixed point
    // (a further sweep changes no value by more than 1e-9, relative).
    let side = 17;
    let mut nodes = Vec::new();
    for i in 0..side {
        for j in 0..side {
            nodes.push(pt(&[
                -1.0 + 2.0 * i as f64 / (side - 1) as f64,
                -1.0 + 2.0 * j as f64 / (side - 1) as f64,
            ]));
        }
    }
    let env = Environment::euclid2d_free();
    let mut reference = Vec::with_capacity(nodes.len() * nodes.len());
    for a in &nodes {
        for b in &nodes {
            let dx = a.coords[0] - b.coords[0];
            let dy = a.coords[1] - b.coords[1];
            reference.push((dx * dx + dy * dy).sqrt());
        }
    }
    let grid = vi_init(nodes, |a, b| env.local_cost(a, b).unwrap()).unwrap();
    let (_, report) = vi_converge(grid, 64, &reference).unwrap();
    let fixed = report.reached_fixed_point
        && report
            .trajectory
            .last()
            .map(|s| s.max_rel_change < 1e-9)
            .unwrap_or(false);

    let ok = endpoint_err < 0.03 && mid_ok && fixed;
    verdict(
        4,
        ok,
        &format!(
            "1D endpoint rel err {endpoint_err:.4} (<0.03), midpoint at t={mid_t:.6} \
             (|Δ|≤one cell of 0.581139: {mid_ok}), 17x17 grid fixed point: {fixed}"
        ),
    );
}

// ----------------------------------------------------------------- 5

#[test]
fn criterion_05_data_collection_bookkeeping() {
    let env = Environment::euclid2d_free();
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let actor = build_actor(&env, &[16], &mut rng).unwrap();
    let critic = build_critic(&env, &[16], &mut rng).unwrap();
    let variant = VariantConfig::midpoint(true);

    let mut counts_ok = true;
    let mut telescope_worst = 0.0f64;
    for depth in 0..=4u32 {
        let tuples = collect_data(&actor, &critic, &env, depth, &variant, 0.1, &mut rng).unwrap();
        let nodes = (1usize << depth) + 1;
        let pairs = (1usize << (depth + 1)) - 1;
        counts_ok &= tuples.len() == nodes + pairs;
        // The root tuple (emitted last) telescopes the leaf costs.
        let leaf_sum: f64 = tuples[nodes..nodes + (1 << depth)].iter().map(|t| t.c).sum();
        let root = tuples.last().unwrap();
        telescope_worst = telescope_worst.max((root.c - leaf_sum).abs());
    }

    // Published per-depth cycle budget arithmetic for the sequential
    // policy-gradient baseline: 300 trees per cycle, 1000 cycles at
    // depth 1 and 538 at depths 2..6.
    let mut ledger = TimestepLedger::new();
    ledger.record_cycles(1, 1000 * 300);
    for d in 2..=6 {
        ledger.record_cycles(d, 538 * 300);
    }
    let budget_ok = ledger.total() == 20_613_600;

    let ok = counts_ok && telescope_worst <= 1e-12 && budget_ok;
    verdict(
        5,
        ok,
        &format!(
            "tuple counts (2^D+1)+(2^(D+1)-1) at depths 0..4: {counts_ok}, root telescoping \
             worst {telescope_worst:.2e}, ledger budget 20,613,600: {budget_ok}"
        ),
    );
}

// ----------------------------------------------------------------- 6

fn matsumoto_train_config(seed: u64) -> TrainConfig {
    TrainConfig {
        total_timesteps: 1_000_000,
        d_max: 4,
        batch_size: 256,
        epochs: 10,
        critic_lr: 3e-5,
        actor_lr: 3e-5,
        hidden: vec![64, 64],
        schedule: ScheduleStrategy::CycleBased,
        variant: VariantConfig::midpoint(false),
        epsilon: 0.2,
        seed,
    }
}

#[test]
fn criterion_06_learned_midpoints_on_slope_metric() {
    let env = Environment::matsumoto();
    let spec = EvalTaskSpec {
        segments: 16,
        epsilon: 0.2,
        pair_count: 100,
        seed: 12345,
    };
    let pairs = make_eval_set(&env, &spec).unwrap();

    let mut passes = 0;
    let mut untrained_ok = true;
    let mut rates = Vec::new();
    for seed in 0..5u64 {
        let mut learner = Learner::new(env.clone(), matsumoto_train_config(seed)).unwrap();
        let before = evaluate_success(&learner.policy(), &env, &pairs, &spec, 0).unwrap();
        untrained_ok &= before.success_rate < 0.30;
        learner.run(|_, _| Ok(())).unwrap();
        let after = evaluate_success(
            &learner.policy(),
            &env,
            &pairs,
            &spec,
            learner.ledger.total(),
        )
        .unwrap();
        rates.push((seed, before.success_rate, after.success_rate));
        if after.success_rate >= 0.70 {
            passes += 1;
        }
    }
    let ok = passes >= 3 && untrained_ok;
    verdict(
        6,
        ok,
        &format!(
            "trained success ≥70% on {passes}/5 seeds (need ≥3), untrained <30% on all: \
             {untrained_ok}; (seed, before, after) = {rates:?}"
        ),
    );
}

// ----------------------------------------------------------------- 7

#[test]
fn criterion_07_obstacle_successes_stay_free() {
    let env = Environment::euclid2d_default_map();
    let spec = EvalTaskSpec {
        segments: 8,
        epsilon: 0.2,
        pair_count: 100,
        seed: 12345,
    };
    let pairs = make_eval_set(&env, &spec).unwrap();
    let config = TrainConfig {
        total_timesteps: 40_000,
        d_max: 3,
        batch_size: 256,
        epochs: 10,
        critic_lr: 1e-4,
        actor_lr: 1e-4,
        hidden: vec![64, 64],
        schedule: ScheduleStrategy::CycleBased,
        variant: VariantConfig::midpoint(true),
        epsilon: 0.2,
        seed: 7,
    };
    let mut learner = Learner::new(env.clone(), config).unwrap();
    let mut violations = 0;
    // Check on every evaluation run: untrained, mid-training, final.
    let before = evaluate_success(&learner.policy(), &env, &pairs, &spec, 0).unwrap();
    violations += before.free_space_violations;
    learner.run(|_, _| Ok(())).unwrap();
    let after = evaluate_success(
        &learner.policy(),
        &env,
        &pairs,
        &spec,
        learner.ledger.total(),
    )
    .unwrap();
    violations += after.free_space_violations;

    // Independent re-check: regenerate each successful pair's path and
    // verify every waypoint lies in the free space.
    let mut all_free = true;
    use midpoint_core::eval::PathPolicy;
    let policy = learner.policy();
    for (i, (s, g)) in pairs.iter().enumerate() {
        if !after.successes[i] {
            continue;
        }
        let path = policy.generate(&env, s, g, spec.segments).unwrap();
        all_free &= path.iter().all(|p| env.is_free(p));
    }
    let ok = violations == 0 && all_free;
    verdict(
        7,
        ok,
        &format!(
            "{} successes re-checked waypoint-by-waypoint (all free: {all_free}), \
             {violations} free-space violations across evaluations (need 0)",
            after.successes.iter().filter(|&&s| s).count()
        ),
    );
}

// ----------------------------------------------------------------- 8

#[test]
fn criterion_08_sequential_baseline_sanity() {
    let env = Environment::euclid2d_free();
    let spec = EvalTaskSpec {
        segments: 16,
        epsilon: 0.1,
        pair_count: 100,
        seed: 12345,
    };
    let pairs = make_eval_set(&env, &spec).unwrap();
    let mut passes = 0;
    let mut rates = Vec::new();
    for seed in 0..5u64 {
        let config = PpoConfig::defaults(500_000, 0.1, 16, seed);
        let mut learner = PpoLearner::new(env.clone(), config).unwrap();
        learner.run(|_, _| Ok(())).unwrap();
        let report = evaluate_success(
            &learner.policy(),
            &env,
            &pairs,
            &spec,
            learner.ledger.total(),
        )
        .unwrap();
        rates.push((seed, report.success_rate));
        if report.success_rate >= 0.60 {
            passes += 1;
        }
    }
    let ok = passes >= 3;
    verdict(
        8,
        ok,
        &format!("step-policy success ≥60% on {passes}/5 seeds (need ≥3); rates {rates:?}"),
    );
}

// ----------------------------------------------------------------- 9

#[test]
fn criterion_09_variant_objective_divergence() {
    // Exact Euclidean critic on the segment s=0, g=2: V(s,z)=z,
    // V(z,g)=2-z for z in [0,2].
    let n = 1001;
    let mut min_idx = 0;
    let mut min_val = f64::INFINITY;
    let mut inter_dev = 0.0f64;
    for i in 0..n {
        let z = 2.0 * i as f64 / (n - 1) as f64;
        let sq = variant_pair_objective(ActorVariant::Midpoint, z, 2.0 - z);
        if sq < min_val {
            min_val = sq;
            min_idx = i;
        }
        let inter = variant_pair_objective(ActorVariant::Inter, z, 2.0 - z);
        inter_dev = inter_dev.max((inter - 2.0).abs());
    }
    // Uniqueness: every other sweep point is strictly worse.
    let mut unique = true;
    for i in 0..n {
        if i == min_idx {
            continue;
        }
        let z = 2.0 * i as f64 / (n - 1) as f64;
        unique &= variant_pair_objective(ActorVariant::Midpoint, z, 2.0 - z) > min_val;
    }
    let z_star = 2.0 * min_idx as f64 / (n - 1) as f64;
    let ok = (z_star - 1.0).abs() < 1e-12 && unique && inter_dev <= 1e-12;
    verdict(
        9,
        ok,
        &format!(
            "squared objective uniquely minimized at z={z_star} (want 1), \
             plain-sum objective constant to {inter_dev:.2e}"
        ),
    );
}

// ----------------------------------------------------------------- 10

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn criterion_10_byte_identical_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("exp.toml");
    std::fs::write(
        &config,
        "method = \"our_c\"\nseed = 9\ntotal_timesteps = 3000\nd_max = 2\nepsilon = 0.2\n\n\
         [environment]\nkind = \"matsumoto\"\n\n[eval]\npairs = 10\n",
    )
    .unwrap();
    let bin = env!("CARGO_BIN_EXE_midpoint");
    for run in ["a", "b"] {
        let status = Command::new(bin)
            .args(["train", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(tmp.path().join(run))
            .status()
            .unwrap();
        assert!(status.success());
        let eval = Command::new(bin)
            .args(["eval", "--config"])
            .arg(&config)
            .arg("--checkpoint")
            .arg(tmp.path().join(run).join("checkpoints/final.ckpt"))
            .arg("--out")
            .arg(tmp.path().join(format!("{run}-eval.csv")))
            .status()
            .unwrap();
        assert!(eval.success());
    }
    let a = dir_bytes(&tmp.path().join("a"));
    let b = dir_bytes(&tmp.path().join("b"));
    let same_names = a.iter().map(|(n, _)| n).eq(b.iter().map(|(n, _)| n));
    let same_bytes = a == b;
    let eval_same = std::fs::read(tmp.path().join("a-eval.csv")).unwrap()
        == std::fs::read(tmp.path().join("b-eval.csv")).unwrap();
    let ok = same_names && same_bytes && eval_same;
    verdict(
        10,
        ok,
        &format!(
            "two identical train+eval runs: {} files, byte-identical artifacts: {same_bytes}, \
             identical reports: {eval_same}",
            a.len()
        ),
    );
}
