//! Per-pair diagnosis of a trained tree checkpoint on the slope-metric
//! evaluation set: compares generated path costs against a graph-
//! distance oracle and separates "route too costly" failures from
//! "segments unbalanced" failures.

use midpoint_cli::checkpoint;
use midpoint_cli::config::{ExperimentConfig, ResolvedMethod};
use midpoint_core::eval::{make_eval_set, EvalTaskSpec, PathPolicy};
use midpoint_core::geometry::StatePoint;
use midpoint_core::oracle::graph_distance;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let cfg = ExperimentConfig::load(args[1].as_ref()).unwrap();
    let (env, resolved) = cfg.resolve().unwrap();
    let ResolvedMethod::Tree(train_cfg) = resolved else {
        panic!("tree checkpoints only");
    };
    let learner = checkpoint::load_tree(env.clone(), train_cfg, args[2].as_ref()).unwrap();
    let policy = learner.policy();

    let spec = EvalTaskSpec {
        segments: 16,
        epsilon: cfg.epsilon,
        pair_count: 100,
        seed: 12345,
    };
    let pairs = make_eval_set(&env, &spec).unwrap();

    // Graph-distance oracle on a polar disk grid.
    let rings = 40;
    let spokes = 64;
    let mut nodes = vec![StatePoint { coords: vec![0.0, 0.0] }];
    for ri in 1..=rings {
        let r = ri as f64 / rings as f64 * 0.999;
        for si in 0..spokes {
            let a = si as f64 / spokes as f64 * core::f64::consts::TAU;
            nodes.push(StatePoint {
                coords: vec![r * a.cos(), r * a.sin()],
            });
        }
    }
    let n = nodes.len();
    let dist = graph_distance(&env, &nodes, 1.0).unwrap();
    let nearest = |p: &StatePoint| -> usize {
        (0..n)
            .min_by(|&a, &b| {
                let da: f64 = (0..2).map(|k| (p.coords[k] - nodes[a].coords[k]).powi(2)).sum();
                let db: f64 = (0..2).map(|k| (p.coords[k] - nodes[b].coords[k]).powi(2)).sum();
                da.partial_cmp(&db).unwrap()
            })
            .unwrap()
    };

    let eps = spec.epsilon;
    let budget = spec.segments as f64 * eps;
    let mut n_success = 0;
    let mut n_infeasible = 0;
    let mut n_route = 0; // total cost exceeds the budget
    let mut n_balance = 0; // total within budget but a segment over eps
    println!("pair,oracle_d,path_cost,max_seg,max_idx,success,class");
    for (i, (s, g)) in pairs.iter().enumerate() {
        let d = dist[nearest(s) * n + nearest(g)];
        let path = policy.generate(&env, s, g, spec.segments).unwrap();
        let mut total = 0.0;
        let mut max_seg = 0.0f64;
        let mut max_idx = 0;
        for (k, w) in path.windows(2).enumerate() {
            let c = env.obstructed_cost(&w[0], &w[1]).unwrap();
            total += c;
            if c > max_seg {
                max_seg = c;
                max_idx = k;
            }
        }
        let success = max_seg <= eps * (1.0 + 1e-9);
        let class = if success {
            n_success += 1;
            "ok"
        } else if d > budget {
            n_infeasible += 1;
            "infeasible"
        } else if total > budget {
            n_route += 1;
            "route"
        } else {
            n_balance += 1;
            "balance"
        };
        println!(
            "{i},{d:.4},{total:.4},{max_seg:.4},{max_idx},{},{class}",
            success as u8
        );
    }
    println!(
        "summary: success {n_success}, infeasible {n_infeasible}, route {n_route}, balance {n_balance}"
    );

    // Does the critic know better midpoints than the actor extracts?
    // Build trees whose splits are brute-force argmins of
    // V(s,z)^2 + V(z,g)^2 over a coarse-to-fine grid, and score them.
    let critic_v = |s: &[f64], z: &[f64]| -> f64 {
        let mut input = s.to_vec();
        input.extend_from_slice(z);
        let (raw, _) = learner.critic.forward(&input).unwrap();
        raw[0].exp() - 1.0
    };
    let pick_best = |s: &[f64], g: &[f64], cands: &[[f64; 2]]| -> ([f64; 2], f64) {
        let mut best = [0.0; 2];
        let mut best_v = f64::INFINITY;
        for &z in cands {
            if z[0] * z[0] + z[1] * z[1] > 1.0 {
                continue;
            }
            let a = critic_v(s, &z);
            let b = critic_v(&z, g);
            let val = a * a + b * b;
            if val < best_v {
                best_v = val;
                best = z;
            }
        }
        (best, best_v)
    };
    let argmin_mid = |s: &[f64], g: &[f64]| -> Vec<f64> {
        let mut coarse = vec![[0.0, 0.0]];
        for ri in 1..=20 {
            let r = ri as f64 / 20.0 * 0.999;
            for si in 0..48 {
                let ang = si as f64 / 48.0 * core::f64::consts::TAU;
                coarse.push([r * ang.cos(), r * ang.sin()]);
            }
        }
        let (center, center_v) = pick_best(s, g, &coarse);
        let mut fine = Vec::new();
        for i in -10i32..=10 {
            for j in -10i32..=10 {
                fine.push([center[0] + i as f64 * 0.005, center[1] + j as f64 * 0.005]);
            }
        }
        let (refined, refined_v) = pick_best(s, g, &fine);
        if refined_v < center_v {
            refined.to_vec()
        } else {
            center.to_vec()
        }
    };
    let mut oracle_success = 0;
    let mut actor_gap = Vec::new();
    for (s, g) in &pairs {
        // depth-4 tree by recursive critic argmin
        let mut pts: Vec<Vec<f64>> = vec![Vec::new(); 17];
        pts[0] = s.coords.clone();
        pts[16] = g.coords.clone();
        for level in 0..4u32 {
            let step = 16usize >> level;
            for j in 0..(1usize << level) {
                let (a, b) = (step * j, step * (j + 1));
                let mid = argmin_mid(&pts[a].clone(), &pts[b].clone());
                pts[a + step / 2] = mid;
            }
        }
        let mut max_seg = 0.0f64;
        for w in pts.windows(2) {
            let c = env
                .obstructed_cost(
                    &StatePoint { coords: w[0].clone() },
                    &StatePoint { coords: w[1].clone() },
                )
                .unwrap();
            max_seg = max_seg.max(c);
        }
        if max_seg <= eps * (1.0 + 1e-9) {
            oracle_success += 1;
        }
        // distance between actor root midpoint and critic argmin root
        let root = argmin_mid(&s.coords, &g.coords);
        let path = policy.generate(&env, s, g, 2).unwrap();
        let pa = &path[1].coords;
        actor_gap.push(((pa[0] - root[0]).powi(2) + (pa[1] - root[1]).powi(2)).sqrt());
    }
    actor_gap.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!(
        "critic-argmin trees succeed on {oracle_success}/100; actor-vs-argmin root gap \
         median {:.4} p90 {:.4}",
        actor_gap[50], actor_gap[90]
    );

    // Residual exploration noise of the actor head on the eval pairs.
    let d = env.rep_dim();
    let mut sigmas = Vec::new();
    for (s, g) in &pairs {
        let mut input = s.coords.clone();
        input.extend_from_slice(&g.coords);
        let (raw, _) = learner.actor.forward(&input).unwrap();
        for k in 0..d {
            sigmas.push(raw[d + k].clamp(-20.0, 2.0).exp());
        }
    }
    sigmas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!(
        "actor sigma on eval pairs: min {:.4} median {:.4} max {:.4}",
        sigmas[0],
        sigmas[sigmas.len() / 2],
        sigmas[sigmas.len() - 1]
    );
}
