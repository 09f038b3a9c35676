//! Estimates how many pairs of the fixed evaluation set are reachable
//! at all under the segment budget: a 16-segment path with per-segment
//! cost <= 0.2 cannot exist when the true distance exceeds 3.2.

use midpoint_core::eval::{make_eval_set, EvalTaskSpec};
use midpoint_core::geometry::{Environment, StatePoint};
use midpoint_core::oracle::graph_distance;

fn main() {
    let env = Environment::matsumoto();
    let spec = EvalTaskSpec {
        segments: 16,
        epsilon: 0.2,
        pair_count: 100,
        seed: 12345,
    };
    let pairs = make_eval_set(&env, &spec).unwrap();

    // Polar grid over the unit disk.
    let args: Vec<String> = std::env::args().collect();
    let rings: usize = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(24);
    let spokes: usize = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(48);
    let cap: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(0.35);
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
    eprintln!("nodes: {}", nodes.len());
    let n = nodes.len();
    let dist = graph_distance(&env, &nodes, cap).unwrap();

    let nearest = |p: &StatePoint| -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, q) in nodes.iter().enumerate() {
            let dx = p.coords[0] - q.coords[0];
            let dy = p.coords[1] - q.coords[1];
            let d = dx * dx + dy * dy;
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    };

    let budget = 16.0 * 0.2;
    let mut feasible = 0;
    let mut ds: Vec<f64> = Vec::new();
    for (s, g) in &pairs {
        let d = dist[nearest(s) * n + nearest(g)];
        ds.push(d);
        if d <= budget {
            feasible += 1;
        }
    }
    let mut sorted = ds.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!("feasible (d <= {budget}): {feasible}/100");
    println!(
        "distance quantiles: 10%={:.3} 25%={:.3} 50%={:.3} 75%={:.3} 90%={:.3} max={:.3}",
        sorted[9], sorted[24], sorted[49], sorted[74], sorted[89], sorted[99]
    );
    let near = ds.iter().filter(|&&d| d <= budget * 0.9).count();
    println!("comfortably feasible (d <= {:.2}): {near}/100", budget * 0.9);
}
