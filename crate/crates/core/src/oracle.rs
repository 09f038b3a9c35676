//! Ground-truth machinery: all-pairs shortest paths on epsilon-graphs,
//! iterated midpoint value iteration on finite point sets, and an
//! analytic 1D fixture with a closed-form distance.
//!
//! The value iteration starts from the local cost matrix and repeatedly
//! replaces each entry by the cost through the best midpoint under the
//! squared-sum criterion; on node sets dense enough to approximate
//! midpoints it converges toward the true distances.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::geometry::{Environment, StatePoint};
use crate::math;

/// Default cap on oracle node counts.
pub const NODE_CAP: usize = 4096;

/// Finite-set critic table: V matrix plus the argmin midpoint indices.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTable {
    nodes: Vec<StatePoint>,
    v: Vec<f64>,
    mid_index: Vec<usize>,
    iteration: u32,
}

impl OracleTable {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[StatePoint] {
        &self.nodes
    }

    pub fn value(&self, from: usize, to: usize) -> f64 {
        self.v[from * self.nodes.len() + to]
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn midpoint_index(&self, from: usize, to: usize) -> usize {
        self.mid_index[from * self.nodes.len() + to]
    }

    pub fn iteration(&self) -> u32 {
        self.iteration
    }
}

/// V_0 = pairwise cost matrix; midpoint indices start at the source.
pub fn vi_init<F>(nodes: Vec<StatePoint>, mut cost: F) -> Result<OracleTable>
where
    F: FnMut(&StatePoint, &StatePoint) -> f64,
{
    if nodes.is_empty() {
        return Err(CoreError::InvalidInput("oracle needs at least one node"));
    }
    if nodes.len() > NODE_CAP {
        return Err(CoreError::InvalidInput("oracle node cap exceeded"));
    }
    let n = nodes.len();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            v[i * n + j] = if i == j {
                0.0
            } else {
                cost(&nodes[i], &nodes[j])
            };
        }
    }
    let mid_index = (0..n * n).map(|k| k / n).collect();
    Ok(OracleTable {
        nodes,
        v,
        mid_index,
        iteration: 0,
    })
}

/// One synchronous sweep: for every pair, pick the argmin midpoint of
/// V(x,z)^2 + V(z,y)^2 over all nodes (ties resolve to the smallest
/// index) and set V'(x,y) to the sum through it.
pub fn vi_step(table: &OracleTable) -> OracleTable {
    let n = table.nodes.len();
    let mut v = vec![0.0; n * n];
    let mut mid_index = vec![0usize; n * n];
    for i in 0..n {
        let row = &table.v[i * n..(i + 1) * n];
        for j in 0..n {
            let mut best_crit = f64::INFINITY;
            let mut best_sum = 0.0;
            let mut best_z = 0;
            for z in 0..n {
                let a = row[z];
                let b = table.v[z * n + j];
                let crit = a * a + b * b;
                if crit < best_crit {
                    best_crit = crit;
                    best_sum = a + b;
                    best_z = z;
                }
            }
            v[i * n + j] = best_sum;
            mid_index[i * n + j] = best_z;
        }
    }
    OracleTable {
        nodes: table.nodes.clone(),
        v,
        mid_index,
        iteration: table.iteration + 1,
    }
}

/// Statistics for one sweep of `vi_converge`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStats {
    pub iteration: u32,
    /// Sup-norm relative change from the previous table.
    pub max_rel_change: f64,
    pub max_rel_err: f64,
    pub mean_rel_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub trajectory: Vec<IterationStats>,
    /// True when the sup-norm relative change dropped below 1e-10.
    pub reached_fixed_point: bool,
    pub final_max_rel_err: f64,
    pub final_mean_rel_err: f64,
}

fn error_stats(v: &[f64], reference: &[f64]) -> (f64, f64) {
    let mut max_err = 0.0_f64;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (a, r) in v.iter().zip(reference) {
        if !r.is_finite() {
            continue;
        }
        let err = math::abs(a - r) / r.abs().max(1e-12);
        max_err = max_err.max(err);
        sum += err;
        count += 1;
    }
    (max_err, if count > 0 { sum / count as f64 } else { 0.0 })
}

/// Runs `vi_step` until `max_iters` sweeps or the sup-norm relative
/// change drops below 1e-10, reporting errors against a reference
/// distance matrix after every sweep.
pub fn vi_converge(
    mut table: OracleTable,
    max_iters: u32,
    reference: &[f64],
) -> Result<(OracleTable, ConvergenceReport)> {
    let n = table.nodes.len();
    if reference.len() != n * n {
        return Err(CoreError::ShapeMismatch {
            expected: n * n,
            got: reference.len(),
        });
    }
    let mut trajectory = Vec::new();
    let (max0, mean0) = error_stats(&table.v, reference);
    trajectory.push(IterationStats {
        iteration: table.iteration,
        max_rel_change: f64::INFINITY,
        max_rel_err: max0,
        mean_rel_err: mean0,
    });
    let mut reached_fixed_point = false;
    for _ in 0..max_iters {
        let next = vi_step(&table);
        let mut max_change = 0.0_f64;
        for (a, b) in next.v.iter().zip(&table.v) {
            max_change = max_change.max(math::abs(a - b) / (1.0 + math::abs(*b)));
        }
        let (max_err, mean_err) = error_stats(&next.v, reference);
        trajectory.push(IterationStats {
            iteration: next.iteration,
            max_rel_change: max_change,
            max_rel_err: max_err,
            mean_rel_err: mean_err,
        });
        table = next;
        if max_change < 1e-10 {
            reached_fixed_point = true;
            break;
        }
    }
    let last = *trajectory.last().unwrap();
    Ok((
        table,
        ConvergenceReport {
            trajectory,
            reached_fixed_point,
            final_max_rel_err: last.max_rel_err,
            final_mean_rel_err: last.mean_rel_err,
        },
    ))
}

#[derive(PartialEq)]
struct HeapEntry {
    dist: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        // Min-heap on distance; entries are always finite.
        other
            .dist
            .partial_cmp(&self.dist)
            .unwrap_or(core::cmp::Ordering::Equal)
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// All-pairs shortest paths over the directed graph whose edges are the
/// node pairs with `cost <= edge_cap`. Unreachable pairs get +inf.
/// Returned row-major: `out[i * n + j]` is the distance from i to j.
pub fn graph_distance_with<F>(n: usize, mut cost: F, edge_cap: f64) -> Result<Vec<f64>>
where
    F: FnMut(usize, usize) -> f64,
{
    if n == 0 {
        return Err(CoreError::InvalidInput("empty graph"));
    }
    if n > NODE_CAP {
        return Err(CoreError::InvalidInput("graph node cap exceeded"));
    }
    // Adjacency lists once; Dijkstra per source.
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let c = cost(i, j);
            if c <= edge_cap {
                adj[i].push((j, c));
            }
        }
    }
    let mut out = vec![f64::INFINITY; n * n];
    for src in 0..n {
        let dist = &mut out[src * n..(src + 1) * n];
        dist[src] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(HeapEntry {
            dist: 0.0,
            node: src,
        });
        while let Some(HeapEntry { dist: d, node }) = heap.pop() {
            if d > dist[node] {
                continue;
            }
            for &(next, w) in &adj[node] {
                let nd = d + w;
                if nd < dist[next] {
                    dist[next] = nd;
                    heap.push(HeapEntry {
                        dist: nd,
                        node: next,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Shortest paths between environment states using the obstructed local
/// cost on edges no longer than `edge_cap`.
pub fn graph_distance(
    env: &Environment,
    nodes: &[StatePoint],
    edge_cap: f64,
) -> Result<Vec<f64>> {
    let costs: Result<Vec<f64>> = {
        let n = nodes.len();
        let mut all = Vec::with_capacity(n * n);
        for i in nodes {
            for j in nodes {
                all.push(env.obstructed_cost(i, j)?);
            }
        }
        Ok(all)
    };
    let costs = costs?;
    let n = nodes.len();
    graph_distance_with(n, |i, j| costs[i * n + j], edge_cap)
}

/// 1D verification fixture: speed profile F(x, v) = (1 + x)|v| on [0, 1]
/// with potential Y(t) = t + t^2/2, so d(a, b) = |Y(b) - Y(a)|.
pub struct Analytic1d;

impl Analytic1d {
    pub fn potential(t: f64) -> f64 {
        t + t * t / 2.0
    }

    /// Exact distance; errors outside [0, 1].
    pub fn distance(a: f64, b: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
            return Err(CoreError::Domain("analytic fixture domain is [0, 1]"));
        }
        Ok(math::abs(Self::potential(b) - Self::potential(a)))
    }

    /// Local cost C(x, y) = (1 + x)|y - x|.
    pub fn cost(x: f64, y: f64) -> f64 {
        (1.0 + x) * math::abs(y - x)
    }

    /// Evenly spaced nodes on [0, 1] as 1D state points.
    pub fn grid(n: usize) -> Vec<StatePoint> {
        (0..n)
            .map(|i| StatePoint {
                coords: vec![i as f64 / (n - 1) as f64],
            })
            .collect()
    }

    pub fn table(n: usize) -> Result<OracleTable> {
        vi_init(Self::grid(n), |a, b| Self::cost(a.coords[0], b.coords[0]))
    }

    pub fn reference(n: usize) -> Vec<f64> {
        let grid = Self::grid(n);
        let mut out = Vec::with_capacity(n * n);
        for a in &grid {
            for b in &grid {
                out.push(Self::distance(a.coords[0], b.coords[0]).unwrap());
            }
        }
        out
    }
}
