//! Experimental protocol: fixed evaluation pair sets, the success
//! criterion on generated waypoint sequences, path-length comparison
//! (winning rates), and the training timestep ledger.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::error::{CoreError, Result};
use crate::geometry::{Environment, StatePoint};

/// Evaluation task: approximate paths with `segments` pieces and accept
/// a path when no consecutive obstructed cost exceeds `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalTaskSpec {
    /// Number of path segments n; a power of two for tree policies.
    pub segments: usize,
    pub epsilon: f64,
    pub pair_count: usize,
    pub seed: u64,
}

impl EvalTaskSpec {
    pub fn validate(&self) -> Result<()> {
        if self.segments == 0 || !self.segments.is_power_of_two() {
            return Err(CoreError::InvalidInput(
                "segment count must be a positive power of two",
            ));
        }
        if !(self.epsilon > 0.0) {
            return Err(CoreError::InvalidInput("epsilon must be positive"));
        }
        if self.pair_count == 0 {
            return Err(CoreError::InvalidInput("pair count must be positive"));
        }
        Ok(())
    }
}

/// Anything that can produce a deterministic waypoint sequence from s
/// to g with a given number of segments.
pub trait PathPolicy {
    fn generate(
        &self,
        env: &Environment,
        s: &StatePoint,
        g: &StatePoint,
        segments: usize,
    ) -> Result<Vec<StatePoint>>;
}

/// Per-pair outcome of one evaluation sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub successes: Vec<bool>,
    /// Path length (sum of local costs) per pair, present iff success.
    pub lengths: Vec<Option<f64>>,
    pub success_rate: f64,
    /// Successes that contained a non-free waypoint. Whenever
    /// c_P > epsilon this must be zero: a single penalized edge already
    /// exceeds the threshold.
    pub free_space_violations: usize,
    /// Training timestep at which the evaluated policy was captured.
    pub timestep: u64,
}

/// Seed-deterministic endpoint pairs from the free space. Every method
/// must be evaluated on the same set.
pub fn make_eval_set(
    env: &Environment,
    spec: &EvalTaskSpec,
) -> Result<Vec<(StatePoint, StatePoint)>> {
    spec.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.pair_count);
    for _ in 0..spec.pair_count {
        let s = env.sample_free(&mut rng)?;
        let g = env.sample_free(&mut rng)?;
        out.push((s, g));
    }
    Ok(out)
}

/// Checks one waypoint sequence: success iff every consecutive
/// obstructed cost is at most epsilon. Returns (success, length).
pub fn check_sequence(
    env: &Environment,
    points: &[StatePoint],
    epsilon: f64,
) -> Result<(bool, f64)> {
    if points.len() < 2 {
        return Err(CoreError::InvalidInput("sequence needs at least 2 points"));
    }
    let mut ok = true;
    let mut length = 0.0;
    // Relative slack so that steps engineered to cost exactly epsilon
    // (sequential policies move by epsilon per step) are not failed by
    // the last few bits of floating-point rounding.
    let limit = epsilon * (1.0 + 1e-9);
    for w in points.windows(2) {
        let c = env.obstructed_cost(&w[0], &w[1])?;
        if c > limit {
            ok = false;
        }
        length += c;
    }
    Ok((ok, length))
}

/// Evaluates a deterministic policy on a fixed pair set.
pub fn evaluate_success<P: PathPolicy>(
    policy: &P,
    env: &Environment,
    pairs: &[(StatePoint, StatePoint)],
    spec: &EvalTaskSpec,
    timestep: u64,
) -> Result<EvalReport> {
    spec.validate()?;
    let mut successes = Vec::with_capacity(pairs.len());
    let mut lengths = Vec::with_capacity(pairs.len());
    let mut violations = 0;
    for (s, g) in pairs {
        let points = policy.generate(env, s, g, spec.segments)?;
        let (ok, length) = check_sequence(env, &points, spec.epsilon)?;
        if ok && points.iter().any(|p| !env.is_free(p)) {
            violations += 1;
        }
        successes.push(ok);
        lengths.push(if ok { Some(length) } else { None });
    }
    let success_rate = if successes.is_empty() {
        0.0
    } else {
        successes.iter().filter(|&&b| b).count() as f64 / successes.len() as f64
    };
    Ok(EvalReport {
        successes,
        lengths,
        success_rate,
        free_space_violations: violations,
        timestep,
    })
}

/// Path-length comparison restricted to pairs where both reports
/// succeed. Returns (winning percentage of A or None when no pair is a
/// joint success, joint-success percentage). Strict comparison: equal
/// lengths count as a win for neither side.
pub fn winning_rate(a: &EvalReport, b: &EvalReport) -> Result<(Option<f64>, f64)> {
    if a.successes.len() != b.successes.len() {
        return Err(CoreError::ShapeMismatch {
            expected: a.successes.len(),
            got: b.successes.len(),
        });
    }
    let total = a.successes.len();
    if total == 0 {
        return Err(CoreError::InvalidInput("empty reports"));
    }
    let mut joint = 0usize;
    let mut wins = 0usize;
    for i in 0..total {
        if let (Some(la), Some(lb)) = (a.lengths[i], b.lengths[i]) {
            joint += 1;
            if la < lb {
                wins += 1;
            }
        }
    }
    let joint_pct = 100.0 * joint as f64 / total as f64;
    if joint == 0 {
        return Ok((None, 0.0));
    }
    Ok((Some(100.0 * wins as f64 / joint as f64), joint_pct))
}

/// Training-time budget counter: sequential actions count one step
/// each, one tree generation (cycle) at depth D counts 2^D steps.
/// Evaluation-time cost queries are not recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TimestepLedger {
    total: u64,
}

impl TimestepLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_total(total: u64) -> Self {
        TimestepLedger { total }
    }

    pub fn record_sequential(&mut self, steps: u64) {
        self.total += steps;
    }

    pub fn record_cycle(&mut self, depth: u32) {
        self.total += 1u64 << depth;
    }

    pub fn record_cycles(&mut self, depth: u32, cycles: u64) {
        self.total += cycles << depth;
    }

    pub fn total(&self) -> u64 {
        self.total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pt(x: f64, y: f64) -> StatePoint {
        StatePoint { coords: vec![x, y] }
    }

    struct StraightLine;

    impl PathPolicy for StraightLine {
        fn generate(
            &self,
            _env: &Environment,
            s: &StatePoint,
            g: &StatePoint,
            segments: usize,
        ) -> Result<Vec<StatePoint>> {
            let mut out = Vec::with_capacity(segments + 1);
            for k in 0..=segments {
                let t = k as f64 / segments as f64;
                let coords = s
                    .coords
                    .iter()
                    .zip(&g.coords)
                    .map(|(a, b)| a + t * (b - a))
                    .collect();
                out.push(StatePoint { coords });
            }
            Ok(out)
        }
    }

    fn spec(segments: usize, epsilon: f64, pair_count: usize, seed: u64) -> EvalTaskSpec {
        EvalTaskSpec {
            segments,
            epsilon,
            pair_count,
            seed,
        }
    }

    #[test]
    fn eval_set_is_seed_deterministic_and_free() {
        let env = Environment::euclid2d_default_map();
        let s = spec(16, 0.1, 100, 7);
        let a = make_eval_set(&env, &s).unwrap();
        let b = make_eval_set(&env, &s).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 100);
        for (p, q) in &a {
            assert!(env.is_free(p) && env.is_free(q));
        }
        let c = make_eval_set(&env, &spec(16, 0.1, 100, 8)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn success_threshold_boundary() {
        let env = Environment::euclid2d_free();
        // 0.09 max gap passes at epsilon 0.1; a 0.11 gap fails.
        let seq = vec![pt(0.0, 0.0), pt(0.09, 0.0), pt(0.18, 0.0)];
        let (ok, len) = check_sequence(&env, &seq, 0.1).unwrap();
        assert!(ok);
        assert!((len - 0.18).abs() < 1e-12);
        let seq = vec![pt(0.0, 0.0), pt(0.11, 0.0), pt(0.18, 0.0)];
        let (ok, _) = check_sequence(&env, &seq, 0.1).unwrap();
        assert!(!ok);
    }

    #[test]
    fn success_monotonic_in_epsilon() {
        let env = Environment::euclid2d_free();
        let seq = vec![pt(0.0, 0.0), pt(0.08, 0.05), pt(0.2, 0.0)];
        let (ok_small, _) = check_sequence(&env, &seq, 0.1).unwrap();
        let (ok_large, _) = check_sequence(&env, &seq, 0.2).unwrap();
        assert!(!ok_small && ok_large);
    }

    #[test]
    fn penalized_edge_fails_when_cp_exceeds_epsilon() {
        let env = Environment::euclid2d_default_map();
        // Only the middle point sits inside the left obstacle, so both
        // edges cross the boundary and pick up the c_P = 10 penalty.
        let seq = vec![pt(-0.7, 0.0), pt(-0.45, 0.0), pt(-0.65, 0.15)];
        assert!(env.is_free(&seq[0]) && !env.is_free(&seq[1]) && env.is_free(&seq[2]));
        let (ok, _) = check_sequence(&env, &seq, 0.3).unwrap();
        assert!(!ok);
        // The same geometry without obstacles passes.
        let free = Environment::euclid2d_free();
        let (ok, _) = check_sequence(&free, &seq, 0.3).unwrap();
        assert!(ok);
    }

    #[test]
    fn straight_line_report_on_free_space() {
        let env = Environment::euclid2d_free();
        let s = spec(16, 0.2, 50, 3);
        let pairs = make_eval_set(&env, &s).unwrap();
        let r = evaluate_success(&StraightLine, &env, &pairs, &s, 0).unwrap();
        // Max straight-line distance in [-1,1]^2 is 2*sqrt(2) < 16*0.2.
        assert_eq!(r.success_rate, 1.0);
        assert_eq!(r.free_space_violations, 0);
        let r2 = evaluate_success(&StraightLine, &env, &pairs, &s, 0).unwrap();
        assert_eq!(r, r2);
    }

    fn report(lengths: Vec<Option<f64>>) -> EvalReport {
        let successes: Vec<bool> = lengths.iter().map(|l| l.is_some()).collect();
        let success_rate =
            successes.iter().filter(|&&b| b).count() as f64 / successes.len() as f64;
        EvalReport {
            successes,
            lengths,
            success_rate,
            free_space_violations: 0,
            timestep: 0,
        }
    }

    #[test]
    fn winning_rate_hand_fixture() {
        let a = report(vec![Some(1.0), Some(2.0)]);
        let b = report(vec![Some(1.1), Some(1.9)]);
        let (w, joint) = winning_rate(&a, &b).unwrap();
        assert_eq!(w, Some(50.0));
        assert_eq!(joint, 100.0);
    }

    #[test]
    fn winning_rate_ties_lose_for_both() {
        let a = report(vec![Some(1.0), Some(2.0)]);
        let (w, _) = winning_rate(&a, &a).unwrap();
        assert_eq!(w, Some(0.0));
    }

    #[test]
    fn winning_rate_disjoint_successes() {
        let a = report(vec![Some(1.0), None]);
        let b = report(vec![None, Some(2.0)]);
        let (w, joint) = winning_rate(&a, &b).unwrap();
        assert_eq!(w, None);
        assert_eq!(joint, 0.0);
    }

    #[test]
    fn winning_rates_sum_below_hundred() {
        let a = report(vec![Some(1.0), Some(2.0), Some(3.0), None]);
        let b = report(vec![Some(1.0), Some(1.5), Some(4.0), Some(1.0)]);
        let (wa, _) = winning_rate(&a, &b).unwrap();
        let (wb, _) = winning_rate(&b, &a).unwrap();
        // One tie among 3 joint successes: strict wins sum below 100%.
        assert!(wa.unwrap() + wb.unwrap() < 100.0);
    }

    #[test]
    fn ledger_arithmetic() {
        let mut l = TimestepLedger::new();
        l.record_cycles(2, 3);
        assert_eq!(l.total(), 12);
        l.record_sequential(5);
        l.record_cycle(3);
        assert_eq!(l.total(), 25);
    }

    #[test]
    fn ledger_reproduces_policy_gradient_budget() {
        // Per-depth cycle budgets for the slope-metric task: depth 1 runs
        // 1000 cycles, depths 2..6 run 538 cycles, each cycle generating
        // 30 pairs x 10 samples = 300 trees.
        let mut l = TimestepLedger::new();
        l.record_cycles(1, 1000 * 300);
        for d in 2..=6 {
            l.record_cycles(d, 538 * 300);
        }
        assert_eq!(l.total(), 20_613_600);
    }
}
