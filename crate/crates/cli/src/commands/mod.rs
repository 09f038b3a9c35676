//! Subcommand implementations. Each command is deterministic given
//! (config, seed, checkpoint): rerunning one produces byte-identical
//! artifacts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::bail;

use midpoint_core::baselines::pg::PgLearner;
use midpoint_core::baselines::seq::PpoLearner;
use midpoint_core::eval::{evaluate_success, make_eval_set, EvalReport, EvalTaskSpec, PathPolicy};
use midpoint_core::geometry::{Environment, StatePoint};
use midpoint_core::midpoint::Learner;
use midpoint_core::oracle::{self, Analytic1d};

use crate::checkpoint;
use crate::config::{ConfigError, ExperimentConfig, ResolvedMethod};
use crate::report::{
    compare_text, read_eval_csv, read_pairs_csv, write_eval_csv, write_pairs_csv, TrainLogger,
    COMPARE_KEYS,
};
use crate::svg;

/// Environment variable naming the default output root directory.
pub const OUT_ROOT_VAR: &str = "MIDPOINT_OUT_ROOT";

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

/// Loads a config, applying an optional seed override.
fn load_config(path: &Path, seed: Option<u64>) -> anyhow::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

/// Output directory: the explicit flag, else
/// `$MIDPOINT_OUT_ROOT/<config stem>-seed<seed>`, else
/// `runs/<config stem>-seed<seed>`.
fn resolve_out_dir(
    out: Option<PathBuf>,
    config_path: &Path,
    seed: u64,
) -> anyhow::Result<PathBuf> {
    if let Some(out) = out {
        return Ok(out);
    }
    let stem = config_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("experiment");
    let root = match std::env::var_os(OUT_ROOT_VAR) {
        Some(root) => PathBuf::from(root),
        None => PathBuf::from("runs"),
    };
    Ok(root.join(format!("{stem}-seed{seed}")))
}

fn eval_task_spec(cfg: &ExperimentConfig) -> anyhow::Result<EvalTaskSpec> {
    Ok(EvalTaskSpec {
        segments: cfg.eval_segments()?,
        epsilon: cfg.epsilon,
        pair_count: cfg.eval.pairs,
        seed: cfg.eval.seed,
    })
}

fn eval_meta(cfg: &ExperimentConfig, spec: &EvalTaskSpec, timestep: u64) -> BTreeMap<String, String> {
    BTreeMap::from([
        ("environment".to_string(), cfg.environment.kind.clone()),
        ("method".to_string(), cfg.method.name().to_string()),
        ("seed".to_string(), cfg.seed.to_string()),
        ("eval_seed".to_string(), spec.seed.to_string()),
        ("pairs".to_string(), spec.pair_count.to_string()),
        ("segments".to_string(), spec.segments.to_string()),
        ("epsilon".to_string(), format!("{}", spec.epsilon)),
        ("timestep".to_string(), timestep.to_string()),
    ])
}

fn fmt_f(x: f64) -> String {
    format!("{x}")
}

// ------------------------------------------------------------------ train

pub struct TrainArgs {
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub resume: Option<PathBuf>,
}

/// Shared periodic-evaluation state for the training loops.
struct EvalCadence<'a> {
    env: &'a Environment,
    pairs: &'a [(StatePoint, StatePoint)],
    spec: &'a EvalTaskSpec,
    every: u64,
    next_at: u64,
    last_report: Option<EvalReport>,
}

impl<'a> EvalCadence<'a> {
    fn new(
        env: &'a Environment,
        pairs: &'a [(StatePoint, StatePoint)],
        spec: &'a EvalTaskSpec,
        every: u64,
        resumed_at: u64,
    ) -> Self {
        // After a resume, skip the evaluations that already happened.
        let next_at = (resumed_at / every) * every + if resumed_at % every == 0 { 0 } else { every };
        EvalCadence {
            env,
            pairs,
            spec,
            every,
            next_at,
            last_report: None,
        }
    }

    /// Evaluates when `timestep` crossed the cadence boundary (or when
    /// forced); returns the report for logging.
    fn due<P: PathPolicy>(
        &mut self,
        policy: &P,
        timestep: u64,
        force: bool,
    ) -> anyhow::Result<Option<EvalReport>> {
        if !force && timestep < self.next_at {
            return Ok(None);
        }
        while self.next_at <= timestep {
            self.next_at += self.every;
        }
        let report = evaluate_success(policy, self.env, self.pairs, self.spec, timestep)?;
        self.last_report = Some(report.clone());
        Ok(Some(report))
    }
}

pub fn cmd_train(args: TrainArgs) -> anyhow::Result<()> {
    let cfg = load_config(&args.config, args.seed)?;
    let (env, resolved) = cfg.resolve()?;
    let out = resolve_out_dir(args.out, &args.config, cfg.seed)?;
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("config.toml"), cfg.to_toml_string()?)?;

    let spec = eval_task_spec(&cfg)?;
    let pairs = make_eval_set(&env, &spec)?;
    let mut pair_meta = eval_meta(&cfg, &spec, 0);
    pair_meta.remove("timestep");
    pair_meta.remove("method");
    pair_meta.remove("seed");
    write_pairs_csv(&out.join("reports/pairs.csv"), &pair_meta, &pairs)?;

    let every = cfg.eval_every();
    let last_ckpt = out.join("checkpoints/last.ckpt");
    let final_ckpt = out.join("checkpoints/final.ckpt");
    let log_path = out.join("logs/training.csv");

    let final_report = match resolved {
        ResolvedMethod::Tree(train_cfg) => {
            let mut learner = match &args.resume {
                Some(ckpt) => checkpoint::load_tree(env.clone(), train_cfg, ckpt)?,
                None => Learner::new(env.clone(), train_cfg)?,
            };
            let mut log = TrainLogger::create(
                &log_path,
                &["timestep", "cycles", "depth", "success_rate", "critic_loss", "actor_loss"],
            )?;
            let mut cadence = EvalCadence::new(&env, &pairs, &spec, every, learner.ledger.total());
            while !learner.finished() {
                let stats = learner.run_round()?;
                if let Some(report) = cadence.due(&learner.policy(), stats.timestep, false)? {
                    log.row(&[
                        stats.timestep.to_string(),
                        stats.cycles.to_string(),
                        stats.depth.to_string(),
                        fmt_f(report.success_rate),
                        fmt_f(stats.mean_critic_loss),
                        fmt_f(stats.mean_actor_loss),
                    ])?;
                    checkpoint::save_tree(&learner, &last_ckpt)?;
                }
            }
            let report = cadence
                .due(&learner.policy(), learner.ledger.total(), true)?
                .expect("forced evaluation");
            log.finish()?;
            checkpoint::save_tree(&learner, &final_ckpt)?;
            println!(
                "trained {} on {} for {} timesteps: success rate {:.1}%",
                cfg.method.name(),
                cfg.environment.kind,
                learner.ledger.total(),
                report.success_rate * 100.0
            );
            report
        }
        ResolvedMethod::Seq(ppo_cfg) => {
            let mut learner = match &args.resume {
                Some(ckpt) => checkpoint::load_seq(env.clone(), ppo_cfg, ckpt)?,
                None => PpoLearner::new(env.clone(), ppo_cfg)?,
            };
            let mut log = TrainLogger::create(
                &log_path,
                &["timestep", "episodes", "success_rate", "mean_reward", "policy_loss", "value_loss"],
            )?;
            let mut cadence = EvalCadence::new(&env, &pairs, &spec, every, learner.ledger.total());
            while !learner.finished() {
                let stats = learner.run_round()?;
                if let Some(report) = cadence.due(&learner.policy(), stats.timestep, false)? {
                    log.row(&[
                        stats.timestep.to_string(),
                        stats.episodes.to_string(),
                        fmt_f(report.success_rate),
                        fmt_f(stats.mean_reward),
                        fmt_f(stats.mean_policy_loss),
                        fmt_f(stats.mean_value_loss),
                    ])?;
                    checkpoint::save_seq(&learner, &last_ckpt)?;
                }
            }
            let report = cadence
                .due(&learner.policy(), learner.ledger.total(), true)?
                .expect("forced evaluation");
            log.finish()?;
            checkpoint::save_seq(&learner, &final_ckpt)?;
            println!(
                "trained {} on {} for {} timesteps: success rate {:.1}%",
                cfg.method.name(),
                cfg.environment.kind,
                learner.ledger.total(),
                report.success_rate * 100.0
            );
            report
        }
        ResolvedMethod::Pg(pg_cfg) => {
            let (mut learner, mut completed) = match &args.resume {
                Some(ckpt) => checkpoint::load_pg(env.clone(), pg_cfg, ckpt)?,
                None => (PgLearner::new(env.clone(), pg_cfg)?, 0),
            };
            let mut log = TrainLogger::create(
                &log_path,
                &["timestep", "depth", "cycle", "success_rate", "mean_cost", "loss"],
            )?;
            let mut cadence = EvalCadence::new(&env, &pairs, &spec, every, learner.ledger.total());
            // Flattened (depth, cycle) sequence; `completed` counts
            // finished cycles across depths so a resume can skip them.
            let budgets = learner.config.budgets.clone();
            let mut flat: u64 = 0;
            for (di, &budget) in budgets.iter().enumerate() {
                let depth = di as u32 + 1;
                for cycle in 0..budget {
                    flat += 1;
                    if flat <= completed {
                        continue;
                    }
                    let stats = learner.train_cycle(depth)?;
                    completed = flat;
                    if let Some(report) =
                        cadence.due(&learner.policy(), stats.timestep, false)?
                    {
                        log.row(&[
                            stats.timestep.to_string(),
                            depth.to_string(),
                            cycle.to_string(),
                            fmt_f(report.success_rate),
                            fmt_f(stats.mean_cost),
                            fmt_f(stats.loss),
                        ])?;
                        checkpoint::save_pg(&learner, completed, &last_ckpt)?;
                    }
                }
            }
            let report = cadence
                .due(&learner.policy(), learner.ledger.total(), true)?
                .expect("forced evaluation");
            log.finish()?;
            checkpoint::save_pg(&learner, completed, &final_ckpt)?;
            println!(
                "trained {} on {} for {} timesteps: success rate {:.1}%",
                cfg.method.name(),
                cfg.environment.kind,
                learner.ledger.total(),
                report.success_rate * 100.0
            );
            report
        }
    };

    let meta = eval_meta(&cfg, &spec, final_report.timestep);
    write_eval_csv(&out.join("reports/eval.csv"), &meta, &final_report)?;
    Ok(())
}

// ------------------------------------------------------------------ eval

pub struct EvalArgs {
    pub config: PathBuf,
    pub checkpoint: PathBuf,
    pub pairs: Option<PathBuf>,
    pub depth: Option<u32>,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

/// Loads the method policy from a checkpoint and scores it on the
/// evaluation pair set.
pub fn cmd_eval(args: EvalArgs) -> anyhow::Result<()> {
    let cfg = load_config(&args.config, None)?;
    let (env, resolved) = cfg.resolve()?;
    let mut spec = eval_task_spec(&cfg)?;
    if let Some(depth) = args.depth {
        if depth == 0 || depth >= usize::BITS {
            return Err(config_error("depth must lie in 1..=63"));
        }
        spec.segments = 1usize << depth;
    }
    let pairs = match &args.pairs {
        Some(path) => {
            let (meta, pairs) = read_pairs_csv(path)?;
            if let Some(kind) = meta.get("environment") {
                if kind != &cfg.environment.kind {
                    bail!(
                        "pair file was generated for environment `{kind}`, config uses `{}`",
                        cfg.environment.kind
                    );
                }
            }
            let d = env.rep_dim();
            for (i, (s, g)) in pairs.iter().enumerate() {
                if s.coords.len() != d || g.coords.len() != d {
                    bail!("pair {i} dimension does not match the environment");
                }
            }
            spec.pair_count = pairs.len();
            pairs
        }
        None => make_eval_set(&env, &spec)?,
    };

    let policy = load_policy(&env, resolved, &args.checkpoint)?;
    let total = policy.ledger_total();
    let report = evaluate_success(&policy, &env, &pairs, &spec, total)?;
    let meta = eval_meta(&cfg, &spec, total);

    println!(
        "{} on {}: success rate {:.1}% over {} pairs ({} free-space violations)",
        cfg.method.name(),
        cfg.environment.kind,
        report.success_rate * 100.0,
        pairs.len(),
        report.free_space_violations
    );
    if let Some(out) = &args.out {
        write_eval_csv(out, &meta, &report)?;
    }
    if let Some(svg_path) = &args.svg {
        render_pair_paths(&env, &policy, &pairs, spec.segments, svg_path)?;
    }
    Ok(())
}

/// Boxed deterministic policy loaded from a checkpoint. The learners
/// own their networks, so the box carries the whole learner.
enum LoadedPolicy {
    Tree(Learner),
    Seq(PpoLearner),
    Pg(PgLearner),
}

impl LoadedPolicy {
    fn ledger_total(&self) -> u64 {
        match self {
            LoadedPolicy::Tree(l) => l.ledger.total(),
            LoadedPolicy::Seq(l) => l.ledger.total(),
            LoadedPolicy::Pg(l) => l.ledger.total(),
        }
    }

    fn generate(
        &self,
        env: &Environment,
        s: &StatePoint,
        g: &StatePoint,
        segments: usize,
    ) -> midpoint_core::error::Result<Vec<StatePoint>> {
        match self {
            LoadedPolicy::Tree(l) => l.policy().generate(env, s, g, segments),
            LoadedPolicy::Seq(l) => l.policy().generate(env, s, g, segments),
            LoadedPolicy::Pg(l) => l.policy().generate(env, s, g, segments),
        }
    }
}

impl PathPolicy for LoadedPolicy {
    fn generate(
        &self,
        env: &Environment,
        s: &StatePoint,
        g: &StatePoint,
        segments: usize,
    ) -> midpoint_core::error::Result<Vec<StatePoint>> {
        LoadedPolicy::generate(self, env, s, g, segments)
    }
}

fn load_policy(
    env: &Environment,
    resolved: ResolvedMethod,
    ckpt: &Path,
) -> anyhow::Result<LoadedPolicy> {
    Ok(match resolved {
        ResolvedMethod::Tree(c) => LoadedPolicy::Tree(checkpoint::load_tree(env.clone(), c, ckpt)?),
        ResolvedMethod::Seq(c) => LoadedPolicy::Seq(checkpoint::load_seq(env.clone(), c, ckpt)?),
        ResolvedMethod::Pg(c) => LoadedPolicy::Pg(checkpoint::load_pg(env.clone(), c, ckpt)?.0),
    })
}

/// Renders the generated paths of the first six pairs.
fn render_pair_paths(
    env: &Environment,
    policy: &LoadedPolicy,
    pairs: &[(StatePoint, StatePoint)],
    segments: usize,
    out: &Path,
) -> anyhow::Result<()> {
    let count = pairs.len().min(6);
    let mut paths = Vec::with_capacity(count);
    for (s, g) in &pairs[..count] {
        paths.push(LoadedPolicy::generate(policy, env, s, g, segments)?);
    }
    svg::write_paths(out, env, &paths)
}

// ------------------------------------------------------------------ compare

pub struct CompareArgs {
    pub report_a: PathBuf,
    pub report_b: PathBuf,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

/// Prints the winning-rate table over two evaluation reports on the
/// same pair set.
pub fn cmd_compare(args: CompareArgs) -> anyhow::Result<()> {
    let (meta_a, a) = read_eval_csv(&args.report_a)?;
    let (meta_b, b) = read_eval_csv(&args.report_b)?;
    for key in COMPARE_KEYS {
        if meta_a.get(*key) != meta_b.get(*key) {
            bail!(
                "reports disagree on `{key}` ({} vs {}); they must come from the same pair set",
                meta_a.get(*key).map_or("missing", |v| v),
                meta_b.get(*key).map_or("missing", |v| v),
            );
        }
    }
    if a.successes.len() != b.successes.len() {
        bail!("reports cover different pair counts");
    }
    let name = |meta: &BTreeMap<String, String>, fallback: &str| {
        let method = meta.get("method").cloned().unwrap_or_else(|| fallback.to_string());
        match meta.get("seed") {
            Some(seed) => format!("{method} (seed {seed})"),
            None => method,
        }
    };
    let name_a = name(&meta_a, "policy A");
    let name_b = name(&meta_b, "policy B");
    let text = compare_text(&name_a, &a, &name_b, &b)?;
    print!("{text}");
    if let Some(out) = &args.out {
        if let Some(parent) = out.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(out, &text)?;
    }
    if let Some(csv_path) = &args.csv {
        use midpoint_core::eval::winning_rate;
        let (win_a, joint) = winning_rate(&a, &b)?;
        let (win_b, _) = winning_rate(&b, &a)?;
        let fmt_win = |w: Option<f64>| w.map_or(String::new(), fmt_f);
        let mut text = String::from("policy,success_rate,winning_rate,joint_success_rate\n");
        text.push_str(&format!(
            "{name_a},{},{},{}\n",
            fmt_f(a.success_rate),
            fmt_win(win_a),
            fmt_f(joint / 100.0)
        ));
        text.push_str(&format!(
            "{name_b},{},{},{}\n",
            fmt_f(b.success_rate),
            fmt_win(win_b),
            fmt_f(joint / 100.0)
        ));
        if let Some(parent) = csv_path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(csv_path, text)?;
    }
    Ok(())
}

// ------------------------------------------------------------------ oracle

pub struct OracleArgs {
    /// "analytic1d" (1D slope fixture) or "euclid2d" (flat grid).
    pub fixture: String,
    /// Node count: total nodes for analytic1d, per side for euclid2d.
    pub nodes: Option<usize>,
    pub iters: u32,
    pub tolerance: Option<f64>,
    pub out: Option<PathBuf>,
    pub trajectory: Option<PathBuf>,
}

/// Runs the finite-set midpoint iteration against an exact reference
/// and reports convergence as JSON (plus an optional CSV trajectory).
pub fn cmd_oracle(args: OracleArgs) -> anyhow::Result<()> {
    let (fixture, table, reference, tolerance) = match args.fixture.as_str() {
        "analytic1d" => {
            let n = args.nodes.unwrap_or(129);
            let table = Analytic1d::table(n)?;
            let reference = Analytic1d::reference(n);
            (args.fixture.clone(), table, reference, args.tolerance.unwrap_or(0.03))
        }
        "euclid2d" => {
            let side = args.nodes.unwrap_or(17);
            if side < 2 {
                return Err(config_error("euclid2d grid needs at least 2 nodes per side"));
            }
            let env = Environment::euclid2d_free();
            let mut nodes = Vec::with_capacity(side * side);
            for yi in 0..side {
                for xi in 0..side {
                    nodes.push(StatePoint {
                        coords: vec![
                            -1.0 + 2.0 * xi as f64 / (side - 1) as f64,
                            -1.0 + 2.0 * yi as f64 / (side - 1) as f64,
                        ],
                    });
                }
            }
            let mut reference = Vec::with_capacity(nodes.len() * nodes.len());
            for a in &nodes {
                for b in &nodes {
                    let dx = a.coords[0] - b.coords[0];
                    let dy = a.coords[1] - b.coords[1];
                    reference.push((dx * dx + dy * dy).sqrt());
                }
            }
            let costs: Vec<f64> = {
                let mut all = Vec::with_capacity(nodes.len() * nodes.len());
                for a in &nodes {
                    for b in &nodes {
                        all.push(env.local_cost(a, b)?);
                    }
                }
                all
            };
            let n = nodes.len();
            let table = oracle::vi_init(nodes, |a, b| {
                // Index into the precomputed cost matrix to avoid
                // recomputing inside the closure.
                let ia = ((a.coords[1] + 1.0) / 2.0 * (side - 1) as f64).round() as usize * side
                    + ((a.coords[0] + 1.0) / 2.0 * (side - 1) as f64).round() as usize;
                let ib = ((b.coords[1] + 1.0) / 2.0 * (side - 1) as f64).round() as usize * side
                    + ((b.coords[0] + 1.0) / 2.0 * (side - 1) as f64).round() as usize;
                costs[ia * n + ib]
            })?;
            (args.fixture.clone(), table, reference, args.tolerance.unwrap_or(1e-9))
        }
        other => {
            return Err(config_error(format!(
                "unknown oracle fixture `{other}` (use analytic1d or euclid2d)"
            )));
        }
    };

    let n = table.len();
    let (table, report) = oracle::vi_converge(table, args.iters, &reference)?;
    // Fixture-specific pass criterion: endpoint distance error for the
    // 1D slope fixture, stationarity of the iteration for the flat grid.
    let endpoint_rel_err = {
        let exact = reference[n - 1];
        (table.value(0, n - 1) - exact).abs() / exact.abs().max(1e-12)
    };
    let pass = match fixture.as_str() {
        "analytic1d" => endpoint_rel_err < tolerance,
        _ => {
            report.reached_fixed_point
                || report
                    .trajectory
                    .last()
                    .is_some_and(|s| s.max_rel_change < tolerance.max(1e-10))
        }
    };

    let mut json = String::new();
    json.push_str("{\n");
    json.push_str(&format!("  \"fixture\": \"{fixture}\",\n"));
    json.push_str(&format!("  \"nodes\": {n},\n"));
    json.push_str(&format!(
        "  \"iterations_run\": {},\n",
        report.trajectory.len() - 1
    ));
    json.push_str(&format!(
        "  \"reached_fixed_point\": {},\n",
        report.reached_fixed_point
    ));
    json.push_str(&format!("  \"max_rel_err\": {},\n", fmt_f(report.final_max_rel_err)));
    json.push_str(&format!("  \"mean_rel_err\": {},\n", fmt_f(report.final_mean_rel_err)));
    json.push_str(&format!("  \"endpoint_rel_err\": {},\n", fmt_f(endpoint_rel_err)));
    json.push_str(&format!("  \"tolerance\": {},\n", fmt_f(tolerance)));
    json.push_str(&format!("  \"pass\": {pass}\n"));
    json.push_str("}\n");
    print!("{json}");
    if let Some(out) = &args.out {
        if let Some(parent) = out.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(out, &json)?;
    }
    if let Some(traj_path) = &args.trajectory {
        let mut text = String::from("iteration,max_rel_change,max_rel_err,mean_rel_err\n");
        for s in &report.trajectory {
            text.push_str(&format!(
                "{},{},{},{}\n",
                s.iteration,
                fmt_f(s.max_rel_change),
                fmt_f(s.max_rel_err),
                fmt_f(s.mean_rel_err)
            ));
        }
        if let Some(parent) = traj_path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(traj_path, text)?;
    }
    if !pass {
        bail!("oracle fixture `{fixture}` failed its tolerance check");
    }
    Ok(())
}

// ------------------------------------------------------------------ plot

pub struct PlotArgs {
    pub config: PathBuf,
    pub checkpoint: PathBuf,
    pub pairs: Option<PathBuf>,
    pub count: usize,
    pub depth: Option<u32>,
    pub out: PathBuf,
}

/// Renders generated paths for a planar environment as SVG.
pub fn cmd_plot(args: PlotArgs) -> anyhow::Result<()> {
    let cfg = load_config(&args.config, None)?;
    let (env, resolved) = cfg.resolve()?;
    let mut spec = eval_task_spec(&cfg)?;
    if let Some(depth) = args.depth {
        if depth == 0 || depth >= usize::BITS {
            return Err(config_error("depth must lie in 1..=63"));
        }
        spec.segments = 1usize << depth;
    }
    let pairs = match &args.pairs {
        Some(path) => read_pairs_csv(path)?.1,
        None => make_eval_set(&env, &spec)?,
    };
    if args.count == 0 {
        return Err(config_error("plot needs at least one pair"));
    }
    let count = args.count.min(pairs.len());
    let policy = load_policy(&env, resolved, &args.checkpoint)?;
    let mut paths = Vec::with_capacity(count);
    for (s, g) in &pairs[..count] {
        paths.push(LoadedPolicy::generate(&policy, &env, s, g, spec.segments)?);
    }
    svg::write_paths(&args.out, &env, &paths)?;
    println!(
        "wrote {} path(s) of {} segments to {}",
        count,
        spec.segments,
        args.out.display()
    );
    Ok(())
}

// ------------------------------------------------------------------ pairs

pub struct PairsArgs {
    pub config: PathBuf,
    pub out: PathBuf,
}

/// Generates and persists the fixed evaluation pair set of a config.
pub fn cmd_pairs(args: PairsArgs) -> anyhow::Result<()> {
    let cfg = load_config(&args.config, None)?;
    let (env, _) = cfg.resolve()?;
    let spec = eval_task_spec(&cfg)?;
    let pairs = make_eval_set(&env, &spec)?;
    let mut meta = eval_meta(&cfg, &spec, 0);
    meta.remove("timestep");
    meta.remove("method");
    meta.remove("seed");
    write_pairs_csv(&args.out, &meta, &pairs)?;
    println!("wrote {} pairs to {}", pairs.len(), args.out.display());
    Ok(())
}
