use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use radar_core::ants::{
    run_colony, run_colony_traced, AlphaDistribution, Boundary, ColonyConfig, FieldParams,
    ForagingStats, SeedPile, TraceRow, World,
};
use radar_core::experiments::{apply_override, effective_params, list_experiments, run_experiment};
use radar_core::immune::{
    des_scaling, scaling_exponents, ArchitectureConstants, DesRunRow, ImmuneSimConfig,
};
use radar_core::scaling::{integrate_growth, loglog_fit, GrowthParams, RegressionResult};
use radar_core::smallworld::{delivery_scaling, DegreePolicy, SizeStats, Topology};
use radar_core::{read_two_column_csv, write_csv, write_trajectory, Error};

use crate::args::{AntsMode, CliConfig, Command, GrowthMode, ImmuneMode, SmallworldMode};

/// A failed invocation: exit code plus message for standard error.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Self { code: 3, message: message.into() }
    }
}

/// Configuration-phase errors are usage problems (2); everything after a
/// validated configuration is an execution failure (3).
fn config_err(e: Error) -> Failure {
    Failure::usage(e.to_string())
}

fn run_err(e: Error) -> Failure {
    match e {
        Error::Config(_) | Error::UnknownExperiment(_) | Error::Domain(_) => {
            Failure::usage(e.to_string())
        }
        _ => Failure::runtime(e.to_string()),
    }
}

/// Dispatch a parsed invocation; returns the process exit code.
pub fn execute(cfg: &CliConfig) -> Result<u8, Failure> {
    let mut overrides = Vec::new();
    if let Some(path) = &cfg.config_path {
        overrides.extend(load_config_file(path)?);
    }
    overrides.extend(cfg.overrides.iter().cloned());

    match &cfg.command {
        Command::List => {
            for (name, description) in list_experiments() {
                println!("{name} — {description}");
            }
            Ok(0)
        }
        Command::Run { experiment } => run_registered(experiment, &overrides, cfg),
        Command::Immune { mode: ImmuneMode::Optimize } => immune_optimize(&overrides, cfg),
        Command::Immune { mode: ImmuneMode::Des } => immune_des(&overrides, cfg),
        Command::Ants { mode: AntsMode::Run } => ants_run(&overrides, cfg),
        Command::Smallworld { mode: SmallworldMode::Run } => smallworld_run(&overrides, cfg),
        Command::Growth { mode: GrowthMode::Run } => growth_run(&overrides, cfg),
        Command::Fit { csv } => fit_csv(csv),
    }
}

/// Flatten a JSON config file into dotted-path overrides.
fn load_config_file(path: &Path) -> Result<Vec<(String, Value)>, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
    let tree: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    if !tree.is_object() {
        return Err(Failure::usage(format!("config {} must be a JSON object", path.display())));
    }
    let mut out = Vec::new();
    flatten_tree("", &tree, &mut out);
    Ok(out)
}

fn flatten_tree(prefix: &str, value: &Value, out: &mut Vec<(String, Value)>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten_tree(&path, v, out);
            }
        }
        leaf => out.push((prefix.to_string(), leaf.clone())),
    }
}

fn run_registered(
    name: &str,
    overrides: &[(String, Value)],
    cfg: &CliConfig,
) -> Result<u8, Failure> {
    if cfg.verbosity >= 1 {
        let params = effective_params(name, overrides).map_err(run_err)?;
        println!("parameters: {}", serde_json::to_string_pretty(&params).unwrap());
    }
    let report =
        run_experiment(name, overrides, cfg.seed, &cfg.output_dir).map_err(run_err)?;
    for outcome in &report.outcomes {
        println!("{}", outcome.report_line());
    }
    let passed = report.outcomes.iter().filter(|o| o.passed).count();
    println!(
        "experiment {name}: {} ({passed}/{} expectations)",
        if report.passed { "PASS" } else { "FAIL" },
        report.outcomes.len()
    );
    Ok(u8::from(!report.passed))
}

/// Build a namespaced parameter tree, apply overrides, deserialize.
fn resolve_params<P>(section: &str, defaults: &P, overrides: &[(String, Value)], verbosity: u8) -> Result<P, Failure>
where
    P: Serialize + for<'de> Deserialize<'de>,
{
    let mut tree = serde_json::json!({ section: serde_json::to_value(defaults).unwrap() });
    for (path, value) in overrides {
        apply_override(&mut tree, path, value.clone()).map_err(config_err)?;
    }
    if verbosity >= 1 {
        println!("parameters: {}", serde_json::to_string_pretty(&tree).unwrap());
    }
    serde_json::from_value(tree[section].clone())
        .map_err(|e| Failure::usage(format!("invalid {section} parameters: {e}")))
}

fn logspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count <= 1 {
        return vec![min];
    }
    let l0 = min.log10();
    let l1 = max.log10();
    (0..count)
        .map(|i| 10f64.powf(l0 + (l1 - l0) * i as f64 / (count - 1) as f64))
        .collect()
}

const SCALING_CSV_HEADER: &str = "quantity,slope,stderr,r2,p_value";

fn scaling_row(quantity: &str, r: &RegressionResult<f64>) -> String {
    let p = r.p_value.map(|p| p.to_string()).unwrap_or_default();
    format!("{},{},{},{},{}", quantity, r.slope, r.slope_stderr, r.r_squared, p)
}

// ───────────────────────── immune ─────────────────────────

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImmuneOptimizeParams {
    detect_coeff: f64,
    comm_coeff: f64,
    m_min: f64,
    m_max: f64,
    m_count: usize,
    seed: u64,
}

impl Default for ImmuneOptimizeParams {
    fn default() -> Self {
        Self { detect_coeff: 1.0, comm_coeff: 1.0, m_min: 1.0, m_max: 1e6, m_count: 7, seed: 42 }
    }
}

fn immune_optimize(overrides: &[(String, Value)], cfg: &CliConfig) -> Result<u8, Failure> {
    let p: ImmuneOptimizeParams =
        resolve_params("immune", &ImmuneOptimizeParams::default(), overrides, cfg.verbosity)?;
    let seed = cfg.seed.unwrap_or(p.seed);
    let consts =
        ArchitectureConstants::new(p.detect_coeff, p.comm_coeff).map_err(config_err)?;
    let sizes = logspace(p.m_min, p.m_max, p.m_count);
    let exps = scaling_exponents(&consts, &sizes).map_err(run_err)?;

    let dir = cfg.output_dir.join("immune-optimize");
    let rows: Vec<String> = exps
        .optima
        .iter()
        .map(|&(m, o)| {
            DesRunRow {
                system_size: m,
                module_volume: o.module_volume,
                module_count: o.module_count,
                detect: o.times.detect,
                comm: o.times.comm,
                total: o.times.total,
                seed,
            }
            .to_csv()
        })
        .collect();
    write_csv(&dir.join("optima.csv"), DesRunRow::csv_header(), rows).map_err(run_err)?;
    write_csv(
        &dir.join("scaling.csv"),
        SCALING_CSV_HEADER,
        [
            scaling_row("volume_vs_size", &exps.volume),
            scaling_row("count_vs_size", &exps.count),
            scaling_row("total_time_vs_size", &exps.total_time),
        ],
    )
    .map_err(run_err)?;

    println!("volume slope {}", exps.volume.slope);
    println!("count slope {}", exps.count.slope);
    println!("total time slope {}", exps.total_time.slope);
    println!("wrote {}", dir.display());
    Ok(0)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImmuneDesCliParams {
    kappa: f64,
    rho: f64,
    eta: f64,
    crawl_speed: f64,
    inoculum: f64,
    doubling_rate: f64,
    m_min: f64,
    m_max: f64,
    m_count: usize,
    replicates: usize,
    seed: u64,
}

impl Default for ImmuneDesCliParams {
    fn default() -> Self {
        Self {
            kappa: 50.0,
            rho: 1.0,
            eta: 1.0,
            crawl_speed: 1.0,
            inoculum: 1e5,
            doubling_rate: 2.0,
            m_min: 1e2,
            m_max: 1e6,
            m_count: 5,
            replicates: 64,
            seed: 42,
        }
    }
}

fn immune_des(overrides: &[(String, Value)], cfg: &CliConfig) -> Result<u8, Failure> {
    let p: ImmuneDesCliParams =
        resolve_params("immune", &ImmuneDesCliParams::default(), overrides, cfg.verbosity)?;
    let seed = cfg.seed.unwrap_or(p.seed);
    let detect_coeff = 0.75 * (3.0 / (4.0 * std::f64::consts::PI)).cbrt() / p.crawl_speed;
    let comm_coeff = p.kappa / (p.rho * p.eta);
    let consts = ArchitectureConstants::new(detect_coeff, comm_coeff).map_err(config_err)?;
    let template = ImmuneSimConfig {
        system_size: p.m_min,
        module_volume: 1.0,
        crawl_speed: p.crawl_speed,
        cell_density: p.rho,
        demand_per_mass: p.kappa,
        contact_rate: p.eta,
        inoculum: p.inoculum,
        doubling_rate: p.doubling_rate,
        rng_seed: seed,
    };
    template.validate().map_err(config_err)?;

    let sizes = logspace(p.m_min, p.m_max, p.m_count);
    let result = des_scaling(&consts, &template, &sizes, p.replicates).map_err(run_err)?;

    let dir = cfg.output_dir.join("immune-des");
    write_csv(&dir.join("runs.csv"), DesRunRow::csv_header(), result.rows.iter().map(DesRunRow::to_csv))
        .map_err(run_err)?;
    write_csv(
        &dir.join("scaling.csv"),
        SCALING_CSV_HEADER,
        [
            scaling_row("detection_vs_size", &result.detection),
            scaling_row("recruitment_vs_size", &result.recruitment),
            scaling_row("total_vs_size", &result.total),
        ],
    )
    .map_err(run_err)?;

    println!("detection slope {}", result.detection.slope);
    println!("recruitment slope {}", result.recruitment.slope);
    println!("total slope {}", result.total.slope);
    println!("wrote {}", dir.display());
    Ok(0)
}

// ───────────────────────── ants ─────────────────────────

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AntsCliParams {
    width: usize,
    height: usize,
    torus: bool,
    pile_distance: usize,
    pile_count: u64,
    n_ants: usize,
    alpha: f64,
    activation_threshold: f64,
    base_leave_prob: f64,
    epsilon: f64,
    decay_lambda: f64,
    deposit_q: f64,
    max_ticks: u64,
    replicates: usize,
    trace: bool,
    seed: u64,
}

impl Default for AntsCliParams {
    fn default() -> Self {
        Self {
            width: 31,
            height: 31,
            torus: false,
            pile_distance: 8,
            pile_count: 400,
            n_ants: 30,
            alpha: 2.0,
            activation_threshold: 0.0,
            base_leave_prob: 0.01,
            epsilon: 0.1,
            decay_lambda: 0.02,
            deposit_q: 1.0,
            max_ticks: 1500,
            replicates: 5,
            trace: false,
            seed: 42,
        }
    }
}

fn ants_run(overrides: &[(String, Value)], cfg: &CliConfig) -> Result<u8, Failure> {
    let p: AntsCliParams =
        resolve_params("ants", &AntsCliParams::default(), overrides, cfg.verbosity)?;
    let seed = cfg.seed.unwrap_or(p.seed);
    if p.pile_distance == 0 || p.pile_distance > p.width / 2 {
        return Err(Failure::usage("pile distance must fit inside the world"));
    }
    let nest = (p.width / 2, p.height / 2);
    let boundary = if p.torus { Boundary::Torus } else { Boundary::Bounded };
    let world = World::new(
        p.width,
        p.height,
        boundary,
        nest,
        vec![
            SeedPile { cell: (nest.0 - p.pile_distance, nest.1), count: p.pile_count },
            SeedPile { cell: (nest.0 + p.pile_distance, nest.1), count: p.pile_count },
        ],
    )
    .map_err(config_err)?;
    let field = FieldParams::new(p.decay_lambda, p.deposit_q).map_err(config_err)?;

    let dir = cfg.output_dir.join("ants-run");
    let mut rows = Vec::with_capacity(p.replicates);
    let mut collected_total = 0u64;
    for rep in 0..p.replicates {
        let run_seed = seed + rep as u64;
        let mut config = ColonyConfig::new(
            p.n_ants,
            AlphaDistribution::Constant(p.alpha),
            p.activation_threshold,
            run_seed,
            p.max_ticks,
        )
        .map_err(config_err)?;
        config.base_leave_prob = p.base_leave_prob;
        config.epsilon = p.epsilon;
        let stats = if p.trace && rep == 0 {
            let (stats, trace) =
                run_colony_traced(world.clone(), field, config).map_err(run_err)?;
            write_csv(&dir.join("trace.csv"), TraceRow::csv_header(), trace.iter().map(TraceRow::to_csv))
                .map_err(run_err)?;
            stats
        } else {
            run_colony(world.clone(), field, config).map_err(run_err)?
        };
        collected_total += stats.seeds_collected;
        rows.push(stats.to_csv(p.n_ants, rep, run_seed));
    }
    write_csv(&dir.join("stats.csv"), ForagingStats::csv_header(), rows).map_err(run_err)?;

    println!(
        "mean seeds collected {}",
        collected_total as f64 / p.replicates.max(1) as f64
    );
    println!("wrote {}", dir.display());
    Ok(0)
}

// ───────────────────────── smallworld ─────────────────────────

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SmallworldCliParams {
    topology: String,
    sizes: Vec<usize>,
    policy: String,
    degree_coeff: f64,
    constant_k: usize,
    r_exponent: f64,
    trials: usize,
    seed: u64,
}

impl Default for SmallworldCliParams {
    fn default() -> Self {
        Self {
            topology: "torus".into(),
            sizes: vec![1 << 10, 1 << 12, 1 << 14],
            policy: "log2".into(),
            degree_coeff: 1.0,
            constant_k: 1,
            r_exponent: 2.0,
            trials: 500,
            seed: 42,
        }
    }
}

fn smallworld_run(overrides: &[(String, Value)], cfg: &CliConfig) -> Result<u8, Failure> {
    let p: SmallworldCliParams =
        resolve_params("smallworld", &SmallworldCliParams::default(), overrides, cfg.verbosity)?;
    let seed = cfg.seed.unwrap_or(p.seed);
    let topology = match p.topology.as_str() {
        "ring" => Topology::Ring,
        "torus" => Topology::Torus,
        other => return Err(Failure::usage(format!("unknown topology {other:?} (ring|torus)"))),
    };
    let policy = match p.policy.as_str() {
        "constant" => DegreePolicy::Constant(p.constant_k),
        "logn" => DegreePolicy::LogN(p.degree_coeff),
        "log2" => DegreePolicy::LogSquared(p.degree_coeff),
        other => {
            return Err(Failure::usage(format!("unknown policy {other:?} (constant|logn|log2)")))
        }
    };
    let result = delivery_scaling(topology, &p.sizes, &policy, p.r_exponent, p.trials, seed)
        .map_err(run_err)?;

    let dir = cfg.output_dir.join("smallworld-run");
    write_csv(
        &dir.join("results.csv"),
        SizeStats::csv_header(),
        result.per_size.iter().map(|s| s.to_csv(&policy)),
    )
    .map_err(run_err)?;
    write_csv(
        &dir.join("scaling.csv"),
        SCALING_CSV_HEADER,
        [
            scaling_row("hops_vs_ln_n", &result.fit_ln),
            scaling_row("hops_vs_ln_n_squared", &result.fit_ln_squared),
        ],
    )
    .map_err(run_err)?;

    println!("fit vs ln n: r2 {}", result.fit_ln.r_squared);
    println!("fit vs (ln n)^2: r2 {}", result.fit_ln_squared.r_squared);
    println!("wrote {}", dir.display());
    Ok(0)
}

// ───────────────────────── growth ─────────────────────────

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GrowthCliParams {
    a: f64,
    b: f64,
    p: f64,
    m0: f64,
    t_end: f64,
    dt: f64,
}

impl Default for GrowthCliParams {
    fn default() -> Self {
        Self { a: 1.0, b: 0.5, p: 0.75, m0: 1.0, t_end: 80.0, dt: 0.01 }
    }
}

fn growth_run(overrides: &[(String, Value)], cfg: &CliConfig) -> Result<u8, Failure> {
    let p: GrowthCliParams =
        resolve_params("growth", &GrowthCliParams::default(), overrides, cfg.verbosity)?;
    let params = GrowthParams::new(p.a, p.b, p.p, p.m0).map_err(config_err)?;
    let trajectory = integrate_growth(&params, p.t_end, p.dt).map_err(run_err)?;
    let dir = cfg.output_dir.join("growth-run");
    write_trajectory(&dir.join("trajectory.csv"), &trajectory).map_err(run_err)?;
    println!("final mass {}", trajectory.last().unwrap().1);
    println!("asymptotic mass {}", radar_core::scaling::asymptotic_mass(&params));
    println!("wrote {}", dir.display());
    Ok(0)
}

// ───────────────────────── fit ─────────────────────────

fn fit_csv(path: &Path) -> Result<u8, Failure> {
    // everything here is a data problem, not a usage problem
    let points = read_two_column_csv(path).map_err(|e| Failure::runtime(e.to_string()))?;
    let fit = loglog_fit(&points).map_err(|e| Failure::runtime(e.to_string()))?;
    println!("slope {}", fit.slope);
    println!("intercept {}", fit.intercept);
    println!("r_squared {}", fit.r_squared);
    println!("slope_stderr {}", fit.slope_stderr);
    println!(
        "p_value {}",
        fit.p_value.map(|p| p.to_string()).unwrap_or_else(|| "undefined".into())
    );
    println!("n_points {}", fit.n_points);
    Ok(0)
}
