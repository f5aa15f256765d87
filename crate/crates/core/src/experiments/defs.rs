use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ants::{
    run_colony, AlphaDistribution, Boundary, ColonyConfig, FieldParams, ForagingStats, SeedPile,
    World,
};
use crate::csvio::write_csv;
use crate::error::{Error, Result};
use crate::immune::{
    des_run, des_scaling, des_volume_sweep, module_radius, optimize_architecture,
    scaling_exponents, stationary_volume, ArchitectureConstants, DesRunRow, ImmuneSimConfig,
};
use crate::scaling::{
    city_growth, growth_analytic, integrate_growth, CityGrowthParams, GrowthParams,
    RegressionResult,
};
use crate::smallworld::{
    build_graph, delivery_scaling, mean_hops, DegreePolicy, SizeStats, Topology,
};

use super::plot::{emit_plot, AxesSpec, Series};
use super::{ExpectedValue, ExperimentDef, Provenance, RunOutput};

pub(crate) fn registry() -> &'static [ExperimentDef] {
    static REGISTRY: OnceLock<Vec<ExperimentDef>> = OnceLock::new();
    REGISTRY.get_or_init(|| {
        let mut defs = vec![
            ExperimentDef {
                name: "ant-percapita",
                description: "per-capita foraging rate stays flat across colony sizes",
                seed_base: 601,
                default_params: ant_percapita_defaults,
                expected: ant_percapita_expected,
                run: run_ant_percapita,
            },
            ExperimentDef {
                name: "ant-symmetry",
                description: "pheromone feedback concentrates trips on one of two equal piles",
                seed_base: 501,
                default_params: ant_symmetry_defaults,
                expected: ant_symmetry_expected,
                run: run_ant_symmetry,
            },
            ExperimentDef {
                name: "city-blowup",
                description: "superlinear growth diverges in finite, step-stable time",
                seed_base: 201,
                default_params: city_blowup_defaults,
                expected: city_blowup_expected,
                run: run_city_blowup,
            },
            ExperimentDef {
                name: "growth-asymptote",
                description: "sublinear growth saturates at (a/b)^4, matching the closed form",
                seed_base: 101,
                default_params: growth_defaults,
                expected: growth_expected,
                run: run_growth,
            },
            ExperimentDef {
                name: "immune-des",
                description: "simulated detect/recruit times reproduce the closed-form slopes",
                seed_base: 401,
                default_params: immune_des_defaults,
                expected: immune_des_expected,
                run: run_immune_des,
            },
            ExperimentDef {
                name: "immune-exponents",
                description: "optimal module sizing yields the 3/7, 4/7, and 1/7 scaling slopes",
                seed_base: 301,
                default_params: immune_exponents_defaults,
                expected: immune_exponents_expected,
                run: run_immune_exponents,
            },
            ExperimentDef {
                name: "smallworld-densify",
                description: "densified out-degree turns greedy delivery logarithmic",
                seed_base: 701,
                default_params: smallworld_defaults,
                expected: smallworld_expected,
                run: run_smallworld,
            },
        ];
        defs.sort_by_key(|d| d.name);
        defs
    })
}

fn parse_params<P: for<'de> Deserialize<'de>>(params: &Value) -> Result<P> {
    serde_json::from_value(params.clone())
        .map_err(|e| Error::Config(format!("invalid parameters: {e}")))
}

fn to_value<P: Serialize>(p: &P) -> Value {
    serde_json::to_value(p).expect("parameter structs serialize")
}

fn logspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![min];
    }
    let l0 = min.log10();
    let l1 = max.log10();
    (0..count)
        .map(|i| 10f64.powf(l0 + (l1 - l0) * i as f64 / (count - 1) as f64))
        .collect()
}

fn scaling_report_rows(entries: &[(&str, &RegressionResult<f64>)]) -> Vec<String> {
    entries
        .iter()
        .map(|(q, r)| {
            let p = r.p_value.map(|p| p.to_string()).unwrap_or_default();
            format!("{},{},{},{},{}", q, r.slope, r.slope_stderr, r.r_squared, p)
        })
        .collect()
}

const SCALING_CSV_HEADER: &str = "quantity,slope,stderr,r2,p_value";

// ───────────────────────── growth-asymptote ─────────────────────────

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GrowthExpParams {
    a: f64,
    b: f64,
    p: f64,
    m0: f64,
    t_end: f64,
    dt: f64,
}

impl Default for GrowthExpParams {
    fn default() -> Self {
        Self { a: 1.0, b: 0.5, p: 0.75, m0: 1.0, t_end: 80.0, dt: 0.01 }
    }
}

fn growth_defaults() -> Value {
    to_value(&GrowthExpParams::default())
}

fn growth_expected() -> Vec<ExpectedValue> {
    vec![
        ExpectedValue::within("final_mass", 16.0, 0.016, Provenance::Paper),
        ExpectedValue::within("rk4_vs_analytic_max_rel_err", 0.0, 1e-6, Provenance::Derived),
    ]
}

fn run_growth(params: &Value, _seed: u64, dir: &Path) -> Result<RunOutput> {
    let p: GrowthExpParams = parse_params(params)?;
    let growth = GrowthParams::new(p.a, p.b, p.p, p.m0)?;
    let trajectory = integrate_growth(&growth, p.t_end, p.dt)?;
    let asymptote = crate::scaling::asymptotic_mass(&growth);
    let final_mass = trajectory.last().unwrap().1;

    // closed form only exists at p = 3/4; cross-validate there
    let stride = (trajectory.len() / 100).max(1);
    let mut max_rel_err = 0.0f64;
    let mut analytic_series = Vec::new();
    for &(t, m) in trajectory.iter().step_by(stride) {
        let exact = growth_analytic(&growth, t)?;
        if exact > 0.0 {
            max_rel_err = max_rel_err.max(((m - exact) / exact).abs());
        }
        analytic_series.push((t, exact));
    }

    let csv = dir.join("trajectory.csv");
    crate::csvio::write_trajectory(&csv, &trajectory)?;
    let svg = dir.join("growth.svg");
    emit_plot(
        &[
            Series::new("integrated", trajectory.iter().step_by(stride).copied().collect()),
            Series::new("closed form", analytic_series),
        ],
        &AxesSpec::linear("growth toward the asymptote", "t", "mass"),
        &svg,
    )?;

    let outcomes = vec![
        ExpectedValue::within("final_mass", asymptote, 0.001 * asymptote, Provenance::Paper)
            .evaluate(final_mass),
        ExpectedValue::within("rk4_vs_analytic_max_rel_err", 0.0, 1e-6, Provenance::Derived)
            .evaluate(max_rel_err),
    ];
    Ok(RunOutput { outcomes, outputs: vec![csv, svg] })
}

// ───────────────────────── city-blowup ─────────────────────────

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CityBlowupParams {
    a: f64,
    b: f64,
    gamma: f64,
    n0: f64,
    t_end: f64,
    dt: f64,
    refinement: usize,
}

impl Default for CityBlowupParams {
    fn default() -> Self {
        Self { a: 1.0, b: 0.1, gamma: 1.2, n0: 10.0, t_end: 50.0, dt: 0.01, refinement: 10 }
    }
}

fn city_blowup_defaults() -> Value {
    to_value(&CityBlowupParams::default())
}

fn city_blowup_expected() -> Vec<ExpectedValue> {
    vec![
        ExpectedValue::within("blowup_detected", 1.0, 0.0, Provenance::Property),
        ExpectedValue::within("blowup_time_refinement_rel_err", 0.0, 0.01, Provenance::Derived),
    ]
}

fn run_city_blowup(params: &Value, _seed: u64, dir: &Path) -> Result<RunOutput> {
    let p: CityBlowupParams = parse_params(params)?;
    if p.refinement < 2 {
        return Err(Error::Config("refinement factor must be at least 2".into()));
    }
    let city = CityGrowthParams::new(p.a, p.b, p.gamma, p.n0)?;
    let coarse = city_growth(&city, p.t_end, p.dt, None)?;
    let fine = city_growth(&city, p.t_end, p.dt / p.refinement as f64, None)?;

    let detected = coarse.blow_up.is_some() && fine.blow_up.is_some();
    let rel_err = match (coarse.blow_up, fine.blow_up) {
        (Some(tc), Some(tf)) => ((tc - tf) / tf).abs(),
        _ => f64::INFINITY,
    };

    let csv = dir.join("trajectory.csv");
    crate::csvio::write_trajectory(&csv, &coarse.trajectory)?;
    let svg = dir.join("city.svg");
    let mut axes = AxesSpec::linear("superlinear growth toward blow-up", "t", "n");
    axes.log_y = true;
    emit_plot(&[Series::new("n(t)", coarse.trajectory.clone())], &axes, &svg)?;

    let outcomes = vec![
        ExpectedValue::within("blowup_detected", 1.0, 0.0, Provenance::Property)
            .evaluate(if detected { 1.0 } else { 0.0 }),
        ExpectedValue::within("blowup_time_refinement_rel_err", 0.0, 0.01, Provenance::Derived)
            .evaluate(rel_err),
    ];
    Ok(RunOutput { outcomes, outputs: vec![csv, svg] })
}

// ───────────────────────── immune-exponents ─────────────────────────

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImmuneExponentsParams {
    detect_coeff: f64,
    comm_coeff: f64,
    m_min: f64,
    m_max: f64,
    m_count: usize,
    random_triples: usize,
}

impl Default for ImmuneExponentsParams {
    fn default() -> Self {
        Self {
            detect_coeff: 1.0,
            comm_coeff: 1.0,
            m_min: 1.0,
            m_max: 1e6,
            m_count: 7,
            random_triples: 10,
        }
    }
}

fn immune_exponents_defaults() -> Value {
    to_value(&ImmuneExponentsParams::default())
}

fn immune_exponents_expected() -> Vec<ExpectedValue> {
    vec![
        ExpectedValue::within("total_time_slope", 1.0 / 7.0, 1e-6, Provenance::Paper),
        ExpectedValue::within("volume_plus_count_slope", 1.0, 1e-9, Provenance::Property),
        ExpectedValue::within("volume_slope", 3.0 / 7.0, 1e-6, Provenance::Derived),
        ExpectedValue::within("optimizer_max_rel_err", 0.0, 1e-9, Provenance::Derived),
    ]
}

fn run_immune_exponents(params: &Value, seed: u64, dir: &Path) -> Result<RunOutput> {
    use rand::{Rng, SeedableRng};
    let p: ImmuneExponentsParams = parse_params(params)?;
    if p.m_count < 3 {
        return Err(Error::Config("need at least 3 system sizes".into()));
    }
    let consts = ArchitectureConstants::new(p.detect_coeff, p.comm_coeff)?;
    let sizes = logspace(p.m_min, p.m_max, p.m_count);
    let exps = scaling_exponents(&consts, &sizes)?;

    // numeric minimizer vs algebraic stationarity root on random triples
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel_err = 0.0f64;
    for _ in 0..p.random_triples.max(1) {
        let a = 10f64.powf(rng.random_range(-1.0..1.0));
        let b = 10f64.powf(rng.random_range(-1.0..1.0));
        let m = 10f64.powf(rng.random_range(0.0..6.0));
        let c = ArchitectureConstants::new(a, b)?;
        let numeric = optimize_architecture(&c, m)?.module_volume;
        let exact = stationary_volume(&c, m)?;
        max_rel_err = max_rel_err.max(((numeric - exact) / exact).abs());
    }

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
    let csv = dir.join("optima.csv");
    write_csv(&csv, DesRunRow::csv_header(), rows)?;

    let scaling_csv = dir.join("scaling.csv");
    write_csv(
        &scaling_csv,
        SCALING_CSV_HEADER,
        scaling_report_rows(&[
            ("volume_vs_size", &exps.volume),
            ("count_vs_size", &exps.count),
            ("total_time_vs_size", &exps.total_time),
        ]),
    )?;

    let svg = dir.join("volume_vs_size.svg");
    emit_plot(
        &[
            Series::new(
                "optimal module volume",
                exps.optima.iter().map(|&(m, o)| (m, o.module_volume)).collect(),
            ),
            Series::new("total time", exps.optima.iter().map(|&(m, o)| (m, o.times.total)).collect()),
        ],
        &AxesSpec::loglog("optimal architecture vs system size", "system size", "value"),
        &svg,
    )?;

    let outcomes = vec![
        ExpectedValue::within("total_time_slope", 1.0 / 7.0, 1e-6, Provenance::Paper)
            .evaluate(exps.total_time.slope),
        ExpectedValue::within("volume_plus_count_slope", 1.0, 1e-9, Provenance::Property)
            .evaluate(exps.volume.slope + exps.count.slope),
        ExpectedValue::within("volume_slope", 3.0 / 7.0, 1e-6, Provenance::Derived)
            .evaluate(exps.volume.slope),
        ExpectedValue::within("optimizer_max_rel_err", 0.0, 1e-9, Provenance::Derived)
            .evaluate(max_rel_err),
    ];
    Ok(RunOutput { outcomes, outputs: vec![csv, scaling_csv, svg] })
}

// ───────────────────────── immune-des ─────────────────────────

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImmuneDesParams {
    crawl_speed: f64,
    cell_density: f64,
    demand_per_mass: f64,
    contact_rate: f64,
    inoculum: f64,
    doubling_rate: f64,
    m_min: f64,
    m_max: f64,
    m_count: usize,
    v_sweep_size: f64,
    v_min: f64,
    v_max: f64,
    v_count: usize,
    replicates: usize,
    detect_draws: usize,
    detect_volume: f64,
}

impl Default for ImmuneDesParams {
    fn default() -> Self {
        Self {
            crawl_speed: 1.0,
            cell_density: 1.0,
            demand_per_mass: 50.0,
            contact_rate: 1.0,
            inoculum: 1e5,
            doubling_rate: 2.0,
            m_min: 1e2,
            m_max: 1e6,
            m_count: 5,
            v_sweep_size: 1e4,
            v_min: 50.0,
            v_max: 500.0,
            v_count: 5,
            replicates: 500,
            detect_draws: 100_000,
            detect_volume: 100.0,
        }
    }
}

fn immune_des_defaults() -> Value {
    to_value(&ImmuneDesParams::default())
}

fn immune_des_expected() -> Vec<ExpectedValue> {
    vec![
        ExpectedValue::within("detection_slope_vs_volume", 1.0 / 3.0, 0.05, Provenance::Derived),
        ExpectedValue::within("recruitment_slope_vs_volume", -2.0, 0.1, Provenance::Derived),
        ExpectedValue::within("total_slope_vs_size", 1.0 / 7.0, 0.05, Provenance::Paper),
        ExpectedValue::within("mean_detection_rel_err", 0.0, 0.01, Provenance::Derived),
    ]
}

fn run_immune_des(params: &Value, seed: u64, dir: &Path) -> Result<RunOutput> {
    let p: ImmuneDesParams = parse_params(params)?;
    let template = ImmuneSimConfig {
        system_size: p.v_sweep_size,
        module_volume: p.v_min,
        crawl_speed: p.crawl_speed,
        cell_density: p.cell_density,
        demand_per_mass: p.demand_per_mass,
        contact_rate: p.contact_rate,
        inoculum: p.inoculum,
        doubling_rate: p.doubling_rate,
        rng_seed: seed,
    };
    template.validate()?;

    // closed-form constants implied by the simulation parameters
    let detect_coeff = 0.75 * (3.0 / (4.0 * std::f64::consts::PI)).cbrt() / p.crawl_speed;
    let comm_coeff = p.demand_per_mass / (p.cell_density * p.contact_rate);
    let consts = ArchitectureConstants::new(detect_coeff, comm_coeff)?;

    let volumes = logspace(p.v_min, p.v_max, p.v_count);
    let sweep = des_volume_sweep(&template, &volumes, p.replicates)?;

    let sizes = logspace(p.m_min, p.m_max, p.m_count);
    let scaling = des_scaling(&consts, &template, &sizes, p.replicates)?;

    // mean detection vs the uniform-ball expectation (3/4)·R/speed
    let mut detect_cfg = template.clone();
    detect_cfg.module_volume = p.detect_volume;
    let mut sum = 0.0;
    for i in 0..p.detect_draws.max(1) {
        detect_cfg.rng_seed = seed + i as u64;
        sum += des_run(&detect_cfg)?.detection_time;
    }
    let mean_detection = sum / p.detect_draws.max(1) as f64;
    let expected_mean = 0.75 * module_radius(p.detect_volume) / p.crawl_speed;
    let detection_rel_err = ((mean_detection - expected_mean) / expected_mean).abs();

    let volume_csv = dir.join("runs_vs_volume.csv");
    write_csv(&volume_csv, DesRunRow::csv_header(), sweep.rows.iter().map(DesRunRow::to_csv))?;
    let size_csv = dir.join("runs_vs_size.csv");
    write_csv(&size_csv, DesRunRow::csv_header(), scaling.rows.iter().map(DesRunRow::to_csv))?;
    let scaling_csv = dir.join("scaling.csv");
    write_csv(
        &scaling_csv,
        SCALING_CSV_HEADER,
        scaling_report_rows(&[
            ("detection_vs_volume", &sweep.detection),
            ("recruitment_vs_volume", &sweep.recruitment),
            ("detection_vs_size", &scaling.detection),
            ("recruitment_vs_size", &scaling.recruitment),
            ("total_vs_size", &scaling.total),
        ]),
    )?;

    // mean simulated total time per size, for the headline plot
    let mut mean_by_size: Vec<(f64, f64)> = Vec::new();
    for &m in &sizes {
        let rows: Vec<&DesRunRow> =
            scaling.rows.iter().filter(|r| r.system_size == m).collect();
        let mean = rows.iter().map(|r| r.total).sum::<f64>() / rows.len() as f64;
        mean_by_size.push((m, mean));
    }
    let svg = dir.join("total_vs_size.svg");
    emit_plot(
        &[Series::new("simulated mean total time", mean_by_size)],
        &AxesSpec::loglog("response time vs system size", "system size", "time"),
        &svg,
    )?;

    let outcomes = vec![
        ExpectedValue::within("detection_slope_vs_volume", 1.0 / 3.0, 0.05, Provenance::Derived)
            .evaluate(sweep.detection.slope),
        ExpectedValue::within("recruitment_slope_vs_volume", -2.0, 0.1, Provenance::Derived)
            .evaluate(sweep.recruitment.slope),
        ExpectedValue::within("total_slope_vs_size", 1.0 / 7.0, 0.05, Provenance::Paper)
            .evaluate(scaling.total.slope),
        ExpectedValue::within("mean_detection_rel_err", 0.0, 0.01, Provenance::Derived)
            .evaluate(detection_rel_err),
    ];
    Ok(RunOutput { outcomes, outputs: vec![volume_csv, size_csv, scaling_csv, svg] })
}

// ───────────────────────── ant-symmetry ─────────────────────────

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AntSymmetryParams {
    width: usize,
    height: usize,
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
    runs: usize,
    concentration_threshold: f64,
}

impl Default for AntSymmetryParams {
    fn default() -> Self {
        Self {
            width: 31,
            height: 31,
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
            runs: 200,
            concentration_threshold: 0.8,
        }
    }
}

fn ant_symmetry_defaults() -> Value {
    to_value(&AntSymmetryParams::default())
}

fn ant_symmetry_expected() -> Vec<ExpectedValue> {
    vec![ExpectedValue::at_least("concentrated_run_fraction", 0.70, Provenance::Derived)]
}

fn symmetry_world(p: &AntSymmetryParams) -> Result<World> {
    let nest = (p.width / 2, p.height / 2);
    let west = (nest.0 - p.pile_distance, nest.1);
    let east = (nest.0 + p.pile_distance, nest.1);
    World::new(
        p.width,
        p.height,
        Boundary::Bounded,
        nest,
        vec![SeedPile { cell: west, count: p.pile_count }, SeedPile { cell: east, count: p.pile_count }],
    )
}

fn run_ant_symmetry(params: &Value, seed: u64, dir: &Path) -> Result<RunOutput> {
    let p: AntSymmetryParams = parse_params(params)?;
    if p.pile_distance == 0 || p.pile_distance > p.width / 2 {
        return Err(Error::Config("pile distance must fit inside the world".into()));
    }
    let field = FieldParams::new(p.decay_lambda, p.deposit_q)?;

    let mut rows = Vec::with_capacity(p.runs);
    let mut concentrated = 0usize;
    for run in 0..p.runs {
        let run_seed = seed + run as u64;
        let mut config = ColonyConfig::new(
            p.n_ants,
            AlphaDistribution::Constant(p.alpha),
            p.activation_threshold,
            run_seed,
            p.max_ticks,
        )?;
        config.base_leave_prob = p.base_leave_prob;
        config.epsilon = p.epsilon;
        let stats = run_colony(symmetry_world(&p)?, field, config)?;
        let west = stats.seeds_per_pile[0];
        let east = stats.seeds_per_pile[1];
        let total = west + east;
        let concentration = if total == 0 { 0.0 } else { west.max(east) as f64 / total as f64 };
        if concentration >= p.concentration_threshold {
            concentrated += 1;
        }
        rows.push(format!("{run},{run_seed},{total},{west},{east},{concentration}"));
    }
    let fraction = concentrated as f64 / p.runs as f64;

    let csv = dir.join("runs.csv");
    write_csv(&csv, "run,seed,collected,pile_west,pile_east,concentration", rows)?;
    let svg = dir.join("concentration.svg");
    let pts: Vec<(f64, f64)> = std::fs::read_to_string(&csv)
        .unwrap_or_default()
        .lines()
        .skip(1)
        .filter_map(|l| {
            let mut f = l.split(',');
            let run: f64 = f.next()?.parse().ok()?;
            let conc: f64 = f.nth(4)?.parse().ok()?;
            Some((run + 1.0, conc))
        })
        .collect();
    emit_plot(
        &[Series::new("trip concentration", pts)],
        &AxesSpec::linear("symmetry breaking across seeded runs", "run", "max-pile share"),
        &svg,
    )?;

    let outcomes = vec![
        ExpectedValue::at_least("concentrated_run_fraction", 0.70, Provenance::Derived)
            .evaluate(fraction),
    ];
    Ok(RunOutput { outcomes, outputs: vec![csv, svg] })
}

// ───────────────────────── ant-percapita ─────────────────────────

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AntPerCapitaParams {
    sizes: Vec<usize>,
    replicates: usize,
    width: usize,
    height: usize,
    pile_distance: usize,
    seeds_per_ant: u64,
    alpha: f64,
    activation_threshold: f64,
    base_leave_prob: f64,
    epsilon: f64,
    decay_lambda: f64,
    deposit_q: f64,
    max_ticks: u64,
}

impl Default for AntPerCapitaParams {
    fn default() -> Self {
        Self {
            sizes: vec![8, 32, 128, 512],
            replicates: 20,
            width: 33,
            height: 33,
            pile_distance: 8,
            seeds_per_ant: 60,
            alpha: 2.0,
            activation_threshold: 0.0,
            base_leave_prob: 0.01,
            epsilon: 0.1,
            decay_lambda: 0.02,
            deposit_q: 1.0,
            max_ticks: 2500,
        }
    }
}

fn ant_percapita_defaults() -> Value {
    to_value(&AntPerCapitaParams::default())
}

fn ant_percapita_expected() -> Vec<ExpectedValue> {
    vec![ExpectedValue::within("per_capita_slope", 0.0, 0.15, Provenance::Derived)]
}

fn percapita_world(p: &AntPerCapitaParams, n: usize) -> Result<World> {
    let nest = (p.width / 2, p.height / 2);
    // clustered seeds: two piles, abundance linear in colony size
    let per_pile = (p.seeds_per_ant * n as u64).div_ceil(2);
    World::new(
        p.width,
        p.height,
        Boundary::Bounded,
        nest,
        vec![
            SeedPile { cell: (nest.0 - p.pile_distance, nest.1), count: per_pile },
            SeedPile { cell: (nest.0 + p.pile_distance, nest.1), count: per_pile },
        ],
    )
}

fn run_ant_percapita(params: &Value, seed: u64, dir: &Path) -> Result<RunOutput> {
    let p: AntPerCapitaParams = parse_params(params)?;
    if p.pile_distance == 0 || p.pile_distance > p.width / 2 {
        return Err(Error::Config("pile distance must fit inside the world".into()));
    }
    let field = FieldParams::new(p.decay_lambda, p.deposit_q)?;
    if p.sizes.len() < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 sizes, got {}", p.sizes.len())));
    }
    if p.replicates < 20 {
        return Err(Error::Config(format!("need at least 20 replicates, got {}", p.replicates)));
    }

    let mut rows: Vec<String> = Vec::new();
    let mut mean_points: Vec<(f64, f64)> = Vec::new();
    for (si, &n) in p.sizes.iter().enumerate() {
        let mut sum = 0.0;
        for rep in 0..p.replicates {
            let run_seed = seed + (si * p.replicates + rep) as u64;
            let mut config = ColonyConfig::new(
                n,
                AlphaDistribution::Constant(p.alpha),
                p.activation_threshold,
                run_seed,
                p.max_ticks,
            )?;
            config.base_leave_prob = p.base_leave_prob;
            config.epsilon = p.epsilon;
            let stats = run_colony(percapita_world(&p, n)?, field, config)?;
            sum += stats.per_capita_rate;
            rows.push(stats.to_csv(n, rep, run_seed));
        }
        mean_points.push((n as f64, sum / p.replicates as f64));
    }
    let fit = crate::scaling::loglog_fit(&mean_points)?;

    let csv = dir.join("stats.csv");
    write_csv(&csv, ForagingStats::csv_header(), rows)?;
    let svg = dir.join("rate_vs_size.svg");
    emit_plot(
        &[Series::new("mean per-capita rate", mean_points)],
        &AxesSpec::loglog("per-capita foraging rate vs colony size", "ants", "seeds/(ant·tick)"),
        &svg,
    )?;

    let outcomes = vec![
        ExpectedValue::within("per_capita_slope", 0.0, 0.15, Provenance::Derived).evaluate(fit.slope),
    ];
    Ok(RunOutput { outcomes, outputs: vec![csv, svg] })
}

// ───────────────────────── smallworld-densify ─────────────────────────

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SmallworldParams {
    sizes: Vec<usize>,
    degree_coeff: f64,
    constant_k: usize,
    r_exponent: f64,
    trials: usize,
    paired_size: usize,
    paired_trials: usize,
}

impl Default for SmallworldParams {
    fn default() -> Self {
        Self {
            sizes: vec![1 << 10, 1 << 12, 1 << 14, 1 << 16],
            degree_coeff: 1.0,
            constant_k: 1,
            r_exponent: 2.0,
            trials: 1000,
            paired_size: 1 << 14,
            paired_trials: 1000,
        }
    }
}

fn smallworld_defaults() -> Value {
    to_value(&SmallworldParams::default())
}

fn smallworld_expected() -> Vec<ExpectedValue> {
    vec![
        ExpectedValue::at_least("densified_r2_ln", 0.95, Provenance::Derived),
        ExpectedValue::greater_than("densified_r2_ln_margin", 0.0, Provenance::Derived),
        ExpectedValue::at_least("constant_r2_ln2", 0.95, Provenance::Derived),
        ExpectedValue::greater_than("constant_r2_ln2_margin", 0.0, Provenance::Derived),
        ExpectedValue::greater_than("paired_mean_hop_gap", 0.0, Provenance::Property),
    ]
}

fn run_smallworld(params: &Value, seed: u64, dir: &Path) -> Result<RunOutput> {
    let p: SmallworldParams = parse_params(params)?;
    let dense_policy = DegreePolicy::LogSquared(p.degree_coeff);
    let sparse_policy = DegreePolicy::Constant(p.constant_k);

    let dense =
        delivery_scaling(Topology::Torus, &p.sizes, &dense_policy, p.r_exponent, p.trials, seed)?;
    let sparse = delivery_scaling(
        Topology::Torus,
        &p.sizes,
        &sparse_policy,
        p.r_exponent,
        p.trials,
        seed.wrapping_add(0x1000),
    )?;

    // paired comparison at one size: same build seed, same pair stream
    let paired_build = seed.wrapping_add(0x2000);
    let paired_pairs = seed.wrapping_add(0x2001);
    let g_dense = build_graph(Topology::Torus, p.paired_size, &dense_policy, p.r_exponent, paired_build)?;
    let g_sparse =
        build_graph(Topology::Torus, p.paired_size, &sparse_policy, p.r_exponent, paired_build)?;
    let dense_paired = mean_hops(&g_dense, p.paired_trials, paired_pairs)?;
    let sparse_paired = mean_hops(&g_sparse, p.paired_trials, paired_pairs)?;

    let csv = dir.join("results.csv");
    let rows: Vec<String> = dense
        .per_size
        .iter()
        .map(|s| s.to_csv(&dense_policy))
        .chain(sparse.per_size.iter().map(|s| s.to_csv(&sparse_policy)))
        .collect();
    write_csv(&csv, SizeStats::csv_header(), rows)?;

    let svg = dir.join("hops_vs_logn.svg");
    let dense_pts: Vec<(f64, f64)> =
        dense.per_size.iter().map(|s| ((s.n as f64).ln(), s.mean_hops)).collect();
    let sparse_pts: Vec<(f64, f64)> =
        sparse.per_size.iter().map(|s| ((s.n as f64).ln(), s.mean_hops)).collect();
    emit_plot(
        &[
            Series::new("out-degree (ln n)^2", dense_pts),
            Series::new("out-degree constant", sparse_pts),
        ],
        &AxesSpec::linear("greedy delivery vs network size", "ln n", "mean hops").with_fit(),
        &svg,
    )?;

    let outcomes = vec![
        ExpectedValue::at_least("densified_r2_ln", 0.95, Provenance::Derived)
            .evaluate(dense.fit_ln.r_squared),
        ExpectedValue::greater_than("densified_r2_ln_margin", 0.0, Provenance::Derived)
            .evaluate(dense.fit_ln.r_squared - dense.fit_ln_squared.r_squared),
        ExpectedValue::at_least("constant_r2_ln2", 0.95, Provenance::Derived)
            .evaluate(sparse.fit_ln_squared.r_squared),
        ExpectedValue::greater_than("constant_r2_ln2_margin", 0.0, Provenance::Derived)
            .evaluate(sparse.fit_ln_squared.r_squared - sparse.fit_ln.r_squared),
        ExpectedValue::greater_than("paired_mean_hop_gap", 0.0, Provenance::Property)
            .evaluate(sparse_paired.mean_hops - dense_paired.mean_hops),
    ];
    Ok(RunOutput { outcomes, outputs: vec![csv, svg] })
}
