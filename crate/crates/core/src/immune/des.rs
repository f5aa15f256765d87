use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scaling::{loglog_fit, RegressionResult};

use super::{optimize_architecture, ArchitectureConstants};

/// Configuration of one detect-then-recruit simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ImmuneSimConfig {
    /// System size `M`.
    pub system_size: f64,
    /// Module volume `V`.
    pub module_volume: f64,
    /// Carrier crawl speed (distance/time).
    pub crawl_speed: f64,
    /// Resident responders per unit module volume (`ρ`).
    pub cell_density: f64,
    /// Responders required per unit system size (`κ`); total demand `K = κ·M`.
    pub demand_per_mass: f64,
    /// Per-unit-volume recruitment contact rate (`η`); one remote contact
    /// takes `1/(η·V)`.
    pub contact_rate: f64,
    /// Initial pathogen count; reported, does not alter phase timing.
    pub inoculum: f64,
    /// Responder divisions per day; reported, does not alter phase timing.
    pub doubling_rate: f64,
    pub rng_seed: u64,
}

impl ImmuneSimConfig {
    /// Config with the conventional inoculum (1e5) and doubling rate (2/day).
    pub fn new(
        system_size: f64,
        module_volume: f64,
        crawl_speed: f64,
        cell_density: f64,
        demand_per_mass: f64,
        contact_rate: f64,
        rng_seed: u64,
    ) -> Result<Self> {
        let cfg = Self {
            system_size,
            module_volume,
            crawl_speed,
            cell_density,
            demand_per_mass,
            contact_rate,
            inoculum: 1e5,
            doubling_rate: 2.0,
            rng_seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("system_size", self.system_size),
            ("module_volume", self.module_volume),
            ("crawl_speed", self.crawl_speed),
            ("cell_density", self.cell_density),
            ("demand_per_mass", self.demand_per_mass),
            ("contact_rate", self.contact_rate),
            ("inoculum", self.inoculum),
            ("doubling_rate", self.doubling_rate),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.total_demand() < 1.0 {
            return Err(Error::Config(format!(
                "total responder demand K = κ·M must be at least 1, got {}",
                self.total_demand()
            )));
        }
        Ok(())
    }

    /// Total responders required, `K = κ·M`.
    pub fn total_demand(&self) -> f64 {
        self.demand_per_mass * self.system_size
    }
}

/// Outcome of one simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOutcome {
    pub detection_time: f64,
    pub recruitment_time: f64,
    pub total_time: f64,
    pub remote_modules_contacted: u64,
    pub responders_activated: f64,
}

/// Radius of a sphere of volume `v`.
pub fn module_radius(v: f64) -> f64 {
    (3.0 * v / (4.0 * std::f64::consts::PI)).cbrt()
}

/// Distance from the center for a point uniform in a ball of the given
/// radius, driven by a unit sample: `r·u^(1/3)`.
pub fn carrier_distance(radius: f64, unit_sample: f64) -> f64 {
    radius * unit_sample.cbrt()
}

/// Two-phase detect-then-recruit run.
///
/// Phase 1 places an antigen carrier uniformly at random in a sphere of
/// volume `V`; detection takes distance-to-center over crawl speed.
/// Phase 2 activates the `ρ·V` residents instantly and fills the remaining
/// demand by serial remote contacts, each taking `1/(η·V)` and delivering
/// `ρ·V` responders. Deterministic given the seed.
pub fn des_run(config: &ImmuneSimConfig) -> Result<SimOutcome> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);

    let radius = module_radius(config.module_volume);
    let distance = carrier_distance(radius, rng.random::<f64>());
    let detection_time = distance / config.crawl_speed;

    let resident = config.cell_density * config.module_volume;
    let demand = config.total_demand();
    let remote_modules_contacted = if demand > resident {
        ((demand - resident) / resident).ceil() as u64
    } else {
        0
    };
    let contact_time = 1.0 / (config.contact_rate * config.module_volume);
    let recruitment_time = remote_modules_contacted as f64 * contact_time;
    let responders_activated = resident * (1.0 + remote_modules_contacted as f64);
    debug_assert!(responders_activated >= demand);

    Ok(SimOutcome {
        detection_time,
        recruitment_time,
        total_time: detection_time + recruitment_time,
        remote_modules_contacted,
        responders_activated,
    })
}

/// One row of the per-run output (`M,V,N,t_detect,t_comm,t_total,seed`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesRunRow {
    pub system_size: f64,
    pub module_volume: f64,
    pub module_count: f64,
    pub detect: f64,
    pub comm: f64,
    pub total: f64,
    pub seed: u64,
}

impl DesRunRow {
    pub fn csv_header() -> &'static str {
        "M,V,N,t_detect,t_comm,t_total,seed"
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.system_size, self.module_volume, self.module_count, self.detect, self.comm, self.total, self.seed
        )
    }
}

/// Simulated scaling against system size, with the module volume optimized
/// per size from the closed-form constants.
#[derive(Debug, Clone)]
pub struct DesScalingResult {
    pub detection: RegressionResult<f64>,
    pub recruitment: RegressionResult<f64>,
    pub total: RegressionResult<f64>,
    pub rows: Vec<DesRunRow>,
}

fn replicate_means(config: &ImmuneSimConfig, replicates: usize, rows: &mut Vec<DesRunRow>) -> Result<(f64, f64, f64)> {
    let mut sum_detect = 0.0;
    let mut sum_recruit = 0.0;
    let mut sum_total = 0.0;
    for rep in 0..replicates {
        let mut cfg = config.clone();
        cfg.rng_seed = config.rng_seed + rep as u64;
        let out = des_run(&cfg)?;
        sum_detect += out.detection_time;
        sum_recruit += out.recruitment_time;
        sum_total += out.total_time;
        rows.push(DesRunRow {
            system_size: cfg.system_size,
            module_volume: cfg.module_volume,
            module_count: cfg.system_size / cfg.module_volume,
            detect: out.detection_time,
            comm: out.recruitment_time,
            total: out.total_time,
            seed: cfg.rng_seed,
        });
    }
    let n = replicates as f64;
    Ok((sum_detect / n, sum_recruit / n, sum_total / n))
}

/// For each system size, set the module volume via [`optimize_architecture`],
/// run replicates, and fit log-log slopes of the mean times against size.
pub fn des_scaling(
    consts: &ArchitectureConstants<f64>,
    template: &ImmuneSimConfig,
    system_sizes: &[f64],
    replicates: usize,
) -> Result<DesScalingResult> {
    if replicates < 30 {
        return Err(Error::Config(format!("need at least 30 replicates, got {replicates}")));
    }
    if system_sizes.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 system sizes, got {}",
            system_sizes.len()
        )));
    }
    let mut rows = Vec::with_capacity(system_sizes.len() * replicates);
    let mut detect_pts = Vec::new();
    let mut recruit_pts = Vec::new();
    let mut total_pts = Vec::new();
    for &m in system_sizes {
        let opt = optimize_architecture(consts, m)?;
        let mut cfg = template.clone();
        cfg.system_size = m;
        cfg.module_volume = opt.module_volume;
        cfg.validate()?;
        let (d, r, t) = replicate_means(&cfg, replicates, &mut rows)?;
        detect_pts.push((m, d));
        recruit_pts.push((m, r));
        total_pts.push((m, t));
    }
    Ok(DesScalingResult {
        detection: loglog_fit(&detect_pts)?,
        recruitment: loglog_fit(&recruit_pts)?,
        total: loglog_fit(&total_pts)?,
        rows,
    })
}

/// Simulated scaling against module volume at fixed system size.
#[derive(Debug, Clone)]
pub struct DesVolumeSweep {
    pub detection: RegressionResult<f64>,
    pub recruitment: RegressionResult<f64>,
    pub rows: Vec<DesRunRow>,
}

/// Sweep the module volume at the template's system size and fit log-log
/// slopes of mean detection (expected 1/3) and recruitment (expected −2,
/// for demand far above a single module's residents).
pub fn des_volume_sweep(
    template: &ImmuneSimConfig,
    volumes: &[f64],
    replicates: usize,
) -> Result<DesVolumeSweep> {
    if replicates < 30 {
        return Err(Error::Config(format!("need at least 30 replicates, got {replicates}")));
    }
    if volumes.len() < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 volumes, got {}", volumes.len())));
    }
    let mut rows = Vec::with_capacity(volumes.len() * replicates);
    let mut detect_pts = Vec::new();
    let mut recruit_pts = Vec::new();
    for &v in volumes {
        let mut cfg = template.clone();
        cfg.module_volume = v;
        cfg.validate()?;
        let (d, r, _) = replicate_means(&cfg, replicates, &mut rows)?;
        detect_pts.push((v, d));
        recruit_pts.push((v, r));
    }
    Ok(DesVolumeSweep {
        detection: loglog_fit(&detect_pts)?,
        recruitment: loglog_fit(&recruit_pts)?,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn base_config() -> ImmuneSimConfig {
        ImmuneSimConfig::new(100.0, 10.0, 1.0, 1.0, 1.0, 0.2, 42).unwrap()
    }

    #[test]
    fn carrier_at_center_detects_instantly() {
        assert_eq!(carrier_distance(3.0, 0.0), 0.0);
        assert_eq!(carrier_distance(3.0, 1.0), 3.0);
    }

    #[test]
    fn recruitment_arithmetic() {
        // K = 100, residents = 10, contact rate η·V = 2
        let out = des_run(&base_config()).unwrap();
        assert_eq!(out.remote_modules_contacted, 9);
        assert_eq!(out.recruitment_time, 4.5);
        assert_eq!(out.responders_activated, 100.0);
    }

    #[test]
    fn single_module_sufficiency_needs_no_contacts() {
        let mut cfg = base_config();
        cfg.demand_per_mass = 0.05; // K = 5 < 10 residents
        let out = des_run(&cfg).unwrap();
        assert_eq!(out.remote_modules_contacted, 0);
        assert_eq!(out.recruitment_time, 0.0);
        assert!(out.responders_activated >= cfg.total_demand());
    }

    #[test]
    fn demand_below_one_rejected() {
        let mut cfg = base_config();
        cfg.demand_per_mass = 1e-9;
        assert!(matches!(des_run(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn deterministic_per_seed() {
        let cfg = base_config();
        let a = des_run(&cfg).unwrap();
        let b = des_run(&cfg).unwrap();
        assert_eq!(a, b);
        let mut cfg2 = cfg.clone();
        cfg2.rng_seed = 43;
        assert_ne!(des_run(&cfg2).unwrap().detection_time, a.detection_time);
    }

    #[test]
    fn mean_detection_is_three_quarters_radius_over_speed() {
        let mut cfg = base_config();
        cfg.crawl_speed = 2.0;
        let draws = 100_000;
        let mut sum = 0.0;
        for rep in 0..draws {
            cfg.rng_seed = 1000 + rep as u64;
            sum += des_run(&cfg).unwrap().detection_time;
        }
        let mean = sum / draws as f64;
        let expected = 0.75 * module_radius(cfg.module_volume) / cfg.crawl_speed;
        assert_relative_eq!(mean, expected, max_relative = 0.01);
    }

    #[test]
    fn recruitment_approaches_closed_form_as_demand_grows() {
        // closed form B·M/V² with B = κ/(ρ·η); ceiling effects vanish as
        // K/(ρV) grows
        let mut cfg = base_config();
        cfg.cell_density = 1.0;
        cfg.contact_rate = 0.5;
        cfg.module_volume = 10.0;
        for (kappa, tol) in [(10.0, 0.02), (100.0, 0.002), (1000.0, 0.0002)] {
            cfg.demand_per_mass = kappa;
            let out = des_run(&cfg).unwrap();
            let closed = kappa / (cfg.cell_density * cfg.contact_rate) * cfg.system_size
                / (cfg.module_volume * cfg.module_volume);
            assert_relative_eq!(out.recruitment_time, closed, max_relative = tol);
        }
    }

    #[test]
    fn volume_sweep_recovers_slopes() {
        let mut template = base_config();
        template.system_size = 1e4;
        template.demand_per_mass = 50.0;
        let volumes: Vec<f64> = (0..5).map(|i| 50.0 * 10f64.powf(i as f64 / 4.0)).collect();
        let sweep = des_volume_sweep(&template, &volumes, 200).unwrap();
        assert_relative_eq!(sweep.detection.slope, 1.0 / 3.0, epsilon = 0.05);
        assert_relative_eq!(sweep.recruitment.slope, -2.0, epsilon = 0.1);
    }

    #[test]
    fn scaling_recovers_one_seventh() {
        let consts = ArchitectureConstants::new(
            0.75 * (3.0 / (4.0 * std::f64::consts::PI)).cbrt(),
            50.0,
        )
        .unwrap();
        let mut template = base_config();
        template.demand_per_mass = 50.0;
        let sizes: Vec<f64> = (0..5).map(|i| 1e2 * 10f64.powi(i)).collect();
        let result = des_scaling(&consts, &template, &sizes, 200).unwrap();
        assert_relative_eq!(result.total.slope, 1.0 / 7.0, epsilon = 0.05);
        assert_eq!(result.rows.len(), 5 * 200);
    }

    #[test]
    fn replicate_floor_enforced() {
        let consts = ArchitectureConstants::new(1.0, 1.0).unwrap();
        let template = base_config();
        assert!(matches!(
            des_scaling(&consts, &template, &[1e2, 1e3, 1e4], 10),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            des_volume_sweep(&template, &[10.0, 20.0, 40.0], 10),
            Err(Error::Config(_))
        ));
    }
}
