//! Semi-modular search-and-response model: closed-form detection and
//! communication times over a modular architecture, optimal module sizing,
//! and a discrete-event simulation that validates the closed forms.
//!
//! A system of size `M` is partitioned into `N` modules of volume `V`
//! (module tissue conserved: `N·V = M` by default). Local detection slows
//! with module size (`A·V^(1/3)`, a crawl across the module radius) while
//! global recruitment speeds up with it (`B·M/V²`: fewer remote modules to
//! pool, each contacted faster). The optimal `V` balances the two.

mod des;

pub use des::{
    carrier_distance, des_run, des_scaling, des_volume_sweep, module_radius, DesRunRow,
    DesScalingResult, DesVolumeSweep, ImmuneSimConfig, SimOutcome,
};

use crate::error::{Error, Result};
use crate::scalar::{cst, Real};
use crate::scaling::{loglog_fit, RegressionResult};

/// Proportionality constants of the two time terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArchitectureConstants<F> {
    /// Detection-time coefficient (time per volume^(1/3)).
    pub detect_coeff: F,
    /// Communication-time coefficient (time·volume²/mass).
    pub comm_coeff: F,
}

impl<F: Real> ArchitectureConstants<F> {
    pub fn new(detect_coeff: F, comm_coeff: F) -> Result<Self> {
        if !(detect_coeff > F::zero() && detect_coeff.is_finite()) {
            return Err(Error::Domain(format!("detection coefficient must be positive, got {detect_coeff}")));
        }
        if !(comm_coeff > F::zero() && comm_coeff.is_finite()) {
            return Err(Error::Domain(format!("communication coefficient must be positive, got {comm_coeff}")));
        }
        Ok(Self { detect_coeff, comm_coeff })
    }
}

/// A concrete modular architecture: system size, module volume, module count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Architecture<F> {
    pub system_size: F,
    pub module_volume: F,
    pub module_count: F,
}

impl<F: Real> Architecture<F> {
    pub fn new(system_size: F, module_volume: F, module_count: F) -> Result<Self> {
        if !(system_size > F::zero()) {
            return Err(Error::Domain(format!("system size must be positive, got {system_size}")));
        }
        if !(module_volume > F::zero()) {
            return Err(Error::Domain(format!("module volume must be positive, got {module_volume}")));
        }
        if !(module_count >= F::one()) {
            return Err(Error::Domain(format!("module count must be at least 1, got {module_count}")));
        }
        Ok(Self { system_size, module_volume, module_count })
    }
}

/// Detection, communication, and total response time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeBreakdown<F> {
    pub detect: F,
    pub comm: F,
    pub total: F,
}

/// Local detection time `A·V^(1/3)`: a carrier crawls a distance
/// proportional to the module radius.
pub fn detection_time<F: Real>(consts: &ArchitectureConstants<F>, module_volume: F) -> Result<F> {
    if !(module_volume > F::zero()) {
        return Err(Error::Domain(format!("module volume must be positive, got {module_volume}")));
    }
    Ok(consts.detect_coeff * module_volume.cbrt())
}

/// Number of remote modules whose resident responders must be pooled to
/// meet a demand proportional to system size: `M/(ρ·V)`.
pub fn comm_lymphnodes<F: Real>(system_size: F, module_volume: F, cell_density: F) -> Result<F> {
    for (name, v) in [("system size", system_size), ("module volume", module_volume), ("cell density", cell_density)] {
        if !(v > F::zero()) {
            return Err(Error::Domain(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(system_size / (cell_density * module_volume))
}

/// Global communication time `B·M/V²`: the module count to pool scales as
/// `M/V` and each contact completes at a rate proportional to `V`.
pub fn communication_time<F: Real>(
    consts: &ArchitectureConstants<F>,
    system_size: F,
    module_volume: F,
) -> Result<F> {
    if !(system_size > F::zero()) {
        return Err(Error::Domain(format!("system size must be positive, got {system_size}")));
    }
    if !(module_volume > F::zero()) {
        return Err(Error::Domain(format!("module volume must be positive, got {module_volume}")));
    }
    Ok(consts.comm_coeff * system_size / (module_volume * module_volume))
}

/// Sum of detection and communication time at a given module volume.
pub fn total_time<F: Real>(
    consts: &ArchitectureConstants<F>,
    system_size: F,
    module_volume: F,
) -> Result<TimeBreakdown<F>> {
    let detect = detection_time(consts, module_volume)?;
    let comm = communication_time(consts, system_size, module_volume)?;
    Ok(TimeBreakdown { detect, comm, total: detect + comm })
}

/// Optimizer output: the minimizing module volume, the implied module
/// count under tissue conservation, and the times there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalArchitecture<F> {
    pub module_volume: F,
    pub module_count: F,
    pub times: TimeBreakdown<F>,
}

/// Root of the stationarity condition `d/dV [A·V^(1/3) + B·M·V^(−2)] = 0`,
/// i.e. `V = (6·B·M/A)^(3/7)`. Kept algebraic so the numeric minimizer can
/// be cross-checked against it.
pub fn stationary_volume<F: Real>(consts: &ArchitectureConstants<F>, system_size: F) -> Result<F> {
    if !(system_size > F::zero()) {
        return Err(Error::Domain(format!("system size must be positive, got {system_size}")));
    }
    let six = cst::<F>(6.0);
    let ratio = six * consts.comm_coeff * system_size / consts.detect_coeff;
    Ok(ratio.powf(cst::<F>(3.0) / cst::<F>(7.0)))
}

/// Minimize total response time over the module volume.
///
/// Golden-section search on `ln V` with automatic bracket expansion, then a
/// bisection polish on the objective's derivative sign inside the final
/// bracket. The polish is needed because value-comparison search alone
/// cannot localize a flat quadratic minimum beyond ~sqrt(ε) relative error.
/// Module count follows from tissue conservation `N·V = M`.
pub fn optimize_architecture<F: Real>(
    consts: &ArchitectureConstants<F>,
    system_size: F,
) -> Result<OptimalArchitecture<F>> {
    if !(system_size > F::zero() && system_size.is_finite()) {
        return Err(Error::Domain(format!("system size must be positive, got {system_size}")));
    }
    let objective = |x: F| -> F {
        let v = x.exp();
        consts.detect_coeff * v.cbrt() + consts.comm_coeff * system_size / (v * v)
    };
    // d/dx of the objective in x = ln V; only its sign is used.
    let slope = |x: F| -> F {
        let v = x.exp();
        consts.detect_coeff * v.cbrt() / cst::<F>(3.0)
            - cst::<F>(2.0) * consts.comm_coeff * system_size / (v * v)
    };

    let (mut lo, mut hi) = bracket_minimum(&objective, F::zero())?;

    // Golden-section shrink until the bracket is tight on the log axis.
    let inv_phi = cst::<F>(0.618_033_988_749_894_9);
    let coarse_tol = F::epsilon().sqrt();
    let mut m1 = hi - inv_phi * (hi - lo);
    let mut m2 = lo + inv_phi * (hi - lo);
    let mut f1 = objective(m1);
    let mut f2 = objective(m2);
    while hi - lo > coarse_tol {
        if f1 <= f2 {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - inv_phi * (hi - lo);
            f1 = objective(m1);
        } else {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + inv_phi * (hi - lo);
            f2 = objective(m2);
        }
    }

    // Derivative-sign bisection for the remaining digits; stops when the
    // midpoint is no longer representable strictly inside the bracket.
    let (mut a, mut b) = (lo, hi);
    if slope(a) > F::zero() || slope(b) < F::zero() {
        // Bracket drifted off the sign change during the coarse phase;
        // re-open it by one golden interval on each side.
        a = a - coarse_tol;
        b = b + coarse_tol;
    }
    loop {
        let mid = (a + b) * cst::<F>(0.5);
        if !(mid > a && mid < b) {
            break;
        }
        if slope(mid) < F::zero() {
            a = mid;
        } else {
            b = mid;
        }
    }

    let v_star = ((a + b) * cst::<F>(0.5)).exp();
    let n_star = system_size / v_star;
    let times = total_time(consts, system_size, v_star)?;
    Ok(OptimalArchitecture { module_volume: v_star, module_count: n_star, times })
}

/// Expand outward from `x0` until `(lo, hi)` straddles the minimum of `f`.
fn bracket_minimum<F: Real>(f: &impl Fn(F) -> F, x0: F) -> Result<(F, F)> {
    let mut step = F::one();
    let mut lo = x0 - step;
    let mut hi = x0 + step;
    let mut f_lo = f(lo);
    let mut f_mid = f(x0);
    let mut f_hi = f(hi);
    for _ in 0..200 {
        if f_mid <= f_lo && f_mid <= f_hi {
            return Ok((lo, hi));
        }
        step = step + step;
        if f_lo < f_hi {
            f_mid = f_lo;
            lo = lo - step;
            f_lo = f(lo);
        } else {
            f_mid = f_hi;
            hi = hi + step;
            f_hi = f(hi);
        }
    }
    Err(Error::Numerical("failed to bracket the time minimum".into()))
}

/// Fitted log-log slopes of optimal volume, module count, and total time
/// against system size.
#[derive(Debug, Clone)]
pub struct ScalingExponents<F> {
    pub volume: RegressionResult<F>,
    pub count: RegressionResult<F>,
    pub total_time: RegressionResult<F>,
    /// Per-size optimizer output, in input order.
    pub optima: Vec<(F, OptimalArchitecture<F>)>,
}

/// Optimize per system size and fit the three scaling exponents.
pub fn scaling_exponents<F: Real>(
    consts: &ArchitectureConstants<F>,
    system_sizes: &[F],
) -> Result<ScalingExponents<F>> {
    let mut distinct = system_sizes.to_vec();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 distinct system sizes, got {}",
            distinct.len()
        )));
    }

    let mut optima = Vec::with_capacity(system_sizes.len());
    for &m in system_sizes {
        optima.push((m, optimize_architecture(consts, m)?));
    }
    let volume: Vec<(F, F)> = optima.iter().map(|&(m, o)| (m, o.module_volume)).collect();
    let count: Vec<(F, F)> = optima.iter().map(|&(m, o)| (m, o.module_count)).collect();
    let total: Vec<(F, F)> = optima.iter().map(|&(m, o)| (m, o.times.total)).collect();
    Ok(ScalingExponents {
        volume: loglog_fit(&volume)?,
        count: loglog_fit(&count)?,
        total_time: loglog_fit(&total)?,
        optima,
    })
}
