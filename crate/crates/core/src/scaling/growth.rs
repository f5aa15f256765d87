use crate::error::{Error, Result};
use crate::scalar::{cst, Real};

/// Parameters of the ontogenetic growth equation `dm/dt = a·m^p − b·m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthParams<F> {
    intake_coeff: F,      // a
    maintenance_coeff: F, // b
    exponent: F,          // p
    initial_mass: F,      // m0
}

impl<F: Real> GrowthParams<F> {
    pub fn new(intake_coeff: F, maintenance_coeff: F, exponent: F, initial_mass: F) -> Result<Self> {
        if !(intake_coeff > F::zero() && intake_coeff.is_finite()) {
            return Err(Error::Domain(format!("intake coefficient a must be positive, got {intake_coeff}")));
        }
        if !(maintenance_coeff > F::zero() && maintenance_coeff.is_finite()) {
            return Err(Error::Domain(format!(
                "maintenance coefficient b must be positive, got {maintenance_coeff}"
            )));
        }
        if !(exponent > F::zero() && exponent < F::one()) {
            return Err(Error::Domain(format!(
                "exponent p must lie in (0, 1) for a finite asymptote, got {exponent}"
            )));
        }
        let asymptote = asymptote(intake_coeff, maintenance_coeff, exponent);
        if !(initial_mass > F::zero() && initial_mass <= asymptote) {
            return Err(Error::Domain(format!(
                "initial mass must satisfy 0 < m0 <= asymptotic mass {asymptote}, got {initial_mass}"
            )));
        }
        Ok(Self { intake_coeff, maintenance_coeff, exponent, initial_mass })
    }

    pub fn intake_coeff(&self) -> F {
        self.intake_coeff
    }

    pub fn maintenance_coeff(&self) -> F {
        self.maintenance_coeff
    }

    pub fn exponent(&self) -> F {
        self.exponent
    }

    pub fn initial_mass(&self) -> F {
        self.initial_mass
    }

    fn derivative(&self, m: F) -> F {
        self.intake_coeff * m.powf(self.exponent) - self.maintenance_coeff * m
    }
}

fn asymptote<F: Real>(a: F, b: F, p: F) -> F {
    (a / b).powf(F::one() / (F::one() - p))
}

/// Mass at which intake balances maintenance: `(a/b)^(1/(1−p))`.
///
/// For `p = 3/4` this is `(a/b)^4`. Finiteness is guaranteed by the
/// `0 < p < 1` constraint on [`GrowthParams`].
pub fn asymptotic_mass<F: Real>(params: &GrowthParams<F>) -> F {
    asymptote(params.intake_coeff, params.maintenance_coeff, params.exponent)
}

/// Integrate the growth equation with classical fixed-step RK4.
///
/// Returns `(t, m)` samples at every accepted step, starting at `(0, m0)`.
/// The final step is shortened so the trajectory lands exactly on `t_end`.
pub fn integrate_growth<F: Real>(params: &GrowthParams<F>, t_end: F, dt: F) -> Result<Vec<(F, F)>> {
    let f = |m: F| params.derivative(m);
    rk4(f, params.initial_mass, t_end, dt, None).map(|out| out.trajectory)
}

/// Closed-form solution of the growth equation for `p = 3/4`:
/// `m(t) = M·(1 − (1 − (m0/M)^(1/4))·exp(−a·t/(4·M^(1/4))))^4` with `M = (a/b)^4`.
pub fn growth_analytic<F: Real>(params: &GrowthParams<F>, t: F) -> Result<F> {
    let quarter = cst::<F>(0.25);
    if params.exponent != cst::<F>(0.75) {
        return Err(Error::Domain(format!(
            "closed form only available for p = 3/4, got p = {}",
            params.exponent
        )));
    }
    let m_max = asymptotic_mass(params);
    let u0 = F::one() - (params.initial_mass / m_max).powf(quarter);
    let rate = params.intake_coeff / (cst::<F>(4.0) * m_max.powf(quarter));
    let u = F::one() - u0 * (-rate * t).exp();
    Ok(m_max * u.powi(4))
}

/// Parameters of the superlinear city-growth variant `dn/dt = a·n^γ − b·n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CityGrowthParams<F> {
    intake_coeff: F,
    maintenance_coeff: F,
    gamma: F,
    initial_size: F,
}

impl<F: Real> CityGrowthParams<F> {
    pub fn new(intake_coeff: F, maintenance_coeff: F, gamma: F, initial_size: F) -> Result<Self> {
        for (name, v) in [("a", intake_coeff), ("b", maintenance_coeff), ("n0", initial_size)] {
            if !(v > F::zero() && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !gamma.is_finite() {
            return Err(Error::Domain(format!("gamma must be finite, got {gamma}")));
        }
        Ok(Self { intake_coeff, maintenance_coeff, gamma, initial_size })
    }

    pub fn gamma(&self) -> F {
        self.gamma
    }

    pub fn initial_size(&self) -> F {
        self.initial_size
    }

    /// Stable fixed point `(a/b)^(1/(1−γ))` when `γ < 1`.
    pub fn subcritical_fixed_point(&self) -> Option<F> {
        (self.gamma < F::one()).then(|| asymptote(self.intake_coeff, self.maintenance_coeff, self.gamma))
    }
}

/// Trajectory of the city-growth equation plus the blow-up time, if growth
/// crossed the ceiling before `t_end`.
#[derive(Debug, Clone)]
pub struct CityGrowthResult<F> {
    pub trajectory: Vec<(F, F)>,
    pub blow_up: Option<F>,
}

/// Integrate `dn/dt = a·n^γ − b·n`.
///
/// When `γ > 1` and intake initially outruns maintenance the solution
/// diverges in finite time; integration stops at the first step where `n`
/// exceeds `ceiling` (default `1e12·n0`) or turns non-finite, and that time
/// is reported as the blow-up. A numerical overflow is a blow-up here, not
/// an error.
pub fn city_growth<F: Real>(
    params: &CityGrowthParams<F>,
    t_end: F,
    dt: F,
    ceiling: Option<F>,
) -> Result<CityGrowthResult<F>> {
    let ceiling = ceiling.unwrap_or_else(|| cst::<F>(1e12) * params.initial_size);
    if !(ceiling > params.initial_size) {
        return Err(Error::Config(format!("blow-up ceiling must exceed n0, got {ceiling}")));
    }
    let a = params.intake_coeff;
    let b = params.maintenance_coeff;
    let gamma = params.gamma;
    let f = move |n: F| a * n.powf(gamma) - b * n;
    let out = rk4(f, params.initial_size, t_end, dt, Some(ceiling))?;
    Ok(CityGrowthResult { trajectory: out.trajectory, blow_up: out.ceiling_hit_at })
}

struct Rk4Output<F> {
    trajectory: Vec<(F, F)>,
    ceiling_hit_at: Option<F>,
}

/// Classical RK4 with a fixed step and an optional ceiling.
///
/// With a ceiling, crossing it (or going non-finite) terminates integration
/// and records the time; without one, a non-finite state is an error.
fn rk4<F: Real>(
    f: impl Fn(F) -> F,
    y0: F,
    t_end: F,
    dt: F,
    ceiling: Option<F>,
) -> Result<Rk4Output<F>> {
    if !(dt > F::zero()) || !dt.is_finite() {
        return Err(Error::Config(format!("step size must be positive and finite, got {dt}")));
    }
    if !(t_end > F::zero()) || !t_end.is_finite() {
        return Err(Error::Config(format!("end time must be positive and finite, got {t_end}")));
    }
    if dt >= t_end {
        return Err(Error::Config(format!("step size {dt} must be smaller than end time {t_end}")));
    }

    let half = cst::<F>(0.5);
    let sixth = F::one() / cst::<F>(6.0);
    let two = cst::<F>(2.0);

    let n_full = (t_end / dt).floor();
    let n_full_usize = n_full.to_usize().ok_or_else(|| {
        Error::Config(format!("t_end/dt = {} is too many steps", t_end / dt))
    })?;

    let mut trajectory = Vec::with_capacity(n_full_usize + 2);
    let mut y = y0;
    trajectory.push((F::zero(), y));

    let mut step_index = 0usize;
    loop {
        // Keep the grid exact: t_i = i·dt, with one shortened final step.
        let t = F::from_usize(step_index).unwrap() * dt;
        let remaining = t_end - t;
        if remaining <= F::zero() {
            break;
        }
        let h = if remaining < dt { remaining } else { dt };
        let k1 = f(y);
        let k2 = f(y + half * h * k1);
        let k3 = f(y + half * h * k2);
        let k4 = f(y + h * k3);
        y = y + h * sixth * (k1 + two * (k2 + k3) + k4);
        let t_next = if remaining < dt { t_end } else { F::from_usize(step_index + 1).unwrap() * dt };

        match ceiling {
            Some(cap) if !y.is_finite() || y > cap => {
                return Ok(Rk4Output { trajectory, ceiling_hit_at: Some(t_next) });
            }
            None if !y.is_finite() => {
                return Err(Error::Numerical(format!(
                    "state became non-finite at step {} (t = {t_next})",
                    step_index + 1
                )));
            }
            _ => {}
        }
        trajectory.push((t_next, y));
        step_index += 1;
        if remaining < dt {
            break;
        }
    }
    Ok(Rk4Output { trajectory, ceiling_hit_at: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(a: f64, b: f64, p: f64, m0: f64) -> GrowthParams<f64> {
        GrowthParams::new(a, b, p, m0).unwrap()
    }

    #[test]
    fn asymptote_direct_substitution() {
        assert_relative_eq!(asymptotic_mass(&params(1.0, 1.0, 0.75, 0.5)), 1.0, max_relative = 1e-12);
        assert_relative_eq!(asymptotic_mass(&params(1.0, 0.5, 0.75, 1.0)), 16.0, max_relative = 1e-12);
        assert_relative_eq!(asymptotic_mass(&params(3.0, 1.0, 2.0 / 3.0, 1.0)), 27.0, max_relative = 1e-12);
    }

    #[test]
    fn asymptote_is_fixed_point() {
        // a·M^p = b·M at the asymptote
        for (a, b, p) in [(1.0, 0.5, 0.75), (2.5, 0.3, 0.6), (3.0, 1.0, 2.0 / 3.0)] {
            let m = asymptotic_mass(&params(a, b, p, 1e-6));
            let law = crate::scaling::PowerLaw::new(a, p).unwrap();
            assert_relative_eq!(law.eval(m).unwrap(), b * m, max_relative = 1e-12);
        }
    }

    #[test]
    fn supercritical_exponent_rejected() {
        assert!(matches!(GrowthParams::new(1.0, 1.0, 1.0, 0.5), Err(Error::Domain(_))));
        assert!(matches!(GrowthParams::new(1.0, 1.0, 1.2, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn initial_mass_above_asymptote_rejected() {
        assert!(GrowthParams::new(1.0, 0.5, 0.75, 17.0).is_err());
        assert!(GrowthParams::new(1.0, 0.5, 0.75, 16.0).is_ok());
    }

    #[test]
    fn fixed_point_initial_mass_stays_constant() {
        let p = params(1.0, 0.5, 0.75, 16.0);
        let traj = integrate_growth(&p, 10.0, 0.01).unwrap();
        for &(_, m) in &traj {
            assert_relative_eq!(m, 16.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn converges_to_asymptote() {
        let p = params(1.0, 0.5, 0.75, 1.0);
        let traj = integrate_growth(&p, 120.0, 0.01).unwrap();
        let (_, m_final) = *traj.last().unwrap();
        assert_relative_eq!(m_final, 16.0, max_relative = 1e-3);
        // monotone non-decreasing from below the asymptote
        for w in traj.windows(2) {
            assert!(w[1].1 >= w[0].1);
        }
    }

    #[test]
    fn analytic_initial_and_limit() {
        let p = params(1.0, 0.5, 0.75, 1.0);
        assert_relative_eq!(growth_analytic(&p, 0.0).unwrap(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(growth_analytic(&p, 1e4).unwrap(), 16.0, max_relative = 1e-12);
    }

    #[test]
    fn analytic_rejects_other_exponents() {
        let p = params(1.0, 1.0, 0.5, 0.5);
        assert!(matches!(growth_analytic(&p, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn rk4_matches_analytic_closed_form() {
        // cross-validation of the two routes: fine-step RK4 vs closed form
        let p = params(1.3, 0.4, 0.75, 0.7);
        let time_scale = 4.0 * asymptotic_mass(&p).powf(0.25) / 1.3;
        let dt = 1e-3 * time_scale;
        let t_end = 5.0 * time_scale;
        let traj = integrate_growth(&p, t_end, dt).unwrap();
        let stride = traj.len() / 100;
        for (t, m) in traj.iter().copied().step_by(stride.max(1)) {
            let exact = growth_analytic(&p, t).unwrap();
            assert_relative_eq!(m, exact, max_relative = 1e-6);
        }
    }

    #[test]
    fn halving_dt_is_invariant_within_tolerance() {
        let p = params(1.0, 0.5, 0.75, 1.0);
        let coarse = integrate_growth(&p, 8.0, 0.02).unwrap();
        let fine = integrate_growth(&p, 8.0, 0.01).unwrap();
        for (i, &(t, m)) in coarse.iter().enumerate() {
            let (tf, mf) = fine[2 * i];
            assert_eq!(t, tf);
            assert_relative_eq!(m, mf, max_relative = 1e-6);
        }
    }

    #[test]
    fn step_configuration_errors() {
        let p = params(1.0, 0.5, 0.75, 1.0);
        assert!(matches!(integrate_growth(&p, 1.0, 1.0), Err(Error::Config(_))));
        assert!(matches!(integrate_growth(&p, 1.0, 2.0), Err(Error::Config(_))));
        assert!(matches!(integrate_growth(&p, 1.0, 0.0), Err(Error::Config(_))));
        assert!(matches!(integrate_growth(&p, -1.0, 0.1), Err(Error::Config(_))));
    }

    #[test]
    fn city_gamma_three_quarters_reduces_to_growth_equation() {
        let cp = CityGrowthParams::new(1.0, 0.5, 0.75, 1.0).unwrap();
        let gp = params(1.0, 0.5, 0.75, 1.0);
        let city = city_growth(&cp, 80.0, 0.01, None).unwrap();
        let growth = integrate_growth(&gp, 80.0, 0.01).unwrap();
        assert!(city.blow_up.is_none());
        // identical vector field, identical integrator: bitwise equal
        assert_eq!(city.trajectory, growth);
        assert_relative_eq!(city.trajectory.last().unwrap().1, 16.0, max_relative = 1e-3);
    }

    #[test]
    fn city_balanced_linear_case_is_constant() {
        let cp = CityGrowthParams::new(2.0, 2.0, 1.0, 5.0).unwrap();
        let out = city_growth(&cp, 10.0, 0.01, None).unwrap();
        assert!(out.blow_up.is_none());
        for &(_, n) in &out.trajectory {
            assert_relative_eq!(n, 5.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn city_subcritical_converges_to_fixed_point() {
        let cp = CityGrowthParams::new(2.0, 1.0, 0.5, 0.3).unwrap();
        let fixed = cp.subcritical_fixed_point().unwrap();
        assert_relative_eq!(fixed, 4.0, max_relative = 1e-12);
        let out = city_growth(&cp, 60.0, 0.005, None).unwrap();
        assert!(out.blow_up.is_none());
        assert_relative_eq!(out.trajectory.last().unwrap().1, 4.0, max_relative = 1e-4);
    }

    #[test]
    fn city_supercritical_blows_up_and_is_step_stable() {
        let cp = CityGrowthParams::new(1.0, 0.1, 1.2, 10.0).unwrap();
        let coarse = city_growth(&cp, 50.0, 0.01, None).unwrap();
        let fine = city_growth(&cp, 50.0, 0.001, None).unwrap();
        let tc = coarse.blow_up.expect("coarse run must blow up");
        let tf = fine.blow_up.expect("fine run must blow up");
        assert_relative_eq!(tc, tf, max_relative = 0.01);
    }

    #[test]
    fn final_point_lands_on_t_end() {
        let p = params(1.0, 0.5, 0.75, 1.0);
        // 0.3 not an integer multiple of 0.07: exercises the shortened step
        let traj = integrate_growth(&p, 0.3, 0.07).unwrap();
        assert_eq!(traj.last().unwrap().0, 0.3);
    }
}
