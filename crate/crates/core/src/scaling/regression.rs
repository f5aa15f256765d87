use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::scalar::{cst, Real};

/// Ordinary least-squares fit summary.
///
/// `p_value` is the two-sided t-test of the slope against zero with `n−2`
/// degrees of freedom; it is `None` for perfect fits (zero residual), where
/// the test statistic is undefined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionResult<F> {
    pub slope: F,
    pub intercept: F,
    pub r_squared: F,
    pub slope_stderr: F,
    pub p_value: Option<F>,
    pub n_points: usize,
}

/// OLS of `y` on `x`.
///
/// Needs at least 3 points and non-zero variance in `x`. Residual sums that
/// are indistinguishable from rounding noise are snapped to an exact fit.
pub fn linear_fit<F: Real>(points: &[(F, F)]) -> Result<RegressionResult<F>> {
    let n = points.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 points, got {n}")));
    }
    let nf = F::from_usize(n).unwrap();
    let mean_x = points.iter().fold(F::zero(), |s, &(x, _)| s + x) / nf;
    let mean_y = points.iter().fold(F::zero(), |s, &(_, y)| s + y) / nf;

    let mut sxx = F::zero();
    let mut sxy = F::zero();
    let mut syy = F::zero();
    for &(x, y) in points {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if sxx <= F::zero() {
        return Err(Error::DegenerateFit("zero variance in the predictor".into()));
    }

    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;

    let mut ssr = syy - slope * sxy;
    // Snap rounding noise to an exact fit so perfect power laws report
    // r² = 1 and an undefined p-value rather than garbage near-zeros.
    if ssr <= syy * F::epsilon() * cst::<F>(64.0) {
        ssr = F::zero();
    }
    let r_squared = if syy == F::zero() {
        F::one()
    } else {
        (F::one() - ssr / syy).max(F::zero()).min(F::one())
    };

    let df = nf - cst::<F>(2.0);
    let slope_stderr = (ssr / df / sxx).sqrt();
    let p_value = if slope_stderr > F::zero() {
        let t = (slope / slope_stderr).abs().to_f64().unwrap();
        let dist = StudentsT::new(0.0, 1.0, df.to_f64().unwrap())
            .map_err(|e| Error::Numerical(format!("t-distribution: {e}")))?;
        Some(cst::<F>(2.0 * dist.sf(t)))
    } else {
        None
    };

    Ok(RegressionResult { slope, intercept, r_squared, slope_stderr, p_value, n_points: n })
}

/// OLS on `(ln x, ln y)`; the slope estimates the scaling exponent.
pub fn loglog_fit<F: Real>(points: &[(F, F)]) -> Result<RegressionResult<F>> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let mut logged = Vec::with_capacity(points.len());
    for &(x, y) in points {
        if !(x > F::zero() && y > F::zero()) {
            return Err(Error::Domain(format!(
                "log-log fit requires strictly positive coordinates, got ({x}, {y})"
            )));
        }
        logged.push((x.ln(), y.ln()));
    }
    linear_fit(&logged)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_square_law() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x| (x, x * x)).collect();
        let fit = loglog_fit(&pts).unwrap();
        assert_relative_eq!(fit.slope, 2.0, max_relative = 1e-12);
        assert_eq!(fit.r_squared, 1.0);
        assert_eq!(fit.slope_stderr, 0.0);
        assert!(fit.p_value.is_none());
        assert_eq!(fit.n_points, 4);
    }

    #[test]
    fn constant_y_has_zero_slope() {
        let pts: Vec<(f64, f64)> = [1.0, 3.0, 9.0, 27.0].iter().map(|&x| (x, 5.0)).collect();
        let fit = loglog_fit(&pts).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 1.0);
        assert!(fit.p_value.is_none());
    }

    #[test]
    fn noisy_fit_has_defined_p_value() {
        let pts = [(1.0, 1.1), (2.0, 1.9), (3.0, 3.2), (4.0, 3.8), (5.0, 5.1)];
        let fit = linear_fit(&pts).unwrap();
        let p = fit.p_value.expect("noisy fit has a p-value");
        assert!(p > 0.0 && p < 0.01, "strong trend should be significant, p = {p}");
        assert!(fit.r_squared > 0.95 && fit.r_squared < 1.0);
    }

    #[test]
    fn insufficient_points() {
        assert!(matches!(
            loglog_fit(&[(1.0_f64, 1.0), (2.0, 2.0)]),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn nonpositive_coordinates_rejected() {
        assert!(matches!(
            loglog_fit(&[(1.0_f64, 1.0), (0.0, 2.0), (3.0, 3.0)]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            loglog_fit(&[(1.0_f64, 1.0), (2.0, -2.0), (3.0, 3.0)]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn zero_x_variance_is_degenerate() {
        assert!(matches!(
            loglog_fit(&[(2.0_f64, 1.0), (2.0, 2.0), (2.0, 3.0)]),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn p_value_matches_known_flat_case() {
        // slope indistinguishable from zero: p should be large
        let pts = [(1.0, 2.0), (2.0, 2.1), (3.0, 1.9), (4.0, 2.05), (5.0, 1.95)];
        let fit = linear_fit(&pts).unwrap();
        assert!(fit.p_value.unwrap() > 0.5);
    }
}
