//! Slope-recovery study for the log-log fit: data generated from a known
//! power law with multiplicative lognormal noise must put the true exponent
//! inside slope ± 3·stderr in at least 99% of seeded trials.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use radar_core::scaling::loglog_fit;

#[test]
fn known_exponent_recovered_within_three_stderr() {
    let true_exponent = 0.75;
    let coefficient = 5.0;
    let noise = Normal::new(0.0, 0.05).unwrap();
    let trials = 1000;
    let mut covered = 0;

    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(9000 + trial);
        let points: Vec<(f64, f64)> = (0..50)
            .map(|_| {
                let x = 10f64.powf(rng.random_range(0.0..2.0));
                let eps: f64 = noise.sample(&mut rng);
                (x, coefficient * x.powf(true_exponent) * eps.exp())
            })
            .collect();
        let fit = loglog_fit(&points).unwrap();
        let stderr = fit.slope_stderr;
        assert!(stderr > 0.0, "noisy data cannot fit perfectly");
        if (fit.slope - true_exponent).abs() <= 3.0 * stderr {
            covered += 1;
        }
        // the trend is unmissable at this noise level
        assert!(fit.p_value.unwrap() < 1e-10);
    }
    let coverage = covered as f64 / trials as f64;
    assert!(coverage >= 0.99, "coverage {coverage} below 0.99 ({covered}/{trials})");
}
