//! Numerical certification of the identity behind two-stage selection:
//! when the predictor distribution is symmetric about its mean, centered
//! interaction columns are uncorrelated with every main effect, so the
//! misspecified mains-only regression still recovers the true main
//! coefficients in population.
//!
//! The first check runs on a symmetric AR(1) Gaussian design (the identity
//! holds); the second on the uniform Turlach construction, whose asymmetry
//! breaks it — the slope of X1 collapses to zero while the truth is -1.
//!
//! ```bash
//! cargo run --release --example block_covariance -- [n_big]
//! ```

use hierlin::data::{table1_spec_with_p, turlach_spec, DesignConfig, DesignFamily};
use hierlin::evaluation::prop2_check;

fn main() {
    let n_big: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(500_000);

    let truth = table1_spec_with_p(10);
    let design = DesignConfig {
        n: n_big,
        p: 10,
        family: DesignFamily::GaussianAr1 { rho: 0.5 },
        seed: 42,
    };
    let report = prop2_check(&design, &truth).expect("check");
    println!("symmetric AR(1) design, n = {n_big}, p = 10:");
    println!("  true beta:    {:?}", truth.beta);
    println!(
        "  fitted slope: {:?}",
        report
            .fitted_slopes
            .iter()
            .map(|v| (v * 1000.0).round() / 1000.0)
            .collect::<Vec<_>>()
    );
    println!("  max |slope - beta| = {:.5}\n", report.max_abs_deviation);

    let truth = turlach_spec();
    let design = DesignConfig {
        n: n_big,
        p: 10,
        family: DesignFamily::Uniform01,
        seed: 43,
    };
    let report = prop2_check(&design, &truth).expect("check");
    println!("asymmetric uniform design (Turlach), n = {n_big}:");
    println!(
        "  slope of X1 = {:.5} while beta_1 = {}: the quadratic's linear trace",
        report.fitted_slopes[0], truth.beta[0]
    );
    println!("  cancels exactly, so stage one has nothing to find.");
}
