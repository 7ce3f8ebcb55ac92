//! Walks the marginality-principle LASSO down its lambda path on a
//! downscaled benchmark dataset, printing how the support grows as the
//! candidate set opens up, and the tuned final model.
//!
//! ```bash
//! cargo run --release --example lasso_path -- [seed]
//! ```

use std::collections::BTreeSet;

use hierlin::data::{generate_response, sample_design, table1_spec_with_p, Dataset, DesignConfig};
use hierlin::lasso::{
    coordinate_descent, iform_lasso, lambda_max, LambdaGrid, StandardizedColumns,
};
use hierlin::rng::{stream_seed, StreamPurpose};
use hierlin::{Criterion, DesignFamily, EffectId};

fn main() {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(42);
    let (n, p) = (200, 20);

    let truth = table1_spec_with_p(p);
    let design = DesignConfig {
        n,
        p,
        family: DesignFamily::GaussianAr1 { rho: 0.5 },
        seed: stream_seed(seed, 0, StreamPurpose::TrainDesign),
    };
    let x = sample_design(&design).expect("design");
    let y = generate_response(&x, &truth, stream_seed(seed, 0, StreamPurpose::TrainNoise));
    let data = Dataset::new(x, y, Some(truth));

    let mut cols = StandardizedColumns::new(&data.x);
    let mains: BTreeSet<EffectId> = (1..=p).map(EffectId::Main).collect();
    let lmax = lambda_max(&mut cols, &data.y, &mains);
    println!("lambda_max = {lmax:.4} (the smallest lambda with an all-zero fit)");

    // A coarse standalone path over the mains shows the solver itself.
    let coarse = LambdaGrid::log_spaced(lmax, 8, 1e-2);
    let mut warm = None;
    println!("\nmains-only coordinate descent down a coarse grid:");
    for &lambda in &coarse.values {
        let state =
            coordinate_descent(&mut cols, &data.y, lambda, warm.as_ref(), &mains).expect("solve");
        let support: Vec<String> = state.coefficients.keys().map(|e| e.label()).collect();
        println!(
            "  lambda = {lambda:>8.4}  support ({:>2}): {}",
            support.len(),
            support.join(", ")
        );
        warm = Some(state);
    }
    drop(cols);

    // The full selector: dynamic candidate sets plus criterion tuning.
    let grid = LambdaGrid::default_for(lmax);
    let result = iform_lasso(&data, &grid, &Criterion::Ebic { gamma_e: 0.5 }).expect("path");
    println!("\ntuned model (dynamic candidate sets, EBIC on refits):");
    for step in &result.path {
        println!(
            "  {:<8} rss after refit prefix = {:>10.3}",
            step.effect.label(),
            step.rss
        );
    }
    println!("\ncoefficients (least-squares refit, original scale):");
    println!("  intercept {:+.3}", result.intercept);
    for (e, b) in &result.coefficients {
        println!("  {:<8} {b:+.3}", e.label());
    }
}
