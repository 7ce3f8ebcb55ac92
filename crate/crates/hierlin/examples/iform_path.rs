//! Walks one iFORM selection path on the benchmark design and prints every
//! step: the effect entering, the residual sum of squares, and the
//! criterion value, followed by the tuned model.
//!
//! ```bash
//! cargo run --release --example iform_path -- [seed] [p]
//! ```

use hierlin::data::{generate_response, sample_design, table1_spec_with_p, Dataset, DesignConfig};
use hierlin::forward::{default_max_steps, iform};
use hierlin::rng::{stream_seed, StreamPurpose};
use hierlin::{Criterion, DesignFamily};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(42);
    let p: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let n = 200;

    let truth = table1_spec_with_p(p);
    let design = DesignConfig {
        n,
        p,
        family: DesignFamily::GaussianAr1 { rho: 0.5 },
        seed: stream_seed(seed, 0, StreamPurpose::TrainDesign),
    };
    let x = sample_design(&design).expect("valid design");
    let y = generate_response(&x, &truth, stream_seed(seed, 0, StreamPurpose::TrainNoise));
    let data = Dataset::new(x, y, Some(truth.clone()));

    let criterion = Criterion::Ebic { gamma_e: 1.0 };
    let result = iform(&data, &criterion, default_max_steps(n)).expect("selection");

    println!("iFORM path on n = {n}, p = {p} (seed {seed}):");
    println!(
        "{:>4}  {:<10} {:>14} {:>14}",
        "step", "effect", "rss", "criterion"
    );
    for (t, step) in result.path.iter().enumerate() {
        let marker = if t < result.selected.len() { ' ' } else { '*' };
        println!(
            "{:>4}{marker} {:<10} {:>14.4} {:>14.4}",
            t + 1,
            step.effect.label(),
            step.rss,
            step.criterion
        );
    }
    println!("(* = explored but not kept by the criterion)");

    let kept: Vec<String> = result.selected.iter().map(|e| e.label()).collect();
    println!("\nselected ({} effects): {}", kept.len(), kept.join(", "));
    println!("intercept: {:+.4}", result.intercept);
    for (e, b) in &result.coefficients {
        let truth_val = match *e {
            hierlin::EffectId::Main(j) => truth.beta[j - 1],
            hierlin::EffectId::Interaction(j, k) => truth.gamma_at(j, k),
        };
        println!("  {:<10} {:+.4}   (truth {:+.1})", e.label(), b, truth_val);
    }
}
