//! Runs the benchmark simulation through the library API and prints the
//! metrics table: two-stage forward selection and iFORM against the oracle
//! fit on an AR(1) Gaussian design with five true mains and four true
//! interactions.
//!
//! The default is a downscaled run (p = 100, 20 replicates) that finishes
//! in about a second; pass `--full` for the full n = 200, p = 1000, 100
//! replicate study (the same thing `hierlin table1` produces).
//!
//! ```bash
//! cargo run --release --example table1 -- [--full] [seed]
//! ```

use hierlin::config::table1_config;
use hierlin::data::table1_spec_with_p;
use hierlin::evaluation::{monte_carlo, Method, MetricsReport};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let full = args.iter().any(|a| a == "--full");
    let seed: u64 = args
        .iter()
        .skip(1)
        .find(|a| *a != "--full")
        .and_then(|s| s.parse().ok())
        .unwrap_or(42);

    let methods = [Method::TwoStageFs, Method::Iform, Method::Oracle];
    let mut reports: Vec<MetricsReport> = Vec::new();
    for method in methods {
        let mut cfg = table1_config(method, if full { 100 } else { 20 }, seed);
        if !full {
            cfg.design.p = 100;
            cfg.truth = table1_spec_with_p(100);
        }
        let report = monte_carlo(&cfg).expect("monte carlo");
        reports.push(report);
    }

    println!(
        "{} replicates, p = {}, seed {seed}",
        reports[0].replicates,
        if full { 1000 } else { 100 }
    );
    println!("{}", MetricsReport::CSV_HEADER);
    for r in &reports {
        println!("{}", r.csv_row());
    }
    println!("\ncolumns: Cov/Ext cover and exactly recover the main set; the i-variants");
    println!("score interactions; size counts selected effects; MSE is the coefficient");
    println!("l2 error; Rsq is out-of-sample R^2 in percent.");
}
