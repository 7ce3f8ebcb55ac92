//! Generates one benchmark dataset and dumps it as CSV (`X1..Xp,Y`, 17
//! significant digits per value) for cross-checking against external
//! statistical software.
//!
//! ```bash
//! cargo run --release --example export_dataset -- out.csv [n] [p] [seed]
//! ```

use hierlin::data::{generate_response, sample_design, table1_spec_with_p, Dataset, DesignConfig};
use hierlin::rng::{stream_seed, StreamPurpose};
use hierlin::DesignFamily;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let path = args.get(1).cloned().unwrap_or_else(|| "dataset.csv".into());
    let n: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(200);
    let p: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(50);
    let seed: u64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(42);

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

    let mut file = std::io::BufWriter::new(std::fs::File::create(&path).expect("create file"));
    data.write_csv(&mut file).expect("write csv");
    println!(
        "wrote {} rows x {} predictors to {path}",
        data.n(),
        data.p()
    );
    println!("truth: beta = 2 on X1,X3,X5,X7,X9; gamma on (1,3),(1,7),(5,7),(7,9); sigma = 2");
}
