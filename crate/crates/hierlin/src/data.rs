//! Reproducible data generating processes.
//!
//! Two designs are supported: a multivariate Gaussian with autoregressive
//! correlation `Cov(X_j, X_k) = rho^|j-k|`, and i.i.d. Unif\[0,1\] predictors.
//! Responses follow the quadratic model of a [`QuadraticModelSpec`]. Every
//! sampling operation is a pure function of its inputs and a 64-bit seed.

use std::io::Write;

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::linalg::{mean, Matrix};
use crate::model::QuadraticModelSpec;
use crate::rng::rng_from_seed;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("invalid design: {0}")]
    InvalidDesign(String),
}

/// Predictor distribution family.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub enum DesignFamily {
    /// Mean-zero Gaussian with covariance `rho^|j-k|`, `|rho| < 1`.
    GaussianAr1 { rho: f64 },
    /// Independent Unif\[0,1\] coordinates.
    Uniform01,
}

/// Configuration of one design draw.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct DesignConfig {
    pub n: usize,
    pub p: usize,
    pub family: DesignFamily,
    pub seed: u64,
}

impl DesignConfig {
    pub fn validate(&self) -> Result<(), DataError> {
        if self.n < 2 {
            return Err(DataError::InvalidDesign(format!(
                "n must be >= 2, got {}",
                self.n
            )));
        }
        if self.p < 1 {
            return Err(DataError::InvalidDesign("p must be >= 1".into()));
        }
        if let DesignFamily::GaussianAr1 { rho } = self.family {
            if !(rho.abs() < 1.0) {
                return Err(DataError::InvalidDesign(format!(
                    "AR(1) requires |rho| < 1, got {rho}"
                )));
            }
        }
        Ok(())
    }
}

/// One generated data set: raw predictors, response, and (optionally) the
/// truth that produced it.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub x: Matrix,
    pub y: Vec<f64>,
    /// Sample means of the raw predictor columns.
    pub column_means: Vec<f64>,
    pub truth: Option<QuadraticModelSpec>,
}

impl Dataset {
    pub fn new(x: Matrix, y: Vec<f64>, truth: Option<QuadraticModelSpec>) -> Self {
        assert_eq!(x.rows, y.len(), "x and y must have matching lengths");
        if let Some(t) = &truth {
            assert_eq!(t.p, x.cols, "truth dimension must match the design");
        }
        let column_means = (0..x.cols).map(|j| mean(&x.column(j))).collect();
        Dataset {
            x,
            y,
            column_means,
            truth,
        }
    }

    pub fn n(&self) -> usize {
        self.x.rows
    }

    pub fn p(&self) -> usize {
        self.x.cols
    }

    /// Dumps the data as CSV (`X1,...,Xp,Y`) with 17 significant digits,
    /// enough to reconstruct every f64 exactly.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let header: Vec<String> = (1..=self.p()).map(|j| format!("X{j}")).collect();
        writeln!(out, "{},Y", header.join(","))?;
        for i in 0..self.n() {
            let mut line = String::new();
            for j in 0..self.p() {
                line.push_str(&format!("{:.16e},", self.x.get(i, j)));
            }
            line.push_str(&format!("{:.16e}", self.y[i]));
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// The AR(1) covariance matrix `Sigma[j][k] = rho^|j-k|`.
pub fn ar1_covariance(p: usize, rho: f64) -> Matrix {
    assert!(rho.abs() < 1.0, "|rho| must be < 1");
    let mut m = Matrix::zeros(p, p);
    for j in 0..p {
        for k in 0..p {
            m.set(j, k, rho.powi((j as i32 - k as i32).abs()));
        }
    }
    m
}

/// Draws an `n x p` predictor sample.
///
/// The Gaussian family multiplies i.i.d. standard normals by the Cholesky
/// factor of [`ar1_covariance`]. For AR(1) that factor has the closed form
/// `L[j][0] = rho^j`, `L[j][k] = rho^(j-k) sqrt(1 - rho^2)` for `k >= 1`,
/// which turns the row transform `L z` into the first-order recursion
/// `x_0 = z_0`, `x_j = rho x_{j-1} + sqrt(1 - rho^2) z_j`; the recursion is
/// what is evaluated here (the equality with the dense factor is pinned by a
/// unit test). Normals are drawn row by row with the ziggurat sampler, so
/// the output is a pure function of the seed.
pub fn sample_design(cfg: &DesignConfig) -> Result<Matrix, DataError> {
    cfg.validate()?;
    let mut rng = rng_from_seed(cfg.seed);
    let mut data = vec![0.0; cfg.n * cfg.p];
    match cfg.family {
        DesignFamily::GaussianAr1 { rho } => {
            let scale = (1.0 - rho * rho).sqrt();
            for i in 0..cfg.n {
                let row = &mut data[i * cfg.p..(i + 1) * cfg.p];
                let mut prev = 0.0;
                for (j, slot) in row.iter_mut().enumerate() {
                    let z: f64 = rng.sample(StandardNormal);
                    let x = if j == 0 { z } else { rho * prev + scale * z };
                    *slot = x;
                    prev = x;
                }
            }
        }
        DesignFamily::Uniform01 => {
            for slot in data.iter_mut() {
                *slot = rng.random::<f64>();
            }
        }
    }
    Ok(Matrix::new(cfg.n, cfg.p, data))
}

/// Synthesizes the response `y_i = signal(x_i) + sigma * eps_i` with
/// `eps_i` i.i.d. standard normal drawn from `seed`.
pub fn generate_response(x: &Matrix, spec: &QuadraticModelSpec, seed: u64) -> Vec<f64> {
    assert_eq!(spec.p, x.cols, "spec dimension must match the design");
    let mut rng = rng_from_seed(seed);
    (0..x.rows)
        .map(|i| {
            let eps: f64 = rng.sample(StandardNormal);
            spec.signal(x.row(i)) + spec.sigma * eps
        })
        .collect()
}

/// The elementwise product column `x_j * x_k` (1-based indices), optionally
/// centered by its own sample mean.
pub fn interaction_column(x: &Matrix, j: usize, k: usize, centered: bool) -> Vec<f64> {
    assert!(
        j >= 1 && j <= x.cols && k >= 1 && k <= x.cols,
        "index out of range"
    );
    let mut col: Vec<f64> = (0..x.rows)
        .map(|i| x.get(i, j - 1) * x.get(i, k - 1))
        .collect();
    if centered {
        let m = mean(&col);
        for v in col.iter_mut() {
            *v -= m;
        }
    }
    col
}

/// Turlach's counterexample process in raw coordinates:
/// `Y = (X_1 - 0.5)^2 + X_2 + X_3 + X_4 + X_5 + eps` on ten Unif\[0,1\]
/// predictors, expanded to `beta0 = 1/4`, `beta_1 = -1`,
/// `beta_2..5 = 1`, `gamma_11 = 1`, `sigma = 1`.
pub fn turlach_spec() -> QuadraticModelSpec {
    turlach_spec_shifted(0.5)
}

/// The `(X_1 - c)^2` family around Turlach's process; `c = 0.5` is the
/// adversarial case where `Cov(Y, X_1) = 0`.
pub fn turlach_spec_shifted(c: f64) -> QuadraticModelSpec {
    let p = 10;
    let mut beta = vec![0.0; p];
    beta[0] = -2.0 * c;
    for j in 2..=5 {
        beta[j - 1] = 1.0;
    }
    QuadraticModelSpec::new(p, c * c, beta, 1.0, false).with_gamma(1, 1, 1.0)
}

/// The benchmark truth used by the `table1` experiment: `p = 1000`,
/// `beta_j = 2` on `{1,3,5,7,9}`, interactions `gamma_13 = 1.5`,
/// `gamma_17 = 1.7`, `gamma_57 = 1.9`, `gamma_79 = 2.1`, `sigma = 2`.
pub fn table1_spec() -> QuadraticModelSpec {
    table1_spec_with_p(1000)
}

/// The same coefficient pattern embedded in an ambient dimension `p >= 10`;
/// useful for downscaled experiments.
pub fn table1_spec_with_p(p: usize) -> QuadraticModelSpec {
    assert!(p >= 10, "the pattern needs p >= 10");
    let mut beta = vec![0.0; p];
    for j in [1, 3, 5, 7, 9] {
        beta[j - 1] = 2.0;
    }
    QuadraticModelSpec::new(p, 0.0, beta, 2.0, true)
        .with_gamma(1, 3, 1.5)
        .with_gamma(1, 7, 1.7)
        .with_gamma(5, 7, 1.9)
        .with_gamma(7, 9, 2.1)
}
