//! Model-comparison criteria and fit statistics.
//!
//! Selection is tuned by BIC or the extended BIC
//!
//! ```text
//! BIC  = n ln(RSS/n) + k ln n
//! EBIC = BIC + 2 gamma_e k ln d
//! ```
//!
//! where `k` counts fitted effects (the intercept is free) and `d` is the
//! ambient candidate count of the pool the model was selected from. Lower is
//! better. Selectors instantiate the ambient dimension per stage:
//! the main pool has `d = p`, a stage-two interaction pool has
//! `d = m(m+1)/2`, and a dynamically grown pool uses its current size.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{EffectId, QuadraticModelSpec};

#[derive(Debug, Error, PartialEq)]
pub enum CriteriaError {
    #[error("domain error: {0}")]
    Domain(String),
}

/// A fully instantiated criterion, ready to score one model.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub enum CriterionKind {
    Bic,
    Ebic { gamma_e: f64, ambient_dim: usize },
}

/// A criterion family; selectors bind the EBIC ambient dimension to the
/// candidate pool of each stage via [`Criterion::with_ambient`].
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub enum Criterion {
    Bic,
    Ebic { gamma_e: f64 },
}

/// Default EBIC weight when an experiment does not choose one.
pub const DEFAULT_EBIC_GAMMA: f64 = 0.5;

impl Criterion {
    pub fn with_ambient(&self, ambient_dim: usize) -> CriterionKind {
        match *self {
            Criterion::Bic => CriterionKind::Bic,
            Criterion::Ebic { gamma_e } => CriterionKind::Ebic {
                gamma_e,
                ambient_dim: ambient_dim.max(1),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            Criterion::Bic => "bic".into(),
            Criterion::Ebic { gamma_e } => format!("ebic(gamma_e={gamma_e})"),
        }
    }
}

/// Scores a model with `k` fitted effects and residual sum of squares `rss`
/// on `n` observations. `rss` must be positive; perfect fits are expected to
/// be capped upstream (for example at `1e-12 * ||y||^2`).
pub fn criterion_value(
    kind: &CriterionKind,
    rss: f64,
    n: usize,
    k: usize,
) -> Result<f64, CriteriaError> {
    if !(rss > 0.0) {
        return Err(CriteriaError::Domain(format!(
            "criterion needs rss > 0, got {rss}"
        )));
    }
    if n <= k {
        return Err(CriteriaError::Domain(format!(
            "need n > k, got n={n}, k={k}"
        )));
    }
    let n_f = n as f64;
    let bic = n_f * (rss / n_f).ln() + (k as f64) * n_f.ln();
    Ok(match *kind {
        CriterionKind::Bic => bic,
        CriterionKind::Ebic {
            gamma_e,
            ambient_dim,
        } => bic + 2.0 * gamma_e * (k as f64) * (ambient_dim as f64).ln(),
    })
}

/// Out-of-sample R^2 in percent: `100 (1 - SSE / SST)` with SST about the
/// test-set mean. Errors when the test response is constant.
pub fn r_squared_oos(y_test: &[f64], y_pred: &[f64]) -> Result<f64, CriteriaError> {
    if y_test.len() != y_pred.len() || y_test.len() < 2 {
        return Err(CriteriaError::Domain(
            "test and prediction vectors must share a length >= 2".into(),
        ));
    }
    let m = y_test.iter().sum::<f64>() / y_test.len() as f64;
    let sst: f64 = y_test.iter().map(|v| (v - m) * (v - m)).sum();
    if sst <= 0.0 {
        return Err(CriteriaError::Domain("constant test response".into()));
    }
    let sse: f64 = y_test
        .iter()
        .zip(y_pred)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(100.0 * (1.0 - sse / sst))
}

/// Squared coefficient error summed over all `d = (p^2 + 3p)/2` coordinates
/// (mains plus canonical interactions); coordinates absent from either side
/// count as zero. The intercept is not included.
pub fn coefficient_mse(estimated: &BTreeMap<EffectId, f64>, truth: &QuadraticModelSpec) -> f64 {
    let mut total = 0.0;
    // Truth coordinates, subtracting whatever the estimate has there.
    for j in 1..=truth.p {
        let t = truth.beta[j - 1];
        let e = estimated.get(&EffectId::Main(j)).copied().unwrap_or(0.0);
        total += (e - t) * (e - t);
    }
    for (&(j, k), &g) in &truth.gamma {
        let e = estimated
            .get(&EffectId::interaction(j, k))
            .copied()
            .unwrap_or(0.0);
        total += (e - g) * (e - g);
    }
    // Estimated interactions outside the truth support are pure error.
    for (id, &e) in estimated {
        if let EffectId::Interaction(j, k) = id {
            if truth.gamma_at(*j, *k) == 0.0 {
                total += e * e;
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bic() -> CriterionKind {
        CriterionKind::Bic
    }

    fn ebic(gamma_e: f64, d: usize) -> CriterionKind {
        CriterionKind::Ebic {
            gamma_e,
            ambient_dim: d,
        }
    }

    #[test]
    fn null_model_is_pure_likelihood_term() {
        let expected = 100.0 * (2.5_f64).ln();
        assert_eq!(criterion_value(&bic(), 250.0, 100, 0).unwrap(), expected);
        assert_eq!(
            criterion_value(&ebic(0.7, 500), 250.0, 100, 0).unwrap(),
            expected
        );
    }

    #[test]
    fn ebic_with_zero_weight_is_bic() {
        for k in 0..6 {
            let a = criterion_value(&bic(), 80.0, 60, k).unwrap();
            let b = criterion_value(&ebic(0.0, 1000), 80.0, 60, k).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn bic_direct_arithmetic() {
        // n ln(rss/n) + k ln n = 100 ln 1 + 5 ln 100.
        let v = criterion_value(&bic(), 100.0, 100, 5).unwrap();
        assert!((v - 5.0 * 100.0_f64.ln()).abs() < 1e-12);
        assert!((v - 23.025850929940457).abs() < 1e-10);
    }

    #[test]
    fn criterion_is_increasing_in_k_and_rss() {
        for kind in [bic(), ebic(0.5, 200), ebic(1.0, 10_000)] {
            let mut prev = criterion_value(&kind, 50.0, 100, 0).unwrap();
            for k in 1..10 {
                let v = criterion_value(&kind, 50.0, 100, k).unwrap();
                assert!(v > prev, "{kind:?} not increasing in k");
                prev = v;
            }
            let mut prev = criterion_value(&kind, 1.0, 100, 3).unwrap();
            for i in 1..10 {
                let v = criterion_value(&kind, 1.0 + i as f64, 100, 3).unwrap();
                assert!(v > prev, "{kind:?} not increasing in rss");
                prev = v;
            }
        }
    }

    #[test]
    fn ebic_dominates_bic_unless_trivial() {
        for k in 0..5 {
            for gamma_e in [0.0, 0.5, 1.0] {
                let b = criterion_value(&bic(), 75.0, 100, k).unwrap();
                let e = criterion_value(&ebic(gamma_e, 300), 75.0, 100, k).unwrap();
                assert!(e >= b);
                if gamma_e * k as f64 == 0.0 {
                    assert_eq!(e, b);
                } else {
                    assert!(e > b);
                }
            }
        }
    }

    #[test]
    fn nonpositive_rss_is_rejected() {
        assert!(criterion_value(&bic(), 0.0, 100, 2).is_err());
        assert!(criterion_value(&bic(), -1.0, 100, 2).is_err());
    }

    #[test]
    fn r_squared_endpoints() {
        let y = vec![1.0, 2.0, 3.0, 4.0];
        assert_eq!(r_squared_oos(&y, &y).unwrap(), 100.0);
        let mean_pred = vec![2.5; 4];
        assert_eq!(r_squared_oos(&y, &mean_pred).unwrap(), 0.0);
        assert!(r_squared_oos(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn coefficient_mse_counts_each_coordinate_once() {
        let truth = QuadraticModelSpec::new(4, 0.0, vec![2.0, 0.0, 1.0, 0.0], 1.0, true)
            .with_gamma(1, 3, 1.5);

        // Exact recovery.
        let mut est = BTreeMap::new();
        est.insert(EffectId::Main(1), 2.0);
        est.insert(EffectId::Main(3), 1.0);
        est.insert(EffectId::interaction(1, 3), 1.5);
        assert_eq!(coefficient_mse(&est, &truth), 0.0);

        // Dropping the beta = 2 main contributes exactly 4.
        est.remove(&EffectId::Main(1));
        assert_eq!(coefficient_mse(&est, &truth), 4.0);

        // A spurious interaction contributes its square.
        est.insert(EffectId::interaction(2, 4), 0.5);
        assert!((coefficient_mse(&est, &truth) - 4.25).abs() < 1e-15);
    }
}
