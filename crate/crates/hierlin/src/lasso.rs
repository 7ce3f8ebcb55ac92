//! Coordinate-descent LASSO with warm-started lambda paths and dynamic
//! candidate sets.
//!
//! The solver minimizes `(1/2n) ||y - Z b||^2 + lambda sum_j w_j |b_j|` on
//! columns standardized to unit sample variance (so every coordinate update
//! is one soft-threshold step); coefficients are reported back on the
//! original scale. Penalty weights are 1 except for columns a stage keeps
//! unpenalized. Two selectors are built on top of the path:
//!
//! - [`iform_lasso`]: solves along a decreasing lambda grid while the
//!   candidate set grows under the marginality principle — a cross product
//!   joins the pool when both of its parents are in the current support,
//!   and is hard-zeroed when a parent drops out;
//! - [`two_stage_lasso`]: a mains-only path picks the main set, then a
//!   second path selects interactions among those mains with the mains held
//!   unpenalized.
//!
//! Either way, the final model is chosen by an information criterion on
//! least-squares refits of the distinct supports, not on the shrunken fits.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::criteria::{criterion_value, Criterion};
use crate::data::{interaction_column, Dataset};
use crate::forward::{assemble_result, ColumnCache, PathStep, SelectError, SelectionResult};
use crate::linalg::{dot, mean, Matrix};
use crate::model::EffectId;

/// Default sweep budget before the solver gives up.
const MAX_SWEEPS: usize = 100_000;

/// Admission slack for the working-set violation scan, well below the
/// advertised KKT tolerance.
const KKT_ADMIT_SLACK: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum LassoError {
    #[error("coordinate descent did not converge within {0} sweeps")]
    MaxIterations(usize),
    #[error("invalid lambda grid: {0}")]
    InvalidGrid(String),
}

/// Decreasing lambda sequence `lambda_max = l_0 > l_1 > ... > l_T > 0`.
#[derive(Clone, Debug)]
pub struct LambdaGrid {
    pub values: Vec<f64>,
}

impl LambdaGrid {
    /// Log-uniform grid of `steps + 1` values from `lambda_max` down to
    /// `min_ratio * lambda_max`.
    pub fn log_spaced(lambda_max: f64, steps: usize, min_ratio: f64) -> Self {
        assert!(lambda_max > 0.0 && min_ratio > 0.0 && min_ratio < 1.0 && steps >= 1);
        let values = (0..=steps)
            .map(|t| lambda_max * min_ratio.powf(t as f64 / steps as f64))
            .collect();
        LambdaGrid { values }
    }

    /// The default path shape: 101 values down to `0.001 * lambda_max`.
    pub fn default_for(lambda_max: f64) -> Self {
        Self::log_spaced(lambda_max, 100, 1e-3)
    }

    pub fn validate(&self) -> Result<(), LassoError> {
        if self.values.is_empty() {
            return Err(LassoError::InvalidGrid("empty grid".into()));
        }
        for w in self.values.windows(2) {
            if !(w[1] < w[0]) {
                return Err(LassoError::InvalidGrid(format!(
                    "values must be strictly decreasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if *self.values.last().unwrap() <= 0.0 {
            return Err(LassoError::InvalidGrid("values must stay positive".into()));
        }
        Ok(())
    }

    fn min_ratio(&self) -> f64 {
        self.values.last().unwrap() / self.values[0]
    }
}

/// `sign(z) * max(|z| - t, 0)`.
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    debug_assert!(t >= 0.0);
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// One standardized column: `z = (raw - mean) / scale` with
/// `scale = sqrt(mean((raw - mean)^2))`, so `z . z = n`.
pub struct StdColumn {
    pub z: Vec<f64>,
    pub mean: f64,
    pub scale: f64,
}

/// Centered-and-scaled effect columns, materialized on demand. Columns with
/// zero sample variance are reported as `None` and never enter a model.
pub struct StandardizedColumns<'a> {
    x: &'a Matrix,
    cols: HashMap<EffectId, Option<StdColumn>>,
}

impl<'a> StandardizedColumns<'a> {
    pub fn new(x: &'a Matrix) -> Self {
        StandardizedColumns {
            x,
            cols: HashMap::new(),
        }
    }

    pub fn get(&mut self, e: EffectId) -> Option<&StdColumn> {
        let x = self.x;
        self.cols
            .entry(e)
            .or_insert_with(|| {
                let raw = match e {
                    EffectId::Main(j) => x.column(j - 1),
                    EffectId::Interaction(j, k) => interaction_column(x, j, k, false),
                };
                let m = mean(&raw);
                let var = raw.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / raw.len() as f64;
                if var <= 0.0 {
                    return None;
                }
                let scale = var.sqrt();
                Some(StdColumn {
                    z: raw.iter().map(|v| (v - m) / scale).collect(),
                    mean: m,
                    scale,
                })
            })
            .as_ref()
    }
}

/// A converged penalized fit.
///
/// Coefficients are on the original predictor scale; the residual refers to
/// the centered response.
#[derive(Clone, Debug)]
pub struct LassoState {
    pub coefficients: BTreeMap<EffectId, f64>,
    pub residual: Vec<f64>,
    pub lambda: f64,
    pub sweeps: usize,
}

/// Internal solver state on the standardized scale.
struct CdFit {
    beta: BTreeMap<EffectId, f64>,
    residual: Vec<f64>,
    sweeps: usize,
}

/// Cyclic coordinate descent with an active-set strategy: sweep the working
/// set to convergence, then scan all candidates for KKT violations and
/// admit them, repeating until no violation remains.
#[allow(clippy::too_many_arguments)]
fn cd_solve(
    cols: &mut StandardizedColumns,
    lambda: f64,
    candidates: &[EffectId],
    weight: &dyn Fn(EffectId) -> f64,
    mut beta: BTreeMap<EffectId, f64>,
    mut residual: Vec<f64>,
    tol: f64,
    objective_trace: Option<&mut Vec<f64>>,
) -> Result<CdFit, LassoError> {
    let n = residual.len() as f64;
    let mut working: Vec<EffectId> = candidates
        .iter()
        .copied()
        .filter(|e| beta.get(e).is_some_and(|b| *b != 0.0) || weight(*e) == 0.0)
        .collect();
    let mut sweeps = 0_usize;
    let mut trace = objective_trace;

    loop {
        // Inner loop: converge on the working set.
        loop {
            if sweeps >= MAX_SWEEPS {
                return Err(LassoError::MaxIterations(MAX_SWEEPS));
            }
            sweeps += 1;
            let mut max_change = 0.0_f64;
            for &e in &working {
                let Some(col) = cols.get(e) else { continue };
                let old = beta.get(&e).copied().unwrap_or(0.0);
                let g = dot(&col.z, &residual) / n + old;
                let w = weight(e);
                let new = if w == 0.0 {
                    g
                } else {
                    soft_threshold(g, lambda * w)
                };
                let delta = new - old;
                if delta != 0.0 {
                    for (r, z) in residual.iter_mut().zip(&col.z) {
                        *r -= delta * z;
                    }
                    if new == 0.0 {
                        beta.remove(&e);
                    } else {
                        beta.insert(e, new);
                    }
                    max_change = max_change.max(delta.abs());
                }
            }
            if let Some(tr) = trace.as_deref_mut() {
                let obj = dot(&residual, &residual) / (2.0 * n)
                    + lambda * beta.iter().map(|(e, b)| weight(*e) * b.abs()).sum::<f64>();
                tr.push(obj);
            }
            if max_change < tol {
                break;
            }
        }

        // Full pass: admit every candidate violating its KKT condition.
        let mut admitted = false;
        for &e in candidates {
            if beta.contains_key(&e) || working.contains(&e) {
                continue;
            }
            let Some(col) = cols.get(e) else { continue };
            let g = dot(&col.z, &residual) / n;
            if g.abs() > lambda * weight(e) + KKT_ADMIT_SLACK {
                working.push(e);
                admitted = true;
            }
        }
        if !admitted {
            return Ok(CdFit {
                beta,
                residual,
                sweeps,
            });
        }
    }
}

fn center(y: &[f64]) -> Vec<f64> {
    let m = mean(y);
    y.iter().map(|v| v - m).collect()
}

/// Path walks stop once the support reaches half the sample size: beyond
/// that the refit tuning cannot accept the support anyway, and coordinate
/// descent crawls as the problem approaches saturation.
fn support_cap(n: usize) -> usize {
    (n / 2).max(1)
}

fn coef_tolerance(y_centered: &[f64]) -> f64 {
    let n = y_centered.len() as f64;
    1e-7 * (dot(y_centered, y_centered) / n).sqrt()
}

/// Smallest lambda at which every penalized candidate is zero:
/// `max_j |z_j . y_c| / n` over the candidate set.
pub fn lambda_max(
    cols: &mut StandardizedColumns,
    y: &[f64],
    candidates: &BTreeSet<EffectId>,
) -> f64 {
    let yc = center(y);
    let n = yc.len() as f64;
    candidates
        .iter()
        .filter_map(|&e| cols.get(e).map(|c| (dot(&c.z, &yc) / n).abs()))
        .fold(0.0, f64::max)
}

/// Solves one penalized problem over `candidates` at the given `lambda`.
///
/// Columns are standardized internally; the warm start, when given, seeds
/// the solver with a previous solution. Convergence is declared when no
/// standardized coefficient moves by more than `1e-7 * sd(y)` in a sweep,
/// which puts the returned state within `1e-5` of its KKT conditions.
pub fn coordinate_descent(
    cols: &mut StandardizedColumns,
    y: &[f64],
    lambda: f64,
    warm_start: Option<&LassoState>,
    candidates: &BTreeSet<EffectId>,
) -> Result<LassoState, LassoError> {
    assert!(lambda > 0.0, "lambda must be positive");
    let yc = center(y);
    let tol = coef_tolerance(&yc);
    let order: Vec<EffectId> = candidates.iter().copied().collect();

    // Convert an original-scale warm start to the standardized scale and
    // rebuild its residual.
    let mut beta = BTreeMap::new();
    let mut residual = yc.clone();
    if let Some(ws) = warm_start {
        for (&e, &b_orig) in &ws.coefficients {
            if !candidates.contains(&e) {
                continue;
            }
            if let Some(col) = cols.get(e) {
                let b_std = b_orig * col.scale;
                if b_std != 0.0 {
                    for (r, z) in residual.iter_mut().zip(&col.z) {
                        *r -= b_std * z;
                    }
                    beta.insert(e, b_std);
                }
            }
        }
    }

    let fit = cd_solve(cols, lambda, &order, &|_| 1.0, beta, residual, tol, None)?;
    Ok(finish_state(cols, fit, lambda))
}

fn finish_state(cols: &mut StandardizedColumns, fit: CdFit, lambda: f64) -> LassoState {
    let mut coefficients = BTreeMap::new();
    for (&e, &b_std) in &fit.beta {
        let scale = cols.get(e).map(|c| c.scale).unwrap_or(1.0);
        coefficients.insert(e, b_std / scale);
    }
    LassoState {
        coefficients,
        residual: fit.residual,
        lambda,
        sweeps: fit.sweeps,
    }
}

/// Worst KKT violation of a state over a candidate set, on the standardized
/// scale: active coordinates should satisfy `z_j . r / n = lambda sign(b_j)`
/// and inactive ones `|z_j . r / n| <= lambda`.
pub fn kkt_max_violation(
    cols: &mut StandardizedColumns,
    state: &LassoState,
    candidates: &BTreeSet<EffectId>,
) -> f64 {
    let n = state.residual.len() as f64;
    let mut worst = 0.0_f64;
    for &e in candidates {
        let Some(col) = cols.get(e) else { continue };
        let g = dot(&col.z, &state.residual) / n;
        let viol = match state.coefficients.get(&e) {
            Some(b) if *b != 0.0 => (g - state.lambda * b.signum()).abs(),
            _ => (g.abs() - state.lambda).max(0.0),
        };
        worst = worst.max(viol);
    }
    worst
}

/// A support observed along a path, with the ambient candidate count it was
/// drawn from and the order effects first activated.
struct PathSupport {
    effects: Vec<EffectId>,
    ambient: usize,
}

/// Shared tail of both path selectors: refit each distinct support, score
/// it, and package the winner.
fn tune_supports(
    data: &Dataset,
    supports: Vec<PathSupport>,
    criterion: &Criterion,
) -> Result<SelectionResult, SelectError> {
    let n = data.n();
    let mut cache = ColumnCache::new(&data.x);
    let yc = center(&data.y);
    let tss = dot(&yc, &yc);
    let rss_floor = 1e-12 * tss.max(f64::MIN_POSITIVE);

    let mut best: Option<(f64, usize)> = None;
    let mut seen: BTreeSet<Vec<EffectId>> = BTreeSet::new();
    let mut scored: Vec<(PathSupport, f64)> = Vec::new();

    for support in supports {
        let mut sorted = support.effects.clone();
        sorted.sort();
        if !seen.insert(sorted) {
            continue;
        }
        if support.effects.len() + 2 > n {
            continue;
        }
        let mut state = crate::linalg::ForwardFitState::new(&data.y);
        let mut ok = true;
        for &e in &support.effects {
            if state.push(cache.get(e).centered.clone()).is_err() {
                ok = false;
                break;
            }
        }
        if !ok {
            continue;
        }
        let crit = criterion_value(
            &criterion.with_ambient(support.ambient),
            state.rss().max(rss_floor),
            n,
            support.effects.len(),
        )?;
        let idx = scored.len();
        scored.push((support, crit));
        if best.is_none_or(|(c, _)| crit < c) {
            best = Some((crit, idx));
        }
    }

    let Some((_, best_idx)) = best else {
        return Err(SelectError::Invalid(
            "no support along the path could be refit".into(),
        ));
    };
    let chosen = &scored[best_idx].0;

    // Path entries: nested prefixes of the chosen support in activation
    // order, scored like the tuned model.
    let mut state = crate::linalg::ForwardFitState::new(&data.y);
    let mut path = Vec::with_capacity(chosen.effects.len());
    for (t, &e) in chosen.effects.iter().enumerate() {
        state.push(cache.get(e).centered.clone())?;
        let crit = criterion_value(
            &criterion.with_ambient(chosen.ambient),
            state.rss().max(rss_floor),
            n,
            t + 1,
        )?;
        path.push(PathStep {
            effect: e,
            rss: state.rss(),
            criterion: crit,
        });
    }
    let kept = chosen.effects.clone();
    assemble_result(&mut cache, &data.y, path, &kept, criterion)
}

/// Marginality-principle LASSO: one warm-started path along the grid where
/// the candidate set starts at the mains and grows with the support.
///
/// At each grid point the problem is solved over
/// `C_t = mains ∪ { (j,k) : j,k in support mains }` (quadratics unlock with
/// their single parent); an interaction whose parent has left the support
/// is hard-zeroed before the next solve, so every reported support is
/// hierarchical. The final model is the criterion minimizer over
/// least-squares refits of the distinct supports.
pub fn iform_lasso(
    data: &Dataset,
    grid: &LambdaGrid,
    criterion: &Criterion,
) -> Result<SelectionResult, SelectError> {
    grid.validate()?;
    let p = data.p();
    let mut cols = StandardizedColumns::new(&data.x);
    let yc = center(&data.y);
    let tol = coef_tolerance(&yc);

    let mut beta: BTreeMap<EffectId, f64> = BTreeMap::new();
    let mut main_support: BTreeSet<usize> = BTreeSet::new();
    let mut first_seen: BTreeMap<EffectId, usize> = BTreeMap::new();
    let mut supports: Vec<PathSupport> = vec![PathSupport {
        effects: Vec::new(),
        ambient: p,
    }];

    for (t, &lambda) in grid.values.iter().enumerate() {
        // Candidate set from the current support's mains; cross products
        // only, for the same eligibility-skew reason as the forward
        // dynamic pool.
        let mut candidates: Vec<EffectId> = (1..=p).map(EffectId::Main).collect();
        for &j in &main_support {
            for &k in main_support.range(j + 1..) {
                candidates.push(EffectId::Interaction(j, k));
            }
        }
        let ambient = candidates.len();
        let allowed: BTreeSet<EffectId> = candidates.iter().copied().collect();

        // Hard-zero interactions orphaned by a parent leaving the support.
        beta.retain(|e, _| allowed.contains(e));

        // Rebuild the residual exactly for the pruned coefficients.
        let mut residual = yc.clone();
        for (&e, &b) in &beta {
            let col = cols.get(e).expect("active column must be standardizable");
            for (r, z) in residual.iter_mut().zip(&col.z) {
                *r -= b * z;
            }
        }

        let fit = cd_solve(
            &mut cols,
            lambda,
            &candidates,
            &|_| 1.0,
            beta,
            residual,
            tol,
            None,
        )?;
        beta = fit.beta;

        main_support = beta
            .keys()
            .filter_map(|e| match e {
                EffectId::Main(j) => Some(*j),
                _ => None,
            })
            .collect();
        for &e in beta.keys() {
            first_seen.entry(e).or_insert(t);
        }

        let mut effects: Vec<EffectId> = beta.keys().copied().collect();
        effects.sort_by_key(|e| (first_seen[e], *e));
        supports.push(PathSupport { effects, ambient });

        if beta.len() >= support_cap(data.n()) {
            break;
        }
    }

    tune_supports(data, supports, criterion)
}

/// Two-stage LASSO: a mains-only path picks the main set, then a second
/// path over the selected mains (unpenalized) plus their interactions picks
/// the interaction set.
pub fn two_stage_lasso(
    data: &Dataset,
    grid: &LambdaGrid,
    criterion: &Criterion,
) -> Result<SelectionResult, SelectError> {
    grid.validate()?;
    let p = data.p();
    let mut cols = StandardizedColumns::new(&data.x);
    let yc = center(&data.y);
    let tol = coef_tolerance(&yc);

    // Stage one: plain LASSO path over the mains.
    let mains: Vec<EffectId> = (1..=p).map(EffectId::Main).collect();
    let mut beta: BTreeMap<EffectId, f64> = BTreeMap::new();
    let mut residual = yc.clone();
    let mut first_seen: BTreeMap<EffectId, usize> = BTreeMap::new();
    let mut stage1_supports: Vec<PathSupport> = vec![PathSupport {
        effects: Vec::new(),
        ambient: p,
    }];
    for (t, &lambda) in grid.values.iter().enumerate() {
        let fit = cd_solve(
            &mut cols,
            lambda,
            &mains,
            &|_| 1.0,
            beta,
            residual,
            tol,
            None,
        )?;
        beta = fit.beta;
        residual = fit.residual;
        for &e in beta.keys() {
            first_seen.entry(e).or_insert(t);
        }
        let mut effects: Vec<EffectId> = beta.keys().copied().collect();
        effects.sort_by_key(|e| (first_seen[e], *e));
        stage1_supports.push(PathSupport {
            effects,
            ambient: p,
        });

        if beta.len() >= support_cap(data.n()) {
            break;
        }
    }
    let stage1 = tune_supports(data, stage1_supports, criterion)?;
    let kept_mains: Vec<EffectId> = stage1.path.iter().map(|s| s.effect).collect();
    let main_set: BTreeSet<usize> = stage1.selected_mains().iter().copied().collect();
    let m = main_set.len();
    if m == 0 {
        return Ok(stage1);
    }

    // Stage two: mains unpenalized, interactions among them penalized.
    let mut candidates: Vec<EffectId> = kept_mains.clone();
    let mut interactions = Vec::new();
    for &j in &main_set {
        for &k in main_set.range(j..) {
            interactions.push(EffectId::Interaction(j, k));
        }
    }
    candidates.extend(interactions.iter().copied());
    let ambient2 = m * (m + 1) / 2;
    let weight = |e: EffectId| if e.is_main() { 0.0 } else { 1.0 };

    // The grid head for stage two comes from the residual of the
    // unpenalized mains fit.
    let head = cd_solve(
        &mut cols,
        1.0,
        &kept_mains,
        &|_| 0.0,
        BTreeMap::new(),
        yc.clone(),
        tol,
        None,
    )?;
    let n_f = yc.len() as f64;
    let lambda_max2 = interactions
        .iter()
        .filter_map(|&e| cols.get(e).map(|c| (dot(&c.z, &head.residual) / n_f).abs()))
        .fold(0.0, f64::max);

    let mut supports2: Vec<PathSupport> = vec![PathSupport {
        effects: kept_mains.clone(),
        ambient: ambient2,
    }];
    if lambda_max2 > 0.0 && ambient2 > 0 {
        let grid2 =
            LambdaGrid::log_spaced(lambda_max2, grid.values.len().max(2) - 1, grid.min_ratio());
        let mut beta2 = head.beta;
        let mut residual2 = head.residual;
        let mut inter_seen: BTreeMap<EffectId, usize> = BTreeMap::new();
        for (t, &lambda) in grid2.values.iter().enumerate() {
            let fit = cd_solve(
                &mut cols,
                lambda,
                &candidates,
                &weight,
                beta2,
                residual2,
                tol,
                None,
            )?;
            beta2 = fit.beta;
            residual2 = fit.residual;
            let mut effects = kept_mains.clone();
            let mut inters: Vec<EffectId> =
                beta2.keys().filter(|e| !e.is_main()).copied().collect();
            for &e in &inters {
                inter_seen.entry(e).or_insert(t);
            }
            inters.sort_by_key(|e| (inter_seen[e], *e));
            effects.extend(inters);
            let support_len = effects.len();
            supports2.push(PathSupport {
                effects,
                ambient: ambient2,
            });
            if support_len >= support_cap(data.n()) {
                break;
            }
        }
    }

    tune_supports(data, supports2, criterion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::Criterion;
    use crate::data::{
        generate_response, sample_design, table1_spec_with_p, turlach_spec, DesignConfig,
        DesignFamily,
    };
    use crate::model::{check_heredity, HeredityMode};
    use crate::rng::{mix_seed, rng_from_seed};
    use rand::Rng;

    #[test]
    fn soft_threshold_cases() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
        assert_eq!(soft_threshold(0.0, 0.0), 0.0);
    }

    #[test]
    fn grid_shape_and_validation() {
        let g = LambdaGrid::default_for(2.0);
        assert_eq!(g.values.len(), 101);
        assert_eq!(g.values[0], 2.0);
        assert!((g.values[100] - 0.002).abs() < 1e-12);
        g.validate().unwrap();

        let bad = LambdaGrid {
            values: vec![1.0, 1.0],
        };
        assert!(bad.validate().is_err());
    }

    fn random_instance(n: usize, k: usize, seed: u64) -> (Matrix, Vec<f64>) {
        let mut rng = rng_from_seed(seed);
        let data: Vec<f64> = (0..n * k)
            .map(|_| rng.random::<f64>() * 2.0 - 1.0)
            .collect();
        let x = Matrix::new(n, k, data);
        let y: Vec<f64> = (0..n)
            .map(|i| x.get(i, 0) - 0.5 * x.get(i, 1) + 0.3 * rng.random::<f64>())
            .collect();
        (x, y)
    }

    #[test]
    fn everything_is_zero_at_or_above_lambda_max() {
        let (x, y) = random_instance(40, 6, 2);
        let mut cols = StandardizedColumns::new(&x);
        let cand: BTreeSet<EffectId> = (1..=6).map(EffectId::Main).collect();
        let lmax = lambda_max(&mut cols, &y, &cand);
        for lambda in [lmax, 1.5 * lmax] {
            let state = coordinate_descent(&mut cols, &y, lambda, None, &cand).unwrap();
            assert!(
                state.coefficients.is_empty(),
                "nonzero at lambda = {lambda}"
            );
        }
        // Just below lambda_max something activates.
        let state = coordinate_descent(&mut cols, &y, 0.99 * lmax, None, &cand).unwrap();
        assert!(!state.coefficients.is_empty());
    }

    #[test]
    fn orthonormal_design_matches_closed_form() {
        // Build centered orthogonal columns; after standardization the
        // solution decouples into per-coordinate soft thresholds.
        let mut rng = rng_from_seed(3);
        let n = 32;
        let k = 5;
        let mut cols_raw: Vec<Vec<f64>> = Vec::new();
        for _ in 0..k {
            let mut c: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let m = mean(&c);
            for v in c.iter_mut() {
                *v -= m;
            }
            for prev in &cols_raw {
                let proj = dot(&c, prev) / dot(prev, prev);
                for (a, b) in c.iter_mut().zip(prev) {
                    *a -= proj * b;
                }
            }
            cols_raw.push(c);
        }
        let mut x = Matrix::zeros(n, k);
        for (j, c) in cols_raw.iter().enumerate() {
            for i in 0..n {
                x.set(i, j, c[i]);
            }
        }
        let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();

        let mut cols = StandardizedColumns::new(&x);
        let cand: BTreeSet<EffectId> = (1..=k).map(EffectId::Main).collect();
        let yc = center(&y);
        let lmax = lambda_max(&mut cols, &y, &cand);
        let lambda = 0.4 * lmax;
        let state = coordinate_descent(&mut cols, &y, lambda, None, &cand).unwrap();
        for j in 1..=k {
            let col = cols.get(EffectId::Main(j)).unwrap();
            let expected_std = soft_threshold(dot(&col.z, &yc) / n as f64, lambda);
            let have_std = state
                .coefficients
                .get(&EffectId::Main(j))
                .copied()
                .unwrap_or(0.0)
                * col.scale;
            assert!(
                (have_std - expected_std).abs() < 1e-8,
                "coordinate {j}: {have_std} vs {expected_std}"
            );
        }
    }

    /// Proximal-gradient (ISTA) reference solver for the same objective.
    fn ista_objective(x: &Matrix, y: &[f64], lambda: f64, iters: usize) -> f64 {
        let n = x.rows;
        let k = x.cols;
        let mut cols = StandardizedColumns::new(x);
        let z: Vec<Vec<f64>> = (1..=k)
            .map(|j| cols.get(EffectId::Main(j)).unwrap().z.clone())
            .collect();
        let yc = center(y);
        let n_f = n as f64;

        // Lipschitz bound via the row-sum norm of Z'Z / n.
        let mut lip = 0.0_f64;
        for a in &z {
            let row_sum: f64 = z.iter().map(|b| (dot(a, b) / n_f).abs()).sum();
            lip = lip.max(row_sum);
        }
        let step = 1.0 / lip;

        let mut beta = vec![0.0; k];
        for _ in 0..iters {
            let mut r = yc.clone();
            for (j, zc) in z.iter().enumerate() {
                if beta[j] != 0.0 {
                    for (ri, zi) in r.iter_mut().zip(zc) {
                        *ri -= beta[j] * zi;
                    }
                }
            }
            for (j, zc) in z.iter().enumerate() {
                let grad = -dot(zc, &r) / n_f;
                beta[j] = soft_threshold(beta[j] - step * grad, step * lambda);
            }
        }
        let mut r = yc.clone();
        for (j, zc) in z.iter().enumerate() {
            for (ri, zi) in r.iter_mut().zip(zc) {
                *ri -= beta[j] * zi;
            }
        }
        dot(&r, &r) / (2.0 * n_f) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
    }

    #[test]
    fn objective_matches_proximal_gradient_reference() {
        let (x, y) = random_instance(30, 6, 5);
        let mut cols = StandardizedColumns::new(&x);
        let cand: BTreeSet<EffectId> = (1..=6).map(EffectId::Main).collect();
        let lmax = lambda_max(&mut cols, &y, &cand);
        for frac in [0.5, 0.2, 0.05] {
            let lambda = frac * lmax;
            let state = coordinate_descent(&mut cols, &y, lambda, None, &cand).unwrap();
            let yc = center(&y);
            let n_f = y.len() as f64;
            let cd_obj = dot(&state.residual, &state.residual) / (2.0 * n_f)
                + lambda
                    * state
                        .coefficients
                        .iter()
                        .map(|(e, b)| b * cols.get(*e).unwrap().scale)
                        .map(f64::abs)
                        .sum::<f64>();
            let _ = yc;
            let ref_obj = ista_objective(&x, &y, lambda, 200_000);
            assert!(
                (cd_obj - ref_obj).abs() < 1e-6,
                "lambda {lambda}: cd {cd_obj} vs ista {ref_obj}"
            );
        }
    }

    #[test]
    fn kkt_conditions_hold_at_convergence() {
        for seed in 0..10_u64 {
            let (x, y) = random_instance(50, 12, mix_seed(6, seed, 0));
            let mut cols = StandardizedColumns::new(&x);
            let cand: BTreeSet<EffectId> = (1..=12).map(EffectId::Main).collect();
            let lmax = lambda_max(&mut cols, &y, &cand);
            let mut warm: Option<LassoState> = None;
            for t in 0..10 {
                let lambda = lmax * 0.9_f64.powi(t + 1);
                let state =
                    coordinate_descent(&mut cols, &y, lambda, warm.as_ref(), &cand).unwrap();
                let viol = kkt_max_violation(&mut cols, &state, &cand);
                assert!(
                    viol <= 1e-5,
                    "seed {seed}, lambda {lambda}: violation {viol}"
                );
                warm = Some(state);
            }
        }
    }

    #[test]
    fn warm_and_cold_starts_agree() {
        let (x, y) = random_instance(40, 8, 7);
        let mut cols = StandardizedColumns::new(&x);
        let cand: BTreeSet<EffectId> = (1..=8).map(EffectId::Main).collect();
        let lmax = lambda_max(&mut cols, &y, &cand);
        let yc = center(&y);
        let n_f = y.len() as f64;

        let objective = |state: &LassoState, cols: &mut StandardizedColumns, lambda: f64| {
            dot(&state.residual, &state.residual) / (2.0 * n_f)
                + lambda
                    * state
                        .coefficients
                        .iter()
                        .map(|(e, b)| (b * cols.get(*e).unwrap().scale).abs())
                        .sum::<f64>()
        };
        let _ = yc;

        let l1 = 0.3 * lmax;
        let l2 = 0.1 * lmax;
        let first = coordinate_descent(&mut cols, &y, l1, None, &cand).unwrap();
        let warm = coordinate_descent(&mut cols, &y, l2, Some(&first), &cand).unwrap();
        let cold = coordinate_descent(&mut cols, &y, l2, None, &cand).unwrap();
        let ow = objective(&warm, &mut cols, l2);
        let oc = objective(&cold, &mut cols, l2);
        assert!(
            (ow - oc).abs() <= 1e-8 * oc.abs().max(1.0),
            "warm {ow} vs cold {oc}"
        );
    }

    #[test]
    fn sweeps_never_increase_the_objective() {
        let (x, y) = random_instance(36, 7, 9);
        let mut cols = StandardizedColumns::new(&x);
        let order: Vec<EffectId> = (1..=7).map(EffectId::Main).collect();
        let cand: BTreeSet<EffectId> = order.iter().copied().collect();
        let lmax = lambda_max(&mut cols, &y, &cand);
        let yc = center(&y);
        let tol = coef_tolerance(&yc);
        let mut trace = Vec::new();
        cd_solve(
            &mut cols,
            0.15 * lmax,
            &order,
            &|_| 1.0,
            BTreeMap::new(),
            yc,
            tol,
            Some(&mut trace),
        )
        .unwrap();
        assert!(trace.len() >= 2);
        for w in trace.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "objective rose: {} -> {}", w[0], w[1]);
        }
    }

    fn table1_dataset(p: usize, n: usize, seed: u64) -> Dataset {
        let truth = table1_spec_with_p(p);
        let cfg = DesignConfig {
            n,
            p,
            family: DesignFamily::GaussianAr1 { rho: 0.5 },
            seed: mix_seed(seed, 0, 10),
        };
        let x = sample_design(&cfg).unwrap();
        let y = generate_response(&x, &truth, mix_seed(seed, 0, 11));
        Dataset::new(x, y, Some(truth))
    }

    #[test]
    fn iform_lasso_keeps_supports_hierarchical() {
        let data = table1_dataset(20, 200, 1);
        let mut cols = StandardizedColumns::new(&data.x);
        let cand: BTreeSet<EffectId> = (1..=20).map(EffectId::Main).collect();
        let lmax = lambda_max(&mut cols, &data.y, &cand);
        drop(cols);
        let grid = LambdaGrid::log_spaced(lmax, 60, 1e-3);
        let res = iform_lasso(&data, &grid, &Criterion::Ebic { gamma_e: 0.5 }).unwrap();
        assert!(
            check_heredity(
                &res.selected_mains(),
                &res.selected_interactions(),
                HeredityMode::Strong
            )
            .satisfied
        );
        assert!(!res.selected.is_empty());
        // Activation-ordered path: selected is the whole (prefix) path and
        // the nested refits never increase the RSS.
        let path_set: BTreeSet<EffectId> = res.path.iter().map(|s| s.effect).collect();
        assert_eq!(path_set, res.selected);
        for w in res.path.windows(2) {
            assert!(w[1].rss <= w[0].rss + 1e-9);
        }
    }

    #[test]
    fn iform_lasso_stays_on_mains_for_linear_truth() {
        let mut beta = vec![0.0; 15];
        beta[0] = 3.0;
        beta[7] = -2.0;
        let truth = crate::model::QuadraticModelSpec::new(15, 0.0, beta, 0.5, true);
        let cfg = DesignConfig {
            n: 250,
            p: 15,
            family: DesignFamily::GaussianAr1 { rho: 0.3 },
            seed: 5,
        };
        let x = sample_design(&cfg).unwrap();
        let y = generate_response(&x, &truth, 6);
        let data = Dataset::new(x, y, Some(truth));

        let mut cols = StandardizedColumns::new(&data.x);
        let cand: BTreeSet<EffectId> = (1..=15).map(EffectId::Main).collect();
        let lmax = lambda_max(&mut cols, &data.y, &cand);
        drop(cols);
        let grid = LambdaGrid::log_spaced(lmax, 50, 1e-2);
        let res = iform_lasso(&data, &grid, &Criterion::Ebic { gamma_e: 0.5 }).unwrap();
        assert_eq!(res.selected_mains(), [1, 8].into_iter().collect());
        assert!(res.selected_interactions().is_empty());
    }

    #[test]
    fn two_stage_lasso_misses_x1_on_turlach_data() {
        // Cov(Y, X1) = 0, so stage one keeps X1 out of its support with
        // high frequency regardless of tuning.
        let truth = turlach_spec();
        let m = 40;
        let mut absent = 0;
        for r in 0..m {
            let cfg = DesignConfig {
                n: 1000,
                p: 10,
                family: DesignFamily::Uniform01,
                seed: mix_seed(100, r, 0),
            };
            let x = sample_design(&cfg).unwrap();
            let y = generate_response(&x, &truth, mix_seed(100, r, 1));
            let data = Dataset::new(x, y, Some(truth.clone()));
            let mut cols = StandardizedColumns::new(&data.x);
            let cand: BTreeSet<EffectId> = (1..=10).map(EffectId::Main).collect();
            let lmax = lambda_max(&mut cols, &data.y, &cand);
            drop(cols);
            let grid = LambdaGrid::log_spaced(lmax, 50, 1e-3);
            let res = two_stage_lasso(&data, &grid, &Criterion::Bic).unwrap();
            if !res.selected_mains().contains(&1) {
                absent += 1;
            }
            assert!(
                check_heredity(
                    &res.selected_mains(),
                    &res.selected_interactions(),
                    HeredityMode::Strong
                )
                .satisfied
            );
        }
        assert!(
            absent as f64 >= 0.8 * m as f64,
            "X1 absent in only {absent}/{m} runs"
        );
    }

    #[test]
    fn iform_lasso_main_recovery_dominates_two_stage() {
        // Paired comparison on the downscaled benchmark: the dynamic
        // candidate path should recover the main set at least as often as
        // the two-stage variant.
        let m = 100;
        let truth_mains: BTreeSet<usize> = [1, 3, 5, 7, 9].into_iter().collect();
        let mut wins_iform = 0;
        let mut wins_two_stage = 0;
        for r in 0..m {
            let data = table1_dataset(20, 200, 1000 + r);
            let mut cols = StandardizedColumns::new(&data.x);
            let cand: BTreeSet<EffectId> = (1..=20).map(EffectId::Main).collect();
            let lmax = lambda_max(&mut cols, &data.y, &cand);
            drop(cols);
            let grid = LambdaGrid::log_spaced(lmax, 50, 1e-3);
            let crit = Criterion::Ebic { gamma_e: 0.5 };
            let a = iform_lasso(&data, &grid, &crit).unwrap();
            let b = two_stage_lasso(&data, &grid, &crit).unwrap();
            if a.selected_mains() == truth_mains {
                wins_iform += 1;
            }
            if b.selected_mains() == truth_mains {
                wins_two_stage += 1;
            }
        }
        assert!(
            wins_iform >= wins_two_stage,
            "iform {wins_iform} vs two-stage {wins_two_stage} out of {m}"
        );
    }
}
