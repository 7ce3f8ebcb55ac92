//! Greedy forward selection over effect pools, plus the three concrete
//! procedures built on it: two-stage forward selection, iFORM, and the
//! oracle fit.
//!
//! The engine walks a path of nested models. At each step it scores every
//! candidate in the current pool with [`greedy_gain`], commits the best one
//! (ties broken toward the lowest canonical [`EffectId`]), and records the
//! model criterion. The reported model is the criterion-minimizing prefix of
//! the path. Pools come from a [`CandidatePolicy`]:
//!
//! - `MainsOnly`: the `p` main effects;
//! - `InteractionsOf(M)`: all canonical pairs over a fixed main set `M`,
//!   quadratics included;
//! - `MarginalityDynamic`: all mains plus every cross product of two
//!   distinct selected mains, so each prefix of the path automatically
//!   satisfies strong heredity.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

use crate::criteria::{criterion_value, CriteriaError, Criterion};
use crate::data::{interaction_column, Dataset};
use crate::linalg::{greedy_gain, ForwardFitState, LinalgError, Matrix};
use crate::model::{importance_sets, EffectId, QuadraticModelSpec};

/// Consecutive criterion increases tolerated before the path stops.
const STOP_PATIENCE: usize = 5;

/// Relative floor applied to the RSS before criterion evaluation, so a
/// perfect fit stays in the criterion's domain.
const RSS_FLOOR_RTOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SelectError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Criteria(#[from] CriteriaError),
    #[error(transparent)]
    Lasso(#[from] crate::lasso::LassoError),
    #[error("selection failed: {0}")]
    Invalid(String),
}

/// How the candidate pool is built at each step.
#[derive(Clone, Debug, PartialEq)]
pub enum CandidatePolicy {
    MainsOnly,
    InteractionsOf(BTreeSet<usize>),
    MarginalityDynamic,
}

/// One committed step of a selection path.
#[derive(Clone, Debug)]
pub struct PathStep {
    pub effect: EffectId,
    /// Residual sum of squares after the step.
    pub rss: f64,
    /// Criterion value of the model after the step, computed with the
    /// ambient dimension of the pool the step was drawn from.
    pub criterion: f64,
}

/// Output of a selection procedure.
#[derive(Clone, Debug)]
pub struct SelectionResult {
    /// Ordered steps; models along the path are nested.
    pub path: Vec<PathStep>,
    /// The selected effects, always a prefix of `path`.
    pub selected: BTreeSet<EffectId>,
    /// Least-squares coefficients refit on the selected effects.
    pub coefficients: BTreeMap<EffectId, f64>,
    pub intercept: f64,
    pub criterion: Criterion,
}

impl SelectionResult {
    pub fn selected_mains(&self) -> BTreeSet<usize> {
        self.selected
            .iter()
            .filter_map(|e| match e {
                EffectId::Main(j) => Some(*j),
                _ => None,
            })
            .collect()
    }

    pub fn selected_interactions(&self) -> BTreeSet<(usize, usize)> {
        self.selected
            .iter()
            .filter_map(|e| match e {
                EffectId::Interaction(j, k) => Some((*j, *k)),
                _ => None,
            })
            .collect()
    }

    pub fn model_size(&self) -> usize {
        self.selected.len()
    }

    /// Predicted responses on raw predictor rows.
    pub fn predict(&self, x: &Matrix) -> Vec<f64> {
        (0..x.rows)
            .map(|i| {
                let mut v = self.intercept;
                for (effect, beta) in &self.coefficients {
                    v += beta
                        * match *effect {
                            EffectId::Main(j) => x.get(i, j - 1),
                            EffectId::Interaction(j, k) => x.get(i, j - 1) * x.get(i, k - 1),
                        };
                }
                v
            })
            .collect()
    }
}

/// Default step cap: `min(n/4, 50)`, guarding small-sample runs against
/// saturated models.
pub fn default_max_steps(n: usize) -> usize {
    (n / 4).clamp(1, 50)
}

/// Sample-centered effect columns with their raw means, built on demand.
pub(crate) struct ColumnCache<'a> {
    x: &'a Matrix,
    cols: HashMap<EffectId, CachedColumn>,
}

pub(crate) struct CachedColumn {
    pub centered: Vec<f64>,
    pub raw_mean: f64,
}

impl<'a> ColumnCache<'a> {
    pub fn new(x: &'a Matrix) -> Self {
        ColumnCache {
            x,
            cols: HashMap::new(),
        }
    }

    pub fn get(&mut self, e: EffectId) -> &CachedColumn {
        let x = self.x;
        self.cols.entry(e).or_insert_with(|| {
            let raw = match e {
                EffectId::Main(j) => x.column(j - 1),
                EffectId::Interaction(j, k) => interaction_column(x, j, k, false),
            };
            let m = crate::linalg::mean(&raw);
            CachedColumn {
                centered: raw.iter().map(|v| v - m).collect(),
                raw_mean: m,
            }
        })
    }
}

/// Pool of available candidates (canonical order) plus the total pool size
/// `|C_t|` used as the EBIC ambient dimension.
fn candidate_pool(
    policy: &CandidatePolicy,
    p: usize,
    selected: &BTreeSet<EffectId>,
    selected_mains: &BTreeSet<usize>,
) -> (Vec<EffectId>, usize) {
    match policy {
        CandidatePolicy::MainsOnly => {
            let avail = (1..=p)
                .map(EffectId::Main)
                .filter(|e| !selected.contains(e))
                .collect();
            (avail, p)
        }
        CandidatePolicy::InteractionsOf(mains) => {
            let m = mains.len();
            let mut avail = Vec::new();
            for &j in mains {
                for &k in mains.range(j..) {
                    let e = EffectId::Interaction(j, k);
                    if !selected.contains(&e) {
                        avail.push(e);
                    }
                }
            }
            (avail, m * (m + 1) / 2)
        }
        CandidatePolicy::MarginalityDynamic => {
            // Cross products of distinct selected mains only. A quadratic
            // becomes eligible the moment its parent enters — before the
            // cross terms of that parent can compete — and then soaks up
            // their still-unexplained signal, so admitting quadratics here
            // inflates the selected set on hub parents. The fixed-main-set
            // policy has no such eligibility skew and keeps them.
            let m = selected_mains.len();
            let mut avail: Vec<EffectId> = (1..=p)
                .map(EffectId::Main)
                .filter(|e| !selected.contains(e))
                .collect();
            for &j in selected_mains {
                for &k in selected_mains.range(j + 1..) {
                    let e = EffectId::Interaction(j, k);
                    if !selected.contains(&e) {
                        avail.push(e);
                    }
                }
            }
            (avail, p + m.saturating_sub(1) * m / 2)
        }
    }
}

struct EngineRun {
    /// Explored steps after the preloaded model.
    steps: Vec<PathStep>,
    /// Number of leading steps in the criterion-minimizing prefix.
    cut: usize,
}

/// Walks one forward path starting from an already-fitted set of effects.
fn run_engine(
    cache: &mut ColumnCache,
    y: &[f64],
    preload: &[EffectId],
    policy: &CandidatePolicy,
    criterion: &Criterion,
    max_steps: usize,
) -> Result<EngineRun, SelectError> {
    let n = y.len();
    let p = cache.x.cols;
    let mut state = ForwardFitState::new(y);
    let mut selected: BTreeSet<EffectId> = BTreeSet::new();
    let mut selected_mains: BTreeSet<usize> = BTreeSet::new();

    for &e in preload {
        let col = cache.get(e).centered.clone();
        state.push(col)?;
        selected.insert(e);
        if let EffectId::Main(j) = e {
            selected_mains.insert(j);
        }
    }

    let rss_floor = RSS_FLOOR_RTOL * state.tss().max(f64::MIN_POSITIVE);
    let k0 = preload.len();
    let budget = max_steps.min(n.saturating_sub(2).saturating_sub(k0));

    // The base model's criterion uses the pool of the first step.
    let (_, ambient0) = candidate_pool(policy, p, &selected, &selected_mains);
    let base_criterion = criterion_value(
        &criterion.with_ambient(ambient0),
        state.rss().max(rss_floor),
        n,
        k0,
    )?;

    let mut steps: Vec<PathStep> = Vec::new();
    let mut best = (base_criterion, 0_usize);
    let mut prev_criterion = base_criterion;
    let mut rising_streak = 0_usize;

    for t in 1..=budget {
        let (pool, ambient) = candidate_pool(policy, p, &selected, &selected_mains);
        if pool.is_empty() {
            break;
        }

        // Canonical scan order plus strict improvement makes ties fall to
        // the lowest EffectId.
        let mut best_gain = 0.0_f64;
        let mut best_effect: Option<EffectId> = None;
        for &e in &pool {
            let col = cache.get(e);
            let g = greedy_gain(&state, &col.centered);
            if !g.degenerate && g.reduction > best_gain {
                best_gain = g.reduction;
                best_effect = Some(e);
            }
        }
        let Some(effect) = best_effect else {
            break; // No candidate has positive gain.
        };

        let col = cache.get(effect).centered.clone();
        state.push(col)?;
        selected.insert(effect);
        if let EffectId::Main(j) = effect {
            selected_mains.insert(j);
        }

        let crit = criterion_value(
            &criterion.with_ambient(ambient),
            state.rss().max(rss_floor),
            n,
            k0 + t,
        )?;
        steps.push(PathStep {
            effect,
            rss: state.rss(),
            criterion: crit,
        });

        if crit < best.0 {
            best = (crit, t);
        }
        if crit > prev_criterion {
            rising_streak += 1;
            if rising_streak >= STOP_PATIENCE {
                break;
            }
        } else {
            rising_streak = 0;
        }
        prev_criterion = crit;
    }

    Ok(EngineRun { steps, cut: best.1 })
}

/// Refits the selected effects by least squares and packages the result.
pub(crate) fn assemble_result(
    cache: &mut ColumnCache,
    y: &[f64],
    path: Vec<PathStep>,
    kept: &[EffectId],
    criterion: &Criterion,
) -> Result<SelectionResult, SelectError> {
    let mut state = ForwardFitState::new(y);
    for &e in kept {
        state.push(cache.get(e).centered.clone())?;
    }
    let slopes = state.coefficients();
    let y_mean = crate::linalg::mean(y);

    let mut coefficients = BTreeMap::new();
    let mut intercept = y_mean;
    for (&e, &b) in kept.iter().zip(&slopes) {
        coefficients.insert(e, b);
        intercept -= b * cache.get(e).raw_mean;
    }

    Ok(SelectionResult {
        path,
        selected: kept.iter().copied().collect(),
        coefficients,
        intercept,
        criterion: *criterion,
    })
}

/// Greedy forward selection under a candidate policy.
///
/// The path stops when the pool empties, no candidate has positive gain,
/// `max_steps` is reached, or the criterion has risen for five consecutive
/// steps; the reported model is the criterion-minimizing prefix, refit by
/// least squares. Columns are sample-centered internally and the intercept
/// is always included.
pub fn forward_path(
    data: &Dataset,
    policy: &CandidatePolicy,
    criterion: &Criterion,
    max_steps: usize,
) -> Result<SelectionResult, SelectError> {
    let mut cache = ColumnCache::new(&data.x);
    let run = run_engine(&mut cache, &data.y, &[], policy, criterion, max_steps)?;
    let kept: Vec<EffectId> = run.steps[..run.cut].iter().map(|s| s.effect).collect();
    assemble_result(&mut cache, &data.y, run.steps, &kept, criterion)
}

/// Two-stage forward selection: select mains from the main-effects model,
/// then hold them fixed and select interactions among them.
///
/// Stage one tunes a mains-only path by the criterion (EBIC ambient `p`).
/// Stage two keeps the stage-one model intact and extends it with
/// interactions over the selected mains, tuning the combined model size
/// (EBIC ambient `m(m+1)/2`). The reported path contains the kept stage-one
/// prefix followed by the explored stage-two steps.
pub fn two_stage_forward(
    data: &Dataset,
    criterion: &Criterion,
    stage_caps: (usize, usize),
) -> Result<SelectionResult, SelectError> {
    let mut cache = ColumnCache::new(&data.x);

    let stage1 = run_engine(
        &mut cache,
        &data.y,
        &[],
        &CandidatePolicy::MainsOnly,
        criterion,
        stage_caps.0,
    )?;
    let mains: Vec<EffectId> = stage1.steps[..stage1.cut]
        .iter()
        .map(|s| s.effect)
        .collect();
    let main_set: BTreeSet<usize> = mains
        .iter()
        .filter_map(|e| match e {
            EffectId::Main(j) => Some(*j),
            _ => None,
        })
        .collect();

    let stage2 = run_engine(
        &mut cache,
        &data.y,
        &mains,
        &CandidatePolicy::InteractionsOf(main_set),
        criterion,
        stage_caps.1,
    )?;

    let mut path: Vec<PathStep> = stage1.steps[..stage1.cut].to_vec();
    path.extend(stage2.steps.iter().cloned());

    let mut kept = mains;
    kept.extend(stage2.steps[..stage2.cut].iter().map(|s| s.effect));
    assemble_result(&mut cache, &data.y, path, &kept, criterion)
}

/// Forward selection under the marginality principle: one path over a
/// dynamically grown pool containing all mains plus every cross product
/// whose parents are both already in the model.
pub fn iform(
    data: &Dataset,
    criterion: &Criterion,
    max_steps: usize,
) -> Result<SelectionResult, SelectError> {
    forward_path(
        data,
        &CandidatePolicy::MarginalityDynamic,
        criterion,
        max_steps,
    )
}

/// Least squares on the true support: the gold standard the selectors are
/// compared against.
///
/// Fits the beta-support mains plus the gamma-support interactions; the
/// reported main set is the full importance set (parents included).
pub fn oracle_fit(
    data: &Dataset,
    truth: &QuadraticModelSpec,
) -> Result<SelectionResult, SelectError> {
    if truth.p != data.p() {
        return Err(SelectError::Invalid(
            "truth dimension does not match the data".into(),
        ));
    }
    let sets = importance_sets(truth, 0.0);
    let mut effects: Vec<EffectId> = sets
        .beta_support
        .iter()
        .map(|&j| EffectId::Main(j))
        .collect();
    effects.extend(
        sets.interaction_set
            .iter()
            .map(|&(j, k)| EffectId::Interaction(j, k)),
    );
    if effects.len() + 2 > data.n() {
        return Err(SelectError::Invalid(format!(
            "true support of size {} cannot be fit on n = {}",
            effects.len(),
            data.n()
        )));
    }

    let mut cache = ColumnCache::new(&data.x);
    let mut state = ForwardFitState::new(&data.y);
    let n = data.n();
    let rss_floor = RSS_FLOOR_RTOL * state.tss().max(f64::MIN_POSITIVE);
    let criterion = Criterion::Bic;

    let mut path = Vec::with_capacity(effects.len());
    for (t, &e) in effects.iter().enumerate() {
        state.push(cache.get(e).centered.clone())?;
        let crit = criterion_value(
            &criterion.with_ambient(effects.len()),
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

    let mut result = assemble_result(&mut cache, &data.y, path, &effects, &criterion)?;
    // Importance-set mains (parents of interactions) count as selected even
    // when their linear coefficient is zero.
    for &j in &sets.main_set {
        result.selected.insert(EffectId::Main(j));
    }
    Ok(result)
}
