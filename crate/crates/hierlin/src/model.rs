//! The semantic layer for interaction models: effect identifiers, ground
//! truth specifications, importance sets, coding transformations, and
//! heredity checks.
//!
//! Supports of the main-coefficient vector are not stable under recoding of
//! the predictors once interactions are present: shifting `X_1` changes the
//! coefficient of the linear term whenever `X_1^2` carries weight. The
//! *importance set* of main effects,
//! `T = { j : beta_j^2 + sum_k gamma_jk^2 > 0 }`, is invariant, and so are
//! the interaction support and the signs of the interaction coefficients.
//! [`importance_sets`] computes these invariant objects and
//! [`apply_transform`] implements the reparameterization they are invariant
//! under.

use std::collections::{BTreeMap, BTreeSet};

/// Identifier for one regressor of the quadratic model.
///
/// Indices are 1-based to match the usual `X_1, ..., X_p` naming.
/// Interactions are stored in canonical order `j <= k`; `(j, j)` denotes the
/// quadratic term `X_j^2`. The derived ordering sorts all main effects
/// before all interactions and is used for deterministic tie-breaking.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EffectId {
    Main(usize),
    Interaction(usize, usize),
}

impl EffectId {
    /// Canonicalizing interaction constructor: the smaller index goes first.
    pub fn interaction(j: usize, k: usize) -> Self {
        if j <= k {
            EffectId::Interaction(j, k)
        } else {
            EffectId::Interaction(k, j)
        }
    }

    /// Parent main effects: `(j, k)` has parents `j` and `k`; a quadratic
    /// `(j, j)` has the single parent `j`.
    pub fn parents(&self) -> Vec<usize> {
        match *self {
            EffectId::Main(_) => Vec::new(),
            EffectId::Interaction(j, k) if j == k => vec![j],
            EffectId::Interaction(j, k) => vec![j, k],
        }
    }

    pub fn is_main(&self) -> bool {
        matches!(self, EffectId::Main(_))
    }

    pub fn label(&self) -> String {
        match *self {
            EffectId::Main(j) => format!("X{j}"),
            EffectId::Interaction(j, k) if j == k => format!("X{j}^2"),
            EffectId::Interaction(j, k) => format!("X{j}*X{k}"),
        }
    }
}

/// Ground-truth generating process for the quadratic model
/// `Y = beta0 + sum beta_j X_j + sum_{j<=k} gamma_jk X_j X_k + eps`,
/// with `eps ~ N(0, sigma^2)`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct QuadraticModelSpec {
    pub p: usize,
    pub beta0: f64,
    /// Main-effect coefficients, `beta[j - 1]` for `X_j`.
    pub beta: Vec<f64>,
    /// Interaction coefficients keyed by canonical `(j, k)`, `j <= k`,
    /// 1-based. Absent keys are zero. Serialized as `[j, k, value]` triples.
    #[serde(serialize_with = "serialize_gamma")]
    pub gamma: BTreeMap<(usize, usize), f64>,
    /// Noise standard deviation, strictly positive.
    pub sigma: f64,
    /// Whether the predictors of the intended design are mean zero. Signs of
    /// main effects are only parametrization-free under a centered design;
    /// this flag is metadata set by the data generators and carries no
    /// behavioral weight.
    pub centered: bool,
}

impl QuadraticModelSpec {
    pub fn new(p: usize, beta0: f64, beta: Vec<f64>, sigma: f64, centered: bool) -> Self {
        assert_eq!(beta.len(), p, "beta must have length p");
        assert!(sigma > 0.0, "sigma must be positive");
        QuadraticModelSpec {
            p,
            beta0,
            beta,
            gamma: BTreeMap::new(),
            sigma,
            centered,
        }
    }

    /// Sets `gamma_jk`, canonicalizing the index order. A zero value removes
    /// the entry.
    pub fn set_gamma(&mut self, j: usize, k: usize, value: f64) {
        assert!(
            (1..=self.p).contains(&j) && (1..=self.p).contains(&k),
            "interaction index out of range"
        );
        let key = if j <= k { (j, k) } else { (k, j) };
        if value == 0.0 {
            self.gamma.remove(&key);
        } else {
            self.gamma.insert(key, value);
        }
    }

    pub fn with_gamma(mut self, j: usize, k: usize, value: f64) -> Self {
        self.set_gamma(j, k, value);
        self
    }

    /// `gamma_jk` under the symmetric convention (`gamma_jk = gamma_kj`).
    pub fn gamma_at(&self, j: usize, k: usize) -> f64 {
        let key = if j <= k { (j, k) } else { (k, j) };
        self.gamma.get(&key).copied().unwrap_or(0.0)
    }

    /// Signal value `beta0 + x . beta + sum gamma_jk x_j x_k` at one
    /// predictor row (noise excluded).
    pub fn signal(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.p);
        let mut s = self.beta0;
        for (b, v) in self.beta.iter().zip(x) {
            s += b * v;
        }
        for (&(j, k), &g) in &self.gamma {
            s += g * x[j - 1] * x[k - 1];
        }
        s
    }

    /// Number of nonzero coefficients: `|S(beta)| + |support(gamma)|`.
    pub fn support_size(&self) -> usize {
        self.beta.iter().filter(|b| **b != 0.0).count() + self.gamma.len()
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.beta.len() != self.p {
            return Err(format!(
                "beta has length {} but p = {}",
                self.beta.len(),
                self.p
            ));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(format!(
                "sigma must be positive and finite, got {}",
                self.sigma
            ));
        }
        if self.beta.iter().any(|b| !b.is_finite()) || !self.beta0.is_finite() {
            return Err("beta coefficients must be finite".into());
        }
        for (&(j, k), &g) in &self.gamma {
            if j > k || j < 1 || k > self.p {
                return Err(format!(
                    "gamma key ({j},{k}) is not canonical within 1..={}",
                    self.p
                ));
            }
            if !g.is_finite() {
                return Err(format!("gamma_({j},{k}) must be finite"));
            }
        }
        Ok(())
    }
}

fn serialize_gamma<S: serde::Serializer>(
    gamma: &BTreeMap<(usize, usize), f64>,
    s: S,
) -> Result<S::Ok, S::Error> {
    s.collect_seq(gamma.iter().map(|(&(j, k), &v)| (j, k, v)))
}

/// Coding transformation `X~_j = a_j (X_j - c_j)` with `a_j > 0`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct CodingTransform {
    pub scale: Vec<f64>,
    pub center: Vec<f64>,
}

impl CodingTransform {
    pub fn new(scale: Vec<f64>, center: Vec<f64>) -> Self {
        assert_eq!(scale.len(), center.len());
        assert!(
            scale.iter().all(|a| *a > 0.0),
            "scale factors must be positive"
        );
        CodingTransform { scale, center }
    }

    pub fn identity(p: usize) -> Self {
        CodingTransform {
            scale: vec![1.0; p],
            center: vec![0.0; p],
        }
    }

    /// The single transform equivalent to applying `self` first and `next`
    /// second: `a = a1 * a2`, `c = c1 + c2 / a1`.
    pub fn then(&self, next: &CodingTransform) -> CodingTransform {
        assert_eq!(self.scale.len(), next.scale.len());
        let scale = self
            .scale
            .iter()
            .zip(&next.scale)
            .map(|(a1, a2)| a1 * a2)
            .collect();
        let center = self
            .center
            .iter()
            .zip(self.scale.iter())
            .zip(&next.center)
            .map(|((c1, a1), c2)| c1 + c2 / a1)
            .collect();
        CodingTransform { scale, center }
    }
}

/// The invariant description of a model spec.
#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceSets {
    /// Important main effects `T = { j : beta_j^2 + sum_k gamma_jk^2 > tol^2 }`.
    pub main_set: BTreeSet<usize>,
    /// Support of gamma, canonical pairs.
    pub interaction_set: BTreeSet<(usize, usize)>,
    /// Support of beta. Unlike `main_set`, this is parametrization
    /// dependent.
    pub beta_support: BTreeSet<usize>,
    /// `sign(beta_j)` per coordinate; only parametrization-free when the
    /// predictors are mean zero.
    pub sign_vector: Vec<i8>,
}

/// Importance sets of a spec. Coefficients with magnitude at most `tol` are
/// treated as zero; pass `tol = 0` for exact ground-truth specs and a small
/// positive value (for example `1e-8`) for estimated coefficient maps.
pub fn importance_sets(spec: &QuadraticModelSpec, tol: f64) -> ImportanceSets {
    assert!(tol >= 0.0);
    let above = |v: f64| v.abs() > tol;

    let mut interaction_set = BTreeSet::new();
    let mut gamma_sq = vec![0.0; spec.p];
    for (&(j, k), &g) in &spec.gamma {
        if above(g) {
            interaction_set.insert((j, k));
            gamma_sq[j - 1] += g * g;
            if k != j {
                gamma_sq[k - 1] += g * g;
            }
        }
    }

    let mut main_set = BTreeSet::new();
    let mut beta_support = BTreeSet::new();
    let mut sign_vector = vec![0_i8; spec.p];
    for j in 1..=spec.p {
        let b = spec.beta[j - 1];
        if above(b) {
            beta_support.insert(j);
            main_set.insert(j);
            sign_vector[j - 1] = if b > 0.0 { 1 } else { -1 };
        }
        if gamma_sq[j - 1] > 0.0 {
            main_set.insert(j);
        }
    }

    ImportanceSets {
        main_set,
        interaction_set,
        beta_support,
        sign_vector,
    }
}

/// Reparameterizes a spec under `X~_j = a_j (X_j - c_j)`.
///
/// The returned spec generates the same response distribution in the new
/// coordinates:
///
/// - `gamma~_jk = gamma_jk / (a_j a_k)`
/// - `beta~_j = (beta_j + sum_{k != j} gamma_jk c_k + 2 gamma_jj c_j) / a_j`
/// - `beta0~ = beta0 + sum_j beta_j c_j + sum_{j<=k} gamma_jk c_j c_k`
///
/// The quadratic term contributes `2 gamma_jj c_j` to the linear
/// coefficient because `X_j^2 = (X~_j / a_j + c_j)^2` expands with a doubled
/// cross term.
pub fn apply_transform(spec: &QuadraticModelSpec, t: &CodingTransform) -> QuadraticModelSpec {
    assert_eq!(t.scale.len(), spec.p, "transform dimension must match p");
    let a = &t.scale;
    let c = &t.center;

    let mut beta0 = spec.beta0;
    for j in 0..spec.p {
        beta0 += spec.beta[j] * c[j];
    }
    for (&(j, k), &g) in &spec.gamma {
        beta0 += g * c[j - 1] * c[k - 1];
    }

    let mut beta = vec![0.0; spec.p];
    for j in 1..=spec.p {
        let mut lin = spec.beta[j - 1];
        for (&(a_idx, b_idx), &g) in &spec.gamma {
            if a_idx == j && b_idx == j {
                lin += 2.0 * g * c[j - 1];
            } else if a_idx == j {
                lin += g * c[b_idx - 1];
            } else if b_idx == j {
                lin += g * c[a_idx - 1];
            }
        }
        beta[j - 1] = lin / a[j - 1];
    }

    let mut gamma = BTreeMap::new();
    for (&(j, k), &g) in &spec.gamma {
        let v = g / (a[j - 1] * a[k - 1]);
        if v != 0.0 {
            gamma.insert((j, k), v);
        }
    }

    QuadraticModelSpec {
        p: spec.p,
        beta0,
        beta,
        gamma,
        sigma: spec.sigma,
        // A transform generally destroys knowledge about centering.
        centered: false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeredityMode {
    Strong,
    Weak,
}

/// Outcome of a heredity check; `violations` lists the offending pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct HeredityCheck {
    pub satisfied: bool,
    pub violations: Vec<(usize, usize)>,
}

/// Checks the heredity condition of an interaction set against a main set.
///
/// Strong heredity requires both parents of every interaction in
/// `main_set`; weak heredity requires at least one. A quadratic `(j, j)`
/// requires its single parent `j` under both modes.
pub fn check_heredity(
    main_set: &BTreeSet<usize>,
    interaction_set: &BTreeSet<(usize, usize)>,
    mode: HeredityMode,
) -> HeredityCheck {
    let mut violations = Vec::new();
    for &(j, k) in interaction_set {
        debug_assert!(j <= k, "interaction pairs must be canonical");
        let ok = match mode {
            HeredityMode::Strong => main_set.contains(&j) && main_set.contains(&k),
            HeredityMode::Weak => main_set.contains(&j) || main_set.contains(&k),
        };
        if !ok {
            violations.push((j, k));
        }
    }
    HeredityCheck {
        satisfied: violations.is_empty(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{table1_spec, turlach_spec};
    use proptest::prelude::*;

    #[test]
    fn effect_ordering_is_mains_first_then_lexicographic() {
        let mut effects = vec![
            EffectId::interaction(2, 1),
            EffectId::Main(3),
            EffectId::interaction(1, 1),
            EffectId::Main(1),
        ];
        effects.sort();
        assert_eq!(
            effects,
            vec![
                EffectId::Main(1),
                EffectId::Main(3),
                EffectId::Interaction(1, 1),
                EffectId::Interaction(1, 2),
            ]
        );
    }

    #[test]
    fn importance_of_centered_turlach_form() {
        // Centered form: beta = (0, 1, 1, 1, 1, 0, ...), gamma_11 = 1.
        let mut beta = vec![0.0; 10];
        for j in 2..=5 {
            beta[j - 1] = 1.0;
        }
        let spec = QuadraticModelSpec::new(10, 2.0, beta, 1.0, true).with_gamma(1, 1, 1.0);
        let sets = importance_sets(&spec, 0.0);
        assert_eq!(sets.main_set, (1..=5).collect());
        assert_eq!(sets.interaction_set, [(1, 1)].into_iter().collect());
        assert_eq!(sets.beta_support, (2..=5).collect());
    }

    #[test]
    fn importance_reduces_to_beta_support_without_interactions() {
        let spec = QuadraticModelSpec::new(3, 0.0, vec![1.0, 0.0, 0.0], 1.0, true);
        let sets = importance_sets(&spec, 0.0);
        assert_eq!(sets.main_set, [1].into_iter().collect());
        assert_eq!(sets.main_set, sets.beta_support);
        assert_eq!(sets.sign_vector, vec![1, 0, 0]);
    }

    #[test]
    fn importance_of_table1_spec() {
        let sets = importance_sets(&table1_spec(), 0.0);
        assert_eq!(sets.main_set, [1, 3, 5, 7, 9].into_iter().collect());
        assert_eq!(sets.interaction_set.len(), 4);
        assert!(sets.interaction_set.contains(&(1, 7)));
    }

    #[test]
    fn identity_transform_is_a_no_op() {
        let spec = turlach_spec();
        let out = apply_transform(&spec, &CodingTransform::identity(spec.p));
        assert_eq!(out.beta, spec.beta);
        assert_eq!(out.gamma, spec.gamma);
        assert_eq!(out.beta0, spec.beta0);
    }

    #[test]
    fn turlach_shift_walks_the_linear_coefficient_through_minus_one_zero_one() {
        // Y = (X1 - 0.5)^2 + X2 + ... + X5: shifting X1 by c in {0, 0.5, 1}
        // turns the X1 coefficient into -1, 0, 1.
        let spec = turlach_spec();
        for (c, expected) in [(0.0, -1.0), (0.5, 0.0), (1.0, 1.0)] {
            let mut t = CodingTransform::identity(spec.p);
            t.center[0] = c;
            let out = apply_transform(&spec, &t);
            assert!(
                (out.beta[0] - expected).abs() < 1e-15,
                "c = {c}: beta1 = {}",
                out.beta[0]
            );
        }
    }

    #[test]
    fn pure_rescale_divides_gamma_by_both_scales() {
        let spec = QuadraticModelSpec::new(2, 0.0, vec![0.0, 0.0], 1.0, true).with_gamma(1, 2, 4.0);
        let t = CodingTransform::new(vec![2.0, 2.0], vec![0.0, 0.0]);
        let out = apply_transform(&spec, &t);
        assert!((out.gamma_at(1, 2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn heredity_examples() {
        let mains: BTreeSet<usize> = [1, 2].into_iter().collect();
        let inter: BTreeSet<(usize, usize)> = [(1, 2)].into_iter().collect();
        assert!(check_heredity(&mains, &inter, HeredityMode::Strong).satisfied);

        let mains: BTreeSet<usize> = [1].into_iter().collect();
        let strong = check_heredity(&mains, &inter, HeredityMode::Strong);
        assert!(!strong.satisfied);
        assert_eq!(strong.violations, vec![(1, 2)]);
        assert!(check_heredity(&mains, &inter, HeredityMode::Weak).satisfied);

        let empty = BTreeSet::new();
        assert!(!check_heredity(&empty, &inter, HeredityMode::Strong).satisfied);
        let weak = check_heredity(&empty, &inter, HeredityMode::Weak);
        assert!(!weak.satisfied);
        assert_eq!(weak.violations, vec![(1, 2)]);
    }

    #[test]
    fn quadratic_needs_its_parent_in_both_modes() {
        let inter: BTreeSet<(usize, usize)> = [(2, 2)].into_iter().collect();
        let empty = BTreeSet::new();
        assert!(!check_heredity(&empty, &inter, HeredityMode::Strong).satisfied);
        assert!(!check_heredity(&empty, &inter, HeredityMode::Weak).satisfied);
        let mains: BTreeSet<usize> = [2].into_iter().collect();
        assert!(check_heredity(&mains, &inter, HeredityMode::Strong).satisfied);
    }

    // Random-spec strategies for the invariance properties.
    fn arb_spec() -> impl Strategy<Value = QuadraticModelSpec> {
        (2_usize..7).prop_flat_map(|p| {
            let beta = proptest::collection::vec(-3.0_f64..3.0, p);
            let pairs = proptest::collection::vec(((1..=p), (1..=p), -2.0_f64..2.0), 0..4);
            (beta, pairs).prop_map(move |(beta, pairs)| {
                let mut spec = QuadraticModelSpec::new(p, 0.5, beta, 1.0, true);
                for (j, k, g) in pairs {
                    if g != 0.0 {
                        spec.set_gamma(j, k, g);
                    }
                }
                spec
            })
        })
    }

    fn arb_transform(p: usize) -> impl Strategy<Value = CodingTransform> {
        (
            proptest::collection::vec(0.25_f64..4.0, p),
            proptest::collection::vec(-2.0_f64..2.0, p),
        )
            .prop_map(|(scale, center)| CodingTransform::new(scale, center))
    }

    proptest! {
        #[test]
        fn transform_preserves_importance_and_gamma_signs(
            (spec, t) in arb_spec().prop_flat_map(|s| {
                let p = s.p;
                (Just(s), arb_transform(p))
            })
        ) {
            let before = importance_sets(&spec, 0.0);
            let after = importance_sets(&apply_transform(&spec, &t), 0.0);
            prop_assert_eq!(&before.main_set, &after.main_set);
            prop_assert_eq!(&before.interaction_set, &after.interaction_set);
            let transformed = apply_transform(&spec, &t);
            for (&key, &g) in &spec.gamma {
                prop_assert_eq!(transformed.gamma_at(key.0, key.1).signum(), g.signum());
            }
            // S(beta) is always contained in T(beta, gamma).
            prop_assert!(before.beta_support.is_subset(&before.main_set));
            prop_assert!(after.beta_support.is_subset(&after.main_set));
        }

        #[test]
        fn transform_composition_matches_sequential_application(
            (spec, t1, t2) in arb_spec().prop_flat_map(|s| {
                let p = s.p;
                (Just(s), arb_transform(p), arb_transform(p))
            })
        ) {
            let sequential = apply_transform(&apply_transform(&spec, &t1), &t2);
            let composed = apply_transform(&spec, &t1.then(&t2));
            prop_assert!((sequential.beta0 - composed.beta0).abs() <= 1e-12 * (1.0 + composed.beta0.abs()));
            for j in 0..spec.p {
                prop_assert!((sequential.beta[j] - composed.beta[j]).abs() <= 1e-12 * (1.0 + composed.beta[j].abs()));
            }
            for (&key, &g) in &composed.gamma {
                prop_assert!((sequential.gamma_at(key.0, key.1) - g).abs() <= 1e-12 * (1.0 + g.abs()));
            }
        }

        #[test]
        fn transformed_spec_generates_the_same_signal(
            (spec, t, x) in arb_spec().prop_flat_map(|s| {
                let p = s.p;
                (Just(s), arb_transform(p), proptest::collection::vec(-2.0_f64..2.0, p))
            })
        ) {
            // Evaluating the transformed spec at the transformed point must
            // give the same signal as the raw spec at the raw point.
            let transformed = apply_transform(&spec, &t);
            let x_tilde: Vec<f64> = x
                .iter()
                .zip(t.scale.iter().zip(&t.center))
                .map(|(v, (a, c))| a * (v - c))
                .collect();
            let raw = spec.signal(&x);
            let via_transform = transformed.signal(&x_tilde);
            prop_assert!((raw - via_transform).abs() <= 1e-10 * (1.0 + raw.abs()));
        }
    }

    #[test]
    fn beta_support_is_not_invariant_for_turlach() {
        // The c = 0.5 shift empties X1 out of the beta support while the
        // importance set keeps it: the witness that support-based
        // definitions of importance break down with interactions.
        let spec = turlach_spec();
        let mut t = CodingTransform::identity(spec.p);
        t.center = vec![0.5; spec.p];
        let shifted = apply_transform(&spec, &t);
        let before = importance_sets(&spec, 0.0);
        let after = importance_sets(&shifted, 0.0);
        assert!(before.beta_support.contains(&1));
        assert!(!after.beta_support.contains(&1));
        assert_eq!(before.main_set, after.main_set);
    }
}
