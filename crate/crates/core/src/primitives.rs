//! Shared statistical subroutines: Bernoulli estimation, the fraction
//! estimators built on it, collision-based vertex counting, and rejection
//! sampling of uniform vertices from quasi-regular sets.

use std::collections::HashMap;

use thiserror::Error;

use crate::graph::VertexId;
use crate::oracle::{OracleError, OracleKind, OracleSession, QueryMeter};

/// Accuracy / failure-probability knobs shared by every estimator, plus the
/// named numeric constants they use. `median_reps` is honored by the trial
/// runner: values above 1 wrap an estimator in median-of-independent-runs
/// boosting.
#[derive(Clone, Debug)]
pub struct EstimatorConfig {
    pub eps: f64,
    pub delta: f64,
    pub median_reps: u32,
    pub constants: Constants,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            eps: 0.2,
            delta: 0.1,
            median_reps: 1,
            constants: Constants::default(),
        }
    }
}

impl EstimatorConfig {
    pub fn new(eps: f64, delta: f64) -> Result<Self, EstimatorError> {
        if !(0.0 < eps && eps < 1.0) || !(0.0 < delta && delta < 1.0) {
            return Err(EstimatorError::InvalidConfig(format!(
                "eps and delta must lie in (0,1), got eps={eps} delta={delta}"
            )));
        }
        Ok(EstimatorConfig {
            eps,
            delta,
            ..Default::default()
        })
    }

    pub fn with_median_reps(mut self, reps: u32) -> Self {
        self.median_reps = reps.max(1);
        self
    }

    /// Overrides a named constant; see [`Constants::set`] for the names.
    pub fn with_constant(mut self, name: &str, value: f64) -> Result<Self, EstimatorError> {
        self.constants.set(name, value)?;
        Ok(self)
    }

    /// Success-count threshold of the Bernoulli estimator:
    /// 3(1+eps)/eps^2 * ln(2/delta), with 3 overridable as "bernoulli".
    pub fn bernoulli_threshold(&self) -> f64 {
        self.constants.bernoulli * (1.0 + self.eps) / (self.eps * self.eps)
            * (2.0 / self.delta).ln()
    }

    /// Collision target of the vertex-count estimator:
    /// ceil(12/eps^2 * ln(4/delta)), with 12 overridable as "collision".
    pub fn collision_tau(&self) -> u64 {
        (self.constants.collision / (self.eps * self.eps) * (4.0 / self.delta).ln()).ceil() as u64
    }

    /// Repetition constant of the density-or-count estimator. Defaults to
    /// ceil(delta^-3 * ln^3(1/delta)); override as "a_const".
    pub fn a_const(&self) -> f64 {
        self.constants.a_const.unwrap_or_else(|| {
            let l = (1.0 / self.delta).ln();
            (self.delta.powi(-3) * l * l * l).ceil()
        })
    }
}

/// Named numeric constants with their default values.
#[derive(Clone, Debug)]
pub struct Constants {
    /// Bernoulli estimator success-threshold factor.
    pub bernoulli: f64,
    /// Harmonic estimator sample factor (k = harmonic / (eps^2 p_hat)).
    pub harmonic: f64,
    /// Density estimator rounds factor (t = density * alpha / eps^2).
    pub density: f64,
    /// Edge-count estimator rounds factor (t = numedges * alpha / eps^2).
    pub numedges: f64,
    /// Threshold-setting edge draws of the random-edge estimator (re_edges / eps).
    pub re_edges: f64,
    /// Heavy-hit target of the random-edge estimator (re_threshold / eps^2).
    pub re_threshold: f64,
    /// Phase-2 loop factor of the two-phase random-edge estimator.
    pub re_fast: f64,
    /// Sample factor of the degree-ordered estimator (ers * sqrt(n/g) / eps^2).
    pub ers: f64,
    /// Median repetition factor: ceil(ers_reps * ln(1/delta)) runs per level.
    pub ers_reps: f64,
    /// Sample factor of the bounded-threshold estimator (bt * theta / eps^2).
    pub bt: f64,
    /// Level repetition factor of the bounded-threshold doubling driver.
    pub bt_reps: f64,
    /// Assumed fraction of non-isolated vertices; bt uses bt / bt_beta.
    pub bt_beta: f64,
    /// Collision estimator tau factor.
    pub collision: f64,
    /// Repetition constant of the density-or-count estimator (None = derived
    /// from delta).
    pub a_const: Option<f64>,
    /// Rejection-sampling loop cap factor (attempts <= cap * alpha).
    pub reject_cap: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            bernoulli: 3.0,
            harmonic: 1000.0,
            density: 100.0,
            numedges: 180.0,
            re_edges: 10.0,
            re_threshold: 200.0,
            re_fast: 100.0,
            ers: 100.0,
            ers_reps: 10.0,
            bt: 100.0,
            bt_reps: 10.0,
            bt_beta: 1.0,
            collision: 12.0,
            a_const: None,
            reject_cap: 64.0,
        }
    }
}

impl Constants {
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), EstimatorError> {
        match name {
            "bernoulli" => self.bernoulli = value,
            "harmonic" => self.harmonic = value,
            "density" => self.density = value,
            "numedges" => self.numedges = value,
            "re_edges" => self.re_edges = value,
            "re_threshold" => self.re_threshold = value,
            "re_fast" => self.re_fast = value,
            "ers" => self.ers = value,
            "ers_reps" => self.ers_reps = value,
            "bt" => self.bt = value,
            "bt_reps" => self.bt_reps = value,
            "bt_beta" => self.bt_beta = value,
            "collision" => self.collision = value,
            "a_const" => self.a_const = Some(value),
            "reject_cap" => self.reject_cap = value,
            _ => {
                return Err(EstimatorError::InvalidConfig(format!(
                    "unknown constant {name:?}"
                )))
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("estimator exhausted: {0}")]
    Exhausted(String),
    #[error("no dense class pair found; the heavy-edge precondition failed statistically")]
    NoDensePair,
    #[error("quantile parameter must lie in (0, 1], got {0}")]
    InvalidP(f64),
}

impl EstimatorError {
    pub fn is_budget_exhausted(&self) -> bool {
        matches!(
            self,
            EstimatorError::Oracle(OracleError::BudgetExhausted { .. })
        )
    }
}

/// Outcome of a single estimator run.
#[derive(Clone, Debug, PartialEq)]
pub enum EstimateStatus {
    Value,
    /// The estimator vouches only that the target exceeds this threshold.
    Assert(f64),
    /// Sample size too small to commit to a value.
    Abort,
}

/// An estimator's output: value (when status is `Value`), full query-cost
/// breakdown, the session seed, and named trace numbers for diagnostics.
#[derive(Clone, Debug)]
pub struct Estimate {
    pub status: EstimateStatus,
    pub value: Option<f64>,
    pub cost: QueryMeter,
    pub seed: u64,
    pub trace: Vec<(String, f64)>,
}

impl Estimate {
    pub fn value_from(sess: &OracleSession, value: f64) -> Estimate {
        debug_assert!(value > 0.0);
        Estimate {
            status: EstimateStatus::Value,
            value: Some(value),
            cost: sess.meter().clone(),
            seed: sess.seed(),
            trace: Vec::new(),
        }
    }

    pub fn abort_from(sess: &OracleSession) -> Estimate {
        Estimate {
            status: EstimateStatus::Abort,
            value: None,
            cost: sess.meter().clone(),
            seed: sess.seed(),
            trace: Vec::new(),
        }
    }

    pub fn assert_from(sess: &OracleSession, threshold: f64) -> Estimate {
        Estimate {
            status: EstimateStatus::Assert(threshold),
            value: None,
            cost: sess.meter().clone(),
            seed: sess.seed(),
            trace: Vec::new(),
        }
    }

    pub fn with_trace(mut self, name: &str, value: f64) -> Estimate {
        self.trace.push((name.to_string(), value));
        self
    }

    pub fn trace_value(&self, name: &str) -> Option<f64> {
        self.trace
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }
}

/// Membership test on a vertex that is decidable from (degree, id) alone, so
/// one `Degree` query settles it. Degree ranges are half-open [lo, hi).
#[derive(Clone, Debug, PartialEq)]
pub enum VertexPredicate {
    All,
    DegreeAtLeast(u64),
    DegreeIn { lo: u64, hi: u64 },
    /// Seeded uniform 2-coloring of a degree class; matches vertices in
    /// [lo, hi) whose color equals `bit`.
    Colored { lo: u64, hi: u64, seed: u64, bit: u8 },
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

pub fn color_bit(seed: u64, id: VertexId) -> u8 {
    (splitmix64(seed ^ id.0) & 1) as u8
}

impl VertexPredicate {
    pub fn eval(&self, degree: u64, id: VertexId) -> bool {
        match *self {
            VertexPredicate::All => true,
            VertexPredicate::DegreeAtLeast(d) => degree >= d,
            VertexPredicate::DegreeIn { lo, hi } => lo <= degree && degree < hi,
            VertexPredicate::Colored { lo, hi, seed, bit } => {
                lo <= degree && degree < hi && color_bit(seed, id) == bit
            }
        }
    }

    pub fn needs_degree(&self) -> bool {
        !matches!(self, VertexPredicate::All)
    }
}

/// Result of a Bernoulli estimation run.
#[derive(Clone, Copy, Debug)]
pub struct BernoulliOutcome {
    pub p_hat: f64,
    pub successes: u64,
    pub draws: u64,
}

/// Estimates the success probability of `sampler` by drawing until the
/// success count reaches 3(1+eps)/eps^2 * ln(2/delta).
///
/// With probability >= 1 - delta the result is within (1 +- eps) of the true
/// probability; expected draws O(ln(1/delta) / (p eps^2)).
pub fn bernoulli_est<F>(
    sess: &mut OracleSession,
    cfg: &EstimatorConfig,
    sampler: F,
) -> Result<BernoulliOutcome, EstimatorError>
where
    F: FnMut(&mut OracleSession) -> Result<bool, EstimatorError>,
{
    Ok(bernoulli_est_capped(sess, cfg, None, sampler)?
        .expect("uncapped bernoulli estimation always yields an outcome"))
}

/// [`bernoulli_est`] with an optional zero-success guard: returns `None`
/// when `zero_cap` draws pass without a single success, so callers probing a
/// possibly-empty event can abort instead of looping forever.
pub fn bernoulli_est_capped<F>(
    sess: &mut OracleSession,
    cfg: &EstimatorConfig,
    zero_cap: Option<u64>,
    mut sampler: F,
) -> Result<Option<BernoulliOutcome>, EstimatorError>
where
    F: FnMut(&mut OracleSession) -> Result<bool, EstimatorError>,
{
    let threshold = cfg.bernoulli_threshold();
    let mut successes = 0u64;
    let mut draws = 0u64;
    while (successes as f64) < threshold {
        if sampler(sess)? {
            successes += 1;
        }
        draws += 1;
        if successes == 0 {
            if let Some(cap) = zero_cap {
                if draws >= cap {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(BernoulliOutcome {
        p_hat: successes as f64 / draws as f64,
        successes,
        draws,
    }))
}

/// Estimates |A| / n for a query-able vertex predicate using uniform vertex
/// draws. Cost per draw: 1 (+1 degree query unless the predicate is `All`).
pub fn est_frac_vert(
    sess: &mut OracleSession,
    a: &VertexPredicate,
    cfg: &EstimatorConfig,
) -> Result<f64, EstimatorError> {
    let needs_degree = a.needs_degree();
    let out = bernoulli_est(sess, cfg, |sess| {
        let x = sess.rand_vert()?;
        let d = if needs_degree { sess.degree(x)? } else { 0 };
        Ok(a.eval(d, x))
    })?;
    Ok(out.p_hat)
}

/// Estimates m(A,B) / m for query-able predicates using uniform edge draws.
/// Cost per draw: 3 (edge + two degree queries).
pub fn est_frac_edge(
    sess: &mut OracleSession,
    a: &VertexPredicate,
    b: &VertexPredicate,
    cfg: &EstimatorConfig,
) -> Result<f64, EstimatorError> {
    let out = bernoulli_est(sess, cfg, |sess| {
        let (u, v) = sess.rand_edge()?;
        let du = sess.degree(u)?;
        let dv = sess.degree(v)?;
        Ok((a.eval(du, u) && b.eval(dv, v)) || (a.eval(dv, v) && b.eval(du, u)))
    })?;
    Ok(out.p_hat)
}

/// Estimates n from one known vertex `x` by measuring the fraction of
/// uniform vertices adjacent to it: n_hat = deg(x) / p_hat. The adjacency
/// check uses a pair query when available, otherwise an additive query on
/// {x, y}.
pub fn est_num_ver(
    sess: &mut OracleSession,
    x: VertexId,
    cfg: &EstimatorConfig,
) -> Result<f64, EstimatorError> {
    let use_pair = sess.policy().pair;
    if !use_pair && !sess.policy().additive {
        return Err(OracleError::Disabled(OracleKind::Pair).into());
    }
    let deg_x = sess.degree(x)?;
    let out = bernoulli_est(sess, cfg, |sess| {
        let y = sess.rand_vert()?;
        if use_pair {
            Ok(sess.pair(x, y)?)
        } else {
            Ok(sess.additive(&[x, y])? > 0)
        }
    })?;
    Ok(deg_x as f64 / out.p_hat)
}

/// Result of the collision-based vertex-count estimator.
#[derive(Clone, Copy, Debug)]
pub struct CollisionEstimate {
    pub n_hat: f64,
    pub draws: u64,
    pub tau: u64,
}

/// Pairwise collision counter over a stream of draws: each new occurrence of
/// a vertex collides with every earlier occurrence, so after Z draws the
/// count has expectation exactly C(Z,2)/n. Counting whole pairs (rather than
/// flagging a vertex once) keeps the Z^2/(2 tau) estimate unbiased even when
/// the draw count is a sizable fraction of n.
#[derive(Default)]
pub struct CollisionCounter {
    dict: HashMap<VertexId, u64>,
    pub collisions: u64,
    pub draws: u64,
}

impl CollisionCounter {
    pub fn observe(&mut self, x: VertexId) {
        self.draws += 1;
        let c = self.dict.entry(x).or_insert(0);
        *c += 1;
        self.collisions += *c - 1;
    }

    pub fn estimate(&self, tau: u64) -> f64 {
        (self.draws as f64) * (self.draws as f64) / (2.0 * tau as f64)
    }
}

/// Birthday-paradox vertex counting: draw uniform vertices until `tau`
/// pairwise collisions have been seen, then return Z^2 / (2 tau). Expected
/// draws O(sqrt(n) / eps^2).
pub fn est_num_coll(
    sess: &mut OracleSession,
    cfg: &EstimatorConfig,
) -> Result<CollisionEstimate, EstimatorError> {
    let tau = cfg.collision_tau();
    let mut counter = CollisionCounter::default();
    while counter.collisions < tau {
        let x = sess.rand_vert()?;
        counter.observe(x);
    }
    Ok(CollisionEstimate {
        n_hat: counter.estimate(tau),
        draws: counter.draws,
        tau,
    })
}

/// Draws a uniform vertex of the quasi-regular set `a` (every member degree
/// in [k, 2k)) by rejection from random edges: take a uniform edge endpoint
/// x and accept with probability k / deg(x) when x is in `a`.
///
/// Conditioned on acceptance the output is uniform on `a`; each rejection
/// loop costs 2 queries and the expected loop count is O(alpha) when `a`
/// carries at least m/alpha edges. The loop gives up after
/// `reject_cap * alpha_hint` attempts so violated preconditions surface as
/// an error instead of a hang. Returns the vertex and its (already queried)
/// degree.
pub fn rand_vert_samp(
    sess: &mut OracleSession,
    a: &VertexPredicate,
    k: u64,
    alpha_hint: f64,
    cfg: &EstimatorConfig,
) -> Result<(VertexId, u64), EstimatorError> {
    let cap = (cfg.constants.reject_cap * alpha_hint).ceil().max(64.0) as u64;
    for _ in 0..cap {
        let (x, _) = sess.rand_edge()?;
        let dx = sess.degree(x)?;
        if !a.eval(dx, x) {
            continue;
        }
        if sess.aux_coin(k as f64 / dx as f64) {
            return Ok((x, dx));
        }
    }
    Err(EstimatorError::Exhausted(format!(
        "rejection sampler exceeded {cap} attempts"
    )))
}

/// Median-of-independent-runs boosting: executes `run` on `reps` fresh
/// subsessions (branch ids `branch_base..`), returns the median of the
/// successful values with the summed cost. If no repetition produced a
/// value, the first non-value outcome is returned.
pub fn median_of_runs<'g, F>(
    parent: &OracleSession<'g>,
    reps: u32,
    branch_base: u64,
    mut run: F,
) -> Result<Estimate, EstimatorError>
where
    F: FnMut(&mut OracleSession<'g>) -> Result<Estimate, EstimatorError>,
{
    let mut cost = QueryMeter::default();
    let mut values = Vec::new();
    let mut fallback: Option<Estimate> = None;
    for r in 0..reps.max(1) {
        let mut sess = parent.subsession(branch_base + r as u64);
        let est = run(&mut sess)?;
        cost.absorb(&est.cost);
        match est.status {
            EstimateStatus::Value => values.push(est.value.unwrap()),
            _ => fallback = fallback.or(Some(est)),
        }
    }
    if values.is_empty() {
        let mut est = fallback.expect("at least one repetition ran");
        est.cost = cost;
        return Ok(est);
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = values[values.len() / 2];
    Ok(Estimate {
        status: EstimateStatus::Value,
        value: Some(median),
        cost,
        seed: parent.seed(),
        trace: vec![("median_runs".to_string(), values.len() as f64)],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{generate, GraphFamily, GraphFamilySpec};
    use crate::graph::Graph;
    use crate::oracle::AccessPolicy;

    #[test]
    fn bernoulli_deterministic_on_sure_success() {
        // eps = 0.5, delta = 0.1: threshold = 3*1.5/0.25 * ln 20 = 53.92..,
        // every draw succeeds, so exactly 54 draws happen.
        let g = Graph::build_from_edges(None, &[(1, 2)]).unwrap();
        let mut sess = OracleSession::new(&g, AccessPolicy::base(), 0).unwrap();
        let cfg = EstimatorConfig::new(0.5, 0.1).unwrap();
        let out = bernoulli_est(&mut sess, &cfg, |_| Ok(true)).unwrap();
        assert_eq!(out.draws, 54);
        assert_eq!(out.successes, 54);
        assert_eq!(out.p_hat, 1.0);
    }

    #[test]
    fn bernoulli_stopping_rule_matches_ceiling() {
        let g = Graph::build_from_edges(None, &[(1, 2)]).unwrap();
        for (eps, delta) in [(0.3, 0.2), (0.1, 0.05), (0.7, 0.01), (0.25, 0.5)] {
            let cfg = EstimatorConfig::new(eps, delta).unwrap();
            let mut sess = OracleSession::new(&g, AccessPolicy::base(), 0).unwrap();
            let out = bernoulli_est(&mut sess, &cfg, |_| Ok(true)).unwrap();
            assert_eq!(out.successes as f64, cfg.bernoulli_threshold().ceil());
        }
    }

    #[test]
    fn bernoulli_concentrates() {
        // p = 0.1 via a 10-clique predicate on a 100-vertex graph:
        // 200 seeded runs, at least 190 inside (1 +- 0.1) * 0.1.
        let g = generate(&GraphFamilySpec::new(
            GraphFamily::CliqueMatchingMix {
                gamma: 1,
                cliques: 1,
                clique_size: 10,
                n: 100,
            },
            5,
        ))
        .unwrap();
        let cfg = EstimatorConfig::new(0.1, 0.05).unwrap();
        let pred = VertexPredicate::DegreeAtLeast(2); // the 10 clique vertices
        let mut hits = 0;
        for seed in 0..200 {
            let mut sess = OracleSession::new(&g, AccessPolicy::base(), seed).unwrap();
            let p = est_frac_vert(&mut sess, &pred, &cfg).unwrap();
            if (p - 0.1).abs() <= 0.01 {
                hits += 1;
            }
        }
        assert!(hits >= 190, "only {hits}/200 runs were inside the band");
    }

    #[test]
    fn bernoulli_budget_guard() {
        let g = Graph::build_from_edges(None, &[(1, 2)]).unwrap();
        let mut sess =
            OracleSession::with_budget(&g, AccessPolicy::base(), 0, Some(100)).unwrap();
        let cfg = EstimatorConfig::default();
        let err = bernoulli_est(&mut sess, &cfg, |sess| {
            sess.rand_vert()?;
            Ok(false)
        })
        .unwrap_err();
        assert!(err.is_budget_exhausted());
    }

    #[test]
    fn frac_vert_all_is_exactly_one() {
        let g = generate(&GraphFamilySpec::new(GraphFamily::Cycle { n: 8 }, 1)).unwrap();
        let mut sess = OracleSession::new(&g, AccessPolicy::base(), 3).unwrap();
        let p = est_frac_vert(&mut sess, &VertexPredicate::All, &EstimatorConfig::default())
            .unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn frac_edge_half_on_k4() {
        // A = one fixed vertex (via coloring with a seed that isolates it is
        // fiddly; use degree classes on a star instead): center-leaf edges
        // are all edges, so frac(center, leaves) = 1; sanity-check a split
        // fraction on a path of 3 edges instead.
        let g = Graph::build_from_edges(None, &[(1, 2), (2, 3), (3, 4)]).unwrap();
        // A = degree-1 vertices (ends), B = degree-2 vertices (middle):
        // 2 of 3 edges run between A and B.
        let cfg = EstimatorConfig::new(0.1, 0.05).unwrap();
        let a = VertexPredicate::DegreeIn { lo: 1, hi: 2 };
        let b = VertexPredicate::DegreeIn { lo: 2, hi: 3 };
        let mut inside = 0;
        for seed in 0..100 {
            let policy = AccessPolicy::base().with_rand_edge();
            let mut sess = OracleSession::new(&g, policy, seed).unwrap();
            let f = est_frac_edge(&mut sess, &a, &b, &cfg).unwrap();
            if (f - 2.0 / 3.0).abs() <= 0.1 * (2.0 / 3.0) {
                inside += 1;
            }
        }
        assert!(inside >= 90, "only {inside}/100 in band");
    }

    #[test]
    fn est_num_ver_on_star() {
        let g = generate(&GraphFamilySpec::new(GraphFamily::Star { leaves: 100 }, 2)).unwrap();
        let center = (0..101)
            .find(|&i| g.degree_by_index(i) == 100)
            .map(|i| g.id(i))
            .unwrap();
        let cfg = EstimatorConfig::new(0.1, 0.05).unwrap();
        let mut inside = 0;
        for seed in 0..50 {
            let policy = AccessPolicy::standard();
            let mut sess = OracleSession::new(&g, policy, seed).unwrap();
            let n_hat = est_num_ver(&mut sess, center, &cfg).unwrap();
            if (n_hat - 101.0).abs() <= 0.1 * 101.0 {
                inside += 1;
            }
        }
        assert!(inside >= 45, "only {inside}/50 in band");
    }

    #[test]
    fn collision_trace_on_single_vertex_universe() {
        // Every draw returns the same vertex; draw z collides with the z-1
        // earlier copies, so the count after z draws is C(z,2): 0, 1, 3, ...
        // tau = 3 is reached at Z = 3 and the estimate is 9/6 = 1.5.
        let mut counter = CollisionCounter::default();
        let v = VertexId(42);
        counter.observe(v);
        assert_eq!(counter.collisions, 0);
        counter.observe(v);
        assert_eq!(counter.collisions, 1);
        counter.observe(v);
        assert_eq!(counter.collisions, 3);
        assert_eq!(counter.draws, 3);
        assert_eq!(counter.estimate(3), 1.5);
    }

    #[test]
    fn collision_count_small_sample_bias() {
        // tau = 1 on a 2-vertex graph: n_hat in {2, 4.5, 8, ...}; the median
        // over 99 seeds stays in [1, 8].
        let g = Graph::build_from_edges(None, &[(1, 2)]).unwrap();
        let mut cfg = EstimatorConfig::new(0.9, 0.9).unwrap();
        // pick constants so tau = ceil(c/eps^2 * ln(4/delta)) = 1
        cfg.constants.collision = 0.5;
        assert_eq!(cfg.collision_tau(), 1);
        let mut values = Vec::new();
        for seed in 0..99 {
            let mut sess = OracleSession::new(&g, AccessPolicy::base(), seed).unwrap();
            let est = est_num_coll(&mut sess, &cfg).unwrap();
            values.push(est.n_hat);
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = values[49];
        assert!((1.0..=8.0).contains(&median), "median {median}");
    }

    #[test]
    fn collision_count_concentrates() {
        let g = generate(&GraphFamilySpec::new(GraphFamily::Cycle { n: 10_000 }, 8)).unwrap();
        let cfg = EstimatorConfig::new(0.2, 0.05).unwrap();
        let mut inside = 0;
        for seed in 0..100 {
            let mut sess = OracleSession::new(&g, AccessPolicy::base(), seed).unwrap();
            let est = est_num_coll(&mut sess, &cfg).unwrap();
            if (est.n_hat - 10_000.0).abs() <= 0.2 * 10_000.0 {
                inside += 1;
            }
        }
        assert!(inside >= 90, "only {inside}/100 in band");
    }

    #[test]
    fn rejection_sampler_accepts_immediately_on_regular_graph() {
        let g = generate(&GraphFamilySpec::new(GraphFamily::Cycle { n: 32 }, 4)).unwrap();
        let policy = AccessPolicy::base().with_rand_edge();
        let mut sess = OracleSession::new(&g, policy, 7).unwrap();
        let cfg = EstimatorConfig::default();
        for _ in 0..100 {
            let before = sess.meter().total();
            let (_, d) = rand_vert_samp(&mut sess, &VertexPredicate::All, 2, 1.0, &cfg).unwrap();
            assert_eq!(d, 2);
            // acceptance probability k/deg = 1: exactly one loop, two queries
            assert_eq!(sess.meter().total() - before, 2);
        }
    }

    #[test]
    fn rejection_sampler_uniform_on_adjacent_pair() {
        // K4, A = two adjacent vertices, quasi-3-regular with k = 3.
        let g = Graph::build_from_edges(None, &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)])
            .unwrap();
        let (a, b) = (g.id(0), g.id(1));
        // restrict by color trick: no degree distinction exists, so use an
        // explicit two-element predicate via Colored is not possible; emulate
        // a query-able 2-subset by rejecting on id in the test itself.
        let policy = AccessPolicy::base().with_rand_edge();
        let mut sess = OracleSession::new(&g, policy, 13).unwrap();
        let cfg = EstimatorConfig::default();
        let mut counts = std::collections::HashMap::new();
        let mut accepted = 0u64;
        while accepted < 100_000 {
            let (x, _) = sess.rand_edge().unwrap();
            let dx = sess.degree(x).unwrap();
            if x != a && x != b {
                continue;
            }
            if sess.aux_coin(3.0 / dx as f64) {
                *counts.entry(x).or_insert(0u64) += 1;
                accepted += 1;
            }
        }
        let sigma = (100_000f64 * 0.25).sqrt();
        for &c in counts.values() {
            assert!((c as f64 - 50_000.0).abs() < 5.0 * sigma);
        }
        let _ = cfg;
    }

    #[test]
    fn rejection_sampler_cap_fires_on_empty_class() {
        let g = generate(&GraphFamilySpec::new(GraphFamily::Cycle { n: 16 }, 4)).unwrap();
        let policy = AccessPolicy::base().with_rand_edge();
        let mut sess = OracleSession::new(&g, policy, 7).unwrap();
        let cfg = EstimatorConfig::default();
        // no vertex has degree >= 5
        let err =
            rand_vert_samp(&mut sess, &VertexPredicate::DegreeAtLeast(5), 5, 1.0, &cfg)
                .unwrap_err();
        assert!(matches!(err, EstimatorError::Exhausted(_)));
    }

    #[test]
    fn unknown_constant_rejected() {
        assert!(EstimatorConfig::default()
            .with_constant("no_such_knob", 1.0)
            .is_err());
    }
}
