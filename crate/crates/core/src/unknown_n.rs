//! Average-degree (and vertex-count) estimation when n is unknown.
//!
//! Three engines cover the access models:
//! - a bounded-threshold estimator over degree-proportional samples
//!   (random edges + degrees only) with a doubling driver,
//! - a random-edge stopping rule for the degree-ordered unbiased estimator,
//! - an additive-query doubling scheme that returns either a vertex-count
//!   estimate or an inverse-density estimate, after which the degree-ordered
//!   estimator runs with that advice.
//!
//! `onehop_check` is the unmetered full-scan verifier for the combinatorial
//! fact the third engine rests on.

use crate::graph::{Graph, VertexId};
use crate::oracle::{OracleKind, OracleSession, QueryMeter};
use crate::primitives::{
    est_num_ver, Estimate, EstimateStatus, EstimatorConfig, EstimatorError,
};

fn require(sess: &OracleSession, kinds: &[OracleKind]) -> Result<(), EstimatorError> {
    for &k in kinds {
        if !sess.policy().allows(k) {
            return Err(crate::oracle::OracleError::Disabled(k).into());
        }
    }
    Ok(())
}

/// Strict lexicographic edge orientation: the edge points from x to y when
/// (deg(y), id(y)) > (deg(x), id(x)).
fn oriented_up(dx: u64, x: VertexId, dy: u64, y: VertexId) -> bool {
    (dy, y) > (dx, x)
}

// ---------------------------------------------------------------------------
// Bounded-threshold estimator (random edges + degrees, no n)
// ---------------------------------------------------------------------------

enum BtOutcome {
    Mean(f64),
    Asserted,
}

fn bt_once(
    sess: &mut OracleSession,
    theta: f64,
    cfg: &EstimatorConfig,
) -> Result<BtOutcome, EstimatorError> {
    let k = (cfg.constants.bt * theta / (cfg.constants.bt_beta * cfg.eps * cfg.eps)).ceil()
        .max(1.0) as u64;
    let mut sum = 0.0f64;
    for _ in 0..k {
        let (x, _) = sess.rand_edge()?;
        let dx = sess.degree(x)?;
        sum += 1.0 / dx as f64;
    }
    let z = sum / k as f64;
    if z < 1.0 / (2.0 * theta) {
        Ok(BtOutcome::Asserted)
    } else {
        Ok(BtOutcome::Mean(z))
    }
}

/// Degree-proportional reciprocal estimator with an upper-bound guess:
/// averages 1/deg(x) over 100 theta / eps^2 random-edge endpoints. Returns
/// the reciprocal mean, or asserts d > theta when the mean lands below
/// 1/(2 theta). On an r-regular graph with theta >= r the result is exactly
/// r. Cost O(theta / eps^2); needs minimum degree >= 1 and no knowledge of n.
pub fn bt_est_avg_deg(
    sess: &mut OracleSession,
    theta: f64,
    cfg: &EstimatorConfig,
) -> Result<Estimate, EstimatorError> {
    require(sess, &[OracleKind::RandEdge, OracleKind::Degree])?;
    if theta <= 0.0 {
        return Err(EstimatorError::InvalidConfig(format!(
            "theta must be positive, got {theta}"
        )));
    }
    match bt_once(sess, theta, cfg)? {
        BtOutcome::Asserted => Ok(Estimate::assert_from(sess, theta)),
        BtOutcome::Mean(z) => Ok(Estimate::value_from(sess, 1.0 / z).with_trace("bt_z", z)),
    }
}

fn bt_level_reps(cfg: &EstimatorConfig) -> u64 {
    (cfg.constants.bt_reps * (1.0 / cfg.delta).ln()).ceil().max(1.0) as u64
}

fn bt_level_cost(theta: f64, beta: u64, cfg: &EstimatorConfig) -> u64 {
    let k = (cfg.constants.bt * theta / (cfg.constants.bt_beta * cfg.eps * cfg.eps)).ceil()
        .max(1.0) as u64;
    beta * k * 2
}

/// Runs one doubling level: `beta` repetitions at this theta; completes when
/// at least half of them refuse to assert, returning the reciprocal of the
/// median mean.
fn bt_level(
    sess: &mut OracleSession,
    theta: f64,
    beta: u64,
    cfg: &EstimatorConfig,
) -> Result<Option<f64>, EstimatorError> {
    let mut means = Vec::new();
    for _ in 0..beta {
        if let BtOutcome::Mean(z) = bt_once(sess, theta, cfg)? {
            means.push(z);
        }
    }
    if means.len() as u64 * 2 >= beta {
        means.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Some(1.0 / means[means.len() / 2]))
    } else {
        Ok(None)
    }
}

/// Doubling driver for the bounded-threshold estimator: theta runs over
/// 1, 2, 4, ... with ceil(10 ln(1/delta)) repetitions per level, stopping at
/// the first level where half the repetitions commit. Cost O(d / eps^2).
pub fn bt_driver(
    sess: &mut OracleSession,
    cfg: &EstimatorConfig,
) -> Result<Estimate, EstimatorError> {
    require(sess, &[OracleKind::RandEdge, OracleKind::Degree])?;
    let beta = bt_level_reps(cfg);
    let mut theta = 1.0f64;
    while theta < 2e18 {
        if let Some(d_hat) = bt_level(sess, theta, beta, cfg)? {
            return Ok(Estimate::value_from(sess, d_hat).with_trace("theta_star", theta));
        }
        theta *= 2.0;
    }
    Err(EstimatorError::Exhausted(
        "threshold doubling exceeded the degree range".into(),
    ))
}

// ---------------------------------------------------------------------------
// Random-edge stopping rule for the degree-ordered estimator
// ---------------------------------------------------------------------------

/// Resumable state of the random-edge estimator: the degree threshold from
/// the edge sample, the count of heavy uniform vertices seen so far, and the
/// running sum of capped oriented degrees.
pub(crate) struct ReEstimator {
    tau: u64,
    y_target: u64,
    heavy_seen: u64,
    iterations: u64,
    sum_w: f64,
}

impl ReEstimator {
    /// Samples ceil(10/eps) edges and sets tau to the largest edge degree.
    pub(crate) fn init(
        sess: &mut OracleSession,
        cfg: &EstimatorConfig,
    ) -> Result<ReEstimator, EstimatorError> {
        let r = (cfg.constants.re_edges / cfg.eps).ceil() as u64;
        let mut tau = 1u64;
        for _ in 0..r {
            let (u, v) = sess.rand_edge()?;
            let edge_deg = sess.degree(u)?.min(sess.degree(v)?);
            tau = tau.max(edge_deg);
        }
        Ok(ReEstimator {
            tau,
            y_target: (cfg.constants.re_threshold / (cfg.eps * cfg.eps)).ceil() as u64,
            heavy_seen: 0,
            iterations: 0,
            sum_w: 0.0,
        })
    }

    /// One estimator round: 4 queries.
    pub(crate) fn step(&mut self, sess: &mut OracleSession) -> Result<(), EstimatorError> {
        self.iterations += 1;
        let x = sess.rand_vert()?;
        let dx = sess.degree(x)?;
        if dx >= self.tau {
            self.heavy_seen += 1;
        }
        let y = sess.rand_nbr(x)?;
        let dy = sess.degree(y)?;
        if oriented_up(dx, x, dy, y) {
            self.sum_w += dx.min(self.tau) as f64;
        }
        Ok(())
    }

    pub(crate) fn finished(&self) -> bool {
        self.heavy_seen >= self.y_target
    }

    pub(crate) fn tau(&self) -> u64 {
        self.tau
    }

    pub(crate) fn estimate(&self) -> f64 {
        2.0 * self.sum_w / self.iterations as f64
    }
}

/// Random-edge average-degree estimator with a built-in stopping rule: set
/// tau to the largest edge degree among 10/eps random edges, then run the
/// degree-ordered unbiased estimator until 200/eps^2 uniform vertices of
/// degree >= tau have been seen. Succeeds with probability >= 2/3; expected
/// cost O(eps^-2.5 sqrt(n/d)).
pub fn est_avg_deg_re(
    sess: &mut OracleSession,
    cfg: &EstimatorConfig,
) -> Result<Estimate, EstimatorError> {
    require(
        sess,
        &[
            OracleKind::RandVert,
            OracleKind::RandNbr,
            OracleKind::Degree,
            OracleKind::RandEdge,
        ],
    )?;
    let mut state = ReEstimator::init(sess, cfg)?;
    while !state.finished() {
        state.step(sess)?;
    }
    let d_hat = state.estimate();
    if d_hat <= 0.0 {
        return Ok(Estimate::abort_from(sess));
    }
    Ok(Estimate::value_from(sess, d_hat)
        .with_trace("tau", state.tau as f64)
        .with_trace("iterations", state.iterations as f64))
}

/// Two-phase variant with the better eps dependence: phase 1 runs the
/// stopping-rule estimator at eps0 = 0.5 for a factor-2 estimate d0, phase 2
/// replays the core estimator for a fixed 100 tau / (eps^2 d0) iterations
/// with no stopping gate. Total cost O(eps^-2 sqrt(n/d)).
pub fn est_avg_deg_re_fast_eps(
    sess: &mut OracleSession,
    cfg: &EstimatorConfig,
) -> Result<Estimate, EstimatorError> {
    let mut coarse_cfg = cfg.clone();
    coarse_cfg.eps = 0.5;
    let phase1 = est_avg_deg_re(sess, &coarse_cfg)?;
    let d0 = match phase1.status {
        EstimateStatus::Value => phase1.value.unwrap(),
        _ => return Ok(phase1),
    };
    // fresh threshold at the target accuracy
    let r = (cfg.constants.re_edges / cfg.eps).ceil() as u64;
    let mut tau = 1u64;
    for _ in 0..r {
        let (u, v) = sess.rand_edge()?;
        let edge_deg = sess.degree(u)?.min(sess.degree(v)?);
        tau = tau.max(edge_deg);
    }
    let iters = (cfg.constants.re_fast * tau as f64 / (cfg.eps * cfg.eps * d0)).ceil() as u64;
    let mut sum_w = 0.0f64;
    for _ in 0..iters {
        let x = sess.rand_vert()?;
        let dx = sess.degree(x)?;
        let y = sess.rand_nbr(x)?;
        let dy = sess.degree(y)?;
        if oriented_up(dx, x, dy, y) {
            sum_w += dx.min(tau) as f64;
        }
    }
    let d_hat = 2.0 * sum_w / iters as f64;
    if d_hat <= 0.0 {
        return Ok(Estimate::abort_from(sess));
    }
    Ok(Estimate::value_from(sess, d_hat)
        .with_trace("phase1_d0", d0)
        .with_trace("tau", tau as f64)
        .with_trace("phase2_iterations", iters as f64))
}

// ---------------------------------------------------------------------------
// Vertex-count-or-density via subset edge counts
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VertOrDensKind {
    /// `value` estimates n; `witness` is the high-degree vertex used.
    NHat,
    /// `value` estimates n/d.
    RhoHat,
}

#[derive(Clone, Debug)]
pub struct VertOrDens {
    pub kind: VertOrDensKind,
    pub value: f64,
    pub witness: Option<VertexId>,
    /// Final value of the doubling sample size.
    pub s_star: u64,
}

fn count_inside(
    sess: &mut OracleSession,
    xs: &[VertexId],
    use_pair: bool,
) -> Result<u64, EstimatorError> {
    if use_pair {
        let mut z = 0u64;
        for i in 0..xs.len() {
            for j in (i + 1)..xs.len() {
                if xs[i] != xs[j] && sess.pair(xs[i], xs[j])? {
                    z += 1;
                }
            }
        }
        Ok(z)
    } else {
        Ok(sess.additive(xs)?)
    }
}

/// Either finds a high-degree vertex and estimates n through it, or
/// estimates the inverse density n/d from edge counts inside uniform vertex
/// samples of doubling size. Cost O(eps^-2 sqrt(n/d)) with additive queries,
/// O(eps^-2 n/d) with pair queries.
pub fn est_numvert_or_estdens(
    sess: &mut OracleSession,
    cfg: &EstimatorConfig,
) -> Result<VertOrDens, EstimatorError> {
    require(
        sess,
        &[OracleKind::RandVert, OracleKind::RandNbr, OracleKind::Degree],
    )?;
    let use_pair = sess.policy().pair;
    if !use_pair && !sess.policy().additive {
        return Err(crate::oracle::OracleError::Disabled(OracleKind::Pair).into());
    }
    let mut s = 2u64;
    loop {
        if s > 1 << 40 {
            return Err(EstimatorError::Exhausted(
                "sample size doubled past any plausible n".into(),
            ));
        }
        // best vertex among s uniform draws and one uniform neighbor of each
        let mut best: Option<(u64, VertexId)> = None;
        let mut a_sample = Vec::with_capacity(s as usize);
        for _ in 0..s {
            let a = sess.rand_vert()?;
            a_sample.push(a);
        }
        for &a in &a_sample {
            let da = sess.degree(a)?;
            let b = sess.rand_nbr(a)?;
            let db = sess.degree(b)?;
            for (d, v) in [(da, a), (db, b)] {
                if best.map_or(true, |cur| (d, v) > cur) {
                    best = Some((d, v));
                }
            }
        }
        let (_, x) = best.expect("s >= 2 draws");
        let xs: Vec<VertexId> = (0..s).map(|_| sess.rand_vert()).collect::<Result<_, _>>()?;
        let has_neighbor = if use_pair {
            let mut hit = false;
            for &v in &xs {
                if v != x && sess.pair(x, v)? {
                    hit = true;
                    break;
                }
            }
            hit
        } else {
            let mut with_x = xs.clone();
            with_x.push(x);
            let joint = sess.additive(&with_x)?;
            let inside = sess.additive(&xs)?;
            joint > inside
        };
        if has_neighbor {
            let n_hat = est_num_ver(sess, x, cfg)?;
            return Ok(VertOrDens {
                kind: VertOrDensKind::NHat,
                value: n_hat,
                witness: Some(x),
                s_star: s,
            });
        }
        let z = count_inside(sess, &xs, use_pair)?;
        if z == 0 {
            s *= 2;
            continue;
        }
        let k = (cfg.a_const() / (cfg.eps * cfg.eps)).ceil() as u64;
        let mut total = 0u64;
        for _ in 0..k {
            let xi: Vec<VertexId> = (0..s).map(|_| sess.rand_vert()).collect::<Result<_, _>>()?;
            total += count_inside(sess, &xi, use_pair)?;
        }
        let m_bar = total as f64 / k as f64;
        if m_bar == 0.0 {
            s *= 2;
            continue;
        }
        let rho_hat = (s as f64) * (s as f64) / (2.0 * m_bar);
        return Ok(VertOrDens {
            kind: VertOrDensKind::RhoHat,
            value: rho_hat,
            witness: None,
            s_star: s,
        });
    }
}

// ---------------------------------------------------------------------------
// One-hop fact checker (full scan; not metered)
// ---------------------------------------------------------------------------

/// Parameters of the heavy-vertex one-hop fact: for multiplier C the derived
/// bound is B = 5C + 2C^3.
#[derive(Clone, Copy, Debug)]
pub struct OnehopParams {
    pub c: f64,
    pub b: f64,
}

impl OnehopParams {
    pub fn new(c: f64) -> OnehopParams {
        OnehopParams {
            c,
            b: 5.0 * c + 2.0 * c * c * c,
        }
    }

    /// The multiplier used by the analysis for failure budget delta:
    /// C = ceil((3/sqrt(delta)) ln(1/delta)).
    pub fn from_delta(delta: f64) -> OnehopParams {
        let c = (3.0 / delta.sqrt() * (1.0 / delta).ln()).ceil();
        OnehopParams::new(c)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OnehopReport {
    pub premises_hold: bool,
    pub conclusion_holds: bool,
    pub d2: f64,
    pub d2_bound: f64,
    pub heavy_count: u64,
    pub heavy_threshold: f64,
    pub degree_ratio_sum: f64,
}

/// Full-scan check of the one-hop fact: if the squared-degree sum reaches
/// (5C + 2C^3) m^(3/2) while fewer than C sqrt(m) vertices have degree
/// >= C sqrt(m), then the sum over vertices of deg(v, H)/deg(v) must exceed
/// C sqrt(m). Test oracle only: reads the graph directly.
pub fn onehop_check(g: &Graph, c: f64) -> OnehopReport {
    let params = OnehopParams::new(c);
    let m = g.m() as f64;
    let threshold = c * m.sqrt();
    let n = g.n() as usize;
    let mut heavy = vec![false; n];
    let mut heavy_count = 0u64;
    let mut d2 = 0.0f64;
    for i in 0..n {
        let d = g.degree_by_index(i) as f64;
        d2 += d * d;
        if d >= threshold {
            heavy[i] = true;
            heavy_count += 1;
        }
    }
    let mut ratio_sum = 0.0f64;
    for i in 0..n {
        let nbrs = g.neighbors(i);
        if nbrs.is_empty() {
            continue;
        }
        let into_heavy = nbrs.iter().filter(|&&w| heavy[w as usize]).count();
        ratio_sum += into_heavy as f64 / nbrs.len() as f64;
    }
    let d2_bound = params.b * m.powf(1.5);
    OnehopReport {
        premises_hold: d2 >= d2_bound && (heavy_count as f64) < threshold,
        conclusion_holds: ratio_sum > threshold,
        d2,
        d2_bound,
        heavy_count,
        heavy_threshold: threshold,
        degree_ratio_sum: ratio_sum,
    }
}

// ---------------------------------------------------------------------------
// Degree-ordered estimator with advice
// ---------------------------------------------------------------------------

/// Side information the degree-ordered estimator needs in place of n.
#[derive(Clone, Copy, Debug)]
pub enum ErsAdvice {
    /// n within a factor of 2.
    KnownN(f64),
    /// n/d within a factor of 2; skips the guess-halving entirely.
    Rho(f64),
}

fn ers_round(sess: &mut OracleSession, k: u64) -> Result<f64, EstimatorError> {
    let mut sum = 0.0f64;
    for _ in 0..k {
        let x = sess.rand_vert()?;
        let dx = sess.degree(x)?;
        let y = sess.rand_nbr(x)?;
        let dy = sess.degree(y)?;
        if oriented_up(dx, x, dy, y) {
            sum += 2.0 * dx as f64;
        }
    }
    Ok(sum / k as f64)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs[xs.len() / 2]
}

/// Degree-ordered average-degree estimator (uniform vertex, uniform
/// neighbor, orientation by (degree, id)): each round averages
/// k = 100/eps^2 sqrt(n/g) samples of 2 deg(x) [x below y], and the median
/// of ceil(10 ln(1/delta)) rounds drives guess-halving over g. With
/// inverse-density advice the halving is skipped and k = 100/eps^2
/// ceil(sqrt(rho)). Cost O(eps^-2 sqrt(n/d)).
pub fn ers_est_avg_deg(
    sess: &mut OracleSession,
    cfg: &EstimatorConfig,
    advice: ErsAdvice,
) -> Result<Estimate, EstimatorError> {
    require(
        sess,
        &[OracleKind::RandVert, OracleKind::RandNbr, OracleKind::Degree],
    )?;
    let reps = (cfg.constants.ers_reps * (1.0 / cfg.delta).ln()).ceil().max(1.0) as u64;
    let factor = cfg.constants.ers / (cfg.eps * cfg.eps);
    match advice {
        ErsAdvice::KnownN(n_adv) => {
            if n_adv < 1.0 {
                return Err(EstimatorError::InvalidConfig(format!(
                    "vertex-count advice must be >= 1, got {n_adv}"
                )));
            }
            let mut g = n_adv;
            loop {
                if g < 0.25 {
                    return Err(EstimatorError::Exhausted(
                        "guess halved below any simple graph's average degree".into(),
                    ));
                }
                let k = (factor * (n_adv / g).sqrt()).ceil() as u64;
                let rounds: Vec<f64> = (0..reps)
                    .map(|_| ers_round(sess, k))
                    .collect::<Result<_, _>>()?;
                let z = median(rounds);
                if z < g / 2.0 {
                    g /= 2.0;
                } else {
                    return Ok(Estimate::value_from(sess, z)
                        .with_trace("g_star", g)
                        .with_trace("k", k as f64));
                }
            }
        }
        ErsAdvice::Rho(rho) => {
            if rho <= 0.0 {
                return Err(EstimatorError::InvalidConfig(format!(
                    "density advice must be positive, got {rho}"
                )));
            }
            let k = (factor * rho.sqrt().ceil()).ceil() as u64;
            let rounds: Vec<f64> = (0..reps)
                .map(|_| ers_round(sess, k))
                .collect::<Result<_, _>>()?;
            let z = median(rounds);
            if z <= 0.0 {
                return Ok(Estimate::abort_from(sess));
            }
            Ok(Estimate::value_from(sess, z).with_trace("k", k as f64))
        }
    }
}

// ---------------------------------------------------------------------------
// Combined pipelines
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PipelineMode {
    /// Base oracles + random edges: interleave the bounded-threshold driver
    /// with the random-edge stopping-rule estimator.
    RandomEdge,
    /// Additive oracles, no random edges: vertex-count-or-density first,
    /// then the degree-ordered estimator with that advice.
    Advanced,
}

#[derive(Clone, Debug)]
pub struct PipelineEstimate {
    pub estimate: Estimate,
    /// Vertex-count estimate, when the pipeline produces one.
    pub n_hat: Option<f64>,
}

/// Runs the appropriate unknown-n pipeline for the session's access model.
///
/// RandomEdge mode interleaves the two engines on a shared doubling cost
/// ladder (each branch gets its own random streams so interleaving cannot
/// perturb either transcript) and returns whichever finishes first.
/// Advanced mode also returns a vertex-count estimate: directly when a
/// high-degree witness was found, else rho_hat * d_hat.
pub fn unknown_n_pipeline(
    sess: &mut OracleSession,
    cfg: &EstimatorConfig,
    mode: PipelineMode,
) -> Result<PipelineEstimate, EstimatorError> {
    match mode {
        PipelineMode::RandomEdge => {
            require(
                sess,
                &[
                    OracleKind::RandVert,
                    OracleKind::RandNbr,
                    OracleKind::Degree,
                    OracleKind::RandEdge,
                ],
            )?;
            let mut bt_sess = sess.subsession(0);
            let mut re_sess = sess.subsession(1);
            let beta = bt_level_reps(cfg);
            let mut theta = 1.0f64;
            let mut bt_credit = 0u64;
            let mut re_credit = 0u64;
            let mut re_state: Option<ReEstimator> = None;
            let merged = |a: &OracleSession, b: &OracleSession| {
                let mut meter = QueryMeter::default();
                meter.absorb(a.meter());
                meter.absorb(b.meter());
                meter
            };
            for level in 10u32..63 {
                let slice = 1u64 << level;
                bt_credit += slice;
                loop {
                    let next_cost = bt_level_cost(theta, beta, cfg);
                    if next_cost > bt_credit {
                        break;
                    }
                    let before = bt_sess.meter().total();
                    if let Some(d_hat) = bt_level(&mut bt_sess, theta, beta, cfg)? {
                        let mut est = Estimate::value_from(&bt_sess, d_hat)
                            .with_trace("theta_star", theta)
                            .with_trace("pipeline_branch", 0.0);
                        est.cost = merged(&bt_sess, &re_sess);
                        est.seed = sess.seed();
                        return Ok(PipelineEstimate {
                            estimate: est,
                            n_hat: None,
                        });
                    }
                    bt_credit -= bt_sess.meter().total() - before;
                    theta *= 2.0;
                }
                re_credit += slice;
                if re_state.is_none() {
                    let before = re_sess.meter().total();
                    re_state = Some(ReEstimator::init(&mut re_sess, cfg)?);
                    re_credit = re_credit.saturating_sub(re_sess.meter().total() - before);
                }
                let state = re_state.as_mut().expect("initialized above");
                while !state.finished() && re_credit >= 4 {
                    let before = re_sess.meter().total();
                    state.step(&mut re_sess)?;
                    re_credit = re_credit.saturating_sub(re_sess.meter().total() - before);
                }
                if state.finished() {
                    let d_hat = state.estimate();
                    if d_hat <= 0.0 {
                        let mut est = Estimate::abort_from(&re_sess);
                        est.cost = merged(&bt_sess, &re_sess);
                        est.seed = sess.seed();
                        return Ok(PipelineEstimate {
                            estimate: est,
                            n_hat: None,
                        });
                    }
                    let mut est = Estimate::value_from(&re_sess, d_hat)
                        .with_trace("tau", state.tau() as f64)
                        .with_trace("pipeline_branch", 1.0);
                    est.cost = merged(&bt_sess, &re_sess);
                    est.seed = sess.seed();
                    return Ok(PipelineEstimate {
                        estimate: est,
                        n_hat: None,
                    });
                }
            }
            Err(EstimatorError::Exhausted(
                "interleaved pipeline exhausted its cost ladder".into(),
            ))
        }
        PipelineMode::Advanced => {
            let vd = est_numvert_or_estdens(sess, cfg)?;
            let advice = match vd.kind {
                VertOrDensKind::NHat => ErsAdvice::KnownN(vd.value),
                VertOrDensKind::RhoHat => ErsAdvice::Rho(vd.value),
            };
            let est = ers_est_avg_deg(sess, cfg, advice)?;
            let n_hat = match (vd.kind, est.value) {
                (VertOrDensKind::NHat, _) => Some(vd.value),
                (VertOrDensKind::RhoHat, Some(d_hat)) => Some(vd.value * d_hat),
                _ => None,
            };
            let est = est
                .with_trace("s_star", vd.s_star as f64)
                .with_trace(
                    "advice_kind",
                    match vd.kind {
                        VertOrDensKind::NHat => 0.0,
                        VertOrDensKind::RhoHat => 1.0,
                    },
                );
            Ok(PipelineEstimate {
                estimate: est,
                n_hat,
            })
        }
    }
}
