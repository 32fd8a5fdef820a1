//! Average-degree estimation when the vertex count is known.
//!
//! The driver guesses the average degree, halving the guess until it
//! validates. At each guess it splits on whether high-degree vertices own
//! most of the edges: if not, a harmonic estimator over degree-proportional
//! samples settles the answer cheaply; if they do, it locates a dense pair
//! of quasi-regular degree classes, estimates the edge count between them by
//! sampling vertex subsets, and rescales by the pair's share of all edges.

use crate::graph::VertexId;
use crate::oracle::{OracleKind, OracleSession};
use crate::primitives::{
    bernoulli_est_capped, est_frac_edge, rand_vert_samp, Estimate, EstimateStatus,
    EstimatorConfig, EstimatorError, VertexPredicate,
};
use crate::unknown_n::bt_est_avg_deg;

/// How subset edge counts are probed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeCountMode {
    /// One pair query per sampled vertex pair: s^2 cost per probe.
    Pair,
    /// Additive queries on the sampled sets: 4s cost per probe.
    Additive,
}

/// Output of the high-degree density probe.
#[derive(Clone, Copy, Debug)]
pub struct HighDegSummary {
    /// Fraction of sampled edges with edge degree >= delta.
    pub f: f64,
    /// Fraction of sampled edges with edge degree >= delta + 1.
    pub f_prime: f64,
    /// Degree threshold: the ceil(log2 n)-th largest sampled degree.
    pub delta: u64,
    /// Quantile parameter the probe ran with.
    pub p: f64,
}

/// A pair of query-able quasi-regular degree classes declared dense.
#[derive(Clone, Debug)]
pub struct DensePair {
    pub i: u32,
    pub j: u32,
    pub a: VertexPredicate,
    pub b: VertexPredicate,
    /// Class bases: members of `a` have degree in [base_a, 2 base_a).
    pub base_a: u64,
    pub base_b: u64,
    /// Density parameter: the pair is declared to carry >= m/alpha edges.
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct DensityEstimate {
    pub rho_a: f64,
    pub rho_b: f64,
}

fn require_known_n(sess: &OracleSession) -> Result<u64, EstimatorError> {
    sess.known_n().ok_or_else(|| {
        EstimatorError::InvalidConfig("this estimator needs a policy that reveals n".into())
    })
}

fn log2n(n: u64) -> f64 {
    (n as f64).log2()
}

/// Index of the half-open degree class [2^(i-1)(delta+1), 2^i(delta+1))
/// containing `deg`, or `None` when deg <= delta. Classes partition
/// {x : deg(x) >= delta + 1}.
pub fn class_index(deg: u64, delta: u64) -> Option<u32> {
    if deg < delta + 1 {
        return None;
    }
    let q = deg / (delta + 1);
    Some(64 - q.leading_zeros())
}

/// Bounds [lo, hi) of class `i` for threshold `delta`.
pub fn class_bounds(i: u32, delta: u64) -> (u64, u64) {
    let base = (delta + 1).saturating_mul(1u64 << (i - 1));
    (base, base.saturating_mul(2))
}

/// Samples degrees and edges to locate the high-degree regime: delta is the
/// ceil(log2 n)-th largest degree among ceil(log2 n / p) uniform vertices,
/// and f / f' give the fraction of uniform edges whose edge degree (min of
/// the endpoint degrees) reaches delta / delta + 1.
pub fn est_dens_high_deg(
    sess: &mut OracleSession,
    p: f64,
) -> Result<HighDegSummary, EstimatorError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(EstimatorError::InvalidP(p));
    }
    let n = require_known_n(sess)?;
    let ln = log2n(n);
    let top = ln.ceil().max(1.0) as usize;
    let r = (ln / p).ceil().max(top as f64) as usize;
    let mut degs: Vec<(u64, VertexId)> = Vec::with_capacity(r);
    for _ in 0..r {
        let x = sess.rand_vert()?;
        let d = sess.degree(x)?;
        degs.push((d, x));
    }
    // ties broken by id so the threshold is deterministic given the sample
    degs.sort_unstable_by(|a, b| b.cmp(a));
    let delta = degs[top - 1].0;
    let t = top;
    let mut at_least = 0u64;
    let mut above = 0u64;
    for _ in 0..t {
        let (u, v) = sess.rand_edge()?;
        let edge_deg = sess.degree(u)?.min(sess.degree(v)?);
        if edge_deg >= delta {
            at_least += 1;
        }
        if edge_deg >= delta + 1 {
            above += 1;
        }
    }
    Ok(HighDegSummary {
        f: at_least as f64 / t as f64,
        f_prime: above as f64 / t as f64,
        delta,
        p,
    })
}

/// Harmonic estimator for the regime where vertices of degree >= delta own
/// at most a constant fraction of the edges: estimates |H|/n by uniform
/// sampling and |H|/2m by degree-proportional sampling of 1/deg, returning
/// their ratio. Expected cost O(1/(eps^2 p)).
pub fn harmonic_estimator(
    sess: &mut OracleSession,
    delta: u64,
    _p: f64,
    cfg: &EstimatorConfig,
) -> Result<Estimate, EstimatorError> {
    let n = require_known_n(sess)?;
    let h = VertexPredicate::DegreeAtLeast(delta);
    // Zero successes after ~n ln(2/delta) draws means H is empty at the only
    // resolution that matters; abort instead of looping forever.
    let cap = ((n as f64) * (2.0 / cfg.delta).ln()).ceil() as u64;
    let outcome = bernoulli_est_capped(sess, cfg, Some(cap), |sess| {
        let x = sess.rand_vert()?;
        let d = sess.degree(x)?;
        Ok(h.eval(d, x))
    })?;
    let p_hat = match outcome {
        Some(out) => out.p_hat,
        None => return Ok(Estimate::abort_from(sess)),
    };
    let k = (cfg.constants.harmonic / (cfg.eps * cfg.eps * p_hat)).ceil() as u64;
    let mut sum = 0.0f64;
    for _ in 0..k {
        let (x, _) = sess.rand_edge()?;
        let dx = sess.degree(x)?;
        if dx >= delta {
            sum += 1.0 / dx as f64;
        }
    }
    let z = sum / k as f64;
    if z == 0.0 {
        return Ok(Estimate::abort_from(sess));
    }
    Ok(Estimate::value_from(sess, p_hat / z)
        .with_trace("harmonic_z", z)
        .with_trace("harmonic_p_hat", p_hat))
}

/// Bins ceil(log2^3 n) uniform edges into degree classes above `delta` and
/// returns a class pair holding at least log2^2(n)/4 of them, declared
/// log2^2(n)/16-dense. When both endpoints land in one class the pair is a
/// seeded 2-coloring of that class (each internal edge is bichromatic with
/// probability 1/2, so the declared alpha doubles).
pub fn find_dense_pair(
    sess: &mut OracleSession,
    delta: u64,
    _cfg: &EstimatorConfig,
) -> Result<DensePair, EstimatorError> {
    let n = require_known_n(sess)?;
    let ln = log2n(n);
    let t = ln.powi(3).ceil() as u64;
    let mut counts: std::collections::HashMap<(u32, u32), u64> = std::collections::HashMap::new();
    for _ in 0..t {
        let (u, v) = sess.rand_edge()?;
        let du = sess.degree(u)?;
        let dv = sess.degree(v)?;
        if let (Some(ci), Some(cj)) = (class_index(du, delta), class_index(dv, delta)) {
            let key = (ci.min(cj), ci.max(cj));
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    let threshold = ln * ln / 4.0;
    let best = counts
        .iter()
        .max_by_key(|&(&(i, j), &c)| (c, std::cmp::Reverse((i, j))))
        .map(|(&k, &c)| (k, c));
    let ((i, j), count) = match best {
        Some(found) => found,
        None => return Err(EstimatorError::NoDensePair),
    };
    if (count as f64) < threshold {
        return Err(EstimatorError::NoDensePair);
    }
    let mut alpha = ln * ln / 16.0;
    let (lo_i, hi_i) = class_bounds(i, delta);
    let (lo_j, hi_j) = class_bounds(j, delta);
    let (a, b) = if i == j {
        alpha *= 2.0;
        let seed = sess.aux_u64();
        (
            VertexPredicate::Colored {
                lo: lo_i,
                hi: hi_i,
                seed,
                bit: 0,
            },
            VertexPredicate::Colored {
                lo: lo_i,
                hi: hi_i,
                seed,
                bit: 1,
            },
        )
    } else {
        (
            VertexPredicate::DegreeIn { lo: lo_i, hi: hi_i },
            VertexPredicate::DegreeIn { lo: lo_j, hi: hi_j },
        )
    };
    Ok(DensePair {
        i,
        j,
        a,
        b,
        base_a: lo_i,
        base_b: lo_j,
        alpha,
    })
}

/// Estimates the one-sided densities m(A,B)/|A| and m(A,B)/|B| of a dense
/// pair by uniform-in-class sampling: draw a in A, a uniform neighbor y of
/// a, and average deg(a) * [y in B]. Expected cost O(alpha^2 / eps^2).
pub fn estimate_density(
    sess: &mut OracleSession,
    dp: &DensePair,
    cfg: &EstimatorConfig,
) -> Result<DensityEstimate, EstimatorError> {
    let t = (cfg.constants.density * dp.alpha / (cfg.eps * cfg.eps)).ceil() as u64;
    let mut side = |pred: &VertexPredicate,
                    base: u64,
                    other: &VertexPredicate,
                    sess: &mut OracleSession|
     -> Result<f64, EstimatorError> {
        let mut sum = 0.0f64;
        for _ in 0..t {
            let (a, da) = rand_vert_samp(sess, pred, base, dp.alpha, cfg)?;
            let y = sess.rand_nbr(a)?;
            let dy = sess.degree(y)?;
            if other.eval(dy, y) {
                sum += da as f64;
            }
        }
        Ok(sum / t as f64)
    };
    let rho_a = side(&dp.a, dp.base_a, &dp.b, sess)?;
    let rho_b = side(&dp.b, dp.base_b, &dp.a, sess)?;
    Ok(DensityEstimate { rho_a, rho_b })
}

fn count_between(
    sess: &mut OracleSession,
    xs: &[VertexId],
    ys: &[VertexId],
    mode: EdgeCountMode,
) -> Result<u64, EstimatorError> {
    match mode {
        EdgeCountMode::Pair => {
            let mut z = 0u64;
            for &x in xs {
                for &y in ys {
                    if sess.pair(x, y)? {
                        z += 1;
                    }
                }
            }
            Ok(z)
        }
        EdgeCountMode::Additive => {
            let mut both: Vec<VertexId> = Vec::with_capacity(xs.len() + ys.len());
            both.extend_from_slice(xs);
            both.extend_from_slice(ys);
            let joint = sess.additive(&both)?;
            let inside_x = sess.additive(xs)?;
            let inside_y = sess.additive(ys)?;
            Ok(joint - inside_x - inside_y)
        }
    }
}

fn sample_class(
    sess: &mut OracleSession,
    pred: &VertexPredicate,
    base: u64,
    alpha: f64,
    s: u64,
    cfg: &EstimatorConfig,
) -> Result<Vec<VertexId>, EstimatorError> {
    (0..s)
        .map(|_| rand_vert_samp(sess, pred, base, alpha, cfg).map(|(v, _)| v))
        .collect()
}

/// Estimates m(A,B) for a dense pair by drawing s-vertex samples X from A
/// and Y from B and probing m(X,Y). Aborts when the first probe finds no
/// edge (the sample size is too small for the pair's density); otherwise
/// averages ceil(numedges * alpha / eps^2) probes and rescales by the
/// estimated densities: m_hat = s^2 rho_a rho_b / mean.
pub fn est_num_edges(
    sess: &mut OracleSession,
    dp: &DensePair,
    s: u64,
    cfg: &EstimatorConfig,
    mode: EdgeCountMode,
) -> Result<Estimate, EstimatorError> {
    let xs = sample_class(sess, &dp.a, dp.base_a, dp.alpha, s, cfg)?;
    let ys = sample_class(sess, &dp.b, dp.base_b, dp.alpha, s, cfg)?;
    let first = count_between(sess, &xs, &ys, mode)?;
    if first == 0 {
        return Ok(Estimate::abort_from(sess).with_trace("s", s as f64));
    }
    let t = (cfg.constants.numedges * dp.alpha / (cfg.eps * cfg.eps)).ceil() as u64;
    let mut total = 0u64;
    for _ in 0..t {
        let xs = sample_class(sess, &dp.a, dp.base_a, dp.alpha, s, cfg)?;
        let ys = sample_class(sess, &dp.b, dp.base_b, dp.alpha, s, cfg)?;
        total += count_between(sess, &xs, &ys, mode)?;
    }
    let z_mean = total as f64 / t as f64;
    let dens = estimate_density(sess, dp, cfg)?;
    if z_mean == 0.0 || dens.rho_a == 0.0 || dens.rho_b == 0.0 {
        return Ok(Estimate::abort_from(sess).with_trace("s", s as f64));
    }
    let m_hat = (s as f64) * (s as f64) * dens.rho_a * dens.rho_b / z_mean;
    Ok(Estimate::value_from(sess, m_hat)
        .with_trace("s", s as f64)
        .with_trace("z_mean", z_mean)
        .with_trace("rho_a", dens.rho_a)
        .with_trace("rho_b", dens.rho_b))
}

fn require(sess: &OracleSession, kinds: &[OracleKind]) -> Result<(), EstimatorError> {
    for &k in kinds {
        if !sess.policy().allows(k) {
            return Err(crate::oracle::OracleError::Disabled(k).into());
        }
    }
    Ok(())
}

/// Full known-n driver: guess-halving over g with the quantile
/// p = (g/n)^(1/4) (additive) or (g/n)^(1/3) (pair). Easy regime goes to the
/// harmonic estimator; heavy regime estimates a dense pair's edge count and
/// rescales by its edge share. Expected cost ~ (n/d)^(1/4) resp. (n/d)^(1/3)
/// up to log factors.
pub fn estimate_average_degree(
    sess: &mut OracleSession,
    cfg: &EstimatorConfig,
    mode: EdgeCountMode,
) -> Result<Estimate, EstimatorError> {
    require(
        sess,
        &[
            OracleKind::RandVert,
            OracleKind::RandNbr,
            OracleKind::RandEdge,
            OracleKind::Degree,
            match mode {
                EdgeCountMode::Pair => OracleKind::Pair,
                EdgeCountMode::Additive => OracleKind::Additive,
            },
        ],
    )?;
    let n = require_known_n(sess)?;
    let exponent = match mode {
        EdgeCountMode::Additive => 0.25,
        EdgeCountMode::Pair => 1.0 / 3.0,
    };
    let mut g = n as f64;
    loop {
        if g < 1.0 {
            return Err(EstimatorError::Exhausted(
                "average-degree guess halved below 1".into(),
            ));
        }
        let p = (g / n as f64).powf(exponent);
        let hd = est_dens_high_deg(sess, p)?;
        if hd.f_prime < 2.0 / 3.0 {
            let est = harmonic_estimator(sess, hd.delta, p, cfg)?;
            return Ok(est
                .with_trace("g_star", g)
                .with_trace("p_star", p)
                .with_trace("branch_dense", 0.0));
        }
        let dp = match find_dense_pair(sess, hd.delta, cfg) {
            Ok(dp) => dp,
            // the f' >= 2/3 reading was statistical; treat like an abort
            Err(EstimatorError::NoDensePair) => {
                g /= 2.0;
                continue;
            }
            Err(e) => return Err(e),
        };
        let s = match mode {
            EdgeCountMode::Additive => (dp.alpha.sqrt() / p).ceil() as u64,
            EdgeCountMode::Pair => (dp.alpha / p).sqrt().ceil() as u64,
        };
        let est = est_num_edges(sess, &dp, s, cfg, mode)?;
        match est.status {
            EstimateStatus::Abort => {
                g /= 2.0;
                continue;
            }
            _ => {
                let m_hat = est.value.expect("non-abort edge count has a value");
                let theta_hat = est_frac_edge(sess, &dp.a, &dp.b, cfg)?;
                let d_hat = (m_hat / theta_hat) * 2.0 / n as f64;
                return Ok(Estimate::value_from(sess, d_hat)
                    .with_trace("g_star", g)
                    .with_trace("p_star", p)
                    .with_trace("branch_dense", 1.0)
                    .with_trace("m_hat", m_hat)
                    .with_trace("theta_hat", theta_hat));
            }
        }
    }
}

/// Edge-only variant: no vertex sampling at all. A bounded-threshold pass at
/// theta = n^(1/3) either settles the answer from degree-proportional
/// samples or certifies d > theta, in which case the dense-pair machinery
/// runs with p = (g/n)^(1/2) and delta = 0. Requires additive queries and a
/// policy with rand_vert disabled.
pub fn est_avg_deg_edge_only(
    sess: &mut OracleSession,
    cfg: &EstimatorConfig,
) -> Result<Estimate, EstimatorError> {
    if sess.policy().rand_vert {
        return Err(EstimatorError::InvalidConfig(
            "edge-only estimator requires a policy with rand_vert disabled".into(),
        ));
    }
    require(
        sess,
        &[
            OracleKind::RandEdge,
            OracleKind::RandNbr,
            OracleKind::Degree,
            OracleKind::Additive,
        ],
    )?;
    let n = require_known_n(sess)?;
    let theta = (n as f64).powf(1.0 / 3.0);
    let bt = bt_est_avg_deg(sess, theta, cfg)?;
    if bt.status == EstimateStatus::Value {
        return Ok(bt.with_trace("branch_dense", 0.0));
    }
    let mut g = n as f64;
    loop {
        if g < 1.0 {
            return Err(EstimatorError::Exhausted(
                "average-degree guess halved below 1".into(),
            ));
        }
        let p = (g / n as f64).sqrt();
        let dp = match find_dense_pair(sess, 0, cfg) {
            Ok(dp) => dp,
            Err(EstimatorError::NoDensePair) => {
                g /= 2.0;
                continue;
            }
            Err(e) => return Err(e),
        };
        let s = (dp.alpha.sqrt() / p).ceil() as u64;
        let est = est_num_edges(sess, &dp, s, cfg, EdgeCountMode::Additive)?;
        match est.status {
            EstimateStatus::Abort => {
                g /= 2.0;
                continue;
            }
            _ => {
                let m_hat = est.value.expect("non-abort edge count has a value");
                let theta_hat = est_frac_edge(sess, &dp.a, &dp.b, cfg)?;
                let d_hat = (m_hat / theta_hat) * 2.0 / n as f64;
                return Ok(Estimate::value_from(sess, d_hat)
                    .with_trace("g_star", g)
                    .with_trace("branch_dense", 1.0));
            }
        }
    }
}
