//! Metered, seeded query access to a graph.
//!
//! An [`OracleSession`] is the only channel estimators use to touch a graph.
//! Every query is gated by an [`AccessPolicy`] flag, charged to a
//! [`QueryMeter`] at a fixed cost, and answered from a dedicated random
//! stream so that equal (graph, policy, seed) sessions produce identical
//! answer sequences for identical query sequences.
//!
//! Randomness is ChaCha8 (rand_chacha `ChaCha8Rng`), one 64-bit seed per
//! session, split into independent streams: stream 0 answers queries,
//! stream 1 serves estimator-side coins, and `subsession(b)` hands out
//! streams 2b+2 / 2b+3 so interleaved pipeline branches never perturb each
//! other's transcripts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{Graph, VertexId};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum OracleKind {
    RandVert,
    RandNbr,
    Degree,
    RandEdge,
    Pair,
    Additive,
    FullNbrhood,
}

pub const ORACLE_KINDS: [OracleKind; 7] = [
    OracleKind::RandVert,
    OracleKind::RandNbr,
    OracleKind::Degree,
    OracleKind::RandEdge,
    OracleKind::Pair,
    OracleKind::Additive,
    OracleKind::FullNbrhood,
];

impl OracleKind {
    pub fn label(self) -> &'static str {
        match self {
            OracleKind::RandVert => "rand_vert",
            OracleKind::RandNbr => "rand_nbr",
            OracleKind::Degree => "degree",
            OracleKind::RandEdge => "rand_edge",
            OracleKind::Pair => "pair",
            OracleKind::Additive => "additive",
            OracleKind::FullNbrhood => "full_nbrhood",
        }
    }
}

/// Which oracles a session exposes, and whether n is revealed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AccessPolicy {
    pub rand_vert: bool,
    pub rand_nbr: bool,
    pub degree: bool,
    pub rand_edge: bool,
    pub pair: bool,
    pub additive: bool,
    pub full_nbrhood: bool,
    pub n_known: bool,
}

impl AccessPolicy {
    /// RandVert + RandNbr + Degree.
    pub fn base() -> Self {
        AccessPolicy {
            rand_vert: true,
            rand_nbr: true,
            degree: true,
            rand_edge: false,
            pair: false,
            additive: false,
            full_nbrhood: false,
            n_known: false,
        }
    }

    /// Base + Pair.
    pub fn standard() -> Self {
        AccessPolicy {
            pair: true,
            ..Self::base()
        }
    }

    /// Base + Additive.
    pub fn advanced() -> Self {
        AccessPolicy {
            additive: true,
            ..Self::base()
        }
    }

    pub fn with_rand_edge(mut self) -> Self {
        self.rand_edge = true;
        self
    }

    pub fn with_pair(mut self) -> Self {
        self.pair = true;
        self
    }

    pub fn with_additive(mut self) -> Self {
        self.additive = true;
        self
    }

    pub fn with_full_nbrhood(mut self) -> Self {
        self.full_nbrhood = true;
        self
    }

    pub fn with_n_known(mut self, known: bool) -> Self {
        self.n_known = known;
        self
    }

    pub fn without_rand_vert(mut self) -> Self {
        self.rand_vert = false;
        self
    }

    pub fn allows(&self, kind: OracleKind) -> bool {
        match kind {
            OracleKind::RandVert => self.rand_vert,
            OracleKind::RandNbr => self.rand_nbr,
            OracleKind::Degree => self.degree,
            OracleKind::RandEdge => self.rand_edge,
            OracleKind::Pair => self.pair,
            OracleKind::Additive => self.additive,
            OracleKind::FullNbrhood => self.full_nbrhood,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{} oracle disabled by access policy", .0.label())]
    Disabled(OracleKind),
    #[error("unknown vertex id {0}")]
    UnknownVertex(VertexId),
    #[error("budget exhausted: query costs {needed}, only {remaining} left")]
    BudgetExhausted { needed: u64, remaining: u64 },
    #[error("graph has an isolated vertex; sessions require minimum degree >= 1")]
    IsolatedVertex,
}

/// Per-oracle call counts and accumulated unit costs.
///
/// Unit cost for every query except `additive(S)`, which charges |S|
/// (multiset size). The budget check is atomic: a query that would push the
/// total over the budget fails with the meter unchanged.
#[derive(Clone, Debug, Default)]
pub struct QueryMeter {
    calls: [u64; 7],
    cost: [u64; 7],
    total: u64,
    budget: Option<u64>,
}

impl QueryMeter {
    pub fn with_budget(budget: Option<u64>) -> Self {
        QueryMeter {
            budget,
            ..Default::default()
        }
    }

    fn charge(&mut self, kind: OracleKind, cost: u64) -> Result<(), OracleError> {
        if let Some(b) = self.budget {
            if self.total + cost > b {
                return Err(OracleError::BudgetExhausted {
                    needed: cost,
                    remaining: b - self.total,
                });
            }
        }
        self.calls[kind as usize] += 1;
        self.cost[kind as usize] += cost;
        self.total += cost;
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn cost_of(&self, kind: OracleKind) -> u64 {
        self.cost[kind as usize]
    }

    pub fn calls_of(&self, kind: OracleKind) -> u64 {
        self.calls[kind as usize]
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    /// Folds another meter's counts into this one (budgets are not merged).
    pub fn absorb(&mut self, other: &QueryMeter) {
        for i in 0..7 {
            self.calls[i] += other.calls[i];
            self.cost[i] += other.cost[i];
        }
        self.total += other.total;
    }
}

/// Seeded, metered session over an immutable graph.
pub struct OracleSession<'g> {
    graph: &'g Graph,
    policy: AccessPolicy,
    meter: QueryMeter,
    seed: u64,
    answers: ChaCha8Rng,
    aux: ChaCha8Rng,
    transcript: Option<Vec<String>>,
}

impl<'g> OracleSession<'g> {
    pub fn new(
        graph: &'g Graph,
        policy: AccessPolicy,
        seed: u64,
    ) -> Result<OracleSession<'g>, OracleError> {
        Self::with_budget(graph, policy, seed, None)
    }

    pub fn with_budget(
        graph: &'g Graph,
        policy: AccessPolicy,
        seed: u64,
        budget: Option<u64>,
    ) -> Result<OracleSession<'g>, OracleError> {
        if graph.min_degree() == 0 {
            return Err(OracleError::IsolatedVertex);
        }
        Ok(Self::with_streams(graph, policy, seed, budget, 0, 1))
    }

    fn with_streams(
        graph: &'g Graph,
        policy: AccessPolicy,
        seed: u64,
        budget: Option<u64>,
        answer_stream: u64,
        aux_stream: u64,
    ) -> OracleSession<'g> {
        let mut answers = ChaCha8Rng::seed_from_u64(seed);
        answers.set_stream(answer_stream);
        let mut aux = ChaCha8Rng::seed_from_u64(seed);
        aux.set_stream(aux_stream);
        OracleSession {
            graph,
            policy,
            meter: QueryMeter::with_budget(budget),
            seed,
            answers,
            aux,
            transcript: None,
        }
    }

    /// A fresh session over the same graph and policy whose random streams
    /// are independent of this session's and of any other branch id.
    pub fn subsession(&self, branch: u64) -> OracleSession<'g> {
        Self::with_streams(
            self.graph,
            self.policy.clone(),
            self.seed,
            self.meter.budget(),
            2 * branch + 2,
            2 * branch + 3,
        )
    }

    pub fn policy(&self) -> &AccessPolicy {
        &self.policy
    }

    pub fn meter(&self) -> &QueryMeter {
        &self.meter
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The vertex count, when the policy reveals it. Free side information,
    /// not a query.
    pub fn known_n(&self) -> Option<u64> {
        self.policy.n_known.then(|| self.graph.n())
    }

    pub fn enable_transcript(&mut self) {
        self.transcript = Some(Vec::new());
    }

    pub fn take_transcript(&mut self) -> Vec<String> {
        self.transcript.take().unwrap_or_default()
    }

    /// Estimator-side coin: true with probability `p`. Drawn from the aux
    /// stream so estimator decisions never shift oracle answers.
    pub fn aux_coin(&mut self, p: f64) -> bool {
        self.aux.gen::<f64>() < p
    }

    pub fn aux_u64(&mut self) -> u64 {
        self.aux.gen()
    }

    fn log(&mut self, op: OracleKind, args: &str, answer: &str, cost: u64) {
        if let Some(t) = self.transcript.as_mut() {
            t.push(format!("{};{};{};{}", op.label(), args, answer, cost));
        }
    }

    fn gate(&mut self, kind: OracleKind, cost: u64) -> Result<(), OracleError> {
        if !self.policy.allows(kind) {
            return Err(OracleError::Disabled(kind));
        }
        self.meter.charge(kind, cost)
    }

    fn index_of(&self, x: VertexId) -> Result<usize, OracleError> {
        self.graph.index_of(x).ok_or(OracleError::UnknownVertex(x))
    }

    /// Uniform random vertex. Cost 1.
    pub fn rand_vert(&mut self) -> Result<VertexId, OracleError> {
        self.gate(OracleKind::RandVert, 1)?;
        let i = self.answers.gen_range(0..self.graph.n() as usize);
        let v = self.graph.id(i);
        self.log(OracleKind::RandVert, "", &v.to_string(), 1);
        Ok(v)
    }

    /// Uniform random neighbor of `x`. Cost 1.
    pub fn rand_nbr(&mut self, x: VertexId) -> Result<VertexId, OracleError> {
        if !self.policy.allows(OracleKind::RandNbr) {
            return Err(OracleError::Disabled(OracleKind::RandNbr));
        }
        let xi = self.index_of(x)?;
        self.meter.charge(OracleKind::RandNbr, 1)?;
        let nbrs = self.graph.neighbors(xi);
        let y = self.graph.id(nbrs[self.answers.gen_range(0..nbrs.len())] as usize);
        self.log(OracleKind::RandNbr, &x.to_string(), &y.to_string(), 1);
        Ok(y)
    }

    /// Exact degree of `x`. Cost 1.
    pub fn degree(&mut self, x: VertexId) -> Result<u64, OracleError> {
        if !self.policy.allows(OracleKind::Degree) {
            return Err(OracleError::Disabled(OracleKind::Degree));
        }
        let xi = self.index_of(x)?;
        self.meter.charge(OracleKind::Degree, 1)?;
        let d = self.graph.degree_by_index(xi);
        self.log(OracleKind::Degree, &x.to_string(), &d.to_string(), 1);
        Ok(d)
    }

    /// Uniform random edge, endpoints in uniformly random order, so taking
    /// the first endpoint is the conventional "sample x in e uar". Cost 1.
    pub fn rand_edge(&mut self) -> Result<(VertexId, VertexId), OracleError> {
        self.gate(OracleKind::RandEdge, 1)?;
        let &(a, b) = &self.graph.edges()[self.answers.gen_range(0..self.graph.m() as usize)];
        let flip = self.answers.gen::<u64>() & 1 == 1;
        let (u, v) = if flip { (b, a) } else { (a, b) };
        let (u, v) = (self.graph.id(u as usize), self.graph.id(v as usize));
        self.log(OracleKind::RandEdge, "", &format!("{},{}", u, v), 1);
        Ok((u, v))
    }

    /// Edge indicator for (x, y). Cost 1.
    pub fn pair(&mut self, x: VertexId, y: VertexId) -> Result<bool, OracleError> {
        if !self.policy.allows(OracleKind::Pair) {
            return Err(OracleError::Disabled(OracleKind::Pair));
        }
        let xi = self.index_of(x)?;
        let yi = self.index_of(y)?;
        self.meter.charge(OracleKind::Pair, 1)?;
        let ans = self.graph.contains_edge(xi, yi);
        self.log(
            OracleKind::Pair,
            &format!("{},{}", x, y),
            if ans { "1" } else { "0" },
            1,
        );
        Ok(ans)
    }

    /// Number of edges inside the distinct set of `s`; charges |s| (multiset
    /// size), so duplicates cost but do not change the answer.
    pub fn additive(&mut self, s: &[VertexId]) -> Result<u64, OracleError> {
        if !self.policy.allows(OracleKind::Additive) {
            return Err(OracleError::Disabled(OracleKind::Additive));
        }
        let mut idx: Vec<u32> = Vec::with_capacity(s.len());
        for &v in s {
            idx.push(self.index_of(v)? as u32);
        }
        self.meter.charge(OracleKind::Additive, s.len() as u64)?;
        idx.sort_unstable();
        idx.dedup();
        let mut count = 0u64;
        for &v in &idx {
            for &w in self.graph.neighbors(v as usize) {
                if w > v && idx.binary_search(&w).is_ok() {
                    count += 1;
                }
            }
        }
        if self.transcript.is_some() {
            let args = s
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",");
            self.log(OracleKind::Additive, &args, &count.to_string(), s.len() as u64);
        }
        Ok(count)
    }

    /// The full adjacency list of `x` at cost 1. Implemented for
    /// lower-bound experiments; no estimator here uses it.
    pub fn full_nbrhood(&mut self, x: VertexId) -> Result<Vec<VertexId>, OracleError> {
        if !self.policy.allows(OracleKind::FullNbrhood) {
            return Err(OracleError::Disabled(OracleKind::FullNbrhood));
        }
        let xi = self.index_of(x)?;
        self.meter.charge(OracleKind::FullNbrhood, 1)?;
        let nbrs: Vec<VertexId> = self
            .graph
            .neighbors(xi)
            .iter()
            .map(|&w| self.graph.id(w as usize))
            .collect();
        if self.transcript.is_some() {
            let ans = nbrs
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",");
            self.log(OracleKind::FullNbrhood, &x.to_string(), &ans, 1);
        }
        Ok(nbrs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{generate, GraphFamily, GraphFamilySpec};
    use crate::graph::Graph;

    fn k4() -> Graph {
        Graph::build_from_edges(None, &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]).unwrap()
    }

    #[test]
    fn disabled_oracle_rejected() {
        let g = k4();
        let mut sess = OracleSession::new(&g, AccessPolicy::base(), 1).unwrap();
        assert!(matches!(
            sess.rand_edge(),
            Err(OracleError::Disabled(OracleKind::RandEdge))
        ));
        assert_eq!(sess.meter().total(), 0);
    }

    #[test]
    fn unknown_vertex_rejected() {
        let g = k4();
        let mut sess = OracleSession::new(&g, AccessPolicy::base(), 1).unwrap();
        let absent = (0..u64::MAX).find(|x| g.index_of(VertexId(*x)).is_none()).unwrap();
        assert!(matches!(
            sess.rand_nbr(VertexId(absent)),
            Err(OracleError::UnknownVertex(_))
        ));
        assert_eq!(sess.meter().total(), 0);
    }

    #[test]
    fn pair_on_clique() {
        let g = k4();
        let mut sess = OracleSession::new(&g, AccessPolicy::standard(), 1).unwrap();
        assert!(sess.pair(g.id(0), g.id(1)).unwrap());
        assert!(!sess.pair(g.id(0), g.id(0)).unwrap());
        assert_eq!(sess.meter().cost_of(OracleKind::Pair), 2);
    }

    #[test]
    fn additive_costs_multiset_size() {
        let g = k4();
        let mut sess = OracleSession::new(&g, AccessPolicy::advanced(), 1).unwrap();
        let all: Vec<VertexId> = (0..4).map(|i| g.id(i)).collect();
        assert_eq!(sess.additive(&all).unwrap(), 6);
        assert_eq!(sess.meter().cost_of(OracleKind::Additive), 4);
        // multiset {a,a,b} with (a,b) an edge: one edge, cost 3
        let s = vec![g.id(0), g.id(0), g.id(1)];
        assert_eq!(sess.additive(&s).unwrap(), 1);
        assert_eq!(sess.meter().cost_of(OracleKind::Additive), 7);
    }

    #[test]
    fn additive_non_adjacent() {
        let g = Graph::build_from_edges(None, &[(1, 2), (3, 4), (2, 3)]).unwrap();
        let a = g.index_of(VertexId(1)).unwrap();
        let b = g.index_of(VertexId(4)).unwrap();
        let mut sess = OracleSession::new(&g, AccessPolicy::advanced(), 1).unwrap();
        assert_eq!(sess.additive(&[g.id(a), g.id(b)]).unwrap(), 0);
        assert_eq!(sess.meter().total(), 2);
    }

    #[test]
    fn full_nbrhood_unit_cost() {
        let g = Graph::build_from_edges(None, &[(9, 1), (9, 2), (9, 3), (9, 4)]).unwrap();
        let center = g.index_of(VertexId(9)).unwrap();
        let policy = AccessPolicy::base().with_full_nbrhood();
        let mut sess = OracleSession::new(&g, policy, 1).unwrap();
        let nbrs = sess.full_nbrhood(g.id(center)).unwrap();
        assert_eq!(nbrs.len(), 4);
        assert_eq!(sess.meter().total(), 1);
    }

    #[test]
    fn rand_vert_two_vertex_split() {
        let g = Graph::build_from_edges(None, &[(10, 20)]).unwrap();
        let mut sess = OracleSession::new(&g, AccessPolicy::base(), 5).unwrap();
        let mut counts = [0u64; 2];
        for _ in 0..10_000 {
            let v = sess.rand_vert().unwrap();
            counts[g.index_of(v).unwrap()] += 1;
        }
        // 5 sigma around 5000 for a fair coin: sqrt(10^4 * 0.25) = 50
        for c in counts {
            assert!((c as f64 - 5000.0).abs() < 5.0 * 50.0, "counts {counts:?}");
        }
    }

    #[test]
    fn rand_vert_uniform_on_cycle() {
        let g = generate(&GraphFamilySpec::new(GraphFamily::Cycle { n: 100 }, 3)).unwrap();
        let mut sess = OracleSession::new(&g, AccessPolicy::base(), 17).unwrap();
        let mut counts = vec![0u64; 100];
        for _ in 0..1_000_000 {
            counts[g.index_of(sess.rand_vert().unwrap()).unwrap()] += 1;
        }
        let sigma = (1_000_000f64 * 0.01 * 0.99).sqrt();
        for &c in &counts {
            assert!((c as f64 - 10_000.0).abs() < 5.0 * sigma);
        }
    }

    #[test]
    fn rand_edge_uniform_on_k4() {
        let g = k4();
        let policy = AccessPolicy::base().with_rand_edge();
        let mut sess = OracleSession::new(&g, policy, 23).unwrap();
        let mut counts = std::collections::HashMap::new();
        for _ in 0..100_000 {
            let (u, v) = sess.rand_edge().unwrap();
            let (a, b) = (u.min(v), u.max(v));
            *counts.entry((a, b)).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 6);
        let sigma = (100_000f64 * (1.0 / 6.0) * (5.0 / 6.0)).sqrt();
        for &c in counts.values() {
            assert!((c as f64 - 100_000.0 / 6.0).abs() < 5.0 * sigma);
        }
    }

    #[test]
    fn rand_nbr_of_path_midpoint() {
        let g = Graph::build_from_edges(None, &[(1, 2), (2, 3)]).unwrap();
        let b = g.id(g.index_of(VertexId(2)).unwrap());
        let mut sess = OracleSession::new(&g, AccessPolicy::base(), 2).unwrap();
        let mut seen = std::collections::HashSet::new();
        let mut ones = 0;
        for _ in 0..2000 {
            let y = sess.rand_nbr(b).unwrap();
            seen.insert(y);
            if y == VertexId(1) {
                ones += 1;
            }
        }
        assert_eq!(seen.len(), 2);
        assert!((ones as f64 - 1000.0).abs() < 5.0 * (2000f64 * 0.25).sqrt());
    }

    #[test]
    fn leaf_always_returns_center() {
        let g = Graph::build_from_edges(None, &[(9, 1), (9, 2), (9, 3), (9, 4)]).unwrap();
        let mut sess = OracleSession::new(&g, AccessPolicy::base(), 2).unwrap();
        for _ in 0..50 {
            assert_eq!(sess.rand_nbr(VertexId(3)).unwrap(), VertexId(9));
        }
    }

    #[test]
    fn budget_failure_is_atomic() {
        let g = k4();
        let mut sess =
            OracleSession::with_budget(&g, AccessPolicy::advanced(), 1, Some(5)).unwrap();
        let all: Vec<VertexId> = (0..4).map(|i| g.id(i)).collect();
        sess.additive(&all).unwrap(); // total = 4
        let before = sess.meter().total();
        // next additive would cost 4 and push total to 8 > 5
        let err = sess.additive(&all).unwrap_err();
        assert!(matches!(err, OracleError::BudgetExhausted { .. }));
        assert_eq!(sess.meter().total(), before);
        // a unit query still fits exactly
        sess.rand_vert().unwrap();
        assert_eq!(sess.meter().total(), 5);
    }

    #[test]
    fn equal_seeds_equal_transcripts() {
        let g = generate(&GraphFamilySpec::new(GraphFamily::Cycle { n: 50 }, 9)).unwrap();
        let policy = AccessPolicy::standard().with_rand_edge().with_additive();
        let run = |seed| {
            let mut sess = OracleSession::new(&g, policy.clone(), seed).unwrap();
            sess.enable_transcript();
            for _ in 0..200 {
                let (u, v) = sess.rand_edge().unwrap();
                let _ = sess.degree(u).unwrap();
                let w = sess.rand_nbr(v).unwrap();
                let _ = sess.pair(u, w).unwrap();
            }
            sess.take_transcript()
        };
        assert_eq!(run(77), run(77));
        assert_ne!(run(77), run(78));
    }

    #[test]
    fn isolated_vertex_rejected_at_construction() {
        // a graph with an isolated vertex can only arise from index edges
        let g = Graph::from_index_edges(3, &[(0, 1)], 4);
        assert!(matches!(
            OracleSession::new(&g, AccessPolicy::base(), 1),
            Err(OracleError::IsolatedVertex)
        ));
    }

    #[test]
    fn n_known_gate() {
        let g = k4();
        let sess = OracleSession::new(&g, AccessPolicy::base(), 1).unwrap();
        assert_eq!(sess.known_n(), None);
        let sess2 = OracleSession::new(&g, AccessPolicy::base().with_n_known(true), 1).unwrap();
        assert_eq!(sess2.known_n(), Some(4));
    }
}
