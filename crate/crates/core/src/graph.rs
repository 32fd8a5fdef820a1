//! Immutable simple-graph storage with opaque random vertex labels.
//!
//! Vertices are addressed externally by [`VertexId`], a 64-bit label drawn
//! uniformly at random at construction time so that labels carry no
//! information about the graph size. Internally the graph is a CSR adjacency
//! over dense indices sorted by label, plus a flat canonical edge list.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Opaque 64-bit vertex label.
///
/// Uniqueness within a graph is guaranteed by the constructors. The `Ord`
/// impl (numeric order on the label) is the total order used for all
/// id tie-breaking.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VertexId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(VertexId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("n hint {hint} does not match the {actual} vertices present in the edge list")]
    InconsistentNHint { hint: u64, actual: u64 },
    #[error("invalid graph family spec: {0}")]
    InvalidSpec(String),
    #[error("edge list io: {0}")]
    Io(#[from] io::Error),
    #[error("edge list parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Exact whole-graph statistics, computed by full scan.
///
/// Test oracle only: estimators never see these.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub n: u64,
    pub m: u64,
    pub d: f64,
    /// Sum of squared degrees.
    pub d2: u128,
    /// (degree, multiplicity) pairs, ascending by degree.
    pub deg_histogram: Vec<(u64, u64)>,
}

const RADIX_BITS: u32 = 16;

#[derive(Clone)]
pub struct Graph {
    /// Sorted ascending; position in this vector is the internal index.
    ids: Vec<u64>,
    /// Bucket offsets into `ids` keyed by the top 16 bits of the label.
    radix: Vec<u32>,
    /// CSR offsets, length n+1.
    offsets: Vec<usize>,
    /// Concatenated neighbor lists, each run sorted ascending by index.
    nbrs: Vec<u32>,
    /// Canonical edge list: u < v (index order == label order), sorted.
    edges: Vec<(u32, u32)>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n(), self.m())
    }
}

impl Graph {
    /// Builds a graph from labelled edge pairs.
    ///
    /// Vertices are exactly the union of the endpoints; `n_hint`, when given,
    /// must match that union (isolated vertices are rejected by
    /// construction).
    pub fn build_from_edges(
        n_hint: Option<u64>,
        pairs: &[(u64, u64)],
    ) -> Result<Graph, GraphError> {
        for &(a, b) in pairs {
            if a == b {
                return Err(GraphError::SelfLoop(VertexId(a)));
            }
        }
        let mut ids: Vec<u64> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
        ids.sort_unstable();
        ids.dedup();
        if let Some(hint) = n_hint {
            if hint != ids.len() as u64 {
                return Err(GraphError::InconsistentNHint {
                    hint,
                    actual: ids.len() as u64,
                });
            }
        }
        if ids.len() > u32::MAX as usize {
            return Err(GraphError::InvalidSpec("too many vertices".into()));
        }
        let lookup = |id: u64| -> u32 { ids.binary_search(&id).unwrap() as u32 };
        let mut edges: Vec<(u32, u32)> = pairs
            .iter()
            .map(|&(a, b)| {
                let (ia, ib) = (lookup(a), lookup(b));
                (ia.min(ib), ia.max(ib))
            })
            .collect();
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(GraphError::DuplicateEdge(
                VertexId(ids[w[0].0 as usize]),
                VertexId(ids[w[0].1 as usize]),
            ));
        }
        Ok(Self::assemble(ids, edges))
    }

    /// Builds a graph on `n` dense indices, assigning fresh uniform random
    /// 64-bit labels from the seeded stream. Edges are index pairs.
    ///
    /// Generator plumbing: callers guarantee simplicity of `edges`.
    pub fn from_index_edges(n: usize, edges: &[(u32, u32)], seed: u64) -> Graph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut raw: Vec<u64> = Vec::with_capacity(n);
        let mut seen = std::collections::HashSet::with_capacity(n * 2);
        while raw.len() < n {
            let id: u64 = rng.gen();
            // collision probability < n^2 / 2^64; just redraw
            if seen.insert(id) {
                raw.push(id);
            }
        }
        // rank[i] = index of raw[i] after sorting by label
        let mut order: Vec<u32> = (0..n as u32).collect();
        order.sort_unstable_by_key(|&i| raw[i as usize]);
        let mut rank = vec![0u32; n];
        for (pos, &i) in order.iter().enumerate() {
            rank[i as usize] = pos as u32;
        }
        let ids: Vec<u64> = order.iter().map(|&i| raw[i as usize]).collect();
        let mut mapped: Vec<(u32, u32)> = edges
            .iter()
            .map(|&(a, b)| {
                let (ra, rb) = (rank[a as usize], rank[b as usize]);
                (ra.min(rb), ra.max(rb))
            })
            .collect();
        mapped.sort_unstable();
        debug_assert!(mapped.windows(2).all(|w| w[0] != w[1]));
        debug_assert!(mapped.iter().all(|&(a, b)| a != b));
        Self::assemble(ids, mapped)
    }

    fn assemble(ids: Vec<u64>, edges: Vec<(u32, u32)>) -> Graph {
        let n = ids.len();
        let mut degs = vec![0usize; n];
        for &(a, b) in &edges {
            degs[a as usize] += 1;
            degs[b as usize] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degs[i];
        }
        let mut cursor = offsets.clone();
        let mut nbrs = vec![0u32; 2 * edges.len()];
        for &(a, b) in &edges {
            nbrs[cursor[a as usize]] = b;
            cursor[a as usize] += 1;
            nbrs[cursor[b as usize]] = a;
            cursor[b as usize] += 1;
        }
        for i in 0..n {
            nbrs[offsets[i]..offsets[i + 1]].sort_unstable();
        }
        let mut radix = vec![0u32; (1usize << RADIX_BITS) + 1];
        let mut bucket = 0usize;
        for (i, &id) in ids.iter().enumerate() {
            let b = (id >> (64 - RADIX_BITS)) as usize;
            while bucket <= b {
                radix[bucket] = i as u32;
                bucket += 1;
            }
        }
        while bucket < radix.len() {
            radix[bucket] = n as u32;
            bucket += 1;
        }
        Graph {
            ids,
            radix,
            offsets,
            nbrs,
            edges,
        }
    }

    pub fn n(&self) -> u64 {
        self.ids.len() as u64
    }

    pub fn m(&self) -> u64 {
        self.edges.len() as u64
    }

    pub fn avg_degree(&self) -> f64 {
        2.0 * self.m() as f64 / self.n() as f64
    }

    pub fn id(&self, index: usize) -> VertexId {
        VertexId(self.ids[index])
    }

    /// Label-to-index lookup; `None` for labels not in this graph.
    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        let b = (v.0 >> (64 - RADIX_BITS)) as usize;
        let lo = self.radix[b] as usize;
        let hi = self.radix[b + 1] as usize;
        self.ids[lo..hi].binary_search(&v.0).ok().map(|p| lo + p)
    }

    pub fn degree_by_index(&self, index: usize) -> u64 {
        (self.offsets[index + 1] - self.offsets[index]) as u64
    }

    pub fn neighbors(&self, index: usize) -> &[u32] {
        &self.nbrs[self.offsets[index]..self.offsets[index + 1]]
    }

    pub fn contains_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn min_degree(&self) -> u64 {
        (0..self.ids.len())
            .map(|i| self.degree_by_index(i))
            .min()
            .unwrap_or(0)
    }

    /// Out-degree of `index` under the (degree, id) lexicographic edge
    /// orientation: an edge points from x to y when
    /// (deg(y), id(y)) > (deg(x), id(x)).
    pub fn deg_plus(&self, index: usize) -> u64 {
        let dx = self.degree_by_index(index);
        let idx = self.ids[index];
        self.neighbors(index)
            .iter()
            .filter(|&&w| {
                let dw = self.degree_by_index(w as usize);
                (dw, self.ids[w as usize]) > (dx, idx)
            })
            .count() as u64
    }

    pub fn ground_truth(&self) -> GroundTruth {
        let n = self.n();
        let m = self.m();
        let mut d2: u128 = 0;
        let mut hist: BTreeMap<u64, u64> = BTreeMap::new();
        for i in 0..self.ids.len() {
            let d = self.degree_by_index(i);
            d2 += (d as u128) * (d as u128);
            *hist.entry(d).or_insert(0) += 1;
        }
        GroundTruth {
            n,
            m,
            d: 2.0 * m as f64 / n as f64,
            d2,
            deg_histogram: hist.into_iter().collect(),
        }
    }

    /// Writes the canonical edge-list text form: first line `n m`, then one
    /// `u v` line per edge with u < v, sorted, LF-terminated.
    pub fn write_edge_list<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = BufWriter::new(out);
        writeln!(w, "{} {}", self.n(), self.m())?;
        for &(a, b) in &self.edges {
            writeln!(w, "{} {}", self.ids[a as usize], self.ids[b as usize])?;
        }
        w.flush()
    }

    pub fn write_edge_list_file<P: AsRef<Path>>(&self, path: P) -> io::Result<()> {
        self.write_edge_list(File::create(path)?)
    }

    pub fn read_edge_list<R: io::Read>(input: R) -> Result<Graph, GraphError> {
        let reader = BufReader::new(input);
        let mut lines = reader.lines().enumerate();
        let (_, header) = lines.next().ok_or(GraphError::Parse {
            line: 1,
            msg: "empty file".into(),
        })?;
        let header = header?;
        let mut it = header.split_whitespace();
        let n: u64 = Self::parse_field(it.next(), 1)?;
        let m: u64 = Self::parse_field(it.next(), 1)?;
        let mut pairs = Vec::with_capacity(m as usize);
        for (lineno, line) in lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let u: u64 = Self::parse_field(it.next(), lineno + 1)?;
            let v: u64 = Self::parse_field(it.next(), lineno + 1)?;
            if u >= v {
                return Err(GraphError::Parse {
                    line: lineno + 1,
                    msg: format!("edge ({u}, {v}) not in canonical u < v order"),
                });
            }
            pairs.push((u, v));
        }
        if pairs.len() as u64 != m {
            return Err(GraphError::Parse {
                line: 1,
                msg: format!("header claims {} edges, found {}", m, pairs.len()),
            });
        }
        Graph::build_from_edges(Some(n), &pairs)
    }

    pub fn read_edge_list_file<P: AsRef<Path>>(path: P) -> Result<Graph, GraphError> {
        Self::read_edge_list(File::open(path)?)
    }

    fn parse_field<T: std::str::FromStr>(field: Option<&str>, line: usize) -> Result<T, GraphError> {
        field
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| GraphError::Parse {
                line,
                msg: "expected decimal field".into(),
            })
    }
}
