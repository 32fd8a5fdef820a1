//! Synthetic graph families.
//!
//! Generation is a pure function of (spec, seed): two runs produce identical
//! edge sets and label assignments. No family ever emits an isolated vertex.

use crate::graph::{Graph, GraphError};

#[derive(Clone, Debug, PartialEq)]
pub enum GraphFamily {
    /// Cycle on `n >= 3` vertices.
    Cycle { n: u64 },
    /// Circulant `degree`-regular graph on `n` vertices.
    Regular { n: u64, degree: u64 },
    /// `count` disjoint cliques of `size` vertices each.
    CliqueCollection { count: u64, size: u64 },
    /// `gamma * cliques` disjoint cliques of `clique_size` vertices plus a
    /// perfect matching on the remaining `n - gamma*cliques*clique_size`
    /// vertices (which must be even and nonnegative).
    CliqueMatchingMix {
        gamma: u64,
        cliques: u64,
        clique_size: u64,
        n: u64,
    },
    /// Complete bipartite graph K_{left,right}.
    CompleteBipartite { left: u64, right: u64 },
    /// Star: one center joined to `leaves` leaves.
    Star { leaves: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphFamilySpec {
    pub family: GraphFamily,
    pub seed: u64,
}

impl GraphFamilySpec {
    pub fn new(family: GraphFamily, seed: u64) -> Self {
        GraphFamilySpec { family, seed }
    }

    /// Exact vertex and edge counts the generated graph will have.
    pub fn expected_counts(&self) -> Result<(u64, u64), GraphError> {
        self.family.validate()?;
        Ok(match self.family {
            GraphFamily::Cycle { n } => (n, n),
            GraphFamily::Regular { n, degree } => (n, n * degree / 2),
            GraphFamily::CliqueCollection { count, size } => {
                (count * size, count * size * (size - 1) / 2)
            }
            GraphFamily::CliqueMatchingMix {
                gamma,
                cliques,
                clique_size,
                n,
            } => {
                let covered = gamma * cliques * clique_size;
                let m = gamma * cliques * clique_size * (clique_size - 1) / 2 + (n - covered) / 2;
                (n, m)
            }
            GraphFamily::CompleteBipartite { left, right } => (left + right, left * right),
            GraphFamily::Star { leaves } => (leaves + 1, leaves),
        })
    }
}

impl GraphFamily {
    fn validate(&self) -> Result<(), GraphError> {
        let bad = |msg: String| Err(GraphError::InvalidSpec(msg));
        match *self {
            GraphFamily::Cycle { n } => {
                if n < 3 {
                    return bad(format!("cycle needs n >= 3, got {n}"));
                }
            }
            GraphFamily::Regular { n, degree } => {
                if degree == 0 || degree >= n {
                    return bad(format!("regular degree {degree} out of range for n={n}"));
                }
                if n * degree % 2 != 0 {
                    return bad(format!("n*degree must be even, got n={n} degree={degree}"));
                }
            }
            GraphFamily::CliqueCollection { count, size } => {
                if count == 0 || size < 2 {
                    return bad(format!(
                        "clique collection needs count >= 1 and size >= 2, got {count}x{size}"
                    ));
                }
            }
            GraphFamily::CliqueMatchingMix {
                gamma,
                cliques,
                clique_size,
                n,
            } => {
                if gamma == 0 || cliques == 0 || clique_size < 2 {
                    return bad("mix needs gamma, cliques >= 1 and clique_size >= 2".into());
                }
                let covered = gamma
                    .checked_mul(cliques)
                    .and_then(|x| x.checked_mul(clique_size))
                    .ok_or_else(|| GraphError::InvalidSpec("mix parameters overflow".into()))?;
                if covered > n {
                    return bad(format!("gamma*cliques*clique_size = {covered} exceeds n = {n}"));
                }
                if (n - covered) % 2 != 0 {
                    return bad(format!("odd matching remainder {}", n - covered));
                }
            }
            GraphFamily::CompleteBipartite { left, right } => {
                if left == 0 || right == 0 {
                    return bad("bipartite sides must be nonempty".into());
                }
            }
            GraphFamily::Star { leaves } => {
                if leaves == 0 {
                    return bad("star needs at least one leaf".into());
                }
            }
        }
        Ok(())
    }

    fn index_edges(&self) -> (usize, Vec<(u32, u32)>) {
        match *self {
            GraphFamily::Cycle { n } => {
                let n = n as u32;
                let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
                (n as usize, edges)
            }
            GraphFamily::Regular { n, degree } => {
                let n = n as u32;
                let mut edges = Vec::with_capacity((n as u64 * degree / 2) as usize);
                for k in 1..=(degree / 2) as u32 {
                    for i in 0..n {
                        edges.push((i, (i + k) % n));
                    }
                }
                if degree % 2 == 1 {
                    for i in 0..n / 2 {
                        edges.push((i, i + n / 2));
                    }
                }
                (n as usize, edges)
            }
            GraphFamily::CliqueCollection { count, size } => {
                let mut edges = Vec::new();
                push_cliques(&mut edges, 0, count, size);
                ((count * size) as usize, edges)
            }
            GraphFamily::CliqueMatchingMix {
                gamma,
                cliques,
                clique_size,
                n,
            } => {
                let mut edges = Vec::new();
                let covered = push_cliques(&mut edges, 0, gamma * cliques, clique_size);
                let mut v = covered;
                while v < n as u32 {
                    edges.push((v, v + 1));
                    v += 2;
                }
                (n as usize, edges)
            }
            GraphFamily::CompleteBipartite { left, right } => {
                let mut edges = Vec::with_capacity((left * right) as usize);
                for a in 0..left as u32 {
                    for b in 0..right as u32 {
                        edges.push((a, left as u32 + b));
                    }
                }
                ((left + right) as usize, edges)
            }
            GraphFamily::Star { leaves } => {
                let edges = (1..=leaves as u32).map(|l| (0, l)).collect();
                ((leaves + 1) as usize, edges)
            }
        }
    }
}

fn push_cliques(edges: &mut Vec<(u32, u32)>, base: u32, count: u64, size: u64) -> u32 {
    let mut v = base;
    for _ in 0..count {
        for a in 0..size as u32 {
            for b in (a + 1)..size as u32 {
                edges.push((v + a, v + b));
            }
        }
        v += size as u32;
    }
    v
}

/// Generates the family instance with fresh random vertex labels.
pub fn generate(spec: &GraphFamilySpec) -> Result<Graph, GraphError> {
    spec.family.validate()?;
    let (n, edges) = spec.family.index_edges();
    Ok(Graph::from_index_edges(n, &edges, spec.seed))
}
