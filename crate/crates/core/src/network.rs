//! Static directed communication graphs.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkTopology {
    in_neighbors: Vec<Vec<usize>>,
    out_neighbors: Vec<Vec<usize>>,
}

impl NetworkTopology {
    /// Builds a topology from directed `(src, dst)` edges.
    pub fn from_edges(node_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::invalid("a network needs at least one node"));
        }
        let mut out: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); node_count];
        let mut inn: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); node_count];
        for (s, d) in edges {
            if s >= node_count || d >= node_count {
                return Err(Error::invalid(format!("edge ({s}, {d}) out of range")));
            }
            if s == d {
                return Err(Error::invalid(format!("self-loop at node {s}")));
            }
            out[s].insert(d);
            inn[d].insert(s);
        }
        Ok(NetworkTopology {
            in_neighbors: inn.into_iter().map(|s| s.into_iter().collect()).collect(),
            out_neighbors: out.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.in_neighbors.len()
    }

    pub fn in_neighbors(&self, p: usize) -> &[usize] {
        &self.in_neighbors[p]
    }

    pub fn out_neighbors(&self, p: usize) -> &[usize] {
        &self.out_neighbors[p]
    }

    pub fn edge_count(&self) -> usize {
        self.out_neighbors.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out_neighbors
            .iter()
            .enumerate()
            .flat_map(|(s, ds)| ds.iter().map(move |&d| (s, d)))
    }

    /// One `src dst` pair per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (s, d) in self.edges() {
            let _ = writeln!(out, "{s} {d}");
        }
        out
    }
}

/// Ring `C_d`: node `p` sends to `p+1..=p+d` and receives from `p-d..=p-1` (mod L).
pub fn build_ring(l: usize, d: usize) -> Result<NetworkTopology> {
    if l < 2 || d == 0 || d > l - 1 {
        return Err(Error::invalid(format!("ring degree {d} must lie in 1..={} for L = {l}", l.saturating_sub(1))));
    }
    NetworkTopology::from_edges(l, (0..l).flat_map(|p| (1..=d).map(move |k| (p, (p + k) % l))))
}

/// Complete digraph, identical to `build_ring(l, l - 1)`.
pub fn build_complete(l: usize) -> Result<NetworkTopology> {
    build_ring(l, l - 1)
}

/// Small-world graph with bidirectional links.
///
/// Each node first links to its next `ceil(q/2)` nodes on a ring (for odd `q`
/// this gives lattice degree `q + 1`). Every lattice link then has its far
/// endpoint moved, with probability `p_rewire`, to a uniformly chosen node
/// that is neither the near endpoint nor already linked to it.
pub fn build_watts_strogatz(l: usize, q: usize, p_rewire: f64, rng: &mut Rng) -> Result<NetworkTopology> {
    let half = q.div_ceil(2);
    if q == 0 || 2 * half >= l {
        return Err(Error::invalid(format!("q = {q} is too large for L = {l}")));
    }
    if !(0.0..=1.0).contains(&p_rewire) {
        return Err(Error::invalid(format!("rewiring probability {p_rewire} outside [0, 1]")));
    }
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); l];
    for p in 0..l {
        for k in 1..=half {
            let d = (p + k) % l;
            adj[p].insert(d);
            adj[d].insert(p);
        }
    }
    for k in 1..=half {
        for p in 0..l {
            let far = (p + k) % l;
            if !adj[p].contains(&far) || rng.gen::<f64>() >= p_rewire {
                continue;
            }
            if adj[p].len() >= l - 1 {
                continue;
            }
            let mut target = rng.gen_range(0..l);
            while target == p || adj[p].contains(&target) {
                target = rng.gen_range(0..l);
            }
            adj[p].remove(&far);
            adj[far].remove(&p);
            adj[p].insert(target);
            adj[target].insert(p);
        }
    }
    NetworkTopology::from_edges(
        l,
        adj.iter().enumerate().flat_map(|(s, ns)| ns.iter().map(move |&d| (s, d))),
    )
}

/// Redraws [`build_watts_strogatz`] until the graph is connected.
/// Returns the graph and the number of draws used.
pub fn build_connected_watts_strogatz(
    l: usize,
    q: usize,
    p_rewire: f64,
    rng: &mut Rng,
    max_draws: usize,
) -> Result<(NetworkTopology, usize)> {
    for draw in 1..=max_draws {
        let t = build_watts_strogatz(l, q, p_rewire, rng)?;
        if is_connected(&t) {
            if draw > 1 {
                log::info!("small-world graph connected after {draw} draws");
            }
            return Ok((t, draw));
        }
    }
    Err(Error::invalid(format!("no connected small-world graph in {max_draws} draws")))
}

fn bfs_count<'a>(l: usize, next: &dyn Fn(usize) -> &'a [usize]) -> usize {
    let mut seen = vec![false; l];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in next(u) {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count
}

/// Strong connectivity: node 0 reaches everyone along out-edges and is
/// reached by everyone along in-edges.
pub fn is_connected(t: &NetworkTopology) -> bool {
    let l = t.node_count();
    bfs_count(l, &|u| t.out_neighbors(u)) == l && bfs_count(l, &|u| t.in_neighbors(u)) == l
}
