//! Graph representation and validated builders.
//!
//! Graphs are stored in compressed adjacency form with sorted neighbor
//! lists. A loop at `v` appears once in `v`'s list and contributes 1 to the
//! degree, so a walker at `v` stays put with probability `loops(v) / d_v`.

mod builders;
mod comb;
pub mod edgelist;
mod space;

use std::collections::{BTreeMap, VecDeque};

pub use builders::{
    add_loops, attach_expander, build_full_construction, build_gt, build_halfline,
    build_segment, build_star_halfline, complete_graph, cycle_graph, expander_block,
    gt_expander_size, path_graph, torus_2d, with_pendant, ConstructionParams, DEFAULT_GT_DELTA,
};
pub use comb::comb_product;
pub use space::{Comb, IntegerLine, WalkSpace};

use crate::error::{Error, Result};

pub type Vertex = usize;

/// A finite ball standing in for an infinite graph: walks of length at most
/// `horizon` from `center` never reach the cut, so return and hitting
/// probabilities up to `horizon` are those of the infinite graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TruncationSpec {
    pub center: Vertex,
    pub radius: usize,
    pub horizon: usize,
}

impl TruncationSpec {
    pub fn new(center: Vertex, radius: usize, horizon: usize) -> Result<Self> {
        if radius == 0 || horizon == 0 {
            return Err(Error::InvalidParameter("radius and horizon must be positive".into()));
        }
        if radius < horizon {
            return Err(Error::InvalidParameter(format!(
                "truncation radius {radius} is below the horizon {horizon}"
            )));
        }
        Ok(Self { center, radius, horizon })
    }

    /// Spec for `center` in a truncated graph, if the truncation is deep
    /// enough for `horizon`.
    pub fn of_graph(g: &Graph, center: Vertex, horizon: usize) -> Result<Self> {
        g.check_vertex(center)?;
        let radius = g.truncation_radius(center).unwrap_or(usize::MAX);
        Self::new(center, radius, horizon)
    }
}

#[derive(Clone, Debug)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<Vertex>,
    heights: Option<Vec<u64>>,
    name: String,
    center: Option<Vertex>,
    metadata: BTreeMap<String, String>,
}

impl Graph {
    /// Builds a graph from an edge list. `(u, u)` encodes a loop; loops may
    /// repeat, ordinary edges may not.
    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)], name: impl Into<String>) -> Result<Self> {
        let mut lists: Vec<Vec<Vertex>> = vec![Vec::new(); n];
        for &(u, w) in edges {
            for x in [u, w] {
                if x >= n {
                    return Err(Error::InvalidVertex { vertex: x, n_vertices: n });
                }
            }
            lists[u].push(w);
            if u != w {
                lists[w].push(u);
            }
        }
        Self::from_adjacency(lists, name)
    }

    /// Builds a graph from per-vertex neighbor lists and validates it.
    pub fn from_adjacency(mut lists: Vec<Vec<Vertex>>, name: impl Into<String>) -> Result<Self> {
        let n = lists.len();
        if n == 0 {
            return Err(Error::Validation("graph has no vertices".into()));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::with_capacity(lists.iter().map(Vec::len).sum());
        offsets.push(0);
        for list in lists.iter_mut() {
            list.sort_unstable();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        let graph = Graph {
            offsets,
            targets,
            heights: None,
            name: name.into(),
            center: None,
            metadata: BTreeMap::new(),
        };
        graph.validate()?;
        Ok(graph)
    }

    /// Checks symmetry, positive degrees, the multi-edge rule and connectivity.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_vertices();
        for u in 0..n {
            let nbrs = self.neighbors(u);
            if nbrs.is_empty() {
                return Err(Error::Validation(format!("vertex {u} has degree 0")));
            }
            for (i, &w) in nbrs.iter().enumerate() {
                if w >= n {
                    return Err(Error::InvalidVertex { vertex: w, n_vertices: n });
                }
                if w != u && i > 0 && nbrs[i - 1] == w {
                    return Err(Error::Validation(format!("multi-edge between {u} and {w}")));
                }
                if w != u && self.multiplicity(w, u) != 1 {
                    return Err(Error::Validation(format!(
                        "asymmetric adjacency: {w} lists {u} {} times but {u} lists {w} once",
                        self.multiplicity(w, u)
                    )));
                }
            }
        }
        if !self.is_connected() {
            return Err(Error::Validation("graph is not connected".into()));
        }
        Ok(())
    }

    fn multiplicity(&self, u: Vertex, w: Vertex) -> usize {
        let nbrs = self.neighbors(u);
        let lo = nbrs.partition_point(|&x| x < w);
        let hi = nbrs.partition_point(|&x| x <= w);
        hi - lo
    }

    pub fn n_vertices(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Number of edges, each loop counted once.
    pub fn n_edges(&self) -> usize {
        let loops: usize = (0..self.n_vertices()).map(|v| self.loops_at(v)).sum();
        (self.targets.len() - loops) / 2 + loops
    }

    /// Sum of all degrees; equals `2|E|` on loop-free graphs and is the
    /// normalizer of the stationary measure in general.
    pub fn total_degree(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn loops_at(&self, v: Vertex) -> usize {
        self.multiplicity(v, v)
    }

    pub fn has_edge(&self, u: Vertex, w: Vertex) -> bool {
        self.multiplicity(u, w) > 0
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n_vertices()).map(|v| self.degree(v)).collect()
    }

    /// Canonical edge list: `(u, w)` with `u <= w`, ascending.
    pub fn edges(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::with_capacity(self.n_edges());
        for u in 0..self.n_vertices() {
            for &w in self.neighbors(u) {
                if w >= u {
                    out.push((u, w));
                }
            }
        }
        out
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v < self.n_vertices() {
            Ok(())
        } else {
            Err(Error::InvalidVertex { vertex: v, n_vertices: self.n_vertices() })
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn heights(&self) -> Option<&[u64]> {
        self.heights.as_deref()
    }

    pub fn height(&self, v: Vertex) -> Option<u64> {
        self.heights.as_ref().map(|h| h[v])
    }

    pub fn set_heights(&mut self, heights: Vec<u64>) -> Result<()> {
        if heights.len() != self.n_vertices() {
            return Err(Error::InvalidParameter(format!(
                "{} heights for {} vertices",
                heights.len(),
                self.n_vertices()
            )));
        }
        self.heights = Some(heights);
        Ok(())
    }

    /// Marked root vertex (segment center, half-line origin).
    pub fn center(&self) -> Option<Vertex> {
        self.center
    }

    pub fn set_center(&mut self, v: Vertex) {
        self.center = Some(v);
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.get(key).map(String::as_str)
    }

    pub fn set_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.insert(key.into(), value.to_string());
    }

    /// Vertices whose neighborhoods were cut when truncating an infinite
    /// graph. Empty for genuinely finite graphs.
    pub fn truncation_boundary(&self) -> Vec<Vertex> {
        self.meta("truncated_at")
            .map(|s| s.split(',').filter_map(|x| x.parse().ok()).collect())
            .unwrap_or_default()
    }

    pub fn set_truncation_boundary(&mut self, vertices: &[Vertex]) {
        let joined = vertices.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        self.set_meta("truncated_at", joined);
    }

    /// Graph distance from `v` to the nearest truncation vertex, or `None`
    /// when the graph is not a truncation.
    pub fn truncation_radius(&self, v: Vertex) -> Option<usize> {
        let boundary = self.truncation_boundary();
        if boundary.is_empty() {
            return None;
        }
        let dist = self.distances_from(v);
        boundary.iter().map(|&b| dist[b]).min()
    }

    /// Common degree if the graph is regular.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.degree(0);
        (1..self.n_vertices()).all(|v| self.degree(v) == d).then_some(d)
    }

    /// Breadth-first distances from `src`; unreachable vertices get `usize::MAX`.
    pub fn distances_from(&self, src: Vertex) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n_vertices()];
        let mut queue = VecDeque::new();
        dist[src] = 0;
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.distances_from(0).iter().all(|&d| d != usize::MAX)
    }

    /// Two-coloring if one exists. Loops make a graph non-bipartite.
    pub fn bipartition(&self) -> Option<Vec<bool>> {
        let dist = self.distances_from(0);
        for u in 0..self.n_vertices() {
            for &w in self.neighbors(u) {
                if dist[u] % 2 == dist[w] % 2 {
                    return None;
                }
            }
        }
        Some(dist.iter().map(|d| d % 2 == 1).collect())
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartition().is_some()
    }

    /// Structural equality: adjacency and heights. Names and metadata are
    /// ignored.
    pub fn same_structure(&self, other: &Graph) -> bool {
        self.offsets == other.offsets && self.targets == other.targets && self.heights == other.heights
    }

    /// Index of `v`'s first slot in the concatenated adjacency lists.
    pub(crate) fn slot_offset(&self, v: Vertex) -> usize {
        self.offsets[v]
    }

    pub(crate) fn adjacency_lists(&self) -> Vec<Vec<Vertex>> {
        (0..self.n_vertices()).map(|v| self.neighbors(v).to_vec()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loops_count_once_toward_degree() {
        let g = Graph::from_edges(2, &[(0, 1), (0, 0), (0, 0)], "t").unwrap();
        assert_eq!(g.degree(0), 3);
        assert_eq!(g.loops_at(0), 2);
        assert_eq!(g.n_edges(), 3);
        assert_eq!(g.edges(), vec![(0, 0), (0, 0), (0, 1)]);
    }

    #[test]
    fn rejects_multi_edges_and_disconnected() {
        assert!(Graph::from_edges(2, &[(0, 1), (1, 0)], "m").is_err());
        assert!(Graph::from_edges(4, &[(0, 1), (2, 3)], "d").is_err());
        assert!(Graph::from_edges(2, &[(0, 5)], "oob").is_err());
    }

    #[test]
    fn rejects_asymmetric_adjacency() {
        let err = Graph::from_adjacency(vec![vec![1], vec![0], vec![0]], "a").unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn bipartite_detection() {
        assert!(cycle_graph(6).unwrap().is_bipartite());
        assert!(!cycle_graph(5).unwrap().is_bipartite());
        let looped = add_loops(&path_graph(2).unwrap(), 0, 1).unwrap();
        assert!(!looped.is_bipartite());
    }
}
