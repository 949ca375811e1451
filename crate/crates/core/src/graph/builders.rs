use std::ops::Range;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{Graph, Vertex};
use crate::error::{Error, Result};
use crate::expander::random_regular;
use crate::montecarlo::rng::derive_seed;

/// Default `delta` for [`build_gt`]; the theoretical value is not explicit.
pub const DEFAULT_GT_DELTA: f64 = 0.1;

/// Extra half-line vertices beyond the top attachment height when no
/// explicit length is requested.
const DEFAULT_BUFFER: usize = 64;

fn line_adjacency(length: usize) -> Vec<Vec<Vertex>> {
    (0..=length)
        .map(|v| {
            let mut nbrs = Vec::with_capacity(2);
            if v > 0 {
                nbrs.push(v - 1);
            }
            if v < length {
                nbrs.push(v + 1);
            }
            nbrs
        })
        .collect()
}

/// Path `0 - 1 - ... - length` with no extra labels.
pub fn path_graph(length: usize) -> Result<Graph> {
    if length == 0 {
        return Err(Error::InvalidParameter("path length must be at least 1".into()));
    }
    Graph::from_adjacency(line_adjacency(length), format!("path:{length}"))
}

/// Truncated half-line: path `0..=length` rooted at 0, with `h(v) = v`.
pub fn build_halfline(length: usize) -> Result<Graph> {
    if length == 0 {
        return Err(Error::InvalidParameter("half-line length must be at least 1".into()));
    }
    let mut g = Graph::from_adjacency(line_adjacency(length), format!("halfline:{length}"))?;
    g.set_heights((0..=length as u64).collect())?;
    g.set_center(0);
    g.set_truncation_boundary(&[length]);
    Ok(g)
}

/// Truncation of the integer line to `-radius..=radius`, relabeled
/// `0..=2*radius` with the origin at `radius`.
pub fn build_segment(radius: usize) -> Result<Graph> {
    if radius == 0 {
        return Err(Error::InvalidParameter("segment radius must be at least 1".into()));
    }
    let mut g = Graph::from_adjacency(line_adjacency(2 * radius), format!("segment:{radius}"))?;
    g.set_center(radius);
    g.set_truncation_boundary(&[0, 2 * radius]);
    Ok(g)
}

/// Half-line with `pendants` extra leaves hanging off vertex 0.
pub fn build_star_halfline(length: usize, pendants: usize) -> Result<Graph> {
    if length == 0 {
        return Err(Error::InvalidParameter("half-line length must be at least 1".into()));
    }
    let mut lists = line_adjacency(length);
    for i in 0..pendants {
        let leaf = length + 1 + i;
        lists[0].push(leaf);
        lists.push(vec![0]);
    }
    let name = if pendants == 0 {
        format!("halfline:{length}")
    } else {
        format!("star:{length}:{pendants}")
    };
    let mut g = Graph::from_adjacency(lists, name)?;
    let mut heights: Vec<u64> = (0..=length as u64).collect();
    heights.extend(std::iter::repeat_n(0, pendants));
    g.set_heights(heights)?;
    g.set_center(0);
    g.set_truncation_boundary(&[length]);
    Ok(g)
}

/// Disjoint union of `base` and `expander` plus the single edge
/// `{anchor, port}`. Expander vertices are renumbered after the base ones
/// and inherit the height of `anchor` when the base carries heights.
pub fn attach_expander(base: &Graph, anchor: Vertex, expander: &Graph, port: Vertex) -> Result<Graph> {
    base.check_vertex(anchor)?;
    expander.check_vertex(port)?;
    let offset = base.n_vertices();
    let mut lists = base.adjacency_lists();
    for v in 0..expander.n_vertices() {
        lists.push(expander.neighbors(v).iter().map(|&w| w + offset).collect());
    }
    lists[anchor].push(port + offset);
    lists[port + offset].push(anchor);

    let mut g = Graph::from_adjacency(lists, format!("{}+{}@{}", base.name(), expander.name(), anchor))?;
    if let Some(h) = base.heights() {
        let mut heights = h.to_vec();
        heights.extend(std::iter::repeat_n(h[anchor], expander.n_vertices()));
        g.set_heights(heights)?;
    }
    if let Some(c) = base.center() {
        g.set_center(c);
    }
    for (k, v) in base.metadata() {
        g.set_meta(k.clone(), v);
    }
    Ok(g)
}

/// Adds a new leaf `v'` attached to `v`. Returns the graph and `v'`.
pub fn with_pendant(g: &Graph, v: Vertex) -> Result<(Graph, Vertex)> {
    g.check_vertex(v)?;
    let leaf = g.n_vertices();
    let mut lists = g.adjacency_lists();
    lists[v].push(leaf);
    lists.push(vec![v]);
    let mut out = Graph::from_adjacency(lists, format!("{}+pendant@{v}", g.name()))?;
    for (k, val) in g.metadata() {
        out.set_meta(k.clone(), val);
    }
    Ok((out, leaf))
}

/// Smallest admissible size for a `d`-regular graph that is at least `raw`.
fn regular_size(raw: usize, d: usize) -> usize {
    let mut n = raw.max(d + 1);
    if (n * d) % 2 == 1 {
        n += 1;
    }
    n
}

/// Expander size used by the single-scale construction:
/// `ceil(3 ln(1/delta) t / (delta ln t))` before parity rounding.
pub fn gt_expander_size(t: usize, delta: f64) -> f64 {
    let t = t as f64;
    (3.0 * (1.0 / delta).ln() * t / (delta * t.ln())).ceil()
}

/// Half-line of length `t` with a `d`-regular expander hung off vertex 0 by
/// one edge. The expander size lands in metadata under `expander_size`.
pub fn build_gt(t: usize, delta: f64, expander_degree: usize, seed: u64) -> Result<Graph> {
    if t < 3 {
        return Err(Error::InvalidParameter(format!("t must be at least 3, got {t}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta must lie in (0, 1), got {delta}")));
    }
    if expander_degree < 3 {
        return Err(Error::InvalidParameter("expander degree must be at least 3".into()));
    }
    let raw = gt_expander_size(t, delta);
    if raw < (expander_degree + 1) as f64 {
        return Err(Error::InvalidParameter(format!(
            "expander size {raw} is below degree + 1 = {}",
            expander_degree + 1
        )));
    }
    let n = regular_size(raw as usize, expander_degree);
    let line = build_halfline(t)?;
    let expander = random_regular(n, expander_degree, seed)?;
    let mut g = attach_expander(&line, 0, &expander, 0)?;
    g.set_name(format!("gt:{t}:{delta}:{expander_degree}"));
    g.set_meta("t", t);
    g.set_meta("delta", delta);
    g.set_meta("expander_size", n);
    g.set_meta("expander.1.start", t + 1);
    g.set_meta("expander.1.len", n);
    Ok(g)
}

/// Parameters of the multi-scale construction: expander `E_i` of size
/// `expander_sizes[i]` attached by one edge to half-line vertex `heights[i]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub heights: Vec<usize>,
    pub expander_sizes: Vec<usize>,
    pub expander_degree: usize,
    pub seed: u64,
    /// Half-line length; defaults to the top height plus a small buffer.
    #[serde(default)]
    pub halfline_length: Option<usize>,
}

impl ConstructionParams {
    pub fn new(heights: Vec<usize>, expander_sizes: Vec<usize>, seed: u64) -> Self {
        Self { heights, expander_sizes, expander_degree: 3, seed, halfline_length: None }
    }

    /// One scale: `heights=[4]`, `sizes=[64]`.
    pub fn small(seed: u64) -> Self {
        Self::new(vec![4], vec![64], seed)
    }

    /// Two scales: `heights=[4,16]`, `sizes=[64,4096]`.
    pub fn medium(seed: u64) -> Self {
        Self::new(vec![4, 16], vec![64, 4096], seed)
    }

    pub fn with_halfline_length(mut self, length: usize) -> Self {
        self.halfline_length = Some(length);
        self
    }

    /// Hard checks return an error; the scale-separation condition only
    /// produces warnings since its true form is out of reach at desk scale.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.heights.is_empty() {
            return Err(Error::InvalidParameter("at least one scale is required".into()));
        }
        if self.heights.len() != self.expander_sizes.len() {
            return Err(Error::InvalidParameter(format!(
                "{} heights but {} expander sizes",
                self.heights.len(),
                self.expander_sizes.len()
            )));
        }
        if self.expander_degree < 3 {
            return Err(Error::InvalidParameter("expander degree must be at least 3".into()));
        }
        if self.heights[0] == 0 || self.heights.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("heights must be positive and strictly increasing".into()));
        }
        for &n in &self.expander_sizes {
            if n < self.expander_degree + 1 || (n * self.expander_degree) % 2 == 1 {
                return Err(Error::InvalidParameter(format!(
                    "no simple {}-regular graph on {n} vertices",
                    self.expander_degree
                )));
            }
        }
        if let Some(len) = self.halfline_length {
            if len < *self.heights.last().unwrap() {
                return Err(Error::InvalidParameter(format!(
                    "half-line length {len} is below the top height"
                )));
            }
        }

        let mut warnings = Vec::new();
        for i in 0..self.heights.len() {
            let (h, n) = (self.heights[i] as u128, self.expander_sizes[i] as u128);
            if n < h.pow(3) {
                warnings.push(format!("scale {}: n = {n} is below h^3 = {}", i + 1, h.pow(3)));
            }
            if i > 0 {
                let (hp, np) = (self.heights[i - 1] as u128, self.expander_sizes[i - 1] as u128);
                if h <= np * hp * hp {
                    warnings.push(format!(
                        "scale {}: h = {h} does not exceed n_prev * h_prev^2 = {}",
                        i + 1,
                        np * hp * hp
                    ));
                }
            }
        }
        Ok(warnings)
    }

    pub fn resolved_halfline_length(&self) -> usize {
        self.halfline_length
            .unwrap_or_else(|| self.heights.last().copied().unwrap_or(0) + DEFAULT_BUFFER)
    }

    /// Window boundaries `T_0 = 0`, `T_i = T_{i-1} + n_i h_i^2`.
    pub fn window_boundaries(&self) -> Vec<u64> {
        let mut out = vec![0u64];
        for (&h, &n) in self.heights.iter().zip(&self.expander_sizes) {
            let last = *out.last().unwrap();
            out.push(last + (n as u64) * (h as u64) * (h as u64));
        }
        out
    }
}

/// Multi-scale construction: half-line with expander `E_i` attached by one
/// edge between its first vertex and half-line vertex `h_i`. Vertices of
/// `E_i` get height `h_i`; half-line vertex `v` has height `v`.
pub fn build_full_construction(params: &ConstructionParams) -> Result<Graph> {
    for w in params.validate()? {
        warn!("construction parameters: {w}");
    }
    let length = params.resolved_halfline_length();
    let mut g = build_halfline(length)?;
    let mut blocks = Vec::new();
    for (i, (&h, &n)) in params.heights.iter().zip(&params.expander_sizes).enumerate() {
        let expander = random_regular(n, params.expander_degree, derive_seed(params.seed, i as u64))?;
        let start = g.n_vertices();
        g = attach_expander(&g, h, &expander, 0)?;
        blocks.push((start, n));
    }
    g.set_name(format!(
        "full:{}:{}:{}",
        join(&params.heights),
        join(&params.expander_sizes),
        params.expander_degree
    ));
    g.set_meta("halfline_length", length);
    for (i, (start, n)) in blocks.into_iter().enumerate() {
        g.set_meta(format!("expander.{}.start", i + 1), start);
        g.set_meta(format!("expander.{}.len", i + 1), n);
    }
    Ok(g)
}

fn join(xs: &[usize]) -> String {
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// Vertex range of the `i`-th attached expander (1-based), from metadata
/// written by the construction builders.
pub fn expander_block(g: &Graph, i: usize) -> Option<Range<Vertex>> {
    let start: usize = g.meta(&format!("expander.{i}.start"))?.parse().ok()?;
    let len: usize = g.meta(&format!("expander.{i}.len"))?.parse().ok()?;
    Some(start..start + len)
}

/// Adds `count` loops at `v`.
pub fn add_loops(g: &Graph, v: Vertex, count: usize) -> Result<Graph> {
    g.check_vertex(v)?;
    if count == 0 {
        return Ok(g.clone());
    }
    let mut lists = g.adjacency_lists();
    lists[v].extend(std::iter::repeat_n(v, count));
    let mut out = Graph::from_adjacency(lists, format!("{}+loops{count}@{v}", g.name()))?;
    if let Some(h) = g.heights() {
        out.set_heights(h.to_vec())?;
    }
    if let Some(c) = g.center() {
        out.set_center(c);
    }
    for (k, val) in g.metadata() {
        out.set_meta(k.clone(), val);
    }
    Ok(out)
}

pub fn cycle_graph(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidParameter("cycle needs at least 3 vertices".into()));
    }
    let edges: Vec<_> = (0..n).map(|v| (v, (v + 1) % n)).collect();
    Graph::from_edges(n, &edges, format!("cycle:{n}"))
}

pub fn complete_graph(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::InvalidParameter("complete graph needs at least 2 vertices".into()));
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for w in u + 1..n {
            edges.push((u, w));
        }
    }
    Graph::from_edges(n, &edges, format!("complete:{n}"))
}

/// `width x height` discrete torus; vertex `(x, y)` is `y * width + x`.
pub fn torus_2d(width: usize, height: usize) -> Result<Graph> {
    if width < 3 || height < 3 {
        return Err(Error::InvalidParameter("torus sides must be at least 3".into()));
    }
    let id = |x: usize, y: usize| y * width + x;
    let mut edges = Vec::with_capacity(2 * width * height);
    for y in 0..height {
        for x in 0..width {
            edges.push((id(x, y), id((x + 1) % width, y)));
            edges.push((id(x, y), id(x, (y + 1) % height)));
        }
    }
    Graph::from_edges(width * height, &edges, format!("torus:{width}:{height}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halfline_examples() {
        let g = build_halfline(1).unwrap();
        assert_eq!((g.n_vertices(), g.n_edges()), (2, 1));
        assert_eq!(g.degrees(), vec![1, 1]);
        assert_eq!(build_halfline(3).unwrap().degrees(), vec![1, 2, 2, 1]);
        assert_eq!(build_halfline(5).unwrap().neighbors(2), &[1, 3]);
        assert_eq!(build_halfline(4).unwrap().heights().unwrap(), &[0, 1, 2, 3, 4]);
        assert!(matches!(build_halfline(0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn segment_examples() {
        let g = build_segment(1).unwrap();
        assert_eq!(g.n_vertices(), 3);
        assert_eq!(g.degree(g.center().unwrap()), 2);
        let g = build_segment(4).unwrap();
        assert_eq!(g.center(), Some(4));
        assert_eq!(g.degree(4), 2);
        let g = build_segment(2).unwrap();
        assert_eq!((g.n_vertices(), g.n_edges()), (5, 4));
        assert!(build_segment(0).is_err());
    }

    #[test]
    fn star_halfline_examples() {
        let plain = build_star_halfline(3, 0).unwrap();
        assert!(plain.same_structure(&build_halfline(3).unwrap()));
        assert_eq!(build_star_halfline(3, 2).unwrap().degree(0), 3);
        assert_eq!(build_star_halfline(2, 4).unwrap().n_vertices(), 7);
    }

    #[test]
    fn attach_triangle() {
        let base = build_halfline(2).unwrap();
        let tri = cycle_graph(3).unwrap();
        let g = attach_expander(&base, 0, &tri, 0).unwrap();
        assert_eq!(g.n_vertices(), 6);
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.degree(3), 3);
        assert!(g.heights().unwrap()[3..].iter().all(|&h| h == 0));

        let g = attach_expander(&base, 2, &complete_graph(4).unwrap(), 1).unwrap();
        assert_eq!(g.n_vertices(), 7);
        assert!(g.heights().unwrap()[3..].iter().all(|&h| h == 2));
        assert!(attach_expander(&base, 9, &tri, 0).is_err());
        assert!(attach_expander(&base, 0, &tri, 3).is_err());
    }

    #[test]
    fn gt_size_rounding() {
        // 3 ln2 * 100 / (0.5 ln 100) = 90.3..., ceil 91, parity bump to 92
        assert_eq!(gt_expander_size(100, 0.5), 91.0);
        let g = build_gt(100, 0.5, 3, 7).unwrap();
        assert_eq!(g.meta("expander_size"), Some("92"));
        assert_eq!(g.n_vertices(), 101 + 92);
        assert_eq!(g.degree(0), 2);
        // raw size 3 < d + 1
        assert!(build_gt(3, 0.99, 3, 1).is_err());
        assert!(build_gt(2, 0.5, 3, 1).is_err());
        assert!(build_gt(100, 1.0, 3, 1).is_err());
    }

    #[test]
    fn full_construction_examples() {
        let g = build_full_construction(&ConstructionParams::small(3)).unwrap();
        assert_eq!(g.degree(4), 3);
        assert_eq!(g.n_vertices(), 4 + 64 + 1 + 64);
        let block = expander_block(&g, 1).unwrap();
        assert_eq!(block.len(), 64);
        assert!(block.clone().all(|v| g.height(v) == Some(4)));

        let params = ConstructionParams::new(vec![4, 16], vec![64, 4096], 3);
        let g = build_full_construction(&params).unwrap();
        assert_eq!(g.degree(16), 3);
        assert_eq!(g.degree(4), 3);
        assert!(expander_block(&g, 2).unwrap().all(|v| g.height(v) == Some(16)));
    }

    #[test]
    fn construction_warnings_and_errors() {
        let warnings = ConstructionParams::medium(0).validate().unwrap();
        assert_eq!(warnings.len(), 1, "{warnings:?}");
        assert!(ConstructionParams::new(vec![4, 4], vec![64, 64], 0).validate().is_err());
        assert!(ConstructionParams::new(vec![4], vec![64, 64], 0).validate().is_err());
        assert!(ConstructionParams::new(vec![4], vec![65], 0).validate().is_err());
        assert_eq!(ConstructionParams::medium(0).window_boundaries(), vec![0, 1024, 1024 + 4096 * 256]);
    }

    #[test]
    fn add_loops_examples() {
        let g = add_loops(&build_halfline(2).unwrap(), 0, 2).unwrap();
        assert_eq!(g.degree(0), 3);
        assert_eq!(g.loops_at(0), 2);
        let same = add_loops(&build_halfline(2).unwrap(), 0, 0).unwrap();
        assert!(same.same_structure(&build_halfline(2).unwrap()));
    }

    #[test]
    fn small_families() {
        assert_eq!(torus_2d(4, 5).unwrap().regular_degree(), Some(4));
        assert_eq!(complete_graph(5).unwrap().n_edges(), 10);
        let (g, leaf) = with_pendant(&complete_graph(4).unwrap(), 2).unwrap();
        assert_eq!((leaf, g.degree(2), g.degree(leaf)), (4, 4, 1));
    }
}
