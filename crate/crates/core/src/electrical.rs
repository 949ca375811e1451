//! Electrical-network view of a graph: harmonic potentials, unit current
//! flows, effective resistance, escape probabilities and expected hitting
//! times.
//!
//! Every quantity reduces to a Dirichlet problem for the weighted Laplacian
//! `(L f)(u) = sum_w c(u,w) (f(u) - f(w))` on the vertices that are not
//! pinned. Loops carry no current and drop out of `L`, but they still count
//! toward the walk's holding probability and hence toward `c(u)`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};

/// Unknown count below which the Dirichlet system is solved densely.
pub const DENSE_LIMIT: usize = 500;
/// Relative residual target for the iterative solver.
pub const SOLVER_TOLERANCE: f64 = 1e-12;

/// A graph with a positive conductance on every adjacency slot.
#[derive(Clone, Debug)]
pub struct Network<'a> {
    graph: &'a Graph,
    /// Aligned with the concatenated adjacency lists; `None` means unit.
    conductance: Option<Vec<f64>>,
}

impl<'a> Network<'a> {
    pub fn unit(graph: &'a Graph) -> Self {
        Self { graph, conductance: None }
    }

    /// Conductances from a symmetric function of the endpoints.
    pub fn with_conductance(graph: &'a Graph, c: impl Fn(Vertex, Vertex) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(graph.total_degree());
        for u in 0..graph.n_vertices() {
            for &w in graph.neighbors(u) {
                let cu = c(u, w);
                if !(cu > 0.0 && cu.is_finite()) {
                    return Err(Error::InvalidParameter(format!("conductance {cu} on edge {u}-{w}")));
                }
                if (cu - c(w, u)).abs() > 1e-15 * cu {
                    return Err(Error::InvalidParameter(format!("asymmetric conductance on {u}-{w}")));
                }
                values.push(cu);
            }
        }
        Ok(Self { graph, conductance: Some(values) })
    }

    pub fn graph(&self) -> &'a Graph {
        self.graph
    }

    /// `(neighbor, conductance)` pairs of `u`, loops included.
    fn edges_of(&self, u: Vertex) -> impl Iterator<Item = (Vertex, f64)> + '_ {
        let start = self.graph.slot_offset(u);
        self.graph.neighbors(u).iter().enumerate().map(move |(k, &w)| {
            let c = self.conductance.as_ref().map_or(1.0, |cs| cs[start + k]);
            (w, c)
        })
    }

    /// Total conductance at `u`, loops included; the degree on unit networks.
    pub fn weight(&self, u: Vertex) -> f64 {
        self.edges_of(u).map(|(_, c)| c).sum()
    }

    pub fn total_weight(&self) -> f64 {
        (0..self.graph.n_vertices()).map(|u| self.weight(u)).sum()
    }
}

/// Solves `(L f)(u) = source(u)` for unpinned `u`, with `f = pinned` where
/// given.
pub(crate) fn solve_dirichlet(net: &Network, pinned: &[Option<f64>], source: &[f64]) -> Result<Vec<f64>> {
    let g = net.graph();
    let n = g.n_vertices();
    let mut index = vec![usize::MAX; n];
    let mut free = Vec::new();
    for u in 0..n {
        if pinned[u].is_none() {
            index[u] = free.len();
            free.push(u);
        }
    }
    let mut f: Vec<f64> = pinned.iter().map(|p| p.unwrap_or(0.0)).collect();
    if free.is_empty() {
        return Ok(f);
    }
    let m = free.len();
    let mut rhs = vec![0.0; m];
    let mut diag = vec![0.0; m];
    for (i, &u) in free.iter().enumerate() {
        rhs[i] = source[u];
        for (w, c) in net.edges_of(u) {
            if w == u {
                continue;
            }
            diag[i] += c;
            if let Some(b) = pinned[w] {
                rhs[i] += c * b;
            }
        }
    }

    let x = if m < DENSE_LIMIT {
        let mut a = DMatrix::<f64>::zeros(m, m);
        for (i, &u) in free.iter().enumerate() {
            a[(i, i)] = diag[i];
            for (w, c) in net.edges_of(u) {
                if w != u && index[w] != usize::MAX {
                    a[(i, index[w])] -= c;
                }
            }
        }
        let chol = a
            .cholesky()
            .ok_or_else(|| Error::Solver("Dirichlet matrix is not positive definite".into()))?;
        chol.solve(&DVector::from_vec(rhs)).as_slice().to_vec()
    } else {
        let apply = |x: &[f64], out: &mut [f64]| {
            for (i, &u) in free.iter().enumerate() {
                let mut acc = diag[i] * x[i];
                for (w, c) in net.edges_of(u) {
                    if w != u && index[w] != usize::MAX {
                        acc -= c * x[index[w]];
                    }
                }
                out[i] = acc;
            }
        };
        conjugate_gradient(apply, &diag, &rhs)?
    };
    for (i, &u) in free.iter().enumerate() {
        f[u] = x[i];
    }
    Ok(f)
}

/// Jacobi-preconditioned conjugate gradient for an SPD operator.
fn conjugate_gradient(apply: impl Fn(&[f64], &mut [f64]), diag: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let m = b.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let b_norm = dot(b, b).sqrt();
    let mut x = vec![0.0; m];
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; m];
    let mut rz = dot(&r, &z);
    let max_iter = 20 * m + 1000;
    for _ in 0..max_iter {
        apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if dot(&r, &r).sqrt() <= SOLVER_TOLERANCE * b_norm {
            return Ok(x);
        }
        for i in 0..m {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solver(format!("conjugate gradient stalled after {max_iter} iterations")))
}

fn check_sets(g: &Graph, s: &[Vertex], t: &[Vertex]) -> Result<()> {
    if s.is_empty() || t.is_empty() {
        return Err(Error::InvalidParameter("source and sink sets must be nonempty".into()));
    }
    for &v in s.iter().chain(t) {
        g.check_vertex(v)?;
    }
    if s.iter().any(|v| t.contains(v)) {
        return Err(Error::InvalidParameter("source and sink sets overlap".into()));
    }
    Ok(())
}

/// Potential of the unit current flow from `sources` (held at 0) to
/// `sinks` (held at the effective resistance).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    pub f: Vec<f64>,
    pub sources: Vec<Vertex>,
    pub sinks: Vec<Vertex>,
    pub resistance: f64,
}

pub fn solve_potential(net: &Network, sources: &[Vertex], sinks: &[Vertex]) -> Result<Potential> {
    let g = net.graph();
    check_sets(g, sources, sinks)?;
    let n = g.n_vertices();
    let mut pinned = vec![None; n];
    for &s in sources {
        pinned[s] = Some(0.0);
    }
    for &t in sinks {
        pinned[t] = Some(1.0);
    }
    let f = solve_dirichlet(net, &pinned, &vec![0.0; n])?;
    // current leaving the merged source node at unit voltage
    let mut current = 0.0;
    for &s in sources {
        for (w, c) in net.edges_of(s) {
            current += c * (f[w] - f[s]);
        }
    }
    if current <= 0.0 {
        return Err(Error::Degenerate("no current between source and sink sets".into()));
    }
    let resistance = 1.0 / current;
    Ok(Potential {
        f: f.into_iter().map(|x| x * resistance).collect(),
        sources: sources.to_vec(),
        sinks: sinks.to_vec(),
        resistance,
    })
}

/// Effective resistance between two vertex sets, each merged into one node.
pub fn effective_resistance(net: &Network, sources: &[Vertex], sinks: &[Vertex]) -> Result<f64> {
    Ok(solve_potential(net, sources, sinks)?.resistance)
}

impl Potential {
    /// Largest `|f(u) - f(w)|` over edges; at most 1 for unit flows on unit
    /// networks.
    pub fn lipschitz_margin(&self, g: &Graph) -> f64 {
        let mut worst: f64 = 0.0;
        for u in 0..g.n_vertices() {
            for &w in g.neighbors(u) {
                worst = worst.max((self.f[u] - self.f[w]).abs());
            }
        }
        worst
    }

    /// Largest `|f(u) - weighted mean of neighbors|` off the pinned sets.
    pub fn harmonic_residual(&self, net: &Network) -> f64 {
        let g = net.graph();
        let mut worst: f64 = 0.0;
        for u in 0..g.n_vertices() {
            if self.sources.contains(&u) || self.sinks.contains(&u) {
                continue;
            }
            let (mut num, mut den) = (0.0, 0.0);
            for (w, c) in net.edges_of(u) {
                num += c * self.f[w];
                den += c;
            }
            worst = worst.max((self.f[u] - num / den).abs());
        }
        worst
    }

    /// Current `i(u -> w) = c(u,w) (f(w) - f(u))`, flowing from sources to
    /// sinks.
    pub fn flow(&self, net: &Network) -> Flow {
        let g = net.graph();
        let mut entries = Vec::with_capacity(g.total_degree());
        for u in 0..g.n_vertices() {
            for (w, c) in net.edges_of(u) {
                entries.push((u, w, c * (self.f[w] - self.f[u])));
            }
        }
        Flow { entries, sources: self.sources.clone(), sinks: self.sinks.clone() }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("vertex,f\n");
        for (v, f) in self.f.iter().enumerate() {
            let _ = writeln!(out, "{v},{f:.16e}");
        }
        out
    }
}

/// Antisymmetric current on directed adjacency slots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    pub entries: Vec<(Vertex, Vertex, f64)>,
    pub sources: Vec<Vertex>,
    pub sinks: Vec<Vertex>,
}

impl Flow {
    /// Net current leaving the source set.
    pub fn source_strength(&self) -> f64 {
        self.entries
            .iter()
            .filter(|(u, w, _)| self.sources.contains(u) && !self.sources.contains(w))
            .map(|e| e.2)
            .sum()
    }

    /// Largest net outflow at a vertex off the source and sink sets.
    pub fn conservation_error(&self, n_vertices: usize) -> f64 {
        let mut net = vec![0.0; n_vertices];
        for &(u, _, i) in &self.entries {
            net[u] += i;
        }
        (0..n_vertices)
            .filter(|v| !self.sources.contains(v) && !self.sinks.contains(v))
            .map(|v| net[v].abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|i(u->w) + i(w->u)|`.
    pub fn antisymmetry_error(&self) -> f64 {
        use std::collections::HashMap;
        let mut sums: HashMap<(Vertex, Vertex), f64> = HashMap::new();
        for &(u, w, i) in &self.entries {
            *sums.entry((u.min(w), u.max(w))).or_default() += i;
        }
        sums.values().map(|s| s.abs()).fold(0.0, f64::max)
    }

    /// One row per edge `u < w`, current oriented `u -> w`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,v,i\n");
        for &(u, w, i) in &self.entries {
            if u < w {
                let _ = writeln!(out, "{u},{w},{i:.16e}");
            }
        }
        out
    }
}

/// `P_v(walk hits A before returning to v) = 1 / (c(v) R(v <-> A))`.
pub fn escape_probability(net: &Network, v: Vertex, targets: &[Vertex]) -> Result<f64> {
    if targets.contains(&v) {
        return Err(Error::InvalidParameter(format!("start {v} lies in the target set")));
    }
    let r = effective_resistance(net, &[v], targets)?;
    Ok(1.0 / (net.weight(v) * r))
}

/// `E_u[tau_A]` for every `u`, zero on `A`.
pub fn expected_hitting_times(net: &Network, targets: &[Vertex]) -> Result<Vec<f64>> {
    let g = net.graph();
    if targets.is_empty() {
        return Err(Error::InvalidParameter("target set must be nonempty".into()));
    }
    let mut pinned = vec![None; g.n_vertices()];
    for &a in targets {
        g.check_vertex(a)?;
        pinned[a] = Some(0.0);
    }
    let source: Vec<f64> = (0..g.n_vertices()).map(|u| net.weight(u)).collect();
    solve_dirichlet(net, &pinned, &source)
}

pub fn expected_hitting_time(net: &Network, start: Vertex, targets: &[Vertex]) -> Result<f64> {
    net.graph().check_vertex(start)?;
    Ok(expected_hitting_times(net, targets)?[start])
}

/// `|E_x tau_y + E_y tau_x - c(V) R(x <-> y)|`, the commute-time identity
/// residual; `c(V)` is `2|E|` on loop-free unit networks.
pub fn commute_identity_residual(net: &Network, x: Vertex, y: Vertex) -> Result<f64> {
    let exy = expected_hitting_time(net, x, &[y])?;
    let eyx = expected_hitting_time(net, y, &[x])?;
    let r = effective_resistance(net, &[x], &[y])?;
    Ok((exy + eyx - net.total_weight() * r).abs())
}

/// Sublevel set `S = {u : f(u) < s}` of a potential and its outer vertex
/// boundary `N(S)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub threshold: f64,
    pub inside: Vec<Vertex>,
    pub boundary: Vec<Vertex>,
    /// `R(sources <-> N(S))`; lies in `[s, s + max edge increment]`.
    pub boundary_resistance: f64,
    pub sandwich_holds: bool,
}

pub fn sublevel_cut(net: &Network, p: &Potential, threshold: f64) -> Result<Cut> {
    let g = net.graph();
    let inside: Vec<Vertex> = (0..g.n_vertices()).filter(|&u| p.f[u] < threshold).collect();
    let mut in_s = vec![false; g.n_vertices()];
    inside.iter().for_each(|&u| in_s[u] = true);
    let mut on_boundary = vec![false; g.n_vertices()];
    for &u in &inside {
        for &w in g.neighbors(u) {
            if !in_s[w] {
                on_boundary[w] = true;
            }
        }
    }
    let boundary: Vec<Vertex> = (0..g.n_vertices()).filter(|&u| on_boundary[u]).collect();
    if boundary.is_empty() || inside.is_empty() {
        return Err(Error::Degenerate(format!("sublevel cut at {threshold} has an empty side")));
    }
    let r = effective_resistance(net, &p.sources, &boundary)?;
    let step = p.lipschitz_margin(g);
    let tol = 1e-9 * (1.0 + threshold);
    Ok(Cut {
        threshold,
        inside,
        boundary,
        boundary_resistance: r,
        sandwich_holds: r >= threshold - tol && r <= threshold + step + tol,
    })
}

/// Recurrent-branch diagnostic of the tail lower bound at time `t`: the
/// first ball radius `r` with `R(v <-> boundary of B(v,r)) >= 4 sqrt(t)`,
/// the cut at `2 sqrt(t)` of that ball's potential, and the escape bound it
/// yields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallCutDiagnostic {
    pub t: usize,
    pub radius: usize,
    pub ball_resistance: f64,
    pub cut: Cut,
    pub escape_probability: f64,
    pub escape_lower_bound: f64,
}

pub fn ball_cut_diagnostic(net: &Network, v: Vertex, t: usize) -> Result<BallCutDiagnostic> {
    let g = net.graph();
    g.check_vertex(v)?;
    let dist = g.distances_from(v);
    let max_r = dist.iter().copied().filter(|&d| d != usize::MAX).max().unwrap_or(0);
    let target = 4.0 * (t as f64).sqrt();
    for radius in 1..=max_r {
        let sphere: Vec<Vertex> = (0..g.n_vertices()).filter(|&u| dist[u] == radius).collect();
        let p = solve_potential(net, &[v], &sphere)?;
        if p.resistance >= target {
            let s = 2.0 * (t as f64).sqrt();
            let cut = sublevel_cut(net, &p, s)?;
            let escape = escape_probability(net, v, &cut.boundary)?;
            return Ok(BallCutDiagnostic {
                t,
                radius,
                ball_resistance: p.resistance,
                escape_probability: escape,
                escape_lower_bound: 1.0 / (net.weight(v) * (s + 1.0)),
                cut,
            });
        }
    }
    Err(Error::Degenerate(format!(
        "no ball around {v} reaches resistance {target:.3}; the truncation is too small"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_halfline, complete_graph, cycle_graph, path_graph};

    #[test]
    fn path_potential_is_linear() {
        let g = path_graph(6).unwrap();
        let net = Network::unit(&g);
        let p = solve_potential(&net, &[0], &[6]).unwrap();
        for (k, f) in p.f.iter().enumerate() {
            assert!((f - k as f64).abs() < 1e-12);
        }
        assert!((p.lipschitz_margin(&g) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn four_cycle_two_parallel_paths() {
        let g = cycle_graph(4).unwrap();
        let net = Network::unit(&g);
        let p = solve_potential(&net, &[0], &[2]).unwrap();
        assert!((p.resistance - 1.0).abs() < 1e-12);
        for (v, want) in [(0, 0.0), (1, 0.5), (2, 1.0), (3, 0.5)] {
            assert!((p.f[v] - want).abs() < 1e-12);
        }
        assert!((p.lipschitz_margin(&g) - 0.5).abs() < 1e-12);
        let flow = p.flow(&net);
        assert!((flow.source_strength() - 1.0).abs() < 1e-12);
        assert!(flow.conservation_error(4) < 1e-12);
        assert!(flow.antisymmetry_error() < 1e-15);
    }

    #[test]
    fn complete_graph_resistance_and_escape() {
        let g = complete_graph(4).unwrap();
        let net = Network::unit(&g);
        assert!((effective_resistance(&net, &[0], &[1]).unwrap() - 0.5).abs() < 1e-12);
        assert!((escape_probability(&net, 0, &[1]).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((escape_probability(&net, 0, &[1, 2, 3]).unwrap() - 1.0).abs() < 1e-12);
        assert!(escape_probability(&net, 0, &[0]).is_err());
    }

    #[test]
    fn cycle_resistance_formula() {
        let n = 11;
        let g = cycle_graph(n).unwrap();
        let net = Network::unit(&g);
        for k in 1..n {
            let want = (k * (n - k)) as f64 / n as f64;
            assert!((effective_resistance(&net, &[0], &[k]).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn halfline_escape_is_inverse_height() {
        let g = build_halfline(40).unwrap();
        let net = Network::unit(&g);
        for h in [1, 5, 17] {
            assert!((escape_probability(&net, 0, &[h]).unwrap() - 1.0 / h as f64).abs() < 1e-12);
            assert!((effective_resistance(&net, &[0], &[h]).unwrap() - h as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn gamblers_ruin_hitting_time() {
        let n = 9;
        let g = path_graph(n).unwrap();
        let net = Network::unit(&g);
        assert!((expected_hitting_time(&net, 0, &[n]).unwrap() - (n * n) as f64).abs() < 1e-9);
        assert_eq!(expected_hitting_time(&net, n, &[n]).unwrap(), 0.0);
        assert!(commute_identity_residual(&net, 0, n).unwrap() < 1e-9);
    }

    #[test]
    fn iterative_path_matches_dense() {
        let g = path_graph(1200).unwrap();
        let net = Network::unit(&g);
        let p = solve_potential(&net, &[0], &[1200]).unwrap();
        assert!((p.resistance - 1200.0).abs() < 1e-7);
        assert!((p.f[600] - 600.0).abs() < 1e-7);
        let e = expected_hitting_time(&net, 0, &[1200]).unwrap();
        assert!((e / 1_440_000.0 - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sublevel_cuts() {
        let g = path_graph(10).unwrap();
        let net = Network::unit(&g);
        let p = solve_potential(&net, &[0], &[10]).unwrap();
        let cut = sublevel_cut(&net, &p, 3.5).unwrap();
        assert_eq!(cut.inside, vec![0, 1, 2, 3]);
        assert_eq!(cut.boundary, vec![4]);
        // tie at f = 3 is excluded from S
        assert_eq!(sublevel_cut(&net, &p, 3.0).unwrap().inside, vec![0, 1, 2]);
        let low = sublevel_cut(&net, &p, 0.5).unwrap();
        assert_eq!((low.inside, low.boundary), (vec![0], vec![1]));
        assert!(sublevel_cut(&net, &p, 11.0).is_err());
    }

    #[test]
    fn halfline_sandwich() {
        let g = build_halfline(200).unwrap();
        let net = Network::unit(&g);
        for t in [1usize, 7, 30, 100] {
            let d = ball_cut_diagnostic(&net, 0, t).unwrap();
            let s = 2.0 * (t as f64).sqrt();
            assert!(d.cut.sandwich_holds, "{d:?}");
            assert!(d.cut.boundary_resistance >= s && d.cut.boundary_resistance <= s + 1.0);
            assert!(d.escape_probability >= d.escape_lower_bound);
        }
    }
}
