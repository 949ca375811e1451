//! Exact return- and hitting-time distributions via the killed walk
//! operator, and the identities and bounds those distributions satisfy.

mod checks;
mod rational;

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

pub use checks::{
    even_monotonicity_check, first_passage_profiles, hankel_psd_check, reversibility_residual,
    reversibility_residuals, shifted_hankel_psd_check, theorem1_margin, theorem2_hazard_profile,
    HazardProfile, MomentSequence, MonotonicityReport, TailMargin, HANKEL_TOLERANCE,
    HAZARD_CONSTANT, LARGE_T_CONSTANT, TAIL_CONSTANT,
};
pub use rational::{
    enumerate_return_distribution, hitting_time_distribution_rational, renewal_return_distribution_rational,
    return_time_distribution_rational,
    RATIONAL_MAX_VERTICES,
};

use crate::electrical::{solve_dirichlet, Network};
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};

/// Survival probabilities below this are treated as zero when forming
/// hazards.
pub const HAZARD_FLOOR: f64 = 1e-300;

/// Largest graph for which [`green_function`] uses the dense solve.
const GREEN_DENSE_LIMIT: usize = 1500;

/// One-step walk operator with the absorbing vertex removed.
///
/// Acting on mass vectors it moves every unit of mass off `u != v` to the
/// neighbors of `u` in equal shares and reports what lands on `v`. Acting
/// on functions it is `(Q f)(u) = (1/d_u) sum_{w ~ u, w != v} f(w)`, which
/// is self-adjoint for `<f, g> = sum_{u != v} d_u f(u) g(u)`.
#[derive(Clone, Copy, Debug)]
pub struct KilledOperator<'a> {
    graph: &'a Graph,
    absorbing: Vertex,
}

impl<'a> KilledOperator<'a> {
    pub fn new(graph: &'a Graph, absorbing: Vertex) -> Result<Self> {
        graph.check_vertex(absorbing)?;
        Ok(Self { graph, absorbing })
    }

    pub fn absorbing(&self) -> Vertex {
        self.absorbing
    }

    /// One step of mass transport; returns the mass absorbed at this step.
    /// `mass[absorbing]` is ignored on input and zero on output.
    pub fn step_mass(&self, mass: &[f64], out: &mut [f64]) -> f64 {
        let g = self.graph;
        let v = self.absorbing;
        for (w, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for &u in g.neighbors(w) {
                if u != v {
                    acc += mass[u] / g.degree(u) as f64;
                }
            }
            *o = acc;
        }
        std::mem::replace(&mut out[v], 0.0)
    }

    /// `(Q f)(u)`; entries at the absorbing vertex are left at zero.
    pub fn apply(&self, f: &[f64], out: &mut [f64]) {
        let g = self.graph;
        let v = self.absorbing;
        for (u, o) in out.iter_mut().enumerate() {
            if u == v {
                *o = 0.0;
                continue;
            }
            let s: f64 = g.neighbors(u).iter().filter(|&&w| w != v).map(|&w| f[w]).sum();
            *o = s / g.degree(u) as f64;
        }
    }

    /// `<f, g>` in the degree inner product on `V \ {v}`.
    pub fn inner(&self, f: &[f64], h: &[f64]) -> f64 {
        (0..self.graph.n_vertices())
            .filter(|&u| u != self.absorbing)
            .map(|u| self.graph.degree(u) as f64 * f[u] * h[u])
            .sum()
    }
}

/// Exact law of the return time `tau_v = min{t >= 1 : X_t = v}` up to a
/// horizon. Vectors are indexed by `t`; index 0 is unused for `p` and
/// `hazard` and holds 1 for `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnTimeTable {
    pub vertex: Vertex,
    pub degree: usize,
    pub horizon: usize,
    /// `p[t] = P_v(tau_v = t)`.
    pub p: Vec<f64>,
    /// `s[t] = P_v(tau_v >= t)`, for `t <= horizon + 1`.
    pub s: Vec<f64>,
    /// `p[t] / s[t]`, `None` where `s[t]` is below [`HAZARD_FLOOR`].
    pub hazard: Vec<Option<f64>>,
    /// Set when no walk of length `horizon` reaches a truncation cut.
    pub exact: bool,
}

impl ReturnTimeTable {
    fn from_parts(vertex: Vertex, degree: usize, p: Vec<f64>, s: Vec<f64>, exact: bool) -> Self {
        let horizon = p.len() - 1;
        let hazard = (0..=horizon)
            .map(|t| (t > 0 && s[t] >= HAZARD_FLOOR).then(|| p[t] / s[t]))
            .collect();
        Self { vertex, degree, horizon, p, s, hazard, exact }
    }

    pub fn moments(&self) -> MomentSequence {
        MomentSequence::from_table(self)
    }

    /// Mass still in flight after `horizon` steps.
    pub fn surviving_mass(&self) -> f64 {
        self.s[self.horizon + 1]
    }

    /// `t,p,s,hazard` with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,p,s,hazard\n");
        for t in 1..=self.horizon {
            let hz = match self.hazard[t] {
                Some(h) => format!("{h:.16e}"),
                None => "nan".to_string(),
            };
            let _ = writeln!(out, "{t},{:.16e},{:.16e},{hz}", self.p[t], self.s[t]);
        }
        out
    }
}

fn exact_for(g: &Graph, start: Vertex, horizon: usize) -> bool {
    g.truncation_radius(start).is_none_or(|r| r >= horizon)
}

/// Iterates the killed operator from the mass left after the first step.
/// Returns `p` and `s`, where `s[t]` is the mass still alive after `t - 1`
/// steps. Summing the live mass keeps `s` accurate in relative terms when
/// it becomes small, which the hazard needs.
fn absorb_profile(op: &KilledOperator, mut mass: Vec<f64>, first: f64, horizon: usize) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; horizon + 1];
    let mut s = vec![1.0; horizon + 2];
    p[1] = first;
    s[2] = mass.iter().sum();
    let mut next = vec![0.0; mass.len()];
    for t in 2..=horizon {
        p[t] = op.step_mass(&mass, &mut next);
        std::mem::swap(&mut mass, &mut next);
        s[t + 1] = mass.iter().sum();
    }
    (p, s)
}

/// Places the first step from `v`: mass `1/d_v` per adjacency slot, with
/// loop slots absorbed immediately.
fn first_step(g: &Graph, v: Vertex) -> (Vec<f64>, f64) {
    let mut mass = vec![0.0; g.n_vertices()];
    let share = 1.0 / g.degree(v) as f64;
    let mut absorbed = 0.0;
    for &w in g.neighbors(v) {
        if w == v {
            absorbed += share;
        } else {
            mass[w] += share;
        }
    }
    (mass, absorbed)
}

/// `P_v(tau_v = t)` and `P_v(tau_v >= t)` for `t <= horizon`.
pub fn return_time_distribution(g: &Graph, v: Vertex, horizon: usize) -> Result<ReturnTimeTable> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let op = KilledOperator::new(g, v)?;
    let (mass, first) = first_step(g, v);
    let (p, s) = absorb_profile(&op, mass, first, horizon);
    let table = ReturnTimeTable::from_parts(v, g.degree(v), p, s, exact_for(g, v, horizon));
    if !table.exact {
        log::warn!(
            "{}: horizon {horizon} exceeds the truncation radius around {v}; table is not exact",
            g.name()
        );
    }
    Ok(table)
}

/// Law of `tau_target = min{t >= 1 : X_t = target}` from `start`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HittingDistribution {
    pub start: Vertex,
    pub target: Vertex,
    /// `p[t] = P_start(tau_target = t)`, `p[0] = 0`.
    pub p: Vec<f64>,
    pub exact: bool,
}

impl HittingDistribution {
    /// `P(tau <= t)`.
    pub fn cdf(&self, t: usize) -> f64 {
        self.p[..=t.min(self.p.len() - 1)].iter().sum()
    }
}

pub fn hitting_time_distribution(g: &Graph, start: Vertex, target: Vertex, horizon: usize) -> Result<HittingDistribution> {
    if horizon == 0 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    g.check_vertex(start)?;
    let op = KilledOperator::new(g, target)?;
    let p = if start == target {
        return_time_distribution(g, start, horizon)?.p
    } else {
        let mut mass = vec![0.0; g.n_vertices()];
        mass[start] = 1.0;
        let mut next = vec![0.0; g.n_vertices()];
        let mut p = vec![0.0; horizon + 1];
        for slot in p.iter_mut().skip(1) {
            *slot = op.step_mass(&mass, &mut next);
            std::mem::swap(&mut mass, &mut next);
        }
        p
    };
    Ok(HittingDistribution { start, target, p, exact: exact_for(g, start, horizon) })
}

/// Expected visits to each `u` during one excursion from `v`
/// (`g(u) = E_v sum_{t=1}^{tau_v} 1{X_t = u}`), solved from the invariance
/// equations with `g(v) = 1`.
pub fn green_function(g: &Graph, v: Vertex) -> Result<Vec<f64>> {
    g.check_vertex(v)?;
    let n = g.n_vertices();
    if n <= GREEN_DENSE_LIMIT {
        // g(u) - sum_{w != v} g(w) P(w,u) = P(v,u) on V \ {v}
        let idx = |u: Vertex| if u < v { u } else { u - 1 };
        let m = n - 1;
        let mut a = DMatrix::<f64>::identity(m, m);
        let mut b = DVector::<f64>::zeros(m);
        for w in 0..n {
            let share = 1.0 / g.degree(w) as f64;
            for &u in g.neighbors(w) {
                if u == v {
                    continue;
                }
                if w == v {
                    b[idx(u)] += share;
                } else {
                    a[(idx(u), idx(w))] -= share;
                }
            }
        }
        let x = a
            .lu()
            .solve(&b)
            .ok_or_else(|| Error::Solver("Green function system is singular".into()))?;
        let mut out = vec![1.0; n];
        for u in (0..n).filter(|&u| u != v) {
            out[u] = x[idx(u)];
        }
        Ok(out)
    } else {
        // x = g / d solves the Laplace equation off v with x(v) = 1/d_v
        let net = Network::unit(g);
        let mut pinned = vec![None; n];
        pinned[v] = Some(1.0 / g.degree(v) as f64);
        let x = solve_dirichlet(&net, &pinned, &vec![0.0; n])?;
        Ok((0..n).map(|u| x[u] * g.degree(u) as f64).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_halfline, build_segment, build_star_halfline, complete_graph, path_graph};

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-14
    }

    #[test]
    fn integer_line_returns() {
        let g = build_segment(10).unwrap();
        let t = return_time_distribution(&g, 10, 10).unwrap();
        assert!(t.exact);
        assert!(close(t.p[2], 0.5) && close(t.p[4], 0.125) && close(t.p[6], 1.0 / 16.0));
        assert!((1..=10).step_by(2).all(|k| t.p[k] == 0.0));
        assert_eq!(t.s[1], 1.0);
        assert!(close(t.s[4], 0.5));
    }

    #[test]
    fn halfline_and_star() {
        let t = return_time_distribution(&build_halfline(10).unwrap(), 0, 8).unwrap();
        assert!(close(t.p[2], 0.5) && close(t.p[4], 0.125));
        for d in [2usize, 5, 10] {
            let g = build_star_halfline(5, d - 1).unwrap();
            let t = return_time_distribution(&g, 0, 4).unwrap();
            let want = (2 * d - 1) as f64 / (2 * d) as f64;
            assert!(close(t.p[2], want), "d={d}: {} vs {want}", t.p[2]);
        }
    }

    #[test]
    fn complete_graph_first_steps() {
        let t = return_time_distribution(&complete_graph(4).unwrap(), 2, 5).unwrap();
        assert_eq!(t.p[1], 0.0);
        assert!(close(t.p[2], 1.0 / 3.0));
    }

    #[test]
    fn loops_absorb_at_step_one() {
        let g = crate::graph::add_loops(&build_halfline(6).unwrap(), 0, 2).unwrap();
        let t = return_time_distribution(&g, 0, 4).unwrap();
        assert!(close(t.p[1], 2.0 / 3.0));
        assert!(close(t.s[2], 1.0 / 3.0));
    }

    #[test]
    fn truncation_flag() {
        let g = build_halfline(20).unwrap();
        assert!(return_time_distribution(&g, 0, 20).unwrap().exact);
        assert!(!return_time_distribution(&g, 0, 21).unwrap().exact);
        assert!(return_time_distribution(&g, 0, 0).is_err());
    }

    #[test]
    fn path_hitting_time() {
        let g = path_graph(2).unwrap();
        let h = hitting_time_distribution(&g, 0, 2, 6).unwrap();
        assert!(close(h.p[2], 0.5) && close(h.p[4], 0.25) && close(h.p[6], 0.125));
        assert_eq!(h.p[1], 0.0);
        let r = hitting_time_distribution(&g, 1, 1, 6).unwrap();
        assert_eq!(r.p, return_time_distribution(&g, 1, 6).unwrap().p);
    }

    #[test]
    fn green_function_ratios() {
        let g = build_star_halfline(3, 2).unwrap();
        let gf = green_function(&g, 0).unwrap();
        assert!((gf[4] - 1.0 / 3.0).abs() < 1e-12);
        for u in 0..g.n_vertices() {
            assert!((gf[u] - g.degree(u) as f64 / 3.0).abs() < 1e-10);
        }
        let k4 = green_function(&complete_graph(4).unwrap(), 1).unwrap();
        assert!(k4.iter().all(|x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn green_function_iterative_branch() {
        let g = build_star_halfline(2000, 3).unwrap();
        let gf = green_function(&g, 7).unwrap();
        for u in 0..g.n_vertices() {
            assert!((gf[u] - g.degree(u) as f64 / 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn csv_shape() {
        let t = return_time_distribution(&build_segment(3).unwrap(), 3, 3).unwrap();
        let csv = t.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "t,p,s,hazard");
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[2], "2,5.0000000000000000e-1,1.0000000000000000e0,5.0000000000000000e-1");
    }
}
