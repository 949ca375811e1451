//! Escape-time and expander-window experiments.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::substream;
use super::stats::EstimateWithCI;
use super::walker::{sample_hitting_time, step, Passage};
use super::TrialPlan;
use crate::electrical::{effective_resistance, Network};
use crate::error::{Error, Result};
use crate::exact::hitting_time_distribution;
use crate::graph::{Graph, Vertex};

/// Largest `n_vertices * cap` for which the escape report also carries the
/// exact probability.
const EXACT_WORK_LIMIT: usize = 500_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeReport {
    pub x: Vertex,
    pub y: Vertex,
    pub epsilon: f64,
    pub resistance: f64,
    /// `floor(epsilon * R^2)`.
    pub cap: usize,
    /// Estimate of `P_x(tau_y <= cap)`.
    pub estimate: EstimateWithCI,
    /// The same probability from the killed operator, when affordable.
    pub exact: Option<f64>,
    /// `ci_low <= epsilon`.
    pub holds: bool,
}

/// Estimates `P_x(tau_y <= epsilon R(x <-> y)^2)`.
pub fn escape_experiment(g: &Graph, x: Vertex, y: Vertex, epsilon: f64, plan: &TrialPlan) -> Result<EscapeReport> {
    g.check_vertex(x)?;
    g.check_vertex(y)?;
    if x == y {
        return Err(Error::InvalidParameter("escape experiment needs x != y".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let resistance = effective_resistance(&Network::unit(g), &[x], &[y])?;
    // R comes from a linear solve; absorb its last-bit error before flooring.
    let scaled = epsilon * resistance * resistance;
    let cap = (scaled * (1.0 + 1e-9)).floor() as usize;
    plan.check_budget(plan.trials.saturating_mul(cap as u64))?;
    let hits: u64 = if cap == 0 {
        0
    } else {
        (0..plan.trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = substream(plan.master_seed, trial, 0);
                matches!(sample_hitting_time(g, x, |s| s == y, cap, &mut rng), Passage::Hit(_)) as u64
            })
            .sum()
    };
    let exact = if cap == 0 {
        Some(0.0)
    } else if g.n_vertices().saturating_mul(cap) <= EXACT_WORK_LIMIT {
        Some(hitting_time_distribution(g, x, y, cap)?.cdf(cap))
    } else {
        None
    };
    let estimate = EstimateWithCI::proportion(hits, plan.trials);
    Ok(EscapeReport { x, y, epsilon, resistance, cap, estimate, exact, holds: estimate.ci_low <= epsilon })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    /// Size of the expander (the decorated graph has one more vertex).
    pub n: usize,
    pub v_prime: Vertex,
    pub starts: Vec<Vertex>,
    /// Largest `delta` on a 1/1000 grid with
    /// `P_u(tau >= ceil(delta n)) >= delta` and `P_u(tau <= n) >= delta`
    /// for every start.
    pub delta: f64,
    pub min_hit_by_n: f64,
    pub window_start: usize,
    pub window_end: usize,
    /// `min_{u, t in window} n P_u(tau = t)`.
    pub min_scaled_mass: f64,
    pub argmin: (Vertex, usize),
    /// Simulated `P_u(tau <= n)` for the first start.
    pub mc_hit_by_n: EstimateWithCI,
    pub exact_hit_by_n: f64,
    /// `(mc - exact) / se`.
    pub mc_z: f64,
}

/// Hitting-time structure of `v_prime`, a pendant leaf attached to an
/// expander, from each start in `starts`, with the window
/// `ceil(c_log ln n) <= t <= n`.
pub fn expander_window_experiment(
    decorated: &Graph,
    v_prime: Vertex,
    starts: &[Vertex],
    c_log: f64,
    plan: &TrialPlan,
) -> Result<WindowReport> {
    decorated.check_vertex(v_prime)?;
    if decorated.degree(v_prime) != 1 {
        return Err(Error::InvalidParameter(format!("v' = {v_prime} is not a pendant vertex")));
    }
    if starts.is_empty() {
        return Err(Error::InvalidParameter("no start vertices".into()));
    }
    for &u in starts {
        decorated.check_vertex(u)?;
        if u == v_prime {
            return Err(Error::InvalidParameter("start vertices must differ from v'".into()));
        }
    }
    let n = decorated.n_vertices() - 1;
    let window_start = ((c_log * (n as f64).ln()).ceil() as usize).max(1);
    if window_start > n {
        return Err(Error::InvalidParameter(format!("window [{window_start}, {n}] is empty")));
    }
    let dists: Vec<Vec<f64>> = starts
        .par_iter()
        .map(|&u| hitting_time_distribution(decorated, u, v_prime, n).map(|h| h.p))
        .collect::<Result<_>>()?;
    let cdf = |p: &[f64], t: usize| -> f64 { p[..=t.min(n)].iter().sum() };
    let min_hit_by_n = dists.iter().map(|p| cdf(p, n)).fold(f64::INFINITY, f64::min);
    let delta = (1..=1000)
        .rev()
        .map(|k| k as f64 / 1000.0)
        .find(|&d| {
            let m = (d * n as f64).ceil() as usize;
            min_hit_by_n >= d && dists.iter().all(|p| 1.0 - cdf(p, m.saturating_sub(1)) >= d)
        })
        .unwrap_or(0.0);
    let mut min_scaled_mass = f64::INFINITY;
    let mut argmin = (starts[0], window_start);
    for (&u, p) in starts.iter().zip(&dists) {
        for (t, &pt) in p.iter().enumerate().take(n + 1).skip(window_start) {
            if n as f64 * pt < min_scaled_mass {
                min_scaled_mass = n as f64 * pt;
                argmin = (u, t);
            }
        }
    }
    plan.check_budget(plan.trials.saturating_mul(n as u64))?;
    let u0 = starts[0];
    let hits: u64 = (0..plan.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = substream(plan.master_seed, trial, 0);
            matches!(sample_hitting_time(decorated, u0, |s| s == v_prime, n, &mut rng), Passage::Hit(_)) as u64
        })
        .sum();
    let mc_hit_by_n = EstimateWithCI::proportion(hits, plan.trials);
    let exact_hit_by_n = cdf(&dists[0], n);
    let se = (exact_hit_by_n * (1.0 - exact_hit_by_n) / plan.trials.max(1) as f64).sqrt();
    let mc_z = if se > 0.0 { (mc_hit_by_n.estimate - exact_hit_by_n) / se } else { 0.0 };
    Ok(WindowReport {
        n,
        v_prime,
        starts: starts.to_vec(),
        delta,
        min_hit_by_n,
        window_start,
        window_end: n,
        min_scaled_mass,
        argmin,
        mc_hit_by_n,
        exact_hit_by_n,
        mc_z,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InsideCollisionReport {
    pub u1: Vertex,
    pub u2: Vertex,
    pub horizon: usize,
    /// Probability of `X_t = Y_t` for some `1 <= t <= horizon` before
    /// either walker reaches `v'`.
    pub estimate: EstimateWithCI,
    pub bipartite: bool,
    /// Bipartite graph with the starts on opposite sides: no collision can
    /// ever happen.
    pub parity_obstructed: bool,
}

/// Two independent walkers from `u1`, `u2` on an expander with pendant
/// `v_prime`, over `n` steps where `n` is the expander size.
pub fn collision_inside_expander(
    decorated: &Graph,
    v_prime: Vertex,
    u1: Vertex,
    u2: Vertex,
    plan: &TrialPlan,
) -> Result<InsideCollisionReport> {
    for v in [v_prime, u1, u2] {
        decorated.check_vertex(v)?;
    }
    if u1 == v_prime || u2 == v_prime {
        return Err(Error::InvalidParameter("walkers must start off v'".into()));
    }
    let horizon = decorated.n_vertices() - 1;
    plan.check_budget(plan.trials.saturating_mul(2 * horizon as u64))?;
    let side = decorated.bipartition();
    let parity_obstructed = side.as_ref().is_some_and(|s| s[u1] != s[u2]);
    let successes: u64 = (0..plan.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rx = substream(plan.master_seed, trial, 0);
            let mut ry = substream(plan.master_seed, trial, 1);
            meet_before(decorated, v_prime, u1, u2, horizon, &mut rx, &mut ry) as u64
        })
        .sum();
    Ok(InsideCollisionReport {
        u1,
        u2,
        horizon,
        estimate: EstimateWithCI::proportion(successes, plan.trials),
        bipartite: side.is_some(),
        parity_obstructed,
    })
}

fn meet_before<R: Rng>(g: &Graph, avoid: Vertex, mut x: Vertex, mut y: Vertex, horizon: usize, rx: &mut R, ry: &mut R) -> bool {
    for _ in 0..horizon {
        x = step(g, x, rx);
        y = step(g, y, ry);
        if x == avoid || y == avoid {
            return false;
        }
        if x == y {
            return true;
        }
    }
    false
}
