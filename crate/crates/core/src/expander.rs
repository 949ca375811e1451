//! Random regular expanders and the spectral/resistance diagnostics used to
//! qualify them.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::electrical::{effective_resistance, Network};
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::montecarlo::rng::derive_seed;

pub const DEFAULT_MAX_RETRIES: usize = 10_000;

/// Rayleigh-quotient convergence tolerance for [`estimate_lambda2`].
pub const LAMBDA_TOLERANCE: f64 = 1e-6;

const RESTARTS: u64 = 3;
const PARALLEL_THRESHOLD: usize = 1 << 14;

/// Uniform simple `d`-regular graph on `n` vertices by configuration-model
/// pairing, rejecting any pairing with a loop, a multi-edge, or more than
/// one component.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    random_regular_with_retries(n, d, seed, DEFAULT_MAX_RETRIES)
}

pub fn random_regular_with_retries(n: usize, d: usize, seed: u64, max_retries: usize) -> Result<Graph> {
    if d == 0 || n < d + 1 {
        return Err(Error::InvalidParameter(format!("need n >= d + 1 and d >= 1, got n={n}, d={d}")));
    }
    if (n * d) % 2 == 1 {
        return Err(Error::InvalidParameter(format!("n*d must be even, got n={n}, d={d}")));
    }
    let mut points: Vec<Vertex> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..max_retries {
        rng.set_stream(attempt as u64);
        rng.set_word_pos(0);
        points.sort_unstable();
        points.shuffle(&mut rng);
        if let Some(lists) = pair_up(&points, n, d) {
            if let Ok(mut g) = Graph::from_adjacency(lists, format!("rr:{n}:{d}:{seed}")) {
                g.set_meta("attempts", attempt + 1);
                return Ok(g);
            }
        }
    }
    Err(Error::GenerationFailure { retries: max_retries })
}

fn pair_up(points: &[Vertex], n: usize, d: usize) -> Option<Vec<Vec<Vertex>>> {
    let mut lists: Vec<Vec<Vertex>> = (0..n).map(|_| Vec::with_capacity(d)).collect();
    for pair in points.chunks_exact(2) {
        let (u, w) = (pair[0], pair[1]);
        if u == w || lists[u].contains(&w) {
            return None;
        }
        lists[u].push(w);
        lists[w].push(u);
    }
    Some(lists)
}

/// `out = P x` for the walk operator, `(P x)(u) = mean of x over adj(u)`.
/// Each entry is summed in adjacency order, so the parallel and serial paths
/// agree bit for bit.
pub(crate) fn apply_walk(g: &Graph, x: &[f64], out: &mut [f64]) {
    let row = |u: usize| {
        let nbrs = g.neighbors(u);
        nbrs.iter().map(|&w| x[w]).sum::<f64>() / nbrs.len() as f64
    };
    if g.n_vertices() >= PARALLEL_THRESHOLD {
        out.par_iter_mut().enumerate().for_each(|(u, o)| *o = row(u));
    } else {
        out.iter_mut().enumerate().for_each(|(u, o)| *o = row(u));
    }
}

fn deflate(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    x.iter_mut().for_each(|v| *v -= mean);
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn require_regular(g: &Graph) -> Result<usize> {
    g.regular_degree()
        .ok_or_else(|| Error::InvalidParameter(format!("{} is not regular", g.name())))
}

/// Power iteration for the dominant eigenvalue of `shift * I + scale * P`
/// on the complement of the constants. Returns a lower estimate of its
/// modulus.
fn power_on_complement(g: &Graph, iterations: usize, seed: u64, shift: f64, scale: f64) -> f64 {
    let n = g.n_vertices();
    let mut best: f64 = 0.0;
    for restart in 0..RESTARTS {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, restart));
        let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        deflate(&mut x);
        let nx = norm(&x);
        if nx == 0.0 {
            continue;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let mut y = vec![0.0; n];
        let mut estimate = 0.0;
        for _ in 0..iterations.max(1) {
            apply_walk(g, &x, &mut y);
            for (yi, xi) in y.iter_mut().zip(&x) {
                *yi = shift * xi + scale * *yi;
            }
            deflate(&mut y);
            let ny = norm(&y);
            let converged = (ny - estimate).abs() < LAMBDA_TOLERANCE;
            estimate = ny;
            if ny == 0.0 || converged {
                break;
            }
            for (xi, yi) in x.iter_mut().zip(&y) {
                *xi = yi / ny;
            }
        }
        best = best.max(estimate);
    }
    best
}

/// Second-largest absolute eigenvalue of the transition matrix of a
/// connected regular graph, by deflated power iteration with three random
/// restarts. Equals 1 on bipartite graphs.
pub fn estimate_lambda2(g: &Graph, iterations: usize, seed: u64) -> Result<f64> {
    require_regular(g)?;
    if g.n_vertices() == 1 {
        return Ok(0.0);
    }
    Ok(power_on_complement(g, iterations, seed, 0.0, 1.0).clamp(0.0, 1.0))
}

/// Largest nontrivial (signed) eigenvalue, via the lazy operator `(I+P)/2`.
pub fn estimate_lambda2_signed(g: &Graph, iterations: usize, seed: u64) -> Result<f64> {
    require_regular(g)?;
    if g.n_vertices() == 1 {
        return Ok(0.0);
    }
    let lazy = power_on_complement(g, iterations, seed, 0.5, 0.5);
    Ok((2.0 * lazy - 1.0).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    pub rho: f64,
    pub t_max: usize,
    pub starts: Vec<Vertex>,
    /// Minimum over starts, targets and `t <= t_max` of
    /// `exp(-(1-rho) t) - |P(X_t = v) - 1/n|`.
    pub worst_margin: f64,
    pub worst_t: usize,
    pub first_violation: Option<usize>,
    pub holds: bool,
    pub bipartite: bool,
}

/// Checks `|P_u(X_t = v) - 1/n| <= exp(-(1 - rho) t)` exactly for every
/// `t <= t_max`, target `v`, and up to `samples` evenly spaced starts `u`.
pub fn check_mixing_bound(g: &Graph, rho: f64, t_max: usize, samples: usize) -> Result<MixingReport> {
    require_regular(g)?;
    let n = g.n_vertices();
    let k = samples.clamp(1, n);
    let starts: Vec<Vertex> = (0..k).map(|i| i * n / k).collect();
    let uniform = 1.0 / n as f64;
    let mut worst = (f64::INFINITY, 0usize);
    let mut first_violation: Option<usize> = None;
    for &u in &starts {
        let mut dist = vec![0.0; n];
        dist[u] = 1.0;
        let mut next = vec![0.0; n];
        for t in 0..=t_max {
            if t > 0 {
                // regular graph: pushing a distribution equals pulling
                apply_walk(g, &dist, &mut next);
                std::mem::swap(&mut dist, &mut next);
            }
            let bound = (-(1.0 - rho) * t as f64).exp();
            let dev = dist.iter().map(|p| (p - uniform).abs()).fold(0.0, f64::max);
            let margin = bound - dev;
            if margin < worst.0 {
                worst = (margin, t);
            }
            if margin < -1e-15 && first_violation.is_none_or(|f| t < f) {
                first_violation = Some(t);
            }
        }
    }
    Ok(MixingReport {
        rho,
        t_max,
        starts,
        worst_margin: worst.0,
        worst_t: worst.1,
        first_violation,
        holds: first_violation.is_none(),
        bipartite: g.is_bipartite(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpanderReport {
    pub n: usize,
    pub d: usize,
    pub lambda2_abs: f64,
    pub lambda2: f64,
    pub connected: bool,
    pub bipartite: bool,
    pub resistance_diameter_sample: f64,
    pub resistance_pairs: usize,
}

/// Spectral and resistance summary of a regular graph. Resistances are
/// sampled over `pairs` vertex pairs drawn from `seed`.
pub fn expander_report(g: &Graph, iterations: usize, pairs: usize, seed: u64) -> Result<ExpanderReport> {
    let d = require_regular(g)?;
    let n = g.n_vertices();
    let net = Network::unit(g);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x5eed));
    let mut max_r: f64 = 0.0;
    let mut used = 0;
    for _ in 0..pairs {
        if n < 2 {
            break;
        }
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        max_r = max_r.max(effective_resistance(&net, &[a], &[b])?);
        used += 1;
    }
    Ok(ExpanderReport {
        n,
        d,
        lambda2_abs: estimate_lambda2(g, iterations, seed)?,
        lambda2: estimate_lambda2_signed(g, iterations, seed)?,
        connected: g.is_connected(),
        bipartite: g.is_bipartite(),
        resistance_diameter_sample: max_r,
        resistance_pairs: used,
    })
}
