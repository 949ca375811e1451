//! Single-walker sampling: return times, tails, visit counts and the
//! one-step law.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::substream;
use super::stats::chi_square_p_value;
use super::TrialPlan;
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex, WalkSpace};

#[inline]
pub fn step<S: WalkSpace, R: Rng>(space: &S, s: S::State, rng: &mut R) -> S::State {
    let d = space.degree(s);
    space.neighbor(s, rng.gen_range(0..d))
}

/// Outcome of a capped first-passage simulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Passage {
    Hit(usize),
    /// No hit within the cap.
    Censored,
}

impl Passage {
    pub fn time(self) -> Option<usize> {
        match self {
            Passage::Hit(t) => Some(t),
            Passage::Censored => None,
        }
    }
}

/// First `t >= 1` with `X_t` in `target`, walking from `start`.
pub fn sample_hitting_time<S: WalkSpace, R: Rng>(
    space: &S,
    start: S::State,
    target: impl Fn(S::State) -> bool,
    step_cap: usize,
    rng: &mut R,
) -> Passage {
    let mut s = start;
    for t in 1..=step_cap {
        s = step(space, s, rng);
        if target(s) {
            return Passage::Hit(t);
        }
    }
    Passage::Censored
}

/// First return to `v`, or [`Passage::Censored`] after `step_cap` steps.
pub fn sample_return_time<S: WalkSpace, R: Rng>(space: &S, v: S::State, step_cap: usize, rng: &mut R) -> Passage {
    sample_hitting_time(space, v, |s| s == v, step_cap, rng)
}

fn check_cap(plan: &TrialPlan) -> Result<()> {
    if plan.step_cap == 0 {
        return Err(Error::InvalidParameter("step_cap must be at least 1".into()));
    }
    plan.check_budget(plan.trials * plan.step_cap as u64)
}

/// Return-time counts from `plan.trials` independent walks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTail {
    pub trials: u64,
    pub step_cap: usize,
    /// `hits[t]` = number of trials returning at time `t`.
    pub hits: Vec<u64>,
    pub censored: u64,
}

impl EmpiricalTail {
    pub fn p_hat(&self, t: usize) -> f64 {
        self.hits.get(t).map_or(0.0, |&h| h as f64 / self.trials as f64)
    }

    /// Fraction of trials with `tau >= t`; defined for `t <= step_cap + 1`
    /// since censored trials are known to satisfy `tau > step_cap`.
    pub fn s_hat(&self, t: usize) -> f64 {
        assert!(t <= self.step_cap + 1, "tail beyond the cap is not identified");
        let returned_before: u64 = self.hits[..t.min(self.hits.len())].iter().sum();
        (self.trials - returned_before) as f64 / self.trials as f64
    }

    /// Binomial standard error of `s_hat(t)`.
    pub fn s_std_error(&self, t: usize) -> f64 {
        let s = self.s_hat(t);
        (s * (1.0 - s) / self.trials as f64).sqrt()
    }
}

pub fn return_time_tail(g: &Graph, v: Vertex, plan: &TrialPlan) -> Result<EmpiricalTail> {
    g.check_vertex(v)?;
    check_cap(plan)?;
    let samples: Vec<Passage> = (0..plan.trials)
        .into_par_iter()
        .map(|trial| sample_return_time(g, v, plan.step_cap, &mut substream(plan.master_seed, trial, 0)))
        .collect();
    let mut hits = vec![0u64; plan.step_cap + 1];
    let mut censored = 0;
    for s in samples {
        match s {
            Passage::Hit(t) => hits[t] += 1,
            Passage::Censored => censored += 1,
        }
    }
    Ok(EmpiricalTail { trials: plan.trials, step_cap: plan.step_cap, hits, censored })
}

/// Mean visits to each vertex during excursions from `v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreenEstimate {
    pub excursions: u64,
    pub censored: u64,
    pub mean: Vec<f64>,
    pub std_error: Vec<f64>,
}

/// Runs excursions from `v`, counting visits to every `u` at times
/// `1..=tau_v`, so the count at `v` is 1 for every completed excursion.
/// Censored excursions are dropped and reported.
pub fn empirical_green_function(g: &Graph, v: Vertex, plan: &TrialPlan) -> Result<GreenEstimate> {
    g.check_vertex(v)?;
    check_cap(plan)?;
    let n = g.n_vertices();
    let per_trial: Vec<Option<Vec<(Vertex, u32)>>> = (0..plan.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = substream(plan.master_seed, trial, 0);
            let mut visits = std::collections::BTreeMap::<Vertex, u32>::new();
            let mut s = v;
            for _ in 0..plan.step_cap {
                s = step(g, s, &mut rng);
                *visits.entry(s).or_default() += 1;
                if s == v {
                    return Some(visits.into_iter().collect());
                }
            }
            None
        })
        .collect();
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    let (mut excursions, mut censored) = (0u64, 0u64);
    for trial in per_trial {
        match trial {
            Some(visits) => {
                excursions += 1;
                for (u, c) in visits {
                    sum[u] += c as f64;
                    sum_sq[u] += (c as f64).powi(2);
                }
            }
            None => censored += 1,
        }
    }
    let k = excursions.max(1) as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / k).collect();
    let std_error = (0..n)
        .map(|u| {
            let var = if excursions > 1 { (sum_sq[u] - k * mean[u] * mean[u]) / (k - 1.0) } else { 0.0 };
            (var.max(0.0) / k).sqrt()
        })
        .collect();
    Ok(GreenEstimate { excursions, censored, mean, std_error })
}

/// Pearson p-value of `steps` simulated moves out of `u` against the
/// transition probabilities `mult(u, w) / d_u`.
pub fn one_step_chi_square(g: &Graph, u: Vertex, steps: u64, seed: u64) -> Result<f64> {
    g.check_vertex(u)?;
    let nbrs = g.neighbors(u);
    let mut targets: Vec<Vertex> = nbrs.to_vec();
    targets.dedup();
    let probs: Vec<f64> = targets
        .iter()
        .map(|w| nbrs.iter().filter(|&x| x == w).count() as f64 / nbrs.len() as f64)
        .collect();
    let mut counts = vec![0u64; targets.len()];
    let mut rng = substream(seed, u as u64, 0);
    for _ in 0..steps {
        let w = step(g, u, &mut rng);
        counts[targets.binary_search(&w).expect("step lands on a neighbor")] += 1;
    }
    if targets.len() < 2 {
        return Ok(1.0);
    }
    chi_square_p_value(&counts, &probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_halfline, IntegerLine};

    #[test]
    fn cap_one_is_censored_on_simple_graphs() {
        let g = build_halfline(10).unwrap();
        let mut rng = substream(1, 0, 0);
        for _ in 0..100 {
            assert_eq!(sample_return_time(&g, 0, 1, &mut rng), Passage::Censored);
        }
    }

    #[test]
    fn halfline_returns_at_two_half_the_time() {
        let g = build_halfline(50).unwrap();
        let tail = return_time_tail(&g, 0, &TrialPlan::new(7, 100_000, 40)).unwrap();
        let p2 = tail.p_hat(2);
        assert!((p2 - 0.5).abs() < 4.0 * (0.25f64 / 1e5).sqrt(), "{p2}");
        assert_eq!(tail.s_hat(1), 1.0);
    }

    #[test]
    fn integer_line_space() {
        let mut rng = substream(3, 0, 0);
        let t = sample_return_time(&IntegerLine, 0i64, 10_000, &mut rng);
        assert!(matches!(t, Passage::Hit(x) if x % 2 == 0) || t == Passage::Censored);
    }

    #[test]
    fn step_law() {
        let g = crate::graph::add_loops(&build_halfline(4).unwrap(), 0, 2).unwrap();
        assert!(one_step_chi_square(&g, 0, 200_000, 11).unwrap() > 0.001);
        assert!(one_step_chi_square(&g, 2, 200_000, 11).unwrap() > 0.001);
    }
}
