//! Identities and inequalities that exact return-time tables satisfy.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::{return_time_distribution, KilledOperator, ReturnTimeTable};
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};

/// Lower bound on `d_v sqrt(t) P_v(tau_v >= t)`.
pub const TAIL_CONSTANT: f64 = 0.25;
/// Bound on `t * hazard / log(d_v t)`; equals `e^10`.
pub const HAZARD_CONSTANT: f64 = 22_026.465_794_806_718;
/// Bound on `t * hazard / log t` once `t >= e^10 / d_v`.
pub const LARGE_T_CONSTANT: f64 = 24.0;
/// A Hankel matrix counts as PSD when its least eigenvalue is at least
/// `-HANKEL_TOLERANCE`.
pub const HANKEL_TOLERANCE: f64 = 1e-10;
const MONOTONE_TOLERANCE: f64 = 1e-14;

/// `profiles[k][u] = P_u(tau_v = k)` for `k <= kmax`, `u != v`, computed
/// as `Q^{k-1} h` with `h(u) = P_u(X_1 = v)` in the function form of the
/// killed operator. Row 0 is zero; entries at `v` are zero.
pub fn first_passage_profiles(g: &Graph, v: Vertex, kmax: usize) -> Result<Vec<Vec<f64>>> {
    let op = KilledOperator::new(g, v)?;
    let n = g.n_vertices();
    let mut rows = vec![vec![0.0; n]];
    if kmax == 0 {
        return Ok(rows);
    }
    let h: Vec<f64> = (0..n)
        .map(|u| {
            if u == v {
                0.0
            } else {
                g.neighbors(u).iter().filter(|&&w| w == v).count() as f64 / g.degree(u) as f64
            }
        })
        .collect();
    rows.push(h);
    for k in 2..=kmax {
        let mut next = vec![0.0; n];
        op.apply(&rows[k - 1], &mut next);
        rows.push(next);
    }
    Ok(rows)
}

fn split_sum(g: &Graph, v: Vertex, profiles: &[Vec<f64>], t: usize) -> f64 {
    let (a, b) = (t.div_ceil(2), t / 2);
    let s: f64 = (0..g.n_vertices())
        .filter(|&u| u != v)
        .map(|u| g.degree(u) as f64 * profiles[a][u] * profiles[b][u])
        .sum();
    s / g.degree(v) as f64
}

/// `|P_v(tau = t) - (1/d_v) sum_{u != v} d_u P_u(tau_v = ceil(t/2)) P_u(tau_v = floor(t/2))|`.
pub fn reversibility_residual(g: &Graph, v: Vertex, t: usize) -> Result<f64> {
    if t < 2 {
        return Err(Error::InvalidParameter("reversibility identity needs t >= 2".into()));
    }
    let table = return_time_distribution(g, v, t)?;
    let profiles = first_passage_profiles(g, v, t.div_ceil(2))?;
    Ok((table.p[t] - split_sum(g, v, &profiles, t)).abs())
}

/// Residuals for every `2 <= t <= horizon`; index 0 and 1 are zero.
pub fn reversibility_residuals(g: &Graph, v: Vertex, horizon: usize) -> Result<Vec<f64>> {
    if horizon < 2 {
        return Err(Error::InvalidParameter("reversibility identity needs t >= 2".into()));
    }
    let table = return_time_distribution(g, v, horizon)?;
    let profiles = first_passage_profiles(g, v, horizon.div_ceil(2))?;
    let mut out = vec![0.0; horizon + 1];
    for (t, r) in out.iter_mut().enumerate().skip(2) {
        *r = (table.p[t] - split_sum(g, v, &profiles, t)).abs();
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub holds: bool,
    /// Smallest even `t` with `p[t] < p[t+2]`.
    pub first_violation: Option<usize>,
}

/// `p[2t] >= p[2t+2]` for every pair inside the horizon.
pub fn even_monotonicity_check(table: &ReturnTimeTable) -> MonotonicityReport {
    let first_violation = (1..)
        .map(|k| 2 * k)
        .take_while(|&t| t + 2 <= table.horizon)
        .find(|&t| table.p[t] + MONOTONE_TOLERANCE < table.p[t + 2]);
    MonotonicityReport { holds: first_violation.is_none(), first_violation }
}

/// `m[k] = P_v(tau_v = k + 2)`, the moments of the spectral measure of the
/// killed walk at `v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentSequence {
    pub m: Vec<f64>,
}

impl MomentSequence {
    pub fn from_table(table: &ReturnTimeTable) -> Self {
        Self { m: table.p.iter().skip(2).copied().collect() }
    }

    pub fn len(&self) -> usize {
        self.m.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    /// Total mass of the measure.
    pub fn mass(&self) -> f64 {
        self.m.first().copied().unwrap_or(0.0)
    }
}

fn min_eigenvalue(h: DMatrix<f64>) -> f64 {
    SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Least eigenvalue of `H[i][j] = m[i+j]`, `0 <= i, j < order`.
pub fn hankel_psd_check(m: &MomentSequence, order: usize) -> Result<f64> {
    if order == 0 || 2 * order > m.len() {
        return Err(Error::InvalidParameter(format!(
            "Hankel order {order} needs at least {} moments, have {}",
            2 * order.max(1),
            m.len()
        )));
    }
    Ok(min_eigenvalue(DMatrix::from_fn(order, order, |i, j| m.m[i + j])))
}

/// Least eigenvalue of `H[i][j] = m[i+j] - m[i+j+2]`, the Hankel matrix of
/// `(1 - x^2) dmu`.
pub fn shifted_hankel_psd_check(m: &MomentSequence, order: usize) -> Result<f64> {
    if order == 0 || 2 * order + 1 > m.len() {
        return Err(Error::InvalidParameter(format!(
            "shifted Hankel order {order} needs at least {} moments, have {}",
            2 * order.max(1) + 1,
            m.len()
        )));
    }
    Ok(min_eigenvalue(DMatrix::from_fn(order, order, |i, j| m.m[i + j] - m.m[i + j + 2])))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailMargin {
    /// `min_t d_v sqrt(t) s[t]`.
    pub margin: f64,
    pub argmin: usize,
    pub holds: bool,
}

/// Minimum of `d_v sqrt(t) P_v(tau_v >= t)` over `1 <= t <= horizon`.
pub fn theorem1_margin(table: &ReturnTimeTable, d_v: usize) -> TailMargin {
    let (argmin, margin) = (1..=table.horizon)
        .map(|t| (t, d_v as f64 * (t as f64).sqrt() * table.s[t]))
        .fold((1, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
    TailMargin { margin, argmin, holds: margin >= TAIL_CONSTANT }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HazardProfile {
    /// `t * hazard[t] / log(d_v t)`; `None` where the hazard is undefined or
    /// `d_v t <= 1`.
    pub normalized: Vec<Option<f64>>,
    /// `t * hazard[t] / log t`, defined for `t >= 2`.
    pub plain: Vec<Option<f64>>,
    pub max_normalized: f64,
    pub argmax: usize,
    pub holds: bool,
    /// First `t` at which the large-`t` bound applies, if inside the horizon.
    pub large_t_start: Option<usize>,
    /// Whether every `plain` entry from `large_t_start` on is at most 24.
    /// Recorded for reporting; `true` when no such `t` exists.
    pub large_t_holds: bool,
}

pub fn theorem2_hazard_profile(table: &ReturnTimeTable, d_v: usize) -> HazardProfile {
    let horizon = table.horizon;
    let mut normalized = vec![None; horizon + 1];
    let mut plain = vec![None; horizon + 1];
    let (mut max_normalized, mut argmax) = (0.0f64, 0);
    for t in 1..=horizon {
        let Some(h) = table.hazard[t] else { continue };
        let tf = t as f64;
        let log_dt = (d_v as f64 * tf).ln();
        if log_dt > 0.0 {
            let x = tf * h / log_dt;
            normalized[t] = Some(x);
            if x > max_normalized {
                max_normalized = x;
                argmax = t;
            }
        }
        if t >= 2 {
            plain[t] = Some(tf * h / tf.ln());
        }
    }
    let threshold = (HAZARD_CONSTANT / d_v as f64).ceil().max(2.0) as usize;
    let large_t_start = (threshold <= horizon).then_some(threshold);
    let large_t_holds = large_t_start.is_none_or(|s| {
        plain[s..].iter().flatten().all(|&x| x <= LARGE_T_CONSTANT)
    });
    HazardProfile {
        normalized,
        plain,
        max_normalized,
        argmax,
        holds: max_normalized <= HAZARD_CONSTANT,
        large_t_start,
        large_t_holds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_halfline, build_segment, complete_graph, cycle_graph, path_graph};

    #[test]
    fn reversibility_examples() {
        let z = build_segment(10).unwrap();
        assert!(reversibility_residual(&z, 10, 4).unwrap() < 1e-12);
        let k4 = complete_graph(4).unwrap();
        assert!(reversibility_residual(&k4, 0, 2).unwrap() < 1e-15);
        for g in [cycle_graph(7).unwrap(), path_graph(5).unwrap(), k4] {
            for v in 0..g.n_vertices() {
                let r = reversibility_residuals(&g, v, 30).unwrap();
                assert!(r.iter().all(|&x| x < 1e-12), "{}: {r:?}", g.name());
            }
        }
        assert!(reversibility_residual(&z, 10, 1).is_err());
    }

    #[test]
    fn monotone_and_hankel_on_line() {
        let t = return_time_distribution(&build_segment(10).unwrap(), 10, 10).unwrap();
        assert!(even_monotonicity_check(&t).holds);
        let m = t.moments();
        assert_eq!(m.mass(), 0.5);
        assert!((hankel_psd_check(&m, 2).unwrap() - 0.125).abs() < 1e-15);
        assert_eq!(hankel_psd_check(&m, 1).unwrap(), 0.5);
        assert!(shifted_hankel_psd_check(&m, 2).unwrap() >= -HANKEL_TOLERANCE);
        assert!(hankel_psd_check(&m, 5).is_err());
    }

    #[test]
    fn monotonicity_flags_violation() {
        let mut t = return_time_distribution(&build_segment(10).unwrap(), 10, 10).unwrap();
        t.p[6] = 0.2;
        assert_eq!(even_monotonicity_check(&t).first_violation, Some(4));
    }

    #[test]
    fn tail_margins() {
        let t = return_time_distribution(&build_segment(10).unwrap(), 10, 4).unwrap();
        let m = theorem1_margin(&t, 2);
        assert!(m.holds);
        assert!((2.0 * 2.0 * t.s[4] - 2.0).abs() < 1e-15);
        let h = return_time_distribution(&build_halfline(10).unwrap(), 0, 2).unwrap();
        assert!((theorem1_margin(&h, 1).margin - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hazard_profile_on_line() {
        let t = return_time_distribution(&build_segment(10).unwrap(), 10, 6).unwrap();
        let prof = theorem2_hazard_profile(&t, 2);
        assert!((prof.normalized[4].unwrap() - 1.0 / 8f64.ln()).abs() < 1e-14);
        assert_eq!(prof.normalized[3], Some(0.0));
        assert!(prof.holds && prof.large_t_holds && prof.large_t_start.is_none());
    }
}
