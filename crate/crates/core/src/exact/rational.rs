//! Exact rational versions of the killed-walk iterations for small graphs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};

pub const RATIONAL_MAX_VERTICES: usize = 12;

fn check_size(g: &Graph) -> Result<()> {
    if g.n_vertices() > RATIONAL_MAX_VERTICES {
        return Err(Error::ResourceLimit { requested: g.n_vertices() as u64, limit: RATIONAL_MAX_VERTICES as u64 });
    }
    Ok(())
}

fn push(g: &Graph, v: Vertex, mass: &[BigRational]) -> (Vec<BigRational>, BigRational) {
    let mut out = vec![BigRational::zero(); mass.len()];
    for (u, m) in mass.iter().enumerate() {
        if u == v || m.is_zero() {
            continue;
        }
        let share = m / BigRational::from_integer(BigInt::from(g.degree(u)));
        for &w in g.neighbors(u) {
            out[w] += &share;
        }
    }
    let absorbed = std::mem::replace(&mut out[v], BigRational::zero());
    (out, absorbed)
}

fn iterate(g: &Graph, v: Vertex, mut mass: Vec<BigRational>, horizon: usize) -> Vec<BigRational> {
    let mut p = vec![BigRational::zero(); horizon + 1];
    for slot in p.iter_mut().skip(1) {
        let (next, absorbed) = push(g, v, &mass);
        *slot = absorbed;
        mass = next;
    }
    p
}

/// `P_v(tau_v = t)` for `t <= horizon` as exact fractions.
pub fn return_time_distribution_rational(g: &Graph, v: Vertex, horizon: usize) -> Result<Vec<BigRational>> {
    check_size(g)?;
    g.check_vertex(v)?;
    // A point mass at v pushed once, where v is not yet absorbing.
    let mut mass = vec![BigRational::zero(); g.n_vertices()];
    mass[v] = BigRational::from_integer(1.into());
    let share = BigRational::new(1.into(), BigInt::from(g.degree(v)));
    let mut first = vec![BigRational::zero(); g.n_vertices()];
    let mut p1 = BigRational::zero();
    for &w in g.neighbors(v) {
        if w == v {
            p1 += &share;
        } else {
            first[w] += &share;
        }
    }
    if horizon == 0 {
        return Ok(vec![BigRational::zero()]);
    }
    let mut p = vec![BigRational::zero(), p1];
    p.extend(iterate(g, v, first, horizon - 1).into_iter().skip(1));
    Ok(p)
}

/// `P_start(tau_target = t)` for `t <= horizon` as exact fractions.
pub fn hitting_time_distribution_rational(
    g: &Graph,
    start: Vertex,
    target: Vertex,
    horizon: usize,
) -> Result<Vec<BigRational>> {
    check_size(g)?;
    g.check_vertex(start)?;
    g.check_vertex(target)?;
    if start == target {
        return return_time_distribution_rational(g, start, horizon);
    }
    let mut mass = vec![BigRational::zero(); g.n_vertices()];
    mass[start] = BigRational::from_integer(1.into());
    Ok(iterate(g, target, mass, horizon))
}

/// `P_v(tau_v = t)` from the unkilled walk: the return probabilities
/// `r_t = P^t(v, v)` determine the first-return law through the renewal
/// equation `r_t = sum_{k=1}^t f_k r_{t-k}`. Shares no code with the
/// killed iteration, so the two serve as cross-checks.
pub fn renewal_return_distribution_rational(g: &Graph, v: Vertex, horizon: usize) -> Result<Vec<BigRational>> {
    check_size(g)?;
    g.check_vertex(v)?;
    let n = g.n_vertices();
    let mut r = vec![BigRational::from_integer(1.into())];
    let mut mass = vec![BigRational::zero(); n];
    mass[v] = BigRational::from_integer(1.into());
    for _ in 1..=horizon {
        let mut next = vec![BigRational::zero(); n];
        for (u, m) in mass.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            let share = m / BigRational::from_integer(BigInt::from(g.degree(u)));
            for &w in g.neighbors(u) {
                next[w] += &share;
            }
        }
        r.push(next[v].clone());
        mass = next;
    }
    let mut f = vec![BigRational::zero(); horizon + 1];
    for t in 1..=horizon {
        let mut x = r[t].clone();
        for k in 1..t {
            x -= &f[k] * &r[t - k];
        }
        f[t] = x;
    }
    Ok(f)
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

struct Enumeration<'a> {
    g: &'a Graph,
    v: Vertex,
    horizon: usize,
    /// `scale[u] = L / d_u` for the common multiple `L` of all degrees.
    scale: Vec<u128>,
    acc: Vec<u128>,
}

impl Enumeration<'_> {
    fn walk(&mut self, u: Vertex, depth: usize, weight: u128) {
        let w = weight * self.scale[u];
        for k in 0..self.g.degree(u) {
            let next = self.g.neighbors(u)[k];
            if next == self.v {
                self.acc[depth + 1] += w;
            } else if depth + 1 < self.horizon {
                self.walk(next, depth + 1, w);
            }
        }
    }
}

/// `P_v(tau_v = t)` by listing every walk of length at most `horizon` that
/// starts at `v` and avoids it until the last step. A walk of length `t`
/// has weight `prod 1/d_{u_i}`, which is accumulated as an integer over
/// `L^t`. Exponential in `horizon`; meant as an oracle for tiny graphs.
pub fn enumerate_return_distribution(g: &Graph, v: Vertex, horizon: usize) -> Result<Vec<BigRational>> {
    check_size(g)?;
    g.check_vertex(v)?;
    let l = (0..g.n_vertices()).map(|u| g.degree(u) as u128).fold(1u128, |a, d| a / gcd(a, d) * d);
    if (l as f64).powi(horizon as i32) >= u128::MAX as f64 / 2.0 {
        return Err(Error::InvalidParameter(format!("horizon {horizon} overflows exact walk weights")));
    }
    let scale = (0..g.n_vertices()).map(|u| l / g.degree(u) as u128).collect();
    let mut e = Enumeration { g, v, horizon, scale, acc: vec![0; horizon + 1] };
    if horizon > 0 {
        e.walk(v, 0, 1);
    }
    let mut denom = BigInt::from(1);
    let mut out = vec![BigRational::zero()];
    for t in 1..=horizon {
        denom *= BigInt::from(l);
        out.push(BigRational::new(BigInt::from(e.acc[t]), denom.clone()));
    }
    Ok(out)
}
