//! Graph spec strings such as `halfline:64` or `gt:2000:0.1:3`.

use std::path::PathBuf;
use std::str::FromStr;

use walklab::expander::random_regular;
use walklab::graph::edgelist::read_edge_list;
use walklab::graph::{
    build_full_construction, build_gt, build_halfline, build_segment, build_star_halfline, complete_graph,
    cycle_graph, path_graph, torus_2d, ConstructionParams,
};
use walklab::{Error, Graph, Result};

pub const SPEC_HELP: &str = "halfline:L | segment:R | star:L:P | gt:T:DELTA:D | full:H1,H2,..:N1,N2,..[:D] | \
expander:N:D | torus:W:H | path:N | cycle:N | complete:N | file:PATH";

#[derive(Clone, Debug, PartialEq)]
pub enum GraphSpec {
    Halfline(usize),
    Segment(usize),
    Star { length: usize, pendants: usize },
    Gt { t: usize, delta: f64, degree: usize },
    Full { heights: Vec<usize>, sizes: Vec<usize>, degree: usize },
    Expander { n: usize, d: usize },
    Torus(usize, usize),
    Path(usize),
    Cycle(usize),
    Complete(usize),
    File(PathBuf),
}

fn bad(spec: &str, why: impl std::fmt::Display) -> Error {
    Error::InvalidParameter(format!("graph spec '{spec}': {why} (expected {SPEC_HELP})"))
}

fn num<T: FromStr>(spec: &str, field: &str) -> Result<T> {
    field.parse().map_err(|_| bad(spec, format!("'{field}' is not a valid number")))
}

fn list(spec: &str, field: &str) -> Result<Vec<usize>> {
    field.split(',').map(|x| num(spec, x)).collect()
}

impl FromStr for GraphSpec {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let (kind, rest) = spec.split_once(':').ok_or_else(|| bad(spec, "missing parameters"))?;
        if kind == "file" {
            return Ok(GraphSpec::File(PathBuf::from(rest)));
        }
        let f: Vec<&str> = rest.split(':').collect();
        let arity = |k: usize| if f.len() == k { Ok(()) } else { Err(bad(spec, format!("{kind} takes {k} parameter(s)"))) };
        Ok(match kind {
            "halfline" => {
                arity(1)?;
                GraphSpec::Halfline(num(spec, f[0])?)
            }
            "segment" => {
                arity(1)?;
                GraphSpec::Segment(num(spec, f[0])?)
            }
            "star" => {
                arity(2)?;
                GraphSpec::Star { length: num(spec, f[0])?, pendants: num(spec, f[1])? }
            }
            "gt" => {
                arity(3)?;
                GraphSpec::Gt { t: num(spec, f[0])?, delta: num(spec, f[1])?, degree: num(spec, f[2])? }
            }
            "full" => {
                if f.len() != 2 && f.len() != 3 {
                    return Err(bad(spec, "full takes heights, sizes and an optional degree"));
                }
                let degree = if f.len() == 3 { num(spec, f[2])? } else { 3 };
                GraphSpec::Full { heights: list(spec, f[0])?, sizes: list(spec, f[1])?, degree }
            }
            "expander" => {
                arity(2)?;
                GraphSpec::Expander { n: num(spec, f[0])?, d: num(spec, f[1])? }
            }
            "torus" => {
                arity(2)?;
                GraphSpec::Torus(num(spec, f[0])?, num(spec, f[1])?)
            }
            "path" => {
                arity(1)?;
                GraphSpec::Path(num(spec, f[0])?)
            }
            "cycle" => {
                arity(1)?;
                GraphSpec::Cycle(num(spec, f[0])?)
            }
            "complete" => {
                arity(1)?;
                GraphSpec::Complete(num(spec, f[0])?)
            }
            _ => return Err(bad(spec, format!("unknown graph kind '{kind}'"))),
        })
    }
}

impl GraphSpec {
    pub fn construction_params(&self, seed: u64) -> Option<ConstructionParams> {
        match self {
            GraphSpec::Full { heights, sizes, degree } => {
                let mut p = ConstructionParams::new(heights.clone(), sizes.clone(), seed);
                p.expander_degree = *degree;
                Some(p)
            }
            _ => None,
        }
    }

    pub fn build(&self, seed: u64) -> Result<Graph> {
        self.build_for_horizon(seed, 0)
    }

    /// Builds the graph, lengthening half-lines where the spec allows it so
    /// that return times from the center are exact up to `horizon`.
    pub fn build_for_horizon(&self, seed: u64, horizon: usize) -> Result<Graph> {
        match self {
            GraphSpec::Halfline(l) => build_halfline(*l),
            GraphSpec::Segment(r) => build_segment(*r),
            GraphSpec::Star { length, pendants } => build_star_halfline(*length, *pendants),
            GraphSpec::Gt { t, delta, degree } => build_gt(*t, *delta, *degree, seed),
            GraphSpec::Full { .. } => {
                let p = self.construction_params(seed).expect("full spec");
                let len = p.resolved_halfline_length().max(horizon);
                build_full_construction(&p.with_halfline_length(len))
            }
            GraphSpec::Expander { n, d } => random_regular(*n, *d, seed),
            GraphSpec::Torus(w, h) => torus_2d(*w, *h),
            GraphSpec::Path(n) => path_graph(*n),
            GraphSpec::Cycle(n) => cycle_graph(*n),
            GraphSpec::Complete(n) => complete_graph(*n),
            GraphSpec::File(path) => read_edge_list(path),
        }
    }
}
