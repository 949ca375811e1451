//! Two walkers on the comb `Comb_0(Z, G)` over the scale windows
//! `T_i = T_{i-1} + n_i h_i^2`, plus the `Comb_0(G, Z)` control.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::substream;
use super::stats::{two_proportion_p_value, EstimateWithCI};
use super::TrialPlan;
use crate::error::{Error, Result};
use crate::graph::{build_full_construction, expander_block, Comb, ConstructionParams, Graph, IntegerLine, WalkSpace};

/// Tooth graph for the comb experiment: the multi-scale construction with
/// a half-line at least as long as the whole run, so no walker can feel the
/// truncation.
pub fn comb_tooth(params: &ConstructionParams) -> Result<Graph> {
    let total = *params.window_boundaries().last().unwrap_or(&0) as usize;
    let len = params.resolved_halfline_length().max(total + 1);
    build_full_construction(&params.clone().with_halfline_length(len))
}

/// Spread of `l(k h n) / (k h)`, the base-step count normalized by its
/// typical size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    /// Mean over trials and both walkers, indexed by `k - 1`.
    pub mean_by_k: Vec<f64>,
    pub min: f64,
    pub q05: f64,
    pub median: f64,
    pub q95: f64,
    pub max: f64,
}

impl RatioSummary {
    fn from_samples(mut all: Vec<f64>, mean_by_k: Vec<f64>) -> Self {
        if all.is_empty() {
            return Self { mean_by_k, min: 0.0, q05: 0.0, median: 0.0, q95: 0.0, max: 0.0 };
        }
        all.sort_by(f64::total_cmp);
        let q = |f: f64| all[((all.len() - 1) as f64 * f).round() as usize];
        Self { mean_by_k, min: all[0], q05: q(0.05), median: q(0.5), q95: q(0.95), max: *all.last().unwrap() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowStats {
    /// 1-based scale index.
    pub index: usize,
    pub start: u64,
    pub end: u64,
    pub height: usize,
    pub expander_size: usize,
    pub total_collisions: u64,
    pub mean_collisions: f64,
    /// Fraction of trials with at least one collision in `(start, end]`.
    pub frequency: EstimateWithCI,
    /// Fraction of trials where some checkpoint `start + k h n` had both
    /// walkers on the same tooth and inside `E_i`.
    pub checkpoint_frequency: Option<EstimateWithCI>,
    pub checkpoint_events: u64,
    pub base_step_ratio: Option<RatioSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkerSummary {
    /// Mean `|base coordinate|` at the end of the run (walker X on the main
    /// comb, the tooth height on the control).
    pub mean_abs_final_base: f64,
    /// Mean fraction of steps spent inside some expander block.
    pub mean_expander_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub comb: String,
    pub params: ConstructionParams,
    pub trials: u64,
    pub master_seed: u64,
    pub total_steps: u64,
    pub boundaries: Vec<u64>,
    pub windows: Vec<WindowStats>,
    pub total_collisions: u64,
    pub walkers: WalkerSummary,
}

impl CollisionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "comb,window,start,end,height,size,trials,collisions,mean_collisions,frequency,ci_low,ci_high,checkpoint_frequency\n",
        );
        for w in &self.windows {
            let ck = w.checkpoint_frequency.map_or("nan".to_string(), |e| format!("{:.6}", e.estimate));
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{ck}",
                self.comb,
                w.index,
                w.start,
                w.end,
                w.height,
                w.expander_size,
                self.trials,
                w.total_collisions,
                w.mean_collisions,
                w.frequency.estimate,
                w.frequency.ci_low,
                w.frequency.ci_high
            );
        }
        out
    }

    /// One-sided p-value that this comb's last-window frequency exceeds
    /// `other`'s.
    pub fn final_window_p_value(&self, other: &CollisionReport) -> f64 {
        match (self.windows.last(), other.windows.last()) {
            (Some(a), Some(b)) => two_proportion_p_value(
                (a.frequency.estimate * a.frequency.n as f64).round() as u64,
                a.frequency.n,
                (b.frequency.estimate * b.frequency.n as f64).round() as u64,
                b.frequency.n,
            ),
            _ => 1.0,
        }
    }
}

#[derive(Default)]
struct TrialWindow {
    collisions: u64,
    checkpoint_events: u32,
    ratios: Vec<f64>,
}

struct TrialOutcome {
    windows: Vec<TrialWindow>,
    abs_final_base: f64,
    expander_fraction: f64,
}

struct Layout {
    boundaries: Vec<u64>,
    /// `block[w] = i` when tooth vertex `w` is in `E_i`, else 0.
    block: Vec<u8>,
}

impl Layout {
    fn new(tooth: &Graph, params: &ConstructionParams) -> Result<Self> {
        let mut block = vec![0u8; tooth.n_vertices()];
        for i in 1..=params.heights.len() {
            let range = expander_block(tooth, i)
                .ok_or_else(|| Error::InvalidParameter(format!("tooth graph has no expander block {i}")))?;
            if range.end > block.len() || i > u8::MAX as usize {
                return Err(Error::InvalidParameter(format!("expander block {i} is out of range")));
            }
            block[range].fill(i as u8);
        }
        Ok(Self { boundaries: params.window_boundaries(), block })
    }
}

fn check_plan(tooth: &Graph, params: &ConstructionParams, plan: &TrialPlan, combs: u64) -> Result<u64> {
    params.validate()?;
    let total = *params.window_boundaries().last().unwrap();
    if tooth.truncation_radius(tooth.center().unwrap_or(0)).is_some_and(|r| (r as u64) < total) {
        return Err(Error::InvalidParameter(format!(
            "tooth half-line is shorter than the {total} step run; build it with comb_tooth"
        )));
    }
    plan.check_budget(plan.trials.saturating_mul(2 * total).saturating_mul(combs))?;
    Ok(total)
}

#[inline]
fn move_walker<B: WalkSpace, T: WalkSpace, R: Rng>(
    comb: &Comb<B, T>,
    s: &mut (B::State, T::State),
    rng: &mut R,
) -> bool
where
    B::State: Sync,
    T::State: Sync,
{
    let k = rng.gen_range(0..comb.degree(*s));
    let base = comb.is_base_move(*s, k);
    *s = comb.neighbor(*s, k);
    base
}

fn main_trial(comb: &Comb<IntegerLine, Graph>, layout: &Layout, params: &ConstructionParams, seed: u64, trial: u64) -> TrialOutcome {
    let mut rx = substream(seed, trial, 0);
    let mut ry = substream(seed, trial, 1);
    let origin = (0i64, comb.anchor);
    let (mut x, mut y) = (origin, origin);
    let mut windows = Vec::with_capacity(params.heights.len());
    let mut in_expander = 0u64;
    for (i, (&h, &n)) in params.heights.iter().zip(&params.expander_sizes).enumerate() {
        let (start, end) = (layout.boundaries[i], layout.boundaries[i + 1]);
        let spacing = (h * n) as u64;
        let mut next_checkpoint = start + spacing;
        let mut k = 1usize;
        let (mut lx, mut ly) = (0u64, 0u64);
        let mut w = TrialWindow { ratios: Vec::with_capacity(2 * h), ..Default::default() };
        for t in start + 1..=end {
            lx += move_walker(comb, &mut x, &mut rx) as u64;
            ly += move_walker(comb, &mut y, &mut ry) as u64;
            in_expander += (layout.block[x.1] != 0) as u64;
            if x == y {
                w.collisions += 1;
            }
            if t == next_checkpoint {
                let target = (i + 1) as u8;
                if x.0 == y.0 && layout.block[x.1] == target && layout.block[y.1] == target {
                    w.checkpoint_events += 1;
                }
                let kh = (k * h) as f64;
                w.ratios.push(lx as f64 / kh);
                w.ratios.push(ly as f64 / kh);
                k += 1;
                next_checkpoint += spacing;
            }
        }
        windows.push(w);
    }
    let total = *layout.boundaries.last().unwrap();
    TrialOutcome {
        windows,
        abs_final_base: x.0.unsigned_abs() as f64,
        expander_fraction: in_expander as f64 / total.max(1) as f64,
    }
}

fn control_trial(comb: &Comb<Graph, IntegerLine>, layout: &Layout, start_vertex: usize, seed: u64, trial: u64) -> TrialOutcome {
    let mut rx = substream(seed, trial, 0);
    let mut ry = substream(seed, trial, 1);
    let origin = (start_vertex, 0i64);
    let (mut x, mut y) = (origin, origin);
    let mut windows = Vec::new();
    let mut in_expander = 0u64;
    for pair in layout.boundaries.windows(2) {
        let mut w = TrialWindow::default();
        for _ in pair[0]..pair[1] {
            move_walker(comb, &mut x, &mut rx);
            move_walker(comb, &mut y, &mut ry);
            in_expander += (layout.block[x.0] != 0) as u64;
            if x == y {
                w.collisions += 1;
            }
        }
        windows.push(w);
    }
    let total = *layout.boundaries.last().unwrap();
    TrialOutcome {
        windows,
        abs_final_base: x.1.unsigned_abs() as f64,
        expander_fraction: in_expander as f64 / total.max(1) as f64,
    }
}

fn aggregate(
    comb: &str,
    params: &ConstructionParams,
    plan: &TrialPlan,
    layout: &Layout,
    outcomes: Vec<TrialOutcome>,
    with_checkpoints: bool,
) -> CollisionReport {
    let trials = outcomes.len() as u64;
    let mut windows = Vec::new();
    for (i, (&h, &n)) in params.heights.iter().zip(&params.expander_sizes).enumerate() {
        let total_collisions: u64 = outcomes.iter().map(|o| o.windows[i].collisions).sum();
        let hit = outcomes.iter().filter(|o| o.windows[i].collisions > 0).count() as u64;
        let (checkpoint_frequency, checkpoint_events, base_step_ratio) = if with_checkpoints {
            let events: u64 = outcomes.iter().map(|o| o.windows[i].checkpoint_events as u64).sum();
            let any = outcomes.iter().filter(|o| o.windows[i].checkpoint_events > 0).count() as u64;
            let mut sums = vec![0.0; h];
            let mut all = Vec::with_capacity(outcomes.len() * 2 * h);
            for o in &outcomes {
                for (j, r) in o.windows[i].ratios.iter().enumerate() {
                    sums[j / 2] += r;
                    all.push(*r);
                }
            }
            let denom = (2 * outcomes.len()).max(1) as f64;
            let mean_by_k = sums.iter().map(|s| s / denom).collect();
            (Some(EstimateWithCI::proportion(any, trials)), events, Some(RatioSummary::from_samples(all, mean_by_k)))
        } else {
            (None, 0, None)
        };
        windows.push(WindowStats {
            index: i + 1,
            start: layout.boundaries[i],
            end: layout.boundaries[i + 1],
            height: h,
            expander_size: n,
            total_collisions,
            mean_collisions: if trials > 0 { total_collisions as f64 / trials as f64 } else { 0.0 },
            frequency: EstimateWithCI::proportion(hit, trials),
            checkpoint_frequency,
            checkpoint_events,
            base_step_ratio,
        });
    }
    let mean = |f: fn(&TrialOutcome) -> f64| {
        if trials == 0 {
            0.0
        } else {
            outcomes.iter().map(f).sum::<f64>() / trials as f64
        }
    };
    CollisionReport {
        comb: comb.to_string(),
        params: params.clone(),
        trials,
        master_seed: plan.master_seed,
        total_steps: *layout.boundaries.last().unwrap(),
        boundaries: layout.boundaries.clone(),
        total_collisions: windows.iter().map(|w| w.total_collisions).sum(),
        windows,
        walkers: WalkerSummary {
            mean_abs_final_base: mean(|o| o.abs_final_base),
            mean_expander_fraction: mean(|o| o.expander_fraction),
        },
    }
}

/// Two independent walkers from the origin of `Comb_0(Z, tooth)` for the
/// full step budget `sum n_i h_i^2`. `tooth` must come from [`comb_tooth`]
/// (or be at least as long).
pub fn comb_collision_experiment(tooth: &Graph, params: &ConstructionParams, plan: &TrialPlan) -> Result<CollisionReport> {
    check_plan(tooth, params, plan, 1)?;
    let layout = Layout::new(tooth, params)?;
    let anchor = tooth.center().unwrap_or(0);
    let comb = Comb::new(&IntegerLine, tooth, anchor);
    let outcomes: Vec<TrialOutcome> = (0..plan.trials)
        .into_par_iter()
        .map(|trial| main_trial(&comb, &layout, params, plan.master_seed, trial))
        .collect();
    Ok(aggregate("comb(Z,G)", params, plan, &layout, outcomes, true))
}

/// The same run on `Comb_0(G, Z)`: base `G`, a copy of `Z` at every vertex.
pub fn comb_control_experiment(base: &Graph, params: &ConstructionParams, plan: &TrialPlan) -> Result<CollisionReport> {
    check_plan(base, params, plan, 1)?;
    let layout = Layout::new(base, params)?;
    let comb = Comb::new(base, &IntegerLine, 0i64);
    let start = base.center().unwrap_or(0);
    let outcomes: Vec<TrialOutcome> = (0..plan.trials)
        .into_par_iter()
        .map(|trial| control_trial(&comb, &layout, start, plan.master_seed, trial))
        .collect();
    Ok(aggregate("comb(G,Z)", params, plan, &layout, outcomes, false))
}
