use serde::Serialize;
use serde_json::{json, Value};

use walklab::electrical::{commute_identity_residual, solve_potential, Network};
use walklab::exact::{
    even_monotonicity_check, green_function, hankel_psd_check, renewal_return_distribution_rational,
    return_time_distribution, return_time_distribution_rational, reversibility_residuals,
    shifted_hankel_psd_check, theorem1_margin, theorem2_hazard_profile, HazardProfile, ReturnTimeTable,
    HANKEL_TOLERANCE, RATIONAL_MAX_VERTICES,
};
use walklab::expander::{check_mixing_bound, expander_report, random_regular};
use walklab::graph::edgelist::to_edge_list;
use walklab::graph::{build_halfline, with_pendant, ConstructionParams, Vertex};
use walklab::montecarlo::{
    collision_inside_expander, comb_collision_experiment, comb_control_experiment, comb_tooth, escape_experiment,
    expander_window_experiment, rng::derive_seed, TrialPlan,
};
use walklab::{Graph, Result};

use crate::cli::{
    CollideArgs, ConstructArgs, DistArgs, EscapeArgs, ExpanderArgs, Preset, ResistanceArgs, SharpnessArgs,
    VerifyArgs,
};
use crate::graphspec::GraphSpec;

pub const REVERSIBILITY_TOLERANCE: f64 = 1e-10;
pub const GREEN_TOLERANCE: f64 = 1e-10;
pub const COMMUTE_TOLERANCE: f64 = 1e-9;
pub const LIPSCHITZ_TOLERANCE: f64 = 1e-10;
pub const CONSERVATION_TOLERANCE: f64 = 1e-9;
const HANKEL_MAX_ORDER: usize = 5;

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

/// Result of one subcommand: the JSON report body, CSV companions keyed by
/// file name, and the checks that decide the exit status.
pub struct Outcome {
    pub report: Value,
    pub files: Vec<(String, String)>,
    pub checks: Vec<Check>,
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

/// The tail and hazard bounds concern infinite graphs; a graph stands in
/// for one when it records where it was truncated.
fn models_infinite(g: &Graph) -> bool {
    !g.truncation_boundary().is_empty()
}

fn default_vertex(g: &Graph, v: Option<Vertex>) -> Vertex {
    v.or(g.center()).unwrap_or(0)
}

fn hazard_summary(h: &HazardProfile) -> Value {
    json!({
        "max_normalized": h.max_normalized,
        "argmax": h.argmax,
        "holds": h.holds,
        "large_t_start": h.large_t_start,
        "large_t_holds": h.large_t_holds,
    })
}

pub fn dist(a: &DistArgs, seed: u64) -> Result<Outcome> {
    let spec: GraphSpec = a.graph.parse()?;
    let g = spec.build_for_horizon(seed, a.horizon)?;
    let v = default_vertex(&g, a.v);
    g.check_vertex(v)?;
    let table = return_time_distribution(&g, v, a.horizon)?;
    let d_v = g.degree(v);
    let t1 = theorem1_margin(&table, d_v);
    let t2 = theorem2_hazard_profile(&table, d_v);
    let mut checks = vec![Check::new("exact", table.exact, format!("truncation radius {:?}", g.truncation_radius(v)))];
    if models_infinite(&g) {
        checks.push(Check::new(
            "tail_lower_bound",
            t1.holds,
            format!("min d_v sqrt(t) P(tau>=t) = {:.6} at t={}", t1.margin, t1.argmin),
        ));
        checks.push(Check::new(
            "hazard_upper_bound",
            t2.holds,
            format!("max t h(t)/log(d_v t) = {:.6} at t={}", t2.max_normalized, t2.argmax),
        ));
    }
    let report = json!({
        "graph": g.name(),
        "n_vertices": g.n_vertices(),
        "v": v,
        "degree": d_v,
        "horizon": a.horizon,
        "exact": table.exact,
        "models_infinite_graph": models_infinite(&g),
        "tail_margin": to_value(&t1),
        "hazard": hazard_summary(&t2),
        "table": to_value(&table),
    });
    Ok(Outcome { report, files: vec![("dist.csv".into(), table.to_csv())], checks })
}

pub fn resistance(a: &ResistanceArgs, seed: u64) -> Result<Outcome> {
    let g = GraphSpec::build(&a.graph.parse()?, seed)?;
    let net = Network::unit(&g);
    let p = solve_potential(&net, &a.source, &a.sink)?;
    let flow = p.flow(&net);
    let conservation = flow.conservation_error(g.n_vertices());
    let harmonic = p.harmonic_residual(&net);
    let lipschitz = p.lipschitz_margin(&g);
    let mut checks = vec![
        Check::new("conservation", conservation <= CONSERVATION_TOLERANCE, format!("{conservation:.3e}")),
        Check::new("harmonic", harmonic <= CONSERVATION_TOLERANCE, format!("{harmonic:.3e}")),
        Check::new("lipschitz", lipschitz <= 1.0 + LIPSCHITZ_TOLERANCE, format!("{lipschitz:.12}")),
    ];
    let mut commute = None;
    if a.source.len() == 1 && a.sink.len() == 1 {
        let r = commute_identity_residual(&net, a.source[0], a.sink[0])?;
        let rel = r / (net.total_weight() * p.resistance);
        checks.push(Check::new("commute_identity", rel <= COMMUTE_TOLERANCE, format!("relative residual {rel:.3e}")));
        commute = Some(r);
    }
    let report = json!({
        "graph": g.name(),
        "sources": a.source,
        "sinks": a.sink,
        "resistance": p.resistance,
        "source_strength": flow.source_strength(),
        "conservation_error": conservation,
        "antisymmetry_error": flow.antisymmetry_error(),
        "harmonic_residual": harmonic,
        "lipschitz_margin": lipschitz,
        "commute_residual": commute,
    });
    Ok(Outcome {
        report,
        files: vec![("potential.csv".into(), p.to_csv()), ("flow.csv".into(), flow.to_csv())],
        checks,
    })
}

pub fn expander(a: &ExpanderArgs, seed: u64) -> Result<Outcome> {
    let g = random_regular(a.n, a.d, seed)?;
    let rep = expander_report(&g, a.iterations, a.pairs, derive_seed(seed, 1))?;
    let mut checks = vec![
        Check::new("connected", rep.connected, ""),
        Check::new("spectral_gap", rep.lambda2_abs < 1.0 - 1e-6, format!("lambda2_abs = {:.6}", rep.lambda2_abs)),
    ];
    let mixing = match a.rho {
        Some(rho) => {
            let m = check_mixing_bound(&g, rho, a.t_max, 16)?;
            checks.push(Check::new("mixing", m.holds, format!("worst margin {:.3e} at t={}", m.worst_margin, m.worst_t)));
            Some(m)
        }
        None => None,
    };
    let (decorated, v_prime) = with_pendant(&g, 0)?;
    let step = (a.n / a.starts.max(1)).max(1);
    let starts: Vec<Vertex> = (0..a.n).step_by(step).take(a.starts.max(1)).collect();
    let plan = TrialPlan::new(derive_seed(seed, 2), a.trials, a.n);
    let window = expander_window_experiment(&decorated, v_prime, &starts, a.c_log, &plan)?;
    checks.push(Check::new("window_delta", window.delta > 0.0, format!("delta = {}", window.delta)));
    checks.push(Check::new(
        "window_mass",
        window.min_scaled_mass > 0.0,
        format!("min n P(tau=t) = {:.4e} over [{}, {}]", window.min_scaled_mass, window.window_start, window.window_end),
    ));
    let (u1, u2) = (starts[0], starts[starts.len() / 2]);
    let inside = collision_inside_expander(&decorated, v_prime, u1, u2, &TrialPlan::new(derive_seed(seed, 3), a.trials, a.n))?;
    if !inside.parity_obstructed && a.trials > 0 {
        checks.push(Check::new(
            "inside_collision",
            inside.estimate.excludes_zero(),
            format!("estimate {:.4} [{:.4}, {:.4}]", inside.estimate.estimate, inside.estimate.ci_low, inside.estimate.ci_high),
        ));
    }
    let report = json!({
        "spectrum": to_value(&rep),
        "mixing": mixing.map(|m| to_value(&m)),
        "window": to_value(&window),
        "inside_collision": to_value(&inside),
    });
    Ok(Outcome { report, files: vec![], checks })
}

pub fn escape(a: &EscapeArgs, seed: u64) -> Result<Outcome> {
    let g = GraphSpec::build(&a.graph.parse()?, seed)?;
    let r = escape_experiment(&g, a.x, a.y, a.epsilon, &TrialPlan::new(seed, a.trials, 1))?;
    let checks = vec![Check::new(
        "escape_bound",
        r.holds,
        format!("ci_low {:.5} vs epsilon {}", r.estimate.ci_low, a.epsilon),
    )];
    let csv = format!(
        "graph,x,y,epsilon,resistance,cap,estimate,ci_low,ci_high,exact\n{},{},{},{},{:.12},{},{:.6},{:.6},{:.6},{}\n",
        g.name(),
        r.x,
        r.y,
        r.epsilon,
        r.resistance,
        r.cap,
        r.estimate.estimate,
        r.estimate.ci_low,
        r.estimate.ci_high,
        r.exact.map_or("nan".to_string(), |e| format!("{e:.6}"))
    );
    let mut report = to_value(&r);
    report["graph"] = json!(g.name());
    Ok(Outcome { report, files: vec![("escape.csv".into(), csv)], checks })
}

/// Hazard of the return time at `t` on both graphs, compared.
#[derive(Clone, Debug, Serialize)]
pub struct SharpnessRow {
    pub target: usize,
    pub hazard_construction: f64,
    pub hazard_halfline: f64,
    pub ratio: f64,
    /// `t * hazard` on the half-line, bounded for the classical walk.
    pub halfline_scaled: f64,
    /// `t * hazard / ln t` on the construction.
    pub construction_log_scaled: f64,
}

fn hazard_at(table: &ReturnTimeTable, t: usize) -> f64 {
    table.hazard[t].unwrap_or(0.0)
}

pub fn sharpness(a: &SharpnessArgs, seed: u64) -> Result<Outcome> {
    let spec: GraphSpec = a.graph.parse()?;
    let mut targets = a.target.clone();
    if targets.is_empty() {
        targets = match &spec {
            GraphSpec::Gt { t, .. } => vec![*t],
            GraphSpec::Full { heights, sizes, .. } => heights
                .iter()
                .zip(sizes)
                .map(|(&h, &n)| (a.c * h as f64 * n as f64 * (n as f64).ln()).ceil() as usize)
                .collect(),
            _ => {
                return Err(walklab::Error::InvalidParameter(
                    "sharpness needs --target for graphs other than gt and full".into(),
                ))
            }
        };
    }
    let mut notes = Vec::new();
    for t in targets.iter_mut() {
        if *t % 2 == 1 {
            *t += 1;
            notes.push(format!("target rounded up to even {t} so the half-line hazard is nonzero"));
        }
    }
    if let GraphSpec::Full { .. } = spec {
        if let Some(p) = spec.construction_params(seed) {
            if p.heights.len() == 1 {
                notes.push("single-scale construction".to_string());
                log::warn!("sharpness on a single-scale construction");
            }
        }
    }
    let horizon = *targets.iter().max().unwrap_or(&1);
    let g = spec.build_for_horizon(seed, horizon)?;
    let v = default_vertex(&g, None);
    let table = return_time_distribution(&g, v, horizon)?;
    let line = return_time_distribution(&build_halfline(horizon)?, 0, horizon)?;
    let rows: Vec<SharpnessRow> = targets
        .iter()
        .map(|&t| {
            let hc = hazard_at(&table, t);
            let hl = hazard_at(&line, t);
            SharpnessRow {
                target: t,
                hazard_construction: hc,
                hazard_halfline: hl,
                ratio: if hl > 0.0 { hc / hl } else { f64::INFINITY },
                halfline_scaled: t as f64 * hl,
                construction_log_scaled: t as f64 * hc / (t as f64).ln(),
            }
        })
        .collect();
    let mut checks = vec![Check::new("exact", table.exact, format!("horizon {horizon}"))];
    for r in &rows {
        checks.push(Check::new(
            format!("ratio_at_{}", r.target),
            r.ratio >= a.min_ratio,
            format!("{:.4} (threshold {})", r.ratio, a.min_ratio),
        ));
    }
    let mut csv = String::from("target,hazard_construction,hazard_halfline,ratio,halfline_scaled,construction_log_scaled\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{:.16e},{:.16e},{:.6},{:.6},{:.6}\n",
            r.target, r.hazard_construction, r.hazard_halfline, r.ratio, r.halfline_scaled, r.construction_log_scaled
        ));
    }
    let report = json!({
        "graph": g.name(),
        "n_vertices": g.n_vertices(),
        "expander_size": g.meta("expander_size"),
        "v": v,
        "rows": to_value(&rows),
        "hazard_profile": hazard_summary(&theorem2_hazard_profile(&table, g.degree(v))),
        "notes": notes,
    });
    Ok(Outcome { report, files: vec![("sharpness.csv".into(), csv)], checks })
}

pub fn collide(a: &CollideArgs, seed: u64) -> Result<Outcome> {
    let mut params = if a.heights.is_empty() {
        match a.preset {
            Preset::Small => ConstructionParams::small(seed),
            Preset::Medium => ConstructionParams::medium(seed),
        }
    } else {
        ConstructionParams::new(a.heights.clone(), a.sizes.clone(), seed)
    };
    params.expander_degree = a.degree;
    let warnings = params.validate()?;
    let tooth = comb_tooth(&params)?;
    let plan = TrialPlan::new(seed, a.trials, 1).with_step_budget(a.step_budget);
    let total = *params.window_boundaries().last().unwrap();
    let combs = if a.no_control { 1 } else { 2 };
    plan.check_budget(a.trials.saturating_mul(2 * total).saturating_mul(combs))?;
    let main = comb_collision_experiment(&tooth, &params, &plan)?;
    let mut checks = Vec::new();
    if a.trials > 0 {
        for w in &main.windows {
            checks.push(Check::new(
                format!("window_{}_collision", w.index),
                w.frequency.excludes_zero(),
                format!("{:.4} [{:.4}, {:.4}]", w.frequency.estimate, w.frequency.ci_low, w.frequency.ci_high),
            ));
        }
    }
    let mut files = vec![("collide.csv".into(), main.to_csv())];
    let mut control_value = Value::Null;
    let mut p_value = Value::Null;
    if !a.no_control {
        let control = comb_control_experiment(&tooth, &params, &plan)?;
        let p = main.final_window_p_value(&control);
        if a.trials > 0 {
            let (m, c) = (main.windows.last().unwrap(), control.windows.last().unwrap());
            checks.push(Check::new(
                "final_window_contrast",
                p < a.alpha,
                format!("main {:.4} vs control {:.4}, one-sided p = {p:.3e}", m.frequency.estimate, c.frequency.estimate),
            ));
        }
        files.push(("collide_control.csv".into(), control.to_csv()));
        control_value = to_value(&control);
        p_value = json!(p);
    }
    let report = json!({
        "warnings": warnings,
        "main": to_value(&main),
        "control": control_value,
        "final_window_p_value": p_value,
    });
    Ok(Outcome { report, files, checks })
}

/// Built-in corpus for `verify`.
pub fn default_corpus() -> Vec<&'static str> {
    vec![
        "segment:64",
        "halfline:64",
        "star:64:1",
        "star:64:4",
        "star:64:9",
        "gt:200:0.2:3",
        "full:4:64",
        "expander:64:3",
        "torus:8:8",
        "path:10",
        "cycle:9",
        "complete:5",
    ]
}

#[derive(Serialize)]
struct GraphVerification {
    graph: String,
    v: Vertex,
    horizon: usize,
    exact: bool,
    max_reversibility_residual: f64,
    monotone_violation: Option<usize>,
    min_hankel_eigenvalue: f64,
    min_shifted_hankel_eigenvalue: f64,
    max_green_error: f64,
    commute_relative_residual: f64,
    lipschitz_margin: f64,
    tail_margin: f64,
    hazard_max: f64,
    rational_equal: Option<bool>,
}

pub fn verify(a: &VerifyArgs, seed: u64) -> Result<Outcome> {
    let mut specs: Vec<String> = if a.no_default_corpus { vec![] } else { default_corpus().into_iter().map(String::from).collect() };
    specs.extend(a.graph.iter().cloned());
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for spec_str in &specs {
        let spec: GraphSpec = spec_str.parse()?;
        let g = spec.build_for_horizon(seed, a.horizon)?;
        let v = default_vertex(&g, None);
        let horizon = g.truncation_radius(v).map_or(a.horizon, |r| r.min(a.horizon)).max(2);
        let (row, mut graph_checks) = verify_graph(&g, v, horizon, a.rational)?;
        for c in graph_checks.iter_mut() {
            c.name = format!("{spec_str}/{}", c.name);
        }
        checks.extend(graph_checks);
        rows.push(GraphVerification { graph: spec_str.clone(), ..row });
    }
    let mut csv = String::from("check,pass,detail\n");
    for c in &checks {
        csv.push_str(&format!("{},{},\"{}\"\n", c.name, c.pass, c.detail));
    }
    Ok(Outcome { report: json!({ "horizon": a.horizon, "graphs": to_value(&rows) }), files: vec![("verify.csv".into(), csv)], checks })
}

fn farthest(g: &Graph, v: Vertex) -> Vertex {
    let d = g.distances_from(v);
    (0..g.n_vertices()).max_by_key(|&u| (d[u], std::cmp::Reverse(u))).unwrap_or(v)
}

fn verify_graph(g: &Graph, v: Vertex, horizon: usize, rational: bool) -> Result<(GraphVerification, Vec<Check>)> {
    let table = return_time_distribution(g, v, horizon)?;
    let rev = reversibility_residuals(g, v, horizon)?.into_iter().fold(0.0, f64::max);
    let mono = even_monotonicity_check(&table);
    let m = table.moments();
    let mut hankel = f64::INFINITY;
    let mut shifted = f64::INFINITY;
    for order in 1..=HANKEL_MAX_ORDER {
        if let Ok(x) = hankel_psd_check(&m, order) {
            hankel = hankel.min(x);
        }
        if let Ok(x) = shifted_hankel_psd_check(&m, order) {
            shifted = shifted.min(x);
        }
    }
    let green = green_function(g, v)?;
    let dv = g.degree(v) as f64;
    let green_err = (0..g.n_vertices()).map(|u| (green[u] - g.degree(u) as f64 / dv).abs()).fold(0.0, f64::max);
    let net = Network::unit(g);
    let far = farthest(g, v);
    let p = solve_potential(&net, &[v], &[far])?;
    let commute = commute_identity_residual(&net, v, far)? / (net.total_weight() * p.resistance);
    let lipschitz = p.lipschitz_margin(g);
    let t1 = theorem1_margin(&table, g.degree(v));
    let t2 = theorem2_hazard_profile(&table, g.degree(v));
    let mut checks = vec![
        Check::new("exact", table.exact, format!("horizon {horizon}")),
        Check::new("reversibility", rev <= REVERSIBILITY_TOLERANCE, format!("{rev:.3e}")),
        Check::new("even_monotone", mono.holds, format!("{:?}", mono.first_violation)),
        Check::new("hankel_psd", hankel >= -HANKEL_TOLERANCE && shifted >= -HANKEL_TOLERANCE, format!("{hankel:.3e} / {shifted:.3e}")),
        Check::new("green", green_err <= GREEN_TOLERANCE, format!("{green_err:.3e}")),
        Check::new("commute_identity", commute <= COMMUTE_TOLERANCE, format!("{commute:.3e}")),
        Check::new("lipschitz", lipschitz <= 1.0 + LIPSCHITZ_TOLERANCE, format!("{lipschitz:.12}")),
    ];
    if models_infinite(g) {
        checks.push(Check::new("tail_lower_bound", t1.holds, format!("{:.6}", t1.margin)));
        checks.push(Check::new("hazard_upper_bound", t2.holds, format!("{:.6}", t2.max_normalized)));
    }
    let mut rational_equal = None;
    if rational && g.n_vertices() <= RATIONAL_MAX_VERTICES {
        let h = horizon.min(24);
        let eq = return_time_distribution_rational(g, v, h)? == renewal_return_distribution_rational(g, v, h)?;
        checks.push(Check::new("rational_equal", eq, format!("horizon {h}")));
        rational_equal = Some(eq);
    }
    let row = GraphVerification {
        graph: g.name().to_string(),
        v,
        horizon,
        exact: table.exact,
        max_reversibility_residual: rev,
        monotone_violation: mono.first_violation,
        min_hankel_eigenvalue: hankel,
        min_shifted_hankel_eigenvalue: shifted,
        max_green_error: green_err,
        commute_relative_residual: commute,
        lipschitz_margin: lipschitz,
        tail_margin: t1.margin,
        hazard_max: t2.max_normalized,
        rational_equal,
    };
    Ok((row, checks))
}

pub fn construct(a: &ConstructArgs, seed: u64) -> Result<Outcome> {
    let g = GraphSpec::build(&a.graph.parse()?, seed)?;
    let text = to_edge_list(&g);
    let report = json!({
        "graph": g.name(),
        "n_vertices": g.n_vertices(),
        "n_edges": g.n_edges(),
        "metadata": to_value(g.metadata()),
        "edge_list": text,
    });
    Ok(Outcome { report, files: vec![("construct.edges".into(), text)], checks: vec![] })
}
