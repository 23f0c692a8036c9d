//! The four subcommands, independent of argument parsing and output.

use std::collections::BTreeMap;
use std::path::Path;

use catlab_core::lab::{nogo_verdict_for_measurement, NoGoVerdict};
use catlab_core::protocols::{discriminate, enumerate, leaf_mass, OutcomeTree, Scenario, TreeNode};
use catlab_core::qstate::{State, StateKey, StateVector};
use catlab_core::MATCH_TOL;
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};
use crate::json::{StateJson, VectorJson};
use crate::parallel::run_monte_carlo_parallel;
use crate::report::{CsvRow, ScenarioRef};
use crate::scenario::{load_scenario, ScenarioFile};

/// A loaded scenario and where it came from.
pub struct Context {
    pub file: ScenarioFile,
    pub source: ScenarioRef,
}

impl Context {
    pub fn load(path: &Path) -> CliResult<Self> {
        let (file, bytes) = load_scenario(path)?;
        let source = ScenarioRef::new(&path.display().to_string(), &file.scenario.name, &bytes);
        Ok(Context { file, source })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.file.scenario
    }
}

/// What a command produced: the JSON payload, its CSV rows, and whether a
/// violation was found (exit code 2).
#[derive(Debug, Clone)]
pub struct Output {
    pub result: Value,
    pub rows: Vec<CsvRow>,
    pub violation: bool,
}

fn payload<T: Serialize>(t: &T) -> CliResult<Value> {
    serde_json::to_value(t).map_err(|e| CliError::Output(e.to_string()))
}

/// A declared name for `state`, else a short description.
pub fn describe(sc: &Scenario, state: &State) -> String {
    match state {
        State::Pure(p) => sc.name_of(p).map_or_else(|| ket(p), str::to_owned),
        State::Mixed(rho) => sc
            .states
            .iter()
            .find_map(|(n, s)| match s {
                State::Mixed(m) if m.matrix().max_abs_diff(rho.matrix()) < MATCH_TOL => Some(n.clone()),
                State::Pure(p) if rho.fidelity(p) > 1.0 - MATCH_TOL => Some(n.clone()),
                _ => None,
            })
            .unwrap_or_else(|| {
                let diag: Vec<String> = (0..rho.dim()).map(|i| format!("{:.6}", rho.matrix()[(i, i)].re)).collect();
                format!("mixed(diag {})", diag.join(", "))
            }),
    }
}

fn ket(p: &StateVector) -> String {
    let terms: Vec<String> = p
        .canonical()
        .amplitudes()
        .iter()
        .zip(p.space().labels())
        .filter(|(z, _)| z.norm() > 1e-9)
        .map(|(z, l)| {
            let (re, im) = (z.re, z.im);
            let coef = if im.abs() < 1e-9 {
                format!("{re:.6}")
            } else if re.abs() < 1e-9 {
                format!("{im:.6}i")
            } else {
                format!("({re:.6}{im:+.6}i)")
            };
            format!("{coef}|{}⟩", l.as_str())
        })
        .collect();
    terms.join(" + ")
}

#[derive(Serialize)]
struct WitnessJson {
    steps: Vec<String>,
    depth: usize,
    probability: f64,
    final_state: VectorJson,
}

#[derive(Serialize)]
struct VerdictJson {
    from: String,
    to: String,
    violated: bool,
    bound_reached: bool,
    witness: Option<WitnessJson>,
}

#[derive(Serialize)]
struct CheckJson {
    candidate: String,
    depth_limit: usize,
    violated: bool,
    verdicts: Vec<VerdictJson>,
}

/// Adjoins the declared measurement `candidate` to the lab and searches each
/// forbidden transition (or just `from -> to`) for a steering path.
pub fn check(ctx: &Context, candidate: &str, from: Option<&str>, to: Option<&str>, depth: usize) -> CliResult<Output> {
    let sc = ctx.scenario();
    let m = sc.measurement(candidate)?;
    let name = |s: &StateVector| sc.name_of(s).map_or_else(|| ket(s), str::to_owned);
    let pairs: Vec<(String, String, StateVector, StateVector)> = match (from, to) {
        (Some(f), Some(t)) => vec![(f.to_owned(), t.to_owned(), sc.pure_state(f)?.clone(), sc.pure_state(t)?.clone())],
        (None, None) => sc
            .lab
            .forbidden()
            .iter()
            .map(|t| (name(&t.from), name(&t.to), t.from.clone(), t.to.clone()))
            .collect(),
        _ => return Err(CliError::Usage("--from and --to go together".into())),
    };
    if pairs.is_empty() {
        return Err(CliError::Usage("the scenario forbids no transition; pass --from and --to".into()));
    }
    let mut verdicts = Vec::new();
    let mut rows = Vec::new();
    for (f, t, d, l) in pairs {
        let NoGoVerdict { violated, witness, bound_reached, .. } =
            nogo_verdict_for_measurement(&sc.lab, candidate, m, &l, &d, depth)?;
        rows.push(CsvRow::exact(format!("{f} -> {t}"), witness.as_ref().map_or(0.0, |w| w.probability)));
        verdicts.push(VerdictJson {
            from: f,
            to: t,
            violated,
            bound_reached,
            witness: witness.map(|w| WitnessJson {
                steps: w.steps.iter().map(ToString::to_string).collect(),
                depth: w.depth(),
                probability: w.probability,
                final_state: (&w.final_state).into(),
            }),
        });
    }
    let violation = verdicts.iter().any(|v| v.violated);
    let result = payload(&CheckJson { candidate: candidate.into(), depth_limit: depth, violated: violation, verdicts })?;
    Ok(Output { result, rows, violation })
}

fn resolve_protocol<'a>(
    sc: &'a Scenario,
    protocol: &str,
    initial: Option<&'a str>,
) -> CliResult<(&'a catlab_core::protocols::ScenarioProtocol, catlab_core::Laboratory, String, State)> {
    let p = sc.protocol(protocol)?;
    let lab = sc.lab_for(p)?;
    let init_name = initial
        .or(p.initial.as_deref())
        .ok_or_else(|| CliError::Usage(format!("protocol `{protocol}` has no default initial state; pass --initial")))?;
    let state = sc.state(init_name)?.clone();
    Ok((p, lab, init_name.to_owned(), state))
}

#[derive(Serialize)]
struct ClassJson {
    label: String,
    probability: f64,
    leaves: usize,
    state: StateJson,
}

#[derive(Serialize)]
struct MassJson {
    state: String,
    mass: f64,
}

#[derive(Serialize)]
struct ExactJson {
    protocol: String,
    initial: String,
    mode: &'static str,
    nodes: usize,
    depth: usize,
    leaves: usize,
    leaf_total: f64,
    pruned_mass: f64,
    classes: Vec<ClassJson>,
    leaf_mass: Vec<MassJson>,
}

#[derive(Serialize)]
struct BinJson {
    label: String,
    count: u64,
    frequency: f64,
    exact_p: f64,
    state: StateJson,
}

#[derive(Serialize)]
struct SampledJson {
    protocol: String,
    initial: String,
    mode: &'static str,
    trials: u64,
    bins: Vec<BinJson>,
}

/// Runs a protocol exactly (outcome tree) or by Monte Carlo with exact
/// probabilities alongside.
pub fn run(
    ctx: &Context,
    protocol: &str,
    initial: Option<&str>,
    exact: bool,
    trials: u64,
    seed: u64,
    threads: usize,
) -> CliResult<Output> {
    let sc = ctx.scenario();
    let (p, lab, init_name, init) = resolve_protocol(sc, protocol, initial)?;
    let tree = enumerate(&p.spec, &lab, &init)?;
    let classes = tree.leaf_classes();
    if exact {
        let leaf_mass = sc
            .states
            .iter()
            .filter_map(|(n, s)| s.as_pure().map(|psi| MassJson { state: n.clone(), mass: leaf_mass(&tree, psi) }))
            .collect();
        let rows = classes.iter().map(|c| CsvRow::exact(describe(sc, &c.state), c.probability)).collect();
        let body = ExactJson {
            protocol: protocol.into(),
            initial: init_name,
            mode: "exact",
            nodes: tree.node_count(),
            depth: tree.depth(),
            leaves: tree.leaves().len(),
            leaf_total: tree.leaf_total(),
            pruned_mass: tree.pruned_mass,
            classes: classes
                .iter()
                .map(|c| ClassJson {
                    label: describe(sc, &c.state),
                    probability: c.probability,
                    leaves: c.leaves,
                    state: (&c.state).into(),
                })
                .collect(),
            leaf_mass,
        };
        return Ok(Output { result: payload(&body)?, rows, violation: false });
    }

    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let hist = run_monte_carlo_parallel(&p.spec, &lab, &init, trials, seed, threads)?;
    let mut merged: BTreeMap<StateKey, (State, u64, f64)> = BTreeMap::new();
    for c in &classes {
        merged.insert(c.key.clone(), (c.state.clone(), 0, c.probability));
    }
    for (key, bin) in &hist.bins {
        merged.entry(key.clone()).or_insert_with(|| (bin.state.clone(), 0, 0.0)).1 = bin.count;
    }
    let bins: Vec<BinJson> = merged
        .into_values()
        .map(|(state, count, exact_p)| BinJson {
            label: describe(sc, &state),
            count,
            frequency: count as f64 / trials as f64,
            exact_p,
            state: (&state).into(),
        })
        .collect();
    let rows = bins
        .iter()
        .map(|b| CsvRow { source: None, label: b.label.clone(), exact_p: b.exact_p, empirical_freq: Some(b.frequency), n: Some(trials) })
        .collect();
    let body = SampledJson { protocol: protocol.into(), initial: init_name, mode: "monte_carlo", trials, bins };
    Ok(Output { result: payload(&body)?, rows, violation: false })
}

#[derive(Serialize)]
struct ChiJson {
    statistic: f64,
    dof: usize,
    p_value: f64,
}

#[derive(Serialize)]
struct DiscriminationJson {
    measurement: String,
    source_a: String,
    source_b: String,
    labels: Vec<String>,
    dist_a: Vec<f64>,
    dist_b: Vec<f64>,
    total_variation: f64,
    trials: u64,
    counts_a: Vec<u64>,
    counts_b: Vec<u64>,
    freq_a: Vec<f64>,
    freq_b: Vec<f64>,
    /// Samples of B against the exact distribution of A.
    chi_square: ChiJson,
}

/// Exact and sampled statistics of two declared sources under a declared measurement.
pub fn discriminate_sources(
    ctx: &Context,
    source_a: &str,
    source_b: &str,
    measurement: &str,
    trials: u64,
    seed: u64,
) -> CliResult<Output> {
    let sc = ctx.scenario();
    let (a, b) = (sc.state(source_a)?, sc.state(source_b)?);
    let m = sc.measurement(measurement)?;
    let r = discriminate(a, b, m, measurement, trials, seed)?;
    let (freq_a, freq_b) = (r.freq_a(), r.freq_b());
    let mut rows = Vec::new();
    for (src, dist, freq) in [("A", &r.dist_a, &freq_a), ("B", &r.dist_b, &freq_b)] {
        for ((label, &p), &f) in r.labels.iter().zip(dist.iter()).zip(freq.iter()) {
            rows.push(CsvRow { source: Some(src.into()), label: label.clone(), exact_p: p, empirical_freq: Some(f), n: Some(trials) });
        }
    }
    let body = DiscriminationJson {
        measurement: measurement.into(),
        source_a: source_a.into(),
        source_b: source_b.into(),
        labels: r.labels.clone(),
        total_variation: r.total_variation,
        trials,
        freq_a,
        freq_b,
        chi_square: ChiJson { statistic: r.chi_square.statistic, dof: r.chi_square.dof, p_value: r.chi_square.p_value },
        dist_a: r.dist_a,
        dist_b: r.dist_b,
        counts_a: r.counts_a,
        counts_b: r.counts_b,
    };
    Ok(Output { result: payload(&body)?, rows, violation: false })
}

#[derive(Serialize)]
struct NodeJson {
    label: String,
    step_probability: f64,
    probability: f64,
    state: StateJson,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    children: Vec<NodeJson>,
}

fn node_json(n: &TreeNode<State>) -> NodeJson {
    NodeJson {
        label: n.label.clone(),
        step_probability: n.step_probability,
        probability: n.probability,
        state: (&n.state).into(),
        children: n.children.iter().map(node_json).collect(),
    }
}

#[derive(Serialize)]
struct TreeJson {
    protocol: String,
    initial: String,
    pruned_mass: f64,
    root: NodeJson,
}

fn leaf_paths(tree: &OutcomeTree<State>) -> Vec<(String, f64)> {
    fn walk(n: &TreeNode<State>, path: &mut Vec<String>, out: &mut Vec<(String, f64)>) {
        if !n.label.is_empty() {
            path.push(n.label.clone());
        }
        if n.is_leaf() {
            out.push((path.join(" > "), n.probability));
        }
        for c in &n.children {
            walk(c, path, out);
        }
        if !n.label.is_empty() {
            path.pop();
        }
    }
    let mut out = Vec::new();
    walk(&tree.root, &mut Vec::new(), &mut out);
    out
}

/// The full outcome tree of a protocol.
pub fn enumerate_tree(ctx: &Context, protocol: &str, initial: Option<&str>) -> CliResult<Output> {
    let sc = ctx.scenario();
    let (p, lab, init_name, init) = resolve_protocol(sc, protocol, initial)?;
    let tree = enumerate(&p.spec, &lab, &init)?;
    let rows = leaf_paths(&tree).into_iter().map(|(path, prob)| CsvRow::exact(path, prob)).collect();
    let body = TreeJson { protocol: protocol.into(), initial: init_name, pruned_mass: tree.pruned_mass, root: node_json(&tree.root) };
    Ok(Output { result: payload(&body)?, rows, violation: false })
}
