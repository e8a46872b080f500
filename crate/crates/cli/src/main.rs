use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pinobs::exec::Exec;
use pinobs::gen::chains_with_noise;
use pinobs::network::BooleanNetwork;
use pinobs::oracle::{self, OracleError, Verdict};
use pinobs::planner::{plan, CostWeights, PlanReport, PlannerKind};
use pinobs::synthesis::{synthesize, ControllerReport, Polarity, SynthesisOptions};
use pinobs::wiring::{
    augment, build_wiring_digraph, AugmentMode, AugmentedNetwork, DotOverlay, WiringDigraph,
};

const EXIT_UNOBSERVABLE: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "pinobs",
    version,
    about = "Observability analysis and pinning control of Boolean networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Include per-stage wall times in reports.
    #[arg(long, global = true)]
    timings: bool,
    /// Treat single-variable sensors as directly observable states (default).
    #[arg(long, global = true, conflicts_with = "augment")]
    collapse: bool,
    /// Append one virtual copy variable per output.
    #[arg(long, global = true)]
    augment: bool,
    /// Largest state count (as 2^n) the exhaustive oracle will enumerate.
    #[arg(long, global = true, default_value_t = oracle::DEFAULT_STATE_CAP)]
    oracle_cap: usize,
    /// Frozen input values: `NAME=0|1,...` (unlisted inputs are 0) or a 0/1
    /// string in input declaration order.
    #[arg(long, global = true)]
    inputs: Option<String>,
    /// Run data-parallel stages on one thread.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Planner {
    Greedy,
    Cover,
}

impl From<Planner> for PlannerKind {
    fn from(p: Planner) -> Self {
        match p {
            Planner::Greedy => PlannerKind::Greedy,
            Planner::Cover => PlannerKind::Cover,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Structural observability check, plus the oracle when feasible.
    Check { file: PathBuf },
    /// Plan pins, synthesize controllers and write the pinned network.
    Pin {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Planner::Cover)]
        planner: Planner,
        /// Pin type weights `C1,C2,C3`.
        #[arg(long, default_value = "2,1,2")]
        cost: CostWeights,
        /// Copy the predecessor negated instead of as is.
        #[arg(long)]
        negate: bool,
        /// Destination of the pinned `.bn` file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wiring digraph as DOT, optionally with a plan overlay.
    Graph {
        file: PathBuf,
        #[arg(long, value_enum)]
        plan: Option<Planner>,
        #[arg(long, default_value = "2,1,2")]
        cost: CostWeights,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive observability verdict.
    Oracle { file: PathBuf },
    /// Time the pipeline and the oracle, as CSV.
    Bench {
        /// Directory of `.bn` files.
        corpus: Option<PathBuf>,
        /// Synthetic network sizes, e.g. `10..18`.
        #[arg(long)]
        sizes: Option<String>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Runs per measurement; the minimum is reported.
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Common {
    fn mode(&self) -> AugmentMode {
        if self.augment {
            AugmentMode::Generic
        } else {
            AugmentMode::Collapse
        }
    }

    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        }
    }
}

#[derive(Default)]
struct Timer {
    stages: Vec<(String, f64)>,
}

impl Timer {
    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages
            .push((stage.to_string(), start.elapsed().as_secs_f64() * 1e3));
        out
    }

    fn report(&self, enabled: bool) -> Option<BTreeMap<String, f64>> {
        enabled.then(|| self.stages.iter().cloned().collect())
    }
}

fn read_network(path: &Path) -> Result<BooleanNetwork> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.parse()
        .with_context(|| format!("parsing {}", path.display()))
}

fn parse_inputs(bn: &BooleanNetwork, spec: Option<&str>) -> Result<Option<Vec<bool>>> {
    let Some(spec) = spec else { return Ok(None) };
    let names: Vec<String> = bn.inputs().map(|v| bn.var(v).name.clone()).collect();
    let bit = |c: &str| match c.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => bail!("input value must be 0 or 1, got `{other}`"),
    };
    if spec.contains('=') {
        let mut values = vec![false; names.len()];
        for item in spec.split(',').filter(|s| !s.trim().is_empty()) {
            let (name, value) = item.split_once('=').context("expected NAME=0|1")?;
            let idx = names
                .iter()
                .position(|n| n == name.trim())
                .with_context(|| format!("`{}` is not an input", name.trim()))?;
            values[idx] = bit(value)?;
        }
        Ok(Some(values))
    } else {
        let values: Vec<bool> = spec
            .chars()
            .map(|c| bit(&c.to_string()))
            .collect::<Result<_>>()?;
        if values.len() != names.len() {
            bail!(
                "{} input values given, network has {} inputs",
                values.len(),
                names.len()
            );
        }
        Ok(Some(values))
    }
}

#[derive(Serialize)]
struct NetworkStats {
    state_variables: usize,
    inputs: usize,
    outputs: usize,
    max_in_degree: usize,
    max_in_degree_at: Vec<String>,
    max_out_degree: usize,
    augment_mode: AugmentMode,
    virtual_variables: Vec<String>,
}

fn network_stats(aug: &AugmentedNetwork, g: &WiringDigraph) -> NetworkStats {
    NetworkStats {
        state_variables: aug.base.n_states(),
        inputs: aug.base.inputs().count(),
        outputs: aug.base.n_outputs(),
        max_in_degree: g.max_in_degree(),
        max_in_degree_at: g
            .argmax_in_degree()
            .iter()
            .map(|&v| g.name(v).to_string())
            .collect(),
        max_out_degree: g.max_out_degree(),
        augment_mode: aug.mode,
        virtual_variables: aug
            .virtual_vars
            .iter()
            .map(|&v| g.name(v).to_string())
            .collect(),
    }
}

#[derive(Serialize, PartialEq, Eq, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum OracleStatus {
    Observable,
    Unobservable,
    Skipped,
}

#[derive(Serialize)]
struct OracleSummary {
    status: OracleStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verdict: Option<Verdict>,
}

/// Rough peak memory of the oracle: successor, output and class arrays plus
/// the refinement keys and their sorted copy.
fn oracle_memory_bytes(n: usize) -> u128 {
    (1u128 << n) * (4 + 8 + 4 + 4 + 8 + 8)
}

fn run_oracle(
    bn: &BooleanNetwork,
    inputs: Option<&[bool]>,
    common: &Common,
) -> Result<OracleSummary> {
    let n = bn.n_states();
    let cap = common.oracle_cap.min(oracle::MAX_STATE_BITS);
    if n > cap {
        return Ok(OracleSummary {
            status: OracleStatus::Skipped,
            reason: Some(format!(
                "2^{n} states exceed the oracle cap of 2^{cap}; exhaustive check infeasible"
            )),
            verdict: None,
        });
    }
    eprintln!(
        "oracle: enumerating 2^{n} states, estimated peak memory {:.1} MiB",
        oracle_memory_bytes(n) as f64 / (1u64 << 20) as f64
    );
    match oracle::check_observability(bn, inputs, cap, common.exec()) {
        Ok(v) => Ok(OracleSummary {
            status: if v.observable {
                OracleStatus::Observable
            } else {
                OracleStatus::Unobservable
            },
            reason: None,
            verdict: Some(v),
        }),
        Err(OracleError::TooLarge { .. }) => unreachable!("cap checked above"),
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct CheckReport {
    network: NetworkStats,
    /// Non-directly-observable states none of whose out-neighbors reads
    /// them exclusively.
    p1_violations: Vec<String>,
    decomposes: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    observed_paths: Option<Vec<Vec<String>>>,
    oracle: OracleSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings_ms: Option<BTreeMap<String, f64>>,
}

fn names_of(g: &WiringDigraph, vs: &[usize]) -> Vec<String> {
    vs.iter().map(|&v| g.name(v).to_string()).collect()
}

fn cmd_check(file: &Path, common: &Common) -> Result<(String, u8)> {
    let mut t = Timer::default();
    let bn = t.time("parse", || read_network(file))?;
    let inputs = parse_inputs(&bn, common.inputs.as_deref())?;
    let aug = t.time("augment", || augment(&bn, common.mode()))?;
    let g = t.time("wiring", || build_wiring_digraph(&aug));
    let p1 = t.time("p1", || g.check_p1());
    let decomposition = t.time("decompose", || g.decompose_into_observed_paths());
    let oracle = t.time("oracle", || run_oracle(&bn, inputs.as_deref(), common))?;
    let report = CheckReport {
        network: network_stats(&aug, &g),
        p1_violations: names_of(&g, &p1),
        decomposes: decomposition.is_some(),
        observed_paths: decomposition.map(|ps| ps.iter().map(|p| names_of(&g, p)).collect()),
        oracle,
        timings_ms: t.report(common.timings),
    };
    let code = match (report.decomposes, report.oracle.status) {
        (_, OracleStatus::Unobservable) => EXIT_UNOBSERVABLE,
        (true, _) | (_, OracleStatus::Observable) => 0,
        (false, OracleStatus::Skipped) => EXIT_INCONCLUSIVE,
    };
    let text = match common.format {
        Format::Json => to_json(&report)?,
        Format::Text => {
            let mut s = String::new();
            write_stats(&mut s, &report.network);
            if report.decomposes {
                let _ = writeln!(s, "wiring decomposes into observed paths; observable");
                for p in report.observed_paths.iter().flatten() {
                    let _ = writeln!(s, "  {}", p.join(" -> "));
                }
            } else if report.p1_violations.is_empty() {
                let _ = writeln!(s, "wiring does not decompose into observed paths");
            } else {
                let _ = writeln!(
                    s,
                    "sufficient condition fails (P1 violated at {})",
                    report.p1_violations.join(", ")
                );
            }
            write_oracle(&mut s, &report.oracle);
            write_timings(&mut s, &report.timings_ms);
            s
        }
    };
    Ok((text, code))
}

#[derive(Serialize)]
struct Certificate {
    decomposes: bool,
    planned_paths_observed: bool,
}

#[derive(Serialize)]
struct PinRunReport {
    network: NetworkStats,
    plan: PlanReport,
    pinned_fraction: f64,
    controllers: Vec<ControllerReport>,
    certificate: Certificate,
    oracle: OracleSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_file: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pinned_network: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings_ms: Option<BTreeMap<String, f64>>,
}

fn cmd_pin(
    file: &Path,
    planner: Planner,
    weights: CostWeights,
    negate: bool,
    out: Option<&Path>,
    common: &Common,
) -> Result<(String, u8)> {
    let mut t = Timer::default();
    let bn = t.time("parse", || read_network(file))?;
    let inputs = parse_inputs(&bn, common.inputs.as_deref())?;
    let aug = t.time("augment", || augment(&bn, common.mode()))?;
    let g = t.time("wiring", || build_wiring_digraph(&aug));
    let plan = t
        .time("plan", || plan(&g, planner.into(), weights))
        .context("planning failed")?;
    let opts = SynthesisOptions {
        polarity: if negate {
            Polarity::Negative
        } else {
            Polarity::Positive
        },
        exec: common.exec(),
    };
    let pinned = t
        .time("synthesize", || synthesize(&aug, &plan, opts))
        .context("controller synthesis failed")?;
    let decomposes = t.time("certify", || {
        pinned.wiring.decompose_into_observed_paths().is_some()
    });
    let observed = plan.paths.iter().all(|p| pinned.wiring.is_observed_path(p));
    let oracle = t.time("oracle", || {
        run_oracle(&pinned.network, inputs.as_deref(), common)
    })?;
    let bn_text = if plan.pins.is_empty() {
        pinned.network.to_bn()
    } else {
        pinned.to_bn(&plan)
    };
    if let Some(path) = out {
        std::fs::write(path, &bn_text).with_context(|| format!("writing {}", path.display()))?;
    }
    let report = PinRunReport {
        network: network_stats(&aug, &g),
        pinned_fraction: plan.pins.len() as f64 / g.n_states().max(1) as f64,
        plan: plan.report(&g),
        controllers: pinned.report(),
        certificate: Certificate {
            decomposes,
            planned_paths_observed: observed,
        },
        oracle,
        output_file: out.map(|p| p.display().to_string()),
        pinned_network: out.is_none().then(|| bn_text.clone()),
        timings_ms: t.report(common.timings),
    };
    let text = match common.format {
        Format::Json => to_json(&report)?,
        Format::Text => {
            let mut s = String::new();
            write_stats(&mut s, &report.network);
            let p = &report.plan;
            if p.pins.is_empty() {
                let _ = writeln!(s, "network is observable; no pins required");
            } else {
                let _ = writeln!(
                    s,
                    "{:?} plan: {} pins ({} type 1, {} type 2, {} type 3), cost {}, {:.1}% of state variables",
                    p.planner,
                    p.pins.len(),
                    p.type_counts.type1,
                    p.type_counts.type2,
                    p.type_counts.type3,
                    p.cost,
                    100.0 * report.pinned_fraction
                );
            }
            if let Some(c) = &p.cover {
                let _ = writeln!(
                    s,
                    "cover: {} paths, {} cycles ({} attached, {} opened)",
                    c.cover_paths, c.cycles_found, c.cycles_attached, c.cycles_opened
                );
            }
            let _ = writeln!(s, "observed paths:");
            for path in &p.paths {
                let _ = writeln!(s, "  {}", path.join(" -> "));
            }
            for c in &report.controllers {
                let _ = writeln!(
                    s,
                    "pin {} (type {}, keeps {}): {} with g = {}",
                    c.node, c.pin_type, c.predecessor, c.op, c.feedback
                );
            }
            let _ = writeln!(
                s,
                "certificate: {}",
                if decomposes && observed {
                    "pinned wiring decomposes into the planned observed paths"
                } else {
                    "FAILED"
                }
            );
            write_oracle(&mut s, &report.oracle);
            write_timings(&mut s, &report.timings_ms);
            if let Some(path) = &report.output_file {
                let _ = writeln!(s, "wrote {path}");
            } else {
                let _ = writeln!(s, "\n{bn_text}");
            }
            s
        }
    };
    Ok((text, 0))
}

fn cmd_graph(
    file: &Path,
    planner: Option<Planner>,
    weights: CostWeights,
    common: &Common,
) -> Result<String> {
    let bn = read_network(file)?;
    let aug = augment(&bn, common.mode())?;
    let g = build_wiring_digraph(&aug);
    let overlay = match planner {
        None => DotOverlay::default(),
        Some(p) => {
            let plan = plan(&g, p.into(), weights).context("planning failed")?;
            DotOverlay {
                annotations: plan
                    .pins
                    .iter()
                    .map(|pin| (pin.node, format!("type {}", pin.pin_type.number())))
                    .collect(),
                paths: plan.paths,
            }
        }
    };
    Ok(g.to_dot(&overlay))
}

fn cmd_oracle(file: &Path, common: &Common) -> Result<(String, u8)> {
    let bn = read_network(file)?;
    let inputs = parse_inputs(&bn, common.inputs.as_deref())?;
    let summary = run_oracle(&bn, inputs.as_deref(), common)?;
    let code = match summary.status {
        OracleStatus::Observable => 0,
        OracleStatus::Unobservable => EXIT_UNOBSERVABLE,
        OracleStatus::Skipped => EXIT_INCONCLUSIVE,
    };
    let text = match common.format {
        Format::Json => to_json(&summary)?,
        Format::Text => {
            let mut s = String::new();
            write_oracle(&mut s, &summary);
            s
        }
    };
    Ok((text, code))
}

fn parse_sizes(spec: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = spec.split_once("..") {
        let lo: usize = a.trim().parse()?;
        let hi: usize = b.trim_start_matches('=').trim().parse()?;
        Ok((lo..=hi).collect())
    } else {
        spec.split(',').map(|x| Ok(x.trim().parse()?)).collect()
    }
}

fn min_time_ms<T>(repeats: usize, mut f: impl FnMut() -> T) -> f64 {
    (0..repeats.max(1))
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(f());
            start.elapsed().as_secs_f64() * 1e3
        })
        .fold(f64::INFINITY, f64::min)
}

fn pipeline(bn: &BooleanNetwork, exec: Exec) -> Result<()> {
    let aug = augment(bn, AugmentMode::Collapse)?;
    let g = build_wiring_digraph(&aug);
    let plan = plan(&g, PlannerKind::Cover, CostWeights::default())?;
    let opts = SynthesisOptions {
        exec,
        ..Default::default()
    };
    synthesize(&aug, &plan, opts)?;
    Ok(())
}

fn cmd_bench(
    corpus: Option<&Path>,
    sizes: Option<&str>,
    seed: u64,
    repeats: usize,
    common: &Common,
) -> Result<String> {
    use rand::SeedableRng;
    let mut networks: Vec<(String, BooleanNetwork)> = Vec::new();
    if let Some(dir) = corpus {
        let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
            .with_context(|| format!("reading {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "bn"))
            .collect();
        files.sort();
        for f in files {
            let name = f.file_name().unwrap().to_string_lossy().into_owned();
            networks.push((name, read_network(&f)?));
        }
    }
    if let Some(spec) = sizes {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        for n in parse_sizes(spec)? {
            networks.push((
                format!("synthetic-{n}"),
                chains_with_noise(&mut rng, n, 2.min(n), n / 2),
            ));
        }
    }
    let mut csv = String::from("network,n,p,omega,exec,pipeline_ms,oracle_ms\n");
    for (name, bn) in &networks {
        let omega = build_wiring_digraph(&augment(bn, AugmentMode::Collapse)?).max_in_degree();
        for exec in [Exec::Sequential, Exec::Parallel] {
            pipeline(bn, exec).with_context(|| format!("pipeline on {name}"))?;
            let pipe = min_time_ms(repeats, || pipeline(bn, exec));
            let orc = if bn.n_states() <= common.oracle_cap.min(oracle::MAX_STATE_BITS) {
                format!(
                    "{:.3}",
                    min_time_ms(repeats, || oracle::check_observability(
                        bn,
                        None,
                        common.oracle_cap,
                        exec
                    ))
                )
            } else {
                String::new()
            };
            let exec_name = if exec == Exec::Parallel {
                "parallel"
            } else {
                "sequential"
            };
            let _ = writeln!(
                csv,
                "{name},{},{},{omega},{exec_name},{pipe:.3},{orc}",
                bn.n_states(),
                bn.n_outputs()
            );
        }
    }
    Ok(csv)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn write_stats(s: &mut String, st: &NetworkStats) {
    let _ = writeln!(
        s,
        "{} state variables, {} inputs, {} outputs; max in-degree {} at {}; max out-degree {}",
        st.state_variables,
        st.inputs,
        st.outputs,
        st.max_in_degree,
        st.max_in_degree_at.join(", "),
        st.max_out_degree
    );
    if !st.virtual_variables.is_empty() {
        let _ = writeln!(
            s,
            "virtual sensor copies: {}",
            st.virtual_variables.join(", ")
        );
    }
}

fn write_oracle(s: &mut String, o: &OracleSummary) {
    match (&o.status, &o.verdict) {
        (OracleStatus::Skipped, _) => {
            let _ = writeln!(s, "oracle: skipped ({})", o.reason.as_deref().unwrap_or(""));
        }
        (_, Some(v)) => {
            let _ = write!(
                s,
                "oracle: {} ({} states, {} classes",
                if v.observable {
                    "observable"
                } else {
                    "unobservable"
                },
                v.states,
                v.classes
            );
            if let Some(h) = v.horizon {
                let _ = write!(s, ", horizon {h}");
            }
            let _ = writeln!(s, ")");
            if let Some(w) = &v.witness {
                let fmt = |m: &oracle::Assignment| {
                    m.0.iter()
                        .map(|(k, b)| format!("{k}={}", u8::from(*b)))
                        .collect::<Vec<_>>()
                        .join(" ")
                };
                let _ = writeln!(
                    s,
                    "  indistinguishable pair over {} steps:",
                    w.verified_steps
                );
                let _ = writeln!(s, "  x0: {}", fmt(&w.x0));
                let _ = writeln!(s, "  x1: {}", fmt(&w.x1));
            }
        }
        _ => {}
    }
}

fn write_timings(s: &mut String, t: &Option<BTreeMap<String, f64>>) {
    if let Some(t) = t {
        let parts: Vec<String> = t.iter().map(|(k, v)| format!("{k} {v:.3} ms")).collect();
        let _ = writeln!(s, "timings: {}", parts.join(", "));
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    let common = &cli.common;
    match &cli.command {
        Command::Check { file } => {
            let (text, code) = cmd_check(file, common)?;
            emit(&text, None)?;
            Ok(code)
        }
        Command::Pin {
            file,
            planner,
            cost,
            negate,
            out,
        } => {
            let (text, code) = cmd_pin(file, *planner, *cost, *negate, out.as_deref(), common)?;
            emit(&text, None)?;
            Ok(code)
        }
        Command::Graph {
            file,
            plan,
            cost,
            out,
        } => {
            emit(&cmd_graph(file, *plan, *cost, common)?, out.as_deref())?;
            Ok(0)
        }
        Command::Oracle { file } => {
            let (text, code) = cmd_oracle(file, common)?;
            emit(&text, None)?;
            Ok(code)
        }
        Command::Bench {
            corpus,
            sizes,
            seed,
            repeats,
            out,
        } => {
            let csv = cmd_bench(corpus.as_deref(), sizes.as_deref(), *seed, *repeats, common)?;
            emit(&csv, out.as_deref())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
