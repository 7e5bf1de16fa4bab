//! `exlab`: membership tests for exclusivity graphs with JSON reports.
//!
//! Exit codes: 0 IN (or success), 1 OUT / self-inconsistent / infeasible
//! behavior, 3 BOUNDARY, 2 any error.

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use exlab::assignments::{
    in_qstab, in_stab_capped, parse_assignment_json, self_inconsistency_check_budget, validate_unit_box,
    ProbabilityAssignment, Verdict, DEFAULT_COPY_BUDGET, DEFAULT_STAB_CAP,
};
use exlab::constructions::{build_h_with, th_membership_via_h_with, DEFAULT_ISO_CAP};
use exlab::graph::io::{graph_from_value, graph_to_value, parse_graph, to_dot};
use exlab::graph::{
    cycle_graph, enumerate_maximal_cliques_capped, find_isomorphism, generalized_composition, induced_subgraph,
    is_perfect_capped, or_power_capped, or_product_capped, Graph, DEFAULT_CLIQUE_OUTPUT_CAP, DEFAULT_PERFECT_CAP,
    DEFAULT_PRODUCT_CAP,
};
use exlab::scenarios::{
    behavior_to_assignment, bell_chsh_scenario, chsh_pentagon_events, exclusivity_graph, in_classical, kcbs_pentagon_events,
    kcbs_scenario, validate_behavior, Behavior, MeasurementScenario,
};
use exlab::theta::{extract_witness_with, in_th_with, SdpOptions, ThStatus, DEFAULT_MAX_DIMENSION};
use exlab::Error;

#[derive(Parser)]
#[command(name = "exlab", version, about = "Classical, quantum and exclusivity-principle tests on exclusivity graphs")]
struct Cli {
    /// Suppress diagnostics on stderr (errors are still reported).
    #[arg(long, global = true)]
    quiet: bool,
    /// Add wall-clock timings to the report.
    #[arg(long, global = true)]
    timings: bool,
    /// Largest SDP matrix dimension.
    #[arg(long, global = true, env = "EXLAB_SDP_CAP")]
    sdp_cap: Option<usize>,
    /// Cap on enumerated cliques and independent sets.
    #[arg(long, global = true, env = "EXLAB_CLIQUE_BUDGET")]
    clique_budget: Option<usize>,
    /// Largest power graph (in vertices) examined by `copies`.
    #[arg(long, global = true, env = "EXLAB_COPY_BUDGET")]
    copy_budget: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build and inspect graphs.
    Graph {
        #[command(subcommand)]
        cmd: GraphCmd,
    },
    /// Decide membership of an assignment in STAB, QSTAB or TH.
    Membership(MembershipArgs),
    /// Search OR powers for a clique bound violated by the tensor power.
    Copies(CopiesArgs),
    /// Analyse the CHSH or KCBS scenario.
    Scenario(ScenarioArgs),
}

#[derive(Subcommand)]
enum GraphCmd {
    /// The cycle C_n.
    Cycle { n: usize },
    Complement { file: PathBuf },
    /// OR (co-normal) product.
    Product { a: PathBuf, b: PathBuf },
    /// k-fold OR power.
    Power { file: PathBuf, k: usize },
    /// Generalized composition: skeleton vertex i is replaced by part i.
    Compose {
        skeleton: PathBuf,
        #[arg(required = true)]
        parts: Vec<PathBuf>,
    },
    /// Order, size, perfection, self-complementarity, maximal cliques.
    Info { file: PathBuf },
    /// H(G) = P4[G, co-G, co-G, G] with its self-complementarity witness.
    HBuild {
        file: PathBuf,
        #[command(flatten)]
        h: HOpts,
    },
}

#[derive(Args, Clone, Copy)]
struct HOpts {
    /// Largest H(G) whose self-complementarity is checked.
    #[arg(long, default_value_t = DEFAULT_ISO_CAP)]
    iso_cap: usize,
    /// Build H(G) beyond the cap without the self-complementarity check.
    #[arg(long)]
    skip_self_complementarity_check: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SetKind {
    Stab,
    Qstab,
    Th,
}

#[derive(Args)]
struct MembershipArgs {
    #[arg(long, value_enum)]
    set: SetKind,
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    assignment: PathBuf,
    /// Decide TH membership through the self-complementary H(G).
    #[arg(long)]
    via_h: bool,
    #[command(flatten)]
    h: HOpts,
}

#[derive(Args)]
struct CopiesArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    assignment: PathBuf,
    #[arg(long)]
    max_copies: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioKind {
    Chsh,
    Kcbs,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(value_enum)]
    kind: ScenarioKind,
    /// Behavior JSON (per-context distributions, or {"chsh8": [...]}).
    #[arg(long)]
    behavior: Option<PathBuf>,
    /// Check the five-event pentagon of the scenario.
    #[arg(long)]
    pentagon_subset: bool,
}

enum Failure {
    /// Exit 1 with a message and an optional report.
    Negative(String, Option<Value>),
    Error(Error),
    /// Exit 2 after printing a partial report.
    Limit(Error, Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

type Run = Result<(Output, u8), Failure>;

enum Output {
    Json(Value),
    Text(String),
}

struct Ctx {
    quiet: bool,
    timings: bool,
    format: Format,
    sdp: SdpOptions,
    clique_budget: Option<usize>,
    copy_budget: usize,
    stdin_used: bool,
    inputs: Map<String, Value>,
    times: Vec<(String, f64)>,
    start: Instant,
}

impl Ctx {
    fn note(&self, msg: &str) {
        if !self.quiet {
            eprintln!("exlab: {msg}");
        }
    }

    fn read(&mut self, role: &str, path: &PathBuf) -> Result<String, Error> {
        let mut bytes = Vec::new();
        if path.as_os_str() == "-" {
            if std::mem::replace(&mut self.stdin_used, true) {
                return Err(Error::InvalidArgument("standard input can be read only once".into()));
            }
            std::io::stdin().read_to_end(&mut bytes).map_err(|e| Error::InvalidArgument(format!("stdin: {e}")))?;
        } else {
            bytes = std::fs::read(path)
                .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        }
        let digest = hex::encode(Sha256::digest(&bytes));
        self.inputs.insert(role.to_string(), json!({"path": path.display().to_string(), "sha256": digest}));
        String::from_utf8(bytes).map_err(|_| Error::Parse(format!("{} is not UTF-8", path.display())))
    }

    fn graph(&mut self, role: &str, path: &PathBuf) -> Result<Graph, Error> {
        let text = self.read(role, path)?;
        // Reports from `exlab graph ...` carry the graph under "graph".
        if let Ok(Value::Object(m)) = serde_json::from_str::<Value>(&text) {
            if let Some(inner) = m.get("graph").filter(|v| v.is_object()) {
                return graph_from_value(inner);
            }
        }
        parse_graph(&text)
    }

    fn assignment(&mut self, g: &Graph, path: &PathBuf) -> Result<ProbabilityAssignment, Error> {
        let text = self.read("assignment", path)?;
        validate_unit_box(g, parse_assignment_json(&text)?)
    }

    fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let v = f();
        self.times.push((stage.to_string(), t.elapsed().as_secs_f64() * 1e3));
        v
    }
}

fn graph_output(ctx: &Ctx, g: &Graph) -> Output {
    match ctx.format {
        Format::Dot => Output::Text(to_dot(g, None)),
        Format::Json => Output::Json(json!({
            "vertices": g.n(),
            "edges": g.edge_count(),
            "graph": graph_to_value(g),
        })),
    }
}

fn cmd_graph(ctx: &mut Ctx, cmd: &GraphCmd) -> Run {
    let g = match cmd {
        GraphCmd::Cycle { n } => cycle_graph(*n)?,
        GraphCmd::Complement { file } => ctx.graph("graph", file)?.complement(),
        GraphCmd::Product { a, b } => {
            let (ga, gb) = (ctx.graph("a", a)?, ctx.graph("b", b)?);
            or_product_capped(&ga, &gb, DEFAULT_PRODUCT_CAP)?
        }
        GraphCmd::Power { file, k } => {
            let g = ctx.graph("graph", file)?;
            or_power_capped(&g, *k, DEFAULT_PRODUCT_CAP)?
        }
        GraphCmd::Compose { skeleton, parts } => {
            let s = ctx.graph("skeleton", skeleton)?;
            let ps = parts
                .iter()
                .enumerate()
                .map(|(i, p)| ctx.graph(&format!("part{i}"), p))
                .collect::<Result<Vec<_>, _>>()?;
            generalized_composition(&s, &ps)?
        }
        GraphCmd::Info { file } => {
            let g = ctx.graph("graph", file)?;
            return Ok((Output::Json(graph_info(ctx, &g)?), 0));
        }
        GraphCmd::HBuild { file, h } => {
            let g = ctx.graph("graph", file)?;
            let hc = ctx.time("h_build", || build_h_with(&g, h.iso_cap, h.skip_self_complementarity_check))?;
            if let Some(w) = &hc.warning {
                ctx.note(w);
            }
            if ctx.format == Format::Dot {
                return Ok((Output::Text(to_dot(&hc.h_graph, None)), 0));
            }
            return Ok((Output::Json(hc.to_json()), 0));
        }
    };
    Ok((graph_output(ctx, &g), 0))
}

fn graph_info(ctx: &mut Ctx, g: &Graph) -> Result<Value, Error> {
    let mut out = json!({"vertices": g.n(), "edges": g.edge_count()});
    match ctx.time("perfect", || is_perfect_capped(g, DEFAULT_PERFECT_CAP)) {
        Ok(v) => {
            out["perfect"] = json!(v.perfect);
            if let Some(o) = v.obstruction {
                out["obstruction"] = json!({"kind": o.kind, "cycle": o.cycle});
            }
        }
        Err(Error::ResourceLimit { .. }) => {
            out["perfect"] = Value::Null;
            ctx.note(&format!("perfection not decided above {DEFAULT_PERFECT_CAP} vertices"));
        }
        Err(e) => return Err(e),
    }
    let gc = g.complement();
    let w = ctx.time("self_complementary", || find_isomorphism(g, &gc));
    out["self_complementary"] = json!(w.is_some());
    if let Some(w) = w {
        out["self_complementarity_witness"] = json!(w.mapping);
    }
    let cap = ctx.clique_budget.unwrap_or(DEFAULT_CLIQUE_OUTPUT_CAP);
    let cliques = ctx.time("maximal_cliques", || enumerate_maximal_cliques_capped(g, cap))?;
    out["maximal_cliques"] = json!(cliques);
    Ok(out)
}

fn status_code(s: ThStatus) -> u8 {
    match s {
        ThStatus::In => 0,
        ThStatus::Out => 1,
        ThStatus::Boundary => 3,
    }
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::In => 0,
        Verdict::Out => 1,
    }
}

fn cmd_membership(ctx: &mut Ctx, a: &MembershipArgs) -> Run {
    let g = ctx.graph("graph", &a.graph)?;
    let pa = ctx.assignment(&g, &a.assignment)?;
    if a.via_h && a.set != SetKind::Th {
        return Err(Error::InvalidArgument("--via-h applies to --set th only".into()).into());
    }
    let edge_violations: Vec<String> = pa.edge_violations().iter().map(|v| v.to_string()).collect();
    if !edge_violations.is_empty() {
        ctx.note(&format!("assignment breaks {} edge bound(s)", edge_violations.len()));
    }
    let (mut report, code) = match a.set {
        SetKind::Stab => {
            let cap = ctx.clique_budget.unwrap_or(DEFAULT_STAB_CAP);
            let v = ctx.time("stab", || in_stab_capped(&pa, cap))?;
            (v.to_json(), verdict_code(v.verdict()))
        }
        SetKind::Qstab => {
            let v = ctx.time("qstab", || in_qstab(&pa))?;
            (v.to_json(), verdict_code(v.verdict))
        }
        SetKind::Th if a.via_h => {
            let sdp = ctx.sdp;
            let r = ctx.time("th_via_h", || {
                th_membership_via_h_with(&pa, &sdp, a.h.iso_cap, a.h.skip_self_complementarity_check)
            })?;
            if let Some(w) = &r.construction.warning {
                ctx.note(w);
            }
            (r.to_json(), status_code(r.verdict.status))
        }
        SetKind::Th => {
            let sdp = ctx.sdp;
            let v = ctx.time("th", || in_th_with(&pa, &sdp))?;
            let mut rep = v.to_json();
            if v.status == ThStatus::Out {
                let w = ctx.time("witness", || extract_witness_with(&pa, &sdp))?;
                rep["witness"] = w.to_json();
            }
            (rep, status_code(v.status))
        }
    };
    report["set"] = json!(match a.set {
        SetKind::Stab => "stab",
        SetKind::Qstab => "qstab",
        SetKind::Th => "th",
    });
    report["edge_bounds_hold"] = json!(edge_violations.is_empty());
    if !edge_violations.is_empty() {
        report["edge_violations"] = json!(edge_violations);
    }
    Ok((Output::Json(report), code))
}

fn cmd_copies(ctx: &mut Ctx, a: &CopiesArgs) -> Run {
    let g = ctx.graph("graph", &a.graph)?;
    let pa = ctx.assignment(&g, &a.assignment)?;
    let budget = ctx.copy_budget;
    let v = ctx.time("copies", || self_inconsistency_check_budget(&pa, a.max_copies, budget))?;
    let mut report = v.to_json();
    report["copy_budget"] = json!(budget);
    if v.first_violation.is_some() {
        return Ok((Output::Json(report), 1));
    }
    if v.budget_exhausted {
        // The partial report still goes out; the exit code says the search stopped early.
        let next = (g.n() as u128).saturating_pow(v.n_checked as u32 + 1);
        return Err(Failure::Limit(
            Error::ResourceLimit { what: "copy budget vertices", requested: next, cap: budget as u128 },
            report,
        ));
    }
    Ok((Output::Json(report), 0))
}

fn cmd_scenario(ctx: &mut Ctx, a: &ScenarioArgs) -> Run {
    let s: MeasurementScenario = match a.kind {
        ScenarioKind::Chsh => bell_chsh_scenario(),
        ScenarioKind::Kcbs => kcbs_scenario(),
    };
    let eg = exclusivity_graph(&s);
    if ctx.format == Format::Dot {
        return Ok((Output::Text(eg.to_dot(&s)), 0));
    }
    let mut report = json!({
        "scenario": match a.kind { ScenarioKind::Chsh => "chsh", ScenarioKind::Kcbs => "kcbs" },
        "definition": s.to_json(),
        "events": s.event_count(),
        "maximal_contexts": s.maximal_contexts().len(),
        "exclusivity_graph": {"vertices": eg.graph.n(), "edges": eg.graph.edge_count()},
    });
    if a.pentagon_subset {
        let set = match a.kind {
            ScenarioKind::Chsh => chsh_pentagon_events(&s)?,
            ScenarioKind::Kcbs => kcbs_pentagon_events(&s)?,
        };
        let (sub, _) = induced_subgraph(&eg.graph, &set)?;
        let iso = find_isomorphism(&sub, &cycle_graph(5)?);
        report["pentagon"] = json!({
            "events": set.iter().map(|&v| s.event_label(&eg.events[v])).collect::<Vec<_>>(),
            "vertices": set,
            "isomorphic_to_c5": iso.is_some(),
            "isomorphism": iso.map(|w| w.mapping),
        });
    }
    if let Some(path) = &a.behavior {
        let text = ctx.read("behavior", path)?;
        let v: Value = serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
        let b = match Behavior::from_json(&s, &v) {
            Ok(b) => b,
            Err(Error::InfeasibleBehavior(msg)) => {
                report["behavior"] = json!({"feasible": false, "violation": msg});
                return Err(Failure::Negative(format!("infeasible behavior: {msg}"), Some(report)));
            }
            Err(e) => return Err(e.into()),
        };
        let val = validate_behavior(&s, &b)?;
        report["behavior"] = json!({"probabilities": b.to_json(&s), "validation": val.to_json()});
        if !val.passed() {
            let msg = format!("behavior violates {}", val.failures().iter().map(|c| c.description.clone()).collect::<Vec<_>>().join("; "));
            return Err(Failure::Negative(msg, Some(report)));
        }
        let pa = behavior_to_assignment(&s, &b)?;
        let classical = ctx.time("classical", || in_classical(&s, &b))?;
        report["classical"] = classical.to_json(&s);
        report["qstab"] = ctx.time("qstab", || in_qstab(&pa))?.to_json();
        let sdp = ctx.sdp;
        let th = ctx.time("th", || in_th_with(&pa, &sdp))?;
        let mut th_json = th.to_json();
        if th.status == ThStatus::Out {
            th_json["witness"] = ctx.time("witness", || extract_witness_with(&pa, &sdp))?.to_json();
        }
        report["th"] = th_json;
        report["assignment"] = pa.to_json();
    }
    Ok((Output::Json(report), 0))
}

fn emit(ctx: &Ctx, out: &Output) {
    match out {
        Output::Text(t) => write_stdout(t),
        Output::Json(v) => {
            let mut full = Map::new();
            full.insert("command".into(), json!(std::env::args().skip(1).collect::<Vec<_>>()));
            full.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
            full.insert("inputs".into(), Value::Object(ctx.inputs.clone()));
            if let Value::Object(m) = v {
                for (k, x) in m {
                    full.insert(k.clone(), x.clone());
                }
            }
            if ctx.timings {
                let mut t: Map<String, Value> = ctx.times.iter().map(|(k, ms)| (k.clone(), json!(ms))).collect();
                t.insert("total".into(), json!(ctx.start.elapsed().as_secs_f64() * 1e3));
                full.insert("timings_ms".into(), Value::Object(t));
            }
            let mut text = serde_json::to_string_pretty(&Value::Object(full)).expect("report serializes");
            text.push('\n');
            write_stdout(&text);
        }
    }
}

// A closed pipe downstream is not an error of ours.
fn write_stdout(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut ctx = Ctx {
        quiet: cli.quiet,
        timings: cli.timings,
        format: cli.format,
        sdp: SdpOptions { max_dimension: cli.sdp_cap.unwrap_or(DEFAULT_MAX_DIMENSION), ..SdpOptions::default() },
        clique_budget: cli.clique_budget,
        copy_budget: cli.copy_budget.unwrap_or(DEFAULT_COPY_BUDGET),
        stdin_used: false,
        inputs: Map::new(),
        times: Vec::new(),
        start: Instant::now(),
    };
    let result = match &cli.cmd {
        Cmd::Graph { cmd } => cmd_graph(&mut ctx, cmd),
        Cmd::Membership(a) => cmd_membership(&mut ctx, a),
        Cmd::Copies(a) => cmd_copies(&mut ctx, a),
        Cmd::Scenario(a) => cmd_scenario(&mut ctx, a),
    };
    match result {
        Ok((out, code)) => {
            emit(&ctx, &out);
            ExitCode::from(code)
        }
        Err(Failure::Negative(msg, report)) => {
            if let Some(r) = report {
                emit(&ctx, &Output::Json(r));
            }
            eprintln!("exlab: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Limit(e, report)) => {
            emit(&ctx, &Output::Json(report));
            eprintln!("exlab: error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Error(e)) => {
            eprintln!("exlab: error: {e}");
            ExitCode::from(2)
        }
    }
}
