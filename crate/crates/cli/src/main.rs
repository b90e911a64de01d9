//! `regtail`: sampling, counting, decomposition, peeling, tail scans and the
//! verification suite from the command line.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use regtail::bounds::{
    edge_rooted_bound, min_edges_for_copies, outside_edge_bounds, pattern_hom_bound,
    rate_crossover, rate_l_ln, EdgeRootedBoundInput,
};
use regtail::cores::{
    clique_seed_size, default_degree_threshold, degree_partition, peel_to_core, SeedParams,
};
use regtail::counting::{count_copies, count_injective_homs, exact_probability, EventPredicate};
use regtail::sampling::sample_gnp;
use regtail::spanned::{excess_report, spanned_decompose};
use regtail::tail::{
    clique_lower_bound, expected_copies, scan_phase_transition, write_csv, TailRow,
};
use regtail::verify::{check_case, run_target, Target, VerifyConfig, VerifyReport, Violation};
use regtail::{threshold_probability, Error, GnpModel, Pattern, SimpleGraph};

#[derive(Parser)]
#[command(
    name = "regtail",
    version,
    about = "Copies of regular patterns in sparse random graphs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// RNG seed for every randomized step.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write output to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Draw one G(n, p) graph as an edge list.
    Sample {
        /// Used only to pick the threshold probability when --p is absent.
        #[arg(long, value_parser = parse_pattern)]
        pattern: Option<Pattern>,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Count copies in a graph, or compute an exact event probability in G(n, p).
    Count {
        #[arg(long, value_parser = parse_pattern)]
        pattern: Pattern,
        #[arg(long, value_parser = parse_graph, conflicts_with_all = ["n", "event"])]
        graph: Option<SimpleGraph>,
        #[arg(long, required_unless_present = "graph")]
        n: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        /// Event for the exact probability: copies, disjoint or spanned.
        #[arg(long, default_value = "copies")]
        event: String,
        /// Integer argument of the event.
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Split a graph into spanned components and report their cover sizes.
    Decompose {
        #[arg(long, value_parser = parse_pattern)]
        pattern: Pattern,
        #[arg(long, value_parser = parse_graph)]
        graph: SimpleGraph,
        #[command(flatten)]
        common: Common,
    },
    /// Peel a planted graph down to a core.
    Core {
        #[arg(long, value_parser = parse_pattern)]
        pattern: Pattern,
        #[arg(long, value_parser = parse_graph)]
        graph: SimpleGraph,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        w: Option<f64>,
        #[arg(long)]
        cs: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate the closed-form bounds for one parameter set.
    Bounds {
        #[arg(long, value_parser = parse_pattern)]
        pattern: Pattern,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        p: Option<f64>,
        /// Planted graph for the edge-rooted bounds.
        #[arg(long, value_parser = parse_graph)]
        graph: Option<SimpleGraph>,
        #[arg(long)]
        w: Option<f64>,
        #[arg(long)]
        cs: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate P(Q >= k) for one k.
    Tail {
        #[arg(long, value_parser = parse_pattern)]
        pattern: Pattern,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u64,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Tail rows for k = 1..=kmax with both lower bounds and the rate.
    Scan {
        #[arg(long, value_parser = parse_pattern)]
        pattern: Pattern,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        kmax: u64,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification target (or `all`), or replay recorded violations.
    Verify {
        /// hom-bound, edge-rooted, spanned-excess, power-sum, split-min,
        /// chernoff, dyadic, bk, poisson, peel or all.
        #[arg(required_unless_present = "replay")]
        target: Option<String>,
        #[arg(long, value_parser = parse_pattern)]
        pattern: Option<Pattern>,
        #[arg(long)]
        instances: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        w: Option<f64>,
        #[arg(long)]
        cs: Option<f64>,
        /// JSON file holding violations or reports to recheck.
        #[arg(long, conflicts_with = "target")]
        replay: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn parse_pattern(s: &str) -> Result<Pattern, String> {
    let res = match s.strip_prefix('@') {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
            SimpleGraph::read_edge_list(&text).and_then(Pattern::new)
        }
        None => Pattern::by_name(s),
    };
    res.map_err(|e| e.to_string())
}

fn parse_graph(s: &str) -> Result<SimpleGraph, String> {
    let path = s.strip_prefix('@').ok_or("expected @file")?;
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
    SimpleGraph::read_edge_list(&text).map_err(|e| e.to_string())
}

/// Runtime failure: a library error or an I/O problem.
enum Failure {
    Lib(Error),
    Io(io::Error),
    Json(serde_json::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Json(e)
    }
}

impl Failure {
    fn record(&self) -> Value {
        match self {
            Failure::Lib(e) => json!({"error": e.kind(), "message": e.to_string()}),
            Failure::Io(e) => json!({"error": "io", "message": e.to_string()}),
            Failure::Json(e) => json!({"error": "json", "message": e.to_string()}),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.cmd {
        Cmd::Sample { common, .. }
        | Cmd::Count { common, .. }
        | Cmd::Decompose { common, .. }
        | Cmd::Core { common, .. }
        | Cmd::Bounds { common, .. }
        | Cmd::Tail { common, .. }
        | Cmd::Scan { common, .. }
        | Cmd::Verify { common, .. } => common,
    };
    if let Some(w) = common.workers {
        if w == 0 {
            clap::Error::raw(
                clap::error::ErrorKind::ValueValidation,
                "--workers must be at least 1\n",
            )
            .exit();
        }
        // only fails if a pool already exists, which cannot happen this early
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global();
    }
    match execute(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("{}", f.record());
            ExitCode::from(1)
        }
    }
}

fn threshold_or(p: Option<f64>, n: usize, pattern: &Pattern) -> Result<f64, Error> {
    match p {
        Some(p) => Ok(p),
        None => threshold_probability(n, pattern.delta()),
    }
}

fn sink(common: &Common) -> io::Result<Box<dyn Write>> {
    Ok(match &common.out {
        Some(path) => Box::new(io::BufWriter::new(fs::File::create(path)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn execute(cmd: Cmd) -> Outcome {
    match cmd {
        Cmd::Sample {
            pattern,
            n,
            p,
            common,
        } => {
            let p = match (p, &pattern) {
                (Some(p), _) => p,
                (None, Some(pat)) => threshold_probability(n, pat.delta())?,
                (None, None) => clap::Error::raw(
                    clap::error::ErrorKind::MissingRequiredArgument,
                    "--p or --pattern is required\n",
                )
                .exit(),
            };
            let g = sample_gnp(&GnpModel::new(n, p, common.seed)?);
            let mut out = sink(&common)?;
            match common.format {
                Format::Json => write_json(&mut *out, &g)?,
                Format::Table | Format::Csv => out.write_all(g.write_edge_list().as_bytes())?,
            }
            out.flush()?;
            Ok(true)
        }
        Cmd::Count {
            pattern,
            graph,
            n,
            p,
            event,
            k,
            common,
        } => {
            let mut out = sink(&common)?;
            if let Some(g) = graph {
                let copies = count_copies(&pattern, &g)?;
                let homs = count_injective_homs(&pattern, &g)?;
                match common.format {
                    Format::Table => writeln!(out, "{copies}")?,
                    Format::Csv => {
                        writeln!(out, "copies,injective_homs,vertices,edges")?;
                        writeln!(
                            out,
                            "{copies},{homs},{},{}",
                            g.vertex_count(),
                            g.edge_count()
                        )?;
                    }
                    Format::Json => write_json(
                        &mut *out,
                        &json!({"copies": copies, "injective_homs": homs,
                                "vertices": g.vertex_count(), "edges": g.edge_count()}),
                    )?,
                }
            } else {
                let n = n.expect("clap enforces --n without --graph");
                let p = threshold_or(p, n, &pattern)?;
                let event = EventPredicate::parse(&event, k)?;
                let prob = exact_probability(&pattern, &GnpModel::new(n, p, common.seed)?, event)?;
                match common.format {
                    Format::Table => writeln!(out, "{prob}")?,
                    Format::Csv => writeln!(out, "n,p,probability\n{n},{p},{prob}")?,
                    Format::Json => write_json(
                        &mut *out,
                        &json!({"n": n, "p": p, "event": event, "probability": prob}),
                    )?,
                }
            }
            out.flush()?;
            Ok(true)
        }
        Cmd::Decompose {
            pattern,
            graph,
            common,
        } => {
            let dec = spanned_decompose(&pattern, &graph)?;
            let mut components = Vec::new();
            for c in &dec.components {
                let rep = excess_report(&pattern, &c.graph)?;
                components.push(json!({
                    "vertices": rep.vertices,
                    "edges": rep.edges,
                    "copies": c.copies.len(),
                    "l_star": rep.l_star,
                    "f": rep.f,
                    "lower": rep.lower,
                    "holds": rep.holds,
                }));
            }
            let mut out = sink(&common)?;
            write_json(
                &mut *out,
                &json!({"components": components, "dropped_edges": dec.dropped_edges}),
            )?;
            out.flush()?;
            Ok(true)
        }
        Cmd::Core {
            pattern,
            graph,
            n,
            k,
            p,
            w,
            cs,
            common,
        } => {
            let p = threshold_or(p, n, &pattern)?;
            let params = SeedParams::new(n, p, k, pattern.q(), w, cs)?;
            let report = peel_to_core(&graph, &params, &pattern)?;
            let mut out = sink(&common)?;
            write_json(&mut *out, &report)?;
            out.flush()?;
            Ok(true)
        }
        Cmd::Bounds {
            pattern,
            n,
            k,
            p,
            graph,
            w,
            cs,
            common,
        } => {
            let p = threshold_or(p, n, &pattern)?;
            let ln_n = (n as f64).ln();
            let s = clique_seed_size(&pattern, k);
            let params = SeedParams::new(n, p, k, pattern.q(), w, cs)?;
            let mut record = json!({
                "n": n, "p": p, "k": k, "q": pattern.q(), "delta": pattern.delta(),
                "expected_copies": expected_copies(&pattern, n, p),
                "rate_l": (k >= 2).then(|| rate_l_ln(k as f64, pattern.q(), ln_n)),
                "crossover_k": rate_crossover(pattern.q(), ln_n),
                "min_edges_for_k_copies": min_edges_for_copies(&pattern, k.max(1)),
                "clique_seed_size": s,
                "clique_lower_bound": clique_lower_bound(&pattern, n, p, k).ok(),
                "t": params.t(),
                "edge_cap": params.edge_cap(),
                "degree_threshold": default_degree_threshold(k, pattern.q()),
            });
            if let Some(g) = graph {
                let mut edges = Vec::new();
                for &(a, b) in g.edges() {
                    let input = EdgeRootedBoundInput {
                        d_a: g.degree(a),
                        d_b: g.degree(b),
                        e: g.edge_count(),
                        n,
                        p,
                    };
                    edges.push(json!({
                        "edge": [a, b],
                        "edge_rooted": edge_rooted_bound(&pattern, &input)?,
                        "outside": outside_edge_bounds(&pattern, &input)?,
                    }));
                }
                record["hom_bound"] = json!(pattern_hom_bound(
                    &pattern,
                    g.vertex_count(),
                    g.edge_count()
                ));
                record["edges"] = json!(edges);
                record["degree_profile"] = json!(degree_partition(
                    &g,
                    default_degree_threshold(k, pattern.q()),
                    None
                )?);
            }
            let mut out = sink(&common)?;
            write_json(&mut *out, &record)?;
            out.flush()?;
            Ok(true)
        }
        Cmd::Tail {
            pattern,
            n,
            k,
            p,
            samples,
            common,
        } => {
            let p = threshold_or(p, n, &pattern)?;
            let scan = scan_phase_transition(&pattern, n, p, &[k], samples, common.seed)?;
            let mut out = sink(&common)?;
            write_rows(&mut *out, common.format, &scan.rows, &json!({}))?;
            out.flush()?;
            Ok(true)
        }
        Cmd::Scan {
            pattern,
            n,
            kmax,
            p,
            samples,
            common,
        } => {
            let p = threshold_or(p, n, &pattern)?;
            let ks: Vec<u64> = (1..=kmax).collect();
            let scan = scan_phase_transition(&pattern, n, p, &ks, samples, common.seed)?;
            let extra =
                json!({"crossover": scan.crossover, "crossover_in_range": scan.crossover_in_range});
            let mut out = sink(&common)?;
            write_rows(&mut *out, common.format, &scan.rows, &extra)?;
            out.flush()?;
            Ok(true)
        }
        Cmd::Verify {
            target,
            pattern,
            instances,
            trials,
            n,
            p,
            samples,
            w,
            cs,
            replay,
            common,
        } => {
            if let Some(path) = replay {
                return replay_file(&path, &common);
            }
            let name = target.expect("clap enforces a target without --replay");
            let targets = if name == "all" {
                Target::ALL.to_vec()
            } else {
                match Target::parse(&name) {
                    Ok(t) => vec![t],
                    Err(_) => clap::Error::raw(
                        clap::error::ErrorKind::InvalidValue,
                        format!("unknown verify target '{name}'\n"),
                    )
                    .exit(),
                }
            };
            let cfg = VerifyConfig {
                patterns: pattern.map(|p| vec![p]),
                instances,
                trials,
                seed: common.seed,
                n,
                p,
                samples,
                w,
                c_s: cs,
            };
            let mut reports = Vec::new();
            for t in targets {
                reports.push(run_target(t, &cfg)?);
            }
            let mut out = sink(&common)?;
            write_reports(&mut *out, common.format, &reports)?;
            out.flush()?;
            Ok(reports.iter().all(VerifyReport::passed))
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.4e}"))
}

fn write_rows(
    out: &mut dyn Write,
    format: Format,
    rows: &[TailRow],
    extra: &Value,
) -> Result<(), Failure> {
    match format {
        Format::Csv => write_csv(rows, &mut *out)?,
        Format::Json => {
            let mut v = json!({"rows": rows});
            if let (Some(obj), Some(more)) = (v.as_object_mut(), extra.as_object()) {
                obj.extend(more.clone());
            }
            write_json(out, &v)?;
        }
        Format::Table => {
            writeln!(
                out,
                "{:>5} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11}",
                "k", "estimate", "ci_low", "ci_high", "exact", "L", "clique_lb", "disjoint_lb"
            )?;
            for r in rows {
                writeln!(
                    out,
                    "{:>5} {:>11.4e} {:>11.4e} {:>11.4e} {:>11} {:>11} {:>11} {:>11}",
                    r.k,
                    r.estimate,
                    r.ci_low,
                    r.ci_high,
                    opt(r.exact),
                    opt(r.l_value),
                    opt(r.clique_lb),
                    opt(r.disjoint_lb)
                )?;
            }
            if let Some(obj) = extra.as_object() {
                for (key, value) in obj {
                    writeln!(out, "{key}: {value}")?;
                }
            }
        }
    }
    Ok(())
}

fn write_reports(
    out: &mut dyn Write,
    format: Format,
    reports: &[VerifyReport],
) -> Result<(), Failure> {
    match format {
        Format::Json => write_json(out, &reports)?,
        Format::Csv => {
            writeln!(out, "target,checked,violations")?;
            for r in reports {
                writeln!(
                    out,
                    "{},{},{}",
                    r.target.name(),
                    r.checked,
                    r.violations.len()
                )?;
            }
        }
        Format::Table => {
            for r in reports {
                let status = if r.passed() { "ok" } else { "FAILED" };
                writeln!(
                    out,
                    "{:<15} {:>7} checked {:>5} violations  {status}",
                    r.target.name(),
                    r.checked,
                    r.violations.len()
                )?;
                for v in &r.violations {
                    writeln!(out, "{}", serde_json::to_string(v)?)?;
                }
            }
        }
    }
    Ok(())
}

/// Accepts a violation, a list of violations, a report or a list of reports.
fn load_violations(text: &str) -> Result<Vec<Violation>, Failure> {
    let value: Value = serde_json::from_str(text)?;
    let items = match value {
        Value::Array(items) => items,
        other => vec![other],
    };
    let mut out = Vec::new();
    for item in items {
        if item.get("violations").is_some() {
            let report: VerifyReport = serde_json::from_value(item)?;
            out.extend(report.violations);
        } else {
            out.push(serde_json::from_value(item)?);
        }
    }
    Ok(out)
}

fn replay_file(path: &PathBuf, common: &Common) -> Outcome {
    let violations = load_violations(&fs::read_to_string(path)?)?;
    let mut results = Vec::new();
    for v in &violations {
        let detail = check_case(&v.case)?;
        results.push(json!({"target": v.target, "reproduced": detail.is_some(), "detail": detail}));
    }
    let mut out = sink(common)?;
    match common.format {
        Format::Json => write_json(&mut *out, &results)?,
        Format::Table | Format::Csv => {
            for (v, r) in violations.iter().zip(&results) {
                let status = if r["reproduced"] == json!(true) {
                    "reproduced"
                } else {
                    "holds"
                };
                writeln!(
                    out,
                    "{:<15} {status} {}",
                    v.target.name(),
                    r["detail"].as_str().unwrap_or("")
                )?;
            }
        }
    }
    out.flush()?;
    Ok(results.iter().all(|r| r["reproduced"] == json!(false)))
}
