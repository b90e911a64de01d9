//! Randomized and exhaustive checks of the inequalities the other modules
//! promise. Every checked instance is a self-contained [`Case`]; a failing one
//! is returned as a [`Violation`] that [`check_case`] can rerun verbatim.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    chernoff_tail, edge_rooted_bound, exact_binomial_tail, outside_edge_bounds, pattern_hom_bound,
    power_sum_gap, split_cost_min, EdgeRootedBoundInput,
};
use crate::cores::{
    clique_seed_size, degree_product_report, is_core, peel_to_core, SeedParams, Verdict,
};
use crate::counting::{
    count_injective_homs, exact_probability, planted_edge_delta, EventPredicate, PlantedModel,
};
use crate::error::{Error, Result};
use crate::graph::{Edge, SimpleGraph};
use crate::pattern::Pattern;
use crate::sampling::{sample_gnp_with, stream_rng, threshold_probability, GnpModel, Rng};
use crate::spanned::{
    dyadic_profile, dyadic_sandwich_holds, excess_report, glue_random_spanned, spanned_decompose,
};
use crate::tail::poisson_diagnostic;

/// Relative tolerance for comparisons between two floating evaluations.
pub const REL_TOL: f64 = 1e-12;

/// Largest Poisson total variation distance accepted at threshold.
pub const POISSON_MAX_TV: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    HomBound,
    EdgeRooted,
    SpannedExcess,
    PowerSum,
    SplitMin,
    Chernoff,
    Dyadic,
    Bk,
    Poisson,
    Peel,
}

impl Target {
    pub const ALL: [Target; 10] = [
        Target::HomBound,
        Target::EdgeRooted,
        Target::SpannedExcess,
        Target::PowerSum,
        Target::SplitMin,
        Target::Chernoff,
        Target::Dyadic,
        Target::Bk,
        Target::Poisson,
        Target::Peel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Target::HomBound => "hom-bound",
            Target::EdgeRooted => "edge-rooted",
            Target::SpannedExcess => "spanned-excess",
            Target::PowerSum => "power-sum",
            Target::SplitMin => "split-min",
            Target::Chernoff => "chernoff",
            Target::Dyadic => "dyadic",
            Target::Bk => "bk",
            Target::Poisson => "poisson",
            Target::Peel => "peel",
        }
    }

    pub fn parse(name: &str) -> Result<Target> {
        Target::ALL
            .into_iter()
            .find(|t| t.name() == name)
            .ok_or_else(|| Error::Domain(format!("unknown verify target {name:?}")))
    }
}

/// Knobs shared by the targets. `None` means the target's own default grid.
#[derive(Clone, Debug, Default)]
pub struct VerifyConfig {
    pub patterns: Option<Vec<Pattern>>,
    /// Random instances per pattern.
    pub instances: Option<usize>,
    /// Random trials for the pattern-free targets.
    pub trials: Option<usize>,
    pub seed: u64,
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub samples: Option<usize>,
    pub w: Option<f64>,
    pub c_s: Option<f64>,
}

/// One checked instance, with everything needed to recompute it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum Case {
    /// Injective homomorphisms into `graph` against `n^q (2m/n^2)^(e/delta)`.
    HomBound {
        pattern: SimpleGraph,
        graph: SimpleGraph,
    },
    /// Expected copies through `edge` against the edge-rooted bound, or with
    /// `outside` set, the copies using an unplanted edge against the largest
    /// outside-edge bound. `edge.0` plays the role of `a`.
    EdgeRooted {
        pattern: SimpleGraph,
        n: usize,
        p: f64,
        planted: SimpleGraph,
        edge: Edge,
        outside: bool,
    },
    /// Excess of a spanned graph against its minimal cover size.
    SpannedExcess {
        pattern: SimpleGraph,
        graph: SimpleGraph,
    },
    PowerSum {
        xs: Vec<f64>,
        p: f64,
    },
    SplitMin {
        k: u64,
        a: f64,
        q: usize,
    },
    Chernoff {
        n: u64,
        m: u64,
        p: f64,
    },
    Dyadic {
        ls: Vec<u64>,
    },
    /// `P(two disjoint copies) <= P(a copy)^2`, both exact.
    Bk {
        pattern: SimpleGraph,
        n: usize,
        p: f64,
    },
    Poisson {
        pattern: SimpleGraph,
        n: usize,
        p: f64,
        seed: u64,
        samples: usize,
        max_tv: f64,
    },
    /// Peeling contract and edge-bound consistency on a seed.
    Peel {
        pattern: SimpleGraph,
        params: SeedParams,
        graph: SimpleGraph,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub target: Target,
    pub case: Case,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub target: Target,
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn leq(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + REL_TOL * rhs.abs()
}

/// Reruns one case. `Ok(None)` means it holds, `Ok(Some(detail))` describes a
/// violation.
pub fn check_case(case: &Case) -> Result<Option<String>> {
    let fail = |ok: bool, msg: String| Ok((!ok).then_some(msg));
    match case {
        Case::HomBound { pattern, graph } => {
            let p = Pattern::new(pattern.clone())?;
            let homs = count_injective_homs(&p, graph)?;
            let bound = pattern_hom_bound(&p, graph.vertex_count(), graph.edge_count());
            fail(
                leq(homs as f64, bound),
                format!("{homs} injective homomorphisms exceed bound {bound}"),
            )
        }
        Case::EdgeRooted {
            pattern,
            n,
            p,
            planted,
            edge,
            outside,
        } => {
            let pat = Pattern::new(pattern.clone())?;
            let model = PlantedModel::new(*n, *p, planted.clone())?;
            let delta = planted_edge_delta(&pat, &model, *edge)?;
            let input = EdgeRootedBoundInput {
                d_a: planted.degree(edge.0),
                d_b: planted.degree(edge.1),
                e: planted.edge_count(),
                n: *n,
                p: *p,
            };
            if *outside {
                let exact = delta.rooted_polynomial.without_constant().eval(*p);
                let bounds = outside_edge_bounds(&pat, &input)?;
                fail(
                    leq(exact, bounds.max),
                    format!("outside-edge expectation {exact} exceeds {}", bounds.max),
                )
            } else {
                let bound = edge_rooted_bound(&pat, &input)?;
                fail(
                    leq(delta.rooted, bound),
                    format!("rooted expectation {} exceeds {bound}", delta.rooted),
                )
            }
        }
        Case::SpannedExcess { pattern, graph } => {
            let rep = excess_report(&Pattern::new(pattern.clone())?, graph)?;
            fail(
                rep.holds,
                format!(
                    "excess {} below ({} - 1)/delta = {}",
                    rep.f, rep.l_star, rep.lower
                ),
            )
        }
        Case::PowerSum { xs, p } => {
            let gap = power_sum_gap(xs, *p)?;
            fail(gap >= -1e-12, format!("gap {gap}"))
        }
        Case::SplitMin { k, a, q } => {
            let m = split_cost_min(*k, *a, *q)?;
            fail(
                m.value >= m.rhs,
                format!("minimum {} at s = {} below {}", m.value, m.s_star, m.rhs),
            )
        }
        Case::Chernoff { n, m, p } => {
            let exact = exact_binomial_tail(*n, *m, *p)?;
            let bound = chernoff_tail(*n, *m, *p)?;
            fail(
                leq(exact, bound),
                format!("exact tail {exact} exceeds {bound}"),
            )
        }
        Case::Dyadic { ls } => {
            let profile = dyadic_profile(ls)?;
            fail(
                dyadic_sandwich_holds(ls, &profile),
                format!(
                    "weighted class sum {} outside [sum/2, sum]",
                    profile.weighted_sum()
                ),
            )
        }
        Case::Bk { pattern, n, p } => {
            let pat = Pattern::new(pattern.clone())?;
            let model = GnpModel::new(*n, *p, 0)?;
            let two = exact_probability(&pat, &model, EventPredicate::DisjointCopies(2))?;
            let one = exact_probability(&pat, &model, EventPredicate::CopiesAtLeast(1))?;
            fail(
                leq(two, one * one),
                format!("P(2 disjoint) = {two} exceeds P(1)^2 = {}", one * one),
            )
        }
        Case::Poisson {
            pattern,
            n,
            p,
            seed,
            samples,
            max_tv,
        } => {
            let pat = Pattern::new(pattern.clone())?;
            let d = poisson_diagnostic(&pat, &GnpModel::new(*n, *p, *seed)?, *samples)?;
            fail(
                d.tv_distance < *max_tv,
                format!("tv {} with lambda {}", d.tv_distance, d.lambda),
            )
        }
        Case::Peel {
            pattern,
            params,
            graph,
        } => check_peel(&Pattern::new(pattern.clone())?, params, graph),
    }
}

fn check_peel(p: &Pattern, params: &SeedParams, g: &SimpleGraph) -> Result<Option<String>> {
    let rep = match peel_to_core(g, params, p) {
        Ok(rep) => rep,
        Err(Error::ContractViolated(msg)) => return Ok(Some(msg)),
        Err(e) => return Err(e),
    };
    if !rep.input_is_seed {
        return Ok(Some("input is not a seed".into()));
    }
    let trace = &rep.expectation_trace;
    for (i, w) in trace.windows(2).enumerate() {
        let drop = w[0] - w[1];
        if !(drop > 0.0 && drop < rep.t) {
            return Ok(Some(format!("step {i} drops {drop}, t = {}", rep.t)));
        }
    }
    let total = trace[0] - trace[trace.len() - 1];
    let wk = params.w * params.k as f64;
    if total > wk {
        return Ok(Some(format!("total drop {total} exceeds w k = {wk}")));
    }
    if rep.verdict == Verdict::Core {
        if !is_core(&rep.result, params, p)?.is_core {
            return Ok(Some("peeled output is not a core".into()));
        }
        if let Some(row) = degree_product_report(&rep.result, params, p)?
            .iter()
            .find(|r| !r.reaches_t)
        {
            return Ok(Some(format!(
                "edge {:?} has bound {} below t = {}",
                row.edge, row.bound, rep.t
            )));
        }
    }
    Ok(None)
}

fn default_patterns(cfg: &VerifyConfig, names: &[&str]) -> Result<Vec<Pattern>> {
    match &cfg.patterns {
        Some(ps) => Ok(ps.clone()),
        None => names.iter().map(|n| Pattern::by_name(n)).collect(),
    }
}

/// Random graph on `n` vertices with density drawn from `[lo, hi]`.
fn random_graph(rng: &mut Rng, n: usize, lo: f64, hi: f64) -> SimpleGraph {
    let p = rng.gen_range(lo..=hi);
    sample_gnp_with(n, p, rng)
}

/// The deterministic instance list of a target.
pub fn generate_cases(target: Target, cfg: &VerifyConfig) -> Result<Vec<Case>> {
    let mut rng = stream_rng(cfg.seed, target as u64);
    let mut cases = Vec::new();
    match target {
        Target::HomBound => {
            let count = cfg.instances.unwrap_or(1000);
            for p in default_patterns(cfg, &["k3", "c4", "k4"])? {
                for _ in 0..count {
                    let n = cfg.n.unwrap_or_else(|| rng.gen_range(p.q()..=12));
                    let graph = random_graph(&mut rng, n, 0.1, 0.9);
                    cases.push(Case::HomBound {
                        pattern: p.graph().clone(),
                        graph,
                    });
                }
            }
        }
        Target::EdgeRooted => {
            let count = cfg.instances.unwrap_or(500);
            for pat in default_patterns(cfg, &["k3", "c4", "k4"])? {
                for i in 0..2 * count {
                    let outside = i >= count;
                    let max_n = if outside { 9 } else { 10 };
                    let n = cfg.n.unwrap_or_else(|| rng.gen_range(pat.q()..=max_n));
                    let p = cfg.p.unwrap_or_else(|| rng.gen_range(0.01..0.6));
                    loop {
                        let planted = random_graph(&mut rng, n, 0.15, 0.8);
                        let mut candidates: Vec<Edge> = Vec::new();
                        for &(u, v) in planted.edges() {
                            if !outside || planted.degree(u) < pat.delta() {
                                candidates.push((u, v));
                            } else if planted.degree(v) < pat.delta() {
                                candidates.push((v, u));
                            }
                        }
                        if let Some(&edge) = candidates.choose(&mut rng) {
                            cases.push(Case::EdgeRooted {
                                pattern: pat.graph().clone(),
                                n,
                                p,
                                planted,
                                edge,
                                outside,
                            });
                            break;
                        }
                    }
                }
            }
        }
        Target::SpannedExcess => {
            let count = cfg.instances.unwrap_or(200);
            for pat in default_patterns(cfg, &["k3", "c4", "k4"])? {
                for _ in 0..count {
                    let l = rng.gen_range(1..=6);
                    let pool = rng.gen_range(pat.q()..=pat.q() * l);
                    let graph = glue_random_spanned(&pat, l, &mut rng, pool)?;
                    cases.push(Case::SpannedExcess {
                        pattern: pat.graph().clone(),
                        graph,
                    });
                }
                // components of dense random graphs
                for _ in 0..count / 4 {
                    let n = rng.gen_range(pat.q()..=8);
                    let g = random_graph(&mut rng, n, 0.4, 0.9);
                    for c in spanned_decompose(&pat, &g)?.components {
                        if c.copies.len() <= 40 {
                            cases.push(Case::SpannedExcess {
                                pattern: pat.graph().clone(),
                                graph: c.graph,
                            });
                        }
                    }
                }
            }
        }
        Target::PowerSum => {
            for _ in 0..cfg.trials.unwrap_or(10_000) {
                let len = rng.gen_range(1..=20);
                let scale = 10f64.powi(rng.gen_range(-3..=6));
                let xs = (0..len)
                    .map(|_| {
                        if rng.gen_bool(0.1) {
                            0.0
                        } else {
                            rng.gen_range(0.0..scale)
                        }
                    })
                    .collect();
                let p = 1.0 + rng.gen_range(1e-3..9.0);
                cases.push(Case::PowerSum { xs, p });
            }
        }
        Target::SplitMin => {
            let qs: Vec<usize> = match &cfg.patterns {
                Some(ps) => ps.iter().map(Pattern::q).collect(),
                None => vec![3, 4, 5],
            };
            for q in qs {
                for a in [0.1, 1.0, 10.0, 100.0] {
                    for k in 2..=200 {
                        cases.push(Case::SplitMin { k, a, q });
                    }
                }
            }
        }
        Target::Chernoff => {
            let ps = match cfg.p {
                Some(p) => vec![p],
                None => vec![0.01, 0.1, 0.3],
            };
            for p in ps {
                for n in 1..=200u64 {
                    let lo = (n as f64 * p).ceil() as u64;
                    for m in lo.max(1)..=n {
                        cases.push(Case::Chernoff { n, m, p });
                    }
                }
            }
        }
        Target::Dyadic => {
            for _ in 0..cfg.trials.unwrap_or(10_000) {
                let len = rng.gen_range(1..=50);
                let top = rng.gen_range(1..=40u32);
                let ls = (0..len)
                    .map(|_| rng.gen_range(2..=(2u64 << top.min(62))))
                    .collect();
                cases.push(Case::Dyadic { ls });
            }
        }
        Target::Bk => {
            let ns = cfg.n.map_or(vec![6, 7], |n| vec![n]);
            for pat in default_patterns(cfg, &["k3"])? {
                for &n in &ns {
                    let ps = match cfg.p {
                        Some(p) => vec![p],
                        None => vec![0.05, 0.1, 0.2, 1.0 / n as f64],
                    };
                    for p in ps {
                        cases.push(Case::Bk {
                            pattern: pat.graph().clone(),
                            n,
                            p,
                        });
                    }
                }
            }
        }
        Target::Poisson => {
            let n = cfg.n.unwrap_or(400);
            for pat in default_patterns(cfg, &["k3"])? {
                let p = match cfg.p {
                    Some(p) => p,
                    None => threshold_probability(n, pat.delta())?,
                };
                for i in 0..cfg.trials.unwrap_or(3) as u64 {
                    cases.push(Case::Poisson {
                        pattern: pat.graph().clone(),
                        n,
                        p,
                        seed: cfg.seed.wrapping_add(i),
                        samples: cfg.samples.unwrap_or(100_000),
                        max_tv: POISSON_MAX_TV,
                    });
                }
            }
        }
        Target::Peel => {
            let n = cfg.n.unwrap_or(100_000);
            for pat in default_patterns(cfg, &["k3", "k4"])? {
                let p = match cfg.p {
                    Some(p) => p,
                    None => threshold_probability(n, pat.delta())?,
                };
                for k in 2..=20u64 {
                    let params = SeedParams::new(n, p, k, pat.q(), cfg.w, cfg.c_s)?;
                    let s = clique_seed_size(&pat, k);
                    let clique = SimpleGraph::complete(s);
                    cases.push(Case::Peel {
                        pattern: pat.graph().clone(),
                        params,
                        graph: clique.clone(),
                    });
                    for _ in 0..cfg.instances.unwrap_or(2) {
                        cases.push(Case::Peel {
                            pattern: pat.graph().clone(),
                            params,
                            graph: decorate(&clique, &mut rng),
                        });
                    }
                }
            }
        }
    }
    Ok(cases)
}

/// Adds a few pendant edges and a short path hanging off the clique or
/// floating free; these carry far less than `t` expected copies.
fn decorate(clique: &SimpleGraph, rng: &mut Rng) -> SimpleGraph {
    let s = clique.vertex_count();
    let extra = rng.gen_range(2..=5);
    let mut g = clique.with_vertex_count(s + extra);
    for x in s..s + extra {
        let anchor = if rng.gen_bool(0.5) {
            rng.gen_range(0..s)
        } else {
            rng.gen_range(s..s + extra)
        };
        if anchor != x {
            g.add_edge(anchor, x);
        } else {
            g.add_edge(rng.gen_range(0..s), x);
        }
    }
    g
}

/// Generates and checks every case of a target; checks run in parallel and
/// violations are reported in generation order.
pub fn run_target(target: Target, cfg: &VerifyConfig) -> Result<VerifyReport> {
    let cases = generate_cases(target, cfg)?;
    let outcomes: Vec<Result<Option<String>>> = cases.par_iter().map(check_case).collect();
    let mut violations = Vec::new();
    for (case, outcome) in cases.iter().zip(outcomes) {
        if let Some(detail) = outcome? {
            violations.push(Violation {
                target,
                case: case.clone(),
                detail,
            });
        }
    }
    Ok(VerifyReport {
        target,
        checked: cases.len(),
        violations,
    })
}
