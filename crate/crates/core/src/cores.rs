//! Seeds and cores: planted graphs that almost force `k` expected copies with
//! few edges, the edge-peeling procedure turning one into the other, and the
//! degree statistics of the result.

use serde::{Deserialize, Serialize};

use crate::bounds::{edge_rooted_bound, EdgeRootedBoundInput};
use crate::counting::{planted_edge_deltas, planted_expectation, EdgeDelta, PlantedModel};
use crate::error::{Error, Result};
use crate::graph::{Edge, SimpleGraph};
use crate::pattern::Pattern;

/// Default seed constant.
pub const DEFAULT_CS: f64 = 10.0;

/// Relative slack for floating comparisons in the peeling contract.
const CONTRACT_SLACK: f64 = 1e-9;

/// Thresholds of the seed and core conditions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedParams {
    pub n: usize,
    pub p: f64,
    pub k: u64,
    pub q: usize,
    pub w: f64,
    pub c_s: f64,
}

impl SeedParams {
    /// `w` defaults to `1 / ln n` and `c_s` to [`DEFAULT_CS`].
    pub fn new(
        n: usize,
        p: f64,
        k: u64,
        q: usize,
        w: Option<f64>,
        c_s: Option<f64>,
    ) -> Result<SeedParams> {
        if n < 2 {
            return Err(Error::Domain(format!("need n >= 2, got {n}")));
        }
        let w = w.unwrap_or(1.0 / (n as f64).ln());
        let c_s = c_s.unwrap_or(DEFAULT_CS);
        if !(w > 0.0 && w < 1.0) {
            return Err(Error::Domain(format!("w = {w} outside (0, 1)")));
        }
        if !(c_s > 0.0) {
            return Err(Error::Domain(format!(
                "seed constant {c_s} must be positive"
            )));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("p = {p} outside (0, 1)")));
        }
        if k < 1 || q < 3 {
            return Err(Error::Domain(format!(
                "need k >= 1 and q >= 3, got k={k} q={q}"
            )));
        }
        Ok(SeedParams { n, p, k, q, w, c_s })
    }

    /// `c_s k^(2/q) ln(1/p) / w`.
    pub fn edge_cap(&self) -> f64 {
        self.c_s / self.w * (self.k as f64).powf(2.0 / self.q as f64) * (1.0 / self.p).ln()
    }

    /// `w^2 k^((q-2)/q) / (c_s ln(1/p))`; note `t * edge_cap = w k`.
    pub fn t(&self) -> f64 {
        self.w * self.w * (self.k as f64).powf((self.q as f64 - 2.0) / self.q as f64)
            / (self.c_s * (1.0 / self.p).ln())
    }

    fn model(&self, g: &SimpleGraph) -> Result<PlantedModel> {
        PlantedModel::new(self.n, self.p, g.clone())
    }

    fn check_pattern(&self, p: &Pattern) -> Result<()> {
        if p.q() != self.q {
            return Err(Error::Domain(format!(
                "params built for q = {}, pattern has q = {}",
                self.q,
                p.q()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedCheck {
    pub is_seed: bool,
    pub expectation: f64,
    pub within_edge_cap: bool,
}

/// `E[Q | g] >= (1 - w) k` and `e(g) <= edge_cap`.
pub fn is_seed(g: &SimpleGraph, params: &SeedParams, p: &Pattern) -> Result<SeedCheck> {
    params.check_pattern(p)?;
    let expectation = planted_expectation(p, &params.model(g)?)?;
    let within_edge_cap = g.edge_count() as f64 <= params.edge_cap();
    Ok(SeedCheck {
        is_seed: within_edge_cap && expectation >= (1.0 - params.w) * params.k as f64,
        expectation,
        within_edge_cap,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreCheck {
    pub is_core: bool,
    pub expectation: f64,
    pub within_edge_cap: bool,
    pub deltas: Vec<EdgeDelta>,
}

/// `E[Q | g] >= (1 - 2w) k`, `e(g) <= edge_cap` and every edge's delta `>= t`.
/// A graph with edges must have no isolated vertex; an edgeless graph is
/// simply not a core.
pub fn is_core(g: &SimpleGraph, params: &SeedParams, p: &Pattern) -> Result<CoreCheck> {
    params.check_pattern(p)?;
    if g.edge_count() > 0 {
        if let Some(v) = (0..g.vertex_count()).find(|&v| g.degree(v) == 0) {
            return Err(Error::IsolatedVertex(v));
        }
    }
    let model = params.model(g)?;
    let expectation = planted_expectation(p, &model)?;
    let deltas = planted_edge_deltas(p, &model)?;
    let within_edge_cap = g.edge_count() as f64 <= params.edge_cap();
    let t = params.t();
    Ok(CoreCheck {
        is_core: g.edge_count() > 0
            && within_edge_cap
            && expectation >= (1.0 - 2.0 * params.w) * params.k as f64
            && deltas.iter().all(|d| d.delta >= t),
        expectation,
        within_edge_cap,
        deltas,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Seed input, nonempty output satisfying every core condition.
    Core,
    /// Seed input whose peeling removed every edge.
    Empty,
    /// The input was not a seed; the peeled graph carries no guarantee.
    NotSeedInput,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoreReport {
    /// Peeled graph with isolated vertices removed.
    pub result: SimpleGraph,
    /// Input label of each vertex of `result`.
    pub labels: Vec<usize>,
    /// Removed edges in removal order, in input labels.
    pub peeled_edges: Vec<Edge>,
    /// Conditional expectation before any removal and after each one.
    pub expectation_trace: Vec<f64>,
    /// Delta of each removed edge at the time of removal.
    pub step_drops: Vec<f64>,
    pub verdict: Verdict,
    pub input_is_seed: bool,
    pub t: f64,
    pub edge_cap: f64,
    pub min_degree: Option<usize>,
    pub min_degree_product: Option<usize>,
}

/// Repeatedly deletes the lexicographically smallest edge whose delta is
/// below `t`. For seed inputs the outcome is checked against the core
/// conditions and a failure is reported as [`Error::ContractViolated`].
pub fn peel_to_core(g: &SimpleGraph, params: &SeedParams, p: &Pattern) -> Result<CoreReport> {
    params.check_pattern(p)?;
    let t = params.t();
    let seed = is_seed(g, params, p)?;
    let mut work = g.clone();
    let mut trace = vec![seed.expectation];
    let mut peeled = Vec::new();
    let mut drops = Vec::new();
    loop {
        if work.edge_count() == 0 {
            break;
        }
        let deltas = planted_edge_deltas(p, &params.model(&work)?)?;
        let Some(victim) = deltas.iter().find(|d| d.delta < t) else {
            break;
        };
        let (a, b) = victim.edge;
        work.remove_edge(a, b);
        peeled.push((a, b));
        drops.push(victim.delta);
        trace.push(planted_expectation(p, &params.model(&work)?)?);
    }
    let (result, labels) = work.compact();
    let verdict = if !seed.is_seed {
        Verdict::NotSeedInput
    } else if result.edge_count() == 0 {
        Verdict::Empty
    } else {
        Verdict::Core
    };
    if seed.is_seed {
        check_peeling_contract(g, params, &trace, &drops)?;
        if verdict == Verdict::Core && !is_core(&result, params, p)?.is_core {
            return Err(Error::ContractViolated("peeled seed is not a core".into()));
        }
    }
    let degrees: Vec<usize> = result.degrees();
    Ok(CoreReport {
        min_degree: degrees.iter().copied().min(),
        min_degree_product: result
            .edges()
            .iter()
            .map(|&(a, b)| degrees[a] * degrees[b])
            .min(),
        result,
        labels,
        peeled_edges: peeled,
        expectation_trace: trace,
        step_drops: drops,
        verdict,
        input_is_seed: seed.is_seed,
        t,
        edge_cap: params.edge_cap(),
    })
}

fn check_peeling_contract(
    input: &SimpleGraph,
    params: &SeedParams,
    trace: &[f64],
    drops: &[f64],
) -> Result<()> {
    let t = params.t();
    let slack = CONTRACT_SLACK * trace[0].max(1.0);
    for (w, &delta) in trace.windows(2).zip(drops) {
        let drop = w[0] - w[1];
        if !(delta > 0.0 && delta < t && drop < t + slack && (drop - delta).abs() <= slack) {
            return Err(Error::ContractViolated(format!(
                "step drop {drop} outside (0, t = {t})"
            )));
        }
    }
    let total = trace[0] - trace[trace.len() - 1];
    let budget = t * input.edge_count() as f64;
    if total > budget + slack || budget > params.w * params.k as f64 * (1.0 + CONTRACT_SLACK) {
        return Err(Error::ContractViolated(format!(
            "total drop {total} exceeds t * e(input) = {budget} or w k"
        )));
    }
    if trace[trace.len() - 1] < (1.0 - 2.0 * params.w) * params.k as f64 - slack {
        return Err(Error::ContractViolated(
            "final expectation below (1 - 2w) k".into(),
        ));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeProductRow {
    pub edge: Edge,
    pub degree_product: usize,
    pub bound: f64,
    /// `bound >= t`, which every core edge must satisfy.
    pub reaches_t: bool,
}

/// Degree product and edge-rooted bound for every edge of `g`.
pub fn degree_product_report(
    g: &SimpleGraph,
    params: &SeedParams,
    p: &Pattern,
) -> Result<Vec<DegreeProductRow>> {
    params.check_pattern(p)?;
    if g.edge_count() == 0 {
        return Err(Error::Domain("degree report needs a nonempty graph".into()));
    }
    let t = params.t();
    g.edges()
        .iter()
        .map(|&(a, b)| {
            let bound = edge_rooted_bound(
                p,
                &EdgeRootedBoundInput {
                    d_a: g.degree(a),
                    d_b: g.degree(b),
                    e: g.edge_count(),
                    n: params.n,
                    p: params.p,
                },
            )?;
            Ok(DegreeProductRow {
                edge: (a, b),
                degree_product: g.degree(a) * g.degree(b),
                bound,
                reaches_t: bound >= t,
            })
        })
        .collect()
}

/// High/low degree split with dyadic classes.
///
/// `L` holds the non-isolated vertices with degree `>= g`, `R` the rest.
/// `L_i` has degrees in `[g 2^(i-1), g 2^i)` and `R_i` the `R` vertices with
/// degree `>= g 2^(-i)`, for `i = 1..=m`. `m` is the least value with every
/// degree below `g 2^m` and every `R` degree at least `g 2^(-m)`, so no class
/// is lost. Index `i - 1` of each vector stores class `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub g_threshold: f64,
    pub m: usize,
    /// Number of trailing classes treated as the tail.
    pub s: usize,
    pub l: Vec<usize>,
    pub r: Vec<usize>,
    pub l_classes: Vec<Vec<usize>>,
    pub r_classes: Vec<Vec<usize>>,
    /// `e_ij`: edges between `L_i` and `R_j \ R_(j-1)`.
    pub e_ij: Vec<Vec<usize>>,
    pub lr_edges: usize,
    pub ll_edges: usize,
    /// Edges with no endpoint in `L`.
    pub rr_edges: usize,
    /// Edges between the top `s` classes of `L` and of `R`.
    pub e_prime: usize,
    /// `sum_{i <= m - s} e_i` with `e_i = sum_{j <= i} e_ij`.
    pub e_double_prime: usize,
    /// `|R \ R_(m-s)|`.
    pub r_prime: usize,
}

/// Builds the profile; `s` defaults to `max(1, ceil(log2 m))`, capped at `m`.
pub fn degree_partition(
    g: &SimpleGraph,
    g_threshold: f64,
    s: Option<usize>,
) -> Result<DegreeProfile> {
    if !(g_threshold > 0.0 && g_threshold.is_finite()) {
        return Err(Error::Domain(format!(
            "threshold {g_threshold} must be positive"
        )));
    }
    let deg = g.degrees();
    let vertices = g.non_isolated();
    let (l, r): (Vec<usize>, Vec<usize>) = vertices
        .iter()
        .partition(|&&v| deg[v] as f64 >= g_threshold);
    let max_deg = vertices.iter().map(|&v| deg[v]).max().unwrap_or(0) as f64;
    let min_r = r.iter().map(|&v| deg[v]).min();
    let mut m = 1usize;
    loop {
        let scale = 2f64.powi(m as i32);
        let top_ok = max_deg < g_threshold * scale;
        let bottom_ok = min_r.is_none_or(|d| g_threshold / scale <= d as f64);
        if top_ok && bottom_ok {
            break;
        }
        m += 1;
    }
    let s = s
        .unwrap_or_else(|| (m as f64).log2().ceil().max(1.0) as usize)
        .clamp(1, m);

    // class index (1-based) of each vertex
    let l_class = |d: usize| -> usize {
        let mut i = 1;
        while d as f64 >= g_threshold * 2f64.powi(i as i32) {
            i += 1;
        }
        i
    };
    // smallest j with d >= g 2^(-j)
    let r_class = |d: usize| -> usize {
        let mut j = 1;
        while (d as f64) < g_threshold / 2f64.powi(j as i32) {
            j += 1;
        }
        j
    };
    let mut class = vec![0usize; g.vertex_count()];
    let mut in_l = vec![false; g.vertex_count()];
    let mut l_classes = vec![Vec::new(); m];
    for &v in &l {
        in_l[v] = true;
        class[v] = l_class(deg[v]);
        l_classes[class[v] - 1].push(v);
    }
    for &v in &r {
        class[v] = r_class(deg[v]);
    }
    let r_classes: Vec<Vec<usize>> = (1..=m)
        .map(|i| r.iter().copied().filter(|&v| class[v] <= i).collect())
        .collect();

    let mut e_ij = vec![vec![0usize; m]; m];
    let (mut lr, mut ll, mut rr) = (0, 0, 0);
    for &(a, b) in g.edges() {
        match (in_l[a], in_l[b]) {
            (true, true) => ll += 1,
            (false, false) => rr += 1,
            (true, false) => {
                lr += 1;
                e_ij[class[a] - 1][class[b] - 1] += 1;
            }
            (false, true) => {
                lr += 1;
                e_ij[class[b] - 1][class[a] - 1] += 1;
            }
        }
    }
    let cut = m - s;
    let e_prime = (cut..m)
        .flat_map(|i| (cut..m).map(move |j| (i, j)))
        .map(|(i, j)| e_ij[i][j])
        .sum();
    let e_double_prime = (0..cut)
        .map(|i| (0..=i).map(|j| e_ij[i][j]).sum::<usize>())
        .sum();
    let r_prime = r.len()
        - if cut == 0 {
            0
        } else {
            r_classes[cut - 1].len()
        };
    Ok(DegreeProfile {
        g_threshold,
        m,
        s,
        l,
        r,
        l_classes,
        r_classes,
        e_ij,
        lr_edges: lr,
        ll_edges: ll,
        rr_edges: rr,
        e_prime,
        e_double_prime,
        r_prime,
    })
}

/// Default high-degree threshold `k^(1/q)`.
pub fn default_degree_threshold(k: u64, q: usize) -> f64 {
    (k as f64).powf(1.0 / q as f64)
}

/// Smallest `s` whose clique `K_s` holds at least `k` copies.
pub fn clique_seed_size(p: &Pattern, k: u64) -> usize {
    let mut s = p.q();
    while p.copies_in_clique(s) < k as u128 {
        s += 1;
    }
    s
}
