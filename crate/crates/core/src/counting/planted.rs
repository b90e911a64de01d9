//! Conditional expectations of the copy count when a fixed edge set is
//! forced present and every other pair of `[n]` appears independently with
//! probability `p`.
//!
//! The expectation is a polynomial in `p` whose `j`-th coefficient counts the
//! copies of the pattern in `K_n` with exactly `j` edges outside the planted
//! graph. Coefficients are found by enumerating injective maps from the
//! pattern into `[n]`. Vertices not touched by the planted graph are
//! interchangeable, so they are collapsed into one symbol and a map sending
//! `k` pattern vertices there is weighted by the falling factorial
//! `(n - |support|)_k`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Budget, MatchPlan};
use crate::error::{Error, Result};
use crate::graph::{edge, Edge, SimpleGraph};
use crate::pattern::Pattern;

/// `G(n, p)` with the edges of `planted` forced present. The planted graph
/// lives on the first `planted.vertex_count()` vertices of `[n]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedModel {
    pub n: usize,
    pub p: f64,
    pub planted: SimpleGraph,
}

impl PlantedModel {
    pub fn new(n: usize, p: f64, planted: SimpleGraph) -> Result<PlantedModel> {
        if planted.vertex_count() > n {
            return Err(Error::Domain(format!(
                "planted graph has {} vertices, ambient n = {n}",
                planted.vertex_count()
            )));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!(
                "planted model needs 0 < p < 1, got {p}"
            )));
        }
        Ok(PlantedModel { n, p, planted })
    }

    /// Same ambient model with a different planted graph.
    pub fn with_planted(&self, planted: SimpleGraph) -> PlantedModel {
        PlantedModel {
            n: self.n,
            p: self.p,
            planted,
        }
    }
}

/// `sum_j counts[j] * p^j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectationPolynomial {
    counts: Vec<u128>,
}

impl ExpectationPolynomial {
    pub fn counts(&self) -> &[u128] {
        &self.counts
    }

    /// Copies with exactly `j` edges missing from the planted graph.
    pub fn coefficient(&self, j: usize) -> u128 {
        self.counts.get(j).copied().unwrap_or(0)
    }

    /// Value at `p = 1`: every copy in `K_n`.
    pub fn total(&self) -> u128 {
        self.counts.iter().sum()
    }

    pub fn eval(&self, p: f64) -> f64 {
        self.counts
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * p + c as f64)
    }

    /// `ln(eval(p))` computed from `ln p`, usable where `p^j` underflows.
    /// Returns `-inf` for the zero polynomial.
    pub fn ln_eval(&self, ln_p: f64) -> f64 {
        let terms: Vec<f64> = self
            .counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(j, &c)| (c as f64).ln() + j as f64 * ln_p)
            .collect();
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
    }

    /// The part contributed by copies with at least one edge outside the planted graph.
    pub fn without_constant(&self) -> ExpectationPolynomial {
        let mut counts = self.counts.clone();
        if let Some(c) = counts.first_mut() {
            *c = 0;
        }
        ExpectationPolynomial { counts }
    }
}

fn falling(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).map(|i| (n - i) as u128).product()
}

struct Collapsed<'a> {
    plan: MatchPlan,
    planted: &'a SimpleGraph,
    support: Vec<usize>,
    outside: usize,
    edges: usize,
}

impl Collapsed<'_> {
    fn run(
        &self,
        slots: &mut Vec<Option<usize>>,
        used: &mut [bool],
        present: usize,
        budget: &mut Budget,
        acc: &mut [u128],
    ) -> Result<()> {
        let pos = slots.len();
        if pos == self.plan.len() {
            let outs = slots.iter().filter(|s| s.is_none()).count();
            acc[self.edges - present] += falling(self.outside, outs);
            return Ok(());
        }
        let back = &self.plan.back[pos];
        for &c in &self.support {
            if used[c] {
                continue;
            }
            budget.spend()?;
            let gained = back
                .iter()
                .filter(|&&j| matches!(slots[j], Some(x) if self.planted.has_edge(x, c)))
                .count();
            used[c] = true;
            slots.push(Some(c));
            let r = self.run(slots, used, present + gained, budget, acc);
            slots.pop();
            used[c] = false;
            r?;
        }
        if self.outside > 0 {
            budget.spend()?;
            slots.push(None);
            let r = self.run(slots, used, present, budget, acc);
            slots.pop();
            r?;
        }
        Ok(())
    }
}

/// Counts weighted maps; `root` fixes the first two plan positions.
fn map_counts(
    p: &Pattern,
    model: &PlantedModel,
    root: Option<(usize, usize, Edge)>,
    budget: &mut Budget,
) -> Result<Vec<u128>> {
    let h = p.graph();
    let planted = &model.planted;
    let support = planted.non_isolated();
    let outside = model.n - support.len();
    let prefix: Vec<usize> = root.map(|(u, v, _)| vec![u, v]).unwrap_or_default();
    let job = Collapsed {
        plan: MatchPlan::new(h, &prefix),
        planted,
        support,
        outside,
        edges: p.edge_count(),
    };
    let mut acc = vec![0u128; p.edge_count() + 1];
    let mut used = vec![false; planted.vertex_count()];
    let mut slots = Vec::with_capacity(p.q());
    let mut present = 0;
    if let Some((_, _, (a, b))) = root {
        used[a] = true;
        used[b] = true;
        slots.push(Some(a));
        slots.push(Some(b));
        present = 1;
    }
    job.run(&mut slots, &mut used, present, budget, &mut acc)?;
    Ok(acc)
}

fn divide(counts: Vec<u128>, aut: u64) -> ExpectationPolynomial {
    let aut = aut as u128;
    ExpectationPolynomial {
        counts: counts
            .into_iter()
            .map(|c| {
                debug_assert_eq!(c % aut, 0);
                c / aut
            })
            .collect(),
    }
}

/// Copies of the pattern in `K_n` grouped by number of edges outside the planted graph.
pub fn planted_expectation_polynomial(
    p: &Pattern,
    model: &PlantedModel,
) -> Result<ExpectationPolynomial> {
    let counts = map_counts(p, model, None, &mut Budget::new(super::DEFAULT_BUDGET))?;
    Ok(divide(counts, p.aut_count()))
}

/// `E[Q | planted edges present] = sum over copies of p^(edges missing from planted)`.
pub fn planted_expectation(p: &Pattern, model: &PlantedModel) -> Result<f64> {
    Ok(planted_expectation_polynomial(p, model)?.eval(model.p))
}

/// Contribution of one planted edge to the conditional expectation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeDelta {
    pub edge: Edge,
    /// `E_{G*} Q - E_{G* - f} Q = (1 - p) * rooted`.
    pub delta: f64,
    /// Expected number of copies through the edge given the planted graph.
    pub rooted: f64,
    pub rooted_polynomial: ExpectationPolynomial,
}

/// Drop in conditional expectation when `f` is removed from the planted graph.
pub fn planted_edge_delta(p: &Pattern, model: &PlantedModel, f: Edge) -> Result<EdgeDelta> {
    let (a, b) = edge(f.0, f.1);
    if !model.planted.has_edge(a, b) {
        return Err(Error::EdgeAbsent(a, b));
    }
    let mut budget = Budget::new(super::DEFAULT_BUDGET);
    let mut total = vec![0u128; p.edge_count() + 1];
    for (u, v) in p.ordered_edges() {
        let part = map_counts(p, model, Some((u, v, (a, b))), &mut budget)?;
        for (t, c) in total.iter_mut().zip(part) {
            *t += c;
        }
    }
    let poly = divide(total, p.aut_count());
    let rooted = poly.eval(model.p);
    Ok(EdgeDelta {
        edge: (a, b),
        delta: (1.0 - model.p) * rooted,
        rooted,
        rooted_polynomial: poly,
    })
}

/// Deltas of every planted edge, in edge order. Computed in parallel; each
/// entry is independent of the others so the result does not depend on scheduling.
pub fn planted_edge_deltas(p: &Pattern, model: &PlantedModel) -> Result<Vec<EdgeDelta>> {
    model
        .planted
        .edges()
        .par_iter()
        .map(|&f| planted_edge_delta(p, model, f))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::count_copies;
    use crate::sampling::{rng_from_seed, sample_gnp_with};
    use rand::Rng;

    fn k3() -> Pattern {
        Pattern::clique(3).unwrap()
    }

    /// Brute force over every vertex subset of `[n]` of size q and every
    /// edge subset isomorphic to the pattern: direct sum of p^(missing).
    fn oracle(
        p: &Pattern,
        n: usize,
        prob: f64,
        planted: &SimpleGraph,
        through: Option<Edge>,
    ) -> f64 {
        let kn = SimpleGraph::complete(n);
        let copies = crate::counting::enumerate_copies(p, &kn).unwrap();
        copies
            .iter()
            .filter(|c| through.is_none_or(|f| c.edges.contains(&f)))
            .map(|c| {
                let missing = c
                    .edges
                    .iter()
                    .filter(|&&(u, v)| !planted.has_edge(u, v))
                    .count();
                prob.powi(missing as i32)
            })
            .sum()
    }

    #[test]
    fn fully_planted_gives_copy_count() {
        let model = PlantedModel::new(5, 0.3, SimpleGraph::complete(5)).unwrap();
        let poly = planted_expectation_polynomial(&k3(), &model).unwrap();
        assert_eq!(poly.counts(), &[10, 0, 0, 0]);
        for prob in [0.01, 0.5, 0.99] {
            let m = model.with_planted(SimpleGraph::complete(5));
            let m = PlantedModel { p: prob, ..m };
            assert_eq!(planted_expectation(&k3(), &m).unwrap(), 10.0);
        }
    }

    #[test]
    fn empty_planted_matches_closed_form() {
        let model = PlantedModel::new(10, 0.1, SimpleGraph::empty(0)).unwrap();
        let e = planted_expectation(&k3(), &model).unwrap();
        assert!((e - 120.0 * 1e-3).abs() < 1e-12, "{e}");
    }

    #[test]
    fn planted_triangle_matches_oracle() {
        let tri = SimpleGraph::complete(3);
        let model = PlantedModel::new(10, 0.1, tri.clone()).unwrap();
        let e = planted_expectation(&k3(), &model).unwrap();
        let want = oracle(&k3(), 10, 0.1, &tri.with_vertex_count(10), None);
        assert!((e - want).abs() < 1e-12 * want, "{e} vs {want}");
        // 1 + 3(n-3)p^2 + ...: planted copy, copies on one planted edge, rest
        let head = 1.0 + 3.0 * 7.0 * 0.01;
        assert!(e > head);
    }

    #[test]
    fn single_edge_delta() {
        let n = 12;
        let prob = 0.2;
        let model =
            PlantedModel::new(n, prob, SimpleGraph::from_edges(2, [(0, 1)]).unwrap()).unwrap();
        let d = planted_edge_delta(&k3(), &model, (0, 1)).unwrap();
        let want = (1.0 - prob) * (n - 2) as f64 * prob * prob;
        assert!((d.delta - want).abs() < 1e-12, "{} vs {want}", d.delta);
    }

    #[test]
    fn triangle_edge_delta() {
        let n = 9;
        let prob = 0.15;
        let model = PlantedModel::new(n, prob, SimpleGraph::complete(3)).unwrap();
        let d = planted_edge_delta(&k3(), &model, (0, 1)).unwrap();
        let want = (1.0 - prob) * (1.0 + (n - 3) as f64 * prob * prob);
        assert!((d.delta - want).abs() < 1e-12);
        assert_eq!(
            planted_edge_delta(&k3(), &model, (0, 5)).unwrap_err(),
            Error::EdgeAbsent(0, 5)
        );
    }

    #[test]
    fn delta_is_difference_of_expectations() {
        let mut rng = rng_from_seed(21);
        let patterns = [
            k3(),
            Pattern::cycle(4).unwrap(),
            Pattern::clique(4).unwrap(),
        ];
        for i in 0..100 {
            let pat = &patterns[i % 3];
            let n = rng.gen_range(4..=10);
            let np = rng.gen_range(2..=n);
            let mut planted = sample_gnp_with(np, 0.5, &mut rng);
            if planted.edge_count() == 0 {
                planted.add_edge(0, 1);
            }
            let prob = rng.gen_range(0.02..0.9);
            let model = PlantedModel::new(n, prob, planted.clone()).unwrap();
            let f = planted.edges()[rng.gen_range(0..planted.edge_count())];
            let d = planted_edge_delta(pat, &model, f).unwrap();
            let mut minus = planted.clone();
            minus.remove_edge(f.0, f.1);
            let diff = planted_expectation(pat, &model).unwrap()
                - planted_expectation(pat, &model.with_planted(minus)).unwrap();
            let scale = diff.abs().max(1e-300);
            assert!(
                (diff - d.delta).abs() <= 1e-12 * scale.max(1.0),
                "{diff} vs {}",
                d.delta
            );

            let full = planted.with_vertex_count(n);
            let want = oracle(pat, n, prob, &full, Some(f));
            assert!((d.rooted - want).abs() <= 1e-12 * want.max(1.0));
            let want_all = oracle(pat, n, prob, &full, None);
            let got = planted_expectation(pat, &model).unwrap();
            assert!((got - want_all).abs() <= 1e-12 * want_all.max(1.0));
        }
    }

    #[test]
    fn limit_p_to_one_counts_all_copies() {
        let model = PlantedModel::new(7, 0.3, SimpleGraph::path(4)).unwrap();
        for pat in [k3(), Pattern::cycle(4).unwrap()] {
            let poly = planted_expectation_polynomial(&pat, &model).unwrap();
            assert_eq!(
                poly.total() as u64,
                count_copies(&pat, &SimpleGraph::complete(7)).unwrap()
            );
            assert!((poly.eval(1.0) - poly.total() as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn log_domain_agrees_and_survives_tiny_p() {
        let model = PlantedModel::new(30, 1e-3, SimpleGraph::complete(3)).unwrap();
        let poly = planted_expectation_polynomial(&Pattern::clique(4).unwrap(), &model).unwrap();
        let direct = poly.eval(1e-3);
        assert!((poly.ln_eval(1e-3f64.ln()) - direct.ln()).abs() < 1e-12);
        let tiny = poly.without_constant().ln_eval(-800.0);
        assert!(tiny.is_finite() && tiny < -700.0);
    }

    #[test]
    fn monotone_in_planted_edges() {
        let mut rng = rng_from_seed(4);
        for _ in 0..30 {
            let planted = sample_gnp_with(6, 0.4, &mut rng);
            let model = PlantedModel::new(9, 0.2, planted.clone()).unwrap();
            let base = planted_expectation(&k3(), &model).unwrap();
            for u in 0..6 {
                for v in u + 1..6 {
                    if !planted.has_edge(u, v) {
                        let mut more = planted.clone();
                        more.add_edge(u, v);
                        let up = planted_expectation(&k3(), &model.with_planted(more)).unwrap();
                        assert!(up >= base);
                    }
                }
            }
        }
    }
}
