//! Exact injective-homomorphism and copy counting by pruned backtracking.
//!
//! Pattern vertices are matched in a greedy connected order so that every
//! vertex after the first has an already-matched neighbor; candidates come
//! from that neighbor's adjacency list and are filtered by degree and by
//! adjacency to every earlier matched neighbor.

pub mod exact;
pub mod planted;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{edge, Edge, SimpleGraph};
use crate::pattern::Pattern;

pub use exact::{exact_count_distribution, exact_probability, EventPredicate, MAX_EXACT_N};
pub use planted::{
    planted_edge_delta, planted_edge_deltas, planted_expectation, planted_expectation_polynomial,
    EdgeDelta, ExpectationPolynomial, PlantedModel,
};

/// Default cap on partial assignments explored by one enumeration.
pub const DEFAULT_BUDGET: u64 = 1_000_000_000;

/// Counts partial assignments and fails once a limit is crossed.
#[derive(Clone, Debug)]
pub struct Budget {
    limit: u64,
    used: u64,
}

impl Budget {
    pub fn new(limit: u64) -> Budget {
        Budget { limit, used: 0 }
    }

    #[inline]
    pub(crate) fn spend(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.limit {
            Err(Error::BudgetExceeded(self.limit))
        } else {
            Ok(())
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::new(DEFAULT_BUDGET)
    }
}

/// Matching order for a pattern, optionally starting with fixed vertices.
#[derive(Clone, Debug)]
pub(crate) struct MatchPlan {
    /// Pattern vertex placed at each position.
    pub order: Vec<usize>,
    /// Position of an earlier neighbor used to generate candidates.
    pub anchor: Vec<Option<usize>>,
    /// Positions of all earlier neighbors.
    pub back: Vec<Vec<usize>>,
    /// Pattern degree at each position.
    pub degree: Vec<usize>,
}

impl MatchPlan {
    pub fn new(h: &SimpleGraph, prefix: &[usize]) -> MatchPlan {
        let q = h.vertex_count();
        let mut order: Vec<usize> = prefix.to_vec();
        let mut placed = vec![false; q];
        for &v in prefix {
            placed[v] = true;
        }
        while order.len() < q {
            let next = (0..q)
                .filter(|&v| !placed[v])
                .max_by_key(|&v| {
                    let links = h.neighbors(v).iter().filter(|&&w| placed[w]).count();
                    (links, h.degree(v), std::cmp::Reverse(v))
                })
                .unwrap();
            placed[next] = true;
            order.push(next);
        }
        let mut pos = vec![0; q];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let back: Vec<Vec<usize>> = order
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut b: Vec<usize> = h
                    .neighbors(v)
                    .iter()
                    .map(|&w| pos[w])
                    .filter(|&j| j < i)
                    .collect();
                b.sort_unstable();
                b
            })
            .collect();
        let anchor = back.iter().map(|b| b.first().copied()).collect();
        let degree = order.iter().map(|&v| h.degree(v)).collect();
        MatchPlan {
            order,
            anchor,
            back,
            degree,
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }
}

/// Depth-first search over injective edge-preserving maps. `img[i]` is the
/// image of the pattern vertex at position `i`; positions below `pos` are
/// preassigned by the caller.
fn search<F>(
    plan: &MatchPlan,
    g: &SimpleGraph,
    pos: usize,
    img: &mut [usize],
    used: &mut [bool],
    budget: &mut Budget,
    visit: &mut F,
) -> Result<()>
where
    F: FnMut(&[usize]),
{
    if pos == plan.len() {
        visit(img);
        return Ok(());
    }
    let need = plan.degree[pos];
    let back = &plan.back[pos];
    let try_candidate = |c: usize,
                         img: &mut [usize],
                         used: &mut [bool],
                         budget: &mut Budget,
                         visit: &mut F|
     -> Result<()> {
        if used[c] || g.degree(c) < need {
            return Ok(());
        }
        if !back.iter().all(|&j| g.has_edge(img[j], c)) {
            return Ok(());
        }
        budget.spend()?;
        img[pos] = c;
        used[c] = true;
        let r = search(plan, g, pos + 1, img, used, budget, visit);
        used[c] = false;
        r
    };
    match plan.anchor[pos] {
        Some(a) => {
            let base = img[a];
            for &c in g.neighbors(base) {
                try_candidate(c, img, used, budget, visit)?;
            }
        }
        None => {
            for c in 0..g.vertex_count() {
                try_candidate(c, img, used, budget, visit)?;
            }
        }
    }
    Ok(())
}

/// Runs `visit` on every injective homomorphism; the slice passed is indexed
/// by pattern vertex.
pub(crate) fn for_each_embedding<F>(
    h: &SimpleGraph,
    g: &SimpleGraph,
    budget: &mut Budget,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(&[usize]),
{
    let q = h.vertex_count();
    if q > g.vertex_count() {
        return Ok(());
    }
    let plan = MatchPlan::new(h, &[]);
    let mut img = vec![0; q];
    let mut used = vec![false; g.vertex_count()];
    let mut by_vertex = vec![0; q];
    search(
        &plan,
        g,
        0,
        &mut img,
        &mut used,
        budget,
        &mut |m: &[usize]| {
            for (i, &v) in plan.order.iter().enumerate() {
                by_vertex[v] = m[i];
            }
            visit(&by_vertex);
        },
    )
}

/// Injective maps `V(H) -> V(g)` carrying every edge of `H` onto an edge of `g`.
pub fn count_injective_homs(p: &Pattern, g: &SimpleGraph) -> Result<u64> {
    count_injective_homs_with(p.graph(), g, &mut Budget::default())
}

/// As [`count_injective_homs`] for an arbitrary pattern graph and explicit budget.
pub fn count_injective_homs_with(
    h: &SimpleGraph,
    g: &SimpleGraph,
    budget: &mut Budget,
) -> Result<u64> {
    let mut count = 0u64;
    if h.vertex_count() == 0 {
        return Ok(1);
    }
    for_each_embedding(h, g, budget, |_| count += 1)?;
    Ok(count)
}

/// Number of edge subsets of `g` isomorphic to the pattern.
pub fn count_copies(p: &Pattern, g: &SimpleGraph) -> Result<u64> {
    Ok(count_injective_homs(p, g)? / p.aut_count())
}

/// Number of copies of the pattern in `g` whose edge set contains `f`.
pub fn count_copies_through_edge(p: &Pattern, g: &SimpleGraph, f: Edge) -> Result<u64> {
    let (a, b) = f;
    if !g.has_edge(a, b) {
        return Err(Error::EdgeAbsent(a, b));
    }
    let h = p.graph();
    let mut budget = Budget::default();
    let mut used = vec![false; g.vertex_count()];
    used[a] = true;
    used[b] = true;
    let mut total = 0u64;
    for (u, v) in p.ordered_edges() {
        let plan = MatchPlan::new(h, &[u, v]);
        let mut img = vec![0; h.vertex_count()];
        img[0] = a;
        img[1] = b;
        search(&plan, g, 2, &mut img, &mut used, &mut budget, &mut |_| {
            total += 1
        })?;
    }
    Ok(total / p.aut_count())
}

/// One copy of the pattern inside a host graph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PatternCopy {
    /// Sorted edge set.
    pub edges: Vec<Edge>,
    /// Sorted vertex set.
    pub vertices: Vec<usize>,
}

impl PatternCopy {
    pub fn shares_vertex(&self, other: &PatternCopy) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.vertices.len() && j < other.vertices.len() {
            match self.vertices[i].cmp(&other.vertices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }
}

/// All copies of the pattern in `g`, sorted by edge set.
pub fn enumerate_copies(p: &Pattern, g: &SimpleGraph) -> Result<Vec<PatternCopy>> {
    enumerate_copies_with(p, g, &mut Budget::default())
}

pub fn enumerate_copies_with(
    p: &Pattern,
    g: &SimpleGraph,
    budget: &mut Budget,
) -> Result<Vec<PatternCopy>> {
    let h = p.graph();
    let mut seen: BTreeSet<PatternCopy> = BTreeSet::new();
    for_each_embedding(h, g, budget, |m| {
        let mut edges: Vec<Edge> = h.edges().iter().map(|&(u, v)| edge(m[u], m[v])).collect();
        edges.sort_unstable();
        let mut vertices = m.to_vec();
        vertices.sort_unstable();
        seen.insert(PatternCopy { edges, vertices });
    })?;
    Ok(seen.into_iter().collect())
}
