//! Graphs whose every edge lies in a copy of the pattern: decomposition into
//! such components, minimum covering copy counts, dyadic profiles and the
//! random glued generator used to exercise them.

use std::collections::{BTreeMap, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::counting::{enumerate_copies, PatternCopy};
use crate::error::{Error, Result};
use crate::graph::{Edge, SimpleGraph};
use crate::pattern::Pattern;
use crate::sampling::Rng;

/// Largest copy list handed to the exact cover search.
pub const MAX_COVER_COPIES: usize = 10_000;

/// One connected piece of the covered part of a graph, on the input's labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpannedComponent {
    pub graph: SimpleGraph,
    pub copies: Vec<PatternCopy>,
}

impl SpannedComponent {
    pub fn vertex_count(&self) -> usize {
        self.graph.non_isolated().len()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpannedDecomposition {
    pub components: Vec<SpannedComponent>,
    /// Edges of the input lying in no copy.
    pub dropped_edges: Vec<Edge>,
}

impl SpannedDecomposition {
    pub fn copy_count(&self) -> usize {
        self.components.iter().map(|c| c.copies.len()).sum()
    }
}

struct DisjointSets(Vec<usize>);

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Drops edges outside every copy and splits the rest into connected components,
/// ordered by smallest vertex.
pub fn spanned_decompose(p: &Pattern, g: &SimpleGraph) -> Result<SpannedDecomposition> {
    let copies = enumerate_copies(p, g)?;
    let mut covered = SimpleGraph::empty(g.vertex_count());
    let mut sets = DisjointSets::new(g.vertex_count());
    for c in &copies {
        for &(u, v) in &c.edges {
            covered.add_edge(u, v);
            sets.union(u, v);
        }
    }
    let dropped_edges = g
        .edges()
        .iter()
        .copied()
        .filter(|&(u, v)| !covered.has_edge(u, v))
        .collect();
    let mut groups: BTreeMap<usize, (Vec<Edge>, Vec<PatternCopy>)> = BTreeMap::new();
    for &(u, v) in covered.edges() {
        groups.entry(sets.find(u)).or_default().0.push((u, v));
    }
    for c in copies {
        let root = sets.find(c.vertices[0]);
        groups
            .get_mut(&root)
            .expect("copy edges are covered")
            .1
            .push(c);
    }
    let components = groups
        .into_values()
        .map(|(edges, copies)| SpannedComponent {
            graph: g.edge_subgraph(&edges),
            copies,
        })
        .collect();
    Ok(SpannedDecomposition {
        components,
        dropped_edges,
    })
}

/// Copies of `s` after checking that it is connected and fully covered.
fn spanning_copies(p: &Pattern, s: &SimpleGraph) -> Result<Vec<PatternCopy>> {
    if s.edge_count() == 0 {
        return Err(Error::NotSpanned("graph has no edges".into()));
    }
    if !s.is_connected_ignoring_isolated() {
        return Err(Error::NotSpanned("graph is not connected".into()));
    }
    let copies = enumerate_copies(p, s)?;
    let mut covered = SimpleGraph::empty(s.vertex_count());
    for c in &copies {
        for &(u, v) in &c.edges {
            covered.add_edge(u, v);
        }
    }
    if let Some(&(u, v)) = s.edges().iter().find(|&&(u, v)| !covered.has_edge(u, v)) {
        return Err(Error::NotSpanned(format!(
            "edge ({u}, {v}) lies in no copy"
        )));
    }
    Ok(copies)
}

/// Fewest copies whose edge sets together cover all of `s`.
pub fn minimal_spanning_count(p: &Pattern, s: &SimpleGraph) -> Result<usize> {
    let copies = spanning_copies(p, s)?;
    if copies.len() > MAX_COVER_COPIES {
        return Err(Error::BudgetExceeded(MAX_COVER_COPIES as u64));
    }
    let index: BTreeMap<Edge, usize> = s.edges().iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let sets: Vec<Vec<usize>> = copies
        .iter()
        .map(|c| c.edges.iter().map(|e| index[e]).collect())
        .collect();
    Ok(min_set_cover(&sets, s.edge_count()))
}

type Bits = Vec<u64>;

fn bits_of(items: &[usize], words: usize) -> Bits {
    let mut b = vec![0u64; words];
    for &i in items {
        b[i / 64] |= 1 << (i % 64);
    }
    b
}

fn count_new(set: &Bits, covered: &Bits) -> u32 {
    set.iter()
        .zip(covered)
        .map(|(s, c)| (s & !c).count_ones())
        .sum()
}

/// Exact minimum set cover of `0..universe`. Every element must lie in some set.
fn min_set_cover(sets: &[Vec<usize>], universe: usize) -> usize {
    let words = universe.div_ceil(64);
    let masks: Vec<Bits> = sets.iter().map(|s| bits_of(s, words)).collect();
    let largest = sets.iter().map(Vec::len).max().unwrap_or(1).max(1);
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); universe];
    for (i, s) in sets.iter().enumerate() {
        for &x in s {
            containing[x].push(i);
        }
    }

    // greedy cover as the starting incumbent
    let mut covered = vec![0u64; words];
    let mut best = 0;
    let mut left = universe;
    while left > 0 {
        let (i, gain) = masks
            .iter()
            .enumerate()
            .map(|(i, m)| (i, count_new(m, &covered)))
            .max_by_key(|&(i, g)| (g, std::cmp::Reverse(i)))
            .expect("nonempty");
        for (c, m) in covered.iter_mut().zip(&masks[i]) {
            *c |= m;
        }
        left -= gain as usize;
        best += 1;
    }

    struct Search<'a> {
        masks: &'a [Bits],
        containing: &'a [Vec<usize>],
        largest: usize,
        universe: usize,
        best: usize,
    }

    impl Search<'_> {
        fn run(&mut self, covered: &mut Bits, left: usize, used: usize) {
            if left == 0 {
                self.best = self.best.min(used);
                return;
            }
            if used + left.div_ceil(self.largest) >= self.best {
                return;
            }
            // branch on the uncovered element with the fewest candidate sets
            let pick = (0..self.universe)
                .filter(|&x| covered[x / 64] >> (x % 64) & 1 == 0)
                .min_by_key(|&x| self.containing[x].len())
                .expect("left > 0");
            let mut options: Vec<(u32, usize)> = self.containing[pick]
                .iter()
                .map(|&i| (count_new(&self.masks[i], covered), i))
                .collect();
            options.sort_by(|a, b| b.cmp(a));
            for (gain, i) in options {
                let saved = covered.clone();
                for (c, m) in covered.iter_mut().zip(&self.masks[i]) {
                    *c |= m;
                }
                self.run(covered, left - gain as usize, used + 1);
                *covered = saved;
            }
        }
    }

    let mut search = Search {
        masks: &masks,
        containing: &containing,
        largest,
        universe,
        best,
    };
    search.run(&mut vec![0u64; words], universe, 0);
    search.best
}

/// The excess `f = (2/delta) e(S) - v(S)` of a spanned graph against the
/// covering lower bound `(l* - 1)/delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcessReport {
    pub vertices: usize,
    pub edges: usize,
    pub f: f64,
    pub l_star: usize,
    pub lower: f64,
    /// `e(S) / (2 delta q^2)`, the edge-proportional form of the same bound.
    pub edge_scaled_lower: f64,
    /// `2e - delta v >= l* - 1` for `l* >= 2`, and `2e = delta v` for `l* = 1`,
    /// checked in integers.
    pub holds: bool,
}

pub fn excess_report(p: &Pattern, s: &SimpleGraph) -> Result<ExcessReport> {
    let l_star = minimal_spanning_count(p, s)?;
    let (e, v, d) = (s.edge_count(), s.non_isolated().len(), p.delta());
    let scaled = 2 * e as i64 - (d * v) as i64;
    let holds = if l_star >= 2 {
        scaled >= l_star as i64 - 1
    } else {
        scaled == 0
    };
    Ok(ExcessReport {
        vertices: v,
        edges: e,
        f: 2.0 * e as f64 / d as f64 - v as f64,
        l_star,
        lower: (l_star as f64 - 1.0) / d as f64,
        edge_scaled_lower: e as f64 / (2.0 * d as f64 * (p.q() * p.q()) as f64),
        holds,
    })
}

/// Class sizes `c_i = #{j : 2^i <= l_j < 2^(i+1)}` for `i = 0..=t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicProfile {
    pub c: Vec<u64>,
    pub t: usize,
}

impl DyadicProfile {
    /// `sum_i c_i 2^i`.
    pub fn weighted_sum(&self) -> u128 {
        self.c
            .iter()
            .enumerate()
            .map(|(i, &c)| (c as u128) << i)
            .sum()
    }
}

pub fn dyadic_profile(ls: &[u64]) -> Result<DyadicProfile> {
    if let Some(&l) = ls.iter().find(|&&l| l < 2) {
        return Err(Error::Domain(format!("copy count {l} below 2")));
    }
    let t = ls.iter().map(|&l| l.ilog2() as usize).max().unwrap_or(0);
    let mut c = vec![0u64; t + 1];
    for &l in ls {
        c[l.ilog2() as usize] += 1;
    }
    Ok(DyadicProfile { c, t })
}

/// `sum l >= sum c_i 2^i >= (sum l) / 2`.
pub fn dyadic_sandwich_holds(ls: &[u64], profile: &DyadicProfile) -> bool {
    let total: u128 = ls.iter().map(|&l| l as u128).sum();
    let w = profile.weighted_sum();
    total >= w && 2 * w >= total
}

/// Union of the first `target` copies in breadth-first order over the
/// copy-intersection graph, rooted at the first copy. Every prefix of that
/// order has a connected union.
pub fn truncate_spanned(p: &Pattern, s: &SimpleGraph, target: usize) -> Result<SimpleGraph> {
    if target == 0 {
        return Err(Error::Domain("target must be positive".into()));
    }
    let copies = spanning_copies(p, s)?;
    if copies.len() < target {
        return Err(Error::NotEnoughCopies {
            available: copies.len(),
            requested: target,
        });
    }
    let mut seen = vec![false; copies.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut out = SimpleGraph::empty(s.vertex_count());
    let mut taken = 0;
    while let Some(i) = queue.pop_front() {
        for &(u, v) in &copies[i].edges {
            out.add_edge(u, v);
        }
        taken += 1;
        if taken == target {
            break;
        }
        for j in 0..copies.len() {
            if !seen[j] && copies[i].shares_vertex(&copies[j]) {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    Ok(out)
}

/// Places `l` copies of the pattern one after another, each sharing at least
/// one vertex with the union so far. Vertices are labeled in order of first
/// use and at most `pool` are used.
pub fn glue_random_spanned(
    p: &Pattern,
    l: usize,
    rng: &mut Rng,
    pool: usize,
) -> Result<SimpleGraph> {
    let q = p.q();
    if pool < q {
        return Err(Error::PoolTooSmall { pool, q });
    }
    if l == 0 {
        return Err(Error::Domain("need at least one copy".into()));
    }
    let h = p.graph();
    let mut edges: Vec<Edge> = Vec::new();
    let mut used = 0usize;
    for step in 0..l {
        let mut chosen: Vec<usize> = if step == 0 {
            (0..q).collect()
        } else {
            let fresh_room = (pool - used).min(q - 1);
            let min_shared = q - fresh_room;
            let shared = rng.gen_range(min_shared..=q.min(used));
            let mut old: Vec<usize> = (0..used).collect();
            old.shuffle(rng);
            old.truncate(shared);
            old.extend(used..used + q - shared);
            old
        };
        used = used.max(chosen.iter().max().map_or(0, |m| m + 1));
        chosen.shuffle(rng);
        edges.extend(h.edges().iter().map(|&(a, b)| (chosen[a], chosen[b])));
    }
    let mut g = SimpleGraph::empty(used);
    for (a, b) in edges {
        g.add_edge(a, b);
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{count_copies, count_copies_through_edge};
    use crate::sampling::{rng_from_seed, sample_gnp_with};

    fn k3() -> Pattern {
        Pattern::clique(3).unwrap()
    }

    fn glued_pair() -> SimpleGraph {
        SimpleGraph::from_edges(4, [(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    /// Oracle: smallest subfamily covering every edge, by subset enumeration.
    fn brute_cover(p: &Pattern, s: &SimpleGraph) -> usize {
        let copies = enumerate_copies(p, s).unwrap();
        let k = copies.len();
        assert!(k <= 20);
        (1u32..1 << k)
            .filter(|mask| {
                s.edges()
                    .iter()
                    .all(|e| (0..k).any(|i| mask >> i & 1 == 1 && copies[i].edges.contains(e)))
            })
            .map(|mask| mask.count_ones() as usize)
            .min()
            .unwrap()
    }

    #[test]
    fn decompose_examples() {
        let two =
            SimpleGraph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let d = spanned_decompose(&k3(), &two).unwrap();
        assert_eq!(d.components.len(), 2);
        assert!(d.components.iter().all(|c| c.copies.len() == 1));
        assert!(d.dropped_edges.is_empty());

        let pendant = SimpleGraph::from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        let d = spanned_decompose(&k3(), &pendant).unwrap();
        assert_eq!(d.components.len(), 1);
        assert_eq!(d.dropped_edges, vec![(2, 3)]);

        let d = spanned_decompose(&k3(), &SimpleGraph::complete(4)).unwrap();
        assert_eq!(d.components.len(), 1);
        assert_eq!(d.components[0].copies.len(), 4);
    }

    #[test]
    fn decomposition_conserves_copies() {
        let mut rng = rng_from_seed(2);
        for _ in 0..50 {
            let g = sample_gnp_with(9, 0.4, &mut rng);
            let d = spanned_decompose(&k3(), &g).unwrap();
            assert_eq!(d.copy_count() as u64, count_copies(&k3(), &g).unwrap());
            for &f in &d.dropped_edges {
                assert_eq!(count_copies_through_edge(&k3(), &g, f).unwrap(), 0);
            }
            let kept: usize = d.components.iter().map(|c| c.graph.edge_count()).sum();
            assert_eq!(kept + d.dropped_edges.len(), g.edge_count());
            for c in &d.components {
                assert!(c.graph.is_connected_ignoring_isolated());
            }
        }
    }

    #[test]
    fn cover_examples() {
        assert_eq!(
            minimal_spanning_count(&k3(), &SimpleGraph::complete(3)).unwrap(),
            1
        );
        assert_eq!(minimal_spanning_count(&k3(), &glued_pair()).unwrap(), 2);
        // any two triangles of K_4 share an edge, so two cover only five of six
        assert_eq!(
            minimal_spanning_count(&k3(), &SimpleGraph::complete(4)).unwrap(),
            3
        );
        let c4 = Pattern::cycle(4).unwrap();
        assert_eq!(
            minimal_spanning_count(&c4, &SimpleGraph::cycle(4)).unwrap(),
            1
        );
        let pendant = SimpleGraph::from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        assert!(matches!(
            minimal_spanning_count(&k3(), &pendant),
            Err(Error::NotSpanned(_))
        ));
    }

    #[test]
    fn cover_matches_subset_oracle() {
        let mut rng = rng_from_seed(8);
        for name in ["k3", "c4"] {
            let p = Pattern::by_name(name).unwrap();
            for l in 1..=5 {
                for _ in 0..10 {
                    let s = glue_random_spanned(&p, l, &mut rng, 12).unwrap();
                    if enumerate_copies(&p, &s).unwrap().len() <= 16 {
                        assert_eq!(minimal_spanning_count(&p, &s).unwrap(), brute_cover(&p, &s));
                    }
                }
            }
        }
        for s in 5..=6 {
            let k = SimpleGraph::complete(s);
            assert_eq!(
                minimal_spanning_count(&k3(), &k).unwrap(),
                brute_cover(&k3(), &k)
            );
        }
    }

    #[test]
    fn excess_examples() {
        let r = excess_report(&k3(), &SimpleGraph::complete(3)).unwrap();
        assert_eq!((r.f, r.l_star, r.holds), (0.0, 1, true));
        let r = excess_report(&k3(), &glued_pair()).unwrap();
        assert_eq!((r.f, r.l_star, r.lower, r.holds), (1.0, 2, 0.5, true));
        let r = excess_report(&k3(), &SimpleGraph::complete(4)).unwrap();
        assert_eq!((r.f, r.l_star, r.lower, r.holds), (2.0, 3, 1.0, true));
    }

    #[test]
    fn dyadic_examples() {
        let ls = [2, 3, 5, 8];
        let d = dyadic_profile(&ls).unwrap();
        assert_eq!(d.c, vec![0, 2, 1, 1]);
        assert_eq!(d.t, 3);
        assert_eq!(d.weighted_sum(), 16);
        assert!(dyadic_sandwich_holds(&ls, &d));
        let d = dyadic_profile(&[2]).unwrap();
        assert_eq!((d.c.clone(), d.weighted_sum()), (vec![0, 1], 2));
        assert!(dyadic_profile(&[2, 1]).is_err());
    }

    #[test]
    fn truncation_examples() {
        let two = truncate_spanned(&k3(), &glued_pair(), 2).unwrap();
        assert_eq!(two, glued_pair());
        // chain of four triangles glued along edges: 0-1-2, 1-2-3, 2-3-4, 3-4-5
        let chain = SimpleGraph::from_edges(
            6,
            [
                (0, 1),
                (0, 2),
                (1, 2),
                (1, 3),
                (2, 3),
                (2, 4),
                (3, 4),
                (3, 5),
                (4, 5),
            ],
        )
        .unwrap();
        let t = truncate_spanned(&k3(), &chain, 2).unwrap();
        assert_eq!(t.edge_count(), 5);
        assert!(t.is_connected_ignoring_isolated());
        assert!(minimal_spanning_count(&k3(), &t).unwrap() <= 2);
        assert!(matches!(
            truncate_spanned(&k3(), &chain, 9),
            Err(Error::NotEnoughCopies {
                available: 4,
                requested: 9
            })
        ));
    }

    #[test]
    fn glued_graphs_are_spanned() {
        let mut rng = rng_from_seed(4);
        let one = glue_random_spanned(&k3(), 1, &mut rng, 10).unwrap();
        assert_eq!(one, SimpleGraph::complete(3));
        for _ in 0..200 {
            let g = glue_random_spanned(&k3(), 3, &mut rng, 20).unwrap();
            let d = spanned_decompose(&k3(), &g).unwrap();
            assert_eq!(d.components.len(), 1);
            assert!(d.dropped_edges.is_empty());
            assert!(g.vertex_count() <= 20);
        }
        assert!(matches!(
            glue_random_spanned(&k3(), 2, &mut rng, 2),
            Err(Error::PoolTooSmall { pool: 2, q: 3 })
        ));
    }

    #[test]
    fn truncation_of_glued_graphs() {
        let mut rng = rng_from_seed(6);
        for _ in 0..100 {
            let s = glue_random_spanned(&k3(), 5, &mut rng, 12).unwrap();
            let total = enumerate_copies(&k3(), &s).unwrap().len();
            for target in [1, 2, 4] {
                if target > total {
                    continue;
                }
                let t = truncate_spanned(&k3(), &s, target).unwrap();
                let d = spanned_decompose(&k3(), &t).unwrap();
                assert_eq!(d.components.len(), 1);
                assert!(d.dropped_edges.is_empty());
                assert!(minimal_spanning_count(&k3(), &t).unwrap() <= target);
            }
        }
    }

    #[test]
    fn excess_bound_on_glued_cycles() {
        let c4 = Pattern::cycle(4).unwrap();
        let mut rng = rng_from_seed(10);
        for _ in 0..200 {
            let s = glue_random_spanned(&c4, 6, &mut rng, 30).unwrap();
            assert!(excess_report(&c4, &s).unwrap().holds);
        }
    }
}
