//! The fixed connected regular pattern graph whose copies are counted.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SimpleGraph;

/// Largest pattern accepted; automorphisms are found by exhaustive search.
pub const MAX_PATTERN_VERTICES: usize = 10;

/// A connected `delta`-regular graph on `q >= 3` vertices with its cached invariants.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SimpleGraph", into = "SimpleGraph")]
pub struct Pattern {
    graph: SimpleGraph,
    q: usize,
    delta: usize,
    edge_count: usize,
    aut_count: u64,
}

impl TryFrom<SimpleGraph> for Pattern {
    type Error = Error;
    fn try_from(g: SimpleGraph) -> Result<Self> {
        Pattern::new(g)
    }
}

impl From<Pattern> for SimpleGraph {
    fn from(p: Pattern) -> SimpleGraph {
        p.graph
    }
}

impl Pattern {
    /// Validates `g` and computes `q`, `delta`, `e(H)` and `|Aut(H)|`.
    pub fn new(g: SimpleGraph) -> Result<Pattern> {
        let q = g.vertex_count();
        if q < 3 {
            return Err(Error::TooSmall(q));
        }
        if q > MAX_PATTERN_VERTICES {
            return Err(Error::PatternTooLarge {
                q,
                max: MAX_PATTERN_VERTICES,
            });
        }
        if !g.is_connected() {
            return Err(Error::NotConnected);
        }
        let delta = g.degree(0);
        if let Some(v) = (0..q).find(|&v| g.degree(v) != delta) {
            return Err(Error::NotRegular {
                vertex: v,
                degree: g.degree(v),
                expected: delta,
            });
        }
        let edge_count = g.edge_count();
        debug_assert_eq!(2 * edge_count, q * delta);
        let aut_count = count_automorphisms(&g);
        Ok(Pattern {
            graph: g,
            q,
            delta,
            edge_count,
            aut_count,
        })
    }

    pub fn clique(q: usize) -> Result<Pattern> {
        Pattern::new(SimpleGraph::complete(q))
    }

    pub fn cycle(q: usize) -> Result<Pattern> {
        Pattern::new(SimpleGraph::cycle(q))
    }

    /// Named patterns: `k3`, `c4`, `k4`, `k5`, and more generally `k<q>` / `c<q>`.
    pub fn by_name(name: &str) -> Result<Pattern> {
        let lower = name.to_ascii_lowercase();
        let (kind, digits) = lower.split_at(1.min(lower.len()));
        let q: usize = digits
            .parse()
            .map_err(|_| Error::Domain(format!("unknown pattern {name:?}")))?;
        match kind {
            "k" => Pattern::clique(q),
            "c" => Pattern::cycle(q),
            _ => Err(Error::Domain(format!("unknown pattern {name:?}"))),
        }
    }

    #[inline]
    pub fn graph(&self) -> &SimpleGraph {
        &self.graph
    }

    /// Vertex count `q`.
    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    /// Common degree.
    #[inline]
    pub fn delta(&self) -> usize {
        self.delta
    }

    /// `q * delta / 2`.
    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    #[inline]
    pub fn aut_count(&self) -> u64 {
        self.aut_count
    }

    /// Ordered adjacent pairs `(u, v)`, `q * delta` of them.
    pub fn ordered_edges(&self) -> Vec<(usize, usize)> {
        self.graph
            .edges()
            .iter()
            .flat_map(|&(u, v)| [(u, v), (v, u)])
            .collect()
    }

    /// Copies of the pattern inside `K_s`: `C(s, q) * q! / |Aut|`.
    pub fn copies_in_clique(&self, s: usize) -> u128 {
        if s < self.q {
            return 0;
        }
        // (s)_q / |Aut| = C(s,q) q! / |Aut|
        let falling: u128 = (0..self.q).map(|i| (s - i) as u128).product();
        falling / self.aut_count as u128
    }
}

/// Counts vertex permutations preserving adjacency by depth-first extension of
/// partial permutations; a branch dies as soon as one mapped pair disagrees.
fn count_automorphisms(g: &SimpleGraph) -> u64 {
    fn extend(g: &SimpleGraph, image: &mut Vec<usize>, used: &mut [bool]) -> u64 {
        let i = image.len();
        let q = g.vertex_count();
        if i == q {
            return 1;
        }
        let mut total = 0;
        for c in 0..q {
            if used[c] || g.degree(c) != g.degree(i) {
                continue;
            }
            if (0..i).all(|j| g.has_edge(i, j) == g.has_edge(c, image[j])) {
                used[c] = true;
                image.push(c);
                total += extend(g, image, used);
                image.pop();
                used[c] = false;
            }
        }
        total
    }
    let mut used = vec![false; g.vertex_count()];
    extend(g, &mut Vec::new(), &mut used)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: tries all q! permutations in lexicographic order.
    fn brute_aut(g: &SimpleGraph) -> u64 {
        fn perms(k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(k - 1) {
                for pos in 0..=p.len() {
                    let mut c = p.clone();
                    c.insert(pos, k - 1);
                    out.push(c);
                }
            }
            out
        }
        let q = g.vertex_count();
        perms(q)
            .into_iter()
            .filter(|p| g.edges().iter().all(|&(u, v)| g.has_edge(p[u], p[v])))
            .count() as u64
    }

    #[test]
    fn triangle() {
        let p = Pattern::clique(3).unwrap();
        assert_eq!(
            (p.q(), p.delta(), p.edge_count(), p.aut_count()),
            (3, 2, 3, 6)
        );
    }

    #[test]
    fn four_cycle() {
        let p = Pattern::cycle(4).unwrap();
        assert_eq!(
            (p.q(), p.delta(), p.edge_count(), p.aut_count()),
            (4, 2, 4, 8)
        );
        assert_eq!(brute_aut(p.graph()), 8);
    }

    #[test]
    fn cliques_have_full_symmetric_group() {
        let mut fact = 2u64;
        for q in 3..=6 {
            fact *= q as u64;
            let p = Pattern::clique(q).unwrap();
            assert_eq!(p.aut_count(), fact);
            assert_eq!(fact % p.aut_count(), 0);
        }
    }

    #[test]
    fn matches_brute_force_on_other_regular_graphs() {
        // Petersen-free small zoo: prism (3-regular on 6), K_{3,3}, C_6, cube Q_3.
        let prism = SimpleGraph::from_edges(
            6,
            [
                (0, 1),
                (1, 2),
                (0, 2),
                (3, 4),
                (4, 5),
                (3, 5),
                (0, 3),
                (1, 4),
                (2, 5),
            ],
        )
        .unwrap();
        let k33 = SimpleGraph::from_edges(
            6,
            [
                (0, 3),
                (0, 4),
                (0, 5),
                (1, 3),
                (1, 4),
                (1, 5),
                (2, 3),
                (2, 4),
                (2, 5),
            ],
        )
        .unwrap();
        let cube = SimpleGraph::from_edges(
            8,
            (0..8usize).flat_map(|v| {
                [1usize, 2, 4]
                    .into_iter()
                    .filter(move |b| v & b == 0)
                    .map(move |b| (v, v | b))
            }),
        )
        .unwrap();
        for (g, expected) in [
            (prism, 12),
            (k33, 72),
            (SimpleGraph::cycle(6), 12),
            (cube, 48),
        ] {
            let p = Pattern::new(g.clone()).unwrap();
            assert_eq!(p.aut_count(), expected);
            assert_eq!(brute_aut(&g), expected);
        }
    }

    #[test]
    fn rejects_invalid_patterns() {
        assert!(matches!(
            Pattern::new(SimpleGraph::path(3)),
            Err(Error::NotRegular { .. })
        ));
        let two_triangles =
            SimpleGraph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        assert_eq!(Pattern::new(two_triangles), Err(Error::NotConnected));
        assert_eq!(
            Pattern::new(SimpleGraph::complete(2)),
            Err(Error::TooSmall(2))
        );
        assert!(matches!(
            Pattern::clique(11),
            Err(Error::PatternTooLarge { .. })
        ));
    }

    #[test]
    fn names_and_clique_counts() {
        assert_eq!(Pattern::by_name("K4").unwrap().aut_count(), 24);
        assert!(Pattern::by_name("x3").is_err());
        let c4 = Pattern::by_name("c4").unwrap();
        assert_eq!(c4.copies_in_clique(4), 3);
        assert_eq!(c4.copies_in_clique(3), 0);
        assert_eq!(Pattern::by_name("k3").unwrap().copies_in_clique(5), 10);
    }
}
