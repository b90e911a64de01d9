//! Labeled undirected simple graphs on `0..n` and the edge-list text codec.
//!
//! The edge list is kept sorted alongside a dense adjacency matrix and
//! per-vertex neighbor lists; counting kernels use all three.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An unordered vertex pair stored with `u < v`.
pub type Edge = (usize, usize);

/// Normalizes a pair so the smaller endpoint comes first.
#[inline]
pub fn edge(u: usize, v: usize) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleGraph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<bool>,
    nbrs: Vec<Vec<usize>>,
}

impl SimpleGraph {
    /// The empty graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        SimpleGraph {
            n,
            edges: Vec::new(),
            adj: vec![false; n * n],
            nbrs: vec![Vec::new(); n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = SimpleGraph::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.insert_unchecked(u, v);
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = SimpleGraph::empty(n);
        if n >= 3 {
            for u in 0..n {
                g.insert_unchecked(u, (u + 1) % n);
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = SimpleGraph::empty(n);
        for u in 1..n {
            g.insert_unchecked(u - 1, u);
        }
        g
    }

    /// Builds a graph, rejecting self-loops, duplicates and out-of-range endpoints.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = Edge>,
    {
        let mut g = SimpleGraph::empty(n);
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Domain(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::Domain(format!("self-loop at {u}")));
            }
            if !g.add_edge(u, v) {
                return Err(Error::Domain(format!("duplicate edge ({u}, {v})")));
            }
        }
        Ok(g)
    }

    fn insert_unchecked(&mut self, u: usize, v: usize) {
        let e = edge(u, v);
        let pos = self.edges.binary_search(&e).unwrap_err();
        self.edges.insert(pos, e);
        self.adj[u * self.n + v] = true;
        self.adj[v * self.n + u] = true;
        let pu = self.nbrs[u].binary_search(&v).unwrap_err();
        self.nbrs[u].insert(pu, v);
        let pv = self.nbrs[v].binary_search(&u).unwrap_err();
        self.nbrs[v].insert(pv, u);
    }

    /// Inserts `{u, v}`; returns false if it was already present.
    ///
    /// Panics on a self-loop or an endpoint outside `0..n`.
    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        assert!(u != v, "self-loop at {u}");
        assert!(u < self.n && v < self.n, "endpoint out of range");
        if self.has_edge(u, v) {
            return false;
        }
        self.insert_unchecked(u, v);
        true
    }

    /// Removes `{u, v}`; returns false if it was absent.
    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        if !self.has_edge(u, v) {
            return false;
        }
        let e = edge(u, v);
        let pos = self.edges.binary_search(&e).unwrap();
        self.edges.remove(pos);
        self.adj[u * self.n + v] = false;
        self.adj[v * self.n + u] = false;
        let pu = self.nbrs[u].binary_search(&v).unwrap();
        self.nbrs[u].remove(pu);
        let pv = self.nbrs[v].binary_search(&u).unwrap();
        self.nbrs[v].remove(pv);
        true
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && self.adj[u * self.n + v]
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in lexicographic order.
    #[inline]
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.nbrs[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.nbrs[v].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.nbrs.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.nbrs.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Vertices with at least one incident edge.
    pub fn non_isolated(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.degree(v) > 0).collect()
    }

    /// Connectivity of the subgraph induced on non-isolated vertices.
    /// Graphs without edges count as connected.
    pub fn is_connected_ignoring_isolated(&self) -> bool {
        let active = self.non_isolated();
        match active.first() {
            None => true,
            Some(&root) => self.component_of(root).len() == active.len(),
        }
    }

    /// Connectivity over every vertex, isolated ones included.
    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.component_of(0).len() == self.n
    }

    /// Vertices reachable from `root`, sorted.
    pub fn component_of(&self, root: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![root];
        seen[root] = true;
        let mut out = Vec::new();
        while let Some(v) = stack.pop() {
            out.push(v);
            for &w in &self.nbrs[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Drops isolated vertices and relabels the rest as `0..k` in increasing order.
    /// Returns the compact graph and the original label of each new vertex.
    pub fn compact(&self) -> (SimpleGraph, Vec<usize>) {
        let keep = self.non_isolated();
        let mut index = vec![usize::MAX; self.n];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let mut g = SimpleGraph::empty(keep.len());
        for &(u, v) in &self.edges {
            g.insert_unchecked(index[u], index[v]);
        }
        (g, keep)
    }

    /// Same edges, vertex set enlarged to `n` (no-op if already that large).
    pub fn with_vertex_count(&self, n: usize) -> SimpleGraph {
        assert!(n >= self.n, "cannot shrink vertex set");
        let mut g = SimpleGraph::empty(n);
        for &(u, v) in &self.edges {
            g.insert_unchecked(u, v);
        }
        g
    }

    /// Subgraph on the same vertex set keeping only `edges`.
    pub fn edge_subgraph(&self, edges: &[Edge]) -> SimpleGraph {
        let mut g = SimpleGraph::empty(self.n);
        for &(u, v) in edges {
            debug_assert!(self.has_edge(u, v));
            g.add_edge(u, v);
        }
        g
    }

    /// Parses the `n m` / `u v` edge-list format.
    pub fn read_edge_list(text: &str) -> Result<SimpleGraph> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let (n, m) = parse_pair(hline, header)?;
        let mut g = SimpleGraph::empty(n);
        let mut seen = 0usize;
        for (line, l) in lines {
            let (u, v) = parse_pair(line, l)?;
            if u >= n || v >= n {
                return Err(Error::Parse {
                    line,
                    msg: format!("endpoint out of range 0..{n}"),
                });
            }
            if u == v {
                return Err(Error::Parse {
                    line,
                    msg: format!("self-loop at {u}"),
                });
            }
            if !g.add_edge(u, v) {
                return Err(Error::Parse {
                    line,
                    msg: format!("duplicate edge ({u}, {v})"),
                });
            }
            seen += 1;
        }
        if seen != m {
            return Err(Error::Parse {
                line: hline,
                msg: format!("header announces {m} edges, found {seen}"),
            });
        }
        Ok(g)
    }

    pub fn write_edge_list(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.n, self.edges.len()).unwrap();
        for &(u, v) in &self.edges {
            writeln!(out, "{u} {v}").unwrap();
        }
        out
    }
}

fn parse_pair(line: usize, text: &str) -> Result<(usize, usize)> {
    let mut it = text.split_whitespace();
    let mut next = || -> Result<usize> {
        let tok = it.next().ok_or(Error::Parse {
            line,
            msg: "expected two integers".into(),
        })?;
        tok.parse::<usize>().map_err(|_| Error::Parse {
            line,
            msg: format!("bad token {tok:?}"),
        })
    };
    let a = next()?;
    let b = next()?;
    if let Some(extra) = it.next() {
        return Err(Error::Parse {
            line,
            msg: format!("unexpected token {extra:?}"),
        });
    }
    Ok((a, b))
}

/// Serialized form: vertex count plus edge list.
#[derive(Serialize, Deserialize)]
struct GraphRepr {
    n: usize,
    edges: Vec<Edge>,
}

impl Serialize for SimpleGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphRepr {
            n: self.n,
            edges: self.edges.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SimpleGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = GraphRepr::deserialize(d)?;
        SimpleGraph::from_edges(r.n, r.edges).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_single_edge() {
        let g = SimpleGraph::read_edge_list("3 1\n0 1\n").unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn rejects_out_of_range_endpoint() {
        let err = SimpleGraph::read_edge_list("3 1\n0 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn rejects_bad_lines() {
        for text in [
            "3 1\n0 0\n",
            "3 2\n0 1\n1 0\n",
            "3 1\n0 x\n",
            "3 2\n0 1\n",
            "",
            "3\n",
        ] {
            assert!(
                matches!(SimpleGraph::read_edge_list(text), Err(Error::Parse { .. })),
                "{text:?} accepted"
            );
        }
    }

    #[test]
    fn k4_round_trips() {
        let k4 = SimpleGraph::complete(4);
        assert_eq!(k4.edge_count(), 6);
        let back = SimpleGraph::read_edge_list(&k4.write_edge_list()).unwrap();
        assert_eq!(back, k4);
    }

    #[test]
    fn compact_drops_isolated() {
        let g = SimpleGraph::from_edges(6, [(1, 4), (4, 5)]).unwrap();
        let (c, labels) = g.compact();
        assert_eq!(labels, vec![1, 4, 5]);
        assert_eq!(c.edges(), &[(0, 1), (1, 2)]);
        assert!(g.is_connected_ignoring_isolated());
        assert!(!g.is_connected());
    }

    #[test]
    fn add_and_remove_keep_structures_in_sync() {
        let mut g = SimpleGraph::complete(5);
        assert!(g.remove_edge(3, 1));
        assert!(!g.remove_edge(1, 3));
        assert!(!g.has_edge(1, 3));
        assert_eq!(g.degree(1), 3);
        assert!(g.add_edge(3, 1));
        assert_eq!(g, SimpleGraph::complete(5));
    }

    fn arb_graph() -> impl Strategy<Value = SimpleGraph> {
        (0usize..9).prop_flat_map(|n| {
            let pairs: Vec<Edge> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .collect();
            let len = pairs.len();
            proptest::collection::vec(any::<bool>(), len).prop_map(move |mask| {
                let chosen = pairs.iter().zip(&mask).filter(|(_, &b)| b).map(|(&e, _)| e);
                SimpleGraph::from_edges(n, chosen).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn edge_list_round_trip(g in arb_graph()) {
            let back = SimpleGraph::read_edge_list(&g.write_edge_list()).unwrap();
            prop_assert_eq!(back, g);
        }

        #[test]
        fn edge_count_within_bounds(g in arb_graph()) {
            let n = g.vertex_count();
            prop_assert!(g.edge_count() <= n * n.saturating_sub(1) / 2);
            prop_assert_eq!(g.degrees().iter().sum::<usize>(), 2 * g.edge_count());
        }
    }
}
