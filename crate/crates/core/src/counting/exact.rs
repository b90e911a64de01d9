//! Exact event probabilities under `G(n, p)` for tiny `n`, by summing over
//! every labeled graph on `[n]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::enumerate_copies;
use crate::error::{Error, Result};
use crate::graph::SimpleGraph;
use crate::pattern::Pattern;
use crate::sampling::{check_probability, GnpModel};

/// Largest `n` accepted: `2^21` labeled graphs.
pub const MAX_EXACT_N: usize = 7;

/// Monotone increasing graph properties with an exact oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "arg")]
pub enum EventPredicate {
    /// At least `k` copies of the pattern.
    CopiesAtLeast(usize),
    /// `s` pairwise vertex-disjoint copies.
    DisjointCopies(usize),
    /// A connected subgraph spanned by `l` copies.
    HasSpannedWithCopies(usize),
}

impl EventPredicate {
    /// Parses `copies:<k>`, `disjoint:<s>` or `spanned:<l>`.
    pub fn parse(name: &str, arg: usize) -> Result<EventPredicate> {
        match name {
            "copies" => Ok(EventPredicate::CopiesAtLeast(arg)),
            "disjoint" => Ok(EventPredicate::DisjointCopies(arg)),
            "spanned" => Ok(EventPredicate::HasSpannedWithCopies(arg)),
            other => Err(Error::Domain(format!("unknown predicate {other:?}"))),
        }
    }
}

/// Copies of the pattern in `K_n` as bitmasks over row-major pair indices.
struct CopyTable {
    edge_masks: Vec<u32>,
    vertex_masks: Vec<u16>,
    pairs: usize,
}

impl CopyTable {
    fn new(p: &Pattern, n: usize) -> Result<CopyTable> {
        let mut index = vec![0u32; n * n];
        let mut next = 0;
        for u in 0..n {
            for v in u + 1..n {
                index[u * n + v] = next;
                next += 1;
            }
        }
        let copies = enumerate_copies(p, &SimpleGraph::complete(n))?;
        Ok(CopyTable {
            edge_masks: copies
                .iter()
                .map(|c| {
                    c.edges
                        .iter()
                        .fold(0u32, |m, &(u, v)| m | 1 << index[u * n + v])
                })
                .collect(),
            vertex_masks: copies
                .iter()
                .map(|c| c.vertices.iter().fold(0u16, |m, &v| m | 1 << v))
                .collect(),
            pairs: next as usize,
        })
    }

    fn present(&self, graph: u32, out: &mut Vec<usize>) {
        out.clear();
        out.extend(
            self.edge_masks
                .iter()
                .enumerate()
                .filter(|(_, &m)| m & !graph == 0)
                .map(|(i, _)| i),
        );
    }
}

fn has_disjoint(masks: &[u16], present: &[usize], need: usize, from: usize, taken: u16) -> bool {
    if need == 0 {
        return true;
    }
    if present.len() - from < need {
        return false;
    }
    for i in from..present.len() {
        let m = masks[present[i]];
        if m & taken == 0 && has_disjoint(masks, present, need - 1, i + 1, taken | m) {
            return true;
        }
    }
    false
}

/// Largest set of copies whose union is connected. Copies sharing a vertex
/// are linked; any connected component of that graph contains connected
/// sub-unions of every smaller size.
fn largest_connected_union(masks: &[u16], present: &[usize]) -> usize {
    let k = present.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..k {
        for j in i + 1..k {
            if masks[present[i]] & masks[present[j]] != 0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut size = vec![0usize; k];
    for i in 0..k {
        let r = find(&mut parent, i);
        size[r] += 1;
    }
    size.into_iter().max().unwrap_or(0)
}

fn holds(table: &CopyTable, present: &[usize], pred: EventPredicate) -> bool {
    match pred {
        EventPredicate::CopiesAtLeast(k) => present.len() >= k,
        EventPredicate::DisjointCopies(s) => has_disjoint(&table.vertex_masks, present, s, 0, 0),
        EventPredicate::HasSpannedWithCopies(l) => {
            l == 0 || largest_connected_union(&table.vertex_masks, present) >= l
        }
    }
}

fn check_size(n: usize, p: f64) -> Result<()> {
    check_probability(p)?;
    if n > MAX_EXACT_N {
        return Err(Error::TooLarge {
            n,
            max: MAX_EXACT_N,
        });
    }
    Ok(())
}

/// Weights `p^m (1-p)^(M-m)` for each edge count `m`.
fn weights(pairs: usize, p: f64) -> Vec<f64> {
    (0..=pairs)
        .map(|m| p.powi(m as i32) * (1.0 - p).powi((pairs - m) as i32))
        .collect()
}

/// Fixed chunking of the `2^M` graphs; partial sums are combined in chunk
/// order so the result does not depend on the thread count.
fn chunked<T, F>(pairs: usize, init: impl Fn() -> T + Sync, body: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut T, u32) + Sync,
{
    let total: u64 = 1u64 << pairs;
    let chunks: u64 = total.min(64);
    let per = total / chunks;
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            for g in c * per..(c + 1) * per {
                body(&mut acc, g as u32);
            }
            acc
        })
        .collect()
}

/// `P(pred)` under `G(n, p)`, summed over all `2^(n choose 2)` labeled graphs.
pub fn exact_probability(p: &Pattern, model: &GnpModel, pred: EventPredicate) -> Result<f64> {
    check_size(model.n, model.p)?;
    let table = CopyTable::new(p, model.n)?;
    let w = weights(table.pairs, model.p);
    let parts = chunked(
        table.pairs,
        || (0.0f64, Vec::new()),
        |(sum, buf): &mut (f64, Vec<usize>), g| {
            table.present(g, buf);
            if holds(&table, buf, pred) {
                *sum += w[g.count_ones() as usize];
            }
        },
    );
    Ok(parts.into_iter().map(|(s, _)| s).sum())
}

/// The exact law of the copy count: entry `j` is `P(Q = j)`.
pub fn exact_count_distribution(p: &Pattern, n: usize, prob: f64) -> Result<Vec<f64>> {
    check_size(n, prob)?;
    let table = CopyTable::new(p, n)?;
    let w = weights(table.pairs, prob);
    let len = table.edge_masks.len() + 1;
    let parts = chunked(
        table.pairs,
        || vec![0.0f64; len],
        |acc: &mut Vec<f64>, g| {
            let count = table.edge_masks.iter().filter(|&&m| m & !g == 0).count();
            acc[count] += w[g.count_ones() as usize];
        },
    );
    let mut out = vec![0.0; len];
    for part in parts {
        for (o, x) in out.iter_mut().zip(part) {
            *o += x;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k3() -> Pattern {
        Pattern::clique(3).unwrap()
    }

    fn model(n: usize, p: f64) -> GnpModel {
        GnpModel::new(n, p, 0).unwrap()
    }

    #[test]
    fn trivial_event_has_probability_one() {
        let pr =
            exact_probability(&k3(), &model(5, 0.3), EventPredicate::CopiesAtLeast(0)).unwrap();
        assert!((pr - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_triangle_on_three_vertices() {
        let p = 0.37;
        let pr = exact_probability(&k3(), &model(3, p), EventPredicate::CopiesAtLeast(1)).unwrap();
        assert!((pr - p * p * p).abs() < 1e-15);
    }

    #[test]
    fn bk_instance_at_n6() {
        let m = model(6, 1.0 / 6.0);
        let d1 = exact_probability(&k3(), &m, EventPredicate::DisjointCopies(1)).unwrap();
        let d2 = exact_probability(&k3(), &m, EventPredicate::DisjointCopies(2)).unwrap();
        assert!(d2 <= d1 * d1, "{d2} > {d1}^2");
        assert!(d2 > 0.0);
    }

    #[test]
    fn distribution_sums_to_one_and_matches_tail() {
        let dist = exact_count_distribution(&k3(), 5, 0.4).unwrap();
        assert!((dist.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let tail: f64 = dist[2..].iter().sum();
        let direct =
            exact_probability(&k3(), &model(5, 0.4), EventPredicate::CopiesAtLeast(2)).unwrap();
        assert!((tail - direct).abs() < 1e-12);
    }

    #[test]
    fn one_copy_events_coincide() {
        let m = model(5, 0.3);
        let a = exact_probability(&k3(), &m, EventPredicate::CopiesAtLeast(1)).unwrap();
        let b = exact_probability(&k3(), &m, EventPredicate::DisjointCopies(1)).unwrap();
        let c = exact_probability(&k3(), &m, EventPredicate::HasSpannedWithCopies(1)).unwrap();
        assert!((a - b).abs() < 1e-15 && (a - c).abs() < 1e-15);
    }

    #[test]
    fn spanned_event_ordering() {
        // Any l+1 copies with connected union contain l of them with connected union.
        let m = model(6, 0.3);
        let mut last = 1.0;
        for l in 1..6 {
            let pr = exact_probability(&k3(), &m, EventPredicate::HasSpannedWithCopies(l)).unwrap();
            assert!(pr <= last + 1e-15);
            last = pr;
        }
    }

    #[test]
    fn monotone_in_p() {
        let mut prev = 0.0;
        for p in [0.05, 0.1, 0.2, 0.4] {
            let pr =
                exact_probability(&k3(), &model(6, p), EventPredicate::DisjointCopies(2)).unwrap();
            assert!(pr >= prev);
            prev = pr;
        }
    }

    #[test]
    fn rejects_large_n() {
        assert_eq!(
            exact_probability(&k3(), &model(8, 0.1), EventPredicate::CopiesAtLeast(1)),
            Err(Error::TooLarge { n: 8, max: 7 })
        );
    }
}
