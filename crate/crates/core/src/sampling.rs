//! Erdős–Rényi sampling, edge thinning and the seeded RNG streams used everywhere.
//!
//! Potential edges are visited in row-major order `(0,1), (0,2), .., (n-2,n-1)`.
//! Dense probabilities draw one uniform per pair; sparse ones draw geometric
//! gaps between successive present pairs. Both are pure functions of the seed.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SimpleGraph;

/// The library-wide generator: portable, seedable and splittable into streams.
pub type Rng = ChaCha8Rng;

/// Below this edge probability sampling switches to geometric gaps.
const SPARSE_CUTOFF: f64 = 0.2;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded with `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GnpModel {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
}

impl GnpModel {
    pub fn new(n: usize, p: f64, seed: u64) -> Result<GnpModel> {
        check_probability(p)?;
        Ok(GnpModel { n, p, seed })
    }

    pub fn sample(&self) -> SimpleGraph {
        sample_gnp_with(self.n, self.p, &mut rng_from_seed(self.seed))
    }
}

pub(crate) fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability {p} outside [0, 1]")))
    }
}

/// `n^(-2/delta)`, the edge probability making the expected pattern count order one.
pub fn threshold_probability(n: usize, delta: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("threshold needs n >= 2, got {n}")));
    }
    if delta < 2 {
        return Err(Error::Domain(format!(
            "threshold needs delta >= 2, got {delta}"
        )));
    }
    Ok((n as f64).powf(-2.0 / delta as f64))
}

/// Samples `G(n, p)` from the model's own seed.
pub fn sample_gnp(model: &GnpModel) -> SimpleGraph {
    model.sample()
}

/// Samples `G(n, p)` drawing from `rng`.
pub fn sample_gnp_with(n: usize, p: f64, rng: &mut Rng) -> SimpleGraph {
    let mut g = SimpleGraph::empty(n);
    if n < 2 || p <= 0.0 {
        return g;
    }
    if p >= SPARSE_CUTOFF {
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen::<f64>() < p {
                    g.add_edge(u, v);
                }
            }
        }
        return g;
    }
    // Geometric gaps: the number of absent pairs before the next present one.
    let log_q = (-p).ln_1p();
    let (mut u, mut v) = (0usize, 0usize);
    loop {
        let r: f64 = 1.0 - rng.gen::<f64>();
        let gap = (r.ln() / log_q).floor();
        // advance v by gap + 1 within row-major order
        let mut step = if gap >= (n * n) as f64 {
            usize::MAX
        } else {
            gap as usize + 1
        };
        loop {
            let room = n - 1 - v;
            if step <= room {
                v += step;
                break;
            }
            step -= room;
            u += 1;
            if u >= n - 1 {
                return g;
            }
            v = u;
        }
        g.add_edge(u, v);
    }
}

/// Keeps each edge of `g` independently with probability `keep`.
pub fn thin_edges(g: &SimpleGraph, keep: f64, rng: &mut Rng) -> Result<SimpleGraph> {
    check_probability(keep)?;
    let mut out = SimpleGraph::empty(g.vertex_count());
    for &(u, v) in g.edges() {
        if rng.gen::<f64>() < keep {
            out.add_edge(u, v);
        }
    }
    Ok(out)
}
