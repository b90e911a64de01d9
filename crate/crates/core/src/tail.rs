//! Upper-tail estimates of the copy count: Monte Carlo with score intervals,
//! exact values at tiny `n`, the Poisson check at threshold, and the two
//! constructive lower bounds.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{rate_crossover, rate_l_ln};
use crate::cores::clique_seed_size;
use crate::counting::{
    count_copies, exact_count_distribution, exact_probability, EventPredicate, MAX_EXACT_N,
};
use crate::error::{Error, Result};
use crate::pattern::Pattern;
use crate::sampling::{check_probability, sample_gnp_with, stream_rng, GnpModel};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Samples per RNG stream. Chunk `i` always uses stream `i`, so results do
/// not depend on how chunks are spread over threads.
const CHUNK: usize = 1000;

/// Stream offset separating block-occupancy sampling from tail sampling.
const BLOCK_STREAMS: u64 = 1 << 40;

/// One threshold of a tail scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub k: u64,
    pub n: usize,
    pub p: f64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Exact `P(Q >= k)`, only for `n <= 7`.
    pub exact: Option<f64>,
    /// The rate `min(k ln k, k^(2/q) ln n)`, defined for `k >= 2`.
    #[serde(rename = "L_value")]
    pub l_value: Option<f64>,
    pub clique_lb: Option<f64>,
    pub disjoint_lb: Option<f64>,
    pub samples: usize,
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z / denom * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    // the interval always contains phat; guard rounding at the ends
    (
        (center - half).clamp(0.0, phat),
        (center + half).clamp(phat, 1.0),
    )
}

/// Copy counts of `samples` independent draws of `G(n, p)`, in sample order.
pub fn sample_counts(
    p: &Pattern,
    n: usize,
    prob: f64,
    seed: u64,
    samples: usize,
) -> Result<Vec<u64>> {
    sample_counts_from(p, n, prob, seed, 0, samples)
}

fn sample_counts_from(
    p: &Pattern,
    n: usize,
    prob: f64,
    seed: u64,
    first_stream: u64,
    samples: usize,
) -> Result<Vec<u64>> {
    check_probability(prob)?;
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Result<Vec<u64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, first_stream + c as u64);
            let len = CHUNK.min(samples - c * CHUNK);
            (0..len)
                .map(|_| count_copies(p, &sample_gnp_with(n, prob, &mut rng)))
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(samples);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

fn row_from_counts(counts: &[u64], k: u64, n: usize, prob: f64) -> TailRow {
    let hits = counts.iter().filter(|&&c| c >= k).count();
    let (ci_low, ci_high) = wilson_interval(hits, counts.len(), Z_95);
    TailRow {
        k,
        n,
        p: prob,
        estimate: hits as f64 / counts.len() as f64,
        ci_low,
        ci_high,
        exact: None,
        l_value: None,
        clique_lb: None,
        disjoint_lb: None,
        samples: counts.len(),
    }
}

/// Fraction of samples with at least `k` copies and its 95% interval.
pub fn mc_tail(p: &Pattern, model: &GnpModel, k: u64, samples: usize) -> Result<TailRow> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let counts = sample_counts(p, model.n, model.p, model.seed, samples)?;
    Ok(row_from_counts(&counts, k, model.n, model.p))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonDiagnostic {
    pub lambda: f64,
    pub empirical_pmf: BTreeMap<u64, f64>,
    /// Half the L1 distance to `Poisson(lambda)`, including Poisson mass
    /// beyond the observed counts.
    pub tv_distance: f64,
    pub samples: usize,
}

/// `E Q = (n)_q / |Aut| * p^e`.
pub fn expected_copies(p: &Pattern, n: usize, prob: f64) -> f64 {
    if n < p.q() {
        return 0.0;
    }
    let falling: f64 = (0..p.q()).map(|i| (n - i) as f64).product();
    falling / p.aut_count() as f64 * prob.powi(p.edge_count() as i32)
}

fn poisson_pmf(lambda: f64, j: u64) -> f64 {
    if lambda == 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    let jf = j as f64;
    (jf * lambda.ln() - lambda - statrs::function::gamma::ln_gamma(jf + 1.0)).exp()
}

/// Total variation distance between an empirical pmf and `Poisson(lambda)`.
pub fn poisson_tv(pmf: &BTreeMap<u64, f64>, lambda: f64) -> f64 {
    let mut diff = 0.0;
    let mut covered = 0.0;
    for (&j, &f) in pmf {
        let q = poisson_pmf(lambda, j);
        covered += q;
        diff += (f - q).abs();
    }
    0.5 * (diff + (1.0 - covered).max(0.0))
}

pub fn poisson_diagnostic(
    p: &Pattern,
    model: &GnpModel,
    samples: usize,
) -> Result<PoissonDiagnostic> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let counts = sample_counts(p, model.n, model.p, model.seed, samples)?;
    let mut tally: BTreeMap<u64, usize> = BTreeMap::new();
    for c in counts {
        *tally.entry(c).or_default() += 1;
    }
    let empirical_pmf: BTreeMap<u64, f64> = tally
        .into_iter()
        .map(|(j, c)| (j, c as f64 / samples as f64))
        .collect();
    let lambda = expected_copies(p, model.n, model.p);
    Ok(PoissonDiagnostic {
        lambda,
        tv_distance: poisson_tv(&empirical_pmf, lambda),
        empirical_pmf,
        samples,
    })
}

/// `p^(s choose 2)` for the smallest clique `K_s` holding `k` copies: the
/// probability that one fixed `s`-set is complete.
pub fn clique_lower_bound(p: &Pattern, n: usize, prob: f64, k: u64) -> Result<f64> {
    check_probability(prob)?;
    let s = clique_seed_size(p, k);
    if s > n {
        return Err(Error::TooFewVertices { s, n });
    }
    Ok(prob.powi((s * (s - 1) / 2) as i32))
}

/// `r^s` where `r` is the chance that one block of `floor(n/s)` vertices
/// holds a copy; the `s` disjoint blocks are independent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisjointBound {
    pub block: usize,
    pub r: f64,
    pub r_low: f64,
    pub r_high: f64,
    /// `r` computed by exact enumeration rather than sampling.
    pub exact: bool,
    pub value: f64,
    pub low: f64,
    pub high: f64,
}

pub fn disjoint_lower_bound(
    p: &Pattern,
    n: usize,
    prob: f64,
    s: usize,
    samples: usize,
    seed: u64,
) -> Result<DisjointBound> {
    check_probability(prob)?;
    if s == 0 {
        return Err(Error::Domain("need at least one block".into()));
    }
    let m = n / s;
    if m < p.q() {
        return Err(Error::BlockTooSmall { m, q: p.q() });
    }
    let (r, r_low, r_high, exact) = if m <= MAX_EXACT_N {
        let r = exact_probability(
            p,
            &GnpModel::new(m, prob, seed)?,
            EventPredicate::CopiesAtLeast(1),
        )?;
        (r, r, r, true)
    } else {
        if samples == 0 {
            return Err(Error::Domain(
                "block too large for exact enumeration and no samples given".into(),
            ));
        }
        let counts = sample_counts_from(p, m, prob, seed, BLOCK_STREAMS, samples)?;
        let hits = counts.iter().filter(|&&c| c >= 1).count();
        let (lo, hi) = wilson_interval(hits, samples, Z_95);
        (hits as f64 / samples as f64, lo, hi, false)
    };
    let pow = |x: f64| x.powi(s as i32);
    Ok(DisjointBound {
        block: m,
        r,
        r_low,
        r_high,
        exact,
        value: pow(r),
        low: pow(r_low),
        high: pow(r_high),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scan {
    pub rows: Vec<TailRow>,
    /// Smallest `k` with `k^(1 - 2/q) ln k >= ln n`.
    pub crossover: u64,
    /// First scanned `k >= 2` where the clique branch attains the rate.
    pub crossover_in_range: Option<u64>,
}

/// Tail rows for every `k` in `ks`. Edge probability defaults to the threshold.
pub fn scan_phase_transition(
    p: &Pattern,
    n: usize,
    prob: f64,
    ks: &[u64],
    samples: usize,
    seed: u64,
) -> Result<Scan> {
    if samples == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    let counts = sample_counts(p, n, prob, seed, samples)?;
    let exact = if n <= MAX_EXACT_N {
        Some(exact_count_distribution(p, n, prob)?)
    } else {
        None
    };
    let ln_n = (n as f64).ln();
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let mut row = row_from_counts(&counts, k, n, prob);
        row.exact = exact
            .as_ref()
            .map(|d| d.iter().skip(k as usize).sum::<f64>().min(1.0));
        row.l_value = (k >= 2 && n >= 2).then(|| rate_l_ln(k as f64, p.q(), ln_n));
        row.clique_lb = clique_lower_bound(p, n, prob, k).ok();
        row.disjoint_lb = if k >= 1 {
            disjoint_lower_bound(p, n, prob, k as usize, samples, seed.wrapping_add(k))
                .ok()
                .map(|d| d.value)
        } else {
            None
        };
        rows.push(row);
    }
    let crossover_in_range = ks.iter().copied().find(|&k| {
        k >= 2 && (k as f64) * (k as f64).ln() >= (k as f64).powf(2.0 / p.q() as f64) * ln_n
    });
    Ok(Scan {
        rows,
        crossover: rate_crossover(p.q(), ln_n),
        crossover_in_range,
    })
}

/// Writes rows under the header `k,n,p,estimate,ci_low,ci_high,exact,L_value,clique_lb,disjoint_lb,samples`.
/// Absent values are empty fields.
pub fn write_csv<W: Write>(rows: &[TailRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)
            .map_err(|e| Error::Domain(format!("csv: {e}")))?;
    }
    if rows.is_empty() {
        w.write_record([
            "k",
            "n",
            "p",
            "estimate",
            "ci_low",
            "ci_high",
            "exact",
            "L_value",
            "clique_lb",
            "disjoint_lb",
            "samples",
        ])
        .map_err(|e| Error::Domain(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::Domain(format!("csv: {e}")))?;
    Ok(())
}
