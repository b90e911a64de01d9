//! Closed-form upper bounds on copy counts, the tail rate function and
//! binomial tail utilities. All logarithms are natural.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{Error, Result};
use crate::graph::SimpleGraph;
use crate::pattern::Pattern;

/// `n^q (2m / n^2)^(e / delta)`: bounds the homomorphism count of any graph
/// `h` with maximum degree at most `delta` into any graph with `n` vertices
/// and `m` edges.
pub fn finner_hom_bound(h: &SimpleGraph, delta: usize, n: usize, m: usize) -> Result<f64> {
    if delta == 0 || h.max_degree() > delta {
        return Err(Error::Domain(format!(
            "degree bound {delta} below maximum degree {}",
            h.max_degree()
        )));
    }
    let q = h.vertex_count() as f64;
    let e = h.edge_count() as f64;
    if n == 0 {
        return Ok(if h.vertex_count() == 0 { 1.0 } else { 0.0 });
    }
    let nf = n as f64;
    let density = 2.0 * m as f64 / (nf * nf);
    Ok(nf.powf(q) * density.powf(e / delta as f64))
}

/// The same bound for a regular pattern, which collapses to `(2m)^(q/2)`.
pub fn pattern_hom_bound(p: &Pattern, n: usize, m: usize) -> f64 {
    finner_hom_bound(p.graph(), p.delta(), n, m).expect("patterns are regular")
}

/// Fewest edges a graph can have while holding `l` copies of the pattern:
/// the least `m` with `(2m)^(q/2) >= aut * l`, found by exact integer search.
pub fn min_edges_for_copies(p: &Pattern, l: u64) -> u64 {
    if l == 0 {
        return 0;
    }
    let q = p.q() as u32;
    let target = (p.aut_count() as u128).checked_mul(l as u128);
    // (2m)^q >= target^2, with overflow meaning "certainly large enough"
    let enough = |m: u64| -> bool {
        let Some(t) = target else { return false };
        let Some(t2) = t.checked_mul(t) else {
            return (2 * m as u128).checked_pow(q).is_none();
        };
        match (2 * m as u128).checked_pow(q) {
            Some(v) => v >= t2,
            None => true,
        }
    };
    let guess = ((p.aut_count() as f64 * l as f64).powf(2.0 / q as f64) / 2.0).ceil() as u64;
    let mut m = guess.max(1);
    while m > 1 && enough(m - 1) {
        m -= 1;
    }
    while !enough(m) {
        m += 1;
    }
    m
}

/// Degrees of a distinguished planted edge `(a, b)` and the planted size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeRootedBoundInput {
    pub d_a: usize,
    pub d_b: usize,
    pub e: usize,
    pub n: usize,
    pub p: f64,
}

impl EdgeRootedBoundInput {
    fn check(&self) -> Result<()> {
        if self.d_a == 0 || self.d_b == 0 || self.e == 0 {
            return Err(Error::Domain(
                "degrees and edge count must be positive".into(),
            ));
        }
        if self.n < 2 || !(0.0..=1.0).contains(&self.p) {
            return Err(Error::Domain(format!(
                "need n >= 2 and p in [0, 1], got n={} p={}",
                self.n, self.p
            )));
        }
        Ok(())
    }
}

/// Upper bound on the expected number of copies through a planted edge:
/// `q delta n^(q-2) (d_a/n + p^delta)^((delta-1)/delta) (d_b/n + p^delta)^((delta-1)/delta)
/// (2e/n^2 + p^delta)^(q/2 - 2 + 1/delta)`.
pub fn edge_rooted_bound(p: &Pattern, input: &EdgeRootedBoundInput) -> Result<f64> {
    input.check()?;
    let (q, d) = (p.q() as f64, p.delta() as f64);
    let n = input.n as f64;
    let pd = input.p.powf(d);
    let side = (d - 1.0) / d;
    Ok(q * d
        * n.powf(q - 2.0)
        * (input.d_a as f64 / n + pd).powf(side)
        * (input.d_b as f64 / n + pd).powf(side)
        * (2.0 * input.e as f64 / (n * n) + pd).powf(q / 2.0 - 2.0 + 1.0 / d))
}

/// Bounds on copies through a planted edge that use an unplanted edge at `a`,
/// at `b`, or away from both, each scaled by `q delta * (q delta / 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutsideEdgeBounds {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub max: f64,
}

pub fn outside_edge_bounds(p: &Pattern, input: &EdgeRootedBoundInput) -> Result<OutsideEdgeBounds> {
    input.check()?;
    let (q, d) = (p.q() as f64, p.delta() as f64);
    let n = input.n as f64;
    let pd = input.p.powf(d);
    let a = input.d_a as f64 + n * pd;
    let b = input.d_b as f64 + n * pd;
    let e = 2.0 * input.e as f64 + n * n * pd;
    let prefactor = q * d * (q * d / 2.0);
    let (near, far) = ((d - 2.0) / d, (d - 1.0) / d);
    let ex = q / 2.0 - 2.0 + 1.0 / d;
    let b1 = prefactor * a.powf(near) * b.powf(far) * e.powf(ex) * input.p * n.powf(1.0 / d);
    let b2 = prefactor * a.powf(far) * b.powf(near) * e.powf(ex) * input.p * n.powf(1.0 / d);
    let b3 =
        prefactor * a.powf(far) * b.powf(far) * e.powf(q / 2.0 - 2.0) * input.p * n.powf(2.0 / d);
    Ok(OutsideEdgeBounds {
        b1,
        b2,
        b3,
        max: b1.max(b2).max(b3),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateParams {
    pub n: usize,
    pub k: u64,
    pub q: usize,
    pub delta: usize,
}

/// `min(k ln k, k^(2/q) ln n)`.
pub fn rate_l(rp: &RateParams) -> Result<f64> {
    if rp.k < 2 || rp.n < 2 || rp.q < 3 {
        return Err(Error::Domain(format!(
            "rate needs k >= 2, n >= 2, q >= 3; got k={} n={} q={}",
            rp.k, rp.n, rp.q
        )));
    }
    Ok(rate_l_ln(rp.k as f64, rp.q, (rp.n as f64).ln()))
}

/// The rate with `ln n` supplied directly.
pub fn rate_l_ln(k: f64, q: usize, ln_n: f64) -> f64 {
    (k * k.ln()).min(k.powf(2.0 / q as f64) * ln_n)
}

/// Smallest integer `k >= 2` with `k^(1 - 2/q) ln k >= ln n`, where the
/// clique branch of the rate takes over.
pub fn rate_crossover(q: usize, ln_n: f64) -> u64 {
    let a = 1.0 - 2.0 / q as f64;
    let reached = |k: u64| (k as f64).powf(a) * (k as f64).ln() >= ln_n;
    let mut hi = 2u64;
    while !reached(hi) {
        hi *= 2;
    }
    let mut lo = hi / 2;
    if reached(lo) || lo < 2 {
        return lo.max(2);
    }
    // reached(lo) false, reached(hi) true
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if reached(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// `sum x_i^(1/p) - (sum x_i)^(1/p)`, never negative.
pub fn power_sum_gap(xs: &[f64], p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("exponent {p} must exceed 1")));
    }
    if let Some(x) = xs.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::Domain(format!("negative entry {x}")));
    }
    let r = 1.0 / p;
    Ok(xs.iter().map(|x| x.powf(r)).sum::<f64>() - xs.iter().sum::<f64>().powf(r))
}

/// Minimum of `s ln s + A (k - s)^(2/q)` over integer `s` in `[0, k]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitMin {
    pub s_star: u64,
    pub value: f64,
    /// `min(k ln k, A k^(2/q)) / 10`.
    pub rhs: f64,
}

pub fn split_cost_min(k: u64, a: f64, q: usize) -> Result<SplitMin> {
    if k < 2 || !(a > 0.0) || q < 3 {
        return Err(Error::Domain(format!(
            "need k >= 2, A > 0, q >= 3; got k={k} A={a} q={q}"
        )));
    }
    let exp = 2.0 / q as f64;
    let cost = |s: u64| {
        let sf = s as f64;
        let head = if s == 0 { 0.0 } else { sf * sf.ln() };
        head + a * ((k - s) as f64).powf(exp)
    };
    let (s_star, value) = (0..=k)
        .map(|s| (s, cost(s)))
        .fold(
            (0, f64::INFINITY),
            |best, cur| if cur.1 < best.1 { cur } else { best },
        );
    let kf = k as f64;
    Ok(SplitMin {
        s_star,
        value,
        rhs: 0.1 * (kf * kf.ln()).min(a * kf.powf(exp)),
    })
}

fn check_binomial(n: u64, m: u64, p: f64) -> Result<()> {
    if m > n {
        return Err(Error::Domain(format!("threshold {m} exceeds trials {n}")));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("probability {p} outside (0, 1)")));
    }
    Ok(())
}

/// `D_KL(Ber(t) || Ber(p))` with `0 ln 0 = 0`.
pub fn kl_bernoulli(t: f64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) || !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "need t in [0, 1] and p in (0, 1); got t={t} p={p}"
        )));
    }
    let term = |x: f64, y: f64| if x == 0.0 { 0.0 } else { x * (x / y).ln() };
    Ok(term(t, p) + term(1.0 - t, 1.0 - p))
}

/// `exp(-N D_KL(M/N || p))` for `M >= Np`, and 1 below the mean.
pub fn chernoff_tail(n: u64, m: u64, p: f64) -> Result<f64> {
    check_binomial(n, m, p)?;
    if m == 0 {
        return Ok(1.0);
    }
    let t = m as f64 / n as f64;
    if t <= p {
        return Ok(1.0);
    }
    Ok((-(n as f64) * kl_bernoulli(t, p)?).exp())
}

/// `P(Bin(N, p) >= M)`, summed from the mode-free side in log space.
pub fn exact_binomial_tail(n: u64, m: u64, p: f64) -> Result<f64> {
    check_binomial(n, m, p)?;
    if m == 0 {
        return Ok(1.0);
    }
    let ln_choose = |j: u64| {
        if j == 0 || j == n {
            0.0
        } else {
            ln_binomial(n, j)
        }
    };
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let terms: Vec<f64> = (m..=n)
        .map(|j| ln_choose(j) + j as f64 * lp + (n - j) as f64 * lq)
        .collect();
    let top = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = terms.iter().map(|t| (t - top).exp()).sum();
    Ok((top + sum.ln()).exp().min(1.0))
}

/// `exp(-M ln(M / (N p)))`, the leading-order tail estimate. It is not a
/// rigorous bound at finite `N` and is reported for comparison only.
pub fn log_ratio_tail(n: u64, m: u64, p: f64) -> Result<f64> {
    check_binomial(n, m, p)?;
    if m == 0 {
        return Ok(1.0);
    }
    let mf = m as f64;
    Ok((-mf * (mf / (n as f64 * p)).ln()).exp())
}
