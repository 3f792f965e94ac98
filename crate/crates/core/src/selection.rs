//! Top-cited core selection and discrete power-law fitting of citation counts.
//!
//! The fit follows the usual discrete maximum-likelihood recipe: for every candidate lower
//! cutoff the exponent maximizing the tail likelihood is found numerically, and the cutoff
//! whose fitted CDF is closest (Kolmogorov–Smirnov) to the empirical tail is kept.

use rand::RngExt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::CitationNetwork;
use crate::error::{Error, Result};

/// What "most cited" is measured by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankBy {
    /// Citations received inside the corpus.
    #[default]
    InDegree,
    /// The optional `ext_citations` node field.
    ExternalCitations,
}

/// Induced sub-network on the `ceil(fraction * n)` most cited documents. Every document tied
/// with the last one selected is kept as well, so the result can exceed the target size.
pub fn select_top_cited(net: &CitationNetwork, fraction: f64, rank_by: RankBy) -> Result<CitationNetwork> {
    let nodes = top_cited_nodes(net, fraction, rank_by)?;
    Ok(net.induced(&nodes))
}

/// Indices (ascending) of the documents [`select_top_cited`] keeps.
pub fn top_cited_nodes(net: &CitationNetwork, fraction: f64, rank_by: RankBy) -> Result<Vec<usize>> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidParameter(format!("fraction must lie in (0, 1], got {fraction}")));
    }
    if net.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let ranks: Vec<u64> = (0..net.len())
        .map(|v| match rank_by {
            RankBy::InDegree => Ok(net.in_degree(v) as u64),
            RankBy::ExternalCitations => net
                .document(v)
                .ext_citations
                .ok_or_else(|| Error::MissingExternalCitations(net.id(v).to_string())),
        })
        .collect::<Result<_>>()?;
    let n = net.len();
    // guard against 0.7 * 10 = 7.000000000000001
    let target = ((fraction * n as f64) - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    let mut sorted = ranks.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let boundary = sorted[target - 1];
    Ok((0..n).filter(|&v| ranks[v] >= boundary).collect())
}

/// Result of a discrete power-law fit `p(x) = x^-alpha / zeta(alpha, xmin)` for `x >= xmin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub xmin: u64,
    #[serde(rename = "ks")]
    pub ks_distance: f64,
    pub n_tail: usize,
    /// Semiparametric bootstrap goodness-of-fit p-value, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
}

const ALPHA_LO: f64 = 1.0 + 1e-6;
const ALPHA_HI: f64 = 20.0;

/// Hurwitz zeta `sum_{k>=0} (q + k)^-s` for `s > 1`, `q > 0`, by Euler–Maclaurin summation.
pub fn hurwitz_zeta(s: f64, q: f64) -> f64 {
    debug_assert!(s > 1.0 && q > 0.0);
    // B_{2j} / (2j)!
    const B: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
        1.0 / 74724249600.0,
        -3617.0 / 10670622842880000.0,
    ];
    const N: usize = 12;
    let mut sum = 0.0;
    for k in 0..N {
        sum += (q + k as f64).powf(-s);
    }
    let a = q + N as f64;
    sum += a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s);
    // rising factorial s (s+1) ... (s+2j-2) times a^(-s-2j+1)
    let mut fact = s;
    let mut pow = a.powf(-s - 1.0);
    for (j, b) in B.iter().enumerate() {
        sum += b * fact * pow;
        let m = 2.0 * j as f64;
        fact *= (s + m + 1.0) * (s + m + 2.0);
        pow /= a * a;
    }
    sum
}

/// Log-likelihood of a discrete power-law tail given its size and `sum(ln x)`.
pub fn tail_log_likelihood(alpha: f64, xmin: u64, n: usize, sum_ln: f64) -> f64 {
    -(n as f64) * hurwitz_zeta(alpha, xmin as f64).ln() - alpha * sum_ln
}

/// Complementary CDF `P(X >= x)` of the fitted law.
pub fn power_law_ccdf(alpha: f64, xmin: u64, x: u64) -> f64 {
    if x <= xmin {
        1.0
    } else {
        hurwitz_zeta(alpha, x as f64) / hurwitz_zeta(alpha, xmin as f64)
    }
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Maximum-likelihood exponent for the tail `values >= xmin` (values must be sorted).
fn mle_alpha(tail: &[u64], xmin: u64) -> f64 {
    let n = tail.len();
    let sum_ln: f64 = tail.iter().map(|&x| (x as f64).ln()).sum();
    // log zeta is convex in alpha, so the likelihood is concave and golden section is exact
    golden_max(|a| tail_log_likelihood(a, xmin, n, sum_ln), ALPHA_LO, ALPHA_HI, 1e-9)
}

/// KS distance between the empirical tail and the fitted law, taken over every integer.
/// `tail` must be sorted ascending and start at or above `xmin`.
pub fn ks_distance(tail: &[u64], alpha: f64, xmin: u64) -> f64 {
    let n = tail.len() as f64;
    let z_min = hurwitz_zeta(alpha, xmin as f64);
    let model_cdf = |x: u64| 1.0 - hurwitz_zeta(alpha, (x + 1) as f64) / z_min;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < tail.len() {
        let x = tail[i];
        // just below x the empirical CDF still equals i / n
        if x > xmin {
            d = d.max((i as f64 / n - model_cdf(x - 1)).abs());
        }
        while i < tail.len() && tail[i] == x {
            i += 1;
        }
        d = d.max((i as f64 / n - model_cdf(x)).abs());
    }
    d
}

fn fit_sorted(sorted: &[u64], fixed_xmin: Option<u64>) -> Result<PowerLawFit> {
    if sorted.first() == sorted.last() {
        return Err(Error::DegenerateDistribution);
    }
    let mut candidates: Vec<(u64, usize)> = Vec::new();
    for (i, &x) in sorted.iter().enumerate() {
        if i == 0 || sorted[i - 1] != x {
            candidates.push((x, i));
        }
    }
    if let Some(x) = fixed_xmin {
        let start = sorted.partition_point(|&v| v < x);
        candidates = vec![(x, start)];
    }
    let max = *sorted.last().unwrap();
    let fits: Vec<PowerLawFit> = candidates
        .par_iter()
        .filter_map(|&(xmin, start)| {
            let tail = &sorted[start..];
            // a tail of one repeated value has no finite MLE
            if tail.len() < 2 || tail[0] == max {
                return None;
            }
            let alpha = mle_alpha(tail, xmin);
            let ks = ks_distance(tail, alpha, xmin);
            Some(PowerLawFit { alpha, xmin, ks_distance: ks, n_tail: tail.len(), p_value: None })
        })
        .collect();
    fits.into_iter()
        .reduce(|best, f| if f.ks_distance < best.ks_distance { f } else { best })
        .ok_or_else(|| Error::InsufficientData("fewer than 2 distinct tail values at every candidate xmin".into()))
}

fn positive_sorted(values: &[u64]) -> Vec<u64> {
    let zeros = values.iter().filter(|&&v| v == 0).count();
    if zeros > 0 {
        log::warn!("dropped {zeros} zero values before power-law fitting");
    }
    let mut sorted: Vec<u64> = values.iter().copied().filter(|&v| v > 0).collect();
    sorted.sort_unstable();
    sorted
}

/// Fits a discrete power law, choosing `xmin` among the observed values by minimal KS distance.
pub fn fit_power_law(values: &[u64]) -> Result<PowerLawFit> {
    let sorted = positive_sorted(values);
    if sorted.is_empty() {
        return Err(Error::InsufficientData("no positive values".into()));
    }
    fit_sorted(&sorted, None)
}

/// Fits the exponent with the cutoff held at `xmin`.
pub fn fit_power_law_with_xmin(values: &[u64], xmin: u64) -> Result<PowerLawFit> {
    if xmin == 0 {
        return Err(Error::InvalidParameter("xmin must be >= 1".into()));
    }
    let sorted = positive_sorted(values);
    if sorted.is_empty() {
        return Err(Error::InsufficientData("no positive values".into()));
    }
    fit_sorted(&sorted, Some(xmin))
}

/// Draws one value from the discrete power law by inverting its CDF.
pub fn sample_discrete_power_law<R: rand::Rng + ?Sized>(rng: &mut R, alpha: f64, xmin: u64) -> u64 {
    let u: f64 = rng.random();
    let z_min = hurwitz_zeta(alpha, xmin as f64);
    let target = 1.0 - u; // find the largest x with P(X >= x) >= target
    let ccdf = |x: u64| if x <= xmin { 1.0 } else { hurwitz_zeta(alpha, x as f64) / z_min };
    let mut lo = xmin;
    let mut hi = xmin.saturating_mul(2).max(xmin + 1);
    while ccdf(hi) >= target {
        lo = hi;
        if hi > u64::MAX / 4 {
            return hi;
        }
        hi *= 2;
    }
    // invariant: ccdf(lo) >= target > ccdf(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ccdf(mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Semiparametric bootstrap p-value for a fit: the fraction of synthetic data sets (power-law
/// tail above `xmin`, resampled empirical body below it) whose refitted KS distance is at
/// least the observed one.
pub fn bootstrap_p_value(values: &[u64], fit: &PowerLawFit, replicates: usize, seed: u64) -> Result<f64> {
    use rand::SeedableRng;
    if replicates == 0 {
        return Err(Error::InvalidParameter("bootstrap needs at least one replicate".into()));
    }
    let sorted = positive_sorted(values);
    let body: Vec<u64> = sorted.iter().copied().filter(|&v| v < fit.xmin).collect();
    let n = sorted.len();
    let p_tail = fit.n_tail as f64 / n as f64;
    let exceed: usize = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ (r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut synth: Vec<u64> = (0..n)
                .map(|_| {
                    if body.is_empty() || rng.random::<f64>() < p_tail {
                        sample_discrete_power_law(&mut rng, fit.alpha, fit.xmin)
                    } else {
                        body[rng.random_range(0..body.len())]
                    }
                })
                .collect();
            synth.sort_unstable();
            match fit_sorted(&synth, None) {
                Ok(f) if f.ks_distance >= fit.ks_distance => 1,
                Ok(_) => 0,
                // an unfittable replicate counts as at least as extreme
                Err(_) => 1,
            }
        })
        .sum();
    Ok(exceed as f64 / replicates as f64)
}
