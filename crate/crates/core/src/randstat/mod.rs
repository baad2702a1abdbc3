//! Theoretical statistics of pixel differences in perfectly shuffled and
//! perfectly encrypted images: the difference distribution induced by an
//! intensity histogram, its moments, the two-sided Z-test critical values,
//! the loss-optimal pair count, and the exact binomial quantities that bound
//! the evaluator's type I error.

mod normal;

pub use normal::{inv_norm_cdf, norm_cdf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for "these probabilities sum to one".
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Smallest pair count for which the normal approximation of the mean
/// difference is trusted.
pub const MIN_PAIRS: u64 = 30;

/// Compensated (Kahan) summation; keeps distribution identities tight even
/// for 65536-level inputs.
fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Normalized histogram over `L` intensity scales: `probs[k]` is the
/// probability of seeing a pixel at scale `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityDistribution {
    levels: u32,
    probs: Vec<f64>,
}

impl IntensityDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "need at least 2 intensity scales, got {}",
                probs.len()
            )));
        }
        if probs.len() > u32::MAX as usize {
            return Err(Error::InvalidDistribution("too many scales".into()));
        }
        if let Some(&bad) = probs.iter().find(|&&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "probabilities must be finite and non-negative, found {bad}"
            )));
        }
        let sum = kahan_sum(probs.iter().copied());
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Self { levels: probs.len() as u32, probs })
    }

    /// The uniform distribution over `levels` scales — the model of a
    /// perfectly encrypted image.
    pub fn uniform(levels: u32) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidDistribution(format!(
                "need at least 2 intensity scales, got {levels}"
            )));
        }
        let p = 1.0 / f64::from(levels);
        Ok(Self { levels, probs: vec![p; levels as usize] })
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Cumulative distribution, for inverse-CDF sampling.
    pub fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.probs
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect()
    }
}

/// Distribution of the absolute difference `|x_l - x_k|` between two distinct
/// pixels of a perfectly shuffled image, over `d ∈ [0, L-1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffDistribution {
    levels: u32,
    probs: Vec<f64>,
}

impl DiffDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidDistribution(format!(
                "need at least 2 difference values, got {}",
                probs.len()
            )));
        }
        if let Some(&bad) = probs.iter().find(|&&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "probabilities must be finite and non-negative, found {bad}"
            )));
        }
        let sum = kahan_sum(probs.iter().copied());
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(Error::InvalidDistribution(format!(
                "difference probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Self { levels: probs.len() as u32, probs })
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Mean and variance of the pixel-difference distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffStats {
    pub mean: f64,
    pub variance: f64,
}

impl DiffStats {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn is_degenerate(&self) -> bool {
        self.variance == 0.0
    }
}

/// Two-sided acceptance region for the mean difference of `pairs` disjoint
/// pixel pairs at significance `alpha`. Sample means inside `[lower, upper]`
/// are consistent with a perfectly shuffled image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalInterval {
    pub lower: f64,
    pub upper: f64,
    pub alpha: f64,
    pub pairs: u64,
}

impl CriticalInterval {
    /// Closed-interval membership.
    pub fn contains(&self, sample_mean: f64) -> bool {
        self.lower <= sample_mean && sample_mean <= self.upper
    }
}

/// Distribution of `|x_l - x_k|` for two distinct pixels drawn i.i.d. from
/// `p`:
///
/// ```text
/// P_0 = Σ_k p_k²,   P_d = 2 Σ_{k=d}^{L-1} p_{k-d} p_k   (d ≥ 1)
/// ```
pub fn diff_distribution(p: &IntensityDistribution) -> DiffDistribution {
    let probs = p.probs();
    let levels = probs.len();
    let mut out = Vec::with_capacity(levels);
    out.push(kahan_sum(probs.iter().map(|&x| x * x)));
    for d in 1..levels {
        let s = kahan_sum((d..levels).map(|k| probs[k - d] * probs[k]));
        out.push(2.0 * s);
    }
    DiffDistribution { levels: levels as u32, probs: out }
}

/// First two moments of a difference distribution. Rounding can push the
/// computed variance a hair below zero for degenerate inputs; values within
/// tolerance are clamped to exactly zero.
pub fn diff_stats(pd: &DiffDistribution) -> DiffStats {
    let probs = pd.probs();
    let mean = kahan_sum(probs.iter().enumerate().map(|(d, &p)| d as f64 * p));
    let second = kahan_sum(
        probs
            .iter()
            .enumerate()
            .map(|(d, &p)| (d as f64) * (d as f64) * p),
    );
    let mut variance = second - mean * mean;
    if variance < 0.0 {
        debug_assert!(variance > -PROB_SUM_TOL, "variance {variance} beyond rounding noise");
        variance = 0.0;
    }
    DiffStats { mean, variance }
}

/// Closed-form difference distribution for the uniform histogram (the
/// perfectly encrypted case): the triangular distribution
/// `P_0 = 1/L`, `P_d = 2(L-d)/L²`.
pub fn uniform_diff_distribution(levels: u32) -> Result<DiffDistribution> {
    if levels < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 intensity scales, got {levels}"
        )));
    }
    let l = f64::from(levels);
    let mut probs = Vec::with_capacity(levels as usize);
    probs.push(1.0 / l);
    for d in 1..levels {
        probs.push(2.0 * (l - f64::from(d)) / (l * l));
    }
    Ok(DiffDistribution { levels, probs })
}

/// Closed-form moments of the uniform-case difference distribution:
/// `μ_e = (L²-1)/(3L)`, `σ_e² = (L²-1)(L²+2)/(18L²)`.
pub fn uniform_stats(levels: u32) -> Result<DiffStats> {
    if levels < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 intensity scales, got {levels}"
        )));
    }
    let l = f64::from(levels);
    let l2 = l * l;
    Ok(DiffStats {
        mean: (l2 - 1.0) / (3.0 * l),
        variance: (l2 - 1.0) * (l2 + 2.0) / (18.0 * l2),
    })
}

/// Acceptance region for the mean of `pairs` disjoint pixel differences:
///
/// ```text
/// lower = μ + Φ⁻¹(α/2)·σ/√m,   upper = μ - Φ⁻¹(α/2)·σ/√m
/// ```
///
/// (Φ⁻¹(α/2) is negative, so `lower < μ < upper`.)
pub fn critical_values(stats: &DiffStats, pairs: u64, alpha: f64) -> Result<CriticalInterval> {
    if pairs < 1 {
        return Err(Error::InvalidParameter("need at least one pixel pair".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )));
    }
    if stats.is_degenerate() {
        return Err(Error::DegenerateImage);
    }
    let q = inv_norm_cdf(alpha / 2.0)?;
    let half = q * stats.std_dev() / (pairs as f64).sqrt();
    Ok(CriticalInterval {
        lower: stats.mean + half,
        upper: stats.mean - half,
        alpha,
        pairs,
    })
}

/// Standardized test statistic `z = (ρ̃_m - μ) / (σ/√m)`.
pub fn z_statistic(sample_mean: f64, stats: &DiffStats, pairs: u64) -> Result<f64> {
    if pairs < 1 {
        return Err(Error::InvalidParameter("need at least one pixel pair".into()));
    }
    if stats.is_degenerate() {
        return Err(Error::DegenerateImage);
    }
    Ok((sample_mean - stats.mean) / (stats.std_dev() / (pairs as f64).sqrt()))
}

/// The loss a pair count incurs: test variance `σ²/m` plus localization
/// penalty `λ·m²/|Ω|`.
pub fn pair_loss(pairs: u64, stats: &DiffStats, domain_size: u64, lambda: f64) -> f64 {
    let m = pairs as f64;
    stats.variance / m + lambda * m * m / domain_size as f64
}

/// Loss-optimal pair count, before and after clamping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OptimalPairs {
    /// `⌈(σ²·|Ω|/(2λ))^(1/3)⌉`, the unconstrained minimizer rounded up.
    pub raw: u64,
    /// `raw` clamped to `[30, ⌊|Ω|/2⌋]` so the normal approximation holds and
    /// the pairs can be disjoint.
    pub chosen: u64,
}

/// Pair count minimizing [`pair_loss`], rounded toward infinity, then clamped
/// to `[30, ⌊| Ω|/2⌋]`.
pub fn optimal_m(stats: &DiffStats, domain_size: u64, lambda: f64) -> Result<OptimalPairs> {
    if domain_size < 1 {
        return Err(Error::InvalidParameter("empty pixel domain".into()));
    }
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "localization weight must be positive, got {lambda}"
        )));
    }
    if stats.is_degenerate() {
        return Err(Error::DegenerateImage);
    }
    if domain_size < 2 * MIN_PAIRS {
        return Err(Error::DomainTooSmall {
            needed: (2 * MIN_PAIRS) as usize,
            actual: domain_size as usize,
        });
    }

    let target = stats.variance * domain_size as f64 / (2.0 * lambda);
    // Smallest integer whose cube reaches the target; nudge around the
    // floating cube root so exact-cube targets land correctly.
    let mut raw = target.cbrt().ceil().max(1.0) as u64;
    while raw > 1 && cube(raw - 1) >= target {
        raw -= 1;
    }
    while cube(raw) < target {
        raw += 1;
    }

    let chosen = raw.clamp(MIN_PAIRS, domain_size / 2);
    Ok(OptimalPairs { raw, chosen })
}

fn cube(n: u64) -> f64 {
    let x = n as f64;
    x * x * x
}

/// Mean and variance of the per-round pass count when the image really is
/// perfectly shuffled: `E[r_t] = (1-α)N`, `Var[r_t] = Nα(1-α)`.
pub fn pass_count_moments(alpha: f64, n_tests: u64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "significance level must lie in (0, 1), got {alpha}"
        )));
    }
    if n_tests < 1 {
        return Err(Error::InvalidParameter("need at least one test per round".into()));
    }
    let n = n_tests as f64;
    Ok(((1.0 - alpha) * n, n * alpha * (1.0 - alpha)))
}

/// Lower binomial tail `Σ_{s=0}^{k_max} C(n,s) p^s (1-p)^(n-s)`, accumulated
/// in log space so large `n` cannot underflow.
pub fn binomial_tail(n: u64, p: f64, k_max: u64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "success probability must lie in (0, 1), got {p}"
        )));
    }
    if k_max > n {
        return Err(Error::InvalidParameter(format!(
            "tail cutoff {k_max} exceeds trial count {n}"
        )));
    }
    let ln_p = p.ln();
    let ln_q = libm::log1p(-p);
    let ln_fact_n = libm::lgamma(n as f64 + 1.0);
    let log_term = |s: u64| -> f64 {
        ln_fact_n - libm::lgamma(s as f64 + 1.0) - libm::lgamma((n - s) as f64 + 1.0)
            + s as f64 * ln_p
            + (n - s) as f64 * ln_q
    };
    // Single exponentiation at the end: accumulate exp(term - peak) and
    // rescale once.
    let peak = (0..=k_max).map(log_term).fold(f64::NEG_INFINITY, f64::max);
    let scaled = kahan_sum((0..=k_max).map(|s| (log_term(s) - peak).exp()));
    Ok((peak + scaled.ln()).exp().min(1.0))
}

/// Probability that every one of `t_rounds` rounds scores below its expected
/// pass count even though the image is perfectly shuffled:
/// `Pr(r < 1-α | H₀) = Pr(r_t < E[r_t])^T`.
pub fn type_one_error_bound(alpha: f64, n_tests: u64, t_rounds: u32) -> Result<f64> {
    if t_rounds < 1 {
        return Err(Error::InvalidParameter("need at least one round".into()));
    }
    let (mean, _) = pass_count_moments(alpha, n_tests)?;
    let cutoff = (mean.ceil() as u64).saturating_sub(1);
    let single = binomial_tail(n_tests, 1.0 - alpha, cutoff)?;
    Ok(single.powi(t_rounds as i32))
}
