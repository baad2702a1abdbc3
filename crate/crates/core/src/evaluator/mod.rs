//! The randomized pixel-difference evaluation: T rounds of N seeded trials,
//! each trial testing the mean absolute difference of m disjoint random pixel
//! pairs against the two-sided critical interval, with the best round's pass
//! fraction reported as the score.

mod sampling;

pub use sampling::{mean_abs_difference, sample_disjoint_pairs, sample_offset_pairs, PairSample};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imgio::{histogram, GrayImage};
use crate::randstat::{
    critical_values, diff_distribution, diff_stats, optimal_m, uniform_stats, CriticalInterval,
    DiffStats, OptimalPairs, MIN_PAIRS,
};
use crate::rng;

/// Which null model the image is tested against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvaluationMode {
    /// Perfectly shuffled: the reference distribution is the image's own
    /// histogram (shuffling preserves it).
    Shuffling,
    /// Perfectly encrypted: the reference distribution is uniform.
    Encryption,
}

/// How each trial picks its m disjoint pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairConfiguration {
    /// One random displacement per trial; pairs are (base, base + offset).
    /// Sensitive to spatial structure. The default.
    RandomOffset,
    /// 2m locations uniformly without replacement, paired by draw order.
    /// Insensitive to geometry; kept for its exactly i.i.d. pair model.
    UniformLocations,
}

/// Where the reference distribution came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionSource {
    SampleHistogram,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Best round passed at least (1-alpha) of its trials.
    IndistinguishableFromRandom,
    Distinguishable,
    /// Constant image: zero difference variance, trivially distinguishable.
    DegenerateImage,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationConfig {
    /// Significance level of each trial's Z-test.
    pub alpha: f64,
    /// Trials per round (N).
    pub n_tests: u32,
    /// Rounds (T); the score is the best round's pass fraction.
    pub t_rounds: u32,
    /// Pixel pairs per trial; computed from the loss optimum when absent.
    pub pairs: Option<u64>,
    /// Localization weight in the pair-count loss; defaults to mean/levels.
    pub lambda: Option<f64>,
    pub mode: EvaluationMode,
    pub seed: u64,
    pub sampler: PairConfiguration,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            n_tests: 1000,
            t_rounds: 10,
            pairs: None,
            lambda: None,
            mode: EvaluationMode::Shuffling,
            seed: 0,
            sampler: PairConfiguration::RandomOffset,
        }
    }
}

impl EvaluationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "significance level must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.n_tests < 1 {
            return Err(Error::InvalidParameter("need at least one test per round".into()));
        }
        if self.t_rounds < 1 {
            return Err(Error::InvalidParameter("need at least one round".into()));
        }
        if let Some(m) = self.pairs {
            if m < MIN_PAIRS {
                return Err(Error::InvalidParameter(format!(
                    "pair count {m} is below the minimum {MIN_PAIRS}"
                )));
            }
        }
        if let Some(l) = self.lambda {
            if !l.is_finite() || l <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "localization weight must be positive, got {l}"
                )));
            }
        }
        Ok(())
    }
}

/// Everything a run produced, including the full configuration so the result
/// can be reproduced bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    /// Best round's pass fraction, in [0, 1] with granularity 1/N.
    pub score: f64,
    /// Pass count of each round.
    pub round_passes: Vec<u32>,
    /// Acceptance region used by every trial; absent for degenerate images.
    pub interval: Option<CriticalInterval>,
    /// Reference moments the interval was built from.
    pub stats: DiffStats,
    /// Pairs per trial actually used (after clamping).
    pub pairs_used: u64,
    /// Loss-optimal pair count before clamping.
    pub pairs_raw: u64,
    pub mode: EvaluationMode,
    pub verdict: Verdict,
    pub distribution_source: DistributionSource,
    pub config: EvaluationConfig,
}

impl EvaluationReport {
    fn degenerate(config: &EvaluationConfig, stats: DiffStats, source: DistributionSource) -> Self {
        Self {
            score: 0.0,
            round_passes: vec![0; config.t_rounds as usize],
            interval: None,
            stats,
            pairs_used: 0,
            pairs_raw: 0,
            mode: config.mode,
            verdict: Verdict::DegenerateImage,
            distribution_source: source,
            config: config.clone(),
        }
    }
}

/// Smallest domain the offset sampler accepts (8 x the 30-pair minimum).
pub const MIN_DOMAIN_OFFSET: usize = 240;
/// Smallest domain the uniform sampler accepts (2 x the 30-pair minimum).
pub const MIN_DOMAIN_UNIFORM: usize = 60;

/// Run the full randomized evaluation of `image` under `config`.
///
/// Deterministic for a fixed seed: trial `(t, i)` draws all its randomness
/// from a generator stream derived from `(seed, t, i)`, so reports are
/// identical regardless of thread count or scheduling. Trials of one round
/// sample independently of each other; pixels may recur across trials.
pub fn run_evaluation(image: &GrayImage, config: &EvaluationConfig) -> Result<EvaluationReport> {
    config.validate()?;
    let domain = image.pixel_count();
    let min_domain = match config.sampler {
        PairConfiguration::RandomOffset => MIN_DOMAIN_OFFSET,
        PairConfiguration::UniformLocations => MIN_DOMAIN_UNIFORM,
    };
    if domain < min_domain {
        return Err(Error::DomainTooSmall { needed: min_domain, actual: domain });
    }

    let (source, stats) = match config.mode {
        EvaluationMode::Shuffling => {
            let hist = histogram(image);
            let pd = diff_distribution(&hist);
            (DistributionSource::SampleHistogram, diff_stats(&pd))
        }
        EvaluationMode::Encryption => {
            (DistributionSource::Uniform, uniform_stats(image.levels())?)
        }
    };

    if stats.is_degenerate() {
        // Zero difference variance: the Z statistic is undefined and the
        // image carries no randomness. Score 0 rather than divide by zero.
        return Ok(EvaluationReport::degenerate(config, stats, source));
    }

    let lambda = config.lambda.unwrap_or(stats.mean / f64::from(image.levels()));
    let max_pairs = match config.sampler {
        PairConfiguration::RandomOffset => domain as u64 / 8,
        PairConfiguration::UniformLocations => domain as u64 / 2,
    };
    let pairs = match config.pairs {
        Some(m) => {
            if m > max_pairs {
                return Err(Error::InvalidParameter(format!(
                    "pair count {m} exceeds the {max_pairs} this sampler supports on a \
                     {domain}-pixel domain"
                )));
            }
            OptimalPairs { raw: m, chosen: m }
        }
        None => {
            let mut opt = optimal_m(&stats, domain as u64, lambda)?;
            opt.chosen = opt.chosen.min(max_pairs);
            opt
        }
    };

    let interval = critical_values(&stats, pairs.chosen, config.alpha)?;

    let (width, height) = (image.width(), image.height());
    let n = config.n_tests as usize;
    let total = n * config.t_rounds as usize;
    let m = pairs.chosen as usize;
    let seed = config.seed;
    let sampler = config.sampler;

    let outcomes: Result<Vec<u8>> = (0..total)
        .into_par_iter()
        .with_min_len(64)
        .map_init(
            || sampling::SampleScratch::new(width, height),
            |scratch, k| -> Result<u8> {
                let round = (k / n) as u32;
                let index = (k % n) as u32;
                let mut trial_rng = rng::trial(seed, round, index);
                let sample = match sampler {
                    PairConfiguration::RandomOffset => sampling::sample_offset_pairs_scratch(
                        scratch, width, height, m, &mut trial_rng,
                    )?,
                    PairConfiguration::UniformLocations => {
                        sample_disjoint_pairs(width, height, m, &mut trial_rng)?
                    }
                };
                let sample_mean = mean_abs_difference(image, &sample);
                Ok(u8::from(interval.contains(sample_mean)))
            },
        )
        .collect();
    let outcomes = outcomes?;

    let mut round_passes = vec![0u32; config.t_rounds as usize];
    for (k, &pass) in outcomes.iter().enumerate() {
        round_passes[k / n] += u32::from(pass);
    }

    let best = *round_passes.iter().max().expect("at least one round");
    let score = f64::from(best) / f64::from(config.n_tests);
    let verdict = if score >= 1.0 - config.alpha {
        Verdict::IndistinguishableFromRandom
    } else {
        Verdict::Distinguishable
    };

    Ok(EvaluationReport {
        score,
        round_passes,
        interval: Some(interval),
        stats,
        pairs_used: pairs.chosen,
        pairs_raw: pairs.raw,
        mode: config.mode,
        verdict,
        distribution_source: source,
        config: config.clone(),
    })
}

/// [`run_evaluation`] with the mode forced to [`EvaluationMode::Encryption`]:
/// the image is tested against the uniform reference distribution.
pub fn evaluate_encryption(image: &GrayImage, config: &EvaluationConfig) -> Result<EvaluationReport> {
    let mut config = config.clone();
    config.mode = EvaluationMode::Encryption;
    run_evaluation(image, &config)
}
