//! Statistical randomness evaluation for shuffled and encrypted grayscale
//! images.
//!
//! An image protected by shuffling or encryption should be indistinguishable
//! from one whose pixels are i.i.d. draws — shuffled from its own intensity
//! histogram, encrypted from the uniform distribution. This crate derives the
//! exact distribution of the absolute difference between two distinct pixels
//! under that null model, turns it into a two-sided Z-test on the mean
//! difference of `m` disjoint random pixel pairs, and wraps the test in a
//! randomized evaluation (`T` rounds of `N` trials, each trial probing a
//! fresh random spatial configuration) whose best-round pass fraction is the
//! image's score. Scores at or above `1 - α` mean the image cannot be told
//! apart from random.
//!
//! The crate also ships the reference transforms used to exercise the
//! evaluator (full random permutation, row/column shuffling, the 2D cat map,
//! a logistic-map stream cipher, ECB/CBC over an external block cipher) and
//! bit-exact PGM I/O plus synthetic image generators.
//!
//! Everything is deterministic per seed: randomness comes from ChaCha8
//! streams keyed by `(seed, round, trial)`, so results are identical at any
//! thread count.

pub mod error;
pub mod evaluator;
pub mod imgio;
pub mod randstat;
pub mod rng;
pub mod transforms;

pub use error::{Error, Result};
pub use evaluator::{
    evaluate_encryption, run_evaluation, DistributionSource, EvaluationConfig, EvaluationMode,
    EvaluationReport, PairConfiguration, PairSample, Verdict,
};
pub use imgio::{
    histogram, read_pgm, synth_iid, synth_structured, write_pgm, GrayImage, SynthKind,
};
pub use randstat::{
    binomial_tail, critical_values, diff_distribution, diff_stats, inv_norm_cdf, norm_cdf,
    optimal_m, pass_count_moments, type_one_error_bound, uniform_diff_distribution, uniform_stats,
    z_statistic, CriticalInterval, DiffDistribution, DiffStats, IntensityDistribution,
    OptimalPairs,
};
pub use transforms::{
    arnold_shuffle, block_cipher_decrypt, block_cipher_encrypt, logistic_encrypt, rcs_shuffle,
    rpm_shuffle, BlockCipher128, BlockMode, CipherImage, TransformKey,
};
