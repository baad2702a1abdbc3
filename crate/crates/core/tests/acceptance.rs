//! Acceptance suite: every release-gating criterion as one test that prints
//! one PASS line (run with `--nocapture` to see them).

use aes::cipher::{BlockCipherDecrypt, BlockCipherEncrypt, KeyInit};
use imgrand_core::evaluator::PairConfiguration;
use imgrand_core::transforms::{cat_map_period, derive_cipher_key};
use imgrand_core::*;

/// AES-128 plugged into the adapter's external-cipher contract.
struct Aes128Cipher(aes::Aes128);

impl Aes128Cipher {
    fn from_seed(seed: u64) -> Self {
        Self(aes::Aes128::new(&derive_cipher_key(seed).into()))
    }
}

impl BlockCipher128 for Aes128Cipher {
    fn encrypt_block(&self, block: &mut [u8; 16]) {
        let mut b = (*block).into();
        self.0.encrypt_block(&mut b);
        *block = b.into();
    }
    fn decrypt_block(&self, block: &mut [u8; 16]) {
        let mut b = (*block).into();
        self.0.decrypt_block(&mut b);
        *block = b.into();
    }
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[test]
fn acceptance_1_uniform_reference_moments() {
    let cases = [
        (2u32, 0.500, 0.500),
        (256, 85.332, 60.340),
        (65536, 21845.333, 15446.983),
    ];
    for (levels, mean, std) in cases {
        let s = uniform_stats(levels).unwrap();
        assert_eq!(round3(s.mean), mean, "L={levels} mean {}", s.mean);
        assert_eq!(round3(s.std_dev()), std, "L={levels} std {}", s.std_dev());
    }
    println!("acceptance 1 (uniform difference moments for L=2/256/65536): PASS");
}

#[test]
fn acceptance_2_optimal_pairs_and_critical_values() {
    let stats = uniform_stats(256).unwrap();
    let lambda = stats.mean / 256.0;
    let cases = [
        (256u64, 711u64, 80.90, 89.77),
        (512, 1128, 81.81, 88.85),
        (1024, 1790, 82.54, 88.13),
    ];
    for (side, pairs, lo, hi) in cases {
        let m = optimal_m(&stats, side * side, lambda).unwrap();
        assert_eq!(m.chosen, pairs, "side {side}");
        let iv = critical_values(&stats, m.chosen, 0.05).unwrap();
        assert_eq!(round2(iv.lower), lo, "side {side} lower {}", iv.lower);
        assert_eq!(round2(iv.upper), hi, "side {side} upper {}", iv.upper);
    }
    println!("acceptance 2 (encryption-mode m* and intervals for 256/512/1024): PASS");
}

#[test]
fn acceptance_3_type_one_error_constants() {
    let tail = binomial_tail(1000, 0.95, 949).unwrap();
    assert!((tail - 0.4625).abs() <= 1e-4, "tail {tail}");
    let bound = type_one_error_bound(0.05, 1000, 10).unwrap();
    assert!(bound < 5e-4, "bound {bound}");
    println!("acceptance 3 (single-round tail 0.4625, ten-round bound < 5e-4): PASS");
}

#[test]
fn acceptance_4_difference_distribution_oracle_equivalence() {
    use rand::Rng;
    let mut rng = rng::seeded(0xACC4);
    for case in 0..100 {
        let levels = rng.random_range(2..=16usize);
        let mut probs: Vec<f64> = (0..levels).map(|_| rng.random::<f64>() + 1e-4).collect();
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        let p = IntensityDistribution::new(probs.clone()).unwrap();

        // Independent oracle: accumulate p_a * p_b into bucket |a - b| over
        // every ordered pair of scales.
        let mut oracle = vec![0.0f64; levels];
        for a in 0..levels {
            for b in 0..levels {
                oracle[a.abs_diff(b)] += probs[a] * probs[b];
            }
        }

        let pd = diff_distribution(&p);
        let mut sum = 0.0;
        for (d, (&got, &want)) in pd.probs().iter().zip(&oracle).enumerate() {
            assert!((got - want).abs() < 1e-12, "case {case}, d={d}: {got} vs {want}");
            sum += got;
        }
        assert!((sum - 1.0).abs() < 1e-12, "case {case}: sum {sum}");
    }
    println!("acceptance 4 (closed form vs exhaustive pair enumeration, 100 cases): PASS");
}

/// Three non-uniform 256-level histograms.
fn calibration_distributions() -> Vec<IntensityDistribution> {
    let normalize = |mut probs: Vec<f64>| {
        let total: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= total);
        IntensityDistribution::new(probs).unwrap()
    };
    let decay = normalize((0..256).map(|k| 0.985f64.powi(k)).collect());
    let bimodal = normalize(
        (0..256)
            .map(|k| {
                let k = k as f64;
                (-((k - 64.0) / 30.0).powi(2)).exp() + 0.7 * (-((k - 200.0) / 20.0).powi(2)).exp()
            })
            .collect(),
    );
    let linear = normalize((0..256).map(|k| (k + 1) as f64).collect());
    vec![decay, bimodal, linear]
}

#[test]
fn acceptance_5_calibration_under_the_null() {
    let dists = calibration_distributions();
    let mut passing_images = 0usize;
    let mut pooled_passes = 0u64;
    let mut pooled_trials = 0u64;

    for i in 0..50u64 {
        let dist = &dists[(i % 3) as usize];
        let img = synth_iid(512, 512, dist, 9000 + i);
        let config = EvaluationConfig { seed: 40_000 + i, ..Default::default() };
        let report = run_evaluation(&img, &config).unwrap();
        if report.score >= 0.95 {
            passing_images += 1;
        }
        pooled_passes += report.round_passes.iter().map(|&r| u64::from(r)).sum::<u64>();
        pooled_trials += u64::from(config.n_tests) * u64::from(config.t_rounds);
    }

    let pooled_rate = pooled_passes as f64 / pooled_trials as f64;
    assert!(passing_images >= 49, "only {passing_images}/50 images scored >= 0.95");
    assert!(
        (pooled_rate - 0.95).abs() <= 0.01,
        "pooled per-trial pass rate {pooled_rate} outside 0.95 ± 0.01"
    );
    println!(
        "acceptance 5 (null calibration: {passing_images}/50 images pass, pooled rate {pooled_rate:.4}): PASS"
    );
}

#[test]
fn acceptance_6_discrimination_of_structure() {
    let structured = [
        ("ramp", synth_structured(SynthKind::Ramp, 256, 512, 512).unwrap()),
        ("checker", synth_structured(SynthKind::Checker, 256, 512, 512).unwrap()),
        ("stripes", synth_structured(SynthKind::Stripes, 256, 512, 512).unwrap()),
    ];

    for (name, img) in &structured {
        let config = EvaluationConfig { seed: 600, ..Default::default() };
        let original = run_evaluation(img, &config).unwrap();
        assert!(original.score < 0.95, "{name} original scored {}", original.score);

        let shuffled = rpm_shuffle(img, &TransformKey::from_seed(601));
        let reshuffled = run_evaluation(&shuffled, &config).unwrap();
        assert!(reshuffled.score >= 0.95, "{name} after rpm scored {}", reshuffled.score);
    }

    // ECB leaks the stripe structure into the ciphertext; CBC does not.
    let stripes = &structured[2].1;
    let cipher = Aes128Cipher::from_seed(77);
    let key = TransformKey::from_seed(77);
    let config = EvaluationConfig { seed: 602, ..Default::default() };

    let ecb = block_cipher_encrypt(stripes, BlockMode::Ecb, Some(&cipher), &key).unwrap();
    let ecb_report = evaluate_encryption(&ecb.image, &config).unwrap();
    assert!(ecb_report.score < 0.95, "ECB ciphertext scored {}", ecb_report.score);

    let cbc = block_cipher_encrypt(stripes, BlockMode::Cbc, Some(&cipher), &key).unwrap();
    let cbc_report = evaluate_encryption(&cbc.image, &config).unwrap();
    assert!(cbc_report.score >= 0.95, "CBC ciphertext scored {}", cbc_report.score);

    println!(
        "acceptance 6 (structure rejected, rpm passes, ECB {:.3} < 0.95 <= CBC {:.3}): PASS",
        ecb_report.score, cbc_report.score
    );
}

#[test]
fn acceptance_7_transform_invariants() {
    // Permutation transforms preserve the sorted pixel multiset exactly.
    let img = synth_structured(SynthKind::Ramp, 256, 64, 64).unwrap();
    let key = TransformKey { seed: 7, iterations: Some(3), cipher_key: None };
    let sorted = |im: &GrayImage| {
        let mut v = im.pixels().to_vec();
        v.sort_unstable();
        v
    };
    let reference = sorted(&img);
    assert_eq!(sorted(&rpm_shuffle(&img, &key)), reference);
    assert_eq!(sorted(&rcs_shuffle(&img, &key)), reference);
    assert_eq!(sorted(&arnold_shuffle(&img, &key).unwrap()), reference);

    // The cat map is bijective: shuffling an index image hits every index.
    for n in [2u32, 3, 8, 64] {
        let index = GrayImage::new(n, n, 65536, (0..n * n).map(|i| i as u16).collect()).unwrap();
        let moved = arnold_shuffle(&index, &TransformKey::from_seed(0)).unwrap();
        let mut seen = vec![false; (n * n) as usize];
        for &v in moved.pixels() {
            assert!(!seen[v as usize], "N={n}: duplicate target");
            seen[v as usize] = true;
        }
    }

    // The logistic stream cipher is an involution.
    let dist = IntensityDistribution::uniform(256).unwrap();
    for seed in 0..10u64 {
        let img = synth_iid(48, 48, &dist, 500 + seed);
        let key = TransformKey::from_seed(7000 + seed);
        let twice = logistic_encrypt(&logistic_encrypt(&img, &key).unwrap(), &key).unwrap();
        assert_eq!(twice, img, "seed {seed}");
    }

    // Period sanity: iterating the cat map for its period is the identity.
    let period = cat_map_period(64);
    let img64 = synth_structured(SynthKind::Ramp, 256, 64, 64).unwrap();
    let full = arnold_shuffle(
        &img64,
        &TransformKey { seed: 0, iterations: Some(period), cipher_key: None },
    )
    .unwrap();
    assert_eq!(full, img64);

    println!("acceptance 7 (multiset preservation, cat-map bijectivity, stream involution): PASS");
}

#[test]
fn acceptance_8_reports_identical_across_thread_counts() {
    let dist = IntensityDistribution::uniform(256).unwrap();
    let img = synth_iid(256, 256, &dist, 4242);
    let config = EvaluationConfig { seed: 99, ..Default::default() };

    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let eight = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
    let r1 = one.install(|| run_evaluation(&img, &config)).unwrap();
    let r8 = eight.install(|| run_evaluation(&img, &config)).unwrap();
    assert_eq!(r1, r8);

    // Same for the uniform-location sampler.
    let config = EvaluationConfig {
        sampler: PairConfiguration::UniformLocations,
        n_tests: 200,
        t_rounds: 3,
        seed: 99,
        ..Default::default()
    };
    let r1 = one.install(|| run_evaluation(&img, &config)).unwrap();
    let r8 = eight.install(|| run_evaluation(&img, &config)).unwrap();
    assert_eq!(r1, r8);

    println!("acceptance 8 (1-thread and 8-thread reports identical): PASS");
}

#[test]
fn acceptance_9_normal_quantile_accuracy() {
    // Independent oracle: bisection of an erfc-based normal CDF.
    fn oracle(q: f64) -> f64 {
        let cdf = |z: f64| 0.5 * libm::erfc(-z / std::f64::consts::SQRT_2);
        let (mut lo, mut hi) = (-10.0f64, 10.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cdf(mid) < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    let quantiles = [1e-6, 1e-5, 1e-4, 0.01, 0.025, 0.3, 0.7, 0.975, 0.999, 1.0 - 1e-6];
    for q in quantiles {
        let got = inv_norm_cdf(q).unwrap();
        let want = oracle(q);
        assert!((got - want).abs() <= 1e-9, "q={q}: {got} vs {want}");
    }
    println!("acceptance 9 (quantile within 1e-9 of bisection oracle at 10 points): PASS");
}
