//! Random disjoint pixel-pair sampling.
//!
//! Two samplers are provided. [`sample_offset_pairs`] draws one random
//! displacement vector per trial and pairs `m` random base pixels with their
//! displaced partners; scanning many trials therefore probes many spatial
//! configurations (horizontal neighbors, long diagonals, ...), which is what
//! lets the test see structure. [`sample_disjoint_pairs`] instead draws `2m`
//! pixels uniformly without replacement and pairs them by draw order; it is
//! blind to pixel geometry but supports pair counts up to half the domain.
//!
//! Both samplers guarantee that all `2m` sampled locations are pairwise
//! distinct and consume randomness only from the generator they are handed.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::imgio::GrayImage;

/// `m` disjoint pixel pairs: `left[i]` is tested against `right[i]`.
/// Locations are `(row, col)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairSample {
    left: Vec<(u32, u32)>,
    right: Vec<(u32, u32)>,
    /// The shared displacement `right - left`, when the sample came from an
    /// offset configuration.
    offset: Option<(i64, i64)>,
}

impl PairSample {
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    pub fn left(&self) -> &[(u32, u32)] {
        &self.left
    }

    pub fn right(&self) -> &[(u32, u32)] {
        &self.right
    }

    pub fn offset(&self) -> Option<(i64, i64)> {
        self.offset
    }

    /// All `2m` locations are pairwise distinct.
    pub fn is_disjoint(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(2 * self.len());
        self.left
            .iter()
            .chain(&self.right)
            .all(|&loc| seen.insert(loc))
    }

    /// Every location lies inside a `width` x `height` domain.
    pub fn in_bounds(&self, width: u32, height: u32) -> bool {
        self.left
            .iter()
            .chain(&self.right)
            .all(|&(r, c)| r < height && c < width)
    }
}

/// Mean absolute intensity difference over the sampled pairs, summed exactly
/// over integers and divided once.
pub fn mean_abs_difference(image: &GrayImage, sample: &PairSample) -> f64 {
    debug_assert!(sample.in_bounds(image.width(), image.height()));
    debug_assert!(!sample.is_empty());
    let w = image.width() as usize;
    let mut sum: u64 = 0;
    for (&(lr, lc), &(rr, rc)) in sample.left.iter().zip(&sample.right) {
        let a = image.at(lr as usize * w + lc as usize);
        let b = image.at(rr as usize * w + rc as usize);
        sum += u64::from(a.abs_diff(b));
    }
    sum as f64 / sample.len() as f64
}

/// Draw `2m` locations uniformly without replacement and pair them
/// alternately by draw order (first draw = left of pair 0, second draw =
/// right of pair 0, ...).
///
/// Implemented as a sparse Fisher-Yates over the flat pixel domain, so it
/// stays exact up to `m = ⌊|domain|/2⌋`, where it degenerates into an
/// exhaustive draw.
pub fn sample_disjoint_pairs(
    width: u32,
    height: u32,
    m: usize,
    rng: &mut ChaCha8Rng,
) -> Result<PairSample> {
    let total = width as u64 * height as u64;
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one pixel pair".into()));
    }
    if 2 * m as u64 > total {
        return Err(Error::DomainTooSmall { needed: 2 * m, actual: total as usize });
    }

    let mut swapped: HashMap<u64, u64> = HashMap::with_capacity(2 * m);
    let mut left = Vec::with_capacity(m);
    let mut right = Vec::with_capacity(m);
    for j in 0..(2 * m as u64) {
        let r = rng.random_range(j..total);
        let picked = *swapped.get(&r).unwrap_or(&r);
        let displaced = *swapped.get(&j).unwrap_or(&j);
        swapped.insert(r, displaced);
        let loc = ((picked / u64::from(width)) as u32, (picked % u64::from(width)) as u32);
        if j % 2 == 0 {
            left.push(loc);
        } else {
            right.push(loc);
        }
    }

    let sample = PairSample { left, right, offset: None };
    debug_assert!(sample.is_disjoint());
    Ok(sample)
}

/// Reusable per-thread state for offset sampling: a stamp per pixel marking
/// the epoch in which it was last used, so "clear the used set" is a counter
/// increment.
#[derive(Debug)]
pub(crate) struct SampleScratch {
    stamps: Vec<u32>,
    epoch: u32,
}

impl SampleScratch {
    pub(crate) fn new(width: u32, height: u32) -> Self {
        Self { stamps: vec![0; width as usize * height as usize], epoch: 0 }
    }

    fn next_epoch(&mut self) -> u32 {
        if self.epoch == u32::MAX {
            self.stamps.fill(0);
            self.epoch = 0;
        }
        self.epoch += 1;
        self.epoch
    }
}

/// Attempts to find a workable displacement before giving up.
const MAX_OFFSET_ATTEMPTS: usize = 1000;

/// Draw one uniformly random nonzero displacement, then pair `m` random base
/// pixels with their displaced partners, rejecting any location already used
/// in this trial. Displacements whose in-bounds base region cannot loosely
/// host `2m` distinct locations are redrawn.
pub fn sample_offset_pairs(
    width: u32,
    height: u32,
    m: usize,
    rng: &mut ChaCha8Rng,
) -> Result<PairSample> {
    let mut scratch = SampleScratch::new(width, height);
    sample_offset_pairs_scratch(&mut scratch, width, height, m, rng)
}

pub(crate) fn sample_offset_pairs_scratch(
    scratch: &mut SampleScratch,
    width: u32,
    height: u32,
    m: usize,
    rng: &mut ChaCha8Rng,
) -> Result<PairSample> {
    let (w, h) = (i64::from(width), i64::from(height));
    let total = w * h;
    if m == 0 {
        return Err(Error::InvalidParameter("need at least one pixel pair".into()));
    }
    // Rejection sampling needs headroom: the base region of the chosen
    // displacement must be at least 4m, which always exists when the domain
    // holds 8m pixels.
    if 8 * m as i64 > total {
        return Err(Error::DomainTooSmall { needed: 8 * m, actual: total as usize });
    }
    debug_assert_eq!(scratch.stamps.len(), total as usize);

    for _ in 0..MAX_OFFSET_ATTEMPTS {
        let dr = rng.random_range(-(h - 1)..=(h - 1));
        let dc = rng.random_range(-(w - 1)..=(w - 1));
        if dr == 0 && dc == 0 {
            continue;
        }
        let base_rows = h - dr.abs();
        let base_cols = w - dc.abs();
        if base_rows * base_cols < 4 * m as i64 {
            continue;
        }
        let row0 = if dr < 0 { -dr } else { 0 };
        let col0 = if dc < 0 { -dc } else { 0 };

        let epoch = scratch.next_epoch();
        let mut left = Vec::with_capacity(m);
        let mut right = Vec::with_capacity(m);
        let budget = 40 * m + 400;
        for _ in 0..budget {
            let br = row0 + rng.random_range(0..base_rows);
            let bc = col0 + rng.random_range(0..base_cols);
            let a = (br * w + bc) as usize;
            let b = ((br + dr) * w + (bc + dc)) as usize;
            if scratch.stamps[a] == epoch || scratch.stamps[b] == epoch {
                continue;
            }
            scratch.stamps[a] = epoch;
            scratch.stamps[b] = epoch;
            left.push((br as u32, bc as u32));
            right.push(((br + dr) as u32, (bc + dc) as u32));
            if left.len() == m {
                let sample = PairSample { left, right, offset: Some((dr, dc)) };
                debug_assert!(sample.is_disjoint());
                debug_assert!(sample.in_bounds(width, height));
                return Ok(sample);
            }
        }
        // Stalled near saturation; try a different displacement.
    }
    Err(Error::DomainTooSmall { needed: 8 * m, actual: total as usize })
}
