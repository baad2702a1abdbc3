//! Grayscale image container, histogram extraction, PGM I/O, and synthetic
//! image generators.

mod pgm;

pub use pgm::{read_pgm, write_pgm};

use rand::Rng;

use crate::error::{Error, Result};
use crate::randstat::IntensityDistribution;
use crate::rng;

/// A rectangular grid of intensity samples with a declared bit depth.
///
/// `levels` is the number of intensity scales: 2 for binary, 256 for 8-bit,
/// 65536 for 16-bit. Pixels are stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: u32,
    height: u32,
    levels: u32,
    pixels: Vec<u16>,
}

impl GrayImage {
    pub const SUPPORTED_LEVELS: [u32; 3] = [2, 256, 65536];

    pub fn new(width: u32, height: u32, levels: u32, pixels: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidParameter(format!(
                "image dimensions must be positive, got {width}x{height}"
            )));
        }
        if !Self::SUPPORTED_LEVELS.contains(&levels) {
            return Err(Error::UnsupportedLevels(levels));
        }
        let expected = width as usize * height as usize;
        if pixels.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "pixel count {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        if let Some(&bad) = pixels.iter().find(|&&p| u32::from(p) >= levels) {
            return Err(Error::InvalidParameter(format!(
                "pixel value {bad} out of range for {levels} levels"
            )));
        }
        Ok(Self { width, height, levels, pixels })
    }

    pub fn constant(width: u32, height: u32, levels: u32, value: u16) -> Result<Self> {
        let n = width as usize * height as usize;
        Self::new(width, height, levels, vec![value; n])
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// Number of pixels in the domain.
    pub fn pixel_count(&self) -> usize {
        self.pixels.len()
    }

    pub fn pixels(&self) -> &[u16] {
        &self.pixels
    }

    pub fn get(&self, row: u32, col: u32) -> u16 {
        debug_assert!(row < self.height && col < self.width);
        self.pixels[row as usize * self.width as usize + col as usize]
    }

    #[inline]
    pub(crate) fn at(&self, index: usize) -> u16 {
        self.pixels[index]
    }

    /// Rebuild with the same geometry but new pixel data.
    pub(crate) fn with_pixels(&self, pixels: Vec<u16>) -> Self {
        debug_assert_eq!(pixels.len(), self.pixels.len());
        Self { width: self.width, height: self.height, levels: self.levels, pixels }
    }

    /// Raster-order bytes of an 8-bit image.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        if self.levels != 256 {
            return Err(Error::UnsupportedLevels(self.levels));
        }
        Ok(self.pixels.iter().map(|&p| p as u8).collect())
    }

    pub fn from_bytes(width: u32, height: u32, bytes: &[u8]) -> Result<Self> {
        let pixels = bytes.iter().map(|&b| u16::from(b)).collect();
        Self::new(width, height, 256, pixels)
    }
}

/// Normalized intensity histogram of an image: `p_k` is the fraction of
/// pixels at scale `k`. Counts are exact integers divided once.
pub fn histogram(image: &GrayImage) -> IntensityDistribution {
    let mut counts = vec![0u64; image.levels as usize];
    for &p in image.pixels() {
        counts[p as usize] += 1;
    }
    let total = image.pixel_count() as f64;
    let probs: Vec<f64> = counts.into_iter().map(|c| c as f64 / total).collect();
    IntensityDistribution::new(probs).expect("histogram is a valid distribution")
}

/// Draw every pixel independently from `dist` — a perfectly shuffled image by
/// construction. Inverse-CDF sampling on the seeded generator; deterministic
/// per seed.
pub fn synth_iid(width: u32, height: u32, dist: &IntensityDistribution, seed: u64) -> GrayImage {
    let cdf = dist.cdf();
    let mut rng = rng::seeded(seed);
    let n = width as usize * height as usize;
    let mut pixels = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        // First index whose cumulative probability exceeds u.
        let k = cdf.partition_point(|&c| c <= u);
        pixels.push(k.min(dist.levels() as usize - 1) as u16);
    }
    GrayImage::new(width, height, dist.levels(), pixels).expect("synthesized image is valid")
}

/// Deterministic structured test patterns, stand-ins for the strongly
/// correlated photographs and charts the evaluator is meant to reject.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    /// Smooth raster gradient: value rises with the raster index and covers
    /// every scale equally.
    Ramp,
    /// Checkerboard of 0 and `levels - 1` with 1-pixel cells.
    Checker,
    /// Horizontal bands of 0 and `levels - 1`, each 4 rows tall.
    Stripes,
}

pub const STRIPE_WIDTH: u32 = 4;

pub fn synth_structured(kind: SynthKind, levels: u32, width: u32, height: u32) -> Result<GrayImage> {
    if !GrayImage::SUPPORTED_LEVELS.contains(&levels) {
        return Err(Error::UnsupportedLevels(levels));
    }
    let n = width as usize * height as usize;
    let hi = (levels - 1) as u16;
    let mut pixels = Vec::with_capacity(n);
    for r in 0..height {
        for c in 0..width {
            let v = match kind {
                SynthKind::Ramp => {
                    let idx = r as u64 * width as u64 + c as u64;
                    (idx * levels as u64 / n as u64) as u16
                }
                SynthKind::Checker => {
                    if (r + c) % 2 == 0 {
                        0
                    } else {
                        hi
                    }
                }
                SynthKind::Stripes => {
                    if (r / STRIPE_WIDTH).is_multiple_of(2) {
                        0
                    } else {
                        hi
                    }
                }
            };
            pixels.push(v);
        }
    }
    GrayImage::new(width, height, levels, pixels)
}
