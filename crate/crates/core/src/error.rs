use thiserror::Error;

/// Detailed reason a PGM payload was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PgmErrorKind {
    /// First two bytes are neither `P2` nor `P5`.
    BadMagic,
    /// Header ended before the named field.
    MissingField(&'static str),
    /// The named header field is not a valid decimal number.
    BadField(&'static str),
    /// Maxval other than 255 or 65535.
    UnsupportedMaxval(u64),
    /// Pixel payload shorter than the header promises.
    Truncated { expected: usize, actual: usize },
    /// Extra bytes after the pixel payload.
    TrailingBytes(usize),
    /// A sample value exceeds the declared maxval.
    SampleOutOfRange { value: u32, maxval: u32 },
}

impl std::fmt::Display for PgmErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PgmErrorKind::BadMagic => write!(f, "magic number is not P2 or P5"),
            PgmErrorKind::MissingField(name) => write!(f, "header ended before {name}"),
            PgmErrorKind::BadField(name) => write!(f, "{name} is not a valid number"),
            PgmErrorKind::UnsupportedMaxval(v) => {
                write!(f, "maxval {v} unsupported (expected 255 or 65535)")
            }
            PgmErrorKind::Truncated { expected, actual } => {
                write!(f, "payload truncated: expected {expected} bytes, got {actual}")
            }
            PgmErrorKind::TrailingBytes(n) => write!(f, "{n} unexpected trailing bytes"),
            PgmErrorKind::SampleOutOfRange { value, maxval } => {
                write!(f, "sample {value} exceeds maxval {maxval}")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The pixel-difference variance is zero (constant image). The Z statistic
    /// is undefined; such an image is trivially distinguishable from a
    /// perfectly shuffled one.
    #[error("degenerate image: zero pixel-difference variance")]
    DegenerateImage,

    #[error("image domain too small: need at least {needed} pixels, have {actual}")]
    DomainTooSmall { needed: usize, actual: usize },

    #[error("image is {width}x{height}; this operation requires a square image")]
    NonSquare { width: u32, height: u32 },

    #[error("unsupported intensity levels: {0}")]
    UnsupportedLevels(u32),

    #[error("PGM parse error at byte {offset}: {kind}")]
    PgmParse { offset: usize, kind: PgmErrorKind },

    #[error("no block cipher provided")]
    CipherUnavailable,
}

pub type Result<T> = std::result::Result<T, Error>;
