//! Bit-exact PGM (Portable GrayMap) reading and writing.
//!
//! Supported: magic `P2` (ASCII) and `P5` (binary), maxval 255 or 65535,
//! `#` comments anywhere whitespace is allowed in the header, 16-bit binary
//! samples big-endian per the Netpbm convention. Every rejection carries the
//! byte offset where parsing stopped.

use crate::error::{Error, PgmErrorKind, Result};
use crate::imgio::GrayImage;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn fail(&self, kind: PgmErrorKind) -> Error {
        Error::PgmParse { offset: self.pos, kind }
    }

    /// Skip whitespace and `#` comment lines.
    fn skip_separators(&mut self) {
        while self.pos < self.bytes.len() {
            let b = self.bytes[self.pos];
            if b.is_ascii_whitespace() {
                self.pos += 1;
            } else if b == b'#' {
                while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                    self.pos += 1;
                }
            } else {
                break;
            }
        }
    }

    /// Read one unsigned decimal token.
    fn read_number(&mut self, field: &'static str) -> Result<u64> {
        self.skip_separators();
        if self.pos >= self.bytes.len() {
            return Err(self.fail(PgmErrorKind::MissingField(field)));
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.fail(PgmErrorKind::BadField(field)));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).expect("ascii digits");
        text.parse::<u64>().map_err(|_| Error::PgmParse {
            offset: start,
            kind: PgmErrorKind::BadField(field),
        })
    }
}

/// Parse a PGM byte stream into a [`GrayImage`]. Lossless inverse of
/// [`write_pgm`] for supported images.
pub fn read_pgm(bytes: &[u8]) -> Result<GrayImage> {
    let mut cur = Cursor::new(bytes);
    if bytes.len() < 2 || bytes[0] != b'P' || !(bytes[1] == b'2' || bytes[1] == b'5') {
        return Err(cur.fail(PgmErrorKind::BadMagic));
    }
    let binary = bytes[1] == b'5';
    cur.pos = 2;

    let width = cur.read_number("width")?;
    let height = cur.read_number("height")?;
    let maxval = cur.read_number("maxval")?;
    if maxval != 255 && maxval != 65535 {
        return Err(cur.fail(PgmErrorKind::UnsupportedMaxval(maxval)));
    }
    if width == 0 || width > u64::from(u32::MAX) || height == 0 || height > u64::from(u32::MAX) {
        return Err(cur.fail(PgmErrorKind::BadField("dimensions")));
    }
    let count = (width as usize)
        .checked_mul(height as usize)
        .ok_or_else(|| cur.fail(PgmErrorKind::BadField("dimensions")))?;

    let pixels = if binary {
        // Exactly one whitespace byte separates the header from the payload.
        if cur.pos >= bytes.len() || !bytes[cur.pos].is_ascii_whitespace() {
            return Err(cur.fail(PgmErrorKind::MissingField("payload separator")));
        }
        cur.pos += 1;
        let bytes_per_sample = if maxval == 255 { 1 } else { 2 };
        let expected = count * bytes_per_sample;
        let actual = bytes.len() - cur.pos;
        if actual < expected {
            return Err(cur.fail(PgmErrorKind::Truncated { expected, actual }));
        }
        if actual > expected {
            cur.pos += expected;
            return Err(cur.fail(PgmErrorKind::TrailingBytes(actual - expected)));
        }
        let payload = &bytes[cur.pos..];
        if bytes_per_sample == 1 {
            payload.iter().map(|&b| u16::from(b)).collect()
        } else {
            payload
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]))
                .collect()
        }
    } else {
        let mut pixels = Vec::with_capacity(count);
        for _ in 0..count {
            let start_of_sample = cur.pos;
            let v = cur.read_number("sample").map_err(|e| match e {
                Error::PgmParse { kind: PgmErrorKind::MissingField(_), .. } => Error::PgmParse {
                    offset: start_of_sample,
                    kind: PgmErrorKind::Truncated { expected: count, actual: pixels.len() },
                },
                other => other,
            })?;
            if v > maxval {
                return Err(Error::PgmParse {
                    offset: cur.pos,
                    kind: PgmErrorKind::SampleOutOfRange { value: v as u32, maxval: maxval as u32 },
                });
            }
            pixels.push(v as u16);
        }
        cur.skip_separators();
        if cur.pos < bytes.len() {
            return Err(cur.fail(PgmErrorKind::TrailingBytes(bytes.len() - cur.pos)));
        }
        pixels
    };

    GrayImage::new(width as u32, height as u32, maxval as u32 + 1, pixels)
}

/// Serialize as binary PGM (`P5`), 16-bit samples big-endian.
///
/// Binary (2-level) images have no PGM maxval; they are in-memory objects
/// only and are rejected here.
pub fn write_pgm(image: &GrayImage) -> Result<Vec<u8>> {
    let maxval = match image.levels() {
        256 => 255u32,
        65536 => 65535,
        other => return Err(Error::UnsupportedLevels(other)),
    };
    let header = format!("P5\n{} {}\n{}\n", image.width(), image.height(), maxval);
    let mut out = header.into_bytes();
    if maxval == 255 {
        out.extend(image.pixels().iter().map(|&p| p as u8));
    } else {
        for &p in image.pixels() {
            out.extend_from_slice(&p.to_be_bytes());
        }
    }
    Ok(out)
}
