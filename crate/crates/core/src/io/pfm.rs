//! Portable float map, single channel (`Pf`).
//!
//! Header is `Pf`, `width height` and a scale factor whose sign gives the
//! payload byte order (negative: little-endian). Rows run bottom to top.
//! Non-finite samples mark invalid pixels; writers emit `+inf` there.

use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{BitMask, DisparityField};
use crate::scalar::Scalar;

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn token(&mut self) -> Option<&'a str> {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        std::str::from_utf8(&self.bytes[start..self.pos]).ok()
    }
}

pub fn decode_pfm<T: Scalar>(bytes: &[u8], path: &Path) -> Result<DisparityField<T>> {
    let bad = |reason: &str| Error::format(path, reason.to_string());
    let mut cur = Cursor { bytes, pos: 0 };
    match cur.token() {
        Some("Pf") => {}
        Some("PF") => return Err(bad("three-channel PF maps are not disparities; expected Pf")),
        _ => return Err(bad("missing Pf magic")),
    }
    let mut dim = || -> Result<usize> {
        cur.token()
            .and_then(|t| t.parse::<usize>().ok())
            .ok_or_else(|| bad("malformed dimensions"))
    };
    let width = dim()?;
    let height = dim()?;
    let scale: f32 = cur
        .token()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad("malformed scale"))?;
    if scale == 0.0 || !scale.is_finite() {
        return Err(bad("scale must be finite and non-zero"));
    }
    // Exactly one whitespace byte separates the header from the payload.
    match cur.bytes.get(cur.pos) {
        Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
        _ => return Err(bad("header not terminated")),
    }
    let little_endian = scale < 0.0;
    let payload = &bytes[cur.pos..];
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| bad("dimensions overflow"))?;
    if payload.len() != expected {
        return Err(bad(&format!(
            "payload is {} bytes, expected {expected}",
            payload.len()
        )));
    }

    let mut values = vec![T::zero(); width * height];
    let mut valid = BitMask::new(width, height, false);
    for (i, chunk) in payload.chunks_exact(4).enumerate() {
        let raw = [chunk[0], chunk[1], chunk[2], chunk[3]];
        let v = if little_endian {
            f32::from_le_bytes(raw)
        } else {
            f32::from_be_bytes(raw)
        };
        let row = height - 1 - i / width;
        let col = i % width;
        if v.is_finite() {
            values[row * width + col] = T::lit(f64::from(v));
            valid.set(row, col, true);
        }
    }
    DisparityField::with_mask(width, height, values, valid)
}

/// Little-endian encoding with scale `-1`.
pub fn encode_pfm<T: Scalar>(field: &DisparityField<T>) -> Vec<u8> {
    let (width, height) = field.shape();
    let mut out = format!("Pf\n{width} {height}\n-1.0\n").into_bytes();
    out.reserve(width * height * 4);
    for row in (0..height).rev() {
        for col in 0..width {
            let v = if field.valid().get(row, col) {
                field.get(row, col).to_f32_lossy()
            } else {
                f32::INFINITY
            };
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn read_pfm<T: Scalar>(path: &Path) -> Result<DisparityField<T>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_pfm(&bytes, path)
}

pub fn write_pfm<T: Scalar>(field: &DisparityField<T>, path: &Path) -> Result<()> {
    std::fs::write(path, encode_pfm(field)).map_err(|e| Error::io(path, e))
}
