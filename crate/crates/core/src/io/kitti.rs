//! KITTI disparity PNGs: 16-bit gray, disparity = stored / 256, stored 0 = no data.

use std::path::Path;

use image::{DynamicImage, ImageBuffer, ImageFormat, Luma};

use crate::error::{Error, Result};
use crate::io::image::decode;
use crate::raster::{BitMask, DisparityField, RelativeDepth};
use crate::scalar::Scalar;

const KITTI_SCALE: f64 = 256.0;
const RELATIVE_SCALE: f64 = 65535.0;

fn decode_u16(path: &Path) -> Result<(usize, usize, Vec<u16>)> {
    match decode(path)? {
        DynamicImage::ImageLuma16(buf) => {
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            Ok((w, h, buf.into_raw()))
        }
        other => Err(Error::format(
            path,
            format!("expected 16-bit single-channel PNG, got {:?}", other.color()),
        )),
    }
}

pub fn read_kitti_png<T: Scalar>(path: &Path) -> Result<DisparityField<T>> {
    let (w, h, raw) = decode_u16(path)?;
    let valid = BitMask::from_bits(w, h, raw.iter().map(|&v| v != 0).collect())?;
    let scale = T::lit(KITTI_SCALE);
    let values = raw.iter().map(|&v| T::lit(f64::from(v)) / scale).collect();
    DisparityField::with_mask(w, h, values, valid)
}

/// Quantizes valid disparities to the nearest 1/256 px. Values that would
/// store as 0 (reserved for invalid) or exceed 65535 are rejected.
pub fn write_kitti_png<T: Scalar>(field: &DisparityField<T>, path: &Path) -> Result<()> {
    let mut raw = Vec::with_capacity(field.values().len());
    for (&v, &ok) in field.values().iter().zip(field.valid().bits()) {
        if !ok {
            raw.push(0u16);
            continue;
        }
        let q = (v * T::lit(KITTI_SCALE)).round();
        if q < T::one() || q > T::lit(65535.0) {
            return Err(Error::param(format!(
                "disparity {v} is not representable in a KITTI PNG (range 1/256..=255.996)"
            )));
        }
        raw.push(q.to_u16().expect("range checked"));
    }
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(field.width() as u32, field.height() as u32, raw)
            .expect("buffer length matches dimensions");
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))
}

/// 16-bit gray PNG holding relative depth scaled to `0..=65535`. Every pixel is valid.
pub fn read_relative_png<T: Scalar>(path: &Path) -> Result<RelativeDepth<T>> {
    let (w, h, raw) = decode_u16(path)?;
    let scale = T::lit(RELATIVE_SCALE);
    let values = raw.iter().map(|&v| T::lit(f64::from(v)) / scale).collect();
    RelativeDepth::new(DisparityField::dense(w, h, values)?)
}

pub fn write_relative_png<T: Scalar>(rel: &RelativeDepth<T>, path: &Path) -> Result<()> {
    let field = rel.field();
    let raw = field
        .values()
        .iter()
        .map(|&v| (v * T::lit(RELATIVE_SCALE)).round().to_u16().unwrap_or(0))
        .collect();
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(field.width() as u32, field.height() as u32, raw)
            .expect("buffer length matches dimensions");
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))
}
