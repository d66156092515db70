use std::path::Path;

use image::{DynamicImage, GrayImage, ImageFormat, ImageReader, RgbImage};

use crate::error::{Error, Result};
use crate::raster::{BitMask, RasterImage};
use crate::scalar::Scalar;

/// `[0, 1]` to byte, rounding half away from zero.
pub fn to_byte<T: Scalar>(v: T) -> u8 {
    let scaled = (v * T::lit(255.0)).round();
    scaled.max(T::zero()).min(T::lit(255.0)).to_u8().unwrap_or(0)
}

pub fn from_byte<T: Scalar>(b: u8) -> T {
    T::lit(f64::from(b)) / T::lit(255.0)
}

pub(crate) fn decode(path: &Path) -> Result<DynamicImage> {
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    reader.decode().map_err(|e| Error::format(path, e.to_string()))
}

/// Reads an 8-bit PNG or JPEG. Gray images are replicated to three
/// channels, alpha is dropped; 16-bit and float images are rejected.
pub fn read_image<T: Scalar>(path: &Path) -> Result<RasterImage<T>> {
    let rgb: RgbImage = match decode(path)? {
        DynamicImage::ImageRgb8(buf) => buf,
        img @ (DynamicImage::ImageRgba8(_) | DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_)) => {
            img.to_rgb8()
        }
        other => {
            return Err(Error::format(
                path,
                format!("unsupported color type {:?}; expected 8-bit gray or RGB", other.color()),
            ))
        }
    };
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let data = rgb.into_raw().into_iter().map(from_byte).collect();
    RasterImage::from_vec(w, h, data)
}

/// Writes an 8-bit RGB PNG.
pub fn write_image<T: Scalar>(img: &RasterImage<T>, path: &Path) -> Result<()> {
    let bytes = img.data().iter().map(|&v| to_byte(v)).collect();
    let buf = RgbImage::from_raw(img.width() as u32, img.height() as u32, bytes)
        .expect("buffer length matches dimensions");
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))
}

/// Writes a mask as 8-bit gray PNG: 255 where set, 0 elsewhere.
pub fn write_mask_png(mask: &BitMask, path: &Path) -> Result<()> {
    let bytes = mask.bits().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let buf = GrayImage::from_raw(mask.width() as u32, mask.height() as u32, bytes)
        .expect("buffer length matches dimensions");
    buf.save_with_format(path, ImageFormat::Png)
        .map_err(|e| Error::format(path, e.to_string()))
}

/// Reads an 8-bit gray mask; values of 128 and above are set.
pub fn read_mask_png(path: &Path) -> Result<BitMask> {
    match decode(path)? {
        DynamicImage::ImageLuma8(buf) => {
            let (w, h) = (buf.width() as usize, buf.height() as usize);
            BitMask::from_bits(w, h, buf.into_raw().into_iter().map(|v| v >= 128).collect())
        }
        other => Err(Error::format(
            path,
            format!("mask must be 8-bit single-channel, got {:?}", other.color()),
        )),
    }
}
