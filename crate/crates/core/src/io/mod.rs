//! File formats: PFM and KITTI 16-bit PNG disparities, 8-bit images and
//! masks, relative depth maps, and the JSON-lines dataset manifest.

pub mod image;
pub mod kitti;
pub mod manifest;
pub mod pfm;

use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{DisparityField, RelativeDepth};
use crate::scalar::Scalar;

pub use self::image::{read_image, read_mask_png, write_image, write_mask_png};
pub use kitti::{read_kitti_png, read_relative_png, write_kitti_png, write_relative_png};
pub use manifest::{Manifest, SampleRecord};
pub use pfm::{read_pfm, write_pfm};

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or_default()
        .to_ascii_lowercase()
}

/// Reads a disparity map: `.pfm` as PFM, `.png` as KITTI 16-bit.
pub fn read_disparity<T: Scalar>(path: &Path) -> Result<DisparityField<T>> {
    match extension(path).as_str() {
        "pfm" => read_pfm(path),
        "png" => read_kitti_png(path),
        other => Err(Error::format(path, format!("unknown disparity extension '{other}'"))),
    }
}

pub fn write_disparity<T: Scalar>(field: &DisparityField<T>, path: &Path) -> Result<()> {
    match extension(path).as_str() {
        "pfm" => write_pfm(field, path),
        "png" => write_kitti_png(field, path),
        other => Err(Error::format(path, format!("unknown disparity extension '{other}'"))),
    }
}

/// Reads a relative depth map: `.pfm` values taken as-is, `.png` 16-bit
/// values divided by 65535. Values must lie in `[0, 1]`.
pub fn read_relative_depth<T: Scalar>(path: &Path) -> Result<RelativeDepth<T>> {
    match extension(path).as_str() {
        "pfm" => {
            let field = read_pfm(path)?;
            RelativeDepth::new(field).map_err(|e| Error::format(path, e.to_string()))
        }
        "png" => read_relative_png(path),
        other => Err(Error::format(path, format!("unknown relative depth extension '{other}'"))),
    }
}
