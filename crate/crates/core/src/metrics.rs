//! Stereo evaluation metrics over valid ground-truth pixels.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::{BitMask, DisparityField};
use crate::scalar::Scalar;

/// Errors strictly above this many pixels count towards `bad2`.
pub const BAD2_THRESHOLD: f64 = 2.0;
/// KITTI outlier: error above 3 px and above 5 % of the true disparity.
pub const D1_ABS_THRESHOLD: f64 = 3.0;
pub const D1_REL_THRESHOLD: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalReport<T> {
    /// Mean absolute disparity error in pixels.
    pub epe: T,
    pub d1: T,
    pub bad2: T,
    pub evaluated_pixels: usize,
}

pub fn evaluate<T: Scalar>(pred: &DisparityField<T>, gt: &DisparityField<T>, valid: &BitMask) -> Result<EvalReport<T>> {
    gt.ensure_shape(pred.width(), pred.height())?;
    valid.ensure_shape(pred.width(), pred.height())?;
    if !valid.is_subset_of(gt.valid()) || !valid.is_subset_of(pred.valid()) {
        return Err(Error::param("evaluation mask selects invalid pixels"));
    }
    let count = valid.count_ones();
    if count == 0 {
        return Err(Error::empty("no pixels to evaluate"));
    }
    let (bad2_t, d1_abs, d1_rel) = (
        T::lit(BAD2_THRESHOLD),
        T::lit(D1_ABS_THRESHOLD),
        T::lit(D1_REL_THRESHOLD),
    );
    let mut sum = T::zero();
    let mut bad2 = 0usize;
    let mut d1 = 0usize;
    for ((&p, &g), _) in pred
        .values()
        .iter()
        .zip(gt.values())
        .zip(valid.bits())
        .filter(|(_, &m)| m)
    {
        let e = (p - g).abs();
        sum = sum + e;
        if e > bad2_t {
            bad2 += 1;
        }
        if e > d1_abs && e > d1_rel * g.abs() {
            d1 += 1;
        }
    }
    let n = T::from_usize_exact(count);
    Ok(EvalReport {
        epe: sum / n,
        d1: T::from_usize_exact(d1) / n,
        bad2: T::from_usize_exact(bad2) / n,
        evaluated_pixels: count,
    })
}
