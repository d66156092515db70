//! Raster containers shared by every stage: color images, disparity fields
//! with validity masks, and boolean masks.
//!
//! All buffers are row-major. Constructors validate their invariants, so a
//! value of any of these types can be handed to any operation without
//! re-checking finiteness or ranges.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const CHANNELS: usize = 3;

/// Boolean per-pixel field.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BitMask {
    pub fn new(width: usize, height: usize, fill: bool) -> Self {
        Self {
            width,
            height,
            bits: vec![fill; width * height],
        }
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        if bits.len() != width * height {
            return Err(Error::param(format!(
                "mask of {width}x{height} needs {} bits, got {}",
                width * height,
                bits.len()
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut bits = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                bits.push(f(row, col));
            }
        }
        Self {
            width,
            height,
            bits,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.width + col] = value;
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn all(&self) -> bool {
        self.bits.iter().all(|&b| b)
    }

    pub fn none(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// True when every set bit of `self` is also set in `other`.
    pub fn is_subset_of(&self, other: &BitMask) -> bool {
        self.shape() == other.shape()
            && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }

    pub fn not(&self) -> BitMask {
        BitMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub(crate) fn ensure_shape(&self, width: usize, height: usize) -> Result<()> {
        if self.shape() != (width, height) {
            return Err(Error::dims((width, height), self.shape()));
        }
        Ok(())
    }
}

/// Pointwise logical AND of two masks of equal shape.
pub fn mask_and(a: &BitMask, b: &BitMask) -> Result<BitMask> {
    b.ensure_shape(a.width, a.height)?;
    Ok(BitMask {
        width: a.width,
        height: a.height,
        bits: a.bits.iter().zip(&b.bits).map(|(&x, &y)| x && y).collect(),
    })
}

/// Three-channel color image with values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage<T> {
    width: usize,
    height: usize,
    data: Vec<T>,
}

impl<T: Scalar> RasterImage<T> {
    pub fn from_vec(width: usize, height: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != width * height * CHANNELS {
            return Err(Error::param(format!(
                "image of {width}x{height} needs {} values, got {}",
                width * height * CHANNELS,
                data.len()
            )));
        }
        if let Some(bad) = data
            .iter()
            .position(|v| !v.is_finite() || *v < T::zero() || *v > T::one())
        {
            return Err(Error::param(format!(
                "color value {} at index {bad} is outside [0, 1]",
                data[bad]
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, color: [T; CHANNELS]) -> Result<Self> {
        let data = (0..width * height).flat_map(|_| color).collect();
        Self::from_vec(width, height, data)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [T; CHANNELS],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * CHANNELS);
        for row in 0..height {
            for col in 0..width {
                data.extend_from_slice(&f(row, col));
            }
        }
        Self::from_vec(width, height, data)
    }

    /// Skips validation; callers guarantee every value came from a valid image.
    pub(crate) fn from_vec_unchecked(width: usize, height: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), width * height * CHANNELS);
        Self {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn pixel(&self, row: usize, col: usize) -> [T; CHANNELS] {
        let i = (row * self.width + col) * CHANNELS;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub(crate) fn set_pixel(&mut self, row: usize, col: usize, color: [T; CHANNELS]) {
        let i = (row * self.width + col) * CHANNELS;
        self.data[i..i + CHANNELS].copy_from_slice(&color);
    }
}

/// Per-pixel horizontal displacement in pixels, with a validity mask.
///
/// Invalid pixels always store `0`. Losses and metrics only read pixels
/// whose valid bit is set.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityField<T> {
    width: usize,
    height: usize,
    values: Vec<T>,
    valid: BitMask,
}

impl<T: Scalar> DisparityField<T> {
    /// Fully valid field; every value must be finite.
    pub fn dense(width: usize, height: usize, values: Vec<T>) -> Result<Self> {
        Self::with_mask(width, height, values, BitMask::new(width, height, true))
    }

    /// Field with an explicit validity mask. Values under invalid bits are
    /// replaced by the `0` sentinel.
    pub fn with_mask(width: usize, height: usize, mut values: Vec<T>, valid: BitMask) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::param(format!(
                "disparity field of {width}x{height} needs {} values, got {}",
                width * height,
                values.len()
            )));
        }
        valid.ensure_shape(width, height)?;
        for (i, (v, &ok)) in values.iter_mut().zip(valid.bits()).enumerate() {
            if !ok {
                *v = T::zero();
            } else if !v.is_finite() {
                return Err(Error::param(format!("non-finite disparity at index {i}")));
            }
        }
        Ok(Self {
            width,
            height,
            values,
            valid,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: vec![T::zero(); width * height],
            valid: BitMask::new(width, height, true),
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(width * height);
        for row in 0..height {
            for col in 0..width {
                values.push(f(row, col));
            }
        }
        Self::dense(width, height, values)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn valid(&self) -> &BitMask {
        &self.valid
    }

    pub fn is_dense(&self) -> bool {
        self.valid.all()
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.values[row * self.width + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.values[row * self.width..(row + 1) * self.width]
    }

    /// Applies `f` to every valid value; invalid pixels keep the sentinel.
    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Result<Self> {
        let values = self
            .values
            .iter()
            .zip(self.valid.bits())
            .map(|(&v, &ok)| if ok { f(v) } else { T::zero() })
            .collect();
        Self::with_mask(self.width, self.height, values, self.valid.clone())
    }

    pub(crate) fn ensure_shape(&self, width: usize, height: usize) -> Result<()> {
        if self.shape() != (width, height) {
            return Err(Error::dims((width, height), self.shape()));
        }
        Ok(())
    }
}

/// Dense disparity field with values in `[0, 1]`, as produced by a
/// monocular depth model.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeDepth<T>(DisparityField<T>);

impl<T: Scalar> RelativeDepth<T> {
    pub fn new(field: DisparityField<T>) -> Result<Self> {
        if !field.is_dense() {
            return Err(Error::param("relative depth must be dense"));
        }
        if let Some(bad) = field
            .values()
            .iter()
            .position(|v| *v < T::zero() || *v > T::one())
        {
            return Err(Error::param(format!(
                "relative depth value {} at index {bad} is outside [0, 1]",
                field.values()[bad]
            )));
        }
        Ok(Self(field))
    }

    pub fn field(&self) -> &DisparityField<T> {
        &self.0
    }

    pub fn into_field(self) -> DisparityField<T> {
        self.0
    }
}

/// Count, mean and population variance over a pixel selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskedStats<T> {
    pub count: usize,
    pub mean: T,
    pub variance: T,
}

/// Statistics over exactly the pixels selected by `mask`.
///
/// The mask must select only valid pixels of `field`. Two-pass evaluation in
/// row-major order, so results are reproducible bit for bit.
pub fn masked_stats<T: Scalar>(field: &DisparityField<T>, mask: &BitMask) -> Result<MaskedStats<T>> {
    mask.ensure_shape(field.width, field.height)?;
    if !mask.is_subset_of(&field.valid) {
        return Err(Error::param("mask selects invalid disparity pixels"));
    }
    let selected = || {
        field
            .values
            .iter()
            .zip(mask.bits())
            .filter(|(_, &m)| m)
            .map(|(&v, _)| v)
    };
    let count = mask.count_ones();
    if count == 0 {
        return Err(Error::empty("mask selects no pixels"));
    }
    let n = T::from_usize_exact(count);
    let mean = selected().fold(T::zero(), |acc, v| acc + v) / n;
    let variance = selected().fold(T::zero(), |acc, v| acc + (v - mean) * (v - mean)) / n;
    Ok(MaskedStats {
        count,
        mean,
        variance,
    })
}
