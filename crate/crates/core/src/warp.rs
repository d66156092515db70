//! Forward warping of a left view into a synthetic right view.
//!
//! A left pixel at column `x` with disparity `d` lands on right column
//! `x - d` of the same row. Several sources may land on one target; the
//! nearest surface (largest disparity) wins. Targets nobody lands on are
//! dis-occlusion holes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::{BitMask, DisparityField, RasterImage, RelativeDepth, CHANNELS};
use crate::scalar::Scalar;

/// Output of a forward warp.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpResult<T> {
    /// Hole pixels are black.
    pub right_image: RasterImage<T>,
    /// Set where no source pixel landed.
    pub hole_mask: BitMask,
    /// Disparity of the winning source, valid exactly where `hole_mask` is clear.
    pub source_disparity: DisparityField<T>,
}

/// Which source to keep when two candidates carry equal disparity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    LargerColumn,
    SmallerColumn,
}

/// How a fractional target column is mapped onto the pixel grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    /// Round half away from zero.
    #[default]
    Nearest,
    Floor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WarpOptions {
    pub tie_break: TieBreak,
    pub rounding: Rounding,
}

/// Multiplies a relative depth map by `alpha`, giving disparities in pixels.
pub fn scale_disparity<T: Scalar>(rel: &RelativeDepth<T>, alpha: T) -> Result<DisparityField<T>> {
    if !alpha.is_finite() || alpha <= T::zero() {
        return Err(Error::param(format!("scale factor must be positive and finite, got {alpha}")));
    }
    rel.field().map(|v| v * alpha)
}

/// Draws the disparity scale uniformly from `[d_min, d_max]`, deterministically per seed.
pub fn sample_alpha<T: Scalar>(seed: u64, d_min: T, d_max: T) -> Result<T> {
    if !d_min.is_finite() || !d_max.is_finite() || d_min <= T::zero() {
        return Err(Error::param(format!(
            "disparity range must be positive and finite, got [{d_min}, {d_max}]"
        )));
    }
    if d_min > d_max {
        return Err(Error::param(format!("d_min {d_min} exceeds d_max {d_max}")));
    }
    let u: f64 = ChaCha8Rng::seed_from_u64(seed).random();
    let alpha = d_min + (d_max - d_min) * T::lit(u);
    Ok(alpha.max(d_min).min(d_max))
}

/// Winner of one target column: (disparity, source column).
pub(crate) type Splat<T> = Option<(T, usize)>;

pub(crate) fn target_column<T: Scalar>(col: usize, disparity: T, rounding: Rounding) -> Option<usize> {
    let x = T::from_usize_exact(col) - disparity;
    let t = match rounding {
        Rounding::Nearest => x.round(),
        Rounding::Floor => x.floor(),
    };
    if t < T::zero() {
        return None;
    }
    t.to_usize()
}

/// Whether `candidate` beats the current occupant of a target.
pub(crate) fn wins<T: Scalar>(current: Splat<T>, candidate: (T, usize), tie_break: TieBreak) -> bool {
    match current {
        None => true,
        Some((d, x)) => {
            candidate.0 > d
                || (candidate.0 == d
                    && match tie_break {
                        TieBreak::LargerColumn => candidate.1 > x,
                        TieBreak::SmallerColumn => candidate.1 < x,
                    })
        }
    }
}

/// Z-buffered splat of one row of disparities.
pub(crate) fn splat_row<T: Scalar>(disparities: &[T], opts: WarpOptions) -> Vec<Splat<T>> {
    let width = disparities.len();
    let mut targets: Vec<Splat<T>> = vec![None; width];
    for (x, &d) in disparities.iter().enumerate() {
        if let Some(t) = target_column(x, d, opts.rounding).filter(|&t| t < width) {
            if wins(targets[t], (d, x), opts.tie_break) {
                targets[t] = Some((d, x));
            }
        }
    }
    targets
}

pub(crate) fn check_warp_inputs<T: Scalar>(left: &RasterImage<T>, disp: &DisparityField<T>) -> Result<()> {
    disp.ensure_shape(left.width(), left.height())?;
    if !disp.is_dense() {
        return Err(Error::param("warp disparity must be dense"));
    }
    if let Some(bad) = disp.values().iter().position(|&d| d < T::zero()) {
        return Err(Error::param(format!(
            "negative disparity {} at index {bad}",
            disp.values()[bad]
        )));
    }
    Ok(())
}

/// Assembles a warp result from per-row winners.
pub(crate) fn assemble<T: Scalar>(left: &RasterImage<T>, rows: &[Vec<Splat<T>>]) -> WarpResult<T> {
    let (width, height) = left.shape();
    let mut colors = vec![T::zero(); width * height * CHANNELS];
    let mut holes = BitMask::new(width, height, false);
    let mut disp = vec![T::zero(); width * height];
    let mut valid = BitMask::new(width, height, false);
    for (row, targets) in rows.iter().enumerate() {
        for (col, splat) in targets.iter().enumerate() {
            match *splat {
                Some((d, src)) => {
                    let i = row * width + col;
                    colors[i * CHANNELS..(i + 1) * CHANNELS].copy_from_slice(&left.pixel(row, src));
                    disp[i] = d;
                    valid.set(row, col, true);
                }
                None => holes.set(row, col, true),
            }
        }
    }
    WarpResult {
        right_image: RasterImage::from_vec_unchecked(width, height, colors),
        hole_mask: holes,
        source_disparity: DisparityField::with_mask(width, height, disp, valid)
            .expect("winning disparities are finite"),
    }
}

pub fn forward_warp<T: Scalar>(left: &RasterImage<T>, disp: &DisparityField<T>) -> Result<WarpResult<T>> {
    forward_warp_with(left, disp, WarpOptions::default())
}

pub fn forward_warp_with<T: Scalar>(
    left: &RasterImage<T>,
    disp: &DisparityField<T>,
    opts: WarpOptions,
) -> Result<WarpResult<T>> {
    check_warp_inputs(left, disp)?;
    let rows: Vec<Vec<Splat<T>>> = (0..disp.height())
        .into_par_iter()
        .map(|r| splat_row(disp.row(r), opts))
        .collect();
    Ok(assemble(left, &rows))
}
