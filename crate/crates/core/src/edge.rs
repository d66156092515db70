//! Edge-aware hole handling.
//!
//! Where disparity drops by more than `tau` from one column to the next, the
//! warp opens a hole between the foreground edge and the background behind
//! it. A strip of background pixels right of the edge is re-warped with the
//! foreground disparity so that it lands inside that hole, giving the
//! inpainter background context next to the foreground boundary. Carried
//! pixels only ever fill holes; real warped content always wins.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::raster::{BitMask, DisparityField, RasterImage};
use crate::scalar::Scalar;
use crate::warp::{assemble, check_warp_inputs, splat_row, target_column, wins, Splat, WarpOptions, WarpResult};

pub const DEFAULT_TAU: f64 = 3.0;
pub const DEFAULT_STRIP_WIDTH: usize = 3;

/// One background pixel warped with the disparity of its foreground edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarryEntry<T> {
    pub row: usize,
    pub col: usize,
    pub carried_disparity: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCarryPlan<T> {
    width: usize,
    height: usize,
    entries: Vec<CarryEntry<T>>,
    strip_width: usize,
}

impl<T: Scalar> EdgeCarryPlan<T> {
    pub fn empty(width: usize, height: usize, strip_width: usize) -> Self {
        Self {
            width,
            height,
            entries: Vec::new(),
            strip_width,
        }
    }

    pub fn entries(&self) -> &[CarryEntry<T>] {
        &self.entries
    }

    pub fn strip_width(&self) -> usize {
        self.strip_width
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Marks pixels whose disparity exceeds its right neighbour's by more than `tau`.
///
/// The difference is signed: only drops open holes under the `x - d` warp.
/// The last column is never an edge.
pub fn edge_mask<T: Scalar>(disp: &DisparityField<T>, tau: T) -> Result<BitMask> {
    if !tau.is_finite() || tau <= T::zero() {
        return Err(Error::param(format!("edge threshold must be positive, got {tau}")));
    }
    if !disp.is_dense() {
        return Err(Error::param("edge detection needs a dense disparity field"));
    }
    let width = disp.width();
    Ok(BitMask::from_fn(width, disp.height(), |r, c| {
        c + 1 < width && disp.get(r, c) - disp.get(r, c + 1) > tau
    }))
}

/// For every edge pixel `(r, c)`, carries the `strip_width` pixels right of it
/// (clipped to the image) with disparity `D(r, c)`.
pub fn build_carry_plan<T: Scalar>(
    disp: &DisparityField<T>,
    edge: &BitMask,
    strip_width: usize,
) -> Result<EdgeCarryPlan<T>> {
    if strip_width == 0 {
        return Err(Error::param("strip width must be at least 1"));
    }
    edge.ensure_shape(disp.width(), disp.height())?;
    let width = disp.width();
    let mut entries = Vec::new();
    for r in 0..disp.height() {
        for c in 0..width {
            if !edge.get(r, c) {
                continue;
            }
            let carried_disparity = disp.get(r, c);
            for col in (c + 1..=c + strip_width).take_while(|&col| col < width) {
                entries.push(CarryEntry {
                    row: r,
                    col,
                    carried_disparity,
                });
            }
        }
    }
    Ok(EdgeCarryPlan {
        width,
        height: disp.height(),
        entries,
        strip_width,
    })
}

pub fn warp_with_carry<T: Scalar>(
    left: &RasterImage<T>,
    disp: &DisparityField<T>,
    plan: &EdgeCarryPlan<T>,
) -> Result<WarpResult<T>> {
    warp_with_carry_opts(left, disp, plan, WarpOptions::default())
}

/// Forward warp, then fill remaining holes from the carry plan.
///
/// Carried candidates compete among themselves with the same z-buffer rule
/// but never displace a real warped pixel.
pub fn warp_with_carry_opts<T: Scalar>(
    left: &RasterImage<T>,
    disp: &DisparityField<T>,
    plan: &EdgeCarryPlan<T>,
    opts: WarpOptions,
) -> Result<WarpResult<T>> {
    check_warp_inputs(left, disp)?;
    if (plan.width, plan.height) != disp.shape() {
        return Err(Error::dims(disp.shape(), (plan.width, plan.height)));
    }
    let mut by_row: Vec<Vec<&CarryEntry<T>>> = vec![Vec::new(); disp.height()];
    for e in &plan.entries {
        if e.row >= plan.height || e.col >= plan.width {
            return Err(Error::param(format!("carry entry ({}, {}) out of bounds", e.row, e.col)));
        }
        if !e.carried_disparity.is_finite() || e.carried_disparity < T::zero() {
            return Err(Error::param("carried disparity must be finite and non-negative"));
        }
        by_row[e.row].push(e);
    }

    let width = disp.width();
    let rows: Vec<Vec<Splat<T>>> = (0..disp.height())
        .into_par_iter()
        .map(|r| {
            let mut real = splat_row(disp.row(r), opts);
            let mut carried: Vec<Splat<T>> = vec![None; width];
            for e in &by_row[r] {
                if let Some(t) = target_column(e.col, e.carried_disparity, opts.rounding).filter(|&t| t < width) {
                    if real[t].is_none() && wins(carried[t], (e.carried_disparity, e.col), opts.tie_break) {
                        carried[t] = Some((e.carried_disparity, e.col));
                    }
                }
            }
            for (slot, c) in real.iter_mut().zip(carried) {
                if slot.is_none() {
                    *slot = c;
                }
            }
            real
        })
        .collect();
    Ok(assemble(left, &rows))
}
