//! Sample generation: scale relative depth, warp with edge carry, inpaint.

mod batch;
mod mix;

pub use batch::{generate_batch, BatchOptions, BatchSummary, SampleFailure, SampleMeta};
pub use mix::{mix_stream, MixSpec, MixStream};

use std::path::Path;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dssi::{DEFAULT_BETA, DEFAULT_QUANTILE};
use crate::edge::{build_carry_plan, edge_mask, warp_with_carry, DEFAULT_STRIP_WIDTH, DEFAULT_TAU};
use crate::error::{Error, Result};
use crate::inpaint::{InpaintBackend, InpaintRequest};
use crate::raster::{BitMask, DisparityField, RasterImage, RelativeDepth};
use crate::scalar::Scalar;
use crate::warp::{forward_warp, sample_alpha, scale_disparity};

pub const DEFAULT_D_MIN: f64 = 32.0;
pub const DEFAULT_D_MAX: f64 = 96.0;

/// Every tunable of generation and supervision. Defaults: disparity scale
/// drawn from `[32, 96]`, edge threshold 3 px, strip width 3, quantile 0.8,
/// beta 1, seed 0, built-in inpainting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationConfig {
    pub d_min: f64,
    pub d_max: f64,
    pub tau: f64,
    pub strip_width: usize,
    pub q: f64,
    pub beta: f64,
    pub seed: u64,
    pub inpaint_backend: InpaintBackend,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        Self {
            d_min: DEFAULT_D_MIN,
            d_max: DEFAULT_D_MAX,
            tau: DEFAULT_TAU,
            strip_width: DEFAULT_STRIP_WIDTH,
            q: DEFAULT_QUANTILE,
            beta: DEFAULT_BETA,
            seed: 0,
            inpaint_backend: InpaintBackend::Builtin,
        }
    }
}

impl GenerationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.d_min.is_finite() && self.d_max.is_finite() && self.d_min > 0.0 && self.d_min <= self.d_max) {
            return Err(Error::param(format!(
                "need 0 < d_min <= d_max, got d_min={} d_max={}",
                self.d_min, self.d_max
            )));
        }
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::param(format!("tau must be positive, got {}", self.tau)));
        }
        if self.strip_width == 0 {
            return Err(Error::param("strip_width must be at least 1"));
        }
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(Error::param(format!("q must lie in (0, 1), got {}", self.q)));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::param(format!("beta must be non-negative, got {}", self.beta)));
        }
        if let InpaintBackend::External(cmd) = &self.inpaint_backend {
            cmd.validate()?;
        }
        Ok(())
    }
}

/// Seed of sample `index` under `global_seed`: first word of ChaCha8 stream
/// `index`, so any shard can be regenerated independently.
pub fn sample_seed(global_seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(global_seed);
    rng.set_stream(index);
    rng.next_u64()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub source_id: String,
    pub sample_index: u64,
    pub global_seed: u64,
    pub sample_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StereoSample<T> {
    pub left: RasterImage<T>,
    pub right: RasterImage<T>,
    /// `alpha * rel_depth`, dense.
    pub disparity_gt: DisparityField<T>,
    /// Holes left after the edge carry, i.e. what the inpainter filled.
    pub hole_mask_pre_inpaint: BitMask,
    /// Holes of the plain forward warp, before the edge carry.
    pub warp_hole_mask: BitMask,
    pub alpha_used: T,
    pub provenance: Provenance,
    pub warnings: Vec<String>,
}

/// Generates one stereo pair from a single view and its relative depth.
///
/// `workdir` is handed to an external inpainting backend; `None` gives it a
/// fresh temporary directory.
pub fn generate_sample<T: Scalar>(
    image: &RasterImage<T>,
    rel_depth: &RelativeDepth<T>,
    cfg: &GenerationConfig,
    source_id: &str,
    index: u64,
    workdir: Option<&Path>,
) -> Result<StereoSample<T>> {
    cfg.validate()?;
    rel_depth.field().ensure_shape(image.width(), image.height())?;

    let seed = sample_seed(cfg.seed, index);
    let alpha = sample_alpha(seed, T::lit(cfg.d_min), T::lit(cfg.d_max))?;
    let disparity = scale_disparity(rel_depth, alpha)?;

    let edges = edge_mask(&disparity, T::lit(cfg.tau))?;
    let plan = build_carry_plan(&disparity, &edges, cfg.strip_width)?;
    let warp_hole_mask = forward_warp(image, &disparity)?.hole_mask;
    let warped = warp_with_carry(image, &disparity, &plan)?;

    let request = InpaintRequest::new(
        warped.right_image,
        warped.hole_mask.clone(),
        cfg.inpaint_backend.clone(),
    )?;
    let filled = request.run(workdir)?;

    Ok(StereoSample {
        left: image.clone(),
        right: filled.image,
        disparity_gt: disparity,
        hole_mask_pre_inpaint: warped.hole_mask,
        warp_hole_mask,
        alpha_used: alpha,
        provenance: Provenance {
            source_id: source_id.to_string(),
            sample_index: index,
            global_seed: cfg.seed,
            sample_seed: seed,
        },
        warnings: filled.warnings,
    })
}
