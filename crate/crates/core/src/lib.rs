//! Stereo training data from single views, and the losses and metrics to
//! train and score stereo networks on it.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the type
//! aliases at the bottom of this file fix the precision used by the batch
//! pipeline and the command-line tool.

pub mod dssi;
pub mod edge;
pub mod error;
pub mod inpaint;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod raster;
pub mod scalar;
pub mod warp;

pub use dssi::{
    combined_loss, dssi_loss, dssi_loss_grad, dssi_loss_with, lstsq_align, outlier_mask, sparse_loss,
    AffineAlignment, DssiGradient, DssiOptions, DssiReport, LossBreakdown,
};
pub use edge::{build_carry_plan, edge_mask, warp_with_carry, CarryEntry, EdgeCarryPlan};
pub use error::{Error, Result};
pub use inpaint::{inpaint_builtin, inpaint_external, ExternalCommand, InpaintBackend, InpaintRequest, Inpainted};
pub use metrics::{evaluate, EvalReport};
pub use pipeline::{generate_sample, mix_stream, GenerationConfig, MixSpec, StereoSample};
pub use raster::{mask_and, masked_stats, BitMask, DisparityField, MaskedStats, RasterImage, RelativeDepth};
pub use scalar::Scalar;
pub use warp::{forward_warp, sample_alpha, scale_disparity, WarpResult};

pub type Image = RasterImage<f64>;
pub type Disparity = DisparityField<f64>;
pub type Relative = RelativeDepth<f64>;
pub type Alignment = AffineAlignment<f64>;
pub type Sample = StereoSample<f64>;

pub type ImageF32 = RasterImage<f32>;
pub type DisparityF32 = DisparityField<f32>;
pub type RelativeF32 = RelativeDepth<f32>;
pub type AlignmentF32 = AffineAlignment<f32>;
pub type SampleF32 = StereoSample<f32>;
