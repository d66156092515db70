//! Supervision losses for stereo training on sparse ground truth plus
//! monocular pseudo-labels.
//!
//! * `sparse_loss`: mean absolute error over valid ground-truth pixels.
//! * `dssi_loss`: fit `a * pred + b` to the relative mono map by least
//!   squares, drop pixels whose squared residual is not below the
//!   q-quantile, refit `(a', b')` on the survivors and take the MSE there.
//! * `combined_loss`: `sparse + beta * dssi`.
//!
//! All reductions run in row-major order over the selected pixels, so
//! results are reproducible bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{BitMask, DisparityField};
use crate::scalar::Scalar;

pub const DEFAULT_QUANTILE: f64 = 0.8;
pub const DEFAULT_BETA: f64 = 1.0;

/// `scale * x + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineAlignment<T> {
    pub scale: T,
    pub shift: T,
}

impl<T: Scalar> AffineAlignment<T> {
    pub fn apply(&self, x: T) -> T {
        self.scale * x + self.shift
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DssiOptions {
    /// Quantile of squared residuals used as the inlier threshold.
    pub quantile: f64,
    /// Trim-and-refit rounds; each round trims the supplied mask against the
    /// latest alignment.
    pub rounds: usize,
}

impl Default for DssiOptions {
    fn default() -> Self {
        Self {
            quantile: DEFAULT_QUANTILE,
            rounds: 1,
        }
    }
}

impl DssiOptions {
    pub fn with_quantile(quantile: f64) -> Self {
        Self {
            quantile,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DssiReport<T> {
    pub loss: T,
    pub alignment_initial: AffineAlignment<T>,
    pub alignment_refined: AffineAlignment<T>,
    pub inlier_mask: BitMask,
    pub threshold: T,
    pub inlier_count: usize,
    /// Set when trimming left fewer than two pixels and the full mask was used instead.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DssiGradient<T> {
    pub report: DssiReport<T>,
    /// d(loss)/d(pred), zero outside the inlier mask.
    pub gradient: DisparityField<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossBreakdown<T> {
    pub sparse: T,
    pub dssi: T,
    pub beta: T,
    pub total: T,
    pub dssi_report: DssiReport<T>,
}

fn check_quantile(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::param(format!("quantile must lie in (0, 1), got {q}")));
    }
    Ok(())
}

/// Shapes agree and `mask` selects only pixels valid in both fields.
fn check_pair<T: Scalar>(a: &DisparityField<T>, b: &DisparityField<T>, mask: &BitMask) -> Result<()> {
    b.ensure_shape(a.width(), a.height())?;
    mask.ensure_shape(a.width(), a.height())?;
    if !mask.is_subset_of(a.valid()) || !mask.is_subset_of(b.valid()) {
        return Err(Error::param("mask selects pixels that are invalid in an input field"));
    }
    Ok(())
}

fn selected<'a, T: Scalar>(
    a: &'a DisparityField<T>,
    b: &'a DisparityField<T>,
    mask: &'a BitMask,
) -> impl Iterator<Item = (T, T)> + 'a {
    a.values()
        .iter()
        .zip(b.values())
        .zip(mask.bits())
        .filter(|(_, &m)| m)
        .map(|((&x, &y), _)| (x, y))
}

/// Mean of `|gt - pred|` over `valid`.
pub fn sparse_loss<T: Scalar>(pred: &DisparityField<T>, gt: &DisparityField<T>, valid: &BitMask) -> Result<T> {
    check_pair(pred, gt, valid)?;
    let n = valid.count_ones();
    if n == 0 {
        return Err(Error::empty("no valid ground-truth pixels"));
    }
    let sum = selected(pred, gt, valid).fold(T::zero(), |acc, (p, g)| acc + (g - p).abs());
    Ok(sum / T::from_usize_exact(n))
}

/// Least-squares `(a, b)` minimising `sum (a * pred + b - mono)^2` over `mask`.
pub fn lstsq_align<T: Scalar>(
    pred: &DisparityField<T>,
    mono: &DisparityField<T>,
    mask: &BitMask,
) -> Result<AffineAlignment<T>> {
    check_pair(pred, mono, mask)?;
    fit(pred, mono, mask)
}

fn fit<T: Scalar>(pred: &DisparityField<T>, mono: &DisparityField<T>, mask: &BitMask) -> Result<AffineAlignment<T>> {
    let count = mask.count_ones();
    if count < 2 {
        return Err(Error::empty(format!(
            "alignment needs at least 2 pixels, mask selects {count}"
        )));
    }
    let n = T::from_usize_exact(count);
    let (sp, sm, peak) = selected(pred, mono, mask).fold((T::zero(), T::zero(), T::zero()), |(sp, sm, peak), (p, m)| {
        (sp + p, sm + m, peak.max(p.abs()))
    });
    let (mean_p, mean_m) = (sp / n, sm / n);
    let (sxx, sxy) = selected(pred, mono, mask).fold((T::zero(), T::zero()), |(sxx, sxy), (p, m)| {
        let dp = p - mean_p;
        (sxx + dp * dp, sxy + dp * (m - mean_m))
    });
    // Below this the spread of pred is indistinguishable from rounding noise.
    let floor = peak * T::epsilon() * T::lit(4.0);
    if !(sxx > n * floor * floor) {
        return Err(Error::DegenerateFit(
            "prediction is constant over the mask".to_string(),
        ));
    }
    let scale = sxy / sxx;
    Ok(AffineAlignment {
        scale,
        shift: mean_m - scale * mean_p,
    })
}

/// Nearest-rank q-quantile: the `ceil(q * n)`-th smallest value.
fn nearest_rank<T: Scalar>(mut values: Vec<T>, q: f64) -> T {
    let n = values.len();
    // Shrink by a few ulps so products like 0.7 * 10 land on 7, not 8.
    let rank = (q * n as f64 * (1.0 - 4.0 * f64::EPSILON)).ceil() as usize;
    let rank = rank.clamp(1, n);
    values.sort_by(|a, b| a.partial_cmp(b).expect("residuals are finite"));
    values[rank - 1]
}

/// Inlier mask `r_i < tau` over `mask`, where `r_i` is the squared residual
/// under `align` and `tau` its q-quantile over `mask`.
pub fn outlier_mask<T: Scalar>(
    pred: &DisparityField<T>,
    mono: &DisparityField<T>,
    align: &AffineAlignment<T>,
    mask: &BitMask,
    q: f64,
) -> Result<(BitMask, T)> {
    check_quantile(q)?;
    check_pair(pred, mono, mask)?;
    trim(pred, mono, align, mask, q)
}

fn squared_residual<T: Scalar>(align: &AffineAlignment<T>, p: T, m: T) -> T {
    let r = align.apply(p) - m;
    r * r
}

fn trim<T: Scalar>(
    pred: &DisparityField<T>,
    mono: &DisparityField<T>,
    align: &AffineAlignment<T>,
    mask: &BitMask,
    q: f64,
) -> Result<(BitMask, T)> {
    let residuals: Vec<T> = selected(pred, mono, mask)
        .map(|(p, m)| squared_residual(align, p, m))
        .collect();
    if residuals.is_empty() {
        return Err(Error::empty("outlier detection over an empty mask"));
    }
    if residuals.iter().any(|r| !r.is_finite()) {
        return Err(Error::param("non-finite residual; alignment overflowed"));
    }
    let threshold = nearest_rank(residuals, q);
    let bits = pred
        .values()
        .iter()
        .zip(mono.values())
        .zip(mask.bits())
        .map(|((&p, &m), &sel)| sel && squared_residual(align, p, m) < threshold)
        .collect();
    let inliers = BitMask::from_bits(mask.width(), mask.height(), bits)?;
    Ok((inliers, threshold))
}

/// Mean squared residual over `mask`.
fn mse<T: Scalar>(pred: &DisparityField<T>, mono: &DisparityField<T>, align: &AffineAlignment<T>, mask: &BitMask) -> T {
    let sum = selected(pred, mono, mask).fold(T::zero(), |acc, (p, m)| acc + squared_residual(align, p, m));
    sum / T::from_usize_exact(mask.count_ones())
}

pub fn dssi_loss<T: Scalar>(
    pred: &DisparityField<T>,
    mono: &DisparityField<T>,
    mask: &BitMask,
    q: f64,
) -> Result<DssiReport<T>> {
    dssi_loss_with(pred, mono, mask, &DssiOptions::with_quantile(q))
}

/// Align, trim, refit, then MSE over the inliers.
///
/// If trimming keeps fewer than two pixels (every residual equal, as in a
/// perfect fit), the full mask is used and `fallback` is set.
pub fn dssi_loss_with<T: Scalar>(
    pred: &DisparityField<T>,
    mono: &DisparityField<T>,
    mask: &BitMask,
    opts: &DssiOptions,
) -> Result<DssiReport<T>> {
    check_quantile(opts.quantile)?;
    if opts.rounds == 0 {
        return Err(Error::param("at least one trimming round is required"));
    }
    check_pair(pred, mono, mask)?;

    let initial = fit(pred, mono, mask)?;
    let mut refined = initial;
    let mut inliers = mask.clone();
    let mut threshold = T::zero();
    let mut fallback = false;
    for _ in 0..opts.rounds {
        let (trimmed, tau) = trim(pred, mono, &refined, mask, opts.quantile)?;
        threshold = tau;
        inliers = if trimmed.count_ones() < 2 {
            log::warn!(
                "dssi: only {} pixels below the residual threshold; using the full mask",
                trimmed.count_ones()
            );
            fallback = true;
            mask.clone()
        } else {
            trimmed
        };
        refined = fit(pred, mono, &inliers)?;
    }
    Ok(DssiReport {
        loss: mse(pred, mono, &refined, &inliers),
        alignment_initial: initial,
        alignment_refined: refined,
        inlier_count: inliers.count_ones(),
        inlier_mask: inliers,
        threshold,
        fallback,
    })
}

pub fn dssi_loss_grad<T: Scalar>(
    pred: &DisparityField<T>,
    mono: &DisparityField<T>,
    mask: &BitMask,
    q: f64,
) -> Result<DssiGradient<T>> {
    dssi_loss_grad_with(pred, mono, mask, &DssiOptions::with_quantile(q))
}

/// Gradient of the DSSI loss with respect to `pred`, holding the refined
/// alignment and the inlier mask fixed:
/// `g_i = 2 a' (a' pred_i + b' - mono_i) / |M_l|` on inliers, 0 elsewhere.
pub fn dssi_loss_grad_with<T: Scalar>(
    pred: &DisparityField<T>,
    mono: &DisparityField<T>,
    mask: &BitMask,
    opts: &DssiOptions,
) -> Result<DssiGradient<T>> {
    let report = dssi_loss_with(pred, mono, mask, opts)?;
    let align = report.alignment_refined;
    let factor = T::lit(2.0) * align.scale / T::from_usize_exact(report.inlier_count);
    let values = pred
        .values()
        .iter()
        .zip(mono.values())
        .zip(report.inlier_mask.bits())
        .map(|((&p, &m), &inlier)| {
            if inlier {
                factor * (align.apply(p) - m)
            } else {
                T::zero()
            }
        })
        .collect();
    let gradient = DisparityField::dense(pred.width(), pred.height(), values)?;
    Ok(DssiGradient { report, gradient })
}

/// `sparse_loss(pred, gt, valid) + beta * dssi_loss(pred, mono, mono_mask, q)`.
#[allow(clippy::too_many_arguments)]
pub fn combined_loss<T: Scalar>(
    pred: &DisparityField<T>,
    gt: &DisparityField<T>,
    valid: &BitMask,
    mono: &DisparityField<T>,
    mono_mask: &BitMask,
    q: f64,
    beta: T,
) -> Result<LossBreakdown<T>> {
    if !beta.is_finite() || beta < T::zero() {
        return Err(Error::param(format!("beta must be finite and non-negative, got {beta}")));
    }
    let sparse = sparse_loss(pred, gt, valid)?;
    let dssi_report = dssi_loss(pred, mono, mono_mask, q)?;
    let dssi = dssi_report.loss;
    Ok(LossBreakdown {
        sparse,
        dssi,
        beta,
        total: sparse + beta * dssi,
        dssi_report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(values: &[f64]) -> DisparityField<f64> {
        DisparityField::dense(values.len(), 1, values.to_vec()).unwrap()
    }

    fn all(n: usize) -> BitMask {
        BitMask::new(n, 1, true)
    }

    fn row_mask(bits: &[u8]) -> BitMask {
        BitMask::from_bits(bits.len(), 1, bits.iter().map(|&b| b == 1).collect()).unwrap()
    }

    #[test]
    fn sparse_loss_examples() {
        let p = row(&[1.0, 2.0, 3.5]);
        assert_eq!(sparse_loss(&p, &p, &all(3)).unwrap(), 0.0);
        assert_eq!(sparse_loss(&row(&[1.0, 2.0]), &row(&[2.0, 4.0]), &all(2)).unwrap(), 1.5);
        assert_eq!(
            sparse_loss(&row(&[1.0, 99.0]), &row(&[2.0, 0.0]), &row_mask(&[1, 0])).unwrap(),
            1.0
        );
        assert!(matches!(
            sparse_loss(&p, &p, &row_mask(&[0, 0, 0])),
            Err(Error::EmptySelection(_))
        ));
    }

    #[test]
    fn sparse_loss_never_reads_invalid_gt() {
        let gt = DisparityField::with_mask(2, 1, vec![2.0, 0.0], row_mask(&[1, 0])).unwrap();
        assert!(sparse_loss(&row(&[1.0, 5.0]), &gt, &all(2)).is_err());
        assert_eq!(sparse_loss(&row(&[1.0, 5.0]), &gt, gt.valid()).unwrap(), 1.0);
    }

    #[test]
    fn align_examples() {
        let a = lstsq_align(&row(&[1.0, 2.0, 3.0]), &row(&[2.0, 4.0, 6.0]), &all(3)).unwrap();
        assert_eq!((a.scale, a.shift), (2.0, 0.0));
        let a = lstsq_align(&row(&[1.0, 2.0, 3.0]), &row(&[3.0, 5.0, 7.0]), &all(3)).unwrap();
        assert_eq!((a.scale, a.shift), (2.0, 1.0));
        let a = lstsq_align(&row(&[1.0, 2.0]), &row(&[5.0, 5.0]), &all(2)).unwrap();
        assert_eq!((a.scale, a.shift), (0.0, 5.0));
    }

    #[test]
    fn align_errors() {
        assert!(matches!(
            lstsq_align(&row(&[4.0, 4.0, 4.0]), &row(&[1.0, 2.0, 3.0]), &all(3)),
            Err(Error::DegenerateFit(_))
        ));
        // 0.1 * 3 accumulates rounding; still detected as constant.
        assert!(matches!(
            lstsq_align(&row(&[0.1, 0.1, 0.1]), &row(&[1.0, 2.0, 3.0]), &all(3)),
            Err(Error::DegenerateFit(_))
        ));
        assert!(matches!(
            lstsq_align(&row(&[1.0, 2.0]), &row(&[1.0, 2.0]), &row_mask(&[1, 0])),
            Err(Error::EmptySelection(_))
        ));
    }

    #[test]
    fn quantile_threshold_example() {
        // Identity alignment so residuals are (pred - mono)^2 = [0, 0, 0, 10000].
        let id = AffineAlignment { scale: 1.0, shift: 0.0 };
        let (m, tau) = outlier_mask(&row(&[1.0, 2.0, 3.0, 104.0]), &row(&[1.0, 2.0, 3.0, 4.0]), &id, &all(4), 0.8).unwrap();
        assert_eq!(tau, 10000.0);
        assert_eq!(m, row_mask(&[1, 1, 1, 0]));
    }

    #[test]
    fn equal_residuals_give_empty_mask() {
        let id = AffineAlignment { scale: 1.0, shift: 0.0 };
        let (m, tau) = outlier_mask(&row(&[1.0, 2.0, 3.0]), &row(&[2.0, 3.0, 4.0]), &id, &all(3), 0.5).unwrap();
        assert_eq!(tau, 1.0);
        assert!(m.none());
    }

    #[test]
    fn quantile_rank_is_robust_to_representation() {
        let v: Vec<f64> = (1..=10).map(f64::from).collect();
        assert_eq!(nearest_rank(v.clone(), 0.7), 7.0);
        assert_eq!(nearest_rank(v.clone(), 0.8), 8.0);
        assert_eq!(nearest_rank(v.clone(), 0.05), 1.0);
        assert_eq!(nearest_rank(v, 0.99), 10.0);
    }

    #[test]
    fn quantile_bounds() {
        let id = AffineAlignment { scale: 1.0, shift: 0.0 };
        for q in [0.0, 1.0, -0.1, f64::NAN] {
            assert!(outlier_mask(&row(&[1.0, 2.0]), &row(&[1.0, 2.0]), &id, &all(2), q).is_err());
        }
    }

    #[test]
    fn single_bad_pixel_is_trimmed() {
        // Perfect fit except one pixel, 100 pixels, q = 0.9. Residuals under
        // the contaminated initial fit rank the corrupted pixel last.
        let pred: Vec<f64> = (0..100).map(|i| i as f64 * 0.37 + 1.0).collect();
        let mut mono: Vec<f64> = pred.iter().map(|p| 2.0 * p + 1.0).collect();
        mono[42] += 500.0;
        let (p, m) = (DisparityField::dense(10, 10, pred).unwrap(), DisparityField::dense(10, 10, mono).unwrap());
        let mask = BitMask::new(10, 10, true);
        let align = lstsq_align(&p, &m, &mask).unwrap();
        let (inliers, _) = outlier_mask(&p, &m, &align, &mask, 0.9).unwrap();
        assert!(!inliers.get(4, 2));
        assert_eq!(inliers.count_ones(), 89);
    }

    #[test]
    fn perfect_fit_falls_back_to_full_mask() {
        let pred: Vec<f64> = (0..20).map(f64::from).collect();
        let mono: Vec<f64> = pred.iter().map(|p| 2.0 * p + 1.0).collect();
        let r = dssi_loss(&row(&pred), &row(&mono), &all(20), 0.8).unwrap();
        assert_eq!(r.loss, 0.0);
        assert_eq!(r.alignment_refined, AffineAlignment { scale: 2.0, shift: 1.0 });
        assert_eq!(r.inlier_mask, all(20));
        assert!(r.fallback);
    }

    #[test]
    fn corrupted_pixel_excluded_and_loss_vanishes() {
        let pred: Vec<f64> = (0..100).map(|i| ((i * 37) % 100) as f64 * 0.25).collect();
        let mut mono: Vec<f64> = pred.iter().map(|p| 2.0 * p + 1.0).collect();
        mono[17] = -300.0;
        let (p, m) = (DisparityField::dense(100, 1, pred).unwrap(), DisparityField::dense(100, 1, mono).unwrap());
        let r = dssi_loss(&p, &m, &all(100), 0.8).unwrap();
        assert!(r.loss < 1e-12, "loss {}", r.loss);
        assert!(!r.inlier_mask.get(0, 17));
        assert!((r.alignment_refined.scale - 2.0).abs() < 1e-12);
        assert!((r.alignment_refined.shift - 1.0).abs() < 1e-12);
        assert!(!r.fallback);
    }

    #[test]
    fn extra_rounds_are_supported() {
        let pred: Vec<f64> = (0..50).map(|i| i as f64 * 0.5).collect();
        let mut mono: Vec<f64> = pred.iter().map(|p| 0.5 * p - 3.0 + (p * 7.0).sin() * 0.01).collect();
        mono[3] += 40.0;
        mono[30] -= 25.0;
        let opts = DssiOptions { quantile: 0.8, rounds: 3 };
        let r = dssi_loss_with(&row(&pred), &row(&mono), &all(50), &opts).unwrap();
        assert!(!r.inlier_mask.get(0, 3) && !r.inlier_mask.get(0, 30));
        assert!(dssi_loss_with(&row(&pred), &row(&mono), &all(50), &DssiOptions { quantile: 0.8, rounds: 0 }).is_err());
    }

    #[test]
    fn gradient_examples() {
        let pred: Vec<f64> = (0..10).map(f64::from).collect();
        let mono: Vec<f64> = pred.iter().map(|p| 3.0 * p - 2.0).collect();
        let g = dssi_loss_grad(&row(&pred), &row(&mono), &all(10), 0.8).unwrap();
        assert!(g.gradient.values().iter().all(|&v| v == 0.0));

        // Perturb one pixel: the gradient lives on inliers and follows the closed form.
        let mut bumped = mono.clone();
        bumped[4] += 0.5;
        let g = dssi_loss_grad(&row(&pred), &row(&bumped), &all(10), 0.8).unwrap();
        let a = g.report.alignment_refined;
        let n = g.report.inlier_count as f64;
        for i in 0..10 {
            let expected = if g.report.inlier_mask.get(0, i) {
                2.0 * a.scale * (a.scale * pred[i] + a.shift - bumped[i]) / n
            } else {
                0.0
            };
            assert!((g.gradient.get(0, i) - expected).abs() < 1e-15);
        }
        assert!(!g.report.inlier_mask.get(0, 4));
    }

    #[test]
    fn combined_examples() {
        let pred = row(&[1.0, 2.0, 3.0, 4.0]);
        let mono = row(&[0.1, 0.2, 0.3, 0.4]);
        let gt = row(&[2.0, 4.0, 3.0, 4.0]);
        let b0 = combined_loss(&pred, &gt, &all(4), &mono, &all(4), 0.8, 0.0).unwrap();
        assert_eq!(b0.total, b0.sparse);
        assert_eq!(b0.sparse, 0.75);

        for beta in [0.0, 1.0, 7.5] {
            let b = combined_loss(&pred, &pred, &all(4), &pred, &all(4), 0.8, beta).unwrap();
            assert_eq!(b.total, 0.0);
        }
        assert!(combined_loss(&pred, &gt, &all(4), &mono, &all(4), 0.8, -1.0).is_err());
    }

    #[test]
    fn combined_arithmetic() {
        // The fit is a = 1, b = 0 with residuals of +-0.5 everywhere, so every
        // squared residual equals the threshold and the full mask is kept.
        let pred = row(&[1.0, 2.0, 1.0, 2.0]);
        let mono = row(&[1.5, 1.5, 0.5, 2.5]);
        let gt = row(&[2.0, 4.0, 2.0, 4.0]);
        let b = combined_loss(&pred, &gt, &all(4), &mono, &all(4), 0.8, 2.0).unwrap();
        assert_eq!(b.sparse, 1.5);
        assert_eq!(b.dssi, 0.25);
        assert_eq!(b.total, 2.0);
    }

    #[test]
    fn works_in_single_precision() {
        let pred: Vec<f32> = (0..16).map(|i| i as f32).collect();
        let mono: Vec<f32> = pred.iter().map(|p| 0.25 * p + 3.0).collect();
        let p = DisparityField::dense(16, 1, pred).unwrap();
        let m = DisparityField::dense(16, 1, mono).unwrap();
        let r = dssi_loss(&p, &m, &BitMask::new(16, 1, true), 0.8).unwrap();
        assert!((r.alignment_refined.scale - 0.25).abs() < 1e-6);
        assert!(r.loss < 1e-10);
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<bool>)> {
        (
            proptest::collection::vec(0.0f64..100.0, 36),
            proptest::collection::vec(-1.0f64..1.0, 36),
            proptest::collection::vec(proptest::bool::weighted(0.85), 36),
            0.1f64..5.0,
            -10.0f64..10.0,
        )
            .prop_map(|(p, noise, keep, a, b)| {
                let m = p.iter().zip(&noise).map(|(p, n)| a * p + b + n).collect();
                (p, m, keep)
            })
    }

    proptest! {
        #[test]
        fn affine_invariance((p, m, keep) in instance(), s in 0.2f64..8.0, t in -20.0f64..20.0) {
            let mask = BitMask::from_bits(6, 6, keep).unwrap();
            prop_assume!(mask.count_ones() >= 4);
            let pred = DisparityField::dense(6, 6, p).unwrap();
            let mono = DisparityField::dense(6, 6, m).unwrap();
            let moved = pred.map(|v| s * v + t).unwrap();
            let r0 = dssi_loss(&pred, &mono, &mask, 0.8).unwrap();
            let r1 = dssi_loss(&moved, &mono, &mask, 0.8).unwrap();
            prop_assert_eq!(&r0.inlier_mask, &r1.inlier_mask);
            prop_assert!((r0.loss - r1.loss).abs() / r0.loss.max(1e-12) < 1e-9);
        }

        #[test]
        fn inliers_stay_inside_mask((p, m, keep) in instance(), q in 0.3f64..0.95) {
            let mask = BitMask::from_bits(6, 6, keep).unwrap();
            prop_assume!(mask.count_ones() >= 2);
            let pred = DisparityField::dense(6, 6, p).unwrap();
            let mono = DisparityField::dense(6, 6, m).unwrap();
            let r = dssi_loss(&pred, &mono, &mask, q).unwrap();
            prop_assert!(r.inlier_mask.is_subset_of(&mask));
            prop_assert_eq!(r.inlier_count, r.inlier_mask.count_ones());
            prop_assert!(r.loss >= 0.0);
        }
    }
}
