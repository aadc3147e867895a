//! Per-pixel and aggregate losses over normal fields.
//!
//! Three data terms are provided: the quaternion angular loss
//! `atan2(|pred x gt|, pred . gt)`, the cosine loss `1 - pred . gt`, and the
//! L2 loss `|pred - gt|`. Each comes with its analytic gradient with respect
//! to the prediction treated as an unconstrained 3-vector; projecting back to
//! the sphere is the optimizer's job. The combined objective weights the data
//! term against a spatial smoothness term:
//!
//! `E(p) = (1 - alpha) M(p) loss(p) + alpha M(p) |grad pred(p)|`
//!
//! Aggregation is the mean over masked-in pixels so values are comparable
//! across mask densities.

use crate::error::{Error, Result};
use crate::field::NormalField;
use crate::geometry::{angular_difference_grad_raw, angular_difference_raw, Vec3};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Norm below which the L2 gradient direction is undefined.
const L2_DEGENERATE_EPS: f64 = 1e-12;

/// Which data term to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LossKind {
    #[default]
    Quaternion,
    Cosine,
    L2,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::Quaternion => "quat",
            LossKind::Cosine => "cos",
            LossKind::L2 => "l2",
        }
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quat" | "quaternion" => Ok(LossKind::Quaternion),
            "cos" | "cosine" => Ok(LossKind::Cosine),
            "l2" => Ok(LossKind::L2),
            other => Err(Error::InvalidConfig(format!("unknown loss kind: {other}"))),
        }
    }
}

/// Data term plus smoothness weight.
#[derive(Debug, Clone, Copy)]
pub struct LossConfig {
    pub kind: LossKind,
    pub alpha: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            kind: LossKind::Quaternion,
            alpha: 0.025,
        }
    }
}

impl LossConfig {
    pub fn new(kind: LossKind, alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in [0, 1), got {alpha}"
            )));
        }
        Ok(LossConfig { kind, alpha })
    }
}

/// Result of a loss evaluation.
///
/// `per_pixel` and `gradient` are row-major grids; masked-out pixels hold
/// zero in both. `gradient` is the gradient of the per-pixel term, i.e. of
/// the *sum* of losses; divide by `valid_count` for the gradient of the mean
/// `objective`.
#[derive(Debug, Clone)]
pub struct LossReport {
    pub objective: f64,
    pub per_pixel: Vec<f64>,
    pub gradient: Vec<Vec3>,
    pub valid_count: usize,
}

impl LossReport {
    fn from_grids(per_pixel: Vec<f64>, gradient: Vec<Vec3>, mask: &[bool]) -> Self {
        let valid_count = mask.iter().filter(|&&m| m).count();
        // Deterministic row-major reduction.
        let sum: f64 = per_pixel.iter().sum();
        LossReport {
            objective: sum / valid_count.max(1) as f64,
            per_pixel,
            gradient,
            valid_count,
        }
    }

    /// Gradient of the mean objective at pixel `i`.
    pub fn objective_gradient(&self, i: usize) -> Vec3 {
        self.gradient[i] * (1.0 / self.valid_count.max(1) as f64)
    }
}

fn per_pixel_loss(
    kind: LossKind,
    pred: &NormalField,
    gt: &NormalField,
    mask: &[bool],
) -> (Vec<f64>, Vec<Vec3>) {
    let n = mask.len();
    let mut per_pixel = vec![0.0; n];
    let mut gradient = vec![Vec3::ZERO; n];
    for i in 0..n {
        if !mask[i] {
            continue;
        }
        let p = pred.normals()[i];
        let g = gt.normals()[i];
        match kind {
            LossKind::Quaternion => {
                per_pixel[i] = angular_difference_raw(p, g);
                let (grad, _degenerate) = angular_difference_grad_raw(p, g);
                gradient[i] = grad;
            }
            LossKind::Cosine => {
                per_pixel[i] = 1.0 - p.dot(g);
                gradient[i] = -g;
            }
            LossKind::L2 => {
                let d = p - g;
                let norm = d.norm();
                per_pixel[i] = norm;
                if norm > L2_DEGENERATE_EPS {
                    gradient[i] = d * (1.0 / norm);
                }
            }
        }
    }
    (per_pixel, gradient)
}

fn data_loss(kind: LossKind, pred: &NormalField, gt: &NormalField) -> Result<LossReport> {
    let mask = pred.intersect_mask(gt)?;
    let (per_pixel, gradient) = per_pixel_loss(kind, pred, gt, &mask);
    Ok(LossReport::from_grids(per_pixel, gradient, &mask))
}

/// Angular loss per pixel: `theta = atan2(|pred x gt|, pred . gt)` in radians.
pub fn quaternion_loss(pred: &NormalField, gt: &NormalField) -> Result<LossReport> {
    data_loss(LossKind::Quaternion, pred, gt)
}

/// Cosine dissimilarity per pixel: `1 - pred . gt`.
pub fn cosine_loss(pred: &NormalField, gt: &NormalField) -> Result<LossReport> {
    data_loss(LossKind::Cosine, pred, gt)
}

/// Euclidean distance per pixel: `|pred - gt|`.
pub fn l2_loss(pred: &NormalField, gt: &NormalField) -> Result<LossReport> {
    data_loss(LossKind::L2, pred, gt)
}

/// Forward spatial difference at `(u, v)` toward `(u+1, v)` and `(v+1)`.
/// Differences whose endpoints are out of bounds or masked out are zero.
fn forward_diffs(field: &NormalField, mask: &[bool], u: usize, v: usize) -> (Vec3, Vec3) {
    let (w, h) = field.dims();
    let i = field.idx(u, v);
    let here = field.normals()[i];
    let dx = if u + 1 < w && mask[i + 1] {
        field.normals()[i + 1] - here
    } else {
        Vec3::ZERO
    };
    let dy = if v + 1 < h && mask[i + w] {
        field.normals()[i + w] - here
    } else {
        Vec3::ZERO
    };
    (dx, dy)
}

fn smoothness_with_mask(pred: &NormalField, mask: &[bool]) -> Result<LossReport> {
    let (w, h) = pred.dims();
    if w < 2 && h < 2 {
        return Err(Error::TooSmall {
            width: w,
            height: h,
        });
    }
    let n = w * h;
    let mut per_pixel = vec![0.0; n];
    let mut gradient = vec![Vec3::ZERO; n];
    for v in 0..h {
        for u in 0..w {
            let i = v * w + u;
            if !mask[i] {
                continue;
            }
            let (dx, dy) = forward_diffs(pred, mask, u, v);
            let norm = (dx.norm_squared() + dy.norm_squared()).sqrt();
            per_pixel[i] = norm;
            if norm > L2_DEGENERATE_EPS {
                let inv = 1.0 / norm;
                // Adjoint of the stacked forward difference.
                gradient[i] += (dx + dy) * -inv;
                if dx != Vec3::ZERO {
                    gradient[i + 1] += dx * inv;
                }
                if dy != Vec3::ZERO {
                    gradient[i + w] += dy * inv;
                }
            }
        }
    }
    Ok(LossReport::from_grids(per_pixel, gradient, mask))
}

/// Smoothness term: per pixel, the Euclidean norm of the stacked forward
/// differences of the three channels. Errors with `TooSmall` only when the
/// field is a single pixel; a one-row or one-column field still has
/// differences along its long axis.
pub fn smoothness(pred: &NormalField) -> Result<LossReport> {
    smoothness_with_mask(pred, pred.mask())
}

/// The combined objective: `(1 - alpha) * data + alpha * smoothness`, both
/// terms under the intersected mask and divided by the same valid-pixel
/// count.
pub fn objective(pred: &NormalField, gt: &NormalField, cfg: &LossConfig) -> Result<LossReport> {
    let mask = pred.intersect_mask(gt)?;
    let (mut per_pixel, mut gradient) = per_pixel_loss(cfg.kind, pred, gt, &mask);
    let data_weight = 1.0 - cfg.alpha;
    if cfg.alpha > 0.0 {
        let sm = smoothness_with_mask(pred, &mask)?;
        for i in 0..per_pixel.len() {
            per_pixel[i] = data_weight * per_pixel[i] + cfg.alpha * sm.per_pixel[i];
            gradient[i] = gradient[i] * data_weight + sm.gradient[i] * cfg.alpha;
        }
    } else {
        for i in 0..per_pixel.len() {
            per_pixel[i] *= data_weight;
            gradient[i] = gradient[i] * data_weight;
        }
    }
    Ok(LossReport::from_grids(per_pixel, gradient, &mask))
}

/// Verifies the analytic gradient of [`objective`] against central finite
/// differences of the scalar objective.
///
/// Samples masked-in pixel components (all of them when the field is small,
/// otherwise at least 300 drawn with the given seed), perturbs each by
/// `+/-step`, and returns the worst relative discrepancy, measured as
/// `|fd - analytic| / max(|fd|, |analytic|, 1)`.
pub fn finite_difference_check(
    pred: &NormalField,
    gt: &NormalField,
    cfg: &LossConfig,
    step: f64,
    seed: u64,
) -> Result<f64> {
    if !(1e-8..1e-3).contains(&step) {
        return Err(Error::InvalidConfig(format!(
            "finite-difference step must lie in (1e-8, 1e-3), got {step}"
        )));
    }
    let mask = pred.intersect_mask(gt)?;
    let report = objective(pred, gt, cfg)?;
    let count = report.valid_count.max(1) as f64;

    let mut components: Vec<(usize, usize)> = mask
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .flat_map(|(i, _)| (0..3).map(move |c| (i, c)))
        .collect();
    const MIN_SAMPLES: usize = 300;
    if components.len() > MIN_SAMPLES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        components.shuffle(&mut rng);
        components.truncate(MIN_SAMPLES);
    }

    let mut probe = pred.clone();
    let mut worst = 0.0_f64;
    for (i, c) in components {
        let base = pred.normals()[i].get(c);
        probe.normals_mut()[i].set(c, base + step);
        let hi = objective(&probe, gt, cfg)?.objective;
        probe.normals_mut()[i].set(c, base - step);
        let lo = objective(&probe, gt, cfg)?.objective;
        probe.normals_mut()[i].set(c, base);

        let fd = (hi - lo) / (2.0 * step);
        let analytic = report.gradient[i].get(c) / count;
        let rel = (fd - analytic).abs() / fd.abs().max(analytic.abs()).max(1.0);
        worst = worst.max(rel);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Rotation3, UnitVec3};
    use crate::synthetic;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn unit(x: f64, y: f64, z: f64) -> UnitVec3 {
        UnitVec3::new(x, y, z).unwrap()
    }

    fn offset_pair(deg: f64) -> (NormalField, NormalField) {
        let gt = NormalField::constant(8, 4, unit(0.0, 0.0, 1.0));
        let r = Rotation3::pitch(deg.to_radians());
        let mut pred = gt.clone();
        for n in pred.normals_mut() {
            *n = r.apply(*n);
        }
        (pred, gt)
    }

    #[test]
    fn quaternion_loss_identity_is_zero() {
        let f = NormalField::constant(4, 4, unit(0.3, -0.5, 0.8));
        let r = quaternion_loss(&f, &f).unwrap();
        assert_eq!(r.objective, 0.0);
    }

    #[test]
    fn quaternion_loss_constant_offset() {
        let (pred, gt) = offset_pair(10.0);
        let r = quaternion_loss(&pred, &gt).unwrap();
        assert_abs_diff_eq!(r.objective, 10.0_f64.to_radians(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.objective, 0.174533, epsilon = 1e-6);
    }

    #[test]
    fn quaternion_loss_mean_over_valid_only() {
        let (mut pred, gt) = offset_pair(10.0);
        for v in 0..4 {
            for u in 0..4 {
                pred.set_invalid(u, v);
            }
        }
        let r = quaternion_loss(&pred, &gt).unwrap();
        assert_eq!(r.valid_count, 16);
        assert_abs_diff_eq!(r.objective, 10.0_f64.to_radians(), epsilon = 1e-12);
    }

    #[test]
    fn cosine_loss_reference_values() {
        let a = NormalField::constant(2, 2, unit(1.0, 0.0, 0.0));
        let b = NormalField::constant(2, 2, unit(0.0, 1.0, 0.0));
        let c = NormalField::constant(2, 2, unit(-1.0, 0.0, 0.0));
        assert_eq!(cosine_loss(&a, &a).unwrap().objective, 0.0);
        assert_abs_diff_eq!(cosine_loss(&a, &b).unwrap().objective, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cosine_loss(&a, &c).unwrap().objective, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn l2_loss_reference_values() {
        let a = NormalField::constant(2, 2, unit(1.0, 0.0, 0.0));
        let b = NormalField::constant(2, 2, unit(0.0, 1.0, 0.0));
        let c = NormalField::constant(2, 2, unit(-1.0, 0.0, 0.0));
        assert_eq!(l2_loss(&a, &a).unwrap().objective, 0.0);
        assert_abs_diff_eq!(
            l2_loss(&a, &b).unwrap().objective,
            2.0_f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(l2_loss(&a, &c).unwrap().objective, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = NormalField::constant(2, 2, unit(1.0, 0.0, 0.0));
        let b = NormalField::constant(4, 2, unit(1.0, 0.0, 0.0));
        assert!(matches!(
            quaternion_loss(&a, &b),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn smoothness_of_constant_field_is_zero() {
        let f = NormalField::constant(6, 3, unit(0.0, 1.0, 0.0));
        let r = smoothness(&f).unwrap();
        assert_eq!(r.objective, 0.0);
        assert!(r.per_pixel.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn smoothness_vertical_seam() {
        // Two constant half planes 90 degrees apart: only the last column of
        // the left plane sees a nonzero (horizontal) difference of norm
        // sqrt(2).
        let mut f = NormalField::constant(6, 4, unit(0.0, 0.0, 1.0));
        for v in 0..4 {
            for u in 3..6 {
                f.set(u, v, unit(1.0, 0.0, 0.0));
            }
        }
        let r = smoothness(&f).unwrap();
        for v in 0..4 {
            for u in 0..6 {
                let expect = if u == 2 { 2.0_f64.sqrt() } else { 0.0 };
                assert_abs_diff_eq!(r.per_pixel[f.idx(u, v)], expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn smoothness_single_row_uses_horizontal_only() {
        let mut f = NormalField::constant(2, 1, unit(0.0, 0.0, 1.0));
        f.set(1, 0, unit(1.0, 0.0, 0.0));
        let r = smoothness(&f).unwrap();
        assert_abs_diff_eq!(r.per_pixel[0], 2.0_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn smoothness_rejects_single_pixel() {
        let f = NormalField::constant(1, 1, unit(0.0, 0.0, 1.0));
        assert!(matches!(smoothness(&f), Err(Error::TooSmall { .. })));
    }

    #[test]
    fn objective_weights_terms() {
        let (pred, gt) = offset_pair(10.0);
        let cfg = LossConfig::new(LossKind::Quaternion, 0.025).unwrap();
        let r = objective(&pred, &gt, &cfg).unwrap();
        // Constant offset, zero smoothness: (1 - alpha) * theta.
        assert_abs_diff_eq!(r.objective, 0.975 * 10.0_f64.to_radians(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.objective, 0.170170, epsilon = 1e-6);
    }

    #[test]
    fn objective_alpha_zero_collapses_to_data_term() {
        let pred = synthetic::random_field(9, 5, 11);
        let gt = synthetic::random_field(9, 5, 12);
        let cfg = LossConfig::new(LossKind::Quaternion, 0.0).unwrap();
        let a = objective(&pred, &gt, &cfg).unwrap();
        let b = quaternion_loss(&pred, &gt).unwrap();
        assert_eq!(a.objective, b.objective);
    }

    #[test]
    fn objective_zero_at_constant_ground_truth() {
        let gt = NormalField::constant(5, 4, unit(0.0, 1.0, 0.0));
        for alpha in [0.0, 0.025, 0.5] {
            let cfg = LossConfig::new(LossKind::Quaternion, alpha).unwrap();
            assert_eq!(objective(&gt, &gt, &cfg).unwrap().objective, 0.0);
        }
    }

    #[test]
    fn masked_out_pixels_never_influence_objective() {
        let mut pred = synthetic::random_field(8, 6, 21);
        let gt = synthetic::random_field(8, 6, 22);
        pred.set_invalid(3, 2);
        pred.set_invalid(7, 5);
        let cfg = LossConfig::default();
        let before = objective(&pred, &gt, &cfg).unwrap().objective;
        let i = pred.idx(3, 2);
        pred.normals_mut()[i] = Vec3::new(9.0, -3.0, 1.0);
        let after = objective(&pred, &gt, &cfg).unwrap().objective;
        assert_eq!(before.to_bits(), after.to_bits());
    }

    #[test]
    fn per_pixel_ranges() {
        let pred = synthetic::random_field(16, 8, 1);
        let gt = synthetic::random_field(16, 8, 2);
        let q = quaternion_loss(&pred, &gt).unwrap();
        let c = cosine_loss(&pred, &gt).unwrap();
        let l = l2_loss(&pred, &gt).unwrap();
        assert!(q.per_pixel.iter().all(|&x| (0.0..=PI).contains(&x)));
        assert!(c.per_pixel.iter().all(|&x| (0.0..=2.0 + 1e-12).contains(&x)));
        assert!(l.per_pixel.iter().all(|&x| (0.0..=2.0 + 1e-12).contains(&x)));
        // c = 1 - cos(theta) per pixel.
        for i in 0..q.per_pixel.len() {
            assert_abs_diff_eq!(
                c.per_pixel[i],
                1.0 - q.per_pixel[i].cos(),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn finite_difference_check_quaternion() {
        let pred = synthetic::random_field(16, 8, 100);
        let gt = synthetic::random_field(16, 8, 101);
        let cfg = LossConfig::new(LossKind::Quaternion, 0.0).unwrap();
        let err = finite_difference_check(&pred, &gt, &cfg, 1e-6, 7).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn finite_difference_check_cosine() {
        let pred = synthetic::random_field(16, 8, 100);
        let gt = synthetic::random_field(16, 8, 101);
        let cfg = LossConfig::new(LossKind::Cosine, 0.0).unwrap();
        let err = finite_difference_check(&pred, &gt, &cfg, 1e-6, 7).unwrap();
        assert!(err < 1e-6, "max relative error {err}");
    }

    #[test]
    fn finite_difference_check_combined() {
        let pred = synthetic::random_field(16, 8, 100);
        let gt = synthetic::random_field(16, 8, 101);
        let cfg = LossConfig::new(LossKind::Quaternion, 0.025).unwrap();
        let err = finite_difference_check(&pred, &gt, &cfg, 1e-6, 7).unwrap();
        assert!(err < 1e-4, "max relative error {err}");
    }

    #[test]
    fn loss_slope_contrast_in_theta() {
        // d(quat)/d(theta) = 1 everywhere; d(cosine)/d(theta) = sin(theta),
        // which collapses near pi. Checked by finite differences in theta.
        let gt = unit(0.0, 0.0, 1.0);
        let h = 1e-5;
        for theta in [0.3, 1.0, PI / 2.0, 2.5, PI - 0.05] {
            let at = |t: f64| {
                let p = Rotation3::pitch(t).apply(gt.as_vec());
                let pn = UnitVec3::new(p.x, p.y, p.z).unwrap();
                (
                    crate::geometry::angular_difference(pn, gt),
                    1.0 - pn.as_vec().dot(gt.as_vec()),
                )
            };
            let (q_hi, c_hi) = at(theta + h);
            let (q_lo, c_lo) = at(theta - h);
            let dq = (q_hi - q_lo) / (2.0 * h);
            let dc = (c_hi - c_lo) / (2.0 * h);
            assert_abs_diff_eq!(dq, 1.0, epsilon = 1e-6);
            assert_abs_diff_eq!(dc, theta.sin(), epsilon = 1e-6);
        }
        assert!((PI - 0.05_f64).sin() < 0.1);
    }
}
