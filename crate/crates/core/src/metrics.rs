//! Angular-error statistics and SVD (Kabsch) alignment.
//!
//! Predictions produced in a different global orientation are aligned with a
//! single proper rotation minimizing the summed squared distance to the
//! ground truth before scoring; reflections are excluded because a reflected
//! normal frame is physically inadmissible.

use crate::error::{Error, Result};
use crate::field::NormalField;
use crate::geometry::{angular_difference, normalize, Rotation3, UnitVec3};
use nalgebra::Matrix3;

/// Coverage thresholds, in degrees.
pub const COVERAGE_THRESHOLDS_DEG: [f64; 4] = [5.0, 11.25, 22.5, 30.0];

const DEGENERATE_SV_RATIO: f64 = 1e-9;

/// Per-pixel angular errors in degrees plus the mask they were computed
/// under.
#[derive(Debug, Clone)]
pub struct ErrorMap {
    pub width: usize,
    pub height: usize,
    pub degrees: Vec<f64>,
    pub mask: Vec<bool>,
}

/// Summary statistics over an [`ErrorMap`].
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub mean_deg: f64,
    pub median_deg: f64,
    pub rmse_deg: f64,
    /// Percentage of valid pixels with error `<= t`, per threshold in
    /// [`COVERAGE_THRESHOLDS_DEG`] order.
    pub coverage_pct: [f64; 4],
    pub valid_pixel_count: usize,
}

/// Per-pixel angular error between two fields under the intersection of
/// their masks and an optional extra mask (e.g. the pole mask).
pub fn angular_error_map(
    pred: &NormalField,
    gt: &NormalField,
    extra_mask: Option<&[bool]>,
) -> Result<ErrorMap> {
    let mut mask = pred.intersect_mask(gt)?;
    if let Some(extra) = extra_mask {
        if extra.len() != mask.len() {
            return Err(Error::ShapeMismatch {
                expected: (mask.len(), 1),
                actual: (extra.len(), 1),
            });
        }
        for (m, &e) in mask.iter_mut().zip(extra) {
            *m &= e;
        }
    }
    let degrees = mask
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            if m {
                let a = UnitVec3::from_unit_unchecked(pred.normals()[i]);
                let b = UnitVec3::from_unit_unchecked(gt.normals()[i]);
                angular_difference(a, b).to_degrees()
            } else {
                0.0
            }
        })
        .collect();
    Ok(ErrorMap {
        width: pred.width(),
        height: pred.height(),
        degrees,
        mask,
    })
}

/// Mean/median/RMSE and coverage over the valid pixels of an error map.
/// The median of an even count is the lower-middle order statistic.
pub fn summarize(errors: &ErrorMap) -> Result<MetricsReport> {
    let mut valid: Vec<f64> = errors
        .mask
        .iter()
        .zip(&errors.degrees)
        .filter_map(|(&m, &e)| m.then_some(e))
        .collect();
    if valid.is_empty() {
        return Err(Error::EmptyMask);
    }
    let n = valid.len();
    let mean = valid.iter().sum::<f64>() / n as f64;
    let rmse = (valid.iter().map(|e| e * e).sum::<f64>() / n as f64).sqrt();
    valid.sort_by(|a, b| a.partial_cmp(b).expect("angular errors are finite"));
    let median = valid[(n - 1) / 2];
    let coverage_pct = COVERAGE_THRESHOLDS_DEG
        .map(|t| 100.0 * valid.iter().filter(|&&e| e <= t).count() as f64 / n as f64);
    Ok(MetricsReport {
        mean_deg: mean,
        median_deg: median,
        rmse_deg: rmse,
        coverage_pct,
        valid_pixel_count: n,
    })
}

/// Least-squares proper rotation aligning `pred` to `gt` (Kabsch): from the
/// correlation `H = sum pred gt^T` with SVD `H = U S V^T`, the rotation is
/// `V diag(1, 1, det(V U^T)) U^T`. Returns the rotation and the rotated,
/// renormalized prediction.
pub fn svd_align(pred: &NormalField, gt: &NormalField) -> Result<(Rotation3, NormalField)> {
    let mask = pred.intersect_mask(gt)?;
    let mut h = Matrix3::<f64>::zeros();
    let mut count = 0usize;
    for (i, &m) in mask.iter().enumerate() {
        if !m {
            continue;
        }
        let p = pred.normals()[i];
        let g = gt.normals()[i];
        let pv = nalgebra::Vector3::new(p.x, p.y, p.z);
        let gv = nalgebra::Vector3::new(g.x, g.y, g.z);
        h += pv * gv.transpose();
        count += 1;
    }
    if count < 3 {
        return Err(Error::EmptyMask);
    }

    let svd = h.svd(true, true);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    if sv[1] < DEGENERATE_SV_RATIO * sv[0] {
        return Err(Error::DegenerateCorrespondences { sigma2: sv[1] });
    }
    let u = svd.u.expect("requested");
    let v_t = svd.v_t.expect("requested");
    let v = v_t.transpose();
    let d = (v * u.transpose()).determinant();
    let correction = Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0, 1.0, d.signum()));
    let r = v * correction * u.transpose();

    let rotation = Rotation3::new([
        [r[(0, 0)], r[(0, 1)], r[(0, 2)]],
        [r[(1, 0)], r[(1, 1)], r[(1, 2)]],
        [r[(2, 0)], r[(2, 1)], r[(2, 2)]],
    ]);

    let mut aligned = pred.clone();
    for i in 0..aligned.normals().len() {
        if aligned.mask()[i] {
            let rotated = rotation.apply(aligned.normals()[i]);
            aligned.normals_mut()[i] = normalize(rotated)?.as_vec();
        }
    }
    Ok((rotation, aligned))
}
