//! Loss landscapes: each loss evaluated against a fixed reference direction
//! over an equirectangular grid of query directions, plus the slope report
//! that quantifies how much flatter the cosine loss is than the angular one
//! near the antipode.

use crate::error::{Error, Result};
use crate::geometry::{angular_difference, UnitVec3};
use crate::io::ScalarGrid;
use crate::loss::LossKind;
use crate::projection::{direction_to_pixel, pixel_to_direction};
use rayon::prelude::*;

/// A scalar landscape grid. Kept in f64: the per-cell identity check
/// `quat = acos(1 - cosine)` is ill conditioned near the antipode and does
/// not survive f32 quantization.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Landscape {
    /// Narrowed copy for PFM output.
    pub fn to_scalar_grid(&self) -> ScalarGrid {
        ScalarGrid {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&x| x as f32).collect(),
        }
    }
}

fn per_pair_loss(kind: LossKind, a: UnitVec3, b: UnitVec3) -> f64 {
    match kind {
        LossKind::Quaternion => angular_difference(a, b),
        LossKind::Cosine => 1.0 - a.as_vec().dot(b.as_vec()),
        LossKind::L2 => (a.as_vec() - b.as_vec()).norm(),
    }
}

/// `width x height` grid with cell `(u, v)` holding
/// `loss(reference, pixel_to_direction(u, v))`.
pub fn generate_landscape(
    kind: LossKind,
    reference: UnitVec3,
    width: usize,
    height: usize,
) -> Result<Landscape> {
    if width != 2 * height || height == 0 {
        return Err(Error::BadAspect { width, height });
    }
    let mut data = vec![0.0f64; width * height];
    data.par_chunks_mut(width)
        .enumerate()
        .for_each(|(v, row)| {
            for (u, cell) in row.iter_mut().enumerate() {
                let d = pixel_to_direction(u, v, width, height).expect("in bounds");
                *cell = per_pair_loss(kind, reference, d);
            }
        });
    Ok(Landscape {
        width,
        height,
        data,
    })
}

/// Slope statistics of the quaternion and cosine landscapes along the grid
/// row through the reference, measured against the arc angle to the
/// reference.
#[derive(Debug, Clone)]
pub struct ConvexityReport {
    /// Min/max of `d(quat)/d(theta)` over `theta in (0.05, pi - 0.05)`.
    pub quat_min_deriv: f64,
    pub quat_max_deriv: f64,
    /// Max of `d(cos)/d(theta)` over the tail `theta in [pi - 0.2, pi)`.
    pub cos_max_deriv_tail: f64,
    /// Max per-cell deviation of `quat - acos(1 - cos)` over the grids.
    pub identity_max_abs_diff: f64,
}

/// Finite-difference slopes along the reference row of both landscapes.
///
/// Walking half the row from the reference column, the angle to the
/// reference grows monotonically to (nearly) pi, so consecutive cells give
/// the derivative with respect to arc angle; the midpoint angle labels each
/// estimate. Both grids must come from [`generate_landscape`] with the same
/// reference.
pub fn landscape_convexity_report(
    quat: &Landscape,
    cosine: &Landscape,
    reference: UnitVec3,
) -> Result<ConvexityReport> {
    if quat.width != cosine.width || quat.height != cosine.height {
        return Err(Error::ShapeMismatch {
            expected: (quat.width, quat.height),
            actual: (cosine.width, cosine.height),
        });
    }
    let (width, height) = (quat.width, quat.height);
    if width != 2 * height || height == 0 {
        return Err(Error::BadAspect { width, height });
    }

    let mut identity_max = 0.0f64;
    for i in 0..quat.data.len() {
        let q = quat.data[i];
        let c = cosine.data[i];
        identity_max = identity_max.max((q - (1.0 - c).clamp(-1.0, 1.0).acos()).abs());
    }

    let (u_ref, v_ref) = direction_to_pixel(reference, width, height);
    let u0 = (u_ref + 0.5).floor().rem_euclid(width as f64) as usize;
    let v0 = ((v_ref + 0.5).floor().max(0.0) as usize).min(height - 1);

    // Angle to the reference and losses at each step along the row.
    let steps = width / 2;
    let samples: Vec<(f64, f64, f64)> = (0..=steps)
        .map(|k| {
            let u = (u0 + k) % width;
            let d = pixel_to_direction(u, v0, width, height).expect("in bounds");
            let theta = angular_difference(reference, d);
            let i = v0 * width + u;
            (theta, quat.data[i], cosine.data[i])
        })
        .collect();

    let mut quat_min = f64::INFINITY;
    let mut quat_max = f64::NEG_INFINITY;
    let mut cos_tail_max = f64::NEG_INFINITY;
    for pair in samples.windows(2) {
        let (t0, q0, c0) = pair[0];
        let (t1, q1, c1) = pair[1];
        let dt = t1 - t0;
        if dt.abs() < 1e-9 {
            continue;
        }
        let mid = 0.5 * (t0 + t1);
        let dq = (q1 - q0) / dt;
        let dc = (c1 - c0) / dt;
        if mid > 0.05 && mid < std::f64::consts::PI - 0.05 {
            quat_min = quat_min.min(dq);
            quat_max = quat_max.max(dq);
        }
        if mid >= std::f64::consts::PI - 0.2 {
            cos_tail_max = cos_tail_max.max(dc);
        }
    }

    Ok(ConvexityReport {
        quat_min_deriv: quat_min,
        quat_max_deriv: quat_max,
        cos_max_deriv_tail: cos_tail_max,
        identity_max_abs_diff: identity_max,
    })
}
