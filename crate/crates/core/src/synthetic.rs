//! Seeded generators for synthetic normal fields.
//!
//! Used by the gradient checker, the fitter's noise model and the test
//! suites. Everything is driven by a counter-based RNG (ChaCha8) so results
//! are identical across platforms and thread counts for a fixed seed.

use crate::field::NormalField;
use crate::geometry::{normalize, Rotation3, UnitVec3, Vec3};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A uniformly distributed unit vector.
pub fn random_unit<R: Rng>(rng: &mut R) -> UnitVec3 {
    loop {
        let v = Vec3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        if let Ok(u) = normalize(v) {
            return u;
        }
    }
}

/// A fully valid field of i.i.d. random directions.
pub fn random_field(width: usize, height: usize, seed: u64) -> NormalField {
    let mut rng = rng_from_seed(seed);
    let mut field = NormalField::new_empty(width, height);
    for v in 0..height {
        for u in 0..width {
            field.set(u, v, random_unit(&mut rng));
        }
    }
    field
}

/// A smooth, fully valid field: slowly varying tilts around +z.
pub fn smooth_field(width: usize, height: usize) -> NormalField {
    let mut field = NormalField::new_empty(width, height);
    for v in 0..height {
        for u in 0..width {
            let s = u as f64 / width as f64 * std::f64::consts::TAU;
            let t = v as f64 / height as f64 * std::f64::consts::PI;
            let n = normalize(Vec3::new(0.35 * s.sin(), 0.35 * t.cos(), 1.0)).unwrap();
            field.set(u, v, n);
        }
    }
    field
}

/// A field with a sharp vertical seam: the left half tilts one way, the
/// right half the other, 90 degrees apart. Exercises the smoothness term's
/// edge behavior.
pub fn seam_field(width: usize, height: usize) -> NormalField {
    let mut field = NormalField::new_empty(width, height);
    let left = UnitVec3::new(0.0, 0.0, 1.0).unwrap();
    let right = UnitVec3::new(1.0, 0.0, 0.0).unwrap();
    for v in 0..height {
        for u in 0..width {
            field.set(u, v, if u < width / 2 { left } else { right });
        }
    }
    field
}

/// An analytic environment map sampled onto a 2:1 equirectangular grid.
pub fn analytic_env(
    height: usize,
    f: impl Fn(UnitVec3) -> [f64; 3],
) -> crate::io::HdrImage {
    let width = 2 * height;
    let mut img = crate::io::HdrImage::new(width, height);
    for v in 0..height {
        for u in 0..width {
            let d = crate::projection::pixel_to_direction(u, v, width, height)
                .expect("2:1 grid in bounds");
            let val = f(d);
            img.pixels[v * width + u] = [val[0] as f32, val[1] as f32, val[2] as f32];
        }
    }
    img
}

/// Pixels of `gt` whose masked-in 4-neighborhood contains a normal more than
/// 30 degrees away. Used to score over-smoothing at discontinuities.
pub fn edge_pixels(gt: &NormalField) -> Vec<bool> {
    let (w, h) = gt.dims();
    let threshold = 30.0_f64.to_radians();
    let mut edges = vec![false; w * h];
    for v in 0..h {
        for u in 0..w {
            if !gt.is_valid(u, v) {
                continue;
            }
            let here = gt.get(u, v);
            let mut is_edge = false;
            let mut visit = |uu: usize, vv: usize| {
                if gt.is_valid(uu, vv) {
                    let angle = crate::geometry::angular_difference(
                        UnitVec3::from_unit_unchecked(here),
                        UnitVec3::from_unit_unchecked(gt.get(uu, vv)),
                    );
                    if angle > threshold {
                        is_edge = true;
                    }
                }
            };
            if u > 0 {
                visit(u - 1, v);
            }
            if u + 1 < w {
                visit(u + 1, v);
            }
            if v > 0 {
                visit(u, v - 1);
            }
            if v + 1 < h {
                visit(u, v + 1);
            }
            edges[gt.idx(u, v)] = is_edge;
        }
    }
    edges
}

/// Rotates each masked-in normal by a random axis-angle whose angle follows
/// a folded normal with scale `sigma_deg` degrees.
pub fn perturb_field(gt: &NormalField, sigma_deg: f64, rng: &mut ChaCha8Rng) -> NormalField {
    let mut out = gt.clone();
    let sigma = sigma_deg.to_radians();
    for i in 0..out.normals().len() {
        if !out.mask()[i] {
            continue;
        }
        let axis = random_unit(rng);
        let angle = (rng.sample::<f64, _>(StandardNormal) * sigma).abs();
        let r = Rotation3::axis_angle(axis, angle);
        let rotated = r.apply(out.normals()[i]);
        out.normals_mut()[i] = normalize(rotated).expect("rotation preserves norm").as_vec();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_field_is_seed_deterministic() {
        let a = random_field(7, 3, 42);
        let b = random_field(7, 3, 42);
        assert_eq!(a, b);
        let c = random_field(7, 3, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn perturbation_scales_with_sigma() {
        let gt = smooth_field(16, 8);
        let mut rng = rng_from_seed(9);
        let noisy = perturb_field(&gt, 20.0, &mut rng);
        noisy.validate_units().unwrap();
        let r = crate::loss::quaternion_loss(&noisy, &gt).unwrap();
        let mean_deg = r.objective.to_degrees();
        // Folded normal with sigma = 20 has mean about 16 degrees.
        assert!((8.0..30.0).contains(&mean_deg), "mean {mean_deg}");
    }

    #[test]
    fn seam_field_edges_hug_the_seam() {
        let f = seam_field(8, 4);
        let edges = edge_pixels(&f);
        assert!(edges[f.idx(3, 0)]);
        assert!(edges[f.idx(4, 0)]);
        assert!(!edges[f.idx(0, 0)]);
        assert!(!edges[f.idx(7, 3)]);
    }
}
