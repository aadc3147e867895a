//! Equirectangular pixel/direction mapping, cubemap extraction and
//! reassembly, and the pole mask used when scoring cubemap-based predictions.
//!
//! Conventions, fixed for the whole crate: left-handed frame with +z forward
//! and +y up; pixel v grows downward so latitude decreases with v; longitude
//! phi = 0 at the image center column. Cube faces follow the horizontal-cross
//! layout with the front face centered at phi = 0, and every face rotation
//! maps the face-local camera frame into the global frame (front = identity).

use crate::error::{Error, Result};
use crate::field::NormalField;
use crate::geometry::{normalize, Rotation3, UnitVec3, Vec3};
use crate::io::HdrImage;
use rayon::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

/// The six cube faces, in file-naming order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CubeFace {
    Front = 0,
    Right = 1,
    Back = 2,
    Left = 3,
    Up = 4,
    Down = 5,
}

impl CubeFace {
    pub const ALL: [CubeFace; 6] = [
        CubeFace::Front,
        CubeFace::Right,
        CubeFace::Back,
        CubeFace::Left,
        CubeFace::Up,
        CubeFace::Down,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CubeFace::Front => "front",
            CubeFace::Right => "right",
            CubeFace::Back => "back",
            CubeFace::Left => "left",
            CubeFace::Up => "up",
            CubeFace::Down => "down",
        }
    }

    /// Rotation carrying face-local coordinates to the global frame.
    /// Entries are exact so the front face is exactly the identity.
    pub fn rotation(self) -> Rotation3 {
        match self {
            CubeFace::Front => Rotation3::IDENTITY,
            CubeFace::Right => Rotation3::new([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]]),
            CubeFace::Back => {
                Rotation3::new([[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]])
            }
            CubeFace::Left => Rotation3::new([[0.0, 0.0, -1.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]),
            CubeFace::Up => Rotation3::new([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, -1.0, 0.0]]),
            CubeFace::Down => Rotation3::new([[1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]),
        }
    }

    /// Face pierced by a global direction (max-component rule; ties resolve
    /// x, then y, then z).
    pub fn from_direction(d: Vec3) -> CubeFace {
        let (ax, ay, az) = (d.x.abs(), d.y.abs(), d.z.abs());
        if ax >= ay && ax >= az {
            if d.x >= 0.0 {
                CubeFace::Right
            } else {
                CubeFace::Left
            }
        } else if ay >= az {
            if d.y >= 0.0 {
                CubeFace::Up
            } else {
                CubeFace::Down
            }
        } else if d.z >= 0.0 {
            CubeFace::Front
        } else {
            CubeFace::Back
        }
    }
}

/// Six equally sized face grids of payload `T`.
#[derive(Debug, Clone)]
pub struct CubemapFaces<T> {
    pub face_size: usize,
    pub faces: [T; 6],
}

impl<T> CubemapFaces<T> {
    pub fn face(&self, f: CubeFace) -> &T {
        &self.faces[f as usize]
    }
}

/// Marker for what a cubemap carries; normals are rotated between frames,
/// colors are not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Payload {
    Normals,
    Color,
}

fn check_aspect(width: usize, height: usize) -> Result<()> {
    if width != 2 * height || height == 0 {
        return Err(Error::BadAspect { width, height });
    }
    Ok(())
}

/// Direction at the center of pixel `(u, v)` of a 2:1 equirectangular grid.
pub fn pixel_to_direction(u: usize, v: usize, width: usize, height: usize) -> Result<UnitVec3> {
    check_aspect(width, height)?;
    if u >= width || v >= height {
        return Err(Error::OutOfBounds {
            u,
            v,
            width,
            height,
        });
    }
    Ok(continuous_direction(u as f64, v as f64, width, height))
}

/// As [`pixel_to_direction`] on continuous pixel coordinates, without bounds
/// checks (longitude wraps anyway).
fn continuous_direction(u: f64, v: f64, width: usize, height: usize) -> UnitVec3 {
    let phi = 2.0 * PI * (u + 0.5) / width as f64 - PI;
    let theta = FRAC_PI_2 - PI * (v + 0.5) / height as f64;
    let (sin_t, cos_t) = theta.sin_cos();
    let (sin_p, cos_p) = phi.sin_cos();
    UnitVec3::from_unit_unchecked(Vec3::new(cos_t * sin_p, sin_t, cos_t * cos_p))
}

/// Continuous pixel coordinates whose center maps to `d`; the exact inverse
/// of [`pixel_to_direction`] at pixel centers. At the poles the longitude is
/// taken as 0 by convention.
pub fn direction_to_pixel(d: UnitVec3, width: usize, height: usize) -> (f64, f64) {
    let v = d.as_vec();
    let theta = v.y.clamp(-1.0, 1.0).asin();
    let cos_t = (1.0 - v.y * v.y).max(0.0).sqrt();
    let phi = if cos_t < 1e-12 {
        0.0
    } else {
        v.x.atan2(v.z)
    };
    let u = (phi + PI) * width as f64 / (2.0 * PI) - 0.5;
    let vv = (FRAC_PI_2 - theta) * height as f64 / PI - 0.5;
    (u, vv)
}

/// Latitude of the centers of row `v`.
pub fn row_latitude(v: usize, height: usize) -> f64 {
    FRAC_PI_2 - PI * (v as f64 + 0.5) / height as f64
}

/// Solid-angle weight of one pixel in row `v`.
pub fn pixel_solid_angle(v: usize, width: usize, height: usize) -> f64 {
    row_latitude(v, height).cos() * (2.0 * PI / width as f64) * (PI / height as f64)
}

/// Keeps rows whose center latitude satisfies `|theta| <= pi/4`, zeroing the
/// high-latitude rows that the cubemap's up/down faces cover.
pub fn pole_mask(width: usize, height: usize) -> Result<Vec<bool>> {
    check_aspect(width, height)?;
    let mut mask = vec![false; width * height];
    for v in 0..height {
        if row_latitude(v, height).abs() <= PI / 4.0 {
            mask[v * width..(v + 1) * width].fill(true);
        }
    }
    Ok(mask)
}

/// Bilinear taps for continuous coordinates with longitude wrap and latitude
/// clamp: `(index, weight)` times four, plus the nearest-neighbor index.
fn equirect_taps(u: f64, v: f64, width: usize, height: usize) -> ([(usize, f64); 4], usize) {
    let w = width as isize;
    let h = height as isize;
    let u0 = u.floor();
    let v0 = v.floor();
    let fu = u - u0;
    let fv = v - v0;
    let wrap_u = |x: isize| x.rem_euclid(w) as usize;
    let clamp_v = |y: isize| y.clamp(0, h - 1) as usize;
    let (u0i, v0i) = (u0 as isize, v0 as isize);
    let taps = [
        (clamp_v(v0i) * width + wrap_u(u0i), (1.0 - fu) * (1.0 - fv)),
        (clamp_v(v0i) * width + wrap_u(u0i + 1), fu * (1.0 - fv)),
        (clamp_v(v0i + 1) * width + wrap_u(u0i), (1.0 - fu) * fv),
        (clamp_v(v0i + 1) * width + wrap_u(u0i + 1), fu * fv),
    ];
    let nearest = clamp_v((v + 0.5).floor() as isize) * width + wrap_u((u + 0.5).floor() as isize);
    (taps, nearest)
}

/// Bilinear taps within a face, clamped at the edges.
fn face_taps(i: f64, j: f64, size: usize) -> ([(usize, f64); 4], usize) {
    let s = size as isize;
    let i0 = i.floor();
    let j0 = j.floor();
    let fi = i - i0;
    let fj = j - j0;
    let cl = |x: isize| x.clamp(0, s - 1) as usize;
    let (i0i, j0i) = (i0 as isize, j0 as isize);
    let taps = [
        (cl(j0i) * size + cl(i0i), (1.0 - fi) * (1.0 - fj)),
        (cl(j0i) * size + cl(i0i + 1), fi * (1.0 - fj)),
        (cl(j0i + 1) * size + cl(i0i), (1.0 - fi) * fj),
        (cl(j0i + 1) * size + cl(i0i + 1), fi * fj),
    ];
    let nearest = cl((j + 0.5).floor() as isize) * size + cl((i + 0.5).floor() as isize);
    (taps, nearest)
}

/// Weighted blend over masked-in taps. `None` when the nearest neighbor is
/// masked out or no tap carries weight.
fn blend(
    data: &[Vec3],
    mask: &[bool],
    taps: &[(usize, f64); 4],
    nearest: usize,
) -> Option<Vec3> {
    if !mask[nearest] {
        return None;
    }
    let mut acc = Vec3::ZERO;
    let mut total = 0.0;
    for &(idx, w) in taps {
        if mask[idx] && w > 0.0 {
            acc += data[idx] * w;
            total += w;
        }
    }
    (total > 1e-12).then(|| acc * (1.0 / total))
}

/// Face-local direction of face pixel `(i, j)`: 90-degree-FOV gnomonic grid.
fn face_pixel_local_dir(i: f64, j: f64, size: usize) -> Vec3 {
    let a = 2.0 * (i + 0.5) / size as f64 - 1.0;
    let b = 2.0 * (j + 0.5) / size as f64 - 1.0;
    Vec3::new(a, -b, 1.0)
}

fn resample_to_faces(
    data: &[Vec3],
    mask: &[bool],
    width: usize,
    height: usize,
    face_size: usize,
    payload: Payload,
) -> [(Vec<Vec3>, Vec<bool>); 6] {
    CubeFace::ALL.map(|face| {
        let rot = face.rotation();
        let rot_t = rot.transpose();
        let mut fdata = vec![Vec3::ZERO; face_size * face_size];
        let mut fmask = vec![false; face_size * face_size];
        fdata
            .par_chunks_mut(face_size)
            .zip(fmask.par_chunks_mut(face_size))
            .enumerate()
            .for_each(|(j, (drow, mrow))| {
                for i in 0..face_size {
                    let local = face_pixel_local_dir(i as f64, j as f64, face_size);
                    let global = normalize(rot.apply(local)).expect("gnomonic dir nonzero");
                    let (u, v) = direction_to_pixel(global, width, height);
                    let (taps, nearest) = equirect_taps(u, v, width, height);
                    if let Some(sample) = blend(data, mask, &taps, nearest) {
                        let value = match payload {
                            Payload::Normals => match normalize(rot_t.apply(sample)) {
                                Ok(n) => n.as_vec(),
                                Err(_) => continue,
                            },
                            Payload::Color => sample,
                        };
                        drow[i] = value;
                        mrow[i] = true;
                    }
                }
            });
        (fdata, fmask)
    })
}

/// Extracts six 90-degree gnomonic faces from a 2:1 equirectangular normal
/// field. Normal vectors are expressed in each face's local frame (rotated by
/// the transpose of the face rotation); masks resample nearest neighbor.
pub fn equirect_to_cubemap(
    field: &NormalField,
    face_size: usize,
) -> Result<CubemapFaces<NormalField>> {
    check_aspect(field.width(), field.height())?;
    if face_size < 2 {
        return Err(Error::TooSmall {
            width: face_size,
            height: face_size,
        });
    }
    let raw = resample_to_faces(
        field.normals(),
        field.mask(),
        field.width(),
        field.height(),
        face_size,
        Payload::Normals,
    );
    let faces = raw.map(|(data, mask)| {
        NormalField::from_parts(face_size, face_size, data, mask).expect("sized by construction")
    });
    Ok(CubemapFaces { face_size, faces })
}

/// Color variant of [`equirect_to_cubemap`]; no rotation is applied to the
/// payload.
pub fn equirect_to_cubemap_color(
    img: &HdrImage,
    face_size: usize,
) -> Result<CubemapFaces<HdrImage>> {
    check_aspect(img.width, img.height)?;
    if face_size < 2 {
        return Err(Error::TooSmall {
            width: face_size,
            height: face_size,
        });
    }
    let data: Vec<Vec3> = img
        .pixels
        .iter()
        .map(|p| Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64))
        .collect();
    let mask = vec![true; data.len()];
    let raw = resample_to_faces(&data, &mask, img.width, img.height, face_size, Payload::Color);
    let faces = raw.map(|(data, _)| HdrImage {
        width: face_size,
        height: face_size,
        pixels: data
            .iter()
            .map(|v| [v.x as f32, v.y as f32, v.z as f32])
            .collect(),
    });
    Ok(CubemapFaces { face_size, faces })
}

fn resample_from_faces(
    faces: &[(Vec<Vec3>, Vec<bool>); 6],
    face_size: usize,
    width: usize,
    height: usize,
    payload: Payload,
    rotate_normals: bool,
) -> (Vec<Vec3>, Vec<bool>) {
    let mut data = vec![Vec3::ZERO; width * height];
    let mut mask = vec![false; width * height];
    data.par_chunks_mut(width)
        .zip(mask.par_chunks_mut(width))
        .enumerate()
        .for_each(|(v, (drow, mrow))| {
            for u in 0..width {
                let dir = continuous_direction(u as f64, v as f64, width, height).as_vec();
                let face = CubeFace::from_direction(dir);
                let rot = face.rotation();
                let local = rot.transpose().apply(dir);
                let a = local.x / local.z;
                let b = -local.y / local.z;
                let i = (a + 1.0) * 0.5 * face_size as f64 - 0.5;
                let j = (b + 1.0) * 0.5 * face_size as f64 - 0.5;
                let (fdata, fmask) = &faces[face as usize];
                let (taps, nearest) = face_taps(i, j, face_size);
                if let Some(sample) = blend(fdata, fmask, &taps, nearest) {
                    let value = match payload {
                        Payload::Normals => {
                            let oriented = if rotate_normals {
                                rot.apply(sample)
                            } else {
                                sample
                            };
                            match normalize(oriented) {
                                Ok(n) => n.as_vec(),
                                Err(_) => continue,
                            }
                        }
                        Payload::Color => sample,
                    };
                    drow[u] = value;
                    mrow[u] = true;
                }
            }
        });
    (data, mask)
}

/// Reassembles an equirectangular normal field from cube faces. Each output
/// pixel samples the face its direction pierces. With `rotate_normals` the
/// face-local vectors are rotated back into the global frame; leaving it off
/// reproduces the seam discontinuities of frame-ignorant back-projection.
pub fn cubemap_to_equirect(
    faces: &CubemapFaces<NormalField>,
    width: usize,
    height: usize,
    rotate_normals: bool,
) -> Result<NormalField> {
    check_aspect(width, height)?;
    let raw: [(Vec<Vec3>, Vec<bool>); 6] = CubeFace::ALL.map(|f| {
        let fld = faces.face(f);
        (fld.normals().to_vec(), fld.mask().to_vec())
    });
    let (data, mask) = resample_from_faces(
        &raw,
        faces.face_size,
        width,
        height,
        Payload::Normals,
        rotate_normals,
    );
    NormalField::from_parts(width, height, data, mask)
}

/// Color variant of [`cubemap_to_equirect`].
pub fn cubemap_to_equirect_color(
    faces: &CubemapFaces<HdrImage>,
    width: usize,
    height: usize,
) -> Result<HdrImage> {
    check_aspect(width, height)?;
    let raw: [(Vec<Vec3>, Vec<bool>); 6] = CubeFace::ALL.map(|f| {
        let img = faces.face(f);
        let data = img
            .pixels
            .iter()
            .map(|p| Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64))
            .collect::<Vec<_>>();
        let mask = vec![true; img.pixels.len()];
        (data, mask)
    });
    let (data, _) = resample_from_faces(&raw, faces.face_size, width, height, Payload::Color, false);
    Ok(HdrImage {
        width,
        height,
        pixels: data
            .iter()
            .map(|v| [v.x as f32, v.y as f32, v.z as f32])
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;
    use approx::assert_abs_diff_eq;

    #[test]
    fn forward_axis_at_image_center() {
        let (w, h) = (8, 4);
        let d = pixel_to_direction(w / 2, h / 2, w, h).unwrap().as_vec();
        // Half a pixel off exact center; within one pixel's angular extent.
        let center = Vec3::new(0.0, 0.0, 1.0);
        let angle = d.cross(center).norm().atan2(d.dot(center));
        assert!(angle <= PI / h as f64 + 1e-12);
    }

    #[test]
    fn top_row_is_near_north_pole() {
        let d = pixel_to_direction(0, 0, 512, 256).unwrap();
        assert!(d.y() > 0.99);
    }

    #[test]
    fn bad_aspect_and_bounds_are_rejected() {
        assert!(matches!(
            pixel_to_direction(0, 0, 7, 4),
            Err(Error::BadAspect { .. })
        ));
        assert!(matches!(
            pixel_to_direction(8, 0, 8, 4),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn direction_to_pixel_reference_points() {
        let (w, h) = (8, 4);
        let fwd = UnitVec3::new(0.0, 0.0, 1.0).unwrap();
        let (u, v) = direction_to_pixel(fwd, w, h);
        assert_abs_diff_eq!(u, w as f64 / 2.0 - 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(v, h as f64 / 2.0 - 0.5, epsilon = 1e-12);

        let up = UnitVec3::new(0.0, 1.0, 0.0).unwrap();
        let (u, v) = direction_to_pixel(up, w, h);
        assert_abs_diff_eq!(v, -0.5, epsilon = 1e-12);
        // phi = 0 at the pole by convention.
        assert_abs_diff_eq!(u, w as f64 / 2.0 - 0.5, epsilon = 1e-12);
    }

    #[test]
    fn pixel_direction_round_trip_is_exhaustive() {
        let (w, h) = (8, 4);
        for v in 0..h {
            for u in 0..w {
                let d = pixel_to_direction(u, v, w, h).unwrap();
                assert!((d.as_vec().norm() - 1.0).abs() < 1e-12);
                let (uu, vv) = direction_to_pixel(d, w, h);
                assert_abs_diff_eq!(uu, u as f64, epsilon = 1e-9);
                assert_abs_diff_eq!(vv, v as f64, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn face_rotations_are_proper_and_front_is_identity() {
        assert_eq!(CubeFace::Front.rotation(), Rotation3::IDENTITY);
        for f in CubeFace::ALL {
            let r = f.rotation();
            assert!(r.orthogonality_error() < 1e-9);
            assert_abs_diff_eq!(r.determinant(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn face_centers_hit_axis_directions() {
        let expected = [
            (CubeFace::Front, Vec3::new(0.0, 0.0, 1.0)),
            (CubeFace::Right, Vec3::new(1.0, 0.0, 0.0)),
            (CubeFace::Back, Vec3::new(0.0, 0.0, -1.0)),
            (CubeFace::Left, Vec3::new(-1.0, 0.0, 0.0)),
            (CubeFace::Up, Vec3::new(0.0, 1.0, 0.0)),
            (CubeFace::Down, Vec3::new(0.0, -1.0, 0.0)),
        ];
        let size = 65;
        let c = (size - 1) / 2;
        for (face, axis) in expected {
            let local = face_pixel_local_dir(c as f64, c as f64, size);
            let global = face.rotation().apply(local);
            let n = normalize(global).unwrap().as_vec();
            assert!((n - axis).norm() < 1e-12, "{:?}", face);
            assert_eq!(CubeFace::from_direction(axis), face);
        }
    }

    #[test]
    fn constant_color_image_yields_constant_faces() {
        let img = HdrImage {
            width: 32,
            height: 16,
            pixels: vec![[0.25, 0.5, 0.75]; 32 * 16],
        };
        let cube = equirect_to_cubemap_color(&img, 8).unwrap();
        for f in CubeFace::ALL {
            for p in &cube.face(f).pixels {
                for c in 0..3 {
                    assert_abs_diff_eq!(p[c], [0.25, 0.5, 0.75][c], epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn constant_global_field_expressed_locally_per_face() {
        let fwd = UnitVec3::new(0.0, 0.0, 1.0).unwrap();
        let field = NormalField::constant(64, 32, fwd);
        let cube = equirect_to_cubemap(&field, 16).unwrap();
        let front = cube.face(CubeFace::Front).get(7, 7);
        assert!((front - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-9);
        // Right face sees the global +z as the local -x (inverse 90-degree
        // yaw).
        let right = cube.face(CubeFace::Right).get(7, 7);
        assert!((right - Vec3::new(-1.0, 0.0, 0.0)).norm() < 1e-9, "{right:?}");
    }

    #[test]
    fn constant_field_survives_round_trip_with_rotation() {
        let fwd = UnitVec3::new(0.0, 0.0, 1.0).unwrap();
        let field = NormalField::constant(64, 32, fwd);
        let cube = equirect_to_cubemap(&field, 32).unwrap();
        let back = cubemap_to_equirect(&cube, 64, 32, true).unwrap();
        for i in 0..back.normals().len() {
            assert!(back.mask()[i]);
            assert!((back.normals()[i] - fwd.as_vec()).norm() < 1e-6);
        }
    }

    #[test]
    fn rotation_off_leaves_seams() {
        let fwd = UnitVec3::new(0.0, 0.0, 1.0).unwrap();
        let field = NormalField::constant(128, 64, fwd);
        let cube = equirect_to_cubemap(&field, 64).unwrap();
        let back = cubemap_to_equirect(&cube, 128, 64, false).unwrap();
        let v = 32; // equator row
        let mut max_jump_deg = 0.0_f64;
        for u in 0..127 {
            let a = UnitVec3::from_unit_unchecked(back.get(u, v));
            let b = UnitVec3::from_unit_unchecked(back.get(u + 1, v));
            max_jump_deg =
                max_jump_deg.max(crate::geometry::angular_difference(a, b).to_degrees());
        }
        assert!(max_jump_deg > 10.0, "max seam jump {max_jump_deg}");
    }

    #[test]
    fn smooth_round_trip_error_under_pole_mask() {
        let field = synthetic::smooth_field(128, 64);
        let cube = equirect_to_cubemap(&field, 64).unwrap();
        let back = cubemap_to_equirect(&cube, 128, 64, true).unwrap();
        let keep = pole_mask(128, 64).unwrap();
        let mut sum = 0.0;
        let mut n = 0usize;
        for i in 0..keep.len() {
            if keep[i] && back.mask()[i] {
                let a = UnitVec3::from_unit_unchecked(field.normals()[i]);
                let b = UnitVec3::from_unit_unchecked(back.normals()[i]);
                sum += crate::geometry::angular_difference(a, b).to_degrees();
                n += 1;
            }
        }
        let mean = sum / n as f64;
        assert!(mean < 1.0, "mean round-trip error {mean}");
    }

    #[test]
    fn pole_mask_height_four() {
        let mask = pole_mask(8, 4).unwrap();
        for u in 0..8 {
            assert!(!mask[u]); // row 0
            assert!(mask[8 + u]); // row 1
            assert!(mask[16 + u]); // row 2
            assert!(!mask[24 + u]); // row 3
        }
    }

    #[test]
    fn pole_mask_counts_by_latitude() {
        let (w, h) = (64, 32);
        let mask = pole_mask(w, h).unwrap();
        let kept = mask.iter().filter(|&&m| m).count();
        let expected = (0..h)
            .filter(|&v| row_latitude(v, h).abs() <= PI / 4.0)
            .count()
            * w;
        assert_eq!(kept, expected);
    }

    #[test]
    fn solid_angles_sum_to_sphere() {
        let (w, h) = (512, 256);
        let total: f64 = (0..h)
            .map(|v| pixel_solid_angle(v, w, h) * w as f64)
            .sum();
        assert!((total - 4.0 * PI).abs() / (4.0 * PI) < 1e-3);
    }

    #[test]
    fn masked_region_stays_masked_through_cube() {
        let mut field = synthetic::smooth_field(64, 32);
        for v in 12..20 {
            for u in 28..36 {
                field.set_invalid(u, v);
            }
        }
        let cube = equirect_to_cubemap(&field, 32).unwrap();
        let holes: usize = CubeFace::ALL
            .iter()
            .map(|&f| {
                cube.face(f)
                    .mask()
                    .iter()
                    .filter(|&&m| !m)
                    .count()
            })
            .sum();
        assert!(holes > 0, "mask did not propagate to faces");
    }
}
