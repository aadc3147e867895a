//! Diffuse relighting from 9 spherical-harmonic lighting coefficients.
//!
//! An HDR equirectangular environment map is projected onto the first three
//! real SH bands (solid-angle-weighted sum over pixels). Irradiance is then
//! the SH-convolved radiance, evaluated as a quadratic form `n~^T M n~` with
//! `n~ = (x, y, z, 1)`, so relighting a normal map is one 4x4 form per pixel
//! per channel. Band (1,0) is aligned with this crate's +y up axis.
//!
//! The clamped-cosine convolution weights per band are `A0 = pi`,
//! `A1 = 2 pi / 3`, `A2 = pi / 4`; the matrix constants below are assembled
//! from them and the basis normalizations at compile of the module, not
//! hard-coded decimals.

use crate::error::{Error, Result};
use crate::field::NormalField;
use crate::geometry::UnitVec3;
use crate::io::HdrImage;
use crate::projection::{pixel_solid_angle, pixel_to_direction};
use std::f64::consts::PI;

/// Band order: (0,0), (1,-1), (1,0), (1,1), (2,-2), (2,-1), (2,0), (2,1),
/// (2,2).
pub const SH_BAND_LABELS: [&str; 9] = [
    "l0m0", "l1m-1", "l1m0", "l1m1", "l2m-2", "l2m-1", "l2m0", "l2m1", "l2m2",
];

fn basis_constants() -> [f64; 5] {
    // k00 = 1/(2 sqrt(pi)), k1 = sqrt(3/(4 pi)), k2 = sqrt(15/(4 pi)),
    // k20 = sqrt(5/(16 pi)), k22 = sqrt(15/(16 pi)).
    [
        0.5 * (1.0 / PI).sqrt(),
        (3.0 / (4.0 * PI)).sqrt(),
        (15.0 / (4.0 * PI)).sqrt(),
        (5.0 / (16.0 * PI)).sqrt(),
        (15.0 / (16.0 * PI)).sqrt(),
    ]
}

/// Real spherical-harmonic basis values at a unit direction, with the polar
/// axis on +y (up): the (1,0) slot is proportional to `d.y`.
pub fn sh_basis(d: UnitVec3) -> [f64; 9] {
    let [k00, k1, k2, k20, k22] = basis_constants();
    let (x, y, z) = (d.x(), d.y(), d.z());
    [
        k00,
        k1 * z,
        k1 * y,
        k1 * x,
        k2 * x * z,
        k2 * z * y,
        k20 * (3.0 * y * y - 1.0),
        k2 * x * y,
        k22 * (x * x - z * z),
    ]
}

/// 9 lighting coefficients per color channel, `[channel][band]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShCoefficients {
    pub channels: [[f64; 9]; 3],
}

impl ShCoefficients {
    pub fn zero() -> Self {
        ShCoefficients {
            channels: [[0.0; 9]; 3],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.channels
            .iter()
            .all(|ch| ch.iter().all(|c| c.is_finite()))
    }
}

/// Projects a 2:1 HDR environment map onto the 9 coefficients per channel:
/// `L_lm = sum env(p) Y_lm(d_p) w_p` with solid-angle weights
/// `w_p = cos(lat) (2 pi / W)(pi / H)`. Row partial sums are combined in row
/// order, so results are identical for any thread count.
pub fn project_env_to_sh(env: &HdrImage) -> Result<ShCoefficients> {
    if env.width != 2 * env.height || env.height == 0 {
        return Err(Error::BadAspect {
            width: env.width,
            height: env.height,
        });
    }
    env.validate_hdr()?;

    use rayon::prelude::*;
    let rows: Vec<[[f64; 9]; 3]> = (0..env.height)
        .into_par_iter()
        .map(|v| {
            let w_p = pixel_solid_angle(v, env.width, env.height);
            let mut acc = [[0.0f64; 9]; 3];
            for u in 0..env.width {
                let d = pixel_to_direction(u, v, env.width, env.height)
                    .expect("checked aspect and bounds");
                let basis = sh_basis(d);
                let px = env.pixels[v * env.width + u];
                for ch in 0..3 {
                    let e = px[ch] as f64 * w_p;
                    for (slot, b) in basis.iter().enumerate() {
                        acc[ch][slot] += e * b;
                    }
                }
            }
            acc
        })
        .collect();

    let mut coeffs = ShCoefficients::zero();
    for acc in rows {
        for ch in 0..3 {
            for slot in 0..9 {
                coeffs.channels[ch][slot] += acc[ch][slot];
            }
        }
    }
    Ok(coeffs)
}

/// Per-channel symmetric 4x4 matrix `M` with `E(n) = n~^T M n~`,
/// `n~ = (x, y, z, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IrradianceMatrix {
    pub channels: [[[f64; 4]; 4]; 3],
}

/// Assembles the quadratic-form matrices from SH lighting coefficients and
/// the clamped-cosine band weights.
pub fn irradiance_matrix(coeffs: &ShCoefficients) -> IrradianceMatrix {
    let [_, _, k2, k20, k22] = basis_constants();
    let a1 = 2.0 * PI / 3.0;
    let a2 = PI / 4.0;
    // c1 scales the l=2 quadratic monomials, c2 the l=1 linear ones, c3 the
    // y^2 part of (2,0), c4 the constant band, c5 the constant part of (2,0).
    let c1 = a2 * k22; // == a2 * k2 / 2 for the cross terms
    let c2 = a1 * basis_constants()[1] / 2.0;
    let c3 = a2 * k20 * 3.0;
    let c4 = PI * basis_constants()[0];
    let c5 = a2 * k20;
    debug_assert!((k2 / 2.0 - k22).abs() < 1e-15);

    let mut channels = [[[0.0f64; 4]; 4]; 3];
    for (ch, l) in coeffs.channels.iter().enumerate() {
        let [l00, l1m1, l10, l11, l2m2, l2m1, l20, l21, l22] = *l;
        channels[ch] = [
            [c1 * l22, c1 * l21, c1 * l2m2, c2 * l11],
            [c1 * l21, c3 * l20, c1 * l2m1, c2 * l10],
            [c1 * l2m2, c1 * l2m1, -c1 * l22, c2 * l1m1],
            [c2 * l11, c2 * l10, c2 * l1m1, c4 * l00 - c5 * l20],
        ];
    }
    IrradianceMatrix { channels }
}

/// Irradiance at a normal, per channel.
pub fn irradiance(n: UnitVec3, m: &IrradianceMatrix) -> [f64; 3] {
    let nt = [n.x(), n.y(), n.z(), 1.0];
    let mut out = [0.0; 3];
    for ch in 0..3 {
        let mm = &m.channels[ch];
        let mut e = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                e += nt[i] * mm[i][j] * nt[j];
            }
        }
        out[ch] = e;
    }
    out
}

/// Relights an albedo image: `out = albedo * E(n) / pi` per channel, clamped
/// below at zero. Masked-out pixels copy the albedo unchanged. The division
/// by pi makes a uniform unit environment reproduce the albedo.
pub fn relight(
    albedo: &HdrImage,
    normals: &NormalField,
    coeffs: &ShCoefficients,
) -> Result<HdrImage> {
    if (albedo.width, albedo.height) != normals.dims() {
        return Err(Error::ShapeMismatch {
            expected: normals.dims(),
            actual: (albedo.width, albedo.height),
        });
    }
    let m = irradiance_matrix(coeffs);
    let mut out = albedo.clone();
    use rayon::prelude::*;
    out.pixels
        .par_chunks_mut(albedo.width)
        .enumerate()
        .for_each(|(v, row)| {
            for (u, px) in row.iter_mut().enumerate() {
                let i = v * albedo.width + u;
                if !normals.mask()[i] {
                    continue;
                }
                let n = UnitVec3::from_unit_unchecked(normals.normals()[i]);
                let e = irradiance(n, &m);
                for ch in 0..3 {
                    px[ch] = (px[ch] as f64 * (e[ch] / PI).max(0.0)) as f32;
                }
            }
        });
    Ok(out)
}
