//! On-disk formats: PFM for float-exact data, PNG for visualization-grade
//! normals and LDR color.
//!
//! File extension selects the format everywhere (`.pfm` or `.png`).

mod normal_png;
mod pfm;

pub use normal_png::{decode_normal_png, encode_normal_png};
pub use pfm::{read_pfm, write_pfm_gray, write_pfm_rgb, PfmImage};

use crate::error::{Error, Result};
use crate::field::NormalField;
use crate::geometry::{normalize, Vec3};
use std::path::Path;

/// HDR RGB image, row major, f32 channels.
#[derive(Debug, Clone, PartialEq)]
pub struct HdrImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<[f32; 3]>,
}

impl HdrImage {
    pub fn new(width: usize, height: usize) -> Self {
        HdrImage {
            width,
            height,
            pixels: vec![[0.0; 3]; width * height],
        }
    }

    #[inline]
    pub fn idx(&self, u: usize, v: usize) -> usize {
        v * self.width + u
    }

    pub fn validate_hdr(&self) -> Result<()> {
        for p in &self.pixels {
            for &c in p {
                if !c.is_finite() || c < 0.0 {
                    return Err(Error::NonFinite);
                }
            }
        }
        Ok(())
    }
}

/// Single-channel float grid (landscapes, error maps).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f32>,
}

impl ScalarGrid {
    pub fn new(width: usize, height: usize) -> Self {
        ScalarGrid {
            width,
            height,
            data: vec![0.0; width * height],
        }
    }
}

/// Normals as float RGB; masked-out pixels become (0,0,0).
pub fn field_to_hdr(field: &NormalField) -> HdrImage {
    let mut img = HdrImage::new(field.width(), field.height());
    for (i, p) in img.pixels.iter_mut().enumerate() {
        if field.mask()[i] {
            let n = field.normals()[i];
            *p = [n.x as f32, n.y as f32, n.z as f32];
        }
    }
    img
}

/// Inverse of [`field_to_hdr`]: zero (or degenerate) pixels are masked out,
/// everything else is renormalized.
pub fn hdr_to_field(img: &HdrImage) -> NormalField {
    let mut field = NormalField::new_empty(img.width, img.height);
    for v in 0..img.height {
        for u in 0..img.width {
            let p = img.pixels[img.idx(u, v)];
            let raw = Vec3::new(p[0] as f64, p[1] as f64, p[2] as f64);
            if let Ok(n) = normalize(raw) {
                field.set(u, v, n);
            }
        }
    }
    field
}

fn extension(path: &Path) -> String {
    path.extension()
        .and_then(|e| e.to_str())
        .unwrap_or("")
        .to_ascii_lowercase()
}

/// Reads a normal field from `.pfm` (float-exact) or `.png` (color coded).
pub fn load_normal_field(path: &Path) -> Result<NormalField> {
    match extension(path).as_str() {
        "pfm" => match read_pfm(path)? {
            PfmImage::Rgb(img) => Ok(hdr_to_field(&img)),
            PfmImage::Gray(_) => Err(Error::MalformedHeader(
                "expected a color PFM for normals, found grayscale".into(),
            )),
        },
        "png" => {
            let img = load_rgb8(path)?;
            Ok(decode_normal_png(&img))
        }
        other => Err(Error::InvalidConfig(format!(
            "unsupported normal-field extension: .{other}"
        ))),
    }
}

/// Writes a normal field, format chosen by extension.
pub fn save_normal_field(path: &Path, field: &NormalField) -> Result<()> {
    match extension(path).as_str() {
        "pfm" => write_pfm_rgb(path, &field_to_hdr(field), true),
        "png" => save_rgb8(path, &encode_normal_png(field)),
        other => Err(Error::InvalidConfig(format!(
            "unsupported normal-field extension: .{other}"
        ))),
    }
}

/// Reads an HDR (or LDR, mapped to [0,1]) color image.
pub fn load_color(path: &Path) -> Result<HdrImage> {
    match extension(path).as_str() {
        "pfm" => match read_pfm(path)? {
            PfmImage::Rgb(img) => Ok(img),
            PfmImage::Gray(g) => Ok(HdrImage {
                width: g.width,
                height: g.height,
                pixels: g.data.iter().map(|&x| [x, x, x]).collect(),
            }),
        },
        "png" => {
            let img = load_rgb8(path)?;
            let pixels = img
                .pixels()
                .map(|p| {
                    [
                        p.0[0] as f32 / 255.0,
                        p.0[1] as f32 / 255.0,
                        p.0[2] as f32 / 255.0,
                    ]
                })
                .collect();
            Ok(HdrImage {
                width: img.width() as usize,
                height: img.height() as usize,
                pixels,
            })
        }
        other => Err(Error::InvalidConfig(format!(
            "unsupported color extension: .{other}"
        ))),
    }
}

/// Writes a color image; PNG output clamps to [0,1] and quantizes.
pub fn save_color(path: &Path, img: &HdrImage) -> Result<()> {
    match extension(path).as_str() {
        "pfm" => write_pfm_rgb(path, img, true),
        "png" => {
            let mut out = image::RgbImage::new(img.width as u32, img.height as u32);
            for v in 0..img.height {
                for u in 0..img.width {
                    let p = img.pixels[img.idx(u, v)];
                    let q = |x: f32| (x.clamp(0.0, 1.0) * 255.0).round() as u8;
                    out.put_pixel(u as u32, v as u32, image::Rgb([q(p[0]), q(p[1]), q(p[2])]));
                }
            }
            save_rgb8(path, &out)
        }
        other => Err(Error::InvalidConfig(format!(
            "unsupported color extension: .{other}"
        ))),
    }
}

pub fn load_rgb8(path: &Path) -> Result<image::RgbImage> {
    let dynamic = image::open(path)?;
    match dynamic {
        image::DynamicImage::ImageRgb8(img) => Ok(img),
        _ => Err(Error::NotRgb),
    }
}

pub fn save_rgb8(path: &Path, img: &image::RgbImage) -> Result<()> {
    img.save(path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    #[test]
    fn field_hdr_round_trip_preserves_mask_and_direction() {
        let mut field = synthetic::random_field(6, 3, 5);
        field.set_invalid(2, 1);
        let back = hdr_to_field(&field_to_hdr(&field));
        assert_eq!(back.mask(), field.mask());
        for i in 0..field.normals().len() {
            let d = (back.normals()[i] - field.normals()[i]).norm();
            assert!(d < 1e-6, "pixel {i} moved by {d}");
        }
    }
}
