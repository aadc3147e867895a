//! Color-coded normal maps: 8-bit RGB with the value 127 encoding a zero
//! component, so `n` maps to `(n + 1) * 127.5` with ties rounded down and
//! decoding divides `v - 127` by 127. Pure black (0,0,0) is unreachable for
//! unit vectors and serves as the invalid-pixel sentinel, which lets a single
//! PNG carry both the normals and their mask.

use crate::field::NormalField;
use crate::geometry::{normalize, Vec3};
use image::RgbImage;

fn quantize(x: f64) -> u8 {
    // Round half down so that 0 maps to 127, the decode zero point.
    (((x + 1.0) * 127.5 - 0.5).ceil()).clamp(0.0, 255.0) as u8
}

/// Encodes a normal field as 8-bit RGB; masked-out pixels become (0,0,0).
pub fn encode_normal_png(field: &NormalField) -> RgbImage {
    let mut img = RgbImage::new(field.width() as u32, field.height() as u32);
    for v in 0..field.height() {
        for u in 0..field.width() {
            let rgb = if field.is_valid(u, v) {
                let n = field.get(u, v);
                [quantize(n.x), quantize(n.y), quantize(n.z)]
            } else {
                [0, 0, 0]
            };
            img.put_pixel(u as u32, v as u32, image::Rgb(rgb));
        }
    }
    img
}

/// Decodes an 8-bit RGB normal map. Black pixels and degenerate (near-zero,
/// e.g. uniform gray 127) decodes are masked out; everything else is
/// renormalized.
pub fn decode_normal_png(img: &RgbImage) -> NormalField {
    let mut field = NormalField::new_empty(img.width() as usize, img.height() as usize);
    for v in 0..img.height() {
        for u in 0..img.width() {
            let p = img.get_pixel(u, v).0;
            if p == [0, 0, 0] {
                continue;
            }
            let raw = Vec3::new(
                (p[0] as f64 - 127.0) / 127.0,
                (p[1] as f64 - 127.0) / 127.0,
                (p[2] as f64 - 127.0) / 127.0,
            );
            if let Ok(n) = normalize(raw) {
                field.set(u as usize, v as usize, n);
            }
        }
    }
    field
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{angular_difference, UnitVec3};
    use crate::synthetic;

    #[test]
    fn axis_encodes_to_reference_bytes() {
        let field = NormalField::constant(1, 1, UnitVec3::new(1.0, 0.0, 0.0).unwrap());
        let img = encode_normal_png(&field);
        assert_eq!(img.get_pixel(0, 0).0, [255, 127, 127]);
    }

    #[test]
    fn masked_out_encodes_black_and_survives() {
        let mut field = NormalField::constant(2, 1, UnitVec3::new(0.0, 1.0, 0.0).unwrap());
        field.set_invalid(0, 0);
        let img = encode_normal_png(&field);
        assert_eq!(img.get_pixel(0, 0).0, [0, 0, 0]);
        let back = decode_normal_png(&img);
        assert!(!back.is_valid(0, 0));
        assert!(back.is_valid(1, 0));
    }

    #[test]
    fn reference_bytes_decode_to_axis() {
        let mut img = RgbImage::new(1, 1);
        img.put_pixel(0, 0, image::Rgb([255, 127, 127]));
        let field = decode_normal_png(&img);
        let n = field.get(0, 0);
        assert!((n.x - 1.0).abs() < 1e-2 && n.y == 0.0 && n.z == 0.0);
    }

    #[test]
    fn uniform_gray_is_degenerate() {
        let mut img = RgbImage::new(1, 1);
        img.put_pixel(0, 0, image::Rgb([127, 127, 127]));
        let field = decode_normal_png(&img);
        assert!(!field.is_valid(0, 0));
    }

    #[test]
    fn round_trip_angular_error_is_small() {
        let field = synthetic::random_field(64, 32, 17);
        let back = decode_normal_png(&encode_normal_png(&field));
        let mut max_deg = 0.0_f64;
        let mut sum_deg = 0.0_f64;
        for i in 0..field.normals().len() {
            assert!(back.mask()[i]);
            let a = UnitVec3::from_unit_unchecked(field.normals()[i]);
            let b = UnitVec3::from_unit_unchecked(back.normals()[i]);
            let deg = angular_difference(a, b).to_degrees();
            max_deg = max_deg.max(deg);
            sum_deg += deg;
        }
        let mean_deg = sum_deg / field.normals().len() as f64;
        assert!(max_deg < 1.0, "max {max_deg}");
        assert!(mean_deg < 0.5, "mean {mean_deg}");
    }
}
