//! The central image type: a grid of unit normals plus a validity mask.

use crate::error::{Error, Result};
use crate::geometry::{normalize, UnitVec3, Vec3};

/// Tolerance on `|n|^2 - 1` for stored normals under the mask.
pub const UNIT_EPS: f64 = 1e-6;

/// An `H x W` grid of normals with a per-pixel validity mask, row major.
///
/// Masked-out pixels carry no meaning; by convention they store the zero
/// vector. Stored normals are unit length within [`UNIT_EPS`], except while
/// a caller is deliberately perturbing them (finite-difference probes); the
/// per-pixel loss formulas tolerate slightly off-unit values.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalField {
    width: usize,
    height: usize,
    normals: Vec<Vec3>,
    mask: Vec<bool>,
}

impl NormalField {
    /// An all-masked-out field of zero vectors.
    pub fn new_empty(width: usize, height: usize) -> Self {
        NormalField {
            width,
            height,
            normals: vec![Vec3::ZERO; width * height],
            mask: vec![false; width * height],
        }
    }

    /// A fully valid field holding `n` everywhere.
    pub fn constant(width: usize, height: usize, n: UnitVec3) -> Self {
        NormalField {
            width,
            height,
            normals: vec![n.as_vec(); width * height],
            mask: vec![true; width * height],
        }
    }

    pub fn from_parts(
        width: usize,
        height: usize,
        normals: Vec<Vec3>,
        mask: Vec<bool>,
    ) -> Result<Self> {
        if normals.len() != width * height || mask.len() != width * height {
            return Err(Error::ShapeMismatch {
                expected: (width, height),
                actual: (normals.len(), mask.len()),
            });
        }
        Ok(NormalField {
            width,
            height,
            normals,
            mask,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn idx(&self, u: usize, v: usize) -> usize {
        v * self.width + u
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> Vec3 {
        self.normals[self.idx(u, v)]
    }

    #[inline]
    pub fn is_valid(&self, u: usize, v: usize) -> bool {
        self.mask[self.idx(u, v)]
    }

    pub fn set(&mut self, u: usize, v: usize, n: UnitVec3) {
        let i = self.idx(u, v);
        self.normals[i] = n.as_vec();
        self.mask[i] = true;
    }

    pub fn set_invalid(&mut self, u: usize, v: usize) {
        let i = self.idx(u, v);
        self.normals[i] = Vec3::ZERO;
        self.mask[i] = false;
    }

    pub fn normals(&self) -> &[Vec3] {
        &self.normals
    }

    pub fn normals_mut(&mut self) -> &mut [Vec3] {
        &mut self.normals
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn mask_mut(&mut self) -> &mut [bool] {
        &mut self.mask
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Indices of masked-in pixels, row major.
    pub fn valid_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn same_dims(&self, other: &NormalField) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::ShapeMismatch {
                expected: self.dims(),
                actual: other.dims(),
            });
        }
        Ok(())
    }

    /// Pixelwise AND of the two masks.
    pub fn intersect_mask(&self, other: &NormalField) -> Result<Vec<bool>> {
        self.same_dims(other)?;
        Ok(self
            .mask
            .iter()
            .zip(&other.mask)
            .map(|(&a, &b)| a && b)
            .collect())
    }

    /// Applies an extra mask in place; newly masked-out pixels are zeroed.
    pub fn apply_mask(&mut self, extra: &[bool]) -> Result<()> {
        if extra.len() != self.mask.len() {
            return Err(Error::ShapeMismatch {
                expected: (self.mask.len(), 1),
                actual: (extra.len(), 1),
            });
        }
        for i in 0..self.mask.len() {
            if !extra[i] {
                self.mask[i] = false;
                self.normals[i] = Vec3::ZERO;
            }
        }
        Ok(())
    }

    /// Renormalizes every masked-in pixel in place.
    pub fn renormalize(&mut self) -> Result<()> {
        for i in 0..self.normals.len() {
            if self.mask[i] {
                self.normals[i] = normalize(self.normals[i])?.as_vec();
            }
        }
        Ok(())
    }

    /// Checks the unit-length invariant on masked-in pixels.
    pub fn validate_units(&self) -> Result<()> {
        for i in 0..self.normals.len() {
            if self.mask[i] {
                let n2 = self.normals[i].norm_squared();
                if !n2.is_finite() || (n2.sqrt() - 1.0).abs() > UNIT_EPS {
                    return Err(Error::InvalidConfig(format!(
                        "pixel {i} is masked in but has norm {}",
                        n2.sqrt()
                    )));
                }
            }
        }
        Ok(())
    }
}
