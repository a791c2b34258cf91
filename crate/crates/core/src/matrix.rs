//! 2x2 paraxial ray-transfer (ABCD) matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Ray-transfer matrix `[a, b; c, d]` acting on `(height, angle)`.
///
/// `b` carries meters and `c` inverse meters; `a` and `d` are dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl RayMatrix {
    pub const IDENTITY: RayMatrix = RayMatrix {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        RayMatrix { a, b, c, d }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// `self` applied after `first`, i.e. the product `self * first`.
    pub fn then_after(&self, first: &RayMatrix) -> RayMatrix {
        compose(self, first)
    }

    /// ABCD law for the complex beam parameter. `None` when the denominator vanishes.
    pub fn transform_q(&self, q: Complex64) -> Option<Complex64> {
        let den = self.c * q + self.d;
        if den.norm() < 1e-300 {
            return None;
        }
        Some((self.a * q + self.b) / den)
    }

    /// Largest elementwise absolute difference.
    pub fn max_abs_diff(&self, other: &RayMatrix) -> f64 {
        (self.a - other.a)
            .abs()
            .max((self.b - other.b).abs())
            .max((self.c - other.c).abs())
            .max((self.d - other.d).abs())
    }
}

impl Default for RayMatrix {
    fn default() -> Self {
        RayMatrix::IDENTITY
    }
}

impl std::ops::Mul for RayMatrix {
    type Output = RayMatrix;

    fn mul(self, rhs: RayMatrix) -> RayMatrix {
        compose(&self, &rhs)
    }
}

/// Propagation over `distance` through a medium of index `refractive_index`: `[1, z/n; 0, 1]`.
pub fn slab(distance: f64, refractive_index: f64) -> Result<RayMatrix> {
    if !(distance >= 0.0) || !distance.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "slab distance must be finite and >= 0, got {distance}"
        )));
    }
    if !(refractive_index >= 1.0) || !refractive_index.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "refractive index must be >= 1, got {refractive_index}"
        )));
    }
    Ok(RayMatrix::new(1.0, distance / refractive_index, 0.0, 1.0))
}

/// Thin lens of focal length `focal_length`: `[1, 0; -1/f, 1]`.
pub fn thin_lens(focal_length: f64) -> Result<RayMatrix> {
    if focal_length == 0.0 || focal_length.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "focal length must be non-zero, got {focal_length}"
        )));
    }
    Ok(RayMatrix::new(1.0, 0.0, -1.0 / focal_length, 1.0))
}

/// Matrix product `second * first`: the ray meets `first`, then `second`.
pub fn compose(second: &RayMatrix, first: &RayMatrix) -> RayMatrix {
    RayMatrix {
        a: second.a * first.a + second.b * first.c,
        b: second.a * first.b + second.b * first.d,
        c: second.c * first.a + second.d * first.c,
        d: second.c * first.b + second.d * first.d,
    }
}

/// Composes elements listed in propagation order (first element met first).
pub fn chain<'a, I>(elements: I) -> RayMatrix
where
    I: IntoIterator<Item = &'a RayMatrix>,
{
    elements
        .into_iter()
        .fold(RayMatrix::IDENTITY, |acc, m| compose(m, &acc))
}
