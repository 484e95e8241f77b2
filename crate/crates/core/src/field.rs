//! Affine quadrant fields `F(v) = A·v + d` in R³.

use serde::{Deserialize, Serialize};

pub type Vec3 = [f64; 3];

/// Affine function `x ↦ slope·x + offset` of one real variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine1 {
    pub slope: f64,
    pub offset: f64,
}

impl Affine1 {
    pub const fn new(slope: f64, offset: f64) -> Self {
        Affine1 { slope, offset }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.offset
    }

    pub fn is_zero(&self) -> bool {
        self.slope == 0.0 && self.offset == 0.0
    }

    pub fn neg(&self) -> Self {
        Affine1::new(-self.slope, -self.offset)
    }

    /// The root, if the function is non-constant.
    pub fn root(&self) -> Option<f64> {
        (self.slope != 0.0).then(|| -self.offset / self.slope)
    }

    /// True when both functions vanish at a common `x` (or one is identically zero
    /// and the other has a root or is zero too). Decided by cross-multiplication.
    pub fn common_zero(&self, other: &Affine1) -> bool {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => true,
            (true, false) => other.slope != 0.0,
            (false, true) => self.slope != 0.0,
            (false, false) => {
                if self.slope == 0.0 || other.slope == 0.0 {
                    false
                } else {
                    self.offset * other.slope == other.offset * self.slope
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineVectorField3 {
    /// Row-major: row `k` holds the `x, y, z` coefficients of component `k`.
    pub a: [[f64; 3]; 3],
    pub d: Vec3,
}

impl AffineVectorField3 {
    pub const fn new(a: [[f64; 3]; 3], d: Vec3) -> Self {
        AffineVectorField3 { a, d }
    }

    pub const fn constant(d: Vec3) -> Self {
        AffineVectorField3 {
            a: [[0.0; 3]; 3],
            d,
        }
    }

    /// Field whose components depend on `x` only: component `k` is `ax[k]·x + d[k]`.
    pub const fn axial(ax: Vec3, d: Vec3) -> Self {
        AffineVectorField3 {
            a: [[ax[0], 0.0, 0.0], [ax[1], 0.0, 0.0], [ax[2], 0.0, 0.0]],
            d,
        }
    }

    pub fn eval(&self, v: &Vec3) -> Vec3 {
        let mut out = self.d;
        for (k, row) in self.a.iter().enumerate() {
            out[k] += row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.a
            .iter()
            .flatten()
            .chain(self.d.iter())
            .all(|v| v.is_finite())
    }

    /// `A = 0`.
    pub fn is_constant(&self) -> bool {
        self.a.iter().flatten().all(|&v| v == 0.0)
    }

    /// All three components are constant along the x-axis, the only thing
    /// the cylinder analysis sees.
    pub fn is_constant_on_axis(&self) -> bool {
        self.a.iter().all(|row| row[0] == 0.0)
    }

    /// Component `k` restricted to the x-axis.
    pub fn on_axis(&self, k: usize) -> Affine1 {
        Affine1::new(self.a[k][0], self.d[k])
    }

    /// Axial rate `w(x) = a1·x + d1` on the x-axis.
    pub fn w(&self) -> Affine1 {
        self.on_axis(0)
    }

    /// `y`-rate `p(x) = a2·x + d2` on the x-axis.
    pub fn p(&self) -> Affine1 {
        self.on_axis(1)
    }

    /// `z`-rate `q(x) = a3·x + d3` on the x-axis.
    pub fn q(&self) -> Affine1 {
        self.on_axis(2)
    }

    /// `γ = a3·d2 − a2·d3`; nonzero iff the axis restriction satisfies SFH.
    pub fn gamma(&self) -> f64 {
        self.a[2][0] * self.d[1] - self.a[1][0] * self.d[2]
    }

    /// Copy with the axial coefficient of component `k` replaced.
    pub fn with_axial(mut self, k: usize, value: f64) -> Self {
        self.a[k][0] = value;
        self
    }

    pub fn with_offset(mut self, k: usize, value: f64) -> Self {
        self.d[k] = value;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_constant() {
        let f = AffineVectorField3::constant([1.0, -1.0, 1.0]);
        assert_eq!(f.eval(&[5.0, 0.0, 0.0]), [1.0, -1.0, 1.0]);
        assert!(f.is_constant());
    }

    #[test]
    fn eval_axial_field_at_origin() {
        let f = AffineVectorField3::axial([-1.0, -1.0, 1.0], [2.0, 1.0, 0.0]);
        assert_eq!(f.eval(&[0.0, 0.0, 0.0]), [2.0, 1.0, 0.0]);
        assert_eq!(f.gamma(), 1.0);
    }

    #[test]
    fn eval_identity() {
        let f = AffineVectorField3::new(
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            [0.0; 3],
        );
        assert_eq!(f.eval(&[1.0, 2.0, 3.0]), [1.0, 2.0, 3.0]);
        assert!(!f.is_constant());
    }

    #[test]
    fn common_zero_cases() {
        let a = Affine1::new(1.0, 1.0);
        assert!(a.common_zero(&Affine1::new(2.0, 2.0)));
        assert!(!a.common_zero(&Affine1::new(1.0, 2.0)));
        assert!(!a.common_zero(&Affine1::new(0.0, 1.0)));
        assert!(a.common_zero(&Affine1::new(0.0, 0.0)));
        assert!(!Affine1::new(0.0, 1.0).common_zero(&Affine1::new(0.0, 0.0)));
    }
}
