//! Angles on the blow-up cylinder: normalization, the four stripes and
//! the four boundary angles between them.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

pub const THREE_HALF_PI: f64 = 3.0 * FRAC_PI_2;

/// Reduce an angle to `[0, 2π)`.
pub fn normalize(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Angle of the direction `(u, v)` in `[0, 2π)`, returning the exact
/// boundary constants whenever one component is zero.
pub fn direction(u: f64, v: f64) -> f64 {
    if v == 0.0 {
        if u < 0.0 {
            PI
        } else {
            0.0
        }
    } else if u == 0.0 {
        if v > 0.0 {
            FRAC_PI_2
        } else {
            THREE_HALF_PI
        }
    } else {
        normalize(v.atan2(u))
    }
}

/// Signed distance `a - b` folded into `(-π, π]`.
pub fn wrap_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Symbolic tag for exact multiples of π/4 (after normalization).
pub fn symbolic(theta: f64) -> Option<&'static str> {
    const TAGS: [&str; 8] = [
        "0", "pi/4", "pi/2", "3pi/4", "pi", "5pi/4", "3pi/2", "7pi/4",
    ];
    let t = normalize(theta);
    let k = (t / (PI / 4.0)).round();
    let exact = k * (PI / 4.0);
    if (t - exact).abs() <= 4.0 * f64::EPSILON * exact.max(1.0) {
        Some(TAGS[(k as usize) % 8])
    } else {
        None
    }
}

/// One quarter of the cylinder; stripe `S_i` carries the field of quadrant `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stripe {
    S1,
    S2,
    S3,
    S4,
}

impl Stripe {
    pub const ALL: [Stripe; 4] = [Stripe::S1, Stripe::S2, Stripe::S3, Stripe::S4];

    /// Zero-based index, equal to the quadrant index minus one.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Stripe {
        Self::ALL[i % 4]
    }

    /// Closed θ-interval `[lo, hi]`; `S4` ends at `2π`.
    pub fn interval(self) -> (f64, f64) {
        match self {
            Stripe::S1 => (0.0, FRAC_PI_2),
            Stripe::S2 => (FRAC_PI_2, PI),
            Stripe::S3 => (PI, THREE_HALF_PI),
            Stripe::S4 => (THREE_HALF_PI, TAU),
        }
    }

    /// Closed membership; `θ = 0` also belongs to `S4`.
    pub fn contains(self, theta: f64) -> bool {
        let t = normalize(theta);
        let (lo, hi) = self.interval();
        if self == Stripe::S4 && t == 0.0 {
            return true;
        }
        t >= lo && t <= hi
    }

    /// Stripe whose interior contains `theta`, or the one starting at it.
    pub fn of(theta: f64) -> Stripe {
        let t = normalize(theta);
        Self::from_index(((t / FRAC_PI_2).floor() as usize).min(3))
    }

    /// Lower border (smaller angle) and upper border.
    pub fn borders(self) -> (BoundaryAngle, BoundaryAngle) {
        let lo = BoundaryAngle::ALL[self.index()];
        let hi = BoundaryAngle::ALL[(self.index() + 1) % 4];
        (lo, hi)
    }

    pub fn next(self) -> Stripe {
        Self::from_index(self.index() + 1)
    }

    pub fn prev(self) -> Stripe {
        Self::from_index(self.index() + 3)
    }

    pub fn label(self) -> &'static str {
        ["S1", "S2", "S3", "S4"][self.index()]
    }
}

impl fmt::Display for Stripe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The four angles where adjacent stripes meet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BoundaryAngle {
    Zero,
    HalfPi,
    Pi,
    ThreeHalfPi,
}

impl BoundaryAngle {
    pub const ALL: [BoundaryAngle; 4] = [
        BoundaryAngle::Zero,
        BoundaryAngle::HalfPi,
        BoundaryAngle::Pi,
        BoundaryAngle::ThreeHalfPi,
    ];

    pub fn value(self) -> f64 {
        match self {
            BoundaryAngle::Zero => 0.0,
            BoundaryAngle::HalfPi => FRAC_PI_2,
            BoundaryAngle::Pi => PI,
            BoundaryAngle::ThreeHalfPi => THREE_HALF_PI,
        }
    }

    /// Unit direction `(cos θ₀, sin θ₀)` with exact components.
    pub fn unit(self) -> (f64, f64) {
        match self {
            BoundaryAngle::Zero => (1.0, 0.0),
            BoundaryAngle::HalfPi => (0.0, 1.0),
            BoundaryAngle::Pi => (-1.0, 0.0),
            BoundaryAngle::ThreeHalfPi => (0.0, -1.0),
        }
    }

    /// Boundary angle within `tol` of `theta`, if any.
    pub fn near(theta: f64, tol: f64) -> Option<BoundaryAngle> {
        Self::ALL
            .into_iter()
            .find(|b| wrap_diff(theta, b.value()).abs() <= tol)
    }

    /// Parse `0`, `pi/2`, `pi`, `3pi/2` or a numeric radian value equal to one of them.
    pub fn parse(s: &str) -> Option<BoundaryAngle> {
        match s.trim().to_ascii_lowercase().replace(' ', "").as_str() {
            "0" => Some(BoundaryAngle::Zero),
            "pi/2" => Some(BoundaryAngle::HalfPi),
            "pi" => Some(BoundaryAngle::Pi),
            "3pi/2" | "3*pi/2" => Some(BoundaryAngle::ThreeHalfPi),
            other => other.parse::<f64>().ok().and_then(|v| Self::near(v, 1e-12)),
        }
    }

    /// Stripe just below the angle (`C₋`).
    pub fn below(self) -> Stripe {
        Stripe::from_index(self as usize + 3)
    }

    /// Stripe just above the angle (`C₊`).
    pub fn above(self) -> Stripe {
        Stripe::from_index(self as usize)
    }

    pub fn label(self) -> &'static str {
        ["0", "pi/2", "pi", "3pi/2"][self as usize]
    }
}

impl fmt::Display for BoundaryAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_wraps_into_range() {
        assert_eq!(normalize(-FRAC_PI_2), THREE_HALF_PI);
        assert_eq!(normalize(TAU), 0.0);
        assert_eq!(normalize(-1e-300), 0.0);
        assert!((normalize(-PI / 4.0) - 7.0 * PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn direction_is_exact_on_axes() {
        assert_eq!(direction(2.0, 0.0), 0.0);
        assert_eq!(direction(0.0, 3.0), FRAC_PI_2);
        assert_eq!(direction(-1.0, 0.0), PI);
        assert_eq!(direction(0.0, -0.5), THREE_HALF_PI);
        assert!((direction(1.0, 1.0) - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn stripes_cover_circle_and_overlap_on_borders() {
        for k in 0..1000 {
            let t = k as f64 * TAU / 1000.0;
            let n = Stripe::ALL.iter().filter(|s| s.contains(t)).count();
            let on_border = BoundaryAngle::near(t, 0.0).is_some();
            assert_eq!(n, if on_border { 2 } else { 1 }, "theta = {t}");
        }
        assert!(Stripe::S4.contains(0.0) && Stripe::S1.contains(0.0));
    }

    #[test]
    fn border_neighbours() {
        assert_eq!(BoundaryAngle::Zero.below(), Stripe::S4);
        assert_eq!(BoundaryAngle::Zero.above(), Stripe::S1);
        assert_eq!(BoundaryAngle::HalfPi.below(), Stripe::S1);
        assert_eq!(BoundaryAngle::HalfPi.above(), Stripe::S2);
        assert_eq!(
            Stripe::S4.borders(),
            (BoundaryAngle::ThreeHalfPi, BoundaryAngle::Zero)
        );
    }

    #[test]
    fn symbolic_tags() {
        assert_eq!(symbolic(PI / 4.0), Some("pi/4"));
        assert_eq!(symbolic(-PI / 4.0), Some("7pi/4"));
        assert_eq!(symbolic(THREE_HALF_PI), Some("3pi/2"));
        assert_eq!(symbolic(0.3), None);
    }

    #[test]
    fn parse_boundary_angles() {
        assert_eq!(BoundaryAngle::parse("pi/2"), Some(BoundaryAngle::HalfPi));
        assert_eq!(BoundaryAngle::parse("0"), Some(BoundaryAngle::Zero));
        assert_eq!(
            BoundaryAngle::parse("3.141592653589793"),
            Some(BoundaryAngle::Pi)
        );
        assert_eq!(BoundaryAngle::parse("1.0"), None);
    }
}
