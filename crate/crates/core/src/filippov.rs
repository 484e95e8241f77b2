//! Filippov rules on a regular switching surface `{h = 0}` separating a
//! `+` side (`h > 0`) from a `−` side. Shared by the half-planes in R³ and
//! by the stripe borders on the cylinder.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Crossing,
    Sliding,
    Escaping,
    Tangency,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryClassification {
    pub kind: BoundaryKind,
    /// `F₊h`, the Lie derivative of `h` along the `+` side field.
    pub lie_plus: f64,
    /// `F₋h`.
    pub lie_minus: f64,
}

impl BoundaryClassification {
    /// Sliding means both fields push toward the surface, escaping means
    /// both push away.
    pub fn new(lie_plus: f64, lie_minus: f64) -> Self {
        let kind = if lie_plus * lie_minus > 0.0 {
            BoundaryKind::Crossing
        } else if lie_plus < 0.0 && lie_minus > 0.0 {
            BoundaryKind::Sliding
        } else if lie_plus > 0.0 && lie_minus < 0.0 {
            BoundaryKind::Escaping
        } else {
            BoundaryKind::Tangency
        };
        BoundaryClassification {
            kind,
            lie_plus,
            lie_minus,
        }
    }

    /// For crossing points: `+1` if the flow goes from `−` to `+`, `−1` otherwise.
    pub fn crossing_direction(&self) -> Option<f64> {
        (self.kind == BoundaryKind::Crossing).then(|| self.lie_plus.signum())
    }

    /// Weight `λ` of the `+` field in the tangent convex combination.
    pub fn convex_weight(&self) -> f64 {
        self.lie_minus / (self.lie_minus - self.lie_plus)
    }
}

/// `(F₋h·F₊ − F₊h·F₋) / (F₋h − F₊h)`.
pub fn sliding_combination<const N: usize>(
    plus: &[f64; N],
    minus: &[f64; N],
    lie_plus: f64,
    lie_minus: f64,
) -> [f64; N] {
    let den = lie_minus - lie_plus;
    std::array::from_fn(|k| (lie_minus * plus[k] - lie_plus * minus[k]) / den)
}
