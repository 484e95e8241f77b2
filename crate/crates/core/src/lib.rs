//! Piecewise-smooth vector fields in R³ switching across the planes `y = 0`
//! and `z = 0`, analysed through a cylindrical blow-up of their intersection.
//!
//! * [`system`] holds the four quadrant fields and the Filippov rules on the
//!   regular half-planes; [`regularization`] smooths a half-plane.
//! * [`blowup`] maps the x-axis to a cylinder and evaluates the induced
//!   slow-fast systems; [`closed_form`] gives their slow manifolds exactly for
//!   constant and affine fields.
//! * [`stability`] decides structural stability around a stripe border.
//! * [`simulator`] integrates trajectories in R³ and on the cylinder.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angle;
pub mod blowup;
pub mod closed_form;
pub mod error;
pub mod field;
pub mod filippov;
pub mod ode;
pub mod portrait;
pub mod regularization;
pub mod report;
pub mod sampling;
pub mod simulator;
pub mod stability;
pub mod system;

pub use error::{Error, Result};
pub use field::{AffineVectorField3, Vec3};
pub use system::{DoubleDiscontinuitySystem, HalfPlane, Quadrant};
