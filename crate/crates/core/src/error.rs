use thiserror::Error;

use crate::angle::Stripe;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("point lies on the singular line (|y|, |z| <= tolerance)")]
    PointOnSingularLine,
    #[error("point is not in a sliding or escaping region")]
    NotSlidingRegion,
    #[error("weak fundamental hypothesis fails: p = q = 0 on the axis")]
    WfhViolation,
    #[error("gamma vanishes: the slow manifold is a straight line")]
    ConstantDegenerate,
    #[error("trajectory left the sliding region at t = {t}")]
    LeftSlidingRegion { t: f64 },
    #[error("integration step failed at t = {t} (step size underflow)")]
    StepFailure { t: f64, state: Vec<f64> },
    #[error("field on stripe {0} is not constant along the axis")]
    NotConstant(Stripe),
    #[error("field on stripe {0} is constant along the axis")]
    NotAffine(Stripe),
    #[error("strong fundamental hypothesis fails on stripe {0} (gamma = 0)")]
    SfhViolation(Stripe),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
