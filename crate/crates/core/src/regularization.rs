//! Smoothing of a half-plane discontinuity by a transition function, and the
//! slow-fast system obtained by blowing up its regularization band.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Vec3;
use crate::ode::{Dopri5, Tolerances};
use crate::simulator::{integrate_r3, EventKind, IntegratorOptions};
use crate::system::{DoubleDiscontinuitySystem, HalfPlane};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionFunction {
    /// `sin(πu/2)` on `[−1, 1]`, C¹.
    Sine,
    /// `(3u − u³)/2` on `[−1, 1]`, C¹.
    Cubic,
}

impl TransitionFunction {
    pub fn eval(self, u: f64) -> f64 {
        if u >= 1.0 {
            return 1.0;
        }
        if u <= -1.0 {
            return -1.0;
        }
        match self {
            TransitionFunction::Sine => (FRAC_PI_2 * u).sin(),
            TransitionFunction::Cubic => 0.5 * (3.0 * u - u * u * u),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TransitionFunction::Sine => "sine",
            TransitionFunction::Cubic => "cubic",
        }
    }

    /// Order of continuous differentiability at `u = ±1`.
    pub fn smoothness(self) -> u32 {
        1
    }
}

pub fn transition_default(u: f64) -> f64 {
    TransitionFunction::Sine.eval(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizationParams {
    pub epsilon: f64,
    pub transition: TransitionFunction,
}

impl RegularizationParams {
    pub fn new(epsilon: f64, transition: TransitionFunction) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1], got {epsilon}"
            )));
        }
        Ok(RegularizationParams {
            epsilon,
            transition,
        })
    }
}

/// `(F₊ + F₋)/2 + φ(h/ε)·(F₊ − F₋)/2` across `hp`.
pub fn regularize_half_plane(
    sys: &DoubleDiscontinuitySystem,
    hp: HalfPlane,
    params: &RegularizationParams,
    v: &Vec3,
) -> Vec3 {
    let fp = sys.field(hp.plus()).eval(v);
    let fm = sys.field(hp.minus()).eval(v);
    let u = hp.h(v) / params.epsilon;
    if u >= 1.0 {
        return fp;
    }
    if u <= -1.0 {
        return fm;
    }
    let phi = params.transition.eval(u);
    std::array::from_fn(|i| 0.5 * (fp[i] + fm[i]) + 0.5 * phi * (fp[i] - fm[i]))
}

/// Normal component of the regularized field on the blown-up band at `η = 0`,
/// where `h/ε = cot ψ`.
fn band_normal_rate(
    sys: &DoubleDiscontinuitySystem,
    hp: HalfPlane,
    transition: TransitionFunction,
    x: f64,
    tangential: f64,
    psi: f64,
) -> f64 {
    let mut v = [x, 0.0, 0.0];
    v[hp.tangent_axis()] = tangential;
    let k = hp.normal_axis();
    let fp = sys.field(hp.plus()).eval(&v)[k];
    let fm = sys.field(hp.minus()).eval(&v)[k];
    let (s, c) = crate::blowup::sin_cos(psi);
    let u = if s == 0.0 {
        c.signum() * f64::INFINITY
    } else {
        c / s
    };
    0.5 * (fp + fm) + 0.5 * transition.eval(u) * (fp - fm)
}

/// `h_ε · sin ψ` on the band; its zeros in `(0, π)` form the half-plane slow manifold.
pub fn halfplane_slow_residual(
    sys: &DoubleDiscontinuitySystem,
    hp: HalfPlane,
    transition: TransitionFunction,
    x: f64,
    tangential: f64,
    psi: f64,
) -> f64 {
    let s = crate::blowup::sin_cos(psi).0;
    if s == 0.0 {
        return 0.0;
    }
    band_normal_rate(sys, hp, transition, x, tangential, psi) * s
}

/// `ψ' = −h_ε · sin ψ`.
pub fn halfplane_fast_rate(
    sys: &DoubleDiscontinuitySystem,
    hp: HalfPlane,
    transition: TransitionFunction,
    x: f64,
    tangential: f64,
    psi: f64,
) -> f64 {
    -halfplane_slow_residual(sys, hp, transition, x, tangential, psi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationRow {
    pub epsilon: f64,
    /// Sup-norm distance between the full states.
    pub sup_deviation: f64,
    /// Sup-norm distance between the in-plane coordinates `(x, tangential)`.
    pub sup_tangential: f64,
    /// Accepted steps of the regularized integration.
    pub steps: usize,
}

pub fn deviation_csv(rows: &[DeviationRow]) -> String {
    let mut out = String::from("epsilon,sup_deviation,steps\n");
    for r in rows {
        out.push_str(&format!(
            "{:e},{:e},{}\n",
            r.epsilon, r.sup_deviation, r.steps
        ));
    }
    out
}

const GRID: usize = 4000;

/// Runs the Filippov system and its ε-regularizations across `hp` from `x0`
/// over `[0, t_end]` and reports the sup-norm deviation on a uniform grid.
pub fn compare_sliding_vs_reduced(
    sys: &DoubleDiscontinuitySystem,
    hp: HalfPlane,
    x0: Vec3,
    t_end: f64,
    epsilons: &[f64],
    transition: TransitionFunction,
) -> Result<Vec<DeviationRow>> {
    if hp.h(&x0).abs() <= crate::system::PLANE_TOL {
        let c = sys.classify_boundary_point(hp, &x0)?;
        if c.kind != crate::filippov::BoundaryKind::Sliding {
            return Err(Error::NotSlidingRegion);
        }
    }
    let dt = t_end / GRID as f64;
    let opts = IntegratorOptions {
        rel_tol: 1e-11,
        abs_tol: 1e-13,
        sample_dt: Some(dt),
        ..IntegratorOptions::default()
    }
    .with_t_end(t_end);
    let reference = integrate_r3(sys, x0, &opts)?;
    for e in &reference.events {
        if e.kind == EventKind::SlidingExit || e.kind.halts() {
            return Err(Error::LeftSlidingRegion { t: e.t });
        }
    }
    let ends_sliding = hp.h(&reference.last().state).abs() <= crate::system::PLANE_TOL;
    if !ends_sliding {
        return Err(Error::LeftSlidingRegion {
            t: reference.last().t,
        });
    }
    let grid: Vec<(f64, Vec3)> = reference.samples.iter().map(|s| (s.t, s.state)).collect();
    epsilons
        .iter()
        .map(|&eps| {
            let params = RegularizationParams::new(eps, transition)?;
            regularized_row(sys, hp, &params, x0, t_end, &grid)
        })
        .collect()
}

fn regularized_row(
    sys: &DoubleDiscontinuitySystem,
    hp: HalfPlane,
    params: &RegularizationParams,
    x0: Vec3,
    t_end: f64,
    grid: &[(f64, Vec3)],
) -> Result<DeviationRow> {
    let eps = params.epsilon;
    let ta = hp.tangent_axis();
    let sign = hp.tangent_sign();
    let mut rhs = |_: f64, v: &Vec3| regularize_half_plane(sys, hp, params, v);
    let mut solver = Dopri5::new(
        0.0,
        x0,
        Tolerances {
            rel: 1e-11,
            abs: 1e-13,
        },
    );
    let (mut sup, mut sup_t) = (0.0f64, 0.0f64);
    let mut k = 0;
    let mut measure = |t_state: Vec3, reference: &Vec3| {
        let d = (0..3)
            .map(|i| (t_state[i] - reference[i]).abs())
            .fold(0.0, f64::max);
        let dt = (t_state[0] - reference[0])
            .abs()
            .max((t_state[ta] - reference[ta]).abs());
        sup = sup.max(d);
        sup_t = sup_t.max(dt);
    };
    while k < grid.len() && grid[k].0 <= 0.0 {
        measure(x0, &grid[k].1);
        k += 1;
    }
    while solver.t < t_end {
        let max_step = if hp.h(&solver.y).abs() < 2.0 * eps {
            0.25 * eps
        } else {
            f64::INFINITY
        };
        let step = solver.step(&mut rhs, t_end, max_step)?;
        if step.y1[ta] * sign <= 0.0 {
            return Err(Error::LeftSlidingRegion { t: step.t1 });
        }
        while k < grid.len() && grid[k].0 <= step.t1 {
            measure(step.at(grid[k].0), &grid[k].1);
            k += 1;
        }
    }
    if hp.h(&solver.y).abs() > eps {
        return Err(Error::LeftSlidingRegion { t: solver.t });
    }
    Ok(DeviationRow {
        epsilon: eps,
        sup_deviation: sup,
        sup_tangential: sup_t,
        steps: solver.accepted,
    })
}
