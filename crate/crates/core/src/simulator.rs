//! Event-driven trajectories: the piecewise flow in R³ with Filippov sliding
//! on the half-planes, and the desingularized flow on the blow-up cylinder.

use serde::{Deserialize, Serialize};

use crate::angle::{normalize, BoundaryAngle, Stripe};
use crate::blowup::CylinderPoint;
use crate::error::{Error, Result};
use crate::field::{AffineVectorField3, Vec3};
use crate::filippov::{sliding_combination, BoundaryClassification, BoundaryKind};
use crate::ode::{first_event, Dopri5, Step, Tolerances};
use crate::system::{DoubleDiscontinuitySystem, HalfPlane, Quadrant, PLANE_TOL};

const MAX_EVENTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub t_end: f64,
    pub event_tol: f64,
    /// Record samples on a uniform time grid instead of at every accepted step.
    pub sample_dt: Option<f64>,
    /// Extra axial speed `σ` on the cylinder: `x' = (r + σ)·w`. Zero gives the
    /// plain desingularized field; ignored in R³.
    pub slow_scale: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            t_end: 1.0,
            event_tol: 1e-9,
            sample_dt: None,
            slow_scale: 0.0,
        }
    }
}

impl IntegratorOptions {
    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    fn tolerances(&self) -> Tolerances {
        Tolerances {
            rel: self.rel_tol,
            abs: self.abs_tol,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.event_tol > 0.0
            && self.max_step > 0.0)
        {
            return Err(Error::InvalidArgument(
                "tolerances and max_step must be positive".into(),
            ));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::InvalidArgument(
                "t_end must be positive and finite".into(),
            ));
        }
        if let Some(dt) = self.sample_dt {
            if !(dt > 0.0) {
                return Err(Error::InvalidArgument("sample_dt must be positive".into()));
            }
        }
        if !(self.slow_scale >= 0.0) {
            return Err(Error::InvalidArgument(
                "slow_scale must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    PlaneCross,
    SlidingEnter,
    SlidingExit,
    StripeBoundary,
    CycleReturn,
    TangencyHit,
    SingularLineReached,
}

impl EventKind {
    pub fn label(self) -> &'static str {
        match self {
            EventKind::PlaneCross => "plane-cross",
            EventKind::SlidingEnter => "sliding-enter",
            EventKind::SlidingExit => "sliding-exit",
            EventKind::StripeBoundary => "stripe-boundary",
            EventKind::CycleReturn => "cycle-return",
            EventKind::TangencyHit => "tangency-hit",
            EventKind::SingularLineReached => "SingularLineReached",
        }
    }

    pub fn halts(self) -> bool {
        matches!(
            self,
            EventKind::TangencyHit | EventKind::SingularLineReached
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub kind: EventKind,
    /// Half-plane (`"14"`, ...) or boundary angle (`"pi/2"`, ...) involved.
    pub surface: String,
    pub state: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeVariable {
    /// Physical time `t` of the R³ system.
    Physical,
    /// Fast time `τ` on the cylinder, `dt = r·dτ`.
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    /// `(x, y, z)` in R³, `(x, θ, r)` on the cylinder with θ in `[0, 2π)`.
    pub state: Vec3,
    /// Physical time reached along a cylinder trajectory (equals `t` in R³).
    pub physical_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub time: TimeVariable,
    pub samples: Vec<Sample>,
    pub events: Vec<Event>,
    pub steps: usize,
}

impl Trajectory {
    fn new(time: TimeVariable) -> Self {
        Trajectory {
            time,
            samples: Vec::new(),
            events: Vec::new(),
            steps: 0,
        }
    }

    pub fn last(&self) -> &Sample {
        self.samples
            .last()
            .expect("trajectories start with a sample")
    }

    pub fn halted_by(&self) -> Option<EventKind> {
        self.events.last().map(|e| e.kind).filter(|k| k.halts())
    }

    fn push_sample(&mut self, s: Sample) {
        if self.samples.last().is_none_or(|l| s.t > l.t) {
            self.samples.push(s);
        }
    }

    fn push_event(&mut self, e: Event) -> Result<()> {
        if self.events.len() >= MAX_EVENTS {
            return Err(Error::StepFailure {
                t: e.t,
                state: e.state.to_vec(),
            });
        }
        if self.events.last().is_none_or(|l| e.t > l.t) {
            self.events.push(e);
        } else if let Some(l) = self.events.last_mut() {
            // Same instant: keep the more informative kind.
            if e.kind.halts() {
                *l = e;
            }
        }
        Ok(())
    }

    /// Samples whose time falls in `[a, b]`.
    pub fn samples_between(&self, a: f64, b: f64) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(move |s| s.t >= a && s.t <= b)
    }
}

/// Grid or per-step sampling of one accepted step.
fn record<const N: usize>(
    traj: &mut Trajectory,
    step: &Step<N>,
    until: f64,
    dt: Option<f64>,
    map: &dyn Fn(&[f64; N]) -> (Vec3, f64),
) {
    match dt {
        Some(dt) => {
            let mut k = (step.t0 / dt).floor() as i64 + 1;
            loop {
                let t = k as f64 * dt;
                if t > until + 1e-12 * dt {
                    break;
                }
                let t = t.min(until);
                let (state, pt) = map(&step.at(t));
                traj.push_sample(Sample {
                    t,
                    state,
                    physical_time: pt,
                });
                k += 1;
            }
        }
        None => {
            let y = if until == step.t1 {
                step.y1
            } else {
                step.at(until)
            };
            let (state, pt) = map(&y);
            traj.push_sample(Sample {
                t: until,
                state,
                physical_time: pt,
            });
        }
    }
}

// ---------------------------------------------------------------- R³ ----

#[derive(Debug, Clone, Copy, PartialEq)]
enum R3Mode {
    Quadrant(Quadrant),
    Sliding(HalfPlane),
}

fn sliding_vector(sys: &DoubleDiscontinuitySystem, hp: HalfPlane, v: &Vec3) -> Vec3 {
    let k = hp.normal_axis();
    let fp = sys.field(hp.plus()).eval(v);
    let fm = sys.field(hp.minus()).eval(v);
    if fm[k] == fp[k] {
        return [0.0; 3];
    }
    let mut s = sliding_combination(&fp, &fm, fp[k], fm[k]);
    s[k] = 0.0;
    s
}

/// Mode to enter after hitting half-plane `hp` at `v`; `None` halts with the returned event.
fn r3_arrival(
    sys: &DoubleDiscontinuitySystem,
    hp: HalfPlane,
    v: &Vec3,
) -> (Option<R3Mode>, EventKind) {
    let c = match sys.classify_boundary_point(hp, v) {
        Ok(c) => c,
        Err(_) => return (None, EventKind::SingularLineReached),
    };
    match c.kind {
        BoundaryKind::Crossing => {
            let q = if c.lie_plus > 0.0 {
                hp.plus()
            } else {
                hp.minus()
            };
            (Some(R3Mode::Quadrant(q)), EventKind::PlaneCross)
        }
        BoundaryKind::Sliding => (Some(R3Mode::Sliding(hp)), EventKind::SlidingEnter),
        BoundaryKind::Escaping | BoundaryKind::Tangency => (None, EventKind::TangencyHit),
    }
}

fn initial_r3_mode(
    sys: &DoubleDiscontinuitySystem,
    v: &Vec3,
) -> Result<(R3Mode, Option<EventKind>)> {
    let (y, z) = (v[1], v[2]);
    if y.abs() <= PLANE_TOL && z.abs() <= PLANE_TOL {
        return Ok((
            R3Mode::Quadrant(Quadrant::Q1),
            Some(EventKind::SingularLineReached),
        ));
    }
    let on = if y == 0.0 {
        Some(HalfPlane::at(1, z))
    } else if z == 0.0 {
        Some(HalfPlane::at(2, y))
    } else {
        None
    };
    match on {
        None => Ok((R3Mode::Quadrant(Quadrant::of(y, z)), None)),
        Some(hp) => {
            let c = sys.classify_boundary_point(hp, v)?;
            Ok(match c.kind {
                BoundaryKind::Sliding => (R3Mode::Sliding(hp), Some(EventKind::SlidingEnter)),
                BoundaryKind::Crossing => {
                    let q = if c.lie_plus > 0.0 {
                        hp.plus()
                    } else {
                        hp.minus()
                    };
                    (R3Mode::Quadrant(q), None)
                }
                BoundaryKind::Escaping | BoundaryKind::Tangency => {
                    (R3Mode::Quadrant(Quadrant::Q1), Some(EventKind::TangencyHit))
                }
            })
        }
    }
}

/// Filippov trajectory of the R³ system from `x0` over `[0, t_end]`.
pub fn integrate_r3(
    sys: &DoubleDiscontinuitySystem,
    x0: Vec3,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    opts.validate()?;
    if !x0.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument(
            "initial state must be finite".into(),
        ));
    }
    let mut traj = Trajectory::new(TimeVariable::Physical);
    traj.push_sample(Sample {
        t: 0.0,
        state: x0,
        physical_time: 0.0,
    });
    let (mut mode, first) = initial_r3_mode(sys, &x0)?;
    if let Some(kind) = first {
        let surface = match mode {
            R3Mode::Sliding(hp) => hp.label().to_string(),
            R3Mode::Quadrant(_) => "x-axis".to_string(),
        };
        traj.push_event(Event {
            t: 0.0,
            kind,
            surface,
            state: x0,
        })?;
        if kind.halts() {
            return Ok(traj);
        }
    }
    let mut solver = Dopri5::new(0.0, x0, opts.tolerances());
    let map = |y: &Vec3| (*y, 0.0);
    let mut just_left: Option<usize> = None;
    while solver.t < opts.t_end {
        let step = match mode {
            R3Mode::Quadrant(q) => {
                let f = sys.field(q);
                solver.step(&mut |_, y| f.eval(y), opts.t_end, opts.max_step)?
            }
            R3Mode::Sliding(hp) => solver.step(
                &mut |_, y| sliding_vector(sys, hp, y),
                opts.t_end,
                opts.max_step,
            )?,
        };
        traj.steps += 1;
        let hit = match mode {
            R3Mode::Quadrant(q) => {
                let (sy, sz) = q.signs();
                let skip = just_left;
                first_event(
                    &step,
                    2,
                    |k, y| {
                        let g = if k == 0 { sy * y[1] } else { sz * y[2] };
                        if skip == Some(k) && g > -1e-12 {
                            g.abs()
                        } else {
                            g
                        }
                    },
                    opts.event_tol * 1e-3,
                )
            }
            R3Mode::Sliding(hp) => {
                let (plus, minus) = (sys.field(hp.plus()), sys.field(hp.minus()));
                let k = hp.normal_axis();
                let ta = hp.tangent_axis();
                let sign = hp.tangent_sign();
                first_event(
                    &step,
                    3,
                    |e, y| match e {
                        0 => -plus.eval(y)[k],
                        1 => minus.eval(y)[k],
                        _ => sign * y[ta],
                    },
                    opts.event_tol * 1e-3,
                )
            }
        };
        just_left = None;
        let Some((which, te)) = hit else {
            record(&mut traj, &step, step.t1, opts.sample_dt, &map);
            if let R3Mode::Sliding(hp) = mode {
                let mut y = solver.y;
                y[hp.normal_axis()] = 0.0;
                solver.reset(solver.t, y);
            }
            continue;
        };
        let mut v = step.at(te);
        record(&mut traj, &step, te, opts.sample_dt, &map);
        let (next, kind, surface) = match mode {
            R3Mode::Quadrant(_) => {
                let axis = which + 1;
                v[axis] = 0.0;
                let other = v[3 - axis];
                let hp = HalfPlane::at(axis, other);
                if other.abs() <= PLANE_TOL {
                    (None, EventKind::SingularLineReached, hp.label().to_string())
                } else {
                    let (n, k) = r3_arrival(sys, hp, &v);
                    (n, k, hp.label().to_string())
                }
            }
            R3Mode::Sliding(hp) => {
                v[hp.normal_axis()] = 0.0;
                match which {
                    0 => {
                        just_left = Some(hp.normal_axis() - 1);
                        (
                            Some(R3Mode::Quadrant(hp.plus())),
                            EventKind::SlidingExit,
                            hp.label().to_string(),
                        )
                    }
                    1 => {
                        just_left = Some(hp.normal_axis() - 1);
                        (
                            Some(R3Mode::Quadrant(hp.minus())),
                            EventKind::SlidingExit,
                            hp.label().to_string(),
                        )
                    }
                    _ => {
                        v[hp.tangent_axis()] = 0.0;
                        (None, EventKind::SingularLineReached, hp.label().to_string())
                    }
                }
            }
        };
        if let Some(last) = traj.samples.last_mut() {
            if last.t == te {
                last.state = v;
            }
        }
        traj.push_sample(Sample {
            t: te,
            state: v,
            physical_time: te,
        });
        traj.push_event(Event {
            t: te,
            kind,
            surface,
            state: v,
        })?;
        match next {
            Some(m) => {
                if matches!(m, R3Mode::Quadrant(_)) && kind == EventKind::PlaneCross {
                    if let R3Mode::Quadrant(_) = mode {
                        just_left = Some(which);
                    }
                }
                mode = m;
                solver.reset(te, v);
            }
            None => return Ok(traj),
        }
    }
    Ok(traj)
}

// ---------------------------------------------------------- cylinder ----

#[derive(Debug, Clone, Copy, PartialEq)]
enum CylMode {
    Stripe(Stripe),
    Sliding(BoundaryAngle),
}

/// `θ`-rate of `field` on boundary `b` at height `r`, with exact boundary trigonometry.
pub fn boundary_theta_rate(field: &AffineVectorField3, b: BoundaryAngle, x: f64, r: f64) -> f64 {
    let (c, s) = b.unit();
    let v = if r == 0.0 {
        [x, 0.0, 0.0]
    } else {
        [x, r * c, r * s]
    };
    let [_, p, q] = field.eval(&v);
    q * c - p * s
}

fn cyl_rhs(field: &AffineVectorField3, sigma: f64, y: &[f64; 4]) -> [f64; 4] {
    let (x, theta, r) = (y[0], y[1], y[2]);
    let v = if r == 0.0 {
        [x, 0.0, 0.0]
    } else {
        crate::blowup::phi1(x, theta, r)
    };
    let [w, p, q] = field.eval(&v);
    let (s, c) = theta.sin_cos();
    [(r + sigma) * w, q * c - p * s, r * (p * c + q * s), r]
}

fn cyl_sliding_rhs(
    sys: &DoubleDiscontinuitySystem,
    b: BoundaryAngle,
    sigma: f64,
    y: &[f64; 4],
) -> [f64; 4] {
    let minus = cyl_rhs(sys.stripe_field(b.below()), sigma, y);
    let plus = cyl_rhs(sys.stripe_field(b.above()), sigma, y);
    let lm = boundary_theta_rate(sys.stripe_field(b.below()), b, y[0], y[2]);
    let lp = boundary_theta_rate(sys.stripe_field(b.above()), b, y[0], y[2]);
    if lm == lp {
        return [0.0; 4];
    }
    let mut s = sliding_combination(&plus, &minus, lp, lm);
    s[1] = 0.0;
    s
}

/// Classification of boundary `b` at `(x, r)`: `+` is the stripe above `b`.
pub fn classify_stripe_boundary(
    sys: &DoubleDiscontinuitySystem,
    b: BoundaryAngle,
    x: f64,
    r: f64,
) -> BoundaryClassification {
    let lm = boundary_theta_rate(sys.stripe_field(b.below()), b, x, r);
    let lp = boundary_theta_rate(sys.stripe_field(b.above()), b, x, r);
    BoundaryClassification::new(lp, lm)
}

/// Unwrapped θ-interval of `stripe` containing the unwrapped angle `theta`.
fn stripe_bounds(stripe: Stripe, theta: f64) -> (f64, f64) {
    let (lo, hi) = stripe.interval();
    let turns = ((theta - lo) / std::f64::consts::TAU).floor();
    let mut lo_u = lo + turns * std::f64::consts::TAU;
    if theta > lo_u + (hi - lo) + 1e-12 {
        lo_u += std::f64::consts::TAU;
    }
    (lo_u, lo_u + (hi - lo))
}

fn cyl_arrival(
    sys: &DoubleDiscontinuitySystem,
    b: BoundaryAngle,
    x: f64,
    r: f64,
    from_below: bool,
) -> (Option<CylMode>, EventKind) {
    let c = classify_stripe_boundary(sys, b, x, r);
    match c.kind {
        BoundaryKind::Crossing => {
            let up = c.lie_plus > 0.0;
            let kind = if b == BoundaryAngle::Zero && up && from_below {
                EventKind::CycleReturn
            } else {
                EventKind::StripeBoundary
            };
            (
                Some(CylMode::Stripe(if up { b.above() } else { b.below() })),
                kind,
            )
        }
        BoundaryKind::Sliding => (Some(CylMode::Sliding(b)), EventKind::SlidingEnter),
        BoundaryKind::Escaping | BoundaryKind::Tangency => (None, EventKind::TangencyHit),
    }
}

/// Desingularized flow on the cylinder from `c0` over fast time `[0, t_end]`.
/// A fourth hidden component integrates physical time `t' = r`.
pub fn integrate_cylinder(
    sys: &DoubleDiscontinuitySystem,
    c0: CylinderPoint,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    opts.validate()?;
    if !(c0.r >= 0.0 && c0.x.is_finite() && c0.theta.is_finite()) {
        return Err(Error::InvalidArgument(
            "cylinder start needs finite x, θ and r ≥ 0".into(),
        ));
    }
    let sigma = opts.slow_scale;
    let theta0 = normalize(c0.theta);
    let mut traj = Trajectory::new(TimeVariable::Fast);
    traj.push_sample(Sample {
        t: 0.0,
        state: [c0.x, theta0, c0.r],
        physical_time: 0.0,
    });
    let mut mode = match BoundaryAngle::near(theta0, 0.0) {
        None => CylMode::Stripe(Stripe::of(theta0)),
        Some(b) => {
            let (next, kind) = cyl_arrival(sys, b, c0.x, c0.r, false);
            match next {
                Some(m) => {
                    if kind == EventKind::SlidingEnter {
                        traj.push_event(Event {
                            t: 0.0,
                            kind,
                            surface: b.label().into(),
                            state: [c0.x, theta0, c0.r],
                        })?;
                    }
                    m
                }
                None => {
                    traj.push_event(Event {
                        t: 0.0,
                        kind,
                        surface: b.label().into(),
                        state: [c0.x, theta0, c0.r],
                    })?;
                    return Ok(traj);
                }
            }
        }
    };
    let y0 = [c0.x, theta0, c0.r, 0.0];
    let mut solver = Dopri5::new(0.0, y0, opts.tolerances());
    let map = |y: &[f64; 4]| ([y[0], normalize(y[1]), y[2]], y[3]);
    let mut guard: Option<usize> = None;
    while solver.t < opts.t_end {
        let step = match mode {
            CylMode::Stripe(s) => {
                let f = sys.stripe_field(s);
                solver.step(&mut |_, y| cyl_rhs(f, sigma, y), opts.t_end, opts.max_step)?
            }
            CylMode::Sliding(b) => solver.step(
                &mut |_, y| cyl_sliding_rhs(sys, b, sigma, y),
                opts.t_end,
                opts.max_step,
            )?,
        };
        traj.steps += 1;
        let hit = match mode {
            CylMode::Stripe(s) => {
                let (lo, hi) = stripe_bounds(s, step.y0[1]);
                let skip = guard;
                first_event(
                    &step,
                    2,
                    |k, y| {
                        let g = if k == 0 { y[1] - lo } else { hi - y[1] };
                        if skip == Some(k) && g > -1e-12 {
                            g.abs()
                        } else {
                            g
                        }
                    },
                    opts.event_tol * 1e-3,
                )
                .map(|(k, t)| (k, t, if k == 0 { lo } else { hi }))
            }
            CylMode::Sliding(b) => {
                let (fm, fp) = (sys.stripe_field(b.below()), sys.stripe_field(b.above()));
                first_event(
                    &step,
                    2,
                    |k, y| {
                        if k == 0 {
                            -boundary_theta_rate(fp, b, y[0], y[2])
                        } else {
                            boundary_theta_rate(fm, b, y[0], y[2])
                        }
                    },
                    opts.event_tol * 1e-3,
                )
                .map(|(k, t)| (k, t, step.y0[1]))
            }
        };
        guard = None;
        let Some((which, te, angle)) = hit else {
            record(&mut traj, &step, step.t1, opts.sample_dt, &map);
            continue;
        };
        let mut y = step.at(te);
        record(&mut traj, &step, te, opts.sample_dt, &map);
        y[1] = angle;
        let b =
            BoundaryAngle::near(normalize(angle), 1e-9).expect("events fire on boundary angles");
        let (next, kind) = match mode {
            CylMode::Stripe(_) => cyl_arrival(sys, b, y[0], y[2], which == 1),
            CylMode::Sliding(_) => {
                if which == 0 {
                    guard = Some(0);
                    (Some(CylMode::Stripe(b.above())), EventKind::SlidingExit)
                } else {
                    guard = Some(1);
                    (Some(CylMode::Stripe(b.below())), EventKind::SlidingExit)
                }
            }
        };
        if matches!(mode, CylMode::Stripe(_)) {
            if let Some(CylMode::Stripe(_)) = next {
                guard = Some(1 - which);
            }
        }
        let state = [y[0], normalize(y[1]), y[2]];
        if let Some(last) = traj.samples.last_mut() {
            if last.t == te {
                last.state = state;
            }
        }
        traj.push_sample(Sample {
            t: te,
            state,
            physical_time: y[3],
        });
        traj.push_event(Event {
            t: te,
            kind,
            surface: b.label().into(),
            state,
        })?;
        match next {
            Some(m) => {
                mode = m;
                solver.reset(te, y);
            }
            None => return Ok(traj),
        }
    }
    Ok(traj)
}
