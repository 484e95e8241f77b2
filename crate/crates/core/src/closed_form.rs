//! Exact slow-manifold geometry for constant and affine stripe fields.
//!
//! On the axis a field restricts to `w(x) = a1·x + d1`, `p(x) = a2·x + d2`,
//! `q(x) = a3·x + d3`. The slow manifold `{q cos θ = p sin θ}` consists of two
//! branches, the angles of `±(p(x), q(x))`. The `+` branch attracts the layer
//! flow (eigenvalue `−|(p, q)|`), the `−` branch repels it.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::angle::{direction, BoundaryAngle, Stripe};
use crate::blowup::layer_eigenvalue_of;
use crate::error::{Error, Result};
use crate::field::{Affine1, AffineVectorField3};
use crate::ode::{first_event, Dopri5, Tolerances};
use crate::simulator::boundary_theta_rate;
use crate::system::DoubleDiscontinuitySystem;

/// Parameters of an affine field's slow manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineParams {
    /// Abscissa of the vertical asymptote, `−d2/a2`.
    pub alpha: Option<f64>,
    /// Horizontal asymptote `arctan(a3/a2)`.
    pub beta: Option<f64>,
    pub gamma: f64,
    /// Zero of the axial rate, `−d1/a1`.
    pub delta: Option<f64>,
    pub sigma_plus: Option<f64>,
    pub sigma_minus: Option<f64>,
}

pub fn affine_params(field: &AffineVectorField3) -> Result<AffineParams> {
    let gamma = field.gamma();
    if gamma == 0.0 {
        return Err(Error::ConstantDegenerate);
    }
    let (a1, a2, a3) = (field.a[0][0], field.a[1][0], field.a[2][0]);
    let (d1, d2) = (field.d[0], field.d[1]);
    let sigma = (a2 == 0.0).then(|| gamma.signum() * FRAC_PI_2);
    Ok(AffineParams {
        alpha: (a2 != 0.0).then(|| -d2 / a2),
        beta: (a2 != 0.0).then(|| (a3 / a2).atan()),
        gamma,
        delta: (a1 != 0.0).then(|| -d1 / a1),
        sigma_plus: sigma,
        sigma_minus: sigma.map(|s| -s),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchLabel {
    L,
    LPi,
    A,
    APi,
}

impl BranchLabel {
    pub fn name(self) -> &'static str {
        match self {
            BranchLabel::L => "L",
            BranchLabel::LPi => "L^pi",
            BranchLabel::A => "A",
            BranchLabel::APi => "A^pi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerStability {
    Attractor,
    Repellor,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BranchKind {
    Line {
        theta: f64,
    },
    Arctan {
        /// `θ` as `x → −∞` and as `x → +∞`.
        asymptote_minus: f64,
        asymptote_plus: f64,
        increasing: bool,
        /// Vertical asymptote splitting the branch into two hyperbola pieces.
        split: Option<f64>,
    },
}

/// One branch of the slow manifold: the angle of `sign·(p(x), q(x))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowManifoldBranch {
    pub label: BranchLabel,
    pub sign: f64,
    pub kind: BranchKind,
    pub stability: LayerStability,
    p: Affine1,
    q: Affine1,
}

impl SlowManifoldBranch {
    fn new(label: BranchLabel, sign: f64, field: &AffineVectorField3) -> Self {
        let (p, q) = (field.p(), field.q());
        let kind = if p.slope == 0.0 && q.slope == 0.0 {
            BranchKind::Line {
                theta: direction(sign * p.offset, sign * q.offset),
            }
        } else {
            BranchKind::Arctan {
                asymptote_minus: direction(-sign * p.slope, -sign * q.slope),
                asymptote_plus: direction(sign * p.slope, sign * q.slope),
                increasing: field.gamma() > 0.0,
                split: p.root(),
            }
        };
        let stability = if sign > 0.0 {
            LayerStability::Attractor
        } else {
            LayerStability::Repellor
        };
        SlowManifoldBranch {
            label,
            sign,
            kind,
            stability,
            p,
            q,
        }
    }

    /// Branch angle in `[0, 2π)`; NaN where `p = q = 0`.
    pub fn theta_at(&self, x: f64) -> f64 {
        match self.kind {
            BranchKind::Line { theta } => theta,
            BranchKind::Arctan { .. } => {
                let (u, v) = (self.sign * self.p.eval(x), self.sign * self.q.eval(x));
                if u == 0.0 && v == 0.0 {
                    f64::NAN
                } else {
                    direction(u, v)
                }
            }
        }
    }

    /// Where the branch meets the ray of boundary angle `b`, if it does at a finite `x`.
    pub fn border_crossing(&self, b: BoundaryAngle) -> Option<f64> {
        if matches!(self.kind, BranchKind::Line { .. }) {
            return None;
        }
        let (c, s) = b.unit();
        // sign·(p, q) parallel to (c, s): p·s − q·c = 0 with positive projection.
        let cross = Affine1::new(
            self.p.slope * s - self.q.slope * c,
            self.p.offset * s - self.q.offset * c,
        );
        let x = cross.root()?;
        let along = self.sign * (self.p.eval(x) * c + self.q.eval(x) * s);
        (along > 0.0).then_some(x)
    }

    /// Closed `x`-intervals on which the branch lies in the closed stripe.
    /// Endpoints are `±∞` where the branch stays inside asymptotically.
    pub fn segments_in(&self, stripe: Stripe) -> Vec<(f64, f64)> {
        if let BranchKind::Line { theta } = self.kind {
            return if stripe.contains(theta) {
                vec![(f64::NEG_INFINITY, f64::INFINITY)]
            } else {
                Vec::new()
            };
        }
        let (lo, hi) = stripe.borders();
        let mut cuts: Vec<f64> = [self.border_crossing(lo), self.border_crossing(hi)]
            .into_iter()
            .flatten()
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut pts = vec![f64::NEG_INFINITY];
        pts.extend(&cuts);
        pts.push(f64::INFINITY);
        let mut out: Vec<(f64, f64)> = Vec::new();
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let probe = match (a.is_finite(), b.is_finite()) {
                (true, true) => 0.5 * (a + b),
                (true, false) => a + 1.0 + a.abs(),
                (false, true) => b - 1.0 - b.abs(),
                (false, false) => 0.0,
            };
            let t = self.theta_at(probe);
            let inside = if t.is_nan() {
                false
            } else {
                stripe.contains(t)
            };
            if inside {
                match out.last_mut() {
                    Some(last) if last.1 == a => last.1 = b,
                    _ => out.push((a, b)),
                }
            }
        }
        out
    }

    pub fn partner(&self) -> SlowManifoldBranch {
        let label = match self.label {
            BranchLabel::L => BranchLabel::LPi,
            BranchLabel::LPi => BranchLabel::L,
            BranchLabel::A => BranchLabel::APi,
            BranchLabel::APi => BranchLabel::A,
        };
        let field = AffineVectorField3::axial(
            [0.0, self.p.slope, self.q.slope],
            [0.0, self.p.offset, self.q.offset],
        );
        SlowManifoldBranch::new(label, -self.sign, &field)
    }

    /// Does the branch cross both borders of `stripe`, with neither asymptote in the closed stripe?
    pub fn crosses(&self, stripe: Stripe) -> Option<(f64, f64)> {
        let BranchKind::Arctan {
            asymptote_minus,
            asymptote_plus,
            ..
        } = self.kind
        else {
            return None;
        };
        if stripe.contains(asymptote_minus) || stripe.contains(asymptote_plus) {
            return None;
        }
        let (lo, hi) = stripe.borders();
        let (a, b) = (self.border_crossing(lo)?, self.border_crossing(hi)?);
        Some((a.min(b), a.max(b)))
    }
}

/// Which stripes contain a branch (lines on a border belong to both neighbours).
pub fn visibility(branch: &SlowManifoldBranch) -> Vec<Stripe> {
    Stripe::ALL
        .into_iter()
        .filter(|s| !branch.segments_in(*s).is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantBranches {
    /// `arctan(d3/d2)`, or `π/2` when `d2 = 0`.
    pub theta_i: f64,
    pub l: SlowManifoldBranch,
    pub l_pi: SlowManifoldBranch,
    pub l_visible_in: Vec<Stripe>,
    pub l_pi_visible_in: Vec<Stripe>,
}

impl ConstantBranches {
    /// Stripes where at least one line is visible.
    pub fn visible_in(&self, stripe: Stripe) -> bool {
        self.l_visible_in.contains(&stripe) || self.l_pi_visible_in.contains(&stripe)
    }
}

pub fn constant_branches(field: &AffineVectorField3) -> Result<ConstantBranches> {
    let (d2, d3) = (field.d[1], field.d[2]);
    if d2 == 0.0 && d3 == 0.0 {
        return Err(Error::WfhViolation);
    }
    let axis_field = AffineVectorField3::constant(field.d);
    let theta_i = if d2 != 0.0 {
        (d3 / d2).atan()
    } else {
        FRAC_PI_2
    };
    let s = if d2 != 0.0 { d2.signum() } else { d3.signum() };
    let l = SlowManifoldBranch::new(BranchLabel::L, s, &axis_field);
    let l_pi = SlowManifoldBranch::new(BranchLabel::LPi, -s, &axis_field);
    Ok(ConstantBranches {
        theta_i,
        l_visible_in: visibility(&l),
        l_pi_visible_in: visibility(&l_pi),
        l,
        l_pi,
    })
}

/// `(A, A^π)` for a field with `γ ≠ 0`.
pub fn affine_branches(
    field: &AffineVectorField3,
) -> Result<(SlowManifoldBranch, SlowManifoldBranch)> {
    if field.gamma() == 0.0 {
        return Err(Error::ConstantDegenerate);
    }
    let (a2, d2) = (field.a[1][0], field.d[1]);
    let s = if a2 != 0.0 { a2.signum() } else { d2.signum() };
    Ok((
        SlowManifoldBranch::new(BranchLabel::A, s, field),
        SlowManifoldBranch::new(BranchLabel::APi, -s, field),
    ))
}

/// Both branches of any field with WFH: lines for `γ = 0`, arctangents otherwise.
pub fn branches(field: &AffineVectorField3) -> Result<(SlowManifoldBranch, SlowManifoldBranch)> {
    if field.gamma() != 0.0 {
        return affine_branches(field);
    }
    let (p, q) = (field.p(), field.q());
    if p.slope == 0.0 && q.slope == 0.0 {
        let c = constant_branches(field)?;
        return Ok((c.l, c.l_pi));
    }
    // γ = 0 with a non-constant direction: (p, q) is a multiple of a fixed
    // vector, so the manifold is still a pair of lines, except where p = q = 0.
    let (u, v) = if p.slope != 0.0 || q.slope != 0.0 {
        (p.slope, q.slope)
    } else {
        (p.offset, q.offset)
    };
    let line = AffineVectorField3::constant([0.0, u, v]);
    let s = if u != 0.0 { u.signum() } else { v.signum() };
    Ok((
        SlowManifoldBranch::new(BranchLabel::L, s, &line),
        SlowManifoldBranch::new(BranchLabel::LPi, -s, &line),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularityKind {
    Saddle,
    StableNode,
    UnstableNode,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularityClassification {
    pub x: f64,
    pub theta: f64,
    /// Reduced eigenvalue `a1`.
    pub lambda1: f64,
    /// Layer eigenvalue at the point.
    pub lambda2: f64,
    pub kind: SingularityKind,
    pub branch: BranchLabel,
}

pub fn classify_eigenvalues(l1: f64, l2: f64) -> SingularityKind {
    if l1 * l2 < 0.0 {
        SingularityKind::Saddle
    } else if l1 < 0.0 && l2 < 0.0 {
        SingularityKind::StableNode
    } else if l1 > 0.0 && l2 > 0.0 {
        SingularityKind::UnstableNode
    } else {
        SingularityKind::Degenerate
    }
}

/// Zero of the reduced flow on `branch`, if the axial rate is non-constant.
pub fn reduced_singularity(
    field: &AffineVectorField3,
    branch: &SlowManifoldBranch,
) -> Option<SingularityClassification> {
    let a1 = field.a[0][0];
    if a1 == 0.0 {
        return None;
    }
    let x = -field.d[0] / a1;
    let theta = branch.theta_at(x);
    let lambda2 = layer_eigenvalue_of(field, x, theta);
    Some(SingularityClassification {
        x,
        theta,
        lambda1: a1,
        lambda2,
        kind: classify_eigenvalues(a1, lambda2),
        branch: branch.label,
    })
}

/// The reduced singularity of stripe `s`'s field that lies in the closed stripe.
pub fn stripe_singularity(
    sys: &DoubleDiscontinuitySystem,
    stripe: Stripe,
) -> Option<SingularityClassification> {
    let field = sys.stripe_field(stripe);
    let (a, b) = branches(field).ok()?;
    [a, b]
        .iter()
        .filter_map(|br| reduced_singularity(field, br))
        .find(|p| p.theta.is_finite() && stripe.contains(p.theta))
}

// ------------------------------------------------------------ slow cycle ----

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Transport {
    Direct,
    Sliding { from: f64, to: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleSegment {
    pub stripe: Stripe,
    pub branch: BranchLabel,
    pub stability: LayerStability,
    /// Entry point `R = (x, θ)` on one border.
    pub entry: (f64, f64),
    /// Exit point `Q = (x, θ)` on the other border.
    pub exit: (f64, f64),
    /// How the previous segment's exit reaches this entry.
    pub transport: Transport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlowCycle {
    pub segments: Vec<CycleSegment>,
    pub closed: bool,
    /// `+1` when θ increases along the cycle.
    pub orientation: f64,
    /// `|P(x₀) − x₀|` of the numerically integrated reduced return map on the `θ = 0` section.
    pub return_residual: f64,
}

const MATCH_TOL: f64 = 1e-8;
pub const RETURN_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy)]
struct Crossing {
    branch: SlowManifoldBranch,
    entry_x: f64,
    exit_x: f64,
    entry_border: BoundaryAngle,
    exit_border: BoundaryAngle,
}

fn stripe_crossing(field: &AffineVectorField3, stripe: Stripe) -> Option<Crossing> {
    let (a, b) = affine_branches(field).ok()?;
    let (branch, (x1, x2)) = [a, b]
        .into_iter()
        .find_map(|br| br.crosses(stripe).map(|seg| (br, seg)))?;
    let w = field.w();
    let (w1, w2) = (w.eval(x1), w.eval(x2));
    if !(w1 * w2 > 0.0) {
        return None;
    }
    let (entry_x, exit_x) = if w1 > 0.0 { (x1, x2) } else { (x2, x1) };
    let (lo, hi) = stripe.borders();
    let border_at = |x: f64| {
        if branch.border_crossing(lo) == Some(x) {
            lo
        } else {
            hi
        }
    };
    Some(Crossing {
        branch,
        entry_x,
        exit_x,
        entry_border: border_at(entry_x),
        exit_border: border_at(exit_x),
    })
}

fn boundary_rates(sys: &DoubleDiscontinuitySystem, b: BoundaryAngle) -> (Affine1, Affine1) {
    let fm = sys.stripe_field(b.below());
    let fp = sys.stripe_field(b.above());
    let lin = |f: &AffineVectorField3| {
        let v0 = boundary_theta_rate(f, b, 0.0, 0.0);
        let v1 = boundary_theta_rate(f, b, 1.0, 0.0);
        Affine1::new(v1 - v0, v0)
    };
    (lin(fm), lin(fp))
}

/// Axial speed of boundary sliding at `x` (σ-scaled planar fields at `r = 0`), or
/// `None` outside the sliding region.
fn boundary_sliding_speed(
    sys: &DoubleDiscontinuitySystem,
    b: BoundaryAngle,
    x: f64,
) -> Option<f64> {
    let (fm, fp) = boundary_rates(sys, b);
    let (lm, lp) = (fm.eval(x), fp.eval(x));
    if !(lm >= 0.0 && lp <= 0.0 && lm - lp > 0.0) {
        return None;
    }
    let wm = sys.stripe_field(b.below()).w().eval(x);
    let wp = sys.stripe_field(b.above()).w().eval(x);
    Some((wp * lm - wm * lp) / (lm - lp))
}

fn sliding_transport_ok(
    sys: &DoubleDiscontinuitySystem,
    b: BoundaryAngle,
    from: f64,
    to: f64,
) -> bool {
    let n = 64;
    let dir = (to - from).signum();
    (1..n).all(|k| {
        let x = from + (to - from) * k as f64 / n as f64;
        boundary_sliding_speed(sys, b, x).is_some_and(|v| v * dir > 0.0)
    })
}

/// The unique closed chain of transversal slow-manifold segments around the cylinder.
pub fn slow_cycle_detect(sys: &DoubleDiscontinuitySystem) -> Option<SlowCycle> {
    if sys.fields.iter().any(|f| f.gamma() == 0.0) {
        return None;
    }
    let crossings: Vec<Crossing> = Stripe::ALL
        .iter()
        .map(|s| stripe_crossing(sys.stripe_field(*s), *s))
        .collect::<Option<_>>()?;
    let start = Stripe::S1;
    let first = crossings[start.index()];
    let orientation = if first.exit_border == start.borders().1 {
        1.0
    } else {
        -1.0
    };
    let mut segments = Vec::with_capacity(4);
    let mut stripe = start;
    let mut transport = Transport::Direct;
    for _ in 0..4 {
        let c = crossings[stripe.index()];
        segments.push(CycleSegment {
            stripe,
            branch: c.branch.label,
            stability: c.branch.stability,
            entry: (c.entry_x, c.entry_border.value()),
            exit: (c.exit_x, c.exit_border.value()),
            transport,
        });
        let next = if orientation > 0.0 {
            stripe.next()
        } else {
            stripe.prev()
        };
        let n = crossings[next.index()];
        if n.entry_border != c.exit_border {
            return None;
        }
        transport = if (n.entry_x - c.exit_x).abs() <= MATCH_TOL {
            Transport::Direct
        } else if sliding_transport_ok(sys, c.exit_border, c.exit_x, n.entry_x) {
            Transport::Sliding {
                from: c.exit_x,
                to: n.entry_x,
            }
        } else {
            return None;
        };
        stripe = next;
    }
    segments[0].transport = transport;
    let return_residual = reduced_return_residual(sys, &segments);
    Some(SlowCycle {
        segments,
        closed: true,
        orientation,
        return_residual,
    })
}

/// Integrates the reduced flow `ẋ = w(x)` along each segment's branch, with
/// border detection on the branch angle and numeric sliding transport, and
/// returns `|P(x₀) − x₀|` for the start on the `θ = 0` section.
pub fn reduced_return_residual(sys: &DoubleDiscontinuitySystem, segments: &[CycleSegment]) -> f64 {
    let tol = Tolerances {
        rel: 1e-12,
        abs: 1e-13,
    };
    let k0 = segments
        .iter()
        .position(|s| s.entry.1 == 0.0 || s.entry.1 == std::f64::consts::TAU)
        .unwrap_or(0);
    let x0 = segments[k0].entry.0;
    let mut x = x0;
    for i in 0..segments.len() {
        let seg = &segments[(k0 + i) % segments.len()];
        let field = sys.stripe_field(seg.stripe);
        let branch = affine_branches(field)
            .map(|(a, b)| if a.label == seg.branch { a } else { b })
            .expect("cycle fields satisfy SFH");
        let exit_border = BoundaryAngle::near(seg.exit.1, 1e-12).expect("exit lies on a border");
        let (c, s) = exit_border.unit();
        let cross = |x: f64| branch.sign * (c * field.q().eval(x) - s * field.p().eval(x));
        let orient = cross(x).signum();
        let w = field.w();
        match integrate_until(
            &mut |y: &[f64; 1]| [w.eval(y[0])],
            x,
            |y| orient * cross(y[0]),
            tol,
        ) {
            Some(xe) => x = xe,
            None => return f64::INFINITY,
        }
        // Transport to the next stripe's manifold along the shared border.
        let next = &segments[(k0 + i + 1) % segments.len()];
        let next_field = sys.stripe_field(next.stripe);
        let g = |x: f64| boundary_theta_rate(next_field, exit_border, x, 0.0);
        if g(x).abs() > 1e-9 {
            let orient = g(x).signum();
            let speed =
                |y: &[f64; 1]| [boundary_sliding_speed(sys, exit_border, y[0]).unwrap_or(0.0)];
            match integrate_until(&mut { speed }, x, |y| orient * g(y[0]), tol) {
                Some(xe) => x = xe,
                None => return f64::INFINITY,
            }
        }
    }
    (x - x0).abs()
}

fn integrate_until<F, G>(f: &mut F, x0: f64, g: G, tol: Tolerances) -> Option<f64>
where
    F: FnMut(&[f64; 1]) -> [f64; 1],
    G: Fn(&[f64; 1]) -> f64,
{
    let mut solver = Dopri5::new(0.0, [x0], tol);
    let mut rhs = |_: f64, y: &[f64; 1]| f(y);
    let t_max = 1e6;
    while solver.t < t_max {
        let step = solver.step(&mut rhs, t_max, 1.0).ok()?;
        if let Some((_, t)) = first_event(&step, 1, |_, y| g(y), 1e-14) {
            return Some(step.at(t)[0]);
        }
        if step.y1[0] == step.y0[0] {
            return None;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::solve_branch_theta;
    use std::f64::consts::{FRAC_PI_4, PI};

    pub(crate) fn slow_cycle_system() -> DoubleDiscontinuitySystem {
        DoubleDiscontinuitySystem::new([
            AffineVectorField3::axial([-1.0, -1.0, 1.0], [2.0, 1.0, 0.0]),
            AffineVectorField3::axial([1.0, -1.0, -1.0], [-2.0, 1.0, 0.0]),
            AffineVectorField3::axial([1.0, 1.0, -1.0], [-2.0, 1.0, 0.0]),
            AffineVectorField3::axial([-1.0, 1.0, 1.0], [2.0, 1.0, 0.0]),
        ])
    }

    #[test]
    fn arctan_branch_parameters() {
        let f = AffineVectorField3::axial([1.0, 1.0, 1.0], [-1.0, 1.0, 0.0]);
        let p = affine_params(&f).unwrap();
        assert_eq!(p.alpha, Some(-1.0));
        assert_eq!(p.beta, Some(FRAC_PI_4));
        assert_eq!(p.delta, Some(1.0));
        assert_eq!((p.sigma_plus, p.sigma_minus), (None, None));
    }

    #[test]
    fn slow_cycle_field_parameters() {
        let p = affine_params(&slow_cycle_system().fields[0]).unwrap();
        assert_eq!(p.gamma, 1.0);
        assert_eq!(p.beta, Some(-FRAC_PI_4));
    }

    #[test]
    fn sigma_for_vertical_free_field() {
        let f4 = AffineVectorField3::axial([-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]);
        let p = affine_params(&f4).unwrap();
        assert_eq!(p.gamma, -1.0);
        assert_eq!(p.sigma_plus, Some(-FRAC_PI_2));
        assert_eq!(p.sigma_minus, Some(FRAC_PI_2));
        assert_eq!(p.alpha, None);
        assert_eq!(
            affine_params(&AffineVectorField3::constant([1.0, 1.0, 1.0])),
            Err(Error::ConstantDegenerate)
        );
    }

    #[test]
    fn constant_example_lines() {
        let c = constant_branches(&AffineVectorField3::constant([1.0, -1.0, 1.0])).unwrap();
        assert!((c.theta_i + FRAC_PI_4).abs() < 1e-15);
        let BranchKind::Line { theta } = c.l.kind else {
            panic!()
        };
        assert!((theta - 7.0 * FRAC_PI_4).abs() < 1e-12);
        assert_eq!(c.l_visible_in, vec![Stripe::S4]);
        assert_eq!(c.l_pi_visible_in, vec![Stripe::S2]);
        assert_eq!(c.l.stability, LayerStability::Repellor);
        assert_eq!(c.l_pi.stability, LayerStability::Attractor);
        assert!(!c.visible_in(Stripe::S1));
    }

    #[test]
    fn vertical_lines_when_d2_vanishes() {
        let c = constant_branches(&AffineVectorField3::constant([3.0, 0.0, 1.0])).unwrap();
        assert_eq!(c.l.kind, BranchKind::Line { theta: FRAC_PI_2 });
        assert_eq!(c.l_pi.kind, BranchKind::Line { theta: 1.5 * PI });
        assert_eq!(c.l.stability, LayerStability::Attractor);
        assert_eq!(c.l_visible_in, vec![Stripe::S1, Stripe::S2]);
    }

    #[test]
    fn lines_on_borders() {
        let c = constant_branches(&AffineVectorField3::constant([0.0, 1.0, 0.0])).unwrap();
        assert_eq!(c.theta_i, 0.0);
        assert_eq!(c.l_visible_in, vec![Stripe::S1, Stripe::S4]);
        assert_eq!(c.l_pi_visible_in, vec![Stripe::S2, Stripe::S3]);
        assert_eq!(
            constant_branches(&AffineVectorField3::constant([1.0, 0.0, 0.0])).unwrap_err(),
            Error::WfhViolation
        );
    }

    #[test]
    fn affine_branch_stability_and_monotonicity() {
        let f1 = AffineVectorField3::axial([1.0, 0.0, 1.0], [-1.0, 1.0, 0.0]);
        let (a, _) = affine_branches(&f1).unwrap();
        assert_eq!(a.stability, LayerStability::Attractor);
        assert!(matches!(
            a.kind,
            BranchKind::Arctan {
                increasing: true,
                ..
            }
        ));
        let f4 = AffineVectorField3::axial([-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]);
        let (a, _) = affine_branches(&f4).unwrap();
        assert_eq!(a.stability, LayerStability::Repellor);
        assert!(matches!(
            a.kind,
            BranchKind::Arctan {
                increasing: false,
                ..
            }
        ));
    }

    #[test]
    fn slow_cycle_s1_segment() {
        let sys = slow_cycle_system();
        let (a, api) = affine_branches(&sys.fields[0]).unwrap();
        assert_eq!(a.crosses(Stripe::S1), None);
        assert_eq!(api.crosses(Stripe::S1), Some((0.0, 1.0)));
        assert_eq!(api.theta_at(0.0), 0.0);
        assert_eq!(api.theta_at(1.0), FRAC_PI_2);
    }

    #[test]
    fn branch_matches_root_finder() {
        let sys = slow_cycle_system();
        for stripe in Stripe::ALL {
            let (a, b) = affine_branches(sys.stripe_field(stripe)).unwrap();
            for k in 0..200 {
                let x = -10.0 + 0.1 * k as f64;
                let roots = solve_branch_theta(&sys, stripe, x).roots;
                for t in [a.theta_at(x), b.theta_at(x)] {
                    if stripe.contains(t) {
                        assert!(
                            roots
                                .iter()
                                .any(|r| crate::angle::wrap_diff(*r, t).abs() < 1e-9),
                            "{stripe} x={x}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn partner_is_pi_translate() {
        let f = AffineVectorField3::axial([0.3, 1.2, -0.7], [0.0, -0.4, 2.0]);
        let (a, b) = affine_branches(&f).unwrap();
        assert_eq!(
            a.partner(),
            SlowManifoldBranch {
                label: BranchLabel::APi,
                ..b
            }
        );
        for k in 0..50 {
            let x = -5.0 + 0.2 * k as f64;
            assert!(
                (crate::angle::wrap_diff(b.theta_at(x), a.theta_at(x)).abs() - PI).abs() < 1e-12
            );
        }
    }

    #[test]
    fn segments_of_monotone_branch() {
        let sys = slow_cycle_system();
        let (_, api) = affine_branches(&sys.fields[0]).unwrap();
        assert_eq!(api.segments_in(Stripe::S1), vec![(0.0, 1.0)]);
        assert_eq!(api.segments_in(Stripe::S2), vec![(1.0, f64::INFINITY)]);
        assert_eq!(api.segments_in(Stripe::S4), vec![(f64::NEG_INFINITY, 0.0)]);
        assert!(api.segments_in(Stripe::S3).is_empty());
    }

    #[test]
    fn singularities_of_saddle_example() {
        let f4 = AffineVectorField3::axial([-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]);
        let f1 = AffineVectorField3::axial([1.0, 0.0, 1.0], [-1.0, 1.0, 0.0]);
        let sys = DoubleDiscontinuitySystem::new([f1, f1, f4, f4]);
        let p4 = stripe_singularity(&sys, Stripe::S4).unwrap();
        assert_eq!(p4.x, 1.0);
        assert!((p4.theta - 7.0 * FRAC_PI_4).abs() < 1e-15);
        assert_eq!(p4.kind, SingularityKind::Saddle);
        assert!(p4.lambda1 < 0.0 && p4.lambda2 > 0.0);
        let p1 = stripe_singularity(&sys, Stripe::S1).unwrap();
        assert_eq!(p1.x, 1.0);
        assert!((p1.theta - FRAC_PI_4).abs() < 1e-15);
        assert_eq!(p1.kind, SingularityKind::Saddle);
    }

    #[test]
    fn stable_node_on_attracting_branch() {
        let f = AffineVectorField3::axial([-1.0, 0.0, 1.0], [0.5, 1.0, 0.0]);
        let (a, _) = affine_branches(&f).unwrap();
        assert_eq!(a.stability, LayerStability::Attractor);
        assert_eq!(
            reduced_singularity(&f, &a).unwrap().kind,
            SingularityKind::StableNode
        );
        assert!(reduced_singularity(&f.with_axial(0, 0.0), &a).is_none());
    }

    #[test]
    fn singularity_on_vertical_asymptote() {
        // α = δ = 1: p(1) = 0, q(1) = 1, so P sits at θ = π/2 on A.
        let f = AffineVectorField3::axial([1.0, 1.0, 1.0], [-1.0, -1.0, 0.0]);
        let (a, b) = affine_branches(&f).unwrap();
        assert_eq!(reduced_singularity(&f, &a).unwrap().theta, FRAC_PI_2);
        assert_eq!(reduced_singularity(&f, &b).unwrap().theta, 1.5 * PI);
    }

    #[test]
    fn detects_the_slow_cycle() {
        let c = slow_cycle_detect(&slow_cycle_system()).expect("one cycle");
        assert!(c.closed);
        assert_eq!(c.segments.len(), 4);
        let s1 = c.segments[0];
        assert_eq!(s1.stripe, Stripe::S1);
        assert_eq!(s1.entry, (0.0, 0.0));
        assert_eq!(s1.exit, (1.0, FRAC_PI_2));
        assert_eq!(c.orientation, 1.0);
        assert!(c.segments.iter().all(|s| s.transport == Transport::Direct));
        assert!(c.return_residual < RETURN_TOL, "{}", c.return_residual);
    }

    #[test]
    fn no_cycle_for_constant_systems() {
        let sys =
            DoubleDiscontinuitySystem::new([AffineVectorField3::constant([1.0, 1.0, 1.0]); 4]);
        assert!(slow_cycle_detect(&sys).is_none());
    }

    #[test]
    fn no_cycle_when_asymptote_inside_stripe() {
        let mut sys = slow_cycle_system();
        // Asymptotes of S1's field become π/4 and 5π/4.
        sys.fields[0] = AffineVectorField3::axial([-1.0, 1.0, 1.0], [2.0, 1.0, 0.0]);
        assert!(sys.fields[0].gamma() != 0.0);
        assert!(slow_cycle_detect(&sys).is_none());
    }
}
