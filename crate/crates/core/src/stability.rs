//! Semi-local structural stability around one stripe border `Σ_θ₀`, using
//! the planar Filippov system `X_i = (w_i, f_i)` on the `r = 0` cylinder.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::angle::{wrap_diff, BoundaryAngle, Stripe};
use crate::blowup::{field_rates, CylinderPoint};
use crate::closed_form::{
    branches, stripe_singularity, SingularityClassification, SingularityKind,
};
use crate::error::{Error, Result};
use crate::field::{Affine1, AffineVectorField3};
use crate::filippov::BoundaryKind;
use crate::simulator::{
    classify_stripe_boundary, integrate_cylinder, EventKind, IntegratorOptions,
};
use crate::system::DoubleDiscontinuitySystem;

pub const CONNECTION_TOL: f64 = 1e-8;

/// A border `Σ_θ₀` with the stripes on either side and a compact
/// `K = [x_min, x_max] × [θ₀ − Δ, θ₀ + Δ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryContext {
    pub theta0: BoundaryAngle,
    /// `C₋`, the stripe below `θ₀`.
    pub below: Stripe,
    /// `C₊`.
    pub above: Stripe,
    pub x_min: f64,
    pub x_max: f64,
    pub delta: f64,
}

impl BoundaryContext {
    pub fn new(theta0: BoundaryAngle, x_min: f64, x_max: f64, delta: f64) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && x_min < x_max) {
            return Err(Error::InvalidArgument(format!(
                "K needs x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if !(delta > 0.0 && delta <= FRAC_PI_2) {
            return Err(Error::InvalidArgument(format!(
                "K needs 0 < delta <= pi/2, got {delta}"
            )));
        }
        Ok(BoundaryContext {
            theta0,
            below: theta0.below(),
            above: theta0.above(),
            x_min,
            x_max,
            delta,
        })
    }

    pub fn with_default_k(theta0: BoundaryAngle) -> Self {
        Self::new(theta0, -10.0, 10.0, std::f64::consts::FRAC_PI_4).expect("default K is valid")
    }

    pub fn contains_x(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    pub fn contains(&self, x: f64, theta: f64) -> bool {
        self.contains_x(x) && wrap_diff(theta, self.theta0.value()).abs() <= self.delta
    }
}

/// `X(x, θ) = (w(x), f(x, θ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarField {
    pub field: AffineVectorField3,
}

impl PlanarField {
    pub fn eval(&self, x: f64, theta: f64) -> (f64, f64) {
        let r = field_rates(&self.field, x, theta, 0.0);
        (r.x_dot, r.theta_rate)
    }
}

/// `(X₋, X₊)` for the stripes below and above `θ₀`.
pub fn boundary_planar_fields(
    sys: &DoubleDiscontinuitySystem,
    ctx: &BoundaryContext,
) -> (PlanarField, PlanarField) {
    (
        PlanarField {
            field: *sys.stripe_field(ctx.below),
        },
        PlanarField {
            field: *sys.stripe_field(ctx.above),
        },
    )
}

/// `f(x, θ₀)` as an exact affine function of `x`.
pub fn boundary_lie(field: &AffineVectorField3, theta0: BoundaryAngle) -> Affine1 {
    match theta0 {
        BoundaryAngle::Zero => field.q(),
        BoundaryAngle::HalfPi => field.p().neg(),
        BoundaryAngle::Pi => field.q().neg(),
        BoundaryAngle::ThreeHalfPi => field.p(),
    }
}

/// `c2·x² + c1·x + c0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadratic {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl Quadratic {
    pub fn product(a: Affine1, b: Affine1) -> Self {
        Quadratic {
            c2: a.slope * b.slope,
            c1: a.slope * b.offset + a.offset * b.slope,
            c0: a.offset * b.offset,
        }
    }

    pub fn minus(self, o: Quadratic) -> Self {
        Quadratic {
            c2: self.c2 - o.c2,
            c1: self.c1 - o.c1,
            c0: self.c0 - o.c0,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.c2 * x + self.c1) * x + self.c0
    }

    pub fn is_zero(&self) -> bool {
        self.c2 == 0.0 && self.c1 == 0.0 && self.c0 == 0.0
    }

    /// Real roots in increasing order (a double root is listed once).
    pub fn roots(&self) -> Vec<f64> {
        let (a, b, c) = (self.c2, self.c1, self.c0);
        if a == 0.0 {
            return if b == 0.0 { Vec::new() } else { vec![-c / b] };
        }
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            return Vec::new();
        }
        if disc == 0.0 {
            return vec![-b / (2.0 * a)];
        }
        let q = -0.5 * (b + b.signum_or_one() * disc.sqrt());
        let (r1, r2) = (q / a, c / q);
        vec![r1.min(r2), r1.max(r2)]
    }
}

trait SignumOrOne {
    fn signum_or_one(self) -> f64;
}

impl SignumOrOne for f64 {
    fn signum_or_one(self) -> f64 {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "roots", rename_all = "kebab-case")]
pub enum ColinearityLocus {
    IdenticallyZero,
    Roots(Vec<f64>),
}

/// `D(x) = w₊·f₋(x, θ₀) − w₋·f₊(x, θ₀)`.
pub fn colinearity_polynomial(sys: &DoubleDiscontinuitySystem, ctx: &BoundaryContext) -> Quadratic {
    let fm = sys.stripe_field(ctx.below);
    let fp = sys.stripe_field(ctx.above);
    Quadratic::product(fp.w(), boundary_lie(fm, ctx.theta0))
        .minus(Quadratic::product(fm.w(), boundary_lie(fp, ctx.theta0)))
}

pub fn colinearity_locus(
    sys: &DoubleDiscontinuitySystem,
    ctx: &BoundaryContext,
) -> ColinearityLocus {
    let d = colinearity_polynomial(sys, ctx);
    if d.is_zero() {
        ColinearityLocus::IdenticallyZero
    } else {
        ColinearityLocus::Roots(d.roots())
    }
}

// ---------------------------------------------------------------- ledger ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "clause-1")]
    Clause1,
    #[serde(rename = "clause-2")]
    Clause2,
    #[serde(rename = "C.4")]
    C4,
    #[serde(rename = "C.5")]
    C5,
    #[serde(rename = "C.6")]
    C6,
    #[serde(rename = "C.7")]
    C7,
    #[serde(rename = "C.8")]
    C8,
    #[serde(rename = "C.9")]
    C9,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::Clause1 => "clause-1",
            Condition::Clause2 => "clause-2",
            Condition::C4 => "C.4",
            Condition::C5 => "C.5",
            Condition::C6 => "C.6",
            Condition::C7 => "C.7",
            Condition::C8 => "C.8",
            Condition::C9 => "C.9",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotChecked,
    /// A numeric sweep could not settle the condition.
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    NumericSweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Below,
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ManifoldKind {
    Slow,
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparatrixEndpoint {
    pub stripe: Stripe,
    pub manifold: ManifoldKind,
    pub stable: bool,
    pub x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Connection {
    pub x: f64,
    pub unstable: SeparatrixEndpoint,
    pub stable: SeparatrixEndpoint,
    pub boundary: BoundaryKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    Colinearity { locus: ColinearityLocus },
    Points { x: Vec<f64> },
    Singularity { x: f64, theta: f64 },
    Connections { connections: Vec<Connection> },
    Sweep { summary: SweepSummary },
    Coefficients { d: [f64; 3] },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub condition: Condition,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<Side>,
    pub status: Status,
    /// Whether this entry counts toward the verdict.
    pub required: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl LedgerEntry {
    fn new(condition: Condition, status: Status) -> Self {
        LedgerEntry {
            condition,
            side: None,
            status,
            required: true,
            method: None,
            witness: None,
            note: String::new(),
        }
    }

    fn exact(mut self) -> Self {
        self.method = Some(Method::Exact);
        self
    }

    fn side(mut self, side: Side) -> Self {
        self.side = Some(side);
        self
    }

    fn witness(mut self, w: Witness) -> Self {
        self.witness = Some(w);
        self
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    fn optional(mut self) -> Self {
        self.required = false;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldClass {
    Constant,
    Affine,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub context: BoundaryContext,
    pub class: FieldClass,
    pub verdict: Verdict,
    pub ledger: Vec<LedgerEntry>,
}

impl StabilityReport {
    fn from_ledger(context: BoundaryContext, class: FieldClass, ledger: Vec<LedgerEntry>) -> Self {
        let required = || ledger.iter().filter(|e| e.required);
        let verdict = if required().any(|e| e.status == Status::Fail) {
            Verdict::Unstable
        } else if required().any(|e| e.status == Status::Inconclusive) {
            Verdict::Undecided
        } else {
            Verdict::Stable
        };
        StabilityReport {
            context,
            class,
            verdict,
            ledger,
        }
    }

    pub fn entry(&self, c: Condition) -> Option<&LedgerEntry> {
        self.ledger.iter().find(|e| e.condition == c)
    }

    pub fn entries(&self, c: Condition) -> impl Iterator<Item = &LedgerEntry> {
        self.ledger.iter().filter(move |e| e.condition == c)
    }

    /// `"θ₀=pi/2 unstable (C.6 fail)"`-style summary.
    pub fn one_line(&self) -> String {
        let failed: Vec<&str> = self
            .ledger
            .iter()
            .filter(|e| e.required && e.status == Status::Fail)
            .map(|e| e.condition.label())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let verdict = match self.verdict {
            Verdict::Stable => "stable",
            Verdict::Unstable => "unstable",
            Verdict::Undecided => "undecided",
        };
        if failed.is_empty() {
            format!("theta0={} {verdict}", self.context.theta0.label())
        } else {
            format!(
                "theta0={} {verdict} ({} fail)",
                self.context.theta0.label(),
                failed.join(", ")
            )
        }
    }
}

// --------------------------------------------------------- constant class ----

fn line_on_border(d: [f64; 3], theta0: BoundaryAngle) -> bool {
    match theta0 {
        BoundaryAngle::Zero | BoundaryAngle::Pi => d[2] == 0.0,
        BoundaryAngle::HalfPi | BoundaryAngle::ThreeHalfPi => d[1] == 0.0,
    }
}

fn constant_side_entries(
    field: &AffineVectorField3,
    theta0: BoundaryAngle,
    side: Side,
) -> Vec<LedgerEntry> {
    let d = field.d;
    let clause1 = d[0] * d[1] * d[2] != 0.0;
    let clause2 = d[0] != 0.0 && d[1] * d[1] + d[2] * d[2] != 0.0 && !line_on_border(d, theta0);
    let status = |ok: bool| if ok { Status::Pass } else { Status::Fail };
    let mut e1 = LedgerEntry::new(Condition::Clause1, status(clause1))
        .exact()
        .side(side)
        .witness(Witness::Coefficients { d });
    let mut e2 = LedgerEntry::new(Condition::Clause2, status(clause2))
        .exact()
        .side(side);
    if clause1 {
        e2 = e2.optional();
    } else if clause2 {
        e1 = e1.optional().note("clause 2 holds on this side");
    } else {
        e2 = e2.optional();
    }
    vec![e1, e2]
}

fn c6_entry(sys: &DoubleDiscontinuitySystem, ctx: &BoundaryContext) -> LedgerEntry {
    let locus = colinearity_locus(sys, ctx);
    let status = if locus == ColinearityLocus::IdenticallyZero {
        Status::Fail
    } else {
        Status::Pass
    };
    LedgerEntry::new(Condition::C6, status)
        .exact()
        .witness(Witness::Colinearity { locus })
}

/// Verdict for two fields that are constant along the axis.
pub fn constant_stability_verdict(
    sys: &DoubleDiscontinuitySystem,
    ctx: &BoundaryContext,
) -> Result<StabilityReport> {
    for s in [ctx.below, ctx.above] {
        let f = sys.stripe_field(s);
        if !f.is_constant_on_axis() {
            return Err(Error::NotConstant(s));
        }
        if f.d[1] == 0.0 && f.d[2] == 0.0 {
            return Err(Error::WfhViolation);
        }
    }
    let mut ledger = constant_side_entries(sys.stripe_field(ctx.below), ctx.theta0, Side::Below);
    ledger.extend(constant_side_entries(
        sys.stripe_field(ctx.above),
        ctx.theta0,
        Side::Above,
    ));
    ledger.push(c6_entry(sys, ctx));
    for c in [
        Condition::C4,
        Condition::C5,
        Condition::C7,
        Condition::C8,
        Condition::C9,
    ] {
        ledger.push(
            LedgerEntry::new(c, Status::NotChecked)
                .optional()
                .note("implied by the clauses for this class"),
        );
    }
    Ok(StabilityReport::from_ledger(
        *ctx,
        FieldClass::Constant,
        ledger,
    ))
}

// ----------------------------------------------------------- affine class ----

/// Is the reduced singularity of `field` on the border? Exact in the coefficients.
fn singularity_on_border(field: &AffineVectorField3, theta0: BoundaryAngle) -> bool {
    let (a1, d1) = (field.a[0][0], field.d[0]);
    // q(δ) = 0 ⇔ a1·d3 − a3·d1 = 0, likewise for p.
    let k = match theta0 {
        BoundaryAngle::Zero | BoundaryAngle::Pi => 2,
        BoundaryAngle::HalfPi | BoundaryAngle::ThreeHalfPi => 1,
    };
    a1 * field.d[k] - field.a[k][0] * d1 == 0.0
}

fn affine_clause1(
    sys: &DoubleDiscontinuitySystem,
    stripe: Stripe,
    theta0: BoundaryAngle,
    side: Side,
) -> LedgerEntry {
    let field = sys.stripe_field(stripe);
    if field.a[0][0] == 0.0 {
        return LedgerEntry::new(Condition::Clause1, Status::Fail)
            .exact()
            .side(side)
            .note("a1 = 0: the reduced flow has no isolated zero");
    }
    if singularity_on_border(field, theta0) {
        let x = -field.d[0] / field.a[0][0];
        return LedgerEntry::new(Condition::Clause1, Status::Fail)
            .exact()
            .side(side)
            .witness(Witness::Singularity {
                x,
                theta: theta0.value(),
            })
            .note("the reduced singularity lies on the border");
    }
    LedgerEntry::new(Condition::Clause1, Status::Pass)
        .exact()
        .side(side)
}

fn in_k(ctx: &BoundaryContext, xs: Vec<f64>) -> Vec<f64> {
    xs.into_iter().filter(|x| ctx.contains_x(*x)).collect()
}

fn c4_entry(sys: &DoubleDiscontinuitySystem, ctx: &BoundaryContext) -> LedgerEntry {
    let mut zeros = Vec::new();
    for s in [ctx.below, ctx.above] {
        let f = sys.stripe_field(s);
        let (w, lie) = (f.w(), boundary_lie(f, ctx.theta0));
        if w.common_zero(&lie) {
            match w.root().or(lie.root()) {
                Some(x) => zeros.push(x),
                None => zeros.push(ctx.x_min),
            }
        }
    }
    let zeros = in_k(ctx, zeros);
    let status = if zeros.is_empty() {
        Status::Pass
    } else {
        Status::Fail
    };
    LedgerEntry::new(Condition::C4, status)
        .exact()
        .witness(Witness::Points { x: zeros })
}

fn c5_entry(sys: &DoubleDiscontinuitySystem, ctx: &BoundaryContext) -> LedgerEntry {
    let lm = boundary_lie(sys.stripe_field(ctx.below), ctx.theta0);
    let lp = boundary_lie(sys.stripe_field(ctx.above), ctx.theta0);
    if lm.is_zero() || lp.is_zero() {
        return LedgerEntry::new(Condition::C5, Status::Fail)
            .exact()
            .note("one side is tangent along the whole border");
    }
    let shared = if lm.common_zero(&lp) {
        in_k(ctx, lm.root().into_iter().collect())
    } else {
        Vec::new()
    };
    let status = if shared.is_empty() {
        Status::Pass
    } else {
        Status::Fail
    };
    LedgerEntry::new(Condition::C5, status)
        .exact()
        .witness(Witness::Points { x: shared })
}

/// Where the separatrices of saddles in the two adjacent stripes reach `θ₀`.
pub fn separatrix_endpoints(
    sys: &DoubleDiscontinuitySystem,
    ctx: &BoundaryContext,
) -> Vec<SeparatrixEndpoint> {
    let mut out = Vec::new();
    for stripe in [ctx.below, ctx.above] {
        let Some(p) = stripe_singularity(sys, stripe) else {
            continue;
        };
        if p.kind != SingularityKind::Saddle {
            continue;
        }
        out.push(SeparatrixEndpoint {
            stripe,
            manifold: ManifoldKind::Fast,
            stable: p.lambda2 < 0.0,
            x: p.x,
        });
        if let Some(x) = slow_separatrix_end(sys, stripe, ctx.theta0, &p) {
            out.push(SeparatrixEndpoint {
                stripe,
                manifold: ManifoldKind::Slow,
                stable: p.lambda1 < 0.0,
                x,
            });
        }
    }
    out.retain(|e| ctx.contains_x(e.x));
    out
}

fn slow_separatrix_end(
    sys: &DoubleDiscontinuitySystem,
    stripe: Stripe,
    theta0: BoundaryAngle,
    p: &SingularityClassification,
) -> Option<f64> {
    let (a, b) = branches(sys.stripe_field(stripe)).ok()?;
    let branch = if a.label == p.branch { a } else { b };
    let xb = branch.border_crossing(theta0)?;
    branch
        .segments_in(stripe)
        .into_iter()
        .find(|&(lo, hi)| lo <= p.x && p.x <= hi)
        .filter(|&(lo, hi)| lo == xb || hi == xb)
        .map(|_| xb)
}

/// Unstable separatrix of one stripe meeting a stable one of the other stripe on `θ₀`.
pub fn separatrix_connection_check(
    sys: &DoubleDiscontinuitySystem,
    ctx: &BoundaryContext,
) -> Vec<Connection> {
    let ends = separatrix_endpoints(sys, ctx);
    let mut out = Vec::new();
    for u in ends.iter().filter(|e| !e.stable) {
        for s in ends.iter().filter(|e| e.stable && e.stripe != u.stripe) {
            if (u.x - s.x).abs() > CONNECTION_TOL {
                continue;
            }
            let x = 0.5 * (u.x + s.x);
            let c = classify_stripe_boundary(sys, ctx.theta0, x, 0.0);
            let upward = u.stripe == ctx.below;
            let permitted = match c.kind {
                BoundaryKind::Crossing => (c.lie_plus > 0.0) == upward,
                BoundaryKind::Sliding | BoundaryKind::Tangency => true,
                BoundaryKind::Escaping => false,
            };
            if permitted {
                out.push(Connection {
                    x,
                    unstable: *u,
                    stable: *s,
                    boundary: c.kind,
                });
            }
        }
    }
    out.sort_by(|a, b| a.x.total_cmp(&b.x));
    out
}

fn c8_entry(sys: &DoubleDiscontinuitySystem, ctx: &BoundaryContext) -> LedgerEntry {
    let connections = separatrix_connection_check(sys, ctx);
    let status = if connections.is_empty() {
        Status::Pass
    } else {
        Status::Fail
    };
    LedgerEntry::new(Condition::C8, status)
        .exact()
        .witness(Witness::Connections { connections })
}

// ------------------------------------------------------------- sweeps ----

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepOutcome {
    Exited,
    Converged,
    Periodic,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Initial conditions per axis of K.
    pub grid: usize,
    /// Axial time scale of the planar flow, `x' = σ·w`.
    pub sigma: f64,
    /// Fast-time horizon in units of `1/σ`.
    pub horizon: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            grid: 5,
            sigma: 1e-3,
            horizon: 12.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub exited: usize,
    pub converged: usize,
    pub periodic: usize,
    pub inconclusive: usize,
    /// Border abscissas of detected closed orbits.
    pub periodic_x: Vec<f64>,
}

fn sweep_one(
    sys: &DoubleDiscontinuitySystem,
    ctx: &BoundaryContext,
    x: f64,
    theta: f64,
    opts: &SweepOptions,
    sinks: &[(f64, f64)],
) -> (SweepOutcome, Option<f64>) {
    let chunk = 0.5 / opts.sigma;
    let io = IntegratorOptions {
        rel_tol: 1e-9,
        abs_tol: 1e-11,
        slow_scale: opts.sigma,
        ..IntegratorOptions::default()
    }
    .with_t_end(chunk);
    let mut start = CylinderPoint::new(x, theta, 0.0);
    let mut events = Vec::new();
    let mut tail = [[x, theta, 0.0]; 2];
    let mut tail_dt = 0.0;
    let mut elapsed = 0.0;
    while elapsed < opts.horizon / opts.sigma {
        let Ok(traj) = integrate_cylinder(sys, start, &io) else {
            return (SweepOutcome::Inconclusive, None);
        };
        // Once outside K the orbit is of no further interest, and far from the
        // axis the layer dynamics grow stiff.
        if traj
            .samples
            .iter()
            .any(|s| !ctx.contains(s.state[0], s.state[1]))
            || traj.halted_by().is_some()
        {
            return (SweepOutcome::Exited, None);
        }
        events.extend(
            traj.events
                .iter()
                .map(|e| (e.surface.clone(), e.kind, e.state)),
        );
        let n = traj.samples.len();
        if n >= 2 {
            tail = [traj.samples[n - 2].state, traj.samples[n - 1].state];
            tail_dt = traj.samples[n - 1].t - traj.samples[n - 2].t;
        }
        let end = traj.last().state;
        start = CylinderPoint::new(end[0], end[1], end[2]);
        elapsed += chunk;
    }
    let end = tail[1];
    if sinks
        .iter()
        .any(|&(sx, st)| (end[0] - sx).abs() < 1e-3 && wrap_diff(end[1], st).abs() < 1e-3)
    {
        return (SweepOutcome::Converged, None);
    }
    let label = ctx.theta0.label();
    let crossings: Vec<(f64, f64)> = events
        .iter()
        .filter(|(surface, kind, _)| {
            *surface == label && matches!(kind, EventKind::StripeBoundary | EventKind::CycleReturn)
        })
        .map(|(_, _, state)| {
            (
                state[0],
                classify_stripe_boundary(sys, ctx.theta0, state[0], 0.0)
                    .lie_plus
                    .signum(),
            )
        })
        .collect();
    let same_dir: Vec<f64> = match crossings.last() {
        Some(&(_, dir)) => crossings
            .iter()
            .filter(|c| c.1 == dir)
            .map(|c| c.0)
            .collect(),
        None => Vec::new(),
    };
    if same_dir.len() >= 3 {
        let n = same_dir.len();
        if (same_dir[n - 1] - same_dir[n - 2]).abs() < 1e-6 {
            return (SweepOutcome::Periodic, Some(same_dir[n - 1]));
        }
    }
    // Slowly drifting along a sliding segment or attracting branch toward an
    // equilibrium of the planar system counts as convergence.
    if tail_dt > 0.0 {
        let (a, b) = (tail[0], tail[1]);
        let speed = ((b[0] - a[0]).powi(2) + wrap_diff(b[1], a[1]).powi(2)).sqrt() / tail_dt;
        if speed < 1e-3 * opts.sigma {
            return (SweepOutcome::Converged, None);
        }
    }
    (SweepOutcome::Inconclusive, None)
}

/// Integrates the planar Filippov system from a grid of starts in K.
pub fn sweep(
    sys: &DoubleDiscontinuitySystem,
    ctx: &BoundaryContext,
    opts: &SweepOptions,
) -> SweepSummary {
    let sinks: Vec<(f64, f64)> = [ctx.below, ctx.above]
        .iter()
        .filter_map(|s| stripe_singularity(sys, *s))
        .filter(|p| p.kind == SingularityKind::StableNode)
        .map(|p| (p.x, p.theta))
        .collect();
    let n = opts.grid.max(2);
    let mut summary = SweepSummary::default();
    for i in 0..n {
        let x = ctx.x_min + (ctx.x_max - ctx.x_min) * (i as f64 + 0.5) / n as f64;
        for j in 0..n {
            let theta =
                ctx.theta0.value() - ctx.delta + 2.0 * ctx.delta * (j as f64 + 0.5) / n as f64;
            let (outcome, px) = sweep_one(sys, ctx, x, theta, opts, &sinks);
            match outcome {
                SweepOutcome::Exited => summary.exited += 1,
                SweepOutcome::Converged => summary.converged += 1,
                SweepOutcome::Periodic => {
                    summary.periodic += 1;
                    if let Some(px) = px {
                        if !summary.periodic_x.iter().any(|q| (q - px).abs() < 1e-5) {
                            summary.periodic_x.push(px);
                        }
                    }
                }
                SweepOutcome::Inconclusive => summary.inconclusive += 1,
            }
        }
    }
    summary
}

fn sweep_entries(summary: &SweepSummary) -> [LedgerEntry; 2] {
    let numeric = |mut e: LedgerEntry| {
        e.method = Some(Method::NumericSweep);
        e
    };
    let c7 = if summary.periodic > 0 {
        // Closed orbits found by a finite sweep cannot be certified hyperbolic here.
        numeric(LedgerEntry::new(Condition::C7, Status::Inconclusive))
            .note("closed orbits found; hyperbolicity not certified")
    } else if summary.inconclusive > 0 {
        numeric(LedgerEntry::new(Condition::C7, Status::Inconclusive))
    } else {
        numeric(LedgerEntry::new(Condition::C7, Status::Pass)).note("no closed orbit met in K")
    };
    let c9 = if summary.inconclusive > 0 {
        numeric(LedgerEntry::new(Condition::C9, Status::Inconclusive))
            .note("some orbits neither left K nor settled")
    } else {
        numeric(LedgerEntry::new(Condition::C9, Status::Pass))
            .note("every sampled orbit left K or settled")
    };
    [
        c7.witness(Witness::Sweep {
            summary: summary.clone(),
        }),
        c9,
    ]
}

fn shared_entries(
    sys: &DoubleDiscontinuitySystem,
    ctx: &BoundaryContext,
    opts: &SweepOptions,
) -> Vec<LedgerEntry> {
    let mut ledger = vec![
        c4_entry(sys, ctx),
        c5_entry(sys, ctx),
        c6_entry(sys, ctx),
        c8_entry(sys, ctx),
    ];
    let decided_unstable = ledger.iter().any(|e| e.status == Status::Fail);
    if decided_unstable {
        for c in [Condition::C7, Condition::C9] {
            ledger.push(
                LedgerEntry::new(c, Status::NotChecked)
                    .optional()
                    .note("skipped: an exact condition already fails"),
            );
        }
    } else {
        ledger.extend(sweep_entries(&sweep(sys, ctx, opts)));
    }
    ledger
}

fn clause2_summary(ledger: &[LedgerEntry]) -> LedgerEntry {
    let parts = [Condition::C6, Condition::C7, Condition::C8, Condition::C9];
    let statuses: Vec<Status> = ledger
        .iter()
        .filter(|e| parts.contains(&e.condition))
        .map(|e| e.status)
        .collect();
    let status = if statuses.contains(&Status::Fail) {
        Status::Fail
    } else if statuses.contains(&Status::Inconclusive) {
        Status::Inconclusive
    } else if statuses.iter().all(|s| *s == Status::Pass) {
        Status::Pass
    } else {
        Status::NotChecked
    };
    LedgerEntry::new(Condition::Clause2, status)
        .optional()
        .note("conjunction of C.6 to C.9")
}

/// Verdict for two fields with non-constant axial restriction and `γ ≠ 0`.
pub fn affine_stability_verdict(
    sys: &DoubleDiscontinuitySystem,
    ctx: &BoundaryContext,
    opts: &SweepOptions,
) -> Result<StabilityReport> {
    for s in [ctx.below, ctx.above] {
        let f = sys.stripe_field(s);
        if f.is_constant_on_axis() {
            return Err(Error::NotAffine(s));
        }
        if f.gamma() == 0.0 {
            return Err(Error::SfhViolation(s));
        }
    }
    let mut ledger = vec![
        affine_clause1(sys, ctx.below, ctx.theta0, Side::Below),
        affine_clause1(sys, ctx.above, ctx.theta0, Side::Above),
    ];
    ledger.extend(shared_entries(sys, ctx, opts));
    ledger.push(clause2_summary(&ledger));
    Ok(StabilityReport::from_ledger(
        *ctx,
        FieldClass::Affine,
        ledger,
    ))
}

/// Routes each side by its class; a constant side next to an affine one gets
/// its own clause and the exact and numeric border conditions apply to both.
pub fn stability_verdict(
    sys: &DoubleDiscontinuitySystem,
    ctx: &BoundaryContext,
    opts: &SweepOptions,
) -> Result<StabilityReport> {
    let below_const = sys.stripe_field(ctx.below).is_constant_on_axis();
    let above_const = sys.stripe_field(ctx.above).is_constant_on_axis();
    match (below_const, above_const) {
        (true, true) => constant_stability_verdict(sys, ctx),
        (false, false) => affine_stability_verdict(sys, ctx, opts),
        _ => {
            let mut ledger = Vec::new();
            for (stripe, side, constant) in [
                (ctx.below, Side::Below, below_const),
                (ctx.above, Side::Above, above_const),
            ] {
                let f = sys.stripe_field(stripe);
                if constant {
                    if f.d[1] == 0.0 && f.d[2] == 0.0 {
                        return Err(Error::WfhViolation);
                    }
                    ledger.extend(constant_side_entries(f, ctx.theta0, side));
                } else {
                    if f.gamma() == 0.0 {
                        return Err(Error::SfhViolation(stripe));
                    }
                    ledger.push(affine_clause1(sys, stripe, ctx.theta0, side));
                }
            }
            ledger.extend(shared_entries(sys, ctx, opts));
            Ok(StabilityReport::from_ledger(
                *ctx,
                FieldClass::Mixed,
                ledger,
            ))
        }
    }
}

// --------------------------------------------------------- bifurcation ----

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseLine {
    /// Zero of `ẋ = a1·x + d1` and whether it attracts.
    pub singularity: Option<(f64, bool)>,
    /// Sign of `ẋ` when there is no zero.
    pub drift: f64,
}

impl PhaseLine {
    pub fn of(w: Affine1) -> Self {
        match w.root() {
            Some(x) => PhaseLine {
                singularity: Some((x, w.slope < 0.0)),
                drift: 0.0,
            },
            None => PhaseLine {
                singularity: None,
                drift: w.offset.signum(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BifurcationWitness {
    pub perturbed: AffineVectorField3,
    pub before: PhaseLine,
    pub after: PhaseLine,
}

/// Sets `a1 = η` on a field that is constant along the axis.
pub fn bifurcation_witness(field: &AffineVectorField3, eta: f64) -> Result<BifurcationWitness> {
    if eta == 0.0 || !eta.is_finite() {
        return Err(Error::InvalidArgument(
            "the perturbation eta must be nonzero".into(),
        ));
    }
    if !field.is_constant_on_axis() || field.d[0] == 0.0 {
        return Err(Error::InvalidArgument(
            "bifurcation witness needs an axially constant field with d1 != 0".into(),
        ));
    }
    let perturbed = field.with_axial(0, eta);
    Ok(BifurcationWitness {
        perturbed,
        before: PhaseLine::of(field.w()),
        after: PhaseLine::of(perturbed.w()),
    })
}
