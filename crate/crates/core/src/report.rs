//! JSON reports. Angles carry 17 significant digits and, for multiples of
//! π/4, a symbolic tag. Output is deterministic for identical input.

use serde_json::{json, Map, Number, Value};

use crate::angle::{symbolic, Stripe};
use crate::closed_form::{
    affine_params, branches, constant_branches, slow_cycle_detect, stripe_singularity, visibility,
    BranchKind, SingularityClassification, SlowCycle, SlowManifoldBranch, Transport,
};
use crate::field::AffineVectorField3;
use crate::stability::StabilityReport;
use crate::system::{DoubleDiscontinuitySystem, Quadrant, WfhFailureSet};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Decimal rendering with 17 significant digits.
pub fn sig17(x: f64) -> String {
    if x == 0.0 {
        return "0.0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-5..=15).contains(&mag) {
        let decimals = (16 - mag).max(1) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.16e}")
    }
}

fn number(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    serde_json::from_str::<Number>(&sig17(x))
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// Symbolic tag of a signed angle, keeping the sign of small negatives (`-pi/4`).
pub fn angle_tag(theta: f64) -> Option<String> {
    if theta < 0.0 && theta > -std::f64::consts::PI {
        return symbolic(-theta).map(|t| format!("-{t}"));
    }
    if (0.0..std::f64::consts::TAU).contains(&theta) {
        return symbolic(theta).map(str::to_string);
    }
    None
}

pub fn angle_json(theta: f64) -> Value {
    if !theta.is_finite() {
        return Value::Null;
    }
    let mut m = Map::new();
    m.insert("rad".into(), number(theta));
    m.insert(
        "symbolic".into(),
        angle_tag(theta).map_or(Value::Null, Value::String),
    );
    Value::Object(m)
}

fn opt_number(x: Option<f64>) -> Value {
    x.map_or(Value::Null, number)
}

fn opt_angle(x: Option<f64>) -> Value {
    x.map_or(Value::Null, angle_json)
}

fn header(kind: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("format".into(), Value::String(format!("filicyl-{kind}")));
    m.insert("version".into(), Value::String(VERSION.into()));
    m
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report values serialize");
    s.push('\n');
    s
}

fn field_json(f: &AffineVectorField3) -> Value {
    json!({ "A": f.a, "d": f.d })
}

fn branch_json(branch: &SlowManifoldBranch, stripe: Stripe) -> Value {
    let mut m = Map::new();
    m.insert("label".into(), json!(branch.label.name()));
    m.insert(
        "stability".into(),
        serde_json::to_value(branch.stability).expect("enum"),
    );
    match branch.kind {
        BranchKind::Line { theta } => {
            m.insert("kind".into(), json!("line"));
            m.insert("theta".into(), angle_json(theta));
        }
        BranchKind::Arctan {
            asymptote_minus,
            asymptote_plus,
            increasing,
            split,
        } => {
            m.insert("kind".into(), json!("arctan"));
            m.insert("increasing".into(), json!(increasing));
            m.insert("asymptote_minus_inf".into(), angle_json(asymptote_minus));
            m.insert("asymptote_plus_inf".into(), angle_json(asymptote_plus));
            m.insert("split".into(), opt_number(split));
        }
    }
    let stripes: Vec<&str> = visibility(branch).iter().map(|s| s.label()).collect();
    m.insert("visible_in".into(), json!(stripes));
    let segments: Vec<Value> = branch
        .segments_in(stripe)
        .into_iter()
        .map(|(a, b)| {
            let theta_at = |x: f64| {
                if x.is_finite() {
                    branch.theta_at(x)
                } else {
                    f64::NAN
                }
            };
            json!({
                "x_from": number(a),
                "x_to": number(b),
                "theta_from": angle_json(theta_at(a)),
                "theta_to": angle_json(theta_at(b)),
            })
        })
        .collect();
    m.insert("segments_in_stripe".into(), Value::Array(segments));
    Value::Object(m)
}

fn singularity_json(p: &SingularityClassification) -> Value {
    json!({
        "x": number(p.x),
        "theta": angle_json(p.theta),
        "lambda1": number(p.lambda1),
        "lambda2": number(p.lambda2),
        "kind": serde_json::to_value(p.kind).expect("enum"),
        "branch": p.branch.name(),
    })
}

fn wfh_json(w: &WfhFailureSet) -> Value {
    match w {
        WfhFailureSet::Empty => json!({ "holds": true, "failure": "none" }),
        WfhFailureSet::Point(x) => json!({ "holds": false, "failure": "point", "x": number(*x) }),
        WfhFailureSet::Everywhere => json!({ "holds": false, "failure": "everywhere" }),
    }
}

fn stripe_json(sys: &DoubleDiscontinuitySystem, stripe: Stripe) -> Value {
    let field = sys.stripe_field(stripe);
    let wfh = WfhFailureSet::of(field);
    let gamma = field.gamma();
    let mut m = Map::new();
    m.insert("stripe".into(), json!(stripe.label()));
    m.insert("quadrant".into(), json!(format!("Q{}", stripe.index() + 1)));
    m.insert("field".into(), field_json(field));
    let constant = field.is_constant_on_axis();
    m.insert(
        "class".into(),
        json!(if constant { "constant" } else { "affine" }),
    );
    m.insert("wfh".into(), wfh_json(&wfh));
    m.insert("sfh".into(), json!(gamma != 0.0));
    m.insert("gamma".into(), number(gamma));
    if constant {
        if let Ok(c) = constant_branches(field) {
            m.insert("theta_i".into(), angle_json(c.theta_i));
        }
    } else if let Ok(p) = affine_params(field) {
        m.insert(
            "params".into(),
            json!({
                "alpha": opt_number(p.alpha),
                "beta": opt_angle(p.beta),
                "gamma": number(p.gamma),
                "delta": opt_number(p.delta),
                "sigma_plus": opt_angle(p.sigma_plus),
                "sigma_minus": opt_angle(p.sigma_minus),
            }),
        );
    }
    let (list, visible) = match branches(field) {
        Ok((a, b)) if wfh != WfhFailureSet::Everywhere => {
            let visible = !a.segments_in(stripe).is_empty() || !b.segments_in(stripe).is_empty();
            (
                vec![branch_json(&a, stripe), branch_json(&b, stripe)],
                visible,
            )
        }
        _ => (Vec::new(), false),
    };
    m.insert("branches".into(), Value::Array(list));
    m.insert("manifold_visible".into(), json!(visible));
    m.insert(
        "reduced_flow".into(),
        json!({ "slope": number(field.a[0][0]), "offset": number(field.d[0]) }),
    );
    m.insert(
        "singularity".into(),
        stripe_singularity(sys, stripe)
            .as_ref()
            .map_or(Value::Null, singularity_json),
    );
    Value::Object(m)
}

fn cycle_json(c: &SlowCycle) -> Value {
    let segs: Vec<Value> = c
        .segments
        .iter()
        .map(|s| {
            let transport = match s.transport {
                Transport::Direct => json!({ "kind": "direct" }),
                Transport::Sliding { from, to } => {
                    json!({ "kind": "sliding", "from": number(from), "to": number(to) })
                }
            };
            json!({
                "stripe": s.stripe.label(),
                "branch": s.branch.name(),
                "stability": serde_json::to_value(s.stability).expect("enum"),
                "entry": { "x": number(s.entry.0), "theta": angle_json(s.entry.1) },
                "exit": { "x": number(s.exit.0), "theta": angle_json(s.exit.1) },
                "transport_in": transport,
            })
        })
        .collect();
    json!({
        "closed": c.closed,
        "orientation": if c.orientation > 0.0 { "increasing-theta" } else { "decreasing-theta" },
        "segments": segs,
        "return_residual": number(c.return_residual),
        "confirmed": c.return_residual < crate::closed_form::RETURN_TOL,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub json: Value,
    pub wfh_everywhere: bool,
}

/// Per-stripe closed-form analysis plus the slow-cycle record.
pub fn analysis_report(sys: &DoubleDiscontinuitySystem) -> Analysis {
    let wfh_everywhere = Quadrant::ALL
        .iter()
        .all(|q| WfhFailureSet::of(sys.field(*q)).holds_everywhere());
    let mut m = header("analysis");
    m.insert("wfh_everywhere".into(), json!(wfh_everywhere));
    m.insert(
        "stripes".into(),
        Value::Array(Stripe::ALL.iter().map(|s| stripe_json(sys, *s)).collect()),
    );
    let cycles: Vec<Value> = slow_cycle_detect(sys).iter().map(cycle_json).collect();
    m.insert("slow_cycles".into(), Value::Array(cycles));
    Analysis {
        json: Value::Object(m),
        wfh_everywhere,
    }
}

pub fn stability_json(r: &StabilityReport) -> Value {
    let mut m = header("stability");
    let ctx = &r.context;
    m.insert("theta0".into(), angle_json(ctx.theta0.value()));
    m.insert("below".into(), json!(ctx.below.label()));
    m.insert("above".into(), json!(ctx.above.label()));
    m.insert("K".into(), json!({ "x_min": number(ctx.x_min), "x_max": number(ctx.x_max), "delta": number(ctx.delta) }));
    m.insert("class".into(), serde_json::to_value(r.class).expect("enum"));
    m.insert(
        "verdict".into(),
        serde_json::to_value(r.verdict).expect("enum"),
    );
    m.insert("summary".into(), json!(r.one_line()));
    m.insert(
        "ledger".into(),
        serde_json::to_value(&r.ledger).expect("ledger serializes"),
    );
    Value::Object(m)
}
