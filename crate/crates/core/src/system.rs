//! The four-quadrant system around the x-axis and the Filippov machinery on
//! its regular half-planes.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::angle::Stripe;
use crate::error::{Error, Result};
use crate::field::{AffineVectorField3, Vec3};
use crate::filippov::{sliding_combination, BoundaryClassification, BoundaryKind};

/// Absolute tolerance for "on a half-plane" and "on the x-axis".
pub const PLANE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quadrant {
    /// `y ≥ 0, z ≥ 0`
    Q1,
    /// `y ≤ 0, z ≥ 0`
    Q2,
    /// `y ≤ 0, z ≤ 0`
    Q3,
    /// `y ≥ 0, z ≤ 0`
    Q4,
}

impl Quadrant {
    pub const ALL: [Quadrant; 4] = [Quadrant::Q1, Quadrant::Q2, Quadrant::Q3, Quadrant::Q4];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Signs `(sy, sz)` of the quadrant's open interior.
    pub fn signs(self) -> (f64, f64) {
        match self {
            Quadrant::Q1 => (1.0, 1.0),
            Quadrant::Q2 => (-1.0, 1.0),
            Quadrant::Q3 => (-1.0, -1.0),
            Quadrant::Q4 => (1.0, -1.0),
        }
    }

    /// Closed-quadrant membership.
    pub fn contains(self, y: f64, z: f64) -> bool {
        let (sy, sz) = self.signs();
        sy * y >= 0.0 && sz * z >= 0.0
    }

    /// The quadrant containing `(y, z)`; points on a half-plane go to the
    /// lower-indexed neighbour.
    pub fn of(y: f64, z: f64) -> Quadrant {
        Self::ALL
            .into_iter()
            .find(|q| q.contains(y, z))
            .unwrap_or(Quadrant::Q1)
    }

    pub fn stripe(self) -> Stripe {
        Stripe::from_index(self.index())
    }
}

/// The four regular half-planes of the switching manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HalfPlane {
    /// `y = 0, z > 0`
    S12,
    /// `z = 0, y < 0`
    S23,
    /// `y = 0, z < 0`
    S34,
    /// `z = 0, y > 0`
    S14,
}

impl HalfPlane {
    pub const ALL: [HalfPlane; 4] = [
        HalfPlane::S12,
        HalfPlane::S23,
        HalfPlane::S34,
        HalfPlane::S14,
    ];

    /// Coordinate index of the defining function `h` (1 for `y`, 2 for `z`).
    pub fn normal_axis(self) -> usize {
        match self {
            HalfPlane::S12 | HalfPlane::S34 => 1,
            HalfPlane::S14 | HalfPlane::S23 => 2,
        }
    }

    /// Index of the in-plane coordinate other than `x`.
    pub fn tangent_axis(self) -> usize {
        3 - self.normal_axis()
    }

    /// Required sign of the in-plane coordinate.
    pub fn tangent_sign(self) -> f64 {
        match self {
            HalfPlane::S12 | HalfPlane::S14 => 1.0,
            HalfPlane::S23 | HalfPlane::S34 => -1.0,
        }
    }

    /// Quadrant on the `h > 0` side.
    pub fn plus(self) -> Quadrant {
        match self {
            HalfPlane::S12 | HalfPlane::S14 => Quadrant::Q1,
            HalfPlane::S23 => Quadrant::Q2,
            HalfPlane::S34 => Quadrant::Q4,
        }
    }

    /// Quadrant on the `h < 0` side.
    pub fn minus(self) -> Quadrant {
        match self {
            HalfPlane::S12 => Quadrant::Q2,
            HalfPlane::S14 => Quadrant::Q4,
            HalfPlane::S23 | HalfPlane::S34 => Quadrant::Q3,
        }
    }

    pub fn h(self, v: &Vec3) -> f64 {
        v[self.normal_axis()]
    }

    /// Half-plane reached when coordinate `axis` hits zero with the other
    /// coordinate equal to `other`.
    pub fn at(axis: usize, other: f64) -> HalfPlane {
        match (axis, other >= 0.0) {
            (1, true) => HalfPlane::S12,
            (1, false) => HalfPlane::S34,
            (_, true) => HalfPlane::S14,
            (_, false) => HalfPlane::S23,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            HalfPlane::S12 => "12",
            HalfPlane::S23 => "23",
            HalfPlane::S34 => "34",
            HalfPlane::S14 => "14",
        }
    }

    pub fn parse(s: &str) -> Option<HalfPlane> {
        Self::ALL.into_iter().find(|h| h.label() == s.trim())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleDiscontinuitySystem {
    pub fields: [AffineVectorField3; 4],
}

impl DoubleDiscontinuitySystem {
    pub fn new(fields: [AffineVectorField3; 4]) -> Self {
        DoubleDiscontinuitySystem { fields }
    }

    pub fn field(&self, q: Quadrant) -> &AffineVectorField3 {
        &self.fields[q.index()]
    }

    pub fn stripe_field(&self, s: Stripe) -> &AffineVectorField3 {
        &self.fields[s.index()]
    }

    /// Field of the closed quadrant containing `v`.
    pub fn eval(&self, v: &Vec3) -> Vec3 {
        self.field(Quadrant::of(v[1], v[2])).eval(v)
    }

    pub fn classify_boundary_point(
        &self,
        hp: HalfPlane,
        v: &Vec3,
    ) -> Result<BoundaryClassification> {
        if v[hp.tangent_axis()].abs() <= PLANE_TOL {
            return Err(Error::PointOnSingularLine);
        }
        let k = hp.normal_axis();
        let lie_plus = self.field(hp.plus()).eval(v)[k];
        let lie_minus = self.field(hp.minus()).eval(v)[k];
        Ok(BoundaryClassification::new(lie_plus, lie_minus))
    }

    pub fn sliding_field(&self, hp: HalfPlane, v: &Vec3) -> Result<Vec3> {
        let c = self.classify_boundary_point(hp, v)?;
        if !matches!(c.kind, BoundaryKind::Sliding | BoundaryKind::Escaping) {
            return Err(Error::NotSlidingRegion);
        }
        let fp = self.field(hp.plus()).eval(v);
        let fm = self.field(hp.minus()).eval(v);
        let mut s = sliding_combination(&fp, &fm, c.lie_plus, c.lie_minus);
        s[hp.normal_axis()] = 0.0;
        Ok(s)
    }

    pub fn validate(&self) -> SystemDiagnostics {
        SystemDiagnostics {
            quadrants: Quadrant::ALL.map(|q| QuadrantDiagnostics::of(self.field(q))),
        }
    }
}

/// Where both transverse rates vanish on the x-axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "x", rename_all = "lowercase")]
pub enum WfhFailureSet {
    Empty,
    Point(f64),
    Everywhere,
}

impl WfhFailureSet {
    pub fn of(field: &AffineVectorField3) -> Self {
        let (p, q) = (field.p(), field.q());
        match (p.is_zero(), q.is_zero()) {
            (true, true) => WfhFailureSet::Everywhere,
            (true, false) => q.root().map_or(WfhFailureSet::Empty, WfhFailureSet::Point),
            (false, true) => p.root().map_or(WfhFailureSet::Empty, WfhFailureSet::Point),
            (false, false) => {
                if p.common_zero(&q) {
                    WfhFailureSet::Point(p.root().expect("non-constant"))
                } else {
                    WfhFailureSet::Empty
                }
            }
        }
    }

    pub fn holds_everywhere(&self) -> bool {
        *self == WfhFailureSet::Empty
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Constant,
    Affine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrantDiagnostics {
    pub kind: FieldKind,
    pub gamma: f64,
    pub sfh: bool,
    pub wfh_failures: WfhFailureSet,
}

impl QuadrantDiagnostics {
    fn of(field: &AffineVectorField3) -> Self {
        let gamma = field.gamma();
        QuadrantDiagnostics {
            kind: if field.is_constant() {
                FieldKind::Constant
            } else {
                FieldKind::Affine
            },
            gamma,
            sfh: gamma != 0.0,
            wfh_failures: WfhFailureSet::of(field),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemDiagnostics {
    pub quadrants: [QuadrantDiagnostics; 4],
}

impl SystemDiagnostics {
    pub fn wfh_everywhere(&self) -> bool {
        self.quadrants
            .iter()
            .all(|q| q.wfh_failures.holds_everywhere())
    }
}

// ---- system file ----

fn parse_number(v: &Value, path: &str) -> Result<f64> {
    let x = v.as_f64().ok_or_else(|| Error::Parse {
        path: path.to_string(),
        message: format!("expected a number, found {}", kind_name(v)),
    })?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::Parse {
            path: path.to_string(),
            message: "number is not finite".into(),
        })
    }
}

fn parse_triple(v: &Value, path: &str) -> Result<[f64; 3]> {
    let arr = v.as_array().ok_or_else(|| Error::Parse {
        path: path.to_string(),
        message: format!("expected an array of 3 numbers, found {}", kind_name(v)),
    })?;
    if arr.len() != 3 {
        return Err(Error::Parse {
            path: path.to_string(),
            message: format!("expected 3 entries, found {}", arr.len()),
        });
    }
    let mut out = [0.0; 3];
    for (k, e) in arr.iter().enumerate() {
        out[k] = parse_number(e, &format!("{path}[{k}]"))?;
    }
    Ok(out)
}

fn kind_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

fn parse_field(v: &Value, path: &str) -> Result<AffineVectorField3> {
    let obj = v.as_object().ok_or_else(|| Error::Parse {
        path: path.to_string(),
        message: format!(
            "expected an object with keys \"A\" and \"d\", found {}",
            kind_name(v)
        ),
    })?;
    let missing = |key: &str| Error::Parse {
        path: format!("{path}.{key}"),
        message: "missing entry".into(),
    };
    let a_val = obj.get("A").ok_or_else(|| missing("A"))?;
    let a_rows = a_val.as_array().ok_or_else(|| Error::Parse {
        path: format!("{path}.A"),
        message: format!("expected a 3x3 array, found {}", kind_name(a_val)),
    })?;
    if a_rows.len() != 3 {
        return Err(Error::Parse {
            path: format!("{path}.A"),
            message: format!("expected 3 rows, found {}", a_rows.len()),
        });
    }
    let mut a = [[0.0; 3]; 3];
    for (k, row) in a_rows.iter().enumerate() {
        a[k] = parse_triple(row, &format!("{path}.A[{k}]"))?;
    }
    let d = parse_triple(
        obj.get("d").ok_or_else(|| missing("d"))?,
        &format!("{path}.d"),
    )?;
    Ok(AffineVectorField3::new(a, d))
}

/// Parse the JSON system description `{"fields": [{"A": [[..],[..],[..]], "d": [..]}; 4]}`.
pub fn parse_system(text: &str) -> Result<DoubleDiscontinuitySystem> {
    let root: Value = serde_json::from_str(text).map_err(|e| Error::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let fields = root.get("fields").ok_or_else(|| Error::Parse {
        path: "fields".into(),
        message: "missing entry".into(),
    })?;
    let arr = fields.as_array().ok_or_else(|| Error::Parse {
        path: "fields".into(),
        message: format!("expected an array of 4 fields, found {}", kind_name(fields)),
    })?;
    if arr.len() != 4 {
        return Err(Error::Parse {
            path: "fields".into(),
            message: format!("expected 4 fields (F1..F4), found {}", arr.len()),
        });
    }
    let mut out = [AffineVectorField3::constant([0.0; 3]); 4];
    for (i, f) in arr.iter().enumerate() {
        out[i] = parse_field(f, &format!("fields[{i}]"))?;
    }
    Ok(DoubleDiscontinuitySystem::new(out))
}

#[derive(Serialize)]
struct FieldOut<'a> {
    #[serde(rename = "A")]
    a: &'a [[f64; 3]; 3],
    d: &'a [f64; 3],
}

#[derive(Serialize)]
struct SystemOut<'a> {
    fields: Vec<FieldOut<'a>>,
}

pub fn write_system(sys: &DoubleDiscontinuitySystem) -> String {
    let out = SystemOut {
        fields: sys
            .fields
            .iter()
            .map(|f| FieldOut { a: &f.a, d: &f.d })
            .collect(),
    };
    serde_json::to_string_pretty(&out).expect("plain data serializes")
}
