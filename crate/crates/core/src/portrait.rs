//! Static SVG and CSV renderings of the `r = 0` cylinder: `x` runs left to
//! right, `θ` bottom to top with `S1` at the bottom.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::angle::Stripe;
use crate::blowup::{cylinder_grid, field_rates};
use crate::closed_form::{
    branches, slow_cycle_detect, stripe_singularity, BranchKind, SlowManifoldBranch,
};
use crate::error::{Error, Result};
use crate::system::{DoubleDiscontinuitySystem, WfhFailureSet};

pub const GRID_MIN: usize = 16;
pub const GRID_MAX: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortraitOptions {
    pub x_min: f64,
    pub x_max: f64,
    /// Samples per polyline, and the basis of the arrow lattice.
    pub grid: usize,
    pub width: f64,
    pub height: f64,
}

impl Default for PortraitOptions {
    fn default() -> Self {
        PortraitOptions {
            x_min: -3.0,
            x_max: 3.0,
            grid: 200,
            width: 800.0,
            height: 800.0,
        }
    }
}

impl PortraitOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite() && self.x_min < self.x_max) {
            return Err(Error::InvalidArgument(
                "portrait x-range must satisfy x_min < x_max".into(),
            ));
        }
        if !(GRID_MIN..=GRID_MAX).contains(&self.grid) {
            return Err(Error::InvalidArgument(format!(
                "grid density must lie in [{GRID_MIN}, {GRID_MAX}]"
            )));
        }
        Ok(())
    }
}

const MARGIN: f64 = 40.0;

struct Frame {
    o: PortraitOptions,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.o.x_min) / (self.o.x_max - self.o.x_min) * self.o.width
    }

    fn py(&self, theta: f64) -> f64 {
        MARGIN + (1.0 - theta / TAU) * self.o.height
    }

    fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.o.grid;
        (0..n)
            .map(move |k| self.o.x_min + (self.o.x_max - self.o.x_min) * k as f64 / (n - 1) as f64)
    }
}

/// Polyline data with a new subpath wherever the angle wraps or leaves `keep`.
fn path_data(
    frame: &Frame,
    pts: impl Iterator<Item = (f64, f64)>,
    keep: impl Fn(f64, f64) -> bool,
) -> String {
    let mut d = String::new();
    let mut prev: Option<f64> = None;
    for (x, t) in pts {
        if !t.is_finite() || !keep(x, t) {
            prev = None;
            continue;
        }
        let jump = prev.is_none_or(|p| (p - t).abs() > std::f64::consts::PI);
        let cmd = if jump { 'M' } else { 'L' };
        let _ = write!(d, "{cmd}{:.3},{:.3} ", frame.px(x), frame.py(t));
        prev = Some(t);
    }
    d.trim_end().to_string()
}

/// Angle lifted into the stripe's own interval, so `θ = 0` at the top of `S4` plots at `2π`.
fn lift(stripe: Stripe, theta: f64) -> f64 {
    if stripe == Stripe::S4 && theta < std::f64::consts::FRAC_PI_2 {
        theta + TAU
    } else {
        theta
    }
}

fn branch_points<'a>(
    frame: &'a Frame,
    b: &'a SlowManifoldBranch,
) -> impl Iterator<Item = (f64, f64)> + 'a {
    frame.xs().map(move |x| (x, b.theta_at(x)))
}

pub fn render_svg(sys: &DoubleDiscontinuitySystem, opts: &PortraitOptions) -> Result<String> {
    opts.validate()?;
    let frame = Frame { o: *opts };
    let (w, h) = (opts.width + 2.0 * MARGIN, opts.height + 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    s.push_str("<style>.stripe{stroke:#999;stroke-width:0.5}.branch{fill:none;stroke:#c00;stroke-width:2}.branch-ghost{fill:none;stroke:#c00;stroke-width:0.6;stroke-dasharray:4 3;opacity:0.5}.cycle{fill:none;stroke:#06c;stroke-width:3;opacity:0.7}.layer-arrow{stroke:#444;stroke-width:0.8}.singularity{fill:#000}.cycle-point{fill:#06c}text{font:12px sans-serif}</style>\n");
    let fills = ["#fdf6e3", "#eef6ee", "#eef0fa", "#faeeee"];
    for stripe in Stripe::ALL {
        let (lo, hi) = stripe.interval();
        let (y0, y1) = (frame.py(hi), frame.py(lo));
        let _ = writeln!(
            s,
            r#"<rect class="stripe" data-stripe="{}" x="{MARGIN}" y="{y0:.3}" width="{}" height="{:.3}" fill="{}"/>"#,
            stripe.label(),
            opts.width,
            y1 - y0,
            fills[stripe.index()]
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.3}" y="{:.3}">{}</text>"#,
            4.0,
            0.5 * (y0 + y1),
            stripe.label()
        );
    }
    // Layer field arrows, each stripe with its own field.
    let cols = (opts.grid / 8).clamp(8, 40);
    let rows = 4;
    for stripe in Stripe::ALL {
        let field = sys.stripe_field(stripe);
        let (lo, hi) = stripe.interval();
        for i in 0..cols {
            let x = opts.x_min + (opts.x_max - opts.x_min) * (i as f64 + 0.5) / cols as f64;
            for j in 0..rows {
                let t = lo + (hi - lo) * (j as f64 + 0.5) / rows as f64;
                let f = field_rates(field, x, t, 0.0).theta_rate;
                if f == 0.0 {
                    continue;
                }
                let len = 0.25 * opts.height / 4.0 / rows as f64 * f.signum();
                let (ax, ay) = (frame.px(x), frame.py(t));
                let _ = writeln!(
                    s,
                    r#"<line class="layer-arrow" x1="{ax:.3}" y1="{:.3}" x2="{ax:.3}" y2="{:.3}"/>"#,
                    ay + len,
                    ay - len
                );
                let tip = ay - len;
                let back = 0.35 * len;
                let _ = writeln!(
                    s,
                    r#"<path class="layer-arrow" d="M{:.3},{:.3} L{ax:.3},{tip:.3} L{:.3},{:.3}"/>"#,
                    ax - 3.0,
                    tip + back,
                    ax + 3.0,
                    tip + back
                );
            }
        }
    }
    for stripe in Stripe::ALL {
        let field = sys.stripe_field(stripe);
        if WfhFailureSet::of(field) == WfhFailureSet::Everywhere {
            continue;
        }
        let Ok((a, b)) = branches(field) else {
            continue;
        };
        for br in [a, b] {
            let d = path_data(&frame, branch_points(&frame, &br), |_, _| true);
            if !d.is_empty() {
                let _ = writeln!(
                    s,
                    r#"<path class="branch-ghost" data-stripe="{}" data-branch="{}" d="{d}"/>"#,
                    stripe.label(),
                    br.label.name()
                );
            }
            if br.segments_in(stripe).is_empty() {
                continue;
            }
            let pts = branch_points(&frame, &br).map(|(x, t)| (x, lift(stripe, t)));
            let d = match br.kind {
                BranchKind::Line { theta } => {
                    let t = lift(stripe, theta);
                    format!(
                        "M{:.3},{:.3} L{:.3},{:.3}",
                        frame.px(opts.x_min),
                        frame.py(t),
                        frame.px(opts.x_max),
                        frame.py(t)
                    )
                }
                BranchKind::Arctan { .. } => {
                    let segs = br.segments_in(stripe);
                    path_data(&frame, pts, |x, _| {
                        segs.iter().any(|&(lo, hi)| x >= lo && x <= hi)
                    })
                }
            };
            if !d.is_empty() {
                let _ = writeln!(
                    s,
                    r#"<path class="branch" data-stripe="{}" data-branch="{}" d="{d}"/>"#,
                    stripe.label(),
                    br.label.name()
                );
            }
        }
        if let Some(p) = stripe_singularity(sys, stripe) {
            if p.x >= opts.x_min && p.x <= opts.x_max {
                let _ = writeln!(
                    s,
                    r#"<circle class="singularity" data-kind="{}" cx="{:.3}" cy="{:.3}" r="4"/>"#,
                    serde_json::to_value(p.kind)
                        .expect("enum")
                        .as_str()
                        .unwrap_or(""),
                    frame.px(p.x),
                    frame.py(lift(stripe, p.theta))
                );
            }
        }
    }
    if let Some(cycle) = slow_cycle_detect(sys) {
        let mut d = String::new();
        for seg in &cycle.segments {
            let field = sys.stripe_field(seg.stripe);
            let Ok((a, b)) = branches(field) else {
                continue;
            };
            let br = if a.label == seg.branch { a } else { b };
            let (x0, x1) = (seg.entry.0, seg.exit.0);
            let n = opts.grid;
            for k in 0..n {
                let x = x0 + (x1 - x0) * k as f64 / (n - 1) as f64;
                let t = lift(seg.stripe, br.theta_at(x));
                let cmd = if k == 0 && (d.is_empty() || seg.stripe == Stripe::S1) {
                    'M'
                } else {
                    'L'
                };
                let _ = write!(d, "{cmd}{:.3},{:.3} ", frame.px(x), frame.py(t));
            }
        }
        let _ = writeln!(
            s,
            r#"<path class="cycle" data-closed="{}" d="{}"/>"#,
            cycle.closed,
            d.trim_end()
        );
        for seg in &cycle.segments {
            for (x, t, name) in [
                (seg.entry.0, seg.entry.1, "R"),
                (seg.exit.0, seg.exit.1, "Q"),
            ] {
                let _ = writeln!(
                    s,
                    r#"<circle class="cycle-point" data-label="{name}{}" cx="{:.3}" cy="{:.3}" r="3"/>"#,
                    seg.stripe.index() + 1,
                    frame.px(x),
                    frame.py(lift(seg.stripe, t))
                );
            }
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Raw `r = 0` grid: one row per sample of each stripe's induced field.
pub fn render_csv(sys: &DoubleDiscontinuitySystem, opts: &PortraitOptions) -> Result<String> {
    opts.validate()?;
    let mut s = String::from("stripe,x,theta,x_rate,theta_rate,radial_rate\n");
    for row in cylinder_grid(sys, opts.x_min, opts.x_max, opts.grid) {
        let _ = writeln!(
            s,
            "{},{:e},{:e},{:e},{:e},{:e}",
            row.stripe.label(),
            row.x,
            row.theta,
            row.x_rate,
            row.theta_rate,
            row.radial_rate
        );
    }
    Ok(s)
}
