//! Cylindrical blow-up of the x-axis: `(x, θ, r) ↦ (x, r cos θ, r sin θ)`,
//! the slow-fast systems it induces on the four stripes, and the slow manifold.

use serde::{Deserialize, Serialize};

use crate::angle::{normalize, BoundaryAngle, Stripe};
use crate::field::{AffineVectorField3, Vec3};
use crate::system::DoubleDiscontinuitySystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CylinderPoint {
    pub x: f64,
    pub theta: f64,
    pub r: f64,
}

impl CylinderPoint {
    pub fn new(x: f64, theta: f64, r: f64) -> Self {
        CylinderPoint {
            x,
            theta: normalize(theta),
            r,
        }
    }
}

pub fn phi1(x: f64, theta: f64, r: f64) -> Vec3 {
    let (s, c) = theta.sin_cos();
    [x, r * c, r * s]
}

pub fn phi1_inverse(v: &Vec3) -> CylinderPoint {
    let r = v[1].hypot(v[2]);
    let theta = if r == 0.0 {
        0.0
    } else {
        normalize(v[2].atan2(v[1]))
    };
    CylinderPoint { x: v[0], theta, r }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlowFastRates {
    /// `w`, the axial rate.
    pub x_dot: f64,
    /// `f = q cos θ − p sin θ`.
    pub theta_rate: f64,
    /// `g = p cos θ + q sin θ`.
    pub radial_rate: f64,
}

/// `sin θ, cos θ`, exact at the four boundary angles.
pub fn sin_cos(theta: f64) -> (f64, f64) {
    match BoundaryAngle::near(theta, 0.0) {
        Some(b)
            if b.value() == theta
                || (b == BoundaryAngle::Zero && theta == std::f64::consts::TAU) =>
        {
            let (c, s) = b.unit();
            (s, c)
        }
        _ => theta.sin_cos(),
    }
}

fn rotate(p: f64, q: f64, theta: f64) -> (f64, f64) {
    let (s, c) = sin_cos(theta);
    (q * c - p * s, p * c + q * s)
}

/// Rates of a single field at the blown-up point; `r = 0` evaluates on the axis exactly.
pub fn field_rates(field: &AffineVectorField3, x: f64, theta: f64, r: f64) -> SlowFastRates {
    let v = if r == 0.0 {
        [x, 0.0, 0.0]
    } else {
        phi1(x, theta, r)
    };
    let [w, p, q] = field.eval(&v);
    let (f, g) = rotate(p, q, theta);
    SlowFastRates {
        x_dot: w,
        theta_rate: f,
        radial_rate: g,
    }
}

pub fn induced_rates(
    sys: &DoubleDiscontinuitySystem,
    stripe: Stripe,
    x: f64,
    theta: f64,
    r: f64,
) -> SlowFastRates {
    field_rates(sys.stripe_field(stripe), x, theta, r)
}

/// Fast-time field `(r·w, f, r·g)`, regular at `r = 0`.
pub fn desingularized(field: &AffineVectorField3, x: f64, theta: f64, r: f64) -> Vec3 {
    let s = field_rates(field, x, theta, r);
    [r * s.x_dot, s.theta_rate, r * s.radial_rate]
}

pub fn desingularized_field(
    sys: &DoubleDiscontinuitySystem,
    stripe: Stripe,
    x: f64,
    theta: f64,
    r: f64,
) -> Vec3 {
    desingularized(sys.stripe_field(stripe), x, theta, r)
}

/// `p ≠ 0 or q ≠ 0` on the axis at `x`.
pub fn wfh_holds(field: &AffineVectorField3, x: f64) -> bool {
    field.p().eval(x) != 0.0 || field.q().eval(x) != 0.0
}

/// `q·p_x − p·q_x` on the axis; equals `−γ` for affine fields.
pub fn sfh_residual(field: &AffineVectorField3, x: f64) -> f64 {
    let (p, q) = (field.p(), field.q());
    q.eval(x) * p.slope - p.eval(x) * q.slope
}

pub fn sfh_holds(field: &AffineVectorField3) -> bool {
    field.gamma() != 0.0
}

/// `∂f/∂θ = −(q sin θ + p cos θ)` on the axis.
pub fn layer_eigenvalue_of(field: &AffineVectorField3, x: f64, theta: f64) -> f64 {
    let (p, q) = (field.p().eval(x), field.q().eval(x));
    let (s, c) = sin_cos(theta);
    -(q * s + p * c)
}

pub fn layer_eigenvalue(
    sys: &DoubleDiscontinuitySystem,
    stripe: Stripe,
    x: f64,
    theta: f64,
) -> f64 {
    layer_eigenvalue_of(sys.stripe_field(stripe), x, theta)
}

/// `f(x, θ)` on the axis; its zero set is the slow manifold.
pub fn manifold_residual_of(field: &AffineVectorField3, x: f64, theta: f64) -> f64 {
    let (p, q) = (field.p().eval(x), field.q().eval(x));
    rotate(p, q, theta).0
}

pub fn slow_manifold_residual(
    sys: &DoubleDiscontinuitySystem,
    stripe: Stripe,
    x: f64,
    theta: f64,
) -> f64 {
    manifold_residual_of(sys.stripe_field(stripe), x, theta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRoots {
    pub roots: Vec<f64>,
    /// Set when `p = q = 0` at this `x`: the residual vanishes for every θ.
    pub wfh_violation: bool,
}

const ROOT_TOL: f64 = 1e-12;
const SUBINTERVALS: usize = 8;

/// Slow-manifold angles inside the closed stripe at fixed `x`.
pub fn solve_branch_theta(sys: &DoubleDiscontinuitySystem, stripe: Stripe, x: f64) -> BranchRoots {
    let field = sys.stripe_field(stripe);
    if !wfh_holds(field, x) {
        return BranchRoots {
            roots: Vec::new(),
            wfh_violation: true,
        };
    }
    let f = |t: f64| manifold_residual_of(field, x, t);
    let (lo, hi) = stripe.interval();
    let mut roots: Vec<f64> = Vec::new();
    let push = |t: f64, roots: &mut Vec<f64>| {
        if !roots.iter().any(|r| (r - t).abs() < 1e-9) {
            roots.push(t);
        }
    };
    let width = (hi - lo) / SUBINTERVALS as f64;
    for k in 0..SUBINTERVALS {
        let a = lo + k as f64 * width;
        let b = if k + 1 == SUBINTERVALS { hi } else { a + width };
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            push(a, &mut roots);
        }
        if fb == 0.0 {
            push(b, &mut roots);
        }
        if fa * fb < 0.0 {
            push(bisect_polish(&f, a, b, fa, field, x), &mut roots);
        }
    }
    roots.sort_by(f64::total_cmp);
    BranchRoots {
        roots: roots
            .into_iter()
            .map(|t| if t >= std::f64::consts::TAU { 0.0 } else { t })
            .collect(),
        wfh_violation: false,
    }
}

fn bisect_polish<F: Fn(f64) -> f64>(
    f: &F,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    field: &AffineVectorField3,
    x: f64,
) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a) < 1e-15 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if fm.abs() < ROOT_TOL * 1e-2 {
            break;
        }
    }
    let m = 0.5 * (a + b);
    let d = layer_eigenvalue_of(field, x, m);
    if d != 0.0 {
        let n = m - f(m) / d;
        if n >= a && n <= b && f(n).abs() <= f(m).abs() {
            return n;
        }
    }
    m
}

/// Radial rate at slow-manifold samples of one stripe; `entering` is `ṙ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialEntry {
    pub x: f64,
    pub theta: f64,
    pub radial_rate: f64,
    pub entering: bool,
    pub wfh_violation: bool,
}

pub fn radial_entry_report(
    sys: &DoubleDiscontinuitySystem,
    stripe: Stripe,
    samples: &[(f64, f64)],
) -> Vec<RadialEntry> {
    samples
        .iter()
        .map(|&(x, theta)| {
            let field = sys.stripe_field(stripe);
            let g = field_rates(field, x, theta, 0.0).radial_rate;
            RadialEntry {
                x,
                theta,
                radial_rate: g,
                entering: g > 0.0,
                wfh_violation: !wfh_holds(field, x),
            }
        })
        .collect()
}

/// Grid row for portrait export.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub stripe: Stripe,
    pub x: f64,
    pub theta: f64,
    pub x_rate: f64,
    pub theta_rate: f64,
    pub radial_rate: f64,
    pub residual: f64,
}

/// Samples every stripe on an `n × n` grid over `[x_min, x_max]` at `r = 0`.
pub fn cylinder_grid(
    sys: &DoubleDiscontinuitySystem,
    x_min: f64,
    x_max: f64,
    n: usize,
) -> Vec<GridRow> {
    let mut out = Vec::with_capacity(4 * n * n);
    for stripe in Stripe::ALL {
        let (lo, hi) = stripe.interval();
        for i in 0..n {
            let theta = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            for j in 0..n {
                let x = x_min + (x_max - x_min) * j as f64 / (n - 1) as f64;
                let s = induced_rates(sys, stripe, x, theta, 0.0);
                out.push(GridRow {
                    stripe,
                    x,
                    theta,
                    x_rate: s.x_dot,
                    theta_rate: s.theta_rate,
                    radial_rate: s.radial_rate,
                    residual: s.theta_rate,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};

    fn uniform(field: AffineVectorField3) -> DoubleDiscontinuitySystem {
        DoubleDiscontinuitySystem::new([field; 4])
    }

    fn close(a: Vec3, b: Vec3, tol: f64) -> bool {
        a.iter().zip(b.iter()).all(|(u, v)| (u - v).abs() <= tol)
    }

    #[test]
    fn phi1_examples() {
        assert!(close(phi1(0.0, 0.0, 1.0), [0.0, 1.0, 0.0], 1e-15));
        assert!(close(phi1(5.0, FRAC_PI_2, 2.0), [5.0, 0.0, 2.0], 1e-15));
        assert!(close(phi1(1.0, FRAC_PI_4, SQRT_2), [1.0, 1.0, 1.0], 1e-15));
    }

    #[test]
    fn phi1_inverse_examples() {
        assert_eq!(
            phi1_inverse(&[0.0, 1.0, 0.0]),
            CylinderPoint {
                x: 0.0,
                theta: 0.0,
                r: 1.0
            }
        );
        assert_eq!(
            phi1_inverse(&[0.0, 0.0, 0.0]),
            CylinderPoint {
                x: 0.0,
                theta: 0.0,
                r: 0.0
            }
        );
        let c = phi1_inverse(&[1.0, 1.0, 1.0]);
        assert!((c.theta - FRAC_PI_4).abs() < 1e-15 && (c.r - SQRT_2).abs() < 1e-15);
        let v = [0.3, -2.0, -0.1];
        let c = phi1_inverse(&v);
        assert!(close(phi1(c.x, c.theta, c.r), v, 1e-12));
    }

    #[test]
    fn induced_rates_examples() {
        let sys = uniform(AffineVectorField3::constant([1.0, 2.0, 3.0]));
        let s = induced_rates(&sys, Stripe::S1, 0.0, 0.0, 0.7);
        assert_eq!((s.x_dot, s.theta_rate, s.radial_rate), (1.0, 3.0, 2.0));
        let s = induced_rates(&sys, Stripe::S2, 0.0, FRAC_PI_2, 0.0);
        assert!((s.theta_rate + 2.0).abs() < 1e-15 && (s.radial_rate - 3.0).abs() < 1e-15);
        let cyc = uniform(AffineVectorField3::axial(
            [-1.0, -1.0, 1.0],
            [2.0, 1.0, 0.0],
        ));
        let s = induced_rates(&cyc, Stripe::S1, 0.0, 0.0, 0.0);
        assert_eq!((s.x_dot, s.theta_rate, s.radial_rate), (2.0, 0.0, 1.0));
    }

    #[test]
    fn desingularized_examples() {
        let sys = uniform(AffineVectorField3::constant([1.0, 2.0, 3.0]));
        assert_eq!(
            desingularized_field(&sys, Stripe::S1, 0.0, 0.0, 0.0),
            [0.0, 3.0, 0.0]
        );
        assert_eq!(
            desingularized_field(&sys, Stripe::S1, 0.0, 0.0, 0.5),
            [0.5, 3.0, 1.0]
        );
    }

    #[test]
    fn hypotheses() {
        let c = AffineVectorField3::constant([1.0, -1.0, 1.0]);
        assert!(wfh_holds(&c, 0.0) && wfh_holds(&c, 1e9));
        assert!(!sfh_holds(&c));
        let a = AffineVectorField3::axial([0.0, 1.0, 1.0], [0.0, 1.0, 1.0]);
        assert!(!wfh_holds(&a, -1.0) && wfh_holds(&a, -1.0 + 1e-12));
        assert!(!wfh_holds(
            &AffineVectorField3::constant([1.0, 0.0, 0.0]),
            0.0
        ));
        let cyc = AffineVectorField3::axial([-1.0, -1.0, 1.0], [2.0, 1.0, 0.0]);
        assert!(sfh_holds(&cyc));
        assert_eq!(sfh_residual(&cyc, 3.7), -cyc.gamma());
        let f4 = AffineVectorField3::axial([-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]);
        assert_eq!(f4.gamma(), -1.0);
    }

    #[test]
    fn layer_eigenvalue_on_attracting_line() {
        let f = AffineVectorField3::constant([1.0, -1.0, 1.0]);
        let l = layer_eigenvalue_of(&f, 0.0, 3.0 * FRAC_PI_4);
        assert!((l + SQRT_2).abs() < 1e-15);
        assert_eq!(
            layer_eigenvalue_of(&AffineVectorField3::constant([1.0, 0.0, 0.0]), 0.0, 1.0),
            0.0
        );
    }

    #[test]
    fn layer_eigenvalue_matches_central_difference() {
        let f = AffineVectorField3::axial([0.3, -1.2, 0.8], [0.5, 0.4, -2.0]);
        let h = 1e-6;
        for k in 0..50 {
            let (x, t) = (-3.0 + 0.13 * k as f64, 0.127 * k as f64);
            let fd = (manifold_residual_of(&f, x, t + h) - manifold_residual_of(&f, x, t - h))
                / (2.0 * h);
            assert!((fd - layer_eigenvalue_of(&f, x, t)).abs() < 1e-8);
        }
    }

    #[test]
    fn branch_roots_constant_fields() {
        let sys = uniform(AffineVectorField3::constant([1.0, -1.0, 1.0]));
        let r = solve_branch_theta(&sys, Stripe::S2, 0.0).roots;
        assert_eq!(r.len(), 1);
        assert!((r[0] - 3.0 * FRAC_PI_4).abs() < 1e-12);
        let r = solve_branch_theta(&sys, Stripe::S4, 0.0).roots;
        assert!((r[0] - 7.0 * FRAC_PI_4).abs() < 1e-12);
        assert!(solve_branch_theta(&sys, Stripe::S1, 0.0).roots.is_empty());
        let sys = uniform(AffineVectorField3::constant([0.0, 0.0, 1.0]));
        assert_eq!(
            solve_branch_theta(&sys, Stripe::S1, 0.0).roots,
            vec![FRAC_PI_2]
        );
        assert_eq!(
            solve_branch_theta(&sys, Stripe::S2, 0.0).roots,
            vec![FRAC_PI_2]
        );
    }

    #[test]
    fn branch_root_slow_cycle_field() {
        let sys = uniform(AffineVectorField3::axial(
            [-1.0, -1.0, 1.0],
            [2.0, 1.0, 0.0],
        ));
        let r = solve_branch_theta(&sys, Stripe::S1, 0.5).roots;
        assert_eq!(r.len(), 1);
        assert!((r[0] - FRAC_PI_4).abs() < 1e-12);
        assert!(slow_manifold_residual(&sys, Stripe::S1, 0.5, r[0]).abs() < 1e-12);
    }

    #[test]
    fn branch_roots_flag_wfh_violation() {
        let sys = uniform(AffineVectorField3::axial([0.0, 1.0, 1.0], [0.0, 1.0, 1.0]));
        let r = solve_branch_theta(&sys, Stripe::S1, -1.0);
        assert!(r.wfh_violation && r.roots.is_empty());
    }

    #[test]
    fn radial_entry_signs() {
        let sys = uniform(AffineVectorField3::constant([1.0, -1.0, 1.0]));
        let rep = radial_entry_report(
            &sys,
            Stripe::S2,
            &[(0.0, 3.0 * FRAC_PI_4), (2.0, 3.0 * FRAC_PI_4)],
        );
        assert!(rep
            .iter()
            .all(|e| e.entering && (e.radial_rate - SQRT_2).abs() < 1e-12));
        let rep = radial_entry_report(&sys, Stripe::S4, &[(0.0, 7.0 * FRAC_PI_4)]);
        assert!(!rep[0].entering);
        let bad = uniform(AffineVectorField3::constant([1.0, 0.0, 0.0]));
        assert!(radial_entry_report(&bad, Stripe::S1, &[(0.0, PI / 3.0)])[0].wfh_violation);
    }

    #[test]
    fn grid_shape() {
        let sys = uniform(AffineVectorField3::constant([1.0, 2.0, 3.0]));
        let g = cylinder_grid(&sys, -1.0, 1.0, 16);
        assert_eq!(g.len(), 4 * 256);
        assert_eq!(g[0].stripe, Stripe::S1);
        assert_eq!(g.last().unwrap().theta, std::f64::consts::TAU);
    }
}
