use std::f64::consts::TAU;

use filicyl::angle::{normalize, BoundaryAngle, Stripe};
use filicyl::blowup::{
    field_rates, layer_eigenvalue_of, manifold_residual_of, phi1, phi1_inverse, sin_cos,
};
use filicyl::closed_form::{branches, classify_eigenvalues, LayerStability, SingularityKind};
use filicyl::filippov::BoundaryKind;
use filicyl::regularization::{regularize_half_plane, RegularizationParams, TransitionFunction};
use filicyl::report::sig17;
use filicyl::stability::{boundary_planar_fields, colinearity_polynomial, BoundaryContext};
use filicyl::system::{parse_system, write_system};
use filicyl::{AffineVectorField3, DoubleDiscontinuitySystem, HalfPlane};
use proptest::prelude::*;

fn coeff() -> impl Strategy<Value = f64> {
    -2.0..2.0f64
}

fn field() -> impl Strategy<Value = AffineVectorField3> {
    (
        prop::array::uniform3(prop::array::uniform3(coeff())),
        prop::array::uniform3(coeff()),
    )
        .prop_map(|(a, d)| AffineVectorField3::new(a, d))
}

fn axial() -> impl Strategy<Value = AffineVectorField3> {
    (
        prop::array::uniform3(coeff()),
        prop::array::uniform3(coeff()),
    )
        .prop_map(|(a, d)| AffineVectorField3::axial(a, d))
        .prop_filter("needs gamma away from zero", |f| f.gamma().abs() > 1e-3)
}

fn system() -> impl Strategy<Value = DoubleDiscontinuitySystem> {
    prop::array::uniform4(field()).prop_map(DoubleDiscontinuitySystem::new)
}

fn boundary() -> impl Strategy<Value = BoundaryAngle> {
    prop::sample::select(BoundaryAngle::ALL.to_vec())
}

fn half_plane() -> impl Strategy<Value = HalfPlane> {
    prop::sample::select(HalfPlane::ALL.to_vec())
}

proptest! {
    #[test]
    fn blowup_round_trip(x in -5.0..5.0f64, theta in 0.0..TAU, r in 1e-3..5.0f64) {
        let c = phi1_inverse(&phi1(x, theta, r));
        prop_assert_eq!(c.x, x);
        prop_assert!((c.r - r).abs() <= 1e-12 * r);
        prop_assert!((normalize(c.theta - theta + 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sin_cos_is_a_unit_vector(theta in -10.0..10.0f64) {
        let (s, c) = sin_cos(theta);
        prop_assert!((s * s + c * c - 1.0).abs() < 1e-15);
    }

    #[test]
    fn radial_rate_is_minus_layer_eigenvalue_on_axis(f in field(), x in -3.0..3.0f64, theta in 0.0..TAU) {
        let g = field_rates(&f, x, theta, 0.0).radial_rate;
        prop_assert!((g + layer_eigenvalue_of(&f, x, theta)).abs() <= 1e-12 * (1.0 + g.abs()));
    }

    #[test]
    fn branches_lie_on_the_slow_manifold(f in axial(), x in -3.0..3.0f64) {
        let (a, b) = branches(&f).unwrap();
        for br in [a, b] {
            let th = br.theta_at(x);
            let scale = 1.0 + f.p().eval(x).abs() + f.q().eval(x).abs();
            prop_assert!(manifold_residual_of(&f, x, th).abs() < 1e-12 * scale);
            let ev = layer_eigenvalue_of(&f, x, th);
            let expected = if br.stability == LayerStability::Attractor { ev < 0.0 } else { ev > 0.0 };
            prop_assert!(expected || ev.abs() < 1e-12 * scale);
        }
        let gap = normalize(a.theta_at(x) - b.theta_at(x));
        prop_assert!((gap - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn visible_segments_stay_inside_the_stripe(f in axial()) {
        let (a, b) = branches(&f).unwrap();
        for br in [a, b] {
            for stripe in Stripe::ALL {
                let (lo, hi) = stripe.interval();
                for (x0, x1) in br.segments_in(stripe) {
                    let x0 = if x0.is_finite() { x0 } else { x1.min(0.0) - 50.0 };
                    let x1 = if x1.is_finite() { x1 } else { x0.max(0.0) + 50.0 };
                    let mid = 0.5 * (x0 + x1);
                    let th = br.theta_at(mid);
                    let inside = (lo..=hi).contains(&th) || (lo..=hi).contains(&(th + TAU)) || (lo..=hi).contains(&(th - TAU));
                    prop_assert!(inside, "{:?} at x = {} has theta {} outside {:?}", br.label, mid, th, stripe);
                }
            }
        }
    }

    #[test]
    fn eigenvalue_signs_fix_the_kind(l1 in -5.0..5.0f64, l2 in -5.0..5.0f64) {
        let k = classify_eigenvalues(l1, l2);
        let want = if l1 * l2 < 0.0 {
            SingularityKind::Saddle
        } else if l1 < 0.0 && l2 < 0.0 {
            SingularityKind::StableNode
        } else if l1 > 0.0 && l2 > 0.0 {
            SingularityKind::UnstableNode
        } else {
            SingularityKind::Degenerate
        };
        prop_assert_eq!(k, want);
    }

    #[test]
    fn sliding_field_is_tangent_and_convex(sys in system(), hp in half_plane(), x in -2.0..2.0f64, t in 0.1..3.0f64) {
        let mut v = [x, 0.0, 0.0];
        v[hp.tangent_axis()] = t * hp.tangent_sign();
        let c = sys.classify_boundary_point(hp, &v).unwrap();
        let s = sys.sliding_field(hp, &v);
        if matches!(c.kind, BoundaryKind::Sliding | BoundaryKind::Escaping) {
            let s = s.unwrap();
            prop_assert_eq!(s[hp.normal_axis()], 0.0);
            let fp = sys.field(hp.plus()).eval(&v);
            let fm = sys.field(hp.minus()).eval(&v);
            let lam = c.lie_minus / (c.lie_minus - c.lie_plus);
            prop_assert!((0.0..=1.0).contains(&lam));
            for i in 0..3 {
                if i != hp.normal_axis() {
                    let want = lam * fp[i] + (1.0 - lam) * fm[i];
                    prop_assert!((s[i] - want).abs() < 1e-9 * (1.0 + want.abs()));
                }
            }
        } else {
            prop_assert!(s.is_err());
        }
    }

    #[test]
    fn regularization_matches_the_sides_outside_the_band(
        sys in system(), hp in half_plane(), x in -2.0..2.0f64, t in 0.1..3.0f64, h in 0.0..1.0f64, eps in 1e-3..1.0f64,
    ) {
        let params = RegularizationParams::new(eps, TransitionFunction::Cubic).unwrap();
        for side in [1.0, -1.0] {
            let mut v = [x, 0.0, 0.0];
            v[hp.tangent_axis()] = t * hp.tangent_sign();
            v[hp.normal_axis()] = side * (eps + h);
            let want = if hp.h(&v) > 0.0 { sys.field(hp.plus()).eval(&v) } else { sys.field(hp.minus()).eval(&v) };
            prop_assert_eq!(regularize_half_plane(&sys, hp, &params, &v), want);
        }
    }

    #[test]
    fn transition_is_odd_and_monotone(u in 0.0..1.0f64, du in 0.0..0.5f64) {
        for tf in [TransitionFunction::Sine, TransitionFunction::Cubic] {
            prop_assert!((tf.eval(u) + tf.eval(-u)).abs() < 1e-15);
            prop_assert!(tf.eval((u + du).min(1.0)) >= tf.eval(u));
        }
    }

    #[test]
    fn colinearity_polynomial_matches_planar_fields(sys in system(), b in boundary(), x in -3.0..3.0f64) {
        let ctx = BoundaryContext::with_default_k(b);
        let d = colinearity_polynomial(&sys, &ctx);
        let (below, above) = boundary_planar_fields(&sys, &ctx);
        let (wm, fm) = below.eval(x, b.value());
        let (wp, fp) = above.eval(x, b.value());
        let direct = wp * fm - wm * fp;
        prop_assert!((d.eval(x) - direct).abs() < 1e-9 * (1.0 + direct.abs()));
    }

    #[test]
    fn system_json_round_trip(sys in system()) {
        prop_assert_eq!(parse_system(&write_system(&sys)).unwrap(), sys);
    }

    #[test]
    fn seventeen_digits_round_trip(x in prop::num::f64::NORMAL) {
        prop_assert_eq!(sig17(x).parse::<f64>().unwrap(), x);
    }
}
