//! One line per acceptance criterion; exits non-zero if any fails.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use filicyl::angle::{BoundaryAngle, Stripe};
use filicyl::blowup::{
    field_rates, layer_eigenvalue_of, manifold_residual_of, phi1, solve_branch_theta, CylinderPoint,
};
use filicyl::closed_form::{
    affine_branches, affine_params, constant_branches, slow_cycle_detect, stripe_singularity,
    BranchKind, LayerStability, SingularityKind, RETURN_TOL,
};
use filicyl::regularization::{compare_sliding_vs_reduced, TransitionFunction};
use filicyl::sampling::{affine_field, affine_system, constant_field, rng};
use filicyl::simulator::{integrate_cylinder, integrate_r3, IntegratorOptions};
use filicyl::stability::{
    bifurcation_witness, colinearity_locus, separatrix_endpoints, stability_verdict,
    BoundaryContext, ColinearityLocus, Condition, ManifoldKind, Status, SweepOptions, Verdict,
};
use filicyl::{AffineVectorField3, DoubleDiscontinuitySystem, HalfPlane};
use rand::Rng;

type Check = Result<(), String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

fn close_angle(a: f64, b: f64, tol: f64) -> bool {
    wrap(a - b).abs() <= tol
}

fn constant_example() -> Check {
    let c = constant_branches(&AffineVectorField3::constant([1.0, -1.0, 1.0]))
        .map_err(|e| e.to_string())?;
    ensure((c.theta_i + FRAC_PI_4).abs() < 1e-12, || {
        format!("theta_1 = {}", c.theta_i)
    })?;
    let BranchKind::Line { theta: l } = c.l.kind else {
        return Err("L is not a line".into());
    };
    let BranchKind::Line { theta: lpi } = c.l_pi.kind else {
        return Err("L^pi is not a line".into());
    };
    ensure(close_angle(l, -FRAC_PI_4, 1e-12), || format!("L at {l}"))?;
    ensure(close_angle(lpi, 3.0 * FRAC_PI_4, 1e-12), || {
        format!("L^pi at {lpi}")
    })?;
    ensure(c.l_visible_in == [Stripe::S4], || {
        format!("L visible in {:?}", c.l_visible_in)
    })?;
    ensure(c.l_pi_visible_in == [Stripe::S2], || {
        format!("L^pi visible in {:?}", c.l_pi_visible_in)
    })?;
    ensure(
        c.l.stability == LayerStability::Repellor && c.l_pi.stability == LayerStability::Attractor,
        || "layer stability".into(),
    )?;
    ensure(!c.visible_in(Stripe::S1), || {
        "a line is visible in S1".into()
    })
}

fn slow_cycle_system() -> DoubleDiscontinuitySystem {
    DoubleDiscontinuitySystem::new([
        AffineVectorField3::axial([-1.0, -1.0, 1.0], [2.0, 1.0, 0.0]),
        AffineVectorField3::axial([1.0, -1.0, -1.0], [-2.0, 1.0, 0.0]),
        AffineVectorField3::axial([1.0, 1.0, -1.0], [-2.0, 1.0, 0.0]),
        AffineVectorField3::axial([-1.0, 1.0, 1.0], [2.0, 1.0, 0.0]),
    ])
}

fn affine_slow_cycle() -> Check {
    let sys = slow_cycle_system();
    let f1 = sys.stripe_field(Stripe::S1);
    let p = affine_params(f1).map_err(|e| e.to_string())?;
    ensure((p.gamma - 1.0).abs() < 1e-12, || {
        format!("gamma_1 = {}", p.gamma)
    })?;
    let beta = p.beta.ok_or("beta undefined")?;
    ensure((beta + FRAC_PI_4).abs() < 1e-12, || {
        format!("beta_1 = {beta}")
    })?;
    let (a, b) = affine_branches(f1).map_err(|e| e.to_string())?;
    let segs: Vec<(f64, f64)> = [a, b]
        .iter()
        .flat_map(|br| br.segments_in(Stripe::S1))
        .collect();
    ensure(segs.len() == 1, || format!("S1 segments {segs:?}"))?;
    let (lo, hi) = segs[0];
    ensure(lo.abs() < 1e-9 && (hi - 1.0).abs() < 1e-9, || {
        format!("S1 segment [{lo}, {hi}]")
    })?;
    let branch = if a.crosses(Stripe::S1).is_some() {
        a
    } else {
        b
    };
    ensure(
        close_angle(branch.theta_at(lo), 0.0, 1e-9)
            && close_angle(branch.theta_at(hi), FRAC_PI_2, 1e-9),
        || "R1/Q1 angles".into(),
    )?;
    let cycle = slow_cycle_detect(&sys).ok_or("no slow cycle")?;
    ensure(cycle.closed && cycle.segments.len() == 4, || {
        format!(
            "cycle closed={} segments={}",
            cycle.closed,
            cycle.segments.len()
        )
    })?;
    ensure(cycle.return_residual < RETURN_TOL, || {
        format!("return residual {}", cycle.return_residual)
    })
}

fn affine_parameters() -> Check {
    let f = AffineVectorField3::axial([1.0, 1.0, 1.0], [-1.0, 1.0, 0.0]);
    let p = affine_params(&f).map_err(|e| e.to_string())?;
    ensure(p.alpha == Some(-1.0), || format!("alpha {:?}", p.alpha))?;
    ensure(p.beta == Some(FRAC_PI_4), || format!("beta {:?}", p.beta))?;
    ensure(p.delta == Some(1.0), || format!("delta {:?}", p.delta))
}

fn constant_instability() -> Check {
    let mut fields = [AffineVectorField3::constant([1.0, 1.0, 1.0]); 4];
    fields[0] = AffineVectorField3::constant([1.0, -1.0, 1.0]);
    fields[1] = AffineVectorField3::constant([-1.0, 1.0, 1.0]);
    let sys = DoubleDiscontinuitySystem::new(fields);
    let mut g = rng();
    for _ in 0..5 {
        let lo = g.random_range(-20.0..0.0);
        let hi = lo + g.random_range(0.1..30.0);
        let delta = g.random_range(0.05..FRAC_PI_4);
        let ctx = BoundaryContext::new(BoundaryAngle::HalfPi, lo, hi, delta)
            .map_err(|e| e.to_string())?;
        ensure(
            colinearity_locus(&sys, &ctx) == ColinearityLocus::IdenticallyZero,
            || format!("locus on K=[{lo},{hi}]"),
        )?;
        let r =
            stability_verdict(&sys, &ctx, &SweepOptions::default()).map_err(|e| e.to_string())?;
        ensure(r.verdict == Verdict::Unstable, || {
            format!("verdict {:?} on K=[{lo},{hi}]", r.verdict)
        })?;
    }
    Ok(())
}

fn affine_instability() -> Check {
    let f4 = AffineVectorField3::axial([-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]);
    let f1 = AffineVectorField3::axial([1.0, 0.0, 1.0], [-1.0, 1.0, 0.0]);
    let sys = DoubleDiscontinuitySystem::new([f1, f1, f4, f4]);
    for (stripe, theta) in [(Stripe::S4, -FRAC_PI_4), (Stripe::S1, FRAC_PI_4)] {
        let p = stripe_singularity(&sys, stripe)
            .ok_or_else(|| format!("no singularity in {stripe:?}"))?;
        ensure(
            (p.x - 1.0).abs() < 1e-12 && close_angle(p.theta, theta, 1e-12),
            || format!("{stripe:?} singularity at ({}, {})", p.x, p.theta),
        )?;
        ensure(p.kind == SingularityKind::Saddle, || {
            format!("{stripe:?} is {:?}", p.kind)
        })?;
    }
    let ctx = BoundaryContext::with_default_k(BoundaryAngle::Zero);
    let slow: Vec<_> = separatrix_endpoints(&sys, &ctx)
        .into_iter()
        .filter(|e| e.manifold == ManifoldKind::Slow)
        .collect();
    ensure(
        slow.len() == 2 && slow.iter().all(|e| e.x.abs() < 1e-9),
        || format!("slow ends {slow:?}"),
    )?;
    let r = stability_verdict(&sys, &ctx, &SweepOptions::default()).map_err(|e| e.to_string())?;
    ensure(r.verdict == Verdict::Unstable, || {
        format!("verdict {:?}", r.verdict)
    })?;
    let c8 = r.entry(Condition::C8).ok_or("no C.8 entry")?;
    ensure(c8.status == Status::Fail, || {
        format!("C.8 is {:?}", c8.status)
    })
}

fn bifurcation() -> Check {
    let mut g = rng();
    for _ in 0..100 {
        let mut d: [f64; 3] = std::array::from_fn(|_| g.random_range(-2.0..2.0));
        if d[0].abs() < 1e-3 {
            d[0] = 1.0;
        }
        let f = AffineVectorField3::constant(d);
        for eta in [1e-2, -1e-2] {
            let w = bifurcation_witness(&f, eta).map_err(|e| e.to_string())?;
            ensure(w.before.singularity.is_none(), || {
                format!("singularity before perturbing {d:?}")
            })?;
            let (x, attracting) = w
                .after
                .singularity
                .ok_or_else(|| format!("none after perturbing {d:?} by {eta}"))?;
            ensure(
                (x + d[0] / eta).abs() <= 1e-9 * x.abs() && attracting == (eta < 0.0),
                || format!("singularity {x} for {d:?}, eta {eta}"),
            )?;
        }
    }
    Ok(())
}

fn property_suite() -> Check {
    let mut g = rng();
    // (a) Dφ·X̄ = r·F∘φ
    for _ in 0..1000 {
        let f = affine_field(&mut g, 2.0, 1e-6);
        let (x, th, r) = (
            g.random_range(-3.0..3.0),
            g.random_range(0.0..TAU),
            g.random_range(1e-3..3.0),
        );
        let s = field_rates(&f, x, th, r);
        let (xd, thd, rd) = (r * s.x_dot, s.theta_rate, r * s.radial_rate);
        let (sn, cs) = th.sin_cos();
        let push = [xd, cs * rd - r * sn * thd, sn * rd + r * cs * thd];
        let want = f.eval(&phi1(x, th, r)).map(|c| r * c);
        let err = (0..3)
            .map(|k| (push[k] - want[k]).abs() / (1.0 + want[k].abs()))
            .fold(0.0, f64::max);
        ensure(err < 1e-9, || format!("(a) pushforward error {err}"))?;
    }
    // (b) ṙ = −f_θ on the slow manifold
    for _ in 0..1000 {
        let f = affine_field(&mut g, 2.0, 1e-6);
        let x = g.random_range(-3.0..3.0);
        let (a, _) = affine_branches(&f).map_err(|e| e.to_string())?;
        let th = a.theta_at(x);
        let g_r = field_rates(&f, x, th, 0.0).radial_rate;
        let err = (g_r + layer_eigenvalue_of(&f, x, th)).abs();
        ensure(err <= 1e-12 * (1.0 + g_r.abs()), || {
            format!("(b) residual {err}")
        })?;
    }
    // (c) sign of the layer eigenvalue on L is −sign(d2)
    for _ in 0..500 {
        let f = constant_field(&mut g, 2.0);
        let c = constant_branches(&f).map_err(|e| e.to_string())?;
        let BranchKind::Line { theta } = c.l.kind else {
            return Err("(c) L is not a line".into());
        };
        let ev = layer_eigenvalue_of(&f, 0.0, theta);
        ensure(ev.signum() == -f.d[1].signum(), || {
            format!("(c) eigenvalue {ev} for d = {:?}", f.d)
        })?;
    }
    // (d) closed form against bracketing root search
    for _ in 0..500 {
        let f = affine_field(&mut g, 2.0, 1e-3);
        let sys = DoubleDiscontinuitySystem::new([f; 4]);
        let x = g.random_range(-3.0..3.0);
        let (a, b) = affine_branches(&f).map_err(|e| e.to_string())?;
        let closed = [a.theta_at(x), b.theta_at(x)];
        for stripe in Stripe::ALL {
            for root in solve_branch_theta(&sys, stripe, x).roots {
                let best = closed
                    .iter()
                    .map(|t| wrap(t - root).abs())
                    .fold(f64::INFINITY, f64::min);
                ensure(best < 1e-9, || {
                    format!("(d) root {root} vs closed form {closed:?}, miss {best}")
                })?;
            }
        }
    }
    // (e) layer eigenvalue against a central difference
    for _ in 0..1000 {
        let f = affine_field(&mut g, 2.0, 1e-6);
        let (x, th) = (g.random_range(-3.0..3.0), g.random_range(0.0..TAU));
        let h = 1e-5;
        let fd =
            (manifold_residual_of(&f, x, th + h) - manifold_residual_of(&f, x, th - h)) / (2.0 * h);
        let ev = layer_eigenvalue_of(&f, x, th);
        ensure((fd - ev).abs() < 1e-8, || format!("(e) fd {fd} vs {ev}"))?;
    }
    Ok(())
}

fn regularization_convergence() -> Check {
    let sys = DoubleDiscontinuitySystem::new([
        AffineVectorField3::constant([1.0, 0.0, -1.0]),
        AffineVectorField3::constant([1.0, 0.0, -1.0]),
        AffineVectorField3::constant([1.0, 0.0, 1.0]),
        AffineVectorField3::constant([1.0, 0.0, 1.0]),
    ]);
    let eps = [1e-1, 1e-2, 1e-3];
    let rows = compare_sliding_vs_reduced(
        &sys,
        HalfPlane::S14,
        [0.0, 1.0, 1.0],
        2.0,
        &eps,
        TransitionFunction::Sine,
    )
    .map_err(|e| e.to_string())?;
    let dev: Vec<f64> = rows.iter().map(|r| r.sup_deviation).collect();
    ensure(dev.windows(2).all(|w| w[1] < w[0]), || {
        format!("deviations {dev:?}")
    })?;
    ensure(dev[2] < 10.0 * eps[2], || {
        format!("final deviation {}", dev[2])
    })
}

fn simulator_consistency() -> Check {
    let mut g = rng();
    let opts = IntegratorOptions {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        ..IntegratorOptions::default()
    };
    let mut compared = 0usize;
    for n in 0..20 {
        let sys = affine_system(&mut g, 1.0);
        let c0 = CylinderPoint::new(
            g.random_range(-1.0..1.0),
            g.random_range(0.0..TAU),
            g.random_range(0.05..0.5),
        );
        let cyl = integrate_cylinder(
            &sys,
            c0,
            &IntegratorOptions {
                sample_dt: Some(0.1),
                ..opts
            }
            .with_t_end(1.0),
        )
        .map_err(|e| format!("system {n}: {e}"))?;
        // Fast time inflates r quadratically, so starts stay moderate. Compare while
        // the orbit stays off the axis and before the first switching event.

        for s in cyl
            .samples
            .iter()
            .filter(|s| s.t > 0.0 && s.state[2] > 1e-3)
        {
            let r3 = integrate_r3(
                &sys,
                phi1(c0.x, c0.theta, c0.r),
                &opts.with_t_end(s.physical_time),
            )
            .map_err(|e| format!("system {n}: {e}"))?;
            let want = phi1(s.state[0], s.state[1], s.state[2]);
            let got = r3.last().state;
            let err = (0..3).map(|k| (got[k] - want[k]).abs()).fold(0.0, f64::max);
            ensure(err < 1e-6, || {
                format!("system {n} at fast time {}: deviation {err}", s.t)
            })?;
            compared += 1;
        }
    }
    ensure(compared >= 100, || {
        format!("only {compared} comparable samples")
    })
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "constant example: lines, visibility and layer stability",
            constant_example,
        ),
        (
            "affine slow cycle: parameters, S1 segment, one confirmed cycle",
            affine_slow_cycle,
        ),
        ("affine parameters alpha, beta, delta", affine_parameters),
        (
            "constant instability on five random compacts",
            constant_instability,
        ),
        (
            "affine instability through a separatrix connection",
            affine_instability,
        ),
        (
            "bifurcation of constant fields under a1 = ±1e-2",
            bifurcation,
        ),
        ("property suite (a)-(e)", property_suite),
        (
            "regularization converges to sliding motion",
            regularization_convergence,
        ),
        ("cylinder and R³ simulators agree", simulator_consistency),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = std::time::Instant::now();
        match check() {
            Ok(()) => println!(
                "criterion {}: PASS  {name} ({:.2?})",
                i + 1,
                started.elapsed()
            ),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of 9 criteria failed");
        std::process::exit(1);
    }
    println!("all 9 criteria pass");
}
