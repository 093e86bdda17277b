use confbill_core::billiard::{reflect, simulate, SimConfig, Stop};
use confbill_core::conformal::{make_duality, map_wall, BranchPolicy};
use confbill_core::fields::stark_type_from_even_polynomials;
use confbill_core::geometry::{focused_conic, ConicKind, FocusedKind};
use confbill_core::integrals::*;
use confbill_core::{ConformalMap, ConicCoeffs, ForceField, PhaseState, Vec2, Wall};
use proptest::prelude::*;

fn v(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

fn point() -> impl Strategy<Value = Vec2> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| v(x, y))
}

fn unit() -> impl Strategy<Value = Vec2> {
    (0.0..std::f64::consts::TAU).prop_map(Vec2::from_angle)
}

fn fields() -> Vec<ForceField> {
    vec![
        ForceField::Hooke { f: 0.7 },
        ForceField::Hooke { f: -0.4 },
        ForceField::Kepler { mu: 1.3 },
        ForceField::Stark { mu: 1.0, g: 0.1 },
        ForceField::FrozenHill { mu: 1.0, g: 0.05 },
        ForceField::TwoCenter { m1: 1.0, m2: 0.5 },
        ForceField::TwoCenterDual { m1: 1.0, m2: 0.5, f: 0.3 },
        ForceField::RadialPower { s: 0.5, alpha: 3.0 },
        stark_type_from_even_polynomials(1.0, &[0.0, 0.0, 0.03], &[0.0, 0.0, -0.02]).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn focused_conics_round_trip(a in 0.5..5.0f64, ratio in 0.1..0.95f64, hyperbolic in any::<bool>()) {
        let b = a * ratio;
        let kind = if hyperbolic { FocusedKind::Hyperbola } else { FocusedKind::Ellipse };
        let conic = focused_conic(kind, a, b, true).unwrap();
        let cls = conic.classify().unwrap();
        let expect = if hyperbolic { ConicKind::Hyperbola } else { ConicKind::Ellipse };
        prop_assert_eq!(cls.kind, expect);
        let (sa, sb) = cls.semi_axes.unwrap();
        prop_assert!((sa - a).abs() <= 1e-12 * a && (sb - b).abs() <= 1e-12 * a);
        prop_assert!(cls.foci.iter().any(|f| f.norm() <= 1e-12 * a.max(1.0)));
    }

    #[test]
    fn classification_is_scale_free(
        a in 0.5..4.0f64, b in 0.5..4.0f64, cx in -2.0..2.0f64, cy in -2.0..2.0f64,
        th in -3.0..3.0f64, lambda in prop_oneof![-50.0..-0.02f64, 0.02..50.0f64],
    ) {
        let conic = ConicCoeffs::hyperbola(a, b, v(cx, cy), th);
        let x = conic.classify().unwrap();
        let y = conic.scaled(lambda).classify().unwrap();
        prop_assert_eq!(x.kind, y.kind);
        let ((a1, b1), (a2, b2)) = (x.semi_axes.unwrap(), y.semi_axes.unwrap());
        prop_assert!((a1 - a2).abs() <= 1e-9 * a1 && (b1 - b2).abs() <= 1e-9 * a1);
        prop_assert!(x.center.unwrap().distance(y.center.unwrap()) <= 1e-9);
    }

    #[test]
    fn sampled_wall_points_lie_on_the_wall(
        a in 0.5..4.0f64, r in 0.2..1.0f64, th in -3.0..3.0f64, u in 0.0..1.0f64,
    ) {
        let conic = ConicCoeffs::ellipse(a, a * r, v(0.3, -0.2), th);
        let wall = Wall::single(conic);
        let (_, q) = wall.sampler(10.0).unwrap().point_at(u).unwrap();
        let g = conic.gradient(q);
        prop_assert!(conic.eval(q).abs() <= 1e-10);
        let h = 1e-6;
        let t = g.perp().normalized();
        let (q1, q2) = (q + t * h, q - t * h);
        // tangent of the curve through projected neighbours
        let p1 = confbill_core::geometry::project_onto(&conic.into(), q1).unwrap();
        let p2 = confbill_core::geometry::project_onto(&conic.into(), q2).unwrap();
        let tangent = (p1 - p2).normalized();
        prop_assert!(tangent.dot(g.normalized()).abs() <= 1e-6);
    }

    #[test]
    fn reflection_keeps_speed_and_tangent(p in point(), n in point()) {
        prop_assume!(n.norm() > 1e-3);
        let out = reflect(p, n).unwrap();
        let scale = p.norm().max(1e-300);
        prop_assert!((out.norm() - p.norm()).abs() <= 1e-13 * scale.max(1.0));
        let t = n.perp().normalized();
        prop_assert!((out.dot(t) - p.dot(t)).abs() <= 1e-13 * scale.max(1.0));
        let nn = n.normalized();
        prop_assert!((out.dot(nn) + p.dot(nn)).abs() <= 1e-13 * scale.max(1.0));
    }

    #[test]
    fn separable_custom_potential_is_branch_free(z in point()) {
        prop_assume!(z.norm() > 1e-2);
        let field = stark_type_from_even_polynomials(1.0, &[0.0, 0.0, 0.03, 0.0, 0.01], &[0.0, 0.0, -0.02]).unwrap();
        let map = ConformalMap::Power { k: 2 };
        let q = map.forward(z).unwrap();
        let branches = map.inverse_branches(q).unwrap();
        let pairing = make_duality(map, field, -0.5).unwrap();
        let a = pairing.source_field.potential(branches[0]).unwrap();
        let b = pairing.source_field.potential(branches[1]).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn power_lift_round_trips_branches(z in point(), k in 2u32..5) {
        prop_assume!(z.norm() > 1e-2);
        let map = ConformalMap::Power { k };
        let q = map.forward(z).unwrap();
        let b = map.inverse_branches(q).unwrap();
        prop_assert!(b.iter().any(|x| x.distance(z) <= 1e-12 * z.norm().max(1.0)));
    }

    #[test]
    fn maps_preserve_angles(z in point(), a in unit(), b in unit(), which in 0usize..3) {
        prop_assume!(z.norm() > 0.1);
        let map = [ConformalMap::Power { k: 2 }, ConformalMap::Power { k: 3 }, ConformalMap::Birkhoff][which];
        prop_assume!(map.derivative(z).norm() > 1e-3);
        let (da, db) = (map.differential(z, a), map.differential(z, b));
        let before = a.cross(b).atan2(a.dot(b));
        let after = da.cross(db).atan2(da.dot(db));
        prop_assert!((before - after).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn force_is_minus_gradient(q in point(), which in 0usize..9) {
        let field = &fields()[which];
        prop_assume!(field.singular_distance(q) > 0.1);
        let a = field.accel(q).unwrap();
        let h = 1e-6 * q.norm().max(1.0);
        let dx = (field.potential(q + v(h, 0.0)).unwrap() - field.potential(q - v(h, 0.0)).unwrap()) / (2.0 * h);
        let dy = (field.potential(q + v(0.0, h)).unwrap() - field.potential(q - v(0.0, h)).unwrap()) / (2.0 * h);
        let err = (a + v(dx, dy)).norm();
        prop_assert!(err <= 1e-6 * a.norm().max(1.0), "{err:e} at {q:?}");
    }

    #[test]
    fn pairings_satisfy_the_level_identity(z in point(), w in point(), which in 0usize..4) {
        prop_assume!(z.norm() > 0.05);
        let (map, target, e) = [
            (ConformalMap::Power { k: 2 }, ForceField::Kepler { mu: 1.3 }, -0.4),
            (ConformalMap::Power { k: 2 }, ForceField::Stark { mu: 1.0, g: 0.1 }, -0.5),
            (ConformalMap::Power { k: 3 }, ForceField::Free, 0.7),
            (ConformalMap::Birkhoff, ForceField::TwoCenter { m1: 1.0, m2: 0.5 }, -0.3),
        ][which].clone();
        let pairing = make_duality(map, target, e).unwrap();
        prop_assume!(pairing.source_field.singular_distance(z) > 0.05);
        let s = PhaseState::new(z, w);
        let r = pairing.residual(&s).unwrap();
        let h = pairing.source_field.hamiltonian(&s).unwrap();
        prop_assert!(r.abs() <= 1e-12 * h.abs().max(1.0), "{r:e}");
    }
}

/// `Jᵀ Ω J` for the Jacobian of the lift, by central differences.
fn pulled_back_form(map: ConformalMap, y: [f64; 4]) -> [[f64; 4]; 4] {
    let lift = |y: [f64; 4]| {
        let (q, p) = map.lift(v(y[0], y[1]), v(y[2], y[3])).unwrap();
        [q.x, q.y, p.x, p.y]
    };
    let h = 1e-6;
    let mut jac = [[0.0; 4]; 4];
    for j in 0..4 {
        let (mut a, mut b) = (y, y);
        a[j] += h;
        b[j] -= h;
        let (fa, fb) = (lift(a), lift(b));
        for i in 0..4 {
            jac[i][j] = (fa[i] - fb[i]) / (2.0 * h);
        }
    }
    // Ω pairs (q₁, p₁) and (q₂, p₂)
    let omega = |u: [f64; 4], w: [f64; 4]| u[2] * w[0] - u[0] * w[2] + u[3] * w[1] - u[1] * w[3];
    let col = |j: usize| [jac[0][j], jac[1][j], jac[2][j], jac[3][j]];
    let mut out = [[0.0; 4]; 4];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            *x = omega(col(i), col(j));
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn lifts_are_conformally_symplectic(z in point(), w in point(), which in 0usize..3) {
        prop_assume!(z.norm() > 0.3);
        let map = [ConformalMap::Power { k: 2 }, ConformalMap::Power { k: 3 }, ConformalMap::Birkhoff][which];
        prop_assume!(map.derivative(z).norm() > 0.1);
        let form = pulled_back_form(map, [z.x, z.y, w.x, w.y]);
        let canon = pulled_back_form(ConformalMap::Identity, [z.x, z.y, w.x, w.y]);
        let sigma = map.symplectic_factor();
        for i in 0..4 {
            for j in 0..4 {
                let scale = sigma.max(1.0) * (1.0 + w.norm());
                prop_assert!((form[i][j] - sigma * canon[i][j]).abs() <= 1e-6 * scale,
                    "{i}{j}: {} vs {}", form[i][j], sigma * canon[i][j]);
            }
        }
    }

    #[test]
    fn mapped_walls_satisfy_closed_forms(a in 0.6..3.0f64, r in 0.2..0.95f64, hyperbolic in any::<bool>(), th in -1.5..1.5f64) {
        let b = a * r;
        let src = if hyperbolic {
            ConicCoeffs::hyperbola(a, b, Vec2::ZERO, th)
        } else {
            ConicCoeffs::ellipse(a, b, Vec2::ZERO, th)
        };
        let img = map_wall(ConformalMap::Power { k: 2 }, &Wall::single(src), BranchPolicy::ClosedForm, 256, 3.0).unwrap();
        let cf = img.components[0].closed_form.unwrap().normalized();
        for pl in &img.components[0].polylines {
            for &q in &pl.points {
                let g = cf.gradient(q).norm().max(1.0);
                prop_assert!(cf.eval(q).abs() <= 1e-10 * g * (1.0 + q.norm_sq()));
            }
        }
    }

    #[test]
    fn centered_conics_keep_hooke_g(a in 0.8..4.0f64, r in 0.2..0.95f64, f in -1.0..1.0f64, hyperbolic in any::<bool>()) {
        let b = a * r;
        let (wall, k) = if hyperbolic {
            (ConicCoeffs::hyperbola(a, b, Vec2::ZERO, 0.0), a * a + b * b)
        } else {
            (ConicCoeffs::ellipse(a, b, Vec2::ZERO, 0.0), a * a - b * b)
        };
        let g = hooke_g(f, a, (k / (a * a)).sqrt()).unwrap();
        let cfg = SampleConfig { n_samples: 100, tol: 1e-11, ..SampleConfig::default() };
        let rep = check_reflection_invariance(&Wall::single(wall), &g, &cfg).unwrap();
        prop_assert!(rep.is_invariant(), "{}", rep.to_key_values());
    }

    #[test]
    fn focused_conics_keep_gallavotti_jauslin(a in 0.8..4.0f64, r in 0.2..0.95f64, mu in 0.2..2.0f64, hyperbolic in any::<bool>()) {
        let b = a * r;
        let kind = if hyperbolic { FocusedKind::Hyperbola } else { FocusedKind::Ellipse };
        let conic = focused_conic(kind, a, b, true).unwrap();
        let a_tilde = conic.classify().unwrap().center.unwrap().x;
        let gj = gallavotti_jauslin_a(mu, a_tilde);
        let cfg = SampleConfig { n_samples: 100, tol: 1e-11, ..SampleConfig::default() };
        let rep = check_reflection_invariance(&Wall::single(conic), &gj, &cfg).unwrap();
        prop_assert!(rep.is_invariant(), "{}", rep.to_key_values());
    }

    #[test]
    fn transport_identity(z in point(), th in 0.0..6.3f64, a in 1.0..3.0f64, r in 0.2..0.9f64, f in 0.1..1.0f64) {
        let mu = 2.0 + f * 9.0;
        let kin = mu - f * z.norm_sq();
        prop_assume!(kin > 0.0 && z.norm() > 1e-2);
        let k = a * a * (1.0 - r * r);
        let g = hooke_g(f, a, (k / (a * a)).sqrt()).unwrap();
        let gj = gallavotti_jauslin_a(mu, k / 2.0);
        let s = PhaseState::new(z, Vec2::from_angle(th) * (2.0 * kin).sqrt());
        let lhs = (1.0 + k) * g.eval(&s).unwrap() - k * mu;
        let rhs = gj.eval(&ConformalMap::Power { k: 2 }.lift_state(&s).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
    }

    #[test]
    fn bridge_identity_on_the_wall(a in 1.0..4.0f64, r in 0.2..0.95f64, t in 0.0..6.3f64, th in 0.0..6.3f64) {
        let b = a * r;
        let s = PhaseState::new(v(a * t.cos(), b * t.sin()), Vec2::from_angle(th));
        prop_assert!(joachimsthal_bridge_residual(a, b, &s).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn billiard_runs_conserve_energy_and_land_on_walls(
        r0 in 0.3..1.2f64, th in 0.0..6.3f64, ph in 0.0..6.3f64, speed in 1.5..2.5f64, which in 0usize..3,
    ) {
        let (field, wall) = [
            (ForceField::Hooke { f: 0.1 }, ConicCoeffs::ellipse(3.0, 2.0, Vec2::ZERO, 0.0)),
            (ForceField::Kepler { mu: 1.0 }, focused_conic(FocusedKind::Ellipse, 3.0, 2.0, true).unwrap()),
            (ForceField::Free, ConicCoeffs::ellipse(3.0, 2.0, v(0.2, 0.1), 0.3)),
        ][which].clone();
        let q0 = Vec2::from_angle(th) * r0 + if which == 1 { v(1.5, 0.0) } else { Vec2::ZERO };
        let s0 = PhaseState::new(q0, Vec2::from_angle(ph) * speed);
        let stop = Stop::Either { reflections: 60, time: 400.0 };
        let tr = simulate(&field, &Wall::single(wall), s0, stop, &SimConfig::default()).unwrap();
        let h0 = field.hamiltonian(&s0).unwrap();
        for (_, s) in tr.samples() {
            let h = field.hamiltonian(&s.state).unwrap();
            prop_assert!((h - h0).abs() <= 1e-8 * h0.abs().max(1.0));
        }
        for e in &tr.events {
            prop_assert!(wall.eval(e.q).abs() <= 1e-12 * wall.gradient(e.q).norm().max(1.0));
        }
        if let Some(last) = tr.events.last() {
            let back = PhaseState::new(last.q, -last.p_in);
            let n = tr.events.len();
            let rev = simulate(&field, &Wall::single(wall), back, Stop::Reflections(n.min(10)), &SimConfig::default()).unwrap();
            for (a, b) in rev.events.iter().zip(tr.events.iter().rev().skip(1)) {
                prop_assert!(a.q.distance(b.q) <= 1e-7);
            }
        }
    }
}
