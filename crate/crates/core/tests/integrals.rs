use std::f64::consts::{FRAC_PI_3, PI};

use confbill_core::billiard::{simulate, SimConfig, Stop};
use confbill_core::conformal::{make_duality, pull_wall, DualityPairing};
use confbill_core::geometry::{focused_conic, FocusedKind};
use confbill_core::integrals::*;
use confbill_core::{ConformalMap, ConicCoeffs, Execution, ForceField, PhaseState, Vec2, Wall};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn v(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

fn st(q: (f64, f64), p: (f64, f64)) -> PhaseState {
    PhaseState::new(v(q.0, q.1), v(p.0, p.1))
}

fn cfg(tol: f64) -> SampleConfig {
    SampleConfig { tol, ..SampleConfig::default() }
}

#[test]
fn angular_momentum_examples() {
    assert_eq!(angular_momentum(&st((1.0, 0.0), (0.0, 1.0))), 1.0);
    assert_eq!(angular_momentum(&st((1.0, 0.0), (1.0, 0.0))), 0.0);
    let s = st((0.3, -1.2), (0.7, 0.4));
    for k in 0..12 {
        let r = s.rotated(k as f64 * 0.55);
        assert!((angular_momentum(&r) - angular_momentum(&s)).abs() < 1e-15);
    }
}

#[test]
fn hooke_g_examples() {
    let g = hooke_g(1.0, 3.0, (5.0f64 / 9.0).sqrt()).unwrap();
    let s = st((3.0, 0.0), (0.0, 1.0));
    assert!((g.eval(&s).unwrap() - 16.5).abs() < 1e-13);
    // k₁(2f z₁² + w₁²) + k₂(2f z₂² + w₂²) + L² with k₁ = 5, k₂ = 0, normalized by 1 + k₁
    let oracle = (5.0 * 18.0 + 9.0) / 6.0;
    assert!((g.eval(&s).unwrap() - oracle).abs() < 1e-13);
    let k1 = g.param("k1").unwrap();
    assert!((k1 - g.param("k2").unwrap() - 5.0).abs() < 1e-12);
    let circle = hooke_g(2.0, 1.5, 0.0).unwrap();
    let s = st((0.4, -0.2), (1.1, 0.3));
    assert!((circle.eval(&s).unwrap() - angular_momentum(&s).powi(2)).abs() < 1e-15);
    assert!(hooke_g(1.0, -1.0, 0.5).is_err());
}

#[test]
fn hooke_g_invariant_at_centered_conics() {
    let ellipse = Wall::single(ConicCoeffs::ellipse(3.0, 2.0, Vec2::ZERO, 0.0));
    let g = hooke_g(1.0, 3.0, (5.0f64 / 9.0).sqrt()).unwrap();
    let r = check_reflection_invariance(&ellipse, &g, &cfg(1e-12)).unwrap();
    assert!(r.is_invariant(), "{}", r.to_key_values());
    assert_eq!(r.n_samples, 1000);

    let hyperbola = Wall::single(ConicCoeffs::hyperbola(3.0, 2.0, Vec2::ZERO, 0.0));
    let gh = hooke_g(1.0, 3.0, 13f64.sqrt() / 3.0).unwrap();
    let r = check_reflection_invariance(&hyperbola, &gh, &cfg(1e-12)).unwrap();
    assert!(r.is_invariant(), "{}", r.to_key_values());

    let rotated = Wall::single(ConicCoeffs::ellipse(3.0, 2.0, Vec2::ZERO, 0.4));
    let r = check_reflection_invariance(&rotated, &g, &cfg(1e-12)).unwrap();
    assert_eq!(r.verdict, Verdict::Violated);
    assert!(r.witness.is_some());
}

#[test]
fn confocal_g_covers_the_family() {
    let g = confocal_g(0.8, 5f64.sqrt()).unwrap();
    let wall = Wall::new()
        .with("ellipse", ConicCoeffs::ellipse(3.0, 2.0, Vec2::ZERO, 0.0))
        .with("hyperbola", ConicCoeffs::hyperbola(1.0, 2.0, Vec2::ZERO, 0.0));
    let r = check_reflection_invariance(&wall, &g, &cfg(1e-12)).unwrap();
    assert!(r.is_invariant(), "{}", r.to_key_values());
    let same = hooke_g(0.8, 3.0, 5f64.sqrt() / 3.0).unwrap();
    let s = st((0.7, 1.1), (-0.2, 0.9));
    assert!((same.eval(&s).unwrap() - g.eval(&s).unwrap()).abs() < 1e-14);

    let other = Wall::single(ConicCoeffs::ellipse(3.0, 1.0, Vec2::ZERO, 0.0));
    let r = check_reflection_invariance(&other, &g, &cfg(1e-12)).unwrap();
    assert_eq!(r.verdict, Verdict::Violated);
    assert!(r.max_violation > 1e-3);
}

#[test]
fn hooke_line_integral_properties() {
    let h = hooke_line_integral(0.7);
    let s = st((0.4, -0.3), (1.2, 0.5));
    let flipped = st((0.4, -0.3), (-1.2, 0.5));
    assert_eq!(h.eval(&s).unwrap(), h.eval(&flipped).unwrap());
    let field = ForceField::Hooke { f: 0.7 };
    let r = check_flow_conservation(&field, &h, s, 100.0, 1e-9, 1e-11).unwrap();
    assert!(r.is_invariant(), "{}", r.to_key_values());
    let walls = Wall::new()
        .with("x", ConicCoeffs::line(v(0.8, 0.0), v(0.0, 1.0)))
        .with("y", ConicCoeffs::line(v(0.0, -0.5), v(1.0, 0.0)));
    let r = check_reflection_invariance(&walls, &h, &cfg(1e-14)).unwrap();
    assert!(r.is_invariant(), "{}", r.to_key_values());
}

#[test]
fn gallavotti_jauslin_circular_orbit() {
    let a = gallavotti_jauslin_a(1.0, 1.0);
    assert!((a.eval(&st((1.0, 0.0), (0.0, 1.0))).unwrap() - 1.0).abs() < 1e-15);
    let g = gj_general(1.0, 0.0, -2.0);
    let s = st((0.3, 0.8), (-0.9, 0.2));
    assert!((g.eval(&s).unwrap() - a.eval(&s).unwrap()).abs() < 1e-14);
    let l2 = gj_general(1.0, 0.0, 0.0);
    assert!((l2.eval(&s).unwrap() - angular_momentum(&s).powi(2)).abs() < 1e-15);
}

#[test]
fn duality_transport_of_hooke_g() {
    let (f, mu) = (0.6, 1.7);
    let (a, b) = (3.0, 2.0);
    let k = a * a - b * b;
    let g = hooke_g(f, a, (k / (a * a)).sqrt()).unwrap();
    let gj = gallavotti_jauslin_a(mu, k / 2.0);
    let map = ConformalMap::Power { k: 2 };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let z = v(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        let kin = mu - f * z.norm_sq();
        if kin <= 0.0 || z.norm() < 1e-3 {
            continue;
        }
        let w = Vec2::from_angle(rng.random_range(0.0..2.0 * PI)) * (2.0 * kin).sqrt();
        let s = PhaseState::new(z, w);
        let lhs = (1.0 + k) * g.eval(&s).unwrap() - k * mu;
        let rhs = gj.eval(&map.lift_state(&s).unwrap()).unwrap();
        worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1.0));
    }
    assert!(worst <= 1e-10, "{worst:e}");
}

#[test]
fn gallavotti_jauslin_invariant_at_focused_conics() {
    let mu = 1.0;
    let ellipse = focused_conic(FocusedKind::Ellipse, 3.0, 2.0, true).unwrap();
    let a = gallavotti_jauslin_a(mu, 5f64.sqrt());
    let r = check_reflection_invariance(&Wall::single(ellipse), &a, &cfg(1e-11)).unwrap();
    assert!(r.is_invariant(), "{}", r.to_key_values());

    let hyperbola = focused_conic(FocusedKind::Hyperbola, 1.0, 2.0, true).unwrap();
    let a = gallavotti_jauslin_a(mu, 5f64.sqrt());
    let r = check_reflection_invariance(&Wall::single(hyperbola), &a, &cfg(1e-11)).unwrap();
    assert!(r.is_invariant(), "{}", r.to_key_values());

    let parabola = focused_conic(FocusedKind::Parabola, 1.0, 0.0, true).unwrap();
    let e1 = lenz_component(mu);
    let r = check_reflection_invariance(&Wall::single(parabola), &e1, &cfg(1e-11)).unwrap();
    assert!(r.is_invariant(), "{}", r.to_key_values());

    let line = Wall::single(ConicCoeffs::line(v(2.0, 0.0), v(0.0, 1.0)));
    let a = gallavotti_jauslin_a(mu, 2.0);
    let r = check_reflection_invariance(&line, &a, &cfg(1e-11)).unwrap();
    assert!(r.is_invariant(), "{}", r.to_key_values());
}

#[test]
fn gj_general_wall_factor() {
    let ellipse = focused_conic(FocusedKind::Ellipse, 3.0, 2.0, true).unwrap();
    let wall = Wall::single(ellipse);
    let good = gj_general(1.0, 0.0, -2.0 * 5f64.sqrt());
    let r = factorization_check(&wall, &good, &cfg(1e-12)).unwrap();
    assert!(r.factorizes, "{}", r.to_key_values());
    let bad = gj_general(1.0, 0.0, -2.2 * 5f64.sqrt());
    let r = factorization_check(&wall, &bad, &cfg(1e-12)).unwrap();
    assert!(!r.factorizes);
    assert!(r.on_wall_max > 1e-3);
}

#[test]
fn joachimsthal_bridge_on_the_wall() {
    let (a, b) = (3.0, 2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let t = rng.random_range(0.0..2.0 * PI);
        let z = v(a * t.cos(), b * t.sin());
        let w = Vec2::from_angle(rng.random_range(0.0..2.0 * PI));
        let s = PhaseState::new(z, w);
        assert!(joachimsthal_bridge_residual(a, b, &s).abs() <= 1e-12);
        // the middle term is the squared event-indexed integral
        let j = joachimsthal(ConicCoeffs::ellipse(a, b, Vec2::ZERO, 0.0)).eval(&s).unwrap();
        assert!(((z.x * w.x / (a * a) + z.y * w.y / (b * b)).powi(2) - j * j).abs() < 1e-14);
    }
}

#[test]
fn joachimsthal_constant_over_free_reflections() {
    let conic = ConicCoeffs::ellipse(3.0, 2.0, Vec2::ZERO, 0.0);
    let wall = Wall::single(conic);
    let tr = simulate(
        &ForceField::Free,
        &wall,
        st((0.4, 0.1), (0.6, 0.8)),
        Stop::Reflections(100),
        &SimConfig::default(),
    )
    .unwrap();
    assert_eq!(tr.events.len(), 100);
    let r = check_trajectory(&tr, &joachimsthal(conic), 1e-10);
    assert!(r.is_invariant(), "{}", r.to_key_values());
    let r = check_trajectory(&tr, &joachimsthal_squared(conic).unwrap(), 1e-10);
    assert!(r.is_invariant(), "{}", r.to_key_values());
}

#[test]
fn parabola_gamma_in_a_confocal_lens() {
    let focus = Vec2::ZERO;
    let gamma = parabola_gamma(focus, v(1.0, 0.0)).unwrap();
    // ray along the axis: θ = 0
    assert_eq!(gamma.eval(&st((3.0, 0.7), (-1.0, 0.0))).unwrap(), 0.0);
    // ray through the focus: C = 0
    assert_eq!(gamma.eval(&st((0.5, 0.5), (-1.0, -1.0))).unwrap(), 0.0);
    let lens = Wall::new()
        .with("left", focused_conic(FocusedKind::Parabola, 1.0, 0.0, true).unwrap())
        .with("right", focused_conic(FocusedKind::Parabola, -1.0, 0.0, true).unwrap());
    let tr = simulate(
        &ForceField::Free,
        &lens,
        st((0.1, 0.2), (0.3, 0.9)),
        Stop::Reflections(100),
        &SimConfig::default(),
    )
    .unwrap();
    assert_eq!(tr.events.len(), 100);
    let r = check_trajectory(&tr, &gamma, 1e-10);
    assert!(r.is_invariant(), "{}", r.to_key_values());
}

#[test]
fn stark_separated_planes_agree() {
    let fields = [
        ForceField::Stark { mu: 1.0, g: 0.1 },
        ForceField::FrozenHill { mu: 1.0, g: 0.05 },
        confbill_core::fields::stark_type_from_even_polynomials(1.0, &[0.0, 0.0, 0.03], &[0.0, 0.0, -0.02])
            .unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for field in fields {
        let f = 0.5;
        let h1 = stark_separated(&field, f).unwrap();
        let pairing = make_duality(ConformalMap::Power { k: 2 }, field.clone(), -f).unwrap();
        let pushed = pushforward_integral(&pairing, &h1).unwrap();
        for _ in 0..200 {
            let z = v(rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2));
            let w = v(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            let s = PhaseState::new(z, w);
            let q = ConformalMap::Power { k: 2 }.lift_state(&s).unwrap();
            let a = h1.eval(&s).unwrap();
            let b = pushed.eval(&q).unwrap();
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} {b}");
        }
    }
    assert!(stark_separated(&ForceField::Kepler { mu: 1.0 }, 0.5).is_err());
}

#[test]
fn stark_reduces_to_line_integral() {
    let h1 = stark_separated(&ForceField::Stark { mu: 1.0, g: 0.0 }, 0.5).unwrap();
    let line = hooke_line_integral(0.5);
    let s = st((0.3, 0.9), (0.4, -0.2));
    assert!((2.0 * h1.eval(&s).unwrap() - line.eval(&s).unwrap()).abs() < 1e-15);
}

fn kdual_level_state(m1: f64, m2: f64, f: f64, z: Vec2, angle: f64) -> PhaseState {
    let field = ForceField::TwoCenterDual { m1, m2, f };
    let v0 = field.potential(z).unwrap();
    assert!(v0 < 0.0);
    PhaseState::new(z, Vec2::from_angle(angle) * (-2.0 * v0).sqrt())
}

#[test]
fn two_center_radial_conserved_on_zero_level() {
    let (m1, m2, f) = (1.0, 0.5, 0.3);
    let field = ForceField::TwoCenterDual { m1, m2, f };
    let ir = two_center_radial(m1, m2, f);
    let s0 = kdual_level_state(m1, m2, f, v(1.3, 0.6), 0.4);
    let r = check_flow_conservation(&field, &ir, s0, 50.0, 1e-8, 1e-11).unwrap();
    assert!(r.is_invariant(), "{}", r.to_key_values());
    assert!(r.n_samples > 10);
    // off the level the check refuses a verdict
    let off = PhaseState::new(s0.q, s0.p * 1.1);
    let r = check_flow_conservation(&field, &ir, off, 5.0, 1e-8, 1e-11).unwrap();
    assert_eq!(r.verdict, Verdict::NotApplicable);
}

#[test]
fn two_center_radial_invariant_at_circles_and_lines() {
    let (m1, m2, f) = (1.0, 0.5, 0.3);
    let ir = two_center_radial(m1, m2, f);
    let wall = Wall::new()
        .with("circle", ConicCoeffs::circle(1.7, Vec2::ZERO))
        .with("circle2", ConicCoeffs::circle(0.8, Vec2::ZERO))
        .with("line", ConicCoeffs::line(Vec2::ZERO, Vec2::from_angle(FRAC_PI_3)));
    let c = SampleConfig { extent: 3.0, ..cfg(1e-12) };
    let r = check_reflection_invariance(&wall, &ir, &c).unwrap();
    assert!(r.is_invariant(), "{}", r.to_key_values());
    assert!(r.n_samples > 100);
}

#[test]
fn elliptic_coords_examples() {
    assert_eq!(elliptic_coords(Vec2::ZERO), (1.0, 0.0));
    let (xi, eta) = elliptic_coords(v(0.0, 2.0));
    assert!((xi - 5f64.sqrt()).abs() < 1e-15 && eta.abs() < 1e-15);
    let (xi, _) = elliptic_coords(v(0.3, 0.0));
    assert!((xi - 1.0).abs() < 1e-15);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let q = v(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
        let (xi, eta) = elliptic_coords(q);
        assert!(xi >= 1.0 - 1e-15 && eta.abs() <= 1.0 + 1e-15);
    }
}

#[test]
fn pullbacks() {
    let map = ConformalMap::Power { k: 2 };
    let pairing = DualityPairing::hooke_kepler(1.0, 2.0);
    let l2 = squared_angular_momentum(Plane::Target).pullback(&pairing).unwrap();
    let s = st((0.6, -0.4), (0.3, 1.1));
    assert!((l2.eval(&s).unwrap() - angular_momentum(&s).powi(2)).abs() < 1e-14);
    let id = DualityPairing::identity(ForceField::Kepler { mu: 1.0 }, -0.5);
    let a = gallavotti_jauslin_a(1.0, 0.7);
    let pa = a.pullback(&id).unwrap();
    assert_eq!(pa.eval(&s).unwrap(), a.eval(&s).unwrap());
    assert_eq!(pa.validity, Validity::AllEnergies);
    assert!(pullback_integral(&pairing, &hooke_g(1.0, 3.0, 0.5).unwrap()).is_err());
    let _ = map;
}

/// Expanded polynomial that agrees with `|z|²·Ĵ`, where `Ĵ` is the pulled-back squared
/// Joachimsthal integral.
fn j_hat_expanded(a: f64, b: f64, c1: f64, c2: f64, s: &PhaseState) -> f64 {
    let (z1, z2, w1, w2) = (s.q.x, s.q.y, s.p.x, s.p.y);
    let (a2, b2) = (a * a, b * b);
    let t = -w2 * w2 * z1.powi(6)
        + 2.0 * w1 * w2 * z1.powi(5) * z2
        + ((-w1 * w1 - 2.0 * w2 * w2) * z2 * z2 + 2.0 * c1 * w2 * w2 - 2.0 * c2 * w1 * w2) * z1.powi(4)
        + 2.0 * (2.0 * w2 * w1 * z2 * z2 + c2 * (w1 * w1 + w2 * w2)) * z2 * z1.powi(3)
        + ((-2.0 * w1 * w1 - w2 * w2) * z2.powi(4)
            + (-2.0 * c1 * w1 * w1 + 2.0 * c1 * w2 * w2 - 4.0 * c2 * w1 * w2) * z2 * z2
            + w1 * w1 * (b2 - c2 * c2)
            + 2.0 * c1 * c2 * w1 * w2
            + w2 * w2 * (a2 - c1 * c1))
            * z1
            * z1
        + 2.0
            * (w1 * w2 * z2.powi(4)
                + c2 * (w1 * w1 + w2 * w2) * z2 * z2
                + c1 * c2 * w1 * w1
                + w1 * (a2 - b2 - c1 * c1 + c2 * c2) * w2
                - c1 * c2 * w2 * w2)
            * z2
            * z1
        + (-w1 * w1 * z2.powi(4)
            + (-2.0 * c1 * w1 * w1 - 2.0 * c2 * w1 * w2) * z2 * z2
            + (a2 - c1 * c1) * w1 * w1
            - 2.0 * c1 * c2 * w1 * w2
            + w2 * w2 * (b2 - c2 * c2))
            * z2
            * z2;
    t / ((z1 * z1 + z2 * z2) * a2 * b2)
}

#[test]
fn pulled_back_joachimsthal_matches_expanded_form() {
    let (a, b) = (3.0, 2.0);
    let pairing = make_duality(ConformalMap::Power { k: 2 }, ForceField::Free, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for (c1, c2) in [(2.0, 0.0), (0.0, 1.0), (2.0, 1.0), (3.0, 4.0)] {
        let j = joachimsthal_squared(ConicCoeffs::ellipse(a, b, v(c1, c2), 0.0)).unwrap();
        let jh = j.pullback(&pairing).unwrap();
        for _ in 0..1000 {
            let z = v(rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5));
            let w = v(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let s = PhaseState::new(z, w);
            let x = z.norm_sq() * jh.eval(&s).unwrap();
            let y = j_hat_expanded(a, b, c1, c2, &s);
            assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0), "{c1},{c2}: {x} vs {y}");
        }
    }
}

#[test]
fn expanded_polynomial_is_not_itself_conserved() {
    let (a, b, c1, c2) = (3.0, 2.0, 2.0, 1.0);
    let pairing = make_duality(ConformalMap::Power { k: 2 }, ForceField::Free, 0.5).unwrap();
    let validity = Validity::FixedEnergy { field: pairing.source_field.clone(), energy: 0.0 };
    let expanded = FirstIntegral::new("expanded", &[], validity, Plane::Source, move |s| {
        j_hat_expanded(a, b, c1, c2, s)
    });
    let z0 = v(1.2, 0.5);
    let s0 = PhaseState::new(z0, Vec2::from_angle(2.0) * z0.norm());
    let r = check_flow_conservation(&pairing.source_field, &expanded, s0, 1.0, 1e-8, 1e-11).unwrap();
    assert_eq!(r.verdict, Verdict::Violated);
    assert!(r.max_violation > 1e-2);
}

#[test]
fn pulled_back_joachimsthal_on_repulsive_hooke() {
    let pairing = make_duality(ConformalMap::Power { k: 2 }, ForceField::Free, 0.5).unwrap();
    assert_eq!(pairing.source_field, ForceField::Hooke { f: -0.5 });
    let ellipse = ConicCoeffs::ellipse(3.0, 2.0, v(2.0, 1.0), 0.0);
    let jh = joachimsthal_squared(ellipse).unwrap().pullback(&pairing).unwrap();
    let wall = pull_wall(ConformalMap::Power { k: 2 }, &Wall::single(ellipse));
    let z0 = v(1.2, 0.5);
    let s0 = PhaseState::new(z0, Vec2::from_angle(2.0) * z0.norm());
    let r = check_flow_conservation(&pairing.source_field, &jh, s0, 1.0, 1e-8, 1e-11).unwrap();
    assert!(r.is_invariant(), "{}", r.to_key_values());
    let c = SampleConfig { extent: 4.0, ..cfg(1e-11) };
    let r = check_reflection_invariance(&wall, &jh, &c).unwrap();
    assert!(r.is_invariant(), "{}", r.to_key_values());
    let f = factorization_check(&wall, &jh, &c).unwrap();
    assert!(f.factorizes, "{}", f.to_key_values());
}

#[test]
fn checks_are_independent_of_execution_mode() {
    let wall = Wall::single(ConicCoeffs::ellipse(3.0, 2.0, Vec2::ZERO, 0.3));
    let g = hooke_g(1.0, 3.0, 0.7).unwrap();
    let seq = SampleConfig { exec: Execution::Sequential, ..cfg(1e-12) };
    let par = SampleConfig { exec: Execution::Parallel, ..cfg(1e-12) };
    let a = check_reflection_invariance(&wall, &g, &seq).unwrap();
    let b = check_reflection_invariance(&wall, &g, &par).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.to_key_values(), b.to_key_values());
}
