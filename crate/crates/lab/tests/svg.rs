use confbill::svg::{implicit_residual, parse_paths, Role, Svg, SvgPath};
use confbill_core::{ConformalMap, ConicCoeffs, Vec2};

fn ellipse_points(a: f64, b: f64, c: Vec2, n: usize) -> Vec<Vec2> {
    (0..n)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / n as f64;
            Vec2::new(c.x + a * t.cos(), c.y + b * t.sin())
        })
        .collect()
}

fn ellipse(a: f64, b: f64, c: Vec2) -> ConicCoeffs {
    // (x - cx)²/a² + (y - cy)²/b² - 1
    let (ia, ib) = (1.0 / (a * a), 1.0 / (b * b));
    ConicCoeffs::from_array([ia, 0.0, ib, -2.0 * c.x * ia, -2.0 * c.y * ib, c.x * c.x * ia + c.y * c.y * ib - 1.0])
}

#[test]
fn round_trip_keeps_points_and_attributes() {
    let c = Vec2::new(2.0, 1.0);
    let pts = ellipse_points(3.0, 2.0, c, 64);
    let mut svg = Svg::new("test");
    svg.push(SvgPath::new(Role::Source, pts.clone(), true).conic(ellipse(3.0, 2.0, c)));
    let parsed = parse_paths(&svg.render());
    assert_eq!(parsed.len(), 1);
    assert_eq!(parsed[0].role, "source");
    assert_eq!(parsed[0].points, pts);
    assert!(parsed[0].map.is_none());
}

#[test]
fn image_points_satisfy_the_source_equation_through_the_map() {
    let c = Vec2::new(1.5, 0.0);
    let src = ellipse_points(3.0, 2.0, c, 200);
    for map in [ConformalMap::Power { k: 2 }, ConformalMap::Power { k: 3 }, ConformalMap::Birkhoff] {
        let img: Vec<Vec2> = src.iter().map(|z| map.forward(*z).unwrap()).collect();
        let mut svg = Svg::new("image");
        svg.push(SvgPath::new(Role::Image, img, true).conic(ellipse(3.0, 2.0, c)).mapped(map, None));
        let parsed = parse_paths(&svg.render());
        let worst = parsed[0]
            .points
            .iter()
            .map(|q| implicit_residual(&parsed[0], *q).unwrap())
            .fold(0.0, f64::max);
        assert!(worst < 1e-10, "{map}: {worst:e}");
    }
}

#[test]
fn points_off_the_curve_have_a_residual() {
    let mut svg = Svg::new("off");
    svg.push(SvgPath::new(Role::Wall, ellipse_points(3.0, 2.0, Vec2::ZERO, 8), true).conic(ellipse(3.0, 2.0, Vec2::ZERO)));
    let parsed = parse_paths(&svg.render());
    assert!(implicit_residual(&parsed[0], Vec2::new(0.0, 0.0)).unwrap() > 0.1);
}

#[test]
fn view_box_covers_every_point() {
    let mut svg = Svg::new("box");
    svg.push(SvgPath::new(Role::Trajectory, vec![Vec2::new(-1.0, 2.0), Vec2::new(4.0, -3.0)], false));
    let (lo, hi) = svg.view_box();
    assert!(lo.x < -1.0 && lo.y < -3.0 && hi.x > 4.0 && hi.y > 2.0);
}
