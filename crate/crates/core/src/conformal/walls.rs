//! Images and preimages of walls under conformal maps.

use crate::conformal::ConformalMap;
use crate::geometry::{ConicCoeffs, ConicKind, Curve, GeometryError, Polyline, Wall, WallComponent};
use crate::vec2::Vec2;

const CENTER_EPS: f64 = 1e-12;

/// How a mapped wall reflects trajectories in the target plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BranchPolicy {
    /// Reflect only where the continuity-tracked preimage meets the source wall.
    #[default]
    Covering,
    /// Use the catalogued image conic as an ordinary wall when one exists; fall back to
    /// [`BranchPolicy::Covering`] otherwise.
    ClosedForm,
}

/// Image samples, each tagged with the branch of the source point it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedPolyline {
    pub points: Vec<Vec2>,
    pub branches: Vec<usize>,
    pub closed: bool,
}

impl TaggedPolyline {
    pub fn to_polyline(&self) -> Polyline {
        Polyline { points: self.points.clone(), closed: self.closed }
    }
}

#[derive(Debug, Clone)]
pub struct ImageComponent {
    pub name: String,
    pub closed_form: Option<ConicCoeffs>,
    pub polylines: Vec<TaggedPolyline>,
}

#[derive(Debug, Clone)]
pub struct MappedWall {
    pub wall: Wall,
    pub components: Vec<ImageComponent>,
}

/// Image of `wall` under `map`: sampled polylines with branch tags, the catalogued closed
/// form where one exists, and a target-plane wall built according to `policy`.
pub fn map_wall(
    map: ConformalMap,
    wall: &Wall,
    policy: BranchPolicy,
    n: usize,
    extent: f64,
) -> Result<MappedWall, GeometryError> {
    let mut components = Vec::with_capacity(wall.components.len());
    let mut out = Wall::new();
    for comp in &wall.components {
        let closed_form = match &comp.curve {
            Curve::Conic(c) => image_closed_form(map, c),
            _ => None,
        };
        let polylines = comp
            .curve
            .polylines(n, extent)?
            .into_iter()
            .map(|pl| {
                let (points, branches) = pl
                    .points
                    .iter()
                    .filter_map(|&z| map.forward(z).ok().map(|q| (q, map.branch_of(z))))
                    .unzip();
                TaggedPolyline { points, branches, closed: pl.closed }
            })
            .collect();
        let curve = match (policy, closed_form) {
            (BranchPolicy::ClosedForm, Some(c)) => Curve::Conic(c),
            _ => Curve::covering(map, comp.curve.clone()),
        };
        out.components.push(WallComponent { name: comp.name.clone(), curve, mask: comp.mask });
        components.push(ImageComponent { name: comp.name.clone(), closed_form, polylines });
    }
    Ok(MappedWall { wall: out, components })
}

/// Exact preimage: each component becomes `F ∘ φ`.
pub fn pull_wall(map: ConformalMap, wall: &Wall) -> Wall {
    Wall {
        components: wall
            .components
            .iter()
            .map(|c| WallComponent {
                name: c.name.clone(),
                curve: Curve::pullback(map, c.curve.clone()),
                mask: c.mask,
            })
            .collect(),
    }
}

fn is_centered(center: Option<Vec2>, scale: f64) -> bool {
    center.is_some_and(|c| c.norm() <= CENTER_EPS * scale.max(1.0))
}

/// Closed-form image of a conic, for the catalogued cases.
///
/// `Power{2}`: centered ellipses and hyperbolas go to conics with a focus at the origin
/// (equal-axis hyperbolas to lines), lines off the origin to parabolas, centered circles to
/// centered circles. `Power{k}`: centered circles and lines through the origin. Birkhoff:
/// centered circles to ellipses and lines through the origin to hyperbolas, both with foci
/// `(±1, 0)`. A hyperbola image covers only one branch of the returned conic.
pub fn image_closed_form(map: ConformalMap, conic: &ConicCoeffs) -> Option<ConicCoeffs> {
    let cls = conic.classify().ok()?;
    let theta = cls.axis_angle();
    let scale = cls.semi_axes.map_or(1.0, |(a, b)| a.max(b));
    match map {
        ConformalMap::Identity => Some(*conic),
        ConformalMap::Power { k } => {
            let kf = f64::from(k);
            match cls.kind {
                ConicKind::Circle if is_centered(cls.center, scale) => {
                    let r = cls.semi_axes?.0;
                    Some(ConicCoeffs::circle(r.powi(k as i32), Vec2::ZERO))
                }
                ConicKind::Line => {
                    let p = cls.vertex?;
                    let n = cls.axis.perp();
                    let c = n.dot(p);
                    if c.abs() <= CENTER_EPS * p.norm().max(1.0) {
                        Some(ConicCoeffs::line(Vec2::ZERO, Vec2::from_angle(kf * theta)))
                    } else if k == 2 {
                        // frame where the line reads z₁ = c with c > 0
                        let (n, c) = if c > 0.0 { (n, c) } else { (-n, -c) };
                        let phi = n.y.atan2(n.x);
                        let c2 = c * c;
                        Some(
                            ConicCoeffs::new(0.0, 0.0, 1.0 / (4.0 * c2), 1.0, 0.0, -c2)
                                .transformed(Vec2::ZERO, 2.0 * phi),
                        )
                    } else {
                        None
                    }
                }
                ConicKind::Ellipse if k == 2 && is_centered(cls.center, scale) => {
                    let (a, b) = cls.semi_axes?;
                    Some(
                        ConicCoeffs::ellipse(
                            0.5 * (a * a + b * b),
                            a * b,
                            Vec2::new(0.5 * (a * a - b * b), 0.0),
                            0.0,
                        )
                        .transformed(Vec2::ZERO, 2.0 * theta),
                    )
                }
                ConicKind::Hyperbola if k == 2 && is_centered(cls.center, scale) => {
                    let (a, b) = cls.semi_axes?;
                    let local = if (a - b).abs() <= CENTER_EPS * a {
                        ConicCoeffs::line(Vec2::new(a * a, 0.0), Vec2::new(0.0, 1.0))
                    } else {
                        ConicCoeffs::hyperbola(
                            0.5 * (a * a - b * b).abs(),
                            a * b,
                            Vec2::new(0.5 * (a * a + b * b), 0.0),
                            0.0,
                        )
                    };
                    Some(local.transformed(Vec2::ZERO, 2.0 * theta))
                }
                _ => None,
            }
        }
        ConformalMap::Birkhoff => match cls.kind {
            ConicKind::Circle if is_centered(cls.center, scale) => {
                let r = cls.semi_axes?.0;
                let b = 0.5 * (r - 1.0 / r).abs();
                if b <= CENTER_EPS {
                    return None;
                }
                Some(ConicCoeffs::ellipse(0.5 * (r + 1.0 / r), b, Vec2::ZERO, 0.0))
            }
            ConicKind::Line => {
                let p = cls.vertex?;
                if cls.axis.perp().dot(p).abs() > CENTER_EPS * p.norm().max(1.0) {
                    return None;
                }
                let (s, c) = theta.sin_cos();
                if s.abs() <= CENTER_EPS {
                    None
                } else if c.abs() <= CENTER_EPS {
                    Some(ConicCoeffs::line(Vec2::ZERO, Vec2::new(0.0, 1.0)))
                } else {
                    Some(ConicCoeffs::hyperbola(c.abs(), s.abs(), Vec2::ZERO, 0.0))
                }
            }
            _ => None,
        },
    }
}

/// Closed-form preimage under the Birkhoff map of a conic with foci `(±1, 0)`: a confocal
/// ellipse pulls back to two centered circles with radii `a ± b`, a confocal hyperbola to
/// the line pair `b² z₁² − a² z₂² = 0`.
pub fn preimage_closed_form(map: ConformalMap, conic: &ConicCoeffs) -> Option<Vec<ConicCoeffs>> {
    if map != ConformalMap::Birkhoff {
        return None;
    }
    let cls = conic.classify().ok()?;
    let (a, b) = cls.semi_axes?;
    let tol = 1e-10;
    if !is_centered(cls.center, a) || cls.axis.y.abs() > tol {
        return None;
    }
    match cls.kind {
        ConicKind::Ellipse if (a * a - b * b - 1.0).abs() <= tol * a * a => {
            let rho = a + b;
            Some(vec![
                ConicCoeffs::circle(rho, Vec2::ZERO),
                ConicCoeffs::circle(1.0 / rho, Vec2::ZERO),
            ])
        }
        ConicKind::Hyperbola if (a * a + b * b - 1.0).abs() <= tol => {
            Some(vec![ConicCoeffs::new(b * b, 0.0, -a * a, 0.0, 0.0, 0.0)])
        }
        _ => None,
    }
}
