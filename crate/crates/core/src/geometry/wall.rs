//! Implicit curves and reflection walls built from them.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::conformal::ConformalMap;
use crate::geometry::{ConicCoeffs, GeometryError, Polyline};
use crate::vec2::Vec2;

pub const PROJECTION_TOL: f64 = 1e-13;
pub const PROJECTION_MAX_ITER: usize = 50;

/// User-supplied implicit curve `F(q) = 0` with analytic gradient.
pub trait ImplicitCurve: Send + Sync + fmt::Debug {
    fn value(&self, q: Vec2) -> f64;
    fn gradient(&self, q: Vec2) -> Vec2;
    /// Polylines tracing the zero set, used for sampling and plotting.
    fn polylines(&self, _n: usize, _extent: f64) -> Vec<Polyline> {
        Vec::new()
    }
}

#[derive(Debug, Clone)]
pub enum Curve {
    Conic(ConicCoeffs),
    /// Exact preimage `F ∘ φ` of `source` under `map`.
    Pullback { map: ConformalMap, source: Arc<Curve> },
    /// Image of `source` under a many-to-one `map`. Evaluated on one inverse branch at a time:
    /// `F_source(ψ(q))` with `ψ` either chosen by continuity or the branch closest to the
    /// curve.
    Covering { map: ConformalMap, source: Arc<Curve> },
    Custom(Arc<dyn ImplicitCurve>),
}

impl From<ConicCoeffs> for Curve {
    fn from(c: ConicCoeffs) -> Self {
        Curve::Conic(c)
    }
}

impl Curve {
    pub fn pullback(map: ConformalMap, source: impl Into<Curve>) -> Self {
        Curve::Pullback { map, source: Arc::new(source.into()) }
    }

    pub fn covering(map: ConformalMap, source: impl Into<Curve>) -> Self {
        Curve::Covering { map, source: Arc::new(source.into()) }
    }

    pub fn is_covering(&self) -> bool {
        matches!(self, Curve::Covering { .. })
    }

    pub fn value(&self, q: Vec2) -> f64 {
        self.eval_and_gradient(q).0
    }

    pub fn gradient(&self, q: Vec2) -> Vec2 {
        self.eval_and_gradient(q).1
    }

    /// `F(q)` and the unnormalized normal `∇F(q)`. Covering curves use the branch on which
    /// `|F_source|` is smallest.
    pub fn eval_and_gradient(&self, q: Vec2) -> (f64, Vec2) {
        match self {
            Curve::Conic(c) => (c.eval(q), c.gradient(q)),
            Curve::Pullback { map, source } => {
                let Ok(x) = map.forward(q) else {
                    return (f64::NAN, Vec2::new(f64::NAN, f64::NAN));
                };
                let (v, g) = source.eval_and_gradient(x);
                // ∇(F∘φ) = conj(φ') ∇F in complex notation
                let d = map.derivative(q).conj();
                (v, Vec2::from_complex(d * g.to_complex()))
            }
            Curve::Covering { map, source } => {
                let Ok(branches) = map.inverse_branches(q) else {
                    return (f64::NAN, Vec2::new(f64::NAN, f64::NAN));
                };
                branches
                    .into_iter()
                    .map(|z| covering_eval(*map, source, z))
                    .min_by(|a, b| a.0.abs().total_cmp(&b.0.abs()))
                    .expect("at least one branch")
            }
            Curve::Custom(c) => (c.value(q), c.gradient(q)),
        }
    }

    /// Evaluate a covering curve on the inverse branch nearest `hint`. Returns the value, the
    /// target-plane gradient and the chosen preimage. Non-covering curves ignore `hint`.
    pub fn eval_on_branch(&self, q: Vec2, hint: Vec2) -> (f64, Vec2, Vec2) {
        match self {
            Curve::Covering { map, source } => match map.nearest_branch(q, hint) {
                Ok(z) => {
                    let (v, g) = covering_eval(*map, source, z);
                    (v, g, z)
                }
                Err(_) => (f64::NAN, Vec2::new(f64::NAN, f64::NAN), hint),
            },
            _ => {
                let (v, g) = self.eval_and_gradient(q);
                (v, g, hint)
            }
        }
    }

    /// Polylines tracing the zero set, clipped to about `extent` for unbounded curves.
    pub fn polylines(&self, n: usize, extent: f64) -> Result<Vec<Polyline>, GeometryError> {
        match self {
            Curve::Conic(c) => c.polylines(n, extent),
            Curve::Pullback { map, source } => {
                let src = source.polylines(n, source_extent(*map, extent))?;
                Ok(src.iter().flat_map(|pl| preimage_polylines(*map, pl)).collect())
            }
            Curve::Covering { map, source } => {
                let src = source.polylines(n, extent)?;
                Ok(src
                    .into_iter()
                    .map(|pl| Polyline {
                        points: pl
                            .points
                            .iter()
                            .filter_map(|&z| map.forward(z).ok())
                            .collect(),
                        closed: pl.closed,
                    })
                    .collect())
            }
            Curve::Custom(c) => {
                let lines = c.polylines(n, extent);
                if lines.is_empty() {
                    Err(GeometryError::NotSampleable)
                } else {
                    Ok(lines)
                }
            }
        }
    }
}

fn covering_eval(map: ConformalMap, source: &Curve, z: Vec2) -> (f64, Vec2) {
    let (v, g) = source.eval_and_gradient(z);
    // q-gradient of F∘ψ is conj(ψ') ∇F with ψ' = 1/φ'(z)
    let d = map.derivative(z);
    let dpsi = d.inv().conj();
    (v, Vec2::from_complex(dpsi * g.to_complex()))
}

fn source_extent(map: ConformalMap, extent: f64) -> f64 {
    match map {
        ConformalMap::Identity => extent,
        ConformalMap::Power { k } => extent.powi(k as i32),
        ConformalMap::Birkhoff => extent,
    }
}

/// Continuity-tracked preimages of a polyline, one per starting branch.
fn preimage_polylines(map: ConformalMap, pl: &Polyline) -> Vec<Polyline> {
    let Some(&first) = pl.points.first() else {
        return Vec::new();
    };
    let Ok(starts) = map.inverse_branches(first) else {
        return Vec::new();
    };
    starts
        .into_iter()
        .map(|z0| {
            let mut pts = Vec::with_capacity(pl.points.len());
            let mut z = z0;
            pts.push(z);
            for &q in &pl.points[1..] {
                if let Ok(next) = map.nearest_branch(q, z) {
                    z = next;
                    pts.push(z);
                }
            }
            let closed = pl.closed && pts.last().is_some_and(|l| l.distance(z0) < 0.5 * z0.norm());
            Polyline { points: pts, closed }
        })
        .collect()
}

/// Newton iteration along the gradient until `|F| <= PROJECTION_TOL`.
pub fn project_onto(curve: &Curve, q0: Vec2) -> Result<Vec2, GeometryError> {
    let mut q = q0;
    let mut residual = f64::INFINITY;
    for _ in 0..PROJECTION_MAX_ITER {
        let (v, g) = curve.eval_and_gradient(q);
        residual = v.abs();
        if residual <= PROJECTION_TOL {
            return Ok(q);
        }
        let gn = g.norm_sq();
        if gn == 0.0 || !gn.is_finite() {
            break;
        }
        q -= g * (v / gn);
    }
    let v = curve.value(q).abs();
    if v <= PROJECTION_TOL {
        Ok(q)
    } else {
        Err(GeometryError::ProjectionFailed { residual: v.min(residual) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReflectMask {
    Reflect,
    /// Crossings are ignored.
    PassThrough,
}

#[derive(Debug, Clone)]
pub struct WallComponent {
    pub name: String,
    pub curve: Curve,
    pub mask: ReflectMask,
}

impl WallComponent {
    pub fn reflects(&self) -> bool {
        self.mask == ReflectMask::Reflect
    }

    pub fn eval_and_gradient(&self, q: Vec2) -> (f64, Vec2) {
        self.curve.eval_and_gradient(q)
    }
}

/// Union of curve components. Each component reflects or passes through independently.
/// Components built on [`Curve::Covering`] reflect only when the trajectory's continuity-tracked
/// preimage lies on the source curve, so crossings through the image of another branch are
/// pass-throughs.
#[derive(Debug, Clone, Default)]
pub struct Wall {
    pub components: Vec<WallComponent>,
}

impl Wall {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(curve: impl Into<Curve>) -> Self {
        Self::new().with("wall", curve)
    }

    pub fn with(mut self, name: impl Into<String>, curve: impl Into<Curve>) -> Self {
        self.components.push(WallComponent {
            name: name.into(),
            curve: curve.into(),
            mask: ReflectMask::Reflect,
        });
        self
    }

    pub fn with_pass_through(mut self, name: impl Into<String>, curve: impl Into<Curve>) -> Self {
        self.components.push(WallComponent {
            name: name.into(),
            curve: curve.into(),
            mask: ReflectMask::PassThrough,
        });
        self
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn reflecting(&self) -> impl Iterator<Item = (usize, &WallComponent)> {
        self.components.iter().enumerate().filter(|(_, c)| c.reflects())
    }

    /// Sampler drawing points on reflecting components, uniform in arc length.
    pub fn sampler(&self, extent: f64) -> Result<WallSampler, GeometryError> {
        WallSampler::new(self, extent)
    }
}

/// Arc-length uniform sampling of wall points followed by Newton projection.
#[derive(Debug, Clone)]
pub struct WallSampler {
    pieces: Vec<(usize, Polyline, f64)>,
    total: f64,
    curves: Vec<Curve>,
}

const SAMPLER_RESOLUTION: usize = 4096;

impl WallSampler {
    pub fn new(wall: &Wall, extent: f64) -> Result<Self, GeometryError> {
        let mut pieces = Vec::new();
        for (i, comp) in wall.reflecting() {
            for pl in comp.curve.polylines(SAMPLER_RESOLUTION, extent)? {
                let len = pl.length();
                if len > 0.0 && len.is_finite() {
                    pieces.push((i, pl, len));
                }
            }
        }
        let total = pieces.iter().map(|p| p.2).sum::<f64>();
        if pieces.is_empty() {
            return Err(GeometryError::NotSampleable);
        }
        Ok(Self {
            pieces,
            total,
            curves: wall.components.iter().map(|c| c.curve.clone()).collect(),
        })
    }

    /// Point at global arc-length fraction `u`, projected onto its component.
    pub fn point_at(&self, u: f64) -> Result<(usize, Vec2), GeometryError> {
        let mut target = u.clamp(0.0, 1.0) * self.total;
        let mut chosen = self.pieces.last().expect("nonempty");
        for piece in &self.pieces {
            if target <= piece.2 {
                chosen = piece;
                break;
            }
            target -= piece.2;
        }
        let frac = (target / chosen.2).clamp(0.0, 1.0);
        let guess = chosen.1.point_at_fraction(frac);
        let q = project_onto(&self.curves[chosen.0], guess)?;
        Ok((chosen.0, q))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(usize, Vec2), GeometryError> {
        let u: f64 = rng.random();
        self.point_at(u)
    }
}
