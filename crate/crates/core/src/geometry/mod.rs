//! Planar conics, implicit curves and reflection walls.

mod conic;
mod wall;

pub use conic::{focused_conic, ConicClass, ConicCoeffs, ConicKind, FocusedKind, EIGEN_EPS};
pub use wall::{
    project_onto, Curve, ImplicitCurve, ReflectMask, Wall, WallComponent, WallSampler,
    PROJECTION_MAX_ITER, PROJECTION_TOL,
};

use crate::vec2::Vec2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("degenerate conic: quadratic and linear parts vanish")]
    Degenerate,
    #[error("conic has an empty real locus")]
    Inconsistent,
    #[error("invalid axis pair a = {a}, b = {b}")]
    InvalidAxes { a: f64, b: f64 },
    #[error("curve does not provide a sampling parametrization")]
    NotSampleable,
    #[error("projection onto the curve did not converge (|F| = {residual:e})")]
    ProjectionFailed { residual: f64 },
}

/// Ordered sample points along a curve.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<Vec2>,
    pub closed: bool,
}

impl Polyline {
    pub fn open(points: Vec<Vec2>) -> Self {
        Self { points, closed: false }
    }

    pub fn closed(points: Vec<Vec2>) -> Self {
        Self { points, closed: true }
    }

    pub fn segments(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.points.len();
        let m = if self.closed { n } else { n.saturating_sub(1) };
        (0..m).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| a.distance(b)).sum()
    }

    /// Point at arc-length fraction `u` in `[0, 1)`.
    pub fn point_at_fraction(&self, u: f64) -> Vec2 {
        let total = self.length();
        let mut target = u.clamp(0.0, 1.0) * total;
        for (a, b) in self.segments() {
            let l = a.distance(b);
            if target <= l && l > 0.0 {
                return a + (b - a) * (target / l);
            }
            target -= l;
        }
        *self.points.last().expect("nonempty polyline")
    }

    /// Resample to `n` points equally spaced in arc length.
    pub fn resampled(&self, n: usize) -> Polyline {
        let denom = if self.closed { n } else { n.saturating_sub(1).max(1) };
        let pts = (0..n)
            .map(|i| self.point_at_fraction(i as f64 / denom as f64))
            .collect();
        Polyline { points: pts, closed: self.closed }
    }

    pub fn bounding_box(&self) -> Option<(Vec2, Vec2)> {
        bounding_box(self.points.iter().copied())
    }
}

pub fn bounding_box(points: impl IntoIterator<Item = Vec2>) -> Option<(Vec2, Vec2)> {
    let mut it = points.into_iter().filter(|p| p.is_finite());
    let first = it.next()?;
    Some(it.fold((first, first), |(lo, hi), p| {
        (
            Vec2::new(lo.x.min(p.x), lo.y.min(p.y)),
            Vec2::new(hi.x.max(p.x), hi.y.max(p.y)),
        )
    }))
}

/// Transversal crossings between segments of the given polylines. Consecutive segments
/// meeting at their common vertex do not count. Points closer than `merge_tol` are merged.
pub fn self_intersections(lines: &[Polyline], merge_tol: f64) -> Vec<Vec2> {
    let segs: Vec<(Vec2, Vec2)> = lines.iter().flat_map(|l| l.segments()).collect();
    let mut found: Vec<Vec2> = Vec::new();
    for (i, &(a, b)) in segs.iter().enumerate() {
        let r = b - a;
        let (lo_i, hi_i) = (a.x.min(b.x), a.x.max(b.x));
        for &(c, d) in &segs[i + 1..] {
            if c.x.max(d.x) < lo_i || c.x.min(d.x) > hi_i {
                continue;
            }
            let s = d - c;
            let den = r.cross(s);
            if den.abs() < 1e-300 {
                continue;
            }
            let w = c - a;
            let t = w.cross(s) / den;
            let u = w.cross(r) / den;
            // half-open parameter ranges count a crossing at a shared vertex once
            let eps = 1e-9;
            if t > -eps && t < 1.0 - eps && u > -eps && u < 1.0 - eps {
                let p = a + r * t;
                if found.iter().all(|q| q.distance(p) > merge_tol) {
                    found.push(p);
                }
            }
        }
    }
    found
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyline_resampling_is_uniform() {
        let sq = Polyline::closed(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ]);
        assert!((sq.length() - 4.0).abs() < 1e-15);
        let r = sq.resampled(8);
        assert_eq!(r.points[2], Vec2::new(1.0, 0.0));
        assert_eq!(r.points[5], Vec2::new(0.5, 1.0));
    }

    #[test]
    fn figure_eight_has_one_crossing() {
        let pts = (0..400)
            .map(|i| {
                let t = std::f64::consts::TAU * i as f64 / 400.0;
                Vec2::new(t.sin(), t.sin() * t.cos())
            })
            .collect();
        let hits = self_intersections(&[Polyline::closed(pts)], 1e-6);
        assert_eq!(hits.len(), 1);
        assert!(hits[0].norm() < 1e-9);
    }
}
