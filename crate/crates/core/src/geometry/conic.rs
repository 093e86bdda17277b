//! General conic sections `A x² + B xy + C y² + D x + E y + F = 0` and their classification.

use std::f64::consts::PI;

use crate::geometry::{GeometryError, Polyline};
use crate::vec2::Vec2;

/// Relative threshold below which an eigenvalue of the quadratic part counts as zero.
pub const EIGEN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConicKind {
    Ellipse,
    Hyperbola,
    Parabola,
    Line,
    LinePair,
    Circle,
    Degenerate,
}

/// Geometric description of a conic.
#[derive(Debug, Clone, PartialEq)]
pub struct ConicClass {
    pub kind: ConicKind,
    /// Absent for parabolas and single lines.
    pub center: Option<Vec2>,
    /// `(a, b)` with `a` along [`ConicClass::axis`]; for ellipses `a >= b`.
    pub semi_axes: Option<(f64, f64)>,
    pub eccentricity: f64,
    pub foci: Vec<Vec2>,
    /// Unit vector along the major (ellipse), transverse (hyperbola) or opening (parabola)
    /// axis. For lines this is the line direction.
    pub axis: Vec2,
    /// Parabola vertex, or a point on the line for `Line`.
    pub vertex: Option<Vec2>,
}

impl ConicClass {
    /// Distance between the center and a focus (`c = a e`). Zero for circles.
    pub fn focal_distance(&self) -> Option<f64> {
        match (self.kind, self.semi_axes) {
            (ConicKind::Circle, _) => Some(0.0),
            (ConicKind::Ellipse, Some((a, b))) => Some((a * a - b * b).max(0.0).sqrt()),
            (ConicKind::Hyperbola, Some((a, b))) => Some((a * a + b * b).sqrt()),
            _ => None,
        }
    }

    /// Rotation angle of [`ConicClass::axis`] in `(-pi, pi]`.
    pub fn axis_angle(&self) -> f64 {
        self.axis.y.atan2(self.axis.x)
    }
}

impl ConicCoeffs {
    pub const fn new(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Self {
        Self { a, b, c, d, e, f }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.a, self.b, self.c, self.d, self.e, self.f]
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Self::new(v[0], v[1], v[2], v[3], v[4], v[5])
    }

    pub fn scaled(&self, s: f64) -> Self {
        let v = self.as_array().map(|x| x * s);
        Self::from_array(v)
    }

    /// Canonical representative: largest-magnitude coefficient scaled to `±1`.
    pub fn normalized(&self) -> Self {
        let m = self
            .as_array()
            .into_iter()
            .fold(0.0_f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
        if m == 0.0 {
            *self
        } else {
            self.scaled(1.0 / m.abs())
        }
    }

    #[inline]
    pub fn eval(&self, q: Vec2) -> f64 {
        let (x, y) = (q.x, q.y);
        self.a * x * x + self.b * x * y + self.c * y * y + self.d * x + self.e * y + self.f
    }

    #[inline]
    pub fn gradient(&self, q: Vec2) -> Vec2 {
        let (x, y) = (q.x, q.y);
        Vec2::new(
            2.0 * self.a * x + self.b * y + self.d,
            self.b * x + 2.0 * self.c * y + self.e,
        )
    }

    /// Conic given in a local frame, moved so that the local origin sits at `center` and the
    /// local x axis points along angle `rotation`.
    pub fn transformed(&self, center: Vec2, rotation: f64) -> Self {
        let (s, c) = rotation.sin_cos();
        // local quadratic form M_l = [[a, b/2], [b/2, c]]; global M_g = R M_l R^T
        let (ma, mb, mc) = (self.a, self.b / 2.0, self.c);
        let ga = c * c * ma - 2.0 * c * s * mb + s * s * mc;
        let gb = c * s * ma + (c * c - s * s) * mb - c * s * mc;
        let gc = s * s * ma + 2.0 * c * s * mb + c * c * mc;
        let rl = Vec2::new(c * self.d - s * self.e, s * self.d + c * self.e);
        let mc_x = ga * center.x + gb * center.y;
        let mc_y = gb * center.x + gc * center.y;
        let d = -2.0 * mc_x + rl.x;
        let e = -2.0 * mc_y + rl.y;
        let f = center.x * mc_x + center.y * mc_y - rl.dot(center) + self.f;
        Self::new(ga, 2.0 * gb, gc, d, e, f)
    }

    /// `x'²/a² + y'²/b² = 1` in the frame given by `center` and `rotation`.
    pub fn ellipse(a: f64, b: f64, center: Vec2, rotation: f64) -> Self {
        Self::new(1.0 / (a * a), 0.0, 1.0 / (b * b), 0.0, 0.0, -1.0).transformed(center, rotation)
    }

    /// `x'²/a² - y'²/b² = 1` in the frame given by `center` and `rotation`.
    pub fn hyperbola(a: f64, b: f64, center: Vec2, rotation: f64) -> Self {
        Self::new(1.0 / (a * a), 0.0, -1.0 / (b * b), 0.0, 0.0, -1.0).transformed(center, rotation)
    }

    pub fn circle(r: f64, center: Vec2) -> Self {
        Self::new(1.0, 0.0, 1.0, 0.0, 0.0, -r * r).transformed(center, 0.0)
    }

    /// Line through `point` with direction `dir`.
    pub fn line(point: Vec2, dir: Vec2) -> Self {
        let n = dir.perp().normalized();
        Self::new(0.0, 0.0, 0.0, n.x, n.y, -n.dot(point))
    }

    /// Parabola `y' = x'² / (4p)` with vertex at `vertex`, opening along angle `rotation + pi/2`.
    /// The focus sits at distance `p` from the vertex.
    pub fn parabola(p: f64, vertex: Vec2, rotation: f64) -> Self {
        Self::new(1.0 / (4.0 * p), 0.0, 0.0, 0.0, -1.0, 0.0).transformed(vertex, rotation)
    }

    fn quad_scale(&self) -> f64 {
        self.a.abs().max(self.b.abs()).max(self.c.abs())
    }

    /// Classify the conic. See [`ConicClass`].
    pub fn classify(&self) -> Result<ConicClass, GeometryError> {
        let s = self.quad_scale();
        if s == 0.0 || !s.is_finite() {
            return self.classify_linear();
        }
        let half_sum = (self.a + self.c) / 2.0;
        let rad = ((self.a - self.c) / 2.0).hypot(self.b / 2.0);
        let l1 = half_sum + rad;
        let l2 = half_sum - rad;
        let phi = 0.5 * self.b.atan2(self.a - self.c);
        let u1 = Vec2::from_angle(phi);
        let u2 = u1.perp();
        let zero1 = l1.abs() <= EIGEN_EPS * s;
        let zero2 = l2.abs() <= EIGEN_EPS * s;
        match (zero1, zero2) {
            (true, true) => self.classify_linear(),
            (false, false) => self.classify_central(l1, l2, u1, u2),
            (false, true) => self.classify_parabolic(l1, u1, u2),
            (true, false) => self.classify_parabolic(l2, u2, -u1),
        }
    }

    fn classify_linear(&self) -> Result<ConicClass, GeometryError> {
        let g = Vec2::new(self.d, self.e);
        let gn = g.norm();
        if gn == 0.0 {
            return Err(GeometryError::Degenerate);
        }
        let point = g * (-self.f / (gn * gn));
        Ok(ConicClass {
            kind: ConicKind::Line,
            center: None,
            semi_axes: None,
            eccentricity: f64::INFINITY,
            foci: Vec::new(),
            axis: g.perp() / gn,
            vertex: Some(point),
        })
    }

    fn classify_central(
        &self,
        l1: f64,
        l2: f64,
        u1: Vec2,
        u2: Vec2,
    ) -> Result<ConicClass, GeometryError> {
        // Solve M c = -(D, E)/2 with M = [[A, B/2], [B/2, C]].
        let det = self.a * self.c - self.b * self.b / 4.0;
        let cx = (-self.d / 2.0 * self.c + self.e / 2.0 * self.b / 2.0) / det;
        let cy = (-self.e / 2.0 * self.a + self.d / 2.0 * self.b / 2.0) / det;
        let center = Vec2::new(cx, cy);
        let f0 = self.f + (self.d * cx + self.e * cy) / 2.0;
        let f_scale = self.f.abs() + (self.d * cx).abs() + (self.e * cy).abs();
        let f_zero = f0.abs() <= EIGEN_EPS * f_scale.max(self.quad_scale() * center.norm_sq());
        if l1.signum() == l2.signum() {
            if f_zero {
                return Err(GeometryError::Degenerate);
            }
            if f0.signum() == l1.signum() {
                return Err(GeometryError::Inconsistent);
            }
            let r1 = (-f0 / l1).sqrt();
            let r2 = (-f0 / l2).sqrt();
            let (a, b, axis) = if r1 >= r2 { (r1, r2, u1) } else { (r2, r1, u2) };
            if (a - b).abs() <= EIGEN_EPS * a {
                return Ok(ConicClass {
                    kind: ConicKind::Circle,
                    center: Some(center),
                    semi_axes: Some((a, a)),
                    eccentricity: 0.0,
                    foci: vec![center],
                    axis,
                    vertex: None,
                });
            }
            let c = (a * a - b * b).sqrt();
            Ok(ConicClass {
                kind: ConicKind::Ellipse,
                center: Some(center),
                semi_axes: Some((a, b)),
                eccentricity: c / a,
                foci: vec![center - axis * c, center + axis * c],
                axis,
                vertex: None,
            })
        } else {
            if f_zero {
                let (lt, lo) = if l1 > 0.0 { (l1, l2) } else { (l2, l1) };
                return Ok(ConicClass {
                    kind: ConicKind::LinePair,
                    center: Some(center),
                    semi_axes: None,
                    eccentricity: (1.0 + lt.abs() / lo.abs()).sqrt(),
                    foci: Vec::new(),
                    axis: if l1 > 0.0 { u1 } else { u2 },
                    vertex: None,
                });
            }
            // transverse axis: eigen-direction whose eigenvalue has the sign opposite to f0
            let (lt, lo, axis) = if l1.signum() != f0.signum() {
                (l1, l2, u1)
            } else {
                (l2, l1, u2)
            };
            let a = (-f0 / lt).sqrt();
            let b = (f0 / lo).sqrt();
            let c = (a * a + b * b).sqrt();
            Ok(ConicClass {
                kind: ConicKind::Hyperbola,
                center: Some(center),
                semi_axes: Some((a, b)),
                eccentricity: c / a,
                foci: vec![center - axis * c, center + axis * c],
                axis,
                vertex: None,
            })
        }
    }

    /// `lam` is the nonzero eigenvalue with eigenvector `u1`; `u2` spans the kernel.
    fn classify_parabolic(&self, lam: f64, u1: Vec2, u2: Vec2) -> Result<ConicClass, GeometryError> {
        let lin = Vec2::new(self.d, self.e);
        let d1 = lin.dot(u1);
        let e1 = lin.dot(u2);
        let s = self.quad_scale();
        let lin_scale = (lin.norm() + self.f.abs().sqrt() * s.sqrt()).max(f64::MIN_POSITIVE);
        if e1.abs() <= EIGEN_EPS * lin_scale {
            // lam (x' + d1/(2 lam))^2 = d1^2/(4 lam) - f
            let x0 = -d1 / (2.0 * lam);
            let rhs = (d1 * d1 / (4.0 * lam) - self.f) / lam;
            let rhs_scale = (d1 * d1 / (4.0 * lam * lam)).abs() + (self.f / lam).abs();
            if rhs.abs() <= EIGEN_EPS * rhs_scale.max(f64::MIN_POSITIVE) {
                return Ok(ConicClass {
                    kind: ConicKind::Line,
                    center: None,
                    semi_axes: None,
                    eccentricity: f64::INFINITY,
                    foci: Vec::new(),
                    axis: u2,
                    vertex: Some(u1 * x0),
                });
            }
            if rhs < 0.0 {
                return Err(GeometryError::Inconsistent);
            }
            return Ok(ConicClass {
                kind: ConicKind::LinePair,
                center: Some(u1 * x0),
                semi_axes: None,
                eccentricity: f64::INFINITY,
                foci: Vec::new(),
                axis: u2,
                vertex: None,
            });
        }
        let x0 = -d1 / (2.0 * lam);
        let y0 = -(lam * x0 * x0 + d1 * x0 + self.f) / e1;
        let kappa = -lam / e1;
        let p = 1.0 / (4.0 * kappa.abs());
        let opening = u2 * kappa.signum();
        let vertex = u1 * x0 + u2 * y0;
        Ok(ConicClass {
            kind: ConicKind::Parabola,
            center: None,
            semi_axes: None,
            eccentricity: 1.0,
            foci: vec![vertex + opening * p],
            axis: opening,
            vertex: Some(vertex),
        })
    }

    /// Sample polylines tracing the real locus, clipped to a parameter range reaching roughly
    /// `extent` away from the conic's center or vertex for unbounded kinds.
    pub fn polylines(&self, n: usize, extent: f64) -> Result<Vec<Polyline>, GeometryError> {
        let cls = self.classify()?;
        let n = n.max(8);
        let lines = match cls.kind {
            ConicKind::Ellipse | ConicKind::Circle => {
                let (a, b) = cls.semi_axes.expect("central conic");
                let c = cls.center.expect("central conic");
                let (ax, ay) = (cls.axis, cls.axis.perp());
                let pts = (0..n)
                    .map(|i| {
                        let u = 2.0 * PI * i as f64 / n as f64;
                        c + ax * (a * u.cos()) + ay * (b * u.sin())
                    })
                    .collect();
                vec![Polyline::closed(pts)]
            }
            ConicKind::Hyperbola => {
                let (a, b) = cls.semi_axes.expect("central conic");
                let c = cls.center.expect("central conic");
                let (ax, ay) = (cls.axis, cls.axis.perp());
                let umax = (extent.max(2.0 * a) / a).acosh();
                [1.0, -1.0]
                    .into_iter()
                    .map(|sgn| {
                        let pts = (0..n)
                            .map(|i| {
                                let u = -umax + 2.0 * umax * i as f64 / (n - 1) as f64;
                                c + ax * (sgn * a * u.cosh()) + ay * (b * u.sinh())
                            })
                            .collect();
                        Polyline::open(pts)
                    })
                    .collect()
            }
            ConicKind::Parabola => {
                let v = cls.vertex.expect("parabola vertex");
                let p = cls.focal_p();
                let tmax = (4.0 * p * extent).sqrt().max(extent.min(4.0 * p));
                let (ax, ay) = (cls.axis, cls.axis.perp());
                let pts = (0..n)
                    .map(|i| {
                        let t = -tmax + 2.0 * tmax * i as f64 / (n - 1) as f64;
                        v + ay * t + ax * (t * t / (4.0 * p))
                    })
                    .collect();
                vec![Polyline::open(pts)]
            }
            ConicKind::Line => {
                let p0 = cls.vertex.expect("line point");
                vec![segment(p0, cls.axis, extent, n)]
            }
            ConicKind::LinePair => self.line_pair_polylines(&cls, n, extent),
            ConicKind::Degenerate => Vec::new(),
        };
        Ok(lines)
    }

    fn line_pair_polylines(&self, cls: &ConicClass, n: usize, extent: f64) -> Vec<Polyline> {
        let c = cls.center.expect("line pair center");
        if cls.eccentricity.is_infinite() {
            // parallel lines along cls.axis, offset symmetric about c
            let u = cls.axis.perp();
            // along u the conic reads k t^2 + v0 = 0
            let v0 = self.eval(c);
            let k = self.eval(c + u) - v0;
            let t = (-v0 / k).sqrt();
            return vec![
                segment(c + u * t, cls.axis, extent, n),
                segment(c - u * t, cls.axis, extent, n),
            ];
        }
        // crossing lines through c: solve quadratic form Q(cos, sin) = 0 for directions
        let q = |t: f64| {
            let d = Vec2::from_angle(t);
            self.a * d.x * d.x + self.b * d.x * d.y + self.c * d.y * d.y
        };
        let mut dirs = Vec::new();
        let m = 720;
        for i in 0..m {
            let t0 = PI * i as f64 / m as f64;
            let t1 = PI * (i + 1) as f64 / m as f64;
            if q(t0) == 0.0 {
                dirs.push(t0);
            } else if q(t0).signum() != q(t1).signum() {
                let (mut lo, mut hi) = (t0, t1);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if q(lo).signum() == q(mid).signum() {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                dirs.push(0.5 * (lo + hi));
            }
        }
        dirs.into_iter()
            .map(|t| segment(c, Vec2::from_angle(t), extent, n))
            .collect()
    }
}

impl ConicClass {
    /// Vertex-to-focus distance of a parabola.
    fn focal_p(&self) -> f64 {
        match (self.vertex, self.foci.first()) {
            (Some(v), Some(f)) => v.distance(*f),
            _ => f64::NAN,
        }
    }
}

fn segment(p0: Vec2, dir: Vec2, extent: f64, n: usize) -> Polyline {
    let pts = (0..n)
        .map(|i| p0 + dir * (-extent + 2.0 * extent * i as f64 / (n - 1) as f64))
        .collect();
    Polyline::open(pts)
}

/// Shape requested from [`focused_conic`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FocusedKind {
    Ellipse,
    Hyperbola,
    /// `a` is the signed vertex distance `p`: `x = -y²/(4p) + p`.
    Parabola,
    Circle,
    /// `a` is the signed offset of the line `x = a`.
    Line,
}

/// Conic with one focus at the origin and major axis along the x axis, or, with
/// `focus_at_origin == false`, the centered conic with the same axes.
///
/// Ellipses need `a >= b > 0`; hyperbolas `a, b > 0`.
pub fn focused_conic(
    kind: FocusedKind,
    a: f64,
    b: f64,
    focus_at_origin: bool,
) -> Result<ConicCoeffs, GeometryError> {
    let bad = || GeometryError::InvalidAxes { a, b };
    if !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    match kind {
        FocusedKind::Ellipse => {
            if !(a >= b && b > 0.0) {
                return Err(bad());
            }
            let c = if focus_at_origin { (a * a - b * b).sqrt() } else { 0.0 };
            Ok(ConicCoeffs::ellipse(a, b, Vec2::new(c, 0.0), 0.0))
        }
        FocusedKind::Hyperbola => {
            if !(a > 0.0 && b > 0.0) {
                return Err(bad());
            }
            let c = if focus_at_origin { (a * a + b * b).sqrt() } else { 0.0 };
            Ok(ConicCoeffs::hyperbola(a, b, Vec2::new(c, 0.0), 0.0))
        }
        FocusedKind::Circle => {
            if a.is_nan() || a <= 0.0 {
                return Err(bad());
            }
            Ok(ConicCoeffs::circle(a, Vec2::ZERO))
        }
        FocusedKind::Parabola => {
            if a == 0.0 {
                return Err(bad());
            }
            if focus_at_origin {
                // x = -y^2/(4p) + p  <=>  y^2 + 4p x - 4p^2 = 0
                Ok(ConicCoeffs::new(0.0, 0.0, 1.0, 4.0 * a, 0.0, -4.0 * a * a))
            } else {
                Ok(ConicCoeffs::new(0.0, 0.0, 1.0, 4.0 * a, 0.0, 0.0))
            }
        }
        FocusedKind::Line => Ok(ConicCoeffs::new(0.0, 0.0, 0.0, 1.0, 0.0, -a)),
    }
}
