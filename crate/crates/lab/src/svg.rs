//! Plain SVG documents made of polyline paths, with a y-up coordinate frame.
//!
//! Coordinates are written with shortest round-trip `f64` formatting, so every emitted point
//! parses back to the exact value it was computed as. Each path carries `data-*` attributes
//! naming the curve it samples, which lets tests re-evaluate implicit equations on the file.

use std::fmt::Write;

use confbill_core::geometry::bounding_box;
use confbill_core::{ConformalMap, ConicCoeffs, Vec2};

/// Fraction of the bounding box added on each side.
pub const MARGIN: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// Curve in the plane where it was specified.
    Source,
    /// Image of a source curve under a conformal map.
    Image,
    /// Closed-form preimage of a curve.
    Preimage,
    Wall,
    Trajectory,
    Event,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Source => "source",
            Role::Image => "image",
            Role::Preimage => "preimage",
            Role::Wall => "wall",
            Role::Trajectory => "trajectory",
            Role::Event => "event",
        }
    }

    fn stroke(self) -> &'static str {
        match self {
            Role::Source | Role::Preimage => "#1f77b4",
            Role::Image => "#d62728",
            Role::Wall => "#222222",
            Role::Trajectory => "#2ca02c",
            Role::Event => "#ff7f0e",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SvgPath {
    pub role: Role,
    pub points: Vec<Vec2>,
    pub closed: bool,
    /// Conic whose zero set the points sample; for images, the source conic.
    pub conic: Option<ConicCoeffs>,
    /// Map sending the conic's zero set onto the points.
    pub map: Option<ConformalMap>,
    /// Catalogued image conic, when one exists.
    pub image_conic: Option<ConicCoeffs>,
}

impl SvgPath {
    pub fn new(role: Role, points: Vec<Vec2>, closed: bool) -> Self {
        Self { role, points, closed, conic: None, map: None, image_conic: None }
    }

    pub fn conic(mut self, c: ConicCoeffs) -> Self {
        self.conic = Some(c);
        self
    }

    pub fn mapped(mut self, map: ConformalMap, image: Option<ConicCoeffs>) -> Self {
        self.map = Some(map);
        self.image_conic = image;
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct Svg {
    pub title: String,
    pub paths: Vec<SvgPath>,
}

fn coeffs_attr(c: &ConicCoeffs) -> String {
    c.as_array().iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

fn map_attr(m: ConformalMap) -> String {
    match m {
        ConformalMap::Identity => "identity".into(),
        ConformalMap::Power { k } => format!("power:{k}"),
        ConformalMap::Birkhoff => "birkhoff".into(),
    }
}

fn parse_map(s: &str) -> Option<ConformalMap> {
    match s {
        "identity" => Some(ConformalMap::Identity),
        "birkhoff" => Some(ConformalMap::Birkhoff),
        _ => s.strip_prefix("power:")?.parse().ok().map(|k| ConformalMap::Power { k }),
    }
}

impl Svg {
    pub fn new(title: impl Into<String>) -> Self {
        Self { title: title.into(), paths: Vec::new() }
    }

    pub fn push(&mut self, path: SvgPath) {
        self.paths.push(path);
    }

    /// `(min, max)` of all path points, widened by [`MARGIN`] on each side.
    pub fn view_box(&self) -> (Vec2, Vec2) {
        let (lo, hi) = bounding_box(self.paths.iter().flat_map(|p| p.points.iter().copied()))
            .unwrap_or((Vec2::new(-1.0, -1.0), Vec2::new(1.0, 1.0)));
        let span = Vec2::new((hi.x - lo.x).max(1e-9), (hi.y - lo.y).max(1e-9));
        let m = span * MARGIN;
        (lo - m, hi + m)
    }

    pub fn render(&self) -> String {
        let (lo, hi) = self.view_box();
        let (w, h) = (hi.x - lo.x, hi.y - lo.y);
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="600" height="{}">"#,
            lo.x,
            -hi.y,
            w,
            h,
            (600.0 * h / w).round().clamp(60.0, 2400.0)
        );
        let _ = writeln!(out, "<title>{}</title>", escape(&self.title));
        let _ = writeln!(out, r#"<g transform="scale(1,-1)" fill="none">"#);
        for p in &self.paths {
            if p.points.is_empty() {
                continue;
            }
            let _ = write!(
                out,
                r#"<path data-role="{}" stroke="{}" stroke-width="1" vector-effect="non-scaling-stroke""#,
                p.role.as_str(),
                p.role.stroke()
            );
            if let Some(c) = &p.conic {
                let _ = write!(out, r#" data-conic="{}""#, coeffs_attr(c));
            }
            if let Some(m) = p.map {
                let _ = write!(out, r#" data-map="{}""#, map_attr(m));
            }
            if let Some(c) = &p.image_conic {
                let _ = write!(out, r#" data-image-conic="{}""#, coeffs_attr(c));
            }
            out.push_str(r#" d=""#);
            for (i, q) in p.points.iter().enumerate() {
                let _ = write!(out, "{}{} {}", if i == 0 { "M" } else { " L" }, q.x, q.y);
            }
            if p.closed {
                out.push_str(" Z");
            }
            out.push_str("\"/>\n");
        }
        out.push_str("</g>\n</svg>\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// A path read back from a rendered document.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedPath {
    pub role: String,
    pub conic: Option<ConicCoeffs>,
    pub map: Option<ConformalMap>,
    pub image_conic: Option<ConicCoeffs>,
    pub points: Vec<Vec2>,
}

fn attr<'a>(tag: &'a str, name: &str) -> Option<&'a str> {
    let key = format!(" {name}=\"");
    let start = tag.find(&key)? + key.len();
    let len = tag[start..].find('"')?;
    Some(&tag[start..start + len])
}

fn parse_coeffs(s: &str) -> Option<ConicCoeffs> {
    let v: Vec<f64> = s.split(' ').map(str::parse).collect::<Result<_, _>>().ok()?;
    Some(ConicCoeffs::from_array(v.try_into().ok()?))
}

/// Paths of a document produced by [`Svg::render`].
pub fn parse_paths(doc: &str) -> Vec<ParsedPath> {
    doc.lines()
        .filter(|l| l.starts_with("<path "))
        .map(|tag| {
            let nums: Vec<f64> = attr(tag, "d")
                .unwrap_or("")
                .split([' ', 'M', 'L', 'Z'])
                .filter(|s| !s.is_empty())
                .filter_map(|s| s.parse().ok())
                .collect();
            ParsedPath {
                role: attr(tag, "data-role").unwrap_or("").to_string(),
                conic: attr(tag, "data-conic").and_then(parse_coeffs),
                map: attr(tag, "data-map").and_then(parse_map),
                image_conic: attr(tag, "data-image-conic").and_then(parse_coeffs),
                points: nums.chunks_exact(2).map(|c| Vec2::new(c[0], c[1])).collect(),
            }
        })
        .collect()
}

/// Residual of a point against its path's defining equation: `|F|` of the normalized conic,
/// minimized over the preimages when the path is an image under a map.
pub fn implicit_residual(path: &ParsedPath, q: Vec2) -> Option<f64> {
    let c = path.conic?.normalized();
    match path.map {
        None | Some(ConformalMap::Identity) => Some(c.eval(q).abs()),
        Some(m) => {
            let zs = m.inverse_branches(q).ok()?;
            zs.into_iter().map(|z| c.eval(z).abs()).min_by(f64::total_cmp)
        }
    }
}
