//! Images of conic walls under `z²`, `z³` and the Birkhoff map, written as SVG panels.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, TAU};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use confbill_core::conformal::{image_closed_form, map_wall, preimage_closed_form, BranchPolicy};
use confbill_core::geometry::{self_intersections, Polyline};
use confbill_core::{ConformalMap, ConicCoeffs, Vec2, Wall};

use crate::svg::{Role, Svg, SvgPath};
use crate::{write_file, LabError, Result};

/// Samples per source curve.
pub const SAMPLES: usize = 1024;
/// Half-width of the window used to cut unbounded source curves.
pub const EXTENT: f64 = 8.0;
/// Crossings closer than this are merged when counting self-intersections.
pub const MERGE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    Fig1,
    Fig3,
    Birkhoff,
}

impl Which {
    pub fn name(self) -> &'static str {
        match self {
            Which::Fig1 => "fig1",
            Which::Fig3 => "fig3",
            Which::Birkhoff => "birkhoff",
        }
    }
}

impl std::str::FromStr for Which {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Which::Fig1),
            "fig3" => Ok(Which::Fig3),
            "birkhoff" => Ok(Which::Birkhoff),
            _ => Err(LabError::Config(format!("unknown figure {s:?}; expected fig1, fig3 or birkhoff"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PanelKind {
    Ellipse,
    Hyperbola,
}

/// Conic `(z₁ − c₁)²/a² ± (z₂ − c₂)²/b² = 1` drawn together with its image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub label: char,
    pub kind: PanelKind,
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
}

const fn panel(label: char, kind: PanelKind, c1: f64, c2: f64) -> Panel {
    Panel { label, kind, a: 3.0, b: 2.0, c1, c2 }
}

use PanelKind::{Ellipse as E, Hyperbola as H};

pub const FIG1: [Panel; 7] = [
    panel('a', E, 2.0, 0.0),
    panel('b', E, 0.0, 1.0),
    panel('c', E, 2.0, 1.0),
    panel('d', E, 3.0, 4.0),
    panel('e', H, 2.0, 0.0),
    panel('f', E, 0.0, 1.0),
    panel('g', H, 3.0, 4.0),
];

pub const FIG3: [Panel; 8] = [
    panel('a', E, 0.0, 0.0),
    panel('b', E, 1.5, 0.0),
    panel('c', E, 0.0, 1.0),
    panel('d', E, 1.0, 1.0),
    panel('e', H, 0.0, 0.0),
    panel('f', E, 0.0, 1.0),
    panel('g', H, 1.0, 0.0),
    panel('h', H, 1.0, 1.0),
];

/// Semi-major axes of the confocal ellipses in the Birkhoff figure.
pub const BIRKHOFF_ELLIPSES: [f64; 3] = [1.25, 1.6, 2.2];
/// Angles of the origin lines whose images are the confocal hyperbolas.
pub const BIRKHOFF_LINES: [f64; 3] = [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3];

impl Panel {
    pub fn conic(&self) -> ConicCoeffs {
        let c = Vec2::new(self.c1, self.c2);
        match self.kind {
            PanelKind::Ellipse => ConicCoeffs::ellipse(self.a, self.b, c, 0.0),
            PanelKind::Hyperbola => ConicCoeffs::hyperbola(self.a, self.b, c, 0.0),
        }
    }

    pub fn describe(&self) -> String {
        let kind = match self.kind {
            PanelKind::Ellipse => "ellipse",
            PanelKind::Hyperbola => "hyperbola",
        };
        format!("{kind} a={} b={} c1={} c2={}", self.a, self.b, self.c1, self.c2)
    }
}

/// One drawn curve and what was measured on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub figure: &'static str,
    pub panel: String,
    pub description: String,
    pub map: ConformalMap,
    pub self_intersections: usize,
    /// Largest `|F|` of the catalogued image conic over the image points, if there is one.
    pub closed_form_residual: Option<f64>,
    /// Largest product of the normalized source equation over all preimages of an image
    /// point: the eliminated polynomial equation of the image curve.
    pub eliminant_residual: f64,
    pub svg: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FigureSet {
    pub rows: Vec<Row>,
}

impl FigureSet {
    pub fn row(&self, panel: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.panel == panel)
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "figure",
            "panel",
            "description",
            "map",
            "self_intersections",
            "closed_form_residual",
            "eliminant_residual",
            "svg",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.figure.to_string(),
                r.panel.clone(),
                r.description.clone(),
                r.map.to_string(),
                r.self_intersections.to_string(),
                r.closed_form_residual.map_or("none".into(), |x| format!("{x:e}")),
                format!("{:e}", r.eliminant_residual),
                r.svg.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default(),
            ])?;
        }
        Ok(w.into_inner().map_err(|e| e.into_error())?)
    }
}

fn conic_residual(c: &ConicCoeffs, pts: &[Vec2]) -> f64 {
    let n = c.normalized();
    pts.iter().map(|&q| n.eval(q).abs()).fold(0.0, f64::max)
}

fn eliminant_residual(map: ConformalMap, source: &ConicCoeffs, pts: &[Vec2]) -> f64 {
    let n = source.normalized();
    pts.iter()
        .map(|&q| match map.inverse_branches(q) {
            Ok(zs) => zs.iter().map(|&z| n.eval(z)).product::<f64>().abs(),
            Err(_) => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

fn render_panel(map: ConformalMap, fig: &'static str, p: &Panel, dir: &Path) -> Result<Row> {
    let conic = p.conic();
    let wall = Wall::single(conic);
    let mapped = map_wall(map, &wall, BranchPolicy::Covering, SAMPLES, EXTENT)?;
    let image = &mapped.components[0];
    let mut svg = Svg::new(format!("{fig} panel {}: {} under {map}", p.label, p.describe()));
    for pl in conic.polylines(SAMPLES, EXTENT)? {
        svg.push(SvgPath::new(Role::Source, pl.points, pl.closed).conic(conic));
    }
    let lines: Vec<Polyline> = image.polylines.iter().map(|t| t.to_polyline()).collect();
    for pl in &lines {
        svg.push(
            SvgPath::new(Role::Image, pl.points.clone(), pl.closed)
                .conic(conic)
                .mapped(map, image.closed_form),
        );
    }
    let points: Vec<Vec2> = lines.iter().flat_map(|l| l.points.iter().copied()).collect();
    let path = dir.join(format!("panel_{}.svg", p.label));
    write_file(&path, svg.render())?;
    Ok(Row {
        figure: fig,
        panel: p.label.to_string(),
        description: p.describe(),
        map,
        self_intersections: self_intersections(&lines, MERGE_TOL).len(),
        closed_form_residual: image.closed_form.map(|c| conic_residual(&c, &points)),
        eliminant_residual: eliminant_residual(map, &conic, &points),
        svg: path,
    })
}

/// Points of a centred circle of radius `r`.
fn circle_points(r: f64, n: usize) -> Vec<Vec2> {
    (0..n).map(|i| Vec2::from_angle(TAU * i as f64 / n as f64) * r).collect()
}

/// Points `t·(cos θ, sin θ)` with `|t|` log-spaced in `[1/reach, reach]`, one ray per sign.
fn ray_points(theta: f64, reach: f64, n: usize, sign: f64) -> Vec<Vec2> {
    let l = reach.ln();
    (0..n)
        .map(|i| {
            let s = -l + 2.0 * l * i as f64 / (n - 1) as f64;
            Vec2::from_angle(theta) * (sign * s.exp())
        })
        .collect()
}

fn forward_all(map: ConformalMap, pts: &[Vec2]) -> Result<Vec<Vec2>> {
    pts.iter()
        .map(|&z| map.forward(z).map_err(|e| LabError::Runtime(e.to_string())))
        .collect()
}

/// Confocal ellipses and hyperbolas with foci `(±1, 0)` next to their circle and line
/// preimages.
fn render_birkhoff(dir: &Path) -> Result<FigureSet> {
    let map = ConformalMap::Birkhoff;
    let mut source = Svg::new("birkhoff source plane: centred circles and origin lines");
    let mut target = Svg::new("birkhoff target plane: confocal ellipses and hyperbolas");
    let src_path = dir.join("source.svg");
    let tgt_path = dir.join("target.svg");
    let mut rows = Vec::new();

    for (i, &a) in BIRKHOFF_ELLIPSES.iter().enumerate() {
        let b = (a * a - 1.0).sqrt();
        let ellipse = ConicCoeffs::ellipse(a, b, Vec2::ZERO, 0.0);
        let circles = preimage_closed_form(map, &ellipse)
            .ok_or_else(|| LabError::Runtime(format!("no preimage for ellipse a={a}")))?;
        let mut pre_res = 0.0f64;
        let mut elim = 0.0f64;
        let mut cf = 0.0f64;
        let mut image_lines = Vec::new();
        for c in &circles {
            let r = c.classify()?.semi_axes.map_or(f64::NAN, |s| s.0);
            let pts = circle_points(r, SAMPLES);
            let img = forward_all(map, &pts)?;
            let closed = image_closed_form(map, c)
                .ok_or_else(|| LabError::Runtime(format!("no image for circle r={r}")))?;
            cf = cf.max(conic_residual(&closed, &img)).max(conic_residual(&ellipse, &img));
            elim = elim.max(eliminant_residual(map, c, &img));
            pre_res = pre_res.max(conic_residual(c, &pts));
            source.push(SvgPath::new(Role::Preimage, pts, true).conic(*c));
            target.push(SvgPath::new(Role::Image, img.clone(), true).conic(*c).mapped(map, Some(closed)));
            image_lines.push(Polyline::closed(img));
        }
        rows.push(Row {
            figure: "birkhoff",
            panel: format!("ellipse{}", i + 1),
            description: format!(
                "ellipse a={a} b={b} from circles r={} and r={}",
                a + b,
                1.0 / (a + b)
            ),
            map,
            self_intersections: self_intersections(&image_lines[..1], MERGE_TOL).len(),
            closed_form_residual: Some(cf.max(pre_res)),
            eliminant_residual: elim,
            svg: tgt_path.clone(),
        });
    }

    for (i, &theta) in BIRKHOFF_LINES.iter().enumerate() {
        let line = ConicCoeffs::line(Vec2::ZERO, Vec2::from_angle(theta));
        let closed = image_closed_form(map, &line)
            .ok_or_else(|| LabError::Runtime(format!("no image for line at {theta}")))?;
        let (ca, sa) = (theta.cos(), theta.sin());
        let hyperbola = ConicCoeffs::hyperbola(ca, sa, Vec2::ZERO, 0.0);
        let mut cf = 0.0f64;
        let mut elim = 0.0f64;
        let mut image_lines = Vec::new();
        for sign in [1.0, -1.0] {
            let pts = ray_points(theta, 6.0, SAMPLES, sign);
            let img = forward_all(map, &pts)?;
            cf = cf.max(conic_residual(&closed, &img)).max(conic_residual(&hyperbola, &img));
            elim = elim.max(eliminant_residual(map, &line, &img));
            source.push(SvgPath::new(Role::Preimage, pts, false).conic(line));
            target.push(SvgPath::new(Role::Image, img.clone(), false).conic(line).mapped(map, Some(closed)));
            image_lines.push(Polyline::open(img));
        }
        let pre = preimage_closed_form(map, &hyperbola)
            .ok_or_else(|| LabError::Runtime(format!("no preimage for hyperbola at {theta}")))?;
        let on_line: Vec<Vec2> = ray_points(theta, 6.0, 64, 1.0);
        cf = cf.max(conic_residual(&pre[0], &on_line));
        rows.push(Row {
            figure: "birkhoff",
            panel: format!("hyperbola{}", i + 1),
            description: format!("hyperbola a={ca} b={sa} from the origin line at angle {theta}"),
            map,
            self_intersections: self_intersections(&image_lines, MERGE_TOL).len(),
            closed_form_residual: Some(cf),
            eliminant_residual: elim,
            svg: tgt_path.clone(),
        });
    }
    write_file(&src_path, source.render())?;
    write_file(&tgt_path, target.render())?;
    Ok(FigureSet { rows })
}

/// Write the SVG panels of `which` and `summary.csv` into `out/<which>/`.
pub fn render(which: Which, out: &Path) -> Result<FigureSet> {
    let dir = out.join(which.name());
    let set = match which {
        Which::Fig1 => FigureSet {
            rows: FIG1
                .iter()
                .map(|p| render_panel(ConformalMap::Power { k: 2 }, "fig1", p, &dir))
                .collect::<Result<_>>()?,
        },
        Which::Fig3 => FigureSet {
            rows: FIG3
                .iter()
                .map(|p| render_panel(ConformalMap::Power { k: 3 }, "fig3", p, &dir))
                .collect::<Result<_>>()?,
        },
        Which::Birkhoff => render_birkhoff(&dir)?,
    };
    write_file(&dir.join("summary.csv"), set.to_csv()?)?;
    Ok(set)
}

/// Human-readable table of a figure set.
pub fn summary_text(set: &FigureSet) -> String {
    let mut s = String::new();
    for r in &set.rows {
        let _ = writeln!(
            s,
            "{} {:<10} {:<48} self-intersections={} closed-form={} eliminant={:e}",
            r.figure,
            r.panel,
            r.description,
            r.self_intersections,
            r.closed_form_residual.map_or("none".into(), |x| format!("{x:e}")),
            r.eliminant_residual
        );
    }
    s
}
