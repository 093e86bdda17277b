//! Scenario files: a TOML description of a field, walls, an optional duality and initial
//! states.

use std::path::{Path, PathBuf};

use confbill_core::conformal::{make_duality, DualityPairing};
use confbill_core::fields::stark_type_from_even_polynomials;
use confbill_core::geometry::{focused_conic, FocusedKind};
use confbill_core::{ConformalMap, ConicCoeffs, ForceField, PhaseState, SimConfig, Stop, Vec2, Wall};
use serde::Deserialize;

use crate::LabError;

/// Relative distance to the pairing level accepted for source initial states.
pub const LEVEL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: Option<String>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub field: FieldSpec,
    #[serde(default)]
    pub walls: Vec<WallSpec>,
    pub duality: Option<DualitySpec>,
    #[serde(default)]
    pub initial: Vec<InitialSpec>,
    #[serde(default)]
    pub stop: StopSpec,
    #[serde(default)]
    pub tolerances: TolSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Free,
    Hooke { f: f64 },
    Kepler { mu: f64 },
    RadialPower { s: f64, alpha: f64 },
    Stark { mu: f64, g: f64 },
    FrozenHill { mu: f64, g: f64 },
    TwoCenter { m1: f64, m2: f64 },
    TwoCenterDual { m1: f64, m2: f64, f: f64 },
    /// Even coefficient lists `[c₀, c₁, …]` of `g1(x)` and `g2(x)`.
    SeparableStarkCustom { mu: f64, g1: Vec<f64>, g2: Vec<f64> },
}

#[derive(Debug, Clone, Deserialize)]
pub struct WallSpec {
    pub name: Option<String>,
    #[serde(default = "yes")]
    pub reflect: bool,
    #[serde(flatten)]
    pub shape: ShapeSpec,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Ellipse {
        a: f64,
        b: f64,
        #[serde(default)]
        center: [f64; 2],
        #[serde(default, alias = "angle")]
        rotation: f64,
    },
    Hyperbola {
        a: f64,
        b: f64,
        #[serde(default)]
        center: [f64; 2],
        #[serde(default, alias = "angle")]
        rotation: f64,
    },
    Circle {
        r: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Line { point: [f64; 2], direction: [f64; 2] },
    /// `x' = −y'²/(4p) + p` about `vertex`, rotated by `rotation`.
    Parabola {
        p: f64,
        #[serde(default)]
        vertex: [f64; 2],
        #[serde(default, alias = "angle")]
        rotation: f64,
    },
    /// Conic with a focus at the origin and axis along `q₁`.
    Focused {
        conic: FocusedShape,
        a: f64,
        #[serde(default)]
        b: f64,
    },
    /// `a x² + b xy + c y² + d x + e y + f = 0`.
    Conic { coeffs: [f64; 6] },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FocusedShape {
    Ellipse,
    Hyperbola,
    Parabola,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualitySpec {
    pub map: MapSpec,
    pub target_energy: f64,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Identity,
    Power { k: u32 },
    Birkhoff,
}

/// Initial state. Without `p`, the momentum points along `angle` with the speed of the
/// energy level (`energy`, or the source level of the duality).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    pub q: [f64; 2],
    pub p: Option<[f64; 2]>,
    pub angle: Option<f64>,
    pub energy: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopSpec {
    pub reflections: Option<usize>,
    pub time: Option<f64>,
}

impl Default for StopSpec {
    fn default() -> Self {
        Self { reflections: Some(100), time: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolSpec {
    #[serde(default = "default_flow_tol")]
    pub flow: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_conjugacy_tol")]
    pub conjugacy: f64,
}

fn default_flow_tol() -> f64 {
    confbill_core::billiard::DEFAULT_TOL
}

fn default_max_steps() -> usize {
    confbill_core::billiard::DEFAULT_MAX_STEPS
}

fn default_conjugacy_tol() -> f64 {
    1e-7
}

impl Default for TolSpec {
    fn default() -> Self {
        Self {
            flow: default_flow_tol(),
            max_steps: default_max_steps(),
            conjugacy: default_conjugacy_tol(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub svg: bool,
    #[serde(default = "default_samples")]
    pub samples_per_step: usize,
}

fn default_samples() -> usize {
    4
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self { dir: None, svg: true, samples_per_step: default_samples() }
    }
}

/// A scenario with every block turned into core types.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub name: String,
    pub seed: u64,
    /// Field the walls and initial states live in: the source field of the duality if any.
    pub field: ForceField,
    pub wall: Wall,
    pub pairing: Option<DualityPairing>,
    pub initial: Vec<PhaseState>,
    pub stop: Stop,
    pub sim: SimConfig,
    pub conjugacy_tol: f64,
    pub out_dir: Option<PathBuf>,
    pub svg: bool,
}

fn config(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}

fn finite(name: &str, xs: &[f64]) -> Result<(), LabError> {
    if xs.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(config(format!("{name}: parameters must be finite")))
    }
}

fn v2(x: [f64; 2]) -> Vec2 {
    Vec2::new(x[0], x[1])
}

impl FieldSpec {
    pub fn build(&self) -> Result<ForceField, LabError> {
        use FieldSpec::*;
        let field = match self {
            Free => ForceField::Free,
            Hooke { f } => ForceField::Hooke { f: *f },
            Kepler { mu } => ForceField::Kepler { mu: *mu },
            RadialPower { s, alpha } => ForceField::RadialPower { s: *s, alpha: *alpha },
            Stark { mu, g } => ForceField::Stark { mu: *mu, g: *g },
            FrozenHill { mu, g } => ForceField::FrozenHill { mu: *mu, g: *g },
            TwoCenter { m1, m2 } => ForceField::TwoCenter { m1: *m1, m2: *m2 },
            TwoCenterDual { m1, m2, f } => ForceField::TwoCenterDual { m1: *m1, m2: *m2, f: *f },
            SeparableStarkCustom { mu, g1, g2 } => {
                finite("field.g1", g1)?;
                finite("field.g2", g2)?;
                stark_type_from_even_polynomials(*mu, g1, g2)
                    .map_err(|e| config(format!("field: {e}")))?
            }
        };
        let params: Vec<f64> = match self {
            Free | SeparableStarkCustom { .. } => vec![],
            Hooke { f } => vec![*f],
            Kepler { mu } => vec![*mu],
            RadialPower { s, alpha } => vec![*s, *alpha],
            Stark { mu, g } | FrozenHill { mu, g } => vec![*mu, *g],
            TwoCenter { m1, m2 } => vec![*m1, *m2],
            TwoCenterDual { m1, m2, f } => vec![*m1, *m2, *f],
        };
        finite("field", &params)?;
        Ok(field)
    }
}

impl ShapeSpec {
    pub fn build(&self) -> Result<ConicCoeffs, LabError> {
        let positive = |name: &str, xs: &[f64]| {
            if xs.iter().all(|x| x.is_finite() && *x > 0.0) {
                Ok(())
            } else {
                Err(config(format!("{name}: semi-axes must be positive")))
            }
        };
        match *self {
            ShapeSpec::Ellipse { a, b, center, rotation } => {
                positive("ellipse", &[a, b])?;
                finite("ellipse", &[center[0], center[1], rotation])?;
                Ok(ConicCoeffs::ellipse(a, b, v2(center), rotation))
            }
            ShapeSpec::Hyperbola { a, b, center, rotation } => {
                positive("hyperbola", &[a, b])?;
                finite("hyperbola", &[center[0], center[1], rotation])?;
                Ok(ConicCoeffs::hyperbola(a, b, v2(center), rotation))
            }
            ShapeSpec::Circle { r, center } => {
                positive("circle", &[r])?;
                finite("circle", &center)?;
                Ok(ConicCoeffs::circle(r, v2(center)))
            }
            ShapeSpec::Line { point, direction } => {
                finite("line", &[point[0], point[1], direction[0], direction[1]])?;
                if v2(direction).norm() == 0.0 {
                    return Err(config("line: direction must be nonzero"));
                }
                Ok(ConicCoeffs::line(v2(point), v2(direction)))
            }
            ShapeSpec::Parabola { p, vertex, rotation } => {
                finite("parabola", &[p, vertex[0], vertex[1], rotation])?;
                if p == 0.0 {
                    return Err(config("parabola: p must be nonzero"));
                }
                Ok(ConicCoeffs::parabola(p, v2(vertex), rotation))
            }
            ShapeSpec::Focused { conic, a, b } => {
                let kind = match conic {
                    FocusedShape::Ellipse => FocusedKind::Ellipse,
                    FocusedShape::Hyperbola => FocusedKind::Hyperbola,
                    FocusedShape::Parabola => FocusedKind::Parabola,
                };
                focused_conic(kind, a, b, true).map_err(|e| config(format!("focused conic: {e}")))
            }
            ShapeSpec::Conic { coeffs } => {
                finite("conic", &coeffs)?;
                Ok(ConicCoeffs::from_array(coeffs))
            }
        }
    }
}

impl MapSpec {
    pub fn build(self) -> Result<ConformalMap, LabError> {
        match self {
            MapSpec::Identity => Ok(ConformalMap::Identity),
            MapSpec::Birkhoff => Ok(ConformalMap::Birkhoff),
            MapSpec::Power { k } if k >= 2 => Ok(ConformalMap::Power { k }),
            MapSpec::Power { k } => Err(config(format!("duality.map: power k = {k} must be at least 2"))),
        }
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, LabError> {
        toml::from_str(text).map_err(|e| config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            LabError::Config(m) => config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Validate and convert. With a duality block, `field` names the target field and walls
    /// and initial states are given in the source plane.
    pub fn resolve(&self) -> Result<Resolved, LabError> {
        let field = self.field.build()?;
        let pairing = match &self.duality {
            Some(d) => {
                let map = d.map.build()?;
                finite("duality.target_energy", &[d.target_energy])?;
                let p = make_duality(map, field.clone(), d.target_energy)
                    .map_err(|e| config(format!("duality: {e}")))?;
                Some(p)
            }
            None => None,
        };
        let plane_field = pairing.as_ref().map_or(field.clone(), |p| p.source_field.clone());

        let mut wall = Wall::new();
        for (i, w) in self.walls.iter().enumerate() {
            let name = w.name.clone().unwrap_or_else(|| format!("wall{i}"));
            let conic = w.shape.build().map_err(|e| config(format!("walls[{i}] {e}")))?;
            wall = if w.reflect { wall.with(name, conic) } else { wall.with_pass_through(name, conic) };
        }

        let mut initial = Vec::with_capacity(self.initial.len());
        for (i, s) in self.initial.iter().enumerate() {
            initial.push(
                self.initial_state(s, &plane_field, pairing.as_ref())
                    .map_err(|e| config(format!("initial[{i}]: {e}")))?,
            );
        }

        let stop = match (self.stop.reflections, self.stop.time) {
            (Some(n), Some(t)) => Stop::Either { reflections: n, time: t },
            (Some(n), None) => Stop::Reflections(n),
            (None, Some(t)) => Stop::Time(t),
            (None, None) => return Err(config("stop: give reflections, time or both")),
        };
        if let Some(t) = self.stop.time {
            if !(t > 0.0 && t.is_finite()) {
                return Err(config("stop.time must be positive"));
            }
        }
        let tol = self.tolerances.flow;
        if !(confbill_core::billiard::MIN_TOL..=confbill_core::billiard::MAX_TOL).contains(&tol) {
            return Err(config(format!("tolerances.flow = {tol:e} is out of range")));
        }
        let sim = SimConfig {
            tol,
            max_steps: self.tolerances.max_steps,
            samples_per_step: self.output.samples_per_step.max(1),
            branch_hint: initial.first().map(|s| s.q),
            ..SimConfig::default()
        };
        Ok(Resolved {
            name: self.name.clone().unwrap_or_else(|| "scenario".into()),
            seed: self.seed,
            field: plane_field,
            wall,
            pairing,
            initial,
            stop,
            sim,
            conjugacy_tol: self.tolerances.conjugacy,
            out_dir: self.output.dir.clone(),
            svg: self.output.svg,
        })
    }

    fn initial_state(
        &self,
        s: &InitialSpec,
        field: &ForceField,
        pairing: Option<&DualityPairing>,
    ) -> Result<PhaseState, String> {
        let q = v2(s.q);
        if !q.is_finite() {
            return Err("q must be finite".into());
        }
        field.check_regular(q).map_err(|e| e.to_string())?;
        let level = s.energy.or(pairing.map(|p| p.source_energy));
        let state = match (s.p, s.angle) {
            (Some(p), None) => PhaseState::new(q, v2(p)),
            (None, Some(angle)) => {
                let e = level.ok_or("angle needs an energy or a duality level")?;
                let kin = e - field.potential(q).map_err(|e| e.to_string())?;
                if kin < 0.0 {
                    return Err(format!("energy {e} is below the potential at q"));
                }
                PhaseState::new(q, Vec2::from_angle(angle) * (2.0 * kin).sqrt())
            }
            _ => return Err("give exactly one of p or angle".into()),
        };
        if !state.p.is_finite() {
            return Err("p must be finite".into());
        }
        if let Some(e) = level {
            let h = field.hamiltonian(&state).map_err(|e| e.to_string())?;
            if (h - e).abs() > LEVEL_TOL * e.abs().max(1.0) {
                return Err(format!("state has energy {h}, off the level {e}"));
            }
        }
        Ok(state)
    }
}
