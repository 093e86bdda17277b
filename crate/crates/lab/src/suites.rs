//! Verification suites: named checks with the verdict each one is expected to reach.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use std::fmt::Write as _;
use std::path::Path;

use confbill_core::billiard::{simulate, SimConfig, Stop, Trajectory};
use confbill_core::conformal::{make_duality, pull_wall};
use confbill_core::fields::stark_type_from_even_polynomials;
use confbill_core::geometry::{focused_conic, FocusedKind};
use confbill_core::integrals::*;
use confbill_core::{ConformalMap, ConicCoeffs, Execution, ForceField, PhaseState, Vec2, Wall};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{write_file, LabError, Result};

pub const SUITES: [&str; 7] = ["hooke", "kepler", "stark", "twocenter", "free", "appendixB", "appendixC"];

/// What a check measured.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub verdict: Verdict,
    /// Largest violation measured, when the check has one.
    pub max_violation: Option<f64>,
    pub tolerance: f64,
    pub body: String,
    /// Extra pass condition beyond the verdict, with its description.
    pub margin: Option<(bool, String)>,
}

impl Outcome {
    fn from_report(r: &InvarianceReport) -> Self {
        Self {
            verdict: r.verdict,
            max_violation: Some(r.max_violation),
            tolerance: r.tolerance,
            body: r.to_key_values(),
            margin: None,
        }
    }

    fn from_factorization(r: &FactorizationReport) -> Self {
        Self {
            verdict: if r.factorizes { Verdict::Invariant } else { Verdict::Violated },
            max_violation: Some(r.on_wall_max),
            tolerance: r.tolerance,
            body: r.to_key_values(),
            margin: None,
        }
    }

    fn with_margin(mut self, ok: bool, what: impl Into<String>) -> Self {
        self.margin = Some((ok, what.into()));
        self
    }
}

type CheckFn = fn(u64) -> Result<Outcome>;

pub struct Check {
    pub name: &'static str,
    pub expected: Verdict,
    run: CheckFn,
}

const fn check(name: &'static str, expected: Verdict, run: CheckFn) -> Check {
    Check { name, expected, run }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub expected: Verdict,
    pub outcome: std::result::Result<Outcome, String>,
}

impl CheckResult {
    pub fn verdict(&self) -> Option<Verdict> {
        self.outcome.as_ref().ok().map(|o| o.verdict)
    }

    pub fn passed(&self) -> bool {
        match &self.outcome {
            Ok(o) => o.verdict == self.expected && o.margin.as_ref().is_none_or(|m| m.0),
            Err(_) => false,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "suite = {}", self.suite);
        let _ = writeln!(s, "name = {}", self.name);
        let _ = writeln!(s, "expected = {}", self.expected.label());
        match &self.outcome {
            Ok(o) => {
                s.push_str(&o.body);
                if let Some((ok, what)) = &o.margin {
                    let _ = writeln!(s, "margin = {what} ({})", if *ok { "met" } else { "missed" });
                }
            }
            Err(e) => {
                let _ = writeln!(s, "error = {e}");
            }
        }
        let _ = writeln!(s, "result = {}", if self.passed() { "pass" } else { "fail" });
        s
    }

    fn summary_line(&self) -> String {
        let got = match &self.outcome {
            Ok(o) => o.verdict.label().to_string(),
            Err(_) => "error".into(),
        };
        let viol = match &self.outcome {
            Ok(Outcome { max_violation: Some(v), tolerance, .. }) => format!(" max={v:e} tol={tolerance:e}"),
            _ => String::new(),
        };
        format!(
            "{:<5} {}/{} expected={} got={}{}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.suite,
            self.name,
            self.expected.label(),
            got,
            viol
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SuiteRun {
    pub seed: u64,
    pub results: Vec<CheckResult>,
}

impl SuiteRun {
    pub fn passed(&self) -> bool {
        self.results.iter().all(CheckResult::passed)
    }

    pub fn get(&self, suite: &str, name: &str) -> Option<&CheckResult> {
        self.results.iter().find(|r| r.suite == suite && r.name == name)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("seed = {}\n", self.seed);
        for r in &self.results {
            s.push_str(&r.summary_line());
            s.push('\n');
        }
        let failed = self.results.iter().filter(|r| !r.passed()).count();
        let _ = writeln!(s, "checks = {} failed = {}", self.results.len(), failed);
        s
    }

    /// `<out>/reports/<suite>/<check>.txt`, one `summary.txt` per suite and an overall
    /// `<out>/reports/summary.txt`.
    pub fn write(&self, out: &Path) -> Result<()> {
        let root = out.join("reports");
        for suite in SUITES {
            let rs: Vec<&CheckResult> = self.results.iter().filter(|r| r.suite == suite).collect();
            if rs.is_empty() {
                continue;
            }
            let mut sum = format!("seed = {}\n", self.seed);
            for r in &rs {
                write_file(&root.join(suite).join(format!("{}.txt", r.name)), r.to_text())?;
                sum.push_str(&r.summary_line());
                sum.push('\n');
            }
            write_file(&root.join(suite).join("summary.txt"), sum)?;
        }
        write_file(&root.join("summary.txt"), self.summary())
    }
}

/// Checks of one suite, in report order.
pub fn checks(suite: &str) -> Option<&'static [Check]> {
    Some(match suite {
        "hooke" => &HOOKE,
        "kepler" => &KEPLER,
        "stark" => &STARK,
        "twocenter" => &TWOCENTER,
        "free" => &FREE,
        "appendixB" => &APPENDIX_B,
        "appendixC" => &APPENDIX_C,
        _ => return None,
    })
}

/// Run `suite` (or `all`) with the given sampling seed.
pub fn run(suite: &str, seed: u64) -> Result<SuiteRun> {
    let names: Vec<&'static str> = if suite == "all" {
        SUITES.to_vec()
    } else {
        vec![*SUITES.iter().find(|s| **s == suite).ok_or_else(|| {
            LabError::Config(format!("unknown suite {suite:?}; expected one of {} or all", SUITES.join(", ")))
        })?]
    };
    let jobs: Vec<(&'static str, &'static Check)> = names
        .iter()
        .flat_map(|s| checks(s).into_iter().flatten().map(move |c| (*s, c)))
        .collect();
    let results = Execution::default().map(&jobs, |&(s, c)| CheckResult {
        suite: s,
        name: c.name,
        expected: c.expected,
        outcome: (c.run)(seed).map_err(|e| e.to_string()),
    });
    Ok(SuiteRun { seed, results })
}

use Verdict::{Invariant as INV, NotApplicable as NA, Violated as VIO};

fn v(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

fn sampling(seed: u64, tol: f64) -> SampleConfig {
    SampleConfig { seed, tol, ..SampleConfig::default() }
}

fn reflection(wall: &Wall, integral: &FirstIntegral, cfg: &SampleConfig) -> Result<Outcome> {
    Ok(Outcome::from_report(&check_reflection_invariance(wall, integral, cfg)?))
}

fn billiard(
    field: &ForceField,
    wall: &Wall,
    s0: PhaseState,
    n: usize,
    tol: f64,
) -> Result<Trajectory> {
    let cfg = SimConfig { tol, samples_per_step: 2, ..SimConfig::default() };
    let tr = simulate(field, wall, s0, Stop::Reflections(n), &cfg)?;
    if tr.events.len() != n {
        return Err(LabError::Runtime(format!(
            "billiard stopped after {} of {n} reflections ({})",
            tr.events.len(),
            tr.outcome.label()
        )));
    }
    Ok(tr)
}

fn along(tr: &Trajectory, integral: &FirstIntegral, tol: f64) -> Outcome {
    let mut o = Outcome::from_report(&check_trajectory(tr, integral, tol));
    let _ = writeln!(o.body, "reflections = {}", tr.events.len());
    o
}

/// Momentum of speed fixed by `energy` in `field` at `q`, pointing along `angle`.
fn level_state(field: &ForceField, energy: f64, q: Vec2, angle: f64) -> Result<PhaseState> {
    let kin = energy - field.potential(q).map_err(|e| LabError::Runtime(e.to_string()))?;
    if kin <= 0.0 {
        return Err(LabError::Runtime(format!("no motion at {q} on level {energy}")));
    }
    Ok(PhaseState::new(q, Vec2::from_angle(angle) * (2.0 * kin).sqrt()))
}

// hooke

fn centered_ellipse() -> ConicCoeffs {
    ConicCoeffs::ellipse(3.0, 2.0, Vec2::ZERO, 0.0)
}

fn hooke_g_32() -> Result<FirstIntegral> {
    Ok(hooke_g(1.0, 3.0, (5.0f64 / 9.0).sqrt())?)
}

const HOOKE: [Check; 9] = [
    check("hooke_g_centered_ellipse", INV, |seed| {
        reflection(&Wall::single(centered_ellipse()), &hooke_g_32()?, &sampling(seed, 1e-12))
    }),
    check("hooke_g_centered_hyperbola", INV, |seed| {
        let wall = Wall::single(ConicCoeffs::hyperbola(3.0, 2.0, Vec2::ZERO, 0.0));
        reflection(&wall, &hooke_g(1.0, 3.0, 13f64.sqrt() / 3.0)?, &sampling(seed, 1e-12))
    }),
    check("hooke_g_rotated_ellipse", VIO, |seed| {
        let wall = Wall::single(ConicCoeffs::ellipse(3.0, 2.0, Vec2::ZERO, 0.4));
        reflection(&wall, &hooke_g_32()?, &sampling(seed, 1e-12))
    }),
    check("hooke_g_along_billiard", INV, |_| {
        let field = ForceField::Hooke { f: 1.0 };
        let s0 = PhaseState::new(v(0.5, 0.3), v(4.0, 3.0));
        let tr = billiard(&field, &Wall::single(centered_ellipse()), s0, 50, 1e-11)?;
        Ok(along(&tr, &hooke_g_32()?, 1e-8))
    }),
    check("confocal_g_ellipse_and_hyperbola", INV, |seed| {
        let wall = Wall::new()
            .with("ellipse", centered_ellipse())
            .with("hyperbola", ConicCoeffs::hyperbola(1.0, 2.0, Vec2::ZERO, 0.0));
        reflection(&wall, &confocal_g(1.0, 5f64.sqrt())?, &sampling(seed, 1e-12))
    }),
    check("confocal_g_foreign_ellipse", VIO, |seed| {
        let wall = Wall::single(ConicCoeffs::ellipse(3.0, 1.0, Vec2::ZERO, 0.0));
        reflection(&wall, &confocal_g(1.0, 5f64.sqrt())?, &sampling(seed, 1e-12))
    }),
    check("line_integral_axis_lines", INV, |seed| {
        let wall = Wall::new()
            .with("vertical", ConicCoeffs::line(v(0.8, 0.0), v(0.0, 1.0)))
            .with("horizontal", ConicCoeffs::line(v(0.0, -0.5), v(1.0, 0.0)));
        reflection(&wall, &hooke_line_integral(1.0), &sampling(seed, 1e-12))
    }),
    check("duality_transport", INV, |seed| transport(seed, true)),
    check("duality_transport_without_offset", VIO, |seed| transport(seed, false)),
];

/// `(1 + k)·G − k·mu` against `A ∘ lift` on paired levels, relative error.
fn transport(seed: u64, offset: bool) -> Result<Outcome> {
    let (f, mu, a, b) = (0.6, 1.7, 3.0, 2.0);
    let k = a * a - b * b;
    let g = hooke_g(f, a, (k / (a * a)).sqrt())?;
    let gj = gallavotti_jauslin_a(mu, k / 2.0);
    let map = ConformalMap::Power { k: 2 };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst, mut n) = (0.0f64, 0usize);
    while n < 1000 {
        let z = v(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5));
        let kin = mu - f * z.norm_sq();
        if kin <= 0.0 || z.norm() < 1e-3 {
            continue;
        }
        let w = Vec2::from_angle(rng.random_range(0.0..2.0 * PI)) * (2.0 * kin).sqrt();
        let s = PhaseState::new(z, w);
        let lhs = (1.0 + k) * g.eval(&s)? - if offset { k * mu } else { 0.0 };
        let rhs = gj.eval(&map.lift_state(&s).map_err(|e| LabError::Runtime(e.to_string()))?)?;
        worst = worst.max((lhs - rhs).abs() / rhs.abs().max(1.0));
        n += 1;
    }
    let tol = 1e-10;
    let verdict = if worst <= tol { INV } else { VIO };
    let body = format!(
        "check = transport\nf = {f:e}\nmu = {mu:e}\nk = {k:e}\noffset = {offset}\nseed = {seed}\n\
         n_samples = {n}\nmax_relative_error = {worst:e}\ntolerance = {tol:e}\nverdict = {}\n",
        verdict.label()
    );
    Ok(Outcome { verdict, max_violation: Some(worst), tolerance: tol, body, margin: None })
}

// kepler

fn focused_ellipse() -> Result<ConicCoeffs> {
    Ok(focused_conic(FocusedKind::Ellipse, 3.0, 2.0, true)?)
}

fn focused_hyperbola() -> Result<ConicCoeffs> {
    Ok(focused_conic(FocusedKind::Hyperbola, 1.0, 2.0, true)?)
}

const KEPLER: [Check; 7] = [
    check("gj_along_billiard", INV, |_| {
        let field = ForceField::Kepler { mu: 1.0 };
        let s0 = PhaseState::new(v(1.5, 0.5), v(0.3, 0.9));
        let tr = billiard(&field, &Wall::single(focused_ellipse()?), s0, 50, 1e-11)?;
        Ok(along(&tr, &gallavotti_jauslin_a(1.0, 5f64.sqrt()), 1e-8))
    }),
    check("gj_focused_ellipse", INV, |seed| {
        reflection(&Wall::single(focused_ellipse()?), &gallavotti_jauslin_a(1.0, 5f64.sqrt()), &sampling(seed, 1e-11))
    }),
    check("gj_focused_hyperbola", INV, |seed| {
        reflection(&Wall::single(focused_hyperbola()?), &gallavotti_jauslin_a(1.0, 5f64.sqrt()), &sampling(seed, 1e-11))
    }),
    check("lenz_focused_parabola", INV, |seed| {
        let wall = Wall::single(focused_conic(FocusedKind::Parabola, 1.0, 0.0, true)?);
        reflection(&wall, &lenz_component(1.0), &sampling(seed, 1e-11))
    }),
    check("gj_line", INV, |seed| {
        let wall = Wall::single(ConicCoeffs::line(v(4.0, 0.0), v(0.0, 1.0)));
        reflection(&wall, &gallavotti_jauslin_a(1.0, 4.0), &sampling(seed, 1e-11))
    }),
    check("gj_confocal_ellipse_and_hyperbola", INV, |seed| {
        let wall = Wall::new().with("ellipse", focused_ellipse()?).with("hyperbola", focused_hyperbola()?);
        reflection(&wall, &gallavotti_jauslin_a(1.0, 5f64.sqrt()), &sampling(seed, 1e-11))
    }),
    check("gj_wrong_center", VIO, |seed| {
        reflection(&Wall::single(focused_ellipse()?), &gallavotti_jauslin_a(1.0, 2.0), &sampling(seed, 1e-11))
    }),
];

// stark

/// Energy level `−f` shared by the Stark-type checks.
const STARK_F: f64 = 0.5;

fn stark_custom() -> Result<ForceField> {
    stark_type_from_even_polynomials(1.0, &[0.0, 0.0, 0.03], &[0.0, 0.0, -0.02])
        .map_err(|e| LabError::Runtime(e.to_string()))
}

/// Separated integral carried to the physical plane, checked along a billiard in the
/// focused parabola `q₁ = 0.75 − q₂²/3`.
fn stark_billiard(field: ForceField) -> Result<Outcome> {
    let pairing = make_duality(ConformalMap::Power { k: 2 }, field.clone(), -STARK_F)
        .map_err(|e| LabError::Runtime(e.to_string()))?;
    let h1 = pushforward_integral(&pairing, &stark_separated(&field, STARK_F)?)?;
    let wall = Wall::single(focused_conic(FocusedKind::Parabola, 0.75, 0.0, true)?);
    let s0 = level_state(&field, -STARK_F, v(0.2, 0.3), 0.3)?;
    let tr = billiard(&field, &wall, s0, 20, 1e-12)?;
    Ok(along(&tr, &h1, 1e-8))
}

const STARK: [Check; 4] = [
    check("separated_stark", INV, |_| stark_billiard(ForceField::Stark { mu: 1.0, g: 0.1 })),
    check("separated_frozen_hill", INV, |_| stark_billiard(ForceField::FrozenHill { mu: 1.0, g: 0.05 })),
    check("separated_custom", INV, |_| stark_billiard(stark_custom()?)),
    check("separated_rotated_parabola", VIO, |seed| {
        let field = ForceField::Stark { mu: 1.0, g: 0.1 };
        let pairing = make_duality(ConformalMap::Power { k: 2 }, field.clone(), -STARK_F)
            .map_err(|e| LabError::Runtime(e.to_string()))?;
        let h1 = pushforward_integral(&pairing, &stark_separated(&field, STARK_F)?)?;
        let parabola = focused_conic(FocusedKind::Parabola, 0.75, 0.0, true)?.transformed(Vec2::ZERO, FRAC_PI_2);
        let cfg = SampleConfig { extent: 3.0, ..sampling(seed, 1e-8) };
        reflection(&Wall::single(parabola), &h1, &cfg)
    }),
];

// twocenter

const TC: (f64, f64, f64) = (1.0, 0.5, 0.3);

fn dual_state(z: Vec2, angle: f64) -> Result<PhaseState> {
    level_state(&ForceField::TwoCenterDual { m1: TC.0, m2: TC.1, f: TC.2 }, 0.0, z, angle)
}

/// `I_r` carried to the physical plane, checked along a two-centre billiard at energy `−f`.
fn two_center_billiard(wall: Wall, q0: Vec2, angle: f64) -> Result<Outcome> {
    let field = ForceField::TwoCenter { m1: TC.0, m2: TC.1 };
    let pairing = make_duality(ConformalMap::Birkhoff, field.clone(), -TC.2)
        .map_err(|e| LabError::Runtime(e.to_string()))?;
    let ir = pushforward_integral(&pairing, &two_center_radial(TC.0, TC.1, TC.2))?;
    let s0 = level_state(&field, -TC.2, q0, angle)?;
    let tr = billiard(&field, &wall, s0, 30, 1e-12)?;
    Ok(along(&tr, &ir, 1e-10))
}

fn confocal_tc_ellipse() -> ConicCoeffs {
    ConicCoeffs::ellipse(2.0, 3f64.sqrt(), Vec2::ZERO, 0.0)
}

const TWOCENTER: [Check; 6] = [
    check("radial_flow", INV, |_| {
        let field = ForceField::TwoCenterDual { m1: TC.0, m2: TC.1, f: TC.2 };
        let ir = two_center_radial(TC.0, TC.1, TC.2);
        let r = check_flow_conservation(&field, &ir, dual_state(v(1.3, 0.6), 0.4)?, 50.0, 1e-8, 1e-11)?;
        Ok(Outcome::from_report(&r))
    }),
    check("radial_off_level", NA, |_| {
        let field = ForceField::TwoCenterDual { m1: TC.0, m2: TC.1, f: TC.2 };
        let ir = two_center_radial(TC.0, TC.1, TC.2);
        let s = dual_state(v(1.3, 0.6), 0.4)?;
        let off = PhaseState::new(s.q, s.p * 1.1);
        Ok(Outcome::from_report(&check_flow_conservation(&field, &ir, off, 5.0, 1e-8, 1e-11)?))
    }),
    check("radial_circles_and_lines", INV, |seed| {
        let wall = Wall::new()
            .with("circle", ConicCoeffs::circle(1.7, Vec2::ZERO))
            .with("inner_circle", ConicCoeffs::circle(0.8, Vec2::ZERO))
            .with("line", ConicCoeffs::line(Vec2::ZERO, Vec2::from_angle(FRAC_PI_3)));
        let cfg = SampleConfig { extent: 3.0, ..sampling(seed, 1e-12) };
        reflection(&wall, &two_center_radial(TC.0, TC.1, TC.2), &cfg)
    }),
    check("pushed_radial_confocal_ellipse", INV, |_| {
        two_center_billiard(Wall::single(confocal_tc_ellipse()), v(0.0, 1.2), 0.1)
    }),
    check("pushed_radial_ellipse_and_hyperbola", INV, |_| {
        let wall = Wall::new()
            .with("ellipse", confocal_tc_ellipse())
            .with("hyperbola", ConicCoeffs::hyperbola(0.6, 0.8, Vec2::ZERO, 0.0));
        two_center_billiard(wall, v(0.1, 0.3), 0.7)
    }),
    check("pushed_radial_foreign_ellipse", VIO, |seed| {
        let field = ForceField::TwoCenter { m1: TC.0, m2: TC.1 };
        let pairing = make_duality(ConformalMap::Birkhoff, field, -TC.2)
            .map_err(|e| LabError::Runtime(e.to_string()))?;
        let ir = pushforward_integral(&pairing, &two_center_radial(TC.0, TC.1, TC.2))?;
        let wall = Wall::single(ConicCoeffs::ellipse(2.0, 1.5, Vec2::ZERO, 0.0));
        reflection(&wall, &ir, &sampling(seed, 1e-10))
    }),
];

// free

fn free_ellipse_run() -> Result<Trajectory> {
    billiard(&ForceField::Free, &Wall::single(centered_ellipse()), PhaseState::new(v(0.4, 0.1), v(0.6, 0.8)), 100, 1e-11)
}

const FREE: [Check; 5] = [
    check("joachimsthal_ellipse", INV, |_| Ok(along(&free_ellipse_run()?, &joachimsthal(centered_ellipse()), 1e-10))),
    check("joachimsthal_foreign_ellipse", VIO, |_| {
        let other = ConicCoeffs::ellipse(3.0, 1.5, Vec2::ZERO, 0.0);
        Ok(along(&free_ellipse_run()?, &joachimsthal(other), 1e-10))
    }),
    check("gamma_parabola_lens", INV, |_| {
        let lens = Wall::new()
            .with("left", focused_conic(FocusedKind::Parabola, 1.0, 0.0, true)?)
            .with("right", focused_conic(FocusedKind::Parabola, -1.0, 0.0, true)?);
        let tr = billiard(&ForceField::Free, &lens, PhaseState::new(v(0.1, 0.2), v(0.3, 0.9)), 100, 1e-11)?;
        Ok(along(&tr, &parabola_gamma(Vec2::ZERO, v(1.0, 0.0))?, 1e-10))
    }),
    check("gamma_off_focus", VIO, |_| {
        let lens = Wall::new()
            .with("left", focused_conic(FocusedKind::Parabola, 1.0, 0.0, true)?)
            .with("right", focused_conic(FocusedKind::Parabola, -1.0, 0.0, true)?);
        let tr = billiard(&ForceField::Free, &lens, PhaseState::new(v(0.1, 0.2), v(0.3, 0.9)), 100, 1e-11)?;
        Ok(along(&tr, &parabola_gamma(v(0.3, 0.0), v(1.0, 0.0))?, 1e-10))
    }),
    check("bridge_identity", INV, |seed| {
        let (a, b) = (3.0, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..1000 {
            let t = rng.random_range(0.0..2.0 * PI);
            let s = PhaseState::new(v(a * t.cos(), b * t.sin()), Vec2::from_angle(rng.random_range(0.0..2.0 * PI)));
            worst = worst.max(joachimsthal_bridge_residual(a, b, &s).abs());
        }
        let tol = 1e-12;
        let verdict = if worst <= tol { INV } else { VIO };
        let body = format!(
            "check = bridge\na = {a:e}\nb = {b:e}\nseed = {seed}\nn_samples = 1000\nmax_residual = {worst:e}\n\
             tolerance = {tol:e}\nverdict = {}\n",
            verdict.label()
        );
        Ok(Outcome { verdict, max_violation: Some(worst), tolerance: tol, body, margin: None })
    }),
];

// appendix B

fn zero_level_pairing() -> Result<confbill_core::DualityPairing> {
    make_duality(ConformalMap::Power { k: 2 }, ForceField::Free, 0.5).map_err(|e| LabError::Runtime(e.to_string()))
}

fn offset_ellipse(c1: f64, c2: f64) -> ConicCoeffs {
    ConicCoeffs::ellipse(3.0, 2.0, v(c1, c2), 0.0)
}

fn j_hat(c1: f64, c2: f64) -> Result<FirstIntegral> {
    Ok(joachimsthal_squared(offset_ellipse(c1, c2))?.pullback(&zero_level_pairing()?)?)
}

fn j_hat_flow(c1: f64, c2: f64) -> Result<Outcome> {
    let pairing = zero_level_pairing()?;
    let z0 = v(1.2, 0.5);
    let s0 = PhaseState::new(z0, Vec2::from_angle(2.0) * z0.norm());
    let r = check_flow_conservation(&pairing.source_field, &j_hat(c1, c2)?, s0, 1.0, 1e-8, 1e-11)?;
    Ok(Outcome::from_report(&r))
}

fn j_hat_wall(c1: f64, c2: f64) -> Wall {
    pull_wall(ConformalMap::Power { k: 2 }, &Wall::single(offset_ellipse(c1, c2)))
}

fn j_hat_reflection(seed: u64, c1: f64, c2: f64) -> Result<Outcome> {
    let cfg = SampleConfig { extent: 4.0, ..sampling(seed, 1e-11) };
    reflection(&j_hat_wall(c1, c2), &j_hat(c1, c2)?, &cfg)
}

fn j_hat_factorization(seed: u64, c1: f64, c2: f64) -> Result<Outcome> {
    let cfg = SampleConfig { extent: 4.0, ..sampling(seed, 1e-11) };
    Ok(Outcome::from_factorization(&factorization_check(&j_hat_wall(c1, c2), &j_hat(c1, c2)?, &cfg)?))
}

const APPENDIX_B: [Check; 13] = [
    check("flow_2_0", INV, |_| j_hat_flow(2.0, 0.0)),
    check("reflection_2_0", INV, |s| j_hat_reflection(s, 2.0, 0.0)),
    check("factorization_2_0", INV, |s| j_hat_factorization(s, 2.0, 0.0)),
    check("flow_0_1", INV, |_| j_hat_flow(0.0, 1.0)),
    check("reflection_0_1", INV, |s| j_hat_reflection(s, 0.0, 1.0)),
    check("factorization_0_1", INV, |s| j_hat_factorization(s, 0.0, 1.0)),
    check("flow_2_1", INV, |_| j_hat_flow(2.0, 1.0)),
    check("reflection_2_1", INV, |s| j_hat_reflection(s, 2.0, 1.0)),
    check("factorization_2_1", INV, |s| j_hat_factorization(s, 2.0, 1.0)),
    check("flow_3_4", INV, |_| j_hat_flow(3.0, 4.0)),
    check("reflection_3_4", INV, |s| j_hat_reflection(s, 3.0, 4.0)),
    check("factorization_3_4", INV, |s| j_hat_factorization(s, 3.0, 4.0)),
    check("reflection_foreign_wall", VIO, |seed| {
        let cfg = SampleConfig { extent: 4.0, ..sampling(seed, 1e-11) };
        reflection(&j_hat_wall(2.0, 0.0), &j_hat(2.0, 1.0)?, &cfg)
    }),
];

// appendix C

fn gj_l2() -> f64 {
    -2.0 * 5f64.sqrt()
}

const APPENDIX_C: [Check; 4] = [
    check("gj_general_reflection", INV, |seed| {
        reflection(&Wall::single(focused_ellipse()?), &gj_general(1.0, 0.0, gj_l2()), &sampling(seed, 1e-12))
    }),
    check("gj_general_factorization", INV, |seed| {
        let r = factorization_check(&Wall::single(focused_ellipse()?), &gj_general(1.0, 0.0, gj_l2()), &sampling(seed, 1e-12))?;
        Ok(Outcome::from_factorization(&r))
    }),
    check("gj_general_perturbed_reflection", VIO, |seed| {
        let o = reflection(&Wall::single(focused_ellipse()?), &gj_general(1.0, 0.0, 1.1 * gj_l2()), &sampling(seed, 1e-12))?;
        let ok = o.max_violation.is_some_and(|m| m > 1e-3);
        Ok(o.with_margin(ok, "max_violation > 1e-3"))
    }),
    check("gj_general_perturbed_factorization", VIO, |seed| {
        let r = factorization_check(&Wall::single(focused_ellipse()?), &gj_general(1.0, 0.0, 1.1 * gj_l2()), &sampling(seed, 1e-12))?;
        Ok(Outcome::from_factorization(&r))
    }),
];
