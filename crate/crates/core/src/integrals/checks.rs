//! Conservation, reflection-invariance and factorization checks.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::billiard::{integrate_arc, reflect, Trajectory};
use crate::fields::{ForceField, PhaseState};
use crate::geometry::Wall;
use crate::integrals::{FirstIntegral, IntegralError, Validity};
use crate::par::Execution;
use crate::vec2::Vec2;

pub const DEFAULT_CHECK_TOL: f64 = 1e-11;
/// Distances from the wall used to probe how a reflection difference grows off the wall.
pub const FACTOR_OFFSETS: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Invariant,
    Violated,
    NotApplicable,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::Invariant => "invariant",
            Verdict::Violated => "violated",
            Verdict::NotApplicable => "not-applicable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub check: &'static str,
    pub integral: String,
    pub params: Vec<(String, f64)>,
    pub seed: Option<u64>,
    pub n_samples: usize,
    pub max_violation: f64,
    pub mean_violation: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    /// State with the largest violation when the verdict is `Violated`.
    pub witness: Option<PhaseState>,
    pub note: Option<String>,
}

impl InvarianceReport {
    fn empty(check: &'static str, integral: &FirstIntegral, tol: f64, seed: Option<u64>) -> Self {
        Self {
            check,
            integral: integral.name.clone(),
            params: integral.params.clone(),
            seed,
            n_samples: 0,
            max_violation: 0.0,
            mean_violation: 0.0,
            tolerance: tol,
            verdict: Verdict::NotApplicable,
            witness: None,
            note: None,
        }
    }

    fn not_applicable(
        check: &'static str,
        integral: &FirstIntegral,
        tol: f64,
        seed: Option<u64>,
        note: impl Into<String>,
    ) -> Self {
        Self { note: Some(note.into()), ..Self::empty(check, integral, tol, seed) }
    }

    fn from_violations(
        check: &'static str,
        integral: &FirstIntegral,
        tol: f64,
        seed: Option<u64>,
        violations: &[(f64, PhaseState)],
    ) -> Self {
        let mut r = Self::empty(check, integral, tol, seed);
        if violations.is_empty() {
            r.note = Some("no admissible samples".into());
            return r;
        }
        r.n_samples = violations.len();
        let (mut worst, mut sum) = (&violations[0], 0.0);
        for v in violations {
            sum += v.0;
            if v.0 > worst.0 || v.0.is_nan() {
                worst = v;
            }
        }
        r.max_violation = worst.0;
        r.mean_violation = sum / violations.len() as f64;
        r.verdict = if r.max_violation <= tol { Verdict::Invariant } else { Verdict::Violated };
        if r.verdict == Verdict::Violated {
            r.witness = Some(worst.1);
        }
        r
    }

    pub fn is_invariant(&self) -> bool {
        self.verdict == Verdict::Invariant
    }

    /// `key = value` lines in a fixed order.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "check = {}", self.check);
        let _ = writeln!(out, "integral = {}", self.integral);
        for (k, v) in &self.params {
            let _ = writeln!(out, "param.{k} = {v:e}");
        }
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed = {seed}");
        }
        let _ = writeln!(out, "n_samples = {}", self.n_samples);
        let _ = writeln!(out, "max_violation = {:e}", self.max_violation);
        let _ = writeln!(out, "mean_violation = {:e}", self.mean_violation);
        let _ = writeln!(out, "tolerance = {:e}", self.tolerance);
        let _ = writeln!(out, "verdict = {}", self.verdict.label());
        if let Some(w) = self.witness {
            let _ = writeln!(out, "witness = {:e} {:e} {:e} {:e}", w.q.x, w.q.y, w.p.x, w.p.y);
        }
        if let Some(n) = &self.note {
            let _ = writeln!(out, "note = {n}");
        }
        out
    }
}

/// `|after − before| / max(1, |before|)`.
pub fn scaled_violation(before: f64, after: f64) -> f64 {
    (after - before).abs() / before.abs().max(1.0)
}

/// Sampling options shared by the reflection and factorization checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Half-width of the window used to sample unbounded curves.
    pub extent: f64,
    pub exec: Execution,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            n_samples: 1000,
            seed: 42,
            tol: DEFAULT_CHECK_TOL,
            extent: 10.0,
            exec: Execution::default(),
        }
    }
}

/// Tracks `|I(t) − I(0)|/max(1, |I(0)|)` along the flow of `field` over `[0, t_end]`.
pub fn check_flow_conservation(
    field: &ForceField,
    integral: &FirstIntegral,
    state0: PhaseState,
    t_end: f64,
    tol: f64,
    flow_tol: f64,
) -> Result<InvarianceReport, IntegralError> {
    const CHECK: &str = "flow";
    if integral.event_indexed {
        return Ok(InvarianceReport::not_applicable(
            CHECK,
            integral,
            tol,
            None,
            "event-indexed integral",
        ));
    }
    if let Validity::FixedEnergy { field: f, .. } = &integral.validity {
        if f != field {
            return Ok(InvarianceReport::not_applicable(CHECK, integral, tol, None, "other field"));
        }
        if !integral.on_level(&state0) {
            return Ok(InvarianceReport::not_applicable(CHECK, integral, tol, None, "off level"));
        }
    }
    let i0 = integral.eval(&state0)?;
    let steps = integrate_arc(field, state0, t_end, flow_tol)?;
    let mut violations = Vec::with_capacity(2 * steps.len());
    for step in &steps {
        for t in [step.t0 + 0.5 * step.h, step.t1()] {
            let s = PhaseState::from_array(step.eval(t));
            violations.push((scaled_violation(i0, integral.value(&s)), s));
        }
    }
    Ok(InvarianceReport::from_violations(CHECK, integral, tol, None, &violations))
}

/// Drift of `I` over every recorded sample of a trajectory, relative to its first sample.
/// Event-indexed integrals are compared across reflection points at the outgoing momentum.
pub fn check_trajectory(traj: &Trajectory, integral: &FirstIntegral, tol: f64) -> InvarianceReport {
    const CHECK: &str = "trajectory";
    let states: Vec<PhaseState> = if integral.event_indexed {
        traj.events.iter().map(|e| PhaseState::new(e.q, e.p_out)).collect()
    } else {
        traj.samples().map(|(_, s)| s.state).collect()
    };
    let Some(first) = states.first() else {
        return InvarianceReport::not_applicable(CHECK, integral, tol, None, "empty trajectory");
    };
    if !integral.on_level(first) {
        return InvarianceReport::not_applicable(CHECK, integral, tol, None, "off level");
    }
    let i0 = integral.value(first);
    let violations: Vec<_> =
        states.iter().map(|s| (scaled_violation(i0, integral.value(s)), *s)).collect();
    InvarianceReport::from_violations(CHECK, integral, tol, None, &violations)
}

/// Jump of `I` across each reflection of a trajectory.
pub fn check_event_jumps(traj: &Trajectory, integral: &FirstIntegral, tol: f64) -> InvarianceReport {
    const CHECK: &str = "events";
    if integral.event_indexed {
        return InvarianceReport::not_applicable(CHECK, integral, tol, None, "event-indexed integral");
    }
    let violations: Vec<_> = traj
        .events
        .iter()
        .map(|e| {
            let before = PhaseState::new(e.q, e.p_in);
            let after = PhaseState::new(e.q, e.p_out);
            (scaled_violation(integral.value(&before), integral.value(&after)), before)
        })
        .collect();
    InvarianceReport::from_violations(CHECK, integral, tol, None, &violations)
}

/// Wall point with a random momentum direction, drawn before any parallel fan-out.
#[derive(Debug, Clone, Copy)]
struct Draw {
    u: f64,
    angle: f64,
}

fn draws(cfg: &SampleConfig) -> Vec<Draw> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.n_samples)
        .map(|_| Draw { u: rng.random(), angle: rng.random::<f64>() * std::f64::consts::TAU })
        .collect()
}

/// Momentum at `q` in direction `angle`: unit speed, or the level speed for fixed-energy
/// integrals. `None` where the level is not reachable.
fn momentum(integral: &FirstIntegral, q: Vec2, angle: f64) -> Option<Vec2> {
    let speed = match &integral.validity {
        Validity::AllEnergies => 1.0,
        Validity::FixedEnergy { field, energy } => {
            let kin = energy - field.potential(q).ok()?;
            if kin <= 0.0 {
                return None;
            }
            (2.0 * kin).sqrt()
        }
    };
    Some(Vec2::from_angle(angle) * speed)
}

/// Reflection difference of `I` at `q` with the wall normal `n`.
fn reflection_difference(integral: &FirstIntegral, q: Vec2, p: Vec2, n: Vec2) -> Option<(f64, f64)> {
    let p_out = reflect(p, n).ok()?;
    let before = integral.value(&PhaseState::new(q, p));
    let after = integral.value(&PhaseState::new(q, p_out));
    (before.is_finite() && after.is_finite()).then_some((before, after))
}

/// Samples wall points (arc-length uniform) and momentum directions (uniform), reflects,
/// and compares `I` before and after.
pub fn check_reflection_invariance(
    wall: &Wall,
    integral: &FirstIntegral,
    cfg: &SampleConfig,
) -> Result<InvarianceReport, IntegralError> {
    const CHECK: &str = "reflection";
    if integral.event_indexed {
        return Ok(InvarianceReport::not_applicable(
            CHECK,
            integral,
            cfg.tol,
            Some(cfg.seed),
            "event-indexed integral",
        ));
    }
    let sampler = wall.sampler(cfg.extent)?;
    let results = cfg.exec.map(&draws(cfg), |d| {
        let (j, q) = sampler.point_at(d.u).ok()?;
        let p = momentum(integral, q, d.angle)?;
        let (_, n) = wall.components[j].eval_and_gradient(q);
        let (before, after) = reflection_difference(integral, q, p, n)?;
        Some((scaled_violation(before, after), PhaseState::new(q, p)))
    });
    let skipped = results.iter().filter(|r| r.is_none()).count();
    let violations: Vec<_> = results.into_iter().flatten().collect();
    let mut report =
        InvarianceReport::from_violations(CHECK, integral, cfg.tol, Some(cfg.seed), &violations);
    if skipped > 0 && report.note.is_none() {
        report.note = Some(format!("{skipped} samples skipped"));
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorizationReport {
    pub integral: String,
    pub seed: u64,
    pub n_samples: usize,
    /// Largest scaled reflection difference on the wall.
    pub on_wall_max: f64,
    /// Median log-log slope of the off-wall difference against `|F|`; close to 1 when the
    /// difference carries the wall equation as a simple factor.
    pub off_wall_slope: f64,
    pub tolerance: f64,
    pub factorizes: bool,
}

impl FactorizationReport {
    pub fn to_key_values(&self) -> String {
        format!(
            "check = factorization\nintegral = {}\nseed = {}\nn_samples = {}\non_wall_max = {:e}\n\
             off_wall_slope = {:e}\ntolerance = {:e}\nfactorizes = {}\n",
            self.integral,
            self.seed,
            self.n_samples,
            self.on_wall_max,
            self.off_wall_slope,
            self.tolerance,
            self.factorizes
        )
    }
}

/// Checks that the reflection difference of `I` vanishes on the wall and grows linearly in
/// `|F|` when the reflection rule is applied on nearby level sets of the wall function.
pub fn factorization_check(
    wall: &Wall,
    integral: &FirstIntegral,
    cfg: &SampleConfig,
) -> Result<FactorizationReport, IntegralError> {
    let sampler = wall.sampler(cfg.extent)?;
    let results = cfg.exec.map(&draws(cfg), |d| {
        let (j, q0) = sampler.point_at(d.u).ok()?;
        let comp = &wall.components[j];
        let p0 = momentum(integral, q0, d.angle)?;
        let (_, n0) = comp.eval_and_gradient(q0);
        let (b, a) = reflection_difference(integral, q0, p0, n0)?;
        let on_wall = scaled_violation(b, a);
        let unit = n0.normalized();
        let mut pts = Vec::with_capacity(FACTOR_OFFSETS.len());
        for d_off in FACTOR_OFFSETS {
            let q = q0 + unit * d_off;
            let p = momentum(integral, q, d.angle)?;
            let (fv, n) = comp.eval_and_gradient(q);
            let (b, a) = reflection_difference(integral, q, p, n)?;
            pts.push((fv.abs(), (a - b).abs() / b.abs().max(1.0)));
        }
        let (first, last) = (pts[0], pts[pts.len() - 1]);
        let slope = if first.1 > 1e-9 && last.1 > 0.0 && first.0 > last.0 {
            Some((first.1 / last.1).ln() / (first.0 / last.0).ln())
        } else {
            None
        };
        Some((on_wall, slope))
    });
    let valid: Vec<_> = results.into_iter().flatten().collect();
    let on_wall_max = valid.iter().map(|v| v.0).fold(0.0, f64::max);
    let mut slopes: Vec<f64> = valid.iter().filter_map(|v| v.1).collect();
    slopes.sort_by(f64::total_cmp);
    let off_wall_slope = if slopes.is_empty() { f64::NAN } else { slopes[slopes.len() / 2] };
    Ok(FactorizationReport {
        integral: integral.name.clone(),
        seed: cfg.seed,
        n_samples: valid.len(),
        on_wall_max,
        off_wall_slope,
        tolerance: cfg.tol,
        factorizes: !valid.is_empty()
            && on_wall_max <= cfg.tol
            && (0.9..=1.1).contains(&off_wall_slope),
    })
}
