//! Flow between walls, crossing detection and elastic reflection.

use crate::billiard::events::brent;
use crate::billiard::integrator::{DenseStep, Dopri5, IntegratorError, System};
use crate::conformal::{ConformalMap, DualityPairing, MapError, PairingError};
use crate::fields::{FieldError, ForceField, PhaseState, EPS_COLL};
use crate::geometry::{Curve, Wall};
use crate::par::Execution;
use crate::vec2::Vec2;

pub const GRAZING_EPS: f64 = 1e-8;
/// Target for `|F|` at a polished event point.
pub const EVENT_TOL: f64 = 1e-13;
pub const SUBINTERVALS: usize = 8;
pub const DEFAULT_MAX_STEPS: usize = 1_000_000;
pub const DEFAULT_TOL: f64 = 1e-11;
pub const ESCAPE_RADIUS: f64 = 1e6;
/// Roots closer than this to the start of an arc are ignored.
pub const T_EXCLUDE: f64 = 1e-12;
/// Distance `|F|/|∇F|` below which a tangential touch counts as grazing.
const TOUCH_DIST: f64 = 1e-10;
const POLISH_ITER: usize = 12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Integrator(#[from] IntegratorError),
    #[error("reflection normal vanishes")]
    ZeroNormal,
    #[error("initial state is not finite")]
    NonFiniteState,
    #[error("initial state is off the pairing level (residual {residual:e})")]
    OffLevel { residual: f64 },
}

impl From<PairingError> for SimError {
    fn from(e: PairingError) -> Self {
        match e {
            PairingError::Map(m) => SimError::Map(m),
            PairingError::Field(f) => SimError::Field(f),
        }
    }
}

/// Mirror `p` in the line orthogonal to `n`: `p − 2(p·n/|n|²)n`.
pub fn reflect(p: Vec2, n: Vec2) -> Result<Vec2, SimError> {
    let nn = n.norm_sq();
    if nn == 0.0 || !nn.is_finite() {
        return Err(SimError::ZeroNormal);
    }
    Ok(p - n * (2.0 * p.dot(n) / nn))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    Reflections(usize),
    /// Integration time limit.
    Time(f64),
    Either { reflections: usize, time: f64 },
}

impl Stop {
    fn reflections(&self) -> usize {
        match *self {
            Stop::Reflections(n) | Stop::Either { reflections: n, .. } => n,
            Stop::Time(_) => usize::MAX,
        }
    }

    fn time(&self) -> f64 {
        match *self {
            Stop::Time(t) | Stop::Either { time: t, .. } => t,
            Stop::Reflections(_) => f64::INFINITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub tol: f64,
    pub max_steps: usize,
    pub escape_radius: f64,
    /// Recorded samples per accepted step (1 records step ends only).
    pub samples_per_step: usize,
    /// Preimage used to pick the starting branch of covering walls.
    pub branch_hint: Option<Vec2>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_steps: DEFAULT_MAX_STEPS,
            escape_radius: ESCAPE_RADIUS,
            samples_per_step: 1,
            branch_hint: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: PhaseState,
}

/// Samples between two consecutive events.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Arc {
    pub samples: Vec<Sample>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionEvent {
    pub t: f64,
    pub q: Vec2,
    pub p_in: Vec2,
    pub p_out: Vec2,
    pub component: usize,
    pub branch: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Completed,
    CollisionStop { t: f64, q: Vec2 },
    Escaped { t: f64 },
    StepLimit,
    StepUnderflow { t: f64 },
    ZeroNormal { t: f64, q: Vec2 },
}

impl Outcome {
    pub fn is_completed(&self) -> bool {
        matches!(self, Outcome::Completed)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Completed => "completed",
            Outcome::CollisionStop { .. } => "collision-stop",
            Outcome::Escaped { .. } => "escaped",
            Outcome::StepLimit => "step-limit",
            Outcome::StepUnderflow { .. } => "step-underflow",
            Outcome::ZeroNormal { .. } => "zero-normal",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub arcs: Vec<Arc>,
    pub events: Vec<ReflectionEvent>,
    pub outcome: Outcome,
    /// Tangential touches and grazing crossings passed through.
    pub grazing: usize,
    pub steps: usize,
}

impl Trajectory {
    pub fn samples(&self) -> impl Iterator<Item = (usize, &Sample)> {
        self.arcs.iter().enumerate().flat_map(|(i, a)| a.samples.iter().map(move |s| (i, s)))
    }

    pub fn final_state(&self) -> Option<PhaseState> {
        self.arcs.last().and_then(|a| a.samples.last()).map(|s| s.state)
    }

    pub fn event_points(&self) -> Vec<Vec2> {
        self.events.iter().map(|e| e.q).collect()
    }
}

/// Hamiltonian flow plus a clock `y[4]` advancing at `rate(q)`.
struct Flow<'a> {
    field: &'a ForceField,
    clock: Option<ConformalMap>,
}

impl System<5> for Flow<'_> {
    #[inline]
    fn rhs(&self, y: &[f64; 5]) -> [f64; 5] {
        let q = Vec2::new(y[0], y[1]);
        let a = self.field.accel_unchecked(q);
        let rate = self.clock.map_or(1.0, |m| m.time_rate(q));
        [y[2], y[3], a.x, a.y, rate]
    }
}

#[inline]
fn state_of<const N: usize>(y: &[f64; N]) -> PhaseState {
    PhaseState::new(Vec2::new(y[0], y[1]), Vec2::new(y[2], y[3]))
}

#[derive(Debug, Clone, Copy)]
struct Probe {
    value: f64,
    grad: Vec2,
    hint: Vec2,
}

fn probe(curve: &Curve, q: Vec2, hint: Vec2) -> Probe {
    let (value, grad, hint) = curve.eval_on_branch(q, hint);
    Probe { value, grad, hint }
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// Side of the curve the state is on, using the momentum when the point is on the curve.
fn side_of(pr: &Probe, p: Vec2) -> f64 {
    let scale = pr.grad.norm().max(1.0);
    if pr.value.abs() <= 1e3 * EVENT_TOL * scale {
        let v = p.dot(pr.grad);
        if v != 0.0 {
            return sign(v);
        }
    }
    sign(pr.value)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossingKind {
    Transversal,
    /// Incidence with `|p·n|/(|p||n|) < GRAZING_EPS`, or a tangential touch.
    Grazing,
}

/// Earliest wall crossing found along an arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub t: f64,
    pub state: PhaseState,
    pub component: usize,
    pub kind: CrossingKind,
    pub normal: Vec2,
    pub hint: Vec2,
}

struct Tracker {
    side: f64,
    hint: Vec2,
}

/// Scans one dense step for crossings of all components, starting from `trackers`.
/// Returns the candidate crossings sorted by time. Trackers are advanced to the end of the
/// step only by the caller.
fn scan_step<const N: usize>(
    step: &DenseStep<N>,
    t_lo: f64,
    wall: &Wall,
    trackers: &[Tracker],
) -> Vec<(usize, f64, f64, Vec2)> {
    let mut found = Vec::new();
    let span = step.t1() - t_lo;
    if span <= 0.0 {
        return found;
    }
    let times: Vec<f64> = (0..=SUBINTERVALS)
        .map(|i| {
            if i == SUBINTERVALS {
                step.t1()
            } else {
                t_lo + span * i as f64 / SUBINTERVALS as f64
            }
        })
        .collect();
    let states: Vec<PhaseState> = times
        .iter()
        .enumerate()
        .map(|(i, &t)| if i == SUBINTERVALS { state_of(&step.y1) } else { state_of(&step.eval(t)) })
        .collect();
    for (j, comp) in wall.components.iter().enumerate() {
        let tr = &trackers[j];
        let mut hint = tr.hint;
        let mut prev = probe(&comp.curve, states[0].q, hint);
        let mut prev_t = times[0];
        let mut prev_p = states[0].p;
        for i in 1..=SUBINTERVALS {
            let cur = probe(&comp.curve, states[i].q, prev.hint);
            let (ta, tb) = (prev_t, times[i]);
            let f = |t: f64| {
                let s = state_of(&step.eval(t));
                probe(&comp.curve, s.q, hint).value
            };
            if !cur.value.is_finite() {
                break;
            }
            if sign(cur.value) != tr.side && cur.value != 0.0 {
                if let Some(root) = bracket_root(&f, ta, tb, tr.side, prev.value, cur.value) {
                    found.push((j, root, ta, hint));
                }
                break;
            }
            // possible double crossing or touch inside the subinterval
            let da = tr.side * prev_p.dot(prev.grad);
            let db = tr.side * states[i].p.dot(cur.grad);
            if da < 0.0 && db > 0.0 {
                let df = |t: f64| {
                    let s = state_of(&step.eval(t));
                    let pr = probe(&comp.curve, s.q, hint);
                    tr.side * s.p.dot(pr.grad)
                };
                if let Some(te) = brent(df, ta, tb, da, db, 1e-14) {
                    let se = state_of(&step.eval(te));
                    let pe = probe(&comp.curve, se.q, hint);
                    if tr.side * pe.value < 0.0 {
                        if let Some(root) = bracket_root(&f, ta, te, tr.side, prev.value, pe.value)
                        {
                            found.push((j, root, ta, hint));
                            break;
                        }
                    } else if pe.value.abs() <= TOUCH_DIST * pe.grad.norm() {
                        found.push((j, te, ta, hint));
                        break;
                    }
                }
            }
            hint = cur.hint;
            prev = cur;
            prev_t = tb;
            prev_p = states[i].p;
        }
    }
    found.sort_by(|a, b| a.1.total_cmp(&b.1));
    found
}

/// Root of `f` in `(ta, tb]` given that `f(tb)` lies on the far side. If `f(ta)` is not
/// strictly on `side` (just after a reflection), the bracket start is moved inward. Long
/// brackets are narrowed on a geometric grid of offsets from `ta` before refining.
fn bracket_root(f: &impl Fn(f64) -> f64, ta: f64, tb: f64, side: f64, fa: f64, fb: f64) -> Option<f64> {
    let xtol = 1e-14 * (1.0 + ta.abs());
    let span = tb - ta;
    let mut inside = (side * fa > 0.0).then_some((ta, fa));
    let mut dt = (T_EXCLUDE * 1e-2).min(span * 1e-9);
    while dt < 0.1 * span {
        let t = ta + dt;
        dt *= 10.0;
        let v = f(t);
        if side * v > 0.0 {
            inside = Some((t, v));
        } else if let Some((t0, v0)) = inside {
            return brent(f, t0, t, v0, v, xtol);
        }
    }
    inside.and_then(|(t0, v0)| brent(f, t0, tb, v0, fb, xtol))
}

/// Event state at the root near `t_root`, recomputed with a direct step from the start of
/// `step` and refined by Newton iteration on time until `|F| <= EVENT_TOL`.
fn polish<S: System<5>>(
    integ: &mut Dopri5<5>,
    sys: &S,
    step: &DenseStep<5>,
    curve: &Curve,
    t_root: f64,
    hint: Vec2,
) -> ([f64; 5], f64, Probe) {
    let at = |integ: &mut Dopri5<5>, t: f64| {
        let y = if t == step.t0 { step.y0 } else { integ.fixed_step(sys, &step.y0, t - step.t0) };
        let s = state_of(&y);
        (y, probe(curve, s.q, hint))
    };
    let dense_y = step.eval(t_root);
    let dense_pr = probe(curve, state_of(&dense_y).q, hint);
    let mut best = (dense_y, t_root, dense_pr);
    let mut t = t_root;
    for _ in 0..POLISH_ITER {
        let (y, pr) = at(integ, t);
        if pr.value.abs() <= EVENT_TOL {
            return (y, t, pr);
        }
        if pr.value.abs() < best.2.value.abs() {
            best = (y, t, pr);
        }
        let rate = Vec2::new(y[2], y[3]).dot(pr.grad);
        if rate == 0.0 || !rate.is_finite() {
            break;
        }
        let dt = -pr.value / rate;
        if (t + dt - t_root).abs() > 0.5 * step.h.abs() + 1e-12 {
            break;
        }
        t += dt;
    }
    best
}

struct Engine<'a> {
    field: &'a ForceField,
    wall: &'a Wall,
    cfg: &'a SimConfig,
    clock: Option<ConformalMap>,
}

impl Engine<'_> {
    fn run(&self, state0: PhaseState, stop: Stop) -> Result<Trajectory, SimError> {
        let sys = Flow { field: self.field, clock: self.clock };
        let mut integ = Dopri5::<5>::new(self.cfg.tol)?;
        if !(state0.q.is_finite() && state0.p.is_finite()) {
            return Err(SimError::NonFiniteState);
        }
        self.field.check_regular(state0.q)?;
        let hint0 = self.cfg.branch_hint.unwrap_or(state0.q);
        let mut trackers: Vec<Tracker> = self
            .wall
            .components
            .iter()
            .map(|c| {
                let start = match &c.curve {
                    Curve::Covering { map, .. } => match self.cfg.branch_hint {
                        Some(h) => map.nearest_branch(state0.q, h),
                        None => map.inverse_branches(state0.q).map(|b| b[0]),
                    }?,
                    _ => hint0,
                };
                let pr = probe(&c.curve, state0.q, start);
                Ok(Tracker { side: side_of(&pr, state0.p), hint: pr.hint })
            })
            .collect::<Result<_, MapError>>()?;

        let t_max = stop.time();
        let n_max = stop.reflections();
        let mut t = 0.0;
        let mut y = [state0.q.x, state0.q.y, state0.p.x, state0.p.y, 0.0];
        let mut arcs = vec![Arc { samples: vec![Sample { t: 0.0, state: state0 }] }];
        let mut events = Vec::new();
        let mut grazing = 0;
        let mut steps = 0;
        let mut arc_start = 0.0;
        let finish = |arcs, events, outcome, grazing, steps| {
            Ok(Trajectory { arcs, events, outcome, grazing, steps })
        };
        if n_max == 0 || t_max <= 0.0 {
            return finish(arcs, events, Outcome::Completed, grazing, steps);
        }

        loop {
            if steps >= self.cfg.max_steps {
                return finish(arcs, events, Outcome::StepLimit, grazing, steps);
            }
            let step = match integ.step(&sys, t, &y, t_max - t) {
                Ok(s) => s,
                Err(IntegratorError::StepUnderflow { t }) => {
                    return finish(arcs, events, Outcome::StepUnderflow { t }, grazing, steps)
                }
                Err(e) => return Err(e.into()),
            };
            steps += 1;
            let t_lo = step.t0.max(arc_start + T_EXCLUDE).min(step.t1());
            let candidates = scan_step(&step, t_lo, self.wall, &trackers);

            let mut event = None;
            for &(j, root, _, hint) in &candidates {
                let comp = &self.wall.components[j];
                let (ye, te, pr) = polish(&mut integ, &sys, &step, &comp.curve, root, hint);
                let s = state_of(&ye);
                let nn = pr.grad.norm();
                let pn = s.p.norm();
                let grazes = pn == 0.0 || (s.p.dot(pr.grad)).abs() < GRAZING_EPS * pn * nn;
                if !comp.reflects() || (grazes && nn > 0.0) {
                    if grazes {
                        grazing += 1;
                    }
                    continue;
                }
                event = Some((j, ye, te, pr));
                break;
            }

            if let Some((j, ye, te, pr)) = event {
                let s = state_of(&ye);
                if let Some(c) = self.collision(&step, te) {
                    return finish(arcs, events, c, grazing, steps);
                }
                let p_out = match reflect(s.p, pr.grad) {
                    Ok(p) => p,
                    Err(_) => {
                        let o = Outcome::ZeroNormal { t: ye[4], q: s.q };
                        return finish(arcs, events, o, grazing, steps);
                    }
                };
                self.record(arcs.last_mut().expect("arc"), &step, te);
                arcs.last_mut().expect("arc").samples.push(Sample { t: ye[4], state: s });
                let branch = match &self.wall.components[j].curve {
                    Curve::Covering { map, .. } => Some(map.branch_of(pr.hint)),
                    _ => None,
                };
                events.push(ReflectionEvent {
                    t: ye[4],
                    q: s.q,
                    p_in: s.p,
                    p_out,
                    component: j,
                    branch,
                });
                let out = PhaseState::new(s.q, p_out);
                arcs.push(Arc { samples: vec![Sample { t: ye[4], state: out }] });
                for (k, (tr, comp)) in trackers.iter_mut().zip(&self.wall.components).enumerate() {
                    let hint = if k == j { pr.hint } else { tr.hint };
                    let cur = probe(&comp.curve, s.q, hint);
                    tr.hint = cur.hint;
                    tr.side = if k == j { sign(p_out.dot(pr.grad)) } else { side_of(&cur, p_out) };
                }
                y = [s.q.x, s.q.y, p_out.x, p_out.y, ye[4]];
                t = te;
                arc_start = te;
                if events.len() >= n_max {
                    return finish(arcs, events, Outcome::Completed, grazing, steps);
                }
                continue;
            }

            if let Some(c) = self.collision(&step, step.t1()) {
                return finish(arcs, events, c, grazing, steps);
            }
            let end = state_of(&step.y1);
            for (tr, comp) in trackers.iter_mut().zip(&self.wall.components) {
                let cur = probe(&comp.curve, end.q, tr.hint);
                tr.hint = cur.hint;
                if cur.value.is_finite() && cur.value != 0.0 {
                    tr.side = sign(cur.value);
                }
            }
            self.record(arcs.last_mut().expect("arc"), &step, step.t1());
            t = step.t1();
            y = step.y1;
            arcs.last_mut().expect("arc").samples.push(Sample { t: y[4], state: end });
            if end.q.norm() > self.cfg.escape_radius {
                return finish(arcs, events, Outcome::Escaped { t: y[4] }, grazing, steps);
            }
            if t >= t_max {
                return finish(arcs, events, Outcome::Completed, grazing, steps);
            }
        }
    }

    /// Interior samples of `step` up to `t_end` (exclusive).
    fn record(&self, arc: &mut Arc, step: &DenseStep<5>, t_end: f64) {
        let n = self.cfg.samples_per_step.max(1);
        for i in 1..n {
            let t = step.t0 + step.h * i as f64 / n as f64;
            if t >= t_end {
                break;
            }
            let y = step.eval(t);
            arc.samples.push(Sample { t: y[4], state: state_of(&y) });
        }
    }

    /// Collision outcome if the step passes within `EPS_COLL` of a singularity before `t_end`.
    fn collision(&self, step: &DenseStep<5>, t_end: f64) -> Option<Outcome> {
        if self.field.singularities().is_empty() {
            return None;
        }
        (0..=SUBINTERVALS).find_map(|i| {
            let t = step.t0 + (t_end - step.t0) * i as f64 / SUBINTERVALS as f64;
            let y = step.eval(t);
            let q = Vec2::new(y[0], y[1]);
            (self.field.singular_distance(q) < EPS_COLL || !q.is_finite())
                .then_some(Outcome::CollisionStop { t: y[4], q })
        })
    }
}

/// Billiard trajectory of `field` inside `wall` from `state0`.
pub fn simulate(
    field: &ForceField,
    wall: &Wall,
    state0: PhaseState,
    stop: Stop,
    cfg: &SimConfig,
) -> Result<Trajectory, SimError> {
    Engine { field, wall, cfg, clock: None }.run(state0, stop)
}

/// Independent simulations from many initial states, in input order.
pub fn simulate_batch(
    field: &ForceField,
    wall: &Wall,
    states: &[PhaseState],
    stop: Stop,
    cfg: &SimConfig,
    exec: Execution,
) -> Vec<Result<Trajectory, SimError>> {
    exec.map(states, |s| simulate(field, wall, *s, stop, cfg))
}

/// Simulate on the source side of `pairing` and push the result to the target plane.
///
/// `state0` is a target-plane state on the pairing's target level. The source trajectory
/// carries a clock integrating `dt/dτ`, so reported times are target-plane times. The time
/// limit in `stop` applies to source-plane time.
pub fn simulate_via_source(
    pairing: &DualityPairing,
    source_wall: &Wall,
    state0: PhaseState,
    stop: Stop,
    cfg: &SimConfig,
) -> Result<Trajectory, SimError> {
    let h = pairing.target_field.hamiltonian(&state0)?;
    let residual = h - pairing.target_energy;
    if residual.abs() > 1e-9 * (1.0 + h.abs().max(pairing.target_energy.abs())) {
        return Err(SimError::OffLevel { residual });
    }
    let src0 = pairing.pull_state(&state0, cfg.branch_hint)?;
    let source = Engine {
        field: &pairing.source_field,
        wall: source_wall,
        cfg,
        clock: Some(pairing.map),
    }
    .run(src0, stop)?;
    push_trajectory(pairing.map, &source)
}

/// Lift every sample and event of a source-plane trajectory. Times are carried over unchanged.
pub fn push_trajectory(map: ConformalMap, source: &Trajectory) -> Result<Trajectory, SimError> {
    let arcs = source
        .arcs
        .iter()
        .map(|a| {
            let samples = a
                .samples
                .iter()
                .map(|s| Ok(Sample { t: s.t, state: map.lift_state(&s.state)? }))
                .collect::<Result<_, MapError>>()?;
            Ok(Arc { samples })
        })
        .collect::<Result<_, MapError>>()?;
    let events = source
        .events
        .iter()
        .map(|e| {
            let (q, p_in) = map.lift(e.q, e.p_in)?;
            let (_, p_out) = map.lift(e.q, e.p_out)?;
            Ok(ReflectionEvent {
                t: e.t,
                q,
                p_in,
                p_out,
                component: e.component,
                branch: match map {
                    ConformalMap::Identity => e.branch,
                    _ => Some(map.branch_of(e.q)),
                },
            })
        })
        .collect::<Result<_, MapError>>()?;
    let outcome = match source.outcome {
        Outcome::CollisionStop { t, q } => {
            Outcome::CollisionStop { t, q: map.forward(q).unwrap_or(q) }
        }
        Outcome::ZeroNormal { t, q } => Outcome::ZeroNormal { t, q: map.forward(q).unwrap_or(q) },
        o => o,
    };
    Ok(Trajectory { arcs, events, outcome, grazing: source.grazing, steps: source.steps })
}

/// Arc of `field` from `state` over `[0, t_end]` without walls, with its dense steps.
pub fn integrate_arc(
    field: &ForceField,
    state: PhaseState,
    t_end: f64,
    tol: f64,
) -> Result<Vec<DenseStep<4>>, SimError> {
    field.check_regular(state.q)?;
    let sys = |y: &[f64; 4]| field.rhs(y);
    let mut integ = Dopri5::<4>::new(tol)?;
    let mut t = 0.0;
    let mut y = state.to_array();
    let mut out = Vec::new();
    while t < t_end {
        let step = integ.step(&sys, t, &y, t_end - t)?;
        t = step.t1();
        y = step.y1;
        let q = Vec2::new(y[0], y[1]);
        if field.singular_distance(q) < EPS_COLL {
            return Err(FieldError::SingularPoint { q }.into());
        }
        out.push(step);
    }
    Ok(out)
}

/// Earliest crossing of `wall` along the dense steps of an arc starting on the side given
/// by the initial state.
pub fn detect_crossing(steps: &[DenseStep<4>], wall: &Wall) -> Option<Crossing> {
    let first = steps.first()?;
    let s0 = state_of(&first.y0);
    let mut trackers: Vec<Tracker> = wall
        .components
        .iter()
        .map(|c| {
            let pr = probe(&c.curve, s0.q, s0.q);
            Tracker { side: side_of(&pr, s0.p), hint: pr.hint }
        })
        .collect();
    for step in steps {
        if let Some(&(j, root, _, hint)) = scan_step(step, step.t0, wall, &trackers).first() {
            let s = state_of(&step.eval(root));
            let pr = probe(&wall.components[j].curve, s.q, hint);
            let nn = pr.grad.norm();
            let grazes = s.p.dot(pr.grad).abs() < GRAZING_EPS * s.p.norm() * nn;
            return Some(Crossing {
                t: root,
                state: s,
                component: j,
                kind: if grazes { CrossingKind::Grazing } else { CrossingKind::Transversal },
                normal: pr.grad,
                hint: pr.hint,
            });
        }
        let end = state_of(&step.y1);
        for (tr, comp) in trackers.iter_mut().zip(&wall.components) {
            let cur = probe(&comp.curve, end.q, tr.hint);
            tr.hint = cur.hint;
            if cur.value != 0.0 {
                tr.side = sign(cur.value);
            }
        }
    }
    None
}
