//! Compare a pushed-forward source billiard with a billiard simulated directly in the target
//! plane.

use std::fmt::Write as _;

use confbill_core::billiard::{integrate_arc, simulate, simulate_via_source, Trajectory};
use confbill_core::conformal::{map_wall, BranchPolicy};
use confbill_core::geometry::{Curve, Wall};
use confbill_core::{DualityPairing, Execution, PhaseState, SimConfig, Stop, Vec2};

use crate::scenario::Resolved;
use crate::{LabError, Result};

/// Samples recorded per integrator step on both sides.
pub const SAMPLES_PER_STEP: usize = 8;
/// Time corrections used to find the point of the direct path nearest a pushed sample.
const NEAREST_ITER: usize = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub index: usize,
    pub source_events: usize,
    pub direct_events: usize,
    /// Largest distance between corresponding reflection points.
    pub event_deviation: f64,
    /// Largest difference between corresponding reflection times.
    pub time_deviation: f64,
    /// Largest distance between a pushed sample and the direct path as a point set.
    pub path_deviation: f64,
    /// Largest distance between a pushed sample and the direct path at the same time.
    pub synchronous_deviation: f64,
    pub path_samples: usize,
    pub source_outcome: &'static str,
    pub direct_outcome: &'static str,
}

impl Comparison {
    pub fn deviation(&self) -> f64 {
        if self.source_events != self.direct_events {
            f64::INFINITY
        } else {
            self.event_deviation.max(self.path_deviation)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConjugacyReport {
    pub name: String,
    pub map: String,
    pub tolerance: f64,
    pub comparisons: Vec<Comparison>,
}

impl ConjugacyReport {
    pub fn max_deviation(&self) -> f64 {
        self.comparisons.iter().map(Comparison::deviation).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        !self.comparisons.is_empty() && self.max_deviation() <= self.tolerance
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "scenario = {}", self.name);
        let _ = writeln!(s, "map = {}", self.map);
        let _ = writeln!(s, "tolerance = {:e}", self.tolerance);
        for c in &self.comparisons {
            let _ = writeln!(s, "[initial {}]", c.index);
            let _ = writeln!(s, "source_events = {}", c.source_events);
            let _ = writeln!(s, "direct_events = {}", c.direct_events);
            let _ = writeln!(s, "event_deviation = {:e}", c.event_deviation);
            let _ = writeln!(s, "time_deviation = {:e}", c.time_deviation);
            let _ = writeln!(s, "path_deviation = {:e}", c.path_deviation);
            let _ = writeln!(s, "synchronous_deviation = {:e}", c.synchronous_deviation);
            let _ = writeln!(s, "path_samples = {}", c.path_samples);
            let _ = writeln!(s, "source_outcome = {}", c.source_outcome);
            let _ = writeln!(s, "direct_outcome = {}", c.direct_outcome);
        }
        let _ = writeln!(s, "max_deviation = {:e}", self.max_deviation());
        let _ = writeln!(s, "result = {}", if self.passed() { "pass" } else { "fail" });
        s
    }
}

/// Target-plane wall: catalogued image conics where they exist, covering curves elsewhere.
/// Components with the same image conic are kept once.
pub fn target_wall(pairing: &DualityPairing, source_wall: &Wall) -> Result<Wall> {
    let mapped = map_wall(pairing.map, source_wall, BranchPolicy::ClosedForm, 256, 10.0)?;
    let mut wall = Wall::new();
    let mut seen: Vec<[f64; 6]> = Vec::new();
    for comp in mapped.wall.components {
        if let Curve::Conic(c) = &comp.curve {
            let key = c.normalized().as_array();
            let dup = seen.iter().any(|k| {
                k.iter().zip(&key).all(|(a, b)| (a - b).abs() <= 1e-12)
                    || k.iter().zip(&key).all(|(a, b)| (a + b).abs() <= 1e-12)
            });
            if dup {
                continue;
            }
            seen.push(key);
        }
        wall.components.push(comp);
    }
    Ok(wall)
}

/// State of `direct` at time `t` on arc `arc`, re-integrated from the last sample before `t`.
fn direct_state_at(
    pairing: &DualityPairing,
    direct: &Trajectory,
    arc: usize,
    t: f64,
    tol: f64,
) -> Option<PhaseState> {
    let samples = &direct.arcs.get(arc)?.samples;
    let start = samples.iter().rev().find(|s| s.t <= t).or(samples.first())?;
    let dt = t - start.t;
    if dt <= 0.0 {
        return Some(start.state);
    }
    let steps = integrate_arc(&pairing.target_field, start.state, dt, tol).ok()?;
    steps.last().map(|s| PhaseState::from_array(s.y1))
}

fn compare_one(
    pairing: &DualityPairing,
    source_wall: &Wall,
    target_wall: &Wall,
    index: usize,
    s0: PhaseState,
    stop: Stop,
    cfg: &SimConfig,
) -> Result<Comparison> {
    let cfg = SimConfig {
        samples_per_step: SAMPLES_PER_STEP,
        branch_hint: Some(s0.q),
        ..cfg.clone()
    };
    let t0 = pairing.push_state(&s0).map_err(|e| LabError::Runtime(format!("initial {index}: {e}")))?;
    let via = simulate_via_source(pairing, source_wall, t0, stop, &cfg)?;
    let direct_stop = match via.events.len() {
        0 => Stop::Time(via.samples().last().map_or(0.0, |(_, s)| s.t)),
        n => Stop::Reflections(n),
    };
    let direct = simulate(&pairing.target_field, target_wall, t0, direct_stop, &cfg)?;

    let pairs = via.events.iter().zip(&direct.events);
    let event_deviation = pairs.clone().map(|(a, b)| a.q.distance(b.q)).fold(0.0, f64::max);
    let time_deviation = pairs.map(|(a, b)| (a.t - b.t).abs()).fold(0.0, f64::max);

    let pushed: Vec<(usize, f64, Vec2)> = via.samples().map(|(k, s)| (k, s.t, s.state.q)).collect();
    let devs = Execution::default().map(&pushed, |&(k, t, q)| {
        let at = |t| direct_state_at(pairing, &direct, k, t, cfg.tol);
        let sync = at(t)?;
        let mut near = sync;
        let mut tn = t;
        for _ in 0..NEAREST_ITER {
            let speed2 = near.p.norm_sq();
            if speed2 == 0.0 {
                break;
            }
            tn += (q - near.q).dot(near.p) / speed2;
            near = at(tn)?;
        }
        Some((near.q.distance(q).min(sync.q.distance(q)), sync.q.distance(q)))
    });
    let path_samples = devs.iter().flatten().count();
    let worst = |f: fn(&(f64, f64)) -> f64| {
        devs.iter().map(|d| d.as_ref().map_or(f64::INFINITY, f)).fold(0.0, f64::max)
    };
    let path_deviation = worst(|d| d.0);
    let synchronous_deviation = worst(|d| d.1);

    Ok(Comparison {
        index,
        source_events: via.events.len(),
        direct_events: direct.events.len(),
        event_deviation,
        time_deviation,
        path_deviation,
        synchronous_deviation,
        path_samples,
        source_outcome: via.outcome.label(),
        direct_outcome: direct.outcome.label(),
    })
}

/// Run the comparison for every initial state of a scenario with a duality block.
pub fn run(res: &Resolved) -> Result<ConjugacyReport> {
    let pairing = res
        .pairing
        .as_ref()
        .ok_or_else(|| LabError::Config("conjugacy needs a [duality] block".into()))?;
    if res.wall.is_empty() {
        return Err(LabError::Config("conjugacy needs at least one wall".into()));
    }
    if res.initial.is_empty() {
        return Err(LabError::Config("conjugacy needs at least one initial state".into()));
    }
    let tw = target_wall(pairing, &res.wall)?;
    let comparisons = res
        .initial
        .iter()
        .enumerate()
        .map(|(i, s)| compare_one(pairing, &res.wall, &tw, i, *s, res.stop, &res.sim))
        .collect::<Result<_>>()?;
    Ok(ConjugacyReport {
        name: res.name.clone(),
        map: pairing.map.to_string(),
        tolerance: res.conjugacy_tol,
        comparisons,
    })
}
