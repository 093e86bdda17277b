//! Billiard flows: integration between walls, event location and reflection.

mod events;
mod integrator;
mod simulate;

pub use events::brent;
pub use integrator::{DenseStep, Dopri5, IntegratorError, System, MAX_TOL, MIN_STEP, MIN_TOL};
pub use simulate::{
    detect_crossing, integrate_arc, push_trajectory, reflect, simulate, simulate_batch,
    simulate_via_source, Arc, Crossing, CrossingKind, Outcome, ReflectionEvent, Sample, SimConfig,
    SimError, Stop, Trajectory, DEFAULT_MAX_STEPS, DEFAULT_TOL, ESCAPE_RADIUS, EVENT_TOL,
    GRAZING_EPS, SUBINTERVALS, T_EXCLUDE,
};
