//! First integrals of mechanical billiards and numerical checks of their invariance.

mod catalogue;
mod checks;

use std::fmt;
use std::sync::Arc;

pub use catalogue::*;
pub use checks::*;

use crate::billiard::SimError;
use crate::conformal::{DualityPairing, PairingError};
use crate::fields::{FieldError, ForceField, PhaseState};
use crate::geometry::GeometryError;
use crate::vec2::Vec2;

/// Relative distance to the energy level below which a state counts as on-level.
pub const LEVEL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegralError {
    #[error("parameter {name} = {value} is outside its domain")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("{name} is not defined at {q}")]
    Singular { name: String, q: Vec2 },
    #[error("integral lives in the {found} plane, expected the {expected} plane")]
    PlaneMismatch { expected: Plane, found: Plane },
    #[error("no separated integral for a {0} field")]
    UnsupportedField(&'static str),
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    /// The `z`-plane of a conformal pairing.
    Source,
    /// The physical `q`-plane.
    Target,
}

impl fmt::Display for Plane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Plane::Source => "source",
            Plane::Target => "target",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Validity {
    AllEnergies,
    /// Only meaningful on `{field.hamiltonian = energy}`.
    FixedEnergy { field: ForceField, energy: f64 },
}

type Evaluator = Arc<dyn Fn(&PhaseState) -> f64 + Send + Sync>;

/// A named phase-space function with its parameters and domain.
#[derive(Clone)]
pub struct FirstIntegral {
    pub name: String,
    pub params: Vec<(String, f64)>,
    pub validity: Validity,
    pub plane: Plane,
    /// Compared between consecutive reflections (at the outgoing momentum) rather than
    /// along the flow.
    pub event_indexed: bool,
    eval: Evaluator,
}

impl fmt::Debug for FirstIntegral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FirstIntegral")
            .field("name", &self.name)
            .field("params", &self.params)
            .field("validity", &self.validity)
            .field("plane", &self.plane)
            .field("event_indexed", &self.event_indexed)
            .finish_non_exhaustive()
    }
}

impl FirstIntegral {
    pub fn new(
        name: impl Into<String>,
        params: &[(&str, f64)],
        validity: Validity,
        plane: Plane,
        eval: impl Fn(&PhaseState) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            validity,
            plane,
            event_indexed: false,
            eval: Arc::new(eval),
        }
    }

    pub fn event_indexed(mut self) -> Self {
        self.event_indexed = true;
        self
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    /// Value at `s`; fails where the evaluator is not finite.
    pub fn eval(&self, s: &PhaseState) -> Result<f64, IntegralError> {
        let v = (self.eval)(s);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(IntegralError::Singular { name: self.name.clone(), q: s.q })
        }
    }

    /// Raw evaluator value, possibly non-finite.
    pub fn value(&self, s: &PhaseState) -> f64 {
        (self.eval)(s)
    }

    /// Relative distance of `s` to the level of a fixed-energy integral; zero otherwise.
    pub fn level_residual(&self, s: &PhaseState) -> f64 {
        match &self.validity {
            Validity::AllEnergies => 0.0,
            Validity::FixedEnergy { field, energy } => match field.hamiltonian(s) {
                Ok(h) => (h - energy).abs() / energy.abs().max(1.0),
                Err(_) => f64::INFINITY,
            },
        }
    }

    pub fn on_level(&self, s: &PhaseState) -> bool {
        self.level_residual(s) <= LEVEL_TOL
    }

    /// `I ∘ lift`: the integral seen in the source plane of `pairing`.
    pub fn pullback(&self, pairing: &DualityPairing) -> Result<FirstIntegral, IntegralError> {
        pullback_integral(pairing, self)
    }
}

/// `I ∘ lift` for a target-plane integral. The result is tied to the source level of the
/// pairing unless the map is the identity.
pub fn pullback_integral(
    pairing: &DualityPairing,
    integral: &FirstIntegral,
) -> Result<FirstIntegral, IntegralError> {
    if integral.plane != Plane::Target {
        return Err(IntegralError::PlaneMismatch {
            expected: Plane::Target,
            found: integral.plane,
        });
    }
    let map = pairing.map;
    let inner = integral.eval.clone();
    let validity = match (map, &integral.validity) {
        (crate::conformal::ConformalMap::Identity, v) => v.clone(),
        _ => Validity::FixedEnergy {
            field: pairing.source_field.clone(),
            energy: pairing.source_energy,
        },
    };
    Ok(FirstIntegral {
        name: format!("{}_pullback", integral.name),
        params: integral.params.clone(),
        validity,
        plane: Plane::Source,
        event_indexed: integral.event_indexed,
        eval: Arc::new(move |s| match map.lift_state(s) {
            Ok(t) => inner(&t),
            Err(_) => f64::NAN,
        }),
    })
}

/// `I ∘ lift⁻¹` for a source-plane integral, using inverse branch 0. Intended for integrals
/// that take the same value on every branch.
pub fn pushforward_integral(
    pairing: &DualityPairing,
    integral: &FirstIntegral,
) -> Result<FirstIntegral, IntegralError> {
    if integral.plane != Plane::Source {
        return Err(IntegralError::PlaneMismatch {
            expected: Plane::Source,
            found: integral.plane,
        });
    }
    let p = pairing.clone();
    let inner = integral.eval.clone();
    let validity = match (pairing.map, &integral.validity) {
        (crate::conformal::ConformalMap::Identity, v) => v.clone(),
        _ => Validity::FixedEnergy {
            field: pairing.target_field.clone(),
            energy: pairing.target_energy,
        },
    };
    Ok(FirstIntegral {
        name: format!("{}_pushforward", integral.name),
        params: integral.params.clone(),
        validity,
        plane: Plane::Target,
        event_indexed: integral.event_indexed,
        eval: Arc::new(move |s| match p.pull_state(s, None) {
            Ok(z) => inner(&z),
            Err(_) => f64::NAN,
        }),
    })
}
