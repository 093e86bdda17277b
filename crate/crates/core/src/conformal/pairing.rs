//! Iso-energetic pairings between a source field in the `z`-plane and a target field in the
//! `q`-plane, related by a conformal map and a time change.

use crate::conformal::{ConformalMap, MapError};
use crate::fields::{FieldError, ForceField, PhaseState, Poly};
use crate::vec2::Vec2;

/// Tolerance for matching the exponent of a radial target to the map degree.
pub const PAIRING_EPS: f64 = 1e-12;

/// `g(z)·(H_target∘lift − target_energy) = H_source − source_energy` on every state.
#[derive(Debug, Clone, PartialEq)]
pub struct DualityPairing {
    pub map: ConformalMap,
    pub source_field: ForceField,
    pub source_energy: f64,
    pub target_field: ForceField,
    pub target_energy: f64,
}

impl DualityPairing {
    pub fn reparam(&self, z: Vec2) -> f64 {
        self.map.reparam_factor(z)
    }

    /// `g·(H_t∘lift − e_t) − (H_s − e_s)` at a source state.
    pub fn residual(&self, s: &PhaseState) -> Result<f64, PairingError> {
        let t = self.map.lift_state(s)?;
        let lhs = self.reparam(s.q) * (self.target_field.hamiltonian(&t)? - self.target_energy);
        let rhs = self.source_field.hamiltonian(s)? - self.source_energy;
        Ok(lhs - rhs)
    }

    /// Source state over the target state, on the branch nearest `hint` (or branch 0).
    pub fn pull_state(
        &self,
        t: &PhaseState,
        hint: Option<Vec2>,
    ) -> Result<PhaseState, PairingError> {
        let z = match hint {
            Some(h) => self.map.nearest_branch(t.q, h)?,
            None => self.map.inverse_branches(t.q)?[0],
        };
        let w = self.map.inverse_lift(z, t.p)?;
        Ok(PhaseState::new(z, w))
    }

    pub fn push_state(&self, s: &PhaseState) -> Result<PhaseState, PairingError> {
        Ok(self.map.lift_state(s)?)
    }

    /// Identity pairing of a field with itself.
    pub fn identity(field: ForceField, energy: f64) -> Self {
        Self {
            map: ConformalMap::Identity,
            source_field: field.clone(),
            source_energy: energy,
            target_field: field,
            target_energy: energy,
        }
    }

    /// `Hooke{f}` at energy `mu` paired with `Kepler{mu}` at energy `−f` under `z ↦ z²`.
    pub fn hooke_kepler(f: f64, mu: f64) -> Self {
        make_duality(ConformalMap::Power { k: 2 }, ForceField::Kepler { mu }, -f)
            .expect("Kepler pairs under the square map")
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PairingError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Source potential `f|z|^{2k−2}`.
fn source_radial(k: u32, f: f64) -> ForceField {
    if f == 0.0 {
        ForceField::Free
    } else if k == 2 {
        ForceField::Hooke { f }
    } else {
        ForceField::RadialPower { s: f, alpha: f64::from(2 * k - 2) }
    }
}

/// Source field for a target of the form `−mu/|q| + W(q)` with `|z|²·W(z²) = p1(z₁) + p2(z₂)`.
fn stark_source(f: f64, p1: Poly, p2: Poly) -> ForceField {
    let quad = Poly::monomial(f, 2);
    ForceField::Separable { u1: quad.add(&p1), u2: quad.add(&p2) }
}

/// Build the pairing whose target is `target_field` at `target_energy`.
///
/// Supported: `Power{k}` with `Free` or `RadialPower{s, −(2k−2)/k}` targets (`Kepler` when
/// `k = 2`); `Power{2}` with `Stark`, `FrozenHill` and `SeparableStarkCustom`; Birkhoff with
/// `TwoCenter`; and the identity map with any field.
pub fn make_duality(
    map: ConformalMap,
    target_field: ForceField,
    target_energy: f64,
) -> Result<DualityPairing, MapError> {
    let f = -target_energy;
    let unsupported = || {
        MapError::UnsupportedPairing(format!("{} target under {map}", target_field.name()))
    };
    let (source_field, source_energy) = match (map, &target_field) {
        (ConformalMap::Identity, _) => (target_field.clone(), target_energy),
        (ConformalMap::Power { k }, ForceField::Free) => (source_radial(k, f), 0.0),
        (ConformalMap::Power { k }, &ForceField::RadialPower { s, alpha }) => {
            if s == 0.0 {
                (source_radial(k, f), 0.0)
            } else if (f64::from(k) * alpha + f64::from(2 * k - 2)).abs() <= PAIRING_EPS {
                (source_radial(k, f), -s)
            } else {
                return Err(unsupported());
            }
        }
        (ConformalMap::Power { k: 2 }, &ForceField::Kepler { mu }) => (source_radial(2, f), mu),
        (ConformalMap::Power { k: 2 }, &ForceField::Stark { mu, g }) => (
            stark_source(f, Poly::monomial(-g, 4), Poly::monomial(g, 4)),
            mu,
        ),
        (ConformalMap::Power { k: 2 }, &ForceField::FrozenHill { mu, g }) => (
            stark_source(f, Poly::monomial(-g, 6), Poly::monomial(-g, 6)),
            mu,
        ),
        (ConformalMap::Power { k: 2 }, ForceField::SeparableStarkCustom { mu, g1, g2 }) => {
            (stark_source(f, g1.clone(), g2.clone()), *mu)
        }
        (ConformalMap::Birkhoff, &ForceField::TwoCenter { m1, m2 }) => {
            (ForceField::TwoCenterDual { m1, m2, f }, 0.0)
        }
        _ => return Err(unsupported()),
    };
    Ok(DualityPairing { map, source_field, source_energy, target_field, target_energy })
}
