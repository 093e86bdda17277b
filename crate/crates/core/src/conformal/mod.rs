//! Power maps `z ↦ z^k`, the Birkhoff map `z ↦ (z + 1/z)/2`, their cotangent lifts and
//! inverse branches.

mod pairing;
mod walls;

pub use pairing::{make_duality, DualityPairing, PairingError, PAIRING_EPS};
pub use walls::{
    image_closed_form, map_wall, preimage_closed_form, pull_wall, BranchPolicy, ImageComponent,
    MappedWall, TaggedPolyline,
};

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;

use crate::fields::PhaseState;
use crate::vec2::Vec2;

/// Distance to a branch point below which lifts and inverse branches are refused.
pub const BRANCH_EPS: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MapError {
    #[error("the Birkhoff map is undefined at the origin")]
    OriginForBirkhoff,
    #[error("lift is singular at branch point {z}")]
    BranchPoint { z: Vec2 },
    #[error("{q} is the image of a branch point")]
    BranchPointImage { q: Vec2 },
    #[error("power map degree must be at least 2, got {k}")]
    InvalidDegree { k: u32 },
    #[error("unsupported pairing: {0}")]
    UnsupportedPairing(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConformalMap {
    #[default]
    Identity,
    Power {
        k: u32,
    },
    Birkhoff,
}

impl fmt::Display for ConformalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConformalMap::Identity => write!(f, "identity"),
            ConformalMap::Power { k } => write!(f, "power(k={k})"),
            ConformalMap::Birkhoff => write!(f, "birkhoff"),
        }
    }
}

impl ConformalMap {
    pub fn power(k: u32) -> Result<Self, MapError> {
        if k < 2 {
            Err(MapError::InvalidDegree { k })
        } else {
            Ok(ConformalMap::Power { k })
        }
    }

    /// Number of preimages of a generic point.
    pub fn degree(&self) -> usize {
        match self {
            ConformalMap::Identity => 1,
            ConformalMap::Power { k } => *k as usize,
            ConformalMap::Birkhoff => 2,
        }
    }

    pub fn forward(&self, z: Vec2) -> Result<Vec2, MapError> {
        match self {
            ConformalMap::Birkhoff if z == Vec2::ZERO => Err(MapError::OriginForBirkhoff),
            _ => Ok(Vec2::from_complex(self.forward_c(z.to_complex()))),
        }
    }

    #[inline]
    pub(crate) fn forward_c(&self, z: Complex64) -> Complex64 {
        match self {
            ConformalMap::Identity => z,
            ConformalMap::Power { k } => z.powu(*k),
            ConformalMap::Birkhoff => 0.5 * (z + z.inv()),
        }
    }

    /// Complex derivative `φ'(z)`.
    pub fn derivative(&self, z: Vec2) -> Complex64 {
        let z = z.to_complex();
        match self {
            ConformalMap::Identity => Complex64::new(1.0, 0.0),
            ConformalMap::Power { k } => f64::from(*k) * z.powu(k - 1),
            ConformalMap::Birkhoff => 0.5 * (1.0 - (z * z).inv()),
        }
    }

    /// Differential applied to a tangent vector.
    pub fn differential(&self, z: Vec2, v: Vec2) -> Vec2 {
        Vec2::from_complex(self.derivative(z) * v.to_complex())
    }

    /// Constant `σ` with `lift* (dp∧dq) = σ (dw∧dz)`.
    pub fn symplectic_factor(&self) -> f64 {
        match self {
            ConformalMap::Power { k } => f64::from(*k),
            _ => 1.0,
        }
    }

    /// Points where the derivative vanishes or the map is undefined.
    pub fn branch_points(&self) -> Vec<Vec2> {
        match self {
            ConformalMap::Identity => vec![],
            ConformalMap::Power { .. } => vec![Vec2::ZERO],
            ConformalMap::Birkhoff => vec![Vec2::ZERO, Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0)],
        }
    }

    /// Images of the branch points.
    pub fn critical_values(&self) -> Vec<Vec2> {
        match self {
            ConformalMap::Identity => vec![],
            ConformalMap::Power { .. } => vec![Vec2::ZERO],
            ConformalMap::Birkhoff => vec![Vec2::new(1.0, 0.0), Vec2::new(-1.0, 0.0)],
        }
    }

    fn check_lift_domain(&self, z: Vec2) -> Result<(), MapError> {
        if self.branch_points().iter().any(|b| z.distance(*b) < BRANCH_EPS) {
            Err(MapError::BranchPoint { z })
        } else {
            Ok(())
        }
    }

    /// `conj(φ'(z))/σ`: the lift sends `w` to `w / lift_factor(z)`.
    fn lift_factor(&self, z: Vec2) -> Complex64 {
        (self.derivative(z) / self.symplectic_factor()).conj()
    }

    /// Cotangent lift. For `Power{k}` this is the normalized `p = w / z̄^{k−1}`; for Birkhoff
    /// `p = 2w / (1 − z̄⁻²)`.
    pub fn lift(&self, z: Vec2, w: Vec2) -> Result<(Vec2, Vec2), MapError> {
        self.check_lift_domain(z)?;
        let q = self.forward(z)?;
        let p = w.to_complex() / self.lift_factor(z);
        Ok((q, Vec2::from_complex(p)))
    }

    pub fn lift_state(&self, s: &PhaseState) -> Result<PhaseState, MapError> {
        let (q, p) = self.lift(s.q, s.p)?;
        Ok(PhaseState::new(q, p))
    }

    /// Source momentum `w` over the preimage `z` of the target state with momentum `p`.
    pub fn inverse_lift(&self, z: Vec2, p: Vec2) -> Result<Vec2, MapError> {
        self.check_lift_domain(z)?;
        Ok(Vec2::from_complex(p.to_complex() * self.lift_factor(z)))
    }

    /// All preimages of `q`, indexed by branch tag.
    ///
    /// `Power{k}`: branch `j` has argument in `[2πj/k, 2π(j+1)/k)`. Birkhoff: branch 0 lies
    /// outside the unit circle, branch 1 inside.
    pub fn inverse_branches(&self, q: Vec2) -> Result<Vec<Vec2>, MapError> {
        match self {
            ConformalMap::Identity => Ok(vec![q]),
            ConformalMap::Power { k } => {
                if q.norm() < BRANCH_EPS {
                    return Err(MapError::BranchPointImage { q });
                }
                if *k == 2 {
                    let z = sqrt_closed_form(q);
                    return Ok(vec![z, -z]);
                }
                let kf = f64::from(*k);
                let r = q.norm().powf(1.0 / kf);
                let theta = q.y.atan2(q.x).rem_euclid(TAU);
                Ok((0..*k)
                    .map(|j| Vec2::from_angle((theta + TAU * f64::from(j)) / kf) * r)
                    .collect())
            }
            ConformalMap::Birkhoff => {
                if self.critical_values().iter().any(|c| q.distance(*c) < BRANCH_EPS) {
                    return Err(MapError::BranchPointImage { q });
                }
                let qc = q.to_complex();
                let s = (qc * qc - 1.0).sqrt();
                let (a, b) = (qc + s, qc - s);
                let outer = if a.norm_sqr() >= b.norm_sqr() { a } else { b };
                Ok(vec![Vec2::from_complex(outer), Vec2::from_complex(outer.inv())])
            }
        }
    }

    /// Branch tag of the preimage `z`.
    pub fn branch_of(&self, z: Vec2) -> usize {
        match self {
            ConformalMap::Identity => 0,
            ConformalMap::Power { k } => {
                let sector = TAU / f64::from(*k);
                let arg = z.y.atan2(z.x).rem_euclid(TAU);
                ((arg / sector + 1e-12).floor() as usize) % *k as usize
            }
            ConformalMap::Birkhoff => usize::from(z.norm_sq() < 1.0),
        }
    }

    /// Preimage of `q` closest to `hint`; used to continue a branch along a path.
    pub fn nearest_branch(&self, q: Vec2, hint: Vec2) -> Result<Vec2, MapError> {
        Ok(self
            .inverse_branches(q)?
            .into_iter()
            .min_by(|a, b| a.distance(hint).total_cmp(&b.distance(hint)))
            .expect("nonempty branch list"))
    }

    /// Time-change factor `g(z)`: `|z|^{2k−2}` for `Power{k}`,
    /// `|z−1|²|z+1|²/(4|z|⁴)` for Birkhoff.
    pub fn reparam_factor(&self, z: Vec2) -> f64 {
        match self {
            ConformalMap::Identity => 1.0,
            ConformalMap::Power { k } => z.norm_sq().powi(*k as i32 - 1),
            ConformalMap::Birkhoff => {
                let e = Vec2::new(1.0, 0.0);
                let r2 = z.norm_sq();
                (z - e).norm_sq() * (z + e).norm_sq() / (4.0 * r2 * r2)
            }
        }
    }

    /// `dt/dτ`: target-plane time elapsed per unit source-plane time.
    pub fn time_rate(&self, z: Vec2) -> f64 {
        self.symplectic_factor() * self.reparam_factor(z)
    }
}

/// Square root with non-negative imaginary part, written in the real form
/// `z₁ = q₂/√(2(|q| − q₁))`, `z₂ = √(2(|q| − q₁))/2`. The radicand is evaluated without
/// cancellation near the positive real axis.
pub fn sqrt_closed_form(q: Vec2) -> Vec2 {
    let r = q.norm();
    let d = if q.x > 0.0 { q.y * q.y / (r + q.x) } else { r - q.x };
    if d == 0.0 {
        return Vec2::new(q.x.max(0.0).sqrt(), 0.0);
    }
    let s = (2.0 * d).sqrt();
    let z = Vec2::new(q.y / s, 0.5 * s);
    if z.y == 0.0 && z.x < 0.0 {
        -z
    } else {
        z
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn close(a: Vec2, b: Vec2, tol: f64) -> bool {
        a.distance(b) <= tol
    }

    #[test]
    fn forward_examples() {
        let p2 = ConformalMap::Power { k: 2 };
        assert_eq!(p2.forward(Vec2::new(1.0, 1.0)).unwrap(), Vec2::new(0.0, 2.0));
        let b = ConformalMap::Birkhoff;
        assert!(close(b.forward(Vec2::new(0.0, 1.0)).unwrap(), Vec2::ZERO, 1e-16));
        assert_eq!(b.forward(Vec2::ZERO), Err(MapError::OriginForBirkhoff));
        let p3 = ConformalMap::Power { k: 3 };
        assert_eq!(p3.forward(Vec2::new(1.0, 0.0)).unwrap(), Vec2::new(1.0, 0.0));
        assert_eq!(ConformalMap::power(1), Err(MapError::InvalidDegree { k: 1 }));
    }

    #[test]
    fn lift_examples() {
        let p2 = ConformalMap::Power { k: 2 };
        let (q, p) = p2.lift(Vec2::new(1.0, 1.0), Vec2::new(1.0, 0.0)).unwrap();
        assert_eq!(q, Vec2::new(0.0, 2.0));
        assert!(close(p, Vec2::new(0.5, 0.5), 1e-16));
        let (q, p) = p2.lift(Vec2::new(1.0, 0.0), Vec2::new(0.3, -0.7)).unwrap();
        assert_eq!((q, p), (Vec2::new(1.0, 0.0), Vec2::new(0.3, -0.7)));
        let (q, p) = ConformalMap::Birkhoff.lift(Vec2::new(2.0, 0.0), Vec2::new(1.0, 0.0)).unwrap();
        assert_relative_eq!(q.x, 1.25);
        assert_relative_eq!(p.x, 8.0 / 3.0, epsilon = 1e-15);
        assert!(matches!(
            ConformalMap::Birkhoff.lift(Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0)),
            Err(MapError::BranchPoint { .. })
        ));
    }

    #[test]
    fn branch_examples() {
        let p2 = ConformalMap::Power { k: 2 };
        let br = p2.inverse_branches(Vec2::new(0.0, 2.0)).unwrap();
        assert!(close(br[0], Vec2::new(1.0, 1.0), 1e-15));
        assert!(close(br[1], Vec2::new(-1.0, -1.0), 1e-15));
        let br = ConformalMap::Birkhoff.inverse_branches(Vec2::new(1.25, 0.0)).unwrap();
        assert!(close(br[0], Vec2::new(2.0, 0.0), 1e-15));
        assert!(close(br[1], Vec2::new(0.5, 0.0), 1e-15));
        let br = ConformalMap::Power { k: 3 }.inverse_branches(Vec2::new(1.0, 0.0)).unwrap();
        assert_eq!(br.len(), 3);
        for (j, z) in br.iter().enumerate() {
            assert!(close(*z, Vec2::from_angle(TAU * j as f64 / 3.0), 1e-15));
            assert_eq!(ConformalMap::Power { k: 3 }.branch_of(*z), j);
        }
        assert!(matches!(
            ConformalMap::Birkhoff.inverse_branches(Vec2::new(-1.0, 0.0)),
            Err(MapError::BranchPointImage { .. })
        ));
    }

    #[test]
    fn closed_form_sqrt_agrees_with_complex_sqrt() {
        for i in 0..200 {
            let t = i as f64 * 0.173;
            let q = Vec2::new(3.0 * t.cos() * (1.0 + 0.1 * t), 2.0 * (1.7 * t).sin());
            let z = sqrt_closed_form(q);
            let c = q.to_complex().sqrt();
            let c = if c.im < 0.0 || (c.im == 0.0 && c.re < 0.0) { -c } else { c };
            assert!(close(z, Vec2::from_complex(c), 1e-14 * (1.0 + q.norm())), "{q}");
        }
        assert_eq!(sqrt_closed_form(Vec2::new(4.0, 0.0)), Vec2::new(2.0, 0.0));
        assert_eq!(sqrt_closed_form(Vec2::new(-4.0, 0.0)), Vec2::new(0.0, 2.0));
    }

    #[test]
    fn reparam_examples() {
        let p2 = ConformalMap::Power { k: 2 };
        assert_relative_eq!(p2.reparam_factor(Vec2::from_angle(0.7)), 1.0, epsilon = 1e-15);
        assert_relative_eq!(ConformalMap::Power { k: 3 }.reparam_factor(Vec2::new(0.0, 2.0)), 16.0);
        assert_relative_eq!(ConformalMap::Birkhoff.reparam_factor(Vec2::new(0.0, 1.0)), 1.0);
    }
}
