//! Mechanical billiards with conic walls and their conformal correspondences.

pub mod billiard;
pub mod conformal;
pub mod fields;
pub mod geometry;
pub mod integrals;
pub mod par;
pub mod vec2;

pub use billiard::{simulate, SimConfig, Stop, Trajectory};
pub use conformal::{ConformalMap, DualityPairing};
pub use fields::{ForceField, PhaseState};
pub use geometry::{ConicCoeffs, Curve, Wall};
pub use integrals::{FirstIntegral, InvarianceReport, Verdict};
pub use par::Execution;
pub use vec2::Vec2;
