//! Force fields with potential `V`, acceleration `−∇V` and Hamiltonian `|p|²/2 + V`.

use std::fmt;

use num_complex::Complex64;

use crate::vec2::Vec2;

/// Radius around singular points inside which evaluation reports [`FieldError::SingularPoint`].
pub const EPS_COLL: f64 = 1e-9;
pub const MAX_POLY_DEGREE: usize = 16;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("state at {q} is within {EPS_COLL:e} of a singularity")]
    SingularPoint { q: Vec2 },
    #[error("polynomial has nonzero odd coefficient at degree {degree}")]
    OddCoefficient { degree: usize },
    #[error("polynomial degree {degree} exceeds {MAX_POLY_DEGREE}")]
    DegreeTooHigh { degree: usize },
}

/// Univariate polynomial, constant term first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Result<Self, FieldError> {
        let mut c: Vec<f64> = coeffs.into();
        while c.last() == Some(&0.0) {
            c.pop();
        }
        if c.len() > MAX_POLY_DEGREE + 1 {
            return Err(FieldError::DegreeTooHigh { degree: c.len() - 1 });
        }
        Ok(Poly(c))
    }

    /// Even polynomial from its coefficients; odd coefficients must be exactly zero.
    pub fn even(coeffs: impl Into<Vec<f64>>) -> Result<Self, FieldError> {
        let p = Self::new(coeffs)?;
        if let Some(degree) = p.0.iter().enumerate().position(|(i, &c)| i % 2 == 1 && c != 0.0) {
            return Err(FieldError::OddCoefficient { degree });
        }
        Ok(p)
    }

    /// `c·x^n`.
    pub fn monomial(c: f64, n: usize) -> Self {
        let mut v = vec![0.0; n + 1];
        v[n] = c;
        Poly(v)
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly(self.0.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect())
    }

    /// Value and first derivative in one pass.
    pub fn eval_with_derivative(&self, x: f64) -> (f64, f64) {
        let mut v = 0.0;
        let mut d = 0.0;
        for &c in self.0.iter().rev() {
            d = d * x + v;
            v = v * x + c;
        }
        (v, d)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly(
            (0..n)
                .map(|i| self.0.get(i).copied().unwrap_or(0.0) + other.0.get(i).copied().unwrap_or(0.0))
                .collect(),
        )
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForceField {
    Free,
    /// `V = f|z|²`.
    Hooke { f: f64 },
    /// `V = −mu/|q|`.
    Kepler { mu: f64 },
    /// `V = s|q|^alpha`.
    RadialPower { s: f64, alpha: f64 },
    /// `V = −mu/|q| − g q₁`.
    Stark { mu: f64, g: f64 },
    /// `V = −mu/|q| − g q₁² − (g/4) q₂²`.
    FrozenHill { mu: f64, g: f64 },
    /// `V = −m1/|q − (1,0)| − m2/|q + (1,0)|`.
    TwoCenter { m1: f64, m2: f64 },
    /// `V = −mu/|q| + (g1(z₁) + g2(z₂))/|z|²` with `z² = q`.
    SeparableStarkCustom { mu: f64, g1: Poly, g2: Poly },
    /// `V = u1(x) + u2(y)`.
    Separable { u1: Poly, u2: Poly },
    /// Zero-level partner of the two-center problem under `z ↦ (z + 1/z)/2`:
    /// `V = −m1|z+1|²/(2|z|³) − m2|z−1|²/(2|z|³) + f|z−1|²|z+1|²/(4|z|⁴)`.
    TwoCenterDual { m1: f64, m2: f64, f: f64 },
}

/// Phase-space point: position and momentum (unit mass).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseState {
    pub q: Vec2,
    pub p: Vec2,
}

impl PhaseState {
    pub const fn new(q: Vec2, p: Vec2) -> Self {
        Self { q, p }
    }

    pub fn from_array(y: [f64; 4]) -> Self {
        Self::new(Vec2::new(y[0], y[1]), Vec2::new(y[2], y[3]))
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.q.x, self.q.y, self.p.x, self.p.y]
    }

    pub fn is_finite(&self) -> bool {
        self.q.is_finite() && self.p.is_finite()
    }

    pub fn kinetic(&self) -> f64 {
        0.5 * self.p.norm_sq()
    }

    /// Rotate both position and momentum about the origin.
    pub fn rotated(self, angle: f64) -> Self {
        Self::new(self.q.rotated(angle), self.p.rotated(angle))
    }
}

const EAST: Vec2 = Vec2::new(1.0, 0.0);
const WEST: Vec2 = Vec2::new(-1.0, 0.0);

/// `x/|x|³`, gradient of `−1/|x|`.
#[inline]
fn inv_cube(x: Vec2) -> Vec2 {
    let r2 = x.norm_sq();
    x / (r2 * r2.sqrt())
}

impl ForceField {
    pub fn stark(mu: f64, g: f64) -> Self {
        ForceField::Stark { mu, g }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ForceField::Free => "free",
            ForceField::Hooke { .. } => "hooke",
            ForceField::Kepler { .. } => "kepler",
            ForceField::RadialPower { .. } => "radial_power",
            ForceField::Stark { .. } => "stark",
            ForceField::FrozenHill { .. } => "frozen_hill",
            ForceField::TwoCenter { .. } => "two_center",
            ForceField::SeparableStarkCustom { .. } => "separable_stark_custom",
            ForceField::Separable { .. } => "separable",
            ForceField::TwoCenterDual { .. } => "two_center_dual",
        }
    }

    /// Points where the potential blows up.
    pub fn singularities(&self) -> Vec<Vec2> {
        match self {
            ForceField::Free | ForceField::Hooke { .. } | ForceField::Separable { .. } => vec![],
            ForceField::RadialPower { s, alpha } => {
                if *s != 0.0 && *alpha < 1.0 && *alpha != 0.0 {
                    vec![Vec2::ZERO]
                } else {
                    vec![]
                }
            }
            ForceField::TwoCenter { .. } => vec![EAST, WEST],
            ForceField::Kepler { .. }
            | ForceField::Stark { .. }
            | ForceField::FrozenHill { .. }
            | ForceField::SeparableStarkCustom { .. }
            | ForceField::TwoCenterDual { .. } => vec![Vec2::ZERO],
        }
    }

    /// Distance from `q` to the nearest singularity (infinite if there are none).
    pub fn singular_distance(&self, q: Vec2) -> f64 {
        self.singularities()
            .into_iter()
            .map(|s| q.distance(s))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check_regular(&self, q: Vec2) -> Result<(), FieldError> {
        if self.singular_distance(q) < EPS_COLL {
            Err(FieldError::SingularPoint { q })
        } else {
            Ok(())
        }
    }

    pub fn potential(&self, q: Vec2) -> Result<f64, FieldError> {
        self.check_regular(q)?;
        Ok(self.potential_unchecked(q))
    }

    pub fn accel(&self, q: Vec2) -> Result<Vec2, FieldError> {
        self.check_regular(q)?;
        Ok(self.accel_unchecked(q))
    }

    pub fn hamiltonian(&self, s: &PhaseState) -> Result<f64, FieldError> {
        Ok(s.kinetic() + self.potential(s.q)?)
    }

    pub fn potential_unchecked(&self, q: Vec2) -> f64 {
        match self {
            ForceField::Free => 0.0,
            ForceField::Hooke { f } => f * q.norm_sq(),
            ForceField::Kepler { mu } => -mu / q.norm(),
            ForceField::RadialPower { s, alpha } => s * q.norm().powf(*alpha),
            ForceField::Stark { mu, g } => -mu / q.norm() - g * q.x,
            ForceField::FrozenHill { mu, g } => {
                -mu / q.norm() - g * q.x * q.x - 0.25 * g * q.y * q.y
            }
            ForceField::TwoCenter { m1, m2 } => -m1 / (q - EAST).norm() - m2 / (q - WEST).norm(),
            ForceField::SeparableStarkCustom { mu, g1, g2 } => {
                let z = sqrt_branch(q);
                -mu / q.norm() + (g1.eval(z.x) + g2.eval(z.y)) / z.norm_sq()
            }
            ForceField::Separable { u1, u2 } => u1.eval(q.x) + u2.eval(q.y),
            ForceField::TwoCenterDual { m1, m2, f } => {
                let r2 = q.norm_sq();
                let r3 = r2 * r2.sqrt();
                let a = (q + EAST).norm_sq();
                let b = (q - EAST).norm_sq();
                -m1 * a / (2.0 * r3) - m2 * b / (2.0 * r3) + f * a * b / (4.0 * r2 * r2)
            }
        }
    }

    /// `−∇V(q)`, analytic.
    pub fn accel_unchecked(&self, q: Vec2) -> Vec2 {
        match self {
            ForceField::Free => Vec2::ZERO,
            ForceField::Hooke { f } => q * (-2.0 * f),
            ForceField::Kepler { mu } => inv_cube(q) * -mu,
            ForceField::RadialPower { s, alpha } => {
                let r2 = q.norm_sq();
                if r2 == 0.0 {
                    return Vec2::ZERO;
                }
                q * (-s * alpha * r2.powf(0.5 * alpha - 1.0))
            }
            ForceField::Stark { mu, g } => inv_cube(q) * -mu + Vec2::new(*g, 0.0),
            ForceField::FrozenHill { mu, g } => {
                inv_cube(q) * -mu + Vec2::new(2.0 * g * q.x, 0.5 * g * q.y)
            }
            ForceField::TwoCenter { m1, m2 } => {
                inv_cube(q - EAST) * -m1 - inv_cube(q - WEST) * *m2
            }
            ForceField::SeparableStarkCustom { mu, g1, g2 } => {
                let z = sqrt_branch(q);
                let r2 = z.norm_sq();
                let (v1, d1) = g1.eval_with_derivative(z.x);
                let (v2, d2) = g2.eval_with_derivative(z.y);
                let w = v1 + v2;
                // ∇_z of W/|z|²
                let gz = Vec2::new(d1, d2) / r2 - z * (2.0 * w / (r2 * r2));
                // ∇_q = conj(dz/dq) ∇_z with dz/dq = 1/(2z)
                let dz = (2.0 * z.to_complex()).inv().conj();
                let gq = Vec2::from_complex(dz * gz.to_complex());
                inv_cube(q) * -mu - gq
            }
            ForceField::Separable { u1, u2 } => {
                let d1 = u1.eval_with_derivative(q.x).1;
                let d2 = u2.eval_with_derivative(q.y).1;
                Vec2::new(-d1, -d2)
            }
            ForceField::TwoCenterDual { m1, m2, f } => {
                let r2 = q.norm_sq();
                let r = r2.sqrt();
                let r3 = r2 * r;
                let a = (q + EAST).norm_sq();
                let b = (q - EAST).norm_sq();
                let ga = (q + EAST) * 2.0;
                let gb = (q - EAST) * 2.0;
                // ∇(1/|z|³) = −3z/|z|⁵, ∇(1/|z|⁴) = −4z/|z|⁶
                let g_r3 = q * (-3.0 / (r3 * r2));
                let g_r4 = q * (-4.0 / (r2 * r2 * r2));
                let grad = (ga / r3 + g_r3 * a) * (-0.5 * m1)
                    + (gb / r3 + g_r3 * b) * (-0.5 * m2)
                    + ((ga * b + gb * a) / (r2 * r2) + g_r4 * (a * b)) * (0.25 * f);
                -grad
            }
        }
    }

    /// Vector field of Hamilton's equations on `[q1, q2, p1, p2]`.
    #[inline]
    pub fn rhs(&self, y: &[f64; 4]) -> [f64; 4] {
        let a = self.accel_unchecked(Vec2::new(y[0], y[1]));
        [y[2], y[3], a.x, a.y]
    }
}

/// Principal square root of `q` as a complex number.
pub(crate) fn sqrt_branch(q: Vec2) -> Vec2 {
    Vec2::from_complex(Complex64::new(q.x, q.y).sqrt())
}

/// Stark-type field `−mu/|q| + (g1(z₁) + g2(z₂))/|z|²`. Both polynomials must be even.
/// Vanishing polynomials and `mu = 0` give [`ForceField::Free`].
pub fn stark_type_from_even_polynomials(
    mu: f64,
    g1: &[f64],
    g2: &[f64],
) -> Result<ForceField, FieldError> {
    let g1 = Poly::even(g1.to_vec())?;
    let g2 = Poly::even(g2.to_vec())?;
    if mu == 0.0 && g1.is_zero() && g2.is_zero() {
        return Ok(ForceField::Free);
    }
    Ok(ForceField::SeparableStarkCustom { mu, g1, g2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spec_examples() {
        let k = ForceField::Kepler { mu: 1.0 };
        assert_eq!(k.potential(Vec2::new(1.0, 0.0)).unwrap(), -1.0);
        assert_eq!(k.accel(Vec2::new(1.0, 0.0)).unwrap(), Vec2::new(-1.0, 0.0));
        let h = ForceField::Hooke { f: 1.0 };
        assert_eq!(h.potential(Vec2::new(1.0, 0.0)).unwrap(), 1.0);
        assert_eq!(h.accel(Vec2::new(1.0, 0.0)).unwrap(), Vec2::new(-2.0, 0.0));
        let tc = ForceField::TwoCenter { m1: 1.0, m2: 1.0 };
        assert_eq!(tc.potential(Vec2::ZERO).unwrap(), -2.0);
        assert_eq!(tc.accel(Vec2::ZERO).unwrap(), Vec2::ZERO);

        let s = PhaseState::new(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0));
        assert_eq!(h.hamiltonian(&s).unwrap(), 1.5);
        let s = PhaseState::new(Vec2::new(2.0, 0.0), Vec2::new(0.0, 0.5f64.sqrt()));
        assert_relative_eq!(k.hamiltonian(&s).unwrap(), -0.25, epsilon = 1e-15);
    }

    #[test]
    fn singular_point_is_reported() {
        let k = ForceField::Kepler { mu: 1.0 };
        assert!(matches!(k.accel(Vec2::new(1e-10, 0.0)), Err(FieldError::SingularPoint { .. })));
        let tc = ForceField::TwoCenter { m1: 1.0, m2: 1.0 };
        assert!(tc.potential(Vec2::new(-1.0, 0.0)).is_err());
        assert!(ForceField::Hooke { f: 1.0 }.potential(Vec2::ZERO).is_ok());
    }

    #[test]
    fn odd_coefficients_rejected() {
        assert_eq!(
            stark_type_from_even_polynomials(1.0, &[0.0, 0.0, 1.0, 0.5], &[]),
            Err(FieldError::OddCoefficient { degree: 3 })
        );
        assert_eq!(stark_type_from_even_polynomials(0.0, &[0.0], &[]), Ok(ForceField::Free));
        assert!(matches!(Poly::new(vec![1.0; 18]), Err(FieldError::DegreeTooHigh { degree: 17 })));
    }

    #[test]
    fn poly_evaluation() {
        let p = Poly::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(p.eval(2.0), 17.0);
        assert_eq!(p.eval_with_derivative(2.0), (17.0, 14.0));
        assert_eq!(p.derivative(), Poly(vec![2.0, 6.0]));
    }
}
