//! Closed-form first integrals.

use crate::conformal::{make_duality, ConformalMap};
use crate::fields::{ForceField, PhaseState};
use crate::geometry::{ConicCoeffs, GeometryError};
use crate::integrals::{FirstIntegral, IntegralError, Plane, Validity};
use crate::vec2::Vec2;

fn check_param(name: &'static str, value: f64, ok: bool) -> Result<(), IntegralError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(IntegralError::InvalidParameter { name, value })
    }
}

/// `q₁p₂ − q₂p₁`.
pub fn angular_momentum(s: &PhaseState) -> f64 {
    s.q.cross(s.p)
}

/// Squared angular momentum, conserved by every central field.
pub fn squared_angular_momentum(plane: Plane) -> FirstIntegral {
    FirstIntegral::new("L2", &[], Validity::AllEnergies, plane, |s| angular_momentum(s).powi(2))
}

/// Energy of `field` as a first integral of its own flow.
pub fn energy(field: &ForceField, plane: Plane) -> FirstIntegral {
    let f = field.clone();
    FirstIntegral::new("energy", &[], Validity::AllEnergies, plane, move |s| {
        f.hamiltonian(s).unwrap_or(f64::NAN)
    })
}

fn weighted_g(f: f64, k: f64, s: &PhaseState) -> f64 {
    let (z, w) = (s.q, s.p);
    (k * (2.0 * f * z.x * z.x + w.x * w.x) + angular_momentum(s).powi(2)) / (1.0 + k)
}

/// Hooke integral for the centered conic with semi-axis `a` and eccentricity `e`:
/// `(k(2f z₁² + w₁²) + L²)/(1 + k)` with `k = a²e²`.
///
/// Invariant at every centered conic with focal distance `ae` on the `z₁` axis. The recorded
/// coefficients satisfy `k1 − k2 = a²e²`.
pub fn hooke_g(f: f64, a: f64, e: f64) -> Result<FirstIntegral, IntegralError> {
    check_param("a", a, a > 0.0)?;
    check_param("e", e, e >= 0.0)?;
    check_param("f", f, true)?;
    let k = a * a * e * e;
    Ok(FirstIntegral::new(
        "hooke_G",
        &[("f", f), ("a", a), ("e", e), ("k1", k), ("k2", 0.0)],
        Validity::AllEnergies,
        Plane::Source,
        move |s| weighted_g(f, k, s),
    ))
}

/// Common Hooke integral of the confocal family with foci `(±c, 0)`.
pub fn confocal_g(f: f64, c: f64) -> Result<FirstIntegral, IntegralError> {
    check_param("c", c, c > 0.0)?;
    check_param("f", f, true)?;
    let k = c * c;
    Ok(FirstIntegral::new(
        "confocal_G",
        &[("f", f), ("c", c)],
        Validity::AllEnergies,
        Plane::Source,
        move |s| weighted_g(f, k, s),
    ))
}

/// `w₁² + 2f z₁²`, invariant at lines parallel to either axis.
pub fn hooke_line_integral(f: f64) -> FirstIntegral {
    FirstIntegral::new("hooke_line", &[("f", f)], Validity::AllEnergies, Plane::Source, move |s| {
        s.p.x * s.p.x + 2.0 * f * s.q.x * s.q.x
    })
}

/// First component of the Laplace–Runge–Lenz vector, `L p₂ − mu q₁/|q|`.
///
/// Invariant at focused parabolas with axis `q₁`; it is the limit of
/// [`gallavotti_jauslin_a`]`/(−2ã)` as `ã → ∞`.
pub fn lenz_component(mu: f64) -> FirstIntegral {
    FirstIntegral::new("lenz_e1", &[("mu", mu)], Validity::AllEnergies, Plane::Target, move |s| {
        angular_momentum(s) * s.p.y - mu * s.q.x / s.q.norm()
    })
}

/// `L² − 2ã(L p₂ − mu q₁/|q|)`, conserved by the Kepler flow and invariant at conics with
/// one focus at the origin and centre at `(ã, 0)`.
pub fn gallavotti_jauslin_a(mu: f64, a_tilde: f64) -> FirstIntegral {
    FirstIntegral::new(
        "gallavotti_jauslin_A",
        &[("mu", mu), ("a_tilde", a_tilde)],
        Validity::AllEnergies,
        Plane::Target,
        move |s| {
            let l = angular_momentum(s);
            l * l - 2.0 * a_tilde * (l * s.p.y - mu * s.q.x / s.q.norm())
        },
    )
}

/// `L² + l₁(L p₁ + mu q₂/|q|) + l₂(L p₂ − mu q₁/|q|)`.
///
/// Equals [`gallavotti_jauslin_a`] at `l₁ = 0`, `l₂ = −2ã`.
pub fn gj_general(mu: f64, l1: f64, l2: f64) -> FirstIntegral {
    FirstIntegral::new(
        "gj_general",
        &[("mu", mu), ("l1", l1), ("l2", l2)],
        Validity::AllEnergies,
        Plane::Target,
        move |s| {
            let l = angular_momentum(s);
            let r = s.q.norm();
            l * l + l1 * (l * s.p.x + mu * s.q.y / r) + l2 * (l * s.p.y - mu * s.q.x / r)
        },
    )
}

/// Joachimsthal integral `−½⟨p, ∇F(q)⟩` of a conic `F = 0`, equal at consecutive reflection
/// points when evaluated with the outgoing momentum. Centered conics should be given in the
/// normal form `x²/a² ± y²/b² − 1`.
pub fn joachimsthal(conic: ConicCoeffs) -> FirstIntegral {
    let [a, b, c, d, e, f] = conic.as_array();
    FirstIntegral::new(
        "joachimsthal_J",
        &[("A", a), ("B", b), ("C", c), ("D", d), ("E", e), ("F", f)],
        Validity::AllEnergies,
        Plane::Target,
        move |s| -0.5 * s.p.dot(conic.gradient(s.q)),
    )
    .event_indexed()
}

/// Centre and normalized quadratic form of a central conic `(x − c)ᵀM(x − c) = 1`.
pub fn central_form(conic: &ConicCoeffs) -> Result<(Vec2, [[f64; 2]; 2]), IntegralError> {
    let [a, b, c, d, e, _] = conic.as_array();
    let det = a * c - b * b / 4.0;
    if det.abs() <= 1e-14 * (a.abs() + b.abs() + c.abs()).powi(2) {
        return Err(GeometryError::Degenerate.into());
    }
    // ∇F(x0) = 0
    let x0 = Vec2::new((-d * c + e * b / 2.0) / (2.0 * det), (-e * a + d * b / 2.0) / (2.0 * det));
    let k = -conic.eval(x0);
    if k == 0.0 || !k.is_finite() {
        return Err(GeometryError::Degenerate.into());
    }
    Ok((x0, [[a / k, b / (2.0 * k)], [b / (2.0 * k), c / k]]))
}

/// Continuous Joachimsthal integral of the free flow for a central conic:
/// `pᵀMp − det(M)·((q − c) × p)²`. Invariant along straight lines and at reflections from
/// the conic.
pub fn joachimsthal_squared(conic: ConicCoeffs) -> Result<FirstIntegral, IntegralError> {
    let (c0, m) = central_form(&conic)?;
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    Ok(FirstIntegral::new(
        "joachimsthal_sq",
        &[("c1", c0.x), ("c2", c0.y), ("m11", m[0][0]), ("m12", m[0][1]), ("m22", m[1][1])],
        Validity::AllEnergies,
        Plane::Target,
        move |s| {
            let p = s.p;
            let quad = m[0][0] * p.x * p.x + 2.0 * m[0][1] * p.x * p.y + m[1][1] * p.y * p.y;
            quad - det * (s.q - c0).cross(p).powi(2)
        },
    ))
}

/// `((a² − b²)w₁² + L²)/(a²b²) + (z₁w₁/a² + z₂w₂/b²)² − 1/b²`, which vanishes at unit-speed
/// states on the ellipse `z₁²/a² + z₂²/b² = 1`.
pub fn joachimsthal_bridge_residual(a: f64, b: f64, s: &PhaseState) -> f64 {
    let (a2, b2) = (a * a, b * b);
    let (z, w) = (s.q, s.p);
    let l = angular_momentum(s);
    ((a2 - b2) * w.x * w.x + l * l) / (a2 * b2) + (z.x * w.x / a2 + z.y * w.y / b2).powi(2)
        - 1.0 / b2
}

/// `C·sin θ` for a parabola with the given focus and axis: `C` is the angular momentum about
/// the focus and `θ` the angle of the momentum with the axis.
pub fn parabola_gamma(focus: Vec2, axis: Vec2) -> Result<FirstIntegral, IntegralError> {
    check_param("axis", axis.norm(), axis.norm() > 0.0)?;
    let u = axis.normalized();
    Ok(FirstIntegral::new(
        "parabola_gamma",
        &[("focus1", focus.x), ("focus2", focus.y), ("axis1", u.x), ("axis2", u.y)],
        Validity::AllEnergies,
        Plane::Target,
        move |s| {
            let pn = s.p.norm();
            if pn == 0.0 {
                return 0.0;
            }
            (s.q - focus).cross(s.p) * u.cross(s.p) / pn
        },
    ))
}

/// Separated energy `w₁²/2 + u₁(z₁)` of the source system paired with a Stark-type field at
/// energy `−f`.
pub fn stark_separated(field: &ForceField, f: f64) -> Result<FirstIntegral, IntegralError> {
    if !matches!(
        field,
        ForceField::Stark { .. } | ForceField::FrozenHill { .. } | ForceField::SeparableStarkCustom { .. }
    ) {
        return Err(IntegralError::UnsupportedField(field.name()));
    }
    let pairing = make_duality(ConformalMap::Power { k: 2 }, field.clone(), -f)
        .map_err(crate::conformal::PairingError::from)?;
    let ForceField::Separable { u1, .. } = &pairing.source_field else {
        return Err(IntegralError::UnsupportedField(field.name()));
    };
    let u1 = u1.clone();
    let mut params = vec![("f", f)];
    match *field {
        ForceField::Stark { mu, g } | ForceField::FrozenHill { mu, g } => {
            params.extend([("mu", mu), ("g", g)]);
        }
        ForceField::SeparableStarkCustom { mu, .. } => params.push(("mu", mu)),
        _ => {}
    }
    Ok(FirstIntegral::new(
        "stark_H1",
        &params,
        Validity::FixedEnergy { field: pairing.source_field.clone(), energy: pairing.source_energy },
        Plane::Source,
        move |s| 0.5 * s.p.x * s.p.x + u1.eval(s.q.x),
    ))
}

/// Radial integral of the two-centre dual system on its zero level:
/// `(z·w)² − (m₁ + m₂)(r² + 1)/r + f(r² + 1)²/(2r²)`.
pub fn two_center_radial(m1: f64, m2: f64, f: f64) -> FirstIntegral {
    FirstIntegral::new(
        "two_center_Ir",
        &[("m1", m1), ("m2", m2), ("f", f)],
        Validity::FixedEnergy { field: ForceField::TwoCenterDual { m1, m2, f }, energy: 0.0 },
        Plane::Source,
        move |s| {
            let r2 = s.q.norm_sq();
            if r2 == 0.0 {
                return f64::NAN;
            }
            let r = r2.sqrt();
            let zw = s.q.dot(s.p);
            zw * zw - (m1 + m2) * (r2 + 1.0) / r + f * (r2 + 1.0).powi(2) / (2.0 * r2)
        },
    )
}

/// Elliptic coordinates `(ξ, η) = ((r₁ + r₂)/2, (r₁ − r₂)/2)` about the centres `(±1, 0)`,
/// with `r₁ = |q − (1,0)|`, `r₂ = |q + (1,0)|`.
pub fn elliptic_coords(q: Vec2) -> (f64, f64) {
    let r1 = q.distance(Vec2::new(1.0, 0.0));
    let r2 = q.distance(Vec2::new(-1.0, 0.0));
    ((r1 + r2) / 2.0, (r1 - r2) / 2.0)
}
