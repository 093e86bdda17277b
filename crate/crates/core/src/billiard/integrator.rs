//! Dormand–Prince 5(4) with PI step-size control and 4th-order dense output.

pub const MIN_STEP: f64 = 1e-15;
pub const MIN_TOL: f64 = 1e-14;
pub const MAX_TOL: f64 = 1e-4;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Relative floor of the error scale, well above unit roundoff.
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;
const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Autonomous ODE `y' = f(y)`.
pub trait System<const N: usize> {
    fn rhs(&self, y: &[f64; N]) -> [f64; N];
}

impl<const N: usize, F: Fn(&[f64; N]) -> [f64; N]> System<N> for F {
    fn rhs(&self, y: &[f64; N]) -> [f64; N] {
        self(y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum IntegratorError {
    #[error("step size fell below {MIN_STEP:e} at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("tolerance {0:e} outside [{MIN_TOL:e}, {MAX_TOL:e}]")]
    InvalidTolerance(f64),
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
}

/// One accepted step with its continuous extension.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    /// Interpolated state at `t` in `[t0, t0 + h]`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let s = (t - self.t0) / self.h;
        let s1 = 1.0 - s;
        let r = &self.rcont;
        std::array::from_fn(|i| {
            r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])))
        })
    }
}

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

/// Adaptive integrator state. Keeps the first-same-as-last stage and the controller memory
/// between steps.
#[derive(Debug, Clone)]
pub struct Dopri5<const N: usize> {
    pub tol: f64,
    pub h: f64,
    err_old: f64,
    /// Last stage of the previous step together with the state it was evaluated at.
    fsal: Option<([f64; N], [f64; N])>,
    pub n_rhs: usize,
    pub n_rejected: usize,
}

struct Trial<const N: usize> {
    y1: [f64; N],
    k: [[f64; N]; 7],
    err: f64,
}

impl<const N: usize> Dopri5<N> {
    pub fn new(tol: f64) -> Result<Self, IntegratorError> {
        if !(MIN_TOL..=MAX_TOL).contains(&tol) {
            return Err(IntegratorError::InvalidTolerance(tol));
        }
        Ok(Self { tol, h: 0.0, err_old: 1e-4, fsal: None, n_rhs: 0, n_rejected: 0 })
    }

    /// Forget the step-size history.
    pub fn reset(&mut self) {
        self.fsal = None;
        self.err_old = 1e-4;
    }

    fn scale(&self, a: f64, b: f64) -> f64 {
        self.tol + ROUNDOFF * a.abs().max(b.abs())
    }

    fn initial_step(&mut self, sys: &impl System<N>, y: &[f64; N], k1: &[f64; N]) -> f64 {
        let sk: [f64; N] = std::array::from_fn(|i| self.scale(y[i], y[i]));
        let rms = |v: &[f64; N]| {
            (v.iter().zip(&sk).map(|(x, s)| (x / s).powi(2)).sum::<f64>() / N as f64).sqrt()
        };
        let d0 = rms(y);
        let d1 = rms(k1);
        let h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1 = axpy(y, h0, &[(1.0, k1)]);
        let k2 = sys.rhs(&y1);
        self.n_rhs += 1;
        let diff: [f64; N] = std::array::from_fn(|i| k2[i] - k1[i]);
        let d2 = rms(&diff) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1)
    }

    fn trial(&mut self, sys: &impl System<N>, y: &[f64; N], k1: &[f64; N], h: f64) -> Trial<N> {
        let k2 = sys.rhs(&axpy(y, h, &[(A21, k1)]));
        let k3 = sys.rhs(&axpy(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = sys.rhs(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = sys.rhs(&axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = sys.rhs(&axpy(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ));
        let y1 = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = sys.rhs(&y1);
        self.n_rhs += 6;
        let mut acc = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sk = self.scale(y[i], y1[i]);
            acc += (e / sk).powi(2);
        }
        let err = (acc / N as f64).sqrt();
        Trial { y1, k: [*k1, k2, k3, k4, k5, k6, k7], err }
    }

    /// Single fixed step of size `h` without error control.
    pub fn fixed_step(&mut self, sys: &impl System<N>, y: &[f64; N], h: f64) -> [f64; N] {
        let k1 = sys.rhs(y);
        self.n_rhs += 1;
        self.trial(sys, y, &k1, h).y1
    }

    /// Take one accepted step from `(t, y)`, never beyond `t + h_max`.
    pub fn step(
        &mut self,
        sys: &impl System<N>,
        t: f64,
        y: &[f64; N],
        h_max: f64,
    ) -> Result<DenseStep<N>, IntegratorError> {
        let k1 = match self.fsal {
            Some((ref y_prev, k)) if y_prev == y => k,
            _ => {
                self.n_rhs += 1;
                sys.rhs(y)
            }
        };
        if self.h <= 0.0 {
            self.h = self.initial_step(sys, y, &k1);
        }
        let capped = h_max < self.h;
        let mut h = self.h.min(h_max);
        loop {
            if h < MIN_STEP {
                return Err(IntegratorError::StepUnderflow { t });
            }
            let trial = self.trial(sys, y, &k1, h);
            let err = trial.err;
            if !err.is_finite() {
                self.n_rejected += 1;
                h *= FAC_MIN;
                continue;
            }
            let expo = 0.2 - 0.75 * BETA;
            let fac11 = err.powf(expo);
            if err <= 1.0 {
                let fac = (fac11 / self.err_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                self.err_old = err.max(1e-4);
                let h_new = h / fac;
                self.h = if capped && h == h_max { self.h.max(h_new) } else { h_new };
                let Trial { y1, k, .. } = trial;
                if y1.iter().any(|v| !v.is_finite()) {
                    return Err(IntegratorError::NonFinite { t: t + h });
                }
                self.fsal = Some((y1, k[6]));
                let rcont = [
                    *y,
                    std::array::from_fn(|i| y1[i] - y[i]),
                    std::array::from_fn(|i| h * k[0][i] - (y1[i] - y[i])),
                    std::array::from_fn(|i| {
                        (y1[i] - y[i]) - h * k[6][i] - (h * k[0][i] - (y1[i] - y[i]))
                    }),
                    std::array::from_fn(|i| {
                        h * (D1 * k[0][i]
                            + D3 * k[2][i]
                            + D4 * k[3][i]
                            + D5 * k[4][i]
                            + D6 * k[5][i]
                            + D7 * k[6][i])
                    }),
                ];
                return Ok(DenseStep { t0: t, h, y0: *y, y1, rcont });
            }
            self.n_rejected += 1;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let sys = |y: &[f64; 2]| [y[1], -y[0]];
        let mut integ = Dopri5::<2>::new(1e-11).unwrap();
        let mut t = 0.0;
        let mut y = [1.0, 0.0];
        let end = std::f64::consts::TAU;
        while t < end {
            let s = integ.step(&sys, t, &y, end - t).unwrap();
            t = s.t1();
            y = s.y1;
        }
        assert!((y[0] - 1.0).abs() < 1e-9 && y[1].abs() < 1e-9);
    }

    #[test]
    fn dense_output_matches_exact_solution() {
        let sys = |y: &[f64; 2]| [y[1], -y[0]];
        let mut integ = Dopri5::<2>::new(1e-10).unwrap();
        let s = integ.step(&sys, 0.0, &[1.0, 0.0], 1.0).unwrap();
        assert_eq!(s.eval(s.t0), [1.0, 0.0]);
        assert_eq!(s.eval(s.t1()), s.y1);
        for i in 1..10 {
            let t = s.h * i as f64 / 10.0;
            let y = s.eval(t);
            assert!((y[0] - t.cos()).abs() < 1e-9, "{t}");
        }
    }

    #[test]
    fn tolerance_range_is_enforced() {
        assert!(Dopri5::<2>::new(1e-16).is_err());
        assert!(Dopri5::<2>::new(1e-3).is_err());
    }
}
