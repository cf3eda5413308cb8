use std::fmt;

use super::NumericsError;

/// Integration scheme.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Method {
    /// Classical fixed-step fourth-order Runge-Kutta.
    Rk4 { dt: f64 },
    /// Dormand-Prince 5(4) with a PI step-size controller.
    Dopri5 { rtol: f64, atol: f64 },
}

impl Method {
    pub fn adaptive() -> Self {
        Method::Dopri5 {
            rtol: 1e-10,
            atol: 1e-10,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::Rk4 { .. } => "rk4",
            Method::Dopri5 { .. } => "dopri5",
        }
    }

    fn validate(&self) -> Result<(), NumericsError> {
        let ok = match *self {
            Method::Rk4 { dt } => dt.is_finite() && dt > 0.0,
            Method::Dopri5 { rtol, atol } => rtol.is_finite() && atol.is_finite() && rtol > 0.0 && atol > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(NumericsError::InvalidInput(format!("bad integrator settings: {self}")))
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Rk4 { dt } => write!(f, "rk4(dt={dt:e})"),
            Method::Dopri5 { rtol, atol } => write!(f, "dopri5(rtol={rtol:e}, atol={atol:e})"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

/// Initial step of the adaptive scheme.
pub const INITIAL_DT: f64 = 1e-3;

// PI controller constants.
const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Stepper for an autonomous system `y' = f(y)`. Keeps the step size and
/// controller memory between calls to [`Integrator::advance`].
pub(crate) struct Integrator {
    method: Method,
    h: f64,
    err_old: f64,
    pub stats: StepStats,
    k: Vec<Vec<f64>>,
    tmp: Vec<f64>,
}

impl Integrator {
    pub fn new(method: Method, dim: usize) -> Result<Self, NumericsError> {
        method.validate()?;
        let h = match method {
            Method::Rk4 { dt } => dt,
            Method::Dopri5 { .. } => INITIAL_DT,
        };
        Ok(Integrator {
            method,
            h,
            err_old: 1e-4,
            stats: StepStats::default(),
            k: vec![vec![0.0; dim]; 7],
            tmp: vec![0.0; dim],
        })
    }

    /// Advances `y` from `t0` to `t1`, calling `on_step` after each
    /// accepted step.
    pub fn advance<F, O>(
        &mut self,
        f: &mut F,
        t0: f64,
        t1: f64,
        y: &mut [f64],
        mut on_step: O,
    ) -> Result<(), NumericsError>
    where
        F: FnMut(&[f64], &mut [f64]),
        O: FnMut(f64, &[f64]),
    {
        match self.method {
            Method::Rk4 { dt } => self.rk4(f, dt, t0, t1, y, &mut on_step),
            Method::Dopri5 { rtol, atol } => self.dopri5(f, rtol, atol, t0, t1, y, &mut on_step),
        }
    }

    fn rk4<F, O>(
        &mut self,
        f: &mut F,
        dt: f64,
        t0: f64,
        t1: f64,
        y: &mut [f64],
        on_step: &mut O,
    ) -> Result<(), NumericsError>
    where
        F: FnMut(&[f64], &mut [f64]),
        O: FnMut(f64, &[f64]),
    {
        let n = y.len();
        let steps = ((t1 - t0) / dt - 1e-9).ceil().max(1.0) as u64;
        let mut t = t0;
        for s in 1..=steps {
            let t_next = if s == steps { t1 } else { t0 + s as f64 * dt };
            let h = t_next - t;
            let [k1, k2, k3, k4, ..] = &mut self.k[..] else {
                unreachable!()
            };
            f(y, k1);
            for i in 0..n {
                self.tmp[i] = y[i] + 0.5 * h * k1[i];
            }
            f(&self.tmp, k2);
            for i in 0..n {
                self.tmp[i] = y[i] + 0.5 * h * k2[i];
            }
            f(&self.tmp, k3);
            for i in 0..n {
                self.tmp[i] = y[i] + h * k3[i];
            }
            f(&self.tmp, k4);
            for i in 0..n {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            self.stats.evaluations += 4;
            self.stats.accepted += 1;
            t = t_next;
            if y.iter().any(|v| !v.is_finite()) {
                return Err(NumericsError::NonFinite { t });
            }
            on_step(t, y);
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn dopri5<F, O>(
        &mut self,
        f: &mut F,
        rtol: f64,
        atol: f64,
        t0: f64,
        t1: f64,
        y: &mut [f64],
        on_step: &mut O,
    ) -> Result<(), NumericsError>
    where
        F: FnMut(&[f64], &mut [f64]),
        O: FnMut(f64, &[f64]),
    {
        let n = y.len();
        let mut y_new = vec![0.0; n];
        let mut t = t0;
        let mut last_rejected = false;
        // The caller may have changed `y` since the last call.
        f(y, &mut self.k[0]);
        self.stats.evaluations += 1;
        while t < t1 {
            let natural = self.h;
            let clamped = t + natural >= t1;
            let h = if clamped { t1 - t } else { natural };
            if h <= f64::EPSILON * t.abs().max(1.0) {
                if clamped {
                    break;
                }
                return Err(NumericsError::StepUnderflow { t });
            }
            for s in 1..7 {
                let (prev, rest) = self.k.split_at_mut(s);
                for i in 0..n {
                    let acc: f64 = A[s][..s].iter().zip(prev.iter()).map(|(a, k)| a * k[i]).sum();
                    self.tmp[i] = y[i] + h * acc;
                }
                f(&self.tmp, &mut rest[0]);
            }
            self.stats.evaluations += 6;
            // The seventh stage point is the new solution.
            y_new.copy_from_slice(&self.tmp);
            let mut sum = 0.0;
            for i in 0..n {
                let mut e = 0.0;
                for (j, c) in E.iter().enumerate() {
                    e += c * self.k[j][i];
                }
                let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
                sum += (h * e / sc).powi(2);
            }
            let err = (sum / n as f64).sqrt();
            if !err.is_finite() {
                self.stats.rejected += 1;
                self.h = h * FAC_MIN;
                last_rejected = true;
                if self.h <= f64::EPSILON * t.abs().max(1.0) {
                    return Err(NumericsError::NonFinite { t });
                }
                continue;
            }
            let fac11 = err.powf(ALPHA);
            if err <= 1.0 {
                let fac = (fac11 / self.err_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_next = h / fac;
                if last_rejected {
                    h_next = h_next.min(h);
                }
                if clamped {
                    h_next = h_next.max(natural);
                }
                self.err_old = err.max(1e-4);
                self.stats.accepted += 1;
                last_rejected = false;
                t = if clamped { t1 } else { t + h };
                y.copy_from_slice(&y_new);
                self.k.swap(0, 6);
                if y.iter().any(|v| !v.is_finite()) {
                    return Err(NumericsError::NonFinite { t });
                }
                on_step(t, y);
                self.h = h_next;
            } else {
                self.stats.rejected += 1;
                last_rejected = true;
                self.h = h / (fac11 / SAFETY).min(1.0 / FAC_MIN);
            }
        }
        Ok(())
    }
}

/// States at every accepted step, including the initial one.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub vars: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub method: Method,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &[f64])> {
        Some((*self.times.last()?, self.states.last()?.as_slice()))
    }
}

pub(crate) fn check_start(x0: &[f64], dim: usize, t_end: f64) -> Result<(), NumericsError> {
    if x0.len() != dim {
        return Err(NumericsError::InvalidInput(format!(
            "initial state has {} entries, field has {dim} variables",
            x0.len()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::InvalidInput("initial state is not finite".into()));
    }
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(NumericsError::InvalidInput(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    Ok(())
}
