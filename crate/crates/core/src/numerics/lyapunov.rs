use crate::field::VectorField;

use super::eval::CompiledField;
use super::integrate::{check_start, Integrator, Method, StepStats};
use super::NumericsError;

#[derive(Clone, Debug, PartialEq)]
pub struct LyapunovEstimate {
    /// Average logarithmic stretching rate.
    pub value: f64,
    pub t_end: f64,
    pub renorm_dt: f64,
    pub renormalizations: u64,
    pub stats: StepStats,
}

/// Largest Lyapunov exponent with the default adaptive integrator.
pub fn lyapunov_max(
    field: &VectorField,
    x0: &[f64],
    t_end: f64,
    renorm_dt: f64,
) -> Result<LyapunovEstimate, NumericsError> {
    lyapunov_with(field, x0, t_end, renorm_dt, Method::adaptive())
}

/// Benettin estimate: the state and one tangent vector `v' = J(x) v` are
/// integrated together; `v` is rescaled to unit length every `renorm_dt`
/// and the logarithms of the stretch factors are averaged over `t_end`.
pub fn lyapunov_with(
    field: &VectorField,
    x0: &[f64],
    t_end: f64,
    renorm_dt: f64,
    method: Method,
) -> Result<LyapunovEstimate, NumericsError> {
    let n = field.nvars();
    check_start(x0, n, t_end)?;
    if !(renorm_dt.is_finite() && renorm_dt > 0.0 && renorm_dt <= t_end) {
        return Err(NumericsError::InvalidInput(format!(
            "renorm_dt must lie in (0, t_end], got {renorm_dt}"
        )));
    }
    let c = CompiledField::new(field);
    let mut jac = vec![0.0; n * n];
    let mut rhs = |y: &[f64], out: &mut [f64]| {
        let (x, v) = y.split_at(n);
        let (dx, dv) = out.split_at_mut(n);
        c.rhs(x, dx);
        c.jacobian(x, &mut jac);
        for i in 0..n {
            dv[i] = (0..n).map(|j| jac[i * n + j] * v[j]).sum();
        }
    };
    let mut y = x0.to_vec();
    y.extend(std::iter::repeat_n(1.0 / (n as f64).sqrt(), n));
    let mut integ = Integrator::new(method, 2 * n)?;
    let intervals = (t_end / renorm_dt - 1e-9).ceil().max(1.0) as u64;
    let mut sum = 0.0;
    let mut t = 0.0;
    for k in 1..=intervals {
        let t_next = if k == intervals { t_end } else { k as f64 * renorm_dt };
        integ.advance(&mut rhs, t, t_next, &mut y, |_, _| {})?;
        let norm = y[n..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(NumericsError::NonFinite { t: t_next });
        }
        sum += norm.ln();
        for v in &mut y[n..] {
            *v /= norm;
        }
        t = t_next;
    }
    Ok(LyapunovEstimate {
        value: sum / t_end,
        t_end,
        renorm_dt,
        renormalizations: intervals,
        stats: integ.stats,
    })
}
