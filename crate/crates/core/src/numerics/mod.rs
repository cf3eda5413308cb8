//! Floating-point validation: trajectories, conservation drift and the
//! largest Lyapunov exponent.

mod drift;
mod eval;
mod integrate;
mod lyapunov;

use std::io::{self, Write};

use thiserror::Error;

use crate::darboux::DarbouxFunction;
use crate::field::VectorField;

pub use drift::{conservation_drift, CompiledFunction, DriftReport};
pub use eval::{CompiledField, CompiledPoly};
pub use integrate::{Method, StepStats, Trajectory, INITIAL_DT};
pub use lyapunov::{lyapunov_max, lyapunov_with, LyapunovEstimate};

use integrate::{check_start, Integrator};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("factor {factor} leaves the domain at t = {t}")]
    EvalDomain { t: f64, factor: String },
    #[error("{0}")]
    InvalidInput(String),
}

/// Integrates `field` from `x0` over `[0, t_end]`, recording every
/// accepted step.
pub fn simulate(field: &VectorField, x0: &[f64], t_end: f64, method: Method) -> Result<Trajectory, NumericsError> {
    let n = field.nvars();
    check_start(x0, n, t_end)?;
    let c = CompiledField::new(field);
    let mut integ = Integrator::new(method, n)?;
    let mut times = vec![0.0];
    let mut states = vec![x0.to_vec()];
    let mut y = x0.to_vec();
    integ.advance(
        &mut |x: &[f64], out: &mut [f64]| c.rhs(x, out),
        0.0,
        t_end,
        &mut y,
        |t, x| {
            times.push(t);
            states.push(x.to_vec());
        },
    )?;
    Ok(Trajectory {
        vars: field.vars().iter().cloned().collect(),
        times,
        states,
        method,
        stats: integ.stats,
    })
}

fn number(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV with header `t,<vars>[,H1,...]`, one row per recorded state.
pub fn write_csv<W: Write>(out: &mut W, traj: &Trajectory, integrals: &[DarbouxFunction]) -> io::Result<()> {
    let compiled: Vec<CompiledFunction> = integrals.iter().map(CompiledFunction::new).collect();
    let mut header = vec!["t".to_string()];
    header.extend(traj.vars.iter().cloned());
    header.extend((1..=integrals.len()).map(|i| format!("H{i}")));
    out.write_all(header.join(",").as_bytes())?;
    out.write_all(b"\n")?;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let mut row = vec![number(*t)];
        row.extend(x.iter().map(|v| number(*v)));
        row.extend(
            compiled
                .iter()
                .map(|h| h.eval(x).map(number).unwrap_or_else(|_| "nan".into())),
        );
        out.write_all(row.join(",").as_bytes())?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
