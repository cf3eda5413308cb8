use num_traits::Signed;

use crate::darboux::DarbouxFunction;
use crate::rational::to_f64;

use super::eval::CompiledPoly;
use super::{NumericsError, Trajectory};

enum Power {
    Int(i32),
    Real(f64),
}

/// A [`DarbouxFunction`] compiled for `f64` evaluation.
pub struct CompiledFunction {
    text: String,
    factors: Vec<(CompiledPoly, Power, String)>,
    exps: Vec<(CompiledPoly, Vec<u32>, f64, String)>,
}

impl CompiledFunction {
    pub fn new(h: &DarbouxFunction) -> Self {
        let factors = h
            .darboux_terms
            .iter()
            .map(|(c, l)| {
                let p = if l.is_integer() && l.abs() < crate::rational::int(1_000_000) {
                    Power::Int(to_f64(l) as i32)
                } else {
                    Power::Real(to_f64(l))
                };
                (CompiledPoly::new(&c.f), p, c.f.to_string())
            })
            .collect();
        let exps = h
            .exp_terms
            .iter()
            .map(|(e, m)| (CompiledPoly::new(&e.g), e.s.clone(), to_f64(m), e.exponent_text()))
            .collect();
        CompiledFunction {
            text: h.to_string(),
            factors,
            exps,
        }
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// Value at `x`, or the text of the factor that leaves the domain.
    pub fn eval(&self, x: &[f64]) -> Result<f64, String> {
        let mut v = 1.0;
        for (p, pow, name) in &self.factors {
            let f = p.eval(x);
            v *= match *pow {
                Power::Int(e) if e >= 0 || f != 0.0 => f.powi(e),
                Power::Real(e) if f > 0.0 => f.powf(e),
                _ => return Err(name.clone()),
            };
        }
        for (g, s, mu, name) in &self.exps {
            let den: f64 = s.iter().zip(x).map(|(&e, xi)| xi.powi(e as i32)).product();
            if den == 0.0 {
                return Err(name.clone());
            }
            v *= (mu * g.eval(x) / den).exp();
        }
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.text.clone())
        }
    }
}

/// Conservation statistics of one function along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct DriftReport {
    pub integral: String,
    pub initial: f64,
    /// `max_t |H(x(t)) − H(x(0))|`.
    pub max_abs_drift: f64,
    /// `max_abs_drift / |H(x(0))|`, or the absolute drift when `H(x(0)) = 0`.
    pub relative_drift: f64,
}

pub fn conservation_drift(traj: &Trajectory, h: &DarbouxFunction) -> Result<DriftReport, NumericsError> {
    let c = CompiledFunction::new(h);
    let mut values = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&t, x)| c.eval(x).map_err(|factor| NumericsError::EvalDomain { t, factor }));
    let initial = match values.next() {
        Some(v) => v?,
        None => return Err(NumericsError::InvalidInput("empty trajectory".into())),
    };
    let mut max_abs_drift: f64 = 0.0;
    for v in values {
        max_abs_drift = max_abs_drift.max((v? - initial).abs());
    }
    let relative_drift = if initial == 0.0 {
        max_abs_drift
    } else {
        max_abs_drift / initial.abs()
    };
    Ok(DriftReport {
        integral: c.text.clone(),
        initial,
        max_abs_drift,
        relative_drift,
    })
}
