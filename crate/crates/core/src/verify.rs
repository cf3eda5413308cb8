//! Independent re-verification of certificates.
//!
//! The searches prove their certificates with polynomial arithmetic. Here
//! the defining identities are instead evaluated pointwise, in exact
//! rationals, on a product grid with `D + 1` values per coordinate, where
//! `D` bounds the total degree of the identity. A polynomial of degree at
//! most `D` in each variable that vanishes on such a grid is zero, so the
//! check is a proof that shares no code with the searches beyond
//! [`Poly::eval`].

use num_traits::Zero;
use thiserror::Error;

use crate::darboux::{DarbouxCert, DarbouxFunction, ExpFactorCert};
use crate::field::VectorField;
use crate::poly::Poly;
use crate::rational::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("identity for {what} fails at {point}")]
    Identity { what: String, point: String },
    #[error("cofactor balance of {0} is not zero")]
    Balance(String),
    #[error("{0} is over different variables than the field")]
    Variables(String),
}

struct Grid {
    size: usize,
    n: usize,
    next: Option<Vec<usize>>,
}

impl Iterator for Grid {
    type Item = Vec<Rational>;

    fn next(&mut self) -> Option<Vec<Rational>> {
        let cur = self.next.take()?;
        let mut succ = cur.clone();
        let mut i = 0;
        loop {
            if i == self.n {
                break;
            }
            succ[i] += 1;
            if succ[i] < self.size {
                self.next = Some(succ);
                break;
            }
            succ[i] = 0;
            i += 1;
        }
        // Nonzero values keep denominators such as x^s defined.
        Some(cur.iter().map(|&k| int(k as i64 + 1)).collect())
    }
}

fn grid(n: usize, degree: u32) -> Grid {
    Grid {
        size: degree as usize + 1,
        n,
        next: Some(vec![0; n]),
    }
}

/// `X h` at `p`, from component values and partial derivatives.
fn lie_at(field: &VectorField, partials: &[Poly], p: &[Rational]) -> Rational {
    field
        .components()
        .iter()
        .zip(partials)
        .map(|(c, d)| c.eval(p) * d.eval(p))
        .fold(Rational::zero(), |a, b| a + b)
}

fn same_vars(field: &VectorField, p: &Poly) -> Result<(), VerifyError> {
    if p.vars() == field.vars() {
        Ok(())
    } else {
        Err(VerifyError::Variables(p.to_string()))
    }
}

fn show(p: &[Rational]) -> String {
    let parts: Vec<String> = p.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Checks `X f = K f` pointwise.
pub fn recheck_darboux(field: &VectorField, cert: &DarbouxCert) -> Result<(), VerifyError> {
    same_vars(field, &cert.f)?;
    same_vars(field, &cert.cofactor)?;
    let n = field.nvars();
    let partials: Vec<Poly> = (0..n).map(|i| cert.f.partial(i)).collect();
    let d = (cert.f.degree() + field.degree().saturating_sub(1)).max(cert.f.degree() + cert.cofactor.degree());
    for p in grid(n, d) {
        let lhs = lie_at(field, &partials, &p);
        if lhs != cert.cofactor.eval(&p) * cert.f.eval(&p) {
            return Err(VerifyError::Identity {
                what: cert.f.to_string(),
                point: show(&p),
            });
        }
    }
    Ok(())
}

/// Checks `X(g/h) = L` for `h = x^s`, as `h X g − g X h = L h²`.
pub fn recheck_exp_factor(field: &VectorField, cert: &ExpFactorCert) -> Result<(), VerifyError> {
    same_vars(field, &cert.g)?;
    same_vars(field, &cert.cofactor)?;
    let n = field.nvars();
    let h = cert.denominator();
    let dg: Vec<Poly> = (0..n).map(|i| cert.g.partial(i)).collect();
    let dh: Vec<Poly> = (0..n).map(|i| h.partial(i)).collect();
    let spread = field.degree().saturating_sub(1);
    let d = (h.degree() + cert.g.degree() + spread).max(cert.cofactor.degree() + 2 * h.degree());
    for p in grid(n, d) {
        let hv = h.eval(&p);
        let lhs = hv.clone() * lie_at(field, &dg, &p) - cert.g.eval(&p) * lie_at(field, &dh, &p);
        if lhs != cert.cofactor.eval(&p) * hv.clone() * hv {
            return Err(VerifyError::Identity {
                what: format!("exp({})", cert.exponent_text()),
                point: show(&p),
            });
        }
    }
    Ok(())
}

/// Re-verifies every factor of `h` and its cofactor balance.
pub fn recheck_function(field: &VectorField, h: &DarbouxFunction) -> Result<(), VerifyError> {
    for (c, _) in &h.darboux_terms {
        recheck_darboux(field, c)?;
    }
    for (e, _) in &h.exp_terms {
        recheck_exp_factor(field, e)?;
    }
    // The balance is a polynomial of degree < deg X; check it on a grid too.
    for p in grid(field.nvars(), field.degree().saturating_sub(1)) {
        let mut sum = Rational::zero();
        for (c, l) in &h.darboux_terms {
            sum += c.cofactor.eval(&p) * l;
        }
        for (e, m) in &h.exp_terms {
            sum += e.cofactor.eval(&p) * m;
        }
        if !sum.is_zero() {
            return Err(VerifyError::Balance(h.to_string()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::darboux::{verify_darboux, verify_exp_factor};
    use crate::field::{lotka_volterra_3, parse_field};
    use crate::rational::rat;

    #[test]
    fn accepts_true_certificates() {
        let x = lotka_volterra_3(rat(29851, 10000), int(3), int(2));
        let p = |s: &str| Poly::parse(s, x.vars()).unwrap();
        for f in ["x", "y", "z", "x^2*y*z^3"] {
            recheck_darboux(&x, &verify_darboux(&x, &p(f)).unwrap()).unwrap();
        }
        recheck_exp_factor(&x, &verify_exp_factor(&x, &p("x + z"), &[0, 0, 0]).unwrap()).unwrap();
    }

    #[test]
    fn rejects_forged_certificates() {
        let x = lotka_volterra_3(int(3), int(3), int(2));
        let p = |s: &str| Poly::parse(s, x.vars()).unwrap();
        let forged = DarbouxCert {
            f: p("x"),
            cofactor: p("1 - y + 2*x - 3*x*z + z^2"),
        };
        assert!(recheck_darboux(&x, &forged).is_err());
        let mut e = verify_exp_factor(&x, &p("y"), &[0, 0, 0]).unwrap();
        e.cofactor = &e.cofactor + &p("1");
        assert!(recheck_exp_factor(&x, &e).is_err());
    }

    #[test]
    fn rational_exponential_factor() {
        let x = parse_field("vars: x y\ndx/dt = x\ndy/dt = x + y\n").unwrap();
        let p = |s: &str| Poly::parse(s, x.vars()).unwrap();
        let e = verify_exp_factor(&x, &p("y"), &[1, 0]).unwrap();
        assert_eq!(e.cofactor.to_string(), "1");
        recheck_exp_factor(&x, &e).unwrap();
        let h = DarbouxFunction {
            darboux_terms: vec![(verify_darboux(&x, &p("x")).unwrap(), int(-1))],
            exp_terms: vec![(e, int(1))],
        };
        recheck_function(&x, &h).unwrap();
    }
}
