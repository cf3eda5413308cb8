use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::linalg::{span_basis, RatMatrix};
use crate::poly::{Monomial, MonomialBasis, Poly};
use crate::rational::{primitive_integer_vector, Rational};

use super::{DarbouxCert, ExpFactorCert};

/// `Π f_i^{λ_i} · Π E_j^{μ_j}` over certificates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DarbouxFunction {
    pub darboux_terms: Vec<(DarbouxCert, Rational)>,
    pub exp_terms: Vec<(ExpFactorCert, Rational)>,
}

impl DarbouxFunction {
    /// `Σ λ_i K_i + Σ μ_j L_j`; zero exactly when the function is a first
    /// integral.
    pub fn cofactor_balance(&self) -> Option<Poly> {
        let vars = self
            .darboux_terms
            .first()
            .map(|(c, _)| c.f.vars().clone())
            .or_else(|| self.exp_terms.first().map(|(e, _)| e.g.vars().clone()))?;
        let mut acc = Poly::zero(&vars);
        for (c, l) in &self.darboux_terms {
            acc = &acc + &c.cofactor.scale(l);
        }
        for (e, m) in &self.exp_terms {
            acc = &acc + &e.cofactor.scale(m);
        }
        Some(acc)
    }
}

fn power(base: String, e: &Rational) -> String {
    if e.is_one() {
        base
    } else if e.is_integer() && e.is_positive() {
        format!("{base}^{e}")
    } else {
        format!("{base}^({e})")
    }
}

fn wrap(p: &Poly) -> String {
    let text = p.to_string();
    let single_factor = p.num_terms() == 1 && p.terms().all(|(m, c)| c.is_one() && m.degree() == 1);
    if single_factor {
        text
    } else {
        format!("({text})")
    }
}

impl fmt::Display for DarbouxFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for (c, l) in &self.darboux_terms {
            parts.push(power(wrap(&c.f), l));
        }
        for (e, m) in &self.exp_terms {
            let arg = e.exponent_text();
            let arg_wrapped = if e.s.iter().all(|&s| s == 0) && e.g.num_terms() > 1 {
                format!("({arg})")
            } else {
                arg.clone()
            };
            let text = if m.is_one() {
                arg
            } else if *m == -Rational::one() {
                format!("-{arg_wrapped}")
            } else {
                format!("{m}*{arg_wrapped}")
            };
            parts.push(format!("exp({text})"));
        }
        if parts.is_empty() {
            return f.write_str("1");
        }
        f.write_str(&parts.join("*"))
    }
}

/// Darboux first integrals from the kernel of the cofactor-balance matrix.
///
/// Columns are the cofactors of `certs` followed by those of `efacts`. Each
/// kernel basis vector (reduced echelon form, scaled to a primitive integer
/// vector with positive first entry) gives one function.
pub fn assemble_darboux_integrals(certs: &[DarbouxCert], efacts: &[ExpFactorCert]) -> Vec<DarbouxFunction> {
    let cofactors: Vec<&Poly> = certs
        .iter()
        .map(|c| &c.cofactor)
        .chain(efacts.iter().map(|e| &e.cofactor))
        .collect();
    if cofactors.is_empty() {
        return Vec::new();
    }
    let monos: BTreeSet<Monomial> = cofactors
        .iter()
        .flat_map(|p| p.terms().map(|(m, _)| m.clone()))
        .collect();
    let rows = MonomialBasis::new(monos.into_iter().rev().collect());
    let columns: Vec<Vec<Rational>> = cofactors
        .iter()
        .map(|p| rows.coords(p).expect("rows cover cofactors"))
        .collect();
    let m = RatMatrix::from_columns(rows.len(), &columns);
    let kernel = span_basis(&m.nullspace(), cofactors.len());
    kernel
        .iter()
        .map(|v| {
            let v = primitive_integer_vector(v);
            let (dv, ev) = v.split_at(certs.len());
            DarbouxFunction {
                darboux_terms: certs
                    .iter()
                    .zip(dv)
                    .filter(|(_, l)| !l.is_zero())
                    .map(|(c, l)| (c.clone(), l.clone()))
                    .collect(),
                exp_terms: efacts
                    .iter()
                    .zip(ev)
                    .filter(|(_, l)| !l.is_zero())
                    .map(|(e, l)| (e.clone(), l.clone()))
                    .collect(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::darboux::{verify_darboux, verify_exp_factor};
    use crate::field::lotka_volterra_3;
    use crate::rational::int;

    #[test]
    fn integrable_case() {
        let x = lotka_volterra_3(int(0), int(0), int(0));
        let p = |s: &str| Poly::parse(s, x.vars()).unwrap();
        let certs: Vec<DarbouxCert> = ["x", "y", "z"]
            .iter()
            .map(|s| verify_darboux(&x, &p(s)).unwrap())
            .collect();
        let e = verify_exp_factor(&x, &p("x + y"), &[0, 0, 0]).unwrap();
        let h = assemble_darboux_integrals(&certs, &[e]);
        let shown: Vec<String> = h.iter().map(|f| f.to_string()).collect();
        assert_eq!(shown, vec!["x*y*exp(-(x + y))", "z"]);
        for f in &h {
            assert!(f.cofactor_balance().unwrap().is_zero());
        }
    }

    #[test]
    fn restricted_rational_integral() {
        let x = lotka_volterra_3(int(0), int(3), int(2)).restrict_to_plane("y").unwrap();
        let p = |s: &str| Poly::parse(s, x.vars()).unwrap();
        let certs: Vec<DarbouxCert> = ["x", "z", "1 + 2*x"]
            .iter()
            .map(|s| verify_darboux(&x, &p(s)).unwrap())
            .collect();
        let h = assemble_darboux_integrals(&certs, &[]);
        assert_eq!(h.len(), 1);
        let l: Vec<Rational> = h[0].darboux_terms.iter().map(|(_, l)| l.clone()).collect();
        assert_eq!(l, vec![int(3), int(1), int(-3)]);
        assert_eq!(h[0].to_string(), "x^3*z*(2*x + 1)^(-3)");
    }

    #[test]
    fn chaotic_parameters_have_no_balance() {
        let x = lotka_volterra_3(int(3), int(3), int(2));
        let p = |s: &str| Poly::parse(s, x.vars()).unwrap();
        let certs: Vec<DarbouxCert> = ["x", "y", "z"]
            .iter()
            .map(|s| verify_darboux(&x, &p(s)).unwrap())
            .collect();
        let efacts = vec![
            verify_exp_factor(&x, &p("x + z"), &[0, 0, 0]).unwrap(),
            verify_exp_factor(&x, &p("y"), &[0, 0, 0]).unwrap(),
        ];
        assert!(assemble_darboux_integrals(&certs, &efacts).is_empty());
    }
}
