//! Darboux polynomials, exponential factors and Darboux first integrals.
//!
//! A Darboux polynomial of `X` is a polynomial `f` with `X f = K f` for a
//! polynomial cofactor `K` of degree at most `deg X - 1`. Fixing `K` makes
//! the condition linear in the coefficients of `f`; the searches here
//! enumerate `K` over a finite [`CofactorLattice`] and solve the linear
//! problem exactly, so every "none found" is relative to that lattice.

mod expfactor;
mod integrals;
mod lattice;
mod search;

use std::fmt;

use crate::field::VectorField;
use crate::linalg::{span_basis, RatMatrix};
use crate::poly::{MonomialBasis, Poly, PolyError};

pub use expfactor::{search_exp_factors, verify_exp_factor, ExpFactorCert, ExpFactorError};
pub use integrals::{assemble_darboux_integrals, DarbouxFunction};
pub use lattice::{enumerate_cofactors, CofactorLattice};
pub use search::{
    canonical_order, independent_certificates, rational_obstruction, search_darboux, solve_lattice, CofactorSpace,
    ObstructionReport, SearchStats,
};

/// A polynomial `f` together with its cofactor `K`: `X f = K f`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DarbouxCert {
    pub f: Poly,
    pub cofactor: Poly,
}

impl fmt::Display for DarbouxCert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (cofactor {})", self.f, self.cofactor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DarbouxError {
    #[error("not a Darboux polynomial: X f leaves remainder {remainder} on division by f")]
    NotDarboux { remainder: Poly },
    #[error("constant polynomials are not Darboux candidates")]
    Constant,
    #[error("{0}")]
    Poly(#[from] PolyError),
}

/// Computes `X f` and divides it exactly by `f`.
pub fn verify_darboux(field: &VectorField, f: &Poly) -> Result<DarbouxCert, DarbouxError> {
    if f.is_constant() {
        return Err(DarbouxError::Constant);
    }
    let xf = field.lie_derivative(f)?;
    match xf.divide_exact(f)? {
        crate::poly::ExactDivision::Quotient(k) => Ok(DarbouxCert {
            f: f.clone(),
            cofactor: k,
        }),
        crate::poly::ExactDivision::Remainder(r) => Err(DarbouxError::NotDarboux { remainder: r }),
    }
}

/// Checks `X f - K f = 0` by expanding both sides.
pub fn check_cert(field: &VectorField, cert: &DarbouxCert) -> bool {
    match field.lie_derivative(&cert.f) {
        Ok(xf) => cert.cofactor.checked_mul(&cert.f).map(|kf| kf == xf).unwrap_or(false),
        Err(_) => false,
    }
}

/// Matrix of `f ↦ X f - K f` from `cols` to `rows`.
pub(crate) fn cofactor_map(field: &VectorField, k: &Poly, cols: &MonomialBasis, rows: &MonomialBasis) -> RatMatrix {
    let vars = field.vars();
    let mut m = RatMatrix::zeros(rows.len(), cols.len());
    for (j, mono) in cols.monomials().iter().enumerate() {
        let basis = Poly::monomial(vars, mono.clone(), num_traits::One::one());
        let image = &field.lie_derivative(&basis).expect("same variables") - &(k * &basis);
        for (t, c) in image.terms() {
            let i = rows.position(t).expect("row basis covers image");
            m[(i, j)] = c.clone();
        }
    }
    m
}

/// Exact basis of `{ f : deg f <= d, X f = K f }`.
///
/// The basis is in reduced echelon form with respect to descending
/// graded-lex order, so each element is monic with a distinct leading
/// monomial. For `K = 0` the constants are included.
pub fn search_darboux_fixed_cofactor(field: &VectorField, k: &Poly, d: u32) -> Vec<Poly> {
    let n = field.nvars();
    let cols = MonomialBasis::degrees(n, 0, d);
    let top = d + field.degree().max(k.degree() + 1).saturating_sub(1);
    let rows = MonomialBasis::degrees(n, 0, top);
    let m = cofactor_map(field, k, &cols, &rows);
    let kernel = m.nullspace();
    span_basis(&kernel, cols.len())
        .iter()
        .map(|v| cols.poly(field.vars(), v))
        .collect()
}

/// Maximum cofactor degree for a field of degree `deg`.
pub(crate) fn cofactor_degree(field: &VectorField) -> u32 {
    field.degree().saturating_sub(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::lotka_volterra_3;
    use crate::rational::{int, rat};

    fn p(field: &VectorField, s: &str) -> Poly {
        Poly::parse(s, field.vars()).unwrap()
    }

    #[test]
    fn coordinate_cofactors() {
        let x = lotka_volterra_3(rat(29851, 10000), int(3), int(2));
        let z = verify_darboux(&x, &p(&x, "z")).unwrap();
        assert_eq!(z.cofactor, p(&x, "-3 + 29851/10000*x^2"));
        let c = verify_darboux(&x, &p(&x, "x^2*y")).unwrap();
        assert_eq!(c.cofactor, p(&x, "2*(1 - y + 2*x - 29851/10000*x*z) + (-1 + x)"));
        assert!(check_cert(&x, &c));
    }

    #[test]
    fn non_darboux_carries_remainder() {
        let x = lotka_volterra_3(int(0), int(3), int(0));
        match verify_darboux(&x, &p(&x, "x + y")) {
            Err(DarbouxError::NotDarboux { remainder }) => assert!(!remainder.is_zero()),
            other => panic!("{other:?}"),
        }
        assert_eq!(verify_darboux(&x, &p(&x, "7")), Err(DarbouxError::Constant));
    }

    #[test]
    fn fixed_cofactor_spaces() {
        let x = lotka_volterra_3(int(3), int(3), int(2));
        let zero = Poly::zero(x.vars());
        assert_eq!(search_darboux_fixed_cofactor(&x, &zero, 2), vec![p(&x, "1")]);
        let k1 = p(&x, "1 - y + 2*x - 3*x*z");
        assert_eq!(search_darboux_fixed_cofactor(&x, &k1, 1), vec![p(&x, "x")]);
        let k3 = p(&x, "-3 + 3*x^2");
        assert_eq!(search_darboux_fixed_cofactor(&x, &k3, 1), vec![p(&x, "z")]);
    }
}
