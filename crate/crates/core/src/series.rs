//! Truncated formal first integrals.
//!
//! A formal first integral `f = Σ f_k` satisfies `(X f)_k = 0` in every
//! degree `k`. The solver takes a polynomial `f` of degree `<= N` and asks
//! for `(X f)_k = 0` in every degree `k <= N + m`. With no constant layer in
//! `X` the equations of degree `<= N` only involve `f_1..f_k`, so the margin
//! `m` adds obstruction equations on the same unknowns; they remove
//! truncations that fail one or more orders later. A finite computation
//! never proves that no formal integral exists; the result is the dimension
//! of the truncated space.

use std::collections::BTreeSet;

use num_traits::One;

use crate::darboux::canonical_order;
use crate::field::{FieldError, VectorField};
use crate::linalg::{span_basis, RatMatrix};
use crate::poly::{Monomial, MonomialBasis, Poly};
use crate::rational::Rational;

/// Truncated formal first integrals of degree `<= order`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesSpace {
    pub order: u32,
    pub margin: u32,
    /// The constant 1 followed by the non-constant basis, ascending.
    pub basis: Vec<Poly>,
}

impl SeriesSpace {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Variables occurring anywhere in the basis, in field order.
    pub fn depends_only_on(&self) -> Vec<String> {
        let Some(first) = self.basis.first() else {
            return Vec::new();
        };
        let used: BTreeSet<usize> = self.basis.iter().flat_map(Poly::support_vars).collect();
        used.into_iter().map(|i| first.vars()[i].clone()).collect()
    }
}

/// A field with one parameter turned into a state variable with `ḃ = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtendedField {
    pub field: VectorField,
    pub promoted: String,
}

impl ExtendedField {
    pub fn promote(field: &VectorField, name: &str) -> Result<Self, FieldError> {
        Ok(ExtendedField {
            field: field.promote_parameter(name)?,
            promoted: name.to_string(),
        })
    }
}

/// Exact space of polynomials of degree `<= order` with `(X f)_k = 0` for
/// every `k <= order + margin`.
pub fn formal_integral_space(field: &VectorField, order: u32, margin: u32) -> SeriesSpace {
    let n = field.nvars();
    let vars = field.vars();
    let cols = MonomialBasis::degrees(n, 1, order);
    let rows = MonomialBasis::degrees(n, 0, order + margin);
    let mut a = RatMatrix::zeros(rows.len(), cols.len());
    for (j, m) in cols.monomials().iter().enumerate() {
        let img = field
            .lie_derivative(&Poly::monomial(vars, m.clone(), Rational::one()))
            .expect("same variables");
        for (t, c) in img.terms() {
            if let Some(i) = rows.position(t) {
                a[(i, j)] = c.clone();
            }
        }
    }
    let mut basis: Vec<Poly> = span_basis(&a.nullspace(), cols.len())
        .iter()
        .map(|v| cols.poly(vars, v))
        .collect();
    basis.sort_by(canonical_order);
    basis.insert(0, Poly::monomial(vars, Monomial::one(n), Rational::one()));
    SeriesSpace { order, margin, basis }
}

/// [`formal_integral_space`] on an extended field, plus whether every basis
/// element is a polynomial in the promoted variable alone.
pub fn formal_space_extended(ext: &ExtendedField, order: u32, margin: u32) -> (SeriesSpace, bool) {
    let space = formal_integral_space(&ext.field, order, margin);
    let only = space.depends_only_on().iter().all(|v| *v == ext.promoted);
    (space, only)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::lotka_volterra_3;
    use crate::rational::int;

    fn shown(s: &SeriesSpace) -> Vec<String> {
        s.basis.iter().map(|p| p.to_string()).collect()
    }

    #[test]
    fn restricted_z_plane_has_only_constants() {
        let x = lotka_volterra_3(int(3), int(3), int(2)).restrict_to_plane("z").unwrap();
        assert_eq!(formal_integral_space(&x, 8, 2).dimension(), 1);
    }

    #[test]
    fn restricted_z_plane_at_zero_c_contains_truncated_h1() {
        let x = lotka_volterra_3(int(3), int(3), int(0)).restrict_to_plane("z").unwrap();
        let s = formal_integral_space(&x, 4, 0);
        assert!(s.dimension() >= 2);
        let h = Poly::parse("x*y - x*y*(x + y) + x*y*(x + y)^2/2", x.vars()).unwrap();
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        let b = MonomialBasis::degrees(2, 0, 4);
        for p in &s.basis {
            rows.push(b.coords(p).unwrap());
        }
        let r = RatMatrix::from_rows(rows.clone()).rank();
        rows.push(b.coords(&h).unwrap());
        assert_eq!(RatMatrix::from_rows(rows).rank(), r);
    }

    #[test]
    fn promoted_parameter_gives_powers() {
        let x = lotka_volterra_3(int(3), int(0), int(2));
        let ext = ExtendedField::promote(&x, "b").unwrap();
        let (s, only) = formal_space_extended(&ext, 1, 1);
        assert_eq!(shown(&s), vec!["1", "b"]);
        assert!(only);
        assert!(ext
            .field
            .lie_derivative(&Poly::parse("b", ext.field.vars()).unwrap())
            .unwrap()
            .is_zero());
        assert!(ExtendedField::promote(&x, "q").is_err());
    }

    #[test]
    fn margin_is_monotone() {
        let x = lotka_volterra_3(int(3), int(3), int(0)).restrict_to_plane("z").unwrap();
        let d0 = formal_integral_space(&x, 3, 0).dimension();
        let d1 = formal_integral_space(&x, 3, 1).dimension();
        let d2 = formal_integral_space(&x, 3, 2).dimension();
        assert!(d2 <= d1 && d1 <= d0);
    }
}
