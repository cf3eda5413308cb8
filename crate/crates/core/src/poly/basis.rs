use std::collections::HashMap;

use num_traits::Zero;

use super::{Monomial, Poly, Vars};
use crate::rational::Rational;

/// An indexed list of monomials used as coordinates for linear algebra.
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    monos: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl MonomialBasis {
    pub fn new(monos: Vec<Monomial>) -> Self {
        let index = monos.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        MonomialBasis { monos, index }
    }

    /// All monomials of degree `lo..=hi`, descending graded-lex.
    pub fn degrees(nvars: usize, lo: u32, hi: u32) -> Self {
        MonomialBasis::new(Monomial::all_up_to(nvars, lo, hi))
    }

    /// Homogeneous monomials of degree `d`, descending graded-lex.
    pub fn homogeneous(nvars: usize, d: u32) -> Self {
        MonomialBasis::new(Monomial::all_of_degree(nvars, d))
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monos
    }

    pub fn get(&self, i: usize) -> &Monomial {
        &self.monos[i]
    }

    pub fn position(&self, m: &Monomial) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Coordinates of `p`, or `None` if `p` has a term outside the basis.
    pub fn coords(&self, p: &Poly) -> Option<Vec<Rational>> {
        let mut v = vec![Rational::zero(); self.len()];
        for (m, c) in p.terms() {
            v[self.position(m)?] = c.clone();
        }
        Some(v)
    }

    pub fn poly(&self, vars: &Vars, coords: &[Rational]) -> Poly {
        Poly::from_terms(
            vars,
            self.monos
                .iter()
                .zip(coords)
                .filter(|(_, c)| !c.is_zero())
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }
}
