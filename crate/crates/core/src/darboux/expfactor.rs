use std::fmt;

use num_traits::{One, Zero};

use crate::field::VectorField;
use crate::linalg::{span_basis, RatMatrix};
use crate::poly::{Monomial, MonomialBasis, Poly, PolyError};
use crate::rational::Rational;

use super::cofactor_degree;

/// Exponential factor `exp(g / Π x_i^{s_i})` with cofactor `L`:
/// `X g - g Σ s_i K_i = L Π x_i^{s_i}`, where `K_i` is the cofactor of `x_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpFactorCert {
    pub g: Poly,
    pub s: Vec<u32>,
    pub cofactor: Poly,
}

impl ExpFactorCert {
    /// The denominator `Π x_i^{s_i}` as a polynomial.
    pub fn denominator(&self) -> Poly {
        Poly::monomial(self.g.vars(), Monomial::new(self.s.clone()), Rational::one())
    }

    /// `g` or `g/(x^s)` as text.
    pub fn exponent_text(&self) -> String {
        if self.s.iter().all(|&e| e == 0) {
            self.g.to_string()
        } else {
            format!("({})/({})", self.g, self.denominator())
        }
    }
}

impl fmt::Display for ExpFactorCert {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "exp({}) (cofactor {})", self.exponent_text(), self.cofactor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExpFactorError {
    #[error("exponent vector has {got} entries, field has {want} variables")]
    Arity { got: usize, want: usize },
    #[error("plane {0} = 0 is not invariant, so it cannot appear in the denominator")]
    NotInvariantPlane(String),
    #[error("{0} divides the numerator")]
    NotCoprime(String),
    #[error("not an exponential factor: {remainder} is not divisible by the denominator")]
    NotExpFactor { remainder: Poly },
    #[error("cofactor {cofactor} has degree above {bound}")]
    CofactorDegree { cofactor: Poly, bound: u32 },
    #[error("{0}")]
    Poly(#[from] PolyError),
}

/// Computes `L` for `exp(g / x^s)` by exact division.
pub fn verify_exp_factor(field: &VectorField, g: &Poly, s: &[u32]) -> Result<ExpFactorCert, ExpFactorError> {
    let n = field.nvars();
    if s.len() != n {
        return Err(ExpFactorError::Arity { got: s.len(), want: n });
    }
    let cofactors = field.coordinate_cofactors();
    let mut weight = Poly::zero(field.vars());
    for (i, &si) in s.iter().enumerate() {
        if si == 0 {
            continue;
        }
        let k = cofactors[i]
            .as_ref()
            .ok_or_else(|| ExpFactorError::NotInvariantPlane(field.vars()[i].clone()))?;
        if g.is_zero() || g.exact_quotient(&Poly::var(field.vars(), i)).is_some() {
            return Err(ExpFactorError::NotCoprime(field.vars()[i].clone()));
        }
        weight = &weight + &k.scale(&Rational::from_integer(si.into()));
    }
    let lhs = field.lie_derivative(g)?.checked_sub(&g.checked_mul(&weight)?)?;
    let den = Monomial::new(s.to_vec());
    let remainder = Poly::from_terms(
        field.vars(),
        lhs.terms()
            .filter(|(m, _)| !den.divides(m))
            .map(|(m, c)| (m.clone(), c.clone())),
    );
    if !remainder.is_zero() {
        return Err(ExpFactorError::NotExpFactor { remainder });
    }
    let cofactor = lhs.div_monomial(&den);
    let bound = cofactor_degree(field);
    if cofactor.degree() > bound {
        return Err(ExpFactorError::CofactorDegree { cofactor, bound });
    }
    Ok(ExpFactorCert {
        g: g.clone(),
        s: s.to_vec(),
        cofactor,
    })
}

/// Complete search for exponential factors with `deg g <= deg_g` and
/// denominators `Π x_i^{s_i}`, `s_i <= s_bound`, over invariant coordinate
/// planes.
///
/// For fixed `s` the defining equation is linear in `(g, L)` jointly, so each
/// `s` is one exact kernel. Solutions with `L = 0` (first integrals, among
/// them the constants) and solutions with some `x_i` dividing `g` are
/// quotiented out; the rest is returned in reduced echelon form, `g` monic.
pub fn search_exp_factors(field: &VectorField, deg_g: u32, s_bound: u32) -> Vec<ExpFactorCert> {
    let n = field.nvars();
    let vars = field.vars();
    let kdeg = cofactor_degree(field);
    let cofactors = field.coordinate_cofactors();
    let gcols = MonomialBasis::degrees(n, 0, deg_g);
    let lcols = MonomialBasis::degrees(n, 0, kdeg);
    let (ng, nl) = (gcols.len(), lcols.len());
    let x_images: Vec<Poly> = gcols
        .monomials()
        .iter()
        .map(|m| {
            field
                .lie_derivative(&Poly::monomial(vars, m.clone(), Rational::one()))
                .expect("same variables")
        })
        .collect();

    let mut out = Vec::new();
    for s in exponent_vectors(&cofactors, s_bound) {
        let sdeg: u32 = s.iter().sum();
        let mut weight = Poly::zero(vars);
        for (i, &si) in s.iter().enumerate() {
            if si > 0 {
                weight = &weight
                    + &cofactors[i]
                        .as_ref()
                        .expect("invariant")
                        .scale(&Rational::from_integer(si.into()));
            }
        }
        let top = (deg_g + field.degree().saturating_sub(1))
            .max(deg_g + weight.degree())
            .max(kdeg + sdeg);
        let rows = MonomialBasis::degrees(n, 0, top);
        let den = Monomial::new(s.clone());
        let mut a = RatMatrix::zeros(rows.len(), ng + nl);
        for (j, m) in gcols.monomials().iter().enumerate() {
            let mono = Poly::monomial(vars, m.clone(), Rational::one());
            let img = &x_images[j] - &(&weight * &mono);
            for (t, c) in img.terms() {
                a[(rows.position(t).expect("rows cover"), j)] = c.clone();
            }
        }
        for (j, m) in lcols.monomials().iter().enumerate() {
            a[(rows.position(&m.mul(&den)).expect("rows cover"), ng + j)] = -Rational::one();
        }
        let kernel = a.nullspace();
        if kernel.is_empty() {
            continue;
        }

        // Trivial part: L = 0, or x_i | g for some i with s_i > 0.
        let mut trivial: Vec<Vec<Rational>> = Vec::new();
        let l_zero: Vec<usize> = (ng..ng + nl).collect();
        trivial.extend(constrained_kernel(&a, &l_zero));
        for (i, &si) in s.iter().enumerate() {
            if si == 0 {
                continue;
            }
            let free_of_xi: Vec<usize> = (0..ng).filter(|&j| gcols.get(j).exponent(i) == 0).collect();
            trivial.extend(constrained_kernel(&a, &free_of_xi));
        }
        let trivial = span_basis(&trivial, ng + nl);
        let reduced: Vec<Vec<Rational>> = kernel
            .into_iter()
            .map(|mut v| {
                for row in &trivial {
                    let p = row.iter().position(|c| !c.is_zero()).expect("nonzero row");
                    if v[p].is_zero() {
                        continue;
                    }
                    let f = v[p].clone();
                    for (x, r) in v.iter_mut().zip(row) {
                        if !r.is_zero() {
                            *x -= &f * r;
                        }
                    }
                }
                v
            })
            .filter(|v| v.iter().any(|c| !c.is_zero()))
            .collect();
        for v in span_basis(&reduced, ng + nl) {
            let g = gcols.poly(vars, &v[..ng]);
            let l = lcols.poly(vars, &v[ng..]);
            let lc = g.leading_term().map(|(_, c)| c.clone()).unwrap_or_else(Rational::one);
            let inv = lc.recip();
            out.push(ExpFactorCert {
                g: g.scale(&inv),
                s: s.clone(),
                cofactor: l.scale(&inv),
            });
        }
    }
    out
}

/// Kernel of `a` restricted to vectors vanishing on `zero_cols`.
fn constrained_kernel(a: &RatMatrix, zero_cols: &[usize]) -> Vec<Vec<Rational>> {
    let mut rows: Vec<Vec<Rational>> = (0..a.rows()).map(|i| a.row(i).to_vec()).collect();
    for &c in zero_cols {
        let mut r = vec![Rational::zero(); a.cols()];
        r[c] = Rational::one();
        rows.push(r);
    }
    RatMatrix::from_rows(rows).nullspace()
}

/// Exponent vectors in lexicographic order; only invariant planes may
/// carry a positive exponent.
fn exponent_vectors(cofactors: &[Option<Poly>], bound: u32) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for k in cofactors {
        let hi = if k.is_some() { bound } else { 0 };
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u32>| {
                (0..=hi).map(move |e| {
                    let mut v = prefix.clone();
                    v.push(e);
                    v
                })
            })
            .collect();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::lotka_volterra_3;
    use crate::rational::int;

    fn p(field: &VectorField, s: &str) -> Poly {
        Poly::parse(s, field.vars()).unwrap()
    }

    #[test]
    fn verified_cofactors() {
        let x = lotka_volterra_3(int(3), int(3), int(2));
        let e = verify_exp_factor(&x, &p(&x, "x + z"), &[0, 0, 0]).unwrap();
        assert_eq!(e.cofactor, p(&x, "2*x^2 - x*y - 3*z + x"));
        let e = verify_exp_factor(&x, &p(&x, "y"), &[0, 0, 0]).unwrap();
        assert_eq!(e.cofactor, p(&x, "y*(x - 1)"));
        let x0 = lotka_volterra_3(int(3), int(3), int(0));
        let e = verify_exp_factor(&x0, &p(&x0, "(x + y + z)^2"), &[0, 0, 0]).unwrap();
        assert_eq!(e.cofactor, p(&x0, "-2*(x + y + z)*(3*z - x + y)"));
    }

    #[test]
    fn verify_rejections() {
        let x = lotka_volterra_3(int(3), int(3), int(2));
        assert!(matches!(
            verify_exp_factor(&x, &p(&x, "x^2"), &[0, 0, 0]),
            Err(ExpFactorError::CofactorDegree { .. })
        ));
        assert!(matches!(
            verify_exp_factor(&x, &p(&x, "x*y"), &[1, 0, 0]),
            Err(ExpFactorError::NotCoprime(_))
        ));
        assert!(matches!(
            verify_exp_factor(&x, &p(&x, "y + 1"), &[1, 0, 0]),
            Err(ExpFactorError::NotExpFactor { .. })
        ));
    }

    #[test]
    fn exponent_vectors_respect_invariance() {
        let got = exponent_vectors(&[Some(Poly::zero(&crate::poly::vars(&["x"]))), None], 1);
        assert_eq!(got, vec![vec![0, 0], vec![1, 0]]);
    }
}
