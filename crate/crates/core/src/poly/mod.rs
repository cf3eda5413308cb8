//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! A [`Poly`] carries its ambient variable list and a map from [`Monomial`]
//! to nonzero [`Rational`]. Terms are kept in graded-lex order, so the
//! printed form is canonical: two polynomials over the same variables are
//! equal exactly when they print the same.

mod basis;
mod monomial;
mod parse;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

pub use basis::MonomialBasis;
pub use monomial::Monomial;
pub use parse::{parse_expression, ParseError};

/// Shared, ordered list of variable names.
pub type Vars = Arc<[String]>;

/// Builds a [`Vars`] list from names.
pub fn vars<S: AsRef<str>>(names: &[S]) -> Vars {
    names.iter().map(|s| s.as_ref().to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("variable sets differ: [{left}] vs [{right}]")]
    VarMismatch { left: String, right: String },
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

/// Outcome of [`Poly::divide_exact`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExactDivision {
    Quotient(Poly),
    /// Graded-lex division left this nonzero remainder.
    Remainder(Poly),
}

impl ExactDivision {
    pub fn quotient(self) -> Option<Poly> {
        match self {
            ExactDivision::Quotient(q) => Some(q),
            ExactDivision::Remainder(_) => None,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    vars: Vars,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(vars: &Vars) -> Poly {
        Poly {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Vars, c: Rational) -> Poly {
        Poly::monomial(vars, Monomial::one(vars.len()), c)
    }

    pub fn one(vars: &Vars) -> Poly {
        Poly::constant(vars, Rational::one())
    }

    /// The `i`-th variable as a polynomial.
    pub fn var(vars: &Vars, i: usize) -> Poly {
        Poly::monomial(vars, Monomial::var(vars.len(), i), Rational::one())
    }

    pub fn var_named(vars: &Vars, name: &str) -> Result<Poly, PolyError> {
        let i = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        Ok(Poly::var(vars, i))
    }

    pub fn monomial(vars: &Vars, m: Monomial, c: Rational) -> Poly {
        assert_eq!(m.nvars(), vars.len(), "monomial arity");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly {
            vars: vars.clone(),
            terms,
        }
    }

    /// Collects `(monomial, coefficient)` pairs, summing repeats and dropping zeros.
    pub fn from_terms(vars: &Vars, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Poly {
        let mut p = Poly::zero(vars);
        for (m, c) in terms {
            assert_eq!(m.nvars(), vars.len(), "monomial arity");
            p.add_term(m, c);
        }
        p
    }

    /// Parses canonical (or any grammatical) text over `vars`.
    pub fn parse(text: &str, vars: &Vars) -> Result<Poly, ParseError> {
        let lookup = |name: &str| vars.iter().position(|v| v == name).map(|i| Poly::var(vars, i));
        parse_expression(text, vars, &lookup)
    }

    pub fn vars(&self) -> &Vars {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// Total degree; the zero polynomial reports 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().next_back().map_or(0, Monomial::degree)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Graded-lex leading term.
    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn constant_term(&self) -> Rational {
        self.coefficient(&Monomial::one(self.nvars()))
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_vars(&self, other: &Poly) -> Result<(), PolyError> {
        if Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars {
            Ok(())
        } else {
            Err(PolyError::VarMismatch {
                left: self.vars.join(" "),
                right: other.vars.join(" "),
            })
        }
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c);
        }
        Ok(out)
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check_vars(other)?;
        let mut out = Poly::zero(&self.vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.vars);
        }
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    /// Multiplies by a single monomial.
    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(k, a)| (k.mul(m), a.clone())).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::one(&self.vars);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Partial derivative with respect to variable `i`.
    pub fn partial(&self, i: usize) -> Poly {
        let mut out = Poly::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.exponent(i);
            if e > 0 {
                let mut exps = m.exponents().to_vec();
                exps[i] -= 1;
                out.add_term(Monomial::new(exps), c * Rational::from_integer(e.into()));
            }
        }
        out
    }

    /// Homogeneous component of total degree `k`.
    pub fn homogeneous_part(&self, k: u32) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Exact multivariate division by graded-lex leading-term reduction.
    ///
    /// With a single divisor the remainder is zero exactly when `den`
    /// divides `self`, so a [`ExactDivision::Remainder`] certifies
    /// non-divisibility.
    pub fn divide_exact(&self, den: &Poly) -> Result<ExactDivision, PolyError> {
        self.check_vars(den)?;
        let (lm, lc) = den.leading_term().ok_or(PolyError::DivisionByZero)?;
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut rest = self.clone();
        let mut quotient = Poly::zero(&self.vars);
        let mut remainder = Poly::zero(&self.vars);
        while let Some((m, c)) = rest.terms.pop_last() {
            if lm.divides(&m) {
                let qm = lm.quotient_of(&m);
                let qc = &c / &lc;
                for (dm, dc) in &den.terms {
                    if *dm == lm {
                        continue;
                    }
                    rest.add_term(dm.mul(&qm), -(dc * &qc));
                }
                quotient.add_term(qm, qc);
            } else {
                remainder.add_term(m, c);
            }
        }
        if remainder.is_zero() {
            Ok(ExactDivision::Quotient(quotient))
        } else {
            Ok(ExactDivision::Remainder(remainder))
        }
    }

    /// Convenience: `Some(q)` when `den` divides `self` exactly.
    pub fn exact_quotient(&self, den: &Poly) -> Option<Poly> {
        self.divide_exact(den).ok().and_then(ExactDivision::quotient)
    }

    /// Greatest monomial dividing every term (1 for the zero polynomial).
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        match it.next() {
            None => Monomial::one(self.nvars()),
            Some(first) => it.fold(first.clone(), |g, m| g.gcd(m)),
        }
    }

    /// Divides every term by `m`; panics if `m` does not divide some term.
    pub fn div_monomial(&self, m: &Monomial) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, c)| {
                    assert!(m.divides(k), "monomial does not divide term");
                    (m.quotient_of(k), c.clone())
                })
                .collect(),
        }
    }

    /// Scales so the graded-lex leading coefficient is 1.
    pub fn monic(&self) -> Poly {
        match self.leading_term() {
            None => self.clone(),
            Some((_, lc)) => self.scale(&lc.recip()),
        }
    }

    /// Exact evaluation at a rational point.
    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars(), "point arity");
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exponents()) {
                for _ in 0..e {
                    t *= x;
                }
            }
            acc += t;
        }
        acc
    }

    /// Substitutes constants for some variables and drops them.
    ///
    /// `assignment[i] = Some(v)` replaces variable `i` by `v`; `None` keeps it.
    /// The kept variables, in order, must match `target`.
    pub fn specialize(&self, assignment: &[Option<Rational>], target: &Vars) -> Poly {
        assert_eq!(assignment.len(), self.nvars(), "assignment arity");
        let kept: Vec<usize> = (0..self.nvars()).filter(|&i| assignment[i].is_none()).collect();
        assert_eq!(kept.len(), target.len(), "target arity");
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut coef = c.clone();
            for (i, a) in assignment.iter().enumerate() {
                if let Some(v) = a {
                    let e = m.exponent(i);
                    for _ in 0..e {
                        coef *= v;
                    }
                }
            }
            let exps = kept.iter().map(|&i| m.exponent(i)).collect();
            out.add_term(Monomial::new(exps), coef);
        }
        out
    }

    /// Re-expresses the polynomial over `target`, which must contain every
    /// variable that actually occurs.
    pub fn embed(&self, target: &Vars) -> Result<Poly, PolyError> {
        let mut map = Vec::with_capacity(self.nvars());
        for name in self.vars.iter() {
            map.push(target.iter().position(|t| t == name));
        }
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut exps = vec![0; target.len()];
            for (i, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let j = map[i].ok_or_else(|| PolyError::UnknownVariable(self.vars[i].clone()))?;
                exps[j] += e;
            }
            out.add_term(Monomial::new(exps), c.clone());
        }
        Ok(out)
    }

    /// Indices of variables that occur with positive exponent.
    pub fn support_vars(&self) -> Vec<usize> {
        (0..self.nvars())
            .filter(|&i| self.terms.keys().any(|m| m.exponent(i) > 0))
            .collect()
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let negative = c.is_negative();
            match (k, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mag = c.abs();
            let mut factors: Vec<String> = Vec::new();
            if m.is_one() || !mag.is_one() {
                factors.push(mag.to_string());
            }
            for (name, &e) in self.vars.iter().zip(m.exponents()) {
                match e {
                    0 => {}
                    1 => factors.push(name.clone()),
                    _ => factors.push(format!("{name}^{e}")),
                }
            }
            f.write_str(&factors.join("*"))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({})", self.vars.join(","), self)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Poly> for &Poly {
            type Output = Poly;
            fn $method(self, rhs: &Poly) -> Poly {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $trait<Poly> for Poly {
            type Output = Poly;
            fn $method(self, rhs: Poly) -> Poly {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn xyz() -> Vars {
        vars(&["x", "y", "z"])
    }

    fn p(s: &str) -> Poly {
        Poly::parse(s, &xyz()).unwrap()
    }

    #[test]
    fn square_of_sum() {
        assert_eq!((&p("x + z") * &p("x + z")).to_string(), "x^2 + 2*x*z + z^2");
    }

    #[test]
    fn additive_identity() {
        let q = p("3*x*y - 1/2");
        assert_eq!(&q + &Poly::zero(&xyz()), q);
    }

    #[test]
    fn prey_equation_at_zero_a() {
        // x-component of the three-species field with a = 0, c = 2
        assert_eq!(&p("1 - y + 2*x") * &p("x"), p("x - x*y + 2*x^2"));
        assert_eq!(p("x - x*y + 2*x^2").to_string(), "2*x^2 - x*y + x");
    }

    #[test]
    fn exact_division_cases() {
        let q = p("x^2*y - x*y^2").divide_exact(&p("x*y")).unwrap();
        assert_eq!(q, ExactDivision::Quotient(p("x - y")));
        let q = p("x - x*y + 2*x^2").divide_exact(&p("x")).unwrap();
        assert_eq!(q, ExactDivision::Quotient(p("1 - y + 2*x")));
        match p("x - y").divide_exact(&p("x + y")).unwrap() {
            ExactDivision::Remainder(r) => assert!(!r.is_zero()),
            other => panic!("expected remainder, got {other:?}"),
        }
        assert_eq!(p("x").divide_exact(&Poly::zero(&xyz())), Err(PolyError::DivisionByZero));
    }

    #[test]
    fn no_polynomial_quotient_for_x_minus_y_over_x_plus_y() {
        // Brute force: no q of degree <= 1 with (x + y) q = x - y.
        let den = p("x + y");
        let target = p("x - y");
        for a in -3..=3 {
            for b in -3..=3 {
                for c in -3..=3 {
                    let q = Poly::from_terms(
                        &xyz(),
                        [
                            (Monomial::new(vec![1, 0, 0]), rat(a, 2)),
                            (Monomial::new(vec![0, 1, 0]), rat(b, 2)),
                            (Monomial::one(3), rat(c, 2)),
                        ],
                    );
                    assert_ne!(&den * &q, target);
                }
            }
        }
    }

    #[test]
    fn mismatched_variables_are_rejected() {
        let other = Poly::var(&vars(&["x", "y"]), 0);
        assert!(matches!(p("x").checked_add(&other), Err(PolyError::VarMismatch { .. })));
    }

    #[test]
    fn printing_forms() {
        assert_eq!(p("2*x^2 - x*y + 1/2").to_string(), "2*x^2 - x*y + 1/2");
        assert_eq!(p("-x - 3/4*z^3").to_string(), "-3/4*z^3 - x");
        assert_eq!(Poly::zero(&xyz()).to_string(), "0");
        assert_eq!(p("-1").to_string(), "-1");
    }

    #[test]
    fn derivative_and_eval() {
        let q = p("x^3*y - 2*z + 5");
        assert_eq!(q.partial(0), p("3*x^2*y"));
        assert_eq!(q.eval(&[int(2), int(1), rat(1, 2)]), int(12));
    }

    #[test]
    fn specialize_and_embed() {
        let q = p("x*y + y*z + 3");
        let xz = vars(&["x", "z"]);
        assert_eq!(
            q.specialize(&[None, Some(int(0)), None], &xz),
            Poly::constant(&xz, int(3))
        );
        let emb = Poly::parse("x*z", &xz).unwrap().embed(&xyz()).unwrap();
        assert_eq!(emb, p("x*z"));
        assert!(p("y").embed(&xz).is_err());
    }

    #[test]
    fn monomial_content_strip() {
        let q = p("x^2*y + x^3*y");
        assert_eq!(q.monomial_content(), Monomial::new(vec![2, 1, 0]));
        assert_eq!(q.div_monomial(&q.monomial_content()), p("1 + x"));
        assert_eq!(p("3*x - 6*y").monic(), p("x - 2*y"));
    }
}
