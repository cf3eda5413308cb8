//! Strategies and checks shared by the property suite and the acceptance
//! harness.
#![allow(dead_code)]

use darboux_lab::darboux::{assemble_darboux_integrals, verify_darboux, verify_exp_factor, DarbouxFunction};
use darboux_lab::field::{lotka_volterra_3, VectorField};
use darboux_lab::linalg::RatMatrix;
use darboux_lab::numerics::{conservation_drift, simulate, CompiledField, Method};
use darboux_lab::poly::{vars, Monomial, Poly, Vars};
use darboux_lab::rational::{rat, Rational};
use num_traits::Zero;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub fn xyz() -> Vars {
    vars(&["x", "y", "z"])
}

pub fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 1i64..=4).prop_map(|(n, d)| rat(n, d))
}

/// Polynomials in x, y, z of degree `<= deg` with at most `terms` terms.
pub fn poly(deg: u32, terms: usize) -> impl Strategy<Value = Poly> {
    let monos = Monomial::all_up_to(3, 0, deg);
    prop::collection::vec((0..monos.len(), small_rational()), 0..=terms)
        .prop_map(move |ts| Poly::from_terms(&xyz(), ts.into_iter().map(|(i, c)| (monos[i].clone(), c))))
}

pub fn nonzero_poly(deg: u32, terms: usize) -> impl Strategy<Value = Poly> {
    poly(deg, terms).prop_filter("nonzero", |p| !p.is_zero())
}

/// Three-species fields at random small rational parameters.
pub fn lv_field() -> impl Strategy<Value = VectorField> {
    (small_rational(), small_rational(), small_rational()).prop_map(|(a, b, c)| lotka_volterra_3(a, b, c))
}

/// A random quadratic field on x, y, z.
pub fn quadratic_field() -> impl Strategy<Value = VectorField> {
    prop::collection::vec(poly(2, 4), 3).prop_map(|comps| VectorField::new(&xyz(), comps).unwrap())
}

/// Non-constant monomials, all Darboux for a Kolmogorov field.
pub fn monomial() -> impl Strategy<Value = Poly> {
    (0u32..3, 0u32..3, 0u32..3)
        .prop_filter("non-constant", |&(i, j, k)| i + j + k > 0)
        .prop_map(|(i, j, k)| Poly::monomial(&xyz(), Monomial::new(vec![i, j, k]), rat(1, 1)))
}

pub fn division_round_trip(f: &Poly, g: &Poly) -> Result<(), TestCaseError> {
    let product = f * g;
    prop_assert_eq!(product.exact_quotient(g), Some(f.clone()));
    let shifted = &product + &Poly::constant(&xyz(), rat(1, 1));
    if g.degree() > 0 {
        prop_assert!(shifted.exact_quotient(g).is_none());
    }
    Ok(())
}

pub fn derivation_rule(x: &VectorField, f: &Poly, g: &Poly) -> Result<(), TestCaseError> {
    let lhs = x.lie_derivative(&(f * g)).unwrap();
    let rhs = &(f * &x.lie_derivative(g).unwrap()) + &(g * &x.lie_derivative(f).unwrap());
    prop_assert_eq!(lhs, rhs);
    Ok(())
}

pub fn cofactor_additivity(x: &VectorField, f: &Poly, g: &Poly) -> Result<(), TestCaseError> {
    let cf = verify_darboux(x, f).unwrap();
    let cg = verify_darboux(x, g).unwrap();
    let cfg = verify_darboux(x, &(f * g)).unwrap();
    prop_assert_eq!(cfg.cofactor, &cf.cofactor + &cg.cofactor);
    Ok(())
}

pub fn matrix() -> impl Strategy<Value = Vec<Vec<Rational>>> {
    (1usize..=5, 1usize..=6).prop_flat_map(|(r, c)| {
        prop::collection::vec(
            prop::collection::vec(prop_oneof![3 => Just(0i64), 2 => -3i64..=3], c),
            r,
        )
        .prop_map(|rows| {
            rows.into_iter()
                .map(|row| row.into_iter().map(|v| rat(v, 1)).collect())
                .collect()
        })
    })
}

pub fn nullspace_soundness(rows: Vec<Vec<Rational>>) -> Result<(), TestCaseError> {
    let cols = rows[0].len();
    let m = RatMatrix::from_rows(rows);
    let ns = m.nullspace();
    for v in &ns {
        prop_assert!(m.mul_vec(v).iter().all(Zero::is_zero));
    }
    prop_assert_eq!(m.rank() + ns.len(), cols);
    if !ns.is_empty() {
        prop_assert_eq!(RatMatrix::from_rows(ns.clone()).rank(), ns.len());
    }
    Ok(())
}

/// H1 of the integrable case.
pub fn h1() -> DarbouxFunction {
    let x = lotka_volterra_3(rat(0, 1), rat(0, 1), rat(0, 1));
    let p = |s: &str| Poly::parse(s, x.vars()).unwrap();
    let certs: Vec<_> = ["x", "y", "z"]
        .iter()
        .map(|s| verify_darboux(&x, &p(s)).unwrap())
        .collect();
    let e = verify_exp_factor(&x, &p("x + y"), &[0, 0, 0]).unwrap();
    assemble_darboux_integrals(&certs, &[e]).remove(0)
}

/// Starts on orbits around the centre (1, 1) of the integrable case. Very
/// small orbits are excluded: there the drift is too small to resolve.
pub fn start_state() -> impl Strategy<Value = [f64; 3]> {
    (0.2f64..0.9, 0.0f64..std::f64::consts::TAU, 0.5f64..2.0)
        .prop_map(|(r, th, z)| [1.0 + r * th.cos(), 1.0 + r * th.sin(), z])
}

/// Halving the RK4 step divides the drift of H1 by about 16.
pub fn rk4_order(x0: [f64; 3]) -> Result<(), TestCaseError> {
    let x = lotka_volterra_3(rat(0, 1), rat(0, 1), rat(0, 1));
    let h = h1();
    let drift = |dt: f64| {
        let t = simulate(&x, &x0, 10.0, Method::Rk4 { dt }).unwrap();
        conservation_drift(&t, &h).unwrap().max_abs_drift
    };
    let ratio = drift(0.1) / drift(0.05);
    prop_assert!((8.0..=32.0).contains(&ratio), "ratio {}", ratio);
    Ok(())
}

/// The compiled analytic Jacobian against central differences.
pub fn jacobian_matches(x: &VectorField, p: [f64; 3]) -> Result<(), TestCaseError> {
    let c = CompiledField::new(x);
    let mut j = [0.0; 9];
    c.jacobian(&p, &mut j);
    let (mut up, mut dn) = ([0.0; 3], [0.0; 3]);
    for col in 0..3 {
        let h = 1e-5 * p[col].abs().max(1.0);
        let (mut a, mut b) = (p, p);
        a[col] += h;
        b[col] -= h;
        c.rhs(&a, &mut up);
        c.rhs(&b, &mut dn);
        for row in 0..3 {
            let fd = (up[row] - dn[row]) / (2.0 * h);
            let exact = j[row * 3 + col];
            prop_assert!(
                (fd - exact).abs() <= 1e-6 * exact.abs().max(1.0),
                "d{}/d{}: {} vs {}",
                row,
                col,
                fd,
                exact
            );
        }
    }
    Ok(())
}

pub fn state() -> impl Strategy<Value = [f64; 3]> {
    (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b, c)| [a, b, c])
}
