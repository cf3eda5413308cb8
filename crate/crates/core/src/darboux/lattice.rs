use std::collections::HashSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::field::VectorField;
use crate::poly::{Monomial, MonomialBasis, Poly, Vars};
use crate::rational::Rational;

use super::cofactor_degree;

/// Candidate cofactors `{ Σ n_i g_i : |n_i| <= B }`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CofactorLattice {
    generators: Vec<Poly>,
    bound: u32,
}

impl CofactorLattice {
    pub fn new(generators: Vec<Poly>, bound: u32) -> Self {
        CofactorLattice { generators, bound }
    }

    /// Default generators for `field`.
    ///
    /// The cofactors `P_i / x_i` of the invariant coordinate planes, every
    /// monomial of degree below `deg X - 1`, and each top-degree term of the
    /// coordinate cofactors with its coefficient made positive. A field with
    /// no invariant coordinate plane gets all top-degree monomials instead.
    pub fn default_for(field: &VectorField, bound: u32) -> Self {
        let vars = field.vars();
        let n = field.nvars();
        let kdeg = cofactor_degree(field);
        let coordinate: Vec<Poly> = field.coordinate_cofactors().into_iter().flatten().collect();
        let mut generators: Vec<Poly> = Vec::new();
        let push = |g: Poly, gens: &mut Vec<Poly>| {
            if !g.is_zero() && !gens.contains(&g) {
                gens.push(g);
            }
        };
        for k in &coordinate {
            push(k.clone(), &mut generators);
        }
        if kdeg > 0 {
            for d in 0..kdeg {
                for m in Monomial::all_of_degree(n, d) {
                    push(Poly::monomial(vars, m, Rational::one()), &mut generators);
                }
            }
        }
        let mut top: Vec<(Monomial, Rational)> = Vec::new();
        if coordinate.is_empty() {
            top.extend(
                Monomial::all_of_degree(n, kdeg)
                    .into_iter()
                    .map(|m| (m, Rational::one())),
            );
        } else {
            for k in &coordinate {
                for (m, c) in k.homogeneous_part(kdeg).terms() {
                    top.push((m.clone(), c.abs()));
                }
            }
            top.sort_by(|a, b| b.0.cmp(&a.0));
        }
        for (m, c) in top {
            push(Poly::monomial(vars, m, c), &mut generators);
        }
        CofactorLattice { generators, bound }
    }

    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    /// Exact membership test (meet in the middle over the generators).
    pub fn contains(&self, k: &Poly) -> bool {
        let vars = k.vars().clone();
        if self.generators.iter().any(|g| g.vars() != &vars) {
            return false;
        }
        let layout = Layout::new(&vars, &self.generators, k.degree());
        let Some(key) = layout.key_of(k) else {
            return false;
        };
        let half = layout.gens.len() / 2;
        let (left, right) = layout.gens.split_at(half);
        let left: Vec<&Vec<i64>> = left.iter().collect();
        let right: Vec<&Vec<i64>> = right.iter().collect();
        let left_sums: HashSet<Vec<i64>> = sums(&left, self.bound, layout.len()).into_iter().collect();
        sums(&right, self.bound, layout.len())
            .into_iter()
            .any(|r| left_sums.contains(&sub(&key, &r)))
    }
}

/// All distinct lattice points as polynomials, in ascending key order.
///
/// Materializes every candidate; meant for small lattices. The searches
/// walk the lattice layer by layer instead.
pub fn enumerate_cofactors(field: &VectorField, lattice: &CofactorLattice) -> Vec<Poly> {
    let layout = Layout::new(field.vars(), &lattice.generators, cofactor_degree(field));
    let gens: Vec<&Vec<i64>> = layout.gens.iter().collect();
    let mut keys = sums(&gens, lattice.bound, layout.len());
    keys.sort();
    keys.iter().map(|k| layout.poly(field.vars(), k)).collect()
}

/// Coordinates for lattice points: one column per monomial of degree
/// `<= top`, scaled by a per-column unit so generators have integer keys.
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    pub basis: MonomialBasis,
    pub units: Vec<Rational>,
    pub gens: Vec<Vec<i64>>,
    pub top: u32,
}

impl Layout {
    pub fn new(vars: &Vars, generators: &[Poly], min_top: u32) -> Self {
        let top = generators.iter().map(Poly::degree).max().unwrap_or(0).max(min_top);
        let basis = MonomialBasis::degrees(vars.len(), 0, top);
        let coords: Vec<Vec<Rational>> = generators
            .iter()
            .map(|g| basis.coords(g).expect("generator within degree bound"))
            .collect();
        let units: Vec<Rational> = (0..basis.len())
            .map(|j| rational_gcd(coords.iter().map(|c| &c[j])))
            .collect();
        let gens = coords
            .iter()
            .map(|c| {
                c.iter()
                    .zip(&units)
                    .map(|(v, u)| {
                        let q = v / u;
                        debug_assert!(q.is_integer());
                        q.to_integer().to_i64().expect("generator key fits in i64")
                    })
                    .collect()
            })
            .collect();
        Layout {
            basis,
            units,
            gens,
            top,
        }
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    /// Columns belonging to the homogeneous layer of degree `l`.
    pub fn layer(&self, l: u32) -> std::ops::Range<usize> {
        let ms = self.basis.monomials();
        let start = ms.iter().position(|m| m.degree() == l).unwrap_or(ms.len());
        let end = ms[start..]
            .iter()
            .position(|m| m.degree() != l)
            .map_or(ms.len(), |e| start + e);
        start..end
    }

    /// Highest layer in which a key is nonzero, or `None` for the zero key.
    pub fn top_layer(&self, key: &[i64]) -> Option<u32> {
        key.iter()
            .zip(self.basis.monomials())
            .find(|(k, _)| **k != 0)
            .map(|(_, m)| m.degree())
    }

    pub fn key_of(&self, p: &Poly) -> Option<Vec<i64>> {
        let coords = self.basis.coords(p)?;
        coords
            .iter()
            .zip(&self.units)
            .map(|(c, u)| {
                if c.is_zero() {
                    return Some(0);
                }
                let q = c / u;
                if q.is_integer() {
                    q.to_integer().to_i64()
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn coefficient(&self, key: &[i64], j: usize) -> Rational {
        &self.units[j] * Rational::from_integer(BigInt::from(key[j]))
    }

    pub fn poly(&self, vars: &Vars, key: &[i64]) -> Poly {
        let coords: Vec<Rational> = (0..key.len()).map(|j| self.coefficient(key, j)).collect();
        self.basis.poly(vars, &coords)
    }
}

/// Largest rational `u` with every value an integer multiple of `u`
/// (1 when all values vanish).
fn rational_gcd<'a>(values: impl Iterator<Item = &'a Rational>) -> Rational {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for v in values {
        if v.is_zero() {
            continue;
        }
        num = num.gcd(v.numer());
        den = den.lcm(v.denom());
    }
    if num.is_zero() {
        Rational::one()
    } else {
        Rational::new(num, den)
    }
}

pub(crate) fn add_scaled(a: &[i64], b: &[i64], n: i64) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + n * y).collect()
}

fn sub(a: &[i64], b: &[i64]) -> Vec<i64> {
    add_scaled(a, b, -1)
}

/// Distinct values of `Σ n_i g_i` with `|n_i| <= bound`.
pub(crate) fn sums(gens: &[&Vec<i64>], bound: u32, len: usize) -> Vec<Vec<i64>> {
    let b = bound as i64;
    let mut current = vec![vec![0i64; len]];
    for g in gens {
        let mut next = Vec::with_capacity(current.len() * (2 * bound as usize + 1));
        let mut seen: HashSet<Vec<i64>> = HashSet::with_capacity(next.capacity());
        for s in &current {
            for n in -b..=b {
                let v = add_scaled(s, g, n);
                if seen.insert(v.clone()) {
                    next.push(v);
                }
            }
        }
        current = next;
    }
    current
}
