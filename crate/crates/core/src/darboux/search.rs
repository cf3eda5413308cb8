//! Lattice search for Darboux polynomials.
//!
//! Candidates `K` are built layer by layer, highest degree first. Writing
//! `f = f_n + f_{n-1} + ...` and `X = X_D + X_{D-1} + ...` by homogeneous
//! degree, `X f = K f` forces
//!
//! ```text
//! (X_D - K_{D-1}) f_n = 0
//! (X_D - K_{D-1}) f_{n-1} = (K_{D-2} - X_{D-1}) f_n
//! ```
//!
//! so a top layer whose operator has trivial kernel in every degree
//! `1..=d` is discarded before any lower layer is chosen, and the second
//! equation, projected onto the cokernel of the top operator, discards most
//! of the next layer. The remaining candidates are tested with the full
//! operator. Rank tests run modulo a large prime first: full rank mod p
//! implies full rank over Q, so only candidates that might have a kernel
//! reach the exact solver.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::field::VectorField;
use crate::linalg::{span_basis, RatMatrix};
use crate::modp;
use crate::poly::{Monomial, MonomialBasis, Poly};
use crate::rational::Rational;

use super::lattice::{add_scaled, sums, CofactorLattice, Layout};
use super::{cofactor_degree, search_darboux_fixed_cofactor, verify_darboux, DarbouxCert};

/// The solution space of `X f = K f` (non-constant part) for one cofactor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CofactorSpace {
    pub cofactor: Poly,
    pub basis: Vec<Poly>,
}

/// Candidate counts at each stage of [`solve_lattice`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub top_layers_tested: usize,
    pub top_layers_kept: usize,
    pub second_layers_tested: usize,
    pub second_layers_kept: usize,
    pub full_tests: usize,
    pub exact_solves: usize,
}

/// Homogeneous (or filtered) operator data `f ↦ X' f - K' f` between two
/// monomial bases, kept in sparse exact form and reduced mod p.
struct Operator {
    cols: MonomialBasis,
    rows: MonomialBasis,
    x_exact: Vec<Vec<(usize, Rational)>>,
    x_p: Option<Vec<Vec<(usize, u64)>>>,
    /// `mul[j][c]`: row of `kmonos[j] * cols[c]`.
    mul: Vec<Vec<usize>>,
}

impl Operator {
    fn new(x: &VectorField, kmonos: &[Monomial], cols: MonomialBasis, rows: MonomialBasis) -> Self {
        let vars = x.vars();
        let x_exact: Vec<Vec<(usize, Rational)>> = cols
            .monomials()
            .iter()
            .map(|m| {
                let img = x
                    .lie_derivative(&Poly::monomial(vars, m.clone(), Rational::one()))
                    .expect("same variables");
                img.terms()
                    .map(|(t, c)| (rows.position(t).expect("rows cover image"), c.clone()))
                    .collect()
            })
            .collect();
        let x_p = x_exact
            .iter()
            .map(|col| col.iter().map(|(i, c)| modp::reduce(c).map(|v| (*i, v))).collect())
            .collect();
        let mul = kmonos
            .iter()
            .map(|k| {
                cols.monomials()
                    .iter()
                    .map(|m| rows.position(&k.mul(m)).expect("rows cover products"))
                    .collect()
            })
            .collect();
        Operator {
            cols,
            rows,
            x_exact,
            x_p,
            mul,
        }
    }

    /// Dense matrix mod p; `k` lists `(index into kmonos, coefficient)`.
    fn matrix_p(&self, k: &[(usize, u64)], skip_col: Option<usize>) -> Option<(Vec<u64>, usize, usize)> {
        let x_p = self.x_p.as_ref()?;
        let cols: Vec<usize> = (0..self.cols.len()).filter(|&c| Some(c) != skip_col).collect();
        let (nr, nc) = (self.rows.len(), cols.len());
        let mut data = vec![0u64; nr * nc];
        for (jj, &c) in cols.iter().enumerate() {
            for &(i, v) in &x_p[c] {
                data[i * nc + jj] = v;
            }
            for &(j, kv) in k {
                let i = self.mul[j][c];
                data[i * nc + jj] = modp::sub(data[i * nc + jj], kv);
            }
        }
        Some((data, nr, nc))
    }

    fn matrix_exact(&self, k: &[(usize, Rational)]) -> RatMatrix {
        let mut m = RatMatrix::zeros(self.rows.len(), self.cols.len());
        for c in 0..self.cols.len() {
            for (i, v) in &self.x_exact[c] {
                m[(*i, c)] = v.clone();
            }
            for (j, kv) in k {
                let i = self.mul[*j][c];
                m[(i, c)] -= kv;
            }
        }
        m
    }
}

/// Projected second-layer data for one top layer and one degree `n`.
struct Projection {
    /// Dimension of the top kernel `V_n`.
    w: usize,
    /// Rows of the projected system; 0 means the test always passes.
    q: usize,
    e0: Vec<u64>,
    /// One `q x w` block per second-layer column of the layout.
    a: Vec<Vec<u64>>,
}

enum TopOutcome {
    Discard,
    /// Kept; `None` disables the second-layer test for this top layer.
    Keep(Option<Vec<Projection>>),
}

struct Engine<'a> {
    field: &'a VectorField,
    d: u32,
    kdeg: u32,
    layout: Layout,
    units_p: Option<Vec<u64>>,
    layers: Vec<VectorField>,
    full: Operator,
}

impl<'a> Engine<'a> {
    fn new(field: &'a VectorField, d: u32, lattice: &CofactorLattice) -> Self {
        let kdeg = cofactor_degree(field);
        let layout = Layout::new(field.vars(), lattice.generators(), kdeg);
        let units_p = layout.units.iter().map(modp::reduce).collect();
        let layers = (0..=field.degree())
            .map(|k| VectorField::new(field.vars(), field.layer(k)).expect("same variables"))
            .collect();
        let n = field.nvars();
        let full = Operator::new(
            field,
            layout.basis.monomials(),
            MonomialBasis::degrees(n, 0, d),
            MonomialBasis::degrees(n, 0, d + field.degree().saturating_sub(1).max(layout.top)),
        );
        Engine {
            field,
            d,
            kdeg,
            layout,
            units_p,
            layers,
            full,
        }
    }

    fn coef_p(&self, key: &[i64], cols: std::ops::Range<usize>, offset: usize) -> Option<Vec<(usize, u64)>> {
        let units = self.units_p.as_ref()?;
        let mut out = Vec::new();
        for j in cols {
            if key[j] != 0 {
                out.push((j - offset, modp::mul(modp::from_i64(key[j]), units[j])));
            }
        }
        Some(out)
    }

    fn coef_exact(&self, key: &[i64], cols: std::ops::Range<usize>, offset: usize) -> Vec<(usize, Rational)> {
        cols.filter(|&j| key[j] != 0)
            .map(|j| (j - offset, self.layout.coefficient(key, j)))
            .collect()
    }

    /// Top-layer test: does `X_D - K_top` have a kernel in some degree `1..=d`?
    fn test_top(&self, key: &[i64]) -> TopOutcome {
        let n_vars = self.field.nvars();
        let top = self.layout.layer(self.kdeg);
        let kmonos: Vec<Monomial> = self.layout.basis.monomials()[top.clone()].to_vec();
        let x_top = &self.layers[self.field.degree() as usize];
        let want_projection = self.kdeg >= 2;
        let mut projections = Some(Vec::new());
        let mut any = false;
        for n in 1..=self.d {
            let op = Operator::new(
                x_top,
                &kmonos,
                MonomialBasis::homogeneous(n_vars, n),
                MonomialBasis::homogeneous(n_vars, n + self.kdeg),
            );
            if let Some(kp) = self.coef_p(key, top.clone(), top.start) {
                if let Some((data, r, c)) = op.matrix_p(&kp, None) {
                    if modp::rank(data, r, c) == c {
                        continue;
                    }
                }
            }
            let kx = self.coef_exact(key, top.clone(), top.start);
            let kernel = op.matrix_exact(&kx).nullspace();
            if kernel.is_empty() {
                continue;
            }
            any = true;
            if want_projection {
                match self.projection(&kmonos, &kx, n, &op.cols, &kernel) {
                    Some(p) => {
                        if let Some(ps) = projections.as_mut() {
                            ps.push(p)
                        }
                    }
                    None => projections = None,
                }
            }
        }
        if !any {
            TopOutcome::Discard
        } else if want_projection {
            TopOutcome::Keep(projections)
        } else {
            TopOutcome::Keep(None)
        }
    }

    fn projection(
        &self,
        kmonos: &[Monomial],
        k_top: &[(usize, Rational)],
        n: u32,
        hom_n: &MonomialBasis,
        kernel: &[Vec<Rational>],
    ) -> Option<Projection> {
        let n_vars = self.field.nvars();
        let vars = self.field.vars();
        let x_top = &self.layers[self.field.degree() as usize];
        let x_next = &self.layers[self.field.degree() as usize - 1];
        let target = MonomialBasis::homogeneous(n_vars, n + self.kdeg - 1);
        let lower = Operator::new(x_top, kmonos, MonomialBasis::homogeneous(n_vars, n - 1), target.clone());
        let t = lower.matrix_exact(k_top);
        let proj = t.transpose().nullspace();
        let w = kernel.len();
        let q = proj.len();
        let apply = |p: &Poly| -> Vec<Rational> {
            let v = target.coords(p).expect("target covers image");
            proj.iter()
                .map(|row| {
                    row.iter()
                        .zip(&v)
                        .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                        .fold(Rational::zero(), |acc, (a, b)| acc + a * b)
                })
                .collect()
        };
        let to_p = |cols: Vec<Vec<Rational>>| -> Option<Vec<u64>> {
            let mut out = vec![0u64; q * w];
            for (i, col) in cols.iter().enumerate() {
                for (r, v) in col.iter().enumerate() {
                    out[r * w + i] = modp::reduce(v)?;
                }
            }
            Some(out)
        };
        let vs: Vec<Poly> = kernel.iter().map(|v| hom_n.poly(vars, v)).collect();
        let e0 = to_p(
            vs.iter()
                .map(|v| apply(&x_next.lie_derivative(v).expect("same variables")))
                .collect(),
        )?;
        let second = self.layout.layer(self.kdeg - 1);
        let mut a = Vec::new();
        for j in second {
            let m = Poly::monomial(vars, self.layout.basis.get(j).clone(), self.layout.units[j].clone());
            a.push(to_p(vs.iter().map(|v| apply(&(&m * v))).collect())?);
        }
        Some(Projection { w, q, e0, a })
    }

    fn test_second(&self, key: &[i64], projections: &[Projection]) -> bool {
        let second = self.layout.layer(self.kdeg - 1);
        projections.iter().any(|p| {
            if p.q == 0 {
                return true;
            }
            let mut m = p.e0.clone();
            for (jj, j) in second.clone().enumerate() {
                if key[j] == 0 {
                    continue;
                }
                let k = modp::from_i64(key[j]);
                for (dst, src) in m.iter_mut().zip(&p.a[jj]) {
                    if *src != 0 {
                        *dst = modp::sub(*dst, modp::mul(k, *src));
                    }
                }
            }
            modp::rank(m, p.q, p.w) < p.w
        })
    }

    fn test_full(&self, key: &[i64]) -> bool {
        let skip = key.iter().all(|&k| k == 0).then(|| self.full.cols.len() - 1);
        let Some(kp) = self.coef_p(key, 0..key.len(), 0) else {
            return true;
        };
        match self.full.matrix_p(&kp, skip) {
            Some((data, r, c)) => modp::rank(data, r, c) < c,
            None => true,
        }
    }

    fn exact_space(&self, key: &[i64]) -> CofactorSpace {
        let k = self.coef_exact(key, 0..key.len(), 0);
        let m = self.full.matrix_exact(&k);
        let kernel = m.nullspace();
        let basis = span_basis(&kernel, self.full.cols.len())
            .iter()
            .map(|v| self.full.cols.poly(self.field.vars(), v))
            .filter(|p| !p.is_constant())
            .collect();
        CofactorSpace {
            cofactor: self.layout.poly(self.field.vars(), key),
            basis,
        }
    }
}

/// Every lattice cofactor with a non-constant solution of degree `<= d`,
/// with its exact solution basis, in ascending lattice-key order.
pub fn solve_lattice(field: &VectorField, d: u32, lattice: &CofactorLattice) -> (Vec<CofactorSpace>, SearchStats) {
    let engine = Engine::new(field, d, lattice);
    let layout = &engine.layout;
    let kdeg = engine.kdeg;
    let len = layout.len();
    let mut stats = SearchStats::default();
    let mut groups: HashMap<u32, Vec<&Vec<i64>>> = HashMap::new();
    for g in &layout.gens {
        if let Some(l) = layout.top_layer(g) {
            groups.entry(l).or_default().push(g);
        }
    }
    let mut states: Vec<Vec<i64>> = vec![vec![0; len]];
    let mut tops: HashMap<Vec<i64>, Option<Vec<Projection>>> = HashMap::new();
    for l in (0..=layout.top).rev() {
        let group = groups.remove(&l).unwrap_or_default();
        let combos = sums(&group, lattice.bound(), len);
        let prefix_end = layout.layer(l).end;
        let mut memo: HashMap<Vec<i64>, bool> = HashMap::new();
        let mut seen: HashSet<Vec<i64>> = HashSet::new();
        let mut next = Vec::new();
        for s in &states {
            for c in &combos {
                let v = add_scaled(s, c, 1);
                let prefix = &v[..prefix_end];
                let keep = match memo.get(prefix) {
                    Some(&k) => k,
                    None => {
                        let k = if l > kdeg {
                            v[layout.layer(l)].iter().all(|&x| x == 0)
                        } else if l == 0 {
                            stats.full_tests += 1;
                            engine.test_full(&v)
                        } else if l == kdeg {
                            stats.top_layers_tested += 1;
                            match engine.test_top(&v) {
                                TopOutcome::Discard => false,
                                TopOutcome::Keep(p) => {
                                    stats.top_layers_kept += 1;
                                    tops.insert(prefix.to_vec(), p);
                                    true
                                }
                            }
                        } else if l + 1 == kdeg {
                            stats.second_layers_tested += 1;
                            let top_key = &v[..layout.layer(kdeg).end];
                            let k = match tops.get(top_key) {
                                Some(Some(p)) => engine.test_second(&v, p),
                                _ => true,
                            };
                            stats.second_layers_kept += k as usize;
                            k
                        } else {
                            true
                        };
                        memo.insert(prefix.to_vec(), k);
                        k
                    }
                };
                if keep && seen.insert(v.clone()) {
                    next.push(v);
                }
            }
        }
        states = next;
    }
    states.sort();
    stats.exact_solves = states.len();
    let spaces: Vec<CofactorSpace> = states
        .par_iter()
        .map(|key| engine.exact_space(key))
        .collect::<Vec<_>>()
        .into_iter()
        .filter(|s| !s.basis.is_empty())
        .collect();
    (spaces, stats)
}

/// Canonical order on polynomials over the same variables: by degree, then
/// term by term from the leading term down.
pub fn canonical_order(a: &Poly, b: &Poly) -> Ordering {
    a.degree().cmp(&b.degree()).then_with(|| {
        let mut ta = a.terms().rev();
        let mut tb = b.terms().rev();
        loop {
            match (ta.next(), tb.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some((ma, ca)), Some((mb, cb))) => {
                    let o = mb.cmp(ma).then_with(|| ca.cmp(cb));
                    if o != Ordering::Equal {
                        return o;
                    }
                }
            }
        }
    })
}

/// Drops certificates that are multiples of earlier ones.
///
/// Processed by increasing degree. A monomial is new only if it is a
/// single variable. Otherwise the monomial content is stripped and the
/// rest is new only if no certificate found so far divides it exactly
/// (a product of certificates divides it only if one factor does).
pub fn independent_certificates(field: &VectorField, spaces: &[CofactorSpace]) -> Vec<DarbouxCert> {
    let mut all: Vec<DarbouxCert> = spaces
        .iter()
        .flat_map(|s| {
            s.basis.iter().map(|f| DarbouxCert {
                f: f.clone(),
                cofactor: s.cofactor.clone(),
            })
        })
        .collect();
    all.sort_by(|a, b| canonical_order(&a.f, &b.f));
    let mut found: Vec<DarbouxCert> = Vec::new();
    for cert in all {
        if cert.f.num_terms() == 1 {
            let g = cert.f.monic();
            if g.degree() == 1 && !found.iter().any(|c| c.f == g) {
                found.push(verify_darboux(field, &g).expect("variable factor of a Darboux monomial"));
            }
            continue;
        }
        let content = cert.f.monomial_content();
        let g = cert.f.div_monomial(&content).monic();
        if found
            .iter()
            .any(|c| c.f.degree() <= g.degree() && g.exact_quotient(&c.f).is_some())
        {
            continue;
        }
        let new = if content.is_one() {
            DarbouxCert { f: g, ..cert }
        } else {
            verify_darboux(field, &g).expect("factor of a Darboux polynomial")
        };
        found.push(new);
    }
    found.sort_by(|a, b| canonical_order(&a.f, &b.f));
    found
}

/// Darboux polynomials of degree `<= d` whose cofactor lies in `lattice`,
/// with multiples of earlier certificates removed.
pub fn search_darboux(field: &VectorField, d: u32, lattice: &CofactorLattice) -> Vec<DarbouxCert> {
    let (spaces, _) = solve_lattice(field, d, lattice);
    independent_certificates(field, &spaces)
}

/// Bounded check for the two sources of a rational first integral.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObstructionReport {
    pub degree: u32,
    /// Non-constant polynomial first integrals of degree `<= degree`.
    pub polynomial_integrals: Vec<Poly>,
    /// Nonzero lattice cofactors shared by two independent polynomials.
    pub repeated_cofactors: Vec<CofactorSpace>,
}

impl ObstructionReport {
    /// True when neither source was found: no rational first integral of
    /// degree `<= degree` relative to the lattice.
    pub fn holds(&self) -> bool {
        self.polynomial_integrals.is_empty() && self.repeated_cofactors.is_empty()
    }
}

pub fn rational_obstruction(field: &VectorField, d: u32, lattice: &CofactorLattice) -> ObstructionReport {
    let zero = Poly::zero(field.vars());
    let polynomial_integrals = search_darboux_fixed_cofactor(field, &zero, d)
        .into_iter()
        .filter(|p| !p.is_constant())
        .collect();
    let (spaces, _) = solve_lattice(field, d, lattice);
    let repeated_cofactors = spaces
        .into_iter()
        .filter(|s| !s.cofactor.is_zero() && s.basis.len() >= 2)
        .collect();
    ObstructionReport {
        degree: d,
        polynomial_integrals,
        repeated_cofactors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{lotka_volterra_3, parse_field};
    use crate::rational::{int, rat};

    fn names(certs: &[DarbouxCert]) -> Vec<String> {
        certs.iter().map(|c| c.f.to_string()).collect()
    }

    #[test]
    fn restricted_y_plane_at_zero_a() {
        let x = lotka_volterra_3(int(0), int(3), int(2)).restrict_to_plane("y").unwrap();
        let lat = CofactorLattice::default_for(&x, 2);
        let certs = search_darboux(&x, 2, &lat);
        assert_eq!(names(&certs), vec!["x", "x + 1/2", "z"]);
    }

    #[test]
    fn restricted_z_plane() {
        let x = lotka_volterra_3(int(3), int(3), int(2)).restrict_to_plane("z").unwrap();
        let lat = CofactorLattice::default_for(&x, 3);
        assert_eq!(names(&search_darboux(&x, 3, &lat)), vec!["x", "y"]);
    }

    #[test]
    fn degree_two_reference_search() {
        let x = lotka_volterra_3(rat(29851, 10000), int(3), int(2));
        let lat = CofactorLattice::default_for(&x, 2);
        assert_eq!(names(&search_darboux(&x, 2, &lat)), vec!["x", "y", "z"]);
    }

    #[test]
    fn obstruction_examples() {
        let x = lotka_volterra_3(int(0), int(0), int(0));
        let r = rational_obstruction(&x, 1, &CofactorLattice::default_for(&x, 1));
        assert!(!r.holds());
        assert_eq!(
            r.polynomial_integrals.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
            vec!["z"]
        );

        let y = lotka_volterra_3(int(0), int(3), int(2)).restrict_to_plane("y").unwrap();
        let r = rational_obstruction(&y, 4, &CofactorLattice::default_for(&y, 4));
        assert!(r.polynomial_integrals.is_empty());
        let k = Poly::parse("6*x", y.vars()).unwrap();
        assert!(r.repeated_cofactors.iter().any(|s| s.cofactor == k));
    }

    #[test]
    fn linear_field_search() {
        let x = parse_field("vars: u v\ndu/dt = u\ndv/dt = 2*v\n").unwrap();
        let lat = CofactorLattice::default_for(&x, 2);
        let (spaces, _) = solve_lattice(&x, 2, &lat);
        let cofs: Vec<String> = spaces.iter().map(|s| s.cofactor.to_string()).collect();
        assert!(cofs.contains(&"1".to_string()) && cofs.contains(&"2".to_string()));
        assert_eq!(names(&search_darboux(&x, 2, &lat)), vec!["u", "v"]);
    }
}
