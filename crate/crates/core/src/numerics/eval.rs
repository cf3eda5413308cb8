use crate::field::VectorField;
use crate::poly::Poly;
use crate::rational::to_f64;

#[derive(Clone, Copy, Debug, PartialEq)]
enum Op {
    Push(f64),
    /// Multiplies the top of the stack by `x_i^e`.
    MulPow(usize, i32),
    Add,
}

/// A polynomial compiled to a flat Horner-by-variable program.
///
/// `p = Σ_k x_0^k p_k(x_1, ...)` is evaluated as nested Horner steps in
/// `x_0`, each coefficient recursively in the remaining variables. A
/// polynomial divisible by `x_i` therefore evaluates to an exact zero when
/// `x_i = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledPoly {
    ops: Vec<Op>,
    depth: usize,
}

impl CompiledPoly {
    pub fn new(p: &Poly) -> Self {
        let terms: Vec<(Vec<u32>, f64)> = p.terms().map(|(m, c)| (m.exponents().to_vec(), to_f64(c))).collect();
        let mut ops = Vec::new();
        if terms.is_empty() {
            ops.push(Op::Push(0.0));
        } else {
            emit(&terms, 0, p.nvars(), &mut ops);
        }
        let mut depth = 0usize;
        let mut max = 0usize;
        for op in &ops {
            match op {
                Op::Push(_) => {
                    depth += 1;
                    max = max.max(depth);
                }
                Op::Add => depth -= 1,
                Op::MulPow(..) => {}
            }
        }
        CompiledPoly { ops, depth: max }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut buf = [0.0f64; 32];
        if self.depth <= buf.len() {
            run(&self.ops, x, &mut buf)
        } else {
            run(&self.ops, x, &mut vec![0.0; self.depth])
        }
    }
}

fn run(ops: &[Op], x: &[f64], stack: &mut [f64]) -> f64 {
    let mut sp = 0usize;
    for op in ops {
        match *op {
            Op::Push(c) => {
                stack[sp] = c;
                sp += 1;
            }
            Op::MulPow(i, e) => {
                let v = x[i];
                stack[sp - 1] *= if e == 1 { v } else { v.powi(e) };
            }
            Op::Add => {
                sp -= 1;
                stack[sp - 1] += stack[sp];
            }
        }
    }
    stack[0]
}

/// Emits Horner code for `terms` (all nonzero) in variables `v..n`.
fn emit(terms: &[(Vec<u32>, f64)], v: usize, n: usize, ops: &mut Vec<Op>) {
    if v == n {
        let c: f64 = terms.iter().map(|t| t.1).sum();
        ops.push(Op::Push(c));
        return;
    }
    let mut powers: Vec<u32> = terms.iter().map(|t| t.0[v]).collect();
    powers.sort_unstable_by(|a, b| b.cmp(a));
    powers.dedup();
    let mut prev: Option<u32> = None;
    for k in powers {
        let group: Vec<(Vec<u32>, f64)> = terms.iter().filter(|t| t.0[v] == k).cloned().collect();
        if let Some(p) = prev {
            ops.push(Op::MulPow(v, (p - k) as i32));
            emit(&group, v + 1, n, ops);
            ops.push(Op::Add);
        } else {
            emit(&group, v + 1, n, ops);
        }
        prev = Some(k);
    }
    if let Some(p) = prev {
        if p > 0 {
            ops.push(Op::MulPow(v, p as i32));
        }
    }
}

/// Right-hand side and analytic Jacobian of a field, compiled for `f64`.
#[derive(Clone, Debug)]
pub struct CompiledField {
    rhs: Vec<CompiledPoly>,
    jac: Vec<Vec<CompiledPoly>>,
}

impl CompiledField {
    pub fn new(field: &VectorField) -> Self {
        let n = field.nvars();
        let rhs = field.components().iter().map(CompiledPoly::new).collect();
        let jac = field
            .components()
            .iter()
            .map(|p| (0..n).map(|j| CompiledPoly::new(&p.partial(j))).collect())
            .collect();
        CompiledField { rhs, jac }
    }

    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn rhs(&self, x: &[f64], out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.rhs) {
            *o = p.eval(x);
        }
    }

    /// Row-major `n x n` Jacobian `∂P_i/∂x_j`.
    pub fn jacobian(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.jac[i][j].eval(x);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::lotka_volterra_3;
    use crate::poly::vars;
    use crate::rational::{int, rat};

    fn direct_eval(p: &Poly, x: &[f64]) -> f64 {
        p.terms()
            .map(|(m, c)| {
                let v: f64 = m.exponents().iter().zip(x).map(|(&e, v)| v.powi(e as i32)).product();
                to_f64(c) * v
            })
            .sum()
    }

    #[test]
    fn matches_direct_evaluation() {
        let v = vars(&["x", "y", "z"]);
        let p = Poly::parse("3*x^2*z - x*y + 1/2*y^3 - 7 + z", &v).unwrap();
        let c = CompiledPoly::new(&p);
        for pt in [[0.3, -1.2, 2.0], [1.0, 1.0, 1.0], [-2.5, 0.0, 0.75]] {
            assert!((c.eval(&pt) - direct_eval(&p, &pt)).abs() < 1e-12);
        }
        assert_eq!(CompiledPoly::new(&Poly::zero(&v)).eval(&[1.0, 2.0, 3.0]), 0.0);
    }

    #[test]
    fn invariant_planes_evaluate_to_exact_zero() {
        let x = lotka_volterra_3(rat(29851, 10000), int(3), int(2));
        let f = CompiledField::new(&x);
        let mut out = [1.0; 3];
        f.rhs(&[0.0, 0.7, 1.9], &mut out);
        assert_eq!(out[0], 0.0);
        f.rhs(&[0.4, 0.0, 1.9], &mut out);
        assert_eq!(out[1], 0.0);
    }
}
