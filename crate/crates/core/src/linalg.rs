//! Dense exact linear algebra over the rationals.

use std::fmt;

use num_traits::{One, Zero};

use crate::rational::Rational;

/// Dense row-major matrix of rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            data: vec![Rational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    /// Builds from row vectors; all rows must have the same length.
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Self {
        let nrows = rows.len();
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        RatMatrix {
            rows: nrows,
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    /// Builds from column vectors; all columns must have the same length.
    pub fn from_columns(rows: usize, columns: &[Vec<Rational>]) -> Self {
        let mut m = RatMatrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length");
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = v.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, v: &[Rational]) -> Vec<Rational> {
        assert_eq!(v.len(), self.cols, "vector length");
        (0..self.rows)
            .map(|i| {
                let mut acc = Rational::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += a * b;
                    }
                }
                acc
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// In-place reduced row echelon form. Returns the pivot columns.
    ///
    /// Plain Gauss-Jordan: the pivot in each column is the first nonzero
    /// entry at or below the current row, so the result is deterministic.
    pub fn rref_in_place(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self[(i, c)].is_zero()) else {
                continue;
            };
            self.swap_rows(r, p);
            let inv = self[(r, c)].recip();
            for j in c..self.cols {
                let k = r * self.cols + j;
                if !self.data[k].is_zero() {
                    self.data[k] *= &inv;
                }
            }
            let pivot_row: Vec<(usize, Rational)> = (c..self.cols)
                .filter_map(|j| {
                    let v = &self[(r, j)];
                    (!v.is_zero()).then(|| (j, v.clone()))
                })
                .collect();
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let factor = self[(i, c)].clone();
                if factor.is_zero() {
                    continue;
                }
                for (j, v) in &pivot_row {
                    let k = i * self.cols + j;
                    self.data[k] -= &factor * v;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rref(&self) -> (RatMatrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Exact kernel basis, one vector per free column in increasing column
    /// order. Empty when the kernel is trivial.
    pub fn nullspace(&self) -> Vec<Vec<Rational>> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![None; self.cols];
        for (row, &c) in pivots.iter().enumerate() {
            is_pivot[c] = Some(row);
        }
        (0..self.cols)
            .filter(|&f| is_pivot[f].is_none())
            .map(|f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (row, &c) in pivots.iter().enumerate() {
                    v[c] = -r[(row, f)].clone();
                }
                v
            })
            .collect()
    }

    pub fn transpose(&self) -> RatMatrix {
        let mut t = RatMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }
}

impl std::ops::Index<(usize, usize)> for RatMatrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RatMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|q| q.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Reduced row echelon basis of the span of `vectors` (all the same length).
pub fn span_basis(vectors: &[Vec<Rational>], len: usize) -> Vec<Vec<Rational>> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let (r, pivots) = RatMatrix::from_rows(vectors.to_vec()).rref();
    debug_assert_eq!(r.cols(), len);
    (0..pivots.len()).map(|i| r.row(i).to_vec()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn m(rows: &[&[i64]]) -> RatMatrix {
        RatMatrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect())
    }

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn small_kernels() {
        assert_eq!(
            m(&[&[1, 1, 0], &[0, 0, 0]]).nullspace(),
            vec![v(&[-1, 1, 0]), v(&[0, 0, 1])]
        );
        assert!(RatMatrix::identity(3).nullspace().is_empty());
    }

    #[test]
    fn rref_is_idempotent() {
        let a = m(&[&[2, 4, -2], &[1, 3, 0], &[3, 7, -2]]);
        let (r, p) = a.rref();
        let (r2, p2) = r.rref();
        assert_eq!(r, r2);
        assert_eq!(p, p2);
        assert_eq!(a.rank(), 2);
    }

    #[test]
    fn kernel_vectors_annihilate() {
        let a = m(&[&[1, 2, 3, 4], &[2, 4, 6, 8], &[0, 1, 1, 0]]);
        let k = a.nullspace();
        assert_eq!(k.len() + a.rank(), 4);
        for vec in &k {
            assert!(a.mul_vec(vec).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn empty_shapes() {
        assert_eq!(RatMatrix::zeros(0, 3).nullspace().len(), 3);
        assert!(RatMatrix::zeros(2, 0).nullspace().is_empty());
    }
}
