//! Dense matrices over a [`FieldSpec`] with exact Gaussian elimination.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{FieldSpec, Scalar};

/// Row-major dense matrix; all entries share `field`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    field: FieldSpec,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(field: FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            field,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    /// Builds from explicit rows; every row must have the same length and
    /// every entry must belong to `field`.
    pub fn from_rows(field: FieldSpec, rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::ShapeMismatch(format!(
                    "ragged rows: expected {cols} columns, got {}",
                    row.len()
                )));
            }
            for s in row {
                if s.field() != field {
                    return Err(Error::FieldMismatch(field.to_string(), s.field().to_string()));
                }
                data.push(s);
            }
        }
        Ok(Matrix {
            rows: nrows,
            cols,
            field,
            data,
        })
    }

    pub fn from_i64(field: FieldSpec, rows: &[Vec<i64>]) -> Self {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&v| field.from_i64(v)).collect())
            .collect();
        Self::from_rows(field, rows).expect("rectangular integer grid")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn get(&self, r: usize, c: usize) -> &Scalar {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Scalar> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<Scalar>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.field, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c).clone());
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Matrix::zeros(self.field, self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..rhs.cols {
                    let b = rhs.get(k, c);
                    if !b.is_zero() {
                        let idx = r * out.cols + c;
                        out.data[idx] += &(a * b);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Result<Vec<Scalar>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "vector of length {} against {} columns",
                v.len(),
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|r| {
                let mut acc = self.field.zero();
                for (a, b) in self.row(r).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc += &(a * b);
                    }
                }
                acc
            })
            .collect())
    }

    /// Submatrix on the given row and column positions (0-based, in order).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        let mut out = Matrix::zeros(self.field, rows.len(), cols.len());
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                out.set(i, j, self.get(r, c).clone());
            }
        }
        out
    }

    /// Reduced row echelon form and the pivot columns. Pivots are taken as the
    /// first nonzero entry in column order.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(pr) = (row..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                continue;
            };
            m.swap_rows(row, pr);
            let inv = m.get(row, col).inv().expect("nonzero pivot");
            for c in col..m.cols {
                let v = m.get(row, c) * &inv;
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r == row || m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col).clone();
                for c in col..m.cols {
                    let sub = &factor * m.get(row, c);
                    if !sub.is_zero() {
                        let idx = r * m.cols + c;
                        m.data[idx] -= &sub;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    /// Determinant of a square matrix by elimination.
    pub fn determinant(&self) -> Result<Scalar> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch(format!(
                "determinant of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let mut m = self.clone();
        let mut det = self.field.one();
        for col in 0..m.cols {
            let Some(pr) = (col..m.rows).find(|&r| !m.get(r, col).is_zero()) else {
                return Ok(self.field.zero());
            };
            if pr != col {
                m.swap_rows(col, pr);
                det = -det;
            }
            let pivot = m.get(col, col).clone();
            det = &det * &pivot;
            let inv = pivot.inv().expect("nonzero pivot");
            for r in col + 1..m.rows {
                if m.get(r, col).is_zero() {
                    continue;
                }
                let factor = m.get(r, col) * &inv;
                for c in col..m.cols {
                    let sub = &factor * m.get(col, c);
                    if !sub.is_zero() {
                        let idx = r * m.cols + c;
                        m.data[idx] -= &sub;
                    }
                }
            }
        }
        Ok(det)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(ToString::to_string).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

pub fn mat_rank(m: &Matrix) -> usize {
    m.rref().1.len()
}

/// Canonical kernel basis read off the reduced echelon form: one vector per
/// free column, with a 1 in that column.
pub fn kernel_basis(m: &Matrix) -> Vec<Vec<Scalar>> {
    let (r, pivots) = m.rref();
    let field = m.field();
    let mut is_pivot = vec![false; m.cols()];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..m.cols())
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![field.zero(); m.cols()];
            v[free] = field.one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r.get(row, free);
            }
            v
        })
        .collect()
}

/// Rank of a list of vectors stacked as rows.
pub fn rank_of_vectors(field: FieldSpec, vectors: &[Vec<Scalar>], dim: usize) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let m = Matrix::from_rows(field, vectors.to_vec()).expect("vectors share length");
    debug_assert_eq!(m.cols(), dim);
    mat_rank(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q() -> FieldSpec {
        FieldSpec::Rational
    }

    #[test]
    fn rank_examples() {
        assert_eq!(mat_rank(&Matrix::identity(q(), 4)), 4);
        assert_eq!(mat_rank(&Matrix::zeros(q(), 3, 5)), 0);
        assert_eq!(mat_rank(&Matrix::from_i64(q(), &[vec![1, 2], vec![2, 4]])), 1);
    }

    #[test]
    fn kernel_examples() {
        assert!(kernel_basis(&Matrix::identity(q(), 3)).is_empty());

        let k = kernel_basis(&Matrix::zeros(q(), 2, 3));
        assert_eq!(k.len(), 3);
        for (i, v) in k.iter().enumerate() {
            for (j, s) in v.iter().enumerate() {
                assert_eq!(s.is_one(), i == j);
            }
        }

        let m = Matrix::from_i64(q(), &[vec![1, 1, 0]]);
        let k = kernel_basis(&m);
        let f = q();
        assert_eq!(
            k,
            vec![
                vec![f.from_i64(-1), f.from_i64(1), f.from_i64(0)],
                vec![f.from_i64(0), f.from_i64(0), f.from_i64(1)],
            ]
        );
        for v in &k {
            assert!(m.mul_vec(v).unwrap().iter().all(Scalar::is_zero));
        }
        assert_eq!(k.len(), 3 - mat_rank(&m));
    }

    #[test]
    fn determinant_matches_cofactor() {
        let m = Matrix::from_i64(q(), &[vec![2, 0, 1], vec![1, 3, 2], vec![1, 1, 1]]);
        // 2(3-2) - 0 + 1(1-3) = 0
        assert!(m.determinant().unwrap().is_zero());
        let m = Matrix::from_i64(q(), &[vec![0, 1], vec![1, 0]]);
        assert_eq!(m.determinant().unwrap(), q().from_i64(-1));
    }

    fn small_matrix() -> impl Strategy<Value = (usize, usize, Vec<i64>)> {
        (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            (Just(r), Just(c), proptest::collection::vec(-2i64..=2, r * c))
        })
    }

    proptest! {
        #[test]
        fn rank_nullity((r, c, vals) in small_matrix(), prime in proptest::bool::ANY) {
            let field = if prime { FieldSpec::prime(7).unwrap() } else { q() };
            let rows: Vec<Vec<i64>> = vals.chunks(c).map(<[i64]>::to_vec).collect();
            let m = Matrix::from_i64(field, &rows);
            let k = kernel_basis(&m);
            prop_assert_eq!(mat_rank(&m) + k.len(), c);
            for v in &k {
                prop_assert!(m.mul_vec(v).unwrap().iter().all(Scalar::is_zero));
            }
            prop_assert_eq!(r, m.rows());
        }
    }
}
