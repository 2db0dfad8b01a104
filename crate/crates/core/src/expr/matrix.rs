//! Dense matrix of exact rationals.

use num_traits::{One, Zero};

use crate::rat::Rat;

/// Rectangular dense matrix over `Rat`. Row-major storage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RationalMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RationalMatrix {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RationalMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let cols = rows.first().map(|r| r.len()).unwrap_or(0);
        Self::from_rows_with_width(rows, cols)
    }

    /// Builds from rows with an explicit width so that a 0-row matrix
    /// still knows its column count.
    pub fn from_rows_with_width(rows: Vec<Vec<Rat>>, cols: usize) -> Self {
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend(r);
        }
        RationalMatrix {
            rows: nrows,
            cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &Rat {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Rat) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Rat] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> RationalMatrix {
        let mut t = RationalMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.at(r, c).clone());
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|r| crate::rat::dot(self.row(r), v))
            .collect()
    }

    /// v^T A, i.e. the vector of column inner products.
    pub fn vec_mul(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.rows, "dimension mismatch");
        (0..self.cols)
            .map(|c| {
                (0..self.rows)
                    .map(|r| self.at(r, c) * &v[r])
                    .sum()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    #[test]
    fn transpose_and_products() {
        let m = RationalMatrix::from_rows(vec![
            vec![rat(1), rat(2)],
            vec![rat(3), rat(4)],
            vec![rat(5), rat(6)],
        ]);
        let t = m.transpose();
        assert_eq!(t.rows(), 2);
        assert_eq!(*t.at(0, 2), rat(5));
        assert_eq!(m.mul_vec(&[rat(1), rat(1)]), vec![rat(3), rat(7), rat(11)]);
        assert_eq!(
            m.vec_mul(&[rat(1), rat(0), rat(1)]),
            vec![rat(6), rat(8)]
        );
    }
}
