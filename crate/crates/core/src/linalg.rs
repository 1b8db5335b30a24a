//! Dense exact matrices: determinants, minors, rank, null spaces, Pfaffians.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalars::Scalar;

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Scalar::zero(); rows * cols],
            row_labels: (0..rows).map(|i| format!("r{i}")).collect(),
            col_labels: (0..cols).map(|j| format!("c{j}")).collect(),
        }
    }

    pub fn labeled(row_labels: Vec<String>, col_labels: Vec<String>) -> Self {
        let mut m = Self::zeros(row_labels.len(), col_labels.len());
        m.row_labels = row_labels;
        m.col_labels = col_labels;
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        let mut m = Self::zeros(r, c);
        m.data = rows.into_iter().flatten().collect();
        Ok(m)
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Scalar::from_integer(v.into())).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.data[i * self.cols + j] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: &Scalar) {
        self.data[i * self.cols + j] += v;
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::labeled(self.col_labels.clone(), self.row_labels.clone());
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::labeled(self.row_labels.clone(), other.col_labels.clone());
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.add_to(i, j, &(a * b));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn scale_row(&mut self, i: usize, c: &Scalar) {
        for j in 0..self.cols {
            let v = self.get(i, j) * c;
            self.set(i, j, v);
        }
    }

    pub fn scale_col(&mut self, j: usize, c: &Scalar) {
        for i in 0..self.rows {
            let v = self.get(i, j) * c;
            self.set(i, j, v);
        }
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        if rows.iter().any(|&i| i >= self.rows) || cols.iter().any(|&j| j >= self.cols) {
            return Err(Error::Dimension("index out of range".into()));
        }
        let mut m = Self::labeled(
            rows.iter().map(|&i| self.row_labels[i].clone()).collect(),
            cols.iter().map(|&j| self.col_labels[j].clone()).collect(),
        );
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                m.set(a, b, self.get(i, j).clone());
            }
        }
        Ok(m)
    }

    pub fn det(&self) -> Result<Scalar> {
        if self.rows != self.cols {
            return Err(Error::Dimension(format!(
                "determinant of a {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let (mut rows, scale) = integer_rows(self);
        let n = self.rows;
        let mut sign = false;
        let mut prev = BigInt::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !rows[i][k].is_zero()) else {
                return Ok(Scalar::zero());
            };
            if p != k {
                rows.swap(p, k);
                sign = !sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &rows[i][j] * &rows[k][k] - &rows[i][k] * &rows[k][j];
                    rows[i][j] = v / &prev;
                }
                rows[i][k] = BigInt::zero();
            }
            prev = rows[k][k].clone();
        }
        let d = if n == 0 { BigInt::one() } else { prev };
        let d = Scalar::new(d, scale);
        Ok(if sign { -d } else { d })
    }

    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> Result<Scalar> {
        if rows.len() != cols.len() {
            return Err(Error::Dimension("minor needs as many rows as columns".into()));
        }
        self.submatrix(rows, cols)?.det()
    }

    pub fn rank(&self) -> usize {
        self.independent_rows().len()
    }

    /// Greedy maximal independent set of rows, scanning top to bottom.
    pub fn independent_rows(&self) -> Vec<usize> {
        let mut basis = Echelon::new(self.cols);
        (0..self.rows)
            .filter(|&i| basis.insert(self.row(i).to_vec()))
            .collect()
    }

    /// Greedy maximal independent set of columns, scanning left to right.
    pub fn independent_cols(&self) -> Vec<usize> {
        self.transpose().independent_rows()
    }

    /// Basis of `{x : self · x = 0}`.
    pub fn null_space(&self) -> Vec<Vec<Scalar>> {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|j| !pivots.contains(j)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Scalar::zero(); self.cols];
                v[f] = Scalar::one();
                for (k, &p) in pivots.iter().enumerate() {
                    v[p] = -r.get(k, f).clone();
                }
                v
            })
            .collect()
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(p) = (row..m.rows).find(|&i| !m.get(i, col).is_zero()) else {
                continue;
            };
            for j in 0..m.cols {
                m.data.swap(p * m.cols + j, row * m.cols + j);
            }
            let inv = m.get(row, col).recip();
            m.scale_row(row, &inv);
            for i in 0..m.rows {
                if i != row && !m.get(i, col).is_zero() {
                    let c = m.get(i, col).clone();
                    for j in col..m.cols {
                        let v = m.get(i, j) - &c * m.get(row, j);
                        m.set(i, j, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(ToString::to_string).collect();
            writeln!(f, "  {}: [{}]", self.row_labels[i], row.join(", "))?;
        }
        Ok(())
    }
}

/// Rows scaled to integers; returns the rows and the product of the scales.
fn integer_rows(m: &Matrix) -> (Vec<Vec<BigInt>>, BigInt) {
    let mut total = BigInt::one();
    let rows = (0..m.rows)
        .map(|i| {
            let l = m
                .row(i)
                .iter()
                .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            total *= &l;
            m.row(i)
                .iter()
                .map(|v| v.numer() * (&l / v.denom()))
                .collect()
        })
        .collect();
    (rows, total)
}

/// Incrementally built row echelon basis.
struct Echelon {
    rows: Vec<(usize, Vec<Scalar>)>,
    width: usize,
}

impl Echelon {
    fn new(width: usize) -> Self {
        Self { rows: Vec::new(), width }
    }

    /// Adds `v` if it is independent of the rows so far.
    fn insert(&mut self, mut v: Vec<Scalar>) -> bool {
        debug_assert_eq!(v.len(), self.width);
        for (p, r) in &self.rows {
            if !v[*p].is_zero() {
                let c = v[*p].clone();
                for j in *p..self.width {
                    if !r[j].is_zero() {
                        v[j] -= &c * &r[j];
                    }
                }
            }
        }
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[p].recip();
        for x in v.iter_mut().skip(p) {
            *x *= &inv;
        }
        self.rows.push((p, v));
        true
    }
}

/// Antisymmetric square matrix with zero diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkewMatrix(Matrix);

impl SkewMatrix {
    pub fn zeros(n: usize) -> Self {
        Self(Matrix::zeros(n, n))
    }

    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(Error::Dimension("skew matrix must be square".into()));
        }
        for i in 0..m.rows {
            for j in i..m.cols {
                if *m.get(i, j) != -m.get(j, i).clone() {
                    return Err(Error::NotSkew);
                }
            }
        }
        Ok(Self(m))
    }

    pub fn size(&self) -> usize {
        self.0.rows
    }

    /// Adds `v` at `(i, j)` and `-v` at `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: &Scalar) {
        assert_ne!(i, j, "diagonal of a skew matrix is zero");
        self.0.add_to(i, j, v);
        self.0.add_to(j, i, &-v.clone());
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        self.0.get(i, j)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn principal(&self, idx: &[usize]) -> Self {
        Self(self.0.submatrix(idx, idx).expect("indices in range"))
    }

    pub fn pfaffian(&self) -> Scalar {
        pfaffian_of(&self.0)
    }
}

/// Pfaffian of a skew-symmetric matrix.
pub fn pfaffian(m: &Matrix) -> Result<Scalar> {
    Ok(SkewMatrix::new(m.clone())?.pfaffian())
}

fn pfaffian_of(m: &Matrix) -> Scalar {
    let n = m.rows;
    if n % 2 == 1 {
        return Scalar::zero();
    }
    let mut a: Vec<Vec<Scalar>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut result = Scalar::one();
    let mut k = 0;
    while k < n {
        let Some(p) = (k + 1..n).find(|&j| !a[k][j].is_zero()) else {
            return Scalar::zero();
        };
        if p != k + 1 {
            a.swap(k + 1, p);
            for row in a.iter_mut() {
                row.swap(k + 1, p);
            }
            result = -result;
        }
        let piv = a[k][k + 1].clone();
        result *= &piv;
        for i in k + 2..n {
            // clear a[k][i] using column k+1, then a[k+1][i] using column k
            let c = &a[k][i] / &piv;
            if !c.is_zero() {
                for row in a.iter_mut() {
                    let v = &c * &row[k + 1];
                    row[i] -= v;
                }
                let pr = a[k + 1].clone();
                for (x, y) in a[i].iter_mut().zip(pr) {
                    *x -= &c * y;
                }
            }
            let c = -(&a[k + 1][i] / &piv);
            if !c.is_zero() {
                for row in a.iter_mut() {
                    let v = &c * &row[k];
                    row[i] -= v;
                }
                let pr = a[k].clone();
                for (x, y) in a[i].iter_mut().zip(pr) {
                    *x -= &c * y;
                }
            }
        }
        k += 2;
    }
    result
}
