//! Dense linear algebra over [`Scalar`]: symmetric storage, products,
//! eigendecomposition and spectral functional calculus.
//!
//! Products are parallel over output rows with a fixed summation order, so
//! results are bit-identical for any thread count.

mod eigen;

pub use eigen::{spectral_apply, sym_eigen, EigenDecomp};

use rayon::prelude::*;
use rug::Float;
use thiserror::Error;

use crate::highprec::{HighPrecError, Scalar};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("tridiagonal QR did not converge after {sweeps} sweeps (largest off-diagonal {residual})")]
    NonConvergence { sweeps: usize, residual: String },
    #[error("spectral function undefined at eigenvalue #{index} = {value}: {source}")]
    SpectralDomain {
        index: usize,
        value: String,
        #[source]
        source: HighPrecError,
    },
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Scalar>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize, bits: u32) -> Self {
        Self {
            rows,
            cols,
            data: vec![Float::new(bits); rows * cols],
        }
    }

    pub fn identity(n: usize, bits: u32) -> Self {
        let mut m = Self::zeros(n, n, bits);
        for i in 0..n {
            m.data[i * n + i] = Float::with_val(bits, 1);
        }
        m
    }

    pub fn from_fn<F>(rows: usize, cols: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> Scalar,
    {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.data[i * self.cols + j]
    }

    pub fn get_mut(&mut self, i: usize, j: usize) -> &mut Scalar {
        &mut self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[Scalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Scalar] {
        &mut self.data
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn max_abs(&self) -> Scalar {
        max_abs(&self.data)
    }

    /// Largest `|a_ij − a_ji|`.
    pub fn skew_residual(&self) -> Scalar {
        assert_eq!(self.rows, self.cols);
        let bits = self.data.first().map_or(64, Float::prec);
        let mut worst = Float::new(bits);
        for i in 0..self.rows {
            for j in 0..i {
                let d = Float::with_val(bits, self.get(i, j) - self.get(j, i)).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// `(A + Aᵀ)/2` in packed symmetric form.
    pub fn symmetrize(&self) -> SymMatrix {
        assert_eq!(self.rows, self.cols);
        let bits = self.data.first().map_or(64, Float::prec);
        SymMatrix::from_fn(self.rows, bits, |i, j| {
            if i == j {
                self.get(i, i).clone()
            } else {
                Float::with_val(bits, self.get(i, j) + self.get(j, i)) / 2u32
            }
        })
    }

    /// Multiplies every entry by `factor`.
    pub fn scale(&mut self, factor: &Scalar) {
        for x in &mut self.data {
            *x *= factor;
        }
    }
}

/// Dense symmetric matrix storing its lower triangle, so `m[i][j] = m[j][i]`
/// holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    bits: u32,
    packed: Vec<Scalar>,
}

fn packed_index(i: usize, j: usize) -> usize {
    let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
    hi * (hi + 1) / 2 + lo
}

impl SymMatrix {
    /// Builds from `f(i, j)` evaluated for `j <= i` only.
    pub fn from_fn<F>(dim: usize, bits: u32, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> Scalar,
    {
        assert!(dim >= 1, "matrix dimension must be positive");
        let mut packed = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in 0..=i {
                packed.push(Float::with_val(bits, f(i, j)));
            }
        }
        Self { dim, bits, packed }
    }

    /// Parallel variant of [`from_fn`](Self::from_fn); `f` must be pure.
    pub fn par_from_fn<F>(dim: usize, bits: u32, f: F) -> Self
    where
        F: Fn(usize, usize) -> Scalar + Sync,
    {
        assert!(dim >= 1, "matrix dimension must be positive");
        let rows: Vec<Vec<Scalar>> = (0..dim)
            .into_par_iter()
            .map(|i| (0..=i).map(|j| Float::with_val(bits, f(i, j))).collect())
            .collect();
        Self {
            dim,
            bits,
            packed: rows.into_iter().flatten().collect(),
        }
    }

    /// Fallible variant of [`par_from_fn`](Self::par_from_fn).
    pub fn try_par_from_fn<F, E>(dim: usize, bits: u32, f: F) -> Result<Self, E>
    where
        F: Fn(usize, usize) -> Result<Scalar, E> + Sync,
        E: Send,
    {
        assert!(dim >= 1, "matrix dimension must be positive");
        let rows: Vec<Vec<Scalar>> = (0..dim)
            .into_par_iter()
            .map(|i| (0..=i).map(|j| f(i, j).map(|v| Float::with_val(bits, v))).collect())
            .collect::<Result<_, E>>()?;
        Ok(Self {
            dim,
            bits,
            packed: rows.into_iter().flatten().collect(),
        })
    }

    pub fn identity(dim: usize, bits: u32) -> Self {
        Self::from_fn(dim, bits, |i, j| Float::with_val(bits, u32::from(i == j)))
    }

    pub fn diagonal(values: &[Scalar]) -> Self {
        let bits = values.first().map_or(64, Float::prec);
        Self::from_fn(values.len(), bits, |i, j| {
            if i == j {
                values[i].clone()
            } else {
                Float::new(bits)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Binary precision of the stored entries.
    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn get(&self, i: usize, j: usize) -> &Scalar {
        &self.packed[packed_index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: Scalar) {
        self.packed[packed_index(i, j)] = Float::with_val(self.bits, value);
    }

    pub fn to_dense(&self) -> Matrix {
        Matrix::from_fn(self.dim, self.dim, |i, j| self.get(i, j).clone())
    }

    pub fn max_abs(&self) -> Scalar {
        max_abs(&self.packed)
    }

    pub fn trace(&self) -> Scalar {
        let mut t = Float::new(self.bits);
        for i in 0..self.dim {
            t += self.get(i, i);
        }
        t
    }

    /// `P M Pᵀ` for the permutation sending index `i` to `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> SymMatrix {
        assert_eq!(perm.len(), self.dim);
        let mut inverse = vec![0; self.dim];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        SymMatrix::from_fn(self.dim, self.bits, |i, j| {
            self.get(inverse[i], inverse[j]).clone()
        })
    }

    /// Entries in row-major order of the lower triangle.
    pub fn packed(&self) -> &[Scalar] {
        &self.packed
    }

    pub fn from_packed(dim: usize, bits: u32, packed: Vec<Scalar>) -> Option<Self> {
        (packed.len() == dim * (dim + 1) / 2 && dim >= 1).then_some(Self { dim, bits, packed })
    }
}

fn max_abs(values: &[Scalar]) -> Scalar {
    let bits = values.first().map_or(64, Float::prec);
    let mut worst = Float::new(bits);
    for v in values {
        if v.as_abs().cmp_abs(&worst) == Some(std::cmp::Ordering::Greater) {
            worst = Float::with_val(bits, v.abs_ref());
        }
    }
    worst
}

fn dot(a: &[Scalar], b: &[Scalar], bits: u32) -> Scalar {
    let mut acc = Float::new(bits);
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

/// Dense product `A·B`.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix, LinalgError> {
    if a.cols != b.rows {
        return Err(LinalgError::DimensionMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    let bits = a
        .data
        .first()
        .map_or(64, Float::prec)
        .max(b.data.first().map_or(64, Float::prec));
    let cols = b.cols;
    let rows: Vec<Vec<Scalar>> = (0..a.rows)
        .into_par_iter()
        .map(|i| {
            let mut out = vec![Float::new(bits); cols];
            for (k, aik) in a.row(i).iter().enumerate() {
                if aik.is_zero() {
                    continue;
                }
                for (o, bkj) in out.iter_mut().zip(b.row(k)) {
                    *o += aik * bkj;
                }
            }
            out
        })
        .collect();
    Ok(Matrix {
        rows: a.rows,
        cols,
        data: rows.into_iter().flatten().collect(),
    })
}

/// Lower triangle of `A·Bᵀ`, for products known to be symmetric. Each entry
/// is the dot product of row `i` of `A` with row `j` of `B`.
pub fn mul_transpose_symmetric(a: &Matrix, b: &Matrix) -> Result<SymMatrix, LinalgError> {
    if a.cols != b.cols || a.rows != b.rows || a.rows != a.cols {
        return Err(LinalgError::DimensionMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    let bits = a
        .data
        .first()
        .map_or(64, Float::prec)
        .max(b.data.first().map_or(64, Float::prec));
    Ok(SymMatrix::par_from_fn(a.rows, bits, |i, j| {
        dot(a.row(i), b.row(j), bits)
    }))
}

/// Largest absolute entry of `A − B`.
pub fn residual_max_abs(a: &Matrix, b: &Matrix) -> Result<Scalar, LinalgError> {
    if a.shape() != b.shape() {
        return Err(LinalgError::DimensionMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    let bits = a.data.first().map_or(64, Float::prec);
    let mut worst = Float::new(bits);
    for (x, y) in a.data.iter().zip(&b.data) {
        let d = Float::with_val(bits, x - y).abs();
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

/// `‖A·B − I‖_max` for square `A`, `B`.
pub fn inverse_residual(a: &Matrix, b: &Matrix) -> Result<Scalar, LinalgError> {
    let product = matmul(a, b)?;
    let bits = product.data.first().map_or(64, Float::prec);
    residual_max_abs(&product, &Matrix::identity(product.rows, bits))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i32]]) -> Matrix {
        Matrix::from_fn(rows.len(), rows[0].len(), |i, j| Float::with_val(128, rows[i][j]))
    }

    #[test]
    fn identity_product() {
        let a = m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]]);
        let id = Matrix::identity(3, 128);
        assert_eq!(matmul(&id, &a).unwrap(), a);
        assert!(residual_max_abs(&a, &a).unwrap().is_zero());
    }

    #[test]
    fn product_values() {
        let a = m(&[&[1, 2], &[3, 4]]);
        let b = m(&[&[0, 1], &[1, 0]]);
        assert_eq!(matmul(&a, &b).unwrap(), m(&[&[2, 1], &[4, 3]]));
    }

    #[test]
    fn dimension_mismatch() {
        let a = Matrix::zeros(2, 3, 64);
        let b = Matrix::zeros(2, 3, 64);
        assert!(matches!(
            matmul(&a, &b),
            Err(LinalgError::DimensionMismatch { .. })
        ));
        assert!(residual_max_abs(&a, &Matrix::zeros(3, 2, 64)).is_err());
    }

    #[test]
    fn symmetric_storage() {
        let s = SymMatrix::from_fn(3, 64, |i, j| Float::with_val(64, 10 * i + j));
        assert_eq!(s.get(0, 2), s.get(2, 0));
        assert_eq!(*s.get(2, 1), 21);
        let d = s.to_dense();
        assert!(d.skew_residual().is_zero());
        assert_eq!(d.symmetrize(), s);
    }

    #[test]
    fn permutation_relabels() {
        let s = SymMatrix::from_fn(3, 64, |i, j| Float::with_val(64, 10 * i + j));
        let p = s.permuted(&[2, 0, 1]);
        // old index 0 -> new 2, old 2 -> new 1
        assert_eq!(p.get(2, 2), s.get(0, 0));
        assert_eq!(p.get(1, 2), s.get(2, 0));
    }

    #[test]
    fn symmetric_product_matches_dense() {
        let a = m(&[&[2, 1], &[1, 3]]);
        let full = matmul(&a, &a).unwrap();
        let half = mul_transpose_symmetric(&a, &a).unwrap();
        assert_eq!(half.to_dense(), full);
    }
}
