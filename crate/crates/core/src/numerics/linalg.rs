use std::ops::{Deref, DerefMut, Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::ProbabilityVector;
use crate::scalar::Scalar;

/// Dense column vector.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector<T>(Vec<T>);

impl<T: Scalar> Vector<T> {
    pub fn zeros(len: usize) -> Self {
        Vector(vec![T::zero(); len])
    }

    pub fn filled(len: usize, value: T) -> Self {
        Vector(vec![value; len])
    }

    pub fn as_slice(&self) -> &[T] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<T> {
        self.0
    }

    pub fn is_all_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Vector(self.0.iter().map(|&x| f(x)).collect())
    }

    /// Adds `alpha * other` in place.
    pub fn add_scaled(&mut self, alpha: T, other: &[T]) -> Result<()> {
        if other.len() != self.len() {
            return Err(Error::shape(self.len(), other.len(), "add_scaled"));
        }
        for (a, &b) in self.0.iter_mut().zip(other) {
            *a += alpha * b;
        }
        Ok(())
    }
}

impl<T> From<Vec<T>> for Vector<T> {
    fn from(v: Vec<T>) -> Self {
        Vector(v)
    }
}

impl<T> FromIterator<T> for Vector<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        Vector(iter.into_iter().collect())
    }
}

impl<T> Deref for Vector<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

impl<T> DerefMut for Vector<T> {
    fn deref_mut(&mut self) -> &mut [T] {
        &mut self.0
    }
}

/// Row-major dense matrix with immutable dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} elements, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Shape(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Matrix whose rows are the selected rows of `self`, in order.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (r, c): (usize, usize)) -> &T {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Numerically stable softmax (max-shifted).
pub fn softmax<T: Scalar>(logits: &[T]) -> Result<ProbabilityVector<T>> {
    if logits.is_empty() {
        return Err(Error::InvalidInput("softmax of an empty vector".into()));
    }
    if let Some(i) = logits.iter().position(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "softmax input has non-finite entry at index {i}"
        )));
    }
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    let probs = exps.into_iter().map(|e| e / total).collect();
    Ok(ProbabilityVector::from_trusted(probs))
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::shape(a.len(), b.len(), "dot"));
    }
    Ok(a.iter().zip(b).map(|(&x, &y)| x * y).sum())
}

/// `m · x`.
pub fn matvec<T: Scalar>(m: &Matrix<T>, x: &[T]) -> Result<Vector<T>> {
    if x.len() != m.cols {
        return Err(Error::shape(m.cols, x.len(), "matvec"));
    }
    Ok((0..m.rows)
        .map(|r| m.row(r).iter().zip(x).map(|(&a, &b)| a * b).sum())
        .collect())
}

/// `mᵀ · x`.
pub fn matvec_transposed<T: Scalar>(m: &Matrix<T>, x: &[T]) -> Result<Vector<T>> {
    if x.len() != m.rows {
        return Err(Error::shape(m.rows, x.len(), "matvec_transposed"));
    }
    let mut out = Vector::zeros(m.cols);
    for (r, &xr) in x.iter().enumerate() {
        for (o, &a) in out.iter_mut().zip(m.row(r)) {
            *o += a * xr;
        }
    }
    Ok(out)
}

pub fn matmul<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.cols != b.rows {
        return Err(Error::Shape(format!(
            "matmul of {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = Matrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a[(i, k)];
            for (o, &bkj) in out.row_mut(i).iter_mut().zip(b.row(k)) {
                *o += aik * bkj;
            }
        }
    }
    Ok(out)
}

/// `alpha · x + y`.
pub fn axpy<T: Scalar>(alpha: T, x: &[T], y: &[T]) -> Result<Vector<T>> {
    if x.len() != y.len() {
        return Err(Error::shape(y.len(), x.len(), "axpy"));
    }
    Ok(x.iter().zip(y).map(|(&a, &b)| alpha * a + b).collect())
}

/// Euclidean norm, scaled to avoid overflow on large entries.
pub fn l2_norm<T: Scalar>(x: &[T]) -> T {
    let scale = x.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    if scale == T::zero() || !scale.is_finite() {
        return scale;
    }
    let sum: T = x.iter().map(|&v| (v / scale) * (v / scale)).sum();
    scale * sum.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_examples() {
        let p = softmax(&[0.0_f64, 0.0]).unwrap();
        assert_eq!(p.as_slice(), &[0.5, 0.5]);

        let p = softmax(&[1000.0_f64, 1000.0, 1000.0]).unwrap();
        for &v in p.iter() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }

        // e^x / sum e^x for [1,2,3], evaluated with mpmath at 30 digits.
        let p = softmax(&[1.0_f64, 2.0, 3.0]).unwrap();
        let expected = [0.09003057317038046, 0.24472847105479765, 0.6652409557748219];
        for (a, b) in p.iter().zip(expected) {
            assert!((a - b).abs() < 1e-5);
        }
    }

    #[test]
    fn softmax_rejects_bad_input() {
        assert!(matches!(softmax::<f64>(&[]), Err(Error::InvalidInput(_))));
        assert!(matches!(
            softmax(&[0.0, f64::NAN]),
            Err(Error::InvalidInput(_))
        ));
        assert!(softmax(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(l2_norm(&[3.0_f64, 4.0]), 5.0);
        assert_eq!(l2_norm::<f64>(&[]), 0.0);
        let i2 = Matrix::<f64>::identity(2);
        assert_eq!(matvec(&i2, &[7.0, -2.0]).unwrap().as_slice(), &[7.0, -2.0]);
        assert_eq!(
            axpy(2.0, &[1.0, 1.0], &[0.0, 1.0]).unwrap().as_slice(),
            &[2.0, 3.0]
        );
    }

    #[test]
    fn shape_errors() {
        let m = Matrix::<f64>::zeros(2, 3);
        assert!(matches!(matvec(&m, &[1.0, 2.0]), Err(Error::Shape(_))));
        assert!(matches!(
            matvec_transposed(&m, &[1.0]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(matmul(&m, &m), Err(Error::Shape(_))));
        assert!(matches!(
            axpy(1.0, &[1.0], &[1.0, 2.0]),
            Err(Error::Shape(_))
        ));
        assert!(Matrix::from_row_major(2, 2, vec![1.0_f64; 3]).is_err());
        assert!(Matrix::from_rows(&[vec![1.0_f64], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn matmul_and_transpose_agree() {
        let a = Matrix::from_rows(&[vec![1.0_f64, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let b = Matrix::from_rows(&[vec![1.0_f64, 0.0, -1.0], vec![2.0, 1.0, 0.5]]).unwrap();
        let ab = matmul(&a, &b).unwrap();
        assert_eq!(ab.row(0), &[5.0, 2.0, 0.0]);
        assert_eq!(ab.row(2), &[17.0, 6.0, -2.0]);
        let x = [1.0, -1.0, 2.0];
        assert_eq!(matvec_transposed(&a, &x).unwrap().as_slice(), &[8.0, 10.0]);
    }

    #[test]
    fn generic_over_f32() {
        let p = softmax(&[1.0_f32, 2.0, 3.0]).unwrap();
        let s: f32 = p.iter().sum();
        assert!((s - 1.0).abs() < 1e-6);
        assert_eq!(l2_norm(&[3.0_f32, 4.0]), 5.0);
    }
}
