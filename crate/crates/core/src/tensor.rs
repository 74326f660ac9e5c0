//! Dense row-major storage shared by tables, gradients and kernel outputs.

use crate::error::{Error, Result};

/// Row-major `rows × dim` array of 32-bit reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    dim: usize,
    data: Vec<f32>,
}

impl Matrix {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        Matrix {
            rows,
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    pub fn from_vec(rows: usize, dim: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != rows * dim {
            return Err(Error::Shape(format!("data length {} != {rows} x {dim}", data.len())));
        }
        Ok(Matrix { rows, dim, data })
    }

    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::Shape(format!("row {i} has width {}, expected {dim}", r.len())));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            dim,
            data,
        })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f32] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f32]> {
        // chunks_exact panics on 0
        self.data.chunks_exact(self.dim.max(1)).take(self.rows)
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }
}

/// Trainable embedding rows. At least one row of width at least one.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable(Matrix);

impl EmbeddingTable {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows() == 0 || m.dim() == 0 {
            return Err(Error::Shape(format!(
                "embedding table must be non-empty, got {} x {}",
                m.rows(),
                m.dim()
            )));
        }
        Ok(EmbeddingTable(m))
    }

    pub fn zeros(rows: usize, dim: usize) -> Result<Self> {
        Self::new(Matrix::zeros(rows, dim))
    }

    /// Table whose row `i` is filled with `f(i, j)` at column `j`.
    pub fn from_fn(rows: usize, dim: usize, mut f: impl FnMut(usize, usize) -> f32) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * dim);
        for i in 0..rows {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self::new(Matrix::from_vec(rows, dim, data)?)
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        self.0.row(i)
    }

    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f32] {
        self.0.row_mut(i)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

/// Gradients backpropagated into the embedding layer, one row per reduced
/// output slot.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBatch(Matrix);

impl GradientBatch {
    pub fn new(m: Matrix) -> Result<Self> {
        if m.rows() == 0 || m.dim() == 0 {
            return Err(Error::Empty("gradient batch"));
        }
        Ok(GradientBatch(m))
    }

    pub fn from_rows<R: AsRef<[f32]>>(rows: &[R]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn row(&self, i: usize) -> &[f32] {
        self.0.row(i)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_checks() {
        assert!(Matrix::from_vec(2, 3, vec![0.0; 5]).is_err());
        assert!(EmbeddingTable::zeros(0, 4).is_err());
        assert!(EmbeddingTable::zeros(4, 0).is_err());
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn row_access() {
        let t = EmbeddingTable::from_fn(3, 2, |i, j| (i * 10 + j) as f32).unwrap();
        assert_eq!(t.row(2), &[20.0, 21.0]);
        assert_eq!(t.matrix().iter_rows().count(), 3);
    }
}
