//! Dense row-major matrices and the handful of BLAS-like kernels the
//! networks need.

use crate::error::{shape_err, Result};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(shape_err(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(shape_err("ragged rows"));
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Copies the listed rows, in order, into a new matrix.
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix { rows: idx.len(), cols: self.cols, data }
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|v| *v *= s);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

/// Operand orientation for [`gemm`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Op {
    N,
    T,
}

/// `c = alpha * op(a) * op(b) + beta * c`, with `c` already sized.
pub fn gemm(alpha: f64, a: &Matrix, op_a: Op, b: &Matrix, op_b: Op, beta: f64, c: &mut Matrix) -> Result<()> {
    gemm_slices(alpha, (&a.data, a.rows, a.cols), op_a, (&b.data, b.rows, b.cols), op_b, beta, (&mut c.data, c.rows, c.cols))
}

/// [`gemm`] over raw row-major buffers given as `(data, rows, cols)`.
pub fn gemm_slices(
    alpha: f64,
    a: (&[f64], usize, usize),
    op_a: Op,
    b: (&[f64], usize, usize),
    op_b: Op,
    beta: f64,
    c: (&mut [f64], usize, usize),
) -> Result<()> {
    let (a, ar, ac) = a;
    let (b, br, bc) = b;
    let (c, cr, cc) = c;
    if a.len() != ar * ac || b.len() != br * bc || c.len() != cr * cc {
        return Err(shape_err("gemm: buffer length does not match its dimensions"));
    }
    let (m, k, rsa, csa) = match op_a {
        Op::N => (ar, ac, ac as isize, 1),
        Op::T => (ac, ar, 1, ac as isize),
    };
    let (kb, n, rsb, csb) = match op_b {
        Op::N => (br, bc, bc as isize, 1),
        Op::T => (bc, br, 1, bc as isize),
    };
    if k != kb || cr != m || cc != n {
        return Err(shape_err(format!("gemm: op(a) is {m}x{k}, op(b) is {kb}x{n}, c is {cr}x{cc}")));
    }
    if m == 0 || n == 0 {
        return Ok(());
    }
    if k == 0 {
        c.iter_mut().for_each(|v| *v *= beta);
        return Ok(());
    }
    // SAFETY: strides and extents were validated against the buffers above.
    unsafe {
        matrixmultiply::dgemm(m, k, n, alpha, a.as_ptr(), rsa, csa, b.as_ptr(), rsb, csb, beta, c.as_mut_ptr(), cc as isize, 1);
    }
    Ok(())
}

/// Convenience wrapper returning a fresh `op(a) * op(b)`.
pub fn matmul(a: &Matrix, op_a: Op, b: &Matrix, op_b: Op) -> Result<Matrix> {
    let m = if op_a == Op::N { a.rows } else { a.cols };
    let n = if op_b == Op::N { b.cols } else { b.rows };
    let mut c = Matrix::zeros(m, n);
    gemm(1.0, a, op_a, b, op_b, 0.0, &mut c)?;
    Ok(c)
}
