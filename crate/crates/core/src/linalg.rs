//! Small dense linear algebra: just enough for few-state noise models.
//!
//! Systems here have at most a handful of states, so everything is plain
//! Gaussian elimination with partial pivoting; no structure exploitation.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::math;

pub type C64 = Complex<f64>;

/// Dense real matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Build from row slices; all rows must have the same length.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for row in rows {
            assert_eq!(row.len(), n_cols, "ragged rows");
            data.extend_from_slice(row);
        }
        Mat {
            rows: n_rows,
            cols: n_cols,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Solve the dense complex system `a * x = b` in place; `a` is n x n
/// row-major and gets destroyed, `b` becomes the solution.
pub fn solve_complex_in_place(a: &mut [C64], n: usize, b: &mut [C64]) -> Result<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let scale: f64 = a.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let tiny = scale * 1e-28 + f64::MIN_POSITIVE;
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].norm_sqr();
        for row in col + 1..n {
            let cand = a[row * n + col].norm_sqr();
            if cand > best {
                best = cand;
                pivot = row;
            }
        }
        if best <= tiny {
            return Err(Error::ShapeMismatch("singular linear system"));
        }
        if pivot != col {
            for k in col..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let inv = C64::new(1.0, 0.0) / a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] * inv;
            if factor == C64::new(0.0, 0.0) {
                continue;
            }
            for k in col + 1..n {
                let v = a[col * n + k];
                a[row * n + k] -= factor * v;
            }
            a[row * n + col] = C64::new(0.0, 0.0);
            let rhs = b[col];
            b[row] -= factor * rhs;
        }
    }
    for col in (0..n).rev() {
        let mut sum = b[col];
        for k in col + 1..n {
            sum -= a[col * n + k] * b[k];
        }
        b[col] = sum / a[col * n + col];
    }
    Ok(())
}

/// Solve the dense real system `a * x = b`; both are consumed/overwritten.
fn solve_real_in_place(a: &mut [f64], n: usize, b: &mut [f64]) -> Result<()> {
    let scale: f64 = a.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let tiny = scale * 1e-14 + f64::MIN_POSITIVE;
    for col in 0..n {
        let mut pivot = col;
        let mut best = a[col * n + col].abs();
        for row in col + 1..n {
            let cand = a[row * n + col].abs();
            if cand > best {
                best = cand;
                pivot = row;
            }
        }
        if best <= tiny {
            return Err(Error::ShapeMismatch("singular linear system"));
        }
        if pivot != col {
            for k in col..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let inv = 1.0 / a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] * inv;
            if factor == 0.0 {
                continue;
            }
            for k in col + 1..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            a[row * n + col] = 0.0;
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut sum = b[col];
        for k in col + 1..n {
            sum -= a[col * n + k] * b[k];
        }
        b[col] = sum / a[col * n + col];
    }
    Ok(())
}

/// True when every eigenvalue of `m` has strictly positive real part.
///
/// Decided through the Lyapunov criterion: the equation
/// `m^T X + X m = I` has a symmetric positive definite solution exactly when
/// the spectrum of `m` lies in the open right half plane. The n^2 x n^2
/// Kronecker system is solved directly and definiteness checked by Cholesky;
/// a singular system (eigenvalue pair summing to zero) counts as unstable.
pub fn drift_is_stable(m: &Mat) -> bool {
    let n = m.rows();
    if n != m.cols() || !m.is_finite() {
        return false;
    }
    if n == 0 {
        return true;
    }
    let nn = n * n;
    let mut system = vec![0.0; nn * nn];
    let mut rhs = vec![0.0; nn];
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for k in 0..n {
                system[row * nn + (k * n + j)] += m[(k, i)];
                system[row * nn + (i * n + k)] += m[(k, j)];
            }
            if i == j {
                rhs[row] = 1.0;
            }
        }
    }
    if solve_real_in_place(&mut system, nn, &mut rhs).is_err() {
        return false;
    }
    // Symmetrize against rounding and test positive definiteness.
    let mut x = vec![0.0; nn];
    for i in 0..n {
        for j in 0..n {
            x[i * n + j] = 0.5 * (rhs[i * n + j] + rhs[j * n + i]);
        }
    }
    cholesky_spd(&mut x, n)
}

/// In-place Cholesky; returns false when the matrix is not (numerically)
/// symmetric positive definite.
fn cholesky_spd(a: &mut [f64], n: usize) -> bool {
    let scale: f64 = a.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let floor = scale * 1e-12 + f64::MIN_POSITIVE;
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if !(diag > floor && diag.is_finite()) {
            return false;
        }
        let root = math::sqrt(diag);
        a[j * n + j] = root;
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / root;
        }
    }
    true
}
