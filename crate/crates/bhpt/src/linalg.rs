//! Dense complex matrices for the small systems the toolkit needs
//! (sector component counts are at most 7, fit parameters at most 4).

use crate::error::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
// f64 math via libm in builds without std; the inherent std methods shadow
// the trait whenever std is linked.
#[allow(unused_imports)]
use num_traits::Float;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::ONE;
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut m = CMat::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            debug_assert_eq!(row.len(), c);
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn matmul(&self, rhs: &CMat) -> CMat {
        debug_assert_eq!(self.cols, rhs.rows);
        let mut out = CMat::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::ZERO {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(self.cols, x.len());
        let mut out = vec![Complex64::ZERO; self.rows];
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[i] += self[(i, j)] * x[j];
            }
        }
        out
    }

    /// Solve `self * x = b` by partial-pivot LU. `b` has one column.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        debug_assert_eq!(self.rows, self.cols);
        debug_assert_eq!(self.rows, b.len());
        let n = self.rows;
        let mut a = self.data.clone();
        let mut x: Vec<Complex64> = b.to_vec();
        let mut scale = 0.0f64;
        for v in &a {
            scale = scale.max(v.norm());
        }
        let tol = scale.max(1.0) * 1e-14 * n as f64;
        for col in 0..n {
            let mut piv = col;
            let mut best = a[col * n + col].norm();
            for row in col + 1..n {
                let mag = a[row * n + col].norm();
                if mag > best {
                    best = mag;
                    piv = row;
                }
            }
            if best <= tol {
                return Err(Error::SingularMatrix);
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                x.swap(col, piv);
            }
            let d = a[col * n + col];
            for row in col + 1..n {
                let f = a[row * n + col] / d;
                if f == Complex64::ZERO {
                    continue;
                }
                a[row * n + col] = Complex64::ZERO;
                for j in col + 1..n {
                    let v = a[col * n + j];
                    a[row * n + j] -= f * v;
                }
                let xv = x[col];
                x[row] -= f * xv;
            }
        }
        for col in (0..n).rev() {
            let mut acc = x[col];
            for j in col + 1..n {
                acc -= a[col * n + j] * x[j];
            }
            x[col] = acc / a[col * n + col];
        }
        Ok(x)
    }

    /// Determinant by LU (used for small Wronskian-type determinants).
    pub fn det(&self) -> Complex64 {
        debug_assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = Complex64::ONE;
        for col in 0..n {
            let mut piv = col;
            let mut best = a[col * n + col].norm();
            for row in col + 1..n {
                let mag = a[row * n + col].norm();
                if mag > best {
                    best = mag;
                    piv = row;
                }
            }
            if best == 0.0 {
                return Complex64::ZERO;
            }
            if piv != col {
                for j in 0..n {
                    a.swap(col * n + j, piv * n + j);
                }
                det = -det;
            }
            let d = a[col * n + col];
            det *= d;
            for row in col + 1..n {
                let f = a[row * n + col] / d;
                for j in col..n {
                    let v = a[col * n + j];
                    a[row * n + j] -= f * v;
                }
            }
        }
        det
    }
}

impl core::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Least-squares solve of an overdetermined system via normal equations;
/// adequate for the 2-4 parameter fits used here.
pub fn lstsq(a: &CMat, b: &[Complex64]) -> Result<Vec<Complex64>> {
    debug_assert_eq!(a.rows, b.len());
    let n = a.cols;
    let mut ata = CMat::zeros(n, n);
    let mut atb = vec![Complex64::ZERO; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Complex64::ZERO;
            for k in 0..a.rows {
                acc += a[(k, i)].conj() * a[(k, j)];
            }
            ata[(i, j)] = acc;
        }
        for k in 0..a.rows {
            atb[i] += a[(k, i)].conj() * b[k];
        }
    }
    ata.solve(&atb)
}

/// Inverse and determinant of a real 4x4 matrix by partial-pivot elimination.
/// Returns `None` when the pivot falls below 1e-300 (numerically singular).
pub fn invert4(m: &[[f64; 4]; 4]) -> Option<([[f64; 4]; 4], f64)> {
    let mut a = *m;
    let mut inv = [[0.0; 4]; 4];
    for (i, row) in inv.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let mut det = 1.0;
    for col in 0..4 {
        let piv = (col..4)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        if piv != col {
            a.swap(col, piv);
            inv.swap(col, piv);
            det = -det;
        }
        let d = a[col][col];
        det *= d;
        for j in 0..4 {
            a[col][j] /= d;
            inv[col][j] /= d;
        }
        for row in 0..4 {
            if row == col {
                continue;
            }
            let f = a[row][col];
            if f == 0.0 {
                continue;
            }
            for j in 0..4 {
                a[row][j] -= f * a[col][j];
                inv[row][j] -= f * inv[col][j];
            }
        }
    }
    Some((inv, det))
}

/// Eigenvalues of a symmetric real 4x4 matrix by cyclic Jacobi rotations.
/// Off-diagonal entries are annihilated until their norm drops below
/// 1e-14 times the matrix norm; convergence is quadratic.
pub fn sym_eigenvalues4(m: [[f64; 4]; 4]) -> [f64; 4] {
    let mut a = m;
    let norm: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    for _ in 0..50 {
        let off: f64 = (0..4)
            .flat_map(|p| (0..4).map(move |q| (p, q)))
            .filter(|&(p, q)| p != q)
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-14 * norm {
            break;
        }
        for p in 0..3 {
            for q in p + 1..4 {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
                let (rowp, rowq) = (a[p], a[q]);
                for k in 0..4 {
                    a[p][k] = c * rowp[k] - s * rowq[k];
                    a[q][k] = s * rowp[k] + c * rowq[k];
                }
            }
        }
    }
    [a[0][0], a[1][1], a[2][2], a[3][3]]
}
