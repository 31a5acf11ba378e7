use nalgebra::{DMatrix, SymmetricEigen};

use crate::geometry::{Point, MAX_DIM};

/// Small dense n x n matrix (n <= 3), stored inline.
#[derive(Clone, Copy, PartialEq)]
pub struct Matrix {
    a: [[f64; MAX_DIM]; MAX_DIM],
    n: u8,
}

impl std::fmt::Debug for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.to_rows())
    }
}

impl Matrix {
    pub fn zeros(n: usize) -> Matrix {
        assert!(n <= MAX_DIM);
        Matrix { a: [[0.0; MAX_DIM]; MAX_DIM], n: n as u8 }
    }

    pub fn identity(n: usize) -> Matrix {
        Matrix::diag(&vec![1.0; n])
    }

    pub fn scaled_identity(n: usize, s: f64) -> Matrix {
        Matrix::diag(&vec![s; n])
    }

    pub fn diag(d: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m.a[i][i] = *v;
        }
        m
    }

    /// Builds from rows; every row must have length equal to the row count.
    pub fn from_rows(rows: &[Vec<f64>]) -> Option<Matrix> {
        let n = rows.len();
        if n > MAX_DIM || rows.iter().any(|r| r.len() != n) {
            return None;
        }
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i][j] = rows[i][j];
            }
        }
        Some(m)
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Matrix {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i][j] = f(i, j);
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Point]) -> Matrix {
        let n = cols.len();
        Matrix::from_fn(n, |i, j| cols[j][i])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i][j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i][j] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n).map(|i| self.a[i][..n].to_vec()).collect()
    }

    pub fn row(&self, i: usize) -> Point {
        Point::new(&self.a[i][..self.dim()])
    }

    pub fn col(&self, j: usize) -> Point {
        Point::from_fn(self.dim(), |i| self.a[i][j])
    }

    #[inline]
    pub fn mul_vec(&self, x: &Point) -> Point {
        let n = self.dim();
        Point::from_fn(n, |i| {
            let mut s = 0.0;
            for j in 0..n {
                s += self.a[i][j] * x[j];
            }
            s
        })
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        let n = self.dim();
        Matrix::from_fn(n, |i, j| (0..n).map(|k| self.a[i][k] * o.a[k][j]).sum())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.dim(), |i, j| self.a[j][i])
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix::from_fn(self.dim(), |i, j| self.a[i][j] * s)
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        Matrix::from_fn(self.dim(), |i, j| self.a[i][j] + o.a[i][j])
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        Matrix::from_fn(self.dim(), |i, j| self.a[i][j] - o.a[i][j])
    }

    /// x^T A x.
    #[inline]
    pub fn quad_form(&self, x: &Point) -> f64 {
        x.dot(&self.mul_vec(x))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.a[i][i]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        let n = self.dim();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                m = m.max(self.a[i][j].abs());
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| self.a[i][j].is_finite()))
    }

    pub fn det(&self) -> f64 {
        let a = &self.a;
        match self.n {
            0 => 1.0,
            1 => a[0][0],
            2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
            _ => {
                a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                    + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
            }
        }
    }

    /// Inverse by the adjugate; `None` when the determinant is negligible.
    pub fn inverse(&self) -> Option<Matrix> {
        let n = self.dim();
        let d = self.det();
        let scale = self.max_abs().max(f64::MIN_POSITIVE).powi(n as i32);
        if !d.is_finite() || d.abs() <= 1e-14 * scale {
            return None;
        }
        let a = &self.a;
        let inv = match n {
            0 => Matrix::zeros(0),
            1 => Matrix::diag(&[1.0 / a[0][0]]),
            2 => Matrix::from_rows(&[vec![a[1][1] / d, -a[0][1] / d], vec![-a[1][0] / d, a[0][0] / d]]).unwrap(),
            _ => Matrix::from_fn(3, |i, j| {
                // cofactor of (j, i)
                let r: Vec<usize> = (0..3).filter(|&k| k != j).collect();
                let c: Vec<usize> = (0..3).filter(|&k| k != i).collect();
                let minor = a[r[0]][c[0]] * a[r[1]][c[1]] - a[r[0]][c[1]] * a[r[1]][c[0]];
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                sign * minor / d
            }),
        };
        Some(inv)
    }

    /// Solves A x = b, `None` if A is (numerically) singular.
    pub fn solve(&self, b: &Point) -> Option<Point> {
        solve_dense(self.dim(), &self.to_flat(), b.coords()).map(|x| Point::new(&x))
    }

    fn to_flat(&self) -> Vec<f64> {
        let n = self.dim();
        let mut v = Vec::with_capacity(n * n);
        for i in 0..n {
            v.extend_from_slice(&self.a[i][..n]);
        }
        v
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..i).all(|j| (self.a[i][j] - self.a[j][i]).abs() <= tol))
    }

    pub fn symmetrize(&self) -> Matrix {
        Matrix::from_fn(self.dim(), |i, j| 0.5 * (self.a[i][j] + self.a[j][i]))
    }

    /// Eigenvalues of the symmetric part, ascending.
    pub fn sym_eigenvalues(&self) -> Vec<f64> {
        let n = self.dim();
        if n == 0 {
            return vec![];
        }
        let s = self.symmetrize();
        let m = DMatrix::from_fn(n, n, |i, j| s.a[i][j]);
        let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.sym_eigenvalues().first().copied().unwrap_or(0.0)
    }
}

/// Gaussian elimination with partial pivoting on a row-major m x m system.
pub(crate) fn solve_dense(m: usize, a: &[f64], b: &[f64]) -> Option<Vec<f64>> {
    let mut a = a.to_vec();
    let mut x = b.to_vec();
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(f64::MIN_POSITIVE);
    for col in 0..m {
        let mut piv = col;
        for r in col + 1..m {
            if a[r * m + col].abs() > a[piv * m + col].abs() {
                piv = r;
            }
        }
        if a[piv * m + col].abs() <= 1e-13 * scale {
            return None;
        }
        if piv != col {
            for k in 0..m {
                a.swap(col * m + k, piv * m + k);
            }
            x.swap(col, piv);
        }
        let p = a[col * m + col];
        for r in col + 1..m {
            let f = a[r * m + col] / p;
            if f != 0.0 {
                for k in col..m {
                    a[r * m + k] -= f * a[col * m + k];
                }
                x[r] -= f * x[col];
            }
        }
    }
    for col in (0..m).rev() {
        let mut s = x[col];
        for k in col + 1..m {
            s -= a[col * m + k] * x[k];
        }
        x[col] = s / a[col * m + col];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}

/// Solves the square system whose rows are `rows` (as points) with right-hand side `rhs`.
pub(crate) fn solve_rows(rows: &[Point], rhs: &[f64]) -> Option<Point> {
    let m = rows.len();
    let mut a = Vec::with_capacity(m * m);
    for r in rows {
        a.extend_from_slice(r.coords());
    }
    solve_dense(m, &a, rhs).map(|x| Point::new(&x))
}
