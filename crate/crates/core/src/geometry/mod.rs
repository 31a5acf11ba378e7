//! Polytope algebra in dimensions 1 to 3.
//!
//! Polytopes carry both descriptions: an irredundant, lexicographically sorted
//! vertex list and the facet halfspaces `n·x <= c` with unit normals.
//! Lower-dimensional polytopes are ordinary values with volume 0; their
//! affine hull is encoded by pairs of opposite halfspaces.

mod hull;
mod matrix;
mod point;
mod polytope;

pub use matrix::Matrix;
pub(crate) use matrix::{solve_dense, solve_rows};
pub use point::Point;
pub use polytope::{Halfspace, Polytope};

use crate::error::{Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 3;

/// Absolute tolerance on unit-scaled data.
pub const EPS_GEOM: f64 = 1e-9;

/// Tolerance for data whose bounding-box diameter is `diam`.
pub fn scaled_tol(diam: f64) -> f64 {
    EPS_GEOM * (diam / 10.0).max(1.0)
}

pub(crate) fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDim(n))
    }
}

pub(crate) fn same_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimMismatch { expected, got })
    }
}

/// The map x -> Mx + shift. The determinant of M is cached.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    matrix: Matrix,
    shift: Point,
    det: f64,
}

impl AffineMap {
    pub fn new(matrix: Matrix, shift: Point) -> Result<AffineMap> {
        check_dim(matrix.dim())?;
        same_dim(matrix.dim(), shift.dim())?;
        if !matrix.is_finite() || !shift.is_finite() {
            return Err(Error::BadInput("affine map has non-finite entries".into()));
        }
        Ok(AffineMap { det: matrix.det(), matrix, shift })
    }

    pub fn linear(matrix: Matrix) -> Result<AffineMap> {
        AffineMap::new(matrix, Point::zeros(matrix.dim()))
    }

    pub fn translation(y: Point) -> Result<AffineMap> {
        AffineMap::new(Matrix::identity(y.dim()), y)
    }

    pub fn identity(n: usize) -> Result<AffineMap> {
        AffineMap::linear(Matrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn shift(&self) -> Point {
        self.shift
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn is_unimodular(&self, tol: f64) -> bool {
        (self.det.abs() - 1.0).abs() <= tol
    }

    pub fn apply(&self, x: &Point) -> Point {
        self.matrix.mul_vec(x) + self.shift
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let inv = self.matrix.inverse().ok_or(Error::SingularMap(self.det))?;
        AffineMap::new(inv, -inv.mul_vec(&self.shift))
    }

    /// `self ∘ other`, i.e. x -> self(other(x)).
    pub fn compose(&self, other: &AffineMap) -> Result<AffineMap> {
        same_dim(self.dim(), other.dim())?;
        AffineMap::new(self.matrix.mul(&other.matrix), self.apply(&other.shift))
    }
}
