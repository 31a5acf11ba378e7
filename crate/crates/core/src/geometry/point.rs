use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use crate::geometry::MAX_DIM;

/// A point (or vector) in R^n with n <= 3, stored inline.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    c: [f64; MAX_DIM],
    n: u8,
}

impl Point {
    /// Builds a point from its coordinates. Panics if more than 3 are given.
    pub fn new(coords: &[f64]) -> Point {
        assert!(coords.len() <= MAX_DIM, "Point supports at most {MAX_DIM} coordinates");
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Point { c, n: coords.len() as u8 }
    }

    pub fn zeros(n: usize) -> Point {
        assert!(n <= MAX_DIM);
        Point { c: [0.0; MAX_DIM], n: n as u8 }
    }

    pub fn splat(n: usize, v: f64) -> Point {
        Point::from_fn(n, |_| v)
    }

    pub fn unit(n: usize, i: usize) -> Point {
        let mut p = Point::zeros(n);
        p.c[i] = 1.0;
        p
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> f64) -> Point {
        let mut p = Point::zeros(n);
        for i in 0..n {
            p.c[i] = f(i);
        }
        p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.c[..self.n as usize]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.coords().to_vec()
    }

    #[inline]
    pub fn dot(&self, o: &Point) -> f64 {
        debug_assert_eq!(self.n, o.n);
        let mut s = 0.0;
        for i in 0..self.n as usize {
            s += self.c[i] * o.c[i];
        }
        s
    }

    #[inline]
    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.coords().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn dist(&self, o: &Point) -> f64 {
        (*self - *o).norm()
    }

    pub fn is_finite(&self) -> bool {
        self.coords().iter().all(|v| v.is_finite())
    }

    /// Cross product, for 3-d points.
    pub fn cross(&self, o: &Point) -> Point {
        debug_assert_eq!(self.n, 3);
        let (a, b) = (&self.c, &o.c);
        Point::new(&[a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])
    }

    pub fn lerp(&self, o: &Point, t: f64) -> Point {
        *self + (*o - *self) * t
    }

    /// Lexicographic comparison, used to make vertex lists canonical.
    pub fn lex_cmp(&self, o: &Point) -> Ordering {
        for i in 0..self.dim().min(o.dim()) {
            match self.c[i].partial_cmp(&o.c[i]) {
                Some(Ordering::Equal) | None => continue,
                Some(ord) => return ord,
            }
        }
        self.n.cmp(&o.n)
    }

    pub fn approx_eq(&self, o: &Point, tol: f64) -> bool {
        self.n == o.n && (*self - *o).norm_inf() <= tol
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Point {
        Point::from_fn(self.dim(), |i| f(self.c[i]))
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

impl Index<usize> for Point {
    type Output = f64;
    #[inline]
    fn index(&self, i: usize) -> &f64 {
        debug_assert!(i < self.n as usize);
        &self.c[i]
    }
}

impl IndexMut<usize> for Point {
    #[inline]
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        debug_assert!(i < self.n as usize);
        &mut self.c[i]
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(mut self, o: Point) -> Point {
        debug_assert_eq!(self.n, o.n);
        for i in 0..MAX_DIM {
            self.c[i] += o.c[i];
        }
        self
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(mut self, o: Point) -> Point {
        debug_assert_eq!(self.n, o.n);
        for i in 0..MAX_DIM {
            self.c[i] -= o.c[i];
        }
        self
    }
}

impl AddAssign for Point {
    fn add_assign(&mut self, o: Point) {
        *self = *self + o;
    }
}

impl SubAssign for Point {
    fn sub_assign(&mut self, o: Point) {
        *self = *self - o;
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(mut self, s: f64) -> Point {
        for v in self.c.iter_mut() {
            *v *= s;
        }
        self
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        self * -1.0
    }
}
