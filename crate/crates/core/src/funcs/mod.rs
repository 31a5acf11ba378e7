//! Convex functions with polytopal domains: affine, quadratic, piecewise-affine
//! (max of affines) and piecewise linear-quadratic representations, plus the
//! implicit kinds produced by the transforms (envelopes, extensions, cylinders).

mod cylinder;
mod lattice;
mod pa;
mod plq;

pub use cylinder::{make_cylinder, CylinderFn};
pub use lattice::{join, meet};
pub use pa::PaFn;
pub(crate) use pa::{active_pieces, affine_rank, for_each_combination, span_basis, subdivision_vertices};
pub use plq::{certify_plq, Certificate, FacetCheck, PlqCell, PlqFn};
pub(crate) use plq::{quad_extrema, simplify_cells};
pub(crate) use lattice::grid_in_box;

use crate::error::{Error, Result};
use crate::geometry::{check_dim, same_dim, AffineMap, Matrix, Point, Polytope, EPS_GEOM};
use crate::transforms::{EnvelopeFn, ExtensionFn};

/// ℓ(x) = grad·x + c.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineFn {
    pub grad: Point,
    pub c: f64,
}

impl AffineFn {
    pub fn new(grad: Point, c: f64) -> AffineFn {
        AffineFn { grad, c }
    }

    pub fn zero(n: usize) -> AffineFn {
        AffineFn::new(Point::zeros(n), 0.0)
    }

    pub fn dim(&self) -> usize {
        self.grad.dim()
    }

    #[inline]
    pub fn eval(&self, x: &Point) -> f64 {
        self.grad.dot(x) + self.c
    }
}

/// q(x) = ½ xᵀAx + b·x + c with A symmetric positive semidefinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticFn {
    pub a: Matrix,
    pub b: Point,
    pub c: f64,
}

impl QuadraticFn {
    /// Checks symmetry and positive semidefiniteness.
    pub fn new(a: Matrix, b: Point, c: f64) -> Result<QuadraticFn> {
        check_dim(a.dim())?;
        same_dim(a.dim(), b.dim())?;
        if !a.is_finite() || !b.is_finite() || !c.is_finite() {
            return Err(Error::BadInput("non-finite quadratic coefficients".into()));
        }
        let tol = EPS_GEOM * (1.0 + a.max_abs());
        if !a.is_symmetric(tol) {
            return Err(Error::BadInput("quadratic matrix is not symmetric".into()));
        }
        let q = QuadraticFn { a: a.symmetrize(), b, c };
        let ev = q.a.min_eigenvalue();
        if ev < -tol {
            return Err(Error::NotConvex(format!("Hessian has eigenvalue {ev:e}")));
        }
        Ok(q)
    }

    /// No checks.
    pub fn from_parts(a: Matrix, b: Point, c: f64) -> QuadraticFn {
        QuadraticFn { a, b, c }
    }

    /// ½|x|² scaled by `s`.
    pub fn scaled_norm(n: usize, s: f64) -> QuadraticFn {
        QuadraticFn::from_parts(Matrix::scaled_identity(n, s), Point::zeros(n), 0.0)
    }

    pub fn affine(l: &AffineFn) -> QuadraticFn {
        QuadraticFn::from_parts(Matrix::zeros(l.dim()), l.grad, l.c)
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    #[inline]
    pub fn eval(&self, x: &Point) -> f64 {
        0.5 * self.a.quad_form(x) + self.b.dot(x) + self.c
    }

    #[inline]
    pub fn gradient(&self, x: &Point) -> Point {
        self.a.mul_vec(x) + self.b
    }

    /// det A, read as 0 when A has an eigenvalue that is zero up to rounding
    /// (composing with maps smears exact zeros into values near 1e-15, which a
    /// ζ steep at 0 would amplify).
    pub fn hessian_det(&self) -> f64 {
        let n = self.dim();
        let d = self.a.det();
        let scale = self.a.max_abs() * n as f64;
        if d.abs() > (1e3 * f64::EPSILON * scale) * scale.powi(n as i32 - 1) {
            return d;
        }
        let ev = self.a.sym_eigenvalues();
        let big = ev.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        if ev.iter().any(|e| e.abs() <= 16.0 * f64::EPSILON * n as f64 * big) {
            0.0
        } else {
            d.max(0.0)
        }
    }

    pub fn sub(&self, o: &QuadraticFn) -> QuadraticFn {
        QuadraticFn::from_parts(self.a.sub(&o.a), self.b - o.b, self.c - o.c)
    }

    pub fn add_affine(&self, l: &AffineFn) -> QuadraticFn {
        QuadraticFn::from_parts(self.a, self.b + l.grad, self.c + l.c)
    }

    /// x -> q(Mx + s).
    pub fn compose(&self, m: &AffineMap) -> QuadraticFn {
        let mt = m.matrix().transpose();
        let a = mt.mul(&self.a).mul(m.matrix()).symmetrize();
        let b = mt.mul_vec(&(self.a.mul_vec(&m.shift()) + self.b));
        QuadraticFn::from_parts(a, b, self.eval(&m.shift()))
    }

    pub fn approx_eq(&self, o: &QuadraticFn, tol: f64) -> bool {
        self.a.sub(&o.a).max_abs() <= tol && (self.b - o.b).norm_inf() <= tol && (self.c - o.c).abs() <= tol
    }
}

/// ∂u(x) = bounded_part + cone(cone_generators).
#[derive(Clone, Debug)]
pub struct SubdiffSet {
    pub bounded_part: Polytope,
    pub cone_generators: Vec<Point>,
}

impl SubdiffSet {
    /// Whether g lies in the set (cone part via nonnegative combinations checked
    /// only for the bounded part plus at most one generator direction).
    pub fn contains_bounded(&self, g: &Point) -> bool {
        self.bounded_part.contains_tol(g, 1e-8)
    }
}

/// A convex function with a polytopal (or full) domain.
#[derive(Clone, Debug)]
pub enum ConvexFn {
    Affine(AffineFn),
    Quadratic { q: QuadraticFn, domain: Option<Polytope> },
    Pa(PaFn),
    Plq(PlqFn),
    Envelope(EnvelopeFn),
    Extension(ExtensionFn),
    Cylinder(CylinderFn),
}

impl From<PaFn> for ConvexFn {
    fn from(f: PaFn) -> ConvexFn {
        ConvexFn::Pa(f)
    }
}

impl From<PlqFn> for ConvexFn {
    fn from(f: PlqFn) -> ConvexFn {
        ConvexFn::Plq(f)
    }
}

impl From<EnvelopeFn> for ConvexFn {
    fn from(f: EnvelopeFn) -> ConvexFn {
        ConvexFn::Envelope(f)
    }
}

impl ConvexFn {
    pub fn quadratic_on(q: QuadraticFn, domain: Polytope) -> ConvexFn {
        ConvexFn::Quadratic { q, domain: Some(domain) }
    }

    pub fn indicator(p: Polytope) -> ConvexFn {
        ConvexFn::Pa(PaFn::indicator(p))
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexFn::Affine(l) => l.dim(),
            ConvexFn::Quadratic { q, .. } => q.dim(),
            ConvexFn::Pa(f) => f.dim(),
            ConvexFn::Plq(f) => f.dim(),
            ConvexFn::Envelope(e) => e.dim(),
            ConvexFn::Extension(e) => e.dim(),
            ConvexFn::Cylinder(c) => c.dim(),
        }
    }

    /// Short tag used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            ConvexFn::Affine(_) => "affine",
            ConvexFn::Quadratic { .. } => "quadratic",
            ConvexFn::Pa(_) => "pa",
            ConvexFn::Plq(_) => "plq",
            ConvexFn::Envelope(_) => "envelope",
            ConvexFn::Extension(_) => "extension",
            ConvexFn::Cylinder(_) => "cylinder",
        }
    }

    /// Value at x; `+inf` outside the domain.
    pub fn eval(&self, x: &Point) -> f64 {
        match self {
            ConvexFn::Affine(l) => l.eval(x),
            ConvexFn::Quadratic { q, domain } => match domain {
                Some(d) if !d.contains(x) => f64::INFINITY,
                _ => q.eval(x),
            },
            ConvexFn::Pa(f) => f.eval(x),
            ConvexFn::Plq(f) => f.eval(x),
            ConvexFn::Envelope(e) => e.value(x),
            ConvexFn::Extension(e) => e.eval(x),
            ConvexFn::Cylinder(c) => c.eval(x),
        }
    }

    /// The domain, `None` meaning all of R^n.
    pub fn domain(&self) -> Option<&Polytope> {
        match self {
            ConvexFn::Affine(_) => None,
            ConvexFn::Quadratic { domain, .. } => domain.as_ref(),
            ConvexFn::Pa(f) => f.domain(),
            ConvexFn::Plq(f) => Some(f.domain()),
            ConvexFn::Envelope(e) => e.domain(),
            ConvexFn::Extension(e) => Some(e.domain()),
            ConvexFn::Cylinder(c) => Some(c.domain()),
        }
    }

    pub fn is_cylinder(&self) -> bool {
        matches!(self, ConvexFn::Cylinder(c) if c.is_cylinder())
    }

    /// Whether the function is given by an explicit finite representation.
    pub fn is_explicit(&self) -> bool {
        matches!(self, ConvexFn::Affine(_) | ConvexFn::Quadratic { .. } | ConvexFn::Pa(_) | ConvexFn::Plq(_))
    }

    pub fn subdifferential(&self, x: &Point) -> Result<SubdiffSet> {
        same_dim(self.dim(), x.dim())?;
        let dom = self.domain();
        if let Some(d) = dom {
            if !d.contains(x) {
                return Err(Error::OutsideDomain);
            }
        }
        let grads: Vec<Point> = match self {
            ConvexFn::Affine(l) => vec![l.grad],
            ConvexFn::Quadratic { q, .. } => vec![q.gradient(x)],
            ConvexFn::Pa(f) => {
                let (_, act) = active_pieces(f.pieces(), x);
                act.iter().map(|&i| f.pieces()[i].grad).collect()
            }
            ConvexFn::Plq(f) => f.active_cells(x).iter().map(|c| c.q.gradient(x)).collect(),
            _ => return Err(Error::Unsupported(format!("subdifferential of a {} function", self.kind()))),
        };
        let cone_generators = match dom {
            Some(d) => d.active_halfspaces(x, 10.0 * d.tol()).iter().map(|h| h.normal).collect(),
            None => vec![],
        };
        Ok(SubdiffSet { bounded_part: Polytope::hull(&grads)?, cone_generators })
    }

    /// One subgradient at x. Exact for explicit kinds and for envelopes whose box
    /// constraint is inactive at x; central differences otherwise.
    pub fn subgradient(&self, x: &Point) -> Result<Point> {
        match self {
            ConvexFn::Envelope(e) => {
                if let Some(g) = e.gradient(x)? {
                    return Ok(g);
                }
                self.fd_gradient(x)
            }
            ConvexFn::Extension(_) | ConvexFn::Cylinder(_) => self.fd_gradient(x),
            _ => {
                let s = self.subdifferential(x)?;
                Ok(s.bounded_part.barycenter())
            }
        }
    }

    fn fd_gradient(&self, x: &Point) -> Result<Point> {
        let n = self.dim();
        let h = 1e-6 * (1.0 + x.norm_inf());
        let mut g = Point::zeros(n);
        for i in 0..n {
            let e = Point::unit(n, i) * h;
            let (fp, fm) = (self.eval(&(*x + e)), self.eval(&(*x - e)));
            g[i] = match (fp.is_finite(), fm.is_finite()) {
                (true, true) => (fp - fm) / (2.0 * h),
                (true, false) => (fp - self.eval(x)) / h,
                (false, true) => (self.eval(x) - fm) / h,
                _ => return Err(Error::EvalError("no finite neighbours for a difference quotient".into())),
            };
        }
        Ok(g)
    }

    /// Sup of |g| over subgradients at interior points (exact for PA, PLQ and
    /// quadratics on polytopes).
    pub fn lipschitz_constant(&self) -> Result<f64> {
        if let Some(d) = self.domain() {
            if d.is_degenerate() {
                return Err(Error::DegenerateDomain);
            }
        }
        match self {
            ConvexFn::Affine(l) => Ok(l.grad.norm()),
            ConvexFn::Pa(f) => Ok(f.pieces().iter().map(|p| p.grad.norm()).fold(0.0, f64::max)),
            ConvexFn::Quadratic { q, domain: Some(d) } => {
                Ok(d.vertices().iter().map(|v| q.gradient(v).norm()).fold(0.0, f64::max))
            }
            ConvexFn::Plq(f) => Ok(f.lipschitz_constant()),
            _ => Err(Error::Unsupported(format!("Lipschitz constant of a {} function", self.kind()))),
        }
    }

    /// PLQ view of an explicit function with a compact domain.
    pub fn to_plq(&self) -> Result<PlqFn> {
        match self {
            ConvexFn::Plq(f) => Ok(f.clone()),
            ConvexFn::Quadratic { q, domain: Some(d) } => certify_plq(vec![(d.clone(), *q)]),
            ConvexFn::Pa(f) if f.domain().is_some() => {
                let cells = f.cells()?.into_iter().map(|(p, l)| (p, QuadraticFn::affine(&l))).collect();
                certify_plq(cells)
            }
            _ => Err(Error::Unsupported(format!("PLQ form of a {} function", self.kind()))),
        }
    }

    /// x -> u(Mx + s).
    pub fn compose_affine(&self, m: &AffineMap) -> Result<ConvexFn> {
        same_dim(self.dim(), m.dim())?;
        let inv = m.inverse()?;
        let pull = |p: &Polytope| p.affine_image(&inv);
        let comp_aff = |l: &AffineFn| AffineFn::new(m.matrix().transpose().mul_vec(&l.grad), l.eval(&m.shift()));
        Ok(match self {
            ConvexFn::Affine(l) => ConvexFn::Affine(comp_aff(l)),
            ConvexFn::Quadratic { q, domain } => {
                ConvexFn::Quadratic { q: q.compose(m), domain: domain.as_ref().map(pull).transpose()? }
            }
            ConvexFn::Pa(f) => ConvexFn::Pa(PaFn::from_parts(
                f.dim(),
                f.pieces().iter().map(comp_aff).collect(),
                f.domain().map(pull).transpose()?,
            )),
            ConvexFn::Plq(f) => {
                let cells = f.cells().iter().map(|c| Ok((pull(&c.poly)?, c.q.compose(m)))).collect::<Result<Vec<_>>>()?;
                ConvexFn::Plq(certify_plq(cells)?)
            }
            _ => return Err(Error::Unsupported(format!("composition of a {} function", self.kind()))),
        })
    }

    /// x -> u(x - y).
    pub fn translate(&self, y: &Point) -> Result<ConvexFn> {
        self.compose_affine(&AffineMap::translation(-*y)?)
    }

    /// u + ℓ for an affine ℓ (a constant when ℓ.grad = 0).
    pub fn add_affine(&self, l: &AffineFn) -> Result<ConvexFn> {
        same_dim(self.dim(), l.dim())?;
        Ok(match self {
            ConvexFn::Affine(a) => ConvexFn::Affine(AffineFn::new(a.grad + l.grad, a.c + l.c)),
            ConvexFn::Quadratic { q, domain } => ConvexFn::Quadratic { q: q.add_affine(l), domain: domain.clone() },
            ConvexFn::Pa(f) => ConvexFn::Pa(f.add_affine(l)),
            ConvexFn::Plq(f) => ConvexFn::Plq(f.add_affine(l)),
            _ => return Err(Error::Unsupported(format!("adding an affine function to a {} function", self.kind()))),
        })
    }

    pub fn add_constant(&self, c: f64) -> Result<ConvexFn> {
        self.add_affine(&AffineFn::new(Point::zeros(self.dim()), c))
    }
}

#[cfg(test)]
mod tests;
