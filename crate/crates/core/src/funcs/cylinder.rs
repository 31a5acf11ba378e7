use crate::error::{Error, Result};
use crate::funcs::{AffineFn, ConvexFn};
use crate::geometry::{same_dim, Point, Polytope};

/// u = w □ (v + I_J) for a segment J = [a, b]:
/// u(x) = min over τ in [0,1] of w(x - p(τ)) + v(p(τ)), p(τ) = a + τ(b - a).
#[derive(Clone, Debug)]
pub struct CylinderFn {
    w: Box<ConvexFn>,
    v: AffineFn,
    a: Point,
    b: Point,
    domain: Polytope,
    cylinder: bool,
}

/// Builds w □ (v + I_J). The result is flagged as a cylinder function when
/// dom w is lower-dimensional.
pub fn make_cylinder(w: &ConvexFn, v: &AffineFn, j: &Polytope) -> Result<ConvexFn> {
    let n = w.dim();
    same_dim(n, v.dim())?;
    same_dim(n, j.dim())?;
    if j.aff_dim() != 1 || j.vertices().len() != 2 {
        return Err(Error::BadSegment);
    }
    let dom_w = w
        .domain()
        .ok_or_else(|| Error::BadInput("cylinder base must have a compact domain".into()))?;
    let domain = dom_w.minkowski_sum(j)?;
    Ok(ConvexFn::Cylinder(CylinderFn {
        cylinder: dom_w.is_degenerate(),
        w: Box::new(w.clone()),
        v: *v,
        a: j.vertices()[0],
        b: j.vertices()[1],
        domain,
    }))
}

impl CylinderFn {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    pub fn domain(&self) -> &Polytope {
        &self.domain
    }

    pub fn is_cylinder(&self) -> bool {
        self.cylinder
    }

    pub fn base(&self) -> &ConvexFn {
        &self.w
    }

    pub fn eval(&self, x: &Point) -> f64 {
        if !self.domain.contains(x) {
            return f64::INFINITY;
        }
        let dom_w = self.w.domain().expect("cylinder base has a domain");
        let d = self.b - self.a;
        // feasible τ: x - a - τ d in dom w
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let base = *x - self.a;
        let tol = 10.0 * dom_w.tol();
        for h in dom_w.halfspaces() {
            // h.normal·(base - τ d) <= offset
            let s = -h.normal.dot(&d);
            let r = h.offset - h.normal.dot(&base);
            if s.abs() <= 1e-14 {
                if r < -tol {
                    return f64::INFINITY;
                }
            } else if s > 0.0 {
                hi = hi.min(r / s);
            } else {
                lo = lo.max(r / s);
            }
        }
        if lo > hi {
            if lo - hi > tol / d.norm().max(1e-300) {
                return f64::INFINITY;
            }
            let m = 0.5 * (lo + hi);
            lo = m;
            hi = m;
        }
        let phi = |t: f64| {
            let p = self.a + d * t;
            self.w.eval(&(*x - p)) + self.v.eval(&p)
        };
        // φ is convex in τ: golden-section search, then the endpoints
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo, hi);
        let mut c = b - g * (b - a);
        let mut e = a + g * (b - a);
        let (mut fc, mut fe) = (phi(c), phi(e));
        for _ in 0..120 {
            if b - a <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
                break;
            }
            if fc <= fe {
                b = e;
                e = c;
                fe = fc;
                c = b - g * (b - a);
                fc = phi(c);
            } else {
                a = c;
                c = e;
                fc = fe;
                e = a + g * (b - a);
                fe = phi(e);
            }
        }
        [phi(lo), phi(hi), fc, fe, phi(0.5 * (a + b))].into_iter().fold(f64::INFINITY, f64::min)
    }
}
