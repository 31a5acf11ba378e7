use crate::error::{Error, Result};
use crate::funcs::{certify_plq, ConvexFn, QuadraticFn};
use crate::geometry::{Halfspace, Matrix, Point, Polytope};
use crate::qp::solve_qp;

/// Boundary part of one cell of w restricted to a facet of K.
#[derive(Clone, Debug)]
struct Patch {
    q: QuadraticFn,
    cons: Vec<Halfspace>,
}

/// Maximal convex extension of w|_K, evaluated on a bounding box.
///
/// Outside K the value is the sup of the tangent planes of w at points of ∂K.
/// For a quadratic piece q on a boundary patch F that sup is
/// q(y) - ½ min_{x ∈ F} (y-x)ᵀA(y-x).
#[derive(Clone, Debug)]
pub struct ExtensionFn {
    base: Box<ConvexFn>,
    k: Polytope,
    eval_box: Polytope,
    patches: Vec<Patch>,
}

impl ExtensionFn {
    pub fn dim(&self) -> usize {
        self.k.dim()
    }

    pub fn domain(&self) -> &Polytope {
        &self.eval_box
    }

    pub fn core(&self) -> &Polytope {
        &self.k
    }

    pub fn eval(&self, y: &Point) -> f64 {
        if !self.eval_box.contains(y) {
            return f64::INFINITY;
        }
        if self.k.contains(y) {
            return self.base.eval(y);
        }
        let mut best = f64::NEG_INFINITY;
        for p in &self.patches {
            let ay = p.q.a.mul_vec(y);
            if let Some(s) = solve_qp(&p.q.a, &(-ay), &p.cons) {
                let m = s.value + 0.5 * p.q.a.quad_form(y);
                best = best.max(p.q.eval(y) - m.max(0.0));
            }
        }
        best
    }
}

/// Extension of w|_K to `eval_box`. Returns a PLQ function when w is a quadratic
/// with diagonal Hessian and K and the box are axis-parallel; affine w extends
/// to itself.
pub fn tangential_extension(w: &ConvexFn, k: &Polytope, eval_box: &Polytope) -> Result<ConvexFn> {
    let n = k.dim();
    if w.dim() != n || eval_box.dim() != n {
        return Err(Error::DimMismatch { expected: n, got: w.dim().max(eval_box.dim()) });
    }
    let mut probes: Vec<Point> = k.vertices().to_vec();
    probes.push(k.barycenter());
    if probes.iter().any(|x| !w.eval(x).is_finite()) {
        return Err(Error::BadInput("w must be finite on K".into()));
    }
    if let ConvexFn::Affine(_) = w {
        return Ok(w.clone());
    }
    if k.vertices().iter().any(|v| !eval_box.contains(v)) {
        return Err(Error::BadInput("K must lie in the evaluation box".into()));
    }
    if let ConvexFn::Quadratic { q, .. } = w {
        if let (Some(kb), Some(eb)) = (axis_box(k), axis_box(eval_box)) {
            if is_diagonal(&q.a) {
                return diag_box_extension(q, kb, eb);
            }
        }
    }
    let cells: Vec<(Polytope, QuadraticFn)> = match w {
        ConvexFn::Quadratic { q, .. } => vec![(k.clone(), *q)],
        ConvexFn::Pa(_) | ConvexFn::Plq(_) => w.to_plq()?.cells().iter().map(|c| (c.poly.clone(), c.q)).collect(),
        _ => return Err(Error::Unsupported(format!("extension of a {} function", w.kind()))),
    };
    let unit = Matrix::identity(n);
    let mut patches = Vec::new();
    for (poly, q) in &cells {
        for (h, _) in k.facets() {
            let mut cons: Vec<Halfspace> = poly.halfspaces().to_vec();
            cons.extend_from_slice(k.halfspaces());
            cons.push(Halfspace::new(-h.normal, -h.offset));
            if solve_qp(&unit, &Point::zeros(n), &cons).is_some() {
                patches.push(Patch { q: *q, cons });
            }
        }
    }
    Ok(ConvexFn::Extension(ExtensionFn { base: Box::new(w.clone()), k: k.clone(), eval_box: eval_box.clone(), patches }))
}

fn is_diagonal(a: &Matrix) -> bool {
    let n = a.dim();
    (0..n).all(|i| (0..n).all(|j| i == j || a.get(i, j) == 0.0))
}

/// (lo, hi) when p is an axis-parallel box.
fn axis_box(p: &Polytope) -> Option<(Point, Point)> {
    if !p.is_full_dim() || p.vertices().len() != 1 << p.dim() {
        return None;
    }
    let (lo, hi) = p.bbox();
    let vol: f64 = (0..p.dim()).map(|k| hi[k] - lo[k]).product();
    ((vol - p.volume()).abs() <= 1e-12 * vol.max(1.0)).then_some((lo, hi))
}

/// Separable case: the distance term splits per coordinate, giving
/// q(y) - ½ Σ a_i dist(y_i, [l_i, h_i])² on 3^n axis-parallel cells.
fn diag_box_extension(q: &QuadraticFn, (kl, kh): (Point, Point), (el, eh): (Point, Point)) -> Result<ConvexFn> {
    let n = q.dim();
    let mut cells = Vec::new();
    for code in 0..3usize.pow(n as u32) {
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        let mut qc = *q;
        let mut c = code;
        let mut empty = false;
        for i in 0..n {
            let region = c % 3;
            c /= 3;
            let (l, h) = match region {
                0 => (el[i], kl[i]),
                1 => (kl[i], kh[i]),
                _ => (kh[i], eh[i]),
            };
            if h - l <= 1e-12 * (1.0 + h.abs()) {
                empty = true;
                break;
            }
            lo[i] = l;
            hi[i] = h;
            if region != 1 {
                // subtract ½ a_i (y_i - p)² with p the nearest endpoint of [kl, kh]
                let p = if region == 0 { kl[i] } else { kh[i] };
                let ai = q.a.get(i, i);
                let mut a = qc.a;
                a.set(i, i, a.get(i, i) - ai);
                let mut b = qc.b;
                b[i] += ai * p;
                qc = QuadraticFn::from_parts(a, b, qc.c - 0.5 * ai * p * p);
            }
        }
        if !empty {
            cells.push((Polytope::cuboid(&lo, &hi)?, qc));
        }
    }
    Ok(ConvexFn::Plq(certify_plq(cells)?))
}
