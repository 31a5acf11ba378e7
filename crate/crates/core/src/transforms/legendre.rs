use crate::error::{Error, Result};
use crate::funcs::{subdivision_vertices, AffineFn, ConvexFn, PaFn, QuadraticFn};
use crate::geometry::{Point, Polytope};
use crate::qp::solve_qp;

/// Legendre transform of a piecewise-affine function.
///
/// A compact-domain function maps to a finite max of affines indexed by the
/// vertices (x_j, t_j) of its epigraph: u*(y) = max_j ⟨x_j, y⟩ - t_j. A
/// finite-valued max of affines maps back to a compact-domain function on the
/// hull of its gradients, with one piece per vertex of its subdivision.
pub fn legendre_pa(u: &PaFn) -> Result<PaFn> {
    match u.domain() {
        Some(_) => {
            let pieces: Vec<AffineFn> = u.vertices().into_iter().map(|v| AffineFn::new(v.x, -v.value)).collect();
            Ok(PaFn::from_parts(u.dim(), pieces, None))
        }
        None => conjugate_of_sum(&[u]),
    }
}

/// (f_1 + ... + f_k)* for finite-valued PA summands, as a compact-domain PA
/// function on the Minkowski sum of their gradient hulls.
pub(crate) fn conjugate_of_sum(fs: &[&PaFn]) -> Result<PaFn> {
    let n = fs[0].dim();
    if fs.iter().any(|f| f.domain().is_some()) {
        return Err(Error::BadInput("summands must be finite-valued".into()));
    }
    let mut domain: Option<Polytope> = None;
    for f in fs {
        let grads: Vec<Point> = f.pieces().iter().map(|p| p.grad).collect();
        let h = Polytope::hull(&grads)?;
        domain = Some(match domain {
            None => h,
            Some(d) => d.minkowski_sum(&h)?,
        });
    }
    let summands: Vec<&[AffineFn]> = fs.iter().map(|f| f.pieces()).collect();
    let pieces: Vec<AffineFn> =
        subdivision_vertices(n, &summands, &[]).into_iter().map(|v| AffineFn::new(v.x, -v.value)).collect();
    Ok(PaFn::from_parts(n, pieces, domain))
}

/// Conjugate of a finite quadratic with positive definite Hessian:
/// q*(y) = ½ (y-b)ᵀA⁻¹(y-b) - c.
pub fn legendre_quadratic(q: &QuadraticFn) -> Result<QuadraticFn> {
    let ev = q.a.min_eigenvalue();
    if ev <= 1e-12 * (1.0 + q.a.max_abs()) {
        return Err(Error::SingularHessian);
    }
    let inv = q.a.inverse().ok_or(Error::SingularHessian)?.symmetrize();
    let ib = inv.mul_vec(&q.b);
    Ok(QuadraticFn::from_parts(inv, -ib, 0.5 * q.b.dot(&ib) - q.c))
}

/// u*(y) = sup_x ⟨x, y⟩ - u(x) for explicit functions with compact domains.
pub fn conjugate_value(u: &ConvexFn, y: &Point) -> Result<f64> {
    let cells: Vec<(Polytope, QuadraticFn)> = match u {
        ConvexFn::Quadratic { q, domain: Some(d) } => vec![(d.clone(), *q)],
        ConvexFn::Quadratic { q, domain: None } => {
            let qs = legendre_quadratic(q)?;
            return Ok(qs.eval(y));
        }
        ConvexFn::Pa(f) if f.domain().is_some() => {
            return Ok(f.vertices().iter().map(|v| v.x.dot(y) - v.value).fold(f64::NEG_INFINITY, f64::max));
        }
        ConvexFn::Plq(f) => f.cells().iter().map(|c| (c.poly.clone(), c.q)).collect(),
        _ => return Err(Error::Unsupported(format!("conjugate of a {} function", u.kind()))),
    };
    let mut best = f64::NEG_INFINITY;
    for (p, q) in cells {
        // min over p of q(x) - ⟨x, y⟩
        let s = solve_qp(&q.a, &(q.b - *y), p.halfspaces()).ok_or_else(|| Error::EvalError("empty cell".into()))?;
        best = best.max(-(s.value + q.c));
    }
    Ok(best)
}
