use super::legendre::legendre_pa;
use crate::error::{Error, Result};
use crate::funcs::{join, meet, AffineFn, ConvexFn, PaFn};
use crate::geometry::{AffineMap, Point};
use crate::funcs::grid_in_box;
use crate::report::{CheckReport, SupTracker};

pub const IDENTITY_TOL: f64 = 1e-7;

fn as_pa(f: ConvexFn) -> Result<PaFn> {
    match f {
        ConvexFn::Pa(p) => Ok(p),
        other => Err(Error::Unsupported(format!("expected a PA function, got {}", other.kind()))),
    }
}

fn compare(name: &str, grid: &[Point], lhs: impl Fn(&Point) -> f64, rhs: impl Fn(&Point) -> f64) -> CheckReport {
    let mut t = SupTracker::default();
    for x in grid {
        t.observe(x, lhs(x), rhs(x));
    }
    t.report(name, IDENTITY_TOL)
}

/// Conjugation rules for constants, linear changes of variable, translations
/// and added linear terms, plus the lattice duality for the pair (u, v) when v
/// is given. Each report carries the sup residual over a grid of about 1000
/// points covering the relevant part of the dual space.
pub fn conjugate_identities(
    u: &PaFn,
    y: &Point,
    c: f64,
    phi: &AffineMap,
    v: Option<&PaFn>,
) -> Result<Vec<CheckReport>> {
    let n = u.dim();
    if u.domain().is_none() {
        return Err(Error::BadInput("u must have a compact domain".into()));
    }
    if y.dim() != n || phi.dim() != n {
        return Err(Error::DimMismatch { expected: n, got: if y.dim() != n { y.dim() } else { phi.dim() } });
    }
    if !phi.is_unimodular(1e-9) {
        return Err(Error::BadTransform(format!("map has determinant {}", phi.det())));
    }
    let uf = ConvexFn::Pa(u.clone());
    let us = legendre_pa(u)?;
    let gmax = u.pieces().iter().map(|p| p.grad.norm_inf()).fold(0.0, f64::max);
    let r = 1.0 + gmax + y.norm_inf();
    let grid = grid_in_box(&Point::splat(n, -r), &Point::splat(n, r), 1000);
    let mut out = Vec::new();

    let lhs = legendre_pa(&u.add_constant(c))?;
    out.push(compare("constant shift", &grid, |x| lhs.eval(x), |x| us.eval(x) - c));

    let lhs = legendre_pa(&as_pa(uf.compose_affine(phi)?)?)?;
    let mt_inv = phi.matrix().transpose().inverse().ok_or(Error::SingularMap(phi.det()))?;
    let s = phi.shift();
    out.push(compare("change of variables", &grid, |x| lhs.eval(x), |x| {
        let z = mt_inv.mul_vec(x);
        us.eval(&z) - z.dot(&s)
    }));

    let lhs = legendre_pa(&as_pa(uf.translate(y)?)?)?;
    out.push(compare("translation", &grid, |x| lhs.eval(x), |x| us.eval(x) + x.dot(y)));

    let lhs = legendre_pa(&u.add_affine(&AffineFn::new(*y, 0.0)))?;
    out.push(compare("added linear term", &grid, |x| lhs.eval(x), |x| us.eval(&(*x - *y))));

    if let Some(v) = v {
        out.extend(lattice_duality(u, v)?);
    }
    Ok(out)
}

/// (u ∧ v)* = u* ∨ v* and (u ∨ v)* = u* ∧ v*, both under the hypothesis that
/// u ∧ v is convex. A pair whose meet is not convex yields skipped reports.
pub fn lattice_duality(u: &PaFn, v: &PaFn) -> Result<Vec<CheckReport>> {
    let n = u.dim();
    let (uf, vf) = (ConvexFn::Pa(u.clone()), ConvexFn::Pa(v.clone()));
    let m = match meet(&uf, &vf) {
        Ok(m) => as_pa(m)?,
        Err(Error::NotConvex(why)) => {
            return Ok(vec![
                CheckReport::skipped("conjugate of meet", IDENTITY_TOL, why.clone()),
                CheckReport::skipped("conjugate of join", IDENTITY_TOL, why),
            ])
        }
        Err(e) => return Err(e),
    };
    let j = as_pa(join(&uf, &vf)?)?;
    let (us, vs) = (legendre_pa(u)?, legendre_pa(v)?);
    let (ms, js) = (legendre_pa(&m)?, legendre_pa(&j)?);
    let gmax = u.pieces().iter().chain(v.pieces()).map(|p| p.grad.norm_inf()).fold(0.0, f64::max);
    let r = 1.0 + gmax;
    let grid = grid_in_box(&Point::splat(n, -r), &Point::splat(n, r), 1000);
    Ok(vec![
        compare("conjugate of meet", &grid, |x| ms.eval(x), |x| us.eval(x).max(vs.eval(x))),
        compare("conjugate of join", &grid, |x| js.eval(x), |x| us.eval(x).min(vs.eval(x))),
    ])
}

/// All identities folded into one report whose residual is the largest one.
pub fn conjugate_identities_check(
    u: &PaFn,
    y: &Point,
    c: f64,
    phi: &AffineMap,
    v: Option<&PaFn>,
) -> Result<CheckReport> {
    let parts = conjugate_identities(u, y, c, phi, v)?;
    let worst = parts.iter().map(|p| p.residual).fold(0.0, f64::max);
    let summary: Vec<String> = parts.iter().map(|p| format!("{}: {:.3e}", p.name, p.residual)).collect();
    let witnesses = parts.into_iter().flat_map(|p| p.witnesses).collect();
    Ok(CheckReport::new("conjugate identities", worst, IDENTITY_TOL, witnesses).with_note(summary.join("; ")))
}
