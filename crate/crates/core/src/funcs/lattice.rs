//! Pointwise minimum and maximum of convex functions.

use crate::error::{Error, Result};
use crate::funcs::{certify_plq, quad_extrema, simplify_cells, AffineFn, ConvexFn, PaFn, PlqFn, QuadraticFn};
use crate::geometry::{same_dim, Halfspace, Point, Polytope, EPS_GEOM};
use crate::transforms::legendre_pa;

fn as_pa(u: &ConvexFn) -> Option<PaFn> {
    match u {
        ConvexFn::Pa(f) => Some(f.clone()),
        ConvexFn::Affine(l) => Some(PaFn::from_parts(l.dim(), vec![*l], None)),
        _ => None,
    }
}

fn intersect_domains(a: Option<&Polytope>, b: Option<&Polytope>) -> Result<Option<Polytope>> {
    match (a, b) {
        (None, None) => Ok(None),
        (Some(p), None) | (None, Some(p)) => Ok(Some(p.clone())),
        (Some(p), Some(q)) => p.intersect(q)?.map(Some).ok_or(Error::EmptyDomain),
    }
}

/// u ∨ v.
pub fn join(u: &ConvexFn, v: &ConvexFn) -> Result<ConvexFn> {
    same_dim(u.dim(), v.dim())?;
    if let (Some(a), Some(b)) = (as_pa(u), as_pa(v)) {
        let dom = intersect_domains(a.domain(), b.domain())?;
        let mut pieces = a.pieces().to_vec();
        pieces.extend_from_slice(b.pieces());
        return Ok(ConvexFn::Pa(PaFn::new(pieces, dom)?));
    }
    let (a, b) = (u.to_plq()?, v.to_plq()?);
    Ok(ConvexFn::Plq(plq_lattice(&a, &b, true)?))
}

/// u ∧ v, when it is convex; `NotConvex` otherwise.
pub fn meet(u: &ConvexFn, v: &ConvexFn) -> Result<ConvexFn> {
    same_dim(u.dim(), v.dim())?;
    if let (Some(a), Some(b)) = (as_pa(u), as_pa(v)) {
        return pa_meet(&a, &b).map(ConvexFn::Pa);
    }
    let (a, b) = (u.to_plq()?, v.to_plq()?);
    Ok(ConvexFn::Plq(plq_lattice(&a, &b, false)?))
}

fn union_is_convex(p: &Polytope, q: &Polytope) -> Result<Option<Polytope>> {
    let mut pts = p.vertices().to_vec();
    pts.extend_from_slice(q.vertices());
    let h = Polytope::hull(&pts)?;
    let inter = p.intersect(q)?.map(|i| i.volume()).unwrap_or(0.0);
    let union = p.volume() + q.volume() - inter;
    if (h.volume() - union).abs() <= 1e-9 * h.volume().max(1.0) && (h.is_full_dim() || h.same_as(p, 1e-9) || h.same_as(q, 1e-9)) {
        Ok(Some(h))
    } else {
        Ok(None)
    }
}

/// Regular grid with about `target` points over the box [lo, hi] (inclusive).
pub(crate) fn grid_in_box(lo: &Point, hi: &Point, target: usize) -> Vec<Point> {
    let n = lo.dim();
    let per = ((target as f64).powf(1.0 / n as f64).ceil() as usize).max(2);
    let mut pts = Vec::with_capacity(per.pow(n as u32));
    let mut idx = vec![0usize; n];
    loop {
        pts.push(Point::from_fn(n, |i| lo[i] + (hi[i] - lo[i]) * idx[i] as f64 / (per - 1) as f64));
        let mut k = 0;
        while k < n {
            idx[k] += 1;
            if idx[k] < per {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            return pts;
        }
    }
}

fn pa_meet(a: &PaFn, b: &PaFn) -> Result<PaFn> {
    let not_convex = || Error::NotConvex("pointwise minimum is not convex".into());
    let (sa, sb) = (legendre_pa(a)?, legendre_pa(b)?);
    let joined = join(&ConvexFn::Pa(sa), &ConvexFn::Pa(sb)).map_err(|e| match e {
        Error::EmptyDomain => not_convex(),
        e => e,
    })?;
    let ConvexFn::Pa(j) = joined else { unreachable!() };
    let w = legendre_pa(&j)?;
    // the conjugate route yields the convex envelope of min(a, b); accept only if
    // it coincides with the pointwise minimum
    let region = match (a.domain(), b.domain()) {
        (Some(p), Some(q)) => {
            let h = union_is_convex(p, q)?.ok_or_else(not_convex)?;
            Some(h)
        }
        _ => None,
    };
    let mut probes: Vec<Point> = Vec::new();
    let (lo, hi) = match &region {
        Some(h) => h.bbox(),
        None => {
            let mut pts: Vec<Point> = w.vertices().iter().map(|v| v.x).collect();
            pts.extend(a.vertices().iter().map(|v| v.x));
            pts.extend(b.vertices().iter().map(|v| v.x));
            pts.push(Point::zeros(a.dim()));
            let h = Polytope::hull(&pts)?;
            let (lo, hi) = h.bbox();
            let pad = 1.0 + (hi - lo).norm_inf();
            (lo - Point::splat(a.dim(), pad), hi + Point::splat(a.dim(), pad))
        }
    };
    probes.extend(grid_in_box(&lo, &hi, 1000));
    for f in [a, b] {
        if let Some(d) = f.domain() {
            probes.extend_from_slice(d.vertices());
        }
        probes.extend(f.vertices().iter().map(|v| v.x));
    }
    for x in probes {
        if let Some(h) = &region {
            if !h.contains(&x) {
                continue;
            }
        }
        let m = a.eval(&x).min(b.eval(&x));
        let wx = w.eval(&x);
        let ok = if m.is_finite() { (wx - m).abs() <= 1e-9 * (1.0 + m.abs()) } else { !wx.is_finite() };
        if !ok {
            return Err(not_convex());
        }
    }
    Ok(w)
}

/// Pieces of `cell` outside the polytope `d`, as convex polytopes.
fn outside_parts(cell: &Polytope, d: &Polytope) -> Result<Vec<Polytope>> {
    let mut out = Vec::new();
    let mut inside: Vec<Halfspace> = Vec::new();
    for h in d.halfspaces() {
        let mut cons = inside.clone();
        cons.push(Halfspace::new(-h.normal, -h.offset));
        if let Some(p) = cell.cut(&cons)? {
            if p.is_full_dim() {
                out.push(p);
            }
        }
        inside.push(*h);
    }
    Ok(out)
}

/// Splits the cell `p` between two quadratics, keeping the larger (`max`) or
/// smaller one on each part.
fn split_cell(p: &Polytope, qa: &QuadraticFn, qb: &QuadraticFn, max: bool) -> Result<Vec<(Polytope, QuadraticFn)>> {
    let diff = if max { qa.sub(qb) } else { qb.sub(qa) };
    // diff >= 0 where qa wins
    let scale = 1.0 + qa.a.max_abs() + qb.a.max_abs() + qa.b.norm_inf() + qb.b.norm_inf() + qa.c.abs() + qb.c.abs();
    let tol = 10.0 * EPS_GEOM * scale;
    if diff.a.max_abs() <= 1e-12 * scale {
        let l = AffineFn::new(diff.b, diff.c);
        if l.grad.norm() <= 1e-12 * scale {
            return Ok(vec![(p.clone(), if l.c >= 0.0 { *qa } else { *qb })]);
        }
        let mut out = Vec::new();
        for (h, q) in [(Halfspace::new(-l.grad, l.c), qa), (Halfspace::new(l.grad, -l.c), qb)] {
            if let Some(part) = p.cut(&[h])? {
                if part.aff_dim() == p.aff_dim() && part.volume() > 1e-12 * p.volume() {
                    out.push((part, *q));
                }
            }
        }
        if out.is_empty() {
            out.push((p.clone(), *qa));
        }
        return Ok(out);
    }
    let (mn, mx) = quad_extrema(&diff, p);
    if mn >= -tol {
        Ok(vec![(p.clone(), *qa)])
    } else if mx <= tol {
        Ok(vec![(p.clone(), *qb)])
    } else {
        Err(Error::NotRepresentable("the two quadratics cross along a curved set inside a cell".into()))
    }
}

fn plq_lattice(u: &PlqFn, v: &PlqFn, max: bool) -> Result<PlqFn> {
    let common = u.domain().intersect(v.domain())?;
    let mut cells: Vec<(Polytope, QuadraticFn)> = Vec::new();
    if max {
        let dom = common.ok_or(Error::EmptyDomain)?;
        for cu in u.cells() {
            for cv in v.cells() {
                let Some(i) = cu.poly.intersect(&cv.poly)? else { continue };
                if i.aff_dim() < dom.aff_dim() {
                    continue;
                }
                cells.extend(split_cell(&i, &cu.q, &cv.q, true)?);
            }
        }
    } else {
        if union_is_convex(u.domain(), v.domain())?.is_none() {
            return Err(Error::NotConvex("union of the domains is not convex".into()));
        }
        if let Some(dom) = &common {
            for cu in u.cells() {
                for cv in v.cells() {
                    let Some(i) = cu.poly.intersect(&cv.poly)? else { continue };
                    if !i.is_full_dim() || !dom.is_full_dim() {
                        continue;
                    }
                    cells.extend(split_cell(&i, &cu.q, &cv.q, false)?);
                }
            }
        }
        for (f, other) in [(u, v.domain()), (v, u.domain())] {
            for c in f.cells() {
                for part in outside_parts(&c.poly, other)? {
                    cells.push((part, c.q));
                }
            }
        }
    }
    if cells.is_empty() {
        return Err(Error::EmptyDomain);
    }
    certify_plq(simplify_cells(cells))
}
