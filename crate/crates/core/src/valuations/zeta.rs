use rayon::prelude::*;

use super::conc::ConcFn;
use crate::error::{Error, Result};
use crate::funcs::{ConvexFn, PlqFn};
use crate::geometry::{Halfspace, Point, Polytope};
use crate::measures::pairwise_sum;
use crate::qp::project;

/// Σ over cells ζ(det A_cell) V_n(cell).
pub fn z_zeta_plq(u: &PlqFn, zeta: &ConcFn) -> f64 {
    if u.domain().is_degenerate() {
        return 0.0;
    }
    let terms: Vec<f64> = u.cells().iter().map(|c| zeta.eval(c.q.hessian_det()) * c.poly.volume()).collect();
    pairwise_sum(&terms)
}

/// Quadrature settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOpts {
    /// Grid cells per axis over the bounding box of the domain.
    pub res: usize,
    /// Finite-difference step relative to the domain diameter.
    pub h_rel: f64,
}

impl Default for QuadOpts {
    fn default() -> QuadOpts {
        QuadOpts { res: 128, h_rel: 1e-4 }
    }
}

/// Runs `f` on a pool capped by AFFVAL_THREADS when that variable is set.
pub(crate) fn with_threads<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    let cap = std::env::var("AFFVAL_THREADS").ok().and_then(|s| s.trim().parse::<usize>().ok()).filter(|&k| k > 0);
    match cap.and_then(|k| rayon::ThreadPoolBuilder::new().num_threads(k).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

/// Midpoint quadrature of ζ(det D²f) over `dom`, refined near jumps.
///
/// Hessians come from central differences with step h = h_rel·diam(dom).
/// Sample points closer than 2h to the boundary are moved to the nearest
/// point at distance 2h, so the stencil stays inside the domain. Grid cells
/// cut by the boundary are weighted by the exact volume of their intersection
/// with the domain. Terms are summed in a fixed order, so the result does not
/// depend on the number of threads.
pub fn z_zeta_numeric(
    f: &(dyn Fn(&Point) -> f64 + Sync),
    dom: &Polytope,
    zeta: &ConcFn,
    opts: QuadOpts,
) -> Result<f64> {
    if dom.is_degenerate() {
        return Ok(0.0);
    }
    if opts.res == 0 || !(opts.h_rel > 0.0) {
        return Err(Error::BadParameter("quadrature needs res >= 1 and h_rel > 0".into()));
    }
    let n = dom.dim();
    let (lo, hi) = dom.bbox();
    let m = opts.res;
    let w = Point::from_fn(n, |k| (hi[k] - lo[k]) / m as f64);
    let cell_vol: f64 = (0..n).map(|k| w[k]).product();
    let h = opts.h_rel * dom.diameter();
    let delta = 2.0 * h;
    let inner: Vec<Halfspace> = dom.halfspaces().iter().map(|s| Halfspace::new(s.normal, s.offset - delta)).collect();
    if dom.inset(delta)?.is_none() {
        return Err(Error::BadParameter("domain too thin for the finite-difference step".into()));
    }
    let total = m.pow(n as u32);
    let cell_lo = |idx: usize| {
        let mut ijk = [0usize; 3];
        let mut r = idx;
        for a in (0..n).rev() {
            ijk[a] = r % m;
            r /= m;
        }
        (ijk, Point::from_fn(n, |k| lo[k] + w[k] * ijk[k] as f64))
    };
    let integrand = |x: Point| -> Result<f64> {
        let mut x = x;
        if inner.iter().any(|s| s.excess(&x) > 0.0) {
            x = project(&x, &inner).ok_or_else(|| Error::EvalError("projection into the inset failed".into()))?;
        }
        Ok(zeta.eval(fd_hessian_det(f, &x, h)?.max(0.0)))
    };
    // First pass: one midpoint sample per cell.
    let coarse: Vec<Result<(f64, f64)>> = with_threads(|| {
        (0..total)
            .into_par_iter()
            .map(|idx| {
                let (_, clo) = cell_lo(idx);
                let weight = cell_weight(dom, &clo, &w, cell_vol)?;
                if weight <= 0.0 {
                    return Ok((0.0, 0.0));
                }
                Ok((weight, integrand(clo + w * 0.5)?))
            })
            .collect()
    });
    let coarse: Vec<(f64, f64)> = coarse.into_iter().collect::<Result<_>>()?;
    // Second pass: interior cells whose value jumps against a neighbour are
    // resampled on a finer sub-grid. Hessians of PLQ functions are piecewise
    // constant, and a jump running through a cell costs O(w) per interface.
    let sub: usize = if n <= 2 { 8 } else { 4 };
    let stride = |a: usize| m.pow((n - 1 - a) as u32);
    let terms: Vec<Result<f64>> = with_threads(|| {
        (0..total)
            .into_par_iter()
            .map(|idx| {
                let (weight, v) = coarse[idx];
                if weight <= 0.0 {
                    return Ok(0.0);
                }
                let (ijk, clo) = cell_lo(idx);
                let jumps = weight == cell_vol
                    && (0..n).any(|a| {
                        let mut nb = Vec::with_capacity(2);
                        if ijk[a] > 0 {
                            nb.push(idx - stride(a));
                        }
                        if ijk[a] + 1 < m {
                            nb.push(idx + stride(a));
                        }
                        nb.into_iter().any(|j| {
                            let (wj, vj) = coarse[j];
                            wj > 0.0 && (v - vj).abs() > JUMP_REL * v.abs().max(vj.abs())
                        })
                    });
                if !jumps {
                    return Ok(weight * v);
                }
                let count = sub.pow(n as u32);
                let mut vals = Vec::with_capacity(count);
                for s in 0..count {
                    let mut r = s;
                    let x = Point::from_fn(n, |k| {
                        let j = r % sub;
                        r /= sub;
                        clo[k] + w[k] * (j as f64 + 0.5) / sub as f64
                    });
                    vals.push(integrand(x)?);
                }
                Ok(weight * pairwise_sum(&vals) / count as f64)
            })
            .collect()
    });
    let terms: Vec<f64> = terms.into_iter().collect::<Result<_>>()?;
    Ok(pairwise_sum(&terms))
}

/// Relative difference between neighbouring samples that triggers refinement.
const JUMP_REL: f64 = 1e-2;

/// Volume of the grid cell [clo, clo + w] inside dom.
fn cell_weight(dom: &Polytope, clo: &Point, w: &Point, cell_vol: f64) -> Result<f64> {
    let n = dom.dim();
    let corners: Vec<Point> = (0..1usize << n)
        .map(|mask| Point::from_fn(n, |k| clo[k] + if mask >> k & 1 == 1 { w[k] } else { 0.0 }))
        .collect();
    if corners.iter().all(|c| dom.contains(c)) {
        return Ok(cell_vol);
    }
    if dom.halfspaces().iter().any(|s| corners.iter().all(|c| s.excess(c) >= -dom.tol())) {
        return Ok(0.0);
    }
    let cell = Polytope::hull(&corners)?;
    Ok(cell.intersect(dom)?.map(|p| p.volume()).unwrap_or(0.0))
}

pub(crate) fn fd_hessian_det(f: &(dyn Fn(&Point) -> f64 + Sync), x: &Point, h: f64) -> Result<f64> {
    let n = x.dim();
    let ev = |p: Point| -> Result<f64> {
        let v = f(&p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::EvalError(format!("non-finite sample {v} at {:?}", p.coords())))
        }
    };
    let f0 = ev(*x)?;
    let mut a = crate::geometry::Matrix::zeros(n);
    for i in 0..n {
        let e = Point::unit(n, i) * h;
        a.set(i, i, (ev(*x + e)? - 2.0 * f0 + ev(*x - e)?) / (h * h));
        for j in 0..i {
            let d = Point::unit(n, j) * h;
            let v = (ev(*x + e + d)? - ev(*x + e - d)? - ev(*x - e + d)? + ev(*x - e - d)?) / (4.0 * h * h);
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    Ok(a.det())
}

/// Z_ζ(u), exact for explicit kinds and by quadrature for the implicit ones.
pub fn z_zeta(u: &ConvexFn, zeta: &ConcFn) -> Result<f64> {
    z_zeta_with(u, zeta, QuadOpts::default())
}

pub fn z_zeta_with(u: &ConvexFn, zeta: &ConcFn, opts: QuadOpts) -> Result<f64> {
    let dom = u.domain().ok_or_else(|| Error::BadInput("Z_zeta needs a compact domain".into()))?;
    if dom.is_degenerate() || u.is_cylinder() {
        return Ok(0.0);
    }
    match u {
        ConvexFn::Pa(_) => Ok(0.0),
        ConvexFn::Quadratic { q, domain: Some(d) } => Ok(zeta.eval(q.hessian_det()) * d.volume()),
        ConvexFn::Plq(f) => Ok(z_zeta_plq(f, zeta)),
        ConvexFn::Envelope(e) if e.dim() == 1 && e.domain().is_some() => Ok(z_zeta_plq(&e.to_plq_1d()?, zeta)),
        _ => z_zeta_numeric(&|x| u.eval(x), dom, zeta, opts),
    }
}
