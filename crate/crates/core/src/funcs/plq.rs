//! Piecewise linear-quadratic functions: one quadratic per polytopal cell,
//! accepted only with a convexity certificate.

use crate::error::{Error, Result};
use crate::funcs::{for_each_combination, span_basis, AffineFn, QuadraticFn};
use crate::geometry::{solve_dense, Halfspace, Point, Polytope, EPS_GEOM};

#[derive(Clone, Debug)]
pub struct PlqCell {
    pub poly: Polytope,
    pub q: QuadraticFn,
}

/// Outcome of the checks on one pair of cells sharing an (n-1)-face.
#[derive(Clone, Debug)]
pub struct FacetCheck {
    pub cells: (usize, usize),
    /// max |q_i - q_j| at the face samples
    pub max_jump: f64,
    /// min ⟨∇q_j - ∇q_i, ν⟩ at the face samples, ν pointing from cell i to cell j
    pub min_monotonicity: f64,
}

#[derive(Clone, Debug)]
pub struct Certificate {
    pub min_eigenvalue: f64,
    pub coverage_residual: f64,
    pub facets: Vec<FacetCheck>,
}

#[derive(Clone, Debug)]
pub struct PlqFn {
    dim: usize,
    cells: Vec<PlqCell>,
    bboxes: Vec<(Point, Point)>,
    domain: Polytope,
    certificate: Certificate,
}

fn unit_normal_of_face(face: &Polytope) -> Option<Point> {
    let n = face.dim();
    let v0 = face.vertices()[0];
    let gens: Vec<Point> = face.vertices().iter().map(|v| *v - v0).collect();
    let basis = span_basis(&gens, n);
    if basis.len() + 1 != n {
        return None;
    }
    let mut all = basis;
    for i in 0..n {
        let mut r = Point::unit(n, i);
        for _ in 0..2 {
            for b in &all {
                r -= *b * r.dot(b);
            }
        }
        if r.norm() > 0.3 {
            let u = r * (1.0 / r.norm());
            all.push(u);
            return Some(u);
        }
    }
    None
}

fn bbox_overlap(a: &(Point, Point), b: &(Point, Point), tol: f64) -> bool {
    (0..a.0.dim()).all(|i| a.0[i] <= b.1[i] + tol && b.0[i] <= a.1[i] + tol)
}

/// Certifies convexity of a cell-wise quadratic function: PSD Hessians, a tiling
/// of a convex domain, continuity across shared faces and monotone normal
/// derivatives across every shared facet.
pub fn certify_plq(cells: Vec<(Polytope, QuadraticFn)>) -> Result<PlqFn> {
    let first = cells.first().ok_or(Error::EmptyInput)?;
    let n = first.0.dim();
    for (p, q) in &cells {
        crate::geometry::same_dim(n, p.dim())?;
        crate::geometry::same_dim(n, q.dim())?;
    }
    let any_full = cells.iter().any(|(p, _)| p.is_full_dim());
    let cells: Vec<PlqCell> = cells
        .into_iter()
        .filter(|(p, _)| !any_full || p.is_full_dim())
        .map(|(poly, q)| PlqCell { poly, q })
        .collect();
    let mut min_ev = f64::INFINITY;
    for (i, c) in cells.iter().enumerate() {
        let ev = c.q.a.min_eigenvalue();
        min_ev = min_ev.min(ev);
        if ev < -EPS_GEOM * (1.0 + c.q.a.max_abs()) || !c.q.a.is_symmetric(EPS_GEOM * (1.0 + c.q.a.max_abs())) {
            return Err(Error::NotConvex(format!("cell {i}: Hessian not positive semidefinite (eigenvalue {ev:e})")));
        }
    }
    let all_vertices: Vec<Point> = cells.iter().flat_map(|c| c.poly.vertices().iter().copied()).collect();
    let domain = Polytope::hull(&all_vertices)?;
    let vol_sum: f64 = cells.iter().map(|c| c.poly.volume()).sum();
    let coverage_residual = (vol_sum - domain.volume()).abs();
    if coverage_residual > 1e-8 * domain.volume().max(1.0) {
        return Err(Error::NotConvex(format!(
            "cells cover volume {vol_sum} but their hull has volume {}",
            domain.volume()
        )));
    }
    let bboxes: Vec<(Point, Point)> = cells.iter().map(|c| c.poly.bbox()).collect();
    let mut facets = Vec::new();
    for i in 0..cells.len() {
        for j in i + 1..cells.len() {
            let tol = cells[i].poly.tol().max(cells[j].poly.tol());
            if !bbox_overlap(&bboxes[i], &bboxes[j], 10.0 * tol) {
                continue;
            }
            let Some(face) = cells[i].poly.intersect(&cells[j].poly)? else { continue };
            if any_full && face.is_full_dim() && face.volume() > 1e-9 * domain.volume().max(1.0) {
                return Err(Error::NotConvex(format!("cells {i} and {j} overlap")));
            }
            let (qi, qj) = (&cells[i].q, &cells[j].q);
            let mut samples: Vec<Point> = face.vertices().to_vec();
            samples.push(face.barycenter());
            let mut jump: f64 = 0.0;
            for s in &samples {
                let (a, b) = (qi.eval(s), qj.eval(s));
                jump = jump.max((a - b).abs() / (1.0 + a.abs().max(b.abs())));
            }
            if jump > 10.0 * EPS_GEOM {
                return Err(Error::NotConvex(format!("value jump {jump:e} across the face between cells {i} and {j}")));
            }
            if !(any_full && face.aff_dim() + 1 == n) {
                continue;
            }
            let Some(mut nu) = unit_normal_of_face(&face) else { continue };
            if nu.dot(&(cells[j].poly.barycenter() - cells[i].poly.barycenter())) < 0.0 {
                nu = -nu;
            }
            let mut mono = f64::INFINITY;
            for s in &samples {
                let d = qj.gradient(s) - qi.gradient(s);
                let scale = 1.0 + qj.gradient(s).norm().max(qi.gradient(s).norm());
                mono = mono.min(d.dot(&nu) / scale);
            }
            if mono < -10.0 * EPS_GEOM {
                return Err(Error::NotConvex(format!(
                    "gradient monotonicity {mono:e} fails across the facet between cells {i} and {j}"
                )));
            }
            facets.push(FacetCheck { cells: (i, j), max_jump: jump, min_monotonicity: mono });
        }
    }
    Ok(PlqFn {
        dim: n,
        cells,
        bboxes,
        domain,
        certificate: Certificate { min_eigenvalue: min_ev, coverage_residual, facets },
    })
}

impl PlqFn {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[PlqCell] {
        &self.cells
    }

    pub fn domain(&self) -> &Polytope {
        &self.domain
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    pub fn eval(&self, x: &Point) -> f64 {
        if !self.domain.contains(x) {
            return f64::INFINITY;
        }
        let mut best: Option<(f64, usize)> = None;
        for (i, c) in self.cells.iter().enumerate() {
            let tol = 10.0 * c.poly.tol();
            let (lo, hi) = &self.bboxes[i];
            if (0..self.dim).any(|k| x[k] < lo[k] - tol || x[k] > hi[k] + tol) {
                continue;
            }
            let e = c.poly.max_excess(x);
            if e <= c.poly.tol() {
                return c.q.eval(x);
            }
            if best.is_none_or(|(b, _)| e < b) {
                best = Some((e, i));
            }
        }
        // inside the domain but between cells by rounding: nearest cell
        match best {
            Some((_, i)) => self.cells[i].q.eval(x),
            None => self
                .cells
                .iter()
                .min_by(|a, b| a.poly.max_excess(x).total_cmp(&b.poly.max_excess(x)))
                .map(|c| c.q.eval(x))
                .unwrap_or(f64::INFINITY),
        }
    }

    /// Cells containing x.
    pub fn active_cells(&self, x: &Point) -> Vec<&PlqCell> {
        self.cells.iter().filter(|c| c.poly.contains_tol(x, 10.0 * c.poly.tol())).collect()
    }

    pub fn lipschitz_constant(&self) -> f64 {
        self.cells
            .iter()
            .flat_map(|c| c.poly.vertices().iter().map(move |v| c.q.gradient(v).norm()))
            .fold(0.0, f64::max)
    }

    pub fn add_affine(&self, l: &AffineFn) -> PlqFn {
        let mut f = self.clone();
        for c in &mut f.cells {
            c.q = c.q.add_affine(l);
        }
        f
    }
}

/// (min, max) of a quadratic over a polytope, from the stationary points of its
/// restriction to every face.
pub(crate) fn quad_extrema(q: &QuadraticFn, p: &Polytope) -> (f64, f64) {
    let n = p.dim();
    let hs: &[Halfspace] = p.halfspaces();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in p.vertices() {
        let val = q.eval(v);
        lo = lo.min(val);
        hi = hi.max(val);
    }
    for k in 0..n {
        for_each_combination(hs.len(), k, &mut |sub| {
            let sz = n + k;
            let mut a = vec![0.0; sz * sz];
            let mut rhs = vec![0.0; sz];
            for i in 0..n {
                for j in 0..n {
                    a[i * sz + j] = q.a.get(i, j);
                }
                rhs[i] = -q.b[i];
            }
            for (r, &h) in sub.iter().enumerate() {
                for j in 0..n {
                    a[(n + r) * sz + j] = hs[h].normal[j];
                    a[j * sz + n + r] = hs[h].normal[j];
                }
                rhs[n + r] = hs[h].offset;
            }
            if let Some(sol) = solve_dense(sz, &a, &rhs) {
                let x = Point::new(&sol[..n]);
                if p.contains(&x) {
                    let val = q.eval(&x);
                    lo = lo.min(val);
                    hi = hi.max(val);
                }
            }
        });
    }
    (lo, hi)
}

/// Greedily merges cells carrying the same quadratic whose union is convex.
pub(crate) fn simplify_cells(mut cells: Vec<(Polytope, QuadraticFn)>) -> Vec<(Polytope, QuadraticFn)> {
    loop {
        let mut merged = false;
        'search: for i in 0..cells.len() {
            for j in i + 1..cells.len() {
                let scale = 1.0 + cells[i].1.a.max_abs() + cells[i].1.b.norm_inf() + cells[i].1.c.abs();
                if !cells[i].1.approx_eq(&cells[j].1, 1e-12 * scale) {
                    continue;
                }
                let mut pts = cells[i].0.vertices().to_vec();
                pts.extend_from_slice(cells[j].0.vertices());
                let Ok(h) = Polytope::hull(&pts) else { continue };
                let sum = cells[i].0.volume() + cells[j].0.volume();
                if (h.volume() - sum).abs() <= 1e-10 * h.volume().max(1.0) {
                    let q = cells[i].1;
                    cells.remove(j);
                    cells[i] = (h, q);
                    merged = true;
                    break 'search;
                }
            }
        }
        if !merged {
            return cells;
        }
    }
}
