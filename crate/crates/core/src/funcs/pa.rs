//! Piecewise-affine functions `max_i (g_i·x + c_i)`, optionally restricted to a polytope.
//!
//! The combinatorics of a max-of-affines (and of sums of several of them) is
//! read off its subdivision vertices: points where enough pieces and domain
//! facets are simultaneously tight to pin down a point. They drive pruning,
//! cell extraction, conjugation and Monge-Ampere atoms.

use crate::error::{Error, Result};
use crate::funcs::AffineFn;
use crate::geometry::{check_dim, same_dim, solve_rows, Halfspace, Polytope, Point, EPS_GEOM};

/// Max of affine pieces, plus the indicator of `domain` when present.
#[derive(Clone, Debug)]
pub struct PaFn {
    dim: usize,
    pieces: Vec<AffineFn>,
    domain: Option<Polytope>,
}

/// Tolerance for "piece attains the max".
pub(crate) fn act_tol(v: f64) -> f64 {
    1e-8 * (1.0 + v.abs())
}

pub(crate) fn max_affine(pieces: &[AffineFn], x: &Point) -> f64 {
    pieces.iter().map(|p| p.eval(x)).fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn active_pieces(pieces: &[AffineFn], x: &Point) -> (f64, Vec<usize>) {
    let vals: Vec<f64> = pieces.iter().map(|p| p.eval(x)).collect();
    let m = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = act_tol(m);
    (m, (0..vals.len()).filter(|&i| vals[i] >= m - tol).collect())
}

impl PaFn {
    /// Builds and prunes pieces that are nowhere strictly active.
    pub fn new(pieces: Vec<AffineFn>, domain: Option<Polytope>) -> Result<PaFn> {
        let first = pieces.first().ok_or(Error::EmptyInput)?;
        let n = first.dim();
        check_dim(n)?;
        for p in &pieces {
            same_dim(n, p.dim())?;
            if !p.grad.is_finite() || !p.c.is_finite() {
                return Err(Error::BadInput("non-finite affine piece".into()));
            }
        }
        if let Some(d) = &domain {
            same_dim(n, d.dim())?;
        }
        let f = PaFn { dim: n, pieces, domain };
        Ok(f.pruned())
    }

    /// A finite-valued max of affines on R^n.
    pub fn finite(pieces: Vec<AffineFn>) -> Result<PaFn> {
        PaFn::new(pieces, None)
    }

    /// The indicator of a polytope: a single zero piece.
    pub fn indicator(p: Polytope) -> PaFn {
        PaFn { dim: p.dim(), pieces: vec![AffineFn::zero(p.dim())], domain: Some(p) }
    }

    /// No pruning; callers guarantee the pieces are already essential.
    pub(crate) fn from_parts(dim: usize, pieces: Vec<AffineFn>, domain: Option<Polytope>) -> PaFn {
        PaFn { dim, pieces, domain }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn pieces(&self) -> &[AffineFn] {
        &self.pieces
    }

    pub fn domain(&self) -> Option<&Polytope> {
        self.domain.as_ref()
    }

    pub fn is_finite_valued(&self) -> bool {
        self.domain.is_none()
    }

    pub fn eval(&self, x: &Point) -> f64 {
        match &self.domain {
            Some(d) if !d.contains(x) => f64::INFINITY,
            _ => max_affine(&self.pieces, x),
        }
    }

    pub fn with_domain(&self, domain: Option<Polytope>) -> Result<PaFn> {
        PaFn::new(self.pieces.clone(), domain)
    }

    /// Adds `c` to every piece.
    pub fn add_constant(&self, c: f64) -> PaFn {
        let pieces = self.pieces.iter().map(|p| AffineFn::new(p.grad, p.c + c)).collect();
        PaFn { pieces, ..self.clone() }
    }

    /// Adds the affine function `l` to every piece.
    pub fn add_affine(&self, l: &AffineFn) -> PaFn {
        let pieces = self.pieces.iter().map(|p| AffineFn::new(p.grad + l.grad, p.c + l.c)).collect();
        PaFn { pieces, ..self.clone() }
    }

    /// Facet halfspaces of the domain (empty when finite-valued).
    pub(crate) fn facets(&self) -> &[Halfspace] {
        self.domain.as_ref().map(|d| d.halfspaces()).unwrap_or(&[])
    }

    /// Subdivision vertices of the function with its domain.
    pub(crate) fn vertices(&self) -> Vec<SubdivVertex> {
        subdivision_vertices(self.dim, &[&self.pieces], self.facets())
    }

    /// Cells {x in dom : piece i attains the max}, one per piece, for a compact domain.
    pub fn cells(&self) -> Result<Vec<(Polytope, AffineFn)>> {
        let dom = self
            .domain
            .as_ref()
            .ok_or_else(|| Error::Unsupported("cells of a finite-valued PA function are unbounded".into()))?;
        if self.pieces.len() == 1 {
            return Ok(vec![(dom.clone(), self.pieces[0])]);
        }
        let verts = self.vertices();
        let mut out = Vec::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let pts: Vec<Point> = verts.iter().filter(|v| v.active[0].contains(&i)).map(|v| v.x).collect();
            if pts.is_empty() {
                continue;
            }
            let cell = Polytope::hull(&pts)?;
            if cell.aff_dim() == dom.aff_dim() {
                out.push((cell, *p));
            }
        }
        Ok(out)
    }

    fn pruned(mut self) -> PaFn {
        // identical pieces first
        let mut uniq: Vec<AffineFn> = Vec::with_capacity(self.pieces.len());
        for p in &self.pieces {
            // equal gradients: the larger intercept dominates everywhere
            if let Some(q) = uniq.iter_mut().find(|q| q.grad.approx_eq(&p.grad, 1e-12 * (1.0 + p.grad.norm_inf()))) {
                q.c = q.c.max(p.c);
                continue;
            }
            uniq.push(*p);
        }
        self.pieces = uniq;
        if self.pieces.len() == 1 {
            return self;
        }
        let verts = self.vertices();
        let keep: Vec<bool> = match &self.domain {
            Some(dom) => (0..self.pieces.len())
                .map(|i| {
                    let pts: Vec<Point> = verts.iter().filter(|v| v.active[0].contains(&i)).map(|v| v.x).collect();
                    affine_rank(&pts) == dom.aff_dim()
                })
                .collect(),
            None => {
                let frame = gradient_frame(&[&self.pieces]);
                (0..self.pieces.len())
                    .map(|i| {
                        verts.iter().any(|v| {
                            v.active[0].contains(&i) && is_extreme(&frame, &self.pieces, &v.active[0], i)
                        })
                    })
                    .collect()
            }
        };
        let pieces: Vec<AffineFn> = self.pieces.iter().zip(&keep).filter(|(_, k)| **k).map(|(p, _)| *p).collect();
        if !pieces.is_empty() {
            self.pieces = pieces;
        }
        self
    }
}

/// Affine dimension of a point set (-1 mapped to 0 for the empty set).
pub(crate) fn affine_rank(pts: &[Point]) -> usize {
    if pts.is_empty() {
        return 0;
    }
    let gens: Vec<Point> = pts.iter().map(|p| *p - pts[0]).collect();
    span_basis(&gens, pts[0].dim()).len()
}

/// Orthonormal basis of span(gens).
pub(crate) fn span_basis(gens: &[Point], n: usize) -> Vec<Point> {
    let scale = gens.iter().fold(1.0f64, |s, g| s.max(g.norm_inf()));
    let tol = 1e-10 * scale;
    let mut basis: Vec<Point> = Vec::new();
    while basis.len() < n {
        let mut best: (f64, Option<Point>) = (0.0, None);
        for g in gens {
            let mut r = *g;
            for _ in 0..2 {
                for b in &basis {
                    r -= *b * r.dot(b);
                }
            }
            if r.norm() > best.0 {
                best = (r.norm(), Some(r));
            }
        }
        match best {
            (d, Some(r)) if d > tol => basis.push(r * (1.0 / d)),
            _ => break,
        }
    }
    basis
}

/// Frame of the affine span of the gradients of all summands.
pub(crate) struct GradFrame {
    pub basis: Vec<Point>,
}

pub(crate) fn gradient_frame(summands: &[&[AffineFn]]) -> GradFrame {
    let n = summands[0][0].dim();
    let mut gens = Vec::new();
    for s in summands {
        for p in &s[1..] {
            gens.push(p.grad - s[0].grad);
        }
    }
    GradFrame { basis: span_basis(&gens, n) }
}

impl GradFrame {
    fn coords(&self, p: &Point) -> Point {
        Point::from_fn(self.basis.len(), |i| p.dot(&self.basis[i]))
    }
}

/// Whether gradient i is a vertex of conv{gradients of `active`}.
fn is_extreme(frame: &GradFrame, pieces: &[AffineFn], active: &[usize], i: usize) -> bool {
    let k = frame.basis.len();
    if k == 0 || active.len() == 1 {
        return true;
    }
    let pts: Vec<Point> = active.iter().map(|&j| frame.coords(&pieces[j].grad)).collect();
    let Ok(h) = Polytope::hull(&pts) else { return false };
    let gi = frame.coords(&pieces[i].grad);
    h.vertices().iter().any(|v| v.approx_eq(&gi, 1e-9 * (1.0 + gi.norm_inf())))
}

/// A subdivision vertex with the active pieces of every summand.
#[derive(Clone, Debug)]
pub(crate) struct SubdivVertex {
    pub x: Point,
    pub active: Vec<Vec<usize>>,
    /// Sum over summands of their max at x.
    pub value: f64,
}

/// Vertices of the polyhedral subdivision of `sum_s max(summand_s) + I_{facets}`.
///
/// For finite-valued inputs whose gradients do not affinely span R^n the
/// subdivision has a lineality space; vertices are then computed in the span of
/// the gradient differences and returned as representatives lying in that span.
pub(crate) fn subdivision_vertices(n: usize, summands: &[&[AffineFn]], facets: &[Halfspace]) -> Vec<SubdivVertex> {
    let frame = gradient_frame(summands);
    let k = frame.basis.len();
    let reduced = facets.is_empty() && k < n;
    let (d, red_summands, lift): (usize, Vec<Vec<AffineFn>>, Box<dyn Fn(&Point) -> Point>) = if reduced {
        let rs = summands
            .iter()
            .map(|s| s.iter().map(|p| AffineFn::new(frame.coords(&p.grad), p.c)).collect())
            .collect();
        let basis = frame.basis.clone();
        (k, rs, Box::new(move |xr: &Point| (0..basis.len()).fold(Point::zeros(n), |s, i| s + basis[i] * xr[i])))
    } else {
        (n, summands.iter().map(|s| s.to_vec()).collect(), Box::new(|x: &Point| *x))
    };
    let candidates = if d == 0 {
        vec![Point::zeros(0)]
    } else {
        let refs: Vec<&[AffineFn]> = red_summands.iter().map(|s| s.as_slice()).collect();
        enumerate_candidates(d, &refs, facets)
    };
    let mut out: Vec<SubdivVertex> = candidates
        .into_iter()
        .map(|xr| {
            let x = lift(&xr);
            let mut value = 0.0;
            let active = summands
                .iter()
                .map(|s| {
                    let (m, a) = active_pieces(s, &x);
                    value += m;
                    a
                })
                .collect();
            SubdivVertex { x, active, value }
        })
        .collect();
    out.sort_by(|a, b| a.x.lex_cmp(&b.x));
    out
}

fn enumerate_candidates(d: usize, summands: &[&[AffineFn]], facets: &[Halfspace]) -> Vec<Point> {
    let fscale = facets.iter().fold(1.0f64, |s, h| s.max(h.offset.abs()));
    let ftol = EPS_GEOM * fscale;
    let mut found: Vec<Point> = Vec::new();
    let mut rows: Vec<Point> = Vec::with_capacity(d);
    let mut rhs: Vec<f64> = Vec::with_capacity(d);
    let mut required: Vec<(usize, Vec<usize>)> = Vec::new();

    let check = |rows: &[Point], rhs: &[f64], required: &[(usize, Vec<usize>)], found: &mut Vec<Point>| {
        let Some(x) = solve_rows(rows, rhs) else { return };
        if facets.iter().any(|h| h.excess(&x) > ftol) {
            return;
        }
        for (s, idx) in required {
            let m = max_affine(summands[*s], &x);
            let tol = act_tol(m);
            if idx.iter().any(|&i| summands[*s][i].eval(&x) < m - tol) {
                return;
            }
        }
        let dtol = 1e-9 * (1.0 + x.norm_inf());
        if !found.iter().any(|p| p.approx_eq(&x, dtol)) {
            found.push(x);
        }
    };

    for nf in 0..=d.min(facets.len()) {
        for_each_combination(facets.len(), nf, &mut |fsub| {
            rows.clear();
            rhs.clear();
            for &f in fsub {
                rows.push(facets[f].normal);
                rhs.push(facets[f].offset);
            }
            distribute(summands, 0, d - nf, &mut rows, &mut rhs, &mut required, &mut |r, b, req| check(r, b, req, &mut found));
        });
    }
    found
}

/// Assigns the remaining equation budget to summands, each contributing
/// (subset size - 1) piece-difference equations.
fn distribute(
    summands: &[&[AffineFn]],
    s: usize,
    remaining: usize,
    rows: &mut Vec<Point>,
    rhs: &mut Vec<f64>,
    required: &mut Vec<(usize, Vec<usize>)>,
    leaf: &mut dyn FnMut(&[Point], &[f64], &[(usize, Vec<usize>)]),
) {
    if s == summands.len() {
        if remaining == 0 {
            leaf(rows, rhs, required);
        }
        return;
    }
    let pieces = summands[s];
    for e in 0..=remaining {
        if e == 0 {
            distribute(summands, s + 1, remaining, rows, rhs, required, leaf);
            continue;
        }
        if e + 1 > pieces.len() {
            break;
        }
        for_each_combination(pieces.len(), e + 1, &mut |sub| {
            let base = rows.len();
            let p0 = pieces[sub[0]];
            for &j in &sub[1..] {
                rows.push(pieces[j].grad - p0.grad);
                rhs.push(p0.c - pieces[j].c);
            }
            required.push((s, sub.to_vec()));
            distribute(summands, s + 1, remaining - e, rows, rhs, required, leaf);
            required.pop();
            rows.truncate(base);
            rhs.truncate(base);
        });
    }
}

/// Calls `f` on every k-subset of 0..m in lexicographic order.
pub(crate) fn for_each_combination(m: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        let mut advanced = false;
        while i > 0 {
            i -= 1;
            if idx[i] < m - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            return;
        }
    }
}
