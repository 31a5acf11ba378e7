use super::hull::{
    affine_frame, bbox_diameter, complement, cyclic_order, dedup_points, enumerate_vertices, has_recession, hull_full,
    shoelace,
};
use super::{check_dim, same_dim, scaled_tol, AffineMap, Point};
use crate::error::{Error, Result};

/// The halfspace `normal·x <= offset`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Halfspace {
    pub normal: Point,
    pub offset: f64,
}

impl Halfspace {
    pub fn new(normal: Point, offset: f64) -> Halfspace {
        Halfspace { normal, offset }
    }

    /// Signed violation `normal·x - offset` (positive outside).
    #[inline]
    pub fn excess(&self, x: &Point) -> f64 {
        self.normal.dot(x) - self.offset
    }

    fn normalized(&self) -> Option<Halfspace> {
        let len = self.normal.norm();
        if len <= 1e-14 {
            None
        } else {
            Some(Halfspace::new(self.normal * (1.0 / len), self.offset / len))
        }
    }
}

/// Bounded convex polytope in R^n, n <= 3.
#[derive(Clone, Debug)]
pub struct Polytope {
    dim: usize,
    aff_dim: usize,
    vertices: Vec<Point>,
    halfspaces: Vec<Halfspace>,
    volume: f64,
    tol: f64,
}

impl PartialEq for Polytope {
    fn eq(&self, other: &Polytope) -> bool {
        self.same_as(other, self.tol.max(other.tol) * 10.0)
    }
}

impl Polytope {
    /// Convex hull of a point set. Lower-dimensional inputs give a degenerate
    /// polytope (see [`Polytope::is_degenerate`]).
    pub fn hull(points: &[Point]) -> Result<Polytope> {
        let first = points.first().ok_or(Error::EmptyInput)?;
        let n = first.dim();
        check_dim(n)?;
        for p in points {
            same_dim(n, p.dim())?;
            if !p.is_finite() {
                return Err(Error::BadInput("non-finite coordinate".into()));
            }
        }
        let tol = scaled_tol(bbox_diameter(points));
        let pts = dedup_points(points, tol);
        let (origin, basis) = affine_frame(&pts, tol);
        let k = basis.len();
        let (mut vertices, mut halfspaces) = if k == n {
            let (idx, hs) = hull_full(&pts, tol);
            (idx.into_iter().map(|i| pts[i]).collect::<Vec<_>>(), hs)
        } else {
            let mut hs = Vec::new();
            for w in complement(&basis, n) {
                let o = w.dot(&origin);
                hs.push(Halfspace::new(w, o));
                hs.push(Halfspace::new(-w, -o));
            }
            if k == 0 {
                (vec![pts[0]], hs)
            } else {
                let local: Vec<Point> =
                    pts.iter().map(|p| Point::from_fn(k, |i| (*p - origin).dot(&basis[i]))).collect();
                let (idx, lhs) = hull_full(&local, tol);
                for h in lhs {
                    let w = basis.iter().enumerate().fold(Point::zeros(n), |s, (i, b)| s + *b * h.normal[i]);
                    hs.push(Halfspace::new(w, h.offset + w.dot(&origin)));
                }
                (idx.into_iter().map(|i| pts[i]).collect(), hs)
            }
        };
        vertices.sort_by(|a, b| a.lex_cmp(b));
        vertices.dedup_by(|a, b| a.approx_eq(b, tol));
        halfspaces.sort_by(|a, b| a.normal.lex_cmp(&b.normal).then(a.offset.total_cmp(&b.offset)));
        let mut p = Polytope { dim: n, aff_dim: k, vertices, halfspaces, volume: 0.0, tol };
        p.volume = p.compute_volume();
        Ok(p)
    }

    /// Polytope {x : h.normal·x <= h.offset for all h}; `Ok(None)` when empty.
    pub fn from_halfspaces(n: usize, hs: &[Halfspace]) -> Result<Option<Polytope>> {
        check_dim(n)?;
        let mut norm = Vec::with_capacity(hs.len());
        let mut scale: f64 = 1.0;
        for h in hs {
            same_dim(n, h.normal.dim())?;
            if !h.normal.is_finite() || !h.offset.is_finite() {
                return Err(Error::BadInput("non-finite halfspace".into()));
            }
            match h.normalized() {
                Some(u) => {
                    scale = scale.max(u.offset.abs());
                    norm.push(u);
                }
                None if h.offset < -1e-12 => return Ok(None),
                None => {}
            }
        }
        let tol = scaled_tol(2.0 * scale);
        if norm.is_empty() || has_recession(n, &norm) {
            // an unbounded system; empty sets are still reported as empty
            let mut guarded = norm.clone();
            let g = 1e6 * scale;
            for i in 0..n {
                guarded.push(Halfspace::new(Point::unit(n, i), g));
                guarded.push(Halfspace::new(-Point::unit(n, i), g));
            }
            return if enumerate_vertices(n, &guarded, tol).is_empty() { Ok(None) } else { Err(Error::Unbounded) };
        }
        let verts = enumerate_vertices(n, &norm, tol);
        if verts.is_empty() {
            return Ok(None);
        }
        Polytope::hull(&verts).map(Some)
    }

    /// The box [lo_1,hi_1] x ... x [lo_n,hi_n].
    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Result<Polytope> {
        same_dim(lo.len(), hi.len())?;
        let n = lo.len();
        check_dim(n)?;
        let mut pts = Vec::with_capacity(1 << n);
        for mask in 0..(1usize << n) {
            pts.push(Point::from_fn(n, |i| if mask >> i & 1 == 1 { hi[i] } else { lo[i] }));
        }
        Polytope::hull(&pts)
    }

    /// The cube [-r, r]^n.
    pub fn cube(n: usize, r: f64) -> Result<Polytope> {
        Polytope::cuboid(&vec![-r; n], &vec![r; n])
    }

    /// The cube [-r, r]^n shifted by `center`.
    pub fn cube_at(center: &Point, r: f64) -> Result<Polytope> {
        let lo: Vec<f64> = center.coords().iter().map(|c| c - r).collect();
        let hi: Vec<f64> = center.coords().iter().map(|c| c + r).collect();
        Polytope::cuboid(&lo, &hi)
    }

    pub fn point(p: Point) -> Result<Polytope> {
        Polytope::hull(&[p])
    }

    pub fn segment(a: Point, b: Point) -> Result<Polytope> {
        Polytope::hull(&[a, b])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the affine hull.
    pub fn aff_dim(&self) -> usize {
        self.aff_dim
    }

    pub fn is_degenerate(&self) -> bool {
        self.aff_dim < self.dim
    }

    pub fn is_full_dim(&self) -> bool {
        self.aff_dim == self.dim
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// Working tolerance for this polytope's scale.
    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// Mean of the vertices (an interior point for full-dimensional polytopes).
    pub fn barycenter(&self) -> Point {
        let s = self.vertices.iter().fold(Point::zeros(self.dim), |s, p| s + *p);
        s * (1.0 / self.vertices.len() as f64)
    }

    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for v in &self.vertices {
            for i in 0..self.dim {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (lo, hi)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max(a.dist(b));
            }
        }
        d
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.contains_tol(x, self.tol)
    }

    pub fn contains_tol(&self, x: &Point, tol: f64) -> bool {
        x.dim() == self.dim && self.halfspaces.iter().all(|h| h.excess(x) <= tol)
    }

    /// Largest halfspace excess at x (negative in the interior).
    pub fn max_excess(&self, x: &Point) -> f64 {
        self.halfspaces.iter().map(|h| h.excess(x)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when x is in the interior relative to R^n.
    pub fn interior_contains(&self, x: &Point) -> bool {
        self.is_full_dim() && self.max_excess(x) < -self.tol
    }

    /// Halfspaces tight at x, i.e. generators of the normal cone.
    pub fn active_halfspaces(&self, x: &Point, tol: f64) -> Vec<Halfspace> {
        self.halfspaces.iter().filter(|h| h.excess(x).abs() <= tol).copied().collect()
    }

    /// Each facet halfspace with the vertices lying on it.
    pub fn facets(&self) -> Vec<(Halfspace, Vec<Point>)> {
        self.halfspaces
            .iter()
            .map(|h| (*h, self.vertices.iter().filter(|v| h.excess(v).abs() <= 10.0 * self.tol).copied().collect()))
            .collect()
    }

    pub fn intersect(&self, other: &Polytope) -> Result<Option<Polytope>> {
        same_dim(self.dim, other.dim)?;
        let mut hs = self.halfspaces.clone();
        hs.extend_from_slice(&other.halfspaces);
        Polytope::from_halfspaces(self.dim, &hs)
    }

    /// Intersection with extra halfspaces.
    pub fn cut(&self, extra: &[Halfspace]) -> Result<Option<Polytope>> {
        let mut hs = self.halfspaces.clone();
        hs.extend_from_slice(extra);
        Polytope::from_halfspaces(self.dim, &hs)
    }

    pub fn minkowski_sum(&self, other: &Polytope) -> Result<Polytope> {
        same_dim(self.dim, other.dim)?;
        let mut pts = Vec::with_capacity(self.vertices.len() * other.vertices.len());
        for a in &self.vertices {
            for b in &other.vertices {
                pts.push(*a + *b);
            }
        }
        Polytope::hull(&pts)
    }

    pub fn affine_image(&self, m: &AffineMap) -> Result<Polytope> {
        same_dim(self.dim, m.dim())?;
        let scale = m.matrix().max_abs().max(1e-300).powi(self.dim as i32);
        if m.det().abs() <= 1e-12 * scale {
            return Err(Error::SingularMap(m.det()));
        }
        let pts: Vec<Point> = self.vertices.iter().map(|v| m.apply(v)).collect();
        Polytope::hull(&pts)
    }

    pub fn translate(&self, y: &Point) -> Polytope {
        let pts: Vec<Point> = self.vertices.iter().map(|v| *v + *y).collect();
        Polytope::hull(&pts).expect("translation of a valid polytope")
    }

    /// Image under x -> s x for s > 0.
    pub fn scale(&self, s: f64) -> Polytope {
        let pts: Vec<Point> = self.vertices.iter().map(|v| *v * s).collect();
        Polytope::hull(&pts).expect("scaling of a valid polytope")
    }

    /// Image under x -> c + s (x - c) with c the barycenter.
    pub fn shrink_toward_barycenter(&self, s: f64) -> Polytope {
        let c = self.barycenter();
        let pts: Vec<Point> = self.vertices.iter().map(|v| c + (*v - c) * s).collect();
        Polytope::hull(&pts).expect("homothety of a valid polytope")
    }

    /// Inner parallel body {x : dist(x, complement) >= delta} of a full-dimensional polytope.
    pub fn inset(&self, delta: f64) -> Result<Option<Polytope>> {
        if self.is_degenerate() {
            return Err(Error::DegenerateDomain);
        }
        let hs: Vec<Halfspace> = self.halfspaces.iter().map(|h| Halfspace::new(h.normal, h.offset - delta)).collect();
        Polytope::from_halfspaces(self.dim, &hs)
    }

    /// Vertex-set equality within `tol`.
    pub fn same_as(&self, other: &Polytope, tol: f64) -> bool {
        self.dim == other.dim
            && self.vertices.len() == other.vertices.len()
            && self.vertices.iter().all(|a| other.vertices.iter().any(|b| a.approx_eq(b, tol)))
    }

    fn compute_volume(&self) -> f64 {
        if self.is_degenerate() {
            return 0.0;
        }
        match self.dim {
            1 => self.vertices[1][0] - self.vertices[0][0],
            2 => shoelace(&cyclic_order(&self.vertices, None)).abs(),
            _ => {
                let c = self.barycenter();
                let mut vol = 0.0;
                for (h, pts) in self.facets() {
                    if pts.len() < 3 {
                        continue;
                    }
                    let ring = cyclic_order(&pts, Some(&h.normal));
                    let mut area = 0.0;
                    for k in 1..ring.len() - 1 {
                        area += (ring[k] - ring[0]).cross(&(ring[k + 1] - ring[0])).dot(&h.normal);
                    }
                    vol += 0.5 * area.abs() * (h.offset - h.normal.dot(&c)) / 3.0;
                }
                vol
            }
        }
    }
}
