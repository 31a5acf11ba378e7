//! Convex hulls and vertex enumeration for n <= 3.

use super::polytope::Halfspace;
use super::{solve_rows, Point};

/// Removes points closer than `tol` (sup norm) to an earlier one.
pub(crate) fn dedup_points(points: &[Point], tol: f64) -> Vec<Point> {
    let mut sorted: Vec<Point> = points.to_vec();
    sorted.sort_by(|a, b| a.lex_cmp(b));
    let mut out: Vec<Point> = Vec::with_capacity(sorted.len());
    for p in sorted {
        // lexicographic order keeps near-duplicates close; scan back while the
        // first coordinate is within tolerance
        let mut dup = false;
        for q in out.iter().rev() {
            if p[0] - q[0] > tol {
                break;
            }
            if p.approx_eq(q, tol) {
                dup = true;
                break;
            }
        }
        if !dup {
            out.push(p);
        }
    }
    out
}

pub(crate) fn bbox_diameter(points: &[Point]) -> f64 {
    let n = points[0].dim();
    let mut lo = points[0];
    let mut hi = points[0];
    for p in points {
        for i in 0..n {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    (hi - lo).norm()
}

/// Orthonormal basis of the affine hull, spanned from `points[0]`.
pub(crate) fn affine_frame(points: &[Point], tol: f64) -> (Point, Vec<Point>) {
    let n = points[0].dim();
    let origin = points[0];
    let mut basis: Vec<Point> = Vec::new();
    while basis.len() < n {
        let mut best = (0.0, None);
        for p in points {
            let r = residual(&(*p - origin), &basis);
            let d = r.norm();
            if d > best.0 {
                best = (d, Some(r));
            }
        }
        match best {
            (d, Some(r)) if d > tol => {
                let r = residual(&r, &basis);
                basis.push(r * (1.0 / r.norm()));
            }
            _ => break,
        }
    }
    (origin, basis)
}

fn residual(v: &Point, basis: &[Point]) -> Point {
    let mut r = *v;
    for b in basis {
        r -= *b * r.dot(b);
    }
    r
}

/// Orthonormal completion of `basis` to R^n.
pub(crate) fn complement(basis: &[Point], n: usize) -> Vec<Point> {
    let mut all = basis.to_vec();
    let mut out = Vec::new();
    for i in 0..n {
        if all.len() == n {
            break;
        }
        let r = residual(&residual(&Point::unit(n, i), &all), &all);
        if r.norm() > 0.3 {
            let u = r * (1.0 / r.norm());
            all.push(u);
            out.push(u);
        }
    }
    out
}

/// Hull of points spanning R^k (k = point dimension). Returns the indices of the
/// extreme points and the facet halfspaces with unit normals.
pub(crate) fn hull_full(points: &[Point], tol: f64) -> (Vec<usize>, Vec<Halfspace>) {
    match points[0].dim() {
        1 => hull_1d(points),
        2 => hull_2d(points, tol),
        3 => hull_3d(points, tol),
        k => unreachable!("hull_full in dimension {k}"),
    }
}

fn hull_1d(points: &[Point]) -> (Vec<usize>, Vec<Halfspace>) {
    let (mut lo, mut hi) = (0, 0);
    for (i, p) in points.iter().enumerate() {
        if p[0] < points[lo][0] {
            lo = i;
        }
        if p[0] > points[hi][0] {
            hi = i;
        }
    }
    let hs = vec![
        Halfspace::new(Point::new(&[-1.0]), -points[lo][0]),
        Halfspace::new(Point::new(&[1.0]), points[hi][0]),
    ];
    (vec![lo, hi], hs)
}

fn cross2(o: &Point, a: &Point, b: &Point) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn hull_2d(points: &[Point], tol: f64) -> (Vec<usize>, Vec<Halfspace>) {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| points[a].lex_cmp(&points[b]));
    let diam = bbox_diameter(points).max(1.0);
    let ctol = tol * diam;
    let mut chain: Vec<usize> = Vec::with_capacity(2 * idx.len());
    // lower hull then upper hull, counter-clockwise
    for pass in 0..2 {
        let start = chain.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 { Box::new(idx.iter()) } else { Box::new(idx.iter().rev()) };
        for &i in iter {
            while chain.len() >= start + 2
                && cross2(&points[chain[chain.len() - 2]], &points[chain[chain.len() - 1]], &points[i]) <= ctol
            {
                chain.pop();
            }
            chain.push(i);
        }
        chain.pop();
    }
    let m = chain.len();
    let mut hs = Vec::with_capacity(m);
    for k in 0..m {
        let a = points[chain[k]];
        let b = points[chain[(k + 1) % m]];
        let d = b - a;
        let normal = Point::new(&[d[1], -d[0]]);
        let len = normal.norm();
        let normal = normal * (1.0 / len);
        hs.push(Halfspace::new(normal, normal.dot(&a)));
    }
    (chain, hs)
}

fn planes_3d(points: &[Point], tol: f64) -> Vec<Halfspace> {
    let n = points.len();
    let diam = bbox_diameter(points).max(1.0);
    let mut planes: Vec<Halfspace> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let e1 = points[j] - points[i];
            for k in j + 1..n {
                let nrm = e1.cross(&(points[k] - points[i]));
                let len = nrm.norm();
                if len <= tol * diam {
                    continue;
                }
                let nrm = nrm * (1.0 / len);
                let off = nrm.dot(&points[i]);
                let (mut pos, mut neg) = (false, false);
                for p in points {
                    let s = nrm.dot(p) - off;
                    if s > tol {
                        pos = true;
                    } else if s < -tol {
                        neg = true;
                    }
                    if pos && neg {
                        break;
                    }
                }
                if pos && neg {
                    continue;
                }
                let h = if pos { Halfspace::new(-nrm, -off) } else { Halfspace::new(nrm, off) };
                if !planes.iter().any(|q| q.normal.dot(&h.normal) > 1.0 - 1e-12 && (q.offset - h.offset).abs() <= 10.0 * tol) {
                    planes.push(h);
                }
            }
        }
    }
    planes
}

fn hull_3d(points: &[Point], tol: f64) -> (Vec<usize>, Vec<Halfspace>) {
    // Cheap prefilter: drop points strictly inside the hull of a few extreme ones.
    let candidates: Vec<usize> = if points.len() > 40 {
        let dirs: Vec<Point> = {
            let mut d = Vec::new();
            for s0 in [-1.0, 0.0, 1.0] {
                for s1 in [-1.0, 0.0, 1.0] {
                    for s2 in [-1.0, 0.0, 1.0] {
                        if s0 != 0.0 || s1 != 0.0 || s2 != 0.0 {
                            d.push(Point::new(&[s0, s1, s2]));
                        }
                    }
                }
            }
            d
        };
        let mut ext: Vec<usize> = dirs
            .iter()
            .map(|d| (0..points.len()).max_by(|&a, &b| d.dot(&points[a]).total_cmp(&d.dot(&points[b]))).unwrap())
            .collect();
        ext.sort_unstable();
        ext.dedup();
        let sub: Vec<Point> = ext.iter().map(|&i| points[i]).collect();
        let planes = planes_3d(&sub, tol);
        let spans = sub.len() >= 4 && planes.len() >= 4;
        (0..points.len())
            .filter(|&i| !spans || ext.contains(&i) || planes.iter().any(|h| h.normal.dot(&points[i]) - h.offset > -10.0 * tol))
            .collect()
    } else {
        (0..points.len()).collect()
    };
    let sub: Vec<Point> = candidates.iter().map(|&i| points[i]).collect();
    let planes = planes_3d(&sub, tol);
    let mut verts = Vec::new();
    for (ci, p) in sub.iter().enumerate() {
        let tight: Vec<&Halfspace> = planes.iter().filter(|h| (h.normal.dot(p) - h.offset).abs() <= 10.0 * tol).collect();
        if tight.len() < 3 {
            continue;
        }
        let mut rank3 = false;
        'outer: for a in 0..tight.len() {
            for b in a + 1..tight.len() {
                let c = tight[a].normal.cross(&tight[b].normal);
                for t in tight.iter().skip(b + 1) {
                    if c.dot(&t.normal).abs() > 1e-10 {
                        rank3 = true;
                        break 'outer;
                    }
                }
            }
        }
        if rank3 {
            verts.push(candidates[ci]);
        }
    }
    (verts, planes)
}

/// Vertices of {x : h.normal·x <= h.offset} by solving every n-subset of
/// constraints. The system must describe a bounded set (checked by the caller).
pub(crate) fn enumerate_vertices(n: usize, hs: &[Halfspace], tol: f64) -> Vec<Point> {
    let m = hs.len();
    let mut out: Vec<Point> = Vec::new();
    let feasible = |x: Point, out: &mut Vec<Point>| {
        if hs.iter().all(|h| h.normal.dot(&x) - h.offset <= tol) {
            out.push(x);
        }
    };
    match n {
        1 => {
            for a in 0..m {
                if let Some(x) = solve_rows(&[hs[a].normal], &[hs[a].offset]) {
                    feasible(x, &mut out);
                }
            }
        }
        2 => {
            for a in 0..m {
                for b in a + 1..m {
                    if let Some(x) = solve_rows(&[hs[a].normal, hs[b].normal], &[hs[a].offset, hs[b].offset]) {
                        feasible(x, &mut out);
                    }
                }
            }
        }
        3 => {
            for a in 0..m {
                for b in a + 1..m {
                    let ab = hs[a].normal.cross(&hs[b].normal);
                    if ab.norm() <= 1e-12 {
                        continue;
                    }
                    for c in b + 1..m {
                        if ab.dot(&hs[c].normal).abs() <= 1e-12 {
                            continue;
                        }
                        if let Some(x) = solve_rows(
                            &[hs[a].normal, hs[b].normal, hs[c].normal],
                            &[hs[a].offset, hs[b].offset, hs[c].offset],
                        ) {
                            feasible(x, &mut out);
                        }
                    }
                }
            }
        }
        _ => unreachable!(),
    }
    dedup_points(&out, 10.0 * tol)
}

/// True when the recession cone {d : normal·d <= 0} is nontrivial.
pub(crate) fn has_recession(n: usize, hs: &[Halfspace]) -> bool {
    let mut cone: Vec<Halfspace> = hs.iter().map(|h| Halfspace::new(h.normal, 0.0)).collect();
    for i in 0..n {
        cone.push(Halfspace::new(Point::unit(n, i), 1.0));
        cone.push(Halfspace::new(-Point::unit(n, i), 1.0));
    }
    enumerate_vertices(n, &cone, 1e-12).iter().any(|d| d.norm_inf() > 1e-7)
}

/// Signed area of a planar polygon given in cyclic order.
pub(crate) fn shoelace(poly: &[Point]) -> f64 {
    let m = poly.len();
    let mut s = 0.0;
    for k in 0..m {
        let a = poly[k];
        let b = poly[(k + 1) % m];
        s += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * s
}

/// Orders coplanar points cyclically around their centroid; `normal` fixes the
/// orientation (ignored in 2-d).
pub(crate) fn cyclic_order(points: &[Point], normal: Option<&Point>) -> Vec<Point> {
    let m = points.len() as f64;
    let c = points.iter().fold(Point::zeros(points[0].dim()), |s, p| s + *p) * (1.0 / m);
    let (u, v) = match normal {
        None => (Point::new(&[1.0, 0.0]), Point::new(&[0.0, 1.0])),
        Some(nrm) => {
            let seed = if nrm[0].abs() < 0.9 { Point::unit(3, 0) } else { Point::unit(3, 1) };
            let u = seed - *nrm * seed.dot(nrm);
            let u = u * (1.0 / u.norm());
            (u, nrm.cross(&u))
        }
    };
    let mut keyed: Vec<(f64, Point)> = points
        .iter()
        .map(|p| {
            let d = *p - c;
            (d.dot(&v).atan2(d.dot(&u)), *p)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    keyed.into_iter().map(|(_, p)| p).collect()
}
