//! Exact solver for small convex quadratic programs
//! `min ½ yᵀHy + gᵀy  s.t.  n_i·y <= c_i` by active-set enumeration.
//!
//! Every subset of at most `dim` constraints is tried as the active set, in
//! lexicographic order of size then indices; the first KKT point found is a
//! global minimizer because the problem is convex.

use crate::geometry::{solve_dense, Halfspace, Matrix, Point};

#[derive(Clone, Copy, Debug)]
pub(crate) struct QpSolution {
    pub x: Point,
    pub value: f64,
}

fn objective(h: &Matrix, g: &Point, x: &Point) -> f64 {
    0.5 * h.quad_form(x) + g.dot(x)
}

/// Minimizes over the polyhedron; `None` if it is empty or no KKT point is
/// found (only possible for singular H with an unbounded objective).
pub(crate) fn solve_qp(h: &Matrix, g: &Point, cons: &[Halfspace]) -> Option<QpSolution> {
    if let Some(s) = solve_qp_inner(h, g, cons) {
        return Some(s);
    }
    if h.min_eigenvalue() < 1e-12 * (1.0 + h.max_abs()) {
        let reg = h.add(&Matrix::scaled_identity(h.dim(), 1e-11 * (1.0 + h.max_abs())));
        return solve_qp_inner(&reg, g, cons).map(|s| QpSolution { value: objective(h, g, &s.x), x: s.x });
    }
    None
}

fn solve_qp_inner(h: &Matrix, g: &Point, cons: &[Halfspace]) -> Option<QpSolution> {
    let d = h.dim();
    let m = cons.len();
    let scale = 1.0 + cons.iter().fold(0.0f64, |s, c| s.max(c.offset.abs()));
    let ftol = 1e-9 * scale;
    let feasible = |x: &Point| cons.iter().all(|c| c.excess(x) <= ftol);

    if let Some(x) = h.solve(&(-*g)) {
        if feasible(&x) {
            return Some(QpSolution { value: objective(h, g, &x), x });
        }
    }
    let dual_tol = 1e-10 * (1.0 + h.max_abs() + g.norm());
    let mut subset = [0usize; 3];
    for k in 1..=d.min(m) {
        for (i, s) in subset.iter_mut().enumerate().take(k) {
            *s = i;
        }
        loop {
            if let Some(sol) = kkt(h, g, cons, &subset[..k], dual_tol) {
                if feasible(&sol.x) {
                    return Some(sol);
                }
            }
            // next k-combination
            let mut i = k;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if subset[i] < m - k + i {
                    subset[i] += 1;
                    for j in i + 1..k {
                        subset[j] = subset[j - 1] + 1;
                    }
                    break;
                }
                if i == 0 {
                    i = usize::MAX;
                    break;
                }
            }
            if i == usize::MAX {
                break;
            }
        }
    }
    None
}

fn kkt(h: &Matrix, g: &Point, cons: &[Halfspace], act: &[usize], dual_tol: f64) -> Option<QpSolution> {
    let d = h.dim();
    let k = act.len();
    let sz = d + k;
    let mut a = vec![0.0; sz * sz];
    let mut rhs = vec![0.0; sz];
    for i in 0..d {
        for j in 0..d {
            a[i * sz + j] = h.get(i, j);
        }
        rhs[i] = -g[i];
    }
    for (r, &ci) in act.iter().enumerate() {
        let nrm = cons[ci].normal;
        for j in 0..d {
            a[(d + r) * sz + j] = nrm[j];
            a[j * sz + d + r] = nrm[j];
        }
        rhs[d + r] = cons[ci].offset;
    }
    let sol = solve_dense(sz, &a, &rhs)?;
    if sol[d..].iter().any(|&nu| nu < -dual_tol) {
        return None;
    }
    let x = Point::new(&sol[..d]);
    Some(QpSolution { value: objective(h, g, &x), x })
}

/// Euclidean projection onto the polyhedron given by `cons`.
pub(crate) fn project(x: &Point, cons: &[Halfspace]) -> Option<Point> {
    let n = x.dim();
    solve_qp(&Matrix::identity(n), &(-*x), cons).map(|s| s.x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_projection() {
        let cons = vec![
            Halfspace::new(Point::new(&[1.0, 0.0]), 1.0),
            Halfspace::new(Point::new(&[-1.0, 0.0]), 1.0),
            Halfspace::new(Point::new(&[0.0, 1.0]), 1.0),
            Halfspace::new(Point::new(&[0.0, -1.0]), 1.0),
        ];
        let p = project(&Point::new(&[3.0, 0.5]), &cons).unwrap();
        assert!(p.approx_eq(&Point::new(&[1.0, 0.5]), 1e-12));
        let p = project(&Point::new(&[3.0, -7.0]), &cons).unwrap();
        assert!(p.approx_eq(&Point::new(&[1.0, -1.0]), 1e-12));
    }

    #[test]
    fn linear_objective_on_simplex() {
        // min y1 + 2 y2 over the triangle y >= 0, y1 + y2 <= 1: optimum 0 at the origin
        let cons = vec![
            Halfspace::new(Point::new(&[-1.0, 0.0]), 0.0),
            Halfspace::new(Point::new(&[0.0, -1.0]), 0.0),
            Halfspace::new(Point::new(&[1.0, 1.0]), 1.0),
        ];
        let s = solve_qp(&Matrix::zeros(2), &Point::new(&[1.0, 2.0]), &cons).unwrap();
        assert!(s.value.abs() < 1e-9, "{s:?}");
    }

    #[test]
    fn infeasible_is_none() {
        let cons = vec![Halfspace::new(Point::new(&[1.0]), -1.0), Halfspace::new(Point::new(&[-1.0]), -1.0)];
        assert!(solve_qp(&Matrix::identity(1), &Point::new(&[0.0]), &cons).is_none());
    }
}
