use crate::error::{Error, Result};
use crate::funcs::{certify_plq, ConvexFn, PlqFn, QuadraticFn};
use crate::geometry::{check_dim, Halfspace, Matrix, Point, Polytope};
use crate::qp::solve_qp;

#[derive(Clone, Debug)]
struct EnvCell {
    poly: Polytope,
    q: QuadraticFn,
    lo: Point,
    hi: Point,
}

/// The Moreau-box envelope u_{λ,μ} = u □ (λ/2‖·‖² + I_{μC}) with C = [-1,1]^n,
/// or the plain Moreau envelope u □ λ/2‖·‖² when no box is given.
#[derive(Clone, Debug)]
pub struct EnvelopeFn {
    base: Box<ConvexFn>,
    lambda: f64,
    mu: Option<f64>,
    domain: Option<Polytope>,
    cells: Vec<EnvCell>,
}

/// Result of one envelope evaluation.
#[derive(Clone, Debug)]
pub struct EnvelopeEval {
    pub value: f64,
    /// y₀ attaining the infimum.
    pub minimizer: Point,
    /// u(y₀) + λ/2‖x - y₀‖², which touches the envelope at x from above on y₀ + μC.
    pub touch: QuadraticFn,
    /// Some box constraint |x_k - y₀_k| <= μ is tight.
    pub box_active: bool,
    cell: usize,
}

pub fn moreau_box(u: &ConvexFn, lambda: f64, mu: f64) -> Result<EnvelopeFn> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::BadParameter(format!("lambda must be positive, got {lambda}")));
    }
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::BadParameter(format!("mu must be positive, got {mu}")));
    }
    build(u, lambda, Some(mu))
}

/// The Moreau envelope u □ λ/2‖·‖², finite on all of R^n. Its Lipschitz
/// constant grows with λ, which makes it a negative control for τ-convergence.
pub fn moreau(u: &ConvexFn, lambda: f64) -> Result<EnvelopeFn> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::BadParameter(format!("lambda must be positive, got {lambda}")));
    }
    build(u, lambda, None)
}

fn build(u: &ConvexFn, lambda: f64, mu: Option<f64>) -> Result<EnvelopeFn> {
    let plq = u.to_plq()?;
    let n = plq.dim();
    let domain = match mu {
        Some(mu) => Some(plq.domain().minkowski_sum(&Polytope::cube(n, mu)?)?),
        None => None,
    };
    let cells = plq
        .cells()
        .iter()
        .map(|c| {
            let (lo, hi) = c.poly.bbox();
            EnvCell { poly: c.poly.clone(), q: c.q, lo, hi }
        })
        .collect();
    Ok(EnvelopeFn { base: Box::new(u.clone()), lambda, mu, domain, cells })
}

impl EnvelopeFn {
    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn base(&self) -> &ConvexFn {
        &self.base
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn mu(&self) -> Option<f64> {
        self.mu
    }

    pub fn domain(&self) -> Option<&Polytope> {
        self.domain.as_ref()
    }

    pub fn value(&self, x: &Point) -> f64 {
        self.eval(x).map(|e| e.value).unwrap_or(f64::INFINITY)
    }

    pub fn eval(&self, x: &Point) -> Result<EnvelopeEval> {
        check_dim(x.dim())?;
        if x.dim() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), got: x.dim() });
        }
        if self.domain.as_ref().is_some_and(|d| !d.contains(x)) {
            return Err(Error::OutsideDomain);
        }
        let n = self.dim();
        let lam = self.lambda;
        let mu = self.mu.unwrap_or(f64::INFINITY);
        // Cells ordered by the unconstrained lower bound of q_c(y) + λ/2‖x-y‖².
        let mut order: Vec<(f64, usize)> = Vec::with_capacity(self.cells.len());
        for (i, c) in self.cells.iter().enumerate() {
            if (0..n).any(|k| c.lo[k] > x[k] + mu + 1e-12 || c.hi[k] < x[k] - mu - 1e-12) {
                continue;
            }
            order.push((self.lower_bound(&c.q, x), i));
        }
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let h = Matrix::scaled_identity(n, lam);
        let mut best: Option<(f64, Point, usize)> = None;
        for (lb, i) in order {
            if let Some((bv, _, _)) = &best {
                if lb >= *bv {
                    break;
                }
            }
            let c = &self.cells[i];
            let mut cons: Vec<Halfspace> = c.poly.halfspaces().to_vec();
            for k in 0..n {
                if c.hi[k] > x[k] + mu {
                    cons.push(Halfspace::new(Point::unit(n, k), x[k] + mu));
                }
                if c.lo[k] < x[k] - mu {
                    cons.push(Halfspace::new(-Point::unit(n, k), -(x[k] - mu)));
                }
            }
            let g = c.q.b - *x * lam;
            let Some(s) = solve_qp(&h.add(&c.q.a), &g, &cons) else { continue };
            let v = s.value + c.q.c + 0.5 * lam * x.norm_sq();
            if best.as_ref().is_none_or(|(bv, _, _)| v < *bv) {
                best = Some((v, s.x, i));
            }
        }
        let (value, y0, cell) = best.ok_or(Error::OutsideDomain)?;
        let uy = self.base.eval(&y0);
        let uy = if uy.is_finite() { uy } else { value - 0.5 * lam * x.dist(&y0).powi(2) };
        let touch = QuadraticFn::from_parts(h, -y0 * lam, uy + 0.5 * lam * y0.norm_sq());
        let box_active = match self.mu {
            Some(mu) => (0..n).any(|k| (x[k] - y0[k]).abs() >= mu - 1e-9 * (1.0 + mu)),
            None => false,
        };
        Ok(EnvelopeEval { value, minimizer: y0, touch, box_active, cell })
    }

    fn lower_bound(&self, q: &QuadraticFn, x: &Point) -> f64 {
        let lam = self.lambda;
        let n = self.dim();
        if q.a.max_abs() == 0.0 {
            return q.b.dot(x) + q.c - q.b.norm_sq() / (2.0 * lam);
        }
        let h = q.a.add(&Matrix::scaled_identity(n, lam));
        match h.solve(&(*x * lam - q.b)) {
            Some(y) => q.eval(&y) + 0.5 * lam * x.dist(&y).powi(2),
            None => f64::NEG_INFINITY,
        }
    }

    /// The gradient λ(x - y₀) where the box constraint is slack; `None` where it
    /// binds, since the envelope may have a kink there.
    pub fn gradient(&self, x: &Point) -> Result<Option<Point>> {
        let e = self.eval(x)?;
        if e.box_active {
            return Ok(None);
        }
        Ok(Some((*x - e.minimizer) * self.lambda))
    }

    /// Hessian at x where the box constraint is slack. With y₀ confined by the
    /// tight facets of its cell to an affine set with direction basis P, the
    /// envelope is locally λ/2‖x‖² minus a quadratic, and
    /// D² = λI - λ² P (Pᵀ(A + λI)P)⁻¹ Pᵀ.
    pub fn hessian(&self, x: &Point) -> Result<Matrix> {
        let e = self.eval(x)?;
        if e.box_active {
            return Err(Error::Unsupported("Hessian where the box constraint binds".into()));
        }
        let n = self.dim();
        let lam = self.lambda;
        let c = &self.cells[e.cell];
        let tight: Vec<Point> =
            c.poly.halfspaces().iter().filter(|h| h.excess(&e.minimizer).abs() <= 1e-9).map(|h| h.normal).collect();
        let ortho = crate::funcs::span_basis(&tight, n);
        // free directions: complement of the tight normals
        let mut free: Vec<Point> = Vec::new();
        for k in 0..n {
            let mut v = Point::unit(n, k);
            for b in ortho.iter().chain(free.iter()) {
                v = v - *b * v.dot(b);
            }
            if v.norm() > 1e-8 {
                free.push(v * (1.0 / v.norm()));
            }
        }
        let mut h = Matrix::scaled_identity(n, lam);
        if free.is_empty() {
            return Ok(h);
        }
        let k = free.len();
        let m = c.q.a.add(&Matrix::scaled_identity(n, lam));
        let mut red = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                red[i * k + j] = free[i].dot(&m.mul_vec(&free[j]));
            }
        }
        for a in 0..n {
            let rhs: Vec<f64> = free.iter().map(|f| f[a]).collect();
            let z = crate::geometry::solve_dense(k, &red, &rhs).ok_or(Error::SingularHessian)?;
            for b in 0..n {
                let v: f64 = (0..k).map(|i| free[i][b] * z[i]).sum();
                h.set(a, b, h.get(a, b) - lam * lam * v);
            }
        }
        Ok(h.symmetrize())
    }

    /// Exact PLQ form in dimension one.
    ///
    /// Each evaluation fixes a base cell and an active set, and the envelope is a
    /// single quadratic as long as these stay fixed. Breakpoints are located by
    /// bisection between samples with different signatures, and each interval
    /// gets the quadratic through three exact evaluations.
    pub fn to_plq_1d(&self) -> Result<PlqFn> {
        if self.dim() != 1 {
            return Err(Error::Unsupported("symbolic envelope in dimension above one".into()));
        }
        let Some(dom) = &self.domain else {
            return Err(Error::Unsupported("symbolic form of an envelope without a box".into()));
        };
        let (a, b) = (dom.vertices()[0][0], dom.vertices()[1][0]);
        let m = 64 + 8 * self.cells.len();
        let xs: Vec<f64> = (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect();
        let sig = |x: f64| -> Result<Vec<i64>> { self.signature(x) };
        let mut breaks = vec![a];
        for w in xs.windows(2) {
            let (mut l, mut r) = (w[0], w[1]);
            let (sl, sr) = (sig(l)?, sig(r)?);
            if sl == sr {
                continue;
            }
            for _ in 0..60 {
                let mid = 0.5 * (l + r);
                if sig(mid)? == sl {
                    l = mid;
                } else {
                    r = mid;
                }
            }
            breaks.push(0.5 * (l + r));
        }
        // breaks that hug an endpoint or each other only reflect a constraint
        // becoming tight at a single point
        let gap = 1e-9 * (b - a);
        let mut kept = vec![a];
        for &t in &breaks[1..] {
            if t - kept[kept.len() - 1] > gap && b - t > gap {
                kept.push(t);
            }
        }
        kept.push(b);
        let breaks = kept;
        let mut cells = Vec::new();
        for w in breaks.windows(2) {
            let (l, r) = (w[0], w[1]);
            if r - l <= 1e-12 {
                continue;
            }
            let pts = [l + 0.25 * (r - l), 0.5 * (l + r), l + 0.75 * (r - l)];
            let v: Vec<f64> = pts.iter().map(|&t| self.value(&Point::new(&[t]))).collect();
            let h = 0.25 * (r - l);
            let qa = (v[0] - 2.0 * v[1] + v[2]) / (h * h);
            let slope = (v[2] - v[0]) / (2.0 * h);
            // q(t) = ½ qa t² + qb t + qc through the midpoint with that slope
            let t0 = pts[1];
            let qb = slope - qa * t0;
            let qc = v[1] - 0.5 * qa * t0 * t0 - qb * t0;
            let q = QuadraticFn::from_parts(Matrix::diag(&[qa.max(0.0)]), Point::new(&[qb]), qc);
            cells.push((Polytope::segment(Point::new(&[l]), Point::new(&[r]))?, q));
        }
        certify_plq(cells)
    }

    /// Cell index and tight constraints of the minimizer at x, as a comparable key.
    fn signature(&self, x: f64) -> Result<Vec<i64>> {
        let p = Point::new(&[x]);
        let e = self.eval(&p)?;
        let y = e.minimizer;
        let mu = self.mu.unwrap_or(f64::INFINITY);
        let tol = 1e-9 * (1.0 + self.mu.unwrap_or(0.0));
        let mut s = Vec::new();
        let ci = self
            .cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.poly.contains_tol(&y, tol))
            .min_by(|a, b| {
                let va = a.1.q.eval(&y) + 0.5 * self.lambda * (x - y[0]).powi(2);
                let vb = b.1.q.eval(&y) + 0.5 * self.lambda * (x - y[0]).powi(2);
                va.total_cmp(&vb)
            })
            .map(|(i, _)| i as i64)
            .unwrap_or(-1);
        s.push(ci);
        if ci >= 0 {
            let c = &self.cells[ci as usize];
            for (j, h) in c.poly.halfspaces().iter().enumerate() {
                if h.excess(&y).abs() <= tol {
                    s.push(10 + j as i64);
                }
            }
        }
        if (x - y[0] - mu).abs() <= tol {
            s.push(-2);
        }
        if (x - y[0] + mu).abs() <= tol {
            s.push(-3);
        }
        Ok(s)
    }
}
