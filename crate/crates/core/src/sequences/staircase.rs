use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcs::{certify_plq, ConvexFn, PlqFn, QuadraticFn};
use crate::geometry::{Matrix, Point, Polytope};
use crate::valuations::ConcFn;

/// Parameters of the staircase u_m approximating q^a + I_R from below.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaircaseSpec {
    pub s: f64,
    pub a: f64,
    pub r: f64,
    pub t1: f64,
    pub t2: f64,
    pub m: usize,
    pub n: usize,
}

impl StaircaseSpec {
    pub fn new(s: f64, a: f64, r: f64, m: usize, n: usize) -> StaircaseSpec {
        StaircaseSpec { s, a, r, t1: 1.0, t2: 1.0, m, n }
    }

    /// λ = (s - a)/(s - r), the share of the y-range carried by r-cells.
    pub fn lambda(&self) -> f64 {
        (self.s - self.a) / (self.s - self.r)
    }

    fn validate(&self) -> Result<()> {
        if !(0.0 <= self.s && self.s < self.a && self.a < self.r && self.r.is_finite()) {
            return Err(Error::BadParameter("staircase needs 0 <= s < a < r".into()));
        }
        if !(self.t1 > 0.0 && self.t2 > 0.0) || self.m == 0 {
            return Err(Error::BadParameter("staircase needs t1, t2 > 0 and m >= 1".into()));
        }
        if !(2..=3).contains(&self.n) {
            return Err(Error::UnsupportedDim(self.n));
        }
        Ok(())
    }

    /// R = [-t1,t1] x [-t2,t2] x [-1,1]^(n-2).
    pub fn rect(&self) -> Result<Polytope> {
        let mut lo = vec![-self.t1, -self.t2];
        let mut hi = vec![self.t1, self.t2];
        lo.resize(self.n, -1.0);
        hi.resize(self.n, 1.0);
        Polytope::cuboid(&lo, &hi)
    }

    /// ⟨x, diag(d1, d2, 1, ..., 1) x⟩ as a QuadraticFn.
    fn form(&self, d1: f64, d2: f64) -> Matrix {
        let mut d = vec![2.0; self.n];
        d[0] = 2.0 * d1;
        d[1] = 2.0 * d2;
        Matrix::diag(&d)
    }

    /// The limit q^a + I_R with q^a(x) = a x1² + x2² + x3².
    pub fn limit(&self) -> Result<ConvexFn> {
        self.validate()?;
        let q = QuadraticFn::from_parts(self.form(self.a, 1.0), Point::zeros(self.n), 0.0);
        Ok(ConvexFn::quadratic_on(q, self.rect()?))
    }

    /// The strip boundaries in x2, from -t2 to t2 (2m + 2 values).
    pub fn breakpoints(&self) -> Vec<f64> {
        let d = 2.0 * self.t2 / self.m as f64;
        let lam = self.lambda();
        let c = |i: usize| -self.t2 + d * i as f64;
        let mut ys = vec![-self.t2];
        for i in 1..=self.m {
            // tangency to q_{i-1}^s and q_i^s centres the r-strip in [c_{i-1}, c_i]
            ys.push(c(i - 1) + 0.5 * d * (1.0 - lam));
            ys.push(c(i - 1) + 0.5 * d * (1.0 + lam));
        }
        ys.push(self.t2);
        ys
    }
}

/// q_i^s = a x1² + (s/a) x2² + 2(1 - s/a) c_i x2 - (1 - s/a) c_i² (+ unit axes),
/// tangent to q^a along x2 = c_i.
fn q_s(sp: &StaircaseSpec, i: usize) -> QuadraticFn {
    let c = -sp.t2 + 2.0 * sp.t2 / sp.m as f64 * i as f64;
    let k = 1.0 - sp.s / sp.a;
    let mut b = Point::zeros(sp.n);
    b[1] = 2.0 * k * c;
    QuadraticFn::from_parts(sp.form(sp.a, sp.s / sp.a), b, -k * c * c)
}

/// u_m as a certified PLQ function with 2m + 1 strips.
pub fn staircase_sequence(sp: &StaircaseSpec) -> Result<PlqFn> {
    sp.validate()?;
    let ys = sp.breakpoints();
    let n = sp.n;
    let kappa = (sp.r - sp.s) / sp.a;
    let mut pieces = vec![q_s(sp, 0)];
    for i in 1..=sp.m {
        // q_i^r = q_{i-1}^s + ((r-s)/a)(x2 - y_{i-1,i})²
        let y = ys[2 * i - 1];
        let prev = q_s(sp, i - 1);
        let mut a = prev.a;
        a.set(1, 1, a.get(1, 1) + 2.0 * kappa);
        let mut b = prev.b;
        b[1] -= 2.0 * kappa * y;
        let qr = QuadraticFn::from_parts(a, b, prev.c + kappa * y * y);
        let qs = q_s(sp, i);
        let yy = ys[2 * i];
        let probe = |x2: f64| {
            let mut p = Point::zeros(n);
            p[0] = sp.t1;
            p[1] = x2;
            p
        };
        for (u, v, at) in [(&qr, &prev, y), (&qr, &qs, yy)] {
            let p = probe(at);
            let scale = 1.0 + u.eval(&p).abs();
            assert!((u.eval(&p) - v.eval(&p)).abs() <= 1e-10 * scale, "staircase tangency (value) at {at}");
            assert!(u.gradient(&p).approx_eq(&v.gradient(&p), 1e-10 * scale), "staircase tangency (gradient) at {at}");
        }
        pieces.push(qr);
        pieces.push(qs);
    }
    let mut cells = Vec::with_capacity(pieces.len());
    for (k, q) in pieces.into_iter().enumerate() {
        let mut lo = vec![-sp.t1, ys[k]];
        let mut hi = vec![sp.t1, ys[k + 1]];
        lo.resize(n, -1.0);
        hi.resize(n, 1.0);
        cells.push((Polytope::cuboid(&lo, &hi)?, q));
    }
    certify_plq(cells)
}

/// λ ζ(det D²q^r) V_n(R) + (1 - λ) ζ(det D²q^s) V_n(R), independent of m.
pub fn staircase_z_closed_form(sp: &StaircaseSpec, zeta: &ConcFn) -> Result<f64> {
    sp.validate()?;
    let lam = sp.lambda();
    let two_n = 2f64.powi(sp.n as i32);
    let v = sp.rect()?.volume();
    Ok(lam * zeta.eval(two_n * sp.r) * v + (1.0 - lam) * zeta.eval(two_n * sp.s) * v)
}

/// ζ(det D²q^a) V_n(R) = Z_ζ(q^a + I_R), the upper bound in the concavity argument.
pub fn staircase_limit_z(sp: &StaircaseSpec, zeta: &ConcFn) -> Result<f64> {
    sp.validate()?;
    Ok(zeta.eval(2f64.powi(sp.n as i32) * sp.a) * sp.rect()?.volume())
}

/// ⟨x, diag(k 2^-n, 1, ..., 1) x⟩ on [0, 1/k] x [0,1]^(n-1): det D² = k and
/// volume 1/k, so Z_ζ = ζ(k)/k.
pub fn degenerate_sequence(k: usize, n: usize) -> Result<PlqFn> {
    if k == 0 {
        return Err(Error::BadParameter("k must be positive".into()));
    }
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDim(n));
    }
    let kf = k as f64;
    let mut d = vec![2.0; n];
    d[0] = 2.0 * kf * 2f64.powi(-(n as i32));
    let mut hi = vec![1.0; n];
    hi[0] = 1.0 / kf;
    let q = QuadraticFn::from_parts(Matrix::diag(&d), Point::zeros(n), 0.0);
    certify_plq(vec![(Polytope::cuboid(&vec![0.0; n], &hi)?, q)])
}
