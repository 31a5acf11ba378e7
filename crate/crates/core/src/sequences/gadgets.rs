use crate::error::{Error, Result};
use crate::funcs::{grid_in_box, join, AffineFn, ConvexFn, PaFn, PlqFn, QuadraticFn};
use crate::geometry::{AffineMap, Matrix, Point, Polytope};
use crate::transforms::{inf_conv_pa, tangential_extension, EnvelopeFn};
use crate::valuations::ConcFn;

/// Chord approximation of v(x) = x²/2 + I_[-μ,μ].
#[derive(Clone, Debug)]
pub struct ZonotopeApprox {
    /// One affine piece per chord, each on an interval of length 2μ/m; the first
    /// one is anchored at -μ.
    pub segments: Vec<PaFn>,
    /// The epi-sum of the segments.
    pub composite: PaFn,
    /// sup |composite - v| over [-μ, μ].
    pub sup_gap: f64,
}

fn interval(lo: f64, hi: f64) -> Result<Polytope> {
    Polytope::cuboid(&[lo], &[hi])
}

pub fn zonotope_segment_approx(mu: f64, m: usize) -> Result<ZonotopeApprox> {
    if !(mu > 0.0 && mu.is_finite()) || m < 2 {
        return Err(Error::BadParameter("need mu > 0 and m >= 2".into()));
    }
    let h = 2.0 * mu / m as f64;
    let v = |x: f64| 0.5 * x * x;
    let mut segments = Vec::with_capacity(m);
    for i in 0..m {
        let (a, b) = (-mu + h * i as f64, -mu + h * (i + 1) as f64);
        let slope = (v(b) - v(a)) / h;
        let seg = if i == 0 {
            PaFn::new(vec![AffineFn::new(Point::new(&[slope]), v(a) - slope * a)], Some(interval(a, b)?))?
        } else {
            PaFn::new(vec![AffineFn::new(Point::new(&[slope]), 0.0)], Some(interval(0.0, h)?))?
        };
        segments.push(seg);
    }
    // slopes increase, so the epi-sum lays the chords end to end
    let mut composite = segments[0].clone();
    for s in &segments[1..] {
        composite = inf_conv_pa(&composite, s)?;
    }
    let mut sup_gap: f64 = 0.0;
    for i in 0..m {
        let a = -mu + h * i as f64;
        for x in [a, a + 0.5 * h, a + h] {
            sup_gap = sup_gap.max((composite.eval(&Point::new(&[x])) - v(x)).abs());
        }
    }
    Ok(ZonotopeApprox { segments, composite, sup_gap })
}

/// diag(t, ..., t, t^(1-n), t, ..., t) with the odd entry at `axis` (1-based).
pub fn anisotropic_scaling(t: f64, axis: usize, n: usize) -> Result<AffineMap> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::BadParameter(format!("scale must be positive, got {t}")));
    }
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDim(n));
    }
    if axis == 0 || axis > n {
        return Err(Error::BadParameter(format!("axis must be in 1..={n}, got {axis}")));
    }
    let mut d = vec![t; n];
    d[axis - 1] = t.powi(1 - n as i32);
    AffineMap::linear(Matrix::diag(&d))
}

/// Max of the supporting affine functions of u at a k-per-axis grid of cell
/// midpoints inside dom u, restricted to dom u.
pub fn pa_approximate(u: &ConvexFn, k: usize) -> Result<PaFn> {
    if k == 0 {
        return Err(Error::BadParameter("density must be positive".into()));
    }
    let dom = u.domain().ok_or_else(|| Error::BadInput("u needs a compact domain".into()))?;
    if dom.is_degenerate() {
        return Err(Error::DegenerateDomain);
    }
    let n = u.dim();
    let (lo, hi) = dom.bbox();
    let mut pieces = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let x = Point::from_fn(n, |i| lo[i] + (hi[i] - lo[i]) * (idx[i] as f64 + 0.5) / k as f64);
        if dom.interior_contains(&x) {
            let g = u.subgradient(&x)?;
            pieces.push(AffineFn::new(g, u.eval(&x) - g.dot(&x)));
        }
        let mut j = 0;
        while j < n {
            idx[j] += 1;
            if idx[j] < k {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == n {
            break;
        }
    }
    if pieces.is_empty() {
        let x = dom.barycenter();
        let g = u.subgradient(&x)?;
        pieces.push(AffineFn::new(g, u.eval(&x) - g.dot(&x)));
    }
    PaFn::new(pieces, Some(dom.clone()))
}

/// Largest t for which a touching patch at a point with Hessian determinant
/// `det` loses at most ρ/4 of ζ(det) per unit volume: shrinking the core by
/// (1 - 4√t) per axis and scaling the Hessian by (1 + t) must each move
/// ζ(det)·(volume factor) by no more than ρ/4. Capped below 1/16.
pub fn max_touching_t(zeta: &ConcFn, rho: f64, det: f64, n: usize) -> Result<f64> {
    if !(rho > 0.0 && det > 0.0) {
        return Err(Error::BadParameter("need rho > 0 and det > 0".into()));
    }
    let cap = 0.99 / 16.0;
    let z = zeta.eval(det);
    if !(z > 0.0) {
        return Ok(cap);
    }
    let nf = n as f64;
    let eps = rho / (4.0 * z);
    let shrink = ((1.0 - (1.0 - eps).max(0.0).powf(1.0 / nf)) / 4.0).powi(2);
    let scale = (1.0 + eps).powf(1.0 / nf) - 1.0;
    Ok(shrink.min(scale).min(cap))
}

/// v_r = ext(q_u on (1 - 4√t) r C) ∨ lc on x0 + rC, where q_u has the value and
/// gradient of the envelope at x0 and (1 + t) times its Hessian.
pub fn touching_patch(env: &EnvelopeFn, x0: &Point, t: f64, r: f64, lc: &PaFn) -> Result<PlqFn> {
    let n = env.dim();
    if x0.dim() != n || lc.dim() != n {
        return Err(Error::DimMismatch { expected: n, got: x0.dim().max(lc.dim()) });
    }
    if !(t > 0.0 && t < 1.0 / 16.0) {
        return Err(Error::BadParameter(format!("t must lie in (0, 1/16), got {t}")));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::BadParameter(format!("r must be positive, got {r}")));
    }
    let cube = Polytope::cube_at(x0, r)?;
    if let Some(d) = env.domain() {
        if cube.vertices().iter().any(|v| !d.contains(v)) {
            return Err(Error::BadParameter("x0 + rC must lie in the envelope's domain".into()));
        }
    }
    let hess = env.hessian(x0).map_err(|e| Error::BadParameter(format!("no Hessian at x0: {e}")))?;
    if hess.min_eigenvalue() <= 1e-12 * (1.0 + hess.max_abs()) {
        return Err(Error::BadParameter("envelope Hessian at x0 is not positive definite".into()));
    }
    let e = env.eval(x0)?;
    let g = (*x0 - e.minimizer) * env.lambda();
    let a = hess.scale(1.0 + t);
    let ax0 = a.mul_vec(x0);
    let qu = QuadraticFn::from_parts(a, g - ax0, e.value - g.dot(x0) + 0.5 * x0.dot(&ax0));

    let (lo, hi) = cube.bbox();
    for x in grid_in_box(&lo, &hi, 9usize.pow(n as u32)) {
        if !(lc.eval(&x) < env.value(&x)) {
            return Err(Error::BadParameter("lc must lie strictly below the envelope on x0 + rC".into()));
        }
    }
    let core = Polytope::cube_at(x0, (1.0 - 4.0 * t.sqrt()) * r)?;
    let ext = tangential_extension(&ConvexFn::quadratic_on(qu, core.clone()), &core, &cube)?;
    if !matches!(ext, ConvexFn::Plq(_)) {
        return Err(Error::NotRepresentable("the extension of a non-diagonal quadratic is not PLQ".into()));
    }
    let dom = match lc.domain() {
        Some(d) => d.intersect(&cube)?.ok_or(Error::EmptyDomain)?,
        None => cube,
    };
    let lower = ConvexFn::Pa(lc.with_domain(Some(dom))?);
    join(&ext, &lower)?.to_plq()
}
