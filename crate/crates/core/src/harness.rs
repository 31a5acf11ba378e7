//! Seeded random instances and the check suites run by `affval check`.
//!
//! Every generator draws from a ChaCha8 stream, so a seed fixes the instances
//! on every platform.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::funcs::{certify_plq, grid_in_box, AffineFn, ConvexFn, PaFn, PlqFn, QuadraticFn};
use crate::geometry::{AffineMap, Halfspace, Matrix, Point, Polytope};
use crate::measures::ma_total_mass;
use crate::report::{CheckReport, SupTracker, Witness};
use crate::transforms::{conjugate_identities_check, inf_conv_pa, legendre_pa, tangential_extension};
use crate::valuations::{invariance_check, valuation_identity_check, z_zeta, ConcFn, Transform, Valuation};

pub type Rng64 = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform_point(rng: &mut Rng64, n: usize, r: f64) -> Point {
    Point::from_fn(n, |_| rng.gen_range(-r..r))
}

/// An axis-parallel box inside [-1, 1]^n with sides at least 0.4.
pub fn random_box(rng: &mut Rng64, n: usize) -> Result<Polytope> {
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    for i in 0..n {
        let w = rng.gen_range(0.4..2.0);
        lo[i] = rng.gen_range(-1.0..1.0 - w);
        hi[i] = lo[i] + w;
    }
    Polytope::cuboid(&lo, &hi)
}

/// Hull of n + 3 random points in [-1, 1]^n, redrawn until its volume is at
/// least 5% of the cube's.
pub fn random_polytope(rng: &mut Rng64, n: usize) -> Result<Polytope> {
    loop {
        let pts: Vec<Point> = (0..n + 3).map(|_| uniform_point(rng, n, 1.0)).collect();
        let p = Polytope::hull(&pts)?;
        if p.is_full_dim() && p.volume() >= 0.05 * 2f64.powi(n as i32) {
            return Ok(p);
        }
    }
}

fn random_pieces(rng: &mut Rng64, n: usize, k: usize) -> Vec<AffineFn> {
    (0..k).map(|_| AffineFn::new(uniform_point(rng, n, 2.0), rng.gen_range(-1.0..1.0))).collect()
}

/// Max of `k` random affine functions on a random polytope.
pub fn random_pa(rng: &mut Rng64, n: usize, k: usize) -> Result<PaFn> {
    let dom = random_polytope(rng, n)?;
    PaFn::new(random_pieces(rng, n, k), Some(dom))
}

/// Finite-valued max of `k` random affine functions whose gradients span R^n.
pub fn random_finite_pa(rng: &mut Rng64, n: usize, k: usize) -> Result<PaFn> {
    loop {
        let f = PaFn::finite(random_pieces(rng, n, k.max(n + 1)))?;
        let grads: Vec<Point> = f.pieces().iter().map(|p| p.grad).collect();
        if grads.len() > n && Polytope::hull(&grads)?.is_full_dim() {
            return Ok(f);
        }
    }
}

/// A PLQ function with 3^n cells on [-1, 1]^n: the tangential extension of a
/// diagonal quadratic from a random inner box, plus a random affine function.
pub fn random_plq(rng: &mut Rng64, n: usize) -> Result<PlqFn> {
    let outer = Polytope::cube(n, 1.0)?;
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    for i in 0..n {
        lo[i] = rng.gen_range(-0.8..-0.1);
        hi[i] = rng.gen_range(0.1..0.8);
    }
    let inner = Polytope::cuboid(&lo, &hi)?;
    let d: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..3.0)).collect();
    let q = QuadraticFn::from_parts(Matrix::diag(&d), uniform_point(rng, n, 1.0), rng.gen_range(-1.0..1.0));
    let ext = tangential_extension(&ConvexFn::quadratic_on(q, inner.clone()), &inner, &outer)?;
    match ext.add_affine(&AffineFn::new(uniform_point(rng, n, 1.0), 0.0))? {
        ConvexFn::Plq(f) => Ok(f),
        _ => Err(Error::EvalError("extension of a diagonal quadratic is not PLQ".into())),
    }
}

/// u restricted to dom u ∩ p.
pub fn restrict(u: &ConvexFn, p: &Polytope) -> Result<ConvexFn> {
    let dom = |d: Option<&Polytope>| -> Result<Polytope> {
        match d {
            Some(d) => d.intersect(p)?.ok_or(Error::EmptyDomain),
            None => Ok(p.clone()),
        }
    };
    match u {
        ConvexFn::Pa(f) => Ok(ConvexFn::Pa(f.with_domain(Some(dom(f.domain())?))?)),
        ConvexFn::Quadratic { q, domain } => Ok(ConvexFn::quadratic_on(*q, dom(domain.as_ref())?)),
        ConvexFn::Plq(f) => {
            let mut cells = Vec::new();
            for c in f.cells() {
                if let Some(i) = c.poly.intersect(p)? {
                    if i.is_full_dim() {
                        cells.push((i, c.q));
                    }
                }
            }
            if cells.is_empty() {
                return Err(Error::EmptyDomain);
            }
            Ok(ConvexFn::Plq(certify_plq(cells)?))
        }
        other => Err(Error::Unsupported(format!("restriction of a {} function", other.kind()))),
    }
}

/// (u|P, u|Q) where P and Q split the bounding box of dom u by two overlapping
/// slabs along a random axis, so P ∪ Q ⊇ dom u and the meet is u itself on the union.
pub fn split_pair(rng: &mut Rng64, u: &ConvexFn) -> Result<(ConvexFn, ConvexFn)> {
    let dom = u.domain().ok_or_else(|| Error::BadInput("need a compact domain".into()))?;
    let n = u.dim();
    let (lo, hi) = dom.bbox();
    let axis = rng.gen_range(0..n);
    let w = hi[axis] - lo[axis];
    let a = lo[axis] + w * rng.gen_range(0.2..0.45);
    let b = lo[axis] + w * rng.gen_range(0.55..0.8);
    let e = Point::unit(n, axis);
    let pad = Point::splat(n, 1.0);
    let big = Polytope::cuboid((lo - pad).coords(), (hi + pad).coords())?;
    let p = big.cut(&[Halfspace::new(e, b)])?.ok_or(Error::EmptyDomain)?;
    let q = big.cut(&[Halfspace::new(-e, -a)])?.ok_or(Error::EmptyDomain)?;
    Ok((restrict(u, &p)?, restrict(u, &q)?))
}

/// A random map with |det| = 1 and condition number at most about 10.
pub fn random_unimodular(rng: &mut Rng64, n: usize) -> Result<AffineMap> {
    loop {
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let m = Matrix::from_rows(&rows).expect("square matrix");
        let d = m.det();
        if d.abs() < 0.1 {
            continue;
        }
        let s = d.abs().powf(-1.0 / n as f64);
        let m = m.scale(s);
        if m.max_abs() > 4.0 {
            continue;
        }
        return AffineMap::new(m, uniform_point(rng, n, 0.5));
    }
}

/// The `i`-th transform of an invariance suite: maps, translations, shifts and
/// added affine functions in turn.
pub fn random_transform(rng: &mut Rng64, n: usize, i: usize) -> Result<Transform> {
    Ok(match i % 4 {
        0 => Transform::Map(random_unimodular(rng, n)?),
        1 => Transform::Translation(uniform_point(rng, n, 2.0)),
        2 => Transform::Shift(rng.gen_range(-5.0..5.0)),
        _ => Transform::AddAffine(AffineFn::new(uniform_point(rng, n, 3.0), rng.gen_range(-2.0..2.0))),
    })
}

/// inf_y u(y) + v(x - y) by enumeration: the objective is affine on each
/// overlay cell C_i ∩ (x - D_j), so the minimum is attained at one of their vertices.
pub fn inf_conv_by_enumeration(u: &PaFn, v: &PaFn, x: &Point) -> Result<f64> {
    let cu = u.cells()?;
    let reflected: Vec<Polytope> =
        v.cells()?.iter().map(|(p, _)| p.affine_image(&AffineMap::new(Matrix::scaled_identity(x.dim(), -1.0), *x)?)).collect::<Result<_>>()?;
    let mut best = f64::INFINITY;
    for (c, _) in &cu {
        for d in &reflected {
            if let Some(i) = c.intersect(d)? {
                for y in i.vertices() {
                    best = best.min(u.eval(y) + v.eval(&(*x - *y)));
                }
            }
        }
    }
    Ok(best)
}

/// Names accepted by [`run_suite`].
pub const SUITES: [&str; 7] = ["involution", "identities", "infconv", "ma", "valuation", "invariance", "closed-form"];

fn involution_report(u: &PaFn) -> Result<CheckReport> {
    let uss = legendre_pa(&legendre_pa(u)?)?;
    let dom = u.domain().expect("compact domain");
    let (lo, hi) = dom.bbox();
    let pad = Point::splat(u.dim(), 0.25);
    let mut t = SupTracker::default();
    let mut pts = grid_in_box(&(lo - pad), &(hi + pad), 2000);
    pts.extend_from_slice(dom.shrink_toward_barycenter(1.0 - 1e-6).vertices());
    for x in &pts {
        // points within rounding of the boundary may land on either side
        if dom.max_excess(x).abs() <= 1e-9 {
            continue;
        }
        t.observe(x, uss.eval(x), u.eval(x));
    }
    Ok(t.report("conjugate involution", 1e-7))
}

/// Runs `trials` seeded instances of one suite in dimension `n`.
pub fn run_suite(name: &str, seed: u64, trials: usize, n: usize) -> Result<Vec<CheckReport>> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDim(n));
    }
    let mut rng = seeded(seed);
    let val = Valuation::new(1.0, 2.0, ConcFn::sqrt());
    let mut out = Vec::with_capacity(trials);
    for i in 0..trials {
        let rep = match name {
            "involution" => {
                let k = rng.gen_range(2..=8);
                involution_report(&random_pa(&mut rng, n, k)?)?
            }
            "identities" => {
                let k = rng.gen_range(2..=6);
                let f = ConvexFn::Pa(random_pa(&mut rng, n, k)?);
                let (a, b) = split_pair(&mut rng, &f)?;
                let (ConvexFn::Pa(a), ConvexFn::Pa(b)) = (a, b) else { unreachable!() };
                let y = uniform_point(&mut rng, n, 1.0);
                let phi = random_unimodular(&mut rng, n)?;
                conjugate_identities_check(&a, &y, rng.gen_range(-3.0..3.0), &phi, Some(&b))?
            }
            "infconv" => {
                let (ku, kv) = (rng.gen_range(1..=5), rng.gen_range(1..=5));
                let u = random_pa(&mut rng, n, ku)?;
                let v = random_pa(&mut rng, n, kv)?;
                infconv_report(&u, &v)?
            }
            "ma" => {
                let k = rng.gen_range(n + 1..=8);
                let v = random_finite_pa(&mut rng, n, k)?;
                let (mass, _) = ma_total_mass(&v)?;
                let grads: Vec<Point> = v.pieces().iter().map(|p| p.grad).collect();
                let vol = Polytope::hull(&grads)?.volume();
                CheckReport::new("MA total mass", (mass - vol).abs() / vol, 1e-9, vec![Witness {
                    x: vec![],
                    values: vec![mass, vol],
                }])
            }
            "valuation" => {
                let f = if i % 2 == 0 {
                    let k = rng.gen_range(2..=6);
                    ConvexFn::Pa(random_pa(&mut rng, n, k)?)
                } else {
                    ConvexFn::Plq(random_plq(&mut rng, n)?)
                };
                let (a, b) = split_pair(&mut rng, &f)?;
                valuation_identity_check(&val, &a, &b)?
            }
            "invariance" => {
                let u = ConvexFn::Plq(random_plq(&mut rng, n)?);
                let t = random_transform(&mut rng, n, i)?;
                invariance_check(&val, &u, &t)?
            }
            "closed-form" => {
                let a = rng.gen_range(0.1..4.0);
                let p = random_polytope(&mut rng, n)?;
                let zeta = ConcFn::power(rng.gen_range(0.05..0.95))?;
                let u = ConvexFn::quadratic_on(QuadraticFn::scaled_norm(n, a), p.clone());
                let z = z_zeta(&u, &zeta)?;
                let expect = zeta.eval(a.powi(n as i32)) * p.volume();
                CheckReport::new("closed form", (z - expect).abs() / expect.abs().max(f64::MIN_POSITIVE), 1e-12, vec![
                    Witness { x: vec![a], values: vec![z, expect] },
                ])
            }
            other => return Err(Error::BadParameter(format!("unknown suite {other:?}; expected one of {SUITES:?}"))),
        };
        out.push(rep);
    }
    Ok(out)
}

fn infconv_report(u: &PaFn, v: &PaFn) -> Result<CheckReport> {
    let w = inf_conv_pa(u, v)?;
    let sum = u.domain().unwrap().minkowski_sum(v.domain().unwrap())?;
    let wd = w.domain().ok_or_else(|| Error::EvalError("inf-convolution lost its domain".into()))?;
    if !wd.same_as(&sum, 1e-9) {
        return Ok(CheckReport::new("inf-convolution", f64::INFINITY, 1e-7, vec![]).with_note("domain differs from the Minkowski sum"));
    }
    let (lo, hi) = sum.bbox();
    let mut t = SupTracker::default();
    for x in grid_in_box(&lo, &hi, 60) {
        if sum.contains(&x) {
            t.observe(&x, w.eval(&x), inf_conv_by_enumeration(u, v, &x)?);
        }
    }
    Ok(t.report("inf-convolution", 1e-7))
}
