use super::*;
use crate::funcs::{AffineFn, ConvexFn, PaFn, QuadraticFn};
use crate::geometry::{AffineMap, Matrix, Point, Polytope};
use approx::assert_relative_eq;

fn p1(x: f64) -> Point {
    Point::new(&[x])
}

fn interval(a: f64, b: f64) -> Polytope {
    Polytope::segment(p1(a), p1(b)).unwrap()
}

fn abs_on(a: f64, b: f64) -> PaFn {
    PaFn::new(vec![AffineFn::new(p1(1.0), 0.0), AffineFn::new(p1(-1.0), 0.0)], Some(interval(a, b))).unwrap()
}

/// sup over a fine grid of dom u of x y - u(x)
fn grid_conjugate_1d(u: &PaFn, y: f64) -> f64 {
    let d = u.domain().unwrap();
    let (lo, hi) = (d.vertices()[0][0], d.vertices()[1][0]);
    (0..=4000).map(|i| lo + (hi - lo) * i as f64 / 4000.0).map(|x| x * y - u.eval(&p1(x))).fold(f64::MIN, f64::max)
}

#[test]
fn conjugate_of_box_indicator_is_l1_norm() {
    let u = PaFn::indicator(Polytope::cube(2, 0.5).unwrap());
    let us = legendre_pa(&u).unwrap();
    assert_eq!(us.pieces().len(), 4);
    for y in [[1.0, -2.0], [0.0, 0.0], [3.0, 1.0]] {
        let y = Point::new(&y);
        assert_relative_eq!(us.eval(&y), 0.5 * (y[0].abs() + y[1].abs()), epsilon = 1e-12);
    }
}

#[test]
fn conjugate_of_abs_on_interval() {
    let u = abs_on(-1.0, 1.0);
    let us = legendre_pa(&u).unwrap();
    for y in [-3.0, -1.0, -0.5, 0.0, 0.25, 1.0, 2.5] {
        assert_relative_eq!(us.eval(&p1(y)), f64::max(0.0, y.abs() - 1.0), epsilon = 1e-12);
        assert_relative_eq!(us.eval(&p1(y)), grid_conjugate_1d(&u, y), epsilon = 1e-12);
    }
    let back = legendre_pa(&us).unwrap();
    assert!(back.domain().unwrap().same_as(&interval(-1.0, 1.0), 1e-12));
    for x in [-1.0, -0.4, 0.0, 0.9] {
        assert_relative_eq!(back.eval(&p1(x)), x.abs(), epsilon = 1e-12);
    }
}

#[test]
fn quadratic_conjugates() {
    let q = QuadraticFn::scaled_norm(2, 1.0);
    assert!(legendre_quadratic(&q).unwrap().approx_eq(&q, 1e-15));
    let q4 = QuadraticFn::scaled_norm(2, 4.0);
    assert!(legendre_quadratic(&q4).unwrap().approx_eq(&QuadraticFn::scaled_norm(2, 0.25), 1e-15));
    let d = QuadraticFn::from_parts(Matrix::diag(&[2.0, 8.0]), Point::zeros(2), 0.0);
    let ds = legendre_quadratic(&d).unwrap();
    assert!(ds.approx_eq(&QuadraticFn::from_parts(Matrix::diag(&[0.5, 0.125]), Point::zeros(2), 0.0), 1e-15));
    let flat = QuadraticFn::from_parts(Matrix::diag(&[1.0, 0.0]), Point::zeros(2), 0.0);
    assert!(matches!(legendre_quadratic(&flat), Err(crate::Error::SingularHessian)));
    // shifted quadratic: q*(y) computed against a constrained sup on a large box
    let s = QuadraticFn::from_parts(Matrix::diag(&[1.0, 3.0]), Point::new(&[0.5, -1.0]), 2.0);
    let big = ConvexFn::quadratic_on(s, Polytope::cube(2, 50.0).unwrap());
    let y = Point::new(&[0.7, 0.2]);
    assert_relative_eq!(conjugate_value(&big, &y).unwrap(), legendre_quadratic(&s).unwrap().eval(&y), epsilon = 1e-12);
}

#[test]
fn inf_convolution_examples() {
    let k = PaFn::indicator(interval(0.0, 1.0));
    let l = PaFn::indicator(interval(-2.0, 0.5));
    let kl = inf_conv_pa(&k, &l).unwrap();
    assert!(kl.domain().unwrap().same_as(&interval(-2.0, 1.5), 1e-12));
    assert_relative_eq!(kl.eval(&p1(0.3)), 0.0, epsilon = 1e-12);

    let a = abs_on(-1.0, 1.0);
    let aa = inf_conv_pa(&a, &a).unwrap();
    assert!(aa.domain().unwrap().same_as(&interval(-2.0, 2.0), 1e-12));
    for x in [-2.0, -0.7, 0.0, 1.3] {
        assert_relative_eq!(aa.eval(&p1(x)), x.abs(), epsilon = 1e-12);
    }
}

#[test]
fn envelope_of_point_indicator() {
    let u = ConvexFn::indicator(Polytope::point(p1(0.0)).unwrap());
    let e = moreau_box(&u, 1.0, 1.0).unwrap();
    assert!(e.domain().unwrap().same_as(&interval(-1.0, 1.0), 1e-12));
    let r = e.eval(&p1(0.5)).unwrap();
    assert_relative_eq!(r.value, 0.125, epsilon = 1e-14);
    assert_relative_eq!(r.minimizer[0], 0.0, epsilon = 1e-14);
    assert!(r.touch.approx_eq(&QuadraticFn::scaled_norm(1, 1.0), 1e-14));
    assert_eq!(e.value(&p1(1.5)), f64::INFINITY);
    assert!(matches!(e.eval(&p1(1.5)), Err(crate::Error::OutsideDomain)));
    assert!(matches!(moreau_box(&u, 0.0, 1.0), Err(crate::Error::BadParameter(_))));
    assert!(matches!(moreau_box(&u, 1.0, -1.0), Err(crate::Error::BadParameter(_))));
}

#[test]
fn envelope_domain_is_minkowski_sum() {
    let u = ConvexFn::indicator(Polytope::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap());
    let e = moreau_box(&u, 1.0, 0.5).unwrap();
    assert!(e.domain().unwrap().same_as(&Polytope::cuboid(&[-0.5, -0.5], &[1.5, 1.5]).unwrap(), 1e-12));
}

#[test]
fn huber_envelope_matches_brute_force() {
    let u = ConvexFn::Pa(abs_on(-1.0, 1.0));
    let e = moreau_box(&u, 1.0, 2.0).unwrap();
    for i in 0..=60 {
        let x = -3.0 + 0.1 * i as f64;
        let brute = (0..=20000)
            .map(|j| -1.0 + j as f64 / 10000.0)
            .filter(|y: &f64| (x - y).abs() <= 2.0 + 1e-12)
            .map(|y| y.abs() + 0.5 * (x - y) * (x - y))
            .fold(f64::INFINITY, f64::min);
        assert_relative_eq!(e.value(&p1(x)), brute, epsilon = 1e-7);
    }
    let sym = e.to_plq_1d().unwrap();
    for i in 0..=600 {
        let x = -3.0 + 0.01 * i as f64;
        assert_relative_eq!(sym.eval(&p1(x)), e.value(&p1(x)), epsilon = 1e-9);
    }
}

#[test]
fn envelope_touching_quadratic_dominates_on_box() {
    let u = ConvexFn::Pa(
        PaFn::new(
            vec![AffineFn::new(Point::new(&[1.0, 0.5]), 0.0), AffineFn::new(Point::new(&[-1.0, 0.2]), 0.3)],
            Some(Polytope::cube(2, 1.0).unwrap()),
        )
        .unwrap(),
    );
    let e = moreau_box(&u, 2.0, 0.5).unwrap();
    let x = Point::new(&[0.8, -1.2]);
    let r = e.eval(&x).unwrap();
    assert_relative_eq!(r.touch.eval(&x), r.value, epsilon = 1e-12);
    assert!(u.domain().unwrap().contains(&r.minimizer));
    assert!((x - r.minimizer).norm_inf() <= 0.5 + 1e-9);
    for i in 0..10 {
        for j in 0..10 {
            let z = r.minimizer + Point::new(&[-0.5 + i as f64 / 9.0, -0.5 + j as f64 / 9.0]);
            if e.domain().unwrap().contains(&z) {
                assert!(r.touch.eval(&z) >= e.value(&z) - 1e-9);
            }
        }
    }
}

#[test]
fn envelope_tends_to_base_as_mu_shrinks() {
    let u = ConvexFn::Pa(abs_on(-1.0, 1.0));
    let x = p1(0.3);
    for j in 2..=10 {
        let mu = 0.5f64.powi(j);
        let e = moreau_box(&u, 1.0, mu).unwrap();
        // slope 1 beats λμ, so the minimizer sits on the box: gap = μ - μ²/2
        assert_relative_eq!(u.eval(&x) - e.value(&x), mu - 0.5 * mu * mu, epsilon = 1e-12);
    }
}

#[test]
fn extension_of_quadratic() {
    let w = ConvexFn::Quadratic { q: QuadraticFn::scaled_norm(1, 1.0), domain: None };
    let ext = tangential_extension(&w, &interval(-1.0, 1.0), &interval(-4.0, 4.0)).unwrap();
    assert_relative_eq!(ext.eval(&p1(2.0)), 1.5, epsilon = 1e-12);
    assert_relative_eq!(ext.eval(&p1(0.4)), 0.08, epsilon = 1e-12);

    // a non-diagonal Hessian goes through boundary patches
    let a = Matrix::from_rows(&[vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
    let q = QuadraticFn::from_parts(a, Point::new(&[0.1, 0.0]), 0.0);
    let k = Polytope::cube(2, 1.0).unwrap();
    let w = ConvexFn::Quadratic { q, domain: None };
    let ext = tangential_extension(&w, &k, &Polytope::cube(2, 3.0).unwrap()).unwrap();
    let inside = Point::new(&[0.3, -0.2]);
    assert_relative_eq!(ext.eval(&inside), q.eval(&inside), epsilon = 1e-12);
    // brute-force sup of boundary tangents
    let y = Point::new(&[2.0, 1.7]);
    let mut best = f64::MIN;
    for i in 0..=400 {
        let s = -1.0 + i as f64 / 200.0;
        for x in [[1.0, s], [-1.0, s], [s, 1.0], [s, -1.0]] {
            let x = Point::new(&x);
            best = best.max(q.eval(&x) + q.gradient(&x).dot(&(y - x)));
        }
    }
    assert_relative_eq!(ext.eval(&y), best, epsilon = 1e-4);
    assert!(ext.eval(&y) >= best - 1e-12);

    let l = ConvexFn::Affine(AffineFn::new(Point::new(&[1.0, 2.0]), 3.0));
    let le = tangential_extension(&l, &k, &Polytope::cube(2, 3.0).unwrap()).unwrap();
    assert_eq!(le.eval(&Point::new(&[10.0, 0.0])), 13.0);

    let bad = ConvexFn::indicator(Polytope::cube(2, 0.5).unwrap());
    assert!(matches!(tangential_extension(&bad, &k, &Polytope::cube(2, 3.0).unwrap()), Err(crate::Error::BadInput(_))));
}

#[test]
fn identity_reports() {
    let u = PaFn::new(
        vec![AffineFn::new(Point::new(&[1.0, 0.0]), 0.0), AffineFn::new(Point::new(&[-0.5, 1.0]), 0.2)],
        Some(Polytope::cuboid(&[-1.0, 0.0], &[1.0, 2.0]).unwrap()),
    )
    .unwrap();
    let phi = AffineMap::linear(Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap()).unwrap();
    let v = PaFn::indicator(Polytope::cuboid(&[0.0, 0.0], &[2.0, 1.0]).unwrap());
    let reps = conjugate_identities(&u, &Point::new(&[1.0, 0.0]), 3.0, &phi, Some(&v)).unwrap();
    assert_eq!(reps.len(), 6);
    for r in &reps {
        assert!(r.pass, "{}: {}", r.name, r.residual);
    }
    assert!(reps[0].residual <= 1e-12);

    let a = PaFn::indicator(interval(0.0, 2.0));
    let b = PaFn::indicator(interval(1.0, 3.0));
    for r in lattice_duality(&a, &b).unwrap() {
        assert!(r.pass && r.note.is_none(), "{}", r.name);
    }
}

#[test]
fn unboxed_moreau_envelope() {
    let u = ConvexFn::Pa(abs_on(-1.0, 1.0));
    let e = moreau(&u, 1.0).unwrap();
    assert!(e.domain().is_none());
    // x = 3: y = 1 is optimal, 1 + ½·2² = 3
    assert_relative_eq!(e.value(&p1(3.0)), 3.0, epsilon = 1e-12);
    // Huber inside: x²/2 for |x| <= 1
    assert_relative_eq!(e.value(&p1(0.5)), 0.125, epsilon = 1e-12);
    assert_relative_eq!(e.gradient(&p1(3.0)).unwrap().unwrap()[0], 2.0, epsilon = 1e-12);
}
