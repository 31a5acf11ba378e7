use super::*;
use approx::assert_relative_eq;

fn p1(x: f64) -> Point {
    Point::new(&[x])
}

fn interval(a: f64, b: f64) -> Polytope {
    Polytope::segment(p1(a), p1(b)).unwrap()
}

fn pa1(pieces: &[(f64, f64)], dom: Option<Polytope>) -> PaFn {
    PaFn::new(pieces.iter().map(|&(g, c)| AffineFn::new(p1(g), c)).collect(), dom).unwrap()
}

fn q(n: usize) -> QuadraticFn {
    QuadraticFn::scaled_norm(n, 1.0)
}

#[test]
fn eval_abs_on_interval() {
    let u = ConvexFn::Pa(pa1(&[(1.0, 0.0), (-1.0, 0.0)], Some(interval(-1.0, 1.0))));
    assert_eq!(u.eval(&p1(0.5)), 0.5);
    assert_eq!(u.eval(&p1(2.0)), f64::INFINITY);
    let w = ConvexFn::quadratic_on(q(2), Polytope::cube(2, 1.0).unwrap());
    assert_relative_eq!(w.eval(&Point::new(&[1.0, 1.0])), 1.0);
}

#[test]
fn subdifferentials() {
    let ind = ConvexFn::indicator(interval(0.0, 1.0));
    let s = ind.subdifferential(&p1(1.0)).unwrap();
    assert_eq!(s.bounded_part.vertices(), &[p1(0.0)]);
    assert_eq!(s.cone_generators.len(), 1);
    assert_relative_eq!(s.cone_generators[0][0], 1.0);

    let abs = ConvexFn::Pa(pa1(&[(1.0, 0.0), (-1.0, 0.0)], None));
    let s = abs.subdifferential(&p1(0.0)).unwrap();
    assert!(s.cone_generators.is_empty());
    assert_relative_eq!(s.bounded_part.volume(), 2.0);

    let mut pieces = vec![];
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            pieces.push(AffineFn::new(Point::new(&[sx, sy]), 0.0));
        }
    }
    let l1 = ConvexFn::Pa(PaFn::finite(pieces).unwrap());
    let s = l1.subdifferential(&Point::zeros(2)).unwrap();
    assert!(s.bounded_part.same_as(&Polytope::cube(2, 1.0).unwrap(), 1e-9));

    assert!(matches!(ind.subdifferential(&p1(2.0)), Err(Error::OutsideDomain)));
}

#[test]
fn lipschitz_constants() {
    let u = ConvexFn::Pa(pa1(&[(2.0, 0.0), (-1.0, 0.0)], Some(interval(-1.0, 1.0))));
    assert_relative_eq!(u.lipschitz_constant().unwrap(), 2.0);
    let w = ConvexFn::quadratic_on(q(2), Polytope::cube(2, 1.0).unwrap());
    assert_relative_eq!(w.lipschitz_constant().unwrap(), 2f64.sqrt());
    let d = ConvexFn::indicator(Polytope::segment(Point::zeros(2), Point::new(&[1.0, 0.0])).unwrap());
    assert!(matches!(d.lipschitz_constant(), Err(Error::DegenerateDomain)));
}

#[test]
fn meet_and_join_of_intervals() {
    let a = ConvexFn::indicator(interval(0.0, 2.0));
    let b = ConvexFn::indicator(interval(1.0, 3.0));
    let m = meet(&a, &b).unwrap();
    assert!(m.domain().unwrap().same_as(&interval(0.0, 3.0), 1e-9));
    assert_eq!(m.eval(&p1(2.5)), 0.0);
    let j = join(&a, &b).unwrap();
    assert!(j.domain().unwrap().same_as(&interval(1.0, 2.0), 1e-9));

    let x = ConvexFn::Pa(pa1(&[(1.0, 0.0)], Some(interval(-1.0, 1.0))));
    let nx = ConvexFn::Pa(pa1(&[(-1.0, 0.0)], Some(interval(-1.0, 1.0))));
    assert!(matches!(meet(&x, &nx), Err(Error::NotConvex(_))));
    let j = join(&x, &nx).unwrap();
    for t in [-1.0, -0.3, 0.0, 0.7, 1.0] {
        assert_relative_eq!(j.eval(&p1(t)), f64::abs(t));
    }

    let far = ConvexFn::indicator(interval(5.0, 6.0));
    assert!(matches!(join(&a, &far), Err(Error::EmptyDomain)));
}

#[test]
fn meet_and_join_of_quadratics() {
    let a = ConvexFn::quadratic_on(q(1), interval(0.0, 2.0)).to_plq().unwrap();
    let b = ConvexFn::quadratic_on(q(1), interval(1.0, 3.0)).to_plq().unwrap();
    let (a, b) = (ConvexFn::Plq(a), ConvexFn::Plq(b));
    let m = meet(&a, &b).unwrap();
    assert!(m.domain().unwrap().same_as(&interval(0.0, 3.0), 1e-9));
    for t in [0.0, 0.5, 1.5, 2.5, 3.0] {
        assert_relative_eq!(m.eval(&p1(t)), 0.5 * t * t, epsilon = 1e-12);
    }
    let j = join(&a, &b).unwrap();
    assert!(j.domain().unwrap().same_as(&interval(1.0, 2.0), 1e-9));
    assert_relative_eq!(j.eval(&p1(1.5)), 1.125, epsilon = 1e-12);
}

#[test]
fn plq_certificates() {
    // two tangent-matched cells: x²/2 on [0,1], then x - 1/2 on [1,2]
    let c1 = (interval(0.0, 1.0), q(1));
    let c2 = (interval(1.0, 2.0), QuadraticFn::from_parts(Matrix::zeros(1), p1(1.0), -0.5));
    let f = certify_plq(vec![c1.clone(), c2]).unwrap();
    assert_relative_eq!(f.eval(&p1(1.5)), 1.0);
    assert!(f.certificate().facets.iter().all(|fc| fc.max_jump <= 1e-12));

    let jump = (interval(1.0, 2.0), QuadraticFn::from_parts(Matrix::zeros(1), p1(1.0), 0.5));
    assert!(matches!(certify_plq(vec![c1.clone(), jump]), Err(Error::NotConvex(_))));

    let bent = (interval(1.0, 2.0), QuadraticFn::from_parts(Matrix::zeros(1), p1(0.0), 0.5));
    assert!(matches!(certify_plq(vec![c1, bent]), Err(Error::NotConvex(_))));

    let saddle = QuadraticFn::from_parts(Matrix::diag(&[1.0, -1.0]), Point::zeros(2), 0.0);
    assert!(matches!(certify_plq(vec![(Polytope::cube(2, 1.0).unwrap(), saddle)]), Err(Error::NotConvex(_))));
}

#[test]
fn cylinders() {
    let origin = ConvexFn::indicator(Polytope::point(p1(0.0)).unwrap());
    let j = interval(0.0, 1.0);
    let c = make_cylinder(&origin, &AffineFn::zero(1), &j).unwrap();
    assert!(c.is_cylinder());
    assert!(c.domain().unwrap().same_as(&j, 1e-9));
    assert_relative_eq!(c.eval(&p1(0.4)), 0.0, epsilon = 1e-9);
    assert_eq!(c.eval(&p1(1.5)), f64::INFINITY);

    let c = make_cylinder(&origin, &AffineFn::new(p1(1.0), 0.0), &j).unwrap();
    assert_relative_eq!(c.eval(&p1(0.4)), 0.4, epsilon = 1e-9);

    // quadratic on a segment of the x2-axis, swept along x1
    let seg = Polytope::segment(Point::new(&[0.0, -1.0]), Point::new(&[0.0, 1.0])).unwrap();
    let w = ConvexFn::quadratic_on(q(2), seg);
    let j2 = Polytope::segment(Point::zeros(2), Point::new(&[1.0, 0.0])).unwrap();
    let c = make_cylinder(&w, &AffineFn::zero(2), &j2).unwrap();
    for (x1, x2) in [(0.0, 0.5), (0.3, 0.5), (1.0, -0.8)] {
        assert_relative_eq!(c.eval(&Point::new(&[x1, x2])), 0.5 * x2 * x2, epsilon = 1e-9);
    }

    let not_seg = Polytope::cube(1, 1.0).unwrap().minkowski_sum(&Polytope::cube(1, 1.0).unwrap()).unwrap();
    let sq = Polytope::cube(2, 1.0).unwrap();
    assert!(matches!(make_cylinder(&w, &AffineFn::zero(2), &sq), Err(Error::BadSegment)));
    let _ = not_seg;
}

#[test]
fn pa_pruning_keeps_active_pieces() {
    // the piece 0 is dominated by |x| everywhere on R but not on [-1, 1]? it is, except at 0
    let u = pa1(&[(1.0, 0.0), (-1.0, 0.0), (0.0, -1.0), (0.5, -3.0)], None);
    assert_eq!(u.pieces().len(), 2);
    let ind = PaFn::indicator(interval(0.0, 1.0));
    assert_eq!(ind.pieces().len(), 1);
    assert_eq!(ind.eval(&p1(0.5)), 0.0);
}
