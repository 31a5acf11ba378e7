use super::*;
use crate::funcs::{AffineFn, ConvexFn, PaFn, QuadraticFn};
use crate::geometry::{Point, Polytope};
use crate::transforms::{moreau, moreau_box};
use crate::valuations::{z_zeta, z_zeta_numeric, z_zeta_plq, ConcFn, QuadOpts, Valuation};
use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn p1(x: f64) -> Point {
    Point::new(&[x])
}

fn unit_staircase(m: usize, n: usize) -> StaircaseSpec {
    StaircaseSpec::new(0.0, 1.0, 2.0, m, n)
}

#[test]
fn staircase_shape() {
    let sp = unit_staircase(1, 2);
    let u = staircase_sequence(&sp).unwrap();
    assert_eq!(u.cells().len(), 3);
    let ys = sp.breakpoints();
    // the r-strip has width λ·2t2/m with λ = 1/2
    assert_relative_eq!(ys[2] - ys[1], 1.0, epsilon = 1e-15);
    assert_relative_eq!(sp.lambda(), 0.5);
    for m in [1, 3, 8] {
        let ys = StaircaseSpec::new(0.5, 1.5, 4.0, m, 2).breakpoints();
        let widths: f64 = ys.windows(2).map(|w| w[1] - w[0]).sum();
        assert_relative_eq!(widths, 2.0, epsilon = 1e-14);
        assert!(ys.windows(2).all(|w| w[1] >= w[0]));
    }
    assert_eq!(staircase_sequence(&unit_staircase(8, 2)).unwrap().cells().len(), 17);
    assert!(staircase_sequence(&StaircaseSpec::new(1.0, 1.0, 2.0, 1, 2)).is_err());
}

#[test]
fn staircase_values_do_not_depend_on_m() {
    let zeta = ConcFn::sqrt();
    let closed = staircase_z_closed_form(&unit_staircase(1, 2), &zeta).unwrap();
    assert_relative_eq!(closed, 4.0 * 2f64.sqrt(), max_relative = 1e-14);
    assert_relative_eq!(staircase_limit_z(&unit_staircase(1, 2), &zeta).unwrap(), 8.0, max_relative = 1e-14);
    for n in [2, 3] {
        for m in [1, 2, 4, 8] {
            let sp = StaircaseSpec { s: 0.3, a: 1.1, r: 2.5, t1: 0.7, t2: 1.3, m, n };
            let cf = staircase_z_closed_form(&sp, &zeta).unwrap();
            let cs = z_zeta_plq(&staircase_sequence(&sp).unwrap(), &zeta);
            assert_relative_eq!(cf, cs, max_relative = 1e-8);
        }
    }
}

#[test]
fn staircase_lies_below_its_limit() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let zeta = ConcFn::power(0.5).unwrap();
    for _ in 0..20 {
        let s = rng.gen_range(0.0..1.0);
        let a = s + rng.gen_range(0.1..2.0);
        let r = a + rng.gen_range(0.1..2.0);
        let sp = StaircaseSpec::new(s, a, r, 2, 2);
        assert!(staircase_limit_z(&sp, &zeta).unwrap() >= staircase_z_closed_form(&sp, &zeta).unwrap());
        let u = staircase_sequence(&sp).unwrap();
        let lim = sp.limit().unwrap();
        for x in crate::funcs::grid_in_box(&Point::new(&[-1.0, -1.0]), &Point::new(&[1.0, 1.0]), 200) {
            assert!(u.eval(&x) <= lim.eval(&x) + 1e-12);
        }
    }
}

#[test]
fn degenerate_sequence_values() {
    let sqrt = ConcFn::sqrt();
    let z = |k, n, zeta: &ConcFn| z_zeta_plq(&degenerate_sequence(k, n).unwrap(), zeta);
    assert_relative_eq!(z(4, 2, &sqrt), 0.5, max_relative = 1e-14);
    assert_relative_eq!(z(100, 2, &sqrt), 0.1, max_relative = 1e-14);
    assert_relative_eq!(z(100, 3, &sqrt), 0.1, max_relative = 1e-14);
    let quarter = ConcFn::power(0.25).unwrap();
    assert_relative_eq!(z(10_000, 2, &quarter), 1e-3, max_relative = 1e-12);
    let vals: Vec<f64> = (1..=40).map(|k| z(k, 2, &quarter)).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]));
    assert!(degenerate_sequence(0, 2).is_err());
}

#[test]
fn zonotope_chords() {
    let v = |x: f64| 0.5 * x * x;
    let z = zonotope_segment_approx(1.0, 2).unwrap();
    assert_eq!(z.segments.len(), 2);
    let brute = (0..=2000).map(|i| -1.0 + i as f64 / 1000.0).map(|x| (z.composite.eval(&p1(x)) - v(x)).abs()).fold(0.0, f64::max);
    assert_relative_eq!(z.sup_gap, brute, max_relative = 1e-9);
    assert!(z.sup_gap <= 0.5);
    let mut prev = z.sup_gap;
    for m in [4, 8, 16] {
        let z = zonotope_segment_approx(1.0, m).unwrap();
        assert!(z.sup_gap <= 1.5 * prev / 2.0);
        prev = z.sup_gap;
    }
    for mu in [0.5, 2.0] {
        let z = zonotope_segment_approx(mu, 6).unwrap();
        assert!(z.composite.pieces().iter().all(|p| p.grad[0].abs() <= 2.0 * mu));
        let d = z.composite.domain().unwrap();
        assert!(d.same_as(&Polytope::cube(1, mu).unwrap(), 1e-12));
    }
    assert!(zonotope_segment_approx(1.0, 1).is_err());
}

#[test]
fn anisotropic_scaling_is_unimodular() {
    let m = anisotropic_scaling(2.0, 2, 2).unwrap();
    assert_eq!(m.matrix().to_rows(), vec![vec![2.0, 0.0], vec![0.0, 0.5]]);
    let m = anisotropic_scaling(2.0, 3, 3).unwrap();
    assert_eq!(m.matrix().to_rows(), vec![vec![2.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 0.25]]);
    assert_relative_eq!(m.det(), 1.0, epsilon = 1e-15);
    let img = Polytope::cuboid(&[0.0; 3], &[1.0; 3]).unwrap().affine_image(&m).unwrap();
    assert_relative_eq!(img.volume(), 1.0, epsilon = 1e-12);
    assert!(anisotropic_scaling(0.0, 1, 2).is_err());
    assert!(anisotropic_scaling(2.0, 0, 2).is_err());
}

fn half_norm_on_square() -> ConvexFn {
    ConvexFn::quadratic_on(QuadraticFn::scaled_norm(2, 1.0), Polytope::cube(2, 1.0).unwrap())
}

fn grid_gap(a: &PaFn, u: &ConvexFn) -> f64 {
    crate::funcs::grid_in_box(&Point::splat(2, -1.0), &Point::splat(2, 1.0), 10_000)
        .iter()
        .map(|x| {
            let (pa, ux) = (a.eval(x), u.eval(x));
            assert!(pa <= ux + 1e-12);
            ux - pa
        })
        .fold(0.0, f64::max)
}

#[test]
fn pa_approximation_of_a_quadratic() {
    let u = half_norm_on_square();
    let a4 = pa_approximate(&u, 4).unwrap();
    assert_eq!(a4.pieces().len(), 16);
    let cell_diam = 0.5 * 2f64.sqrt();
    let g4 = grid_gap(&a4, &u);
    assert!(g4 <= cell_diam * cell_diam / 2.0);
    let g8 = grid_gap(&pa_approximate(&u, 8).unwrap(), &u);
    assert!((3.0..5.0).contains(&(g4 / g8)), "ratio {}", g4 / g8);
    assert!(a4.pieces().iter().all(|p| p.grad.norm() <= u.lipschitz_constant().unwrap() + 1e-12));

    let pa = PaFn::new(
        vec![AffineFn::new(Point::new(&[1.0, 0.0]), 0.0), AffineFn::new(Point::new(&[-1.0, 0.5]), 0.0)],
        Some(Polytope::cube(2, 1.0).unwrap()),
    )
    .unwrap();
    let approx = pa_approximate(&ConvexFn::Pa(pa.clone()), 4).unwrap();
    assert!(grid_gap(&approx, &ConvexFn::Pa(pa)) <= 1e-12);
    let flat = ConvexFn::indicator(Polytope::segment(Point::new(&[0.0, 0.0]), Point::new(&[1.0, 1.0])).unwrap());
    assert!(matches!(pa_approximate(&flat, 4), Err(crate::Error::DegenerateDomain)));
}

fn abs_on_unit() -> ConvexFn {
    ConvexFn::Pa(
        PaFn::new(vec![AffineFn::new(p1(1.0), 0.0), AffineFn::new(p1(-1.0), 0.0)], Some(Polytope::cube(1, 1.0).unwrap()))
            .unwrap(),
    )
}

#[test]
fn tau_probe_of_box_envelopes() {
    let u = abs_on_unit();
    let seq: Vec<ConvexFn> =
        (1..=10).map(|j| ConvexFn::from(moreau_box(&u, 1.0, 2f64.powi(-j)).unwrap())).collect();
    let probe = tau_probe(&seq, &u, None, 1e-3).unwrap();
    assert!(probe.tau_consistent);
    assert!(probe.sup_gaps.windows(2).all(|w| w[1][0] < w[0][0]));
    assert!(probe.sup_gaps[9][0] < 1e-3);
    assert!(probe.lipschitz_bound <= 1.0 + 1e-6);
    assert!(probe.report().pass);
}

#[test]
fn tau_probe_flags_unbounded_lipschitz() {
    let u = abs_on_unit();
    let seq: Vec<ConvexFn> = (1..=10).map(|j| ConvexFn::from(moreau(&u, 2f64.powi(j)).unwrap())).collect();
    let probe = tau_probe(&seq, &u, None, 1e-3).unwrap();
    assert!(probe.sup_gaps[9][0] < 1e-3);
    assert!(probe.lipschitz[9] > 100.0);
    assert!(!probe.tau_consistent);
    assert!(!probe.report().pass);
}

#[test]
fn tau_probe_of_a_constant_sequence() {
    let u = half_norm_on_square();
    let probe = tau_probe(&vec![u.clone(); 4], &u, None, 0.0).unwrap();
    assert!(probe.sup_gaps.iter().flatten().all(|g| *g == 0.0));
    assert!(probe.tau_consistent);
}

#[test]
fn usc_experiments() {
    let val = Valuation::affine_surface(ConcFn::sqrt());
    let seq: Vec<ConvexFn> =
        [1, 2, 4, 8].iter().map(|&m| ConvexFn::Plq(staircase_sequence(&unit_staircase(m, 2)).unwrap())).collect();
    let limit = unit_staircase(1, 2).limit().unwrap();
    let rep = usc_experiment(&val, &seq, &limit).unwrap();
    assert!(rep.pass);
    for w in &rep.witnesses {
        assert_relative_eq!(w.values[1], 8.0 - 4.0 * 2f64.sqrt(), max_relative = 1e-12);
    }

    let u = half_norm_on_square();
    let seq: Vec<ConvexFn> = [2, 4, 8, 16].iter().map(|&k| ConvexFn::Pa(pa_approximate(&u, k).unwrap())).collect();
    let rep = usc_experiment(&val, &seq, &u).unwrap();
    assert!(rep.pass);
    assert!(rep.witnesses.iter().all(|w| w.values[0] == 0.0 && w.values[1] == 4.0));

    let rep = usc_experiment(&val, &vec![u.clone(); 3], &u).unwrap();
    assert!(rep.pass && rep.residual == 0.0);
    assert!(rep.witnesses.iter().all(|w| w.values[1] == 0.0));
}

fn point_envelope(n: usize) -> crate::transforms::EnvelopeFn {
    moreau_box(&ConvexFn::indicator(Polytope::point(Point::zeros(n)).unwrap()), 1.0, 1.0).unwrap()
}

#[test]
fn envelope_hessian_of_a_point_indicator() {
    let env = point_envelope(2);
    let h = env.hessian(&Point::new(&[0.3, -0.5])).unwrap();
    assert_eq!(h.to_rows(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    let huber = moreau_box(&abs_on_unit(), 1.0, 2.0).unwrap();
    assert_relative_eq!(huber.hessian(&p1(0.0)).unwrap().get(0, 0), 1.0, epsilon = 1e-12);
    assert_relative_eq!(huber.hessian(&p1(1.5)).unwrap().get(0, 0), 0.0, epsilon = 1e-12);
}

#[test]
fn touching_patch_on_a_quadratic_envelope() {
    for n in [1, 2] {
        let env = point_envelope(n);
        let x0 = Point::zeros(n);
        let (t, r) = (1.0 / 32.0, 0.1);
        let lc = PaFn::finite(vec![AffineFn::new(Point::zeros(n), -0.01)]).unwrap();
        let v = touching_patch(&env, &x0, t, r, &lc).unwrap();
        let rho = (1.0 - 4.0 * t.sqrt()) * r;
        let pts = crate::funcs::grid_in_box(&Point::splat(n, -r), &Point::splat(n, r), 2000);
        for x in &pts {
            let vx = v.eval(x);
            if x.norm_inf() <= rho {
                assert_relative_eq!(vx, 0.5 * (1.0 + t) * x.norm_sq(), epsilon = 1e-14);
            }
            assert!(lc.eval(x) <= vx && vx <= 0.5 * (1.0 + t) * n as f64 * r * r);
            if x.norm_inf() >= r - 1e-12 {
                assert!(vx <= env.value(x));
            }
        }
        // shared supporting hyperplane at x0
        assert_eq!(v.eval(&x0), env.value(&x0));
        for k in 0..n {
            let e = Point::unit(n, k) * 1e-4;
            assert!((v.eval(&(x0 + e)) - v.eval(&(x0 - e))).abs() <= 1e-12);
        }
    }
}

#[test]
fn touching_patch_loses_little_valuation() {
    let zeta = ConcFn::sqrt();
    let rho = 0.5;
    let env = point_envelope(2);
    let t = max_touching_t(&zeta, rho, 1.0, 2).unwrap();
    assert!(t > 0.0 && t < 1.0 / 16.0);
    let r = 0.1;
    let lc = PaFn::finite(vec![AffineFn::new(Point::zeros(2), -0.01)]).unwrap();
    let v = touching_patch(&env, &Point::zeros(2), t, r, &lc).unwrap();
    let cube = Polytope::cube(2, r).unwrap();
    let lhs = z_zeta_numeric(&|x: &Point| env.value(x), &cube, &zeta, QuadOpts::default()).unwrap();
    assert_relative_eq!(lhs, cube.volume(), max_relative = 1e-2);
    let rhs = z_zeta_plq(&v, &zeta);
    assert!(lhs <= rhs + 0.5 * rho * cube.volume());
    assert_relative_eq!(z_zeta(&ConvexFn::Plq(v), &zeta).unwrap(), rhs);
}

#[test]
fn touching_patch_rejects_bad_parameters() {
    let env = point_envelope(1);
    let lc = PaFn::finite(vec![AffineFn::new(p1(0.0), -0.01)]).unwrap();
    let x0 = p1(0.0);
    assert!(touching_patch(&env, &x0, 0.0625, 0.1, &lc).is_err());
    assert!(touching_patch(&env, &x0, 0.01, 2.0, &lc).is_err());
    let high = PaFn::finite(vec![AffineFn::new(p1(0.0), 0.001)]).unwrap();
    assert!(touching_patch(&env, &x0, 0.01, 0.1, &high).is_err());
    // flat part of the Huber envelope
    let huber = moreau_box(&abs_on_unit(), 1.0, 2.0).unwrap();
    assert!(touching_patch(&huber, &p1(1.5), 0.01, 0.1, &lc).is_err());
}
