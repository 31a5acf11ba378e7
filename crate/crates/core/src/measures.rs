//! Monge-Ampere measures of finite-valued piecewise-affine functions.
//!
//! For v = max_i ℓ_i on R^n the measure MA(v; B) = V_n(∂v(B)) is a finite sum
//! of atoms at the vertices of the subdivision induced by v, the atom at x
//! carrying the volume of the hull of the gradients active there.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcs::{affine_rank, subdivision_vertices, PaFn};
use crate::geometry::{Point, Polytope};
use crate::report::{CheckReport, Witness};
use crate::transforms::legendre_pa;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: Vec<f64>,
    pub mass: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MaMeasure {
    pub atoms: Vec<Atom>,
}

impl MaMeasure {
    pub fn total(&self) -> f64 {
        pairwise_sum(&self.atoms.iter().map(|a| a.mass).collect::<Vec<_>>())
    }

    /// ∫ β dMA.
    pub fn integrate(&self, beta: impl Fn(&Point) -> f64) -> f64 {
        pairwise_sum(&self.atoms.iter().map(|a| a.mass * beta(&Point::new(&a.x))).collect::<Vec<_>>())
    }
}

/// Sum with O(log n) error growth and a fixed association order.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n if n <= 8 => xs.iter().sum(),
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

pub fn monge_ampere_pa(v: &PaFn) -> Result<MaMeasure> {
    if !v.is_finite_valued() {
        return Err(Error::NotFiniteValued);
    }
    let n = v.dim();
    let grads: Vec<Point> = v.pieces().iter().map(|p| p.grad).collect();
    if affine_rank(&grads) < n {
        return Ok(MaMeasure::default());
    }
    let mut atoms = Vec::new();
    for vert in subdivision_vertices(n, &[v.pieces()], &[]) {
        let g: Vec<Point> = vert.active[0].iter().map(|&i| grads[i]).collect();
        let mass = Polytope::hull(&g)?.volume();
        if mass > 0.0 {
            // + 0.0 turns -0.0 into 0.0
            atoms.push(Atom { x: vert.x.coords().iter().map(|c| c + 0.0).collect(), mass });
        }
    }
    atoms.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap_or(std::cmp::Ordering::Equal));
    Ok(MaMeasure { atoms })
}

/// Total MA mass next to the volume of dom v*; the two agree for every
/// finite-valued PA function.
pub fn ma_total_mass(v: &PaFn) -> Result<(f64, f64)> {
    let mass = monge_ampere_pa(v)?.total();
    let dual = legendre_pa(v)?;
    let vol = dual.domain().map(|d| d.volume()).unwrap_or(0.0);
    Ok((mass, vol))
}

/// A continuous test function sampled on a regular grid over a box, extended
/// by multilinear interpolation inside the box and by 0 outside.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridFn {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Samples per axis (at least 2).
    pub shape: Vec<usize>,
    /// Row-major with the last axis fastest.
    pub values: Vec<f64>,
}

impl GridFn {
    pub fn from_fn(lo: &Point, hi: &Point, k: usize, f: impl Fn(&Point) -> f64) -> GridFn {
        let n = lo.dim();
        let k = k.max(2);
        let total = k.pow(n as u32);
        let values = (0..total)
            .map(|mut idx| {
                let mut x = Point::zeros(n);
                for a in (0..n).rev() {
                    let i = idx % k;
                    idx /= k;
                    x[a] = lo[a] + (hi[a] - lo[a]) * i as f64 / (k - 1) as f64;
                }
                f(&x)
            })
            .collect();
        GridFn { lo: lo.to_vec(), hi: hi.to_vec(), shape: vec![k; n], values }
    }

    pub fn eval(&self, x: &Point) -> f64 {
        let n = self.lo.len();
        let mut base = 0usize;
        let mut frac = [0.0; 3];
        let mut cell = [0usize; 3];
        for a in 0..n {
            let (lo, hi) = (self.lo[a], self.hi[a]);
            if x[a] < lo || x[a] > hi {
                return 0.0;
            }
            let k = self.shape[a];
            let t = if hi > lo { (x[a] - lo) / (hi - lo) * (k - 1) as f64 } else { 0.0 };
            let i = (t.floor() as usize).min(k - 2);
            cell[a] = i;
            frac[a] = t - i as f64;
        }
        let stride = |a: usize| self.shape[a + 1..].iter().product::<usize>();
        for a in 0..n {
            base += cell[a] * stride(a);
        }
        let mut s = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut off = 0;
            for a in 0..n {
                if corner >> a & 1 == 1 {
                    w *= frac[a];
                    off += stride(a);
                } else {
                    w *= 1.0 - frac[a];
                }
            }
            if w != 0.0 {
                s += w * self.values[base + off];
            }
        }
        s
    }
}

/// ∫β dMA(v_k) along a sequence against the limit ∫β dMA(v).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeakProbe {
    /// integrals[j][k] for test function j and sequence index k
    pub integrals: Vec<Vec<f64>>,
    pub limits: Vec<f64>,
    /// Gap at the last sequence element, per test function.
    pub gaps: Vec<f64>,
}

impl WeakProbe {
    pub fn report(&self, tol: f64) -> CheckReport {
        let worst = self.gaps.iter().copied().fold(0.0, f64::max);
        let witnesses = self
            .integrals
            .iter()
            .zip(&self.limits)
            .map(|(seq, lim)| Witness { x: vec![], values: seq.iter().copied().chain([*lim]).collect() })
            .collect();
        CheckReport::new("weak convergence of MA", worst, tol, witnesses)
    }
}

pub fn ma_weak_probe(v_seq: &[PaFn], v: &PaFn, testfns: &[GridFn]) -> Result<WeakProbe> {
    if v_seq.is_empty() || testfns.is_empty() {
        return Err(Error::EmptyInput);
    }
    let lim = monge_ampere_pa(v)?;
    let seq: Vec<MaMeasure> = v_seq.iter().map(monge_ampere_pa).collect::<Result<_>>()?;
    let mut integrals = Vec::new();
    let mut limits = Vec::new();
    let mut gaps = Vec::new();
    for b in testfns {
        let row: Vec<f64> = seq.iter().map(|m| m.integrate(|x| b.eval(x))).collect();
        let l = lim.integrate(|x| b.eval(x));
        gaps.push((row.last().unwrap() - l).abs());
        integrals.push(row);
        limits.push(l);
    }
    Ok(WeakProbe { integrals, limits, gaps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcs::AffineFn;
    use approx::assert_relative_eq;

    fn sign_patterns(n: usize) -> PaFn {
        let pieces = (0..1usize << n)
            .map(|m| AffineFn::new(Point::from_fn(n, |i| if m >> i & 1 == 1 { 1.0 } else { -1.0 }), 0.0))
            .collect();
        PaFn::finite(pieces).unwrap()
    }

    #[test]
    fn l1_norm_has_one_atom() {
        let m = monge_ampere_pa(&sign_patterns(2)).unwrap();
        assert_eq!(m.atoms.len(), 1);
        assert_eq!(m.atoms[0].x, vec![0.0, 0.0]);
        assert_relative_eq!(m.atoms[0].mass, 4.0);
        let (mass, dual) = ma_total_mass(&sign_patterns(3)).unwrap();
        assert_relative_eq!(mass, 8.0, max_relative = 1e-12);
        assert_relative_eq!(dual, 8.0, max_relative = 1e-12);
    }

    #[test]
    fn two_kinks_in_one_dimension() {
        let v = PaFn::finite(vec![
            AffineFn::new(Point::new(&[0.0]), 0.0),
            AffineFn::new(Point::new(&[1.0]), -1.0),
            AffineFn::new(Point::new(&[-1.0]), -1.0),
        ])
        .unwrap();
        let m = monge_ampere_pa(&v).unwrap();
        assert_eq!(m.atoms, vec![Atom { x: vec![-1.0], mass: 1.0 }, Atom { x: vec![1.0], mass: 1.0 }]);
    }

    #[test]
    fn affine_has_no_mass() {
        let v = PaFn::finite(vec![AffineFn::new(Point::new(&[1.0, 2.0]), 3.0)]).unwrap();
        assert!(monge_ampere_pa(&v).unwrap().atoms.is_empty());
        assert_eq!(ma_total_mass(&v).unwrap(), (0.0, 0.0));
        let ind = PaFn::indicator(Polytope::cube(1, 1.0).unwrap());
        assert!(matches!(monge_ampere_pa(&ind), Err(Error::NotFiniteValued)));
    }

    #[test]
    fn weak_probe_of_constant_sequence() {
        let v = sign_patterns(2);
        let box_lo = Point::splat(2, -2.0);
        let box_hi = Point::splat(2, 2.0);
        let one = GridFn::from_fn(&box_lo, &box_hi, 5, |_| 1.0);
        let bump = GridFn::from_fn(&box_lo, &box_hi, 9, |x| (1.0 - x.norm()).max(0.0));
        let p = ma_weak_probe(&[v.clone(), v.clone()], &v, &[one, bump]).unwrap();
        assert_eq!(p.gaps, vec![0.0, 0.0]);
        assert_relative_eq!(p.limits[0], 4.0);
        assert!(p.report(1e-12).pass);
    }
}
