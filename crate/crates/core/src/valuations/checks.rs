use serde::{Deserialize, Serialize};

use super::conc::{validate_conc, ConcFn, ConcKind};
use super::zeta::z_zeta;
use crate::error::{Error, Result};
use crate::funcs::{join, meet, AffineFn, ConvexFn, QuadraticFn};
use crate::geometry::{AffineMap, Point, Polytope};
use crate::report::{CheckReport, Witness};

/// Z(u) = c0 + c1 V_n(dom u) + Z_ζ(u).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Valuation {
    pub c0: f64,
    pub c1: f64,
    pub zeta: ConcFn,
}

impl Valuation {
    pub fn new(c0: f64, c1: f64, zeta: ConcFn) -> Valuation {
        Valuation { c0, c1, zeta }
    }

    /// Only the Z_ζ term.
    pub fn affine_surface(zeta: ConcFn) -> Valuation {
        Valuation { c0: 0.0, c1: 0.0, zeta }
    }
}

pub fn apply(val: &Valuation, u: &ConvexFn) -> Result<f64> {
    let dom = u.domain().ok_or_else(|| Error::BadInput("valuations need a compact domain".into()))?;
    let vol = if dom.is_degenerate() { 0.0 } else { dom.volume() };
    Ok(val.c0 + val.c1 * vol + z_zeta(u, &val.zeta)?)
}

/// Z(u ∧ v) + Z(u ∨ v) = Z(u) + Z(v) for a pair whose meet is convex. A pair
/// with a nonconvex meet gives a skipped report.
pub fn valuation_identity_check(val: &Valuation, u: &ConvexFn, v: &ConvexFn) -> Result<CheckReport> {
    let name = "valuation identity";
    let m = match meet(u, v) {
        Ok(m) => m,
        Err(Error::NotConvex(why)) => return Ok(CheckReport::skipped(name, 0.0, why)),
        Err(e) => return Err(e),
    };
    let j = join(u, v)?;
    let (zu, zv) = (apply(val, u)?, apply(val, v)?);
    let (zm, zj) = (apply(val, &m)?, apply(val, &j)?);
    let residual = ((zm + zj) - (zu + zv)).abs();
    let tol = 1e-8 * (1.0 + zu.abs() + zv.abs());
    Ok(CheckReport::new(name, residual, tol, vec![Witness { x: vec![], values: vec![zm, zj, zu, zv] }]))
}

/// Reparametrizations and additions under which Z_ζ is invariant.
#[derive(Clone, Debug)]
pub enum Transform {
    /// u ∘ φ with |det φ| = 1.
    Map(AffineMap),
    /// x -> u(x - y).
    Translation(Point),
    /// u + c.
    Shift(f64),
    /// u + ℓ.
    AddAffine(AffineFn),
}

impl Transform {
    pub fn name(&self) -> &'static str {
        match self {
            Transform::Map(_) => "unimodular map",
            Transform::Translation(_) => "translation",
            Transform::Shift(_) => "vertical shift",
            Transform::AddAffine(_) => "added affine function",
        }
    }

    pub fn apply(&self, u: &ConvexFn) -> Result<ConvexFn> {
        match self {
            Transform::Map(m) => {
                if !m.is_unimodular(1e-9) {
                    return Err(Error::BadTransform(format!("|det| = {} is not 1", m.det().abs())));
                }
                u.compose_affine(m)
            }
            Transform::Translation(y) => u.translate(y),
            Transform::Shift(c) => u.add_constant(*c),
            Transform::AddAffine(l) => u.add_affine(l),
        }
    }
}

pub fn invariance_check(val: &Valuation, u: &ConvexFn, t: &Transform) -> Result<CheckReport> {
    let tu = t.apply(u)?;
    let (a, b) = (apply(val, u)?, apply(val, &tu)?);
    let tol = 1e-8 * (1.0 + a.abs());
    Ok(CheckReport::new(format!("invariance under {}", t.name()), (a - b).abs(), tol, vec![Witness {
        x: vec![],
        values: vec![a, b],
    }]))
}

/// ζ recovered from a black-box functional by Z(aq + I_C) / V_n(C), with the
/// argument det D²(aq) = a^n.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExtractedZeta {
    pub a: Vec<f64>,
    /// Arguments a^n at which ζ was sampled.
    pub det: Vec<f64>,
    pub zeta: Vec<f64>,
    /// Largest disagreement between C = [-1,1]^n and P = [0,1]^n ratios.
    pub consistency: f64,
}

impl ExtractedZeta {
    /// The samples as an interpolated ζ, validated.
    pub fn to_conc(&self) -> Result<ConcFn> {
        validate_conc(ConcKind::Sampled { t: self.det.clone(), values: self.zeta.clone() })
    }
}

pub fn extract_zeta(black_box: &dyn Fn(&ConvexFn) -> Result<f64>, n: usize, a_grid: &[f64]) -> Result<ExtractedZeta> {
    let c = Polytope::cube(n, 1.0)?;
    let p = Polytope::cuboid(&vec![0.0; n], &vec![1.0; n])?;
    let mut a: Vec<f64> = a_grid.iter().copied().filter(|&x| x >= 0.0).collect();
    if !a.contains(&0.0) {
        a.push(0.0);
    }
    a.sort_by(f64::total_cmp);
    a.dedup();
    let mut out = ExtractedZeta { a: vec![], det: vec![], zeta: vec![], consistency: 0.0 };
    for &ai in &a {
        let q = QuadraticFn::scaled_norm(n, ai);
        let r1 = black_box(&ConvexFn::quadratic_on(q, c.clone()))? / c.volume();
        let r2 = black_box(&ConvexFn::quadratic_on(q, p.clone()))? / p.volume();
        let gap = (r1 - r2).abs() / (1.0 + r1.abs());
        out.consistency = out.consistency.max(gap);
        if gap > 1e-8 {
            return Err(Error::NotAValuation(format!(
                "ratio Z/V differs between domains at a = {ai}: {r1} vs {r2}"
            )));
        }
        out.a.push(ai);
        out.det.push(ai.powi(n as i32));
        out.zeta.push(r1);
    }
    Ok(out)
}
