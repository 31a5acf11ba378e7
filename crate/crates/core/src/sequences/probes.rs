use rayon::prelude::*;
use crate::error::{Error, Result};
use crate::funcs::{grid_in_box, ConvexFn};
use crate::geometry::{Point, Polytope};
use crate::report::{CheckReport, Witness};
use crate::valuations::{apply, Valuation};

/// Finite-horizon evidence for τ-convergence of u_k to u.
#[derive(Clone, Debug)]
pub struct TauProbe {
    pub compacts: Vec<Polytope>,
    /// Largest sampled gradient norm over all indices.
    pub lipschitz_bound: f64,
    /// sup |u_k - u| per index, per compact.
    pub sup_gaps: Vec<Vec<f64>>,
    /// Sampled gradient norm per index.
    pub lipschitz: Vec<f64>,
    pub tol: f64,
    pub tau_consistent: bool,
}

impl TauProbe {
    pub fn report(&self) -> CheckReport {
        let last = self.sup_gaps.last().map(|g| g.iter().cloned().fold(0.0, f64::max)).unwrap_or(0.0);
        let witnesses = self
            .sup_gaps
            .iter()
            .zip(&self.lipschitz)
            .enumerate()
            .map(|(k, (g, l))| Witness { x: vec![k as f64], values: vec![g.iter().cloned().fold(0.0, f64::max), *l] })
            .collect();
        let mut rep = CheckReport::new("tau probe", last, self.tol, witnesses);
        if !self.tau_consistent {
            rep.pass = false;
            if last <= self.tol {
                rep.note = Some("Lipschitz maxima grow along the sequence".into());
            }
        }
        rep
    }
}

/// dom u shrunk by 5% toward its barycenter.
pub fn default_compacts(u: &ConvexFn) -> Result<Vec<Polytope>> {
    let d = u.domain().ok_or_else(|| Error::BadInput("limit needs a compact domain".into()))?;
    Ok(vec![d.shrink_toward_barycenter(0.95)])
}

fn sampled_lipschitz(f: &ConvexFn, window: &[Point], h: f64) -> f64 {
    let n = f.dim();
    window
        .par_iter()
        .map(|x| {
            let mut g2 = 0.0;
            let mut any = false;
            for i in 0..n {
                let e = Point::unit(n, i) * h;
                let (fp, fm) = (f.eval(&(*x + e)), f.eval(&(*x - e)));
                if fp.is_finite() && fm.is_finite() {
                    g2 += ((fp - fm) / (2.0 * h)).powi(2);
                    any = true;
                }
            }
            if any {
                g2.sqrt()
            } else {
                0.0
            }
        })
        .reduce(|| 0.0, f64::max)
}

/// Sup gaps on the compacts and sampled Lipschitz constants over the bounding
/// box of dom u widened by 1. The verdict asks for final gaps within `tol` and
/// Lipschitz values in the second half of the run at most twice those of the
/// first half.
pub fn tau_probe(u_seq: &[ConvexFn], u: &ConvexFn, compacts: Option<&[Polytope]>, tol: f64) -> Result<TauProbe> {
    if u_seq.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = u.dim();
    let compacts = match compacts {
        Some(c) => c.to_vec(),
        None => default_compacts(u)?,
    };
    let dom = u.domain().ok_or_else(|| Error::BadInput("limit needs a compact domain".into()))?;
    for c in &compacts {
        if c.vertices().iter().any(|v| !dom.interior_contains(v)) {
            return Err(Error::BadInput("compacts must lie in the interior of dom u".into()));
        }
    }
    let probes: Vec<Vec<Point>> = compacts
        .iter()
        .map(|c| {
            let (lo, hi) = c.bbox();
            grid_in_box(&lo, &hi, 400).into_iter().filter(|x| c.contains(x)).collect()
        })
        .collect();
    let (lo, hi) = dom.bbox();
    let pad = Point::splat(n, 1.0);
    let window = grid_in_box(&(lo - pad), &(hi + pad), 20usize.pow(n as u32).min(2000));
    let h = 1e-6 * (1.0 + dom.diameter());
    let mut sup_gaps = Vec::with_capacity(u_seq.len());
    let mut lipschitz = Vec::with_capacity(u_seq.len());
    for f in u_seq {
        let gaps: Vec<f64> = probes
            .iter()
            .map(|pts| {
                pts.par_iter()
                    .map(|x| {
                        let (a, b) = (f.eval(x), u.eval(x));
                        if a.is_finite() && b.is_finite() {
                            (a - b).abs()
                        } else {
                            f64::INFINITY
                        }
                    })
                    .reduce(|| 0.0, f64::max)
            })
            .collect();
        sup_gaps.push(gaps);
        lipschitz.push(sampled_lipschitz(f, &window, h));
    }
    let half = u_seq.len() / 2;
    let head = lipschitz[..half.max(1)].iter().cloned().fold(0.0, f64::max);
    let tail = lipschitz[half..].iter().cloned().fold(0.0, f64::max);
    let last_ok = sup_gaps.last().unwrap().iter().all(|g| *g <= tol);
    let lipschitz_bound = lipschitz.iter().cloned().fold(0.0, f64::max);
    Ok(TauProbe {
        compacts,
        lipschitz_bound,
        sup_gaps,
        lipschitz,
        tol,
        tau_consistent: last_ok && tail <= 2.0 * head,
    })
}

/// Z(u_k) along the sequence against Z(limit). Upper semicontinuity predicts
/// Z(limit) >= the tail values; the residual is the excess of the largest tail
/// value over Z(limit). Each witness holds (k; Z(u_k), Z(limit) - Z(u_k)).
pub fn usc_experiment(val: &Valuation, seq: &[ConvexFn], limit: &ConvexFn) -> Result<CheckReport> {
    if seq.is_empty() {
        return Err(Error::EmptyInput);
    }
    let zl = apply(val, limit)?;
    let zs = seq.iter().map(|u| apply(val, u)).collect::<Result<Vec<f64>>>()?;
    let tail_max = zs[zs.len() / 2..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let gap = zl - tail_max;
    let witnesses =
        zs.iter().enumerate().map(|(k, z)| Witness { x: vec![k as f64], values: vec![*z, zl - z] }).collect();
    let tol = 1e-8 * (1.0 + zl.abs());
    Ok(CheckReport::new("upper semicontinuity", (-gap).max(0.0), tol, witnesses)
        .with_note(format!("Z(limit) = {zl}, max tail Z = {tail_max}, gap = {gap}")))
}
