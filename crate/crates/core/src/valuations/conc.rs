use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite horizon used in place of t → ∞.
pub const TAIL_T: f64 = 1e6;
pub const TAIL_RATIO: f64 = 1e-3;

/// The shape of a candidate ζ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConcKind {
    /// t^p with 0 < p < 1.
    Power { p: f64 },
    /// ζ(0) = 0, slope `slopes[i]` between `breaks[i-1]` and `breaks[i]`
    /// (with breaks[-1] = 0 and one more slope than breaks).
    PiecewiseLinear { breaks: Vec<f64>, slopes: Vec<f64> },
    /// Linear interpolation of samples, extended past the last sample with the
    /// last slope.
    Sampled { t: Vec<f64>, values: Vec<f64> },
    /// t ζ(1/t).
    Dual { inner: Box<ConcKind> },
    Zero,
}

impl ConcKind {
    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 || t.is_nan() {
            return match self {
                ConcKind::Sampled { t: ts, values } if ts.first() == Some(&0.0) => values[0],
                _ => 0.0,
            };
        }
        match self {
            ConcKind::Power { p } => t.powf(*p),
            ConcKind::PiecewiseLinear { breaks, slopes } => {
                let mut v = 0.0;
                let mut prev = 0.0;
                for (i, &b) in breaks.iter().enumerate() {
                    if t <= b {
                        return v + slopes[i] * (t - prev);
                    }
                    v += slopes[i] * (b - prev);
                    prev = b;
                }
                v + slopes[breaks.len()] * (t - prev)
            }
            ConcKind::Sampled { t: ts, values } => interpolate(ts, values, t),
            ConcKind::Dual { inner } => {
                if t.is_infinite() {
                    return f64::INFINITY;
                }
                t * inner.eval(1.0 / t)
            }
            ConcKind::Zero => 0.0,
        }
    }

    fn check_shape(&self) -> Result<()> {
        let bad = |r: String| Err(Error::NotConc { t: 0.0, reason: r });
        match self {
            ConcKind::Power { p } if !(*p > 0.0 && *p < 1.0) => bad(format!("power {p} outside (0, 1)")),
            ConcKind::PiecewiseLinear { breaks, slopes } => {
                if slopes.len() != breaks.len() + 1 {
                    return bad("need one more slope than breakpoints".into());
                }
                if breaks.windows(2).any(|w| w[0] >= w[1]) || breaks.first().is_some_and(|&b| b <= 0.0) {
                    return bad("breakpoints must be positive and increasing".into());
                }
                Ok(())
            }
            ConcKind::Sampled { t, values } => {
                if t.len() != values.len() || t.len() < 2 {
                    return bad("need at least two samples of matching length".into());
                }
                if t.windows(2).any(|w| w[0] >= w[1]) || t[0] < 0.0 {
                    return bad("sample points must be nonnegative and increasing".into());
                }
                Ok(())
            }
            ConcKind::Dual { inner } => inner.check_shape(),
            _ => Ok(()),
        }
    }
}

fn interpolate(ts: &[f64], vs: &[f64], t: f64) -> f64 {
    let k = ts.partition_point(|&s| s <= t);
    let (i, j) = match k {
        0 => {
            // below the first sample: interpolate towards (0, 0)
            return if ts[0] > 0.0 { vs[0] * t / ts[0] } else { vs[0] };
        }
        k if k >= ts.len() => (ts.len() - 2, ts.len() - 1),
        k => (k - 1, k),
    };
    vs[i] + (vs[j] - vs[i]) * (t - ts[i]) / (ts[j] - ts[i])
}

/// Evidence that a function belongs to Conc on the test grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcCertificate {
    /// Largest amount by which a middle sample falls below its chord.
    pub concavity_residual: f64,
    /// ζ(TAIL_T) / TAIL_T.
    pub tail_ratio: f64,
}

/// A validated ζ: nonnegative, concave, ζ(0) = 0 and ζ(t)/t → 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcFn {
    kind: ConcKind,
    certificate: ConcCertificate,
}

impl ConcFn {
    pub fn power(p: f64) -> Result<ConcFn> {
        validate_conc(ConcKind::Power { p })
    }

    pub fn sqrt() -> ConcFn {
        ConcFn::power(0.5).expect("square root is in Conc")
    }

    pub fn zero() -> ConcFn {
        validate_conc(ConcKind::Zero).expect("zero is in Conc")
    }

    /// min(t, c).
    pub fn capped_identity(c: f64) -> Result<ConcFn> {
        validate_conc(ConcKind::PiecewiseLinear { breaks: vec![c], slopes: vec![1.0, 0.0] })
    }

    pub fn kind(&self) -> &ConcKind {
        &self.kind
    }

    pub fn certificate(&self) -> &ConcCertificate {
        &self.certificate
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.kind.eval(t)
    }
}

impl fmt::Display for ConcFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ConcKind::Power { p } => write!(f, "power:{p}"),
            ConcKind::PiecewiseLinear { breaks, slopes } if breaks.len() == 1 && slopes == &[1.0, 0.0] => {
                write!(f, "min:{}", breaks[0])
            }
            ConcKind::Zero => write!(f, "zero"),
            other => write!(f, "{}", serde_json::to_string(other).unwrap_or_default()),
        }
    }
}

/// Parses `power:P`, `sqrt`, `min:C` or `zero`.
impl FromStr for ConcFn {
    type Err = Error;

    fn from_str(s: &str) -> Result<ConcFn> {
        let bad = || Error::BadInput(format!("unknown zeta '{s}' (expected power:P, sqrt, min:C or zero)"));
        match s.split_once(':') {
            Some(("power", p)) => ConcFn::power(p.trim().parse().map_err(|_| bad())?),
            Some(("min", c)) => ConcFn::capped_identity(c.trim().parse().map_err(|_| bad())?),
            None if s == "sqrt" => Ok(ConcFn::sqrt()),
            None if s == "zero" => Ok(ConcFn::zero()),
            _ => Err(bad()),
        }
    }
}

/// Log-spaced points 1e-6 ..= 1e6, 20 per decade.
fn test_grid() -> Vec<f64> {
    (0..=240).map(|i| 10f64.powf(-6.0 + i as f64 / 20.0)).collect()
}

/// Checks ζ(0) = 0, nonnegativity, concavity on a log grid and the tail proxy
/// ζ(TAIL_T)/TAIL_T < TAIL_RATIO.
pub fn validate_zeta(f: &dyn Fn(f64) -> f64) -> Result<ConcCertificate> {
    let cert = shape_certificate(f)?;
    if cert.tail_ratio >= TAIL_RATIO {
        return Err(Error::NotConc { t: TAIL_T, reason: format!("tail slope {}", cert.tail_ratio) });
    }
    Ok(cert)
}

fn shape_certificate(f: &dyn Fn(f64) -> f64) -> Result<ConcCertificate> {
    let z0 = f(0.0);
    if z0.abs() > 1e-12 || !z0.is_finite() {
        return Err(Error::NotConc { t: 0.0, reason: format!("zeta(0) = {z0}") });
    }
    let ts = test_grid();
    let vs: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    for (&t, &v) in ts.iter().zip(&vs) {
        if !v.is_finite() || v < -1e-12 {
            return Err(Error::NotConc { t, reason: format!("zeta(t) = {v}") });
        }
    }
    let mut worst = 0.0f64;
    // includes the chord from (0, 0)
    let mut pts = vec![(0.0, 0.0)];
    pts.extend(ts.iter().copied().zip(vs.iter().copied()));
    for w in pts.windows(3) {
        let ((t0, v0), (t1, v1), (t2, v2)) = (w[0], w[1], w[2]);
        let chord = v0 + (v2 - v0) * (t1 - t0) / (t2 - t0);
        let r = chord - v1;
        if r > 1e-9 * (1.0 + v1.abs()) {
            return Err(Error::NotConc { t: t1, reason: format!("concavity violated by {r:e}") });
        }
        worst = worst.max(r);
    }
    Ok(ConcCertificate { concavity_residual: worst.max(0.0), tail_ratio: vs[vs.len() - 1] / TAIL_T })
}

/// lim ζ(t)/t when the kind determines it.
fn tail_limit(kind: &ConcKind) -> Option<f64> {
    match kind {
        ConcKind::Power { .. } | ConcKind::Zero => Some(0.0),
        ConcKind::PiecewiseLinear { slopes, .. } => slopes.last().copied(),
        // t ζ(1/t) / t = ζ(1/t) -> ζ(0) = 0
        ConcKind::Dual { .. } => Some(0.0),
        ConcKind::Sampled { .. } => None,
    }
}

/// Validates a candidate. Kinds with a known tail (powers, piecewise-linear,
/// duals) are judged by the exact limit of ζ(t)/t; sampled ones by the
/// finite-horizon proxy, which would wrongly reject t^p for p >= 1/2.
pub fn validate_conc(kind: ConcKind) -> Result<ConcFn> {
    kind.check_shape()?;
    if let ConcKind::Dual { inner } = &kind {
        validate_conc((**inner).clone())?;
    }
    let f = |t| kind.eval(t);
    let certificate = match tail_limit(&kind) {
        Some(l) if l > 0.0 => return Err(Error::NotConc { t: f64::INFINITY, reason: format!("tail slope {l}") }),
        Some(_) => shape_certificate(&f)?,
        None => validate_zeta(&f)?,
    };
    Ok(ConcFn { kind, certificate })
}

/// ζ̃(t) = t ζ(1/t), again in Conc.
pub fn zeta_dual(z: &ConcFn) -> Result<ConcFn> {
    let kind = match &z.kind {
        ConcKind::Power { p } => ConcKind::Power { p: 1.0 - p },
        ConcKind::Dual { inner } => (**inner).clone(),
        ConcKind::Zero => ConcKind::Zero,
        k => ConcKind::Dual { inner: Box::new(k.clone()) },
    };
    validate_conc(kind).map_err(|e| Error::EvalError(format!("dual of a valid zeta failed validation: {e}")))
}
