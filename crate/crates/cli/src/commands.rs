use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;
use serde_json::{json, Value};

use affval::funcs::{ConvexFn, PaFn};
use affval::geometry::Point;
use affval::harness::run_suite;
use affval::io::{function_to_json, parse_function, to_pretty, FnJson};
use affval::measures::{ma_total_mass, monge_ampere_pa};
use affval::sequences::{
    degenerate_sequence, pa_approximate, staircase_sequence, usc_experiment, zonotope_segment_approx, StaircaseSpec,
};
use affval::transforms::{inf_conv_pa, legendre_pa, legendre_quadratic, moreau, moreau_box};
use affval::valuations::{z_zeta_with, ConcFn, QuadOpts, Valuation};
use affval::CheckReport;

use crate::output::{csv, emit, num, read};
use crate::{Cmd, Construct, Experiment};

fn load(path: &Path) -> Result<ConvexFn> {
    parse_function(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_pa(path: &Path) -> Result<PaFn> {
    match load(path)? {
        ConvexFn::Pa(f) => Ok(f),
        other => bail!("{}: expected a PA function (type \"pa\" or \"indicator\"), got {}", path.display(), other.kind()),
    }
}

fn fn_text(u: &ConvexFn) -> Result<String> {
    Ok(to_pretty(&function_to_json(u)?))
}

fn parse_point(s: &str, n: usize) -> Result<Point> {
    let coords = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| anyhow!("bad coordinate {t:?} in --at {s:?}")))
        .collect::<Result<Vec<f64>>>()?;
    if coords.len() != n {
        bail!("--at {s:?}: expected {n} coordinates");
    }
    Ok(Point::new(&coords))
}

#[derive(Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum Grid {
    Box { lo: Vec<f64>, hi: Vec<f64>, per_axis: usize },
    Points { points: Vec<Vec<f64>> },
}

impl Grid {
    fn points(&self, n: usize) -> Result<Vec<Point>> {
        let check = |v: &[f64]| -> Result<Point> {
            if v.len() != n {
                bail!("grid point {v:?} does not have {n} coordinates");
            }
            Ok(Point::new(v))
        };
        match self {
            Grid::Points { points } => points.iter().map(|p| check(p)).collect(),
            Grid::Box { lo, hi, per_axis } => {
                let (lo, hi) = (check(lo)?, check(hi)?);
                let k = *per_axis;
                if k < 2 {
                    bail!("per_axis must be at least 2");
                }
                let total = k.pow(n as u32);
                Ok((0..total)
                    .map(|mut idx| {
                        Point::from_fn(n, |i| {
                            let j = idx % k;
                            idx /= k;
                            lo[i] + (hi[i] - lo[i]) * j as f64 / (k - 1) as f64
                        })
                    })
                    .collect())
            }
        }
    }
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum UscConfig {
    Staircase {
        s: f64,
        a: f64,
        r: f64,
        #[serde(default = "two")]
        n: usize,
        m: Vec<usize>,
        #[serde(default = "one")]
        t1: f64,
        #[serde(default = "one")]
        t2: f64,
        #[serde(default = "sqrt")]
        zeta: String,
        #[serde(default)]
        c0: f64,
        #[serde(default)]
        c1: f64,
    },
    PaApproximate {
        function: FnJson,
        k: Vec<usize>,
        #[serde(default = "sqrt")]
        zeta: String,
        #[serde(default)]
        c0: f64,
        #[serde(default)]
        c1: f64,
    },
}

fn two() -> usize {
    2
}
fn one() -> f64 {
    1.0
}
fn sqrt() -> String {
    "sqrt".into()
}

fn reports_csv(reps: &[CheckReport]) -> Result<String> {
    let rows: Vec<Vec<String>> = reps
        .iter()
        .enumerate()
        .map(|(i, r)| vec![i.to_string(), r.name.clone(), num(r.residual), num(r.tolerance), r.pass.to_string()])
        .collect();
    csv(&["trial", "check", "residual", "tolerance", "pass"], &rows)
}

/// Runs one subcommand; Ok(false) means a check failed.
pub fn run(cmd: Cmd) -> Result<bool> {
    match cmd {
        Cmd::Eval { file, at } => {
            let u = load(&file)?;
            let vals: Vec<Value> = at
                .iter()
                .map(|s| {
                    let x = parse_point(s, u.dim())?;
                    Ok(json!({"x": x.to_vec(), "value": u.eval(&x)}))
                })
                .collect::<Result<_>>()?;
            emit(None, &to_pretty(&Value::Array(vals)))?;
        }
        Cmd::Conjugate { input, out } => {
            let u = load(&input)?;
            let us = match &u {
                ConvexFn::Pa(f) => ConvexFn::Pa(legendre_pa(f)?),
                ConvexFn::Quadratic { q, domain: None } => ConvexFn::Quadratic { q: legendre_quadratic(q)?, domain: None },
                other => bail!("conjugate supports PA functions and quadratics on R^n, got {}", other.kind()),
            };
            emit(out.out.as_deref(), &fn_text(&us)?)?;
        }
        Cmd::Infconv { a, b, out } => {
            let w = inf_conv_pa(&load_pa(&a)?, &load_pa(&b)?)?;
            emit(out.out.as_deref(), &fn_text(&ConvexFn::Pa(w))?)?;
        }
        Cmd::Envelope { lambda, mu, file, eval_grid, out } => {
            let u = load(&file)?;
            let env = match mu {
                Some(mu) => moreau_box(&u, lambda, mu)?,
                None => moreau(&u, lambda)?,
            };
            let grid: Grid = serde_json::from_str(&read(&eval_grid)?)
                .with_context(|| format!("in {}: expected {{lo, hi, per_axis}} or {{points}}", eval_grid.display()))?;
            let n = u.dim();
            let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
            header.push("value".into());
            let rows: Vec<Vec<String>> = grid
                .points(n)?
                .iter()
                .map(|x| {
                    let mut r: Vec<String> = x.coords().iter().map(|c| num(*c)).collect();
                    r.push(num(env.value(x)));
                    r
                })
                .collect();
            let h: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
            emit(out.out.as_deref(), &csv(&h, &rows)?)?;
        }
        Cmd::Ma { file } => {
            let v = load_pa(&file)?;
            let m = monge_ampere_pa(&v)?;
            let (total, dual) = ma_total_mass(&v)?;
            let atoms: Vec<Value> = m.atoms.iter().map(|a| json!({"x": a.x, "mass": a.mass})).collect();
            emit(None, &to_pretty(&json!({"atoms": atoms, "total": total, "dual_volume": dual})))?;
        }
        Cmd::Zvalue { zeta, file, res } => {
            let z: ConcFn = zeta.parse()?;
            let u = load(&file)?;
            let opts = QuadOpts { res, ..QuadOpts::default() };
            let v = z_zeta_with(&u, &z, opts)?;
            emit(None, &to_pretty(&json!({"zeta": z.to_string(), "value": v})))?;
        }
        Cmd::Check { suite, seed, trials, dim, tol, json } => {
            if trials == 0 {
                bail!("--trials must be at least 1");
            }
            let mut reps = run_suite(&suite, seed, trials, dim)?;
            if let Some(t) = tol {
                if !(t >= 0.0) {
                    bail!("--tol must be nonnegative");
                }
                for r in &mut reps {
                    r.tolerance = t;
                    r.pass = r.residual <= t;
                }
            }
            if let Some(p) = json {
                emit(Some(&p), &to_pretty(&serde_json::to_value(&reps)?))?;
            }
            emit(None, &reports_csv(&reps)?)?;
            return Ok(reps.iter().all(|r| r.pass));
        }
        Cmd::Construct { what } => construct(what)?,
        Cmd::Experiment { what: Experiment::Usc { config, json } } => {
            let cfg: UscConfig = serde_json::from_str(&read(&config)?).with_context(|| format!("in {}", config.display()))?;
            let (val, seq, limit) = usc_inputs(cfg)?;
            let rep = usc_experiment(&val, &seq, &limit)?;
            if let Some(p) = json {
                emit(Some(&p), &to_pretty(&serde_json::to_value(&rep)?))?;
            }
            let rows: Vec<Vec<String>> = rep
                .witnesses
                .iter()
                .map(|w| vec![(w.x[0] as usize).to_string(), num(w.values[0]), num(w.values[1])])
                .collect();
            emit(None, &csv(&["index", "z_value", "gap"], &rows)?)?;
            return Ok(rep.pass);
        }
    }
    Ok(true)
}

fn construct(what: Construct) -> Result<()> {
    match what {
        Construct::Staircase { s, a, r, m, n, t1, t2, out } => {
            let u = staircase_sequence(&StaircaseSpec { s, a, r, t1, t2, m, n })?;
            emit(out.out.as_deref(), &fn_text(&ConvexFn::Plq(u))?)
        }
        Construct::Degenerate { k, n, out } => emit(out.out.as_deref(), &fn_text(&ConvexFn::Plq(degenerate_sequence(k, n)?))?),
        Construct::Zonotope { mu, m, out } => {
            let z = zonotope_segment_approx(mu, m)?;
            let segs = z.segments.iter().map(|s| function_to_json(&ConvexFn::Pa(s.clone()))).collect::<affval::Result<Vec<_>>>()?;
            let v = json!({
                "composite": function_to_json(&ConvexFn::Pa(z.composite))?,
                "segments": segs,
                "sup_gap": z.sup_gap,
            });
            emit(out.out.as_deref(), &to_pretty(&v))
        }
    }
}

fn usc_inputs(cfg: UscConfig) -> Result<(Valuation, Vec<ConvexFn>, ConvexFn)> {
    match cfg {
        UscConfig::Staircase { s, a, r, n, m, t1, t2, zeta, c0, c1 } => {
            if m.is_empty() {
                bail!("m must list at least one value");
            }
            let seq = m
                .iter()
                .map(|&m| Ok(ConvexFn::Plq(staircase_sequence(&StaircaseSpec { s, a, r, t1, t2, m, n })?)))
                .collect::<Result<Vec<_>>>()?;
            let limit = StaircaseSpec { s, a, r, t1, t2, m: 1, n }.limit()?;
            Ok((Valuation::new(c0, c1, zeta.parse()?), seq, limit))
        }
        UscConfig::PaApproximate { function, k, zeta, c0, c1 } => {
            if k.is_empty() {
                bail!("k must list at least one value");
            }
            let u = function.to_function()?;
            let seq = k.iter().map(|&k| Ok(ConvexFn::Pa(pa_approximate(&u, k)?))).collect::<Result<Vec<_>>>()?;
            Ok((Valuation::new(c0, c1, zeta.parse()?), seq, u))
        }
    }
}
