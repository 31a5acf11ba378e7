//! JSON formats for polytopes and functions.
//!
//! Polytopes: `{"dim": n, "vertices": [[..], ..]}` and/or
//! `{"halfspaces": [{"normal": [..], "offset": r}, ..]}`, written back as the
//! lexicographically sorted vertex list.
//!
//! Functions (tagged by `"type"`):
//! - `{"type": "pa", "pieces": [{"grad": [..], "c": r}, ..], "domain": POLY | null}`
//! - `{"type": "plq", "cells": [{"poly": POLY, "A": [[..]], "b": [..], "c": r}, ..]}`
//! - `{"type": "indicator", "domain": POLY}`
//! - `{"type": "quadratic", "A": [[..]], "b": [..], "c": r, "domain": POLY | null}`
//!   for ½xᵀAx + b·x + c
//!
//! Floats are written in shortest round-trip form; infinite values become `null`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcs::{certify_plq, AffineFn, ConvexFn, PaFn, QuadraticFn};
use crate::geometry::{Halfspace, Matrix, Point, Polytope, MAX_DIM};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceJson {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halfspaces: Option<Vec<HalfspaceJson>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceJson {
    pub grad: Vec<f64>,
    pub c: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellJson {
    pub poly: PolyJson,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum FnJson {
    Pa {
        pieces: Vec<PieceJson>,
        #[serde(default)]
        domain: Option<PolyJson>,
    },
    Plq {
        cells: Vec<CellJson>,
    },
    Indicator {
        domain: PolyJson,
    },
    Quadratic {
        #[serde(rename = "A")]
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        c: f64,
        #[serde(default)]
        domain: Option<PolyJson>,
    },
}

fn point(v: &[f64], n: usize, what: &str) -> Result<Point> {
    if v.len() != n {
        return Err(Error::BadInput(format!("{what}: expected {n} coordinates, got {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::BadInput(format!("{what}: non-finite coordinate")));
    }
    Ok(Point::new(v))
}

fn matrix(rows: &[Vec<f64>], n: usize) -> Result<Matrix> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(Error::BadInput(format!("A must be {n}x{n}")));
    }
    Matrix::from_rows(rows).ok_or_else(|| Error::BadInput("bad matrix".into()))
}

fn check_len(n: usize) -> Result<usize> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(n)
    } else {
        Err(Error::UnsupportedDim(n))
    }
}

impl PolyJson {
    pub fn from_polytope(p: &Polytope) -> PolyJson {
        PolyJson { dim: Some(p.dim()), vertices: Some(p.vertices().iter().map(|v| v.to_vec()).collect()), halfspaces: None }
    }

    pub fn to_polytope(&self) -> Result<Polytope> {
        let n = match (self.dim, &self.vertices, &self.halfspaces) {
            (Some(n), _, _) => n,
            (None, Some(vs), _) if !vs.is_empty() => vs[0].len(),
            (None, _, Some(hs)) if !hs.is_empty() => hs[0].normal.len(),
            _ => return Err(Error::BadInput("polytope needs vertices or halfspaces".into())),
        };
        let n = check_len(n)?;
        let hs = match &self.halfspaces {
            Some(hs) => Some(
                hs.iter()
                    .enumerate()
                    .map(|(i, h)| {
                        if !h.offset.is_finite() {
                            return Err(Error::BadInput(format!("halfspaces[{i}]: non-finite offset")));
                        }
                        Ok(Halfspace::new(point(&h.normal, n, &format!("halfspaces[{i}].normal"))?, h.offset))
                    })
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        match &self.vertices {
            Some(vs) => {
                let pts =
                    vs.iter().enumerate().map(|(i, v)| point(v, n, &format!("vertices[{i}]"))).collect::<Result<Vec<_>>>()?;
                let p = Polytope::hull(&pts)?;
                if let Some(hs) = hs {
                    let tol = p.tol();
                    for v in p.vertices() {
                        if hs.iter().any(|h| h.excess(v) > tol * (1.0 + h.offset.abs())) {
                            return Err(Error::BadInput("vertices and halfspaces describe different polytopes".into()));
                        }
                    }
                }
                Ok(p)
            }
            None => Polytope::from_halfspaces(n, hs.as_deref().unwrap_or(&[]))?.ok_or(Error::EmptyDomain),
        }
    }
}

impl FnJson {
    pub fn to_function(&self) -> Result<ConvexFn> {
        match self {
            FnJson::Pa { pieces, domain } => {
                let first = pieces.first().ok_or(Error::EmptyInput)?;
                let n = check_len(first.grad.len())?;
                let ps = pieces
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        if !p.c.is_finite() {
                            return Err(Error::BadInput(format!("pieces[{i}].c is not finite")));
                        }
                        Ok(AffineFn::new(point(&p.grad, n, &format!("pieces[{i}].grad"))?, p.c))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let dom = domain.as_ref().map(|d| d.to_polytope()).transpose()?;
                Ok(ConvexFn::Pa(PaFn::new(ps, dom)?))
            }
            FnJson::Indicator { domain } => Ok(ConvexFn::indicator(domain.to_polytope()?)),
            FnJson::Quadratic { a, b, c, domain } => {
                let n = check_len(b.len())?;
                let q = QuadraticFn::new(matrix(a, n)?, point(b, n, "b")?, *c)?;
                Ok(ConvexFn::Quadratic { q, domain: domain.as_ref().map(|d| d.to_polytope()).transpose()? })
            }
            FnJson::Plq { cells } => {
                let first = cells.first().ok_or(Error::EmptyInput)?;
                let n = check_len(first.b.len())?;
                let cs = cells
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let q = QuadraticFn::new(matrix(&c.a, n)?, point(&c.b, n, &format!("cells[{i}].b"))?, c.c)?;
                        Ok((c.poly.to_polytope()?, q))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(ConvexFn::Plq(certify_plq(cs)?))
            }
        }
    }

    /// JSON form of an explicit function. Envelopes in dimension one are
    /// written as their exact PLQ form.
    pub fn from_function(u: &ConvexFn) -> Result<FnJson> {
        let quad = |q: &QuadraticFn| (q.a.to_rows(), q.b.to_vec(), q.c);
        Ok(match u {
            ConvexFn::Affine(l) => FnJson::Pa { pieces: vec![PieceJson { grad: l.grad.to_vec(), c: l.c }], domain: None },
            ConvexFn::Pa(f) => FnJson::Pa {
                pieces: f.pieces().iter().map(|p| PieceJson { grad: p.grad.to_vec(), c: p.c }).collect(),
                domain: f.domain().map(PolyJson::from_polytope),
            },
            ConvexFn::Quadratic { q, domain } => {
                let (a, b, c) = quad(q);
                FnJson::Quadratic { a, b, c, domain: domain.as_ref().map(PolyJson::from_polytope) }
            }
            ConvexFn::Plq(f) => FnJson::Plq {
                cells: f
                    .cells()
                    .iter()
                    .map(|cell| {
                        let (a, b, c) = quad(&cell.q);
                        CellJson { poly: PolyJson::from_polytope(&cell.poly), a, b, c }
                    })
                    .collect(),
            },
            ConvexFn::Envelope(e) if e.dim() == 1 && e.domain().is_some() => {
                return FnJson::from_function(&ConvexFn::Plq(e.to_plq_1d()?))
            }
            other => return Err(Error::Unsupported(format!("JSON form of a {} function", other.kind()))),
        })
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::BadInput(format!("{what} JSON: {e}")))
}

pub fn parse_polytope(text: &str) -> Result<Polytope> {
    parse::<PolyJson>(text, "polytope")?.to_polytope()
}

pub fn parse_function(text: &str) -> Result<ConvexFn> {
    parse::<FnJson>(text, "function")?.to_function()
}

pub fn polytope_to_json(p: &Polytope) -> serde_json::Value {
    serde_json::to_value(PolyJson::from_polytope(p)).expect("polytope JSON")
}

pub fn function_to_json(u: &ConvexFn) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(FnJson::from_function(u)?).expect("function JSON"))
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON value");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polytope_round_trip() {
        let p = parse_polytope(r#"{"vertices": [[1, 0], [0, 0], [0, 1], [0.2, 0.2]]}"#).unwrap();
        assert_eq!(p.vertices().len(), 3);
        let q = parse_polytope(&polytope_to_json(&p).to_string()).unwrap();
        assert!(p.same_as(&q, 0.0));
        let h = parse_polytope(
            r#"{"dim": 1, "halfspaces": [{"normal": [1], "offset": 2}, {"normal": [-1], "offset": 1}]}"#,
        )
        .unwrap();
        assert_eq!(h.vertices().len(), 2);
        assert_eq!(h.vertices()[0][0], -1.0);
        let both = r#"{"vertices": [[0], [1]], "halfspaces": [{"normal": [1], "offset": 0.5}]}"#;
        assert!(parse_polytope(both).is_err());
    }

    #[test]
    fn function_round_trip() {
        let text = r#"{"type": "pa", "pieces": [{"grad": [1], "c": 0}, {"grad": [-1], "c": 0}],
                       "domain": {"vertices": [[-1], [1]]}}"#;
        let u = parse_function(text).unwrap();
        let v = parse_function(&function_to_json(&u).unwrap().to_string()).unwrap();
        for x in [-1.5, -1.0, 0.3, 1.0] {
            let x = Point::new(&[x]);
            assert_eq!(u.eval(&x), v.eval(&x));
        }
        let q = parse_function(r#"{"type": "quadratic", "A": [[4, 0], [0, 4]], "b": [0, 0], "c": 0,
                                   "domain": {"vertices": [[0,0],[1,0],[0,1],[1,1]]}}"#)
        .unwrap();
        let plq = ConvexFn::Plq(q.to_plq().unwrap());
        let back = parse_function(&function_to_json(&plq).unwrap().to_string()).unwrap();
        assert_eq!(back.eval(&Point::new(&[0.5, 0.5])), 1.0);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = parse_function(r#"{"type": "pa", "domain": null}"#).unwrap_err().to_string();
        assert!(err.contains("pieces"), "{err}");
        let err = parse_function(r#"{"type": "pa", "pieces": [{"grad": [1, 2], "c": 0}, {"grad": [1], "c": 0}]}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("pieces[1].grad"), "{err}");
        let err = parse_function("{\"type\": \"cone\"}").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
        assert!(parse_function(r#"{"type": "quadratic", "A": [[-1]], "b": [0], "c": 0}"#).is_err());
    }
}
