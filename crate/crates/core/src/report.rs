use serde::{Deserialize, Serialize};

/// A sample point with the values compared there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
}

/// Residual and verdict of one numerical check. `pass` holds exactly when
/// `residual <= tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub witnesses: Vec<Witness>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64, witnesses: Vec<Witness>) -> CheckReport {
        CheckReport { name: name.into(), pass: residual <= tolerance, residual, tolerance, witnesses, note: None }
    }

    /// A check whose hypothesis does not hold; counted as passing with residual 0.
    pub fn skipped(name: impl Into<String>, tolerance: f64, why: impl Into<String>) -> CheckReport {
        CheckReport {
            name: name.into(),
            residual: 0.0,
            tolerance,
            pass: true,
            witnesses: vec![],
            note: Some(format!("skipped: {}", why.into())),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> CheckReport {
        self.note = Some(note.into());
        self
    }
}

/// Tracks the largest residual seen and where it occurred.
#[derive(Clone, Debug, Default)]
pub(crate) struct SupTracker {
    pub residual: f64,
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
}

impl SupTracker {
    pub fn observe(&mut self, x: &crate::geometry::Point, a: f64, b: f64) {
        let r = if a.is_finite() && b.is_finite() {
            (a - b).abs()
        } else if a == b {
            0.0
        } else {
            f64::INFINITY
        };
        if r > self.residual || self.witness.is_none() || r.is_nan() {
            self.residual = if r.is_nan() { f64::INFINITY } else { r.max(self.residual) };
            self.witness = Some((x.to_vec(), vec![a, b]));
        }
    }

    pub fn report(self, name: &str, tol: f64) -> CheckReport {
        let witnesses = self.witness.map(|(x, values)| vec![Witness { x, values }]).unwrap_or_default();
        CheckReport::new(name, self.residual, tol, witnesses)
    }
}
