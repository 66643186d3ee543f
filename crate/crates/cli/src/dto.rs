//! Serialized artifacts. Every artifact carries the tool version, the input
//! and the seed that produced it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use tanglechar_core::invariants::Presentation;
use tanglechar_core::mat2::Mat2;
use tanglechar_core::oracle::SuiteReport;
use tanglechar_core::witness::WitnessFamily;

pub const TOOL: &str = "tanglechar";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize, Deserialize)]
pub struct Equation {
    pub poly: String,
    pub note: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PresentationDoc {
    pub tool: String,
    pub version: String,
    pub input: String,
    pub seed: Option<u64>,
    pub traces: Vec<String>,
    pub variables: Vec<String>,
    pub sources: Vec<String>,
    pub equations: Vec<Equation>,
    pub exclusions: Vec<String>,
}

impl PresentationDoc {
    pub fn new(input: &str, p: &Presentation) -> Self {
        let names = p.variables();
        PresentationDoc {
            tool: TOOL.into(),
            version: VERSION.into(),
            input: input.into(),
            seed: None,
            traces: p.traces.clone(),
            variables: names.to_vec(),
            sources: p.var_sources.clone(),
            equations: p
                .equations
                .iter()
                .zip(&p.notes)
                .map(|(e, n)| Equation { poly: e.display_with(names), note: n.clone() })
                .collect(),
            exclusions: p.exclusions.iter().map(|e| e.display_with(names)).collect(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct FailureDoc {
    pub sample: usize,
    pub check: String,
    pub residual: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SuiteDoc {
    pub name: String,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// `None` when some sample never produced a finite residual.
    pub max_residual: Option<f64>,
    pub rejected: usize,
    pub checks: Vec<(String, Option<f64>)>,
    pub failures: Vec<FailureDoc>,
    pub passed: bool,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl From<&SuiteReport> for SuiteDoc {
    fn from(r: &SuiteReport) -> Self {
        SuiteDoc {
            name: r.name.clone(),
            samples: r.samples,
            seed: r.seed,
            tol: r.tol,
            max_residual: finite(r.max_residual),
            rejected: r.rejected,
            checks: r.checks.iter().map(|(k, v)| (k.clone(), finite(*v))).collect(),
            failures: r
                .failures
                .iter()
                .map(|f| FailureDoc {
                    sample: f.sample,
                    check: f.check.clone(),
                    residual: finite(f.residual),
                    detail: f.detail.clone(),
                })
                .collect(),
            passed: r.passed,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VerifyDoc {
    pub tool: String,
    pub version: String,
    pub input: String,
    pub seed: u64,
    pub reports: Vec<SuiteDoc>,
    pub passed: bool,
}

/// Complex numbers as `[re, im]`.
pub type Pair = [f64; 2];

pub fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

pub fn matrix(m: &Mat2<Complex64>) -> [[Pair; 2]; 2] {
    [[pair(m.a11), pair(m.a12)], [pair(m.a21), pair(m.a22)]]
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WitnessInput {
    pub t: Pair,
    pub t23: Pair,
    pub t34: Pair,
    pub t14: Pair,
    pub t13: Vec<Pair>,
    pub a1: [[Pair; 2]; 2],
    pub a2: [[Pair; 2]; 2],
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WitnessSampleDoc {
    pub t13: Pair,
    pub ok: bool,
    pub error: Option<String>,
    pub matrices: Vec<[[Pair; 2]; 2]>,
    pub traces: Vec<Vec<Pair>>,
    pub s24_roots: Vec<Pair>,
    pub gram_det3: Option<Pair>,
    pub gram_det4: Option<Pair>,
    pub max_trace_error: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct WitnessDoc {
    pub tool: String,
    pub version: String,
    pub input: WitnessInput,
    pub seed: u64,
    pub samples: Vec<WitnessSampleDoc>,
    pub min_gap: Option<f64>,
    pub passed: bool,
}

impl WitnessSampleDoc {
    pub fn new(family: &WitnessFamily, i: usize) -> Self {
        let (t13, res) = &family.samples[i];
        match res {
            Ok(s) => WitnessSampleDoc {
                t13: pair(*t13),
                ok: true,
                error: None,
                matrices: s.mats.iter().map(matrix).collect(),
                traces: s.traces.iter().map(|row| row.iter().map(|z| pair(*z)).collect()).collect(),
                s24_roots: vec![pair(s.s24_roots.0), pair(s.s24_roots.1)],
                gram_det3: Some(pair(s.gram_det3)),
                gram_det4: Some(pair(s.gram_det4)),
                max_trace_error: Some(s.max_error),
            },
            Err(e) => WitnessSampleDoc {
                t13: pair(*t13),
                ok: false,
                error: Some(e.to_string()),
                matrices: Vec::new(),
                traces: Vec::new(),
                s24_roots: Vec::new(),
                gram_det3: None,
                gram_det4: None,
                max_trace_error: None,
            },
        }
    }
}

/// `--pair-file` contents: two matrices as rows of `[re, im]`.
#[derive(Debug, Serialize, Deserialize)]
pub struct PairFile {
    pub a1: [[Pair; 2]; 2],
    pub a2: [[Pair; 2]; 2],
}

pub fn from_matrix(m: &[[Pair; 2]; 2]) -> Mat2<Complex64> {
    let c = |p: Pair| Complex64::new(p[0], p[1]);
    Mat2::new(c(m[0][0]), c(m[0][1]), c(m[1][0]), c(m[1][1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tanglechar_core::oracle::{run_suite, SuiteName};

    #[test]
    fn matrices_round_trip_through_pairs() {
        let m = Mat2::new(
            Complex64::new(1.0, -2.0),
            Complex64::new(0.5, 0.0),
            Complex64::new(-3.0, 1.5),
            Complex64::new(0.0, 4.0),
        );
        assert_eq!(from_matrix(&matrix(&m)), m);
    }

    #[test]
    fn non_finite_residuals_serialize_as_null() {
        let mut r = run_suite(SuiteName::Power, 2, 1, 1e-9);
        r.max_residual = f64::NAN;
        let doc = SuiteDoc::from(&r);
        assert_eq!(doc.max_residual, None);
        let json = serde_json::to_string(&doc).unwrap();
        assert!(json.contains("\"max_residual\":null"));
    }
}
