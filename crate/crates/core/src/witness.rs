//! Gram matrices of the trace form, prescribed-trace completion of matrix
//! tuples, and one-parameter witness families of pairwise non-conjugate
//! quadruples.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::linalg::DMat;
use crate::mat2::{eigen_pair, Mat2, Mat2Error, C64};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WitnessError {
    #[error("matrix {index} has trace {got}, expected {expected}")]
    Trace { index: usize, expected: C64, got: C64 },
    #[error("the first two matrices commute")]
    Commuting,
    #[error("non-generic input: {0}")]
    Genericity(String),
    #[error("degenerate basis: det S = {0}")]
    DegenerateBasis(C64),
    #[error("inconsistent prescription: 4x4 Gram determinant = {0}")]
    Inconsistent(C64),
    #[error("Gram determinant is not quadratic in s24")]
    DegreeCollapse,
    #[error(transparent)]
    Mat2(#[from] Mat2Error),
}

/// Matrices, their traces, trace-free parts `ā = a − (t/2) e` and the Gram
/// matrix `s_ij = tr(ā_i ā_j)`.
#[derive(Debug, Clone)]
pub struct GramData {
    pub mats: Vec<Mat2<C64>>,
    pub traces: Vec<C64>,
    pub bars: Vec<Mat2<C64>>,
    pub s: Vec<Vec<C64>>,
}

impl GramData {
    pub fn det(&self) -> C64 {
        DMat::from_rows(&self.s).det()
    }

    /// Largest entry of `ā_i ā_j + ā_j ā_i − s_ij e`.
    pub fn anticommutator_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.bars.iter().enumerate() {
            for (j, b) in self.bars.iter().enumerate() {
                let m = &(&(a * b) + &(b * a)) - &Mat2::scalar(self.s[i][j]);
                worst = worst.max(m.max_abs());
            }
        }
        worst
    }
}

fn bar(a: &Mat2<C64>, t: C64) -> Mat2<C64> {
    a - &Mat2::scalar(t / 2.0)
}

fn check_trace(index: usize, a: &Mat2<C64>, t: C64, tol: f64) -> Result<(), WitnessError> {
    let got = a.tr();
    if (got - t).norm() > tol * t.norm().max(1.0) {
        return Err(WitnessError::Trace { index, expected: t, got });
    }
    Ok(())
}

pub fn gram(mats: &[Mat2<C64>], traces: &[C64], tol: f64) -> Result<GramData, WitnessError> {
    for (i, (a, t)) in mats.iter().zip(traces).enumerate() {
        check_trace(i, a, *t, tol)?;
    }
    let bars: Vec<_> = mats.iter().zip(traces).map(|(a, t)| bar(a, *t)).collect();
    let s = bars.iter().map(|a| bars.iter().map(|b| (a * b).tr()).collect()).collect();
    Ok(GramData { mats: mats.to_vec(), traces: traces.to_vec(), bars, s })
}

fn lex(a: &C64, b: &C64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

fn small(z: C64, scale: f64, tol: f64) -> bool {
    z.norm() <= tol * scale.max(1.0)
}

/// Columns of `m` as vectors; returns the one of largest norm.
fn dominant_column(m: &Mat2<C64>) -> (C64, C64) {
    let c0 = (m.a11, m.a21);
    let c1 = (m.a12, m.a22);
    if c0.0.norm_sqr() + c0.1.norm_sqr() >= c1.0.norm_sqr() + c1.1.norm_sqr() {
        c0
    } else {
        c1
    }
}

/// `a3 ∈ G(t)` with `tr(a1 a3) = t13` and `tr(a2 a3) = t23`.
pub fn third_with_traces(
    a1: &Mat2<C64>,
    a2: &Mat2<C64>,
    t: C64,
    t13: C64,
    t23: C64,
    tol: f64,
) -> Result<Mat2<C64>, WitnessError> {
    check_trace(0, a1, t, tol)?;
    check_trace(1, a2, t, tol)?;
    let comm = &(a1 * a2) - &(a2 * a1);
    let scale = a1.max_abs() * a2.max_abs();
    if comm.max_abs() <= tol * scale.max(1.0) {
        return Err(WitnessError::Commuting);
    }
    let sq = t * t;
    let tscale = sq.norm() + t23.norm();
    if small(t13 - t23, tscale, tol) || small(t13 - (sq - t23), tscale, tol) {
        return Err(WitnessError::Genericity(format!("t13 = {t13} lies in {{t23, t^2 - t23}}")));
    }
    let (kappa, kinv) = eigen_pair(t);
    // Eigenvectors span the images of a1 − κ^{∓1} e.
    let v1 = dominant_column(&(a1 - &Mat2::scalar(kinv)));
    let v2 = dominant_column(&(a1 - &Mat2::scalar(kappa)));
    let p = Mat2::new(v1.0, v2.0, v1.1, v2.1);
    let pinv = p.inv()?;
    let a = &(&pinv * a2) * &p;
    let b11 = (t13 - kinv * t) / (kappa - kinv);
    let b22 = (kappa * t - t13) / (kappa - kinv);
    let r = t23 - a.a11 * b11 - a.a22 * b22;
    let q = b11 * b22 - 1.0;
    let ascale = a.max_abs();
    let (b12, b21) = if small(a.a21, ascale, tol) {
        if small(r, tscale, tol) {
            return Err(WitnessError::Genericity("a12 b21 = 0 forces a commuting solution".into()));
        }
        let b21 = r / a.a12;
        (q / b21, b21)
    } else if small(a.a12, ascale, tol) {
        if small(r, tscale, tol) {
            return Err(WitnessError::Genericity("a21 b12 = 0 forces a commuting solution".into()));
        }
        let b12 = r / a.a21;
        (b12, q / b12)
    } else {
        // a21 b12² − R b12 + Q a12 = 0
        let disc = (r * r - 4.0 * a.a21 * q * a.a12).sqrt();
        let mut roots = [(r + disc) / (2.0 * a.a21), (r - disc) / (2.0 * a.a21)];
        roots.sort_by(lex);
        let b12 = roots[0];
        (b12, (r - a.a21 * b12) / a.a12)
    };
    let b = Mat2::new(b11, b12, b21, b22);
    Ok(&(&p * &b) * &pinv)
}

fn gram4(g: &GramData, s14: C64, s24: C64, s34: C64, t4: C64) -> DMat {
    let s = &g.s;
    let s44 = t4 * t4 / 2.0 - 2.0;
    DMat::from_rows(&[
        alloc::vec![s[0][0], s[0][1], s[0][2], s14],
        alloc::vec![s[1][0], s[1][1], s[1][2], s24],
        alloc::vec![s[2][0], s[2][1], s[2][2], s34],
        alloc::vec![s14, s24, s34, s44],
    ])
}

fn gram_scale(g: &GramData, extra: &[C64]) -> f64 {
    let m = g.s.iter().flatten().chain(extra).map(|z| z.norm()).fold(1.0, f64::max);
    m * m * m * m
}

/// Roots of `det (s_ij)_{1..4} = 0` as a quadratic in `s24`, ordered
/// lexicographically by (real, imaginary).
pub fn solve_s24(g: &GramData, s14: C64, s34: C64, t4: C64) -> Result<(C64, C64), WitnessError> {
    let p0 = gram4(g, s14, C64::new(0.0, 0.0), s34, t4).det();
    let p1 = gram4(g, s14, C64::new(1.0, 0.0), s34, t4).det();
    let m1 = gram4(g, s14, C64::new(-1.0, 0.0), s34, t4).det();
    let a = (p1 + m1) / 2.0 - p0;
    let b = (p1 - m1) / 2.0;
    if a.norm() < 1e-9 {
        return Err(WitnessError::DegreeCollapse);
    }
    let disc = (b * b - 4.0 * a * p0).sqrt();
    let mut roots = [(-b + disc) / (2.0 * a), (-b - disc) / (2.0 * a)];
    roots.sort_by(lex);
    Ok((roots[0], roots[1]))
}

/// `a4 = Σ c_i ā_i + (t4/2) e` with `c S = (s14, s24, s34)`.
pub fn complete_fourth(
    g: &GramData,
    s14: C64,
    s24: C64,
    s34: C64,
    t4: C64,
    tol: f64,
) -> Result<Mat2<C64>, WitnessError> {
    let det3 = g.det();
    if det3.norm() < 1e-6 {
        return Err(WitnessError::DegenerateBasis(det3));
    }
    let det4 = gram4(g, s14, s24, s34, t4).det();
    if det4.norm() > tol * gram_scale(g, &[s14, s24, s34, t4]) {
        return Err(WitnessError::Inconsistent(det4));
    }
    // S is symmetric, so c S = s is S c = s.
    let c = DMat::from_rows(&g.s)
        .solve(&[s14, s24, s34], 0.0)
        .ok_or(WitnessError::DegenerateBasis(det3))?;
    let mut a4 = Mat2::scalar(t4 / 2.0);
    for (ci, b) in c.iter().zip(&g.bars) {
        a4 = &a4 + &b.scale(ci);
    }
    Ok(a4)
}

/// One member of a witness family.
#[derive(Debug, Clone)]
pub struct WitnessSample {
    pub t13: C64,
    pub mats: [Mat2<C64>; 4],
    /// `tr(a_i a_j)`.
    pub traces: [[C64; 4]; 4],
    pub s24_roots: (C64, C64),
    pub gram_det3: C64,
    pub gram_det4: C64,
    /// Largest deviation of any prescribed trace or determinant.
    pub max_error: f64,
}

#[derive(Debug, Clone)]
pub struct WitnessFamily {
    pub t: C64,
    pub t23: C64,
    pub t34: C64,
    pub t14: C64,
    pub samples: Vec<(C64, Result<WitnessSample, WitnessError>)>,
    /// Smallest `|tr(a1 a3)|` gap between successful samples.
    pub min_gap: Option<f64>,
}

impl WitnessFamily {
    pub fn all_ok(&self) -> bool {
        self.samples.iter().all(|(_, r)| r.is_ok())
    }
}

fn sample(
    a1: &Mat2<C64>,
    a2: &Mat2<C64>,
    t: C64,
    t23: C64,
    t34: C64,
    t14: C64,
    t13: C64,
    tol: f64,
) -> Result<WitnessSample, WitnessError> {
    let a3 = third_with_traces(a1, a2, t, t13, t23, tol)?;
    let g = gram(&[a1.clone(), a2.clone(), a3.clone()], &[t, t, t], tol)?;
    let half = t * t / 2.0;
    let (s14, s34) = (t14 - half, t34 - half);
    let roots = solve_s24(&g, s14, s34, t)?;
    let a4 = complete_fourth(&g, s14, roots.0, s34, t, tol)?;
    let mats = [a1.clone(), a2.clone(), a3, a4];
    let mut traces = [[C64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            traces[i][j] = (&mats[i] * &mats[j]).tr();
        }
    }
    let t24 = roots.0 + half;
    let wanted = [
        (mats[2].tr(), t),
        (mats[3].tr(), t),
        (traces[0][2], t13),
        (traces[1][2], t23),
        (traces[0][3], t14),
        (traces[1][3], t24),
        (traces[2][3], t34),
        (mats[2].det(), C64::new(1.0, 0.0)),
        (mats[3].det(), C64::new(1.0, 0.0)),
    ];
    let max_error = wanted.iter().map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let g4 = gram(&mats, &[t; 4], tol)?;
    Ok(WitnessSample {
        t13,
        traces,
        s24_roots: roots,
        gram_det3: g.det(),
        gram_det4: g4.det(),
        max_error,
        mats,
    })
}

/// The `t13`-parameterized family built from a non-commuting pair.
#[allow(clippy::too_many_arguments)]
pub fn witness_family(
    a1: &Mat2<C64>,
    a2: &Mat2<C64>,
    t: C64,
    t23: C64,
    t34: C64,
    t14: C64,
    t13_samples: &[C64],
    tol: f64,
) -> Result<WitnessFamily, WitnessError> {
    let sq = t * t;
    for (name, v) in [("t23", t23), ("t34", t34), ("t14", t14)] {
        let scale = sq.norm() + 2.0;
        if small(v - 2.0, scale, tol) || small(v - (sq - 2.0), scale, tol) {
            return Err(WitnessError::Genericity(format!("{name} = {v} lies in {{2, t^2 - 2}}")));
        }
    }
    let samples: Vec<_> = t13_samples
        .iter()
        .map(|&t13| (t13, sample(a1, a2, t, t23, t34, t14, t13, tol)))
        .collect();
    let ok: Vec<C64> = samples.iter().filter_map(|(_, r)| r.as_ref().ok()).map(|s| s.traces[0][2]).collect();
    let mut min_gap: Option<f64> = None;
    for i in 0..ok.len() {
        for j in i + 1..ok.len() {
            let gap = (ok[i] - ok[j]).norm();
            min_gap = Some(min_gap.map_or(gap, |m| m.min(gap)));
        }
    }
    Ok(WitnessFamily { t, t23, t34, t14, samples, min_gap })
}
