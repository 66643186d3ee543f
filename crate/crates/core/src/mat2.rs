//! 2x2 matrices over an exact rational-complex field or over `f64` complex
//! numbers, the special matrices used throughout the calculus, Chebyshev
//! sequences and the decomposition of a pair with a canonical product.

use alloc::format;
use alloc::string::String;
use core::fmt::Debug;
use core::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub type C64 = Complex<f64>;
pub type QC = Complex<BigRational>;

/// Threshold below which a float is treated as zero by domain checks.
pub const FLOAT_ZERO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Mat2Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("matrix is not unimodular (det = {0})")]
    NotUnimodular(String),
    #[error("product is not in any canonical form: {0}")]
    Classification(String),
    #[error("non-generic input: {0}")]
    Genericity(String),
    #[error("wrong number of parameters for {kind}: expected {expected}, got {got}")]
    Arity { kind: &'static str, expected: usize, got: usize },
}

/// Field operations shared by the exact and the floating backend.
pub trait Scalar:
    Clone
    + Zero
    + One
    + PartialEq
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_i64(n: i64) -> Self;
    /// Exact zero test for exact scalars, `|x| <= FLOAT_ZERO` for floats.
    fn is_negligible(&self) -> bool;
    /// Equality within `tol` (relative to the larger magnitude, at least 1).
    /// Exact scalars ignore `tol`.
    fn near(&self, other: &Self, tol: f64) -> bool;
    fn to_c64(&self) -> C64;
}

impl Scalar for C64 {
    fn from_i64(n: i64) -> Self {
        C64::new(n as f64, 0.0)
    }
    fn is_negligible(&self) -> bool {
        self.norm() <= FLOAT_ZERO
    }
    fn near(&self, other: &Self, tol: f64) -> bool {
        rel_diff(*self, *other) <= tol
    }
    fn to_c64(&self) -> C64 {
        *self
    }
}

impl Scalar for QC {
    fn from_i64(n: i64) -> Self {
        Complex::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }
    fn is_negligible(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn near(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }
    fn to_c64(&self) -> C64 {
        C64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }
}

/// `|a - b| / max(1, |a|, |b|)`.
pub fn rel_diff(a: C64, b: C64) -> f64 {
    let scale = 1f64.max(a.norm()).max(b.norm());
    (a - b).norm() / scale
}

/// Exact rational-complex scalar `p/q`.
pub fn qc(p: i64, q: i64) -> QC {
    Complex::new(
        BigRational::new(BigInt::from(p), BigInt::from(q)),
        BigRational::zero(),
    )
}

/// Exact rational-complex scalar `re + im*i`.
pub fn qc_complex(re: BigRational, im: BigRational) -> QC {
    Complex::new(re, im)
}

fn two<S: Scalar>() -> S {
    S::from_i64(2)
}

fn inv<S: Scalar>(x: &S, what: &str) -> Result<S, Mat2Error> {
    if x.is_negligible() {
        return Err(Mat2Error::Domain(format!("{what} must be nonzero")));
    }
    Ok(S::one() / x.clone())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mat2<S> {
    pub a11: S,
    pub a12: S,
    pub a21: S,
    pub a22: S,
}

impl<S: Scalar> Mat2<S> {
    pub fn new(a11: S, a12: S, a21: S, a22: S) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    pub fn identity() -> Self {
        Self::scalar(S::one())
    }

    pub fn scalar(s: S) -> Self {
        Mat2::new(s.clone(), S::zero(), S::zero(), s)
    }

    pub fn tr(&self) -> S {
        self.a11.clone() + self.a22.clone()
    }

    pub fn det(&self) -> S {
        self.a11.clone() * self.a22.clone() - self.a12.clone() * self.a21.clone()
    }

    /// The adjoint `m*`, characterised by `m + m* = tr(m) e`.
    pub fn adj(&self) -> Self {
        Mat2::new(
            self.a22.clone(),
            -self.a12.clone(),
            -self.a21.clone(),
            self.a11.clone(),
        )
    }

    pub fn inv(&self) -> Result<Self, Mat2Error> {
        let d = self.det();
        let di = inv(&d, "determinant")?;
        Ok(self.adj().scale(&di))
    }

    pub fn scale(&self, s: &S) -> Self {
        Mat2::new(
            self.a11.clone() * s.clone(),
            self.a12.clone() * s.clone(),
            self.a21.clone() * s.clone(),
            self.a22.clone() * s.clone(),
        )
    }

    pub fn entries(&self) -> [&S; 4] {
        [&self.a11, &self.a12, &self.a21, &self.a22]
    }

    pub fn map<T>(&self, f: impl Fn(&S) -> T) -> Mat2<T> {
        Mat2 {
            a11: f(&self.a11),
            a12: f(&self.a12),
            a21: f(&self.a21),
            a22: f(&self.a22),
        }
    }

    pub fn to_c64(&self) -> Mat2<C64> {
        self.map(|x| x.to_c64())
    }

    /// Entrywise comparison with `Scalar::near`.
    pub fn near(&self, other: &Self, tol: f64) -> bool {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .all(|(a, b)| a.near(b, tol))
    }

    pub fn is_unimodular(&self, tol: f64) -> bool {
        self.det().near(&S::one(), tol)
    }
}

impl Mat2<C64> {
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise `rel_diff`.
    pub fn max_rel_diff(&self, other: &Self) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries().iter())
            .map(|(a, b)| rel_diff(**a, **b))
            .fold(0.0, f64::max)
    }
}

impl<S: Scalar> Mul for &Mat2<S> {
    type Output = Mat2<S>;
    fn mul(self, o: &Mat2<S>) -> Mat2<S> {
        Mat2::new(
            self.a11.clone() * o.a11.clone() + self.a12.clone() * o.a21.clone(),
            self.a11.clone() * o.a12.clone() + self.a12.clone() * o.a22.clone(),
            self.a21.clone() * o.a11.clone() + self.a22.clone() * o.a21.clone(),
            self.a21.clone() * o.a12.clone() + self.a22.clone() * o.a22.clone(),
        )
    }
}

impl<S: Scalar> Mul for Mat2<S> {
    type Output = Mat2<S>;
    fn mul(self, o: Mat2<S>) -> Mat2<S> {
        &self * &o
    }
}

impl<S: Scalar> Add for &Mat2<S> {
    type Output = Mat2<S>;
    fn add(self, o: &Mat2<S>) -> Mat2<S> {
        Mat2::new(
            self.a11.clone() + o.a11.clone(),
            self.a12.clone() + o.a12.clone(),
            self.a21.clone() + o.a21.clone(),
            self.a22.clone() + o.a22.clone(),
        )
    }
}

impl<S: Scalar> Sub for &Mat2<S> {
    type Output = Mat2<S>;
    fn sub(self, o: &Mat2<S>) -> Mat2<S> {
        Mat2::new(
            self.a11.clone() - o.a11.clone(),
            self.a12.clone() - o.a12.clone(),
            self.a21.clone() - o.a21.clone(),
            self.a22.clone() - o.a22.clone(),
        )
    }
}

impl<S: Scalar> Neg for &Mat2<S> {
    type Output = Mat2<S>;
    fn neg(self) -> Mat2<S> {
        self.scale(&-S::one())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialKind {
    W,
    P,
    D,
    UPlus,
    UMinus,
    H1,
    H2,
    K1,
    K2,
    KLambda,
}

impl SpecialKind {
    pub fn name(self) -> &'static str {
        match self {
            SpecialKind::W => "w",
            SpecialKind::P => "p",
            SpecialKind::D => "d",
            SpecialKind::UPlus => "u_plus",
            SpecialKind::UMinus => "u_minus",
            SpecialKind::H1 => "h1",
            SpecialKind::H2 => "h2",
            SpecialKind::K1 => "k1",
            SpecialKind::K2 => "k2",
            SpecialKind::KLambda => "k_lambda",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            SpecialKind::W | SpecialKind::P => 0,
            SpecialKind::D => 1,
            SpecialKind::UPlus | SpecialKind::UMinus | SpecialKind::K1 => 2,
            SpecialKind::H1 | SpecialKind::K2 | SpecialKind::KLambda => 3,
            SpecialKind::H2 => 4,
        }
    }
}

/// Builds a special matrix from its parameter list:
/// `d: [λ]`, `u±: [κ, ξ]`, `h1: [t, λ, μ]`, `h2: [t1, t2, λ, μ]`,
/// `k1: [t, α]`, `k2: [t1, t2, α]`, `k_lambda: [t, λ, α]`.
pub fn special<S: Scalar>(kind: SpecialKind, params: &[S]) -> Result<Mat2<S>, Mat2Error> {
    if params.len() != kind.arity() {
        return Err(Mat2Error::Arity {
            kind: kind.name(),
            expected: kind.arity(),
            got: params.len(),
        });
    }
    let p = |i: usize| params[i].clone();
    match kind {
        SpecialKind::W => Ok(w()),
        SpecialKind::P => Ok(p_mat()),
        SpecialKind::D => d(p(0)),
        SpecialKind::UPlus => u_plus(p(0), p(1)),
        SpecialKind::UMinus => u_minus(p(0), p(1)),
        SpecialKind::H1 => h1(p(0), p(1), p(2)),
        SpecialKind::H2 => h2(p(0), p(1), p(2), p(3)),
        SpecialKind::K1 => k1(p(0), p(1)),
        SpecialKind::K2 => k2(p(0), p(1), p(2)),
        SpecialKind::KLambda => k_lambda(p(0), p(1), p(2)),
    }
}

pub fn w<S: Scalar>() -> Mat2<S> {
    Mat2::new(S::zero(), S::one(), -S::one(), S::zero())
}

pub fn p_mat<S: Scalar>() -> Mat2<S> {
    Mat2::new(S::one(), S::one(), S::zero(), S::one())
}

pub fn d<S: Scalar>(lambda: S) -> Result<Mat2<S>, Mat2Error> {
    let li = inv(&lambda, "lambda")?;
    Ok(Mat2::new(lambda, S::zero(), S::zero(), li))
}

pub fn u_plus<S: Scalar>(kappa: S, xi: S) -> Result<Mat2<S>, Mat2Error> {
    let ki = inv(&kappa, "kappa")?;
    Ok(Mat2::new(kappa, xi, S::zero(), ki))
}

pub fn u_minus<S: Scalar>(kappa: S, xi: S) -> Result<Mat2<S>, Mat2Error> {
    let ki = inv(&kappa, "kappa")?;
    Ok(Mat2::new(kappa, S::zero(), xi, ki))
}

pub fn h1<S: Scalar>(t: S, lambda: S, mu: S) -> Result<Mat2<S>, Mat2Error> {
    let li = inv(&lambda, "lambda")?;
    let s = inv(&(lambda.clone() + S::one()), "lambda + 1")?;
    let mi = inv(&mu, "mu")?;
    let lower = (t.clone() * t.clone() - lambda.clone() - li - two()) * lambda.clone() * mi;
    Ok(Mat2::new(lambda * t.clone(), mu, lower, t).scale(&s))
}

/// `δ = (λ+λ⁻¹) t1 t2 − t1² − t2² − (λ−λ⁻¹)²`.
pub fn delta_lambda<S: Scalar>(t1: &S, t2: &S, lambda: &S) -> Result<S, Mat2Error> {
    let li = inv(lambda, "lambda")?;
    let sum = lambda.clone() + li.clone();
    let diff = lambda.clone() - li;
    Ok(sum * t1.clone() * t2.clone()
        - t1.clone() * t1.clone()
        - t2.clone() * t2.clone()
        - diff.clone() * diff)
}

pub fn h2<S: Scalar>(t1: S, t2: S, lambda: S, mu: S) -> Result<Mat2<S>, Mat2Error> {
    let li = inv(&lambda, "lambda")?;
    let s = inv(&(lambda.clone() - li.clone()), "lambda - 1/lambda")?;
    let mi = inv(&mu, "mu")?;
    let delta = delta_lambda(&t1, &t2, &lambda)?;
    Ok(Mat2::new(
        lambda * t1.clone() - t2.clone(),
        mu,
        delta * mi,
        t2 - li * t1,
    )
    .scale(&s))
}

pub fn k1<S: Scalar>(t: S, alpha: S) -> Result<Mat2<S>, Mat2Error> {
    let ti = inv(&t, "t")?;
    let half_t = t.clone() / two();
    let upper = (t.clone() * t.clone() / S::from_i64(4) - S::one() - alpha.clone() * alpha.clone())
        * ti
        / two();
    Ok(Mat2::new(
        alpha.clone() + half_t.clone(),
        upper,
        two::<S>() * t,
        half_t - alpha,
    ))
}

pub fn k2<S: Scalar>(t1: S, t2: S, alpha: S) -> Result<Mat2<S>, Mat2Error> {
    let s = t1.clone() + t2;
    let si = inv(&s, "t1 + t2")?;
    let half_t = t1.clone() / two();
    let upper =
        (t1.clone() * t1 / S::from_i64(4) - S::one() - alpha.clone() * alpha.clone()) * si;
    Ok(Mat2::new(alpha.clone() + half_t.clone(), upper, s, half_t - alpha))
}

/// The matrix whose limit at `λ = −1` is `k_t(α)`; the upper-right entry is
/// solved from `det = 1`.
pub fn k_lambda<S: Scalar>(t: S, lambda: S, alpha: S) -> Result<Mat2<S>, Mat2Error> {
    let li = inv(&lambda, "lambda")?;
    let half_t = t.clone() / two();
    let lower = (lambda.clone() - li.clone()) * alpha.clone()
        + (two::<S>() - lambda - li) * half_t.clone();
    let li_low = inv(&lower, "cofactor (λ−λ⁻¹)α + (2−λ−λ⁻¹)t/2")?;
    let star = (t.clone() * t / S::from_i64(4) - alpha.clone() * alpha.clone() - S::one()) * li_low;
    Ok(Mat2::new(alpha.clone() + half_t.clone(), star, lower, half_t - alpha))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevPair<S> {
    pub omega: S,
    pub theta: S,
}

/// `ω_n(r)` and `θ_n(r)` for any integer `n`, by the three-term recurrence.
pub fn chebyshev<S: Scalar>(n: i64, r: &S) -> ChebyshevPair<S> {
    let m = n.unsigned_abs();
    let (mut w0, mut w1) = (S::zero(), S::one());
    let (mut h0, mut h1) = (two::<S>(), r.clone());
    if m == 0 {
        return ChebyshevPair { omega: w0, theta: h0 };
    }
    for _ in 1..m {
        let w2 = r.clone() * w1.clone() - w0;
        w0 = w1;
        w1 = w2;
        let h2 = r.clone() * h1.clone() - h0;
        h0 = h1;
        h1 = h2;
    }
    let omega = if n < 0 { -w1 } else { w1 };
    ChebyshevPair { omega, theta: h1 }
}

/// `z^n = ω_n(r) z − ω_{n−1}(r) e` with `r = tr(z)`.
pub fn cayley_power<S: Scalar>(z: &Mat2<S>, n: i64, tol: f64) -> Result<Mat2<S>, Mat2Error> {
    if !z.is_unimodular(tol) {
        return Err(Mat2Error::NotUnimodular(format!("{:?}", z.det())));
    }
    let r = z.tr();
    let wn = chebyshev(n, &r).omega;
    let wm = chebyshev(n - 1, &r).omega;
    Ok(&z.scale(&wn) - &Mat2::scalar(wm))
}

/// Which canonical case a decomposed pair falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairCase {
    /// One trace, `a1 a2 = d(λ)`.
    SingleA,
    /// One trace, `a1 a2 = p`.
    SingleB,
    /// One trace, `a1 a2 = −p`.
    SingleC,
    /// Two traces, `a1 a2 = d(λ)`, λ generic.
    TwoA,
    /// Two traces, `a1 a2 = d(κ1^±1 κ2^±1)`.
    TwoB,
    /// Two traces, `a1 a2 = −p`, `t1 + t2 = 0`.
    TwoC,
    /// Two traces, `a1 a2 = −p`, `t1 + t2 ≠ 0`.
    TwoD,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PairParams {
    /// `a1 = h(−λμ)`, `a2 = h(μ)` (two-trace: `h_{t1,t2}`, `h_{t2,t1}`).
    H { lambda: C64, mu: C64 },
    /// `a1 = u⁺(κ⁻¹, ξ)`, `a2 = u⁺(κ, κ−ξ)`.
    UPlus { kappa: C64, xi: C64 },
    /// One trace: `a1 = k_t(α)`, `a2 = k_t(α−t)`.
    /// Two traces: `a1 = k_{t1,t2}(α+(t1+t2)/2)`, `a2 = k_{t2,t1}(α)`.
    K { alpha: C64 },
    /// `k1 = κ1^ε1`, `k2 = κ2^ε2`; upper: `u⁺(k1, −k1 α)`, `u⁺(k2, α/k2)`,
    /// lower: `u⁻(k1, −α/k1)`, `u⁻(k2, k2 α)`.
    Triangular { upper: bool, k1: C64, k2: C64, alpha: C64 },
    /// `k2 = κ2^ε`: `a1 = u⁺(−1/k2, ξ)`, `a2 = u⁺(k2, ξ + k2)`.
    Parabolic { k2: C64, xi: C64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub case: PairCase,
    pub params: PairParams,
    pub t1: C64,
    pub t2: C64,
    /// Set when `a1 a2 = p` with two traces was reduced to `(−a1) a2 = −p`.
    pub negated_first: bool,
}

impl DecompositionReport {
    /// Rebuilds `(a1, a2)` from the recovered parameters.
    pub fn rebuild(&self) -> Result<(Mat2<C64>, Mat2<C64>), Mat2Error> {
        let (t1, t2) = if self.negated_first { (-self.t1, self.t2) } else { (self.t1, self.t2) };
        let (a1, a2) = match (&self.case, &self.params) {
            (PairCase::SingleA, PairParams::H { lambda, mu }) => {
                (h1(t1, *lambda, -*lambda * mu)?, h1(t1, *lambda, *mu)?)
            }
            (PairCase::TwoA, PairParams::H { lambda, mu }) => {
                (h2(t1, t2, *lambda, -*lambda * mu)?, h2(t2, t1, *lambda, *mu)?)
            }
            (PairCase::SingleB, PairParams::UPlus { kappa, xi }) => {
                (u_plus(C64::one() / kappa, *xi)?, u_plus(*kappa, kappa - xi)?)
            }
            (PairCase::SingleC, PairParams::K { alpha }) => (k1(t1, *alpha)?, k1(t1, alpha - t1)?),
            (PairCase::TwoD, PairParams::K { alpha }) => (
                k2(t1, t2, alpha + (t1 + t2) / 2.0)?,
                k2(t2, t1, *alpha)?,
            ),
            (PairCase::TwoB, PairParams::Triangular { upper, k1, k2, alpha }) => {
                if *upper {
                    (u_plus(*k1, -k1 * alpha)?, u_plus(*k2, alpha / k2)?)
                } else {
                    (u_minus(*k1, -alpha / k1)?, u_minus(*k2, k2 * alpha)?)
                }
            }
            (PairCase::TwoC, PairParams::Parabolic { k2, xi }) => {
                (u_plus(-C64::one() / k2, *xi)?, u_plus(*k2, xi + k2)?)
            }
            (case, params) => {
                return Err(Mat2Error::Classification(format!(
                    "inconsistent report {case:?} / {params:?}"
                )))
            }
        };
        let a1 = if self.negated_first { -&a1 } else { a1 };
        Ok((a1, a2))
    }
}

/// Roots `κ^{±1}` of `x² − t x + 1`.
pub fn eigen_pair(t: C64) -> (C64, C64) {
    let disc = (t * t - 4.0).sqrt();
    let k = (t + disc) / 2.0;
    (k, C64::one() / k)
}

/// Classifies `a1 a2` against the canonical forms and recovers the case
/// parameters. `t1 == t2` selects the one-trace cases.
pub fn decompose_pair(
    a1: &Mat2<C64>,
    a2: &Mat2<C64>,
    t1: C64,
    t2: C64,
    tol: f64,
) -> Result<DecompositionReport, Mat2Error> {
    if !a1.tr().near(&t1, tol) || !a2.tr().near(&t2, tol) {
        return Err(Mat2Error::Domain("tr(a_i) differs from t_i".into()));
    }
    let single = t1.near(&t2, tol);
    let g = a1 * a2;
    let off_zero = g.a12.near(&C64::zero(), tol) && g.a21.near(&C64::zero(), tol);
    let is_p = g.near(&p_mat(), tol);
    let is_neg_p = g.near(&-&p_mat::<C64>(), tol);

    if is_p {
        if single {
            let kappa = a2.a11;
            let xi = a1.a12;
            if !(kappa + C64::one() / kappa).near(&t1, tol) {
                return Err(Mat2Error::Classification("diagonal of a2 is not κ".into()));
            }
            return Ok(DecompositionReport {
                case: PairCase::SingleB,
                params: PairParams::UPlus { kappa, xi },
                t1,
                t2,
                negated_first: false,
            });
        }
        let mut rep = decompose_pair(&-a1, a2, -t1, t2, tol)?;
        rep.negated_first = true;
        rep.t1 = t1;
        return Ok(rep);
    }
    if is_neg_p {
        if single && !t1.is_negligible() {
            return Ok(DecompositionReport {
                case: PairCase::SingleC,
                params: PairParams::K { alpha: a1.a11 - t1 / 2.0 },
                t1,
                t2,
                negated_first: false,
            });
        }
        if (t1 + t2).near(&C64::zero(), tol) {
            let k2v = a2.a11;
            return Ok(DecompositionReport {
                case: PairCase::TwoC,
                params: PairParams::Parabolic { k2: k2v, xi: a1.a12 },
                t1,
                t2,
                negated_first: false,
            });
        }
        return Ok(DecompositionReport {
            case: PairCase::TwoD,
            params: PairParams::K { alpha: a2.a11 - t2 / 2.0 },
            t1,
            t2,
            negated_first: false,
        });
    }
    if off_zero {
        let lambda = g.a11;
        if lambda.is_negligible() {
            return Err(Mat2Error::Classification("singular product".into()));
        }
        let li = C64::one() / lambda;
        let tau = lambda + li;
        if single {
            for (v, name) in [(C64::from(2.0), "2"), (C64::from(-2.0), "-2"), (t1 * t1 - 2.0, "t^2-2")] {
                if tau.near(&v, tol) {
                    return Err(Mat2Error::Genericity(format!("λ + 1/λ = {name}")));
                }
            }
            let mu = a2.a12 * (lambda + 1.0);
            return Ok(DecompositionReport {
                case: PairCase::SingleA,
                params: PairParams::H { lambda, mu },
                t1,
                t2,
                negated_first: false,
            });
        }
        if lambda.near(&C64::one(), tol) || lambda.near(&-C64::one(), tol) {
            return Err(Mat2Error::Genericity("λ = ±1".into()));
        }
        let (k1a, k1b) = eigen_pair(t1);
        let (k2a, k2b) = eigen_pair(t2);
        let clash = [k1a * k2a, k1a * k2b, k1b * k2a, k1b * k2b]
            .iter()
            .any(|c| lambda.near(c, tol));
        if clash {
            let upper = a2.a21.norm() <= a2.a12.norm();
            let k2v = a2.a11;
            let alpha = if upper { k2v * a2.a12 } else { a2.a21 / k2v };
            return Ok(DecompositionReport {
                case: PairCase::TwoB,
                params: PairParams::Triangular { upper, k1: a1.a11, k2: k2v, alpha },
                t1,
                t2,
                negated_first: false,
            });
        }
        let mu = a2.a12 * (lambda - li);
        return Ok(DecompositionReport {
            case: PairCase::TwoA,
            params: PairParams::H { lambda, mu },
            t1,
            t2,
            negated_first: false,
        });
    }
    Err(Mat2Error::Classification(format!(
        "a1 a2 = [[{}, {}], [{}, {}]]",
        g.a11, g.a12, g.a21, g.a22
    )))
}

/// The trace criterion `τ² − t1 t2 τ + t1² + t2² − 4 = 0`, `τ = tr(a1 a2)`.
pub fn is_reducible(a1: &Mat2<C64>, a2: &Mat2<C64>, tol: f64) -> bool {
    let t1 = a1.tr();
    let t2 = a2.tr();
    let tau = (a1 * a2).tr();
    let terms = [tau * tau, t1 * t2 * tau, t1 * t1, t2 * t2, C64::from(4.0)];
    let q = terms[0] - terms[1] + terms[2] + terms[3] - terms[4];
    let scale = terms.iter().map(|z| z.norm()).fold(1.0, f64::max);
    q.norm() <= tol * scale
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedTraceForm {
    /// `tr(h_t^λ(μ)⁻¹ h_t^λ(ν))`, params `[t, λ, μ, ν]`.
    H1InvH1,
    /// `tr(h_{t1,t2}^λ(μ)⁻¹ h_{t1,t2}^λ(ν))`, params `[t1, t2, λ, μ, ν]`.
    H2InvH2Same,
    /// `tr(h_{t1,t2}^λ(μ)⁻¹ h_{t2,t1}^λ(ν))`, params `[t1, t2, λ, μ, ν]`.
    H2InvH2Swapped,
    /// `tr(k_{t1,t2}(α)⁻¹ k_{t1,t2}(β))`, params `[t1, t2, α, β]`.
    K2InvK2Same,
    /// `tr(k_{t1,t2}(α)⁻¹ k_{t2,t1}(β))`, params `[t1, t2, α, β]`.
    K2InvK2Swapped,
}

impl ClosedTraceForm {
    pub fn arity(self) -> usize {
        match self {
            ClosedTraceForm::H1InvH1 | ClosedTraceForm::K2InvK2Same | ClosedTraceForm::K2InvK2Swapped => 4,
            ClosedTraceForm::H2InvH2Same | ClosedTraceForm::H2InvH2Swapped => 5,
        }
    }
}

/// Closed-form traces of products of special matrices.
pub fn closed_trace<S: Scalar>(form: ClosedTraceForm, params: &[S]) -> Result<S, Mat2Error> {
    if params.len() != form.arity() {
        return Err(Mat2Error::Arity {
            kind: "closed_trace",
            expected: form.arity(),
            got: params.len(),
        });
    }
    let p = |i: usize| params[i].clone();
    match form {
        ClosedTraceForm::H1InvH1 => {
            let (t, lambda, mu, nu) = (p(0), p(1), p(2), p(3));
            let li = inv(&lambda, "lambda")?;
            let den = lambda + li + two();
            let den_i = inv(&den, "λ + 1/λ + 2")?;
            let ratio = mu.clone() / nu.clone() + nu / mu;
            Ok((two::<S>() * t.clone() * t.clone() + (den - t.clone() * t) * ratio) * den_i)
        }
        ClosedTraceForm::H2InvH2Same | ClosedTraceForm::H2InvH2Swapped => {
            let (t1, t2, lambda, mu, nu) = (p(0), p(1), p(2), p(3), p(4));
            let li = inv(&lambda, "lambda")?;
            let tau = lambda.clone() + li;
            let den_i = inv(&(tau.clone() * tau.clone() - S::from_i64(4)), "τ² − 4")?;
            let delta = delta_lambda(&t1, &t2, &lambda)?;
            let ratio = mu.clone() / nu.clone() + nu / mu;
            if form == ClosedTraceForm::H2InvH2Same {
                Ok(two::<S>() - delta * (ratio - two()) * den_i)
            } else {
                Ok(t1 * t2 - tau.clone() - delta * (ratio + tau) * den_i)
            }
        }
        ClosedTraceForm::K2InvK2Same | ClosedTraceForm::K2InvK2Swapped => {
            let (t1, t2, alpha, beta) = (p(0), p(1), p(2), p(3));
            let diff = alpha - beta;
            let base = diff.clone() * diff + two();
            if form == ClosedTraceForm::K2InvK2Same {
                Ok(base)
            } else {
                let dt = t1 - t2;
                Ok(base - dt.clone() * dt / S::from_i64(4))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn h1_example_is_exact() {
        let m = h1(qc(3, 1), qc(4, 1), qc(1, 1)).unwrap();
        assert_eq!(m, Mat2::new(qc(12, 5), qc(1, 5), qc(11, 5), qc(3, 5)));
        assert_eq!(m.det(), QC::one());
        assert_eq!(m.tr(), qc(3, 1));
    }

    #[test]
    fn d_at_one_is_identity() {
        assert_eq!(d(qc(1, 1)).unwrap(), Mat2::identity());
    }

    #[test]
    fn k1_example() {
        let m = k1(qc(2, 1), qc(0, 1)).unwrap();
        assert_eq!(m, Mat2::new(qc(1, 1), qc(0, 1), qc(4, 1), qc(1, 1)));
    }

    #[test]
    fn special_outputs_are_unimodular_exactly() {
        let (t, t2, l, m, a) = (qc(7, 3), qc(-5, 2), qc(3, 1), qc(-2, 7), qc(1, 4));
        let all = [
            special(SpecialKind::W, &[]).unwrap(),
            special(SpecialKind::P, &[]).unwrap(),
            special(SpecialKind::D, &[l.clone()]).unwrap(),
            special(SpecialKind::UPlus, &[l.clone(), m.clone()]).unwrap(),
            special(SpecialKind::UMinus, &[l.clone(), m.clone()]).unwrap(),
            special(SpecialKind::H1, &[t.clone(), l.clone(), m.clone()]).unwrap(),
            special(SpecialKind::H2, &[t.clone(), t2.clone(), l.clone(), m.clone()]).unwrap(),
            special(SpecialKind::K1, &[t.clone(), a.clone()]).unwrap(),
            special(SpecialKind::K2, &[t.clone(), t2.clone(), a.clone()]).unwrap(),
            special(SpecialKind::KLambda, &[t.clone(), l.clone(), a.clone()]).unwrap(),
        ];
        for m in &all {
            assert_eq!(m.det(), QC::one(), "{m:?}");
        }
        assert_eq!(all[6].tr(), t);
        assert_eq!(all[8].tr(), t);
        assert_eq!(all[9].tr(), t);
    }

    #[test]
    fn k_lambda_at_minus_one_is_k1() {
        let (t, a) = (qc(5, 2), qc(-1, 3));
        assert_eq!(k_lambda(t.clone(), qc(-1, 1), a.clone()).unwrap(), k1(t, a).unwrap());
    }

    #[test]
    fn domain_errors_name_the_constraint() {
        let e = h1(qc(1, 1), qc(-1, 1), qc(1, 1)).unwrap_err();
        assert!(matches!(e, Mat2Error::Domain(ref s) if s.contains("lambda + 1")));
        assert!(h1(qc(1, 1), qc(2, 1), qc(0, 1)).is_err());
        assert!(h2(qc(1, 1), qc(2, 1), qc(1, 1), qc(1, 1)).is_err());
        assert!(k1(qc(0, 1), qc(1, 1)).is_err());
        assert!(k2(qc(1, 1), qc(-1, 1), qc(1, 1)).is_err());
        assert!(special::<QC>(SpecialKind::D, &[]).is_err());
    }

    #[test]
    fn chebyshev_values() {
        let r = qc(5, 2);
        let c0 = chebyshev(0, &r);
        assert_eq!((c0.omega, c0.theta), (qc(0, 1), qc(2, 1)));
        let c3 = chebyshev(3, &r);
        assert_eq!((c3.omega, c3.theta), (qc(21, 4), qc(65, 8)));
        for n in -6..=6i64 {
            assert_eq!(chebyshev(n, &qc(2, 1)).omega, qc(n, 1));
            let sign = if (n - 1).rem_euclid(2) == 0 { 1 } else { -1 };
            assert_eq!(chebyshev(n, &qc(-2, 1)).omega, qc(n * sign, 1));
            assert_eq!(chebyshev(-n, &r).omega, -chebyshev(n, &r).omega);
            assert_eq!(chebyshev(-n, &r).theta, chebyshev(n, &r).theta);
        }
    }

    #[test]
    fn cayley_power_examples() {
        let z = d(qc(2, 1)).unwrap();
        assert_eq!(cayley_power(&z, 3, 0.0).unwrap(), d(qc(8, 1)).unwrap());
        assert_eq!(cayley_power(&z, 0, 0.0).unwrap(), Mat2::identity());
        assert_eq!(cayley_power(&z, 1, 0.0).unwrap(), z);
        assert_eq!(cayley_power(&z, -2, 0.0).unwrap(), d(qc(1, 4)).unwrap());
        let bad = Mat2::new(qc(2, 1), qc(0, 1), qc(0, 1), qc(1, 1));
        assert!(matches!(cayley_power(&bad, 2, 0.0), Err(Mat2Error::NotUnimodular(_))));
    }

    #[test]
    fn closed_trace_h1_example() {
        let v = closed_trace(ClosedTraceForm::H1InvH1, &[qc(3, 1), qc(4, 1), qc(1, 1), qc(2, 1)]).unwrap();
        assert_eq!(v, qc(89, 50));
        let a = h1(qc(3, 1), qc(4, 1), qc(1, 1)).unwrap();
        let b = h1(qc(3, 1), qc(4, 1), qc(2, 1)).unwrap();
        assert_eq!((&a.inv().unwrap() * &b).tr(), v);
        let same = closed_trace(ClosedTraceForm::H1InvH1, &[qc(3, 1), qc(4, 1), qc(5, 1), qc(5, 1)]).unwrap();
        assert_eq!(same, qc(2, 1));
        let k = closed_trace(ClosedTraceForm::K2InvK2Same, &[qc(1, 1), qc(2, 1), qc(3, 1), qc(3, 1)]).unwrap();
        assert_eq!(k, qc(2, 1));
    }

    #[test]
    fn closed_trace_two_trace_forms_exact() {
        let (t1, t2, l, m, n) = (qc(3, 2), qc(-2, 3), qc(5, 1), qc(2, 1), qc(-3, 7));
        let a = h2(t1.clone(), t2.clone(), l.clone(), m.clone()).unwrap();
        let b_same = h2(t1.clone(), t2.clone(), l.clone(), n.clone()).unwrap();
        let b_swap = h2(t2.clone(), t1.clone(), l.clone(), n.clone()).unwrap();
        let ps = [t1.clone(), t2.clone(), l, m, n];
        assert_eq!(
            closed_trace(ClosedTraceForm::H2InvH2Same, &ps).unwrap(),
            (&a.inv().unwrap() * &b_same).tr()
        );
        assert_eq!(
            closed_trace(ClosedTraceForm::H2InvH2Swapped, &ps).unwrap(),
            (&a.inv().unwrap() * &b_swap).tr()
        );
        let (al, be) = (qc(1, 3), qc(-4, 5));
        let ka = k2(t1.clone(), t2.clone(), al.clone()).unwrap();
        let kb = k2(t1.clone(), t2.clone(), be.clone()).unwrap();
        let kc = k2(t2.clone(), t1.clone(), be.clone()).unwrap();
        let ps = [t1, t2, al, be];
        assert_eq!(closed_trace(ClosedTraceForm::K2InvK2Same, &ps).unwrap(), (&ka.inv().unwrap() * &kb).tr());
        assert_eq!(closed_trace(ClosedTraceForm::K2InvK2Swapped, &ps).unwrap(), (&ka.inv().unwrap() * &kc).tr());
    }

    #[test]
    fn decompose_case_a_example() {
        let (t, l) = (c(3.0, 0.0), c(4.0, 0.0));
        let a1 = h1(t, l, c(-8.0, 0.0)).unwrap();
        let a2 = h1(t, l, c(2.0, 0.0)).unwrap();
        assert!((&a1 * &a2).near(&d(l).unwrap(), 1e-12));
        let rep = decompose_pair(&a1, &a2, t, t, 1e-9).unwrap();
        assert_eq!(rep.case, PairCase::SingleA);
        match rep.params {
            PairParams::H { mu, .. } => assert!(mu.near(&c(2.0, 0.0), 1e-12)),
            ref other => panic!("{other:?}"),
        }
        let (b1, b2) = rep.rebuild().unwrap();
        assert!(b1.max_rel_diff(&a1) < 1e-12 && b2.max_rel_diff(&a2) < 1e-12);
    }

    #[test]
    fn decompose_case_b_example() {
        let (k, xi) = (c(3.0, 0.0), c(1.0, 0.0));
        let a1 = u_plus(C64::one() / k, xi).unwrap();
        let a2 = u_plus(k, k - xi).unwrap();
        let t = k + C64::one() / k;
        let rep = decompose_pair(&a1, &a2, t, t, 1e-9).unwrap();
        assert_eq!(rep.case, PairCase::SingleB);
        assert_eq!(rep.params, PairParams::UPlus { kappa: k, xi });
    }

    #[test]
    fn decompose_two_trace_case_d_example() {
        let (t1, t2, al) = (c(1.0, 0.0), c(2.0, 0.0), c(0.0, 0.0));
        let a1 = k2(t1, t2, al + (t1 + t2) / 2.0).unwrap();
        let a2 = k2(t2, t1, al).unwrap();
        assert!((&a1 * &a2).near(&-&p_mat::<C64>(), 1e-12));
        let rep = decompose_pair(&a1, &a2, t1, t2, 1e-9).unwrap();
        assert_eq!(rep.case, PairCase::TwoD);
        let (b1, b2) = rep.rebuild().unwrap();
        assert!(b1.max_rel_diff(&a1) < 1e-12 && b2.max_rel_diff(&a2) < 1e-12);
    }

    #[test]
    fn decompose_plus_p_two_trace_uses_sign_trick() {
        let (t1, t2, al) = (c(1.5, 0.2), c(-0.5, 0.7), c(0.3, -0.1));
        let b1 = k2(-t1, t2, al + (-t1 + t2) / 2.0).unwrap();
        let a2 = k2(t2, -t1, al).unwrap();
        let a1 = -&b1;
        assert!((&a1 * &a2).near(&p_mat(), 1e-12));
        let rep = decompose_pair(&a1, &a2, t1, t2, 1e-9).unwrap();
        assert!(rep.negated_first);
        let (r1, r2) = rep.rebuild().unwrap();
        assert!(r1.max_rel_diff(&a1) < 1e-12 && r2.max_rel_diff(&a2) < 1e-12);
    }

    #[test]
    fn decompose_rejects_excluded_lambda() {
        let (k, _) = eigen_pair(c(3.0, 0.0));
        let t = c(3.0, 0.0);
        let a1 = d(k).unwrap();
        let a2 = d(k).unwrap();
        assert!(matches!(decompose_pair(&a1, &a2, t, t, 1e-9), Err(Mat2Error::Genericity(_))));
        let a2 = Mat2::new(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0));
        let a1 = Mat2::new(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0));
        assert!(matches!(
            decompose_pair(&a1, &a2, a1.tr(), a2.tr(), 1e-9),
            Err(Mat2Error::Classification(_))
        ));
    }

    #[test]
    fn reducibility_examples() {
        let k = c(1.3, 0.4);
        let a = d(k).unwrap();
        assert!(is_reducible(&a, &a, 1e-9));
        let b = Mat2::new(c(1.0, 0.0), c(2.0, 0.0), c(0.5, 0.0), c(2.0, 0.0));
        assert!(!is_reducible(&a, &b, 1e-9));
    }

    #[test]
    fn two_trace_criterion_factors_at_equal_traces() {
        let t = c(1.7, 0.3);
        for tau in [c(2.0, 0.0), t * t - 2.0] {
            let q = tau * tau - t * t * tau + 2.0 * t * t - 4.0;
            assert!(q.norm() < 1e-12);
        }
    }
}
