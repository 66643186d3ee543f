//! Verification suites. Every sample draws from its own generator stream,
//! so reports depend only on `(suite, samples, seed, tol)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use num_traits::One;
use rand::Rng;

use super::*;
use crate::invariants::{base_invariants_with, closure_equations, fg, Presentation};
use crate::links::{mu_ratio, pretzel3333_presentation};
use crate::mat2::{
    cayley_power, closed_trace, decompose_pair, is_reducible, k1, k2, u_minus, u_plus, ClosedTraceForm, PairCase,
};
use crate::ratfun::RatFun;
use crate::tangle::{parse_closure, Closure};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum SuiteName {
    Identities,
    TrH,
    Power,
    Key,
    Key2,
    Reducible,
    Base,
    Compose,
    Convenient,
    Presentation,
    Pretzel,
}

pub const SUITES: [SuiteName; 11] = [
    SuiteName::Identities,
    SuiteName::TrH,
    SuiteName::Power,
    SuiteName::Key,
    SuiteName::Key2,
    SuiteName::Reducible,
    SuiteName::Base,
    SuiteName::Compose,
    SuiteName::Convenient,
    SuiteName::Presentation,
    SuiteName::Pretzel,
];

impl SuiteName {
    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Identities => "identities",
            SuiteName::TrH => "tr-h",
            SuiteName::Power => "power",
            SuiteName::Key => "key",
            SuiteName::Key2 => "key2",
            SuiteName::Reducible => "reducible",
            SuiteName::Base => "base",
            SuiteName::Compose => "compose",
            SuiteName::Convenient => "convenient",
            SuiteName::Presentation => "presentation",
            SuiteName::Pretzel => "pretzel",
        }
    }

    pub fn parse(s: &str) -> Option<SuiteName> {
        SUITES.iter().copied().find(|n| n.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub sample: usize,
    pub check: String,
    pub residual: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    /// Largest residual over accepted samples and all checks.
    pub max_residual: f64,
    /// Draws discarded for conditioning and redrawn.
    pub rejected: usize,
    /// Largest residual per check.
    pub checks: Vec<(String, f64)>,
    pub failures: Vec<Failure>,
    pub passed: bool,
}

/// Marks a draw as badly conditioned; the driver redraws it.
struct Reject;

type Outcome = Result<(), Reject>;

const MAX_REDRAWS: u64 = 64;
const MAX_FAILURES: usize = 20;

struct Ctx {
    tol: f64,
    sample: usize,
    checks: Vec<(&'static str, f64, Option<String>)>,
}

impl Ctx {
    fn check(&mut self, name: &'static str, residual: f64) {
        self.checks.push((name, residual, None));
    }

    fn check_with(&mut self, name: &'static str, residual: f64, detail: impl FnOnce() -> String) {
        let bad = residual.is_nan() || residual > self.tol;
        self.checks.push((name, residual, bad.then(detail)));
    }
}

fn drive(name: SuiteName, samples: usize, seed: u64, tol: f64, mut f: impl FnMut(&mut OracleRng, &mut Ctx) -> Outcome) -> SuiteReport {
    let mut maxes: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut rejected = 0;
    let mut max_residual: f64 = 0.0;
    for i in 0..samples {
        let mut accepted = false;
        for attempt in 0..MAX_REDRAWS {
            let mut rng = sample_rng(seed, ((i as u64) << 8) | attempt);
            let mut ctx = Ctx { tol, sample: i, checks: Vec::new() };
            if f(&mut rng, &mut ctx).is_err() {
                rejected += 1;
                continue;
            }
            accepted = true;
            for (check, r, detail) in ctx.checks {
                let r = if r.is_nan() { f64::INFINITY } else { r };
                let m = maxes.entry(check).or_insert(0.0);
                *m = m.max(r);
                max_residual = max_residual.max(r);
                if (r.is_nan() || r > tol) && failures.len() < MAX_FAILURES {
                    failures.push(Failure {
                        sample: ctx.sample,
                        check: check.to_string(),
                        residual: r,
                        detail: detail.unwrap_or_default(),
                    });
                }
            }
            break;
        }
        if !accepted {
            max_residual = f64::INFINITY;
            failures.push(Failure {
                sample: i,
                check: "draw".into(),
                residual: f64::INFINITY,
                detail: "every redraw was rejected".into(),
            });
        }
    }
    SuiteReport {
        name: name.as_str().into(),
        samples,
        seed,
        tol,
        max_residual,
        rejected,
        checks: maxes.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        passed: failures.is_empty() && max_residual <= tol,
        failures,
    }
}

pub fn run_suite(name: SuiteName, samples: usize, seed: u64, tol: f64) -> SuiteReport {
    match name {
        SuiteName::Identities => drive(name, samples, seed, tol, identities),
        SuiteName::TrH => drive(name, samples, seed, tol, trace_h),
        SuiteName::Power => drive(name, samples, seed, tol, power),
        SuiteName::Key => drive(name, samples, seed, tol, key),
        SuiteName::Key2 => drive(name, samples, seed, tol, key2),
        SuiteName::Reducible => {
            let mut i = 0usize;
            drive(name, samples, seed, tol, move |rng, ctx| {
                i += 1;
                reducible(rng, ctx, i.is_multiple_of(2))
            })
        }
        SuiteName::Base => drive(name, samples, seed, tol, base),
        SuiteName::Compose => drive(name, samples, seed, tol, compose),
        SuiteName::Convenient => drive(name, samples, seed, tol, convenient),
        SuiteName::Presentation => {
            let corpus: Vec<(Closure, Presentation)> = PRESENTATION_CORPUS
                .iter()
                .map(|s| {
                    let c = parse_closure(s).expect("corpus parses");
                    let p = closure_equations(&c).expect("corpus emits");
                    (c, p)
                })
                .collect();
            let mut i = 0usize;
            drive(name, samples, seed, tol, move |rng, ctx| {
                let (c, p) = &corpus[i % corpus.len()];
                i += 1;
                presentation(rng, ctx, c, p)
            })
        }
        SuiteName::Pretzel => {
            let p = pretzel3333_presentation();
            drive(name, samples, seed, tol, move |rng, ctx| pretzel(rng, ctx, &p))
        }
    }
}

fn reject_if(cond: bool) -> Outcome {
    if cond {
        Err(Reject)
    } else {
        Ok(())
    }
}

fn one() -> C64 {
    C64::one()
}

/// A random parameter of modulus in `[0.5, 2]`.
fn param(rng: &mut OracleRng) -> C64 {
    random_polar(rng, 0.5, 2.0)
}

/// End quadruple in the normal form `g = d(λ)`:
/// `ne = h(ν)`, `nw = h(−λν)`, `se = h(μ)⁻¹`, `sw = h(−λμ)⁻¹`.
fn identities(rng: &mut OracleRng, ctx: &mut Ctx) -> Outcome {
    let t = sample_t(rng);
    let (lam, mu, nu) = (param(rng), param(rng), param(rng));
    let u = lam + lam.inv();
    let t2 = t * t;
    reject_if((lam + 1.0).norm() < DEGENERATE || (u - 2.0).norm() < 1e-3 || (u + 2.0 - t2).norm() < 1e-3)?;
    let h = |m: C64| h1(t, lam, m).map_err(|_| Reject);
    let frame = random_frame(rng);
    let cj = |m: Mat2<C64>| conjugate(&frame, &m);
    let ne = cj(h(nu)?);
    let nw = cj(h(-lam * nu)?);
    let se = cj(uinv(&h(mu)?));
    let sw = cj(uinv(&h(-lam * mu)?));
    let c = Coords::of(&nw, &ne, &sw, &se);
    ctx.check("boundary", boundary_residual(&[nw.clone(), ne.clone(), sw.clone(), se.clone()]));

    let closed = (2.0 * t2 + (u + 2.0 - t2) * (mu / nu + nu / mu)) / (u + 2.0);
    ctx.check("trace-h", rel((&uinv(&h(mu)?) * &h(nu)?).tr(), closed));

    let n: i64 = rng.gen_range(-8..=8);
    let z = &nw * &sw;
    let cp = cayley_power(&z, n, 1e-9).map_err(|_| Reject)?;
    ctx.check("power", cp.max_rel_diff(&iterate(&z, n)));

    let (ud, ug, ua, uc) = (c.udot, c.ugrave, c.uacute, c.ucheck);
    let l_minus = lam - lam.inv();
    ctx.check("udot-from-params", rel((u + 2.0) * ud, 2.0 * t2 + (u + 2.0 - t2) * (nu / mu + mu / nu)));
    ctx.check(
        "ugrave-from-params",
        rel((u + 2.0) * ug, 2.0 * t2 - (u + 2.0 - t2) * (lam * nu / mu + mu / (lam * nu))),
    );
    ctx.check(
        "uacute-from-params",
        rel((u + 2.0) * ua, 2.0 * t2 - (u + 2.0 - t2) * (nu / (lam * mu) + lam * mu / nu)),
    );
    ctx.check("ucheck-from-params", rel((u + 2.0) * uc, (u + 2.0 - t2) * l_minus * (mu / nu - nu / mu)));
    ctx.check("sum-rule", rel(ug + ua + u * ud, 2.0 * t2));
    let den = 2.0 * (u + 2.0 - t2);
    ctx.check("ratio", rel(mu / nu, ((u + 2.0) * (ud + uc / l_minus) - 2.0 * t2) / den));
    ctx.check("ratio-inverse", rel(nu / mu, ((u + 2.0) * (ud - uc / l_minus) - 2.0 * t2) / den));
    ctx.check("ucheck-square", rel(uc * uc, (u - 2.0) * (ud - 2.0) * ((u + 2.0) * (ud + 2.0) - 4.0 * t2)));
    ctx.check(
        "quartic",
        rel(
            u * u + ud * ud + ug * ug + u * ud * ug + t2 * t2 + 4.0 * t2,
            2.0 * t2 * (u + ud + ug) + 4.0,
        ),
    );
    let s = u + ud - t2;
    ctx.check("product-form", rel((ug - 2.0) * (ua - 2.0), s * s));
    ctx.check("udot-west", rel(c.udot_west, c.udot));
    Ok(())
}

fn iterate(z: &Mat2<C64>, n: i64) -> Mat2<C64> {
    let step = if n >= 0 { z.clone() } else { uinv(z) };
    let mut acc = Mat2::identity();
    for _ in 0..n.unsigned_abs() {
        acc = &acc * &step;
    }
    acc
}

fn trace_h(rng: &mut OracleRng, ctx: &mut Ctx) -> Outcome {
    let (t1, t2) = (sample_t(rng), sample_t(rng));
    let (lam, mu, nu) = (param(rng), param(rng), param(rng));
    let (alpha, beta) = (random_complex(rng, 1.5), random_complex(rng, 1.5));
    reject_if((lam + 1.0).norm() < DEGENERATE || (lam - 1.0).norm() < DEGENERATE || (t1 + t2).norm() < DEGENERATE)?;
    let e = |r: Result<Mat2<C64>, _>| r.map_err(|_| Reject);
    let ct = |f, p: &[C64]| closed_trace(f, p).map_err(|_| Reject);

    let direct = (&uinv(&e(h1(t1, lam, mu))?) * &e(h1(t1, lam, nu))?).tr();
    ctx.check("h1-inv-h1", rel(ct(ClosedTraceForm::H1InvH1, &[t1, lam, mu, nu])?, direct));
    let a = uinv(&e(h2(t1, t2, lam, mu))?);
    let same = (&a * &e(h2(t1, t2, lam, nu))?).tr();
    let swapped = (&a * &e(h2(t2, t1, lam, nu))?).tr();
    ctx.check("h2-inv-h2-same", rel(ct(ClosedTraceForm::H2InvH2Same, &[t1, t2, lam, mu, nu])?, same));
    ctx.check("h2-inv-h2-swapped", rel(ct(ClosedTraceForm::H2InvH2Swapped, &[t1, t2, lam, mu, nu])?, swapped));
    let b = uinv(&e(k2(t1, t2, alpha))?);
    let same = (&b * &e(k2(t1, t2, beta))?).tr();
    let swapped = (&b * &e(k2(t2, t1, beta))?).tr();
    ctx.check("k2-inv-k2-same", rel(ct(ClosedTraceForm::K2InvK2Same, &[t1, t2, alpha, beta])?, same));
    ctx.check("k2-inv-k2-swapped", rel(ct(ClosedTraceForm::K2InvK2Swapped, &[t1, t2, alpha, beta])?, swapped));
    Ok(())
}

fn power(rng: &mut OracleRng, ctx: &mut Ctx) -> Outcome {
    let t = sample_t(rng);
    let z = sample_conditioned(t, rng);
    let mut worst: f64 = 0.0;
    for n in -16..=16 {
        let cp = cayley_power(&z, n, 1e-9).map_err(|_| Reject)?;
        worst = worst.max(cp.max_rel_diff(&iterate(&z, n)));
    }
    ctx.check("power", worst);
    Ok(())
}

fn round_trip(ctx: &mut Ctx, name: &'static str, a1: &Mat2<C64>, a2: &Mat2<C64>, t1: C64, t2: C64, want: PairCase, negated: bool) {
    match decompose_pair(a1, a2, t1, t2, 1e-9) {
        Ok(rep) if rep.case == want && rep.negated_first == negated => {
            let r = rep
                .rebuild()
                .map(|(b1, b2)| a1.max_rel_diff(&b1).max(a2.max_rel_diff(&b2)))
                .unwrap_or(f64::INFINITY);
            ctx.check_with(name, r, || format!("rebuild differs for {rep:?}"));
        }
        Ok(rep) => ctx.check_with(name, f64::INFINITY, || format!("classified as {:?}", rep.case)),
        Err(e) => ctx.check_with(name, f64::INFINITY, || format!("{e}")),
    }
}

fn key(rng: &mut OracleRng, ctx: &mut Ctx) -> Outcome {
    let e = |r: Result<Mat2<C64>, _>| r.map_err(|_| Reject);
    // (a) a1 a2 = d(λ).
    let t = sample_t(rng);
    let (lam, mu) = (param(rng), param(rng));
    let u = lam + lam.inv();
    reject_if((u - 2.0).norm() < 1e-3 || (u + 2.0).norm() < 1e-3 || (u - (t * t - 2.0)).norm() < 1e-3)?;
    let a1 = e(h1(t, lam, -lam * mu))?;
    let a2 = e(h1(t, lam, mu))?;
    round_trip(ctx, "single-a", &a1, &a2, t, t, PairCase::SingleA, false);
    // (b) a1 a2 = p.
    let kappa = sample_kappa(rng);
    let xi = random_complex(rng, 1.5);
    let a1 = e(u_plus(kappa.inv(), xi))?;
    let a2 = e(u_plus(kappa, kappa - xi))?;
    let tk = kappa + kappa.inv();
    round_trip(ctx, "single-b", &a1, &a2, tk, tk, PairCase::SingleB, false);
    // (c) a1 a2 = −p.
    let alpha = random_complex(rng, 1.5);
    let a1 = e(k1(t, alpha))?;
    let a2 = e(k1(t, alpha - t))?;
    round_trip(ctx, "single-c", &a1, &a2, t, t, PairCase::SingleC, false);
    Ok(())
}

fn key2(rng: &mut OracleRng, ctx: &mut Ctx) -> Outcome {
    let e = |r: Result<Mat2<C64>, _>| r.map_err(|_| Reject);
    let (k1v, k2v) = (sample_kappa(rng), sample_kappa(rng));
    let (t1, t2) = (k1v + k1v.inv(), k2v + k2v.inv());
    reject_if((t1 - t2).norm() < 0.05 || (t1 + t2).norm() < 0.05)?;
    // (a) generic λ.
    let (lam, mu) = (param(rng), param(rng));
    let clash = [k1v * k2v, k1v / k2v, k2v / k1v, (k1v * k2v).inv()]
        .iter()
        .any(|c| (lam - c).norm() < 1e-3);
    reject_if(clash || (lam - 1.0).norm() < 1e-3 || (lam + 1.0).norm() < 1e-3)?;
    let a1 = e(h2(t1, t2, lam, -lam * mu))?;
    let a2 = e(h2(t2, t1, lam, mu))?;
    round_trip(ctx, "two-a", &a1, &a2, t1, t2, PairCase::TwoA, false);
    // (b) λ = κ1^ε1 κ2^ε2, triangular.
    let pick = |k: C64, up: bool| if up { k } else { k.inv() };
    let kk1 = pick(k1v, rng.gen_bool(0.5));
    let kk2 = pick(k2v, rng.gen_bool(0.5));
    let alpha = random_complex(rng, 1.5);
    let (a1, a2) = if rng.gen_bool(0.5) {
        (e(u_plus(kk1, -kk1 * alpha))?, e(u_plus(kk2, alpha / kk2))?)
    } else {
        (e(u_minus(kk1, -alpha / kk1))?, e(u_minus(kk2, kk2 * alpha))?)
    };
    round_trip(ctx, "two-b", &a1, &a2, t1, t2, PairCase::TwoB, false);
    // (c) t1 + t2 = 0, product −p.
    let xi = random_complex(rng, 1.5);
    let a1 = e(u_plus(-kk2.inv(), xi))?;
    let a2 = e(u_plus(kk2, xi + kk2))?;
    round_trip(ctx, "two-c", &a1, &a2, -t2, t2, PairCase::TwoC, false);
    // (d) product −p, t1 + t2 ≠ 0.
    let a1 = e(k2(t1, t2, alpha + (t1 + t2) / 2.0))?;
    let a2 = e(k2(t2, t1, alpha))?;
    round_trip(ctx, "two-d", &a1, &a2, t1, t2, PairCase::TwoD, false);
    // Product +p through the sign trick.
    reject_if((t2 - t1).norm() < 0.05)?;
    let a1 = -&e(k2(-t1, t2, alpha + (t2 - t1) / 2.0))?;
    let a2 = e(k2(t2, -t1, alpha))?;
    round_trip(ctx, "two-plus-p", &a1, &a2, t1, t2, PairCase::TwoD, true);
    Ok(())
}

fn reducible(rng: &mut OracleRng, ctx: &mut Ctx, make_reducible: bool) -> Outcome {
    let (k1v, k2v) = (sample_kappa(rng), sample_kappa(rng));
    let frame = random_frame(rng);
    let (a1, a2) = if make_reducible {
        let kk2 = if rng.gen_bool(0.5) { k2v } else { k2v.inv() };
        let m1 = u_plus(k1v, random_complex(rng, 1.5)).map_err(|_| Reject)?;
        let m2 = u_plus(kk2, random_complex(rng, 1.5)).map_err(|_| Reject)?;
        (conjugate(&frame, &m1), conjugate(&frame, &m2))
    } else {
        (sample_conditioned(k1v + k1v.inv(), rng), sample_conditioned(k2v + k2v.inv(), rng))
    };
    let crit = is_reducible(&a1, &a2, 1e-9);
    let search = shares_eigenvector(&a1, &a2, 1e-7);
    let bad = crit != search || crit != make_reducible;
    ctx.check_with("criterion-vs-eigenvectors", if bad { 1.0 } else { 0.0 }, || {
        format!("criterion {crit}, eigenvector search {search}, constructed reducible {make_reducible}")
    });
    Ok(())
}

fn eval_at(f: &RatFun, point: &[C64]) -> Result<C64, Reject> {
    f.eval_numeric(point).map_err(|_| Reject)
}

fn base(rng: &mut OracleRng, ctx: &mut Ctx) -> Outcome {
    for k in [-4i64, -3, -2, -1, 1, 2, 3, 4] {
        for atom in [Tangle::Int(k), Tangle::Vert(k)] {
            let t = sample_t(rng);
            let r = random_polar(rng, 0.3, 2.5);
            let (a, b) = pair_with_trace(t, r, rng).ok_or(Reject)?;
            let rep = atom_rep(&FROZEN, &atom, &a, &b).ok_or(Reject)?;
            let data = base_invariants_with(&atom, 1).map_err(|_| Reject)?;
            let point = [t, r];
            let c = rep.coords();
            ctx.check("own-coordinate", rel(own_coordinate(&atom, &rep.ends()), r));
            ctx.check_with("u", rel(c.u, eval_at(&data.u, &point)?), || format!("{atom} at t={t}, r={r}"));
            ctx.check_with("udot", rel(c.udot, eval_at(&data.udot, &point)?), || format!("{atom} at t={t}, r={r}"));
            ctx.check_with("ucheck", rel(c.ucheck, eval_at(&data.ucheck, &point)?), || {
                format!("{atom} at t={t}, r={r}")
            });
            ctx.check("udot-west", rel(c.udot_west, c.udot));
            ctx.check("boundary", rep.boundary_residual());
            ctx.check("crossing", rep.crossing_residual(&FROZEN));
        }
    }
    Ok(())
}

/// `Ā⁻¹` shorthand for quadruple entries.
fn inv4(q: &[Mat2<C64>; 4], i: usize) -> Mat2<C64> {
    uinv(&q[i])
}

const NW_: usize = 0;
const NE_: usize = 1;
const SW_: usize = 2;
const SE_: usize = 3;

fn coords4(q: &[Mat2<C64>; 4]) -> Coords {
    Coords::of(&q[NW_], &q[NE_], &q[SW_], &q[SE_])
}

fn nondegenerate(a: C64, t: C64) -> bool {
    (a - 2.0).norm() > 1e-3 && (a - (t * t - 2.0)).norm() > 1e-3
}

fn compose(rng: &mut OracleRng, ctx: &mut Ctx) -> Outcome {
    let t = sample_t(rng);
    let t2 = t * t;
    let q1 = random_quadruple(t, rng).ok_or(Reject)?;
    let c1 = coords4(&q1);
    // Vertical: the second factor hangs below the first.
    {
        let (nw, ne) = (inv4(&q1, SW_), inv4(&q1, SE_));
        let (se, sw) = split_product(&uinv(&(&nw * &ne)), t, rng).ok_or(Reject)?;
        let q2 = [nw, ne, sw, se];
        let c2 = coords4(&q2);
        reject_if(!nondegenerate(c1.u, t))?;
        let whole = [q1[NW_].clone(), q1[NE_].clone(), q2[SW_].clone(), q2[SE_].clone()];
        let c = coords4(&whole);
        ctx.check("v-shared-u", rel(c1.u, c2.u));
        let (f, g) = fg(&t2, &c.u, &c1.udot, &c1.ucheck, &c2.udot, &c2.ucheck).ok_or(Reject)?;
        ctx.check("v-udot", rel(c.udot, f));
        ctx.check("v-ucheck", rel(c.ucheck, g));
    }
    // Horizontal: the second factor sits to the right.
    {
        let (nw, sw) = (inv4(&q1, NE_), inv4(&q1, SE_));
        let (ne, se) = split_product(&(&uinv(&nw) * &uinv(&sw)), t, rng).ok_or(Reject)?;
        let q2 = [nw, ne, sw, se];
        let c2 = coords4(&q2);
        reject_if(!nondegenerate(c1.udot, t))?;
        let whole = [q1[NW_].clone(), q2[NE_].clone(), q1[SW_].clone(), q2[SE_].clone()];
        let c = coords4(&whole);
        ctx.check("h-shared-udot", rel(c1.udot, c2.udot));
        let (f, g) = fg(&t2, &c.udot, &c1.u, &c1.ucheck, &c2.u, &c2.ucheck).ok_or(Reject)?;
        ctx.check("h-u", rel(c.u, f));
        ctx.check("h-ucheck", rel(c.ucheck, g));
    }
    Ok(())
}

/// Coefficients of `X ↦ tr(A X)` on the entries `(x11, x12, x21, x22)`.
fn trace_row(a: &Mat2<C64>) -> Vec<C64> {
    vec![a.a11, a.a21, a.a12, a.a22]
}

/// Solves four linear trace conditions `tr(A_i X) = b_i` for `X`.
fn solve_traces(rows: &[(Mat2<C64>, C64)]) -> Option<Mat2<C64>> {
    let m = DMat::from_rows(&rows.iter().map(|(a, _)| trace_row(a)).collect::<Vec<_>>());
    let b: Vec<C64> = rows.iter().map(|(_, v)| *v).collect();
    let x = m.solve(&b, 1e-12)?;
    Some(Mat2::new(x[0], x[1], x[2], x[3]))
}

fn convenient(rng: &mut OracleRng, ctx: &mut Ctx) -> Outcome {
    let t = sample_t(rng);
    let t2 = t * t;
    let q1 = random_quadruple(t, rng).ok_or(Reject)?;
    let c1 = coords4(&q1);
    reject_if(!nondegenerate(c1.u, t) || !nondegenerate(c1.udot, t))?;
    let e = Mat2::identity();

    // Vertical, forward: the second factor closes the first, so ġ = e.
    let q2 = [inv4(&q1, SW_), inv4(&q1, SE_), inv4(&q1, NW_), inv4(&q1, NE_)];
    let c2 = coords4(&q2);
    ctx.check("v-forward-ġ", (&q1[NE_] * &q2[SE_]).max_rel_diff(&e));
    ctx.check("v-forward-udot", rel(c1.udot, c2.udot));
    ctx.check("v-forward-ucheck", rel(c1.ucheck, -c2.ucheck));

    // Vertical, converse: glue the top, prescribe u̇2 = u̇1 and ǔ2 = −ǔ1,
    // solve x_se of the second factor linearly.
    let (nw, ne) = (inv4(&q1, SW_), inv4(&q1, SE_));
    let g = &nw * &ne;
    let sum = 2.0 * t2 - c1.u * c1.udot;
    let (ugrave, uacute) = ((sum - c1.ucheck) / 2.0, (sum + c1.ucheck) / 2.0);
    let b = &uinv(&g) * &ne;
    // ú = tr(sw ne) with sw = se⁻¹ g⁻¹ = (t e − se) g⁻¹.
    let se = solve_traces(&[
        (e.clone(), t),
        (ne.clone(), c1.udot),
        (nw.clone(), ugrave),
        (b.clone(), t * b.tr() - uacute),
    ])
    .ok_or(Reject)?;
    ctx.check("v-converse-det", rel(se.det(), one()));
    ctx.check("v-converse-ġ", (&q1[NE_] * &se).max_rel_diff(&e));

    // Horizontal, forward: g = e.
    let q2 = [inv4(&q1, NE_), inv4(&q1, NW_), inv4(&q1, SE_), inv4(&q1, SW_)];
    let c2 = coords4(&q2);
    ctx.check("h-forward-g", (&q1[NW_] * &q2[NE_]).max_rel_diff(&e));
    ctx.check("h-forward-u", rel(c1.u, c2.u));
    ctx.check("h-forward-ucheck", rel(c1.ucheck, -c2.ucheck));

    // Horizontal, converse: glue the west ends, prescribe u2 = u1 and
    // ǔ2 = −ǔ1, solve x_ne of the second factor linearly.
    let (nw, sw) = (inv4(&q1, NE_), inv4(&q1, SE_));
    let sum = 2.0 * t2 - c1.u * c1.udot;
    let (ugrave, uacute) = ((sum - c1.ucheck) / 2.0, (sum + c1.ucheck) / 2.0);
    // se = ne⁻¹ nw⁻¹ sw⁻¹ = (t e − ne) m, m = nw⁻¹ sw⁻¹; ù = tr(nw se).
    let m = &uinv(&nw) * &uinv(&sw);
    let mn = &m * &nw;
    let ne = solve_traces(&[
        (e.clone(), t),
        (nw.clone(), c1.u),
        (mn.clone(), t * mn.tr() - ugrave),
        (sw.clone(), uacute),
    ])
    .ok_or(Reject)?;
    ctx.check("h-converse-det", rel(ne.det(), one()));
    ctx.check("h-converse-g", (&q1[NW_] * &ne).max_rel_diff(&e));
    Ok(())
}

/// Knots whose emitted presentations are checked against solved
/// representations.
pub const PRESENTATION_CORPUS: [&str; 4] = [
    "D([[2],[-2]] *v [2] *v ([1/3] *h [1/2]))",
    "D([1/2] *v [3])",
    "D([1/3] *v [2])",
    "D(([1/2] *h [2]) *v [1/3])",
];

fn presentation(rng: &mut OracleRng, ctx: &mut Ctx, closure: &Closure, p: &Presentation) -> Outcome {
    let t = sample_t(rng);
    let plan = Plan::new(&closure.body, t, rng);
    let rep = closure_rep(&plan, closure.kind, rng, 12).ok_or(Reject)?;
    let mut point = vec![t];
    for labels in &p.var_labels {
        let (atom, ends) = &rep.atoms[labels[0]];
        let v = own_coordinate(atom, ends);
        for l in &labels[1..] {
            let (a2, e2) = &rep.atoms[*l];
            ctx.check("class-agreement", rel(own_coordinate(a2, e2), v));
        }
        point.push(v);
    }
    for ex in &p.exclusions {
        let (v, scale) = ex.eval_with_scale(&point).map_err(|_| Reject)?;
        reject_if(v.norm() <= 1e-6 * scale.max(1.0))?;
    }
    for (eq, note) in p.equations.iter().zip(&p.notes) {
        let (v, scale) = eq.eval_with_scale(&point).map_err(|_| Reject)?;
        ctx.check_with("equation", v.norm() / scale.max(1.0), || format!("{closure}: {note} at t = {t}"));
    }
    ctx.check("boundary", rep.boundary_residual());
    ctx.check("crossing", rep.crossing_residual(&FROZEN));
    ctx.check("glue", rep.glue_residual);
    ctx.check("closure", closure_defect(closure.kind, &rep).max_abs());
    Ok(())
}

/// Pretzel representations in the normal form `x_1^nw x_1^ne = d(λ)`, with
/// unknowns `λ, μ2, μ3, μ4` (`μ1 = 1`) solved so that every twist
/// propagates its west ends onto the prescribed east ends.
pub struct PretzelRep {
    pub t1: C64,
    pub t2: C64,
    pub lambda: C64,
    pub mu: [C64; 4],
    pub nw: [Mat2<C64>; 4],
    pub ne: [Mat2<C64>; 4],
    pub sw: [Mat2<C64>; 4],
    pub se: [Mat2<C64>; 4],
    pub crossings: Vec<(i8, [Mat2<C64>; 4])>,
}

fn pretzel_ends(t1: C64, t2: C64, x: &[C64]) -> Option<([Mat2<C64>; 4], [Mat2<C64>; 4])> {
    let lam = x[0];
    let mu = [one(), x[1], x[2], x[3]];
    let mut nw = Vec::new();
    let mut ne = Vec::new();
    for (i, m) in mu.iter().enumerate() {
        let (a, b) = if i % 2 == 0 { (t1, t2) } else { (t2, t1) };
        nw.push(h2(a, b, lam, -lam * m).ok()?);
        ne.push(h2(b, a, lam, *m).ok()?);
    }
    Some((nw.try_into().ok()?, ne.try_into().ok()?))
}

fn twist3(nw: &Mat2<C64>, sw: &Mat2<C64>) -> Option<TangleRep> {
    atom_rep(&FROZEN, &Tangle::Int(3), nw, sw)
}

pub fn solve_pretzel(t1: C64, t2: C64, rng: &mut OracleRng, attempts: usize) -> Option<PretzelRep> {
    let f = |x: &[C64]| {
        let (nw, ne) = pretzel_ends(t1, t2, x)?;
        let mut out = Vec::with_capacity(32);
        for i in 0..4 {
            let j = (i + 1) % 4;
            let r = twist3(&nw[i], &uinv(&nw[j]))?;
            let d1 = &r.ne - &ne[i];
            let d2 = &(&r.se * &ne[j]) - &Mat2::identity();
            out.extend([d1.a11, d1.a12, d1.a21, d1.a22, d2.a11, d2.a12, d2.a21, d2.a22]);
        }
        Some(out)
    };
    let opts = LmOptions { max_iter: 200, tol: 1e-13, step: 1e-7 };
    for _ in 0..attempts {
        let x0 = [random_polar(rng, 0.5, 2.0), param(rng), param(rng), param(rng)];
        let res = levenberg_marquardt(f, &x0, opts);
        if res.residual > 1e-11 {
            continue;
        }
        let x = res.x;
        let (nw, ne) = pretzel_ends(t1, t2, &x)?;
        let mut sw = Vec::new();
        let mut se = Vec::new();
        let mut crossings = Vec::new();
        for i in 0..4 {
            let r = twist3(&nw[i], &uinv(&nw[(i + 1) % 4]))?;
            sw.push(r.sw.clone());
            se.push(r.se.clone());
            crossings.extend(r.crossings);
        }
        return Some(PretzelRep {
            t1,
            t2,
            lambda: x[0],
            mu: [one(), x[1], x[2], x[3]],
            nw,
            ne,
            sw: sw.try_into().ok()?,
            se: se.try_into().ok()?,
            crossings,
        });
    }
    None
}

impl PretzelRep {
    /// `r_i = tr(x_i^ne x_i^se)`.
    pub fn r(&self) -> [C64; 4] {
        core::array::from_fn(|i| (&self.ne[i] * &self.se[i]).tr())
    }

    /// `(t1, t2, τ, λ, r1..r4)`.
    pub fn point(&self) -> Vec<C64> {
        let mut v = vec![self.t1, self.t2, self.lambda + self.lambda.inv(), self.lambda];
        v.extend(self.r());
        v
    }
}

fn pretzel(rng: &mut OracleRng, ctx: &mut Ctx, p: &Presentation) -> Outcome {
    let t1 = sample_t(rng);
    let t2 = sample_t(rng);
    let rep = solve_pretzel(t1, t2, rng, 40).ok_or(Reject)?;
    let point = rep.point();
    let tau = point[2];
    for ex in &p.exclusions {
        let (v, scale) = ex.eval_with_scale(&point).map_err(|_| Reject)?;
        reject_if(v.norm() <= 1e-6 * scale.max(1.0))?;
    }
    for (eq, note) in p.equations.iter().zip(&p.notes) {
        let (v, scale) = eq.eval_with_scale(&point).map_err(|_| Reject)?;
        ctx.check_with("equation", v.norm() / scale.max(1.0), || format!("{note} at t1 = {t1}, t2 = {t2}"));
    }
    for i in 0..4 {
        ctx.check("u-is-tau", rel((&rep.nw[i] * &rep.ne[i]).tr(), tau));
        let ratio = mu_ratio(&RatFun::var(crate::links::r_index(i + 1))).map_err(|_| Reject)?;
        let want = eval_at(&ratio, &point)?;
        ctx.check("mu-ratio", rel(rep.mu[i] / rep.mu[(i + 1) % 4], want));
        let ends = [rep.nw[i].clone(), rep.ne[i].clone(), rep.sw[i].clone(), rep.se[i].clone()];
        ctx.check("boundary", boundary_residual(&ends));
    }
    let cr = rep.crossings.iter().map(|(s, e)| FROZEN.residual(*s, e)).fold(0.0, f64::max);
    ctx.check("crossing", cr);
    Ok(())
}
