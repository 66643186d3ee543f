//! Two-trace coordinates for links: odd twists, the `μ` ratio and the
//! (3,3,3,3)-pretzel presentation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::invariants::{cheb_poly, push_exclusion, saturate, Presentation};
use crate::ratfun::{MultiPoly, RatFun, RatFunError, Registry};
use crate::tangle::{component_count, Closure, ClosureKind, Dir, Tangle};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinkError {
    #[error("odd twist required, got {0}")]
    EvenTwist(i64),
    #[error("not implemented for links: {0}")]
    NotImplemented(String),
    #[error(transparent)]
    Arithmetic(#[from] RatFunError),
}

/// Registry layout shared by all two-trace computations.
pub const T1: usize = 0;
pub const T2: usize = 1;
pub const TAU: usize = 2;
pub const LAMBDA: usize = 3;

/// Index of `r_i` (1-based) in the pretzel registry.
pub fn r_index(i: usize) -> usize {
    LAMBDA + i
}

/// Variables `t1, t2, τ, λ` plus `n` strand variables `r1..rn`.
#[derive(Debug, Clone)]
pub struct TwoTraceContext {
    pub registry: Registry,
}

impl TwoTraceContext {
    pub fn new(n: usize) -> Self {
        let mut registry = Registry::with_names(["t1", "t2", "tau", "lambda"]);
        for i in 1..=n {
            registry.intern(&format!("r{i}"));
        }
        TwoTraceContext { registry }
    }

    /// `τ t1 t2 − t1² − t2² − τ² + 4`.
    pub fn delta(&self) -> MultiPoly {
        delta_in(&MultiPoly::var(TAU))
    }
}

/// `δ` with `τ` replaced by `x`.
fn delta_in(x: &MultiPoly) -> MultiPoly {
    let (t1, t2) = (MultiPoly::var(T1), MultiPoly::var(T2));
    let four = MultiPoly::from_i64(4);
    &(&(&(x * &(&t1 * &t2)) - &t1.pow(2)) - &t2.pow(2)) - &(&x.pow(2) - &four)
}

/// `(u, ǔ)` of the twist `[k]`, `k` odd, as functions of its `u̇`.
pub fn odd_twist_invariants(k: i64, udot: &RatFun) -> Result<(RatFun, RatFun), LinkError> {
    if k % 2 == 0 {
        return Err(LinkError::EvenTwist(k));
    }
    // Work in a scratch variable above everything in `udot`, then substitute.
    let s = udot.vars().iter().next_back().map_or(0, |v| v + 1).max(T2 + 1);
    let x = MultiPoly::var(s);
    let (omega, theta) = cheb_poly(k, &-&x);
    let d = delta_in(&x);
    let quot = (&theta + &x)
        .div_exact(&(&x.pow(2) - &MultiPoly::from_i64(4)))
        .expect("x^2 - 4 divides theta_k(-x) + x for odd k");
    let t12 = &MultiPoly::var(T1) * &MultiPoly::var(T2);
    let u = &(&t12 - &x) - &(&d * &quot);
    let ucheck = &d * &omega;
    Ok((
        RatFun::from(u).substitute(s, udot)?,
        RatFun::from(ucheck).substitute(s, udot)?,
    ))
}

/// `μ_i / μ_{i+1}` for the pretzel pattern, as a function of `r_i`, with `λ`
/// a formal variable.
pub fn mu_ratio(r: &RatFun) -> Result<RatFun, LinkError> {
    let lam = RatFun::var(LAMBDA);
    let lam_inv = lam.inv()?;
    let t1 = RatFun::var(T1);
    let t2 = RatFun::var(T2);
    let t12 = t1.mul(&t2);
    let inner = r.mul(r).add(&lam_inv.sub(&t12).mul(r)).sub(&RatFun::from_i64(2));
    let num = lam
        .sub(&lam_inv)
        .mul(&inner)
        .add(&lam.mul(&t1.mul(&t1).add(&t2.mul(&t2))))
        .sub(&t12.scale(&crate::ratfun::qi(2)));
    Ok(num.div(&RatFun::from(delta_in(&MultiPoly::var(TAU))))?)
}

/// `r³ − t1 t2 r² + (t1² + t2² − 3) r − t1 t2 + τ`.
pub fn pretzel_cubic(r: &MultiPoly) -> MultiPoly {
    let (t1, t2) = (MultiPoly::var(T1), MultiPoly::var(T2));
    let t12 = &t1 * &t2;
    let lin = &(&t1.pow(2) + &t2.pow(2)) - &MultiPoly::from_i64(3);
    &(&(&(&r.pow(3) - &(&t12 * &r.pow(2))) + &(&lin * r)) - &t12) + &MultiPoly::var(TAU)
}

/// `λ² N_i`, where `N_i` is the numerator of the `μ` ratio.
fn cleared_factor(r: &MultiPoly) -> MultiPoly {
    let (t1, t2) = (MultiPoly::var(T1), MultiPoly::var(T2));
    let lam = MultiPoly::var(LAMBDA);
    let t12 = &t1 * &t2;
    let two = MultiPoly::from_i64(2);
    let quad = &(&r.pow(2) - &(&t12 * r)) - &two;
    let a = &(&lam.pow(3) - &lam) * &quad;
    let b = &(&lam.pow(2) - &MultiPoly::one()) * r;
    let c = &lam.pow(3) * &(&t1.pow(2) + &t2.pow(2));
    let d = &(&lam.pow(2) * &t12) * &two;
    &(&(&a + &b) + &c) - &d
}

/// Presentation of the excellent part of the (3,3,3,3)-pretzel link.
pub fn pretzel3333_presentation() -> Presentation {
    let ctx = TwoTraceContext::new(4);
    let lam = MultiPoly::var(LAMBDA);
    let tau = MultiPoly::var(TAU);
    let mut equations = Vec::new();
    let mut notes = Vec::new();
    for i in 1..=4 {
        equations.push(pretzel_cubic(&MultiPoly::var(r_index(i))));
        notes.push(format!("twist {i}: u = tau"));
    }
    equations.push(&(&lam.pow(2) - &(&tau * &lam)) + &MultiPoly::one());
    notes.push("lambda + 1/lambda = tau".into());
    let mut prod = MultiPoly::one();
    for i in 1..=4 {
        prod = &prod * &cleared_factor(&MultiPoly::var(r_index(i)));
    }
    let rhs = &lam.pow(8) * &ctx.delta().pow(4);
    equations.push(&prod - &rhs);
    notes.push("product of mu ratios is 1".into());

    let mut exclusions = Vec::new();
    for e in [
        ctx.delta(),
        &tau.pow(2) - &MultiPoly::from_i64(4),
        &lam.pow(2) - &MultiPoly::one(),
        lam.clone(),
    ] {
        push_exclusion(&mut exclusions, &e);
    }
    exclusions.sort();
    let equations = equations.iter().map(|e| saturate(e, &exclusions)).collect();
    Presentation {
        registry: ctx.registry,
        traces: alloc::vec!["t1".into(), "t2".into()],
        equations,
        notes,
        exclusions,
        var_sources: (1..=4).map(|i| format!("u-dot of twist {i}")).collect(),
        var_labels: (0..4).map(|i| alloc::vec![i]).collect(),
    }
}

fn is_vertical_stack_of(t: &Tangle, atom: &Tangle) -> bool {
    match t.children() {
        Some((Dir::V, a, b)) => is_vertical_stack_of(a, atom) && is_vertical_stack_of(b, atom),
        Some(_) => false,
        None => t == atom,
    }
}

/// Link presentations: only the shapes with a worked two-trace calculus
/// are supported.
pub fn link_presentation(c: &Closure) -> Result<Presentation, LinkError> {
    let n = component_count(c);
    let body = c.body.expand();
    if n == 2 && c.kind == ClosureKind::D && body.atoms().len() == 4 && is_vertical_stack_of(&body, &Tangle::Int(3)) {
        return Ok(pretzel3333_presentation());
    }
    Err(LinkError::NotImplemented(format!(
        "{n}-component closure {c}; only the (3,3,3,3)-pretzel pattern is available"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::{base_invariants_with, T};
    use crate::ratfun::parse;
    use crate::tangle::parse_closure;

    fn pz(text: &str) -> RatFun {
        let mut reg = TwoTraceContext::new(4).registry;
        reg.intern("x");
        parse(text, &mut reg).unwrap()
    }

    #[test]
    fn odd_twist_three() {
        let x = pz("x");
        let (u, uc) = odd_twist_invariants(3, &x).unwrap();
        assert!(u.equals(&pz("3*x - x^3 + (x^2+1)*t1*t2 - x*(t1^2+t2^2)")));
        assert!(uc.equals(&pz("(4 - x^2 + x*t1*t2 - t1^2 - t2^2)*(x^2-1)")));
    }

    #[test]
    fn even_twist_rejected() {
        assert_eq!(odd_twist_invariants(2, &pz("x")), Err(LinkError::EvenTwist(2)));
    }

    #[test]
    fn odd_twist_matches_single_trace() {
        // Registry of the single-trace engine: t = 0, r = 1.
        for k in [-5i64, -3, -1, 1, 3, 5] {
            let (u, uc) = odd_twist_invariants(k, &RatFun::var(8)).unwrap();
            let to_single = |f: &RatFun| {
                f.substitute(T2, &RatFun::var(T1)).unwrap().substitute(8, &RatFun::var(1)).unwrap()
            };
            let base = base_invariants_with(&Tangle::Int(k), 1).unwrap();
            assert_eq!(T, T1);
            assert!(to_single(&u).equals(&base.u), "u at k = {k}");
            assert!(to_single(&uc).equals(&base.ucheck), "ucheck at k = {k}");
        }
    }

    #[test]
    fn delta_factors_on_diagonal() {
        let d = RatFun::from(TwoTraceContext::new(0).delta()).substitute(T2, &RatFun::var(T1)).unwrap();
        let mut reg = TwoTraceContext::new(0).registry;
        let f = parse("-(tau-2)*(tau+2-t1^2)", &mut reg).unwrap();
        assert!(d.equals(&f));
    }

    #[test]
    fn cubic_at_zero() {
        let e = pretzel_cubic(&MultiPoly::zero());
        let mut reg = TwoTraceContext::new(0).registry;
        assert_eq!(RatFun::from(e), parse("tau - t1*t2", &mut reg).unwrap());
    }

    #[test]
    fn cubic_is_u_equals_tau() {
        let x = pz("x");
        let (u, _) = odd_twist_invariants(3, &x).unwrap();
        let e = RatFun::from(pretzel_cubic(&MultiPoly::var(8)));
        assert!(e.equals(&pz("tau").sub(&u)));
    }

    #[test]
    fn ucheck_shortcut_modulo_cubic() {
        let (_, uc) = odd_twist_invariants(3, &pz("x")).unwrap();
        let cubic = pretzel_cubic(&MultiPoly::var(8));
        let lhs = uc.as_poly().unwrap().rem_by(8, &cubic).unwrap();
        let rhs = pz("2*x^2 + (tau - 2*t1*t2)*x + t1^2 + t2^2 - 4");
        assert_eq!(RatFun::from(lhs), rhs);
    }

    #[test]
    fn cleared_factor_is_lambda_squared_numerator() {
        let r = pz("r1");
        let lhs = mu_ratio(&r).unwrap().mul(&RatFun::from(TwoTraceContext::new(0).delta()));
        let f = RatFun::from(cleared_factor(&MultiPoly::var(r_index(1))));
        assert!(f.equals(&lhs.mul(&pz("lambda^2"))));
    }

    #[test]
    fn pretzel_shape() {
        let p = pretzel3333_presentation();
        assert_eq!(p.variables(), ["t1", "t2", "tau", "lambda", "r1", "r2", "r3", "r4"]);
        assert_eq!(p.equations.len(), 6);
        assert_eq!(p.traces, ["t1", "t2"]);
        assert_eq!(p.exclusions.len(), 4);
    }

    #[test]
    fn link_dispatch() {
        let c = parse_closure("D([3] *v [3] *v ([3] *v [3]))").unwrap();
        assert!(link_presentation(&c).is_ok());
        let c = parse_closure("D([1/2] *v [1/2])").unwrap();
        assert!(matches!(link_presentation(&c), Err(LinkError::NotImplemented(_))));
    }
}
