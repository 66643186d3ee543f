use num_complex::Complex64 as C64;
use num_traits::One;
use proptest::prelude::*;
use tanglechar_core::mat2::{cayley_power, h1, qc, u_minus, u_plus, Mat2, QC};
use tanglechar_core::ratfun::{MultiPoly, RatFun};
use tanglechar_core::tangle::{component_count, parse_closure, parse_tangle, Closure, ClosureKind, Dir, Tangle};

fn twist() -> impl Strategy<Value = i64> {
    prop_oneof![-5i64..=-1, 1i64..=5]
}

fn tangle(depth: u32) -> impl Strategy<Value = Tangle> {
    let leaf = prop_oneof![
        twist().prop_map(Tangle::Int),
        twist().prop_map(Tangle::Vert),
        prop::collection::vec(twist(), 2..4).prop_map(Tangle::Rational),
    ];
    leaf.prop_recursive(depth, 64, 2, |inner| {
        (any::<bool>(), inner.clone(), inner).prop_map(|(v, a, b)| Tangle::comp(if v { Dir::V } else { Dir::H }, a, b))
    })
}

fn closure() -> impl Strategy<Value = Closure> {
    (any::<bool>(), tangle(6)).prop_map(|(d, body)| Closure { kind: if d { ClosureKind::D } else { ClosureKind::N }, body })
}

/// Polynomials in `t` (0), `r` (1), `u` (2) with small integer coefficients.
fn poly() -> impl Strategy<Value = RatFun> {
    prop::collection::vec((-4i64..=4, 0u32..3, 0u32..3, 0u32..3), 1..5).prop_map(|terms| {
        let mut p = MultiPoly::zero();
        for (c, a, b, e) in terms {
            let mono = (0..a).fold(MultiPoly::from_i64(c), |m, _| &m * &MultiPoly::var(0));
            let mono = (0..b).fold(mono, |m, _| &m * &MultiPoly::var(1));
            let mono = (0..e).fold(mono, |m, _| &m * &MultiPoly::var(2));
            p = &p + &mono;
        }
        RatFun::from(p)
    })
}

fn ratfun() -> impl Strategy<Value = RatFun> {
    (poly(), poly()).prop_filter_map("zero denominator", |(n, d)| n.div(&d).ok())
}

fn point() -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| C64::new(a, b)), 3)
}

fn close(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-7 * 1f64.max(a.norm()).max(b.norm())
}

fn q(p: i64, d: i64) -> QC {
    qc(p, d)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn tangle_text_round_trips(t in tangle(6)) {
        prop_assert_eq!(parse_tangle(&t.to_string()).unwrap(), t);
    }

    #[test]
    fn closure_text_round_trips(c in closure()) {
        prop_assert_eq!(parse_closure(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn component_count_survives_swaps(c in closure(), pick in any::<prop::sample::Index>()) {
        prop_assume!(c.body.comp_count() > 0);
        let idx = pick.index(c.body.comp_count());
        let swapped = Closure { kind: c.kind, body: c.body.swap_at(idx).unwrap() };
        prop_assert_eq!(component_count(&c), component_count(&swapped));
    }

    #[test]
    fn field_laws(f in ratfun(), g in ratfun(), h in ratfun()) {
        prop_assert!(f.add(&g).sub(&g).equals(&f));
        prop_assert!(f.mul(&g.add(&h)).equals(&f.mul(&g).add(&f.mul(&h))));
        prop_assert!(f.mul(&g).equals(&g.mul(&f)));
    }

    #[test]
    fn equals_agrees_with_evaluation(f in ratfun(), g in ratfun(), x in point()) {
        let (Ok(a), Ok(b)) = (f.eval_numeric(&x), g.eval_numeric(&x)) else { return Ok(()) };
        if f.equals(&g) {
            prop_assert!(close(a, b));
        }
        let (Ok(s), Ok(p)) = (f.add(&g).eval_numeric(&x), f.mul(&g).eval_numeric(&x)) else { return Ok(()) };
        prop_assert!(close(s, a + b));
        prop_assert!(close(p, a * b));
    }

    #[test]
    fn substitution_matches_evaluation(f in ratfun(), g in ratfun(), x in point()) {
        let Ok(fg) = f.substitute(1, &g) else { return Ok(()) };
        let Ok(gx) = g.eval_numeric(&x) else { return Ok(()) };
        let (Ok(lhs), Ok(rhs)) = (fg.eval_numeric(&x), f.eval_numeric(&[x[0], gx, x[2]])) else { return Ok(()) };
        prop_assert!(close(lhs, rhs));
    }

    #[test]
    fn substitutions_compose(f in ratfun(), g in poly(), h in poly()) {
        // f[r := g][u := h] = f[u := h][r := g[u := h]] needs h free of r.
        let h = h.substitute(1, &RatFun::from_i64(1)).unwrap();
        let (Ok(a), Ok(b)) = (
            f.substitute(1, &g).and_then(|x| x.substitute(2, &h)),
            g.substitute(2, &h).and_then(|gh| f.substitute(2, &h).and_then(|x| x.substitute(1, &gh))),
        ) else { return Ok(()) };
        prop_assert!(a.equals(&b));
    }

    #[test]
    fn h1_is_special_linear_with_trace_t(t in -9i64..9, l in 1i64..9, m in twist(), d in 1i64..5) {
        prop_assume!(l != d);
        let x = h1(q(t, 1), q(l, d), q(m, d)).unwrap();
        prop_assert_eq!(x.det(), QC::one());
        prop_assert_eq!(x.tr(), q(t, 1));
    }

    #[test]
    fn cayley_power_is_exact_repeated_multiplication(k in -3i64..4, x in -3i64..4, n in -8i64..=8) {
        prop_assume!(k != 0);
        let z = &u_plus(q(k, 1), q(x, 2)).unwrap() * &u_minus(q(1, k), q(x + 1, 3)).unwrap();
        let want = if n >= 0 {
            (0..n).fold(Mat2::identity(), |acc, _| &acc * &z)
        } else {
            let zi = z.inv().unwrap();
            (0..-n).fold(Mat2::identity(), |acc, _| &acc * &zi)
        };
        prop_assert_eq!(cayley_power(&z, n, 0.0).unwrap(), want);
    }
}

