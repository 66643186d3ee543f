//! Numeric matrix oracle: sampling in `G(t)`, tangle representations built
//! crossing by crossing, and verification suites.

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::Cell;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::{Float, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{levenberg_marquardt, DMat, LmOptions};
use crate::mat2::{eigen_pair, h1, h2, Mat2, C64};
use crate::tangle::{ClosureKind, Dir, Tangle};

mod suites;
pub use suites::{run_suite, Failure, SuiteName, SuiteReport, SUITES};

pub type OracleRng = ChaCha8Rng;

/// Independent stream `index` of the generator seeded by `seed`.
pub fn sample_rng(seed: u64, index: u64) -> OracleRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

pub fn uniform(rng: &mut OracleRng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

/// Uniform in the square of half-width `r`.
pub fn random_complex(rng: &mut OracleRng, r: f64) -> C64 {
    C64::new(uniform(rng, -r, r), uniform(rng, -r, r))
}

/// Modulus uniform in `[lo, hi)`, argument uniform.
pub fn random_polar(rng: &mut OracleRng, lo: f64, hi: f64) -> C64 {
    C64::from_polar(uniform(rng, lo, hi), uniform(rng, 0.0, 2.0 * PI))
}

/// `|t| ∈ [0.5, 3]` and `t` at distance at least 0.3 from `0, ±2`.
pub fn is_generic_t(t: C64) -> bool {
    let m = t.norm();
    (0.5..=3.0).contains(&m) && (t - 2.0).norm() >= 0.3 && (t + 2.0).norm() >= 0.3 && m >= 0.3
}

/// An eigenvalue `κ` with `t = κ + 1/κ` generic and `κ` well away from the
/// real and imaginary axes.
pub fn sample_kappa(rng: &mut OracleRng) -> C64 {
    loop {
        let rho = uniform(rng, 0.8, 1.25);
        let phi = uniform(rng, 0.3, 2.85);
        if (phi - PI / 2.0).abs() < 0.25 {
            continue;
        }
        let k = C64::from_polar(rho, phi);
        if is_generic_t(k + k.inv()) {
            return k;
        }
    }
}

pub fn sample_t(rng: &mut OracleRng) -> C64 {
    let k = sample_kappa(rng);
    k + k.inv()
}

/// A random element of SU(2).
pub fn random_su2(rng: &mut OracleRng) -> Mat2<C64> {
    let a = random_complex(rng, 1.0);
    let b = random_complex(rng, 1.0);
    let n = (a.norm_sqr() + b.norm_sqr()).sqrt().max(1e-300);
    let (a, b) = (a / n, b / n);
    Mat2::new(a, -b.conj(), b, a.conj())
}

/// A well-conditioned change of frame `U1 diag(s, 1/s) U2`, `s ∈ [1, 1.5]`.
pub fn random_frame(rng: &mut OracleRng) -> Mat2<C64> {
    let s = C64::new(uniform(rng, 1.0, 1.5), 0.0);
    let mid = Mat2::new(s, C64::zero(), C64::zero(), s.inv());
    &(&random_su2(rng) * &mid) * &random_su2(rng)
}

/// `q m q⁻¹` for unimodular `q`.
pub fn conjugate(q: &Mat2<C64>, m: &Mat2<C64>) -> Mat2<C64> {
    &(q * m) * &q.adj()
}

/// Inverse of a unimodular matrix.
pub fn uinv(m: &Mat2<C64>) -> Mat2<C64> {
    m.adj()
}

/// The plain sampler: random `a`, `b` with `|b| ≥ 1e−3`, `c` from `det = 1`.
pub fn sample_in_gt(t: C64, rng: &mut OracleRng) -> Mat2<C64> {
    loop {
        let a = random_complex(rng, 1.0);
        let b = random_complex(rng, 1.0);
        if b.norm() < 1e-3 {
            continue;
        }
        let c = (a * (t - a) - 1.0) / b;
        return Mat2::new(a, b, c, t - a);
    }
}

/// `Q diag(κ, 1/κ) Q⁻¹` with `Q` a random well-conditioned frame.
pub fn sample_conditioned(t: C64, rng: &mut OracleRng) -> Mat2<C64> {
    let (k, ki) = eigen_pair(t);
    conjugate(&random_frame(rng), &Mat2::new(k, C64::zero(), C64::zero(), ki))
}

/// Random data that fixes a pair up to its trace coordinate.
#[derive(Debug, Clone)]
pub struct PairShape {
    pub mu_factor: C64,
    pub frame: Mat2<C64>,
}

impl PairShape {
    pub fn sample(rng: &mut OracleRng) -> Self {
        PairShape { mu_factor: random_polar(rng, 0.7, 1.4), frame: random_frame(rng) }
    }
}

const DEGENERATE: f64 = 1e-6;

/// `(a1, a2)` in `G(t)` with `tr(a1 a2) = r`, via `a1 a2 = d(λ)` in the
/// frame of `shape`.
pub fn pair_from_shape(t: C64, r: C64, shape: &PairShape) -> Option<(Mat2<C64>, Mat2<C64>)> {
    let (lam, _) = eigen_pair(r);
    let q = t * t - r - 2.0;
    if (lam + 1.0).norm() < DEGENERATE || q.norm() < DEGENERATE || (r - 2.0).norm() < DEGENERATE {
        return None;
    }
    let mu = (q * lam).sqrt() * shape.mu_factor;
    let a1 = h1(t, lam, -lam * mu).ok()?;
    let a2 = h1(t, lam, mu).ok()?;
    Some((conjugate(&shape.frame, &a1), conjugate(&shape.frame, &a2)))
}

pub fn pair_with_trace(t: C64, r: C64, rng: &mut OracleRng) -> Option<(Mat2<C64>, Mat2<C64>)> {
    pair_from_shape(t, r, &PairShape::sample(rng))
}

/// Two-trace pair: `a_i ∈ G(t_i)`, `tr(a1 a2) = τ`.
pub fn pair_with_traces(t1: C64, t2: C64, tau: C64, rng: &mut OracleRng) -> Option<(Mat2<C64>, Mat2<C64>)> {
    let shape = PairShape::sample(rng);
    let (lam, li) = eigen_pair(tau);
    if (lam - li).norm() < DEGENERATE {
        return None;
    }
    let delta = crate::mat2::delta_lambda(&t1, &t2, &lam).ok()?;
    if delta.norm() < DEGENERATE {
        return None;
    }
    let mu = delta.sqrt() * shape.mu_factor;
    let a1 = h2(t1, t2, lam, -lam * mu).ok()?;
    let a2 = h2(t2, t1, lam, mu).ok()?;
    Some((conjugate(&shape.frame, &a1), conjugate(&shape.frame, &a2)))
}

/// `(se, sw)` with `se sw = M` and both in `G(t)`, `t` the common trace.
pub fn split_product(m: &Mat2<C64>, t: C64, rng: &mut OracleRng) -> Option<(Mat2<C64>, Mat2<C64>)> {
    let (a, b) = pair_with_trace(t, m.tr(), rng)?;
    // a b = Q d(λ) Q⁻¹ in the frame of the pair; move it onto m.
    let c = solve_conjugator(&[(&a * &b, m.clone())])?;
    if c.1 > 1e-8 {
        return None;
    }
    Some((conjugate(&c.0, &a), conjugate(&c.0, &b)))
}

/// A random end quadruple `(nw, ne, sw, se)` in `G(t)` satisfying the
/// boundary relation `nw ne se sw = e`.
pub fn random_quadruple(t: C64, rng: &mut OracleRng) -> Option<[Mat2<C64>; 4]> {
    let nw = sample_conditioned(t, rng);
    let ne = sample_conditioned(t, rng);
    let (se, sw) = split_product(&uinv(&(&nw * &ne)), t, rng)?;
    Some([nw, ne, sw, se])
}

/// Which strand of a crossing is over and how the under-arc is conjugated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CrossingConvention {
    /// When set, the ne–sw strand is over in `[+1]` (and nw–se in `[−1]`).
    pub mirror: bool,
    pub eps_pos: i8,
    pub eps_neg: i8,
}

/// The convention reproducing the base-case formulas, including the sign of
/// `ǔ`: in `[+1]` the nw–se strand is over with `x_se = x_nw⁻¹` and
/// `x_sw = x_nw x_ne⁻¹ x_nw⁻¹`; in `[−1]` `x_sw = x_ne⁻¹` and
/// `x_se = x_ne⁻¹ x_nw⁻¹ x_ne`.
pub const FROZEN: CrossingConvention = CrossingConvention { mirror: false, eps_pos: 1, eps_neg: -1 };

fn pw(m: &Mat2<C64>, e: i8) -> Mat2<C64> {
    if e > 0 {
        m.clone()
    } else {
        uinv(m)
    }
}

impl CrossingConvention {
    pub fn all() -> Vec<CrossingConvention> {
        let mut v = Vec::new();
        for mirror in [false, true] {
            for eps_pos in [1i8, -1] {
                for eps_neg in [1i8, -1] {
                    v.push(CrossingConvention { mirror, eps_pos, eps_neg });
                }
            }
        }
        v
    }

    /// `(nw–se over, ε)` for a crossing of the given sign.
    fn over(&self, sign: i8) -> (bool, i8) {
        let eps = if sign > 0 { self.eps_pos } else { self.eps_neg };
        ((sign > 0) != self.mirror, eps)
    }

    /// `(ne, se)` from the west ends.
    pub fn west_to_east(&self, sign: i8, nw: &Mat2<C64>, sw: &Mat2<C64>) -> (Mat2<C64>, Mat2<C64>) {
        match self.over(sign) {
            (true, e) => (&(&pw(nw, -e) * &uinv(sw)) * &pw(nw, e), uinv(nw)),
            (false, e) => (uinv(sw), &(&pw(sw, -e) * &uinv(nw)) * &pw(sw, e)),
        }
    }

    /// `(sw, se)` from the top ends.
    pub fn top_to_bottom(&self, sign: i8, nw: &Mat2<C64>, ne: &Mat2<C64>) -> (Mat2<C64>, Mat2<C64>) {
        match self.over(sign) {
            (true, e) => (&(&pw(nw, e) * &uinv(ne)) * &pw(nw, -e), uinv(nw)),
            (false, e) => (uinv(ne), &(&pw(ne, e) * &uinv(nw)) * &pw(ne, -e)),
        }
    }

    /// Largest entry of the crossing relation defect on ends `[nw, ne, sw, se]`.
    pub fn residual(&self, sign: i8, ends: &[Mat2<C64>; 4]) -> f64 {
        let [nw, ne, sw, se] = ends;
        let (sw2, se2) = self.top_to_bottom(sign, nw, ne);
        sw.max_rel_diff(&sw2).max(se.max_rel_diff(&se2))
    }
}

/// Trace coordinates read off an end quadruple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coords {
    pub u: C64,
    pub udot: C64,
    pub ugrave: C64,
    pub uacute: C64,
    pub ucheck: C64,
    /// `tr(x_nw x_sw)`, which must agree with `u̇`.
    pub udot_west: C64,
}

impl Coords {
    pub fn of(nw: &Mat2<C64>, ne: &Mat2<C64>, sw: &Mat2<C64>, se: &Mat2<C64>) -> Coords {
        let ugrave = (nw * se).tr();
        let uacute = (sw * ne).tr();
        Coords {
            u: (nw * ne).tr(),
            udot: (ne * se).tr(),
            ugrave,
            uacute,
            ucheck: ugrave - uacute,
            udot_west: (nw * sw).tr(),
        }
    }
}

/// Boundary defect of `[nw, ne, sw, se]`; see [`TangleRep::boundary_residual`].
pub fn boundary_residual(e: &[Mat2<C64>; 4]) -> f64 {
    let p = &(&(&e[0] * &e[1]) * &e[3]) * &e[2];
    let scale = e.iter().map(|m| m.max_abs().max(1.0)).product::<f64>();
    (&p - &Mat2::identity()).max_abs() / scale
}

/// `|a − b| / max(1, |a|, |b|)`.
pub fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / 1.0f64.max(a.norm()).max(b.norm())
}

/// A representation of a tangle: outward end matrices plus every crossing
/// and every atom, in left-to-right order.
#[derive(Debug, Clone)]
pub struct TangleRep {
    pub nw: Mat2<C64>,
    pub ne: Mat2<C64>,
    pub sw: Mat2<C64>,
    pub se: Mat2<C64>,
    pub crossings: Vec<(i8, [Mat2<C64>; 4])>,
    pub atoms: Vec<(Tangle, [Mat2<C64>; 4])>,
    /// Largest defect of any solved gluing conjugator.
    pub glue_residual: f64,
}

impl TangleRep {
    pub fn ends(&self) -> [Mat2<C64>; 4] {
        [self.nw.clone(), self.ne.clone(), self.sw.clone(), self.se.clone()]
    }

    pub fn coords(&self) -> Coords {
        Coords::of(&self.nw, &self.ne, &self.sw, &self.se)
    }

    /// Largest entry of `x_nw x_ne x_se x_sw − e`, relative to the product
    /// of the factors' largest entries.
    pub fn boundary_residual(&self) -> f64 {
        boundary_residual(&self.ends())
    }

    pub fn crossing_residual(&self, conv: &CrossingConvention) -> f64 {
        self.crossings.iter().map(|(s, e)| conv.residual(*s, e)).fold(0.0, f64::max)
    }

    pub fn conjugated(&self, c: &Mat2<C64>) -> TangleRep {
        let cj = |m: &Mat2<C64>| conjugate(c, m);
        let cj4 = |e: &[Mat2<C64>; 4]| [cj(&e[0]), cj(&e[1]), cj(&e[2]), cj(&e[3])];
        TangleRep {
            nw: cj(&self.nw),
            ne: cj(&self.ne),
            sw: cj(&self.sw),
            se: cj(&self.se),
            crossings: self.crossings.iter().map(|(s, e)| (*s, cj4(e))).collect(),
            atoms: self.atoms.iter().map(|(a, e)| (a.clone(), cj4(e))).collect(),
            glue_residual: self.glue_residual,
        }
    }
}

/// The own coordinate of an atom: `u` of `[1/k]`, `u̇` of `[k]`.
pub fn own_coordinate(atom: &Tangle, ends: &[Mat2<C64>; 4]) -> C64 {
    let c = Coords::of(&ends[0], &ends[1], &ends[2], &ends[3]);
    match atom {
        Tangle::Vert(_) => c.u,
        _ => c.udot,
    }
}

/// Propagates the inputs `(a, b)` through a twist atom: the west ends
/// `(nw, sw)` of `[k]` or the top ends `(nw, ne)` of `[1/k]`.
pub fn atom_rep(conv: &CrossingConvention, atom: &Tangle, a: &Mat2<C64>, b: &Mat2<C64>) -> Option<TangleRep> {
    let (k, horizontal) = match atom {
        Tangle::Int(k) => (*k, true),
        Tangle::Vert(k) => (*k, false),
        _ => return None,
    };
    if k == 0 {
        return None;
    }
    let sign: i8 = if k > 0 { 1 } else { -1 };
    let mut crossings = Vec::new();
    let (mut x, mut y) = (a.clone(), b.clone());
    let mut last = None;
    for _ in 0..k.unsigned_abs() {
        if horizontal {
            let (ne, se) = conv.west_to_east(sign, &x, &y);
            crossings.push((sign, [x.clone(), ne.clone(), y.clone(), se.clone()]));
            (x, y) = (uinv(&ne), uinv(&se));
            last = Some((ne, se));
        } else {
            let (sw, se) = conv.top_to_bottom(sign, &x, &y);
            crossings.push((sign, [x.clone(), y.clone(), sw.clone(), se.clone()]));
            (x, y) = (uinv(&sw), uinv(&se));
            last = Some((sw, se));
        }
    }
    let (p, q) = last?;
    let (nw, ne, sw, se) = if horizontal {
        (a.clone(), p, b.clone(), q)
    } else {
        (a.clone(), b.clone(), p, q)
    };
    let ends = [nw.clone(), ne.clone(), sw.clone(), se.clone()];
    Some(TangleRep { nw, ne, sw, se, crossings, atoms: vec![(atom.clone(), ends)], glue_residual: 0.0 })
}

/// A unimodular `c` with `c b_i c⁻¹ = a_i` for every pair `(b_i, a_i)`,
/// with the largest defect. Solves the linear system `c b − a c = 0` by
/// pinning each entry of `c` in turn and keeping the best fit.
pub fn solve_conjugator(pairs: &[(Mat2<C64>, Mat2<C64>)]) -> Option<(Mat2<C64>, f64)> {
    // Rows of the map x ↦ (c b − a c) on c = [[x0, x1], [x2, x3]].
    let mut rows: Vec<[C64; 4]> = Vec::new();
    for (b, a) in pairs {
        let be = [[b.a11, b.a12], [b.a21, b.a22]];
        let ae = [[a.a11, a.a12], [a.a21, a.a22]];
        for i in 0..2 {
            for j in 0..2 {
                let mut row = [C64::zero(); 4];
                for k in 0..2 {
                    row[2 * i + k] += be[k][j];
                    row[2 * k + j] -= ae[i][k];
                }
                rows.push(row);
            }
        }
    }
    let mut best: Option<(Mat2<C64>, f64)> = None;
    for pin in 0..4 {
        let free: Vec<usize> = (0..4).filter(|&i| i != pin).collect();
        let mut nm = DMat::zeros(3);
        let mut rhs = [C64::zero(); 3];
        for row in &rows {
            for (ai, &fa) in free.iter().enumerate() {
                for (bi, &fb) in free.iter().enumerate() {
                    let v = nm.get(ai, bi) + row[fa].conj() * row[fb];
                    nm.set(ai, bi, v);
                }
                rhs[ai] -= row[fa].conj() * row[pin];
            }
        }
        let Some(sol) = nm.solve(&rhs, 1e-300) else { continue };
        let mut x = [C64::zero(); 4];
        x[pin] = C64::one();
        for (ai, &fa) in free.iter().enumerate() {
            x[fa] = sol[ai];
        }
        let c = Mat2::new(x[0], x[1], x[2], x[3]);
        let det = c.det();
        if det.norm() < 1e-12 || !det.norm().is_finite() {
            continue;
        }
        let c = c.scale(&det.sqrt().inv());
        let res = pairs
            .iter()
            .map(|(b, a)| conjugate(&c, b).max_rel_diff(a))
            .fold(0.0, f64::max);
        if best.as_ref().is_none_or(|(_, r)| res < *r) {
            best = Some((c, res));
        }
    }
    best
}

/// Glues `b` below (`V`) or to the right of (`H`) `a`, conjugating `b` so
/// the shared arcs match.
pub fn glue(dir: Dir, a: &TangleRep, b: &TangleRep) -> Option<TangleRep> {
    let targets = match dir {
        Dir::V => [(b.nw.clone(), uinv(&a.sw)), (b.ne.clone(), uinv(&a.se))],
        Dir::H => [(b.nw.clone(), uinv(&a.ne)), (b.sw.clone(), uinv(&a.se))],
    };
    let (c, res) = solve_conjugator(&targets)?;
    let b = b.conjugated(&c);
    let (nw, ne, sw, se) = match dir {
        Dir::V => (a.nw.clone(), a.ne.clone(), b.sw.clone(), b.se.clone()),
        Dir::H => (a.nw.clone(), b.ne.clone(), a.sw.clone(), b.se.clone()),
    };
    let mut crossings = a.crossings.clone();
    crossings.extend(b.crossings.iter().cloned());
    let mut atoms = a.atoms.clone();
    atoms.extend(b.atoms.iter().cloned());
    Some(TangleRep {
        nw,
        ne,
        sw,
        se,
        crossings,
        atoms,
        glue_residual: a.glue_residual.max(b.glue_residual).max(res),
    })
}

/// Coordinate shared across a gluing: `u` for `∗v`, `u̇` for `∗h`.
fn shared(dir: Dir, r: &TangleRep) -> C64 {
    let c = r.coords();
    match dir {
        Dir::V => c.u,
        Dir::H => c.udot,
    }
}

/// The same coordinate read from the ends the second factor exposes to the
/// first: `tr(nw ne)` for `∗v`, `tr(nw sw)` for `∗h`.
fn shared_top(dir: Dir, r: &TangleRep) -> C64 {
    match dir {
        Dir::V => (&r.nw * &r.ne).tr(),
        Dir::H => (&r.nw * &r.sw).tr(),
    }
}

#[derive(Debug)]
enum PlanNode {
    Atom {
        atom: Tangle,
        shape: PairShape,
    },
    Comp {
        dir: Dir,
        left: Box<PlanNode>,
        right: Box<PlanNode>,
        starts: Vec<C64>,
        warm: Cell<Option<C64>>,
    },
}

/// Bottom-up construction of one-parameter families of tangle
/// representations at a fixed meridian trace. The parameter is the own
/// coordinate of the leftmost atom; every other atom is solved so that the
/// shared coordinates match at each gluing.
#[derive(Debug)]
pub struct Plan {
    root: PlanNode,
    pub t: C64,
    pub conv: CrossingConvention,
}

const INNER_STARTS: usize = 8;

impl Plan {
    pub fn new(tangle: &Tangle, t: C64, rng: &mut OracleRng) -> Plan {
        fn build(t: &Tangle, rng: &mut OracleRng) -> PlanNode {
            match t.children() {
                Some((dir, a, b)) => {
                    let left = Box::new(build(a, rng));
                    let right = Box::new(build(b, rng));
                    let starts = (0..INNER_STARTS).map(|_| random_polar(rng, 0.3, 3.0)).collect();
                    PlanNode::Comp { dir, left, right, starts, warm: Cell::new(None) }
                }
                None => PlanNode::Atom { atom: t.clone(), shape: PairShape::sample(rng) },
            }
        }
        Plan { root: build(&tangle.expand(), rng), t, conv: FROZEN }
    }

    pub fn family(&self, p: C64) -> Option<TangleRep> {
        self.eval(&self.root, p)
    }

    fn eval(&self, node: &PlanNode, p: C64) -> Option<TangleRep> {
        match node {
            PlanNode::Atom { atom, shape } => {
                let (a, b) = pair_from_shape(self.t, p, shape)?;
                atom_rep(&self.conv, atom, &a, &b)
            }
            PlanNode::Comp { dir, left, right, starts, warm } => {
                let a = self.eval(left, p)?;
                let target = shared(*dir, &a);
                let scale = target.norm().max(1.0);
                let opts = LmOptions { max_iter: 60, tol: 1e-13 * scale, step: 1e-7 };
                let f = |x: &[C64]| {
                    let b = self.eval(right, x[0])?;
                    Some(vec![shared_top(*dir, &b) - target])
                };
                let mut found = None;
                for s in warm.get().into_iter().chain(starts.iter().copied()) {
                    let res = levenberg_marquardt(f, &[s], opts);
                    if res.residual <= 1e-11 * scale {
                        found = Some(res.x[0]);
                        break;
                    }
                }
                let q = found?;
                warm.set(Some(q));
                let b = self.eval(right, q)?;
                glue(*dir, &a, &b)
            }
        }
    }
}

/// The product that must be the identity for the closure: `x_ne x_se` for
/// `D`, `x_nw x_ne` for `N`.
pub fn closure_defect(kind: ClosureKind, r: &TangleRep) -> Mat2<C64> {
    let m = match kind {
        ClosureKind::D => &r.ne * &r.se,
        ClosureKind::N => &r.nw * &r.ne,
    };
    &m - &Mat2::identity()
}

/// Solves the family parameter so that the closure relation holds.
pub fn closure_rep(plan: &Plan, kind: ClosureKind, rng: &mut OracleRng, attempts: usize) -> Option<TangleRep> {
    let f = |x: &[C64]| {
        let r = plan.family(x[0])?;
        let d = closure_defect(kind, &r);
        Some(vec![d.a11, d.a12, d.a21, d.a22])
    };
    let opts = LmOptions { max_iter: 80, tol: 1e-13, step: 1e-7 };
    for _ in 0..attempts {
        let start = random_polar(rng, 0.3, 3.0);
        let res = levenberg_marquardt(f, &[start], opts);
        if res.residual <= 1e-11 {
            let rep = plan.family(res.x[0])?;
            if closure_defect(kind, &rep).max_abs() <= 1e-10 {
                return Some(rep);
            }
        }
    }
    None
}

/// Builds a random representation of `tangle` at trace `t`.
pub fn build_tangle_rep(tangle: &Tangle, t: C64, rng: &mut OracleRng) -> Option<TangleRep> {
    let plan = Plan::new(tangle, t, rng);
    for _ in 0..8 {
        let p = random_polar(rng, 0.3, 3.0);
        if let Some(r) = plan.family(p) {
            return Some(r);
        }
    }
    None
}

/// Eigenvector search: some eigenvector of `a1` is also one of `a2`.
pub fn shares_eigenvector(a1: &Mat2<C64>, a2: &Mat2<C64>, tol: f64) -> bool {
    let t = a1.tr();
    let disc = (t * t - 4.0).sqrt();
    for ev in [(t + disc) / 2.0, (t - disc) / 2.0] {
        let m = a1 - &Mat2::scalar(ev);
        // Kernel of m: orthogonal to its dominant row.
        let (r1, r2) = ((m.a11, m.a12), (m.a21, m.a22));
        let row = if r1.0.norm_sqr() + r1.1.norm_sqr() >= r2.0.norm_sqr() + r2.1.norm_sqr() { r1 } else { r2 };
        let v = if row.0.norm() + row.1.norm() < 1e-300 {
            (C64::one(), C64::zero())
        } else {
            (row.1, -row.0)
        };
        let w = (a2.a11 * v.0 + a2.a12 * v.1, a2.a21 * v.0 + a2.a22 * v.1);
        let cross = v.0 * w.1 - v.1 * w.0;
        let scale = (v.0.norm() + v.1.norm()) * (w.0.norm() + w.1.norm());
        if cross.norm() <= tol * scale.max(1e-300) {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests;
