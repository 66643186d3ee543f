//! Trace coordinates `(u, u̇, ǔ)` of tangles as exact rational functions:
//! base twists, composition, closure equations and presentations.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::mat2::C64;
use crate::ratfun::{MultiPoly, RatFun, RatFunError, Registry};
use crate::tangle::{component_count, Closure, ClosureKind, Dir, Tangle};

/// Registry index of the meridian trace `t`.
pub const T: usize = 0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InvariantError {
    #[error("twist parameter must be nonzero")]
    ZeroTwist,
    #[error("{0}")]
    Structure(String),
    #[error("closure has {0} components; use the link engine or the single-trace variant")]
    WrongEngine(usize),
    #[error("substitution would produce up to {0} terms, over the session budget")]
    Budget(usize),
    #[error(transparent)]
    Arithmetic(#[from] RatFunError),
}

/// Minimal field interface so the composition rule runs both on exact
/// rational functions and on complex numbers.
pub trait Field: Clone {
    fn from_i64(n: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Option<Self>;
}

impl Field for RatFun {
    fn from_i64(n: i64) -> Self {
        RatFun::from_i64(n)
    }
    fn add(&self, o: &Self) -> Self {
        RatFun::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        RatFun::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        RatFun::mul(self, o)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        RatFun::div(self, o).ok()
    }
}

impl Field for C64 {
    fn from_i64(n: i64) -> Self {
        C64::new(n as f64, 0.0)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Option<Self> {
        if o.norm() == 0.0 {
            None
        } else {
            Some(self / o)
        }
    }
}

/// The composition rule: returns `(f_a, g_a)` of `(b1, c1; b2, c2)`, with
/// `t2` the squared meridian trace. `None` when `a = 2` or `a = t² − 2`.
pub fn fg<F: Field>(t2: &F, a: &F, b1: &F, c1: &F, b2: &F, c2: &F) -> Option<(F, F)> {
    let two = F::from_i64(2);
    let ap2 = a.add(&two);
    let den = two.mul(&ap2.sub(t2));
    let two_t2 = two.mul(t2);
    let f_num = ap2
        .mul(b1)
        .mul(b2)
        .add(&two_t2.mul(&two.sub(b1).sub(b2)))
        .add(&c1.mul(c2).div(&a.sub(&two))?);
    let g_num = ap2.mul(&b1.mul(c2).add(&b2.mul(c1))).sub(&two_t2.mul(&c1.add(c2)));
    Some((f_num.div(&den)?, g_num.div(&den)?))
}

/// `ω_n(x)`, `θ_n(x)` as polynomials.
pub fn cheb_poly(n: i64, x: &MultiPoly) -> (MultiPoly, MultiPoly) {
    let m = n.unsigned_abs();
    let (mut w0, mut w1) = (MultiPoly::zero(), MultiPoly::one());
    let (mut h0, mut h1) = (MultiPoly::from_i64(2), x.clone());
    if m == 0 {
        return (w0, h0);
    }
    for _ in 1..m {
        let w2 = &(x * &w1) - &w0;
        w0 = core::mem::replace(&mut w1, w2);
        let h2 = &(x * &h1) - &h0;
        h0 = core::mem::replace(&mut h1, h2);
    }
    (if n < 0 { -&w1 } else { w1 }, h1)
}

fn t_sq() -> MultiPoly {
    MultiPoly::var(T).pow(2)
}

/// `α_k` as a polynomial in `t` (index 0) and `r` (index 1): the exact
/// quotient of `2t² + (r+2−t²) θ_k(−r)` by `r + 2`.
pub fn alpha_poly(k: i64) -> MultiPoly {
    let r = MultiPoly::var(1);
    let (_, theta) = cheb_poly(k, &-&r);
    let shifted = &(&r + &MultiPoly::from_i64(2)) - &t_sq();
    let num = &(&t_sq() * &MultiPoly::from_i64(2)) + &(&shifted * &theta);
    num.div_exact(&(&r + &MultiPoly::from_i64(2)))
        .expect("r + 2 divides the alpha numerator for every k")
}

/// `(2 − r)(r + 2 − t²) ω_k(−r)` in `t`, `r`.
pub fn ucheck_poly(k: i64) -> MultiPoly {
    let r = MultiPoly::var(1);
    let (omega, _) = cheb_poly(k, &-&r);
    let a = &MultiPoly::from_i64(2) - &r;
    let b = &(&r + &MultiPoly::from_i64(2)) - &t_sq();
    &(&a * &b) * &omega
}

fn subst_r(p: &MultiPoly, r: &RatFun) -> RatFun {
    RatFun::from(p.clone()).substitute(1, r).expect("polynomial substitution")
}

/// `α_k(r)`.
pub fn alpha(k: i64, r: &RatFun) -> RatFun {
    subst_r(&alpha_poly(k), r)
}

/// Per-atom variable bookkeeping.
#[derive(Debug, Clone)]
pub struct Session {
    pub registry: Registry,
    /// Refuse eliminations whose estimated size exceeds this many terms.
    pub term_budget: Option<usize>,
    /// Surviving variable -> labels of the atoms merged into it.
    classes: BTreeMap<usize, BTreeSet<usize>>,
    home: BTreeMap<usize, (usize, Tangle)>,
}

impl Session {
    pub fn new() -> Self {
        Session {
            registry: Registry::with_names(["t"]),
            term_budget: None,
            classes: BTreeMap::new(),
            home: BTreeMap::new(),
        }
    }

    fn fresh(&mut self, label: usize, atom: &Tangle) -> usize {
        let v = self.registry.intern(&format!("a{label}"));
        self.classes.insert(v, BTreeSet::from([label]));
        self.home.insert(v, (label, atom.clone()));
        v
    }

    pub fn class_labels(&self, var: usize) -> Option<&BTreeSet<usize>> {
        self.classes.get(&var)
    }

    pub fn home_atom(&self, var: usize) -> Option<&(usize, Tangle)> {
        self.home.get(&var)
    }
}

impl Default for Session {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub poly: MultiPoly,
    pub note: String,
}

#[derive(Debug, Clone)]
pub struct InvariantData {
    pub vars: BTreeSet<usize>,
    pub u: RatFun,
    pub udot: RatFun,
    pub ucheck: RatFun,
    pub constraints: Vec<Constraint>,
    pub exclusions: Vec<MultiPoly>,
}

pub(crate) fn push_exclusion(list: &mut Vec<MultiPoly>, p: &MultiPoly) {
    if p.is_constant() {
        return;
    }
    let n = p.normalized();
    if !list.contains(&n) {
        list.push(n);
    }
}

fn push_rat_exclusions(list: &mut Vec<MultiPoly>, r: &RatFun) {
    for (f, _) in r.den_factors() {
        push_exclusion(list, f);
    }
}

/// Divides out every exclusion factor and normalizes.
pub(crate) fn saturate(p: &MultiPoly, exclusions: &[MultiPoly]) -> MultiPoly {
    let mut p = p.normalized();
    if p.is_zero() {
        return p;
    }
    for e in exclusions {
        while let Some(q) = p.div_exact(e) {
            if q.is_constant() {
                // p is the excluded factor itself; keep it visible.
                break;
            }
            p = q.normalized();
        }
    }
    p
}

impl InvariantData {
    fn substitution_cost(&self, var: usize, g: &RatFun) -> usize {
        let polys = self.constraints.iter().map(|c| &c.poly).chain(&self.exclusions);
        let base = [&self.u, &self.udot, &self.ucheck]
            .iter()
            .fold(0usize, |acc, f| acc.saturating_add(f.substitution_cost(var, g)));
        polys.fold(base, |acc, p| acc.saturating_add(RatFun::from(p.clone()).substitution_cost(var, g)))
    }

    fn substitute(&self, var: usize, g: &RatFun) -> Result<InvariantData, RatFunError> {
        let sub_poly = |p: &MultiPoly| -> Result<RatFun, RatFunError> {
            RatFun::from(p.clone()).substitute(var, g)
        };
        let mut out = InvariantData {
            vars: self.vars.iter().copied().filter(|&v| v != var).collect(),
            u: self.u.substitute(var, g)?,
            udot: self.udot.substitute(var, g)?,
            ucheck: self.ucheck.substitute(var, g)?,
            constraints: Vec::new(),
            exclusions: Vec::new(),
        };
        out.vars.extend(g.vars().into_iter().filter(|&v| v != T));
        for c in &self.constraints {
            let r = sub_poly(&c.poly)?;
            push_rat_exclusions(&mut out.exclusions, &r);
            out.constraints.push(Constraint { poly: r.numer().normalized(), note: c.note.clone() });
        }
        for e in &self.exclusions {
            let r = sub_poly(e)?;
            push_rat_exclusions(&mut out.exclusions, &r);
            push_exclusion(&mut out.exclusions, r.numer());
        }
        for x in [&out.u.clone(), &out.udot.clone(), &out.ucheck.clone()] {
            push_rat_exclusions(&mut out.exclusions, x);
        }
        Ok(out)
    }

    /// `ǔ² − (u−2)(u̇−2)((u+2)(u̇+2)−4t²)`.
    pub fn identity3_residual(&self) -> RatFun {
        identity3_residual(&self.u, &self.udot, &self.ucheck)
    }
}

pub fn identity3_residual(u: &RatFun, udot: &RatFun, ucheck: &RatFun) -> RatFun {
    let two = RatFun::from_i64(2);
    let t2 = RatFun::from(t_sq());
    let lhs = ucheck.mul(ucheck);
    let prod = u.add(&two).mul(&udot.add(&two)).sub(&t2.scale(&crate::ratfun::qi(4)));
    let rhs = u.sub(&two).mul(&udot.sub(&two)).mul(&prod);
    lhs.sub(&rhs)
}

/// `(ù, ú)` from `ù + ú + u u̇ = 2t²` and `ǔ = ù − ú`.
pub fn recover_grave_acute(d: &InvariantData) -> (RatFun, RatFun) {
    let t2 = RatFun::from(t_sq());
    let s = t2.scale(&crate::ratfun::qi(2)).sub(&d.u.mul(&d.udot));
    let half = crate::ratfun::q(1, 2);
    (s.add(&d.ucheck).scale(&half), s.sub(&d.ucheck).scale(&half))
}

/// Base data of `[k]` or `[1/k]` with fresh variable `var`.
pub fn base_invariants_with(atom: &Tangle, var: usize) -> Result<InvariantData, InvariantError> {
    let (k, vertical) = match atom {
        Tangle::Int(k) => (*k, false),
        Tangle::Vert(k) => (*k, true),
        _ => return Err(InvariantError::Structure(format!("{atom} is not a twist"))),
    };
    if k == 0 {
        return Err(InvariantError::ZeroTwist);
    }
    let r = RatFun::var(var);
    let other = alpha(k, &r);
    let ucheck = subst_r(&ucheck_poly(k), &r);
    let (u, udot) = if vertical { (r, other) } else { (other, r) };
    Ok(InvariantData {
        vars: BTreeSet::from([var]),
        u,
        udot,
        ucheck,
        constraints: Vec::new(),
        exclusions: Vec::new(),
    })
}

/// Base data with a fresh variable allocated in `session`.
pub fn base_invariants(session: &mut Session, label: usize, atom: &Tangle) -> Result<InvariantData, InvariantError> {
    let v = session.fresh(label, atom);
    base_invariants_with(atom, v)
}

fn shared(dir: Dir, d: &InvariantData) -> &RatFun {
    match dir {
        Dir::V => &d.u,
        Dir::H => &d.udot,
    }
}

/// Result of composing two pieces, with both children rewritten onto the
/// unified shared coordinate.
#[derive(Debug, Clone)]
pub struct Composed {
    pub data: InvariantData,
    pub left: InvariantData,
    pub right: InvariantData,
}

/// `T1 *v T2` shares `u` and yields `(u̇, ǔ) = (f_u, g_u)` of `(u̇_i, ǔ_i)`;
/// `T1 *h T2` shares `u̇` and yields `(u, ǔ) = (f_u̇, g_u̇)` of `(u_i, ǔ_i)`.
pub fn compose(
    session: &mut Session,
    dir: Dir,
    i1: &InvariantData,
    i2: &InvariantData,
) -> Result<Composed, InvariantError> {
    let (s1, s2) = (shared(dir, i1).clone(), shared(dir, i2).clone());
    let mut left = i1.clone();
    let mut right = i2.clone();
    let mut constraints = Vec::new();
    let mut exclusions = Vec::new();
    let within = |d: &InvariantData, x: usize, g: &RatFun| match session.term_budget {
        Some(b) if d.substitution_cost(x, g) > b => Err(InvariantError::Budget(d.substitution_cost(x, g))),
        _ => Ok(()),
    };
    let rep = if let Some(x) = s2.as_var().filter(|&x| x != T) {
        within(&right, x, &s1)?;
        if let Some(y) = s1.as_var().filter(|&y| y != T) {
            let labels = session.classes.remove(&x).unwrap_or_default();
            session.classes.entry(y).or_default().extend(labels);
        } else {
            session.classes.remove(&x);
        }
        right = right.substitute(x, &s1)?;
        s1
    } else if let Some(x) = s1.as_var().filter(|&x| x != T) {
        within(&left, x, &s2)?;
        session.classes.remove(&x);
        left = left.substitute(x, &s2)?;
        s2
    } else {
        let diff = s1.sub(&s2);
        push_rat_exclusions(&mut exclusions, &diff);
        let what = match dir {
            Dir::V => "u",
            Dir::H => "u-dot",
        };
        constraints.push(Constraint {
            poly: diff.numer().normalized(),
            note: format!("shared {what} of the two parts of a *{} composition", dir_char(dir)),
        });
        let (c1, c2) = (s1.complexity(), s2.complexity());
        match c1.cmp(&c2) {
            core::cmp::Ordering::Less => s1,
            core::cmp::Ordering::Greater => s2,
            core::cmp::Ordering::Equal => s1.add(&s2).scale(&crate::ratfun::q(1, 2)),
        }
    };
    let (b1, c1, b2, c2) = match dir {
        Dir::V => (&left.udot, &left.ucheck, &right.udot, &right.ucheck),
        Dir::H => (&left.u, &left.ucheck, &right.u, &right.ucheck),
    };
    if let Some(b) = session.term_budget {
        let est = rep.size().saturating_mul(b1.size() + c1.size()).saturating_mul(b2.size() + c2.size());
        if est > b {
            return Err(InvariantError::Budget(est));
        }
    }
    let t2 = RatFun::from(t_sq());
    let two = RatFun::from_i64(2);
    let (f, g) = fg(&t2, &rep, b1, c1, b2, c2)
        .ok_or_else(|| InvariantError::Structure("shared coordinate is identically 2 or t^2-2".into()))?;
    push_exclusion(&mut exclusions, rep.sub(&two).numer());
    push_exclusion(&mut exclusions, rep.add(&two).sub(&t2).numer());
    push_rat_exclusions(&mut exclusions, &rep);
    push_rat_exclusions(&mut exclusions, &f);
    push_rat_exclusions(&mut exclusions, &g);
    for src in [&left, &right] {
        for e in &src.exclusions {
            push_exclusion(&mut exclusions, e);
        }
    }
    let mut all_constraints = left.constraints.clone();
    all_constraints.extend(right.constraints.iter().cloned());
    all_constraints.extend(constraints);
    let mut vars = left.vars.clone();
    vars.extend(right.vars.iter().copied());
    let (u, udot) = match dir {
        Dir::V => (rep, f),
        Dir::H => (f, rep),
    };
    let data = InvariantData { vars, u, udot, ucheck: g, constraints: all_constraints, exclusions };
    Ok(Composed { data, left, right })
}

fn dir_char(d: Dir) -> char {
    match d {
        Dir::V => 'v',
        Dir::H => 'h',
    }
}

#[derive(Debug, Clone)]
pub struct NodeRecord {
    pub expr: String,
    pub data: InvariantData,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub session: Session,
    pub root: InvariantData,
    /// Every subtangle in post-order, as computed before unification with
    /// its sibling.
    pub nodes: Vec<NodeRecord>,
    /// The top-level composition with unified children, if any.
    pub top: Option<(Dir, Composed)>,
}

/// Runs the calculus bottom-up. `labels[i]` names the i-th atom of the
/// expanded tree; it defaults to `i`.
pub fn analyze(t: &Tangle, labels: Option<&[usize]>) -> Result<Analysis, InvariantError> {
    analyze_in(Session::new(), t, labels)
}

/// `analyze` in a caller-configured session, e.g. one with a term budget.
pub fn analyze_in(mut session: Session, t: &Tangle, labels: Option<&[usize]>) -> Result<Analysis, InvariantError> {
    let tree = t.expand();
    let n_atoms = tree.atoms().len();
    let default: Vec<usize> = (0..n_atoms).collect();
    let labels = labels.unwrap_or(&default);
    if labels.len() != n_atoms {
        return Err(InvariantError::Structure(format!(
            "{} labels for {} atoms",
            labels.len(),
            n_atoms
        )));
    }
    let mut nodes = Vec::new();
    let mut next = 0usize;
    fn walk(
        t: &Tangle,
        s: &mut Session,
        labels: &[usize],
        next: &mut usize,
        nodes: &mut Vec<NodeRecord>,
        top: bool,
    ) -> Result<(InvariantData, Option<(Dir, Composed)>), InvariantError> {
        let out = match t.children() {
            None => {
                let l = labels[*next];
                *next += 1;
                (base_invariants(s, l, t)?, None)
            }
            Some((dir, a, b)) => {
                let (ia, _) = walk(a, s, labels, next, nodes, false)?;
                let (ib, _) = walk(b, s, labels, next, nodes, false)?;
                let c = compose(s, dir, &ia, &ib)?;
                let d = c.data.clone();
                (d, if top { Some((dir, c)) } else { None })
            }
        };
        nodes.push(NodeRecord { expr: t.to_string(), data: out.0.clone() });
        Ok(out)
    }
    let (root, top) = walk(&tree, &mut session, labels, &mut next, &mut nodes, true)?;
    Ok(Analysis { session, root, nodes, top })
}

/// Emitted character-variety data.
#[derive(Debug, Clone, PartialEq)]
pub struct Presentation {
    pub registry: Registry,
    pub traces: Vec<String>,
    pub equations: Vec<MultiPoly>,
    pub notes: Vec<String>,
    pub exclusions: Vec<MultiPoly>,
    pub var_sources: Vec<String>,
    /// Atom labels merged into each non-trace variable, in variable order.
    pub var_labels: Vec<Vec<usize>>,
}

impl Presentation {
    pub fn variables(&self) -> &[String] {
        self.registry.names()
    }

    pub fn render_text(&self) -> String {
        let names = self.registry.names();
        let mut s = String::new();
        s.push_str(&format!("variables: {}\n", names.join(", ")));
        s.push_str("equations:\n");
        for (e, n) in self.equations.iter().zip(&self.notes) {
            s.push_str(&format!("  0 = {}    # {}\n", e.display_with(names), n));
        }
        s.push_str("exclusions:\n");
        for e in &self.exclusions {
            s.push_str(&format!("  0 != {}\n", e.display_with(names)));
        }
        s
    }

    /// Equations as a sorted set, for order-insensitive comparison.
    pub fn equation_set(&self) -> Vec<MultiPoly> {
        let mut v = self.equations.clone();
        v.sort();
        v.dedup();
        v
    }
}

/// Closure equations for a knot: requires one component.
pub fn closure_equations(c: &Closure) -> Result<Presentation, InvariantError> {
    let n = component_count(c);
    if n != 1 {
        return Err(InvariantError::WrongEngine(n));
    }
    closure_equations_single_trace(c, None)
}

/// Same calculus without the component check: every component is given
/// the common meridian trace `t`.
pub fn closure_equations_single_trace(c: &Closure, labels: Option<&[usize]>) -> Result<Presentation, InvariantError> {
    let a = analyze(&c.body, labels)?;
    closure_from_analysis(c.kind, &a)
}

pub fn closure_from_analysis(kind: ClosureKind, a: &Analysis) -> Result<Presentation, InvariantError> {
    let (dir, comp) = a.top.as_ref().ok_or_else(|| {
        InvariantError::Structure("closure body must be a composition; re-express the tangle".into())
    })?;
    let (l, r) = (&comp.left, &comp.right);
    let (first, name) = match (kind, dir) {
        (ClosureKind::D, Dir::V) => (l.udot.sub(&r.udot), "u-dot"),
        (ClosureKind::N, Dir::H) => (l.u.sub(&r.u), "u"),
        (ClosureKind::D, Dir::H) => {
            return Err(InvariantError::Structure(
                "D closure needs a top-level *v composition; rotate the expression by hand".into(),
            ))
        }
        (ClosureKind::N, Dir::V) => {
            return Err(InvariantError::Structure(
                "N closure needs a top-level *h composition; rotate the expression by hand".into(),
            ))
        }
    };
    let second = l.ucheck.add(&r.ucheck);
    let mut exclusions = comp.data.exclusions.clone();
    push_rat_exclusions(&mut exclusions, &first);
    push_rat_exclusions(&mut exclusions, &second);
    let mut eqs: Vec<(MultiPoly, String)> = Vec::new();
    for c in &comp.data.constraints {
        eqs.push((c.poly.clone(), c.note.clone()));
    }
    eqs.push((first.numer().clone(), format!("closure: {name} of both parts agree")));
    eqs.push((second.numer().clone(), "closure: u-check of both parts cancel".into()));
    build_presentation(&a.session, eqs, exclusions)
}

fn build_presentation(
    session: &Session,
    eqs: Vec<(MultiPoly, String)>,
    exclusions: Vec<MultiPoly>,
) -> Result<Presentation, InvariantError> {
    let mut used = BTreeSet::new();
    for (e, _) in &eqs {
        used.extend(e.vars());
    }
    for e in &exclusions {
        used.extend(e.vars());
    }
    used.remove(&T);
    let mut keyed: Vec<(usize, usize)> = used
        .iter()
        .map(|&v| {
            let key = session.class_labels(v).and_then(|s| s.iter().next().copied()).unwrap_or(usize::MAX);
            (key, v)
        })
        .collect();
    keyed.sort();
    let mut map = BTreeMap::new();
    map.insert(T, 0usize);
    let mut registry = Registry::with_names(["t"]);
    let mut var_sources = Vec::new();
    let mut var_labels = Vec::new();
    for (i, (_, v)) in keyed.iter().enumerate() {
        var_labels.push(session.class_labels(*v).map(|s| s.iter().copied().collect()).unwrap_or_default());
        map.insert(*v, i + 1);
        registry.intern(&format!("r{}", i + 1));
        let src = match (session.class_labels(*v), session.home_atom(*v)) {
            (Some(ls), Some((_, atom))) => {
                let ls: Vec<String> = ls.iter().map(|l| l.to_string()).collect();
                format!("atoms {{{}}}, carried by {}", ls.join(","), atom)
            }
            _ => "derived".to_string(),
        };
        var_sources.push(src);
    }
    let ren = |p: &MultiPoly| p.rename(|i| map[&i]);
    let exclusions: Vec<MultiPoly> = {
        let mut v: Vec<MultiPoly> = Vec::new();
        for e in &exclusions {
            push_exclusion(&mut v, &ren(e));
        }
        v.sort();
        v
    };
    let mut equations = Vec::new();
    let mut notes = Vec::new();
    for (e, n) in eqs {
        let p = saturate(&ren(&e), &exclusions);
        if p.is_zero() {
            continue;
        }
        if let Some(i) = equations.iter().position(|q: &MultiPoly| *q == p) {
            notes[i] = format!("{}; {}", notes[i], n);
            continue;
        }
        equations.push(p);
        notes.push(n);
    }
    Ok(Presentation {
        registry,
        traces: alloc::vec!["t".into()],
        equations,
        notes,
        exclusions,
        var_sources,
        var_labels,
    })
}

/// Labels of the atoms after swapping the children of composition node
/// `index`, so the swapped tree's variables can be named consistently.
pub fn swapped_labels(t: &Tangle, index: usize) -> Option<(Tangle, Vec<usize>)> {
    let tree = t.expand();
    let swapped = tree.swap_at(index)?;
    fn label_leaves(t: &Tangle, next: &mut usize) -> LTree {
        match t.children() {
            None => {
                *next += 1;
                LTree::Leaf(*next - 1)
            }
            Some((d, a, b)) => {
                let la = label_leaves(a, next);
                let lb = label_leaves(b, next);
                LTree::Node(d, alloc::boxed::Box::new(la), alloc::boxed::Box::new(lb))
            }
        }
    }
    let mut n = 0;
    let lt = label_leaves(&tree, &mut n);
    let mut i = index;
    let lt = lt.swap_at(&mut i)?;
    let mut out = Vec::new();
    lt.leaves(&mut out);
    Some((swapped, out))
}

enum LTree {
    Leaf(usize),
    Node(Dir, alloc::boxed::Box<LTree>, alloc::boxed::Box<LTree>),
}

impl LTree {
    fn count(&self) -> usize {
        match self {
            LTree::Leaf(_) => 0,
            LTree::Node(_, a, b) => 1 + a.count() + b.count(),
        }
    }

    fn swap_at(self, idx: &mut usize) -> Option<LTree> {
        match self {
            LTree::Leaf(_) => None,
            LTree::Node(d, a, b) => {
                if *idx == 0 {
                    return Some(LTree::Node(d, b, a));
                }
                *idx -= 1;
                let na = a.count();
                if *idx < na {
                    let a2 = a.swap_at(idx)?;
                    return Some(LTree::Node(d, alloc::boxed::Box::new(a2), b));
                }
                *idx -= na;
                let b2 = b.swap_at(idx)?;
                Some(LTree::Node(d, a, alloc::boxed::Box::new(b2)))
            }
        }
    }

    fn leaves(&self, out: &mut Vec<usize>) {
        match self {
            LTree::Leaf(l) => out.push(*l),
            LTree::Node(_, a, b) => {
                a.leaves(out);
                b.leaves(out);
            }
        }
    }
}
