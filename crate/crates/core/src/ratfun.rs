//! Sparse multivariate polynomials and rational functions over the rationals.
//!
//! Fractions keep their denominator as a list of primitive factors. There is
//! no polynomial gcd: cancellation is attempted by trial division against the
//! tracked factors only.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::mat2::C64;

/// Below this magnitude a denominator value counts as ill-conditioned.
pub const DEN_REJECT: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RatFunError {
    #[error("division by the zero function")]
    DivisionByZero,
    #[error("denominator {value:e} below conditioning threshold")]
    Conditioning { value: f64 },
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("variable index {0} has no value")]
    Unassigned(usize),
}

/// Append-only variable names; indices are never reused.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Registry {
    names: Vec<String>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_names<I: IntoIterator<Item = S>, S: Into<String>>(names: I) -> Self {
        let mut r = Self::new();
        for n in names {
            r.intern(&n.into());
        }
        r
    }

    pub fn intern(&mut self, name: &str) -> usize {
        if let Some(i) = self.index(name) {
            return i;
        }
        self.names.push(name.to_string());
        self.names.len() - 1
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Exponent vector with trailing zeros trimmed. Ordered graded
/// lexicographically, earlier variables dominating.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(i: usize, e: u32) -> Self {
        let mut v = vec![0; i + 1];
        v[i] = e;
        Monomial::new(v)
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn exp(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, o: &Monomial) -> Monomial {
        let n = self.0.len().max(o.0.len());
        Monomial::new((0..n).map(|i| self.exp(i) + o.exp(i)).collect())
    }

    pub fn div(&self, o: &Monomial) -> Option<Monomial> {
        let n = self.0.len().max(o.0.len());
        let mut v = Vec::with_capacity(n);
        for i in 0..n {
            v.push(self.exp(i).checked_sub(o.exp(i))?);
        }
        Some(Monomial::new(v))
    }

    fn without(&self, var: usize) -> Monomial {
        let mut v = self.0.clone();
        if var < v.len() {
            v[var] = 0;
        }
        Monomial::new(v)
    }
}

impl Ord for Monomial {
    fn cmp(&self, o: &Self) -> Ordering {
        self.degree().cmp(&o.degree()).then_with(|| {
            let n = self.0.len().max(o.0.len());
            for i in 0..n {
                match self.exp(i).cmp(&o.exp(i)) {
                    Ordering::Equal => continue,
                    ord => return ord,
                }
            }
            Ordering::Equal
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

pub fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

pub fn qi(p: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(p))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiPoly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl PartialOrd for MultiPoly {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for MultiPoly {
    /// A total order on the canonical form, highest terms compared first.
    fn cmp(&self, o: &Self) -> Ordering {
        let mut a = self.terms.iter().rev();
        let mut b = o.terms.iter().rev();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some((ma, ca)), Some((mb, cb))) => {
                    let ord = ma.cmp(mb).then_with(|| ca.cmp(cb));
                    if ord != Ordering::Equal {
                        return ord;
                    }
                }
            }
        }
    }
}

impl MultiPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn from_i64(n: i64) -> Self {
        Self::constant(qi(n))
    }

    pub fn var(i: usize) -> Self {
        Self::term(BigRational::one(), Monomial::var(i, 1))
    }

    pub fn term(c: BigRational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        MultiPoly { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, BigRational)>>(it: I) -> Self {
        let mut p = MultiPoly::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    /// `Some(i)` if the polynomial is exactly the variable `x_i`.
    pub fn as_var(&self) -> Option<usize> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next()?;
        if !c.is_one() || m.degree() != 1 {
            return None;
        }
        m.0.iter().position(|&e| e == 1)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.degree()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|m| m.exp(var)).max().unwrap_or(0)
    }

    pub fn vars(&self) -> BTreeSet<usize> {
        let mut s = BTreeSet::new();
        for m in self.terms.keys() {
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    s.insert(i);
                }
            }
        }
        s
    }

    pub fn contains_var(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.exp(var) > 0)
    }

    pub fn leading(&self) -> Option<(&Monomial, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        MultiPoly {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        MultiPoly {
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Coefficients of `x_var^k`, `k = 0..=deg`.
    pub fn coeffs_in(&self, var: usize) -> Vec<MultiPoly> {
        let deg = self.degree_in(var) as usize;
        let mut out = vec![MultiPoly::zero(); deg + 1];
        for (m, c) in &self.terms {
            out[m.exp(var) as usize].add_term(m.without(var), c.clone());
        }
        out
    }

    /// Substitutes a polynomial for `x_var`.
    pub fn substitute(&self, var: usize, g: &MultiPoly) -> MultiPoly {
        if !self.contains_var(var) {
            return self.clone();
        }
        let cs = self.coeffs_in(var);
        let mut acc = MultiPoly::zero();
        for c in cs.iter().rev() {
            acc = &(&acc * g) + c;
        }
        acc
    }

    /// Exact quotient, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &MultiPoly) -> Option<MultiPoly> {
        let (ld, lc) = d.leading()?;
        let (ld, lc) = (ld.clone(), lc.clone());
        let mut p = self.clone();
        let mut quo = MultiPoly::zero();
        while let Some((lp, cp)) = p.leading() {
            let m = lp.div(&ld)?;
            let c = cp / &lc;
            p = &p - &d.mul_term(&m, &c);
            quo.add_term(m, c);
        }
        Some(quo)
    }

    /// Remainder on division by `d` as a polynomial in `x_var`, where the
    /// leading coefficient of `d` in `x_var` is a nonzero rational.
    pub fn rem_by(&self, var: usize, d: &MultiPoly) -> Option<MultiPoly> {
        let dd = d.degree_in(var);
        let lc = d.coeffs_in(var).pop()?.as_constant()?;
        if lc.is_zero() {
            return None;
        }
        let mut p = self.clone();
        loop {
            let dp = p.degree_in(var);
            if p.is_zero() || dp < dd {
                return Some(p);
            }
            let top = p.coeffs_in(var).pop().unwrap_or_default();
            let shift = Monomial::var(var, dp - dd);
            let sub = &(&top * d).mul_term(&shift, &(BigRational::one() / &lc));
            p = &p - sub;
        }
    }

    pub fn eval(&self, point: &[C64]) -> Result<C64, RatFunError> {
        let mut acc = C64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut v = C64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    let x = point.get(i).ok_or(RatFunError::Unassigned(i))?;
                    v *= cpow(*x, e);
                }
            }
            acc += v;
        }
        Ok(acc)
    }

    /// Value at `point` and the sum of the absolute term values, the scale
    /// against which a residual is judged.
    pub fn eval_with_scale(&self, point: &[C64]) -> Result<(C64, f64), RatFunError> {
        let mut acc = C64::new(0.0, 0.0);
        let mut scale = 0.0;
        for (m, c) in &self.terms {
            let mut v = C64::new(c.to_f64().unwrap_or(f64::NAN), 0.0);
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    let x = point.get(i).ok_or(RatFunError::Unassigned(i))?;
                    v *= cpow(*x, e);
                }
            }
            scale += v.norm();
            acc += v;
        }
        Ok((acc, scale))
    }

    pub fn eval_exact(&self, point: &[BigRational]) -> Result<BigRational, RatFunError> {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            let mut v = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    let x = point.get(i).ok_or(RatFunError::Unassigned(i))?;
                    v *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += v;
        }
        Ok(acc)
    }

    /// Renames variable `i` to `map(i)`; colliding images are summed.
    pub fn rename(&self, map: impl Fn(usize) -> usize) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (m, c) in &self.terms {
            let mut v: Vec<u32> = Vec::new();
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    let j = map(i);
                    if v.len() <= j {
                        v.resize(j + 1, 0);
                    }
                    v[j] += e;
                }
            }
            out.add_term(Monomial::new(v), c.clone());
        }
        out
    }

    /// `self = content * primitive`, with the primitive part having coprime
    /// integer coefficients and a positive leading coefficient.
    pub fn primitive(&self) -> (BigRational, MultiPoly) {
        if self.is_zero() {
            return (BigRational::zero(), MultiPoly::zero());
        }
        let mut g = BigInt::zero();
        let mut l = BigInt::one();
        for c in self.terms.values() {
            g = g.gcd(c.numer());
            l = l.lcm(c.denom());
        }
        let mut content = BigRational::new(g, l);
        if self.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
            content = -content;
        }
        let inv = BigRational::one() / &content;
        (content, self.scale(&inv))
    }

    /// Primitive part up to sign.
    pub fn normalized(&self) -> MultiPoly {
        self.primitive().1
    }

    pub fn display_with(&self, names: &[String]) -> String {
        let mut s = String::new();
        if self.is_zero() {
            return "0".into();
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if idx == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let mut parts: Vec<String> = Vec::new();
            if !a.is_one() || m.is_one() {
                parts.push(a.to_string());
            }
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = names.get(i).cloned().unwrap_or_else(|| format!("x{i}"));
                if e == 1 {
                    parts.push(name);
                } else {
                    parts.push(format!("{name}^{e}"));
                }
            }
            s.push_str(&parts.join("*"));
        }
        s
    }
}

fn cpow(x: C64, e: u32) -> C64 {
    let mut acc = C64::new(1.0, 0.0);
    for _ in 0..e {
        acc *= x;
    }
    acc
}

impl Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, o: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, o: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, o: &MultiPoly) -> MultiPoly {
        let mut out = MultiPoly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        self.scale(&-BigRational::one())
    }
}

macro_rules! forward_owned {
    ($t:ty, $tr:ident, $f:ident) => {
        impl $tr for $t {
            type Output = $t;
            fn $f(self, o: $t) -> $t {
                (&self).$f(&o)
            }
        }
    };
}
forward_owned!(MultiPoly, Add, add);
forward_owned!(MultiPoly, Sub, sub);
forward_owned!(MultiPoly, Mul, mul);

/// `num / ∏ factor^exp`. Factors are primitive, non-constant and distinct.
#[derive(Debug, Clone)]
pub struct RatFun {
    num: MultiPoly,
    den: Vec<(MultiPoly, u32)>,
}

impl PartialEq for RatFun {
    fn eq(&self, o: &Self) -> bool {
        self.equals(o)
    }
}

impl From<MultiPoly> for RatFun {
    fn from(p: MultiPoly) -> Self {
        RatFun { num: p, den: Vec::new() }
    }
}

impl RatFun {
    pub fn zero() -> Self {
        MultiPoly::zero().into()
    }

    pub fn one() -> Self {
        MultiPoly::one().into()
    }

    pub fn from_i64(n: i64) -> Self {
        MultiPoly::from_i64(n).into()
    }

    pub fn constant(c: BigRational) -> Self {
        MultiPoly::constant(c).into()
    }

    pub fn var(i: usize) -> Self {
        MultiPoly::var(i).into()
    }

    pub fn numer(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den_factors(&self) -> &[(MultiPoly, u32)] {
        &self.den
    }

    pub fn denom(&self) -> MultiPoly {
        let mut d = MultiPoly::one();
        for (f, e) in &self.den {
            d = &d * &f.pow(*e);
        }
        d
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_poly(&self) -> Option<&MultiPoly> {
        if self.den.is_empty() {
            Some(&self.num)
        } else {
            None
        }
    }

    pub fn as_var(&self) -> Option<usize> {
        self.as_poly()?.as_var()
    }

    pub fn vars(&self) -> BTreeSet<usize> {
        let mut s = self.num.vars();
        for (f, _) in &self.den {
            s.extend(f.vars());
        }
        s
    }

    pub fn contains_var(&self, var: usize) -> bool {
        self.num.contains_var(var) || self.den.iter().any(|(f, _)| f.contains_var(var))
    }

    /// `(total degree, term count)` summed over numerator and factors.
    pub fn complexity(&self) -> (u32, usize) {
        let mut d = self.num.total_degree();
        let mut n = self.num.num_terms();
        for (f, e) in &self.den {
            d += f.total_degree() * e;
            n += f.num_terms();
        }
        (d, n)
    }

    /// Builds `num / den` with `den` inserted as a single factor.
    pub fn from_fraction(num: MultiPoly, den: MultiPoly) -> Result<Self, RatFunError> {
        if den.is_zero() {
            return Err(RatFunError::DivisionByZero);
        }
        let mut r = RatFun { num, den: Vec::new() };
        r.insert_den(den, 1);
        r.cancel();
        Ok(r)
    }

    fn insert_den(&mut self, g: MultiPoly, e: u32) {
        let (c, g) = g.primitive();
        self.num = self.num.scale(&(BigRational::one() / num_traits::pow(c, e as usize)));
        if g.is_constant() {
            return;
        }
        for i in 0..self.den.len() {
            let f = self.den[i].0.clone();
            if f == g {
                self.den[i].1 += e;
                return;
            }
            if let Some(rest) = g.div_exact(&f) {
                self.insert_den(f, e);
                self.insert_den(rest, e);
                return;
            }
            if let Some(rest) = f.div_exact(&g) {
                let ef = self.den.remove(i).1;
                self.insert_den(g, e + ef);
                self.insert_den(rest, ef);
                return;
            }
        }
        self.den.push((g, e));
        self.den.sort();
    }

    fn cancel(&mut self) {
        if self.num.is_zero() {
            self.den.clear();
            return;
        }
        for (f, e) in self.den.iter_mut() {
            while *e > 0 {
                match self.num.div_exact(f) {
                    Some(qt) => {
                        self.num = qt;
                        *e -= 1;
                    }
                    None => break,
                }
            }
        }
        self.den.retain(|(_, e)| *e > 0);
    }

    fn with_factors(num: MultiPoly, factors: &[(MultiPoly, u32)]) -> Self {
        let mut r = RatFun { num, den: Vec::new() };
        for (f, e) in factors {
            r.insert_den(f.clone(), *e);
        }
        r.cancel();
        r
    }

    pub fn add(&self, o: &RatFun) -> RatFun {
        self.combine(o, false)
    }

    pub fn sub(&self, o: &RatFun) -> RatFun {
        self.combine(o, true)
    }

    fn combine(&self, o: &RatFun, negate: bool) -> RatFun {
        let mut lcm: Vec<(MultiPoly, u32)> = self.den.clone();
        for (f, e) in &o.den {
            match lcm.iter_mut().find(|(g, _)| g == f) {
                Some(slot) => slot.1 = slot.1.max(*e),
                None => lcm.push((f.clone(), *e)),
            }
        }
        let cofactor = |den: &[(MultiPoly, u32)]| {
            let mut c = MultiPoly::one();
            for (f, e) in &lcm {
                let have = den.iter().find(|(g, _)| g == f).map(|x| x.1).unwrap_or(0);
                c = &c * &f.pow(e - have);
            }
            c
        };
        let a = &self.num * &cofactor(&self.den);
        let b = &o.num * &cofactor(&o.den);
        let num = if negate { &a - &b } else { &a + &b };
        let mut r = RatFun { num, den: lcm };
        r.den.sort();
        r.cancel();
        r
    }

    pub fn mul(&self, o: &RatFun) -> RatFun {
        let mut factors = self.den.clone();
        factors.extend(o.den.iter().cloned());
        Self::with_factors(&self.num * &o.num, &factors)
    }

    pub fn neg(&self) -> RatFun {
        RatFun { num: -&self.num, den: self.den.clone() }
    }

    pub fn scale(&self, c: &BigRational) -> RatFun {
        let mut r = RatFun { num: self.num.scale(c), den: self.den.clone() };
        if r.num.is_zero() {
            r.den.clear();
        }
        r
    }

    pub fn inv(&self) -> Result<RatFun, RatFunError> {
        if self.num.is_zero() {
            return Err(RatFunError::DivisionByZero);
        }
        let mut r = RatFun { num: MultiPoly::one(), den: Vec::new() };
        r.insert_den(self.num.clone(), 1);
        r.num = &r.num * &self.denom();
        r.cancel();
        Ok(r)
    }

    pub fn div(&self, o: &RatFun) -> Result<RatFun, RatFunError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn powi(&self, e: i32) -> Result<RatFun, RatFunError> {
        let base = if e < 0 { self.inv()? } else { self.clone() };
        let mut acc = RatFun::one();
        for _ in 0..e.unsigned_abs() {
            acc = acc.mul(&base);
        }
        Ok(acc)
    }

    /// Exact equality by cross-multiplication.
    pub fn equals(&self, o: &RatFun) -> bool {
        if self.den == o.den {
            return self.num == o.num;
        }
        &self.num * &o.denom() == &o.num * &self.denom()
    }

    /// Stored terms, numerator and denominator factors together.
    pub fn size(&self) -> usize {
        self.den.iter().fold(self.num.num_terms(), |n, (f, _)| n + f.num_terms())
    }

    /// Upper bound on the number of terms `substitute(var, g)` can produce,
    /// saturating.
    pub fn substitution_cost(&self, var: usize, g: &RatFun) -> usize {
        let den = g.den.iter().fold(1usize, |w, (f, e)| w.saturating_mul(f.num_terms().saturating_pow(*e)));
        let width = g.num.num_terms().max(den);
        let one = |p: &MultiPoly| p.num_terms().saturating_mul(width.saturating_pow(p.degree_in(var)));
        self.den.iter().fold(one(&self.num), |acc, (f, _)| acc.saturating_add(one(f)))
    }

    /// Composition `self[x_var := g]`.
    pub fn substitute(&self, var: usize, g: &RatFun) -> Result<RatFun, RatFunError> {
        if !self.contains_var(var) {
            return Ok(self.clone());
        }
        let sub = |p: &MultiPoly| -> RatFun {
            if !p.contains_var(var) {
                return p.clone().into();
            }
            if let Some(gp) = g.as_poly() {
                return p.substitute(var, gp).into();
            }
            let mut acc = RatFun::zero();
            for c in p.coeffs_in(var).iter().rev() {
                acc = acc.mul(g).add(&c.clone().into());
            }
            acc
        };
        let mut out = sub(&self.num);
        for (f, e) in &self.den {
            let fs = sub(f);
            if fs.is_zero() {
                return Err(RatFunError::DivisionByZero);
            }
            out = out.div(&fs.powi(*e as i32)?)?;
        }
        Ok(out)
    }

    pub fn eval_numeric(&self, point: &[C64]) -> Result<C64, RatFunError> {
        let mut den = C64::new(1.0, 0.0);
        for (f, e) in &self.den {
            den *= cpow(f.eval(point)?, *e);
        }
        if den.norm() < DEN_REJECT {
            return Err(RatFunError::Conditioning { value: den.norm() });
        }
        Ok(self.num.eval(point)? / den)
    }

    /// Numerator as the equation, denominator factors as exclusions.
    pub fn clear_denominators(&self) -> (MultiPoly, Vec<MultiPoly>) {
        (self.num.clone(), self.den.iter().map(|(f, _)| f.clone()).collect())
    }

    pub fn rename(&self, map: impl Fn(usize) -> usize + Copy) -> RatFun {
        let factors: Vec<(MultiPoly, u32)> =
            self.den.iter().map(|(f, e)| (f.rename(map), *e)).collect();
        Self::with_factors(self.num.rename(map), &factors)
    }

    pub fn display_with(&self, names: &[String]) -> String {
        if self.den.is_empty() {
            return self.num.display_with(names);
        }
        let parts: Vec<String> = self
            .den
            .iter()
            .map(|(f, e)| {
                if *e == 1 {
                    format!("({})", f.display_with(names))
                } else {
                    format!("({})^{e}", f.display_with(names))
                }
            })
            .collect();
        format!("({})/({})", self.num.display_with(names), parts.join("*"))
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

/// Parses `+ - * / ^ ( )`, integers and identifiers. Unknown identifiers are
/// interned into `reg`.
pub fn parse(text: &str, reg: &mut Registry) -> Result<RatFun, RatFunError> {
    let mut p = Parser { s: text.as_bytes(), pos: 0, reg };
    let r = p.expr()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(r)
}

/// Like [`parse`] but requires a polynomial result.
pub fn parse_poly(text: &str, reg: &mut Registry) -> Result<MultiPoly, RatFunError> {
    let r = parse(text, reg)?;
    r.as_poly().cloned().ok_or(RatFunError::Parse { pos: 0, msg: "not a polynomial".into() })
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    reg: &'a mut Registry,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> RatFunError {
        RatFunError::Parse { pos: self.pos, msg: msg.into() }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<RatFun, RatFunError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RatFun, RatFunError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    acc = acc.div(&d).map_err(|_| RatFunError::Parse {
                        pos: at,
                        msg: "division by zero".into(),
                    })?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<RatFun, RatFunError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<RatFun, RatFunError> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        let neg = if self.peek() == Some(b'-') {
            self.pos += 1;
            true
        } else {
            false
        };
        self.ws();
        let at = self.pos;
        let n = self.integer()?;
        let e: i32 = n
            .to_i32()
            .filter(|e| *e <= 4096)
            .ok_or_else(|| RatFunError::Parse { pos: at, msg: "exponent out of range".into() })?;
        base.powi(if neg { -e } else { e })
            .map_err(|_| RatFunError::Parse { pos: at, msg: "zero to a negative power".into() })
    }

    fn integer(&mut self) -> Result<BigInt, RatFunError> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer"));
        }
        let txt = core::str::from_utf8(&self.s[start..self.pos]).map_err(|_| self.err("utf8"))?;
        txt.parse::<BigInt>().map_err(|_| self.err("bad integer"))
    }

    fn atom(&mut self) -> Result<RatFun, RatFunError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let r = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(r)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(RatFun::constant(BigRational::from_integer(n)))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self.pos < self.s.len()
                    && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = core::str::from_utf8(&self.s[start..self.pos]).map_err(|_| self.err("utf8"))?;
                Ok(RatFun::var(self.reg.intern(name)))
            }
            Some(_) => Err(self.err("unexpected character")),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Complex helper for tests and callers holding rational points.
pub fn to_c64_point(point: &[BigRational]) -> Vec<C64> {
    point
        .iter()
        .map(|x| Complex::new(x.to_f64().unwrap_or(f64::NAN), 0.0))
        .collect()
}
