//! Arborescent tangle expressions: grammar, AST, continued fractions and
//! strand connectivity.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TangleError {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("zero twist parameter at {pos}")]
    ZeroTwist { pos: usize },
    #[error("empty rational list at {pos}")]
    EmptyRational { pos: usize },
    #[error("continued fraction divides by zero at position {index}")]
    DegenerateFraction { index: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Tangle {
    /// `[k]`, k horizontal half-twists.
    Int(i64),
    /// `[1/k]`, k vertical half-twists.
    Vert(i64),
    /// `[[k1],...,[ks]]`.
    Rational(Vec<i64>),
    CompV(Box<Tangle>, Box<Tangle>),
    CompH(Box<Tangle>, Box<Tangle>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosureKind {
    /// Joins nw with sw and ne with se.
    D,
    /// Joins nw with ne and sw with se.
    N,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Closure {
    pub kind: ClosureKind,
    pub body: Tangle,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Closure(Closure),
    Tangle(Tangle),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dir {
    V,
    H,
}

impl Tangle {
    pub fn comp(dir: Dir, a: Tangle, b: Tangle) -> Tangle {
        match dir {
            Dir::V => Tangle::CompV(Box::new(a), Box::new(b)),
            Dir::H => Tangle::CompH(Box::new(a), Box::new(b)),
        }
    }

    pub fn is_composite(&self) -> bool {
        matches!(self, Tangle::CompV(..) | Tangle::CompH(..))
    }

    pub fn children(&self) -> Option<(Dir, &Tangle, &Tangle)> {
        match self {
            Tangle::CompV(a, b) => Some((Dir::V, a, b)),
            Tangle::CompH(a, b) => Some((Dir::H, a, b)),
            _ => None,
        }
    }

    /// Replaces every rational atom by its composition chain.
    pub fn expand(&self) -> Tangle {
        match self {
            Tangle::Rational(ks) => expand_rational(ks).unwrap_or_else(|_| self.clone()),
            Tangle::CompV(a, b) => Tangle::CompV(Box::new(a.expand()), Box::new(b.expand())),
            Tangle::CompH(a, b) => Tangle::CompH(Box::new(a.expand()), Box::new(b.expand())),
            t => t.clone(),
        }
    }

    /// Base atoms of the expanded tree in left-to-right order.
    pub fn atoms(&self) -> Vec<Tangle> {
        let mut out = Vec::new();
        fn walk(t: &Tangle, out: &mut Vec<Tangle>) {
            match t {
                Tangle::CompV(a, b) | Tangle::CompH(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Tangle::Rational(_) => walk(&t.expand(), out),
                atom => out.push(atom.clone()),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn depth(&self) -> usize {
        match self {
            Tangle::CompV(a, b) | Tangle::CompH(a, b) => 1 + a.depth().max(b.depth()),
            _ => 0,
        }
    }

    /// Number of composition nodes, in DFS pre-order numbering.
    pub fn comp_count(&self) -> usize {
        match self {
            Tangle::CompV(a, b) | Tangle::CompH(a, b) => 1 + a.comp_count() + b.comp_count(),
            _ => 0,
        }
    }

    /// Swaps the children of the `index`-th composition node (pre-order).
    pub fn swap_at(&self, index: usize) -> Option<Tangle> {
        fn go(t: &Tangle, idx: &mut usize) -> Option<Tangle> {
            let (dir, a, b) = t.children()?;
            if *idx == 0 {
                return Some(Tangle::comp(dir, b.clone(), a.clone()));
            }
            *idx -= 1;
            let na = a.comp_count();
            if *idx < na {
                let a2 = go(a, idx)?;
                return Some(Tangle::comp(dir, a2, b.clone()));
            }
            *idx -= na;
            let b2 = go(b, idx)?;
            Some(Tangle::comp(dir, a.clone(), b2))
        }
        let mut i = index;
        go(self, &mut i)
    }
}

fn fmt_tangle(t: &Tangle, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match t {
        Tangle::Int(k) => write!(f, "[{k}]"),
        Tangle::Vert(k) => write!(f, "[1/{k}]"),
        Tangle::Rational(ks) => {
            f.write_str("[")?;
            for (i, k) in ks.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "[{k}]")?;
            }
            f.write_str("]")
        }
        Tangle::CompV(a, b) | Tangle::CompH(a, b) => {
            let op = if matches!(t, Tangle::CompV(..)) { "*v" } else { "*h" };
            fmt_tangle(a, f)?;
            write!(f, " {op} ")?;
            if b.is_composite() {
                f.write_str("(")?;
                fmt_tangle(b, f)?;
                f.write_str(")")
            } else {
                fmt_tangle(b, f)
            }
        }
    }
}

impl fmt::Display for Tangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_tangle(self, f)
    }
}

impl fmt::Display for Closure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            ClosureKind::D => "D",
            ClosureKind::N => "N",
        };
        write!(f, "{k}({})", self.body)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Closure(c) => c.fmt(f),
            Expr::Tangle(t) => t.fmt(f),
        }
    }
}

pub fn parse(text: &str) -> Result<Expr, TangleError> {
    let mut p = Parser { s: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.ws();
    if p.pos != p.s.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

pub fn parse_tangle(text: &str) -> Result<Tangle, TangleError> {
    match parse(text)? {
        Expr::Tangle(t) => Ok(t),
        Expr::Closure(_) => Err(TangleError::Parse { pos: 0, msg: "expected a tangle, found a closure".into() }),
    }
}

pub fn parse_closure(text: &str) -> Result<Closure, TangleError> {
    match parse(text)? {
        Expr::Closure(c) => Ok(c),
        Expr::Tangle(_) => Err(TangleError::Parse { pos: 0, msg: "expected D(...) or N(...)".into() }),
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> TangleError {
        TangleError::Parse { pos: self.pos, msg: msg.into() }
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

    fn expect(&mut self, c: u8) -> Result<(), TangleError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, TangleError> {
        let kind = match self.peek() {
            Some(b'D') => Some(ClosureKind::D),
            Some(b'N') => Some(ClosureKind::N),
            _ => None,
        };
        if let Some(kind) = kind {
            self.pos += 1;
            self.expect(b'(')?;
            let body = self.tangle()?;
            self.expect(b')')?;
            return Ok(Expr::Closure(Closure { kind, body }));
        }
        Ok(Expr::Tangle(self.tangle()?))
    }

    fn tangle(&mut self) -> Result<Tangle, TangleError> {
        let mut acc = self.primary()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let dir = match self.s.get(self.pos) {
                Some(b'v') => Dir::V,
                Some(b'h') => Dir::H,
                _ => return Err(self.err("expected 'v' or 'h' after '*'")),
            };
            self.pos += 1;
            let rhs = self.primary()?;
            acc = Tangle::comp(dir, acc, rhs);
        }
        Ok(acc)
    }

    fn primary(&mut self) -> Result<Tangle, TangleError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let t = self.tangle()?;
                self.expect(b')')?;
                Ok(t)
            }
            Some(b'[') => self.atom(),
            Some(_) => Err(self.err("expected '[' or '('")),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn int(&mut self) -> Result<(i64, usize), TangleError> {
        self.ws();
        let start = self.pos;
        if matches!(self.s.get(self.pos), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if digits == self.pos {
            return Err(TangleError::Parse { pos: start, msg: "expected integer".into() });
        }
        let txt = core::str::from_utf8(&self.s[start..self.pos]).map_err(|_| self.err("utf8"))?;
        let v = txt
            .parse::<i64>()
            .map_err(|_| TangleError::Parse { pos: start, msg: "integer out of range".into() })?;
        Ok((v, start))
    }

    fn nonzero(&mut self) -> Result<i64, TangleError> {
        let (k, at) = self.int()?;
        if k == 0 {
            return Err(TangleError::ZeroTwist { pos: at });
        }
        Ok(k)
    }

    fn atom(&mut self) -> Result<Tangle, TangleError> {
        let open = self.pos;
        self.expect(b'[')?;
        if self.peek() == Some(b'[') {
            self.pos += 1;
            let mut ks = Vec::new();
            if self.peek() == Some(b']') {
                return Err(TangleError::EmptyRational { pos: open });
            }
            ks.push(self.nonzero()?);
            self.expect(b']')?;
            while self.peek() == Some(b',') {
                self.pos += 1;
                self.expect(b'[')?;
                ks.push(self.nonzero()?);
                self.expect(b']')?;
            }
            self.expect(b']')?;
            return Ok(Tangle::Rational(ks));
        }
        if self.peek() == Some(b']') {
            return Err(TangleError::EmptyRational { pos: open });
        }
        let (k, at) = self.int()?;
        if self.peek() == Some(b'/') {
            if k != 1 {
                return Err(TangleError::Parse { pos: at, msg: "expected '1/' before a vertical twist".into() });
            }
            self.pos += 1;
            let d = self.nonzero()?;
            self.expect(b']')?;
            return Ok(Tangle::Vert(d));
        }
        if k == 0 {
            return Err(TangleError::ZeroTwist { pos: at });
        }
        self.expect(b']')?;
        Ok(Tangle::Int(k))
    }
}

/// `[[k1]] = k1`, `[[k1..kj]] = kj + 1/[[k1..k(j-1)]]`.
pub fn continued_fraction(ks: &[i64]) -> Result<BigRational, TangleError> {
    let (first, rest) = ks.split_first().ok_or(TangleError::EmptyRational { pos: 0 })?;
    let mut acc = BigRational::from_integer(BigInt::from(*first));
    for (i, k) in rest.iter().enumerate() {
        if acc.is_zero() {
            return Err(TangleError::DegenerateFraction { index: i + 1 });
        }
        acc = BigRational::from_integer(BigInt::from(*k)) + BigRational::one() / acc;
    }
    Ok(acc)
}

/// Odd length: `[k1] *v [1/k2] *h [k3] ...`; even: `[1/k1] *h [k2] *v ...`;
/// left-associated.
pub fn expand_rational(ks: &[i64]) -> Result<Tangle, TangleError> {
    if ks.is_empty() {
        return Err(TangleError::EmptyRational { pos: 0 });
    }
    if let Some(i) = ks.iter().position(|&k| k == 0) {
        return Err(TangleError::ZeroTwist { pos: i });
    }
    let s = ks.len();
    let atom = |j: usize| {
        if (s - j).is_multiple_of(2) {
            Tangle::Int(ks[j - 1])
        } else {
            Tangle::Vert(ks[j - 1])
        }
    };
    let mut acc = atom(1);
    for j in 2..=s {
        let dir = if (s - j).is_multiple_of(2) { Dir::H } else { Dir::V };
        acc = Tangle::comp(dir, acc, atom(j));
    }
    Ok(acc)
}

/// Boundary end indices.
pub const NW: usize = 0;
pub const NE: usize = 1;
pub const SW: usize = 2;
pub const SE: usize = 3;

/// Which ends are joined by the tangle's strands, plus closed interior loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StrandPairing {
    pub partner: [usize; 4],
    pub closed_loops: usize,
}

impl StrandPairing {
    pub const CROSSING: StrandPairing = StrandPairing { partner: [SE, SW, NE, NW], closed_loops: 0 };
}

/// Glues two 4-ended pieces. `glue` lists (end of A, end of B) pairs and
/// `outer` maps each result end to `(piece, end)`.
fn glue(a: StrandPairing, b: StrandPairing, glue: [(usize, usize); 2], outer: [(usize, usize); 4]) -> StrandPairing {
    let node = |piece: usize, end: usize| piece * 4 + end;
    let internal = |n: usize| -> usize {
        let (piece, end) = (n / 4, n % 4);
        let p = if piece == 0 { a.partner[end] } else { b.partner[end] };
        node(piece, p)
    };
    let mut glued = [usize::MAX; 8];
    for (ea, eb) in glue {
        glued[node(0, ea)] = node(1, eb);
        glued[node(1, eb)] = node(0, ea);
    }
    let mut outer_of = [usize::MAX; 8];
    for (i, (piece, end)) in outer.iter().enumerate() {
        outer_of[node(*piece, *end)] = i;
    }
    let mut visited = [false; 8];
    let mut partner = [0usize; 4];
    for (i, (piece, end)) in outer.iter().enumerate() {
        let mut n = node(*piece, *end);
        visited[n] = true;
        loop {
            let m = internal(n);
            visited[m] = true;
            if outer_of[m] != usize::MAX {
                partner[i] = outer_of[m];
                break;
            }
            n = glued[m];
            visited[n] = true;
        }
    }
    let mut loops = a.closed_loops + b.closed_loops;
    for start in 0..8 {
        if visited[start] {
            continue;
        }
        loops += 1;
        let mut n = start;
        loop {
            visited[n] = true;
            let m = internal(n);
            visited[m] = true;
            n = glued[m];
            if n == start {
                break;
            }
        }
    }
    StrandPairing { partner, closed_loops: loops }
}

pub fn compose_pairing(dir: Dir, a: StrandPairing, b: StrandPairing) -> StrandPairing {
    match dir {
        Dir::V => glue(a, b, [(SW, NW), (SE, NE)], [(0, NW), (0, NE), (1, SW), (1, SE)]),
        Dir::H => glue(a, b, [(NE, NW), (SE, SW)], [(0, NW), (1, NE), (0, SW), (1, SE)]),
    }
}

pub fn strand_pairing(t: &Tangle) -> StrandPairing {
    match t {
        Tangle::Int(k) => twist_pairing(Dir::H, k.unsigned_abs()),
        Tangle::Vert(k) => twist_pairing(Dir::V, k.unsigned_abs()),
        Tangle::Rational(_) => strand_pairing(&t.expand()),
        Tangle::CompV(a, b) => compose_pairing(Dir::V, strand_pairing(a), strand_pairing(b)),
        Tangle::CompH(a, b) => compose_pairing(Dir::H, strand_pairing(a), strand_pairing(b)),
    }
}

fn twist_pairing(dir: Dir, n: u64) -> StrandPairing {
    let mut acc = StrandPairing::CROSSING;
    for _ in 1..n {
        acc = compose_pairing(dir, acc, StrandPairing::CROSSING);
    }
    acc
}

/// Number of link components of the closure.
pub fn component_count(c: &Closure) -> usize {
    let sp = strand_pairing(&c.body);
    let join = match c.kind {
        ClosureKind::D => [SW, SE, NW, NE],
        ClosureKind::N => [NE, NW, SE, SW],
    };
    let mut seen = [false; 4];
    let mut cycles = 0;
    for start in 0..4 {
        if seen[start] {
            continue;
        }
        cycles += 1;
        let mut n = start;
        loop {
            seen[n] = true;
            let m = sp.partner[n];
            seen[m] = true;
            n = join[m];
            if n == start {
                break;
            }
        }
    }
    cycles + sp.closed_loops
}
