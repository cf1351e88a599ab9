//! Divisor classes on the plane blown up at six points.
//!
//! A class is written `dL - d1 E1 - ... - d6 E6` in the basis of the line
//! pull-back `L` and the six exceptional curves. The intersection form is
//! `diag(1, -1, ..., -1)` in that basis. The curve `E = 2L - E1 - ... - E5`
//! (the conic through the first five points) is the reference curve for all
//! tangency data; the sixth point plays a distinguished role through the
//! pencil `|L - E6|`.
//!
//! Coordinates are `i32`. Every class reached by the recursion has
//! coordinates bounded by the degree of the top-level query, so the valid
//! range is far below overflow; arithmetic panics on overflow in debug builds.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::tangency::TangencyVector;

/// Number of blown-up points.
pub const POINTS: usize = 6;

/// `d L - sum d_i E_i`; `mult[i - 1]` holds `d_i`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DivisorClass {
    pub d: i32,
    pub mult: [i32; POINTS],
}

impl DivisorClass {
    pub const ZERO: DivisorClass = DivisorClass { d: 0, mult: [0; POINTS] };

    pub const fn new(d: i32, mult: [i32; POINTS]) -> Self {
        DivisorClass { d, mult }
    }

    /// The pull-back of a generic line.
    pub const fn line() -> Self {
        DivisorClass::new(1, [0; POINTS])
    }

    /// The exceptional curve `E_i`, `i` in `1..=6`.
    pub fn exceptional(i: usize) -> Self {
        assert!((1..=POINTS).contains(&i), "exceptional index {i} out of range");
        let mut mult = [0; POINTS];
        mult[i - 1] = -1;
        DivisorClass::new(0, mult)
    }

    /// The reference curve `E = 2L - E1 - ... - E5`.
    pub const fn conic() -> Self {
        DivisorClass::new(2, [1, 1, 1, 1, 1, 0])
    }

    /// The canonical class `-3L + E1 + ... + E6`.
    pub const fn canonical() -> Self {
        DivisorClass::new(-3, [-1; POINTS])
    }

    /// `L - E6`, the pencil of lines through the sixth point.
    pub const fn pencil() -> Self {
        DivisorClass::new(1, [0, 0, 0, 0, 0, 1])
    }

    pub fn d6(&self) -> i32 {
        self.mult[5]
    }

    pub fn is_zero(&self) -> bool {
        *self == DivisorClass::ZERO
    }

    /// Intersection pairing `d d' - sum d_i d'_i`.
    pub fn intersect(&self, other: &DivisorClass) -> i64 {
        let mut acc = self.d as i64 * other.d as i64;
        for (a, b) in self.mult.iter().zip(other.mult.iter()) {
            acc -= *a as i64 * *b as i64;
        }
        acc
    }

    pub fn self_intersection(&self) -> i64 {
        self.intersect(self)
    }

    /// `D . E = 2d - d1 - ... - d5`.
    pub fn e_degree(&self) -> i64 {
        2 * self.d as i64 - self.mult[..5].iter().map(|&x| x as i64).sum::<i64>()
    }

    /// Arithmetic genus `(D^2 + D.K)/2 + 1`.
    pub fn arith_genus(&self) -> i64 {
        let t = self.self_intersection() + self.intersect(&DivisorClass::canonical());
        assert!(t % 2 == 0, "D^2 + DK odd for {self}");
        t / 2 + 1
    }

    /// Expected dimension `R(D, g, beta) = d - d6 + g + |beta| - 1`.
    pub fn r_dim(&self, genus: i64, beta: &TangencyVector) -> i64 {
        let simplified = self.d as i64 - self.d6() as i64 + genus + beta.norm() as i64 - 1;
        debug_assert_eq!(
            simplified,
            -self.intersect(&(DivisorClass::conic() + DivisorClass::canonical()))
                + beta.norm() as i64
                + genus
                - 1
        );
        simplified
    }

    /// Sort `(d1..d5)` non-increasingly; `d` and `d6` are untouched.
    pub fn canonicalize(&self) -> DivisorClass {
        let mut out = *self;
        out.mult[..5].sort_unstable_by(|a, b| b.cmp(a));
        out
    }

    pub fn is_canonical(&self) -> bool {
        self.mult[..5].windows(2).all(|w| w[0] >= w[1])
    }

    /// `Some(s)` if the class is `s (L - E6)` with `s >= 1`.
    pub fn pencil_multiple(&self) -> Option<i32> {
        (self.d >= 1 && self.mult[..5].iter().all(|&x| x == 0) && self.d6() == self.d)
            .then_some(self.d)
    }

    /// `Some((i, s))` if the class is `s E_i`, `i` in `1..=5`, `s >= 1`.
    pub fn exceptional_multiple(&self) -> Option<(usize, i32)> {
        if self.d != 0 || self.d6() != 0 {
            return None;
        }
        let nonzero: Vec<usize> = (0..5).filter(|&i| self.mult[i] != 0).collect();
        match nonzero.as_slice() {
            [i] if self.mult[*i] < 0 => Some((i + 1, -self.mult[*i])),
            _ => None,
        }
    }
}

impl Add for DivisorClass {
    type Output = DivisorClass;
    fn add(self, rhs: DivisorClass) -> DivisorClass {
        let mut mult = self.mult;
        for (a, b) in mult.iter_mut().zip(rhs.mult) {
            *a += b;
        }
        DivisorClass::new(self.d + rhs.d, mult)
    }
}

impl Sub for DivisorClass {
    type Output = DivisorClass;
    fn sub(self, rhs: DivisorClass) -> DivisorClass {
        self + (-rhs)
    }
}

impl Neg for DivisorClass {
    type Output = DivisorClass;
    fn neg(self) -> DivisorClass {
        DivisorClass::new(-self.d, self.mult.map(|x| -x))
    }
}

impl Mul<DivisorClass> for i32 {
    type Output = DivisorClass;
    fn mul(self, rhs: DivisorClass) -> DivisorClass {
        DivisorClass::new(self * rhs.d, rhs.mult.map(|x| self * x))
    }
}

fn write_term(f: &mut fmt::Formatter<'_>, coef: i32, symbol: &str, first: bool) -> fmt::Result {
    let sign = if coef < 0 { "-" } else if first { "" } else { "+" };
    let abs = coef.unsigned_abs();
    if abs == 1 {
        write!(f, "{sign}{symbol}")
    } else {
        write!(f, "{sign}{abs}{symbol}")
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if self.d != 0 {
            write_term(f, self.d, "L", true)?;
            first = false;
        }
        for (i, &m) in self.mult.iter().enumerate() {
            if m != 0 {
                write_term(f, -m, &format!("E{}", i + 1), first)?;
                first = false;
            }
        }
        if first {
            write!(f, "0L")?;
        }
        Ok(())
    }
}

impl FromStr for DivisorClass {
    type Err = Error;

    /// Grammar: an optional leading `dL` (or a bare exceptional term), then
    /// signed terms `+cEi` / `-cEi`. Whitespace is ignored; an index may
    /// appear at most once.
    fn from_str(s: &str) -> Result<Self> {
        let text: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let err = |msg: &str| Error::Parse(format!("class `{s}`: {msg}"));
        if text.is_empty() {
            return Err(err("empty"));
        }
        if text == ['0'] {
            return Ok(DivisorClass::ZERO);
        }
        let mut out = DivisorClass::ZERO;
        let mut seen_l = false;
        let mut seen = [false; POINTS];
        let mut pos = 0;
        let mut first = true;
        while pos < text.len() {
            let sign = match text[pos] {
                '+' => {
                    pos += 1;
                    1
                }
                '-' => {
                    pos += 1;
                    -1
                }
                _ if first => 1,
                c => return Err(err(&format!("expected sign, found `{c}`"))),
            };
            let start = pos;
            while pos < text.len() && text[pos].is_ascii_digit() {
                pos += 1;
            }
            let coef: i32 = if pos == start {
                1
            } else {
                text[start..pos]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| err("coefficient out of range"))?
            };
            match text.get(pos) {
                Some('L') => {
                    if !first || seen_l {
                        return Err(err("the L term must come first"));
                    }
                    seen_l = true;
                    out.d = sign * coef;
                    pos += 1;
                }
                Some('E') => {
                    pos += 1;
                    let istart = pos;
                    while pos < text.len() && text[pos].is_ascii_digit() {
                        pos += 1;
                    }
                    let idx: usize = text[istart..pos]
                        .iter()
                        .collect::<String>()
                        .parse()
                        .map_err(|_| err("missing exceptional index"))?;
                    if !(1..=POINTS).contains(&idx) {
                        return Err(err(&format!("exceptional index {idx} not in 1..6")));
                    }
                    if seen[idx - 1] {
                        return Err(err(&format!("duplicate index E{idx}")));
                    }
                    seen[idx - 1] = true;
                    out.mult[idx - 1] = -sign * coef;
                }
                Some(c) => return Err(err(&format!("unexpected `{c}`"))),
                None => return Err(err("dangling coefficient")),
            }
            first = false;
        }
        Ok(out)
    }
}
