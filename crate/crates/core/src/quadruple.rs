//! The recursion state `(D, g, alpha, beta)`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::picard::DivisorClass;
use crate::tangency::TangencyVector;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quadruple {
    pub class: DivisorClass,
    pub genus: i32,
    pub alpha: TangencyVector,
    pub beta: TangencyVector,
}

/// Outcome of [`Quadruple::validate`]. The weight condition is what makes a
/// query meaningful; the genus range is reported separately because
/// out-of-range genera simply evaluate to zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Validation {
    pub tangency_weight: u64,
    pub e_degree: i64,
    pub arith_genus: i64,
    pub weight_ok: bool,
    pub genus_in_range: bool,
}

impl Validation {
    pub fn weight_message(&self) -> String {
        format!(
            "Iα+Iβ={} ≠ DE={}",
            self.tangency_weight, self.e_degree
        )
    }
}

/// The initial values: the special `R = 1` family and the rigid patterns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasePattern {
    /// `(s(L-E6), 0, 0, 2e_s) = 1`.
    MovingLinePair { s: i32 },
    /// `(sE_i, 0, 0, e_s) = 1`.
    Exceptional { index: usize, s: i32 },
    /// `(s(L-E6), 0, 0, e_{2s}) = 2`.
    TangentLine { s: i32 },
    /// `(s(L-E6), 0, e_s, e_s) = 1`.
    FixedPointLine { s: i32 },
    /// `(s(L-E_i-E6), 0, 0, e_s) = 1`.
    LineThroughTwo { index: usize, s: i32 },
    /// `(dL - d1E1 - ... - d5E5 - (d-1)E6, 0, alpha, 0) = 1`.
    Nodal { d: i32 },
}

impl BasePattern {
    pub fn value(&self) -> u32 {
        match self {
            BasePattern::TangentLine { .. } => 2,
            _ => 1,
        }
    }
}

impl Quadruple {
    pub fn new(class: DivisorClass, genus: i32, alpha: TangencyVector, beta: TangencyVector) -> Self {
        Quadruple { class, genus, alpha, beta }
    }

    /// The Gromov–Witten convention: no fixed points, all `D.E` contacts
    /// transverse and moving.
    pub fn gromov_witten(class: DivisorClass, genus: i32) -> Result<Self> {
        let de = class.e_degree();
        if de < 0 {
            return Err(Error::Validation(format!("D.E = {de} < 0 for {class}")));
        }
        let beta = if de == 0 {
            TangencyVector::zero()
        } else {
            TangencyVector::unit_multiple(1, de as u32)
        };
        Ok(Quadruple::new(class, genus, TangencyVector::zero(), beta))
    }

    pub fn canonical(&self) -> Quadruple {
        Quadruple { class: self.class.canonicalize(), ..self.clone() }
    }

    pub fn r_dim(&self) -> i64 {
        self.class.r_dim(self.genus as i64, &self.beta)
    }

    pub fn validate(&self) -> Validation {
        let tangency_weight = self.alpha.weight() + self.beta.weight();
        let e_degree = self.class.e_degree();
        let arith_genus = self.class.arith_genus();
        Validation {
            tangency_weight,
            e_degree,
            arith_genus,
            weight_ok: tangency_weight as i64 == e_degree,
            genus_in_range: self.genus >= 0 && self.genus as i64 <= arith_genus,
        }
    }

    pub fn ensure_weight(&self) -> Result<()> {
        let v = self.validate();
        if v.weight_ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("{}: {}", self.key(), v.weight_message())))
        }
    }

    fn is_genus_zero_pair(&self, alpha: &TangencyVector, beta: &TangencyVector) -> bool {
        self.genus == 0 && &self.alpha == alpha && &self.beta == beta
    }

    /// `(s(L-E6), 0, 0, 2e_s)`, excluded from the recursion and valued 1.
    pub fn is_moving_line_pair(&self) -> bool {
        self.class.pencil_multiple().is_some_and(|s| {
            self.is_genus_zero_pair(&TangencyVector::zero(), &TangencyVector::unit_multiple(s as u32, 2))
        })
    }

    /// `(s(L-E6), 0, e_s, e_s)`: the summands whose gluing factor is omitted.
    pub fn is_fixed_point_line(&self) -> bool {
        self.class.pencil_multiple().is_some_and(|s| {
            let e = TangencyVector::unit(s as u32);
            self.is_genus_zero_pair(&e, &e)
        })
    }

    /// Which initial-value pattern (if any) the quadruple matches, up to
    /// permutations of `E1..E5`.
    pub fn classify(&self) -> Option<BasePattern> {
        if self.genus != 0 {
            return None;
        }
        let class = self.class;
        let zero = TangencyVector::zero();
        if let Some(s) = class.pencil_multiple() {
            let su = s as u32;
            if self.is_moving_line_pair() {
                return Some(BasePattern::MovingLinePair { s });
            }
            if self.is_genus_zero_pair(&zero, &TangencyVector::unit(2 * su)) {
                return Some(BasePattern::TangentLine { s });
            }
            if self.is_fixed_point_line() {
                return Some(BasePattern::FixedPointLine { s });
            }
            return None;
        }
        if let Some((index, s)) = class.exceptional_multiple() {
            return self
                .is_genus_zero_pair(&zero, &TangencyVector::unit(s as u32))
                .then_some(BasePattern::Exceptional { index, s });
        }
        let d = class.d;
        if d >= 1 && class.d6() == d {
            // s(L - E_i - E6)
            let nonzero: Vec<usize> = (0..5).filter(|&i| class.mult[i] != 0).collect();
            if let [i] = nonzero.as_slice() {
                if class.mult[*i] == d && self.is_genus_zero_pair(&zero, &TangencyVector::unit(d as u32)) {
                    return Some(BasePattern::LineThroughTwo { index: i + 1, s: d });
                }
            }
            return None;
        }
        if d >= 1
            && class.d6() == d - 1
            && class.mult[..5].iter().all(|&x| x == 0 || x == 1)
            && class.mult[..5].iter().sum::<i32>() < 2 * d
            && self.beta.is_zero()
            && self.alpha.weight() as i64 == class.e_degree()
        {
            return Some(BasePattern::Nodal { d });
        }
        None
    }

    /// Initial value, or `None` when the quadruple must be computed by the
    /// recursion. Negative genus is always 0; the special family is 1; every
    /// other `R = 0` quadruple is given by the pattern table (0 off-table).
    pub fn base_value(&self) -> Option<BigUint> {
        if self.genus < 0 {
            return Some(BigUint::default());
        }
        if self.is_moving_line_pair() {
            return Some(BigUint::from(1u32));
        }
        if self.r_dim() != 0 {
            return None;
        }
        Some(BigUint::from(self.classify().map_or(0, |p| p.value())))
    }

    /// Whether the quadruple may occur as a component of a degeneration:
    /// exceptional curves `E_i` (`i <= 5`) touching `E` once, the two
    /// generator families on `s(L - E6)`, and curve classes with
    /// `0 <= d_j <= d`. Multiple covers of `(-1)`-curves never occur.
    pub fn admissible_summand(&self) -> bool {
        if self.genus < 0 || !self.validate().weight_ok || self.r_dim() < 0 {
            return false;
        }
        let class = self.class;
        if let Some(s) = class.pencil_multiple() {
            let su = s as u32;
            let e = TangencyVector::unit(su);
            return self.is_genus_zero_pair(&e, &e)
                || self.is_genus_zero_pair(&TangencyVector::zero(), &TangencyVector::unit_multiple(su, 2));
        }
        if class.d == 0 {
            return matches!(class.exceptional_multiple(), Some((_, 1)))
                && self.is_genus_zero_pair(&TangencyVector::zero(), &TangencyVector::unit(1));
        }
        if class.d < 0 || class.mult.iter().any(|&x| x < 0 || x > class.d) {
            return false;
        }
        !is_line_through_two_multiple(&class)
    }

    /// `<class>|g=<g>|a=<alpha>|b=<beta>`.
    pub fn key(&self) -> String {
        format!("{}|g={}|a={}|b={}", self.class, self.genus, self.alpha, self.beta)
    }
}

/// `s(L - E_i - E6)` with `s >= 2`, irrespective of tangency data.
fn is_line_through_two_multiple(class: &DivisorClass) -> bool {
    let s = class.d;
    s >= 2 && class.d6() == s && {
        let mut m = class.mult[..5].to_vec();
        m.sort_unstable();
        m == [0, 0, 0, 0, s]
    }
}

impl fmt::Display for Quadruple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

impl FromStr for Quadruple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse(format!("quadruple key `{s}`: expected `<class>|g=<g>|a=<alpha>|b=<beta>`"));
        let fields: Vec<&str> = s.split('|').collect();
        let [class, g, a, b] = fields.as_slice() else {
            return Err(err());
        };
        let g = g.strip_prefix("g=").ok_or_else(err)?;
        let a = a.strip_prefix("a=").ok_or_else(err)?;
        let b = b.strip_prefix("b=").ok_or_else(err)?;
        Ok(Quadruple {
            class: class.parse()?,
            genus: g.parse().map_err(|_| err())?,
            alpha: a.parse()?,
            beta: b.parse()?,
        })
    }
}
