//! Tangency vectors: finitely supported sequences `(v_1, v_2, ...)` of
//! non-negative integers, where `v_j` counts contact points of order `j`.
//!
//! Stored densely with trailing zeros trimmed, so structural equality and
//! the derived order are canonical. The derived order is lexicographic on
//! the dense prefix.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;

use crate::arith::{binomial, factorial};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TangencyVector(Vec<u32>);

impl TangencyVector {
    pub fn zero() -> Self {
        TangencyVector(Vec::new())
    }

    /// `e_j`.
    pub fn unit(j: u32) -> Self {
        Self::unit_multiple(j, 1)
    }

    /// `m e_j`.
    pub fn unit_multiple(j: u32, m: u32) -> Self {
        assert!(j >= 1, "contact orders start at 1");
        let mut v = vec![0; j as usize];
        v[j as usize - 1] = m;
        Self::from_dense(v)
    }

    /// Builds from `v[0] = v_1, v[1] = v_2, ...`.
    pub fn from_dense(mut v: Vec<u32>) -> Self {
        while v.last() == Some(&0) {
            v.pop();
        }
        TangencyVector(v)
    }

    pub fn from_pairs(pairs: &[(u32, u32)]) -> Self {
        let mut out = TangencyVector::zero();
        for &(j, m) in pairs {
            out = out.add(&Self::unit_multiple(j, m));
        }
        out
    }

    pub fn dense(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, j: u32) -> u32 {
        if j == 0 {
            return 0;
        }
        self.0.get(j as usize - 1).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest index with a nonzero entry (0 for the zero vector).
    pub fn max_index(&self) -> u32 {
        self.0.len() as u32
    }

    /// Nonzero entries as `(j, v_j)`, increasing in `j`.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &m)| m > 0)
            .map(|(i, &m)| (i as u32 + 1, m))
    }

    /// `|v| = sum v_j`.
    pub fn norm(&self) -> u64 {
        self.0.iter().map(|&m| m as u64).sum()
    }

    /// `Iv = sum j v_j`.
    pub fn weight(&self) -> u64 {
        self.iter().map(|(j, m)| j as u64 * m as u64).sum()
    }

    /// `I^v = prod j^{v_j}`.
    pub fn weight_power(&self) -> BigUint {
        self.iter()
            .fold(BigUint::one(), |acc, (j, m)| acc * BigUint::from(j).pow(m))
    }

    /// `v! = prod v_j!`.
    pub fn factorial(&self) -> BigUint {
        self.iter()
            .fold(BigUint::one(), |acc, (_, m)| acc * factorial(m as u64))
    }

    pub fn add(&self, other: &TangencyVector) -> TangencyVector {
        let n = self.0.len().max(other.0.len());
        let v = (0..n)
            .map(|i| self.0.get(i).unwrap_or(&0) + other.0.get(i).unwrap_or(&0))
            .collect();
        TangencyVector::from_dense(v)
    }

    /// `self - other`, or `None` unless `other <= self` componentwise.
    pub fn checked_sub(&self, other: &TangencyVector) -> Option<TangencyVector> {
        if !other.le(self) {
            return None;
        }
        let v = self
            .0
            .iter()
            .enumerate()
            .map(|(i, &m)| m - other.0.get(i).unwrap_or(&0))
            .collect();
        Some(TangencyVector::from_dense(v))
    }

    /// Componentwise `self <= other`.
    pub fn le(&self, other: &TangencyVector) -> bool {
        self.0.len() <= other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Rendered as `j:m` pairs, as used in keys and on the command line.
    pub fn key(&self) -> String {
        self.to_string()
    }
}

/// `prod_k C(b_k, g_k)`; requires `g <= b`.
pub fn vec_binom(b: &TangencyVector, g: &TangencyVector) -> Result<BigUint> {
    if !g.le(b) {
        return Err(Error::Validation(format!("vec_binom: ({g}) is not <= ({b})")));
    }
    Ok(g.iter()
        .fold(BigUint::one(), |acc, (j, m)| acc * binomial(b.get(j) as u64, m as u64)))
}

/// `a! / (parts_1! ... parts_s! (a - sum parts)!)`; requires `sum parts <= a`.
pub fn vec_multinom(a: &TangencyVector, parts: &[TangencyVector]) -> Result<BigUint> {
    let total = parts.iter().fold(TangencyVector::zero(), |acc, p| acc.add(p));
    let rest = a.checked_sub(&total).ok_or_else(|| {
        Error::Validation(format!("vec_multinom: parts sum ({total}) exceeds ({a})"))
    })?;
    let denom = parts
        .iter()
        .fold(rest.factorial(), |acc, p| acc * p.factorial());
    Ok(a.factorial() / denom)
}

/// Every `g <= b` with `|g| >= min_norm`, increasing in the vector order.
pub fn sub_vectors(b: &TangencyVector, min_norm: u64) -> Vec<TangencyVector> {
    let mut out: Vec<TangencyVector> = bounded_sub_vectors(b, u64::MAX)
        .into_iter()
        .filter(|g| g.norm() >= min_norm)
        .collect();
    out.sort();
    out
}

/// Every `g <= bound` with `Ig <= max_weight`, increasing in the vector order.
pub fn bounded_sub_vectors(bound: &TangencyVector, max_weight: u64) -> Vec<TangencyVector> {
    let mut acc: Vec<(Vec<u32>, u64)> = vec![(Vec::new(), 0)];
    for (i, &cap) in bound.dense().iter().enumerate() {
        let j = i as u64 + 1;
        let mut next = Vec::new();
        for (prefix, w) in &acc {
            for m in 0..=cap {
                let w2 = w + j * m as u64;
                if w2 > max_weight {
                    break;
                }
                let mut p = prefix.clone();
                p.push(m);
                next.push((p, w2));
            }
        }
        acc = next;
    }
    let mut out: Vec<TangencyVector> =
        acc.into_iter().map(|(v, _)| TangencyVector::from_dense(v)).collect();
    out.sort();
    out
}

/// Every vector of weight exactly `w` (integer partitions of `w`).
pub fn with_weight(w: u64) -> Vec<TangencyVector> {
    fn rec(rest: u64, max_part: u64, cur: &mut Vec<u32>, out: &mut Vec<TangencyVector>) {
        if rest == 0 {
            out.push(TangencyVector::from_dense(cur.clone()));
            return;
        }
        for p in (1..=max_part.min(rest)).rev() {
            let idx = p as usize - 1;
            if cur.len() <= idx {
                cur.resize(idx + 1, 0);
            }
            cur[idx] += 1;
            rec(rest - p, p, cur, out);
            cur[idx] -= 1;
        }
    }
    let mut out = Vec::new();
    rec(w, w, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// All ordered `m`-tuples of vectors summing to `a` (when `exact`) or to
/// anything `<= a`.
pub fn distribute(a: &TangencyVector, m: usize, exact: bool) -> Vec<Vec<TangencyVector>> {
    assert!(m >= 1, "distribute needs at least one slot");
    if !exact {
        let mut out = Vec::new();
        for total in bounded_sub_vectors(a, u64::MAX).into_iter().rev() {
            out.extend(distribute(&total, m, true));
        }
        return out;
    }
    let mut tuples: Vec<Vec<Vec<u32>>> = vec![vec![Vec::new(); m]];
    for &count in a.dense() {
        let comps = compositions(count, m);
        let mut next = Vec::with_capacity(tuples.len() * comps.len());
        for t in &tuples {
            for c in &comps {
                let mut t2 = t.clone();
                for (slot, &x) in t2.iter_mut().zip(c) {
                    slot.push(x);
                }
                next.push(t2);
            }
        }
        tuples = next;
    }
    tuples
        .into_iter()
        .map(|t| t.into_iter().map(TangencyVector::from_dense).collect())
        .collect()
}

/// Compositions of `n` into `m` non-negative parts, first part largest first.
fn compositions(n: u32, m: usize) -> Vec<Vec<u32>> {
    if m == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in (0..=n).rev() {
        for mut rest in compositions(n - first, m - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

impl fmt::Display for TangencyVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, m) in self.iter() {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{j}:{m}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for TangencyVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Ok(TangencyVector::zero());
        }
        let err = |msg: String| Error::Parse(format!("vector `{s}`: {msg}"));
        let mut last = 0;
        let mut dense = Vec::new();
        for item in s.split(',') {
            let (j, m) = item
                .split_once(':')
                .ok_or_else(|| err(format!("expected `j:m`, found `{item}`")))?;
            let j: u32 = j.parse().map_err(|_| err(format!("bad index `{j}`")))?;
            let m: u32 = m.parse().map_err(|_| err(format!("bad multiplicity `{m}`")))?;
            if j <= last {
                return Err(err("indices must be positive and strictly increasing".into()));
            }
            last = j;
            dense.resize(j as usize, 0);
            dense[j as usize - 1] = m;
        }
        Ok(TangencyVector::from_dense(dense))
    }
}
