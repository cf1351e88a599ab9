//! Enumeration of the degenerations appearing in the second sum of the
//! recursion.
//!
//! For a query `(D, g, alpha, beta)` a splitting consists of `k` copies of
//! the moving line class `L - E6` that carry no data, plus a multiset of
//! parts `(D^i, g^i, alpha^i, beta^i)` with a distinguished `gamma^i <= beta^i`
//! (the contacts that glue back to the reference curve). The constraints are
//!
//! * `sum D^i = D - E - k(L - E6)`,
//! * `sum alpha^i <= alpha` and `sum (beta^i - gamma^i) = beta`,
//! * `sum (g^i + |gamma^i| - 1) = g` (the genus budget, see [`GenusOffset`]),
//! * every part is an admissible summand and has `D^i . E >= 1`,
//! * a part with `n^i = 0` and `alpha^i = 0` occurs at most once.
//!
//! Splittings are returned in a canonical form: parts sorted ascending,
//! and the whole list strictly increasing.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::picard::DivisorClass;
use crate::quadruple::Quadruple;
use crate::tangency::{bounded_sub_vectors, with_weight, TangencyVector};

/// Sign of the constant in the genus ledger `sum (g^i + |gamma^i| ± 1) = g`.
///
/// `Corrected` (`-1`) is the one compatible with the dimension count
/// `sum n^i = n - 1`. `AsPrinted` (`+1`) is kept for auditing only.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub enum GenusOffset {
    #[default]
    Corrected,
    AsPrinted,
}

impl GenusOffset {
    pub fn value(self) -> i32 {
        match self {
            GenusOffset::Corrected => -1,
            GenusOffset::AsPrinted => 1,
        }
    }

    /// Value of `sum (g^i + |gamma^i| - 1)` a splitting must reach.
    pub fn budget(self, genus: i32) -> i32 {
        match self {
            GenusOffset::Corrected => genus,
            GenusOffset::AsPrinted => genus - 2,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            GenusOffset::Corrected => "-1",
            GenusOffset::AsPrinted => "+1",
        }
    }

    pub fn from_tag(s: &str) -> Result<Self> {
        match s {
            "-1" => Ok(GenusOffset::Corrected),
            "+1" | "1" => Ok(GenusOffset::AsPrinted),
            _ => Err(Error::Parse(format!("genus offset `{s}`: expected -1 or +1"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Part {
    pub quadruple: Quadruple,
    pub gamma: TangencyVector,
}

impl Part {
    pub fn n(&self) -> i64 {
        self.quadruple.r_dim()
    }

    /// Genus-ledger cost `g^i + |gamma^i| - 1`.
    pub fn cost(&self) -> i64 {
        self.quadruple.genus as i64 + self.gamma.norm() as i64 - 1
    }

    /// `beta^i - gamma^i`.
    pub fn delta(&self) -> TangencyVector {
        self.quadruple
            .beta
            .checked_sub(&self.gamma)
            .expect("gamma is bounded by beta")
    }

    /// Whether the gluing factor `C(beta^i, gamma^i) I^gamma^i` applies.
    pub fn glued(&self) -> bool {
        !self.quadruple.is_fixed_point_line()
    }

    fn is_rigid_unpointed(&self) -> bool {
        self.quadruple.alpha.is_zero() && self.n() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Splitting {
    pub k: u32,
    pub parts: Vec<Part>,
}

impl Splitting {
    /// `sigma = prod c!` over the repetition counts `c` of identical parts.
    pub fn symmetry_order(&self) -> u64 {
        self.repetition_counts()
            .into_iter()
            .map(|c| (1..=c as u64).product::<u64>())
            .product()
    }

    /// Number of distinct orderings of the parts, `m! / sigma`.
    pub fn orderings(&self) -> u64 {
        let m = self.parts.len() as u64;
        (1..=m).product::<u64>() / self.symmetry_order()
    }

    fn repetition_counts(&self) -> Vec<usize> {
        let mut counts = Vec::new();
        let mut i = 0;
        while i < self.parts.len() {
            let j = (i..self.parts.len())
                .find(|&j| self.parts[j] != self.parts[i])
                .unwrap_or(self.parts.len());
            counts.push(j - i);
            i = j;
        }
        counts
    }

    /// The class `D - E - k(L - E6)` the parts must add up to.
    pub fn residual_class(query: &DivisorClass, k: u32) -> DivisorClass {
        *query - DivisorClass::conic() - (k as i32) * DivisorClass::pencil()
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .parts
            .iter()
            .map(|p| format!("({} ; gamma={})", p.quadruple, p.gamma))
            .collect();
        format!("k={} [{}]", self.k, parts.join(", "))
    }
}

/// Every splitting of `query`, sorted and duplicate-free.
///
/// The query must have `R > 0` and must not be one of the valued-1
/// `(s(L-E6), 0, 0, 2e_s)`; the recursion never asks otherwise.
pub fn enumerate_splittings(query: &Quadruple, offset: GenusOffset) -> Result<Vec<Splitting>> {
    if query.r_dim() <= 0 || query.is_moving_line_pair() {
        return Err(Error::Validation(format!(
            "{query}: splittings are only defined for R > 0 outside the special family"
        )));
    }
    let budget = offset.budget(query.genus);
    let mut out = BTreeSet::new();
    if budget < 0 {
        return Ok(Vec::new());
    }
    for k in 0..=(query.class.d - 2).max(-1) {
        let k = k as u32;
        let residual = Splitting::residual_class(&query.class, k);
        if residual.d < 0 || residual.d6() < 0 {
            continue;
        }
        if residual.is_zero() {
            if query.beta.is_zero() && budget == 0 {
                out.insert(Splitting { k, parts: Vec::new() });
            }
            continue;
        }
        let degree = residual.e_degree();
        if degree < 1 {
            continue;
        }
        for xs in exceptional_choices(&residual) {
            if xs.iter().sum::<i32>() as i64 > degree {
                continue;
            }
            let mut target = residual;
            for (j, x) in xs.iter().enumerate() {
                target.mult[j] += x;
            }
            if target.d == 0 && !target.is_zero() {
                continue;
            }
            let exceptional: Vec<Part> = xs
                .iter()
                .enumerate()
                .filter(|(_, &x)| x == 1)
                .map(|(j, _)| Part {
                    quadruple: Quadruple::new(
                        DivisorClass::exceptional(j + 1),
                        0,
                        TangencyVector::zero(),
                        TangencyVector::unit(1),
                    ),
                    gamma: TangencyVector::unit(1),
                })
                .collect();
            let mut search = CurveSearch { out: Vec::new(), stack: Vec::new() };
            search.run(target, &query.alpha, &query.beta, budget as i64);
            for curves in search.out {
                if curves.is_empty() && exceptional.is_empty() {
                    continue;
                }
                let mut parts: Vec<Part> = exceptional.iter().cloned().chain(curves).collect();
                parts.sort();
                out.insert(Splitting { k, parts });
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// For each `j <= 5`, whether `E_j` is split off as its own part.
fn exceptional_choices(residual: &DivisorClass) -> Vec<[i32; 5]> {
    let mut ranges = Vec::with_capacity(5);
    for j in 0..5 {
        let dj = residual.mult[j];
        let lo = (-dj).max(0);
        let hi = (residual.d - dj).min(1);
        if hi < lo {
            return Vec::new();
        }
        ranges.push(lo..=hi);
    }
    let mut out = vec![[0; 5]];
    for (j, r) in ranges.into_iter().enumerate() {
        out = out
            .into_iter()
            .flat_map(|xs| {
                r.clone().map(move |x| {
                    let mut ys = xs;
                    ys[j] = x;
                    ys
                })
            })
            .collect();
    }
    out
}

/// Depth-first search over non-increasing sequences of curve parts.
struct CurveSearch {
    out: Vec<Vec<Part>>,
    stack: Vec<Part>,
}

impl CurveSearch {
    fn run(&mut self, target: DivisorClass, alpha: &TangencyVector, beta: &TangencyVector, budget: i64) {
        if target.is_zero() {
            if beta.is_zero() && budget == 0 {
                self.out.push(self.stack.clone());
            }
            return;
        }
        if beta.weight() as i64 > target.e_degree() - 1 {
            return;
        }
        let last = self.stack.last().cloned();
        for class in curve_classes(&target, last.as_ref().map(|p| &p.quadruple.class)) {
            let rest = target - class;
            for part in decorations(&class, alpha, beta, budget) {
                if let Some(prev) = &last {
                    if part > *prev {
                        continue;
                    }
                    if part.is_rigid_unpointed() && part.quadruple == prev.quadruple {
                        continue;
                    }
                }
                let alpha2 = alpha.checked_sub(&part.quadruple.alpha).expect("bounded");
                let beta2 = beta.checked_sub(&part.delta()).expect("bounded");
                let budget2 = budget - part.cost();
                self.stack.push(part);
                self.run(rest, &alpha2, &beta2, budget2);
                self.stack.pop();
            }
        }
    }
}

/// Classes `c <= last` with `1 <= c.d`, `0 <= c_j <= min(c.d, C_j)` and
/// `c.E >= 1` whose remainder can still be split.
fn curve_classes(target: &DivisorClass, last: Option<&DivisorClass>) -> Vec<DivisorClass> {
    let mut out = Vec::new();
    for d in 1..=target.d {
        let mut classes = vec![DivisorClass::new(d, [0; 6])];
        for j in 0..6 {
            let cap = d.min(target.mult[j]);
            classes = classes
                .into_iter()
                .flat_map(|c| {
                    (0..=cap.max(-1)).map(move |x| {
                        let mut c2 = c;
                        c2.mult[j] = x;
                        c2
                    })
                })
                .collect();
        }
        for c in classes {
            if last.is_some_and(|l| c > *l) || c.e_degree() < 1 {
                continue;
            }
            if remainder_feasible(&(*target - c)) {
                out.push(c);
            }
        }
    }
    out
}

fn remainder_feasible(r: &DivisorClass) -> bool {
    if r.d < 0 || r.mult.iter().any(|&x| x < 0 || x > r.d) {
        return false;
    }
    if r.is_zero() {
        return true;
    }
    r.d >= 1 && r.e_degree() >= 1
}

/// Every admissible decorated part on `class` compatible with the remaining
/// `alpha`, `beta` and genus budget, in decreasing order.
fn decorations(class: &DivisorClass, alpha: &TangencyVector, beta: &TangencyVector, budget: i64) -> Vec<Part> {
    let degree = class.e_degree() as u64;
    let max_genus = class.arith_genus().max(0);
    let mut out = Vec::new();
    for a in bounded_sub_vectors(alpha, degree) {
        let rest = degree - a.weight();
        for delta in bounded_sub_vectors(beta, rest) {
            let w = rest - delta.weight();
            if w < 1 {
                continue;
            }
            for gamma in with_weight(w) {
                let b = delta.add(&gamma);
                for g in 0..=max_genus {
                    if g + gamma.norm() as i64 - 1 > budget {
                        break;
                    }
                    let q = Quadruple::new(*class, g as i32, a.clone(), b.clone());
                    if q.admissible_summand() {
                        out.push(Part { quadruple: q, gamma: gamma.clone() });
                    }
                }
            }
        }
    }
    out.sort_by(|x, y| y.cmp(x));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Quadruple {
        s.parse().unwrap()
    }

    fn part(s: &str, gamma: &str) -> Part {
        Part { quadruple: q(s), gamma: gamma.parse().unwrap() }
    }

    #[test]
    fn contains_the_worked_example() {
        let query = q("3L-E1-E2-E3-E4|g=0|a=1:2|b=");
        let all = enumerate_splittings(&query, GenusOffset::Corrected).unwrap();
        let mut parts = vec![part("E5|g=0|a=|b=1:1", "1:1"), part("L|g=0|a=1:1|b=1:1", "1:1")];
        parts.sort();
        assert!(all.contains(&Splitting { k: 0, parts }), "{all:?}");
    }

    #[test]
    fn special_family_and_rigid_queries_are_rejected() {
        assert!(enumerate_splittings(&q("L-E6|g=0|a=|b=1:2"), GenusOffset::Corrected).is_err());
        assert!(enumerate_splittings(&q("E1|g=0|a=|b=1:1"), GenusOffset::Corrected).is_err());
    }

    #[test]
    fn line_has_no_degenerations() {
        let all = enumerate_splittings(&q("L|g=0|a=|b=1:2"), GenusOffset::Corrected).unwrap();
        assert!(all.is_empty());
    }

    #[test]
    fn output_is_strictly_increasing_and_consistent() {
        for s in [
            "3L|g=0|a=|b=1:6",
            "4L-2E1|g=0|a=|b=1:6",
            "3L-E1-E2|g=1|a=1:1|b=1:3",
            "4L-E1-E2-E6|g=2|a=|b=1:6",
        ] {
            let query = q(s);
            let all = enumerate_splittings(&query, GenusOffset::Corrected).unwrap();
            assert!(all.windows(2).all(|w| w[0] < w[1]));
            for sp in &all {
                assert!(sp.parts.windows(2).all(|w| w[0] <= w[1]));
                let total = sp
                    .parts
                    .iter()
                    .fold(DivisorClass::ZERO, |acc, p| acc + p.quadruple.class);
                assert_eq!(total, Splitting::residual_class(&query.class, sp.k));
                let alpha = sp
                    .parts
                    .iter()
                    .fold(TangencyVector::zero(), |acc, p| acc.add(&p.quadruple.alpha));
                assert!(alpha.le(&query.alpha));
                let beta = sp.parts.iter().fold(TangencyVector::zero(), |acc, p| acc.add(&p.delta()));
                assert_eq!(beta, query.beta);
                let cost: i64 = sp.parts.iter().map(Part::cost).sum();
                assert_eq!(cost, query.genus as i64);
                let n: i64 = sp.parts.iter().map(Part::n).sum();
                assert_eq!(n, query.r_dim() - 1, "{}", sp.describe());
            }
        }
    }

    #[test]
    fn symmetry_order_counts_repeats() {
        let a = part("L-E1-E6|g=0|a=1:1|b=", "");
        let b = part("E2|g=0|a=|b=1:1", "1:1");
        let sp = Splitting { k: 0, parts: vec![a.clone(), a.clone(), a, b] };
        assert_eq!(sp.symmetry_order(), 2 * 3);
        assert_eq!(sp.orderings(), 4);
        assert_eq!(Splitting { k: 1, parts: vec![] }.symmetry_order(), 1);
    }

    #[test]
    fn as_printed_offset_shrinks_the_budget() {
        let query = q("3L|g=2|a=|b=1:6");
        assert_eq!(GenusOffset::AsPrinted.budget(query.genus), 0);
        let printed = enumerate_splittings(&query, GenusOffset::AsPrinted).unwrap();
        let g0 = enumerate_splittings(&q("3L|g=0|a=|b=1:6"), GenusOffset::Corrected).unwrap();
        assert_eq!(printed.len(), g0.len());
    }
}
