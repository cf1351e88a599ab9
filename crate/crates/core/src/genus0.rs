//! Genus-zero evaluator with the line covers resummed.
//!
//! Every component that is a multiple of the pencil `L - E6` is folded into
//! the data `(k, alpha0, beta0)`: `k` free tangent lines, `alpha0` lines
//! through fixed points of `E`, `beta0` lines meeting `E` at a moving point.
//! The remaining components are never line covers and have exactly one
//! contact glued to the split-off copy of `E`. Intermediate arithmetic is
//! rational (the `1/beta0!` factor); every node total is checked to be an
//! integer.
//!
//! Shares no enumeration code with [`crate::splitter`]: classes are split
//! first, decorations are distributed afterwards.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};

use crate::arith::{binomial, factorial};
use crate::cache::{EngineKind, MemoCache};
use crate::engine::StatsSnapshot;
use crate::error::{Error, Result};
use crate::picard::DivisorClass;
use crate::quadruple::Quadruple;
use crate::splitter::GenusOffset;
use crate::tangency::{bounded_sub_vectors, vec_binom, TangencyVector};

type Rational = Ratio<BigUint>;

/// One non-line component: `(D, alpha, beta)` glued along `e_gamma`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ZeroPart {
    pub class: DivisorClass,
    pub alpha: TangencyVector,
    pub beta: TangencyVector,
    pub gamma: u32,
}

impl ZeroPart {
    pub fn quadruple(&self) -> Quadruple {
        Quadruple::new(self.class, 0, self.alpha.clone(), self.beta.clone())
    }

    pub fn n(&self) -> i64 {
        self.class.r_dim(0, &self.beta)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ZeroSplitting {
    pub k: u32,
    pub alpha0: TangencyVector,
    pub beta0: TangencyVector,
    pub parts: Vec<ZeroPart>,
}

pub struct Genus0Engine {
    memo: Arc<MemoCache>,
    memoize: bool,
    memo_hits: AtomicU64,
    nodes: AtomicU64,
    splittings: AtomicU64,
}

impl Default for Genus0Engine {
    fn default() -> Self {
        Self::new()
    }
}

impl Genus0Engine {
    pub fn new() -> Self {
        Self::with_memo(Arc::new(MemoCache::new(EngineKind::Genus0, GenusOffset::Corrected)))
            .expect("fresh memo has the right tags")
    }

    pub fn with_memo(memo: Arc<MemoCache>) -> Result<Self> {
        if memo.engine() != EngineKind::Genus0 {
            return Err(Error::CacheMismatch(format!(
                "memo is tagged engine={}, expected genus0",
                memo.engine().tag()
            )));
        }
        Ok(Genus0Engine {
            memo,
            memoize: true,
            memo_hits: AtomicU64::new(0),
            nodes: AtomicU64::new(0),
            splittings: AtomicU64::new(0),
        })
    }

    pub fn memo(&self) -> &Arc<MemoCache> {
        &self.memo
    }

    pub fn stats(&self) -> StatsSnapshot {
        StatsSnapshot {
            memo_hits: self.memo_hits.load(Ordering::Relaxed),
            memo_size: self.memo.len() as u64,
            nodes_computed: self.nodes.load(Ordering::Relaxed),
            splittings_enumerated: self.splittings.load(Ordering::Relaxed),
        }
    }

    pub fn evaluate0(&self, class: DivisorClass, alpha: &TangencyVector, beta: &TangencyVector) -> Result<BigUint> {
        let q = Quadruple::new(class, 0, alpha.clone(), beta.clone());
        q.ensure_weight()?;
        self.node(&q)
    }

    pub fn evaluate(&self, q: &Quadruple) -> Result<BigUint> {
        if q.genus != 0 {
            return Err(Error::Validation(format!("{q}: the genus-zero engine needs g = 0")));
        }
        self.evaluate0(q.class, &q.alpha, &q.beta)
    }

    fn node(&self, q: &Quadruple) -> Result<BigUint> {
        let q = q.canonical();
        if self.memoize {
            if let Some(v) = self.memo.get(&q) {
                self.memo_hits.fetch_add(1, Ordering::Relaxed);
                return Ok(v);
            }
        }
        let v = self.compute(&q)?;
        if self.memoize {
            self.memo.put(q, v.clone())?;
        }
        Ok(v)
    }

    fn compute(&self, q: &Quadruple) -> Result<BigUint> {
        if let Some(v) = q.base_value() {
            return Ok(v);
        }
        if q.r_dim() < 0 || q.class.arith_genus() < 0 {
            return Ok(BigUint::zero());
        }
        self.nodes.fetch_add(1, Ordering::Relaxed);
        let mut total = Rational::zero();
        for (j, _) in q.beta.iter() {
            let e = TangencyVector::unit(j);
            let child = Quadruple::new(q.class, 0, q.alpha.add(&e), q.beta.checked_sub(&e).expect("beta_j > 0"));
            total += Rational::from_integer(self.node(&child)? * j);
        }
        let splittings = zero_splittings(q);
        self.splittings.fetch_add(splittings.len() as u64, Ordering::Relaxed);
        for s in &splittings {
            total += self.term(q, s)?;
        }
        if !total.is_integer() {
            return Err(Error::Assertion(format!("{q}: genus-zero total {total} is not an integer")));
        }
        Ok(total.to_integer())
    }

    fn term(&self, q: &Quadruple, s: &ZeroSplitting) -> Result<Rational> {
        let n = q.r_dim();
        let ns: Vec<i64> = s.parts.iter().map(ZeroPart::n).collect();
        if ns.iter().sum::<i64>() + s.beta0.norm() as i64 != n - 1 {
            return Err(Error::Assertion(format!("{q}: dimension identity fails for {s:?}")));
        }
        let mut num = (BigUint::one() << s.beta0.norm()) * s.beta0.weight_power();
        num *= binomial(s.k as u64 + 3, 3);
        num *= q.alpha.factorial();
        num *= factorial((n - 1) as u64);
        let mut den = s.beta0.factorial() * s.alpha0.factorial();
        let mut alpha_rest = q.alpha.checked_sub(&s.alpha0).expect("alpha0 <= alpha");
        for (p, &n_i) in s.parts.iter().zip(&ns) {
            den *= p.alpha.factorial() * factorial(n_i as u64);
            alpha_rest = alpha_rest.checked_sub(&p.alpha).expect("alpha parts bounded");
            let gamma = TangencyVector::unit(p.gamma);
            num *= vec_binom(&p.beta, &gamma)? * p.gamma;
        }
        den *= alpha_rest.factorial();
        den *= BigUint::from(symmetry_order(&s.parts));
        if num.is_zero() {
            return Ok(Rational::zero());
        }
        for p in &s.parts {
            let v = self.node(&p.quadruple())?;
            if v.is_zero() {
                return Ok(Rational::zero());
            }
            num *= v;
        }
        Ok(Ratio::new(num, den))
    }
}

fn symmetry_order(parts: &[ZeroPart]) -> u64 {
    let mut counts: BTreeMap<&ZeroPart, u64> = BTreeMap::new();
    for p in parts {
        *counts.entry(p).or_default() += 1;
    }
    counts.values().map(|&c| (1..=c).product::<u64>()).product()
}

/// Every genus-zero degeneration of `q`.
pub fn zero_splittings(q: &Quadruple) -> Vec<ZeroSplitting> {
    let mut out = Vec::new();
    for t in 0..=(q.class.d - 2) {
        let rest = q.class - DivisorClass::conic() - t * DivisorClass::pencil();
        if rest.d < 0 || rest.d6() < 0 {
            continue;
        }
        let class_lists = class_multisets(&rest);
        if class_lists.is_empty() {
            continue;
        }
        let t = t as u64;
        for alpha0 in bounded_sub_vectors(&q.alpha, t) {
            let alpha_avail = q.alpha.checked_sub(&alpha0).expect("sub-vector");
            for beta0 in bounded_sub_vectors(&q.beta, t - alpha0.weight()) {
                let k = (t - alpha0.weight() - beta0.weight()) as u32;
                let beta_need = q.beta.checked_sub(&beta0).expect("sub-vector");
                for classes in &class_lists {
                    let mut acc = Vec::new();
                    let slack = contact_slack(classes);
                    decorate(classes, &slack, 0, &alpha_avail, &beta_need, &mut acc, &mut |parts| {
                        out.push(ZeroSplitting {
                            k,
                            alpha0: alpha0.clone(),
                            beta0: beta0.clone(),
                            parts: parts.to_vec(),
                        })
                    });
                }
            }
        }
    }
    out.sort();
    out
}

fn allowed_class(c: &DivisorClass) -> bool {
    if c.d == 0 {
        return matches!(c.exceptional_multiple(), Some((_, 1)));
    }
    if c.mult.iter().any(|&x| x < 0 || x > c.d) || c.e_degree() < 1 {
        return false;
    }
    if c.pencil_multiple().is_some() {
        return false;
    }
    let through_two = c.d6() == c.d && {
        let mut m = c.mult[..5].to_vec();
        m.sort_unstable();
        m == [0, 0, 0, 0, c.d]
    };
    !(through_two && c.d >= 2)
}

/// Non-increasing lists of allowed classes summing to `target`; the empty
/// list when `target = 0`.
fn class_multisets(target: &DivisorClass) -> Vec<Vec<DivisorClass>> {
    fn rec(rem: DivisorClass, max: Option<DivisorClass>, cur: &mut Vec<DivisorClass>, out: &mut Vec<Vec<DivisorClass>>) {
        if rem.is_zero() {
            out.push(cur.clone());
            return;
        }
        if rem.d < 0 || rem.d6() < 0 || rem.e_degree() < 1 {
            return;
        }
        let mut candidates: Vec<DivisorClass> = (1..=5).map(DivisorClass::exceptional).collect();
        for d in 1..=rem.d {
            let mut partial = vec![DivisorClass::new(d, [0; 6])];
            for j in 0..6 {
                // Later exceptional parts can only raise coordinate j, so a
                // curve may take up to `d` there whatever `rem` says.
                let cap = if j == 5 { d.min(rem.mult[j]) } else { d };
                partial = partial
                    .into_iter()
                    .flat_map(|c| {
                        (0..=cap).map(move |x| {
                            let mut c = c;
                            c.mult[j] = x;
                            c
                        })
                    })
                    .collect();
            }
            candidates.extend(partial);
        }
        for c in candidates {
            if max.is_some_and(|m| c > m) || !allowed_class(&c) {
                continue;
            }
            // An `E_j` component is forced to `(0, e1)` with `n = 0`, so (iv)
            // admits it at most once.
            if c.d == 0 && max == Some(c) {
                continue;
            }
            let next = rem - c;
            // Coordinates 1..5 of what is left must be reachable: a curve
            // part has `d_j <= d`, an `E_j` part lowers `d_j` by one.
            if next.d < 0 || (1..=5).any(|j| next.mult[j - 1] > next.d) {
                continue;
            }
            cur.push(c);
            rec(next, Some(c), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(*target, None, &mut Vec::new(), &mut out);
    out
}

/// Assigns `(alpha_i, beta_i, gamma_i)` to each class, non-increasing among
/// equal classes, with `sum alpha_i <= alpha` and `sum (beta_i - e_gamma_i) = beta`.
fn decorate(
    classes: &[DivisorClass],
    slack: &[u64],
    i: usize,
    alpha: &TangencyVector,
    beta: &TangencyVector,
    acc: &mut Vec<ZeroPart>,
    emit: &mut dyn FnMut(&[ZeroPart]),
) {
    if beta.weight() > slack[i] {
        return;
    }
    if i == classes.len() {
        if beta.is_zero() && rigid_triples_distinct(acc) {
            emit(acc);
        }
        return;
    }
    let c = classes[i];
    let degree = c.e_degree() as u64;
    for a in bounded_sub_vectors(alpha, degree - 1) {
        for delta in bounded_sub_vectors(beta, degree - 1 - a.weight()) {
            let gamma = (degree - a.weight() - delta.weight()) as u32;
            let part = ZeroPart {
                class: c,
                alpha: a.clone(),
                beta: delta.add(&TangencyVector::unit(gamma)),
                gamma,
            };
            if part.n() < 0 {
                continue;
            }
            if i > 0 && classes[i - 1] == c && part > acc[i - 1] {
                continue;
            }
            let alpha2 = alpha.checked_sub(&a).expect("bounded");
            let beta2 = beta.checked_sub(&delta).expect("bounded");
            acc.push(part);
            decorate(classes, slack, i + 1, &alpha2, &beta2, acc, emit);
            acc.pop();
        }
    }
}

/// `slack[i]`: the largest weight of unglued moving contacts that parts
/// `i..` can absorb, `sum (D_j.E - 1)`.
fn contact_slack(classes: &[DivisorClass]) -> Vec<u64> {
    let mut slack = vec![0u64; classes.len() + 1];
    for i in (0..classes.len()).rev() {
        slack[i] = slack[i + 1] + classes[i].e_degree() as u64 - 1;
    }
    slack
}

/// At most one part per `(D, beta)` among the parts with `n = 0`.
fn rigid_triples_distinct(parts: &[ZeroPart]) -> bool {
    let mut seen = std::collections::BTreeSet::new();
    parts
        .iter()
        .filter(|p| p.n() == 0)
        .all(|p| seen.insert((p.class, p.beta.clone())))
}
