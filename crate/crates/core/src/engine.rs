//! The memoized evaluator for `N(D, g, alpha, beta)`.
//!
//! A node is resolved by the first matching rule:
//!
//! 1. `g < 0` gives 0;
//! 2. the special family `(s(L-E6), 0, 0, 2e_s)` gives 1;
//! 3. `R < 0` gives 0;
//! 4. `R = 0` is looked up in the initial-value table;
//! 5. `g` above the arithmetic genus gives 0;
//! 6. otherwise the recursion: a first sum lowering one moving contact to a
//!    fixed one, plus a second sum over the splittings of [`crate::splitter`].
//!
//! The table lookup precedes the genus bound because several table entries
//! (`sE_i` for `s >= 2`, multiples of `L - E6`) have negative arithmetic genus.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{binomial, factorial};
use crate::cache::{EngineKind, MemoCache};
use crate::error::{Error, Result};
use crate::picard::DivisorClass;
use crate::quadruple::Quadruple;
use crate::splitter::{enumerate_splittings, GenusOffset, Part, Splitting};
use crate::tangency::{vec_binom, vec_multinom, TangencyVector};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum AssertionLevel {
    /// Dimension identity and integrality only.
    #[default]
    Standard,
    /// Also checks that every recursive call decreases `(d, |beta|)`.
    Full,
}

#[derive(Clone, Debug)]
pub struct EvalConfig {
    pub genus_offset: GenusOffset,
    /// Sort `(d1..d5)` before memo lookups.
    pub canonicalize: bool,
    /// Off only for memo-soundness experiments.
    pub memoize: bool,
    pub parallel: bool,
    pub assertions: AssertionLevel,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            genus_offset: GenusOffset::Corrected,
            canonicalize: true,
            memoize: true,
            parallel: false,
            assertions: if cfg!(debug_assertions) { AssertionLevel::Full } else { AssertionLevel::Standard },
        }
    }
}

#[derive(Debug, Default)]
pub struct Stats {
    pub memo_hits: AtomicU64,
    pub nodes_computed: AtomicU64,
    pub splittings_enumerated: AtomicU64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct StatsSnapshot {
    pub memo_hits: u64,
    pub memo_size: u64,
    pub nodes_computed: u64,
    pub splittings_enumerated: u64,
}

type Rational = Ratio<BigUint>;

pub struct Engine {
    cfg: EvalConfig,
    memo: Arc<MemoCache>,
    stats: Stats,
}

impl Engine {
    pub fn new(cfg: EvalConfig) -> Self {
        let memo = Arc::new(MemoCache::new(EngineKind::General, cfg.genus_offset));
        Engine { cfg, memo, stats: Stats::default() }
    }

    /// Uses an existing memo table, which must have been built with the same
    /// engine kind and genus offset.
    pub fn with_memo(cfg: EvalConfig, memo: Arc<MemoCache>) -> Result<Self> {
        if memo.engine() != EngineKind::General || memo.offset() != cfg.genus_offset {
            return Err(Error::CacheMismatch(format!(
                "memo is tagged engine={} offset={}, engine wants general/{}",
                memo.engine().tag(),
                memo.offset().tag(),
                cfg.genus_offset.tag()
            )));
        }
        Ok(Engine { cfg, memo, stats: Stats::default() })
    }

    pub fn config(&self) -> &EvalConfig {
        &self.cfg
    }

    pub fn memo(&self) -> &Arc<MemoCache> {
        &self.memo
    }

    pub fn stats(&self) -> StatsSnapshot {
        StatsSnapshot {
            memo_hits: self.stats.memo_hits.load(Ordering::Relaxed),
            memo_size: self.memo.len() as u64,
            nodes_computed: self.stats.nodes_computed.load(Ordering::Relaxed),
            splittings_enumerated: self.stats.splittings_enumerated.load(Ordering::Relaxed),
        }
    }

    /// Evaluates a weight-valid query.
    pub fn evaluate(&self, q: &Quadruple) -> Result<BigUint> {
        q.ensure_weight()?;
        self.node(q)
    }

    /// `GW_g(D) = N(D, g, 0, (D.E) e_1)`.
    pub fn gw(&self, class: DivisorClass, genus: i32) -> Result<BigUint> {
        self.evaluate(&Quadruple::gromov_witten(class, genus)?)
    }

    /// `gw(D, g)` for `g = 0..=arith_genus(D)`.
    pub fn genus_table(&self, class: DivisorClass) -> Result<Vec<(i32, BigUint)>> {
        (0..=class.arith_genus().max(0) as i32)
            .map(|g| Ok((g, self.gw(class, g)?)))
            .collect()
    }

    fn node(&self, q: &Quadruple) -> Result<BigUint> {
        let key = if self.cfg.canonicalize { q.canonical() } else { q.clone() };
        if self.cfg.memoize {
            if let Some(v) = self.memo.get(&key) {
                self.stats.memo_hits.fetch_add(1, Ordering::Relaxed);
                return Ok(v);
            }
        }
        let v = self.compute(&key)?;
        if self.cfg.memoize {
            self.memo.put(key, v.clone())?;
        }
        Ok(v)
    }

    fn compute(&self, q: &Quadruple) -> Result<BigUint> {
        if let Some(v) = q.base_value() {
            return Ok(v);
        }
        if q.r_dim() < 0 || q.genus as i64 > q.class.arith_genus() {
            return Ok(BigUint::zero());
        }
        self.stats.nodes_computed.fetch_add(1, Ordering::Relaxed);
        let mut total = BigUint::zero();
        for (j, child) in first_sum_children(q) {
            self.check_descent(q, &child)?;
            total += self.node(&child)? * j;
        }
        let splittings = enumerate_splittings(q, self.cfg.genus_offset)?;
        self.stats
            .splittings_enumerated
            .fetch_add(splittings.len() as u64, Ordering::Relaxed);
        let second = if self.cfg.parallel {
            splittings
                .par_iter()
                .map(|s| self.term(q, s).map(|t| t.value))
                .try_reduce(Rational::zero, |a, b| Ok(a + b))?
        } else {
            let mut acc = Rational::zero();
            for s in &splittings {
                acc += self.term(q, s)?.value;
            }
            acc
        };
        if !second.is_integer() {
            return Err(Error::Assertion(format!("{q}: second sum {second} is not an integer")));
        }
        Ok(total + second.to_integer())
    }

    fn check_descent(&self, parent: &Quadruple, child: &Quadruple) -> Result<()> {
        if self.cfg.assertions != AssertionLevel::Full || child.base_value().is_some() {
            return Ok(());
        }
        let measure = |x: &Quadruple| (x.class.d, x.beta.norm());
        if measure(child) < measure(parent) {
            Ok(())
        } else {
            Err(Error::Assertion(format!("termination measure does not drop: {parent} -> {child}")))
        }
    }

    /// One second-sum term with all of its factors.
    pub fn term(&self, q: &Quadruple, s: &Splitting) -> Result<Term> {
        let n = q.r_dim();
        let ns: Vec<i64> = s.parts.iter().map(Part::n).collect();
        let expected = n - 1 + match self.cfg.genus_offset {
            GenusOffset::Corrected => 0,
            GenusOffset::AsPrinted => -2,
        };
        if ns.iter().sum::<i64>() != expected || ns.iter().any(|&x| x < 0) {
            return Err(Error::Assertion(format!(
                "{q}: dimension identity fails for {} (n_i = {ns:?}, n = {n})",
                s.describe()
            )));
        }
        let alphas: Vec<TangencyVector> = s.parts.iter().map(|p| p.quadruple.alpha.clone()).collect();
        let alpha_multinomial = vec_multinom(&q.alpha, &alphas)?;
        let point_multinomial = ns
            .iter()
            .fold(factorial((n - 1) as u64), |acc, &x| acc / factorial(x as u64));
        let line_factor = binomial(s.k as u64 + 3, 3);
        let symmetry = s.symmetry_order();
        let mut parts = Vec::with_capacity(s.parts.len());
        let mut product = &alpha_multinomial * &point_multinomial * &line_factor;
        for (p, &n_i) in s.parts.iter().zip(&ns) {
            let gluing = if p.glued() {
                vec_binom(&p.quadruple.beta, &p.gamma)? * p.gamma.weight_power()
            } else {
                BigUint::one()
            };
            let value = if product.is_zero() {
                BigUint::zero()
            } else {
                self.check_descent(q, &p.quadruple)?;
                self.node(&p.quadruple)?
            };
            product *= &gluing * &value;
            parts.push(TermPart { key: p.quadruple.key(), gamma: p.gamma.key(), n: n_i, gluing, value });
        }
        Ok(Term {
            k: s.k,
            alpha_multinomial,
            point_multinomial,
            line_factor,
            symmetry,
            parts,
            value: Ratio::new(product, BigUint::from(symmetry)),
        })
    }

    /// The top-level expansion of `q` into its recursion terms.
    pub fn trace(&self, q: &Quadruple) -> Result<Trace> {
        q.ensure_weight()?;
        let q = if self.cfg.canonicalize { q.canonical() } else { q.clone() };
        let value = self.node(&q)?;
        let mut records = Vec::new();
        if let Some(v) = q.base_value() {
            records.push(TraceRecord::Base {
                pattern: q.classify().map(|p| format!("{p:?}")),
                value: v.to_string(),
            });
        } else if q.r_dim() < 0 || q.genus as i64 > q.class.arith_genus() {
            records.push(TraceRecord::Vanishing {
                reason: if q.r_dim() < 0 { "R < 0".into() } else { "genus above arithmetic genus".into() },
            });
        } else {
            for (j, child) in first_sum_children(&q) {
                let v = self.node(&child)?;
                records.push(TraceRecord::FirstSum {
                    j,
                    child: child.key(),
                    child_value: v.to_string(),
                    term: (v * j).to_string(),
                });
            }
            for s in enumerate_splittings(&q, self.cfg.genus_offset)? {
                let t = self.term(&q, &s)?;
                records.push(TraceRecord::Splitting {
                    k: t.k,
                    alpha_multinomial: t.alpha_multinomial.to_string(),
                    point_multinomial: t.point_multinomial.to_string(),
                    line_factor: t.line_factor.to_string(),
                    symmetry: t.symmetry,
                    parts: t
                        .parts
                        .iter()
                        .map(|p| TracePart {
                            key: p.key.clone(),
                            gamma: p.gamma.clone(),
                            n: p.n,
                            gluing: p.gluing.to_string(),
                            value: p.value.to_string(),
                        })
                        .collect(),
                    term: t.value.to_string(),
                });
            }
        }
        Ok(Trace { query: q.key(), value: value.to_string(), records })
    }
}

/// `(j, (D, g, alpha + e_j, beta - e_j))` for every `j` with `beta_j > 0`.
pub fn first_sum_children(q: &Quadruple) -> Vec<(u32, Quadruple)> {
    q.beta
        .iter()
        .map(|(j, _)| {
            let e = TangencyVector::unit(j);
            let child = Quadruple::new(
                q.class,
                q.genus,
                q.alpha.add(&e),
                q.beta.checked_sub(&e).expect("beta_j > 0"),
            );
            (j, child)
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct TermPart {
    pub key: String,
    pub gamma: String,
    pub n: i64,
    pub gluing: BigUint,
    pub value: BigUint,
}

#[derive(Clone, Debug)]
pub struct Term {
    pub k: u32,
    pub alpha_multinomial: BigUint,
    pub point_multinomial: BigUint,
    pub line_factor: BigUint,
    pub symmetry: u64,
    pub parts: Vec<TermPart>,
    pub value: Ratio<BigUint>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TracePart {
    pub key: String,
    pub gamma: String,
    pub n: i64,
    pub gluing: String,
    pub value: String,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceRecord {
    Base {
        pattern: Option<String>,
        value: String,
    },
    Vanishing {
        reason: String,
    },
    FirstSum {
        j: u32,
        child: String,
        child_value: String,
        term: String,
    },
    Splitting {
        k: u32,
        alpha_multinomial: String,
        point_multinomial: String,
        line_factor: String,
        symmetry: u64,
        parts: Vec<TracePart>,
        term: String,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct Trace {
    pub query: String,
    pub value: String,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn first_sum_count(&self) -> usize {
        self.records.iter().filter(|r| matches!(r, TraceRecord::FirstSum { .. })).count()
    }

    pub fn splitting_count(&self) -> usize {
        self.records.iter().filter(|r| matches!(r, TraceRecord::Splitting { .. })).count()
    }

    pub fn render(&self) -> String {
        let mut out = format!("query {}\nvalue {}\n", self.query, self.value);
        for r in &self.records {
            match r {
                TraceRecord::Base { pattern, value } => {
                    out += &format!("base {} = {value}\n", pattern.as_deref().unwrap_or("none"));
                }
                TraceRecord::Vanishing { reason } => out += &format!("zero ({reason})\n"),
                TraceRecord::FirstSum { j, child, child_value, term } => {
                    out += &format!("first j={j} {child} = {child_value} -> {term}\n");
                }
                TraceRecord::Splitting {
                    k,
                    alpha_multinomial,
                    point_multinomial,
                    line_factor,
                    symmetry,
                    parts,
                    term,
                } => {
                    out += &format!(
                        "split k={k} alpha={alpha_multinomial} points={point_multinomial} lines={line_factor} sigma={symmetry} -> {term}\n"
                    );
                    for p in parts {
                        out += &format!(
                            "  part {} gamma={} n={} glue={} value={}\n",
                            p.key, p.gamma, p.n, p.gluing, p.value
                        );
                    }
                }
            }
        }
        out
    }
}
