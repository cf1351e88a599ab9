use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigUint;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

use dp6::cache::{EngineKind, MemoCache};
use dp6::engine::{Engine, EvalConfig};
use dp6::genus0::Genus0Engine;
use dp6::oracle::{closed_form_blowup, kontsevich};
use dp6::splitter::{enumerate_splittings, GenusOffset, Part, Splitting};
use dp6::tangency::{bounded_sub_vectors, with_weight};
use dp6::verify::random_quadruple;
use dp6::{DivisorClass, Quadruple, TangencyVector};

fn q(s: &str) -> Quadruple {
    s.parse().unwrap()
}

fn class(s: &str) -> DivisorClass {
    s.parse().unwrap()
}

fn engine() -> Engine {
    Engine::new(EvalConfig::default())
}

#[test]
fn known_values() {
    let e = engine();
    assert_eq!(e.evaluate(&q("L|g=0|a=|b=1:2")).unwrap(), BigUint::from(1u32));
    assert_eq!(e.evaluate(&q("3L|g=0|a=|b=1:6")).unwrap(), kontsevich(3).unwrap());
    assert_eq!(e.gw(class("2L"), 0).unwrap(), BigUint::from(1u32));
    assert_eq!(e.gw(class("6L-2E1-2E2-2E3-2E4-2E5-2E6"), 4).unwrap(), BigUint::from(1u32));
    assert_eq!(e.gw(class("5L"), 0).unwrap(), kontsevich(5).unwrap());
}

#[test]
fn genus_tables() {
    let e = engine();
    let t: Vec<(i32, String)> = e
        .genus_table(class("L"))
        .unwrap()
        .into_iter()
        .map(|(g, v)| (g, v.to_string()))
        .collect();
    assert_eq!(t, [(0, "1".to_string())]);
    let t = e.genus_table(class("3L")).unwrap();
    assert_eq!(t.len(), 2);
    assert_eq!(t[0].1, BigUint::from(12u32));
}

#[test]
fn sixth_point_presentation() {
    let e = engine();
    for n in 0..=3u32 {
        let via_e6 = Quadruple::new(
            class(&format!("{}L-{}E6", n + 2, n)),
            0,
            TangencyVector::zero(),
            TangencyVector::unit_multiple(1, 2 * n + 4),
        );
        assert_eq!(e.evaluate(&via_e6).unwrap(), closed_form_blowup(n), "n={n}");
    }
}

#[test]
fn cold_and_warm_memo_agree() {
    let cold = engine();
    let qs = ["6L-2E1-2E2-2E3-2E4-2E5-2E6|g=1|a=|b=1:2", "4L-2E1|g=0|a=|b=1:6", "4L-E1-E6|g=2|a=1:1|b=1:6"];
    let first: Vec<BigUint> = qs.iter().map(|s| cold.evaluate(&q(s)).unwrap()).collect();
    let text = cold.memo().to_text();
    let memo = MemoCache::from_text(&text, EngineKind::General, GenusOffset::Corrected).unwrap();
    let warm = Engine::with_memo(EvalConfig::default(), Arc::new(memo)).unwrap();
    let second: Vec<BigUint> = qs.iter().map(|s| warm.evaluate(&q(s)).unwrap()).collect();
    assert_eq!(first, second);
    assert_eq!(warm.stats().nodes_computed, 0);
    assert_eq!(warm.memo().to_text(), text);
}

#[test]
fn memo_free_evaluation_agrees() {
    let with = engine();
    let without = Engine::new(EvalConfig { memoize: false, ..EvalConfig::default() });
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..150 {
        let x = random_quadruple(&mut rng);
        assert_eq!(with.evaluate(&x).unwrap(), without.evaluate(&x).unwrap(), "{x}");
    }
    assert!(without.memo().is_empty());
}

#[test]
fn serial_and_parallel_agree() {
    let serial = engine();
    let parallel = Engine::new(EvalConfig { parallel: true, ..EvalConfig::default() });
    let d = class("6L-2E1-2E2-2E3-2E4-2E5-2E6");
    assert_eq!(serial.genus_table(d).unwrap(), parallel.genus_table(d).unwrap());
}

#[test]
fn mismatched_memo_is_rejected() {
    let memo = Arc::new(MemoCache::new(EngineKind::General, GenusOffset::AsPrinted));
    assert!(Engine::with_memo(EvalConfig::default(), memo).is_err());
    let memo = Arc::new(MemoCache::new(EngineKind::General, GenusOffset::Corrected));
    assert!(Genus0Engine::with_memo(memo).is_err());
}

#[test]
fn moving_line_gluing_is_two_s() {
    // A `(s(L-E6), 0, 0, 2e_s)` part glued along `e_s` contributes
    // C(2, 1) * s = 2s, the factor the genus-zero engine folds into beta0.
    let e = engine();
    let mut seen = BTreeSet::new();
    for query in [q("4L-2E6|g=0|a=1:6|b=1:2"), q("4L-2E6|g=0|a=1:6|b=2:1")] {
        for s in enumerate_splittings(&query, GenusOffset::Corrected).unwrap() {
            let t = e.term(&query, &s).unwrap();
            for (p, tp) in s.parts.iter().zip(&t.parts) {
                if let Some(m) = p.quadruple.class.pencil_multiple() {
                    if p.quadruple.is_moving_line_pair() && p.gamma.norm() == 1 {
                        assert_eq!(tp.gluing, BigUint::from(2 * m as u32));
                        seen.insert(m);
                    }
                }
            }
        }
    }
    assert_eq!(seen, BTreeSet::from([1, 2]));
}

#[test]
fn genus0_agrees_on_a_small_grid() {
    let general = engine();
    let zero = Genus0Engine::new();
    for s in ["3L", "3L-E1", "4L-E1-E2-E6", "4L-2E1-E6", "3L-E6", "2L"] {
        let c = class(s);
        let de = c.e_degree() as u64;
        for wa in 0..=de {
            for a in with_weight(wa) {
                for b in with_weight(de - wa) {
                    let x = Quadruple::new(c, 0, a.clone(), b);
                    assert_eq!(general.evaluate(&x).unwrap(), zero.evaluate(&x).unwrap(), "{x}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permuting_first_five_points(seed in any::<u64>(), perm in Just([0usize, 1, 2, 3, 4]).prop_shuffle()) {
        let e = Engine::new(EvalConfig { canonicalize: false, ..EvalConfig::default() });
        let mut rng = StdRng::seed_from_u64(seed);
        let x = random_quadruple(&mut rng);
        let mut y = x.clone();
        for (i, &j) in perm.iter().enumerate() {
            y.class.mult[i] = x.class.mult[j];
        }
        prop_assert_eq!(e.evaluate(&x).unwrap(), e.evaluate(&y).unwrap());
    }

    #[test]
    fn splittings_are_canonical(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let x = random_quadruple(&mut rng);
        prop_assume!(x.r_dim() > 0 && !x.is_moving_line_pair());
        let all = enumerate_splittings(&x, GenusOffset::Corrected).unwrap();
        prop_assert!(all.windows(2).all(|w| w[0] < w[1]));
        for s in &all {
            let n: i64 = s.parts.iter().map(Part::n).sum();
            prop_assert_eq!(n, x.r_dim() - 1);
        }
    }
}

/// Everything a splitting is required to satisfy, checked on a finished
/// ordered tuple.
fn satisfies_ledger(query: &Quadruple, k: u32, parts: &[Part]) -> bool {
    let target = Splitting::residual_class(&query.class, k);
    let sum = parts.iter().fold(DivisorClass::ZERO, |a, p| a + p.quadruple.class);
    if sum != target {
        return false;
    }
    let alpha = parts.iter().fold(TangencyVector::zero(), |a, p| a.add(&p.quadruple.alpha));
    if !alpha.le(&query.alpha) {
        return false;
    }
    let beta = parts.iter().fold(TangencyVector::zero(), |a, p| a.add(&p.delta()));
    if beta != query.beta {
        return false;
    }
    if parts.iter().any(|p| p.quadruple.genus > p.quadruple.class.arith_genus().max(0) as i32) {
        return false;
    }
    if parts.iter().map(Part::cost).sum::<i64>() != query.genus as i64 {
        return false;
    }
    let rigid: Vec<&Quadruple> = parts
        .iter()
        .filter(|p| p.n() == 0 && p.quadruple.alpha.is_zero())
        .map(|p| &p.quadruple)
        .collect();
    let distinct: BTreeSet<&Quadruple> = rigid.iter().copied().collect();
    distinct.len() == rigid.len()
}

/// Every admissible decorated part in a coordinate box around the residual.
fn candidate_parts(query: &Quadruple, residual: &DivisorClass) -> Vec<Part> {
    let mut out = Vec::new();
    let hi = residual.d.max(0);
    for d in 0..=hi {
        let mut classes = vec![DivisorClass::new(d, [0; 6])];
        for j in 0..6 {
            classes = classes
                .into_iter()
                .flat_map(|c| {
                    (-1..=hi).map(move |x| {
                        let mut c = c;
                        c.mult[j] = x;
                        c
                    })
                })
                .collect();
        }
        for c in classes {
            let de = c.e_degree();
            if de < 1 {
                continue;
            }
            for a in bounded_sub_vectors(&query.alpha, de as u64) {
                for delta in bounded_sub_vectors(&query.beta, de as u64 - a.weight()) {
                    let w = de as u64 - a.weight() - delta.weight();
                    if w == 0 {
                        continue;
                    }
                    for gamma in with_weight(w) {
                        for g in 0..=query.genus.max(0) {
                            let part = Part {
                                quadruple: Quadruple::new(c, g, a.clone(), delta.add(&gamma)),
                                gamma: gamma.clone(),
                            };
                            if part.quadruple.admissible_summand() {
                                out.push(part);
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn brute_force(query: &Quadruple) -> BTreeSet<Splitting> {
    let mut found = BTreeSet::new();
    for k in 0..=(query.class.d - 2).max(0) as u32 {
        let residual = Splitting::residual_class(&query.class, k);
        if residual.d < 0 {
            continue;
        }
        let degree = residual.e_degree();
        if residual.is_zero() {
            if satisfies_ledger(query, k, &[]) {
                found.insert(Splitting { k, parts: vec![] });
            }
            continue;
        }
        if degree < 1 {
            continue;
        }
        let mut by_class: BTreeMap<DivisorClass, Vec<Part>> = BTreeMap::new();
        for p in candidate_parts(query, &residual) {
            by_class.entry(p.quadruple.class).or_default().push(p);
        }
        let classes: Vec<DivisorClass> = by_class.keys().copied().collect();
        // Class multisets summing to the residual, then every multiset of
        // decorations on each class. Prefixes are cut only on quantities
        // that can never decrease as parts are added.
        fn class_sets(
            classes: &[DivisorClass],
            from: usize,
            left: i64,
            d_left: i32,
            cur: &mut Vec<DivisorClass>,
            out: &mut Vec<Vec<DivisorClass>>,
        ) {
            if left == 0 {
                out.push(cur.clone());
                return;
            }
            for (i, c) in classes.iter().enumerate().skip(from) {
                if c.e_degree() <= left && c.d <= d_left {
                    cur.push(*c);
                    class_sets(classes, i, left - c.e_degree(), d_left - c.d, cur, out);
                    cur.pop();
                }
            }
        }
        fn decorate(
            query: &Quadruple,
            by_class: &BTreeMap<DivisorClass, Vec<Part>>,
            classes: &[DivisorClass],
            from: usize,
            cur: &mut Vec<Part>,
            emit: &mut dyn FnMut(&[Part]),
        ) {
            let Some((c, rest)) = classes.split_first() else {
                emit(cur);
                return;
            };
            let same_as_prev = cur.last().is_some_and(|p| p.quadruple.class == *c);
            let skip = if same_as_prev { from } else { 0 };
            for (i, p) in by_class[c].iter().enumerate().skip(skip) {
                cur.push(p.clone());
                let alpha = cur.iter().fold(TangencyVector::zero(), |a, p| a.add(&p.quadruple.alpha));
                let beta = cur.iter().fold(TangencyVector::zero(), |a, p| a.add(&p.delta()));
                let cost: i64 = cur.iter().map(Part::cost).sum();
                if alpha.le(&query.alpha) && beta.le(&query.beta) && cost <= query.genus as i64 {
                    decorate(query, by_class, rest, i, cur, emit);
                }
                cur.pop();
            }
        }
        let mut sets = Vec::new();
        class_sets(&classes, 0, degree, residual.d, &mut Vec::new(), &mut sets);
        for set in sets {
            let sum = set.iter().fold(DivisorClass::ZERO, |a, c| a + *c);
            if sum != residual {
                continue;
            }
            decorate(query, &by_class, &set, 0, &mut Vec::new(), &mut |parts| {
                if satisfies_ledger(query, k, parts) {
                    let mut sorted = parts.to_vec();
                    sorted.sort();
                    found.insert(Splitting { k, parts: sorted });
                }
            });
        }
    }
    found
}

#[test]
fn splitter_matches_brute_force_for_small_degree() {
    let mut checked = 0;
    let mut nonempty = 0;
    for d in 2..=3 {
        for m1 in 0..=1 {
            for m2 in 0..=m1 {
                for m3 in -1..=m2.min(0) {
                    for d6 in 0..=1 {
                        let c = DivisorClass::new(d, [m1, m2, m3, 0, 0, d6]);
                        let de = c.e_degree();
                        for g in 0..=c.arith_genus().clamp(0, 1) as i32 {
                            for wa in 0..=de as u64 {
                                for a in with_weight(wa) {
                                    for b in with_weight(de as u64 - wa) {
                                        let x = Quadruple::new(c, g, a.clone(), b);
                                        if x.r_dim() <= 0 || x.is_moving_line_pair() {
                                            continue;
                                        }
                                        let fast: BTreeSet<Splitting> =
                                            enumerate_splittings(&x, GenusOffset::Corrected)
                                                .unwrap()
                                                .into_iter()
                                                .collect();
                                        let slow = brute_force(&x);
                                        assert_eq!(fast, slow, "{x}");
                                        checked += 1;
                                        nonempty += usize::from(!fast.is_empty());
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    assert!(checked > 100 && nonempty > 20, "{checked} queries, {nonempty} nonempty");
}

#[test]
fn splitting_data_is_symmetric() {
    // Permuting E1..E5 in the query permutes the parts; the multiset of
    // coefficient data (k, n_i, gluing, child value) must not change.
    let e = engine();
    let a = q("5L-2E1-E2-E6|g=1|a=1:5|b=1:2");
    let mut b = a.clone();
    b.class.mult = [1, 0, 0, 2, 0, 1];
    let data = |x: &Quadruple| {
        let mut v: Vec<String> = enumerate_splittings(x, GenusOffset::Corrected)
            .unwrap()
            .iter()
            .map(|s| {
                let t = e.term(x, s).unwrap();
                let mut parts: Vec<String> =
                    t.parts.iter().map(|p| format!("{}/{}/{}", p.n, p.gluing, p.value)).collect();
                parts.sort();
                format!("{} {} {}", t.k, parts.join(","), t.value)
            })
            .collect();
        v.sort();
        v
    };
    assert_eq!(data(&a), data(&b));
    assert!(!data(&a).is_empty());
}
