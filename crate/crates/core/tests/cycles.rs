mod common;

use std::collections::HashSet;

use anyk_core::dioid::{MinSum, TieBreak};
use anyk_core::enumerate::{drain, Options};
use anyk_core::relational::{Database, QuerySpec};
use anyk_core::union::{decompose_simple_cycle, UnionEnumerator};
use anyk_core::{Algorithm, RankedEnumerator, SelectiveDioid};
use common::Close;
use proptest::prelude::*;
use rand::Rng;

fn base_weight(q: &QuerySpec, db: &Database, witness: &[u32]) -> f64 {
    q.atoms().iter().zip(witness).map(|(a, &t)| db.get(&a.relation).unwrap().weight(t as usize)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn union_weights_are_base_weights(
        l in prop_oneof![Just(4usize), Just(5), Just(6)],
        n in 2usize..=40,
        seed in any::<u64>(),
    ) {
        let mut rng = common::rng(seed);
        let domain = (n as u64 / rng.random_range(2..=4)).max(2);
        let db = common::cycle_database(l, n, domain, &mut rng);
        let q = QuerySpec::cycle(l);
        let plan = decompose_simple_cycle(&q, &db, &MinSum).unwrap();
        let mut e = UnionEnumerator::new(&plan, Algorithm::Lazy, Options::default()).unwrap();
        let out = drain(&mut e, None);
        for s in &out {
            prop_assert!(s.weight.close(&base_weight(&q, &db, &s.witness)));
        }
        common::same_as_oracle(&q, &db, &MinSum, &out).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn tie_broken_union_has_no_repeats(l in prop_oneof![Just(4usize), Just(6)], n in 2usize..=30, seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let db = common::cycle_database(l, n, (n as u64 / 3).max(2), &mut rng);
        let q = QuerySpec::cycle(l);
        let d = TieBreak::new(MinSum, l);
        let plan = decompose_simple_cycle(&q, &db, &d).unwrap();
        let out = drain(&mut UnionEnumerator::new(&plan, Algorithm::Take2, Options::default()).unwrap(), None);
        let distinct: HashSet<&Vec<u32>> = out.iter().map(|s| &s.witness).collect();
        prop_assert_eq!(distinct.len(), out.len());
        prop_assert!(out.windows(2).all(|p| d.base().less(&p[0].weight.0, &p[1].weight.0) || p[0].weight.0.close(&p[1].weight.0)));
    }
}

#[test]
fn bags_stay_below_the_size_bound() {
    let mut rng = common::rng(41);
    for l in [4usize, 6] {
        for n in [1000usize, 4000] {
            let db = common::cycle_database(l, n, (n / 4) as u64, &mut rng);
            let plan = decompose_simple_cycle(&QuerySpec::cycle(l), &db, &MinSum).unwrap();
            let bound = 4.0 * (n as f64).powf(2.0 - 2.0 / l as f64);
            for m in &plan.members {
                for &size in &m.bag_sizes {
                    assert!((size as f64) <= bound, "l={l} n={n}: bag of {size} > {bound}");
                }
            }
            assert_eq!(plan.members.len(), l + 1);
        }
    }
}

#[test]
fn first_answer_of_each_member_is_its_best() {
    let mut rng = common::rng(43);
    let db = common::cycle_database(4, 200, 40, &mut rng);
    let plan = decompose_simple_cycle(&QuerySpec::cycle(4), &db, &MinSum).unwrap();
    let mut e = UnionEnumerator::new(&plan, Algorithm::Take2, Options::default()).unwrap();
    let first = e.next_solution().unwrap();
    let best = plan.members.iter().filter_map(|m| m.instance.best_weight().copied()).fold(f64::INFINITY, f64::min);
    assert_eq!(first.weight, best);
}
