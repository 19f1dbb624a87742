mod common;

use std::collections::BTreeSet;

use common::{barrier_holds, partial_order_failure, pt, relation, rng};
use proptest::prelude::*;
use scattered_forge::gen::{random_frame, random_order};
use scattered_forge::io::{self, OrderFile};
use scattered_forge::order::{
    check_admissible, check_condition_a, check_condition_b, check_partial_order, down_set, is_barrier, minimal_barrier,
};
use scattered_forge::{BarrierMap, HeightedOrder, Universe, Violation};

fn p_a() -> OrderFile {
    io::load(&common::fixture("p_a.json")).unwrap()
}

#[test]
fn p_a_cone_and_barriers() {
    let f = p_a();
    let (a, b, x) = (pt(0, 0), pt(1, 0), pt(0, 1));
    assert_eq!(down_set(&f.order, x).unwrap(), BTreeSet::from([a, b, x]));
    assert!(is_barrier(&f.order, a, x, &BTreeSet::from([a])).is_ok());
    assert!(is_barrier(&f.order, a, b, &BTreeSet::from([a])).is_err());
    check_admissible(&f.order, f.barriers.as_ref().unwrap()).unwrap();
}

#[test]
fn diamond_barrier_is_both_bottoms() {
    let f: OrderFile = io::load(&common::fixture("diamond.json")).unwrap();
    let got = minimal_barrier(&f.order, pt(0, 1), pt(1, 1)).unwrap();
    assert_eq!(got, BTreeSet::from([pt(0, 0), pt(1, 0)]));
}

#[test]
fn antisymmetry_break_is_reported_with_its_pair() {
    let f: OrderFile = io::load(&common::fixture("antisym_break.json")).unwrap();
    assert!(matches!(
        check_partial_order(&f.order),
        Err(Violation::NotAntisymmetric(..))
    ));
}

#[test]
fn fanout_shortfall_names_the_level() {
    let f = p_a();
    let ord = f.order.with_universe(Universe::new(2, 2, 3).unwrap()).unwrap();
    match check_condition_b(&ord) {
        Err(Violation::FanoutShort { found, required, .. }) => assert_eq!((found, required), (2, 3)),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn minimal_barriers_pass_the_oracle_exhaustively() {
    let u = Universe::new(3, 4, 1).unwrap();
    let mut r = rng(5);
    for _ in 0..200 {
        let ord = random_order(&mut r, u, 9, 0.5);
        let rel = relation(&ord);
        let pts = ord.points();
        for (i, &x) in pts.iter().enumerate() {
            for &y in &pts[i + 1..] {
                let b = minimal_barrier(&ord, x, y).unwrap();
                assert!(barrier_holds(&rel, x, y, &b), "{x} {y} {b:?}");
            }
        }
    }
}

proptest! {
    #[test]
    fn generated_orders_are_partial_orders(seed in any::<u64>(), n in 0usize..12, density in 0.0f64..1.0) {
        let u = Universe::new(4, 4, 1).unwrap();
        let ord = random_order(&mut rng(seed), u, n, density);
        let rel = relation(&ord);
        prop_assert_eq!(partial_order_failure(ord.points(), &rel), None);
        prop_assert!(check_partial_order(&ord).is_ok());
        prop_assert!(check_condition_a(&ord).is_ok());
    }

    #[test]
    fn checker_agrees_with_oracle_on_arbitrary_relations(pairs in proptest::collection::vec((0usize..5, 0usize..5), 0..10)) {
        let u = Universe::new(5, 1, 1).unwrap();
        let pts: Vec<_> = (0..5).map(|a| pt(a, 0)).collect();
        let ord = HeightedOrder::with_reflexive(u, pts.clone(), pairs.iter().map(|&(i, j)| (pts[i], pts[j]))).unwrap();
        let oracle = partial_order_failure(&pts, &relation(&ord)).is_none();
        prop_assert_eq!(check_partial_order(&ord).is_ok(), oracle);
    }

    #[test]
    fn random_barrier_maps_are_barriers(seed in any::<u64>(), n in 1usize..10) {
        let u = Universe::new(3, 4, 1).unwrap();
        let f = random_frame(&mut rng(seed), u, n, 0.5);
        let rel = relation(&f.order);
        for (k, set) in f.barriers.iter() {
            prop_assert!(barrier_holds(&rel, k.low(), k.high(), set));
        }
        prop_assert_eq!(f.barriers.len(), n * (n - 1) / 2);
    }

    #[test]
    fn order_files_round_trip(seed in any::<u64>(), n in 0usize..10) {
        let u = Universe::new(3, 4, 2).unwrap();
        let f = random_frame(&mut rng(seed), u, n, 0.4);
        let file = OrderFile { order: f.order, barriers: Some(f.barriers) };
        let back: OrderFile = io::from_str(&io::to_string(&file)).unwrap();
        prop_assert_eq!(&back, &file);
        let map: BarrierMap = io::from_str(&io::to_string(file.barriers.as_ref().unwrap())).unwrap();
        prop_assert_eq!(Some(map), file.barriers);
    }
}
