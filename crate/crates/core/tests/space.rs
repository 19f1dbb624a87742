mod common;

use std::collections::BTreeSet;

use common::{chain_heights, pt, relation, rng, separates};
use proptest::prelude::*;
use scattered_forge::gen::{random_frame, random_order};
use scattered_forge::io::{self, OrderFile};
use scattered_forge::space::{
    cardinal_sequence, cb_derive, cb_derive_exhaustive, cover_reduction, generate_topology, separate, verify_levels,
    Subbase, Witness,
};
use scattered_forge::Universe;

fn load(name: &str) -> OrderFile {
    io::load(&common::fixture(name)).unwrap()
}

#[test]
fn p_a_topology_is_the_power_set() {
    let top = generate_topology(&load("p_a.json").order).unwrap();
    assert_eq!(top.open_sets().count(), 8);
}

#[test]
fn p_a_sequence_and_levels() {
    let ord = load("p_a.json").order;
    assert_eq!(cardinal_sequence(&ord).sizes, vec![2, 1]);
    let a = cb_derive(&ord);
    assert_eq!(a.levels[0], BTreeSet::from([pt(0, 0), pt(1, 0)]));
    assert_eq!(a.levels[1], BTreeSet::from([pt(0, 1)]));
    assert_eq!(verify_levels(&ord), Ok(()));
}

#[test]
fn fixtures_identify_levels() {
    for name in ["p_a.json", "chain3.json", "diamond.json"] {
        assert_eq!(verify_levels(&load(name).order), Ok(()), "{name}");
    }
}

#[test]
fn p_a_separation_uses_a_complement() {
    let ord = load("p_a.json").order;
    let s = separate(&ord, pt(0, 0), pt(1, 0)).unwrap();
    assert_eq!(s.witness, Witness::Complement(pt(1, 0)));
    assert_eq!(s.set, BTreeSet::from([pt(0, 0), pt(0, 1)]));
    let t = separate(&ord, pt(0, 0), pt(0, 1)).unwrap();
    assert_eq!(t.witness, Witness::DownSet(pt(0, 0)));
}

#[test]
fn cover_on_fixtures() {
    let f = load("p_a.json").frame();
    let w = cover_reduction(&f.order, &f.barriers, pt(0, 1), &BTreeSet::new(), &BTreeSet::from([pt(0, 0)])).unwrap();
    assert_eq!(w, BTreeSet::from([pt(0, 0)]));
    let d = load("diamond.json").frame();
    let w = cover_reduction(&d.order, &d.barriers, pt(0, 1), &BTreeSet::new(), &BTreeSet::from([pt(1, 1)])).unwrap();
    assert_eq!(w, BTreeSet::from([pt(0, 0), pt(1, 0)]));
}

#[test]
fn exhaustive_derivation_matches_on_small_orders() {
    let u = Universe::new(3, 3, 1).unwrap();
    let mut r = rng(17);
    for _ in 0..100 {
        let ord = random_order(&mut r, u, 6, 0.5);
        let fast = cb_derive(&ord);
        let slow = cb_derive_exhaustive(&ord, Subbase::DownSets, 16).unwrap();
        assert_eq!(fast, slow);
    }
}

proptest! {
    #[test]
    fn rank_is_longest_chain(seed in any::<u64>(), n in 0usize..14, density in 0.0f64..0.9) {
        let u = Universe::new(4, 5, 1).unwrap();
        let ord = random_order(&mut rng(seed), u, n, density);
        let a = cb_derive(&ord);
        prop_assert!(a.residue.is_empty());
        let chains = chain_heights(ord.points(), &relation(&ord));
        for p in ord.points() {
            prop_assert_eq!(a.ranks[p], chains[p]);
            prop_assert!(a.ranks[p] <= p.beta);
        }
    }

    #[test]
    fn separation_is_total(seed in any::<u64>(), n in 2usize..10) {
        let u = Universe::new(3, 4, 1).unwrap();
        let ord = random_order(&mut rng(seed), u, n, 0.5);
        let rel = relation(&ord);
        for &x in ord.points() {
            for &y in ord.points() {
                if x != y {
                    let s = separate(&ord, x, y).unwrap();
                    prop_assert!(separates(ord.points(), &rel, x, y, &s.set));
                }
            }
        }
    }

    #[test]
    fn cover_reduction_is_exhaustively_sound(seed in any::<u64>(), n in 1usize..9) {
        let u = Universe::new(3, 4, 1).unwrap();
        let f = random_frame(&mut rng(seed), u, n, 0.5);
        let pts = f.order.points().to_vec();
        let x = pts[pts.len() - 1];
        let negatives: BTreeSet<_> = pts.iter().copied().filter(|&p| !f.order.le(x, p) && (p.alpha + p.beta) % 2 == 0).collect();
        prop_assert!(cover_reduction(&f.order, &f.barriers, x, &BTreeSet::new(), &negatives).is_ok());
    }
}
