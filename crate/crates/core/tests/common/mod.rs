//! Brute-force oracles. They work on plain point and pair sets and share no
//! code with the library beyond reading an order's relation.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scattered_forge::amalgam::OrderIso;
use scattered_forge::symsys::{Ordinal, SymSystem};
use scattered_forge::{HeightedOrder, Point};

pub type Rel = BTreeSet<(Point, Point)>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn pt(a: u32, b: u32) -> Point {
    Point::new(a, b)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Every pair `(x, y)` with `x ⊴ y`, read off point by point.
pub fn relation(ord: &HeightedOrder) -> Rel {
    let pts = ord.points();
    let mut rel = Rel::new();
    for &x in pts {
        for &y in pts {
            if ord.le(x, y) {
                rel.insert((x, y));
            }
        }
    }
    rel
}

/// Names the first failing axiom, if any.
pub fn partial_order_failure(points: &[Point], rel: &Rel) -> Option<String> {
    for &x in points {
        if !rel.contains(&(x, x)) {
            return Some(format!("not reflexive at {x}"));
        }
    }
    for &(x, y) in rel {
        if x != y && rel.contains(&(y, x)) {
            return Some(format!("{x} and {y} related both ways"));
        }
        for &z in points {
            if rel.contains(&(y, z)) && !rel.contains(&(x, z)) {
                return Some(format!("{x} ⊴ {y} ⊴ {z} but not {x} ⊴ {z}"));
            }
        }
    }
    None
}

/// The four amalgamation clauses applied pair by pair.
pub fn literal_amalgam(o1: &HeightedOrder, o2: &HeightedOrder, psi: &OrderIso) -> Rel {
    let d1: BTreeSet<Point> = o1.points().iter().copied().collect();
    let d2: BTreeSet<Point> = o2.points().iter().copied().collect();
    let common: Vec<Point> = d1.intersection(&d2).copied().collect();
    let all: BTreeSet<Point> = d1.union(&d2).copied().collect();
    let mut rel = Rel::new();
    for &x in &all {
        for &y in &all {
            let (x1, x2, y1, y2) = (d1.contains(&x), d2.contains(&x), d1.contains(&y), d2.contains(&y));
            let holds = (x1 && y1 && o1.le(x, y))
                || (x2 && y2 && o2.le(x, y))
                || (x1 && !x2 && y2 && !y1 && o2.le(psi.apply(x).unwrap(), y))
                || (x2 && !x1 && y1 && !y2 && common.iter().any(|&w| o2.le(x, w) && o1.le(w, y)));
            if holds {
                rel.insert((x, y));
            }
        }
    }
    rel
}

pub fn cone(rel: &Rel, x: Point) -> BTreeSet<Point> {
    rel.iter().filter(|&&(_, b)| b == x).map(|&(a, _)| a).collect()
}

/// `set` lies below both points and dominates every common lower bound.
pub fn barrier_holds(rel: &Rel, x: Point, y: Point, set: &BTreeSet<Point>) -> bool {
    let common: BTreeSet<Point> = cone(rel, x).intersection(&cone(rel, y)).copied().collect();
    set.is_subset(&common) && common.iter().all(|&z| set.iter().any(|&b| rel.contains(&(z, b))))
}

/// Number of strict steps in the longest chain ending at each point.
pub fn chain_heights(points: &[Point], rel: &Rel) -> BTreeMap<Point, u32> {
    let mut h: BTreeMap<Point, u32> = points.iter().map(|&p| (p, 0)).collect();
    // relaxation; at most |points| rounds since the order is acyclic
    for _ in 0..points.len() {
        for &(a, b) in rel {
            if a != b && h[&b] < h[&a] + 1 {
                h.insert(b, h[&a] + 1);
            }
        }
    }
    h
}

/// Covering pairs by the O(n³) definition.
pub fn transitive_reduction(points: &[Point], rel: &Rel) -> Rel {
    let mut out = Rel::new();
    for &(a, b) in rel {
        if a == b {
            continue;
        }
        let between = points
            .iter()
            .any(|&c| c != a && c != b && rel.contains(&(a, c)) && rel.contains(&(c, b)));
        if !between {
            out.insert((a, b));
        }
    }
    out
}

/// `set` holds `x`, misses `y`, and is a cone or the complement of one.
pub fn separates(points: &[Point], rel: &Rel, x: Point, y: Point, set: &BTreeSet<Point>) -> bool {
    let all: BTreeSet<Point> = points.iter().copied().collect();
    let basic = points.iter().any(|&p| {
        let c = cone(rel, p);
        *set == c || *set == all.difference(&c).copied().collect()
    });
    basic && set.contains(&x) && !set.contains(&y)
}

/// The largest `alpha` passing the four gap clauses, found by trying every
/// element of `N` below `i`. `None` for the upper end means no bound.
pub fn gap_oracle(sys: &SymSystem, code: Ordinal, i: Ordinal) -> Option<(Ordinal, Option<Ordinal>)> {
    let n = sys.node(code)?;
    let beta = n.elements.iter().copied().find(|&o| o >= i);
    let below_beta = |o: Ordinal| beta.is_none_or(|b| o < b);
    let outsiders: Vec<_> = sys
        .nodes()
        .filter(|m| m.code != code && !n.elements.contains(&m.code) && m.delta < n.delta)
        .collect();
    n.elements
        .iter()
        .copied()
        .filter(|&a| a < i)
        .filter(|&a| {
            outsiders
                .iter()
                .all(|m| !m.elements.iter().any(|&o| o >= a && below_beta(o) && n.elements.contains(&o)))
        })
        .max()
        .map(|a| (a, beta))
}
