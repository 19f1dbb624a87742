//! Amalgamation of two isomorphic heighted orders and their barrier maps.
//!
//! Given orders on `P1` and `P2` and an isomorphism `psi: P1 -> P2` fixing
//! `P1 ∩ P2`, the amalgam `⊴3` on `P1 ∪ P2` is the unique order with
//!
//! 1. `⊴3 ∩ P1² = ⊴1` and `⊴3 ∩ P2² = ⊴2`;
//! 2. for `x ∈ P1∖P2`, `y ∈ P2∖P1`: `x ⊴3 y` iff `psi(x) ⊴2 y`;
//! 3. for `x ∈ P2∖P1`, `y ∈ P1∖P2`: `x ⊴3 y` iff `x ⊴2 w ⊴1 y` for some
//!    `w ∈ P1 ∩ P2`.
//!
//! When `psi` is progressive (it only raises heights, fixes every point whose
//! height is used by `P2`, and the two barrier maps agree on shared pairs)
//! the barrier maps amalgamate too, either by the recursive `b3` or by the
//! flattened variant `B3` built from canonical sequences.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::order::{check_barrier_map, check_frame, BarrierMap, HeightedOrder, Point};
use crate::violation::Violation;

/// A bijection between two finite point sets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OrderIso {
    forward: BTreeMap<Point, Point>,
    backward: BTreeMap<Point, Point>,
}

impl OrderIso {
    pub fn new<I: IntoIterator<Item = (Point, Point)>>(pairs: I) -> Result<Self> {
        let mut iso = OrderIso::default();
        for (from, to) in pairs {
            if iso.forward.insert(from, to).is_some() {
                return Err(Error::InvalidIso(format!("{from} is mapped twice")));
            }
            if iso.backward.insert(to, from).is_some() {
                return Err(Error::InvalidIso(format!("{to} is hit twice")));
            }
        }
        Ok(iso)
    }

    pub fn identity<'a, I: IntoIterator<Item = &'a Point>>(points: I) -> Self {
        Self::new(points.into_iter().map(|&p| (p, p))).expect("identity is a bijection")
    }

    pub fn apply(&self, p: Point) -> Option<Point> {
        self.forward.get(&p).copied()
    }

    pub fn invert(&self, p: Point) -> Option<Point> {
        self.backward.get(&p).copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.forward.iter().map(|(a, b)| (*a, *b))
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn inverse(&self) -> OrderIso {
        OrderIso {
            forward: self.backward.clone(),
            backward: self.forward.clone(),
        }
    }
}

/// An order with its barrier map: the `(⊴, b, ∅, ∅)` part of a condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub order: HeightedOrder,
    pub barriers: BarrierMap,
}

impl Frame {
    pub fn new(order: HeightedOrder, barriers: BarrierMap) -> Self {
        Frame { order, barriers }
    }

    /// The order with its minimal barriers.
    pub fn canonical(order: HeightedOrder) -> Self {
        let barriers = BarrierMap::canonical(&order);
        Frame { order, barriers }
    }
}

/// Which barrier amalgamation to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierKind {
    /// The recursive `b3`.
    Recursive,
    /// `B3`, assembled from canonical sequences.
    Canonical,
}

impl std::str::FromStr for BarrierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "b3" => Ok(BarrierKind::Recursive),
            "B3" => Ok(BarrierKind::Canonical),
            _ => Err(Error::Malformed(format!("barrier kind must be b3 or B3, got {s:?}"))),
        }
    }
}

/// Checks that `psi` is an order isomorphism from `ord1` onto `ord2` fixing
/// the intersection of the domains.
pub fn check_iso(ord1: &HeightedOrder, ord2: &HeightedOrder, psi: &OrderIso) -> Result<()> {
    if psi.len() != ord1.len() {
        return Err(Error::InvalidIso(format!(
            "maps {} points but the source domain has {}",
            psi.len(),
            ord1.len()
        )));
    }
    for &p in ord1.points() {
        let Some(q) = psi.apply(p) else {
            return Err(Error::InvalidIso(format!("{p} is not mapped")));
        };
        if !ord2.contains(q) {
            return Err(Error::InvalidIso(format!("{p} maps outside the target domain to {q}")));
        }
        if ord2.contains(p) && p != q {
            return Err(Error::InvalidIso(Violation::IntersectionNotFixed(p).to_string()));
        }
    }
    if ord2.len() != ord1.len() {
        return Err(Error::InvalidIso("domains differ in size".into()));
    }
    for &x in ord1.points() {
        for &y in ord1.points() {
            let (px, py) = (psi.apply(x).unwrap(), psi.apply(y).unwrap());
            if ord1.le(x, y) != ord2.le(px, py) {
                return Err(Error::InvalidIso(Violation::NotOrderPreserving(x, y).to_string()));
            }
        }
    }
    Ok(())
}

/// The psi-amalgamation of `ord1` and `ord2`.
///
/// Built as `⊴1 ∪ ⊴2`, plus the pairs from clause (iii), plus the relational
/// composite `⊴2|(P2∖P1 × R) ; ⊴1|(R × P1∖P2)` for clause (iv).
pub fn psi_amalgamate(ord1: &HeightedOrder, ord2: &HeightedOrder, psi: &OrderIso) -> Result<HeightedOrder> {
    if ord1.universe() != ord2.universe() {
        return Err(Error::InvalidInput("orders live in different universes".into()));
    }
    check_iso(ord1, ord2, psi)?;
    let root: Vec<Point> = ord1.points().iter().copied().filter(|p| ord2.contains(*p)).collect();
    let only1: Vec<Point> = ord1.points().iter().copied().filter(|p| !ord2.contains(*p)).collect();
    let only2: Vec<Point> = ord2.points().iter().copied().filter(|p| !ord1.contains(*p)).collect();

    let mut rel: Vec<(Point, Point)> = ord1.pairs().chain(ord2.pairs()).collect();
    for &x in &only1 {
        let px = psi.apply(x).expect("checked iso");
        rel.extend(only2.iter().filter(|&&y| ord2.le(px, y)).map(|&y| (x, y)));
    }
    for &x in &only2 {
        let mids: Vec<Point> = root.iter().copied().filter(|&w| ord2.le(x, w)).collect();
        for &y in &only1 {
            if mids.iter().any(|&w| ord1.le(w, y)) {
                rel.push((x, y));
            }
        }
    }
    let points = ord1.points().iter().chain(ord2.points()).copied();
    HeightedOrder::new(ord1.universe(), points, rel)
}

/// Uniqueness oracle: `candidate` must agree with the defining clauses on
/// every pair of `P1 ∪ P2`.
pub fn verify_amalgam_unique(
    ord1: &HeightedOrder,
    ord2: &HeightedOrder,
    psi: &OrderIso,
    candidate: &HeightedOrder,
) -> Result<()> {
    check_iso(ord1, ord2, psi)?;
    let union: BTreeSet<Point> = ord1.points().iter().chain(ord2.points()).copied().collect();
    for &p in candidate.points() {
        if !union.contains(&p) {
            return Err(Violation::AmalgamDomain(p).into());
        }
    }
    for &p in &union {
        if !candidate.contains(p) {
            return Err(Violation::AmalgamDomain(p).into());
        }
    }
    for &x in &union {
        for &y in &union {
            let (x1, x2) = (ord1.contains(x), ord2.contains(x));
            let (y1, y2) = (ord1.contains(y), ord2.contains(y));
            let expected = if x1 && y1 {
                ord1.le(x, y)
            } else if x2 && y2 {
                ord2.le(x, y)
            } else if x1 {
                // x ∈ P1∖P2 or shared, y ∈ P2∖P1; shared x is covered above
                ord2.le(psi.apply(x).expect("checked iso"), y)
            } else {
                ord1.points()
                    .iter()
                    .any(|&w| ord2.contains(w) && ord2.le(x, w) && ord1.le(w, y))
            };
            if candidate.le(x, y) != expected {
                return Err(Violation::AmalgamMismatch(x, y, expected).into());
            }
        }
    }
    Ok(())
}

/// Checks that `psi` is a progressive isomorphism between the two frames.
///
/// Order-isomorphism problems are reported as [`Error::InvalidIso`]; the
/// barrier-carrying requirement and the three progressive clauses as
/// violations.
pub fn is_progressive(f1: &Frame, f2: &Frame, psi: &OrderIso) -> Result<()> {
    let (o1, o2) = (&f1.order, &f2.order);
    check_iso(o1, o2, psi)?;
    let pts = o1.points();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let (u, v) = (pts[i], pts[j]);
            let image: Option<BTreeSet<Point>> = f1
                .barriers
                .get(u, v)
                .map(|b| b.iter().filter_map(|&p| psi.apply(p)).collect());
            let (pu, pv) = (psi.apply(u).unwrap(), psi.apply(v).unwrap());
            if image.as_ref() != f2.barriers.get(pu, pv) {
                return Err(Violation::BarrierNotPreserved(u, v).into());
            }
        }
    }
    let heights2 = o2.heights();
    for &p in pts {
        let q = psi.apply(p).unwrap();
        if q.alpha != p.alpha || q.beta < p.beta {
            return Err(Violation::ProgressiveHeight(p, q).into());
        }
        if heights2.contains(&p.beta) && q != p {
            return Err(Violation::ProgressiveCollision(p).into());
        }
    }
    let shared: Vec<Point> = pts.iter().copied().filter(|&p| o2.contains(p)).collect();
    for i in 0..shared.len() {
        for j in i + 1..shared.len() {
            let (u, v) = (shared[i], shared[j]);
            if f1.barriers.get(u, v) != f2.barriers.get(u, v) {
                return Err(Violation::ProgressiveBarrier(u, v).into());
            }
        }
    }
    for &p in &shared {
        if psi.apply(p) != Some(p) {
            return Err(Violation::IntersectionNotFixed(p).into());
        }
    }
    Ok(())
}

/// The two canonical sequences that flatten the `b3` recursion for a cross
/// pair `{x, y}` with `x ∈ P1∖P2`, `y ∈ P2∖P1`, `y ≠ psi(x)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CanonicalSequences {
    /// Pairs `{x_i, v_i}` whose `b1` barriers are collected. A pair with
    /// `x_i = v_i` is the diagonal leaf `b1({x_i, x_i}) = {x_i}`.
    pub left: Vec<(Point, Point)>,
    /// Pairs `{u_j, y}`: the right leaves with `y_j` replaced by `y`.
    pub right: Vec<(Point, Point)>,
    /// The right leaves `{u_j, y_j}` as the recursion produced them.
    pub right_origins: Vec<(Point, Point)>,
}

struct Amalgamator<'a> {
    f1: &'a Frame,
    f2: &'a Frame,
    psi: &'a OrderIso,
    memo: HashMap<(Point, Point), BTreeSet<Point>>,
}

impl<'a> Amalgamator<'a> {
    fn new(f1: &'a Frame, f2: &'a Frame, psi: &'a OrderIso) -> Self {
        Amalgamator {
            f1,
            f2,
            psi,
            memo: HashMap::new(),
        }
    }

    fn in1(&self, p: Point) -> bool {
        self.f1.order.contains(p)
    }

    fn in2(&self, p: Point) -> bool {
        self.f2.order.contains(p)
    }

    fn b1(&self, x: Point, y: Point) -> BTreeSet<Point> {
        self.f1.barriers.get_or_diagonal(x, y).expect("frame barrier map is total")
    }

    fn b2(&self, x: Point, y: Point) -> BTreeSet<Point> {
        self.f2.barriers.get_or_diagonal(x, y).expect("frame barrier map is total")
    }

    /// The `⊴1`-maximal points of `P1 ∩ P2` below `x`.
    fn shared_below(&self, x: Point) -> Vec<Point> {
        let o1 = &self.f1.order;
        let w: Vec<Point> = o1
            .points()
            .iter()
            .copied()
            .filter(|&p| self.in2(p) && o1.le(p, x))
            .collect();
        w.iter()
            .copied()
            .filter(|&p| !w.iter().any(|&q| q != p && o1.le(p, q)))
            .collect()
    }

    /// The two barrier sets the recursion expands for a cross pair.
    fn expansions(&self, x: Point, y: Point) -> (BTreeSet<Point>, BTreeSet<Point>) {
        let px = self.psi.apply(x).expect("x in source domain");
        let qy = self.psi.invert(y).expect("y in target domain");
        (self.b2(px, y), self.b1(x, qy))
    }

    /// `b3({x, y})` for `x ∈ P1∖P2` and `y ∈ P2∖P1`.
    ///
    /// The recursive calls go to `{x, v}` with `v ⊴2 y` and `{u, y}` with
    /// `u ⊴1 x`, so the height sum drops on every call except when `v = y` or
    /// `u = x`. The term `u = x` is redundant: then `psi(x) ⊴2 y`, so the
    /// other side already yields `b3({x, psi(x)}) = {x}`. The term `v = y`
    /// (that is, `y ⊴2 psi(x)`) must cover the `P2` points below `y` and
    /// below some shared `w ⊴1 x`; it is replaced by `b2({w, y})` over the
    /// maximal such `w`.
    fn cross(&mut self, x: Point, y: Point) -> BTreeSet<Point> {
        if let Some(v) = self.memo.get(&(x, y)) {
            return v.clone();
        }
        let out = if self.psi.apply(x) == Some(y) {
            BTreeSet::from([x])
        } else {
            let (right_side, left_side) = self.expansions(x, y);
            let mut acc = BTreeSet::new();
            for v in right_side {
                if v == y {
                    for w in self.shared_below(x) {
                        acc.extend(self.b2(w, y));
                    }
                    continue;
                }
                debug_assert!(v.beta < y.beta);
                let part = if self.in1(v) { self.b1(x, v) } else { self.cross(x, v) };
                acc.extend(part);
            }
            for u in left_side {
                if u == x {
                    continue;
                }
                debug_assert!(u.beta < x.beta);
                let part = if self.in2(u) { self.b2(u, y) } else { self.cross(u, y) };
                acc.extend(part);
            }
            acc
        };
        self.memo.insert((x, y), out.clone());
        out
    }

    fn unfold(&self, x: Point, y: Point, seq: &mut CanonicalSequences) {
        if self.psi.apply(x) == Some(y) {
            push_unique(&mut seq.left, (x, x));
            return;
        }
        let (right_side, left_side) = self.expansions(x, y);
        for v in right_side {
            if v == y {
                for w in self.shared_below(x) {
                    push_unique(&mut seq.right_origins, (w, y));
                }
                continue;
            }
            if self.in1(v) {
                push_unique(&mut seq.left, (x, v));
            } else {
                self.unfold(x, v, seq);
            }
        }
        for u in left_side {
            if u == x {
                continue;
            }
            if self.in2(u) {
                push_unique(&mut seq.right_origins, (u, y));
            } else {
                self.unfold(u, y, seq);
            }
        }
    }

    fn sequences(&self, x: Point, y: Point) -> CanonicalSequences {
        let mut seq = CanonicalSequences::default();
        self.unfold(x, y, &mut seq);
        for &(u, _) in &seq.right_origins {
            push_unique(&mut seq.right, (u, y));
        }
        seq
    }

    fn upper(&self, x: Point, y: Point) -> BTreeSet<Point> {
        if self.psi.apply(x) == Some(y) {
            return BTreeSet::from([x]);
        }
        let seq = self.sequences(x, y);
        let mut acc = BTreeSet::new();
        for &(xi, vi) in &seq.left {
            acc.extend(self.b1(xi, vi));
        }
        for &(u, yy) in &seq.right {
            acc.extend(self.b2(u, yy));
        }
        acc
    }

    /// The cross pair `{p, q}` oriented as `(x ∈ P1∖P2, y ∈ P2∖P1)`, or `None`
    /// when both points lie in one domain.
    fn orient(&self, p: Point, q: Point) -> Option<(Point, Point)> {
        match (self.in1(p), self.in2(p), self.in1(q), self.in2(q)) {
            (true, false, false, true) => Some((p, q)),
            (false, true, true, false) => Some((q, p)),
            _ => None,
        }
    }

    fn build(&mut self, points: &[Point], kind: BarrierKind) -> Result<BarrierMap> {
        let mut out = BarrierMap::new();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let (p, q) = (points[i], points[j]);
                let set = match self.orient(p, q) {
                    Some((x, y)) => match kind {
                        BarrierKind::Recursive => self.cross(x, y),
                        BarrierKind::Canonical => self.upper(x, y),
                    },
                    None if self.in1(p) && self.in1(q) => self.b1(p, q),
                    None => self.b2(p, q),
                };
                out.insert(p, q, set)?;
            }
        }
        Ok(out)
    }
}

fn push_unique(v: &mut Vec<(Point, Point)>, item: (Point, Point)) {
    if !v.contains(&item) {
        v.push(item);
    }
}

fn check_inputs(f1: &Frame, f2: &Frame, psi: &OrderIso) -> Result<()> {
    check_frame(&f1.order, &f1.barriers)?;
    check_frame(&f2.order, &f2.barriers)?;
    match is_progressive(f1, f2, psi) {
        Err(Error::Violation(v)) => Err(Error::InvalidIso(format!("not progressive: {v}"))),
        other => other,
    }
}

/// Amalgamates two frames: the psi-amalgam order with the chosen barrier
/// amalgamation. The resulting barrier map is verified against the amalgam
/// before it is returned.
pub fn amalgamate_frames(f1: &Frame, f2: &Frame, psi: &OrderIso, kind: BarrierKind) -> Result<Frame> {
    check_inputs(f1, f2, psi)?;
    let order = psi_amalgamate(&f1.order, &f2.order, psi)?;
    let barriers = Amalgamator::new(f1, f2, psi).build(order.points(), kind)?;
    check_barrier_map(&order, &barriers)?;
    Ok(Frame { order, barriers })
}

/// The recursive barrier amalgamation `b3`.
pub fn amalgamate_b3(f1: &Frame, f2: &Frame, psi: &OrderIso) -> Result<BarrierMap> {
    amalgamate_frames(f1, f2, psi, BarrierKind::Recursive).map(|f| f.barriers)
}

/// The flattened barrier amalgamation `B3`.
pub fn amalgamate_upper_b3(f1: &Frame, f2: &Frame, psi: &OrderIso) -> Result<BarrierMap> {
    amalgamate_frames(f1, f2, psi, BarrierKind::Canonical).map(|f| f.barriers)
}

/// Unfolds the `b3` recursion for the cross pair `{x, y}`.
pub fn canonical_sequences(
    f1: &Frame,
    f2: &Frame,
    psi: &OrderIso,
    x: Point,
    y: Point,
) -> Result<CanonicalSequences> {
    check_inputs(f1, f2, psi)?;
    let am = Amalgamator::new(f1, f2, psi);
    if !(am.in1(x) && !am.in2(x)) {
        return Err(Error::InvalidPair(format!("{x} must lie only in the first domain")));
    }
    if !(am.in2(y) && !am.in1(y)) {
        return Err(Error::InvalidPair(format!("{y} must lie only in the second domain")));
    }
    if psi.apply(x) == Some(y) {
        return Err(Error::InvalidPair(format!("{y} is the image of {x}")));
    }
    Ok(am.sequences(x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::Universe;

    fn pt(a: u32, b: u32) -> Point {
        Point::new(a, b)
    }

    fn uni() -> Universe {
        Universe::new(2, 3, 1).unwrap()
    }

    /// dom1 = {a, x} with a ⊴ x; dom2 = {a, y} with a ⊴ y; psi: x ↦ y.
    fn am1() -> (Frame, Frame, OrderIso) {
        let (a, x, y) = (pt(0, 0), pt(0, 1), pt(0, 2));
        let o1 = HeightedOrder::with_reflexive(uni(), [a, x], [(a, x)]).unwrap();
        let o2 = HeightedOrder::with_reflexive(uni(), [a, y], [(a, y)]).unwrap();
        let psi = OrderIso::new([(a, a), (x, y)]).unwrap();
        (Frame::canonical(o1), Frame::canonical(o2), psi)
    }

    /// dom1 = {a, x1, x2}, dom2 = {a, y1, y2}, a below everything.
    fn am2() -> (Frame, Frame, OrderIso) {
        let a = pt(0, 0);
        let (x1, x2, y1, y2) = (pt(0, 1), pt(1, 1), pt(0, 2), pt(1, 2));
        let o1 = HeightedOrder::with_reflexive(uni(), [a, x1, x2], [(a, x1), (a, x2)]).unwrap();
        let o2 = HeightedOrder::with_reflexive(uni(), [a, y1, y2], [(a, y1), (a, y2)]).unwrap();
        let psi = OrderIso::new([(a, a), (x1, y1), (x2, y2)]).unwrap();
        (Frame::canonical(o1), Frame::canonical(o2), psi)
    }

    #[test]
    fn identity_amalgam_is_the_input() {
        let (f1, _, _) = am1();
        let id = OrderIso::identity(f1.order.points());
        let am = psi_amalgamate(&f1.order, &f1.order, &id).unwrap();
        assert_eq!(am, f1.order);
    }

    #[test]
    fn am1_adds_clause_three_pair_only() {
        let (f1, f2, psi) = am1();
        let am = psi_amalgamate(&f1.order, &f2.order, &psi).unwrap();
        let (x, y) = (pt(0, 1), pt(0, 2));
        assert!(am.le(x, y));
        assert!(!am.le(y, x));
        assert!(verify_amalgam_unique(&f1.order, &f2.order, &psi, &am).is_ok());
    }

    #[test]
    fn transitive_closure_of_the_union_is_not_the_amalgam() {
        let (f1, f2, psi) = am1();
        let naive = HeightedOrder::new(
            uni(),
            f1.order.points().iter().chain(f2.order.points()).copied(),
            f1.order.pairs().chain(f2.order.pairs()),
        )
        .unwrap()
        .closure();
        let err = verify_amalgam_unique(&f1.order, &f2.order, &psi, &naive).unwrap_err();
        assert!(matches!(
            err,
            Error::Violation(Violation::AmalgamMismatch(x, y, true)) if x == pt(0, 1) && y == pt(0, 2)
        ));
    }

    #[test]
    fn flipped_pair_is_caught() {
        let (f1, f2, psi) = am2();
        let am = psi_amalgamate(&f1.order, &f2.order, &psi).unwrap();
        let (x1, y2) = (pt(0, 1), pt(1, 2));
        let flipped = am.extended(&[], [(x1, y2)]).unwrap();
        assert!(matches!(
            verify_amalgam_unique(&f1.order, &f2.order, &psi, &flipped),
            Err(Error::Violation(Violation::AmalgamMismatch(..)))
        ));
    }

    #[test]
    fn disjoint_domains_have_no_clause_four_pairs() {
        let (p, q) = (pt(0, 0), pt(0, 1));
        let (r, s) = (pt(1, 1), pt(1, 2));
        let o1 = HeightedOrder::with_reflexive(uni(), [p, q], [(p, q)]).unwrap();
        let o2 = HeightedOrder::with_reflexive(uni(), [r, s], [(r, s)]).unwrap();
        let psi = OrderIso::new([(p, r), (q, s)]).unwrap();
        let am = psi_amalgamate(&o1, &o2, &psi).unwrap();
        for &x in o2.points() {
            for &y in o1.points() {
                assert!(!am.le(x, y));
            }
        }
        assert!(am.le(p, s));
    }

    #[test]
    fn iso_must_fix_the_intersection() {
        let (a, b) = (pt(0, 0), pt(1, 0));
        let o1 = HeightedOrder::discrete(uni(), [a, b]).unwrap();
        let o2 = o1.clone();
        let swap = OrderIso::new([(a, b), (b, a)]).unwrap();
        assert!(matches!(psi_amalgamate(&o1, &o2, &swap), Err(Error::InvalidIso(_))));
    }

    #[test]
    fn iso_must_preserve_order() {
        let (a, x) = (pt(0, 0), pt(0, 1));
        let (c, y) = (pt(1, 0), pt(1, 2));
        let o1 = HeightedOrder::with_reflexive(uni(), [a, x], [(a, x)]).unwrap();
        let o2 = HeightedOrder::discrete(uni(), [c, y]).unwrap();
        let psi = OrderIso::new([(a, c), (x, y)]).unwrap();
        assert!(matches!(psi_amalgamate(&o1, &o2, &psi), Err(Error::InvalidIso(_))));
    }

    #[test]
    fn progressive_examples() {
        let (f1, f2, psi) = am1();
        assert!(is_progressive(&f1, &f1, &OrderIso::identity(f1.order.points())).is_ok());
        assert!(is_progressive(&f1, &f2, &psi).is_ok());

        let (a, x, z) = (pt(0, 0), pt(0, 1), pt(1, 2));
        let o3 = HeightedOrder::with_reflexive(uni(), [a, z], [(a, z)]).unwrap();
        let moved = OrderIso::new([(a, a), (x, z)]).unwrap();
        assert!(matches!(
            is_progressive(&f1, &Frame::canonical(o3), &moved),
            Err(Error::Violation(Violation::ProgressiveHeight(p, q))) if p == x && q == z
        ));
    }

    #[test]
    fn height_collision_is_not_progressive() {
        let (a, x) = (pt(0, 0), pt(0, 1));
        let (b, y) = (pt(1, 1), pt(0, 2));
        let o1 = HeightedOrder::discrete(uni(), [a, x]).unwrap();
        let o2 = HeightedOrder::discrete(uni(), [b, y]).unwrap();
        // a ↦ b changes alpha; use a height clash instead: x has height 1, used by b.
        let psi = OrderIso::new([(a, pt(0, 2)), (x, b)]).unwrap();
        let o2b = HeightedOrder::discrete(uni(), [pt(0, 2), b]).unwrap();
        assert!(is_progressive(&Frame::canonical(o1.clone()), &Frame::canonical(o2), &psi).is_err());
        let err = is_progressive(&Frame::canonical(o1), &Frame::canonical(o2b), &psi).unwrap_err();
        assert!(matches!(err, Error::Violation(Violation::ProgressiveHeight(..))));
    }

    #[test]
    fn b3_on_psi_pairs_is_the_singleton() {
        let (f1, f2, psi) = am1();
        let b3 = amalgamate_b3(&f1, &f2, &psi).unwrap();
        assert_eq!(b3.get(pt(0, 1), pt(0, 2)), Some(&BTreeSet::from([pt(0, 1)])));
        let upper = amalgamate_upper_b3(&f1, &f2, &psi).unwrap();
        assert_eq!(upper.get(pt(0, 1), pt(0, 2)), Some(&BTreeSet::from([pt(0, 1)])));
    }

    #[test]
    fn am2_cross_pair_barrier() {
        let (f1, f2, psi) = am2();
        let (a, x1, x2, y2) = (pt(0, 0), pt(0, 1), pt(1, 1), pt(1, 2));
        let b3 = amalgamate_b3(&f1, &f2, &psi).unwrap();
        assert_eq!(b3.get(x1, y2), Some(&BTreeSet::from([a])));
        assert_eq!(b3.get(x1, x2), f1.barriers.get(x1, x2));
        let upper = amalgamate_upper_b3(&f1, &f2, &psi).unwrap();
        assert_eq!(upper.get(x1, y2), Some(&BTreeSet::from([a])));
    }

    #[test]
    fn am2_canonical_sequences() {
        let (f1, f2, psi) = am2();
        let (a, x1, y2) = (pt(0, 0), pt(0, 1), pt(1, 2));
        let seq = canonical_sequences(&f1, &f2, &psi, x1, y2).unwrap();
        assert_eq!(seq.left, vec![(x1, a)]);
        assert_eq!(seq.right, vec![(a, y2)]);
        assert!(matches!(
            canonical_sequences(&f1, &f2, &psi, x1, pt(0, 2)),
            Err(Error::InvalidPair(_))
        ));
    }

    #[test]
    fn comparable_cross_pair_keeps_the_lower_point() {
        // x' ⊴ x in dom1; y = psi(x'); b3({x, y}) refers to itself once.
        let a = pt(0, 0);
        let (xl, xh) = (pt(0, 1), pt(0, 2));
        let u = Universe::new(1, 5, 1).unwrap();
        let o1 = HeightedOrder::with_reflexive(u, [a, xl, xh], [(a, xl), (a, xh), (xl, xh)]).unwrap();
        let (yl, yh) = (pt(0, 3), pt(0, 4));
        let o2 = HeightedOrder::with_reflexive(u, [a, yl, yh], [(a, yl), (a, yh), (yl, yh)]).unwrap();
        let psi = OrderIso::new([(a, a), (xl, yl), (xh, yh)]).unwrap();
        let (f1, f2) = (Frame::canonical(o1), Frame::canonical(o2));
        let b3 = amalgamate_b3(&f1, &f2, &psi).unwrap();
        assert_eq!(b3.get(xh, yl), Some(&BTreeSet::from([a, xl])));
        assert_eq!(b3.get(xl, yh), Some(&BTreeSet::from([xl])));
        let upper = amalgamate_upper_b3(&f1, &f2, &psi).unwrap();
        assert_eq!(upper.get(xh, yl), Some(&BTreeSet::from([a, xl])));
    }

    #[test]
    fn self_reference_through_a_shared_point() {
        // y ⊴2 c ⊴1 x with c shared, so y ⊴3 x and y must be in b3({x, y})
        let u = Universe::new(2, 6, 1).unwrap();
        let (x0, c, x, y, px) = (pt(0, 1), pt(0, 3), pt(1, 4), pt(0, 2), pt(1, 5));
        let o1 = HeightedOrder::with_reflexive(u, [x0, c, x], [(x0, c), (c, x), (x0, x)]).unwrap();
        let o2 = HeightedOrder::with_reflexive(u, [y, c, px], [(y, c), (c, px), (y, px)]).unwrap();
        let psi = OrderIso::new([(x0, y), (c, c), (x, px)]).unwrap();
        let (f1, f2) = (Frame::canonical(o1), Frame::canonical(o2));
        let b3 = amalgamate_b3(&f1, &f2, &psi).unwrap();
        assert_eq!(b3.get(x, y), Some(&BTreeSet::from([x0, y])));
        let seq = canonical_sequences(&f1, &f2, &psi, x, y).unwrap();
        assert_eq!(seq.right, vec![(c, y)]);
        let upper = amalgamate_upper_b3(&f1, &f2, &psi).unwrap();
        assert_eq!(upper.get(x, y), Some(&BTreeSet::from([x0, y])));
    }
}
