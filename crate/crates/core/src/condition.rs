//! Forcing conditions `(⊴, b, Δ, Ω)` over finite heighted orders.
//!
//! Each node of the side-condition system may carry a point view, the set of
//! grid points it contains. Clause (5) asks every marked node to contain the
//! barrier of each pair of domain points it contains; "contains" is read as
//! inclusion in the point view.

use std::collections::{BTreeMap, BTreeSet};

use crate::amalgam::{amalgamate_frames, BarrierKind, Frame, OrderIso};
use crate::error::{Error, Result};
use crate::order::{
    check_barrier_map, check_condition_a, check_partial_order, minimal_barrier, BarrierMap, HeightedOrder, Point,
    Universe,
};
use crate::symsys::{self, check_system, Ordinal, OrdinalIso, SymSystem};
use crate::violation::Violation;

pub type PointViews = BTreeMap<Ordinal, BTreeSet<Point>>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Condition {
    pub order: HeightedOrder,
    pub barriers: BarrierMap,
    pub system: SymSystem,
    pub marked: BTreeSet<Ordinal>,
    pub point_views: PointViews,
}

impl Condition {
    /// The empty condition `(∅, ∅, ∅, ∅)`.
    pub fn empty(universe: Universe, threshold_top: Ordinal) -> Self {
        Condition {
            order: HeightedOrder::empty(universe),
            barriers: BarrierMap::new(),
            system: SymSystem::empty(threshold_top),
            marked: BTreeSet::new(),
            point_views: PointViews::new(),
        }
    }

    /// An order with its barriers and an empty side-condition system.
    pub fn from_frame(frame: Frame, threshold_top: Ordinal) -> Self {
        Condition {
            order: frame.order,
            barriers: frame.barriers,
            system: SymSystem::empty(threshold_top),
            marked: BTreeSet::new(),
            point_views: PointViews::new(),
        }
    }

    pub fn frame(&self) -> Frame {
        Frame::new(self.order.clone(), self.barriers.clone())
    }

    pub fn universe(&self) -> Universe {
        self.order.universe()
    }
}

/// The first failing clause, numbered 1 to 5, with its witness.
#[derive(Debug)]
pub struct ClauseFailure {
    pub clause: u8,
    pub error: Error,
}

/// Clause-by-clause validation; stops at the first failure.
pub fn check_clauses(q: &Condition) -> std::result::Result<(), ClauseFailure> {
    let fail = |clause: u8| move |error: Error| ClauseFailure { clause, error };
    for &code in q.point_views.keys() {
        if q.system.node(code).is_none() {
            return Err(ClauseFailure {
                clause: 3,
                error: Error::Malformed(format!("point view for unknown node {code}")),
            });
        }
    }
    check_partial_order(&q.order).map_err(Error::from).map_err(fail(1))?;
    check_condition_a(&q.order).map_err(Error::from).map_err(fail(1))?;
    check_barrier_map(&q.order, &q.barriers).map_err(fail(2))?;
    check_system(&q.system).map_err(Error::from).map_err(fail(3))?;
    for &code in &q.marked {
        if q.system.node(code).is_none() {
            return Err(fail(4)(Violation::MarkedNotInSystem(code).into()));
        }
    }
    check_clause_five(q).map_err(Error::from).map_err(fail(5))
}

fn check_clause_five(q: &Condition) -> std::result::Result<(), Violation> {
    for &code in &q.marked {
        let view = q.point_views.get(&code).ok_or(Violation::MissingPointView(code))?;
        let inside: Vec<Point> = q.order.points().iter().copied().filter(|p| view.contains(p)).collect();
        for (k, &x) in inside.iter().enumerate() {
            for &y in &inside[k + 1..] {
                let Some(b) = q.barriers.get(x, y) else { continue };
                if let Some(&element) = b.iter().find(|e| !view.contains(e)) {
                    return Err(Violation::BarrierEscapesNode { node: code, x, y, element });
                }
            }
        }
    }
    Ok(())
}

/// Clauses (1) to (5).
pub fn validate(q: &Condition) -> Result<()> {
    check_clauses(q).map_err(|f| f.error)
}

/// The first component in which `q` fails to include `p`, if any.
pub fn extension_gap(q: &Condition, p: &Condition) -> Option<&'static str> {
    if p.order.points().iter().any(|&x| !q.order.contains(x)) {
        return Some("domain");
    }
    if p.order.pairs().any(|(x, y)| !q.order.le(x, y)) {
        return Some("order");
    }
    if !p.barriers.is_extended_by(&q.barriers) {
        return Some("barriers");
    }
    if !p.system.is_subsystem_of(&q.system) {
        return Some("system");
    }
    if !p.marked.is_subset(&q.marked) {
        return Some("marked");
    }
    if p.point_views.iter().any(|(c, v)| q.point_views.get(c) != Some(v)) {
        return Some("point views");
    }
    None
}

/// `q ≤ p`: every component of `p` is included in the matching one of `q`.
pub fn extends(q: &Condition, p: &Condition) -> bool {
    extension_gap(q, p).is_none()
}

/// Componentwise union of two conditions over the same universe.
fn union(a: &Condition, b: &Condition) -> Result<Condition> {
    if a.universe() != b.universe() {
        return Err(Error::InvalidInput("conditions live in different universes".into()));
    }
    let order = HeightedOrder::new(
        a.universe(),
        a.order.points().iter().chain(b.order.points()).copied(),
        a.order.pairs().chain(b.order.pairs()),
    )?;
    let mut barriers = a.barriers.clone();
    for (pair, set) in b.barriers.iter() {
        match barriers.get(pair.low(), pair.high()) {
            Some(prev) if prev != set => {
                return Err(Error::InvalidInput(format!(
                    "barriers of {{{}, {}}} disagree",
                    pair.low(),
                    pair.high()
                )))
            }
            _ => {
                barriers.insert(pair.low(), pair.high(), set.clone())?;
            }
        }
    }
    let system = a.system.union(&b.system)?;
    let marked = a.marked.union(&b.marked).copied().collect();
    let point_views = merge_views(&a.point_views, &b.point_views)?;
    Ok(Condition {
        order,
        barriers,
        system,
        marked,
        point_views,
    })
}

fn merge_views(a: &PointViews, b: &PointViews) -> Result<PointViews> {
    let mut out = a.clone();
    for (c, v) in b {
        match out.get(c) {
            Some(prev) if prev != v => {
                return Err(Error::InvalidInput(format!("point views of node {c} disagree")));
            }
            _ => {
                out.insert(*c, v.clone());
            }
        }
    }
    Ok(out)
}

/// Union of a chain in which each link extends its predecessor.
pub fn chain_union(chain: &[Condition]) -> Result<Condition> {
    let Some(first) = chain.first() else {
        return Err(Error::InvalidInput("empty chain".into()));
    };
    for (k, w) in chain.windows(2).enumerate() {
        if !extends(&w[1], &w[0]) {
            return Err(Error::InvalidChain(k + 1));
        }
    }
    chain[1..].iter().try_fold(first.clone(), |acc, q| union(&acc, q))
}

/// Adds a fresh point below `top`: the extension step for "relate below".
///
/// `new` goes below everything above `top`; its barrier with `z` is `{new}`
/// when `new ⊴ z` and empty otherwise.
pub fn add_point(q: &Condition, new: Point, top: Point) -> Result<Condition> {
    if !q.universe().contains(new) {
        return Err(Error::InvalidPoint(format!("{new} lies outside the universe")));
    }
    if q.order.contains(new) {
        return Err(Error::InvalidPoint(format!("{new} is already in the domain")));
    }
    if !q.order.contains(top) {
        return Err(Error::InvalidPoint(format!("{top} is not in the domain")));
    }
    if new.beta >= top.beta {
        return Err(Error::InvalidPoint(format!("{new} is not lower than {top}")));
    }
    let above = q.order.up_set(top)?;
    let order = q
        .order
        .extended(&[new], std::iter::once((new, new)).chain(above.iter().map(|&z| (new, z))))?;
    let mut barriers = q.barriers.clone();
    for &z in q.order.points() {
        let set = if above.contains(&z) { BTreeSet::from([new]) } else { BTreeSet::new() };
        barriers.insert(new, z, set)?;
    }
    Ok(Condition {
        order,
        barriers,
        ..q.clone()
    })
}

/// Adds a fresh point above `lower` and everything below it, with minimal
/// barriers for the new pairs. Fails when the result is not a condition.
pub fn add_top_point(q: &Condition, new: Point, lower: &BTreeSet<Point>) -> Result<Condition> {
    if !q.universe().contains(new) {
        return Err(Error::InvalidPoint(format!("{new} lies outside the universe")));
    }
    if q.order.contains(new) {
        return Err(Error::InvalidPoint(format!("{new} is already in the domain")));
    }
    let mut below = BTreeSet::new();
    for &u in lower {
        if !q.order.contains(u) {
            return Err(Error::InvalidPoint(format!("{u} is not in the domain")));
        }
        if u.beta >= new.beta {
            return Err(Error::InvalidPoint(format!("{u} is not lower than {new}")));
        }
        below.extend(crate::order::down_set(&q.order, u)?);
    }
    let order = q
        .order
        .extended(&[new], std::iter::once((new, new)).chain(below.iter().map(|&u| (u, new))))?;
    let mut barriers = q.barriers.clone();
    for &z in q.order.points() {
        barriers.insert(new, z, minimal_barrier(&order, new, z)?)?;
    }
    let out = Condition {
        order,
        barriers,
        ..q.clone()
    };
    validate(&out)?;
    Ok(out)
}

/// The part of `q` seen by the marked node `code`: order and barriers cut
/// down to its point view, members of the node, and their views.
pub fn restrict_condition(q: &Condition, code: Ordinal) -> Result<Condition> {
    if !q.marked.contains(&code) {
        return Err(Error::InvalidInput(format!("node {code} is not marked")));
    }
    let view = q.point_views.get(&code).ok_or(Error::NodeNotFound(code))?;
    let system = symsys::restrict(&q.system, code)?;
    let codes = system.codes();
    Ok(Condition {
        order: q.order.restrict(view),
        barriers: q.barriers.restrict(view),
        marked: q.marked.intersection(&codes).copied().collect(),
        point_views: q
            .point_views
            .iter()
            .filter(|(c, _)| codes.contains(c))
            .map(|(c, v)| (*c, v.clone()))
            .collect(),
        system,
    })
}

/// How the side-condition systems of two conditions are combined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SystemMode {
    /// Union of isomorphic systems matched by an ordinal isomorphism.
    Union(OrdinalIso),
    /// The first system lives inside node `N` of the second and is copied
    /// into every node of the same delta.
    Into(Ordinal),
}

fn incompatible(stage: &'static str) -> impl Fn(Violation) -> Error {
    move |violation| Error::Incompatible { stage, violation }
}

/// Amalgamates two conditions along a progressive isomorphism.
///
/// Stages run in order: the combined system, the combined frame, then the
/// full condition with `Ω1 ∪ Ω2`. A failure at any stage that stems from the
/// inputs not fitting together is reported as [`Error::Incompatible`]; the
/// result is never returned invalid.
pub fn amalgamate_conditions(
    q1: &Condition,
    q2: &Condition,
    psi: &OrderIso,
    mode: &SystemMode,
    kind: BarrierKind,
) -> Result<Condition> {
    let system = match mode {
        SystemMode::Union(iso) => symsys::union_isomorphic(&q1.system, &q2.system, iso)?,
        SystemMode::Into(code) => symsys::amalgamate_into(&q2.system, *code, &q1.system)?,
    };
    check_system(&system).map_err(incompatible("system"))?;

    let frame = match amalgamate_frames(&q1.frame(), &q2.frame(), psi, kind) {
        Err(Error::Violation(v)) => return Err(incompatible("frame")(v)),
        other => other?,
    };

    let point_views =
        merge_views(&q1.point_views, &q2.point_views).map_err(|e| Error::InvalidAmalgamation(e.to_string()))?;
    let q3 = Condition {
        order: frame.order,
        barriers: frame.barriers,
        system,
        marked: q1.marked.union(&q2.marked).copied().collect(),
        point_views,
    };
    match check_clauses(&q3) {
        Ok(()) => {}
        Err(ClauseFailure {
            error: Error::Violation(v),
            clause,
        }) => {
            let stage = if clause == 5 { "clause 5" } else { "condition" };
            return Err(incompatible(stage)(v));
        }
        Err(f) => return Err(f.error),
    }
    for (q, _) in [(q1, 1), (q2, 2)] {
        if let Some(part) = extension_gap(&q3, q) {
            return Err(incompatible("extension")(Violation::NotExtension(part)));
        }
    }
    Ok(q3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symsys::NodeModel;

    fn pt(a: u32, b: u32) -> Point {
        Point::new(a, b)
    }

    fn p_a() -> Condition {
        let u = Universe::new(3, 3, 2).unwrap();
        let (a, b, x) = (pt(0, 0), pt(1, 0), pt(0, 1));
        let ord = HeightedOrder::with_reflexive(u, [a, b, x], [(a, x), (b, x)]).unwrap();
        Condition::from_frame(Frame::canonical(ord), 4)
    }

    #[test]
    fn empty_condition_validates() {
        let q = Condition::empty(Universe::new(2, 2, 1).unwrap(), 4);
        assert!(validate(&q).is_ok());
        assert!(validate(&p_a()).is_ok());
    }

    #[test]
    fn clause_five_catches_escaping_barriers() {
        let base = p_a();
        let mut q = add_top_point(&base, pt(1, 1), &BTreeSet::from([pt(0, 0), pt(1, 0)])).unwrap();
        let n = NodeModel::from_elements(10, [0, 1], 4);
        q.system = SymSystem::new(4, [n]).unwrap();
        q.marked.insert(10);
        q.point_views.insert(10, BTreeSet::from([pt(0, 1), pt(1, 1)]));
        let err = check_clauses(&q).unwrap_err();
        assert_eq!(err.clause, 5);
        assert!(matches!(
            err.error,
            Error::Violation(Violation::BarrierEscapesNode { node: 10, .. })
        ));
        q.point_views.insert(10, BTreeSet::from([pt(0, 1), pt(1, 1), pt(1, 0), pt(0, 0)]));
        assert!(validate(&q).is_ok());
    }

    #[test]
    fn add_point_extends() {
        let q = p_a();
        let q2 = add_point(&q, pt(2, 0), pt(0, 1)).unwrap();
        assert!(validate(&q2).is_ok());
        assert!(extends(&q2, &q));
        assert!(extends(&q, &q));
        assert_eq!(q2.barriers.get(pt(2, 0), pt(0, 1)), Some(&BTreeSet::from([pt(2, 0)])));
        assert_eq!(q2.barriers.get(pt(2, 0), pt(0, 0)), Some(&BTreeSet::new()));
        assert!(matches!(add_point(&q, pt(0, 0), pt(0, 1)), Err(Error::InvalidPoint(_))));
        assert!(matches!(add_point(&q, pt(2, 1), pt(0, 1)), Err(Error::InvalidPoint(_))));
    }

    #[test]
    fn changed_barrier_is_not_an_extension() {
        let q = p_a();
        let mut r = q.clone();
        r.barriers.insert(pt(0, 0), pt(1, 0), BTreeSet::from([pt(0, 0)])).unwrap();
        assert_eq!(extension_gap(&r, &q), Some("barriers"));
    }

    #[test]
    fn chains() {
        let q = p_a();
        let q2 = add_point(&q, pt(2, 0), pt(0, 1)).unwrap();
        assert_eq!(chain_union(std::slice::from_ref(&q)).unwrap(), q);
        assert_eq!(chain_union(&[q.clone(), q2.clone()]).unwrap(), q2);
        assert!(matches!(chain_union(&[q2, q]), Err(Error::InvalidChain(1))));
    }

    #[test]
    fn top_point_gets_minimal_barriers() {
        let q = p_a();
        let q2 = add_top_point(&q, pt(1, 2), &BTreeSet::from([pt(0, 1)])).unwrap();
        assert!(extends(&q2, &q));
        assert!(q2.order.le(pt(1, 0), pt(1, 2)));
        assert_eq!(q2.barriers.get(pt(0, 1), pt(1, 2)), Some(&BTreeSet::from([pt(0, 1)])));
    }

    #[test]
    fn identity_amalgamation_returns_the_input() {
        let q = p_a();
        let psi = OrderIso::identity(q.order.points());
        let id = OrdinalIso::default();
        let out = amalgamate_conditions(&q, &q, &psi, &SystemMode::Union(id), BarrierKind::Canonical).unwrap();
        assert_eq!(out, q);
    }
}
