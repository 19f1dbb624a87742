//! Random instance generators for property tests and the acceptance suite.
//!
//! Every generator either returns an instance meeting its documented
//! guarantees or `None`; callers retry with fresh randomness.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IteratorRandom, SliceRandom};
use rand::Rng;

use crate::amalgam::{is_progressive, Frame, OrderIso};
use crate::condition::{validate, Condition, PointViews, SystemMode};
use crate::order::{down_set, BarrierMap, HeightedOrder, Point, Universe};
use crate::symsys::{self, check_system, NodeModel, Ordinal, OrdinalIso, SymSystem};

/// A random order on `n` grid points satisfying (A): each pair of points of
/// different heights is related upward with probability `density`, then the
/// relation is closed transitively.
pub fn random_order<R: Rng>(rng: &mut R, universe: Universe, n: usize, density: f64) -> HeightedOrder {
    let grid = universe.grid();
    let pts: Vec<Point> = grid.choose_multiple(rng, n.min(grid.len())).copied().collect();
    let mut rel = Vec::new();
    for &x in &pts {
        for &y in &pts {
            if x.beta < y.beta && rng.gen_bool(density) {
                rel.push((x, y));
            }
        }
    }
    HeightedOrder::with_reflexive(universe, pts, rel)
        .expect("points come from the grid")
        .closure()
}

/// Minimal barriers enlarged by a random part of each common lower cone.
pub fn random_barriers<R: Rng>(rng: &mut R, ord: &HeightedOrder) -> BarrierMap {
    let mut map = BarrierMap::canonical(ord);
    let p = ord.points();
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            let mut set = map.get(p[i], p[j]).cloned().unwrap_or_default();
            for (k, &pk) in p.iter().enumerate() {
                if ord.le_idx(k, i) && ord.le_idx(k, j) && rng.gen_bool(0.3) {
                    set.insert(pk);
                }
            }
            map.insert(p[i], p[j], set).expect("distinct points");
        }
    }
    map
}

pub fn random_frame<R: Rng>(rng: &mut R, universe: Universe, n: usize, density: f64) -> Frame {
    let order = random_order(rng, universe, n, density);
    let barriers = random_barriers(rng, &order);
    Frame::new(order, barriers)
}

/// A progressive triple `(f1, f2, psi)` with `|dom1 ∪ dom2| <= max_union`.
///
/// The heights of `dom1` are split into fixed and moved ones; moved heights
/// are sent up, strictly increasingly, onto heights unused by `dom1`, and
/// `f2` is `f1` transported along the resulting map. With `prefix_root` the
/// fixed heights form an initial segment, which makes the root down-closed
/// in both orders.
pub fn progressive_triple<R: Rng>(
    rng: &mut R,
    universe: Universe,
    max_union: usize,
    prefix_root: bool,
) -> Option<(Frame, Frame, OrderIso)> {
    let n = rng.gen_range(1..=max_union.max(1));
    let density = rng.gen_range(0.1..0.7);
    let f1 = random_frame(rng, universe, n, density);
    let heights: Vec<u32> = f1.order.heights().into_iter().collect();
    let fixed: BTreeSet<u32> = if prefix_root {
        let k = rng.gen_range(0..=heights.len());
        heights[..k].iter().copied().collect()
    } else {
        heights.iter().copied().filter(|_| rng.gen_bool(0.4)).collect()
    };
    let used: BTreeSet<u32> = heights.iter().copied().collect();
    let mut shift: BTreeMap<u32, u32> = BTreeMap::new();
    let mut floor = 0u32;
    for &h in &heights {
        if fixed.contains(&h) {
            if h < floor {
                return None;
            }
            shift.insert(h, h);
            floor = h + 1;
            continue;
        }
        let ceiling = fixed
            .iter()
            .copied()
            .find(|&f| f > h)
            .unwrap_or(universe.height_bound);
        let lo = floor.max(h + 1);
        let choices: Vec<u32> = (lo..ceiling).filter(|c| !used.contains(c)).collect();
        let &target = choices.iter().take(3).choose(rng)?;
        shift.insert(h, target);
        floor = target + 1;
    }
    let map = |p: Point| Point::new(p.alpha, shift[&p.beta]);
    let pts1 = f1.order.points();
    let moved = pts1.iter().filter(|p| !fixed.contains(&p.beta)).count();
    if pts1.len() + moved > max_union {
        return None;
    }
    let psi = OrderIso::new(pts1.iter().map(|&p| (p, map(p)))).ok()?;
    let o2 = HeightedOrder::new(
        universe,
        pts1.iter().map(|&p| map(p)),
        f1.order.pairs().map(|(x, y)| (map(x), map(y))),
    )
    .ok()?;
    let b2 = f1.barriers.map_points(map).ok()?;
    let f2 = Frame::new(o2, b2);
    is_progressive(&f1, &f2, &psi).ok()?;
    Some((f1, f2, psi))
}

/// Ordinals above the threshold are spaced two apart so that an odd shift
/// can move any of them to a fresh slot while keeping the order.
fn slot(t: Ordinal, k: u32) -> Ordinal {
    t + 2 * k
}

struct Alloc {
    t: Ordinal,
    next: u32,
}

impl Alloc {
    fn take(&mut self, n: u32) -> Vec<Ordinal> {
        let out = (self.next..self.next + n).map(|k| slot(self.t, k)).collect();
        self.next += n;
        out
    }
}

/// A valid symmetric system of at most `max_nodes` nodes.
///
/// It starts from one to three top nodes of a common delta that share an
/// initial block of ordinals, then repeatedly places a new node inside an
/// existing one and copies it into that node's twins.
pub fn random_system<R: Rng>(rng: &mut R, threshold_top: Ordinal, max_nodes: usize) -> Option<SymSystem> {
    let t = threshold_top.max(3);
    let mut alloc = Alloc { t, next: 0 };
    let tops = rng.gen_range(1..=3.min(max_nodes.max(1)));
    let delta = rng.gen_range(t / 2..=t);
    let shared = alloc.take(rng.gen_range(0..3));
    let private = rng.gen_range(2..6);
    let mut nodes = Vec::new();
    for _ in 0..tops {
        let mine = alloc.take(private);
        let code = alloc.take(1)[0];
        let elements = (0..delta).chain(shared.iter().copied()).chain(mine);
        nodes.push(NodeModel {
            code,
            delta,
            elements: elements.collect(),
        });
    }
    let mut sys = SymSystem::new(t, nodes).ok()?;
    check_system(&sys).ok()?;
    let steps = rng.gen_range(0..4);
    for _ in 0..steps {
        if let Some((code, w)) = random_inner_system(rng, &sys) {
            let grown = symsys::amalgamate_into(&sys, code, &w).ok()?;
            if grown.len() > max_nodes || check_system(&grown).is_err() {
                break;
            }
            sys = grown;
        }
    }
    Some(sys)
}

/// Input for one-node amalgamation: a node `N` of `sys` and a system living
/// inside it that includes every member of `N` plus one new node.
pub fn random_inner_system<R: Rng>(rng: &mut R, sys: &SymSystem) -> Option<(Ordinal, SymSystem)> {
    let t = sys.threshold_top();
    let n = sys.nodes().choose(rng)?.clone();
    let inside = symsys::restrict(sys, n.code).ok()?;
    let floor = inside.nodes().map(|m| m.delta + 1).max().unwrap_or(1);
    if floor >= n.delta {
        return None;
    }
    let delta = rng.gen_range(floor..n.delta);
    let codes = sys.codes();
    let used_inside: BTreeSet<Ordinal> = inside.support();
    let free: Vec<Ordinal> = n
        .elements
        .iter()
        .copied()
        .filter(|&o| o >= t && !codes.contains(&o) && !used_inside.contains(&o))
        .collect();
    // the new code may only sit in N and in nodes that contain N
    let code_ok = |o: Ordinal| {
        sys.nodes()
            .all(|m| m.code == n.code || !m.contains(o) || sys.is_member(n.code, m.code))
    };
    let code = free.iter().copied().filter(|&o| code_ok(o)).choose(rng)?;
    let mut elements: BTreeSet<Ordinal> = (0..delta).collect();
    elements.extend(used_inside.iter().copied());
    for &o in &free {
        if o != code && rng.gen_bool(0.5) {
            elements.insert(o);
        }
    }
    let w = NodeModel { code, delta, elements };
    let system = SymSystem::new(t, inside.nodes().cloned().chain([w])).ok()?;
    check_system(&system).ok()?;
    Some((n.code, system))
}

/// An isomorphic copy of `m` for the union lemma: a closed set of ordinals
/// stays fixed and every other ordinal moves one slot up.
pub fn random_isomorphic_copy<R: Rng>(rng: &mut R, m: &SymSystem) -> Option<(SymSystem, OrdinalIso)> {
    let t = m.threshold_top();
    let mut fixed: BTreeSet<Ordinal> = (0..t).collect();
    for node in m.nodes() {
        if rng.gen_bool(0.3) {
            fixed.insert(node.code);
        }
    }
    loop {
        let mut grew = false;
        for node in m.nodes() {
            if fixed.contains(&node.code) && !node.elements.is_subset(&fixed) {
                fixed.extend(node.elements.iter().copied());
                grew = true;
            }
        }
        if !grew {
            break;
        }
    }
    let psi = OrdinalIso::new(
        m.support()
            .into_iter()
            .chain(0..t)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .map(|o| (o, if fixed.contains(&o) { o } else { o + 1 })),
    )
    .ok()?;
    let n = SymSystem::new(t, m.nodes().map(|node| node.image(&psi).expect("support is mapped"))).ok()?;
    Some((n, psi))
}

/// A random `⊴`-down-closed subset of `ord`'s domain.
pub fn random_down_closed<R: Rng>(rng: &mut R, ord: &HeightedOrder) -> BTreeSet<Point> {
    let mut out = BTreeSet::new();
    for &p in ord.points() {
        if rng.gen_bool(0.35) {
            out.extend(down_set(ord, p).expect("domain point"));
        }
    }
    out
}

/// Points of the universe outside both domains.
fn outside_points<R: Rng>(rng: &mut R, universe: Universe, a: &HeightedOrder, b: &HeightedOrder) -> BTreeSet<Point> {
    universe
        .grid()
        .into_iter()
        .filter(|&p| !a.contains(p) && !b.contains(p) && rng.gen_bool(0.15))
        .collect()
}

/// Everything `amalgamate_conditions` needs.
#[derive(Debug, Clone)]
pub struct ConditionPair {
    pub q1: Condition,
    pub q2: Condition,
    pub psi: OrderIso,
    pub mode: SystemMode,
}

fn mark<R: Rng>(rng: &mut R, codes: &[Ordinal]) -> BTreeSet<Ordinal> {
    let mut out: BTreeSet<Ordinal> = codes.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    if out.is_empty() {
        if let Some(&c) = codes.choose(rng) {
            out.insert(c);
        }
    }
    out
}

/// Two conditions meeting the union-mode hypotheses: the systems are
/// isomorphic copies, and every marked point view stays inside its own
/// domain (plus points outside both), closed downward.
pub fn union_condition_pair<R: Rng>(rng: &mut R, universe: Universe, max_union: usize) -> Option<ConditionPair> {
    let prefix = rng.gen_bool(0.5);
    let (f1, f2, psi) = progressive_triple(rng, universe, max_union, prefix)?;
    let sys1 = random_system(rng, 4, 6)?;
    let (sys2, sys_iso) = random_isomorphic_copy(rng, &sys1)?;
    let codes1: Vec<Ordinal> = sys1.codes().into_iter().collect();
    let only2: Vec<Ordinal> = sys2.codes().difference(&sys1.codes()).copied().collect();
    let marked1 = mark(rng, &codes1);
    let marked2 = mark(rng, &only2);
    let views = |rng: &mut R, marked: &BTreeSet<Ordinal>, own: &HeightedOrder| -> PointViews {
        marked
            .iter()
            .map(|&c| {
                let mut v = random_down_closed(rng, own);
                v.extend(outside_points(rng, universe, &f1.order, &f2.order));
                (c, v)
            })
            .collect()
    };
    let pv1 = views(rng, &marked1, &f1.order);
    let pv2 = views(rng, &marked2, &f2.order);
    let q1 = Condition {
        order: f1.order,
        barriers: f1.barriers,
        system: sys1,
        marked: marked1,
        point_views: pv1,
    };
    let q2 = Condition {
        order: f2.order,
        barriers: f2.barriers,
        system: sys2,
        marked: marked2,
        point_views: pv2,
    };
    validate(&q1).ok()?;
    validate(&q2).ok()?;
    Some(ConditionPair {
        q1,
        q2,
        psi,
        mode: SystemMode::Union(sys_iso),
    })
}

/// Two conditions meeting the one-node hypotheses: `q1`'s system lives
/// inside a marked node `N` of `q2`'s system, the root of `psi` is closed
/// downward in both orders, views of `q1`'s marked nodes stay in `dom1`, and
/// views of `q2`'s marked nodes meet `dom1` in a `⊴1`-down-closed set.
pub fn into_condition_pair<R: Rng>(rng: &mut R, universe: Universe, max_union: usize) -> Option<ConditionPair> {
    let (f1, f2, psi) = progressive_triple(rng, universe, max_union, true)?;
    let sys2 = random_system(rng, 4, 5)?;
    let (code, sys1) = random_inner_system(rng, &sys2)?;
    let codes2: Vec<Ordinal> = sys2.codes().into_iter().collect();
    let only1: Vec<Ordinal> = sys1.codes().difference(&sys2.codes()).copied().collect();
    let mut marked2 = mark(rng, &codes2);
    marked2.insert(code);
    let marked1 = mark(rng, &only1);
    let mut pv1 = PointViews::new();
    for &c in &marked1 {
        let mut v = random_down_closed(rng, &f1.order);
        v.extend(outside_points(rng, universe, &f1.order, &f2.order));
        pv1.insert(c, v);
    }
    let mut pv2 = PointViews::new();
    for &c in &marked2 {
        let mut v = random_down_closed(rng, &f2.order);
        v.extend(random_down_closed(rng, &f1.order));
        v.extend(outside_points(rng, universe, &f1.order, &f2.order));
        pv2.insert(c, v);
    }
    let q1 = Condition {
        order: f1.order,
        barriers: f1.barriers,
        system: sys1,
        marked: marked1,
        point_views: pv1,
    };
    let q2 = Condition {
        order: f2.order,
        barriers: f2.barriers,
        system: sys2,
        marked: marked2,
        point_views: pv2,
    };
    validate(&q1).ok()?;
    validate(&q2).ok()?;
    Some(ConditionPair {
        q1,
        q2,
        psi,
        mode: SystemMode::Into(code),
    })
}

/// A node `N` and a family of nodes of smaller delta that are not members of
/// `N` and meet it only inside the threshold segment; members of `N` and
/// nodes of larger delta are added freely.
pub fn gap_family<R: Rng>(rng: &mut R) -> (SymSystem, Ordinal) {
    let t: Ordinal = rng.gen_range(2..6);
    let mut alloc = Alloc { t, next: 0 };
    let delta = rng.gen_range(1..=t);
    let own = alloc.take(rng.gen_range(1..7));
    let n_code = alloc.take(1)[0];
    let mut n_elems: BTreeSet<Ordinal> = (0..delta).chain(own.iter().copied()).collect();
    let mut nodes = Vec::new();
    // members of N, built from N's own ordinals
    if delta > 1 && own.len() > 1 && rng.gen_bool(0.5) {
        let code = own[0];
        let d = rng.gen_range(0..delta);
        let elems = (0..d).chain(own[1..].iter().copied().filter(|_| rng.gen_bool(0.5)));
        nodes.push(NodeModel {
            code,
            delta: d,
            elements: elems.collect(),
        });
    }
    // low outsiders, disjoint from N above the threshold
    for _ in 0..rng.gen_range(0..4) {
        let d = if delta == 0 { 0 } else { rng.gen_range(0..delta) };
        let code = alloc.take(1)[0];
        let extra = alloc.take(rng.gen_range(0..4));
        // interleave: outsider ordinals may sit between N's
        nodes.push(NodeModel {
            code,
            delta: d,
            elements: (0..d).chain(extra).collect(),
        });
    }
    // a higher node containing N
    if rng.gen_bool(0.4) && delta < t {
        let code = alloc.take(1)[0];
        let mut elems: BTreeSet<Ordinal> = (0..t).collect();
        elems.extend(n_elems.iter().copied());
        elems.insert(n_code);
        nodes.push(NodeModel {
            code,
            delta: t,
            elements: elems,
        });
    }
    // spread N's ordinals among the outsiders' by interleaving more of its own
    let more = alloc.take(rng.gen_range(0..3));
    n_elems.extend(more);
    nodes.push(NodeModel {
        code: n_code,
        delta,
        elements: n_elems,
    });
    let sys = SymSystem::new(t, nodes).expect("codes are allocated fresh");
    (sys, n_code)
}
