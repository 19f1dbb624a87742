//! Finite structural models of symmetric systems of models.
//!
//! A node is a finite set of ordinals with a code ordinal and a `delta`, the
//! length of its initial segment inside the threshold segment `[0, t)`.
//! Membership `N_j ∈ N_i` is `code(N_j) ∈ elements(N_i)`. Elementarity is
//! replaced by structural well-formedness; clauses (B), (C) and (D) are
//! checked literally.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::violation::{Outcome, Violation};

pub type Ordinal = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeModel {
    pub code: Ordinal,
    pub delta: Ordinal,
    pub elements: BTreeSet<Ordinal>,
}

impl NodeModel {
    /// Builds a node, computing `delta` from the threshold segment `[0, t)`.
    pub fn from_elements<I: IntoIterator<Item = Ordinal>>(code: Ordinal, elements: I, threshold_top: Ordinal) -> Self {
        let elements: BTreeSet<Ordinal> = elements.into_iter().collect();
        let delta = (0..threshold_top)
            .find(|o| !elements.contains(o))
            .unwrap_or(threshold_top);
        NodeModel { code, delta, elements }
    }

    pub fn contains(&self, o: Ordinal) -> bool {
        self.elements.contains(&o)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `elements ∩ [0, t)` is exactly `[0, delta)`.
    pub fn delta_consistent(&self, threshold_top: Ordinal) -> bool {
        self.delta <= threshold_top
            && self.elements.range(..threshold_top).copied().eq(0..self.delta)
    }

    /// The image of this node under an ordinal map, if every ordinal is mapped.
    pub fn image(&self, iso: &OrdinalIso) -> Option<NodeModel> {
        Some(NodeModel {
            code: iso.apply(self.code)?,
            delta: self.delta,
            elements: self
                .elements
                .iter()
                .map(|&o| iso.apply(o))
                .collect::<Option<_>>()?,
        })
    }
}

/// An injective map between finite sets of ordinals.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OrdinalIso {
    map: BTreeMap<Ordinal, Ordinal>,
}

impl OrdinalIso {
    pub fn new<I: IntoIterator<Item = (Ordinal, Ordinal)>>(pairs: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (a, b) in pairs {
            if map.insert(a, b).is_some() {
                return Err(Error::InvalidIso(format!("ordinal {a} is mapped twice")));
            }
            if !seen.insert(b) {
                return Err(Error::InvalidIso(format!("ordinal {b} is hit twice")));
            }
        }
        Ok(OrdinalIso { map })
    }

    pub fn apply(&self, o: Ordinal) -> Option<Ordinal> {
        self.map.get(&o).copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Ordinal, Ordinal)> + '_ {
        self.map.iter().map(|(a, b)| (*a, *b))
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(a, b)| a == b)
    }

    pub fn inverse(&self) -> OrdinalIso {
        OrdinalIso {
            map: self.map.iter().map(|(a, b)| (*b, *a)).collect(),
        }
    }

    /// `self` after `first`: `x ↦ self(first(x))`.
    pub fn after(&self, first: &OrdinalIso) -> OrdinalIso {
        OrdinalIso {
            map: first
                .map
                .iter()
                .filter_map(|(a, b)| self.apply(*b).map(|c| (*a, c)))
                .collect(),
        }
    }

    fn order_preserving(&self) -> bool {
        self.map.values().zip(self.map.values().skip(1)).all(|(a, b)| a < b)
    }
}

/// The unique order isomorphism between the element sets of two nodes.
pub fn node_iso(n1: &NodeModel, n2: &NodeModel) -> Result<OrdinalIso> {
    if n1.len() != n2.len() {
        return Err(Error::NoIso(format!(
            "nodes {} and {} have {} and {} elements",
            n1.code,
            n2.code,
            n1.len(),
            n2.len()
        )));
    }
    if n1.delta != n2.delta {
        return Err(Error::NoIso(format!(
            "nodes {} and {} have different deltas",
            n1.code, n2.code
        )));
    }
    OrdinalIso::new(n1.elements.iter().copied().zip(n2.elements.iter().copied()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymSystem {
    threshold_top: Ordinal,
    nodes: BTreeMap<Ordinal, NodeModel>,
    contains: BTreeSet<(Ordinal, Ordinal)>,
}

impl SymSystem {
    /// Builds a system whose containment relation is derived from the codes.
    pub fn new<I: IntoIterator<Item = NodeModel>>(threshold_top: Ordinal, nodes: I) -> Result<Self> {
        let mut map = BTreeMap::new();
        for n in nodes {
            check_code(threshold_top, &n)?;
            if let Some(prev) = map.insert(n.code, n) {
                return Err(Error::Malformed(format!("duplicate node code {}", prev.code)));
            }
        }
        let contains = derive_contains(&map);
        Ok(SymSystem {
            threshold_top,
            nodes: map,
            contains,
        })
    }

    /// Builds a system with an explicitly declared containment relation,
    /// given as `(member, container)` code pairs. Disagreement with the codes
    /// is reported by [`check_system`], not here.
    pub fn with_declared<I, C>(threshold_top: Ordinal, nodes: I, contains: C) -> Result<Self>
    where
        I: IntoIterator<Item = NodeModel>,
        C: IntoIterator<Item = (Ordinal, Ordinal)>,
    {
        let mut sys = Self::new(threshold_top, nodes)?;
        sys.contains = contains.into_iter().collect();
        for &(j, i) in &sys.contains {
            for c in [j, i] {
                if !sys.nodes.contains_key(&c) {
                    return Err(Error::Malformed(format!("containment names unknown node {c}")));
                }
            }
        }
        Ok(sys)
    }

    pub fn empty(threshold_top: Ordinal) -> Self {
        SymSystem {
            threshold_top,
            nodes: BTreeMap::new(),
            contains: BTreeSet::new(),
        }
    }

    pub fn threshold_top(&self) -> Ordinal {
        self.threshold_top
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeModel> {
        self.nodes.values()
    }

    pub fn node(&self, code: Ordinal) -> Option<&NodeModel> {
        self.nodes.get(&code)
    }

    pub fn codes(&self) -> BTreeSet<Ordinal> {
        self.nodes.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Declared `(member, container)` pairs.
    pub fn containment(&self) -> &BTreeSet<(Ordinal, Ordinal)> {
        &self.contains
    }

    pub fn is_member(&self, member: Ordinal, container: Ordinal) -> bool {
        self.contains.contains(&(member, container))
    }

    /// Every ordinal used by some node, codes included.
    pub fn support(&self) -> BTreeSet<Ordinal> {
        let mut out = BTreeSet::new();
        for n in self.nodes.values() {
            out.insert(n.code);
            out.extend(n.elements.iter().copied());
        }
        out
    }

    /// True when every node of `self` occurs, unchanged, in `other`.
    pub fn is_subsystem_of(&self, other: &SymSystem) -> bool {
        self.nodes.values().all(|n| other.node(n.code) == Some(n))
    }

    /// Union of two systems over the same threshold; shared codes must
    /// name identical nodes.
    pub fn union(&self, other: &SymSystem) -> Result<SymSystem> {
        if self.threshold_top != other.threshold_top {
            return Err(Error::InvalidInput("systems use different threshold segments".into()));
        }
        merge(self.threshold_top, self.nodes().chain(other.nodes()).cloned())
            .map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

fn check_code(threshold_top: Ordinal, n: &NodeModel) -> Result<()> {
    if n.code < threshold_top {
        return Err(Error::Malformed(format!(
            "node code {} lies inside the threshold segment [0, {threshold_top})",
            n.code
        )));
    }
    Ok(())
}

fn derive_contains(nodes: &BTreeMap<Ordinal, NodeModel>) -> BTreeSet<(Ordinal, Ordinal)> {
    let mut out = BTreeSet::new();
    for i in nodes.values() {
        for &j in nodes.keys() {
            if i.contains(j) {
                out.insert((j, i.code));
            }
        }
    }
    out
}

/// Builds a system from possibly repeated nodes; a code naming two different
/// nodes is an error.
fn merge<I: IntoIterator<Item = NodeModel>>(threshold_top: Ordinal, nodes: I) -> Result<SymSystem> {
    let mut map: BTreeMap<Ordinal, NodeModel> = BTreeMap::new();
    for n in nodes {
        check_code(threshold_top, &n)?;
        match map.get(&n.code) {
            Some(prev) if *prev != n => {
                return Err(Error::InvalidAmalgamation(format!(
                    "code {} names two different nodes",
                    n.code
                )))
            }
            Some(_) => {}
            None => {
                map.insert(n.code, n);
            }
        }
    }
    SymSystem::new(threshold_top, map.into_values())
}

/// Structural well-formedness plus clauses (B), (C), (D).
pub fn check_system(sys: &SymSystem) -> Outcome {
    let t = sys.threshold_top;
    for n in sys.nodes.values() {
        if !n.delta_consistent(t) {
            return Err(Violation::DeltaInconsistent(n.code));
        }
        if n.contains(n.code) {
            return Err(Violation::MembershipMalformed {
                member: n.code,
                container: n.code,
                reason: "a node cannot contain its own code",
            });
        }
    }
    let derived = derive_contains(&sys.nodes);
    if let Some(&(j, i)) = derived.symmetric_difference(&sys.contains).next() {
        return Err(Violation::MembershipMalformed {
            member: j,
            container: i,
            reason: "the declared containment disagrees with the codes",
        });
    }
    for &(j, i) in &sys.contains {
        let (nj, ni) = (&sys.nodes[&j], &sys.nodes[&i]);
        if !nj.elements.is_subset(&ni.elements) {
            return Err(Violation::MembershipMalformed {
                member: j,
                container: i,
                reason: "its elements are not all in the container",
            });
        }
        if nj.delta >= ni.delta {
            return Err(Violation::MembershipMalformed {
                member: j,
                container: i,
                reason: "its delta is not below the container's",
            });
        }
    }

    let nodes: Vec<&NodeModel> = sys.nodes.values().collect();
    for a in &nodes {
        for b in &nodes {
            if a.code >= b.code || a.delta != b.delta {
                continue;
            }
            if a.len() != b.len() {
                return Err(Violation::SymmetrySize(a.code, b.code));
            }
            for (x, y) in a.elements.iter().zip(&b.elements) {
                if x != y && b.contains(*x) {
                    return Err(Violation::SymmetryMovesShared(a.code, b.code, *x));
                }
            }
        }
    }

    for low in &nodes {
        for high in &nodes {
            if low.delta >= high.delta {
                continue;
            }
            let covered = nodes
                .iter()
                .any(|c| c.delta == high.delta && sys.is_member(low.code, c.code));
            if !covered {
                return Err(Violation::SymmetryNoContainer {
                    low: low.code,
                    high: high.code,
                    level: high.delta,
                });
            }
        }
    }

    for &(j, i) in &sys.contains {
        let (nj, ni) = (&sys.nodes[&j], &sys.nodes[&i]);
        for other in &nodes {
            if other.delta != ni.delta || other.code == i {
                continue;
            }
            let iso = node_iso(ni, other).expect("clause (B) checked");
            let found = nj
                .image(&iso)
                .is_some_and(|img| sys.nodes.get(&img.code) == Some(&img));
            if !found {
                return Err(Violation::SymmetryNoImage {
                    member: j,
                    from: i,
                    to: other.code,
                });
            }
        }
    }
    Ok(())
}

/// The members of node `code`, as a system of their own.
pub fn restrict(sys: &SymSystem, code: Ordinal) -> Result<SymSystem> {
    if !sys.nodes.contains_key(&code) {
        return Err(Error::NodeNotFound(code));
    }
    let keep: BTreeSet<Ordinal> = sys
        .contains
        .iter()
        .filter(|(_, i)| *i == code)
        .map(|(j, _)| *j)
        .collect();
    Ok(SymSystem {
        threshold_top: sys.threshold_top,
        nodes: sys
            .nodes
            .iter()
            .filter(|(c, _)| keep.contains(c))
            .map(|(c, n)| (*c, n.clone()))
            .collect(),
        contains: sys
            .contains
            .iter()
            .filter(|(j, i)| keep.contains(j) && keep.contains(i))
            .copied()
            .collect(),
    })
}

/// Adds `w`, a system living inside node `code`, together with its copies
/// `Ψ_{N,N'}(W)` into every node `N'` of the same delta.
pub fn amalgamate_into(sys: &SymSystem, code: Ordinal, w: &SymSystem) -> Result<SymSystem> {
    let n = sys.node(code).ok_or(Error::NodeNotFound(code))?;
    if w.threshold_top != sys.threshold_top {
        return Err(Error::InvalidAmalgamation("systems use different threshold segments".into()));
    }
    for m in w.nodes() {
        if !n.contains(m.code) || !m.elements.is_subset(&n.elements) {
            return Err(Error::InvalidAmalgamation(format!(
                "node {} of the added system is not inside node {code}",
                m.code
            )));
        }
    }
    let inside = restrict(sys, code)?;
    if !inside.is_subsystem_of(w) {
        return Err(Error::InvalidAmalgamation(format!(
            "the added system does not include every member of node {code}"
        )));
    }
    let mut all: Vec<NodeModel> = sys.nodes().cloned().collect();
    for other in sys.nodes().filter(|o| o.delta == n.delta) {
        let iso = node_iso(n, other).map_err(|e| Error::InvalidAmalgamation(e.to_string()))?;
        for m in w.nodes() {
            let img = m.image(&iso).expect("members of n are mapped");
            all.push(img);
        }
    }
    merge(sys.threshold_top, all)
}

/// The union of two systems matched by an ordinal isomorphism `psi` that
/// fixes the shared ordinals.
///
/// `psi` must be defined on every ordinal of `m`, be order preserving, carry
/// each node of `m` onto a node of `n` and reach every node of `n`.
pub fn union_isomorphic(m: &SymSystem, n: &SymSystem, psi: &OrdinalIso) -> Result<SymSystem> {
    if m.threshold_top != n.threshold_top {
        return Err(Error::InvalidIso("systems use different threshold segments".into()));
    }
    let sm = m.support();
    let sn = n.support();
    let restricted = OrdinalIso {
        map: sm
            .iter()
            .map(|&o| {
                psi.apply(o)
                    .map(|p| (o, p))
                    .ok_or_else(|| Error::InvalidIso(format!("ordinal {o} is not mapped")))
            })
            .collect::<Result<_>>()?,
    };
    if !restricted.order_preserving() {
        return Err(Error::InvalidIso("the map is not order preserving".into()));
    }
    for &x in sm.intersection(&sn) {
        if restricted.apply(x) != Some(x) {
            return Err(Error::InvalidIso(format!("shared ordinal {x} is moved")));
        }
    }
    let mut hit = BTreeSet::new();
    for node in m.nodes() {
        let img = node.image(&restricted).expect("support is mapped");
        if n.node(img.code) != Some(&img) {
            return Err(Error::InvalidIso(format!(
                "node {} is not carried onto a node of the second system",
                node.code
            )));
        }
        hit.insert(img.code);
    }
    if hit.len() != n.len() {
        return Err(Error::InvalidIso("the map misses nodes of the second system".into()));
    }
    merge(m.threshold_top, m.nodes().chain(n.nodes()).cloned())
        .map_err(|e| Error::InvalidIso(e.to_string()))
}

/// Upper end of a gap interval: an ordinal or the top of the universe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Ordinal(Ordinal),
    Top,
}

impl Bound {
    fn above(self, o: Ordinal) -> bool {
        match self {
            Bound::Ordinal(b) => o < b,
            Bound::Top => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapWitness {
    pub i: Ordinal,
    #[serde(rename = "alphaI")]
    pub alpha: Ordinal,
    #[serde(rename = "betaI")]
    pub beta: Bound,
}

/// `min(N ∖ i)`, or the top when every element of `N` lies below `i`.
pub fn gap_beta(n: &NodeModel, i: Ordinal) -> Bound {
    n.elements
        .range(i..)
        .next()
        .map_or(Bound::Top, |&b| Bound::Ordinal(b))
}

/// Nodes of the system that are not members of `n` and have smaller delta.
fn low_outsiders<'a>(sys: &'a SymSystem, n: &'a NodeModel) -> impl Iterator<Item = &'a NodeModel> {
    sys.nodes()
        .filter(move |m| !n.contains(m.code) && m.delta < n.delta)
}

/// Checks clauses (a) to (d) for a candidate witness against node `code`.
pub fn verify_gap_witness(sys: &SymSystem, code: Ordinal, w: &GapWitness) -> Outcome {
    let n = sys.node(code).ok_or(Violation::GapWitness { clause: 'a', node: code })?;
    if !n.contains(w.alpha) || n.contains(w.i) {
        return Err(Violation::GapWitness { clause: 'a', node: code });
    }
    if w.beta != gap_beta(n, w.i) {
        return Err(Violation::GapWitness { clause: 'b', node: code });
    }
    if !(w.alpha < w.i && w.beta.above(w.i)) {
        return Err(Violation::GapWitness { clause: 'c', node: code });
    }
    for m in low_outsiders(sys, n) {
        let hit = m
            .elements
            .iter()
            .any(|&o| o >= w.alpha && w.beta.above(o) && n.contains(o));
        if hit {
            return Err(Violation::GapWitness { clause: 'd', node: m.code });
        }
    }
    Ok(())
}

/// Searches for the largest `alpha` in `N ∩ i` satisfying clauses (a) to (d).
pub fn gap_search(sys: &SymSystem, code: Ordinal, i: Ordinal) -> Result<Option<GapWitness>> {
    let n = sys.node(code).ok_or(Error::NodeNotFound(code))?;
    if n.contains(i) {
        return Err(Error::InvalidInput(format!("{i} is an element of node {code}")));
    }
    let beta = gap_beta(n, i);
    let blockers: Vec<Ordinal> = low_outsiders(sys, n)
        .flat_map(|m| m.elements.iter().copied())
        .filter(|&o| n.contains(o) && beta.above(o))
        .collect();
    for &alpha in n.elements.range(..i).rev() {
        if blockers.iter().all(|&o| o < alpha) {
            return Ok(Some(GapWitness { i, alpha, beta }));
        }
    }
    Ok(None)
}
