//! The finite space generated by the cones of a heighted order.
//!
//! Two subbases are available. [`Subbase::Clopen`] takes every cone `C(x)`
//! together with its complement; on a finite antisymmetric order this is
//! always the discrete topology. [`Subbase::DownSets`] takes the cones alone;
//! it is the topology the Cantor-Bendixson derivation runs on, because a
//! finite surrogate of "infinitely many points below" can only be seen when
//! complements of cones are not used to cut neighbourhoods down.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::order::{down_set, BarrierMap, HeightedOrder, Point};
use crate::violation::{Outcome, Violation};

/// Default number of points up to which a topology is materialized.
pub const DEFAULT_TOPOLOGY_CAP: usize = 16;

/// Environment variable overriding [`DEFAULT_TOPOLOGY_CAP`].
pub const CAP_ENV: &str = "SCATTERED_FORGE_CAP";

/// Largest cap accepted; sets are stored as `u64` masks.
const HARD_CAP: usize = 30;

/// Cap from `SCATTERED_FORGE_CAP`, falling back to the default.
pub fn topology_cap_from_env() -> usize {
    std::env::var(CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_TOPOLOGY_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subbase {
    /// Cones and their complements.
    Clopen,
    /// Cones only.
    DownSets,
}

/// A materialized topology over the sorted domain of an order.
///
/// Open sets are bitmasks; bit `i` stands for `points[i]`.
#[derive(Debug, Clone)]
pub struct Topology {
    points: Vec<Point>,
    open: Vec<u64>,
}

impl Topology {
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.open.len()
    }

    pub fn is_empty(&self) -> bool {
        self.open.is_empty()
    }

    pub fn masks(&self) -> &[u64] {
        &self.open
    }

    pub fn open_sets(&self) -> impl Iterator<Item = BTreeSet<Point>> + '_ {
        self.open.iter().map(move |&m| self.decode(m))
    }

    pub fn decode(&self, mask: u64) -> BTreeSet<Point> {
        (0..self.points.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| self.points[i])
            .collect()
    }

    pub fn encode(&self, set: &BTreeSet<Point>) -> u64 {
        self.points
            .iter()
            .enumerate()
            .filter(|(_, p)| set.contains(p))
            .fold(0, |m, (i, _)| m | 1 << i)
    }

    pub fn is_open(&self, set: &BTreeSet<Point>) -> bool {
        self.open.binary_search(&self.encode(set)).is_ok()
    }
}

fn cone_mask(ord: &HeightedOrder, i: usize) -> u64 {
    ord.below_idx(i).fold(0u64, |m, k| m | 1 << k)
}

/// Topology generated by the cones of `ord` (the clopen subbase), capped at
/// [`DEFAULT_TOPOLOGY_CAP`] points.
pub fn generate_topology(ord: &HeightedOrder) -> Result<Topology> {
    generate_topology_with(ord, Subbase::Clopen, DEFAULT_TOPOLOGY_CAP)
}

/// Materializes the topology generated by the chosen subbase.
///
/// In a finite space the least open neighbourhood of `x` is the intersection
/// of the subbasic sets containing it, and a set is open exactly when it
/// contains the least neighbourhood of each of its points. All `2^n` subsets
/// are filtered through that test.
pub fn generate_topology_with(ord: &HeightedOrder, subbase: Subbase, cap: usize) -> Result<Topology> {
    let n = ord.len();
    let cap = cap.min(HARD_CAP);
    if n > cap {
        return Err(Error::Capacity { size: n, cap });
    }
    let full: u64 = if n == 0 { 0 } else { (1u64 << n) - 1 };
    let mut sub: Vec<u64> = (0..n).map(|i| cone_mask(ord, i)).collect();
    if subbase == Subbase::Clopen {
        let complements: Vec<u64> = sub.iter().map(|m| full & !m).collect();
        sub.extend(complements);
    }
    let least: Vec<u64> = (0..n)
        .map(|i| {
            sub.iter()
                .filter(|&&s| s >> i & 1 == 1)
                .fold(full, |acc, s| acc & s)
        })
        .collect();
    let open = (0..=full)
        .filter(|&u| (0..n).all(|i| u >> i & 1 == 0 || least[i] & !u == 0))
        .collect();
    Ok(Topology {
        points: ord.points().to_vec(),
        open,
    })
}

/// Result of the Cantor-Bendixson derivation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpaceAnalysis {
    pub levels: Vec<BTreeSet<Point>>,
    #[serde(serialize_with = "ser_ranks")]
    pub ranks: BTreeMap<Point, u32>,
    pub residue: BTreeSet<Point>,
}

fn ser_ranks<S: serde::Serializer>(ranks: &BTreeMap<Point, u32>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut m = s.serialize_map(Some(ranks.len()))?;
    for (p, r) in ranks {
        m.serialize_entry(&p.to_string(), r)?;
    }
    m.end()
}

impl SpaceAnalysis {
    pub fn is_scattered(&self) -> bool {
        self.residue.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.levels.iter().map(BTreeSet::len).collect()
    }
}

/// Iterated removal of isolated points.
///
/// A point `x` of the current subspace `S` is isolated when its cone meets
/// `S` only in `x`: the cone is the least open neighbourhood of `x` in the
/// down-set topology.
pub fn cb_derive(ord: &HeightedOrder) -> SpaceAnalysis {
    let n = ord.len();
    let cones: Vec<u64> = (0..n).map(|i| cone_mask(ord, i)).collect();
    derive_with(ord.points(), |alive, i| cones[i] & alive == 1 << i)
}

/// The same derivation decided against a materialized topology: `x` is
/// isolated in `S` when some open set meets `S` exactly in `{x}`.
pub fn cb_derive_exhaustive(ord: &HeightedOrder, subbase: Subbase, cap: usize) -> Result<SpaceAnalysis> {
    let top = generate_topology_with(ord, subbase, cap)?;
    let open = top.masks();
    Ok(derive_with(ord.points(), |alive, i| {
        open.iter().any(|&u| u & alive == 1 << i)
    }))
}

fn derive_with(points: &[Point], isolated: impl Fn(u64, usize) -> bool) -> SpaceAnalysis {
    let n = points.len();
    let mut alive: u64 = if n == 0 { 0 } else { (1u64 << n) - 1 };
    let mut levels = Vec::new();
    let mut ranks = BTreeMap::new();
    while alive != 0 {
        let stage: Vec<usize> = (0..n)
            .filter(|&i| alive >> i & 1 == 1 && isolated(alive, i))
            .collect();
        if stage.is_empty() {
            break;
        }
        let rank = levels.len() as u32;
        let mut level = BTreeSet::new();
        for i in stage {
            alive &= !(1 << i);
            ranks.insert(points[i], rank);
            level.insert(points[i]);
        }
        levels.push(level);
    }
    let residue = (0..n).filter(|i| alive >> i & 1 == 1).map(|i| points[i]).collect();
    SpaceAnalysis {
        levels,
        ranks,
        residue,
    }
}

/// Level sizes of the derivation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CardinalSequence {
    pub sizes: Vec<usize>,
    /// False when a non-empty residue survives; the sequence is then partial.
    pub scattered: bool,
}

pub fn cardinal_sequence(ord: &HeightedOrder) -> CardinalSequence {
    let a = cb_derive(ord);
    CardinalSequence {
        sizes: a.sizes(),
        scattered: a.is_scattered(),
    }
}

/// Checks that derivation stage `β` is exactly the set of points of height `β`.
pub fn verify_levels(ord: &HeightedOrder) -> Outcome {
    let a = cb_derive(ord);
    if !a.is_scattered() {
        return Err(Violation::NotScattered(a.residue.len()));
    }
    for &p in ord.points() {
        let rank = a.ranks[&p];
        if rank != p.beta {
            return Err(Violation::LevelMismatch {
                point: p,
                rank,
                height: p.beta,
            });
        }
    }
    Ok(())
}

/// How a separating clopen set is described.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Witness {
    /// The cone `C(p)`.
    DownSet(Point),
    /// The complement of the cone `C(p)`.
    Complement(Point),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Separation {
    pub pair: (Point, Point),
    pub witness: Witness,
    pub set: BTreeSet<Point>,
}

/// A clopen set containing `x` and missing `y`: `C(x)` when `x ⊴ y`, the
/// complement of `C(y)` otherwise.
pub fn separate(ord: &HeightedOrder, x: Point, y: Point) -> Result<Separation> {
    if x == y {
        return Err(Error::InvalidPair(format!("cannot separate {x} from itself")));
    }
    if !ord.contains(y) {
        return Err(Error::NotFound(y));
    }
    let (witness, set) = if ord.le(x, y) {
        (Witness::DownSet(x), down_set(ord, x)?)
    } else {
        if !ord.contains(x) {
            return Err(Error::NotFound(x));
        }
        let cone = down_set(ord, y)?;
        let rest = ord.points().iter().copied().filter(|p| !cone.contains(p)).collect();
        (Witness::Complement(y), rest)
    };
    if !set.contains(&x) || set.contains(&y) {
        return Err(Violation::SeparationFailed(x, y).into());
    }
    Ok(Separation {
        pair: (x, y),
        witness,
        set,
    })
}

/// Barrier-based reduction of `C(x) ∖ B` for the basic set
/// `B = ⋂ C(p) ∖ ⋃ C(n)` (p over `positives`, n over `negatives`).
///
/// Returns `W = ⋃ b({x, n})` and verifies exhaustively that every point of
/// `C(x) ∖ B` lies under some element of `W`, and that every element of `W`
/// is strictly below `x` and strictly lower.
pub fn cover_reduction(
    ord: &HeightedOrder,
    bmap: &BarrierMap,
    x: Point,
    positives: &BTreeSet<Point>,
    negatives: &BTreeSet<Point>,
) -> Result<BTreeSet<Point>> {
    if !ord.contains(x) {
        return Err(Error::NotFound(x));
    }
    for &p in positives.iter().chain(negatives) {
        if !ord.contains(p) {
            return Err(Error::NotFound(p));
        }
    }
    let in_basic = |t: Point| {
        positives.iter().all(|&p| ord.le(t, p)) && !negatives.iter().any(|&n| ord.le(t, n))
    };
    if !in_basic(x) {
        return Err(Error::InvalidBasicSet(format!("{x} is not in the basic set")));
    }
    let mut cover = BTreeSet::new();
    for &n in negatives {
        let b = bmap.get(x, n).ok_or(Error::IncompleteBarrierMap(x, n))?;
        cover.extend(b.iter().copied());
    }
    for &w in &cover {
        if !ord.lt(w, x) || w.beta >= x.beta {
            return Err(Violation::CoverElementNotLower(w, x).into());
        }
    }
    for t in down_set(ord, x)? {
        if !in_basic(t) && !cover.iter().any(|&w| ord.le(t, w)) {
            return Err(Violation::CoverNotReduced(t).into());
        }
    }
    Ok(cover)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::Universe;

    fn pt(a: u32, b: u32) -> Point {
        Point::new(a, b)
    }

    fn uni() -> Universe {
        Universe::new(3, 3, 2).unwrap()
    }

    fn fixture_pa() -> HeightedOrder {
        let (a, b, x) = (pt(0, 0), pt(1, 0), pt(0, 1));
        HeightedOrder::with_reflexive(uni(), [a, b, x], [(a, x), (b, x)]).unwrap()
    }

    fn chain3() -> HeightedOrder {
        let (a, b, c) = (pt(0, 0), pt(0, 1), pt(0, 2));
        HeightedOrder::with_reflexive(uni(), [a, b, c], [(a, b), (b, c), (a, c)]).unwrap()
    }

    fn diamond() -> (HeightedOrder, BarrierMap) {
        let (a, b, u, v) = (pt(0, 0), pt(1, 0), pt(0, 1), pt(1, 1));
        let ord = HeightedOrder::with_reflexive(uni(), [a, b, u, v], [(a, u), (b, u), (a, v), (b, v)])
            .unwrap();
        let bmap = BarrierMap::canonical(&ord);
        (ord, bmap)
    }

    #[test]
    fn clopen_topology_is_discrete() {
        let disc = HeightedOrder::discrete(uni(), [pt(0, 0), pt(1, 0), pt(2, 0)]).unwrap();
        assert_eq!(generate_topology(&disc).unwrap().len(), 8);

        let (a, x) = (pt(0, 0), pt(0, 1));
        let ch = HeightedOrder::with_reflexive(uni(), [a, x], [(a, x)]).unwrap();
        assert_eq!(generate_topology(&ch).unwrap().len(), 4);

        let t = generate_topology(&fixture_pa()).unwrap();
        assert_eq!(t.len(), 8);
        assert!(t.is_open(&BTreeSet::from([pt(0, 1)])));
    }

    #[test]
    fn down_set_topology_is_coarser() {
        let t = generate_topology_with(&fixture_pa(), Subbase::DownSets, 16).unwrap();
        // ∅, {a}, {b}, {a,b}, {a,b,x}
        assert_eq!(t.len(), 5);
        assert!(!t.is_open(&BTreeSet::from([pt(0, 1)])));
    }

    #[test]
    fn topology_cap_is_enforced() {
        let u = Universe::new(20, 1, 1).unwrap();
        let pts = (0..17).map(|a| pt(a, 0));
        let ord = HeightedOrder::discrete(u, pts).unwrap();
        assert!(matches!(generate_topology(&ord), Err(Error::Capacity { size: 17, cap: 16 })));
    }

    #[test]
    fn derivation_examples() {
        let anti = HeightedOrder::discrete(uni(), [pt(0, 0), pt(1, 0), pt(2, 0)]).unwrap();
        let a = cb_derive(&anti);
        assert_eq!(a.sizes(), vec![3]);
        assert!(a.residue.is_empty());

        assert_eq!(cb_derive(&chain3()).sizes(), vec![1, 1, 1]);
        assert_eq!(cardinal_sequence(&fixture_pa()).sizes, vec![2, 1]);
    }

    #[test]
    fn full_grid_sequence() {
        let u = Universe::new(2, 2, 2).unwrap();
        let lo = [pt(0, 0), pt(1, 0)];
        let hi = [pt(0, 1), pt(1, 1)];
        let rel: Vec<_> = lo.iter().flat_map(|&l| hi.iter().map(move |&h| (l, h))).collect();
        let ord = HeightedOrder::with_reflexive(u, lo.iter().chain(hi.iter()).copied(), rel).unwrap();
        assert_eq!(cardinal_sequence(&ord), CardinalSequence { sizes: vec![2, 2], scattered: true });
    }

    #[test]
    fn exhaustive_derivation_matches_fast_path() {
        for ord in [fixture_pa(), chain3(), diamond().0] {
            let slow = cb_derive_exhaustive(&ord, Subbase::DownSets, 16).unwrap();
            assert_eq!(slow, cb_derive(&ord));
        }
    }

    #[test]
    fn level_identification() {
        assert_eq!(verify_levels(&fixture_pa()), Ok(()));
        assert_eq!(verify_levels(&chain3()), Ok(()));
        let lonely = HeightedOrder::discrete(uni(), [pt(0, 0), pt(0, 1)]).unwrap();
        assert_eq!(
            verify_levels(&lonely),
            Err(Violation::LevelMismatch { point: pt(0, 1), rank: 0, height: 1 })
        );
    }

    #[test]
    fn separation_examples() {
        let ord = fixture_pa();
        let (a, b, x) = (pt(0, 0), pt(1, 0), pt(0, 1));
        let s = separate(&ord, a, x).unwrap();
        assert_eq!(s.witness, Witness::DownSet(a));
        assert_eq!(s.set, BTreeSet::from([a]));

        let s = separate(&ord, a, b).unwrap();
        assert_eq!(s.witness, Witness::Complement(b));
        assert_eq!(s.set, BTreeSet::from([a, x]));

        let (d, _) = diamond();
        let s = separate(&d, pt(0, 1), pt(1, 1)).unwrap();
        assert_eq!(s.witness, Witness::Complement(pt(1, 1)));

        assert!(matches!(separate(&ord, a, a), Err(Error::InvalidPair(_))));
    }

    #[test]
    fn cover_reduction_examples() {
        let ord = fixture_pa();
        let bmap = BarrierMap::canonical(&ord);
        let x = pt(0, 1);
        let empty = BTreeSet::new();
        assert_eq!(
            cover_reduction(&ord, &bmap, x, &BTreeSet::from([x]), &empty).unwrap(),
            empty
        );
        assert_eq!(
            cover_reduction(&ord, &bmap, x, &empty, &BTreeSet::from([pt(0, 0)])).unwrap(),
            BTreeSet::from([pt(0, 0)])
        );

        let (d, dmap) = diamond();
        assert_eq!(
            cover_reduction(&d, &dmap, pt(0, 1), &empty, &BTreeSet::from([pt(1, 1)])).unwrap(),
            BTreeSet::from([pt(0, 0), pt(1, 0)])
        );
    }

    #[test]
    fn cover_reduction_rejects_points_outside_the_basic_set() {
        let ord = fixture_pa();
        let bmap = BarrierMap::canonical(&ord);
        let err = cover_reduction(&ord, &bmap, pt(0, 0), &BTreeSet::new(), &BTreeSet::from([pt(0, 1)]))
            .unwrap_err();
        assert!(matches!(err, Error::InvalidBasicSet(_)));
    }
}
