//! Finite heighted partial orders and the admissibility axioms.
//!
//! A [`HeightedOrder`] is a relation on a finite set of [`Point`]s drawn from
//! a [`Universe`] grid `{0..W-1} x {0..H-1}`. The second coordinate of a
//! point is its height. Admissibility asks for three things on top of the
//! partial-order axioms:
//!
//! * **(A)** a strictly smaller point has strictly smaller height;
//! * **(B)** below every point, every lower level holds at least
//!   `universe.fanout` points;
//! * **(C)** every pair of points has a finite barrier: a set of common lower
//!   bounds that dominates every common lower bound.
//!
//! The relation is stored as a dense boolean matrix over the sorted domain,
//! because every check here is an exhaustive cubic scan.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::violation::{Outcome, Violation};

/// Grid bounds for a finite instance.
///
/// `width` stands in for the width cardinal, `height_bound` for the height
/// cardinal and `fanout` for the "infinitely many" threshold of (B).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Universe {
    pub width: u32,
    #[serde(rename = "height")]
    pub height_bound: u32,
    pub fanout: u32,
}

impl Universe {
    pub fn new(width: u32, height_bound: u32, fanout: u32) -> Result<Self> {
        let u = Universe {
            width,
            height_bound,
            fanout,
        };
        u.validate()?;
        Ok(u)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height_bound == 0 || self.fanout == 0 {
            return Err(Error::Malformed(format!(
                "universe parameters must be positive, got width={} height={} fanout={}",
                self.width, self.height_bound, self.fanout
            )));
        }
        Ok(())
    }

    pub fn contains(&self, p: Point) -> bool {
        p.alpha < self.width && p.beta < self.height_bound
    }

    /// Every point of the grid, sorted by height then width index.
    pub fn grid(&self) -> Vec<Point> {
        let mut out = Vec::with_capacity((self.width * self.height_bound) as usize);
        for beta in 0..self.height_bound {
            for alpha in 0..self.width {
                out.push(Point::new(alpha, beta));
            }
        }
        out
    }
}

/// A grid point `(alpha, beta)`; `beta` is the height.
///
/// Points sort by height first, so any order satisfying (A) lists lower
/// points before higher ones.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[u32; 2]", into = "[u32; 2]")]
pub struct Point {
    pub alpha: u32,
    pub beta: u32,
}

impl Point {
    pub const fn new(alpha: u32, beta: u32) -> Self {
        Point { alpha, beta }
    }

    pub fn height(&self) -> u32 {
        self.beta
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.beta, self.alpha).cmp(&(other.beta, other.alpha))
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl From<[u32; 2]> for Point {
    fn from([alpha, beta]: [u32; 2]) -> Self {
        Point { alpha, beta }
    }
}

impl From<Point> for [u32; 2] {
    fn from(p: Point) -> Self {
        [p.alpha, p.beta]
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.alpha, self.beta)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for Point {
    type Err = Error;

    /// Parses `a,b` or `(a,b)`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut it = t.split(',').map(|x| x.trim().parse::<u32>());
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(a)), Some(Ok(b)), None) => Ok(Point::new(a, b)),
            _ => Err(Error::Malformed(format!("cannot parse point from {s:?}"))),
        }
    }
}

/// A finite relation on grid points, meant to be a partial order.
///
/// Construction validates only shape (bounds and `rel ⊆ domain²`); the order
/// axioms are checked by [`check_partial_order`] so that broken inputs can be
/// reported with witnesses instead of rejected outright.
#[derive(Clone, PartialEq, Eq)]
pub struct HeightedOrder {
    universe: Universe,
    points: Vec<Point>,
    le: Vec<bool>,
}

impl fmt::Debug for HeightedOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let strict: Vec<_> = self.strict_pairs().collect();
        f.debug_struct("HeightedOrder")
            .field("universe", &self.universe)
            .field("points", &self.points)
            .field("strict", &strict)
            .finish()
    }
}

impl HeightedOrder {
    /// Builds the relation exactly as given. Reflexive pairs are not added.
    pub fn new<P, R>(universe: Universe, points: P, rel: R) -> Result<Self>
    where
        P: IntoIterator<Item = Point>,
        R: IntoIterator<Item = (Point, Point)>,
    {
        universe.validate()?;
        let set: BTreeSet<Point> = points.into_iter().collect();
        for &p in &set {
            if !universe.contains(p) {
                return Err(Error::OutOfBounds(p));
            }
        }
        let points: Vec<Point> = set.into_iter().collect();
        let n = points.len();
        let mut ord = HeightedOrder {
            universe,
            points,
            le: vec![false; n * n],
        };
        for (x, y) in rel {
            for p in [x, y] {
                if !universe.contains(p) {
                    return Err(Error::OutOfBounds(p));
                }
            }
            let (Some(i), Some(j)) = (ord.index_of(x), ord.index_of(y)) else {
                return Err(Error::Malformed(format!(
                    "relation pair ({x}, {y}) is not inside the domain"
                )));
            };
            ord.le[i * n + j] = true;
        }
        Ok(ord)
    }

    /// Builds the relation and restores every reflexive pair.
    pub fn with_reflexive<P, R>(universe: Universe, points: P, rel: R) -> Result<Self>
    where
        P: IntoIterator<Item = Point>,
        R: IntoIterator<Item = (Point, Point)>,
    {
        let mut ord = Self::new(universe, points, rel)?;
        let n = ord.len();
        for i in 0..n {
            ord.le[i * n + i] = true;
        }
        Ok(ord)
    }

    /// The discrete order: only reflexive pairs.
    pub fn discrete<P: IntoIterator<Item = Point>>(universe: Universe, points: P) -> Result<Self> {
        Self::with_reflexive(universe, points, std::iter::empty())
    }

    pub fn empty(universe: Universe) -> Self {
        HeightedOrder {
            universe,
            points: Vec::new(),
            le: Vec::new(),
        }
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    /// The domain, sorted by height.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: Point) -> bool {
        self.index_of(p).is_some()
    }

    pub fn index_of(&self, p: Point) -> Option<usize> {
        self.points.binary_search(&p).ok()
    }

    #[inline]
    pub fn le_idx(&self, i: usize, j: usize) -> bool {
        self.le[i * self.points.len() + j]
    }

    /// `x ⊴ y`. False when either point is outside the domain.
    pub fn le(&self, x: Point, y: Point) -> bool {
        match (self.index_of(x), self.index_of(y)) {
            (Some(i), Some(j)) => self.le_idx(i, j),
            _ => false,
        }
    }

    /// `x ⊴ y` and `x ≠ y`.
    pub fn lt(&self, x: Point, y: Point) -> bool {
        x != y && self.le(x, y)
    }

    /// Every related pair, reflexive ones included.
    pub fn pairs(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.points.len();
        (0..n * n)
            .filter(move |&k| self.le[k])
            .map(move |k| (self.points[k / n], self.points[k % n]))
    }

    /// Related pairs with distinct endpoints.
    pub fn strict_pairs(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.pairs().filter(|(x, y)| x != y)
    }

    pub fn heights(&self) -> BTreeSet<u32> {
        self.points.iter().map(|p| p.beta).collect()
    }

    /// Indices of the points below `points[i]`, `i` included when reflexive.
    pub fn below_idx(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.points.len()).filter(move |&k| self.le_idx(k, i))
    }

    pub fn up_set(&self, x: Point) -> Result<BTreeSet<Point>> {
        let i = self.index_of(x).ok_or(Error::NotFound(x))?;
        Ok((0..self.len())
            .filter(|&k| self.le_idx(i, k))
            .map(|k| self.points[k])
            .collect())
    }

    /// The order restricted to `keep ∩ domain`.
    pub fn restrict(&self, keep: &BTreeSet<Point>) -> HeightedOrder {
        let pts: Vec<Point> = self.points.iter().copied().filter(|p| keep.contains(p)).collect();
        let rel: Vec<(Point, Point)> = self
            .pairs()
            .filter(|(x, y)| keep.contains(x) && keep.contains(y))
            .collect();
        HeightedOrder::new(self.universe, pts, rel).expect("restriction of a well-formed order")
    }

    /// Adds `p` to the domain together with the given extra pairs.
    pub fn extended<R>(&self, new_points: &[Point], extra: R) -> Result<HeightedOrder>
    where
        R: IntoIterator<Item = (Point, Point)>,
    {
        let pts = self.points.iter().chain(new_points.iter()).copied();
        let rel = self.pairs().chain(extra);
        HeightedOrder::new(self.universe, pts, rel)
    }

    /// Reflexive-transitive closure (Warshall).
    pub fn closure(&self) -> HeightedOrder {
        let n = self.len();
        let mut le = self.le.clone();
        for i in 0..n {
            le[i * n + i] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if le[i * n + k] {
                    for j in 0..n {
                        if le[k * n + j] {
                            le[i * n + j] = true;
                        }
                    }
                }
            }
        }
        HeightedOrder {
            universe: self.universe,
            points: self.points.clone(),
            le,
        }
    }

    /// Same relation on the same points, over a different universe.
    pub fn with_universe(&self, universe: Universe) -> Result<HeightedOrder> {
        HeightedOrder::new(universe, self.points.iter().copied(), self.pairs())
    }
}

/// Reflexivity, antisymmetry and transitivity, checked in that order.
pub fn check_partial_order(ord: &HeightedOrder) -> Outcome {
    let n = ord.len();
    let p = ord.points();
    if let Some(i) = (0..n).find(|&i| !ord.le_idx(i, i)) {
        return Err(Violation::NotReflexive(p[i]));
    }
    for i in 0..n {
        for j in i + 1..n {
            if ord.le_idx(i, j) && ord.le_idx(j, i) {
                return Err(Violation::NotAntisymmetric(p[i], p[j]));
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j || !ord.le_idx(i, j) {
                continue;
            }
            for k in 0..n {
                if k != j && ord.le_idx(j, k) && !ord.le_idx(i, k) {
                    return Err(Violation::NotTransitive(p[i], p[j], p[k]));
                }
            }
        }
    }
    Ok(())
}

/// Condition (A): strict relatedness forces a strictly smaller height.
pub fn check_condition_a(ord: &HeightedOrder) -> Outcome {
    for (x, y) in ord.strict_pairs() {
        if x.beta >= y.beta {
            return Err(Violation::HeightNotIncreasing { below: x, above: y });
        }
    }
    Ok(())
}

/// Condition (B) with "infinitely many" read as "at least `fanout`".
///
/// Every level `β < height(y)` of the universe is quantified, including
/// levels that hold no domain point; such failures are flagged as
/// `level_empty` in the witness.
pub fn check_condition_b(ord: &HeightedOrder) -> Outcome {
    let required = ord.universe().fanout as usize;
    let mut per_level: BTreeMap<u32, usize> = BTreeMap::new();
    for p in ord.points() {
        *per_level.entry(p.beta).or_default() += 1;
    }
    for (j, &y) in ord.points().iter().enumerate() {
        let mut counts = vec![0usize; y.beta as usize];
        for i in ord.below_idx(j) {
            let b = ord.points()[i].beta;
            if b < y.beta {
                counts[b as usize] += 1;
            }
        }
        for (level, &found) in counts.iter().enumerate() {
            if found < required {
                let level = level as u32;
                return Err(Violation::FanoutShort {
                    top: y,
                    level,
                    found,
                    required,
                    level_empty: !per_level.contains_key(&level),
                });
            }
        }
    }
    Ok(())
}

/// The cone `C(x) = { z in domain : z ⊴ x }`.
pub fn down_set(ord: &HeightedOrder, x: Point) -> Result<BTreeSet<Point>> {
    let i = ord.index_of(x).ok_or(Error::NotFound(x))?;
    Ok(ord.below_idx(i).map(|k| ord.points()[k]).collect())
}

fn pair_indices(ord: &HeightedOrder, x: Point, y: Point) -> Result<(usize, usize)> {
    if x == y {
        return Err(Error::InvalidPair(format!("{x} paired with itself")));
    }
    let i = ord.index_of(x).ok_or(Error::NotFound(x))?;
    let j = ord.index_of(y).ok_or(Error::NotFound(y))?;
    Ok((i, j))
}

/// Barrier test for a pair given by domain indices.
pub(crate) fn barrier_outcome(
    ord: &HeightedOrder,
    i: usize,
    j: usize,
    candidate: &BTreeSet<Point>,
) -> Outcome {
    let p = ord.points();
    let (x, y) = (p[i], p[j]);
    let mut cand_idx = Vec::with_capacity(candidate.len());
    for &c in candidate {
        match ord.index_of(c) {
            Some(k) if ord.le_idx(k, i) && ord.le_idx(k, j) => cand_idx.push(k),
            _ => return Err(Violation::BarrierNotBelow(x, y, c)),
        }
    }
    for (t, &pt) in p.iter().enumerate() {
        if ord.le_idx(t, i) && ord.le_idx(t, j) && !cand_idx.iter().any(|&c| ord.le_idx(t, c)) {
            return Err(Violation::BarrierMissesLowerBound(x, y, pt));
        }
    }
    Ok(())
}

/// Clauses (C.1) and (C.2) for one pair and one candidate set.
pub fn is_barrier(ord: &HeightedOrder, x: Point, y: Point, candidate: &BTreeSet<Point>) -> Result<()> {
    let (i, j) = pair_indices(ord, x, y)?;
    barrier_outcome(ord, i, j, candidate)?;
    Ok(())
}

pub(crate) fn minimal_barrier_idx(ord: &HeightedOrder, i: usize, j: usize) -> BTreeSet<Point> {
    let n = ord.len();
    let cone: Vec<usize> = (0..n).filter(|&t| ord.le_idx(t, i) && ord.le_idx(t, j)).collect();
    cone.iter()
        .copied()
        .filter(|&t| !cone.iter().any(|&s| s != t && ord.le_idx(t, s)))
        .map(|t| ord.points()[t])
        .collect()
}

/// The ⊴-maximal elements of the common lower cone of `x` and `y`.
pub fn minimal_barrier(ord: &HeightedOrder, x: Point, y: Point) -> Result<BTreeSet<Point>> {
    let (i, j) = pair_indices(ord, x, y)?;
    Ok(minimal_barrier_idx(ord, i, j))
}

/// An unordered pair of distinct points, stored low-first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointPair(Point, Point);

impl PointPair {
    pub fn new(x: Point, y: Point) -> Option<Self> {
        match x.cmp(&y) {
            std::cmp::Ordering::Less => Some(PointPair(x, y)),
            std::cmp::Ordering::Greater => Some(PointPair(y, x)),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn low(&self) -> Point {
        self.0
    }

    pub fn high(&self) -> Point {
        self.1
    }
}

/// A finite function from unordered pairs of points to barrier sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BarrierMap {
    entries: BTreeMap<PointPair, BTreeSet<Point>>,
}

impl BarrierMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Minimal barriers for every pair of the domain.
    pub fn canonical(ord: &HeightedOrder) -> Self {
        let mut map = BarrierMap::new();
        let p = ord.points();
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                map.entries
                    .insert(PointPair(p[i], p[j]), minimal_barrier_idx(ord, i, j));
            }
        }
        map
    }

    /// Sets the barrier of `{x, y}`; returns the previous entry.
    pub fn insert(&mut self, x: Point, y: Point, set: BTreeSet<Point>) -> Result<Option<BTreeSet<Point>>> {
        let key = PointPair::new(x, y)
            .ok_or_else(|| Error::InvalidPair(format!("barrier key {{{x}, {x}}} is not a pair")))?;
        Ok(self.entries.insert(key, set))
    }

    pub fn get(&self, x: Point, y: Point) -> Option<&BTreeSet<Point>> {
        PointPair::new(x, y).and_then(|k| self.entries.get(&k))
    }

    /// Like [`BarrierMap::get`], with the convention `b({x, x}) = {x}`.
    pub fn get_or_diagonal(&self, x: Point, y: Point) -> Option<BTreeSet<Point>> {
        if x == y {
            Some(BTreeSet::from([x]))
        } else {
            self.get(x, y).cloned()
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (PointPair, &BTreeSet<Point>)> {
        self.entries.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// True when every entry of `self` is present, unchanged, in `other`.
    pub fn is_extended_by(&self, other: &BarrierMap) -> bool {
        self.entries
            .iter()
            .all(|(k, v)| other.entries.get(k).is_some_and(|w| w == v))
    }

    /// Entries whose pair lies inside `keep`.
    pub fn restrict(&self, keep: &BTreeSet<Point>) -> BarrierMap {
        BarrierMap {
            entries: self
                .entries
                .iter()
                .filter(|(k, _)| keep.contains(&k.0) && keep.contains(&k.1))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }

    /// Rewrites every pair and barrier element through `f`.
    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Result<BarrierMap> {
        let mut out = BarrierMap::new();
        for (k, v) in &self.entries {
            out.insert(f(k.0), f(k.1), v.iter().map(|&p| f(p)).collect())?;
        }
        Ok(out)
    }

    /// Domain check: entries exist exactly for the pairs of `ord`'s domain.
    pub fn check_total(&self, ord: &HeightedOrder) -> Result<()> {
        for k in self.entries.keys() {
            if !ord.contains(k.0) || !ord.contains(k.1) {
                return Err(Error::StrayBarrierEntry(k.0, k.1));
            }
        }
        let p = ord.points();
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if !self.entries.contains_key(&PointPair(p[i], p[j])) {
                    return Err(Error::IncompleteBarrierMap(p[i], p[j]));
                }
            }
        }
        Ok(())
    }
}

/// Totality plus the barrier property for every entry.
pub fn check_barrier_map(ord: &HeightedOrder, bmap: &BarrierMap) -> Result<()> {
    bmap.check_total(ord)?;
    let p = ord.points();
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            let cand = bmap.get(p[i], p[j]).expect("checked total");
            barrier_outcome(ord, i, j, cand)?;
        }
    }
    Ok(())
}

/// Partial order, (A), and a valid total barrier map: everything but (B).
pub fn check_frame(ord: &HeightedOrder, bmap: &BarrierMap) -> Result<()> {
    bmap.check_total(ord)?;
    check_partial_order(ord)?;
    check_condition_a(ord)?;
    check_barrier_map(ord, bmap)
}

/// Full admissibility: partial order, (A), (B), and the barrier map.
pub fn check_admissible(ord: &HeightedOrder, bmap: &BarrierMap) -> Result<()> {
    bmap.check_total(ord)?;
    check_partial_order(ord)?;
    check_condition_a(ord)?;
    check_condition_b(ord)?;
    check_barrier_map(ord, bmap)
}
