//! Property violations with minimal witnesses.
//!
//! Every checker in the crate reports failure as one of these variants. The
//! payload is always the smallest piece of the input that exhibits the
//! failure, so that shrinking property tests converge on readable cases.

use thiserror::Error;

use crate::order::Point;

/// Outcome of a checker: `Ok(())` or the first violation found.
pub type Outcome = Result<(), Violation>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("not reflexive at {0}")]
    NotReflexive(Point),

    #[error("not antisymmetric: {0} and {1} are related both ways")]
    NotAntisymmetric(Point, Point),

    #[error("not transitive: {0} <= {1} <= {2} but not {0} <= {2}")]
    NotTransitive(Point, Point, Point),

    #[error("condition (A): {below} < {above} without a height increase")]
    HeightNotIncreasing { below: Point, above: Point },

    #[error(
        "condition (B): {top} has {found} points below it at level {level}, needs {required}{}",
        if *level_empty { " (level holds no domain points)" } else { "" }
    )]
    FanoutShort {
        top: Point,
        level: u32,
        found: usize,
        required: usize,
        level_empty: bool,
    },

    #[error("barrier for {{{0}, {1}}}: element {2} is not below both")]
    BarrierNotBelow(Point, Point, Point),

    #[error("barrier for {{{0}, {1}}}: common lower bound {2} is not below any element")]
    BarrierMissesLowerBound(Point, Point, Point),

    #[error("level mismatch: {point} has rank {rank} but height {height}")]
    LevelMismatch { point: Point, rank: u32, height: u32 },

    #[error("space is not scattered: {0} points survive derivation")]
    NotScattered(usize),

    #[error("separation of {0} from {1} failed")]
    SeparationFailed(Point, Point),

    #[error("cover reduction: {0} is in C(x) minus B but under no barrier element")]
    CoverNotReduced(Point),

    #[error("cover reduction: barrier element {0} is not strictly below {1}")]
    CoverElementNotLower(Point, Point),

    #[error("amalgam disagrees with the defining clauses at ({0}, {1}): expected {2}")]
    AmalgamMismatch(Point, Point, bool),

    #[error("amalgam domain differs from the union of the input domains at {0}")]
    AmalgamDomain(Point),

    #[error("isomorphism is not order preserving at ({0}, {1})")]
    NotOrderPreserving(Point, Point),

    #[error("isomorphism moves {0}, which lies in both domains")]
    IntersectionNotFixed(Point),

    #[error("isomorphism does not carry the barrier of {{{0}, {1}}} onto its image")]
    BarrierNotPreserved(Point, Point),

    #[error("progressive clause (+): {0} maps to {1}")]
    ProgressiveHeight(Point, Point),

    #[error("progressive clause (-): {0} has a height used by the target domain but is moved")]
    ProgressiveCollision(Point),

    #[error("progressive clause (x): barriers of {{{0}, {1}}} differ between the inputs")]
    ProgressiveBarrier(Point, Point),

    #[error("node {0}: delta is inconsistent with its elements")]
    DeltaInconsistent(u32),

    #[error("node {member} is a member of node {container} but {reason}")]
    MembershipMalformed {
        member: u32,
        container: u32,
        reason: &'static str,
    },

    #[error("clause (B): nodes {0} and {1} share a delta but differ in size")]
    SymmetrySize(u32, u32),

    #[error("clause (B): the isomorphism from node {0} to node {1} moves shared ordinal {2}")]
    SymmetryMovesShared(u32, u32, u32),

    #[error("clause (C): node {low} has no copy of level {level} containing it (witness node {high})")]
    SymmetryNoContainer { low: u32, high: u32, level: u32 },

    #[error("clause (D): the image of member {member} under the isomorphism from {from} to {to} is not a node")]
    SymmetryNoImage { member: u32, from: u32, to: u32 },

    #[error("gap witness violates clause ({clause}) against node {node}")]
    GapWitness { clause: char, node: u32 },

    #[error("clause (4): marked node {0} is not in the system")]
    MarkedNotInSystem(u32),

    #[error("clause (5): marked node {0} has no point view")]
    MissingPointView(u32),

    #[error("clause (5): node {node} holds {x} and {y} but their barrier element {element} escapes it")]
    BarrierEscapesNode {
        node: u32,
        x: Point,
        y: Point,
        element: Point,
    },

    #[error("condition does not extend its predecessor: {0}")]
    NotExtension(&'static str),
}
