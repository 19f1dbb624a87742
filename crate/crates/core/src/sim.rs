//! Simulated genericity: grow a chain of conditions that meets a finite
//! density schedule.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::condition::{add_point, add_top_point, chain_union, extends, validate, Condition};
use crate::error::{Error, Result};
use crate::order::{minimal_barrier, Point, Universe};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Goal {
    /// The point is in the domain.
    Cover(Point),
    /// Some point at `level` lies below `target`.
    RelateBelow { target: Point, level: u32 },
    /// At least `m` points at `level` lie below `target`.
    Fanout { target: Point, level: u32, m: u32 },
}

impl std::fmt::Display for Goal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Goal::Cover(p) => write!(f, "cover{p}"),
            Goal::RelateBelow { target, level } => write!(f, "relate-below({target}, {level})"),
            Goal::Fanout { target, level, m } => write!(f, "fanout({target}, {level}, {m})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensitySchedule {
    pub universe: Universe,
    pub goals: Vec<Goal>,
}

impl DensitySchedule {
    pub fn validate(&self) -> Result<()> {
        self.universe.validate()?;
        let u = self.universe;
        for g in &self.goals {
            let (target, level) = match *g {
                Goal::Cover(p) => (p, 0),
                Goal::RelateBelow { target, level } | Goal::Fanout { target, level, .. } => (target, level),
            };
            if !u.contains(target) {
                return Err(Error::Malformed(format!("goal {g} lies outside the universe")));
            }
            if !matches!(g, Goal::Cover(_)) && level >= target.beta {
                return Err(Error::Malformed(format!("goal {g} asks for a level not below its target")));
            }
        }
        Ok(())
    }
}

/// Every point covered, and fan-out `m` one level down from every point of
/// positive height. Heights are visited bottom-up, so each fan-out goal finds
/// its level fully covered.
pub fn full_schedule(universe: Universe) -> Result<DensitySchedule> {
    universe.validate()?;
    let m = universe.fanout;
    if m > universe.width {
        return Err(Error::Infeasible {
            goal: "full schedule".into(),
            reason: format!("fan-out {m} exceeds width {}", universe.width),
        });
    }
    let mut goals = Vec::new();
    for beta in 0..universe.height_bound {
        for alpha in 0..universe.width {
            let p = Point::new(alpha, beta);
            if beta > 0 {
                goals.push(Goal::Fanout {
                    target: p,
                    level: beta - 1,
                    m,
                });
            }
            goals.push(Goal::Cover(p));
        }
    }
    Ok(DensitySchedule { universe, goals })
}

#[derive(Debug, Clone)]
pub struct SimRun {
    pub chain: Vec<Condition>,
    pub result: Condition,
    /// Relation insertions that were attempted and rolled back.
    pub rollbacks: usize,
}

struct Runner {
    rng: ChaCha8Rng,
    rollbacks: usize,
}

fn level_points(q: &Condition, level: u32) -> Vec<Point> {
    q.order.points().iter().copied().filter(|p| p.beta == level).collect()
}

fn free_slots(q: &Condition, level: u32) -> Vec<Point> {
    (0..q.universe().width)
        .map(|a| Point::new(a, level))
        .filter(|p| !q.order.contains(*p))
        .collect()
}

fn below_at(q: &Condition, target: Point, level: u32) -> usize {
    level_points(q, level)
        .into_iter()
        .filter(|&p| q.order.le(p, target))
        .count()
}

impl Runner {
    /// Best-effort insertion of `x ⊴ y` between existing points, with
    /// barriers recomputed for the pairs whose common cone changed. Kept only
    /// when the result is a condition extending `q`.
    fn try_relate(&mut self, q: &Condition, x: Point, y: Point) -> Option<Condition> {
        let below = crate::order::down_set(&q.order, x).ok()?;
        let above = q.order.up_set(y).ok()?;
        let extra: Vec<(Point, Point)> = below
            .iter()
            .flat_map(|&u| above.iter().map(move |&v| (u, v)))
            .collect();
        let order = q.order.extended(&[], extra).ok()?;
        let mut barriers = q.barriers.clone();
        let pts = order.points();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let (a, b) = (pts[i], pts[j]);
                if above.contains(&a) || above.contains(&b) {
                    barriers.insert(a, b, minimal_barrier(&order, a, b).ok()?).ok()?;
                }
            }
        }
        let cand = Condition {
            order,
            barriers,
            ..q.clone()
        };
        if validate(&cand).is_ok() && extends(&cand, q) {
            Some(cand)
        } else {
            self.rollbacks += 1;
            None
        }
    }

    /// Adds one more point at `level` below `target`, which is in the domain.
    fn grow_below(&mut self, q: &Condition, goal: Goal, target: Point, level: u32) -> Result<Condition> {
        let mut slots = free_slots(q, level);
        if let Some(&p) = slots.choose(&mut self.rng) {
            return add_point(q, p, target);
        }
        slots = level_points(q, level)
            .into_iter()
            .filter(|&p| !q.order.le(p, target))
            .collect();
        slots.shuffle(&mut self.rng);
        for p in slots {
            if let Some(next) = self.try_relate(q, p, target) {
                return Ok(next);
            }
        }
        Err(Error::Infeasible {
            goal: goal.to_string(),
            reason: format!("no free point at level {level} and no admissible relation"),
        })
    }

    fn step(&mut self, q: &Condition, goal: Goal) -> Result<Vec<Condition>> {
        let width = q.universe().width;
        let (target, level, m) = match goal {
            Goal::Cover(p) => {
                if q.order.contains(p) {
                    return Ok(vec![]);
                }
                return Ok(vec![add_top_point(q, p, &BTreeSet::new())?]);
            }
            Goal::RelateBelow { target, level } => (target, level, 1),
            Goal::Fanout { target, level, m } => (target, level, m),
        };
        if m > width {
            return Err(Error::Infeasible {
                goal: goal.to_string(),
                reason: format!("needs {m} points at one level but the width is {width}"),
            });
        }
        let mut links = Vec::new();
        let mut cur = q.clone();
        if !cur.order.contains(target) {
            let mut pool = level_points(&cur, level);
            pool.shuffle(&mut self.rng);
            pool.truncate(m as usize);
            let lower: BTreeSet<Point> = pool.into_iter().collect();
            cur = add_top_point(&cur, target, &lower)?;
            links.push(cur.clone());
        }
        while below_at(&cur, target, level) < m as usize {
            cur = self.grow_below(&cur, goal, target, level)?;
            links.push(cur.clone());
        }
        Ok(links)
    }
}

/// Runs the goals in order from `seed`, one chain link per extension step.
/// The rng only breaks ties, so a fixed `rng_seed` gives a fixed chain.
pub fn run_schedule(seed: &Condition, sched: &DensitySchedule, rng_seed: u64) -> Result<SimRun> {
    sched.validate()?;
    if seed.universe() != sched.universe {
        return Err(Error::InvalidInput("seed and schedule use different universes".into()));
    }
    validate(seed)?;
    let mut runner = Runner {
        rng: ChaCha8Rng::seed_from_u64(rng_seed),
        rollbacks: 0,
    };
    let mut chain = vec![seed.clone()];
    for &goal in &sched.goals {
        let cur = chain.last().expect("chain starts with the seed");
        let links = runner.step(cur, goal)?;
        chain.extend(links);
    }
    let result = chain_union(&chain)?;
    Ok(SimRun {
        chain,
        result,
        rollbacks: runner.rollbacks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::order::check_admissible;
    use crate::space::verify_levels;

    fn empty(u: Universe) -> Condition {
        Condition::empty(u, 1)
    }

    #[test]
    fn schedule_sizes() {
        let count = |u: Universe| {
            let s = full_schedule(u).unwrap();
            let covers = s.goals.iter().filter(|g| matches!(g, Goal::Cover(_))).count();
            (covers, s.goals.len() - covers)
        };
        assert_eq!(count(Universe::new(1, 1, 1).unwrap()), (1, 0));
        assert_eq!(count(Universe::new(2, 2, 1).unwrap()), (4, 2));
        assert_eq!(count(Universe::new(4, 3, 2).unwrap()), (12, 8));
        assert!(matches!(
            full_schedule(Universe::new(3, 2, 4).unwrap()),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn empty_schedule_returns_the_seed() {
        let u = Universe::new(2, 2, 1).unwrap();
        let run = run_schedule(&empty(u), &DensitySchedule { universe: u, goals: vec![] }, 0).unwrap();
        assert_eq!(run.result, empty(u));
    }

    #[test]
    fn full_run_is_admissible() {
        let u = Universe::new(3, 2, 2).unwrap();
        let run = run_schedule(&empty(u), &full_schedule(u).unwrap(), 7).unwrap();
        assert_eq!(run.result.order.len(), 6);
        check_admissible(&run.result.order, &run.result.barriers).unwrap();
        assert_eq!(verify_levels(&run.result.order), Ok(()));
        for w in run.chain.windows(2) {
            assert!(extends(&w[1], &w[0]));
        }
    }

    #[test]
    fn oversized_fanout_goal_is_infeasible() {
        let u = Universe::new(3, 2, 1).unwrap();
        let goals = vec![Goal::Fanout {
            target: Point::new(0, 1),
            level: 0,
            m: 4,
        }];
        let err = run_schedule(&empty(u), &DensitySchedule { universe: u, goals }, 0).unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }));
    }

    #[test]
    fn runs_are_deterministic() {
        let u = Universe::new(4, 3, 2).unwrap();
        let s = full_schedule(u).unwrap();
        let a = run_schedule(&empty(u), &s, 11).unwrap();
        let b = run_schedule(&empty(u), &s, 11).unwrap();
        assert_eq!(a.chain, b.chain);
    }

    #[test]
    fn relation_insertion_rolls_back() {
        // a full level leaves only insertion between existing points
        let u = Universe::new(2, 2, 1).unwrap();
        let goals = vec![
            Goal::Cover(Point::new(0, 0)),
            Goal::Cover(Point::new(1, 0)),
            Goal::Fanout {
                target: Point::new(0, 1),
                level: 0,
                m: 1,
            },
            Goal::Fanout {
                target: Point::new(0, 1),
                level: 0,
                m: 2,
            },
        ];
        let err = run_schedule(&empty(u), &DensitySchedule { universe: u, goals }, 3).unwrap_err();
        assert!(matches!(err, Error::Infeasible { .. }));
    }
}
