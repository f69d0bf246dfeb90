//! Schedules, their validation, and the objective.

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::Problem;

/// Acceptance flags plus 1-based positions for accepted actions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub accepted: Vec<bool>,
    pub positions: Vec<Option<usize>>,
}

impl Schedule {
    pub fn new(accepted: Vec<bool>, positions: Vec<Option<usize>>) -> Self {
        Schedule {
            accepted,
            positions,
        }
    }

    pub fn all_rejected(n: usize) -> Self {
        Schedule::new(vec![false; n], vec![None; n])
    }

    pub fn len(&self) -> usize {
        self.accepted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accepted.is_empty()
    }

    pub fn accepted_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.accepted
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `from` accepted while its dependency `to` is rejected.
    Dependency {
        from: usize,
        to: usize,
    },
    /// Both accepted but `before` is not strictly earlier than `after`.
    Precedence {
        before: usize,
        after: usize,
        pos_before: usize,
        pos_after: usize,
    },
    PositionOutOfRange {
        action: usize,
        position: usize,
    },
    MissingPosition {
        action: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::Dependency { from, to } => {
                write!(
                    f,
                    "dependency {from} => {to}: {from} accepted, {to} rejected"
                )
            }
            Violation::Precedence {
                before,
                after,
                pos_before,
                pos_after,
            } => write!(
                f,
                "precedence {before} < {after}: positions {pos_before} and {pos_after}"
            ),
            Violation::PositionOutOfRange { action, position } => {
                write!(f, "action {action} at position {position} outside 1..n")
            }
            Violation::MissingPosition { action } => {
                write!(f, "action {action} accepted without a position")
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("schedule covers {found} actions, instance has {expected}")]
pub struct SizeMismatch {
    pub expected: usize,
    pub found: usize,
}

/// Lists every violated constraint of `schedule`; an empty list means valid.
pub fn check_schedule(
    problem: &Problem,
    schedule: &Schedule,
) -> Result<Vec<Violation>, SizeMismatch> {
    let n = problem.len();
    if schedule.accepted.len() != n || schedule.positions.len() != n {
        return Err(SizeMismatch {
            expected: n,
            found: schedule.accepted.len().max(schedule.positions.len()),
        });
    }
    let accepted = &schedule.accepted;
    let mut violations = Vec::new();
    for action in 0..n {
        if !accepted[action] {
            continue;
        }
        match schedule.positions[action] {
            None => violations.push(Violation::MissingPosition { action }),
            Some(position) if position < 1 || position > n => {
                violations.push(Violation::PositionOutOfRange { action, position })
            }
            Some(_) => {}
        }
    }
    for &(from, to) in problem.deps() {
        if accepted[from] && !accepted[to] {
            violations.push(Violation::Dependency { from, to });
        }
    }
    for &(before, after) in problem.precs() {
        if !(accepted[before] && accepted[after]) {
            continue;
        }
        if let (Some(pb), Some(pa)) = (schedule.positions[before], schedule.positions[after]) {
            if pb >= pa {
                violations.push(Violation::Precedence {
                    before,
                    after,
                    pos_before: pb,
                    pos_after: pa,
                });
            }
        }
    }
    Ok(violations)
}

/// Number of accepted actions.
pub fn objective(schedule: &Schedule) -> usize {
    schedule.accepted.iter().filter(|&&a| a).count()
}

/// Topological order of the accepted actions under the active precedences,
/// or `None` when that subgraph has a cycle (self loops included).
pub(crate) fn accepted_topological_order(
    problem: &Problem,
    accepted: &[bool],
) -> Option<Vec<usize>> {
    let n = problem.len();
    let mut indegree = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for &(i, j) in problem.precs() {
        if accepted[i] && accepted[j] {
            if i == j {
                return None;
            }
            succ[i].push(j);
            indegree[j] += 1;
        }
    }
    let mut order: Vec<usize> = (0..n)
        .filter(|&i| accepted[i] && indegree[i] == 0)
        .collect();
    let mut head = 0;
    while head < order.len() {
        let i = order[head];
        head += 1;
        for &j in &succ[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                order.push(j);
            }
        }
    }
    let total = accepted.iter().filter(|&&a| a).count();
    (order.len() == total).then_some(order)
}

/// True iff the accepted set is closed under dependencies and its
/// precedence subgraph is acyclic.
pub fn feasible_subset(problem: &Problem, accepted: &[bool]) -> bool {
    assert_eq!(accepted.len(), problem.len(), "acceptance vector length");
    problem
        .deps()
        .iter()
        .all(|&(i, j)| !accepted[i] || accepted[j])
        && accepted_topological_order(problem, accepted).is_some()
}

/// Summary of one solver run, shaped after the benchmark table columns.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub first_value: usize,
    pub first_time: Duration,
    pub best_value: usize,
    pub best_time: Duration,
    pub proved_optimal: bool,
    pub total_time: Duration,
    /// Search nodes for the exact solver, iterations for local search.
    pub nodes_or_iterations: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn positions(p: &[usize]) -> Vec<Option<usize>> {
        p.iter().map(|&x| (x > 0).then_some(x)).collect()
    }

    #[test]
    fn unconstrained_identity_is_valid() {
        let p = Problem::new(4, [], []).unwrap();
        let s = Schedule::new(vec![true; 4], positions(&[1, 2, 3, 4]));
        assert_eq!(check_schedule(&p, &s).unwrap(), vec![]);
        assert_eq!(objective(&s), 4);
    }

    #[test]
    fn reversed_precedence_is_one_violation() {
        let p = Problem::new(2, [], [(0, 1)]).unwrap();
        let s = Schedule::new(vec![true, true], positions(&[2, 1]));
        assert_eq!(
            check_schedule(&p, &s).unwrap(),
            vec![Violation::Precedence {
                before: 0,
                after: 1,
                pos_before: 2,
                pos_after: 1
            }]
        );
    }

    #[test]
    fn broken_dependency_closure() {
        let p = Problem::new(2, [(0, 1)], []).unwrap();
        let s = Schedule::new(vec![true, false], positions(&[1, 0]));
        assert_eq!(
            check_schedule(&p, &s).unwrap(),
            vec![Violation::Dependency { from: 0, to: 1 }]
        );
    }

    #[test]
    fn position_problems_and_size_mismatch() {
        let p = Problem::new(3, [], []).unwrap();
        let s = Schedule::new(vec![true, true, false], vec![None, Some(4), None]);
        let v = check_schedule(&p, &s).unwrap();
        assert_eq!(
            v,
            vec![
                Violation::MissingPosition { action: 0 },
                Violation::PositionOutOfRange {
                    action: 1,
                    position: 4
                }
            ]
        );
        let short = Schedule::all_rejected(2);
        assert_eq!(
            check_schedule(&p, &short),
            Err(SizeMismatch {
                expected: 3,
                found: 2
            })
        );
    }

    #[test]
    fn self_precedence_cannot_be_accepted() {
        let p = Problem::new(1, [], [(0, 0)]).unwrap();
        let s = Schedule::new(vec![true], vec![Some(1)]);
        assert_eq!(check_schedule(&p, &s).unwrap().len(), 1);
        assert!(!feasible_subset(&p, &[true]));
        assert!(feasible_subset(&p, &[false]));
    }

    #[test]
    fn objective_counts() {
        assert_eq!(objective(&Schedule::all_rejected(5)), 0);
        let s = Schedule::new(vec![true, false, true, true, false], vec![None; 5]);
        assert_eq!(objective(&s), 3);
    }

    #[test]
    fn feasibility_examples() {
        let p = Problem::new(2, [], [(0, 1), (1, 0)]).unwrap();
        assert!(feasible_subset(&p, &[false, false]));
        assert!(!feasible_subset(&p, &[true, true]));
        assert!(feasible_subset(&p, &[true, false]));
        let d = Problem::new(2, [(0, 1)], []).unwrap();
        assert!(!feasible_subset(&d, &[true, false]));
        assert!(feasible_subset(&d, &[false, true]));
    }
}
