//! Local search over position vectors for precedence-only instances.
//!
//! A state assigns every action a position in `[1, n]`, accepted or not. A
//! violated precedence `p_i >= p_j` costs `1 + (p_i - p_j)`; the sum of
//! these errors is the evaluation that guides the moves, which shift one
//! action by one position. Two measures relate a state to the real
//! objective:
//!
//! * the *value*, the number of actions with no violated incident
//!   precedence, and
//! * the *cost*, the number of actions left after repeatedly removing the
//!   action with the most violated precedences among remaining actions.
//!
//! The survivors of the cost computation are always an acceptable set, and
//! value ≤ cost ≤ n.
//!
//! [`descent`] sweeps the actions in index order, applying strictly
//! improving moves, until a sweep changes nothing. [`tabu_search`] keeps
//! sweeping: an action found at a local minimum becomes Tabu for a random
//! number of iterations, Tabu actions only move when that beats the best
//! cost seen, and when no action can move a random action takes a random
//! step.

use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cp::earliest_positions;
use crate::problem::Problem;
use crate::solution::{Schedule, SolveStats};

pub const DEFAULT_TABU_MAX: u32 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LsMode {
    Descent,
    Tabu,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LsParams {
    pub tabu_max: u32,
    /// Sweeps for descent, single-action move attempts for Tabu search.
    pub max_iterations: u64,
    pub rng_seed: u64,
    pub mode: LsMode,
    pub warm_start: Option<Vec<usize>>,
    pub time_limit: Option<Duration>,
}

impl LsParams {
    pub fn descent() -> Self {
        LsParams {
            tabu_max: DEFAULT_TABU_MAX,
            max_iterations: u64::MAX,
            rng_seed: 0,
            mode: LsMode::Descent,
            warm_start: None,
            time_limit: None,
        }
    }

    pub fn tabu(seed: u64, max_iterations: u64) -> Self {
        LsParams {
            tabu_max: DEFAULT_TABU_MAX,
            max_iterations,
            rng_seed: seed,
            mode: LsMode::Tabu,
            warm_start: None,
            time_limit: None,
        }
    }

    /// The `10·n²` move budget used for benchmarking.
    pub fn budget_for(n: usize) -> u64 {
        10 * (n as u64) * (n as u64)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LsError {
    #[error(
        "local search handles precedence-only instances; this one has {count} dependency constraints"
    )]
    HasDependencies { count: usize },
    #[error("warm start has {found} positions, instance has {expected} actions")]
    WarmStartLength { expected: usize, found: usize },
    #[error("warm start puts action {action} at {position}, outside 1..={n}")]
    WarmStartRange {
        action: usize,
        position: usize,
        n: usize,
    },
    #[error("maximum Tabu tenure must be at least 1")]
    ZeroTabuMax,
    #[error("Tabu search called with descent parameters")]
    WrongMode,
}

/// Error of the precedence `p_i < p_j` at the given positions.
#[inline]
pub fn constraint_error(pi: usize, pj: usize) -> u64 {
    if pi < pj {
        0
    } else {
        1 + (pi - pj) as u64
    }
}

const NOT_VIOLATED: usize = usize::MAX;

/// Full position vector with incrementally maintained errors.
#[derive(Debug, Clone)]
pub struct LsState {
    pos: Vec<usize>,
    errors: Vec<u64>,
    action_error: Vec<u64>,
    total: u64,
    violated: Vec<usize>,
    violated_slot: Vec<usize>,
    tabu_until: Vec<u64>,
    iteration: u64,
    best_cost_seen: usize,
}

impl LsState {
    pub fn positions(&self) -> &[usize] {
        &self.pos
    }

    /// Cached evaluation.
    pub fn evaluation(&self) -> u64 {
        self.total
    }

    /// Cached error of one precedence (index into [`Problem::precs`]).
    pub fn error_of(&self, constraint: usize) -> u64 {
        self.errors[constraint]
    }

    /// Cached sum of the errors incident to an action.
    pub fn action_error(&self, action: usize) -> u64 {
        self.action_error[action]
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn best_cost_seen(&self) -> usize {
        self.best_cost_seen
    }

    pub fn is_tabu(&self, action: usize) -> bool {
        self.tabu_until[action] > self.iteration
    }

    fn mark_violated(&mut self, c: usize, violated: bool) -> bool {
        let slot = self.violated_slot[c];
        match (violated, slot == NOT_VIOLATED) {
            (true, true) => {
                self.violated_slot[c] = self.violated.len();
                self.violated.push(c);
                true
            }
            (false, false) => {
                let last = *self.violated.last().expect("non-empty violated set");
                self.violated.swap_remove(slot);
                if last != c {
                    self.violated_slot[last] = slot;
                }
                self.violated_slot[c] = NOT_VIOLATED;
                true
            }
            _ => false,
        }
    }

    /// Change in evaluation if `action` moved to `to`.
    pub fn move_delta(&self, problem: &Problem, action: usize, to: usize) -> i64 {
        let at = |k: usize| if k == action { to } else { self.pos[k] };
        problem
            .precs_of(action)
            .iter()
            .map(|&c| {
                let (i, j) = problem.precs()[c];
                constraint_error(at(i), at(j)) as i64 - self.errors[c] as i64
            })
            .sum()
    }

    /// Moves `action` to `to`; returns whether the violated set changed.
    pub fn apply_move(&mut self, problem: &Problem, action: usize, to: usize) -> bool {
        assert!(
            (1..=problem.len()).contains(&to),
            "position {to} out of range"
        );
        self.pos[action] = to;
        let mut changed = false;
        for &c in problem.precs_of(action) {
            let (i, j) = problem.precs()[c];
            let new = constraint_error(self.pos[i], self.pos[j]);
            let old = self.errors[c];
            if new == old {
                continue;
            }
            self.errors[c] = new;
            self.total = self.total + new - old;
            self.action_error[i] = self.action_error[i] + new - old;
            if i != j {
                self.action_error[j] = self.action_error[j] + new - old;
            }
            changed |= self.mark_violated(c, new > 0);
        }
        changed
    }

    /// Best strictly improving ±1 move of `action`; decrement wins ties.
    fn best_improving(&self, problem: &Problem, action: usize) -> Option<usize> {
        let p = self.pos[action];
        let mut best: Option<(usize, i64)> = None;
        if p > 1 {
            best = Some((p - 1, self.move_delta(problem, action, p - 1)));
        }
        if p < problem.len() {
            let d = self.move_delta(problem, action, p + 1);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((p + 1, d));
            }
        }
        best.filter(|&(_, d)| d < 0).map(|(to, _)| to)
    }

    /// Actions removed, in order, by the cost computation.
    fn removals(&self, problem: &Problem) -> Vec<usize> {
        if self.violated.is_empty() {
            return Vec::new();
        }
        let edges: Vec<(usize, usize)> =
            self.violated.iter().map(|&c| problem.precs()[c]).collect();
        let mut nodes: Vec<usize> = edges.iter().flat_map(|&(i, j)| [i, j]).collect();
        nodes.sort_unstable();
        nodes.dedup();
        let local = |a: usize| nodes.binary_search(&a).expect("endpoint indexed");
        let mut incident = vec![Vec::new(); nodes.len()];
        let mut count = vec![0usize; nodes.len()];
        for (e, &(i, j)) in edges.iter().enumerate() {
            let (li, lj) = (local(i), local(j));
            incident[li].push(e);
            count[li] += 1;
            if li != lj {
                incident[lj].push(e);
                count[lj] += 1;
            }
        }
        let mut alive = vec![true; edges.len()];
        let mut removed = Vec::new();
        loop {
            let mut pick: Option<usize> = None;
            for (k, &cnt) in count.iter().enumerate() {
                if cnt > 0 && pick.is_none_or(|b| cnt > count[b]) {
                    pick = Some(k);
                }
            }
            let Some(k) = pick else { break };
            removed.push(nodes[k]);
            for &e in &incident[k] {
                if !alive[e] {
                    continue;
                }
                alive[e] = false;
                let (i, j) = edges[e];
                count[local(i)] -= 1;
                if i != j {
                    count[local(j)] -= 1;
                }
            }
        }
        removed
    }

    fn cost_value(&self, problem: &Problem) -> usize {
        problem.len() - self.removals(problem).len()
    }

    fn survivors(&self, problem: &Problem) -> Vec<bool> {
        let mut keep = vec![true; problem.len()];
        for a in self.removals(problem) {
            keep[a] = false;
        }
        keep
    }

    fn value_cached(&self) -> usize {
        self.action_error.iter().filter(|&&e| e == 0).count()
    }
}

/// Warm start if given (positions must lie in `[1, n]`), identity order
/// otherwise.
pub fn initial_state(problem: &Problem, warm_start: Option<&[usize]>) -> Result<LsState, LsError> {
    let n = problem.len();
    let pos = match warm_start {
        Some(start) => {
            if start.len() != n {
                return Err(LsError::WarmStartLength {
                    expected: n,
                    found: start.len(),
                });
            }
            if let Some((action, &position)) =
                start.iter().enumerate().find(|(_, &p)| p < 1 || p > n)
            {
                return Err(LsError::WarmStartRange {
                    action,
                    position,
                    n,
                });
            }
            start.to_vec()
        }
        None => (1..=n).collect(),
    };
    let m = problem.precs().len();
    let mut state = LsState {
        pos,
        errors: vec![0; m],
        action_error: vec![0; n],
        total: 0,
        violated: Vec::new(),
        violated_slot: vec![NOT_VIOLATED; m],
        tabu_until: vec![0; n],
        iteration: 0,
        best_cost_seen: 0,
    };
    for (c, &(i, j)) in problem.precs().iter().enumerate() {
        let e = constraint_error(state.pos[i], state.pos[j]);
        state.errors[c] = e;
        state.total += e;
        state.action_error[i] += e;
        if i != j {
            state.action_error[j] += e;
        }
        if e > 0 {
            state.mark_violated(c, true);
        }
    }
    state.best_cost_seen = state.cost_value(problem);
    Ok(state)
}

/// Start positions taken from the instance's recorded logs: the logs are
/// concatenated, first occurrences numbered `1, 2, ...`, and actions that
/// appear in no log follow in index order. `None` without logs.
pub fn warm_start_from_logs(problem: &Problem) -> Option<Vec<usize>> {
    let logs = problem.logs()?;
    let n = problem.len();
    let mut pos = vec![0; n];
    let mut next = 1;
    let listed = logs.iter().flatten().copied();
    for a in listed.chain(0..n) {
        if pos[a] == 0 {
            pos[a] = next;
            next += 1;
        }
    }
    Some(pos)
}

/// Sum of all precedence errors, recomputed from the positions.
pub fn evaluation(problem: &Problem, state: &LsState) -> u64 {
    problem
        .precs()
        .iter()
        .map(|&(i, j)| constraint_error(state.pos[i], state.pos[j]))
        .sum()
}

/// Actions whose incident precedences all have zero error.
pub fn value(problem: &Problem, state: &LsState) -> usize {
    let mut clean = vec![true; problem.len()];
    for &(i, j) in problem.precs() {
        if constraint_error(state.pos[i], state.pos[j]) > 0 {
            clean[i] = false;
            clean[j] = false;
        }
    }
    clean.into_iter().filter(|&c| c).count()
}

/// Survivor count and survivor set of the greedy removal.
pub fn cost(problem: &Problem, state: &LsState) -> (usize, Vec<bool>) {
    let survivors = state.survivors(problem);
    (survivors.iter().filter(|&&s| s).count(), survivors)
}

/// One strict improvement of the best cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceLine {
    pub iteration: u64,
    pub evaluation: u64,
    pub value: usize,
    pub cost: usize,
    pub elapsed: Duration,
}

impl TraceLine {
    /// Equality ignoring the wall-clock field.
    pub fn same_search_point(&self, other: &TraceLine) -> bool {
        (self.iteration, self.evaluation, self.value, self.cost)
            == (other.iteration, other.evaluation, other.value, other.cost)
    }
}

impl fmt::Display for TraceLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "iter={} eval={} value={} cost={} t_ms={}",
            self.iteration,
            self.evaluation,
            self.value,
            self.cost,
            self.elapsed.as_millis()
        )
    }
}

#[derive(Debug, Clone)]
pub struct LsOutcome {
    pub schedule: Schedule,
    pub stats: SolveStats,
    pub trace: Vec<TraceLine>,
}

struct Recorder<'a> {
    problem: &'a Problem,
    start: Instant,
    best: Vec<bool>,
    trace: Vec<TraceLine>,
}

impl<'a> Recorder<'a> {
    fn new(problem: &'a Problem, state: &LsState) -> Self {
        let start = Instant::now();
        let mut rec = Recorder {
            problem,
            start,
            best: state.survivors(problem),
            trace: Vec::new(),
        };
        rec.push(state, state.best_cost_seen);
        rec
    }

    fn push(&mut self, state: &LsState, cost: usize) {
        self.trace.push(TraceLine {
            iteration: state.iteration,
            evaluation: state.total,
            value: state.value_cached(),
            cost,
            elapsed: self.start.elapsed(),
        });
    }

    /// Records the state if its cost beats the best seen.
    fn offer(&mut self, state: &mut LsState) -> bool {
        let c = state.cost_value(self.problem);
        if c <= state.best_cost_seen {
            return false;
        }
        state.best_cost_seen = c;
        self.best = state.survivors(self.problem);
        self.push(state, c);
        true
    }

    fn timed_out(&self, limit: Option<Duration>) -> bool {
        limit.is_some_and(|l| self.start.elapsed() >= l)
    }

    fn finish(self, iterations: u64) -> LsOutcome {
        let n = self.problem.len();
        let positions = earliest_positions(self.problem, &self.best)
            .expect("cost survivors satisfy every precedence among themselves");
        let first = self.trace[0];
        let last = *self.trace.last().expect("initial trace line");
        LsOutcome {
            schedule: Schedule::new(self.best, positions),
            stats: SolveStats {
                first_value: first.cost,
                first_time: first.elapsed,
                best_value: last.cost,
                best_time: last.elapsed,
                proved_optimal: last.cost == n,
                total_time: self.start.elapsed().max(last.elapsed),
                nodes_or_iterations: iterations,
            },
            trace: self.trace,
        }
    }
}

fn precedence_only(problem: &Problem) -> Result<(), LsError> {
    if problem.has_dependencies() {
        return Err(LsError::HasDependencies {
            count: problem.deps().len(),
        });
    }
    Ok(())
}

/// Sweeps of strictly improving moves until a local optimum. Iterations
/// count the sweeps that moved something.
pub fn descent(problem: &Problem, params: &LsParams) -> Result<LsOutcome, LsError> {
    precedence_only(problem)?;
    let mut state = initial_state(problem, params.warm_start.as_deref())?;
    let mut rec = Recorder::new(problem, &state);
    let mut sweeps = 0;
    while sweeps < params.max_iterations && !rec.timed_out(params.time_limit) {
        let mut moved = false;
        for action in 0..problem.len() {
            if let Some(to) = state.best_improving(problem, action) {
                moved = true;
                state.iteration += 1;
                if state.apply_move(problem, action, to) {
                    rec.offer(&mut state);
                }
            }
        }
        if !moved {
            break;
        }
        sweeps += 1;
    }
    Ok(rec.finish(sweeps))
}

/// Randomized Tabu search; deterministic for a given seed, apart from the
/// wall-clock fields.
pub fn tabu_search(problem: &Problem, params: &LsParams) -> Result<LsOutcome, LsError> {
    precedence_only(problem)?;
    if params.mode != LsMode::Tabu {
        return Err(LsError::WrongMode);
    }
    if params.tabu_max == 0 {
        return Err(LsError::ZeroTabuMax);
    }
    let n = problem.len();
    let mut state = initial_state(problem, params.warm_start.as_deref())?;
    let mut rec = Recorder::new(problem, &state);
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut cursor = 0;
    let mut idle = 0;
    while state.iteration < params.max_iterations
        && state.best_cost_seen < n
        && !rec.timed_out(params.time_limit)
    {
        state.iteration += 1;
        let action = cursor;
        cursor = (cursor + 1) % n;
        let tabu = state.is_tabu(action);
        match state.best_improving(problem, action) {
            Some(to) if !tabu => {
                if state.apply_move(problem, action, to) {
                    rec.offer(&mut state);
                }
                idle = 0;
            }
            Some(to) => {
                // aspiration: a Tabu action may move if that beats the best cost
                let from = state.pos[action];
                let changed = state.apply_move(problem, action, to);
                if changed && rec.offer(&mut state) {
                    idle = 0;
                } else {
                    state.apply_move(problem, action, from);
                    idle += 1;
                }
            }
            None => {
                if !tabu {
                    let tenure = rng.gen_range(1..=params.tabu_max) as u64;
                    state.tabu_until[action] = state.iteration + tenure;
                }
                idle += 1;
            }
        }
        if idle >= n {
            // every action is at a local minimum or Tabu: random step
            let action = rng.gen_range(0..n);
            let p = state.pos[action];
            let steps: Vec<usize> = [p.wrapping_sub(1), p + 1]
                .into_iter()
                .filter(|q| (1..=n).contains(q))
                .collect();
            if let Some(&to) = steps.choose(&mut rng) {
                if state.apply_move(problem, action, to) {
                    rec.offer(&mut state);
                }
            }
            idle = 0;
        }
    }
    let iterations = state.iteration;
    Ok(rec.finish(iterations))
}

/// Dispatches on `params.mode`.
pub fn run(problem: &Problem, params: &LsParams) -> Result<LsOutcome, LsError> {
    match params.mode {
        LsMode::Descent => descent(problem, params),
        LsMode::Tabu => tabu_search(problem, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solution::{check_schedule, feasible_subset};

    fn state_at(problem: &Problem, pos: &[usize]) -> LsState {
        initial_state(problem, Some(pos)).unwrap()
    }

    #[test]
    fn constraint_error_examples() {
        assert_eq!(constraint_error(1, 2), 0);
        assert_eq!(constraint_error(3, 3), 1);
        assert_eq!(constraint_error(5, 2), 4);
    }

    #[test]
    fn evaluation_examples() {
        let p = Problem::new(3, [], [(0, 1), (1, 2)]).unwrap();
        assert_eq!(evaluation(&p, &state_at(&p, &[1, 2, 3])), 0);
        let p = Problem::new(2, [], [(0, 1)]).unwrap();
        assert_eq!(evaluation(&p, &state_at(&p, &[2, 1])), 2);
        let p = Problem::new(2, [], [(0, 1), (1, 0)]).unwrap();
        let s = state_at(&p, &[1, 1]);
        assert_eq!(evaluation(&p, &s), 2);
        assert_eq!(s.evaluation(), 2);
    }

    #[test]
    fn value_examples() {
        let free = Problem::new(4, [], []).unwrap();
        assert_eq!(value(&free, &initial_state(&free, None).unwrap()), 4);
        let p = Problem::new(3, [], [(0, 1)]).unwrap();
        assert_eq!(value(&p, &state_at(&p, &[2, 1, 3])), 1);
    }

    #[test]
    fn cost_examples() {
        let p = Problem::new(3, [], [(0, 1)]).unwrap();
        assert_eq!(cost(&p, &state_at(&p, &[1, 2, 3])), (3, vec![true; 3]));
        let p = Problem::new(2, [], [(0, 1), (1, 0)]).unwrap();
        assert_eq!(cost(&p, &state_at(&p, &[1, 1])), (1, vec![false, true]));
    }

    #[test]
    fn cost_removes_hub_first() {
        // 0 violates three precedences, the others one each
        let p = Problem::new(4, [], [(0, 1), (0, 2), (0, 3)]).unwrap();
        let s = state_at(&p, &[4, 1, 2, 3]);
        assert_eq!(cost(&p, &s), (3, vec![false, true, true, true]));
    }

    #[test]
    fn self_precedence_always_costs_its_action() {
        let p = Problem::new(2, [], [(1, 1)]).unwrap();
        let s = initial_state(&p, None).unwrap();
        assert_eq!(s.evaluation(), 1);
        assert_eq!(cost(&p, &s), (1, vec![true, false]));
        assert_eq!(value(&p, &s), 1);
    }

    #[test]
    fn initial_state_examples() {
        let p = Problem::new(3, [], []).unwrap();
        assert_eq!(initial_state(&p, None).unwrap().positions(), &[1, 2, 3]);
        assert_eq!(
            initial_state(&p, Some(&[2, 1, 3])).unwrap().positions(),
            &[2, 1, 3]
        );
        assert_eq!(
            initial_state(&p, Some(&[0, 1, 3])).unwrap_err(),
            LsError::WarmStartRange {
                action: 0,
                position: 0,
                n: 3
            }
        );
        assert_eq!(
            initial_state(&p, Some(&[1, 4, 3])).unwrap_err(),
            LsError::WarmStartRange {
                action: 1,
                position: 4,
                n: 3
            }
        );
        assert!(matches!(
            initial_state(&p, Some(&[1, 2])),
            Err(LsError::WarmStartLength { .. })
        ));
    }

    #[test]
    fn warm_start_follows_logs() {
        let p = Problem::new(4, [], []).unwrap();
        assert_eq!(warm_start_from_logs(&p), None);
        let p = p.with_logs(vec![vec![2, 0], vec![3, 0]]).unwrap();
        assert_eq!(warm_start_from_logs(&p), Some(vec![2, 4, 1, 3]));
    }

    #[test]
    fn descent_fixes_equality_in_one_sweep() {
        let p = Problem::new(2, [], [(0, 1)]).unwrap();
        let params = LsParams {
            warm_start: Some(vec![1, 1]),
            ..LsParams::descent()
        };
        let out = descent(&p, &params).unwrap();
        assert_eq!(out.stats.nodes_or_iterations, 1);
        assert_eq!(out.stats.best_value, 2);
        assert_eq!(out.schedule.accepted, vec![true, true]);
        assert!(check_schedule(&p, &out.schedule).unwrap().is_empty());
    }

    #[test]
    fn descent_without_constraints_does_nothing() {
        let p = Problem::new(5, [], []).unwrap();
        let out = descent(&p, &LsParams::descent()).unwrap();
        assert_eq!(out.stats.nodes_or_iterations, 0);
        assert_eq!(out.stats.best_value, 5);
    }

    #[test]
    fn dependencies_are_refused() {
        let p = Problem::new(2, [(0, 1)], []).unwrap();
        assert_eq!(
            descent(&p, &LsParams::descent()).unwrap_err(),
            LsError::HasDependencies { count: 1 }
        );
        assert!(tabu_search(&p, &LsParams::tabu(0, 10)).is_err());
    }

    #[test]
    fn tabu_parameter_checks() {
        let p = Problem::new(2, [], []).unwrap();
        assert_eq!(
            tabu_search(&p, &LsParams::descent()).unwrap_err(),
            LsError::WrongMode
        );
        let params = LsParams {
            tabu_max: 0,
            ..LsParams::tabu(1, 10)
        };
        assert_eq!(tabu_search(&p, &params).unwrap_err(), LsError::ZeroTabuMax);
    }

    #[test]
    fn tabu_two_cycle_reaches_optimum() {
        let p = Problem::new(2, [], [(0, 1), (1, 0)]).unwrap();
        let out = tabu_search(&p, &LsParams::tabu(7, 200)).unwrap();
        assert_eq!(out.stats.best_value, 1);
        assert!(check_schedule(&p, &out.schedule).unwrap().is_empty());
    }

    #[test]
    fn tabu_is_deterministic_per_seed() {
        let precs: Vec<_> = (0..12)
            .flat_map(|i| [(i, (i * 5 + 3) % 12), ((i * 7 + 1) % 12, i)])
            .collect();
        let precs: Vec<_> = precs.into_iter().filter(|(a, b)| a != b).collect();
        let p = Problem::new(12, [], precs).unwrap();
        let a = tabu_search(&p, &LsParams::tabu(11, 2000)).unwrap();
        let b = tabu_search(&p, &LsParams::tabu(11, 2000)).unwrap();
        assert_eq!(a.trace.len(), b.trace.len());
        assert!(a
            .trace
            .iter()
            .zip(&b.trace)
            .all(|(x, y)| x.same_search_point(y)));
        assert_eq!(a.schedule, b.schedule);
    }

    #[test]
    fn incremental_cache_matches_recomputation() {
        let precs = [(0, 1), (1, 2), (2, 0), (3, 3), (1, 3), (4, 0)];
        let p = Problem::new(5, [], precs).unwrap();
        let mut s = initial_state(&p, None).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let a = rng.gen_range(0..5);
            let to = rng.gen_range(1..=5);
            s.apply_move(&p, a, to);
            assert_eq!(s.evaluation(), evaluation(&p, &s));
            assert_eq!(s.value_cached(), value(&p, &s));
            let (c, survivors) = cost(&p, &s);
            assert!(value(&p, &s) <= c);
            assert!(feasible_subset(&p, &survivors));
        }
    }
}
