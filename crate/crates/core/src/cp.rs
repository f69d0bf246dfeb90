//! Exact solver: propagation over acceptance booleans and position
//! intervals, with depth-first branch-and-bound on the booleans only.
//!
//! Each action `i` has a boolean `a_i` (accepted) and a position `p_i` in
//! `[1, n]`. A dependency `(i, j)` is the implication `a_i => a_j`; a
//! precedence `(i, j)` is the reified product `a_i * a_j * p_i < p_j`.
//! Positions are never labeled: once every boolean is fixed, bounds
//! propagation on the precedence difference system fails exactly when the
//! accepted precedence subgraph has a cycle, so a consistent leaf always has
//! earliest-date positions ([`earliest_positions`]).
//!
//! Besides the pairwise rules, an unknown action is rejected as soon as its
//! position interval, narrowed by its accepted predecessors and successors,
//! would be empty, or when it forms a 2-cycle with an accepted action.
//!
//! The search prunes when accepted plus unknown actions cannot beat the
//! incumbent, and also after subtracting a greedy packing of disjoint
//! 2-cycles among unknown actions (at most one end of each can be kept).

use std::collections::VecDeque;
use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::problem::{ActionId, Problem};
use crate::solution::{accepted_topological_order, Schedule, SolveStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoolDomain {
    False,
    True,
    Unknown,
}

impl From<bool> for BoolDomain {
    fn from(b: bool) -> Self {
        if b {
            BoolDomain::True
        } else {
            BoolDomain::False
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Propagation {
    Consistent,
    Failed,
}

/// A domain wipe-out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Failed;

#[derive(Debug, Clone, Copy)]
enum Trailed {
    Bool(usize),
    Lower(usize, usize),
    Upper(usize, usize),
}

/// Propagation workspace: boolean domains, position intervals and the trail
/// used to restore them on backtrack.
#[derive(Debug, Clone)]
pub struct CpState {
    bools: Vec<BoolDomain>,
    lb: Vec<usize>,
    ub: Vec<usize>,
    trail: Vec<Trailed>,
    n_true: usize,
    n_unknown: usize,
    queue: VecDeque<usize>,
    queued: Vec<bool>,
}

impl CpState {
    /// Every boolean unknown, every position in `[1, n]`.
    pub fn new(n: usize) -> Self {
        CpState {
            bools: vec![BoolDomain::Unknown; n],
            lb: vec![1; n],
            ub: vec![n; n],
            trail: Vec::new(),
            n_true: 0,
            n_unknown: n,
            queue: VecDeque::new(),
            queued: vec![false; n],
        }
    }

    #[inline]
    pub fn bool_of(&self, action: usize) -> BoolDomain {
        self.bools[action]
    }

    #[inline]
    pub fn lower(&self, action: usize) -> usize {
        self.lb[action]
    }

    #[inline]
    pub fn upper(&self, action: usize) -> usize {
        self.ub[action]
    }

    pub fn count_true(&self) -> usize {
        self.n_true
    }

    pub fn count_unknown(&self) -> usize {
        self.n_unknown
    }

    /// Fixes a boolean without propagating; fails if it is already bound
    /// to the other value.
    pub fn assign(&mut self, action: usize, value: bool) -> Result<(), Failed> {
        self.set_bool(action, value.into())
    }

    pub fn accepted(&self) -> Vec<bool> {
        self.bools.iter().map(|&b| b == BoolDomain::True).collect()
    }

    fn mark(&self) -> usize {
        self.trail.len()
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            match self.trail.pop().expect("trail entry") {
                Trailed::Bool(i) => {
                    if self.bools[i] == BoolDomain::True {
                        self.n_true -= 1;
                    }
                    self.bools[i] = BoolDomain::Unknown;
                    self.n_unknown += 1;
                }
                Trailed::Lower(i, old) => self.lb[i] = old,
                Trailed::Upper(i, old) => self.ub[i] = old,
            }
        }
    }

    fn enqueue(&mut self, action: usize) {
        if !self.queued[action] {
            self.queued[action] = true;
            self.queue.push_back(action);
        }
    }

    fn clear_queue(&mut self) {
        for i in self.queue.drain(..) {
            self.queued[i] = false;
        }
    }

    fn set_bool(&mut self, i: usize, value: BoolDomain) -> Result<(), Failed> {
        match self.bools[i] {
            current if current == value => Ok(()),
            BoolDomain::Unknown => {
                self.trail.push(Trailed::Bool(i));
                self.bools[i] = value;
                self.n_unknown -= 1;
                if value == BoolDomain::True {
                    self.n_true += 1;
                }
                self.enqueue(i);
                Ok(())
            }
            _ => Err(Failed),
        }
    }

    fn raise_lower(&mut self, i: usize, value: usize) -> Result<(), Failed> {
        if value <= self.lb[i] {
            return Ok(());
        }
        if value > self.ub[i] {
            return Err(Failed);
        }
        self.trail.push(Trailed::Lower(i, self.lb[i]));
        self.lb[i] = value;
        self.enqueue(i);
        Ok(())
    }

    fn lower_upper(&mut self, i: usize, value: usize) -> Result<(), Failed> {
        if value >= self.ub[i] {
            return Ok(());
        }
        if value < self.lb[i] {
            return Err(Failed);
        }
        self.trail.push(Trailed::Upper(i, self.ub[i]));
        self.ub[i] = value;
        self.enqueue(i);
        Ok(())
    }

    fn dependency(&mut self, i: usize, j: usize) -> Result<(), Failed> {
        if self.bools[i] == BoolDomain::True {
            self.set_bool(j, BoolDomain::True)?;
        }
        if self.bools[j] == BoolDomain::False {
            self.set_bool(i, BoolDomain::False)?;
        }
        Ok(())
    }

    fn precedence(&mut self, problem: &Problem, i: usize, j: usize) -> Result<(), Failed> {
        use BoolDomain::*;
        if i == j {
            return self.set_bool(i, False);
        }
        let (bi, bj) = (self.bools[i], self.bools[j]);
        if bi == True && bj == True {
            self.raise_lower(j, self.lb[i] + 1)?;
            // ub[j] >= 2 here, otherwise the line above failed
            self.lower_upper(i, self.ub[j] - 1)?;
            return Ok(());
        }
        if self.lb[i] >= self.ub[j] {
            // p_i < p_j is impossible, so a_i * a_j = 0
            if bi == True {
                self.set_bool(j, False)?;
            }
            if bj == True {
                self.set_bool(i, False)?;
            }
        }
        match (self.bools[i], self.bools[j]) {
            (True, Unknown) => self.lookahead(problem, j),
            (Unknown, True) => self.lookahead(problem, i),
            _ => Ok(()),
        }
    }

    /// Rejects an unknown action whose interval would be emptied by its
    /// accepted neighbours if it were accepted, or that would close a
    /// 2-cycle with an accepted action.
    fn lookahead(&mut self, problem: &Problem, x: usize) -> Result<(), Failed> {
        let mut lo = self.lb[x];
        let mut hi = self.ub[x];
        let mut accepted_successor = false;
        for &c in problem.precs_of(x) {
            let (i, j) = problem.precs()[c];
            if i == j {
                continue;
            }
            if j == x && self.bools[i] == BoolDomain::True {
                lo = lo.max(self.lb[i] + 1);
            } else if i == x && self.bools[j] == BoolDomain::True {
                hi = hi.min(self.ub[j].saturating_sub(1));
                accepted_successor = true;
            }
        }
        // p < x < p is impossible for an accepted p
        let closes_cycle = || {
            accepted_successor
                && problem.precs_of(x).iter().any(|&c| {
                    let (i, j) = problem.precs()[c];
                    j == x
                        && i != x
                        && self.bools[i] == BoolDomain::True
                        && problem
                            .precs_of(x)
                            .iter()
                            .any(|&d| problem.precs()[d] == (x, i))
                })
        };
        if lo > hi || closes_cycle() {
            self.set_bool(x, BoolDomain::False)?;
        }
        Ok(())
    }

    fn revise(&mut self, problem: &Problem, x: usize) -> Result<(), Failed> {
        for &c in problem.deps_from(x) {
            let (i, j) = problem.deps()[c];
            self.dependency(i, j)?;
        }
        for &c in problem.deps_to(x) {
            let (i, j) = problem.deps()[c];
            self.dependency(i, j)?;
        }
        for &c in problem.precs_of(x) {
            let (i, j) = problem.precs()[c];
            self.precedence(problem, i, j)?;
        }
        Ok(())
    }

    fn fixpoint(&mut self, problem: &Problem) -> Propagation {
        while let Some(x) = self.queue.pop_front() {
            self.queued[x] = false;
            if self.revise(problem, x).is_err() {
                self.clear_queue();
                return Propagation::Failed;
            }
        }
        Propagation::Consistent
    }
}

/// Runs every propagation rule to a fixpoint.
pub fn propagate(problem: &Problem, state: &mut CpState) -> Propagation {
    for i in 0..problem.len() {
        state.enqueue(i);
    }
    state.fixpoint(problem)
}

/// Unbound action with the greatest static degree, smallest index on ties.
pub fn select_variable(problem: &Problem, state: &CpState) -> Option<ActionId> {
    let mut best: Option<usize> = None;
    for i in 0..problem.len() {
        if state.bool_of(i) != BoolDomain::Unknown {
            continue;
        }
        if best.is_none_or(|b| problem.degree(i) > problem.degree(b)) {
            best = Some(i);
        }
    }
    best.map(ActionId)
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("accepted actions {cycle_hint:?} lie on a precedence cycle")]
pub struct CyclicSelection {
    /// Accepted actions left unplaced by the topological sweep.
    pub cycle_hint: Vec<usize>,
}

/// Earliest dates: position 1 for accepted actions without accepted
/// predecessors, otherwise one past the latest accepted predecessor.
pub fn earliest_positions(
    problem: &Problem,
    accepted: &[bool],
) -> Result<Vec<Option<usize>>, CyclicSelection> {
    let n = problem.len();
    let Some(order) = accepted_topological_order(problem, accepted) else {
        let mut placed = vec![false; n];
        // Kahn's sweep again, keeping whatever it manages to place
        let mut indegree = vec![0usize; n];
        for &(i, j) in problem.precs() {
            if accepted[i] && accepted[j] {
                indegree[j] += 1;
            }
        }
        let mut stack: Vec<usize> = (0..n)
            .filter(|&i| accepted[i] && indegree[i] == 0)
            .collect();
        while let Some(i) = stack.pop() {
            placed[i] = true;
            for &c in problem.precs_of(i) {
                let (a, b) = problem.precs()[c];
                if a == i && b != i && accepted[b] {
                    indegree[b] -= 1;
                    if indegree[b] == 0 {
                        stack.push(b);
                    }
                }
            }
        }
        let cycle_hint = (0..n).filter(|&i| accepted[i] && !placed[i]).collect();
        return Err(CyclicSelection { cycle_hint });
    };
    let mut positions = vec![None; n];
    let mut earliest = vec![1usize; n];
    for &i in &order {
        positions[i] = Some(earliest[i]);
        for &c in problem.precs_of(i) {
            let (a, b) = problem.precs()[c];
            if a == i && accepted[b] {
                earliest[b] = earliest[b].max(earliest[i] + 1);
            }
        }
    }
    Ok(positions)
}

/// Accepted actions as `(position, action)`, sorted by position then index.
pub fn extract_schedule(schedule: &Schedule) -> Vec<(usize, ActionId)> {
    let mut listing: Vec<(usize, ActionId)> = schedule
        .accepted_ids()
        .filter_map(|i| schedule.positions[i].map(|p| (p, ActionId(i))))
        .collect();
    listing.sort_unstable();
    listing
}

#[derive(Debug, Clone, Default)]
pub struct CpConfig {
    pub time_limit: Option<Duration>,
    pub node_limit: Option<u64>,
    /// When false the search stops at the first solution.
    pub prove_optimality: bool,
    /// Checked between nodes; setting it stops the search like a limit.
    pub cancel: Option<Arc<AtomicBool>>,
}

impl CpConfig {
    pub fn exhaustive() -> Self {
        CpConfig {
            prove_optimality: true,
            ..CpConfig::default()
        }
    }

    pub fn with_time_limit(mut self, limit: Duration) -> Self {
        self.time_limit = Some(limit);
        self
    }

    pub fn with_node_limit(mut self, limit: u64) -> Self {
        self.node_limit = Some(limit);
        self
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CpError {
    #[error("time limit must be positive")]
    ZeroTimeLimit,
    #[error("node limit must be positive")]
    ZeroNodeLimit,
}

/// One improvement of the incumbent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Incumbent {
    pub value: usize,
    pub elapsed: Duration,
    pub nodes: u64,
}

impl fmt::Display for Incumbent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "value={} t_ms={} nodes={}",
            self.value,
            self.elapsed.as_millis(),
            self.nodes
        )
    }
}

#[derive(Debug, Clone)]
pub struct CpSolution {
    pub schedule: Schedule,
    pub stats: SolveStats,
    pub trace: Vec<Incumbent>,
}

struct Search<'a> {
    problem: &'a Problem,
    config: &'a CpConfig,
    state: CpState,
    order: Vec<usize>,
    start: Instant,
    nodes: u64,
    best: Option<(usize, Vec<bool>)>,
    trace: Vec<Incumbent>,
    stopped: bool,
    /// Stamp per action for the 2-cycle packing.
    used: Vec<u64>,
    stamp: u64,
}

impl Search<'_> {
    fn out_of_budget(&mut self) -> bool {
        if let Some(limit) = self.config.node_limit {
            if self.nodes >= limit {
                return true;
            }
        }
        if let Some(limit) = self.config.time_limit {
            if self.start.elapsed() >= limit {
                return true;
            }
        }
        if let Some(flag) = &self.config.cancel {
            if flag.load(Ordering::Relaxed) {
                return true;
            }
        }
        false
    }

    /// Vertex-disjoint 2-cycles among unknown actions, packed greedily. Each
    /// one costs the bound an action, since its two ends exclude each other.
    fn two_cycle_packing(&mut self) -> usize {
        self.stamp += 1;
        let mut packed = 0;
        for &(i, j) in self.problem.two_cycles() {
            if self.used[i] != self.stamp
                && self.used[j] != self.stamp
                && self.state.bool_of(i) == BoolDomain::Unknown
                && self.state.bool_of(j) == BoolDomain::Unknown
            {
                self.used[i] = self.stamp;
                self.used[j] = self.stamp;
                packed += 1;
            }
        }
        packed
    }

    fn next_variable(&self) -> Option<usize> {
        self.order
            .iter()
            .copied()
            .find(|&i| self.state.bool_of(i) == BoolDomain::Unknown)
    }

    fn record(&mut self) {
        let value = self.state.count_true();
        self.trace.push(Incumbent {
            value,
            elapsed: self.start.elapsed(),
            nodes: self.nodes,
        });
        self.best = Some((value, self.state.accepted()));
        if !self.config.prove_optimality {
            self.stopped = true;
        }
    }

    fn dive(&mut self) {
        if self.out_of_budget() {
            self.stopped = true;
            return;
        }
        self.nodes += 1;
        if let Some(best) = self.best.as_ref().map(|(v, _)| *v) {
            let bound = self.state.count_true() + self.state.count_unknown();
            if bound <= best || bound - self.two_cycle_packing() <= best {
                return;
            }
        }
        let Some(var) = self.next_variable() else {
            self.record();
            return;
        };
        for value in [true, false] {
            let mark = self.state.mark();
            let consistent = self.state.assign(var, value).is_ok()
                && self.state.fixpoint(self.problem) == Propagation::Consistent;
            if consistent {
                self.dive();
            }
            self.state.undo_to(mark);
            if self.stopped {
                return;
            }
        }
    }
}

/// Maximizes the number of accepted actions.
///
/// The best schedule found is always valid; `proved_optimal` is set only
/// when the search tree was exhausted within the configured limits.
pub fn branch_and_bound(problem: &Problem, config: &CpConfig) -> Result<CpSolution, CpError> {
    if config.time_limit == Some(Duration::ZERO) {
        return Err(CpError::ZeroTimeLimit);
    }
    if config.node_limit == Some(0) {
        return Err(CpError::ZeroNodeLimit);
    }
    let n = problem.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (std::cmp::Reverse(problem.degree(i)), i));

    let mut search = Search {
        problem,
        config,
        state: CpState::new(n),
        order,
        start: Instant::now(),
        nodes: 0,
        best: None,
        trace: Vec::new(),
        stopped: false,
        used: vec![0; n],
        stamp: 0,
    };
    // The root never fails: only rejections can be inferred from all-unknown.
    if propagate(problem, &mut search.state) == Propagation::Consistent {
        search.dive();
    }
    let total_time = search.start.elapsed();
    let exhausted = !search.stopped || search.best.as_ref().is_some_and(|(v, _)| *v == n);

    let (accepted, trace) = match search.best {
        Some((_, accepted)) => (accepted, search.trace),
        None => {
            let empty = Incumbent {
                value: 0,
                elapsed: total_time,
                nodes: search.nodes,
            };
            (vec![false; n], vec![empty])
        }
    };
    let positions = earliest_positions(problem, &accepted)
        .expect("consistent leaf has an acyclic precedence subgraph");
    let first = trace[0];
    let last = *trace.last().expect("non-empty trace");
    Ok(CpSolution {
        schedule: Schedule::new(accepted, positions),
        stats: SolveStats {
            first_value: first.value,
            first_time: first.elapsed,
            best_value: last.value,
            best_time: last.elapsed,
            proved_optimal: exhausted,
            total_time: total_time.max(last.elapsed),
            nodes_or_iterations: search.nodes,
        },
        trace,
    })
}
