//! Reconciliation instances: actions, dependency pairs and precedence pairs.
//!
//! An instance is immutable once built. Construction validates every pair,
//! rejects self-dependencies and removes duplicate pairs inside each
//! constraint class (keeping first occurrences, in file order). Self
//! precedences are kept: they force the action to be rejected.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense action index in `0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionId(pub usize);

impl ActionId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    Dependency,
    Precedence,
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintKind::Dependency => f.write_str("dependency"),
            ConstraintKind::Precedence => f.write_str("precedence"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("malformed instance: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{kind} pair #{index} ({i}, {j}) references an action outside 0..{n}")]
    PairOutOfRange {
        kind: ConstraintKind,
        index: usize,
        i: usize,
        j: usize,
        n: usize,
    },
    #[error("dependency pair #{index} is a self-dependency on action {action}")]
    SelfDependency { index: usize, action: usize },
    #[error("expected {expected} action names, found {found}")]
    NameCount { expected: usize, found: usize },
    #[error("log #{log} references action {action} outside 0..{n}")]
    LogOutOfRange { log: usize, action: usize, n: usize },
}

/// On-disk instance document. Indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(default)]
    pub name: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<Vec<String>>,
    #[serde(default)]
    pub deps: Vec<[usize; 2]>,
    #[serde(default)]
    pub precs: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logs: Option<Vec<Vec<usize>>>,
}

/// A validated reconciliation instance.
///
/// Besides the constraint lists this keeps incidence lists (constraint
/// indices per action) and the static degree used by the branching
/// heuristic.
#[derive(Debug, Clone)]
pub struct Problem {
    name: String,
    n: usize,
    names: Option<Vec<String>>,
    logs: Option<Vec<Vec<usize>>>,
    deps: Vec<(usize, usize)>,
    precs: Vec<(usize, usize)>,
    deps_out: Vec<Vec<usize>>,
    deps_in: Vec<Vec<usize>>,
    precs_incident: Vec<Vec<usize>>,
    degree: Vec<usize>,
    two_cycles: Vec<(usize, usize)>,
}

fn dedup_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Vec<(usize, usize)> {
    let mut seen = HashSet::new();
    pairs.into_iter().filter(|p| seen.insert(*p)).collect()
}

impl Problem {
    pub fn new(
        n: usize,
        deps: impl IntoIterator<Item = (usize, usize)>,
        precs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, ProblemError> {
        let deps: Vec<_> = deps.into_iter().collect();
        let precs: Vec<_> = precs.into_iter().collect();
        for (index, &(i, j)) in deps.iter().enumerate() {
            if i >= n || j >= n {
                return Err(ProblemError::PairOutOfRange {
                    kind: ConstraintKind::Dependency,
                    index,
                    i,
                    j,
                    n,
                });
            }
            if i == j {
                return Err(ProblemError::SelfDependency { index, action: i });
            }
        }
        for (index, &(i, j)) in precs.iter().enumerate() {
            if i >= n || j >= n {
                return Err(ProblemError::PairOutOfRange {
                    kind: ConstraintKind::Precedence,
                    index,
                    i,
                    j,
                    n,
                });
            }
        }
        let deps = dedup_pairs(deps);
        let precs = dedup_pairs(precs);

        let mut deps_out = vec![Vec::new(); n];
        let mut deps_in = vec![Vec::new(); n];
        let mut precs_incident = vec![Vec::new(); n];
        let mut degree = vec![0; n];
        for (c, &(i, j)) in deps.iter().enumerate() {
            deps_out[i].push(c);
            deps_in[j].push(c);
            degree[i] += 1;
            degree[j] += 1;
        }
        for (c, &(i, j)) in precs.iter().enumerate() {
            precs_incident[i].push(c);
            degree[i] += 1;
            if i != j {
                precs_incident[j].push(c);
                degree[j] += 1;
            }
        }
        let pairs: HashSet<(usize, usize)> = precs.iter().copied().collect();
        let two_cycles = precs
            .iter()
            .copied()
            .filter(|&(i, j)| i < j && pairs.contains(&(j, i)))
            .collect();
        Ok(Problem {
            name: String::new(),
            n,
            names: None,
            logs: None,
            deps,
            precs,
            deps_out,
            deps_in,
            precs_incident,
            degree,
            two_cycles,
        })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_action_names(mut self, names: Vec<String>) -> Result<Self, ProblemError> {
        if names.len() != self.n {
            return Err(ProblemError::NameCount {
                expected: self.n,
                found: names.len(),
            });
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn with_logs(mut self, logs: Vec<Vec<usize>>) -> Result<Self, ProblemError> {
        for (log, ids) in logs.iter().enumerate() {
            if let Some(&action) = ids.iter().find(|&&a| a >= self.n) {
                return Err(ProblemError::LogOutOfRange {
                    log,
                    action,
                    n: self.n,
                });
            }
        }
        self.logs = Some(logs);
        Ok(self)
    }

    pub fn from_file(file: InstanceFile) -> Result<Self, ProblemError> {
        let mut problem = Problem::new(
            file.n,
            file.deps.iter().map(|p| (p[0], p[1])),
            file.precs.iter().map(|p| (p[0], p[1])),
        )?
        .with_name(file.name);
        if let Some(names) = file.actions {
            problem = problem.with_action_names(names)?;
        }
        if let Some(logs) = file.logs {
            problem = problem.with_logs(logs)?;
        }
        Ok(problem)
    }

    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            name: self.name.clone(),
            n: self.n,
            actions: self.names.clone(),
            deps: self.deps.iter().map(|&(i, j)| [i, j]).collect(),
            precs: self.precs.iter().map(|&(i, j)| [i, j]).collect(),
            logs: self.logs.clone(),
        }
    }

    /// Compact JSON followed by a newline; stable for identical instances.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(&self.to_file()).expect("instance serializes");
        s.push('\n');
        s
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Display name of an action: its recorded name, or its index.
    pub fn action_name(&self, action: usize) -> String {
        match &self.names {
            Some(names) => names[action].clone(),
            None => action.to_string(),
        }
    }

    pub fn action_names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Resolves a display name (or a bare index) back to an action.
    pub fn lookup_action(&self, name: &str) -> Option<usize> {
        if let Some(names) = &self.names {
            if let Some(pos) = names.iter().position(|n| n == name) {
                return Some(pos);
            }
        }
        name.parse().ok().filter(|&i| i < self.n)
    }

    pub fn logs(&self) -> Option<&[Vec<usize>]> {
        self.logs.as_deref()
    }

    #[inline]
    pub fn deps(&self) -> &[(usize, usize)] {
        &self.deps
    }

    #[inline]
    pub fn precs(&self) -> &[(usize, usize)] {
        &self.precs
    }

    pub fn has_dependencies(&self) -> bool {
        !self.deps.is_empty()
    }

    /// Indices into [`Problem::deps`] of pairs `(action, _)`.
    #[inline]
    pub fn deps_from(&self, action: usize) -> &[usize] {
        &self.deps_out[action]
    }

    /// Indices into [`Problem::deps`] of pairs `(_, action)`.
    #[inline]
    pub fn deps_to(&self, action: usize) -> &[usize] {
        &self.deps_in[action]
    }

    /// Indices into [`Problem::precs`] of pairs with `action` at either end.
    /// A self precedence appears once.
    #[inline]
    pub fn precs_of(&self, action: usize) -> &[usize] {
        &self.precs_incident[action]
    }

    /// Pairs `(i, j)` with `i < j` and precedences both ways.
    pub fn two_cycles(&self) -> &[(usize, usize)] {
        &self.two_cycles
    }

    /// Number of deduplicated constraint pairs incident to `action`.
    #[inline]
    pub fn degree(&self, action: usize) -> usize {
        self.degree[action]
    }
}
