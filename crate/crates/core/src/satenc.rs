//! Reduction from CNF satisfiability to precedence-only reconciliation.
//!
//! Each variable `p` gets `2·C` actions: a "false" copy `p_0^i` and a "true"
//! copy `p_1^i` for every clause index `i`. Every false copy is tied to
//! every true copy by precedences in both directions, so at most one
//! polarity of a variable survives. Clause `i` becomes a precedence cycle
//! through the copies (index `i`) that falsify its literals: accepting the
//! whole cycle is impossible, which is exactly "some literal is true".
//! A schedule accepting `N·C` actions exists iff the formula is satisfiable.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::problem::Problem;
use crate::solution::{objective, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn pos(var: usize) -> Self {
        Literal {
            var,
            positive: true,
        }
    }

    pub fn neg(var: usize) -> Self {
        Literal {
            var,
            positive: false,
        }
    }

    /// DIMACS form: 1-based, negative for negated literals.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var as i64 + 1;
        if self.positive {
            v
        } else {
            -v
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CnfError {
    #[error("a formula needs at least one variable")]
    NoVariables,
    #[error("clause {clause} is empty")]
    EmptyClause { clause: usize },
    #[error("clause {clause} mentions variable {var} more than once")]
    RepeatedVariable { clause: usize, var: usize },
    #[error("clause {clause} uses variable {var}, formula declares {num_vars}")]
    VariableOutOfRange {
        clause: usize,
        var: usize,
        num_vars: usize,
    },
    #[error("line {line}: {message}")]
    Dimacs { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CnfFormula {
    num_vars: usize,
    clauses: Vec<Vec<Literal>>,
}

impl CnfFormula {
    pub fn new(num_vars: usize, clauses: Vec<Vec<Literal>>) -> Result<Self, CnfError> {
        if num_vars == 0 {
            return Err(CnfError::NoVariables);
        }
        for (clause, lits) in clauses.iter().enumerate() {
            if lits.is_empty() {
                return Err(CnfError::EmptyClause { clause });
            }
            for (k, lit) in lits.iter().enumerate() {
                if lit.var >= num_vars {
                    return Err(CnfError::VariableOutOfRange {
                        clause,
                        var: lit.var,
                        num_vars,
                    });
                }
                if lits[..k].iter().any(|l| l.var == lit.var) {
                    return Err(CnfError::RepeatedVariable {
                        clause,
                        var: lit.var,
                    });
                }
            }
        }
        Ok(CnfFormula { num_vars, clauses })
    }

    /// Clauses given as DIMACS-style signed, 1-based integers.
    pub fn from_signed(num_vars: usize, clauses: &[Vec<i64>]) -> Result<Self, CnfError> {
        let clauses = clauses
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&l| Literal {
                        var: l.unsigned_abs() as usize - 1,
                        positive: l > 0,
                    })
                    .collect()
            })
            .collect();
        Self::new(num_vars, clauses)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    pub fn is_satisfied_by(&self, valuation: &[bool]) -> bool {
        self.clauses
            .iter()
            .all(|c| c.iter().any(|l| valuation[l.var] == l.positive))
    }

    /// Parses `p cnf N C` followed by zero-terminated clauses; `c` lines are
    /// comments and a clause may span several lines.
    pub fn parse_dimacs(text: &str) -> Result<Self, CnfError> {
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current: Vec<Literal> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if line.starts_with('%') {
                break;
            }
            let err = |message: String| CnfError::Dimacs {
                line: line_no,
                message,
            };
            if line.starts_with('p') {
                if header.is_some() {
                    return Err(err("duplicate problem line".into()));
                }
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != 4 || fields[1] != "cnf" {
                    return Err(err(format!(
                        "expected `p cnf <vars> <clauses>`, got `{line}`"
                    )));
                }
                let vars = fields[2]
                    .parse()
                    .map_err(|_| err(format!("bad variable count `{}`", fields[2])))?;
                let count = fields[3]
                    .parse()
                    .map_err(|_| err(format!("bad clause count `{}`", fields[3])))?;
                header = Some((vars, count));
                continue;
            }
            let Some((vars, _)) = header else {
                return Err(err("clause before the `p cnf` line".into()));
            };
            for token in line.split_whitespace() {
                let lit: i64 = token
                    .parse()
                    .map_err(|_| err(format!("bad literal `{token}`")))?;
                if lit == 0 {
                    clauses.push(std::mem::take(&mut current));
                    continue;
                }
                let var = lit.unsigned_abs() as usize;
                if var > vars {
                    return Err(err(format!(
                        "literal {lit} exceeds {vars} declared variables"
                    )));
                }
                current.push(Literal {
                    var: var - 1,
                    positive: lit > 0,
                });
            }
        }
        let Some((vars, count)) = header else {
            return Err(CnfError::Dimacs {
                line: 0,
                message: "missing `p cnf` line".into(),
            });
        };
        if !current.is_empty() {
            clauses.push(current);
        }
        if clauses.len() != count {
            return Err(CnfError::Dimacs {
                line: 0,
                message: format!("header declares {count} clauses, found {}", clauses.len()),
            });
        }
        Self::new(vars, clauses)
    }

    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                out.push_str(&l.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

/// Action ids of every variable copy, plus the formula for decoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionMap {
    pub num_vars: usize,
    pub num_clauses: usize,
    /// `copies[var][polarity][clause]` is the action of `var_polarity^clause`.
    pub copies: Vec<[Vec<usize>; 2]>,
    /// The encoded formula in DIMACS signed form.
    pub clauses: Vec<Vec<i64>>,
}

impl ReductionMap {
    pub fn action(&self, var: usize, polarity: bool, clause: usize) -> usize {
        self.copies[var][polarity as usize][clause]
    }

    pub fn num_actions(&self) -> usize {
        2 * self.num_vars * self.num_clauses
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("map serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}

fn copy_id(num_clauses: usize, var: usize, clause: usize, polarity: bool) -> usize {
    (var * num_clauses + clause) * 2 + polarity as usize
}

/// Builds the instance: `2·N·C` actions, `2·N·C²` exclusion pairs and one
/// cycle per clause (a self precedence for unit clauses).
pub fn encode(cnf: &CnfFormula) -> (Problem, ReductionMap) {
    let (nv, nc) = (cnf.num_vars(), cnf.num_clauses());
    let id = |v, i, b| copy_id(nc, v, i, b);
    let mut precs = Vec::with_capacity(2 * nv * nc * nc);
    for v in 0..nv {
        for i in 0..nc {
            for j in 0..nc {
                precs.push((id(v, i, false), id(v, j, true)));
                precs.push((id(v, j, true), id(v, i, false)));
            }
        }
    }
    for (i, clause) in cnf.clauses().iter().enumerate() {
        // the copy that is accepted when the literal is false
        let falsifying: Vec<usize> = clause.iter().map(|l| id(l.var, i, !l.positive)).collect();
        for (k, &a) in falsifying.iter().enumerate() {
            precs.push((a, falsifying[(k + 1) % falsifying.len()]));
        }
    }
    let n = 2 * nv * nc;
    let mut names = vec![String::new(); n];
    let mut copies = Vec::with_capacity(nv);
    for v in 0..nv {
        let mut pair = [Vec::with_capacity(nc), Vec::with_capacity(nc)];
        for (b, ids) in pair.iter_mut().enumerate() {
            for i in 0..nc {
                let a = id(v, i, b == 1);
                names[a] = format!("x{}_{}@{}", v + 1, b, i + 1);
                ids.push(a);
            }
        }
        copies.push(pair);
    }
    let problem = Problem::new(n, [], precs)
        .expect("reduction pairs are in range")
        .with_name(format!("cnf-v{nv}-c{nc}"))
        .with_action_names(names)
        .expect("one name per action");
    let map = ReductionMap {
        num_vars: nv,
        num_clauses: nc,
        copies,
        clauses: cnf
            .clauses()
            .iter()
            .map(|c| c.iter().map(|l| l.to_dimacs()).collect())
            .collect(),
    };
    (problem, map)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("schedule covers {found} actions, reduction has {expected}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("variable {var} has copies of both polarities (or neither) fully accepted")]
    MixedPolarity { var: usize },
}

/// Reads a valuation off a schedule accepting `N·C` actions; `None` when
/// the schedule accepts fewer.
pub fn decode(map: &ReductionMap, schedule: &Schedule) -> Result<Option<Vec<bool>>, DecodeError> {
    if schedule.len() != map.num_actions() {
        return Err(DecodeError::SizeMismatch {
            expected: map.num_actions(),
            found: schedule.len(),
        });
    }
    if objective(schedule) != map.num_vars * map.num_clauses {
        return Ok(None);
    }
    let mut valuation = Vec::with_capacity(map.num_vars);
    for (var, [falses, trues]) in map.copies.iter().enumerate() {
        let all = |ids: &[usize]| ids.iter().all(|&a| schedule.accepted[a]);
        match (all(falses), all(trues)) {
            (true, false) => valuation.push(false),
            (false, true) => valuation.push(true),
            _ => return Err(DecodeError::MixedPolarity { var }),
        }
    }
    Ok(Some(valuation))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_clause_encoding() {
        let cnf = CnfFormula::from_signed(1, &[vec![1]]).unwrap();
        let (p, map) = encode(&cnf);
        assert_eq!(p.len(), 2);
        let (f, t) = (map.action(0, false, 0), map.action(0, true, 0));
        assert_eq!(p.precs(), &[(f, t), (t, f), (f, f)]);
        assert!(p.deps().is_empty());
    }

    #[test]
    fn binary_clause_encoding() {
        let cnf = CnfFormula::from_signed(2, &[vec![1, 2]]).unwrap();
        let (p, map) = encode(&cnf);
        assert_eq!(p.len(), 4);
        let p0 = map.action(0, false, 0);
        let q0 = map.action(1, false, 0);
        let p1 = map.action(0, true, 0);
        let q1 = map.action(1, true, 0);
        assert_eq!(
            p.precs(),
            &[(p0, p1), (p1, p0), (q0, q1), (q1, q0), (p0, q0), (q0, p0)]
        );
    }

    #[test]
    fn negative_literals_use_true_copies() {
        let cnf = CnfFormula::from_signed(2, &[vec![1, -2], vec![2]]).unwrap();
        let (p, map) = encode(&cnf);
        let cycle = &p.precs()[2 * 2 * 4..];
        let p0 = map.action(0, false, 0);
        let q1 = map.action(1, true, 0);
        let q0_second = map.action(1, false, 1);
        assert_eq!(cycle, &[(p0, q1), (q1, p0), (q0_second, q0_second)]);
        assert_eq!(p.action_name(q1), "x2_1@1");
    }

    #[test]
    fn constraint_count_closed_form() {
        let cnf = CnfFormula::from_signed(3, &[vec![1, -2, 3], vec![-1], vec![2, 3]]).unwrap();
        let (p, _) = encode(&cnf);
        assert_eq!(p.precs().len(), 2 * 3 * 9 + 6);
    }

    #[test]
    fn decode_full_and_partial_schedules() {
        let cnf = CnfFormula::from_signed(1, &[vec![1]]).unwrap();
        let (_, map) = encode(&cnf);
        let t = map.action(0, true, 0);
        let mut accepted = vec![false; 2];
        accepted[t] = true;
        let s = Schedule::new(accepted, vec![None, None]);
        assert_eq!(decode(&map, &s).unwrap(), Some(vec![true]));
        assert_eq!(decode(&map, &Schedule::all_rejected(2)).unwrap(), None);
        assert!(matches!(
            decode(&map, &Schedule::all_rejected(3)),
            Err(DecodeError::SizeMismatch { .. })
        ));
    }

    #[test]
    fn decode_flags_mixed_polarity() {
        let cnf = CnfFormula::from_signed(1, &[vec![1], vec![-1]]).unwrap();
        let (_, map) = encode(&cnf);
        let mut accepted = vec![false; 4];
        accepted[map.action(0, false, 0)] = true;
        accepted[map.action(0, true, 1)] = true;
        let s = Schedule::new(accepted, vec![None; 4]);
        assert_eq!(decode(&map, &s), Err(DecodeError::MixedPolarity { var: 0 }));
    }

    #[test]
    fn formula_validation() {
        assert_eq!(CnfFormula::new(0, vec![]), Err(CnfError::NoVariables));
        assert_eq!(
            CnfFormula::new(2, vec![vec![]]),
            Err(CnfError::EmptyClause { clause: 0 })
        );
        assert_eq!(
            CnfFormula::from_signed(2, &[vec![1, -1]]),
            Err(CnfError::RepeatedVariable { clause: 0, var: 0 })
        );
        assert!(matches!(
            CnfFormula::from_signed(1, &[vec![2]]),
            Err(CnfError::VariableOutOfRange { var: 1, .. })
        ));
    }

    #[test]
    fn dimacs_parsing() {
        let text = "c example\np cnf 3 2\n1 -3 0\n2\n3 -1 0\n";
        let cnf = CnfFormula::parse_dimacs(text).unwrap();
        assert_eq!(cnf.num_vars(), 3);
        assert_eq!(
            cnf.clauses(),
            &[
                vec![Literal::pos(0), Literal::neg(2)],
                vec![Literal::pos(1), Literal::pos(2), Literal::neg(0)]
            ]
        );
        assert_eq!(CnfFormula::parse_dimacs(&cnf.to_dimacs()).unwrap(), cnf);
        assert!(matches!(
            CnfFormula::parse_dimacs("1 2 0\n"),
            Err(CnfError::Dimacs { line: 1, .. })
        ));
        assert!(matches!(
            CnfFormula::parse_dimacs("p cnf 2 2\n1 2 0\n"),
            Err(CnfError::Dimacs { .. })
        ));
        assert!(matches!(
            CnfFormula::parse_dimacs("p cnf 2 1\n1 x 0\n"),
            Err(CnfError::Dimacs { line: 2, .. })
        ));
        assert!(matches!(
            CnfFormula::parse_dimacs("p cnf 2 1\n1 3 0\n"),
            Err(CnfError::Dimacs { line: 2, .. })
        ));
    }

    #[test]
    fn map_json_round_trip() {
        let cnf = CnfFormula::from_signed(2, &[vec![1, -2]]).unwrap();
        let (_, map) = encode(&cnf);
        assert_eq!(ReductionMap::from_json(&map.to_json()).unwrap(), map);
    }
}
