//! Benchmark families: generate, solve with each method, tabulate.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Duration;

use logrecon::batch;
use logrecon::cp::{branch_and_bound, CpConfig};
use logrecon::gen::{generate, GenSpec};
use logrecon::ls::{self, LsMode, LsParams};
use logrecon::{check_schedule, Problem, SolveStats};
use serde::Serialize;

use crate::report::Clock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    Cp,
    Descent,
    Tabu,
}

impl Method {
    pub fn tag(self) -> &'static str {
        match self {
            Method::Cp => "cp",
            Method::Descent => "descent",
            Method::Tabu => "tabu",
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cp" => Ok(Method::Cp),
            "descent" => Ok(Method::Descent),
            "tabu" => Ok(Method::Tabu),
            other => Err(format!("unknown method `{other}` (cp, descent, tabu)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub dep_density: f64,
    pub prec_density: f64,
    pub seeds: u64,
    pub seed_base: u64,
    pub methods: Vec<Method>,
    pub timeout: Duration,
    /// Tabu move budget; `10·n²` when absent.
    pub ls_iters: Option<u64>,
    pub tabu_max: u32,
}

/// One (instance, method) result in the layout of the benchmark tables.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub name: String,
    pub size: usize,
    pub dep_count: usize,
    pub prec_count: usize,
    pub method: &'static str,
    pub first_value: usize,
    pub first_ms: u64,
    pub best_value: usize,
    pub best_ms: u64,
    /// Present only when optimality was proved.
    pub proof_ms: Option<u64>,
    pub iterations: u64,
    /// Exact-solver value on the same instance, when `cp` ran.
    pub opt: Option<usize>,
    pub opt_proved: Option<bool>,
    /// `proved`, `unproved` (limit reached) or `done` (heuristic).
    pub status: &'static str,
    pub timeout_ms: Option<u64>,
}

fn row(
    problem: &Problem,
    size: usize,
    method: Method,
    stats: &SolveStats,
    clock: Clock,
    timeout: Option<Duration>,
) -> BenchRow {
    let status = match (method, stats.proved_optimal) {
        (Method::Cp, true) => "proved",
        (Method::Cp, false) => "unproved",
        _ => "done",
    };
    BenchRow {
        name: problem.name().to_string(),
        size,
        dep_count: problem.deps().len(),
        prec_count: problem.precs().len(),
        method: method.tag(),
        first_value: stats.first_value,
        first_ms: clock.ms(stats.first_time),
        best_value: stats.best_value,
        best_ms: clock.ms(stats.best_time),
        proof_ms: (method == Method::Cp && stats.proved_optimal)
            .then(|| clock.ms(stats.total_time)),
        iterations: stats.nodes_or_iterations,
        opt: None,
        opt_proved: None,
        status,
        timeout_ms: timeout.map(|t| t.as_millis() as u64),
    }
}

#[derive(Debug)]
pub enum BenchError {
    /// Bad family or solver parameters.
    Config(String),
    /// A solver produced an invalid schedule.
    Invalid(String),
}

pub fn run(config: &BenchConfig, clock: Clock) -> Result<Vec<BenchRow>, BenchError> {
    let specs: Vec<GenSpec> = config
        .sizes
        .iter()
        .flat_map(|&size| {
            (0..config.seeds).map(move |k| GenSpec::new(size, 0.0, 0.0, config.seed_base + k))
        })
        .map(|s| GenSpec {
            dep_density: config.dep_density,
            prec_density: config.prec_density,
            ..s
        })
        .collect();
    for s in &specs {
        s.validate()
            .map_err(|e| BenchError::Config(e.to_string()))?;
    }
    let per_instance = batch::map(&specs, |spec| run_instance(config, spec, clock));
    let mut rows = Vec::new();
    for r in per_instance {
        rows.extend(r?);
    }
    Ok(rows)
}

fn run_instance(
    config: &BenchConfig,
    spec: &GenSpec,
    clock: Clock,
) -> Result<Vec<BenchRow>, BenchError> {
    let problem = generate(spec).expect("validated spec");
    let mut rows = Vec::new();
    let mut opt = None;
    for &method in &config.methods {
        let (schedule, stats, timeout) = match method {
            Method::Cp => {
                let cfg = CpConfig::exhaustive().with_time_limit(config.timeout);
                let sol = branch_and_bound(&problem, &cfg)
                    .map_err(|e| BenchError::Config(e.to_string()))?;
                opt = Some((sol.stats.best_value, sol.stats.proved_optimal));
                (sol.schedule, sol.stats, Some(config.timeout))
            }
            Method::Descent | Method::Tabu => {
                if problem.has_dependencies() {
                    continue;
                }
                let mode = if method == Method::Tabu {
                    LsMode::Tabu
                } else {
                    LsMode::Descent
                };
                let params = LsParams {
                    tabu_max: config.tabu_max,
                    max_iterations: match mode {
                        LsMode::Tabu => config
                            .ls_iters
                            .unwrap_or_else(|| LsParams::budget_for(spec.size)),
                        LsMode::Descent => u64::MAX,
                    },
                    rng_seed: spec.seed,
                    mode,
                    warm_start: None,
                    time_limit: Some(config.timeout),
                };
                let out =
                    ls::run(&problem, &params).map_err(|e| BenchError::Config(e.to_string()))?;
                (out.schedule, out.stats, None)
            }
        };
        let violations =
            check_schedule(&problem, &schedule).map_err(|e| BenchError::Invalid(e.to_string()))?;
        if !violations.is_empty() {
            return Err(BenchError::Invalid(format!(
                "{} produced an invalid schedule on {}: {}",
                method.tag(),
                problem.name(),
                violations[0]
            )));
        }
        rows.push(row(&problem, spec.size, method, &stats, clock, timeout));
    }
    if let Some((value, proved)) = opt {
        for r in &mut rows {
            r.opt = Some(value);
            r.opt_proved = Some(proved);
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[BenchRow]) -> Result<String, String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub size: usize,
    pub method: &'static str,
    pub instances: usize,
    pub proved: usize,
    pub mean_best: f64,
    pub median_best: f64,
    pub mean_best_ms: f64,
    pub median_best_ms: f64,
    /// Over proved runs only.
    pub median_proof_ms: Option<f64>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn aggregate(rows: &[BenchRow]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(usize, &'static str), Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.size, r.method)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((size, method), rs)| {
            let best: Vec<f64> = rs.iter().map(|r| r.best_value as f64).collect();
            let ms: Vec<f64> = rs.iter().map(|r| r.best_ms as f64).collect();
            let proofs: Vec<f64> = rs
                .iter()
                .filter_map(|r| r.proof_ms)
                .map(|x| x as f64)
                .collect();
            Aggregate {
                size,
                method,
                instances: rs.len(),
                proved: proofs.len(),
                mean_best: mean(&best),
                median_best: median(best),
                mean_best_ms: mean(&ms),
                median_best_ms: median(ms),
                median_proof_ms: (!proofs.is_empty()).then(|| median(proofs)),
            }
        })
        .collect()
}

/// Exact-solver rows with the columns of the first benchmark table.
pub fn cp_table(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<28} {:>5} {:>5} {:>6} {:>10} {:>9} {:>8} {:>9} {:>10}",
        "bench", "size", "#dep", "#prec", "first sol", "time ms", "opt sol", "time ms", "proof ms"
    );
    for r in rows.iter().filter(|r| r.method == "cp") {
        let (opt, proof) = match r.proof_ms {
            Some(p) => (r.best_value.to_string(), p.to_string()),
            None => (format!(">={}", r.best_value), "unproved".to_string()),
        };
        let _ = writeln!(
            out,
            "{:<28} {:>5} {:>5} {:>6} {:>10} {:>9} {:>8} {:>9} {:>10}",
            r.name,
            r.size,
            r.dep_count,
            r.prec_count,
            r.first_value,
            r.first_ms,
            opt,
            r.best_ms,
            proof
        );
    }
    out
}

/// Local-search rows side by side, with the columns of the second table.
pub fn ls_table(rows: &[BenchRow]) -> String {
    let mut by_instance: BTreeMap<(usize, &str), [Option<&BenchRow>; 2]> = BTreeMap::new();
    let mut order = Vec::new();
    for r in rows {
        let slot = match r.method {
            "descent" => 0,
            "tabu" => 1,
            _ => continue,
        };
        let key = (r.size, r.name.as_str());
        if !by_instance.contains_key(&key) {
            order.push(key);
        }
        by_instance.entry(key).or_default()[slot] = Some(r);
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<28} {:>5} {:>6} {:>6} | {:>8} {:>7} {:>8} | {:>8} {:>7} {:>8}",
        "bench", "size", "#prec", "opt", "desc best", "#iter", "ms", "tabu best", "#iter", "ms"
    );
    let cell = |r: Option<&BenchRow>| match r {
        Some(r) => format!("{:>8} {:>7} {:>8}", r.best_value, r.iterations, r.best_ms),
        None => format!("{:>8} {:>7} {:>8}", "-", "-", "-"),
    };
    for key in order {
        let [d, t] = by_instance[&key];
        let any = d.or(t).expect("at least one method");
        let opt = match (any.opt, any.opt_proved) {
            (Some(v), Some(true)) => v.to_string(),
            (Some(v), _) => format!(">={v}"),
            _ => "-".into(),
        };
        let _ = writeln!(
            out,
            "{:<28} {:>5} {:>6} {:>6} | {} | {}",
            any.name,
            any.size,
            any.prec_count,
            opt,
            cell(d),
            cell(t)
        );
    }
    out
}

pub fn aggregate_table(aggs: &[Aggregate]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>5} {:<8} {:>4} {:>6} {:>10} {:>10} {:>12} {:>14}",
        "size", "method", "runs", "proved", "mean best", "med best", "med best ms", "med proof ms"
    );
    for a in aggs {
        let proof = a
            .median_proof_ms
            .map_or_else(|| "-".to_string(), |p| format!("{p:.1}"));
        let _ = writeln!(
            out,
            "{:>5} {:<8} {:>4} {:>6} {:>10.2} {:>10.1} {:>12.1} {:>14}",
            a.size,
            a.method,
            a.instances,
            a.proved,
            a.mean_best,
            a.median_best,
            a.median_best_ms,
            proof
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(methods: Vec<Method>) -> BenchConfig {
        BenchConfig {
            sizes: vec![12, 14],
            dep_density: 0.0,
            prec_density: 1.5,
            seeds: 3,
            seed_base: 0,
            methods,
            timeout: Duration::from_secs(10),
            ls_iters: Some(2000),
            tabu_max: 10,
        }
    }

    #[test]
    fn rows_cover_every_instance_and_method() {
        let cfg = small_config(vec![Method::Cp, Method::Descent, Method::Tabu]);
        let rows = run(&cfg, Clock { redact: true }).unwrap();
        assert_eq!(rows.len(), 2 * 3 * 3);
        for r in &rows {
            assert!(r.first_value <= r.best_value);
            assert!(r.best_value <= r.opt.unwrap());
        }
        let csv = to_csv(&rows).unwrap();
        let header = csv.lines().next().unwrap();
        assert_eq!(
            header,
            "name,size,dep_count,prec_count,method,first_value,first_ms,best_value,best_ms,\
             proof_ms,iterations,opt,opt_proved,status,timeout_ms"
        );
        assert!(ls_table(&rows).lines().count() == 7);
        assert!(cp_table(&rows).lines().count() == 7);
        let aggs = aggregate(&rows);
        assert_eq!(aggs.len(), 6);
        assert!(aggs
            .iter()
            .filter(|a| a.method == "cp")
            .all(|a| a.proved == 3));
    }

    #[test]
    fn ls_skips_instances_with_dependencies() {
        let mut cfg = small_config(vec![Method::Descent]);
        cfg.dep_density = 1.5;
        assert!(run(&cfg, Clock { redact: true }).unwrap().is_empty());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn method_parsing() {
        assert_eq!("tabu".parse::<Method>(), Ok(Method::Tabu));
        assert!("sa".parse::<Method>().is_err());
    }
}
