//! Text and JSON renderings shared by the subcommands, and schedule input.

use std::time::Duration;

use logrecon::cp::extract_schedule;
use logrecon::{Problem, Schedule, SolveStats};
use serde::{Deserialize, Serialize};

/// Wall-clock rendering; `redact` zeroes every time for byte-stable output.
#[derive(Debug, Clone, Copy)]
pub struct Clock {
    pub redact: bool,
}

impl Clock {
    pub fn ms(&self, d: Duration) -> u64 {
        if self.redact {
            0
        } else {
            d.as_millis() as u64
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub position: usize,
    pub action: usize,
    pub name: String,
}

#[derive(Debug, Serialize)]
pub struct StatsJson {
    pub first_value: usize,
    pub first_ms: u64,
    pub best_value: usize,
    pub best_ms: u64,
    pub proved_optimal: bool,
    pub total_ms: u64,
    pub nodes_or_iterations: u64,
}

impl StatsJson {
    pub fn new(stats: &SolveStats, clock: Clock) -> Self {
        StatsJson {
            first_value: stats.first_value,
            first_ms: clock.ms(stats.first_time),
            best_value: stats.best_value,
            best_ms: clock.ms(stats.best_time),
            proved_optimal: stats.proved_optimal,
            total_ms: clock.ms(stats.total_time),
            nodes_or_iterations: stats.nodes_or_iterations,
        }
    }
}

pub fn schedule_entries(problem: &Problem, schedule: &Schedule) -> Vec<ScheduleEntry> {
    extract_schedule(schedule)
        .into_iter()
        .map(|(position, action)| ScheduleEntry {
            position,
            action: action.index(),
            name: problem.action_name(action.index()),
        })
        .collect()
}

/// `position<TAB>name` lines.
pub fn schedule_lines(problem: &Problem, schedule: &Schedule) -> String {
    let mut out = String::new();
    for e in schedule_entries(problem, schedule) {
        out.push_str(&format!("{}\t{}\n", e.position, e.name));
    }
    out
}

/// Stats as `# key: value` comment lines, so solver output stays a valid
/// schedule file.
pub fn stats_block(stats: &SolveStats, clock: Clock, label: &str) -> String {
    let s = StatsJson::new(stats, clock);
    format!(
        "# {label}: {}\n# first: {} at {} ms\n# best: {} at {} ms\n# proved optimal: {}\n# total: {} ms\n# {}: {}\n",
        s.best_value,
        s.first_value,
        s.first_ms,
        s.best_value,
        s.best_ms,
        s.proved_optimal,
        s.total_ms,
        if label == "value" { "nodes" } else { "iterations" },
        s.nodes_or_iterations
    )
}

#[derive(Deserialize)]
struct JsonSchedule {
    schedule: Vec<JsonEntry>,
}

#[derive(Deserialize)]
struct JsonEntry {
    position: usize,
    #[serde(default)]
    action: Option<usize>,
    #[serde(default)]
    name: Option<String>,
}

/// Reads a schedule either as `position<TAB>name` lines (`#` starts a
/// comment) or as a JSON document with a `schedule` array, as written by
/// `solve --json` and `ls --json`.
pub fn parse_schedule(problem: &Problem, text: &str) -> Result<Schedule, String> {
    let n = problem.len();
    let mut accepted = vec![false; n];
    let mut positions = vec![None; n];
    let mut place = |action: usize, position: usize, where_: &str| -> Result<(), String> {
        if accepted[action] {
            return Err(format!("{where_}: action {action} listed twice"));
        }
        accepted[action] = true;
        positions[action] = Some(position);
        Ok(())
    };
    if text.trim_start().starts_with('{') {
        let doc: JsonSchedule =
            serde_json::from_str(text).map_err(|e| format!("schedule JSON: {e}"))?;
        for (k, e) in doc.schedule.iter().enumerate() {
            let where_ = format!("schedule entry {k}");
            let action = match (e.action, &e.name) {
                (Some(a), _) if a < n => a,
                (Some(a), _) => return Err(format!("{where_}: action {a} outside 0..{n}")),
                (None, Some(name)) => problem
                    .lookup_action(name)
                    .ok_or_else(|| format!("{where_}: unknown action `{name}`"))?,
                (None, None) => return Err(format!("{where_}: needs `action` or `name`")),
            };
            place(action, e.position, &where_)?;
        }
    } else {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let where_ = format!("line {}", idx + 1);
            let (pos, name) = line
                .split_once('\t')
                .or_else(|| line.split_once(' '))
                .ok_or_else(|| format!("{where_}: expected `position<TAB>name`"))?;
            let position = pos
                .trim()
                .parse()
                .map_err(|_| format!("{where_}: bad position `{pos}`"))?;
            let name = name.trim();
            let action = problem
                .lookup_action(name)
                .ok_or_else(|| format!("{where_}: unknown action `{name}`"))?;
            place(action, position, &where_)?;
        }
    }
    Ok(Schedule::new(accepted, positions))
}
