use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use logrecon::{check_schedule, oracle, Problem};

struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("logrecon-cli-{tag}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn path(&self, name: &str) -> String {
        self.0.join(name).to_string_lossy().into_owned()
    }

    fn write(&self, name: &str, text: &str) -> String {
        let p = self.path(name);
        std::fs::write(&p, text).unwrap();
        p
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.0).ok();
    }
}

fn logrecon(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logrecon"))
        .args(args)
        .output()
        .expect("spawn logrecon")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn load(path: &str) -> Problem {
    Problem::from_json(&std::fs::read_to_string(Path::new(path)).unwrap()).unwrap()
}

#[test]
fn gen_solve_check_round_trip() {
    let dir = Scratch::new("round");
    let inst = dir.path("i.json");
    assert!(
        logrecon(&["gen", "--size", "30", "--seed", "4", "-o", &inst])
            .status
            .success()
    );
    let solved = logrecon(&["solve", &inst]);
    assert!(solved.status.success());
    let sched = dir.write("s.txt", &stdout(&solved));
    let checked = logrecon(&["check", &inst, &sched]);
    assert!(checked.status.success(), "{}", stdout(&checked));

    let as_json = logrecon(&["--json", "solve", &inst]);
    let sched_json = dir.write("s.json", &stdout(&as_json));
    assert!(logrecon(&["check", &inst, &sched_json]).status.success());
}

#[test]
fn solve_agrees_with_oracle_on_small_instances() {
    let dir = Scratch::new("oracle");
    for seed in 0..5 {
        let inst = dir.path(&format!("i{seed}.json"));
        let s = seed.to_string();
        assert!(
            logrecon(&["gen", "--size", "12", "--seed", &s, "-o", &inst])
                .status
                .success()
        );
        let solved = logrecon(&["--json", "solve", &inst, "--prove"]);
        assert!(solved.status.success());
        let doc: serde_json::Value = serde_json::from_slice(&solved.stdout).unwrap();
        let best = oracle::brute_force(&load(&inst)).unwrap();
        assert_eq!(doc["stats"]["best_value"], best.value, "seed {seed}");
        assert_eq!(doc["stats"]["proved_optimal"], true);

        let or = stdout(&logrecon(&["oracle", &inst]));
        assert!(
            or.starts_with(&format!("optimum: {}\n", best.value)),
            "{or}"
        );
    }
}

#[test]
fn check_reports_violations_with_exit_code() {
    let dir = Scratch::new("check");
    let inst = dir.write(
        "i.json",
        r#"{"name":"c","n":2,"deps":[[0,1]],"precs":[[1,0]]}"#,
    );
    let bad = dir.write("bad.txt", "1\t0\n");
    let out = logrecon(&["check", &inst, &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("dependency"), "{}", stdout(&out));
    let good = dir.write("good.txt", "1\t1\n2\t0\n");
    assert!(logrecon(&["check", &inst, &good]).status.success());
}

#[test]
fn bad_input_exits_with_two() {
    let dir = Scratch::new("input");
    let broken = dir.write("broken.json", "{ not json");
    assert_eq!(logrecon(&["solve", &broken]).status.code(), Some(2));
    assert_eq!(
        logrecon(&["solve", &dir.path("missing.json")])
            .status
            .code(),
        Some(2)
    );
    let self_dep = dir.write("sd.json", r#"{"name":"x","n":2,"deps":[[1,1]],"precs":[]}"#);
    assert_eq!(logrecon(&["solve", &self_dep]).status.code(), Some(2));
    let with_deps = dir.write("d.json", r#"{"name":"x","n":2,"deps":[[0,1]],"precs":[]}"#);
    assert_eq!(logrecon(&["ls", &with_deps]).status.code(), Some(2));
}

#[test]
fn unproved_search_exits_with_three() {
    let dir = Scratch::new("unproved");
    let inst = dir.path("i.json");
    assert!(
        logrecon(&["gen", "--size", "80", "--seed", "1", "-o", &inst])
            .status
            .success()
    );
    let out = logrecon(&["solve", &inst, "--prove", "--node-limit", "3"]);
    assert_eq!(out.status.code(), Some(3));
    // the schedule is still printed and valid
    let sched = dir.write("s.txt", &stdout(&out));
    assert!(logrecon(&["check", &inst, &sched]).status.success());
}

#[test]
fn contradiction_round_trips_to_none() {
    let dir = Scratch::new("unsat");
    let cnf = dir.write("u.cnf", "p cnf 1 2\n1 0\n-1 0\n");
    let inst = dir.path("u.json");
    let map = dir.path("u.map");
    assert!(logrecon(&["encode", &cnf, "-o", &inst, "--map", &map])
        .status
        .success());
    assert_eq!(load(&inst).len(), 4);
    let sched = dir.write("s.txt", &stdout(&logrecon(&["solve", &inst, "--prove"])));
    let decoded = stdout(&logrecon(&["decode", "--map", &map, &sched]));
    assert!(decoded.starts_with("NONE"), "{decoded}");
}

#[test]
fn satisfiable_formula_decodes_to_model() {
    let dir = Scratch::new("sat");
    let cnf = dir.write("s.cnf", "c example\np cnf 3 3\n1 2 0\n-1 3 0\n-3 0\n");
    let inst = dir.path("s.json");
    let map = dir.path("s.map");
    assert!(logrecon(&["encode", &cnf, "-o", &inst, "--map", &map])
        .status
        .success());
    let sched = dir.write("s.txt", &stdout(&logrecon(&["solve", &inst, "--prove"])));
    let decoded = stdout(&logrecon(&["decode", "--map", &map, &sched]));
    assert_eq!(decoded.trim(), "v -1 2 -3 0");
}

#[test]
fn local_search_on_two_cycle_keeps_one() {
    let dir = Scratch::new("ls");
    let inst = dir.write(
        "c.json",
        r#"{"name":"c","n":2,"deps":[],"precs":[[0,1],[1,0]]}"#,
    );
    for mode in ["descent", "tabu"] {
        let out = logrecon(&["--json", "ls", &inst, "--mode", mode]);
        assert!(out.status.success());
        let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(doc["stats"]["best_value"], 1, "{mode}");
        let sched = dir.write("s.json", &stdout(&out));
        assert!(logrecon(&["check", &inst, &sched]).status.success());
    }
}

#[test]
fn redacted_output_is_reproducible() {
    let dir = Scratch::new("det");
    let a = dir.path("a.json");
    let b = dir.path("b.json");
    for p in [&a, &b] {
        assert!(logrecon(&[
            "gen",
            "--size",
            "40",
            "--dep-density",
            "0",
            "--seed",
            "8",
            "-o",
            p
        ])
        .status
        .success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let args = [
        "--redact-times",
        "ls",
        &a,
        "--mode",
        "tabu",
        "--seed",
        "3",
        "--trace",
    ];
    let first = logrecon(&args);
    assert_eq!(first.stdout, logrecon(&args).stdout);
    assert!(stdout(&first).contains("t_ms=0"));
}

#[test]
fn bench_csv_has_one_row_per_run() {
    let out = logrecon(&[
        "--redact-times",
        "bench",
        "--sizes",
        "12",
        "--seeds",
        "2",
        "--csv",
        "-",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("name,size,dep_count,prec_count,method"));
    assert_eq!(lines.count(), 6);
}

#[test]
fn solver_output_passes_library_check() {
    let dir = Scratch::new("lib");
    let inst = dir.path("i.json");
    assert!(
        logrecon(&["gen", "--size", "25", "--seed", "2", "-o", &inst])
            .status
            .success()
    );
    let out = logrecon(&["--json", "solve", &inst]);
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let p = load(&inst);
    let mut accepted = vec![false; p.len()];
    let mut positions = vec![None; p.len()];
    for e in doc["schedule"].as_array().unwrap() {
        let a = e["action"].as_u64().unwrap() as usize;
        accepted[a] = true;
        positions[a] = Some(e["position"].as_u64().unwrap() as usize);
    }
    let s = logrecon::Schedule::new(accepted, positions);
    assert!(check_schedule(&p, &s).unwrap().is_empty());
}
