//! Acceptance criteria A1 to A9. Each test prints one PASS/FAIL line.
//! Run with `cargo test -p immune-eoc-cli --test acceptance -- --nocapture`.

use immune_eoc::eoc::{run_eoc_round, AgentRole, ControlEvent, Message};
use immune_eoc::epidemic::EpidemicTrace;
use immune_eoc::memory::{MemorySettings, MemoryStore};
use immune_eoc::plan::Plan;
use immune_eoc::planner::{clonal_select, evaluate, EvaluationConfig, SearchBudget};
use immune_eoc::scenario::{
    baseline_round, controlled_round, eoc_round_config, read_summary_csv, PoolConfig,
    ScenarioConfig,
};
use immune_eoc::situation::{distance, Situation};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

const CONFIG: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/cairo.toml");

fn reference() -> ScenarioConfig {
    ScenarioConfig::load(CONFIG).unwrap()
}

fn cases(n: u32) -> Config {
    Config {
        cases: n,
        failure_persistence: None,
        ..Config::default()
    }
}

fn report(id: &str, pass: bool, detail: String) {
    println!("{id} {} {detail}", if pass { "PASS" } else { "FAIL" });
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = xs
        .into_iter()
        .fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    sum / n as f64
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_immune-eoc"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn a1_baseline_reproduction() {
    let out = tempfile::tempdir().unwrap();
    let started = Instant::now();
    let run = cli(&[
        "run",
        "--config",
        CONFIG,
        "--no-control",
        "--rounds",
        "20",
        "--out-dir",
        out.path().to_str().unwrap(),
    ]);
    let elapsed = started.elapsed();
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    let rows = read_summary_csv(fs::File::open(out.path().join("summary.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 20);
    let day = mean(rows.iter().map(|r| r.peak_day as f64));
    let prev = mean(rows.iter().map(|r| r.peak_prevalence));
    let pass = (day - 10.0).abs() <= 2.0
        && (prev - 0.608).abs() <= 0.05
        && elapsed < Duration::from_secs(1);
    report(
        "A1",
        pass,
        format!(
            "mean peak day {day:.2} (10 +/- 2), mean peak prevalence {:.1}% (60.8 +/- 5), 20 runs in {:.0} ms (< 1000)",
            prev * 100.0,
            elapsed.as_secs_f64() * 1e3
        ),
    );
    assert!(pass);
}

#[test]
fn a2_controlled_round_direction() {
    let mut cfg = reference();
    let (mut base_day, mut base_prev, mut ctl_day, mut ctl_prev) = (vec![], vec![], vec![], vec![]);
    for seed in 42..52 {
        cfg.seed = seed;
        let base = baseline_round(&cfg, 1).summary;
        let mut store = MemoryStore::new(cfg.memory);
        let ctl = controlled_round(&cfg, 1, &mut store, None).unwrap().summary;
        base_day.push(base.peak_day as f64);
        base_prev.push(base.peak_prevalence);
        ctl_day.push(ctl.peak_day as f64);
        ctl_prev.push(ctl.peak_prevalence);
    }
    let (bd, bp, cd, cp) = (
        mean(base_day),
        mean(base_prev),
        mean(ctl_day),
        mean(ctl_prev),
    );
    let pass = cd >= bd + 3.0 && cp <= bp - 0.03;
    report(
        "A2",
        pass,
        format!(
            "baseline day {bd:.1} at {:.1}%, controlled day {cd:.1} at {:.1}% (needs >= +3 days and <= -3 pp)",
            bp * 100.0,
            cp * 100.0
        ),
    );
    assert!(pass);
}

#[test]
fn a3_distance_worked_example() {
    let a = Situation::from_counts([0, 0, 2, 1, 0, 0, 0]);
    let b = Situation::from_counts([0, 0, 0, 0, 0, 31, 0]);
    let d = distance(&a, &b);
    report(
        "A3",
        d == 33,
        format!("distance((I:2, II:1), (IM:31)) = {d}, expected 33"),
    );
    assert_eq!(d, 33);
}

fn situation() -> impl Strategy<Value = Situation> {
    prop::array::uniform7(0u32..2000).prop_map(Situation::from_counts)
}

#[test]
fn a3_metric_axioms() {
    let mut runner = TestRunner::new(cases(1000));
    let result = runner.run(&(situation(), situation(), situation()), |(a, b, c)| {
        prop_assert_eq!(distance(&a, &a), 0);
        prop_assert_eq!(distance(&a, &b), distance(&b, &a));
        prop_assert_eq!(distance(&a, &b) == 0, a.counts() == b.counts());
        prop_assert!(distance(&a, &c) <= distance(&a, &b) + distance(&b, &c));
        Ok(())
    });
    report(
        "A3",
        result.is_ok(),
        format!("metric axioms over 1000 cases: {result:?}"),
    );
    result.unwrap();
}

#[test]
fn a4_certainty_bootstrap() {
    let cfg = reference();
    let mut store = MemoryStore::new(cfg.memory);
    let first = run_eoc_round(&eoc_round_config(&cfg, 1), &mut store, None).unwrap();
    let case = store.get(first.stored_case_id.unwrap()).unwrap().clone();
    let second = run_eoc_round(&eoc_round_config(&cfg, 2), &mut store, None).unwrap();
    let query = second.log.messages().find_map(|m| match m {
        Message::AggregatedReport { situation, .. } => Some(*situation),
        _ => None,
    });
    let d = query.map(|q| distance(&q, &case.situation));
    let pass = first.certainty == 0.0
        && second.reused_case == Some(case.id)
        && d == Some(0)
        && second.certainty == case.successfulness;
    report(
        "A4",
        pass,
        format!(
            "round 1 certainty {}, round 2 case {:?} at distance {:?}, certainty {} vs case successfulness {}",
            first.certainty, second.reused_case, d, second.certainty, case.successfulness
        ),
    );
    assert!(pass);
}

#[test]
fn a5_clonal_monotonicity() {
    let cfg = reference();
    let PoolConfig::Random(spec) = cfg.pool.clone() else {
        panic!("reference config draws random pools");
    };
    let budget = SearchBudget {
        generations: 6,
        population_size: 8,
        clones_per_elite: 2,
        acceptable_successfulness: 2.0,
    };
    let initial = Situation::from_counts([997, 0, 3, 0, 0, 0, 0]);
    let mut runner = TestRunner::new(cases(50));
    let result = runner.run(&(any::<u64>(), any::<u64>()), |(pool_seed, seed)| {
        let pool = spec.draw(&mut ChaCha8Rng::seed_from_u64(pool_seed));
        let config = EvaluationConfig {
            disease: cfg.disease,
            horizon: cfg.duration_days,
            seed,
            replicates: 1,
            cost_scale: cfg.planner.cost_scale,
        };
        let outcome = clonal_select(
            &initial,
            &pool,
            &budget,
            &config,
            &mut ChaCha8Rng::seed_from_u64(seed),
        )
        .unwrap();
        prop_assert_eq!(outcome.generations(), budget.generations);
        for w in outcome.trajectory.windows(2) {
            prop_assert!(w[0] <= w[1], "trajectory fell: {:?}", outcome.trajectory);
        }
        prop_assert_eq!(evaluate(&Plan::empty(), &initial, &config).unwrap(), 0.0);
        Ok(())
    });
    report(
        "A5",
        result.is_ok(),
        format!(
            "50 (pool, seed) pairs, non-decreasing best-ever trajectory, empty plan 0: {result:?}"
        ),
    );
    result.unwrap();
}

fn scan_oracle(cases: &[([u32; 7], f64)], query: [u32; 7], floor: f64) -> Option<u64> {
    cases
        .iter()
        .filter(|(_, s)| *s >= floor)
        .map(|(c, _)| {
            c.iter()
                .zip(query)
                .map(|(&x, y)| x.abs_diff(y) as u64)
                .sum()
        })
        .min()
}

#[test]
fn a6_retrieval_filtering() {
    let store_strategy = (
        prop::collection::vec((prop::array::uniform7(0u32..200), 0.0f64..=1.0), 0..=1000),
        prop::array::uniform7(0u32..200),
        0.0f64..=1.0,
    );
    let mut runner = TestRunner::new(cases(200));
    let result = runner.run(&store_strategy, |(cases, query, floor)| {
        let mut store = MemoryStore::new(MemorySettings {
            min_successfulness: floor,
            match_radius: 30,
        });
        for (counts, s) in &cases {
            store
                .store(*s, Situation::from_counts(*counts), Plan::empty())
                .unwrap();
        }
        let got = store.retrieve_nearest(&Situation::from_counts(query));
        if let Some((case, _)) = got {
            prop_assert!(case.successfulness >= floor);
        }
        prop_assert_eq!(got.map(|(_, d)| d), scan_oracle(&cases, query, floor));
        Ok(())
    });
    report(
        "A6",
        result.is_ok(),
        format!(
            "randomized stores up to 1000 cases, floor respected, distance equals scan: {result:?}"
        ),
    );
    result.unwrap();
}

#[test]
fn a7_protocol_replay() {
    let cfg = reference();
    let mut store = MemoryStore::new(cfg.memory);
    let out = run_eoc_round(&eoc_round_config(&cfg, 1), &mut store, None).unwrap();
    let mut first: Vec<(&str, u32, u32, AgentRole)> = Vec::new();
    for e in out.log.entries() {
        let kind = match e.details {
            Message::SituationReport { .. } => "report",
            Message::AggregatedReport { .. } => "aggregate",
            Message::PlanMsg { .. } => "plan",
            Message::TaskAssignment { .. } => "allocate",
            _ => continue,
        };
        if !first.iter().any(|(k, ..)| *k == kind) {
            first.push((kind, e.day, e.hour, e.role));
        }
    }
    let timings: Vec<(u32, u32, AgentRole)> = first.iter().map(|&(_, d, h, r)| (d, h, r)).collect();
    let expected = vec![
        (0, 0, AgentRole::Operational),
        (0, 2, AgentRole::TacticalCommunication),
        (0, 4, AgentRole::DecisionMaking),
        (0, 8, AgentRole::TacticalCommunication),
    ];
    let replay = out.log.replay_control();
    let refs = out.log.check_references();
    let transitions = out
        .log
        .messages()
        .filter(|m| {
            matches!(
                m,
                Message::ControlTransition {
                    event: ControlEvent::NonselfDetected,
                    ..
                }
            )
        })
        .count();
    let pass = timings == expected && replay.is_ok() && refs.is_ok() && transitions == 1;
    report(
        "A7",
        pass,
        format!("first activities {first:?}, replay {replay:?}, references {refs:?}"),
    );
    assert!(pass);
}

fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

#[test]
fn a8_determinism_and_persistence() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let run = cli(&[
            "run",
            "--config",
            CONFIG,
            "--rounds",
            "3",
            "--out-dir",
            dir.path().to_str().unwrap(),
        ]);
        assert!(
            run.status.success(),
            "{}",
            String::from_utf8_lossy(&run.stderr)
        );
    }
    let a = read_dir_bytes(dirs[0].path());
    let b = read_dir_bytes(dirs[1].path());
    // three traces, three logs, memory and summary
    let identical = a == b && a.len() == 8;

    let cfg = reference();
    let mut store = MemoryStore::new(cfg.memory);
    for k in 1..=3 {
        controlled_round(&cfg, k, &mut store, None).unwrap();
    }
    let path = dirs[0].path().join("roundtrip.jsonl");
    store.save(&path).unwrap();
    let round_trip = MemoryStore::load_with(&path, cfg.memory).unwrap() == store;
    let from_cli =
        MemoryStore::load_with(dirs[0].path().join("memory.jsonl"), cfg.memory).unwrap() == store;

    let mut days = 0;
    let mut conserved = true;
    for (name, bytes) in &a {
        if name.ends_with("_trace.csv") {
            let trace = EpidemicTrace::read_csv(bytes.as_slice()).unwrap();
            for s in trace.days() {
                days += 1;
                conserved &= s.total() == cfg.population as u64;
            }
        }
    }
    let pass = identical && round_trip && from_cli && conserved && days == 3 * 51;
    report(
        "A8",
        pass,
        format!(
            "{} files byte-identical: {identical}, memory round-trip: {round_trip}, cli memory matches: {from_cli}, conservation over {days} trace days: {conserved}",
            a.len()
        ),
    );
    assert!(pass);
}

#[test]
fn a9_performance_headroom() {
    let mut cfg = reference();
    // two full searches (detection and checkpoint) of 90 evaluations each
    cfg.planner.generations = 5;
    cfg.planner.acceptable_successfulness = 2.0;
    let mut store = MemoryStore::new(cfg.memory);
    let started = Instant::now();
    let out = run_eoc_round(&eoc_round_config(&cfg, 1), &mut store, None).unwrap();
    let elapsed = started.elapsed();
    let pass = out.evaluations <= 200 && out.evaluations > 0 && elapsed < Duration::from_secs(10);
    report(
        "A9",
        pass,
        format!(
            "one round, {} agents x {} days, {} plan evaluations in {:.2} s (< 10)",
            cfg.population,
            cfg.duration_days,
            out.evaluations,
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}
