use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rfd::baselines::DemoPolicy;
use rfd::demo::parse_demo;
use rfd::env::EnvKind;
use rfd_harness::curves::smooth;
use rfd_harness::demos::{self, record_scripted};
use rfd_harness::experiment::write_outputs;
use rfd_harness::{run_experiment, AgentKind, Demos, ExperimentSpec, LabConfig};

fn data(path: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(path)
}

fn taxi_rfd(agents: usize, budget: usize, window: usize) -> ExperimentSpec {
    ExperimentSpec {
        agents,
        budget,
        window,
        demos: Demos::Files(vec![data("demos/taxi_human.demo")]),
        ..ExperimentSpec::new(EnvKind::Taxi, AgentKind::Rfd)
    }
}

#[test]
fn taxi_curves_span_the_budget() {
    let result = run_experiment(&taxi_rfd(10, 300, 30)).unwrap();
    assert_eq!(result.runs.len(), 10);
    for run in &result.runs {
        assert_eq!(run.curve.len(), 300);
        let raw: Vec<f64> = run.curve.iter().map(|p| p.raw_metric).collect();
        for (i, p) in run.curve.iter().enumerate() {
            let lo = (i + 1).saturating_sub(30);
            let brute = raw[lo..=i].iter().sum::<f64>() / (i + 1 - lo) as f64;
            assert!((p.smoothed_metric - brute).abs() < 1e-12);
            assert_eq!(p.attempt, i + 1);
        }
        assert!(run.curve.windows(2).all(|w| w[0].cumulative_actions < w[1].cumulative_actions));
    }
}

#[test]
fn mean_curve_is_pointwise_mean() {
    let result = run_experiment(&taxi_rfd(4, 40, 10)).unwrap();
    for (i, m) in result.mean.iter().enumerate() {
        let raw = result.runs.iter().map(|r| r.curve[i].raw_metric).sum::<f64>() / 4.0;
        let sm = result.runs.iter().map(|r| r.curve[i].smoothed_metric).sum::<f64>() / 4.0;
        assert!((m.raw_metric - raw).abs() < 1e-12);
        assert!((m.smoothed_metric - sm).abs() < 1e-12);
    }
}

#[test]
fn zero_budget_gives_empty_curves() {
    let result = run_experiment(&taxi_rfd(3, 0, 30)).unwrap();
    assert!(result.runs.iter().all(|r| r.curve.is_empty() && r.convergence.is_none()));
    assert!(result.mean.is_empty());
    assert_eq!(result.summary.converged, 0);
    assert_eq!(result.summary.mean_convergence_actions, None);
    assert_eq!(result.summary.mean_curve_convergence, None);
}

#[test]
fn courier_curves_use_the_requested_window() {
    let mut spec = taxi_rfd(2, 60, 50);
    spec.env = EnvKind::Courier;
    spec.demos = Demos::Files(vec![data("demos/courier_human.demo")]);
    let result = run_experiment(&spec).unwrap();
    for run in &result.runs {
        assert_eq!(run.curve.len(), 60);
        let raw: Vec<f64> = run.curve.iter().map(|p| p.raw_metric).collect();
        let expected = smooth(&raw, 50);
        assert!(run.curve.iter().zip(expected).all(|(p, e)| p.smoothed_metric == e));
    }
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn identical_specs_write_identical_bytes() {
    let spec = taxi_rfd(3, 50, 10);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_outputs(&run_experiment(&spec).unwrap(), a.path()).unwrap();
    write_outputs(&run_experiment(&spec).unwrap(), b.path()).unwrap();
    let fa = files(a.path());
    assert_eq!(fa, files(b.path()));
    let names: BTreeSet<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    for n in ["agent_00.csv", "agent_02.csv", "mean.csv", "summary.json", "theory_01.txt"] {
        assert!(names.contains(n), "missing {n}");
    }
    let header = String::from_utf8(fa[0].1.clone()).unwrap();
    assert!(header.starts_with("attempt,cumulative_actions,raw_metric,smoothed_metric"));

    let mut other = spec.clone();
    other.seed = 1;
    let c = tempfile::tempdir().unwrap();
    write_outputs(&run_experiment(&other).unwrap(), c.path()).unwrap();
    assert_ne!(fa, files(c.path()));
}

#[test]
fn baseline_runs_report_greedy_and_optimal_returns() {
    let spec = ExperimentSpec {
        agents: 2,
        budget: 100,
        window: 20,
        ..ExperimentSpec::new(EnvKind::Taxi, AgentKind::QLearning)
    };
    let result = run_experiment(&spec).unwrap();
    for p in &result.runs[0].curve {
        let (g, o) = (p.greedy_metric.unwrap(), p.optimal_metric.unwrap());
        assert!(g <= o + 1e-9);
        assert!(o > 0.0 && o <= 20.0);
    }
}

#[test]
fn spec_errors_are_reported() {
    let missing = ExperimentSpec {
        demos: Demos::Files(vec![PathBuf::from("/nonexistent/demo.demo")]),
        ..taxi_rfd(1, 10, 5)
    };
    let err = run_experiment(&missing).unwrap_err();
    assert!(format!("{err:#}").contains("/nonexistent/demo.demo"));

    assert!(run_experiment(&ExperimentSpec { agents: 0, ..taxi_rfd(1, 10, 5) }).is_err());
    assert!(run_experiment(&ExperimentSpec { window: 11, ..taxi_rfd(1, 10, 5) }).is_err());
    let courier_baseline = ExperimentSpec::new(EnvKind::Courier, AgentKind::Imitation);
    assert!(run_experiment(&courier_baseline).is_err());
    let mismatched = ExperimentSpec {
        demos: Demos::Policy(DemoPolicy::new()),
        ..taxi_rfd(1, 10, 5)
    };
    assert!(run_experiment(&mismatched).is_err());

    assert!("sarsa".parse::<AgentKind>().is_err());
    assert!("decomposition".parse::<AgentKind>().is_ok());
    assert!("gridworld".parse::<EnvKind>().is_err());
}

#[test]
fn committed_demos_regenerate() {
    let cfg = LabConfig::default();
    let taxi = record_scripted(EnvKind::Taxi, &cfg.courier, 11).unwrap();
    assert_eq!(taxi, fs::read_to_string(data("demos/taxi_human.demo")).unwrap());
    let courier = record_scripted(EnvKind::Courier, &cfg.courier, 3).unwrap();
    assert_eq!(courier, fs::read_to_string(data("demos/courier_human.demo")).unwrap());
}

#[test]
fn policy_demonstrations_from_a_trained_learner() {
    let teacher = demos::train_teacher(demos::TEACHER_ACTIONS, demos::TEACHER_SEED);
    let runs = demos::teacher_demonstrations(&teacher, 5, demos::DEMO_SEED_BASE);
    for (seed, pairs) in &runs {
        let text = demos::record_teacher_demo(&teacher, *seed).unwrap();
        assert_eq!(text, demos::record_teacher_demo(&teacher, *seed).unwrap());
        let demo = parse_demo(&text, Some(EnvKind::Taxi)).unwrap();
        assert_eq!(rfd::demo::write_demo(EnvKind::Taxi, demo.states()), text);
        let unique: BTreeSet<String> = demo.states().iter().map(rfd::demo::format_state).collect();
        assert!((5..=20).contains(&unique.len()), "{} unique states", unique.len());
        assert_eq!(pairs.len() + 1, demo.len());
    }

    let untrained = demos::train_teacher(0, 1);
    let failing = (0..50).find(|&s| !untrained.greedy_trajectory(s).2).expect("an untrained learner fails");
    let err = demos::record_teacher_demo(&untrained, failing).unwrap_err();
    assert!(format!("{err:#}").contains("did not deliver"));
}
