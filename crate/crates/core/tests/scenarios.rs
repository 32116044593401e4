//! End-to-end checks on the built-in scenarios.

use lcmsync::algorithms::{is_visibility_preserving_run, AlgorithmController};
use lcmsync::checker::{check_all, find_natural_sort, ConcurrencyAnalysis, NaturalSort, Status};
use lcmsync::engine::{simulate, verify_trace, Trace};
use lcmsync::geometry::{squared_distance, Point};
use lcmsync::scenarios::{builtin, template, Condition};
use lcmsync::scheduling::{make_fsync_schedule, CycleId};
use lcmsync::ssync_builder::{build_plan, candidate_search, replay_plan, similar, CandidateOutcome};
use lcmsync::synchronizer::{acceptance_counts, extract_core, run_synchronized, Machine, SyncColor};

fn plain_run(name: &str, seed: u64) -> Trace {
    let b = builtin(name).unwrap();
    let mut ctl = AlgorithmController::new(b.algorithm.clone());
    simulate(&b.scenario, b.schedule.as_ref().unwrap(), &mut ctl, &b.adversary(seed)).unwrap()
}

fn counterexample_run(machine: Machine) -> Trace {
    let b = builtin("greedy-lemma").unwrap();
    run_synchronized(&b.scenario, &b.algorithm, b.schedule.as_ref().unwrap(), &b.adversary(0), machine).unwrap()
}

#[test]
fn counterexample_timeline_under_greedy() {
    let tr = counterexample_run(Machine::Greedy);
    verify_trace(&tr).unwrap();
    let accepted: Vec<Option<bool>> = tr.records.iter().map(|r| r[0].accepted).collect();
    assert_eq!(accepted, vec![Some(true), Some(true), Some(true), Some(true), Some(false)]);
    assert_eq!(tr.position_at(0, 1.5).unwrap(), Point::new(0.0, 0.75));
    let d2 = squared_distance(tr.position_at(0, 1.5).unwrap(), tr.position_at(3, 1.5).unwrap());
    assert!((d2 - 25.0 / 16.0).abs() < 1e-12);
    assert!(tr.records[0][0].sees(3));
    assert!(!tr.records[3][0].sees(0));
    assert_eq!(tr.color_at(4, 3.0), SyncColor::Bk);

    let pres = is_visibility_preserving_run(&tr);
    assert!(!pres.visibility_preserving.pass);

    let (_, core) = extract_core(&tr).unwrap();
    assert_eq!(core.num_cycles(), 4);
    let r = check_all(&core);
    assert_eq!(r.consistent.status, Status::Fail);
    assert_eq!(r.consistent.witnesses[0].cycles, vec![CycleId::new(0, 1), CycleId::new(3, 1)]);
}

#[test]
fn counterexample_plan_forced_through_diverges() {
    let (_, core) = extract_core(&counterexample_run(Machine::Greedy)).unwrap();
    let a = ConcurrencyAnalysis::new(&core);
    // classes in first-Look order form a valid schedule shape
    let order: Vec<usize> = (0..a.classes.len()).collect();
    let plan = build_plan(&core, &a, &order).unwrap();
    let replay = replay_plan(&core.scenario, &plan).unwrap();
    let s = similar(&core, &replay).unwrap();
    assert!(!s.similar, "{s:?}");
}

#[test]
fn svp_on_the_counterexample_timeline() {
    let tr = counterexample_run(Machine::Svp);
    let accepted: Vec<Option<bool>> = tr.records.iter().map(|r| r[0].accepted).collect();
    assert_eq!(accepted, vec![Some(true), Some(true), Some(true), Some(true), Some(false)]);
}

#[test]
fn lone_robot_svp_period() {
    let b = builtin("control").unwrap();
    let sc = lcmsync::engine::Scenario::simple(vec![Point::new(0.0, 0.0)]).unwrap();
    let tr = run_synchronized(&sc, &b.algorithm, &make_fsync_schedule(9, 1), &b.adversary(0), Machine::Svp).unwrap();
    let accepted: Vec<bool> = tr.records[0].iter().map(|r| r.accepted.unwrap()).collect();
    assert_eq!(accepted, vec![true, false, false, false, true, false, false, false, true]);
    assert_eq!(acceptance_counts(&tr), vec![3]);
    let (sched, core) = extract_core(&tr).unwrap();
    assert_eq!(sched.num_cycles(), 3);
    assert!(check_all(&core).all_pass());
}

#[test]
fn control_arm_never_materializes() {
    for seed in 0..20 {
        let tr = plain_run("control", seed);
        let r = check_all(&tr);
        assert!(r.all_pass(), "seed {seed}: {r:?}");
        assert!(matches!(candidate_search(&tr, 10_000), CandidateOutcome::SimilarSsyncFound { .. }));
    }
}

#[test]
fn serializability_template_has_cyclic_class_graph() {
    let tr = plain_run("serializability", 0);
    let r = check_all(&tr);
    assert_eq!(r.serializable.status, Status::Fail);
    assert_eq!(r.serializable.witnesses[0].cycles.len(), 2);
    assert_eq!(candidate_search(&tr, 10_000), CandidateOutcome::NoneAmongCandidates);
}

#[test]
fn naturality_template_breaks_only_naturality() {
    let t = template(Condition::Natural);
    let mut seen = 0;
    for seed in 0..200 {
        let mut ctl = AlgorithmController::new(t.algorithm.clone());
        let tr = simulate(&t.scenario, t.schedule.as_ref().unwrap(), &mut ctl, &t.adversary(seed)).unwrap();
        let r = check_all(&tr);
        if r.natural.status != Status::Fail {
            continue;
        }
        seen += 1;
        assert!(r.stationary.passed() && r.pairwise_aligned.passed());
        assert!(r.consistent.passed() && r.serializable.passed());
        let a = ConcurrencyAnalysis::new(&tr);
        assert!(matches!(find_natural_sort(&tr, &a, true, 10_000), NaturalSort::NoneExists(_)));
        assert_eq!(candidate_search(&tr, 10_000), CandidateOutcome::NoneAmongCandidates);
    }
    assert!(seen > 0);
}

/// r1 always moves at least delta = 1/4 up, so r4 at (1,0) never sees it.
#[test]
fn consistency_template_always_materializes() {
    for seed in 0..100 {
        let tr = plain_run("consistency", seed);
        let r = check_all(&tr);
        assert_eq!(r.consistent.status, Status::Fail, "seed {seed}");
        assert_eq!(r.consistent.witnesses[0].cycles, vec![CycleId::new(0, 1), CycleId::new(3, 1)]);
    }
}
