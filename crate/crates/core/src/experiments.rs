//! Reproductions of the greedy and color-based counterexamples, the
//! synchronizer end-to-end run on random vicinity scenarios, and the Monte
//! Carlo necessity sweeps.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{is_visibility_preserving_run, AlgorithmController};
use crate::checker::{check_all, check_all_with_budget, ConditionReport, Status, Witness};
use crate::engine::{simulate, Adversary, Trace};
use crate::error::{invalid, Result};
use crate::geometry::{squared_distance, EPS};
use crate::scenarios::{builtin, random_vicinity_scenario, Bundle, Condition};
use crate::scheduling::{check_fairness_prefix, sample_async_schedule, AsyncParams, Cycle, CycleId, Schedule};
use crate::ssync_builder::{build_plan, candidate_search, replay_plan, similar, CandidateOutcome, Divergence};
use crate::checker::ConcurrencyAnalysis;
use crate::synchronizer::{
    acceptance_counts, extract_core, illegal_color_transitions, phase_lag_violations, run_synchronized, Machine,
};

pub const EXPERIMENT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &str, pass: bool, detail: impl Into<String>) -> ReproCheck {
    ReproCheck {
        name: name.to_string(),
        pass,
        detail: detail.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReproReport {
    pub schema: u32,
    pub name: String,
    pub machine: Machine,
    pub pass: bool,
    /// First all-accept round of the fully synchronous warm-up.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j0: Option<usize>,
    pub checks: Vec<ReproCheck>,
    pub witness: Option<Witness>,
}

/// Checks shared by both reproductions on a luminous run whose spliced
/// cycles are `r0..r4` cycle `j0`.
fn timeline_checks(trace: &Trace, j0: usize, shift: f64) -> (Vec<ReproCheck>, Option<Witness>) {
    let mut checks = Vec::new();
    let accepted = |r: usize| trace.records[r].get(j0 - 1).and_then(|c| c.accepted) == Some(true);
    for r in 0..4 {
        checks.push(check(
            &format!("r{}#{j0} accepted", r),
            accepted(r),
            match trace.records[r].get(j0 - 1).and_then(|c| c.accepted) {
                Some(a) => format!("accepted = {a}"),
                None => "no decision".to_string(),
            },
        ));
    }
    checks.push(check(&format!("r4#{j0} rejected"), !accepted(4), "sees a moved light"));

    let t = shift + 1.5;
    match (trace.position_at(0, t), trace.position_at(3, t)) {
        (Ok(a), Ok(b)) => {
            let d2 = squared_distance(a, b);
            checks.push(check(
                "squared distance r0-r3 at the r3 look is 25/16",
                (d2 - 25.0 / 16.0).abs() <= EPS && d2 > 1.0,
                format!("{d2}"),
            ));
        }
        (a, b) => checks.push(check("positions at the r3 look", false, format!("{a:?} {b:?}"))),
    }
    let r3_sees_r0 = trace.records[3].get(j0 - 1).is_some_and(|c| c.sees(0));
    checks.push(check("r3 does not see r0", !r3_sees_r0, ""));

    let witness = match extract_core(trace) {
        Ok((_, core)) => {
            let report = check_all(&core);
            let w = report.consistent.witnesses.first().cloned();
            let expected = vec![CycleId::new(0, 1), CycleId::new(3, 1)];
            let ok = report.consistent.status == Status::Fail
                && w.as_ref()
                    .is_some_and(|w| w.cycles == expected && w.clause.starts_with('1'));
            checks.push(check(
                "core is inconsistent with witness (r0#1, r3#1), clause 1",
                ok,
                format!("{:?}", report.consistent),
            ));
            w
        }
        Err(e) => {
            checks.push(check("core extraction", false, e.to_string()));
            None
        }
    };
    (checks, witness)
}

/// Runs the five-robot counterexample under the greedy synchronizer.
pub fn repro_greedy_lemma() -> Result<(ReproReport, Trace)> {
    let b = builtin("greedy-lemma")?;
    let sched = b.schedule.clone().expect("bundle has a schedule");
    let trace = run_synchronized(&b.scenario, &b.algorithm, &sched, &b.adversary(0), Machine::Greedy)?;
    let (checks, witness) = timeline_checks(&trace, 1, 0.0);
    let report = ReproReport {
        schema: EXPERIMENT_SCHEMA,
        name: "greedy-lemma".into(),
        machine: Machine::Greedy,
        pass: checks.iter().all(|c| c.pass),
        j0: None,
        checks,
        witness,
    };
    Ok((report, trace))
}

const WARMUP_ROUNDS: usize = 64;

/// Warms up under FSYNC until every robot accepts in the same round `j0`,
/// then replaces round `j0` with the counterexample timeline.
pub fn repro_colorbased(machine: Machine) -> Result<(ReproReport, Trace)> {
    let b = builtin("greedy-lemma")?;
    let n = b.scenario.num_robots();
    let fsync = crate::scheduling::make_fsync_schedule(WARMUP_ROUNDS, n);
    let warm = run_synchronized(&b.scenario, &b.algorithm, &fsync, &b.adversary(0), machine)?;
    let Some(j0) = (1..=WARMUP_ROUNDS).find(|&j| (0..n).all(|r| warm.records[r][j - 1].accepted == Some(true)))
    else {
        return invalid(format!("no all-accept round within {WARMUP_ROUNDS} synchronous rounds"));
    };
    let shift = (j0 - 1) as f64;
    let timeline = b.schedule.as_ref().expect("bundle has a schedule");
    let robots: Vec<Vec<Cycle>> = (0..n)
        .map(|r| {
            let mut cs: Vec<Cycle> = fsync.robot(r)[..j0 - 1].to_vec();
            let c = timeline.robot(r)[0];
            cs.push(Cycle {
                robot: r,
                j: j0,
                o: c.o + shift,
                s: c.s + shift,
                f: c.f + shift,
            });
            cs
        })
        .collect();
    let sched = Schedule::new(shift + timeline.horizon(), robots)?;
    let trace = run_synchronized(&b.scenario, &b.algorithm, &sched, &b.adversary(0), machine)?;
    let (mut checks, witness) = timeline_checks(&trace, j0, shift);
    let first = (0..n).all(|r| trace.records[r][..j0 - 1].iter().all(|c| c.accepted == Some(false)));
    checks.insert(0, check("no acceptance before j0", first, format!("j0 = {j0}")));
    let report = ReproReport {
        schema: EXPERIMENT_SCHEMA,
        name: "colorbased-theorem".into(),
        machine,
        pass: checks.iter().all(|c| c.pass),
        j0: Some(j0),
        checks,
        witness,
    };
    Ok((report, trace))
}

/// One synchronizer run on a random vicinity scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VicinityRun {
    pub seed: u64,
    pub robots: usize,
    pub lambda: f64,
    pub cycles: usize,
    pub core_cycles: usize,
    pub accepted: Vec<usize>,
    pub accepted_doubled: Vec<usize>,
    pub fair_schedule: bool,
    pub all_pass: bool,
    pub first_failure: Option<String>,
    pub similar: bool,
    pub divergence: Option<Divergence>,
    pub vicinity_preserving: bool,
    pub phase_lag_violations: usize,
    pub illegal_transitions: usize,
}

pub fn vicinity_run(seed: u64, horizon: f64) -> Result<VicinityRun> {
    let (sc, spec) = random_vicinity_scenario(seed);
    let n = sc.num_robots();
    let params = AsyncParams::default();
    let adversary = Adversary::nonrigid(seed);
    let run = |h: f64| -> Result<(Schedule, Trace)> {
        let sched = sample_async_schedule(seed, n, h, &params)?;
        let trace = run_synchronized(&sc, &spec, &sched, &adversary, Machine::Svp)?;
        Ok((sched, trace))
    };
    let (sched, trace) = run(horizon)?;
    let (_, doubled) = run(2.0 * horizon)?;
    let (_, core) = extract_core(&trace)?;
    let analysis = ConcurrencyAnalysis::new(&core);
    let report: ConditionReport = crate::checker::check_all_with_analysis(&core, &analysis, crate::checker::DEFAULT_BUDGET);
    let (is_similar, divergence) = match &report.natural_order {
        Some(order) if report.all_pass() => {
            let plan = build_plan(&core, &analysis, order)?;
            let replay = replay_plan(&sc, &plan)?;
            let s = similar(&core, &replay)?;
            (s.similar, s.first_divergence)
        }
        _ => (false, None),
    };
    let lambda = match spec {
        crate::algorithms::AlgorithmSpec::HullContraction { lambda } => lambda,
        _ => 0.0,
    };
    Ok(VicinityRun {
        seed,
        robots: n,
        lambda,
        cycles: trace.num_cycles(),
        core_cycles: core.num_cycles(),
        accepted: acceptance_counts(&trace),
        accepted_doubled: acceptance_counts(&doubled),
        fair_schedule: check_fairness_prefix(&sched, params.fairness_window())?.into_iter().all(|b| b),
        all_pass: report.all_pass(),
        first_failure: report.first_failure().map(|(name, r)| format!("{name}: {:?}", r.witnesses.first())),
        similar: is_similar,
        divergence,
        vicinity_preserving: is_visibility_preserving_run(&trace).vicinity_preserving.pass,
        phase_lag_violations: phase_lag_violations(&trace).len(),
        illegal_transitions: illegal_color_transitions(&trace).len(),
    })
}

/// Runs over several seeds in parallel; results are in seed order.
pub fn vicinity_sweep(seeds: &[u64], horizon: f64) -> Vec<Result<VicinityRun>> {
    seeds.par_iter().map(|&s| vicinity_run(s, horizon)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessitySample {
    pub seed: u64,
    pub materialized: bool,
    pub all_pass: bool,
    pub outcome: Option<CandidateOutcome>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NecessityReport {
    pub schema: u32,
    pub template: String,
    pub condition: Condition,
    pub samples: usize,
    pub errors: usize,
    pub materialized: usize,
    pub found_when_materialized: usize,
    pub none_when_materialized: usize,
    pub inconclusive_when_materialized: usize,
    pub found_otherwise: usize,
    pub all_pass_otherwise: usize,
    /// `found_when_materialized / materialized`; a bounded search over
    /// candidate orders, not a proof of nonexistence.
    pub found_rate: Option<f64>,
}

pub fn necessity_sample(bundle: &Bundle, condition: Condition, seed: u64, budget: u64) -> NecessitySample {
    let sched = bundle.schedule.as_ref().expect("templates carry a schedule");
    let mut ctl = AlgorithmController::new(bundle.algorithm.clone());
    let trace = match simulate(&bundle.scenario, sched, &mut ctl, &bundle.adversary(seed)) {
        Ok(t) => t,
        Err(e) => {
            return NecessitySample {
                seed,
                materialized: false,
                all_pass: false,
                outcome: None,
                error: Some(e.to_string()),
            }
        }
    };
    let report = check_all_with_budget(&trace, budget);
    let status = match condition {
        Condition::Stationary => report.stationary.status,
        Condition::PairwiseAligned => report.pairwise_aligned.status,
        Condition::Consistent => report.consistent.status,
        Condition::Serializable => report.serializable.status,
        Condition::Natural => report.natural.status,
    };
    NecessitySample {
        seed,
        materialized: status == Status::Fail,
        all_pass: report.all_pass(),
        outcome: Some(candidate_search(&trace, budget)),
        error: None,
    }
}

/// Monte Carlo sweep of a template over `seeds`.
pub fn necessity(template: &str, seeds: &[u64], budget: u64) -> Result<(NecessityReport, Vec<NecessitySample>)> {
    if seeds.is_empty() {
        return invalid("necessity needs at least one seed");
    }
    let bundle = builtin(template)?;
    let Some(condition) = bundle.condition else {
        return invalid(format!("'{template}' is not a necessity template"));
    };
    let samples: Vec<NecessitySample> = seeds
        .par_iter()
        .map(|&s| necessity_sample(&bundle, condition, s, budget))
        .collect();
    let found = |s: &NecessitySample| matches!(s.outcome, Some(CandidateOutcome::SimilarSsyncFound { .. }));
    let mat: Vec<&NecessitySample> = samples.iter().filter(|s| s.materialized).collect();
    let clean: Vec<&NecessitySample> = samples
        .iter()
        .filter(|s| !s.materialized && s.error.is_none())
        .collect();
    let found_when_materialized = mat.iter().filter(|s| found(s)).count();
    let report = NecessityReport {
        schema: EXPERIMENT_SCHEMA,
        template: template.to_string(),
        condition,
        samples: samples.len(),
        errors: samples.iter().filter(|s| s.error.is_some()).count(),
        materialized: mat.len(),
        found_when_materialized,
        none_when_materialized: mat
            .iter()
            .filter(|s| s.outcome == Some(CandidateOutcome::NoneAmongCandidates))
            .count(),
        inconclusive_when_materialized: mat
            .iter()
            .filter(|s| s.outcome == Some(CandidateOutcome::Inconclusive))
            .count(),
        found_otherwise: clean.iter().filter(|s| found(s)).count(),
        all_pass_otherwise: clean.iter().filter(|s| s.all_pass).count(),
        found_rate: (!mat.is_empty()).then(|| found_when_materialized as f64 / mat.len() as f64),
    };
    Ok((report, samples))
}
