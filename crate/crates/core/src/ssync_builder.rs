//! SSYNC schedules built from topological orders of the class graph, their
//! rigid replay, similarity of executions, and the search over candidate
//! orders.

use serde::{Deserialize, Serialize};

use crate::checker::{enumerate_orders, find_cycle, find_natural_sort, ConcurrencyAnalysis, NaturalSort, Search};
use crate::engine::{simulate, Adversary, Controller, Decision, LookContext, PlannedRoute, Scenario, Trace};
use crate::error::{invalid, Result};
use crate::geometry::{Point, Route, EPS};
use crate::algorithms::same_point_set;
use crate::scheduling::{Cycle, CycleId, Schedule};

pub const PLAN_SCHEMA: u32 = 1;

/// Round `k` activates the robots of the `k`-th class in `order` with the
/// cycle `(k, k+1/4, k+3/4)`; each activation moves straight to the source
/// trace's arrival point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SsyncPlan {
    pub schema: u32,
    pub order: Vec<usize>,
    pub schedule: Schedule,
    /// `targets[robot][j - 1]`.
    pub targets: Vec<Vec<Point>>,
}

pub fn build_plan(trace: &Trace, analysis: &ConcurrencyAnalysis, order: &[usize]) -> Result<SsyncPlan> {
    let m = analysis.classes.len();
    let mut seen = vec![false; m];
    for &k in order {
        if k >= m || std::mem::replace(&mut seen[k], true) {
            return invalid(format!("order {order:?} is not a permutation of {m} classes"));
        }
    }
    if seen.contains(&false) {
        return invalid(format!("order covers {} of {m} classes", order.len()));
    }
    let n = trace.num_robots();
    let mut robots: Vec<Vec<Cycle>> = vec![Vec::new(); n];
    for (round, &k) in order.iter().enumerate() {
        let t = round as f64;
        for id in &analysis.classes[k] {
            let cs = &mut robots[id.robot];
            if cs.len() + 1 != id.j {
                return invalid(format!(
                    "class {k} puts {id} in round {round}, out of order for robot {}",
                    id.robot
                ));
            }
            cs.push(Cycle {
                robot: id.robot,
                j: id.j,
                o: t,
                s: t + 0.25,
                f: t + 0.75,
            });
        }
    }
    let schedule = Schedule::new(order.len() as f64, robots)?;
    let targets = trace
        .records
        .iter()
        .map(|rs| rs.iter().map(|r| r.pos_after_move).collect())
        .collect();
    Ok(SsyncPlan {
        schema: PLAN_SCHEMA,
        order: order.to_vec(),
        schedule,
        targets,
    })
}

struct TargetController<'a> {
    targets: &'a [Vec<Point>],
}

impl Controller for TargetController<'_> {
    fn decide(&mut self, ctx: &LookContext<'_>) -> Result<Decision> {
        let c = ctx.cycle;
        let target = self.targets[c.robot][c.j - 1];
        let route = if target == ctx.position {
            Route::stay(target)
        } else {
            Route::segment(ctx.position, target)?
        };
        Ok(Decision {
            route: PlannedRoute::Global(route),
            color: None,
            accepted: None,
        })
    }
}

/// Rigid replay of a plan from the scenario's initial configuration.
pub fn replay_plan(scenario: &Scenario, plan: &SsyncPlan) -> Result<Trace> {
    if plan.targets.len() != scenario.num_robots() {
        return invalid("plan and scenario disagree on the number of robots");
    }
    let mut ctl = TargetController { targets: &plan.targets };
    simulate(scenario, &plan.schedule, &mut ctl, &Adversary::rigid(0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub cycle: CycleId,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Similarity {
    pub similar: bool,
    pub first_divergence: Option<Divergence>,
}

/// Cycle-by-cycle equality of Look positions and local snapshots.
pub fn similar(source: &Trace, replayed: &Trace) -> Result<Similarity> {
    if source.num_robots() != replayed.num_robots() {
        return invalid(format!(
            "traces have {} and {} robots",
            source.num_robots(),
            replayed.num_robots()
        ));
    }
    let diverge = |cycle, reason: &str| {
        Ok(Similarity {
            similar: false,
            first_divergence: Some(Divergence {
                cycle,
                reason: reason.to_string(),
            }),
        })
    };
    for (i, (a, b)) in source.records.iter().zip(&replayed.records).enumerate() {
        for (x, y) in a.iter().zip(b) {
            if !x.pos_at_look.approx_eq(&y.pos_at_look, EPS) {
                return diverge(x.id(), "look positions differ");
            }
            if !same_point_set(&x.snapshot_local, &y.snapshot_local, EPS) {
                return diverge(x.id(), "snapshots differ");
            }
        }
        if a.len() != b.len() {
            let j = a.len().min(b.len()) + 1;
            return diverge(CycleId::new(i, j), "cycle counts differ");
        }
    }
    Ok(Similarity {
        similar: true,
        first_divergence: None,
    })
}

/// Build, replay and compare; replay errors count as a mismatch.
pub fn try_order(trace: &Trace, analysis: &ConcurrencyAnalysis, order: &[usize]) -> Option<(SsyncPlan, Trace)> {
    let plan = build_plan(trace, analysis, order).ok()?;
    let replay = replay_plan(&trace.scenario, &plan).ok()?;
    match similar(trace, &replay) {
        Ok(s) if s.similar => Some((plan, replay)),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CandidateOutcome {
    SimilarSsyncFound { order: Vec<usize> },
    /// No topological order of the class graph replays similarly; this is a
    /// bounded search, not a proof that no similar SSYNC execution exists.
    NoneAmongCandidates,
    Inconclusive,
}

/// Tries the natural order first, then every topological order within
/// `budget` search nodes.
pub fn candidate_search(trace: &Trace, budget: u64) -> CandidateOutcome {
    let analysis = ConcurrencyAnalysis::new(trace);
    let succ = analysis.successors(true);
    if find_cycle(&succ).is_some() {
        return CandidateOutcome::NoneAmongCandidates;
    }
    if let NaturalSort::Found(order) = find_natural_sort(trace, &analysis, true, budget) {
        if try_order(trace, &analysis, &order).is_some() {
            return CandidateOutcome::SimilarSsyncFound { order };
        }
    }
    let mut found = None;
    let r = enumerate_orders(&succ, budget, &mut |_, _| true, &mut |order| {
        if try_order(trace, &analysis, order).is_some() {
            found = Some(order.to_vec());
            true
        } else {
            false
        }
    });
    match r {
        Search::Stopped => CandidateOutcome::SimilarSsyncFound { order: found.unwrap() },
        Search::Exhausted => CandidateOutcome::NoneAmongCandidates,
        Search::OverBudget => CandidateOutcome::Inconclusive,
    }
}
