//! Luminous layer: light colors, the five-color synchronizer FSM, the greedy
//! synchronizer, and extraction of the accepted (core) execution.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algorithms::AlgorithmSpec;
use crate::engine::{simulate, Adversary, Controller, Decision, LookContext, Scenario, Trace};
use crate::error::{Error, Result};
use crate::geometry::{squared_distance, Point, Route};
use crate::scheduling::{Cycle, Schedule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SyncColor {
    Bk,
    R,
    B,
    G,
    W,
}

impl SyncColor {
    pub const ALL: [SyncColor; 5] = [SyncColor::Bk, SyncColor::R, SyncColor::B, SyncColor::G, SyncColor::W];

    fn bit(self) -> u8 {
        1 << self as u8
    }
}

impl fmt::Display for SyncColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A set of colors (the FSM consumes visible colors as a set).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct ColorSet(u8);

impl ColorSet {
    pub const EMPTY: ColorSet = ColorSet(0);

    pub fn of(colors: &[SyncColor]) -> Self {
        colors.iter().copied().collect()
    }

    /// Subset with the given bit pattern over `SyncColor::ALL` (0..32).
    pub fn from_bits(bits: u8) -> Self {
        ColorSet(bits & 0x1f)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, c: SyncColor) -> bool {
        self.0 & c.bit() != 0
    }

    pub fn is_subset_of(self, allowed: &[SyncColor]) -> bool {
        self.0 & !ColorSet::of(allowed).0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = SyncColor> {
        SyncColor::ALL.into_iter().filter(move |c| self.contains(*c))
    }
}

impl FromIterator<SyncColor> for ColorSet {
    fn from_iter<I: IntoIterator<Item = SyncColor>>(it: I) -> Self {
        ColorSet(it.into_iter().fold(0, |m, c| m | c.bit()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Accept,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FsmVerdict {
    pub next: SyncColor,
    pub output: Output,
}

impl FsmVerdict {
    fn reject(next: SyncColor) -> Self {
        FsmVerdict {
            next,
            output: Output::Reject,
        }
    }
}

/// One step of the five-color synchronizer. `input` holds the colors of the
/// other visible robots. States with no applicable row hold and reject.
pub fn svp_step(state: SyncColor, input: ColorSet) -> FsmVerdict {
    use SyncColor::*;
    match state {
        Bk if input.is_subset_of(&[Bk, B, W]) => FsmVerdict {
            next: R,
            output: Output::Accept,
        },
        Bk if input.contains(R) && input.is_subset_of(&[Bk, R, B, W]) => FsmVerdict::reject(W),
        R if input.is_subset_of(&[R, B, W]) => FsmVerdict::reject(B),
        B if input.is_subset_of(&[B, G]) => FsmVerdict::reject(G),
        G if input.is_subset_of(&[Bk, G]) => FsmVerdict::reject(Bk),
        W if input.is_subset_of(&[B, W]) => FsmVerdict::reject(Bk),
        _ => FsmVerdict::reject(state),
    }
}

/// Accepts exactly when every visible light (own included) is black. The
/// light stays red through the accepted Move and returns to black at the
/// robot's next Compute.
pub fn greedy_step(state: SyncColor, input: ColorSet) -> FsmVerdict {
    use SyncColor::*;
    if state == Bk && input.is_subset_of(&[Bk]) {
        FsmVerdict {
            next: R,
            output: Output::Accept,
        }
    } else {
        FsmVerdict::reject(Bk)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Machine {
    Svp,
    Greedy,
}

impl Machine {
    pub fn step(self, state: SyncColor, input: ColorSet) -> FsmVerdict {
        match self {
            Machine::Svp => svp_step(state, input),
            Machine::Greedy => greedy_step(state, input),
        }
    }
}

impl std::str::FromStr for Machine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "svp" => Ok(Machine::Svp),
            "greedy" => Ok(Machine::Greedy),
            other => Err(Error::InvalidInput(format!("unknown machine '{other}'"))),
        }
    }
}

/// Wraps an algorithm with a color-based synchronizer.
pub struct SynchronizedController {
    machine: Machine,
    algorithm: AlgorithmSpec,
}

impl SynchronizedController {
    pub fn new(machine: Machine, algorithm: AlgorithmSpec) -> Self {
        SynchronizedController { machine, algorithm }
    }
}

impl Controller for SynchronizedController {
    fn luminous(&self) -> bool {
        true
    }

    fn decide(&mut self, ctx: &LookContext<'_>) -> Result<Decision> {
        let colors = ctx.colors.unwrap_or(&[]);
        let input: ColorSet = ctx
            .snapshot
            .iter()
            .zip(colors)
            .filter(|(p, _)| **p != Point::ORIGIN)
            .map(|(_, c)| *c)
            .collect();
        let v = self.machine.step(ctx.own_color, input);
        let accepted = v.output == Output::Accept;
        let route = if accepted {
            self.algorithm.compute(ctx.snapshot)?
        } else {
            Route::stay(Point::ORIGIN)
        };
        Ok(Decision {
            color: Some(v.next),
            accepted: Some(accepted),
            ..Decision::local(route)
        })
    }
}

/// Runs `algorithm` under a synchronizer; every light starts black.
pub fn run_synchronized(
    scenario: &Scenario,
    algorithm: &AlgorithmSpec,
    schedule: &Schedule,
    adversary: &Adversary,
    machine: Machine,
) -> Result<Trace> {
    algorithm.validate()?;
    let mut ctl = SynchronizedController::new(machine, algorithm.clone());
    simulate(scenario, schedule, &mut ctl, adversary)
}

/// The accepted cycles, re-indexed per robot, and the colorless execution
/// they form.
pub fn extract_core(trace: &Trace) -> Result<(Schedule, Trace)> {
    let mut records = Vec::with_capacity(trace.num_robots());
    let mut footprints = Vec::with_capacity(trace.num_robots());
    for recs in &trace.records {
        let mut kept = Vec::new();
        for r in recs {
            if r.accepted == Some(true) {
                let mut c = r.clone();
                c.cycle.j = kept.len() + 1;
                c.snapshot_colors = None;
                c.color_before = None;
                c.color_after = None;
                c.accepted = None;
                kept.push(c);
            } else if r.moved() {
                return Err(Error::InvalidInput(format!(
                    "rejected cycle {} moved its robot",
                    r.id()
                )));
            }
        }
        footprints.push(kept.iter().map(|r| r.pos_at_look).collect());
        records.push(kept);
    }
    let cycles: Vec<Vec<Cycle>> = records
        .iter()
        .map(|rs: &Vec<crate::engine::CycleRecord>| rs.iter().map(|r| r.cycle).collect())
        .collect();
    let schedule = Schedule::new(trace.schedule.horizon(), cycles)?;
    let core = Trace {
        schema: trace.schema,
        scenario: trace.scenario.clone(),
        schedule: schedule.clone(),
        records,
        footprints,
    };
    Ok((schedule, core))
}

/// Number of accepted cycles per robot.
pub fn acceptance_counts(trace: &Trace) -> Vec<usize> {
    trace
        .records
        .iter()
        .map(|rs| rs.iter().filter(|r| r.accepted == Some(true)).count())
        .collect()
}

/// Light changes that the five-color machine cannot produce.
pub fn illegal_color_transitions(trace: &Trace) -> Vec<String> {
    use SyncColor::*;
    let legal = [(Bk, R), (Bk, W), (W, Bk), (R, B), (B, G), (G, Bk)];
    let mut out = Vec::new();
    for r in trace.all_records() {
        if let (Some(a), Some(b)) = (r.color_before, r.color_after) {
            if a != b && !legal.contains(&(a, b)) {
                out.push(format!("{}: {a} -> {b}", r.id()));
            }
            if (r.accepted == Some(true)) != (a == Bk && b == R) {
                out.push(format!("{}: acceptance does not coincide with Bk -> R", r.id()));
            }
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Virtual {
    Y,
    B,
    G,
}

fn virtual_state(c: SyncColor) -> Virtual {
    match c {
        SyncColor::B => Virtual::B,
        SyncColor::G => Virtual::G,
        _ => Virtual::Y,
    }
}

/// Number of Y -> B -> G -> Y phase changes of `robot`'s light visible at `t`.
fn phase_at(trace: &Trace, robot: usize, t: f64) -> usize {
    let mut cur = Virtual::Y;
    let mut count = 0;
    for r in trace.records[robot].iter().take_while(|r| r.cycle.s <= t) {
        if let Some(c) = r.color_after {
            let v = virtual_state(c);
            if v != cur {
                count += 1;
                cur = v;
            }
        }
    }
    count
}

/// Looks at which an initial neighbour's phase differs from the observer's
/// by more than one.
pub fn phase_lag_violations(trace: &Trace) -> Vec<String> {
    let init = trace.scenario.positions();
    let mut out = Vec::new();
    for r in trace.all_records() {
        let i = r.cycle.robot;
        let t = r.cycle.o;
        let mine = phase_at(trace, i, t);
        for k in 0..trace.num_robots() {
            if k == i || squared_distance(init[i], init[k]) > 1.0 {
                continue;
            }
            let theirs = phase_at(trace, k, t);
            if mine.abs_diff(theirs) > 1 {
                out.push(format!("{} at t={t}: phase {mine} vs robot {k} phase {theirs}", r.id()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::verify_trace;
    use crate::scheduling::make_fsync_schedule;
    use SyncColor::*;

    #[test]
    fn table_rows() {
        assert_eq!(svp_step(Bk, ColorSet::of(&[Bk, B])), FsmVerdict { next: R, output: Output::Accept });
        assert_eq!(svp_step(Bk, ColorSet::of(&[R, W])), FsmVerdict::reject(W));
        assert_eq!(svp_step(Bk, ColorSet::EMPTY), FsmVerdict { next: R, output: Output::Accept });
        assert_eq!(svp_step(R, ColorSet::of(&[Bk, B])), FsmVerdict::reject(R));
        assert_eq!(svp_step(R, ColorSet::of(&[B, W])), FsmVerdict::reject(B));
        assert_eq!(svp_step(B, ColorSet::of(&[G])), FsmVerdict::reject(G));
        assert_eq!(svp_step(G, ColorSet::of(&[Bk])), FsmVerdict::reject(Bk));
        assert_eq!(svp_step(W, ColorSet::of(&[B])), FsmVerdict::reject(Bk));
        assert_eq!(svp_step(W, ColorSet::of(&[Bk])), FsmVerdict::reject(W));
        assert_eq!(svp_step(Bk, ColorSet::of(&[G])), FsmVerdict::reject(Bk));
    }

    #[test]
    fn greedy_rows() {
        assert_eq!(greedy_step(Bk, ColorSet::of(&[Bk, Bk])).output, Output::Accept);
        assert_eq!(greedy_step(Bk, ColorSet::of(&[R])).output, Output::Reject);
        assert_eq!(greedy_step(Bk, ColorSet::EMPTY).output, Output::Accept);
        assert_eq!(greedy_step(R, ColorSet::EMPTY), FsmVerdict::reject(Bk));
    }

    #[test]
    fn color_set_basics() {
        let s = ColorSet::of(&[R, W, R]);
        assert!(s.contains(R) && s.contains(W) && !s.contains(Bk));
        assert!(s.is_subset_of(&[R, W, B]));
        assert!(!s.is_subset_of(&[R]));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![R, W]);
        assert!(ColorSet::EMPTY.is_subset_of(&[]));
    }

    fn single_robot_run(rounds: usize) -> Trace {
        let sc = Scenario::simple(vec![Point::new(0.0, 0.0)]).unwrap();
        run_synchronized(
            &sc,
            &AlgorithmSpec::Halt,
            &make_fsync_schedule(rounds, 1),
            &Adversary::rigid(0),
            Machine::Svp,
        )
        .unwrap()
    }

    #[test]
    fn lone_robot_cycles_through_colors() {
        let tr = single_robot_run(9);
        let colors: Vec<SyncColor> = tr.records[0].iter().map(|r| r.color_before.unwrap()).collect();
        assert_eq!(colors, vec![Bk, R, B, G, Bk, R, B, G, Bk]);
        let accepted: Vec<bool> = tr.records[0].iter().map(|r| r.accepted.unwrap()).collect();
        assert_eq!(
            accepted,
            vec![true, false, false, false, true, false, false, false, true]
        );
        verify_trace(&tr).unwrap();
        assert!(illegal_color_transitions(&tr).is_empty());
    }

    #[test]
    fn core_of_lone_robot() {
        let tr = single_robot_run(8);
        let (lambda, core) = extract_core(&tr).unwrap();
        assert_eq!(lambda.num_cycles(), 2);
        let looks: Vec<f64> = lambda.robot(0).iter().map(|c| c.o).collect();
        assert_eq!(looks, vec![0.0, 4.0]);
        assert_eq!(core.records[0][1].cycle.j, 2);
        assert!(!core.is_luminous());
        verify_trace(&core).unwrap();
    }

    #[test]
    fn all_rejected_core_is_empty() {
        let sc = Scenario::simple(vec![Point::new(0.0, 0.0), Point::new(0.5, 0.0)]).unwrap();
        // W never sees only B/W while the neighbour stays Bk: nobody can pass
        // R -> B either, so build a run where every cycle rejects by starting
        // both robots' first cycles after a red light appears.
        let tr = run_synchronized(
            &sc,
            &AlgorithmSpec::Halt,
            &Schedule::empty(2),
            &Adversary::rigid(0),
            Machine::Svp,
        )
        .unwrap();
        let (lambda, core) = extract_core(&tr).unwrap();
        assert_eq!(lambda.num_cycles(), 0);
        assert_eq!(core.final_position(1), Point::new(0.5, 0.0));
    }

    #[test]
    fn only_accepted_cycles_move() {
        let sc = Scenario::simple(vec![Point::new(0.0, 0.0), Point::new(0.6, 0.0), Point::new(0.3, 0.5)]).unwrap();
        let sched = crate::scheduling::sample_async_schedule(5, 3, 60.0, &Default::default()).unwrap();
        let tr = run_synchronized(
            &sc,
            &AlgorithmSpec::HullContraction { lambda: 0.5 },
            &sched,
            &Adversary::nonrigid(5),
            Machine::Svp,
        )
        .unwrap();
        for r in tr.all_records() {
            if r.moved() {
                assert_eq!(r.accepted, Some(true));
            }
        }
        assert!(illegal_color_transitions(&tr).is_empty());
        assert!(phase_lag_violations(&tr).is_empty());
        verify_trace(&tr).unwrap();
    }
}
