//! Deterministic replay of a controller under a schedule and a randomized
//! adversary, producing a ground-truth trace.
//!
//! Cycles are processed in Look order (ties by robot index). A Compute only
//! depends on its Look snapshot, so the route, truncation and color of a
//! cycle are all fixed when its Look is processed. State queries at an
//! instant `t` are answered from already-processed cycles: a robot is moving
//! only on the open interval `(s, f)`, and the light set in a cycle becomes
//! visible at `s`.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{squared_distance, truncated_length, LocalFrame, Point, Route, EPS};
use crate::scheduling::{keyed_rng, Cycle, CycleId, Schedule};
use crate::synchronizer::SyncColor;

pub const TRACE_SCHEMA: u32 = 1;

const STREAM_TRUNCATION: u64 = 0x7a75_6e63;
const STREAM_OBSERVATION: u64 = 0x6f62_7376;

/// How the visibility threshold treats pairs at (numerically) unit distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Pairs within `EPS` of the threshold abort the run as degenerate.
    #[default]
    Reject,
    /// Plain closed-ball test, for hand-built configurations with exact unit distances.
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameSpec {
    #[serde(default)]
    pub rotation: f64,
    #[serde(default = "one")]
    pub unit: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for FrameSpec {
    fn default() -> Self {
        FrameSpec {
            rotation: 0.0,
            unit: 1.0,
        }
    }
}

#[derive(Deserialize)]
struct RawScenario {
    positions: Vec<Point>,
    #[serde(default)]
    frames: Vec<FrameSpec>,
    #[serde(default)]
    delta: f64,
    #[serde(default)]
    boundary: Boundary,
}

/// Initial configuration, per-robot frames and the minimum move distance.
/// The visibility radius is 1 in global units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScenario")]
pub struct Scenario {
    positions: Vec<Point>,
    frames: Vec<FrameSpec>,
    delta: f64,
    boundary: Boundary,
}

impl TryFrom<RawScenario> for Scenario {
    type Error = Error;

    fn try_from(r: RawScenario) -> Result<Self> {
        let frames = if r.frames.is_empty() {
            vec![FrameSpec::default(); r.positions.len()]
        } else {
            r.frames
        };
        Scenario::new(r.positions, frames, r.delta, r.boundary)
    }
}

impl Scenario {
    pub fn new(positions: Vec<Point>, frames: Vec<FrameSpec>, delta: f64, boundary: Boundary) -> Result<Self> {
        if frames.len() != positions.len() {
            return invalid(format!(
                "{} frames for {} robots",
                frames.len(),
                positions.len()
            ));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return invalid(format!("delta must be finite and >= 0, got {delta}"));
        }
        for f in &frames {
            LocalFrame::new(Point::ORIGIN, f.rotation, f.unit)?;
        }
        for (a, p) in positions.iter().enumerate() {
            if !p.is_finite() {
                return invalid(format!("robot {a} has a non-finite position"));
            }
            for (b, q) in positions.iter().enumerate().skip(a + 1) {
                if p == q {
                    return invalid(format!("robots {a} and {b} share initial position {p:?}"));
                }
                let d2 = squared_distance(*p, *q);
                if boundary == Boundary::Reject && (d2 - 1.0).abs() < EPS {
                    return invalid(format!(
                        "robots {a} and {b} start at the visibility threshold (squared distance {d2})"
                    ));
                }
            }
        }
        Ok(Scenario {
            positions,
            frames,
            delta,
            boundary,
        })
    }

    /// Identity frames, `delta = 0`, rejecting boundary.
    pub fn simple(positions: Vec<Point>) -> Result<Self> {
        let n = positions.len();
        Scenario::new(positions, vec![FrameSpec::default(); n], 0.0, Boundary::Reject)
    }

    pub fn num_robots(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn frames(&self) -> &[FrameSpec] {
        &self.frames
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn frame_at(&self, robot: usize, origin: Point) -> LocalFrame {
        let f = self.frames[robot];
        LocalFrame {
            origin,
            rotation: f.rotation,
            unit: f.unit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Movement {
    Rigid,
    #[default]
    NonRigid,
}

/// Source of the truncation and observation-point draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Adversary {
    pub seed: u64,
    pub mode: Movement,
}

impl Adversary {
    pub fn rigid(seed: u64) -> Self {
        Adversary {
            seed,
            mode: Movement::Rigid,
        }
    }

    pub fn nonrigid(seed: u64) -> Self {
        Adversary {
            seed,
            mode: Movement::NonRigid,
        }
    }
}

/// Truncation parameter of cycle `j` of `robot`; always 1 when rigid.
pub fn draw_truncation(adversary: &Adversary, robot: usize, j: usize) -> f64 {
    match adversary.mode {
        Movement::Rigid => 1.0,
        Movement::NonRigid => {
            keyed_rng(adversary.seed, &[STREAM_TRUNCATION, robot as u64, j as u64]).random::<f64>()
        }
    }
}

/// Arclengths at which a moving robot is seen, one per observation instant,
/// uniform on `[0, length]` and non-decreasing in time.
fn draw_observations(adversary: &Adversary, robot: usize, j: usize, length: f64, times: &[f64]) -> Vec<(f64, f64)> {
    let mut rng = keyed_rng(adversary.seed, &[STREAM_OBSERVATION, robot as u64, j as u64]);
    let mut us: Vec<f64> = times.iter().map(|_| rng.random::<f64>() * length).collect();
    us.sort_by(f64::total_cmp);
    times.iter().copied().zip(us).collect()
}

/// Everything recorded about one cycle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: Cycle,
    pub pos_at_look: Point,
    pub visible_set: Vec<usize>,
    /// Canonically ordered (by coordinates); always contains the origin.
    pub snapshot_local: Vec<Point>,
    pub route_global: Route,
    pub z: f64,
    pub pos_after_move: Point,
    /// `(time, arclength)` for every Look of another robot strictly inside `(s, f)`.
    #[serde(default)]
    pub observed_at: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_colors: Option<Vec<SyncColor>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_before: Option<SyncColor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_after: Option<SyncColor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accepted: Option<bool>,
}

impl CycleRecord {
    pub fn id(&self) -> CycleId {
        self.cycle.id()
    }

    pub fn sees(&self, robot: usize) -> bool {
        self.visible_set.binary_search(&robot).is_ok()
    }

    pub fn moved(&self) -> bool {
        self.pos_after_move != self.pos_at_look
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub schema: u32,
    pub scenario: Scenario,
    pub schedule: Schedule,
    pub records: Vec<Vec<CycleRecord>>,
    pub footprints: Vec<Vec<Point>>,
}

/// What a robot perceives at a Look.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub visible: Vec<usize>,
    pub points: Vec<Point>,
    pub colors: Option<Vec<SyncColor>>,
}

impl Trace {
    fn start(scenario: &Scenario, schedule: &Schedule) -> Trace {
        let n = scenario.num_robots();
        Trace {
            schema: TRACE_SCHEMA,
            scenario: scenario.clone(),
            schedule: schedule.clone(),
            records: vec![Vec::new(); n],
            footprints: vec![Vec::new(); n],
        }
    }

    pub fn num_robots(&self) -> usize {
        self.records.len()
    }

    pub fn record(&self, id: CycleId) -> Option<&CycleRecord> {
        self.records.get(id.robot)?.get(id.j.checked_sub(1)?)
    }

    pub fn all_records(&self) -> impl Iterator<Item = &CycleRecord> + '_ {
        self.records.iter().flatten()
    }

    pub fn num_cycles(&self) -> usize {
        self.records.iter().map(Vec::len).sum()
    }

    pub fn is_luminous(&self) -> bool {
        self.all_records().any(|r| r.accepted.is_some())
    }

    /// Position after the last recorded cycle (the initial position if none).
    pub fn final_position(&self, robot: usize) -> Point {
        self.records[robot]
            .last()
            .map_or(self.scenario.positions[robot], |r| r.pos_after_move)
    }

    /// Position of `robot` at instant `t`, from the recorded cycles. A robot
    /// is moving only on `(s, f)`, where its position must have been sampled.
    pub fn position_at(&self, robot: usize, t: f64) -> Result<Point> {
        let recs = &self.records[robot];
        let k = recs.partition_point(|r| r.cycle.s < t);
        if k > 0 {
            let r = &recs[k - 1];
            if t < r.cycle.f {
                let u = r
                    .observed_at
                    .iter()
                    .find(|(time, _)| *time == t)
                    .map(|&(_, u)| u)
                    .ok_or_else(|| {
                        Error::InvalidInput(format!(
                            "robot {robot} is moving at t={t} but no observation point was sampled"
                        ))
                    })?;
                return r.route_global.point_along(u);
            }
            return Ok(r.pos_after_move);
        }
        Ok(self.scenario.positions[robot])
    }

    /// Light of `robot` at instant `t`: set by the latest cycle with `s <= t`.
    pub fn color_at(&self, robot: usize, t: f64) -> SyncColor {
        let recs = &self.records[robot];
        let k = recs.partition_point(|r| r.cycle.s <= t);
        recs[..k]
            .iter()
            .rev()
            .find_map(|r| r.color_after)
            .unwrap_or(SyncColor::Bk)
    }

    /// The snapshot `observer` takes at `t`, recomputed from global state.
    pub fn observe(&self, observer: usize, t: f64, luminous: bool, cycle: CycleId) -> Result<Observation> {
        let here = self.position_at(observer, t)?;
        let frame = self.scenario.frame_at(observer, here);
        let mut seen: Vec<(Point, Option<SyncColor>)> = Vec::new();
        let mut visible = Vec::new();
        for r in 0..self.num_robots() {
            let color = luminous.then(|| self.color_at(r, t));
            if r == observer {
                visible.push(r);
                seen.push((Point::ORIGIN, color));
                continue;
            }
            let p = self.position_at(r, t)?;
            let d2 = squared_distance(here, p);
            if self.scenario.boundary == Boundary::Reject && (d2 - 1.0).abs() < EPS {
                return Err(Error::Degenerate {
                    a: observer,
                    b: r,
                    squared_distance: d2,
                    time: t,
                    cycle,
                });
            }
            if d2 <= 1.0 {
                visible.push(r);
                seen.push((frame.to_local(p), color));
            }
        }
        seen.sort_by(|a, b| cmp_points(&a.0, &b.0));
        let points = seen.iter().map(|(p, _)| *p).collect();
        let colors = luminous.then(|| seen.iter().map(|(_, c)| c.unwrap()).collect());
        Ok(Observation {
            visible,
            points,
            colors,
        })
    }
}

pub(crate) fn cmp_points(a: &Point, b: &Point) -> Ordering {
    a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y))
}

/// A route planned in the robot's local frame or directly in global coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum PlannedRoute {
    Local(Route),
    Global(Route),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub route: PlannedRoute,
    pub color: Option<SyncColor>,
    pub accepted: Option<bool>,
}

impl Decision {
    pub fn local(route: Route) -> Self {
        Decision {
            route: PlannedRoute::Local(route),
            color: None,
            accepted: None,
        }
    }
}

/// Input to a Compute.
#[derive(Debug)]
pub struct LookContext<'a> {
    pub cycle: &'a Cycle,
    pub position: Point,
    pub snapshot: &'a [Point],
    pub colors: Option<&'a [SyncColor]>,
    pub own_color: SyncColor,
}

/// Decides what a robot does with its snapshot.
pub trait Controller {
    fn luminous(&self) -> bool {
        false
    }

    fn decide(&mut self, ctx: &LookContext<'_>) -> Result<Decision>;
}

/// Runs `controller` under `schedule` from the scenario's initial configuration.
pub fn simulate(
    scenario: &Scenario,
    schedule: &Schedule,
    controller: &mut dyn Controller,
    adversary: &Adversary,
) -> Result<Trace> {
    let n = scenario.num_robots();
    if schedule.num_robots() != n {
        return invalid(format!(
            "schedule has {} robots, scenario has {n}",
            schedule.num_robots()
        ));
    }
    let luminous = controller.luminous();
    let mut order: Vec<&Cycle> = schedule.cycles().collect();
    order.sort_by(|a, b| a.o.total_cmp(&b.o).then(a.robot.cmp(&b.robot)));

    let mut trace = Trace::start(scenario, schedule);
    for (idx, c) in order.iter().enumerate() {
        let t = c.o;
        // no two robots may share a point at a Look instant
        let positions = (0..n)
            .map(|r| trace.position_at(r, t))
            .collect::<Result<Vec<_>>>()?;
        check_distinct(&positions, t)?;

        let obs = trace.observe(c.robot, t, luminous, c.id())?;
        let here = positions[c.robot];
        let own_color = trace.color_at(c.robot, t);
        let decision = controller.decide(&LookContext {
            cycle: c,
            position: here,
            snapshot: &obs.points,
            colors: obs.colors.as_deref(),
            own_color,
        })?;
        let route_global = match decision.route {
            PlannedRoute::Local(r) => {
                if r.start() != Point::ORIGIN {
                    return invalid(format!("cycle {}: local route must start at the origin", c.id()));
                }
                let frame = scenario.frame_at(c.robot, here);
                r.map(|p| frame.to_global(p))?
            }
            PlannedRoute::Global(r) => {
                if r.start() != here {
                    return invalid(format!("cycle {}: global route must start at {here:?}", c.id()));
                }
                r
            }
        };
        let z = draw_truncation(adversary, c.robot, c.j);
        let travelled = truncated_length(route_global.length(), scenario.delta, z)?;
        let pos_after_move = route_global.point_along(travelled)?;

        // Looks of other robots strictly inside this Move, in time order
        let mut times: Vec<f64> = order[idx + 1..]
            .iter()
            .take_while(|d| d.o < c.f)
            .filter(|d| d.robot != c.robot && d.o > c.s)
            .map(|d| d.o)
            .collect();
        times.dedup();
        let observed_at = draw_observations(adversary, c.robot, c.j, travelled, &times);

        let (color_before, color_after) = if luminous {
            (Some(own_color), Some(decision.color.unwrap_or(own_color)))
        } else {
            (None, None)
        };
        trace.footprints[c.robot].push(here);
        trace.records[c.robot].push(CycleRecord {
            cycle: **c,
            pos_at_look: here,
            visible_set: obs.visible,
            snapshot_local: obs.points,
            route_global,
            z,
            pos_after_move,
            observed_at,
            snapshot_colors: obs.colors,
            color_before,
            color_after,
            accepted: decision.accepted,
        });
    }
    check_move_ends(&trace)?;
    Ok(trace)
}

fn check_distinct(positions: &[Point], t: f64) -> Result<()> {
    for (a, p) in positions.iter().enumerate() {
        for (b, q) in positions.iter().enumerate().skip(a + 1) {
            if p == q {
                return Err(Error::Collision { a, b, time: t });
            }
        }
    }
    Ok(())
}

/// Arrival points must not coincide with robots resting at that instant.
fn check_move_ends(trace: &Trace) -> Result<()> {
    for rec in trace.all_records() {
        let t = rec.cycle.f;
        for r in 0..trace.num_robots() {
            if r == rec.cycle.robot {
                continue;
            }
            if let Ok(p) = trace.position_at(r, t) {
                if p == rec.pos_after_move {
                    return Err(Error::Collision {
                        a: rec.cycle.robot,
                        b: r,
                        time: t,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Recomputes every snapshot and derived position from recorded global
/// state and reports the first inconsistency.
pub fn verify_trace(trace: &Trace) -> std::result::Result<(), String> {
    let luminous = trace.is_luminous();
    for (i, recs) in trace.records.iter().enumerate() {
        let mut expected = trace.scenario.positions[i];
        for rec in recs {
            let id = rec.id();
            if rec.pos_at_look != expected {
                return Err(format!("{id}: footprint discontinuity"));
            }
            if trace.footprints[i].get(id.j - 1) != Some(&rec.pos_at_look) {
                return Err(format!("{id}: footprint list mismatch"));
            }
            let obs = trace
                .observe(i, rec.cycle.o, luminous, id)
                .map_err(|e| format!("{id}: {e}"))?;
            if obs.visible != rec.visible_set
                || obs.points != rec.snapshot_local
                || obs.colors != rec.snapshot_colors
            {
                return Err(format!("{id}: snapshot does not match recomputation"));
            }
            if !rec.snapshot_local.contains(&Point::ORIGIN) {
                return Err(format!("{id}: snapshot lacks the origin"));
            }
            let len = truncated_length(rec.route_global.length(), trace.scenario.delta, rec.z)
                .map_err(|e| format!("{id}: {e}"))?;
            let end = rec.route_global.point_along(len).map_err(|e| format!("{id}: {e}"))?;
            if end != rec.pos_after_move {
                return Err(format!("{id}: arrival point does not match truncation"));
            }
            if rec.observed_at.windows(2).any(|w| w[0].1 > w[1].1) {
                return Err(format!("{id}: observed positions go backwards"));
            }
            expected = rec.pos_after_move;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{AlgorithmController, AlgorithmSpec};
    use crate::scheduling::{make_fsync_schedule, sample_async_schedule, AsyncParams};

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    struct Fixed(Vec<Route>);

    impl Controller for Fixed {
        fn decide(&mut self, ctx: &LookContext<'_>) -> Result<Decision> {
            Ok(Decision {
                route: PlannedRoute::Global(self.0[ctx.cycle.robot].clone()),
                color: None,
                accepted: None,
            })
        }
    }

    #[test]
    fn halt_keeps_footprints_constant() {
        let sc = Scenario::simple(vec![p(0.0, 0.0), p(0.5, 0.0), p(3.0, 0.0)]).unwrap();
        let sched = sample_async_schedule(3, 3, 30.0, &AsyncParams::default()).unwrap();
        let mut ctl = AlgorithmController::new(AlgorithmSpec::Halt);
        let tr = simulate(&sc, &sched, &mut ctl, &Adversary::nonrigid(1)).unwrap();
        for (i, fp) in tr.footprints.iter().enumerate() {
            assert!(fp.iter().all(|q| *q == sc.positions()[i]));
        }
        assert!(tr.all_records().all(|r| r.route_global.is_stay()));
        verify_trace(&tr).unwrap();
    }

    #[test]
    fn lone_observer_sees_only_itself() {
        let sc = Scenario::simple(vec![p(4.0, -2.0)]).unwrap();
        let sched = make_fsync_schedule(3, 1);
        let mut ctl = AlgorithmController::new(AlgorithmSpec::HullContraction { lambda: 0.5 });
        let tr = simulate(&sc, &sched, &mut ctl, &Adversary::rigid(0)).unwrap();
        for r in tr.all_records() {
            assert_eq!(r.snapshot_local, vec![Point::ORIGIN]);
            assert_eq!(r.visible_set, vec![0]);
        }
    }

    #[test]
    fn far_idle_robots_are_invisible() {
        let sc = Scenario::simple(vec![p(0.0, 0.0), p(2.0, 0.0)]).unwrap();
        let tr = simulate(
            &sc,
            &make_fsync_schedule(1, 2),
            &mut AlgorithmController::new(AlgorithmSpec::Halt),
            &Adversary::rigid(0),
        )
        .unwrap();
        assert_eq!(tr.records[0][0].visible_set, vec![0]);
        assert_eq!(tr.records[1][0].visible_set, vec![1]);
    }

    #[test]
    fn rigid_moves_reach_route_end() {
        let mut sc = Scenario::simple(vec![p(0.0, 0.0), p(5.0, 0.0)]).unwrap();
        sc.delta = 0.25;
        let route = Route::segment(p(0.0, 0.0), p(0.5, 0.0)).unwrap();
        let stay = Route::stay(p(5.0, 0.0));
        for seed in 0..10 {
            let tr = simulate(
                &sc,
                &make_fsync_schedule(1, 2),
                &mut Fixed(vec![route.clone(), stay.clone()]),
                &Adversary::rigid(seed),
            )
            .unwrap();
            assert_eq!(tr.records[0][0].pos_after_move, p(0.5, 0.0));
            assert_eq!(tr.records[0][0].z, 1.0);
        }
    }

    #[test]
    fn nonrigid_stops_after_delta() {
        let mut sc = Scenario::simple(vec![p(0.0, 0.0), p(5.0, 0.0)]).unwrap();
        sc.delta = 0.25;
        let route = Route::segment(p(0.0, 0.0), p(2.0, 0.0)).unwrap();
        let stay = Route::stay(p(5.0, 0.0));
        for seed in 0..50 {
            let tr = simulate(
                &sc,
                &make_fsync_schedule(1, 2),
                &mut Fixed(vec![route.clone(), stay.clone()]),
                &Adversary::nonrigid(seed),
            )
            .unwrap();
            let x = tr.records[0][0].pos_after_move.x;
            assert!((0.25..=2.0).contains(&x));
        }
    }

    #[test]
    fn truncation_draws() {
        let a = Adversary::nonrigid(17);
        assert_eq!(draw_truncation(&Adversary::rigid(17), 2, 3), 1.0);
        assert_eq!(draw_truncation(&a, 2, 3), draw_truncation(&a, 2, 3));
        let mean = (1..=10_000)
            .map(|j| draw_truncation(&a, j % 7, j))
            .sum::<f64>()
            / 10_000.0;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
        assert!((1..=1000).map(|j| draw_truncation(&a, 0, j)).all(|z| (0.0..=1.0).contains(&z)));
    }

    #[test]
    fn mover_sampled_out_of_range_is_invisible() {
        // observer at the origin, mover on (0.5,0)->(0.5,2); an arclength of
        // 1.8 puts it at (0.5,1.8): squared distance 0.25 + 3.24 > 1
        let sc = Scenario::simple(vec![p(0.0, 0.0), p(0.5, 0.0)]).unwrap();
        let route = Route::segment(p(0.5, 0.0), p(0.5, 2.0)).unwrap();
        let sched = Schedule::new(
            2.0,
            vec![
                vec![Cycle { robot: 0, j: 1, o: 1.0, s: 1.5, f: 1.75 }],
                vec![Cycle { robot: 1, j: 1, o: 0.0, s: 0.5, f: 1.5 }],
            ],
        )
        .unwrap();
        let mut tr = simulate(
            &sc,
            &sched,
            &mut Fixed(vec![Route::stay(p(0.0, 0.0)), route]),
            &Adversary::rigid(5),
        )
        .unwrap();
        tr.records[1][0].observed_at = vec![(1.0, 1.8)];
        let obs = tr.observe(0, 1.0, false, CycleId::new(0, 1)).unwrap();
        assert_eq!(obs.visible, vec![0]);
        tr.records[1][0].observed_at = vec![(1.0, 0.2)];
        let obs = tr.observe(0, 1.0, false, CycleId::new(0, 1)).unwrap();
        assert_eq!(obs.visible, vec![0, 1]);
    }

    #[test]
    fn observation_draws_are_monotone_and_bounded() {
        let a = Adversary::nonrigid(4);
        let times: Vec<f64> = (1..20).map(|k| k as f64 / 20.0).collect();
        let obs = draw_observations(&a, 0, 1, 0.7, &times);
        assert!(obs.windows(2).all(|w| w[0].1 <= w[1].1 && w[0].0 < w[1].0));
        assert!(obs.iter().all(|&(_, u)| (0.0..=0.7).contains(&u)));
    }

    #[test]
    fn collision_aborts() {
        let sc = Scenario::simple(vec![p(0.0, 0.0), p(0.5, 0.0)]).unwrap();
        let r0 = Route::segment(p(0.0, 0.0), p(0.5, 0.0)).unwrap();
        let err = simulate(
            &sc,
            &make_fsync_schedule(2, 2),
            &mut Fixed(vec![r0, Route::stay(p(0.5, 0.0))]),
            &Adversary::rigid(0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Collision { .. }), "{err}");
    }

    #[test]
    fn degenerate_threshold_aborts_in_reject_mode() {
        let sc = Scenario::simple(vec![p(0.0, 0.0), p(0.5, 0.0)]).unwrap();
        // robot 0 steps to exactly unit distance from robot 1
        let r0 = Route::segment(p(0.0, 0.0), p(-0.5, 0.0)).unwrap();
        let err = simulate(
            &sc,
            &make_fsync_schedule(2, 2),
            &mut Fixed(vec![r0, Route::stay(p(0.5, 0.0))]),
            &Adversary::rigid(0),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Degenerate { .. }), "{err}");
        assert!(Scenario::simple(vec![p(0.0, 0.0), p(1.0, 0.0)]).is_err());
        assert!(Scenario::new(
            vec![p(0.0, 0.0), p(1.0, 0.0)],
            vec![FrameSpec::default(); 2],
            0.0,
            Boundary::Closed
        )
        .is_ok());
    }

    #[test]
    fn scenario_rejects_shared_positions() {
        assert!(Scenario::simple(vec![p(0.0, 0.0), p(0.0, 0.0)]).is_err());
    }

    #[test]
    fn robot_count_mismatch() {
        let sc = Scenario::simple(vec![p(0.0, 0.0)]).unwrap();
        let r = simulate(
            &sc,
            &make_fsync_schedule(1, 2),
            &mut AlgorithmController::new(AlgorithmSpec::Halt),
            &Adversary::rigid(0),
        );
        assert!(r.is_err());
    }

    #[test]
    fn scenario_json_defaults() {
        let sc: Scenario = serde_json::from_str(r#"{"positions": [[0,0],[0.5,0]]}"#).unwrap();
        assert_eq!(sc.frames().len(), 2);
        assert_eq!(sc.boundary(), Boundary::Reject);
        assert!(serde_json::from_str::<Scenario>(r#"{"positions": [[0,0],[0,0]]}"#).is_err());
    }
}
