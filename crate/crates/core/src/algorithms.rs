//! Robot algorithms (local snapshot to local route) and checks of the
//! visibility/vicinity preservation properties they are run under.

use serde::{Deserialize, Serialize};

use crate::engine::{Controller, Decision, LookContext, Scenario, Trace};
use crate::error::{invalid, Result};
use crate::geometry::{squared_distance, Point, Route, EPS};

/// One scripted reaction: when the local view equals `view` (as a point set),
/// follow `route`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptEntry {
    pub view: Vec<Point>,
    pub route: Route,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    Halt,
    /// Step a fraction `lambda` of the way to the centroid of the view.
    HullContraction { lambda: f64 },
    Scripted { table: Vec<ScriptEntry> },
}

impl AlgorithmSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            AlgorithmSpec::Halt => Ok(()),
            AlgorithmSpec::HullContraction { lambda } => {
                if *lambda > 0.0 && *lambda < 1.0 {
                    Ok(())
                } else {
                    invalid(format!("hull contraction needs lambda in (0,1), got {lambda}"))
                }
            }
            AlgorithmSpec::Scripted { table } => {
                for e in table {
                    if e.route.start() != Point::ORIGIN {
                        return invalid("scripted routes must start at the local origin");
                    }
                    if !e.view.contains(&Point::ORIGIN) {
                        return invalid("scripted views must contain the local origin");
                    }
                }
                Ok(())
            }
        }
    }

    /// The route (local frame, starting at the origin) for a snapshot.
    pub fn compute(&self, snapshot: &[Point]) -> Result<Route> {
        if !snapshot.contains(&Point::ORIGIN) {
            return invalid("snapshot must contain the observer at the origin");
        }
        match self {
            AlgorithmSpec::Halt => Ok(Route::stay(Point::ORIGIN)),
            AlgorithmSpec::HullContraction { lambda } => {
                let k = snapshot.len() as f64;
                let (sx, sy) = snapshot
                    .iter()
                    .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
                let target = Point::new(lambda * sx / k, lambda * sy / k);
                Route::segment(Point::ORIGIN, target)
            }
            AlgorithmSpec::Scripted { table } => Ok(table
                .iter()
                .find(|e| same_point_set(&e.view, snapshot, EPS))
                .map_or_else(|| Route::stay(Point::ORIGIN), |e| e.route.clone())),
        }
    }
}

/// Unordered point-set equality with per-coordinate tolerance.
pub fn same_point_set(a: &[Point], b: &[Point], eps: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|p| {
        match (0..b.len()).find(|&k| !used[k] && p.approx_eq(&b[k], eps)) {
            Some(k) => {
                used[k] = true;
                true
            }
            None => false,
        }
    })
}

/// Runs a plain (non-luminous) algorithm.
pub struct AlgorithmController {
    spec: AlgorithmSpec,
}

impl AlgorithmController {
    pub fn new(spec: AlgorithmSpec) -> Self {
        AlgorithmController { spec }
    }
}

impl Controller for AlgorithmController {
    fn decide(&mut self, ctx: &LookContext<'_>) -> Result<Decision> {
        Ok(Decision::local(self.spec.compute(ctx.snapshot)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub reason: Option<String>,
}

impl Verdict {
    fn ok() -> Self {
        Verdict {
            pass: true,
            reason: None,
        }
    }

    fn fail(reason: String) -> Self {
        Verdict {
            pass: false,
            reason: Some(reason),
        }
    }
}

/// Components of the initial visibility graph, each sorted, ordered by
/// smallest member.
pub fn visibility_components(points: &[Point]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut k = 0;
        while k < members.len() {
            let a = members[k];
            for b in 0..n {
                if comp[b] == usize::MAX && squared_distance(points[a], points[b]) <= 1.0 {
                    comp[b] = id;
                    members.push(b);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

fn convex_hull(mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by(crate::engine::cmp_points);
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: Point, a: Point, b: Point| (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    let mut hull: Vec<Point> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0)
    };
    squared_distance(p, Point::new(a.x + t * dx, a.y + t * dy)).sqrt()
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let orient = |o: Point, p: Point, q: Point| (p.x - o.x) * (q.y - o.y) - (p.y - o.y) * (q.x - o.x);
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn edges(h: &[Point]) -> Vec<(Point, Point)> {
    match h.len() {
        1 => vec![(h[0], h[0])],
        2 => vec![(h[0], h[1])],
        _ => (0..h.len()).map(|k| (h[k], h[(k + 1) % h.len()])).collect(),
    }
}

fn hull_distance(a: &[Point], b: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for &(p, q) in &edges(a) {
        for &(r, s) in &edges(b) {
            if segments_cross(p, q, r, s) {
                return 0.0;
            }
            best = best
                .min(point_segment_distance(p, r, s))
                .min(point_segment_distance(q, r, s))
                .min(point_segment_distance(r, p, q))
                .min(point_segment_distance(s, p, q));
        }
    }
    best
}

/// Smallest distance between the convex hulls of two distinct visibility
/// components (infinite with fewer than two components).
pub fn component_separation(points: &[Point]) -> f64 {
    let hulls: Vec<Vec<Point>> = visibility_components(points)
        .iter()
        .map(|c| convex_hull(c.iter().map(|&i| points[i]).collect()))
        .collect();
    let mut best = f64::INFINITY;
    for a in 0..hulls.len() {
        for b in a + 1..hulls.len() {
            best = best.min(hull_distance(&hulls[a], &hulls[b]));
        }
    }
    best
}

/// Accepts initial configurations under which hull contraction (or halt)
/// keeps every robot within unit reach of exactly its initial neighbours:
/// the visibility graph is a disjoint union of cliques of diameter at most 1
/// whose convex hulls are more than `1 + EPS` apart.
pub fn validate_vicinity_scenario(scenario: &Scenario, spec: &AlgorithmSpec) -> Verdict {
    if matches!(spec, AlgorithmSpec::Scripted { .. }) {
        return Verdict::fail("only halt and hull contraction are covered".into());
    }
    let pts = scenario.positions();
    let comps = visibility_components(pts);
    for c in &comps {
        for (k, &a) in c.iter().enumerate() {
            for &b in &c[k + 1..] {
                if squared_distance(pts[a], pts[b]) > 1.0 {
                    return Verdict::fail(format!(
                        "component {c:?} is not a clique: robots {a} and {b} are out of range"
                    ));
                }
            }
        }
    }
    let hulls: Vec<Vec<Point>> = comps
        .iter()
        .map(|c| convex_hull(c.iter().map(|&i| pts[i]).collect()))
        .collect();
    for a in 0..hulls.len() {
        for b in a + 1..hulls.len() {
            let d = hull_distance(&hulls[a], &hulls[b]);
            if d <= 1.0 + EPS {
                return Verdict::fail(format!(
                    "hulls of components {:?} and {:?} are {d} apart",
                    comps[a], comps[b]
                ));
            }
        }
    }
    Verdict::ok()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreservationReport {
    pub visibility_preserving: Verdict,
    pub vicinity_preserving: Verdict,
}

/// Every position the trace records for `robot`.
fn occupied(trace: &Trace, robot: usize) -> Vec<Point> {
    let mut out = vec![trace.scenario.positions()[robot]];
    for r in &trace.records[robot] {
        for &(_, u) in &r.observed_at {
            if let Ok(p) = r.route_global.point_along(u) {
                out.push(p);
            }
        }
        out.push(r.pos_after_move);
    }
    out
}

/// Checks that the initial visibility relation holds at every recorded event
/// instant where both robots rest, and (vicinity) across all pairs of
/// recorded positions regardless of time.
pub fn is_visibility_preserving_run(trace: &Trace) -> PreservationReport {
    let n = trace.num_robots();
    let init = trace.scenario.positions();
    let visible0 = |a: usize, b: usize| squared_distance(init[a], init[b]) <= 1.0;

    let mut times: Vec<f64> = trace
        .all_records()
        .flat_map(|r| [r.cycle.o, r.cycle.s, r.cycle.f])
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();

    let moving = |robot: usize, t: f64| {
        trace.records[robot]
            .iter()
            .any(|r| r.cycle.s < t && t < r.cycle.f)
    };
    let mut visibility = Verdict::ok();
    'outer: for &t in &times {
        let at: Vec<Option<Point>> = (0..n)
            .map(|r| {
                if moving(r, t) {
                    None
                } else {
                    trace.position_at(r, t).ok()
                }
            })
            .collect();
        for a in 0..n {
            for b in a + 1..n {
                if let (Some(p), Some(q)) = (at[a], at[b]) {
                    if (squared_distance(p, q) <= 1.0) != visible0(a, b) {
                        visibility = Verdict::fail(format!(
                            "robots {a} and {b} change visibility at t={t}"
                        ));
                        break 'outer;
                    }
                }
            }
        }
    }

    let occ: Vec<Vec<Point>> = (0..n).map(|r| occupied(trace, r)).collect();
    let mut vicinity = visibility.clone();
    if vicinity.pass {
        'pairs: for a in 0..n {
            for b in a + 1..n {
                let want = visible0(a, b);
                for p in &occ[a] {
                    for q in &occ[b] {
                        if (squared_distance(*p, *q) <= 1.0) != want {
                            vicinity = Verdict::fail(format!(
                                "robots {a} at {p:?} and {b} at {q:?} break the initial vicinity relation"
                            ));
                            break 'pairs;
                        }
                    }
                }
            }
        }
    }
    PreservationReport {
        visibility_preserving: visibility,
        vicinity_preserving: vicinity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{simulate, Adversary};
    use crate::scheduling::{make_fsync_schedule, sample_async_schedule, AsyncParams};

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn halt_stays() {
        let r = AlgorithmSpec::Halt.compute(&[Point::ORIGIN, p(0.3, 0.1)]).unwrap();
        assert!(r.is_stay());
        assert_eq!(r.start(), Point::ORIGIN);
    }

    #[test]
    fn hull_contraction_half_step() {
        let r = AlgorithmSpec::HullContraction { lambda: 0.5 }
            .compute(&[p(0.0, 0.0), p(1.0, 0.0)])
            .unwrap();
        assert_eq!(r.vertices(), &[p(0.0, 0.0), p(0.25, 0.0)]);
        let alone = AlgorithmSpec::HullContraction { lambda: 0.5 }
            .compute(&[Point::ORIGIN])
            .unwrap();
        assert!(alone.is_stay());
    }

    #[test]
    fn scripted_lookup_and_fallback() {
        let spec = AlgorithmSpec::Scripted {
            table: vec![ScriptEntry {
                view: vec![p(0.0, 0.0), p(0.0, 1.0), p(1.0, 0.0)],
                route: Route::segment(Point::ORIGIN, p(0.0, 0.75)).unwrap(),
            }],
        };
        spec.validate().unwrap();
        let r = spec
            .compute(&[p(1.0, 0.0), p(0.0, 0.0), p(0.0, 1.0 + 1e-12)])
            .unwrap();
        assert_eq!(r.end(), p(0.0, 0.75));
        assert!(spec.compute(&[p(0.0, 0.0), p(0.0, 1.0)]).unwrap().is_stay());
    }

    #[test]
    fn compute_requires_origin() {
        assert!(AlgorithmSpec::Halt.compute(&[p(1.0, 0.0)]).is_err());
    }

    #[test]
    fn lambda_bounds() {
        assert!(AlgorithmSpec::HullContraction { lambda: 0.0 }.validate().is_err());
        assert!(AlgorithmSpec::HullContraction { lambda: 1.0 }.validate().is_err());
        assert!(AlgorithmSpec::HullContraction { lambda: 0.3 }.validate().is_ok());
    }

    #[test]
    fn spec_json() {
        let s: AlgorithmSpec = serde_json::from_str(r#"{"kind":"hull_contraction","lambda":0.5}"#).unwrap();
        assert_eq!(s, AlgorithmSpec::HullContraction { lambda: 0.5 });
        let s: AlgorithmSpec = serde_json::from_str(r#"{"kind":"halt"}"#).unwrap();
        assert_eq!(s, AlgorithmSpec::Halt);
    }

    #[test]
    fn compute_is_deterministic() {
        let spec = AlgorithmSpec::HullContraction { lambda: 0.37 };
        let snap = [p(0.0, 0.0), p(0.2, 0.7), p(-0.4, 0.1)];
        assert_eq!(spec.compute(&snap).unwrap(), spec.compute(&snap).unwrap());
    }

    #[test]
    fn vicinity_validator_examples() {
        let hull = AlgorithmSpec::HullContraction { lambda: 0.5 };
        let one = Scenario::simple(vec![p(3.0, 3.0)]).unwrap();
        assert!(validate_vicinity_scenario(&one, &hull).pass);
        let two = Scenario::simple(vec![p(0.0, 0.0), p(0.8, 0.0)]).unwrap();
        assert!(validate_vicinity_scenario(&two, &hull).pass);
        let path = Scenario::simple(vec![p(0.0, 0.0), p(0.9, 0.0), p(1.8, 0.0)]).unwrap();
        assert!(!validate_vicinity_scenario(&path, &hull).pass);
        // two cliques whose hulls come within unit distance
        let close = Scenario::simple(vec![
            p(0.0, 0.0),
            p(0.0, 0.9),
            p(0.98, 0.45),
            p(1.8, 0.45),
        ])
        .unwrap();
        assert!(!validate_vicinity_scenario(&close, &hull).pass);
        let far = Scenario::simple(vec![p(0.0, 0.0), p(0.0, 0.9), p(2.2, 0.45), p(2.9, 0.45)]).unwrap();
        assert!(validate_vicinity_scenario(&far, &hull).pass);
    }

    #[test]
    fn halt_run_preserves_visibility() {
        let sc = Scenario::simple(vec![p(0.0, 0.0), p(0.5, 0.0), p(3.0, 0.0)]).unwrap();
        let tr = simulate(
            &sc,
            &make_fsync_schedule(4, 3),
            &mut AlgorithmController::new(AlgorithmSpec::Halt),
            &Adversary::rigid(0),
        )
        .unwrap();
        let rep = is_visibility_preserving_run(&tr);
        assert!(rep.visibility_preserving.pass && rep.vicinity_preserving.pass);
    }

    #[test]
    fn hull_contraction_on_clique_scenario_is_vicinity_preserving() {
        let sc = Scenario::simple(vec![p(0.0, 0.0), p(0.6, 0.2), p(0.1, 0.7), p(3.0, 0.0), p(3.5, 0.4)]).unwrap();
        let spec = AlgorithmSpec::HullContraction { lambda: 0.4 };
        assert!(validate_vicinity_scenario(&sc, &spec).pass);
        for seed in 0..10 {
            let sched = sample_async_schedule(seed, 5, 40.0, &AsyncParams::default()).unwrap();
            let tr = simulate(&sc, &sched, &mut AlgorithmController::new(spec.clone()), &Adversary::nonrigid(seed))
                .unwrap();
            let rep = is_visibility_preserving_run(&tr);
            assert!(rep.vicinity_preserving.pass, "{:?}", rep.vicinity_preserving.reason);
        }
    }

    #[test]
    fn hull_contraction_never_grows_diameter_under_ssync() {
        let sc = Scenario::simple(vec![p(0.0, 0.0), p(0.6, 0.2), p(0.1, 0.7), p(0.5, 0.6)]).unwrap();
        let tr = simulate(
            &sc,
            &make_fsync_schedule(12, 4),
            &mut AlgorithmController::new(AlgorithmSpec::HullContraction { lambda: 0.5 }),
            &Adversary::nonrigid(3),
        )
        .unwrap();
        let diameter = |pts: &[Point]| {
            let mut d: f64 = 0.0;
            for a in pts {
                for b in pts {
                    d = d.max(squared_distance(*a, *b));
                }
            }
            d
        };
        let mut prev = diameter(sc.positions());
        for round in 0..12 {
            let pts: Vec<Point> = (0..4).map(|i| tr.records[i][round].pos_after_move).collect();
            let d = diameter(&pts);
            assert!(d <= prev + 1e-15);
            prev = d;
        }
    }
}
