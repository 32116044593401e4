//! Cycles, per-robot schedules and schedule generators.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Time grid used by generators and required of loaded schedules, so that
/// interval-endpoint comparisons are exact.
pub const TIME_GRID: f64 = 1.0 / 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CycleId {
    pub robot: usize,
    /// 1-based cycle index.
    pub j: usize,
}

impl CycleId {
    pub const fn new(robot: usize, j: usize) -> Self {
        CycleId { robot, j }
    }
}

impl fmt::Display for CycleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}#{}", self.robot, self.j)
    }
}

/// One Look-Compute-Move cycle: Look at `o`, Move over `[s, f]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    pub robot: usize,
    pub j: usize,
    pub o: f64,
    pub s: f64,
    pub f: f64,
}

impl Cycle {
    pub fn id(&self) -> CycleId {
        CycleId::new(self.robot, self.j)
    }
}

#[derive(Serialize, Deserialize)]
struct Timing {
    j: usize,
    o: f64,
    s: f64,
    f: f64,
}

#[derive(Serialize, Deserialize)]
struct RawSchedule {
    horizon: f64,
    robots: Vec<Vec<Timing>>,
}

/// A finite prefix `[0, horizon]` of a schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSchedule", into = "RawSchedule")]
pub struct Schedule {
    horizon: f64,
    robots: Vec<Vec<Cycle>>,
}

impl TryFrom<RawSchedule> for Schedule {
    type Error = Error;

    fn try_from(raw: RawSchedule) -> Result<Self> {
        let robots = raw
            .robots
            .into_iter()
            .enumerate()
            .map(|(robot, cs)| {
                cs.into_iter()
                    .map(|t| Cycle {
                        robot,
                        j: t.j,
                        o: t.o,
                        s: t.s,
                        f: t.f,
                    })
                    .collect()
            })
            .collect();
        let sched = Schedule::new(raw.horizon, robots)?;
        sched.check_grid()?;
        Ok(sched)
    }
}

impl From<Schedule> for RawSchedule {
    fn from(s: Schedule) -> Self {
        RawSchedule {
            horizon: s.horizon,
            robots: s
                .robots
                .into_iter()
                .map(|cs| {
                    cs.into_iter()
                        .map(|c| Timing {
                            j: c.j,
                            o: c.o,
                            s: c.s,
                            f: c.f,
                        })
                        .collect()
                })
                .collect(),
        }
    }
}

fn on_grid(t: f64) -> bool {
    t.is_finite() && (t / TIME_GRID).fract() == 0.0
}

fn snap(t: f64) -> f64 {
    ((t / TIME_GRID).round() * TIME_GRID).max(TIME_GRID)
}

impl Schedule {
    pub fn new(horizon: f64, robots: Vec<Vec<Cycle>>) -> Result<Self> {
        if !(horizon >= 0.0 && horizon.is_finite()) {
            return invalid(format!("horizon must be finite and >= 0, got {horizon}"));
        }
        for (i, cs) in robots.iter().enumerate() {
            for (k, c) in cs.iter().enumerate() {
                if c.robot != i {
                    return invalid(format!("cycle {} listed under robot {i}", c.id()));
                }
                if c.j != k + 1 {
                    return invalid(format!("robot {i}: cycle index {} at position {}", c.j, k + 1));
                }
                if !(c.o >= 0.0 && c.o < c.s && c.s < c.f) {
                    return invalid(format!("cycle {} violates 0 <= o < s < f", c.id()));
                }
                if c.f > horizon {
                    return invalid(format!("cycle {} ends after horizon {horizon}", c.id()));
                }
                if k > 0 && cs[k - 1].f >= c.o {
                    return invalid(format!("cycle {} starts before previous Move ends", c.id()));
                }
            }
        }
        Ok(Schedule { horizon, robots })
    }

    pub fn empty(n: usize) -> Self {
        Schedule {
            horizon: 0.0,
            robots: vec![Vec::new(); n],
        }
    }

    fn check_grid(&self) -> Result<()> {
        if let Some(c) = self
            .cycles()
            .find(|c| !(on_grid(c.o) && on_grid(c.s) && on_grid(c.f)))
        {
            return invalid(format!(
                "cycle {} has times off the 1/64 grid; hand-entered times must be grid-aligned",
                c.id()
            ));
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn num_robots(&self) -> usize {
        self.robots.len()
    }

    pub fn robot(&self, i: usize) -> &[Cycle] {
        &self.robots[i]
    }

    pub fn robots(&self) -> &[Vec<Cycle>] {
        &self.robots
    }

    pub fn get(&self, id: CycleId) -> Option<&Cycle> {
        self.robots.get(id.robot)?.get(id.j.checked_sub(1)?)
    }

    pub fn cycles(&self) -> impl Iterator<Item = &Cycle> + '_ {
        self.robots.iter().flatten()
    }

    pub fn num_cycles(&self) -> usize {
        self.robots.iter().map(Vec::len).sum()
    }

    /// Keeps only cycles whose Move ends by `horizon`.
    pub fn truncate(&self, horizon: f64) -> Schedule {
        let robots = self
            .robots
            .iter()
            .map(|cs| cs.iter().copied().take_while(|c| c.f <= horizon).collect())
            .collect();
        Schedule { horizon, robots }
    }

    /// True when every cycle has the shape `(t, t+1/4, t+3/4)` for integer `t`.
    pub fn is_ssync_form(&self) -> bool {
        self.cycles()
            .all(|c| c.o.fract() == 0.0 && c.s == c.o + 0.25 && c.f == c.o + 0.75)
    }
}

/// SSYNC normal form: round `t` activates the robots in `rounds[t]` with
/// cycle `(t, t+1/4, t+3/4)`.
pub fn make_ssync_schedule(n: usize, rounds: &[Vec<usize>]) -> Result<Schedule> {
    let mut robots: Vec<Vec<Cycle>> = vec![Vec::new(); n];
    for (t, set) in rounds.iter().enumerate() {
        if set.is_empty() {
            return invalid(format!("round {t} has an empty activation set"));
        }
        let mut seen = vec![false; n];
        for &i in set {
            if i >= n {
                return invalid(format!("round {t}: robot {i} out of range (n={n})"));
            }
            if std::mem::replace(&mut seen[i], true) {
                return invalid(format!("round {t}: robot {i} activated twice"));
            }
            let t = t as f64;
            let j = robots[i].len() + 1;
            robots[i].push(Cycle {
                robot: i,
                j,
                o: t,
                s: t + 0.25,
                f: t + 0.75,
            });
        }
    }
    Schedule::new(rounds.len() as f64, robots)
}

/// Fully synchronous schedule: cycle `j` of every robot is `(j-1, j-3/4, j-1/4)`.
pub fn make_fsync_schedule(num_rounds: usize, n: usize) -> Schedule {
    let robots = (0..n)
        .map(|i| {
            (1..=num_rounds)
                .map(|j| {
                    let t = j as f64;
                    Cycle {
                        robot: i,
                        j,
                        o: t - 1.0,
                        s: t - 0.75,
                        f: t - 0.25,
                    }
                })
                .collect()
        })
        .collect();
    Schedule::new(num_rounds as f64, robots).expect("fsync schedule is well formed")
}

/// Uniform duration ranges for the random ASYNC generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsyncParams {
    /// Look to Move start.
    pub look_to_move: (f64, f64),
    pub move_duration: (f64, f64),
    /// Move end to next Look (also bounds the first Look).
    pub idle: (f64, f64),
}

impl Default for AsyncParams {
    fn default() -> Self {
        AsyncParams {
            look_to_move: (0.25, 1.0),
            move_duration: (0.25, 1.0),
            idle: (0.25, 1.0),
        }
    }
}

impl AsyncParams {
    fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("look_to_move", self.look_to_move),
            ("move_duration", self.move_duration),
            ("idle", self.idle),
        ] {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return invalid(format!("{name} range ({lo}, {hi}) must satisfy 0 < min <= max"));
            }
        }
        Ok(())
    }

    /// A window length under which every generated schedule is fair.
    pub fn fairness_window(&self) -> f64 {
        snap(self.idle.1) + snap(self.look_to_move.1) + snap(self.move_duration.1)
    }
}

pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic RNG for a keyed sub-stream of `seed`.
pub(crate) fn keyed_rng(seed: u64, key: &[u64]) -> ChaCha8Rng {
    let h = key.iter().fold(mix64(seed), |h, &k| mix64(h ^ mix64(k)));
    ChaCha8Rng::seed_from_u64(h)
}

fn draw(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi == lo {
        snap(lo)
    } else {
        snap(rng.random_range(lo..=hi))
    }
}

/// Random ASYNC schedule on the 1/64 grid. Each robot draws from its own
/// stream, so a longer horizon extends a shorter one cycle for cycle.
pub fn sample_async_schedule(seed: u64, n: usize, horizon: f64, params: &AsyncParams) -> Result<Schedule> {
    params.validate()?;
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return invalid(format!("horizon must be finite and >= 0, got {horizon}"));
    }
    let robots = (0..n)
        .map(|i| {
            let mut rng = keyed_rng(seed, &[0x5c4e_d01e, i as u64]);
            let mut cycles = Vec::new();
            let mut o = (rng.random_range(0.0..=params.idle.1) / TIME_GRID).floor() * TIME_GRID;
            loop {
                let s = o + draw(&mut rng, params.look_to_move);
                let f = s + draw(&mut rng, params.move_duration);
                if f > horizon {
                    break;
                }
                cycles.push(Cycle {
                    robot: i,
                    j: cycles.len() + 1,
                    o,
                    s,
                    f,
                });
                o = f + draw(&mut rng, params.idle);
            }
            cycles
        })
        .collect();
    Schedule::new(horizon, robots)
}

/// Finite fairness proxy: robot `i` passes iff every closed window of
/// length `window` inside `[0, horizon - window]` contains one of its Looks.
/// The last stretch is left out since a cycle only materializes once its
/// Move ends inside the horizon.
pub fn check_fairness_prefix(schedule: &Schedule, window: f64) -> Result<Vec<bool>> {
    if !(window > 0.0) {
        return invalid(format!("fairness window must be positive, got {window}"));
    }
    let h = schedule.horizon();
    Ok(schedule
        .robots()
        .iter()
        .map(|cs| {
            if h < 2.0 * window {
                return true;
            }
            let looks: Vec<f64> = cs.iter().map(|c| c.o).collect();
            match (looks.first(), looks.last()) {
                (Some(&first), Some(&last)) => {
                    first <= window
                        && last >= h - 2.0 * window
                        && looks.windows(2).all(|w| w[1] - w[0] <= window)
                }
                _ => false,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn timings(cs: &[Cycle]) -> Vec<(f64, f64, f64)> {
        cs.iter().map(|c| (c.o, c.s, c.f)).collect()
    }

    #[test]
    fn ssync_examples() {
        let s = make_ssync_schedule(1, &[vec![0], vec![0]]).unwrap();
        assert_eq!(timings(s.robot(0)), vec![(0.0, 0.25, 0.75), (1.0, 1.25, 1.75)]);
        let s = make_ssync_schedule(2, &[]).unwrap();
        assert_eq!(s.num_cycles(), 0);
        assert_eq!(s.horizon(), 0.0);
        let s = make_ssync_schedule(2, &[vec![0, 1]]).unwrap();
        for i in 0..2 {
            assert_eq!(timings(s.robot(i)), vec![(0.0, 0.25, 0.75)]);
            assert_eq!(s.robot(i)[0].j, 1);
        }
        assert!(s.is_ssync_form());
        assert!(make_ssync_schedule(2, &[vec![]]).is_err());
        assert!(make_ssync_schedule(2, &[vec![2]]).is_err());
    }

    #[test]
    fn fsync_examples() {
        let s = make_fsync_schedule(1, 2);
        assert_eq!(timings(s.robot(0)), vec![(0.0, 0.25, 0.75)]);
        assert_eq!(timings(s.robot(1)), vec![(0.0, 0.25, 0.75)]);
        assert_eq!(make_fsync_schedule(0, 3).num_cycles(), 0);
        let s = make_fsync_schedule(2, 1);
        assert_eq!(timings(s.robot(0)), vec![(0.0, 0.25, 0.75), (1.0, 1.25, 1.75)]);
    }

    #[test]
    fn fsync_is_simultaneous_ssync() {
        let s = make_fsync_schedule(7, 4);
        assert!(s.is_ssync_form());
        for i in 1..4 {
            assert_eq!(timings(s.robot(0)), timings(s.robot(i)));
        }
    }

    #[test]
    fn async_generator_is_deterministic_and_valid() {
        let p = AsyncParams::default();
        let a = sample_async_schedule(42, 3, 100.0, &p).unwrap();
        let b = sample_async_schedule(42, 3, 100.0, &p).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_async_schedule(43, 3, 100.0, &p).unwrap());
        for cs in a.robots() {
            assert!(!cs.is_empty());
            assert!(cs.last().unwrap().f <= 100.0);
            for c in cs {
                assert!(c.o < c.s && c.s < c.f);
                assert!(on_grid(c.o) && on_grid(c.s) && on_grid(c.f));
            }
            for w in cs.windows(2) {
                assert!(w[0].f < w[1].o);
            }
        }
        assert_eq!(sample_async_schedule(1, 3, 0.0, &p).unwrap().num_cycles(), 0);
    }

    #[test]
    fn async_generator_is_prefix_stable() {
        let p = AsyncParams::default();
        let short = sample_async_schedule(9, 4, 50.0, &p).unwrap();
        let long = sample_async_schedule(9, 4, 100.0, &p).unwrap();
        assert_eq!(long.truncate(50.0), short);
    }

    #[test]
    fn async_generator_rejects_bad_ranges() {
        let p = AsyncParams {
            move_duration: (1.0, 0.5),
            ..AsyncParams::default()
        };
        assert!(sample_async_schedule(1, 2, 10.0, &p).is_err());
    }

    #[test]
    fn fairness_examples() {
        let s = make_fsync_schedule(10, 3);
        assert_eq!(check_fairness_prefix(&s, 2.0).unwrap(), vec![true; 3]);

        let mut robots = make_fsync_schedule(10, 2).robots().to_vec();
        robots[1].clear();
        let s = Schedule::new(10.0, robots).unwrap();
        assert_eq!(check_fairness_prefix(&s, 1.0).unwrap(), vec![true, false]);
        assert!(check_fairness_prefix(&s, 0.0).is_err());

        let p = AsyncParams::default();
        for seed in 0..20 {
            let s = sample_async_schedule(seed, 4, 100.0, &p).unwrap();
            assert!(check_fairness_prefix(&s, p.fairness_window())
                .unwrap()
                .into_iter()
                .all(|ok| ok));
        }
    }

    #[test]
    fn schedule_json_shape() {
        let s = make_ssync_schedule(2, &[vec![0], vec![1]]).unwrap();
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v["horizon"], 2.0);
        assert_eq!(v["robots"][1][0]["j"], 1);
        assert_eq!(v["robots"][1][0]["o"], 1.0);
        let back: Schedule = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn loader_rejects_invalid_schedules() {
        let off_grid = r#"{"horizon": 2, "robots": [[{"j":1,"o":0.1,"s":0.5,"f":1}]]}"#;
        assert!(serde_json::from_str::<Schedule>(off_grid).is_err());
        let bad_order = r#"{"horizon": 2, "robots": [[{"j":1,"o":0.5,"s":0.25,"f":1}]]}"#;
        assert!(serde_json::from_str::<Schedule>(bad_order).is_err());
        let gap = r#"{"horizon": 3, "robots": [[{"j":1,"o":0,"s":0.25,"f":1},{"j":3,"o":2,"s":2.25,"f":2.5}]]}"#;
        assert!(serde_json::from_str::<Schedule>(gap).is_err());
        let overlap = r#"{"horizon": 3, "robots": [[{"j":1,"o":0,"s":0.25,"f":1},{"j":2,"o":1,"s":2.25,"f":2.5}]]}"#;
        assert!(serde_json::from_str::<Schedule>(overlap).is_err());
    }
}
