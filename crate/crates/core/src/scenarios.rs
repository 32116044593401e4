//! Built-in scenario bundles and the random generator of vicinity scenarios.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algorithms::{component_separation, validate_vicinity_scenario, visibility_components, AlgorithmSpec};
use crate::engine::{Adversary, Boundary, FrameSpec, Movement, Scenario};
use crate::error::{invalid, Result};
use crate::geometry::{squared_distance, Point};
use crate::scheduling::{keyed_rng, Schedule};
use crate::synchronizer::Machine;

/// Which of the five conditions a template is built to break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    Stationary,
    PairwiseAligned,
    Consistent,
    Serializable,
    Natural,
}

/// A scenario together with the algorithm, schedule and adversary mode it is
/// meant to run with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    #[serde(default)]
    pub description: String,
    pub scenario: Scenario,
    pub algorithm: AlgorithmSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Schedule>,
    #[serde(default)]
    pub movement: Movement,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub machine: Option<Machine>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<Condition>,
}

impl Bundle {
    pub fn adversary(&self, seed: u64) -> Adversary {
        Adversary {
            seed,
            mode: self.movement,
        }
    }
}

const BUILTIN: &[(&str, &str)] = &[
    ("greedy-lemma", include_str!("../data/greedy_lemma.json")),
    ("stationarity", include_str!("../data/stationarity.json")),
    ("pairwise-alignment", include_str!("../data/alignment.json")),
    ("consistency", include_str!("../data/consistency.json")),
    ("serializability", include_str!("../data/serializability.json")),
    ("naturality", include_str!("../data/naturality.json")),
    ("control", include_str!("../data/control.json")),
];

pub fn builtin_names() -> Vec<&'static str> {
    BUILTIN.iter().map(|(n, _)| *n).collect()
}

pub fn builtin(name: &str) -> Result<Bundle> {
    match BUILTIN.iter().find(|(n, _)| *n == name) {
        Some((_, text)) => {
            let b: Bundle = serde_json::from_str(text)?;
            b.algorithm.validate()?;
            Ok(b)
        }
        None => invalid(format!(
            "unknown built-in scenario '{name}' (known: {})",
            builtin_names().join(", ")
        )),
    }
}

/// Built-in bundle for a necessity template.
pub fn template(condition: Condition) -> Bundle {
    let name = match condition {
        Condition::Stationary => "stationarity",
        Condition::PairwiseAligned => "pairwise-alignment",
        Condition::Consistent => "consistency",
        Condition::Serializable => "serializability",
        Condition::Natural => "naturality",
    };
    builtin(name).expect("embedded templates parse")
}

const CLIQUE_RADIUS: f64 = 0.44;
const MIN_SEPARATION: f64 = 1.05;
const MIN_SPACING: f64 = 0.05;

/// A random configuration of 3 to 8 robots split into cliques of diameter
/// below 0.9 whose hulls are at least 1.05 apart, with random frames and a
/// small minimum move distance, plus a hull-contraction rate in [0.1, 0.35].
pub fn random_vicinity_scenario(seed: u64) -> (Scenario, AlgorithmSpec) {
    let mut rng = keyed_rng(seed, &[0x7669_6369]);
    let n = rng.random_range(3..=8usize);
    loop {
        let m = rng.random_range(1..=n.min(3));
        // every clique gets one robot, the rest are spread at random
        let mut sizes = vec![1usize; m];
        for _ in m..n {
            sizes[rng.random_range(0..m)] += 1;
        }
        let side = 2.5 * (m as f64).sqrt();
        let mut positions: Vec<Point> = Vec::with_capacity(n);
        let mut ok = true;
        for &size in &sizes {
            let c = Point::new(rng.random_range(0.0..side), rng.random_range(0.0..side));
            let start = positions.len();
            let mut tries = 0;
            while positions.len() < start + size {
                tries += 1;
                if tries > 1000 {
                    ok = false;
                    break;
                }
                let r = CLIQUE_RADIUS * rng.random::<f64>().sqrt();
                let a = rng.random_range(0.0..TAU);
                let p = Point::new(c.x + r * a.cos(), c.y + r * a.sin());
                if positions
                    .iter()
                    .all(|q| squared_distance(p, *q) >= MIN_SPACING * MIN_SPACING)
                {
                    positions.push(p);
                }
            }
        }
        if !ok || component_separation(&positions) < MIN_SEPARATION {
            continue;
        }
        let narrow = visibility_components(&positions).iter().all(|c| {
            c.iter()
                .all(|&a| c.iter().all(|&b| squared_distance(positions[a], positions[b]) < 0.81))
        });
        if !narrow {
            continue;
        }
        let frames = (0..n)
            .map(|_| FrameSpec {
                rotation: rng.random_range(0.0..TAU),
                unit: rng.random_range(0.5..2.0),
            })
            .collect();
        let delta = rng.random_range(0.0..0.05);
        let lambda = rng.random_range(0.1..0.35);
        let spec = AlgorithmSpec::HullContraction { lambda };
        let Ok(sc) = Scenario::new(positions, frames, delta, Boundary::Reject) else {
            continue;
        };
        if validate_vicinity_scenario(&sc, &spec).pass {
            return (sc, spec);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse() {
        for name in builtin_names() {
            let b = builtin(name).unwrap();
            assert!(!b.description.is_empty(), "{name}");
            let sched = b.schedule.as_ref().unwrap();
            assert_eq!(sched.num_robots(), b.scenario.num_robots(), "{name}");
        }
        assert!(builtin("nope").is_err());
        assert_eq!(builtin("greedy-lemma").unwrap().machine, Some(Machine::Greedy));
        assert_eq!(template(Condition::Natural).condition, Some(Condition::Natural));
    }

    #[test]
    fn vicinity_generator_respects_bounds() {
        for seed in 0..200 {
            let (sc, spec) = random_vicinity_scenario(seed);
            let pts = sc.positions();
            assert!((3..=8).contains(&pts.len()));
            assert!(validate_vicinity_scenario(&sc, &spec).pass);
            assert!(component_separation(pts) >= MIN_SEPARATION);
            for c in visibility_components(pts) {
                for &a in &c {
                    for &b in &c {
                        assert!(squared_distance(pts[a], pts[b]) < 0.81);
                    }
                }
            }
        }
        assert_eq!(random_vicinity_scenario(7), random_vicinity_scenario(7));
    }
}
