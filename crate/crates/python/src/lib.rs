use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use lcmsync::algorithms::{AlgorithmController, AlgorithmSpec};
use lcmsync::checker::{check_all_with_analysis, ConcurrencyAnalysis, DEFAULT_BUDGET};
use lcmsync::engine::{self, Adversary, Boundary, FrameSpec, Movement};
use lcmsync::experiments;
use lcmsync::geometry::Point;
use lcmsync::scenarios;
use lcmsync::scheduling::{self, AsyncParams};
use lcmsync::ssync_builder::{self, build_plan, replay_plan};
use lcmsync::synchronizer::{self, ColorSet, Machine, Output, SyncColor};
use lcmsync::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::NonSimpleRoute(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn from_json<T: serde::de::DeserializeOwned>(text: &str) -> PyResult<T> {
    serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn to_json<T: Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Initial positions, frames and minimum move distance.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Scenario(engine::Scenario);

#[pymethods]
impl Scenario {
    #[new]
    #[pyo3(signature = (positions, delta=0.0, boundary="reject"))]
    fn new(positions: Vec<(f64, f64)>, delta: f64, boundary: &str) -> PyResult<Self> {
        let boundary = match boundary {
            "reject" => Boundary::Reject,
            "closed" => Boundary::Closed,
            other => return Err(PyValueError::new_err(format!("unknown boundary '{other}'"))),
        };
        let pts: Vec<Point> = positions.into_iter().map(|(x, y)| Point::new(x, y)).collect();
        let frames = vec![FrameSpec::default(); pts.len()];
        engine::Scenario::new(pts, frames, delta, boundary).map(Scenario).map_err(err)
    }

    /// A random vicinity-preserving scenario and its hull-contraction rate.
    #[staticmethod]
    fn random_vicinity(seed: u64) -> (Scenario, f64) {
        let (sc, spec) = scenarios::random_vicinity_scenario(seed);
        let lambda = match spec {
            AlgorithmSpec::HullContraction { lambda } => lambda,
            _ => 0.0,
        };
        (Scenario(sc), lambda)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        from_json(text).map(Scenario)
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&self.0)
    }

    #[getter]
    fn num_robots(&self) -> usize {
        self.0.num_robots()
    }

    #[getter]
    fn positions(&self) -> Vec<(f64, f64)> {
        self.0.positions().iter().map(|p| (p.x, p.y)).collect()
    }

    fn __repr__(&self) -> String {
        format!("Scenario(robots={}, delta={})", self.0.num_robots(), self.0.delta())
    }
}

/// Activation times of every robot up to a horizon.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Schedule(scheduling::Schedule);

#[pymethods]
impl Schedule {
    #[staticmethod]
    fn fsync(rounds: usize, n: usize) -> Self {
        Schedule(scheduling::make_fsync_schedule(rounds, n))
    }

    /// `rounds[k]` lists the robots active in round `k`.
    #[staticmethod]
    fn ssync(n: usize, rounds: Vec<Vec<usize>>) -> PyResult<Self> {
        scheduling::make_ssync_schedule(n, &rounds).map(Schedule).map_err(err)
    }

    #[staticmethod]
    fn random_async(seed: u64, n: usize, horizon: f64) -> PyResult<Self> {
        scheduling::sample_async_schedule(seed, n, horizon, &AsyncParams::default())
            .map(Schedule)
            .map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        from_json(text).map(Schedule)
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&self.0)
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.0.horizon()
    }

    #[getter]
    fn num_cycles(&self) -> usize {
        self.0.num_cycles()
    }

    /// `(o, s, f)` per cycle of `robot`.
    fn cycles(&self, robot: usize) -> PyResult<Vec<(f64, f64, f64)>> {
        if robot >= self.0.num_robots() {
            return Err(PyValueError::new_err(format!("no robot {robot}")));
        }
        Ok(self.0.robot(robot).iter().map(|c| (c.o, c.s, c.f)).collect())
    }
}

/// A recorded execution.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Trace(engine::Trace);

#[pymethods]
impl Trace {
    /// Parses and re-verifies a trace.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let t: engine::Trace = from_json(text)?;
        engine::verify_trace(&t).map_err(PyValueError::new_err)?;
        Ok(Trace(t))
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&self.0)
    }

    #[getter]
    fn num_robots(&self) -> usize {
        self.0.num_robots()
    }

    #[getter]
    fn num_cycles(&self) -> usize {
        self.0.num_cycles()
    }

    #[getter]
    fn is_luminous(&self) -> bool {
        self.0.is_luminous()
    }

    /// Look positions per robot.
    fn footprints(&self) -> Vec<Vec<(f64, f64)>> {
        self.0
            .footprints
            .iter()
            .map(|f| f.iter().map(|p| (p.x, p.y)).collect())
            .collect()
    }

    fn position_at(&self, robot: usize, t: f64) -> PyResult<(f64, f64)> {
        if robot >= self.0.num_robots() {
            return Err(PyValueError::new_err(format!("no robot {robot}")));
        }
        let p = self.0.position_at(robot, t).map_err(err)?;
        Ok((p.x, p.y))
    }

    /// The accepted cycles of a luminous run, renumbered.
    fn core(&self) -> PyResult<Trace> {
        Ok(Trace(synchronizer::extract_core(&self.0).map_err(err)?.1))
    }

    fn acceptance_counts(&self) -> Vec<usize> {
        synchronizer::acceptance_counts(&self.0)
    }

    /// The five-condition report as a dict.
    #[pyo3(signature = (budget=DEFAULT_BUDGET))]
    fn check(&self, py: Python<'_>, budget: u64) -> PyResult<Py<PyAny>> {
        let analysis = ConcurrencyAnalysis::new(&self.0);
        to_py(py, &check_all_with_analysis(&self.0, &analysis, budget))
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace(robots={}, cycles={}, luminous={})",
            self.0.num_robots(),
            self.0.num_cycles(),
            self.0.is_luminous()
        )
    }
}

fn parse_algorithm(algorithm: &str) -> PyResult<AlgorithmSpec> {
    let spec = if algorithm == "halt" {
        AlgorithmSpec::Halt
    } else if let Some(l) = algorithm.strip_prefix("hull:") {
        let lambda = l
            .parse()
            .map_err(|_| PyValueError::new_err(format!("bad lambda in '{algorithm}'")))?;
        AlgorithmSpec::HullContraction { lambda }
    } else {
        from_json(algorithm)?
    };
    spec.validate().map_err(err)?;
    Ok(spec)
}

fn parse_machine(machine: &str) -> PyResult<Machine> {
    machine.parse().map_err(err)
}

/// Runs `algorithm` (`"halt"`, `"hull:LAMBDA"` or an algorithm JSON object),
/// wrapped in a synchronizer when `machine` is `"svp"` or `"greedy"`.
#[pyfunction]
#[pyo3(signature = (scenario, schedule, algorithm="halt", seed=0, rigid=false, machine=None))]
fn simulate(
    scenario: &Scenario,
    schedule: &Schedule,
    algorithm: &str,
    seed: u64,
    rigid: bool,
    machine: Option<&str>,
) -> PyResult<Trace> {
    let spec = parse_algorithm(algorithm)?;
    let adversary = Adversary {
        seed,
        mode: if rigid { Movement::Rigid } else { Movement::NonRigid },
    };
    let trace = match machine {
        Some(m) => synchronizer::run_synchronized(&scenario.0, &spec, &schedule.0, &adversary, parse_machine(m)?),
        None => engine::simulate(&scenario.0, &schedule.0, &mut AlgorithmController::new(spec), &adversary),
    };
    trace.map(Trace).map_err(err)
}

#[pyfunction]
fn builtin_names() -> Vec<&'static str> {
    scenarios::builtin_names()
}

/// Runs a built-in bundle with its own schedule, algorithm and machine.
#[pyfunction]
#[pyo3(signature = (name, seed=0))]
fn simulate_builtin(name: &str, seed: u64) -> PyResult<Trace> {
    let b = scenarios::builtin(name).map_err(err)?;
    let sched = b.schedule.as_ref().expect("built-ins carry a schedule");
    let adversary = b.adversary(seed);
    let trace = match b.machine {
        Some(m) => synchronizer::run_synchronized(&b.scenario, &b.algorithm, sched, &adversary, m),
        None => engine::simulate(&b.scenario, sched, &mut AlgorithmController::new(b.algorithm.clone()), &adversary),
    };
    trace.map(Trace).map_err(err)
}

/// Plan, replay and similarity for a trace that passes all five checks;
/// `None` when the checks fail.
#[pyfunction]
fn synthesize(py: Python<'_>, trace: &Trace) -> PyResult<Option<(Py<PyAny>, Trace, bool)>> {
    let t = &trace.0;
    let analysis = ConcurrencyAnalysis::new(t);
    let report = check_all_with_analysis(t, &analysis, DEFAULT_BUDGET);
    let passed = report.all_pass();
    let Some(order) = report.natural_order.filter(|_| passed) else {
        return Ok(None);
    };
    let plan = build_plan(t, &analysis, &order).map_err(err)?;
    let replay = replay_plan(&t.scenario, &plan).map_err(err)?;
    let s = ssync_builder::similar(t, &replay).map_err(err)?;
    Ok(Some((to_py(py, &plan)?, Trace(replay), s.similar)))
}

#[pyfunction]
#[pyo3(signature = (trace, budget=DEFAULT_BUDGET))]
fn candidate_search(py: Python<'_>, trace: &Trace, budget: u64) -> PyResult<Py<PyAny>> {
    to_py(py, &ssync_builder::candidate_search(&trace.0, budget))
}

/// `"greedy-lemma"` or `"colorbased-theorem"`.
#[pyfunction]
#[pyo3(signature = (name, machine="svp"))]
fn repro(py: Python<'_>, name: &str, machine: &str) -> PyResult<Py<PyAny>> {
    let (report, _) = match name {
        "greedy-lemma" => experiments::repro_greedy_lemma(),
        "colorbased-theorem" => experiments::repro_colorbased(parse_machine(machine)?),
        other => return Err(PyValueError::new_err(format!("unknown reproduction '{other}'"))),
    }
    .map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (template, seeds, budget=DEFAULT_BUDGET))]
fn necessity(py: Python<'_>, template: &str, seeds: Vec<u64>, budget: u64) -> PyResult<Py<PyAny>> {
    let (report, _) = py
        .detach(|| experiments::necessity(template, &seeds, budget))
        .map_err(err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (seed, horizon=200.0))]
fn vicinity_run(py: Python<'_>, seed: u64, horizon: f64) -> PyResult<Py<PyAny>> {
    let run = py.detach(|| experiments::vicinity_run(seed, horizon)).map_err(err)?;
    to_py(py, &run)
}

fn parse_color(s: &str) -> PyResult<SyncColor> {
    SyncColor::ALL
        .into_iter()
        .find(|c| c.to_string() == s)
        .ok_or_else(|| PyValueError::new_err(format!("unknown color '{s}'")))
}

/// One transition of the five-color machine: `(next_state, accepted)`.
#[pyfunction]
fn svp_step(state: &str, visible: Vec<String>) -> PyResult<(String, bool)> {
    let input: ColorSet = visible.iter().map(|c| parse_color(c)).collect::<PyResult<_>>()?;
    let v = synchronizer::svp_step(parse_color(state)?, input);
    Ok((v.next.to_string(), v.output == Output::Accept))
}

#[pymodule]
fn lcmsync_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Scenario>()?;
    m.add_class::<Schedule>()?;
    m.add_class::<Trace>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_names, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_builtin, m)?)?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(candidate_search, m)?)?;
    m.add_function(wrap_pyfunction!(repro, m)?)?;
    m.add_function(wrap_pyfunction!(necessity, m)?)?;
    m.add_function(wrap_pyfunction!(vicinity_run, m)?)?;
    m.add_function(wrap_pyfunction!(svp_step, m)?)?;
    Ok(())
}
