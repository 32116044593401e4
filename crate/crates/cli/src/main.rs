use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use lcmsync::algorithms::{AlgorithmController, AlgorithmSpec};
use lcmsync::checker::{check_all_with_analysis, ConcurrencyAnalysis, ConditionReport, Status, DEFAULT_BUDGET};
use lcmsync::engine::{simulate, verify_trace, Adversary, Movement, Scenario, Trace};
use lcmsync::experiments::{necessity, repro_colorbased, repro_greedy_lemma};
use lcmsync::scenarios::{builtin, builtin_names, random_vicinity_scenario, Bundle};
use lcmsync::scheduling::{make_fsync_schedule, sample_async_schedule, AsyncParams, Schedule};
use lcmsync::ssync_builder::{build_plan, replay_plan, similar, SsyncPlan, Similarity};
use lcmsync::synchronizer::{extract_core, run_synchronized, Machine};
use lcmsync::Error;

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(name = "lcmsync", version, about = "Look-Compute-Move simulation, trace checking and SSYNC synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trace.
    Simulate(SimulateArgs),
    /// Check the five conditions on a trace (luminous traces are reduced to their core first).
    Check(CheckArgs),
    /// Build, replay and compare the SSYNC execution of a trace that passes all checks.
    Synthesize(CheckArgs),
    /// Reproduce a built-in counterexample.
    Repro(ReproArgs),
    /// Monte Carlo sweep of a violation template.
    Necessity(NecessityArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Rigid,
    Nonrigid,
}

#[derive(Args)]
struct Output {
    /// Write JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct SimulateArgs {
    /// Built-in name, `vicinity:SEED`, a bundle file or a plain scenario file.
    #[arg(long)]
    scenario: String,
    /// `fsync:N`, `random:H` or a schedule file; defaults to the bundle's.
    #[arg(long)]
    schedule: Option<String>,
    /// `halt`, `hull:LAMBDA` or an algorithm file; defaults to the bundle's.
    #[arg(long)]
    algo: Option<String>,
    /// `svp`, `greedy` or `none`; defaults to the bundle's.
    #[arg(long)]
    machine: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CheckArgs {
    /// Trace file.
    #[arg(long)]
    trace: PathBuf,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReproName {
    GreedyLemma,
    ColorbasedTheorem,
}

#[derive(Args)]
struct ReproArgs {
    #[arg(value_enum)]
    name: ReproName,
    /// Machine for colorbased-theorem.
    #[arg(long, default_value = "svp")]
    machine: String,
    /// Also write the luminous trace here.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct NecessityArgs {
    /// Template: stationarity, pairwise-alignment, consistency, serializability, naturality or control.
    #[arg(long)]
    scenario: String,
    /// Number of seeds.
    #[arg(long, default_value_t = 1000)]
    seeds: u64,
    /// First seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
    /// Also write the per-seed samples here.
    #[arg(long)]
    samples_out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonSimpleRoute(_) => Failure::Internal(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn emit<T: Serialize>(value: &T, output: &Output) -> Result<(), Failure> {
    let Format::Json = output.format;
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Internal(e.to_string()))?;
    text.push('\n');
    write_text(output.out.as_deref(), &text)
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path, text: &str) -> Result<T, Failure> {
    serde_json::from_str(text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_bundle(spec: &str) -> Result<Bundle, Failure> {
    if let Some(seed) = spec.strip_prefix("vicinity:") {
        let seed = seed
            .parse()
            .map_err(|_| Failure::Input(format!("bad seed in '{spec}'")))?;
        let (scenario, algorithm) = random_vicinity_scenario(seed);
        return Ok(Bundle {
            description: format!("random vicinity scenario {seed}"),
            scenario,
            algorithm,
            schedule: None,
            movement: Movement::NonRigid,
            machine: Some(Machine::Svp),
            condition: None,
        });
    }
    if builtin_names().contains(&spec) {
        return Ok(builtin(spec)?);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Failure::Input(format!(
            "'{spec}' is neither a file nor a built-in scenario ({})",
            builtin_names().join(", ")
        )));
    }
    let text = read(path)?;
    if let Ok(b) = serde_json::from_str::<Bundle>(&text) {
        b.algorithm.validate()?;
        return Ok(b);
    }
    let scenario: Scenario = parse(path, &text)?;
    Ok(Bundle {
        description: String::new(),
        scenario,
        algorithm: AlgorithmSpec::Halt,
        schedule: None,
        movement: Movement::NonRigid,
        machine: None,
        condition: None,
    })
}

fn load_schedule(spec: &str, n: usize, seed: u64) -> Result<Schedule, Failure> {
    if let Some(k) = spec.strip_prefix("fsync:") {
        let k = k.parse().map_err(|_| Failure::Input(format!("bad round count in '{spec}'")))?;
        return Ok(make_fsync_schedule(k, n));
    }
    if let Some(h) = spec.strip_prefix("random:") {
        let h = h.parse().map_err(|_| Failure::Input(format!("bad horizon in '{spec}'")))?;
        return Ok(sample_async_schedule(seed, n, h, &AsyncParams::default())?);
    }
    let path = Path::new(spec);
    let sched: Schedule = parse(path, &read(path)?)?;
    if sched.num_robots() != n {
        return Err(Failure::Input(format!(
            "schedule has {} robots, scenario has {n}",
            sched.num_robots()
        )));
    }
    Ok(sched)
}

fn load_algorithm(spec: &str) -> Result<AlgorithmSpec, Failure> {
    let a = if spec == "halt" {
        AlgorithmSpec::Halt
    } else if let Some(l) = spec.strip_prefix("hull:") {
        let lambda = l.parse().map_err(|_| Failure::Input(format!("bad lambda in '{spec}'")))?;
        AlgorithmSpec::HullContraction { lambda }
    } else {
        let path = Path::new(spec);
        parse(path, &read(path)?)?
    };
    a.validate()?;
    Ok(a)
}

fn parse_machine(s: &str) -> Result<Machine, Failure> {
    s.parse().map_err(|e: Error| Failure::Input(e.to_string()))
}

fn cmd_simulate(a: SimulateArgs) -> Outcome {
    let bundle = load_bundle(&a.scenario)?;
    let n = bundle.scenario.num_robots();
    let schedule = match (&a.schedule, &bundle.schedule) {
        (Some(s), _) => load_schedule(s, n, a.seed)?,
        (None, Some(s)) => s.clone(),
        (None, None) => return Err(Failure::Input("no schedule given and the scenario has none".into())),
    };
    let algorithm = match &a.algo {
        Some(s) => load_algorithm(s)?,
        None => bundle.algorithm.clone(),
    };
    let machine = match a.machine.as_deref() {
        Some("none") => None,
        Some(m) => Some(parse_machine(m)?),
        None => bundle.machine,
    };
    let adversary = Adversary {
        seed: a.seed,
        mode: match a.mode {
            Some(Mode::Rigid) => Movement::Rigid,
            Some(Mode::Nonrigid) => Movement::NonRigid,
            None => bundle.movement,
        },
    };
    let trace = match machine {
        Some(m) => run_synchronized(&bundle.scenario, &algorithm, &schedule, &adversary, m)?,
        None => simulate(
            &bundle.scenario,
            &schedule,
            &mut AlgorithmController::new(algorithm),
            &adversary,
        )?,
    };
    emit(&trace, &a.output)?;
    Ok(0)
}

fn load_trace(path: &Path) -> Result<Trace, Failure> {
    let trace: Trace = parse(path, &read(path)?)?;
    if trace.schema != SCHEMA {
        return Err(Failure::Input(format!("unsupported trace schema {}", trace.schema)));
    }
    verify_trace(&trace).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Ok(trace)
}

/// The trace the conditions apply to: the accepted core of a luminous run.
fn core_of(trace: Trace) -> Result<(Trace, bool), Failure> {
    if trace.is_luminous() {
        Ok((extract_core(&trace)?.1, true))
    } else {
        Ok((trace, false))
    }
}

fn report_code(r: &ConditionReport) -> u8 {
    if r.all_pass() {
        return 0;
    }
    let statuses = [
        r.stationary.status,
        r.pairwise_aligned.status,
        r.consistent.status,
        r.serializable.status,
        r.natural.status,
    ];
    if statuses.contains(&Status::Fail) {
        1
    } else {
        3
    }
}

#[derive(Serialize)]
struct CheckOutput {
    schema: u32,
    core_extracted: bool,
    all_pass: bool,
    report: ConditionReport,
}

fn cmd_check(a: CheckArgs) -> Outcome {
    let (trace, core_extracted) = core_of(load_trace(&a.trace)?)?;
    let analysis = ConcurrencyAnalysis::new(&trace);
    let report = check_all_with_analysis(&trace, &analysis, a.budget);
    let code = report_code(&report);
    emit(
        &CheckOutput {
            schema: SCHEMA,
            core_extracted,
            all_pass: report.all_pass(),
            report,
        },
        &a.output,
    )?;
    Ok(code)
}

#[derive(Serialize)]
struct SynthesisOutput {
    schema: u32,
    core_extracted: bool,
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<ConditionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    plan: Option<SsyncPlan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    similarity: Option<Similarity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    replay: Option<Trace>,
}

fn cmd_synthesize(a: CheckArgs) -> Outcome {
    let (trace, core_extracted) = core_of(load_trace(&a.trace)?)?;
    let analysis = ConcurrencyAnalysis::new(&trace);
    let report = check_all_with_analysis(&trace, &analysis, a.budget);
    let order = match (&report.natural_order, report.all_pass()) {
        (Some(order), true) => order.clone(),
        _ => {
            let code = report_code(&report);
            emit(
                &SynthesisOutput {
                    schema: SCHEMA,
                    core_extracted,
                    verdict: "refused",
                    report: Some(report),
                    plan: None,
                    similarity: None,
                    replay: None,
                },
                &a.output,
            )?;
            return Ok(code);
        }
    };
    let plan = build_plan(&trace, &analysis, &order)?;
    let replay = replay_plan(&trace.scenario, &plan)?;
    let similarity = similar(&trace, &replay)?;
    let ok = similarity.similar;
    emit(
        &SynthesisOutput {
            schema: SCHEMA,
            core_extracted,
            verdict: if ok { "similar" } else { "not_similar" },
            report: None,
            plan: Some(plan),
            similarity: Some(similarity),
            replay: Some(replay),
        },
        &a.output,
    )?;
    // a passing trace whose replay diverges contradicts the construction
    Ok(if ok { 0 } else { 3 })
}

fn cmd_repro(a: ReproArgs) -> Outcome {
    let (report, trace) = match a.name {
        ReproName::GreedyLemma => repro_greedy_lemma()?,
        ReproName::ColorbasedTheorem => repro_colorbased(parse_machine(&a.machine)?)?,
    };
    if let Some(p) = &a.trace_out {
        let text = serde_json::to_string_pretty(&trace).map_err(|e| Failure::Internal(e.to_string()))? + "\n";
        write_text(Some(p), &text)?;
    }
    emit(&report, &a.output)?;
    Ok(if report.pass { 0 } else { 1 })
}

fn cmd_necessity(a: NecessityArgs) -> Outcome {
    if a.seeds == 0 {
        return Err(Failure::Input("--seeds must be positive".into()));
    }
    let seeds: Vec<u64> = (a.seed..a.seed + a.seeds).collect();
    let (report, samples) = necessity(&a.scenario, &seeds, a.budget)?;
    if let Some(p) = &a.samples_out {
        let text = serde_json::to_string_pretty(&json!({ "schema": SCHEMA, "samples": samples }))
            .map_err(|e| Failure::Internal(e.to_string()))?
            + "\n";
        write_text(Some(p), &text)?;
    }
    emit(&report, &a.output)?;
    Ok(if report.found_when_materialized > 0 {
        1
    } else if report.inconclusive_when_materialized * 20 >= report.materialized.max(1) {
        3
    } else {
        0
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Check(a) => cmd_check(a),
        Command::Synthesize(a) => cmd_synthesize(a),
        Command::Repro(a) => cmd_repro(a),
        Command::Necessity(a) => cmd_necessity(a),
    };
    match r {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
