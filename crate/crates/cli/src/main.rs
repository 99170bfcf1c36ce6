use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use srgeo::existence::{construct_homogeneous_geodesic, verify_eigenconstruction};
use srgeo::go_analysis::{go_verdict, invariant_polynomials, M_PREFIX};
use srgeo::hamiltonian::vertical_field;
use srgeo::homogeneity::{check_homogeneous_with, HomogeneityOptions, Verdict};
use srgeo::integrator::{fmt_float, integrate_horizontal, integrate_vertical_partial, Trajectory};
use srgeo::models::spec_file::ModelFile;
use srgeo::models::{failing_casimirs, load_model_or_file, replay_facts, ModelSpec, MODEL_NAMES};
use srgeo::sampling::MomentumSampler;
use srgeo::structure::validate_parts;
use srgeo::{Error, Momentum};

#[derive(Parser)]
#[command(name = "srgeo", version, about = "Homogeneous geodesics of invariant sub-Riemannian structures")]
struct Cli {
    /// Worker threads for sampling scans (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a bundled model or a JSON model file.
    Validate(ModelArgs),
    /// Integrate the vertical system and write a CSV trajectory.
    Integrate(IntegrateArgs),
    /// Homogeneity certificate for one initial momentum.
    Check(CheckArgs),
    /// Geodesic-orbit analysis.
    Go(GoArgs),
    /// Construct one homogeneous geodesic.
    Exist(OutArgs),
    /// List the bundled models.
    List,
    /// Write a bundled model as a JSON model file.
    Export(OutArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Bundled model name or path to a JSON model file.
    #[arg(long)]
    model: String,
}

#[derive(Args)]
struct OutArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IntegrateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Initial momentum, comma separated: a covector on g or its m-coordinates.
    #[arg(long, allow_hyphen_values = true)]
    p0: Option<String>,
    #[arg(long = "T", default_value_t = 10.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of vector-field samples in the phase portrait.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Number of trajectories in the phase portrait.
    #[arg(long, default_value_t = 8)]
    trajectories: usize,
    /// Also reconstruct the curve in the model's matrix representation.
    #[arg(long)]
    horizontal: bool,
    /// Emit vector-field samples and trajectories on H = 1/2 instead of one trajectory.
    #[arg(long)]
    phase_portrait: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, allow_hyphen_values = true)]
    p0: String,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Report borderline residuals as inconclusive instead of re-solving exactly.
    #[arg(long)]
    no_exact_retry: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GoArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 4)]
    degree_cap: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Failure carrying the process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidStructure(_) => 1,
            Error::HypothesesFail(_) | Error::NoEigenvector(_) => 1,
            Error::NonFinite { .. } => 3,
            _ => 2,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Validate(args) => cmd_validate(&args),
        Command::Integrate(args) => cmd_integrate(&args),
        Command::Check(args) => cmd_check(&args),
        Command::Go(args) => cmd_go(&args),
        Command::Exist(args) => cmd_exist(&args),
        Command::List => cmd_list(),
        Command::Export(args) => cmd_export(&args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(args: &ModelArgs) -> Result<ModelSpec, Failure> {
    Ok(load_model_or_file(&args.model)?)
}

fn parse_vector(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Failure::usage(format!("not a number: {x:?}"))))
        .collect()
}

/// A closed pipe on the reading side ends output without an error.
fn ignore_broken_pipe(r: io::Result<()>) -> io::Result<()> {
    match r {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => other,
    }
}

fn print_stdout(text: &str) -> io::Result<()> {
    ignore_broken_pipe(writeln!(io::stdout().lock(), "{text}"))
}

fn write_json(value: &Value, out: Option<&PathBuf>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    match out {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => print_stdout(&text)?,
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("result types serialize")
}

fn cmd_list() -> CmdResult {
    print_stdout(&MODEL_NAMES.join("\n"))?;
    Ok(0)
}

fn cmd_export(args: &OutArgs) -> CmdResult {
    let spec = load(&args.model)?;
    write_json(&to_json(&ModelFile::from_spec(&spec)), args.out.as_ref())?;
    Ok(0)
}

fn cmd_validate(args: &ModelArgs) -> CmdResult {
    let path = std::path::Path::new(&args.model);
    let (name, mut violations, spec) = if MODEL_NAMES.contains(&args.model.as_str()) || !path.exists() {
        let spec = load(args)?;
        let report = validate_parts(spec.structure.parts());
        let mut v: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
        v.extend(failing_casimirs(&spec).into_iter().map(|c| format!("{c} is not a Casimir of the m-subalgebra")));
        (spec.name.clone(), v, Some(spec))
    } else {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let file = ModelFile::parse(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let report = file.validate();
        let v: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
        let spec = if v.is_empty() { file.to_spec().ok() } else { None };
        (file.name.clone().unwrap_or_else(|| args.model.clone()), v, spec)
    };
    let mut facts = Vec::new();
    if let Some(spec) = &spec {
        for r in replay_facts(spec) {
            if !r.passed {
                violations.push(format!("fact {:?} not reproduced: {}", r.fact.claim, r.detail));
            }
            facts.push(to_json(&r));
        }
    }
    for v in &violations {
        eprintln!("violation: {v}");
    }
    write_json(
        &json!({ "model": name, "valid": violations.is_empty(), "violations": violations, "facts": facts }),
        None,
    )?;
    Ok(if violations.is_empty() { 0 } else { 1 })
}

fn initial_momentum(spec: &ModelSpec, p0: Option<&str>, seed: u64) -> Result<Momentum, Failure> {
    let s = &spec.structure;
    match p0 {
        Some(text) => Ok(s.momentum_from_input(&parse_vector(text)?)?),
        None => Ok(MomentumSampler::new(s).sample(seed, 0)),
    }
}

fn open_output(out: Option<&PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Summary JSON goes to stdout when the CSV goes to a file, and to stderr otherwise.
fn emit_summary(summary: &Value, out: Option<&PathBuf>) -> io::Result<()> {
    let text = serde_json::to_string_pretty(summary).expect("JSON values serialize");
    if out.is_some() {
        print_stdout(&text)
    } else {
        ignore_broken_pipe(writeln!(io::stderr().lock(), "{text}"))
    }
}

fn casimir_drifts(spec: &ModelSpec, traj: &Trajectory) -> Value {
    let map: serde_json::Map<String, Value> =
        spec.casimirs.iter().map(|(name, f)| (name.clone(), json!(traj.max_drift_of(f)))).collect();
    Value::Object(map)
}

fn cmd_integrate(args: &IntegrateArgs) -> CmdResult {
    let spec = load(&args.model)?;
    if !(args.t_end.is_finite() && args.t_end > 0.0) {
        return Err(Failure::usage(format!("T must be positive, got {}", args.t_end)));
    }
    if !(args.step.is_finite() && args.step > 0.0 && args.step <= args.t_end) {
        return Err(Failure::usage(format!("step must lie in (0, T], got {}", args.step)));
    }
    if args.phase_portrait {
        return phase_portrait(&spec, args);
    }
    let s = &spec.structure;
    let p0 = initial_momentum(&spec, args.p0.as_deref(), args.seed)?;
    let run = integrate_vertical_partial(s, &p0, args.t_end, args.step)?;
    let mut traj = run.trajectory;
    if args.horizontal && run.blow_up.is_none() {
        traj = integrate_horizontal(s, &traj)?;
    }
    let mut out = open_output(args.out.as_ref())?;
    ignore_broken_pipe(traj.write_csv(&mut out, &spec.casimirs).and_then(|()| out.flush()))?;
    drop(out);
    let summary = json!({
        "model": spec.name,
        "T": args.t_end,
        "step": args.step,
        "samples": traj.len(),
        "p0": p0.coords(),
        "max_energy_drift": traj.max_energy_drift(),
        "max_casimir_drift": casimir_drifts(&spec, &traj),
        "blow_up": run.blow_up,
    });
    emit_summary(&summary, args.out.as_ref())?;
    match run.blow_up {
        Some(t) => Err(Failure { code: 3, message: format!("non-finite state after t = {t}") }),
        None => Ok(0),
    }
}

fn phase_portrait(spec: &ModelSpec, args: &IntegrateArgs) -> CmdResult {
    let s = &spec.structure;
    let n = s.dim();
    let sampler = MomentumSampler::new(s);
    let mut out = open_output(args.out.as_ref())?;
    let mut header = vec!["kind".to_string(), "id".into(), "t".into()];
    header.extend((1..=n).map(|i| format!("p_{i}")));
    header.extend((1..=n).map(|i| format!("v_{i}")));
    writeln!(out, "{}", header.join(","))?;
    let row = |out: &mut dyn Write, kind: &str, id: usize, t: f64, p: &Momentum| -> io::Result<()> {
        let mut fields = vec![kind.to_string(), id.to_string(), fmt_float(t)];
        fields.extend(p.coords().iter().map(|x| fmt_float(*x)));
        fields.extend(vertical_field(s, p).iter().map(|x| fmt_float(*x)));
        writeln!(out, "{}", fields.join(","))
    };
    for i in 0..args.samples {
        let p = sampler.sample(args.seed, i as u64);
        row(&mut out, "arrow", i, 0.0, &p)?;
    }
    let mut max_drift = 0.0f64;
    let mut blow_up = None;
    for id in 0..args.trajectories {
        let p0 = sampler.sample(args.seed, (args.samples + id) as u64);
        let run = integrate_vertical_partial(s, &p0, args.t_end, args.step)?;
        for (t, p) in run.trajectory.times.iter().zip(&run.trajectory.momenta) {
            row(&mut out, "trajectory", id, *t, p)?;
        }
        max_drift = max_drift.max(run.trajectory.max_energy_drift());
        blow_up = blow_up.or(run.blow_up);
    }
    out.flush()?;
    drop(out);
    let summary = json!({
        "model": spec.name,
        "T": args.t_end,
        "step": args.step,
        "arrows": args.samples,
        "trajectories": args.trajectories,
        "max_energy_drift": max_drift,
        "blow_up": blow_up,
    });
    emit_summary(&summary, args.out.as_ref())?;
    match blow_up {
        Some(t) => Err(Failure { code: 3, message: format!("non-finite state after t = {t}") }),
        None => Ok(0),
    }
}

fn cmd_check(args: &CheckArgs) -> CmdResult {
    if !(args.tol.is_finite() && args.tol > 0.0) {
        return Err(Failure::usage(format!("tolerance must be positive, got {}", args.tol)));
    }
    let spec = load(&args.model)?;
    let s = &spec.structure;
    let p = s.momentum_from_input(&parse_vector(&args.p0)?)?;
    let options = HomogeneityOptions { threshold: args.tol, exact_retry: !args.no_exact_retry };
    let cert = check_homogeneous_with(s, &p, options);
    let mut value = to_json(&cert);
    value["momentum"] = json!(p.coords());
    write_json(&value, args.out.as_ref())?;
    Ok(match cert.verdict {
        Verdict::Homogeneous => 0,
        Verdict::NotHomogeneous => 1,
        Verdict::Inconclusive => 4,
    })
}

fn cmd_go(args: &GoArgs) -> CmdResult {
    if args.samples == 0 {
        return Err(Failure::usage("samples must be positive"));
    }
    let spec = load(&args.model)?;
    let s = &spec.structure;
    let verdict = go_verdict(s, args.degree_cap, args.samples, args.seed);
    let invariants = invariant_polynomials(s, args.degree_cap);
    let mut value = to_json(&verdict);
    value["model"] = json!(spec.name);
    value["invariants"] = json!(invariants
        .polynomials
        .iter()
        .map(|f| f.display_with(M_PREFIX).to_string())
        .collect::<Vec<_>>());
    write_json(&value, args.out.as_ref())?;
    Ok(0)
}

fn cmd_exist(args: &OutArgs) -> CmdResult {
    let spec = load(&args.model)?;
    let s = &spec.structure;
    let result = construct_homogeneous_geodesic(s)?;
    let mut value = to_json(&result);
    value["model"] = json!(spec.name);
    if result.audit.eigenvalue.is_some() {
        let check = verify_eigenconstruction(s, &result)?;
        value["verification"] = to_json(&check);
    }
    write_json(&value, args.out.as_ref())?;
    Ok(0)
}
