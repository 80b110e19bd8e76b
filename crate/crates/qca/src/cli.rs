//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 resource limit
//! (dense cap), 4 verification failure. Every JSON report carries a
//! `fingerprint`: the SHA-256 of the parsed configuration.
//!
//! `--config file.json` supplies arguments as a JSON object whose keys are
//! flag names (`"refine_evals": 100` ≡ `--refine-evals 100`, arrays are
//! comma-joined, `true` enables a switch) plus an optional `"command"`.
//! Flags given on the command line take precedence.

use crate::circuit::{compile_margolus, compile_rule, CircuitError};
use crate::cone::ConeSim;
use crate::lattice::{cone_size, l1_ball, LatticeSpec};
use crate::ops::{CMat, C64};
use crate::rules::{
    cnot_rule, local_rule_matrix, rule_from_json, verify_local_rule, LocalRule, RuleParams,
};
use crate::statevector::{check_cap, SimError};
use crate::support_algebra::{
    check_quadrant_commutation, classify_configuration, index_from_supports, quadrant_supports,
    SupportError,
};
use crate::sweeps::{self, hex, SweepError, SweepMode, SweepSpec, Strategy};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

const SUBCOMMANDS: [&str; 8] = [
    "simulate",
    "sweep",
    "clifford-sweep",
    "index",
    "classify",
    "verify",
    "cone",
    "emit-circuit",
];

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "qca",
    version,
    about = "Simulate and classify qubit quantum cellular automata on Z^s",
    args_override_self = true
)]
pub struct Cli {
    /// JSON file with arguments (see module docs).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Interpret all angles as degrees.
    #[arg(long, global = true)]
    pub degrees: bool,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Origin entropy after t steps from a product input state.
    Simulate(SimulateArgs),
    /// Optimised entropy surfaces over a two-parameter grid (CSV + JSON).
    Sweep(SweepArgs),
    /// Dense vs stabilizer entropies at every Clifford point.
    CliffordSweep(CliffordSweepArgs),
    /// Index vector of a rule, e.g. "2,1".
    Index(RuleArgs),
    /// Neighbourhood support configuration, quadrant checks and index.
    Classify(RuleArgs),
    /// Well-posedness of a local rule.
    Verify(VerifyArgs),
    /// Causal cone size.
    Cone(ConeArgs),
    /// Circuit JSON for one or more steps.
    EmitCircuit(EmitArgs),
}

#[derive(Debug, Args, Serialize, Clone)]
pub struct RuleArgs {
    /// Rule parameter JSON file.
    #[arg(long)]
    pub rule: Option<PathBuf>,
    /// Lattice dimension (inferred from --phi or --shift when omitted).
    #[arg(long)]
    pub s: Option<usize>,
    /// Controlled-phase angles, one per axis.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub phi: Option<Vec<f64>>,
    /// Rotation angles θ1,θ2,θ3.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub theta: Option<Vec<f64>>,
    /// Shift vector y (makes a shift rule).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub shift: Option<Vec<i64>>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
    #[arg(long)]
    pub t: usize,
    /// Input state angles δ1,δ2,δ3.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub delta: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    PhiTheta,
    PhiPhi,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyArg {
    Product,
    Staged,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value = "phi-theta")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    #[arg(long)]
    pub t: usize,
    #[arg(long, default_value_t = 25)]
    pub resolution: usize,
    /// Grid range start (radians unless --degrees).
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub lo: f64,
    /// Grid range end; defaults to 2π.
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 13)]
    pub angle_points: usize,
    #[arg(long, value_enum, default_value = "product")]
    pub strategy: StrategyArg,
    #[arg(long)]
    pub no_refine: bool,
    #[arg(long, default_value_t = 200)]
    pub refine_evals: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Compute one point per symmetry orbit and mirror the rest.
    #[arg(long)]
    pub symmetry: bool,
    /// Output CSV path; the JSON sidecar is written next to it.
    #[arg(long)]
    pub out: PathBuf,
    /// Keep rows already recorded for the same spec.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Args, Serialize)]
pub struct CliffordSweepArgs {
    #[arg(long, value_enum, default_value = "phi-theta")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    #[arg(long)]
    pub t: usize,
    /// Grid CSV (sweep schema plus `s_clifford`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-point CSV with every evaluated Clifford point.
    #[arg(long)]
    pub points_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
    /// Raw neighbourhood unitary: {"s": n, "re": [[..]], "im": [[..]]}.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    /// Built-in test rule.
    #[arg(long, value_enum)]
    pub builtin: Option<BuiltinArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BuiltinArg {
    Cnot,
}

#[derive(Debug, Args, Serialize)]
pub struct ConeArgs {
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub t: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircuitKind {
    Step,
    Margolus,
}

#[derive(Debug, Args, Serialize)]
pub struct EmitArgs {
    #[command(flatten)]
    pub rule: RuleArgs,
    /// Periodic lattice extents (one value is used for every axis).
    #[arg(long, value_delimiter = ',', default_value = "4")]
    pub extent: Vec<usize>,
    #[arg(long, value_enum, default_value = "step")]
    pub kind: CircuitKind,
    /// Quadrant sign vector for the Margolus second layer.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub q: Option<Vec<i64>>,
    /// Number of repeated steps.
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Resource(String),
    Verification(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Resource(_) => 3,
            Failure::Verification(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Resource(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::TooManyQubits { .. } => Failure::Resource(e.to_string()),
            _ => Failure::Verification(e.to_string()),
        }
    }
}

impl From<SweepError> for Failure {
    fn from(e: SweepError) -> Self {
        match e {
            SweepError::Sim(e) => e.into(),
            SweepError::Io { .. } => Failure::Resource(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<SupportError> for Failure {
    fn from(e: SupportError) -> Self {
        match e {
            SupportError::ClosureOverflow { .. } => Failure::Resource(e.to_string()),
            _ => Failure::Verification(e.to_string()),
        }
    }
}

impl From<CircuitError> for Failure {
    fn from(e: CircuitError) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Parse arguments (including `--config` expansion) and run. Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(f) => {
            eprintln!("error: {}", f.message());
            return f.code();
        }
    };
    let mut cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if cli.degrees {
        to_radians(&mut cli.command);
        cli.degrees = false;
    }
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads.max(1))
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 3;
        }
    };
    match pool.install(|| dispatch(&cli)) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.code()
        }
    }
}

fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>, Failure> {
    let pos = args
        .iter()
        .position(|a| a == "--config" || a.to_string_lossy().starts_with("--config="));
    let Some(pos) = pos else {
        return Ok(args);
    };
    let arg = args[pos].to_string_lossy().into_owned();
    let path = match arg.strip_prefix("--config=") {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(
            args.get(pos + 1)
                .ok_or_else(|| Failure::Usage("--config needs a path".into()))?,
        ),
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Failure::Usage("config must be a JSON object".into()))?;

    let mut tokens: Vec<OsString> = Vec::new();
    for (key, v) in obj {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        let scalar = |v: &Value| -> Result<String, Failure> {
            match v {
                Value::String(s) => Ok(s.clone()),
                Value::Number(n) => Ok(n.to_string()),
                _ => Err(Failure::Usage(format!("config key {key}: unsupported value {v}"))),
            }
        };
        match v {
            Value::Null | Value::Bool(false) => {}
            Value::Bool(true) => tokens.push(flag.into()),
            Value::Array(items) => {
                let parts: Vec<String> = items.iter().map(scalar).collect::<Result<_, _>>()?;
                tokens.push(flag.into());
                tokens.push(parts.join(",").into());
            }
            other => {
                tokens.push(flag.into());
                tokens.push(scalar(other)?.into());
            }
        }
    }

    let mut rest = args;
    rest.drain(pos..(pos + if arg.contains('=') { 1 } else { 2 }).min(rest.len()));
    let sub = rest
        .iter()
        .position(|a| SUBCOMMANDS.iter().any(|s| a == *s));
    let sub = match sub {
        Some(i) => i,
        None => {
            let cmd = obj
                .get("command")
                .and_then(Value::as_str)
                .ok_or_else(|| Failure::Usage("no subcommand given".into()))?;
            rest.insert(1.min(rest.len()), cmd.into());
            1.min(rest.len() - 1)
        }
    };
    let tail = rest.split_off(sub + 1);
    rest.extend(tokens);
    rest.extend(tail);
    Ok(rest)
}

fn to_radians(cmd: &mut Command) {
    let conv = |v: &mut Option<Vec<f64>>| {
        if let Some(v) = v {
            v.iter_mut().for_each(|a| *a = a.to_radians());
        }
    };
    let rule = |r: &mut RuleArgs| {
        conv(&mut r.phi);
        conv(&mut r.theta);
    };
    match cmd {
        Command::Simulate(a) => {
            rule(&mut a.rule);
            conv(&mut a.delta);
        }
        Command::Sweep(a) => {
            a.lo = a.lo.to_radians();
            a.hi = a.hi.map(f64::to_radians);
        }
        Command::Index(r) | Command::Classify(r) => rule(r),
        Command::Verify(a) => rule(&mut a.rule),
        Command::EmitCircuit(a) => rule(&mut a.rule),
        Command::CliffordSweep(_) | Command::Cone(_) => {}
    }
}

fn fingerprint(cli: &Cli) -> String {
    let json = serde_json::to_string(cli).expect("config serialises");
    hex(&Sha256::digest(json.as_bytes()))
}

/// Print to stdout, ignoring a closed pipe.
fn out(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn emit(report: Value) {
    out(&serde_json::to_string_pretty(&report).expect("report serialises"));
}

fn dispatch(cli: &Cli) -> Outcome {
    let fp = fingerprint(cli);
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a, &fp),
        Command::Sweep(a) => cmd_sweep(a, &fp),
        Command::CliffordSweep(a) => cmd_clifford_sweep(a, &fp),
        Command::Index(r) => cmd_index(r),
        Command::Classify(r) => cmd_classify(r, &fp),
        Command::Verify(a) => cmd_verify(a, &fp),
        Command::Cone(a) => cmd_cone(a, &fp),
        Command::EmitCircuit(a) => cmd_emit(a, &fp),
    }
}

fn triple(v: &Option<Vec<f64>>, what: &str) -> Result<[f64; 3], Failure> {
    match v {
        None => Ok([0.0; 3]),
        Some(v) => <[f64; 3]>::try_from(v.as_slice())
            .map_err(|_| Failure::Usage(format!("--{what} needs exactly 3 values"))),
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

pub fn rule_params(a: &RuleArgs) -> Result<RuleParams, Failure> {
    let params = if let Some(path) = &a.rule {
        rule_from_json(&read_file(path)?)
            .map_err(|e| Failure::Usage(format!("bad rule file {}: {e}", path.display())))?
    } else {
        let theta = triple(&a.theta, "theta")?;
        if let Some(y) = &a.shift {
            RuleParams::shift(y.clone(), theta)
        } else if let Some(phi) = &a.phi {
            RuleParams::cphase(phi.clone(), theta)
        } else if let Some(s) = a.s {
            RuleParams::cphase(vec![0.0; s], theta)
        } else {
            return Err(Failure::Usage(
                "give a rule via --rule, --phi, --shift or --s".into(),
            ));
        }
    };
    if let Some(s) = a.s {
        if s != params.s {
            return Err(Failure::Usage(format!(
                "--s {s} does not match the rule dimension {}",
                params.s
            )));
        }
    }
    params
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(params)
}

fn local_rule(a: &RuleArgs) -> Result<LocalRule, Failure> {
    let params = rule_params(a)?;
    local_rule_matrix(&params).map_err(|e| Failure::Usage(e.to_string()))
}

fn cmd_simulate(a: &SimulateArgs, fp: &str) -> Outcome {
    let start = Instant::now();
    let params = rule_params(&a.rule)?;
    let delta = triple(&a.delta, "delta")?;
    if a.t == 0 {
        return Err(Failure::Usage("--t must be at least 1".into()));
    }
    let cone = cone_size(params.s, a.t);
    check_cap(cone as usize)?;
    let entropy = sweeps::entropy_at(&params, delta, a.t)?;
    let spec = LatticeSpec::cubic(params.s, 2 * a.t + 2).map_err(CircuitError::from)?;
    let depth = compile_rule(&params, &spec)?.depth() * a.t;
    emit(json!({
        "entropy": entropy,
        "cone_sites": cone,
        "depth": depth,
        "wall_time": start.elapsed().as_secs_f64(),
        "fingerprint": fp,
    }));
    Ok(())
}

fn cmd_sweep(a: &SweepArgs, fp: &str) -> Outcome {
    let start = Instant::now();
    let spec = SweepSpec {
        s: a.s,
        t: a.t,
        mode: match a.mode {
            ModeArg::PhiTheta => SweepMode::PhiTheta,
            ModeArg::PhiPhi => SweepMode::PhiPhi,
        },
        resolution: a.resolution,
        lo: a.lo,
        hi: a.hi.unwrap_or(std::f64::consts::TAU),
        delta_samples: a.samples,
        angle_points: a.angle_points,
        strategy: match a.strategy {
            StrategyArg::Product => Strategy::Product,
            StrategyArg::Staged => Strategy::Staged,
        },
        refine: !a.no_refine,
        refine_evals: a.refine_evals,
        seed: a.seed,
        symmetry: a.symmetry,
        only: None,
    };
    let result = sweeps::run_sweep_to_file(&spec, &a.out, a.resume)?;
    emit(json!({
        "rows": result.rows.len(),
        "grid_max": result.grid_max(),
        "evals": result.rows.iter().map(|r| r.evals).sum::<u64>(),
        "csv": a.out,
        "sidecar": sweeps::sidecar_path(&a.out),
        "spec_fingerprint": spec.fingerprint(),
        "wall_time": start.elapsed().as_secs_f64(),
        "fingerprint": fp,
    }));
    Ok(())
}

fn cmd_clifford_sweep(a: &CliffordSweepArgs, fp: &str) -> Outcome {
    if a.s == 0 || a.t == 0 {
        return Err(Failure::Usage("s and t must be at least 1".into()));
    }
    check_cap(cone_size(a.s, a.t) as usize)?;
    let rows = sweeps::clifford_sweep(a.s, a.t).map_err(|e| match e {
        sweeps::CliffordSweepError::Sim(e) => Failure::from(e),
        other => Failure::Verification(other.to_string()),
    })?;
    let write = |path: &Path, text: String| {
        std::fs::write(path, text)
            .map_err(|e| Failure::Resource(format!("cannot write {}: {e}", path.display())))
    };
    let mode = match a.mode {
        ModeArg::PhiTheta => SweepMode::PhiTheta,
        ModeArg::PhiPhi => SweepMode::PhiPhi,
    };
    if mode == SweepMode::PhiPhi && a.s < 2 {
        return Err(Failure::Usage("phi-phi sweeps need s >= 2".into()));
    }
    if let Some(out) = &a.out {
        write(out, sweeps::clifford_grid_csv(&rows, mode))?;
    }
    if let Some(out) = &a.points_out {
        write(out, sweeps::clifford_csv(&rows))?;
    }
    let max_dev = rows
        .iter()
        .map(|r| (r.s_dense - r.s_clifford as f64).abs())
        .fold(0.0, f64::max);
    let pass = max_dev <= 1e-9;
    emit(json!({
        "points": rows.len(),
        "max_deviation": max_dev,
        "pass": pass,
        "fingerprint": fp,
    }));
    if pass {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "dense and stabilizer entropies differ by {max_dev:.3e}"
        )))
    }
}

fn cmd_index(a: &RuleArgs) -> Outcome {
    let rule = local_rule(a)?;
    let supports = quadrant_supports(&rule)?;
    let verdict = check_quadrant_commutation(&supports);
    if !verdict.pass {
        return Err(Failure::Verification(format!(
            "quadrant supports do not commute (norm {:.3e})",
            verdict.max_norm
        )));
    }
    out(&index_from_supports(rule.s, &supports)?.to_string());
    Ok(())
}

fn cmd_classify(a: &RuleArgs, fp: &str) -> Outcome {
    let rule = local_rule(a)?;
    let verdict = verify_local_rule(&rule);
    if !verdict.pass {
        emit(json!({
            "case": "UNVERIFIED",
            "checks": { "verify": verdict },
            "fingerprint": fp,
        }));
        return Err(Failure::Verification("rule fails the well-posedness check".into()));
    }
    let class = classify_configuration(&rule)?;
    let supports = quadrant_supports(&rule)?;
    let comm = check_quadrant_commutation(&supports);
    let index = index_from_supports(rule.s, &supports)?;
    let config = serde_json::to_value(&class.config).expect("config serialises");
    let dims: Vec<Value> = class
        .dims
        .iter()
        .map(|(x, d)| json!({ "x": x, "dim": d }))
        .collect();
    let axes = match &class.config {
        crate::support_algebra::Configuration::CaseII { axes } => json!(axes),
        _ => json!([]),
    };
    emit(json!({
        "case": config["case"],
        "configuration": config,
        "axes": axes,
        "dims": dims,
        "index": index.to_strings(),
        "checks": {
            "verify": { "pass": verdict.pass, "max_norm": verdict.max_norm },
            "quadrant_commutation": comm,
            "quadrant_dims": supports.iter().map(|q| json!({ "q": q.q, "dim": q.algebra.dim() })).collect::<Vec<_>>(),
        },
        "fingerprint": fp,
    }));
    Ok(())
}

#[derive(Deserialize)]
struct RawMatrix {
    s: usize,
    re: Vec<Vec<f64>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
}

fn matrix_rule(path: &Path) -> Result<LocalRule, Failure> {
    let raw: RawMatrix = serde_json::from_str(&read_file(path)?)
        .map_err(|e| Failure::Usage(format!("bad matrix file {}: {e}", path.display())))?;
    let n = raw.re.len();
    let im = raw.im.unwrap_or_else(|| vec![vec![0.0; n]; n]);
    if im.len() != n || raw.re.iter().chain(&im).any(|r| r.len() != n) {
        return Err(Failure::Usage("matrix must be square with matching re/im".into()));
    }
    let w = CMat::from_fn(n, n, |i, j| C64::new(raw.re[i][j], im[i][j]));
    LocalRule::from_matrix(raw.s, w).map_err(|e| Failure::Usage(e.to_string()))
}

fn cmd_verify(a: &VerifyArgs, fp: &str) -> Outcome {
    let rule = match (&a.matrix, a.builtin) {
        (Some(path), _) => matrix_rule(path)?,
        (None, Some(BuiltinArg::Cnot)) => cnot_rule(a.rule.s.unwrap_or(1).max(1)),
        (None, None) => local_rule(&a.rule)?,
    };
    let verdict = verify_local_rule(&rule);
    emit(json!({
        "verdict": if verdict.pass { "PASS" } else { "FAIL" },
        "pass": verdict.pass,
        "max_norm": verdict.max_norm,
        "violations": verdict.violations,
        "fingerprint": fp,
    }));
    if verdict.pass {
        Ok(())
    } else {
        Err(Failure::Verification("local rule is not well posed".into()))
    }
}

fn cmd_cone(a: &ConeArgs, fp: &str) -> Outcome {
    if a.s == 0 {
        return Err(Failure::Usage("--s must be at least 1".into()));
    }
    let size = cone_size(a.s, a.t);
    let within = check_cap(size as usize).is_ok();
    let mut report = json!({
        "s": a.s,
        "t": a.t,
        "cone_sites": size,
        "within_dense_cap": within,
        "fingerprint": fp,
    });
    if size <= 1 << 20 {
        report["enumerated"] = json!(l1_ball(a.s, a.t).len());
    }
    if within && a.t >= 1 {
        report["merged_classes_equal_phi"] =
            json!(ConeSim::new(a.s, a.t)?.class_count(&vec![1.0; a.s]));
    }
    emit(report);
    Ok(())
}

fn cmd_emit(a: &EmitArgs, fp: &str) -> Outcome {
    let params = rule_params(&a.rule)?;
    let extents = match a.extent.as_slice() {
        [e] => vec![*e; params.s],
        e => e.to_vec(),
    };
    let spec = LatticeSpec::new(extents).map_err(CircuitError::from)?;
    let step = match a.kind {
        CircuitKind::Step => compile_rule(&params, &spec)?,
        CircuitKind::Margolus => {
            let q = a.q.clone().unwrap_or_else(|| vec![1; params.s]);
            compile_margolus(&params, &spec, &q)?
        }
    };
    let circuit = step.repeat(a.steps.max(1));
    let body = json!({
        "extents": spec.extents(),
        "depth": circuit.depth(),
        "circuit": circuit.to_json(),
        "fingerprint": fp,
    });
    let text = serde_json::to_string_pretty(&body).expect("circuit serialises");
    match &a.out {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| Failure::Resource(format!("cannot write {}: {e}", path.display())))?,
        None => out(&text),
    }
    Ok(())
}
