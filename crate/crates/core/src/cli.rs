//! Batch front end. One job per invocation; reports are written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::json::{self, HeightJson, PolytopeJson, ReebJson};
use crate::optimizer::{self, SearchOptions};
use crate::reeb::{ReebCalculus, ReebVector};
use crate::report::{self, Tolerance};
use crate::scalar::{format_rational, parse_rational, Rational};
use crate::testconfig::{self, build_total, CalibrationStatus, FsDictionary};

pub const THREADS_ENV: &str = "REEB_EH_THREADS";

#[derive(Debug, Parser)]
#[command(name = "reeb-eh", version, about = "Einstein-Hilbert functional on the Reeb cone of a labelled polytope")]
pub struct Cli {
    /// JSON configuration file; command-line flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report path (stdout when omitted).
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Worker threads (also capped by REEB_EH_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Record wall time in the report (breaks byte-identical output).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Vertices, facets and flags of a polytope.
    Validate(PolytopeArg),
    /// V, S and EH at a Reeb vector.
    Eval(EvalArgs),
    /// Exact gradient and Hessian of EH.
    Derivatives(DerivArgs),
    /// Global minimum of EH on the slice.
    Minimize(SearchArgs),
    /// All critical points found by multi-start.
    CriticalPoints(SearchArgs),
    /// EH along a segment of Reeb vectors.
    RayScan(ScanArgs),
    /// EH of a toric test configuration at parameter s.
    TestconfigEh(TestconfigEhArgs),
    /// Sasaki-Futaki invariant of a toric test configuration.
    TestconfigSf(TestconfigSfArgs),
    /// Run the dictionary calibration gate.
    Calibrate(CalibrateArgs),
    /// Compare two reports field by field.
    Diff(DiffArgs),
}

#[derive(Debug, Args)]
pub struct PolytopeArg {
    #[arg(long)]
    pub polytope: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub polytope: PathBuf,
    /// Reeb vector JSON (defaults to the constant function 1).
    #[arg(long)]
    pub reeb: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DerivArgs {
    #[arg(long)]
    pub polytope: PathBuf,
    #[arg(long)]
    pub reeb: Option<PathBuf>,
    /// Direction for the Futaki pairing.
    #[arg(long)]
    pub zeta: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub polytope: PathBuf,
    /// SearchOptions JSON.
    #[arg(long)]
    pub options: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub starts: Option<usize>,
    /// Extra start points (Reeb vector JSON), repeatable.
    #[arg(long)]
    pub probe: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub polytope: PathBuf,
    #[arg(long)]
    pub from: PathBuf,
    #[arg(long)]
    pub to: PathBuf,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Also write the scan as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TestconfigArgs {
    #[arg(long)]
    pub polytope: PathBuf,
    #[arg(long)]
    pub reeb: Option<PathBuf>,
    /// Height function JSON `{"pieces": [...]}`.
    #[arg(long)]
    pub height: PathBuf,
    /// Fubini-Study dictionary name.
    #[arg(long)]
    pub dictionary: Option<String>,
    /// Output of a previous `calibrate` run.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TestconfigEhArgs {
    #[command(flatten)]
    pub common: TestconfigArgs,
    /// Parameter s as a rational string.
    #[arg(long, allow_hyphen_values = true)]
    pub s: String,
}

#[derive(Debug, Args)]
pub struct TestconfigSfArgs {
    #[command(flatten)]
    pub common: TestconfigArgs,
    /// Step of the finite-difference cross-check.
    #[arg(long)]
    pub ds_step: Option<String>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Dictionary to calibrate (all when omitted).
    #[arg(long)]
    pub dictionary: Option<String>,
}

#[derive(Debug, Args)]
pub struct DiffArgs {
    pub left: PathBuf,
    pub right: PathBuf,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Emit the table as JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

/// Contents of `--config`. Every field is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub starts: Option<usize>,
    pub max_iters: Option<usize>,
    pub grad_tol: Option<f64>,
    pub dedupe_radius: Option<f64>,
    pub threads: Option<usize>,
    pub timing: Option<bool>,
    pub steps: Option<usize>,
    pub dictionary: Option<String>,
    pub ds_step: Option<String>,
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
}

/// What a command produced: a JSON report, plus side files and an exit code.
struct Outcome {
    body: Body,
    side: Vec<(PathBuf, String)>,
    status: i32,
}

enum Body {
    Json(Value),
    Text(String),
}

impl Outcome {
    fn json(v: Value) -> Self {
        Outcome {
            body: Body::Json(v),
            side: Vec::new(),
            status: 0,
        }
    }
}

/// Parses `argv` and runs the job, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    run(cli)
}

pub fn run(cli: Cli) -> i32 {
    let output = cli.output.clone();
    let result = load_config(cli.config.as_deref()).and_then(|config| {
        configure_threads(cli.threads.or(config.threads));
        execute(&cli, &config)
    });
    match result {
        Ok(outcome) => {
            for (path, text) in &outcome.side {
                if let Err(e) = write_atomic(Some(path), text) {
                    return fail(output.as_deref(), &e);
                }
            }
            let text = match outcome.body {
                Body::Json(v) => to_pretty(&v),
                Body::Text(t) => t,
            };
            match write_atomic(output.as_deref(), &text) {
                Ok(()) => outcome.status,
                Err(e) => fail(None, &e),
            }
        }
        Err(e) => fail(output.as_deref(), &e),
    }
}

fn fail(output: Option<&Path>, e: &Error) -> i32 {
    eprintln!("error: {e}");
    let obj = json!({"error": e.code(), "detail": error_detail(e)});
    let _ = write_atomic(output, &to_pretty(&obj));
    1
}

fn error_detail(e: &Error) -> Value {
    match e {
        Error::Parse { line, column, message } => json!({"line": line, "column": column, "message": message}),
        other => Value::String(other.to_string()),
    }
}

fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Writes via a temporary file in the target directory and renames it into
/// place, so readers never see a partial report.
pub fn write_atomic(path: Option<&Path>, text: &str) -> Result<()> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        out.write_all(text.as_bytes())?;
        return Ok(out.flush()?);
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(text.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Ok(serde_json::from_str(&read(p)?)?),
        None => Ok(Config::default()),
    }
}

/// Sizes the global rayon pool. `REEB_EH_THREADS` is an upper bound on
/// whatever was requested.
fn configure_threads(requested: Option<usize>) {
    let cap = std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0);
    let n = match (requested, cap) {
        (Some(r), Some(c)) => Some(r.min(c)),
        (r, c) => r.or(c),
    };
    if let Some(n) = n {
        // Fails only if the pool already exists, e.g. in tests.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_polytope(path: &Path) -> Result<(PolytopeJson, ReebCalculus)> {
    let dto = json::parse_polytope(&read(path)?)?;
    let calc = ReebCalculus::new(dto.build()?);
    Ok((dto, calc))
}

fn load_reeb(path: Option<&Path>, dim: usize) -> Result<ReebJson> {
    let dto = match path {
        Some(p) => json::parse_reeb(&read(p)?)?,
        None => ReebJson::from_reeb(&ReebVector::constant(dim)),
    };
    if dto.a.len() != dim {
        return Err(Error::InvalidInput(format!("Reeb vector has {} slopes, polytope dimension is {dim}", dto.a.len())));
    }
    Ok(dto)
}

fn parse_rat_arg(name: &str, s: &str) -> Result<Rational> {
    parse_rational(s).map_err(|e| Error::InvalidInput(format!("--{name}: {e}")))
}

fn dictionary(flag: Option<&String>, config: &Config) -> Result<FsDictionary> {
    match flag.or(config.dictionary.as_ref()) {
        Some(name) => FsDictionary::parse(name),
        None => Ok(FsDictionary::default()),
    }
}

fn envelope(command: &str, seed: Option<u64>, inputs: Value, result: Value) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("command".into(), json!(command));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("seed".into(), json!(seed));
    m.insert("inputs".into(), inputs);
    m.insert("result".into(), result);
    m
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("serializable")
}

fn execute(cli: &Cli, config: &Config) -> Result<Outcome> {
    let start = Instant::now();
    let timing = cli.timing || config.timing.unwrap_or(false);
    let mut outcome = match &cli.command {
        Command::Validate(a) => {
            let (dto, calc) = load_polytope(&a.polytope)?;
            let result = json::polytope_summary(calc.polytope());
            Outcome::json(Value::Object(envelope("validate", None, json!({"polytope": to_value(&dto)}), result)))
        }
        Command::Eval(a) => eval(a)?,
        Command::Derivatives(a) => derivatives(a)?,
        Command::Minimize(a) => minimize(a, config)?,
        Command::CriticalPoints(a) => critical_points(a, config)?,
        Command::RayScan(a) => ray_scan(a, config)?,
        Command::TestconfigEh(a) => testconfig_eh(a, config)?,
        Command::TestconfigSf(a) => testconfig_sf(a, config)?,
        Command::Calibrate(a) => calibrate(a, config)?,
        Command::Diff(a) => diff(a, config)?,
    };
    if timing {
        if let Body::Json(Value::Object(m)) = &mut outcome.body {
            m.insert("timing".into(), json!({"wall_seconds": start.elapsed().as_secs_f64()}));
        }
    }
    Ok(outcome)
}

fn audit(calc: &ReebCalculus) -> Result<Option<Value>> {
    Ok(optimizer::rectangle_audit(calc)?.as_ref().map(json::rectangle_audit))
}

fn eval(a: &EvalArgs) -> Result<Outcome> {
    let (dto, calc) = load_polytope(&a.polytope)?;
    let reeb = load_reeb(a.reeb.as_deref(), calc.dim())?;
    let chi = reeb.build();
    let report = calc.eh(&chi)?;
    let mut result = json::eh_report(&report);
    let xi0 = calc.eh(&ReebVector::constant(calc.dim()))?;
    let m = result.as_object_mut().expect("object");
    m.insert("min_vertex_value".into(), json::rational(&calc.min_vertex_value(&chi)));
    m.insert("compare_to_xi0".into(), json!(json::ordering(crate::reeb::compare_eh(calc.dim(), &report, &xi0))));
    if let Some(audit) = audit(&calc)? {
        m.insert("rectangle_audit".into(), audit);
    }
    let inputs = json!({"polytope": to_value(&dto), "reeb": to_value(&reeb)});
    Ok(Outcome::json(Value::Object(envelope("eval", None, inputs, result))))
}

fn derivatives(a: &DerivArgs) -> Result<Outcome> {
    let (dto, calc) = load_polytope(&a.polytope)?;
    let reeb = load_reeb(a.reeb.as_deref(), calc.dim())?;
    let chi = reeb.build();
    let mut result = json::derivative_report(&calc.derivatives(&chi)?);
    let mut inputs = json!({"polytope": to_value(&dto), "reeb": to_value(&reeb)});
    if let Some(path) = &a.zeta {
        let zeta = load_reeb(Some(path), calc.dim())?;
        let f = calc.futaki(&chi, &zeta.build())?;
        result["futaki"] = json!({"scaled": json::rational(&f.scaled), "value": f.value});
        inputs["zeta"] = to_value(&zeta);
    }
    Ok(Outcome::json(Value::Object(envelope("derivatives", None, inputs, result))))
}

fn search_options(a: &SearchArgs, config: &Config) -> Result<SearchOptions> {
    let mut o = SearchOptions::default();
    if let Some(v) = config.seed {
        o.seed = v;
    }
    if let Some(v) = config.starts {
        o.starts = v;
    }
    if let Some(v) = config.max_iters {
        o.max_iters = v;
    }
    if let Some(v) = config.grad_tol {
        o.grad_tol = v;
    }
    if let Some(v) = config.dedupe_radius {
        o.dedupe_radius = v;
    }
    if let Some(p) = &a.options {
        o = json::parse_options(&read(p)?)?;
    }
    if let Some(v) = a.seed {
        o.seed = v;
    }
    if let Some(v) = a.starts {
        o.starts = v;
    }
    Ok(o)
}

fn search_inputs(a: &SearchArgs, config: &Config) -> Result<(PolytopeJson, ReebCalculus, SearchOptions, Vec<ReebJson>)> {
    let (dto, calc) = load_polytope(&a.polytope)?;
    let opts = search_options(a, config)?;
    let probes = a.probe.iter().map(|p| load_reeb(Some(p), calc.dim())).collect::<Result<Vec<_>>>()?;
    Ok((dto, calc, opts, probes))
}

fn minimize(a: &SearchArgs, config: &Config) -> Result<Outcome> {
    let (dto, calc, opts, probes) = search_inputs(a, config)?;
    let probe_vecs: Vec<ReebVector> = probes.iter().map(ReebJson::build).collect();
    let search = optimizer::search_minimum(&calc, &opts, &probe_vecs)?;
    if !search.converged {
        return Err(Error::NoConvergence {
            iterations: search.best.iterations,
            grad_norm: search.best.grad_norm,
        });
    }
    let xi0 = calc.eh(&ReebVector::constant(calc.dim()))?;
    let mut result = json!({
        "minimum": json::critical_point(&search.best),
        "runs": search.runs,
        "xi0": json::eh_report(&xi0),
    });
    if let Some(audit) = audit(&calc)? {
        result["rectangle_audit"] = audit;
    }
    let inputs = json!({"polytope": to_value(&dto), "options": to_value(&opts), "probes": to_value(&probes)});
    Ok(Outcome::json(Value::Object(envelope("minimize", Some(opts.seed), inputs, result))))
}

fn critical_points(a: &SearchArgs, config: &Config) -> Result<Outcome> {
    let (dto, calc, opts, probes) = search_inputs(a, config)?;
    let probe_vecs: Vec<ReebVector> = probes.iter().map(ReebJson::build).collect();
    let set = optimizer::find_critical_points(&calc, &opts, &probe_vecs)?;
    let mut result = json::critical_set(&set);
    if let Some(audit) = audit(&calc)? {
        result["rectangle_audit"] = audit;
    }
    let inputs = json!({"polytope": to_value(&dto), "options": to_value(&opts), "probes": to_value(&probes)});
    Ok(Outcome::json(Value::Object(envelope("critical-points", Some(opts.seed), inputs, result))))
}

fn ray_scan(a: &ScanArgs, config: &Config) -> Result<Outcome> {
    let (dto, calc) = load_polytope(&a.polytope)?;
    let from = load_reeb(Some(&a.from), calc.dim())?;
    let to = load_reeb(Some(&a.to), calc.dim())?;
    let steps = a.steps.or(config.steps).unwrap_or(20);
    let rows = optimizer::ray_scan(&calc, &from.build(), &to.build(), steps)?;
    let result = json!({"rows": rows.iter().map(json::scan_row).collect::<Vec<_>>()});
    let inputs = json!({"polytope": to_value(&dto), "from": to_value(&from), "to": to_value(&to), "steps": steps});
    let mut outcome = Outcome::json(Value::Object(envelope("ray-scan", None, inputs, result)));
    if let Some(path) = &a.csv {
        outcome.side.push((path.clone(), json::scan_csv(&rows)));
    }
    Ok(outcome)
}

/// Status of `dict` recorded in a `calibrate` report, or `uncalibrated`.
fn calibration_status(path: Option<&Path>, dict: FsDictionary) -> Result<CalibrationStatus> {
    let Some(path) = path else {
        return Ok(CalibrationStatus::Uncalibrated);
    };
    let report: Value = serde_json::from_str(&read(path)?)?;
    let entries = report["result"]["calibrations"]
        .as_array()
        .ok_or_else(|| Error::SchemaMismatch("calibration report has no result.calibrations".into()))?;
    for e in entries {
        if e["dictionary"] == json!(dict.name()) {
            return Ok(serde_json::from_value(e["status"].clone())?);
        }
    }
    Ok(CalibrationStatus::Uncalibrated)
}

struct TestconfigInputs {
    inputs: Value,
    total: testconfig::TotalPolytope,
    chi: ReebVector,
    dict: FsDictionary,
    status: CalibrationStatus,
}

fn testconfig_inputs(a: &TestconfigArgs, config: &Config) -> Result<TestconfigInputs> {
    let (dto, calc) = load_polytope(&a.polytope)?;
    let reeb = load_reeb(a.reeb.as_deref(), calc.dim())?;
    let height: HeightJson = json::parse_height(&read(&a.height)?)?;
    let h = height.build()?;
    if h.dim() != calc.dim() {
        return Err(Error::InvalidInput(format!("height has dimension {}, polytope {}", h.dim(), calc.dim())));
    }
    let total = build_total(calc.polytope(), &h)?;
    let dict = dictionary(a.dictionary.as_ref(), config)?;
    let status = calibration_status(a.calibration.as_deref(), dict)?;
    let inputs = json!({
        "polytope": to_value(&dto),
        "reeb": to_value(&reeb),
        "height": to_value(&height),
        "dictionary": dict,
    });
    Ok(TestconfigInputs {
        inputs,
        total,
        chi: reeb.build(),
        dict,
        status,
    })
}

fn total_summary(total: &testconfig::TotalPolytope) -> Value {
    json!({
        "h_max": json::rational(total.h_max()),
        "vertices": total.q().vertices().iter().map(|v| v.iter().map(json::rational).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "warnings": total.warnings(),
    })
}

fn testconfig_eh(a: &TestconfigEhArgs, config: &Config) -> Result<Outcome> {
    let t = testconfig_inputs(&a.common, config)?;
    let s = parse_rat_arg("s", &a.s)?;
    let report = t.total.eh_s(&t.chi, &s, t.dict, t.status)?;
    let mut result = json::testconfig_report(&report);
    result["total"] = total_summary(&t.total);
    let mut inputs = t.inputs;
    inputs["s"] = json!(format_rational(&s));
    Ok(Outcome::json(Value::Object(envelope("testconfig-eh", None, inputs, result))))
}

fn testconfig_sf(a: &TestconfigSfArgs, config: &Config) -> Result<Outcome> {
    let t = testconfig_inputs(&a.common, config)?;
    let report = t.total.sasaki_futaki(&t.chi, t.dict, t.status)?;
    let mut result = json::sf_report(&report);
    result["total"] = total_summary(&t.total);
    let step_text = a.ds_step.as_ref().or(config.ds_step.as_ref());
    let step = match step_text {
        Some(s) => parse_rat_arg("ds-step", s)?,
        None => Rational::new(testconfig::DEFAULT_STEP.0.into(), testconfig::DEFAULT_STEP.1.into()),
    };
    // The derivative cross-check is only meaningful for a calibrated dictionary.
    result["ds_check"] = if t.status == CalibrationStatus::Calibrated {
        json::ds_check(&t.total.ds_study(&t.chi, t.dict, &step)?)
    } else {
        json!({"error": Error::Uncalibrated.code(), "detail": Error::Uncalibrated.to_string()})
    };
    let mut inputs = t.inputs;
    inputs["ds_step"] = json!(format_rational(&step));
    Ok(Outcome::json(Value::Object(envelope("testconfig-sf", None, inputs, result))))
}

fn calibrate(a: &CalibrateArgs, config: &Config) -> Result<Outcome> {
    let dicts = match a.dictionary.as_ref().or(config.dictionary.as_ref()) {
        Some(name) => vec![FsDictionary::parse(name)?],
        None => FsDictionary::ALL.to_vec(),
    };
    let runs = dicts.iter().map(|&d| testconfig::calibrate(d)).collect::<Result<Vec<_>>>()?;
    let result = json!({"calibrations": runs.iter().map(json::calibration).collect::<Vec<_>>()});
    let inputs = json!({"dictionaries": dicts});
    Ok(Outcome::json(Value::Object(envelope("calibrate", None, inputs, result))))
}

fn diff(a: &DiffArgs, config: &Config) -> Result<Outcome> {
    let left: Value = serde_json::from_str(&read(&a.left)?)?;
    let right: Value = serde_json::from_str(&read(&a.right)?)?;
    let mut tol = Tolerance::default();
    if let Some(v) = a.rel_tol.or(config.rel_tol) {
        tol.rel = v;
    }
    if let Some(v) = a.abs_tol.or(config.abs_tol) {
        tol.abs = v;
    }
    let d = report::report_diff(&left, &right, tol)?;
    let status = if d.passed { 0 } else { 1 };
    let body = if a.json {
        Body::Json(to_value(&d))
    } else {
        Body::Text(report::render_table(&d))
    };
    Ok(Outcome {
        body,
        side: Vec::new(),
        status,
    })
}
