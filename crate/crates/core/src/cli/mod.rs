//! Batch front end: instance files in, JSON reports out.
//!
//! Exit codes: 0 pass, 1 fail, 2 inconclusive, 3 input or schema error,
//! 4 numerical failure.

pub mod codec;
pub mod commands;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub use commands::{execute, Command, Config, Instance, Outcome, SCHEMA};

use crate::error::Error;
use crate::seqspace::{ClosedForm, ModelSpace, NullSeq, SequenceModel, Term, Vector};
use crate::Verdict;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

pub fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Pass => EXIT_PASS,
        Verdict::Fail => EXIT_FAIL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

pub fn error_code(e: &Error) -> i32 {
    match e {
        Error::NumericalFailure { .. }
        | Error::InvariantViolation(_)
        | Error::CapExceeded { .. }
        | Error::RankBudget { .. }
        | Error::UnsupportedOperator(_) => EXIT_NUMERICAL,
        _ => EXIT_INPUT,
    }
}

/// Sorted keys, floats as `{:.16e}`, integers verbatim, no whitespace.
pub fn canonical_json(v: &Value) -> String {
    let mut out = String::new();
    write_canonical(v, &mut out);
    out
}

fn write_canonical(v: &Value, out: &mut String) {
    match v {
        Value::Null | Value::Bool(_) | Value::String(_) => out.push_str(&v.to_string()),
        Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                out.push_str(&n.to_string());
            } else {
                let _ = write!(out, "{:.16e}", n.as_f64().unwrap_or(f64::NAN));
            }
        }
        Value::Array(items) => {
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(x, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_canonical(&map[k], out);
            }
            out.push('}');
        }
    }
}

pub fn digest(inst: &Instance) -> String {
    let v = serde_json::to_value(inst).unwrap_or(Value::Null);
    Sha256::digest(canonical_json(&v).as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// A finished run: the JSON report, tabular rows and the exit code.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: Value,
    pub rows: Vec<std::collections::BTreeMap<String, Value>>,
    pub code: i32,
}

/// Runs a validated instance; errors become an error report with exit 3 or 4.
pub fn run_instance(inst: &Instance) -> RunOutput {
    let start = Instant::now();
    let mut report = json!({
        "schema": SCHEMA,
        "command": inst.command.as_str(),
        "digest": digest(inst),
        "version": env!("CARGO_PKG_VERSION"),
        "config": serde_json::to_value(&inst.config).unwrap_or(Value::Null),
    });
    let (code, rows) = match execute(inst) {
        Ok(Outcome { verdict, result, rows }) => {
            report["verdict"] = json!(verdict.as_str());
            report["result"] = result;
            (verdict_code(verdict), rows)
        }
        Err(e) => {
            report["verdict"] = json!("error");
            report["error"] = json!(e.to_string());
            (error_code(&e), Vec::new())
        }
    };
    report["wall_time_ms"] = json!(start.elapsed().as_millis() as u64);
    RunOutput { report, rows, code }
}

/// Parses a full instance, rejecting unknown fields and foreign schemas.
pub fn parse_instance(text: &str) -> Result<Instance, String> {
    let inst: Instance = serde_json::from_str(text).map_err(|e| format!("instance: {e}"))?;
    inst.validate().map_err(|e| e.to_string())?;
    Ok(inst)
}

/// Names accepted by [`fixture_instance`].
pub const FIXTURES: &[&str] = &[
    "golden-pair",
    "trig-circle",
    "matrix-tower",
    "interval-restriction",
    "trig-fejer",
    "completion-demo",
    "geometric-cauchy",
    "geometric-truncation",
];

fn half_tail() -> Vector {
    Vector::closed(ClosedForm::geometric(1.0, 0.5))
}

/// A ready-made instance for each named fixture.
pub fn fixture_instance(name: &str) -> Result<Instance, Error> {
    let cfg = Config::default();
    let inst = match name {
        "golden-pair" => Instance::new(
            Command::Jsr,
            json!({ "generators": [[[1, 1], [0, 1]], [[1, 0], [1, 1]]] }),
            Config { depth: Some(12), gap: Some(1e-3), ..cfg },
        ),
        "trig-circle" | "matrix-tower" | "interval-restriction" => Instance::new(Command::Isoradial, json!({ "fixture": name }), cfg),
        "trig-fejer" => Instance::new(Command::Apple, json!({ "fixture": name }), cfg),
        "completion-demo" => {
            let partial = SequenceModel::partial_sums(half_tail());
            let shifted = SequenceModel { prefix: Vec::new(), terms: vec![Term::Truncation { vector: half_tail(), a: 1, shift: 3 }] };
            let quarter = SequenceModel::partial_sums(Vector::closed(ClosedForm::geometric(1.0, 0.25)));
            let eps = NullSeq::geometric(1.0, 0.5);
            let elements: Vec<Value> = [partial, shifted, quarter].into_iter().map(|s| json!({ "sequence": s, "disk": 0, "eps": eps })).collect();
            Instance::new(Command::Complete, json!({ "space": ModelSpace::l1_finite_support(), "elements": elements }), cfg)
        }
        "geometric-cauchy" => Instance::new(
            Command::Cauchy,
            json!({
                "space": ModelSpace::l1_finite_support(),
                "sequence": SequenceModel::partial_sums(half_tail()),
                "eps": NullSeq::geometric(1.0, 0.5),
            }),
            cfg,
        ),
        "geometric-truncation" => Instance::new(
            Command::Approx,
            json!({
                "gauge": { "kind": "l2" },
                "set": crate::finrank::CompactSetModel::geometric(1.0, 0.5)?,
                "family": { "kind": "truncations" },
            }),
            Config { tol: Some(1e-3), ..cfg },
        ),
        _ => return Err(Error::invalid(format!("unknown fixture {name:?}; known: {}", FIXTURES.join(", ")))),
    };
    Ok(inst)
}

#[derive(Parser, Debug)]
#[command(name = "borno", version, about = "Certified spectral radius, isoradiality and completion checks")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Args, Debug, Default, Clone)]
pub struct GlobalArgs {
    /// Report path; stdout if absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write tabular fields as CSV.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    #[arg(long, global = true, env = "BORNO_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long, global = true)]
    pub gap: Option<f64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Samples per set size, or sampled points for approx.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
}

impl GlobalArgs {
    fn config(&self) -> Config {
        Config { depth: self.depth, gap: self.gap, tol: self.tol, seed: self.seed, samples: self.samples, tgrid: None }
    }
}

#[derive(Subcommand, Debug)]
pub enum Sub {
    /// Run a full instance file.
    Run {
        #[arg(long)]
        input: PathBuf,
    },
    /// Joint spectral radius bracket of a finite set.
    Jsr {
        #[arg(long)]
        input: PathBuf,
    },
    /// Submultiplicative hull of a scaled set.
    Hull {
        #[arg(long)]
        input: PathBuf,
    },
    /// Isoradiality certificate for a fixture or a map file.
    Isoradial {
        #[arg(long, conflicts_with = "input")]
        fixture: Option<String>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Isoradiality, σ-rates and homotopy certificate.
    Apple {
        #[arg(long, default_value = "trig-fejer")]
        fixture: String,
        #[arg(long)]
        sigmas: Option<PathBuf>,
        #[arg(long)]
        h: Option<PathBuf>,
        #[arg(long)]
        tgrid: Option<usize>,
    },
    /// Cauchy or convergence decision for a closed-form sequence.
    Cauchy {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        seq: PathBuf,
        #[arg(long, default_value_t = 0)]
        disk: usize,
        /// Null sequence as JSON text or a path to a JSON file.
        #[arg(long)]
        eps: String,
        /// Limit vector file; switches to a convergence check.
        #[arg(long)]
        limit: Option<PathBuf>,
    },
    /// Completeness decision and completion arithmetic.
    Complete {
        #[arg(long)]
        space: PathBuf,
        /// Optional completion elements `[{sequence, disk, eps}]`.
        #[arg(long)]
        seq: Option<PathBuf>,
    },
    /// Uniform convergence of operator families on a compact set.
    Approx {
        /// Target gauge file.
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        set: PathBuf,
        #[arg(long)]
        ops: PathBuf,
        #[arg(long)]
        limit: Option<PathBuf>,
    },
    /// Write a ready-made instance file.
    Fixture { name: String },
}

struct InputError(String);

fn read_json(path: &Path) -> Result<Value, InputError> {
    let text = fs::read_to_string(path).map_err(|e| InputError(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| InputError(format!("{}: {e}", path.display())))
}

/// Inline JSON if it parses, otherwise a path.
fn json_or_path(s: &str) -> Result<Value, InputError> {
    match serde_json::from_str(s) {
        Ok(v) => Ok(v),
        Err(_) => read_json(Path::new(s)),
    }
}

/// A full instance of the expected command, or a bare payload.
fn instance_or_payload(path: &Path, command: Command, cfg: Config) -> Result<Instance, InputError> {
    let v = read_json(path)?;
    if v.get("schema").is_some() {
        let inst: Instance = serde_json::from_value(v).map_err(|e| InputError(format!("instance: {e}")))?;
        if inst.command != command {
            return Err(InputError(format!("instance is for {:?}, not {:?}", inst.command.as_str(), command.as_str())));
        }
        let config = inst.config.merged(&cfg);
        Ok(Instance { config, ..inst })
    } else {
        Ok(Instance::new(command, v, cfg))
    }
}

fn build_instance(sub: &Sub, cfg: Config) -> Result<Instance, InputError> {
    let inst = match sub {
        Sub::Run { input } => {
            let text = fs::read_to_string(input).map_err(|e| InputError(format!("{}: {e}", input.display())))?;
            let inst = parse_instance(&text).map_err(InputError)?;
            let config = inst.config.merged(&cfg);
            Instance { config, ..inst }
        }
        Sub::Jsr { input } => instance_or_payload(input, Command::Jsr, cfg)?,
        Sub::Hull { input } => instance_or_payload(input, Command::Hull, cfg)?,
        Sub::Isoradial { fixture, input } => {
            match (fixture, input) {
                (Some(name), None) => Instance::new(Command::Isoradial, json!({ "fixture": name }), cfg),
                (None, Some(path)) => {
                    let v = read_json(path)?;
                    let payload = if v.get("source").is_some() { json!({ "map": v }) } else { v };
                    Instance::new(Command::Isoradial, payload, cfg)
                }
                _ => return Err(InputError("isoradial needs --fixture or --input".into())),
            }
        }
        Sub::Apple { fixture, sigmas, h, tgrid } => {
            let mut payload = json!({ "fixture": fixture });
            if let Some(p) = sigmas {
                payload["sigmas"] = read_json(p)?;
            }
            if let Some(p) = h {
                payload["h"] = read_json(p)?;
            }
            Instance::new(Command::Apple, payload, Config { tgrid: *tgrid, ..cfg })
        }
        Sub::Cauchy { space, seq, disk, eps, limit } => {
            let mut payload = json!({ "space": read_json(space)?, "sequence": read_json(seq)?, "disk": disk, "eps": json_or_path(eps)? });
            if let Some(p) = limit {
                payload["limit"] = read_json(p)?;
            }
            Instance::new(Command::Cauchy, payload, cfg)
        }
        Sub::Complete { space, seq } => {
            let mut payload = json!({ "space": read_json(space)? });
            if let Some(p) = seq {
                payload["elements"] = read_json(p)?;
            }
            Instance::new(Command::Complete, payload, cfg)
        }
        Sub::Approx { space, set, ops, limit } => {
            let mut payload = json!({ "gauge": read_json(space)?, "set": read_json(set)?, "family": read_json(ops)? });
            if let Some(p) = limit {
                payload["limit"] = read_json(p)?;
            }
            Instance::new(Command::Approx, payload, cfg)
        }
        Sub::Fixture { .. } => unreachable!("fixtures are written, not run"),
    };
    inst.validate().map_err(|e| InputError(e.to_string()))?;
    Ok(inst)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), InputError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| InputError(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

/// Flattens rows to CSV with the union of their keys as header.
pub fn rows_to_csv(rows: &[std::collections::BTreeMap<String, Value>]) -> Result<String, String> {
    let mut header: Vec<&String> = rows.iter().flat_map(|r| r.keys()).collect();
    header.sort();
    header.dedup();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).map_err(|e| e.to_string())?;
    for r in rows {
        let cells = header.iter().map(|k| match r.get(*k) {
            None | Some(Value::Null) => String::new(),
            Some(Value::String(s)) => s.clone(),
            Some(v) => v.to_string(),
        });
        w.write_record(cells).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

fn dispatch(cli: &Cli) -> i32 {
    let g = &cli.global;
    if let Sub::Fixture { name } = &cli.command {
        return match fixture_instance(name) {
            Ok(inst) => {
                let text = serde_json::to_string_pretty(&inst).expect("instances serialize");
                match write_out(g.out.as_deref(), &text) {
                    Ok(()) => EXIT_PASS,
                    Err(InputError(m)) => fail_input(&m),
                }
            }
            Err(e) => fail_input(&e.to_string()),
        };
    }
    let inst = match build_instance(&cli.command, g.config()) {
        Ok(i) => i,
        Err(InputError(m)) => return fail_input(&m),
    };
    let out = run_instance(&inst);
    if let Some(e) = out.report.get("error") {
        eprintln!("borno: {}", e.as_str().unwrap_or_default());
    }
    let text = serde_json::to_string_pretty(&out.report).expect("reports serialize");
    if let Err(InputError(m)) = write_out(g.out.as_deref(), &text) {
        return fail_input(&m);
    }
    if let Some(path) = &g.csv {
        let written = rows_to_csv(&out.rows).and_then(|c| fs::write(path, c).map_err(|e| e.to_string()));
        if let Err(m) = written {
            return fail_input(&m);
        }
    }
    out.code
}

fn fail_input(msg: &str) -> i32 {
    eprintln!("borno: {msg}");
    EXIT_INPUT
}

/// Parses the process arguments and runs; returns the exit code.
pub fn main_entry() -> i32 {
    main_with_args(std::env::args_os())
}

pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let threads = cli.global.threads.unwrap_or(0);
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(|| dispatch(&cli)),
        Err(e) => fail_input(&format!("thread pool: {e}")),
    }
}
