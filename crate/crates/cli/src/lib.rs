//! `qfn`: reduce, convert, diagnose and compose network documents.
//!
//! Model documents go to stdout (or `-o`). Failures go to stderr as one JSON
//! object `{"error", "message", "block", "smallest_pivot"}`. Exit status is 0
//! on success, 2 when the requested reduction or conversion does not exist
//! (ill-posed loop, undefined Schur complement, no Stratonovich form), and 1
//! for everything else.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qfn::netlist::{
    build_open_loop, bundled_examples, serialize_spec, slh_payload, strat_payload, REDUCED_NAME,
};
use qfn::network::{representability_report, series_slh, wellposedness};
use qfn::{parse_network, reduce_network, serialize_model, Error, NetworkSpec, Route, Tolerances};

/// Environment variable overriding the default equality tolerance.
pub const TOL_ENV: &str = "QFN_TOL";

#[derive(Debug, Parser)]
#[command(name = "qfn", version, about = "Quantum feedback network reduction in SLH and Stratonovich form")]
struct Cli {
    /// Equality tolerance (overrides QFN_TOL).
    #[arg(long, global = true, value_parser = positive)]
    tol: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reduce a network document to a single component.
    Reduce {
        file: PathBuf,
        #[arg(long, default_value = "ito", value_parser = parse_route)]
        route: Route,
        /// Write the document here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Convert a single-component document between SLH and Stratonovich form.
    Convert {
        file: PathBuf,
        #[arg(long)]
        to: Form,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print well-posedness and representability diagnostics as JSON.
    Check { file: PathBuf },
    /// Series product of two single-component documents; FILE2 is driven by FILE1.
    Series {
        file2: PathBuf,
        file1: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the bundled example documents into a directory.
    Examples {
        #[arg(default_value = ".")]
        dir: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Form {
    Slh,
    Strat,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if t > 0.0 && t.is_finite() => Ok(t),
        _ => Err(format!("{s:?} is not a positive number")),
    }
}

fn parse_route(s: &str) -> Result<Route, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure of one command: a library error, or a plain I/O or usage problem.
enum Failure {
    Core(Error),
    Other { kind: &'static str, message: String },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Other {
        kind: "Io",
        message: format!("{}: {e}", path.display()),
    }
}

impl Failure {
    fn exit_code(&self) -> i32 {
        match self {
            Failure::Core(e) if e.is_undefined_reduction() => 2,
            _ => 1,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Failure::Core(e) => json!({
                "error": e.kind(),
                "message": e.to_string(),
                "block": e.block(),
                "smallest_pivot": e.smallest_pivot(),
            }),
            Failure::Other { kind, message } => json!({
                "error": kind,
                "message": message,
                "block": null,
                "smallest_pivot": null,
            }),
        }
    }
}

fn tolerances(flag: Option<f64>, env: Option<String>) -> Result<Tolerances, Failure> {
    let eq_tol = match (flag, env) {
        (Some(t), _) => Some(t),
        (None, Some(raw)) => Some(positive(raw.trim()).map_err(|message| Failure::Other {
            kind: "InvalidValue",
            message: format!("{TOL_ENV}: {message}"),
        })?),
        (None, None) => None,
    };
    match eq_tol {
        Some(t) => Ok(Tolerances::with_eq_tol(t)?),
        None => Ok(Tolerances::default()),
    }
}

fn read_spec(path: &Path, tol: &Tolerances) -> Result<NetworkSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    Ok(parse_network(&text, tol)?)
}

fn emit(text: &str, output: Option<&Path>, stdout: &mut dyn Write) -> Result<(), Failure> {
    match output {
        Some(path) => fs::write(path, text).map_err(|e| io_failure(path, e)),
        None => stdout.write_all(text.as_bytes()).map_err(|e| io_failure(Path::new("<stdout>"), e)),
    }
}

fn convert(spec: &NetworkSpec, to: Form, tol: &Tolerances) -> Result<String, Failure> {
    let component = spec.sole_component()?;
    let payload = match to {
        Form::Slh => slh_payload(&component.slh(tol)?),
        Form::Strat => strat_payload(&component.strat(tol)?),
    };
    let mut out = spec.clone();
    out.components[0].payload = payload;
    Ok(serialize_spec(&out))
}

fn check(spec: &NetworkSpec, tol: &Tolerances) -> Result<Value, Failure> {
    let open = build_open_loop(spec, tol)?;
    let as_json = |r: Result<Value, Error>| -> Result<Value, Failure> {
        match r {
            Ok(v) => Ok(v),
            Err(e @ Error::InvariantViolation(_)) => Err(e.into()),
            Err(e) => Ok(Failure::Core(e).to_json()),
        }
    };
    let strat = match (&open.strat, &open.strat_error) {
        (Some(e), _) => Ok(e.clone()),
        (None, Some(err)) => Err(err.clone()),
        (None, None) => Err(Error::InvalidValue("open loop has no Stratonovich form".into())),
    };
    let well = as_json(strat.clone().and_then(|e| {
        wellposedness(&e, &open.split, tol).map(|r| serde_json::to_value(r).expect("report serializes"))
    }))?;
    let repr = as_json(
        representability_report(&open.model, &open.split, tol)
            .map(|r| serde_json::to_value(r).expect("report serializes")),
    )?;
    let labels = |s: &qfn::LabelSet| s.iter().map(|l| l.as_str().to_string()).collect::<Vec<_>>();
    let not_representable: Vec<Value> = open
        .not_representable
        .iter()
        .map(|(name, e)| json!({"component": name, "error": e.kind(), "block": e.block()}))
        .collect();
    Ok(json!({
        "external": labels(open.split.external()),
        "internal": labels(open.split.internal()),
        "routing": open.routing.to_string(),
        "stratonovich_gauge": open.strat_gauge,
        "components_not_representable": not_representable,
        "wellposedness": well,
        "representability": repr,
    }))
}

fn series(second: &NetworkSpec, first: &NetworkSpec, tol: &Tolerances) -> Result<String, Failure> {
    let c2 = second.sole_component()?;
    let c1 = first.sole_component()?;
    let m = series_slh(&c2.slh(tol)?, &c1.slh(tol)?)?;
    let doc = NetworkSpec::single(REDUCED_NAME, c2.inputs.clone(), slh_payload(&m), m.dim());
    Ok(serialize_spec(&doc))
}

fn write_examples(dir: &Path, stdout: &mut dyn Write) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    for (name, text) in bundled_examples() {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| io_failure(&path, e))?;
        let _ = writeln!(stdout, "{}", path.display());
    }
    Ok(())
}

fn execute(cli: Cli, env_tol: Option<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    let tol = tolerances(cli.tol, env_tol)?;
    match cli.command {
        Command::Reduce { file, route, output } => {
            let result = reduce_network(&read_spec(&file, &tol)?, route, &tol)?;
            if let Some(d) = result.discrepancy {
                let _ = writeln!(stderr, "{}", json!({"discrepancy": d, "limit": 10.0 * tol.eq_tol}));
            }
            emit(&serialize_model(&result), output.as_deref(), stdout)
        }
        Command::Convert { file, to, output } => {
            let text = convert(&read_spec(&file, &tol)?, to, &tol)?;
            emit(&text, output.as_deref(), stdout)
        }
        Command::Check { file } => {
            let report = check(&read_spec(&file, &tol)?, &tol)?;
            let text = serde_json::to_string_pretty(&report).expect("json values serialize") + "\n";
            emit(&text, None, stdout)
        }
        Command::Series { file2, file1, output } => {
            let text = series(&read_spec(&file2, &tol)?, &read_spec(&file1, &tol)?, &tol)?;
            emit(&text, output.as_deref(), stdout)
        }
        Command::Examples { dir } => write_examples(&dir, stdout),
    }
}

/// Runs the command line `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I, env_tol: Option<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(cli, env_tol, stdout, stderr) {
        Ok(()) => 0,
        Err(failure) => {
            let _ = writeln!(stderr, "{}", failure.to_json());
            failure.exit_code()
        }
    }
}
