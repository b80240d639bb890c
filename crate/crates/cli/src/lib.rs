//! Command-line front end for `fracmom`.
//!
//! [`run`] takes the argument list and returns what the process should print
//! and its exit code: 0 when every check passes, 1 when a check fails with
//! a witness, 2 when no verification could be performed.

pub mod problem;
mod render;

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracmom::moments::{build_basis, gram, shifted_gram, IndexClosure};
use fracmom::verifier::{continuity_probe, GammaSource};
use fracmom::{
    format_extended, format_fracpoly, parse_extended, psd_check, verify_all, AtomicMeasure,
    DeltaFamily, Error, ExponentVector, ProblemPolys, Rational, Scalar, Window,
    DEFAULT_TOLERANCE,
};
use serde_json::{json, Value};

use problem::{DeltaEntry, GammaEntry, Mode, ProblemFile, WindowSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputError {
    field: Option<String>,
    message: String,
}

impl InputError {
    pub fn new(message: impl fmt::Display) -> Self {
        InputError {
            field: None,
            message: message.to_string(),
        }
    }

    pub fn at(field: impl Into<String>, message: impl fmt::Display) -> Self {
        InputError {
            field: Some(field.into()),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.field {
            Some(field) => write!(f, "{field}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for InputError {}

impl From<Error> for InputError {
    fn from(e: Error) -> Self {
        match e {
            Error::MissingEntries(missing) => InputError::new(format!(
                "delta table does not cover the window; missing: {}",
                missing.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
            )),
            other => InputError::new(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

impl Outcome {
    fn input_error(e: impl fmt::Display) -> Self {
        Outcome {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "fracmom", version, about = "Certify fractional moment families on finite windows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build δ from a measure and verify all conditions.
    Forward {
        #[command(flatten)]
        common: Common,
        /// Also write the tabulated δ and γ used by the window to this file.
        #[arg(long, value_name = "FILE")]
        emit_delta: Option<PathBuf>,
    },
    /// Verify a tabulated δ (and optional γ) without a measure.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Decide whether an expression in t1..tn and s lies in the kernel of s ↦ θ.
    Kernel {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "EXPR")]
        expr: String,
    },
    /// Print the base and localized Gram matrices with their verdicts.
    Psd {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long, value_parser = parse_tolerance)]
    tolerance: Option<f64>,
    /// Window as D,N,B.
    #[arg(long, value_parser = parse_window)]
    window: Option<Window>,
    #[arg(long, value_enum, default_value_t = Report::Json)]
    report: Report,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Report {
    Json,
    Text,
}

fn parse_tolerance(text: &str) -> Result<f64, String> {
    match text.parse::<f64>() {
        Ok(t) if t.is_finite() && t >= 0.0 => Ok(t),
        _ => Err(format!("expected a finite non-negative number, got {text:?}")),
    }
}

fn parse_window(text: &str) -> Result<Window, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [d, n, b] = parts.as_slice() else {
        return Err("expected D,N,B".into());
    };
    let bad = |what: &str| format!("{what} must be a non-negative integer");
    let d: u64 = d.parse().map_err(|_| bad("D"))?;
    let n: u64 = n.parse().map_err(|_| bad("N"))?;
    let b: u32 = b.parse().map_err(|_| bad("B"))?;
    Window::new(d, n, b).map_err(|e| e.to_string())
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { stdout: text, stderr: String::new(), code }
            } else {
                Outcome { stdout: String::new(), stderr: text, code }
            };
        }
    };
    let common = match &cli.command {
        Command::Forward { common, .. }
        | Command::Check { common }
        | Command::Kernel { common, .. }
        | Command::Psd { common } => common,
    };
    let file = match std::fs::read_to_string(&common.input)
        .map_err(|e| InputError::new(format!("cannot read {}: {e}", common.input.display())))
        .and_then(|text| ProblemFile::from_json(&text))
    {
        Ok(f) => f,
        Err(e) => return Outcome::input_error(e),
    };
    let mode = match file.resolve_mode(common.mode.map(|m| match m {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Float => Mode::Float,
    })) {
        Ok(m) => m,
        Err(e) => return Outcome::input_error(e),
    };
    let result = match mode {
        Mode::Exact => execute::<Rational>(&cli.command, common, &file),
        Mode::Float => execute::<f64>(&cli.command, common, &file),
    };
    result.unwrap_or_else(Outcome::input_error)
}

struct Settings {
    window: Window,
    tolerance: f64,
    report: Report,
}

fn execute<S: Scalar>(
    command: &Command,
    common: &Common,
    file: &ProblemFile,
) -> Result<Outcome, InputError> {
    let problem = file.problem::<S>()?;
    let settings = Settings {
        window: file.window(common.window, &problem)?,
        tolerance: common.tolerance.or(file.tolerance).unwrap_or(DEFAULT_TOLERANCE),
        report: common.report,
    };
    if !(settings.tolerance.is_finite() && settings.tolerance >= 0.0) {
        return Err(InputError::at("tolerance", "must be a finite non-negative number"));
    }
    match command {
        Command::Forward { emit_delta, .. } => {
            cmd_forward::<S>(file, &problem, &settings, emit_delta.as_ref())
        }
        Command::Check { .. } => cmd_check::<S>(file, &problem, &settings),
        Command::Kernel { expr, .. } => cmd_kernel::<S>(&problem, expr, &settings),
        Command::Psd { .. } => cmd_psd::<S>(file, &problem, &settings),
    }
}

fn single_source(file: &ProblemFile, allowed: &[&str]) -> Result<&'static str, InputError> {
    let found = file.sources();
    match found.as_slice() {
        [one] if allowed.contains(one) => Ok(one),
        [one] => Err(InputError::new(format!(
            "this command needs one of {}, found {one}",
            allowed.join(", ")
        ))),
        [] => Err(InputError::new(format!("missing δ source: give one of {}", allowed.join(", ")))),
        many => Err(InputError::new(format!(
            "exactly one of measure, log_measure, delta_table may be given, found {}",
            many.join(", ")
        ))),
    }
}

fn gamma_lookup<S: Scalar>(
    table: BTreeMap<ExponentVector, S>,
) -> impl Fn(&ExponentVector) -> fracmom::Result<S> {
    move |alpha| {
        table
            .get(alpha)
            .cloned()
            .ok_or_else(|| Error::MissingGamma(alpha.to_string()))
    }
}

fn finish<S: Scalar>(cert: &fracmom::Certificate<S>, settings: &Settings) -> Outcome {
    let stdout = match settings.report {
        Report::Json => render::json(&cert.to_json()),
        Report::Text => render::certificate_text(cert),
    };
    Outcome {
        stdout,
        stderr: String::new(),
        code: if cert.pass { 0 } else { 1 },
    }
}

fn cmd_forward<S: Scalar>(
    file: &ProblemFile,
    problem: &ProblemPolys<S>,
    settings: &Settings,
    emit: Option<&PathBuf>,
) -> Result<Outcome, InputError> {
    single_source(file, &["measure", "log_measure"])?;
    let mu: AtomicMeasure<S> = file.measure::<S>()?.expect("source checked");
    let delta = DeltaFamily::computed(mu.clone(), problem.clone())?;
    let table = file.gamma_table::<S>()?;
    let closed_form = table.is_none();
    let lookup = table.map(gamma_lookup);
    let moment = |a: &ExponentVector| mu.moment(a);
    let gamma: GammaSource<S> = match &lookup {
        Some(f) => f,
        None => &moment,
    };

    if let Some(path) = emit {
        emit_delta(file, problem, settings, &delta, gamma, path)?;
    }

    let cert = verify_all(&delta, Some(gamma), problem, &settings.window, settings.tolerance)?;
    let mut out = finish(&cert, settings);
    if closed_form {
        let w = &settings.window;
        let max_alpha = 2.0 * w.degree.max(1) as f64 / w.denominator as f64;
        let probe = continuity_probe(&|a: &[f64]| mu.gamma(a), problem.dim(), max_alpha, 16)?;
        out.stderr.push_str(&format!(
            "info: gamma continuity probe on [0, {max_alpha}]: jump {:.3e} at step h, {:.3e} at h/2 ({})\n",
            probe.coarse_jump,
            probe.fine_jump,
            if probe.looks_continuous() { "consistent with continuity" } else { "inconclusive" }
        ));
    }
    Ok(out)
}

fn emit_delta<S: Scalar>(
    file: &ProblemFile,
    problem: &ProblemPolys<S>,
    settings: &Settings,
    delta: &DeltaFamily<S>,
    gamma: GammaSource<S>,
    path: &PathBuf,
) -> Result<(), InputError> {
    let closure = IndexClosure::new(&settings.window, problem);
    let delta_table = delta
        .tabulate(&closure.all)?
        .into_iter()
        .map(|(idx, v)| DeltaEntry {
            alpha: alpha_values(&idx.alpha),
            beta: idx.beta,
            value: v.to_json(),
        })
        .collect();
    let gamma_table = closure
        .moment_alphas()
        .iter()
        .map(|a| {
            Ok(GammaEntry {
                alpha: alpha_values(a),
                value: gamma(a)?.to_json(),
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let w = settings.window;
    let out = ProblemFile {
        n: file.n,
        mode: Some(S::MODE.to_string()),
        polynomials: problem.polys().iter().map(format_fracpoly).collect(),
        measure: None,
        log_measure: None,
        delta_table: Some(delta_table),
        gamma_table: Some(gamma_table),
        window: Some(WindowSpec {
            d: w.denominator,
            n: w.degree,
            b: w.beta_max,
        }),
        tolerance: Some(settings.tolerance),
    };
    let text = serde_json::to_string_pretty(&out).expect("problem files serialize") + "\n";
    std::fs::write(path, text)
        .map_err(|e| InputError::new(format!("cannot write {}: {e}", path.display())))
}

fn alpha_values(alpha: &ExponentVector) -> Vec<Value> {
    alpha
        .components()
        .iter()
        .map(|c| Value::String(c.to_string()))
        .collect()
}

fn cmd_check<S: Scalar>(
    file: &ProblemFile,
    problem: &ProblemPolys<S>,
    settings: &Settings,
) -> Result<Outcome, InputError> {
    single_source(file, &["delta_table"])?;
    let entries = file.delta_table::<S>()?.expect("source checked");
    let delta = DeltaFamily::tabulated(file.n, entries, "delta_table")?;
    let lookup = file.gamma_table::<S>()?.map(gamma_lookup);
    let gamma = lookup.as_ref().map(|f| f as GammaSource<S>);
    let cert = verify_all(&delta, gamma, problem, &settings.window, settings.tolerance)?;
    Ok(finish(&cert, settings))
}

fn cmd_kernel<S: Scalar>(
    problem: &ProblemPolys<S>,
    expr: &str,
    settings: &Settings,
) -> Result<Outcome, InputError> {
    if !S::EXACT {
        return Err(InputError::new("the kernel test requires exact mode"));
    }
    let q = parse_extended::<S>(expr, problem.dim()).map_err(|e| InputError::at("--expr", e))?;
    let verdict = problem.kernel_test(&q)?;
    let witness = verdict.witness.as_ref().map(|w| {
        json!({
            "t": w.t.iter().map(Scalar::to_json).collect::<Vec<_>>(),
            "value": { "re": w.value.re.to_json(), "im": w.value.im.to_json() },
        })
    });
    let report = json!({
        "expression": format_extended(&q),
        "verdict": if verdict.in_kernel { "TRUE" } else { "FALSE" },
        "witness": witness,
    });
    let stdout = match settings.report {
        Report::Json => render::json(&report),
        Report::Text => render::kernel_text(&verdict),
    };
    Ok(Outcome {
        stdout,
        stderr: String::new(),
        code: if verdict.in_kernel { 0 } else { 1 },
    })
}

fn cmd_psd<S: Scalar>(
    file: &ProblemFile,
    problem: &ProblemPolys<S>,
    settings: &Settings,
) -> Result<Outcome, InputError> {
    let source = single_source(file, &["measure", "log_measure", "delta_table"])?;
    let delta = if source == "delta_table" {
        let entries = file.delta_table::<S>()?.expect("source checked");
        DeltaFamily::tabulated(file.n, entries, "delta_table")?
    } else {
        DeltaFamily::computed(file.measure::<S>()?.expect("source checked"), problem.clone())?
    };
    let closure = IndexClosure::new(&settings.window, problem);
    let missing = delta.missing(closure.gram.iter().chain(&closure.shifted));
    if !missing.is_empty() {
        return Err(Error::MissingEntries(missing).into());
    }
    let basis = build_basis(&settings.window, problem.dim())?;
    let base = gram(&delta, &basis)?;
    let base_verdict = psd_check(&base, settings.tolerance);
    let mut all_psd = base_verdict.psd;
    let mut shifted = Vec::new();
    for (k, p) in problem.polys().iter().enumerate() {
        let m = shifted_gram(&delta, &basis, p)?;
        let v = psd_check(&m, settings.tolerance);
        all_psd &= v.psd;
        shifted.push((k + 1, format_fracpoly(p), m, v));
    }
    let stdout = match settings.report {
        Report::Json => render::json(&render::psd_json(
            &settings.window,
            &basis,
            (&base, &base_verdict),
            &shifted,
        )),
        Report::Text => render::psd_text(&settings.window, &basis, (&base, &base_verdict), &shifted),
    };
    Ok(Outcome {
        stdout,
        stderr: String::new(),
        code: if all_psd { 0 } else { 1 },
    })
}
