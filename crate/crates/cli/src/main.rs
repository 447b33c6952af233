mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use locality_core::conditions::{
    check_el_first, check_el_second, check_el_three_valued, check_freedom_of_settings, check_no_signalling,
    check_npcc_all, ConditionError, PastKind,
};
use locality_core::enumerate::{run_oracle, EnumerationError, OracleBounds};
use locality_core::eprb::{build_eprb_model, pr_box_distribution, uniform_settings, verify_eprb, DerivationChoice, VerifyError};
use locality_core::modelspec::{load, render_diagnostics, serialize};
use locality_core::probability::{check_screening_off_all, parse_weight, Distribution};
use locality_core::report::ConditionReport;
use locality_core::theory::{check_ontic_definiteness, OnticTheory, Theory};

use report::{ConditionOutcome, InputIdentity, Probabilistic, RunReport, Status};

const DEFAULT_TOL: f64 = 1e-9;
const TOL_VAR: &str = "LOCALITY_LAB_TOL";
const INPUT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "locality-lab", version, about = "Check causal conditions on finite history-space theories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run condition checkers on a model file.
    Check {
        file: PathBuf,
        /// Conditions to run; defaults to every condition the model supports.
        #[arg(long, value_delimiter = ',')]
        conditions: Vec<Condition>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Conditions reported without affecting the exit status.
        #[arg(long, value_delimiter = ',')]
        informational: Vec<Condition>,
    },
    /// Verify the built-in sixteen-valuation EPRB model.
    Eprb {
        #[arg(long, value_enum, default_value_t = Derivation::Full)]
        derivation: Derivation,
        /// `pr`, `uniform` or a file of `name = weight` lines over v01..v16.
        #[arg(long, default_value = "pr")]
        dist: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run an enumeration oracle suite.
    Oracle {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 4)]
        max_omega: usize,
        #[arg(long, default_value_t = 4)]
        max_points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Condition {
    El1,
    El2,
    El3v,
    Npccj,
    Npccm,
    Fos,
    Onticdef,
    So1,
    So2,
    Signal,
}

impl Condition {
    const ALL: [Condition; 10] = [
        Condition::El1,
        Condition::El2,
        Condition::El3v,
        Condition::Npccj,
        Condition::Npccm,
        Condition::Fos,
        Condition::Onticdef,
        Condition::So1,
        Condition::So2,
        Condition::Signal,
    ];

    fn name(self) -> &'static str {
        match self {
            Condition::El1 => "el1",
            Condition::El2 => "el2",
            Condition::El3v => "el3v",
            Condition::Npccj => "npccj",
            Condition::Npccm => "npccm",
            Condition::Fos => "fos",
            Condition::Onticdef => "onticdef",
            Condition::So1 => "so1",
            Condition::So2 => "so2",
            Condition::Signal => "signal",
        }
    }

    /// Stated for definite theories only.
    fn needs_ontic(self) -> bool {
        matches!(self, Condition::El1 | Condition::El2 | Condition::Npccj | Condition::Npccm | Condition::So1 | Condition::So2)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Derivation {
    Full,
    Pair14,
    Pair23,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    ElEquiv,
    NpccEquiv,
    ElSo2,
    BellBound,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::ElEquiv => "el-equiv",
            Suite::NpccEquiv => "npcc-equiv",
            Suite::ElSo2 => "el-so2",
            Suite::BellBound => "bell-bound",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = match tolerance() {
        Ok(t) => t,
        Err(msg) => return input_error(&msg),
    };
    let (report, format) = match cli.command {
        Command::Check { file, conditions, format, informational } => {
            match cmd_check(&file, &conditions, &informational, tol) {
                Ok(r) => (r, format),
                Err(msg) => return input_error(&msg),
            }
        }
        Command::Eprb { derivation, dist, format } => match cmd_eprb(derivation, &dist, tol) {
            Ok(r) => (r, format),
            Err(msg) => return input_error(&msg),
        },
        Command::Oracle { suite, max_omega, max_points, seed, format } => {
            match cmd_oracle(suite, OracleBounds { max_omega, max_points, seed }, tol) {
                Ok(r) => (r, format),
                Err(msg) => return input_error(&msg),
            }
        }
    };
    let body = match format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json() + "\n",
    };
    // a closed pipe downstream is not a checker outcome
    let _ = std::io::stdout().write_all(body.as_bytes());
    ExitCode::from(report.verdict.exit_code() as u8)
}

fn input_error(msg: &str) -> ExitCode {
    eprintln!("error: {}", msg.trim_end());
    ExitCode::from(INPUT_ERROR)
}

fn tolerance() -> Result<f64, String> {
    match std::env::var(TOL_VAR) {
        Err(_) => Ok(DEFAULT_TOL),
        Ok(s) => match s.trim().parse::<f64>() {
            Ok(t) if t.is_finite() && t >= 0.0 => Ok(t),
            _ => Err(format!("{TOL_VAR} must be a non-negative number, got `{s}`")),
        },
    }
}

fn read_input(path: &Path) -> Result<(String, InputIdentity), String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let identity = InputIdentity { path: path.display().to_string(), sha256: sha256_hex(&bytes) };
    let text = String::from_utf8(bytes).map_err(|_| format!("{}: not UTF-8", path.display()))?;
    Ok((text, identity))
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn cmd_check(file: &Path, requested: &[Condition], informational: &[Condition], tol: f64) -> Result<RunReport, String> {
    let (text, identity) = read_input(file)?;
    let model = load(&text).map_err(|d| format!("{}:\n{}", file.display(), render_diagnostics(&d)))?;
    let theory = model.theory;
    let conditions: Vec<Condition> = if requested.is_empty() {
        Condition::ALL.into_iter().filter(|c| !c.needs_ontic() || !theory.is_three_valued()).collect()
    } else {
        requested.to_vec()
    };
    let dist = model.distribution.unwrap_or_else(|| Distribution::uniform(&theory));
    let mut report = RunReport::new("check", tol);
    report.inputs.push(identity);
    for c in conditions {
        let result = run_condition(c, &theory, &dist, tol);
        let (status, report_, error) = match result {
            Ok(r) => (if r.holds { Status::Pass } else { Status::Fail }, Some(r), None),
            Err(e) => (Status::Error, None, Some(e)),
        };
        report.conditions.push(ConditionOutcome {
            condition: c.name().into(),
            status,
            informational: informational.contains(&c),
            report: report_,
            error,
        });
    }
    report.settle();
    Ok(report)
}

fn run_condition(c: Condition, theory: &Theory, dist: &Distribution, tol: f64) -> Result<ConditionReport, String> {
    let ontic = || -> Result<&OnticTheory, String> {
        match theory {
            Theory::Ontic(t) => Ok(t),
            Theory::ThreeValued(_) => Err(format!("{} is stated for definite theories; the model is three-valued", c.name())),
        }
    };
    let s = |e: ConditionError| e.to_string();
    match c {
        Condition::El1 => check_el_first(ontic()?).map_err(s),
        Condition::El2 => check_el_second(ontic()?).map_err(s),
        Condition::El3v => check_el_three_valued(theory, true).map_err(s),
        Condition::Npccj => check_npcc_all(ontic()?, PastKind::Joint).map_err(s),
        Condition::Npccm => check_npcc_all(ontic()?, PastKind::Mutual).map_err(s),
        Condition::Fos => check_freedom_of_settings(theory).map_err(s),
        Condition::Onticdef => Ok(check_ontic_definiteness(&theory.to_three_valued())),
        Condition::So1 => check_screening_off_all(ontic()?, dist, PastKind::Mutual, tol).map_err(s),
        Condition::So2 => check_screening_off_all(ontic()?, dist, PastKind::Joint, tol).map_err(s),
        Condition::Signal => check_no_signalling(theory).map_err(s),
    }
}

fn cmd_eprb(derivation: Derivation, dist: &str, tol: f64) -> Result<RunReport, String> {
    let choice = match derivation {
        Derivation::Full => DerivationChoice::Full,
        Derivation::Pair14 => DerivationChoice::Pair14,
        Derivation::Pair23 => DerivationChoice::Pair23,
    };
    let name = choice.name();
    let model = build_eprb_model(choice).map_err(|e| e.to_string())?;
    let theory: Theory = model.theory.clone().into();
    let mut report = RunReport::new("eprb", tol);
    let distribution = match dist {
        "pr" => pr_box_distribution(&model, &uniform_settings()).map_err(|e| e.to_string())?,
        "uniform" => Distribution::uniform(&theory),
        path => {
            let (text, identity) = read_input(Path::new(path))?;
            report.inputs.push(identity);
            let weights = parse_weight_lines(&text).map_err(|e| format!("{path}: {e}"))?;
            Distribution::new(&theory, weights).map_err(|e| format!("{path}: {e}"))?
        }
    };
    let model_text = serialize(&theory, Some(&distribution));
    report.inputs.insert(0, InputIdentity { path: format!("builtin:eprb-{name}"), sha256: sha256_hex(model_text.as_bytes()) });
    match verify_eprb(&model, &distribution, tol) {
        Ok(r) => {
            report.probabilistic = Some(Probabilistic {
                correlators: r.correlators.clone(),
                chsh: r.chsh.clone(),
                chsh_value: r.chsh_value,
                local_bound: r.local_bound,
            });
            report.eprb = Some(r);
        }
        Err(e @ (VerifyError::Condition(_) | VerifyError::Probability(_))) => {
            report.conditions.push(ConditionOutcome {
                condition: "verify".into(),
                status: Status::Error,
                informational: false,
                report: None,
                error: Some(e.to_string()),
            });
        }
    }
    report.settle();
    Ok(report)
}

/// `name = weight` lines; blank lines, `#` comments and a leading
/// `distribution:` header are ignored.
fn parse_weight_lines(text: &str) -> Result<Vec<(String, locality_core::probability::Weight)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() || line == "distribution:" {
            continue;
        }
        let (name, w) = line.split_once('=').ok_or_else(|| format!("line {}: expected `name = weight`", i + 1))?;
        let weight = parse_weight(w.trim()).ok_or_else(|| format!("line {}: malformed weight `{}`", i + 1, w.trim()))?;
        out.push((name.trim().to_string(), weight));
    }
    Ok(out)
}

fn cmd_oracle(suite: Suite, bounds: OracleBounds, tol: f64) -> Result<RunReport, String> {
    let mut report = RunReport::new("oracle", tol);
    match run_oracle(suite.name(), bounds, tol).expect("suite names are known") {
        Ok(r) => report.oracle = Some(r),
        Err(e @ (EnumerationError::TooLarge { .. } | EnumerationError::Zero(_))) => return Err(e.to_string()),
        Err(e) => report.conditions.push(ConditionOutcome {
            condition: suite.name().into(),
            status: Status::Error,
            informational: false,
            report: None,
            error: Some(e.to_string()),
        }),
    }
    report.settle();
    Ok(report)
}
