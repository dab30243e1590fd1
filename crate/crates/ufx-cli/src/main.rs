//! Batch command-line front end over the workbench library.
//!
//! Exit status: 0 on success or all checks passing, 1 when a check fails,
//! 2 on usage or input errors.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use ufx_core::suite::REPORT_SCHEMA_VERSION;
use ufx_core::{
    beta_extend, evaluate, lemma3_symbolic, lift_check, parse_formula, run_suite, Assignment,
    BetaMode, EPSet, FiniteUltrafilter, MapWitness, Model, MutantMode, SuiteConfig, SymbolicUF,
};

#[derive(Parser)]
#[command(
    name = "ufx",
    version,
    about = "Workbench for ultrafilter extensions of finite first-order models"
)]
struct Cli {
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand)]
enum Command {
    /// Model file operations.
    Model {
        #[command(subcommand)]
        command: ModelCommand,
    },
    /// Evaluate a formula in a model under an assignment.
    Eval(EvalArgs),
    /// Lift a map witness to the extensions and compare classifications.
    Lift(LiftArgs),
    /// Symbolic ultrafilter operations.
    Uf {
        #[command(subcommand)]
        command: UfCommand,
    },
    /// Certify the four pair-image membership verdicts for a partition.
    Lemma3 {
        /// The partition class A1 as an eventually periodic set literal.
        #[arg(long)]
        partition: String,
    },
    /// The bundled verification suite.
    Paper {
        #[command(subcommand)]
        command: PaperCommand,
    },
}

#[derive(Subcommand)]
enum ModelCommand {
    /// Parse a model file and report invariant violations.
    Validate { file: PathBuf },
    /// Compute the ultrafilter extension and print it in the model format.
    Beta {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Fast)]
        mode: ModeArg,
    },
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Literal,
    Fast,
}

#[derive(Args)]
struct EvalArgs {
    /// Model file (text format or its JSON mirror).
    model: PathBuf,
    /// Formula text, or a path to a file holding it.
    #[arg(long)]
    formula: String,
    /// Variable bindings, e.g. `--let x=3`.
    #[arg(long = "let", value_name = "VAR=VALUE")]
    bindings: Vec<String>,
    /// Ultrafilter parameters, e.g. `--uf d=principal:5`.
    #[arg(long = "uf", value_name = "NAME=principal:POINT")]
    ultrafilters: Vec<String>,
}

#[derive(Args)]
struct LiftArgs {
    source: PathBuf,
    target: PathBuf,
    /// Map file: whitespace-separated target indices, one per source point.
    #[arg(long)]
    map: PathBuf,
}

#[derive(Subcommand)]
enum UfCommand {
    /// Class-wide membership of a set in a symbolic ultrafilter.
    Measure {
        /// `principal:N` or `frechet:ep(...)`.
        #[arg(long)]
        d: String,
        /// An eventually periodic set literal `ep(N; prefix; p; residues)`.
        #[arg(long)]
        set: String,
    },
}

#[derive(Subcommand)]
enum PaperCommand {
    /// Run every suite check and print the report.
    Suite {
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Seed for the sampled batteries; defaults to UFX_SEED.
        #[arg(long, env = "UFX_SEED", default_value_t = 42)]
        seed: u64,
    },
}

/// Outcome of a command: exit 0 or exit 1 plus everything already printed.
enum Outcome {
    Pass,
    Fail,
}

struct CliError(String);

impl<E: std::fmt::Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

fn load_model(path: &Path) -> Result<Model, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError(format!("{}: {e}", path.display())))?;
    ufx_core::format::parse_model_auto(&text)
        .map_err(|e| CliError(format!("{}: {e}", path.display())))
}

fn split_binding(raw: &str) -> Result<(&str, &str), CliError> {
    raw.split_once('=')
        .ok_or_else(|| CliError(format!("expected NAME=VALUE, got `{raw}`")))
}

fn cmd_validate(file: &Path, format: Format) -> Result<Outcome, CliError> {
    let model = load_model(file)?;
    let violations = model.validate();
    match format {
        Format::Text => {
            if violations.is_empty() {
                println!("ok: model is valid ({} points)", model.size());
            } else {
                for v in &violations {
                    println!("violation: {v}");
                }
            }
        }
        Format::Structured => {
            let payload = json!({
                "schema_version": REPORT_SCHEMA_VERSION,
                "command": "model validate",
                "valid": violations.is_empty(),
                "violations": violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&payload).unwrap());
        }
    }
    Ok(if violations.is_empty() {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn cmd_beta(file: &Path, mode: ModeArg, format: Format) -> Result<Outcome, CliError> {
    let model = load_model(file)?;
    let mode = match mode {
        ModeArg::Literal => BetaMode::Literal,
        ModeArg::Fast => BetaMode::Fast,
    };
    let beta = beta_extend(&model, mode)?;
    match format {
        Format::Text => print!("{}", beta.to_text()),
        Format::Structured => {
            let payload = json!({
                "schema_version": REPORT_SCHEMA_VERSION,
                "command": "model beta",
                "points": beta.universe().len(),
                "model": serde_json::from_str::<serde_json::Value>(
                    &ufx_core::model_to_json(beta.extended())
                ).unwrap(),
            });
            println!("{}", serde_json::to_string_pretty(&payload).unwrap());
        }
    }
    Ok(Outcome::Pass)
}

fn cmd_eval(args: &EvalArgs, format: Format) -> Result<Outcome, CliError> {
    let model = load_model(&args.model)?;
    let text = if Path::new(&args.formula).is_file() {
        std::fs::read_to_string(&args.formula).map_err(|e| CliError(e.to_string()))?
    } else {
        args.formula.clone()
    };
    let formula = parse_formula(&text, model.vocab())?;
    let mut assignment = Assignment::new();
    for raw in &args.bindings {
        let (name, value) = split_binding(raw)?;
        let value: usize = value
            .trim()
            .parse()
            .map_err(|_| CliError(format!("`{value}` is not a universe index")))?;
        assignment.vars.insert(name.trim().to_string(), value);
    }
    for raw in &args.ultrafilters {
        let (name, spec) = split_binding(raw)?;
        let point = spec
            .trim()
            .strip_prefix("principal:")
            .and_then(|p| p.trim().parse::<usize>().ok())
            .ok_or_else(|| {
                CliError(format!(
                    "`{spec}` is not a finite ultrafilter; use principal:POINT"
                ))
            })?;
        assignment.ufs.insert(
            name.trim().to_string(),
            FiniteUltrafilter::new(model.size(), point)?,
        );
    }
    let verdict = evaluate(&model, &formula, &assignment)?;
    match format {
        Format::Text => println!("{verdict}"),
        Format::Structured => {
            let payload = json!({
                "schema_version": REPORT_SCHEMA_VERSION,
                "command": "eval",
                "formula": formula.to_string(),
                "result": verdict,
            });
            println!("{}", serde_json::to_string_pretty(&payload).unwrap());
        }
    }
    Ok(Outcome::Pass)
}

fn cmd_lift(args: &LiftArgs, format: Format) -> Result<Outcome, CliError> {
    let source = load_model(&args.source)?;
    let target = load_model(&args.target)?;
    let map_text = std::fs::read_to_string(&args.map)
        .map_err(|e| CliError(format!("{}: {e}", args.map.display())))?;
    let map = map_text
        .split('#')
        .next()
        .unwrap_or_default()
        .split_whitespace()
        .map(|tok| {
            tok.parse::<usize>()
                .map_err(|_| CliError(format!("`{tok}` is not a target index")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let witness = MapWitness::new(source, target, map)?;
    let report = lift_check(&witness)?;
    match format {
        Format::Text => {
            println!("source: {}", report.source);
            println!("lifted: {}", report.lifted);
            if let Some(note) = &report.note {
                println!("note: {note}");
            }
            println!("lift: {}", if report.pass { "pass" } else { "fail" });
        }
        Format::Structured => {
            let payload = json!({
                "schema_version": REPORT_SCHEMA_VERSION,
                "command": "lift",
                "report": report,
            });
            println!("{}", serde_json::to_string_pretty(&payload).unwrap());
        }
    }
    Ok(if report.pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn cmd_measure(d: &str, set: &str, format: Format) -> Result<Outcome, CliError> {
    let d = SymbolicUF::parse(d)?;
    let set = EPSet::parse(set)?;
    let verdict = d.measure(&set);
    match format {
        Format::Text => println!("{verdict}"),
        Format::Structured => {
            let payload = json!({
                "schema_version": REPORT_SCHEMA_VERSION,
                "command": "uf measure",
                "ultrafilter": d.to_string(),
                "set": set.to_string(),
                "result": verdict,
            });
            println!("{}", serde_json::to_string_pretty(&payload).unwrap());
        }
    }
    Ok(Outcome::Pass)
}

fn cmd_lemma3(partition: &str, format: Format) -> Result<Outcome, CliError> {
    let a1 = EPSet::parse(partition)?;
    let report = lemma3_symbolic(&a1)?;
    match format {
        Format::Text => {
            println!("partition: A1 = {}, A2 = {}", report.a1, report.a2);
            println!("B1 in F(D1,D2): {}", report.b1_in_f12);
            println!("B2 in F(D1,D2): {}", report.b2_in_f12);
            println!("B2 in F(D2,D1): {}", report.b2_in_f21);
            println!("B1 in F(D2,D1): {}", report.b1_in_f21);
            println!(
                "conclusion: {}",
                if report.extensions_differ {
                    "extensions differ"
                } else {
                    "not certified"
                }
            );
        }
        Format::Structured => {
            let payload = json!({
                "schema_version": REPORT_SCHEMA_VERSION,
                "command": "lemma3",
                "report": report,
            });
            println!("{}", serde_json::to_string_pretty(&payload).unwrap());
        }
    }
    Ok(if report.extensions_differ {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn cmd_suite(k: usize, seed: u64, format: Format) -> Result<Outcome, CliError> {
    let report = run_suite(&SuiteConfig {
        k,
        seed,
        mutant: MutantMode::None,
    })?;
    match format {
        Format::Text => print!("{}", report.render_text()),
        Format::Structured => println!("{}", serde_json::to_string_pretty(&report).unwrap()),
    }
    Ok(if report.all_pass {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Model { command } => match command {
            ModelCommand::Validate { file } => cmd_validate(file, cli.format),
            ModelCommand::Beta { file, mode } => cmd_beta(file, *mode, cli.format),
        },
        Command::Eval(args) => cmd_eval(args, cli.format),
        Command::Lift(args) => cmd_lift(args, cli.format),
        Command::Uf { command } => match command {
            UfCommand::Measure { d, set } => cmd_measure(d, set, cli.format),
        },
        Command::Lemma3 { partition } => cmd_lemma3(partition, cli.format),
        Command::Paper { command } => match command {
            PaperCommand::Suite { k, seed } => cmd_suite(*k, *seed, cli.format),
        },
    }
}

fn main() -> ExitCode {
    // Die quietly when the consumer closes the pipe.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(2);
        }
    };
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
