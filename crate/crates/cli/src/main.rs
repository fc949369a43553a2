use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use psys::{
    compile, eval, parse, run_exhaustive, run_seeded, EvalResult, Outcome, DEFAULT_MAX_STEPS,
};

// exit codes, normative for scripting
const EXIT_BAD_EXPR: u8 = 2;
const EXIT_STEP_LIMIT: u8 = 3;
const EXIT_MISMATCH: u8 = 4;
const EXIT_BRANCH_LIMIT: u8 = 5;

#[derive(Parser)]
#[command(
    name = "psys",
    about = "Compile mu-recursive function expressions to P systems and run them",
    long_about = None
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile an expression and print the psys-v1 JSON system
    Compile(CompileArgs),
    /// Compile and run, printing the computed value
    Run(RunArgs),
    /// Differentially check the engine against the interpreter
    Check(CheckArgs),
    /// Emit a JSON-lines trace of a run
    Trace(TraceArgs),
}

#[derive(Args)]
struct ExprArgs {
    /// Expression, e.g. "P(U[1,1], C(S; U[3,3]))"
    #[arg(short, long)]
    expr: String,
    /// Comma-separated natural-number arguments
    #[arg(short, long, default_value = "", value_parser = parse_args_list)]
    args: ArgList,
}

#[derive(Clone)]
struct ArgList(Vec<u64>);

fn parse_args_list(text: &str) -> Result<ArgList, String> {
    if text.trim().is_empty() {
        return Ok(ArgList(Vec::new()));
    }
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|e| format!("bad argument {part:?}: {e}"))
        })
        .collect::<Result<Vec<u64>, String>>()
        .map(ArgList)
}

#[derive(Args)]
struct CompileArgs {
    #[command(flatten)]
    expr: ExprArgs,
    /// Write the system JSON here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the argument-index -> symbol sidecar map here
    #[arg(long)]
    inputs_out: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Json,
    Plain,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    expr: ExprArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Expression to check (omit when using --corpus)
    #[arg(short, long)]
    expr: Option<String>,
    #[arg(short, long, default_value = "", value_parser = parse_args_list)]
    args: ArgList,
    /// Check every `expr | args | expected` line of a corpus file
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Number of seeded engine runs per case
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    /// Oracle fuel
    #[arg(long, default_value_t = 1_000_000)]
    fuel: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: u64,
}

#[derive(Copy, Clone, ValueEnum)]
enum Mode {
    Random,
    Exhaustive,
}

#[derive(Args)]
struct TraceArgs {
    #[command(flatten)]
    expr: ExprArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Mode::Random)]
    mode: Mode,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: u64,
    #[arg(long, default_value_t = 4096)]
    max_branches: usize,
    /// Write the trace here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Compile(args) => cmd_compile(args),
        Command::Run(args) => cmd_run(args),
        Command::Check(args) => cmd_check(args),
        Command::Trace(args) => cmd_trace(args),
    }
}

/// Parse + compile, mapping failures to exit code 2 diagnostics.
fn prepare(expr_text: &str, args: &[u64]) -> Result<psys::CompiledUnit, ExitCode> {
    let expr = match parse(expr_text) {
        Ok(expr) => expr,
        Err(err) => {
            eprintln!("error: {err}");
            return Err(ExitCode::from(EXIT_BAD_EXPR));
        }
    };
    match compile(&expr, args) {
        Ok(unit) => Ok(unit),
        Err(err) => {
            eprintln!("error: {err}");
            Err(ExitCode::from(EXIT_BAD_EXPR))
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> ExitCode {
    match out {
        Some(path) => {
            if let Err(err) = fs::write(path, text) {
                eprintln!("error: cannot write {}: {err}", path.display());
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .expect("writing to stdout");
            ExitCode::SUCCESS
        }
    }
}

fn cmd_compile(args: CompileArgs) -> ExitCode {
    let unit = match prepare(&args.expr.expr, &args.expr.args.0) {
        Ok(unit) => unit,
        Err(code) => return code,
    };
    if let Some(path) = &args.inputs_out {
        let sidecar: serde_json::Map<String, serde_json::Value> = unit
            .input_map
            .iter()
            .map(|(idx, (sym, count))| {
                (
                    idx.to_string(),
                    serde_json::json!({"symbol": sym.as_str(), "count": count}),
                )
            })
            .collect();
        let text = serde_json::to_string(&sidecar).expect("sidecar serializes");
        if let Err(err) = fs::write(path, text + "\n") {
            eprintln!("error: cannot write {}: {err}", path.display());
            return ExitCode::FAILURE;
        }
    }
    emit(&args.out, &(unit.system.to_json() + "\n"))
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let unit = match prepare(&args.expr.expr, &args.expr.args.0) {
        Ok(unit) => unit,
        Err(code) => return code,
    };
    let trace =
        run_seeded(&unit.system, args.seed, args.max_steps).expect("compiled systems are valid");
    match trace.outcome {
        Outcome::Halted { output } => {
            let text = match args.format {
                Format::Json => format!(
                    r#"{{"value":{output},"steps":{},"seed":{}}}{}"#,
                    trace.steps.len(),
                    args.seed,
                    "\n"
                ),
                Format::Plain => format!("{output}\n"),
            };
            emit(&args.out, &text)
        }
        Outcome::StepLimitExceeded => {
            let text = match args.format {
                Format::Json => "{\"outcome\":\"step_limit\"}\n".to_string(),
                Format::Plain => "step_limit\n".to_string(),
            };
            let code = emit(&args.out, &text);
            if code == ExitCode::SUCCESS {
                ExitCode::from(EXIT_STEP_LIMIT)
            } else {
                code
            }
        }
    }
}

struct CheckCase {
    expr_text: String,
    args: Vec<u64>,
    /// Expected value recorded in the corpus, re-derived from the oracle.
    recorded: Option<u64>,
}

fn corpus_cases(path: &PathBuf) -> Result<Vec<CheckCase>, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut cases = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('|').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(format!(
                "{}:{}: expected `expr | args | expected`",
                path.display(),
                lineno + 1
            ));
        }
        let args = parse_args_list(fields[1])
            .map_err(|e| format!("{}:{}: {e}", path.display(), lineno + 1))?;
        let recorded = if fields[2] == "step_limit" {
            None
        } else {
            Some(fields[2].parse::<u64>().map_err(|e| {
                format!("{}:{}: bad expected value: {e}", path.display(), lineno + 1)
            })?)
        };
        cases.push(CheckCase {
            expr_text: fields[0].to_string(),
            args: args.0,
            recorded,
        });
    }
    Ok(cases)
}

fn cmd_check(args: CheckArgs) -> ExitCode {
    let cases = match (&args.corpus, &args.expr) {
        (Some(path), None) => match corpus_cases(path) {
            Ok(cases) => cases,
            Err(err) => {
                eprintln!("error: {err}");
                return ExitCode::FAILURE;
            }
        },
        (None, Some(expr)) => vec![CheckCase {
            expr_text: expr.clone(),
            args: args.args.0.clone(),
            recorded: None,
        }],
        _ => {
            eprintln!("error: pass exactly one of --expr or --corpus");
            return ExitCode::FAILURE;
        }
    };

    let mut all_agree = true;
    for case in &cases {
        let unit = match prepare(&case.expr_text, &case.args) {
            Ok(unit) => unit,
            Err(code) => return code,
        };
        let expr = parse(&case.expr_text).expect("parsed once already");
        let oracle = eval(&expr, &case.args, args.fuel).expect("arity checked by compile");
        let expected = match oracle {
            EvalResult::Value(v) => Some(v),
            EvalResult::Diverged(_) => None,
        };
        if let Some(recorded) = case.recorded {
            if expected != Some(recorded) {
                eprintln!(
                    "corpus mismatch: {} | {:?} records {} but the oracle yields {:?}",
                    case.expr_text, case.args, recorded, expected
                );
                all_agree = false;
                continue;
            }
        }
        let mut agreeing = 0;
        let mut first_mismatch = None;
        for seed in 0..args.seeds {
            let trace =
                run_seeded(&unit.system, seed, args.max_steps).expect("compiled systems are valid");
            let got = trace.halted_output();
            if got == expected {
                agreeing += 1;
            } else if first_mismatch.is_none() {
                first_mismatch = Some((seed, got));
            }
        }
        match first_mismatch {
            None => {
                let shown = match expected {
                    Some(v) => format!("value {v}"),
                    None => "step_limit".to_string(),
                };
                println!(
                    "agree: {} | args {:?} | {shown} | {agreeing}/{} seeds",
                    case.expr_text, case.args, args.seeds
                );
            }
            Some((seed, got)) => {
                all_agree = false;
                println!(
                    "MISMATCH: {} | args {:?} | oracle {:?} engine {:?}",
                    case.expr_text, case.args, expected, got
                );
                eprintln!(
                    "reproduce with: psys run -e '{}' -a '{}' --seed {seed} --max-steps {}",
                    case.expr_text,
                    case.args
                        .iter()
                        .map(u64::to_string)
                        .collect::<Vec<_>>()
                        .join(","),
                    args.max_steps
                );
            }
        }
    }
    if all_agree {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_MISMATCH)
    }
}

fn cmd_trace(args: TraceArgs) -> ExitCode {
    let unit = match prepare(&args.expr.expr, &args.expr.args.0) {
        Ok(unit) => unit,
        Err(code) => return code,
    };
    match args.mode {
        Mode::Random => {
            let trace = run_seeded(&unit.system, args.seed, args.max_steps)
                .expect("compiled systems are valid");
            let code = emit(&args.out, &trace.to_jsonl());
            if code == ExitCode::SUCCESS && trace.halted_output().is_none() {
                return ExitCode::from(EXIT_STEP_LIMIT);
            }
            code
        }
        Mode::Exhaustive => {
            match run_exhaustive(&unit.system, args.max_branches, args.max_steps) {
                Ok(run) => {
                    let mut text = String::new();
                    for (branch_idx, branch) in run.branches.iter().enumerate() {
                        for line in branch.trace.to_jsonl().lines() {
                            // splice the branch id into each record
                            text.push_str(&format!("{{\"branch\":{branch_idx},{}", &line[1..]));
                            text.push('\n');
                        }
                    }
                    emit(&args.out, &text)
                }
                Err(err) => {
                    eprintln!("error: {err}");
                    ExitCode::from(EXIT_BRANCH_LIMIT)
                }
            }
        }
    }
}
