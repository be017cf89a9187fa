use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use stoint::verify::Grid;
use stoint::{evaluate, IntegralClass, IntegralRequest};
use stoint_cli::*;

#[derive(Parser)]
#[command(name = "stoint", version, about = "Two-center electron interaction integrals over Slater-type orbitals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one integral.
    Eval(EvalArgs),
    /// Evaluate line-delimited JSON cases.
    Batch(BatchArgs),
    /// Run the invariant and oracle suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct EvalArgs {
    /// exchange, hybrid or coulomb
    #[arg(long)]
    class: String,
    /// "n l m delta"
    #[arg(long, allow_hyphen_values = true)]
    orb1: String,
    #[arg(long, allow_hyphen_values = true)]
    orb2: String,
    #[arg(long, allow_hyphen_values = true)]
    orb3: String,
    #[arg(long, allow_hyphen_values = true)]
    orb4: String,
    /// Internuclear distance (bohr).
    #[arg(long = "R", allow_hyphen_values = true)]
    distance: String,
    #[arg(long, allow_hyphen_values = true)]
    mu_tol: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    series_tol: Option<String>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args)]
struct BatchArgs {
    input: PathBuf,
    /// Output file; standard output when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// Include per-case wall time in the records.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "small")]
    grid: String,
    #[arg(long, hide = true)]
    mutate_phase: bool,
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn eval(a: EvalArgs) -> Result<ExitCode, CliError> {
    let class: IntegralClass = a.class.parse().map_err(|e: stoint::Error| CliError::parse("--class", e.to_string()))?;
    let orbs = [
        parse_orbital("--orb1", &a.orb1)?,
        parse_orbital("--orb2", &a.orb2)?,
        parse_orbital("--orb3", &a.orb3)?,
        parse_orbital("--orb4", &a.orb4)?,
    ];
    let r = parse_positive("--R", &a.distance)?;
    let mut cfg = config_from_env()?;
    if let Some(t) = &a.mu_tol {
        cfg.mu_tol = parse_positive("--mu-tol", t)?;
    }
    if let Some(t) = &a.series_tol {
        cfg.series_tol = parse_positive("--series-tol", t)?;
    }
    let req = IntegralRequest::new(class, orbs, r);
    if let Err(e) = req.validate() {
        let flag = match e {
            stoint::Error::InvalidQuantumNumbers { slot, .. } | stoint::Error::InvalidExponent { slot, .. } => format!("--orb{slot}"),
            _ => "--R".into(),
        };
        return Err(CliError::parse(flag, e.to_string()));
    }
    let out = evaluate(&req, &cfg);
    let rec = ResultRecord::from_outcome("eval", &out, None);
    match a.format {
        Format::Text => print!("{}", rec.to_text()),
        Format::Json => println!("{}", rec.to_json()),
    }
    match out {
        Ok(_) => Ok(ExitCode::SUCCESS),
        Err(e) => Err(CliError::Engine(e)),
    }
}

fn io(p: &std::path::Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: p.display().to_string(), source }
}

fn batch(a: BatchArgs) -> Result<ExitCode, CliError> {
    let input = std::fs::read_to_string(&a.input).map_err(io(&a.input))?;
    let cfg = config_from_env()?;
    let (records, summary) = run_batch(&input, &cfg, a.workers, a.timing)?;
    let mut text = String::new();
    for r in &records {
        text += &r.to_json();
        text.push('\n');
    }
    match &a.output {
        Some(p) => std::fs::write(p, text).map_err(io(p))?,
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "stdout".into(), source })?,
    }
    eprintln!("{summary}");
    Ok(if summary.error == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn verify_cmd(a: VerifyArgs) -> Result<ExitCode, CliError> {
    let grid: Grid = a.grid.parse().map_err(|e: stoint::Error| CliError::parse("--grid", e.to_string()))?;
    let reports = verify(grid, a.mutate_phase);
    for r in &reports {
        println!("{r}");
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if failed.is_empty() {
        println!("all {} checks passed ({grid} grid)", reports.len());
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("failed checks: {}", failed.join(", "));
        Ok(ExitCode::from(EXIT_VERIFY as u8))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Eval(a) => eval(a),
        Command::Batch(a) => batch(a),
        Command::Verify(a) => verify_cmd(a),
    };
    out.unwrap_or_else(|e| fail(&e))
}
