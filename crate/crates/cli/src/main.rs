//! `sheafdg`: batch front end for problem files.
//!
//! Exit codes: 0 success, 1 parse error, 2 precondition violation, 3 certification failure.
//! A failed check exits 3 unless the check is the question being asked (`certify`, `qiso`,
//! `homotopy-check`); a failed `validate` check exits 2.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, ValueEnum};
use sheafdg::{parse_problem, Error, Window};

use crate::commands::{Command, Settings};

#[derive(Parser, Debug)]
#[command(name = "sheafdg", version, about = "Cohomology, resolutions and derived intersections of DG ring sheaves on finite spaces")]
struct Args {
    /// Problem file (JSON).
    #[arg(long)]
    input: PathBuf,
    /// Overrides `command.name` in the problem file.
    #[arg(long, value_enum)]
    command: Option<Command>,
    #[arg(long)]
    qmax: Option<usize>,
    /// Degree window `MIN:MAX`, e.g. `-3:0`.
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Re-derive the report's claims along independent code paths.
    #[arg(long)]
    recheck: bool,
    /// Where to write the JSON report (stdout gets the human summary either way).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Parse { .. }) => 1,
        Some(Error::Certification { .. }) => 3,
        _ => 2,
    }
}

fn settings(args: &Args, p: &sheafdg::Problem) -> Result<Settings> {
    let command = match (args.command, p.command.name.as_deref()) {
        (Some(c), _) => c,
        (None, Some(name)) => Command::from_str(name, false)
            .map_err(|_| Error::parse("command.name", format!("unknown command '{name}'")))?,
        (None, None) => return Err(Error::pre("no command given (--command or command.name)").into()),
    };
    let window: Option<Window> = match &args.window {
        Some(w) => Some(w.parse()?),
        None => p.window()?,
    };
    Ok(Settings {
        command,
        q_max: args.qmax.or(p.command.q_max),
        window,
        seed: args.seed.or(p.command.seed).unwrap_or(0),
        recheck: args.recheck,
    })
}

/// The first failed check, as the error it stands for.
fn failed_check(command: Command, report: &report::Report) -> Option<Error> {
    let (name, _) = report.checks.iter().find(|(_, &pass)| !pass)?;
    let answer = matches!(command, Command::Certify | Command::Qiso | Command::HomotopyCheck);
    if answer && !name.starts_with("recheck:") {
        return None;
    }
    Some(match command {
        Command::Validate => Error::pre(format!("check {name} failed")),
        _ => Error::Certification {
            point: "*".into(),
            degree: 0,
            condition: name.clone(),
            detail: "engine self-check failed; the report was still written".into(),
        },
    })
}

fn run(args: &Args) -> Result<()> {
    let text = std::fs::read_to_string(&args.input)
        .map_err(|e| Error::pre(format!("cannot read {}: {e}", args.input.display())))?;
    let problem = parse_problem(&text)?;
    let s = settings(args, &problem)?;
    let report = commands::run(&problem, &s)?;
    if let Some(path) = &args.out {
        std::fs::write(path, report.render_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{}", report.summary());
    match failed_check(s.command, &report) {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
