mod args;
mod commands;
mod config;
mod output;

use std::path::Path;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches};

use args::{Cli, Command};
use config::Config;
use output::Sink;

/// Exit status 1: a check ran and failed.
pub const EXIT_FAIL: u8 = 1;
/// Exit status 2: bad configuration or input outside the domain.
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<cohlim::Error> for CliError {
    fn from(e: cohlim::Error) -> Self {
        use cohlim::Error::*;
        let code = match e {
            TruncationGuard { .. } | HalfPlaneBarrier { .. } | Integrator(_) => EXIT_FAIL,
            _ => EXIT_CONFIG,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("COHLIM_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::config(format!("COHLIM_THREADS must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::config(format!("cannot configure worker threads: {e}")))
}

enum Parsed {
    Cli(Cli),
    Exit(u8),
}

/// The clap command with negative numbers accepted as option values.
fn command() -> clap::Command {
    let mut cmd = Cli::command();
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    for name in names {
        cmd = cmd.mut_subcommand(name, |s| s.allow_negative_numbers(true));
    }
    cmd
}

fn parse(argv: &[String]) -> Parsed {
    match command()
        .try_get_matches_from(argv)
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(cli) => Parsed::Cli(cli),
        Err(e) => {
            let _ = e.print();
            Parsed::Exit(e.exit_code() as u8)
        }
    }
}

fn run(argv: Vec<String>) -> Result<u8, CliError> {
    configure_threads()?;
    let cmd = command();
    let config = match config::config_path(&argv) {
        Some(path) => Some(Config::load(Path::new(&path), &cmd)?),
        None => None,
    };
    let expand = |study: Option<&str>| -> Result<Vec<String>, CliError> {
        match (&config, config::subcommand_name(&argv, &cmd)) {
            (Some(cfg), Some(sub)) => cfg.expand(&argv, &sub, study, &cmd),
            _ => Ok(argv.clone()),
        }
    };
    let cli = match parse(&expand(None)?) {
        Parsed::Cli(cli) => cli,
        Parsed::Exit(code) => return Ok(code),
    };
    let sink = Sink {
        json: cli.json,
        out: cli.out.clone(),
    };
    match &cli.command {
        Command::Transform(a) => commands::transform(&sink, a),
        Command::Symbols(a) => commands::symbols(&sink, a),
        Command::Overlap(a) => commands::overlap(&sink, a),
        Command::ResolutionCheck(a) => commands::resolution_check(&sink, a),
        Command::LimitCheck(a) => {
            let mut jobs = Vec::new();
            for &study in &a.study.0 {
                let args = if config.is_some() {
                    match parse(&expand(Some(study.name()))?) {
                        Parsed::Cli(Cli {
                            command: Command::LimitCheck(b),
                            ..
                        }) => b,
                        Parsed::Exit(code) => return Ok(code),
                        Parsed::Cli(_) => unreachable!("same subcommand"),
                    }
                } else {
                    a.clone()
                };
                jobs.push((study, args));
            }
            commands::limit_check(&sink, &jobs)
        }
        Command::Evolve(a) => commands::evolve(&sink, a),
        Command::Freeparticle(a) => commands::freeparticle(&sink, a),
        Command::CasimirCheck(a) => commands::casimir_check(&sink, a),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args_os()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match run(argv) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
