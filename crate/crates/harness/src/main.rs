mod cli;
mod commands;
mod config;
mod graphspec;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use cli::{Cli, Command, Format};
use commands::Outcome;

pub const SCHEMA_VERSION: u32 = 1;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

fn run_command(cli: &Cli) -> walklab::Result<Outcome> {
    let seed = cli.global.seed;
    match &cli.command {
        Command::Dist(a) => commands::dist(a, seed),
        Command::Resistance(a) => commands::resistance(a, seed),
        Command::Expander(a) => commands::expander(a, seed),
        Command::Escape(a) => commands::escape(a, seed),
        Command::Sharpness(a) => commands::sharpness(a, seed),
        Command::Collide(a) => commands::collide(a, seed),
        Command::Verify(a) => commands::verify(a, seed),
        Command::Construct(a) => commands::construct(a, seed),
    }
}

fn emit(cli: &Cli, outcome: &Outcome) -> std::io::Result<()> {
    let name = cli.command.name();
    let envelope = json!({
        "schema_version": SCHEMA_VERSION,
        "command": name,
        "seed": cli.global.seed,
        "pass": outcome.checks.iter().all(|c| c.pass),
        "checks": outcome.checks,
        "report": outcome.report,
    });
    let json_text = serde_json::to_string_pretty(&envelope).expect("report serializes") + "\n";
    match (&cli.global.out, cli.global.format) {
        (Some(dir), Format::Json) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(format!("{name}.json")), json_text)
        }
        (Some(dir), Format::Csv) => {
            fs::create_dir_all(dir)?;
            for (file, body) in &outcome.files {
                fs::write(dir.join(file), body)?;
            }
            Ok(())
        }
        (None, Format::Json) => std::io::stdout().write_all(json_text.as_bytes()),
        (None, Format::Csv) => {
            let mut out = std::io::stdout().lock();
            for (i, (_, body)) in outcome.files.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                out.write_all(body.as_bytes())?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match config::merge_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Some(w) = cli.global.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(w).build_global() {
            eprintln!("cannot start {w} workers: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let outcome = match run_command(&cli) {
        Ok(o) => o,
        Err(e @ walklab::Error::ResourceLimit { .. }) => {
            eprintln!("resource guard: {e}");
            return ExitCode::from(EXIT_RESOURCE);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    for c in outcome.checks.iter().filter(|c| !c.pass) {
        eprintln!("check failed: {} ({})", c.name, c.detail);
    }
    if let Err(e) = emit(&cli, &outcome) {
        eprintln!("cannot write report: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let failed = outcome.checks.iter().any(|c| !c.pass);
    let enforce = cli.global.strict || matches!(cli.command, Command::Verify(_));
    if failed && enforce {
        ExitCode::from(EXIT_CHECK_FAILED)
    } else {
        ExitCode::SUCCESS
    }
}
