//! `qamem` command-line entry point.
//!
//! Exit codes: 0 success, 2 validation error, 3 runtime or numerical
//! failure.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Arg, ArgAction, Command};

use commands::{open_output, Job};
use config::{load_config, Param, Resolved, SHARED, SUBCOMMANDS};

const VALIDATION: u8 = 2;
const RUNTIME: u8 = 3;

fn arg(p: &Param) -> Arg {
    let help = match p.default {
        Some(d) if !p.switch => format!("{} [default: {d}]", p.help),
        _ => p.help.to_string(),
    };
    let a = Arg::new(p.key).long(p.key).help(help);
    if p.switch {
        a.action(ArgAction::SetTrue)
    } else {
        a.value_name("VALUE").allow_negative_numbers(true).action(ArgAction::Set)
    }
}

fn cli() -> Command {
    let mut cmd = Command::new("qamem")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Classical, quantum and mean-field associative memory experiments")
        .subcommand_required(true)
        .arg_required_else_help(true)
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("PATH")
                .global(true)
                .help("key=value file; command-line flags take precedence"),
        );
    for p in SHARED {
        cmd = cmd.arg(arg(p).global(true));
    }
    for (name, about, table) in SUBCOMMANDS {
        let sub = Command::new(*name).about(*about).args(table.iter().map(arg));
        cmd = cmd.subcommand(sub);
    }
    cmd
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let matches = match cli().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { VALIDATION } else { 0 });
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand is required");
    let (name, table) = SUBCOMMANDS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(n, _, t)| (*n, *t))
        .expect("subcommands come from the table");

    let file = match sub.get_one::<String>("config") {
        Some(path) => match load_config(&PathBuf::from(path)) {
            Ok(entries) => entries,
            Err(e) => return fail(VALIDATION, e),
        },
        None => Vec::new(),
    };
    let resolved = match Resolved::resolve(name, &[SHARED, table], sub, &file) {
        Ok(r) => r,
        Err(e) => return fail(VALIDATION, e),
    };

    match resolved.opt::<usize>("jobs") {
        Ok(Some(0)) => return fail(VALIDATION, "--jobs: must be at least 1"),
        Ok(Some(k)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
                return fail(RUNTIME, e);
            }
        }
        Ok(None) => {}
        Err(e) => return fail(VALIDATION, e),
    }
    eprint!("{}", resolved.describe());

    let job = match Job::prepare(&resolved) {
        Ok(j) => j,
        Err(e) => return fail(VALIDATION, e),
    };
    let mut out = match open_output(&resolved) {
        Ok(w) => w,
        Err(e) => return fail(VALIDATION, e),
    };
    if let Err(e) = job.run(&mut out) {
        return fail(RUNTIME, e);
    }
    if let Err(e) = out.flush() {
        return fail(RUNTIME, e);
    }
    ExitCode::SUCCESS
}
