//! Front end of `solmap`: reads a run configuration, dispatches one
//! subcommand, and writes its CSV tables, gnuplot data and manifest.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 regularity
//! failure, 3 solver non-convergence, 4 expression domain error.

pub mod config;
pub mod data;
pub mod error;
pub mod output;

mod commands;

use config::{parse_flags, RunConfig, GLOBAL_KEYS};
pub use error::CliError;
use output::Artifacts;

/// Result of one invocation: the exit code and the line to print.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub message: String,
}

impl Outcome {
    fn failed(e: &CliError) -> Outcome {
        Outcome {
            code: e.exit_code(),
            message: format!("error: {e}"),
        }
    }
}

pub fn usage() -> String {
    let mut s = String::from("usage: solmap <subcommand> [--key value]...\n\nsubcommands:\n");
    for c in &commands::COMMANDS {
        s.push_str(&format!("  {:<22} {}\n", c.name, c.about));
    }
    s.push_str("\n`solmap <subcommand> --help` lists the keys of a subcommand.\n");
    s
}

fn command_help(c: &commands::Command) -> String {
    let mut s = format!("solmap {}: {}\n\nkeys:\n", c.name, c.about);
    for k in (c.keys)().iter().chain(&GLOBAL_KEYS) {
        let default = match k.default {
            None => "required".to_string(),
            Some("") => "optional".to_string(),
            Some(d) => format!("default {d}"),
        };
        s.push_str(&format!("  --{:<14} {} ({default})\n", k.name, k.help));
    }
    s
}

/// Runs `args` (without the program name). The worker pool size comes from
/// `--jobs`, else `SOLMAP_JOBS`, else rayon's default.
pub fn run(args: &[String]) -> Outcome {
    let Some(first) = args.first() else {
        return Outcome {
            code: 1,
            message: usage(),
        };
    };
    if matches!(first.as_str(), "help" | "--help" | "-h") {
        return Outcome {
            code: 0,
            message: usage(),
        };
    }
    let Some(cmd) = commands::find(first) else {
        return Outcome::failed(&CliError::Usage(format!(
            "unknown subcommand `{first}`\n\n{}",
            usage()
        )));
    };
    if args[1..].iter().any(|a| a == "--help" || a == "-h") {
        return Outcome {
            code: 0,
            message: command_help(cmd),
        };
    }
    let cfg = match parse_flags(args).and_then(|(_, flags)| {
        RunConfig::resolve(
            cmd.name,
            &(cmd.keys)(),
            flags,
            std::env::var("SOLMAP_JOBS").ok(),
        )
    }) {
        Ok(c) => c,
        Err(e) => return Outcome::failed(&e),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        builder = builder.num_threads(j);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => return Outcome::failed(&CliError::Usage(format!("cannot start workers: {e}"))),
    };
    let mut art = Artifacts::default();
    let result = pool.install(|| (cmd.run)(&cfg, &mut art));
    let outcome = match &result {
        Ok(summary) => Outcome {
            code: 0,
            message: summary.clone(),
        },
        Err(e) => {
            art.record("error", e);
            Outcome::failed(e)
        }
    };
    match art.write_all(&cfg, outcome.code) {
        Ok(()) => outcome,
        Err(e) => Outcome::failed(&e),
    }
}
