//! The `geyor` command-line tool: batch commands over `geyor-core` with CSV
//! or JSON output and a run manifest per invocation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
mod commands;
mod manifest;
mod output;
mod parse;

use std::ffi::OsString;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

pub use args::Cli;
pub use manifest::RunManifest;

/// Environment variable overriding `--threads`.
pub const THREADS_ENV: &str = "GEYOR_THREADS";

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or inputs: exit code 2.
    Usage(String),
    /// Numeric failure: exit code 1.
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<geyor_core::Error> for CliError {
    fn from(e: geyor_core::Error) -> Self {
        use geyor_core::Error as E;
        match e {
            E::Config(_) | E::InvalidPoint(_) | E::LengthMismatch { .. } | E::Domain(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }
}

/// What a command produced.
pub(crate) struct CommandOutput {
    pub text: String,
    pub seeds: Vec<u64>,
    /// Set when the command ran but reports a failed check.
    pub failed: bool,
}

fn resolve_threads(flag: Option<usize>) -> Result<usize, CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        };
    }
    match flag {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Parse `args`, run the command and emit its manifest.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let started = Instant::now();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            if code != 0 {
                let m = RunManifest::unparsed(started.elapsed().as_secs_f64(), code);
                let _ = m.emit(None);
            }
            return ExitCode::from(code);
        }
    };

    let mut manifest = RunManifest::new(&cli);
    let result = resolve_threads(cli.threads).and_then(|n| {
        manifest.threads = n;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Numeric(format!("cannot start worker pool: {e}")))?;
        let out = pool.install(|| commands::run(&cli))?;
        manifest.seeds = out.seeds.clone();
        let digest = output::write(cli.output.as_deref(), &out.text)?;
        manifest.outputs.push(digest);
        Ok(out.failed)
    });

    let code: u8 = match result {
        Ok(false) => 0,
        Ok(true) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    manifest.exit_code = code;
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    if let Err(e) = manifest.emit(cli.manifest.as_deref()) {
        eprintln!("error: cannot write manifest: {e}");
        return ExitCode::from(if code == 0 { 1 } else { code });
    }
    ExitCode::from(code)
}
