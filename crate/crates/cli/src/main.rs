mod args;
mod cmd;
mod runlog;

use std::io::Write as _;
use std::process::ExitCode;

use clap::Parser;
use forge_core::Execution;

use args::{Cli, Command};

/// Exit codes: 2 usage, 3 missing input or I/O failure, 4 invalid input or
/// failed validation, 1 anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<forge_core::Error>() {
            return match e {
                forge_core::Error::Io { .. } => 3,
                forge_core::Error::Json(_) => 4,
                e if e.is_validation() => 4,
                _ => 1,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() || cause.downcast_ref::<walkdir::Error>().is_some() {
            return 3;
        }
        if cause.downcast_ref::<toml::de::Error>().is_some() {
            return 4;
        }
    }
    1
}

/// The error chain joined with ": ", skipping causes whose text the
/// message already includes.
fn message(err: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if msg.contains(&text) {
            continue;
        }
        if !msg.is_empty() {
            msg.push_str(": ");
        }
        msg.push_str(&text);
    }
    msg
}

fn init_logging(level: log::LevelFilter) {
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .target(env_logger::Target::Stderr)
        .format(|buf, record| {
            writeln!(
                buf,
                "level={} target={} msg={:?}",
                record.level().as_str().to_lowercase(),
                record.target(),
                record.args().to_string()
            )
        })
        .try_init();
}

fn setup_threads(threads: usize) -> Execution {
    #[cfg(feature = "parallel")]
    {
        if threads > 0 {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
                log::debug!("thread pool already configured: {e}");
            }
        }
        Execution::Parallel
    }
    #[cfg(not(feature = "parallel"))]
    {
        if threads > 1 {
            log::warn!("built without the parallel feature; --threads {threads} ignored");
        }
        Execution::Sequential
    }
}

pub fn run(argv: Vec<String>) -> anyhow::Result<()> {
    let cli = Cli::try_parse_from(std::iter::once("forge".to_owned()).chain(argv.iter().cloned()))?;
    init_logging(cli.log_level);
    let ctx = cmd::Ctx {
        exec: setup_threads(cli.threads),
        seed: cli.seed,
        threads: cli.threads,
        argv,
    };
    match cli.command {
        Command::Ingest(a) => cmd::corpus::ingest(&ctx, a),
        Command::Stats(a) => cmd::corpus::stats(&ctx, a),
        Command::Mix(a) => cmd::mix::mix(&ctx, a),
        Command::Audit(a) => cmd::mix::audit(&ctx, a),
        Command::Pack(a) => cmd::mix::pack(&ctx, a),
        Command::Plan(a) => cmd::plan::plan(&ctx, a),
        Command::Needle(n) => cmd::needle::run(&ctx, n),
        Command::Lossdiff(a) => cmd::report::lossdiff(&ctx, a),
        Command::Curve(a) => cmd::report::curve(&ctx, a),
        Command::Replay(a) => cmd::replay::replay(a, run),
    }
}

fn main() -> ExitCode {
    match run(std::env::args().skip(1).collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if let Some(clap_err) = err.downcast_ref::<clap::Error>() {
                let _ = clap_err.print();
                return if clap_err.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
            }
            let code = exit_code(&err);
            let report = serde_json::json!({
                "error": message(&err),
                "exit_code": code,
            });
            eprintln!("{report}");
            ExitCode::from(code)
        }
    }
}
