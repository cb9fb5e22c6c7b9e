use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{error::ErrorKind, Parser, Subcommand, ValueEnum};
use newton_mr_tmp::experiment::{
    load_config, run_experiment, RunOptions, TraceFormat, OUTPUT_DIR_ENV,
};

/// Newton-MR two-metric projection experiment runner.
#[derive(Parser)]
#[command(name = "nmr-tmp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more experiment configs.
    ///
    /// Exit status: 0 if every run converged, 2 if any run stopped without
    /// converging, 1 on configuration, data or I/O errors. Trace and summary
    /// files go to the paths in each config, or to $NMRTMP_OUTPUT_DIR if set.
    Run {
        /// JSON config files.
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        /// Override the trace format of every config.
        #[arg(long, value_enum)]
        trace_format: Option<Format>,
        /// Number of configs to run concurrently.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        jobs: u64,
        /// Also write x_k for every traced iteration to <trace>.snapshots.jsonl.
        #[arg(long)]
        snapshot_x: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Jsonl,
    Csv,
}

/// Outcome of one config: exit code and the line reported for it.
fn run_one(path: &PathBuf, options: &RunOptions) -> (u8, String) {
    let config = match load_config(path) {
        Ok(c) => c,
        Err(e) => return (1, format!("{}: {e}", path.display())),
    };
    match run_experiment(&config, options) {
        Ok(s) => {
            let mut line = format!(
                "{}: {:?} after {} iterations, f = {:.6e}, weighted oracle calls = {}, trace = {}",
                path.display(),
                s.status,
                s.iterations,
                s.f_final,
                s.weighted_oracle_total,
                s.trace_path.display()
            );
            if let Some(m) = &s.message {
                line.push_str(&format!(" ({m})"));
            }
            (s.exit_code() as u8, line)
        }
        Err(e) => (1, format!("{}: {e}", path.display())),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let Command::Run {
        configs,
        trace_format,
        jobs,
        snapshot_x,
    } = cli.command;

    let options = RunOptions {
        trace_format: trace_format.map(|f| match f {
            Format::Jsonl => TraceFormat::Jsonl,
            Format::Csv => TraceFormat::Csv,
        }),
        snapshot_x,
        output_dir: std::env::var_os(OUTPUT_DIR_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from),
    };
    if configs.len() > 1 && options.output_dir.is_some() {
        log::warn!(
            "{OUTPUT_DIR_ENV} is set: runs with the same output file names overwrite each other"
        );
    }

    let results: Mutex<Vec<Option<(u8, String)>>> = Mutex::new(vec![None; configs.len()]);
    let next = AtomicUsize::new(0);
    let workers = (jobs as usize).min(configs.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(path) = configs.get(i) else { break };
                let outcome = run_one(path, &options);
                results
                    .lock()
                    .expect("no worker panics while holding the lock")[i] = Some(outcome);
            });
        }
    });

    let mut code = 0u8;
    for (status, line) in results
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .flatten()
    {
        if status != 1 {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
        code = match (code, status) {
            (1, _) | (_, 1) => 1,
            (a, b) => a.max(b),
        };
    }
    ExitCode::from(code)
}
