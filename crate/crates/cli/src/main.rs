use std::path::PathBuf;
use std::process::ExitCode;

use ballpoly_cli::{load_config, run, write_results, Kind};
use clap::Parser;

/// Run a ball-polyhedron experiment described by a TOML file.
#[derive(Debug, Parser)]
#[command(name = "ballpoly", version)]
struct Args {
    /// Configuration file (TOML, or a JSON summary from an earlier run).
    config: PathBuf,
    /// Override the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, env = "BALLPOLY_WORKERS")]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the experiment kind.
    #[arg(long, value_enum)]
    kind: Option<Kind>,
}

const CONFIG_ERROR: u8 = 2;
const EXPERIMENT_FAILURE: u8 = 3;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(CONFIG_ERROR);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let mut cfg = match load_config(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(kind) = args.kind {
        cfg.kind = kind;
    }
    if let Some(out) = args.out {
        cfg.out = Some(out);
    }
    let violations = cfg.violations();
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("error: {v}");
        }
        return ExitCode::from(CONFIG_ERROR);
    }
    let workers = args
        .workers
        .or(cfg.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        eprintln!("error: worker count must be at least 1");
        return ExitCode::from(CONFIG_ERROR);
    }
    let record = match run(&cfg, workers) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXPERIMENT_FAILURE);
        }
    };
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    match write_results(&record, &dir) {
        Ok(w) => {
            log::info!("wrote {}", w.summary.display());
            if let Some(t) = w.table {
                log::info!("wrote {}", t.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXPERIMENT_FAILURE);
        }
    }
    if record.ok {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: {} checks did not pass; see the summary", record.kind);
        ExitCode::from(EXPERIMENT_FAILURE)
    }
}
