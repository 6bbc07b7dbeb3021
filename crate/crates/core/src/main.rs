use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use planar_leray::cli::{run, write_error_record, RunConfig};

/// Mean-anchored steady Navier-Stokes runs on invading disks.
#[derive(Parser, Debug)]
#[command(name = "planar-leray", version)]
struct Args {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Log solver progress to stderr.
    #[arg(long)]
    verbose: bool,
    /// Worker threads.
    #[arg(long, env = "PLANAR_LERAY_THREADS", hide = true)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = if args.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("error: PLANAR_LERAY_THREADS must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool is configured once");
    }

    let config = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(dir) = &args.out {
                let _ = write_error_record(dir, &e);
            }
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let Some(out_dir) = args.out.clone().or_else(|| config.output.clone()) else {
        eprintln!("error: no output directory (pass --out or set `output` in the configuration)");
        return ExitCode::from(2);
    };

    match run(&config, &out_dir) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error [{}]: {e}", e.kind());
            let _ = write_error_record(&out_dir, &e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
