use clap::Parser;
use protodesign_cli::cli::{run_to_exit_code, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    configure_threads();
    std::process::exit(run_to_exit_code(&cli));
}

/// PROTODESIGN_THREADS caps the worker pool; unset means all cores.
fn configure_threads() {
    let Ok(value) = std::env::var("PROTODESIGN_THREADS") else {
        return;
    };
    match value.trim().parse::<usize>() {
        Ok(n) if n >= 1 => {
            #[cfg(feature = "parallel")]
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("could not size the thread pool: {e}");
            }
            #[cfg(not(feature = "parallel"))]
            log::debug!("built without parallelism, ignoring PROTODESIGN_THREADS={n}");
        }
        _ => log::warn!("ignoring PROTODESIGN_THREADS={value:?}, expected a positive integer"),
    }
}
