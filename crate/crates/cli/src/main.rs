use clap::Parser;
use probenet_cli::cli::Cli;
use probenet_cli::{commands, init_threads, StageError};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads().map_err(|e| StageError::new("config", e)).and_then(|_| commands::run(&cli.command));
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
