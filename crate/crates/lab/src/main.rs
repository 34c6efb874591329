use clap::Parser;
use powerfree_lab::cli::{run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    if let Err(e) = run(&cli) {
        eprintln!("error: {}", e.explain());
        std::process::exit(e.exit_code());
    }
}
