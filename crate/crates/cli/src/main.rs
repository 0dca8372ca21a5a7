use clap::Parser;
use douba_cli::{configure_threads, exit_code, run, Cli, Outcome};

fn main() {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| run(&cli.command));
    match &result {
        Ok(Outcome::Certified) => {}
        Ok(Outcome::Flagged(msg)) => eprintln!("warning: {msg}"),
        Err(e) => eprintln!("error: {e:#}"),
    }
    std::process::exit(exit_code(&result));
}
