use std::io::Write;

use clap::Parser;
use cograd::cli::{run, Cli};

fn main() {
    let outcome = run(Cli::parse());
    std::io::stdout().write_all(outcome.stdout.as_bytes()).expect("write stdout");
    std::io::stderr().write_all(outcome.stderr.as_bytes()).expect("write stderr");
    std::process::exit(outcome.code);
}
