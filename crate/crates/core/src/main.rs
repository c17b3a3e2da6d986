use clap::Parser;

use locclab::cli::{error_json, run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("{}", error_json(&e));
        std::process::exit(1);
    }
}
