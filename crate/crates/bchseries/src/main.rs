use clap::error::ErrorKind;
use clap::Parser;

use bchseries::cli::{run, Cli, EXIT_INPUT};

fn main() {
    match Cli::try_parse() {
        Ok(cli) => std::process::exit(run(cli)),
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_INPUT,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    }
}
