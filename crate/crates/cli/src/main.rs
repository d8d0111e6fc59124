use clap::Parser;
use gravwave_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => print!("{text}"),
        Err(e) => {
            eprintln!("gravwave: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
