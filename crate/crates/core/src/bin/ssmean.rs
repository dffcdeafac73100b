use clap::Parser;

fn main() {
    let cli = ssmean::io::Cli::parse();
    if let Err(e) = ssmean::io::run_cli(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
