use clap::Parser;

fn main() {
    let cli = zerorate_cli::Cli::parse();
    std::process::exit(zerorate_cli::dispatch(&cli));
}
