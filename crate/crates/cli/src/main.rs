use clap::Parser;

fn main() {
    std::process::exit(lcc_cli::execute(lcc_cli::Cli::parse()));
}
