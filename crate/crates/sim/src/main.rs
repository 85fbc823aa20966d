use clap::Parser;

fn main() {
    let cli = robust_relay::cli::Cli::parse();
    std::process::exit(robust_relay::cli::run(cli));
}
