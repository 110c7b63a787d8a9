use clap::Parser;

fn main() {
    let cli = tentmle::cli::Cli::parse();
    std::process::exit(tentmle::cli::run(cli));
}
