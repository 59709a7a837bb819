use clap::Parser;

fn main() {
    let cli = rothe_px::Cli::parse();
    std::process::exit(rothe_px::run(cli));
}
