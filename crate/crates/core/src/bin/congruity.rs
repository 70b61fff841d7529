use clap::Parser;

fn main() {
    let cli = congruity::cli::Cli::parse();
    if let Err(err) = congruity::cli::run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
