use clap::Parser;

fn main() {
    let cli = pdistill::Cli::parse();
    std::process::exit(pdistill::execute(&cli));
}
