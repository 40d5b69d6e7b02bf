use clap::Parser;

fn main() {
    let args = powermix::cli::Args::parse();
    std::process::exit(powermix::cli::main_with(args));
}
