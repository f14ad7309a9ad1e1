use clap::Parser;

fn main() -> std::process::ExitCode {
    std::process::ExitCode::from(ksf::cli::run(ksf::cli::Cli::parse()))
}
