use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(irt_identify::cli::run(std::env::args()) as u8)
}
