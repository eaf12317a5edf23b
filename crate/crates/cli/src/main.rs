use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(hbvm_cli::run(std::env::args_os()) as u8)
}
