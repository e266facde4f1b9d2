use std::process::ExitCode;

fn main() -> ExitCode {
    sann::cli::main_with_args(std::env::args_os())
}
