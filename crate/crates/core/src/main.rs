use std::process::ExitCode;

fn main() -> ExitCode {
    dtwlab::cli::main_with_args(std::env::args_os())
}
