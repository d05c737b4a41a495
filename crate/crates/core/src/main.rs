use std::process::ExitCode;

fn main() -> ExitCode {
    gqp_lab::cli::main_with_args(std::env::args_os())
}
