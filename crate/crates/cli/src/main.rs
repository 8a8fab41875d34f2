use std::process::ExitCode;

fn main() -> ExitCode {
    hsikit::main_with_args(std::env::args_os())
}
