use std::process::ExitCode;

fn main() -> ExitCode {
    basket_mem::cli::main_with(std::env::args_os())
}
