use std::process::ExitCode;

fn main() -> ExitCode {
    rwfn::cli::run(std::env::args_os())
}
