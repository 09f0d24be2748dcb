use std::process::ExitCode;

fn main() -> ExitCode {
    balance_attack::cli::main()
}
