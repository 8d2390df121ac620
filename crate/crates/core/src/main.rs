use std::process::ExitCode;

fn main() -> ExitCode {
    onefact::cli::run()
}
