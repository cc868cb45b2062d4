use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let code = qfn_cli::run(
        std::env::args_os(),
        std::env::var(qfn_cli::TOL_ENV).ok(),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    ExitCode::from(code as u8)
}
