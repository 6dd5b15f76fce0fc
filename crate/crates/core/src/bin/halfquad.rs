use std::process::ExitCode;

fn main() -> ExitCode {
    let args = std::env::args().collect();
    let code = halfquad::cli::run_cli(args, &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(code as u8)
}
