use std::process::ExitCode;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("VPS_LOG", "warn")).init();
    let stdout = std::io::stdout();
    let code = vpsplit::cli::run_cli(std::env::args_os(), &mut stdout.lock());
    ExitCode::from(code as u8)
}
